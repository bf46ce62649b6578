use rand::Rng;

use super::binary::realize;
use super::{Agent, Archive, Evaluator};
use crate::data::FeatureMask;
use crate::error::{Error, Result};
use crate::rng;

/// Firefly search settings.
#[derive(Debug, Clone, PartialEq)]
pub struct FireflyParams {
    pub population: usize,
    pub iterations: usize,
    /// Light absorption coefficient (gamma).
    pub gamma_absorption: f64,
    /// Attractiveness floor, reached as distance grows.
    pub beta_min: f64,
    /// Attractiveness at zero distance.
    pub beta_zero: f64,
    /// Scale of the uniform random step.
    pub alpha_step: f64,
    /// Logistic-map coefficient for population initialization.
    pub chaotic_coefficient: f64,
    pub mutation_prob: f64,
    pub report_frequency: usize,
    pub seed: u64,
}

impl Default for FireflyParams {
    fn default() -> Self {
        Self {
            population: 20,
            iterations: 20,
            gamma_absorption: 0.001,
            beta_min: 0.33,
            beta_zero: 1.0,
            alpha_step: 0.5,
            chaotic_coefficient: 4.0,
            mutation_prob: 0.01,
            report_frequency: 20,
            seed: 1,
        }
    }
}

impl FireflyParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("firefly: {m}")));
        if self.population < 2 {
            return bad(format!("population must be >= 2, got {}", self.population));
        }
        if !(0.0 <= self.beta_min && self.beta_min <= self.beta_zero) {
            return bad(format!(
                "need 0 <= beta_min <= beta_zero, got {} and {}",
                self.beta_min, self.beta_zero
            ));
        }
        if !(self.gamma_absorption >= 0.0 && self.gamma_absorption.is_finite()) {
            return bad(format!(
                "gamma_absorption {} must be finite and >= 0",
                self.gamma_absorption
            ));
        }
        if !(self.alpha_step >= 0.0 && self.alpha_step.is_finite()) {
            return bad(format!("alpha_step {} must be finite and >= 0", self.alpha_step));
        }
        if !(self.chaotic_coefficient > 0.0 && self.chaotic_coefficient <= 4.0) {
            return bad(format!(
                "chaotic_coefficient {} outside (0, 4]",
                self.chaotic_coefficient
            ));
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return bad(format!("mutation_prob {} outside [0, 1]", self.mutation_prob));
        }
        if self.report_frequency == 0 {
            return bad("report_frequency must be >= 1".into());
        }
        Ok(())
    }
}

/// `beta_min + (beta_zero - beta_min) * exp(-gamma * r^2)`.
pub fn attractiveness(r: f64, params: &FireflyParams) -> f64 {
    params.beta_min + (params.beta_zero - params.beta_min) * (-params.gamma_absorption * r * r).exp()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// One synchronous firefly generation.
///
/// Each agent moves toward the brightest other agent that is strictly brighter
/// than itself (lowest index on ties), or takes a pure random step when no such
/// agent exists. Moves are computed from the previous generation's positions.
/// Agent `i` draws from substream `(seed, i, iteration)`.
pub fn firefly_step(
    pop: &[Agent],
    params: &FireflyParams,
    evaluator: &mut Evaluator<'_>,
    archive: &mut Archive,
    iteration: usize,
) -> Result<Vec<Agent>> {
    let fitness: Vec<f64> = pop
        .iter()
        .enumerate()
        .map(|(i, a)| a.evaluated_fitness(i))
        .collect::<Result<_>>()?;

    let mut next = Vec::with_capacity(pop.len());
    let mut masks: Vec<FeatureMask> = Vec::with_capacity(pop.len());
    for (i, agent) in pop.iter().enumerate() {
        let mut rng = rng::substream(params.seed, i as u64, iteration as u64);
        let brighter = (0..pop.len()).filter(|&j| j != i && fitness[j] > fitness[i]).fold(
            None,
            |best: Option<usize>, j| match best {
                Some(b) if fitness[b] >= fitness[j] => Some(b),
                _ => Some(j),
            },
        );

        let x = &agent.position;
        let mut moved = x.clone();
        match brighter {
            Some(j) => {
                let target = &pop[j].position;
                let beta = attractiveness(distance(x, target), params);
                for (k, v) in moved.iter_mut().enumerate() {
                    *v += beta * (target[k] - x[k]) + params.alpha_step * (rng.gen::<f64>() - 0.5);
                }
            }
            None => {
                for v in moved.iter_mut() {
                    *v += params.alpha_step * (rng.gen::<f64>() - 0.5);
                }
            }
        }
        masks.push(realize(&mut moved, params.mutation_prob, &mut rng));
        next.push(Agent {
            position: moved,
            fitness: None,
            herd: agent.herd,
        });
    }

    let scores = evaluator.evaluate(&masks)?;
    for ((agent, mask), score) in next.iter_mut().zip(&masks).zip(scores) {
        agent.fitness = Some(score);
        archive.offer(mask, score);
    }
    Ok(next)
}
