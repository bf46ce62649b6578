//! Elephant search.
//!
//! Females live in clans and search locally around their clan's matriarch (the
//! fittest female). Males are rangers that restart anywhere in the hypercube.
//! Agents that come within each other's visual range compete and the less fit
//! one is displaced. Every agent has a finite lifetime; when it dies a newborn
//! of the same sex and clan takes its slot, so the herd's size and sex balance
//! never change.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::binary::realize;
use super::chaos::chaotic_position;
use super::{chaotic_init, Agent, Archive, Evaluator};
use crate::data::FeatureMask;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sex {
    Female,
    Male,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HerdMember {
    pub sex: Sex,
    pub clan: usize,
    /// Generations lived.
    pub age: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElephantParams {
    pub population: usize,
    pub iterations: usize,
    pub n_clans: usize,
    pub male_fraction: f64,
    /// Defaults to `0.1 * sqrt(d)` when unset.
    pub female_visual_radius: Option<f64>,
    /// Defaults to `0.3 * sqrt(d)` when unset.
    pub male_visual_radius: Option<f64>,
    pub max_age: usize,
    pub chaotic_coefficient: f64,
    pub mutation_prob: f64,
    pub report_frequency: usize,
    pub seed: u64,
}

impl Default for ElephantParams {
    fn default() -> Self {
        Self {
            population: 20,
            iterations: 20,
            n_clans: 2,
            male_fraction: 0.2,
            female_visual_radius: None,
            male_visual_radius: None,
            max_age: 10,
            chaotic_coefficient: 4.0,
            mutation_prob: 0.01,
            report_frequency: 20,
            seed: 1,
        }
    }
}

impl ElephantParams {
    pub fn n_males(&self) -> usize {
        (self.population as f64 * self.male_fraction).round() as usize
    }

    pub fn n_females(&self) -> usize {
        self.population - self.n_males().min(self.population)
    }

    /// `(female, male)` visual radii for a `d`-dimensional search.
    pub fn visual_radii(&self, d: usize) -> (f64, f64) {
        let scale = (d as f64).sqrt();
        (
            self.female_visual_radius.unwrap_or(0.1 * scale),
            self.male_visual_radius.unwrap_or(0.3 * scale),
        )
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("elephant: {m}")));
        if self.population < 2 {
            return bad(format!("population must be >= 2, got {}", self.population));
        }
        if !(0.0..1.0).contains(&self.male_fraction) {
            return bad(format!("male_fraction {} outside [0, 1)", self.male_fraction));
        }
        if self.n_clans == 0 || self.n_clans > self.n_females() {
            return bad(format!(
                "n_clans {} must be between 1 and the female count {}",
                self.n_clans,
                self.n_females()
            ));
        }
        let (female, male) = self.visual_radii(d);
        if !(female >= 0.0 && male > female && male.is_finite()) {
            return bad(format!(
                "need 0 <= female_visual_radius < male_visual_radius, got {female} and {male}"
            ));
        }
        if self.max_age == 0 {
            return bad("max_age must be >= 1".into());
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

/// Chaotic initial positions plus herd roles.
///
/// Agents `0..n_females` are female and the rest male. Each sex is dealt over
/// the clans round-robin. Initial ages are staggered (`i mod (max_age + 1)`) so
/// deaths spread over the run instead of striking the whole herd at once.
pub(crate) fn init_herd(params: &ElephantParams, d: usize) -> Result<Vec<Agent>> {
    params.validate(d)?;
    let females = params.n_females();
    let mut pop = chaotic_init(params.population, d, params.chaotic_coefficient, params.seed);
    for (i, agent) in pop.iter_mut().enumerate() {
        let (sex, rank) = if i < females {
            (Sex::Female, i)
        } else {
            (Sex::Male, i - females)
        };
        agent.herd = Some(HerdMember {
            sex,
            clan: rank % params.n_clans,
            age: i % (params.max_age + 1),
        });
    }
    Ok(pop)
}

fn herd_of(agent: &Agent, index: usize) -> Result<HerdMember> {
    agent
        .herd
        .ok_or_else(|| Error::State(format!("agent {index} has no herd role")))
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn uniform_position(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.gen::<f64>()).collect()
}

/// Evaluates the given agents' masks, stores fitness and feeds the archive.
fn score(
    pop: &mut [Agent],
    which: &[usize],
    masks: Vec<FeatureMask>,
    evaluator: &mut Evaluator<'_>,
    archive: &mut Archive,
) -> Result<()> {
    let scores = evaluator.evaluate(&masks)?;
    for ((&i, mask), s) in which.iter().zip(&masks).zip(scores) {
        pop[i].fitness = Some(s);
        archive.offer(mask, s);
    }
    Ok(())
}

/// Visual-range competition over an evaluated population.
///
/// Pairs `(i, j)`, `i < j`, are visited in order. When both are still standing
/// and their distance is at most `min(radii[i], radii[j])`, the less fit agent
/// is marked displaced; equal fitness displaces the higher index.
pub(crate) fn compete(pop: &[Agent], radii: &[f64]) -> Vec<bool> {
    let n = pop.len();
    let mut displaced = vec![false; n];
    for i in 0..n {
        for j in i + 1..n {
            if displaced[i] {
                break;
            }
            if displaced[j] {
                continue;
            }
            let reach = radii[i].min(radii[j]);
            if distance(&pop[i].position, &pop[j].position) <= reach {
                let fi = pop[i].fitness.unwrap_or(f64::NEG_INFINITY);
                let fj = pop[j].fitness.unwrap_or(f64::NEG_INFINITY);
                if fj > fi {
                    displaced[i] = true;
                } else {
                    displaced[j] = true;
                }
            }
        }
    }
    displaced
}

/// One elephant search generation.
///
/// 1. Every non-matriarch female moves `x += s * (matriarch - x) + g` with
///    `s ~ U[0, 1]` and `g` Gaussian with per-coordinate standard deviation
///    `female_visual_radius / sqrt(d)`; a matriarch takes only `g`.
/// 2. Every male relocates uniformly at random.
/// 3. All agents are clamped, binarized, mutated and evaluated.
/// 4. Pairs within `min` of their visual radii compete: the fitter agent stays,
///    the other is relocated uniformly and re-evaluated. Equal fitness keeps
///    the lower index.
/// 5. Ages increase; agents older than `max_age` are replaced by a newborn of
///    the same sex and clan at a chaotic position, then evaluated.
///
/// Agent `i` draws from substream `(seed, i, iteration)` for all of the above.
pub fn elephant_step(
    pop: &[Agent],
    params: &ElephantParams,
    evaluator: &mut Evaluator<'_>,
    archive: &mut Archive,
    iteration: usize,
) -> Result<Vec<Agent>> {
    let n = pop.len();
    let d = pop.first().map_or(0, |a| a.position.len());
    let fitness: Vec<f64> = pop
        .iter()
        .enumerate()
        .map(|(i, a)| a.evaluated_fitness(i))
        .collect::<Result<_>>()?;
    let herd: Vec<HerdMember> = pop
        .iter()
        .enumerate()
        .map(|(i, a)| herd_of(a, i))
        .collect::<Result<_>>()?;
    let (female_radius, male_radius) = params.visual_radii(d);
    let sigma = if d > 0 { female_radius / (d as f64).sqrt() } else { 0.0 };

    let mut matriarch: Vec<Option<usize>> = vec![None; params.n_clans];
    for (i, h) in herd.iter().enumerate() {
        if h.sex != Sex::Female {
            continue;
        }
        let slot = &mut matriarch[h.clan % params.n_clans];
        match *slot {
            Some(m) if fitness[m] >= fitness[i] => {}
            _ => *slot = Some(i),
        }
    }

    let mut rngs: Vec<ChaCha8Rng> = (0..n)
        .map(|i| rng::substream(params.seed, i as u64, iteration as u64))
        .collect();
    let mut next: Vec<Agent> = pop.to_vec();

    // Movement.
    for i in 0..n {
        let rng = &mut rngs[i];
        let x = &mut next[i].position;
        match herd[i].sex {
            Sex::Female => {
                let lead = matriarch[herd[i].clan % params.n_clans].unwrap_or(i);
                let s: f64 = if lead == i { 0.0 } else { rng.gen() };
                let target = &pop[lead].position;
                for k in 0..d {
                    let g = sigma * rng::standard_normal(rng);
                    x[k] += s * (target[k] - x[k]) + g;
                }
            }
            Sex::Male => *x = uniform_position(rng, d),
        }
    }
    let all: Vec<usize> = (0..n).collect();
    let masks = all
        .iter()
        .map(|&i| realize(&mut next[i].position, params.mutation_prob, &mut rngs[i]))
        .collect();
    score(&mut next, &all, masks, evaluator, archive)?;

    // Visual-range competition.
    let radii: Vec<f64> = herd
        .iter()
        .map(|h| match h.sex {
            Sex::Female => female_radius,
            Sex::Male => male_radius,
        })
        .collect();
    let displaced = compete(&next, &radii);
    let losers: Vec<usize> = (0..n).filter(|&i| displaced[i]).collect();
    if !losers.is_empty() {
        let masks = losers
            .iter()
            .map(|&i| {
                next[i].position = uniform_position(&mut rngs[i], d);
                realize(&mut next[i].position, params.mutation_prob, &mut rngs[i])
            })
            .collect();
        score(&mut next, &losers, masks, evaluator, archive)?;
    }

    // Ageing and same-sex rebirth.
    let mut newborn = Vec::new();
    for (i, agent) in next.iter_mut().enumerate() {
        let member = agent.herd.as_mut().expect("herd checked above");
        member.age += 1;
        if member.age > params.max_age {
            member.age = 0;
            newborn.push(i);
        }
    }
    if !newborn.is_empty() {
        let masks = newborn
            .iter()
            .map(|&i| {
                next[i].position = chaotic_position(&mut rngs[i], d, params.chaotic_coefficient);
                realize(&mut next[i].position, params.mutation_prob, &mut rngs[i])
            })
            .collect();
        score(&mut next, &newborn, masks, evaluator, archive)?;
    }
    Ok(next)
}
