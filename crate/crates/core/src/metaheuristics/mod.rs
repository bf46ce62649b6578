//! Population-based binary feature-subset search.
//!
//! Both optimizers move agents through the unit hypercube `[0, 1]^d`; an agent's
//! feature mask is its position thresholded at 0.5. Fitness is maximized and a
//! best-ever archive makes the reported fitness monotone over iterations.

mod binary;
mod chaos;
mod elephant;
mod eval;
mod firefly;

pub use self::binary::{binarize, bit_flip_mutate, DEFAULT_THRESHOLD};
pub use self::chaos::{chaotic_init, logistic_map};
pub use self::elephant::{elephant_step, ElephantParams, HerdMember, Sex};
pub use self::eval::{Archive, Evaluator, MaskObjective};
pub use self::firefly::{attractiveness, firefly_step, FireflyParams};

use std::fmt;
use std::str::FromStr;

use crate::data::FeatureMask;
use crate::error::{Error, Result};

/// One search individual.
#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub position: Vec<f64>,
    /// Objective value at `binarize(position)`, once evaluated.
    pub fitness: Option<f64>,
    /// Sex, clan and age; only elephant search populations carry these.
    pub herd: Option<HerdMember>,
}

impl Agent {
    pub fn new(position: Vec<f64>) -> Self {
        Self {
            position,
            fitness: None,
            herd: None,
        }
    }

    pub fn mask(&self) -> FeatureMask {
        binarize(&self.position, DEFAULT_THRESHOLD)
    }

    pub(crate) fn evaluated_fitness(&self, index: usize) -> Result<f64> {
        self.fitness
            .ok_or_else(|| Error::State(format!("agent {index} has not been evaluated")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Firefly,
    Elephant,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Firefly => "firefly",
            Algorithm::Elephant => "elephant",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "firefly" | "ffs" | "fa" => Ok(Algorithm::Firefly),
            "elephant" | "es" | "esa" => Ok(Algorithm::Elephant),
            other => Err(Error::Config(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchParams {
    Firefly(FireflyParams),
    Elephant(ElephantParams),
}

impl SearchParams {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            SearchParams::Firefly(_) => Algorithm::Firefly,
            SearchParams::Elephant(_) => Algorithm::Elephant,
        }
    }

    fn iterations(&self) -> usize {
        match self {
            SearchParams::Firefly(p) => p.iterations,
            SearchParams::Elephant(p) => p.iterations,
        }
    }

    fn report_frequency(&self) -> usize {
        match self {
            SearchParams::Firefly(p) => p.report_frequency,
            SearchParams::Elephant(p) => p.report_frequency,
        }
    }
}

/// Archive state after one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    pub best_fitness: f64,
    pub popcount: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best_mask: FeatureMask,
    pub best_fitness: f64,
    /// `(iteration, archive fitness)` at every `report_frequency` iterations
    /// (starting at 0) and at the final iteration.
    pub history: Vec<(usize, f64)>,
    /// Archive state after every iteration, including the initial population.
    pub trace: Vec<TraceEntry>,
    /// Number of fitness requests, cache hits included.
    pub evaluations: usize,
}

/// Runs a full search with no per-iteration observer.
pub fn run_search(params: &SearchParams, objective: &dyn MaskObjective, d: usize, jobs: usize) -> Result<SearchResult> {
    run_search_with(params, objective, d, jobs, |_, _| {})
}

/// Runs a full search, calling `observe(iteration, population)` after
/// initialization (iteration 0) and after every step.
pub fn run_search_with<F>(
    params: &SearchParams,
    objective: &dyn MaskObjective,
    d: usize,
    jobs: usize,
    mut observe: F,
) -> Result<SearchResult>
where
    F: FnMut(usize, &[Agent]),
{
    if d == 0 {
        return Err(Error::Domain("search needs at least one feature".into()));
    }
    let mut evaluator = Evaluator::new(objective, jobs)?;
    let mut archive = Archive::default();

    let mut pop = match params {
        SearchParams::Firefly(p) => {
            p.validate()?;
            chaotic_init(p.population, d, p.chaotic_coefficient, p.seed)
        }
        SearchParams::Elephant(p) => elephant::init_herd(p, d)?,
    };
    let masks: Vec<FeatureMask> = pop.iter().map(Agent::mask).collect();
    let scores = evaluator.evaluate(&masks)?;
    for ((agent, mask), score) in pop.iter_mut().zip(&masks).zip(scores) {
        agent.fitness = Some(score);
        archive.offer(mask, score);
    }
    observe(0, &pop);

    let iterations = params.iterations();
    let freq = params.report_frequency().max(1);
    let mut history = Vec::new();
    let mut trace = Vec::with_capacity(iterations + 1);
    let mut record = |t: usize, archive: &Archive, history: &mut Vec<(usize, f64)>| {
        let (mask, fitness) = archive.best().expect("archive seeded by initial population");
        trace.push(TraceEntry {
            iteration: t,
            best_fitness: fitness,
            popcount: mask.popcount(),
        });
        if t.is_multiple_of(freq) || t == iterations {
            history.push((t, fitness));
        }
    };
    record(0, &archive, &mut history);

    for t in 1..=iterations {
        pop = match params {
            SearchParams::Firefly(p) => firefly_step(&pop, p, &mut evaluator, &mut archive, t)?,
            SearchParams::Elephant(p) => elephant_step(&pop, p, &mut evaluator, &mut archive, t)?,
        };
        observe(t, &pop);
        record(t, &archive, &mut history);
    }

    let (best_mask, best_fitness) = archive.into_best().expect("archive seeded by initial population");
    Ok(SearchResult {
        best_mask,
        best_fitness,
        history,
        trace,
        evaluations: evaluator.evaluations(),
    })
}
