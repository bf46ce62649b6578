use std::collections::HashMap;

use crate::data::FeatureMask;
use crate::error::{Error, Result};

/// Anything that scores a feature mask; higher is better.
pub trait MaskObjective: Sync {
    fn score(&self, mask: &FeatureMask) -> Result<f64>;
}

impl<F> MaskObjective for F
where
    F: Fn(&FeatureMask) -> Result<f64> + Sync,
{
    fn score(&self, mask: &FeatureMask) -> Result<f64> {
        self(mask)
    }
}

/// Memoizing batch evaluator for one search run.
///
/// Cache misses of a batch are scored in parallel when `jobs > 1`; results are
/// written back in batch order, so the outcome does not depend on `jobs`.
pub struct Evaluator<'a> {
    objective: &'a dyn MaskObjective,
    cache: HashMap<FeatureMask, f64>,
    requests: usize,
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl<'a> Evaluator<'a> {
    pub fn new(objective: &'a dyn MaskObjective, jobs: usize) -> Result<Self> {
        #[cfg(feature = "parallel")]
        let pool = if jobs > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(jobs)
                    .build()
                    .map_err(|e| Error::Config(format!("cannot start {jobs} workers: {e}")))?,
            )
        } else {
            None
        };
        #[cfg(not(feature = "parallel"))]
        let _ = jobs;
        Ok(Self {
            objective,
            cache: HashMap::new(),
            requests: 0,
            #[cfg(feature = "parallel")]
            pool,
        })
    }

    pub fn evaluations(&self) -> usize {
        self.requests
    }

    pub fn evaluate(&mut self, masks: &[FeatureMask]) -> Result<Vec<f64>> {
        self.requests += masks.len();

        let mut pending: Vec<&FeatureMask> = Vec::new();
        for m in masks {
            if !self.cache.contains_key(m) && !pending.contains(&m) {
                pending.push(m);
            }
        }

        let scored = self.score_all(&pending);
        for (mask, result) in pending.into_iter().zip(scored) {
            let value = result
                .and_then(|v| {
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(Error::Numeric(format!("objective returned {v}")))
                    }
                })
                .map_err(|e| Error::Objective {
                    mask: mask.index_list(),
                    source: Box::new(e),
                })?;
            self.cache.insert(mask.clone(), value);
        }
        Ok(masks.iter().map(|m| self.cache[m]).collect())
    }

    fn score_all(&self, masks: &[&FeatureMask]) -> Vec<Result<f64>> {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            let objective = self.objective;
            return pool.install(|| masks.par_iter().map(|m| objective.score(m)).collect());
        }
        masks.iter().map(|m| self.objective.score(m)).collect()
    }
}

/// Best mask seen so far. Only strict improvements replace the incumbent.
#[derive(Debug, Clone, Default)]
pub struct Archive {
    best: Option<(FeatureMask, f64)>,
}

impl Archive {
    pub fn offer(&mut self, mask: &FeatureMask, fitness: f64) -> bool {
        match &self.best {
            Some((_, f)) if fitness <= *f => false,
            _ => {
                self.best = Some((mask.clone(), fitness));
                true
            }
        }
    }

    pub fn best(&self) -> Option<(&FeatureMask, f64)> {
        self.best.as_ref().map(|(m, f)| (m, *f))
    }

    pub fn into_best(self) -> Option<(FeatureMask, f64)> {
        self.best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn cache_avoids_recomputation() {
        let calls = AtomicUsize::new(0);
        let objective = |m: &FeatureMask| -> Result<f64> {
            calls.fetch_add(1, Ordering::SeqCst);
            Ok(m.popcount() as f64)
        };
        let mut ev = Evaluator::new(&objective, 1).unwrap();
        let a = FeatureMask::from_bitstring("110").unwrap();
        let b = FeatureMask::from_bitstring("001").unwrap();
        assert_eq!(
            ev.evaluate(&[a.clone(), b.clone(), a.clone()]).unwrap(),
            vec![2.0, 1.0, 2.0]
        );
        assert_eq!(ev.evaluate(&[b]).unwrap(), vec![1.0]);
        assert_eq!(calls.load(Ordering::SeqCst), 2);
        assert_eq!(ev.evaluations(), 4);
    }

    #[test]
    fn parallel_matches_sequential() {
        let objective = |m: &FeatureMask| -> Result<f64> { Ok(m.indices().iter().map(|&i| (i as f64).sin()).sum()) };
        let masks: Vec<FeatureMask> = (1..64u32)
            .map(|k| FeatureMask::new((0..8).map(|b| k & (1 << b) != 0).collect()))
            .collect();
        let seq = Evaluator::new(&objective, 1).unwrap().evaluate(&masks).unwrap();
        let par = Evaluator::new(&objective, 4).unwrap().evaluate(&masks).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn non_finite_scores_are_errors() {
        let objective = |_: &FeatureMask| -> Result<f64> { Ok(f64::NAN) };
        let mut ev = Evaluator::new(&objective, 1).unwrap();
        assert!(matches!(
            ev.evaluate(&[FeatureMask::ones(2)]),
            Err(Error::Objective { .. })
        ));
    }

    #[test]
    fn archive_keeps_first_of_ties() {
        let mut ar = Archive::default();
        let a = FeatureMask::from_bitstring("10").unwrap();
        let b = FeatureMask::from_bitstring("01").unwrap();
        assert!(ar.offer(&a, 1.0));
        assert!(!ar.offer(&b, 1.0));
        assert!(ar.offer(&b, 2.0));
        assert_eq!(ar.best().unwrap(), (&b, 2.0));
    }
}
