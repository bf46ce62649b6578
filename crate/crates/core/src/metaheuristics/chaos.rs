use rand::Rng;

use super::Agent;
use crate::error::{Error, Result};
use crate::rng;

/// One step of the logistic map `r * x * (1 - x)`.
pub fn logistic_map(x: f64, r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("logistic map input {x} outside [0, 1]")));
    }
    Ok(r * x * (1.0 - x))
}

/// Seeds that are fixed points (or land on one in a single step) at r = 4.
fn is_degenerate(x: f64) -> bool {
    [0.0, 0.25, 0.5, 0.75, 1.0].contains(&x)
}

fn fresh_seed<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let x: f64 = rng.gen();
        if !is_degenerate(x) {
            return x;
        }
    }
}

/// Fills `d` coordinates from one logistic-map orbit started at a random seed.
///
/// In floating point an orbit can collapse onto a fixed point; when that
/// happens the orbit is restarted from a fresh seed drawn from `rng`.
pub(crate) fn chaotic_position<R: Rng + ?Sized>(rng: &mut R, d: usize, r: f64) -> Vec<f64> {
    let mut x = fresh_seed(rng);
    let mut out = Vec::with_capacity(d);
    for _ in 0..d {
        x = (r * x * (1.0 - x)).clamp(0.0, 1.0);
        out.push(x);
        if is_degenerate(x) {
            x = fresh_seed(rng);
        }
    }
    out
}

/// Population of `pop` agents whose positions are logistic-map orbits.
///
/// Agent `i` draws its orbit seed from substream `(seed, i, 0)`.
pub fn chaotic_init(pop: usize, d: usize, r: f64, seed: u64) -> Vec<Agent> {
    (0..pop)
        .map(|i| {
            let mut rng = rng::substream(seed, i as u64, 0);
            Agent::new(chaotic_position(&mut rng, d, r))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_values() {
        assert_eq!(logistic_map(0.25, 4.0).unwrap(), 0.75);
        assert_eq!(logistic_map(0.5, 4.0).unwrap(), 1.0);
        assert_eq!(logistic_map(1.0, 4.0).unwrap(), 0.0);
        assert!(matches!(logistic_map(1.5, 4.0), Err(Error::Domain(_))));
        assert!(logistic_map(-0.1, 4.0).is_err());
        assert!(logistic_map(f64::NAN, 4.0).is_err());
    }

    #[test]
    fn logistic_orbit_stays_in_unit_interval() {
        let mut x = 0.3;
        for _ in 0..1000 {
            x = logistic_map(x, 4.0).unwrap();
            assert!((0.0..=1.0).contains(&x));
        }
    }

    #[test]
    fn init_shape_bounds_determinism() {
        let a = chaotic_init(20, 5, 4.0, 1);
        assert_eq!(a.len(), 20);
        for agent in &a {
            assert_eq!(agent.position.len(), 5);
            assert!(agent.position.iter().all(|v| (0.0..=1.0).contains(v)));
            assert!(agent.fitness.is_none());
        }
        let b = chaotic_init(20, 5, 4.0, 1);
        assert_eq!(a, b);
        assert_ne!(a, chaotic_init(20, 5, 4.0, 2));
    }

    #[test]
    fn init_density_is_u_shaped() {
        // The r=4 invariant density 1/(pi*sqrt(x(1-x))) puts ~20.5% of mass in
        // [0, 0.1) and ~6.4% in [0.45, 0.55).
        let p = &chaotic_init(1, 10_000, 4.0, 3)[0].position;
        let n = p.len() as f64;
        let edge = p.iter().filter(|&&v| v < 0.1).count() as f64 / n;
        let top = p.iter().filter(|&&v| v > 0.9).count() as f64 / n;
        let mid = p.iter().filter(|&&v| (0.45..0.55).contains(&v)).count() as f64 / n;
        assert!(edge > 2.0 * mid && top > 2.0 * mid, "edge={edge} top={top} mid={mid}");
        assert!((edge - 0.205).abs() < 0.03, "edge={edge}");
        assert!((mid - 0.064).abs() < 0.02, "mid={mid}");
    }
}
