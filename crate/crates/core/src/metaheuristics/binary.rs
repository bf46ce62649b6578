use rand::Rng;

use crate::data::FeatureMask;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Threshold transfer from a continuous position to a feature mask.
///
/// Bit `i` is set iff `position[i] > threshold`. An all-zero result selects the
/// coordinate with the largest value (lowest index on ties).
pub fn binarize(position: &[f64], threshold: f64) -> FeatureMask {
    let mut mask = FeatureMask::new(position.iter().map(|&v| v > threshold).collect());
    if mask.popcount() == 0 && !position.is_empty() {
        let best = position
            .iter()
            .enumerate()
            .fold(0, |best, (i, &v)| if v > position[best] { i } else { best });
        mask.set(best, true);
    }
    mask
}

/// Flips each bit independently with probability `p`. An all-zero result gets
/// one uniformly chosen bit set.
pub fn bit_flip_mutate<R: Rng + ?Sized>(mask: &FeatureMask, p: f64, rng: &mut R) -> FeatureMask {
    let mut out = mask.clone();
    if p > 0.0 {
        for i in 0..out.len() {
            if rng.gen::<f64>() < p {
                out.flip(i);
            }
        }
    }
    if out.popcount() == 0 && !out.is_empty() {
        let i = rng.gen_range(0..out.len());
        out.set(i, true);
    }
    out
}

/// Moves `position` the minimal amount needed so that it binarizes to `mask`.
///
/// Mismatched coordinates are reflected about the threshold; a coordinate
/// sitting exactly on the threshold is nudged just past it.
pub(crate) fn encode_mask(position: &mut [f64], mask: &FeatureMask, threshold: f64) {
    const NUDGE: f64 = 1e-9;
    for (i, x) in position.iter_mut().enumerate() {
        let want = mask.get(i);
        if (*x > threshold) == want {
            continue;
        }
        *x = (2.0 * threshold - *x).clamp(0.0, 1.0);
        if want && *x <= threshold {
            *x = threshold + NUDGE;
        } else if !want && *x > threshold {
            *x = threshold;
        }
    }
}

/// Clamps, binarizes, mutates and writes the mutation back into `position`.
/// Afterwards `binarize(position)` equals the returned mask.
pub(crate) fn realize<R: Rng + ?Sized>(position: &mut [f64], mutation_prob: f64, rng: &mut R) -> FeatureMask {
    for x in position.iter_mut() {
        *x = x.clamp(0.0, 1.0);
    }
    let current = binarize(position, DEFAULT_THRESHOLD);
    let mask = bit_flip_mutate(&current, mutation_prob, rng);
    if mask != current {
        encode_mask(position, &mask, DEFAULT_THRESHOLD);
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use proptest::prelude::*;

    #[test]
    fn threshold_and_rescue() {
        assert_eq!(binarize(&[0.9, 0.1, 0.51], 0.5).to_string(), "101");
        assert_eq!(binarize(&[0.1, 0.2], 0.5).to_string(), "01");
        assert_eq!(binarize(&[0.5, 0.5], 0.5).to_string(), "10");
    }

    #[test]
    fn mutation_extremes() {
        let m = FeatureMask::from_bitstring("101").unwrap();
        let mut rng = substream(1, 0, 0);
        assert_eq!(bit_flip_mutate(&m, 0.0, &mut rng), m);
        assert_eq!(bit_flip_mutate(&m, 1.0, &mut rng).to_string(), "010");
        // Full flip of all-ones would be empty and gets rescued.
        let rescued = bit_flip_mutate(&FeatureMask::ones(8), 1.0, &mut rng);
        assert_eq!(rescued.popcount(), 1);
    }

    #[test]
    fn mutation_rate_concentrates() {
        let m = FeatureMask::zeros(10_000);
        let mut rng = substream(5, 0, 0);
        let flips = bit_flip_mutate(&m, 0.01, &mut rng).popcount();
        assert!((50..=150).contains(&flips), "flips={flips}");
    }

    proptest! {
        #[test]
        fn popcount_matches_direct_count(pos in prop::collection::vec(0.0f64..=1.0, 1..64)) {
            let direct = pos.iter().filter(|&&v| v > 0.5).count();
            let mask = binarize(&pos, 0.5);
            if direct >= 1 {
                prop_assert_eq!(mask.popcount(), direct);
            } else {
                prop_assert_eq!(mask.popcount(), 1);
            }
        }

        #[test]
        fn realize_is_consistent(pos in prop::collection::vec(-0.5f64..=1.5, 1..64), seed in 0u64..1000) {
            let mut p = pos.clone();
            let mut rng = substream(seed, 0, 0);
            let mask = realize(&mut p, 0.2, &mut rng);
            prop_assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
            prop_assert_eq!(binarize(&p, 0.5), mask);
        }
    }
}
