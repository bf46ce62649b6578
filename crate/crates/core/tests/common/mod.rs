#![allow(dead_code)]

use genesift::data::Dataset;
use genesift::rng;

/// Two well-separated Gaussian blobs in [0,1]², alternating labels.
pub fn blobs(n: usize, seed: u64) -> Dataset {
    let mut r = rng::substream(seed, 99, 0);
    let mut x = Vec::with_capacity(2 * n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % 2;
        let centre = if c == 0 { 0.25 } else { 0.75 };
        for _ in 0..2 {
            x.push((centre + 0.08 * rng::standard_normal(&mut r)).clamp(0.0, 1.0));
        }
        y.push(c);
    }
    Dataset::new(
        "blobs",
        vec!["a".into(), "b".into()],
        vec!["0".into(), "1".into()],
        x,
        y,
    )
    .unwrap()
}
