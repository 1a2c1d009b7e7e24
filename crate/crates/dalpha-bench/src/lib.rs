//! Shared fixtures for the seeding benchmarks.

use dalpha::geometry::{CenterSet, Dataset};
use dalpha::instances::preset;

/// Square-corner Gaussian mixture at the given size.
pub fn mixture(n: usize, seed: u64) -> Dataset {
    preset("d1", n, seed).expect("preset").generate().expect("generate")
}

/// A center set holding the first `t` points.
pub fn centers(ds: &Dataset, t: usize) -> CenterSet {
    let mut cs = CenterSet::new(ds.n());
    for z in 0..t {
        cs.add_center(ds, z).expect("add");
    }
    cs
}
