#![allow(dead_code)]

use inflacert::localmodel::TriangleLocalModel;
use inflacert::polytope::build_polytope;
use inflacert::{CorrelatorPoint, UParam};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Euclid triple `(m² − n², 2mn, m² + n²)` ordered so the first leg is the larger.
pub fn triple(m: u64, n: u64) -> (u64, u64, u64) {
    let (a, b) = (m * m - n * n, 2 * m * n);
    (a.max(b), a.min(b), m * m + n * n)
}

pub fn random_model(seed: u64) -> TriangleLocalModel<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphabets = [rng.gen_range(1..=4), rng.gen_range(1..=4), rng.gen_range(1..=4)];
    TriangleLocalModel::random(&mut rng, alphabets)
}

/// Random convex combination of the polytope's vertices.
pub fn random_inside(u: &UParam<f64>, rng: &mut ChaCha8Rng) -> CorrelatorPoint<f64> {
    let poly = build_polytope(u);
    let vs = poly.vertices();
    let w: Vec<f64> = vs.iter().map(|_| rng.gen_range(0.0..1.0f64).powi(3)).collect();
    let total: f64 = w.iter().sum();
    let mut acc = [0.0; 4];
    for (v, wi) in vs.iter().zip(&w) {
        for (a, x) in acc.iter_mut().zip(v.to_halfspace_coords()) {
            *a += x * wi / total;
        }
    }
    CorrelatorPoint::from_halfspace_coords(acc)
}
