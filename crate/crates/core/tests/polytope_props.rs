mod common;

use inflacert::lpcore::simplex::{phase_one, LinearSystem};
use inflacert::polytope::{build_polytope, is_empty};
use inflacert::{CorrelatorPoint, Rational, UParam};
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rows_sum_to_sixteen(
        u in 0.7072f64..0.999,
        f in proptest::array::uniform4(-2.0f64..2.0),
    ) {
        let p = build_polytope(&UParam::new(u).unwrap());
        prop_assert_eq!(p.rows().len(), 16);
        let total: f64 = p.halfspaces.values(&CorrelatorPoint::new(f[0], f[1], f[2], f[3])).iter().sum();
        prop_assert!((total - 16.0).abs() < 1e-12);
    }

    #[test]
    fn rows_sum_to_sixteen_exactly(
        (p, q, r) in prop_oneof![Just((4u64, 3u64, 5u64)), Just((55, 48, 73)), Just((21, 20, 29)), Just((40, 9, 41))],
        f in proptest::array::uniform4((-50i64..50, 1i64..20)),
    ) {
        let u = UParam::<Rational>::from_triple(p, q, r).unwrap();
        let pt = f.map(|(n, d)| Rational::new(n.into(), d.into()));
        let [a, b, c, d] = pt;
        let poly = build_polytope(&u);
        let total = poly.halfspaces.values(&CorrelatorPoint::new(a, b, c, d)).into_iter().fold(Rational::zero(), |x, y| x + y);
        prop_assert_eq!(total, Rational::from_integer(16.into()));
    }
}

#[test]
fn exact_vertices_are_tight_on_four_rows() {
    for (p, q, r) in [(4, 3, 5), (55, 48, 73), (21, 20, 29), (15, 8, 17), (45, 28, 53)] {
        let Ok(u) = UParam::<Rational>::from_triple(p, q, r) else {
            continue;
        };
        let poly = build_polytope(&u);
        assert!(!poly.vertices().is_empty(), "{p}/{r}");
        for v in poly.vertices() {
            let tight = poly.halfspaces.values(v).iter().filter(|x| x.is_zero()).count();
            assert!(tight >= 4, "{p}/{r}: vertex with {tight} tight rows");
        }
    }
}

#[test]
fn emptiness_is_monotone_at_the_top() {
    let grid = [0.887, 0.9, 0.95, 0.99];
    let flags: Vec<bool> = grid.iter().map(|&u| is_empty(&UParam::new(u).unwrap())).collect();
    for w in flags.windows(2) {
        assert!(!w[0] || w[1]);
    }
    assert!(flags.iter().all(|&e| e));
}

/// Convex-hull membership via a phase-one LP over vertex weights.
fn in_hull(vertices: &[[f64; 4]], x: [f64; 4]) -> bool {
    // rows: 4 coordinates (sign-flipped to rhs ≥ 0); the solver adds Σw = 1 itself
    let flip = x.map(|c| c < 0.0);
    let cols = vertices
        .iter()
        .map(|v| {
            let mut col: Vec<(usize, f64)> = (0..4)
                .map(|r| (r, if flip[r] { -v[r] } else { v[r] }))
                .filter(|(_, a)| *a != 0.0)
                .collect();
            col.push((4, 1.0));
            col
        })
        .collect();
    let mut rhs: Vec<f64> = (0..4).map(|r| x[r].abs()).collect();
    rhs.push(1.0);
    let out = phase_one(&LinearSystem { cols, rhs }).unwrap();
    out.objective < 1e-9
}

#[test]
fn membership_agrees_with_vertex_hull() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    for &u in &[0.75, 0.8090, 0.85, 0.88] {
        let poly = build_polytope(&UParam::new(u).unwrap());
        let vs: Vec<[f64; 4]> = poly.vertices().iter().map(|v| v.to_halfspace_coords()).collect();
        let lo: [f64; 4] = std::array::from_fn(|k| vs.iter().map(|v| v[k]).fold(f64::INFINITY, f64::min) - 0.05);
        let hi: [f64; 4] = std::array::from_fn(|k| vs.iter().map(|v| v[k]).fold(f64::NEG_INFINITY, f64::max) + 0.05);
        for _ in 0..2500 {
            let x: [f64; 4] = std::array::from_fn(|k| rng.gen_range(lo[k]..hi[k]));
            let min_row = poly
                .halfspaces
                .values(&CorrelatorPoint::from_halfspace_coords(x))
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            // skip points within the classification tolerance of the boundary
            if min_row.abs() < 1e-9 {
                continue;
            }
            assert_eq!(
                poly.contains(&CorrelatorPoint::from_halfspace_coords(x)),
                in_hull(&vs, x),
                "u={u} x={x:?}"
            );
            checked += 1;
        }
    }
    assert!(checked >= 9_900);
}
