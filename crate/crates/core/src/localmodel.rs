//! Discrete triangle-local models and the explicit inflation distributions
//! they induce.
//!
//! Source `α` feeds B and C, `β` feeds C and A, `γ` feeds A and B. Responses
//! are stored as the probability of outputting `+1`.

use rand::Rng;

use crate::error::LocalModelError;
use crate::family::{BinaryDist3, Sign, UParam};
use crate::polytope::qplus_validity_endpoint;
use crate::scalar::{QuadraticSurd, Rational, Ring, Scalar};

/// Largest supported hidden alphabet per source.
pub const MAX_ALPHABET: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleLocalModel<R> {
    /// Distributions of `α`, `β`, `γ`.
    pub sources: [Vec<R>; 3],
    /// `P_A(+1 | β, γ)` indexed `[β][γ]`.
    pub resp_a: Vec<Vec<R>>,
    /// `P_B(+1 | γ, α)` indexed `[γ][α]`.
    pub resp_b: Vec<Vec<R>>,
    /// `P_C(+1 | α, β)` indexed `[α][β]`.
    pub resp_c: Vec<Vec<R>>,
}

fn check_prob<R: Ring>(x: &R, what: &str) -> Result<(), LocalModelError> {
    if x.sign().is_lt() || (R::one() - x.clone()).sign().is_lt() {
        return Err(LocalModelError::InvalidModel(format!(
            "{what} = {} is not a probability",
            x.approx()
        )));
    }
    Ok(())
}

fn check_table<R: Ring>(t: &[Vec<R>], rows: usize, cols: usize, name: &str) -> Result<(), LocalModelError> {
    if t.len() != rows || t.iter().any(|r| r.len() != cols) {
        return Err(LocalModelError::InvalidModel(format!(
            "{name} must be {rows}×{cols}"
        )));
    }
    t.iter().flatten().try_for_each(|x| check_prob(x, name))
}

fn weight<R: Ring>(resp: &R, out: usize) -> R {
    if out == 0 {
        resp.clone()
    } else {
        R::one() - resp.clone()
    }
}

impl<R: Ring> TriangleLocalModel<R> {
    pub fn new(
        sources: [Vec<R>; 3],
        resp_a: Vec<Vec<R>>,
        resp_b: Vec<Vec<R>>,
        resp_c: Vec<Vec<R>>,
    ) -> Result<Self, LocalModelError> {
        let m = TriangleLocalModel {
            sources,
            resp_a,
            resp_b,
            resp_c,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn alphabets(&self) -> [usize; 3] {
        [
            self.sources[0].len(),
            self.sources[1].len(),
            self.sources[2].len(),
        ]
    }

    pub fn validate(&self) -> Result<(), LocalModelError> {
        let [na, nb, ng] = self.alphabets();
        for (n, name) in [(na, "alpha"), (nb, "beta"), (ng, "gamma")] {
            if n == 0 || n > MAX_ALPHABET {
                return Err(LocalModelError::InvalidModel(format!(
                    "{name} alphabet size {n} outside 1..={MAX_ALPHABET}"
                )));
            }
        }
        for src in &self.sources {
            src.iter().try_for_each(|x| check_prob(x, "source weight"))?;
            let total = src.iter().fold(R::zero(), |acc, x| acc + x.clone());
            if (total.approx() - 1.0).abs() > 1e-9 {
                return Err(LocalModelError::InvalidModel(format!(
                    "source weights sum to {}",
                    total.approx()
                )));
            }
        }
        check_table(&self.resp_a, nb, ng, "P_A")?;
        check_table(&self.resp_b, ng, na, "P_B")?;
        check_table(&self.resp_c, na, nb, "P_C")
    }

    /// Apply permutations to the three hidden alphabets; `perm[s][old] = new`.
    pub fn relabeled(&self, perm: &[Vec<usize>; 3]) -> Self {
        let mut sources = self.sources.clone();
        for s in 0..3 {
            for (old, &new) in perm[s].iter().enumerate() {
                sources[s][new] = self.sources[s][old].clone();
            }
        }
        let remap = |t: &Vec<Vec<R>>, p1: &[usize], p2: &[usize]| {
            let mut out = t.clone();
            for (x, row) in t.iter().enumerate() {
                for (y, v) in row.iter().enumerate() {
                    out[p1[x]][p2[y]] = v.clone();
                }
            }
            out
        };
        TriangleLocalModel {
            sources,
            resp_a: remap(&self.resp_a, &perm[1], &perm[2]),
            resp_b: remap(&self.resp_b, &perm[2], &perm[0]),
            resp_c: remap(&self.resp_c, &perm[0], &perm[1]),
        }
    }
}

impl<S: Scalar> TriangleLocalModel<S> {
    /// Every party outputs `+1` regardless of its inputs.
    pub fn deterministic_plus() -> Self {
        let one = vec![vec![S::one()]];
        TriangleLocalModel {
            sources: [vec![S::one()], vec![S::one()], vec![S::one()]],
            resp_a: one.clone(),
            resp_b: one.clone(),
            resp_c: one,
        }
    }

    /// Uniform binary sources; each party outputs the product of its two inputs as `±1`.
    pub fn parity() -> Self {
        let half = vec![S::ratio(1, 2), S::ratio(1, 2)];
        // equal inputs multiply to +1
        let table = vec![vec![S::one(), S::zero()], vec![S::zero(), S::one()]];
        TriangleLocalModel {
            sources: [half.clone(), half.clone(), half],
            resp_a: table.clone(),
            resp_b: table.clone(),
            resp_c: table,
        }
    }
}

impl TriangleLocalModel<f64> {
    /// A random model with the given alphabets; about a third of the response
    /// entries are deterministic so that extremal local behaviour is exercised.
    pub fn random<G: Rng + ?Sized>(rng: &mut G, alphabets: [usize; 3]) -> Self {
        let mut source = |n: usize| {
            let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / total).collect::<Vec<_>>()
        };
        let sources = [
            source(alphabets[0]),
            source(alphabets[1]),
            source(alphabets[2]),
        ];
        let mut table = |rows: usize, cols: usize| {
            (0..rows)
                .map(|_| {
                    (0..cols)
                        .map(|_| match rng.gen_range(0..3) {
                            0 => f64::from(rng.gen_range(0..2u8)),
                            _ => rng.gen_range(0.0..=1.0),
                        })
                        .collect()
                })
                .collect::<Vec<Vec<f64>>>()
        };
        let [na, nb, ng] = alphabets;
        let resp_a = table(nb, ng);
        let resp_b = table(ng, na);
        let resp_c = table(na, nb);
        TriangleLocalModel {
            sources,
            resp_a,
            resp_b,
            resp_c,
        }
    }
}

/// `P(a, b, c) = Σ μ(α)μ(β)μ(γ) P_A(a|β,γ) P_B(b|γ,α) P_C(c|α,β)`.
pub fn eval_local<R: Ring>(m: &TriangleLocalModel<R>) -> BinaryDist3<R> {
    let mut entries: [R; 8] = std::array::from_fn(|_| R::zero());
    for (a, wa) in m.sources[0].iter().enumerate() {
        for (b, wb) in m.sources[1].iter().enumerate() {
            for (g, wg) in m.sources[2].iter().enumerate() {
                let w = wa.clone() * wb.clone() * wg.clone();
                if w.is_zero() {
                    continue;
                }
                for (x, entry) in entries.iter_mut().enumerate() {
                    let term = w.clone()
                        * weight(&m.resp_a[b][g], (x >> 2) & 1)
                        * weight(&m.resp_b[g][a], (x >> 1) & 1)
                        * weight(&m.resp_c[a][b], x & 1);
                    *entry = entry.clone() + term;
                }
            }
        }
    }
    BinaryDist3::from_entries(entries, None)
}

/// Output-pattern table for one party over two copies of each of its sources:
/// `[4-bit outcome][first source pair][second source pair]`, where bit 3 is
/// copy `(1,1)`, bit 2 `(1,2)`, bit 1 `(2,1)`, bit 0 `(2,2)`.
fn party_block<R: Ring>(resp: &[Vec<R>], n1: usize, n2: usize) -> Vec<Vec<Vec<R>>> {
    let mut out = vec![vec![vec![R::zero(); n2 * n2]; n1 * n1]; 16];
    for x1 in 0..n1 {
        for x2 in 0..n1 {
            for y1 in 0..n2 {
                for y2 in 0..n2 {
                    let ins = [(x1, y1), (x1, y2), (x2, y1), (x2, y2)];
                    for (o, slot) in out.iter_mut().enumerate() {
                        let mut w = R::one();
                        for (c, &(x, y)) in ins.iter().enumerate() {
                            w = w * weight(&resp[x][y], (o >> (3 - c)) & 1);
                        }
                        slot[x1 * n1 + x2][y1 * n2 + y2] = w;
                    }
                }
            }
        }
    }
    out
}

fn pair_weights<R: Ring>(mu: &[R]) -> Vec<R> {
    let n = mu.len();
    (0..n * n)
        .map(|k| mu[k / n].clone() * mu[k % n].clone())
        .collect()
}

/// The 4096-entry distribution obtained by wiring two independent copies of
/// each source into the hexagon inflation: `A^{xy}` sees `(β_x, γ_y)`,
/// `B^{xy}` sees `(γ_x, α_y)`, `C^{xy}` sees `(α_x, β_y)`.
pub fn inflation_witness_distribution<R: Ring>(m: &TriangleLocalModel<R>) -> Vec<R> {
    let [na, nb, ng] = m.alphabets();
    let (wa, wb, wg) = (
        pair_weights(&m.sources[0]),
        pair_weights(&m.sources[1]),
        pair_weights(&m.sources[2]),
    );
    let ta = party_block(&m.resp_a, nb, ng);
    let tb = party_block(&m.resp_b, ng, na);
    let tc = party_block(&m.resp_c, na, nb);
    let (na2, nb2, ng2) = (na * na, nb * nb, ng * ng);

    // fold the source weights into the A block (β, γ) and the B block (α)
    let ta: Vec<Vec<Vec<R>>> = ta
        .into_iter()
        .map(|blk| {
            blk.into_iter()
                .enumerate()
                .map(|(b, row)| {
                    row.into_iter()
                        .enumerate()
                        .map(|(g, v)| v * wb[b].clone() * wg[g].clone())
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut p = vec![R::zero(); 4096];
    for oa in 0..16 {
        for ob in 0..16 {
            // M[β][α] = Σ_γ TA[oa][β][γ] · TB[ob][γ][α] · μ(α)
            let mut mba = vec![vec![R::zero(); na2]; nb2];
            for b in 0..nb2 {
                for g in 0..ng2 {
                    let x = &ta[oa][b][g];
                    if x.is_zero() {
                        continue;
                    }
                    for a in 0..na2 {
                        let y = &tb[ob][g][a];
                        if !y.is_zero() {
                            mba[b][a] = mba[b][a].clone() + x.clone() * y.clone() * wa[a].clone();
                        }
                    }
                }
            }
            for oc in 0..16 {
                let mut acc = R::zero();
                for a in 0..na2 {
                    for b in 0..nb2 {
                        let z = &tc[oc][a][b];
                        if !z.is_zero() && !mba[b][a].is_zero() {
                            acc = acc + mba[b][a].clone() * z.clone();
                        }
                    }
                }
                p[(oa << 8) | (ob << 4) | oc] = acc;
            }
        }
    }
    p
}

fn check_reference_range(u: f64) -> Result<(), LocalModelError> {
    if u < std::f64::consts::FRAC_1_SQRT_2 - 1e-15 || u > qplus_validity_endpoint() + 1e-12 {
        return Err(LocalModelError::OutOfValidityRange(u));
    }
    Ok(())
}

fn equality_model<R: Ring>(p: R) -> TriangleLocalModel<R> {
    let src = vec![p.clone(), R::one() - p];
    let table = vec![vec![R::one(), R::zero()], vec![R::zero(), R::one()]];
    TriangleLocalModel {
        sources: [src.clone(), src.clone(), src],
        resp_a: table.clone(),
        resp_b: table.clone(),
        resp_c: table,
    }
}

/// Binary sources biased `(1 + √(2u²−1))/2` towards one value; each party
/// outputs `+1` when its two inputs agree. Reproduces `q⁺` at the reference vertex.
pub fn qplus_reference_model(u: &UParam<f64>) -> Result<TriangleLocalModel<f64>, LocalModelError> {
    check_reference_range(*u.u())?;
    let d = (2.0 * u.u_squared() - 1.0).max(0.0);
    Ok(equality_model((1.0 + d.sqrt()) / 2.0))
}

/// Exact form of [`qplus_reference_model`], with the bias in `ℚ(√(2u²−1))`.
pub fn qplus_reference_model_exact(
    u: &UParam<Rational>,
) -> Result<TriangleLocalModel<QuadraticSurd>, LocalModelError> {
    check_reference_range(u.u().to_f64())?;
    let d = Rational::from_i64(2) * u.u_squared().clone() - Rational::from_i64(1);
    let half = Rational::ratio(1, 2);
    Ok(equality_model(QuadraticSurd::new(half.clone(), half, d)))
}

/// Lift a rational distribution into the surd field for exact comparison.
pub fn lift_to_surd(q: &BinaryDist3<Rational>) -> BinaryDist3<QuadraticSurd> {
    BinaryDist3::from_entries(
        std::array::from_fn(|i| QuadraticSurd::rational(q.entries()[i].clone())),
        q.t_label(),
    )
}

/// `q(i, j, k)` through sign lookup, for tests and reports.
pub fn entry<R: Ring>(q: &BinaryDist3<R>, i: Sign, j: Sign, k: Sign) -> R {
    q.get(i, j, k).clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{condition_q, eval_q};
    use crate::polytope::qplus_point;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use num_traits::Zero;
    use Sign::{Minus, Plus};

    #[test]
    fn deterministic_model_is_point_mass() {
        let q = eval_local(&TriangleLocalModel::<f64>::deterministic_plus());
        assert_eq!(*q.get(Plus, Plus, Plus), 1.0);
        assert!((q.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn parity_model_gives_parity_distribution() {
        let q = eval_local(&TriangleLocalModel::<Rational>::parity());
        for x in 0..8 {
            let ijk: i64 = (0..3).map(|b| Sign::from_bit(x >> b).value()).product();
            assert_eq!(q.entries()[x], Rational::ratio(1 + ijk, 8));
        }
    }

    #[test]
    fn reference_model_at_08() {
        let u = UParam::new(0.8).unwrap();
        let m = qplus_reference_model(&u).unwrap();
        assert!((m.sources[0][0] - 0.764575).abs() < 1e-6);
        let q = eval_local(&m);
        assert!((q.get(Minus, Minus, Plus) - 0.18).abs() < 1e-12);
        assert!((q.get(Plus, Plus, Plus) - 0.46).abs() < 1e-12);
        // independent enumeration of the eight hidden configurations
        let p = m.sources[0][0];
        let mut enumerated = [0.0; 8];
        for cfg in 0..8usize {
            let bits = [(cfg >> 2) & 1, (cfg >> 1) & 1, cfg & 1];
            let w: f64 = bits.iter().map(|&b| if b == 0 { p } else { 1.0 - p }).product();
            let out = |x: usize, y: usize| usize::from(bits[x] != bits[y]);
            let idx = (out(1, 2) << 2) | (out(2, 0) << 1) | out(0, 1);
            enumerated[idx] += w;
        }
        for x in 0..8 {
            assert!((enumerated[x] - q.entries()[x]).abs() < 1e-15);
        }
    }

    #[test]
    fn reference_model_at_boundary() {
        let q = eval_local(&qplus_reference_model(&UParam::boundary()).unwrap());
        assert!((q.get(Minus, Minus, Plus) - 0.25).abs() < 1e-15);
        assert!((q.get(Plus, Plus, Plus) - 0.25).abs() < 1e-15);
        assert!(q.get(Plus, Plus, Minus).abs() < 1e-15);
    }

    #[test]
    fn reference_model_range() {
        assert!(matches!(
            qplus_reference_model(&UParam::new(0.87).unwrap()),
            Err(LocalModelError::OutOfValidityRange(_))
        ));
    }

    #[test]
    fn reference_model_matches_qplus_exactly() {
        let u = UParam::<Rational>::from_triple(4, 3, 5).unwrap();
        let q = condition_q(&eval_q(&u, &qplus_point(&u)), Plus).unwrap();
        let local = eval_local(&qplus_reference_model_exact(&u).unwrap());
        assert_eq!(local.entries(), lift_to_surd(&q).entries());
    }

    #[test]
    fn witness_marginalizes_to_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = TriangleLocalModel::random(&mut rng, [2, 3, 2]);
        let q = eval_local(&m);
        let p = inflation_witness_distribution(&m);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // copies (1,1) of A, B, C see α₁, β₁, γ₁: a triangle
        let mut diag = [0.0; 8];
        for (o, v) in p.iter().enumerate() {
            let x = (((o >> 11) & 1) << 2) | (((o >> 7) & 1) << 1) | ((o >> 3) & 1);
            diag[x] += v;
        }
        for x in 0..8 {
            assert!((diag[x] - q.entries()[x]).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_witness_is_point_mass() {
        let p = inflation_witness_distribution(&TriangleLocalModel::<Rational>::deterministic_plus());
        assert_eq!(p[0], Rational::from_i64(1));
        assert!(p[1..].iter().all(|x| x.is_zero()));
    }
}
