//! Ornstein-Uhlenbeck semigroup on Hermite expansions.
//!
//! Time enters only through the contraction factor `s = e^{-t}`, so
//! `P_t` acts on the degree-`k` component as multiplication by `s^k` and the
//! whole calculus stays rational.

use num::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::chaos::{expectation, generator_apply, multiply, product_expectation, ChaosElement};
use crate::error::{Error, Result};
use crate::scalar::{format_scalar, to_f64, ExactScalar};

/// `s = e^{-t}` with `0 < s <= 1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ContractionFactor(ExactScalar);

impl ContractionFactor {
    pub fn new(s: ExactScalar) -> Result<Self> {
        if !s.is_positive() || s > ExactScalar::one() {
            return Err(Error::input(format!(
                "contraction factor must lie in (0, 1], got {}",
                format_scalar(&s)
            )));
        }
        Ok(ContractionFactor(s))
    }

    pub fn identity() -> Self {
        ContractionFactor(ExactScalar::one())
    }

    pub fn value(&self) -> &ExactScalar {
        &self.0
    }
}

fn scale_by_degree(f: &ChaosElement, s: &ExactScalar) -> ChaosElement {
    f.map_by_degree(|k| num::pow(s.clone(), k as usize))
}

/// `P_t F`: the degree-`k` component is scaled by `s^k`.
pub fn semigroup_apply(f: &ChaosElement, s: &ContractionFactor) -> ChaosElement {
    scale_by_degree(f, s.value())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl McEstimate {
    /// `|mean - target| <= k · std_error`; a zero-variance estimate must hit
    /// the target up to rounding.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        let slack = (k * self.std_error).max(1e-12 * target.abs().max(1.0));
        (self.mean - target).abs() <= slack
    }
}

const MC_CHUNK: usize = 4096;

/// Monte Carlo evaluation of Mehler's formula
/// `P_t F(x) = E[F(s x + sqrt(1 - s²) Y)]`, `Y ~ γ_n`.
///
/// Samples are drawn in fixed chunks, chunk `c` from a ChaCha8 stream
/// `(seed, c)`, so the estimate does not depend on the thread count.
pub fn mehler_mc(
    f: &ChaosElement,
    s: &ContractionFactor,
    x: &[f64],
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::input("at least one Monte Carlo sample is required"));
    }
    if x.len() != f.dim() {
        return Err(Error::input(format!(
            "point has {} coordinates, expected {}",
            x.len(),
            f.dim()
        )));
    }
    let sf = to_f64(s.value());
    if s.value().is_one() {
        let v = f.eval_f64(x);
        return Ok(McEstimate {
            mean: v,
            std_error: 0.0,
            samples,
        });
    }
    let noise = (1.0 - sf * sf).sqrt();
    let chunks = samples.div_ceil(MC_CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut point = vec![0.0; x.len()];
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..count {
                for (p, &xi) in point.iter_mut().zip(x) {
                    let y: f64 = StandardNormal.sample(&mut rng);
                    *p = sf * xi + noise * y;
                }
                let v = f.eval_f64(&point);
                sum += v;
                sum_sq += v * v;
            }
            (sum, sum_sq)
        })
        .collect();
    let (sum, sum_sq) = partial
        .iter()
        .fold((0.0, 0.0), |(a, b), &(s1, s2)| (a + s1, b + s2));
    let n = samples as f64;
    let mean = sum / n;
    let var = if samples > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(McEstimate {
        mean,
        std_error: (var / n).sqrt(),
        samples,
    })
}

fn check_pure(fs: &[ChaosElement]) -> Result<()> {
    for (i, f) in fs.iter().enumerate() {
        if f.pure_degree().is_none_or(|k| k == 0) {
            return Err(Error::input(format!(
                "factor {} is not a pure eigenfunction of positive degree",
                i + 1
            )));
        }
    }
    Ok(())
}

fn squares(fs: &[ChaosElement]) -> Result<Vec<ChaosElement>> {
    fs.iter().map(|f| multiply(f, f)).collect()
}

/// `φ(s) = ∫ ∏_i P_t(F_i²) dγ_n` at each grid point.
pub fn phi_curve(fs: &[ChaosElement], grid: &[ContractionFactor]) -> Result<Vec<ExactScalar>> {
    check_pure(fs)?;
    let sq = squares(fs)?;
    grid.iter()
        .map(|s| {
            let images: Vec<_> = sq.iter().map(|g| semigroup_apply(g, s)).collect();
            product_expectation(&images)
        })
        .collect()
}

/// `lim_{t→∞} φ = ∏ ∫ F_i² dγ_n`, evaluated by sending every positive-degree
/// component of the squares to zero.
pub fn phi_limit(fs: &[ChaosElement]) -> Result<ExactScalar> {
    check_pure(fs)?;
    let images: Vec<_> = squares(fs)?
        .iter()
        .map(|g| scale_by_degree(g, &ExactScalar::zero()))
        .collect();
    product_expectation(&images)
}

/// `Σ_i ∫ L P_t(F_i²) ∏_{j≠i} P_t(F_j²) dγ_n`, which equals `φ'(t)`.
pub fn negatif_functional(fs: &[ChaosElement], s: &ContractionFactor) -> Result<ExactScalar> {
    check_pure(fs)?;
    let images: Vec<_> = squares(fs)?.iter().map(|g| semigroup_apply(g, s)).collect();
    let mut total = ExactScalar::zero();
    for i in 0..images.len() {
        let mut factors = images.clone();
        factors[i] = generator_apply(&images[i]);
        total += product_expectation(&factors)?;
    }
    Ok(total)
}

/// `∫ F² dγ_n` for each factor.
pub fn second_moments(fs: &[ChaosElement]) -> Result<Vec<ExactScalar>> {
    fs.iter().map(|f| Ok(expectation(&multiply(f, f)?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::MultiIndex;
    use crate::scalar::{int, rat};

    fn cf(n: i64, d: i64) -> ContractionFactor {
        ContractionFactor::new(rat(n, d)).unwrap()
    }

    #[test]
    fn contraction_bounds() {
        assert!(ContractionFactor::new(int(0)).is_err());
        assert!(ContractionFactor::new(rat(3, 2)).is_err());
        assert!(ContractionFactor::new(int(1)).is_ok());
    }

    #[test]
    fn semigroup_examples() {
        let f = ChaosElement::hermite(2, 0, 1)
            .add(&ChaosElement::hermite(2, 1, 2))
            .unwrap();
        assert_eq!(semigroup_apply(&f, &ContractionFactor::identity()), f);
        let g = ChaosElement::hermite(1, 0, 3);
        assert_eq!(semigroup_apply(&g, &cf(1, 2)), g.scale(&rat(1, 8)));
        let expected = ChaosElement::hermite(2, 0, 1)
            .scale(&rat(1, 3))
            .add(&ChaosElement::hermite(2, 1, 2).scale(&rat(1, 9)))
            .unwrap();
        assert_eq!(semigroup_apply(&f, &cf(1, 3)), expected);
    }

    #[test]
    fn semigroup_composes() {
        let f = ChaosElement::from_coeffs(
            2,
            [
                (MultiIndex::from_dense(&[2, 1]), int(3)),
                (MultiIndex::from_dense(&[0, 1]), int(-2)),
                (MultiIndex::zero(), rat(1, 2)),
            ],
        )
        .unwrap();
        let (a, b) = (cf(2, 3), cf(3, 4));
        let ab = ContractionFactor::new(a.value() * b.value()).unwrap();
        assert_eq!(semigroup_apply(&semigroup_apply(&f, &a), &b), semigroup_apply(&f, &ab));
    }

    #[test]
    fn h1_pair_phi_and_derivative() {
        let x = ChaosElement::hermite(1, 0, 1);
        let fs = [x.clone(), x];
        let grid: Vec<_> = [(1, 1), (3, 4), (1, 2), (1, 4), (1, 8)]
            .iter()
            .map(|&(n, d)| cf(n, d))
            .collect();
        let phi = phi_curve(&fs, &grid).unwrap();
        for (s, v) in grid.iter().zip(&phi) {
            let s4 = num::pow(s.value().clone(), 4);
            assert_eq!(*v, int(1) + int(2) * &s4);
            assert_eq!(negatif_functional(&fs, s).unwrap(), int(-8) * s4);
        }
        assert_eq!(phi_limit(&fs).unwrap(), int(1));
    }

    #[test]
    fn single_and_disjoint_families_are_flat() {
        let f = ChaosElement::hermite(2, 0, 2)
            .add(&ChaosElement::from_coeffs(2, [(MultiIndex::from_dense(&[1, 1]), int(3))]).unwrap())
            .unwrap();
        let grid = [ContractionFactor::identity(), cf(1, 2), cf(1, 5)];
        let phi = phi_curve(std::slice::from_ref(&f), &grid).unwrap();
        assert!(phi.iter().all(|v| *v == phi[0]));
        assert!(negatif_functional(std::slice::from_ref(&f), &cf(1, 2)).unwrap().is_zero());

        let a = ChaosElement::hermite(3, 0, 2);
        let b = ChaosElement::hermite(3, 1, 1)
            .add(&ChaosElement::hermite(3, 2, 1))
            .unwrap();
        let fs = [a, b];
        let phi = phi_curve(&fs, &grid).unwrap();
        assert!(phi.iter().all(|v| *v == int(4)));
        assert!(negatif_functional(&fs, &cf(1, 3)).unwrap().is_zero());
    }

    #[test]
    fn impure_factor_rejected() {
        let f = ChaosElement::hermite(1, 0, 1)
            .add(&ChaosElement::hermite(1, 0, 2))
            .unwrap();
        assert!(phi_curve(&[f], &[ContractionFactor::identity()]).is_err());
    }

    #[test]
    fn mehler_examples() {
        let f = ChaosElement::hermite(2, 0, 2);
        let exact = mehler_mc(&f, &ContractionFactor::identity(), &[2.0, 0.0], 10, 1).unwrap();
        assert_eq!(exact.mean, 3.0);
        assert_eq!(exact.std_error, 0.0);

        let one = ChaosElement::constant(2, int(1));
        let c = mehler_mc(&one, &cf(1, 3), &[0.3, -1.0], 1000, 5).unwrap();
        assert_eq!(c.mean, 1.0);

        let est = mehler_mc(&f, &cf(1, 2), &[2.0, 0.0], 200_000, 42).unwrap();
        let target = to_f64(&semigroup_apply(&f, &cf(1, 2)).eval(&[int(2), int(0)]));
        assert_eq!(target, 0.75);
        assert!(est.agrees_with(target, 4.0), "{est:?}");
    }

    #[test]
    fn mehler_is_deterministic() {
        let f = ChaosElement::hermite(1, 0, 3);
        let a = mehler_mc(&f, &cf(1, 2), &[1.0], 20_000, 9).unwrap();
        let b = mehler_mc(&f, &cf(1, 2), &[1.0], 20_000, 9).unwrap();
        assert_eq!(a, b);
    }
}
