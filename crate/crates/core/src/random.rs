//! Deterministic random instance generators.
//!
//! Instance `i` of a campaign seeded with `seed` draws from the ChaCha8
//! stream `(seed, i)`, so instances can be generated in any order or in
//! parallel with identical results.

use num::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::chaos::{ChaosElement, MultiIndex};
use crate::moments::{ComplexVectorSet, CorrelationMatrix, ExactComplex};
use crate::polarization::MultilinearForm;
use crate::scalar::{int, rat, ExactScalar};

pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Rational point on `S^{n-1}` from inverse stereographic projection of a
/// small-height rational `t ∈ Q^{n-1}`, then a random coordinate permutation
/// and sign pattern.
pub fn rational_unit_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<ExactScalar> {
    assert!(n >= 1);
    if n == 1 {
        return vec![if rng.gen_bool(0.5) { int(1) } else { int(-1) }];
    }
    let den = rng.gen_range(1..=3);
    let t: Vec<ExactScalar> = (0..n - 1).map(|_| rat(rng.gen_range(-3..=3), den)).collect();
    let norm_sq: ExactScalar = t.iter().map(|x| x * x).sum();
    let scale = &norm_sq + int(1);
    let mut v: Vec<ExactScalar> = t.iter().map(|x| int(2) * x / &scale).collect();
    v.push((norm_sq - int(1)) / scale);
    v.shuffle(rng);
    for x in &mut v {
        if rng.gen_bool(0.5) {
            *x = -x.clone();
        }
    }
    v
}

/// Gram matrix of `d` rational unit vectors in `R^d`.
pub fn random_correlation<R: Rng>(rng: &mut R, d: usize) -> CorrelationMatrix {
    let vs: Vec<_> = (0..d).map(|_| rational_unit_vector(rng, d)).collect();
    CorrelationMatrix::gram(&vs).expect("Gram matrices of unit vectors are valid correlations")
}

/// A correlation value from `{0, ±1/4, ±1/2, ±1}`.
pub fn grid_rho<R: Rng>(rng: &mut R) -> ExactScalar {
    const GRID: [(i64, i64); 7] = [(0, 1), (1, 4), (-1, 4), (1, 2), (-1, 2), (1, 1), (-1, 1)];
    let (n, d) = GRID[rng.gen_range(0..GRID.len())];
    rat(n, d)
}

/// Random non-zero element of `Ker(L + kI)` on `R^n` with 1 to 3 terms.
pub fn random_pure_element<R: Rng>(rng: &mut R, n: usize, k: u32) -> ChaosElement {
    loop {
        let terms = rng.gen_range(1..=3);
        let mut pairs = Vec::with_capacity(terms);
        for _ in 0..terms {
            let mut degrees = vec![0u32; n];
            for _ in 0..k {
                degrees[rng.gen_range(0..n)] += 1;
            }
            let num = rng.gen_range(1..=3) * if rng.gen_bool(0.5) { 1 } else { -1 };
            pairs.push((MultiIndex::from_dense(&degrees), rat(num, rng.gen_range(1..=2))));
        }
        let f = ChaosElement::from_coeffs(n, pairs).expect("indices in range");
        if !f.is_zero() {
            return f;
        }
    }
}

/// Multilinear form with coefficients on the grid `{-4, …, 4}/4`.
pub fn random_multilinear_form<R: Rng>(rng: &mut R, n: usize, k: usize) -> MultilinearForm {
    assert!(k >= 1 && k <= n);
    loop {
        let mut terms = Vec::new();
        for tuple in increasing_tuples(n, k) {
            let c = rng.gen_range(-4..=4);
            if c != 0 {
                terms.push((tuple, rat(c, 4)));
            }
        }
        if let Ok(f) = MultilinearForm::new(n, k, terms) {
            if !f.is_zero() {
                return f;
            }
        }
    }
}

/// All strictly increasing `k`-tuples of `0..n`, lexicographically.
pub fn increasing_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// `d` non-zero complex vectors in `C^dim` with entries `(a + ib)/2`,
/// `a, b ∈ {-2, …, 2}`.
pub fn random_complex_vectors<R: Rng>(rng: &mut R, d: usize, dim: usize) -> ComplexVectorSet {
    let vectors = (0..d)
        .map(|_| loop {
            let v: Vec<ExactComplex> = (0..dim)
                .map(|_| ExactComplex::new(rat(rng.gen_range(-2..=2), 2), rat(rng.gen_range(-2..=2), 2)))
                .collect();
            if v.iter().any(|z| !z.is_zero()) {
                break v;
            }
        })
        .collect();
    ComplexVectorSet::new(vectors).expect("non-zero vectors")
}

/// Uniform point on `S^{n-1}` in floating point.
pub fn float_unit_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}
