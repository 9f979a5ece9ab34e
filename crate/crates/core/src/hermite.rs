//! Probabilists' Hermite polynomials and the integer combinatorics around
//! them.
//!
//! `H_0 = 1` and `H_{k+1} = x H_k - H_k'`, so that `E[H_k(g)^2] = k!` for a
//! standard Gaussian `g`.

use std::collections::BTreeMap;

use num::bigint::{BigInt, BigUint};
use num::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{from_bigint, int, ExactScalar};

/// Monomial coefficients of `H_k`; `coeffs[j]` multiplies `x^j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HermitePoly {
    pub degree: u32,
    pub coeffs: Vec<ExactScalar>,
}

impl HermitePoly {
    pub fn eval(&self, x: &ExactScalar) -> ExactScalar {
        // Horner
        self.coeffs
            .iter()
            .rev()
            .fold(ExactScalar::zero(), |acc, c| acc * x + c)
    }
}

/// Builds `H_k` by applying `δf = x f - f'` to `H_0 = 1` k times.
pub fn hermite_coeffs(k: u32) -> HermitePoly {
    let mut coeffs = vec![int(1)];
    for _ in 0..k {
        let mut next = vec![ExactScalar::zero(); coeffs.len() + 1];
        for (j, c) in coeffs.iter().enumerate() {
            next[j + 1] += c;
            if j > 0 {
                next[j - 1] -= c * int(j as i64);
            }
        }
        coeffs = next;
    }
    HermitePoly { degree: k, coeffs }
}

/// `H_k(x)` via `H_{k+1}(x) = x H_k(x) - k H_{k-1}(x)`.
pub fn hermite_eval(k: u32, x: &ExactScalar) -> ExactScalar {
    let mut prev = int(1);
    if k == 0 {
        return prev;
    }
    let mut cur = x.clone();
    for j in 1..k {
        let next = x * &cur - &prev * int(j as i64);
        prev = cur;
        cur = next;
    }
    cur
}

/// Floating-point `H_k(x)`; only meant for the moderate degrees used in
/// Monte Carlo cross-checks.
pub fn hermite_eval_f64(k: u32, x: f64) -> f64 {
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = x;
    for j in 1..k {
        let next = x * cur - j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

pub fn factorial(n: u32) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, j| acc * j)
}

pub fn factorial_f64(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, j| acc * j as f64)
}

pub fn binomial(n: u32, k: u32) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for j in 0..k {
        acc = acc * (n - j) / (j + 1);
    }
    acc
}

/// Coefficient of `H_{a+b-2s}` in `H_a H_b`: `C(a,s) C(b,s) s!`.
pub fn linearization_coeff(a: u32, b: u32, s: u32) -> BigUint {
    if s > a.min(b) {
        return BigUint::zero();
    }
    binomial(a, s) * binomial(b, s) * factorial(s)
}

/// `H_a H_b = Σ_r c_r H_r`, keyed by degree `r`.
pub fn linearize(a: u32, b: u32) -> BTreeMap<u32, ExactScalar> {
    (0..=a.min(b))
        .map(|s| {
            let c = linearization_coeff(a, b, s);
            (a + b - 2 * s, from_bigint(BigInt::from(c)))
        })
        .collect()
}

/// `E[R^{2q}]` for `R^2 ~ χ²(n)`, i.e. `2^q Γ(n/2+q)/Γ(n/2) = ∏_{j<q} (n + 2j)`.
pub fn chi2_moment(n: u32, q: u32) -> ExactScalar {
    assert!(n >= 1, "chi-squared degrees of freedom must be positive");
    let prod = (0..q).fold(BigUint::one(), |acc, j| acc * (n + 2 * j));
    from_bigint(BigInt::from(prod))
}

/// `m!!` for odd `m ≥ -1`, with `(-1)!! = 1`.
pub fn double_factorial(m: i64) -> Result<BigUint> {
    if m < -1 || m % 2 == 0 {
        return Err(Error::input(format!(
            "double factorial is defined here for odd m >= -1, got {m}"
        )));
    }
    let mut acc = BigUint::one();
    let mut j = m;
    while j > 1 {
        acc *= j as u64;
        j -= 2;
    }
    Ok(acc)
}

/// Standard Gaussian moment `E[g^m]`: `(m-1)!!` for even `m`, zero otherwise.
pub fn gaussian_moment(m: u32) -> BigUint {
    if m % 2 == 1 {
        BigUint::zero()
    } else {
        double_factorial(m as i64 - 1).expect("odd argument")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn coeffs(k: u32) -> Vec<i64> {
        hermite_coeffs(k)
            .coeffs
            .iter()
            .map(|c| c.to_integer().try_into().unwrap())
            .collect()
    }

    #[test]
    fn low_degree_polynomials() {
        assert_eq!(coeffs(0), vec![1]);
        assert_eq!(coeffs(2), vec![-1, 0, 1]);
        assert_eq!(coeffs(3), vec![0, -3, 0, 1]);
        assert_eq!(coeffs(4), vec![3, 0, -6, 0, 1]);
    }

    #[test]
    fn leading_one_and_parity() {
        for k in 0..15 {
            let h = hermite_coeffs(k);
            assert_eq!(h.coeffs.len(), k as usize + 1);
            assert!(h.coeffs[k as usize].is_one());
            for (j, c) in h.coeffs.iter().enumerate() {
                if (j as u32 + k) % 2 == 1 {
                    assert!(c.is_zero(), "k={k} j={j}");
                }
            }
        }
    }

    #[test]
    fn eval_examples() {
        assert_eq!(hermite_eval(1, &int(5)), int(5));
        assert_eq!(hermite_eval(2, &int(1)), int(0));
        assert_eq!(hermite_eval(4, &int(0)), int(3));
        assert_eq!(hermite_eval(0, &rat(7, 3)), int(1));
    }

    #[test]
    fn recursion_matches_coefficients_on_grid() {
        for k in 0..=12 {
            let h = hermite_coeffs(k);
            for num in -6..=6 {
                for den in [1, 2, 3, 5] {
                    let x = rat(num, den);
                    assert_eq!(h.eval(&x), hermite_eval(k, &x), "k={k} x={x}");
                }
            }
        }
    }

    #[test]
    fn float_eval_tracks_exact() {
        for k in 0..10 {
            let exact = crate::scalar::to_f64(&hermite_eval(k, &rat(3, 2)));
            assert!((hermite_eval_f64(k, 1.5) - exact).abs() <= 1e-12 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn linearize_examples() {
        let one: BTreeMap<u32, ExactScalar> = [(5, int(1))].into();
        assert_eq!(linearize(0, 5), one);
        let l11: BTreeMap<u32, ExactScalar> = [(2, int(1)), (0, int(1))].into();
        assert_eq!(linearize(1, 1), l11);
        let l22: BTreeMap<u32, ExactScalar> = [(4, int(1)), (2, int(4)), (0, int(2))].into();
        assert_eq!(linearize(2, 2), l22);
    }

    fn poly_mul(a: &[ExactScalar], b: &[ExactScalar]) -> Vec<ExactScalar> {
        let mut out = vec![ExactScalar::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    #[test]
    fn linearization_reproduces_monomial_product() {
        for a in 0..=8 {
            for b in 0..=8 {
                let direct = poly_mul(&hermite_coeffs(a).coeffs, &hermite_coeffs(b).coeffs);
                let mut via = vec![ExactScalar::zero(); (a + b + 1) as usize];
                for (r, c) in linearize(a, b) {
                    for (j, h) in hermite_coeffs(r).coeffs.iter().enumerate() {
                        via[j] += &c * h;
                    }
                }
                assert_eq!(direct, via, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn chi2_examples_and_recurrence() {
        assert_eq!(chi2_moment(3, 0), int(1));
        assert_eq!(chi2_moment(2, 1), int(2));
        assert_eq!(chi2_moment(1, 2), int(3));
        for n in 1..=10 {
            for q in 1..=10 {
                assert_eq!(
                    chi2_moment(n, q),
                    chi2_moment(n, q - 1) * int((n + 2 * q - 2) as i64)
                );
            }
        }
        for q in 0..=10 {
            let df = double_factorial(2 * q as i64 - 1).unwrap();
            assert_eq!(chi2_moment(1, q), from_bigint(BigInt::from(df)));
        }
    }

    #[test]
    fn double_factorial_examples() {
        assert_eq!(double_factorial(-1).unwrap(), BigUint::one());
        assert_eq!(double_factorial(3).unwrap(), BigUint::from(3u32));
        assert_eq!(double_factorial(7).unwrap(), BigUint::from(105u32));
        assert!(double_factorial(4).is_err());
        assert!(double_factorial(-3).is_err());
    }
}
