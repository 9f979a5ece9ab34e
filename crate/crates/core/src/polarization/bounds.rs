//! Closed-form constants, all evaluated in the log domain.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundFormula {
    /// `sqrt(2^K Γ(K + n/2) / (Γ(n/2) ∏ k_i!))`
    ChaosMoment,
    /// `sqrt(2^{K-2} K^K / ∏ k_i^{k_i})`
    Pinasco,
    /// `(1.91 d)^{-d/2}`
    FrenkelLower,
    /// `d^{d/2}`
    LinearizationLower,
    /// `sqrt(d (d+2) ··· (3d-2))`
    LinearizationUpper,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundValue {
    pub ln_value: f64,
    pub formula: BoundFormula,
}

impl BoundValue {
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }

    pub fn squared(&self) -> f64 {
        (2.0 * self.ln_value).exp()
    }
}

/// `ln Γ(m/2)` for a positive integer `m`, by the exact recursion down to
/// `Γ(1) = 1` or `Γ(1/2) = sqrt(π)`.
pub fn ln_gamma_half(m: u64) -> f64 {
    assert!(m >= 1, "Γ(m/2) needs m >= 1");
    let x = m as f64 / 2.0;
    let steps = (m - 1) / 2;
    let base = if m % 2 == 0 { 0.0 } else { 0.5 * std::f64::consts::PI.ln() };
    // Γ(x) = Γ(x - steps) ∏_{j=1}^{steps} (x - j)
    base + (1..=steps).map(|j| (x - j as f64).ln()).sum::<f64>()
}

/// `ln(Γ(n/2 + q) / Γ(n/2)) = Σ_{j<q} ln(n/2 + j)`.
fn ln_gamma_shift(n: u64, q: u64) -> f64 {
    let h = n as f64 / 2.0;
    (0..q).map(|j| (h + j as f64).ln()).sum()
}

fn ln_factorial(k: u64) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

fn check_ks(ks: &[u32]) -> Result<u64> {
    if ks.is_empty() || ks.contains(&0) {
        return Err(Error::input("degrees must be a non-empty list of positive integers"));
    }
    Ok(ks.iter().map(|&k| k as u64).sum())
}

/// `sqrt(2^K Γ(K + n/2) / (Γ(n/2) ∏ k_i!))` with `K = Σ k_i`.
pub fn new_bound(n: u32, ks: &[u32]) -> Result<BoundValue> {
    if n == 0 {
        return Err(Error::input("dimension n must be >= 1"));
    }
    let big_k = check_ks(ks)?;
    let ln_sq = big_k as f64 * std::f64::consts::LN_2 + ln_gamma_shift(n as u64, big_k)
        - ks.iter().map(|&k| ln_factorial(k as u64)).sum::<f64>();
    Ok(BoundValue {
        ln_value: 0.5 * ln_sq,
        formula: BoundFormula::ChaosMoment,
    })
}

/// `sqrt(2^{K-2} K^K / ∏ k_i^{k_i})`.
pub fn pinasco_bound(ks: &[u32]) -> Result<BoundValue> {
    let big_k = check_ks(ks)? as f64;
    let ln_sq = (big_k - 2.0) * std::f64::consts::LN_2 + big_k * big_k.ln()
        - ks.iter().map(|&k| k as f64 * (k as f64).ln()).sum::<f64>();
    Ok(BoundValue {
        ln_value: 0.5 * ln_sq,
        formula: BoundFormula::Pinasco,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundComparison {
    NewBetter,
    PinascoBetter,
    EqualWithinTol,
}

/// The smaller constant is the better bound. Squares are compared with
/// relative tolerance `1e-9`.
pub fn compare_bounds(n: u32, ks: &[u32]) -> Result<BoundComparison> {
    let diff = 2.0 * (new_bound(n, ks)?.ln_value - pinasco_bound(ks)?.ln_value);
    Ok(if diff.abs() <= 1e-9 {
        BoundComparison::EqualWithinTol
    } else if diff < 0.0 {
        BoundComparison::NewBetter
    } else {
        BoundComparison::PinascoBetter
    })
}

/// `(1.91 d)^{-d/2}`.
pub fn frenkel_lower(d: u32) -> Result<BoundValue> {
    if d < 2 {
        return Err(Error::input("d must be >= 2"));
    }
    let d = d as f64;
    Ok(BoundValue {
        ln_value: -0.5 * d * (1.91 * d).ln(),
        formula: BoundFormula::FrenkelLower,
    })
}

/// `(d^{d/2}, sqrt(d (d+2) ··· (3d-2)))`.
pub fn cd_bracket(d: u32) -> Result<(BoundValue, BoundValue)> {
    if d < 2 {
        return Err(Error::input("d must be >= 2"));
    }
    let df = d as f64;
    let lower = BoundValue {
        ln_value: 0.5 * df * df.ln(),
        formula: BoundFormula::LinearizationLower,
    };
    let upper = BoundValue {
        ln_value: 0.5 * (0..d).map(|j| (df + 2.0 * j as f64).ln()).sum::<f64>(),
        formula: BoundFormula::LinearizationUpper,
    };
    Ok((lower, upper))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn gamma_half_values() {
        let pi = std::f64::consts::PI;
        assert!(close(ln_gamma_half(1).exp(), pi.sqrt(), 1e-15));
        assert_eq!(ln_gamma_half(2), 0.0);
        assert!(close(ln_gamma_half(3).exp(), pi.sqrt() / 2.0, 1e-15));
        assert!(close(ln_gamma_half(10).exp(), 24.0, 1e-14));
        assert!(close(ln_gamma_half(7).exp(), 15.0 / 8.0 * pi.sqrt(), 1e-14));
    }

    #[test]
    fn new_bound_examples() {
        assert!(close(new_bound(2, &[1, 1]).unwrap().value(), 8f64.sqrt(), 1e-12));
        assert!(close(new_bound(1, &[1]).unwrap().value(), 1.0, 1e-12));
        // value² = E[R^{2K}] / ∏k_i!
        for (n, ks) in [(3u32, vec![2u32, 1]), (5, vec![3, 3, 1]), (1, vec![4])] {
            let big_k: u32 = ks.iter().sum();
            let chi = crate::scalar::to_f64(&crate::hermite::chi2_moment(n, big_k));
            let fact: f64 = ks.iter().map(|&k| crate::hermite::factorial_f64(k)).product();
            assert!(close(new_bound(n, &ks).unwrap().squared(), chi / fact, 1e-12));
        }
        assert!(new_bound(0, &[1]).is_err());
        assert!(new_bound(2, &[]).is_err());
    }

    #[test]
    fn pinasco_examples() {
        assert!(close(pinasco_bound(&[1, 1]).unwrap().value(), 2.0, 1e-12));
        assert!(close(pinasco_bound(&[1, 1, 1]).unwrap().value(), 54f64.sqrt(), 1e-12));
        assert!(close(pinasco_bound(&[2]).unwrap().value(), 1.0, 1e-12));
    }

    #[test]
    fn comparisons() {
        assert_eq!(compare_bounds(2, &[1, 1]).unwrap(), BoundComparison::PinascoBetter);
        assert_eq!(compare_bounds(1, &[1]).unwrap(), BoundComparison::PinascoBetter);
        assert_eq!(compare_bounds(3, &[2; 20]).unwrap(), BoundComparison::NewBetter);
    }

    #[test]
    fn frenkel_and_bracket() {
        assert!(close(frenkel_lower(2).unwrap().value(), 1.0 / 3.82, 1e-12));
        let (lo, hi) = cd_bracket(2).unwrap();
        assert!(close(lo.value(), 2.0, 1e-12));
        assert!(close(hi.value(), 8f64.sqrt(), 1e-12));
        assert!(frenkel_lower(1).is_err());
    }

    #[test]
    fn bracket_ratio_against_frenkel_constant() {
        // upper/lower = sqrt(∏(1 + 2j/d)); its d-th root tends to 1.91156…
        let below = |d: u32| {
            let (lo, hi) = cd_bracket(d).unwrap();
            hi.ln_value - lo.ln_value < 0.5 * d as f64 * 1.91f64.ln()
        };
        assert!((2..=674).all(below));
        assert!(!below(675) && !below(1000));
    }
}
