//! Multilinear (square-free) homogeneous forms.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num::Zero;

use crate::chaos::{ChaosElement, MultiIndex};
use crate::error::{Error, Result};
use crate::hermite::chi2_moment;
use crate::scalar::{format_scalar, from_bigint, parse_scalar, to_f64, ExactScalar};

/// `F(x) = Σ_{i_1<…<i_k} c_{i_1…i_k} x_{i_1}···x_{i_k}` on `R^n`.
///
/// Tuples are stored 0-based; the text format is 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultilinearForm {
    n: usize,
    k: usize,
    terms: BTreeMap<Vec<usize>, ExactScalar>,
}

impl MultilinearForm {
    pub fn new(n: usize, k: usize, terms: impl IntoIterator<Item = (Vec<usize>, ExactScalar)>) -> Result<Self> {
        if n == 0 || k == 0 || k > n {
            return Err(Error::input(format!("need 1 <= k <= n, got n = {n}, k = {k}")));
        }
        let mut map: BTreeMap<Vec<usize>, ExactScalar> = BTreeMap::new();
        for (tuple, c) in terms {
            if tuple.len() != k {
                return Err(Error::input(format!("tuple {tuple:?} does not have {k} entries")));
            }
            if tuple.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::input(format!("tuple {tuple:?} is not strictly increasing")));
            }
            if tuple.iter().any(|&i| i >= n) {
                return Err(Error::input(format!("tuple {tuple:?} has an index outside 1..={n}")));
            }
            *map.entry(tuple).or_insert_with(ExactScalar::zero) += c;
        }
        map.retain(|_, c| !c.is_zero());
        Ok(MultilinearForm { n, k, terms: map })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn terms(&self) -> &BTreeMap<Vec<usize>, ExactScalar> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: &ExactScalar) -> Self {
        let terms = if c.is_zero() {
            BTreeMap::new()
        } else {
            self.terms.iter().map(|(t, v)| (t.clone(), v * c)).collect()
        };
        MultilinearForm { n: self.n, k: self.k, terms }
    }

    /// `∫ F² dγ_n = Σ c²`: distinct square-free monomials are orthonormal.
    pub fn gamma_norm(&self) -> ExactScalar {
        self.terms.values().map(|c| c * c).sum()
    }

    /// `E[F(θ)²]` for `θ` uniform on `S^{n-1}`, from `g = Rθ` with `R`, `θ`
    /// independent: `∫ F² dγ_n = E[R^{2k}] E[F(θ)²]`.
    pub fn sphere_mean_square(&self) -> ExactScalar {
        self.gamma_norm() / chi2_moment(self.n as u32, self.k as u32)
    }

    pub fn eval(&self, x: &[ExactScalar]) -> ExactScalar {
        self.terms
            .iter()
            .map(|(t, c)| t.iter().fold(c.clone(), |acc, &i| acc * &x[i]))
            .sum()
    }

    /// The same polynomial in the Hermite basis: a product of distinct `x_i`
    /// is the product of `H_1(x_i)`.
    pub fn to_chaos(&self) -> ChaosElement {
        ChaosElement::from_coeffs(
            self.n,
            self.terms
                .iter()
                .map(|(t, c)| (MultiIndex::from_pairs(t.iter().map(|&i| (i, 1))), c.clone())),
        )
        .expect("indices are in range")
    }

    pub fn to_float(&self) -> FloatForm {
        FloatForm::new(
            self.n,
            self.k,
            self.terms.iter().map(|(t, c)| (t.clone(), to_f64(c))).collect(),
        )
    }
}

/// `n k; i1,...,ik = value; ...` with 1-based indices.
impl fmt::Display for MultilinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.n, self.k)?;
        for (t, c) in &self.terms {
            let idx: Vec<String> = t.iter().map(|i| (i + 1).to_string()).collect();
            write!(f, "; {} = {}", idx.join(","), format_scalar(c))?;
        }
        Ok(())
    }
}

impl FromStr for MultilinearForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(';');
        let head: Vec<&str> = parts.next().unwrap_or("").split_whitespace().collect();
        let parse_usize = |t: &str| {
            t.parse::<usize>()
                .map_err(|_| Error::input(format!("bad integer `{t}` in form `{s}`")))
        };
        let [n, k] = head[..] else {
            return Err(Error::input(format!("form `{s}` must start with `n k`")));
        };
        let (n, k) = (parse_usize(n)?, parse_usize(k)?);
        let mut terms = Vec::new();
        for part in parts {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (idx, val) = part
                .split_once('=')
                .ok_or_else(|| Error::input(format!("form term `{part}` lacks `=`")))?;
            let tuple = idx
                .split(',')
                .map(|i| match parse_usize(i.trim())? {
                    0 => Err(Error::input("form indices are 1-based")),
                    i => Ok(i - 1),
                })
                .collect::<Result<Vec<_>>>()?;
            terms.push((tuple, parse_scalar(val)?));
        }
        MultilinearForm::new(n, k, terms)
    }
}

/// One form per non-empty line; `#` starts a comment.
pub fn parse_forms(text: &str) -> Result<Vec<MultilinearForm>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::parse)
        .collect()
}

/// Floating-point mirror used by the optimizer.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatForm {
    n: usize,
    k: usize,
    terms: Vec<(Vec<usize>, f64)>,
}

impl FloatForm {
    /// Tuples must be strictly increasing and in range, as for
    /// [`MultilinearForm`]; this is checked in debug builds only.
    pub fn new(n: usize, k: usize, terms: Vec<(Vec<usize>, f64)>) -> Self {
        debug_assert!(terms
            .iter()
            .all(|(t, _)| t.len() == k && t.windows(2).all(|w| w[0] < w[1]) && t.iter().all(|&i| i < n)));
        FloatForm { n, k, terms }
    }

    /// The linear form `x ↦ ⟨x, v⟩`.
    pub fn linear(v: &[f64]) -> Self {
        let terms = v.iter().enumerate().map(|(i, &c)| (vec![i], c)).collect();
        FloatForm::new(v.len(), 1, terms)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn gamma_norm(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c * c).sum()
    }

    pub fn scale(&self, c: f64) -> Self {
        let terms = self.terms.iter().map(|(t, v)| (t.clone(), v * c)).collect();
        FloatForm { n: self.n, k: self.k, terms }
    }

    /// Rescaled to `∫ F² dγ_n = 1`.
    pub fn normalized(&self) -> Self {
        self.scale(1.0 / self.gamma_norm().sqrt())
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(t, c)| t.iter().fold(*c, |acc, &i| acc * x[i]))
            .sum()
    }

    /// Adds `scale · ∇F(x)` into `out`.
    pub fn add_gradient(&self, x: &[f64], scale: f64, out: &mut [f64]) {
        for (t, c) in &self.terms {
            for (pos, &j) in t.iter().enumerate() {
                let rest: f64 = t
                    .iter()
                    .enumerate()
                    .filter(|&(q, _)| q != pos)
                    .fold(1.0, |acc, (_, &i)| acc * x[i]);
                out[j] += scale * c * rest;
            }
        }
    }
}

/// Same layout as [`MultilinearForm`], with float coefficients.
impl fmt::Display for FloatForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.n, self.k)?;
        for (t, c) in &self.terms {
            let idx: Vec<String> = t.iter().map(|i| (i + 1).to_string()).collect();
            write!(f, "; {} = {c:?}", idx.join(","))?;
        }
        Ok(())
    }
}

impl MultilinearForm {
    /// Exact rescaling to unit `γ`-norm when `Σ c²` is a rational square.
    pub fn normalized_exact(&self) -> Option<Self> {
        let g = self.gamma_norm();
        if g.is_zero() {
            return None;
        }
        let (num, den) = (g.numer().sqrt(), g.denom().sqrt());
        if &(&num * &num) == g.numer() && &(&den * &den) == g.denom() {
            Some(self.scale(&(from_bigint(den) / from_bigint(num))))
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::{expectation, multiply};
    use crate::scalar::{int, rat};

    fn form(s: &str) -> MultilinearForm {
        s.parse().unwrap()
    }

    #[test]
    fn gamma_norm_examples() {
        assert_eq!(form("2 2; 1,2 = 1").gamma_norm(), int(1));
        assert_eq!(form("3 2; 1,2 = 3/5; 1,3 = 4/5").gamma_norm(), int(1));
        assert_eq!(form("4 1; 1 = -7/3").gamma_norm(), rat(49, 9));
    }

    #[test]
    fn gamma_norm_matches_chaos_second_moment() {
        let f = form("4 2; 1,2 = 1/2; 1,3 = -2; 2,4 = 3; 3,4 = 1/7");
        let c = f.to_chaos();
        assert_eq!(expectation(&multiply(&c, &c).unwrap()), f.gamma_norm());
        assert!(c.is_pure(2));
    }

    #[test]
    fn sphere_mean_square_examples() {
        assert_eq!(form("2 1; 1 = 1").sphere_mean_square(), rat(1, 2));
        assert_eq!(form("2 2; 1,2 = 1").sphere_mean_square(), rat(1, 8));
        let f = form("3 2; 1,2 = 1; 2,3 = 2");
        assert_eq!(f.scale(&int(3)).sphere_mean_square(), int(9) * f.sphere_mean_square());
    }

    #[test]
    fn text_roundtrip_and_errors() {
        let f = form("3 2; 1,2 = 3/5; 1,3 = 4/5");
        assert_eq!(f.to_string(), "3 2; 1,2 = 3/5; 1,3 = 4/5");
        assert_eq!(form(&f.to_string()), f);
        assert!("3 2; 2,1 = 1".parse::<MultilinearForm>().is_err());
        assert!("3 2; 1,4 = 1".parse::<MultilinearForm>().is_err());
        assert!("3 2; 0,1 = 1".parse::<MultilinearForm>().is_err());
        assert!("3 2; 1 = 1".parse::<MultilinearForm>().is_err());
        assert!("3; 1 = 1".parse::<MultilinearForm>().is_err());
        let many = parse_forms("# two forms\n2 1; 1 = 1\n\n2 1; 2 = 1 # second\n").unwrap();
        assert_eq!(many.len(), 2);
    }

    #[test]
    fn float_mirror_and_gradient() {
        let f = form("3 2; 1,2 = 2; 2,3 = -1");
        let ff = f.to_float();
        let x = [0.5, -1.0, 2.0];
        let exact = f.eval(&[rat(1, 2), int(-1), int(2)]);
        assert_eq!(ff.eval(&x), to_f64(&exact));
        let mut g = vec![0.0; 3];
        ff.add_gradient(&x, 1.0, &mut g);
        // ∂1 = 2 x2, ∂2 = 2 x1 - x3, ∂3 = -x2
        assert_eq!(g, vec![-2.0, -1.0, 1.0]);
    }

    #[test]
    fn exact_normalization() {
        let f = form("2 2; 1,2 = 3");
        assert_eq!(f.normalized_exact().unwrap().gamma_norm(), int(1));
        assert!(form("3 2; 1,2 = 1; 1,3 = 1").normalized_exact().is_none());
    }
}
