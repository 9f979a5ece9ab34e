//! Finite Hermite expansions `F = Σ_α c_α ∏_j H_{α_j}(x_j)` on `R^n` and the
//! Ornstein-Uhlenbeck calculus on them.
//!
//! The generator acts spectrally: a term of total degree `|α|` is an
//! eigenfunction with eigenvalue `-|α|`. Products go through the
//! one-dimensional linearization coefficients coordinate by coordinate.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num::bigint::BigInt;
use num::{One, Zero};

use crate::error::{Error, Result};
use crate::hermite::{factorial, hermite_eval, hermite_eval_f64, linearization_coeff};
use crate::scalar::{format_fraction, from_bigint, int, parse_scalar, to_f64, ExactScalar};

/// Default cap on the summed degrees in [`product_expectation`].
pub const PRODUCT_CAP: usize = 28;

/// Sparse multi-index: `(coordinate, degree)` pairs sorted by coordinate,
/// zero degrees omitted. The derived ordering is lexicographic on those
/// pairs, which is the canonical order of every map keyed by it.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<(usize, u32)>);

impl MultiIndex {
    pub fn zero() -> Self {
        MultiIndex(Vec::new())
    }

    pub fn single(coord: usize, degree: u32) -> Self {
        if degree == 0 {
            Self::zero()
        } else {
            MultiIndex(vec![(coord, degree)])
        }
    }

    pub fn from_dense(degrees: &[u32]) -> Self {
        MultiIndex(
            degrees
                .iter()
                .enumerate()
                .filter(|(_, &d)| d > 0)
                .map(|(j, &d)| (j, d))
                .collect(),
        )
    }

    /// Builds from arbitrary pairs; repeated coordinates add up.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, u32)>) -> Self {
        let mut map = BTreeMap::new();
        for (c, d) in pairs {
            *map.entry(c).or_insert(0) += d;
        }
        MultiIndex(map.into_iter().filter(|&(_, d)| d > 0).collect())
    }

    pub fn to_dense(&self, n: usize) -> Vec<u32> {
        let mut out = vec![0; n];
        for &(c, d) in &self.0 {
            out[c] = d;
        }
        out
    }

    pub fn degree_at(&self, coord: usize) -> u32 {
        self.0
            .iter()
            .find(|(c, _)| *c == coord)
            .map_or(0, |&(_, d)| d)
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|&(_, d)| d).sum()
    }

    pub fn pairs(&self) -> &[(usize, u32)] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_coord(&self) -> Option<usize> {
        self.0.last().map(|&(c, _)| c)
    }

    /// `∏_j α_j!`, the squared norm of the basis element under `γ_n`.
    pub fn norm_squared(&self) -> BigInt {
        self.0
            .iter()
            .fold(BigInt::one(), |acc, &(_, d)| acc * BigInt::from(factorial(d)))
    }
}

/// Polynomial as a map from multi-index to rational coefficient. In
/// [`ChaosElement`] the keys index Hermite products; in [`Monomials`] they
/// are plain exponents.
pub type Coeffs = BTreeMap<MultiIndex, ExactScalar>;

/// Monomial-basis polynomial, keys are exponent vectors.
pub type Monomials = Coeffs;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChaosElement {
    n: usize,
    coeffs: Coeffs,
}

fn insert_add(map: &mut Coeffs, key: MultiIndex, value: ExactScalar) {
    if value.is_zero() {
        return;
    }
    use std::collections::btree_map::Entry;
    match map.entry(key) {
        Entry::Vacant(e) => {
            e.insert(value);
        }
        Entry::Occupied(mut e) => {
            *e.get_mut() += value;
            if e.get().is_zero() {
                e.remove();
            }
        }
    }
}

impl ChaosElement {
    pub fn zero(n: usize) -> Self {
        ChaosElement {
            n,
            coeffs: Coeffs::new(),
        }
    }

    pub fn constant(n: usize, c: ExactScalar) -> Self {
        let mut coeffs = Coeffs::new();
        insert_add(&mut coeffs, MultiIndex::zero(), c);
        ChaosElement { n, coeffs }
    }

    /// `H_degree(x_coord)` on `R^n`; `coord` is zero-based.
    pub fn hermite(n: usize, coord: usize, degree: u32) -> Self {
        assert!(coord < n, "coordinate {coord} outside dimension {n}");
        let mut coeffs = Coeffs::new();
        coeffs.insert(MultiIndex::single(coord, degree), int(1));
        ChaosElement { n, coeffs }
    }

    /// Drops zero coefficients and checks that every index fits in `n`.
    pub fn from_coeffs(n: usize, terms: impl IntoIterator<Item = (MultiIndex, ExactScalar)>) -> Result<Self> {
        let mut coeffs = Coeffs::new();
        for (k, v) in terms {
            if k.max_coord().is_some_and(|c| c >= n) {
                return Err(Error::input(format!(
                    "multi-index uses coordinate {} in dimension {n}",
                    k.max_coord().unwrap() + 1
                )));
            }
            insert_add(&mut coeffs, k, v);
        }
        Ok(ChaosElement { n, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &Coeffs {
        &self.coeffs
    }

    pub fn coeff(&self, index: &MultiIndex) -> ExactScalar {
        self.coeffs.get(index).cloned().unwrap_or_else(ExactScalar::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest total degree present; zero for the zero element.
    pub fn degree(&self) -> u32 {
        self.coeffs.keys().map(MultiIndex::total).max().unwrap_or(0)
    }

    /// True iff every stored term has total degree `k`, i.e. `F ∈ Ker(L + kI)`.
    pub fn is_pure(&self, k: u32) -> bool {
        self.coeffs.keys().all(|m| m.total() == k)
    }

    /// The `k` with `F ∈ Ker(L + kI)`, if `F` is a non-zero eigenfunction.
    pub fn pure_degree(&self) -> Option<u32> {
        let k = self.coeffs.keys().next()?.total();
        self.is_pure(k).then_some(k)
    }

    /// Coordinates with a non-zero degree in some term.
    pub fn support(&self) -> std::collections::BTreeSet<usize> {
        self.coeffs
            .keys()
            .flat_map(|m| m.pairs().iter().map(|&(c, _)| c))
            .collect()
    }

    pub fn scale(&self, c: &ExactScalar) -> Self {
        if c.is_zero() {
            return Self::zero(self.n);
        }
        ChaosElement {
            n: self.n,
            coeffs: self.coeffs.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    /// Multiplies the degree-`k` component by `f(k)`.
    pub fn map_by_degree(&self, f: impl Fn(u32) -> ExactScalar) -> Self {
        let mut coeffs = Coeffs::new();
        for (k, v) in &self.coeffs {
            insert_add(&mut coeffs, k.clone(), v * f(k.total()));
        }
        ChaosElement { n: self.n, coeffs }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_dim(self, other)?;
        let mut coeffs = self.coeffs.clone();
        for (k, v) in &other.coeffs {
            insert_add(&mut coeffs, k.clone(), v.clone());
        }
        Ok(ChaosElement { n: self.n, coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&int(-1)))
    }

    pub fn eval(&self, x: &[ExactScalar]) -> ExactScalar {
        assert_eq!(x.len(), self.n);
        self.coeffs
            .iter()
            .map(|(m, c)| {
                m.pairs()
                    .iter()
                    .fold(c.clone(), |acc, &(j, d)| acc * hermite_eval(d, &x[j]))
            })
            .sum()
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n);
        self.coeffs
            .iter()
            .map(|(m, c)| {
                m.pairs()
                    .iter()
                    .fold(to_f64(c), |acc, &(j, d)| acc * hermite_eval_f64(d, x[j]))
            })
            .sum()
    }
}

fn same_dim(a: &ChaosElement, b: &ChaosElement) -> Result<()> {
    if a.n != b.n {
        return Err(Error::input(format!(
            "chaos elements live in different dimensions ({} vs {})",
            a.n, b.n
        )));
    }
    Ok(())
}

/// Hermite expansion of `∏_j H_{a_j}(x_j) · ∏_j H_{b_j}(x_j)`.
fn multiply_basis(a: &MultiIndex, b: &MultiIndex) -> Vec<(MultiIndex, BigInt)> {
    let coords: std::collections::BTreeSet<usize> = a
        .pairs()
        .iter()
        .chain(b.pairs())
        .map(|&(c, _)| c)
        .collect();
    let mut terms: Vec<(Vec<(usize, u32)>, BigInt)> = vec![(Vec::new(), BigInt::one())];
    for c in coords {
        let (da, db) = (a.degree_at(c), b.degree_at(c));
        let mut next = Vec::with_capacity(terms.len() * (da.min(db) as usize + 1));
        for s in 0..=da.min(db) {
            let w = BigInt::from(linearization_coeff(da, db, s));
            let r = da + db - 2 * s;
            for (pairs, coeff) in &terms {
                let mut p = pairs.clone();
                if r > 0 {
                    p.push((c, r));
                }
                next.push((p, coeff * &w));
            }
        }
        terms = next;
    }
    terms
        .into_iter()
        .map(|(p, c)| (MultiIndex(p), c))
        .collect()
}

/// Hermite expansion of the pointwise product.
pub fn multiply(f: &ChaosElement, g: &ChaosElement) -> Result<ChaosElement> {
    same_dim(f, g)?;
    let mut coeffs = Coeffs::new();
    for (a, ca) in &f.coeffs {
        for (b, cb) in &g.coeffs {
            let c = ca * cb;
            for (m, w) in multiply_basis(a, b) {
                insert_add(&mut coeffs, m, &c * from_bigint(w));
            }
        }
    }
    Ok(ChaosElement { n: f.n, coeffs })
}

/// `∫ F dγ_n`: the coefficient of the zero multi-index.
pub fn expectation(f: &ChaosElement) -> ExactScalar {
    f.coeff(&MultiIndex::zero())
}

/// `∫ F G dγ_n = Σ_α f_α g_α α!`.
pub fn inner(f: &ChaosElement, g: &ChaosElement) -> Result<ExactScalar> {
    same_dim(f, g)?;
    let (small, large) = if f.coeffs.len() <= g.coeffs.len() { (f, g) } else { (g, f) };
    Ok(small
        .coeffs
        .iter()
        .filter_map(|(k, v)| large.coeffs.get(k).map(|w| v * w * from_bigint(k.norm_squared())))
        .sum())
}

/// `∫ ∏ F_i dγ_n` with the default cap of [`PRODUCT_CAP`] summed degrees.
pub fn product_expectation(fs: &[ChaosElement]) -> Result<ExactScalar> {
    product_expectation_with_cap(fs, PRODUCT_CAP)
}

pub fn product_expectation_with_cap(fs: &[ChaosElement], cap: usize) -> Result<ExactScalar> {
    let Some(first) = fs.first() else {
        return Ok(int(1));
    };
    let total: usize = fs.iter().map(|f| f.degree() as usize).sum();
    if total > cap {
        return Err(Error::Resource {
            what: "product expectation degree",
            requested: total,
            cap,
        });
    }
    if fs.len() == 1 {
        return Ok(expectation(first));
    }
    // Multiply each half, then pair the halves with the Parseval inner product.
    let mid = fs.len() / 2;
    let left = product(&fs[..mid])?;
    let right = product(&fs[mid..])?;
    inner(&left, &right)
}

fn product(fs: &[ChaosElement]) -> Result<ChaosElement> {
    let mut acc = fs[0].clone();
    for f in &fs[1..] {
        acc = multiply(&acc, f)?;
    }
    Ok(acc)
}

/// `L F`, computed spectrally.
pub fn generator_apply(f: &ChaosElement) -> ChaosElement {
    f.map_by_degree(|k| int(-(k as i64)))
}

/// `∫ ⟨∇F, ∇G⟩ dγ_n = -∫ F · L G dγ_n`.
pub fn dirichlet(f: &ChaosElement, g: &ChaosElement) -> Result<ExactScalar> {
    Ok(-inner(f, &generator_apply(g))?)
}

/// Expansion of `H_p(⟨v, x⟩)` for a rational unit vector `v`:
/// `Σ_{|α|=p} p!/α! · v^α · ∏_j H_{α_j}(x_j)`.
pub fn hermite_of_linear_form(p: u32, v: &[ExactScalar]) -> Result<ChaosElement> {
    let norm: ExactScalar = v.iter().map(|x| x * x).sum();
    if !norm.is_one() {
        return Err(Error::input(format!(
            "vector is not a unit vector (squared norm {norm})"
        )));
    }
    let n = v.len();
    let p_fact = BigInt::from(factorial(p));
    let mut coeffs = Coeffs::new();
    let mut alpha = vec![0u32; n];
    compositions(p, 0, &mut alpha, &mut |alpha| {
        let mut c = from_bigint(p_fact.clone());
        for (j, &a) in alpha.iter().enumerate() {
            if a > 0 {
                c = c * num::pow(v[j].clone(), a as usize) / from_bigint(BigInt::from(factorial(a)));
            }
        }
        insert_add(&mut coeffs, MultiIndex::from_dense(alpha), c);
    });
    Ok(ChaosElement { n, coeffs })
}

fn compositions(rest: u32, pos: usize, alpha: &mut Vec<u32>, visit: &mut impl FnMut(&[u32])) {
    if pos + 1 == alpha.len() {
        alpha[pos] = rest;
        visit(alpha);
        alpha[pos] = 0;
        return;
    }
    if alpha.is_empty() {
        return;
    }
    for a in 0..=rest {
        alpha[pos] = a;
        compositions(rest - a, pos + 1, alpha, visit);
    }
    alpha[pos] = 0;
}

/// Monomial coefficients of the expansion: `H_k(x) = Σ_s (-1)^s k!/(s!(k-2s)!2^s) x^{k-2s}`.
pub fn to_monomials(f: &ChaosElement) -> Monomials {
    let mut out = Monomials::new();
    for (m, c) in &f.coeffs {
        let mut terms: Vec<(Vec<(usize, u32)>, ExactScalar)> = vec![(Vec::new(), c.clone())];
        for &(j, d) in m.pairs() {
            let h = crate::hermite::hermite_coeffs(d);
            let mut next = Vec::new();
            for (e, hc) in h.coeffs.iter().enumerate() {
                if hc.is_zero() {
                    continue;
                }
                for (pairs, coeff) in &terms {
                    let mut p = pairs.clone();
                    if e > 0 {
                        p.push((j, e as u32));
                    }
                    next.push((p, coeff * hc));
                }
            }
            terms = next;
        }
        for (p, v) in terms {
            insert_add(&mut out, MultiIndex(p), v);
        }
    }
    out
}

/// Inverse of [`to_monomials`]: `x^m = Σ_s m!/(s!(m-2s)!2^s) H_{m-2s}(x)`.
pub fn from_monomials(n: usize, monomials: &Monomials) -> Result<ChaosElement> {
    let mut coeffs = Coeffs::new();
    for (m, c) in monomials {
        if m.max_coord().is_some_and(|j| j >= n) {
            return Err(Error::input("monomial coordinate outside the dimension"));
        }
        let mut terms: Vec<(Vec<(usize, u32)>, ExactScalar)> = vec![(Vec::new(), c.clone())];
        for &(j, e) in m.pairs() {
            let mut next = Vec::new();
            for s in 0..=e / 2 {
                let num = BigInt::from(factorial(e));
                let den = BigInt::from(factorial(s))
                    * BigInt::from(factorial(e - 2 * s))
                    * num::pow(BigInt::from(2), s as usize);
                let w = ExactScalar::new(num, den);
                let r = e - 2 * s;
                for (pairs, coeff) in &terms {
                    let mut p = pairs.clone();
                    if r > 0 {
                        p.push((j, r));
                    }
                    next.push((p, coeff * &w));
                }
            }
            terms = next;
        }
        for (p, v) in terms {
            insert_add(&mut coeffs, MultiIndex(p), v);
        }
    }
    Ok(ChaosElement { n, coeffs })
}

/// Canonical text: `n; a_1:...:a_n=num/den; ...` in canonical index order.
/// The zero element is written as `n;`.
impl fmt::Display for ChaosElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{};", self.n)?;
        let mut first = true;
        for (m, c) in &self.coeffs {
            let dense = m.to_dense(self.n);
            let idx = dense.iter().map(u32::to_string).collect::<Vec<_>>().join(":");
            if first {
                write!(f, " {idx}={}", format_fraction(c))?;
                first = false;
            } else {
                write!(f, "; {idx}={}", format_fraction(c))?;
            }
        }
        Ok(())
    }
}

impl FromStr for ChaosElement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(';');
        let head = parts.next().unwrap_or("").trim();
        let n: usize = head
            .parse()
            .map_err(|_| Error::input(format!("bad chaos dimension `{head}`")))?;
        let mut terms = Vec::new();
        for part in parts {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (idx, val) = part
                .split_once('=')
                .ok_or_else(|| Error::input(format!("chaos term `{part}` lacks `=`")))?;
            let degrees: Vec<u32> = idx
                .split(':')
                .map(|d| {
                    d.trim()
                        .parse()
                        .map_err(|_| Error::input(format!("bad degree `{d}`")))
                })
                .collect::<Result<_>>()?;
            if degrees.len() != n {
                return Err(Error::input(format!(
                    "multi-index `{idx}` has {} entries, expected {n}",
                    degrees.len()
                )));
            }
            terms.push((MultiIndex::from_dense(&degrees), parse_scalar(val)?));
        }
        ChaosElement::from_coeffs(n, terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn h(n: usize, c: usize, d: u32) -> ChaosElement {
        ChaosElement::hermite(n, c, d)
    }

    fn elem(n: usize, terms: &[(&[u32], ExactScalar)]) -> ChaosElement {
        ChaosElement::from_coeffs(n, terms.iter().map(|(d, c)| (MultiIndex::from_dense(d), c.clone()))).unwrap()
    }

    #[test]
    fn multiply_examples() {
        let x = h(1, 0, 1);
        assert_eq!(multiply(&x, &x).unwrap(), elem(1, &[(&[2], int(1)), (&[0], int(1))]));
        let y = h(2, 1, 1);
        let x2 = h(2, 0, 1);
        assert_eq!(multiply(&x2, &y).unwrap(), elem(2, &[(&[1, 1], int(1))]));
        let q = h(1, 0, 2);
        assert_eq!(
            multiply(&q, &q).unwrap(),
            elem(1, &[(&[4], int(1)), (&[2], int(4)), (&[0], int(2))])
        );
        assert!(multiply(&x, &y).is_err());
    }

    #[test]
    fn expectation_examples() {
        assert_eq!(expectation(&ChaosElement::constant(3, rat(5, 7))), rat(5, 7));
        assert!(expectation(&h(2, 1, 3)).is_zero());
        let x = h(1, 0, 1);
        assert_eq!(expectation(&multiply(&x, &x).unwrap()), int(1));
    }

    #[test]
    fn product_expectation_examples() {
        let x = h(1, 0, 1);
        assert_eq!(product_expectation(&[x.clone(), x]).unwrap(), int(1));
        let q = h(1, 0, 2);
        assert_eq!(product_expectation(&[q.clone(), q.clone(), q]).unwrap(), int(8));
        let f = elem(3, &[(&[1, 1, 0], int(2)), (&[2, 0, 0], int(-1))]);
        let g = elem(3, &[(&[0, 0, 3], rat(1, 2))]);
        let joint = product_expectation(&[f.clone(), f.clone(), g.clone(), g.clone()]).unwrap();
        let ff = product_expectation(&[f.clone(), f]).unwrap();
        let gg = product_expectation(&[g.clone(), g]).unwrap();
        assert_eq!(joint, ff * gg);
    }

    #[test]
    fn product_cap() {
        let q = h(1, 0, 10);
        let r = product_expectation(&[q.clone(), q.clone(), q]);
        assert!(matches!(r, Err(Error::Resource { .. })));
    }

    #[test]
    fn generator_examples() {
        let f = elem(2, &[(&[2, 1], int(3)), (&[0, 3], int(-1))]);
        assert_eq!(generator_apply(&f), f.scale(&int(-3)));
        assert!(generator_apply(&ChaosElement::constant(2, int(4))).is_zero());
        let g = h(2, 0, 1).add(&h(2, 1, 2)).unwrap();
        let expected = h(2, 0, 1).scale(&int(-1)).add(&h(2, 1, 2).scale(&int(-2))).unwrap();
        assert_eq!(generator_apply(&g), expected);
    }

    #[test]
    fn dirichlet_examples() {
        let f = elem(2, &[(&[2, 1], int(3)), (&[0, 3], int(-1))]);
        let ff = product_expectation(&[f.clone(), f.clone()]).unwrap();
        assert_eq!(dirichlet(&f, &f).unwrap(), int(3) * ff);
        assert!(dirichlet(&ChaosElement::constant(2, int(1)), &f).unwrap().is_zero());
        assert!(dirichlet(&h(2, 0, 1), &h(2, 1, 1)).unwrap().is_zero());
    }

    #[test]
    fn linear_form_examples() {
        assert_eq!(hermite_of_linear_form(1, &[int(1), int(0)]).unwrap(), h(2, 0, 1));
        let v = [rat(3, 5), rat(4, 5)];
        let f = hermite_of_linear_form(2, &v).unwrap();
        assert_eq!(
            f,
            elem(2, &[(&[2, 0], rat(9, 25)), (&[1, 1], rat(24, 25)), (&[0, 2], rat(16, 25))])
        );
        assert!(f.is_pure(2));
        assert_eq!(product_expectation(&[f.clone(), f]).unwrap(), int(2));
        assert_eq!(hermite_of_linear_form(3, &[int(0), int(1)]).unwrap(), h(2, 1, 3));
        assert!(hermite_of_linear_form(2, &[int(1), int(1)]).is_err());
    }

    #[test]
    fn linear_form_matches_pointwise_hermite() {
        let v = [rat(2, 3), rat(-1, 3), rat(2, 3)];
        for p in 1..=5 {
            let f = hermite_of_linear_form(p, &v).unwrap();
            for x in [[int(1), rat(1, 2), int(-2)], [rat(3, 4), int(0), rat(5, 3)]] {
                let t: ExactScalar = v.iter().zip(&x).map(|(a, b)| a * b).sum();
                assert_eq!(f.eval(&x), hermite_eval(p, &t));
            }
        }
    }

    #[test]
    fn monomial_examples() {
        let m = to_monomials(&h(1, 0, 2));
        let expected: Monomials = [(MultiIndex::single(0, 2), int(1)), (MultiIndex::zero(), int(-1))].into();
        assert_eq!(m, expected);
        let sq: Monomials = [(MultiIndex::single(0, 2), int(1))].into();
        assert_eq!(from_monomials(1, &sq).unwrap(), elem(1, &[(&[2], int(1)), (&[0], int(1))]));
        let f = elem(3, &[(&[2, 1, 0], rat(3, 2)), (&[0, 0, 4], int(-1)), (&[1, 0, 0], int(2))]);
        assert_eq!(from_monomials(3, &to_monomials(&f)).unwrap(), f);
    }

    #[test]
    fn text_form() {
        let f = elem(2, &[(&[2, 0], rat(9, 25)), (&[1, 1], rat(24, 25)), (&[0, 0], int(-1))]);
        let text = f.to_string();
        assert_eq!(text, "2; 0:0=-1/1; 1:1=24/25; 2:0=9/25");
        assert_eq!(text.parse::<ChaosElement>().unwrap(), f);
        assert_eq!("3;".parse::<ChaosElement>().unwrap(), ChaosElement::zero(3));
        assert!("2; 1=1".parse::<ChaosElement>().is_err());
    }
}
