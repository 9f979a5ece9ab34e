//! Exact Gaussian moments.
//!
//! Two independent routes are provided for real Gaussian vectors:
//!
//! * the diagram sum ([`hermite_product_moment`]): `E[∏_a H_{p_a}(G_{v_a})]`
//!   is the weighted count of perfect matchings of the legs of the nodes in
//!   which no edge joins two legs of the same node;
//! * Isserlis pairings of raw monomials ([`isserlis_moment`]), where
//!   self-pairings are allowed.
//!
//! Complex moments `E[|∏ G_i^{p_i}|²]` reduce to permanents of the
//! sesquilinear covariance matrix ([`complex_moment`]).

use std::collections::HashMap;

use num::complex::Complex;
use num::{FromPrimitive, Num, One, Signed, Zero};

use crate::chaos::{product_expectation, ChaosElement};
use crate::error::{Error, Result};
use crate::scalar::{format_scalar, int, ExactScalar};

/// Hard cap on the number of legs in a matching sum.
pub const MATCHING_CAP: usize = 28;
/// Hard cap on the permanent size in [`complex_moment`].
pub const PERMANENT_CAP: usize = 14;

/// Symmetric, unit-diagonal, positive semi-definite rational matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorrelationMatrix {
    dim: usize,
    entries: Vec<ExactScalar>,
}

impl CorrelationMatrix {
    /// Validates symmetry, the unit diagonal and positive semi-definiteness.
    pub fn new(dim: usize, entries: Vec<ExactScalar>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("correlation matrix must have dimension >= 1"));
        }
        if entries.len() != dim * dim {
            return Err(Error::input(format!(
                "correlation matrix of dimension {dim} needs {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        for i in 0..dim {
            if !entries[i * dim + i].is_one() {
                return Err(Error::input(format!("diagonal entry {} is not 1", i + 1)));
            }
            for j in 0..i {
                if entries[i * dim + j] != entries[j * dim + i] {
                    return Err(Error::input(format!(
                        "correlation matrix is not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        if !is_psd(dim, &entries) {
            return Err(Error::input("correlation matrix is not positive semi-definite"));
        }
        Ok(CorrelationMatrix { dim, entries })
    }

    pub fn from_rows(rows: Vec<Vec<ExactScalar>>) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::input("correlation matrix must be square"));
        }
        Self::new(dim, rows.into_iter().flatten().collect())
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![ExactScalar::zero(); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = int(1);
        }
        CorrelationMatrix { dim, entries }
    }

    /// Two variables with correlation `rho`, `|rho| <= 1`.
    pub fn pair(rho: ExactScalar) -> Result<Self> {
        Self::new(2, vec![int(1), rho.clone(), rho, int(1)])
    }

    /// Gram matrix of rational unit vectors; exactly PSD by construction.
    pub fn gram(vectors: &[Vec<ExactScalar>]) -> Result<Self> {
        let dim = vectors.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for u in vectors {
            for v in vectors {
                if u.len() != v.len() {
                    return Err(Error::input("Gram vectors must share a dimension"));
                }
                entries.push(dot(u, v));
            }
        }
        Self::new(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &ExactScalar {
        &self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[ExactScalar] {
        &self.entries
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(crate::scalar::to_f64).collect()
    }

    /// Rows separated by `;`, entries by `,`.
    pub fn canonical(&self) -> String {
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| format_scalar(self.get(i, j)))
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join(";")
    }

    /// Returns the matrix restricted and reordered to `indices`.
    pub fn submatrix(&self, indices: &[usize]) -> Self {
        let dim = indices.len();
        let entries = indices
            .iter()
            .flat_map(|&i| indices.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.get(i, j).clone())
            .collect();
        CorrelationMatrix { dim, entries }
    }
}

fn dot(u: &[ExactScalar], v: &[ExactScalar]) -> ExactScalar {
    u.iter().zip(v).fold(ExactScalar::zero(), |acc, (a, b)| acc + a * b)
}

/// Symmetric elimination with rational pivots: PSD iff every pivot is
/// non-negative and a zero pivot has a zero row.
fn is_psd(dim: usize, entries: &[ExactScalar]) -> bool {
    let mut a: Vec<Vec<ExactScalar>> = (0..dim)
        .map(|i| entries[i * dim..(i + 1) * dim].to_vec())
        .collect();
    let mut active: Vec<usize> = (0..dim).collect();
    while !active.is_empty() {
        if active.iter().any(|&i| a[i][i].is_negative()) {
            return false;
        }
        let pivot = active.iter().copied().find(|&i| a[i][i].is_positive());
        let Some(p) = pivot else {
            // All remaining diagonals vanish: the block must be zero.
            return active
                .iter()
                .all(|&i| active.iter().all(|&j| a[i][j].is_zero()));
        };
        active.retain(|&i| i != p);
        let piv = a[p][p].clone();
        for &i in &active {
            if a[i][p].is_zero() {
                continue;
            }
            let f = &a[i][p] / &piv;
            for &j in &active {
                let delta = &f * &a[p][j];
                a[i][j] -= delta;
            }
        }
    }
    true
}

/// One factor `H_degree(G_variable)` of a product; `variable` is zero-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Node {
    pub variable: usize,
    pub degree: u32,
}

impl Node {
    pub fn new(variable: usize, degree: u32) -> Self {
        Node { variable, degree }
    }
}

#[derive(Clone, Debug)]
pub struct MomentQuery {
    pub nodes: Vec<Node>,
    pub correlation: CorrelationMatrix,
}

impl MomentQuery {
    pub fn new(nodes: Vec<Node>, correlation: CorrelationMatrix) -> Result<Self> {
        if let Some(bad) = nodes.iter().find(|n| n.variable >= correlation.dim()) {
            return Err(Error::input(format!(
                "variable id {} is outside 1..={}",
                bad.variable + 1,
                correlation.dim()
            )));
        }
        Ok(MomentQuery { nodes, correlation })
    }

    pub fn total_degree(&self) -> usize {
        self.nodes.iter().map(|n| n.degree as usize).sum()
    }
}

/// Memoized flat-edge-free matching sum over a fixed set of nodes.
///
/// `weights[a * size + b]` is the weight of an edge between a leg of node `a`
/// and a leg of node `b` (`a != b`). The memo is keyed on the vector of
/// remaining legs per node and is reused across [`DiagramSum::eval`] calls,
/// which is what makes whole series of moments over the same nodes cheap.
pub struct DiagramSum<T> {
    size: usize,
    weights: Vec<T>,
    memo: HashMap<Vec<u32>, T>,
}

impl<T> DiagramSum<T>
where
    T: Num + Clone + FromPrimitive,
{
    pub fn new(size: usize, weights: Vec<T>) -> Self {
        assert_eq!(weights.len(), size * size);
        DiagramSum {
            size,
            weights,
            memo: HashMap::new(),
        }
    }

    /// Weighted count of flat-edge-free perfect matchings with `degrees[a]`
    /// legs on node `a`.
    pub fn eval(&mut self, degrees: &[u32]) -> T {
        assert_eq!(degrees.len(), self.size);
        let total: u32 = degrees.iter().sum();
        if total % 2 == 1 {
            return T::zero();
        }
        let mut state = degrees.to_vec();
        self.go(&mut state)
    }

    fn go(&mut self, state: &mut Vec<u32>) -> T {
        let Some(a) = state.iter().position(|&r| r > 0) else {
            return T::one();
        };
        if let Some(v) = self.memo.get(state.as_slice()) {
            return v.clone();
        }
        let key = state.clone();
        state[a] -= 1;
        let mut acc = T::zero();
        for b in a + 1..self.size {
            let legs = state[b];
            if legs == 0 {
                continue;
            }
            let w = self.weights[a * self.size + b].clone();
            if w.is_zero() {
                continue;
            }
            state[b] -= 1;
            let sub = self.go(state);
            state[b] += 1;
            acc = acc + w * T::from_u32(legs).expect("leg count") * sub;
        }
        state[a] += 1;
        self.memo.insert(key, acc.clone());
        acc
    }
}

fn check_cap(what: &'static str, requested: usize, cap: usize) -> Result<()> {
    if requested > cap {
        return Err(Error::Resource {
            what,
            requested,
            cap,
        });
    }
    Ok(())
}

/// `E[∏_a H_{p_a}(G_{v_a})]` with the default cap of [`MATCHING_CAP`] legs.
pub fn hermite_product_moment(q: &MomentQuery) -> Result<ExactScalar> {
    hermite_product_moment_with_cap(q, MATCHING_CAP)
}

pub fn hermite_product_moment_with_cap(q: &MomentQuery, cap: usize) -> Result<ExactScalar> {
    check_cap("hermite product legs", q.total_degree(), cap.min(MATCHING_CAP))?;
    let size = q.nodes.len();
    let mut weights = Vec::with_capacity(size * size);
    for a in &q.nodes {
        for b in &q.nodes {
            weights.push(q.correlation.get(a.variable, b.variable).clone());
        }
    }
    let degrees: Vec<u32> = q.nodes.iter().map(|n| n.degree).collect();
    Ok(DiagramSum::new(size, weights).eval(&degrees))
}

/// Float mirror of [`hermite_product_moment`] for real-valued correlations
/// (`correlation` is row-major `dim × dim`).
pub fn hermite_product_moment_f64(nodes: &[Node], dim: usize, correlation: &[f64]) -> Result<f64> {
    let total: usize = nodes.iter().map(|n| n.degree as usize).sum();
    check_cap("hermite product legs", total, MATCHING_CAP)?;
    if let Some(bad) = nodes.iter().find(|n| n.variable >= dim) {
        return Err(Error::input(format!("variable id {} out of range", bad.variable + 1)));
    }
    let size = nodes.len();
    let mut weights = Vec::with_capacity(size * size);
    for a in nodes {
        for b in nodes {
            weights.push(correlation[a.variable * dim + b.variable]);
        }
    }
    let degrees: Vec<u32> = nodes.iter().map(|n| n.degree).collect();
    Ok(DiagramSum::new(size, weights).eval(&degrees))
}

/// `E[H_{p_1}(G_1)² ··· H_{p_d}(G_d)²]`.
pub fn squared_hermite_moment(p: &[u32], corr: &CorrelationMatrix) -> Result<ExactScalar> {
    squared_hermite_moment_with_cap(p, corr, MATCHING_CAP)
}

pub fn squared_hermite_moment_with_cap(
    p: &[u32],
    corr: &CorrelationMatrix,
    cap: usize,
) -> Result<ExactScalar> {
    if p.len() != corr.dim() {
        return Err(Error::input(format!(
            "{} degrees given for a {}-dimensional correlation",
            p.len(),
            corr.dim()
        )));
    }
    let nodes = p
        .iter()
        .enumerate()
        .flat_map(|(i, &deg)| [Node::new(i, deg), Node::new(i, deg)])
        .collect();
    hermite_product_moment_with_cap(&MomentQuery::new(nodes, corr.clone())?, cap)
}

/// `E[∏ H_{k_i}(X_i)²]` for a fixed correlation, expanding each
/// `H_k² = Σ_s C(k,s)² s! H_{2k-2s}` and evaluating the one-node-per-variable
/// diagram sums with a memo shared across calls.
pub struct SquaredMoments<T> {
    dim: usize,
    diagrams: DiagramSum<T>,
    coeffs: Vec<Vec<T>>,
}

impl<T> SquaredMoments<T>
where
    T: Num + Clone + FromPrimitive,
{
    /// `correlation` is row-major `dim × dim`.
    pub fn new(dim: usize, correlation: Vec<T>) -> Self {
        SquaredMoments {
            dim,
            diagrams: DiagramSum::new(dim, correlation),
            coeffs: Vec::new(),
        }
    }

    /// `C(k,s)² s!` for `s = 0..=k`.
    fn linearization(&mut self, k: u32) -> &[T] {
        while self.coeffs.len() <= k as usize {
            let k = self.coeffs.len() as u64;
            let mut row = Vec::with_capacity(k as usize + 1);
            let mut c = T::one();
            for s in 0..=k {
                row.push(c.clone());
                if s < k {
                    c = c * T::from_u64((k - s) * (k - s)).unwrap() / T::from_u64(s + 1).unwrap();
                }
            }
            self.coeffs.push(row);
        }
        &self.coeffs[k as usize]
    }

    pub fn eval(&mut self, ks: &[u32]) -> T {
        assert_eq!(ks.len(), self.dim);
        let rows: Vec<Vec<T>> = ks.iter().map(|&k| self.linearization(k).to_vec()).collect();
        let mut s = vec![0u32; self.dim];
        let mut degrees = vec![0u32; self.dim];
        let mut total = T::zero();
        loop {
            let mut w = T::one();
            for i in 0..self.dim {
                degrees[i] = 2 * (ks[i] - s[i]);
                w = w * rows[i][s[i] as usize].clone();
            }
            let m = self.diagrams.eval(&degrees);
            if !m.is_zero() {
                total = total + w * m;
            }
            // odometer over s_i in 0..=k_i
            let mut i = 0;
            loop {
                if i == self.dim {
                    return total;
                }
                if s[i] < ks[i] {
                    s[i] += 1;
                    break;
                }
                s[i] = 0;
                i += 1;
            }
        }
    }
}

/// [`squared_hermite_moment`] through the linearized one-node-per-variable
/// route. Its cost is polynomial in the degrees, so it carries no leg cap.
pub fn squared_hermite_moment_linearized(p: &[u32], corr: &CorrelationMatrix) -> Result<ExactScalar> {
    if p.len() != corr.dim() {
        return Err(Error::input(format!(
            "{} degrees given for a {}-dimensional correlation",
            p.len(),
            corr.dim()
        )));
    }
    Ok(SquaredMoments::new(corr.dim(), corr.entries().to_vec()).eval(p))
}

/// `E[∏ G_i^{m_i}]` by summing over all pairings of the raw legs
/// (self-pairings allowed).
pub fn isserlis_moment(exponents: &[u32], corr: &CorrelationMatrix) -> Result<ExactScalar> {
    if exponents.len() != corr.dim() {
        return Err(Error::input(format!(
            "{} exponents given for a {}-dimensional correlation",
            exponents.len(),
            corr.dim()
        )));
    }
    let total: usize = exponents.iter().map(|&m| m as usize).sum();
    check_cap("isserlis legs", total, MATCHING_CAP)?;
    if total % 2 == 1 {
        return Ok(ExactScalar::zero());
    }
    let mut memo = HashMap::new();
    let mut state = exponents.to_vec();
    Ok(pairings(corr, &mut state, &mut memo))
}

fn pairings(
    corr: &CorrelationMatrix,
    state: &mut Vec<u32>,
    memo: &mut HashMap<Vec<u32>, ExactScalar>,
) -> ExactScalar {
    let Some(a) = state.iter().position(|&m| m > 0) else {
        return int(1);
    };
    if let Some(v) = memo.get(state.as_slice()) {
        return v.clone();
    }
    let key = state.clone();
    state[a] -= 1;
    let mut acc = ExactScalar::zero();
    for b in a..state.len() {
        let legs = state[b];
        if legs == 0 || corr.get(a, b).is_zero() {
            continue;
        }
        state[b] -= 1;
        let sub = pairings(corr, state, memo);
        state[b] += 1;
        acc += corr.get(a, b) * int(legs as i64) * sub;
    }
    state[a] += 1;
    memo.insert(key, acc.clone());
    acc
}

pub type ExactComplex = Complex<ExactScalar>;

/// Vectors `a_1, …, a_d` defining `G_k = ⟨a_k, Z⟩` with `Z = X + iY`,
/// `X, Y` independent standard Gaussian vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVectorSet {
    dim: usize,
    vectors: Vec<Vec<ExactComplex>>,
}

impl ComplexVectorSet {
    pub fn new(vectors: Vec<Vec<ExactComplex>>) -> Result<Self> {
        let Some(first) = vectors.first() else {
            return Err(Error::input("at least one complex vector is required"));
        };
        let dim = first.len();
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::input("complex vectors must share a dimension"));
            }
            if v.iter().all(|z| z.is_zero()) {
                return Err(Error::input(format!("complex vector {} is zero", i + 1)));
            }
        }
        Ok(ComplexVectorSet { dim, vectors })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vectors(&self) -> &[Vec<ExactComplex>] {
        &self.vectors
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        ComplexVectorSet {
            dim: self.dim,
            vectors: indices.iter().map(|&i| self.vectors[i].clone()).collect(),
        }
    }

    /// `E[G_i conj(G_j)] = 2 Σ_k a_{ik} conj(a_{jk})`.
    pub fn covariance(&self, i: usize, j: usize) -> ExactComplex {
        let s = self.vectors[i]
            .iter()
            .zip(&self.vectors[j])
            .fold(ExactComplex::zero(), |acc, (x, y)| acc + x * y.conj());
        s * ExactComplex::from(int(2))
    }

    pub fn canonical(&self) -> String {
        self.vectors
            .iter()
            .map(|v| {
                v.iter()
                    .map(|z| format!("{}{:+}i", format_scalar(&z.re), ImPart(&z.im)))
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join(";")
    }
}

struct ImPart<'a>(&'a ExactScalar);

impl std::fmt::Display for ImPart<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = format_scalar(self.0);
        if f.sign_plus() && !self.0.is_negative() {
            write!(f, "+{s}")
        } else {
            write!(f, "{s}")
        }
    }
}

/// Permanent by Ryser's inclusion–exclusion over column subsets, visiting
/// subsets in Gray-code order so each step updates one column.
pub fn permanent<T>(m: &[Vec<T>]) -> T
where
    T: Num + Clone,
{
    let n = m.len();
    if n == 0 {
        return T::one();
    }
    assert!(n < 63, "permanent too large");
    let mut rowsum = vec![T::zero(); n];
    let mut total = T::zero();
    let mut gray: u64 = 0;
    for k in 1u64..(1u64 << n) {
        let j = k.trailing_zeros() as usize;
        gray ^= 1 << j;
        let adding = gray & (1 << j) != 0;
        for (r, row) in m.iter().enumerate() {
            rowsum[r] = if adding {
                rowsum[r].clone() + row[j].clone()
            } else {
                rowsum[r].clone() - row[j].clone()
            };
        }
        let prod = rowsum.iter().cloned().fold(T::one(), |acc, x| acc * x);
        if (n - gray.count_ones() as usize) % 2 == 0 {
            total = total + prod;
        } else {
            total = total - prod;
        }
    }
    total
}

/// `E[|G_1^{p_1} ··· G_d^{p_d}|²]` as the permanent of the `m × m` matrix
/// (`m = Σ p_i`) of sesquilinear covariances with row/column `i` repeated
/// `p_i` times.
pub fn complex_moment(p: &[u32], a: &ComplexVectorSet) -> Result<ExactScalar> {
    if p.len() != a.len() {
        return Err(Error::input(format!(
            "{} exponents given for {} complex variables",
            p.len(),
            a.len()
        )));
    }
    let m: usize = p.iter().map(|&x| x as usize).sum();
    check_cap("permanent size", m, PERMANENT_CAP)?;
    let index: Vec<usize> = p
        .iter()
        .enumerate()
        .flat_map(|(i, &k)| std::iter::repeat(i).take(k as usize))
        .collect();
    let cov: Vec<Vec<ExactComplex>> = (0..a.len())
        .map(|i| (0..a.len()).map(|j| a.covariance(i, j)).collect())
        .collect();
    let matrix: Vec<Vec<ExactComplex>> = index
        .iter()
        .map(|&i| index.iter().map(|&j| cov[i][j].clone()).collect())
        .collect();
    let value = permanent(&matrix);
    if !value.im.is_zero() {
        return Err(Error::internal(format!(
            "complex moment has non-zero imaginary part {}",
            value.im
        )));
    }
    Ok(value.re)
}

/// `E[F²G²] - E[F²]E[G²]`.
pub fn cov_of_squares(f: &ChaosElement, g: &ChaosElement) -> Result<ExactScalar> {
    let joint = product_expectation(&[f.clone(), f.clone(), g.clone(), g.clone()])?;
    let ff = product_expectation(&[f.clone(), f.clone()])?;
    let gg = product_expectation(&[g.clone(), g.clone()])?;
    Ok(joint - ff * gg)
}
