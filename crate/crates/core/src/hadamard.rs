//! Hermite-series refinement of Hadamard's determinant inequality.
//!
//! For symmetric `S ≻ 0` with `Z = diag(S) < I` and `Z + S < 2I`,
//!
//! ```text
//! (det S)^{-1/2} = Σ_k E[∏ H_{k_i}(X_i)²] / ∏ k_i! · ∏ sqrt(S_ii) (1 - S_ii)^{k_i}
//! ```
//!
//! where `X` is centered Gaussian with correlation
//! `Σ = I - ½ (I - Z)^{-1/2} (S - Z) (I - Z)^{-1/2}`. Every term is
//! non-negative, so each truncation gives an upper bound on `det S`.

use std::fmt;

use nalgebra::DMatrix;
use num::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::moments::SquaredMoments;
use crate::report::{InequalityId, VerificationReport};
use crate::scalar::{format_scalar, parse_scalar, to_f64, ExactScalar};

/// Upper limit on the number of multi-orders in one series evaluation.
pub const SERIES_TERM_CAP: usize = 2_000_000;

/// Symmetric positive definite matrix with float entries, plus the exact
/// rational entries when the input was given exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct SpdMatrix {
    m: DMatrix<f64>,
    exact: Option<Vec<ExactScalar>>,
}

fn symmetric_f64(m: &DMatrix<f64>) -> bool {
    let d = m.nrows();
    (0..d).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= 1e-12 * m[(i, j)].abs().max(1.0)))
}

impl SpdMatrix {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let m = square(rows)?;
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::input("matrix entries must be finite"));
        }
        if !symmetric_f64(&m) {
            return Err(Error::input("matrix is not symmetric"));
        }
        Self::checked(m, None)
    }

    pub fn from_exact(rows: &[Vec<ExactScalar>]) -> Result<Self> {
        let d = rows.len();
        if d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(Error::input("matrix must be square and non-empty"));
        }
        for i in 0..d {
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::input("matrix is not symmetric"));
                }
            }
        }
        let exact: Vec<ExactScalar> = rows.iter().flatten().cloned().collect();
        let m = DMatrix::from_row_iterator(d, d, exact.iter().map(to_f64));
        Self::checked(m, Some(exact))
    }

    fn checked(m: DMatrix<f64>, exact: Option<Vec<ExactScalar>>) -> Result<Self> {
        if m.clone().cholesky().is_none() {
            return Err(Error::input("matrix is not positive definite"));
        }
        Ok(SpdMatrix { m, exact })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn exact_entries(&self) -> Option<&[ExactScalar]> {
        self.exact.as_deref()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.m[(i, i)]).collect()
    }

    pub fn det(&self) -> f64 {
        let l = self.m.clone().cholesky().expect("checked on construction");
        l.l().diagonal().iter().map(|x| x * x).product()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::input("scale factor must be positive"));
        }
        Self::checked(&self.m * c, None)
    }

    pub fn is_diagonal(&self) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| i == j || self.m[(i, j)] == 0.0))
    }

    /// Row-major whitespace-separated text, or a JSON array of rows.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.starts_with('[') {
            let rows: Vec<Vec<f64>> = serde_json::from_str(t)?;
            return Self::new(&rows);
        }
        let rows: Vec<Vec<ExactScalar>> = t
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(|l| l.split_whitespace().map(parse_scalar).collect())
            .collect::<Result<_>>()?;
        Self::from_exact(&rows)
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Vec<f64>> = self.m.row_iter().map(|r| r.iter().copied().collect()).collect();
        serde_json::to_string(&rows).expect("finite floats serialize")
    }
}

fn square(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let d = rows.len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(Error::input("matrix must be square and non-empty"));
    }
    Ok(DMatrix::from_row_iterator(d, d, rows.iter().flatten().copied()))
}

/// Row-major text, exact entries when available.
impl fmt::Display for SpdMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.dim();
        for i in 0..d {
            let row: Vec<String> = (0..d)
                .map(|j| match &self.exact {
                    Some(e) => format_scalar(&e[i * d + j]),
                    None => format!("{:?}", self.m[(i, j)]),
                })
                .collect();
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "condition")]
pub enum Admissibility {
    Admissible,
    /// Some `S_ii >= 1`.
    DiagonalTooLarge { index: usize, value: f64 },
    /// `λ_max(Z + S) >= 2`.
    SumTooLarge { lambda_max: f64 },
}

impl Admissibility {
    pub fn is_admissible(&self) -> bool {
        matches!(self, Admissibility::Admissible)
    }
}

impl fmt::Display for Admissibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Admissibility::Admissible => write!(f, "admissible"),
            Admissibility::DiagonalTooLarge { index, value } => {
                write!(f, "diagonal entry S_{0}{0} = {value} is not < 1", index + 1)
            }
            Admissibility::SumTooLarge { lambda_max } => {
                write!(f, "largest eigenvalue of diag(S) + S is {lambda_max}, not < 2")
            }
        }
    }
}

fn lambda_max_z_plus_s(s: &SpdMatrix) -> f64 {
    let mut zs = s.m.clone();
    for i in 0..s.dim() {
        zs[(i, i)] *= 2.0;
    }
    zs.symmetric_eigenvalues().max()
}

/// Positive definiteness is guaranteed by [`SpdMatrix`]; this checks
/// `S_ii < 1` and `λ_max(Z + S) < 2`.
pub fn admissible(s: &SpdMatrix) -> Admissibility {
    if let Some((index, &value)) = s.diagonal().iter().enumerate().find(|(_, &v)| v >= 1.0) {
        return Admissibility::DiagonalTooLarge { index, value };
    }
    let lambda_max = lambda_max_z_plus_s(s);
    if lambda_max >= 2.0 {
        return Admissibility::SumTooLarge { lambda_max };
    }
    Admissibility::Admissible
}

/// `c = 0.9 · min(1 / max S_ii, 2 / λ_max(Z + S))` and `c S`.
pub fn rescale(s: &SpdMatrix) -> Result<(f64, SpdMatrix)> {
    let max_diag = s.diagonal().into_iter().fold(f64::MIN, f64::max);
    let c = 0.9 * (1.0 / max_diag).min(2.0 / lambda_max_z_plus_s(s));
    let scaled = s.scaled(c)?;
    match admissible(&scaled) {
        Admissibility::Admissible => Ok((c, scaled)),
        other => Err(Error::internal(format!("rescaled matrix still inadmissible: {other}"))),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HadamardDecomposition {
    /// Diagonal of `S`.
    pub z: Vec<f64>,
    pub sigma: DMatrix<f64>,
    /// `D_ii = (1 - S_ii) / (2 - S_ii)`.
    pub d: Vec<f64>,
}

fn require_admissible(s: &SpdMatrix) -> Result<()> {
    match admissible(s) {
        Admissibility::Admissible => Ok(()),
        other => Err(Error::input(format!("matrix is not admissible: {other}"))),
    }
}

pub fn decompose(s: &SpdMatrix) -> Result<HadamardDecomposition> {
    require_admissible(s)?;
    let n = s.dim();
    let z = s.diagonal();
    let inv_root: Vec<f64> = z.iter().map(|v| 1.0 / (1.0 - v).sqrt()).collect();
    let sigma = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            -0.5 * inv_root[i] * s.get(i, j) * inv_root[j]
        }
    });
    if sigma.clone().cholesky().is_none() {
        return Err(Error::internal("correlation matrix of the decomposition is not positive definite"));
    }
    let d = z.iter().map(|v| (1.0 - v) / (2.0 - v)).collect();
    Ok(HadamardDecomposition { z, sigma, d })
}

/// Multi-orders with `Σ k_i = total`, lexicographically.
fn compositions(d: usize, total: u32) -> Vec<Vec<u32>> {
    fn go(d: usize, rest: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() + 1 == d {
            cur.push(rest);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=rest {
            cur.push(k);
            go(d, rest - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(d, total, &mut Vec::with_capacity(d), &mut out);
    out
}

fn count_terms(d: usize, order: u32) -> usize {
    // C(order + d, d), saturating
    let mut c: u128 = 1;
    for i in 1..=d as u128 {
        c = c * (order as u128 + i) / i;
        if c > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    c as usize
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesResult {
    pub order: u32,
    /// `order_subtotals[n]` sums the terms with `Σ k_i = n`.
    pub order_subtotals: Vec<f64>,
    /// `partial_sums[n]` sums the terms with `Σ k_i <= n`.
    pub partial_sums: Vec<f64>,
    /// Partial sums with every moment replaced by its lower bound `∏ k_i!`;
    /// these converge to `∏ S_ii^{-1/2}`.
    pub classical_partial_sums: Vec<f64>,
}

impl SeriesResult {
    pub fn value(&self) -> f64 {
        *self.partial_sums.last().expect("order 0 is always present")
    }

    /// `(partial sum)^{-2}`, an upper bound on `det S`.
    pub fn det_upper_bound(&self) -> f64 {
        self.value().powi(-2)
    }
}

/// Truncates at total degree `Σ k_i <= order`. Terms inside one order are
/// added in lexicographic order of `(k_1, …, k_d)`.
pub fn hadamard_series(s: &SpdMatrix, order: u32) -> Result<SeriesResult> {
    let dec = decompose(s)?;
    let d = s.dim();
    let terms = count_terms(d, order);
    if terms > SERIES_TERM_CAP {
        return Err(Error::Resource {
            what: "hadamard series multi-orders",
            requested: terms,
            cap: SERIES_TERM_CAP,
        });
    }
    let prefactor: f64 = dec.z.iter().map(|v| v.sqrt()).product();
    let ratio: Vec<f64> = dec.z.iter().map(|v| 1.0 - v).collect();
    // 1/k! and (1 - S_ii)^k tables
    let inv_fact: Vec<f64> = std::iter::once(1.0)
        .chain((1..=order).scan(1.0, |acc, k| {
            *acc /= k as f64;
            Some(*acc)
        }))
        .collect();
    let mut moments = SquaredMoments::new(d, dec.sigma.transpose().iter().copied().collect());

    let mut order_subtotals = Vec::with_capacity(order as usize + 1);
    let mut classical_subtotals = Vec::with_capacity(order as usize + 1);
    for n in 0..=order {
        let (mut sub, mut classical) = (0.0, 0.0);
        for ks in compositions(d, n) {
            let geometric: f64 = ks.iter().zip(&ratio).map(|(&k, r)| r.powi(k as i32)).product();
            let norm: f64 = ks.iter().map(|&k| inv_fact[k as usize]).product();
            sub += moments.eval(&ks) * norm * geometric;
            classical += geometric;
        }
        order_subtotals.push(prefactor * sub);
        classical_subtotals.push(prefactor * classical);
    }
    let cumulative = |v: &[f64]| {
        v.iter()
            .scan(0.0, |acc, x| {
                *acc += x;
                Some(*acc)
            })
            .collect::<Vec<f64>>()
    };
    Ok(SeriesResult {
        order,
        partial_sums: cumulative(&order_subtotals),
        classical_partial_sums: cumulative(&classical_subtotals),
        order_subtotals,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClosedForm {
    /// `det(I - 2DΣ)^{-1/2} ∏ (2 - S_ii)^{-1/2}`.
    pub value: f64,
    /// `(det S)^{-1/2}` computed directly.
    pub direct: f64,
    pub det_i_minus_2d_sigma: f64,
    pub prod_two_minus_diag: f64,
}

/// Evaluates the Gaussian-integral form of `(det S)^{-1/2}` and checks it
/// against the direct determinant to `1e-12` relative.
pub fn closed_form(s: &SpdMatrix) -> Result<ClosedForm> {
    let dec = decompose(s)?;
    let n = s.dim();
    let mut m = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] -= 2.0 * dec.d[i] * dec.sigma[(i, j)];
        }
    }
    let det_m = m.determinant();
    let prod: f64 = dec.z.iter().map(|v| 2.0 - v).product();
    let value = (det_m * prod).powf(-0.5);
    let direct = s.det().powf(-0.5);
    let rel = (value - direct).abs() / direct;
    if !(rel <= 1e-12) {
        return Err(Error::internal(format!(
            "closed form {value} disagrees with (det S)^(-1/2) = {direct} (relative {rel:e})"
        )));
    }
    Ok(ClosedForm {
        value,
        direct,
        det_i_minus_2d_sigma: det_m,
        prod_two_minus_diag: prod,
    })
}

/// `sup_k H_k(x)² e^{-x²/2} / k!` is at most this squared (Cramér's bound).
pub const CRAMER_CONSTANT: f64 = 1.086435;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MehlerCheck {
    pub partial_sum: f64,
    pub closed_form: f64,
    /// Bound on the omitted terms `k > N`.
    pub tail_bound: f64,
}

impl MehlerCheck {
    pub fn within_bound(&self) -> bool {
        let err = self.closed_form - self.partial_sum;
        err >= -1e-12 * self.closed_form && err <= self.tail_bound + 1e-12 * self.closed_form
    }
}

/// `Σ_{k≤N} H_k(x)² z^k / k!` against `(1 - z²)^{-1/2} exp(z x² / (1 + z))`.
pub fn mehler_1d_check(z: f64, x: f64, order: u32) -> Result<MehlerCheck> {
    if !(z > 0.0 && z < 1.0) {
        return Err(Error::input("z must lie in (0, 1)"));
    }
    if !x.is_finite() {
        return Err(Error::input("x must be finite"));
    }
    // normalized h_k = H_k / sqrt(k!)
    let (mut prev, mut cur) = (0.0, 1.0);
    let mut zk = 1.0;
    let mut partial = 0.0;
    for k in 0..=order {
        partial += cur * cur * zk;
        let next = (x * cur - (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
        prev = cur;
        cur = next;
        zk *= z;
    }
    let closed_form = (1.0 - z * z).powf(-0.5) * (z * x * x / (1.0 + z)).exp();
    let tail_bound = CRAMER_CONSTANT.powi(2) * (x * x / 2.0).exp() * zk / (1.0 - z);
    Ok(MehlerCheck {
        partial_sum: partial,
        closed_form,
        tail_bound,
    })
}

/// `det S ≤ ∏ S_ii`; exact when the matrix came with exact entries.
pub fn classical_margin(s: &SpdMatrix) -> VerificationReport {
    let digest = s.to_string().replace('\n', ";");
    match s.exact_entries() {
        Some(e) => {
            let d = s.dim();
            let prod: ExactScalar = (0..d).map(|i| e[i * d + i].clone()).product();
            VerificationReport::exact(InequalityId::ClassicalHadamard, prod, exact_det(e, d), digest)
        }
        None => {
            let prod: f64 = s.diagonal().iter().product();
            VerificationReport::float(InequalityId::ClassicalHadamard, prod, s.det(), 1e-12 * prod.max(1.0), digest)
        }
    }
}

/// `(det S)^{-1/2} ≥ partial sum`, i.e. the truncated series never overshoots.
pub fn refined_report(s: &SpdMatrix, series: &SeriesResult) -> VerificationReport {
    let target = s.det().powf(-0.5);
    VerificationReport::float(
        InequalityId::RefinedHadamard,
        target,
        series.value(),
        1e-9 * target,
        format!("{} N={}", s.to_string().replace('\n', ";"), series.order),
    )
}

/// Determinant by Gaussian elimination over the rationals.
pub fn exact_det(entries: &[ExactScalar], d: usize) -> ExactScalar {
    let mut a = entries.to_vec();
    let mut det = ExactScalar::from_integer(1.into());
    for col in 0..d {
        let Some(p) = (col..d).find(|&r| !a[r * d + col].is_zero()) else {
            return ExactScalar::zero();
        };
        if p != col {
            for j in 0..d {
                a.swap(p * d + j, col * d + j);
            }
            det = -det;
        }
        let pivot = a[col * d + col].clone();
        det *= &pivot;
        for r in col + 1..d {
            let f = &a[r * d + col] / &pivot;
            if f.is_zero() {
                continue;
            }
            for j in col..d {
                let v = &f * &a[col * d + j];
                a[r * d + j] -= v;
            }
        }
    }
    det
}
