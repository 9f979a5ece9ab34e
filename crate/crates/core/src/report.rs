//! Verification reports and campaign summaries.
//!
//! JSON schema of one report:
//!
//! ```text
//! {"inequality_id": str, "lhs": str, "rhs": str, "margin": str,
//!  "status": "holds"|"equality"|"violated", "arithmetic": "exact"|"float",
//!  "inputs_digest": str, "seed": int|null}
//! ```
//!
//! Exact values are written as `num/den` (or `num`), floats with Rust's
//! shortest round-trip `Debug` form, which always contains `.`, `e`, `inf`
//! or `NaN`.

use std::fmt;

use num::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Result;
use crate::scalar::{format_scalar, parse_scalar, to_f64, ExactScalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityId {
    /// `∫∏F_i² ≥ ∏∫F_i²` for pure eigenfunctions.
    MainProduct,
    /// `E[∏H_{p_i}(G_i)²] ≥ ∏p_i!`.
    HermiteProduct,
    /// First-chaos averaged improvement of Frenkel's inequality.
    FrenkelImproved,
    /// `E[∏G_i²] ≥ ∏E[G_i²]`.
    Frenkel,
    /// Subset-averaged fourth-moment inequality.
    AveragedFourth,
    /// Conjectured `E[∏G_i^{2m}] ≥ ∏E[G_i^{2m}]`.
    GaussianProductConjecture,
    /// `E|∏G_i^{p_i}|² ≥ ∏E|G_i^{p_i}|²` for complex Gaussians.
    ComplexProduct,
    /// `φ` non-increasing in `t` between consecutive grid points.
    PhiMonotone,
    /// `φ'(t) ≤ 0` via the generator functional.
    NegatifSign,
    /// Optimizer probe of `S · bound ≥ ∏S_i` (lower bounds only).
    KillPinascoProbe,
    /// `sup_{S^{n-1}} |F| ≤ sqrt(∫F²dγ / k!)`.
    SupBound,
    /// Real polarization `sup ∏|⟨v,x_i⟩| ≥ d^{-d/2}`, known for `d ≤ 5`.
    RealPolarizationKnown,
    /// Real polarization for `d > 5`, open.
    RealPolarizationOpen,
    /// `det S ≤ ∏S_ii`.
    ClassicalHadamard,
    /// Truncated Hermite series bounds `det S` from above.
    RefinedHadamard,
}

impl InequalityId {
    /// Proven statements: a violation is a defect. Everything else is a probe
    /// whose violations are findings.
    pub fn is_proven(self) -> bool {
        !matches!(
            self,
            InequalityId::GaussianProductConjecture
                | InequalityId::RealPolarizationOpen
                | InequalityId::KillPinascoProbe
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            InequalityId::MainProduct => "main_product",
            InequalityId::HermiteProduct => "hermite_product",
            InequalityId::FrenkelImproved => "frenkel_improved",
            InequalityId::Frenkel => "frenkel",
            InequalityId::AveragedFourth => "averaged_fourth",
            InequalityId::GaussianProductConjecture => "gaussian_product_conjecture",
            InequalityId::ComplexProduct => "complex_product",
            InequalityId::PhiMonotone => "phi_monotone",
            InequalityId::NegatifSign => "negatif_sign",
            InequalityId::KillPinascoProbe => "kill_pinasco_probe",
            InequalityId::SupBound => "sup_bound",
            InequalityId::RealPolarizationKnown => "real_polarization_known",
            InequalityId::RealPolarizationOpen => "real_polarization_open",
            InequalityId::ClassicalHadamard => "classical_hadamard",
            InequalityId::RefinedHadamard => "refined_hadamard",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Holds,
    Equality,
    Violated,
}

impl Status {
    pub fn from_exact(margin: &ExactScalar) -> Self {
        if margin.is_zero() {
            Status::Equality
        } else if margin.is_positive() {
            Status::Holds
        } else {
            Status::Violated
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Holds => "holds",
            Status::Equality => "equality",
            Status::Violated => "violated",
        }
    }

    /// `|margin| <= tol` counts as equality.
    pub fn from_float(margin: f64, tol: f64) -> Self {
        if margin.is_nan() || margin < -tol {
            Status::Violated
        } else if margin <= tol {
            Status::Equality
        } else {
            Status::Holds
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arithmetic {
    Exact,
    Float,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Exact(ExactScalar),
    Float(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(x) => to_f64(x),
            Value::Float(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&ExactScalar> {
        match self {
            Value::Exact(x) => Some(x),
            Value::Float(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(x) => f.write_str(&format_scalar(x)),
            Value::Float(x) => write!(f, "{x:?}"),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let looks_float = s.contains(['.', 'e', 'E']) || s.contains("inf") || s.contains("NaN");
        if looks_float {
            s.parse::<f64>()
                .map(Value::Float)
                .map_err(serde::de::Error::custom)
        } else {
            parse_scalar(&s)
                .map(Value::Exact)
                .map_err(serde::de::Error::custom)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationReport {
    pub inequality_id: InequalityId,
    pub lhs: Value,
    pub rhs: Value,
    pub margin: Value,
    pub status: Status,
    pub arithmetic: Arithmetic,
    pub inputs_digest: String,
    pub seed: Option<u64>,
}

impl VerificationReport {
    pub fn exact(id: InequalityId, lhs: ExactScalar, rhs: ExactScalar, inputs_digest: String) -> Self {
        let margin = &lhs - &rhs;
        VerificationReport {
            inequality_id: id,
            status: Status::from_exact(&margin),
            lhs: Value::Exact(lhs),
            rhs: Value::Exact(rhs),
            margin: Value::Exact(margin),
            arithmetic: Arithmetic::Exact,
            inputs_digest,
            seed: None,
        }
    }

    /// Float comparison with absolute tolerance `tol` on the margin.
    pub fn float(id: InequalityId, lhs: f64, rhs: f64, tol: f64, inputs_digest: String) -> Self {
        let margin = lhs - rhs;
        VerificationReport {
            inequality_id: id,
            status: Status::from_float(margin, tol),
            lhs: Value::Float(lhs),
            rhs: Value::Float(rhs),
            margin: Value::Float(margin),
            arithmetic: Arithmetic::Float,
            inputs_digest,
            seed: None,
        }
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn is_violation(&self) -> bool {
        self.status == Status::Violated && self.inequality_id.is_proven()
    }

    pub fn is_finding(&self) -> bool {
        self.status == Status::Violated && !self.inequality_id.is_proven()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

pub const CSV_HEADER: [&str; 8] = [
    "inequality_id",
    "lhs",
    "rhs",
    "margin",
    "status",
    "arithmetic",
    "inputs_digest",
    "seed",
];

/// One CSV row per report, with a header.
pub fn reports_to_csv(reports: &[VerificationReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| crate::error::Error::internal(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in reports {
        let arithmetic = serde_json::to_value(r.arithmetic)?;
        w.write_record([
            r.inequality_id.as_str().to_string(),
            r.lhs.to_string(),
            r.rhs.to_string(),
            r.margin.to_string(),
            r.status.as_str().to_string(),
            arithmetic.as_str().unwrap_or_default().to_string(),
            r.inputs_digest.clone(),
            r.seed.map(|s| s.to_string()).unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| crate::error::Error::internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| crate::error::Error::internal(e.to_string()))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub instances: usize,
    pub holds: usize,
    pub equalities: usize,
    /// Violations of proven inequalities only.
    pub violations: usize,
    /// Violated probes of open statements, sorted by `inputs_digest`.
    pub findings: Vec<VerificationReport>,
}

impl CampaignSummary {
    pub fn from_reports(reports: &[VerificationReport]) -> Self {
        let mut s = CampaignSummary {
            instances: reports.len(),
            ..Default::default()
        };
        for r in reports {
            match r.status {
                Status::Holds => s.holds += 1,
                Status::Equality => s.equalities += 1,
                Status::Violated if r.inequality_id.is_proven() => s.violations += 1,
                Status::Violated => s.findings.push(r.clone()),
            }
        }
        s.findings.sort_by(|a, b| a.inputs_digest.cmp(&b.inputs_digest));
        s
    }
}
