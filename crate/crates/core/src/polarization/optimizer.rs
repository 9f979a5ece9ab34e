//! Multi-start projected gradient ascent for `sup_{v ∈ S^{n-1}} ∏ |F_i(v)|`.
//!
//! Each restart ascends `Σ ln|F_i|` along the tangent projection of
//! `Σ ∇F_i / F_i`, with Armijo backtracking and renormalization after every
//! step. Every reported value is attained at a unit vector, so it is a lower
//! bound on the supremum and never an upper bound.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::bounds::new_bound;
use super::forms::{FloatForm, MultilinearForm};
use crate::error::{Error, Result};
use crate::hermite::factorial_f64;
use crate::random::{float_unit_vector, instance_rng};
use crate::report::{InequalityId, VerificationReport};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop once an accepted step is shorter than this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 64,
            max_iter: 500,
            tol: 1e-10,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerStatus {
    Converged,
    MaxIter,
    /// Stuck on a zero of some `F_i`.
    Stalled,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    pub objective: f64,
    pub step: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RestartSummary {
    pub index: usize,
    pub value: f64,
    pub status: OptimizerStatus,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupResult {
    /// `∏ |F_i(argmax)|`, a lower bound on the supremum.
    pub value: f64,
    pub argmax: Vec<f64>,
    pub best_restart: usize,
    /// `Stalled` only when every restart stalled.
    pub status: OptimizerStatus,
    pub restarts: Vec<RestartSummary>,
    /// Accepted steps of each restart, indexed by restart.
    #[serde(skip)]
    pub traces: Vec<Vec<TraceRow>>,
}

impl SupResult {
    pub fn best_trace(&self) -> &[TraceRow] {
        &self.traces[self.best_restart]
    }

    /// CSV with columns `iter,objective,step` for the best restart.
    pub fn trace_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in self.best_trace() {
            w.serialize(row).map_err(|e| Error::internal(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::internal(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::internal(e.to_string()))
    }
}

const PERTURBATION: f64 = 1e-6;
const MAX_PERTURBATIONS: usize = 32;
const ARMIJO: f64 = 1e-4;
const MAX_STEP: f64 = 1e3;

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

fn objective(forms: &[FloatForm], v: &[f64]) -> f64 {
    forms.iter().map(|f| f.eval(v).abs().ln()).sum()
}

fn product_value(forms: &[FloatForm], v: &[f64]) -> f64 {
    forms.iter().map(|f| f.eval(v).abs()).product()
}

/// Tangent part of `Σ ∇F_i(v) / F_i(v)` at a unit vector `v`.
fn tangent_gradient(forms: &[FloatForm], v: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; v.len()];
    for f in forms {
        f.add_gradient(v, 1.0 / f.eval(v), &mut g);
    }
    let radial: f64 = g.iter().zip(v).map(|(a, b)| a * b).sum();
    g.iter_mut().zip(v).for_each(|(a, b)| *a -= radial * b);
    g
}

fn perturb<R: Rng>(rng: &mut R, v: &mut [f64]) {
    let noise = float_unit_vector(rng, v.len());
    let radial: f64 = noise.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
    for (x, e) in v.iter_mut().zip(&noise) {
        *x += PERTURBATION * (e - radial * *x);
    }
    normalize(v);
}

struct Run {
    point: Vec<f64>,
    summary: RestartSummary,
    trace: Vec<TraceRow>,
}

fn run_restart(forms: &[FloatForm], cfg: &OptimizerConfig, index: usize) -> Run {
    let n = forms[0].dim();
    let mut rng = instance_rng(cfg.seed, index as u64);
    let mut v = float_unit_vector(&mut rng, n);
    let mut trace = Vec::new();
    let mut perturbations = 0;
    let mut alpha = 1.0;
    let mut status = OptimizerStatus::MaxIter;
    let mut iterations = 0;
    let mut obj = objective(forms, &v);

    for iter in 0..cfg.max_iter {
        iterations = iter + 1;
        if !obj.is_finite() {
            if perturbations == MAX_PERTURBATIONS {
                status = OptimizerStatus::Stalled;
                break;
            }
            perturbations += 1;
            perturb(&mut rng, &mut v);
            obj = objective(forms, &v);
            continue;
        }
        if trace.is_empty() {
            trace.push(TraceRow { iter, objective: obj, step: 0.0 });
        }
        let g = tangent_gradient(forms, &v);
        let g_norm_sq: f64 = g.iter().map(|x| x * x).sum();
        if !g_norm_sq.is_finite() || g_norm_sq.sqrt() < 1e-15 {
            status = OptimizerStatus::Converged;
            break;
        }
        let g_norm = g_norm_sq.sqrt();
        let accepted = loop {
            if alpha * g_norm < cfg.tol {
                break None;
            }
            let mut cand: Vec<f64> = v.iter().zip(&g).map(|(a, b)| a + alpha * b).collect();
            normalize(&mut cand);
            let cand_obj = objective(forms, &cand);
            if cand_obj >= obj + ARMIJO * alpha * g_norm_sq {
                break Some((cand, cand_obj));
            }
            alpha /= 2.0;
        };
        let Some((cand, cand_obj)) = accepted else {
            status = OptimizerStatus::Converged;
            break;
        };
        let step = v.iter().zip(&cand).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        v = cand;
        obj = cand_obj;
        trace.push(TraceRow { iter: iter + 1, objective: obj, step });
        if step < cfg.tol {
            status = OptimizerStatus::Converged;
            break;
        }
        alpha = (alpha * 2.0).min(MAX_STEP);
    }
    normalize(&mut v);
    Run {
        summary: RestartSummary {
            index,
            value: product_value(forms, &v),
            status,
            iterations,
        },
        point: v,
        trace,
    }
}

fn check_forms(forms: &[FloatForm], cfg: &OptimizerConfig) -> Result<()> {
    let Some(first) = forms.first() else {
        return Err(Error::input("at least one form is required"));
    };
    if first.dim() == 0 {
        return Err(Error::input("dimension must be >= 1"));
    }
    if forms.iter().any(|f| f.dim() != first.dim()) {
        return Err(Error::input("all forms must live on the same R^n"));
    }
    if forms.iter().any(|f| !(f.gamma_norm() > 0.0) || !f.gamma_norm().is_finite()) {
        return Err(Error::input("forms must be non-zero with finite coefficients"));
    }
    if cfg.restarts == 0 || !(cfg.tol > 0.0) {
        return Err(Error::input("need restarts >= 1 and tol > 0"));
    }
    Ok(())
}

/// Best of `cfg.restarts` independent ascents; ties go to the lowest restart
/// index, so the result does not depend on scheduling.
pub fn sup_product_on_sphere(forms: &[FloatForm], cfg: &OptimizerConfig) -> Result<SupResult> {
    check_forms(forms, cfg)?;
    let runs: Vec<Run> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| run_restart(forms, cfg, i))
        .collect();
    let best = runs
        .iter()
        .enumerate()
        .fold(0, |b, (i, r)| if r.summary.value > runs[b].summary.value { i } else { b });
    let status = if runs.iter().all(|r| r.summary.status == OptimizerStatus::Stalled) {
        OptimizerStatus::Stalled
    } else {
        runs[best].summary.status
    };
    Ok(SupResult {
        value: runs[best].summary.value,
        argmax: runs[best].point.clone(),
        best_restart: best,
        status,
        restarts: runs.iter().map(|r| r.summary).collect(),
        traces: runs.into_iter().map(|r| r.trace).collect(),
    })
}

fn float_digest(forms: &[FloatForm]) -> String {
    forms.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(" | ")
}

#[derive(Clone, Debug)]
pub struct KillPinascoOutcome {
    /// `S · new_bound ≥ ∏ S_i` with optimizer values; a probe only.
    pub probe: VerificationReport,
    /// `S_i ≤ sqrt(1/k_i!)` per form; a failure means an optimizer bug.
    pub caps: Vec<VerificationReport>,
    pub joint: SupResult,
    pub singles: Vec<SupResult>,
}

/// Normalizes every form to unit `γ`-norm, then compares the joint supremum
/// scaled by the chaos-moment constant against the product of the individual
/// suprema.
pub fn verify_killpinasco(forms: &[MultilinearForm], cfg: &OptimizerConfig) -> Result<KillPinascoOutcome> {
    let floats: Vec<FloatForm> = forms.iter().map(|f| f.to_float()).collect();
    check_forms(&floats, cfg)?;
    let normed: Vec<FloatForm> = floats.iter().map(FloatForm::normalized).collect();
    let digest = forms.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(" | ");
    let n = normed[0].dim() as u32;
    let ks: Vec<u32> = normed.iter().map(|f| f.degree() as u32).collect();
    let bound = new_bound(n, &ks)?.value();
    let joint = sup_product_on_sphere(&normed, cfg)?;
    let singles = normed
        .iter()
        .map(|f| sup_product_on_sphere(std::slice::from_ref(f), cfg))
        .collect::<Result<Vec<_>>>()?;
    let product: f64 = singles.iter().map(|s| s.value).product();
    let probe = VerificationReport::float(
        InequalityId::KillPinascoProbe,
        joint.value * bound,
        product,
        1e-9,
        digest.clone(),
    )
    .with_seed(Some(cfg.seed));
    let caps = normed
        .iter()
        .zip(&singles)
        .enumerate()
        .map(|(i, (f, s))| {
            VerificationReport::float(
                InequalityId::SupBound,
                (1.0 / factorial_f64(f.degree() as u32)).sqrt(),
                s.value,
                1e-9,
                format!("{digest} #{}", i + 1),
            )
            .with_seed(Some(cfg.seed))
        })
        .collect();
    Ok(KillPinascoOutcome {
        probe,
        caps,
        joint,
        singles,
    })
}

/// `sup_{S^{n-1}} |F| ≤ sqrt(∫F² dγ_n / k!)`, with the optimizer value on the
/// right-hand side.
pub fn verify_sup_bound(form: &MultilinearForm, cfg: &OptimizerConfig) -> Result<VerificationReport> {
    let f = form.to_float();
    let sup = sup_product_on_sphere(std::slice::from_ref(&f), cfg)?;
    let cap = (f.gamma_norm() / factorial_f64(f.degree() as u32)).sqrt();
    Ok(VerificationReport::float(InequalityId::SupBound, cap, sup.value, 1e-9, form.to_string()).with_seed(Some(cfg.seed)))
}

/// Checks `sup ∏ |⟨v, x_i⟩| ≥ d^{-d/2}` for unit vectors `x_i ∈ R^n`. The
/// statement is known for `d ≤ 5` and open beyond.
pub fn probe_real_polarization(vectors: &[Vec<f64>], cfg: &OptimizerConfig) -> Result<(VerificationReport, SupResult)> {
    if vectors.is_empty() {
        return Err(Error::input("at least one vector is required"));
    }
    let forms: Vec<FloatForm> = vectors.iter().map(|x| FloatForm::linear(x).normalized()).collect();
    check_forms(&forms, cfg)?;
    let d = vectors.len() as f64;
    let sup = sup_product_on_sphere(&forms, cfg)?;
    let id = if vectors.len() <= 5 {
        InequalityId::RealPolarizationKnown
    } else {
        InequalityId::RealPolarizationOpen
    };
    let report = VerificationReport::float(id, sup.value, d.powf(-d / 2.0), 1e-7, float_digest(&forms))
        .with_seed(Some(cfg.seed));
    Ok((report, sup))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Status;

    fn cfg(restarts: usize) -> OptimizerConfig {
        OptimizerConfig {
            restarts,
            ..OptimizerConfig::default()
        }
    }

    fn form(s: &str) -> MultilinearForm {
        s.parse().unwrap()
    }

    #[test]
    fn single_linear_form() {
        let x = [0.6, 0.0, -0.8];
        let r = sup_product_on_sphere(&[FloatForm::linear(&x)], &cfg(8)).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        let dot: f64 = r.argmax.iter().zip(&x).map(|(a, b)| a * b).sum();
        assert!((dot.abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthonormal_triple() {
        let forms: Vec<_> = (0..3)
            .map(|i| {
                let mut e = vec![0.0; 3];
                e[i] = 1.0;
                FloatForm::linear(&e)
            })
            .collect();
        let r = sup_product_on_sphere(&forms, &cfg(16)).unwrap();
        assert!((r.value - 3f64.powf(-1.5)).abs() < 1e-12, "{}", r.value);
        for c in &r.argmax {
            assert!((c.abs() - 1.0 / 3f64.sqrt()).abs() < 1e-6);
        }
    }

    #[test]
    fn product_of_two_coordinates() {
        let r = sup_product_on_sphere(&[form("2 2; 1,2 = 1").to_float()], &cfg(8)).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn result_is_feasible_and_ascent_is_monotone() {
        let forms = [
            form("4 2; 1,2 = 1; 2,3 = -1/2; 1,4 = 3/4").to_float(),
            form("4 2; 1,3 = 1; 3,4 = 1").to_float(),
            form("4 1; 1 = 1; 2 = 1; 4 = -1").to_float(),
        ];
        let r = sup_product_on_sphere(&forms, &cfg(16)).unwrap();
        let norm = r.argmax.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() <= 1e-12);
        let recomputed: f64 = forms.iter().map(|f| f.eval(&r.argmax).abs()).product();
        assert!((r.value - recomputed).abs() <= 1e-12 * recomputed);
        for t in &r.traces {
            assert!(t.windows(2).all(|w| w[1].objective >= w[0].objective));
        }
        assert!(!r.trace_csv().unwrap().is_empty());
    }

    #[test]
    fn deterministic_across_runs() {
        let forms = [form("3 2; 1,2 = 1; 2,3 = 2").to_float(), form("3 1; 1 = 1; 3 = 1").to_float()];
        let a = sup_product_on_sphere(&forms, &cfg(12)).unwrap();
        let b = sup_product_on_sphere(&forms, &cfg(12)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(sup_product_on_sphere(&[], &cfg(4)).is_err());
        let zero = FloatForm::new(2, 1, vec![]);
        assert!(sup_product_on_sphere(&[zero], &cfg(4)).is_err());
        let a = FloatForm::linear(&[1.0, 0.0]);
        let b = FloatForm::linear(&[1.0, 0.0, 0.0]);
        assert!(sup_product_on_sphere(&[a, b], &cfg(4)).is_err());
    }

    #[test]
    fn killpinasco_single_form() {
        let out = verify_killpinasco(&[form("2 2; 1,2 = 1")], &cfg(8)).unwrap();
        assert!((out.joint.value - 0.5).abs() < 1e-12);
        assert!((out.probe.lhs.to_f64() - 1.0).abs() < 1e-9);
        assert_eq!(out.probe.status, Status::Holds);
        assert!(out.caps.iter().all(|c| c.status == Status::Holds));
    }

    #[test]
    fn killpinasco_orthonormal_linear() {
        let forms: Vec<_> = (1..=3).map(|i| form(&format!("3 1; {i} = 1"))).collect();
        let out = verify_killpinasco(&forms, &cfg(16)).unwrap();
        assert!((out.joint.value - 3f64.powf(-1.5)).abs() < 1e-12);
        assert!(!out.probe.is_violation() && out.probe.status == Status::Holds);
        // linear forms attain the cap exactly
        assert!(out.caps.iter().all(|c| c.status == Status::Equality));
    }

    #[test]
    fn sup_bound_examples() {
        assert_eq!(verify_sup_bound(&form("3 1; 2 = 1"), &cfg(4)).unwrap().status, Status::Equality);
        let r = verify_sup_bound(&form("2 2; 1,2 = 1"), &cfg(4)).unwrap();
        assert_eq!(r.status, Status::Holds);
        assert!((r.rhs.to_f64() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn real_polarization_orthonormal_is_equality() {
        let vs: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let (rep, _) = probe_real_polarization(&vs, &cfg(16)).unwrap();
        assert_eq!(rep.inequality_id, InequalityId::RealPolarizationKnown);
        assert_eq!(rep.status, Status::Equality);
    }
}
