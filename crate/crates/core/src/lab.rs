//! Exact verifiers for the product inequalities, conjecture probes, and
//! seeded random campaigns over them.

use num::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::chaos::{inner, product_expectation, ChaosElement};
use crate::error::{Error, Result};
use crate::hermite::{double_factorial, factorial};
use crate::moments::{
    complex_moment, isserlis_moment, squared_hermite_moment, squared_hermite_moment_linearized, ComplexVectorSet,
    CorrelationMatrix, MATCHING_CAP,
};
use crate::ou::{negatif_functional, phi_curve, phi_limit, ContractionFactor, McEstimate};
use crate::random::{
    instance_rng, random_complex_vectors, random_correlation, random_pure_element, rational_unit_vector,
};
use crate::report::{InequalityId, VerificationReport};
use crate::scalar::{format_scalar, from_bigint, int, rat, to_f64, ExactScalar};

fn join_elements(fs: &[ChaosElement]) -> String {
    fs.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(" | ")
}

fn join_u32(p: &[u32]) -> String {
    p.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

fn check_pure(fs: &[ChaosElement]) -> Result<()> {
    if fs.is_empty() {
        return Err(Error::input("at least one factor is required"));
    }
    let n = fs[0].dim();
    for (i, f) in fs.iter().enumerate() {
        if f.dim() != n {
            return Err(Error::input("all factors must live on the same R^n"));
        }
        if f.pure_degree().is_none() {
            return Err(Error::input(format!("factor {} is not a pure chaos element", i + 1)));
        }
    }
    Ok(())
}

/// `∫ ∏ F_i² dγ_n ≥ ∏ ∫ F_i² dγ_n` for pure chaos elements.
pub fn verify_main(fs: &[ChaosElement]) -> Result<VerificationReport> {
    check_pure(fs)?;
    let doubled: Vec<ChaosElement> = fs.iter().flat_map(|f| [f.clone(), f.clone()]).collect();
    let lhs = product_expectation(&doubled)?;
    let mut rhs = int(1);
    for f in fs {
        rhs *= inner(f, f)?;
    }
    Ok(VerificationReport::exact(InequalityId::MainProduct, lhs, rhs, join_elements(fs)))
}

/// `E[∏ H_{p_i}(G_i)²] ≥ ∏ p_i!`.
///
/// Within the matching cap the left side comes from the two-nodes-per-variable
/// diagram sum; beyond it, from the linearized route.
pub fn verify_hgp(p: &[u32], corr: &CorrelationMatrix) -> Result<VerificationReport> {
    if p.len() != corr.dim() {
        return Err(Error::input(format!(
            "{} degrees given for a {}-dimensional correlation",
            p.len(),
            corr.dim()
        )));
    }
    let legs: usize = p.iter().map(|&k| 2 * k as usize).sum();
    let lhs = if legs <= MATCHING_CAP {
        squared_hermite_moment(p, corr)?
    } else {
        squared_hermite_moment_linearized(p, corr)?
    };
    let rhs: ExactScalar = p.iter().map(|&k| from_bigint(factorial(k).into())).product();
    let digest = format!("p={}; corr={}", join_u32(p), corr.canonical());
    Ok(VerificationReport::exact(InequalityId::HermiteProduct, lhs, rhs, digest))
}

fn vectors_digest(vs: &[Vec<ExactScalar>]) -> String {
    vs.iter()
        .map(|v| v.iter().map(format_scalar).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join(";")
}

/// For `F_i = ⟨v_i, x⟩` with unit `v_i`: the averaged form
/// `∫∏F_i² ≥ (1/d) Σ_i ∫F_i² ∫∏_{j≠i} F_j²` and the plain product form
/// `∫∏F_i² ≥ ∏∫F_i²`, in that order.
pub fn verify_frenkel_improved(vs: &[Vec<ExactScalar>]) -> Result<(VerificationReport, VerificationReport)> {
    if vs.is_empty() {
        return Err(Error::input("at least one vector is required"));
    }
    let corr = CorrelationMatrix::gram(vs)?;
    let d = vs.len();
    let ones = vec![1u32; d];
    let lhs = squared_hermite_moment(&ones, &corr)?;
    let mut improved = ExactScalar::zero();
    for i in 0..d {
        let rest: Vec<usize> = (0..d).filter(|&j| j != i).collect();
        improved += squared_hermite_moment(&vec![1; rest.len()], &corr.submatrix(&rest))?;
    }
    improved /= int(d as i64);
    let digest = vectors_digest(vs);
    Ok((
        VerificationReport::exact(InequalityId::FrenkelImproved, lhs.clone(), improved, digest.clone()),
        VerificationReport::exact(InequalityId::Frenkel, lhs, int(1), digest),
    ))
}

/// Largest dimension accepted by [`verify_averaged_fourth`].
pub const AVERAGED_DIM_CAP: usize = 4;

/// Both sides of the averaged fourth-moment inequality, split by subset size.
#[derive(Clone, Debug, PartialEq)]
pub struct AveragedFourth {
    /// `lhs_by_size[k - 1]` sums `E[G_{i_1}⁴ ··· G_{i_k}⁴]` over `k`-subsets.
    pub lhs_by_size: Vec<ExactScalar>,
    /// `rhs_by_size[k - 1] = C(d, k) 3^k`.
    pub rhs_by_size: Vec<ExactScalar>,
    pub report: VerificationReport,
}

impl AveragedFourth {
    /// Sides with the singleton terms removed. Singletons contribute
    /// `E[G_i⁴] = 3` to both sides, so they never change the margin.
    pub fn sides_without_singletons(&self) -> (ExactScalar, ExactScalar) {
        (
            self.lhs_by_size.iter().skip(1).sum(),
            self.rhs_by_size.iter().skip(1).sum(),
        )
    }
}

/// `Σ_S E[∏_{i∈S} G_i⁴] ≥ Σ_S 3^{|S|}` over all non-empty `S ⊆ {1..d}`.
pub fn verify_averaged_fourth(corr: &CorrelationMatrix) -> Result<AveragedFourth> {
    let d = corr.dim();
    if d == 0 {
        return Err(Error::input("dimension must be >= 1"));
    }
    if d > AVERAGED_DIM_CAP {
        return Err(Error::Resource {
            what: "averaged fourth moment dimension",
            requested: d,
            cap: AVERAGED_DIM_CAP,
        });
    }
    let mut lhs_by_size = vec![ExactScalar::zero(); d];
    let mut rhs_by_size = vec![ExactScalar::zero(); d];
    for mask in 1u32..(1 << d) {
        let exps: Vec<u32> = (0..d).map(|i| if mask >> i & 1 == 1 { 4 } else { 0 }).collect();
        let k = mask.count_ones() as usize;
        lhs_by_size[k - 1] += isserlis_moment(&exps, corr)?;
        rhs_by_size[k - 1] += int(3i64.pow(k as u32));
    }
    let report = VerificationReport::exact(
        InequalityId::AveragedFourth,
        lhs_by_size.iter().sum(),
        rhs_by_size.iter().sum(),
        corr.canonical(),
    );
    Ok(AveragedFourth {
        lhs_by_size,
        rhs_by_size,
        report,
    })
}

/// `E[∏ G_i^{2m}] ≥ ((2m-1)!!)^d`. Open for `m ≥ 2`; a violation is a finding.
pub fn probe_gpc(corr: &CorrelationMatrix, m: u32) -> Result<VerificationReport> {
    if m == 0 {
        return Err(Error::input("m must be >= 1"));
    }
    let d = corr.dim();
    let lhs = isserlis_moment(&vec![2 * m; d], corr)?;
    let single = from_bigint(double_factorial(2 * m as i64 - 1)?.into());
    let rhs = num::pow(single, d);
    let digest = format!("m={m}; corr={}", corr.canonical());
    let id = if m == 1 {
        // the m = 1 case is proven
        InequalityId::Frenkel
    } else {
        InequalityId::GaussianProductConjecture
    };
    Ok(VerificationReport::exact(id, lhs, rhs, digest))
}

/// `E[∏ |G_i|^{2p_i}] ≥ ∏ E[|G_i|^{2p_i}]` for complex Gaussians
/// `G_i = ⟨a_i, X + iY⟩`.
pub fn probe_complex(p: &[u32], a: &ComplexVectorSet) -> Result<VerificationReport> {
    let lhs = complex_moment(p, a)?;
    let mut rhs = int(1);
    for (i, &k) in p.iter().enumerate() {
        rhs *= complex_moment(&[k], &a.select(&[i]))?;
    }
    let digest = format!("p={}; a={}", join_u32(p), a.canonical());
    Ok(VerificationReport::exact(InequalityId::ComplexProduct, lhs, rhs, digest))
}

/// Monte Carlo estimate of `E[∏ |G_i|^{2p_i}]`.
pub fn complex_moment_mc(p: &[u32], a: &ComplexVectorSet, samples: usize, seed: u64) -> Result<McEstimate> {
    if p.len() != a.len() || samples < 2 {
        return Err(Error::input("need one exponent per vector and at least two samples"));
    }
    let dim = a.dim();
    let coeffs: Vec<Vec<(f64, f64)>> = a
        .vectors()
        .iter()
        .map(|v| v.iter().map(|z| (to_f64(&z.re), to_f64(&z.im))).collect())
        .collect();
    const CHUNK: usize = 4096;
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let (mut s1, mut s2) = (0.0, 0.0);
            let mut x = vec![0.0; dim];
            let mut y = vec![0.0; dim];
            for _ in 0..CHUNK.min(samples - c * CHUNK) {
                for j in 0..dim {
                    x[j] = StandardNormal.sample(&mut rng);
                    y[j] = StandardNormal.sample(&mut rng);
                }
                let mut v = 1.0;
                for (row, &k) in coeffs.iter().zip(p) {
                    // (a + ib)(x + iy) summed over coordinates
                    let (mut re, mut im) = (0.0, 0.0);
                    for (j, &(ar, ai)) in row.iter().enumerate() {
                        re += ar * x[j] - ai * y[j];
                        im += ar * y[j] + ai * x[j];
                    }
                    v *= (re * re + im * im).powi(k as i32);
                }
                s1 += v;
                s2 += v * v;
            }
            (s1, s2)
        })
        .collect();
    let (s1, s2) = parts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let n = samples as f64;
    let mean = s1 / n;
    let var = ((s2 - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(McEstimate {
        mean,
        std_error: (var / n).sqrt(),
        samples,
    })
}

/// The default contraction grid `s ∈ {1, 3/4, 1/2, 1/4, 1/8}`.
pub fn default_grid() -> Vec<ContractionFactor> {
    [(1, 1), (3, 4), (1, 2), (1, 4), (1, 8)]
        .iter()
        .map(|&(n, d)| ContractionFactor::new(rat(n, d)).expect("grid lies in (0, 1]"))
        .collect()
}

/// `φ` is non-increasing in `t`: one report per consecutive grid pair
/// (sorted by decreasing `s`), plus the last grid point against `t → ∞`.
pub fn verify_phi_monotone(fs: &[ChaosElement], grid: &[ContractionFactor]) -> Result<Vec<VerificationReport>> {
    let mut grid = grid.to_vec();
    grid.sort_by(|a, b| b.cmp(a));
    grid.dedup();
    let phi = phi_curve(fs, &grid)?;
    let elems = join_elements(fs);
    let mut reports = Vec::with_capacity(grid.len());
    for i in 1..grid.len() {
        let digest = format!(
            "s={}>{}; F={elems}",
            format_scalar(grid[i - 1].value()),
            format_scalar(grid[i].value())
        );
        reports.push(VerificationReport::exact(
            InequalityId::PhiMonotone,
            phi[i - 1].clone(),
            phi[i].clone(),
            digest,
        ));
    }
    if let (Some(last), Some(s)) = (phi.last(), grid.last()) {
        let digest = format!("s={}>0; F={elems}", format_scalar(s.value()));
        reports.push(VerificationReport::exact(
            InequalityId::PhiMonotone,
            last.clone(),
            phi_limit(fs)?,
            digest,
        ));
    }
    Ok(reports)
}

/// `φ'(t) ≤ 0`, reported as `0 ≥ φ'(t)`.
pub fn verify_negatif(fs: &[ChaosElement], s: &ContractionFactor) -> Result<VerificationReport> {
    let value = negatif_functional(fs, s)?;
    let digest = format!("s={}; F={}", format_scalar(s.value()), join_elements(fs));
    Ok(VerificationReport::exact(InequalityId::NegatifSign, ExactScalar::zero(), value, digest))
}

/// The `F_1 = F_2 = H_1(x_1)` fixture with `φ(s) = 1 + 2s⁴`.
pub fn h1_pair() -> Vec<ChaosElement> {
    let x = ChaosElement::hermite(1, 0, 1);
    vec![x.clone(), x]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Campaign {
    Hgp,
    Main,
    Frenkel,
    Averaged,
    Gpc,
    Complex,
    Phi,
    Negatif,
}

impl Campaign {
    pub fn as_str(self) -> &'static str {
        match self {
            Campaign::Hgp => "hgp",
            Campaign::Main => "main",
            Campaign::Frenkel => "frenkel",
            Campaign::Averaged => "averaged",
            Campaign::Gpc => "gpc",
            Campaign::Complex => "complex",
            Campaign::Phi => "phi",
            Campaign::Negatif => "negatif",
        }
    }
}

/// A random pure family: 1 to 3 factors on `R^n`, `n ≤ 3`, degrees 1 to 3.
pub fn random_pure_family<R: Rng>(rng: &mut R) -> Vec<ChaosElement> {
    let n = rng.gen_range(1..=3);
    let d = rng.gen_range(1..=3);
    (0..d)
        .map(|_| {
            let k = rng.gen_range(1..=3);
            random_pure_element(rng, n, k)
        })
        .collect()
}

fn instance(kind: Campaign, seed: u64, index: u64) -> Result<Vec<VerificationReport>> {
    let rng = &mut instance_rng(seed, index);
    let reports = match kind {
        Campaign::Hgp => {
            let d = rng.gen_range(1..=4);
            let p: Vec<u32> = (0..d).map(|_| rng.gen_range(1..=4)).collect();
            vec![verify_hgp(&p, &random_correlation(rng, d))?]
        }
        Campaign::Main => vec![verify_main(&random_pure_family(rng))?],
        Campaign::Frenkel => {
            let d = rng.gen_range(1..=4);
            let n = rng.gen_range(1..=4);
            let vs: Vec<_> = (0..d).map(|_| rational_unit_vector(rng, n)).collect();
            let (improved, plain) = verify_frenkel_improved(&vs)?;
            vec![improved, plain]
        }
        Campaign::Averaged => {
            let d = rng.gen_range(1..=AVERAGED_DIM_CAP);
            vec![verify_averaged_fourth(&random_correlation(rng, d))?.report]
        }
        Campaign::Gpc => {
            let d = rng.gen_range(1..=3);
            let m = rng.gen_range(2..=3);
            vec![probe_gpc(&random_correlation(rng, d), m)?]
        }
        Campaign::Complex => {
            let d = rng.gen_range(1..=3);
            let p: Vec<u32> = (0..d).map(|_| rng.gen_range(1..=3)).collect();
            vec![probe_complex(&p, &random_complex_vectors(rng, d, d))?]
        }
        Campaign::Phi => verify_phi_monotone(&random_pure_family(rng), &default_grid())?,
        Campaign::Negatif => {
            let fs = random_pure_family(rng);
            default_grid()
                .iter()
                .map(|s| verify_negatif(&fs, s))
                .collect::<Result<_>>()?
        }
    };
    Ok(reports.into_iter().map(|r| r.with_seed(Some(seed))).collect())
}

/// Runs `instances` seeded instances in parallel; instance `i` uses the
/// ChaCha8 stream `(seed, i)`. Reports come back in instance order.
pub fn run_campaign(kind: Campaign, instances: usize, seed: u64) -> Result<Vec<VerificationReport>> {
    let per_instance: Vec<Vec<VerificationReport>> = (0..instances as u64)
        .into_par_iter()
        .map(|i| instance(kind, seed, i))
        .collect::<Result<_>>()?;
    Ok(per_instance.into_iter().flatten().collect())
}
