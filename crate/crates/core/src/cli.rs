//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::error::{Error, Result};
use crate::hadamard::{
    admissible, classical_margin, closed_form, hadamard_series, refined_report, rescale, SpdMatrix,
};
use crate::lab::{default_grid, h1_pair, run_campaign, verify_negatif, verify_phi_monotone, Campaign};
use crate::moments::{
    hermite_product_moment_f64, hermite_product_moment_with_cap, isserlis_moment, squared_hermite_moment_with_cap,
    CorrelationMatrix, MomentQuery, Node, MATCHING_CAP,
};
use crate::ou::phi_curve;
use crate::polarization::{
    cd_bracket, compare_bounds, frenkel_lower, new_bound, parse_forms, pinasco_bound, verify_killpinasco,
    BoundComparison, MultilinearForm, OptimizerConfig,
};
use crate::random::{instance_rng, random_multilinear_form};
use crate::report::{reports_to_csv, CampaignSummary, VerificationReport};
use crate::scalar::{format_scalar, parse_scalar, to_f64, ExactScalar};

/// Exit code when a proven inequality is violated.
pub const EXIT_VIOLATION: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "sqchaos", version, about = "Exact Gaussian moment and chaos inequality toolkit")]
pub struct Cli {
    /// Seed for randomized campaigns and optimizer restarts.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Exact rational arithmetic (default).
    #[arg(long, global = true, conflicts_with = "float")]
    pub exact: bool,
    /// Floating-point arithmetic where supported.
    #[arg(long, global = true)]
    pub float: bool,
    /// Directory for report files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Leg cap for moment queries (at most 28).
    #[arg(long, global = true)]
    pub cap: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a Gaussian moment query file.
    Moment { query: PathBuf },
    /// Run a seeded verification campaign.
    Verify {
        campaign: Campaign,
        #[arg(long, default_value_t = 200)]
        instances: usize,
        /// Run on a fixed family instead of random instances (phi, negatif).
        #[arg(long)]
        fixture: Option<Fixture>,
    },
    /// Print the bound table as CSV.
    Bounds {
        #[arg(long, default_value_t = 2)]
        d_min: u32,
        #[arg(long, default_value_t = 20)]
        d_max: u32,
        /// Ambient dimension; defaults to `d` on each row.
        #[arg(long)]
        n: Option<u32>,
        /// Common degree of all forms.
        #[arg(long, default_value_t = 1)]
        k: u32,
    },
    /// Hermite series reconstruction of `det S`.
    Hadamard {
        matrix: PathBuf,
        #[arg(long, default_value_t = 40)]
        order: u32,
    },
    /// Lower bounds on `sup ∏|F_i|` over the unit sphere.
    Polarize {
        forms: Option<PathBuf>,
        #[arg(long, conflicts_with = "forms")]
        random: bool,
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Write the best restart's ascent trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Fixture {
    H1Pair,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Errors go to `err`.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match run(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let cap = match cli.cap {
        Some(c) if c > MATCHING_CAP => {
            return Err(Error::input(format!("--cap {c} exceeds the hard cap {MATCHING_CAP}")))
        }
        Some(c) => c,
        None => MATCHING_CAP,
    };
    if let Some(dir) = &cli.out {
        fs::create_dir_all(dir)?;
    }
    match &cli.command {
        Command::Moment { query } => cmd_moment(cli, query, cap, out),
        Command::Verify {
            campaign,
            instances,
            fixture,
        } => cmd_verify(cli, *campaign, *instances, *fixture, out),
        Command::Bounds { d_min, d_max, n, k } => cmd_bounds(cli, *d_min, *d_max, *n, *k, out),
        Command::Hadamard { matrix, order } => cmd_hadamard(cli, matrix, *order, out),
        Command::Polarize {
            forms,
            random,
            d,
            n,
            k,
            restarts,
            max_iter,
            tol,
            trace,
        } => {
            let cfg = OptimizerConfig {
                restarts: *restarts,
                max_iter: *max_iter,
                tol: *tol,
                seed: cli.seed.unwrap_or(0),
            };
            let source = match (forms, random) {
                (Some(path), false) => FormSource::File(path),
                (None, true) => FormSource::Random { d: *d, n: *n, k: *k },
                _ => return Err(Error::input("give a forms file or --random")),
            };
            cmd_polarize(cli, source, cfg, trace.as_deref(), out)
        }
    }
}

fn write_out(cli: &Cli, name: &str, contents: &str) -> Result<()> {
    if let Some(dir) = &cli.out {
        fs::write(dir.join(name), contents)?;
    }
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::input(format!("{}: {e}", path.display())))
}

/// A parsed moment query.
#[derive(Debug)]
enum Query {
    Squared(Vec<u32>),
    Nodes(Vec<Node>),
    Exponents(Vec<u32>),
}

fn parse_u32_list(s: &str) -> Result<Vec<u32>> {
    s.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::input(format!("bad integer `{t}`"))))
        .collect()
}

fn parse_rows(s: &str) -> Result<Vec<Vec<ExactScalar>>> {
    s.split(';')
        .map(|row| row.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).map(parse_scalar).collect())
        .collect()
}

/// Query files hold `key = value` lines: one of `p`, `nodes` (`var:degree`,
/// 1-based) or `exponents`, plus optionally `corr` (rows separated by `;`)
/// or `rho` for two variables. Without either, variables are independent.
fn parse_query(text: &str) -> Result<(Query, CorrelationMatrix)> {
    let mut query = None;
    let mut corr = None;
    let mut dim_hint = 0;
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::input(format!("query line `{line}` lacks `=`")))?;
        let value = value.trim();
        let q = match key.trim() {
            "p" => {
                let p = parse_u32_list(value)?;
                dim_hint = p.len();
                Some(Query::Squared(p))
            }
            "exponents" => {
                let e = parse_u32_list(value)?;
                dim_hint = e.len();
                Some(Query::Exponents(e))
            }
            "nodes" => {
                let nodes = value
                    .split_whitespace()
                    .map(|t| {
                        let (v, d) = t
                            .split_once(':')
                            .ok_or_else(|| Error::input(format!("node `{t}` must be var:degree")))?;
                        let v: usize = v.parse().map_err(|_| Error::input(format!("bad variable `{v}`")))?;
                        let d: u32 = d.parse().map_err(|_| Error::input(format!("bad degree `{d}`")))?;
                        if v == 0 {
                            return Err(Error::input("variable ids are 1-based"));
                        }
                        Ok(Node::new(v - 1, d))
                    })
                    .collect::<Result<Vec<_>>>()?;
                dim_hint = nodes.iter().map(|n| n.variable + 1).max().unwrap_or(1);
                Some(Query::Nodes(nodes))
            }
            "corr" => {
                corr = Some(CorrelationMatrix::from_rows(parse_rows(value)?)?);
                None
            }
            "rho" => {
                corr = Some(CorrelationMatrix::pair(parse_scalar(value)?)?);
                None
            }
            other => return Err(Error::input(format!("unknown query key `{other}`"))),
        };
        if let Some(q) = q {
            if query.is_some() {
                return Err(Error::input("give exactly one of p, nodes, exponents"));
            }
            query = Some(q);
        }
    }
    let query = query.ok_or_else(|| Error::input("query needs one of p, nodes, exponents"))?;
    let corr = match corr {
        Some(c) => c,
        None => CorrelationMatrix::identity(dim_hint.max(1)),
    };
    Ok((query, corr))
}

fn check_legs(what: &'static str, legs: usize, cap: usize) -> Result<()> {
    if legs > cap {
        return Err(Error::Resource {
            what,
            requested: legs,
            cap,
        });
    }
    Ok(())
}

fn cmd_moment(cli: &Cli, path: &Path, cap: usize, out: &mut dyn Write) -> Result<i32> {
    let (query, corr) = parse_query(&read(path)?)?;
    let text = if cli.float {
        let dim = corr.dim();
        let nodes: Vec<Node> = match &query {
            Query::Squared(p) => {
                if p.len() != dim {
                    return Err(Error::input("p must have one entry per variable"));
                }
                p.iter().enumerate().flat_map(|(i, &k)| [Node::new(i, k), Node::new(i, k)]).collect()
            }
            Query::Nodes(n) => n.clone(),
            Query::Exponents(_) => {
                return Err(Error::input("raw moments are exact only; drop --float"));
            }
        };
        check_legs("hermite product legs", nodes.iter().map(|n| n.degree as usize).sum(), cap)?;
        if let Some(bad) = nodes.iter().find(|n| n.variable >= dim) {
            return Err(Error::input(format!("variable id {} out of range", bad.variable + 1)));
        }
        format!("{}\n", hermite_product_moment_f64(&nodes, dim, &corr.to_f64())?)
    } else {
        let value = match &query {
            Query::Squared(p) => squared_hermite_moment_with_cap(p, &corr, cap)?,
            Query::Nodes(n) => hermite_product_moment_with_cap(&MomentQuery::new(n.clone(), corr)?, cap)?,
            Query::Exponents(e) => {
                check_legs("isserlis legs", e.iter().map(|&m| m as usize).sum(), cap)?;
                isserlis_moment(e, &corr)?
            }
        };
        format!("{}\n{}\n", format_scalar(&value), to_f64(&value))
    };
    out.write_all(text.as_bytes())?;
    write_out(cli, "moment.txt", &text)?;
    Ok(0)
}

fn cmd_verify(
    cli: &Cli,
    campaign: Campaign,
    instances: usize,
    fixture: Option<Fixture>,
    out: &mut dyn Write,
) -> Result<i32> {
    if cli.float {
        return Err(Error::input("verification campaigns run in exact arithmetic; drop --float"));
    }
    let reports: Vec<VerificationReport> = match fixture {
        Some(Fixture::H1Pair) => {
            let fs = h1_pair();
            let grid = default_grid();
            match campaign {
                Campaign::Phi => {
                    let phi = phi_curve(&fs, &grid)?;
                    for (s, v) in grid.iter().zip(&phi) {
                        writeln!(out, "phi({}) = {}", format_scalar(s.value()), format_scalar(v))?;
                    }
                    verify_phi_monotone(&fs, &grid)?
                }
                Campaign::Negatif => grid.iter().map(|s| verify_negatif(&fs, s)).collect::<Result<_>>()?,
                other => {
                    return Err(Error::input(format!(
                        "the h1-pair fixture applies to phi and negatif, not {}",
                        other.as_str()
                    )))
                }
            }
        }
        None => {
            let seed = cli
                .seed
                .ok_or_else(|| Error::input("randomized campaigns need --seed"))?;
            run_campaign(campaign, instances, seed)?
        }
    };
    let summary = CampaignSummary::from_reports(&reports);
    let summary_json = serde_json::to_string_pretty(&summary)?;
    writeln!(out, "{summary_json}")?;
    if cli.out.is_some() {
        let lines: Vec<String> = reports.iter().map(VerificationReport::to_json).collect();
        write_out(cli, "reports.jsonl", &(lines.join("\n") + "\n"))?;
        write_out(cli, "reports.csv", &reports_to_csv(&reports)?)?;
        write_out(cli, "summary.json", &(summary_json + "\n"))?;
    }
    Ok(if summary.violations == 0 { 0 } else { EXIT_VIOLATION })
}

pub const BOUNDS_HEADER: [&str; 9] = [
    "d",
    "n",
    "K",
    "new_bound",
    "pinasco_bound",
    "frenkel_lower",
    "cd_lower",
    "cd_upper",
    "winner",
];

/// One row per `d`, with `k_i = k` for all `i` and `n` defaulting to `d`.
pub fn bounds_table(d_min: u32, d_max: u32, n: Option<u32>, k: u32) -> Result<String> {
    if d_min < 2 || d_max < d_min {
        return Err(Error::input("need 2 <= d_min <= d_max"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::internal(e.to_string());
    w.write_record(BOUNDS_HEADER).map_err(io)?;
    for d in d_min..=d_max {
        let n = n.unwrap_or(d);
        let ks = vec![k; d as usize];
        let winner = match compare_bounds(n, &ks)? {
            BoundComparison::NewBetter => "new",
            BoundComparison::PinascoBetter => "pinasco",
            BoundComparison::EqualWithinTol => "tie",
        };
        let (lo, hi) = cd_bracket(d)?;
        w.write_record([
            d.to_string(),
            n.to_string(),
            (k * d).to_string(),
            new_bound(n, &ks)?.value().to_string(),
            pinasco_bound(&ks)?.value().to_string(),
            frenkel_lower(d)?.value().to_string(),
            lo.value().to_string(),
            hi.value().to_string(),
            winner.to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::internal(e.to_string()))
}

fn cmd_bounds(cli: &Cli, d_min: u32, d_max: u32, n: Option<u32>, k: u32, out: &mut dyn Write) -> Result<i32> {
    let table = bounds_table(d_min, d_max, n, k)?;
    out.write_all(table.as_bytes())?;
    write_out(cli, "bounds.csv", &table)?;
    Ok(0)
}

fn cmd_hadamard(cli: &Cli, path: &Path, order: u32, out: &mut dyn Write) -> Result<i32> {
    let s = SpdMatrix::parse(&read(path)?)?;
    // An admissible matrix is used as given; otherwise rescale.
    let (c, t) = if admissible(&s).is_admissible() {
        (1.0, s.clone())
    } else {
        rescale(&s)?
    };
    let series = hadamard_series(&t, order)?;
    let closed = closed_form(&t)?;
    let d = s.dim() as i32;
    let det = s.det();
    let reconstructed = series.det_upper_bound() / c.powi(d);
    let rel = (reconstructed - det).abs() / det;
    let classical = classical_margin(&s);
    let refined = refined_report(&t, &series);

    writeln!(out, "c = {c}")?;
    writeln!(out, "order partial_sum")?;
    for (n, p) in series.partial_sums.iter().enumerate() {
        writeln!(out, "{n} {p}")?;
    }
    writeln!(out, "series^-2 = {reconstructed}")?;
    writeln!(out, "det S = {det}")?;
    writeln!(out, "relative error = {rel:e}")?;
    writeln!(out, "closed form = {}", closed.value)?;
    writeln!(out, "classical margin = {} ({})", classical.margin, classical.status.as_str())?;

    if cli.out.is_some() {
        let doc = json!({
            "matrix": s.to_json(),
            "scale": c,
            "order": order,
            "partial_sums": series.partial_sums,
            "order_subtotals": series.order_subtotals,
            "det_upper_bound": reconstructed,
            "det": det,
            "relative_error": rel,
            "closed_form": closed,
            "reports": [classical, refined],
        });
        write_out(cli, "hadamard.json", &(serde_json::to_string_pretty(&doc)? + "\n"))?;
    }
    Ok(if classical.is_violation() || refined.is_violation() {
        EXIT_VIOLATION
    } else {
        0
    })
}

enum FormSource<'a> {
    File(&'a Path),
    Random { d: usize, n: usize, k: usize },
}

fn cmd_polarize(
    cli: &Cli,
    source: FormSource<'_>,
    cfg: OptimizerConfig,
    trace: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32> {
    let forms: Vec<MultilinearForm> = match source {
        FormSource::File(path) => parse_forms(&read(path)?)?,
        FormSource::Random { d, n, k } => {
            let seed = cli.seed.ok_or_else(|| Error::input("--random needs --seed"))?;
            if d == 0 || k == 0 || k > n {
                return Err(Error::input("--random needs d >= 1 and 1 <= k <= n"));
            }
            (0..d)
                .map(|i| random_multilinear_form(&mut instance_rng(seed, i as u64), n, k))
                .collect()
        }
    };
    let outcome = verify_killpinasco(&forms, &cfg)?;
    let d = forms.len() as f64;
    let linear_check = forms.iter().all(|f| f.degree() == 1).then(|| {
        let target = d.powf(-d / 2.0);
        let label = if (outcome.joint.value - target).abs() <= 1e-7 {
            "attained"
        } else if outcome.joint.value > target {
            "exceeds"
        } else {
            "below"
        };
        json!({ "target": target, "check": label })
    });
    let doc = json!({
        "forms": forms.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
        "normalized": true,
        "sup_lower_bound": outcome.joint.value,
        "argmax": outcome.joint.argmax,
        "status": outcome.joint.status,
        "best_restart": outcome.joint.best_restart,
        "per_form_sup_lower_bound": outcome.singles.iter().map(|s| s.value).collect::<Vec<_>>(),
        "killpinasco_probe": outcome.probe,
        "sup_caps": outcome.caps,
        "real_polarization": linear_check,
        "config": cfg,
    });
    let text = serde_json::to_string_pretty(&doc)? + "\n";
    out.write_all(text.as_bytes())?;
    write_out(cli, "polarize.json", &text)?;
    if let Some(path) = trace {
        fs::write(path, outcome.joint.trace_csv()?)?;
    }
    Ok(if outcome.caps.iter().any(VerificationReport::is_violation) {
        EXIT_VIOLATION
    } else {
        0
    })
}
