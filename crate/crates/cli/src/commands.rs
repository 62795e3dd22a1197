//! The four subcommands. Each writes its artifacts under `cfg.out` and
//! returns a summary for the caller to print.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use khlab_core::barriers::{f_eps, BarrierFamily};
use khlab_core::geometry::{certify_admissible, AdmissibilityCertificate, DomainSpec};
use khlab_core::minkowski::{
    check_beta, default_levels, minkowski_report_with_gamma, phi_series_with, FieldInterpolant, InequalityReport,
    PhiSeries,
};
use khlab_core::solver::{asymptotics_report, continuation_solve, Richardson, SolutionField, SolveReport, StageSummary};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{io_at, CliError, Result};
use crate::suites::{run_suite, SuiteReport, SUITES};

pub const SCHEMA_VERSION: u32 = 1;

/// Echoed in every JSON artifact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub config: String,
    pub seed: u64,
    pub domain: Option<String>,
    pub grid: Option<[usize; 2]>,
    pub r_outer: Option<f64>,
    pub eps: Option<f64>,
    pub eps_schedule: Vec<f64>,
    pub r_schedule: Vec<f64>,
}

impl Provenance {
    pub fn new(cfg: &RunConfig) -> Self {
        let config = cfg.canonical_text();
        let hash = Sha256::digest(config.as_bytes());
        Provenance {
            tool: "khlab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash: hash.iter().fold(String::new(), |mut s, b| {
                let _ = write!(s, "{b:02x}");
                s
            }),
            config,
            seed: cfg.seed,
            domain: cfg.domain.as_ref().map(DomainSpec::to_text),
            grid: None,
            r_outer: None,
            eps: None,
            eps_schedule: cfg.solver.eps_schedule.clone(),
            r_schedule: cfg.solver.r_schedule.clone(),
        }
    }

    fn with_field(mut self, field: &SolutionField) -> Self {
        let g = &field.grid;
        self.grid = Some([g.ns, g.ntheta]);
        self.r_outer = Some(g.r_outer);
        self.eps = Some(g.eps);
        self.domain = Some(format!("n={} k={} rho = {}", g.n, g.k, g.surface));
        self
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    provenance: &'a Provenance,
    #[serde(flatten)]
    body: T,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_at(path))
}

fn write_json<T: Serialize>(path: &Path, command: &str, prov: &Provenance, body: T) -> Result<()> {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        command,
        provenance: prov,
        body,
    };
    let mut text = serde_json::to_string_pretty(&env)?;
    text.push('\n');
    write_text(path, &text)
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_at(dir))
}

fn require_domain(cfg: &RunConfig) -> Result<&DomainSpec> {
    cfg.domain
        .as_ref()
        .ok_or_else(|| CliError::Config("missing key `domain`".into()))
}

// ---------------------------------------------------------------- verify

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyOutcome {
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
    pub summary: PathBuf,
    /// Replay files of failing suites.
    pub failures: Vec<PathBuf>,
}

pub fn cmd_verify_identities(cfg: &RunConfig) -> Result<VerifyOutcome> {
    cfg.validate()?;
    let names: Vec<&str> = match cfg.selected_suite() {
        Some(s) => vec![s],
        None => SUITES.to_vec(),
    };
    let mut suites = Vec::new();
    for name in names {
        suites.push(run_suite(name, cfg.seed, cfg.samples, &cfg.tolerances)?);
    }
    prepare_out(&cfg.out)?;
    let prov = Provenance::new(cfg);
    let mut failures = Vec::new();
    for s in suites.iter().filter(|s| !s.passed) {
        let dir = cfg.out.join("failures");
        prepare_out(&dir)?;
        let path = dir.join(format!("{}.json", s.suite));
        let failing: Vec<_> = s.cases.iter().filter(|c| !c.passed).collect();
        write_json(&path, "verify-identities", &prov, serde_json::json!({ "suite": s.suite, "seed": s.seed, "cases": failing }))?;
        failures.push(path);
    }
    let passed = suites.iter().all(|s| s.passed);
    let summary = cfg.out.join("verify.json");
    #[derive(Serialize)]
    struct Body<'a> {
        passed: bool,
        suites: &'a [SuiteReport],
    }
    write_json(&summary, "verify-identities", &prov, Body { passed, suites: &suites })?;
    Ok(VerifyOutcome {
        passed,
        suites,
        summary,
        failures,
    })
}

// ---------------------------------------------------------------- solve

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveBody {
    pub certificate: AdmissibilityCertificate,
    pub report: SolveReport,
    pub stages: Vec<StageSummary>,
    pub richardson: Option<Richardson>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub field: SolutionField,
    pub body: SolveBody,
    pub dump: PathBuf,
    pub report: PathBuf,
    pub rays: PathBuf,
}

/// Certificate, continuation solve and report, without writing anything.
pub fn solve_domain(cfg: &RunConfig) -> Result<(SolutionField, SolveBody)> {
    let d = require_domain(cfg)?;
    let certificate = certify_admissible(&d.surface, d.k)?;
    let out = continuation_solve(&d.surface, d.k, &cfg.solver)?;
    Ok((
        out.field,
        SolveBody {
            certificate,
            report: out.report,
            stages: out.stages,
            richardson: out.richardson,
        },
    ))
}

/// `θ, r, u` rows along the rays `θ = 0, π/2, π`.
pub fn rays_csv(field: &SolutionField) -> String {
    let interp = FieldInterpolant::new(field);
    let mut out = String::from("theta,r,u\n");
    for theta in [0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI] {
        let u = interp.column_u(theta);
        for (i, v) in u.iter().enumerate() {
            let r = interp.r_of(field.grid.s[i], theta);
            let _ = writeln!(out, "{theta:.12e},{r:.12e},{v:.12e}");
        }
    }
    out
}

pub fn write_dump(field: &SolutionField, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_at(path))?;
    let mut w = BufWriter::new(file);
    field.write_dump(&mut w)?;
    w.flush().map_err(io_at(path))
}

pub fn read_dump(path: &Path) -> Result<SolutionField> {
    let file = File::open(path).map_err(io_at(path))?;
    Ok(SolutionField::read_dump(BufReader::new(file))?)
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<SolveOutcome> {
    cfg.validate()?;
    require_domain(cfg)?;
    let (field, body) = solve_domain(cfg)?;
    prepare_out(&cfg.out)?;
    let prov = Provenance::new(cfg).with_field(&field);
    let dump = cfg.out.join("field.dump");
    write_dump(&field, &dump)?;
    let report = cfg.out.join("solve_report.json");
    write_json(&report, "solve", &prov, &body)?;
    let rays = cfg.out.join("rays.csv");
    write_text(&rays, &rays_csv(&field))?;
    Ok(SolveOutcome {
        field,
        body,
        dump,
        report,
        rays,
    })
}

// ---------------------------------------------------------------- minkowski

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaResult {
    pub beta: f64,
    pub series: PhiSeries,
    pub inequality: InequalityReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinkowskiOutcome {
    pub results: Vec<BetaResult>,
    pub files: Vec<PathBuf>,
}

/// File-name label of a `β` value, e.g. `0.333333`.
pub fn beta_label(beta: f64) -> String {
    let s = format!("{beta:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

/// `(n, k)` of the run: from the domain, else from the dump header.
fn dims(cfg: &RunConfig) -> Result<(usize, usize, Option<SolutionField>)> {
    if let Some(d) = &cfg.domain {
        return Ok((d.n, d.k, None));
    }
    match &cfg.field {
        Some(p) => {
            let f = read_dump(p)?;
            Ok((f.grid.n, f.grid.k, Some(f)))
        }
        None => Err(CliError::Config("`minkowski` needs `domain` or `field`".into())),
    }
}

pub fn minkowski_series(field: &SolutionField, betas: &[f64], taus: &[f64]) -> Result<Vec<BetaResult>> {
    let fit = asymptotics_report(field)?.gamma;
    let taus: Vec<f64> = if taus.is_empty() {
        default_levels(field).iter().map(|u| 1.0 / u).collect()
    } else {
        taus.to_vec()
    };
    let surface = field.grid.surface.clone();
    betas
        .iter()
        .map(|&beta| {
            let series = phi_series_with(field, beta, &taus, fit.affine, fit.affine_spread)?;
            let inequality = minkowski_report_with_gamma(field, &surface, beta, fit.affine)?;
            Ok(BetaResult {
                beta,
                series,
                inequality,
            })
        })
        .collect()
}

pub fn cmd_minkowski(cfg: &RunConfig) -> Result<MinkowskiOutcome> {
    cfg.validate()?;
    let (n, k, loaded) = dims(cfg)?;
    let betas = if cfg.betas.is_empty() {
        vec![(n - 2 * k) as f64]
    } else {
        cfg.betas.clone()
    };
    for &b in &betas {
        check_beta(n, k, b)?;
    }
    let field = match (loaded, &cfg.field) {
        (Some(f), _) => f,
        (None, Some(p)) => read_dump(p)?,
        (None, None) => solve_domain(cfg)?.0,
    };
    if let Some(d) = &cfg.domain {
        if (d.n, d.k) != (field.grid.n, field.grid.k) || d.surface != field.grid.surface {
            return Err(CliError::Config("`field` was solved for a different `domain`".into()));
        }
    }
    let results = minkowski_series(&field, &betas, &cfg.taus)?;
    prepare_out(&cfg.out)?;
    let prov = Provenance::new(cfg).with_field(&field);
    let mut files = Vec::new();
    for r in &results {
        let label = beta_label(r.beta);
        let csv = cfg.out.join(format!("phi_beta_{label}.csv"));
        write_text(&csv, &r.series.to_csv())?;
        let json = cfg.out.join(format!("minkowski_beta_{label}.json"));
        write_json(&json, "minkowski", &prov, r)?;
        files.push(csv);
        files.push(json);
    }
    Ok(MinkowskiOutcome { results, files })
}

// ---------------------------------------------------------------- barriers-table

#[derive(Debug, Clone, PartialEq)]
pub struct TableOutcome {
    pub csv: PathBuf,
    pub rows: usize,
}

pub fn barriers_csv(cfg: &RunConfig) -> Result<(String, usize)> {
    let (n, k) = cfg.domain.as_ref().map_or((5, 2), |d| (d.n, d.k));
    let t = &cfg.table;
    let mut out = String::from("n,k,eps,c,r,phi,phi_r,phi_rr,lambda_radial,lambda_tangential,f_eps,sigma_k\n");
    let mut rows = 0;
    for &eps in &t.eps {
        let fam = BarrierFamily::new(n, k, eps, t.c)?;
        for q in 0..t.points {
            let frac = q as f64 / (t.points - 1) as f64;
            let r = t.r_min * (t.r_max / t.r_min).powf(frac);
            let (lr, lt) = fam.eigen_pair(r);
            let fe = f_eps(n, k, eps, r)?;
            let _ = writeln!(
                out,
                "{n},{k},{eps:e},{:e},{r:.12e},{:.12e},{:.12e},{:.12e},{lr:.12e},{lt:.12e},{fe:.12e},{:.12e}",
                t.c,
                fam.value(r),
                fam.dr(r),
                fam.drr(r),
                t.c.powi(k as i32) * fe
            );
            rows += 1;
        }
    }
    Ok((out, rows))
}

pub fn cmd_barriers_table(cfg: &RunConfig) -> Result<TableOutcome> {
    cfg.validate()?;
    let (text, rows) = barriers_csv(cfg)?;
    prepare_out(&cfg.out)?;
    let csv = cfg.out.join("barriers.csv");
    write_text(&csv, &text)?;
    Ok(TableOutcome { csv, rows })
}
