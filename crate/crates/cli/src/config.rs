//! Run configuration: line-oriented `key = value` text.
//!
//! ```text
//! domain = n=5 k=2 rho = 1 + 0.1*cos(2*theta)
//! solver_config = solver.cfg     # relative to this file
//! n_s = 256                      # inline solver keys override the file
//! seed = 7
//! betas = 1/3, 1
//! taus = -20, -5, -1
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use khlab_core::barriers::check_dimensions;
use khlab_core::geometry::{parse_domain_spec, DomainSpec};
use khlab_core::solver::SolverConfig;

use crate::error::{io_at, CliError, Result};

const SOLVER_KEYS: [&str; 9] = [
    "n_s",
    "n_theta",
    "grading",
    "tol_res",
    "max_newton",
    "damping_floor",
    "eps_schedule",
    "r_schedule",
    "radial_nodes",
];

pub const DEFAULT_SEED: u64 = 20_240_607;

/// Pass thresholds of the identity suites.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    /// Smallest allowed Kato gap is `−kato`.
    pub kato: f64,
    pub maclaurin: f64,
    /// Relative error allowed against finite-difference oracles.
    pub fd: f64,
    /// `|gap|` allowed in the radial equality case.
    pub radial: f64,
    /// Allowed relative deviation of the divergence convergence ratio from 4.
    pub divergence: f64,
    pub log: f64,
    pub euler: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            kato: 1e-10,
            maclaurin: 1e-12,
            fd: 1e-6,
            radial: 1e-12,
            divergence: 0.2,
            log: 1e-12,
            euler: 1e-10,
        }
    }
}

/// Sampling of `barriers-table`.
#[derive(Debug, Clone, PartialEq)]
pub struct TableOptions {
    pub eps: Vec<f64>,
    pub c: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            eps: vec![0.0, 1e-4, 1e-2],
            c: 1.0,
            r_min: 1.0,
            r_max: 100.0,
            points: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub domain: Option<DomainSpec>,
    pub solver: SolverConfig,
    pub out: PathBuf,
    pub seed: u64,
    /// `None` runs every suite.
    pub suite: Option<String>,
    pub samples: Option<usize>,
    pub betas: Vec<f64>,
    pub taus: Vec<f64>,
    /// Existing field dump for `minkowski`.
    pub field: Option<PathBuf>,
    pub tolerances: Tolerances,
    pub table: TableOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            domain: None,
            solver: SolverConfig::default(),
            out: PathBuf::from("khlab-out"),
            seed: DEFAULT_SEED,
            suite: None,
            samples: None,
            betas: Vec::new(),
            taus: Vec::new(),
            field: None,
            tolerances: Tolerances::default(),
            table: TableOptions::default(),
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub suite: Option<String>,
    pub samples: Option<usize>,
    pub betas: Option<String>,
}

fn bad(key: &str, value: &str) -> CliError {
    CliError::Config(format!("`{key}`: cannot parse `{value}`"))
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| bad(key, value))
}

/// A real number, also accepting `a/b`.
fn real(key: &str, value: &str) -> Result<f64> {
    let v = value.trim();
    match v.split_once('/') {
        Some((a, b)) => {
            let (a, b): (f64, f64) = (number(key, a.trim())?, number(key, b.trim())?);
            if b == 0.0 {
                return Err(bad(key, value));
            }
            Ok(a / b)
        }
        None => number(key, v),
    }
}

pub fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| real(key, s))
        .collect()
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("`{key}` must be positive and finite, got {v}")))
    }
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(", ")
}

impl RunConfig {
    /// Parses config text; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut solver_file: Option<PathBuf> = None;
        let mut solver_inline = String::new();
        let mut tol = Tolerances::default();
        let mut table = TableOptions::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "domain" => cfg.domain = Some(parse_domain_spec(value)?),
                "solver_config" => solver_file = Some(base.join(value)),
                k if SOLVER_KEYS.contains(&k) => {
                    let _ = writeln!(solver_inline, "{k} = {value}");
                }
                "out" => cfg.out = base.join(value),
                "seed" => cfg.seed = number(key, value)?,
                "suite" => cfg.suite = Some(value.to_string()),
                "samples" => cfg.samples = Some(number(key, value)?),
                "betas" => cfg.betas = parse_list(key, value)?,
                "taus" => cfg.taus = parse_list(key, value)?,
                "field" => cfg.field = Some(base.join(value)),
                "tol_kato" => tol.kato = real(key, value)?,
                "tol_maclaurin" => tol.maclaurin = real(key, value)?,
                "tol_fd" => tol.fd = real(key, value)?,
                "tol_radial" => tol.radial = real(key, value)?,
                "tol_divergence" => tol.divergence = real(key, value)?,
                "tol_log" => tol.log = real(key, value)?,
                "tol_euler" => tol.euler = real(key, value)?,
                "table_eps" => table.eps = parse_list(key, value)?,
                "table_c" => table.c = real(key, value)?,
                "table_r_min" => table.r_min = real(key, value)?,
                "table_r_max" => table.r_max = real(key, value)?,
                "table_points" => table.points = number(key, value)?,
                other => {
                    return Err(CliError::Config(format!("line {}: unknown key `{other}`", lineno + 1)))
                }
            }
        }
        let mut solver_text = match &solver_file {
            Some(p) => std::fs::read_to_string(p).map_err(io_at(p))?,
            None => String::new(),
        };
        if !solver_text.is_empty() && !solver_text.ends_with('\n') {
            solver_text.push('\n');
        }
        solver_text.push_str(&solver_inline);
        cfg.solver = SolverConfig::parse(&solver_text)?;
        cfg.tolerances = tol;
        cfg.table = table;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_at(path))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(s) = &o.suite {
            self.suite = Some(s.clone());
        }
        if let Some(n) = o.samples {
            self.samples = Some(n);
        }
        if let Some(b) = &o.betas {
            self.betas = parse_list("beta", b)?;
        }
        Ok(())
    }

    /// Checks everything that can be checked without numerics.
    pub fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        for (key, v) in [
            ("tol_kato", t.kato),
            ("tol_maclaurin", t.maclaurin),
            ("tol_fd", t.fd),
            ("tol_radial", t.radial),
            ("tol_divergence", t.divergence),
            ("tol_log", t.log),
            ("tol_euler", t.euler),
        ] {
            positive(key, v)?;
        }
        if t.divergence >= 1.0 {
            return Err(CliError::Config(format!("`tol_divergence` must be below 1, got {}", t.divergence)));
        }
        if let Some(d) = &self.domain {
            check_dimensions(d.n, d.k)?;
        }
        if let Some(s) = &self.suite {
            if s != "all" && !crate::suites::SUITES.contains(&s.as_str()) {
                return Err(CliError::Config(format!(
                    "unknown suite `{s}` (expected one of {})",
                    crate::suites::SUITES.join(", ")
                )));
            }
        }
        if self.samples == Some(0) {
            return Err(CliError::Config("`samples` must be at least 1".into()));
        }
        if let Some(&b) = self.betas.iter().find(|b| !b.is_finite()) {
            return Err(CliError::Config(format!("β = {b} is not finite")));
        }
        if let Some(&tau) = self.taus.iter().find(|t| !(**t <= -1.0)) {
            return Err(CliError::Config(format!("τ = {tau} must be ≤ −1")));
        }
        let tb = &self.table;
        positive("table_c", tb.c)?;
        positive("table_r_min", tb.r_min)?;
        if !(tb.r_max > tb.r_min) || !tb.r_max.is_finite() {
            return Err(CliError::Config("`table_r_max` must exceed `table_r_min`".into()));
        }
        if tb.points < 2 {
            return Err(CliError::Config("`table_points` must be at least 2".into()));
        }
        if tb.eps.is_empty() || tb.eps.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
            return Err(CliError::Config("`table_eps` needs finite entries ≥ 0".into()));
        }
        Ok(())
    }

    /// The selected suite, or `None` for all of them.
    pub fn selected_suite(&self) -> Option<&str> {
        self.suite.as_deref().filter(|s| *s != "all")
    }

    /// Canonical text of every setting that influences results (the output
    /// directory is left out).
    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        if let Some(d) = &self.domain {
            let _ = writeln!(s, "domain = {}", d.to_text());
        }
        s.push_str(&self.solver.to_text());
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "suite = {}", self.suite.as_deref().unwrap_or("all"));
        if let Some(n) = self.samples {
            let _ = writeln!(s, "samples = {n}");
        }
        let _ = writeln!(s, "betas = {}", fmt_list(&self.betas));
        let _ = writeln!(s, "taus = {}", fmt_list(&self.taus));
        if let Some(f) = &self.field {
            let _ = writeln!(s, "field = {}", f.display());
        }
        let t = &self.tolerances;
        let _ = writeln!(
            s,
            "tol_kato = {:e}\ntol_maclaurin = {:e}\ntol_fd = {:e}\ntol_radial = {:e}\n\
             tol_divergence = {:e}\ntol_log = {:e}\ntol_euler = {:e}",
            t.kato, t.maclaurin, t.fd, t.radial, t.divergence, t.log, t.euler
        );
        let tb = &self.table;
        let _ = writeln!(
            s,
            "table_eps = {}\ntable_c = {:e}\ntable_r_min = {:e}\ntable_r_max = {:e}\ntable_points = {}",
            fmt_list(&tb.eps),
            tb.c,
            tb.r_min,
            tb.r_max,
            tb.points
        );
        s
    }
}
