//! Solver configuration in `key = value` text form.
//!
//! ```text
//! # comments start with '#'
//! n_s = 512
//! n_theta = 64
//! grading = auto        # or a number c >= 0
//! tol_res = 1e-8
//! max_newton = 50
//! damping_floor = 1e-12 # smallest Newton step fraction
//! eps_schedule = 1e-2, 1e-3, 1e-4
//! r_schedule = 50       # empty means 50 · max ρ
//! radial_nodes = 2048
//! ```

use super::newton::NewtonOptions;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub ns: usize,
    pub ntheta: usize,
    pub grading: Option<f64>,
    pub tol_res: f64,
    pub max_newton: usize,
    pub damping_floor: f64,
    pub eps_schedule: Vec<f64>,
    pub r_schedule: Vec<f64>,
    pub radial_nodes: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            ns: 512,
            ntheta: 64,
            grading: None,
            tol_res: 1e-8,
            max_newton: 50,
            damping_floor: 2f64.powi(-40),
            eps_schedule: vec![1e-4],
            r_schedule: Vec::new(),
            radial_nodes: 2048,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Parse(format!("`{key}`: cannot parse `{v}`")))
}

fn list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| num(key, s))
        .collect()
}

impl SolverConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SolverConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "n_s" => cfg.ns = num(key, value)?,
                "n_theta" => cfg.ntheta = num(key, value)?,
                "grading" => {
                    cfg.grading = if value == "auto" { None } else { Some(num(key, value)?) }
                }
                "tol_res" => cfg.tol_res = num(key, value)?,
                "max_newton" => cfg.max_newton = num(key, value)?,
                "damping_floor" => cfg.damping_floor = num(key, value)?,
                "eps_schedule" => cfg.eps_schedule = list(key, value)?,
                "r_schedule" => cfg.r_schedule = list(key, value)?,
                "radial_nodes" => cfg.radial_nodes = num(key, value)?,
                other => {
                    return Err(Error::Parse(format!("line {}: unknown key `{other}`", lineno + 1)))
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.damping_floor > 0.0 && self.damping_floor < 1.0) {
            return Err(Error::Parse("damping_floor must lie in (0, 1)".into()));
        }
        if !(self.tol_res > 0.0) {
            return Err(Error::Parse("tol_res must be positive".into()));
        }
        if self.eps_schedule.is_empty() {
            return Err(Error::Parse("eps_schedule needs at least one entry".into()));
        }
        Ok(())
    }

    pub fn newton(&self) -> NewtonOptions {
        NewtonOptions {
            tol_res: self.tol_res,
            max_newton: self.max_newton,
            max_halvings: (1.0 / self.damping_floor).log2().ceil() as usize,
            ..Default::default()
        }
    }

    /// Canonical text form; parsing it yields the same configuration.
    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(", ");
        format!(
            "n_s = {}\nn_theta = {}\ngrading = {}\ntol_res = {:e}\nmax_newton = {}\ndamping_floor = {:e}\n\
             eps_schedule = {}\nr_schedule = {}\nradial_nodes = {}\n",
            self.ns,
            self.ntheta,
            self.grading.map_or("auto".to_string(), |c| format!("{c:e}")),
            self.tol_res,
            self.max_newton,
            self.damping_floor,
            join(&self.eps_schedule),
            join(&self.r_schedule),
            self.radial_nodes
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_round_trips() {
        let cfg = SolverConfig::parse("n_s = 128 # rows\nn_theta=33\neps_schedule = 1e-2, 1e-3\nr_schedule = 40\n").unwrap();
        assert_eq!((cfg.ns, cfg.ntheta), (128, 33));
        assert_eq!(cfg.eps_schedule, vec![1e-2, 1e-3]);
        assert_eq!(SolverConfig::parse(&cfg.to_text()).unwrap(), cfg);
        assert_eq!(cfg.newton().max_halvings, 40);
    }

    #[test]
    fn rejects_unknown_keys() {
        let err = SolverConfig::parse("n_s = 128\nspeed = fast\n").unwrap_err();
        assert!(err.to_string().contains("speed"), "{err}");
    }
}
