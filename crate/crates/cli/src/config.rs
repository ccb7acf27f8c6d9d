//! Model selection, range parsing and the echoed run configuration.

use std::path::PathBuf;

use serde::Serialize;

use redset::hermitian::{PauliTwoBodyHamiltonian, hamiltonian_from_json};
use redset::xy::xy_hamiltonian;

use crate::CliError;

pub const CHAIN_SITES: (usize, usize) = (3, 16);
pub const RELAXATION_LEVELS: (usize, usize) = (2, 6);
pub const BOND_DIMS: (usize, usize) = (1, 4);

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Xy { gamma: f64 },
    Heisenberg,
    Zz,
    File { path: PathBuf },
}

impl ModelSpec {
    pub fn from_flags(model: &str, gamma: Option<f64>, hamiltonian: Option<PathBuf>) -> Result<Self, CliError> {
        match model {
            "xy" => {
                let gamma = gamma.ok_or_else(|| CliError::Input("model xy needs --gamma".into()))?;
                if !(gamma.abs() <= 1.0) {
                    return Err(CliError::Input(format!("gamma {gamma} outside [-1, 1]")));
                }
                Ok(ModelSpec::Xy { gamma })
            }
            "heisenberg" => Ok(ModelSpec::Heisenberg),
            "zz" => Ok(ModelSpec::Zz),
            "file" => {
                let path = hamiltonian.ok_or_else(|| CliError::Input("model file needs --hamiltonian".into()))?;
                Ok(ModelSpec::File { path })
            }
            other => Err(CliError::Input(format!("unknown model {other:?}; expected xy, heisenberg, zz or file"))),
        }
    }

    pub fn hamiltonian(&self) -> Result<PauliTwoBodyHamiltonian, CliError> {
        Ok(match self {
            ModelSpec::Xy { gamma } => xy_hamiltonian(*gamma),
            ModelSpec::Heisenberg => PauliTwoBodyHamiltonian::heisenberg(),
            ModelSpec::Zz => PauliTwoBodyHamiltonian::zz(),
            ModelSpec::File { path } => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                hamiltonian_from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
            }
        })
    }

    pub fn label(&self) -> String {
        match self {
            ModelSpec::Xy { .. } => "xy".into(),
            ModelSpec::Heisenberg => "heisenberg".into(),
            ModelSpec::Zz => "zz".into(),
            ModelSpec::File { path } => format!("file:{}", path.display()),
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match self {
            ModelSpec::Xy { gamma } => Some(*gamma),
            _ => None,
        }
    }
}

/// `"12"`, `"4,6,8"`, `"4:12"` or `"4:12:2"`, inclusive.
pub fn parse_usize_range(text: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Input(format!("bad integer range {text:?}"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    if text.contains(',') {
        return text.split(',').map(num).collect();
    }
    let parts: Vec<&str> = text.split(':').collect();
    match parts[..] {
        [one] => Ok(vec![num(one)?]),
        [a, b] | [a, b, _] => {
            let (a, b) = (num(a)?, num(b)?);
            let step = if parts.len() == 3 { num(parts[2])? } else { 1 };
            if step == 0 || a > b {
                return Err(bad());
            }
            Ok((a..=b).step_by(step).collect())
        }
        _ => Err(bad()),
    }
}

/// `"0.5"`, `"0,0.5,0.9"` or `"start:stop:step"` with the endpoint included.
pub fn parse_f64_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Input(format!("bad grid {text:?}"));
    let num = |s: &str| s.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad);
    if text.contains(',') {
        return text.split(',').map(num).collect();
    }
    let parts: Vec<&str> = text.split(':').collect();
    match parts[..] {
        [one] => Ok(vec![num(one)?]),
        [a, b, s] => {
            let (a, b, s) = (num(a)?, num(b)?, num(s)?);
            if !(s > 0.0) || a > b {
                return Err(bad());
            }
            let count = ((b - a) / s + 1e-9).floor() as usize;
            Ok((0..=count).map(|k| if k == count && ((a + k as f64 * s) - b).abs() < 1e-9 * s { b } else { a + k as f64 * s }).collect())
        }
        _ => Err(bad()),
    }
}

pub fn check_within(name: &str, values: &[usize], (lo, hi): (usize, usize)) -> Result<(), CliError> {
    match values.iter().find(|v| !(lo..=hi).contains(*v)) {
        Some(v) => Err(CliError::Input(format!("{name} value {v} outside {lo}..={hi}"))),
        None => Ok(()),
    }
}

/// Everything that determines the numbers in a `bounds` report.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub open_n: Vec<usize>,
    pub ring_n: Vec<usize>,
    pub marginal_n: Vec<usize>,
    pub mps_d: Vec<usize>,
    pub seed: u64,
    pub restarts: usize,
    pub max_iter: usize,
    pub relaxation_tol: f64,
    pub tol_feas: f64,
    pub dykstra_max_iter: usize,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check_within("open N", &self.open_n, CHAIN_SITES)?;
        check_within("ring N", &self.ring_n, CHAIN_SITES)?;
        check_within("marginal N", &self.marginal_n, RELAXATION_LEVELS)?;
        check_within("MPS D", &self.mps_d, BOND_DIMS)?;
        if self.restarts == 0 || self.max_iter == 0 || self.dykstra_max_iter == 0 {
            return Err(CliError::Input("restarts and iteration budgets must be positive".into()));
        }
        if !(self.relaxation_tol > 0.0) || !(self.tol_feas > 0.0) {
            return Err(CliError::Input("tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn echo(&self) -> String {
        serde_json::to_string(self).expect("serializing plain data")
    }
}
