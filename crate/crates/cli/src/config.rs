//! Run configuration: TOML file sections overlaid by command-line flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use ma_plate_core::discretization::DomainKind;
use ma_plate_core::expr::{parse_expr, parse_f, FSpec};
use ma_plate_core::solver::{ConstraintMode, SolverConfig};

use crate::presets::{growth_preset, GrowthPreset};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Solve,
    Radial,
    Family,
    Scaling,
    CheckEl,
    CheckCompat,
    Matching,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Radial => "radial",
            Command::Family => "family",
            Command::Scaling => "scaling",
            Command::CheckEl => "check-el",
            Command::CheckCompat => "check-compat",
            Command::Matching => "matching",
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub grid: Option<String>,
    pub f: Option<String>,
    pub growth: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub init: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingSection {
    pub gamma: f64,
    /// Entries are constant expressions such as `2^-3`.
    pub h_list: Vec<String>,
    pub n_thick: usize,
    pub lame_lambda: f64,
    pub lame_mu: f64,
}

impl Default for ScalingSection {
    fn default() -> Self {
        ScalingSection {
            gamma: 1.5,
            h_list: (3..=8).map(|k| format!("2^-{k}")).collect(),
            n_thick: 3,
            lame_lambda: 0.0,
            lame_mu: 0.5,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadialSection {
    pub m: usize,
    /// Cut-off `δ` of the radial Euler–Lagrange check.
    pub el_delta: f64,
}

impl Default for RadialSection {
    fn default() -> Self {
        RadialSection { m: 2001, el_delta: 0.05 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilySection {
    pub thetas: Vec<f64>,
}

impl Default for FamilySection {
    fn default() -> Self {
        FamilySection {
            thetas: vec![0.0, 0.7, 2.1, 3.0],
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchingSection {
    pub eps: Vec<f64>,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MatchingSection {
    fn default() -> Self {
        MatchingSection {
            eps: vec![0.02, 0.01, 0.005],
            tol: 1e-10,
            max_iter: 30,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompatSection {
    pub tol: f64,
}

impl Default for CompatSection {
    fn default() -> Self {
        CompatSection { tol: 1e-8 }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub run: RunSection,
    pub solver: SolverConfig,
    pub scaling: ScalingSection,
    pub radial: RadialSection,
    pub family: FamilySection,
    pub matching: MatchingSection,
    pub compat: CompatSection,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        toml::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
    }
}

/// Overrides given on the command line.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub f: Option<String>,
    pub grid: Option<String>,
    pub gamma: Option<f64>,
    pub h_list: Option<String>,
    pub mode: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub growth: Option<String>,
    pub init: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitChoice {
    /// Radial lift when `f` is radial, positive and admissible on the disk.
    Auto,
    Radial,
    Default,
    Saddle(f64),
}

impl FromStr for InitChoice {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "auto" => Ok(InitChoice::Auto),
            "radial" => Ok(InitChoice::Radial),
            "default" => Ok(InitChoice::Default),
            _ => match s.strip_prefix("saddle:").map(str::parse::<f64>) {
                Some(Ok(t)) if t.is_finite() => Ok(InitChoice::Saddle(t)),
                _ => Err(CliError::Invalid(format!(
                    "unknown init '{s}' (auto|radial|default|saddle:<theta>)"
                ))),
            },
        }
    }
}

/// Fully validated configuration of one run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub domain: DomainKind,
    pub n: usize,
    pub f: FSpec,
    pub solver: SolverConfig,
    pub growth: GrowthPreset,
    pub out: PathBuf,
    pub seed: u64,
    pub init: InitChoice,
    pub gamma: f64,
    pub h_list: Vec<f64>,
    pub file: FileConfig,
}

pub fn parse_grid(s: &str) -> Result<(DomainKind, usize), CliError> {
    let (kind, n) = s
        .split_once(':')
        .ok_or_else(|| CliError::Invalid(format!("grid '{s}' is not <kind>:<n>")))?;
    let kind = DomainKind::from_str(kind)?;
    let n = n
        .parse::<usize>()
        .map_err(|_| CliError::Invalid(format!("grid size '{n}' is not a positive integer")))?;
    Ok((kind, n))
}

/// Comma-separated constant expressions, e.g. `2^-3,2^-4,0.01`.
pub fn parse_h_list(items: &[&str]) -> Result<Vec<f64>, CliError> {
    items
        .iter()
        .map(|s| {
            let e = parse_expr(s.trim())?;
            let h = e.eval([0.0, 0.0])?;
            if !e.is_radial() || e.eval([1.0, 0.0])? != h {
                return Err(CliError::Invalid(format!("h entry '{s}' is not a constant")));
            }
            Ok(h)
        })
        .collect()
}

impl RunConfig {
    pub fn resolve(command: Command, o: &Overrides) -> Result<Self, CliError> {
        let file = match &o.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let run = &file.run;
        let grid = o.grid.clone().or(run.grid.clone()).unwrap_or_else(|| "disk:129".into());
        let (domain, n) = parse_grid(&grid)?;
        let f = parse_f(&o.f.clone().or(run.f.clone()).unwrap_or_else(|| "const:1".into()))?;
        let mut solver = file.solver.clone();
        if let Some(m) = &o.mode {
            solver.mode = ConstraintMode::from_str(m)?;
        }
        solver.validate()?;
        let growth = growth_preset(&o.growth.clone().or(run.growth.clone()).unwrap_or_else(|| "paraboloid".into()))?;
        let out = o.out.clone().or(run.out.clone()).unwrap_or_else(|| PathBuf::from("ma-plate-out"));
        let seed = o.seed.or(run.seed).unwrap_or(0);
        let init = o.init.clone().or(run.init.clone()).unwrap_or_else(|| "auto".into()).parse()?;
        let gamma = o.gamma.unwrap_or(file.scaling.gamma);
        let h_list = match &o.h_list {
            Some(s) => parse_h_list(&s.split(',').collect::<Vec<_>>())?,
            None => parse_h_list(&file.scaling.h_list.iter().map(String::as_str).collect::<Vec<_>>())?,
        };
        Ok(RunConfig {
            command,
            domain,
            n,
            f,
            solver,
            growth,
            out,
            seed,
            init,
            gamma,
            h_list,
            file,
        })
    }
}
