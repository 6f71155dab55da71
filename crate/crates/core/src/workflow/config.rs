use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Which interaction terms survive before mapping.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum InteractionMode {
    #[serde(rename = "TB")]
    TightBinding,
    #[serde(rename = "U")]
    OnSite,
    #[serde(rename = "V")]
    InterSite,
    #[default]
    #[serde(rename = "U+V")]
    Full,
}

impl InteractionMode {
    pub fn keeps_u(self) -> bool {
        matches!(self, InteractionMode::OnSite | InteractionMode::Full)
    }

    pub fn keeps_v(self) -> bool {
        matches!(self, InteractionMode::InterSite | InteractionMode::Full)
    }
}

impl fmt::Display for InteractionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InteractionMode::TightBinding => "TB",
            InteractionMode::OnSite => "U",
            InteractionMode::InterSite => "V",
            InteractionMode::Full => "U+V",
        })
    }
}

impl std::str::FromStr for InteractionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "TB" => Ok(InteractionMode::TightBinding),
            "U" => Ok(InteractionMode::OnSite),
            "V" => Ok(InteractionMode::InterSite),
            "U+V" => Ok(InteractionMode::Full),
            _ => Err(Error::InvalidInput(format!("unknown mode {s:?}; expected TB, U, V or U+V"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Fci,
    Hci,
    Sqd,
    Extsqd,
}

impl Solver {
    pub fn label(self) -> &'static str {
        match self {
            Solver::Fci => "fci",
            Solver::Hci => "hci",
            Solver::Sqd => "sqd",
            Solver::Extsqd => "extsqd",
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fci" => Ok(Solver::Fci),
            "hci" => Ok(Solver::Hci),
            "sqd" => Ok(Solver::Sqd),
            "extsqd" => Ok(Solver::Extsqd),
            _ => Err(Error::InvalidInput(format!(
                "unknown solver {s:?}; expected fci, hci, sqd or extsqd"
            ))),
        }
    }
}

/// Orbitals used for the charged sectors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceChoice {
    /// Neutral-sector orbitals, filled by aufbau.
    #[default]
    Shared,
    /// A separate mean-field solution per sector.
    PerSector,
}

fn default_fractions() -> Vec<f64> {
    vec![0.1, 0.25, 0.5, 0.75, 1.0]
}

fn default_threshold() -> f64 {
    1e-4
}

fn default_levels() -> Vec<u8> {
    vec![1]
}

fn default_shots() -> u64 {
    2_500_000
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_layers() -> usize {
    1
}

fn default_epsilons() -> Vec<f64> {
    vec![1e-2, 1e-4, 1e-6, 1e-8]
}

fn default_tol() -> f64 {
    1e-9
}

fn default_hci_cap() -> usize {
    1_000_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkflowConfig {
    pub lattice_path: PathBuf,
    pub n_electrons: usize,
    #[serde(default)]
    pub mode: InteractionMode,
    pub solvers: Vec<Solver>,
    #[serde(default = "default_fractions")]
    pub fractions: Vec<f64>,
    #[serde(default = "default_threshold")]
    pub extsqd_threshold: f64,
    #[serde(default = "default_levels")]
    pub extsqd_levels: Vec<u8>,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_minus: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_neutral: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_plus: Option<PathBuf>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material: Option<String>,
    /// LUCJ layers for simulated sampling.
    #[serde(default = "default_layers")]
    pub layers: usize,
    #[serde(default = "default_epsilons")]
    pub hci_epsilons: Vec<f64>,
    #[serde(default = "default_hci_cap")]
    pub hci_max_determinants: usize,
    /// Map the on-site term with coefficient `2U` instead of `U`.
    #[serde(default)]
    pub literal_2u: bool,
    /// Put the N±1 spin change in the beta channel.
    #[serde(default)]
    pub spin_flip: bool,
    #[serde(default)]
    pub reference: ReferenceChoice,
    #[serde(default = "default_tol")]
    pub davidson_tol: f64,
}

impl WorkflowConfig {
    /// Minimal configuration with defaults for everything optional.
    pub fn new(lattice_path: impl Into<PathBuf>, n_electrons: usize, solvers: Vec<Solver>) -> Self {
        WorkflowConfig {
            lattice_path: lattice_path.into(),
            n_electrons,
            mode: InteractionMode::default(),
            solvers,
            fractions: default_fractions(),
            extsqd_threshold: default_threshold(),
            extsqd_levels: default_levels(),
            shots: default_shots(),
            seed: 0,
            samples_minus: None,
            samples_neutral: None,
            samples_plus: None,
            out_dir: default_out_dir(),
            material: None,
            layers: default_layers(),
            hci_epsilons: default_epsilons(),
            hci_max_determinants: default_hci_cap(),
            literal_2u: false,
            spin_flip: false,
            reference: ReferenceChoice::default(),
            davidson_tol: default_tol(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::validation("config", m));
        if self.solvers.is_empty() {
            return bad("solvers must name at least one of fci, hci, sqd, extsqd".into());
        }
        if self.fractions.is_empty() || self.fractions.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) {
            return bad("fractions must be a nonempty list in (0, 1]".into());
        }
        if self.fractions.windows(2).any(|w| w[1] <= w[0]) {
            return bad("fractions must be strictly increasing".into());
        }
        if !(self.extsqd_threshold >= 0.0) {
            return bad("extsqd_threshold must be nonnegative".into());
        }
        crate::determinant::ExcitationLevels::from_ranks(&self.extsqd_levels)
            .map_err(|e| Error::validation("config: extsqd_levels", e.to_string()))?;
        if self.shots == 0 {
            return bad("shots must be at least 1".into());
        }
        if self.layers == 0 {
            return bad("layers must be at least 1".into());
        }
        if !(self.davidson_tol > 0.0) {
            return bad("davidson_tol must be positive".into());
        }
        crate::selci::SelectionSchedule::new(self.hci_epsilons.clone(), self.hci_max_determinants)
            .map_err(|e| Error::validation("config: hci_epsilons", e.to_string()))?;
        Ok(())
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.lattice_path);
        fix(&mut self.out_dir);
        for p in [&mut self.samples_minus, &mut self.samples_neutral, &mut self.samples_plus]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
    }
}

/// Parses TOML text; relative paths are resolved against `base`.
pub fn parse_config(text: &str, origin: &str, base: &Path) -> Result<WorkflowConfig> {
    let mut cfg: WorkflowConfig = toml::from_str(text).map_err(|e| {
        let at = e
            .span()
            .map(|s| {
                let line = text[..s.start].matches('\n').count() + 1;
                format!("{origin}:{line}")
            })
            .unwrap_or_else(|| origin.to_string());
        Error::parse(at, e.message().to_string())
    })?;
    cfg.resolve(base);
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<WorkflowConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, &path.display().to_string(), base)
}
