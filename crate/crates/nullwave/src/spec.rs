//! Experiment description loaded from TOML and overridden from the command line.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use nullwave_core::config::{validate_config, ProblemConfig, Purpose};
use nullwave_core::modal::{project_profile, ModalState, ModeData};
use nullwave_core::C64;
use serde::{Deserialize, Serialize};

/// Which moment-problem solver produces the control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ControlPath {
    /// Minimal-norm solution through the Gram matrix.
    #[default]
    Oracle,
    /// Series over the biorthogonal family.
    Series,
}

/// Initial data in modal form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSpec {
    /// `û⁰_n = a/n^p`, `û¹_n = b/n^q`.
    Power {
        a: f64,
        p: f64,
        b: f64,
        q: f64,
    },
    /// Real coefficient lists starting at mode 1.
    Explicit {
        u0: Vec<f64>,
        u1: Vec<f64>,
    },
    Zero,
}

impl Default for DataSpec {
    fn default() -> Self {
        DataSpec::Power {
            a: 1.0,
            p: 2.0,
            b: 1.0,
            q: 1.0,
        }
    }
}

/// Lists swept by `sweep epsilon`, `degeneracy` and `ingham run`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepAxes {
    pub epsilon: Vec<f64>,
    pub alpha: Vec<f64>,
    pub modes: Vec<u32>,
    pub horizon: Vec<f64>,
}

impl Default for SweepAxes {
    fn default() -> Self {
        SweepAxes {
            epsilon: vec![1e-1, 1e-2, 1e-3, 1e-4],
            alpha: vec![0.25, 0.5, 0.75],
            modes: vec![4, 8, 12, 16],
            horizon: vec![2.0 * std::f64::consts::PI],
        }
    }
}

/// Pass thresholds used by `verify` and the `check` commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub interpolation: f64,
    pub closed_form: f64,
    pub biorthogonality: f64,
    pub oracle_residual: f64,
    pub series_residual: f64,
    pub imaginary: f64,
    pub energy: f64,
    pub ingham_agreement: f64,
    pub weak_limit_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            interpolation: 1e-6,
            closed_form: 1e-8,
            biorthogonality: 1e-4,
            oracle_residual: 1e-9,
            series_residual: 1e-4,
            imaginary: 1e-10,
            energy: 1e-12,
            ingham_agreement: 1e-10,
            weak_limit_residual: 1e-2,
        }
    }
}

/// Everything one invocation needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSpec {
    pub command: String,
    pub problem: ProblemConfig,
    pub sweep: SweepAxes,
    pub data: DataSpec,
    pub out: PathBuf,
    pub seed: u64,
    pub path: ControlPath,
    pub trials: usize,
    /// Weight exponent in the Ingham ratio; the envelope-fit value when absent.
    pub omega_weight: Option<f64>,
    pub tolerances: Tolerances,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            command: String::new(),
            problem: ProblemConfig::default(),
            sweep: SweepAxes::default(),
            data: DataSpec::default(),
            out: PathBuf::from("out"),
            seed: 0,
            path: ControlPath::Oracle,
            trials: 100,
            omega_weight: None,
            tolerances: Tolerances::default(),
        }
    }
}

impl ExperimentSpec {
    pub fn from_toml_str(s: &str) -> anyhow::Result<Self> {
        toml::from_str(s).context("parsing experiment file")
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml_str(&text)
    }

    /// Checks the sweep lists and the problem for the given purpose.
    pub fn validated(&self, purpose: Purpose) -> anyhow::Result<ExperimentSpec> {
        let mut s = self.clone();
        s.problem = validate_config(&self.problem, purpose)?;
        let axes = &s.sweep;
        if axes.epsilon.is_empty()
            || axes.alpha.is_empty()
            || axes.modes.is_empty()
            || axes.horizon.is_empty()
        {
            bail!("sweep lists must be non-empty");
        }
        if axes.modes.contains(&0) {
            bail!("mode counts must be positive");
        }
        if axes
            .epsilon
            .iter()
            .any(|e| !(e.is_finite() && (0.0..1.0).contains(e)))
        {
            bail!("swept epsilon values must lie in [0, 1)");
        }
        if axes
            .alpha
            .iter()
            .any(|a| !(a.is_finite() && (0.0..1.0).contains(a)))
        {
            bail!("swept alpha values must lie in [0, 1)");
        }
        if axes.horizon.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            bail!("swept horizons must be positive");
        }
        if s.trials == 0 {
            bail!("trials must be positive");
        }
        Ok(s)
    }

    /// Modal data on modes `1 … n_modes` with the configured profile.
    pub fn modal_data(&self) -> anyhow::Result<ModalState> {
        let n = self.problem.n_modes;
        let profile = project_profile(&self.problem.profile, n)?;
        let re = |x: f64| C64::new(x, 0.0);
        let modes: Vec<ModeData> = match &self.data {
            DataSpec::Power { a, p, b, q } => (1..=n)
                .map(|k| {
                    let kf = k as f64;
                    ModeData {
                        n: k,
                        u0: re(a / kf.powf(*p)),
                        u1: re(b / kf.powf(*q)),
                    }
                })
                .collect(),
            DataSpec::Explicit { u0, u1 } => {
                if u0.len() > n as usize || u1.len() > n as usize {
                    bail!("explicit data has more modes than n_modes = {n}");
                }
                (1..=n)
                    .map(|k| {
                        let i = k as usize - 1;
                        ModeData {
                            n: k,
                            u0: re(u0.get(i).copied().unwrap_or(0.0)),
                            u1: re(u1.get(i).copied().unwrap_or(0.0)),
                        }
                    })
                    .collect()
            }
            DataSpec::Zero => (1..=n)
                .map(|k| ModeData {
                    n: k,
                    u0: re(0.0),
                    u1: re(0.0),
                })
                .collect(),
        };
        Ok(ModalState::new(modes, profile)?)
    }
}

/// Creates `dir` and makes sure a file can be written there.
pub fn ensure_writable(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let probe = dir.join(".nullwave-write-test");
    fs::write(&probe, b"").with_context(|| format!("{} is not writable", dir.display()))?;
    fs::remove_file(&probe)?;
    Ok(())
}
