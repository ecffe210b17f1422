use serde::{Deserialize, Serialize};

use crate::closedform::CaseTag;
use crate::dynamics::EntropySeries;
use crate::ensembles::BipartiteDims;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// `S_L⁽ⁿ⁾` of an evolved product state, `n = 1..=n_max`.
    EpCurve,
    /// Operator entanglement of `Uⁿ`, `n = 1..=n_max`.
    OpentCurve,
    /// `|tr Uⁿ|²`, `n = 1..=n_max`.
    FormFactor,
    /// `|tr Uⁿ|⁴`, `n = 1..=n_max`.
    FourthMoment,
    /// Infinite-time average entropy, one row.
    Asymptotic,
}

impl ExperimentKind {
    pub fn is_curve(&self) -> bool {
        !matches!(self, ExperimentKind::Asymptotic)
    }

    pub fn needs_state(&self) -> bool {
        matches!(self, ExperimentKind::EpCurve | ExperimentKind::Asymptotic)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    Cue,
    Coe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateMode {
    /// One product state shared by all samples.
    #[serde(rename = "fixed")]
    FixedProduct,
    /// Fresh complex product state per sample.
    #[serde(rename = "random-complex")]
    RandomComplexProduct,
    /// Fresh real product state per sample.
    #[serde(rename = "random-real")]
    RandomRealProduct,
    None,
}

/// Declarative description of one Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub ensemble: Ensemble,
    pub state_mode: StateMode,
    pub d_a: usize,
    pub d_b: usize,
    pub n_max: u64,
    pub samples: u64,
    pub master_seed: u64,
    /// Terms in the direct time average used when the spectral formula
    /// rejects a degenerate spectrum.
    pub time_average_n: u64,
    /// With `state_mode = fixed`: `None` uses `|0⟩⊗|0⟩`, `Some(seed)` draws the
    /// fixed state once (real for COE, complex for CUE).
    #[serde(default)]
    pub fixed_state_seed: Option<u64>,
}

pub const DEFAULT_TIME_AVERAGE_N: u64 = 100_000;

impl ExperimentConfig {
    pub fn new(
        kind: ExperimentKind,
        ensemble: Ensemble,
        state_mode: StateMode,
        d_a: usize,
        d_b: usize,
    ) -> Self {
        Self {
            kind,
            ensemble,
            state_mode,
            d_a,
            d_b,
            n_max: if kind.is_curve() {
                2 * (d_a * d_b) as u64
            } else {
                1
            },
            samples: 100_000,
            master_seed: 0,
            time_average_n: DEFAULT_TIME_AVERAGE_N,
            fixed_state_seed: None,
        }
    }

    pub fn with_samples(mut self, samples: u64) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_n_max(mut self, n_max: u64) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn dims(&self) -> Result<BipartiteDims> {
        BipartiteDims::new(self.d_a, self.d_b)
    }

    pub fn validate(&self) -> Result<()> {
        self.dims().map_err(|e| Error::Config(e.to_string()))?;
        if self.samples < 2 {
            return Err(Error::Config(format!(
                "samples must be ≥ 2, got {}",
                self.samples
            )));
        }
        if self.kind.is_curve() && self.n_max == 0 {
            return Err(Error::Config("n_max must be ≥ 1".into()));
        }
        if self.time_average_n == 0 {
            return Err(Error::Config("time_average_n must be ≥ 1".into()));
        }
        match (self.kind.needs_state(), self.state_mode) {
            (true, StateMode::None) => Err(Error::Config(format!(
                "{:?} needs an initial-state mode",
                self.kind
            ))),
            (false, mode) if mode != StateMode::None => Err(Error::Config(format!(
                "{:?} takes no initial state (got {:?})",
                self.kind, mode
            ))),
            _ => Ok(()),
        }
    }

    /// Which entangling-power setting an ep-curve or asymptotic run samples.
    pub fn case(&self) -> Option<CaseTag> {
        if !self.kind.needs_state() {
            return None;
        }
        match (self.ensemble, self.state_mode) {
            (_, StateMode::None) => None,
            // Haar invariance makes every product state equivalent under CUE.
            (Ensemble::Cue, _) => Some(CaseTag::CueComplex),
            (Ensemble::Coe, StateMode::RandomComplexProduct) => Some(CaseTag::CoeComplex),
            (Ensemble::Coe, StateMode::FixedProduct | StateMode::RandomRealProduct) => {
                Some(CaseTag::CoeReal)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    /// Iteration count; `-1` marks the asymptotic row.
    pub n: i64,
    pub mean: f64,
    pub stderr: f64,
    pub count: u64,
}

pub const ASYMPTOTIC_ROW: i64 = -1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub wall_seconds: f64,
    pub library_version: String,
    pub degeneracy_fallbacks: u64,
    #[serde(default)]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub metadata: Metadata,
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn row(&self, n: i64) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.n == n)
    }

    /// Root-mean-square of the per-row standard errors.
    pub fn pooled_stderr(&self) -> f64 {
        let m = self.rows.len() as f64;
        (self.rows.iter().map(|r| r.stderr * r.stderr).sum::<f64>() / m).sqrt()
    }

    /// Row means as a series over `n` (curve kinds only).
    pub fn series(&self) -> EntropySeries {
        EntropySeries {
            n_values: self
                .rows
                .iter()
                .filter(|r| r.n > 0)
                .map(|r| r.n as u64)
                .collect(),
            entropies: self
                .rows
                .iter()
                .filter(|r| r.n > 0)
                .map(|r| r.mean)
                .collect(),
        }
    }
}

/// `(mean − target)/stderr`.
pub fn z_score(observed_mean: f64, observed_stderr: f64, target: f64) -> Result<f64> {
    if !observed_stderr.is_finite() || observed_stderr <= 0.0 {
        return Err(Error::ZeroStdErr);
    }
    Ok((observed_mean - target) / observed_stderr)
}
