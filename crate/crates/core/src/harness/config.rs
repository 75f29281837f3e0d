//! Scenario configuration: presets for the reference experiments plus TOML
//! overrides.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::VarianceConvention;
use crate::separators::surrogate::SurrogateConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    DenoiseDemo,
    Custom,
}

impl ScenarioKind {
    pub const PRESETS: [ScenarioKind; 7] = [
        Self::Fig1,
        Self::Fig2,
        Self::Fig3,
        Self::Fig4,
        Self::Fig5,
        Self::Fig6,
        Self::DenoiseDemo,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Self::Fig1 => "fig1",
            Self::Fig2 => "fig2",
            Self::Fig3 => "fig3",
            Self::Fig4 => "fig4",
            Self::Fig5 => "fig5",
            Self::Fig6 => "fig6",
            Self::DenoiseDemo => "denoise-demo",
            Self::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::PRESETS
            .into_iter()
            .chain([Self::Custom])
            .find(|k| k.label() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario kind {s:?}")))
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Square mixing, INV and LS transforms scored against `H₁W₁`.
    Determined,
    /// Target plus full-rank noise, noise images scored against `S₂`.
    Underdetermined,
    /// Surrogate ECG cleaning.
    Denoise,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Estimator {
    Inv,
    Ls,
    Lsopt,
    Mmse,
    /// Closed-form INV prediction (identity mixing only).
    InvPred,
    /// Closed-form LS prediction (identity mixing only).
    LsPred,
}

impl Estimator {
    pub fn label(self) -> &'static str {
        match self {
            Self::Inv => "INV",
            Self::Ls => "LS",
            Self::Lsopt => "LSOPT",
            Self::Mmse => "MMSE",
            Self::InvPred => "INV_PRED",
            Self::LsPred => "LS_PRED",
        }
    }

    fn allowed_in(self, model: ModelKind) -> bool {
        match model {
            ModelKind::Determined => {
                matches!(self, Self::Inv | Self::Ls | Self::InvPred | Self::LsPred)
            }
            ModelKind::Underdetermined => matches!(self, Self::Ls | Self::Lsopt | Self::Mmse),
            ModelKind::Denoise => false,
        }
    }
}

/// A fully resolved experiment description.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub model: ModelKind,
    pub d: Vec<usize>,
    pub m: Vec<usize>,
    pub n: Vec<usize>,
    pub trials: usize,
    pub lambda1_sq: Vec<f64>,
    pub lambda2_sq: Vec<f64>,
    pub seed: u64,
    pub estimators: Vec<Estimator>,
    pub variance_convention: VarianceConvention,
    /// Apply random block scalings to the perturbed demixing matrix.
    pub rescale: bool,
    pub identity_mixing: bool,
    /// Build LS from the exact observation covariance instead of `XXᴴ/N`.
    pub exact_covariance: bool,
    pub output: Option<PathBuf>,
    pub surrogate: SurrogateConfig,
}

/// Keys accepted in a config file; anything omitted comes from the preset.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kind: Option<String>,
    model: Option<ModelKind>,
    d: Option<Vec<usize>>,
    m: Option<Vec<usize>>,
    #[serde(alias = "N")]
    n: Option<Vec<usize>>,
    trials: Option<usize>,
    lambda1_sq: Option<Vec<f64>>,
    lambda2_sq: Option<Vec<f64>>,
    seed: Option<u64>,
    estimators: Option<Vec<Estimator>>,
    variance_convention: Option<VarianceConvention>,
    rescale: Option<bool>,
    identity_mixing: Option<bool>,
    exact_covariance: Option<bool>,
    output: Option<PathBuf>,
    surrogate: Option<SurrogateConfig>,
}

pub const DEFAULT_SEED: u64 = 20_111_001;
pub const DEFAULT_TRIALS: usize = 1000;

fn decades(from_exp: i32, to_exp: i32) -> Vec<f64> {
    (from_exp..=to_exp).map(|k| 10f64.powi(k)).collect()
}

/// `10^(k/10)` for `k` in `from..=to`: a 1 dB grid.
fn db_grid(from_tenth_exp: i32, to_tenth_exp: i32) -> Vec<f64> {
    (from_tenth_exp..=to_tenth_exp)
        .map(|k| 10f64.powf(k as f64 / 10.0))
        .collect()
}

impl ScenarioConfig {
    fn base(kind: ScenarioKind, model: ModelKind) -> Self {
        Self {
            kind,
            model,
            d: vec![],
            m: vec![],
            n: vec![],
            trials: DEFAULT_TRIALS,
            lambda1_sq: vec![],
            lambda2_sq: vec![0.0],
            seed: DEFAULT_SEED,
            estimators: vec![],
            variance_convention: VarianceConvention::Total,
            rescale: true,
            identity_mixing: false,
            exact_covariance: false,
            output: None,
            surrogate: SurrogateConfig::default(),
        }
    }

    /// Parameters of the reference experiments.
    pub fn preset(kind: ScenarioKind) -> Result<Self> {
        use Estimator::*;
        let cfg = match kind {
            ScenarioKind::Fig1 => Self {
                d: vec![20],
                m: vec![5],
                n: vec![100_000],
                trials: 100,
                // λ₁ ∈ {1e-3, 3e-3, 1e-2, 3e-2, 1e-1}
                lambda1_sq: vec![1e-6, 9e-6, 1e-4, 9e-4, 1e-2],
                lambda2_sq: vec![1e-4],
                estimators: vec![Inv, Ls, InvPred, LsPred],
                rescale: false,
                identity_mixing: true,
                ..Self::base(kind, ModelKind::Determined)
            },
            ScenarioKind::Fig2 => Self {
                d: vec![5],
                m: vec![2],
                n: vec![10_000],
                lambda1_sq: db_grid(-70, -10),
                lambda2_sq: decades(-4, -1),
                estimators: vec![Inv, Ls],
                ..Self::base(kind, ModelKind::Determined)
            },
            ScenarioKind::Fig3 => Self {
                d: (2..=20).collect(),
                m: vec![1],
                n: vec![10_000],
                lambda1_sq: decades(-4, -2),
                lambda2_sq: vec![1e-3],
                estimators: vec![Inv, Ls],
                ..Self::base(kind, ModelKind::Determined)
            },
            ScenarioKind::Fig4 => Self {
                d: vec![20],
                m: (1..=19).collect(),
                n: vec![10_000],
                lambda1_sq: vec![1e-4, 1e-3],
                lambda2_sq: vec![1e-4, 1e-3],
                estimators: vec![Inv, Ls],
                ..Self::base(kind, ModelKind::Determined)
            },
            ScenarioKind::Fig5 => Self {
                d: (2..=20).collect(),
                m: vec![1],
                n: vec![10_000],
                lambda1_sq: decades(-6, -2),
                estimators: vec![Ls, Lsopt, Mmse],
                rescale: false,
                ..Self::base(kind, ModelKind::Underdetermined)
            },
            ScenarioKind::Fig6 => Self {
                d: vec![4],
                m: vec![1],
                n: vec![
                    50, 100, 200, 500, 1_000, 2_000, 5_000, 10_000, 20_000, 50_000, 100_000,
                ],
                lambda1_sq: decades(-5, -3),
                estimators: vec![Ls, Lsopt, Mmse],
                rescale: false,
                ..Self::base(kind, ModelKind::Underdetermined)
            },
            ScenarioKind::DenoiseDemo => Self {
                d: vec![3],
                m: vec![1],
                n: vec![1000],
                trials: 1,
                lambda1_sq: vec![0.0],
                rescale: false,
                ..Self::base(kind, ModelKind::Denoise)
            },
            ScenarioKind::Custom => {
                return Err(Error::Config("custom scenarios have no preset".into()));
            }
        };
        Ok(cfg)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_raw(raw)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        let kind = ScenarioKind::parse(
            raw.kind
                .as_deref()
                .ok_or_else(|| Error::Config("missing `kind`".into()))?,
        )?;
        let mut cfg = if kind == ScenarioKind::Custom {
            let model = raw
                .model
                .ok_or_else(|| Error::Config("custom scenarios need `model`".into()))?;
            let mut base = Self::base(kind, model);
            base.estimators = match model {
                ModelKind::Determined => vec![Estimator::Inv, Estimator::Ls],
                ModelKind::Underdetermined => {
                    vec![Estimator::Ls, Estimator::Lsopt, Estimator::Mmse]
                }
                ModelKind::Denoise => vec![],
            };
            base
        } else {
            if raw.model.is_some() {
                return Err(Error::Config(
                    "`model` is only accepted for custom scenarios".into(),
                ));
            }
            Self::preset(kind)?
        };
        macro_rules! take {
            ($($field:ident),*) => {$(
                if let Some(v) = raw.$field {
                    cfg.$field = v;
                }
            )*};
        }
        take!(
            d,
            m,
            n,
            trials,
            lambda1_sq,
            lambda2_sq,
            seed,
            estimators,
            variance_convention
        );
        take!(rescale, identity_mixing, exact_covariance, surrogate);
        cfg.output = raw.output.or(cfg.output);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let err = |msg: String| Err(Error::Config(msg));
        if self.trials == 0 {
            return err("`trials` must be at least 1".into());
        }
        for (name, list) in [("d", &self.d), ("m", &self.m), ("n", &self.n)] {
            if list.is_empty() {
                return err(format!("`{name}` must not be empty"));
            }
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return err(format!("`{name}` must be strictly increasing"));
            }
        }
        for (name, list) in [
            ("lambda1_sq", &self.lambda1_sq),
            ("lambda2_sq", &self.lambda2_sq),
        ] {
            if list.is_empty() {
                return err(format!("`{name}` must not be empty"));
            }
            if list.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return err(format!("`{name}` entries must be finite and nonnegative"));
            }
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return err(format!("`{name}` must be strictly increasing"));
            }
        }
        if self.model == ModelKind::Denoise {
            return Ok(());
        }
        if self.model == ModelKind::Underdetermined && self.lambda2_sq != [0.0] {
            return err("`lambda2_sq` does not apply to the underdetermined model".into());
        }
        if self.m[0] == 0 || self.m.last() >= self.d.first() {
            return err(format!(
                "every block split must satisfy 1 <= m < d (m up to {}, d from {})",
                self.m.last().unwrap(),
                self.d[0]
            ));
        }
        if self.n[0] == 0 {
            return err("`n` entries must be positive".into());
        }
        if self.estimators.is_empty() {
            return err("`estimators` must not be empty".into());
        }
        if let Some(e) = self.estimators.iter().find(|e| !e.allowed_in(self.model)) {
            return err(format!(
                "estimator {} is not available for this model",
                e.label()
            ));
        }
        let predicts = self
            .estimators
            .iter()
            .any(|e| matches!(e, Estimator::InvPred | Estimator::LsPred));
        if predicts && !self.identity_mixing {
            return err("closed-form predictions require `identity_mixing = true`".into());
        }
        if self.identity_mixing && self.model != ModelKind::Determined {
            return err("`identity_mixing` applies to the determined model only".into());
        }
        Ok(())
    }
}
