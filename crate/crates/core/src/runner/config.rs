//! Scenario files.
//!
//! A scenario is a TOML document. Powers and gains may be given linearly or in
//! dB through a `_db` suffixed key (`total_power_db = 0` is 1 W); giving both
//! forms of the same quantity is an error. Rates are bits/s/Hz.
//!
//! ```toml
//! schema_version = 1
//! trials = 100
//! seed = 42
//! pu_power_per_subcarrier = 1.0
//!
//! [system]
//! n_subcarriers = 16
//! noise_power_db = -10
//! total_power = 1.0
//! target_ber = 1e-3
//! modulation = "mqam"        # or "mpsk"
//!
//! [[pus]]
//! omega = "contiguous"       # or an explicit list such as [0, 1, 2, 3]
//! alpha = 0.2                # Pr(OFF next | ON)
//! beta = 0.3                 # Pr(ON next | OFF)
//! rate_floor = 8.0
//!
//! [[sus]]
//! relay_fraction = 0.1
//!
//! [fading]
//! distribution = "rayleigh"  # or "fixed"
//! pp = 1.0                   # mean-square gain per link type
//! ss = 1.0
//! ps_db = -10
//! sp_db = -10
//!
//! [solver]                   # every key optional
//! epsilon = 1e-12
//!
//! [sweep]                    # optional
//! parameter = "total_power"  # or "rate_floor" (applied to every PU)
//! values = [0.25, 0.5, 1.0, 2.0]
//! ```
//!
//! `omega = "contiguous"` gives PU `j` of `M` the block
//! `[j N / M, (j + 1) N / M)`.

use std::path::Path;

use serde::Deserialize;

use crate::model::{Modulation, PuProfile, SuProfile, SystemParams};
use crate::power::SolverConfig;
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fading {
    Rayleigh,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    TotalPower,
    RateFloor,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::TotalPower => "total_power",
            SweepParameter::RateFloor => "rate_floor",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub n_subcarriers: usize,
    pub noise_power: f64,
    pub total_power: f64,
    pub target_ber: f64,
    pub modulation: Modulation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PuSpec {
    pub omega: Vec<usize>,
    pub alpha: f64,
    pub beta: f64,
    pub rate_floor: f64,
}

/// Mean-square gain `E|H|^2` of each link type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGains {
    pub pp: f64,
    pub ss: f64,
    pub ps: f64,
    pub sp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FadingSpec {
    pub distribution: Fading,
    pub mean_gain: LinkGains,
}

/// Optional overrides of [`SolverConfig::for_problem`] defaults.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOverrides {
    pub eta: Option<f64>,
    pub gamma: Option<f64>,
    pub epsilon: Option<f64>,
    pub max_outer_iters: Option<usize>,
    pub max_inner_iters: Option<usize>,
    pub max_bisect_iters: Option<usize>,
    pub bisect_tol: Option<f64>,
    pub p_lower: Option<f64>,
    pub p_upper: Option<f64>,
    pub mu_ceiling: Option<f64>,
    pub budget_tol: Option<f64>,
    pub scan_points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub system: SystemSpec,
    pub pus: Vec<PuSpec>,
    pub sus: Vec<SuProfile>,
    pub fading: FadingSpec,
    pub pu_power_per_subcarrier: f64,
    pub trials: usize,
    pub seed: u64,
    pub solver: SolverOverrides,
    pub sweep: Option<Sweep>,
}

// --- raw file layout -------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: u32,
    trials: usize,
    seed: u64,
    pu_power_per_subcarrier: Option<f64>,
    pu_power_per_subcarrier_db: Option<f64>,
    system: RawSystem,
    pus: Vec<RawPu>,
    sus: Vec<RawSu>,
    fading: RawFading,
    #[serde(default)]
    solver: SolverOverrides,
    sweep: Option<Sweep>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    n_subcarriers: usize,
    noise_power: Option<f64>,
    noise_power_db: Option<f64>,
    total_power: Option<f64>,
    total_power_db: Option<f64>,
    target_ber: f64,
    modulation: Modulation,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawOmega {
    Indices(Vec<usize>),
    Layout(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPu {
    omega: RawOmega,
    alpha: f64,
    beta: f64,
    rate_floor: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSu {
    relay_fraction: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFading {
    distribution: Fading,
    pp: Option<f64>,
    pp_db: Option<f64>,
    ss: Option<f64>,
    ss_db: Option<f64>,
    ps: Option<f64>,
    ps_db: Option<f64>,
    sp: Option<f64>,
    sp_db: Option<f64>,
}

fn linear_or_db(name: &str, linear: Option<f64>, db: Option<f64>, default: Option<f64>) -> Result<f64> {
    match (linear, db) {
        (Some(_), Some(_)) => Err(Error::Config(format!(
            "both `{name}` and `{name}_db` are set; keep one"
        ))),
        (Some(v), None) => Ok(v),
        (None, Some(d)) => Ok(10f64.powf(d / 10.0)),
        (None, None) => default.ok_or_else(|| Error::Config(format!("missing `{name}` (or `{name}_db`)"))),
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if raw.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                raw.schema_version
            )));
        }
        let n = raw.system.n_subcarriers;
        let m = raw.pus.len();
        let system = SystemSpec {
            n_subcarriers: n,
            noise_power: linear_or_db("noise_power", raw.system.noise_power, raw.system.noise_power_db, None)?,
            total_power: linear_or_db("total_power", raw.system.total_power, raw.system.total_power_db, None)?,
            target_ber: raw.system.target_ber,
            modulation: raw.system.modulation,
        };
        let pus = raw
            .pus
            .into_iter()
            .enumerate()
            .map(|(j, pu)| {
                let omega = match pu.omega {
                    RawOmega::Indices(v) => v,
                    RawOmega::Layout(s) if s == "contiguous" => (j * n / m..(j + 1) * n / m).collect(),
                    RawOmega::Layout(s) => {
                        return Err(Error::Config(format!(
                            "pus[{j}].omega = \"{s}\": expected an index list or \"contiguous\""
                        )))
                    }
                };
                Ok(PuSpec {
                    omega,
                    alpha: pu.alpha,
                    beta: pu.beta,
                    rate_floor: pu.rate_floor,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let sus = raw
            .sus
            .iter()
            .enumerate()
            .map(|(k, su)| {
                SuProfile::new(su.relay_fraction).map_err(|e| Error::Config(format!("sus[{k}]: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let f = raw.fading;
        let fading = FadingSpec {
            distribution: f.distribution,
            mean_gain: LinkGains {
                pp: linear_or_db("pp", f.pp, f.pp_db, None)?,
                ss: linear_or_db("ss", f.ss, f.ss_db, None)?,
                ps: linear_or_db("ps", f.ps, f.ps_db, None)?,
                sp: linear_or_db("sp", f.sp, f.sp_db, None)?,
            },
        };
        let config = Self {
            schema_version: raw.schema_version,
            system,
            pus,
            sus,
            fading,
            pu_power_per_subcarrier: linear_or_db(
                "pu_power_per_subcarrier",
                raw.pu_power_per_subcarrier,
                raw.pu_power_per_subcarrier_db,
                None,
            )?,
            trials: raw.trials,
            seed: raw.seed,
            solver: raw.solver,
            sweep: raw.sweep,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Full semantic check: builds every derived object once.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        let g = self.fading.mean_gain;
        for (name, v) in [("pp", g.pp), ("ss", g.ss), ("ps", g.ps), ("sp", g.sp)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("fading.{name} = {v} must be finite and >= 0")));
            }
        }
        if !(self.pu_power_per_subcarrier >= 0.0 && self.pu_power_per_subcarrier.is_finite()) {
            return Err(Error::Config("pu_power_per_subcarrier must be finite and >= 0".into()));
        }
        let values: Vec<Option<f64>> = match &self.sweep {
            Some(sweep) if sweep.values.is_empty() => {
                return Err(Error::Config("sweep.values is empty".into()))
            }
            Some(sweep) => sweep.values.iter().copied().map(Some).collect(),
            None => vec![None],
        };
        for v in values {
            let params = self.system_params(v)?;
            let pus = self.pu_profiles(v)?;
            crate::model::validate_pus(&pus, params.n_subcarriers).map_err(config_err)?;
            self.solver_config(&params).validate().map_err(config_err)?;
        }
        Ok(())
    }

    pub fn system_params(&self, sweep_value: Option<f64>) -> Result<SystemParams> {
        let mut total_power = self.system.total_power;
        if let (Some(sweep), Some(v)) = (&self.sweep, sweep_value) {
            if sweep.parameter == SweepParameter::TotalPower {
                total_power = v;
            }
        }
        SystemParams::new(
            self.system.n_subcarriers,
            self.pus.len(),
            self.sus.len(),
            self.system.noise_power,
            total_power,
            self.system.target_ber,
            self.system.modulation,
        )
        .map_err(config_err)
    }

    pub fn pu_profiles(&self, sweep_value: Option<f64>) -> Result<Vec<PuProfile>> {
        let floor_override = match (&self.sweep, sweep_value) {
            (Some(s), Some(v)) if s.parameter == SweepParameter::RateFloor => Some(v),
            _ => None,
        };
        self.pus
            .iter()
            .enumerate()
            .map(|(j, pu)| {
                PuProfile::new(
                    pu.omega.clone(),
                    pu.alpha,
                    pu.beta,
                    floor_override.unwrap_or(pu.rate_floor),
                )
                .map_err(|e| Error::Config(format!("pus[{j}]: {e}")))
            })
            .collect()
    }

    pub fn solver_config(&self, params: &SystemParams) -> SolverConfig {
        let mut c = SolverConfig::for_problem(params.n_subcarriers, params.total_power);
        let o = &self.solver;
        macro_rules! apply {
            ($($field:ident),*) => { $( if let Some(v) = o.$field { c.$field = v; } )* };
        }
        apply!(
            eta, gamma, epsilon, max_outer_iters, max_inner_iters, max_bisect_iters, bisect_tol,
            p_lower, p_upper, mu_ceiling, budget_tol, scan_points
        );
        c
    }

    /// Sweep values in file order, or a single `None` when not sweeping.
    pub fn sweep_points(&self) -> Vec<Option<f64>> {
        match &self.sweep {
            Some(s) => s.values.iter().copied().map(Some).collect(),
            None => vec![None],
        }
    }
}

fn config_err(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
schema_version = 1
trials = 3
seed = 9
pu_power_per_subcarrier = 1.0

[system]
n_subcarriers = 8
noise_power_db = -10
total_power = 2.0
target_ber = 1e-3
modulation = "mqam"

[[pus]]
omega = "contiguous"
alpha = 0.2
beta = 0.3
rate_floor = 1.0

[[pus]]
omega = "contiguous"
alpha = 0.5
beta = 0.5
rate_floor = 1.0

[[sus]]
relay_fraction = 0.1

[fading]
distribution = "rayleigh"
pp = 1.0
ss = 1.0
ps_db = -10
sp = 0.1
"#;

    #[test]
    fn parses_and_converts_db() {
        let c = ScenarioConfig::from_toml_str(BASE).unwrap();
        assert!((c.system.noise_power - 0.1).abs() < 1e-15);
        assert!((c.fading.mean_gain.ps - 0.1).abs() < 1e-15);
        assert_eq!(c.pus[0].omega, vec![0, 1, 2, 3]);
        assert_eq!(c.pus[1].omega, vec![4, 5, 6, 7]);
        assert_eq!(c.solver, SolverOverrides::default());
    }

    #[test]
    fn rejects_wrong_schema_version() {
        let text = BASE.replace("schema_version = 1", "schema_version = 2");
        assert!(matches!(ScenarioConfig::from_toml_str(&text), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_both_linear_and_db() {
        let text = BASE.replace("total_power = 2.0", "total_power = 2.0\ntotal_power_db = 3.0");
        let err = ScenarioConfig::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("total_power"));
    }

    #[test]
    fn rejects_overlapping_omega() {
        let text = BASE.replacen("omega = \"contiguous\"", "omega = [3, 4]", 1);
        assert!(ScenarioConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn rejects_unknown_keys_and_zero_trials() {
        let text = BASE.replace("seed = 9", "seed = 9\nsed = 1");
        assert!(ScenarioConfig::from_toml_str(&text).is_err());
        let text = BASE.replace("trials = 3", "trials = 0");
        assert!(ScenarioConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn solver_overrides_apply() {
        let text = format!("{BASE}\n[solver]\nepsilon = 1e-9\nmax_outer_iters = 7\n");
        let c = ScenarioConfig::from_toml_str(&text).unwrap();
        let params = c.system_params(None).unwrap();
        let s = c.solver_config(&params);
        assert_eq!(s.epsilon, 1e-9);
        assert_eq!(s.max_outer_iters, 7);
        assert_eq!(s.p_upper, 2.0);
    }

    #[test]
    fn sweep_changes_the_right_parameter() {
        let text = format!("{BASE}\n[sweep]\nparameter = \"rate_floor\"\nvalues = [0.0, 0.5]\n");
        let c = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(c.sweep_points(), vec![Some(0.0), Some(0.5)]);
        assert_eq!(c.pu_profiles(Some(0.5)).unwrap()[1].rate_floor, 0.5);
        assert_eq!(c.system_params(Some(0.5)).unwrap().total_power, 2.0);

        let text = format!("{BASE}\n[sweep]\nparameter = \"total_power\"\nvalues = [0.5, 4.0]\n");
        let c = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(c.system_params(Some(4.0)).unwrap().total_power, 4.0);
        assert_eq!(c.pu_profiles(Some(4.0)).unwrap()[0].rate_floor, 1.0);
    }
}
