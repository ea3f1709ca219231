//! Experiment configuration, read from JSON. Unknown fields are rejected.

use std::path::{Path, PathBuf};

use equisampler_core::bln::{BlnParams, FlexibleRule, BETA_BARREL_46};
use equisampler_core::hmc::TuningConfig;
use equisampler_core::{SamplerConfig, SamplerMode};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

/// Energy levels of the one-dimensional benchmark ladder, `H_0..H_5`.
pub const TABLE1_ENERGY_LEVELS: [f64; 6] = [-10.0, -8.7, -7.5, -5.0, -0.2, 10.0];
/// Temperatures of the one-dimensional benchmark ladder.
pub const TABLE1_TEMPERATURES: [f64; 5] = [1.0, 2.0, 3.9, 7.7, 15.3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Bench1d,
    Fold,
    QuenchCampaign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeSelection {
    Ee,
    Pt,
    #[default]
    Both,
}

impl ModeSelection {
    pub fn modes(self) -> Vec<SamplerMode> {
        match self {
            ModeSelection::Ee => vec![SamplerMode::EquiEnergy],
            ModeSelection::Pt => vec![SamplerMode::ParallelTempering],
            ModeSelection::Both => vec![SamplerMode::EquiEnergy, SamplerMode::ParallelTempering],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TemperatureSpec {
    Explicit(Vec<f64>),
    /// `K + 1` temperatures in geometric progression.
    Geometric { min: f64, max: f64 },
}

/// Energy ladder `H_0 < ... < H_{K+1}`. For fold runs, omitted endpoints
/// default to `H_0 = h_min - 0.05 |h_min|` and `H_{K+1} = h_unf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LadderSpec {
    Explicit(Vec<f64>),
    /// Gaps growing by `lambda`, rescaled to span `[h0, h_top]`.
    Increments {
        #[serde(default)]
        h0: Option<f64>,
        #[serde(default)]
        h_top: Option<f64>,
        lambda: f64,
    },
    /// Offsets from `h0` shrinking by `ratio` per level below the top.
    Offsets {
        #[serde(default)]
        h0: Option<f64>,
        #[serde(default)]
        h_top: Option<f64>,
        ratio: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HmcSettings {
    pub n_leapfrog: usize,
    pub initial_step_size: f64,
    /// Adapt step sizes before burn-in.
    pub tune: bool,
    pub target_low: f64,
    pub target_high: f64,
    pub round_length: usize,
    pub max_rounds: usize,
    pub factor: f64,
}

impl Default for HmcSettings {
    fn default() -> Self {
        let t = TuningConfig::default();
        Self {
            n_leapfrog: 10,
            initial_step_size: 0.01,
            tune: true,
            target_low: t.target.0,
            target_high: t.target.1,
            round_length: t.round_length,
            max_rounds: t.max_rounds,
            factor: t.factor,
        }
    }
}

impl HmcSettings {
    pub fn tuning(&self) -> Option<TuningConfig> {
        self.tune.then_some(TuningConfig {
            target: (self.target_low, self.target_high),
            round_length: self.round_length,
            max_rounds: self.max_rounds,
            factor: self.factor,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Bench1dSettings {
    /// Histogram bins over one period.
    pub bins: usize,
    /// Sweeps between recorded `delta_f` values.
    pub deltaf_stride: u64,
}

impl Default for Bench1dSettings {
    fn default() -> Self {
        Self { bins: 500, deltaf_stride: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FoldSettings {
    pub sequence: String,
    pub flexible_rule: FlexibleRuleSetting,
    /// Native structure in XYZ format.
    pub native: Option<PathBuf>,
    pub initial_structures: usize,
    /// Sweeps between RMSD snapshots; 1 records every sweep.
    pub snapshot_stride: u64,
    /// Pool every chain into `P(x)` instead of chain 0 only.
    pub all_chains: bool,
}

impl Default for FoldSettings {
    fn default() -> Self {
        Self {
            sequence: BETA_BARREL_46.to_string(),
            flexible_rule: FlexibleRuleSetting::TwoOrMore,
            native: None,
            initial_structures: 10,
            snapshot_stride: 10,
            all_chains: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlexibleRuleSetting {
    TwoOrMore,
    MoreThanTwo,
}

impl From<FlexibleRuleSetting> for FlexibleRule {
    fn from(r: FlexibleRuleSetting) -> Self {
        match r {
            FlexibleRuleSetting::TwoOrMore => FlexibleRule::TwoOrMore,
            FlexibleRuleSetting::MoreThanTwo => FlexibleRule::MoreThanTwo,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuenchSettings {
    /// Independent randomized starts per seed.
    pub starts_per_seed: usize,
    /// Perturb-and-quench cycles per start.
    pub hops: usize,
    /// Torsions reset at random per cycle.
    pub torsions_per_hop: usize,
    /// Metropolis temperature between successive minima.
    pub hop_temperature: f64,
    pub tolerance: f64,
    pub max_steps: usize,
}

impl Default for QuenchSettings {
    fn default() -> Self {
        Self {
            starts_per_seed: 4,
            hops: 1000,
            torsions_per_hop: 3,
            hop_temperature: 0.8,
            tolerance: 1e-6,
            max_steps: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub mode: ModeSelection,
    /// Number of chains minus one; inferred from the ladders when omitted.
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub temperatures: Option<TemperatureSpec>,
    #[serde(default)]
    pub energy_ladder: Option<LadderSpec>,
    #[serde(default = "default_p_ee")]
    pub p_ee: f64,
    #[serde(default = "default_p_ee")]
    pub p_swap: f64,
    /// One EE variant is run per cap.
    #[serde(default = "default_ring_caps")]
    pub ring_caps: Vec<usize>,
    #[serde(default)]
    pub burn_in: u64,
    #[serde(default)]
    pub production: u64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Fan each sweep's HMC updates out over threads. Independent runs are
    /// parallelised regardless.
    #[serde(default)]
    pub parallel_chains: bool,
    #[serde(default)]
    pub hmc: HmcSettings,
    #[serde(default)]
    pub bench1d: Bench1dSettings,
    #[serde(default)]
    pub fold: FoldSettings,
    #[serde(default)]
    pub quench: QuenchSettings,
}

/// Nested settings merged field by field in [`ExperimentConfig::from_json`].
const SECTIONS: [&str; 4] = ["hmc", "bench1d", "fold", "quench"];

fn default_p_ee() -> f64 {
    0.15
}

fn default_ring_caps() -> Vec<usize> {
    vec![5000]
}

fn default_seeds() -> Vec<u64> {
    vec![1]
}

impl ExperimentConfig {
    /// Defaults for `kind`: the one-dimensional benchmark ladders, or the
    /// protein ladders with endpoints taken from the native structure.
    pub fn new(kind: ExperimentKind) -> Self {
        let mut cfg = Self {
            experiment: kind,
            mode: ModeSelection::Both,
            k: None,
            temperatures: None,
            energy_ladder: None,
            p_ee: default_p_ee(),
            p_swap: default_p_ee(),
            ring_caps: default_ring_caps(),
            burn_in: 0,
            production: 0,
            seeds: default_seeds(),
            output_dir: None,
            parallel_chains: false,
            hmc: HmcSettings::default(),
            bench1d: Bench1dSettings::default(),
            fold: FoldSettings::default(),
            quench: QuenchSettings::default(),
        };
        match kind {
            ExperimentKind::Bench1d => {
                cfg.k = Some(4);
                cfg.temperatures = Some(TemperatureSpec::Explicit(TABLE1_TEMPERATURES.to_vec()));
                cfg.energy_ladder = Some(LadderSpec::Explicit(TABLE1_ENERGY_LEVELS.to_vec()));
                cfg.burn_in = 20000;
                cfg.production = 100_000;
            }
            ExperimentKind::Fold => {
                cfg.k = Some(8);
                cfg.temperatures = Some(TemperatureSpec::Geometric { min: 0.4, max: 2.0 });
                cfg.energy_ladder =
                    Some(LadderSpec::Increments { h0: None, h_top: None, lambda: 1.15 });
                cfg.ring_caps = vec![2000];
                cfg.burn_in = 2000;
                cfg.production = 20_000;
                cfg.hmc.initial_step_size = 0.005;
            }
            ExperimentKind::QuenchCampaign => {}
        }
        cfg
    }

    /// Parses `text`, taking every omitted field from [`Self::new`] for the
    /// named experiment. Settings sections merge key by key.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg_err = |e: serde_json::Error| BenchError::Config(e.to_string());
        let user: serde_json::Value = serde_json::from_str(text).map_err(cfg_err)?;
        let serde_json::Value::Object(user) = user else {
            return Err(BenchError::Config("config must be a JSON object".into()));
        };
        let kind_value = user
            .get("experiment")
            .cloned()
            .ok_or_else(|| BenchError::Config("missing field `experiment`".into()))?;
        let kind: ExperimentKind = serde_json::from_value(kind_value).map_err(cfg_err)?;
        let mut merged = serde_json::to_value(Self::new(kind)).map_err(cfg_err)?;
        let base = merged.as_object_mut().expect("struct serialises to an object");
        for (key, value) in user {
            match (base.get_mut(&key), value) {
                (Some(serde_json::Value::Object(section)), serde_json::Value::Object(patch))
                    if SECTIONS.contains(&key.as_str()) =>
                {
                    section.extend(patch);
                }
                (_, value) => {
                    base.insert(key, value);
                }
            }
        }
        let cfg: Self = serde_json::from_value(merged).map_err(cfg_err)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Number of chains minus one, from `k` or the explicit ladders.
    pub fn chain_order(&self) -> Result<usize> {
        let from_temps = match &self.temperatures {
            Some(TemperatureSpec::Explicit(t)) => Some(t.len().saturating_sub(1)),
            _ => None,
        };
        let from_levels = match &self.energy_ladder {
            Some(LadderSpec::Explicit(l)) => Some(l.len().saturating_sub(2)),
            _ => None,
        };
        let candidates: Vec<usize> = [self.k, from_temps, from_levels].into_iter().flatten().collect();
        let Some(&k) = candidates.first() else {
            return Err(BenchError::Config("K is not set and cannot be inferred".into()));
        };
        if candidates.iter().any(|&c| c != k) {
            return Err(BenchError::Config(format!(
                "inconsistent K: k = {:?}, temperatures imply {:?}, energy ladder implies {:?}",
                self.k, from_temps, from_levels
            )));
        }
        if k == 0 {
            return Err(BenchError::Config("K must be at least 1".into()));
        }
        Ok(k)
    }

    /// Checks everything that can be checked before a run starts.
    pub fn validate(&self) -> Result<()> {
        let config_err = |m: String| Err(BenchError::Config(m));
        if self.seeds.is_empty() {
            return config_err("seed list is empty".into());
        }
        if self.experiment != ExperimentKind::QuenchCampaign {
            let k = self.chain_order()?;
            if self.ring_caps.is_empty() {
                return config_err("ring_caps is empty".into());
            }
            match &self.temperatures {
                None => return config_err("temperatures are required".into()),
                Some(spec) => {
                    self.temperature_ladder(spec, k)?;
                }
            }
            match &self.energy_ladder {
                None => return config_err("energy_ladder is required".into()),
                Some(LadderSpec::Explicit(levels)) => {
                    equisampler_core::EnergyLadder::new(levels.clone())?;
                }
                Some(LadderSpec::Increments { lambda: r, h0, h_top })
                | Some(LadderSpec::Offsets { ratio: r, h0, h_top }) => {
                    if !(*r > 1.0 && r.is_finite()) {
                        return config_err(format!("ladder ratio must exceed 1, got {r}"));
                    }
                    if self.experiment == ExperimentKind::Bench1d && (h0.is_none() || h_top.is_none()) {
                        return config_err("bench1d ladders need explicit h0 and h_top".into());
                    }
                }
            }
            for &cap in &self.ring_caps {
                self.sampler_config(SamplerMode::EquiEnergy, cap, 0).validate()?;
            }
        }
        match self.experiment {
            ExperimentKind::Bench1d => {
                if self.bench1d.bins < 2 {
                    return config_err("bench1d.bins must be at least 2".into());
                }
                if self.bench1d.deltaf_stride == 0 {
                    return config_err("bench1d.deltaf_stride must be positive".into());
                }
            }
            ExperimentKind::Fold => {
                equisampler_core::bln::parse_sequence(&self.fold.sequence)?;
                if self.fold.initial_structures == 0 {
                    return config_err("fold.initial_structures must be positive".into());
                }
                if self.fold.snapshot_stride == 0 {
                    return config_err("fold.snapshot_stride must be positive".into());
                }
            }
            ExperimentKind::QuenchCampaign => {
                equisampler_core::bln::parse_sequence(&self.fold.sequence)?;
                let q = &self.quench;
                if q.starts_per_seed == 0 || q.torsions_per_hop == 0 {
                    return config_err("quench needs at least one start and one torsion per hop".into());
                }
                if !(q.hop_temperature > 0.0 && q.tolerance > 0.0) {
                    return config_err("quench temperature and tolerance must be positive".into());
                }
            }
        }
        Ok(())
    }

    pub fn temperature_ladder(
        &self,
        spec: &TemperatureSpec,
        k: usize,
    ) -> Result<equisampler_core::TemperatureLadder> {
        Ok(match spec {
            TemperatureSpec::Explicit(t) => equisampler_core::TemperatureLadder::new(t.clone())?,
            TemperatureSpec::Geometric { min, max } => {
                equisampler_core::TemperatureLadder::geometric(*min, *max, k + 1)?
            }
        })
    }

    pub fn bln_params(&self) -> BlnParams {
        BlnParams { flexible_rule: self.fold.flexible_rule.into(), ..BlnParams::default() }
    }

    /// Sampler settings for one variant; `seed` is the run seed.
    pub fn sampler_config(&self, mode: SamplerMode, ring_cap: usize, seed: u64) -> SamplerConfig {
        SamplerConfig {
            mode,
            p_ee: self.p_ee,
            p_swap: self.p_swap,
            ring_cap,
            tuning: self.hmc.tuning(),
            burn_in: self.burn_in,
            production: self.production,
            seed,
            n_leapfrog: self.hmc.n_leapfrog,
            initial_step_size: self.hmc.initial_step_size,
            parallel: self.parallel_chains,
        }
    }
}
