//! Run reports and their on-disk form: `summary.json` plus CSV tables.
//!
//! CSV files carry no timing data, so identical configurations and seeds
//! reproduce them byte for byte. Floats are written in shortest round-trip
//! form.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use equisampler_core::hmc::TuningOutcome;
use equisampler_core::{ChainStats, SamplerReport};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    pub chain: usize,
    pub temperature: f64,
    pub step_size: f64,
    pub hmc_attempts: u64,
    pub hmc_acceptance: f64,
    pub hmc_nonfinite: u64,
    pub ee_attempts: u64,
    pub ee_accepts: u64,
    pub ee_acceptance: f64,
    pub ee_unavailable: u64,
    pub swap_attempts: u64,
    pub swap_accepts: u64,
    pub swap_acceptance: f64,
    /// HMC acceptance over burn-in, tuning rounds included.
    pub burn_in_hmc_acceptance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningSummary {
    pub chain: usize,
    pub step_size: f64,
    pub acceptance: f64,
    pub rounds: usize,
    pub converged: bool,
}

impl From<&TuningOutcome> for TuningSummary {
    fn from(t: &TuningOutcome) -> Self {
        Self {
            chain: t.chain,
            step_size: t.step_size,
            acceptance: t.acceptance,
            rounds: t.rounds,
            converged: t.converged,
        }
    }
}

/// One sampler run (one mode, one ring cap) within a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantReport {
    pub name: String,
    pub mode: String,
    pub ring_cap: Option<usize>,
    pub seed: u64,
    pub burn_in_sweeps: u64,
    pub production_sweeps: u64,
    /// Pooled over chains `0..K` and over attempts that found a partner.
    pub mean_ee_acceptance: Option<f64>,
    pub mean_swap_acceptance: Option<f64>,
    pub ee_unavailable: u64,
    pub chains: Vec<ChainSummary>,
    pub tuning: Vec<TuningSummary>,
    /// Chains x rings: insertions made during burn-in. Row sums equal the
    /// chain's burn-in insertions, so counts can exceed the ring cap.
    pub occupancy_after_burn_in: Vec<Vec<u64>>,
    pub ring_sizes_after_burn_in: Vec<Vec<usize>>,
    pub ring_sizes_final: Vec<Vec<usize>>,
    pub insertions_final: Vec<Vec<u64>>,
    pub warnings: Vec<String>,
}

impl VariantReport {
    pub fn from_sampler(name: &str, ring_cap: Option<usize>, temps: &[f64], r: &SamplerReport) -> Self {
        let ee = r.mode == equisampler_core::SamplerMode::EquiEnergy;
        let chains = r
            .stats
            .iter()
            .zip(&r.burn_in_stats)
            .enumerate()
            .map(|(i, (s, b))| chain_summary(i, temps[i], r.step_sizes[i], s, b))
            .collect();
        Self {
            name: name.to_string(),
            mode: r.mode.label().to_string(),
            ring_cap,
            seed: r.seed,
            burn_in_sweeps: r.burn_in_sweeps,
            production_sweeps: r.production_sweeps,
            mean_ee_acceptance: ee.then(|| r.mean_ee_acceptance()),
            mean_swap_acceptance: (!ee).then(|| r.mean_swap_acceptance()),
            ee_unavailable: r.ee_unavailable(),
            chains,
            tuning: r.tuning.iter().map(TuningSummary::from).collect(),
            occupancy_after_burn_in: r.insertions_after_burn_in.clone(),
            ring_sizes_after_burn_in: r.ring_sizes_after_burn_in.clone(),
            ring_sizes_final: r.ring_sizes_final.clone(),
            insertions_final: r.insertions_final.clone(),
            warnings: r.warnings.clone(),
        }
    }
}

fn chain_summary(chain: usize, temperature: f64, step_size: f64, s: &ChainStats, b: &ChainStats) -> ChainSummary {
    ChainSummary {
        chain,
        temperature,
        step_size,
        hmc_attempts: s.hmc_attempts,
        hmc_acceptance: s.hmc_acceptance(),
        hmc_nonfinite: s.hmc_nonfinite,
        ee_attempts: s.ee_attempts,
        ee_accepts: s.ee_accepts,
        ee_acceptance: s.ee_acceptance(),
        ee_unavailable: s.ee_unavailable,
        swap_attempts: s.swap_attempts,
        swap_accepts: s.swap_accepts,
        swap_acceptance: s.swap_acceptance(),
        burn_in_hmc_acceptance: b.hmc_acceptance(),
    }
}

/// A table of named columns sharing one sweep axis.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub sweeps: Vec<u64>,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl Series {
    /// Value of `column` at the recorded sweep `sweep`.
    pub fn at(&self, column: &str, sweep: u64) -> Option<f64> {
        let row = self.sweeps.iter().position(|&s| s == sweep)?;
        let (_, values) = self.columns.iter().find(|(n, _)| n == column)?;
        values.get(row).copied()
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }
}

/// One initial structure of a fold run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub index: usize,
    pub initial_rmsd: f64,
    pub initial_energy: f64,
    /// Columns `rmsd_<variant>` and `energy_<variant>` for chain 0.
    pub series: Series,
    /// Fraction of pooled snapshots within 1.5 of the native, per variant.
    pub s15_fraction: Vec<(String, f64)>,
    pub lowest_energy: Vec<(String, f64)>,
}

impl TrajectoryReport {
    pub fn s15(&self, variant: &str) -> Option<f64> {
        self.s15_fraction.iter().find(|(n, _)| n == variant).map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldSummary {
    pub h_min: f64,
    pub h0: f64,
    pub h_unf: f64,
    pub energy_levels: Vec<f64>,
    pub temperatures: Vec<f64>,
    pub pooled_chains: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuenchSummary {
    pub h_min: f64,
    pub h0: f64,
    pub h_unf: f64,
    pub native_file: String,
    /// `(seed, start, lowest energy)` for every start.
    pub starts: Vec<(u64, usize, f64)>,
    pub failed_quenches: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub experiment: String,
    pub seed: u64,
    pub status: String,
    pub error: Option<String>,
    pub config: ExperimentConfig,
    pub variants: Vec<VariantReport>,
    /// Name of the variant whose occupancy goes to `occupancy.csv`.
    pub primary_variant: Option<String>,
    pub delta_f: Series,
    pub trajectories: Vec<TrajectoryReport>,
    /// `P(x)` columns per variant.
    pub sx_curve: Series,
    pub sx_grid: Vec<f64>,
    pub fold: Option<FoldSummary>,
    pub quench: Option<QuenchSummary>,
    pub wall_clock_seconds: f64,
}

impl RunReport {
    pub fn new(config: &ExperimentConfig, experiment: &str, seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.to_string(),
            seed,
            status: "complete".into(),
            error: None,
            config: config.clone(),
            variants: Vec::new(),
            primary_variant: None,
            delta_f: Series::default(),
            trajectories: Vec::new(),
            sx_curve: Series::default(),
            sx_grid: Vec::new(),
            fold: None,
            quench: None,
            wall_clock_seconds: 0.0,
        }
    }

    pub fn variant(&self, name: &str) -> Option<&VariantReport> {
        self.variants.iter().find(|v| v.name == name)
    }

    pub fn primary(&self) -> Option<&VariantReport> {
        self.variant(self.primary_variant.as_deref()?)
    }
}

/// Aggregate over the per-seed reports of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub schema_version: u32,
    pub experiment: String,
    pub seeds: Vec<u64>,
    /// `(variant, mean over seeds)` of the EE jump or swap acceptance.
    pub mean_acceptance: Vec<(String, f64)>,
    pub runs: Vec<String>,
}

impl CampaignSummary {
    pub fn from_reports(reports: &[RunReport]) -> Self {
        let mut names: Vec<String> = Vec::new();
        for r in reports {
            for v in &r.variants {
                if !names.contains(&v.name) {
                    names.push(v.name.clone());
                }
            }
        }
        let mean_acceptance = names
            .into_iter()
            .filter_map(|name| {
                let vals: Vec<f64> = reports
                    .iter()
                    .filter_map(|r| r.variant(&name))
                    .filter_map(|v| v.mean_ee_acceptance.or(v.mean_swap_acceptance))
                    .collect();
                (!vals.is_empty()).then(|| (name, vals.iter().sum::<f64>() / vals.len() as f64))
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            experiment: reports.first().map(|r| r.experiment.clone()).unwrap_or_default(),
            seeds: reports.iter().map(|r| r.seed).collect(),
            mean_acceptance,
            runs: reports.iter().map(|r| seed_dir_name(r.seed)).collect(),
        }
    }
}

pub fn seed_dir_name(seed: u64) -> String {
    format!("seed_{seed}")
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path)?))
}

fn write_series<W: Write>(out: &mut W, first: &str, s: &Series, axis: &[String]) -> Result<()> {
    write!(out, "{first}")?;
    for (name, _) in &s.columns {
        write!(out, ",{name}")?;
    }
    writeln!(out)?;
    for (row, x) in axis.iter().enumerate() {
        write!(out, "{x}")?;
        for (_, values) in &s.columns {
            match values.get(row) {
                Some(v) => write!(out, ",{v:?}")?,
                None => write!(out, ",")?,
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Writes `summary.json`, `deltaf.csv`, `occupancy.csv`, `sx_curve.csv` and
/// one `rmsd_traj_<k>.csv` per fold trajectory into `dir`.
pub fn emit_reports(report: &RunReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut summary = create(&dir.join("summary.json"))?;
    serde_json::to_writer_pretty(&mut summary, report)?;
    writeln!(summary)?;
    summary.flush()?;

    let mut out = create(&dir.join("deltaf.csv"))?;
    let axis: Vec<String> = report.delta_f.sweeps.iter().map(u64::to_string).collect();
    write_series(&mut out, "sweep", &report.delta_f, &axis)?;
    out.flush()?;

    let mut out = create(&dir.join("occupancy.csv"))?;
    writeln!(out, "chain,ring,count")?;
    if let Some(v) = report.primary() {
        for (chain, row) in v.occupancy_after_burn_in.iter().enumerate() {
            for (ring, count) in row.iter().enumerate() {
                writeln!(out, "{chain},{ring},{count}")?;
            }
        }
    }
    out.flush()?;

    let mut out = create(&dir.join("sx_curve.csv"))?;
    let axis: Vec<String> = report.sx_grid.iter().map(|x| format!("{x:?}")).collect();
    write_series(&mut out, "x", &report.sx_curve, &axis)?;
    out.flush()?;

    for t in &report.trajectories {
        let mut out = create(&dir.join(format!("rmsd_traj_{}.csv", t.index)))?;
        let axis: Vec<String> = t.series.sweeps.iter().map(u64::to_string).collect();
        write_series(&mut out, "sweep", &t.series, &axis)?;
        out.flush()?;
    }
    Ok(())
}

/// Writes every per-seed report under `dir/seed_<s>/` and the aggregate
/// `summary.json` at the top level. A single report goes straight to `dir`.
pub fn emit_campaign(reports: &[RunReport], dir: &Path) -> Result<()> {
    if let [single] = reports {
        return emit_reports(single, dir);
    }
    for r in reports {
        emit_reports(r, &dir.join(seed_dir_name(r.seed)))?;
    }
    let mut out = create(&dir.join("summary.json"))?;
    serde_json::to_writer_pretty(&mut out, &CampaignSummary::from_reports(reports))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}
