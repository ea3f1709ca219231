//! Convergence benchmark on the rough one-dimensional landscape.

use std::time::Instant;

use equisampler_core::density::{analytic_density_grid, delta_f, BinValue, DensityGrid, Histogram};
use equisampler_core::landscape::BENCHMARK_PERIOD;
use equisampler_core::{
    build_ladder_geometric_increments, build_ladder_geometric_offsets, stream_rng, Chain,
    EnergyLadder, FourierLandscape, Sampler, SamplerMode,
};
use rand::Rng;

use crate::config::{ExperimentConfig, LadderSpec};
use crate::error::{BenchError, Result};
use crate::par_map;
use crate::report::{RunReport, Series, VariantReport};

/// RNG stream for initial states; far above any chain stream.
pub const INIT_STREAM: u64 = 1 << 32;

/// One sampler run to perform: mode plus ring cap.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub name: String,
    pub mode: SamplerMode,
    pub ring_cap: usize,
}

/// EE variants (one per ring cap) followed by PT, as selected by `mode`.
pub fn variants(config: &ExperimentConfig) -> Vec<Variant> {
    let mut out = Vec::new();
    for mode in config.mode.modes() {
        match mode {
            SamplerMode::EquiEnergy => {
                for &cap in &config.ring_caps {
                    out.push(Variant { name: format!("ee_cap{cap}"), mode, ring_cap: cap });
                }
            }
            SamplerMode::ParallelTempering => {
                out.push(Variant { name: "pt".into(), mode, ring_cap: config.ring_caps[0] })
            }
        }
    }
    out
}

/// Builds the energy ladder from `spec`, filling missing endpoints.
pub fn energy_ladder(spec: &LadderSpec, k: usize, h0: Option<f64>, h_top: Option<f64>) -> Result<EnergyLadder> {
    let ends = |a: Option<f64>, b: Option<f64>| -> Result<(f64, f64)> {
        match (a.or(h0), b.or(h_top)) {
            (Some(lo), Some(hi)) => Ok((lo, hi)),
            _ => Err(BenchError::Config("energy ladder endpoints are undefined".into())),
        }
    };
    Ok(match spec {
        LadderSpec::Explicit(levels) => EnergyLadder::new(levels.clone())?,
        LadderSpec::Increments { h0, h_top, lambda } => {
            let (lo, hi) = ends(*h0, *h_top)?;
            build_ladder_geometric_increments(lo, hi, k, *lambda)?
        }
        LadderSpec::Offsets { h0, h_top, ratio } => {
            let (lo, hi) = ends(*h0, *h_top)?;
            build_ladder_geometric_offsets(lo, hi, k, *ratio)?
        }
    })
}

/// Records the chain-0 histogram and its distance from the exact density
/// every `stride` sweeps and after the final sweep.
struct DeltaFRecorder<'a> {
    exact: &'a DensityGrid,
    hist: Histogram,
    stride: u64,
    last: u64,
    sweeps: Vec<u64>,
    values: Vec<f64>,
}

impl equisampler_core::Observer for DeltaFRecorder<'_> {
    fn observe(&mut self, sweep: u64, chains: &[Chain]) -> equisampler_core::Result<()> {
        self.hist.add(chains[0].state()[0]);
        if sweep.is_multiple_of(self.stride) || sweep == self.last {
            self.sweeps.push(sweep);
            self.values.push(delta_f(&self.hist.density(), self.exact)?);
        }
        Ok(())
    }
}

struct VariantRun {
    report: VariantReport,
    sweeps: Vec<u64>,
    delta_f: Vec<f64>,
}

fn run_variant(
    config: &ExperimentConfig,
    variant: &Variant,
    seed: u64,
    exact: &DensityGrid,
    initial: &[Vec<f64>],
) -> Result<VariantRun> {
    let f = FourierLandscape::benchmark();
    let k = config.chain_order()?;
    let temps = config.temperature_ladder(config.temperatures.as_ref().expect("validated"), k)?;
    let ladder = energy_ladder(config.energy_ladder.as_ref().expect("validated"), k, None, None)?;
    let sampler_cfg = config.sampler_config(variant.mode, variant.ring_cap, seed);
    let mut recorder = DeltaFRecorder {
        exact,
        hist: Histogram::new(0.0, BENCHMARK_PERIOD, config.bench1d.bins)?,
        stride: config.bench1d.deltaf_stride,
        last: config.production,
        sweeps: Vec::new(),
        values: Vec::new(),
    };
    let temp_values = temps.as_slice().to_vec();
    let mut sampler = Sampler::new(&f, temps, ladder, initial.to_vec(), sampler_cfg)?;
    let report = sampler.run(&mut [&mut recorder])?;
    let cap = (variant.mode == SamplerMode::EquiEnergy).then_some(variant.ring_cap);
    Ok(VariantRun {
        report: VariantReport::from_sampler(&variant.name, cap, &temp_values, &report),
        sweeps: recorder.sweeps,
        delta_f: recorder.values,
    })
}

/// Initial chain positions, uniform on one period; shared by all variants.
pub fn initial_states(seed: u64, chains: usize) -> Vec<Vec<f64>> {
    let mut rng = stream_rng(seed, INIT_STREAM);
    (0..chains).map(|_| vec![rng.random_range(0.0..BENCHMARK_PERIOD)]).collect()
}

/// Runs every selected variant for one seed from shared initial states.
pub fn run_bench1d(config: &ExperimentConfig, seed: u64) -> Result<RunReport> {
    config.validate()?;
    let started = Instant::now();
    let k = config.chain_order()?;
    let exact = analytic_density_grid(&FourierLandscape::benchmark(), config.bench1d.bins, BinValue::Average)?;
    let initial = initial_states(seed, k + 1);
    let variants = variants(config);
    let runs = par_map(&variants, |v| run_variant(config, v, seed, &exact, &initial));

    let mut report = RunReport::new(config, "bench1d", seed);
    report.primary_variant = variants
        .iter()
        .find(|v| v.mode == SamplerMode::EquiEnergy && v.ring_cap == 5000)
        .or_else(|| variants.iter().find(|v| v.mode == SamplerMode::EquiEnergy))
        .map(|v| v.name.clone());
    let mut failure = None;
    for (variant, run) in variants.iter().zip(runs) {
        match run {
            Ok(run) => {
                if report.delta_f.sweeps.is_empty() {
                    report.delta_f.sweeps = run.sweeps.clone();
                }
                report.delta_f.columns.push((variant.name.clone(), run.delta_f));
                report.variants.push(run.report);
            }
            Err(e) => {
                log::error!("variant {} failed: {e}", variant.name);
                failure.get_or_insert(e);
            }
        }
    }
    report.wall_clock_seconds = started.elapsed().as_secs_f64();
    match failure {
        None => Ok(report),
        Some(e @ BenchError::Config(_)) => Err(e),
        Some(e) => {
            report.status = "aborted".into();
            report.error = Some(e.to_string());
            Err(BenchError::Aborted { message: e.to_string(), report: Box::new(report) })
        }
    }
}

/// Value of `series` column `name` at the last recorded sweep `<= sweep`.
pub fn delta_f_at(series: &Series, name: &str, sweep: u64) -> Option<f64> {
    let row = series.sweeps.iter().rposition(|&s| s <= sweep)?;
    series.column(name)?.get(row).copied()
}
