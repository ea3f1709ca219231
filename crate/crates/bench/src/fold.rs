//! Folding comparison on the BLN model: EE and PT trajectories from the
//! same loop-randomized starts, scored by RMSD to the native structure.

use std::path::PathBuf;
use std::time::Instant;

use equisampler_core::bln::{parse_sequence, randomize_loops, rmsd, BlnModel, Conformation};
use equisampler_core::{stream_rng, Chain, EnergyFunction, Observer, Sampler, SamplerMode};

use crate::bench1d::{energy_ladder, variants, Variant, INIT_STREAM};
use crate::config::ExperimentConfig;
use crate::error::{BenchError, Result};
use crate::par_map;
use crate::quench::{ladder_floor, read_native};
use crate::report::{FoldSummary, RunReport, Series, TrajectoryReport, VariantReport};

/// Radius of the `S_x` set used as the headline fraction.
pub const HEADLINE_RADIUS: f64 = 1.5;

/// `x = 0.25, 0.5, ..., 10.0`.
pub fn sx_grid() -> Vec<f64> {
    (1..=40).map(|i| 0.25 * i as f64).collect()
}

/// Per-structure sampler seed, identical for every variant.
pub fn structure_seed(seed: u64, structure: usize) -> u64 {
    // splitmix64 finaliser
    let mut z = seed.wrapping_add((structure as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fraction of `values` at or below `x`.
pub fn fraction_within(values: &[f64], x: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().filter(|&&v| v <= x).count() as f64 / values.len() as f64
}

/// Native structure plus the ladder endpoints derived from it.
pub struct FoldSetup {
    pub model: BlnModel,
    pub native: Conformation,
    pub h_min: f64,
    pub h0: f64,
    pub h_unf: f64,
}

impl FoldSetup {
    pub fn load(config: &ExperimentConfig) -> Result<Self> {
        let path: &PathBuf = config
            .fold
            .native
            .as_ref()
            .ok_or_else(|| BenchError::Config("fold.native is required".into()))?;
        let native = read_native(path)?;
        let sequence = parse_sequence(&config.fold.sequence)?;
        if native.sequence() != &sequence {
            return Err(BenchError::Config(format!(
                "native structure has sequence {} but the config asks for {}",
                native.sequence().render(),
                sequence.render()
            )));
        }
        let model = BlnModel::new(sequence, config.bln_params());
        let h_min = model.conformation_energy(&native);
        if !h_min.is_finite() {
            return Err(BenchError::Config("native structure has non-finite energy".into()));
        }
        let h_unf = model.unfolded_energy();
        Ok(Self { h0: ladder_floor(h_min), h_min, h_unf, model, native })
    }
}

/// Snapshots of chain 0 (and optionally all chains) every `stride` sweeps.
struct RmsdRecorder<'a> {
    native: &'a Conformation,
    stride: u64,
    all_chains: bool,
    sweeps: Vec<u64>,
    rmsd: Vec<f64>,
    energy: Vec<f64>,
    pooled: Vec<f64>,
}

impl Observer for RmsdRecorder<'_> {
    fn observe(&mut self, sweep: u64, chains: &[Chain]) -> equisampler_core::Result<()> {
        if !sweep.is_multiple_of(self.stride) {
            return Ok(());
        }
        let seq = self.native.sequence();
        let distance = |c: &Chain| -> equisampler_core::Result<f64> {
            rmsd(&Conformation::from_flat(seq.clone(), c.state())?, self.native)
        };
        let r0 = distance(&chains[0])?;
        self.sweeps.push(sweep);
        self.rmsd.push(r0);
        self.energy.push(chains[0].energy());
        self.pooled.push(r0);
        if self.all_chains {
            for c in &chains[1..] {
                self.pooled.push(distance(c)?);
            }
        }
        Ok(())
    }
}

struct TrajectoryRun {
    report: VariantReport,
    sweeps: Vec<u64>,
    rmsd: Vec<f64>,
    energy: Vec<f64>,
    pooled: Vec<f64>,
}

fn run_trajectory(
    config: &ExperimentConfig,
    setup: &FoldSetup,
    variant: &Variant,
    start: &Conformation,
    seed: u64,
) -> Result<TrajectoryRun> {
    let k = config.chain_order()?;
    let temps = config.temperature_ladder(config.temperatures.as_ref().expect("validated"), k)?;
    let ladder = energy_ladder(
        config.energy_ladder.as_ref().expect("validated"),
        k,
        Some(setup.h0),
        Some(setup.h_unf),
    )?;
    let temp_values = temps.as_slice().to_vec();
    let sampler_cfg = config.sampler_config(variant.mode, variant.ring_cap, seed);
    let mut recorder = RmsdRecorder {
        native: &setup.native,
        stride: config.fold.snapshot_stride,
        all_chains: config.fold.all_chains,
        sweeps: vec![0],
        rmsd: vec![rmsd(start, &setup.native)?],
        energy: vec![setup.model.energy(&start.to_flat())],
        pooled: Vec::new(),
    };
    let initial = vec![start.to_flat(); k + 1];
    let mut sampler = Sampler::new(&setup.model, temps, ladder, initial, sampler_cfg)?;
    let report = sampler.run(&mut [&mut recorder])?;
    let cap = (variant.mode == SamplerMode::EquiEnergy).then_some(variant.ring_cap);
    Ok(TrajectoryRun {
        report: VariantReport::from_sampler(&variant.name, cap, &temp_values, &report),
        sweeps: recorder.sweeps,
        rmsd: recorder.rmsd,
        energy: recorder.energy,
        pooled: recorder.pooled,
    })
}

/// Draws the loop-randomized starting structures for `seed`.
pub fn initial_structures(config: &ExperimentConfig, setup: &FoldSetup, seed: u64) -> Result<Vec<Conformation>> {
    let mut rng = stream_rng(seed, INIT_STREAM);
    (0..config.fold.initial_structures)
        .map(|_| {
            Ok(randomize_loops(&setup.native, setup.model.torsion_classes(), setup.model.params(), &mut rng)?)
        })
        .collect()
}

/// Runs every selected variant from every initial structure.
pub fn run_fold(config: &ExperimentConfig, seed: u64) -> Result<RunReport> {
    config.validate()?;
    let setup = FoldSetup::load(config)?;
    run_fold_with(config, &setup, seed)
}

/// [`run_fold`] with an already loaded native structure.
pub fn run_fold_with(config: &ExperimentConfig, setup: &FoldSetup, seed: u64) -> Result<RunReport> {
    let started = Instant::now();
    let k = config.chain_order()?;
    let starts = initial_structures(config, setup, seed)?;
    let variants = variants(config);
    let jobs: Vec<(usize, &Variant)> =
        (0..starts.len()).flat_map(|s| variants.iter().map(move |v| (s, v))).collect();
    let runs = par_map(&jobs, |&(s, v)| run_trajectory(config, setup, v, &starts[s], structure_seed(seed, s)));

    let mut report = RunReport::new(config, "fold", seed);
    let temps = config.temperature_ladder(config.temperatures.as_ref().expect("validated"), k)?;
    let ladder = energy_ladder(
        config.energy_ladder.as_ref().expect("validated"),
        k,
        Some(setup.h0),
        Some(setup.h_unf),
    )?;
    report.fold = Some(FoldSummary {
        h_min: setup.h_min,
        h0: setup.h0,
        h_unf: setup.h_unf,
        energy_levels: ladder.levels().to_vec(),
        temperatures: temps.as_slice().to_vec(),
        pooled_chains: if config.fold.all_chains { "all" } else { "chain0" }.into(),
    });
    report.primary_variant = variants.iter().find(|v| v.mode == SamplerMode::EquiEnergy).map(|v| v.name.clone());
    report.sx_grid = sx_grid();

    let mut pooled: Vec<Vec<f64>> = vec![Vec::new(); variants.len()];
    let mut failure = None;
    let mut runs = runs.into_iter();
    for (s, start) in starts.iter().enumerate() {
        let mut traj = TrajectoryReport {
            index: s,
            initial_rmsd: rmsd(start, &setup.native)?,
            initial_energy: setup.model.conformation_energy(start),
            series: Series::default(),
            s15_fraction: Vec::new(),
            lowest_energy: Vec::new(),
        };
        for (vi, v) in variants.iter().enumerate() {
            match runs.next().expect("one run per job") {
                Ok(run) => {
                    if traj.series.sweeps.is_empty() {
                        traj.series.sweeps = run.sweeps.clone();
                    }
                    traj.s15_fraction.push((v.name.clone(), fraction_within(&run.pooled, HEADLINE_RADIUS)));
                    let lowest = run.energy.iter().cloned().fold(f64::INFINITY, f64::min);
                    traj.lowest_energy.push((v.name.clone(), lowest));
                    traj.series.columns.push((format!("rmsd_{}", v.name), run.rmsd));
                    traj.series.columns.push((format!("energy_{}", v.name), run.energy));
                    pooled[vi].extend_from_slice(&run.pooled);
                    let mut vr = run.report;
                    vr.name = format!("{}_{}", v.name, s);
                    report.variants.push(vr);
                }
                Err(e) => {
                    log::error!("structure {s}, variant {}: {e}", v.name);
                    failure.get_or_insert(e);
                }
            }
        }
        report.trajectories.push(traj);
    }
    for (v, values) in variants.iter().zip(&pooled) {
        let curve = report.sx_grid.iter().map(|&x| fraction_within(values, x)).collect();
        report.sx_curve.columns.push((format!("P_{}", v.name), curve));
    }
    report.primary_variant = report.primary_variant.map(|n| format!("{n}_0"));
    report.wall_clock_seconds = started.elapsed().as_secs_f64();
    match failure {
        None => Ok(report),
        Some(e) => {
            report.status = "aborted".into();
            report.error = Some(e.to_string());
            Err(BenchError::Aborted { message: e.to_string(), report: Box::new(report) })
        }
    }
}

/// Mean EE jump acceptance over all EE trajectories of a fold report.
pub fn mean_ee_acceptance(report: &RunReport) -> Option<f64> {
    let vals: Vec<f64> = report.variants.iter().filter_map(|v| v.mean_ee_acceptance).collect();
    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
}
