//! Quench campaign: locate a low-energy reference structure for the BLN
//! model by perturb-and-quench search from many randomized starts.

use std::f64::consts::PI;
use std::io::BufWriter;
use std::path::Path;
use std::time::Instant;

use equisampler_core::bln::{build_extended, parse_sequence, resample_torsions, BlnModel, Conformation, TorsionClass};
use equisampler_core::minimize::{quench, QuenchConfig, QuenchResult};
use equisampler_core::stream_rng;
use rand::Rng;

use crate::config::{ExperimentConfig, QuenchSettings};
use crate::error::{BenchError, Result};
use crate::par_map;
use crate::report::{QuenchSummary, RunReport};

pub const NATIVE_FILE: &str = "native.xyz";

/// Lower end of the energy ladder: `h_min - 0.05 |h_min|`.
pub fn ladder_floor(h_min: f64) -> f64 {
    h_min - 0.05 * h_min.abs()
}

/// Best minimum found from one start.
#[derive(Debug, Clone)]
pub struct StartResult {
    pub seed: u64,
    pub start: usize,
    pub best: Option<QuenchResult>,
    pub failed_quenches: usize,
}

/// Trans or one of the two gauche minima of the torsion term, jittered by
/// up to 0.1 rad. Uniform angles leave strain no quench removes.
fn rotamer<R: Rng>(_: usize, rng: &mut R) -> f64 {
    const ROTAMERS: [f64; 3] = [PI, PI / 3.0, -PI / 3.0];
    ROTAMERS[rng.random_range(0..3)] + rng.random_range(-0.1..0.1)
}

/// Moves `count` dihedrals of `x` to random rotamers, keeping non-bonded
/// contacts at or above half a bead diameter. Each pick is a loop dihedral
/// with probability [`LOOP_PICK`], otherwise any dihedral.
fn perturb<R: Rng>(model: &BlnModel, x: &[f64], count: usize, rng: &mut R) -> Result<Vec<f64>> {
    let conf = Conformation::from_flat(model.sequence().clone(), x)?;
    let n = conf.num_dihedrals();
    let loops: Vec<usize> =
        (0..n).filter(|&t| model.torsion_classes()[t] == TorsionClass::Flexible).collect();
    let chosen: Vec<usize> = (0..count)
        .map(|_| {
            if !loops.is_empty() && rng.random::<f64>() < LOOP_PICK {
                loops[rng.random_range(0..loops.len())]
            } else {
                rng.random_range(0..n)
            }
        })
        .collect();
    Ok(resample_torsions(&conf, |t| chosen.contains(&t), rotamer, model.params(), rng)?.to_flat())
}

/// Probability that a hop picks a loop dihedral.
pub const LOOP_PICK: f64 = 0.7;

/// One start: rigid dihedrals trans and loop dihedrals at random rotamers,
/// quench, then `hops` Metropolis steps between quenched minima at
/// `hop_temperature`.
pub fn search_from_start(model: &BlnModel, q: &QuenchSettings, seed: u64, start: usize) -> StartResult {
    let mut rng = stream_rng(seed, start as u64);
    let qcfg = QuenchConfig { tolerance: q.tolerance, max_steps: q.max_steps, ..QuenchConfig::default() };
    let mut failed = 0;
    let ext = build_extended(model.sequence(), model.params());
    let mut current = None;
    for _ in 0..10 {
        let loops = |t: usize| model.torsion_classes()[t] == TorsionClass::Flexible;
        let Ok(conf) = resample_torsions(&ext, loops, rotamer, model.params(), &mut rng) else {
            failed += 1;
            continue;
        };
        match quench(model, &conf.to_flat(), &qcfg) {
            Ok(r) => {
                current = Some(r);
                break;
            }
            Err(e) => {
                log::warn!("seed {seed} start {start}: initial quench failed: {e}");
                failed += 1;
            }
        }
    }
    let Some(mut current) = current else {
        return StartResult { seed, start, best: None, failed_quenches: failed };
    };
    let mut best = current.clone();
    for _ in 0..q.hops {
        let trial = match perturb(model, &current.state, q.torsions_per_hop, &mut rng)
            .and_then(|x| quench(model, &x, &qcfg).map_err(BenchError::from))
        {
            Ok(r) => r,
            Err(e) => {
                log::debug!("seed {seed} start {start}: hop skipped: {e}");
                failed += 1;
                continue;
            }
        };
        let delta = trial.energy - current.energy;
        let u: f64 = rng.random();
        if delta <= 0.0 || u < (-delta / q.hop_temperature).exp() {
            current = trial;
            if current.energy < best.energy {
                best = current.clone();
            }
        }
    }
    log::info!("seed {seed} start {start}: best {:.6}", best.energy);
    StartResult { seed, start, best: Some(best), failed_quenches: failed }
}

/// Runs every `(seed, start)` pair of `config` and keeps the lowest minimum
/// (ties go to the earlier pair). Writes nothing.
pub fn run_quench_campaign(config: &ExperimentConfig) -> Result<(RunReport, Conformation)> {
    config.validate()?;
    let started = Instant::now();
    let sequence = parse_sequence(&config.fold.sequence)?;
    let model = BlnModel::new(sequence.clone(), config.bln_params());
    let jobs: Vec<(u64, usize)> = config
        .seeds
        .iter()
        .flat_map(|&s| (0..config.quench.starts_per_seed).map(move |j| (s, j)))
        .collect();
    let results = par_map(&jobs, |&(seed, start)| search_from_start(&model, &config.quench, seed, start));

    let mut best: Option<&QuenchResult> = None;
    for r in &results {
        if let Some(b) = &r.best {
            log::debug!("seed {} start {}: {:.6}", r.seed, r.start, b.energy);
            if best.is_none_or(|cur| b.energy < cur.energy) {
                best = Some(b);
            }
        }
    }
    let failed_quenches = results.iter().map(|r| r.failed_quenches).sum();
    let Some(best) = best else {
        let mut report = RunReport::new(config, "quench", config.seeds[0]);
        report.status = "aborted".into();
        report.error = Some("every start failed".into());
        return Err(BenchError::Aborted { message: "every start failed".into(), report: Box::new(report) });
    };
    let native = Conformation::from_flat(sequence, &best.state)?;
    let h_min = best.energy;
    let mut report = RunReport::new(config, "quench", config.seeds[0]);
    report.quench = Some(QuenchSummary {
        h_min,
        h0: ladder_floor(h_min),
        h_unf: model.unfolded_energy(),
        native_file: NATIVE_FILE.into(),
        starts: results
            .iter()
            .filter_map(|r| r.best.as_ref().map(|b| (r.seed, r.start, b.energy)))
            .collect(),
        failed_quenches,
    });
    report.wall_clock_seconds = started.elapsed().as_secs_f64();
    Ok((report, native))
}

/// Writes the native structure in XYZ form with its energy as the comment.
pub fn write_native(native: &Conformation, energy: f64, path: &Path) -> Result<()> {
    let file = BufWriter::new(std::fs::File::create(path)?);
    native.write_xyz(file, &format!("energy {energy:?}"))?;
    Ok(())
}

/// Reads a native structure written by [`write_native`] (or any XYZ file).
pub fn read_native(path: &Path) -> Result<Conformation> {
    if !path.exists() {
        return Err(BenchError::MissingInput(path.to_path_buf()));
    }
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    Ok(Conformation::read_xyz(file)?.0)
}
