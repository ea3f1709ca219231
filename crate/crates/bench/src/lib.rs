//! Experiment harness for the equisampler toolkit: the one-dimensional
//! convergence benchmark, the protein quench campaign and the folding
//! comparison, with JSON/CSV reports.

pub mod bench1d;
pub mod config;
pub mod error;
pub mod fold;
pub mod quench;
pub mod report;

pub use config::{ExperimentConfig, ExperimentKind, ModeSelection};
pub use error::{BenchError, Result};
pub use report::{emit_campaign, emit_reports, RunReport};

/// Maps `op` over `items`, in parallel when the `parallel` feature is on.
/// Output order always matches input order.
pub fn par_map<T, U, F>(items: &[T], op: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(op).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(op).collect()
    }
}

/// Runs `config` once per seed.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunReport>> {
    config.validate()?;
    let mut reports = Vec::with_capacity(config.seeds.len());
    for &seed in &config.seeds {
        let report = match config.experiment {
            ExperimentKind::Bench1d => bench1d::run_bench1d(config, seed)?,
            ExperimentKind::Fold => fold::run_fold(config, seed)?,
            ExperimentKind::QuenchCampaign => {
                return quench::run_quench_campaign(config).map(|(r, _)| vec![r]);
            }
        };
        reports.push(report);
    }
    Ok(reports)
}
