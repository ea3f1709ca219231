//! Multi-chain sweep driver shared by the equi-energy sampler and parallel
//! tempering.
//!
//! A sweep is one HMC update of every chain, followed by the interaction
//! phase (EE jumps plus ring insertion, or one replica-exchange attempt).
//! HMC updates draw from per-chain RNG streams; everything in the
//! interaction phase draws from a separate control stream, so a run is
//! bit-for-bit identical whether the HMC phase fans out over threads or not.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::chain::{stream_rng, Chain, ChainStats};
use crate::energy::EnergyFunction;
use crate::error::{Error, Result};
use crate::hmc::{hmc_step, LeapfrogScratch, AveragingAdapter, TuningConfig, TuningOutcome};
use crate::ladder::{EnergyLadder, TemperatureLadder};
use crate::moves::{ee_jump, pt_exchange};
use crate::rings::RingStore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SamplerMode {
    EquiEnergy,
    ParallelTempering,
}

impl SamplerMode {
    pub fn label(self) -> &'static str {
        match self {
            SamplerMode::EquiEnergy => "ee",
            SamplerMode::ParallelTempering => "pt",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub mode: SamplerMode,
    /// Per-sweep, per-chain probability of an EE jump attempt.
    pub p_ee: f64,
    /// Per-sweep probability of one exchange attempt at a random adjacent pair.
    pub p_swap: f64,
    pub ring_cap: usize,
    /// `None` skips step-size adaptation.
    pub tuning: Option<TuningConfig>,
    pub burn_in: u64,
    pub production: u64,
    pub seed: u64,
    pub n_leapfrog: usize,
    pub initial_step_size: f64,
    /// Fan the HMC phase out over the rayon pool (no effect without the
    /// `parallel` feature).
    pub parallel: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            mode: SamplerMode::EquiEnergy,
            p_ee: 0.15,
            p_swap: 0.15,
            ring_cap: 5000,
            tuning: Some(TuningConfig::default()),
            burn_in: 0,
            production: 0,
            seed: 0,
            n_leapfrog: 10,
            initial_step_size: 0.01,
            parallel: false,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |p: f64| p > 0.0 && p < 1.0;
        if !open_unit(self.p_ee) {
            return Err(Error::InvalidConfig(format!("p_ee must lie in (0, 1), got {}", self.p_ee)));
        }
        if !open_unit(self.p_swap) {
            return Err(Error::InvalidConfig(format!(
                "p_swap must lie in (0, 1), got {}",
                self.p_swap
            )));
        }
        if self.ring_cap == 0 {
            return Err(Error::InvalidConfig("ring cap must be positive".into()));
        }
        if self.n_leapfrog == 0 {
            return Err(Error::InvalidConfig("n_leapfrog must be at least 1".into()));
        }
        if !(self.initial_step_size > 0.0 && self.initial_step_size.is_finite()) {
            return Err(Error::InvalidConfig("initial step size must be positive".into()));
        }
        if let Some(t) = &self.tuning {
            let (lo, hi) = t.target;
            if !(0.0 < lo && lo < hi && hi < 1.0) || t.round_length == 0 || t.factor <= 1.0 {
                return Err(Error::InvalidConfig(format!("invalid tuning settings {t:?}")));
            }
        }
        Ok(())
    }
}

/// Receives the chains after every production sweep.
pub trait Observer {
    fn observe(&mut self, sweep: u64, chains: &[Chain]) -> Result<()>;
}

impl<T: FnMut(u64, &[Chain]) -> Result<()>> Observer for T {
    fn observe(&mut self, sweep: u64, chains: &[Chain]) -> Result<()> {
        self(sweep, chains)
    }
}

/// Statistics of a completed run.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerReport {
    pub mode: SamplerMode,
    pub seed: u64,
    pub tuning: Vec<TuningOutcome>,
    /// Counters accumulated during burn-in sweeps, tuning rounds included.
    pub burn_in_stats: Vec<ChainStats>,
    /// Counters accumulated during production sweeps.
    pub stats: Vec<ChainStats>,
    /// Ring sizes `[chain][ring]` right after burn-in (EE mode only).
    pub ring_sizes_after_burn_in: Vec<Vec<usize>>,
    /// Insertions `[chain][ring]` made during burn-in; unlike the sizes
    /// these are not bounded by the ring cap.
    pub insertions_after_burn_in: Vec<Vec<u64>>,
    pub ring_sizes_final: Vec<Vec<usize>>,
    pub insertions_final: Vec<Vec<u64>>,
    pub burn_in_sweeps: u64,
    pub production_sweeps: u64,
    pub step_sizes: Vec<f64>,
    pub warnings: Vec<String>,
}

impl SamplerReport {
    /// Pooled EE acceptance over all chains that can jump.
    pub fn mean_ee_acceptance(&self) -> f64 {
        let (acc, tried) = self.stats.iter().fold((0u64, 0u64), |(a, t), s| {
            (a + s.ee_accepts, t + s.ee_attempts - s.ee_unavailable)
        });
        if tried == 0 {
            0.0
        } else {
            acc as f64 / tried as f64
        }
    }

    /// Pooled swap acceptance over all attempted exchanges.
    pub fn mean_swap_acceptance(&self) -> f64 {
        // every exchange is counted on both partners
        let (acc, tried) = self
            .stats
            .iter()
            .fold((0u64, 0u64), |(a, t), s| (a + s.swap_accepts, t + s.swap_attempts));
        if tried == 0 {
            0.0
        } else {
            acc as f64 / tried as f64
        }
    }

    pub fn ee_unavailable(&self) -> u64 {
        self.stats.iter().map(|s| s.ee_unavailable).sum()
    }
}

/// Multi-chain EE / PT sampler over one energy function.
pub struct Sampler<'f, F: EnergyFunction + ?Sized> {
    f: &'f F,
    config: SamplerConfig,
    temperatures: TemperatureLadder,
    chains: Vec<Chain>,
    scratch: Vec<LeapfrogScratch>,
    store: RingStore,
    control: ChaCha8Rng,
    tuning: Vec<TuningOutcome>,
    warnings: Vec<String>,
}

impl<'f, F: EnergyFunction + ?Sized> Sampler<'f, F> {
    /// Sets up `K + 1` chains, one per temperature, at `initial_states`.
    ///
    /// In EE mode chain `i` samples `exp(-max(h, H_i) / T_i)`; in PT mode the
    /// floors are dropped and chain `i` samples `exp(-h / T_i)`.
    pub fn new(
        f: &'f F,
        temperatures: TemperatureLadder,
        ladder: EnergyLadder,
        initial_states: Vec<Vec<f64>>,
        config: SamplerConfig,
    ) -> Result<Self> {
        config.validate()?;
        let n = temperatures.len();
        if ladder.k() + 1 != n {
            return Err(Error::InvalidConfig(format!(
                "{} temperatures but the energy ladder implies K + 1 = {} chains",
                n,
                ladder.k() + 1
            )));
        }
        if initial_states.len() != n {
            return Err(Error::LengthMismatch { expected: n, found: initial_states.len() });
        }
        let dim = f.dimension();
        let mut chains = Vec::with_capacity(n);
        for (i, state) in initial_states.into_iter().enumerate() {
            if state.len() != dim {
                return Err(Error::LengthMismatch { expected: dim, found: state.len() });
            }
            let floor = match config.mode {
                SamplerMode::EquiEnergy => ladder.floor(i),
                SamplerMode::ParallelTempering => f64::NEG_INFINITY,
            };
            chains.push(Chain::new(
                i,
                temperatures.as_slice()[i],
                floor,
                state,
                config.initial_step_size,
                config.n_leapfrog,
                f,
                stream_rng(config.seed, i as u64 + 1),
            ));
        }
        // chain 0 never serves as a jump source, so it only keeps counts
        let retain: Vec<bool> = (0..n).map(|i| i > 0).collect();
        let store = RingStore::new(ladder, dim, config.ring_cap, &retain);
        Ok(Self {
            f,
            temperatures,
            chains,
            scratch: vec![LeapfrogScratch::new(dim); n],
            store,
            control: stream_rng(config.seed, 0),
            tuning: Vec::new(),
            warnings: Vec::new(),
            config,
        })
    }

    pub fn chains(&self) -> &[Chain] {
        &self.chains
    }

    pub fn store(&self) -> &RingStore {
        &self.store
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    pub fn temperatures(&self) -> &TemperatureLadder {
        &self.temperatures
    }

    fn for_each_chain<Op>(&mut self, op: Op)
    where
        Op: Fn(&mut Chain, &mut LeapfrogScratch) + Send + Sync,
        F: Sync,
    {
        #[cfg(feature = "parallel")]
        if self.config.parallel {
            use rayon::prelude::*;
            self.chains
                .par_iter_mut()
                .zip(self.scratch.par_iter_mut())
                .for_each(|(c, s)| op(c, s));
            return;
        }
        for (c, s) in self.chains.iter_mut().zip(self.scratch.iter_mut()) {
            op(c, s);
        }
    }

    /// One full sweep: HMC on every chain, then the interaction phase.
    pub fn sweep(&mut self) {
        let f = self.f;
        self.for_each_chain(|chain, scratch| {
            hmc_step(chain, f, scratch);
        });
        match self.config.mode {
            SamplerMode::EquiEnergy => self.interact_ee(),
            SamplerMode::ParallelTempering => self.interact_pt(),
        }
    }

    fn interact_ee(&mut self) {
        let k = self.chains.len() - 1;
        for i in 0..k {
            if self.control.random::<f64>() < self.config.p_ee {
                let upper = (self.chains[i + 1].temperature(), self.chains[i + 1].floor());
                ee_jump(&mut self.chains[i], &self.store, i + 1, upper, &mut self.control);
            }
        }
        for chain in &self.chains {
            self.store.insert(chain.order(), chain.state(), chain.energy(), &mut self.control);
        }
    }

    fn interact_pt(&mut self) {
        let k = self.chains.len() - 1;
        if k == 0 || self.control.random::<f64>() >= self.config.p_swap {
            return;
        }
        let i = self.control.random_range(0..k);
        let (lo, hi) = self.chains.split_at_mut(i + 1);
        pt_exchange(&mut lo[i], &mut hi[0], &mut self.control);
    }

    /// `burn_in` full sweeps, adapting each chain's step size once per
    /// tuning round, then freezes each at its settled value. Counters are left holding
    /// the burn-in totals.
    pub fn burn_in(&mut self) -> &[TuningOutcome] {
        let n = self.chains.len();
        let Some(cfg) = self.config.tuning else {
            for _ in 0..self.config.burn_in {
                self.sweep();
            }
            return &self.tuning;
        };
        let round = cfg.round_length.max(1) as u64;
        let mut adapters = vec![AveragingAdapter::new(cfg); n];
        let mut marks: Vec<(u64, u64)> = vec![(0, 0); n];
        for sweep in 1..=self.config.burn_in {
            self.sweep();
            if sweep % round != 0 {
                continue;
            }
            for (chain, (adapter, mark)) in self.chains.iter_mut().zip(adapters.iter_mut().zip(&mut marks)) {
                if adapter.exhausted() {
                    continue;
                }
                let s = chain.stats();
                let acceptance = (s.hmc_accepts - mark.0) as f64 / (s.hmc_attempts - mark.1).max(1) as f64;
                *mark = (s.hmc_accepts, s.hmc_attempts);
                let eps = chain.step_size();
                let next = adapter.record(eps, acceptance);
                log::debug!("chain {} sweep {sweep}: acceptance {acceptance:.3} at step size {eps:.5}", chain.order());
                chain.set_step_size(next);
            }
        }
        if self.config.burn_in < round {
            self.warnings.push(format!(
                "burn-in of {} sweeps is shorter than one tuning round ({round}); step sizes were not adapted",
                self.config.burn_in
            ));
        }
        for (chain, adapter) in self.chains.iter_mut().zip(&adapters) {
            if let Some(eps) = adapter.settled_step_size() {
                chain.set_step_size(eps);
            }
        }
        self.tuning = adapters
            .iter()
            .zip(&self.chains)
            .map(|(a, c)| a.outcome(c.order(), c.step_size()))
            .collect();
        for out in &self.tuning {
            if out.rounds > 0 && !out.converged {
                self.warnings.push(format!(
                    "chain {}: acceptance {:.3} outside the target window in the last tuning round (step size {})",
                    out.chain, out.acceptance, out.step_size
                ));
            }
        }
        &self.tuning
    }

    /// Burn-in with step-size adaptation, then `production` sweeps with
    /// every observer called after each production sweep.
    pub fn run(&mut self, observers: &mut [&mut dyn Observer]) -> Result<SamplerReport> {
        self.burn_in();
        let burn_in_stats: Vec<ChainStats> = self.chains.iter().map(|c| *c.stats()).collect();
        let after_burn_in = (self.store.occupancy(), self.store.insertions());
        for chain in &mut self.chains {
            chain.reset_stats();
        }
        for sweep in 1..=self.config.production {
            self.sweep();
            for obs in observers.iter_mut() {
                obs.observe(sweep, &self.chains)?;
            }
        }
        Ok(self.report(burn_in_stats, after_burn_in))
    }

    fn report(
        &self,
        burn_in_stats: Vec<ChainStats>,
        (ring_sizes_after_burn_in, insertions_after_burn_in): (Vec<Vec<usize>>, Vec<Vec<u64>>),
    ) -> SamplerReport {
        let stats: Vec<ChainStats> = self.chains.iter().map(|c| *c.stats()).collect();
        let mut warnings = self.warnings.clone();
        for (i, s) in stats.iter().enumerate() {
            if s.hmc_nonfinite > 0 {
                warnings.push(format!(
                    "chain {i}: {} HMC trajectories rejected for non-finite energy",
                    s.hmc_nonfinite
                ));
            }
        }
        SamplerReport {
            mode: self.config.mode,
            seed: self.config.seed,
            tuning: self.tuning.clone(),
            burn_in_stats,
            stats,
            ring_sizes_after_burn_in,
            insertions_after_burn_in,
            ring_sizes_final: self.store.occupancy(),
            insertions_final: self.store.insertions(),
            burn_in_sweeps: self.config.burn_in,
            production_sweeps: self.config.production,
            step_sizes: self.chains.iter().map(Chain::step_size).collect(),
            warnings,
        }
    }
}

/// Convenience wrapper: build a sampler and run it to completion.
pub fn run_sweeps<F: EnergyFunction + ?Sized>(
    f: &F,
    temperatures: TemperatureLadder,
    ladder: EnergyLadder,
    initial_states: Vec<Vec<f64>>,
    config: SamplerConfig,
    observers: &mut [&mut dyn Observer],
) -> Result<SamplerReport> {
    Sampler::new(f, temperatures, ladder, initial_states, config)?.run(observers)
}
