//! Hybrid Monte Carlo moves and burn-in step-size adaptation.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::chain::{flattened_energy, Chain};
use crate::energy::EnergyFunction;

/// Result of one HMC trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HmcOutcome {
    Accepted,
    Rejected,
    /// Energy or gradient became non-finite; the move was rejected.
    NonFinite,
}

impl HmcOutcome {
    pub fn accepted(self) -> bool {
        self == HmcOutcome::Accepted
    }
}

/// Reusable buffers for one chain's leapfrog integration.
#[derive(Debug, Clone, Default)]
pub struct LeapfrogScratch {
    pub position: Vec<f64>,
    pub momentum: Vec<f64>,
    pub gradient: Vec<f64>,
}

impl LeapfrogScratch {
    pub fn new(dim: usize) -> Self {
        Self { position: vec![0.0; dim], momentum: vec![0.0; dim], gradient: vec![0.0; dim] }
    }
}

/// Gradient of `max(h, floor)` given `h` and `grad h` (zeroed below the floor).
fn flatten_gradient(energy: f64, floor: f64, grad: &mut [f64]) {
    if energy < floor {
        grad.iter_mut().for_each(|g| *g = 0.0);
    }
}

/// Integrates Hamilton's equations for `max(h, floor) + |p|^2 / 2` with unit
/// masses, `n_steps` velocity-Verlet steps of size `eps`, in place.
///
/// `grad` must hold the raw gradient at `x` on entry; on exit it holds the raw
/// gradient at the final position. Returns the final raw energy, or `None` if
/// any intermediate energy or gradient is non-finite.
#[allow(clippy::too_many_arguments)]
pub fn leapfrog<F: EnergyFunction + ?Sized>(
    f: &F,
    floor: f64,
    x: &mut [f64],
    p: &mut [f64],
    grad: &mut [f64],
    energy: f64,
    eps: f64,
    n_steps: usize,
) -> Option<f64> {
    let topology = f.topology();
    let mut h = energy;
    flatten_gradient(h, floor, grad);
    for _ in 0..n_steps {
        for (pi, gi) in p.iter_mut().zip(grad.iter()) {
            *pi -= 0.5 * eps * gi;
        }
        for (xi, pi) in x.iter_mut().zip(p.iter()) {
            *xi += eps * pi;
        }
        topology.wrap(x);
        h = f.energy_and_gradient(x, grad);
        if !h.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return None;
        }
        flatten_gradient(h, floor, grad);
        for (pi, gi) in p.iter_mut().zip(grad.iter()) {
            *pi -= 0.5 * eps * gi;
        }
    }
    Some(h)
}

/// One HMC update of `chain` under its flattened target
/// `exp(-max(h, H_i) / T_i)`.
pub fn hmc_step<F: EnergyFunction + ?Sized>(
    chain: &mut Chain,
    f: &F,
    scratch: &mut LeapfrogScratch,
) -> HmcOutcome {
    let dim = chain.state.len();
    if scratch.position.len() != dim {
        *scratch = LeapfrogScratch::new(dim);
    }
    let temperature = chain.temperature;
    let sd = temperature.sqrt();
    let LeapfrogScratch { position, momentum, gradient } = scratch;
    for pi in momentum.iter_mut() {
        let z: f64 = chain.rng.sample(StandardNormal);
        *pi = sd * z;
    }
    position.copy_from_slice(&chain.state);
    chain.stats.hmc_attempts += 1;

    let h_start = f.energy_and_gradient(position, gradient);
    if !h_start.is_finite() || gradient.iter().any(|g| !g.is_finite()) {
        chain.stats.hmc_nonfinite += 1;
        log::warn!("chain {}: non-finite energy at trajectory start", chain.order);
        return HmcOutcome::NonFinite;
    }
    let kinetic_start = 0.5 * momentum.iter().map(|p| p * p).sum::<f64>();
    let total_start = flattened_energy(h_start, chain.floor) + kinetic_start;

    let Some(h_end) = leapfrog(
        f,
        chain.floor,
        position,
        momentum,
        gradient,
        h_start,
        chain.step_size,
        chain.n_leapfrog,
    ) else {
        chain.stats.hmc_nonfinite += 1;
        log::debug!("chain {}: non-finite energy during leapfrog, move rejected", chain.order);
        return HmcOutcome::NonFinite;
    };
    let kinetic_end = 0.5 * momentum.iter().map(|p| p * p).sum::<f64>();
    let total_end = flattened_energy(h_end, chain.floor) + kinetic_end;
    let delta = total_end - total_start;

    let accept = delta <= 0.0 || chain.rng.random::<f64>() < (-delta / temperature).exp();
    if accept {
        chain.state.copy_from_slice(position);
        chain.energy = h_end;
        chain.stats.hmc_accepts += 1;
        HmcOutcome::Accepted
    } else {
        HmcOutcome::Rejected
    }
}

/// Step-size adaptation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningConfig {
    /// Acceptance window to aim for.
    pub target: (f64, f64),
    /// HMC steps per acceptance estimate.
    pub round_length: usize,
    pub max_rounds: usize,
    /// Multiplicative step-size change on a window miss.
    pub factor: f64,
}

impl Default for TuningConfig {
    fn default() -> Self {
        Self { target: (0.4, 0.5), round_length: 200, max_rounds: 100, factor: 1.1 }
    }
}

/// What the adaptation settled on for one chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningOutcome {
    pub chain: usize,
    pub step_size: f64,
    /// Acceptance measured in the round that produced `step_size`.
    pub acceptance: f64,
    pub rounds: usize,
    pub converged: bool,
}

/// Adjusts one round's step size given the acceptance it produced.
/// Returns `None` when the acceptance already lies in the window.
pub fn adapt_step_size(eps: f64, acceptance: f64, config: &TuningConfig) -> Option<f64> {
    let (lo, hi) = config.target;
    if acceptance > hi {
        Some(eps * config.factor)
    } else if acceptance < lo {
        Some(eps / config.factor)
    } else {
        None
    }
}

fn window_distance(acceptance: f64, (lo, hi): (f64, f64)) -> f64 {
    if acceptance < lo {
        lo - acceptance
    } else if acceptance > hi {
        acceptance - hi
    } else {
        0.0
    }
}

/// Multiplicative step-size controller, fed one acceptance estimate per
/// round. The factor starts at `config.factor`; it is square-rooted (down
/// to [`StepSizeAdapter::MIN_FACTOR`]) when the adjustment reverses
/// direction and squared when it repeats: up to
/// [`StepSizeAdapter::MAX_FACTOR`] before the first reversal, so a poor
/// initial step size is corrected in a few rounds, and up to
/// `config.factor` afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSizeAdapter {
    config: TuningConfig,
    factor: f64,
    last_direction: f64,
    rounds: usize,
    last_acceptance: f64,
    in_window: bool,
    reversed: bool,
    /// `(window distance, step size, acceptance)` of the closest round.
    best: (f64, f64, f64),
}

impl StepSizeAdapter {
    pub const MIN_FACTOR: f64 = 1.005;
    pub const MAX_FACTOR: f64 = 2.0;

    pub fn new(config: TuningConfig) -> Self {
        Self {
            factor: config.factor,
            config,
            last_direction: 0.0,
            rounds: 0,
            last_acceptance: f64::NAN,
            in_window: false,
            reversed: false,
            best: (f64::INFINITY, f64::NAN, f64::NAN),
        }
    }

    /// Records the acceptance of a round run at `eps`; returns the step
    /// size for the next round.
    pub fn record(&mut self, eps: f64, acceptance: f64) -> f64 {
        self.rounds += 1;
        self.last_acceptance = acceptance;
        let dist = window_distance(acceptance, self.config.target);
        if dist < self.best.0 {
            self.best = (dist, eps, acceptance);
        }
        let (lo, hi) = self.config.target;
        let direction = if acceptance > hi {
            1.0
        } else if acceptance < lo {
            -1.0
        } else {
            self.in_window = true;
            return eps;
        };
        self.in_window = false;
        if direction * self.last_direction < 0.0 {
            self.factor = self.factor.sqrt().max(Self::MIN_FACTOR);
            self.reversed = true;
        } else if self.last_direction != 0.0 {
            let cap = if self.reversed { self.config.factor } else { Self::MAX_FACTOR.max(self.config.factor) };
            self.factor = (self.factor * self.factor).min(cap);
        }
        self.last_direction = direction;
        let step = TuningConfig { factor: self.factor, ..self.config };
        adapt_step_size(eps, acceptance, &step).expect("acceptance is outside the window")
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Whether the latest round landed inside the target window.
    pub fn in_window(&self) -> bool {
        self.in_window
    }

    pub fn exhausted(&self) -> bool {
        self.rounds >= self.config.max_rounds
    }

    /// Step size and acceptance of the round closest to the window.
    pub fn best(&self) -> (f64, f64) {
        (self.best.1, self.best.2)
    }

    pub fn outcome(&self, chain: usize, step_size: f64) -> TuningOutcome {
        TuningOutcome {
            chain,
            step_size,
            acceptance: self.last_acceptance,
            rounds: self.rounds,
            converged: self.in_window,
        }
    }
}

/// Step-size controller for adaptation inside burn-in sweeps, where the
/// chain also jumps or swaps between basins and a single round's acceptance
/// is a noisy, skewed estimate.
///
/// A search phase doubles or halves the step size until the acceptance
/// first crosses the window midpoint. After that, round `r` of the
/// approximation phase moves `ln eps` by `r^-0.6 * (acceptance - midpoint)`,
/// whose fixed point is the step size with mean acceptance at the
/// midpoint. The frozen value averages `ln eps` over the later half of the
/// approximation rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragingAdapter {
    config: TuningConfig,
    rounds: usize,
    search_direction: f64,
    /// `ln eps` of every approximation-phase round.
    log_history: Vec<f64>,
    last_acceptance: f64,
}

impl AveragingAdapter {
    pub const GAIN_DECAY: f64 = 0.6;
    pub const SEARCH_FACTOR: f64 = 2.0;

    pub fn new(config: TuningConfig) -> Self {
        Self { config, rounds: 0, search_direction: 0.0, log_history: Vec::new(), last_acceptance: f64::NAN }
    }

    /// Records the acceptance of a round run at `eps`; returns the step
    /// size for the next round.
    pub fn record(&mut self, eps: f64, acceptance: f64) -> f64 {
        self.rounds += 1;
        self.last_acceptance = acceptance;
        let (lo, hi) = self.config.target;
        let error = acceptance - 0.5 * (lo + hi);
        if self.log_history.is_empty() {
            let direction = error.signum();
            if direction != 0.0 && direction * self.search_direction >= 0.0 {
                self.search_direction = direction;
                return eps * Self::SEARCH_FACTOR.powf(direction);
            }
        }
        self.log_history.push(eps.ln());
        let gain = (self.log_history.len() as f64).powf(-Self::GAIN_DECAY);
        eps * (gain * error).exp()
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn exhausted(&self) -> bool {
        self.rounds >= self.config.max_rounds
    }

    /// Geometric mean of the step sizes of the later half of the
    /// approximation rounds; `None` while still searching.
    pub fn settled_step_size(&self) -> Option<f64> {
        let tail = &self.log_history[self.log_history.len() / 2..];
        (!tail.is_empty()).then(|| (tail.iter().sum::<f64>() / tail.len() as f64).exp())
    }

    /// `converged` reports whether the last round landed inside the window.
    pub fn outcome(&self, chain: usize, step_size: f64) -> TuningOutcome {
        TuningOutcome {
            chain,
            step_size,
            acceptance: self.last_acceptance,
            rounds: self.rounds,
            converged: window_distance(self.last_acceptance, self.config.target) == 0.0,
        }
    }
}

/// Runs rounds of plain HMC on `chain`, adjusting its step size with a
/// [`StepSizeAdapter`] until a round's acceptance falls inside the target
/// window. Without convergence the step size of the closest round is kept.
/// Counters touched here belong to the burn-in and should be reset before
/// production.
pub fn tune_step_size<F: EnergyFunction + ?Sized>(
    chain: &mut Chain,
    f: &F,
    config: &TuningConfig,
    scratch: &mut LeapfrogScratch,
) -> TuningOutcome {
    let mut adapter = StepSizeAdapter::new(*config);
    while !adapter.exhausted() {
        let before = chain.stats.hmc_accepts;
        for _ in 0..config.round_length {
            hmc_step(chain, f, scratch);
        }
        let acceptance =
            (chain.stats.hmc_accepts - before) as f64 / config.round_length.max(1) as f64;
        let eps = chain.step_size;
        let next = adapter.record(eps, acceptance);
        if adapter.in_window() {
            return adapter.outcome(chain.order, eps);
        }
        chain.step_size = next;
    }
    let (eps, acceptance) = adapter.best();
    chain.step_size = eps;
    log::warn!(
        "chain {}: step size did not reach the acceptance window in {} rounds; using {} (acceptance {:.3})",
        chain.order,
        config.max_rounds,
        eps,
        acceptance
    );
    TuningOutcome { acceptance, step_size: eps, ..adapter.outcome(chain.order, eps) }
}
