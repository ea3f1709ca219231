//! A single Markov chain of the multi-chain samplers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::energy::EnergyFunction;

/// Per-chain move counters. All counters only ever grow.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ChainStats {
    pub hmc_attempts: u64,
    pub hmc_accepts: u64,
    /// HMC trajectories abandoned because energy or gradient went non-finite.
    pub hmc_nonfinite: u64,
    pub ee_attempts: u64,
    pub ee_accepts: u64,
    /// EE attempts that found the matching ring empty (no proposal made).
    pub ee_unavailable: u64,
    pub swap_attempts: u64,
    pub swap_accepts: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl ChainStats {
    pub fn hmc_acceptance(&self) -> f64 {
        ratio(self.hmc_accepts, self.hmc_attempts)
    }

    /// Accepted EE jumps over jumps that had a proposal available.
    pub fn ee_acceptance(&self) -> f64 {
        ratio(self.ee_accepts, self.ee_attempts - self.ee_unavailable)
    }

    pub fn swap_acceptance(&self) -> f64 {
        ratio(self.swap_accepts, self.swap_attempts)
    }

    pub fn merge(&mut self, other: &ChainStats) {
        self.hmc_attempts += other.hmc_attempts;
        self.hmc_accepts += other.hmc_accepts;
        self.hmc_nonfinite += other.hmc_nonfinite;
        self.ee_attempts += other.ee_attempts;
        self.ee_accepts += other.ee_accepts;
        self.ee_unavailable += other.ee_unavailable;
        self.swap_attempts += other.swap_attempts;
        self.swap_accepts += other.swap_accepts;
    }
}

/// Derives the RNG stream of stream index `stream` from a master seed.
///
/// Stream 0 drives the sampler's interaction moves; chain `i` uses stream
/// `i + 1`, so HMC updates do not depend on execution order.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Energy seen by a chain with floor `floor`: `max(h, floor)`.
pub fn flattened_energy(energy: f64, floor: f64) -> f64 {
    if energy < floor {
        floor
    } else {
        energy
    }
}

/// One Monte Carlo chain: its temperature, energy floor, current state and
/// HMC parameters.
#[derive(Debug, Clone)]
pub struct Chain {
    pub(crate) order: usize,
    pub(crate) temperature: f64,
    pub(crate) floor: f64,
    pub(crate) state: Vec<f64>,
    pub(crate) energy: f64,
    pub(crate) step_size: f64,
    pub(crate) n_leapfrog: usize,
    pub(crate) stats: ChainStats,
    pub(crate) rng: ChaCha8Rng,
}

impl Chain {
    /// Creates chain `order` at `state`, caching its energy.
    ///
    /// Use `f64::NEG_INFINITY` as the floor for an unflattened target.
    #[allow(clippy::too_many_arguments)]
    pub fn new<F: EnergyFunction + ?Sized>(
        order: usize,
        temperature: f64,
        floor: f64,
        mut state: Vec<f64>,
        step_size: f64,
        n_leapfrog: usize,
        f: &F,
        rng: ChaCha8Rng,
    ) -> Self {
        assert!(temperature > 0.0, "temperature must be positive");
        assert!(step_size > 0.0, "HMC step size must be positive");
        assert!(n_leapfrog >= 1, "HMC needs at least one leapfrog step");
        assert_eq!(state.len(), f.dimension(), "state has wrong dimension");
        f.topology().wrap(&mut state);
        let energy = f.energy(&state);
        Self {
            order,
            temperature,
            floor,
            state,
            energy,
            step_size,
            n_leapfrog,
            stats: ChainStats::default(),
            rng,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn state(&self) -> &[f64] {
        &self.state
    }

    /// Cached raw energy `h(state)`.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn flattened_energy(&self) -> f64 {
        flattened_energy(self.energy, self.floor)
    }

    pub fn step_size(&self) -> f64 {
        self.step_size
    }

    pub fn set_step_size(&mut self, eps: f64) {
        assert!(eps > 0.0, "HMC step size must be positive");
        self.step_size = eps;
    }

    pub fn n_leapfrog(&self) -> usize {
        self.n_leapfrog
    }

    pub fn stats(&self) -> &ChainStats {
        &self.stats
    }

    pub fn reset_stats(&mut self) {
        self.stats = ChainStats::default();
    }

    /// Replaces the state (and its cached energy) wholesale.
    pub fn set_state(&mut self, state: &[f64], energy: f64) {
        self.state.copy_from_slice(state);
        self.energy = energy;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flattened_energy_clips_at_floor() {
        assert_eq!(flattened_energy(5.0, -10.0), 5.0);
        assert_eq!(flattened_energy(-12.0, -10.0), -10.0);
        assert_eq!(flattened_energy(-12.0, f64::NEG_INFINITY), -12.0);
    }

    #[test]
    fn acceptance_ratios_handle_empty_counters() {
        let s = ChainStats::default();
        assert_eq!(s.hmc_acceptance(), 0.0);
        let s = ChainStats { ee_attempts: 4, ee_unavailable: 2, ee_accepts: 1, ..Default::default() };
        assert_eq!(s.ee_acceptance(), 0.5);
    }
}
