//! Inter-chain moves: equi-energy jumps and replica exchanges.

use rand::Rng;

use crate::chain::{flattened_energy, Chain};
use crate::rings::RingStore;

/// Acceptance probability for chain `i` (temperature `t_lo`, floor `floor_lo`)
/// at energy `h_x` jumping to a stored state of energy `h_y` drawn from the
/// next chain up (temperature `t_hi`, floor `floor_hi`).
pub fn ee_acceptance_probability(
    h_x: f64,
    h_y: f64,
    (t_lo, floor_lo): (f64, f64),
    (t_hi, floor_hi): (f64, f64),
) -> f64 {
    let log_ratio = -(flattened_energy(h_y, floor_lo) - flattened_energy(h_x, floor_lo)) / t_lo
        + (flattened_energy(h_y, floor_hi) - flattened_energy(h_x, floor_hi)) / t_hi;
    log_ratio.exp().min(1.0)
}

/// Acceptance probability for exchanging the states of two chains at
/// temperatures `t_a`, `t_b` holding raw energies `h_a`, `h_b`.
pub fn pt_acceptance_probability(t_a: f64, h_a: f64, t_b: f64, h_b: f64) -> f64 {
    ((1.0 / t_a - 1.0 / t_b) * (h_a - h_b)).exp().min(1.0)
}

/// Outcome of an equi-energy jump attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpOutcome {
    Accepted,
    Rejected,
    /// The ring matching the chain's energy was empty.
    Unavailable,
}

/// Attempts an equi-energy jump for `chain` using the rings stored for the
/// chain one rung up (`upper_index`, with temperature and floor given in
/// `upper`). The proposal is drawn uniformly from the ring matching the
/// chain's current energy.
pub fn ee_jump<R: Rng + ?Sized>(
    chain: &mut Chain,
    store: &RingStore,
    upper_index: usize,
    upper: (f64, f64),
    rng: &mut R,
) -> JumpOutcome {
    chain.stats.ee_attempts += 1;
    let ring = store.ring(upper_index, store.ladder().ring_index(chain.energy));
    if ring.is_empty() {
        chain.stats.ee_unavailable += 1;
        return JumpOutcome::Unavailable;
    }
    let slot = rng.random_range(0..ring.len());
    let Some((proposal, h_y)) = ring.get(slot) else {
        chain.stats.ee_unavailable += 1;
        return JumpOutcome::Unavailable;
    };
    let alpha = ee_acceptance_probability(
        chain.energy,
        h_y,
        (chain.temperature, chain.floor),
        upper,
    );
    if alpha >= 1.0 || rng.random::<f64>() < alpha {
        chain.set_state(proposal, h_y);
        chain.stats.ee_accepts += 1;
        JumpOutcome::Accepted
    } else {
        JumpOutcome::Rejected
    }
}

/// Attempts to swap the states of two adjacent chains. Both chains' swap
/// counters are updated.
pub fn pt_exchange<R: Rng + ?Sized>(lower: &mut Chain, upper: &mut Chain, rng: &mut R) -> bool {
    lower.stats.swap_attempts += 1;
    upper.stats.swap_attempts += 1;
    let alpha =
        pt_acceptance_probability(lower.temperature, lower.energy, upper.temperature, upper.energy);
    let accept = alpha >= 1.0 || rng.random::<f64>() < alpha;
    if accept {
        std::mem::swap(&mut lower.state, &mut upper.state);
        std::mem::swap(&mut lower.energy, &mut upper.energy);
        lower.stats.swap_accepts += 1;
        upper.stats.swap_accepts += 1;
    }
    accept
}
