//! Bounded, energy-partitioned sample reservoirs ("energy rings").

use rand::Rng;

use crate::ladder::EnergyLadder;

/// One ring: a bounded reservoir of states whose energies share a ring index.
#[derive(Debug, Clone)]
pub struct Ring {
    dim: usize,
    states: Vec<f64>,
    energies: Vec<f64>,
    inserted: u64,
    retain: bool,
}

impl Ring {
    fn new(dim: usize, retain: bool) -> Self {
        Self { dim, states: Vec::new(), energies: Vec::new(), inserted: 0, retain }
    }

    /// Number of samples currently held (for count-only rings, the number it
    /// would hold).
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Total number of insertions ever made into this ring.
    pub fn inserted(&self) -> u64 {
        self.inserted
    }

    /// Stored state `slot` with its energy; `None` for count-only rings.
    pub fn get(&self, slot: usize) -> Option<(&[f64], f64)> {
        if !self.retain || slot >= self.len() {
            return None;
        }
        Some((&self.states[slot * self.dim..(slot + 1) * self.dim], self.energies[slot]))
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        (0..if self.retain { self.len() } else { 0 }).map(move |s| self.get(s).unwrap())
    }

    fn insert<R: Rng + ?Sized>(&mut self, state: &[f64], energy: f64, cap: usize, rng: &mut R) {
        self.inserted += 1;
        if self.len() < cap {
            self.energies.push(energy);
            if self.retain {
                self.states.extend_from_slice(state);
            }
        } else {
            let slot = rng.random_range(0..cap);
            self.energies[slot] = energy;
            if self.retain {
                self.states[slot * self.dim..(slot + 1) * self.dim].copy_from_slice(state);
            }
        }
    }
}

/// Per-chain sets of `K + 1` rings sharing one energy ladder and one cap.
///
/// Chains flagged as count-only keep energies and counters but not the
/// states themselves; they are used for occupancy reporting only.
#[derive(Debug, Clone)]
pub struct RingStore {
    ladder: EnergyLadder,
    cap: usize,
    chains: Vec<Vec<Ring>>,
}

impl RingStore {
    /// `retain[i]` says whether chain `i` keeps full states.
    pub fn new(ladder: EnergyLadder, dim: usize, cap: usize, retain: &[bool]) -> Self {
        assert!(cap > 0, "ring cap must be positive");
        let rings = ladder.num_rings();
        let chains = retain
            .iter()
            .map(|&keep| (0..rings).map(|_| Ring::new(dim, keep)).collect())
            .collect();
        Self { ladder, cap, chains }
    }

    pub fn ladder(&self) -> &EnergyLadder {
        &self.ladder
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn num_chains(&self) -> usize {
        self.chains.len()
    }

    pub fn ring(&self, chain: usize, ring: usize) -> &Ring {
        &self.chains[chain][ring]
    }

    pub fn rings(&self, chain: usize) -> &[Ring] {
        &self.chains[chain]
    }

    /// Files `state` under its ring for `chain`; a full ring overwrites a
    /// uniformly chosen slot.
    pub fn insert<R: Rng + ?Sized>(&mut self, chain: usize, state: &[f64], energy: f64, rng: &mut R) {
        let j = self.ladder.ring_index(energy);
        let cap = self.cap;
        self.chains[chain][j].insert(state, energy, cap, rng);
    }

    /// Occupancy matrix `[chain][ring]` of current ring sizes.
    pub fn occupancy(&self) -> Vec<Vec<usize>> {
        self.chains.iter().map(|rs| rs.iter().map(Ring::len).collect()).collect()
    }

    /// Matrix `[chain][ring]` of cumulative insertion counts.
    pub fn insertions(&self) -> Vec<Vec<u64>> {
        self.chains.iter().map(|rs| rs.iter().map(Ring::inserted).collect()).collect()
    }
}
