//! Equi-energy sampling, parallel tempering and Hybrid Monte Carlo.
//!
//! The samplers in [`sampler`] work over any [`EnergyFunction`]. Two test
//! systems ship with the crate: the rough periodic landscape in
//! [`landscape`] (with density tools in [`density`]) and the 46-bead BLN
//! beta-barrel model in [`bln`].
//!
//! With the default `parallel` feature, the per-sweep HMC updates can fan
//! out over a rayon pool; results are identical either way because every
//! chain owns its RNG stream.

// `!(a < b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bln;
pub mod chain;
pub mod density;
pub mod energy;
pub mod error;
pub mod hmc;
pub mod ladder;
pub mod landscape;
pub mod minimize;
pub mod moves;
pub mod rings;
pub mod sampler;

pub use chain::{flattened_energy, stream_rng, Chain, ChainStats};
pub use energy::{EnergyFunction, Quadratic, Topology};
pub use error::{Error, Result};
pub use ladder::{
    build_ladder_geometric_increments, build_ladder_geometric_offsets, EnergyLadder,
    TemperatureLadder,
};
pub use landscape::FourierLandscape;
pub use sampler::{run_sweeps, Observer, Sampler, SamplerConfig, SamplerMode, SamplerReport};
