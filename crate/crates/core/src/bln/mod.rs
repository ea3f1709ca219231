//! Off-lattice BLN bead model of a small beta-barrel protein.

pub mod conformation;
pub mod geometry;
pub mod model;
pub mod params;
pub mod rmsd;
pub mod sequence;

pub use conformation::{build_extended, randomize_loops, randomize_torsions, resample_torsions, Conformation};
pub use model::{BlnModel, EnergyTerms};
pub use params::{to_kelvin, BlnParams, EPSILON_H_KELVIN};
pub use rmsd::rmsd;
pub use sequence::{
    parse_sequence, torsion_classes, FlexibleRule, ResidueKind, Sequence, TorsionClass,
    BETA_BARREL_46,
};
