use super::sequence::{FlexibleRule, ResidueKind, TorsionClass};

/// One energy unit in Kelvin, for display only; all internal energies and
/// temperatures are in units of the hydrophobic well depth.
pub const EPSILON_H_KELVIN: f64 = 1000.0;

/// Converts a reduced energy or temperature to Kelvin.
pub fn to_kelvin(reduced: f64) -> f64 {
    reduced * EPSILON_H_KELVIN
}

/// Force-field parameters of the BLN model in reduced units (energies in
/// `epsilon_H`, lengths in Angstrom).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlnParams {
    pub k_bond: f64,
    pub sigma: f64,
    pub k_bend: f64,
    /// Equilibrium bend angle in radians.
    pub theta0: f64,
    pub epsilon: f64,
    pub rigid_torsion: (f64, f64),
    pub flexible_torsion: (f64, f64),
    pub flexible_rule: FlexibleRule,
}

impl Default for BlnParams {
    fn default() -> Self {
        Self {
            k_bond: 1000.0,
            sigma: 1.0,
            k_bend: 20.0,
            theta0: 105f64.to_radians(),
            epsilon: 1.0,
            rigid_torsion: (1.2, 1.2),
            flexible_torsion: (0.0, 0.2),
            flexible_rule: FlexibleRule::TwoOrMore,
        }
    }
}

impl BlnParams {
    /// `(A, B)` coefficients for a torsion of class `class`.
    pub fn torsion_coefficients(&self, class: TorsionClass) -> (f64, f64) {
        let (a, b) = match class {
            TorsionClass::Rigid => self.rigid_torsion,
            TorsionClass::Flexible => self.flexible_torsion,
        };
        (a * self.epsilon, b * self.epsilon)
    }

    /// `(c12, c6)` such that `V(r) = c12 (sigma/r)^12 + c6 (sigma/r)^6`.
    ///
    /// Neutral partners take precedence, then hydrophilic: B-B attracts,
    /// L-B and L-L repel softly, anything with N is purely repulsive.
    pub fn pair_coefficients(&self, a: ResidueKind, b: ResidueKind) -> (f64, f64) {
        use ResidueKind::*;
        let e = self.epsilon;
        match (a, b) {
            (N, _) | (_, N) => (4.0 * e, 0.0),
            (L, _) | (_, L) => (8.0 / 3.0 * e, 8.0 / 3.0 * e),
            (B, B) => (4.0 * e, -4.0 * e),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.k_bond > 0.0 && self.k_bend > 0.0 && self.sigma > 0.0 && self.epsilon > 0.0
    }
}
