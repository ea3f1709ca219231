//! Bead-chain conformations: construction, internal-coordinate edits, loop
//! randomisation and the text file format.

use std::fmt::Write as _;
use std::f64::consts::PI;
use std::io::{BufRead, Write};

use rand::Rng;

use super::geometry::{bend_angle, dihedral, rotate_about, Vec3};
use super::params::BlnParams;
use super::sequence::{ResidueKind, Sequence, TorsionClass};
use crate::error::{Error, Result};

/// Positions (Angstrom) of every bead of a sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Conformation {
    sequence: Sequence,
    positions: Vec<Vec3>,
}

impl Conformation {
    pub fn new(sequence: Sequence, positions: Vec<Vec3>) -> Result<Self> {
        if positions.len() != sequence.len() {
            return Err(Error::LengthMismatch { expected: sequence.len(), found: positions.len() });
        }
        if positions.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::DegenerateGeometry("non-finite coordinate".into()));
        }
        Ok(Self { sequence, positions })
    }

    /// Builds from a flat `[x0, y0, z0, x1, ...]` coordinate vector.
    pub fn from_flat(sequence: Sequence, coords: &[f64]) -> Result<Self> {
        if coords.len() != 3 * sequence.len() {
            return Err(Error::LengthMismatch { expected: 3 * sequence.len(), found: coords.len() });
        }
        let positions = coords.chunks_exact(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect();
        Self::new(sequence, positions)
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.positions.iter().flat_map(|p| [p.x, p.y, p.z]).collect()
    }

    pub fn sequence(&self) -> &Sequence {
        &self.sequence
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn num_dihedrals(&self) -> usize {
        self.len().saturating_sub(3)
    }

    pub fn bond_lengths(&self) -> Vec<f64> {
        self.positions.windows(2).map(|w| (w[1] - w[0]).norm()).collect()
    }

    /// Bend angle at each interior bead.
    pub fn bend_angles(&self) -> Vec<f64> {
        self.positions.windows(3).map(|w| bend_angle(&w[0], &w[1], &w[2])).collect()
    }

    /// Dihedral `t` over beads `t..=t+3` (0-based), in `(-pi, pi]`.
    pub fn dihedral_angle(&self, t: usize) -> Result<f64> {
        if t + 3 >= self.len() {
            return Err(Error::DegenerateGeometry(format!(
                "dihedral {t} out of range for {} beads",
                self.len()
            )));
        }
        let p = &self.positions;
        dihedral(&p[t], &p[t + 1], &p[t + 2], &p[t + 3])
    }

    pub fn dihedral_angles(&self) -> Result<Vec<f64>> {
        (0..self.num_dihedrals()).map(|t| self.dihedral_angle(t)).collect()
    }

    /// Returns a copy with dihedral `t` set to `phi`, obtained by rigidly
    /// rotating beads `t+3..` about the `t+1 -> t+2` bond. No other internal
    /// coordinate changes.
    pub fn set_torsion(&self, t: usize, phi: f64) -> Result<Conformation> {
        let current = self.dihedral_angle(t)?;
        let origin = self.positions[t + 2];
        let axis = (self.positions[t + 2] - self.positions[t + 1]).normalize();
        let delta = phi - current;
        let mut out = self.clone();
        for p in &mut out.positions[t + 3..] {
            *p = rotate_about(p, &origin, &axis, delta);
        }
        Ok(out)
    }

    /// Smallest distance between beads at least three bonds apart.
    pub fn min_nonbonded_distance(&self) -> f64 {
        let p = &self.positions;
        let mut best = f64::INFINITY;
        for i in 0..p.len() {
            for j in i + 3..p.len() {
                best = best.min((p[i] - p[j]).norm());
            }
        }
        best
    }

    pub fn centroid(&self) -> Vec3 {
        self.positions.iter().sum::<Vec3>() / self.len() as f64
    }

    /// Applies `p -> rotation * p + translation` to every bead.
    pub fn transformed(&self, rotation: &nalgebra::Rotation3<f64>, translation: &Vec3) -> Self {
        let positions = self.positions.iter().map(|p| rotation * p + translation).collect();
        Self { sequence: self.sequence.clone(), positions }
    }

    /// Writes the bead-count / comment / `KIND x y z` text format with 17
    /// significant digits per coordinate.
    pub fn write_xyz<W: Write>(&self, mut out: W, comment: &str) -> std::io::Result<()> {
        let mut text = String::new();
        let _ = writeln!(text, "{}", self.len());
        let _ = writeln!(text, "{}", comment.replace(['\n', '\r'], " "));
        for (kind, p) in self.sequence.residues().iter().zip(&self.positions) {
            let _ = writeln!(text, "{} {:.16e} {:.16e} {:.16e}", kind.as_char(), p.x, p.y, p.z);
        }
        out.write_all(text.as_bytes())
    }

    /// Reads the format written by [`write_xyz`](Self::write_xyz); returns the
    /// conformation and the comment line.
    pub fn read_xyz<R: BufRead>(input: R) -> Result<(Conformation, String)> {
        let mut lines = input.lines();
        let mut next = |line: usize| -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::ConformationFormat { line, message: "unexpected end of file".into() })?
                .map_err(Error::from)
        };
        let count: usize = next(1)?.trim().parse().map_err(|_| Error::ConformationFormat {
            line: 1,
            message: "expected bead count".into(),
        })?;
        let comment = next(2)?;
        let mut kinds = Vec::with_capacity(count);
        let mut positions = Vec::with_capacity(count);
        for k in 0..count {
            let line_no = k + 3;
            let line = next(line_no)?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = |message: &str| Error::ConformationFormat { line: line_no, message: message.into() };
            if fields.len() != 4 {
                return Err(bad("expected `KIND x y z`"));
            }
            let mut chars = fields[0].chars();
            let kind = match (chars.next().and_then(ResidueKind::from_char), chars.next()) {
                (Some(kind), None) => kind,
                _ => return Err(bad("bead kind must be B, L or N")),
            };
            let mut xyz = [0.0; 3];
            for (slot, field) in xyz.iter_mut().zip(&fields[1..]) {
                *slot = field.parse().map_err(|_| bad("unparseable coordinate"))?;
            }
            kinds.push(kind);
            positions.push(Vec3::new(xyz[0], xyz[1], xyz[2]));
        }
        Ok((Conformation::new(Sequence::new(kinds), positions)?, comment))
    }
}

/// Planar zig-zag chain with every bond at `sigma`, every bend at `theta0`
/// and every dihedral trans.
pub fn build_extended(seq: &Sequence, params: &BlnParams) -> Conformation {
    let half = 0.5 * params.theta0;
    let (s, c) = (params.sigma * half.sin(), params.sigma * half.cos());
    let mut positions = Vec::with_capacity(seq.len());
    let mut p = Vec3::zeros();
    for i in 0..seq.len() {
        positions.push(p);
        let dy = if i % 2 == 0 { c } else { -c };
        p += Vec3::new(s, dy, 0.0);
    }
    Conformation { sequence: seq.clone(), positions }
}

/// Maximum redraws in [`randomize_loops`].
pub const MAX_LOOP_ATTEMPTS: usize = 1000;

/// Sets every flexible dihedral of `native` to an independent uniform angle
/// in `(-pi, pi]`, redrawing whenever two non-neighbour beads come closer
/// than `0.5 sigma`.
pub fn randomize_loops<R: Rng + ?Sized>(
    native: &Conformation,
    classes: &[TorsionClass],
    params: &BlnParams,
    rng: &mut R,
) -> Result<Conformation> {
    randomize_torsions(native, |t| classes[t] == TorsionClass::Flexible, params, rng)
}

/// Like [`randomize_loops`] but for any subset of dihedrals.
pub fn randomize_torsions<R: Rng + ?Sized>(
    start: &Conformation,
    select: impl FnMut(usize) -> bool,
    params: &BlnParams,
    rng: &mut R,
) -> Result<Conformation> {
    resample_torsions(start, select, |_, rng: &mut R| PI - rng.random::<f64>() * 2.0 * PI, params, rng)
}

/// Sets every selected dihedral `t` to `draw(t, rng)`, redrawing the whole
/// set whenever two non-neighbour beads come closer than `0.5 sigma`.
pub fn resample_torsions<R: Rng + ?Sized>(
    start: &Conformation,
    mut select: impl FnMut(usize) -> bool,
    mut draw: impl FnMut(usize, &mut R) -> f64,
    params: &BlnParams,
    rng: &mut R,
) -> Result<Conformation> {
    let chosen: Vec<usize> = (0..start.num_dihedrals()).filter(|&t| select(t)).collect();
    if chosen.is_empty() {
        return Ok(start.clone());
    }
    let floor = 0.5 * params.sigma;
    for _ in 0..MAX_LOOP_ATTEMPTS {
        let mut conf = start.clone();
        for &t in &chosen {
            let phi = draw(t, rng);
            conf = conf.set_torsion(t, phi)?;
        }
        if conf.min_nonbonded_distance() >= floor {
            return Ok(conf);
        }
    }
    Err(Error::StructureGeneration(MAX_LOOP_ATTEMPTS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bln::sequence::{parse_sequence, torsion_classes, FlexibleRule};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bent_conf() -> Conformation {
        let seq = Sequence::beta_barrel();
        let params = BlnParams::default();
        let ext = build_extended(&seq, &params);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        randomize_torsions(&ext, |_| true, &params, &mut rng).unwrap()
    }

    #[test]
    fn extended_chain_is_ideal() {
        let seq = Sequence::beta_barrel();
        let params = BlnParams::default();
        let conf = build_extended(&seq, &params);
        assert!(conf.bond_lengths().iter().all(|d| (d - 1.0).abs() < 1e-14));
        assert!(conf.bend_angles().iter().all(|t| (t - params.theta0).abs() < 1e-12));
        for phi in conf.dihedral_angles().unwrap() {
            assert!((phi.abs() - PI).abs() < 1e-12, "{phi}");
        }
    }

    #[test]
    fn set_torsion_identity() {
        let conf = bent_conf();
        let phi = conf.dihedral_angle(12).unwrap();
        let same = conf.set_torsion(12, phi).unwrap();
        for (a, b) in conf.positions().iter().zip(same.positions()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn set_torsion_changes_exactly_one_coordinate() {
        let conf = bent_conf();
        let target = 0.75;
        let moved = conf.set_torsion(20, target).unwrap();
        assert!((moved.dihedral_angle(20).unwrap() - target).abs() < 1e-10);
        for (a, b) in conf.bond_lengths().iter().zip(moved.bond_lengths()) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in conf.bend_angles().iter().zip(moved.bend_angles()) {
            assert!((a - b).abs() < 1e-10);
        }
        let before = conf.dihedral_angles().unwrap();
        let after = moved.dihedral_angles().unwrap();
        for t in (0..before.len()).filter(|&t| t != 20) {
            assert!((before[t] - after[t]).abs() < 1e-10, "dihedral {t}");
        }
    }

    #[test]
    fn set_torsion_on_collinear_axis_fails() {
        let seq = parse_sequence("B4").unwrap();
        let pos = vec![
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
        ];
        let conf = Conformation::new(seq, pos).unwrap();
        assert!(conf.set_torsion(0, 1.0).is_err());
    }

    #[test]
    fn randomize_loops_leaves_rigid_torsions() {
        let seq = Sequence::beta_barrel();
        let params = BlnParams::default();
        let classes = torsion_classes(&seq, FlexibleRule::TwoOrMore);
        let start = bent_conf();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let out = randomize_loops(&start, &classes, &params, &mut rng).unwrap();
        let (a, b) = (start.dihedral_angles().unwrap(), out.dihedral_angles().unwrap());
        let mut changed = 0;
        for t in 0..a.len() {
            match classes[t] {
                TorsionClass::Rigid => assert!((a[t] - b[t]).abs() < 1e-10),
                TorsionClass::Flexible => changed += usize::from((a[t] - b[t]).abs() > 1e-8),
            }
        }
        assert!(changed > 0);
        assert!(out.min_nonbonded_distance() >= 0.5);
    }

    #[test]
    fn randomize_loops_without_loops_is_identity() {
        let seq = parse_sequence("(BL)5").unwrap();
        let params = BlnParams::default();
        let classes = torsion_classes(&seq, FlexibleRule::TwoOrMore);
        let conf = build_extended(&seq, &params);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(randomize_loops(&conf, &classes, &params, &mut rng).unwrap(), conf);
    }

    #[test]
    fn xyz_round_trip_is_bit_exact() {
        let conf = bent_conf();
        let mut buf = Vec::new();
        conf.write_xyz(&mut buf, "native").unwrap();
        let (back, comment) = Conformation::read_xyz(&buf[..]).unwrap();
        assert_eq!(comment, "native");
        assert_eq!(back, conf);
        let mut again = Vec::new();
        back.write_xyz(&mut again, "native").unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn xyz_rejects_bad_kind() {
        let text = "1\nx\nQ 0 0 0\n";
        assert!(matches!(
            Conformation::read_xyz(text.as_bytes()),
            Err(Error::ConformationFormat { line: 3, .. })
        ));
    }
}
