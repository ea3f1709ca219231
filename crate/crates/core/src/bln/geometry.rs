//! Internal coordinates of a bead chain: bond lengths, bend angles and
//! dihedrals, plus rigid rotation about a bond.

use nalgebra::Vector3;

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Sines below this are treated as collinear.
pub const COLLINEAR_SINE: f64 = 1e-10;

/// Angle at `b` formed by `a`-`b`-`c`, in `[0, pi]`.
pub fn bend_angle(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let u = a - b;
    let v = c - b;
    u.cross(&v).norm().atan2(u.dot(&v))
}

/// Signed dihedral of `p0-p1-p2-p3` in `(-pi, pi]`: 0 for the planar cis
/// arrangement, pi for trans. Fails when either bend is collinear.
pub fn dihedral(p0: &Vec3, p1: &Vec3, p2: &Vec3, p3: &Vec3) -> Result<f64> {
    let b1 = p1 - p0;
    let b2 = p2 - p1;
    let b3 = p3 - p2;
    let n1 = b1.cross(&b2);
    let n2 = b2.cross(&b3);
    let b2n = b2.norm();
    if n1.norm() <= COLLINEAR_SINE * b1.norm() * b2n || n2.norm() <= COLLINEAR_SINE * b2n * b3.norm()
    {
        return Err(Error::DegenerateGeometry("collinear beads in dihedral".into()));
    }
    let phi = (b2n * b1.dot(&n2)).atan2(n1.dot(&n2));
    // atan2 returns -pi for the trans case approached from below
    Ok(if phi <= -std::f64::consts::PI { std::f64::consts::PI } else { phi })
}

/// Rotates `p` by `angle` (right-handed) about the axis through `origin`
/// along the unit vector `axis`.
pub fn rotate_about(p: &Vec3, origin: &Vec3, axis: &Vec3, angle: f64) -> Vec3 {
    let v = p - origin;
    let (s, c) = angle.sin_cos();
    origin + v * c + axis.cross(&v) * s + axis * axis.dot(&v) * (1.0 - c)
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(phi: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut x = phi.rem_euclid(TAU);
    if x > PI {
        x -= TAU;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn planar_cis_and_trans() {
        let p1 = Vec3::new(0.0, 0.0, 0.0);
        let p2 = Vec3::new(1.0, 0.0, 0.0);
        let p0 = Vec3::new(0.0, 1.0, 0.0);
        let cis = Vec3::new(1.0, 1.0, 0.0);
        let trans = Vec3::new(1.0, -1.0, 0.0);
        assert!(dihedral(&p0, &p1, &p2, &cis).unwrap().abs() < 1e-15);
        assert_eq!(dihedral(&p0, &p1, &p2, &trans).unwrap(), PI);
    }

    #[test]
    fn mirror_negates_dihedral() {
        let pts = [
            Vec3::new(0.3, 1.1, -0.2),
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.1, 0.0),
            Vec3::new(1.4, 0.7, 0.9),
        ];
        let mirrored: Vec<Vec3> = pts.iter().map(|p| Vec3::new(p.x, p.y, -p.z)).collect();
        let a = dihedral(&pts[0], &pts[1], &pts[2], &pts[3]).unwrap();
        let b = dihedral(&mirrored[0], &mirrored[1], &mirrored[2], &mirrored[3]).unwrap();
        assert!(a.abs() > 0.1);
        assert!((a + b).abs() < 1e-14);
    }

    #[test]
    fn collinear_dihedral_is_an_error() {
        let p: Vec<Vec3> = (0..3).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect();
        let q = Vec3::new(2.0, 1.0, 0.0);
        assert!(dihedral(&p[0], &p[1], &p[2], &q).is_err());
    }

    #[test]
    fn bend_angle_right_angle() {
        let a = Vec3::new(1.0, 0.0, 0.0);
        let b = Vec3::zeros();
        let c = Vec3::new(0.0, 2.0, 0.0);
        assert!((bend_angle(&a, &b, &c) - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn angle_wrapping() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }
}
