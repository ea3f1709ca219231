//! Root-mean-square deviation after optimal rigid superposition.

use nalgebra::{Matrix3, Rotation3};

use super::conformation::Conformation;
use super::geometry::Vec3;
use crate::error::{Error, Result};

/// Proper rotation that best maps centred `mobile` onto centred `target`
/// (Kabsch, reflections excluded).
pub fn kabsch_rotation(mobile: &[Vec3], target: &[Vec3]) -> Rotation3<f64> {
    let mut cov = Matrix3::zeros();
    for (a, b) in mobile.iter().zip(target) {
        cov += b * a.transpose();
    }
    let svd = cov.svd(true, true);
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let d = (u * v_t).determinant().signum();
    let fix = Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, if d < 0.0 { -1.0 } else { 1.0 }));
    Rotation3::from_matrix_unchecked(u * fix * v_t)
}

/// RMSD between two equally long point sets after optimal translation and
/// proper rotation.
pub fn rmsd_points(a: &[Vec3], b: &[Vec3]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { expected: a.len(), found: b.len() });
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let n = a.len() as f64;
    let ca = a.iter().sum::<Vec3>() / n;
    let cb = b.iter().sum::<Vec3>() / n;
    let a: Vec<Vec3> = a.iter().map(|p| p - ca).collect();
    let b: Vec<Vec3> = b.iter().map(|p| p - cb).collect();
    let rot = kabsch_rotation(&a, &b);
    let sum: f64 = a.iter().zip(&b).map(|(p, q)| (rot * p - q).norm_squared()).sum();
    Ok((sum / n).sqrt())
}

pub fn rmsd(a: &Conformation, b: &Conformation) -> Result<f64> {
    rmsd_points(a.positions(), b.positions())
}
