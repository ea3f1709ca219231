//! BLN force field: harmonic bonds and bends, cosine torsions, and
//! bead-type-specific 12-6 nonbonded pairs.

use std::sync::atomic::{AtomicU64, Ordering};

use super::conformation::{build_extended, Conformation};
use super::geometry::{Vec3, COLLINEAR_SINE};
use super::params::BlnParams;
use super::sequence::{torsion_classes, Sequence, TorsionClass};
use crate::energy::EnergyFunction;

#[derive(Debug, Clone, Copy)]
struct Pair {
    i: usize,
    j: usize,
    c12: f64,
    c6: f64,
}

/// Energy split by term.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnergyTerms {
    pub bond: f64,
    pub bend: f64,
    pub torsion: f64,
    pub nonbonded: f64,
}

impl EnergyTerms {
    pub fn total(&self) -> f64 {
        self.bond + self.bend + self.torsion + self.nonbonded
    }
}

/// A BLN chain of a fixed sequence, usable as an [`EnergyFunction`] over
/// flat `3n` coordinates.
#[derive(Debug)]
pub struct BlnModel {
    sequence: Sequence,
    params: BlnParams,
    classes: Vec<TorsionClass>,
    torsions: Vec<(f64, f64)>,
    pairs: Vec<Pair>,
    regularized: AtomicU64,
}

impl Clone for BlnModel {
    fn clone(&self) -> Self {
        Self::new(self.sequence.clone(), self.params)
    }
}

#[inline]
fn at(x: &[f64], i: usize) -> Vec3 {
    Vec3::new(x[3 * i], x[3 * i + 1], x[3 * i + 2])
}

#[inline]
fn add(g: &mut [f64], i: usize, v: &Vec3) {
    g[3 * i] += v.x;
    g[3 * i + 1] += v.y;
    g[3 * i + 2] += v.z;
}

impl BlnModel {
    pub fn new(sequence: Sequence, params: BlnParams) -> Self {
        assert!(params.is_valid(), "BLN stiffnesses and sigma must be positive");
        let classes = torsion_classes(&sequence, params.flexible_rule);
        let torsions = classes.iter().map(|&c| params.torsion_coefficients(c)).collect();
        let res = sequence.residues();
        let (s6, s12) = (params.sigma.powi(6), params.sigma.powi(12));
        let mut pairs = Vec::new();
        for i in 0..res.len() {
            for j in i + 3..res.len() {
                let (c12, c6) = params.pair_coefficients(res[i], res[j]);
                pairs.push(Pair { i, j, c12: c12 * s12, c6: c6 * s6 });
            }
        }
        Self { sequence, params, classes, torsions, pairs, regularized: AtomicU64::new(0) }
    }

    /// The 46-bead beta-barrel sequence with default parameters.
    pub fn beta_barrel() -> Self {
        Self::new(Sequence::beta_barrel(), BlnParams::default())
    }

    pub fn sequence(&self) -> &Sequence {
        &self.sequence
    }

    pub fn params(&self) -> &BlnParams {
        &self.params
    }

    pub fn torsion_classes(&self) -> &[TorsionClass] {
        &self.classes
    }

    /// Number of gradient evaluations that hit the collinear-geometry guard.
    pub fn regularized_count(&self) -> u64 {
        self.regularized.load(Ordering::Relaxed)
    }

    /// Energy of the fully extended chain, an approximate upper bound on
    /// energies with near-ideal bonds and bends.
    pub fn unfolded_energy(&self) -> f64 {
        self.conformation_energy(&build_extended(&self.sequence, &self.params))
    }

    pub fn conformation_energy(&self, conf: &Conformation) -> f64 {
        self.energy(&conf.to_flat())
    }

    /// Per-term energy; any coincident bonded or nonbonded pair makes the
    /// affected term `+inf`.
    pub fn terms(&self, x: &[f64]) -> EnergyTerms {
        let n = self.sequence.len();
        let p = &self.params;
        let mut t = EnergyTerms::default();
        for i in 1..n {
            let d = (at(x, i) - at(x, i - 1)).norm();
            if d == 0.0 {
                t.bond = f64::INFINITY;
            }
            t.bond += 0.5 * p.k_bond * (d - p.sigma).powi(2);
        }
        for i in 1..n.saturating_sub(1) {
            let u = at(x, i - 1) - at(x, i);
            let v = at(x, i + 1) - at(x, i);
            let theta = u.cross(&v).norm().atan2(u.dot(&v));
            t.bend += 0.5 * p.k_bend * (theta - p.theta0).powi(2);
        }
        for (k, &(a, b)) in self.torsions.iter().enumerate() {
            let b1 = at(x, k + 1) - at(x, k);
            let b2 = at(x, k + 2) - at(x, k + 1);
            let b3 = at(x, k + 3) - at(x, k + 2);
            let n1 = b1.cross(&b2);
            let n2 = b2.cross(&b3);
            let phi = (b2.norm() * b1.dot(&n2)).atan2(n1.dot(&n2));
            t.torsion += a * (1.0 + phi.cos()) + b * (1.0 + (3.0 * phi).cos());
        }
        for pair in &self.pairs {
            let r2 = (at(x, pair.i) - at(x, pair.j)).norm_squared();
            if r2 == 0.0 {
                t.nonbonded = f64::INFINITY;
                continue;
            }
            let inv6 = (1.0 / r2).powi(3);
            t.nonbonded += pair.c12 * inv6 * inv6 + pair.c6 * inv6;
        }
        t
    }

    /// Writes the analytic gradient into `g` and returns the energy.
    fn evaluate(&self, x: &[f64], g: &mut [f64]) -> f64 {
        let n = self.sequence.len();
        let p = &self.params;
        g.iter_mut().for_each(|v| *v = 0.0);
        let mut energy = 0.0;
        let mut regularized = false;

        for i in 1..n {
            let r = at(x, i) - at(x, i - 1);
            let d = r.norm();
            if d == 0.0 {
                return f64::INFINITY;
            }
            let dev = d - p.sigma;
            energy += 0.5 * p.k_bond * dev * dev;
            let f = r * (p.k_bond * dev / d);
            add(g, i, &f);
            add(g, i - 1, &(-f));
        }

        for b in 1..n.saturating_sub(1) {
            let u = at(x, b - 1) - at(x, b);
            let v = at(x, b + 1) - at(x, b);
            let (lu, lv) = (u.norm(), v.norm());
            let cross = u.cross(&v).norm();
            let dot = u.dot(&v);
            let theta = cross.atan2(dot);
            let dev = theta - p.theta0;
            energy += 0.5 * p.k_bend * dev * dev;
            let cos = dot / (lu * lv);
            let mut sin = cross / (lu * lv);
            if sin < COLLINEAR_SINE {
                sin = COLLINEAR_SINE;
                regularized = true;
            }
            // d theta / d r = -(1 / sin) d cos / d r
            let dcos_da = (v / (lu * lv)) - u * (cos / (lu * lu));
            let dcos_dc = (u / (lu * lv)) - v * (cos / (lv * lv));
            let scale = -p.k_bend * dev / sin;
            let ga = dcos_da * scale;
            let gc = dcos_dc * scale;
            add(g, b - 1, &ga);
            add(g, b + 1, &gc);
            add(g, b, &(-(ga + gc)));
        }

        for (k, &(a, bcoef)) in self.torsions.iter().enumerate() {
            let (p0, p1, p2, p3) = (at(x, k), at(x, k + 1), at(x, k + 2), at(x, k + 3));
            let f = p0 - p1;
            let gv = p1 - p2;
            let h = p3 - p2;
            let am = f.cross(&gv);
            let bm = h.cross(&gv);
            let lg = gv.norm();
            let b1 = p1 - p0;
            let b3 = p3 - p2;
            let n1 = b1.cross(&(-gv));
            let n2 = (-gv).cross(&b3);
            let phi = (lg * b1.dot(&n2)).atan2(n1.dot(&n2));
            energy += a * (1.0 + phi.cos()) + bcoef * (1.0 + (3.0 * phi).cos());
            let de_dphi = -a * phi.sin() - 3.0 * bcoef * (3.0 * phi).sin();
            let mut a2 = am.norm_squared();
            let mut b2 = bm.norm_squared();
            let floor_a = (COLLINEAR_SINE * f.norm() * lg).powi(2);
            let floor_b = (COLLINEAR_SINE * h.norm() * lg).powi(2);
            if a2 < floor_a {
                a2 = floor_a;
                regularized = true;
            }
            if b2 < floor_b {
                b2 = floor_b;
                regularized = true;
            }
            let fg = f.dot(&gv);
            let hg = h.dot(&gv);
            let d0 = am * (-lg / a2);
            let d3 = bm * (lg / b2);
            let d1 = am * (lg / a2 + fg / (a2 * lg)) - bm * (hg / (b2 * lg));
            let d2 = bm * (hg / (b2 * lg)) - am * (fg / (a2 * lg)) - bm * (lg / b2);
            add(g, k, &(d0 * de_dphi));
            add(g, k + 1, &(d1 * de_dphi));
            add(g, k + 2, &(d2 * de_dphi));
            add(g, k + 3, &(d3 * de_dphi));
        }

        for pair in &self.pairs {
            let r = at(x, pair.i) - at(x, pair.j);
            let r2 = r.norm_squared();
            if r2 == 0.0 {
                return f64::INFINITY;
            }
            let inv2 = 1.0 / r2;
            let inv6 = inv2 * inv2 * inv2;
            let e12 = pair.c12 * inv6 * inv6;
            let e6 = pair.c6 * inv6;
            energy += e12 + e6;
            // dV/dr * (1/r)
            let coef = -(12.0 * e12 + 6.0 * e6) * inv2;
            let f = r * coef;
            add(g, pair.i, &f);
            add(g, pair.j, &(-f));
        }

        if regularized {
            self.regularized.fetch_add(1, Ordering::Relaxed);
            log::debug!("collinear bend or torsion regularised in BLN gradient");
        }
        energy
    }
}

impl EnergyFunction for BlnModel {
    fn dimension(&self) -> usize {
        3 * self.sequence.len()
    }

    fn energy(&self, state: &[f64]) -> f64 {
        self.terms(state).total()
    }

    fn gradient(&self, state: &[f64], grad: &mut [f64]) {
        self.evaluate(state, grad);
    }

    fn energy_and_gradient(&self, state: &[f64], grad: &mut [f64]) -> f64 {
        self.evaluate(state, grad)
    }
}
