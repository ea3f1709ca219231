//! Binned densities on `[0, L)`, histogram estimation, and the mean absolute
//! per-bin distance used to track convergence.

use std::io::Write;

use crate::error::{Error, Result};
use crate::landscape::{simpson, FourierLandscape};

/// How analytic bin values are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BinValue {
    /// Average of the density over the bin (what a histogram estimates).
    #[default]
    Average,
    /// Density at the bin midpoint.
    Midpoint,
}

/// Per-bin density values over `[lo, hi)` with equal-width bins.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    lo: f64,
    hi: f64,
    values: Vec<f64>,
    normalized: bool,
}

impl DensityGrid {
    pub fn new(lo: f64, hi: f64, values: Vec<f64>, normalized: bool) -> Result<Self> {
        if !(hi > lo) || values.len() < 2 {
            return Err(Error::BinningMismatch(format!(
                "need hi > lo and at least two bins, got [{lo}, {hi}) with {} bins",
                values.len()
            )));
        }
        Ok(Self { lo, hi, values, normalized })
    }

    pub fn bins(&self) -> usize {
        self.values.len()
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.values.len() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// False for a histogram built from zero samples.
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn edges(&self, bin: usize) -> (f64, f64) {
        let w = self.width();
        (self.lo + bin as f64 * w, self.lo + (bin + 1) as f64 * w)
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.width()
    }

    fn same_binning(&self, other: &DensityGrid) -> bool {
        self.lo == other.lo && self.hi == other.hi && self.bins() == other.bins()
    }

    /// Writes `bin_left,bin_right,value` CSV at full precision.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "bin_left,bin_right,value")?;
        for (b, v) in self.values.iter().enumerate() {
            let (l, r) = self.edges(b);
            writeln!(out, "{l:?},{r:?},{v:?}")?;
        }
        Ok(())
    }
}

/// Analytic density of `landscape` on `bins` equal bins over `[0, L)`.
pub fn analytic_density_grid(
    landscape: &FourierLandscape,
    bins: usize,
    mode: BinValue,
) -> Result<DensityGrid> {
    if bins < 2 {
        return Err(Error::InvalidConfig(format!("need at least two bins, got {bins}")));
    }
    let period = landscape.period();
    let width = period / bins as f64;
    let norm = landscape.normalization();
    // enough panels per bin that the bin averages sum to N to ~1e-12
    let panels = (200_000 / bins).max(16);
    let values = (0..bins)
        .map(|b| {
            let (l, r) = (b as f64 * width, (b + 1) as f64 * width);
            match mode {
                BinValue::Average => simpson(|x| landscape.boltzmann(x), l, r, panels) / width / norm,
                BinValue::Midpoint => landscape.boltzmann(0.5 * (l + r)) / norm,
            }
        })
        .collect();
    DensityGrid::new(0.0, period, values, true)
}

/// Streaming histogram on a fixed binning; convert with [`Histogram::density`].
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    lo: f64,
    hi: f64,
    counts: Vec<u64>,
    total: u64,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if !(hi > lo) || bins < 2 {
            return Err(Error::InvalidConfig(format!(
                "histogram needs hi > lo and >= 2 bins, got [{lo}, {hi}) / {bins}"
            )));
        }
        Ok(Self { lo, hi, counts: vec![0; bins], total: 0 })
    }

    /// Adds a sample; samples outside `[lo, hi)` are clamped to the end bins.
    pub fn add(&mut self, x: f64) {
        let bins = self.counts.len();
        let pos = (x - self.lo) / (self.hi - self.lo) * bins as f64;
        let b = if pos.is_nan() || pos < 0.0 { 0 } else { (pos as usize).min(bins - 1) };
        self.counts[b] += 1;
        self.total += 1;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Counts scaled to unit mass; an empty histogram yields an all-zero grid
    /// flagged as unnormalised.
    pub fn density(&self) -> DensityGrid {
        let width = (self.hi - self.lo) / self.counts.len() as f64;
        let (values, normalized) = if self.total == 0 {
            (vec![0.0; self.counts.len()], false)
        } else {
            let scale = 1.0 / (self.total as f64 * width);
            (self.counts.iter().map(|&c| c as f64 * scale).collect(), true)
        };
        DensityGrid { lo: self.lo, hi: self.hi, values, normalized }
    }
}

/// Normalised histogram of `samples` on `bins` equal bins over `[0, period)`.
pub fn histogram(samples: &[f64], period: f64, bins: usize) -> Result<DensityGrid> {
    let mut hist = Histogram::new(0.0, period, bins)?;
    for &x in samples {
        hist.add(x);
    }
    Ok(hist.density())
}

/// Mean absolute per-bin difference `(1/N_b) sum |a_k - b_k|`.
pub fn delta_f(a: &DensityGrid, b: &DensityGrid) -> Result<f64> {
    if !a.same_binning(b) {
        return Err(Error::BinningMismatch(format!(
            "[{}, {})/{} vs [{}, {})/{}",
            a.lo,
            a.hi,
            a.bins(),
            b.lo,
            b.hi,
            b.bins()
        )));
    }
    let sum: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).sum();
    Ok(sum / a.bins() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(values: Vec<f64>) -> DensityGrid {
        DensityGrid::new(0.0, 10.0, values, true).unwrap()
    }

    #[test]
    fn analytic_grid_has_unit_mass() {
        let f = FourierLandscape::benchmark();
        for bins in [2, 50, 500] {
            let g = analytic_density_grid(&f, bins, BinValue::Average).unwrap();
            assert!((g.mass() - 1.0).abs() < 1e-8, "bins {bins}: mass {}", g.mass());
        }
    }

    #[test]
    fn single_bin_rejected() {
        let f = FourierLandscape::benchmark();
        assert!(analytic_density_grid(&f, 1, BinValue::Average).is_err());
    }

    #[test]
    fn midpoint_and_average_agree_to_second_order() {
        let f = FourierLandscape::benchmark();
        let a = analytic_density_grid(&f, 500, BinValue::Average).unwrap();
        let m = analytic_density_grid(&f, 500, BinValue::Midpoint).unwrap();
        let d = delta_f(&a, &m).unwrap();
        assert!(d > 0.0 && d < 1e-3, "{d}");
    }

    #[test]
    fn all_mass_in_one_bin() {
        let g = histogram(&[3.01, 3.02, 3.03], 10.0, 10).unwrap();
        assert_eq!(g.values()[3], 1.0);
        assert!((g.mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_samples_flat_histogram() {
        let n = 100_000;
        let samples: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * 10.0 / n as f64).collect();
        let g = histogram(&samples, 10.0, 50).unwrap();
        assert!(g.values().iter().all(|v| (v - 0.1).abs() < 1e-9));
    }

    #[test]
    fn empty_histogram_is_flagged() {
        let g = histogram(&[], 10.0, 5).unwrap();
        assert!(!g.is_normalized());
        assert!(g.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn delta_f_against_zero_grid() {
        let f = grid(vec![0.05, 0.1, 0.15, 0.1]);
        let z = grid(vec![0.0; 4]);
        assert!((delta_f(&z, &f).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn delta_f_rejects_binning_mismatch() {
        let a = grid(vec![0.1; 4]);
        let b = grid(vec![0.1; 5]);
        assert!(matches!(delta_f(&a, &b), Err(Error::BinningMismatch(_))));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let mut buf = Vec::new();
        grid(vec![0.1, 0.1]).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("bin_left,bin_right,value"));
        assert_eq!(text.lines().count(), 3);
        assert_eq!(text.lines().nth(2), Some("5.0,10.0,0.1"));
    }

    fn grids(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.0f64..1.0, n)
    }

    proptest! {
        #[test]
        fn delta_f_is_a_metric(a in grids(8), b in grids(8), c in grids(8)) {
            let (a, b, c) = (grid(a), grid(b), grid(c));
            let ab = delta_f(&a, &b).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(delta_f(&a, &a).unwrap(), 0.0);
            prop_assert_eq!(ab, delta_f(&b, &a).unwrap());
            prop_assert!(ab <= delta_f(&a, &c).unwrap() + delta_f(&c, &b).unwrap() + 1e-12);
            if a != b {
                prop_assert!(ab > 0.0);
            }
        }
    }
}
