//! Rough one-dimensional Fourier energy landscape on a periodic interval.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::energy::{wrap_periodic, EnergyFunction, Topology};

/// Coefficients `c_1..c_20` of the benchmark landscape.
pub const BENCHMARK_COEFFICIENTS: [f64; 20] = [
    0.21, 1.25, 0.61, 0.25, 0.13, 0.10, 1.16, 0.18, 0.12, 0.23, 0.21, 0.19, 0.37, 0.99, 0.36, 0.02,
    0.06, 0.08, 0.09, 0.04,
];

pub const BENCHMARK_PERIOD: f64 = 10.0;

/// Panels used for the normalisation integral.
pub const NORMALIZATION_PANELS: usize = 100_000;

/// `h(x) = 2 sum_i c_i sin(2 pi i x / L)` on `[0, L)`, periodic.
#[derive(Debug, Clone)]
pub struct FourierLandscape {
    coefficients: Vec<f64>,
    period: f64,
    normalization: OnceLock<f64>,
}

impl Default for FourierLandscape {
    fn default() -> Self {
        Self::benchmark()
    }
}

impl FourierLandscape {
    /// The 20-term benchmark landscape with `L = 10`.
    pub fn benchmark() -> Self {
        Self::new(BENCHMARK_COEFFICIENTS.to_vec(), BENCHMARK_PERIOD)
    }

    /// A landscape with arbitrary coefficients (mainly for tests).
    pub fn new(coefficients: Vec<f64>, period: f64) -> Self {
        assert!(period > 0.0 && period.is_finite(), "period must be positive");
        Self { coefficients, period, normalization: OnceLock::new() }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    fn wavenumber(&self) -> f64 {
        2.0 * PI / self.period
    }

    pub fn h(&self, x: f64) -> f64 {
        let x = wrap_periodic(x, self.period);
        let w = self.wavenumber() * x;
        2.0 * self
            .coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| c * ((i + 1) as f64 * w).sin())
            .sum::<f64>()
    }

    pub fn dh_dx(&self, x: f64) -> f64 {
        let x = wrap_periodic(x, self.period);
        let k = self.wavenumber();
        let w = k * x;
        2.0 * self
            .coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let n = (i + 1) as f64;
                c * n * k * (n * w).cos()
            })
            .sum::<f64>()
    }

    /// `exp(-h(x))`, the unnormalised target density.
    pub fn boltzmann(&self, x: f64) -> f64 {
        (-self.h(x)).exp()
    }

    /// `N = integral_0^L exp(-h(x)) dx` by composite Simpson with
    /// [`NORMALIZATION_PANELS`] panels; cached after the first call.
    pub fn normalization(&self) -> f64 {
        *self
            .normalization
            .get_or_init(|| simpson(|x| self.boltzmann(x), 0.0, self.period, NORMALIZATION_PANELS))
    }

    /// Normalised density `f(x) = exp(-h(x)) / N`.
    pub fn density(&self, x: f64) -> f64 {
        self.boltzmann(x) / self.normalization()
    }
}

impl EnergyFunction for FourierLandscape {
    fn dimension(&self) -> usize {
        1
    }

    fn topology(&self) -> Topology {
        Topology::Periodic(self.period)
    }

    fn energy(&self, state: &[f64]) -> f64 {
        self.h(state[0])
    }

    fn gradient(&self, state: &[f64], grad: &mut [f64]) {
        grad[0] = self.dh_dx(state[0]);
    }

    fn energy_and_gradient(&self, state: &[f64], grad: &mut [f64]) -> f64 {
        let x = wrap_periodic(state[0], self.period);
        let k = self.wavenumber();
        let w = k * x;
        let (mut h, mut g) = (0.0, 0.0);
        for (i, c) in self.coefficients.iter().enumerate() {
            let n = (i + 1) as f64;
            let (s, co) = (n * w).sin_cos();
            h += c * s;
            g += c * n * k * co;
        }
        grad[0] = 2.0 * g;
        2.0 * h
    }
}

/// Composite Simpson rule with `panels` panels (rounded up to even).
pub fn simpson<G: Fn(f64) -> f64>(g: G, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels.max(2) + panels % 2;
    let step = (b - a) / n as f64;
    let mut sum = g(a) + g(b);
    for i in 1..n {
        let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += weight * g(a + i as f64 * step);
    }
    sum * step / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn vanishes_at_zero_and_half_period() {
        let f = FourierLandscape::benchmark();
        assert!(f.h(0.0).abs() < 1e-12);
        assert!(f.h(5.0).abs() < 1e-12);
    }

    #[test]
    fn value_at_quarter_period() {
        let c = BENCHMARK_COEFFICIENTS;
        // sin(i pi / 2) = +1, 0, -1, 0, ... for i = 1, 2, 3, ...
        let mut expected = 0.0;
        for (i, ci) in c.iter().enumerate() {
            match (i + 1) % 4 {
                1 => expected += 2.0 * ci,
                3 => expected -= 2.0 * ci,
                _ => {}
            }
        }
        let h = FourierLandscape::benchmark().h(2.5);
        assert!((h - expected).abs() < 1e-12);
        assert!((h + 3.08).abs() < 1e-2);
    }

    #[test]
    fn gradient_at_quarter_period_uses_even_terms_only() {
        let f = FourierLandscape::benchmark();
        let k = 2.0 * PI / 10.0;
        // cos(i pi / 2) is 0 for odd i, (-1)^{i/2} for even i
        let mut expected = 0.0;
        for (i, ci) in BENCHMARK_COEFFICIENTS.iter().enumerate() {
            let n = i + 1;
            if n % 2 == 0 {
                let sign = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
                expected += 2.0 * ci * n as f64 * k * sign;
            }
        }
        assert!((f.dh_dx(2.5) - expected).abs() < 1e-10);
    }

    #[test]
    fn flat_landscape_normalizes_to_period() {
        let f = FourierLandscape::new(vec![0.0; 20], 10.0);
        assert!((f.normalization() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn normalization_self_converges() {
        let f = FourierLandscape::benchmark();
        let coarse = simpson(|x| f.boltzmann(x), 0.0, 10.0, NORMALIZATION_PANELS);
        let fine = simpson(|x| f.boltzmann(x), 0.0, 10.0, 2 * NORMALIZATION_PANELS);
        assert!(((coarse - fine) / fine).abs() < 1e-10);
    }

    #[test]
    fn combined_evaluation_matches_separate() {
        let f = FourierLandscape::benchmark();
        let mut g = [0.0];
        for i in 0..50 {
            let x = i as f64 * 0.237;
            let h = f.energy_and_gradient(&[x], &mut g);
            assert!((h - f.h(x)).abs() < 1e-12);
            assert!((g[0] - f.dh_dx(x)).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn periodic(x in -100.0f64..100.0) {
            let f = FourierLandscape::benchmark();
            prop_assert!((f.h(x) - f.h(x + 10.0)).abs() <= 1e-12);
            prop_assert!((f.dh_dx(x) - f.dh_dx(x + 10.0)).abs() <= 1e-10);
        }

        #[test]
        fn gradient_matches_finite_differences(x in 0.0f64..10.0) {
            let f = FourierLandscape::benchmark();
            // five-point stencil
            let step = 5e-4;
            let fd = (8.0 * (f.h(x + step) - f.h(x - step)) - (f.h(x + 2.0 * step) - f.h(x - 2.0 * step)))
                / (12.0 * step);
            let g = f.dh_dx(x);
            prop_assert!((fd - g).abs() <= 1e-8 * g.abs().max(1.0));
        }
    }
}
