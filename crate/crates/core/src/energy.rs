//! The energy-function capability every sampler in this crate is generic over.

/// Shape of the state space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Topology {
    /// Every coordinate lives on `[0, period)` and wraps.
    Periodic(f64),
    Unbounded,
}

impl Topology {
    /// Maps each coordinate back into the fundamental cell (no-op when unbounded).
    pub fn wrap(&self, x: &mut [f64]) {
        if let Topology::Periodic(period) = *self {
            for xi in x.iter_mut() {
                *xi = wrap_periodic(*xi, period);
            }
        }
    }
}

/// Wraps `x` into `[0, period)`.
pub fn wrap_periodic(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    // rem_euclid can round up to `period` for tiny negative inputs
    if r >= period {
        0.0
    } else {
        r
    }
}

/// A differentiable scalar energy in reduced (dimensionless) units.
///
/// Implementations must be deterministic and pure so that chains can be
/// propagated from several threads at once.
pub trait EnergyFunction: Send + Sync {
    fn dimension(&self) -> usize;

    fn topology(&self) -> Topology {
        Topology::Unbounded
    }

    /// Energy of `state`. May return `f64::INFINITY` for states where the
    /// energy is singular (e.g. overlapping particles).
    fn energy(&self, state: &[f64]) -> f64;

    /// Writes the gradient of [`energy`](Self::energy) into `grad`.
    fn gradient(&self, state: &[f64], grad: &mut [f64]);

    /// Energy and gradient together; override when the two share work.
    fn energy_and_gradient(&self, state: &[f64], grad: &mut [f64]) -> f64 {
        self.gradient(state, grad);
        self.energy(state)
    }
}

impl<E: EnergyFunction + ?Sized> EnergyFunction for &E {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn topology(&self) -> Topology {
        (**self).topology()
    }
    fn energy(&self, state: &[f64]) -> f64 {
        (**self).energy(state)
    }
    fn gradient(&self, state: &[f64], grad: &mut [f64]) {
        (**self).gradient(state, grad)
    }
    fn energy_and_gradient(&self, state: &[f64], grad: &mut [f64]) -> f64 {
        (**self).energy_and_gradient(state, grad)
    }
}

/// `h(x) = |x|^2 / 2` in any dimension. Handy for checking samplers against
/// analytic Gaussian moments.
#[derive(Debug, Clone, Copy)]
pub struct Quadratic {
    pub dim: usize,
}

impl EnergyFunction for Quadratic {
    fn dimension(&self) -> usize {
        self.dim
    }
    fn energy(&self, state: &[f64]) -> f64 {
        0.5 * state.iter().map(|x| x * x).sum::<f64>()
    }
    fn gradient(&self, state: &[f64], grad: &mut [f64]) {
        grad.copy_from_slice(state);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_handles_negative_and_boundary() {
        assert_eq!(wrap_periodic(10.0, 10.0), 0.0);
        assert!((wrap_periodic(-0.5, 10.0) - 9.5).abs() < 1e-12);
        assert!((wrap_periodic(23.25, 10.0) - 3.25).abs() < 1e-12);
        let w = wrap_periodic(-1e-18, 10.0);
        assert!((0.0..10.0).contains(&w));
    }
}
