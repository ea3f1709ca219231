//! Local energy minimisation ("quench"): limited-memory quasi-Newton
//! directions with a backtracking Armijo line search.

use std::collections::VecDeque;

use crate::energy::EnergyFunction;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuenchConfig {
    /// Stop once the gradient's largest component falls below this.
    pub tolerance: f64,
    pub max_steps: usize,
    /// Number of correction pairs kept for the inverse-Hessian estimate.
    pub memory: usize,
    /// Largest allowed coordinate displacement per step.
    pub max_displacement: f64,
    /// Stop after [`STALL_STEPS`] consecutive steps that each lower the
    /// energy by no more than this fraction of `max(|h|, 1)`. Near a
    /// minimum the line search otherwise fights rounding noise.
    pub energy_tolerance: f64,
}

pub const STALL_STEPS: usize = 5;

impl Default for QuenchConfig {
    fn default() -> Self {
        Self { tolerance: 1e-6, max_steps: 100_000, memory: 10, max_displacement: 0.3, energy_tolerance: 1e-13 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuenchResult {
    pub state: Vec<f64>,
    pub energy: f64,
    /// Largest absolute gradient component at `state`.
    pub gradient_max: f64,
    pub steps: usize,
    pub converged: bool,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Two-loop recursion: `-H g` from the stored correction pairs.
fn lbfgs_direction(grad: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = grad.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|qi| *qi *= gamma);
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|qi| *qi = -*qi);
    q
}

/// Minimises `f` from `start`. Energy never increases between accepted
/// steps. Fails only if the starting energy is not finite; a stalled or
/// failed line search ends the run, and `converged` then reports whether
/// the gradient tolerance was met.
pub fn quench<F: EnergyFunction + ?Sized>(
    f: &F,
    start: &[f64],
    config: &QuenchConfig,
) -> Result<QuenchResult> {
    let n = start.len();
    let mut x = start.to_vec();
    let mut g = vec![0.0; n];
    let mut energy = f.energy_and_gradient(&x, &mut g);
    if !energy.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteEnergy { steps: 0, last_valid: x });
    }
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(config.memory);
    let mut trial = vec![0.0; n];
    let mut g_trial = vec![0.0; n];
    let mut steps = 0;
    let mut stalled = 0;
    while steps < config.max_steps && stalled < STALL_STEPS {
        if max_abs(&g) < config.tolerance {
            return Ok(QuenchResult { gradient_max: max_abs(&g), state: x, energy, steps, converged: true });
        }
        let mut dir = lbfgs_direction(&g, &history);
        let mut slope = dot(&dir, &g);
        if !(slope < 0.0) {
            history.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = dot(&dir, &g);
        }
        let biggest = max_abs(&dir);
        let mut alpha = if biggest > config.max_displacement { config.max_displacement / biggest } else { 1.0 };
        let mut accepted = None;
        for _ in 0..60 {
            trial.iter_mut().zip(&x).zip(&dir).for_each(|((t, xi), di)| *t = xi + alpha * di);
            let e = f.energy_and_gradient(&trial, &mut g_trial);
            if e.is_finite() && e <= energy + 1e-4 * alpha * slope {
                accepted = Some(e);
                break;
            }
            alpha *= 0.5;
        }
        let Some(e_new) = accepted else {
            if history.is_empty() {
                // no descent possible at working precision
                break;
            }
            history.clear();
            continue;
        };
        steps += 1;
        if energy - e_new <= config.energy_tolerance * energy.abs().max(1.0) {
            stalled += 1;
        } else {
            stalled = 0;
        }
        let s: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_trial.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
            if history.len() == config.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        std::mem::swap(&mut x, &mut trial);
        std::mem::swap(&mut g, &mut g_trial);
        energy = e_new;
    }
    let gmax = max_abs(&g);
    Ok(QuenchResult { gradient_max: gmax, converged: gmax < config.tolerance, state: x, energy, steps })
}
