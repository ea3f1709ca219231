//! Temperature and energy ladders.

use crate::error::{Error, Result};

/// Strictly increasing, positive temperatures `T_0 < T_1 < ... < T_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureLadder(Vec<f64>);

impl TemperatureLadder {
    pub fn new(temperatures: Vec<f64>) -> Result<Self> {
        if temperatures.is_empty() {
            return Err(Error::InvalidLadder("temperature ladder is empty".into()));
        }
        if temperatures.iter().any(|t| !t.is_finite() || *t <= 0.0) {
            return Err(Error::InvalidLadder(format!(
                "temperatures must be finite and positive: {temperatures:?}"
            )));
        }
        if temperatures.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidLadder(format!(
                "temperatures must be strictly increasing: {temperatures:?}"
            )));
        }
        Ok(Self(temperatures))
    }

    /// `count` temperatures in geometric progression from `t_min` to `t_max`.
    pub fn geometric(t_min: f64, t_max: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidLadder(
                "a geometric temperature ladder needs at least two rungs".into(),
            ));
        }
        let ratio = (t_max / t_min).powf(1.0 / (count - 1) as f64);
        let mut temps: Vec<f64> = (0..count).map(|i| t_min * ratio.powi(i as i32)).collect();
        temps[count - 1] = t_max;
        Self::new(temps)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Energy levels `H_0 < H_1 < ... < H_{K+1}`.
///
/// `H_i` (for `i <= K`) is the energy floor of chain `i`; the interior levels
/// `H_1..H_K` split energies into `K + 1` rings.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLadder(Vec<f64>);

impl EnergyLadder {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.len() < 3 {
            return Err(Error::InvalidLadder(format!(
                "an energy ladder needs K+2 >= 3 levels, got {}",
                levels.len()
            )));
        }
        if levels.iter().any(|h| !h.is_finite()) {
            return Err(Error::InvalidLadder(format!("non-finite level in {levels:?}")));
        }
        if levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidLadder(format!(
                "energy levels must be strictly increasing: {levels:?}"
            )));
        }
        Ok(Self(levels))
    }

    /// Number of non-ground chains, `K`.
    pub fn k(&self) -> usize {
        self.0.len() - 2
    }

    pub fn num_rings(&self) -> usize {
        self.0.len() - 1
    }

    pub fn levels(&self) -> &[f64] {
        &self.0
    }

    /// Energy floor `H_i` of chain `i`.
    pub fn floor(&self, chain: usize) -> f64 {
        self.0[chain]
    }

    /// Ring holding `energy`: ring 0 is everything below `H_1`, ring `K` is
    /// everything at or above `H_K`, otherwise the half-open `[H_j, H_{j+1})`.
    pub fn ring_index(&self, energy: f64) -> usize {
        let interior = &self.0[1..self.0.len() - 1];
        // number of interior levels <= energy; NaN lands in ring 0
        interior.partition_point(|&level| level <= energy)
    }

    /// Bounds `[lo, hi)` of ring `j` (open-ended at the extremes).
    pub fn ring_bounds(&self, ring: usize) -> (f64, f64) {
        let k = self.k();
        let lo = if ring == 0 { f64::NEG_INFINITY } else { self.0[ring] };
        let hi = if ring >= k { f64::INFINITY } else { self.0[ring + 1] };
        (lo, hi)
    }
}

fn check_builder_inputs(h0: f64, h_top: f64, k: usize) -> Result<()> {
    if !(h0.is_finite() && h_top.is_finite()) || h_top <= h0 {
        return Err(Error::InvalidLadder(format!(
            "need finite H_0 < H_top, got H_0 = {h0}, H_top = {h_top}"
        )));
    }
    if k < 1 {
        return Err(Error::InvalidLadder("K must be at least 1".into()));
    }
    Ok(())
}

/// Ladder whose consecutive increments grow by the factor `lambda` and whose
/// endpoints are exactly `h0` and `h_top`:
/// `H_i = H_0 + (H_top - H_0) (lambda^i - 1) / (lambda^{K+1} - 1)`.
pub fn build_ladder_geometric_increments(
    h0: f64,
    h_top: f64,
    k: usize,
    lambda: f64,
) -> Result<EnergyLadder> {
    check_builder_inputs(h0, h_top, k)?;
    if !lambda.is_finite() || lambda <= 1.0 {
        return Err(Error::InvalidLadder(format!("lambda must exceed 1, got {lambda}")));
    }
    let span = h_top - h0;
    let denom = lambda.powi(k as i32 + 1) - 1.0;
    let mut levels: Vec<f64> = (0..=k + 1)
        .map(|i| h0 + span * (lambda.powi(i as i32) - 1.0) / denom)
        .collect();
    levels[0] = h0;
    levels[k + 1] = h_top;
    EnergyLadder::new(levels)
}

/// Ladder whose offsets from `h0` form a geometric progression with common
/// ratio `ratio`, ending at `h_top`: `H_i = H_0 + (H_top - H_0) ratio^{i-K-1}`
/// for `i >= 1`. With ratio 2 on `[-10, 10]`, `K = 4` this gives
/// `-8.75, -7.5, -5, 0`.
pub fn build_ladder_geometric_offsets(
    h0: f64,
    h_top: f64,
    k: usize,
    ratio: f64,
) -> Result<EnergyLadder> {
    check_builder_inputs(h0, h_top, k)?;
    if !ratio.is_finite() || ratio <= 1.0 {
        return Err(Error::InvalidLadder(format!("ratio must exceed 1, got {ratio}")));
    }
    let span = h_top - h0;
    let mut levels = Vec::with_capacity(k + 2);
    levels.push(h0);
    for i in 1..=k + 1 {
        levels.push(h0 + span * ratio.powi(i as i32 - k as i32 - 1));
    }
    levels[k + 1] = h_top;
    EnergyLadder::new(levels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table_one() -> EnergyLadder {
        EnergyLadder::new(vec![-10.0, -8.7, -7.5, -5.0, -0.2, 10.0]).unwrap()
    }

    #[test]
    fn ring_index_matches_table_columns() {
        let ladder = table_one();
        assert_eq!(ladder.ring_index(-9.0), 0);
        assert_eq!(ladder.ring_index(-8.0), 1);
        assert_eq!(ladder.ring_index(0.5), 4);
        assert_eq!(ladder.ring_index(-8.7), 1);
        assert_eq!(ladder.ring_index(-7.5), 2);
        assert_eq!(ladder.ring_index(-0.2), 4);
        assert_eq!(ladder.ring_index(-4.0), 3);
    }

    #[test]
    fn ring_index_clamps_outside_ladder() {
        let ladder = table_one();
        assert_eq!(ladder.ring_index(-1e6), 0);
        assert_eq!(ladder.ring_index(1e6), 4);
        assert_eq!(ladder.ring_index(f64::INFINITY), 4);
        assert_eq!(ladder.ring_index(f64::NEG_INFINITY), 0);
    }

    #[test]
    fn ladders_reject_bad_input() {
        assert!(EnergyLadder::new(vec![0.0, 1.0]).is_err());
        assert!(EnergyLadder::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(TemperatureLadder::new(vec![1.0, 0.5]).is_err());
        assert!(TemperatureLadder::new(vec![0.0, 1.0]).is_err());
        assert!(build_ladder_geometric_increments(1.0, 0.0, 4, 1.1).is_err());
        assert!(build_ladder_geometric_increments(0.0, 1.0, 0, 1.1).is_err());
        assert!(build_ladder_geometric_increments(0.0, 1.0, 4, 1.0).is_err());
    }

    #[test]
    fn increments_builder_hits_endpoints_and_ratio() {
        for &lambda in &[1.1, 1.15, 1.2] {
            let ladder = build_ladder_geometric_increments(-52.0, 3.0, 8, lambda).unwrap();
            let h = ladder.levels();
            assert_eq!(h[0], -52.0);
            assert_eq!(h[9], 3.0);
            assert_eq!(ladder.k(), 8);
            for i in 0..8 {
                let ratio = (h[i + 2] - h[i + 1]) / (h[i + 1] - h[i]);
                assert!((ratio - lambda).abs() < 1e-9, "ratio {ratio} vs {lambda}");
            }
        }
    }

    #[test]
    fn offsets_builder_reproduces_doubling_pattern() {
        let ladder = build_ladder_geometric_offsets(-10.0, 10.0, 4, 2.0).unwrap();
        let expected = [-10.0, -8.75, -7.5, -5.0, 0.0, 10.0];
        for (a, b) in ladder.levels().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn geometric_temperatures() {
        let t = TemperatureLadder::geometric(0.4, 2.0, 9).unwrap();
        assert_eq!(t.len(), 9);
        assert_eq!(t.as_slice()[0], 0.4);
        assert_eq!(t.as_slice()[8], 2.0);
    }

    proptest! {
        #[test]
        fn increments_builder_is_strictly_increasing(
            h0 in -1e3f64..1e3,
            span in 1e-3f64..1e3,
            lambda in 1.0001f64..=2.0,
            k in 1usize..=16,
        ) {
            let ladder = build_ladder_geometric_increments(h0, h0 + span, k, lambda).unwrap();
            prop_assert_eq!(ladder.levels().len(), k + 2);
            prop_assert!(ladder.levels().windows(2).all(|w| w[1] > w[0]));
        }

        #[test]
        fn ring_index_is_total(e in proptest::num::f64::ANY) {
            let ladder = table_one();
            prop_assert!(ladder.ring_index(e) <= ladder.k());
        }

        #[test]
        fn ring_index_respects_bounds(e in -20.0f64..20.0) {
            let ladder = table_one();
            let j = ladder.ring_index(e);
            let (lo, hi) = ladder.ring_bounds(j);
            prop_assert!(lo <= e && e < hi);
        }
    }
}
