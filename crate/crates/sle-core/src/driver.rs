//! Brownian driver paths on uniform time grids.
//!
//! Every increment is drawn from a counter-based generator keyed by
//! (seed, increment index), so a path is a pure function of (seed, grid)
//! and increments can be regenerated independently of stream position.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Relative slack when matching a time to a grid index.
const GRID_ALIGN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_end: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, n_steps: usize) -> Result<Self> {
        if !(t_end > 0.0) || t_end.is_infinite() || n_steps == 0 {
            return Err(Error::InvalidGrid { t_end, n_steps });
        }
        Ok(TimeGrid { t_end, n_steps })
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.n_steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }

    /// Grid index of `t`, rejecting off-grid times.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        if t < 0.0 || t > self.t_end * (1.0 + GRID_ALIGN_TOL) {
            return Err(Error::OutOfRange { t, t_end: self.t_end });
        }
        let dt = self.dt();
        let k = (t / dt).round();
        if (t - k * dt).abs() > GRID_ALIGN_TOL * self.t_end.max(1.0) {
            return Err(Error::OffGrid { t, dt });
        }
        Ok((k as usize).min(self.n_steps))
    }
}

/// splitmix64; used to derive per-increment stream keys.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

/// Combines a seed with stream/counter labels into one key.
pub fn mix_seed(seed: u64, stream: u64, counter: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(stream)) ^ counter)
}

/// One standard normal draw keyed by (seed, stream, counter).
fn keyed_normal(seed: u64, stream: u64, counter: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, stream, counter));
    rng.sample(StandardNormal)
}

/// A discretized Brownian sample; `values[0] == 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianPath {
    grid: TimeGrid,
    values: Vec<f64>,
    seed: u64,
}

/// Stream label for fresh Brownian increments.
const STREAM_INCREMENTS: u64 = 0x42_52_4F_57_4E;
/// Stream label for bridge-refinement noise, combined with the refined step count.
const STREAM_BRIDGE: u64 = 0x42_52_49_44_47;

impl BrownianPath {
    /// Samples a Brownian path; increment k is keyed by (seed, k) and the
    /// result is bit-identical for identical inputs.
    pub fn sample(seed: u64, grid: TimeGrid) -> Self {
        let dt = grid.dt();
        let sqrt_dt = dt.sqrt();
        let mut values = Vec::with_capacity(grid.n_steps + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for k in 0..grid.n_steps {
            acc += sqrt_dt * keyed_normal(seed, STREAM_INCREMENTS, k as u64);
            values.push(acc);
        }
        BrownianPath { grid, values, seed }
    }

    pub fn from_values(grid: TimeGrid, values: Vec<f64>, seed: u64) -> Self {
        assert_eq!(values.len(), grid.n_steps + 1);
        assert_eq!(values[0], 0.0, "Brownian path must start at 0");
        BrownianPath { grid, values, seed }
    }

    /// The all-zero path on `grid` (synthetic driver for deterministic checks).
    pub fn zero(grid: TimeGrid) -> Self {
        BrownianPath { grid, values: vec![0.0; grid.n_steps + 1], seed: 0 }
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn increment(&self, k: usize) -> f64 {
        self.values[k + 1] - self.values[k]
    }

    /// Time reversal about an on-grid time t0: r -> B(t0) - B(t0 - r) on [0, t0].
    pub fn reverse_shift(&self, t0: f64) -> Result<BrownianPath> {
        let k0 = self.grid.index_of(t0)?;
        if k0 == 0 {
            return Err(Error::OutOfRange { t: t0, t_end: self.grid.t_end });
        }
        let grid = TimeGrid::new(self.grid.time(k0), k0)?;
        let b_t0 = self.values[k0];
        let values = (0..=k0).map(|j| b_t0 - self.values[k0 - j]).collect();
        Ok(BrownianPath { grid, values, seed: self.seed ^ 0x5245_5645_5254 })
    }

    /// Pointwise negation (-B is again Brownian).
    pub fn negate(&self) -> BrownianPath {
        BrownianPath {
            grid: self.grid,
            values: self.values.iter().map(|v| -v).collect(),
            seed: self.seed ^ 0x4E45_4741_5445,
        }
    }

    /// Increment shift: r -> B(s + r) - B(s) on [0, t_end - s], s on-grid and < t_end.
    pub fn shift_increments(&self, s: f64) -> Result<BrownianPath> {
        let ks = self.grid.index_of(s)?;
        if ks >= self.grid.n_steps {
            return Err(Error::OutOfRange { t: s, t_end: self.grid.t_end });
        }
        let n = self.grid.n_steps - ks;
        let grid = TimeGrid::new(self.grid.dt() * n as f64, n)?;
        let b_s = self.values[ks];
        let values = (0..=n).map(|j| self.values[ks + j] - b_s).collect();
        Ok(BrownianPath { grid, values, seed: self.seed ^ 0x5348_4946_54 })
    }

    /// Shift starting from a grid index instead of a time.
    pub fn shift_increments_at(&self, ks: usize) -> Result<BrownianPath> {
        self.shift_increments(self.grid.time(ks))
    }

    /// Brownian-bridge refinement to a 2x finer grid of the same realization.
    /// Midpoint noise is keyed by (seed, refined step count, midpoint index),
    /// so nested refinements of one seed are reproducible.
    pub fn refine(&self) -> BrownianPath {
        let n = self.grid.n_steps;
        let grid = TimeGrid { t_end: self.grid.t_end, n_steps: 2 * n };
        let half_sd = (self.grid.dt() / 4.0).sqrt();
        let mut values = Vec::with_capacity(2 * n + 1);
        for k in 0..n {
            let (l, r) = (self.values[k], self.values[k + 1]);
            values.push(l);
            let noise = keyed_normal(self.seed, STREAM_BRIDGE ^ (2 * n as u64), k as u64);
            values.push(0.5 * (l + r) + half_sd * noise);
        }
        values.push(self.values[n]);
        BrownianPath { grid, values, seed: self.seed }
    }
}

/// Scaled driver sqrt(kappa) * B.
#[derive(Debug, Clone)]
pub struct DriverPath {
    kappa: f64,
    base: BrownianPath,
}

impl DriverPath {
    pub fn new(kappa: f64, base: BrownianPath) -> Result<Self> {
        if kappa < 0.0 || !kappa.is_finite() {
            return Err(Error::InvalidKappa(kappa));
        }
        Ok(DriverPath { kappa, base })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn base(&self) -> &BrownianPath {
        &self.base
    }

    pub fn grid(&self) -> TimeGrid {
        self.base.grid
    }

    pub fn value(&self, k: usize) -> f64 {
        self.kappa.sqrt() * self.base.values[k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid(t_end: f64, n: usize) -> TimeGrid {
        TimeGrid::new(t_end, n).unwrap()
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = grid(1.0, 64);
        let a = BrownianPath::sample(7, g);
        let b = BrownianPath::sample(7, g);
        assert_eq!(a.values(), b.values());
        assert_eq!(a.values()[0], 0.0);
    }

    #[test]
    fn different_seeds_differ() {
        let g = grid(1.0, 64);
        assert_ne!(BrownianPath::sample(1, g).values(), BrownianPath::sample(2, g).values());
    }

    #[test]
    fn variance_at_unit_time() {
        // Var B_1 = 1, Monte Carlo over many seeds.
        let g = grid(1.0, 16);
        let n = 100_000;
        let mut s2 = 0.0;
        for seed in 0..n {
            let v = *BrownianPath::sample(seed, g).values().last().unwrap();
            s2 += v * v;
        }
        let var = s2 / n as f64;
        assert!((0.97..=1.03).contains(&var), "var={var}");
    }

    #[test]
    fn reverse_shift_direct_arithmetic() {
        let g = grid(1.0, 2);
        let p = BrownianPath::from_values(g, vec![0.0, 1.0, -1.0], 0);
        let r = p.reverse_shift(1.0).unwrap();
        assert_eq!(r.values(), &[0.0, -2.0, -1.0]);
    }

    #[test]
    fn reverse_shift_endpoints() {
        let g = grid(2.0, 8);
        let p = BrownianPath::sample(3, g);
        let r = p.reverse_shift(1.5).unwrap();
        assert_eq!(r.values()[0], 0.0);
        let k0 = g.index_of(1.5).unwrap();
        assert_abs_diff_eq!(*r.values().last().unwrap(), p.values()[k0], epsilon = 1e-15);
    }

    #[test]
    fn reverse_shift_off_grid_rejected() {
        let g = grid(1.0, 3);
        let p = BrownianPath::sample(3, g);
        assert!(matches!(p.reverse_shift(0.5), Err(Error::OffGrid { .. })));
    }

    #[test]
    fn reverse_shift_is_involutive() {
        let g = grid(1.0, 10);
        let p = BrownianPath::sample(11, g);
        let t0 = 0.7;
        let rr = p.reverse_shift(t0).unwrap().reverse_shift(t0).unwrap();
        let k0 = g.index_of(t0).unwrap();
        for j in 0..=k0 {
            assert_abs_diff_eq!(rr.values()[j], p.values()[j], epsilon = 1e-12);
        }
    }

    #[test]
    fn negate_is_involution() {
        let g = grid(1.0, 5);
        let p = BrownianPath::sample(9, g);
        assert_eq!(p.negate().negate().values(), p.values());
        let q = BrownianPath::from_values(grid(1.0, 2), vec![0.0, 0.3, -0.1], 0);
        assert_eq!(q.negate().values(), &[0.0, -0.3, 0.1]);
    }

    #[test]
    fn shift_increments_basics() {
        let g = grid(3.0, 3);
        let p = BrownianPath::from_values(g, vec![0.0, 1.0, 3.0, 2.0], 0);
        let s = p.shift_increments(1.0).unwrap();
        assert_eq!(s.values(), &[0.0, 2.0, 1.0]);
        let id = p.shift_increments(0.0).unwrap();
        assert_eq!(id.values(), p.values());
        assert!(p.shift_increments(3.0).is_err());
    }

    #[test]
    fn shift_increments_composes() {
        let g = grid(1.0, 10);
        let p = BrownianPath::sample(5, g);
        let a = p.shift_increments(0.2).unwrap().shift_increments(0.3).unwrap();
        let b = p.shift_increments(0.5).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn refine_keeps_coarse_points() {
        let g = grid(1.0, 8);
        let p = BrownianPath::sample(21, g);
        let f = p.refine();
        assert_eq!(f.grid().n_steps(), 16);
        for k in 0..=8 {
            assert_eq!(f.values()[2 * k], p.values()[k]);
        }
        // reproducible
        assert_eq!(p.refine().values(), f.values());
    }

    #[test]
    fn driver_scales_by_sqrt_kappa() {
        let g = grid(1.0, 4);
        let p = BrownianPath::sample(2, g);
        let d = DriverPath::new(4.0, p.clone()).unwrap();
        for k in 0..=4 {
            assert_abs_diff_eq!(d.value(k), 2.0 * p.values()[k], epsilon = 1e-15);
        }
        assert!(DriverPath::new(-1.0, p).is_err());
    }
}
