//! Boundary Bessel dynamics of dimension d = 1 - 4/kappa, squared Bessel
//! processes (exact-in-law and driver-coupled), boundary classification at the
//! origin, and the mirror construction of the second real solution.

use rand::Rng;
use rand_distr::{Gamma, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::driver::{BrownianPath, DriverPath, TimeGrid};
use crate::{Error, Result};

/// d(kappa) = 1 - 4/kappa.
pub fn dimension(kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidKappa(kappa));
    }
    Ok(1.0 - 4.0 / kappa)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesselParams {
    kappa: f64,
    d: f64,
}

impl BesselParams {
    pub fn new(kappa: f64) -> Result<Self> {
        Ok(BesselParams { kappa, d: dimension(kappa)? })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// BESQ dimension when the same parameter set drives a squared process.
    pub fn delta(&self) -> f64 {
        self.d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathSign {
    NonNegative,
    NonPositive,
    Signed,
}

/// A real-valued discretized process with an optional absorption time.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPath {
    grid: TimeGrid,
    values: Vec<f64>,
    absorbed_at: Option<f64>,
    sign: PathSign,
}

impl RealPath {
    pub fn new(grid: TimeGrid, values: Vec<f64>, absorbed_at: Option<f64>, sign: PathSign) -> Self {
        assert_eq!(values.len(), grid.n_steps() + 1);
        RealPath { grid, values, absorbed_at, sign }
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn absorbed_at(&self) -> Option<f64> {
        self.absorbed_at
    }

    pub fn sign(&self) -> PathSign {
        self.sign
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn negated(&self) -> RealPath {
        let sign = match self.sign {
            PathSign::NonNegative => PathSign::NonPositive,
            PathSign::NonPositive => PathSign::NonNegative,
            PathSign::Signed => PathSign::Signed,
        };
        RealPath {
            grid: self.grid,
            values: self.values.iter().map(|v| -v).collect(),
            absorbed_at: self.absorbed_at,
            sign,
        }
    }
}

/// Boundary point evolved through the Loewner slit maps, returned as the
/// rescaled gap X = (h_t(x) - sqrt(kappa) B_t) / sqrt(kappa). Absorption is
/// declared by the slit criterion (x - u)^2 <= 4 dt, or on a sign change of
/// the gap, and the path is identically zero afterwards.
pub fn boundary_bessel_from_loewner(driver: &DriverPath, x0: f64) -> Result<RealPath> {
    if x0 == 0.0 {
        return Err(Error::InvalidStart(x0));
    }
    let grid = driver.grid();
    let dt = grid.dt();
    let sqrt_kappa = driver.kappa().sqrt();
    let side = x0.signum();
    let mut values = Vec::with_capacity(grid.n_steps() + 1);
    values.push(x0);
    let mut x = x0 * sqrt_kappa; // unscaled boundary point h_t(x)
    let mut absorbed_at = None;
    for k in 0..grid.n_steps() {
        if absorbed_at.is_some() {
            values.push(0.0);
            continue;
        }
        let u = driver.value(k);
        let d = x - u;
        let rad = d * d - 4.0 * dt;
        if rad <= 0.0 || d.signum() != side {
            absorbed_at = Some(grid.time(k));
            values.push(0.0);
            continue;
        }
        x = u + d.signum() * rad.sqrt();
        let gap = (x - driver.value(k + 1)) / sqrt_kappa;
        values.push(gap);
    }
    // enforce permanence: values after absorption are exactly zero
    let sign = if side > 0.0 { PathSign::NonNegative } else { PathSign::NonPositive };
    let mut out = values;
    if let Some(t_abs) = absorbed_at {
        let k_abs = grid.index_of(t_abs).unwrap();
        for v in out.iter_mut().skip(k_abs) {
            *v = 0.0;
        }
    }
    Ok(RealPath { grid, values: out, absorbed_at, sign })
}

/// The strong-solution map phi: nonnegative reflecting Bessel path of
/// dimension d in (0,1), coupled pathwise to the Brownian input.
///
/// Scheme: the Ito transform of the Bessel SDE applied to the squared
/// process, Z' = max(0, (sqrt(Z) + dB)^2 + (d-1) dt), then a square root.
/// This keeps the driver coupling exact at grid points and reduces to the
/// deterministic Bessel ODE for a zero driver.
pub fn simulate_reflecting(params: BesselParams, b: &BrownianPath, x0: f64) -> Result<RealPath> {
    let d = params.d();
    if !(d > 0.0 && d < 1.0) {
        return Err(Error::InvalidDimension(d));
    }
    if x0 < 0.0 {
        return Err(Error::NegativeInput { name: "x0", value: x0 });
    }
    let grid = b.grid();
    let dt = grid.dt();
    let mut values = Vec::with_capacity(grid.n_steps() + 1);
    let mut x = x0;
    values.push(x);
    for k in 0..grid.n_steps() {
        let y = x + b.increment(k);
        x = (y * y + (d - 1.0) * dt).max(0.0).sqrt();
        values.push(x);
    }
    Ok(RealPath { grid, values, absorbed_at: None, sign: PathSign::NonNegative })
}

/// The mirror solution rho~ = -phi(-B): a nonpositive path from the origin
/// solving the same extended SDE with the same driver.
pub fn mirror_solution(params: BesselParams, b: &BrownianPath) -> Result<RealPath> {
    Ok(simulate_reflecting(params, &b.negate(), 0.0)?.negated())
}

/// Exact BESQ transition over dt: x' = 2 dt G with G ~ Gamma(delta/2 + N, 1),
/// N ~ Poisson(x / (2 dt)).
pub fn besq_exact_step<R: Rng + ?Sized>(x: f64, delta: f64, dt: f64, rng: &mut R) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::NegativeInput { name: "x", value: x });
    }
    if delta < 0.0 {
        return Err(Error::NegativeInput { name: "delta", value: delta });
    }
    if !(dt > 0.0) {
        return Err(Error::NonPositive { name: "dt", value: dt });
    }
    let n = if x == 0.0 {
        0u64
    } else {
        rng.sample(Poisson::new(x / (2.0 * dt)).expect("positive rate")) as u64
    };
    let shape = delta / 2.0 + n as f64;
    if shape == 0.0 {
        return Ok(0.0);
    }
    let g: f64 = rng.sample(Gamma::new(shape, 1.0).expect("positive shape"));
    Ok(2.0 * dt * g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BesqOrientation {
    Upper,
    Lower,
}

/// Euler scheme for the upper/lower squared Bessel SDE coupled to B:
/// Z' = max(0, Z + delta dt +/- 2 sqrt(Z) dB). Lower with B equals upper
/// with -B bit-exactly.
pub fn besq_pathwise(
    x0: f64,
    delta: f64,
    b: &BrownianPath,
    orientation: BesqOrientation,
) -> RealPath {
    let grid = b.grid();
    let dt = grid.dt();
    let sgn = match orientation {
        BesqOrientation::Upper => 1.0,
        BesqOrientation::Lower => -1.0,
    };
    let mut values = Vec::with_capacity(grid.n_steps() + 1);
    let mut z = x0.max(0.0);
    values.push(z);
    for k in 0..grid.n_steps() {
        z = (z + delta * dt + sgn * 2.0 * z.sqrt() * b.increment(k)).max(0.0);
        values.push(z);
    }
    RealPath { grid, values, absorbed_at: None, sign: PathSign::NonNegative }
}

/// Sup-norm residual of the principal-value identity
/// Z_t = Z_0 + B_t + ((d-1)/2) k_eps(t), with the drift sum truncated below eps.
pub fn pv_residual(z: &RealPath, b: &BrownianPath, d: f64, eps: f64) -> f64 {
    let dt = z.grid().dt();
    let zv = z.values();
    let bv = b.values();
    let mut k_eps = 0.0;
    let mut sup = 0.0f64;
    for k in 1..zv.len() {
        if zv[k - 1] > eps {
            k_eps += dt / zv[k - 1];
        }
        let resid = (zv[k] - zv[0] - bv[k] - 0.5 * (d - 1.0) * k_eps).abs();
        sup = sup.max(resid);
    }
    sup
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryVerdict {
    Absorbing,
    Reflecting,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryClassification {
    pub kappa: f64,
    pub d: f64,
    pub verdict: BoundaryVerdict,
    pub escape_fraction: f64,
    pub trials: usize,
    pub threshold: f64,
    pub horizon: f64,
    pub dt: f64,
}

/// Monte Carlo absorbing/reflecting classification of the origin.
///
/// d in (0,1): reflecting solutions from x0 = 0; d <= 0: explicit Euler from
/// x0 = 10 dt with absorption at the first zero crossing (the scheme cannot
/// tunnel through the origin). A path escapes when its sup reaches `threshold`.
pub fn classify_boundary(
    params: BesselParams,
    trials: usize,
    threshold: f64,
    horizon: f64,
    dt: f64,
    seed: u64,
) -> Result<BoundaryClassification> {
    if trials < 100 {
        return Err(Error::Underpowered { min: 100, got: trials });
    }
    let n_steps = (horizon / dt).round() as usize;
    let grid = TimeGrid::new(horizon, n_steps.max(1))?;
    let d = params.d();
    let escapes: usize = (0..trials)
        .into_par_iter()
        .map(|i| {
            let b = BrownianPath::sample(crate::driver::mix_seed(seed, 0x434C_4153, i as u64), grid);
            let path = if d > 0.0 {
                simulate_reflecting(params, &b, 0.0).expect("d in (0,1)")
            } else {
                euler_absorbing(d, 10.0 * dt, &b)
            };
            usize::from(path.sup() >= threshold)
        })
        .sum();
    let escape_fraction = escapes as f64 / trials as f64;
    Ok(BoundaryClassification {
        kappa: params.kappa(),
        d,
        verdict: if escape_fraction > 0.5 {
            BoundaryVerdict::Reflecting
        } else {
            BoundaryVerdict::Absorbing
        },
        escape_fraction,
        trials,
        threshold,
        horizon,
        dt,
    })
}

/// Explicit Euler for the Bessel SDE with absorption at the first sign change.
fn euler_absorbing(d: f64, x0: f64, b: &BrownianPath) -> RealPath {
    let grid = b.grid();
    let dt = grid.dt();
    let mut values = Vec::with_capacity(grid.n_steps() + 1);
    let mut x = x0;
    values.push(x);
    let mut absorbed_at = None;
    for k in 0..grid.n_steps() {
        if absorbed_at.is_none() {
            x += 0.5 * (d - 1.0) / x * dt + b.increment(k);
            if x <= 0.0 {
                x = 0.0;
                absorbed_at = Some(grid.time(k + 1));
            }
        }
        values.push(x);
    }
    RealPath { grid, values, absorbed_at, sign: PathSign::NonNegative }
}
