//! Forward/backward Loewner evolution with a piecewise-constant driver,
//! integrated in closed form through elementary vertical-slit maps.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::driver::{BrownianPath, DriverPath, TimeGrid};
use crate::{Error, Result};

/// Square root with branch cut along [0, inf), image in the closed upper
/// half-plane. Half-angle form; never relies on the libm complex sqrt branch.
pub fn sqrt_upper(c: Complex64) -> Complex64 {
    let r = c.norm();
    let re = ((r + c.re).max(0.0) / 2.0).sqrt();
    let im = ((r - c.re).max(0.0) / 2.0).sqrt();
    if c.im >= 0.0 {
        Complex64::new(re, im)
    } else {
        Complex64::new(-re, im)
    }
}

/// Outcome of one forward elementary step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForwardImage {
    pub point: Complex64,
    pub swallowed: bool,
    pub swallow_time: Option<f64>,
}

/// One discretization cell: driver value `u` held constant over `dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementarySlitMap {
    pub u: f64,
    pub dt: f64,
}

impl ElementarySlitMap {
    /// Backward action u + sqrt((z-u)^2 - 4 dt); total on the closed half-plane.
    /// Real points inside the swallow window land on the vertical slit.
    pub fn backward(&self, z: Complex64) -> Complex64 {
        let dt = self.dt;
        if dt == 0.0 {
            return z;
        }
        let zeta = z - self.u;
        if z.im == 0.0 {
            let x = zeta.re;
            let rad = x * x - 4.0 * dt;
            if rad > 0.0 {
                Complex64::new(self.u + x.signum() * rad.sqrt(), 0.0)
            } else {
                Complex64::new(self.u, (-rad).sqrt())
            }
        } else {
            self.u + sqrt_upper(zeta * zeta - 4.0 * dt)
        }
    }

    /// Forward action: closed-form solution of dg = 2/(g-u) over dt, with
    /// exact swallowing detection via the radicand trajectory.
    pub fn forward(&self, z: Complex64) -> Result<ForwardImage> {
        let dt = self.dt;
        let zeta = z - self.u;
        if dt == 0.0 {
            return Ok(ForwardImage { point: z, swallowed: false, swallow_time: None });
        }
        if zeta.im == 0.0 {
            let x = zeta.re;
            if x == 0.0 {
                return Err(Error::ImmediateSingularity);
            }
            let g = x.signum() * (x * x + 4.0 * dt).sqrt();
            return Ok(ForwardImage {
                point: Complex64::new(self.u + g, 0.0),
                swallowed: false,
                swallow_time: None,
            });
        }
        if zeta.re == 0.0 {
            // radicand -y^2 + 4t crosses zero iff 4 dt >= y^2
            let y = zeta.im;
            if y * y <= 4.0 * dt {
                return Ok(ForwardImage {
                    point: Complex64::new(self.u, 0.0),
                    swallowed: true,
                    swallow_time: Some(y * y / 4.0),
                });
            }
            return Ok(ForwardImage {
                point: Complex64::new(self.u, (y * y - 4.0 * dt).sqrt()),
                swallowed: false,
                swallow_time: None,
            });
        }
        Ok(ForwardImage {
            point: self.u + sqrt_upper(zeta * zeta + 4.0 * dt),
            swallowed: false,
            swallow_time: None,
        })
    }
}

/// Where on the step the piecewise-constant driver is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum DriverSampling {
    #[default]
    LeftEndpoint,
    Midpoint,
}

/// Extra swallowing-window width for real points during trace rendering,
/// in units of sqrt(kappa dt); matches the expected overshoot of a Brownian
/// bridge beyond its endpoints within one cell.
const WINDOW_WIDEN: f64 = 0.45;

/// A discretized Loewner chain: one elementary slit map per grid step.
/// The backward action of the slit sequence realizes h_t; the same sequence
/// applied in reverse order realizes the inverse forward map.
#[derive(Debug, Clone)]
pub struct BackwardChain {
    kappa: f64,
    driver: DriverPath,
    slits: Vec<ElementarySlitMap>,
}

/// Sampled trace curve; `points[k]` is the tip at `times[k]`.
#[derive(Debug, Clone)]
pub struct TracePolyline {
    pub times: Vec<f64>,
    pub points: Vec<Complex64>,
    pub kappa: f64,
    pub seed: u64,
}

impl TracePolyline {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Boundary images of +/-eps under the chain, restricted to the real line.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryImages {
    pub left: f64,
    pub right: f64,
    pub left_absorbed: bool,
    pub right_absorbed: bool,
}

impl BackwardChain {
    pub fn new(driver: DriverPath, sampling: DriverSampling) -> Self {
        let grid = driver.grid();
        let dt = grid.dt();
        let slits = (0..grid.n_steps())
            .map(|k| {
                let u = match sampling {
                    DriverSampling::LeftEndpoint => driver.value(k),
                    DriverSampling::Midpoint => 0.5 * (driver.value(k) + driver.value(k + 1)),
                };
                ElementarySlitMap { u, dt }
            })
            .collect();
        BackwardChain { kappa: driver.kappa(), driver, slits }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn driver(&self) -> &DriverPath {
        &self.driver
    }

    pub fn grid(&self) -> TimeGrid {
        self.driver.grid()
    }

    pub fn n_steps(&self) -> usize {
        self.slits.len()
    }

    pub fn slits(&self) -> &[ElementarySlitMap] {
        &self.slits
    }

    /// h_{t_k}(z): slit maps applied in time order.
    pub fn evolve_backward(&self, z: Complex64, k: usize) -> Complex64 {
        assert!(k <= self.slits.len());
        self.slits[..k].iter().fold(z, |w, s| s.backward(w))
    }

    /// g_{t_k}(z), reporting the swallow step/time if the flow hits the singularity.
    pub fn evolve_forward(&self, z: Complex64, k: usize) -> Result<ForwardImage> {
        assert!(k <= self.slits.len());
        let mut w = z;
        for (j, s) in self.slits[..k].iter().enumerate() {
            let img = s.forward(w)?;
            if img.swallowed {
                return Ok(ForwardImage {
                    point: img.point,
                    swallowed: true,
                    swallow_time: img.swallow_time.map(|tau| self.grid().time(j) + tau),
                });
            }
            w = img.point;
        }
        Ok(ForwardImage { point: w, swallowed: false, swallow_time: None })
    }

    /// g_{t_k}^{-1}(w): slit maps applied in reverse order.
    pub fn inverse_forward(&self, w: Complex64, k: usize) -> Complex64 {
        assert!(k <= self.slits.len());
        self.slits[..k].iter().rev().fold(w, |z, s| s.backward(z))
    }

    /// Tip g_{t_k}^{-1}(driver endpoint): the innermost inverse slit map is
    /// applied to the driver value at t_k exactly (landing on the slit when
    /// the increment is small, on the real line when it is large), and the
    /// remaining maps unzip outward.
    pub fn tip(&self, k: usize) -> Complex64 {
        self.tip_with_contact(k).0
    }

    /// Tip plus the welding partner: the step at which the tip's unzip walk
    /// first leaves the real line. Absorption at step j lands the tip on the
    /// slit grown during cell j, so gamma(t_k) touches the curve near t_j;
    /// a walk that never leaves the real line ends on the axis itself
    /// (partner step 0). Interior seeds report k-1 (no self-touching).
    pub fn tip_with_contact(&self, k: usize) -> (Complex64, Option<usize>) {
        self.tip_impl(k, WINDOW_WIDEN)
    }

    /// Welding observable: absorption step of the tip's unzip walk under the
    /// bare slit-map window (radicand <= 0) plus driver crossing. The widened
    /// interval window is calibrated for emission heights and clips the
    /// survival tail that the welding separation measures.
    pub fn welding_step(&self, k: usize) -> Option<usize> {
        if k == 0 {
            return None;
        }
        let s = self.slits[k - 1];
        let d0 = self.driver.value(k) - s.u;
        if d0 * d0 <= 4.0 * s.dt {
            return Some(k - 1);
        }
        let mut x = s.u + d0.signum() * (d0 * d0 - 4.0 * s.dt).sqrt();
        let mut last_u = s.u;
        for j in (0..k - 1).rev() {
            let sj = self.slits[j];
            let g = x - sj.u;
            // crossing the driver within the cell, or entering the window
            if (x - last_u) * g < 0.0 || g * g <= 4.0 * sj.dt {
                return Some(j);
            }
            x = sj.u + g.signum() * (g * g - 4.0 * sj.dt).sqrt();
            last_u = sj.u;
        }
        Some(0)
    }

    fn tip_impl(&self, k: usize, widen: f64) -> (Complex64, Option<usize>) {
        if k == 0 {
            return (Complex64::new(self.driver.value(0), 0.0), None);
        }
        let s = self.slits[k - 1];
        let mut w = s.backward(Complex64::new(self.driver.value(k), 0.0));
        let mut last_u = s.u;
        let mut contact = if w.im > 0.0 { Some(k - 1) } else { Some(0) };
        for j in (0..k - 1).rev() {
            let sj = self.slits[j];
            if w.im == 0.0 {
                // real points ride the discrete Bessel gap; the driver sweeps
                // the whole interval between consecutive samples within the
                // cell, so measure the gap to that interval — otherwise the
                // walk tunnels through the swallowing window
                let (lo, hi) = (last_u.min(sj.u), last_u.max(sj.u));
                let gap = if w.re < lo {
                    lo - w.re
                } else if w.re > hi {
                    w.re - hi
                } else {
                    0.0
                };
                // a Brownian driver overshoots the sampled interval within
                // the cell by O(sqrt(kappa dt)); widen the window to match
                let g_eff = (gap - widen * (self.kappa * sj.dt).sqrt()).max(0.0);
                if g_eff * g_eff <= 4.0 * sj.dt {
                    w = Complex64::new(sj.u, (4.0 * sj.dt - g_eff * g_eff).sqrt());
                    last_u = sj.u;
                    contact = Some(j);
                    continue;
                }
            }
            w = sj.backward(w);
            last_u = sj.u;
        }
        (w, contact)
    }

    /// Trace polyline sampled every `stride` steps (the final step is always
    /// included). O(n^2 / stride) elementary map applications.
    pub fn trace(&self, stride: usize) -> TracePolyline {
        let stride = stride.max(1);
        let n = self.slits.len();
        let grid = self.grid();
        let mut times = Vec::new();
        let mut points = Vec::new();
        let mut k = 0;
        loop {
            times.push(grid.time(k));
            points.push(self.tip(k));
            if k == n {
                break;
            }
            k = (k + stride).min(n);
        }
        TracePolyline { times, points, kappa: self.kappa, seed: self.driver.base().seed() }
    }

    /// Chain restarted at step `r`: driver increments B(t_r + .) - B(t_r),
    /// representing h_{t_r + s} o h_{t_r}^{-1} in driver-centered coordinates.
    pub fn shifted_chain(&self, r: usize) -> Result<BackwardChain> {
        if r >= self.n_steps() {
            return Err(Error::StepOutOfRange { k: r, n: self.n_steps() });
        }
        let base = self.driver.base().shift_increments_at(r)?;
        let driver = DriverPath::new(self.kappa, base)?;
        Ok(BackwardChain::new(driver, DriverSampling::LeftEndpoint))
    }

    /// (h_{t_k}(sqrt(z)) - sqrt(kappa) B_{t_k})^2 on C \ [0, inf).
    pub fn squared_map(&self, z: Complex64, k: usize) -> Result<Complex64> {
        if z.im == 0.0 && z.re >= 0.0 {
            return Err(Error::OnBranchCut(z));
        }
        let w = sqrt_upper(z);
        let h = self.evolve_backward(w, k);
        let shifted = h - self.driver.value(k);
        Ok(shifted * shifted)
    }

    /// Real boundary images of +/-eps after k steps.
    ///
    /// A point evolves by the real slit action until its radicand first turns
    /// nonpositive (slit absorption, flagged). From then on it is tracked as
    /// the hull foot on its starting side: the one-sided slit recursion with
    /// the gap to the driver reflected at zero. Without the one-sided rule
    /// both feet collapse onto the driver orbit and every base degenerates.
    pub fn boundary_images(&self, k: usize, eps: f64) -> BoundaryImages {
        assert!(eps > 0.0);
        let (right, right_absorbed) = self.boundary_image_side(k, eps, 1.0);
        let (left, left_absorbed) = self.boundary_image_side(k, -eps, -1.0);
        BoundaryImages { left: left.min(right), right, left_absorbed, right_absorbed }
    }

    fn boundary_image_side(&self, k: usize, x0: f64, side: f64) -> (f64, bool) {
        let mut x = x0;
        let mut absorbed = false;
        for s in &self.slits[..k] {
            if !absorbed {
                let d = x - s.u;
                let rad = d * d - 4.0 * s.dt;
                if rad > 0.0 {
                    x = s.u + d.signum() * rad.sqrt();
                } else {
                    absorbed = true;
                    x = s.u;
                }
            } else {
                // mirrored reflection: a driver crossing enters squared, as
                // in the reflecting Bessel scheme; clamping it to zero
                // instead loses excursion mass and biases the base low
                let gap = side * (x - s.u);
                let gap = (gap * gap - 4.0 * s.dt).max(0.0).sqrt();
                x = s.u + side * gap;
            }
        }
        (x, absorbed)
    }
}

/// Trace of the chain driven by the time-reverted driver, in backward-trace
/// parametrization: index 0 is the tip, the final index is the root on R.
pub fn backward_trace(driver: &DriverPath, t0: f64, stride: usize) -> Result<TracePolyline> {
    let reversed = driver.base().reverse_shift(t0)?;
    let rev_driver = DriverPath::new(driver.kappa(), reversed)?;
    let chain = BackwardChain::new(rev_driver, DriverSampling::LeftEndpoint);
    let tr = chain.trace(stride);
    let times = tr.times.iter().rev().map(|&t| t0 - t).collect();
    let points = tr.points.iter().rev().copied().collect();
    Ok(TracePolyline { times, points, kappa: tr.kappa, seed: tr.seed })
}

/// Convenience: chain for (kappa, seed, grid) with left-endpoint sampling.
pub fn chain_from_seed(kappa: f64, seed: u64, grid: TimeGrid) -> Result<BackwardChain> {
    let base = BrownianPath::sample(seed, grid);
    Ok(BackwardChain::new(DriverPath::new(kappa, base)?, DriverSampling::LeftEndpoint))
}
