//! Dormand–Prince 5(4) integrator for complex linear systems, stepping
//! through the nodes of a uniform grid.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::funcspace::Grid;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// 5th order weights equal the last row of A (FSAL).
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const MAX_STEPS: usize = 2_000_000;

/// Right-hand side `dy/dt = rhs(t, y)`.
pub trait Rhs {
    fn eval(&mut self, t: f64, y: &[Complex64], dy: &mut [Complex64]);
}

impl<F: FnMut(f64, &[Complex64], &mut [Complex64])> Rhs for F {
    fn eval(&mut self, t: f64, y: &[Complex64], dy: &mut [Complex64]) {
        self(t, y, dy)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    /// Relative and absolute tolerance.
    pub tol: f64,
    /// First trial step as a fraction of the grid spacing.
    pub initial_fraction: f64,
}

impl StepControl {
    pub fn new(tol: f64) -> Self {
        StepControl { tol, initial_fraction: 1.0 }
    }
}

struct Stepper<'a, R: Rhs> {
    rhs: &'a mut R,
    ctl: StepControl,
    k: Vec<Vec<Complex64>>,
    tmp: Vec<Complex64>,
    y5: Vec<Complex64>,
}

impl<'a, R: Rhs> Stepper<'a, R> {
    fn new(rhs: &'a mut R, dim: usize, ctl: StepControl) -> Self {
        Stepper {
            rhs,
            ctl,
            k: vec![vec![Complex64::new(0.0, 0.0); dim]; 7],
            tmp: vec![Complex64::new(0.0, 0.0); dim],
            y5: vec![Complex64::new(0.0, 0.0); dim],
        }
    }

    /// Attempts one step of size `h`; returns the scaled error norm.
    fn try_step(&mut self, t: f64, y: &[Complex64], h: f64) -> f64 {
        let dim = y.len();
        self.rhs.eval(t, y, &mut self.k[0]);
        for s in 1..7 {
            for i in 0..dim {
                let mut acc = y[i];
                for (r, a) in A[s].iter().enumerate().take(s) {
                    if *a != 0.0 {
                        acc += self.k[r][i] * (h * a);
                    }
                }
                self.tmp[i] = acc;
            }
            self.rhs.eval(t + C[s] * h, &self.tmp, &mut self.k[s]);
        }
        let mut err_sq = 0.0;
        for i in 0..dim {
            let mut y5 = y[i];
            let mut e = Complex64::new(0.0, 0.0);
            for s in 0..7 {
                y5 += self.k[s][i] * (h * B5[s]);
                e += self.k[s][i] * (h * (B5[s] - B4[s]));
            }
            self.y5[i] = y5;
            let scale = self.ctl.tol + self.ctl.tol * y[i].norm().max(y5.norm());
            err_sq += (e.norm() / scale).powi(2);
        }
        (err_sq / dim as f64).sqrt()
    }

    /// Advances `y` from `t` to `t_end` adaptively.
    fn advance(&mut self, t: f64, t_end: f64, y: &mut [Complex64], h_try: &mut f64) -> Result<()> {
        let span = t_end - t;
        let dir = span.signum();
        let h_min = 1e-14 * span.abs().max(1.0);
        let mut t = t;
        let mut steps = 0usize;
        while (t_end - t) * dir > 0.0 {
            let remaining = (t_end - t).abs();
            let mut h = h_try.min(remaining);
            let last = h >= remaining * (1.0 - 1e-12);
            if last {
                h = remaining;
            }
            let err = self.try_step(t, y, dir * h);
            if !err.is_finite() {
                return Err(Error::Integration(format!("non-finite state near t = {t}")));
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                y.copy_from_slice(&self.y5);
                t = if last { t_end } else { t + dir * h };
                if !last {
                    *h_try = h * factor.min(5.0);
                }
            } else {
                *h_try = h * factor.max(0.1);
                if *h_try < h_min {
                    return Err(Error::Integration(format!(
                        "step size underflow at t = {t} (h = {h_try:e})"
                    )));
                }
            }
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::Integration(format!("step budget exhausted at t = {t}")));
            }
        }
        Ok(())
    }
}

/// Integrates from `(t0, y0)` and records the state at every grid node.
///
/// Steps never cross a node, so each node is hit exactly. `t0` need not lie on
/// the grid.
pub fn integrate_on_grid<R: Rhs>(
    rhs: &mut R,
    grid: &Grid,
    t0: f64,
    y0: &[Complex64],
    ctl: StepControl,
) -> Result<Vec<Vec<Complex64>>> {
    let h_grid = grid.step();
    let mut out = vec![Vec::new(); grid.len()];
    let mut stepper = Stepper::new(rhs, y0.len(), ctl);
    // Nodes at or after t0, then nodes before it.
    let split = (0..grid.len()).find(|&i| grid.t(i) >= t0).unwrap_or(grid.len());
    for (range, forward) in [((split..grid.len()).collect::<Vec<_>>(), true), ((0..split).rev().collect(), false)] {
        let mut y = y0.to_vec();
        let mut t = t0;
        let mut h_try = h_grid * ctl.initial_fraction;
        for i in range {
            let target = grid.t(i);
            if target != t {
                debug_assert_eq!(target > t, forward);
                stepper.advance(t, target, &mut y, &mut h_try)?;
                h_try = h_try.min(h_grid);
                t = target;
            }
            out[i] = y.clone();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::Interval;

    #[test]
    fn exponential_decay_to_tolerance() {
        let grid = Grid::new(Interval::new(0.0, 2.0).unwrap(), 20).unwrap();
        let mut rhs = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| dy[0] = -y[0];
        let ys = integrate_on_grid(&mut rhs, &grid, 0.0, &[Complex64::new(1.0, 0.0)], StepControl::new(1e-10)).unwrap();
        for (i, y) in ys.iter().enumerate() {
            let exact = (-grid.t(i)).exp();
            assert!((y[0].re - exact).abs() / exact < 1e-9);
        }
    }

    #[test]
    fn interior_anchor_integrates_both_ways() {
        let grid = Grid::new(Interval::new(0.0, 1.0).unwrap(), 10).unwrap();
        let mut rhs = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| dy[0] = y[0] * Complex64::new(0.0, 1.0);
        let t0 = 0.37;
        let ys = integrate_on_grid(&mut rhs, &grid, t0, &[Complex64::new(1.0, 0.0)], StepControl::new(1e-11)).unwrap();
        for (i, y) in ys.iter().enumerate() {
            let exact = Complex64::new(0.0, grid.t(i) - t0).exp();
            assert!((y[0] - exact).norm() < 1e-9);
        }
    }
}
