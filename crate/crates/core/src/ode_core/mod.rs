//! The matriciant `Y` of `y' + A y = 0`, i.e. the solution of
//! `Y' = -A Y`, `Y(t0) = I`, computed by an adaptive Runge–Kutta route and by
//! Picard iteration of `(I + V_A) Y = I`, together with the inverse map
//! `Y ↦ -Y' Y^{-1}` and exact derivative lifting `y' = f - A y`.
//!
//! Derivative layers above the first are never obtained by numerical
//! differentiation: they follow from Leibniz' rule applied to the equation.

mod rk;

pub use rk::{integrate_on_grid, Rhs, StepControl};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::funcspace::{ExprMatrix, Grid, GridFunction};
use crate::holder::sup_norm;
use crate::quadrature::{cumulative, cumulative_from};
use crate::CMatrix;

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Layer `j` of the pointwise product `P Q` at node `i`, by Leibniz' rule.
pub(crate) fn product_layer(p: &GridFunction, q: &GridFunction, j: usize, i: usize) -> CMatrix {
    let mut acc = DMatrix::zeros(p.shape().0, q.shape().1);
    for r in 0..=j {
        acc += p.at(r, i) * q.at(j - r, i) * Complex64::new(binomial(j, r), 0.0);
    }
    acc
}

/// Fundamental matrix normalized at `t0`, with derivative layers.
#[derive(Debug, Clone)]
pub struct Matriciant {
    values: GridFunction,
    t0: f64,
    tol: f64,
    iterations: Option<usize>,
}

impl Matriciant {
    /// Wraps a sampled matrix function, checking `Y(t0) = I` to `tol` and
    /// `det Y ≠ 0` at every node.
    pub fn from_grid_function(values: GridFunction, t0: f64, tol: f64) -> Result<Self> {
        let (m, k) = values.shape();
        if m != k {
            return Err(Error::Usage(format!("matriciant must be square, got {m}x{k}")));
        }
        let y = Matriciant { values, t0, tol, iterations: None };
        y.check_nonsingular()?;
        let defect = y.anchor_defect();
        if defect > tol.max(1e-12) {
            return Err(Error::Usage(format!("Y(t0) differs from identity by {defect:e}")));
        }
        Ok(y)
    }

    pub fn values(&self) -> &GridFunction {
        &self.values
    }

    pub fn into_values(self) -> GridFunction {
        self.values
    }

    pub fn grid(&self) -> &Grid {
        self.values.grid()
    }

    pub fn dim(&self) -> usize {
        self.values.shape().0
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Picard iterations used, if this matriciant came from the Picard route.
    pub fn iterations(&self) -> Option<usize> {
        self.iterations
    }

    /// `max |Y(t0) - I|` (component-sum). When `t0` is off the grid the nearest
    /// node is advanced to `t0` with one Taylor step through the derivative layers.
    pub fn anchor_defect(&self) -> f64 {
        let grid = self.grid();
        let i = grid.nearest_index(self.t0);
        let dt = self.t0 - grid.t(i);
        let mut y = self.values.at(0, i);
        let mut fact = 1.0;
        for j in 1..=self.values.order() {
            fact *= j as f64;
            y += self.values.at(j, i) * Complex64::new(dt.powi(j as i32) / fact, 0.0);
        }
        let id = CMatrix::identity(self.dim(), self.dim());
        (y - id).iter().map(|z| z.norm()).sum()
    }

    fn check_nonsingular(&self) -> Result<()> {
        let threshold = 1e3 * self.tol;
        for i in 0..self.grid().len() {
            let det = self.values.at(0, i).determinant().norm();
            if !(det > threshold) {
                return Err(Error::SingularMatriciant { t: self.grid().t(i), det });
            }
        }
        Ok(())
    }

    /// `det Y(t_i)` at every node.
    pub fn determinants(&self) -> Vec<Complex64> {
        (0..self.grid().len()).map(|i| self.values.at(0, i).determinant()).collect()
    }

    /// Largest relative deviation between `det Y(t)` and
    /// `exp(-∫_{t0}^{t} tr A)`; the trace integral uses Simpson's rule.
    pub fn liouville_defect(&self, a: &GridFunction) -> Result<f64> {
        let grid = *self.grid();
        let m = self.dim();
        if a.grid() != &grid || a.shape() != (m, m) {
            return Err(Error::Usage("coefficient does not match matriciant".into()));
        }
        let trace: Vec<Complex64> = (0..grid.len())
            .map(|i| (0..m).map(|r| a.value(0, i, r, r)).sum())
            .collect();
        let h = grid.step();
        let integral = match grid.index_of(self.t0) {
            Some(k0) => cumulative_from(&trace, h, k0),
            None => {
                // Node integral plus the short piece between the nearest node and t0,
                // from the Taylor data of the trace.
                let k = grid.nearest_index(self.t0);
                let c = cumulative(&trace, h);
                let dt = self.t0 - grid.t(k);
                let mut piece = Complex64::new(0.0, 0.0);
                let mut fact = 1.0;
                for j in 0..=a.order() {
                    fact *= (j + 1) as f64;
                    let tr_j: Complex64 = (0..m).map(|r| a.value(j, k, r, r)).sum();
                    piece += tr_j * (dt.powi(j as i32 + 1) / fact);
                }
                let base = c[k] + piece;
                c.into_iter().map(|v| v - base).collect()
            }
        };
        let dets = self.determinants();
        Ok(dets
            .iter()
            .zip(&integral)
            .map(|(d, s)| {
                let expected = (-s).exp();
                (d - expected).norm() / expected.norm()
            })
            .fold(0.0, f64::max))
    }
}

/// Fills layers `1..=order` of `y` from layer 0 via
/// `y^{(j+1)} = f^{(j)} - Σ_r C(j,r) A^{(r)} y^{(j-r)}`.
fn lift_in_place(a: &GridFunction, f: Option<&GridFunction>, y: &mut GridFunction) {
    let order = y.order();
    let grid = *y.grid();
    for j in 0..order {
        for i in 0..grid.len() {
            let mut next = -product_layer(a, y, j, i);
            if let Some(f) = f {
                next += f.at(j, i);
            }
            y.set(j + 1, i, &next);
        }
    }
}

/// Derivatives of a solution of `y' + A y = f` up to order `n + 1`, from the
/// samples of `y` alone (layer 0 of `y_values`).
///
/// `f = None` is the homogeneous equation. `y_values` may have several
/// columns (one solution per column); `f` must match its shape.
pub fn lift_derivatives(
    a: &GridFunction,
    f: Option<&GridFunction>,
    y_values: &GridFunction,
    n: usize,
) -> Result<GridFunction> {
    a.require_order(n)?;
    let (m, k) = y_values.shape();
    if a.shape() != (m, m) || a.grid() != y_values.grid() {
        return Err(Error::Usage("coefficient does not match solution samples".into()));
    }
    if let Some(f) = f {
        f.require_order(n)?;
        if f.shape() != (m, k) || f.grid() != y_values.grid() {
            return Err(Error::Usage("right-hand side does not match solution samples".into()));
        }
    }
    let mut y = GridFunction::zeros(*y_values.grid(), m, k, n + 1);
    y.layer_mut(0).copy_from_slice(y_values.layer(0));
    lift_in_place(a, f, &mut y);
    Ok(y)
}

/// Matriciant by adaptive Dormand–Prince integration of `Y' = -A Y` from `t0`
/// towards both endpoints; layers `1..=order` follow from the equation.
///
/// `a` must be free of `eps` (or is evaluated at `eps = 0`).
pub fn matriciant(a: &ExprMatrix, grid: &Grid, order: usize, t0: f64, tol: f64) -> Result<Matriciant> {
    let (m, k) = a.shape();
    if m != k {
        return Err(Error::Usage(format!("coefficient must be square, got {m}x{k}")));
    }
    if !grid.interval().contains(t0) {
        return Err(Error::Usage(format!("anchor {t0} outside the interval")));
    }
    if !(tol > 0.0) {
        return Err(Error::Usage("tolerance must be positive".into()));
    }
    let order = order.max(1);
    let a_samples = a.sample(grid, order - 1, 0.0)?;

    let mut a_buf = vec![Complex64::new(0.0, 0.0); m * m];
    let mut rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
        a.eval_into(t, 0.0, &mut a_buf);
        for r in 0..m {
            for c in 0..m {
                let mut acc = Complex64::new(0.0, 0.0);
                for s in 0..m {
                    acc += a_buf[r * m + s] * y[s * m + c];
                }
                dy[r * m + c] = -acc;
            }
        }
    };
    let identity: Vec<Complex64> = (0..m * m)
        .map(|q| Complex64::new(if q / m == q % m { 1.0 } else { 0.0 }, 0.0))
        .collect();
    let states = integrate_on_grid(&mut rhs, grid, t0, &identity, StepControl::new(tol))?;

    let mut values = GridFunction::zeros(*grid, m, m, order);
    for (i, s) in states.iter().enumerate() {
        values.layer_mut(0)[i * m * m..(i + 1) * m * m].copy_from_slice(s);
    }
    lift_in_place(&a_samples, None, &mut values);
    let y = Matriciant { values, t0, tol, iterations: None };
    y.check_nonsingular()?;
    Ok(y)
}

/// `(V_A Y)(t) = ∫_{t0}^{t} A(s) Y(s) ds` with derivative layers
/// `(V_A Y)^{(j+1)} = (A Y)^{(j)}`. `t0` must be a grid node.
pub fn volterra(a: &GridFunction, y: &GridFunction, t0: f64) -> Result<GridFunction> {
    let grid = *y.grid();
    let k0 = grid
        .index_of(t0)
        .ok_or_else(|| Error::Usage(format!("anchor {t0} is not a grid node")))?;
    let (m, k) = y.shape();
    if a.shape() != (m, m) || a.grid() != &grid {
        return Err(Error::Usage("coefficient does not match operand".into()));
    }
    let order = a.order().min(y.order());
    let mut out = GridFunction::zeros(grid, m, k, order + 1);
    for j in 0..=order {
        for i in 0..grid.len() {
            out.set(j + 1, i, &product_layer(a, y, j, i));
        }
    }
    let block = m * k;
    let h = grid.step();
    for q in 0..block {
        let integrand: Vec<Complex64> = out.layer(1).iter().skip(q).step_by(block).copied().collect();
        let integral = cumulative_from(&integrand, h, k0);
        let layer0 = out.layer_mut(0);
        for (i, v) in integral.into_iter().enumerate() {
            layer0[i * block + q] = v;
        }
    }
    Ok(out)
}

/// Matriciant by Picard iteration `Y_{k+1} = I - V_A Y_k`, `Y_0 = I`, with
/// cumulative Simpson quadrature. Stops once the sup-norm increment drops
/// below `stop_tol`. Layers above 0 come from the equation, as in
/// [`matriciant`]; the result has order `a.order() + 1`.
pub fn picard_matriciant(a: &GridFunction, t0: f64, max_iter: usize, stop_tol: f64) -> Result<Matriciant> {
    let grid = *a.grid();
    let (m, k) = a.shape();
    if m != k {
        return Err(Error::Usage("coefficient must be square".into()));
    }
    let a0 = a.truncated(0)?;
    let identity = {
        let mut g = GridFunction::zeros(grid, m, m, 0);
        let id = CMatrix::identity(m, m);
        for i in 0..grid.len() {
            g.set(0, i, &id);
        }
        g
    };
    let mut y = identity.clone();
    let mut increment = f64::INFINITY;
    for iter in 1..=max_iter {
        let v = volterra(&a0, &y, t0)?.truncated(0)?;
        let next = identity.sub(&v)?;
        increment = sup_norm(&next.sub(&y)?, 0)?;
        y = next;
        if increment < stop_tol {
            let mut values = GridFunction::zeros(grid, m, m, a.order() + 1);
            values.layer_mut(0).copy_from_slice(y.layer(0));
            lift_in_place(a, None, &mut values);
            let out = Matriciant { values, t0, tol: stop_tol, iterations: Some(iter) };
            out.check_nonsingular()?;
            return Ok(out);
        }
    }
    Err(Error::Convergence { iterations: max_iter, increment })
}

/// Recovers `A = -Y' Y^{-1}` with derivative layers up to `Y.order() - 1`,
/// using `(Y^{-1})^{(j)} = -Y^{-1} Σ_{r≥1} C(j,r) Y^{(r)} (Y^{-1})^{(j-r)}`.
pub fn recover_coefficient(y: &Matriciant) -> Result<GridFunction> {
    let vals = y.values();
    let grid = *vals.grid();
    let m = y.dim();
    let n = vals.order().checked_sub(1).ok_or(Error::Order { needed: 1, have: 0 })?;
    let mut out = GridFunction::zeros(grid, m, m, n);
    for i in 0..grid.len() {
        let y0 = vals.at(0, i);
        let w0 = y0.clone().try_inverse().ok_or_else(|| Error::SingularMatriciant {
            t: grid.t(i),
            det: y0.determinant().norm(),
        })?;
        let mut w = vec![w0.clone()];
        for j in 1..=n {
            let mut acc = CMatrix::zeros(m, m);
            for r in 1..=j {
                acc += vals.at(r, i) * &w[j - r] * Complex64::new(binomial(j, r), 0.0);
            }
            w.push(-(&w0 * acc));
        }
        for kk in 0..=n {
            let mut acc = CMatrix::zeros(m, m);
            for r in 0..=kk {
                acc += vals.at(r + 1, i) * &w[kk - r] * Complex64::new(binomial(kk, r), 0.0);
            }
            out.set(kk, i, &(-acc));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{parse_expr, Interval};

    fn grid(n: usize) -> Grid {
        Grid::new(Interval::new(0.0, 1.0).unwrap(), n).unwrap()
    }

    fn expr_matrix(rows: &[&[&str]]) -> ExprMatrix {
        ExprMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|s| parse_expr(s).unwrap()).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn zero_coefficient_gives_identity() {
        let y = matriciant(&ExprMatrix::zeros(3, 3), &grid(20), 2, 0.0, 1e-10).unwrap();
        for i in 0..21 {
            assert_eq!(y.values().at(0, i), CMatrix::identity(3, 3));
            assert!(y.values().at(1, i).iter().all(|z| z.norm() == 0.0));
        }
    }

    #[test]
    fn scalar_exponential() {
        let g = grid(100);
        let y = matriciant(&expr_matrix(&[&["1"]]), &g, 1, 0.0, 1e-10).unwrap();
        for i in 0..g.len() {
            let exact = (-g.t(i)).exp();
            assert!((y.values().value(0, i, 0, 0).re - exact).abs() / exact <= 1e-8);
            assert!((y.values().value(1, i, 0, 0).re + exact).abs() / exact <= 1e-8);
        }
    }

    #[test]
    fn rotation_generator() {
        let g = grid(100);
        let y = matriciant(&expr_matrix(&[&["0", "1"], &["-1", "0"]]), &g, 1, 0.0, 1e-10).unwrap();
        for i in 0..g.len() {
            let t = g.t(i);
            let exact = [[t.cos(), -t.sin()], [t.sin(), t.cos()]];
            for r in 0..2 {
                for c in 0..2 {
                    assert!((y.values().value(0, i, r, c).re - exact[r][c]).abs() <= 1e-8);
                }
            }
        }
    }

    #[test]
    fn picard_zero_coefficient_converges_immediately() {
        let g = grid(10);
        let a = ExprMatrix::zeros(2, 2).sample(&g, 0, 0.0).unwrap();
        let y = picard_matriciant(&a, 0.0, 10, 1e-12).unwrap();
        assert_eq!(y.iterations(), Some(1));
        assert_eq!(y.values().at(0, 5), CMatrix::identity(2, 2));
    }

    #[test]
    fn picard_scalar_series() {
        let g = grid(1000);
        let a = expr_matrix(&[&["1"]]).sample(&g, 0, 0.0).unwrap();
        let y = picard_matriciant(&a, 0.0, 20, 0.0).err();
        // stop_tol = 0 never triggers: exactly 20 partial sums were formed
        assert!(matches!(y, Some(Error::Convergence { iterations: 20, .. })));
        let y = picard_matriciant(&a, 0.0, 40, 1e-15).unwrap();
        assert!(y.iterations().unwrap() <= 20);
        for i in 0..g.len() {
            let exact = (-g.t(i)).exp();
            assert!((y.values().value(0, i, 0, 0).re - exact).abs() <= 1e-12);
        }
    }

    #[test]
    fn picard_divergence_budget() {
        let g = grid(50);
        let a = expr_matrix(&[&["30"]]).sample(&g, 0, 0.0).unwrap();
        assert!(matches!(
            picard_matriciant(&a, 0.0, 3, 1e-10),
            Err(Error::Convergence { iterations: 3, .. })
        ));
    }

    #[test]
    fn recover_identity_and_exponential() {
        let g = grid(50);
        let id = matriciant(&ExprMatrix::zeros(2, 2), &g, 2, 0.0, 1e-10).unwrap();
        let a = recover_coefficient(&id).unwrap();
        assert!(a.layer(0).iter().chain(a.layer(1)).all(|z| z.norm() == 0.0));

        let e = expr_matrix(&[&["exp(-t)"]]).sample(&g, 2, 0.0).unwrap();
        let y = Matriciant::from_grid_function(e, 0.0, 1e-12).unwrap();
        let a = recover_coefficient(&y).unwrap();
        for i in 0..g.len() {
            assert!((a.value(0, i, 0, 0).re - 1.0).abs() < 1e-14);
            assert!(a.value(1, i, 0, 0).norm() < 1e-14);
        }
    }

    #[test]
    fn lift_scalar_exponential() {
        let g = grid(40);
        let a = expr_matrix(&[&["1"]]).sample(&g, 3, 0.0).unwrap();
        let f = expr_matrix(&[&["0"]]).sample(&g, 3, 0.0).unwrap();
        let y = expr_matrix(&[&["exp(-t)"]]).sample(&g, 0, 0.0).unwrap();
        let lifted = lift_derivatives(&a, Some(&f), &y, 3).unwrap();
        for j in 0..=4 {
            for i in 0..g.len() {
                let exact = (-1f64).powi(j as i32) * (-g.t(i)).exp();
                assert!((lifted.value(j, i, 0, 0).re - exact).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn lift_first_layer_is_the_equation() {
        let g = grid(30);
        let a = expr_matrix(&[&["t", "1"], &["sin(t)", "2"]]).sample(&g, 1, 0.0).unwrap();
        let f = expr_matrix(&[&["cos(t)"], &["t^2"]]).sample(&g, 1, 0.0).unwrap();
        let y = expr_matrix(&[&["exp(t)"], &["1+t"]]).sample(&g, 0, 0.0).unwrap();
        let lifted = lift_derivatives(&a, Some(&f), &y, 1).unwrap();
        for i in 0..g.len() {
            assert_eq!(lifted.at(1, i), f.at(0, i) - a.at(0, i) * y.at(0, i));
        }
        assert!(matches!(
            lift_derivatives(&a, Some(&f), &y, 2),
            Err(Error::Order { needed: 2, have: 1 })
        ));
    }

    #[test]
    fn lift_of_constant_without_coefficient() {
        let g = grid(10);
        let a = ExprMatrix::zeros(2, 2).sample(&g, 2, 0.0).unwrap();
        let y = expr_matrix(&[&["3"], &["-1i"]]).sample(&g, 0, 0.0).unwrap();
        let lifted = lift_derivatives(&a, None, &y, 2).unwrap();
        assert!((1..=3).all(|j| lifted.layer(j).iter().all(|z| z.norm() == 0.0)));
    }

    #[test]
    fn anchor_off_grid() {
        let g = grid(100);
        let y = matriciant(&expr_matrix(&[&["1", "t"], &["0", "2"]]), &g, 2, 0.33, 1e-11).unwrap();
        assert!(y.anchor_defect() < 1e-6);
        let a = expr_matrix(&[&["1", "t"], &["0", "2"]]).sample(&g, 1, 0.0).unwrap();
        assert!(y.liouville_defect(&a).unwrap() < 1e-6);
    }
}
