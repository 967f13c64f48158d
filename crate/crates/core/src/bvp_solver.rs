//! Single problems `y' + A y = f`, `B y = q`.
//!
//! The solver reduces everything to the `m x m` matrix `[BY]`: the problem is
//! uniquely solvable iff `det [BY] ≠ 0`, and then `y = x + Y p` where `x` solves
//! the Cauchy problem `x(a) = 0` and `[BY] p = q - B x`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::boundary::BoundaryOperator;
use crate::error::{Error, Result};
use crate::funcspace::{ExprMatrix, Grid, GridFunction, Interval, Var};
use crate::holder::{component_sum, holder_norm, HolderParams};
use crate::ode_core::{integrate_on_grid, lift_derivatives, matriciant, product_layer, Matriciant, StepControl};
use crate::CMatrix;

pub const DEFAULT_GRID: usize = 1000;
pub const DEFAULT_TOL: f64 = 1e-10;

/// One generic boundary-value problem; all expressions are free of `eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub interval: Interval,
    pub n: usize,
    pub alpha: f64,
    pub a: ExprMatrix,
    pub f: ExprMatrix,
    pub boundary: BoundaryOperator,
    pub q: CMatrix,
    /// Parameter value this instance was taken at, if it belongs to a family.
    pub eps: Option<f64>,
}

impl ProblemInstance {
    pub fn new(
        interval: Interval,
        n: usize,
        alpha: f64,
        a: ExprMatrix,
        f: ExprMatrix,
        boundary: BoundaryOperator,
        q: CMatrix,
    ) -> Result<Self> {
        let p = ProblemInstance { interval, n, alpha, a, f, boundary, q, eps: None };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        HolderParams::new(self.n, self.alpha)?;
        let m = self.m();
        if self.a.shape() != (m, m) {
            return Err(Error::dimension("A", format!("{:?} is not square", self.a.shape())));
        }
        if self.f.shape() != (m, 1) {
            return Err(Error::dimension("f", format!("expected {m} entries, got {:?}", self.f.shape())));
        }
        if self.q.shape() != (m, 1) {
            return Err(Error::dimension("q", format!("expected {m} entries, got {:?}", self.q.shape())));
        }
        if self.boundary.betas.len() != self.n + 1 {
            return Err(Error::dimension(
                "boundary.betas",
                format!("expected n + 1 = {} matrices, got {}", self.n + 1, self.boundary.betas.len()),
            ));
        }
        if self.boundary.dim() != m {
            return Err(Error::dimension("boundary", format!("operator acts on {} components, m = {m}", self.boundary.dim())));
        }
        for (name, e) in [("A", &self.a), ("f", &self.f)] {
            if e.depends_on(Var::Eps) {
                return Err(Error::Usage(format!("{name} still depends on eps")));
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.a.shape().0
    }

    pub fn grid(&self, n_sub: usize) -> Result<Grid> {
        Grid::new(self.interval, n_sub)
    }

    /// `A` and `f` sampled with derivatives up to order `n`.
    pub fn sample_data(&self, grid: &Grid) -> Result<(GridFunction, GridFunction)> {
        Ok((self.a.sample(grid, self.n, 0.0)?, self.f.sample(grid, self.n, 0.0)?))
    }

    /// Same problem with another right-hand side.
    pub fn with_data(&self, f: ExprMatrix, q: CMatrix) -> Result<Self> {
        let p = ProblemInstance { f, q, ..self.clone() };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Number of grid subintervals.
    pub grid: usize,
    /// Integrator tolerance.
    pub tol: f64,
    /// Relative singular-value cutoff deciding `det [BY] ≈ 0`.
    pub rank_tol: f64,
    /// Initial trial step as a fraction of the grid spacing.
    pub initial_step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { grid: DEFAULT_GRID, tol: DEFAULT_TOL, rank_tol: DEFAULT_TOL, initial_step: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub struct WellPosedness {
    pub wellposed: bool,
    pub det: Complex64,
    pub kernel_dim: usize,
    /// `σ_max / σ_min` of `[BY]` (infinite when singular).
    pub condition: f64,
    pub singular_values: Vec<f64>,
    pub boundary_matrix: CMatrix,
}

fn classify(m: &CMatrix, rank_tol: f64) -> WellPosedness {
    let sv: Vec<f64> = {
        let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    };
    let largest = sv.first().copied().unwrap_or(0.0);
    let cutoff = rank_tol * largest;
    let kernel_dim = if largest == 0.0 { sv.len() } else { sv.iter().filter(|&&s| s <= cutoff).count() };
    let smallest = sv.last().copied().unwrap_or(0.0);
    WellPosedness {
        wellposed: kernel_dim == 0,
        det: m.clone().lu().determinant(),
        kernel_dim,
        condition: if smallest > 0.0 { largest / smallest } else { f64::INFINITY },
        singular_values: sv,
        boundary_matrix: m.clone(),
    }
}

/// Matriciant anchored at `a` for the instance, with order `n + 1`.
pub fn instance_matriciant(prob: &ProblemInstance, opts: &SolverOptions) -> Result<Matriciant> {
    let grid = prob.grid(opts.grid)?;
    matriciant(&prob.a, &grid, prob.n + 1, prob.interval.a(), opts.tol)
}

pub fn is_wellposed(prob: &ProblemInstance, opts: &SolverOptions) -> Result<WellPosedness> {
    let y = instance_matriciant(prob, opts)?;
    Ok(classify(&prob.boundary.boundary_matrix(&y)?, opts.rank_tol))
}

#[derive(Debug, Clone)]
pub struct Solution {
    /// Solution samples with derivatives up to order `n + 1`.
    pub y: GridFunction,
    /// Coordinates of the homogeneous part in the matriciant basis.
    pub p: CMatrix,
    pub det: Complex64,
    pub condition: f64,
}

/// Solves `x' + A x = f`, `x(a) = 0` on the grid (layer 0 only).
fn particular_solution(prob: &ProblemInstance, grid: &Grid, opts: &SolverOptions) -> Result<GridFunction> {
    let m = prob.m();
    let mut a_buf = vec![Complex64::new(0.0, 0.0); m * m];
    let mut f_buf = vec![Complex64::new(0.0, 0.0); m];
    let (a, f) = (&prob.a, &prob.f);
    let mut rhs = |t: f64, x: &[Complex64], dx: &mut [Complex64]| {
        a.eval_into(t, 0.0, &mut a_buf);
        f.eval_into(t, 0.0, &mut f_buf);
        for r in 0..m {
            let mut acc = f_buf[r];
            for s in 0..m {
                acc -= a_buf[r * m + s] * x[s];
            }
            dx[r] = acc;
        }
    };
    let ctl = StepControl { tol: opts.tol, initial_fraction: opts.initial_step };
    let x0 = vec![Complex64::new(0.0, 0.0); m];
    let states = integrate_on_grid(&mut rhs, grid, prob.interval.a(), &x0, ctl)?;
    let mut x = GridFunction::zeros(*grid, m, 1, 0);
    for (i, s) in states.iter().enumerate() {
        x.layer_mut(0)[i * m..(i + 1) * m].copy_from_slice(s);
    }
    Ok(x)
}

pub fn solve(prob: &ProblemInstance, opts: &SolverOptions) -> Result<Solution> {
    let grid = prob.grid(opts.grid)?;
    let n = prob.n;
    let (a, f) = prob.sample_data(&grid)?;
    let y_mat = instance_matriciant(prob, opts)?;
    let by = prob.boundary.boundary_matrix(&y_mat)?;
    let wp = classify(&by, opts.rank_tol);
    if !wp.wellposed {
        return Err(Error::NotWellPosed { eps: prob.eps });
    }
    let x = lift_derivatives(&a, Some(&f), &particular_solution(prob, &grid, opts)?, n)?;
    let q_hat = &prob.q - prob.boundary.apply(&x)?;
    let p = by
        .clone()
        .lu()
        .solve(&q_hat)
        .ok_or(Error::NotWellPosed { eps: prob.eps })?;
    let homogeneous = y_mat.values().truncated(0)?.mul_right(&p)?;
    let y0 = x.truncated(0)?.add(&homogeneous)?;
    let y = lift_derivatives(&a, Some(&f), &y0, n)?;
    Ok(Solution { y, p, det: wp.det, condition: wp.condition })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    /// `‖y' + A y - f‖_{n,α}`.
    pub eq_residual: f64,
    /// `‖B y - q‖` (component sum).
    pub bc_residual: f64,
}

impl Residual {
    pub fn total(&self) -> f64 {
        self.eq_residual + self.bc_residual
    }
}

/// Discrepancy of an arbitrary `y` (order ≥ n + 1) in the problem.
pub fn residual(prob: &ProblemInstance, y: &GridFunction) -> Result<Residual> {
    let n = prob.n;
    y.require_order(n + 1)?;
    let m = prob.m();
    if y.shape() != (m, 1) {
        return Err(Error::Usage(format!("expected an {m}-vector function")));
    }
    let grid = *y.grid();
    let (a, f) = prob.sample_data(&grid)?;
    let mut r = GridFunction::zeros(grid, m, 1, n);
    for j in 0..=n {
        for i in 0..grid.len() {
            let v = y.at(j + 1, i) + product_layer(&a, y, j, i) - f.at(j, i);
            r.set(j, i, &v);
        }
    }
    let eq_residual = holder_norm(&r, HolderParams::new(n, prob.alpha)?)?;
    let bc_residual = component_sum(&(prob.boundary.apply(y)? - &prob.q));
    Ok(Residual { eq_residual, bc_residual })
}

/// Column vector helper.
pub fn cvector(values: &[Complex64]) -> CMatrix {
    DMatrix::from_column_slice(values.len(), 1, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::StieltjesMeasure;
    use crate::funcspace::parse_expr;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    fn e1(s: &str) -> ExprMatrix {
        ExprMatrix::new(1, 1, vec![parse_expr(s).unwrap()]).unwrap()
    }

    fn unit() -> Interval {
        Interval::new(0.0, 1.0).unwrap()
    }

    /// `z(0) + s z(1)` for n = 0, written as `(1 + s) z(0) + s ∫ z'`.
    fn two_point(s: f64) -> BoundaryOperator {
        let phi = StieltjesMeasure { jumps: vec![], density: Some(e1(&format!("{s}"))) };
        BoundaryOperator::new(vec![CMatrix::from_element(1, 1, c(1.0 + s))], phi, 1, unit()).unwrap()
    }

    fn scalar_problem(a: &str, f: &str, b: BoundaryOperator, q: f64) -> ProblemInstance {
        ProblemInstance::new(unit(), 0, 0.0, e1(a), e1(f), b, cvector(&[c(q)])).unwrap()
    }

    #[test]
    fn cauchy_always_wellposed() {
        let p = scalar_problem("sin(5*t)", "0", BoundaryOperator::cauchy(1, 0), 1.0);
        let w = is_wellposed(&p, &SolverOptions::default()).unwrap();
        assert!(w.wellposed);
        assert!((w.det - c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn periodic_condition() {
        let p = scalar_problem("0", "0", two_point(-1.0), 0.0);
        let w = is_wellposed(&p, &SolverOptions::default()).unwrap();
        assert!(!w.wellposed);
        assert_eq!(w.kernel_dim, 1);
        assert!(matches!(solve(&p, &SolverOptions::default()), Err(Error::NotWellPosed { .. })));

        let p = scalar_problem("1", "0", two_point(-1.0), 0.0);
        let w = is_wellposed(&p, &SolverOptions::default()).unwrap();
        assert!(w.wellposed);
        assert!((w.det - c(1.0 - (-1f64).exp())).norm() < 1e-8);
    }

    #[test]
    fn solves_hand_integrated_problem() {
        // y' = 1, y(0) + y(1) = 3  =>  y = t + 1
        let p = scalar_problem("0", "1", two_point(1.0), 3.0);
        let s = solve(&p, &SolverOptions::default()).unwrap();
        let grid = p.grid(DEFAULT_GRID).unwrap();
        for i in 0..grid.len() {
            assert!((s.y.value(0, i, 0, 0) - c(grid.t(i) + 1.0)).norm() < 1e-10);
            assert!((s.y.value(1, i, 0, 0) - c(1.0)).norm() < 1e-10);
        }
        let r = residual(&p, &s.y).unwrap();
        assert!(r.eq_residual < 1e-6 && r.bc_residual < 1e-6);
    }

    #[test]
    fn residual_of_zero_function() {
        let p = scalar_problem("t", "0", BoundaryOperator::cauchy(1, 0), 1.0);
        let grid = p.grid(50).unwrap();
        let y = GridFunction::zeros(grid, 1, 1, 1);
        let r = residual(&p, &y).unwrap();
        assert_eq!(r.eq_residual, 0.0);
        assert_eq!(r.bc_residual, 1.0);
    }

    #[test]
    fn rejects_inconsistent_dimensions() {
        let b = BoundaryOperator::cauchy(1, 1);
        let err = ProblemInstance::new(unit(), 0, 0.0, e1("1"), e1("0"), b, cvector(&[c(1.0)]));
        assert!(matches!(err, Err(Error::Dimension { .. })));
        let err = ProblemInstance::new(unit(), 0, 1.5, e1("1"), e1("0"), BoundaryOperator::cauchy(1, 0), cvector(&[c(1.0)]));
        assert!(err.is_err());
    }
}
