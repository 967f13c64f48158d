//! Boundary operators
//!
//! ```text
//! B z = Σ_{k=1}^{n+1} β_k z^{(k-1)}(a) + ∫_a^b dΦ(t) z^{(n+1)}(t)
//! ```
//!
//! where `Φ` is restricted to finitely many jumps plus a continuous density:
//! `dΦ = Σ_c J_c δ_c + Φ'(t) dt`. For that class the Stieltjes integral is the
//! jump sum plus a Simpson integral of the density term. Jump locations are
//! snapped to the nearest grid node.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::funcspace::{ExprMatrix, Grid, GridFunction, Interval};
use crate::holder::component_sum;
use crate::ode_core::Matriciant;
use crate::quadrature::{cumulative, simpson, trapezoid};
use crate::CMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Jump {
    /// Location in `(a, b]`.
    pub location: f64,
    pub matrix: CMatrix,
}

/// `Φ` with `Φ(a) = 0`, finitely many jumps and a continuous density.
#[derive(Debug, Clone, PartialEq)]
pub struct StieltjesMeasure {
    pub jumps: Vec<Jump>,
    /// `Φ'`; `None` means zero. Must not depend on `eps`.
    pub density: Option<ExprMatrix>,
}

impl StieltjesMeasure {
    pub fn zero() -> Self {
        StieltjesMeasure { jumps: Vec::new(), density: None }
    }

    fn check(&self, interval: Interval, m: usize) -> Result<()> {
        for (k, j) in self.jumps.iter().enumerate() {
            if !(j.location > interval.a() && j.location <= interval.b()) {
                return Err(Error::dimension(
                    format!("boundary.jumps[{k}]"),
                    format!("location {} outside (a, b]", j.location),
                ));
            }
            if j.matrix.shape() != (m, m) {
                return Err(Error::dimension(
                    format!("boundary.jumps[{k}]"),
                    format!("matrix is {:?}, expected {m}x{m}", j.matrix.shape()),
                ));
            }
        }
        if let Some(d) = &self.density {
            if d.shape() != (m, m) {
                return Err(Error::dimension(
                    "boundary.density",
                    format!("matrix is {:?}, expected {m}x{m}", d.shape()),
                ));
            }
        }
        Ok(())
    }

    /// Total variation `V_a^b Φ`: jump sizes plus `∫ |Φ'|`, both measured
    /// componentwise; the integral is a trapezoid sum on `n` subintervals.
    pub fn total_variation(&self, interval: Interval, n: usize) -> Result<f64> {
        let mut total = self.jumps.iter().fold(0.0, |acc, j| acc + component_sum(&j.matrix));
        if let Some(d) = &self.density {
            let grid = Grid::new(interval, n)?;
            let samples = d.sample(&grid, 0, 0.0)?;
            let (rows, cols) = samples.shape();
            for r in 0..rows {
                for c in 0..cols {
                    let abs: Vec<f64> = samples.component(0, r, c).map(|z| z.norm()).collect();
                    total += trapezoid(&abs, grid.step());
                }
            }
        }
        Ok(total)
    }

    /// `Φ(t_i)` and `∫_a^{t_i} Φ(s) ds` at the nodes of `grid`.
    ///
    /// Jumps enter at their exact locations (no snapping), so this is usable to
    /// compare measures whose jumps move with a parameter.
    pub fn primitives(&self, grid: &Grid, m: usize) -> Result<(Vec<CMatrix>, Vec<CMatrix>)> {
        let len = grid.len();
        let mut phi = vec![CMatrix::zeros(m, m); len];
        let mut phi_int = vec![CMatrix::zeros(m, m); len];
        if let Some(d) = &self.density {
            let samples = d.sample(grid, 0, 0.0)?;
            for r in 0..m {
                for c in 0..m {
                    let v: Vec<Complex64> = samples.component(0, r, c).collect();
                    let first = cumulative(&v, grid.step());
                    let second = cumulative(&first, grid.step());
                    for i in 0..len {
                        phi[i][(r, c)] = first[i];
                        phi_int[i][(r, c)] = second[i];
                    }
                }
            }
        }
        for j in &self.jumps {
            for i in 0..len {
                let t = grid.t(i);
                if t >= j.location {
                    phi[i] += &j.matrix;
                    phi_int[i] += &j.matrix * Complex64::new(t - j.location, 0.0);
                }
            }
        }
        Ok((phi, phi_int))
    }

    /// Total variation of `self - other` (jumps at coinciding locations merge).
    pub fn variation_of_difference(&self, other: &StieltjesMeasure, interval: Interval, n: usize) -> Result<f64> {
        let mut jumps: Vec<Jump> = self.jumps.clone();
        for j in &other.jumps {
            match jumps.iter_mut().find(|k| (k.location - j.location).abs() <= 1e-12 * interval.length()) {
                Some(k) => k.matrix -= &j.matrix,
                None => jumps.push(Jump { location: j.location, matrix: -&j.matrix }),
            }
        }
        let density = match (&self.density, &other.density) {
            (None, None) => None,
            (Some(d), None) => Some(d.clone()),
            (None, Some(e)) => Some(e.map(|x| x.neg())),
            (Some(d), Some(e)) => Some(d.zip_with(e, |x, y| x.sub(y))?),
        };
        StieltjesMeasure { jumps, density }.total_variation(interval, n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryOperator {
    /// `β_1, …, β_{n+1}`, coefficients of `z(a), …, z^{(n)}(a)`.
    pub betas: Vec<CMatrix>,
    pub phi: StieltjesMeasure,
}

impl BoundaryOperator {
    /// Validates the shapes against `m` and the interval.
    pub fn new(betas: Vec<CMatrix>, phi: StieltjesMeasure, m: usize, interval: Interval) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::dimension("boundary.betas", "at least one beta matrix is required"));
        }
        for (k, b) in betas.iter().enumerate() {
            if b.shape() != (m, m) {
                return Err(Error::dimension(
                    format!("boundary.betas[{k}]"),
                    format!("matrix is {:?}, expected {m}x{m}", b.shape()),
                ));
            }
        }
        phi.check(interval, m)?;
        Ok(BoundaryOperator { betas, phi })
    }

    /// `z ↦ z(a)`, for the given smoothness index `n`.
    pub fn cauchy(m: usize, n: usize) -> Self {
        let mut betas = vec![CMatrix::zeros(m, m); n + 1];
        betas[0] = CMatrix::identity(m, m);
        BoundaryOperator { betas, phi: StieltjesMeasure::zero() }
    }

    /// The smoothness index `n` (number of betas minus one).
    pub fn n(&self) -> usize {
        self.betas.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.betas[0].nrows()
    }

    /// Applies `B` to each column of `z` (an `m x k` grid function of order at
    /// least `n + 1`); returns the `m x k` matrix of results.
    pub fn apply(&self, z: &GridFunction) -> Result<CMatrix> {
        let n = self.n();
        z.require_order(n + 1)?;
        let (m, k) = z.shape();
        if m != self.dim() {
            return Err(Error::Usage(format!("operand has {m} rows, operator expects {}", self.dim())));
        }
        let grid = z.grid();
        let mut out = CMatrix::zeros(m, k);
        for (j, beta) in self.betas.iter().enumerate() {
            out += beta * z.at(j, 0);
        }
        for jump in &self.phi.jumps {
            let i = grid.nearest_index(jump.location);
            out += &jump.matrix * z.at(n + 1, i);
        }
        if let Some(d) = &self.phi.density {
            let ds = d.sample(grid, 0, 0.0)?;
            let integrand: Vec<CMatrix> = (0..grid.len()).map(|i| ds.at(0, i) * z.at(n + 1, i)).collect();
            for r in 0..m {
                for c in 0..k {
                    let v: Vec<Complex64> = integrand.iter().map(|x| x[(r, c)]).collect();
                    out[(r, c)] += simpson(&v, grid.step());
                }
            }
        }
        Ok(out)
    }

    /// `[BY]`: `B` applied to the columns of the matriciant.
    pub fn boundary_matrix(&self, y: &Matriciant) -> Result<CMatrix> {
        self.apply(y.values())
    }
}

/// Free-function form of [`BoundaryOperator::apply`].
pub fn apply_boundary(b: &BoundaryOperator, z: &GridFunction) -> Result<CMatrix> {
    b.apply(z)
}

pub fn boundary_matrix(b: &BoundaryOperator, y: &Matriciant) -> Result<CMatrix> {
    b.boundary_matrix(y)
}

pub fn total_variation(phi: &StieltjesMeasure, interval: Interval, n: usize) -> Result<f64> {
    phi.total_variation(interval, n)
}
