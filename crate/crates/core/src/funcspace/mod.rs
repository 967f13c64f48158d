//! Problem data: expressions, uniform grids and sampled functions with their
//! derivative layers.

mod expr;
mod parse;

pub use expr::{Expr, Unary, Var};
pub use parse::parse_expr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::CMatrix;

/// Compact interval `[a, b]`, `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Usage(format!("invalid interval [{a}, {b}]")));
        }
        Ok(Interval { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.a && t <= self.b
    }
}

/// Uniform grid `t_i = a + i (b - a) / N`, `0 <= i <= N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    interval: Interval,
    n: usize,
}

impl Grid {
    pub fn new(interval: Interval, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Usage(format!("grid needs at least 2 subintervals, got {n}")));
        }
        Ok(Grid { interval, n })
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    /// Number of subintervals.
    pub fn subintervals(&self) -> usize {
        self.n
    }

    /// Number of grid points, `N + 1`.
    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.interval.length() / self.n as f64
    }

    pub fn t(&self, i: usize) -> f64 {
        if i == self.n {
            return self.interval.b;
        }
        self.interval.a + self.interval.length() * (i as f64 / self.n as f64)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.t(i))
    }

    /// Index of the grid point nearest to `t`.
    pub fn nearest_index(&self, t: f64) -> usize {
        let x = (t - self.interval.a) / self.step();
        x.round().clamp(0.0, self.n as f64) as usize
    }

    /// Index of `t` if it lies on the grid (up to rounding).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let i = self.nearest_index(t);
        ((self.t(i) - t).abs() <= 1e-9 * self.step()).then_some(i)
    }
}

/// A matrix- (or vector-, with one column) valued function sampled on a grid
/// together with its derivatives up to `order`.
///
/// Storage is layer-major, then point-major, then row-major within a point.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    rows: usize,
    cols: usize,
    layers: Vec<Vec<Complex64>>,
}

impl GridFunction {
    pub fn zeros(grid: Grid, rows: usize, cols: usize, order: usize) -> Self {
        let size = grid.len() * rows * cols;
        GridFunction {
            grid,
            rows,
            cols,
            layers: vec![vec![Complex64::new(0.0, 0.0); size]; order + 1],
        }
    }

    /// Builds a function from per-point matrices, one `Vec` per derivative layer.
    pub fn from_points(grid: Grid, layers: &[Vec<CMatrix>]) -> Result<Self> {
        let first = layers
            .first()
            .and_then(|l| l.first())
            .ok_or_else(|| Error::Usage("empty grid function".into()))?;
        let (rows, cols) = first.shape();
        let mut g = GridFunction::zeros(grid, rows, cols, layers.len() - 1);
        for (j, layer) in layers.iter().enumerate() {
            if layer.len() != grid.len() {
                return Err(Error::Usage(format!(
                    "layer {j} has {} samples, grid has {}",
                    layer.len(),
                    grid.len()
                )));
            }
            for (i, m) in layer.iter().enumerate() {
                if m.shape() != (rows, cols) {
                    return Err(Error::Usage("inconsistent sample shapes".into()));
                }
                g.set(j, i, m);
            }
        }
        Ok(g)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn order(&self) -> usize {
        self.layers.len() - 1
    }

    fn block(&self) -> usize {
        self.rows * self.cols
    }

    /// Raw samples of derivative layer `j`.
    pub fn layer(&self, j: usize) -> &[Complex64] {
        &self.layers[j]
    }

    pub(crate) fn layer_mut(&mut self, j: usize) -> &mut [Complex64] {
        &mut self.layers[j]
    }

    pub fn value(&self, j: usize, i: usize, r: usize, c: usize) -> Complex64 {
        self.layers[j][i * self.block() + r * self.cols + c]
    }

    /// Sample of derivative layer `j` at grid point `i`, as a matrix.
    pub fn at(&self, j: usize, i: usize) -> CMatrix {
        let off = i * self.block();
        DMatrix::from_row_slice(self.rows, self.cols, &self.layers[j][off..off + self.block()])
    }

    pub fn set(&mut self, j: usize, i: usize, m: &CMatrix) {
        let (rows, cols) = (self.rows, self.cols);
        let off = i * self.block();
        let dst = &mut self.layers[j][off..off + rows * cols];
        for r in 0..rows {
            for c in 0..cols {
                dst[r * cols + c] = m[(r, c)];
            }
        }
    }

    /// Samples of component `(r, c)` of layer `j` across the grid.
    pub fn component(&self, j: usize, r: usize, c: usize) -> impl Iterator<Item = Complex64> + '_ {
        let block = self.block();
        let off = r * self.cols + c;
        self.layers[j].iter().skip(off).step_by(block).copied()
    }

    /// Keeps layers `0..=order`.
    pub fn truncated(&self, order: usize) -> Result<Self> {
        self.require_order(order)?;
        let mut g = self.clone();
        g.layers.truncate(order + 1);
        Ok(g)
    }

    pub fn require_order(&self, needed: usize) -> Result<()> {
        if self.order() < needed {
            return Err(Error::Order {
                needed,
                have: self.order(),
            });
        }
        Ok(())
    }

    /// Column `c` as an `rows x 1` function.
    pub fn column(&self, c: usize) -> GridFunction {
        let mut g = GridFunction::zeros(self.grid, self.rows, 1, self.order());
        for j in 0..=self.order() {
            for i in 0..self.grid.len() {
                for r in 0..self.rows {
                    g.layers[j][i * self.rows + r] = self.value(j, i, r, c);
                }
            }
        }
        g
    }

    fn check_compatible(&self, other: &GridFunction) -> Result<()> {
        if self.grid != other.grid || self.shape() != other.shape() {
            return Err(Error::Usage(format!(
                "incompatible grid functions: {:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(())
    }

    /// `self + scale * other` on the common layers.
    pub fn axpy(&self, scale: Complex64, other: &GridFunction) -> Result<GridFunction> {
        self.check_compatible(other)?;
        let order = self.order().min(other.order());
        let layers = (0..=order)
            .map(|j| {
                self.layers[j]
                    .iter()
                    .zip(&other.layers[j])
                    .map(|(x, y)| x + scale * y)
                    .collect()
            })
            .collect();
        Ok(GridFunction {
            grid: self.grid,
            rows: self.rows,
            cols: self.cols,
            layers,
        })
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.axpy(Complex64::new(1.0, 0.0), other)
    }

    pub fn scaled(&self, s: Complex64) -> GridFunction {
        let mut g = self.clone();
        g.layers.iter_mut().flatten().for_each(|x| *x *= s);
        g
    }

    /// Pointwise right multiplication of every layer by a constant matrix.
    pub fn mul_right(&self, m: &CMatrix) -> Result<GridFunction> {
        if m.nrows() != self.cols {
            return Err(Error::Usage("shape mismatch in mul_right".into()));
        }
        let mut g = GridFunction::zeros(self.grid, self.rows, m.ncols(), self.order());
        for j in 0..=self.order() {
            for i in 0..self.grid.len() {
                g.set(j, i, &(self.at(j, i) * m));
            }
        }
        Ok(g)
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().flatten().all(|z| z.is_finite())
    }
}

/// Matrix of expressions; vectors are single-column matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Expr>,
}

impl ExprMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Expr>) -> Result<Self> {
        if entries.len() != rows * cols || rows == 0 || cols == 0 {
            return Err(Error::Usage(format!(
                "{} entries do not form a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(ExprMatrix { rows, cols, entries })
    }

    pub fn from_rows(rows: Vec<Vec<Expr>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Usage("ragged expression matrix".into()));
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn column(entries: Vec<Expr>) -> Result<Self> {
        let n = entries.len();
        Self::new(n, 1, entries)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExprMatrix {
            rows,
            cols,
            entries: vec![Expr::zero(); rows * cols],
        }
    }

    pub fn identity(m: usize) -> Self {
        let entries = (0..m * m)
            .map(|k| if k / m == k % m { Expr::one() } else { Expr::zero() })
            .collect();
        ExprMatrix { rows: m, cols: m, entries }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, r: usize, c: usize) -> &Expr {
        &self.entries[r * self.cols + c]
    }

    pub fn entries(&self) -> &[Expr] {
        &self.entries
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> ExprMatrix {
        ExprMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn zip_with(&self, other: &ExprMatrix, f: impl Fn(&Expr, &Expr) -> Expr) -> Result<ExprMatrix> {
        if self.shape() != other.shape() {
            return Err(Error::Usage("shape mismatch".into()));
        }
        Ok(ExprMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn differentiate(&self, var: Var) -> ExprMatrix {
        self.map(|e| e.differentiate(var))
    }

    pub fn substitute_eps(&self, eps: f64) -> ExprMatrix {
        self.map(|e| e.substitute_eps(eps))
    }

    pub fn depends_on(&self, var: Var) -> bool {
        self.entries.iter().any(|e| e.depends_on(var))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Expr::is_zero)
    }

    pub fn eval(&self, t: f64, eps: f64) -> CMatrix {
        DMatrix::from_row_iterator(self.rows, self.cols, self.entries.iter().map(|e| e.eval(t, eps)))
    }

    /// Evaluates into `out` (row-major), used by integrators to avoid allocation.
    pub(crate) fn eval_into(&self, t: f64, eps: f64, out: &mut [Complex64]) {
        for (o, e) in out.iter_mut().zip(&self.entries) {
            *o = e.eval(t, eps);
        }
    }

    /// Samples `(d/dt)^j self` at every grid point for `j <= order`.
    pub fn sample(&self, grid: &Grid, order: usize, eps: f64) -> Result<GridFunction> {
        let mut g = GridFunction::zeros(*grid, self.rows, self.cols, order);
        let mut deriv = self.clone();
        for j in 0..=order {
            if j > 0 {
                deriv = deriv.differentiate(Var::T);
            }
            let block = self.rows * self.cols;
            let layer = g.layer_mut(j);
            for i in 0..grid.len() {
                let t = grid.t(i);
                for (k, e) in deriv.entries.iter().enumerate() {
                    let v = e.eval(t, eps);
                    if !v.is_finite() {
                        return Err(Error::Domain { what: e.to_string(), t });
                    }
                    layer[i * block + k] = v;
                }
            }
        }
        Ok(g)
    }
}

/// Samples a single expression as a `1 x 1` grid function.
pub fn sample(e: &Expr, grid: &Grid, order: usize, eps: f64) -> Result<GridFunction> {
    ExprMatrix::new(1, 1, vec![e.clone()])?.sample(grid, order, eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Grid {
        Grid::new(Interval::new(0.0, 1.0).unwrap(), 4).unwrap()
    }

    #[test]
    fn samples_t_squared() {
        let e = parse_expr("t^2").unwrap();
        let g = sample(&e, &unit(), 1, 0.0).unwrap();
        let v0: Vec<f64> = g.component(0, 0, 0).map(|z| z.re).collect();
        let v1: Vec<f64> = g.component(1, 0, 0).map(|z| z.re).collect();
        assert_eq!(v0, vec![0.0, 1.0 / 16.0, 0.25, 9.0 / 16.0, 1.0]);
        assert_eq!(v1, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn zero_matrix_samples_to_zero() {
        let g = ExprMatrix::zeros(2, 3).sample(&unit(), 2, 0.0).unwrap();
        assert!(g.layer(0).iter().chain(g.layer(2)).all(|z| z.norm() == 0.0));
        assert_eq!(g.shape(), (2, 3));
    }

    #[test]
    fn exp_layers_coincide() {
        let grid = Grid::new(Interval::new(0.0, 1.0).unwrap(), 50).unwrap();
        let g = sample(&parse_expr("exp(t)").unwrap(), &grid, 3, 0.0).unwrap();
        for j in 0..=3 {
            for (i, z) in g.component(j, 0, 0).enumerate() {
                let exact = grid.t(i).exp();
                assert!((z.re - exact).abs() / exact <= 1e-12);
            }
        }
    }

    #[test]
    fn non_finite_sample_is_domain_error() {
        let e = parse_expr("1/t").unwrap();
        assert!(matches!(sample(&e, &unit(), 0, 0.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn first_layer_equals_sampled_derivative() {
        let e = parse_expr("sin(3*t)*exp(t) + t^3").unwrap();
        let grid = Grid::new(Interval::new(-1.0, 2.0).unwrap(), 37).unwrap();
        let g = sample(&e, &grid, 1, 0.0).unwrap();
        let d = sample(&e.differentiate(Var::T), &grid, 0, 0.0).unwrap();
        assert_eq!(g.layer(1), d.layer(0));
    }

    #[test]
    fn grid_indexing() {
        let grid = unit();
        assert_eq!(grid.t(4), 1.0);
        assert_eq!(grid.index_of(0.5), Some(2));
        assert_eq!(grid.index_of(0.3), None);
        assert_eq!(grid.nearest_index(0.3), 1);
        assert!(Grid::new(Interval::new(0.0, 1.0).unwrap(), 1).is_err());
        assert!(Interval::new(1.0, 1.0).is_err());
    }
}
