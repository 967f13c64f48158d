//! Discrete Hölder norms on grid functions.
//!
//! For a scalar function `x` on `[a, b]`:
//!
//! ```text
//! ‖x‖_l      = Σ_{j=0}^{l} max_t |x^{(j)}(t)|
//! ‖x‖'_α     = sup_{t1 ≠ t2} |x(t2) - x(t1)| / |t2 - t1|^α
//! ‖x‖_{l,α}  = ‖x‖_l + ‖x^{(l)}‖'_α        (α > 0)
//! ‖x‖_{l,0}  = ‖x‖_l
//! ```
//!
//! Vector and matrix functions take the sum over components. Maxima and
//! suprema run over grid points (and grid pairs), which makes these the
//! reference norms for every convergence statement in the crate.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::funcspace::GridFunction;

/// Derivative order `l` and Hölder exponent `alpha ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderParams {
    pub l: usize,
    pub alpha: f64,
}

impl HolderParams {
    pub fn new(l: usize, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Usage(format!("Hölder exponent {alpha} outside [0, 1]")));
        }
        Ok(HolderParams { l, alpha })
    }
}

pub fn sup_norm(g: &GridFunction, l: usize) -> Result<f64> {
    g.require_order(l)?;
    let (rows, cols) = g.shape();
    let mut total = 0.0;
    for j in 0..=l {
        for r in 0..rows {
            for c in 0..cols {
                total += g.component(j, r, c).map(|z| z.norm()).fold(0.0, f64::max);
            }
        }
    }
    Ok(total)
}

/// Largest difference quotient of one component over all grid pairs.
///
/// `dist_pow[d]` holds `(d h)^α`.
fn component_seminorm(values: &[Complex64], dist_pow: &[f64]) -> f64 {
    let n = values.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let vi = values[i];
            let mut best = 0.0f64;
            for k in i + 1..n {
                let q = (values[k] - vi).norm() / dist_pow[k - i];
                if q > best {
                    best = q;
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

pub fn holder_seminorm(g: &GridFunction, l: usize, alpha: f64) -> Result<f64> {
    if alpha == 0.0 {
        return Err(Error::Usage(
            "Hölder seminorm is undefined for alpha = 0".into(),
        ));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Usage(format!("Hölder exponent {alpha} outside (0, 1]")));
    }
    g.require_order(l)?;
    let grid = g.grid();
    let h = grid.step();
    let dist_pow: Vec<f64> = (0..grid.len()).map(|d| (d as f64 * h).powf(alpha)).collect();
    let (rows, cols) = g.shape();
    let mut total = 0.0;
    for r in 0..rows {
        for c in 0..cols {
            let values: Vec<Complex64> = g.component(l, r, c).collect();
            total += component_seminorm(&values, &dist_pow);
        }
    }
    Ok(total)
}

pub fn holder_norm(g: &GridFunction, p: HolderParams) -> Result<f64> {
    let sup = sup_norm(g, p.l)?;
    if p.alpha > 0.0 {
        Ok(sup + holder_seminorm(g, p.l, p.alpha)?)
    } else {
        Ok(sup)
    }
}

/// Norm of a constant vector or matrix: sum of component moduli.
pub fn component_sum(m: &crate::CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{parse_expr, sample, Grid, Interval};

    fn on(src: &str, a: f64, b: f64, n: usize, order: usize) -> GridFunction {
        let grid = Grid::new(Interval::new(a, b).unwrap(), n).unwrap();
        sample(&parse_expr(src).unwrap(), &grid, order, 0.0).unwrap()
    }

    #[test]
    fn sup_norm_examples() {
        assert_eq!(sup_norm(&on("5", 0.0, 1.0, 10, 0), 0).unwrap(), 5.0);
        assert_eq!(sup_norm(&on("t", 0.0, 1.0, 10, 1), 1).unwrap(), 2.0);
        let s = sup_norm(&on("sin(t)", 0.0, std::f64::consts::PI, 2000, 2), 2).unwrap();
        assert!((s - 3.0).abs() <= 1e-5);
    }

    #[test]
    fn seminorm_examples() {
        assert_eq!(holder_seminorm(&on("7", 0.0, 1.0, 50, 2), 2, 0.3).unwrap(), 0.0);
        let lip = holder_seminorm(&on("t", 0.0, 1.0, 50, 0), 0, 1.0).unwrap();
        assert!((lip - 1.0).abs() < 1e-12);
    }

    #[test]
    fn seminorm_of_t_squared_matches_pair_search() {
        let n = 100;
        let g = on("t^2", 0.0, 1.0, n, 0);
        // exhaustive pair search on exact values
        let mut oracle = 0.0f64;
        for i in 0..=n {
            for k in i + 1..=n {
                let (s, t) = (i as f64 / n as f64, k as f64 / n as f64);
                oracle = oracle.max((t * t - s * s).abs() / (t - s));
            }
        }
        let v = holder_seminorm(&g, 0, 1.0).unwrap();
        assert!((v - oracle).abs() < 1e-12);
        assert!(v >= 2.0 - 2.0 / n as f64 && v <= 2.0 + 1e-12);
    }

    #[test]
    fn alpha_zero_is_usage_error_for_seminorm_only() {
        let g = on("t", 0.0, 1.0, 10, 1);
        assert!(matches!(holder_seminorm(&g, 0, 0.0), Err(Error::Usage(_))));
        let p = HolderParams::new(1, 0.0).unwrap();
        assert_eq!(holder_norm(&g, p).unwrap(), sup_norm(&g, 1).unwrap());
    }

    #[test]
    fn order_too_small() {
        let g = on("t", 0.0, 1.0, 10, 0);
        assert!(matches!(sup_norm(&g, 1), Err(Error::Order { needed: 1, have: 0 })));
    }

    #[test]
    fn identity_norm_with_lipschitz_term() {
        let g = on("t", 0.0, 1.0, 10, 0);
        let v = holder_norm(&g, HolderParams::new(0, 1.0).unwrap()).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exp_norm_against_dense_grid() {
        let p = HolderParams::new(1, 0.5).unwrap();
        let dense = holder_norm(&on("exp(t)", 0.0, 1.0, 5000, 1), p).unwrap();
        let coarse = holder_norm(&on("exp(t)", 0.0, 1.0, 1000, 1), p).unwrap();
        assert!((coarse - dense).abs() / dense <= 1e-3);
        let e = std::f64::consts::E;
        assert!(dense > 2.0 * e);
    }
}
