//! Problems depending on a parameter `eps ∈ [0, eps0)` and the numerical
//! checks around `eps → 0+`:
//!
//! * limit conditions: `A(eps) → A(0)` in `C^{n,α}`, `B(eps) y → B(0) y`
//!   for every `y` (tested on a fixed probe set), `f(eps) → f(0)` in
//!   `C^{n,α}`, `q(eps) → q(0)`;
//! * the limit problem has only the trivial homogeneous solution;
//! * for `α = 0`, the measure conditions (convergent `β_k`, bounded variation,
//!   convergent endpoint value and primitive of `Φ`) and the much stronger
//!   variation condition `V(Φ(eps) - Φ(0)) → 0`;
//! * the convergence study: `‖y(eps) - y(0)‖_{n+1,α}` against the discrepancy
//!   of `y(0)` in the `eps`-problem.
//!
//! "Converges" on a finite list means: the last distance is at most `tol` and
//! the last three distances do not increase (up to a roundoff floor of
//! `1e-12`).

use rayon::prelude::*;

use crate::boundary::{BoundaryOperator, Jump, StieltjesMeasure};
use crate::bvp_solver::{instance_matriciant, is_wellposed, solve, ProblemInstance, SolverOptions};
use crate::error::{Error, Result};
use crate::funcspace::{parse_expr, Expr, ExprMatrix, Grid, GridFunction, Interval, Var};
use crate::holder::{component_sum, holder_norm, HolderParams};
use crate::ode_core::product_layer;
use crate::{CMatrix, Complex64};

#[derive(Debug, Clone, PartialEq)]
pub struct JumpTemplate {
    /// Location as an expression in `eps`.
    pub location: Expr,
    pub matrix: ExprMatrix,
}

/// Boundary data as functions of `eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTemplate {
    pub betas: Vec<ExprMatrix>,
    pub jumps: Vec<JumpTemplate>,
    pub density: Option<ExprMatrix>,
}

/// Replacement data for `eps = 0`, for families whose coefficients have no
/// pointwise value there (e.g. `sin(t/eps)`). Absent fields fall back to
/// substituting `eps = 0`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LimitOverrides {
    pub a: Option<ExprMatrix>,
    pub f: Option<ExprMatrix>,
    pub q: Option<ExprMatrix>,
    pub betas: Option<Vec<ExprMatrix>>,
    pub jumps: Option<Vec<JumpTemplate>>,
    pub density: Option<ExprMatrix>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFamily {
    pub interval: Interval,
    pub n: usize,
    pub alpha: f64,
    pub m: usize,
    pub eps0: f64,
    pub a: ExprMatrix,
    pub f: ExprMatrix,
    pub boundary: BoundaryTemplate,
    pub q: ExprMatrix,
    pub limit: LimitOverrides,
}

fn eval_constant(e: &ExprMatrix, a: f64, eps: f64, block: &str) -> Result<CMatrix> {
    let v = e.eval(a, eps);
    if v.iter().any(|z| !z.is_finite()) {
        return Err(Error::Domain { what: format!("{block} at eps = {eps}"), t: a });
    }
    Ok(v)
}

impl ProblemFamily {
    /// The instance at `eps` (`eps = 0` is the limit problem).
    pub fn instantiate(&self, eps: f64) -> Result<ProblemInstance> {
        if !(eps >= 0.0 && eps < self.eps0) {
            return Err(Error::Usage(format!("eps = {eps} outside [0, {})", self.eps0)));
        }
        let at_limit = eps == 0.0;
        let pick = |over: &Option<ExprMatrix>, base: &ExprMatrix| -> ExprMatrix {
            match over {
                Some(o) if at_limit => o.clone(),
                _ => base.clone(),
            }
        };
        let a = pick(&self.limit.a, &self.a).substitute_eps(eps);
        let f = pick(&self.limit.f, &self.f).substitute_eps(eps);
        let q = eval_constant(&pick(&self.limit.q, &self.q), self.interval.a(), eps, "q")?;
        let betas_src = match &self.limit.betas {
            Some(b) if at_limit => b,
            _ => &self.boundary.betas,
        };
        let betas = betas_src
            .iter()
            .enumerate()
            .map(|(k, b)| eval_constant(b, self.interval.a(), eps, &format!("boundary.betas[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        let jumps_src = match &self.limit.jumps {
            Some(j) if at_limit => j,
            _ => &self.boundary.jumps,
        };
        let jumps = jumps_src
            .iter()
            .enumerate()
            .map(|(k, j)| {
                let block = format!("boundary.jumps[{k}]");
                let location = j.location.eval(self.interval.a(), eps);
                if !location.is_finite() || location.im != 0.0 {
                    return Err(Error::Domain { what: format!("{block}.location"), t: eps });
                }
                Ok(Jump { location: location.re, matrix: eval_constant(&j.matrix, self.interval.a(), eps, &block)? })
            })
            .collect::<Result<Vec<_>>>()?;
        let density = match (&self.limit.density, &self.boundary.density) {
            (Some(o), _) if at_limit => Some(o.clone()),
            (_, d) => d.clone(),
        }
        .map(|d| d.substitute_eps(eps))
        .filter(|d| !d.is_zero());
        let boundary = BoundaryOperator::new(betas, StieltjesMeasure { jumps, density }, self.m, self.interval)?;
        let mut inst = ProblemInstance::new(self.interval, self.n, self.alpha, a, f, boundary, q)?;
        inst.eps = Some(eps);
        Ok(inst)
    }

    pub fn limit_instance(&self) -> Result<ProblemInstance> {
        self.instantiate(0.0)
    }

    /// Whether any datum depends on `eps`.
    pub fn depends_on_eps(&self) -> bool {
        let b = &self.boundary;
        self.a.depends_on(Var::Eps)
            || self.f.depends_on(Var::Eps)
            || self.q.depends_on(Var::Eps)
            || b.betas.iter().any(|m| m.depends_on(Var::Eps))
            || b.jumps.iter().any(|j| j.location.depends_on(Var::Eps) || j.matrix.depends_on(Var::Eps))
            || b.density.as_ref().is_some_and(|d| d.depends_on(Var::Eps))
    }

    fn holder(&self, l: usize) -> HolderParams {
        HolderParams { l, alpha: self.alpha }
    }
}

/// Default parameter list `0.1 · 2^{-k}`, `k = 0..=5`.
pub fn default_eps_list() -> Vec<f64> {
    (0..=5).map(|k| 0.1 * 0.5f64.powi(k)).collect()
}

fn validate_eps_list(eps: &[f64], eps0: f64) -> Result<()> {
    if eps.is_empty() {
        return Err(Error::Usage("empty eps list".into()));
    }
    if eps.iter().any(|&e| !(e > 0.0 && e < eps0)) {
        return Err(Error::Usage(format!("eps values must lie in (0, {eps0})")));
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Usage("eps list must be strictly decreasing".into()));
    }
    Ok(())
}

const ROUNDOFF_FLOOR: f64 = 1e-12;

/// Last entry `<= tol` and the last three entries non-increasing.
pub fn converges(distances: &[f64], tol: f64) -> bool {
    let Some(&last) = distances.last() else { return false };
    let tail = &distances[distances.len().saturating_sub(3)..];
    last <= tol && tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + ROUNDOFF_FLOOR)
}

/// One condition evaluated along the eps list.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub holds: bool,
    pub distances: Vec<f64>,
}

impl ConditionCheck {
    fn convergence(distances: Vec<f64>, tol: f64) -> Self {
        ConditionCheck { holds: converges(&distances, tol), distances }
    }
}

#[derive(Debug, Clone)]
pub struct LimitConditionsReport {
    pub eps: Vec<f64>,
    /// Coefficient, `‖A(eps) - A(0)‖_{n,α}`.
    pub coefficient: ConditionCheck,
    /// Boundary operator, largest `|B(eps) y - B(0) y|` over the probes.
    pub boundary: ConditionCheck,
    /// Right-hand side, `‖f(eps) - f(0)‖_{n,α}`.
    pub rhs: ConditionCheck,
    /// Boundary data, `|q(eps) - q(0)|`.
    pub data: ConditionCheck,
}

impl LimitConditionsReport {
    pub fn all_hold(&self) -> bool {
        self.coefficient.holds && self.boundary.holds && self.rhs.holds && self.data.holds
    }
}

/// Scalar profiles of the fixed probe set, written in the normalized
/// variable `t ↦ (t - a)/(b - a)`.
const PROBE_PROFILES: [&str; 9] = [
    "1",
    "t",
    "t^2",
    "t^3",
    "sin(3*t)",
    "cos(2*t)",
    "exp(t)",
    "t*exp(-2*t)",
    "sin(7*t)^2",
];

/// The twelve probe functions for the boundary operator condition: nine smooth
/// profiles times fixed directions, and three combinations of the limit
/// matriciant's columns.
pub fn probe_functions(limit: &ProblemInstance, grid: &Grid, opts: &SolverOptions) -> Result<Vec<GridFunction>> {
    let m = limit.m();
    let order = limit.n + 1;
    let interval = limit.interval;
    let s = Expr::t()
        .sub(&Expr::constant(interval.a()))
        .div(&Expr::constant(interval.length()));
    let mut probes = Vec::with_capacity(12);
    for (k, src) in PROBE_PROFILES.iter().enumerate() {
        let profile = parse_expr(src).expect("probe profile parses").compose_t(&s);
        let entries = (0..m)
            .map(|r| {
                let w = if r == k % m {
                    1.0
                } else if m > 1 && r == (k + 1) % m {
                    0.5
                } else {
                    0.0
                };
                profile.mul(&Expr::constant(w))
            })
            .collect();
        probes.push(ExprMatrix::column(entries)?.sample(grid, order, 0.0)?);
    }
    let y = instance_matriciant(limit, &SolverOptions { grid: grid.subintervals(), ..*opts })?;
    let directions: [Vec<f64>; 3] = [
        vec![1.0; m],
        (0..m).map(|r| if r == 0 { 1.0 } else { 0.0 }).collect(),
        (0..m).map(|r| if r % 2 == 0 { 1.0 } else { -1.0 }).collect(),
    ];
    for d in directions {
        let v = CMatrix::from_iterator(m, 1, d.into_iter().map(|x| Complex64::new(x, 0.0)));
        probes.push(y.values().mul_right(&v)?);
    }
    Ok(probes)
}

pub fn check_limit_conditions(
    fam: &ProblemFamily,
    eps_list: &[f64],
    tol: f64,
    opts: &SolverOptions,
) -> Result<LimitConditionsReport> {
    validate_eps_list(eps_list, fam.eps0)?;
    let limit = fam.limit_instance()?;
    let grid = limit.grid(opts.grid)?;
    let (a0, f0) = limit.sample_data(&grid)?;
    let probes = probe_functions(&limit, &grid, opts)?;
    let b0: Vec<CMatrix> = probes.iter().map(|p| limit.boundary.apply(p)).collect::<Result<_>>()?;
    let p_n = fam.holder(fam.n);

    let rows: Vec<Result<[f64; 4]>> = eps_list
        .par_iter()
        .map(|&eps| {
            let inst = fam.instantiate(eps)?;
            let (a, f) = inst.sample_data(&grid)?;
            let da = holder_norm(&a.sub(&a0)?, p_n)?;
            let df = holder_norm(&f.sub(&f0)?, p_n)?;
            let dq = component_sum(&(&inst.q - &limit.q));
            let mut db = 0.0f64;
            for (p, base) in probes.iter().zip(&b0) {
                db = db.max(component_sum(&(inst.boundary.apply(p)? - base)));
            }
            Ok([da, db, df, dq])
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let column = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<_>>();
    let boundary = column(1);
    Ok(LimitConditionsReport {
        eps: eps_list.to_vec(),
        coefficient: ConditionCheck::convergence(column(0), tol),
        boundary: ConditionCheck { holds: boundary.last().is_some_and(|&d| d <= tol), distances: boundary },
        rhs: ConditionCheck::convergence(column(2), tol),
        data: ConditionCheck::convergence(column(3), tol),
    })
}

/// Whether the limit problem is uniquely solvable.
pub fn check_condition_zero(fam: &ProblemFamily, opts: &SolverOptions) -> Result<bool> {
    Ok(is_wellposed(&fam.limit_instance()?, opts)?.kernel_dim == 0)
}

#[derive(Debug, Clone)]
pub struct MeasureConditionsReport {
    pub eps: Vec<f64>,
    /// `max_k |β_k(eps) - β_k(0)|`.
    pub betas: ConditionCheck,
    /// `V_a^b Φ(eps)`; holds when it stays bounded (see `variation_bound`).
    pub variation: ConditionCheck,
    /// Largest variation seen, including `eps = 0`.
    pub variation_bound: f64,
    /// `|Φ(b, eps) - Φ(b, 0)|`.
    pub endpoint: ConditionCheck,
    /// Largest `|∫_a^t Φ(eps) - ∫_a^t Φ(0)|` over ten points `t`.
    pub integral: ConditionCheck,
    /// Norm convergence: `V_a^b (Φ(eps) - Φ(0))`.
    pub norm_convergence: ConditionCheck,
}

impl MeasureConditionsReport {
    /// The four measure conditions together, i.e. strong convergence of the
    /// boundary operators.
    pub fn strong_convergence(&self) -> bool {
        self.betas.holds && self.variation.holds && self.endpoint.holds && self.integral.holds
    }
}

/// Measure conditions and the variation condition, for `α = 0`.
///
/// Integrals use a grid of at least `opts.grid` subintervals, rounded up to a
/// multiple of ten so that the sample points `a + k(b - a)/10` are nodes.
pub fn check_measure_conditions(
    fam: &ProblemFamily,
    eps_list: &[f64],
    tol: f64,
    opts: &SolverOptions,
) -> Result<MeasureConditionsReport> {
    if fam.alpha != 0.0 {
        return Err(Error::Usage("measure conditions are stated for alpha = 0 only".into()));
    }
    validate_eps_list(eps_list, fam.eps0)?;
    let n_sub = opts.grid.div_ceil(10).max(1) * 10;
    let grid = Grid::new(fam.interval, n_sub)?;
    let m = fam.m;
    let limit = fam.limit_instance()?;
    let (phi0, int0) = limit.boundary.phi.primitives(&grid, m)?;
    let tv0 = limit.boundary.phi.total_variation(fam.interval, n_sub)?;
    let samples: Vec<usize> = (1..=10).map(|k| k * n_sub / 10).collect();

    let rows: Vec<Result<[f64; 5]>> = eps_list
        .par_iter()
        .map(|&eps| {
            let inst = fam.instantiate(eps)?;
            let b = &inst.boundary;
            let dbeta = b
                .betas
                .iter()
                .zip(&limit.boundary.betas)
                .map(|(x, y)| component_sum(&(x - y)))
                .fold(0.0, f64::max);
            let tv = b.phi.total_variation(fam.interval, n_sub)?;
            let (phi, int) = b.phi.primitives(&grid, m)?;
            let dend = component_sum(&(&phi[n_sub] - &phi0[n_sub]));
            let dint = samples
                .iter()
                .map(|&i| component_sum(&(&int[i] - &int0[i])))
                .fold(0.0, f64::max);
            let dvar = b.phi.variation_of_difference(&limit.boundary.phi, fam.interval, n_sub)?;
            Ok([dbeta, tv, dend, dint, dvar])
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let column = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<_>>();
    let tvs = column(1);
    let first = tvs[0].max(tv0);
    let variation_bound = tvs.iter().copied().fold(tv0, f64::max);
    let bounded = tvs.last().is_some_and(|&last| last <= 2.0 * first + tol);
    Ok(MeasureConditionsReport {
        eps: eps_list.to_vec(),
        betas: ConditionCheck::convergence(column(0), tol),
        variation: ConditionCheck { holds: bounded, distances: tvs },
        variation_bound,
        endpoint: ConditionCheck::convergence(column(2), tol),
        integral: ConditionCheck::convergence(column(3), tol),
        norm_convergence: ConditionCheck::convergence(column(4), tol),
    })
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub eps: Vec<f64>,
    /// `‖y(eps) - y(0)‖_{n+1,α}`.
    pub errors: Vec<f64>,
    /// `‖L(eps) y(0) - f(eps)‖_{n,α}`.
    pub eq_discrepancies: Vec<f64>,
    /// `|B(eps) y(0) - q(eps)|`.
    pub bc_discrepancies: Vec<f64>,
    /// `error / discrepancy`; `None` where both vanish.
    pub ratios: Vec<Option<f64>>,
    pub ratio_lo: Option<f64>,
    pub ratio_hi: Option<f64>,
    /// Last error `<= tol` with a non-increasing tail.
    pub converged: bool,
    /// Every error and discrepancy is exactly zero.
    pub exact_match: bool,
    /// Largest eps from which on every error in the list is `<= tol`.
    pub largest_verified_eps: Option<f64>,
}

impl ConvergenceReport {
    pub fn discrepancy(&self, k: usize) -> f64 {
        self.eq_discrepancies[k] + self.bc_discrepancies[k]
    }
}

/// Discrepancy of the limit solution in the `eps`-problem.
///
/// With `y0` solving the limit problem, `L(eps) y0 - f(eps)` equals
/// `(A(eps) - A(0)) y0 - (f(eps) - f(0))` and `B(eps) y0 - q(eps)` equals
/// `(B(eps) - B(0)) y0 - (q(eps) - q(0))`; the difference form is used so that
/// the discretization residual of `y0` does not enter.
pub fn discrepancy_of_limit_solution(
    inst: &ProblemInstance,
    limit: &ProblemInstance,
    y0: &GridFunction,
) -> Result<(f64, f64)> {
    let grid = *y0.grid();
    let n = inst.n;
    let (a, f) = inst.sample_data(&grid)?;
    let (a0, f0) = limit.sample_data(&grid)?;
    let da = a.sub(&a0)?;
    let df = f.sub(&f0)?;
    let m = inst.m();
    let mut r = GridFunction::zeros(grid, m, 1, n);
    for j in 0..=n {
        for i in 0..grid.len() {
            r.set(j, i, &(product_layer(&da, y0, j, i) - df.at(j, i)));
        }
    }
    let eq = holder_norm(&r, HolderParams { l: n, alpha: inst.alpha })?;
    let bc = component_sum(
        &(inst.boundary.apply(y0)? - limit.boundary.apply(y0)? - (&inst.q - &limit.q)),
    );
    Ok((eq, bc))
}

/// Solves the limit problem and every `eps`-problem and compares them.
pub fn convergence_study(
    fam: &ProblemFamily,
    eps_list: &[f64],
    tol: f64,
    opts: &SolverOptions,
) -> Result<ConvergenceReport> {
    validate_eps_list(eps_list, fam.eps0)?;
    let limit = fam.limit_instance()?;
    let wp = is_wellposed(&limit, opts)?;
    if !wp.wellposed {
        return Err(Error::ConditionZero { kernel_dim: wp.kernel_dim });
    }
    let y0 = solve(&limit, opts)?.y;
    let p = fam.holder(fam.n + 1);

    let rows: Vec<Result<(f64, f64, f64)>> = eps_list
        .par_iter()
        .map(|&eps| {
            let inst = fam.instantiate(eps)?;
            let y = solve(&inst, opts)?.y;
            let error = holder_norm(&y.sub(&y0)?, p)?;
            let (eq, bc) = discrepancy_of_limit_solution(&inst, &limit, &y0)?;
            Ok((error, eq, bc))
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;

    let errors: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let eq: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let bc: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let ratios: Vec<Option<f64>> = rows
        .iter()
        .map(|&(e, q, b)| {
            let d = q + b;
            if d == 0.0 && e == 0.0 {
                None
            } else {
                Some(e / d)
            }
        })
        .collect();
    let defined: Vec<f64> = ratios.iter().flatten().copied().collect();
    let ratio_lo = defined.iter().copied().reduce(f64::min);
    let ratio_hi = defined.iter().copied().reduce(f64::max);
    let exact_match = rows.iter().all(|&(e, q, b)| e == 0.0 && q == 0.0 && b == 0.0);
    let mut largest_verified_eps = None;
    for (k, &e) in eps_list.iter().enumerate().rev() {
        if errors[k] <= tol {
            largest_verified_eps = Some(e);
        } else {
            break;
        }
    }
    Ok(ConvergenceReport {
        eps: eps_list.to_vec(),
        converged: converges(&errors, tol),
        errors,
        eq_discrepancies: eq,
        bc_discrepancies: bc,
        ratios,
        ratio_lo,
        ratio_hi,
        exact_match,
        largest_verified_eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem_file::parse_problem_str;

    fn scalar(a: &str, f: &str, q: &str, boundary: &str, limit: &str) -> ProblemFamily {
        let src = format!(
            "eps0 = 0.2\nA = [[\"{a}\"]]\nf = [\"{f}\"]\nq = [\"{q}\"]\n\n[interval]\na = 0.0\nb = 1.0\n\n\
             [space]\nn = 0\nalpha = 0.0\nm = 1\n\n[boundary]\n{boundary}\n{limit}"
        );
        parse_problem_str(&src).unwrap().into_family()
    }

    fn cauchy(a: &str) -> ProblemFamily {
        scalar(a, "0", "1", "betas = [[[\"1\"]]]", "")
    }

    fn periodic(a: &str) -> ProblemFamily {
        // z(0) - z(1) = -∫ z'
        scalar(a, "0", "0", "betas = [[[\"0\"]]]\ndensity = [[\"-1\"]]", "")
    }

    fn opts() -> SolverOptions {
        SolverOptions { grid: 400, ..SolverOptions::default() }
    }

    #[test]
    fn converges_needs_small_last_and_monotone_tail() {
        assert!(converges(&[3.0, 1.0, 0.5, 0.1], 0.2));
        assert!(!converges(&[0.01, 0.1, 0.05], 0.2));
        assert!(!converges(&[0.5, 0.4, 0.3], 0.2));
        assert!(!converges(&[], 1.0));
        assert!(converges(&[1e-17, 3e-16, 2e-16], 0.0 + 1e-15));
        assert_eq!(default_eps_list(), vec![0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003125]);
    }

    #[test]
    fn eps_list_is_validated() {
        let fam = cauchy("1");
        for bad in [&[][..], &[0.1, 0.2], &[0.5], &[0.1, 0.0]] {
            assert!(matches!(check_limit_conditions(&fam, bad, 1e-3, &opts()), Err(Error::Usage(_))));
        }
    }

    #[test]
    fn eps_independent_family_is_exact() {
        let fam = cauchy("1 + t");
        let eps = default_eps_list();
        let report = check_limit_conditions(&fam, &eps, 0.0, &opts()).unwrap();
        assert!(report.all_hold());
        for c in [&report.coefficient, &report.boundary, &report.rhs, &report.data] {
            assert!(c.distances.iter().all(|&d| d == 0.0));
        }
        let study = convergence_study(&fam, &eps, 0.0, &opts()).unwrap();
        assert!(study.exact_match && study.converged);
        assert!(study.ratios.iter().all(Option::is_none));
        assert_eq!(study.largest_verified_eps, Some(0.1));
        let measure = check_measure_conditions(&fam, &eps, 0.0, &opts()).unwrap();
        assert!(measure.strong_convergence() && measure.norm_convergence.holds);
    }

    #[test]
    fn linear_perturbation_has_linear_distance() {
        // ‖t‖_{0,0} = 1 on [0, 1]
        let fam = cauchy("1 + eps*t");
        let eps = default_eps_list();
        let report = check_limit_conditions(&fam, &eps, 1e-2, &opts()).unwrap();
        assert!(report.coefficient.holds);
        for (e, d) in eps.iter().zip(&report.coefficient.distances) {
            assert!((d / e - 1.0).abs() < 0.05, "{d} at {e}");
        }
    }

    #[test]
    fn oscillatory_coefficient_fails_condition_one() {
        let fam = scalar("sin(t/eps)", "0", "1", "betas = [[[\"1\"]]]", "[limit]\nA = [[\"0\"]]\n");
        let report = check_limit_conditions(&fam, &default_eps_list(), 1e-3, &SolverOptions::default()).unwrap();
        assert!(!report.coefficient.holds);
        assert!(report.coefficient.distances.iter().all(|&d| d >= 0.5));
        assert!(report.boundary.holds && report.rhs.holds && report.data.holds);
    }

    #[test]
    fn condition_zero_cases() {
        assert!(check_condition_zero(&cauchy("1"), &opts()).unwrap());
        assert!(!check_condition_zero(&periodic("0"), &opts()).unwrap());
        assert!(check_condition_zero(&periodic("1"), &opts()).unwrap());
        let err = convergence_study(&periodic("0"), &[0.1], 1e-3, &opts()).unwrap_err();
        assert_eq!(err, Error::ConditionZero { kernel_dim: 1 });
    }

    #[test]
    fn oscillating_density_is_strong_not_norm_convergent() {
        let fam = scalar("1", "0", "1", "betas = [[[\"1\"]]]\ndensity = [[\"cos(t/eps)\"]]", "[limit]\ndensity = [[\"0\"]]\n");
        let r = check_measure_conditions(&fam, &default_eps_list(), 1e-3, &SolverOptions { grid: 8000, ..SolverOptions::default() })
            .unwrap();
        assert!(r.betas.holds && r.variation.holds && r.integral.holds);
        assert!(r.variation_bound <= 1.0);
        assert!(!r.norm_convergence.holds);
        assert!(r.norm_convergence.distances.iter().all(|&d| d >= 0.5));
    }

    #[test]
    fn drifting_jump() {
        let fam = scalar(
            "1",
            "0",
            "1",
            "betas = [[[\"1\"]]]\n\n[[boundary.jumps]]\nlocation = \"0.5 + eps\"\nmatrix = [[\"2\"]]",
            "",
        );
        let r = check_measure_conditions(&fam, &default_eps_list(), 1e-2, &opts()).unwrap();
        assert!(r.endpoint.holds && r.integral.holds && r.strong_convergence());
        assert!(r.endpoint.distances.iter().all(|&d| d == 0.0));
        assert!(!r.norm_convergence.holds);
        assert!(r.norm_convergence.distances.iter().all(|&d| (d - 4.0).abs() < 1e-12));
    }

    #[test]
    fn measure_conditions_need_alpha_zero() {
        let src = "A = [[\"1\"]]\nf = [\"0\"]\nq = [\"1\"]\n[interval]\na = 0.0\nb = 1.0\n[space]\nn = 0\nalpha = 0.5\nm = 1\n[boundary]\nbetas = [[[\"1\"]]]\n";
        let fam = parse_problem_str(src).unwrap().into_family();
        assert!(matches!(check_measure_conditions(&fam, &[0.1], 1e-3, &opts()), Err(Error::Usage(_))));
    }

    #[test]
    fn shifted_exponential_ratios_stay_in_window() {
        // y(eps) = exp(-(1 + eps) t), y(0) = exp(-t)
        let fam = cauchy("1 + eps");
        let eps = [0.1, 0.05, 0.025, 0.0125];
        let r = convergence_study(&fam, &eps, 1e-1, &SolverOptions::default()).unwrap();
        let oracle = |e: f64| {
            let h = 1e-4;
            let (mut d0, mut d1) = (0.0f64, 0.0f64);
            for k in 0..=10_000 {
                let t = k as f64 * h;
                let (u, v) = ((-(1.0 + e) * t).exp(), (-t).exp());
                d0 = d0.max((u - v).abs());
                d1 = d1.max(((1.0 + e) * u - v).abs());
            }
            d0 + d1
        };
        for (k, &e) in eps.iter().enumerate() {
            assert!((r.errors[k] - oracle(e)).abs() < 1e-6, "{} vs {}", r.errors[k], oracle(e));
            assert!((r.eq_discrepancies[k] - e).abs() < 1e-9);
            assert_eq!(r.bc_discrepancies[k], 0.0);
        }
        assert!(r.converged);
        let (lo, hi) = (r.ratio_lo.unwrap(), r.ratio_hi.unwrap());
        assert!(lo > 0.0 && hi / lo < 2.0);
    }
}
