use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use holderbvp::bvp_solver::DEFAULT_GRID;
use holderbvp::param_family::{
    check_condition_zero, check_limit_conditions, check_measure_conditions, convergence_study, default_eps_list,
    ConditionCheck,
};
use holderbvp::{
    holder_norm, is_wellposed, parse_problem_file, residual, solve, Complex64, HolderParams, ProblemFile,
    ProblemInstance, SolverOptions,
};

#[derive(Parser)]
#[command(name = "holderbvp", version, about = "Linear boundary-value problems in Hölder spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and write the solution with its derivatives as CSV.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Integrator tolerance.
        #[arg(long, default_value_t = holderbvp::bvp_solver::DEFAULT_TOL)]
        tol: f64,
        /// CSV output file (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report det[BY], its condition number and kernel dimension.
    Wellposed {
        #[command(flatten)]
        common: Common,
    },
    /// Check the limit conditions and run the convergence study of a family.
    Family {
        file: PathBuf,
        /// Decreasing parameter values, comma separated (default 0.1·2^-k, k = 0..5).
        #[arg(long, value_delimiter = ',')]
        eps_list: Option<Vec<f64>>,
        /// Threshold for the convergence verdicts.
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        /// Integrator tolerance.
        #[arg(long, default_value_t = holderbvp::bvp_solver::DEFAULT_TOL)]
        solver_tol: f64,
        /// Grid subintervals (default: the file's `grid`, else 1000).
        #[arg(long)]
        grid: Option<usize>,
        /// CSV output file (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the Hölder norms of A and f.
    Norms {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    file: PathBuf,
    /// Parameter value (0 selects the limit problem).
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    /// Grid subintervals (default: the file's `grid`, else 1000).
    #[arg(long)]
    grid: Option<usize>,
}

type AnyResult<T> = Result<T, Box<dyn std::error::Error>>;

fn load(path: &Path, grid: Option<usize>) -> AnyResult<(ProblemFile, usize)> {
    let file = parse_problem_file(path)?;
    let n = grid.or(file.grid()).unwrap_or(DEFAULT_GRID);
    Ok((file, n))
}

fn instance(common: &Common) -> AnyResult<(ProblemInstance, usize)> {
    let (file, grid) = load(&common.file, common.grid)?;
    Ok((file.family().instantiate(common.eps)?, grid))
}

fn complex(z: Complex64) -> String {
    if z.im < 0.0 || (z.im == 0.0 && z.im.is_sign_negative()) {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

fn list(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(", ")
}

/// CSV goes to `out` or to stdout; the summary then goes to whichever
/// stream is left free.
struct Output {
    csv: csv::Writer<Box<dyn Write>>,
    summary: Box<dyn Write>,
}

impl Output {
    fn new(out: Option<&Path>) -> AnyResult<Self> {
        Ok(match out {
            Some(p) => Output {
                csv: csv::Writer::from_writer(Box::new(File::create(p)?)),
                summary: Box::new(io::stdout()),
            },
            None => Output { csv: csv::Writer::from_writer(Box::new(io::stdout())), summary: Box::new(io::stderr()) },
        })
    }
}

fn run_solve(common: &Common, tol: f64, out: Option<&Path>) -> AnyResult<()> {
    let (prob, grid) = instance(common)?;
    let opts = SolverOptions { grid, tol, ..SolverOptions::default() };
    let sol = solve(&prob, &opts)?;
    let res = residual(&prob, &sol.y)?;
    let m = prob.m();
    let order = prob.n + 1;

    let mut o = Output::new(out)?;
    let mut header = vec!["t".to_string()];
    for k in 1..=m {
        for j in 0..=order {
            header.push(format!("y{k}_d{j}_re"));
            header.push(format!("y{k}_d{j}_im"));
        }
    }
    o.csv.write_record(&header)?;
    let g = *sol.y.grid();
    for i in 0..g.len() {
        let mut row = vec![g.t(i).to_string()];
        for k in 0..m {
            for j in 0..=order {
                let z = sol.y.value(j, i, k, 0);
                row.push(z.re.to_string());
                row.push(z.im.to_string());
            }
        }
        o.csv.write_record(&row)?;
    }
    o.csv.flush()?;
    writeln!(o.summary, "det[BY] = {}", complex(sol.det))?;
    writeln!(o.summary, "condition = {:e}", sol.condition)?;
    writeln!(o.summary, "eq_residual = {:e}", res.eq_residual)?;
    writeln!(o.summary, "bc_residual = {:e}", res.bc_residual)?;
    Ok(())
}

fn run_wellposed(common: &Common) -> AnyResult<()> {
    let (prob, grid) = instance(common)?;
    let w = is_wellposed(&prob, &SolverOptions { grid, ..SolverOptions::default() })?;
    println!("det[BY] = {}", complex(w.det));
    println!("condition = {:e}", w.condition);
    println!("kernel_dim = {}", w.kernel_dim);
    println!("singular_values = {}", list(&w.singular_values));
    println!("verdict: {}", if w.wellposed { "wellposed" } else { "NOT wellposed" });
    Ok(())
}

fn run_norms(common: &Common) -> AnyResult<()> {
    let (prob, grid) = instance(common)?;
    let g = prob.grid(grid)?;
    let (a, f) = prob.sample_data(&g)?;
    let p = HolderParams::new(prob.n, prob.alpha)?;
    println!("norm_A = {:e}", holder_norm(&a, p)?);
    println!("norm_f = {:e}", holder_norm(&f, p)?);
    Ok(())
}

fn verdict(w: &mut dyn Write, name: &str, c: &ConditionCheck) -> io::Result<()> {
    let word = if c.holds { "holds" } else { "fails" };
    writeln!(w, "{name}: {word} [{}]", list(&c.distances))
}

fn run_family(
    path: &Path,
    eps_list: Option<Vec<f64>>,
    tol: f64,
    solver_tol: f64,
    grid: Option<usize>,
    out: Option<&Path>,
) -> AnyResult<()> {
    let (file, grid) = load(path, grid)?;
    let fam = file.family();
    let eps = eps_list.unwrap_or_else(default_eps_list);
    let opts = SolverOptions { grid, tol: solver_tol, ..SolverOptions::default() };

    let zero = check_condition_zero(fam, &opts)?;
    let limit = check_limit_conditions(fam, &eps, tol, &opts)?;
    let measure = if fam.alpha == 0.0 { Some(check_measure_conditions(fam, &eps, tol, &opts)?) } else { None };
    let study = convergence_study(fam, &eps, tol, &opts)?;

    let mut o = Output::new(out)?;
    o.csv.write_record(["eps", "error", "eq_discrepancy", "bc_discrepancy", "ratio"])?;
    for k in 0..eps.len() {
        let ratio = study.ratios[k].map_or_else(|| "exact".to_string(), |r| r.to_string());
        o.csv.write_record([
            eps[k].to_string(),
            study.errors[k].to_string(),
            study.eq_discrepancies[k].to_string(),
            study.bc_discrepancies[k].to_string(),
            ratio,
        ])?;
    }
    o.csv.flush()?;

    let w = &mut o.summary;
    writeln!(w, "limit problem uniquely solvable: {}", if zero { "holds" } else { "fails" })?;
    verdict(w, "coefficient convergence", &limit.coefficient)?;
    verdict(w, "boundary operator convergence on probes", &limit.boundary)?;
    verdict(w, "right-hand side convergence", &limit.rhs)?;
    verdict(w, "boundary data convergence", &limit.data)?;
    if let Some(m) = &measure {
        verdict(w, "beta convergence", &m.betas)?;
        verdict(w, "bounded variation", &m.variation)?;
        writeln!(w, "variation bound: {:e}", m.variation_bound)?;
        verdict(w, "endpoint value convergence", &m.endpoint)?;
        verdict(w, "primitive integral convergence", &m.integral)?;
        verdict(w, "variation norm convergence", &m.norm_convergence)?;
    }
    writeln!(w, "convergence: {}", if study.converged { "converged" } else { "not converged" })?;
    if study.exact_match {
        writeln!(w, "ratio window: exact match")?;
    } else if let (Some(lo), Some(hi)) = (study.ratio_lo, study.ratio_hi) {
        writeln!(w, "ratio window: [{lo:e}, {hi:e}]")?;
    }
    match study.largest_verified_eps {
        Some(e) => writeln!(w, "largest verified eps: {e}")?,
        None => writeln!(w, "largest verified eps: none")?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve { common, tol, out } => run_solve(common, *tol, out.as_deref()),
        Command::Wellposed { common } => run_wellposed(common),
        Command::Norms { common } => run_norms(common),
        Command::Family { file, eps_list, tol, solver_tol, grid, out } => {
            run_family(file, eps_list.clone(), *tol, *solver_tol, *grid, out.as_deref())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
