//! Fixtures shared by the criterion benches.

use holderbvp::problem_file::parse_problem_str;
use holderbvp::ProblemFamily;

/// Two-dimensional problem with an `n = 1`, `α = 1/2` setting and an integral
/// boundary term.
pub const TWO_BY_TWO: &str = include_str!("../../../problems/family_2x2.toml");

/// Scalar problem whose boundary density oscillates with the parameter.
pub const OSCILLATORY_MEASURE: &str = include_str!("../../../problems/osc_measure.toml");

pub fn family(src: &str) -> ProblemFamily {
    parse_problem_str(src).expect("bench fixture parses").into_family()
}
