//! Reference coefficient matrices and scalar functions used by tests and benches.

use crate::funcspace::{parse_expr, Expr, ExprMatrix, Var};
use crate::CMatrix;

#[derive(Debug, Clone, Copy)]
pub struct CorpusSystem {
    pub name: &'static str,
    pub rows: &'static [&'static [&'static str]],
}

impl CorpusSystem {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn matrix(&self) -> ExprMatrix {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|s| parse_expr(s).expect("corpus expression")).collect())
            .collect();
        ExprMatrix::from_rows(rows).expect("corpus shape")
    }

    /// The matrix itself when it does not depend on t.
    pub fn constant(&self) -> Option<CMatrix> {
        let a = self.matrix();
        (!a.depends_on(Var::T)).then(|| a.eval(0.0, 0.0))
    }
}

pub const SYSTEMS: [CorpusSystem; 8] = [
    CorpusSystem { name: "scalar-constant", rows: &[&["1.5"]] },
    CorpusSystem { name: "scalar-trig", rows: &[&["cos(3*t)"]] },
    CorpusSystem { name: "rotation", rows: &[&["0", "-2"], &["2", "0"]] },
    CorpusSystem { name: "upper-polynomial", rows: &[&["t", "t^2"], &["0", "1 - t"]] },
    CorpusSystem { name: "complex-constant", rows: &[&["1i", "0.5"], &["-0.5", "1 - 2i"]] },
    CorpusSystem { name: "mixed-trig", rows: &[&["sin(t)", "1"], &["exp(t)", "cos(2*t)"]] },
    CorpusSystem {
        name: "three-constant",
        rows: &[&["0.2", "1", "0"], &["-1", "0.1", "0.5"], &["0", "-0.5", "-0.3"]],
    },
    CorpusSystem {
        name: "three-variable",
        rows: &[&["t", "sin(t)", "0"], &["0", "1", "t^3"], &["exp(-t)", "0", "cos(t)"]],
    },
];

/// Scalar functions with smooth derivatives on bounded intervals.
pub const FUNCTIONS: [&str; 10] = [
    "1",
    "t",
    "t^2 - 3*t + 1",
    "t^5",
    "sin(t)",
    "cos(4*t)",
    "exp(t)",
    "exp(-2*t)*sin(t)",
    "1/(1 + t^2)",
    "(2 + 1i)*t^3 - 1i*cos(t)",
];

pub fn function(k: usize) -> Expr {
    parse_expr(FUNCTIONS[k]).expect("corpus expression")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_parses() {
        for s in SYSTEMS {
            assert_eq!(s.matrix().shape(), (s.dim(), s.dim()));
        }
        for k in 0..FUNCTIONS.len() {
            function(k);
        }
        assert_eq!(SYSTEMS.iter().filter(|s| s.constant().is_some()).count(), 4);
    }
}
