//! Closed-form scalar expressions in `(t, eps)` with exact symbolic
//! differentiation.
//!
//! The grammar is deliberately small: complex constants, the two variables,
//! sums, products, quotients, non-negative integer powers, negation and the
//! unary functions `sin`, `cos`, `exp`. It is closed under differentiation in
//! either variable, so every derivative needed by a Hölder norm is computed
//! exactly and then evaluated pointwise.
//!
//! New unary functions go into [`Unary`]; each one needs an `eval` arm and a
//! chain-rule arm in [`Expr::differentiate`].

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

/// Differentiation variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    T,
    Eps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unary {
    Sin,
    Cos,
    Exp,
}

impl Unary {
    fn eval(self, z: Complex64) -> Complex64 {
        match self {
            Unary::Sin => z.sin(),
            Unary::Cos => z.cos(),
            Unary::Exp => z.exp(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Unary::Sin => "sin",
            Unary::Cos => "cos",
            Unary::Exp => "exp",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(Complex64),
    Var(Var),
    Add(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, u32),
    Neg(Expr),
    Apply(Unary, Expr),
}

/// Immutable expression tree. Cloning is cheap (shared nodes).
#[derive(Debug, Clone, PartialEq)]
pub struct Expr(Arc<Node>);

impl Expr {
    fn node(n: Node) -> Self {
        Expr(Arc::new(n))
    }

    pub fn constant(c: impl Into<Complex64>) -> Self {
        Self::node(Node::Const(c.into()))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn t() -> Self {
        Self::node(Node::Var(Var::T))
    }

    pub fn eps() -> Self {
        Self::node(Node::Var(Var::Eps))
    }

    pub fn as_constant(&self) -> Option<Complex64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_constant() == Some(Complex64::new(0.0, 0.0))
    }

    fn is_one(&self) -> bool {
        self.as_constant() == Some(Complex64::new(1.0, 0.0))
    }

    pub fn add(&self, rhs: &Expr) -> Expr {
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) => Expr::constant(a + b),
            _ if self.is_zero() => rhs.clone(),
            _ if rhs.is_zero() => self.clone(),
            _ => Self::node(Node::Add(self.clone(), rhs.clone())),
        }
    }

    pub fn sub(&self, rhs: &Expr) -> Expr {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Expr) -> Expr {
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) => Expr::constant(a * b),
            _ if self.is_zero() || rhs.is_zero() => Expr::zero(),
            _ if self.is_one() => rhs.clone(),
            _ if rhs.is_one() => self.clone(),
            _ => Self::node(Node::Mul(self.clone(), rhs.clone())),
        }
    }

    pub fn div(&self, rhs: &Expr) -> Expr {
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) if b != Complex64::new(0.0, 0.0) => Expr::constant(a / b),
            _ if self.is_zero() && !rhs.is_zero() => Expr::zero(),
            _ if rhs.is_one() => self.clone(),
            _ => Self::node(Node::Div(self.clone(), rhs.clone())),
        }
    }

    pub fn pow(&self, k: u32) -> Expr {
        match k {
            0 => Expr::one(),
            1 => self.clone(),
            _ => match self.as_constant() {
                Some(c) => Expr::constant(c.powu(k)),
                None => Self::node(Node::Pow(self.clone(), k)),
            },
        }
    }

    pub fn neg(&self) -> Expr {
        match &*self.0 {
            Node::Const(c) => Expr::constant(-c),
            Node::Neg(inner) => inner.clone(),
            _ => Self::node(Node::Neg(self.clone())),
        }
    }

    pub fn apply(f: Unary, arg: &Expr) -> Expr {
        match arg.as_constant() {
            Some(c) => Expr::constant(f.eval(c)),
            None => Self::node(Node::Apply(f, arg.clone())),
        }
    }

    pub fn sin(&self) -> Expr {
        Self::apply(Unary::Sin, self)
    }

    pub fn cos(&self) -> Expr {
        Self::apply(Unary::Cos, self)
    }

    pub fn exp(&self) -> Expr {
        Self::apply(Unary::Exp, self)
    }

    pub fn eval(&self, t: f64, eps: f64) -> Complex64 {
        match &*self.0 {
            Node::Const(c) => *c,
            Node::Var(Var::T) => Complex64::new(t, 0.0),
            Node::Var(Var::Eps) => Complex64::new(eps, 0.0),
            Node::Add(a, b) => a.eval(t, eps) + b.eval(t, eps),
            Node::Mul(a, b) => a.eval(t, eps) * b.eval(t, eps),
            Node::Div(a, b) => a.eval(t, eps) / b.eval(t, eps),
            Node::Pow(a, k) => a.eval(t, eps).powu(*k),
            Node::Neg(a) => -a.eval(t, eps),
            Node::Apply(f, a) => f.eval(a.eval(t, eps)),
        }
    }

    /// Exact derivative with respect to `var`.
    pub fn differentiate(&self, var: Var) -> Expr {
        match &*self.0 {
            Node::Const(_) => Expr::zero(),
            Node::Var(v) if *v == var => Expr::one(),
            Node::Var(_) => Expr::zero(),
            Node::Add(a, b) => a.differentiate(var).add(&b.differentiate(var)),
            Node::Mul(a, b) => a
                .differentiate(var)
                .mul(b)
                .add(&a.mul(&b.differentiate(var))),
            Node::Div(a, b) => {
                let num = a
                    .differentiate(var)
                    .mul(b)
                    .sub(&a.mul(&b.differentiate(var)));
                num.div(&b.pow(2))
            }
            Node::Pow(a, k) => Expr::constant(*k as f64)
                .mul(&a.pow(k - 1))
                .mul(&a.differentiate(var)),
            Node::Neg(a) => a.differentiate(var).neg(),
            Node::Apply(f, a) => {
                let outer = match f {
                    Unary::Sin => a.cos(),
                    Unary::Cos => a.sin().neg(),
                    Unary::Exp => a.exp(),
                };
                outer.mul(&a.differentiate(var))
            }
        }
    }

    /// Derivative of order `k` in `var`.
    pub fn nth_derivative(&self, var: Var, k: usize) -> Expr {
        (0..k).fold(self.clone(), |e, _| e.differentiate(var))
    }

    pub fn depends_on(&self, var: Var) -> bool {
        match &*self.0 {
            Node::Const(_) => false,
            Node::Var(v) => *v == var,
            Node::Add(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.depends_on(var) || b.depends_on(var)
            }
            Node::Pow(a, _) | Node::Neg(a) | Node::Apply(_, a) => a.depends_on(var),
        }
    }

    /// `self` with `t` replaced by `inner`.
    pub fn compose_t(&self, inner: &Expr) -> Expr {
        match &*self.0 {
            Node::Const(_) | Node::Var(Var::Eps) => self.clone(),
            Node::Var(Var::T) => inner.clone(),
            Node::Add(a, b) => a.compose_t(inner).add(&b.compose_t(inner)),
            Node::Mul(a, b) => a.compose_t(inner).mul(&b.compose_t(inner)),
            Node::Div(a, b) => a.compose_t(inner).div(&b.compose_t(inner)),
            Node::Pow(a, k) => a.compose_t(inner).pow(*k),
            Node::Neg(a) => a.compose_t(inner).neg(),
            Node::Apply(f, a) => Expr::apply(*f, &a.compose_t(inner)),
        }
    }

    /// Replaces `eps` by a fixed value and folds constants.
    pub fn substitute_eps(&self, eps: f64) -> Expr {
        match &*self.0 {
            Node::Const(_) | Node::Var(Var::T) => self.clone(),
            Node::Var(Var::Eps) => Expr::constant(eps),
            Node::Add(a, b) => a.substitute_eps(eps).add(&b.substitute_eps(eps)),
            Node::Mul(a, b) => a.substitute_eps(eps).mul(&b.substitute_eps(eps)),
            Node::Div(a, b) => a.substitute_eps(eps).div(&b.substitute_eps(eps)),
            Node::Pow(a, k) => a.substitute_eps(eps).pow(*k),
            Node::Neg(a) => a.substitute_eps(eps).neg(),
            Node::Apply(f, a) => Expr::apply(*f, &a.substitute_eps(eps)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Const(c) => {
                if c.im == 0.0 {
                    write!(f, "({:?})", c.re)
                } else {
                    write!(f, "({:?}+{:?}i)", c.re, c.im)
                }
            }
            Node::Var(Var::T) => write!(f, "t"),
            Node::Var(Var::Eps) => write!(f, "eps"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Div(a, b) => write!(f, "({a} / {b})"),
            Node::Pow(a, k) => write!(f, "({a}^{k})"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Apply(u, a) => write!(f, "{}({a})", u.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn power_rule() {
        let e = Expr::t().mul(&Expr::t());
        let d = e.differentiate(Var::T);
        for &t in &[0.0, 0.3, 1.7] {
            assert_eq!(d.eval(t, 0.0), c(2.0 * t));
        }
    }

    #[test]
    fn constant_derivative_is_zero() {
        let e = Expr::constant(Complex64::new(2.0, -1.0));
        assert!(e.differentiate(Var::T).is_zero());
        assert!(e.differentiate(Var::Eps).is_zero());
    }

    #[test]
    fn sin_chain_rule_matches_finite_difference() {
        let e = Expr::constant(3.0).mul(&Expr::t()).sin();
        let d = e.differentiate(Var::T);
        let t = 0.7;
        let h = 1e-6;
        let fd = (e.eval(t + h, 0.0) - e.eval(t - h, 0.0)) / (2.0 * h);
        let exact = d.eval(t, 0.0);
        assert!((exact - fd).norm() / exact.norm() <= 1e-8);
        assert!((exact - c(3.0 * (3.0 * t).cos())).norm() < 1e-14);
    }

    #[test]
    fn quotient_rule_in_eps() {
        // d/deps (t / eps) = -t / eps^2
        let e = Expr::t().div(&Expr::eps());
        let d = e.differentiate(Var::Eps);
        let v = d.eval(0.5, 0.25);
        assert!((v - c(-0.5 / 0.0625)).norm() < 1e-12);
    }

    #[test]
    fn substitution_folds_constants() {
        let e = Expr::one().add(&Expr::eps()).mul(&Expr::t());
        let s = e.substitute_eps(0.0);
        assert!(!s.depends_on(Var::Eps));
        assert_eq!(s, Expr::t());
    }

    #[test]
    fn division_by_zero_is_not_folded_away() {
        let e = Expr::t().div(&Expr::eps()).substitute_eps(0.0);
        assert!(!e.eval(0.5, 0.0).is_finite());
    }
}
