//! Text syntax for [`Expr`].
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' uint)?
//! atom    := number | number 'i' | 'i' | 't' | 'eps' | 'pi'
//!          | ('sin' | 'cos' | 'exp') '(' expr ')' | '(' expr ')'
//! number  := digits ('.' digits?)? (('e' | 'E') ('+' | '-')? digits)?
//! ```
//!
//! Whitespace is ignored between tokens. A number immediately followed by `i`
//! is an imaginary literal, so `1+2i` and `0.5i` are valid.

use num_complex::Complex64;

use super::expr::{Expr, Unary};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Imag(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<Token>, String> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || (ch == '.' && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value: f64 = text
                .parse()
                .map_err(|_| format!("invalid number `{text}` at offset {start}"))?;
            let imaginary = i < chars.len()
                && chars[i] == 'i'
                && !chars.get(i + 1).is_some_and(|c| c.is_ascii_alphanumeric());
            if imaginary {
                i += 1;
                out.push(Token::Imag(value));
            } else {
                out.push(Token::Num(value));
            }
        } else if ch.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else {
            match ch {
                '+' | '-' | '*' | '/' | '^' => out.push(Token::Op(ch)),
                '(' => out.push(Token::LParen),
                ')' => out.push(Token::RParen),
                _ => return Err(format!("unexpected character `{ch}` at offset {i}")),
            }
            i += 1;
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        tok
    }

    fn expr(&mut self) -> Result<Expr, String> {
        let mut lhs = self.term()?;
        while let Some(Token::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' { lhs.add(&rhs) } else { lhs.sub(&rhs) };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, String> {
        let mut lhs = self.unary()?;
        while let Some(Token::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' { lhs.mul(&rhs) } else { lhs.div(&rhs) };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, String> {
        if let Some(Token::Op('-')) = self.peek() {
            self.pos += 1;
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, String> {
        let base = self.atom()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.pos += 1;
            match self.next() {
                Some(Token::Num(k)) if k >= 0.0 && k.fract() == 0.0 && k <= u32::MAX as f64 => {
                    Ok(base.pow(k as u32))
                }
                other => Err(format!(
                    "exponent must be a non-negative integer literal, found {other:?}"
                )),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, String> {
        match self.next() {
            Some(Token::Num(v)) => Ok(Expr::constant(v)),
            Some(Token::Imag(v)) => Ok(Expr::constant(Complex64::new(0.0, v))),
            Some(Token::LParen) => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Some(Token::Ident(name)) => match name.as_str() {
                "t" => Ok(Expr::t()),
                "eps" => Ok(Expr::eps()),
                "i" => Ok(Expr::constant(Complex64::new(0.0, 1.0))),
                "pi" => Ok(Expr::constant(std::f64::consts::PI)),
                "sin" | "cos" | "exp" => {
                    let f = match name.as_str() {
                        "sin" => Unary::Sin,
                        "cos" => Unary::Cos,
                        _ => Unary::Exp,
                    };
                    match self.next() {
                        Some(Token::LParen) => {}
                        _ => return Err(format!("`{name}` must be followed by `(`")),
                    }
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    Ok(Expr::apply(f, &arg))
                }
                _ => Err(format!("unknown identifier `{name}`")),
            },
            Some(tok) => Err(format!("unexpected token {tok:?}")),
            None => Err("unexpected end of expression".to_string()),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), String> {
        match self.next() {
            Some(Token::RParen) => Ok(()),
            _ => Err("missing `)`".to_string()),
        }
    }
}

/// Parses an expression; the error message describes the first problem found.
pub fn parse_expr(src: &str) -> Result<Expr, String> {
    let tokens = tokenize(src)?;
    if tokens.is_empty() {
        return Err("empty expression".to_string());
    }
    let mut p = Parser { tokens, pos: 0 };
    let e = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(format!("trailing input after token {}", p.pos));
    }
    Ok(e)
}
