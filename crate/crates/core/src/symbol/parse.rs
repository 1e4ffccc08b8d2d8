//! Mini-language for scalar symbol entries.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' integer)?
//! atom  := number | 'i' | 'z' | 'zb' | 'z1' | 'z1b' | 'z2' | 'z2b'
//!        | 'conj' '(' expr ')' | 'ball' '(' nums ')' | 'dball' '(' nums ')' | '(' expr ')'
//! ```
//!
//! `zb` is `z̄`. `ball(re, im, r)` is the Euclidean ball and `dball` the metric
//! ball; on the bidisc the centre takes four numbers. Division is only by
//! constants.

use super::{Ball, ScalarSymbol};
use crate::error::{LabError, Result};
use crate::space::{DomainPoint, C64};

pub const MAX_INPUT_LEN: usize = 16 * 1024;
pub const MAX_EXPONENT: u32 = 64;
pub const MAX_TERMS: usize = 4096;
pub const MAX_DEPTH: usize = 64;
const MAX_DEGREE: u32 = 512;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Comma,
}

fn err(pos: usize, msg: impl Into<String>) -> LabError {
    LabError::Parse { pos, msg: msg.into() }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b',' => Tok::Comma,
            b'0'..=b'9' | b'.' => {
                while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                    i += 1;
                }
                if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                    let mut j = i + 1;
                    if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                        j += 1;
                    }
                    if j < b.len() && b[j].is_ascii_digit() {
                        i = j;
                        while i < b.len() && b[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| err(start, format!("bad number '{text}'")))?;
                if !v.is_finite() {
                    return Err(err(start, "number is not finite"));
                }
                out.push((start, Tok::Num(v)));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < b.len() && b[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..i].to_string())));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(err(start, format!("unexpected character '{ch}'")));
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    n_vars: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        let at = self.offset();
        match self.next() {
            Some(t) if t == want => Ok(()),
            Some(t) => Err(err(at, format!("expected {want:?}, found {t:?}"))),
            None => Err(err(at, format!("expected {want:?}, found end of input"))),
        }
    }

    fn enter(&mut self) -> Result<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(err(self.offset(), format!("nesting deeper than {MAX_DEPTH}")));
        }
        Ok(())
    }

    fn checked(&self, s: ScalarSymbol, at: usize) -> Result<ScalarSymbol> {
        if s.terms().len() > MAX_TERMS {
            return Err(err(at, format!("expression expands to more than {MAX_TERMS} terms")));
        }
        if s.max_power() > MAX_DEGREE {
            return Err(err(at, format!("degree exceeds {MAX_DEGREE}")));
        }
        Ok(s)
    }

    fn product(&self, a: &ScalarSymbol, b: &ScalarSymbol, at: usize) -> Result<ScalarSymbol> {
        if a.terms().len().saturating_mul(b.terms().len()) > MAX_TERMS * 16 {
            return Err(err(at, format!("expression expands to more than {MAX_TERMS} terms")));
        }
        self.checked(a.mul(b), at)
    }

    fn expr(&mut self) -> Result<ScalarSymbol> {
        self.enter()?;
        let mut acc = self.term()?;
        loop {
            let at = self.offset();
            match self.peek() {
                Some(Tok::Plus) => {
                    self.next();
                    let t = self.term()?;
                    acc = self.checked(acc.add(&t), at)?;
                }
                Some(Tok::Minus) => {
                    self.next();
                    let t = self.term()?;
                    acc = self.checked(acc.add(&t.scale(C64::new(-1.0, 0.0))), at)?;
                }
                _ => break,
            }
        }
        self.depth -= 1;
        Ok(acc)
    }

    fn term(&mut self) -> Result<ScalarSymbol> {
        let mut acc = self.unary()?;
        loop {
            let at = self.offset();
            match self.peek() {
                Some(Tok::Star) => {
                    self.next();
                    let u = self.unary()?;
                    acc = self.product(&acc, &u, at)?;
                }
                Some(Tok::Slash) => {
                    self.next();
                    let u = self.unary()?;
                    let c = match u.terms() {
                        [t] if t.z_pow == [0, 0] && t.zbar_pow == [0, 0] && t.balls.is_empty() => t.coeff,
                        _ => return Err(err(at, "division is only allowed by a nonzero constant")),
                    };
                    let inv = C64::new(1.0, 0.0) / c;
                    if !inv.re.is_finite() || !inv.im.is_finite() {
                        return Err(err(at, "division by a vanishing constant"));
                    }
                    acc = acc.scale(inv);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<ScalarSymbol> {
        if let Some(Tok::Minus) = self.peek() {
            self.next();
            self.enter()?;
            let u = self.unary()?;
            self.depth -= 1;
            return Ok(u.scale(C64::new(-1.0, 0.0)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<ScalarSymbol> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.next();
            let at = self.offset();
            let n = match self.next() {
                Some(Tok::Num(v)) if v.fract() == 0.0 && v >= 0.0 && v <= MAX_EXPONENT as f64 => v as u32,
                _ => return Err(err(at, format!("exponent must be an integer in 0..={MAX_EXPONENT}"))),
            };
            let mut acc = ScalarSymbol::constant(C64::new(1.0, 0.0));
            for _ in 0..n {
                acc = self.product(&acc, &base, at)?;
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn signed_number(&mut self) -> Result<f64> {
        let at = self.offset();
        let neg = if let Some(Tok::Minus) = self.peek() {
            self.next();
            true
        } else {
            false
        };
        match self.next() {
            Some(Tok::Num(v)) => Ok(if neg { -v } else { v }),
            _ => Err(err(at, "expected a number")),
        }
    }

    fn ball(&mut self, metric: bool) -> Result<ScalarSymbol> {
        let at = self.offset();
        self.expect(Tok::LParen)?;
        let mut args = vec![self.signed_number()?];
        while let Some(Tok::Comma) = self.peek() {
            self.next();
            args.push(self.signed_number()?);
            if args.len() > 5 {
                return Err(err(at, "too many ball arguments"));
            }
        }
        self.expect(Tok::RParen)?;
        if args.len() != 2 * self.n_vars + 1 {
            return Err(err(at, format!("ball takes {} numbers here", 2 * self.n_vars + 1)));
        }
        let radius = args[args.len() - 1];
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(err(at, "ball radius must be positive"));
        }
        let center = match self.n_vars {
            1 => DomainPoint::Single(C64::new(args[0], args[1])),
            _ => DomainPoint::Pair([C64::new(args[0], args[1]), C64::new(args[2], args[3])]),
        };
        Ok(ScalarSymbol::indicator(Ball { center, radius, metric }))
    }

    fn atom(&mut self) -> Result<ScalarSymbol> {
        let at = self.offset();
        let one = C64::new(1.0, 0.0);
        match self.next() {
            Some(Tok::Num(v)) => Ok(ScalarSymbol::constant(C64::new(v, 0.0))),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                let var = |v: usize| -> Result<usize> {
                    if v < self.n_vars {
                        Ok(v)
                    } else {
                        Err(err(at, format!("'{name}' needs a space with {} variables", v + 1)))
                    }
                };
                match name.as_str() {
                    "i" => Ok(ScalarSymbol::constant(C64::new(0.0, 1.0))),
                    "z" | "z1" => Ok(ScalarSymbol::monomial(one, var(0)?, 1, 0)),
                    "zb" | "z1b" => Ok(ScalarSymbol::monomial(one, var(0)?, 0, 1)),
                    "z2" => Ok(ScalarSymbol::monomial(one, var(1)?, 1, 0)),
                    "z2b" => Ok(ScalarSymbol::monomial(one, var(1)?, 0, 1)),
                    "ball" => self.ball(false),
                    "dball" => self.ball(true),
                    "conj" => {
                        self.expect(Tok::LParen)?;
                        let e = self.expr()?;
                        self.expect(Tok::RParen)?;
                        Ok(e.conj())
                    }
                    _ => Err(err(at, format!("unknown name '{name}'"))),
                }
            }
            Some(t) => Err(err(at, format!("unexpected {t:?}"))),
            None => Err(err(at, "unexpected end of input")),
        }
    }
}

/// Parses one scalar entry for a space with `n_vars` complex variables.
pub fn parse_scalar(src: &str, n_vars: usize) -> Result<ScalarSymbol> {
    if !(1..=2).contains(&n_vars) {
        return Err(LabError::param("symbols have one or two variables"));
    }
    if src.len() > MAX_INPUT_LEN {
        return Err(err(MAX_INPUT_LEN, format!("input longer than {MAX_INPUT_LEN} bytes")));
    }
    let toks = lex(src)?;
    if toks.is_empty() {
        return Err(err(0, "empty expression"));
    }
    let mut p = Parser { toks, pos: 0, end: src.len(), n_vars, depth: 0 };
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(err(p.offset(), "trailing input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Factor;

    fn eval1(src: &str, w: C64) -> C64 {
        parse_scalar(src, 1).unwrap().eval(&[Factor::Disc { alpha: 0.0 }], &DomainPoint::Single(w))
    }

    #[test]
    fn arithmetic() {
        let w = C64::new(0.3, -0.2);
        assert!((eval1("z", w) - w).norm() < 1e-15);
        assert!((eval1("zb", w) - w.conj()).norm() < 1e-15);
        assert!((eval1("2*z^3 - i*zb + 1.5e-1", w) - (2.0 * w.powu(3) - C64::new(0.0, 1.0) * w.conj() + 0.15)).norm() < 1e-15);
        assert!((eval1("(z + zb)^2", w) - (w + w.conj()).powu(2)).norm() < 1e-15);
        assert!((eval1("-z/4", w) + w / 4.0).norm() < 1e-15);
        assert!((eval1("conj(i*z)", w) - (C64::new(0.0, 1.0) * w).conj()).norm() < 1e-15);
        assert!((eval1("--z", w) - w).norm() < 1e-15);
    }

    #[test]
    fn balls() {
        assert_eq!(eval1("3*ball(0, 0, 0.5)", C64::new(0.2, 0.0)), C64::new(3.0, 0.0));
        assert_eq!(eval1("3*ball(0, 0, 0.5)", C64::new(0.6, 0.0)), C64::new(0.0, 0.0));
        assert_eq!(eval1("dball(0.1, -0.1, 0.3)", C64::new(0.1, -0.1)), C64::new(1.0, 0.0));
        let b = parse_scalar("ball(0,0,0,0,1) * z2", 2).unwrap();
        assert_eq!(b.terms().len(), 1);
        assert!(parse_scalar("ball(0,0,1)", 2).is_err());
        assert!(parse_scalar("ball(0,0,-1)", 1).is_err());
    }

    #[test]
    fn errors_carry_offsets() {
        match parse_scalar("z + $", 1) {
            Err(LabError::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_scalar("", 1), Err(LabError::Parse { .. })));
        assert!(matches!(parse_scalar("z2", 1), Err(LabError::Parse { .. })));
        assert!(matches!(parse_scalar("z^65", 1), Err(LabError::Parse { .. })));
        assert!(matches!(parse_scalar("z / z", 1), Err(LabError::Parse { .. })));
        assert!(matches!(parse_scalar("z / 0", 1), Err(LabError::Parse { .. })));
        assert!(matches!(parse_scalar("(z", 1), Err(LabError::Parse { .. })));
        assert!(matches!(parse_scalar("z z", 1), Err(LabError::Parse { .. })));
        assert!(matches!(parse_scalar("foo", 1), Err(LabError::Parse { .. })));
        assert!(matches!(parse_scalar("1e999", 1), Err(LabError::Parse { .. })));
    }

    #[test]
    fn resource_caps() {
        let deep = "(".repeat(100) + "z" + &")".repeat(100);
        assert!(matches!(parse_scalar(&deep, 1), Err(LabError::Parse { .. })));
        let neg = "-".repeat(100) + "z";
        assert!(matches!(parse_scalar(&neg, 1), Err(LabError::Parse { .. })));
        assert!(matches!(parse_scalar("(z+zb+z2+z2b+1)^64", 2), Err(LabError::Parse { .. })));
        assert!(parse_scalar("(z+zb)^64", 1).is_ok());
        let long = "z+".repeat(MAX_INPUT_LEN) + "z";
        assert!(parse_scalar(&long, 1).is_err());
    }
}
