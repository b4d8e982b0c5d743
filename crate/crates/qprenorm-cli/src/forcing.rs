//! Forcing expressions such as `[1]*cos(1w)+[0,0.5]*sin(2w)`.
//!
//! ```text
//! expr     := term ("+" term)*
//! term     := [coeffs "*"] trig
//! coeffs   := "[" real ("," real)* "]"      monomial coefficients in x
//! trig     := ("cos" | "sin") ["(" int "w" ")"]
//! ```
//!
//! `kw` stands for `2 pi k theta`. A bare `cos` means `[1]*cos(1w)`.

use qprenorm_lab::renorm1d::{Forcing, Trig};

use crate::error::CliError;

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> CliError {
        CliError::Forcing { pos: self.pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.src[self.pos..].chars().next().map_or(1, char::len_utf8);
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn expect(&mut self, c: char) -> Result<(), CliError> {
        match self.peek() {
            Some(d) if d == c => {
                self.pos += c.len_utf8();
                Ok(())
            }
            Some(d) => Err(self.err(format!("expected `{c}`, found `{d}`"))),
            None => Err(self.err(format!("expected `{c}`, found end of input"))),
        }
    }

    fn number(&mut self) -> Result<f64, CliError> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .char_indices()
            .take_while(|&(i, c)| {
                c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || ((c == '-' || c == '+') && (i == 0 || rest[..i].ends_with(['e', 'E'])))
            })
            .map(|(i, c)| i + c.len_utf8())
            .last()
            .unwrap_or(0);
        let text = &rest[..len];
        let v = text.parse::<f64>().map_err(|_| self.err(format!("invalid number `{text}`")))?;
        if !v.is_finite() {
            return Err(self.err("coefficient is not finite"));
        }
        self.pos += len;
        Ok(v)
    }

    fn integer(&mut self) -> Result<usize, CliError> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest.chars().take_while(char::is_ascii_digit).count();
        if len == 0 {
            return Err(self.err("expected a mode number"));
        }
        let k = rest[..len].parse::<usize>().map_err(|_| self.err("mode number out of range"))?;
        self.pos += len;
        Ok(k)
    }

    fn coeffs(&mut self) -> Result<Vec<f64>, CliError> {
        self.expect('[')?;
        let mut out = vec![self.number()?];
        while self.peek() == Some(',') {
            self.pos += 1;
            out.push(self.number()?);
        }
        self.expect(']')?;
        Ok(out)
    }

    fn trig(&mut self) -> Result<(Trig, usize), CliError> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let trig = if rest.starts_with("cos") {
            Trig::Cos
        } else if rest.starts_with("sin") {
            Trig::Sin
        } else {
            return Err(self.err("expected `cos` or `sin`"));
        };
        self.pos += 3;
        if self.peek() != Some('(') {
            return Ok((trig, 1));
        }
        self.pos += 1;
        let k = self.integer()?;
        self.expect('w')?;
        self.expect(')')?;
        Ok((trig, k))
    }

    fn term(&mut self) -> Result<(Vec<f64>, Trig, usize), CliError> {
        let poly = if self.peek() == Some('[') {
            let c = self.coeffs()?;
            self.expect('*')?;
            c
        } else {
            vec![1.0]
        };
        let (trig, k) = self.trig()?;
        Ok((poly, trig, k))
    }
}

/// Parses a forcing `g(theta, x)` and checks every mode against `k_max`.
pub fn parse_forcing(expr: &str, k_max: usize) -> Result<Forcing, CliError> {
    let mut p = Parser { src: expr, pos: 0 };
    let mut forcing = Forcing::default();
    loop {
        let start = p.pos;
        let (poly, trig, k) = p.term()?;
        if k > k_max {
            p.pos = start;
            return Err(p.err(format!("mode {k} exceeds the Fourier truncation {k_max}")));
        }
        forcing = forcing.term(poly, trig, k);
        match p.peek() {
            None => return Ok(forcing),
            Some('+') => p.pos += 1,
            Some(c) => return Err(p.err(format!("unexpected `{c}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pos(r: Result<Forcing, CliError>) -> usize {
        match r {
            Err(CliError::Forcing { pos, .. }) => pos,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn grammar_examples() {
        let f = parse_forcing("[1]*cos(1w)", 16).unwrap();
        assert_eq!(f, Forcing::cos(1));
        let g = parse_forcing("[0,1]*sin(1w)", 16).unwrap();
        let (v, _) = g.eval_dx(0.25, 0.7);
        assert!((v - 0.7).abs() < 1e-15);
        let h = parse_forcing("[1]*cos(1w)+[0.5]*cos(2w)", 16).unwrap();
        assert_eq!(h.terms.len(), 2);
        assert_eq!((h.terms[1].k, h.terms[1].poly.clone()), (2, vec![0.5]));
        assert_eq!(parse_forcing(" cos ", 16).unwrap(), Forcing::cos(1));
        let e = parse_forcing("[1e-3, -2.5E2]*sin(3w)", 16).unwrap();
        assert_eq!(e.terms[0].poly, vec![1e-3, -250.0]);
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(pos(parse_forcing("cos(3θ", 16)), 5);
        assert_eq!(pos(parse_forcing("[1]*tan(1w)", 16)), 4);
        assert_eq!(pos(parse_forcing("[1,]*cos(1w)", 16)), 3);
        assert_eq!(pos(parse_forcing("cos(1w)+", 16)), 8);
        assert_eq!(pos(parse_forcing("cos(1w) cos", 16)), 8);
        assert_eq!(pos(parse_forcing("cos+[2]*sin(17w)", 16)), 4);
    }
}
