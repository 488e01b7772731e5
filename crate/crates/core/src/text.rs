//! The polynomial text grammar, e.g. `3/2*x1^2*x3 - x2^3`.
//!
//! Terms are joined by `+` or `-`. A term is an optional integer or fraction
//! coefficient followed by `*` and a product of `x<i>` or `x<i>^<e>` factors.
//! Variables are 1-based. Whitespace between tokens is ignored.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::field::{Field, Scalar};
use crate::monomial::Monomial;
use crate::poly::{Form, Poly};

struct Cursor<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line, self.pos + 1, msg)
    }

    fn number(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(s.parse().expect("digits parse"))
    }
}

/// Largest variable index mentioned in `s` (0 when there are none).
pub fn max_variable(s: &str) -> usize {
    let b = s.as_bytes();
    let mut best = 0;
    let mut i = 0;
    while i < b.len() {
        if b[i] == b'x' {
            let mut j = i + 1;
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            if let Ok(v) = s[i + 1..j].parse::<usize>() {
                best = best.max(v);
            }
            i = j;
        } else {
            i += 1;
        }
    }
    best
}

/// Parses one polynomial in `nvars` variables; errors carry 1-based line and column.
pub fn parse_poly_at(s: &str, field: Field, nvars: usize, line: usize) -> Result<Poly> {
    let mut c = Cursor {
        src: s.as_bytes(),
        pos: 0,
        line,
    };
    let mut terms = Vec::new();
    let mut first = true;
    loop {
        let mut negative = false;
        match c.peek() {
            None if first => return Err(c.err("empty polynomial")),
            None => return Err(c.err("expected a term after the sign")),
            Some(b'+') => c.pos += 1,
            Some(b'-') => {
                negative = true;
                c.pos += 1;
            }
            Some(_) if first => {}
            Some(ch) => return Err(c.err(format!("expected `+` or `-`, found `{}`", ch as char))),
        }
        first = false;
        let (m, coeff) = parse_term(&mut c, nvars)?;
        let coeff = if negative { -coeff } else { coeff };
        let scalar = field.from_rational(&coeff).map_err(|e| c.err(e.to_string()))?;
        terms.push((m, scalar));
        if c.peek().is_none() {
            break;
        }
    }
    Ok(Poly::from_terms(field, nvars, terms))
}

fn parse_term(c: &mut Cursor<'_>, nvars: usize) -> Result<(Monomial, BigRational)> {
    let mut coeff = BigRational::one();
    let mut exps = vec![0u16; nvars];
    let mut expect_factor = true;
    if let Some(ch) = c.peek() {
        if ch.is_ascii_digit() {
            let num = c.number()?;
            let mut q = BigRational::from_integer(num);
            if c.peek() == Some(b'/') {
                c.pos += 1;
                let den = c.number()?;
                if den.is_zero() {
                    return Err(c.err("zero denominator"));
                }
                q /= BigRational::from_integer(den);
            }
            coeff = q;
            if c.peek() == Some(b'*') {
                c.pos += 1;
            } else {
                expect_factor = false;
            }
        }
    }
    while expect_factor {
        match c.peek() {
            Some(b'x') => c.pos += 1,
            Some(ch) => return Err(c.err(format!("expected a variable, found `{}`", ch as char))),
            None => return Err(c.err("expected a variable")),
        }
        let col = c.pos;
        if !c.src.get(c.pos).is_some_and(|b| b.is_ascii_digit()) {
            return Err(c.err("expected a variable index"));
        }
        let idx = c.number()?;
        let idx: usize = idx
            .try_into()
            .map_err(|_| Error::parse(c.line, col + 1, "variable index too large"))?;
        if idx == 0 || idx > nvars {
            return Err(Error::parse(
                c.line,
                col + 1,
                format!("variable x{idx} outside x1..x{nvars}"),
            ));
        }
        let mut e = 1u32;
        if c.peek() == Some(b'^') {
            c.pos += 1;
            let n = c.number()?;
            e = n.try_into().map_err(|_| c.err("exponent too large"))?;
        }
        let slot = &mut exps[idx - 1];
        *slot = slot
            .checked_add(e as u16)
            .filter(|_| e <= u16::MAX as u32)
            .ok_or_else(|| c.err("exponent too large"))?;
        expect_factor = c.peek() == Some(b'*');
        if expect_factor {
            c.pos += 1;
        }
    }
    Ok((Monomial::new(exps), coeff))
}

pub fn parse_poly(s: &str, field: Field, nvars: usize) -> Result<Poly> {
    parse_poly_at(s, field, nvars, 1)
}

/// Parses a homogeneous polynomial. `0` is rejected since it has no degree.
pub fn parse_form_at(s: &str, field: Field, nvars: usize, line: usize) -> Result<Form> {
    let p = parse_poly_at(s, field, nvars, line)?;
    if p.is_zero() {
        return Err(Error::parse(line, 1, "zero forms are not allowed"));
    }
    Form::from_poly(p).map_err(|_| Error::parse(line, 1, "polynomial is not homogeneous"))
}

pub fn parse_form(s: &str, field: Field, nvars: usize) -> Result<Form> {
    parse_form_at(s, field, nvars, 1)
}

/// Parses a form of known degree; unlike [`parse_form`] this accepts `0`.
pub fn parse_form_of_degree(s: &str, field: Field, nvars: usize, degree: u32, line: usize) -> Result<Form> {
    let p = parse_poly_at(s, field, nvars, line)?;
    Form::new(p, degree).map_err(|_| Error::parse(line, 1, format!("expected a form of degree {degree}")))
}

pub fn format_poly(p: &Poly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (k, (m, c)) in p.terms().iter().enumerate() {
        let (negative, abs) = match c {
            Scalar::Rat(q) if q.is_negative() => (true, Scalar::Rat(-q)),
            _ => (false, c.clone()),
        };
        if k == 0 {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        if m.degree() == 0 {
            out.push_str(&abs.to_string());
        } else if abs.is_one() {
            out.push_str(&m.to_string());
        } else {
            out.push_str(&format!("{abs}*{m}"));
        }
    }
    out
}

/// Non-empty lines with `#` comments stripped, paired with their 1-based line numbers.
pub fn content_lines(src: &str) -> impl Iterator<Item = (usize, &str)> {
    src.lines().enumerate().filter_map(|(i, l)| {
        let l = match l.find('#') {
            Some(k) => &l[..k],
            None => l,
        };
        let l = l.trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_reference_example() {
        let p = parse_poly("3/2*x1^2*x3 - x2^3", Field::Rational, 3).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(format_poly(&p), "3/2*x1^2*x3 - x2^3");
    }

    #[test]
    fn like_terms_combine() {
        let p = parse_poly("x1*x2 + x2*x1 - 2*x1*x2", Field::Rational, 2).unwrap();
        assert!(p.is_zero());
        assert_eq!(format_poly(&p), "0");
    }

    #[test]
    fn prime_field_coefficients_reduce() {
        let p = parse_poly("1/2*x1 - x2", Field::Prime(5), 2).unwrap();
        assert_eq!(format_poly(&p), "3*x1 + 4*x2");
        assert!(parse_poly("1/5*x1", Field::Prime(5), 1).is_err());
    }

    #[test]
    fn errors_report_columns() {
        match parse_poly_at("x1 + x9", Field::Rational, 3, 4) {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 4);
                assert_eq!(column, 7);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_poly("x1 +", Field::Rational, 1),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_poly("2 x1", Field::Rational, 1),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn forms_must_be_homogeneous_and_nonzero() {
        assert!(parse_form("x1^2 + x2", Field::Rational, 2).is_err());
        assert!(parse_form("0", Field::Rational, 2).is_err());
        assert_eq!(parse_form_of_degree("0", Field::Rational, 2, 3, 1).unwrap().degree(), 3);
    }

    #[test]
    fn leading_minus_and_constants() {
        let p = parse_poly("-x1 + 7", Field::Rational, 1).unwrap();
        assert_eq!(format_poly(&p), "-x1 + 7");
    }

    #[test]
    fn max_variable_scan() {
        assert_eq!(max_variable("x3*x12 - x1"), 12);
        assert_eq!(max_variable("5"), 0);
    }
}
