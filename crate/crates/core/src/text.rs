//! Canonical text form of trigonometric polynomials and rationals.
//!
//! Terms are written in canonical basis order, e.g. `1/2 + 1/2*cos(2p)`,
//! `-2*cos(p)*sin(q)`. The first angle is `p`, the second `q`. Denominators
//! are products of monic factors: `sin(p)*(1 + cos(2q))^2`.

use crate::error::{Error, Result};
use crate::scalar::{Mode, Scalar};
use crate::trig::Basis;

fn basis_text(b: Basis, var: char) -> Option<String> {
    let f = |name: &str, n: u32| {
        if n == 1 {
            format!("{name}({var})")
        } else {
            format!("{name}({n}{var})")
        }
    };
    match b {
        Basis::Cos(0) => None,
        Basis::Cos(n) => Some(f("cos", n)),
        Basis::Sin(n) => Some(f("sin", n)),
    }
}

pub(crate) fn poly_to_text<'a, I>(terms: I) -> String
where
    I: Iterator<Item = (Vec<(Basis, char)>, &'a Scalar)>,
{
    let mut out = String::new();
    for (i, (bases, c)) in terms.enumerate() {
        let neg = c.is_negative();
        let mag = c.abs();
        let names: Vec<String> = bases
            .iter()
            .filter_map(|(b, v)| basis_text(*b, *v))
            .collect();
        let mut body = String::new();
        if names.is_empty() || !mag.is_one() {
            body.push_str(&mag.to_string());
        }
        for n in names {
            if !body.is_empty() {
                body.push('*');
            }
            body.push_str(&n);
        }
        match (i, neg) {
            (0, false) => {}
            (0, true) => out.push('-'),
            (_, false) => out.push_str(" + "),
            (_, true) => out.push_str(" - "),
        }
        out.push_str(&body);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Basis(Basis, char),
    Plus,
    Minus,
    Star,
    Slash,
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    let mut toks = Vec::new();
    let err = |msg: &str| Error::Parse(format!("{msg} in '{s}'"));
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                toks.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                toks.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                toks.push(Tok::Star);
                i += 1;
            }
            '/' => {
                toks.push(Tok::Slash);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len() {
                    let d = chars[i];
                    let exp_sign = (d == '-' || d == '+')
                        && i > start
                        && matches!(chars[i - 1], 'e' | 'E');
                    if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                        i += 1;
                    } else {
                        break;
                    }
                }
                toks.push(Tok::Num(chars[start..i].iter().collect()));
            }
            'c' | 's' => {
                let name: String = chars[i..(i + 3).min(chars.len())].iter().collect();
                if name != "cos" && name != "sin" {
                    return Err(err("unknown identifier"));
                }
                i += 3;
                if chars.get(i) != Some(&'(') {
                    return Err(err("expected '('"));
                }
                i += 1;
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let n: u32 = if start == i {
                    1
                } else {
                    chars[start..i]
                        .iter()
                        .collect::<String>()
                        .parse()
                        .map_err(|_| err("bad frequency"))?
                };
                let var = *chars.get(i).ok_or_else(|| err("missing angle"))?;
                if var != 'p' && var != 'q' {
                    return Err(err("angle must be p or q"));
                }
                i += 1;
                if chars.get(i) != Some(&')') {
                    return Err(err("expected ')'"));
                }
                i += 1;
                let b = if name == "cos" {
                    Basis::Cos(n)
                } else if n == 0 {
                    return Err(Error::SinZeroFrequency);
                } else {
                    Basis::Sin(n)
                };
                toks.push(Tok::Basis(b, var));
            }
            _ => return Err(err(&format!("unexpected character '{c}'"))),
        }
    }
    Ok(toks)
}

/// A parsed term: coefficient times a product of basis functions.
pub(crate) type ParsedTerm = (Scalar, Vec<(Basis, char)>);

/// Parses a sum of monomials such as `1/2 - 3*cos(2p)*sin(q)`.
pub(crate) fn parse_terms(s: &str, mode: Mode) -> Result<Vec<ParsedTerm>> {
    let toks = tokenize(s)?;
    let err = || Error::Parse(format!("malformed polynomial '{s}'"));
    let mut out = Vec::new();
    let mut i = 0;
    if toks.is_empty() {
        return Err(err());
    }
    while i < toks.len() {
        let mut negative = false;
        match toks[i] {
            Tok::Plus if i > 0 => i += 1,
            Tok::Minus => {
                negative = true;
                i += 1;
            }
            _ if i == 0 => {}
            _ => return Err(err()),
        }
        let mut coeff = Scalar::one(mode);
        let mut bases = Vec::new();
        let mut expect_factor = true;
        while i < toks.len() {
            match (&toks[i], expect_factor) {
                (Tok::Num(n), true) => {
                    let mut value = Scalar::parse(n, mode)?;
                    if let (Some(Tok::Slash), Some(Tok::Num(d))) = (toks.get(i + 1), toks.get(i + 2)) {
                        value = value.checked_div(&Scalar::parse(d, mode)?)?;
                        i += 2;
                    }
                    coeff = &coeff * &value;
                    expect_factor = false;
                }
                (Tok::Basis(b, v), true) => {
                    bases.push((*b, *v));
                    expect_factor = false;
                }
                (Tok::Star, false) => expect_factor = true,
                (Tok::Plus | Tok::Minus, false) => break,
                _ => return Err(err()),
            }
            i += 1;
        }
        if expect_factor {
            return Err(err());
        }
        if negative {
            coeff = -coeff;
        }
        out.push((coeff, bases));
    }
    Ok(out)
}

/// Splits `a*(b + c)^2*d` at top-level `*` into `(factor text, exponent)`.
pub(crate) fn split_factors(s: &str) -> Result<Vec<(String, u32)>> {
    let err = || Error::Parse(format!("malformed denominator '{s}'"));
    let mut pieces = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(err());
                }
                cur.push(ch);
            }
            '*' if depth == 0 => pieces.push(std::mem::take(&mut cur)),
            _ => cur.push(ch),
        }
    }
    if depth != 0 {
        return Err(err());
    }
    pieces.push(cur);
    let mut out = Vec::new();
    for p in pieces {
        let p = p.trim();
        let (body, exp) = match p.rfind('^') {
            Some(pos) if !p[pos..].contains(')') => {
                let e: u32 = p[pos + 1..].trim().parse().map_err(|_| err())?;
                (&p[..pos], e)
            }
            _ => (p, 1),
        };
        let body = strip_outer_parens(body.trim());
        if body.is_empty() || exp == 0 {
            return Err(err());
        }
        out.push((body.to_string(), exp));
    }
    Ok(out)
}

fn strip_outer_parens(s: &str) -> &str {
    if !(s.starts_with('(') && s.ends_with(')')) {
        return s;
    }
    let mut depth = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 && i != s.len() - 1 {
                    return s;
                }
            }
            _ => {}
        }
    }
    &s[1..s.len() - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizes_float_exponents() {
        let t = parse_terms("1.5e-3*cos(p) - 2", Mode::Float { bits: 64 }).unwrap();
        assert_eq!(t.len(), 2);
        assert!((t[0].0.to_f64() - 1.5e-3).abs() < 1e-18);
        assert_eq!(t[1].0.to_f64(), -2.0);
    }

    #[test]
    fn parses_rational_coefficients() {
        let t = parse_terms("-1/2*cos(2p)*sin(q) + sin(3q)", Mode::Exact).unwrap();
        assert_eq!(t[0].0, Scalar::ratio(-1, 2));
        assert_eq!(t[0].1, vec![(Basis::Cos(2), 'p'), (Basis::Sin(1), 'q')]);
        assert_eq!(t[1].1, vec![(Basis::Sin(3), 'q')]);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_terms("cos(p) +", Mode::Exact).is_err());
        assert!(parse_terms("tan(p)", Mode::Exact).is_err());
        assert!(parse_terms("sin(0p)", Mode::Exact).is_err());
        assert!(parse_terms("", Mode::Exact).is_err());
    }

    #[test]
    fn splits_factor_products() {
        let f = split_factors("sin(p)*(1 + cos(2q))^2").unwrap();
        assert_eq!(f, vec![("sin(p)".into(), 1), ("1 + cos(2q)".into(), 2)]);
        assert!(split_factors("(1 + cos(p)").is_err());
    }
}
