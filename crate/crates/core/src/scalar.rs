//! Coefficient field: exact rationals or arbitrary-precision floats.
//!
//! Every [`Scalar`] carries its [`Mode`]. Binary operators on references
//! panic when the modes differ; the `checked_*` methods report the mismatch
//! as [`Error::ModeMismatch`] instead.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_FLOAT_BITS: u32 = 128;
pub const MIN_FLOAT_BITS: u32 = 64;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Exact,
    Float { bits: u32 },
}

impl Mode {
    pub fn float(bits: u32) -> Result<Mode> {
        if bits < MIN_FLOAT_BITS {
            return Err(Error::Parse(format!(
                "float precision must be at least {MIN_FLOAT_BITS} bits, got {bits}"
            )));
        }
        Ok(Mode::Float { bits })
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Mode::Exact)
    }

    /// Relative tolerance of the float zero test: `10^(-bits/4)`.
    /// Exact mode answers `0.0`.
    pub fn zero_tolerance(self) -> f64 {
        match self {
            Mode::Exact => 0.0,
            Mode::Float { bits } => 10f64.powf(-(bits as f64) * 0.25),
        }
    }

    /// Parses `exact`, `float` or `float:<bits>`.
    pub fn parse(s: &str) -> Result<Mode> {
        let s = s.trim();
        if s == "exact" {
            return Ok(Mode::Exact);
        }
        if s == "float" {
            return Mode::float(DEFAULT_FLOAT_BITS);
        }
        if let Some(bits) = s.strip_prefix("float:") {
            let bits: u32 = bits
                .parse()
                .map_err(|_| Error::Parse(format!("bad precision in mode '{s}'")))?;
            return Mode::float(bits);
        }
        Err(Error::Parse(format!("unknown mode '{s}' (expected exact | float[:bits])")))
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => write!(f, "exact"),
            Mode::Float { bits } => write!(f, "float:{bits}"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Scalar {
    Exact(BigRational),
    Float { value: BigFloat, bits: u32 },
}

impl Scalar {
    pub fn zero(mode: Mode) -> Scalar {
        Scalar::from_i64(0, mode)
    }

    pub fn one(mode: Mode) -> Scalar {
        Scalar::from_i64(1, mode)
    }

    pub fn from_i64(v: i64, mode: Mode) -> Scalar {
        match mode {
            Mode::Exact => Scalar::Exact(BigRational::from_integer(BigInt::from(v))),
            Mode::Float { bits } => Scalar::Float {
                value: BigFloat::from_i64(v, bits as usize),
                bits,
            },
        }
    }

    pub fn from_bigint(v: &BigInt, mode: Mode) -> Scalar {
        Scalar::from_rational(&BigRational::from_integer(v.clone()), mode)
    }

    pub fn ratio(num: i64, den: i64) -> Scalar {
        Scalar::Exact(BigRational::new(num.into(), den.into()))
    }

    pub fn from_rational(q: &BigRational, mode: Mode) -> Scalar {
        match mode {
            Mode::Exact => Scalar::Exact(q.clone()),
            Mode::Float { bits } => {
                let p = bits as usize;
                let (n, d) = with_consts(|cc| {
                    (
                        BigFloat::parse(&q.numer().to_string(), Radix::Dec, p, RM, cc),
                        BigFloat::parse(&q.denom().to_string(), Radix::Dec, p, RM, cc),
                    )
                });
                Scalar::Float {
                    value: n.div(&d, p, RM),
                    bits,
                }
            }
        }
    }

    pub fn from_f64(v: f64, bits: u32) -> Scalar {
        Scalar::Float {
            value: BigFloat::from_f64(v, bits as usize),
            bits,
        }
    }

    /// Parses `n`, `n/d` (exact) or a decimal literal (float).
    pub fn parse(s: &str, mode: Mode) -> Result<Scalar> {
        let s = s.trim();
        match mode {
            Mode::Exact => {
                let bad = || Error::Parse(format!("bad rational '{s}'"));
                let q = match s.split_once('/') {
                    Some((n, d)) => {
                        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                        if d.is_zero() {
                            return Err(Error::DivisionByZero);
                        }
                        BigRational::new(n, d)
                    }
                    None => BigRational::from_integer(s.parse().map_err(|_| bad())?),
                };
                Ok(Scalar::Exact(q))
            }
            Mode::Float { bits } => {
                if let Some((n, d)) = s.split_once('/') {
                    let n = Scalar::parse(n, mode)?;
                    let d = Scalar::parse(d, mode)?;
                    return n.checked_div(&d);
                }
                let value =
                    with_consts(|cc| BigFloat::parse(s, Radix::Dec, bits as usize, RM, cc));
                if value.is_nan() || value.is_inf() {
                    return Err(Error::Parse(format!("bad decimal '{s}'")));
                }
                Ok(Scalar::Float { value, bits })
            }
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Exact(_) => Mode::Exact,
            Scalar::Float { bits, .. } => Mode::Float { bits: *bits },
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(q) => Some(q),
            Scalar::Float { .. } => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.is_zero(),
            Scalar::Float { value, .. } => value.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.is_one(),
            Scalar::Float { value, bits } => {
                value == &BigFloat::from_i64(1, *bits as usize)
            }
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.is_negative(),
            Scalar::Float { value, .. } => value.is_negative() && !value.is_zero(),
        }
    }

    pub fn abs(&self) -> Scalar {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(q) => rational_to_f64(q),
            Scalar::Float { value, .. } => bigfloat_to_f64(value),
        }
    }

    pub fn same_mode(&self, other: &Scalar) -> Result<()> {
        if self.mode() == other.mode() {
            Ok(())
        } else {
            Err(Error::ModeMismatch {
                left: self.mode(),
                right: other.mode(),
            })
        }
    }

    pub fn checked_add(&self, other: &Scalar) -> Result<Scalar> {
        self.same_mode(other)?;
        Ok(self + other)
    }

    pub fn checked_sub(&self, other: &Scalar) -> Result<Scalar> {
        self.same_mode(other)?;
        Ok(self - other)
    }

    pub fn checked_mul(&self, other: &Scalar) -> Result<Scalar> {
        self.same_mode(other)?;
        Ok(self * other)
    }

    pub fn checked_div(&self, other: &Scalar) -> Result<Scalar> {
        self.same_mode(other)?;
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self / other)
    }

    pub fn pow(&self, e: u32) -> Scalar {
        let mut acc = Scalar::one(self.mode());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Half of the value; the product-to-sum rules need it constantly.
    pub fn half(&self) -> Scalar {
        match self {
            Scalar::Exact(q) => Scalar::Exact(q / BigInt::from(2)),
            Scalar::Float { .. } => self / &Scalar::from_i64(2, self.mode()),
        }
    }

    pub fn mul_i64(&self, k: i64) -> Scalar {
        match self {
            Scalar::Exact(q) => Scalar::Exact(q * BigInt::from(k)),
            Scalar::Float { .. } => self * &Scalar::from_i64(k, self.mode()),
        }
    }

    pub fn cos_sin(angle: f64, mode: Mode) -> Result<(Scalar, Scalar)> {
        match mode {
            Mode::Exact => Err(Error::RequiresExact),
            Mode::Float { bits } => {
                let p = bits as usize;
                let a = BigFloat::from_f64(angle, p);
                let (c, s) = with_consts(|cc| (a.cos(p, RM, cc), a.sin(p, RM, cc)));
                Ok((Scalar::Float { value: c, bits }, Scalar::Float { value: s, bits }))
            }
        }
    }

    /// Total order used for canonical sorting. Floats compare numerically.
    pub fn total_cmp(&self, other: &Scalar) -> Ordering {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.cmp(b),
            (Scalar::Float { value: a, .. }, Scalar::Float { value: b, .. }) => {
                a.partial_cmp(b).unwrap_or(Ordering::Equal)
            }
            (Scalar::Exact(_), Scalar::Float { .. }) => Ordering::Less,
            (Scalar::Float { .. }, Scalar::Exact(_)) => Ordering::Greater,
        }
    }
}

fn rational_to_f64(q: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Large components: shift both down to a common scale.
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let shift_n = (nb - 60).max(0);
    let shift_d = (db - 60).max(0);
    let n = (q.numer() >> shift_n as usize).to_f64().unwrap_or(0.0);
    let d = (q.denom() >> shift_d as usize).to_f64().unwrap_or(1.0);
    n / d * 2f64.powi((shift_n - shift_d) as i32)
}

fn bigfloat_to_f64(v: &BigFloat) -> f64 {
    if v.is_zero() {
        return 0.0;
    }
    if v.is_nan() {
        return f64::NAN;
    }
    if v.is_inf_pos() {
        return f64::INFINITY;
    }
    if v.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    let (words, _, sign, exponent, _) = v.as_raw_parts().expect("finite value");
    // Normalized mantissa: the top word carries the leading bit; value = 0.m * 2^e.
    let top = *words.last().expect("nonempty mantissa") as f64;
    let mag = top * 2f64.powi(exponent - 64);
    if sign == Sign::Neg {
        -mag
    } else {
        mag
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Scalar) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            (Scalar::Float { value: a, bits: pa }, Scalar::Float { value: b, bits: pb }) => {
                pa == pb && a == b
            }
            _ => false,
        }
    }
}

fn mismatch(a: &Scalar, b: &Scalar) -> ! {
    panic!("scalar mode mismatch: {} vs {}", a.mode(), b.mode())
}

macro_rules! float_binop {
    ($trait:ident, $method:ident, $rat:tt, $bf:ident) => {
        impl<'a> $trait<&'a Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a $rat b),
                    (Scalar::Float { value: a, bits }, Scalar::Float { value: b, bits: pb })
                        if bits == pb =>
                    {
                        Scalar::Float {
                            value: a.$bf(b, *bits as usize, RM),
                            bits: *bits,
                        }
                    }
                    _ => mismatch(self, rhs),
                }
            }
        }

        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
    };
}

float_binop!(Add, add, +, add);
float_binop!(Sub, sub, -, sub);
float_binop!(Mul, mul, *, mul);
float_binop!(Div, div, /, div);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(q) => Scalar::Exact(-q),
            Scalar::Float { value, bits } => Scalar::Float {
                value: value.neg(),
                bits: *bits,
            },
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(q) => {
                if q.denom().is_one() {
                    write!(f, "{}", q.numer())
                } else {
                    write!(f, "{}/{}", q.numer(), q.denom())
                }
            }
            Scalar::Float { value, .. } => {
                let s = with_consts(|cc| value.format(Radix::Dec, RM, cc))
                    .map_err(|_| fmt::Error)?;
                write!(f, "{s}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_lowest_terms() {
        let a = Scalar::ratio(6, -8);
        assert_eq!(a, Scalar::ratio(-3, 4));
        assert_eq!(a.to_string(), "-3/4");
        assert_eq!(Scalar::ratio(4, 2).to_string(), "2");
    }

    #[test]
    fn mixing_modes_is_an_error() {
        let a = Scalar::one(Mode::Exact);
        let b = Scalar::one(Mode::Float { bits: 128 });
        assert!(matches!(a.checked_add(&b), Err(Error::ModeMismatch { .. })));
        let c = Scalar::one(Mode::Float { bits: 192 });
        assert!(b.checked_mul(&c).is_err());
    }

    #[test]
    fn float_round_trip_through_f64() {
        let m = Mode::Float { bits: 128 };
        for v in [0.75, -3.5, 1e-20, 12345.678, std::f64::consts::PI] {
            let s = Scalar::from_f64(v, 128);
            assert_eq!(s.to_f64(), v);
            assert_eq!(s.mode(), m);
        }
        let third = Scalar::from_rational(&BigRational::new(1.into(), 3.into()), m);
        assert!((third.to_f64() - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn float_cos_sin_high_precision() {
        let m = Mode::float(128).unwrap();
        let (c, s) = Scalar::cos_sin(0.5, m).unwrap();
        let one = &(&c * &c) + &(&s * &s);
        let err = (&one - &Scalar::one(m)).abs().to_f64();
        assert!(err < 1e-35, "{err}");
    }

    #[test]
    fn mode_parsing() {
        assert_eq!(Mode::parse("exact").unwrap(), Mode::Exact);
        assert_eq!(Mode::parse("float").unwrap(), Mode::Float { bits: 128 });
        assert_eq!(Mode::parse("float:256").unwrap(), Mode::Float { bits: 256 });
        assert!(Mode::parse("float:32").is_err());
        assert!(Mode::parse("double").is_err());
    }

    #[test]
    fn parse_scalars() {
        assert_eq!(Scalar::parse("3/5", Mode::Exact).unwrap(), Scalar::ratio(3, 5));
        assert_eq!(Scalar::parse("-7", Mode::Exact).unwrap(), Scalar::ratio(-7, 1));
        assert!(Scalar::parse("1/0", Mode::Exact).is_err());
        let f = Scalar::parse("0.25", Mode::Float { bits: 64 }).unwrap();
        assert_eq!(f.to_f64(), 0.25);
    }

    #[test]
    fn large_rationals_convert() {
        let big = BigInt::from(10).pow(400);
        let q = BigRational::new(big.clone() * BigInt::from(3), big);
        assert!((rational_to_f64(&q) - 3.0).abs() < 1e-14);
    }
}
