//! Quotients of trigonometric polynomials.
//!
//! Denominators are kept as products of monic one-angle factors
//! `Π F_j(θ_j)^{e_j}`. No polynomial GCD is ever computed: factors are
//! matched by canonical equality, sums use the factor-wise lcm, and two
//! quotients are equal iff their cross-multiplied numerators agree.
//! [`Rational::reduce`] cancels a factor only when it divides the numerator
//! exactly.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{Mode, Scalar};
use crate::trig::TrigPoly;
use crate::trig2::TrigPoly2;

/// Which angle a one-angle factor depends on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    P,
    Q,
}

impl Var {
    pub fn symbol(self) -> char {
        match self {
            Var::P => 'p',
            Var::Q => 'q',
        }
    }
}

/// Ring of numerators: one-angle or two-angle trigonometric polynomials.
pub trait Numerator: Clone + fmt::Debug + PartialEq {
    fn zero_like(&self) -> Self;
    fn one_of(mode: Mode) -> Self;
    fn mode(&self) -> Mode;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, c: &Scalar) -> Self;
    fn mul_var(&self, var: Var, f: &TrigPoly) -> Self;
    fn diff_var(&self, var: Var) -> Self;
    fn div_exact_var(&self, var: Var, f: &TrigPoly) -> Option<Self>;
    fn approx_eq(&self, o: &Self) -> bool;
    fn max_abs_coeff(&self) -> f64;
    fn eval(&self, p: f64, q: f64) -> f64;
    fn text(&self) -> String;
    fn term_count(&self) -> usize;
}

impl Numerator for TrigPoly {
    fn zero_like(&self) -> Self {
        TrigPoly::zero(self.mode())
    }
    fn one_of(mode: Mode) -> Self {
        TrigPoly::one(mode)
    }
    fn mode(&self) -> Mode {
        TrigPoly::mode(self)
    }
    fn is_zero(&self) -> bool {
        TrigPoly::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, c: &Scalar) -> Self {
        TrigPoly::scale(self, c)
    }
    fn mul_var(&self, var: Var, f: &TrigPoly) -> Self {
        assert_eq!(var, Var::P, "one-angle rational has no second angle");
        self * f
    }
    fn diff_var(&self, var: Var) -> Self {
        match var {
            Var::P => self.diff(),
            Var::Q => self.zero_like(),
        }
    }
    fn div_exact_var(&self, var: Var, f: &TrigPoly) -> Option<Self> {
        match var {
            Var::P => self.div_exact(f),
            Var::Q => None,
        }
    }
    fn approx_eq(&self, o: &Self) -> bool {
        TrigPoly::approx_eq(self, o)
    }
    fn max_abs_coeff(&self) -> f64 {
        TrigPoly::max_abs_coeff(self)
    }
    fn eval(&self, p: f64, _q: f64) -> f64 {
        self.eval_f64(p)
    }
    fn text(&self) -> String {
        self.to_text('p')
    }
    fn term_count(&self) -> usize {
        self.len()
    }
}

impl Numerator for TrigPoly2 {
    fn zero_like(&self) -> Self {
        TrigPoly2::zero(self.mode())
    }
    fn one_of(mode: Mode) -> Self {
        TrigPoly2::one(mode)
    }
    fn mode(&self) -> Mode {
        TrigPoly2::mode(self)
    }
    fn is_zero(&self) -> bool {
        TrigPoly2::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, c: &Scalar) -> Self {
        TrigPoly2::scale(self, c)
    }
    fn mul_var(&self, var: Var, f: &TrigPoly) -> Self {
        match var {
            Var::P => self.mul_p(f),
            Var::Q => self.mul_q(f),
        }
    }
    fn diff_var(&self, var: Var) -> Self {
        match var {
            Var::P => self.diff_p(),
            Var::Q => self.diff_q(),
        }
    }
    fn div_exact_var(&self, var: Var, f: &TrigPoly) -> Option<Self> {
        match var {
            Var::P => self.div_exact_p(f),
            Var::Q => self.div_exact_q(f),
        }
    }
    fn approx_eq(&self, o: &Self) -> bool {
        TrigPoly2::approx_eq(self, o)
    }
    fn max_abs_coeff(&self) -> f64 {
        TrigPoly2::max_abs_coeff(self)
    }
    fn eval(&self, p: f64, q: f64) -> f64 {
        self.eval_f64(p, q)
    }
    fn text(&self) -> String {
        self.to_text()
    }
    fn term_count(&self) -> usize {
        self.len()
    }
}

/// A monic, non-constant one-angle factor raised to a positive power.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub var: Var,
    pub poly: TrigPoly,
    pub exp: u32,
    key: String,
}

impl Factor {
    fn new(var: Var, poly: TrigPoly, exp: u32) -> Factor {
        let key = poly.to_text(var.symbol());
        Factor {
            var,
            poly,
            exp,
            key,
        }
    }

    fn same_base(&self, other: &Factor) -> bool {
        self.var == other.var && (self.key == other.key || self.poly.approx_eq(&other.poly))
    }

    fn base_text(&self) -> String {
        if self.poly.len() == 1 {
            self.key.clone()
        } else {
            format!("({})", self.key)
        }
    }

    /// L1 norm of the coefficients: an upper bound of `|F(θ)|`.
    fn norm1(&self) -> f64 {
        self.poly.terms().map(|(_, c)| c.to_f64().abs()).sum()
    }
}

/// Product of monic factors, sorted by `(angle, canonical text)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Denominator {
    factors: Vec<Factor>,
}

impl Denominator {
    pub fn one() -> Denominator {
        Denominator::default()
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Normalizes `poly` into a monic factor; returns the stripped leading
    /// coefficient (constant polynomials become a pure scalar).
    pub fn from_poly(var: Var, poly: &TrigPoly, exp: u32) -> Result<(Scalar, Denominator)> {
        let (lc, monic) = poly.monic().ok_or(Error::DivisionByZeroFunction)?;
        let lc = lc.pow(exp);
        if monic.is_constant() || exp == 0 {
            return Ok((lc, Denominator::one()));
        }
        Ok((
            lc,
            Denominator {
                factors: vec![Factor::new(var, monic, exp)],
            },
        ))
    }

    fn insert(&mut self, f: Factor) {
        if let Some(existing) = self.factors.iter_mut().find(|g| g.same_base(&f)) {
            existing.exp += f.exp;
            return;
        }
        let pos = self
            .factors
            .iter()
            .position(|g| (g.var, &g.key) > (f.var, &f.key))
            .unwrap_or(self.factors.len());
        self.factors.insert(pos, f);
    }

    pub fn mul(&self, other: &Denominator) -> Denominator {
        let mut out = self.clone();
        for f in &other.factors {
            out.insert(f.clone());
        }
        out
    }

    /// Factor-wise lcm and the cofactors `(lcm / self, lcm / other)`.
    fn lcm(&self, other: &Denominator) -> (Denominator, Denominator, Denominator) {
        let mut lcm = self.clone();
        let mut miss_self = Denominator::one();
        for f in &other.factors {
            match lcm.factors.iter_mut().find(|g| g.same_base(f)) {
                Some(g) if g.exp >= f.exp => {}
                Some(g) => {
                    miss_self.insert(Factor::new(f.var, f.poly.clone(), f.exp - g.exp));
                    g.exp = f.exp;
                }
                None => {
                    miss_self.insert(f.clone());
                    lcm.insert(f.clone());
                }
            }
        }
        let mut miss_other = Denominator::one();
        for g in &lcm.factors {
            let have = other
                .factors
                .iter()
                .find(|f| f.same_base(g))
                .map_or(0, |f| f.exp);
            if g.exp > have {
                miss_other.insert(Factor::new(g.var, g.poly.clone(), g.exp - have));
            }
        }
        (lcm, miss_self, miss_other)
    }

    fn apply_to<N: Numerator>(&self, num: &N) -> N {
        let mut out = num.clone();
        for f in &self.factors {
            for _ in 0..f.exp {
                out = out.mul_var(f.var, &f.poly);
            }
        }
        out
    }

    /// Expanded product of the factors in one angle.
    pub fn expand(&self, var: Var, mode: Mode) -> TrigPoly {
        let mut out = TrigPoly::one(mode);
        for f in self.factors.iter().filter(|f| f.var == var) {
            out = &out * &f.poly.pow(f.exp);
        }
        out
    }

    pub fn eval(&self, p: f64, q: f64) -> f64 {
        self.factors
            .iter()
            .map(|f| {
                let th = if f.var == Var::P { p } else { q };
                f.poly.eval_f64(th).powi(f.exp as i32)
            })
            .product()
    }

    /// Smallest `|F_j(θ)| / ‖F_j‖₁` over the factors (1 for an empty product).
    pub fn relative_magnitude(&self, p: f64, q: f64) -> f64 {
        self.factors
            .iter()
            .map(|f| {
                let th = if f.var == Var::P { p } else { q };
                f.poly.eval_f64(th).abs() / f.norm1()
            })
            .fold(1.0, f64::min)
    }

    pub fn swap(&self) -> Denominator {
        let mut out = Denominator::one();
        for f in &self.factors {
            let var = if f.var == Var::P { Var::Q } else { Var::P };
            out.insert(Factor::new(var, f.poly.clone(), f.exp));
        }
        out
    }

    pub fn to_text(&self) -> String {
        if self.factors.is_empty() {
            return "1".into();
        }
        self.factors
            .iter()
            .map(|f| {
                if f.exp == 1 {
                    f.base_text()
                } else {
                    format!("{}^{}", f.base_text(), f.exp)
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }

    pub fn parse(s: &str, mode: Mode) -> Result<(Scalar, Denominator)> {
        let s = s.trim();
        if s == "1" {
            return Ok((Scalar::one(mode), Denominator::one()));
        }
        let mut scalar = Scalar::one(mode);
        let mut den = Denominator::one();
        for (body, exp) in crate::text::split_factors(s)? {
            let vars: Vec<char> = body.chars().filter(|c| *c == 'p' || *c == 'q').collect();
            let var = match (vars.iter().all(|c| *c == 'p'), vars.iter().all(|c| *c == 'q')) {
                (true, false) => Var::P,
                (false, true) => Var::Q,
                _ => {
                    return Err(Error::Parse(format!(
                        "denominator factor '{body}' must depend on exactly one angle"
                    )))
                }
            };
            let poly = TrigPoly2::parse(&body, mode)?;
            let one_angle = match var {
                Var::P => poly.diagonal(),
                Var::Q => poly.swap().diagonal(),
            };
            let (lc, d) = Denominator::from_poly(var, &one_angle, exp)?;
            scalar = &scalar * &lc;
            den = den.mul(&d);
        }
        Ok((scalar, den))
    }
}

/// `num / den` with a factored denominator.
#[derive(Debug, Clone, PartialEq)]
pub struct Rational<N: Numerator> {
    num: N,
    den: Denominator,
}

/// Quotient of one-angle trigonometric polynomials.
pub type TrigRational = Rational<TrigPoly>;
/// Quotient of two-angle trigonometric polynomials with a separable denominator.
pub type TrigRational2 = Rational<TrigPoly2>;

impl<N: Numerator> Rational<N> {
    pub fn from_num(num: N) -> Rational<N> {
        Rational {
            num,
            den: Denominator::one(),
        }
    }

    pub fn from_parts(num: N, den: Denominator) -> Rational<N> {
        Rational { num, den }
    }

    pub fn one(mode: Mode) -> Rational<N> {
        Rational::from_num(N::one_of(mode))
    }

    /// `num / den(var)^exp`.
    pub fn over(num: N, var: Var, den: &TrigPoly, exp: u32) -> Result<Rational<N>> {
        let (lc, d) = Denominator::from_poly(var, den, exp)?;
        let inv = Scalar::one(num.mode()).checked_div(&lc)?;
        Ok(Rational {
            num: num.scale(&inv),
            den: d,
        })
    }

    pub fn num(&self) -> &N {
        &self.num
    }

    pub fn den(&self) -> &Denominator {
        &self.den
    }

    pub fn mode(&self) -> Mode {
        self.num.mode()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn zero_like(&self) -> Rational<N> {
        Rational::from_num(self.num.zero_like())
    }

    pub fn neg(&self) -> Rational<N> {
        Rational {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> Rational<N> {
        Rational {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn scale_i64(&self, k: i64) -> Rational<N> {
        self.scale(&Scalar::from_i64(k, self.mode()))
    }

    /// Numerators brought over the common (lcm) denominator.
    fn aligned(&self, other: &Rational<N>) -> (N, N, Denominator) {
        if self.den == other.den {
            return (self.num.clone(), other.num.clone(), self.den.clone());
        }
        let (lcm, miss_a, miss_b) = self.den.lcm(&other.den);
        (miss_a.apply_to(&self.num), miss_b.apply_to(&other.num), lcm)
    }

    pub fn add(&self, other: &Rational<N>) -> Rational<N> {
        let (a, b, den) = self.aligned(other);
        Rational { num: a.add(&b), den }
    }

    pub fn sub(&self, other: &Rational<N>) -> Rational<N> {
        let (a, b, den) = self.aligned(other);
        Rational { num: a.sub(&b), den }
    }

    pub fn mul(&self, other: &Rational<N>) -> Rational<N> {
        Rational {
            num: self.num.mul(&other.num),
            den: self.den.mul(&other.den),
        }
    }

    pub fn mul_num(&self, f: &N) -> Rational<N> {
        Rational {
            num: self.num.mul(f),
            den: self.den.clone(),
        }
    }

    /// Multiplication by a one-angle rational in the given angle.
    pub fn mul_var(&self, var: Var, f: &TrigRational) -> Rational<N> {
        let den = if var == Var::P {
            f.den.clone()
        } else {
            f.den.swap()
        };
        Rational {
            num: self.num.mul_var(var, &f.num),
            den: self.den.mul(&den),
        }
    }

    /// Derivative in one angle via the factored quotient rule:
    /// `(N / Π F^e)' = (N'·Π F - N·Σ e_j F_j' Π_{l≠j} F_l) / Π F^{e+1}`.
    pub fn diff(&self, var: Var) -> Rational<N> {
        let dn = self.num.diff_var(var);
        let idx: Vec<usize> = (0..self.den.factors.len())
            .filter(|&j| self.den.factors[j].var == var)
            .collect();
        if idx.is_empty() {
            return Rational {
                num: dn,
                den: self.den.clone(),
            };
        }
        let mode = self.mode();
        let mut first = dn;
        for &j in &idx {
            first = first.mul_var(var, &self.den.factors[j].poly);
        }
        let mut second = self.num.zero_like();
        for &j in &idx {
            let fj = &self.den.factors[j];
            let mut term = self
                .num
                .mul_var(var, &fj.poly.diff())
                .scale(&Scalar::from_i64(fj.exp as i64, mode));
            for &l in idx.iter().filter(|&&l| l != j) {
                term = term.mul_var(var, &self.den.factors[l].poly);
            }
            second = second.add(&term);
        }
        let mut den = self.den.clone();
        for &j in &idx {
            den.factors[j].exp += 1;
        }
        Rational {
            num: first.sub(&second),
            den,
        }
    }

    /// Equality by cross-multiplication over the common denominator.
    pub fn approx_eq(&self, other: &Rational<N>) -> bool {
        let (a, b, _) = self.aligned(other);
        a.approx_eq(&b)
    }

    /// The difference numerator over the common denominator; empty iff equal.
    pub fn difference(&self, other: &Rational<N>) -> Rational<N> {
        self.sub(other)
    }

    /// Cancels denominator factors that divide the numerator exactly.
    pub fn reduce(&self) -> Rational<N> {
        if self.num.is_zero() {
            return Rational::from_num(self.num.clone());
        }
        let mut num = self.num.clone();
        let mut den = Denominator::one();
        for f in &self.den.factors {
            let mut left = f.exp;
            while left > 0 {
                match num.div_exact_var(f.var, &f.poly) {
                    Some(q) => {
                        num = q;
                        left -= 1;
                    }
                    None => break,
                }
            }
            if left > 0 {
                den.insert(Factor::new(f.var, f.poly.clone(), left));
            }
        }
        Rational { num, den }
    }

    pub fn eval_f64(&self, p: f64, q: f64) -> f64 {
        self.num.eval(p, q) / self.den.eval(p, q)
    }

    /// Guarded evaluation: fails when some denominator factor satisfies
    /// `|F(θ)| ≤ guard·‖F‖₁`.
    pub fn eval_guarded(&self, p: f64, q: f64, guard: f64) -> Result<f64> {
        let rel = self.den.relative_magnitude(p, q);
        if rel <= guard {
            return Err(Error::NearSingularEvaluation {
                magnitude: rel,
                nearest_zero_distance: None,
            });
        }
        Ok(self.eval_f64(p, q))
    }

    pub fn to_text(&self) -> String {
        let num = self.num.text();
        if self.den.is_one() {
            return num;
        }
        let num = if self.num.term_count() > 1 {
            format!("({num})")
        } else {
            num
        };
        format!("{num}/({})", self.den.to_text())
    }
}

impl TrigRational {
    /// Division `self / other`; `other` must not be the zero function.
    pub fn div(&self, other: &TrigRational) -> Result<TrigRational> {
        if other.num.is_zero() {
            return Err(Error::DivisionByZeroFunction);
        }
        let (lc, d) = Denominator::from_poly(Var::P, &other.num, 1)?;
        let inv = Scalar::one(self.mode()).checked_div(&lc)?;
        Ok(Rational {
            num: other.den.apply_to(&self.num).scale(&inv),
            den: self.den.mul(&d),
        })
    }

    pub fn derivative(&self) -> TrigRational {
        self.diff(Var::P)
    }

    pub fn eval(&self, theta: f64, den_guard: f64) -> Result<f64> {
        self.eval_guarded(theta, 0.0, den_guard)
    }

    /// Exact value at the unit-circle point `(cos θ, sin θ) = (c, s)`.
    pub fn eval_unit_point(&self, c: &Scalar, s: &Scalar) -> Result<Scalar> {
        let mut den = Scalar::one(self.mode());
        for f in &self.den.factors {
            den = &den * &f.poly.eval_unit_point(c, s).pow(f.exp);
        }
        self.num.eval_unit_point(c, s).checked_div(&den)
    }

    /// The same function viewed as a two-angle rational in `φ` or `ϕ`.
    pub fn lift(&self, var: Var) -> TrigRational2 {
        let num = match var {
            Var::P => TrigPoly2::from_p(&self.num),
            Var::Q => TrigPoly2::from_q(&self.num),
        };
        let den = if var == Var::P {
            self.den.clone()
        } else {
            self.den.swap()
        };
        Rational { num, den }
    }
}

impl TrigRational2 {
    /// `a(φ)·b(ϕ)` for one-angle rationals.
    pub fn separable(a: &TrigRational, b: &TrigRational) -> TrigRational2 {
        Rational {
            num: TrigPoly2::separable(&a.num, &b.num),
            den: a.den.mul(&b.den.swap()),
        }
    }

    /// Exchanges `φ` and `ϕ`.
    pub fn swap(&self) -> TrigRational2 {
        Rational {
            num: self.num.swap(),
            den: self.den.swap(),
        }
    }

    pub fn parse(num: &str, den: &str, mode: Mode) -> Result<TrigRational2> {
        let n = TrigPoly2::parse(num, mode)?;
        let (lc, d) = Denominator::parse(den, mode)?;
        let inv = Scalar::one(mode).checked_div(&lc)?;
        Ok(Rational {
            num: n.scale(&inv),
            den: d,
        })
    }
}

impl<N: Numerator> fmt::Display for Rational<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
