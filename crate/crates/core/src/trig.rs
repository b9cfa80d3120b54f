//! Finite Fourier sums in one angle.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::{Mode, Scalar};

/// A basis function `cos(n·θ)` or `sin(n·θ)`. `Sin(0)` is never stored.
///
/// The derived order (all cosines by frequency, then all sines) is the
/// canonical term order used everywhere, including the text format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Basis {
    Cos(u32),
    Sin(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Cos,
    Sin,
}

impl Basis {
    pub const ONE: Basis = Basis::Cos(0);

    pub fn freq(self) -> u32 {
        match self {
            Basis::Cos(n) | Basis::Sin(n) => n,
        }
    }

    pub fn eval(self, theta: f64) -> f64 {
        match self {
            Basis::Cos(n) => (n as f64 * theta).cos(),
            Basis::Sin(n) => (n as f64 * theta).sin(),
        }
    }

    /// Derivative `d/dθ` as `(basis, factor)`; `None` for the constant.
    pub fn diff(self) -> Option<(Basis, i64)> {
        match self {
            Basis::Cos(0) => None,
            Basis::Cos(n) => Some((Basis::Sin(n), -(n as i64))),
            Basis::Sin(n) => Some((Basis::Cos(n), n as i64)),
        }
    }
}

/// Product-to-sum: `a·b = (s₁·b₁ + s₂·b₂)/2`. A zero sign marks a vanishing slot.
pub(crate) fn basis_mul(a: Basis, b: Basis) -> [(Basis, i8); 2] {
    use Basis::*;
    let diff = |x: u32, y: u32| x.abs_diff(y);
    match (a, b) {
        (Cos(x), Cos(y)) => [(Cos(diff(x, y)), 1), (Cos(x + y), 1)],
        (Sin(x), Sin(y)) => [(Cos(diff(x, y)), 1), (Cos(x + y), -1)],
        // sin x cos y = (sin(x+y) + sin(x-y))/2
        (Sin(x), Cos(y)) => [(Sin(x + y), 1), sin_signed(x as i64 - y as i64)],
        // cos x sin y = (sin(x+y) - sin(x-y))/2
        (Cos(x), Sin(y)) => [(Sin(x + y), 1), sin_signed(y as i64 - x as i64)],
    }
}

fn sin_signed(n: i64) -> (Basis, i8) {
    match n.signum() {
        0 => (Basis::Sin(0), 0),
        1 => (Basis::Sin(n as u32), 1),
        _ => (Basis::Sin((-n) as u32), -1),
    }
}

pub(crate) fn accumulate<K: Ord>(map: &mut BTreeMap<K, Scalar>, key: K, value: Scalar) {
    if value.is_zero() {
        return;
    }
    use std::collections::btree_map::Entry;
    match map.entry(key) {
        Entry::Vacant(e) => {
            e.insert(value);
        }
        Entry::Occupied(mut e) => {
            let sum = e.get() + &value;
            if sum.is_zero() {
                e.remove();
            } else {
                *e.get_mut() = sum;
            }
        }
    }
}

/// A trigonometric polynomial `Σ a_n cos nθ + Σ b_n sin nθ` in canonical form:
/// no zero coefficients, no `sin 0` term.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    mode: Mode,
    terms: BTreeMap<Basis, Scalar>,
}

impl TrigPoly {
    pub fn zero(mode: Mode) -> TrigPoly {
        TrigPoly {
            mode,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Scalar) -> TrigPoly {
        TrigPoly::monomial(Basis::ONE, c)
    }

    pub fn one(mode: Mode) -> TrigPoly {
        TrigPoly::constant(Scalar::one(mode))
    }

    pub fn cos(n: u32, mode: Mode) -> TrigPoly {
        TrigPoly::monomial(Basis::Cos(n), Scalar::one(mode))
    }

    pub fn sin(n: u32, mode: Mode) -> TrigPoly {
        TrigPoly::monomial(Basis::Sin(n), Scalar::one(mode))
    }

    pub fn monomial(b: Basis, c: Scalar) -> TrigPoly {
        let mut p = TrigPoly::zero(c.mode());
        if b != Basis::Sin(0) {
            accumulate(&mut p.terms, b, c);
        }
        p
    }

    /// Builds a canonical polynomial from `(kind, frequency, coefficient)` triples.
    /// Negative frequencies are folded: `cos(-nθ) = cos nθ`, `sin(-nθ) = -sin nθ`.
    pub fn make(mode: Mode, terms: &[(Kind, i64, Scalar)]) -> Result<TrigPoly> {
        let mut p = TrigPoly::zero(mode);
        for (kind, freq, c) in terms {
            if c.mode() != mode {
                return Err(Error::ModeMismatch {
                    left: mode,
                    right: c.mode(),
                });
            }
            let n = freq.unsigned_abs() as u32;
            match kind {
                Kind::Cos => accumulate(&mut p.terms, Basis::Cos(n), c.clone()),
                Kind::Sin if n == 0 => {
                    if !c.is_zero() {
                        return Err(Error::SinZeroFrequency);
                    }
                }
                Kind::Sin if *freq < 0 => accumulate(&mut p.terms, Basis::Sin(n), -c),
                Kind::Sin => accumulate(&mut p.terms, Basis::Sin(n), c.clone()),
            }
        }
        Ok(p)
    }

    pub(crate) fn from_terms(mode: Mode, terms: BTreeMap<Basis, Scalar>) -> TrigPoly {
        TrigPoly { mode, terms }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn terms(&self) -> impl Iterator<Item = (Basis, &Scalar)> + '_ {
        self.terms.iter().map(|(b, c)| (*b, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, b: Basis) -> Scalar {
        self.terms
            .get(&b)
            .cloned()
            .unwrap_or_else(|| Scalar::zero(self.mode))
    }

    /// Canonical zero test: no stored terms.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|b| *b == Basis::ONE)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|b| b.freq()).max().unwrap_or(0)
    }

    /// The last term in canonical order.
    pub fn leading(&self) -> Option<(Basis, &Scalar)> {
        self.terms.iter().next_back().map(|(b, c)| (*b, c))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.to_f64().abs())
            .fold(0.0, f64::max)
    }

    /// Zero test relative to a reference magnitude (exact mode: canonical test).
    pub fn is_negligible(&self, scale: f64) -> bool {
        match self.mode {
            Mode::Exact => self.is_zero(),
            m => {
                let tol = m.zero_tolerance() * scale.max(f64::MIN_POSITIVE);
                self.terms.values().all(|c| c.to_f64().abs() < tol)
            }
        }
    }

    /// Equality: canonical in exact mode, coefficient-wise within the
    /// scale-aware tolerance in float mode.
    pub fn approx_eq(&self, other: &TrigPoly) -> bool {
        if self.mode != other.mode {
            return false;
        }
        match self.mode {
            Mode::Exact => self == other,
            _ => {
                let scale = self.max_abs_coeff().max(other.max_abs_coeff());
                (self - other).is_negligible(scale)
            }
        }
    }

    fn check(&self, other: &TrigPoly) -> Result<()> {
        if self.mode == other.mode {
            Ok(())
        } else {
            Err(Error::ModeMismatch {
                left: self.mode,
                right: other.mode,
            })
        }
    }

    pub fn try_add(&self, other: &TrigPoly) -> Result<TrigPoly> {
        self.check(other)?;
        Ok(self + other)
    }

    pub fn try_sub(&self, other: &TrigPoly) -> Result<TrigPoly> {
        self.check(other)?;
        Ok(self - other)
    }

    pub fn try_mul(&self, other: &TrigPoly) -> Result<TrigPoly> {
        self.check(other)?;
        Ok(self * other)
    }

    pub fn scale(&self, c: &Scalar) -> TrigPoly {
        assert_eq!(c.mode(), self.mode, "scalar mode mismatch");
        if c.is_zero() {
            return TrigPoly::zero(self.mode);
        }
        TrigPoly {
            mode: self.mode,
            terms: self.terms.iter().map(|(b, v)| (*b, v * c)).collect(),
        }
    }

    pub fn scale_i64(&self, k: i64) -> TrigPoly {
        if k == 0 {
            return TrigPoly::zero(self.mode);
        }
        TrigPoly {
            mode: self.mode,
            terms: self.terms.iter().map(|(b, v)| (*b, v.mul_i64(k))).collect(),
        }
    }

    pub fn diff(&self) -> TrigPoly {
        let mut out = BTreeMap::new();
        for (b, c) in &self.terms {
            if let Some((db, k)) = b.diff() {
                out.insert(db, c.mul_i64(k));
            }
        }
        TrigPoly {
            mode: self.mode,
            terms: out,
        }
    }

    pub fn diff_n(&self, order: u32) -> TrigPoly {
        (0..order).fold(self.clone(), |p, _| p.diff())
    }

    pub fn pow(&self, e: u32) -> TrigPoly {
        let mut acc = TrigPoly::one(self.mode);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn eval_f64(&self, theta: f64) -> f64 {
        self.terms.iter().map(|(b, c)| c.to_f64() * b.eval(theta)).sum()
    }

    /// Exact evaluation at the unit-circle point `(cos θ, sin θ) = (c, s)`
    /// via `cos nθ + i sin nθ = (c + i s)^n`.
    pub fn eval_unit_point(&self, c: &Scalar, s: &Scalar) -> Scalar {
        let mode = self.mode;
        let mut acc = Scalar::zero(mode);
        let top = self.degree();
        let (mut re, mut im) = (Scalar::one(mode), Scalar::zero(mode));
        for n in 0..=top {
            if let Some(a) = self.terms.get(&Basis::Cos(n)) {
                acc = &acc + &(a * &re);
            }
            if let Some(b) = self.terms.get(&Basis::Sin(n)) {
                acc = &acc + &(b * &im);
            }
            let nre = &(&re * c) - &(&im * s);
            let nim = &(&re * s) + &(&im * c);
            re = nre;
            im = nim;
        }
        acc
    }

    /// Drops float coefficients that are negligible relative to the largest
    /// one (rounding residue of cancellations). Identity in exact mode.
    pub fn cleaned(&self) -> TrigPoly {
        if self.mode.is_exact() {
            return self.clone();
        }
        let tol = self.mode.zero_tolerance() * self.max_abs_coeff();
        TrigPoly {
            mode: self.mode,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.to_f64().abs() >= tol)
                .map(|(b, c)| (*b, c.clone()))
                .collect(),
        }
    }

    /// Leading-coefficient normalization: returns `(lc, self / lc)`.
    pub fn monic(&self) -> Option<(Scalar, TrigPoly)> {
        let cleaned = self.cleaned();
        let (_, lc) = cleaned.leading()?;
        let lc = lc.clone();
        let inv = &Scalar::one(self.mode) / &lc;
        Some((lc, cleaned.scale(&inv)))
    }

    /// Exact quotient `self / d` when `d` divides `self`, else `None`.
    pub fn div_exact(&self, d: &TrigPoly) -> Option<TrigPoly> {
        crate::laurent::div_exact(self, d)
    }

    /// Canonical text with the angle written as `var`, e.g. `1/2 + 1/2*cos(2p)`.
    pub fn to_text(&self, var: char) -> String {
        crate::text::poly_to_text(self.terms.iter().map(|(b, c)| (vec![(*b, var)], c)))
    }
}

impl fmt::Display for TrigPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text('p'))
    }
}

fn assert_same(a: Mode, b: Mode) {
    if a != b {
        panic!("trig polynomial mode mismatch: {a} vs {b}");
    }
}

impl<'a> Add<&'a TrigPoly> for &'a TrigPoly {
    type Output = TrigPoly;
    fn add(self, rhs: &'a TrigPoly) -> TrigPoly {
        assert_same(self.mode, rhs.mode);
        let mut terms = self.terms.clone();
        for (b, c) in &rhs.terms {
            accumulate(&mut terms, *b, c.clone());
        }
        TrigPoly {
            mode: self.mode,
            terms,
        }
    }
}

impl<'a> Sub<&'a TrigPoly> for &'a TrigPoly {
    type Output = TrigPoly;
    fn sub(self, rhs: &'a TrigPoly) -> TrigPoly {
        assert_same(self.mode, rhs.mode);
        let mut terms = self.terms.clone();
        for (b, c) in &rhs.terms {
            accumulate(&mut terms, *b, -c);
        }
        TrigPoly {
            mode: self.mode,
            terms,
        }
    }
}

impl<'a> Mul<&'a TrigPoly> for &'a TrigPoly {
    type Output = TrigPoly;
    fn mul(self, rhs: &'a TrigPoly) -> TrigPoly {
        assert_same(self.mode, rhs.mode);
        // Accumulate twice the product, halve once at the end.
        let mut doubled = BTreeMap::new();
        for (ba, ca) in &self.terms {
            for (bb, cb) in &rhs.terms {
                let prod = ca * cb;
                for (b, sign) in basis_mul(*ba, *bb) {
                    match sign {
                        0 => {}
                        1 => accumulate(&mut doubled, b, prod.clone()),
                        _ => accumulate(&mut doubled, b, -&prod),
                    }
                }
            }
        }
        TrigPoly {
            mode: self.mode,
            terms: doubled.into_iter().map(|(b, c)| (b, c.half())).collect(),
        }
    }
}

impl Neg for &TrigPoly {
    type Output = TrigPoly;
    fn neg(self) -> TrigPoly {
        TrigPoly {
            mode: self.mode,
            terms: self.terms.iter().map(|(b, c)| (*b, -c)).collect(),
        }
    }
}

macro_rules! owned_ops {
    ($t:ty) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, rhs: $t) -> $t {
                &self + &rhs
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, rhs: $t) -> $t {
                &self - &rhs
            }
        }
        impl Mul for $t {
            type Output = $t;
            fn mul(self, rhs: $t) -> $t {
                &self * &rhs
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                -&self
            }
        }
    };
}
pub(crate) use owned_ops;

owned_ops!(TrigPoly);

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    const E: Mode = Mode::Exact;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    #[test]
    fn make_examples() {
        let one = TrigPoly::make(E, &[(Kind::Cos, 0, q(1, 1))]).unwrap();
        assert_eq!(one, TrigPoly::one(E));

        let zero = TrigPoly::make(E, &[(Kind::Cos, 2, q(1, 1)), (Kind::Cos, 2, q(-1, 1))]).unwrap();
        assert!(zero.is_zero());

        // cos(φ + φ₀) = cos φ₀ cos φ - sin φ₀ sin φ
        let shifted =
            TrigPoly::make(E, &[(Kind::Cos, 1, q(3, 5)), (Kind::Sin, 1, q(-4, 5))]).unwrap();
        let theta = 0.37f64;
        let phase = (4.0f64 / 5.0).atan2(3.0 / 5.0);
        assert!((shifted.eval_f64(theta) - (theta + phase).cos()).abs() < 1e-15);
    }

    #[test]
    fn make_rejects_bad_input() {
        assert_eq!(
            TrigPoly::make(E, &[(Kind::Sin, 0, q(1, 1))]),
            Err(Error::SinZeroFrequency)
        );
        let f = Scalar::one(Mode::Float { bits: 64 });
        assert!(matches!(
            TrigPoly::make(E, &[(Kind::Cos, 1, f)]),
            Err(Error::ModeMismatch { .. })
        ));
        let folded = TrigPoly::make(E, &[(Kind::Sin, -2, q(1, 1)), (Kind::Cos, -3, q(1, 1))]).unwrap();
        assert_eq!(folded, &TrigPoly::cos(3, E) - &TrigPoly::sin(2, E));
    }

    #[test]
    fn addition_examples() {
        let c = TrigPoly::cos(1, E);
        assert_eq!(&c + &c, c.scale_i64(2));
        assert!((&c + &(-&c)).is_zero());
        let a = &TrigPoly::one(E) + &TrigPoly::cos(2, E);
        let b = &TrigPoly::one(E) - &TrigPoly::cos(2, E);
        assert_eq!(&a + &b, TrigPoly::constant(q(2, 1)));
    }

    #[test]
    fn product_to_sum_examples() {
        let c1 = TrigPoly::cos(1, E);
        let s1 = TrigPoly::sin(1, E);
        let half = |b: Basis| TrigPoly::monomial(b, q(1, 2));
        assert_eq!(&c1 * &c1, &half(Basis::ONE) + &half(Basis::Cos(2)));
        assert_eq!(&s1 * &c1, half(Basis::Sin(2)));
        assert_eq!(
            &TrigPoly::cos(3, E) * &TrigPoly::cos(4, E),
            &half(Basis::Cos(1)) + &half(Basis::Cos(7))
        );
        assert_eq!((&c1 * &c1).to_string(), "1/2 + 1/2*cos(2p)");
    }

    #[test]
    fn derivative_examples() {
        let k = 5;
        let c = TrigPoly::cos(k, E);
        assert_eq!(c.diff(), TrigPoly::sin(k, E).scale_i64(-(k as i64)));
        assert_eq!(c.diff_n(2), c.scale_i64(-(k as i64) * k as i64));
        assert!(TrigPoly::constant(q(7, 3)).diff().is_zero());
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(TrigPoly::cos(2, E).eval_f64(0.0), 1.0);
        assert!((TrigPoly::sin(1, E).eval_f64(std::f64::consts::FRAC_PI_2) - 1.0).abs() < 1e-15);
        // Wr[1, cos φ] = -sin φ
        let w = -&TrigPoly::sin(1, E);
        let v = w.eval_f64(std::f64::consts::FRAC_PI_3);
        assert!((v + 0.8660254037844386).abs() < 1e-15);
    }

    #[test]
    fn exact_unit_point_evaluation() {
        // cos θ = 3/5, sin θ = 4/5: cos 2θ = -7/25, sin 2θ = 24/25
        let p = &TrigPoly::cos(2, E) + &TrigPoly::sin(2, E).scale_i64(2);
        assert_eq!(p.eval_unit_point(&q(3, 5), &q(4, 5)), q(-7 + 48, 25));
    }

    #[test]
    fn float_mode_tolerant_equality() {
        let m = Mode::Float { bits: 128 };
        let a = TrigPoly::make(m, &[(Kind::Cos, 1, Scalar::from_f64(1.0, 128))]).unwrap();
        let tiny = TrigPoly::make(m, &[(Kind::Sin, 3, Scalar::from_f64(1e-40, 128))]).unwrap();
        assert!(a.approx_eq(&(&a + &tiny)));
        let big = TrigPoly::make(m, &[(Kind::Sin, 3, Scalar::from_f64(1e-20, 128))]).unwrap();
        assert!(!a.approx_eq(&(&a + &big)));
    }

    pub(crate) fn arb_poly() -> impl Strategy<Value = TrigPoly> {
        prop::collection::vec((any::<bool>(), 0u32..6, -5i64..=5, 1i64..=4), 0..6).prop_map(|ts| {
            let terms: Vec<_> = ts
                .into_iter()
                .filter(|(sin, n, _, _)| !(*sin && *n == 0))
                .map(|(sin, n, a, b)| {
                    (if sin { Kind::Sin } else { Kind::Cos }, n as i64, Scalar::ratio(a, b))
                })
                .collect();
            TrigPoly::make(Mode::Exact, &terms).unwrap()
        })
    }

    fn arb_unit_point() -> impl Strategy<Value = (Scalar, Scalar)> {
        // Rational points on the unit circle from Pythagorean parametrization.
        (-20i64..=20, 1i64..=20).prop_map(|(t, u)| {
            let d = t * t + u * u;
            (Scalar::ratio(u * u - t * t, d), Scalar::ratio(2 * t * u, d))
        })
    }

    proptest! {
        #[test]
        fn evaluation_is_a_ring_homomorphism(a in arb_poly(), b in arb_poly(), (c, s) in arb_unit_point()) {
            let sum = (&a + &b).eval_unit_point(&c, &s);
            let prod = (&a * &b).eval_unit_point(&c, &s);
            let ea = a.eval_unit_point(&c, &s);
            let eb = b.eval_unit_point(&c, &s);
            prop_assert_eq!(sum, &ea + &eb);
            prop_assert_eq!(prod, &ea * &eb);
        }

        #[test]
        fn leibniz_rule(a in arb_poly(), b in arb_poly()) {
            let lhs = (&a * &b).diff();
            let rhs = &(&a.diff() * &b) + &(&a * &b.diff());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn make_is_idempotent_on_canonical_forms(a in arb_poly()) {
            let terms: Vec<_> = a.terms().map(|(b, c)| match b {
                Basis::Cos(n) => (Kind::Cos, n as i64, c.clone()),
                Basis::Sin(n) => (Kind::Sin, n as i64, c.clone()),
            }).collect();
            prop_assert_eq!(TrigPoly::make(Mode::Exact, &terms).unwrap(), a);
        }
    }
}
