//! Trigonometric polynomials in two angles `(φ, ϕ)`, written `p` and `q`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::{Mode, Scalar};
use crate::trig::{accumulate, basis_mul, owned_ops, Basis, TrigPoly};

/// Tensor-basis sum `Σ c · b₁(φ) · b₂(ϕ)` in canonical form.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly2 {
    mode: Mode,
    terms: BTreeMap<(Basis, Basis), Scalar>,
}

impl TrigPoly2 {
    pub fn zero(mode: Mode) -> TrigPoly2 {
        TrigPoly2 {
            mode,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(mode: Mode) -> TrigPoly2 {
        TrigPoly2::constant(Scalar::one(mode))
    }

    pub fn constant(c: Scalar) -> TrigPoly2 {
        let mut t = TrigPoly2::zero(c.mode());
        accumulate(&mut t.terms, (Basis::ONE, Basis::ONE), c);
        t
    }

    pub fn monomial(bp: Basis, bq: Basis, c: Scalar) -> TrigPoly2 {
        let mut t = TrigPoly2::zero(c.mode());
        if bp != Basis::Sin(0) && bq != Basis::Sin(0) {
            accumulate(&mut t.terms, (bp, bq), c);
        }
        t
    }

    /// `a(φ)·b(ϕ)`.
    pub fn separable(a: &TrigPoly, b: &TrigPoly) -> TrigPoly2 {
        assert_eq!(a.mode(), b.mode(), "mode mismatch");
        let mut t = TrigPoly2::zero(a.mode());
        for (ba, ca) in a.terms() {
            for (bb, cb) in b.terms() {
                accumulate(&mut t.terms, (ba, bb), ca * cb);
            }
        }
        t
    }

    pub fn try_separable(a: &TrigPoly, b: &TrigPoly) -> Result<TrigPoly2> {
        if a.mode() != b.mode() {
            return Err(Error::ModeMismatch {
                left: a.mode(),
                right: b.mode(),
            });
        }
        Ok(TrigPoly2::separable(a, b))
    }

    pub fn from_p(a: &TrigPoly) -> TrigPoly2 {
        TrigPoly2::separable(a, &TrigPoly::one(a.mode()))
    }

    pub fn from_q(b: &TrigPoly) -> TrigPoly2 {
        TrigPoly2::separable(&TrigPoly::one(b.mode()), b)
    }

    /// `cos(k(φ - ϕ)) = cos kφ cos kϕ + sin kφ sin kϕ`.
    pub fn cos_difference(k: u32, mode: Mode) -> TrigPoly2 {
        let one = Scalar::one(mode);
        if k == 0 {
            return TrigPoly2::one(mode);
        }
        let mut t = TrigPoly2::zero(mode);
        accumulate(&mut t.terms, (Basis::Cos(k), Basis::Cos(k)), one.clone());
        accumulate(&mut t.terms, (Basis::Sin(k), Basis::Sin(k)), one);
        t
    }

    /// `sin(k(φ - ϕ)) = sin kφ cos kϕ - cos kφ sin kϕ`.
    pub fn sin_difference(k: u32, mode: Mode) -> TrigPoly2 {
        let one = Scalar::one(mode);
        let mut t = TrigPoly2::zero(mode);
        if k == 0 {
            return t;
        }
        accumulate(&mut t.terms, (Basis::Sin(k), Basis::Cos(k)), one.clone());
        accumulate(&mut t.terms, (Basis::Cos(k), Basis::Sin(k)), -one);
        t
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn terms(&self) -> impl Iterator<Item = ((Basis, Basis), &Scalar)> + '_ {
        self.terms.iter().map(|(b, c)| (*b, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value when the polynomial has no angular dependence.
    pub fn as_constant(&self) -> Option<Scalar> {
        match self.terms.len() {
            0 => Some(Scalar::zero(self.mode)),
            1 => self.terms.get(&(Basis::ONE, Basis::ONE)).cloned(),
            _ => None,
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.to_f64().abs())
            .fold(0.0, f64::max)
    }

    pub fn is_negligible(&self, scale: f64) -> bool {
        match self.mode {
            Mode::Exact => self.is_zero(),
            m => {
                let tol = m.zero_tolerance() * scale.max(f64::MIN_POSITIVE);
                self.terms.values().all(|c| c.to_f64().abs() < tol)
            }
        }
    }

    pub fn approx_eq(&self, other: &TrigPoly2) -> bool {
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

    pub fn scale(&self, c: &Scalar) -> TrigPoly2 {
        if c.is_zero() {
            return TrigPoly2::zero(self.mode);
        }
        TrigPoly2 {
            mode: self.mode,
            terms: self.terms.iter().map(|(b, v)| (*b, v * c)).collect(),
        }
    }

    pub fn scale_i64(&self, k: i64) -> TrigPoly2 {
        if k == 0 {
            return TrigPoly2::zero(self.mode);
        }
        TrigPoly2 {
            mode: self.mode,
            terms: self.terms.iter().map(|(b, v)| (*b, v.mul_i64(k))).collect(),
        }
    }

    /// Multiplication by a one-angle polynomial in `φ` (`on_q = false`) or `ϕ`.
    fn mul_one_angle(&self, a: &TrigPoly, on_q: bool) -> TrigPoly2 {
        assert_eq!(self.mode, a.mode(), "mode mismatch");
        let mut doubled = BTreeMap::new();
        for (&(bp, bq), c) in &self.terms {
            for (ba, ca) in a.terms() {
                let prod = c * ca;
                let own = if on_q { bq } else { bp };
                for (b, sign) in basis_mul(own, ba) {
                    let key = if on_q { (bp, b) } else { (b, bq) };
                    match sign {
                        0 => {}
                        1 => accumulate(&mut doubled, key, prod.clone()),
                        _ => accumulate(&mut doubled, key, -&prod),
                    }
                }
            }
        }
        TrigPoly2 {
            mode: self.mode,
            terms: doubled.into_iter().map(|(k, c)| (k, c.half())).collect(),
        }
    }

    pub fn mul_p(&self, a: &TrigPoly) -> TrigPoly2 {
        self.mul_one_angle(a, false)
    }

    pub fn mul_q(&self, b: &TrigPoly) -> TrigPoly2 {
        self.mul_one_angle(b, true)
    }

    pub fn try_mul(&self, other: &TrigPoly2) -> Result<TrigPoly2> {
        if self.mode != other.mode {
            return Err(Error::ModeMismatch {
                left: self.mode,
                right: other.mode,
            });
        }
        Ok(self * other)
    }

    pub fn diff_p(&self) -> TrigPoly2 {
        let mut terms = BTreeMap::new();
        for (&(bp, bq), c) in &self.terms {
            if let Some((db, k)) = bp.diff() {
                terms.insert((db, bq), c.mul_i64(k));
            }
        }
        TrigPoly2 {
            mode: self.mode,
            terms,
        }
    }

    pub fn diff_q(&self) -> TrigPoly2 {
        let mut terms = BTreeMap::new();
        for (&(bp, bq), c) in &self.terms {
            if let Some((db, k)) = bq.diff() {
                terms.insert((bp, db), c.mul_i64(k));
            }
        }
        TrigPoly2 {
            mode: self.mode,
            terms,
        }
    }

    /// Exchanges the roles of `φ` and `ϕ`.
    pub fn swap(&self) -> TrigPoly2 {
        TrigPoly2 {
            mode: self.mode,
            terms: self
                .terms
                .iter()
                .map(|(&(a, b), c)| ((b, a), c.clone()))
                .collect(),
        }
    }

    /// Substitution `ϕ := φ`.
    pub fn diagonal(&self) -> TrigPoly {
        let mut doubled = BTreeMap::new();
        for (&(bp, bq), c) in &self.terms {
            for (b, sign) in basis_mul(bp, bq) {
                match sign {
                    0 => {}
                    1 => accumulate(&mut doubled, b, c.clone()),
                    _ => accumulate(&mut doubled, b, -c),
                }
            }
        }
        TrigPoly::from_terms(
            self.mode,
            doubled.into_iter().map(|(b, c)| (b, c.half())).collect(),
        )
    }

    /// Groups terms by the `ϕ` basis: `Σ_b c_b(φ)·b(ϕ)`.
    pub fn by_q(&self) -> BTreeMap<Basis, TrigPoly> {
        let mut groups: BTreeMap<Basis, BTreeMap<Basis, Scalar>> = BTreeMap::new();
        for (&(bp, bq), c) in &self.terms {
            groups.entry(bq).or_default().insert(bp, c.clone());
        }
        groups
            .into_iter()
            .map(|(b, t)| (b, TrigPoly::from_terms(self.mode, t)))
            .collect()
    }

    fn from_q_groups(mode: Mode, groups: BTreeMap<Basis, TrigPoly>) -> TrigPoly2 {
        let mut terms = BTreeMap::new();
        for (bq, poly) in groups {
            for (bp, c) in poly.terms() {
                terms.insert((bp, bq), c.clone());
            }
        }
        TrigPoly2 { mode, terms }
    }

    /// Exact division by a one-angle polynomial in `φ`.
    pub fn div_exact_p(&self, d: &TrigPoly) -> Option<TrigPoly2> {
        let mut out = BTreeMap::new();
        for (bq, c) in self.by_q() {
            out.insert(bq, c.div_exact(d)?);
        }
        Some(TrigPoly2::from_q_groups(self.mode, out))
    }

    /// Exact division by a one-angle polynomial in `ϕ`.
    pub fn div_exact_q(&self, d: &TrigPoly) -> Option<TrigPoly2> {
        Some(self.swap().div_exact_p(d)?.swap())
    }

    pub fn eval_f64(&self, p: f64, q: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(bp, bq), c)| c.to_f64() * bp.eval(p) * bq.eval(q))
            .sum()
    }

    pub fn to_text(&self) -> String {
        crate::text::poly_to_text(
            self.terms
                .iter()
                .map(|(&(bp, bq), c)| (vec![(bp, 'p'), (bq, 'q')], c)),
        )
    }

    pub fn parse(s: &str, mode: Mode) -> Result<TrigPoly2> {
        let mut out = TrigPoly2::zero(mode);
        for (c, bases) in crate::text::parse_terms(s, mode)? {
            let mut term = TrigPoly2::constant(c);
            for (b, var) in bases {
                let mono = TrigPoly::monomial(b, Scalar::one(mode));
                term = if var == 'p' {
                    term.mul_p(&mono)
                } else {
                    term.mul_q(&mono)
                };
            }
            out = &out + &term;
        }
        Ok(out)
    }
}

impl fmt::Display for TrigPoly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl<'a> Add<&'a TrigPoly2> for &'a TrigPoly2 {
    type Output = TrigPoly2;
    fn add(self, rhs: &'a TrigPoly2) -> TrigPoly2 {
        assert_eq!(self.mode, rhs.mode, "mode mismatch");
        let mut terms = self.terms.clone();
        for (b, c) in &rhs.terms {
            accumulate(&mut terms, *b, c.clone());
        }
        TrigPoly2 {
            mode: self.mode,
            terms,
        }
    }
}

impl<'a> Sub<&'a TrigPoly2> for &'a TrigPoly2 {
    type Output = TrigPoly2;
    fn sub(self, rhs: &'a TrigPoly2) -> TrigPoly2 {
        assert_eq!(self.mode, rhs.mode, "mode mismatch");
        let mut terms = self.terms.clone();
        for (b, c) in &rhs.terms {
            accumulate(&mut terms, *b, -c);
        }
        TrigPoly2 {
            mode: self.mode,
            terms,
        }
    }
}

impl<'a> Mul<&'a TrigPoly2> for &'a TrigPoly2 {
    type Output = TrigPoly2;
    fn mul(self, rhs: &'a TrigPoly2) -> TrigPoly2 {
        assert_eq!(self.mode, rhs.mode, "mode mismatch");
        // Four product-to-sum slots per pair, each carrying a factor 1/4.
        let mut quadrupled = BTreeMap::new();
        for (&(ap, aq), ca) in &self.terms {
            for (&(bp, bq), cb) in &rhs.terms {
                let prod = ca * cb;
                for (p, sp) in basis_mul(ap, bp) {
                    if sp == 0 {
                        continue;
                    }
                    for (q, sq) in basis_mul(aq, bq) {
                        match sp * sq {
                            0 => {}
                            1 => accumulate(&mut quadrupled, (p, q), prod.clone()),
                            _ => accumulate(&mut quadrupled, (p, q), -&prod),
                        }
                    }
                }
            }
        }
        TrigPoly2 {
            mode: self.mode,
            terms: quadrupled
                .into_iter()
                .map(|(k, c)| (k, c.half().half()))
                .collect(),
        }
    }
}

impl Neg for &TrigPoly2 {
    type Output = TrigPoly2;
    fn neg(self) -> TrigPoly2 {
        TrigPoly2 {
            mode: self.mode,
            terms: self.terms.iter().map(|(b, c)| (*b, -c)).collect(),
        }
    }
}

owned_ops!(TrigPoly2);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trig::tests::arb_poly;
    use proptest::prelude::*;

    const E: Mode = Mode::Exact;

    #[test]
    fn cos_difference_examples() {
        assert_eq!(TrigPoly2::cos_difference(0, E), TrigPoly2::one(E));
        let expected = &TrigPoly2::separable(&TrigPoly::cos(1, E), &TrigPoly::cos(1, E))
            + &TrigPoly2::separable(&TrigPoly::sin(1, E), &TrigPoly::sin(1, E));
        assert_eq!(TrigPoly2::cos_difference(1, E), expected);
        assert_eq!(TrigPoly2::cos_difference(1, E).to_text(), "cos(p)*cos(q) + sin(p)*sin(q)");
        for k in 0..8 {
            assert_eq!(TrigPoly2::cos_difference(k, E).diagonal(), TrigPoly::one(E));
        }
    }

    #[test]
    fn text_round_trip() {
        let t = &TrigPoly2::cos_difference(3, E).scale(&Scalar::ratio(-2, 7))
            + &TrigPoly2::from_q(&TrigPoly::sin(2, E));
        let s = t.to_text();
        assert_eq!(TrigPoly2::parse(&s, E).unwrap(), t);
    }

    #[test]
    fn divides_by_one_angle_factors() {
        let a = TrigPoly::sin(1, E);
        let t = &TrigPoly2::cos_difference(2, E) + &TrigPoly2::from_p(&TrigPoly::cos(1, E));
        let prod = t.mul_p(&a).mul_q(&a);
        let back = prod.div_exact_p(&a).unwrap().div_exact_q(&a).unwrap();
        assert_eq!(back, t);
        assert!(t.div_exact_p(&a).is_none());
    }

    proptest! {
        #[test]
        fn diagonal_matches_two_angle_evaluation(a in arb_poly(), b in arb_poly(), c in arb_poly(), th in -3.0f64..3.0) {
            let t = &TrigPoly2::separable(&a, &b) + &TrigPoly2::cos_difference(3, E).mul_q(&c);
            let lhs = t.diagonal().eval_f64(th);
            let rhs = t.eval_f64(th, th);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
        }

        #[test]
        fn products_factor_through_evaluation(a in arb_poly(), b in arb_poly(), c in arb_poly(), d in arb_poly(),
                                               p in -3.0f64..3.0, q in -3.0f64..3.0) {
            let s = TrigPoly2::separable(&a, &b);
            let t = TrigPoly2::separable(&c, &d);
            let prod = (&s * &t).eval_f64(p, q);
            let expect = s.eval_f64(p, q) * t.eval_f64(p, q);
            prop_assert!((prod - expect).abs() <= 1e-9 * (1.0 + expect.abs()));
            prop_assert_eq!(s.mul_p(&c), &s * &TrigPoly2::from_p(&c));
        }
    }
}
