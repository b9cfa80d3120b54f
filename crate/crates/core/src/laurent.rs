//! Exact division of trigonometric polynomials.
//!
//! A real trigonometric polynomial of degree `n` is `z^{-n}·A(z)` with
//! `z = e^{iθ}` and `A` an ordinary polynomial of degree `2n` over the
//! Gaussian rationals. Division is ordinary long division of the `A`s;
//! the quotient is accepted only if multiplying back reproduces the dividend.

use crate::scalar::{Mode, Scalar};
use crate::trig::{Basis, TrigPoly};

#[derive(Clone, Debug)]
struct Complex {
    re: Scalar,
    im: Scalar,
}

impl Complex {
    fn zero(mode: Mode) -> Complex {
        Complex {
            re: Scalar::zero(mode),
            im: Scalar::zero(mode),
        }
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn mul(&self, o: &Complex) -> Complex {
        Complex {
            re: &(&self.re * &o.re) - &(&self.im * &o.im),
            im: &(&self.re * &o.im) + &(&self.im * &o.re),
        }
    }

    fn sub(&self, o: &Complex) -> Complex {
        Complex {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }

    fn div(&self, o: &Complex) -> Complex {
        let norm = &(&o.re * &o.re) + &(&o.im * &o.im);
        let re = &(&self.re * &o.re) + &(&self.im * &o.im);
        let im = &(&self.im * &o.re) - &(&self.re * &o.im);
        Complex {
            re: &re / &norm,
            im: &im / &norm,
        }
    }
}

/// Coefficients of `A(z) = z^n·P(z)`, index `j + n` holding the `z^j` coefficient of `P`.
fn to_laurent(p: &TrigPoly, n: u32) -> Vec<Complex> {
    let mode = p.mode();
    let n = n as usize;
    let mut a = vec![Complex::zero(mode); 2 * n + 1];
    for (b, c) in p.terms() {
        let j = b.freq() as usize;
        match b {
            Basis::Cos(0) => a[n].re = &a[n].re + c,
            Basis::Cos(_) => {
                let h = c.half();
                a[n + j].re = &a[n + j].re + &h;
                a[n - j].re = &a[n - j].re + &h;
            }
            Basis::Sin(_) => {
                // b sin jθ = z^j (-ib/2) + z^{-j} (ib/2)
                let h = c.half();
                a[n + j].im = &a[n + j].im - &h;
                a[n - j].im = &a[n - j].im + &h;
            }
        }
    }
    a
}

fn from_laurent(a: &[Complex], mode: Mode) -> TrigPoly {
    let n = (a.len() - 1) / 2;
    let mut terms = std::collections::BTreeMap::new();
    crate::trig::accumulate(&mut terms, Basis::ONE, a[n].re.clone());
    for j in 1..=n {
        let c = &a[n + j];
        // P_j = (a_j - i b_j)/2
        crate::trig::accumulate(&mut terms, Basis::Cos(j as u32), c.re.mul_i64(2));
        crate::trig::accumulate(&mut terms, Basis::Sin(j as u32), c.im.mul_i64(-2));
    }
    TrigPoly::from_terms(mode, terms)
}

pub(crate) fn div_exact(p: &TrigPoly, d: &TrigPoly) -> Option<TrigPoly> {
    if d.is_zero() || p.mode() != d.mode() {
        return None;
    }
    if p.is_zero() {
        return Some(TrigPoly::zero(p.mode()));
    }
    let mode = p.mode();
    let (np, nd) = (p.degree(), d.degree());
    if np < nd {
        return None;
    }
    let mut rem = to_laurent(p, np);
    let den = to_laurent(d, nd);
    let dlen = den.len();
    let lead = &den[dlen - 1];
    let qlen = rem.len() - dlen + 1;
    let mut quot = vec![Complex::zero(mode); qlen];
    for k in (0..qlen).rev() {
        let top = &rem[k + dlen - 1];
        if top.is_zero() {
            continue;
        }
        let f = top.div(lead);
        for (i, dc) in den.iter().enumerate() {
            rem[k + i] = rem[k + i].sub(&f.mul(dc));
        }
        quot[k] = f;
    }
    if mode.is_exact() && rem.iter().any(|c| !c.is_zero()) {
        return None;
    }
    let q = from_laurent(&quot, mode);
    if (&q * d).approx_eq(p) {
        Some(q)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const E: Mode = Mode::Exact;

    #[test]
    fn divides_products_back() {
        let a = &TrigPoly::sin(1, E) + &TrigPoly::cos(3, E).scale_i64(2);
        let b = &TrigPoly::one(E) - &TrigPoly::sin(2, E);
        let prod = &a * &b;
        assert_eq!(prod.div_exact(&b).unwrap(), a);
        assert_eq!(prod.div_exact(&a).unwrap(), b);
    }

    #[test]
    fn rejects_non_divisors() {
        let a = &TrigPoly::sin(1, E) + &TrigPoly::one(E);
        let b = TrigPoly::cos(1, E);
        assert!(a.div_exact(&b).is_none());
        assert!(b.div_exact(&TrigPoly::cos(2, E)).is_none());
        assert!(a.div_exact(&TrigPoly::zero(E)).is_none());
    }

    #[test]
    fn float_mode_division() {
        let m = Mode::Float { bits: 128 };
        let one = Scalar::one(m);
        let a = &TrigPoly::monomial(Basis::Sin(2), one.clone()) + &TrigPoly::constant(Scalar::from_f64(0.3, 128));
        let b = &TrigPoly::monomial(Basis::Cos(1), one.clone()) + &TrigPoly::monomial(Basis::Sin(3), one);
        let q = (&a * &b).div_exact(&b).unwrap();
        assert!(q.approx_eq(&a));
    }

    proptest! {
        #[test]
        fn product_quotient_round_trip(a in crate::trig::tests::arb_poly(), b in crate::trig::tests::arb_poly()) {
            prop_assume!(!b.is_zero());
            let q = (&a * &b).div_exact(&b);
            prop_assert_eq!(q, Some(a));
        }
    }
}
