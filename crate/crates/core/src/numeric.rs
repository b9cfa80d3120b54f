//! Machine-precision evaluators and exact evaluation at Cartesian points.

use num_rational::BigRational;
use num_traits::{One, Zero};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::rational::{TrigRational, TrigRational2, Var};
use crate::scalar::{Mode, Scalar};
use crate::trig::{Basis, TrigPoly};

/// Dense `f64` copy of a one-angle trigonometric polynomial.
#[derive(Debug, Clone, Default)]
pub struct Fourier {
    cos: Vec<f64>,
    sin: Vec<f64>,
    /// Rounding residues of the coefficients, used by the double-double path.
    cos_lo: Vec<f64>,
    sin_lo: Vec<f64>,
}

impl Fourier {
    pub fn from_poly(p: &TrigPoly) -> Fourier {
        let n = p.degree() as usize + 1;
        let mut f = Fourier {
            cos: vec![0.0; n],
            sin: vec![0.0; n],
            cos_lo: vec![0.0; n],
            sin_lo: vec![0.0; n],
        };
        for (b, c) in p.terms() {
            let hi = c.to_f64();
            f.add(b, hi);
            let lo = match c.mode() {
                Mode::Exact => c.checked_sub(&Scalar::from_rational(
                    &BigRational::from_float(hi).unwrap_or_default(),
                    Mode::Exact,
                )),
                Mode::Float { bits } => c.checked_sub(&Scalar::from_f64(hi, bits)),
            }
            .map_or(0.0, |d| d.to_f64());
            let n = b.freq() as usize;
            match b {
                Basis::Cos(_) => f.cos_lo[n] = lo,
                Basis::Sin(_) => f.sin_lo[n] = lo,
            }
        }
        f
    }

    fn add(&mut self, b: Basis, v: f64) {
        let n = b.freq() as usize;
        if n >= self.cos.len() {
            for v in [&mut self.cos, &mut self.sin, &mut self.cos_lo, &mut self.sin_lo] {
                v.resize(n + 1, 0.0);
            }
        }
        match b {
            Basis::Cos(_) => self.cos[n] += v,
            Basis::Sin(_) => self.sin[n] += v,
        }
    }

    /// Value at the angle with `(cos θ, sin θ) = (c, s)`.
    pub fn eval_cs(&self, c: f64, s: f64) -> f64 {
        let (mut re, mut im) = (1.0, 0.0);
        let mut acc = 0.0;
        for n in 0..self.cos.len() {
            acc += self.cos[n] * re + self.sin[n] * im;
            let nre = re * c - im * s;
            im = re * s + im * c;
            re = nre;
        }
        acc
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.eval_cs(theta.cos(), theta.sin())
    }

    /// [`Fourier::eval_cs`] in double-double arithmetic.
    pub fn eval_cs_dd(&self, c: TwoFloat, s: TwoFloat) -> TwoFloat {
        let (mut re, mut im) = (TwoFloat::from(1.0), TwoFloat::from(0.0));
        let mut acc = TwoFloat::from(0.0);
        for n in 0..self.cos.len() {
            let cn = TwoFloat::new_add(self.cos[n], self.cos_lo[n]);
            let sn = TwoFloat::new_add(self.sin[n], self.sin_lo[n]);
            acc += re * cn + im * sn;
            let nre = re * c - im * s;
            im = re * s + im * c;
            re = nre;
        }
        acc
    }

    pub fn l1(&self) -> f64 {
        self.cos.iter().chain(&self.sin).map(|v| v.abs()).sum()
    }
}

/// `a / b` to double-double precision; `TwoFloat`'s own division is only
/// accurate to about one `f64` ulp.
pub fn dd_div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    TwoFloat::from(q1) + q2 + q3
}

/// `exp(x)` to double-double precision: `x = n·ln 2 + 2⁹·r` and a Taylor
/// series in `r`.
pub fn dd_exp(x: TwoFloat) -> TwoFloat {
    const LN2: (f64, f64) = (std::f64::consts::LN_2, 2.319_046_813_846_299_6e-17);
    let n = (x.hi() / LN2.0).round();
    let ln2 = TwoFloat::new_add(LN2.0, LN2.1);
    let r = (x - ln2 * n) * (1.0 / 512.0);
    let mut term = TwoFloat::from(1.0);
    let mut sum = TwoFloat::from(1.0);
    for j in 1..=12 {
        term = dd_div(term * r, TwoFloat::from(j as f64));
        sum += term;
    }
    for _ in 0..9 {
        sum = sum * sum;
    }
    sum * 2f64.powi(n as i32)
}

/// Fast `f64` evaluator for a one-angle rational with factored denominator.
#[derive(Debug, Clone)]
pub struct FastRational {
    num: Fourier,
    den: Vec<(Fourier, i32)>,
}

impl FastRational {
    pub fn new(r: &TrigRational) -> FastRational {
        FastRational {
            num: Fourier::from_poly(r.num()),
            den: r
                .den()
                .factors()
                .iter()
                .map(|f| (Fourier::from_poly(&f.poly), f.exp as i32))
                .collect(),
        }
    }

    /// Restriction of a two-angle rational to a fixed second angle `q`.
    pub fn restrict_q(r: &TrigRational2, q: f64) -> FastRational {
        let (cq, sq) = (q.cos(), q.sin());
        let mut num = Fourier::default();
        for ((bp, bq), c) in r.num().terms() {
            num.add(bp, c.to_f64() * bq.eval(q));
        }
        let mut scalar = 1.0;
        let mut den = Vec::new();
        for f in r.den().factors() {
            match f.var {
                Var::P => den.push((Fourier::from_poly(&f.poly), f.exp as i32)),
                Var::Q => scalar *= Fourier::from_poly(&f.poly).eval_cs(cq, sq).powi(f.exp as i32),
            }
        }
        for v in num.cos.iter_mut().chain(num.sin.iter_mut()) {
            *v /= scalar;
        }
        FastRational { num, den }
    }

    pub fn eval_cs(&self, c: f64, s: f64) -> f64 {
        let mut d = 1.0;
        for (f, e) in &self.den {
            d *= f.eval_cs(c, s).powi(*e);
        }
        self.num.eval_cs(c, s) / d
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.eval_cs(theta.cos(), theta.sin())
    }

    /// Double-double evaluation.
    pub fn eval_cs_dd(&self, c: TwoFloat, s: TwoFloat) -> TwoFloat {
        let mut d = TwoFloat::from(1.0);
        for (f, e) in &self.den {
            d *= f.eval_cs_dd(c, s).powi(*e);
        }
        dd_div(self.num.eval_cs_dd(c, s), d)
    }

    /// Smallest `|F(θ)| / ‖F‖₁` over the denominator factors.
    pub fn den_relative(&self, c: f64, s: f64) -> f64 {
        self.den
            .iter()
            .map(|(f, _)| f.eval_cs(c, s).abs() / f.l1())
            .fold(1.0, f64::min)
    }
}

/// An element `a + b·r` of `Q(r)` with `r² = rr` rational.
#[derive(Debug, Clone, PartialEq)]
pub struct Surd {
    pub a: BigRational,
    pub b: BigRational,
    pub rr: BigRational,
}

impl Surd {
    pub fn rational(a: BigRational, rr: &BigRational) -> Surd {
        Surd {
            a,
            b: BigRational::zero(),
            rr: rr.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn add(&self, o: &Surd) -> Surd {
        Surd {
            a: &self.a + &o.a,
            b: &self.b + &o.b,
            rr: self.rr.clone(),
        }
    }

    pub fn mul(&self, o: &Surd) -> Surd {
        Surd {
            a: &self.a * &o.a + &self.b * &o.b * &self.rr,
            b: &self.a * &o.b + &self.b * &o.a,
            rr: self.rr.clone(),
        }
    }

    pub fn div(&self, o: &Surd) -> Result<Surd> {
        let norm = &o.a * &o.a - &o.b * &o.b * &self.rr;
        if norm.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let conj = Surd {
            a: o.a.clone() / &norm,
            b: -o.b.clone() / &norm,
            rr: self.rr.clone(),
        };
        Ok(self.mul(&conj))
    }

    /// The rational value, when the `r` part vanishes.
    pub fn as_rational(&self) -> Option<BigRational> {
        self.b.is_zero().then(|| self.a.clone())
    }
}

/// Exact value of a trigonometric polynomial at the polar angle of `(x1, x2)`.
fn poly_at_point(p: &TrigPoly, x1: &BigRational, x2: &BigRational, rr: &BigRational) -> Result<Surd> {
    let (mut re, mut im) = (BigRational::one(), BigRational::zero());
    let mut out = Surd::rational(BigRational::zero(), rr);
    let inv_rr = BigRational::one() / rr;
    let mut inv_pow = BigRational::one(); // rr^{-⌈n/2⌉}
    for n in 0..=p.degree() {
        if n % 2 == 1 {
            inv_pow = &inv_pow * &inv_rr;
        }
        let mut acc = BigRational::zero();
        for (b, val) in [(Basis::Cos(n), &re), (Basis::Sin(n), &im)] {
            if n == 0 && matches!(b, Basis::Sin(_)) {
                continue;
            }
            let c = p.coeff(b);
            if !c.is_zero() {
                let q = c.as_rational().ok_or(Error::RequiresExact)?;
                acc += q * val;
            }
        }
        // cos nφ + i sin nφ = (x1 + i x2)^n · r^{-n}
        let term = if n % 2 == 0 {
            Surd::rational(acc * &inv_pow, rr)
        } else {
            Surd {
                a: BigRational::zero(),
                b: acc * &inv_pow,
                rr: rr.clone(),
            }
        };
        out = out.add(&term);
        let nre = &re * x1 - &im * x2;
        im = &re * x2 + &im * x1;
        re = nre;
    }
    Ok(out)
}

/// Exact value of `f(φ)` at the polar angle of the rational point `(x1, x2)`.
pub fn rational_at_point(f: &TrigRational, x1: &BigRational, x2: &BigRational) -> Result<Surd> {
    let rr = x1 * x1 + x2 * x2;
    if rr.is_zero() {
        return Err(Error::OriginError);
    }
    let mut den = Surd::rational(BigRational::one(), &rr);
    for fac in f.den().factors() {
        let v = poly_at_point(&fac.poly, x1, x2, &rr)?;
        for _ in 0..fac.exp {
            den = den.mul(&v);
        }
    }
    poly_at_point(f.num(), x1, x2, &rr)?.div(&den)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Mode, Scalar};

    const E: Mode = Mode::Exact;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn fourier_matches_direct_evaluation() {
        let p = &(&TrigPoly::cos(3, E).scale(&Scalar::ratio(2, 3)) - &TrigPoly::sin(5, E)) + &TrigPoly::one(E);
        let f = Fourier::from_poly(&p);
        for th in [0.1, 1.3, -2.2] {
            assert!((f.eval(th) - p.eval_f64(th)).abs() < 1e-14);
        }
    }

    #[test]
    fn double_double_division_and_exp() {
        let a = TwoFloat::from(1.3) + 1e-20;
        let b = TwoFloat::from(0.7);
        assert!(f64::from((dd_div(a, b) * b - a).abs()) < 1e-30);
        let x = TwoFloat::from(-2.7) + 3e-19;
        let h = dd_exp(x * 0.5);
        assert!(f64::from((h * h - dd_exp(x)).abs()) < 1e-31);
        assert!((f64::from(dd_exp(x)) - (-2.7f64).exp()).abs() < 1e-16);
        assert!(f64::from((dd_exp(TwoFloat::from(1.0)) * dd_exp(TwoFloat::from(-1.0)) - 1.0).abs()) < 1e-28);
    }

    #[test]
    fn double_double_matches_f64() {
        let p = &(&TrigPoly::cos(7, E).scale(&Scalar::ratio(2, 3)) - &TrigPoly::sin(5, E)) + &TrigPoly::one(E);
        let den = TrigPoly::sin(1, E);
        let f = FastRational::new(&TrigRational::over(p, Var::P, &den, 2).unwrap());
        let th: f64 = 0.8;
        let dd = f.eval_cs_dd(TwoFloat::from(th.cos()), TwoFloat::from(th.sin()));
        assert!((f64::from(dd) - f.eval(th)).abs() < 1e-14 * f.eval(th).abs());
    }

    #[test]
    fn exact_point_evaluation() {
        // cos 2φ at (3, 4): (9 - 16)/25
        let v = rational_at_point(&TrigRational::from_num(TrigPoly::cos(2, E)), &q(3, 1), &q(4, 1)).unwrap();
        assert_eq!(v.as_rational(), Some(q(-7, 25)));
        // sin φ at (1, 1) = 1/√2 = r/2 with r² = 2
        let v = rational_at_point(&TrigRational::from_num(TrigPoly::sin(1, E)), &q(1, 1), &q(1, 1)).unwrap();
        assert_eq!((v.a, v.b), (q(0, 1), q(1, 2)));
        // cos φ / sin φ at (1, 2) = 1/2
        let cot = TrigRational::over(TrigPoly::cos(1, E), Var::P, &TrigPoly::sin(1, E), 1).unwrap();
        assert_eq!(rational_at_point(&cot, &q(1, 1), &q(2, 1)).unwrap().as_rational(), Some(q(1, 2)));
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in [1, 2, 5, 12, 20] {
            let (x, w) = gauss_legendre(n);
            for deg in 0..2 * n {
                let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((approx - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }
}
