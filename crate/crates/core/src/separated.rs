//! Two-point functions in separated form `Σ f_j(φ, ϕ)·r^{a_j}·ϱ^{b_j}`.
//!
//! With `x = r(cos φ, sin φ)` and `ξ = ϱ(cos ϕ, sin ϕ)` the operators used by
//! the transport and Goursat checks act term by term:
//!
//! * `−Δ_x + V` sends `f·r^a ϱ^b` to `((L − a²) f)·r^{a−2} ϱ^b`;
//! * `(x − ξ)·∂_x = r∂_r − ϱ cos(φ−ϕ) ∂_r + (ϱ/r) sin(φ−ϕ) ∂_φ` sends it to
//!   `a f·r^a ϱ^b + (−a cos(φ−ϕ) f + sin(φ−ϕ) ∂_φ f)·r^{a−1} ϱ^{b+1}`.

use std::collections::BTreeMap;

use crate::rational::{TrigRational2, Var};
use crate::scalar::{Mode, Scalar};
use crate::trig2::TrigPoly2;

#[derive(Debug, Clone, PartialEq)]
pub struct SeparatedFunction {
    mode: Mode,
    terms: BTreeMap<(i32, i32), TrigRational2>,
}

impl SeparatedFunction {
    pub fn zero(mode: Mode) -> SeparatedFunction {
        SeparatedFunction {
            mode,
            terms: BTreeMap::new(),
        }
    }

    pub fn term(f: TrigRational2, a: i32, b: i32) -> SeparatedFunction {
        let mut out = SeparatedFunction::zero(f.mode());
        out.push(f, a, b);
        out
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn terms(&self) -> impl Iterator<Item = ((i32, i32), &TrigRational2)> + '_ {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    pub fn get(&self, a: i32, b: i32) -> Option<&TrigRational2> {
        self.terms.get(&(a, b))
    }

    /// Adds `f·r^a ϱ^b`, merging with an existing term of the same powers.
    pub fn push(&mut self, f: TrigRational2, a: i32, b: i32) {
        let merged = match self.terms.remove(&(a, b)) {
            Some(g) => g.add(&f),
            None => f,
        };
        if !merged.is_zero() {
            self.terms.insert((a, b), merged);
        }
    }

    pub fn add(&self, other: &SeparatedFunction) -> SeparatedFunction {
        let mut out = self.clone();
        for ((a, b), f) in &other.terms {
            out.push(f.clone(), *a, *b);
        }
        out
    }

    pub fn sub(&self, other: &SeparatedFunction) -> SeparatedFunction {
        self.add(&other.scale(&Scalar::from_i64(-1, self.mode)))
    }

    pub fn scale(&self, c: &Scalar) -> SeparatedFunction {
        let mut out = SeparatedFunction::zero(self.mode);
        for ((a, b), f) in &self.terms {
            out.push(f.scale(c), *a, *b);
        }
        out
    }

    /// Multiplies by `r^da ϱ^db`.
    pub fn shift(&self, da: i32, db: i32) -> SeparatedFunction {
        SeparatedFunction {
            mode: self.mode,
            terms: self
                .terms
                .iter()
                .map(|((a, b), f)| ((a + da, b + db), f.clone()))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|f| f.is_zero())
    }

    /// Term-wise equality: canonical in exact mode, scale-aware in float mode.
    pub fn approx_eq(&self, other: &SeparatedFunction) -> bool {
        let keys: std::collections::BTreeSet<_> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.into_iter().all(|k| match (self.terms.get(k), other.terms.get(k)) {
            (Some(f), Some(g)) => f.approx_eq(g),
            (Some(f), None) | (None, Some(f)) => f.approx_eq(&f.zero_like()),
            (None, None) => true,
        })
    }

    /// The first surviving term, used as a failure witness.
    pub fn witness(&self) -> Option<String> {
        self.terms
            .iter()
            .find(|(_, f)| !f.is_zero())
            .map(|((a, b), f)| format!("r^{a}*rho^{b} * [{}]", f.reduce()))
    }

    /// `−Δ_x + V` with the angular potential `v` (a function of `φ`).
    pub fn apply_full(&self, v: &TrigRational2) -> SeparatedFunction {
        let mut out = SeparatedFunction::zero(self.mode);
        for ((a, b), f) in &self.terms {
            let lf = f.diff(Var::P).diff(Var::P).neg().add(&v.mul(f));
            let sq = Scalar::from_i64((a * a) as i64, self.mode);
            out.push(lf.sub(&f.scale(&sq)), a - 2, *b);
        }
        out
    }

    /// Multiplication by `V = v(φ)/r²`.
    pub fn mul_potential(&self, v: &TrigRational2) -> SeparatedFunction {
        let mut out = SeparatedFunction::zero(self.mode);
        for ((a, b), f) in &self.terms {
            out.push(v.mul(f), a - 2, *b);
        }
        out
    }

    /// The directional derivative `(x − ξ)·∂_x`.
    pub fn directional(&self) -> SeparatedFunction {
        let cd = TrigPoly2::cos_difference(1, self.mode);
        let sd = TrigPoly2::sin_difference(1, self.mode);
        let mut out = SeparatedFunction::zero(self.mode);
        for ((a, b), f) in &self.terms {
            let av = Scalar::from_i64(*a as i64, self.mode);
            out.push(f.scale(&av), *a, *b);
            let lower = f.mul_num(&cd).scale(&av).neg().add(&f.diff(Var::P).mul_num(&sd));
            out.push(lower, a - 1, b + 1);
        }
        out
    }

    /// Value at polar coordinates `x = (r, φ)`, `ξ = (ϱ, ϕ)`.
    pub fn eval_polar(&self, r: f64, p: f64, rho: f64, q: f64) -> f64 {
        self.terms
            .iter()
            .map(|((a, b), f)| f.eval_f64(p, q) * r.powi(*a) * rho.powi(*b))
            .sum()
    }

    pub fn eval(&self, x: [f64; 2], xi: [f64; 2]) -> f64 {
        let (r, p) = polar(x);
        let (rho, q) = polar(xi);
        self.eval_polar(r, p, rho, q)
    }
}

pub fn polar(x: [f64; 2]) -> (f64, f64) {
    (x[0].hypot(x[1]), x[1].atan2(x[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::TrigRational;
    use crate::trig::TrigPoly;

    const E: Mode = Mode::Exact;

    fn sample() -> SeparatedFunction {
        // f = (cos 2φ sin ϕ + 1/3) r^3 ϱ^-1 + cos(φ - ϕ)/sin ϕ · r^-2 ϱ^2
        let f1 = TrigRational2::from_num(
            &TrigPoly2::separable(&TrigPoly::cos(2, E), &TrigPoly::sin(1, E))
                + &TrigPoly2::constant(Scalar::ratio(1, 3)),
        );
        let csc = TrigRational::over(TrigPoly::one(E), Var::P, &TrigPoly::sin(1, E), 1).unwrap();
        let f2 = TrigRational2::from_num(TrigPoly2::cos_difference(1, E)).mul_var(Var::Q, &csc);
        let mut s = SeparatedFunction::term(f1, 3, -1);
        s.push(f2, -2, 2);
        s
    }

    fn cart(s: &SeparatedFunction, x: [f64; 2], xi: [f64; 2]) -> f64 {
        s.eval(x, xi)
    }

    #[test]
    fn directional_matches_finite_differences() {
        let s = sample();
        let d = s.directional();
        let (x, xi) = ([0.7, 1.3], [-0.4, 0.9]);
        let h = 1e-5;
        let mut fd = 0.0;
        for k in 0..2 {
            let (mut xp, mut xm) = (x, x);
            xp[k] += h;
            xm[k] -= h;
            fd += (x[k] - xi[k]) * (cart(&s, xp, xi) - cart(&s, xm, xi)) / (2.0 * h);
        }
        let exact = d.eval(x, xi);
        assert!((fd - exact).abs() < 1e-7 * (1.0 + exact.abs()), "{fd} vs {exact}");
    }

    #[test]
    fn laplacian_matches_finite_differences() {
        let s = sample();
        let zero_v = TrigRational2::from_num(TrigPoly2::zero(E));
        let minus_lap = s.apply_full(&zero_v);
        let (x, xi) = ([0.7, 1.3], [-0.4, 0.9]);
        let h = 1e-4;
        let mut lap = 0.0;
        for k in 0..2 {
            let (mut xp, mut xm) = (x, x);
            xp[k] += h;
            xm[k] -= h;
            lap += (cart(&s, xp, xi) - 2.0 * cart(&s, x, xi) + cart(&s, xm, xi)) / (h * h);
        }
        let exact = -minus_lap.eval(x, xi);
        assert!((lap - exact).abs() < 1e-5 * (1.0 + exact.abs()), "{lap} vs {exact}");
    }

    #[test]
    fn merging_and_cancellation() {
        let s = sample();
        assert!(s.sub(&s).is_zero());
        assert!(s.approx_eq(&s.scale(&Scalar::one(E))));
        assert!(!s.approx_eq(&SeparatedFunction::zero(E)));
        assert!(s.sub(&s).witness().is_none());
        assert_eq!(s.add(&s), s.scale(&Scalar::from_i64(2, E)));
        assert!(s.witness().unwrap().starts_with("r^-2*rho^2"));
    }
}
