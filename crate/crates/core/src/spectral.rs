//! The angular operator `L = −∂²_φ + v(φ)`, its eigenfunctions `Ψ_i`, the
//! constants `c_i`, and the Darboux factorization relating `k` to an
//! extended sequence.

use std::f64::consts::TAU;

use num_rational::BigRational;
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::kdata::KData;
use crate::numeric::{dd_div, rational_at_point, FastRational, Fourier};
use crate::rational::{TrigRational, Var};
use crate::scalar::{Mode, Scalar};
use crate::trig::TrigPoly;
use crate::wronskian::{full_wronskian, reduced_wronskian};

/// Default relative guard for evaluation near zeros of `W`.
pub const DEFAULT_DEN_GUARD: f64 = 1e-10;

/// Everything derived from one `KData`, computed once.
#[derive(Debug, Clone)]
pub struct Spectrum {
    data: KData,
    w: TrigPoly,
    reduced: Vec<TrigPoly>,
    c: Vec<Scalar>,
    psi: Vec<TrigRational>,
    v: TrigRational,
    v_fast: FastRational,
    w_fast: Fourier,
    w_zeros: Vec<f64>,
}

impl Spectrum {
    pub fn new(data: &KData) -> Result<Spectrum> {
        let w = full_wronskian(data);
        if w.cleaned().is_zero() {
            return Err(Error::DegenerateWronskian);
        }
        let reduced = (0..data.len())
            .map(|i| reduced_wronskian(data, &[i]))
            .collect::<Result<Vec<_>>>()?;
        let psi = reduced
            .iter()
            .map(|wi| TrigRational::over(wi.clone(), Var::P, &w, 1))
            .collect::<Result<Vec<_>>>()?;
        let c = (0..data.len()).map(|i| c_const(data, i)).collect();
        let (w1, w2) = (w.diff(), w.diff_n(2));
        let vnum = (&(&w2 * &w) - &(&w1 * &w1)).scale_i64(-2);
        let v = TrigRational::over(vnum, Var::P, &w, 2)?.reduce();
        let w_fast = Fourier::from_poly(&w);
        let w_zeros = find_zeros(&w_fast);
        Ok(Spectrum {
            data: data.clone(),
            v_fast: FastRational::new(&v),
            w,
            reduced,
            c,
            psi,
            v,
            w_fast,
            w_zeros,
        })
    }

    pub fn data(&self) -> &KData {
        &self.data
    }

    pub fn mode(&self) -> Mode {
        self.data.mode()
    }

    /// Full Wronskian `W = Wr[χ_0, …, χ_m]`.
    pub fn w(&self) -> &TrigPoly {
        &self.w
    }

    /// `W_î`, the Wronskian with `χ_i` omitted.
    pub fn reduced(&self, i: usize) -> &TrigPoly {
        &self.reduced[i]
    }

    pub fn c(&self, i: usize) -> &Scalar {
        &self.c[i]
    }

    /// `Ψ_i = W_î / W`.
    pub fn psi(&self, i: usize) -> &TrigRational {
        &self.psi[i]
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The angular potential `v` with `V_k = v(φ)/r²`.
    pub fn angular_potential(&self) -> &TrigRational {
        &self.v
    }

    /// `L f = −f″ + v·f`.
    pub fn apply_l(&self, f: &TrigRational) -> TrigRational {
        f.diff(Var::P).diff(Var::P).neg().add(&self.v.mul(f))
    }

    /// Zeros of `W` in `[0, 2π)`, located by scanning and bisection.
    pub fn w_zeros(&self) -> &[f64] {
        &self.w_zeros
    }

    /// Angular distance from `theta` to the nearest zero of `W`.
    pub fn distance_to_zero(&self, theta: f64) -> Option<f64> {
        self.w_zeros
            .iter()
            .map(|z| {
                let d = (theta - z).rem_euclid(TAU);
                d.min(TAU - d)
            })
            .min_by(f64::total_cmp)
    }

    /// `|W(θ)| / ‖W‖₁`.
    pub fn w_relative(&self, theta: f64) -> f64 {
        self.w_fast.eval(theta).abs() / self.w_fast.l1()
    }

    /// Angular part `v(θ)` with the singularity guard.
    pub fn v_eval(&self, theta: f64, den_guard: f64) -> Result<f64> {
        let rel = self.w_relative(theta);
        if rel <= den_guard {
            return Err(Error::NearSingularEvaluation {
                magnitude: rel,
                nearest_zero_distance: self.distance_to_zero(theta),
            });
        }
        Ok(self.v_fast.eval(theta))
    }

    /// `V_k(x) = v(φ)/r²`, evaluated in double-double arithmetic so that
    /// cancellation near the singular lines stays below `f64` resolution.
    pub fn potential_eval(&self, x: [f64; 2], den_guard: f64) -> Result<f64> {
        let rr = x[0] * x[0] + x[1] * x[1];
        if rr == 0.0 {
            return Err(Error::OriginError);
        }
        self.v_eval(x[1].atan2(x[0]), den_guard)?;
        let (x0, x1) = (TwoFloat::from(x[0]), TwoFloat::from(x[1]));
        let rr = x0 * x0 + x1 * x1;
        let r = rr.sqrt();
        let v = self.v_fast.eval_cs_dd(dd_div(x0, r), dd_div(x1, r));
        Ok(f64::from(dd_div(v, rr)))
    }

    /// Exact `V_k` at a rational point.
    pub fn potential_exact(&self, x1: &BigRational, x2: &BigRational) -> Result<BigRational> {
        let val = rational_at_point(&self.v, x1, x2).map_err(|e| match e {
            Error::DivisionByZero => Error::NearSingularEvaluation {
                magnitude: 0.0,
                nearest_zero_distance: Some(0.0),
            },
            e => e,
        })?;
        let val = val.as_rational().ok_or_else(|| {
            Error::Float("potential value has an irrational part".into())
        })?;
        Ok(val / (x1 * x1 + x2 * x2))
    }
}

/// `c_i = Π_{j≠i} (k_i² − k_j²)`.
pub fn c_const(data: &KData, i: usize) -> Scalar {
    let k = data.k();
    let ki = k[i] as i64;
    k.iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .fold(Scalar::one(data.mode()), |acc, (_, &kj)| {
            let kj = kj as i64;
            &acc * &Scalar::from_i64(ki * ki - kj * kj, data.mode())
        })
}

fn find_zeros(w: &Fourier) -> Vec<f64> {
    const N: usize = 4096;
    let norm = w.l1();
    let h = TAU / N as f64;
    let vals: Vec<f64> = (0..=N).map(|j| w.eval(j as f64 * h)).collect();
    let mut zeros = Vec::new();
    for j in 0..N {
        let (a, b) = (vals[j], vals[j + 1]);
        if a == 0.0 {
            zeros.push(j as f64 * h);
        } else if a * b < 0.0 {
            let (mut lo, mut hi) = (j as f64 * h, (j + 1) as f64 * h);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if (w.eval(mid) < 0.0) == (a < 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            zeros.push(0.5 * (lo + hi));
        } else if j > 0 {
            // touching zero: a local minimum of |W| that is negligibly small
            let prev = vals[j - 1].abs();
            if a.abs() <= prev && a.abs() <= b.abs() && a.abs() < 1e-6 * norm {
                zeros.push(j as f64 * h);
            }
        }
    }
    zeros
}

/// The Darboux pair `A = ∂ + g`, `A* = −∂ + g` with `g = Ψ̃′_{m+1}/Ψ̃_{m+1}`,
/// built from the spectrum of the extended sequence.
#[derive(Debug, Clone)]
pub struct Darboux {
    g: TrigRational,
    k_next: u32,
}

impl Darboux {
    pub fn new(extended: &Spectrum) -> Result<Darboux> {
        let m1 = extended.len() - 1;
        if m1 == 0 {
            return Err(Error::InvalidKData(
                "Darboux step needs an extended sequence with at least two entries".into(),
            ));
        }
        let top = extended.psi(m1);
        let g = top.derivative().div(top)?.reduce();
        Ok(Darboux {
            g,
            k_next: extended.data().k_max(),
        })
    }

    pub fn k_next(&self) -> u32 {
        self.k_next
    }

    /// The logarithmic derivative `g = Ψ̃′_{m+1}/Ψ̃_{m+1}`.
    pub fn g(&self) -> &TrigRational {
        &self.g
    }

    /// `A f = (Ψ̃ f)′/Ψ̃`.
    pub fn forward(&self, f: &TrigRational) -> TrigRational {
        f.derivative().add(&self.g.mul(f))
    }

    /// `A* f = −Ψ̃ (f/Ψ̃)′`.
    pub fn backward(&self, f: &TrigRational) -> TrigRational {
        f.derivative().neg().add(&self.g.mul(f))
    }
}

/// `A_m[f]` for the extended data.
pub fn darboux_forward(extended: &Spectrum, f: &TrigRational) -> Result<TrigRational> {
    Ok(Darboux::new(extended)?.forward(f))
}

/// `A_m*[f]` for the extended data.
pub fn darboux_backward(extended: &Spectrum, f: &TrigRational) -> Result<TrigRational> {
    Ok(Darboux::new(extended)?.backward(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kdata::Phase;

    const E: Mode = Mode::Exact;

    fn spec(k: &[i64]) -> Spectrum {
        Spectrum::new(&KData::trivial(k, E).unwrap()).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn potential_eval_is_accurate_near_singular_lines() {
        let s = spec(&[0, 1, 3, 4]);
        for (x1, x2) in [(-2, -16), (3, 8), (1, -32)] {
            let (x1, x2) = (q(x1, 1), q(1, x2));
            let f = |v: &BigRational| Scalar::from_rational(v, E).to_f64();
            let exact = f(&s.potential_exact(&x1, &x2).unwrap());
            let got = s.potential_eval([f(&x1), f(&x2)], 1e-14).unwrap();
            assert!((got - exact).abs() <= 1e-14 * exact.abs(), "{got} vs {exact}");
        }
    }

    fn rat(num: TrigPoly, den: TrigPoly, e: u32) -> TrigRational {
        TrigRational::over(num, Var::P, &den, e).unwrap()
    }

    #[test]
    fn free_case() {
        let s = spec(&[0]);
        assert!(s.angular_potential().is_zero());
        assert_eq!(s.psi(0), &TrigRational::one(E));
        assert_eq!(s.c(0), &Scalar::one(E));
        let f = TrigRational::from_num(TrigPoly::cos(3, E));
        assert_eq!(s.apply_l(&f), f.scale_i64(9));
        assert_eq!(s.potential_eval([0.3, -2.0], DEFAULT_DEN_GUARD).unwrap(), 0.0);
    }

    #[test]
    fn first_nontrivial_case() {
        let s = spec(&[0, 1]);
        let two_csc2 = rat(TrigPoly::constant(Scalar::from_i64(2, E)), TrigPoly::sin(1, E), 2);
        assert!(s.angular_potential().approx_eq(&two_csc2));
        let minus_csc = rat(TrigPoly::one(E), -&TrigPoly::sin(1, E), 1);
        assert!(s.psi(1).approx_eq(&minus_csc));
        let minus_cot = rat(TrigPoly::cos(1, E), -&TrigPoly::sin(1, E), 1);
        assert!(s.psi(0).approx_eq(&minus_cot));
        assert!(s.apply_l(s.psi(1)).approx_eq(s.psi(1)));
        assert!(s.apply_l(&TrigRational::one(E)).approx_eq(&two_csc2));
        assert_eq!((s.c(0), s.c(1)), (&Scalar::from_i64(-1, E), &Scalar::one(E)));
        assert!((s.potential_eval([0.0, 1.0], DEFAULT_DEN_GUARD).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn printed_example_potential() {
        let s = spec(&[0, 1, 3, 4]);
        assert_eq!(s.c(0), &Scalar::from_i64(-144, E));
        assert_eq!(s.potential_exact(&q(1, 1), &q(1, 1)).unwrap(), q(57, 4));
        assert!((s.potential_eval([1.0, 1.0], DEFAULT_DEN_GUARD).unwrap() - 14.25).abs() < 1e-12);
        for (a, b) in [(3, 7), (-2, 5), (11, 1)] {
            let (x1, x2) = (q(a, 1), q(b, 3));
            let (x1s, x2s) = (&x1 * &x1, &x2 * &x2);
            let expect = q(12, 1) * (q(49, 1) * &x1s * &x1s + q(28, 1) * &x1s * &x2s - &x2s * &x2s)
                / (&x2s * (q(7, 1) * &x1s + &x2s) * (q(7, 1) * &x1s + &x2s));
            assert_eq!(s.potential_exact(&x1, &x2).unwrap(), expect);
        }
    }

    #[test]
    fn singular_lines_are_reported() {
        let s = spec(&[0, 1]);
        assert!(s.w_zeros().iter().any(|z| z.abs() < 1e-12));
        assert!(s.w_zeros().iter().any(|z| (z - std::f64::consts::PI).abs() < 1e-12));
        match s.potential_eval([1.0, 1e-12], DEFAULT_DEN_GUARD) {
            Err(Error::NearSingularEvaluation { nearest_zero_distance: Some(d), .. }) => assert!(d < 1e-11),
            other => panic!("{other:?}"),
        }
        assert_eq!(s.potential_eval([0.0, 0.0], DEFAULT_DEN_GUARD), Err(Error::OriginError));
    }

    #[test]
    fn homogeneity() {
        let s = spec(&[0, 1, 3]);
        for (x, lam) in [([0.4, 1.1], 2.5), ([-1.3, 0.7], 0.3)] {
            let a = s.potential_eval([lam * x[0], lam * x[1]], DEFAULT_DEN_GUARD).unwrap();
            let b = s.potential_eval(x, DEFAULT_DEN_GUARD).unwrap() / (lam * lam);
            assert!((a - b).abs() <= 1e-12 * b.abs());
        }
    }

    #[test]
    fn eigenfunctions_with_phase() {
        let d = KData::trivial(&[0, 2, 3], E)
            .unwrap()
            .with_phase(1, Phase::new(Scalar::ratio(3, 5), Scalar::ratio(4, 5)))
            .unwrap();
        let s = Spectrum::new(&d).unwrap();
        for i in 0..3 {
            let k = d.k()[i] as i64;
            let resid = s.apply_l(s.psi(i)).sub(&s.psi(i).scale_i64(k * k));
            assert!(resid.is_zero(), "i = {i}");
        }
    }

    #[test]
    fn darboux_identities() {
        let s = spec(&[0, 2]);
        let ext = spec(&[0, 2, 5]);
        let a = Darboux::new(&ext).unwrap();
        assert!(a.backward(ext.psi(2)).is_zero());
        for i in 0..2 {
            assert!(a.backward(ext.psi(i)).approx_eq(&s.psi(i).neg()));
            let ki = s.data().k()[i] as i64;
            assert!(a.forward(s.psi(i)).approx_eq(&ext.psi(i).scale_i64(25 - ki * ki)));
        }
        // L = A*A + k²
        let test = [TrigRational::one(E), TrigRational::from_num(TrigPoly::sin(3, E)), s.psi(0).clone()];
        for f in &test {
            let lhs = s.apply_l(f);
            let rhs = a.backward(&a.forward(f)).add(&f.scale_i64(25));
            assert!(lhs.approx_eq(&rhs));
        }
    }
}
