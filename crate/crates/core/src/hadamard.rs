//! Closed-form Hadamard coefficients `U_ν = σ_ν(φ, ϕ)/(rϱ)^ν` with
//!
//! `σ_ν = (−2)^ν Σ_i c_i Ψ_i(φ) Ψ_i(ϕ) T^{(ν)}_{k_i}(cos(φ − ϕ))`,
//!
//! the logarithmic term, the finite heat kernel and the Baker–Akhiezer
//! function.

use std::f64::consts::PI;

use serde_json::{json, Value};

use crate::chebyshev::{cheb_derivative, cos_difference_powers};
use crate::error::{Error, Result};
use crate::kdata::KData;
use crate::numeric::FastRational;
use crate::rational::{TrigRational, TrigRational2, Var};
use crate::scalar::{Mode, Scalar};
use crate::separated::{polar, SeparatedFunction};
use crate::spectral::{Spectrum, DEFAULT_DEN_GUARD};
use crate::trig2::TrigPoly2;

/// Schema tag of the JSON serialization.
pub const SCHEMA: &str = "hk-1";

/// The ingredients of the coefficient sum. Exposed so that checks can be
/// run against deliberately perturbed inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaInputs {
    pub c: Vec<Scalar>,
    pub psi: Vec<TrigRational>,
    /// Chebyshev orders, normally `k_i`.
    pub orders: Vec<u32>,
}

impl SigmaInputs {
    pub fn from_spectrum(s: &Spectrum) -> SigmaInputs {
        SigmaInputs {
            c: (0..s.len()).map(|i| s.c(i).clone()).collect(),
            psi: (0..s.len()).map(|i| s.psi(i).clone()).collect(),
            orders: s.data().k().to_vec(),
        }
    }

    fn psi_squares(&self) -> Vec<TrigRational2> {
        self.psi
            .iter()
            .zip(&self.c)
            .map(|(p, c)| TrigRational2::separable(p, p).scale(c))
            .collect()
    }

    /// `σ_ν` for any `ν ≥ 0`.
    pub fn sigma(&self, nu: u32, mode: Mode) -> TrigRational2 {
        let top = self.orders.iter().copied().max().unwrap_or(0);
        let powers = cos_difference_powers(top.saturating_sub(nu), mode);
        let factor = Scalar::from_i64(-2, mode).pow(nu);
        let mut acc: Option<TrigRational2> = None;
        for (sq, &n) in self.psi_squares().iter().zip(&self.orders) {
            let t = cheb_derivative(n, nu);
            if t.is_zero() {
                continue;
            }
            let term = sq.mul_num(&t.eval_two_angle(&powers));
            acc = Some(match acc {
                Some(a) => a.add(&term),
                None => term,
            });
        }
        match acc {
            Some(a) => a.scale(&factor).reduce(),
            None => TrigRational2::from_num(TrigPoly2::zero(mode)),
        }
    }
}

/// `σ_0, …, σ_{k_m}` for one `KData`.
#[derive(Debug, Clone)]
pub struct HadamardTable {
    spectrum: Spectrum,
    inputs: SigmaInputs,
    sigma: Vec<TrigRational2>,
    v2: TrigRational2,
}

impl PartialEq for HadamardTable {
    fn eq(&self, other: &HadamardTable) -> bool {
        self.spectrum.data() == other.spectrum.data() && self.sigma == other.sigma
    }
}

impl HadamardTable {
    pub fn new(data: &KData) -> Result<HadamardTable> {
        let s = Spectrum::new(data)?;
        let inputs = SigmaInputs::from_spectrum(&s);
        Ok(HadamardTable::from_inputs(s, inputs))
    }

    /// Table built from (possibly perturbed) inputs.
    pub fn from_inputs(spectrum: Spectrum, inputs: SigmaInputs) -> HadamardTable {
        let mode = spectrum.mode();
        let sigma = (0..=spectrum.data().k_max())
            .map(|nu| inputs.sigma(nu, mode))
            .collect();
        let v2 = spectrum.angular_potential().lift(Var::P);
        HadamardTable {
            spectrum,
            inputs,
            sigma,
            v2,
        }
    }

    /// The same table with `σ_ν` replaced (negative controls, parsing).
    pub fn with_sigma(&self, nu: usize, value: TrigRational2) -> HadamardTable {
        let mut out = self.clone();
        out.sigma[nu] = value;
        out
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn data(&self) -> &KData {
        self.spectrum.data()
    }

    pub fn inputs(&self) -> &SigmaInputs {
        &self.inputs
    }

    pub fn mode(&self) -> Mode {
        self.spectrum.mode()
    }

    pub fn k_max(&self) -> u32 {
        self.data().k_max()
    }

    /// `σ_0 … σ_{k_m}`.
    pub fn sigmas(&self) -> &[TrigRational2] {
        &self.sigma
    }

    /// `σ_ν`, zero beyond the table.
    pub fn sigma(&self, nu: u32) -> TrigRational2 {
        self.sigma
            .get(nu as usize)
            .cloned()
            .unwrap_or_else(|| TrigRational2::from_num(TrigPoly2::zero(self.mode())))
    }

    /// `σ_ν` recomputed from the inputs, also for `ν > k_m`.
    pub fn sigma_beyond(&self, nu: u32) -> TrigRational2 {
        self.inputs.sigma(nu, self.mode())
    }

    /// The potential's angular part as a two-angle rational in `φ`.
    pub fn v2(&self) -> &TrigRational2 {
        &self.v2
    }

    /// `λ^ν U_ν` in separated form.
    pub fn u_separated(&self, nu: u32, lambda: &Scalar) -> SeparatedFunction {
        let s = self.sigma(nu).scale(&lambda.pow(nu));
        SeparatedFunction::term(s, -(nu as i32), -(nu as i32))
    }

    /// Fast evaluator of `σ_ν(·, q)` for a fixed second angle.
    pub fn sigma_restricted(&self, nu: u32, q: f64) -> FastRational {
        FastRational::restrict_q(&self.sigma(nu), q)
    }

    fn guard_angle(&self, theta: f64, den_guard: f64) -> Result<()> {
        let rel = self.spectrum.w_relative(theta);
        if rel <= den_guard {
            return Err(Error::NearSingularEvaluation {
                magnitude: rel,
                nearest_zero_distance: self.spectrum.distance_to_zero(theta),
            });
        }
        Ok(())
    }

    /// All `U_ν(x, ξ)`, `ν = 0..=k_m`.
    pub fn u_all(&self, x: [f64; 2], xi: [f64; 2], den_guard: f64) -> Result<Vec<f64>> {
        let (r, p) = polar(x);
        let (rho, q) = polar(xi);
        if r == 0.0 || rho == 0.0 {
            return Err(Error::OriginError);
        }
        if self.k_max() > 0 {
            self.guard_angle(p, den_guard)?;
            self.guard_angle(q, den_guard)?;
        }
        let rr = r * rho;
        Ok(self
            .sigma
            .iter()
            .enumerate()
            .map(|(nu, s)| s.eval_f64(p, q) / rr.powi(nu as i32))
            .collect())
    }

    /// `U_ν(x, ξ)`; exactly 0 for `ν > k_m`.
    pub fn u_eval(&self, x: [f64; 2], xi: [f64; 2], nu: u32) -> Result<f64> {
        if nu > self.k_max() {
            return Ok(0.0);
        }
        Ok(self.u_all(x, xi, DEFAULT_DEN_GUARD)?[nu as usize])
    }

    /// `Σ_ν U_ν t^ν`.
    pub fn kernel_sum(&self, x: [f64; 2], xi: [f64; 2], t: f64) -> Result<f64> {
        let u = self.u_all(x, xi, DEFAULT_DEN_GUARD)?;
        Ok(u.iter().rev().fold(0.0, |acc, v| acc * t + v))
    }

    /// `Φ(x, ξ, t) = (4πt)^{-1} e^{−|x−ξ|²/4t} Σ_ν U_ν t^ν`.
    pub fn heat_kernel_eval(&self, x: [f64; 2], xi: [f64; 2], t: f64) -> Result<f64> {
        if t <= 0.0 || t.is_nan() {
            return Err(Error::NonPositiveTime(t));
        }
        let d2 = (x[0] - xi[0]).powi(2) + (x[1] - xi[1]).powi(2);
        let gauss = (-d2 / (4.0 * t)).exp() / (4.0 * PI * t);
        Ok(gauss * self.kernel_sum(x, xi, t)?)
    }

    /// `Ψ_BA(x, ξ) = (Σ_ν U_ν / 2^ν) e^{(x, ξ)}`.
    pub fn ba_eval(&self, x: [f64; 2], xi: [f64; 2]) -> Result<f64> {
        let dot = x[0] * xi[0] + x[1] * xi[1];
        Ok(self.kernel_sum(x, xi, 0.5)? * dot.exp())
    }

    /// `W = Σ c_i Ψ_i(φ)Ψ_i(ϕ) ((r/ϱ)^{k_i} + (ϱ/r)^{k_i})/2` in separated form.
    pub fn log_term(&self) -> SeparatedFunction {
        let mode = self.mode();
        let half = Scalar::one(mode).half();
        let mut out = SeparatedFunction::zero(mode);
        for (sq, &k) in self.inputs.psi_squares().iter().zip(&self.inputs.orders) {
            let k = k as i32;
            if k == 0 {
                out.push(sq.clone(), 0, 0);
            } else {
                let h = sq.scale(&half);
                out.push(h.clone(), k, -k);
                out.push(h, -k, k);
            }
        }
        out
    }

    /// Coefficients of `γ^ν`, `ν = 0..=k_m`, of the logarithmic term after
    /// substituting `(r/ϱ + ϱ/r)/2 = γ/(2rϱ) + cos(φ−ϕ)`.
    ///
    /// `T_k(Y + C)` is expanded in powers of `Y` by the defining recurrence,
    /// independently of the derivative coefficients used for `σ_ν`.
    pub fn log_term_series(&self) -> Vec<SeparatedFunction> {
        let mode = self.mode();
        let top = self.k_max() as usize;
        let shifted = shifted_chebyshev(top, mode);
        let squares = self.inputs.psi_squares();
        (0..=top)
            .map(|nu| {
                let mut acc = TrigRational2::from_num(TrigPoly2::zero(mode));
                for (sq, &k) in squares.iter().zip(self.data().k()) {
                    if let Some(coef) = shifted[k as usize].get(nu) {
                        acc = acc.add(&sq.mul_num(coef));
                    }
                }
                let scale = Scalar::one(mode)
                    .checked_div(&Scalar::from_i64(2, mode).pow(nu as u32))
                    .unwrap();
                SeparatedFunction::term(acc.scale(&scale).reduce(), -(nu as i32), -(nu as i32))
            })
            .collect()
    }

    /// `Σ_ν U_ν γ^ν / ((−4)^ν ν!)` with `γ = r² + ϱ² − 2rϱ cos(φ−ϕ)`
    /// expanded in separated form.
    pub fn log_term_from_coefficients(&self) -> SeparatedFunction {
        let mode = self.mode();
        let cd = TrigPoly2::cos_difference(1, mode);
        let one = TrigRational2::one(mode);
        let gamma = {
            let mut g = SeparatedFunction::term(one.clone(), 2, 0);
            g.push(one.clone(), 0, 2);
            g.push(TrigRational2::from_num(cd.scale_i64(-2)), 1, 1);
            g
        };
        let mut gpow = SeparatedFunction::term(one, 0, 0);
        let mut out = SeparatedFunction::zero(mode);
        let mut fact = Scalar::one(mode);
        for nu in 0..=self.k_max() {
            if nu > 0 {
                gpow = mul_separated(&gpow, &gamma);
                fact = &fact * &Scalar::from_i64(-4 * nu as i64, mode);
            }
            let w = Scalar::one(mode).checked_div(&fact).unwrap();
            let u = self.u_separated(nu, &Scalar::one(mode));
            out = out.add(&mul_separated(&u, &gpow).scale(&w));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": SCHEMA,
            "kdata": self.data().to_json(),
            "k_max": self.k_max(),
            "mode": self.mode().to_string(),
            "sigma": self.sigma.iter().enumerate().map(|(nu, s)| json!({
                "nu": nu,
                "text": s.to_text(),
                "numerator": s.num().to_text(),
                "denominator": s.den().to_text(),
                "scaling": format!("(r*rho)^-{nu}"),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<HadamardTable> {
        let bad = |m: &str| Error::Parse(m.to_string());
        if v.get("schema").and_then(Value::as_str) != Some(SCHEMA) {
            return Err(bad("missing or unknown schema tag"));
        }
        let data = KData::from_json(v.get("kdata").ok_or_else(|| bad("missing kdata"))?)?;
        let mut table = HadamardTable::new(&data)?;
        let entries = v
            .get("sigma")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing sigma array"))?;
        if entries.len() != table.sigma.len() {
            return Err(bad("sigma list length must be k_max + 1"));
        }
        for (nu, e) in entries.iter().enumerate() {
            let field = |name: &str| {
                e.get(name)
                    .and_then(Value::as_str)
                    .ok_or_else(|| bad(&format!("sigma[{nu}] lacks '{name}'")))
            };
            table.sigma[nu] = TrigRational2::parse(field("numerator")?, field("denominator")?, data.mode())?;
        }
        Ok(table)
    }
}

fn mul_separated(a: &SeparatedFunction, b: &SeparatedFunction) -> SeparatedFunction {
    let mut out = SeparatedFunction::zero(a.mode());
    for ((a1, b1), f) in a.terms() {
        for ((a2, b2), g) in b.terms() {
            out.push(f.mul(g), a1 + a2, b1 + b2);
        }
    }
    out
}

/// `T_n(Y + C)` for `n = 0..=top` as coefficient lists in `Y`.
fn shifted_chebyshev(top: usize, mode: Mode) -> Vec<Vec<TrigPoly2>> {
    let c = TrigPoly2::cos_difference(1, mode);
    let one = TrigPoly2::one(mode);
    let mut out = vec![vec![one.clone()]];
    if top >= 1 {
        out.push(vec![c.clone(), one]);
    }
    for n in 1..top {
        let (cur, prev) = (&out[n], &out[n - 1]);
        let mut next = vec![TrigPoly2::zero(mode); cur.len() + 1];
        for (j, a) in cur.iter().enumerate() {
            next[j] = &next[j] + &(&c * a).scale_i64(2);
            next[j + 1] = &next[j + 1] + &a.scale_i64(2);
        }
        for (j, a) in prev.iter().enumerate() {
            next[j] = &next[j] - a;
        }
        out.push(next);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trig::TrigPoly;

    const E: Mode = Mode::Exact;

    fn table(k: &[i64]) -> HadamardTable {
        HadamardTable::new(&KData::trivial(k, E).unwrap()).unwrap()
    }

    #[test]
    fn free_table() {
        let t = table(&[0]);
        assert_eq!(t.sigmas().len(), 1);
        assert_eq!(t.sigma(0), TrigRational2::one(E));
        let (x, xi, tt) = ([0.3, 1.1], [-0.5, 0.2], 0.7);
        let d2: f64 = (0.8f64).powi(2) + (0.9f64).powi(2);
        let free = (-d2 / (4.0 * tt)).exp() / (4.0 * PI * tt);
        assert!((t.heat_kernel_eval(x, xi, tt).unwrap() - free).abs() < 1e-16);
        assert!((t.ba_eval(x, xi).unwrap() - (0.3f64 * -0.5 + 1.1 * 0.2).exp()).abs() < 1e-15);
        assert_eq!(t.log_term(), SeparatedFunction::term(TrigRational2::one(E), 0, 0));
    }

    #[test]
    fn first_coefficient_closed_form() {
        let t = table(&[0, 1]);
        assert_eq!(t.sigma(1).to_text(), "-2/(sin(p)*sin(q))");
        assert_eq!(t.sigma(0), TrigRational2::one(E));
        let (x, xi) = ([0.0, 2.0], [0.0, 1.0]);
        assert!((t.u_eval(x, xi, 1).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(t.u_eval(x, xi, 0).unwrap(), 1.0);
        assert_eq!(t.u_eval(x, xi, 5).unwrap(), 0.0);
        assert!(t.heat_kernel_eval(x, xi, 1.0).unwrap().abs() < 1e-16);
        let e2 = 2f64.exp();
        assert!((t.ba_eval(x, xi).unwrap() - e2 / 2.0).abs() < 1e-14);
        assert_eq!(t.heat_kernel_eval(x, xi, 0.0), Err(Error::NonPositiveTime(0.0)));
        assert_eq!(t.u_eval([0.0, 0.0], xi, 1), Err(Error::OriginError));
    }

    #[test]
    fn log_term_first_case() {
        let t = table(&[0, 1]);
        // −cot φ cot ϕ + (1/(sin φ sin ϕ))(r/ϱ + ϱ/r)/2
        let mcot = TrigRational::over(TrigPoly::cos(1, E), Var::P, &TrigPoly::sin(1, E), 1).unwrap();
        let csc = TrigRational::over(TrigPoly::one(E), Var::P, &TrigPoly::sin(1, E), 1).unwrap();
        let mut expect = SeparatedFunction::term(TrigRational2::separable(&mcot, &mcot).neg(), 0, 0);
        let half = TrigRational2::separable(&csc, &csc).scale(&Scalar::ratio(1, 2));
        expect.push(half.clone(), 1, -1);
        expect.push(half, -1, 1);
        assert!(t.log_term().approx_eq(&expect));
        let series = t.log_term_series();
        assert_eq!(series[0], SeparatedFunction::term(TrigRational2::one(E), 0, 0));
        let g1 = TrigRational2::separable(&csc, &csc).scale(&Scalar::ratio(1, 2));
        assert!(series[1].approx_eq(&SeparatedFunction::term(g1, -1, -1)));
    }

    #[test]
    fn symmetry_and_homogeneity() {
        let t = table(&[0, 1, 3]);
        for s in t.sigmas() {
            assert!(s.swap().approx_eq(s));
        }
        let (x, xi, lam) = ([0.4, 1.2], [-0.7, 0.5], 1.7);
        for nu in 0..=3 {
            let a = t.u_eval([lam * x[0], lam * x[1]], [lam * xi[0], lam * xi[1]], nu).unwrap();
            let b = t.u_eval(x, xi, nu).unwrap() * lam.powi(-2 * nu as i32);
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300));
        }
    }

    #[test]
    fn shifted_chebyshev_matches_derivatives() {
        let sh = shifted_chebyshev(6, E);
        let powers = cos_difference_powers(6, E);
        let mut fact = 1i64;
        for nu in 0..=6u32 {
            if nu > 0 {
                fact *= nu as i64;
            }
            let d = cheb_derivative(6, nu).eval_two_angle(&powers);
            assert_eq!(sh[6][nu as usize].scale_i64(fact), d);
        }
    }

    #[test]
    fn json_round_trip() {
        for k in [&[0][..], &[0, 1], &[0, 1, 3]] {
            let t = table(k);
            let back = HadamardTable::from_json(&t.to_json()).unwrap();
            assert_eq!(back, t);
        }
    }
}
