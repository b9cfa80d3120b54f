//! Independent checks of the identities behind the closed forms.
//!
//! Exact checks build both sides of an identity in the symbolic algebra and
//! pass when they canonicalize to the same form. In float mode the same
//! comparison is tolerance-based and reports the largest relative gap.
//! Numeric checks sample admissible points away from the singular lines.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::hadamard::{HadamardTable, SigmaInputs};
use crate::kdata::{KData, Phase};
use crate::numeric::{dd_div, dd_exp, gauss_legendre, FastRational};
use crate::rational::{Numerator, Rational, TrigRational, TrigRational2, Var};
use crate::scalar::{Mode, Scalar};
use crate::separated::SeparatedFunction;
use crate::spectral::{Darboux, Spectrum, DEFAULT_DEN_GUARD};
use crate::trig2::TrigPoly2;
use crate::wronskian::{full_wronskian, reduced_wronskian};

/// Minimal angular distance (radians) of sample points from the zero lines of `W`.
pub const ANGLE_MARGIN: f64 = 0.1;
/// Angular margin of the rays sampled for the quadrature oracle; the
/// finite-difference Laplacian inside the oracle needs room.
pub const ORACLE_MARGIN: f64 = 0.2;
/// Interior points checked along a sampled segment.
pub const SEGMENT_CHECKS: usize = 64;
/// Oracle tolerance for `ν ≤ 2`.
pub const ORACLE_TOL: f64 = 1e-6;
/// Oracle tolerance for `ν = 3`.
pub const ORACLE_TOL_DEEP: f64 = 1e-4;
pub const HEAT_TOL: f64 = 1e-6;
pub const RICHARDSON_MIN: f64 = 8.0;
/// Residuals below `RICHARDSON_FLOOR·tol` are exempt from the ratio test:
/// space and time truncation errors can cancel there.
pub const RICHARDSON_FLOOR: f64 = 1e-3;
pub const BA_CONSTANCY: f64 = 1e-5;

const WITNESS_CHARS: usize = 4000;

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    ExactPass,
    NumericPass { max_residual: f64 },
    Fail { witness: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub check_name: String,
    /// The input the check ran on, e.g. `k=(0,1,3)`.
    pub subject: String,
    pub status: Status,
    pub samples: usize,
    pub elapsed: Duration,
    pub detail: Option<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        !matches!(self.status, Status::Fail { .. })
    }

    pub fn witness(&self) -> Option<&str> {
        match &self.status {
            Status::Fail { witness } => Some(witness),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "check": self.check_name,
            "subject": self.subject,
            "samples": self.samples,
            "elapsed_ms": self.elapsed.as_secs_f64() * 1e3,
        });
        let m = v.as_object_mut().expect("object");
        match &self.status {
            Status::ExactPass => {
                m.insert("status".into(), json!("ExactPass"));
            }
            Status::NumericPass { max_residual } => {
                m.insert("status".into(), json!("NumericPass"));
                m.insert("max_residual".into(), json!(max_residual));
            }
            Status::Fail { witness } => {
                m.insert("status".into(), json!("Fail"));
                m.insert("witness".into(), json!(witness));
            }
        }
        if let Some(d) = &self.detail {
            m.insert("detail".into(), json!(d));
        }
        v
    }

    /// One JSON line.
    pub fn to_json_line(&self) -> String {
        self.to_json().to_string()
    }
}

/// `k=(0,1,3)` plus any nontrivial phases.
pub fn subject(data: &KData) -> String {
    let k: Vec<String> = data.k().iter().map(u32::to_string).collect();
    let mut out = format!("k=({})", k.join(","));
    for (i, p) in data.phases().iter().enumerate() {
        if !p.is_trivial() {
            out.push_str(&format!(" phase[{i}]=({},{})", p.cos, p.sin));
        }
    }
    out
}

/// A deliberate single-coefficient change used by negative controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perturbation {
    None,
    /// `c_i ↦ c_i + 1`.
    C(usize),
    /// `Ψ_i ↦ Ψ_i + 1`; in the Cramer check `W_î ↦ 2 W_î`.
    Psi(usize),
    /// `k_i ↦ k_i + 1` wherever `k_i` enters as a Chebyshev order or eigenvalue.
    Order(usize),
    /// `σ_ν ↦ 2 σ_ν`.
    Sigma(usize),
}

impl Perturbation {
    pub fn apply(&self, inputs: &mut SigmaInputs) {
        match *self {
            Perturbation::C(i) => inputs.c[i] = &inputs.c[i] + &Scalar::one(inputs.c[i].mode()),
            Perturbation::Psi(i) => inputs.psi[i] = inputs.psi[i].add(&TrigRational::one(inputs.psi[i].mode())),
            Perturbation::Order(i) => inputs.orders[i] += 1,
            Perturbation::None | Perturbation::Sigma(_) => {}
        }
    }
}

/// The Hadamard table of `data` with one perturbation applied.
pub fn perturbed_table(data: &KData, p: Perturbation) -> Result<HadamardTable> {
    let s = Spectrum::new(data)?;
    let mut inputs = SigmaInputs::from_spectrum(&s);
    p.apply(&mut inputs);
    let table = HadamardTable::from_inputs(s, inputs);
    Ok(match p {
        Perturbation::Sigma(nu) => {
            let doubled = table.sigma(nu as u32).scale_i64(2);
            table.with_sigma(nu, doubled)
        }
        _ => table,
    })
}

trait Comparable {
    fn same(&self, other: &Self) -> bool;
    /// Relative size and canonical text of `self − other`.
    fn gap(&self, other: &Self) -> (f64, String);
}

impl Comparable for TrigPoly2 {
    fn same(&self, other: &Self) -> bool {
        self.approx_eq(other)
    }

    fn gap(&self, other: &Self) -> (f64, String) {
        let d = self - other;
        let scale = self.max_abs_coeff().max(other.max_abs_coeff()).max(f64::MIN_POSITIVE);
        (d.max_abs_coeff() / scale, d.to_text())
    }
}

impl<N: Numerator> Comparable for Rational<N> {
    fn same(&self, other: &Self) -> bool {
        self.approx_eq(other)
    }

    fn gap(&self, other: &Self) -> (f64, String) {
        let d = self.difference(other).reduce();
        let scale = self
            .num()
            .max_abs_coeff()
            .max(other.num().max_abs_coeff())
            .max(f64::MIN_POSITIVE);
        (d.num().max_abs_coeff() / scale, d.to_text())
    }
}

impl Comparable for SeparatedFunction {
    fn same(&self, other: &Self) -> bool {
        self.approx_eq(other)
    }

    fn gap(&self, other: &Self) -> (f64, String) {
        let d = self.sub(other);
        let size = |s: &SeparatedFunction| {
            s.terms()
                .map(|(_, f)| f.num().max_abs_coeff())
                .fold(0.0, f64::max)
        };
        let scale = size(self).max(size(other)).max(f64::MIN_POSITIVE);
        (size(&d) / scale, d.witness().unwrap_or_else(|| "0".into()))
    }
}

fn clip(mut s: String) -> String {
    if s.len() > WITNESS_CHARS {
        let total = s.len();
        let mut cut = WITNESS_CHARS;
        while !s.is_char_boundary(cut) {
            cut -= 1;
        }
        s.truncate(cut);
        s.push_str(&format!(" ... ({total} chars)"));
    }
    s
}

struct Tally {
    name: &'static str,
    subject: String,
    exact: bool,
    start: Instant,
    samples: usize,
    max_residual: f64,
    witness: Option<String>,
    detail: Option<String>,
}

impl Tally {
    fn new(name: &'static str, data: &KData) -> Tally {
        Tally {
            name,
            subject: subject(data),
            exact: data.mode().is_exact(),
            start: Instant::now(),
            samples: 0,
            max_residual: 0.0,
            witness: None,
            detail: None,
        }
    }

    fn ok(&self) -> bool {
        self.witness.is_none()
    }

    fn compare<T: Comparable>(&mut self, label: impl FnOnce() -> String, lhs: &T, rhs: &T) {
        self.samples += 1;
        if !self.ok() {
            return;
        }
        if lhs.same(rhs) {
            if !self.exact {
                self.max_residual = self.max_residual.max(lhs.gap(rhs).0);
            }
        } else {
            let (_, text) = lhs.gap(rhs);
            self.witness = Some(clip(format!("{}: lhs - rhs = {text}", label())));
        }
    }

    fn fail(&mut self, witness: String) {
        if self.ok() {
            self.witness = Some(clip(witness));
        }
    }

    fn finish(self) -> VerifyReport {
        let status = match self.witness {
            Some(witness) => Status::Fail { witness },
            None if self.exact => Status::ExactPass,
            None => Status::NumericPass {
                max_residual: self.max_residual,
            },
        };
        VerifyReport {
            check_name: self.name.to_string(),
            subject: self.subject,
            status,
            samples: self.samples,
            elapsed: self.start.elapsed(),
            detail: self.detail,
        }
    }
}

fn spectrum_inputs(data: &KData, p: Perturbation) -> Result<(Spectrum, SigmaInputs)> {
    let s = Spectrum::new(data)?;
    let mut inputs = SigmaInputs::from_spectrum(&s);
    p.apply(&mut inputs);
    Ok((s, inputs))
}

fn square(k: u32, mode: Mode) -> Scalar {
    Scalar::from_i64(k as i64 * k as i64, mode)
}

/// `L Ψ_i = k_i² Ψ_i` for every `i`.
pub fn check_eigen(data: &KData) -> Result<VerifyReport> {
    check_eigen_with(data, Perturbation::None)
}

pub fn check_eigen_with(data: &KData, p: Perturbation) -> Result<VerifyReport> {
    let mut t = Tally::new("eigen", data);
    let (s, inputs) = spectrum_inputs(data, p)?;
    for i in 0..s.len() {
        let lhs = s.apply_l(&inputs.psi[i]);
        let rhs = inputs.psi[i].scale(&square(inputs.orders[i], data.mode()));
        t.compare(|| format!("L[Psi_{i}] vs k_{i}^2*Psi_{i}"), &lhs, &rhs);
    }
    Ok(t.finish())
}

/// `Σ_i c_i W_î(φ) W_î(ϕ) cos(k_i(φ − ϕ)) = W(φ) W(ϕ)`.
pub fn check_unity(data: &KData) -> Result<VerifyReport> {
    check_unity_with(data, Perturbation::None)
}

pub fn check_unity_with(data: &KData, p: Perturbation) -> Result<VerifyReport> {
    let mut t = Tally::new("unity", data);
    let mode = data.mode();
    let (s, inputs) = spectrum_inputs(data, p)?;
    let w = s.w();
    let mut sum = TrigPoly2::zero(mode);
    for i in 0..s.len() {
        let cleared = inputs.psi[i].mul_num(w).reduce();
        if !cleared.den().is_one() {
            t.fail(format!("W*Psi_{i} is not a trigonometric polynomial: {cleared}"));
            continue;
        }
        let n = cleared.num();
        let term = &TrigPoly2::separable(n, n) * &TrigPoly2::cos_difference(inputs.orders[i], mode);
        sum = &sum + &term.scale(&inputs.c[i]);
    }
    t.compare(
        || "sum_i c_i W_i(p) W_i(q) cos(k_i(p-q)) vs W(p) W(q)".into(),
        &sum,
        &TrigPoly2::separable(w, w),
    );
    Ok(t.finish())
}

/// The Darboux step from `data` to `data` extended by `k_next`:
/// `A*Ψ̃_{m+1} = 0`, `A*Ψ̃_i = −Ψ_i`, `AΨ_i = (k²_{m+1} − k_i²)Ψ̃_i` and
/// `L = A*A + k²_{m+1}`.
pub fn check_darboux(data: &KData, k_next: u32) -> Result<VerifyReport> {
    check_darboux_with(data, k_next, Perturbation::None)
}

pub fn check_darboux_with(data: &KData, k_next: u32, p: Perturbation) -> Result<VerifyReport> {
    let mut t = Tally::new("darboux", data);
    let mode = data.mode();
    let ext = data.extend(k_next as i64, Phase::trivial(mode))?;
    let (s, inputs) = spectrum_inputs(data, p)?;
    let se = Spectrum::new(&ext)?;
    let d = Darboux::new(&se)?;
    let top = data.len();
    let psi_top = se.psi(top);
    t.compare(
        || format!("A*[~Psi_{top}] = 0, i.e. ~Psi' vs g*~Psi"),
        &psi_top.derivative(),
        &d.g().mul(psi_top),
    );
    let kk = square(k_next, mode);
    for i in 0..top {
        t.compare(
            || format!("A*[~Psi_{i}] vs -Psi_{i}"),
            &d.backward(se.psi(i)),
            &inputs.psi[i].neg(),
        );
        let factor = kk.checked_sub(&square(inputs.orders[i], mode))?;
        t.compare(
            || format!("A[Psi_{i}] vs ({k_next}^2 - k_{i}^2)*~Psi_{i}"),
            &d.forward(&inputs.psi[i]),
            &se.psi(i).scale(&factor),
        );
    }
    let g = d.g();
    let factored = g.mul(g).sub(&g.derivative()).add(&TrigRational::one(mode).scale(&kk));
    t.compare(|| "v vs g^2 - g' + k_next^2".into(), s.angular_potential(), &factored);
    t.detail = Some(format!("k_next={k_next}"));
    Ok(t.finish())
}

/// `(W_i / W_{m+1})′ = W·W_{i,m+1} / W_{m+1}²` for the Wronskians of
/// `χ_0 … χ_{m+1}` (the entries of `data`, the last one playing `m+1`).
pub fn check_cramer(data: &KData) -> Result<VerifyReport> {
    check_cramer_with(data, Perturbation::None)
}

pub fn check_cramer_with(data: &KData, p: Perturbation) -> Result<VerifyReport> {
    let mut t = Tally::new("cramer", data);
    if data.len() < 2 {
        t.detail = Some("fewer than two functions, nothing to check".into());
        return Ok(t.finish());
    }
    let last = data.len() - 1;
    let w = full_wronskian(data);
    let w_last = reduced_wronskian(data, &[last])?;
    for i in 0..last {
        let mut wi = reduced_wronskian(data, &[i])?;
        if p == Perturbation::Psi(i) {
            wi = wi.scale_i64(2);
        }
        let lhs = TrigRational::over(wi, Var::P, &w_last, 1)?.derivative();
        let w_pair = reduced_wronskian(data, &[i, last])?;
        let rhs = TrigRational::over(&w * &w_pair, Var::P, &w_last, 2)?;
        t.compare(|| format!("(W_{i}/W_{last})' vs W*W_{{{i},{last}}}/W_{last}^2"), &lhs, &rhs);
    }
    Ok(t.finish())
}

/// `(x−ξ)·∂_x Q_ν + ν Q_ν = −λ (−Δ + V) Q_{ν−1}` for `Q_ν = λ^ν U_ν`,
/// `λ ∈ {1, 1/2, −1/4}`, `ν = 1 … k_m + 1`. The last equation states
/// `(−Δ + V) U_{k_m} = 0`.
pub fn check_transport_symbolic(table: &HadamardTable) -> VerifyReport {
    let mut t = Tally::new("transport", table.data());
    let mode = table.mode();
    let v2 = table.v2();
    let zero_v = TrigRational2::from_num(TrigPoly2::zero(mode));
    let lambdas = [
        ("1", Scalar::one(mode)),
        ("1/2", Scalar::one(mode).half()),
        ("-1/4", Scalar::one(mode).half().half().mul_i64(-1)),
    ];
    for (name, lambda) in &lambdas {
        let mut prev = table.u_separated(0, lambda);
        for nu in 1..=table.k_max() + 1 {
            let u = table.u_separated(nu, lambda);
            let nu_s = Scalar::from_i64(nu as i64, mode);
            // split −Δ and V so that float mode compares nonzero sides
            let lhs = u
                .directional()
                .add(&u.scale(&nu_s))
                .add(&prev.apply_full(&zero_v).scale(lambda));
            let rhs = prev.mul_potential(v2).scale(lambda).scale(&Scalar::from_i64(-1, mode));
            t.compare(|| format!("transport nu={nu} lambda={name}"), &lhs, &rhs);
            if !t.ok() {
                break;
            }
            prev = u;
        }
    }
    t.detail = Some(format!("nu=1..={}, lambda in {{1, 1/2, -1/4}}", table.k_max() + 1));
    t.finish()
}

/// `σ_ν ≡ 0` for `k_m < ν ≤ k_m + 3`, and `(−Δ + V) U_{k_m} = 0`.
pub fn check_vanishing(table: &HadamardTable) -> VerifyReport {
    let mut t = Tally::new("vanishing", table.data());
    let mode = table.mode();
    let km = table.k_max();
    let zero = TrigRational2::from_num(TrigPoly2::zero(mode));
    for nu in km + 1..=km + 3 {
        t.compare(|| format!("sigma_{nu} vs 0"), &table.sigma_beyond(nu), &zero);
    }
    let u = table.u_separated(km, &Scalar::one(mode));
    t.compare(
        || format!("-Laplace U_{km} vs -V U_{km}"),
        &u.apply_full(&zero),
        &u.mul_potential(table.v2()).scale(&Scalar::from_i64(-1, mode)),
    );
    t.finish()
}

/// The `γ^ν` coefficients of the logarithmic term equal `U_ν/((−4)^ν ν!)`,
/// and the Laurent form equals `Σ_ν U_ν γ^ν/((−4)^ν ν!)`.
pub fn check_series(table: &HadamardTable) -> VerifyReport {
    let mut t = Tally::new("series", table.data());
    let mode = table.mode();
    let series = table.log_term_series();
    let mut denom = Scalar::one(mode);
    for (nu, coef) in series.iter().enumerate() {
        if nu > 0 {
            denom = denom.mul_i64(-4 * nu as i64);
        }
        let w = Scalar::one(mode).checked_div(&denom).expect("nonzero");
        let expected = table.u_separated(nu as u32, &Scalar::one(mode)).scale(&w);
        t.compare(|| format!("gamma^{nu} coefficient vs U_{nu}/((-4)^{nu} {nu}!)"), coef, &expected);
    }
    t.compare(
        || "Laurent form vs coefficient form".into(),
        &table.log_term(),
        &table.log_term_from_coefficients(),
    );
    t.finish()
}

/// `(−Δ + V) W = 0` for the logarithmic term in Laurent form and in
/// coefficient form, and `W = 1` on `γ = 0` (the `γ⁰` coefficient).
pub fn check_goursat(table: &HadamardTable) -> VerifyReport {
    let mut t = Tally::new("goursat", table.data());
    let mode = table.mode();
    let zero = TrigRational2::from_num(TrigPoly2::zero(mode));
    let minus_one = Scalar::from_i64(-1, mode);
    let forms = [
        ("Laurent", table.log_term()),
        ("coefficient", table.log_term_from_coefficients()),
    ];
    for (name, w) in &forms {
        t.compare(
            || format!("{name} form: -Laplace W vs -V W"),
            &w.apply_full(&zero),
            &w.mul_potential(table.v2()).scale(&minus_one),
        );
    }
    let series = table.log_term_series();
    t.compare(
        || "gamma^0 coefficient vs 1".into(),
        &series[0],
        &SeparatedFunction::term(TrigRational2::one(mode), 0, 0),
    );
    t.finish()
}

fn norm(x: [f64; 2]) -> f64 {
    x[0].hypot(x[1])
}

pub fn admissible_angle(s: &Spectrum, theta: f64, margin: f64) -> bool {
    s.distance_to_zero(theta).is_none_or(|d| d >= margin)
}

pub fn admissible_point(s: &Spectrum, x: [f64; 2], margin: f64, min_radius: f64) -> bool {
    norm(x) >= min_radius && admissible_angle(s, x[1].atan2(x[0]), margin)
}

/// Endpoints and [`SEGMENT_CHECKS`] interior points of `ξ → x` are admissible.
pub fn admissible_segment(s: &Spectrum, xi: [f64; 2], x: [f64; 2], margin: f64, min_radius: f64) -> bool {
    let n = SEGMENT_CHECKS + 1;
    (0..=n).all(|j| {
        let u = j as f64 / n as f64;
        admissible_point(s, [xi[0] + u * (x[0] - xi[0]), xi[1] + u * (x[1] - xi[1])], margin, min_radius)
    })
}

fn random_point(rng: &mut ChaCha8Rng, r0: f64, r1: f64) -> [f64; 2] {
    let r = rng.gen_range(r0..r1);
    let a = rng.gen_range(0.0..std::f64::consts::TAU);
    [r * a.cos(), r * a.sin()]
}

const MAX_DRAWS: usize = 100_000;

/// Random admissible rays `(x, ξ)` with `|x|, |ξ| ∈ [0.7, 1.5]` and
/// `|x − ξ| ∈ [0.2, 1.2]`.
pub fn sample_rays(s: &Spectrum, count: usize, seed: u64, margin: f64) -> Result<Vec<([f64; 2], [f64; 2])>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..MAX_DRAWS {
        if out.len() == count {
            return Ok(out);
        }
        let xi = random_point(&mut rng, 0.7, 1.5);
        let x = random_point(&mut rng, 0.7, 1.5);
        let d = norm([x[0] - xi[0], x[1] - xi[1]]);
        if (0.2..=1.2).contains(&d) && admissible_segment(s, xi, x, margin, 0.3) {
            out.push((x, xi));
        }
    }
    Err(Error::SingularRay(format!("found only {} admissible rays", out.len())))
}

/// Fourth-order five-point Laplacian.
fn laplacian(mut f: impl FnMut([f64; 2]) -> f64, y: [f64; 2], h: f64) -> f64 {
    const STENCIL: [(f64, f64); 4] = [(2.0, -1.0), (1.0, 16.0), (-1.0, 16.0), (-2.0, -1.0)];
    let mut acc = -60.0 * f(y);
    for k in 0..2 {
        for (d, w) in STENCIL {
            let mut z = y;
            z[k] += d * h;
            acc += w * f(z);
        }
    }
    acc / (12.0 * h * h)
}

/// Step sizes (relative to `|y|`) of the Laplacian applied to `U_1` and `U_2`.
const ORACLE_STEPS: [f64; 3] = [0.0, 5e-4, 5e-3];
const ORACLE_NODES: usize = 12;
const ORACLE_MAX_PANELS: usize = 32;

/// Hadamard coefficients along one ray by the integral form of the
/// transport equations,
/// `U_ν(x) = −∫₀¹ s^{ν−1} ((−Δ + V) U_{ν−1})(ξ + s(x − ξ)) ds`,
/// with finite-difference Laplacians and composite Gauss–Legendre quadrature.
pub struct RayOracle {
    v: FastRational,
    steps: [f64; 3],
    xi: [f64; 2],
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RayOracle {
    pub fn new(s: &Spectrum, xi: [f64; 2]) -> RayOracle {
        let mut o = RayOracle {
            v: FastRational::new(s.angular_potential()),
            steps: ORACLE_STEPS,
            xi,
            nodes: Vec::new(),
            weights: Vec::new(),
        };
        o.set_panels(2);
        o
    }

    /// Overrides the relative Laplacian steps applied to `U_1` and `U_2`.
    pub fn with_steps(mut self, h1: f64, h2: f64) -> RayOracle {
        self.steps = [0.0, h1, h2];
        self
    }

    fn set_panels(&mut self, panels: usize) {
        let (x, w) = gauss_legendre(ORACLE_NODES);
        self.nodes.clear();
        self.weights.clear();
        let width = 1.0 / panels as f64;
        for p in 0..panels {
            for (xj, wj) in x.iter().zip(&w) {
                self.nodes.push((p as f64 + 0.5 * (xj + 1.0)) * width);
                self.weights.push(0.5 * wj * width);
            }
        }
    }

    fn potential(&self, y: [f64; 2]) -> f64 {
        let rr = y[0] * y[0] + y[1] * y[1];
        let r = rr.sqrt();
        self.v.eval_cs(y[0] / r, y[1] / r) / rr
    }

    /// `U_ν(y, ξ)`.
    pub fn u(&self, nu: u32, y: [f64; 2]) -> f64 {
        if nu == 0 {
            return 1.0;
        }
        let d = [y[0] - self.xi[0], y[1] - self.xi[1]];
        let mut acc = 0.0;
        for (s, w) in self.nodes.iter().zip(&self.weights) {
            let z = [self.xi[0] + s * d[0], self.xi[1] + s * d[1]];
            acc += w * s.powi(nu as i32 - 1) * self.lu(nu - 1, z);
        }
        -acc
    }

    /// `((−Δ + V) U_ν)(z)`.
    fn lu(&self, nu: u32, z: [f64; 2]) -> f64 {
        let vz = self.potential(z);
        if nu == 0 {
            return vz;
        }
        let h = self.steps[nu as usize] * norm(z);
        -laplacian(|y| self.u(nu, y), z, h) + vz * self.u(nu, z)
    }

    /// Doubles the panel count until `U_1(x)` is stable.
    pub fn converge(&mut self, x: [f64; 2]) -> Result<()> {
        let mut panels = 2;
        loop {
            let a = self.u(1, x);
            self.set_panels(2 * panels);
            let b = self.u(1, x);
            if (a - b).abs() <= 1e-12 * a.abs().max(1.0) {
                return Ok(());
            }
            panels *= 2;
            if panels > ORACLE_MAX_PANELS {
                return Err(Error::QuadratureFailure(format!(
                    "U_1 along the ray to {x:?} changes by {:e} at {panels} panels",
                    (a - b).abs()
                )));
            }
        }
    }
}

/// `[U_0, …, U_{ν_max}]` at `(x, ξ)` from the ray oracle.
pub fn transport_oracle_numeric(data: &KData, x: [f64; 2], xi: [f64; 2], nu_max: u32) -> Result<Vec<f64>> {
    let s = Spectrum::new(data)?;
    oracle_values(&s, x, xi, nu_max)
}

fn oracle_values(s: &Spectrum, x: [f64; 2], xi: [f64; 2], nu_max: u32) -> Result<Vec<f64>> {
    if nu_max as usize > ORACLE_STEPS.len() {
        return Err(Error::QuadratureFailure(format!(
            "oracle depth is limited to nu <= {}",
            ORACLE_STEPS.len()
        )));
    }
    if !admissible_segment(s, xi, x, ANGLE_MARGIN, 1e-3) {
        return Err(Error::SingularRay(format!("{xi:?} -> {x:?}")));
    }
    let mut o = RayOracle::new(s, xi);
    o.converge(x)?;
    Ok((0..=nu_max).map(|nu| o.u(nu, x)).collect())
}

/// Compares the ray oracle with the closed form at `rays` admissible rays,
/// up to `ν = min(k_m, 3)`.
pub fn check_transport_oracle(table: &HadamardTable, rays: usize, seed: u64) -> Result<VerifyReport> {
    let mut t = Tally::new("transport-oracle", table.data());
    t.exact = false;
    let s = table.spectrum();
    let nu_max = table.k_max().min(3);
    for (x, xi) in sample_rays(s, rays, seed, ORACLE_MARGIN)? {
        let oracle = oracle_values(s, x, xi, nu_max)?;
        let closed = table.u_all(x, xi, DEFAULT_DEN_GUARD)?;
        for nu in 1..=nu_max as usize {
            t.samples += 1;
            let err = (oracle[nu] - closed[nu]).abs() / closed[nu].abs().max(1.0);
            let tol = if nu <= 2 { ORACLE_TOL } else { ORACLE_TOL_DEEP };
            t.max_residual = t.max_residual.max(err);
            if err >= tol {
                t.fail(format!(
                    "x={x:?} xi={xi:?} nu={nu}: oracle {} vs closed form {} (relative {err:e})",
                    oracle[nu], closed[nu]
                ));
            }
        }
    }
    t.detail = Some(format!("{rays} rays, nu=1..={nu_max}, seed={seed}"));
    Ok(t.finish())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatSample {
    pub x: [f64; 2],
    pub xi: [f64; 2],
    pub t: f64,
}

/// Default steps of the heat residual: `h = HEAT_STEP·ℓ` with the local
/// length `ℓ` of [`heat_length`], and `τ = HEAT_TIME_STEP·t`.
pub const HEAT_STEP: f64 = 1e-2;
pub const HEAT_TIME_STEP: f64 = 5e-3;

/// `min(distance to the nearest singular line, |x|, √t) / (k_m + 1)`.
pub fn heat_length(table: &HadamardTable, s: &HeatSample) -> f64 {
    let r = norm(s.x);
    let line = table
        .spectrum()
        .distance_to_zero(s.x[1].atan2(s.x[0]))
        .map_or(r, |a| r * a.min(std::f64::consts::FRAC_PI_2).sin());
    line.min(r).min(s.t.sqrt()) / (table.k_max() + 1) as f64
}

/// Random admissible samples with `t ∈ [0.3, 1]`, `|x − ξ| ≤ 1.2` and a
/// kernel sum that is not close to a sign change.
pub fn sample_heat(table: &HadamardTable, count: usize, seed: u64) -> Result<Vec<HeatSample>> {
    let s = table.spectrum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..MAX_DRAWS {
        if out.len() == count {
            return Ok(out);
        }
        let xi = random_point(&mut rng, 0.7, 1.5);
        let x = random_point(&mut rng, 0.7, 1.5);
        let t = rng.gen_range(0.3..1.0);
        if norm([x[0] - xi[0], x[1] - xi[1]]) > 1.2
            || !admissible_point(s, x, 2.0 * ANGLE_MARGIN, 0.3)
            || !admissible_point(s, xi, ANGLE_MARGIN, 0.3)
        {
            continue;
        }
        let u = table.u_all(x, xi, DEFAULT_DEN_GUARD)?;
        let sum: f64 = u.iter().rev().fold(0.0, |acc, v| acc * t + v);
        let abs: f64 = u.iter().rev().fold(0.0, |acc, v| acc * t + v.abs());
        if sum.abs() >= 0.1 * abs {
            out.push(HeatSample { x, xi, t });
        }
    }
    Err(Error::SingularRay(format!("found only {} admissible heat samples", out.len())))
}

/// `Φ(·, ξ, ·)` in double-double arithmetic, so that finite differences
/// see rounding noise far below their truncation error.
struct DdKernel {
    sigma: Vec<FastRational>,
    rho: f64,
    xi: [f64; 2],
}

impl DdKernel {
    fn new(table: &HadamardTable, xi: [f64; 2]) -> DdKernel {
        let q = xi[1].atan2(xi[0]);
        DdKernel {
            sigma: (0..=table.k_max()).map(|nu| table.sigma_restricted(nu, q)).collect(),
            rho: norm(xi),
            xi,
        }
    }

    fn phi(&self, x: [TwoFloat; 2], t: TwoFloat) -> TwoFloat {
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let (c, s) = (dd_div(x[0], r), dd_div(x[1], r));
        let rrho = r * self.rho;
        let mut sum = TwoFloat::from(0.0);
        for (nu, f) in self.sigma.iter().enumerate().rev() {
            sum = sum * t + dd_div(f.eval_cs_dd(c, s), rrho.powi(nu as i32));
        }
        let (d0, d1) = (x[0] - self.xi[0], x[1] - self.xi[1]);
        let gauss = dd_div(dd_exp(-dd_div(d0 * d0 + d1 * d1, t * 4.0)), t * (4.0 * std::f64::consts::PI));
        gauss * sum
    }
}

/// `|(∂_t − Δ_x + V) Φ| / |Φ|` by fourth-order central differences with
/// steps `h` in space and `τ` in time.
pub fn heat_residual(table: &HadamardTable, s: &HeatSample, h: f64, tau: f64) -> Result<f64> {
    if s.t <= 2.0 * tau {
        return Err(Error::NonPositiveTime(s.t - 2.0 * tau));
    }
    table.u_all(s.x, s.xi, DEFAULT_DEN_GUARD)?;
    let v = table.spectrum().potential_eval(s.x, DEFAULT_DEN_GUARD)?;
    let kernel = DdKernel::new(table, s.xi);
    let (x, t) = ([TwoFloat::from(s.x[0]), TwoFloat::from(s.x[1])], TwoFloat::from(s.t));
    let at = |dx: f64, dy: f64, dt: f64| kernel.phi([x[0] + dx, x[1] + dy], t + dt);
    let center = at(0.0, 0.0, 0.0);
    let d_t = -at(0.0, 0.0, 2.0 * tau) + at(0.0, 0.0, tau) * 8.0 - at(0.0, 0.0, -tau) * 8.0
        + at(0.0, 0.0, -2.0 * tau);
    let d_t = dd_div(d_t, TwoFloat::from(12.0 * tau));
    let mut lap = center * -60.0;
    for (d, w) in [(2.0, -1.0), (1.0, 16.0), (-1.0, 16.0), (-2.0, -1.0)] {
        lap += (at(d * h, 0.0, 0.0) + at(0.0, d * h, 0.0)) * w;
    }
    let lap = dd_div(lap, TwoFloat::from(12.0) * h * h);
    Ok(f64::from(dd_div(d_t - lap + center * v, center).abs()))
}

/// Heat-equation residual at every sample with steps `h·ℓ` and `τ·t`
/// (`ℓ` from [`heat_length`]), together with the Richardson ratio of the
/// residuals at `(h, τ)` and `(h/2, τ/2)`.
pub fn check_heat_residual(
    table: &HadamardTable,
    samples: &[HeatSample],
    h: f64,
    tau: f64,
    tol: f64,
) -> Result<VerifyReport> {
    let mut t = Tally::new("heat", table.data());
    t.exact = false;
    let mut min_ratio = f64::INFINITY;
    for s in samples {
        t.samples += 1;
        let (hx, ht) = (h * heat_length(table, s), tau * s.t);
        let coarse = heat_residual(table, s, hx, ht)?;
        let fine = heat_residual(table, s, hx / 2.0, ht / 2.0)?;
        let ratio = coarse / fine;
        if coarse >= RICHARDSON_FLOOR * tol {
            min_ratio = min_ratio.min(ratio);
        }
        t.max_residual = t.max_residual.max(coarse);
        let converging = coarse < RICHARDSON_FLOOR * tol || ratio >= RICHARDSON_MIN;
        if coarse >= tol || !converging {
            t.fail(format!(
                "x={:?} xi={:?} t={}: residual {coarse:e} at h={hx:e}, {fine:e} at h/2 (ratio {ratio:.2})",
                s.x, s.xi, s.t
            ));
        }
    }
    t.detail = Some(format!(
        "h={h}*local length, tau={tau}*t, min Richardson ratio {min_ratio:.2}"
    ));
    Ok(t.finish())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaStatistics {
    pub ratios: Vec<f64>,
    pub mean: f64,
    /// `(max − min)/|mean|`.
    pub spread: f64,
}

impl BaStatistics {
    pub fn is_constant(&self) -> bool {
        self.spread < BA_CONSTANCY
    }
}

/// Random admissible points for the probe at a fixed `ξ`.
pub fn sample_ba_points(table: &HadamardTable, xi: [f64; 2], count: usize, seed: u64) -> Result<Vec<[f64; 2]>> {
    let s = table.spectrum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..MAX_DRAWS {
        if out.len() == count {
            return Ok(out);
        }
        let x = random_point(&mut rng, 0.5, 1.5);
        if !admissible_point(s, x, 2.0 * ANGLE_MARGIN, 0.3) {
            continue;
        }
        let u = table.u_all(x, xi, DEFAULT_DEN_GUARD)?;
        let sum: f64 = u.iter().rev().fold(0.0, |acc, v| acc * 0.5 + v);
        let abs: f64 = u.iter().rev().fold(0.0, |acc, v| acc * 0.5 + v.abs());
        if sum.abs() >= 0.1 * abs {
            out.push(x);
        }
    }
    Err(Error::SingularRay(format!("found only {} admissible probe points", out.len())))
}

/// `(−Δ + V)Ψ/Ψ` at each point for `Ψ = (Σ_ν U_ν w^ν) e^{(x, ξ)}`;
/// `w = 1/2` is the Baker–Akhiezer function.
pub fn ba_ratios(table: &HadamardTable, xi: [f64; 2], xs: &[[f64; 2]], weight: f64) -> Result<BaStatistics> {
    let psi = |x: [f64; 2]| -> Result<f64> {
        Ok(table.kernel_sum(x, xi, weight)? * (x[0] * xi[0] + x[1] * xi[1]).exp())
    };
    let mut ratios = Vec::with_capacity(xs.len());
    for &x in xs {
        let center = psi(x)?;
        let mut err = None;
        let lap = laplacian(
            |y| {
                psi(y).unwrap_or_else(|e| {
                    err = Some(e);
                    0.0
                })
            },
            x,
            1e-3 * norm(x),
        );
        if let Some(e) = err {
            return Err(e);
        }
        let v = table.spectrum().potential_eval(x, DEFAULT_DEN_GUARD)?;
        ratios.push((-lap + v * center) / center);
    }
    let n = ratios.len().max(1) as f64;
    let mean = ratios.iter().sum::<f64>() / n;
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| (a.min(r), b.max(r)));
    let spread = if ratios.is_empty() { 0.0 } else { (hi - lo) / mean.abs() };
    Ok(BaStatistics { ratios, mean, spread })
}

/// Reports whether `(−Δ + V)Ψ_BA/Ψ_BA` is constant in `x`; the constant
/// itself is reported in `detail`, not asserted.
pub fn ba_eigen_probe(table: &HadamardTable, xi: [f64; 2], xs: &[[f64; 2]]) -> Result<VerifyReport> {
    ba_eigen_probe_weighted(table, xi, xs, 0.5)
}

pub fn ba_eigen_probe_weighted(
    table: &HadamardTable,
    xi: [f64; 2],
    xs: &[[f64; 2]],
    weight: f64,
) -> Result<VerifyReport> {
    let mut t = Tally::new("ba-probe", table.data());
    t.exact = false;
    let stats = ba_ratios(table, xi, xs, weight)?;
    t.samples = xs.len();
    t.max_residual = stats.spread;
    if !stats.is_constant() {
        t.fail(format!(
            "xi={xi:?}: ratio not constant, min {} max {} at {} points",
            stats.ratios.iter().copied().fold(f64::INFINITY, f64::min),
            stats.ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            xs.len()
        ));
    }
    t.detail = Some(format!(
        "xi={xi:?}, mean ratio {:.12}, -|xi|^2 = {:.12}, relative spread {:e}",
        stats.mean,
        -(xi[0] * xi[0] + xi[1] * xi[1]),
        stats.spread
    ));
    Ok(t.finish())
}

pub const SUITES: [&str; 12] = [
    "eigen",
    "unity",
    "darboux",
    "cramer",
    "transport",
    "transport-oracle",
    "vanishing",
    "series",
    "goursat",
    "heat",
    "ba-probe",
    "all",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Frequency added by the Darboux check; `k_m + 1` when absent.
    pub k_next: Option<u32>,
    pub rays: usize,
    pub heat_samples: usize,
    pub ba_samples: usize,
    /// Overrides the heat-residual tolerance.
    pub tol: Option<f64>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: 1,
            k_next: None,
            rays: 20,
            heat_samples: 20,
            ba_samples: 10,
            tol: None,
        }
    }
}

/// Runs one named suite (or `all`) and returns the reports in suite order.
pub fn run_suite(data: &KData, suite: &str, opts: &SuiteOptions) -> Result<Vec<VerifyReport>> {
    if !SUITES.contains(&suite) {
        return Err(Error::Parse(format!(
            "unknown suite '{suite}', expected one of {}",
            SUITES.join(", ")
        )));
    }
    let names: Vec<&str> = if suite == "all" {
        SUITES[..SUITES.len() - 1].to_vec()
    } else {
        vec![suite]
    };
    let needs_table = names.iter().any(|n| {
        matches!(
            *n,
            "transport" | "transport-oracle" | "vanishing" | "series" | "goursat" | "heat" | "ba-probe"
        )
    });
    let table = if needs_table {
        Some(HadamardTable::new(data)?)
    } else {
        None
    };
    let table = || table.as_ref().expect("table built");
    let mut out = Vec::new();
    for name in names {
        let report = match name {
            "eigen" => check_eigen(data)?,
            "unity" => check_unity(data)?,
            "darboux" => check_darboux(data, opts.k_next.unwrap_or(data.k_max() + 1))?,
            "cramer" => check_cramer(data)?,
            "transport" => check_transport_symbolic(table()),
            "transport-oracle" => check_transport_oracle(table(), opts.rays, opts.seed)?,
            "vanishing" => check_vanishing(table()),
            "series" => check_series(table()),
            "goursat" => check_goursat(table()),
            "heat" => {
                let samples = sample_heat(table(), opts.heat_samples, opts.seed)?;
                check_heat_residual(
                    table(),
                    &samples,
                    HEAT_STEP,
                    HEAT_TIME_STEP,
                    opts.tol.unwrap_or(HEAT_TOL),
                )?
            }
            "ba-probe" => {
                let xi = probe_center(table(), opts.seed)?;
                let xs = sample_ba_points(table(), xi, opts.ba_samples, opts.seed)?;
                ba_eigen_probe(table(), xi, &xs)?
            }
            _ => unreachable!("suite names are validated above"),
        };
        out.push(report);
    }
    Ok(out)
}

fn probe_center(table: &HadamardTable, seed: u64) -> Result<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    for _ in 0..MAX_DRAWS {
        let xi = random_point(&mut rng, 0.5, 1.5);
        if admissible_point(table.spectrum(), xi, 2.0 * ANGLE_MARGIN, 0.3) {
            return Ok(xi);
        }
    }
    Err(Error::SingularRay("no admissible probe center".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const E: Mode = Mode::Exact;

    fn kd(k: &[i64]) -> KData {
        KData::trivial(k, E).unwrap()
    }

    fn table(k: &[i64]) -> HadamardTable {
        HadamardTable::new(&kd(k)).unwrap()
    }

    #[test]
    fn exact_checks_pass_on_small_cases() {
        for k in [&[0][..], &[0, 1], &[0, 2], &[0, 1, 3]] {
            let d = kd(k);
            assert_eq!(check_eigen(&d).unwrap().status, Status::ExactPass, "{k:?}");
            assert_eq!(check_unity(&d).unwrap().status, Status::ExactPass, "{k:?}");
            assert_eq!(check_darboux(&d, d.k_max() + 2).unwrap().status, Status::ExactPass, "{k:?}");
            assert_eq!(check_cramer(&d).unwrap().status, Status::ExactPass, "{k:?}");
            let t = table(k);
            for r in [check_transport_symbolic(&t), check_vanishing(&t), check_series(&t), check_goursat(&t)] {
                assert_eq!(r.status, Status::ExactPass, "{} {k:?}: {:?}", r.check_name, r.witness());
            }
        }
    }

    #[test]
    fn perturbations_produce_witnesses() {
        let d = kd(&[0, 1, 3]);
        assert!(check_unity_with(&d, Perturbation::C(1)).unwrap().witness().is_some());
        assert!(check_eigen_with(&d, Perturbation::Psi(2)).unwrap().witness().is_some());
        assert!(check_darboux_with(&d, 5, Perturbation::Psi(0)).unwrap().witness().is_some());
        assert!(check_cramer_with(&d, Perturbation::Psi(1)).unwrap().witness().is_some());
        let sig = perturbed_table(&d, Perturbation::Sigma(1)).unwrap();
        assert!(check_transport_symbolic(&sig).witness().is_some());
        assert!(check_goursat(&sig).witness().is_some());
        assert!(check_series(&sig).witness().is_some());
        let ord = perturbed_table(&d, Perturbation::Order(2)).unwrap();
        assert!(check_vanishing(&ord).witness().is_some());
    }

    #[test]
    fn oracle_first_coefficient() {
        let u = transport_oracle_numeric(&kd(&[0, 1]), [0.0, 2.0], [0.0, 1.0], 2).unwrap();
        assert!((u[1] + 1.0).abs() < 1e-6, "{u:?}");
        let free = transport_oracle_numeric(&kd(&[0]), [1.0, 0.5], [0.2, 0.9], 2).unwrap();
        assert_eq!(free, vec![1.0, 0.0, 0.0]);
        assert!(matches!(
            transport_oracle_numeric(&kd(&[0, 1]), [1.0, 1.0], [1.0, -1.0], 1),
            Err(Error::SingularRay(_))
        ));
    }

    #[test]
    fn free_heat_residual_is_small() {
        let t = table(&[0]);
        let s = HeatSample {
            x: [1.0, 0.0],
            xi: [0.0, 0.0001],
            t: 1.0,
        };
        let r = heat_residual(&t, &s, 1e-2, 1e-2).unwrap();
        assert!(r < 1e-8, "{r}");
    }

    #[test]
    fn free_ba_ratio_is_minus_xi_squared() {
        let t = table(&[0]);
        let xi = [0.6, -0.8];
        let stats = ba_ratios(&t, xi, &[[0.5, 0.5], [1.0, -0.3], [-0.7, 0.2]], 0.5).unwrap();
        assert!((stats.mean + 1.0).abs() < 1e-7, "{stats:?}");
        assert!(stats.is_constant());
    }

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(matches!(run_suite(&kd(&[0, 1]), "bogus", &SuiteOptions::default()), Err(Error::Parse(_))));
    }

    #[test]
    fn report_serializes_one_line() {
        let r = check_unity(&kd(&[0, 1])).unwrap();
        let line = r.to_json_line();
        assert!(!line.contains('\n'));
        let v: Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["status"], "ExactPass");
        assert_eq!(v["subject"], "k=(0,1)");
    }
}
