//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::time::{Duration, Instant};

use huygens::chebyshev::{cheb, cos_difference_powers};
use huygens::hadamard::HadamardTable;
use huygens::spectral::Spectrum;
use huygens::verify::{self, Perturbation, VerifyReport};
use huygens::{KData, Mode, Phase, Scalar, TrigPoly2};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const E: Mode = Mode::Exact;
const FAMILY: [&[i64]; 4] = [&[0, 1], &[0, 2], &[0, 1, 3], &[0, 1, 3, 4]];

struct Outcome {
    passed: bool,
    note: String,
}

fn outcome(passed: bool, note: impl Into<String>) -> Outcome {
    Outcome { passed, note: note.into() }
}

/// Folds reports into an outcome, keeping the first failure.
fn from_reports(reports: &[VerifyReport], extra: &str) -> Outcome {
    match reports.iter().find(|r| !r.passed()) {
        Some(r) => outcome(false, format!("{} {} failed: {}", r.check_name, r.subject, r.witness().unwrap_or("?"))),
        None => outcome(true, format!("{} reports{extra}", reports.len())),
    }
}

fn trivial(k: &[i64]) -> KData {
    KData::trivial(k, E).unwrap()
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Strictly increasing `k ⊆ {0,…,8}` with `k_0 = 0` and `m ≤ 3`, each with
/// trivial phases and once more with phase `(3/5, 4/5)` on the last entry.
fn small_family() -> Vec<KData> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << 8) {
        if mask.count_ones() > 3 {
            continue;
        }
        let mut k = vec![0i64];
        k.extend((1..=8).filter(|j| mask & (1 << (j - 1)) != 0));
        let data = trivial(&k);
        if k.len() > 1 {
            let phase = Phase::new(Scalar::ratio(3, 5), Scalar::ratio(4, 5));
            out.push(data.with_phase(k.len() - 1, phase).unwrap());
        }
        out.push(data);
    }
    out
}

fn potential_reproduction() -> Outcome {
    let s = Spectrum::new(&trivial(&[0, 1, 3, 4])).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0;
    while checked < 1000 {
        let x1 = q(rng.gen_range(-60..=60), rng.gen_range(1..=25));
        let x2 = q(rng.gen_range(-60..=60), rng.gen_range(1..=25));
        if x2 == q(0, 1) {
            continue;
        }
        let (a, b) = (&x1 * &x1, &x2 * &x2);
        let formula = q(12, 1) * (q(49, 1) * &a * &a + q(28, 1) * &a * &b - &b * &b)
            / (&b * (q(7, 1) * &a + &b) * (q(7, 1) * &a + &b));
        match s.potential_exact(&x1, &x2) {
            Ok(v) if v == formula => checked += 1,
            Ok(v) => return outcome(false, format!("at ({x1}, {x2}): {v} != {formula}")),
            Err(e) => return outcome(false, format!("at ({x1}, {x2}): {e}")),
        }
    }
    outcome(true, "1000 rational points, exact equality")
}

fn over_small_family(check: fn(&KData) -> huygens::Result<VerifyReport>) -> Outcome {
    let reports: Vec<VerifyReport> = small_family().iter().map(|d| check(d).unwrap()).collect();
    let exact = reports.iter().all(|r| r.status == verify::Status::ExactPass);
    let o = from_reports(&reports, "");
    outcome(o.passed && exact, o.note)
}

fn darboux_chains() -> Outcome {
    let mut reports = Vec::new();
    for (k, next) in [(&[0i64, 1][..], 3u32), (&[0, 2], 5), (&[0, 1, 3], 4)] {
        let d = trivial(k);
        reports.push(verify::check_darboux(&d, next).unwrap());
        let mut extended: Vec<i64> = k.to_vec();
        extended.push(next as i64);
        reports.push(verify::check_cramer(&trivial(&extended)).unwrap());
    }
    from_reports(&reports, " (Id1/Id2 and Cramer)")
}

fn over_family(check: impl Fn(&HadamardTable) -> VerifyReport) -> Outcome {
    let reports: Vec<VerifyReport> = FAMILY
        .iter()
        .map(|k| check(&HadamardTable::new(&trivial(k)).unwrap()))
        .collect();
    from_reports(&reports, "")
}

fn transport_oracle() -> Outcome {
    let mut reports = Vec::new();
    for k in FAMILY {
        let t = HadamardTable::new(&trivial(k)).unwrap();
        match verify::check_transport_oracle(&t, 20, 1) {
            Ok(r) => reports.push(r),
            Err(e) => return outcome(false, format!("{k:?}: {e}")),
        }
    }
    let worst = reports
        .iter()
        .filter_map(|r| match r.status {
            verify::Status::NumericPass { max_residual } => Some(max_residual),
            _ => None,
        })
        .fold(0.0, f64::max);
    from_reports(&reports, &format!(", 20 rays each, max error {worst:.1e}"))
}

fn heat_residual() -> Outcome {
    let mut reports = Vec::new();
    for k in FAMILY {
        let t = HadamardTable::new(&trivial(k)).unwrap();
        let samples = verify::sample_heat(&t, 20, 1).unwrap();
        let r = verify::check_heat_residual(&t, &samples, verify::HEAT_STEP, verify::HEAT_TIME_STEP, 1e-6);
        match r {
            Ok(r) => reports.push(r),
            Err(e) => return outcome(false, format!("{k:?}: {e}")),
        }
    }
    let worst = reports
        .iter()
        .filter_map(|r| match r.status {
            verify::Status::NumericPass { max_residual } => Some(max_residual),
            _ => None,
        })
        .fold(0.0, f64::max);
    from_reports(&reports, &format!(", 20 samples each, max residual {worst:.1e}, Richardson >= 8"))
}

fn chebyshev() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let angles: Vec<f64> = (0..1000).map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)).collect();
    let mut worst = 0.0f64;
    for n in 0..=32 {
        let t = cheb(n);
        for &th in &angles {
            worst = worst.max((t.eval_f64(th.cos()) - (n as f64 * th).cos()).abs());
        }
    }
    if worst >= 1e-12 {
        return outcome(false, format!("machine error {worst:e}"));
    }
    let powers = cos_difference_powers(12, E);
    for n in 0..=12 {
        let lhs: TrigPoly2 = cheb(n).eval_two_angle(&powers);
        if lhs != TrigPoly2::cos_difference(n, E) {
            return outcome(false, format!("two-angle identity fails at N={n}"));
        }
    }
    outcome(true, format!("max machine error {worst:.1e}, exact for N <= 12"))
}

fn negative_controls() -> Outcome {
    let d = trivial(&[0, 1, 3]);
    let last = d.len() - 1;
    let sigma = verify::perturbed_table(&d, Perturbation::Sigma(1)).unwrap();
    let order = verify::perturbed_table(&d, Perturbation::Order(last)).unwrap();
    let cases: Vec<(&str, VerifyReport)> = vec![
        ("unity", verify::check_unity_with(&d, Perturbation::C(1)).unwrap()),
        ("eigen", verify::check_eigen_with(&d, Perturbation::Psi(1)).unwrap()),
        ("darboux", verify::check_darboux_with(&d, 4, Perturbation::Psi(0)).unwrap()),
        ("cramer", verify::check_cramer_with(&d, Perturbation::Psi(1)).unwrap()),
        ("transport", verify::check_transport_symbolic(&sigma)),
        ("vanishing", verify::check_vanishing(&order)),
        ("goursat", verify::check_goursat(&sigma)),
        ("series", verify::check_series(&sigma)),
    ];
    for (name, r) in &cases {
        match r.witness() {
            Some(w) if !w.is_empty() => {}
            _ => return outcome(false, format!("{name} passed under perturbation")),
        }
    }
    outcome(true, format!("{} checks fail with witnesses", cases.len()))
}

fn main() {
    type Criterion = (&'static str, Duration, Box<dyn Fn() -> Outcome>);
    let criteria: Vec<Criterion> = vec![
        ("potential reproduction", Duration::from_secs(5), Box::new(potential_reproduction)),
        ("unity identity", Duration::from_secs(60), Box::new(|| over_small_family(verify::check_unity))),
        ("eigenfunction identity", Duration::from_secs(60), Box::new(|| over_small_family(verify::check_eigen))),
        ("Darboux and Cramer identities", Duration::from_secs(30), Box::new(darboux_chains)),
        ("transport equations, symbolic", Duration::from_secs(120), Box::new(|| over_family(verify::check_transport_symbolic))),
        ("transport oracle agreement", Duration::from_secs(120), Box::new(transport_oracle)),
        ("vanishing beyond k_m", Duration::from_secs(60), Box::new(|| over_family(verify::check_vanishing))),
        ("Goursat problem", Duration::from_secs(60), Box::new(|| over_family(verify::check_goursat))),
        ("series consistency", Duration::from_secs(60), Box::new(|| over_family(verify::check_series))),
        ("heat residual", Duration::from_secs(60), Box::new(heat_residual)),
        ("Chebyshev identity", Duration::from_secs(10), Box::new(chebyshev)),
        ("negative controls", Duration::from_secs(30), Box::new(negative_controls)),
    ];
    let mut failures = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let elapsed = start.elapsed();
        let passed = o.passed && elapsed < *budget;
        if !passed {
            failures += 1;
        }
        println!(
            "{} {:>2} {name}: {} [{:.2}s / {}s]",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            o.note,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
