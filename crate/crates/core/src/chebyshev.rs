//! Chebyshev polynomials of the first kind and their derivatives.
//!
//! Coefficients are exact integers in ascending powers of `z`.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::scalar::{Mode, Scalar};
use crate::trig2::TrigPoly2;

/// `d^ν/dz^ν T_N(z)` as integer coefficients, ascending powers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChebCoeffs {
    pub n: u32,
    pub nu: u32,
    pub coeffs: Vec<BigInt>,
}

impl ChebCoeffs {
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs_i64(&self) -> Vec<i64> {
        self.coeffs
            .iter()
            .map(|c| i64::try_from(c).expect("coefficient fits in i64"))
            .collect()
    }

    /// Horner evaluation in machine arithmetic.
    pub fn horner_f64(&self, z: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * z + bigint_f64(c))
    }

    /// Stable evaluation by the differentiated three-term recurrence.
    pub fn eval_f64(&self, z: f64) -> f64 {
        cheb_derivative_value(self.n, self.nu, z)
    }

    /// Horner evaluation in the coefficient field.
    pub fn eval(&self, z: &Scalar) -> Scalar {
        let mode = z.mode();
        self.coeffs.iter().rev().fold(Scalar::zero(mode), |acc, c| {
            &(&acc * z) + &Scalar::from_bigint(c, mode)
        })
    }

    /// Evaluation at `z = cos(φ − ϕ)` in the two-angle algebra, given the
    /// powers `C^j` from [`cos_difference_powers`].
    pub fn eval_two_angle(&self, powers: &[TrigPoly2]) -> TrigPoly2 {
        let mode = powers[0].mode();
        let mut out = TrigPoly2::zero(mode);
        for (j, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                out = &out + &powers[j].scale(&Scalar::from_bigint(c, mode));
            }
        }
        out
    }
}

fn bigint_f64(c: &BigInt) -> f64 {
    num_traits::ToPrimitive::to_f64(c).unwrap_or(f64::NAN)
}

/// `T_N` via `T_{n+1} = 2z T_n − T_{n−1}`, `T_0 = 1`, `T_1 = z`.
pub fn cheb(n: u32) -> ChebCoeffs {
    let mut prev: Vec<BigInt> = vec![BigInt::one()];
    let mut cur: Vec<BigInt> = vec![BigInt::zero(), BigInt::one()];
    if n == 0 {
        cur = prev.clone();
    }
    for _ in 1..n {
        let mut next = vec![BigInt::zero(); cur.len() + 1];
        for (j, c) in cur.iter().enumerate() {
            next[j + 1] += c * 2;
        }
        for (j, c) in prev.iter().enumerate() {
            next[j] -= c;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    ChebCoeffs { n, nu: 0, coeffs: cur }
}

/// `T_N^{(ν)}`, the zero polynomial when `ν > N`.
pub fn cheb_derivative(n: u32, nu: u32) -> ChebCoeffs {
    let mut coeffs = cheb(n).coeffs;
    for _ in 0..nu {
        coeffs = coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| c * j)
            .collect();
    }
    ChebCoeffs { n, nu, coeffs }
}

/// `T_N^{(ν)}(z)` from `T^{(μ)}_{n+1} = 2z T^{(μ)}_n + 2μ T^{(μ−1)}_n − T^{(μ)}_{n−1}`.
pub fn cheb_derivative_value(n: u32, nu: u32, z: f64) -> f64 {
    let nu = nu as usize;
    // rows[μ] = (T^{(μ)}_{j−1}, T^{(μ)}_j)
    let mut prev = vec![0.0; nu + 1];
    let mut cur = vec![0.0; nu + 1];
    prev[0] = 1.0;
    if n == 0 {
        return prev[nu];
    }
    cur[0] = z;
    if nu >= 1 {
        cur[1] = 1.0;
    }
    for _ in 1..n {
        let mut next = vec![0.0; nu + 1];
        for mu in 0..=nu {
            let lower = if mu > 0 { 2.0 * mu as f64 * cur[mu - 1] } else { 0.0 };
            next[mu] = 2.0 * z * cur[mu] + lower - prev[mu];
        }
        prev = std::mem::replace(&mut cur, next);
    }
    cur[nu]
}

/// `[1, C, C², …, C^n]` with `C = cos(φ − ϕ)`, by repeated multiplication.
pub fn cos_difference_powers(n: u32, mode: Mode) -> Vec<TrigPoly2> {
    let c = TrigPoly2::cos_difference(1, mode);
    let mut out = vec![TrigPoly2::one(mode)];
    for j in 1..=n as usize {
        let next = &out[j - 1] * &c;
        out.push(next);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn coefficient_examples() {
        assert_eq!(cheb(0).coeffs_i64(), vec![1]);
        assert_eq!(cheb(1).coeffs_i64(), vec![0, 1]);
        assert_eq!(cheb(4).coeffs_i64(), vec![1, 0, -8, 0, 8]);
        assert_eq!(cheb_derivative(1, 1).coeffs_i64(), vec![1]);
        assert!(cheb_derivative(0, 1).is_zero());
        assert_eq!(cheb_derivative(4, 2).coeffs_i64(), vec![-16, 0, 96]);
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(cheb(3).eval(&Scalar::one(Mode::Exact)), Scalar::one(Mode::Exact));
        let z = Scalar::ratio(3, 7);
        assert_eq!(cheb_derivative(2, 1).eval(&z), &z * &Scalar::from_i64(4, Mode::Exact));
        assert_eq!(cheb_derivative(2, 1).eval_f64(0.3), 1.2);
    }

    #[test]
    fn derivative_recurrence() {
        // T_N' = 2 T_{N-1} + 2z T_{N-1}' − T_{N-2}'
        for n in 2..20u32 {
            let lhs = cheb_derivative(n, 1).coeffs;
            let a = cheb(n - 1).coeffs;
            let b = cheb_derivative(n - 1, 1).coeffs;
            let c = cheb_derivative(n - 2, 1).coeffs;
            let mut rhs = vec![BigInt::zero(); lhs.len()];
            for (j, v) in a.iter().enumerate() {
                rhs[j] += v * 2;
            }
            for (j, v) in b.iter().enumerate() {
                rhs[j + 1] += v * 2;
            }
            for (j, v) in c.iter().enumerate() {
                rhs[j] -= v;
            }
            assert_eq!(lhs, rhs, "N = {n}");
        }
    }

    #[test]
    fn two_angle_identity() {
        let powers = cos_difference_powers(12, Mode::Exact);
        for n in 0..=12 {
            assert_eq!(cheb(n).eval_two_angle(&powers), TrigPoly2::cos_difference(n, Mode::Exact));
        }
    }

    proptest! {
        #[test]
        fn defining_identity(n in 0u32..=32, th in -7.0f64..7.0) {
            prop_assert!((cheb(n).eval_f64(th.cos()) - (n as f64 * th).cos()).abs() < 1e-12);
        }

        #[test]
        fn recurrence_value_matches_coefficients(n in 0u32..=12, nu in 0u32..=4, z in -1.0f64..1.0) {
            let c = cheb_derivative(n, nu);
            let a = c.eval_f64(z);
            prop_assert!((a - c.horner_f64(z)).abs() <= 1e-9 * (1.0 + a.abs()));
        }
    }
}
