//! Wronskian determinants of trigonometric polynomials.

use crate::error::{Error, Result};
use crate::kdata::KData;
use crate::scalar::Mode;
use crate::trig::TrigPoly;

/// Derivative matrix `M[r][c] = d^r f_c / dφ^r`.
fn derivative_matrix(funcs: &[TrigPoly]) -> Vec<Vec<TrigPoly>> {
    let n = funcs.len();
    if n == 0 {
        return Vec::new();
    }
    let mut rows = vec![funcs.to_vec()];
    for r in 1..n {
        let next = rows[r - 1].iter().map(TrigPoly::diff).collect();
        rows.push(next);
    }
    rows
}

/// Laplace expansion along the first row. Exponential cost: reference only.
pub(crate) fn det_cofactor(m: &[Vec<TrigPoly>], mode: Mode) -> TrigPoly {
    let n = m.len();
    if n == 0 {
        return TrigPoly::one(mode);
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = TrigPoly::zero(mode);
    for c in 0..n {
        if m[0][c].is_zero() {
            continue;
        }
        let minor: Vec<Vec<TrigPoly>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != c)
                    .map(|(_, v)| v.clone())
                    .collect()
            })
            .collect();
        let term = &m[0][c] * &det_cofactor(&minor, mode);
        acc = if c % 2 == 0 { &acc + &term } else { &acc - &term };
    }
    acc
}

/// Fraction-free Bareiss elimination over the trigonometric polynomial ring.
fn det_bareiss(mut m: Vec<Vec<TrigPoly>>, mode: Mode) -> Result<TrigPoly> {
    let n = m.len();
    let mut sign = 1i64;
    let mut prev = TrigPoly::one(mode);
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return Ok(TrigPoly::zero(mode)),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&m[k][k] * &m[i][j]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = num.div_exact(&prev).ok_or_else(|| {
                    Error::Float("inexact division in fraction-free elimination".into())
                })?;
            }
        }
        prev = m[k][k].clone();
    }
    Ok(m[n - 1][n - 1].scale_i64(sign))
}

/// `Wr[f_0, …, f_{n−1}]`; the empty Wronskian is 1.
pub fn wronskian(funcs: &[TrigPoly], mode: Mode) -> Result<TrigPoly> {
    for f in funcs {
        if f.mode() != mode {
            return Err(Error::ModeMismatch {
                left: mode,
                right: f.mode(),
            });
        }
    }
    let m = derivative_matrix(funcs);
    if funcs.len() <= 4 {
        Ok(det_cofactor(&m, mode))
    } else {
        det_bareiss(m, mode)
    }
}

/// Wronskian of the full `χ` list.
pub fn full_wronskian(data: &KData) -> TrigPoly {
    wronskian(&data.chis(), data.mode()).expect("χ list has a single mode")
}

/// Wronskian of the `χ` list with the indices in `omit` removed, keeping order.
pub fn reduced_wronskian(data: &KData, omit: &[usize]) -> Result<TrigPoly> {
    if let Some(&bad) = omit.iter().find(|&&i| i >= data.len()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            len: data.len(),
        });
    }
    let funcs: Vec<TrigPoly> = data
        .chis()
        .into_iter()
        .enumerate()
        .filter(|(i, _)| !omit.contains(i))
        .map(|(_, f)| f)
        .collect();
    wronskian(&funcs, data.mode())
}
