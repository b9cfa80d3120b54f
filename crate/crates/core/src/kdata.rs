//! Input data: the integer sequence `k` and one unit-circle phase per entry.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalar::{Mode, Scalar};
use crate::trig::TrigPoly;

/// A point `(cos φ_i, sin φ_i)` on the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub struct Phase {
    pub cos: Scalar,
    pub sin: Scalar,
}

impl Phase {
    pub fn trivial(mode: Mode) -> Phase {
        Phase {
            cos: Scalar::one(mode),
            sin: Scalar::zero(mode),
        }
    }

    pub fn new(cos: Scalar, sin: Scalar) -> Phase {
        Phase { cos, sin }
    }

    pub fn from_angle(angle: f64, mode: Mode) -> Result<Phase> {
        let (c, s) = Scalar::cos_sin(angle, mode)?;
        Ok(Phase { cos: c, sin: s })
    }

    pub fn is_trivial(&self) -> bool {
        self.cos.is_one() && self.sin.is_zero()
    }
}

/// Strictly increasing `k = (0, k_1, …, k_m)` with phases, `φ_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct KData {
    k: Vec<u32>,
    phases: Vec<Phase>,
    mode: Mode,
}

impl KData {
    pub fn new(k: Vec<i64>, phases: Vec<Phase>, mode: Mode) -> Result<KData> {
        let bad = |msg: String| Err(Error::InvalidKData(msg));
        if k.is_empty() {
            return bad("k must be non-empty".into());
        }
        if k[0] != 0 {
            return bad(format!("k_0 must be 0, got {}", k[0]));
        }
        for w in k.windows(2) {
            if w[1] <= w[0] {
                return bad(format!("k must be strictly increasing, got {} after {}", w[1], w[0]));
            }
        }
        if k.iter().any(|&v| v > u32::MAX as i64) {
            return bad("k entries too large".into());
        }
        if phases.len() != k.len() {
            return bad(format!(
                "phases must have one entry per k value ({} phases for {} values)",
                phases.len(),
                k.len()
            ));
        }
        if !phases[0].is_trivial() {
            return bad("phase 0 must be (1, 0)".into());
        }
        for (i, ph) in phases.iter().enumerate() {
            if ph.cos.mode() != mode || ph.sin.mode() != mode {
                return Err(Error::ModeMismatch {
                    left: mode,
                    right: if ph.cos.mode() != mode {
                        ph.cos.mode()
                    } else {
                        ph.sin.mode()
                    },
                });
            }
            let norm = &(&ph.cos * &ph.cos) + &(&ph.sin * &ph.sin);
            let ok = match mode {
                Mode::Exact => norm.is_one(),
                Mode::Float { .. } => (norm.to_f64() - 1.0).abs() <= mode.zero_tolerance().max(1e-15),
            };
            if !ok {
                return bad(format!("phase {i} must lie on the unit circle (c² + s² = 1)"));
            }
        }
        Ok(KData {
            k: k.into_iter().map(|v| v as u32).collect(),
            phases,
            mode,
        })
    }

    /// All phases zero.
    pub fn trivial(k: &[i64], mode: Mode) -> Result<KData> {
        KData::new(k.to_vec(), vec![Phase::trivial(mode); k.len()], mode)
    }

    pub fn k(&self) -> &[u32] {
        &self.k
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// `m`, the index of the last entry.
    pub fn m(&self) -> usize {
        self.k.len() - 1
    }

    pub fn k_max(&self) -> u32 {
        *self.k.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Replaces the phase of entry `i`.
    pub fn with_phase(&self, i: usize, phase: Phase) -> Result<KData> {
        if i >= self.len() {
            return Err(Error::IndexOutOfRange { index: i, len: self.len() });
        }
        let mut phases = self.phases.clone();
        phases[i] = phase;
        KData::new(self.k_i64(), phases, self.mode)
    }

    /// Appends `k_next > k_m` with the given phase.
    pub fn extend(&self, k_next: i64, phase: Phase) -> Result<KData> {
        let mut k = self.k_i64();
        k.push(k_next);
        let mut phases = self.phases.clone();
        phases.push(phase);
        KData::new(k, phases, self.mode)
    }

    /// Drops the last entry; `None` for `k = (0)`.
    pub fn truncate(&self) -> Option<KData> {
        if self.m() == 0 {
            return None;
        }
        Some(KData {
            k: self.k[..self.m()].to_vec(),
            phases: self.phases[..self.m()].to_vec(),
            mode: self.mode,
        })
    }

    fn k_i64(&self) -> Vec<i64> {
        self.k.iter().map(|&v| v as i64).collect()
    }

    /// `χ_i = cos(k_i φ + φ_i) = c_i cos k_iφ − s_i sin k_iφ`.
    pub fn chi(&self, i: usize) -> Result<TrigPoly> {
        let (k, ph) = match (self.k.get(i), self.phases.get(i)) {
            (Some(k), Some(ph)) => (*k, ph),
            _ => return Err(Error::IndexOutOfRange { index: i, len: self.len() }),
        };
        let cos = TrigPoly::cos(k, self.mode).scale(&ph.cos);
        if k == 0 {
            return Ok(cos);
        }
        Ok(&cos - &TrigPoly::sin(k, self.mode).scale(&ph.sin))
    }

    pub fn chis(&self) -> Vec<TrigPoly> {
        (0..self.len()).map(|i| self.chi(i).unwrap()).collect()
    }

    /// Parses `{"k": [..], "phases": [..], "mode": ".."}`. Phases are
    /// `{"cos": "3/5", "sin": "4/5"}` or, in float mode, `{"angle_radians": x}`;
    /// omitted phases default to zero.
    pub fn from_json(v: &Value) -> Result<KData> {
        let bad = |msg: &str| Error::Parse(msg.to_string());
        let mode = match v.get("mode") {
            None => Mode::Exact,
            Some(Value::String(s)) => Mode::parse(s)?,
            Some(_) => return Err(bad("mode must be a string")),
        };
        let k: Vec<i64> = v
            .get("k")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing array field 'k'"))?
            .iter()
            .map(|x| x.as_i64().ok_or_else(|| bad("k entries must be integers")))
            .collect::<Result<_>>()?;
        let phases = match v.get("phases") {
            None | Some(Value::Null) => vec![Phase::trivial(mode); k.len()],
            Some(Value::Array(items)) => items
                .iter()
                .map(|p| phase_from_json(p, mode))
                .collect::<Result<_>>()?,
            Some(_) => return Err(bad("phases must be an array")),
        };
        KData::new(k, phases, mode)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "k": self.k,
            "phases": self.phases.iter().map(|p| json!({
                "cos": p.cos.to_string(),
                "sin": p.sin.to_string(),
            })).collect::<Vec<_>>(),
            "mode": self.mode.to_string(),
        })
    }
}

fn scalar_field(v: &Value, mode: Mode) -> Result<Scalar> {
    match v {
        Value::String(s) => Scalar::parse(s, mode),
        Value::Number(n) if n.is_i64() => Ok(Scalar::from_i64(n.as_i64().unwrap(), mode)),
        Value::Number(n) => Scalar::parse(&n.to_string(), mode),
        _ => Err(Error::Parse(format!("expected a number or numeric string, got {v}"))),
    }
}

fn phase_from_json(p: &Value, mode: Mode) -> Result<Phase> {
    if let Some(a) = p.get("angle_radians") {
        let angle = a
            .as_f64()
            .ok_or_else(|| Error::Parse("angle_radians must be a number".into()))?;
        if angle == 0.0 {
            return Ok(Phase::trivial(mode));
        }
        return Phase::from_angle(angle, mode);
    }
    match (p.get("cos"), p.get("sin")) {
        (Some(c), Some(s)) => Ok(Phase::new(scalar_field(c, mode)?, scalar_field(s, mode)?)),
        _ => Err(Error::Parse(
            "phase needs 'cos' and 'sin' or 'angle_radians'".into(),
        )),
    }
}
