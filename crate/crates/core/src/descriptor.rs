//! JSON state descriptors and plan serialization.
//!
//! A state file holds exactly one of
//! `{"schmidt_sq": ["108/144", 0.25, ...]}` or `{"amplitudes": [[[re, im], ...], ...]}`,
//! plus an optional `"label"`. Rationals are written as strings.

use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::conversion::{build_plan, ConversionPlan, PlanOptions};
use crate::error::{Error, Result};
use crate::scalar::{scalar_from_json, Scalar, Tolerance};
use crate::schmidt::{schmidt_decompose, BipartiteState, CMatrix, SchmidtVector};

#[derive(Debug, Clone, PartialEq)]
pub enum StatePayload {
    SchmidtSq(Vec<Value>),
    Amplitudes(CMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateDescriptor {
    pub label: Option<String>,
    pub payload: StatePayload,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    #[serde(default)]
    schmidt_sq: Option<Vec<Value>>,
    #[serde(default)]
    amplitudes: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default)]
    label: Option<String>,
}

impl StateDescriptor {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: RawState = serde_json::from_str(text).map_err(|e| Error::Descriptor(e.to_string()))?;
        let payload = match (raw.schmidt_sq, raw.amplitudes) {
            (Some(v), None) => StatePayload::SchmidtSq(v),
            (None, Some(rows)) => {
                let nrows = rows.len();
                let ncols = rows.first().map_or(0, Vec::len);
                if nrows == 0 || ncols == 0 {
                    return Err(Error::Empty);
                }
                if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
                    return Err(Error::Dimension { expected: ncols, got: bad.len() });
                }
                StatePayload::Amplitudes(CMatrix::from_fn(nrows, ncols, |i, j| {
                    Complex64::new(rows[i][j][0], rows[i][j][1])
                }))
            }
            (Some(_), Some(_)) => {
                return Err(Error::Descriptor("both \"schmidt_sq\" and \"amplitudes\" present".into()))
            }
            (None, None) => {
                return Err(Error::Descriptor("one of \"schmidt_sq\" or \"amplitudes\" is required".into()))
            }
        };
        Ok(StateDescriptor { label: raw.label, payload })
    }

    /// Schmidt vector in mode `S`. Amplitude payloads are decomposed in floating point and,
    /// in exact mode, converted and renormalized exactly.
    pub fn schmidt_vector<S: Scalar>(&self, tol: Tolerance, trim: bool) -> Result<SchmidtVector<S>> {
        let sv = match &self.payload {
            StatePayload::SchmidtSq(values) => {
                let probs = values.iter().map(scalar_from_json::<S>).collect::<Result<Vec<S>>>()?;
                SchmidtVector::new(probs, tol)?
            }
            StatePayload::Amplitudes(_) => {
                let float = schmidt_decompose(&self.bipartite_state(tol)?, tol, false)?;
                SchmidtVector::from_float(&float, tol)?
            }
        };
        Ok(if trim { sv.trimmed(tol) } else { sv })
    }

    pub fn bipartite_state(&self, tol: Tolerance) -> Result<BipartiteState> {
        match &self.payload {
            StatePayload::Amplitudes(m) => BipartiteState::new(m.clone(), tol),
            StatePayload::SchmidtSq(_) => {
                Ok(crate::schmidt::state_from_schmidt(&self.schmidt_vector::<f64>(tol, false)?))
            }
        }
    }

    pub fn from_schmidt<S: Scalar>(sv: &SchmidtVector<S>, label: Option<String>) -> Value {
        let mut v = json!({ "schmidt_sq": vector_json(sv.probs()) });
        if let Some(l) = label {
            v["label"] = json!(l);
        }
        v
    }
}

pub fn vector_json<S: Scalar>(v: &[S]) -> Value {
    Value::Array(v.iter().map(Scalar::to_json).collect())
}

fn mode_name<S: Scalar>() -> &'static str {
    if S::EXACT {
        "rational"
    } else {
        "float"
    }
}

/// Plan as JSON: breakpoints, `γ`, squared diagonals of `M` and `N`, probability.
pub fn plan_to_json<S: Scalar>(plan: &ConversionPlan<S>) -> Value {
    let mut v = json!({
        "mode": mode_name::<S>(),
        "source": vector_json(plan.source.probs()),
        "target": vector_json(plan.target.probs()),
        "probability": plan.probability.to_json(),
        "probability_decimal": crate::scalar::round_sig12(plan.probability.to_f64()),
        "minimizer": plan.minimizer,
        "breakpoints": Value::Null,
        "intermediate": Value::Null,
        "success_sq": Value::Null,
        "failure_sq": Value::Null,
    });
    if let Some(c) = &plan.construction {
        v["breakpoints"] = json!({
            "boundaries": c.breakpoints.boundaries(),
            "ratios": vector_json(c.breakpoints.ratios()),
        });
        v["intermediate"] = vector_json(c.intermediate.probs());
        v["success_sq"] = vector_json(c.success.squared());
        v["failure_sq"] = vector_json(c.failure.squared());
    }
    v
}

fn field_vector<S: Scalar>(v: &Value, key: &str) -> Result<Option<Vec<S>>> {
    match v.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Array(items)) => items.iter().map(scalar_from_json::<S>).collect::<Result<Vec<S>>>().map(Some),
        Some(other) => Err(Error::Descriptor(format!("\"{key}\" must be an array, got {other}"))),
    }
}

fn same<S: Scalar>(a: &[S], b: &[S], tol: Tolerance) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.eq_within(y, tol))
}

/// Reads a serialized plan. The plan is rebuilt from its source and target and every
/// serialized field is checked against the rebuilt one.
pub fn plan_from_json<S: Scalar>(v: &Value, opts: &PlanOptions) -> Result<ConversionPlan<S>> {
    let tol = opts.tol;
    let source = field_vector::<S>(v, "source")?.ok_or_else(|| Error::Descriptor("plan lacks \"source\"".into()))?;
    let target = field_vector::<S>(v, "target")?.ok_or_else(|| Error::Descriptor("plan lacks \"target\"".into()))?;
    let plan = build_plan(&SchmidtVector::new(source, tol)?, &SchmidtVector::new(target, tol)?, opts)?;
    let mismatch = |what: &str| Err(Error::Descriptor(format!("plan field \"{what}\" does not match its source and target")));

    let p: S = scalar_from_json(v.get("probability").unwrap_or(&Value::Null))?;
    // float plans are written with 12 significant digits
    let read_tol = if S::EXACT { tol } else { Tolerance(tol.0.max(1e-11)) };
    if !p.eq_within(&plan.probability, read_tol) {
        return mismatch("probability");
    }
    let c = plan.construction.as_ref();
    let checks: [(&str, Option<&[S]>); 3] = [
        ("intermediate", c.map(|c| c.intermediate.probs())),
        ("success_sq", c.map(|c| c.success.squared())),
        ("failure_sq", c.map(|c| c.failure.squared())),
    ];
    for (key, rebuilt) in checks {
        match (field_vector::<S>(v, key)?, rebuilt) {
            (None, None) => {}
            (Some(a), Some(b)) if same(&a, b, read_tol) => {}
            _ => return mismatch(key),
        }
    }
    if let (Some(bp), Some(c)) = (v.get("breakpoints").filter(|b| !b.is_null()), c) {
        let boundaries: Vec<usize> = serde_json::from_value(bp["boundaries"].clone())
            .map_err(|e| Error::Descriptor(e.to_string()))?;
        let ratios = field_vector::<S>(bp, "ratios")?.unwrap_or_default();
        if boundaries != c.breakpoints.boundaries() || !same(&ratios, c.breakpoints.ratios(), read_tol) {
            return mismatch("breakpoints");
        }
    }
    Ok(plan)
}
