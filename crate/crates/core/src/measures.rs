//! Closed-form SL-invariant measures: two-qubit concurrence, the two-qudit
//! determinant, and the three-qubit tangle.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::state::PureState;

/// A named invariant value together with the complex quantity it is the
/// modulus of, and an optional dimension-normalized companion score.
#[derive(Clone, Debug)]
pub struct MeasureValue {
    pub name: &'static str,
    pub value: f64,
    pub raw: C64,
    pub normalized: Option<f64>,
}

impl MeasureValue {
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Doc<'a> {
            measure: &'a str,
            value: f64,
            raw: [f64; 2],
            normalized: Option<f64>,
        }
        serde_json::to_value(Doc {
            measure: self.name,
            value: self.value,
            raw: [self.raw.re, self.raw.im],
            normalized: self.normalized,
        })
        .expect("measure serializes")
    }
}

fn require_shape(state: &PureState, q: usize, d: Option<usize>) -> Result<()> {
    let sys = state.system();
    if sys.q() != q || d.is_some_and(|d| sys.d() != d) {
        return Err(Error::NoApplicableMeasure {
            q: sys.q(),
            d: sys.d(),
        });
    }
    Ok(())
}

/// Two-qubit concurrence: twice the determinant of the amplitude matrix.
pub fn concurrence2(state: &PureState) -> Result<MeasureValue> {
    require_shape(state, 2, Some(2))?;
    let psi = |a: u8, b: u8| state.amplitude(&[a, b]);
    let raw = 2.0 * (psi(0, 0) * psi(1, 1) - psi(0, 1) * psi(1, 0));
    Ok(MeasureValue {
        name: "concurrence",
        value: raw.norm(),
        raw,
        normalized: None,
    })
}

/// Determinant of the `d x d` amplitude matrix of a two-qudit state. The
/// normalized companion `d |det|^(2/d)` scores 1 on the maximally entangled
/// reference state; the raw modulus is reported alongside because no single
/// normalization convention is canonical.
pub fn two_qudit_det(state: &PureState) -> Result<MeasureValue> {
    require_shape(state, 2, None)?;
    let d = state.system().d();
    let mut m = CMatrix::zeros(d, d);
    for term in state.terms() {
        m[(term.ket[0] as usize, term.ket[1] as usize)] = term.amplitude;
    }
    let raw = m.det()?;
    let value = raw.norm();
    let normalized = d as f64 * value.powf(2.0 / d as f64);
    Ok(MeasureValue {
        name: "two_qudit_det",
        value,
        raw,
        normalized: Some(normalized),
    })
}

/// Degree-four invariant of three qubits built from the quartic monomials
/// of the amplitude hypercube: `tau3 = 4 |d1 - 2 d2 + 4 d3|`.
pub fn three_tangle(state: &PureState) -> Result<MeasureValue> {
    require_shape(state, 3, Some(2))?;
    let p = |a: u8, b: u8, c: u8| state.amplitude(&[a, b, c]);

    let d1 = p(0, 0, 0) * p(0, 0, 0) * p(1, 1, 1) * p(1, 1, 1)
        + p(0, 0, 1) * p(0, 0, 1) * p(1, 1, 0) * p(1, 1, 0)
        + p(0, 1, 0) * p(0, 1, 0) * p(1, 0, 1) * p(1, 0, 1)
        + p(1, 0, 0) * p(1, 0, 0) * p(0, 1, 1) * p(0, 1, 1);
    let d2 = p(0, 0, 0) * p(1, 1, 1) * p(0, 1, 1) * p(1, 0, 0)
        + p(0, 0, 0) * p(1, 1, 1) * p(1, 0, 1) * p(0, 1, 0)
        + p(0, 0, 0) * p(1, 1, 1) * p(1, 1, 0) * p(0, 0, 1)
        + p(0, 1, 1) * p(1, 0, 0) * p(1, 0, 1) * p(0, 1, 0)
        + p(0, 1, 1) * p(1, 0, 0) * p(1, 1, 0) * p(0, 0, 1)
        + p(1, 0, 1) * p(0, 1, 0) * p(1, 1, 0) * p(0, 0, 1);
    let d3 = p(0, 0, 0) * p(1, 1, 0) * p(1, 0, 1) * p(0, 1, 1)
        + p(1, 1, 1) * p(0, 0, 1) * p(0, 1, 0) * p(1, 0, 0);

    let raw = d1 - 2.0 * d2 + 4.0 * d3;
    Ok(MeasureValue {
        name: "three_tangle",
        value: 4.0 * raw.norm(),
        raw,
        normalized: None,
    })
}

/// Every measure whose shape requirements the state meets.
pub fn applicable_measures(state: &PureState) -> Result<Vec<MeasureValue>> {
    let mut out = Vec::new();
    if let Ok(m) = concurrence2(state) {
        out.push(m);
    }
    if let Ok(m) = two_qudit_det(state) {
        out.push(m);
    }
    if let Ok(m) = three_tangle(state) {
        out.push(m);
    }
    if out.is_empty() {
        return Err(Error::NoApplicableMeasure {
            q: state.system().q(),
            d: state.system().d(),
        });
    }
    Ok(out)
}
