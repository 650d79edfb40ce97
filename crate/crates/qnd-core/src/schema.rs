//! Versioned JSON file formats (`qnd/1`) for instruments and observables.
//!
//! Complex numbers are written as `[re, im]` pairs and matrices as
//! row-major lists of rows, so files are locale- and precision-unambiguous.
//!
//! Instrument files:
//! ```json
//! {
//!   "schema": "qnd/1",
//!   "dim_in": 2,
//!   "dim_out": 2,
//!   "outcomes": [
//!     { "label": "0", "kraus": [ [ [[1,0],[0,0]], [[0,0],[0,0]] ] ] }
//!   ]
//! }
//! ```
//!
//! Observable files carry `eigenvalues` plus either `projectors` (list of
//! matrices) or, for the nondegenerate case, `vectors` (list of kets).

use serde::{Deserialize, Serialize};

use crate::channel::{CpMap, QuantumInstrument};
use crate::error::{QndError, Result};
use crate::matrix::{c, CMatrix, CVector};
use crate::observable::Observable;
use crate::state::Ket;

pub const SCHEMA_VERSION: &str = "qnd/1";

type ComplexPair = [f64; 2];
type MatrixData = Vec<Vec<ComplexPair>>;

fn default_schema() -> String {
    SCHEMA_VERSION.to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutcomeEntry {
    pub label: String,
    pub kraus: Vec<MatrixData>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstrumentFile {
    #[serde(default = "default_schema")]
    pub schema: String,
    pub dim_in: usize,
    pub dim_out: usize,
    pub outcomes: Vec<OutcomeEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservableFile {
    #[serde(default = "default_schema")]
    pub schema: String,
    pub eigenvalues: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projectors: Option<Vec<MatrixData>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vectors: Option<Vec<Vec<ComplexPair>>>,
}

fn check_schema(schema: &str) -> Result<()> {
    if schema != SCHEMA_VERSION {
        return Err(QndError::Parse(format!(
            "unsupported schema '{schema}', expected '{SCHEMA_VERSION}'"
        )));
    }
    Ok(())
}

fn matrix_to_data(m: &CMatrix) -> MatrixData {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

fn matrix_from_data(data: &MatrixData, what: &str) -> Result<CMatrix> {
    let rows = data.len();
    if rows == 0 {
        return Err(QndError::Parse(format!("{what}: empty matrix")));
    }
    let cols = data[0].len();
    if cols == 0 || data.iter().any(|r| r.len() != cols) {
        return Err(QndError::Parse(format!("{what}: ragged or empty rows")));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| {
        c(data[i][j][0], data[i][j][1])
    }))
}

/// Serialises an instrument to pretty-printed `qnd/1` JSON.
pub fn render_instrument(inst: &QuantumInstrument) -> String {
    let file = InstrumentFile {
        schema: default_schema(),
        dim_in: inst.dim_in(),
        dim_out: inst.dim_out(),
        outcomes: inst
            .outcomes()
            .iter()
            .map(|(label, branch)| OutcomeEntry {
                label: label.clone(),
                kraus: branch.kraus().iter().map(matrix_to_data).collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("instrument file serialises")
}

/// Parses and validates a `qnd/1` instrument document.
pub fn parse_instrument(json: &str) -> Result<QuantumInstrument> {
    let file: InstrumentFile =
        serde_json::from_str(json).map_err(|e| QndError::Parse(e.to_string()))?;
    check_schema(&file.schema)?;
    let mut outcomes = Vec::with_capacity(file.outcomes.len());
    for entry in &file.outcomes {
        let mut kraus = Vec::with_capacity(entry.kraus.len());
        for (k, data) in entry.kraus.iter().enumerate() {
            let m = matrix_from_data(data, &format!("outcome '{}', kraus {k}", entry.label))?;
            if m.shape() != (file.dim_out, file.dim_in) {
                return Err(QndError::Parse(format!(
                    "outcome '{}', kraus {k}: expected {}x{}, got {}x{}",
                    entry.label,
                    file.dim_out,
                    file.dim_in,
                    m.nrows(),
                    m.ncols()
                )));
            }
            kraus.push(m);
        }
        outcomes.push((entry.label.clone(), CpMap::new(kraus)?));
    }
    QuantumInstrument::new(outcomes)
}

/// Serialises an observable to pretty-printed `qnd/1` JSON, using the
/// compact `vectors` form when every branch is rank one.
pub fn render_observable(obs: &Observable) -> String {
    let file = if obs.is_nondegenerate() {
        ObservableFile {
            schema: default_schema(),
            eigenvalues: obs.eigenvalues().to_vec(),
            projectors: None,
            vectors: Some(
                (0..obs.n_branches())
                    .map(|i| {
                        let ket = obs.eigenstate(i).expect("rank-one branch");
                        ket.amplitudes().iter().map(|z| [z.re, z.im]).collect()
                    })
                    .collect(),
            ),
        }
    } else {
        ObservableFile {
            schema: default_schema(),
            eigenvalues: obs.eigenvalues().to_vec(),
            projectors: Some(obs.projectors().iter().map(matrix_to_data).collect()),
            vectors: None,
        }
    };
    serde_json::to_string_pretty(&file).expect("observable file serialises")
}

/// Parses and validates a `qnd/1` observable document.
pub fn parse_observable(json: &str) -> Result<Observable> {
    let file: ObservableFile =
        serde_json::from_str(json).map_err(|e| QndError::Parse(e.to_string()))?;
    check_schema(&file.schema)?;
    match (&file.projectors, &file.vectors) {
        (Some(projs), None) => {
            let projectors = projs
                .iter()
                .enumerate()
                .map(|(i, d)| matrix_from_data(d, &format!("projector {i}")))
                .collect::<Result<Vec<_>>>()?;
            Observable::new(file.eigenvalues, projectors)
        }
        (None, Some(vecs)) => {
            let kets = vecs
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    if v.is_empty() {
                        return Err(QndError::Parse(format!("vector {i} is empty")));
                    }
                    Ket::new(CVector::from_iterator(
                        v.len(),
                        v.iter().map(|p| c(p[0], p[1])),
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            Observable::from_basis(file.eigenvalues, &kets)
        }
        (Some(_), Some(_)) => Err(QndError::Parse(
            "observable file must not carry both 'projectors' and 'vectors'".into(),
        )),
        (None, None) => Err(QndError::Parse(
            "observable file needs 'projectors' or 'vectors'".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::max_abs_diff;
    use crate::zoo;

    #[test]
    fn instrument_roundtrip_full_precision() {
        let inst = zoo::random_instrument(3, 2, 2, 404);
        let json = render_instrument(&inst);
        let back = parse_instrument(&json).unwrap();
        assert_eq!(back.labels(), inst.labels());
        for m in 0..inst.n_outcomes() {
            for (a, b) in inst.branch(m).kraus().iter().zip(back.branch(m).kraus()) {
                assert_eq!(a, b); // bit-exact round trip
            }
        }
    }

    #[test]
    fn identity_instrument_file_parses_to_trivial() {
        let json = r#"{
            "schema": "qnd/1",
            "dim_in": 2,
            "dim_out": 2,
            "outcomes": [
                { "label": "0", "kraus": [ [ [[1,0],[0,0]], [[0,0],[1,0]] ] ] }
            ]
        }"#;
        let inst = parse_instrument(json).unwrap();
        let triv = zoo::trivial_instrument(2);
        assert!(max_abs_diff(&inst.channel().choi(), &triv.channel().choi()) < 1e-15);
    }

    #[test]
    fn incomplete_instrument_rejected_with_residual() {
        // sum K^dag K = 0.81 I: residual 0.19.
        let json = r#"{
            "dim_in": 2,
            "dim_out": 2,
            "outcomes": [
                { "label": "0", "kraus": [ [ [[0.9,0],[0,0]], [[0,0],[0.9,0]] ] ] }
            ]
        }"#;
        let err = parse_instrument(json).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("completeness"), "{msg}");
        assert!(msg.contains("1.900e-1"), "{msg}");
    }

    #[test]
    fn malformed_json_and_wrong_schema_rejected() {
        assert!(parse_instrument("{ not json").is_err());
        let wrong = r#"{ "schema": "qnd/2", "dim_in": 2, "dim_out": 2, "outcomes": [] }"#;
        assert!(parse_instrument(wrong).is_err());
    }

    #[test]
    fn observable_roundtrip_both_forms() {
        let (x, _) = zoo::random_basis_pair(3, 8);
        let json = render_observable(&x);
        assert!(json.contains("vectors"));
        let back = parse_observable(&json).unwrap();
        // Vectors are re-derived from projector columns on write, so the
        // round trip is exact only up to one normalisation.
        for i in 0..3 {
            assert!(max_abs_diff(back.projector(i), x.projector(i)) < 1e-12);
        }

        let p01 = crate::state::Ket::basis(3, 0).outer() + crate::state::Ket::basis(3, 1).outer();
        let p2 = crate::state::Ket::basis(3, 2).outer();
        let deg = Observable::new(vec![0.0, 7.5], vec![p01, p2]).unwrap();
        let json = render_observable(&deg);
        assert!(json.contains("projectors"));
        let back = parse_observable(&json).unwrap();
        assert_eq!(back.branch_rank(0), 2);
        assert_eq!(back.eigenvalue(1), 7.5);
    }

    #[test]
    fn observable_rejects_bad_documents() {
        assert!(parse_observable(r#"{ "eigenvalues": [1.0] }"#).is_err());
        // Non-orthonormal vectors.
        let bad = r#"{
            "eigenvalues": [1.0, -1.0],
            "vectors": [ [[1,0],[0,0]], [[1,0],[0,0]] ]
        }"#;
        assert!(parse_observable(bad).is_err());
    }
}
