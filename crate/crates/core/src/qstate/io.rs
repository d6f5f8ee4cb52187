//! JSON state files.
//!
//! ```json
//! {"dims": [2, 2], "matrix": [[[0.5, 0.0], ...], ...], "label": "epr"}
//! ```
//!
//! Pure states carry `vector` (a list of `[re, im]` pairs) instead of `matrix`. Optional
//! `labels` and `parties` annotate individual subsystems; `meta` is free-form.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector};

use super::{DensityMatrix, DimSpec, Party, PureState};

/// Formats a float with 17 significant digits.
pub fn raw_f64(x: f64) -> Box<RawValue> {
    let x = if x == 0.0 { 0.0 } else { x };
    RawValue::from_string(format!("{x:.16e}")).expect("formatted float is valid JSON")
}

pub type RawEntry = [Box<RawValue>; 2];

pub fn encode_matrix(m: &CMatrix) -> Vec<Vec<RawEntry>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [raw_f64(m[(i, j)].re), raw_f64(m[(i, j)].im)]).collect())
        .collect()
}

pub fn encode_vector(v: &CVector) -> Vec<RawEntry> {
    v.iter().map(|z| [raw_f64(z.re), raw_f64(z.im)]).collect()
}

pub fn decode_matrix(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Parse("matrix rows have unequal length".into()));
    }
    Ok(CMatrix::from_fn(n, m, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

#[derive(Serialize)]
struct StateFileOut<'a> {
    dims: &'a [usize],
    #[serde(skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<RawEntry>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    vector: Option<Vec<RawEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<&'a [String]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    parties: Option<Vec<Party>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    meta: Option<&'a serde_json::Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFileIn {
    dims: Vec<usize>,
    matrix: Option<Vec<Vec<[f64; 2]>>>,
    vector: Option<Vec<[f64; 2]>>,
    label: Option<String>,
    labels: Option<Vec<String>>,
    parties: Option<Vec<Party>>,
    meta: Option<serde_json::Value>,
}

/// State as read from disk.
#[derive(Debug, Clone)]
pub enum LoadedState {
    Mixed(DensityMatrix),
    Pure(PureState),
}

impl LoadedState {
    pub fn spec(&self) -> &DimSpec {
        match self {
            LoadedState::Mixed(r) => r.spec(),
            LoadedState::Pure(p) => p.spec(),
        }
    }

    /// Density matrix form (forms the projector for pure states).
    pub fn density(&self) -> Result<DensityMatrix> {
        match self {
            LoadedState::Mixed(r) => Ok(r.clone()),
            LoadedState::Pure(p) => p.to_density(),
        }
    }

    pub fn as_pure(&self) -> Option<&PureState> {
        match self {
            LoadedState::Pure(p) => Some(p),
            LoadedState::Mixed(_) => None,
        }
    }
}

/// A parsed state file.
#[derive(Debug, Clone)]
pub struct StateDocument {
    pub state: LoadedState,
    pub label: Option<String>,
    pub meta: Option<serde_json::Value>,
}

fn spec_from(dims: Vec<usize>, labels: Option<Vec<String>>, parties: Option<Vec<Party>>) -> Result<DimSpec> {
    let mut spec = DimSpec::new(dims)?;
    if let Some(l) = labels {
        spec = spec.with_labels(l)?;
    }
    if let Some(p) = parties {
        spec = spec.with_parties(p)?;
    }
    Ok(spec)
}

pub fn parse_state(text: &str) -> Result<StateDocument> {
    let raw: StateFileIn = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let spec = spec_from(raw.dims, raw.labels, raw.parties)?;
    let state = match (raw.matrix, raw.vector) {
        (Some(rows), None) => LoadedState::Mixed(DensityMatrix::new(spec, decode_matrix(&rows)?)?),
        (None, Some(v)) => {
            let amps = CVector::from_iterator(v.len(), v.iter().map(|z| c(z[0], z[1])));
            LoadedState::Pure(PureState::new(spec, amps)?)
        }
        _ => return Err(Error::Parse("state file needs exactly one of `matrix` or `vector`".into())),
    };
    Ok(StateDocument { state, label: raw.label, meta: raw.meta })
}

pub fn render_state(state: &LoadedState, label: Option<&str>, meta: Option<&serde_json::Value>) -> String {
    let spec = state.spec();
    let (matrix, vector) = match state {
        LoadedState::Mixed(r) => (Some(encode_matrix(r.matrix())), None),
        LoadedState::Pure(p) => (None, Some(encode_vector(p.amplitudes()))),
    };
    let out = StateFileOut {
        dims: spec.dims(),
        matrix,
        vector,
        label,
        labels: spec.labels(),
        parties: if spec.has_explicit_parties() { spec.parties() } else { None },
        meta,
    };
    serde_json::to_string_pretty(&out).expect("state serialises")
}

pub fn read_state(path: impl AsRef<Path>) -> Result<StateDocument> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    parse_state(&text)
}

pub fn write_state(
    path: impl AsRef<Path>,
    state: &LoadedState,
    label: Option<&str>,
    meta: Option<&serde_json::Value>,
) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_state(state, label, meta))
        .map_err(|source| Error::Io { path: path.display().to_string(), source })
}
