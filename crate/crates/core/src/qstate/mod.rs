//! Density matrices and pure states over an explicit list of subsystems.

mod factories;
pub mod io;
mod random;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64};
use crate::{tol, MAX_AMBIENT_DIM};

pub use factories::*;
pub use random::*;

/// Party that owns a subsystem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
    C,
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Party::A => "A",
            Party::B => "B",
            Party::C => "C",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Party {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(Party::A),
            "B" | "b" => Ok(Party::B),
            "C" | "c" => Ok(Party::C),
            other => Err(Error::arg(format!("unknown party '{other}' (expected A, B or C)"))),
        }
    }
}

/// Subsystem dimensions plus optional names and party assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimSpec {
    dims: Vec<usize>,
    labels: Option<Vec<String>>,
    parties: Option<Vec<Party>>,
}

impl DimSpec {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::arg("dimension list is empty"));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::arg(format!("subsystem dimensions must be positive: {dims:?}")));
        }
        Ok(DimSpec { dims, labels: None, parties: None })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.dims.len() {
            return Err(Error::arg("label count does not match subsystem count"));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_parties(mut self, parties: Vec<Party>) -> Result<Self> {
        if parties.len() != self.dims.len() {
            return Err(Error::arg("party count does not match subsystem count"));
        }
        self.parties = Some(parties);
        Ok(self)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Explicit party assignment, or `[A, B]` for an unannotated bipartite spec.
    pub fn parties(&self) -> Option<Vec<Party>> {
        match (&self.parties, self.dims.len()) {
            (Some(p), _) => Some(p.clone()),
            (None, 2) => Some(vec![Party::A, Party::B]),
            (None, 1) => Some(vec![Party::A]),
            _ => None,
        }
    }

    pub fn has_explicit_parties(&self) -> bool {
        self.parties.is_some()
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    /// Subsystem indices owned by `party`.
    pub fn subsystems_of(&self, party: Party) -> Result<Vec<usize>> {
        let parties = self
            .parties()
            .ok_or_else(|| Error::arg("state has more than two subsystems but no party map"))?;
        Ok(parties
            .iter()
            .enumerate()
            .filter(|(_, &p)| p == party)
            .map(|(i, _)| i)
            .collect())
    }

    pub fn concat(&self, other: &DimSpec) -> DimSpec {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let labels = match (&self.labels, &other.labels) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).cloned().collect()),
            _ => None,
        };
        let parties = match (&self.parties, &other.parties) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).copied().collect()),
            _ => None,
        };
        DimSpec { dims, labels, parties }
    }

    /// Spec of the listed subsystems, in the given order.
    pub fn select(&self, order: &[usize]) -> DimSpec {
        DimSpec {
            dims: order.iter().map(|&k| self.dims[k]).collect(),
            labels: self.labels.as_ref().map(|l| order.iter().map(|&k| l[k].clone()).collect()),
            parties: self.parties.as_ref().map(|p| order.iter().map(|&k| p[k]).collect()),
        }
    }

    fn check_capacity(&self) -> Result<()> {
        let total = self
            .dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .unwrap_or(usize::MAX);
        if total > MAX_AMBIENT_DIM {
            return Err(Error::Capacity { requested: total, max: MAX_AMBIENT_DIM });
        }
        Ok(())
    }

    fn check_indices(&self, keep: &[usize]) -> Result<()> {
        if keep.is_empty() {
            return Err(Error::arg("subsystem set is empty"));
        }
        let mut seen = vec![false; self.dims.len()];
        for &k in keep {
            if k >= self.dims.len() {
                return Err(Error::arg(format!("subsystem index {k} out of range")));
            }
            if seen[k] {
                return Err(Error::arg(format!("subsystem index {k} repeated")));
            }
            seen[k] = true;
        }
        Ok(())
    }
}

/// Hermitian, positive semidefinite, unit-trace operator on the subsystems of a [`DimSpec`].
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    spec: DimSpec,
    mat: CMatrix,
}

impl DensityMatrix {
    /// Validates and wraps a matrix. The stored matrix is the Hermitian part of the input.
    pub fn new(spec: DimSpec, mat: CMatrix) -> Result<Self> {
        spec.check_capacity()?;
        let n = spec.total();
        if mat.nrows() != n || mat.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, dims {:?} require {n}x{n}",
                mat.nrows(),
                mat.ncols(),
                spec.dims
            )));
        }
        let herm = linalg::hermiticity_defect(&mat);
        if herm > tol::HERM {
            return Err(Error::InvalidState(format!("not Hermitian (defect {herm:e})")));
        }
        let tr = linalg::trace(&mat);
        if (tr.re - 1.0).abs() > tol::TRACE || tr.im.abs() > tol::TRACE {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let mat = linalg::hermitian_part(&mat);
        let min = linalg::eigvalsh(&mat).first().copied().unwrap_or(0.0);
        if min < -tol::PSD {
            return Err(Error::InvalidState(format!("not positive semidefinite (min eigenvalue {min:e})")));
        }
        Ok(DensityMatrix { spec, mat })
    }

    /// Normalises a PSD operator to unit trace before validating.
    pub fn from_unnormalized(spec: DimSpec, mat: CMatrix) -> Result<Self> {
        let tr = linalg::trace(&mat).re;
        if !(tr > 0.0) {
            return Err(Error::InvalidState("operator has nonpositive trace".into()));
        }
        Self::new(spec, mat / C64::new(tr, 0.0))
    }

    /// Wraps without validation; for results of trace-preserving operations on valid states.
    pub(crate) fn from_parts(spec: DimSpec, mat: CMatrix) -> Self {
        debug_assert_eq!(spec.total(), mat.nrows());
        DensityMatrix { spec, mat }
    }

    pub fn maximally_mixed(spec: DimSpec) -> Result<Self> {
        let n = spec.total();
        Self::new(spec, linalg::identity(n) / C64::new(n as f64, 0.0))
    }

    pub fn spec(&self) -> &DimSpec {
        &self.spec
    }

    pub fn dims(&self) -> &[usize] {
        self.spec.dims()
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn with_spec(&self, spec: DimSpec) -> Result<Self> {
        if spec.total() != self.dim() {
            return Err(Error::DimensionMismatch("new spec does not match matrix size".into()));
        }
        Ok(DensityMatrix { spec, mat: self.mat.clone() })
    }

    pub fn with_parties(&self, parties: Vec<Party>) -> Result<Self> {
        let spec = self.spec.clone().with_parties(parties)?;
        Ok(DensityMatrix { spec, mat: self.mat.clone() })
    }

    /// Kronecker product; the subsystem list is the concatenation.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let spec = self.spec.concat(&other.spec);
        spec.check_capacity()?;
        Ok(DensityMatrix { spec, mat: linalg::kron(&self.mat, &other.mat) })
    }

    /// Reduced state on `keep` (original relative order is preserved).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        self.spec.check_indices(keep)?;
        let mut sorted = keep.to_vec();
        sorted.sort_unstable();
        let mat = linalg::partial_trace_raw(&self.mat, self.spec.dims(), &sorted);
        Ok(DensityMatrix { spec: self.spec.select(&sorted), mat })
    }

    /// Reorders subsystems; `order[i]` is the old index of new subsystem `i`.
    pub fn permute(&self, order: &[usize]) -> Result<DensityMatrix> {
        self.spec.check_indices(order)?;
        if order.len() != self.spec.len() {
            return Err(Error::arg("permutation must list every subsystem"));
        }
        let mat = linalg::permute_operator(&self.mat, self.spec.dims(), order);
        Ok(DensityMatrix { spec: self.spec.select(order), mat })
    }

    /// von Neumann entropy in bits.
    pub fn entropy(&self) -> Result<f64> {
        von_neumann_entropy(&self.mat)
    }

    /// Collapses the subsystems of two parties into a bipartite `[d_first, d_second]` state,
    /// tracing out everything else.
    pub fn bipartite(&self, first: Party, second: Party) -> Result<DensityMatrix> {
        if first == second {
            return Err(Error::arg("a bipartite cut needs two distinct parties"));
        }
        let a = self.spec.subsystems_of(first)?;
        let b = self.spec.subsystems_of(second)?;
        if a.is_empty() || b.is_empty() {
            return Err(Error::arg(format!("state has no subsystems for party {}", if a.is_empty() { first } else { second })));
        }
        let mut keep: Vec<usize> = a.iter().chain(&b).copied().collect();
        keep.sort_unstable();
        let reduced = self.partial_trace(&keep)?;
        let pos = |k: usize| keep.iter().position(|&x| x == k).unwrap();
        let order: Vec<usize> = a.iter().chain(&b).map(|&k| pos(k)).collect();
        let permuted = reduced.permute(&order)?;
        let da: usize = a.iter().map(|&k| self.dims()[k]).product();
        let db: usize = b.iter().map(|&k| self.dims()[k]).product();
        let spec = DimSpec::new(vec![da, db])?.with_parties(vec![first, second])?;
        Ok(DensityMatrix { spec, mat: permuted.mat })
    }

    /// Reduced state of a single party (all its subsystems, grouped).
    pub fn party_marginal(&self, party: Party) -> Result<DensityMatrix> {
        let subs = self.spec.subsystems_of(party)?;
        if subs.is_empty() {
            return Err(Error::arg(format!("state has no subsystems for party {party}")));
        }
        let reduced = self.partial_trace(&subs)?;
        let d = reduced.dim();
        Ok(DensityMatrix { spec: DimSpec::new(vec![d])?.with_parties(vec![party])?, mat: reduced.mat })
    }

    /// Smallest eigenvalue of the partial transpose on the second subsystem of a bipartite state.
    pub fn partial_transpose_min_eigenvalue(&self) -> Result<f64> {
        if self.spec.len() != 2 {
            return Err(Error::arg("partial transpose requires a bipartite state"));
        }
        let (da, db) = (self.dims()[0], self.dims()[1]);
        let pt = CMatrix::from_fn(da * db, da * db, |r, c| {
            let (i, k) = (r / db, r % db);
            let (j, l) = (c / db, c % db);
            self.mat[(i * db + l, j * db + k)]
        });
        Ok(linalg::eigvalsh(&pt).first().copied().unwrap_or(0.0))
    }

    /// Rank-deficiency aware purification onto `system ⊗ ancilla`, ancilla dimension equal to
    /// the numerical rank.
    pub fn purify(&self) -> Result<PureState> {
        let (vals, vecs) = linalg::eigh(&self.mat);
        let support: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > tol::CLIP).collect();
        let r = support.len().max(1);
        let n = self.dim();
        let mut amps = CVector::zeros(n * r);
        let norm: f64 = support.iter().map(|&k| vals[k]).sum();
        for (slot, &k) in support.iter().enumerate() {
            let w = (vals[k] / norm).sqrt();
            for i in 0..n {
                amps[i * r + slot] = vecs[(i, k)] * w;
            }
        }
        let (base, ancilla) = match self.spec.parties() {
            Some(p) if !p.contains(&Party::C) => (
                self.spec.clone().with_parties(p)?,
                DimSpec::new(vec![r])?.with_parties(vec![Party::C])?,
            ),
            _ => (self.spec.clone(), DimSpec::new(vec![r])?),
        };
        PureState::new(base.concat(&ancilla), amps)
    }
}

/// Entropy in bits of a Hermitian matrix interpreted as a state; rejects eigenvalues below
/// `-tol::PSD`.
pub fn von_neumann_entropy(mat: &CMatrix) -> Result<f64> {
    let ev = linalg::eigvalsh(mat);
    if let Some(&min) = ev.first() {
        if min < -tol::PSD {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
    }
    let s: f64 = ev
        .iter()
        .filter(|&&x| x > tol::CLIP)
        .map(|&x| -x * x.log2())
        .sum();
    Ok(s.max(0.0))
}

/// Unit-norm state vector over the subsystems of a [`DimSpec`].
#[derive(Debug, Clone)]
pub struct PureState {
    spec: DimSpec,
    amps: CVector,
}

impl PureState {
    pub fn new(spec: DimSpec, amps: CVector) -> Result<Self> {
        if amps.len() != spec.total() {
            return Err(Error::DimensionMismatch(format!(
                "vector has {} amplitudes, dims {:?} require {}",
                amps.len(),
                spec.dims,
                spec.total()
            )));
        }
        let norm = amps.norm_squared();
        if (norm - 1.0).abs() > tol::TRACE {
            return Err(Error::InvalidState(format!("squared norm is {norm}, expected 1")));
        }
        Ok(PureState { spec, amps })
    }

    pub fn normalized(spec: DimSpec, amps: CVector) -> Result<Self> {
        let n = amps.norm();
        if !(n > 0.0) {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(spec, amps / C64::new(n, 0.0))
    }

    pub fn spec(&self) -> &DimSpec {
        &self.spec
    }

    pub fn dims(&self) -> &[usize] {
        self.spec.dims()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn with_parties(&self, parties: Vec<Party>) -> Result<Self> {
        Ok(PureState { spec: self.spec.clone().with_parties(parties)?, amps: self.amps.clone() })
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState { spec: self.spec.concat(&other.spec), amps: self.amps.kronecker(&other.amps) }
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        self.spec.check_capacity()?;
        Ok(DensityMatrix { spec: self.spec.clone(), mat: linalg::outer(&self.amps) })
    }

    /// Reduced density matrix on `keep`, computed without forming the full projector.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        self.spec.check_indices(keep)?;
        let mut sorted = keep.to_vec();
        sorted.sort_unstable();
        let spec = self.spec.select(&sorted);
        spec.check_capacity()?;
        let traced: Vec<usize> = (0..self.spec.len()).filter(|k| !sorted.contains(k)).collect();
        let order: Vec<usize> = sorted.iter().chain(&traced).copied().collect();
        let psi = linalg::permute_vector(&self.amps, self.spec.dims(), &order);
        let kd = spec.total();
        let td = psi.len() / kd;
        let m = CMatrix::from_fn(kd, td, |i, t| psi[i * td + t]);
        Ok(DensityMatrix { spec, mat: &m * m.adjoint() })
    }

    /// Reduced state on all subsystems of the listed parties.
    pub fn reduced_parties(&self, parties: &[Party]) -> Result<DensityMatrix> {
        let mut keep = Vec::new();
        for &p in parties {
            keep.extend(self.spec.subsystems_of(p)?);
        }
        if keep.is_empty() {
            return Err(Error::arg("no subsystems selected"));
        }
        self.reduced(&keep)
    }

    /// Entanglement entropy across `keep | rest`.
    pub fn marginal_entropy(&self, keep: &[usize]) -> Result<f64> {
        self.reduced(keep)?.entropy()
    }
}

/// Probability-weighted family of states on a common [`DimSpec`].
#[derive(Debug, Clone)]
pub struct EnsembleOfStates {
    probs: Vec<f64>,
    states: Vec<DensityMatrix>,
}

impl EnsembleOfStates {
    pub fn new(probs: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        if probs.len() != states.len() || probs.is_empty() {
            return Err(Error::arg("ensemble needs equally many (nonzero) probabilities and states"));
        }
        check_probability_vector(&probs)?;
        let spec = states[0].spec().dims().to_vec();
        if states.iter().any(|s| s.dims() != spec.as_slice()) {
            return Err(Error::DimensionMismatch("ensemble members have different dims".into()));
        }
        Ok(EnsembleOfStates { probs, states })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn average(&self) -> DensityMatrix {
        let mut m = CMatrix::zeros(self.states[0].dim(), self.states[0].dim());
        for (p, s) in self.probs.iter().zip(&self.states) {
            m += s.matrix() * C64::new(*p, 0.0);
        }
        DensityMatrix::from_parts(self.states[0].spec().clone(), m)
    }
}

pub(crate) fn check_probability_vector(p: &[f64]) -> Result<()> {
    if p.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::arg("probabilities must be nonnegative"));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > tol::TRACE {
        return Err(Error::arg(format!("probabilities sum to {total}, expected 1")));
    }
    Ok(())
}

/// How a [`SeparableState`] was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeparabilityWitness {
    /// Built as an explicit convex mixture of product states.
    Decomposition,
    /// Positive partial transpose in dimension at most 6.
    Ppt,
    /// Asserted by the caller (e.g. a state dumped by a separable-state suite).
    Declared,
}

/// Bipartite state known to be separable.
#[derive(Debug, Clone)]
pub struct SeparableState {
    state: DensityMatrix,
    witness: SeparabilityWitness,
}

impl SeparableState {
    pub(crate) fn from_decomposition(state: DensityMatrix) -> Self {
        SeparableState { state, witness: SeparabilityWitness::Decomposition }
    }

    /// Separability via the PPT criterion, which is exact when `d_A·d_B ≤ 6`.
    pub fn ppt_certified(state: &DensityMatrix) -> Result<Self> {
        if state.spec().len() != 2 {
            return Err(Error::arg("PPT certification needs a bipartite state"));
        }
        if state.dim() > 6 {
            return Err(Error::arg(format!(
                "PPT is not sufficient for separability in dimension {}",
                state.dim()
            )));
        }
        let min = state.partial_transpose_min_eigenvalue()?;
        if min < -tol::PSD {
            return Err(Error::arg(format!("state is entangled (partial transpose eigenvalue {min:e})")));
        }
        Ok(SeparableState { state: state.clone(), witness: SeparabilityWitness::Ppt })
    }

    pub fn declared(state: DensityMatrix) -> Self {
        SeparableState { state, witness: SeparabilityWitness::Declared }
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn witness(&self) -> SeparabilityWitness {
        self.witness
    }

    pub fn into_inner(self) -> DensityMatrix {
        self.state
    }
}

#[cfg(test)]
mod tests;
