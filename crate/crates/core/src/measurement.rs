//! POVMs, conditional ensembles and joint outcome distributions.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::qstate::io::{decode_matrix, encode_matrix, RawEntry};
use crate::qstate::{check_probability_vector, DensityMatrix, DimSpec};
use crate::tol;

/// Position of a subsystem in a bipartite state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Side::A => 0,
            Side::B => 1,
        }
    }
}

/// Positive operator-valued measure on a `dim`-dimensional system.
#[derive(Debug, Clone)]
pub struct Povm {
    dim: usize,
    effects: Vec<CMatrix>,
}

impl Povm {
    pub fn new(dim: usize, effects: Vec<CMatrix>) -> Result<Self> {
        if effects.is_empty() {
            return Err(Error::InvalidPovm("no effects".into()));
        }
        let mut sum = CMatrix::zeros(dim, dim);
        for (i, e) in effects.iter().enumerate() {
            if e.nrows() != dim || e.ncols() != dim {
                return Err(Error::InvalidPovm(format!("effect {i} is not {dim}x{dim}")));
            }
            let herm = linalg::hermiticity_defect(e);
            if herm > tol::HERM {
                return Err(Error::InvalidPovm(format!("effect {i} not Hermitian (defect {herm:e})")));
            }
            let min = linalg::eigvalsh(e).first().copied().unwrap_or(0.0);
            if min < -tol::PSD {
                return Err(Error::InvalidPovm(format!("effect {i} not PSD (min eigenvalue {min:e})")));
            }
            sum += e;
        }
        let defect = linalg::max_abs_diff(&sum, &linalg::identity(dim));
        if defect > tol::POVM {
            return Err(Error::InvalidPovm(format!("effects sum to identity only within {defect:e}")));
        }
        Ok(Povm { dim, effects: effects.iter().map(linalg::hermitian_part).collect() })
    }

    /// Projective measurement in the computational basis.
    pub fn computational(dim: usize) -> Self {
        let effects = (0..dim)
            .map(|k| {
                let mut e = CMatrix::zeros(dim, dim);
                e[(k, k)] = linalg::ONE;
                e
            })
            .collect();
        Povm { dim, effects }
    }

    /// Rank-1 POVM from a k×d matrix `W` with orthonormal columns; effect `i` is `w_i† w_i`
    /// where `w_i` is row `i`.
    pub fn from_stiefel_rows(w: &CMatrix) -> Result<Self> {
        let d = w.ncols();
        let effects = (0..w.nrows())
            .map(|i| {
                let row = w.row(i);
                CMatrix::from_fn(d, d, |x, y| row[x].conj() * row[y])
            })
            .collect();
        Self::new(d, effects)
    }

    /// Projective measurement onto the columns of a unitary.
    pub fn from_basis(u: &CMatrix) -> Result<Self> {
        Self::from_stiefel_rows(&u.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    /// Effects `E_i ⊗ F_j` in row-major outcome order.
    pub fn tensor(&self, other: &Povm) -> Povm {
        let effects = self
            .effects
            .iter()
            .flat_map(|e| other.effects.iter().map(move |f| linalg::kron(e, f)))
            .collect();
        Povm { dim: self.dim * other.dim, effects }
    }

    /// Reorders the tensor factors of every effect; see [`linalg::permute_operator`].
    pub fn permute_factors(&self, dims: &[usize], order: &[usize]) -> Result<Povm> {
        if dims.iter().product::<usize>() != self.dim || order.len() != dims.len() {
            return Err(Error::DimensionMismatch("factor dims do not match the POVM".into()));
        }
        let effects = self.effects.iter().map(|e| linalg::permute_operator(e, dims, order)).collect();
        Ok(Povm { dim: self.dim, effects })
    }

    /// Rows `√λ u†` of the spectral decompositions of all effects; a rank-1 refinement of
    /// this POVM as a Stiefel matrix.
    pub fn rank1_refinement(&self) -> CMatrix {
        let mut rows: Vec<CVector> = Vec::new();
        for e in &self.effects {
            let (vals, vecs) = linalg::eigh(e);
            for (k, &lam) in vals.iter().enumerate() {
                if lam > tol::CLIP {
                    rows.push(vecs.column(k).map(|z| z.conj()) * c(lam.sqrt(), 0.0));
                }
            }
        }
        CMatrix::from_fn(rows.len(), self.dim, |i, j| rows[i][j])
    }

    pub fn completeness_defect(&self) -> f64 {
        let sum = self.effects.iter().fold(CMatrix::zeros(self.dim, self.dim), |acc, e| acc + e);
        linalg::max_abs_diff(&sum, &linalg::identity(self.dim))
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Out {
            dim: usize,
            effects: Vec<Vec<Vec<RawEntry>>>,
        }
        let out = Out { dim: self.dim, effects: self.effects.iter().map(encode_matrix).collect() };
        serde_json::to_string_pretty(&out).expect("POVM serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct In {
            dim: usize,
            effects: Vec<Vec<Vec<[f64; 2]>>>,
        }
        let raw: In = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let effects = raw.effects.iter().map(|m| decode_matrix(m)).collect::<Result<Vec<_>>>()?;
        Povm::new(raw.dim, effects)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|source| Error::Io { path: path.display().to_string(), source })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }
}

/// Outcome probabilities and post-measurement states of the unmeasured side.
#[derive(Debug, Clone)]
pub struct ConditionalEnsemble {
    probs: Vec<f64>,
    states: Vec<CMatrix>,
    outcomes: Vec<usize>,
    dropped: Vec<usize>,
}

impl ConditionalEnsemble {
    /// Builds an ensemble from unnormalised conditional operators `p_i ρ_i`, dropping
    /// outcomes with negligible probability.
    pub fn from_unnormalized(ops: Vec<CMatrix>) -> Self {
        let mut probs = Vec::new();
        let mut states = Vec::new();
        let mut outcomes = Vec::new();
        let mut dropped = Vec::new();
        for (i, op) in ops.into_iter().enumerate() {
            let p = linalg::trace(&op).re;
            if p < tol::ZERO_PROB {
                dropped.push(i);
                continue;
            }
            probs.push(p);
            states.push(op / c(p, 0.0));
            outcomes.push(i);
        }
        ConditionalEnsemble { probs, states, outcomes, dropped }
    }

    /// Ensemble with explicit probabilities and normalised states.
    pub fn new(probs: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        if probs.len() != states.len() || probs.is_empty() {
            return Err(Error::arg("ensemble needs equally many probabilities and states"));
        }
        check_probability_vector(&probs)?;
        let ops = probs
            .iter()
            .zip(&states)
            .map(|(p, s)| s.matrix() * c(*p, 0.0))
            .collect();
        Ok(Self::from_unnormalized(ops))
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn states(&self) -> &[CMatrix] {
        &self.states
    }

    /// Original outcome index of each retained entry.
    pub fn outcomes(&self) -> &[usize] {
        &self.outcomes
    }

    /// Outcomes dropped for having probability below the cutoff.
    pub fn dropped(&self) -> &[usize] {
        &self.dropped
    }

    pub fn average(&self) -> CMatrix {
        let d = self.states.first().map_or(0, |s| s.nrows());
        self.probs
            .iter()
            .zip(&self.states)
            .fold(CMatrix::zeros(d, d), |acc, (p, s)| acc + s * c(*p, 0.0))
    }
}

/// Joint distribution `p_ij` of a product measurement.
#[derive(Debug, Clone)]
pub struct JointDistribution {
    table: Vec<Vec<f64>>,
    rows: Vec<f64>,
    cols: Vec<f64>,
}

impl JointDistribution {
    pub fn new(table: Vec<Vec<f64>>) -> Result<Self> {
        let ncols = table.first().map_or(0, |r| r.len());
        if table.is_empty() || ncols == 0 || table.iter().any(|r| r.len() != ncols) {
            return Err(Error::arg("joint table must be a nonempty rectangle"));
        }
        if table.iter().flatten().any(|&x| !(x >= 0.0)) {
            return Err(Error::arg("joint table has negative entries"));
        }
        let total: f64 = table.iter().flatten().sum();
        if (total - 1.0).abs() > tol::TRACE {
            return Err(Error::arg(format!("joint table sums to {total}")));
        }
        let rows = table.iter().map(|r| r.iter().sum()).collect();
        let cols = (0..ncols).map(|j| table.iter().map(|r| r[j]).sum()).collect();
        Ok(JointDistribution { table, rows, cols })
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.table
    }

    pub fn row_marginal(&self) -> &[f64] {
        &self.rows
    }

    pub fn col_marginal(&self) -> &[f64] {
        &self.cols
    }
}

fn require_bipartite(rho: &DensityMatrix) -> Result<(usize, usize)> {
    match rho.dims() {
        [da, db] => Ok((*da, *db)),
        dims => Err(Error::arg(format!("expected a bipartite state, got dims {dims:?}"))),
    }
}

/// Unnormalised conditional operators `tr_side((E_i ⊗ I) ρ)` on the other side.
pub(crate) fn conditional_operators(rho: &CMatrix, da: usize, db: usize, side: Side, effects: &[CMatrix]) -> Vec<CMatrix> {
    effects
        .iter()
        .map(|e| match side {
            Side::A => CMatrix::from_fn(db, db, |y, yp| {
                let mut acc = linalg::ZERO;
                for x in 0..da {
                    for xp in 0..da {
                        let exx = e[(x, xp)];
                        if exx != linalg::ZERO {
                            acc += exx * rho[(xp * db + y, x * db + yp)];
                        }
                    }
                }
                acc
            }),
            Side::B => CMatrix::from_fn(da, da, |x, xp| {
                let mut acc = linalg::ZERO;
                for y in 0..db {
                    for yp in 0..db {
                        let eyy = e[(y, yp)];
                        if eyy != linalg::ZERO {
                            acc += eyy * rho[(x * db + yp, xp * db + y)];
                        }
                    }
                }
                acc
            }),
        })
        .collect()
}

/// Measures one side of a bipartite state.
pub fn measure_side(rho: &DensityMatrix, side: Side, povm: &Povm) -> Result<ConditionalEnsemble> {
    let (da, db) = require_bipartite(rho)?;
    let d = [da, db][side.index()];
    if povm.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "POVM acts on dimension {}, side {side:?} has dimension {d}",
            povm.dim()
        )));
    }
    Ok(ConditionalEnsemble::from_unnormalized(conditional_operators(
        rho.matrix(),
        da,
        db,
        side,
        povm.effects(),
    )))
}

/// Outcome statistics of the product measurement `E_i ⊗ F_j`.
pub fn joint_distribution(rho: &DensityMatrix, povm_a: &Povm, povm_b: &Povm) -> Result<JointDistribution> {
    let (da, db) = require_bipartite(rho)?;
    if povm_a.dim() != da || povm_b.dim() != db {
        return Err(Error::DimensionMismatch(format!(
            "POVM dims ({}, {}) do not match state dims ({da}, {db})",
            povm_a.dim(),
            povm_b.dim()
        )));
    }
    let taus = conditional_operators(rho.matrix(), da, db, Side::A, povm_a.effects());
    let mut table: Vec<Vec<f64>> = taus
        .iter()
        .map(|tau| {
            povm_b
                .effects()
                .iter()
                .map(|f| trace_product(f, tau).max(0.0))
                .collect()
        })
        .collect();
    let total: f64 = table.iter().flatten().sum();
    for x in table.iter_mut().flatten() {
        *x /= total;
    }
    JointDistribution::new(table)
}

/// `Re tr(A B)` for Hermitian arguments.
pub(crate) fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

/// `H(p^A) + H(p^B) − H(p)` in bits.
pub fn classical_mutual_information(jd: &JointDistribution) -> f64 {
    let h_joint = linalg::shannon_bits(jd.table.iter().flatten());
    let mi = linalg::shannon_bits(&jd.rows) + linalg::shannon_bits(&jd.cols) - h_joint;
    mi.max(0.0)
}

/// `S(Σ p_i ρ_i) − Σ p_i S(ρ_i)` in bits.
pub fn holevo_quantity(ens: &ConditionalEnsemble) -> f64 {
    let avg = linalg::entropy_bits_unchecked(&ens.average());
    let cond: f64 = ens
        .probs
        .iter()
        .zip(&ens.states)
        .map(|(p, s)| p * linalg::entropy_bits_unchecked(s))
        .sum();
    avg - cond
}

/// State of the unmeasured side as a [`DensityMatrix`] (for diagnostics).
pub fn conditional_state(ens: &ConditionalEnsemble, k: usize) -> Result<DensityMatrix> {
    let s = ens.states.get(k).ok_or_else(|| Error::arg("outcome index out of range"))?;
    DensityMatrix::new(DimSpec::new(vec![s.nrows()])?, s.clone())
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use super::*;
    use crate::qstate::{self, random_density, DimSpec};

    fn pure_dm(v: &[f64]) -> CMatrix {
        let v = CVector::from_iterator(v.len(), v.iter().map(|&x| c(x, 0.0)));
        linalg::outer(&v)
    }

    fn anti_trine() -> Povm {
        let effects = (0..3)
            .map(|k| {
                let s = qstate::bloch_equatorial(2.0 * std::f64::consts::PI * k as f64 / 3.0 + std::f64::consts::PI);
                linalg::outer(s.amplitudes()) * c(2.0 / 3.0, 0.0)
            })
            .collect();
        Povm::new(2, effects).unwrap()
    }

    #[test]
    fn povm_validation() {
        assert!(Povm::new(2, vec![linalg::identity(2)]).is_ok());
        assert!(Povm::new(2, vec![pure_dm(&[1.0, 0.0])]).is_err());
        let neg = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), linalg::ZERO, linalg::ZERO, c(-1.0, 0.0)]);
        let comp = CMatrix::from_row_slice(2, 2, &[c(-1.0, 0.0), linalg::ZERO, linalg::ZERO, c(2.0, 0.0)]);
        assert!(matches!(Povm::new(2, vec![neg, comp]), Err(Error::InvalidPovm(_))));
    }

    #[test]
    fn measure_cc_state_in_computational_basis() {
        let ens = measure_side(&qstate::cc_state(), Side::A, &Povm::computational(2)).unwrap();
        assert_eq!(ens.probs().len(), 2);
        assert_abs_diff_eq!(ens.probs()[0], 0.5, epsilon = 1e-15);
        assert!(linalg::max_abs_diff(&ens.states()[0], &pure_dm(&[1.0, 0.0])) < 1e-15);
        assert!(linalg::max_abs_diff(&ens.states()[1], &pure_dm(&[0.0, 1.0])) < 1e-15);
    }

    #[test]
    fn measure_trine_register_yields_trine_states() {
        let ens = measure_side(&qstate::make_trine(), Side::A, &Povm::computational(3)).unwrap();
        let trine = qstate::trine_states();
        for (k, s) in ens.states().iter().enumerate() {
            assert_abs_diff_eq!(ens.probs()[k], 1.0 / 3.0, epsilon = 1e-15);
            assert!(linalg::max_abs_diff(s, &linalg::outer(trine[k].amplitudes())) < 1e-15);
        }
    }

    #[test]
    fn measuring_epr_leaves_pure_states() {
        let epr = qstate::epr().to_density().unwrap();
        let u = CMatrix::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.8), c(0.6, 0.0)]);
        let ens = measure_side(&epr, Side::A, &Povm::from_basis(&u).unwrap()).unwrap();
        for (p, s) in ens.probs().iter().zip(ens.states()) {
            assert_abs_diff_eq!(*p, 0.5, epsilon = 1e-14);
            assert_abs_diff_eq!(linalg::entropy_bits_unchecked(s), 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn measure_side_dimension_mismatch() {
        let err = measure_side(&qstate::make_trine(), Side::B, &Povm::computational(3));
        assert!(matches!(err, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn zero_probability_outcomes_are_dropped() {
        let product = qstate::basis_state(&[2, 2], 0).unwrap().to_density().unwrap();
        let ens = measure_side(&product, Side::A, &Povm::computational(2)).unwrap();
        assert_eq!(ens.outcomes(), &[0]);
        assert_eq!(ens.dropped(), &[1]);
    }

    #[test]
    fn joint_distribution_examples() {
        let a = random_density(DimSpec::new(vec![2]).unwrap(), 2, 1).unwrap();
        let b = random_density(DimSpec::new(vec![3]).unwrap(), 3, 2).unwrap();
        let jd = joint_distribution(&a.tensor(&b).unwrap(), &Povm::computational(2), &Povm::computational(3)).unwrap();
        for i in 0..2 {
            for j in 0..3 {
                assert_abs_diff_eq!(jd.table()[i][j], jd.row_marginal()[i] * jd.col_marginal()[j], epsilon = 1e-14);
            }
        }
        assert_abs_diff_eq!(classical_mutual_information(&jd), 0.0, epsilon = 1e-12);

        let cc = joint_distribution(&qstate::cc_state(), &Povm::computational(2), &Povm::computational(2)).unwrap();
        assert_eq!(cc.table(), &[vec![0.5, 0.0], vec![0.0, 0.5]]);
        assert_abs_diff_eq!(classical_mutual_information(&cc), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn trine_with_anti_trine_matches_direct_traces() {
        let trine = qstate::make_trine();
        let anti = anti_trine();
        let jd = joint_distribution(&trine, &Povm::computational(3), &anti).unwrap();
        // oracle: p_ij = tr((|i⟩⟨i| ⊗ F_j) ρ) evaluated on the full matrix
        for i in 0..3 {
            let mut ei = CMatrix::zeros(3, 3);
            ei[(i, i)] = linalg::ONE;
            for (j, f) in anti.effects().iter().enumerate() {
                let op = linalg::kron(&ei, f);
                let direct = linalg::trace(&(op * trine.matrix())).re;
                assert_abs_diff_eq!(jd.table()[i][j], direct, epsilon = 1e-14);
            }
        }
        // accessible information of the trine: log2(3) − 1
        assert_abs_diff_eq!(classical_mutual_information(&jd), 0.584_962_500_721_156_1, epsilon = 1e-12);
    }

    #[test]
    fn classical_mutual_information_of_noisy_table() {
        let jd = JointDistribution::new(vec![vec![1.0 / 3.0, 1.0 / 6.0], vec![1.0 / 6.0, 1.0 / 3.0]]).unwrap();
        // oracle: 2·H(1/2) − H(1/3,1/6,1/6,1/3)
        assert_abs_diff_eq!(classical_mutual_information(&jd), 0.081_704_165_945_510_44, epsilon = 1e-12);
    }

    #[test]
    fn holevo_quantity_examples() {
        let s = random_density(DimSpec::new(vec![2]).unwrap(), 2, 3).unwrap();
        let same = ConditionalEnsemble::new(vec![0.3, 0.7], vec![s.clone(), s]).unwrap();
        assert_abs_diff_eq!(holevo_quantity(&same), 0.0, epsilon = 1e-12);

        let trine: Vec<DensityMatrix> = qstate::trine_states().iter().map(|p| p.to_density().unwrap()).collect();
        let ens = ConditionalEnsemble::new(vec![1.0 / 3.0; 3], trine).unwrap();
        assert_abs_diff_eq!(holevo_quantity(&ens), 1.0, epsilon = 1e-12);

        let z: Vec<DensityMatrix> = (0..2).map(|k| qstate::basis_state(&[2], k).unwrap().to_density().unwrap()).collect();
        let ens = ConditionalEnsemble::new(vec![0.5, 0.5], z).unwrap();
        assert_abs_diff_eq!(holevo_quantity(&ens), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn povm_json_roundtrip() {
        let p = anti_trine();
        let back = Povm::from_json(&p.to_json()).unwrap();
        for (e, f) in p.effects().iter().zip(back.effects()) {
            assert_eq!(e, f);
        }
    }

    #[test]
    fn rank1_refinement_is_complete() {
        let p = Povm::computational(2).tensor(&anti_trine());
        let w = p.rank1_refinement();
        assert_eq!(w.nrows(), 6);
        assert!(linalg::max_abs_diff(&(w.adjoint() * &w), &linalg::identity(4)) < 1e-12);
    }

    fn random_povm(d: usize, k: usize, seed: u64) -> Povm {
        let mut rng = qstate::rng_from_seed(seed);
        let x = qstate::ginibre(k, d, &mut rng);
        Povm::from_stiefel_rows(&linalg::polar_factor(&x).unwrap()).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn non_selective_average_is_the_marginal(seed in any::<u64>(), da in 2usize..4, db in 2usize..4, k in 1usize..7) {
            let rho = random_density(DimSpec::new(vec![da, db]).unwrap(), da * db, seed).unwrap();
            let ens = measure_side(&rho, Side::A, &random_povm(da, k.max(da), seed ^ 1)).unwrap();
            let rho_b = rho.partial_trace(&[1]).unwrap();
            prop_assert!(linalg::max_abs_diff(&ens.average(), rho_b.matrix()) < tol::NUM);
            prop_assert!(holevo_quantity(&ens) >= -tol::NUM);
        }

        #[test]
        fn joint_marginals_and_data_processing(seed in any::<u64>(), da in 2usize..4, db in 2usize..4) {
            let rho = random_density(DimSpec::new(vec![da, db]).unwrap(), 1 + (seed as usize) % (da * db), seed).unwrap();
            let pa = random_povm(da, da * da, seed ^ 2);
            let pb = random_povm(db, db * db, seed ^ 3);
            let jd = joint_distribution(&rho, &pa, &pb).unwrap();
            let ens = measure_side(&rho, Side::A, &pa).unwrap();
            for (slot, &i) in ens.outcomes().iter().enumerate() {
                prop_assert!((jd.row_marginal()[i] - ens.probs()[slot]).abs() < tol::NUM);
            }
            let ens_b = measure_side(&rho, Side::B, &pb).unwrap();
            for (slot, &j) in ens_b.outcomes().iter().enumerate() {
                prop_assert!((jd.col_marginal()[j] - ens_b.probs()[slot]).abs() < tol::NUM);
            }
            prop_assert!(classical_mutual_information(&jd) <= holevo_quantity(&ens) + tol::NUM);
        }
    }
}
