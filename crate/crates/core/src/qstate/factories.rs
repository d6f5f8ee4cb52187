//! Named states.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, C64};

use super::{check_probability_vector, DensityMatrix, DimSpec, Party, PureState};

fn bipartite_spec(da: usize, db: usize, second: Party) -> Result<DimSpec> {
    DimSpec::new(vec![da, db])?.with_parties(vec![Party::A, second])
}

/// Computational basis vector `|index⟩` on the given subsystems.
pub fn basis_state(dims: &[usize], index: usize) -> Result<PureState> {
    let spec = DimSpec::new(dims.to_vec())?;
    if index >= spec.total() {
        return Err(Error::arg(format!("basis index {index} out of range")));
    }
    let mut v = CVector::zeros(spec.total());
    v[index] = linalg::ONE;
    PureState::new(spec, v)
}

/// `(|00⟩ + |11⟩)/√2` with parties A, B.
pub fn epr() -> PureState {
    let mut v = CVector::zeros(4);
    v[0] = c(FRAC_1_SQRT_2, 0.0);
    v[3] = c(FRAC_1_SQRT_2, 0.0);
    PureState::new(bipartite_spec(2, 2, Party::B).unwrap(), v).unwrap()
}

/// The four Bell states, `k = 0..4` for Φ+, Φ−, Ψ+, Ψ−.
pub fn bell_state(k: usize) -> Result<PureState> {
    let s = FRAC_1_SQRT_2;
    let amps = match k {
        0 => [s, 0.0, 0.0, s],
        1 => [s, 0.0, 0.0, -s],
        2 => [0.0, s, s, 0.0],
        3 => [0.0, s, -s, 0.0],
        _ => return Err(Error::arg("Bell state index must be 0..4")),
    };
    PureState::new(
        bipartite_spec(2, 2, Party::B)?,
        CVector::from_iterator(4, amps.iter().map(|&x| c(x, 0.0))),
    )
}

/// `(|000⟩ + |111⟩)/√2` with parties A, B, C.
pub fn ghz() -> PureState {
    let mut v = CVector::zeros(8);
    v[0] = c(FRAC_1_SQRT_2, 0.0);
    v[7] = c(FRAC_1_SQRT_2, 0.0);
    let spec = DimSpec::new(vec![2, 2, 2])
        .and_then(|s| s.with_parties(vec![Party::A, Party::B, Party::C]))
        .unwrap();
    PureState::new(spec, v).unwrap()
}

/// `(|00⟩⟨00| + |11⟩⟨11|)/2`: perfectly correlated classical bits.
pub fn cc_state() -> DensityMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = c(0.5, 0.0);
    m[(3, 3)] = c(0.5, 0.0);
    DensityMatrix::new(bipartite_spec(2, 2, Party::B).unwrap(), m).unwrap()
}

/// `Σ_i p_i |i⟩⟨i| ⊗ ρ_i` with a computational-basis classical register on A.
pub fn make_cq_state(probs: &[f64], cond_states: &[DensityMatrix]) -> Result<DensityMatrix> {
    if probs.len() != cond_states.len() || probs.is_empty() {
        return Err(Error::arg(format!(
            "{} probabilities for {} conditional states",
            probs.len(),
            cond_states.len()
        )));
    }
    check_probability_vector(probs)?;
    let db = cond_states[0].dim();
    if cond_states.iter().any(|s| s.dim() != db) {
        return Err(Error::DimensionMismatch("conditional states differ in dimension".into()));
    }
    let n = probs.len();
    let mut m = CMatrix::zeros(n * db, n * db);
    for (i, (p, s)) in probs.iter().zip(cond_states).enumerate() {
        let block = s.matrix() * c(*p, 0.0);
        m.view_mut((i * db, i * db), (db, db)).copy_from(&block);
    }
    DensityMatrix::new(bipartite_spec(n, db, Party::B)?, m)
}

/// Qubit pure state with Bloch vector in the x–z plane at polar angle `theta`.
pub fn bloch_equatorial(theta: f64) -> PureState {
    let v = CVector::from_vec(vec![c((theta / 2.0).cos(), 0.0), c((theta / 2.0).sin(), 0.0)]);
    PureState::new(DimSpec::new(vec![2]).unwrap(), v).unwrap()
}

/// The three trine states at Bloch angles 0, 2π/3, 4π/3.
pub fn trine_states() -> Vec<PureState> {
    (0..3).map(|k| bloch_equatorial(2.0 * PI * k as f64 / 3.0)).collect()
}

/// Qutrit–qubit CQ state `Σ_i (1/3)|i⟩⟨i| ⊗ |φ_i⟩⟨φ_i|` over the trine states.
pub fn make_trine() -> DensityMatrix {
    let states: Vec<DensityMatrix> = trine_states()
        .iter()
        .map(|s| s.to_density().unwrap())
        .collect();
    make_cq_state(&[1.0 / 3.0; 3], &states).unwrap()
}

fn labelled(dims: usize, labels: &[&str]) -> DimSpec {
    let parties = labels
        .iter()
        .map(|l| l[..1].to_uppercase().parse::<Party>().unwrap())
        .collect();
    DimSpec::new(vec![2; dims])
        .and_then(|s| s.with_labels(labels.iter().map(|l| l.to_string()).collect()))
        .and_then(|s| s.with_parties(parties))
        .unwrap()
}

/// GHZ on (a1, b1, c1), EPR on (a2, b2), EPR on (a3, c2): seven qubits.
pub fn make_ghz_epr_psi() -> PureState {
    let amps = ghz().amplitudes().kronecker(epr().amplitudes()).kronecker(epr().amplitudes());
    PureState::new(labelled(7, &["a1", "b1", "c1", "a2", "b2", "a3", "c2"]), amps).unwrap()
}

/// As [`make_ghz_epr_psi`] plus an EPR pair on (b3, c3): nine qubits.
pub fn make_ghz_epr_phi() -> PureState {
    let amps = make_ghz_epr_psi().amplitudes().kronecker(epr().amplitudes());
    PureState::new(
        labelled(9, &["a1", "b1", "c1", "a2", "b2", "a3", "c2", "b3", "c3"]),
        amps,
    )
    .unwrap()
}

/// Gram matrix `G[(i, j)] = ⟨b_i|b_j⟩`.
pub fn gram_matrix(states: &[PureState]) -> CMatrix {
    let n = states.len();
    CMatrix::from_fn(n, n, |i, j| states[i].amplitudes().dotc(states[j].amplitudes()))
}

/// One-way maximally correlated state
/// `Σ_ij √(p_i p_j) ⟨b_j|b_i⟩ |a_i⟩⟨a_j| ⊗ |i⟩⟨j|` on parties A, C.
///
/// `overlaps[(i, j)]` holds `⟨b_i|b_j⟩`.
pub fn make_one_way_mcs(probs: &[f64], a_states: &[PureState], overlaps: &CMatrix) -> Result<DensityMatrix> {
    let n = probs.len();
    if a_states.len() != n || overlaps.nrows() != n || overlaps.ncols() != n || n == 0 {
        return Err(Error::arg("probabilities, A states and overlap matrix must agree in length"));
    }
    check_probability_vector(probs)?;
    let da = a_states[0].amplitudes().len();
    if a_states.iter().any(|a| a.amplitudes().len() != da) {
        return Err(Error::DimensionMismatch("A states differ in dimension".into()));
    }
    for i in 0..n {
        if (overlaps[(i, i)] - linalg::ONE).norm() > crate::tol::TRACE {
            return Err(Error::arg(format!("overlap ⟨b_{i}|b_{i}⟩ must be 1")));
        }
    }
    let mut m = CMatrix::zeros(da * n, da * n);
    for i in 0..n {
        for j in 0..n {
            let coef = overlaps[(j, i)] * C64::new((probs[i] * probs[j]).sqrt(), 0.0);
            let ai = a_states[i].amplitudes();
            let aj = a_states[j].amplitudes();
            for x in 0..da {
                for y in 0..da {
                    m[(x * n + i, y * n + j)] += coef * ai[x] * aj[y].conj();
                }
            }
        }
    }
    let spec = DimSpec::new(vec![da, n])?.with_parties(vec![Party::A, Party::C])?;
    DensityMatrix::new(spec, m).map_err(|e| Error::arg(format!("overlaps do not define a state: {e}")))
}
