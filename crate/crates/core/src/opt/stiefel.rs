//! Rank-1 POVMs as points of a complex Stiefel manifold and Riemannian ascent on it.

use std::sync::atomic::{AtomicBool, Ordering};

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::measurement::Povm;
use crate::qstate::{complex_gaussian, ginibre};

use super::objective::Objective;

/// Raw real parameters (row-major, interleaved re/im) to a k×d complex matrix.
pub fn raw_matrix(params: &[f64], d: usize, k: usize) -> Result<CMatrix> {
    if params.len() != 2 * k * d {
        return Err(Error::arg(format!(
            "expected {} parameters for k={k}, d={d}, got {}",
            2 * k * d,
            params.len()
        )));
    }
    Ok(CMatrix::from_fn(k, d, |i, j| {
        let base = 2 * (i * d + j);
        c(params[base], params[base + 1])
    }))
}

/// Stiefel projection (polar factor) of the raw matrix, retrying with small perturbations
/// when it is numerically rank deficient.
pub fn stiefel_from_params(params: &[f64], d: usize, k: usize) -> Result<CMatrix> {
    if k < d {
        return Err(Error::arg(format!("a complete rank-1 POVM needs at least d={d} outcomes, got {k}")));
    }
    let raw = raw_matrix(params, d, k)?;
    let mut attempt = raw.clone();
    let mut rng = crate::qstate::rng_from_seed(params.len() as u64);
    for _ in 0..3 {
        match linalg::polar_factor(&attempt) {
            Ok(w) => return Ok(w),
            Err(_) => {
                let scale = 1e-6 * raw.norm().max(1.0);
                attempt = &raw + CMatrix::from_fn(k, d, |_, _| complex_gaussian(&mut rng) * scale);
            }
        }
    }
    Err(Error::Numerical("raw parameter matrix is rank deficient".into()))
}

/// Rank-1 POVM with `k` outcomes on dimension `d` from `2·k·d` real parameters.
pub fn parameterize_rank1(params: &[f64], d: usize, k: usize) -> Result<Povm> {
    Povm::from_stiefel_rows(&stiefel_from_params(params, d, k)?)
}

/// Flattens a k×d matrix back into raw parameters.
pub fn params_from_matrix(w: &CMatrix) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * w.len());
    for i in 0..w.nrows() {
        for j in 0..w.ncols() {
            out.push(w[(i, j)].re);
            out.push(w[(i, j)].im);
        }
    }
    out
}

pub(crate) fn random_stiefel<R: Rng + ?Sized>(k: usize, d: usize, rng: &mut R) -> CMatrix {
    loop {
        if let Ok(w) = linalg::polar_factor(&ginibre(k, d, rng)) {
            return w;
        }
    }
}

/// Embeds a d×d unitary's adjoint (rows = basis bras) into k rows, padding with zero rows.
pub(crate) fn padded_rows(rows: &CMatrix, k: usize) -> CMatrix {
    let d = rows.ncols();
    let n = rows.nrows().max(k);
    CMatrix::from_fn(n, d, |i, j| if i < rows.nrows() { rows[(i, j)] } else { linalg::ZERO })
}

#[derive(Debug, Clone)]
pub(crate) struct AscentOutcome {
    pub w: CMatrix,
    pub value: f64,
    pub iters: usize,
    pub converged: bool,
    pub trace: Vec<(usize, f64)>,
}

/// Riemannian gradient ascent with Armijo backtracking and polar retraction.
pub(crate) fn ascend(
    obj: &dyn Objective,
    w0: CMatrix,
    max_iters: usize,
    conv_tol: f64,
    cancel: Option<&AtomicBool>,
) -> AscentOutcome {
    let mut w = w0;
    let (mut f, mut g) = obj.value_grad_rows(&w);
    let mut trace = vec![(0, f)];
    let mut step = 0.5;
    let mut stall = 0;
    let mut converged = false;
    let mut iters = 0;
    while iters < max_iters {
        if cancel.is_some_and(|flag| flag.load(Ordering::Relaxed)) {
            break;
        }
        iters += 1;
        let sym = linalg::hermitian_part(&(w.adjoint() * &g));
        let xi = &g - &w * sym;
        let gn = xi.norm();
        if !(gn > 1e-12) {
            converged = true;
            break;
        }
        let dir = xi * c(1.0 / gn, 0.0);
        let mut t = step;
        let mut accepted = None;
        while t > 1e-12 {
            if let Ok(cand) = linalg::polar_factor(&(&w + &dir * c(t, 0.0))) {
                let fc = obj.value_rows(&cand);
                if fc >= f + 1e-4 * t * gn && fc > f {
                    accepted = Some((cand, fc));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((cand, fc)) = accepted else {
            converged = true;
            break;
        };
        let gain = fc - f;
        w = cand;
        let (fv, gv) = obj.value_grad_rows(&w);
        f = fv;
        g = gv;
        trace.push((iters, f));
        step = (2.0 * t).min(1.0);
        if gain < conv_tol {
            stall += 1;
            if stall >= 3 {
                converged = true;
                break;
            }
        } else {
            stall = 0;
        }
    }
    AscentOutcome { w, value: f, iters, converged, trace }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::tol;

    #[test]
    fn identity_block_params_give_computational_povm() {
        let d = 3;
        let mut params = vec![0.0; 2 * d * d];
        for i in 0..d {
            params[2 * (i * d + i)] = 1.0;
        }
        let p = parameterize_rank1(&params, d, d).unwrap();
        let comp = Povm::computational(d);
        for (e, f) in p.effects().iter().zip(comp.effects()) {
            assert!(linalg::max_abs_diff(e, f) < 1e-14);
        }
    }

    #[test]
    fn four_outcome_qubit_povm_is_complete_and_reproducible() {
        // raw matrix aimed at a tetrahedral-ish 4-outcome POVM
        let params: Vec<f64> = (0..16).map(|i| ((i * 7 % 11) as f64 - 5.0) / 3.0).collect();
        let a = parameterize_rank1(&params, 2, 4).unwrap();
        let b = parameterize_rank1(&params, 2, 4).unwrap();
        assert_eq!(a.len(), 4);
        assert!(a.completeness_defect() < tol::POVM);
        for (x, y) in a.effects().iter().zip(b.effects()) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn wrong_parameter_count_is_rejected() {
        assert!(matches!(parameterize_rank1(&[0.0; 5], 2, 2), Err(Error::Argument(_))));
    }

    #[test]
    fn rank_deficient_raw_matrix_is_perturbed() {
        // all-zero raw matrix is rank deficient; perturbation must still yield a valid POVM
        let p = parameterize_rank1(&[0.0; 8], 2, 2).unwrap();
        assert!(p.completeness_defect() < tol::POVM);
    }

    proptest! {
        #[test]
        fn random_params_give_valid_povms(params in proptest::collection::vec(-3.0f64..3.0, 2 * 3 * 5)) {
            let p = parameterize_rank1(&params, 3, 5).unwrap();
            prop_assert!(p.completeness_defect() < tol::POVM);
            prop_assert!(Povm::new(3, p.effects().to_vec()).is_ok());
        }
    }
}
