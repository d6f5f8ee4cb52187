//! Measurement-dependent objectives with gradients with respect to rank-1 effects.
//!
//! A rank-1 POVM with `k` outcomes on a `d`-dimensional system is stored as a k×d matrix `W`
//! whose rows `w_i` give the effects `E_i = w_i† w_i`; completeness is `W†W = I`.
//! Gradients are returned in the same shape, row `i` being the ascent direction for `w_i`
//! under the real inner product `Re tr(X† Y)`.

use crate::linalg::{self, c, CMatrix, C64};
use crate::measurement::trace_product;

/// Floor applied to eigenvalues inside matrix logarithms.
const LOG_FLOOR: f64 = 1e-300;

pub(crate) trait Objective: Sync {
    /// Dimension of the measured system.
    fn dim(&self) -> usize;
    fn value_rows(&self, w: &CMatrix) -> f64;
    fn value_grad_rows(&self, w: &CMatrix) -> (f64, CMatrix);
    /// Value for an arbitrary (not necessarily rank-1) list of effects.
    fn value_effects(&self, effects: &[CMatrix]) -> f64;
}

/// `-Σ λ log2 λ` over the spectrum of an unnormalised PSD operator.
fn spectral_entropy(m: &CMatrix) -> f64 {
    linalg::eigvalsh(m)
        .iter()
        .filter(|&&x| x > crate::tol::CLIP * 1e-3)
        .map(|&x| -x * x.log2())
        .sum()
}

/// Holevo quantity of the ensemble induced on `Y` by measuring `X` of a state stored
/// measured-factor-first as `ρ_{XY}`.
pub(crate) struct HolevoObjective {
    rho: CMatrix,
    dx: usize,
    dy: usize,
    s_y: f64,
}

impl HolevoObjective {
    pub(crate) fn new(rho_xy: CMatrix, dx: usize, dy: usize) -> Self {
        let rho_y = linalg::partial_trace_raw(&rho_xy, &[dx, dy], &[1]);
        let s_y = linalg::entropy_bits_unchecked(&rho_y);
        HolevoObjective { rho: rho_xy, dx, dy, s_y }
    }

    pub(crate) fn rho(&self) -> &CMatrix {
        &self.rho
    }

    /// `R[y, (x', y')] = Σ_x w[x] ρ[(x, y), (x', y')]` for one row.
    fn contract_row(&self, w: &CMatrix, i: usize) -> CMatrix {
        let (dx, dy) = (self.dx, self.dy);
        let mut r = CMatrix::zeros(dy, dx * dy);
        for x in 0..dx {
            let wx = w[(i, x)];
            if wx == linalg::ZERO {
                continue;
            }
            for y in 0..dy {
                for col in 0..dx * dy {
                    r[(y, col)] += wx * self.rho[(x * dy + y, col)];
                }
            }
        }
        r
    }

    fn conditional(&self, r: &CMatrix, w: &CMatrix, i: usize) -> CMatrix {
        let (dx, dy) = (self.dx, self.dy);
        let mut m = CMatrix::zeros(dy, dy);
        for y in 0..dy {
            for yp in 0..dy {
                let mut acc = linalg::ZERO;
                for x in 0..dx {
                    acc += r[(y, x * dy + yp)] * w[(i, x)].conj();
                }
                m[(y, yp)] = acc;
            }
        }
        linalg::hermitian_part(&m)
    }

    /// `-p S(M/p)` term for an unnormalised conditional operator.
    fn term(m: &CMatrix) -> f64 {
        let p = linalg::trace(m).re;
        if p <= 0.0 {
            return 0.0;
        }
        spectral_entropy(m) + p * p.log2()
    }
}

impl Objective for HolevoObjective {
    fn dim(&self) -> usize {
        self.dx
    }

    fn value_rows(&self, w: &CMatrix) -> f64 {
        let mut acc = self.s_y;
        for i in 0..w.nrows() {
            let r = self.contract_row(w, i);
            acc -= Self::term(&self.conditional(&r, w, i));
        }
        acc
    }

    fn value_grad_rows(&self, w: &CMatrix) -> (f64, CMatrix) {
        let (dx, dy) = (self.dx, self.dy);
        let mut value = self.s_y;
        let mut grad = CMatrix::zeros(w.nrows(), dx);
        for i in 0..w.nrows() {
            let r = self.contract_row(w, i);
            let m = self.conditional(&r, w, i);
            let p = linalg::trace(&m).re;
            value -= Self::term(&m);
            if p <= 0.0 {
                continue;
            }
            let lp = p.log2();
            // ∂J/∂M = log2 M − log2 p
            let d = linalg::hermitian_fn(&m, |l| l.max(LOG_FLOOR).log2() - lp);
            for xp in 0..dx {
                let mut acc = linalg::ZERO;
                for y in 0..dy {
                    for yp in 0..dy {
                        acc += d[(y, yp)] * r[(yp, xp * dy + y)];
                    }
                }
                grad[(i, xp)] = acc * c(2.0, 0.0);
            }
        }
        (value, grad)
    }

    fn value_effects(&self, effects: &[CMatrix]) -> f64 {
        let ops = crate::measurement::conditional_operators(&self.rho, self.dx, self.dy, crate::measurement::Side::A, effects);
        self.s_y - ops.iter().map(|m| Self::term(&linalg::hermitian_part(m))).sum::<f64>()
    }
}

/// Classical mutual information of a product measurement, as a function of the effects on
/// one side with the other side's outcomes summarised by their unnormalised conditional
/// operators `τ_i` on the optimised side.
pub(crate) struct MutualInfoObjective {
    taus: Vec<CMatrix>,
    h_rows: f64,
    d: usize,
}

impl MutualInfoObjective {
    pub(crate) fn new(taus: Vec<CMatrix>, d: usize) -> Self {
        let row_probs: Vec<f64> = taus.iter().map(|t| linalg::trace(t).re.max(0.0)).collect();
        let h_rows = linalg::shannon_bits(&row_probs);
        MutualInfoObjective { taus, h_rows, d }
    }

    fn mi_from_columns(&self, cols: &[Vec<f64>]) -> f64 {
        // cols[j][i] = p_ij
        let mut acc = self.h_rows;
        for col in cols {
            let q: f64 = col.iter().sum();
            if q <= 0.0 {
                continue;
            }
            acc -= q * q.log2();
            for &p in col {
                if p > 0.0 {
                    acc -= -p * p.log2();
                }
            }
        }
        acc
    }

    fn column(&self, w: &CMatrix, j: usize) -> (Vec<C64>, Vec<Vec<C64>>) {
        // returns (p_ij as complex scalars, w_j τ_i rows)
        let mut ps = Vec::with_capacity(self.taus.len());
        let mut rows = Vec::with_capacity(self.taus.len());
        for tau in &self.taus {
            let mut wt = vec![linalg::ZERO; self.d];
            for b in 0..self.d {
                let mut acc = linalg::ZERO;
                for a in 0..self.d {
                    acc += w[(j, a)] * tau[(a, b)];
                }
                wt[b] = acc;
            }
            let p: C64 = (0..self.d).map(|b| wt[b] * w[(j, b)].conj()).sum();
            ps.push(p);
            rows.push(wt);
        }
        (ps, rows)
    }

}

impl Objective for MutualInfoObjective {
    fn dim(&self) -> usize {
        self.d
    }

    fn value_rows(&self, w: &CMatrix) -> f64 {
        let cols: Vec<Vec<f64>> = (0..w.nrows())
            .map(|j| self.column(w, j).0.iter().map(|p| p.re.max(0.0)).collect())
            .collect();
        self.mi_from_columns(&cols)
    }

    fn value_grad_rows(&self, w: &CMatrix) -> (f64, CMatrix) {
        let mut cols = Vec::with_capacity(w.nrows());
        let mut grad = CMatrix::zeros(w.nrows(), self.d);
        for j in 0..w.nrows() {
            let (ps, rows) = self.column(w, j);
            let col: Vec<f64> = ps.iter().map(|p| p.re.max(0.0)).collect();
            let q: f64 = col.iter().sum();
            for (i, row) in rows.iter().enumerate() {
                let coef = (col[i].max(LOG_FLOOR) / q.max(LOG_FLOOR)).log2() * 2.0;
                for b in 0..self.d {
                    grad[(j, b)] += row[b] * coef;
                }
            }
            cols.push(col);
        }
        (self.mi_from_columns(&cols), grad)
    }

    fn value_effects(&self, effects: &[CMatrix]) -> f64 {
        let cols: Vec<Vec<f64>> = effects
            .iter()
            .map(|f| self.taus.iter().map(|t| trace_product(f, t).max(0.0)).collect())
            .collect();
        self.mi_from_columns(&cols)
    }
}
