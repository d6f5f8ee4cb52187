//! Dense complex matrix helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Eigenvalues (ascending) of a Hermitian matrix. Only the lower triangle is trusted,
/// so callers symmetrise first when the input may carry rounding noise.
pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    let n = m.nrows();
    match n {
        0 => Vec::new(),
        1 => vec![m[(0, 0)].re],
        2 => {
            let (a, d) = (m[(0, 0)].re, m[(1, 1)].re);
            let b = m[(1, 0)];
            let mean = 0.5 * (a + d);
            let r = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
            vec![mean - r, mean + r]
        }
        _ => {
            let mut v: Vec<f64> = SymmetricEigen::new(hermitian_part(m)).eigenvalues.iter().copied().collect();
            v.sort_by(|x, y| x.total_cmp(y));
            v
        }
    }
}

/// Eigen-decomposition of a Hermitian matrix: `(eigenvalues, eigenvectors as columns)`.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Shannon entropy in bits of a list of weights; nonpositive entries contribute zero.
pub fn shannon_bits<'a>(p: impl IntoIterator<Item = &'a f64>) -> f64 {
    p.into_iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum()
}

/// Entropy in bits of the spectrum of a Hermitian PSD matrix, clipping tiny and
/// slightly negative eigenvalues to zero. No validity check.
pub fn entropy_bits_unchecked(m: &CMatrix) -> f64 {
    let ev = eigvalsh(m);
    ev.iter()
        .filter(|&&x| x > crate::tol::CLIP)
        .map(|&x| -x * x.log2())
        .sum()
}

/// Applies `f` to the spectrum of a Hermitian matrix.
pub fn hermitian_fn(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = eigh(m);
    let n = m.nrows();
    let mut out = CMatrix::zeros(n, n);
    for (k, &lam) in vals.iter().enumerate() {
        let fl = f(lam);
        if fl == 0.0 {
            continue;
        }
        let col = vecs.column(k);
        for i in 0..n {
            let ci = col[i] * fl;
            for j in 0..n {
                out[(i, j)] += ci * col[j].conj();
            }
        }
    }
    out
}

/// Polar factor `X (X†X)^{-1/2}` of a tall (k×d, k ≥ d) matrix, i.e. the closest matrix
/// with orthonormal columns. Fails when X is numerically rank deficient.
pub fn polar_factor(x: &CMatrix) -> Result<CMatrix> {
    let gram = x.adjoint() * x;
    let (vals, _) = eigh(&gram);
    let max = vals.iter().copied().fold(0.0, f64::max);
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    if !(max > 0.0) || min <= 1e-24 * max.max(1.0) || min <= 1e-28 {
        return Err(Error::Numerical(format!(
            "rank-deficient input to polar factor (eigenvalues {min:e}..{max:e})"
        )));
    }
    let inv_sqrt = hermitian_fn(&gram, |l| 1.0 / l.sqrt());
    Ok(x * inv_sqrt)
}

/// Inverse square root of a PSD matrix; fails if it is singular within `tol`.
pub fn inv_sqrt_psd(m: &CMatrix, tol: f64) -> Result<CMatrix> {
    let vals = eigvalsh(m);
    if vals.first().copied().unwrap_or(0.0) <= tol {
        return Err(Error::Numerical("singular positive operator".into()));
    }
    Ok(hermitian_fn(m, |l| 1.0 / l.sqrt()))
}

pub fn sqrt_psd(m: &CMatrix) -> CMatrix {
    hermitian_fn(m, |l| if l > 0.0 { l.sqrt() } else { 0.0 })
}

/// Outer product `v v†`.
pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

/// Mixed-radix digits of `index` for the given dimensions (first dimension most significant).
pub fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

pub fn undigits(digs: &[usize], dims: &[usize]) -> usize {
    digs.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

/// Index permutation for reordering tensor factors: entry `new` gives the old flat index
/// of the basis vector whose factors appear in `order` (old subsystem positions).
pub fn permutation_map(dims: &[usize], order: &[usize]) -> Vec<usize> {
    let new_dims: Vec<usize> = order.iter().map(|&k| dims[k]).collect();
    let total: usize = dims.iter().product();
    (0..total)
        .map(|new| {
            let nd = digits(new, &new_dims);
            let mut od = vec![0; dims.len()];
            for (pos, &k) in order.iter().enumerate() {
                od[k] = nd[pos];
            }
            undigits(&od, dims)
        })
        .collect()
}

/// Reorders the tensor factors of an operator. `order[i]` is the old position of new factor `i`.
pub fn permute_operator(m: &CMatrix, dims: &[usize], order: &[usize]) -> CMatrix {
    let map = permutation_map(dims, order);
    let n = map.len();
    CMatrix::from_fn(n, n, |i, j| m[(map[i], map[j])])
}

pub fn permute_vector(v: &CVector, dims: &[usize], order: &[usize]) -> CVector {
    let map = permutation_map(dims, order);
    CVector::from_fn(map.len(), |i, _| v[map[i]])
}

/// Partial trace keeping the listed subsystems (in their original relative order).
pub fn partial_trace_raw(m: &CMatrix, dims: &[usize], keep: &[usize]) -> CMatrix {
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep_sorted.contains(k)).collect();
    let kd: usize = keep_sorted.iter().map(|&k| dims[k]).product();
    let td: usize = traced.iter().map(|&k| dims[k]).product();
    let order: Vec<usize> = keep_sorted.iter().chain(traced.iter()).copied().collect();
    let map = permutation_map(dims, &order);
    let mut out = CMatrix::zeros(kd, kd);
    for i in 0..kd {
        for j in 0..kd {
            let mut acc = ZERO;
            for t in 0..td {
                acc += m[(map[i * td + t], map[j * td + t])];
            }
            out[(i, j)] = acc;
        }
    }
    out
}
