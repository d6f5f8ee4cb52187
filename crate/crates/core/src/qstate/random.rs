//! Seeded samplers: Ginibre mixed states, Gaussian pure states, random separable mixtures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector, C64};

use super::{DensityMatrix, DimSpec, Party, PureState, SeparableState};

/// Deterministic RNG for a seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finaliser; derives independent child seeds from `(master, index)`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Uniformly distributed point of the probability simplex.
pub fn random_probs<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

pub fn random_density_with<R: Rng + ?Sized>(spec: DimSpec, rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    let n = spec.total();
    if rank == 0 || rank > n {
        return Err(Error::arg(format!("rank {rank} must lie in 1..={n}")));
    }
    let g = ginibre(n, rank, rng);
    DensityMatrix::from_unnormalized(spec, &g * g.adjoint())
}

pub fn random_pure_with<R: Rng + ?Sized>(spec: DimSpec, rng: &mut R) -> Result<PureState> {
    let v = CVector::from_fn(spec.total(), |_, _| complex_gaussian(rng));
    PureState::normalized(spec, v)
}

/// Ginibre-distributed density matrix of the given rank.
pub fn random_density(spec: DimSpec, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_with(spec, rank, &mut rng_from_seed(seed))
}

/// Haar-random pure state.
pub fn random_pure(spec: DimSpec, seed: u64) -> Result<PureState> {
    random_pure_with(spec, &mut rng_from_seed(seed))
}

pub fn random_separable_with<R: Rng + ?Sized>(
    dim_a: usize,
    dim_b: usize,
    terms: usize,
    rng: &mut R,
) -> Result<SeparableState> {
    if terms == 0 {
        return Err(Error::arg("a separable mixture needs at least one term"));
    }
    let q = random_probs(terms, rng);
    let mut m = CMatrix::zeros(dim_a * dim_b, dim_a * dim_b);
    for &qk in &q {
        let ra = rng.random_range(1..=dim_a);
        let rb = rng.random_range(1..=dim_b);
        let a = random_density_with(DimSpec::new(vec![dim_a])?, ra, rng)?;
        let b = random_density_with(DimSpec::new(vec![dim_b])?, rb, rng)?;
        m += a.matrix().kronecker(b.matrix()) * c(qk, 0.0);
    }
    let spec = DimSpec::new(vec![dim_a, dim_b])?.with_parties(vec![Party::A, Party::B])?;
    Ok(SeparableState::from_decomposition(DensityMatrix::from_unnormalized(spec, m)?))
}

/// `Σ_k q_k ρ_k^A ⊗ σ_k^B` with random weights and random local states of random rank.
pub fn random_separable(dim_a: usize, dim_b: usize, terms: usize, seed: u64) -> Result<SeparableState> {
    random_separable_with(dim_a, dim_b, terms, &mut rng_from_seed(seed))
}
