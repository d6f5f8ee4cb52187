//! Product structure of multi-subsystem states and the block-wise Holevo maximisation it
//! enables.

use crate::error::Result;
use crate::linalg;
use crate::measurement::{self, Povm, Side};
use crate::opt::{self, OptConfig};
use crate::qstate::{DensityMatrix, Party, SeparableState};

/// Entrywise tolerance for recognising `ρ = ρ_S ⊗ ρ_rest`.
const PRODUCT_TOL: f64 = 1e-10;

fn is_product_split(rho: &DensityMatrix, part: &[usize], rest: &[usize]) -> Result<bool> {
    let a = rho.partial_trace(part)?;
    let b = rho.partial_trace(rest)?;
    let order: Vec<usize> = part.iter().chain(rest).copied().collect();
    let permuted = rho.permute(&order)?;
    Ok(linalg::max_abs_diff(permuted.matrix(), &linalg::kron(a.matrix(), b.matrix())) < PRODUCT_TOL)
}

/// Finest partition of the subsystems into groups across which `rho` is a tensor product.
/// Each block is sorted; blocks are ordered by their smallest subsystem.
pub fn product_blocks(rho: &DensityMatrix) -> Result<Vec<Vec<usize>>> {
    let mut blocks = Vec::new();
    let mut remaining: Vec<usize> = (0..rho.spec().len()).collect();
    let mut current = rho.clone();
    while !remaining.is_empty() {
        let n = remaining.len();
        let mut found: Option<Vec<usize>> = None;
        // subsets of positions 1..n, smallest first; position 0 always belongs to the block
        let mut masks: Vec<u32> = (0..(1u32 << (n - 1))).collect();
        masks.sort_by_key(|m| (m.count_ones(), *m));
        for mask in masks {
            let part: Vec<usize> = std::iter::once(0)
                .chain((1..n).filter(|k| mask & (1 << (k - 1)) != 0))
                .collect();
            if part.len() == n {
                found = Some(part);
                break;
            }
            let rest: Vec<usize> = (0..n).filter(|k| !part.contains(k)).collect();
            if is_product_split(&current, &part, &rest)? {
                found = Some(part);
                break;
            }
        }
        let part = found.expect("the full set always closes the loop");
        blocks.push(part.iter().map(|&k| remaining[k]).collect());
        let rest: Vec<usize> = (0..n).filter(|k| !part.contains(k)).collect();
        if rest.is_empty() {
            break;
        }
        current = current.partial_trace(&rest)?;
        remaining = rest.iter().map(|&k| remaining[k]).collect();
    }
    Ok(blocks)
}

/// Structure of one product block of a two-party state.
#[derive(Debug, Clone)]
pub struct BlockInfo {
    pub subsystems: Vec<usize>,
    pub labels: Vec<String>,
    pub measured_dim: usize,
    pub other_dim: usize,
    pub pure: bool,
    /// Separable with a certificate (one-party block, or PPT in dimension ≤ 6).
    pub separable: bool,
    /// Certified Holevo value of the block.
    pub value: f64,
    /// Exact value when the block is pure (entropy of either side).
    pub exact: Option<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct BlockwiseHolevo {
    pub value: f64,
    pub certificate: Povm,
    pub blocks: Vec<BlockInfo>,
    pub restarts: usize,
    pub iters: usize,
    pub converged: bool,
}

impl BlockwiseHolevo {
    /// `Σ` of exact pure-block values and certified separable-block values, available when
    /// every block is pure or separable; additivity then makes it the regularised value.
    pub fn additive_value(&self) -> Option<f64> {
        self.blocks
            .iter()
            .map(|b| match (b.exact, b.separable) {
                (Some(v), _) => Some(v),
                (None, true) => Some(b.value),
                _ => None,
            })
            .sum()
    }
}

/// Maximises the Holevo quantity of `rho` (subsystems belonging to exactly two parties)
/// with `measured` measured, one product block at a time.
pub(crate) fn blockwise_holevo(
    rho: &DensityMatrix,
    measured: Party,
    other: Party,
    cfg: &OptConfig,
) -> Result<BlockwiseHolevo> {
    let parties = rho.spec().parties().unwrap_or_default();
    let blocks = product_blocks(rho)?;
    let mut infos = Vec::new();
    let mut factors: Vec<Povm> = Vec::new();
    let mut factor_subs: Vec<usize> = Vec::new();
    let (mut restarts, mut iters, mut converged) = (0, 0, true);
    for block in &blocks {
        let m: Vec<usize> = block.iter().copied().filter(|&k| parties[k] == measured).collect();
        let o: Vec<usize> = block.iter().copied().filter(|&k| parties[k] == other).collect();
        let dm: usize = m.iter().map(|&k| rho.dims()[k]).product();
        let dother: usize = o.iter().map(|&k| rho.dims()[k]).product();
        let local = rho.partial_trace(block)?;
        let pure = local.entropy()? < 1e-10;
        let labels = block
            .iter()
            .map(|&k| rho.spec().labels().map_or_else(|| format!("#{k}"), |l| l[k].clone()))
            .collect();
        let mut info = BlockInfo {
            subsystems: block.clone(),
            labels,
            measured_dim: dm,
            other_dim: dother,
            pure,
            separable: m.is_empty() || o.is_empty(),
            value: 0.0,
            exact: None,
        };
        if m.is_empty() {
            infos.push(info);
            continue;
        }
        factor_subs.extend(&m);
        if o.is_empty() {
            info.exact = Some(0.0);
            factors.push(Povm::new(dm, vec![linalg::identity(dm)])?);
            infos.push(info);
            continue;
        }
        let bip = local.bipartite(measured, other)?;
        if !pure && bip.dim() <= 6 {
            info.separable = SeparableState::ppt_certified(&bip).is_ok();
        }
        if pure {
            info.exact = Some(bip.party_marginal(measured)?.entropy()?);
        }
        let res = opt::maximize_single(&bip, Side::A, &OptConfig { seeds_in: Vec::new(), ..cfg.clone() })?;
        restarts += res.restarts_used;
        iters += res.iterations;
        converged &= res.converged;
        info.value = res.value;
        let opt::Certificate::Single(p) = res.certificate else { unreachable!("single-side maximisation") };
        factors.push(p);
        infos.push(info);
    }
    let measured_subs = rho.spec().subsystems_of(measured)?;
    let certificate = if factors.is_empty() {
        let d: usize = measured_subs.iter().map(|&k| rho.dims()[k]).product();
        Povm::new(d, vec![linalg::identity(d)])?
    } else {
        let joint = factors[1..].iter().fold(factors[0].clone(), |acc, p| acc.tensor(p));
        let dims: Vec<usize> = factor_subs.iter().map(|&k| rho.dims()[k]).collect();
        let order: Vec<usize> = measured_subs
            .iter()
            .map(|k| factor_subs.iter().position(|x| x == k).expect("measured subsystem in some block"))
            .collect();
        joint.permute_factors(&dims, &order)?
    };
    let bip = rho.bipartite(measured, other)?;
    let value = measurement::holevo_quantity(&measurement::measure_side(&bip, Side::A, &certificate)?);
    Ok(BlockwiseHolevo { value, certificate, blocks: infos, restarts, iters, converged })
}
