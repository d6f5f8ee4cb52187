//! Multistart maximisation of measurement-dependent objectives over POVMs.
//!
//! Rank-1 and projective modes run Riemannian gradient ascent on the Stiefel manifold of
//! k×d matrices with orthonormal columns (the rows are the rank-1 effects). General mode
//! runs a derivative-free pattern search over [`parameterize_general`] and exists mainly
//! as a cross-check. Every reported value is re-evaluated on its certificate.

mod objective;
mod stiefel;

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::measurement::{self, conditional_operators, Povm, Side};
use crate::measures::BoundDirection;
use crate::qstate::{derive_seed, rng_from_seed, DensityMatrix};

use objective::{HolevoObjective, MutualInfoObjective, Objective};
pub use stiefel::{params_from_matrix, parameterize_rank1};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptMode {
    #[default]
    Rank1Stiefel,
    General,
    Projective,
}

impl std::str::FromStr for OptMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rank1-stiefel" | "rank1" => Ok(OptMode::Rank1Stiefel),
            "general" => Ok(OptMode::General),
            "projective" => Ok(OptMode::Projective),
            other => Err(Error::arg(format!("unknown optimizer mode {other:?}"))),
        }
    }
}

fn default_restarts() -> usize {
    24
}
fn default_max_iters() -> usize {
    2000
}
fn default_conv_tol() -> f64 {
    1e-9
}
fn default_sweeps() -> usize {
    6
}

/// Optimizer settings. `n_outcomes = None` means `d²` (or `d` in projective mode).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptConfig {
    #[serde(default)]
    pub n_outcomes: Option<usize>,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_conv_tol")]
    pub conv_tol: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: OptMode,
    /// Alternating sweeps per restart in product maximisation.
    #[serde(default = "default_sweeps")]
    pub sweeps: usize,
    /// Warm starts, tried before the random restarts.
    #[serde(skip)]
    pub seeds_in: Vec<Povm>,
    #[serde(skip)]
    pub cancel: Option<Arc<AtomicBool>>,
}

impl Default for OptConfig {
    fn default() -> Self {
        OptConfig {
            n_outcomes: None,
            restarts: default_restarts(),
            max_iters: default_max_iters(),
            conv_tol: default_conv_tol(),
            seed: 0,
            mode: OptMode::default(),
            sweeps: default_sweeps(),
            seeds_in: Vec::new(),
            cancel: None,
        }
    }
}

impl OptConfig {
    pub fn with_mode(mut self, mode: OptMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_outcomes(mut self, n: usize) -> Self {
        self.n_outcomes = Some(n);
        self
    }

    pub fn with_seeds(mut self, seeds: Vec<Povm>) -> Self {
        self.seeds_in = seeds;
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: OptConfig = serde_json::from_str(text).map_err(|e| Error::Parse(format!("optimizer config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_outcomes == Some(0) {
            return Err(Error::arg("n_outcomes must be at least 1"));
        }
        if !(self.conv_tol > 0.0) {
            return Err(Error::arg("conv_tol must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::arg("max_iters must be at least 1"));
        }
        Ok(())
    }

    /// Number of outcomes used on a `d`-dimensional side.
    pub fn outcomes_for(&self, d: usize) -> Result<usize> {
        self.validate()?;
        match (self.mode, self.n_outcomes) {
            (OptMode::Projective, Some(n)) if n != d => Err(Error::arg(format!(
                "projective mode needs n_outcomes = dim = {d}, got {n}"
            ))),
            (OptMode::Projective, _) => Ok(d),
            (OptMode::Rank1Stiefel, Some(n)) if n < d => Err(Error::arg(format!(
                "a rank-1 POVM on dimension {d} needs at least {d} outcomes, got {n}"
            ))),
            (_, Some(n)) => Ok(n),
            (_, None) => Ok(d * d),
        }
    }

    fn cancelled(&self) -> bool {
        self.cancel.as_ref().is_some_and(|f| f.load(Ordering::Relaxed))
    }
}

/// The measurement attaining a reported value.
#[derive(Debug, Clone)]
pub enum Certificate {
    Single(Povm),
    Product(Povm, Povm),
}

impl Certificate {
    pub fn povms(&self) -> Vec<&Povm> {
        match self {
            Certificate::Single(p) => vec![p],
            Certificate::Product(a, b) => vec![a, b],
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptResult {
    /// Objective re-evaluated on the certificate, in bits.
    pub value: f64,
    pub certificate: Certificate,
    pub bound_direction: BoundDirection,
    pub restarts_used: usize,
    pub converged: bool,
    pub iterations: usize,
    pub best_restart_trace: Vec<(usize, f64)>,
}

/// POVM `Π_i = S^{-1/2} B_i†B_i S^{-1/2}` with `S = Σ B_i†B_i`, perturbing `S` slightly if
/// it is singular.
pub fn parameterize_general(param_mats: &[CMatrix]) -> Result<Povm> {
    let d = match param_mats.first() {
        Some(m) => m.ncols(),
        None => return Err(Error::arg("at least one parameter matrix is required")),
    };
    if param_mats.iter().any(|m| m.nrows() != d || m.ncols() != d) {
        return Err(Error::arg(format!("parameter matrices must all be {d}x{d}")));
    }
    let mut grams: Vec<CMatrix> = param_mats.iter().map(|b| b.adjoint() * b).collect();
    let scale = grams.iter().map(|g| g.norm()).sum::<f64>().max(1.0);
    for attempt in 0..4 {
        let s = grams.iter().fold(CMatrix::zeros(d, d), |acc, g| acc + g);
        if let Ok(inv) = linalg::inv_sqrt_psd(&s, crate::tol::PSD * scale) {
            let effects = grams.iter().map(|g| linalg::hermitian_part(&(&inv * g * &inv))).collect();
            return Povm::new(d, effects);
        }
        if attempt == 3 {
            break;
        }
        // spread a small multiple of the identity over the effects
        let bump = linalg::identity(d) * c(1e-6 * scale * 10f64.powi(attempt) / grams.len() as f64, 0.0);
        for g in &mut grams {
            *g += &bump;
        }
    }
    Err(Error::Numerical("parameter matrices span a singular operator".into()))
}

fn general_params_to_mats(x: &[f64], d: usize, k: usize) -> Vec<CMatrix> {
    (0..k)
        .map(|i| CMatrix::from_fn(d, d, |a, b| {
            let base = 2 * (i * d * d + a * d + b);
            c(x[base], x[base + 1])
        }))
        .collect()
}

fn mats_to_general_params(mats: &[CMatrix]) -> Vec<f64> {
    let mut out = Vec::new();
    for m in mats {
        for a in 0..m.nrows() {
            for b in 0..m.ncols() {
                out.push(m[(a, b)].re);
                out.push(m[(a, b)].im);
            }
        }
    }
    out
}

/// A point of the search space for one side.
#[derive(Debug, Clone)]
enum Point {
    Rows(CMatrix),
    General(Vec<CMatrix>),
}

impl Point {
    fn effects(&self) -> Result<Vec<CMatrix>> {
        match self {
            Point::Rows(w) => Ok(rows_to_povm(w)?.effects().to_vec()),
            Point::General(m) => Ok(parameterize_general(m)?.effects().to_vec()),
        }
    }

    fn povm(&self) -> Result<Povm> {
        match self {
            Point::Rows(w) => rows_to_povm(w),
            Point::General(m) => parameterize_general(m),
        }
    }
}

/// Certificate POVM from Stiefel rows, dropping rows that are numerically zero.
fn rows_to_povm(w: &CMatrix) -> Result<Povm> {
    let keep: Vec<usize> = (0..w.nrows()).filter(|&i| w.row(i).norm_squared() > 1e-14).collect();
    let trimmed = CMatrix::from_fn(keep.len(), w.ncols(), |i, j| w[(keep[i], j)]);
    Povm::from_stiefel_rows(&trimmed)
}

/// Starting point for one side built from an existing POVM.
fn point_from_povm(povm: &Povm, mode: OptMode, k: usize) -> Option<Point> {
    match mode {
        OptMode::General => {
            let mut mats: Vec<CMatrix> = povm.effects().iter().map(linalg::sqrt_psd).collect();
            while mats.len() < k {
                mats.push(CMatrix::zeros(povm.dim(), povm.dim()));
            }
            Some(Point::General(mats))
        }
        OptMode::Rank1Stiefel => {
            let rows = povm.rank1_refinement();
            Some(Point::Rows(stiefel::padded_rows(&rows, k)))
        }
        OptMode::Projective => {
            let rows = povm.rank1_refinement();
            let d = povm.dim();
            if rows.nrows() != d {
                return None;
            }
            linalg::polar_factor(&rows).ok().map(Point::Rows)
        }
    }
}

fn random_point(mode: OptMode, d: usize, k: usize, seed: u64) -> Point {
    let mut rng = rng_from_seed(seed);
    match mode {
        OptMode::General => Point::General((0..k).map(|_| crate::qstate::ginibre(d, d, &mut rng)).collect()),
        _ => Point::Rows(stiefel::random_stiefel(k, d, &mut rng)),
    }
}

struct Local {
    point: Point,
    value: f64,
    iters: usize,
    converged: bool,
    trace: Vec<(usize, f64)>,
}

fn local_search(obj: &dyn Objective, start: Point, cfg: &OptConfig) -> Local {
    let cancel = cfg.cancel.as_deref();
    match start {
        Point::Rows(w) => {
            let out = stiefel::ascend(obj, w, cfg.max_iters, cfg.conv_tol, cancel);
            Local { point: Point::Rows(out.w), value: out.value, iters: out.iters, converged: out.converged, trace: out.trace }
        }
        Point::General(mats) => pattern_search(obj, mats, cfg),
    }
}

/// Compass search over the raw parameters of [`parameterize_general`].
fn pattern_search(obj: &dyn Objective, mats: Vec<CMatrix>, cfg: &OptConfig) -> Local {
    let d = obj.dim();
    let k = mats.len();
    let eval = |x: &[f64]| -> f64 {
        parameterize_general(&general_params_to_mats(x, d, k))
            .map(|p| obj.value_effects(p.effects()))
            .unwrap_or(f64::NEG_INFINITY)
    };
    let mut x = mats_to_general_params(&mats);
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
    let mut f = eval(&x);
    let mut trace = vec![(0, f)];
    let mut step = 0.25 * norm / (x.len() as f64).sqrt();
    let mut iters = 0;
    let mut stall = 0;
    let mut converged = false;
    while iters < cfg.max_iters && !cfg.cancelled() {
        iters += 1;
        let before = f;
        for i in 0..x.len() {
            for sign in [1.0, -1.0] {
                let old = x[i];
                x[i] = old + sign * step;
                let fc = eval(&x);
                if fc > f {
                    f = fc;
                    break;
                }
                x[i] = old;
            }
        }
        trace.push((iters, f));
        if f - before < cfg.conv_tol {
            step *= 0.5;
            stall += 1;
            if step < 1e-7 * norm || stall >= 40 {
                converged = true;
                break;
            }
        } else {
            stall = 0;
        }
    }
    Local { point: Point::General(general_params_to_mats(&x, d, k)), value: f, iters, converged, trace }
}

fn bipartite_dims(rho: &DensityMatrix) -> Result<(usize, usize)> {
    match rho.dims() {
        [da, db] => Ok((*da, *db)),
        dims => Err(Error::arg(format!("expected a bipartite state, got dims {dims:?}"))),
    }
}

/// Deterministic starts shared by both entry points: computational basis and the
/// eigenbasis of the measured marginal.
fn structured_starts(marginal: &CMatrix, mode: OptMode, k: usize) -> Vec<Point> {
    let d = marginal.nrows();
    let (_, vecs) = linalg::eigh(marginal);
    [Povm::computational(d), Povm::from_basis(&vecs).unwrap_or_else(|_| Povm::computational(d))]
        .iter()
        .filter_map(|p| point_from_povm(p, mode, k))
        .collect()
}

fn pick_best<T>(results: Vec<Result<(f64, T)>>) -> Result<(usize, T)> {
    let mut best: Option<(usize, f64, T)> = None;
    let mut first_err = None;
    for (idx, r) in results.into_iter().enumerate() {
        match r {
            Ok((v, t)) => {
                if best.as_ref().is_none_or(|(_, bv, _)| v > *bv) {
                    best = Some((idx, v, t));
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    match best {
        Some((idx, _, t)) => Ok((idx, t)),
        None => Err(first_err.unwrap_or_else(|| Error::Numerical("no optimizer start succeeded".into()))),
    }
}

/// Maximises the Holevo quantity of the ensemble left on the other side when `side` is
/// measured. The value is a certified lower bound on the one-sided classical correlation.
pub fn maximize_single(rho: &DensityMatrix, side: Side, cfg: &OptConfig) -> Result<OptResult> {
    let (da, db) = bipartite_dims(rho)?;
    let (dx, dy) = match side {
        Side::A => (da, db),
        Side::B => (db, da),
    };
    let k = cfg.outcomes_for(dx)?;
    let rho_xy = match side {
        Side::A => rho.matrix().clone(),
        Side::B => linalg::permute_operator(rho.matrix(), &[da, db], &[1, 0]),
    };
    let obj = HolevoObjective::new(rho_xy, dx, dy);
    let marginal = linalg::partial_trace_raw(obj_rho(&obj), &[dx, dy], &[0]);

    let mut starts: Vec<Point> = Vec::new();
    for s in &cfg.seeds_in {
        if s.dim() != dx {
            return Err(Error::DimensionMismatch(format!("warm-start POVM has dim {}, side has {dx}", s.dim())));
        }
        starts.extend(point_from_povm(s, cfg.mode, k));
    }
    starts.extend(structured_starts(&marginal, cfg.mode, k));
    starts.extend((0..cfg.restarts).map(|r| random_point(cfg.mode, dx, k, derive_seed(cfg.seed, r as u64))));
    let n_starts = starts.len();

    let results: Vec<Result<(f64, Local)>> = starts
        .into_par_iter()
        .map(|p| {
            let local = local_search(&obj, p, cfg);
            let povm = local.point.povm()?;
            let ens = measurement::measure_side(rho, side, &povm)?;
            Ok((measurement::holevo_quantity(&ens), local))
        })
        .collect();
    let (_, best) = pick_best(results)?;
    let povm = best.point.povm()?;
    let value = measurement::holevo_quantity(&measurement::measure_side(rho, side, &povm)?);
    Ok(OptResult {
        value,
        certificate: Certificate::Single(povm),
        bound_direction: BoundDirection::Lower,
        restarts_used: n_starts,
        converged: best.converged,
        iterations: best.iters,
        best_restart_trace: best.trace,
    })
}

fn obj_rho(obj: &HolevoObjective) -> &CMatrix {
    obj.rho()
}

struct ProductRun {
    a: Point,
    b: Point,
    iters: usize,
    converged: bool,
    trace: Vec<(usize, f64)>,
}

fn product_run(
    rho: &DensityMatrix,
    (da, db): (usize, usize),
    start: (Point, Point),
    cfg_a: &OptConfig,
    cfg_b: &OptConfig,
    sweeps: usize,
) -> Result<ProductRun> {
    let (mut a, mut b) = start;
    let mut iters = 0;
    let mut converged = true;
    let mut trace = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for sweep in 0..sweeps.max(1) {
        if cfg_a.cancelled() || cfg_b.cancelled() {
            break;
        }
        // B given A
        let taus = conditional_operators(rho.matrix(), da, db, Side::A, &a.effects()?);
        let obj = MutualInfoObjective::new(taus, db);
        let local = local_search(&obj, b, cfg_b);
        b = local.point;
        iters += local.iters;
        // A given B
        let taus = conditional_operators(rho.matrix(), da, db, Side::B, &b.effects()?);
        let obj = MutualInfoObjective::new(taus, da);
        let local = local_search(&obj, a, cfg_a);
        a = local.point;
        iters += local.iters;
        converged = local.converged;
        trace.push((sweep + 1, local.value));
        if local.value - last < cfg_a.conv_tol.min(cfg_b.conv_tol) {
            break;
        }
        last = local.value;
    }
    Ok(ProductRun { a, b, iters, converged, trace })
}

/// Maximises the classical mutual information of product measurements by alternating
/// between the two sides, `cfg_a.sweeps` times per start.
pub fn maximize_product(rho: &DensityMatrix, cfg_a: &OptConfig, cfg_b: &OptConfig) -> Result<OptResult> {
    let (da, db) = bipartite_dims(rho)?;
    let ka = cfg_a.outcomes_for(da)?;
    let kb = cfg_b.outcomes_for(db)?;
    let rho_a = linalg::partial_trace_raw(rho.matrix(), &[da, db], &[0]);
    let rho_b = linalg::partial_trace_raw(rho.matrix(), &[da, db], &[1]);

    let mut starts: Vec<(Point, Point)> = Vec::new();
    let n_seeds = cfg_a.seeds_in.len().max(cfg_b.seeds_in.len());
    for i in 0..n_seeds {
        let pa = match cfg_a.seeds_in.get(i) {
            Some(p) => point_from_povm(p, cfg_a.mode, ka),
            None => Some(random_point(cfg_a.mode, da, ka, derive_seed(cfg_a.seed ^ 0x5eed, i as u64))),
        };
        let pb = match cfg_b.seeds_in.get(i) {
            Some(p) => point_from_povm(p, cfg_b.mode, kb),
            None => Some(random_point(cfg_b.mode, db, kb, derive_seed(cfg_b.seed ^ 0x5eed, i as u64))),
        };
        if let (Some(pa), Some(pb)) = (pa, pb) {
            starts.push((pa, pb));
        }
    }
    let sa = structured_starts(&rho_a, cfg_a.mode, ka);
    let sb = structured_starts(&rho_b, cfg_b.mode, kb);
    starts.extend(sa.into_iter().zip(sb));
    let restarts = cfg_a.restarts.max(cfg_b.restarts);
    for r in 0..restarts {
        let seed = derive_seed(cfg_a.seed, r as u64);
        starts.push((
            random_point(cfg_a.mode, da, ka, seed),
            random_point(cfg_b.mode, db, kb, derive_seed(seed, 1)),
        ));
    }
    let n_starts = starts.len();
    let sweeps = cfg_a.sweeps;

    let results: Vec<Result<(f64, ProductRun)>> = starts
        .into_par_iter()
        .map(|s| {
            let run = product_run(rho, (da, db), s, cfg_a, cfg_b, sweeps)?;
            let jd = measurement::joint_distribution(rho, &run.a.povm()?, &run.b.povm()?)?;
            Ok((measurement::classical_mutual_information(&jd), run))
        })
        .collect();
    let (_, best) = pick_best(results)?;
    let (pa, pb) = (best.a.povm()?, best.b.povm()?);
    let value = measurement::classical_mutual_information(&measurement::joint_distribution(rho, &pa, &pb)?);
    Ok(OptResult {
        value,
        certificate: Certificate::Product(pa, pb),
        bound_direction: BoundDirection::Lower,
        restarts_used: n_starts,
        converged: best.converged,
        iterations: best.iters,
        best_restart_trace: best.trace,
    })
}

/// Maximises over projective measurements only, on a quick config derived from `cfg`.
pub fn projective_variant(cfg: &OptConfig) -> OptConfig {
    let mut out = cfg.clone();
    out.mode = OptMode::Projective;
    out.n_outcomes = None;
    out
}
