//! Instance generation and the individual checks behind each suite.

use rand::Rng;
use serde_json::{json, Value};

use super::{Suite, SuiteSpec, TrialOutcome};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::measurement::{self, conditional_operators, JointDistribution, Povm, Side};
use crate::measures::{self, CutSpec};
use crate::opt::{self, Certificate, OptConfig};
use crate::qstate::io::LoadedState;
use crate::qstate::{self, random_density_with, random_probs, random_pure_with, DensityMatrix, DimSpec, Party, PureState, SeparableState};

/// The object a trial checks.
#[derive(Debug, Clone)]
pub(crate) enum Instance {
    Bipartite(DensityMatrix),
    Pure(PureState),
    /// `{p_k, ρ_k ⊗ σ_k}`.
    Ensemble { probs: Vec<f64>, rhos: Vec<DensityMatrix>, sigmas: Vec<DensityMatrix> },
    Pair(DensityMatrix, DensityMatrix),
    Separable(SeparableState),
}

impl Instance {
    /// State-file form. Ensembles are stored as `Σ p_k |k⟩⟨k| ⊗ ρ_k ⊗ σ_k`, pairs as `ρ ⊗ σ`.
    pub(crate) fn to_state(&self) -> Result<LoadedState> {
        Ok(match self {
            Instance::Bipartite(r) => LoadedState::Mixed(r.clone()),
            Instance::Pure(p) => LoadedState::Pure(p.clone()),
            Instance::Ensemble { probs, rhos, sigmas } => {
                let k = probs.len();
                let (da, db) = (rhos[0].dim(), sigmas[0].dim());
                let mut m = CMatrix::zeros(k * da * db, k * da * db);
                for i in 0..k {
                    let mut proj = CMatrix::zeros(k, k);
                    proj[(i, i)] = linalg::ONE;
                    let block = linalg::kron(&proj, &linalg::kron(rhos[i].matrix(), sigmas[i].matrix()));
                    m += block * c(probs[i], 0.0);
                }
                LoadedState::Mixed(DensityMatrix::new(DimSpec::new(vec![k, da, db])?, m)?)
            }
            Instance::Pair(r, s) => {
                let spec = DimSpec::new(vec![r.dims()[0], r.dims()[1], s.dims()[0], s.dims()[1]])?
                    .with_parties(vec![Party::A, Party::B, Party::A, Party::B])?;
                LoadedState::Mixed(r.tensor(s)?.with_spec(spec)?)
            }
            Instance::Separable(s) => LoadedState::Mixed(s.state().clone()),
        })
    }

    pub(crate) fn meta(&self) -> Option<Value> {
        match self {
            Instance::Separable(s) => Some(json!({ "separable": s.witness() })),
            Instance::Ensemble { .. } => Some(json!({ "encoding": "classical-index ⊗ rho_k ⊗ sigma_k" })),
            Instance::Pair(..) => Some(json!({ "encoding": "rho ⊗ sigma on (A1, B1, A2, B2)" })),
            _ => None,
        }
    }

    pub(crate) fn from_state(suite: Suite, state: LoadedState, _meta: Option<&Value>) -> Result<Instance> {
        let wrong = |what: &str| Error::arg(format!("suite {suite} needs {what}"));
        match suite {
            Suite::Prop1 | Suite::Prop3 | Suite::TrineGap => {
                let rho = state.density()?;
                Ok(Instance::Bipartite(CutSpec::default().bipartite(&rho)?))
            }
            Suite::PureCollapse => match state {
                LoadedState::Pure(p) if p.dims().len() == 2 => Ok(Instance::Pure(p)),
                LoadedState::Pure(p) => Ok(Instance::Pure(PureState::new(
                    DimSpec::new(vec![
                        p.spec().subsystems_of(Party::A)?.iter().map(|&k| p.dims()[k]).product(),
                        p.spec().subsystems_of(Party::B)?.iter().map(|&k| p.dims()[k]).product(),
                    ])?,
                    grouped_amplitudes(&p)?,
                )?)),
                LoadedState::Mixed(_) => Err(wrong("a pure bipartite state")),
            },
            Suite::KoashiWinter | Suite::Prop4 => match state {
                LoadedState::Pure(p) => {
                    let p = if p.spec().has_explicit_parties() || p.dims().len() != 3 {
                        p
                    } else {
                        p.with_parties(vec![Party::A, Party::B, Party::C])?
                    };
                    Ok(Instance::Pure(p))
                }
                LoadedState::Mixed(_) => Err(wrong("a pure tripartite state")),
            },
            Suite::Prop5 => {
                let rho = state.density()?;
                let [k, da, db] = rho.dims() else { return Err(wrong("a state with dims [K, dA, dB]")) };
                let (k, da, db) = (*k, *da, *db);
                let blk = da * db;
                let mut probs = Vec::new();
                let mut rhos = Vec::new();
                let mut sigmas = Vec::new();
                for i in 0..k {
                    let sub = rho.matrix().view((i * blk, i * blk), (blk, blk)).into_owned();
                    let p = linalg::trace(&sub).re;
                    if p <= crate::tol::ZERO_PROB {
                        continue;
                    }
                    let norm = sub * c(1.0 / p, 0.0);
                    probs.push(p);
                    rhos.push(DensityMatrix::new(DimSpec::new(vec![da])?, linalg::partial_trace_raw(&norm, &[da, db], &[0]))?);
                    sigmas.push(DensityMatrix::new(DimSpec::new(vec![db])?, linalg::partial_trace_raw(&norm, &[da, db], &[1]))?);
                }
                Ok(Instance::Ensemble { probs, rhos, sigmas })
            }
            Suite::SmSuperadd => {
                let rho = state.density()?;
                if rho.dims().len() != 4 {
                    return Err(wrong("a product state with dims [dA1, dB1, dA2, dB2]"));
                }
                let strip = |r: DensityMatrix| -> Result<DensityMatrix> {
                    let spec = DimSpec::new(r.dims().to_vec())?;
                    r.with_spec(spec)
                };
                Ok(Instance::Pair(strip(rho.partial_trace(&[0, 1])?)?, strip(rho.partial_trace(&[2, 3])?)?))
            }
            Suite::Lemma2 => {
                let rho = CutSpec::default().bipartite(&state.density()?)?;
                Ok(Instance::Separable(SeparableState::declared(rho)))
            }
        }
    }
}

fn grouped_amplitudes(p: &PureState) -> Result<crate::linalg::CVector> {
    let a = p.spec().subsystems_of(Party::A)?;
    let b = p.spec().subsystems_of(Party::B)?;
    if a.len() + b.len() != p.dims().len() {
        return Err(Error::arg("pure state has subsystems outside parties A and B"));
    }
    let order: Vec<usize> = a.into_iter().chain(b).collect();
    Ok(linalg::permute_vector(p.amplitudes(), p.dims(), &order))
}

fn pick_dims<R: Rng + ?Sized>(dims: &[(usize, usize)], rng: &mut R) -> (usize, usize) {
    dims[rng.random_range(0..dims.len())]
}

fn random_mixed<R: Rng + ?Sized>(dims: Vec<usize>, rng: &mut R) -> Result<DensityMatrix> {
    let total: usize = dims.iter().product();
    let rank = rng.random_range(1..=total);
    random_density_with(DimSpec::new(dims)?, rank, rng)
}

pub(crate) fn generate<R: Rng + ?Sized>(suite: Suite, dims: &[(usize, usize)], rng: &mut R) -> Result<Instance> {
    let (da, db) = pick_dims(dims, rng);
    Ok(match suite {
        Suite::Prop1 => Instance::Bipartite(random_mixed(vec![da, db], rng)?),
        Suite::Prop3 => {
            let probs = random_probs(da, rng);
            let states = (0..da).map(|_| random_mixed(vec![db], rng)).collect::<Result<Vec<_>>>()?;
            Instance::Bipartite(qstate::make_cq_state(&probs, &states)?)
        }
        Suite::Prop4 | Suite::KoashiWinter => {
            let spec = DimSpec::new(vec![2, 2, 2])?.with_parties(vec![Party::A, Party::B, Party::C])?;
            Instance::Pure(random_pure_with(spec, rng)?)
        }
        Suite::Prop5 => {
            let k = rng.random_range(2..=4);
            let probs = random_probs(k, rng);
            let rhos = (0..k).map(|_| random_mixed(vec![da], rng)).collect::<Result<Vec<_>>>()?;
            let sigmas = (0..k).map(|_| random_mixed(vec![db], rng)).collect::<Result<Vec<_>>>()?;
            Instance::Ensemble { probs, rhos, sigmas }
        }
        Suite::Lemma2 => {
            let terms = rng.random_range(1..=4);
            Instance::Separable(qstate::random_separable_with(da, db, terms, rng)?)
        }
        Suite::SmSuperadd => {
            let (da2, db2) = pick_dims(dims, rng);
            Instance::Pair(random_mixed(vec![da, db], rng)?, random_mixed(vec![da2, db2], rng)?)
        }
        Suite::PureCollapse => Instance::Pure(random_pure_with(DimSpec::new(vec![da, db])?, rng)?),
        Suite::TrineGap => Instance::Bipartite(qstate::make_trine()),
    })
}

struct Outcome {
    values: Vec<(String, f64)>,
    checks: Vec<(String, f64)>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { values: Vec::new(), checks: Vec::new() }
    }

    fn value(&mut self, name: &str, v: f64) -> f64 {
        self.values.push((name.into(), v));
        v
    }

    /// Records `slack ≥ 0` as the condition for `name`.
    fn check(&mut self, name: &str, slack: f64) {
        self.checks.push((name.into(), slack));
    }

    fn finish(self) -> TrialOutcome {
        let margin = self.checks.iter().map(|(_, s)| *s).fold(f64::INFINITY, f64::min);
        TrialOutcome { values: self.values, margin, checks: self.checks }
    }
}

fn product_cert(r: &measures::MeasureReport) -> (Povm, Povm) {
    match &r.certificate {
        Some(Certificate::Product(a, b)) => (a.clone(), b.clone()),
        _ => unreachable!("symmetric correlation reports a product certificate"),
    }
}

fn single_cert(r: &measures::MeasureReport) -> Povm {
    match &r.certificate {
        Some(Certificate::Single(p)) => p.clone(),
        _ => unreachable!("holevo reports a single certificate"),
    }
}

fn seeded(cfg: &OptConfig, seeds: Vec<Povm>) -> OptConfig {
    OptConfig { seeds_in: seeds, ..cfg.clone() }
}

/// `C` and `C^h` with the qubit-side measured for a CQ state, each warm-started from the
/// other's certificate so that numerical shortfalls on one side cannot fake a gap.
fn cq_pair(rho: &DensityMatrix, cfg: &OptConfig) -> Result<(f64, f64)> {
    let ab = CutSpec::default();
    let c0 = measures::symmetric_correlation(rho, &ab, cfg, cfg)?;
    let (a0, b0) = product_cert(&c0);
    let ch = measures::holevo_correlation(rho, &ab.clone().measuring(Party::B), &seeded(cfg, vec![b0.clone()]))?;
    let comp = Povm::computational(rho.dims()[0]);
    let c1 = measures::symmetric_correlation(
        rho,
        &ab,
        &seeded(cfg, vec![comp, a0]),
        &seeded(cfg, vec![single_cert(&ch), b0]),
    )?;
    let mut ch_value = ch.value;
    if c1.value > ch_value {
        let (_, b1) = product_cert(&c1);
        let again = measures::holevo_correlation(rho, &ab.measuring(Party::B), &seeded(cfg, vec![b1, single_cert(&ch)]))?;
        ch_value = ch_value.max(again.value);
    }
    Ok((c1.value, ch_value))
}

fn entropy(m: &CMatrix) -> f64 {
    linalg::entropy_bits_unchecked(m)
}

pub(crate) fn check(suite: Suite, inst: &Instance, seed: u64, spec: &SuiteSpec) -> Result<TrialOutcome> {
    let tol = spec.tolerances;
    let cfg = spec.opt.clone().with_seed(seed);
    let ab = CutSpec::default();
    let mut out = Outcome::new();
    match (suite, inst) {
        (Suite::Prop1, Instance::Bipartite(rho)) => {
            let sc = measures::symmetric_correlation(rho, &ab, &cfg, &cfg)?;
            let (pa, pb) = product_cert(&sc);
            let c_val = out.value("C", sc.value);
            let ch_a = out.value("Ch_A", measures::holevo_correlation(rho, &ab.clone().measuring(Party::A), &seeded(&cfg, vec![pa]))?.value);
            let ch_b = out.value("Ch_B", measures::holevo_correlation(rho, &ab.clone().measuring(Party::B), &seeded(&cfg, vec![pb]))?.value);
            let sm = out.value("s_min", measures::s_min(rho, &ab)?.value);
            let mi = out.value("mutual_information", measures::mutual_information(rho, &ab)?.value);
            out.check("C <= Ch_A", ch_a + tol.chain - c_val);
            out.check("C <= Ch_B", ch_b + tol.chain - c_val);
            out.check("Ch_A <= s_min", sm + tol.num - ch_a);
            out.check("Ch_B <= s_min", sm + tol.num - ch_b);
            out.check("C >= 0", c_val + tol.num);
            out.check("Q^s >= 0", mi - c_val + tol.kw);
        }
        (Suite::Prop3 | Suite::TrineGap, Instance::Bipartite(rho)) => {
            let (c_val, ch_b) = cq_pair(rho, &cfg)?;
            out.value("C", c_val);
            out.value("Ch_B", ch_b);
            out.check("|C - Ch_B|", tol.kw - (c_val - ch_b).abs());
            if suite == Suite::Prop3 {
                let qd = out.value("Qd_A", measures::discord(rho, &ab.clone().measuring(Party::A), &cfg)?.value);
                out.check("Qd_A <= kw", tol.kw - qd);
                out.check("Qd_A >= -kw", qd + tol.kw);
            } else {
                let proj = opt::projective_variant(&cfg);
                let p = out.value("C_projective", measures::symmetric_correlation(rho, &ab, &proj, &proj)?.value);
                let (grid, _, _) = projective_grid_optimum(rho, 1.0)?;
                out.value("C_projective_grid", grid);
                let gap = out.value("gap", c_val - p.max(grid));
                out.check("gap >= trine_gap", gap - tol.trine_gap);
            }
        }
        (Suite::Prop4, Instance::Pure(psi)) => {
            let irr = measures::irreversibility_bound(psi, None, &cfg)?;
            let bound = out.value("bound", irr.bound.value);
            let dform = out.value("discord_form", irr.discord_form.value);
            out.value("s_min_AC", irr.s_min_ac);
            let bar = out.value("holevo_bar", irr.holevo_bar);
            out.check("bound >= 0", bound + tol.num);
            out.check("discord_form >= bound", dform - bound + tol.num);
            out.check("holevo_bar <= s_min_AC", irr.s_min_ac + tol.num - bar);
            let rho_ab = ab.restrict_pure(psi)?.bipartite(Party::A, Party::B)?;
            if rho_ab.dims() == [2, 2] {
                let ef = out.value("eof_AB", measures::eof_two_qubit(&rho_ab)?.value);
                let ic = out.value("coherent_information_AB", measures::coherent_information(&rho_ab, &ab)?.value);
                out.check("bound <= E^F - I^C", ef - ic + tol.kw - bound);
            }
        }
        (Suite::Prop5, Instance::Ensemble { probs, rhos, sigmas }) => {
            let (da, db) = (rhos[0].dim(), sigmas[0].dim());
            let avg_cond: f64 = probs.iter().zip(rhos).map(|(p, r)| p * entropy(r.matrix())).sum();
            let sigma_bar = probs.iter().zip(sigmas).fold(CMatrix::zeros(db, db), |acc, (p, s)| acc + s.matrix() * c(*p, 0.0));
            let joint = probs
                .iter()
                .zip(rhos.iter().zip(sigmas))
                .fold(CMatrix::zeros(da * db, da * db), |acc, (p, (r, s))| acc + linalg::kron(r.matrix(), s.matrix()) * c(*p, 0.0));
            let lhs = out.value("lhs", avg_cond + entropy(&sigma_bar));
            let rhs = out.value("rhs", entropy(&joint));
            out.check("lhs <= rhs", rhs + tol.num - lhs);
        }
        (Suite::Lemma2, Instance::Separable(sigma)) => {
            let probe = measures::regularization_probe_n2(sigma.state(), &ab.clone().measuring(Party::A), &cfg)?;
            let single = out.value("Ch", probe.diagnostics.get("single_copy").unwrap_or(f64::NAN));
            let half = out.value("Ch_two_copy_half", probe.value);
            out.check("|Ch(σ⊗σ)/2 - Ch(σ)|", tol.kw - (half - single).abs());
        }
        (Suite::SmSuperadd, Instance::Pair(r, s)) => {
            let joint = r.tensor(s)?;
            let cut = CutSpec::default().with_party_map(vec![Party::A, Party::B, Party::A, Party::B]);
            let j = out.value("s_min_joint", measures::s_min(&joint, &cut)?.value);
            let a = out.value("s_min_rho", measures::s_min(r, &ab)?.value);
            let b = out.value("s_min_sigma", measures::s_min(s, &ab)?.value);
            out.check("s_min(ρ⊗σ) >= s_min(ρ) + s_min(σ)", j - a - b + tol.num);
        }
        (Suite::PureCollapse, Instance::Pure(psi)) => {
            let rho = psi.to_density()?;
            let sa = out.value("S_A", psi.marginal_entropy(&[0])?);
            let sc = measures::symmetric_correlation(&rho, &ab, &cfg, &cfg)?;
            let (pa, pb) = product_cert(&sc);
            let items = [
                ("C", sc.value),
                ("Ch_A", measures::holevo_correlation(&rho, &ab.clone().measuring(Party::A), &seeded(&cfg, vec![pa]))?.value),
                ("Ch_B", measures::holevo_correlation(&rho, &ab.clone().measuring(Party::B), &seeded(&cfg, vec![pb]))?.value),
                ("s_min", measures::s_min(&rho, &ab)?.value),
            ];
            for (name, v) in items {
                out.value(name, v);
                out.check(&format!("|{name} - S_A|"), tol.kw - (v - sa).abs());
            }
        }
        (Suite::KoashiWinter, Instance::Pure(psi)) => {
            let kw = measures::koashi_winter_residual(psi, None, &cfg)?;
            out.value("eof_AB", kw.eof);
            out.value("holevo_AC", kw.holevo);
            out.value("S_A", kw.entropy_a);
            let r = out.value("residual", kw.residual);
            out.check("residual >= -kw", r + tol.kw);
            out.check("residual <= num", tol.num - r);
        }
        (suite, _) => return Err(Error::arg(format!("instance does not match suite {suite}"))),
    }
    Ok(out.finish())
}

fn labelled_indices(rho: &DensityMatrix, names: &[&str]) -> Result<Vec<usize>> {
    let labels = rho.spec().labels().ok_or_else(|| Error::arg("state has no subsystem labels"))?;
    names
        .iter()
        .map(|n| labels.iter().position(|l| l == n).ok_or_else(|| Error::arg(format!("no subsystem {n}"))))
        .collect()
}

/// Fixed instances a suite checks alongside its random trials.
pub(crate) fn fixed_checks(spec: &SuiteSpec) -> Result<Vec<(String, TrialOutcome)>> {
    let tol = spec.tolerances;
    let cfg = spec.opt.clone().with_seed(spec.seed);
    let mut fixed = Vec::new();
    match spec.suite {
        Suite::SmSuperadd => {
            // EPR pair (a2, b2) against the separable rest of the nine-qubit AB marginal
            let rho_ab = CutSpec::default().restrict_pure(&qstate::make_ghz_epr_phi())?;
            let cut = CutSpec::default();
            let epr = rho_ab.partial_trace(&labelled_indices(&rho_ab, &["a2", "b2"])?)?;
            let rest = rho_ab.partial_trace(&labelled_indices(&rho_ab, &["a1", "b1", "a3", "b3"])?)?;
            let mut out = Outcome::new();
            let j = out.value("s_min_joint", measures::s_min(&rho_ab, &cut)?.value);
            let a = out.value("s_min_epr", measures::s_min(&epr, &cut)?.value);
            let b = out.value("s_min_separable", measures::s_min(&rest, &cut)?.value);
            out.check("strict gap", j - a - b - tol.strict_gap);
            fixed.push(("ghz-epr-phi AB split".to_string(), out.finish()));
        }
        Suite::Prop4 => {
            for (name, psi, target) in [
                ("ghz-epr-psi", qstate::make_ghz_epr_psi(), 0.0),
                ("ghz-epr-phi", qstate::make_ghz_epr_phi(), 1.0),
            ] {
                let irr = measures::irreversibility_bound(&psi, None, &cfg)?;
                let mut out = Outcome::new();
                let b = out.value("bound", irr.bound.value);
                out.value("discord_form", irr.discord_form.value);
                out.value("expected", target);
                out.check("|bound - expected|", tol.kw - (b - target).abs());
                fixed.push((name.to_string(), out.finish()));
            }
        }
        _ => {}
    }
    Ok(fixed)
}

/// All partitions of `0..n` into blocks (restricted growth strings).
fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, n: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for b in 0..=max + 1 {
            if i == 0 && b > 0 {
                break;
            }
            cur.push(b);
            rec(i + 1, n, cur, if i == 0 { 0 } else { max.max(b) }, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, &mut Vec::new(), 0, &mut out);
    out
}

/// Exhaustive grid over projective strategies for a state on `n ⊗ 2`: every coarse-graining
/// of the computational basis on the first party against every qubit axis
/// `(θ, φ)` on a `step_deg` grid. Returns the best mutual information and its axis in degrees.
pub fn projective_grid_optimum(rho: &DensityMatrix, step_deg: f64) -> Result<(f64, f64, f64)> {
    let [n, 2] = rho.dims() else {
        return Err(Error::arg(format!("grid oracle needs dims [n, 2], got {:?}", rho.dims())));
    };
    let n = *n;
    if n > 5 {
        return Err(Error::arg("grid oracle supports at most 5 classical outcomes"));
    }
    if !(step_deg > 0.0) {
        return Err(Error::arg("grid step must be positive"));
    }
    let taus = conditional_operators(rho.matrix(), n, 2, Side::A, Povm::computational(n).effects());
    let partitions = set_partitions(n);
    let steps_t = (180.0 / step_deg).round() as usize;
    let steps_p = (360.0 / step_deg).round() as usize;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for it in 0..=steps_t {
        let theta = (it as f64 * step_deg).to_radians();
        for ip in 0..steps_p {
            let phi = (ip as f64 * step_deg).to_radians();
            let axis = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
            let plus = CMatrix::from_row_slice(
                2,
                2,
                &[c(0.5 * (1.0 + axis[2]), 0.0), c(0.5 * axis[0], -0.5 * axis[1]), c(0.5 * axis[0], 0.5 * axis[1]), c(0.5 * (1.0 - axis[2]), 0.0)],
            );
            let rows: Vec<[f64; 2]> = taus
                .iter()
                .map(|t| {
                    let p = measurement::trace_product(&plus, t).max(0.0);
                    [p, (linalg::trace(t).re - p).max(0.0)]
                })
                .collect();
            for part in &partitions {
                let blocks = part.iter().copied().max().unwrap_or(0) + 1;
                let mut table = vec![vec![0.0; 2]; blocks];
                for (i, &b) in part.iter().enumerate() {
                    table[b][0] += rows[i][0];
                    table[b][1] += rows[i][1];
                }
                let v = mutual_information_table(&table);
                if v > best.0 + 1e-15 {
                    best = (v, it as f64 * step_deg, ip as f64 * step_deg);
                }
            }
        }
    }
    Ok(best)
}

fn mutual_information_table(table: &[Vec<f64>]) -> f64 {
    JointDistribution::new(table.to_vec())
        .map(|jd| measurement::classical_mutual_information(&jd))
        .unwrap_or(0.0)
}
