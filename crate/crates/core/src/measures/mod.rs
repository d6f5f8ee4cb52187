//! Correlation measures. Every value carries a [`BoundDirection`]: closed-form quantities
//! are exact, optimised classical correlations are certified lower bounds and the discords
//! derived from them are upper bounds.

mod factor;

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::measurement::{self, Povm, Side};
use crate::opt::{self, Certificate, OptConfig, OptResult};
use crate::qstate::{DensityMatrix, DimSpec, Party, PureState, SeparableState};

pub use factor::{product_blocks, BlockInfo};

/// Largest ambient dimension of `ρ⊗ρ` accepted by [`regularization_probe_n2`].
pub const PROBE_MAX_DIM: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundDirection {
    Lower,
    Upper,
    Exact,
}

impl fmt::Display for BoundDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundDirection::Lower => "lower",
            BoundDirection::Upper => "upper",
            BoundDirection::Exact => "exact",
        })
    }
}

/// Which party of a cut is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasuredSide {
    A,
    B,
    C,
    #[serde(rename = "both")]
    Both,
    #[serde(rename = "none")]
    None,
}

impl MeasuredSide {
    pub fn party(self) -> Option<Party> {
        match self {
            MeasuredSide::A => Some(Party::A),
            MeasuredSide::B => Some(Party::B),
            MeasuredSide::C => Some(Party::C),
            _ => None,
        }
    }
}

impl From<Party> for MeasuredSide {
    fn from(p: Party) -> Self {
        match p {
            Party::A => MeasuredSide::A,
            Party::B => MeasuredSide::B,
            Party::C => MeasuredSide::C,
        }
    }
}

impl std::str::FromStr for MeasuredSide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "both" => Ok(MeasuredSide::Both),
            "none" => Ok(MeasuredSide::None),
            other => other.parse::<Party>().map(MeasuredSide::from),
        }
    }
}

/// A bipartite cut `first | second` of a (possibly multipartite) state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutSpec {
    pub first: Party,
    pub second: Party,
    pub measured: MeasuredSide,
    /// Overrides the state's own subsystem-to-party assignment.
    pub party_map: Option<Vec<Party>>,
}

impl Default for CutSpec {
    fn default() -> Self {
        CutSpec { first: Party::A, second: Party::B, measured: MeasuredSide::None, party_map: None }
    }
}

impl CutSpec {
    pub fn new(first: Party, second: Party) -> Self {
        CutSpec { first, second, ..CutSpec::default() }
    }

    pub fn measuring(mut self, side: impl Into<MeasuredSide>) -> Self {
        self.measured = side.into();
        self
    }

    pub fn with_party_map(mut self, map: Vec<Party>) -> Self {
        self.party_map = Some(map);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.first == self.second {
            return Err(Error::arg("a cut needs two distinct parties"));
        }
        if let Some(p) = self.measured.party() {
            if p != self.first && p != self.second {
                return Err(Error::arg(format!("measured party {p} is not part of the cut {self}")));
            }
        }
        Ok(())
    }

    fn mapped(&self, spec: &DimSpec) -> Result<DimSpec> {
        match &self.party_map {
            Some(map) => spec.clone().with_parties(map.clone()),
            None => Ok(spec.clone()),
        }
    }

    /// The two parties' subsystems (others traced out), original order, parties attached.
    pub fn restrict(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.validate()?;
        let spec = self.mapped(rho.spec())?;
        let keep = self.keep(&spec)?;
        rho.with_spec(spec)?.partial_trace(&keep)
    }

    /// As [`CutSpec::restrict`] for a pure state, without forming the full projector.
    pub fn restrict_pure(&self, psi: &PureState) -> Result<DensityMatrix> {
        self.validate()?;
        let spec = self.mapped(psi.spec())?;
        let keep = self.keep(&spec)?;
        PureState::new(spec, psi.amplitudes().clone())?.reduced(&keep)
    }

    fn keep(&self, spec: &DimSpec) -> Result<Vec<usize>> {
        let a = spec.subsystems_of(self.first)?;
        let b = spec.subsystems_of(self.second)?;
        if a.is_empty() || b.is_empty() {
            let missing = if a.is_empty() { self.first } else { self.second };
            return Err(Error::arg(format!("state has no subsystems for party {missing}")));
        }
        let mut keep: Vec<usize> = a.into_iter().chain(b).collect();
        keep.sort_unstable();
        Ok(keep)
    }

    /// Grouped `[d_first, d_second]` state.
    pub fn bipartite(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.restrict(rho)?.bipartite(self.first, self.second)
    }

    /// Position of the measured party in the grouped state.
    pub fn measured_side(&self) -> Result<Side> {
        self.validate()?;
        match self.measured.party() {
            Some(p) if p == self.first => Ok(Side::A),
            Some(_) => Ok(Side::B),
            None => Err(Error::arg(format!("cut {self} needs a single measured party"))),
        }
    }

    fn measured_party(&self) -> Result<(Party, Party)> {
        Ok(match self.measured_side()? {
            Side::A => (self.first, self.second),
            Side::B => (self.second, self.first),
        })
    }
}

impl fmt::Display for CutSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", self.first, self.second)?;
        match self.measured {
            MeasuredSide::None => Ok(()),
            MeasuredSide::Both => f.write_str(" measured both"),
            side => write!(f, " measured {}", side.party().expect("single party")),
        }
    }
}

/// Optimizer summary attached to reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OptSummary {
    pub restarts: usize,
    pub converged: bool,
    pub iters: usize,
}

impl From<&OptResult> for OptSummary {
    fn from(r: &OptResult) -> Self {
        OptSummary { restarts: r.restarts_used, converged: r.converged, iters: r.iterations }
    }
}

impl OptSummary {
    fn merge(self, other: OptSummary) -> OptSummary {
        OptSummary {
            restarts: self.restarts + other.restarts,
            converged: self.converged && other.converged,
            iters: self.iters + other.iters,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    pub optimizer: Option<OptSummary>,
    /// Named intermediate values (addends, entropies, block values).
    pub components: Vec<(String, f64)>,
    pub notes: Vec<String>,
}

impl Diagnostics {
    fn closed_form() -> Self {
        Diagnostics::default()
    }

    fn component(mut self, name: impl Into<String>, v: f64) -> Self {
        self.components.push((name.into(), v));
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.components.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone)]
pub struct MeasureReport {
    pub name: String,
    pub value: f64,
    pub bound_direction: BoundDirection,
    pub certificate: Option<Certificate>,
    pub diagnostics: Diagnostics,
    pub cut: Option<String>,
}

/// Rounds to 12 significant digits (the precision of every emitted report).
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    let r: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    if r == 0.0 { 0.0 } else { r }
}

impl MeasureReport {
    fn exact(name: &str, value: f64, cut: &CutSpec, diagnostics: Diagnostics) -> Self {
        MeasureReport {
            name: name.into(),
            value,
            bound_direction: BoundDirection::Exact,
            certificate: None,
            diagnostics,
            cut: Some(cut.to_string()),
        }
    }

    /// JSON form; `certificate_file` names the file the certificate was written to, if any.
    pub fn to_json(&self, certificate_file: Option<&str>) -> Value {
        let mut obj = Map::new();
        obj.insert("name".into(), json!(self.name));
        obj.insert("value".into(), json!(round12(self.value)));
        obj.insert("bound_direction".into(), json!(self.bound_direction));
        if let Some(cut) = &self.cut {
            obj.insert("cut".into(), json!(cut));
        }
        if let Some(f) = certificate_file {
            obj.insert("certificate_file".into(), json!(f));
        }
        let d = &self.diagnostics;
        let diag = if d.optimizer.is_none() && d.components.is_empty() && d.notes.is_empty() {
            json!("closed-form")
        } else {
            let mut m = Map::new();
            if let Some(o) = d.optimizer {
                m.insert("restarts".into(), json!(o.restarts));
                m.insert("converged".into(), json!(o.converged));
                m.insert("iters".into(), json!(o.iters));
            } else {
                m.insert("method".into(), json!("closed-form"));
            }
            if !d.components.is_empty() {
                let comps: Map<String, Value> =
                    d.components.iter().map(|(k, v)| (k.clone(), json!(round12(*v)))).collect();
                m.insert("components".into(), Value::Object(comps));
            }
            if !d.notes.is_empty() {
                m.insert("notes".into(), json!(d.notes));
            }
            Value::Object(m)
        };
        obj.insert("diagnostics".into(), diag);
        Value::Object(obj)
    }
}

struct Entropies {
    a: f64,
    b: f64,
    ab: f64,
}

fn entropies(bip: &DensityMatrix) -> Result<Entropies> {
    let (da, db) = (bip.dims()[0], bip.dims()[1]);
    let a = linalg::entropy_bits_unchecked(&linalg::partial_trace_raw(bip.matrix(), &[da, db], &[0]));
    let b = linalg::entropy_bits_unchecked(&linalg::partial_trace_raw(bip.matrix(), &[da, db], &[1]));
    Ok(Entropies { a, b, ab: bip.entropy()? })
}

/// `S(A) + S(B) − S(AB)`.
pub fn mutual_information(rho: &DensityMatrix, cut: &CutSpec) -> Result<MeasureReport> {
    let e = entropies(&cut.bipartite(rho)?)?;
    let v = e.a + e.b - e.ab;
    let diag = Diagnostics::closed_form().component("S_first", e.a).component("S_second", e.b).component("S_joint", e.ab);
    Ok(MeasureReport::exact("mutual-information", v, cut, diag))
}

/// `min{S(A), S(B), S(A:B)}`.
pub fn s_min(rho: &DensityMatrix, cut: &CutSpec) -> Result<MeasureReport> {
    let e = entropies(&cut.bipartite(rho)?)?;
    let mi = e.a + e.b - e.ab;
    let v = e.a.min(e.b).min(mi);
    let diag = Diagnostics::closed_form().component("S_first", e.a).component("S_second", e.b).component("mutual_information", mi);
    Ok(MeasureReport::exact("s-min", v, cut, diag))
}

/// `max{0, S(A) − S(AB), S(B) − S(AB)}`.
pub fn coherent_information(rho: &DensityMatrix, cut: &CutSpec) -> Result<MeasureReport> {
    let e = entropies(&cut.bipartite(rho)?)?;
    let v = (e.a - e.ab).max(e.b - e.ab).max(0.0);
    Ok(MeasureReport::exact("coherent-information", v, cut, Diagnostics::closed_form()))
}

/// Certified one-sided classical correlation together with the block analysis used for it.
pub(crate) struct HolevoRun {
    pub report: MeasureReport,
    pub povm: Povm,
    pub additive_value: Option<f64>,
    pub blocks: Vec<BlockInfo>,
}

pub(crate) fn holevo_run(rho: &DensityMatrix, cut: &CutSpec, cfg: &OptConfig) -> Result<HolevoRun> {
    let (measured, other) = cut.measured_party()?;
    let restricted = cut.restrict(rho)?;
    let block = factor::blockwise_holevo(&restricted, measured, other, cfg)?;
    let mut summary = OptSummary { restarts: block.restarts, converged: block.converged, iters: block.iters };
    let mut value = block.value;
    let mut povm = block.certificate.clone();
    let mut notes = Vec::new();
    if block.blocks.len() > 1 {
        notes.push(format!("state factorises into {} product blocks", block.blocks.len()));
    }
    if !cfg.seeds_in.is_empty() {
        // warm starts act on the whole measured party, so run them unfactorised as well
        let bip = restricted.bipartite(measured, other)?;
        let seeded = opt::maximize_single(&bip, Side::A, &OptConfig { restarts: 0, ..cfg.clone() })?;
        summary = summary.merge(OptSummary::from(&seeded));
        if seeded.value > value {
            value = seeded.value;
            if let Certificate::Single(p) = seeded.certificate {
                povm = p;
            }
        }
    }
    let mut diag = Diagnostics { optimizer: Some(summary), components: Vec::new(), notes };
    if block.blocks.len() > 1 {
        for b in &block.blocks {
            diag.components.push((format!("block[{}]", b.labels.join(",")), b.exact.unwrap_or(b.value)));
        }
    }
    let report = MeasureReport {
        name: "holevo".into(),
        value,
        bound_direction: BoundDirection::Lower,
        certificate: Some(Certificate::Single(povm.clone())),
        diagnostics: diag,
        cut: Some(cut.to_string()),
    };
    Ok(HolevoRun { report, povm, additive_value: block.additive_value(), blocks: block.blocks })
}

/// One-sided classical correlation: the Holevo quantity of the ensemble steered onto the
/// unmeasured party, maximised over measurements of the measured party. Lower bound.
///
/// States that are tensor products across groups of subsystems are optimised one block
/// at a time; the certificate is the product of the block POVMs.
pub fn holevo_correlation(rho: &DensityMatrix, cut: &CutSpec, cfg: &OptConfig) -> Result<MeasureReport> {
    Ok(holevo_run(rho, cut, cfg)?.report)
}

/// Symmetric classical correlation: mutual information of product measurements on both
/// parties. `cfg_a` configures the first party of the cut. Lower bound.
pub fn symmetric_correlation(rho: &DensityMatrix, cut: &CutSpec, cfg_a: &OptConfig, cfg_b: &OptConfig) -> Result<MeasureReport> {
    let bip = cut.bipartite(rho)?;
    let res = opt::maximize_product(&bip, cfg_a, cfg_b)?;
    Ok(MeasureReport {
        name: "symmetric-correlation".into(),
        value: res.value,
        bound_direction: BoundDirection::Lower,
        certificate: Some(res.certificate.clone()),
        diagnostics: Diagnostics { optimizer: Some(OptSummary::from(&res)), ..Diagnostics::default() },
        cut: Some(CutSpec { measured: MeasuredSide::Both, ..cut.clone() }.to_string()),
    })
}

/// `S(A:B) − C^h`, an upper bound because the classical part is a lower bound.
pub fn discord(rho: &DensityMatrix, cut: &CutSpec, cfg: &OptConfig) -> Result<MeasureReport> {
    let mi = mutual_information(rho, cut)?.value;
    let ch = holevo_correlation(rho, cut, cfg)?;
    let mut diag = ch.diagnostics.clone();
    diag.components.push(("mutual_information".into(), mi));
    diag.components.push(("holevo".into(), ch.value));
    Ok(MeasureReport {
        name: "discord".into(),
        value: mi - ch.value,
        bound_direction: BoundDirection::Upper,
        certificate: ch.certificate,
        diagnostics: diag,
        cut: ch.cut,
    })
}

/// `S(A:B) − C`, an upper bound.
pub fn symmetric_discord(rho: &DensityMatrix, cut: &CutSpec, cfg_a: &OptConfig, cfg_b: &OptConfig) -> Result<MeasureReport> {
    let mi = mutual_information(rho, cut)?.value;
    let sc = symmetric_correlation(rho, cut, cfg_a, cfg_b)?;
    let mut diag = sc.diagnostics.clone();
    diag.components.push(("mutual_information".into(), mi));
    diag.components.push(("symmetric_correlation".into(), sc.value));
    Ok(MeasureReport {
        name: "symmetric-discord".into(),
        value: mi - sc.value,
        bound_direction: BoundDirection::Upper,
        certificate: sc.certificate,
        diagnostics: diag,
        cut: sc.cut,
    })
}

fn binary_entropy(p: f64) -> f64 {
    linalg::shannon_bits(&[p, 1.0 - p])
}

/// Two-qubit concurrence `max(0, λ1 − λ2 − λ3 − λ4)` with `λ` the decreasing eigenvalues of
/// `√(√ρ ρ̃ √ρ)`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dims() != [2, 2] {
        return Err(Error::arg(format!("concurrence needs a two-qubit state, got dims {:?}", rho.dims())));
    }
    let sy = CMatrix::from_row_slice(2, 2, &[linalg::ZERO, c(0.0, -1.0), c(0.0, 1.0), linalg::ZERO]);
    let yy = linalg::kron(&sy, &sy);
    let tilde = &yy * rho.matrix().map(|z| z.conj()) * &yy;
    let sq = linalg::sqrt_psd(rho.matrix());
    let m = linalg::hermitian_part(&(&sq * tilde * &sq));
    let mut lam: Vec<f64> = linalg::eigvalsh(&m).iter().map(|&x| x.max(0.0).sqrt()).collect();
    lam.sort_by(|a, b| b.total_cmp(a));
    Ok((lam[0] - lam[1] - lam[2] - lam[3]).max(0.0))
}

/// Entanglement of formation of a two-qubit state via its concurrence.
pub fn eof_two_qubit(rho: &DensityMatrix) -> Result<MeasureReport> {
    let conc = concurrence(rho)?;
    let v = binary_entropy((1.0 + (1.0 - conc * conc).max(0.0).sqrt()) / 2.0);
    Ok(MeasureReport {
        name: "eof".into(),
        value: v,
        bound_direction: BoundDirection::Exact,
        certificate: None,
        diagnostics: Diagnostics::closed_form().component("concurrence", conc),
        cut: Some(CutSpec::default().to_string()),
    })
}

/// The parts of `E^F(ρ_AB) + C^h(ρ_AC, C measured) − S(ρ_A)`.
#[derive(Debug, Clone)]
pub struct KoashiWinter {
    pub eof: f64,
    pub holevo: f64,
    pub entropy_a: f64,
    pub residual: f64,
    pub certificate: Povm,
    pub optimizer: OptSummary,
}

impl KoashiWinter {
    pub fn report(&self) -> MeasureReport {
        MeasureReport {
            name: "koashi-winter".into(),
            value: self.residual,
            bound_direction: BoundDirection::Lower,
            certificate: Some(Certificate::Single(self.certificate.clone())),
            diagnostics: Diagnostics { optimizer: Some(self.optimizer), ..Diagnostics::default() }
                .component("eof_AB", self.eof)
                .component("holevo_AC_measured_C", self.holevo)
                .component("S_A", self.entropy_a),
            cut: Some(CutSpec::new(Party::A, Party::C).measuring(Party::C).to_string()),
        }
    }
}

fn tripartite(psi: &PureState, party_map: Option<&[Party]>) -> Result<PureState> {
    let psi = match party_map {
        Some(map) => psi.with_parties(map.to_vec())?,
        None => psi.clone(),
    };
    let parties = psi
        .spec()
        .parties()
        .ok_or_else(|| Error::arg("a tripartite state needs a party map"))?;
    for p in [Party::A, Party::B, Party::C] {
        if !parties.contains(&p) {
            return Err(Error::arg(format!("tripartite state has no subsystem for party {p}")));
        }
    }
    Ok(psi)
}

/// `E^F(ρ_AB) + C^h_{AC̄}(ρ_AC) − S(ρ_A)` for a pure state with qubit parties A and B and
/// party C of dimension at most 4. Vanishes exactly; the computed value lies slightly below
/// zero when the optimizer falls short.
pub fn koashi_winter_residual(psi: &PureState, party_map: Option<&[Party]>, cfg: &OptConfig) -> Result<KoashiWinter> {
    let psi = tripartite(psi, party_map)?;
    let ab = psi.reduced_parties(&[Party::A, Party::B])?.bipartite(Party::A, Party::B)?;
    if ab.dims() != [2, 2] {
        return Err(Error::arg(format!("parties A and B must be qubits, got dims {:?}", ab.dims())));
    }
    let dc: usize = psi.spec().subsystems_of(Party::C)?.iter().map(|&k| psi.dims()[k]).product();
    if dc > 4 {
        return Err(Error::arg(format!("party C has dimension {dc}, at most 4 is supported")));
    }
    let eof = eof_two_qubit(&ab)?.value;
    let cut = CutSpec::new(Party::A, Party::C).measuring(Party::C);
    let ac = cut.restrict_pure(&psi)?;
    let run = holevo_run(&ac, &cut, cfg)?;
    let entropy_a = psi.reduced_parties(&[Party::A])?.entropy()?;
    let holevo = run.report.value;
    Ok(KoashiWinter {
        eof,
        holevo,
        entropy_a,
        residual: eof + holevo - entropy_a,
        certificate: run.povm,
        optimizer: run.report.diagnostics.optimizer.unwrap_or(OptSummary { restarts: 0, converged: true, iters: 0 }),
    })
}

/// Upper bounds on `E^C − E^D` of `ρ_AB` for a tripartite pure state.
#[derive(Debug, Clone)]
pub struct Irreversibility {
    /// `S^m(ρ_AC) − C̄^h_est(ρ_AC)`.
    pub bound: MeasureReport,
    /// `S(A:C) − C̄^h_est(ρ_AC)`, the discord form.
    pub discord_form: MeasureReport,
    pub s_min_ac: f64,
    pub mutual_information_ac: f64,
    pub holevo_single: f64,
    pub holevo_additive: Option<f64>,
    pub holevo_probe: Option<f64>,
    pub holevo_bar: f64,
    /// Product blocks of `ρ_AC`.
    pub blocks: Vec<BlockInfo>,
}

/// Evaluates both irreversibility bounds, estimating the regularised one-sided correlation
/// of `ρ_AC` (C measured) as the largest certified value among the single-copy optimum, the
/// block-additive value when every product block is pure or separable, and half the
/// two-copy optimum when `ρ_AC ⊗ ρ_AC` is small enough.
pub fn irreversibility_bound(psi: &PureState, party_map: Option<&[Party]>, cfg: &OptConfig) -> Result<Irreversibility> {
    let psi = tripartite(psi, party_map)?;
    let cut = CutSpec::new(Party::A, Party::C).measuring(Party::C);
    let ac = cut.restrict_pure(&psi)?;
    let sm = s_min(&ac, &cut)?.value;
    let mi = mutual_information(&ac, &cut)?.value;
    let run = holevo_run(&ac, &cut, cfg)?;
    let single = run.report.value;
    let mut notes = Vec::new();
    let probe = match regularization_probe_n2(&ac, &cut, cfg) {
        Ok(r) => Some(r.value),
        Err(Error::Capacity { requested, .. }) => {
            notes.push(format!("two-copy probe skipped (dimension {requested} > {PROBE_MAX_DIM})"));
            None
        }
        Err(e) => return Err(e),
    };
    if run.additive_value.is_none() {
        notes.push("block-additive value not applicable".into());
    }
    let bar = [Some(single), run.additive_value, probe].into_iter().flatten().fold(f64::NEG_INFINITY, f64::max);
    let mut diag = Diagnostics { optimizer: run.report.diagnostics.optimizer, components: Vec::new(), notes };
    diag.components.push(("s_min_AC".into(), sm));
    diag.components.push(("mutual_information_AC".into(), mi));
    diag.components.push(("holevo_single".into(), single));
    if let Some(v) = run.additive_value {
        diag.components.push(("holevo_additive".into(), v));
    }
    if let Some(v) = probe {
        diag.components.push(("holevo_probe_n2".into(), v));
    }
    diag.components.push(("holevo_bar".into(), bar));
    let mk = |name: &str, value: f64| MeasureReport {
        name: name.into(),
        value,
        bound_direction: BoundDirection::Upper,
        certificate: Some(Certificate::Single(run.povm.clone())),
        diagnostics: diag.clone(),
        cut: Some(cut.to_string()),
    };
    Ok(Irreversibility {
        bound: mk("irreversibility", sm - bar),
        discord_form: mk("irreversibility-discord", mi - bar),
        s_min_ac: sm,
        mutual_information_ac: mi,
        holevo_single: single,
        holevo_additive: run.additive_value,
        holevo_probe: probe,
        holevo_bar: bar,
        blocks: run.blocks,
    })
}

/// `ρ ⊗ ρ` regrouped as `(A₁A₂) | (B₁B₂)`.
pub fn two_copies(bip: &DensityMatrix) -> Result<DensityMatrix> {
    let (da, db) = (bip.dims()[0], bip.dims()[1]);
    let total = (da * db).pow(2);
    if total > PROBE_MAX_DIM {
        return Err(Error::Capacity { requested: total, max: PROBE_MAX_DIM });
    }
    let mat = linalg::permute_operator(&linalg::kron(bip.matrix(), bip.matrix()), &[da, db, da, db], &[0, 2, 1, 3]);
    let parties = bip.spec().parties().unwrap_or_else(|| vec![Party::A, Party::B]);
    let spec = DimSpec::new(vec![da * da, db * db])?.with_parties(parties)?;
    DensityMatrix::new(spec, mat)
}

/// `C^h(ρ⊗ρ)/2`, a lower bound on the regularised value. The two-copy search is seeded with
/// the square of the single-copy certificate, so it never falls below the single-copy value.
pub fn regularization_probe_n2(rho: &DensityMatrix, cut: &CutSpec, cfg: &OptConfig) -> Result<MeasureReport> {
    let side = cut.measured_side()?;
    let bip = cut.bipartite(rho)?;
    let doubled = two_copies(&bip)?;
    let single = holevo_correlation(rho, cut, cfg)?;
    let Some(Certificate::Single(p)) = &single.certificate else { unreachable!("holevo reports carry a certificate") };
    let mut seeds = vec![p.tensor(p)];
    seeds.extend(cfg.seeds_in.iter().map(|s| s.tensor(s)));
    let cfg2 = OptConfig { seeds_in: seeds, ..cfg.clone() };
    let res = opt::maximize_single(&doubled, side, &cfg2)?;
    let summary = OptSummary::from(&res).merge(single.diagnostics.optimizer.unwrap_or(OptSummary { restarts: 0, converged: true, iters: 0 }));
    Ok(MeasureReport {
        name: "probe-n2".into(),
        value: res.value / 2.0,
        bound_direction: BoundDirection::Lower,
        certificate: Some(res.certificate),
        diagnostics: Diagnostics { optimizer: Some(summary), ..Diagnostics::default() }
            .component("single_copy", single.value)
            .component("two_copy", res.value),
        cut: Some(cut.to_string()),
    })
}

/// `C^h(ρ) + C^h(σ)`, which equals `C^h(ρ⊗σ)` for separable `σ`.
pub fn lemma2_additive_value(rho: &DensityMatrix, sigma: &SeparableState, cut: &CutSpec, cfg: &OptConfig) -> Result<MeasureReport> {
    let a = holevo_correlation(rho, cut, cfg)?;
    let b = holevo_correlation(sigma.state(), cut, cfg)?;
    let (Some(Certificate::Single(pa)), Some(Certificate::Single(pb))) = (&a.certificate, &b.certificate) else {
        unreachable!("holevo reports carry a certificate")
    };
    let optimizer = match (a.diagnostics.optimizer, b.diagnostics.optimizer) {
        (Some(x), Some(y)) => Some(x.merge(y)),
        (x, y) => x.or(y),
    };
    let mut diag = Diagnostics { optimizer, ..Diagnostics::default() }
        .component("holevo_rho", a.value)
        .component("holevo_sigma", b.value);
    diag.notes.push(format!("sigma separable by {:?}", sigma.witness()).to_lowercase());
    Ok(MeasureReport {
        name: "lemma2-additive".into(),
        value: a.value + b.value,
        bound_direction: BoundDirection::Lower,
        certificate: Some(Certificate::Single(pa.tensor(pb))),
        diagnostics: diag,
        cut: Some(cut.to_string()),
    })
}

/// Certified interval `[C, C^h]` around the one-way distillable correlation, first party
/// measured for the upper end. The width bounds the locked correlation.
#[derive(Debug, Clone)]
pub struct Sandwich {
    pub lower: MeasureReport,
    pub upper: MeasureReport,
}

impl Sandwich {
    pub fn width(&self) -> f64 {
        self.upper.value - self.lower.value
    }
}

/// The Holevo run is warm-started from the symmetric certificate's first-party POVM, so
/// `lower ≤ upper` holds up to rounding.
pub fn cl_sandwich(rho: &DensityMatrix, cut: &CutSpec, cfg_a: &OptConfig, cfg_b: &OptConfig) -> Result<Sandwich> {
    let lower = symmetric_correlation(rho, cut, cfg_a, cfg_b)?;
    let Some(Certificate::Product(pa, _)) = &lower.certificate else { unreachable!("product certificate") };
    let mut seeds = cfg_a.seeds_in.clone();
    seeds.insert(0, pa.clone());
    let cut_a = CutSpec { measured: cut.first.into(), ..cut.clone() };
    let upper = holevo_correlation(rho, &cut_a, &OptConfig { seeds_in: seeds, ..cfg_a.clone() })?;
    Ok(Sandwich { lower, upper })
}

/// Re-evaluates a Holevo certificate on the measured party of a cut.
pub fn holevo_of(rho: &DensityMatrix, cut: &CutSpec, povm: &Povm) -> Result<f64> {
    let bip = cut.bipartite(rho)?;
    Ok(measurement::holevo_quantity(&measurement::measure_side(&bip, cut.measured_side()?, povm)?))
}

#[cfg(test)]
mod tests;
