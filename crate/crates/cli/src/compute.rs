use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, ValueEnum};
use serde_json::{json, Value};

use qcorr::measures::{self, Diagnostics};
use qcorr::opt::Certificate;
use qcorr::qstate::io::{self, LoadedState};
use qcorr::{BoundDirection, CutSpec, DensityMatrix, MeasureReport, MeasuredSide, OptConfig, OptMode, Party, SeparableState};

use crate::{write_file, CmdResult, Failure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Measure {
    MutualInformation,
    SMin,
    CoherentInformation,
    Holevo,
    SymmetricCorrelation,
    Discord,
    SymmetricDiscord,
    Eof,
    KoashiWinter,
    Irreversibility,
    IrreversibilityDiscord,
    ProbeN2,
    Lemma2Additive,
    ClSandwich,
}

impl Measure {
    fn needs_tripartite(self) -> bool {
        matches!(self, Measure::KoashiWinter | Measure::Irreversibility | Measure::IrreversibilityDiscord)
    }
}

#[derive(Args, Debug)]
pub struct ComputeArgs {
    /// State file (JSON).
    #[arg(long)]
    state: PathBuf,

    #[arg(long, value_enum)]
    measure: Measure,

    /// The two parties of the cut, e.g. `AC`. Defaults to the first two parties present.
    #[arg(long)]
    pair: Option<String>,

    /// Measured party: A, B, C, both or none.
    #[arg(long)]
    measured: Option<String>,

    /// Party of each subsystem, e.g. `A,B,C,A`; overrides the state file.
    #[arg(long, value_delimiter = ',')]
    parties: Option<Vec<String>>,

    /// Optimizer config file (JSON, fields of OptConfig).
    #[arg(long)]
    config: Option<PathBuf>,

    /// Optimizer mode: rank1-stiefel, general or projective.
    #[arg(long)]
    mode: Option<String>,

    #[arg(long)]
    restarts: Option<usize>,

    #[arg(long)]
    seed: Option<u64>,

    /// Number of POVM outcomes per measured side.
    #[arg(long)]
    outcomes: Option<usize>,

    /// Separable second state for `lemma2-additive`.
    #[arg(long)]
    sigma: Option<PathBuf>,

    /// Write the optimal measurement here.
    #[arg(long)]
    certificate: Option<PathBuf>,

    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_party(s: &str) -> Result<Party, Failure> {
    s.parse::<Party>().map_err(Failure::from)
}

fn opt_config(args: &ComputeArgs) -> Result<OptConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
            OptConfig::from_json(&text)?
        }
        None => OptConfig::default(),
    };
    if let Some(m) = &args.mode {
        cfg.mode = m.parse::<OptMode>()?;
    }
    if let Some(r) = args.restarts {
        cfg = cfg.with_restarts(r);
    }
    if let Some(s) = args.seed {
        cfg = cfg.with_seed(s);
    }
    if let Some(n) = args.outcomes {
        cfg = cfg.with_outcomes(n);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn party_map(args: &ComputeArgs) -> Result<Option<Vec<Party>>, Failure> {
    args.parties
        .as_ref()
        .map(|ps| ps.iter().map(|p| parse_party(p)).collect())
        .transpose()
}

fn cut_for(args: &ComputeArgs, parties: Option<Vec<Party>>, present: &[Party]) -> Result<CutSpec, Failure> {
    let (first, second) = match &args.pair {
        Some(pair) => {
            let ps: Vec<char> = pair.chars().filter(|c| c.is_ascii_alphabetic()).collect();
            if ps.len() != 2 {
                return Err(Failure::usage(format!("--pair takes two parties, e.g. AB, got {pair:?}")));
            }
            (parse_party(&ps[0].to_string())?, parse_party(&ps[1].to_string())?)
        }
        None => {
            let mut found = [Party::A, Party::B, Party::C].into_iter().filter(|p| present.contains(p));
            match (found.next(), found.next()) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(Failure::usage("state needs at least two parties; use --parties")),
            }
        }
    };
    let measured = match &args.measured {
        Some(m) => m.parse::<MeasuredSide>()?,
        None => MeasuredSide::None,
    };
    let mut cut = CutSpec::new(first, second).measuring(measured);
    if let Some(map) = parties {
        cut = cut.with_party_map(map);
    }
    Ok(cut)
}

fn restricted(state: &LoadedState, cut: &CutSpec) -> Result<(DensityMatrix, CutSpec), Failure> {
    let rho = match state {
        LoadedState::Pure(p) => cut.restrict_pure(p)?,
        LoadedState::Mixed(r) => cut.restrict(r)?,
    };
    Ok((rho, CutSpec { party_map: None, ..cut.clone() }))
}

fn sandwich_report(s: &measures::Sandwich) -> MeasureReport {
    let mut diagnostics = Diagnostics { optimizer: s.lower.diagnostics.optimizer, ..Diagnostics::default() };
    diagnostics.components.push(("lower".into(), s.lower.value));
    diagnostics.components.push(("upper".into(), s.upper.value));
    diagnostics.notes.push("value is upper - lower, a bound on the locked correlation".into());
    MeasureReport {
        name: "cl-sandwich".into(),
        value: s.width(),
        bound_direction: BoundDirection::Upper,
        certificate: s.upper.certificate.clone(),
        diagnostics,
        cut: s.upper.cut.clone(),
    }
}

fn certificate_json(cert: &Certificate) -> Result<String, Failure> {
    Ok(match cert {
        Certificate::Single(p) => p.to_json(),
        Certificate::Product(a, b) => {
            let a: Value = serde_json::from_str(&a.to_json()).map_err(|e| Failure::usage(e.to_string()))?;
            let b: Value = serde_json::from_str(&b.to_json()).map_err(|e| Failure::usage(e.to_string()))?;
            serde_json::to_string_pretty(&json!({ "first": a, "second": b })).expect("json")
        }
    })
}

pub fn evaluate(args: &ComputeArgs) -> Result<MeasureReport, Failure> {
    let doc = io::read_state(&args.state)?;
    let cfg = opt_config(args)?;
    let map = party_map(args)?;
    if args.measure.needs_tripartite() {
        let LoadedState::Pure(psi) = &doc.state else {
            return Err(Failure::usage(format!("{:?} needs a pure tripartite state", args.measure)));
        };
        let map = map.as_deref();
        return Ok(match args.measure {
            Measure::KoashiWinter => measures::koashi_winter_residual(psi, map, &cfg)?.report(),
            Measure::Irreversibility => measures::irreversibility_bound(psi, map, &cfg)?.bound,
            _ => measures::irreversibility_bound(psi, map, &cfg)?.discord_form,
        });
    }
    let present = match &map {
        Some(m) => m.clone(),
        None => doc.state.spec().parties().unwrap_or_default(),
    };
    let cut = cut_for(args, map, &present)?;
    let (rho, cut) = restricted(&doc.state, &cut)?;
    let report = match args.measure {
        Measure::MutualInformation => measures::mutual_information(&rho, &cut)?,
        Measure::SMin => measures::s_min(&rho, &cut)?,
        Measure::CoherentInformation => measures::coherent_information(&rho, &cut)?,
        Measure::Holevo => measures::holevo_correlation(&rho, &cut, &cfg)?,
        Measure::SymmetricCorrelation => measures::symmetric_correlation(&rho, &cut, &cfg, &cfg)?,
        Measure::Discord => measures::discord(&rho, &cut, &cfg)?,
        Measure::SymmetricDiscord => measures::symmetric_discord(&rho, &cut, &cfg, &cfg)?,
        Measure::Eof => measures::eof_two_qubit(&cut.bipartite(&rho)?)?,
        Measure::ProbeN2 => measures::regularization_probe_n2(&rho, &cut, &cfg)?,
        Measure::ClSandwich => sandwich_report(&measures::cl_sandwich(&rho, &cut, &cfg, &cfg)?),
        Measure::Lemma2Additive => {
            let path = args.sigma.as_ref().ok_or_else(|| Failure::usage("lemma2-additive needs --sigma"))?;
            let sigma = io::read_state(path)?.state.density()?;
            let sigma = SeparableState::ppt_certified(&sigma)?;
            measures::lemma2_additive_value(&rho, &sigma, &cut, &cfg)?
        }
        Measure::KoashiWinter | Measure::Irreversibility | Measure::IrreversibilityDiscord => unreachable!(),
    };
    Ok(report)
}

pub fn run(args: ComputeArgs) -> CmdResult {
    let report = evaluate(&args)?;
    let cert_name = match (&args.certificate, &report.certificate) {
        (Some(path), Some(cert)) => {
            write_file(path, &certificate_json(cert)?)?;
            Some(path.display().to_string())
        }
        (Some(_), None) => {
            eprintln!("note: {} is closed-form; no certificate written", report.name);
            None
        }
        _ => None,
    };
    let text = serde_json::to_string_pretty(&report.to_json(cert_name.as_deref())).expect("json");
    match &args.out {
        Some(path) => write_file(path, &text)?,
        None => println!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}
