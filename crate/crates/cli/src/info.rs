use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;
use serde_json::json;

use qcorr::measures::round12;
use qcorr::qstate::io::{self, LoadedState};

use crate::{CmdResult, Failure};

#[derive(Args, Debug)]
pub struct InfoArgs {
    #[arg(long)]
    state: PathBuf,
}

pub fn run(args: InfoArgs) -> CmdResult {
    let doc = io::read_state(&args.state)?;
    let spec = doc.state.spec();
    let parties = spec.parties();
    let mut marginals = serde_json::Map::new();
    if let Some(ps) = &parties {
        for p in [qcorr::Party::A, qcorr::Party::B, qcorr::Party::C] {
            if !ps.contains(&p) {
                continue;
            }
            let keep = spec.subsystems_of(p)?;
            let s = match &doc.state {
                LoadedState::Pure(psi) => psi.marginal_entropy(&keep)?,
                LoadedState::Mixed(r) => r.partial_trace(&keep)?.entropy()?,
            };
            marginals.insert(p.to_string(), json!(round12(s)));
        }
    }
    let entropy = match &doc.state {
        LoadedState::Pure(_) => 0.0,
        LoadedState::Mixed(r) => r.entropy()?,
    };
    let out = json!({
        "label": doc.label,
        "kind": if doc.state.as_pure().is_some() { "pure" } else { "mixed" },
        "dims": spec.dims(),
        "labels": spec.labels(),
        "parties": parties.map(|ps| ps.iter().map(|p| p.to_string()).collect::<Vec<_>>()),
        "ambient_dim": spec.total(),
        "entropy": round12(entropy),
        "marginal_entropies": marginals,
    });
    println!("{}", serde_json::to_string_pretty(&out).map_err(|e| Failure::usage(e.to_string()))?);
    Ok(ExitCode::SUCCESS)
}
