use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;

use qcorr::catalogue::{self, NAMES};
use qcorr::qstate::io::{self, LoadedState};

use crate::{write_file, CmdResult, Failure};

#[derive(Args, Debug)]
pub struct ExamplesArgs {
    /// Example name; omit (or pass --list) to list the catalogue.
    #[arg(long)]
    name: Option<String>,

    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,

    #[arg(long)]
    list: bool,
}

fn listing() -> String {
    let mut out = String::new();
    for name in NAMES {
        let ex = catalogue::example(name).expect("catalogue names resolve");
        out.push_str(&format!("{name:<12} {}\n", ex.description));
    }
    out
}

pub fn run(args: ExamplesArgs) -> CmdResult {
    let name = match (&args.name, args.list) {
        (Some(n), false) => n,
        (None, _) | (_, true) => {
            print!("{}", listing());
            return Ok(ExitCode::SUCCESS);
        }
    };
    let ex = catalogue::example(name).map_err(|_| Failure::usage(format!("unknown example {name:?}; catalogue:\n{}", listing())))?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| Failure::usage(format!("cannot create {}: {e}", args.out.display())))?;
    let stem = ex.stem();
    let state_file = format!("{stem}.json");
    let mut written = vec![args.out.join(&state_file)];
    io::write_state(&written[0], &ex.state, Some(ex.name), None)?;
    let marginal_file = match ex.marginal_ac()? {
        Some(rho) => {
            let file = format!("{stem}_AC.json");
            let label = format!("{} AC marginal", ex.name);
            let path = args.out.join(&file);
            io::write_state(&path, &LoadedState::Mixed(rho), Some(&label), None)?;
            written.push(path);
            Some(file)
        }
        None => None,
    };
    let sidecar = ex.sidecar(&state_file, marginal_file.as_deref());
    let sidecar_path = args.out.join(format!("{stem}.expected.json"));
    write_file(&sidecar_path, &serde_json::to_string_pretty(&sidecar).expect("json"))?;
    written.push(sidecar_path);
    for p in written {
        println!("{}", p.display());
    }
    Ok(ExitCode::SUCCESS)
}
