use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;

use qcorr::verify::{self, Suite, SuiteReport, SuiteSpec};
use qcorr::OptConfig;

use crate::{write_file, CmdResult, Failure, EXIT_FAILURE};

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// prop1, prop3, prop4, prop5, lemma2, sm-superadd, pure-collapse, koashi-winter or trine-gap.
    #[arg(long)]
    suite: String,

    #[arg(long)]
    trials: Option<usize>,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Dimension pairs to sample, e.g. `2x2,2x3`.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<String>>,

    /// Directory for state files of failing trials.
    #[arg(long)]
    dump_dir: Option<PathBuf>,

    /// Re-run the suite check on one state file instead of random trials.
    #[arg(long)]
    replay: Option<PathBuf>,

    /// Optimizer config file (JSON).
    #[arg(long)]
    config: Option<PathBuf>,

    /// Print the table on stdout instead of JSON (the table always goes to stderr otherwise).
    #[arg(long)]
    table: bool,

    /// Write the JSON report here as well.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_dims(items: &[String]) -> Result<Vec<(usize, usize)>, Failure> {
    items
        .iter()
        .map(|s| {
            let parts: Vec<&str> = s.trim().split(['x', 'X']).collect();
            match parts.as_slice() {
                [a, b] => match (a.parse::<usize>(), b.parse::<usize>()) {
                    (Ok(a), Ok(b)) => Ok((a, b)),
                    _ => Err(Failure::usage(format!("bad dimension pair {s:?}"))),
                },
                _ => Err(Failure::usage(format!("bad dimension pair {s:?}, expected e.g. 2x3"))),
            }
        })
        .collect()
}

fn emit(report: &SuiteReport, args: &VerifyArgs) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(&report.to_json()).expect("json");
    if let Some(path) = &args.out {
        write_file(path, &text)?;
    }
    if args.table {
        print!("{}", report.table());
    } else {
        eprint!("{}", report.table());
        println!("{text}");
    }
    Ok(())
}

pub fn run(args: VerifyArgs) -> CmdResult {
    let suite: Suite = args.suite.parse()?;
    let mut spec = SuiteSpec::new(suite, args.seed);
    if let Some(t) = args.trials {
        spec = spec.with_trials(t);
    }
    if let Some(d) = &args.dims {
        spec = spec.with_dims(parse_dims(d)?);
    }
    if let Some(dir) = &args.dump_dir {
        spec = spec.with_dump_dir(dir);
    }
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
        spec.opt = OptConfig::from_json(&text)?;
    }
    let report = match &args.replay {
        Some(file) => verify::replay(file, &spec)?.0,
        None => verify::run_suite(&spec)?,
    };
    emit(&report, &args)?;
    // a trial that errored never got checked, so it counts against the suite
    if report.passed() && report.errors.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(EXIT_FAILURE))
    }
}
