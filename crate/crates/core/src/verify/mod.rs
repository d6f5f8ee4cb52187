//! Seeded property suites that re-check the inequality chains between the measures on
//! factory states and random ensembles.
//!
//! Every trial draws its state from `derive_seed(master_seed, trial)`; a failing trial is
//! written out as a state file whose `meta` block records the suite, both seeds and the
//! margin, so [`replay`] can re-run exactly that check.

mod suites;

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::measures::round12;
use crate::opt::OptConfig;
use crate::qstate::io;
use crate::qstate::{derive_seed, rng_from_seed};

pub use suites::projective_grid_optimum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Prop1,
    Prop3,
    Prop4,
    Prop5,
    Lemma2,
    SmSuperadd,
    PureCollapse,
    KoashiWinter,
    TrineGap,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Prop1,
        Suite::Prop3,
        Suite::Prop4,
        Suite::Prop5,
        Suite::Lemma2,
        Suite::SmSuperadd,
        Suite::PureCollapse,
        Suite::KoashiWinter,
        Suite::TrineGap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Prop1 => "prop1",
            Suite::Prop3 => "prop3",
            Suite::Prop4 => "prop4",
            Suite::Prop5 => "prop5",
            Suite::Lemma2 => "lemma2",
            Suite::SmSuperadd => "sm-superadd",
            Suite::PureCollapse => "pure-collapse",
            Suite::KoashiWinter => "koashi-winter",
            Suite::TrineGap => "trine-gap",
        }
    }

    /// Dimension pairs sampled when none are given.
    pub fn default_dims(self) -> Vec<(usize, usize)> {
        match self {
            Suite::Lemma2 | Suite::KoashiWinter | Suite::Prop4 | Suite::TrineGap => vec![(2, 2)],
            _ => vec![(2, 2), (2, 3), (3, 3)],
        }
    }

    pub fn default_trials(self) -> usize {
        match self {
            Suite::Prop5 => 500,
            Suite::SmSuperadd | Suite::KoashiWinter => 200,
            Suite::Prop1 | Suite::PureCollapse => 50,
            Suite::Prop3 => 20,
            Suite::Lemma2 => 10,
            Suite::Prop4 => 20,
            Suite::TrineGap => 1,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Suite::ALL.iter().map(|x| x.name()).collect();
                Error::arg(format!("unknown suite {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

/// Acceptance slacks; the defaults are the documented tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Exact identities and closed-form inequalities.
    pub num: f64,
    /// Inequalities between seeded optimizer outputs.
    pub chain: f64,
    /// Equalities the optimizer only reaches numerically.
    pub kw: f64,
    /// Required advantage of POVMs over projective measurements on the trine state.
    pub trine_gap: f64,
    /// Required strict superadditivity gap on the fixed nine-qubit instance.
    pub strict_gap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { num: crate::tol::NUM, chain: crate::tol::CHAIN, kw: crate::tol::KW, trine_gap: 0.01, strict_gap: 0.5 }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteSpec {
    pub suite: Suite,
    pub trials: usize,
    pub seed: u64,
    pub dims: Vec<(usize, usize)>,
    pub tolerances: Tolerances,
    pub opt: OptConfig,
    /// Failing trials are written here when set.
    pub dump_dir: Option<PathBuf>,
}

impl SuiteSpec {
    pub fn new(suite: Suite, seed: u64) -> Self {
        SuiteSpec {
            suite,
            trials: suite.default_trials(),
            seed,
            dims: suite.default_dims(),
            tolerances: Tolerances::default(),
            opt: suite_opt_config(),
            dump_dir: None,
        }
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_dims(mut self, dims: Vec<(usize, usize)>) -> Self {
        self.dims = dims;
        self
    }

    pub fn with_dump_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.dump_dir = Some(dir.into());
        self
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::arg("a suite needs at least one trial"));
        }
        if self.dims.is_empty() {
            return Err(Error::arg("no dimension pairs to sample from"));
        }
        for &(a, b) in &self.dims {
            if a < 2 || b < 2 {
                return Err(Error::arg(format!("dimension pair {a}x{b}: both factors must be at least 2")));
            }
            let ambient = match self.suite {
                Suite::SmSuperadd => (a * b).pow(2),
                Suite::Lemma2 => (a * b).pow(2),
                Suite::Prop5 => 4 * a * b,
                _ => a * b,
            };
            let cap = if self.suite == Suite::Lemma2 { crate::measures::PROBE_MAX_DIM } else { crate::MAX_AMBIENT_DIM };
            if ambient > cap {
                return Err(Error::Capacity { requested: ambient, max: cap });
            }
        }
        if matches!(self.suite, Suite::KoashiWinter | Suite::Prop4) && self.dims.iter().any(|&d| d != (2, 2)) {
            return Err(Error::arg("tripartite suites need qubit parties A and B (dims 2x2)"));
        }
        if self.suite == Suite::TrineGap && self.dims != [(2, 2)] {
            return Err(Error::arg("trine-gap runs on the fixed trine state and takes no dims"));
        }
        self.opt.validate()
    }
}

/// Optimizer settings used by suites unless overridden.
pub fn suite_opt_config() -> OptConfig {
    OptConfig { restarts: 8, ..OptConfig::default() }
}

/// Result of a single check.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    /// Named values entering the check.
    pub values: Vec<(String, f64)>,
    /// Smallest slack over the checked inequalities; negative means failure.
    pub margin: f64,
    /// Per-inequality slacks (name, slack).
    pub checks: Vec<(String, f64)>,
}

impl TrialOutcome {
    pub fn passed(&self) -> bool {
        self.margin >= 0.0
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone)]
pub struct Failure {
    /// Trial index, or `None` for a fixed instance.
    pub trial: Option<usize>,
    pub name: String,
    pub seed: u64,
    pub state_file: Option<String>,
    pub values: Vec<(String, f64)>,
    pub margin: f64,
}

#[derive(Debug, Clone)]
pub struct TrialError {
    pub trial: usize,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub trials_run: usize,
    pub failures: Vec<Failure>,
    pub errors: Vec<TrialError>,
    /// Smallest margin over all trials and fixed instances.
    pub min_margin: f64,
    /// Fixed instances checked in addition to the random trials.
    pub fixed: Vec<(String, TrialOutcome)>,
    pub wall_time: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> Value {
        let values = |v: &[(String, f64)]| -> Value {
            Value::Object(v.iter().map(|(k, x)| (k.clone(), json!(round12(*x)))).collect())
        };
        json!({
            "suite": self.suite.name(),
            "seed": self.seed,
            "trials_run": self.trials_run,
            "passed": self.passed(),
            "min_margin": round12(self.min_margin),
            "wall_time": round12(self.wall_time),
            "failures": self.failures.iter().map(|f| json!({
                "trial": f.trial,
                "name": f.name,
                "seed": f.seed,
                "state_file": f.state_file,
                "values": values(&f.values),
                "margin": round12(f.margin),
            })).collect::<Vec<_>>(),
            "errors": self.errors.iter().map(|e| json!({
                "trial": e.trial,
                "seed": e.seed,
                "message": e.message,
            })).collect::<Vec<_>>(),
            "fixed": self.fixed.iter().map(|(name, o)| json!({
                "name": name,
                "passed": o.passed(),
                "margin": round12(o.margin),
                "values": values(&o.values),
            })).collect::<Vec<_>>(),
        })
    }

    /// Human-readable summary table.
    pub fn table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{:<16} {:>6} {:>8} {:>7} {:>14} {:>9}\n", "suite", "seed", "trials", "failed", "min margin", "time [s]"));
        out.push_str(&format!(
            "{:<16} {:>6} {:>8} {:>7} {:>14.6e} {:>9.2}\n",
            self.suite.name(),
            self.seed,
            self.trials_run,
            self.failures.len(),
            self.min_margin,
            self.wall_time
        ));
        for (name, o) in &self.fixed {
            out.push_str(&format!("  fixed {name}: {} (margin {:.6e})\n", if o.passed() { "pass" } else { "FAIL" }, o.margin));
        }
        for f in &self.failures {
            let what = f.trial.map_or_else(|| f.name.clone(), |t| format!("trial {t}"));
            out.push_str(&format!("  FAIL {what} seed {} margin {:.6e}", f.seed, f.margin));
            if let Some(path) = &f.state_file {
                out.push_str(&format!(" -> {path}"));
            }
            out.push('\n');
        }
        for e in &self.errors {
            out.push_str(&format!("  error in trial {} (seed {}): {}\n", e.trial, e.seed, e.message));
        }
        out.push_str(if self.passed() { "PASS\n" } else { "FAIL\n" });
        out
    }
}

fn dump_failure(
    dir: &Path,
    spec: &SuiteSpec,
    trial: usize,
    trial_seed: u64,
    instance: &suites::Instance,
    outcome: &TrialOutcome,
) -> Result<String> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.display().to_string(), source })?;
    let path = dir.join(format!("{}-trial{trial}-seed{trial_seed}.json", spec.suite.name()));
    let mut meta = json!({
        "suite": spec.suite.name(),
        "master_seed": spec.seed,
        "trial": trial,
        "trial_seed": trial_seed,
        "margin": outcome.margin,
    });
    if let Some(extra) = instance.meta() {
        meta["instance"] = extra;
    }
    let label = format!("{} failure", spec.suite.name());
    io::write_state(&path, &instance.to_state()?, Some(&label), Some(&meta))?;
    Ok(path.display().to_string())
}

/// Runs `spec.trials` independent trials (in parallel) plus the suite's fixed instances.
pub fn run_suite(spec: &SuiteSpec) -> Result<SuiteReport> {
    spec.validate()?;
    let start = Instant::now();
    let trials = if spec.suite == Suite::TrineGap { 1 } else { spec.trials };
    let outcomes: Vec<(usize, u64, Result<(suites::Instance, TrialOutcome)>)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let seed = derive_seed(spec.seed, t as u64);
            let mut rng = rng_from_seed(seed);
            let run = suites::generate(spec.suite, &spec.dims, &mut rng).and_then(|inst| {
                let outcome = suites::check(spec.suite, &inst, seed, spec)?;
                Ok((inst, outcome))
            });
            (t, seed, run)
        })
        .collect();

    let mut failures = Vec::new();
    let mut errors = Vec::new();
    let mut min_margin = f64::INFINITY;
    for (t, seed, run) in outcomes {
        match run {
            Ok((inst, outcome)) => {
                min_margin = min_margin.min(outcome.margin);
                if !outcome.passed() {
                    let state_file = match &spec.dump_dir {
                        Some(dir) => Some(dump_failure(dir, spec, t, seed, &inst, &outcome)?),
                        None => None,
                    };
                    failures.push(Failure {
                        trial: Some(t),
                        name: format!("trial {t}"),
                        seed,
                        state_file,
                        values: outcome.values,
                        margin: outcome.margin,
                    });
                }
            }
            // capacity and numerical problems in one trial do not abort the suite
            Err(e) => errors.push(TrialError { trial: t, seed, message: e.to_string() }),
        }
    }
    let fixed = suites::fixed_checks(spec)?;
    for (name, outcome) in &fixed {
        min_margin = min_margin.min(outcome.margin);
        if !outcome.passed() {
            failures.push(Failure {
                trial: None,
                name: name.clone(),
                seed: spec.seed,
                state_file: None,
                values: outcome.values.clone(),
                margin: outcome.margin,
            });
        }
    }
    Ok(SuiteReport {
        suite: spec.suite,
        seed: spec.seed,
        trials_run: trials,
        failures,
        errors,
        min_margin,
        fixed,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Re-runs one suite check on a state file with the tolerances and optimizer settings of
/// `spec`. The per-trial seed recorded in a failure dump is reused so the optimizer follows
/// the same path; files without one use `spec.seed`.
pub fn replay(state_file: impl AsRef<Path>, spec: &SuiteSpec) -> Result<(SuiteReport, TrialOutcome)> {
    let start = Instant::now();
    let suite = spec.suite;
    let doc = io::read_state(state_file.as_ref())?;
    let meta = doc.meta.clone().unwrap_or(Value::Null);
    let seed = meta.get("trial_seed").and_then(Value::as_u64).unwrap_or(spec.seed);
    let master = meta.get("master_seed").and_then(Value::as_u64).unwrap_or(spec.seed);
    let trial = meta.get("trial").and_then(Value::as_u64).map(|t| t as usize);
    spec.opt.validate()?;
    let instance = suites::Instance::from_state(suite, doc.state, meta.get("instance"))?;
    let outcome = suites::check(suite, &instance, seed, spec)?;
    let failures = if outcome.passed() {
        Vec::new()
    } else {
        vec![Failure {
            trial,
            name: state_file.as_ref().display().to_string(),
            seed,
            state_file: Some(state_file.as_ref().display().to_string()),
            values: outcome.values.clone(),
            margin: outcome.margin,
        }]
    };
    let report = SuiteReport {
        suite,
        seed: master,
        trials_run: 1,
        failures,
        errors: Vec::new(),
        min_margin: outcome.margin,
        fixed: Vec::new(),
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok((report, outcome))
}
