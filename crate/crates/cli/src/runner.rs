//! Command resolution shared by the binary and the tests.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::config::Params;
use crate::error::{CliError, CliResult};
use crate::experiments::{Experiment, Plan};
use crate::manifest::{Run, RunManifest};

/// Loads the configuration and reconciles it with the command line.
///
/// The file may name its experiment and seed; `--seed` wins over the file.
pub fn resolve(requested: Option<&str>, config: Option<&Path>, seed: Option<u64>) -> CliResult<(Experiment, Params, u64)> {
    let mut params = match config {
        Some(path) => Params::load(path)?,
        None => Params::default(),
    };
    let declared = params.optional("experiment");
    let name = match (requested, declared.as_deref()) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::usage(format!("command asks for {a} but the config declares {b}")));
        }
        (Some(a), _) | (None, Some(a)) => a.to_string(),
        (None, None) => return Err(CliError::usage("no experiment named")),
    };
    let exp = Experiment::from_name(&name)?;
    let file_seed = params.count("seed", 0, 0, usize::MAX)? as u64;
    let seed = seed.unwrap_or(file_seed);
    params.set("experiment", exp.name());
    params.set("seed", seed.to_string());
    Ok((exp, params, seed))
}

pub fn validate(exp: Experiment, params: &Params) -> CliResult<Plan> {
    Plan::parse(exp, params)
}

pub fn run(exp: Experiment, params: &Params, seed: u64, out: Option<&Path>) -> CliResult<RunManifest> {
    let plan = Plan::parse(exp, params)?;
    let out: PathBuf = out.map(Path::to_path_buf).unwrap_or_else(|| Path::new("out").join(exp.name()));
    let mut run = Run::new(&out, seed)?;
    let start = Instant::now();
    plan.execute(&mut run)?;
    let wall = start.elapsed().as_secs_f64();
    run.finish(exp.name(), params.echo(), wall)
}
