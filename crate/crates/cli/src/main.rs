//! Batch front end: reads a JSON job, writes CSV/JSON artifacts.
//!
//! Exit status: 0 success, 1 invalid input, 2 numeric failure, 3 property
//! suite violation. Failures print a JSON object on standard error.

mod jobs;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use jobs::{run, JobSpec};

#[derive(Parser, Debug)]
#[command(name = "invmetric", version, about = "Invariant metrics of planar domains")]
struct Args {
    /// Job description in JSON.
    #[arg(long)]
    job: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the job's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the job's tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Serialize)]
struct Failure {
    error: String,
    message: String,
    exit_code: u8,
}

fn fail(error: &str, message: String, exit_code: u8) -> ExitCode {
    let f = Failure {
        error: error.into(),
        message,
        exit_code,
    };
    eprintln!("{}", serde_json::to_string(&f).expect("failure serializes"));
    ExitCode::from(exit_code)
}

fn write_atomic(dir: &Path, name: &str, contents: &str) -> std::io::Result<()> {
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, dir.join(name))
}

fn configure_threads() {
    if let Some(n) = std::env::var("INVMETRIC_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    configure_threads();
    let text = match fs::read_to_string(&args.job) {
        Ok(t) => t,
        Err(e) => return fail("io", format!("{}: {e}", args.job.display()), 1),
    };
    let mut job: JobSpec = match serde_json::from_str(&text) {
        Ok(j) => j,
        Err(e) => return fail("invalid_job", e.to_string(), 1),
    };
    if args.seed.is_some() {
        job.seed = args.seed;
    }
    if args.tol.is_some() {
        job.tol = args.tol;
    }
    let outcome = match run(&job) {
        Ok(o) => o,
        Err(e) => {
            let code = if e.is_validation() { 1 } else { 2 };
            return fail(e.kind(), e.to_string(), code);
        }
    };
    if let Err(e) = fs::create_dir_all(&args.out) {
        return fail("io", format!("{}: {e}", args.out.display()), 2);
    }
    for (name, contents) in &outcome.files {
        if let Err(e) = write_atomic(&args.out, name, contents) {
            return fail("io", format!("{name}: {e}"), 2);
        }
    }
    if outcome.code == 3 {
        return fail("property_violation", "a property suite reported violations".into(), 3);
    }
    ExitCode::SUCCESS
}
