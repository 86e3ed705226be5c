use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Parser, Subcommand};
use kreinwave_core::check::CheckOutcome;

use crate::config::{Scenario, VerifyMatrix};
use crate::output::Artifacts;
use crate::{scenario, ConfigError, DEFAULT_SUITE};

pub const OUT_ENV: &str = "KREINWAVE_OUT";
pub const DEFAULT_ROOT: &str = "kreinwave-out";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "kreinwave", version, about = "Run kreinwave verification and simulation scenarios")]
struct Cli {
    /// Output root; overrides $KREINWAVE_OUT.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Scenarios run in parallel. Each trajectory stays on one thread.
    #[arg(long, global = true, default_value_t = 1, value_name = "N")]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run scenario files, or the built-in suite when none are given.
    Run { configs: Vec<PathBuf> },
    /// Identity suite on COUNT seeded random matrix models.
    Verify {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
}

/// A validated scenario and the directory it writes to.
#[derive(Debug, Clone)]
pub struct Job {
    pub name: String,
    pub scenario: Scenario,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub name: String,
    pub dir: PathBuf,
    pub checks: Vec<CheckOutcome>,
    pub error: Option<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.passed)
    }
}

fn output_root(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_ROOT))
}

fn job_name(scenario: &Scenario, fallback: &str) -> String {
    scenario.output().map(str::to_string).unwrap_or_else(|| fallback.to_string())
}

/// Parses every scenario before anything is written.
fn plan(command: Command) -> Result<Vec<Job>, ConfigError> {
    let mut jobs = Vec::new();
    match command {
        Command::Run { configs } if configs.is_empty() => {
            for (name, text) in DEFAULT_SUITE {
                let scenario =
                    Scenario::parse(text).map_err(|e| ConfigError::new(format!("built-in {name}: {}", e.0)))?;
                jobs.push(Job { name: job_name(&scenario, name), scenario });
            }
        }
        Command::Run { configs } => {
            for path in configs {
                let scenario = Scenario::load(&path)?;
                let stem =
                    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "scenario".into());
                jobs.push(Job { name: job_name(&scenario, &stem), scenario });
            }
        }
        Command::Verify { seed, count } => {
            let scenario = Scenario::VerifyMatrix(VerifyMatrix::from_seed(seed, count));
            scenario.validate()?;
            jobs.push(Job { name: format!("verify-seed{seed}-count{count}"), scenario });
        }
    }
    let mut names: Vec<&str> = jobs.iter().map(|j| j.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(ConfigError::new(format!("two scenarios write to the same directory `{}`", w[0])));
    }
    Ok(jobs)
}

/// Runs one scenario and writes its summary; a failure leaves a marker.
pub fn execute(job: &Job, root: &Path) -> Outcome {
    let dir = root.join(&job.name);
    let mut checks = Vec::new();
    let error = match Artifacts::create(&dir) {
        Err(e) => Some(format!("cannot create {}: {e}", dir.display())),
        Ok(art) => {
            let mut error = scenario::run(&job.scenario, &art, &mut checks).err().map(|e| e.to_string());
            if let Err(e) = art.summary(&checks) {
                error.get_or_insert(format!("writing summary: {e}"));
            }
            let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
            if error.is_some() || !failed.is_empty() {
                let reason = error.clone().unwrap_or_else(|| format!("failed checks: {}", failed.join(", ")));
                if let Err(e) = art.mark_failed(&reason) {
                    error.get_or_insert(format!("writing marker: {e}"));
                }
            }
            error
        }
    };
    Outcome { name: job.name.clone(), dir, checks, error }
}

/// Runs the jobs on up to `threads` threads; results keep the input order.
pub fn execute_all(jobs: &[Job], root: &Path, threads: usize) -> Vec<Outcome> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Outcome>>> = Mutex::new(vec![None; jobs.len()]);
    std::thread::scope(|s| {
        for _ in 0..threads.clamp(1, jobs.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(i) else { break };
                let outcome = execute(job, root);
                slots.lock().unwrap()[i] = Some(outcome);
            });
        }
    });
    slots.into_inner().unwrap().into_iter().map(|o| o.expect("every job ran")).collect()
}

fn report(outcomes: &[Outcome]) {
    for o in outcomes {
        let passed = o.checks.iter().filter(|c| c.passed).count();
        let verdict = if o.passed() { "PASS" } else { "FAIL" };
        println!("{verdict} {} ({passed}/{} checks) -> {}", o.name, o.checks.len(), o.dir.display());
        for c in o.checks.iter().filter(|c| !c.passed) {
            eprintln!("  FAIL {}: residual {:e} > tolerance {:e}", c.name, c.residual, c.tolerance);
        }
        if let Some(e) = &o.error {
            eprintln!("  error: {e}");
        }
    }
}

/// Entry point; returns the process exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
        }
    };
    if cli.jobs == 0 {
        eprintln!("config error: --jobs must be at least 1");
        return EXIT_CONFIG;
    }
    let jobs = match plan(cli.command) {
        Ok(jobs) => jobs,
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_CONFIG;
        }
    };
    let root = output_root(cli.out);
    let outcomes = execute_all(&jobs, &root, cli.jobs);
    report(&outcomes);
    if outcomes.iter().all(Outcome::passed) {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
