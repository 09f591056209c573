//! Command-line front end of the `mstruct` toolkit: configuration, report
//! assembly, CSV/JSON output and exit-code mapping.
//!
//! Exit codes: 0 success, 2 input error, 3 configuration or usage error,
//! 4 solver failure.

// `!(x > 0.0)` is the NaN-rejecting form on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod report;

pub use config::ReportConfig;
pub use error::CliError;
pub use report::{run_report, EvaluationReport};

/// Worker-count cap; `0` or unset means one worker per core.
pub const THREADS_ENV: &str = "MSTRUCT_THREADS";

fn thread_count() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("ConfigInvalid: {THREADS_ENV}='{v}' is not a thread count"))),
        Err(_) => Ok(0),
    }
}

#[cfg(feature = "parallel")]
fn with_threads<T>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError>
where
    T: Send,
{
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("ConfigInvalid: cannot start {threads} workers: {e}")))?;
    Ok(pool.install(f))
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T>(_threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError>
where
    T: Send,
{
    Ok(f())
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code. Diagnostics go to `err` as one line.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match commands::Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let help = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let text = e.render().to_string();
            if help {
                let _ = out.write_all(text.as_bytes());
                return 0;
            }
            let _ = err.write_all(text.as_bytes());
            return CliError::CONFIG_EXIT;
        }
    };
    let result = thread_count().and_then(|n| with_threads(n, || commands::execute(cli.command, out))).and_then(|r| r);
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{}", e.diagnostic());
            e.exit_code()
        }
    }
}
