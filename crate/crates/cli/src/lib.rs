//! Command-line front end of `outlier-core`: `detect` runs one test on a
//! file of sequences, `simulate` drives the Monte Carlo harness and
//! `analyze` exposes the divergence and exponent checks.
//!
//! Every flag of every subcommand is documented in the README:
//!
//! ```
//! let readme = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../README.md")).unwrap();
//! assert_eq!(outlier_cli::undocumented_flags(&readme), Vec::<String>::new());
//! ```

pub mod analyze;
pub mod args;
pub mod detect;
pub mod sequences;
pub mod simulate;

use std::io::Write;

use clap::CommandFactory;

pub use args::{Cli, Command};

/// Exit status for a failed run: 2 when an enumeration cap refused the
/// request, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    let capped = err
        .chain()
        .any(|e| matches!(e.downcast_ref(), Some(outlier_core::Error::CapExceeded { .. })));
    if capped {
        2
    } else {
        1
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> anyhow::Result<()> {
    match cli.command {
        Command::Detect(a) => detect::run(&a, out),
        Command::Simulate(a) => simulate::run(&a, out),
        Command::Analyze(a) => analyze::run(&a, out),
    }
}

/// `(subcommand path, --flag)` for every long flag the CLI accepts.
pub fn all_flags() -> Vec<(String, String)> {
    fn walk(cmd: &clap::Command, path: &str, out: &mut Vec<(String, String)>) {
        for arg in cmd.get_arguments() {
            if let Some(long) = arg.get_long() {
                if long != "help" && long != "version" {
                    out.push((path.to_string(), format!("--{long}")));
                }
            }
        }
        for sub in cmd.get_subcommands() {
            walk(sub, format!("{path} {}", sub.get_name()).trim_start(), out);
        }
    }
    let mut out = Vec::new();
    walk(&Cli::command(), "", &mut out);
    out
}

/// Flags of [`all_flags`] that `readme` never mentions, as `subcommand --flag`.
pub fn undocumented_flags(readme: &str) -> Vec<String> {
    all_flags()
        .into_iter()
        .filter(|(_, flag)| {
            !readme
                .match_indices(flag.as_str())
                .any(|(i, _)| !readme[i + flag.len()..].starts_with(|c: char| c.is_ascii_alphanumeric() || c == '-'))
        })
        .map(|(path, flag)| format!("{path} {flag}"))
        .collect()
}
