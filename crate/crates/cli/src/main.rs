mod args;
mod commands;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, UsageError};

fn is_usage(e: &anyhow::Error) -> bool {
    if e.is::<UsageError>() {
        return true;
    }
    matches!(
        e.downcast_ref::<xxness::Error>(),
        Some(
            xxness::Error::InvalidParams(_)
                | xxness::Error::InvalidGrid(_)
                | xxness::Error::SizeLimit { .. }
                | xxness::Error::OutOfRange { .. }
                | xxness::Error::SiteIndex { .. }
        )
    )
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = cli.settings.resolve().and_then(|s| {
        if let Some(t) = s.threads {
            rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
        }
        commands::run(cli.command, &s)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_usage(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
