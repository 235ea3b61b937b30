mod args;
mod commands;
mod output;

use clap::Parser;
use reslab_core::billiard::BilliardError;
use reslab_core::constructor::ConstructError;
use reslab_core::periods::PeriodError;
use reslab_core::polygon::PolygonError;
use reslab_core::potential::PotentialError;
use reslab_core::quasiperiodic::QpError;
use reslab_core::relation::RelationError;
use reslab_core::resonance::ResonanceError;
use reslab_core::simulate::SimError;
use std::process::ExitCode;

const EX_USAGE: u8 = 64;
const EX_DATAERR: u8 = 65;
const EX_SOFTWARE: u8 = 70;

fn billiard_internal(e: &BilliardError) -> bool {
    matches!(
        e,
        BilliardError::IdentityViolation { .. }
            | BilliardError::SignRuleViolated { .. }
            | BilliardError::ExtremeSideNegative { .. }
    )
}

/// 65 for bad input, 70 when a computed result failed its own consistency check.
fn exit_status(e: &anyhow::Error) -> u8 {
    if let Some(b) = e.downcast_ref::<BilliardError>() {
        return if billiard_internal(b) {
            EX_SOFTWARE
        } else {
            EX_DATAERR
        };
    }
    if let Some(ResonanceError::Billiard(b)) = e.downcast_ref::<ResonanceError>() {
        return if billiard_internal(b) {
            EX_SOFTWARE
        } else {
            EX_DATAERR
        };
    }
    if let Some(s) = e.downcast_ref::<SimError>() {
        return match s {
            SimError::Billiard(b) if billiard_internal(b) => EX_SOFTWARE,
            SimError::EventLocalizationFailure(_)
            | SimError::EnergyDriftExceeded { .. }
            | SimError::StepSizeUnderflow(_) => EX_SOFTWARE,
            _ => EX_DATAERR,
        };
    }
    let data = e.is::<output::DataError>()
        || e.is::<PotentialError>()
        || e.is::<PolygonError>()
        || e.is::<PeriodError>()
        || e.is::<ResonanceError>()
        || e.is::<RelationError>()
        || e.is::<QpError>()
        || e.is::<ConstructError>();
    if data {
        EX_DATAERR
    } else {
        EX_SOFTWARE
    }
}

fn threads(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| std::env::var("RESLAB_THREADS").ok()?.parse().ok())
        .filter(|&n| n > 0)
}

fn main() -> ExitCode {
    let cli = match args::Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EX_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(n) = threads(cli.threads) {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let result = output::Output::new(cli.out.clone(), cli.format)
        .and_then(|out| commands::run(cli.command, &out));
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_status(&e))
        }
    }
}
