#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;
use dotx_core::Error;

use args::{Cli, Command};

const EXIT_USAGE: u8 = 1;
const EXIT_DOMAIN: u8 = 2;
const EXIT_CONVERGENCE: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Convergence { .. } | Error::Quadrature { .. } => EXIT_CONVERGENCE,
        Error::InvalidArgument(_) => EXIT_USAGE,
        _ => EXIT_DOMAIN,
    }
}

fn run(cli: Cli) -> dotx_core::Result<i32> {
    match cli.command {
        Command::Eval { point, format } => commands::eval(&point, format),
        Command::Sweep {
            point,
            range,
            steps,
            out,
        } => commands::sweep_cmd(&point, &range, steps, out),
        Command::Switch { point, range, tol, out } => commands::switch_cmd(&point, &range, tol, out),
        Command::Scenario {
            point,
            b_hold,
            e_overshoot,
            steps_per_phase,
            format,
            out,
        } => commands::scenario_cmd(&point, b_hold, e_overshoot, steps_per_phase, format, out),
        Command::Figure {
            id,
            out,
            material,
            c_override,
            derived_c,
        } => commands::figure_cmd(id, &out, &material, c_override, derived_c),
        Command::Oracle {
            material,
            c_override,
            b_values,
            d_values,
            e_field,
            threshold,
            quadrature,
            out,
        } => commands::oracle_cmd(
            &material,
            c_override,
            &b_values,
            &d_values,
            e_field,
            threshold,
            &quadrature,
            &out,
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
