//! Library half of the `kmest` binary: argument types, CSV ingestion,
//! report building and output encoding. `main` only parses and maps errors
//! to exit codes (0 ok, 1 usage/parse, 2 numerical, 3 equivalence failure).

pub mod args;
pub mod commands;
mod error;
pub mod input;
pub mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};

pub use args::Cli;
pub use error::CliError;

use args::{Command, Format, OutputArgs};

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Fit(a) => {
            let report = commands::fit_report(a)?;
            emit(&a.out, |w| match a.out.format {
                Format::Csv => output::write_fit_csv(&report, w),
                Format::Json => output::write_json(&report, w),
            })?;
            commands::check_equivalence(&report)
        }
        Command::BandConstant(a) => {
            let row = commands::band_constant_row(a)?;
            emit(&a.out, |w| match a.out.format {
                Format::Csv => output::write_rows_csv(&[row], &[], w),
                Format::Json => output::write_json(&row, w),
            })
        }
        Command::Coverage(a) => {
            let out = commands::coverage_output(a)?;
            emit(&a.out, |w| match a.out.format {
                Format::Csv => output::write_rows_csv(&out.rows, &out.footer(), w),
                Format::Json => output::write_json(&out, w),
            })
        }
    }
}

fn emit(
    out: &OutputArgs,
    write: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
) -> Result<(), CliError> {
    match &out.output {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            write(&mut w)?;
            w.flush()?;
        }
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            write(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}
