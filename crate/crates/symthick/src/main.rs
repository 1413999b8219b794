//! Command-line driver.
//!
//! Exit codes are a stable contract for CI use:
//!   0  every check passed
//!   1  a check failed (or `thicken --route both` found inequivalent routes)
//!   2  input or usage error (bad manifest, I/O failure, construction error)

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use symthick::emit::render_form;
use symthick::manifest::Manifest;
use symthick::thickening::{
    classical_thickening, cotangent_thickening, equivalence_check, momentum_embedding,
};
use symthick::verify::{full_report, report::fmt_f64};

#[derive(Parser)]
#[command(
    name = "symthick",
    about = "Build and verify symplectic thickenings of pre-symplectic manifolds in Darboux coordinates"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the full verification battery for a manifest.
    Verify {
        /// Manifest path ([manifold]/[connection]/[verify] sections).
        manifest: PathBuf,
        /// Write the structured report (one record per line) to this file.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Override the manifest seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the manifest sample count.
        #[arg(long)]
        samples: Option<usize>,
        /// Negative control: corrupt the checked base form with a non-closed
        /// probe term; the closedness check must fail (exit 1).
        #[arg(long)]
        probe_non_closed: bool,
    },
    /// Build the thickened form and emit its coefficient table.
    Thicken {
        manifest: PathBuf,
        /// Which construction to run.
        #[arg(long, value_enum)]
        route: Route,
        /// Also write the emitted text to this file.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Route {
    Classical,
    Cotangent,
    Both,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.cmd {
        Cmd::Verify {
            manifest,
            report,
            seed,
            samples,
            probe_non_closed,
        } => {
            let manifest = Manifest::load(&manifest).map_err(|e| e.to_string())?;
            let model = manifest.model().map_err(|e| e.to_string())?;
            let conn = manifest.connection().map_err(|e| e.to_string())?;
            let mut opts = manifest.verify_options();
            if let Some(seed) = seed {
                opts.seed = seed;
            }
            if let Some(samples) = samples {
                opts.samples = samples;
            }
            opts.probe_non_closed = probe_non_closed;
            let result = full_report(&model, &conn, &opts).map_err(|e| e.to_string())?;
            print!("{}", result.render_text());
            if let Some(path) = report {
                std::fs::write(&path, result.render_structured())
                    .map_err(|e| format!("cannot write report to {}: {e}", path.display()))?;
            }
            Ok(if result.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Cmd::Thicken {
            manifest,
            route,
            emit,
        } => {
            let manifest = Manifest::load(&manifest).map_err(|e| e.to_string())?;
            let model = manifest.model().map_err(|e| e.to_string())?;
            let conn = manifest.connection().map_err(|e| e.to_string())?;
            let mut out = String::new();
            let mut equivalent = true;
            match route {
                Route::Classical => {
                    let tm = classical_thickening(&conn, &model).map_err(|e| e.to_string())?;
                    out.push_str("route: classical\n");
                    out.push_str(&render_form(tm.omega_tilde()));
                }
                Route::Cotangent => {
                    let tm = cotangent_thickening(&conn, &model).map_err(|e| e.to_string())?;
                    out.push_str("route: cotangent\n");
                    out.push_str(&render_form(tm.omega_tilde()));
                    out.push_str(&render_embedding(&conn, &model)?);
                }
                Route::Both => {
                    let classical =
                        classical_thickening(&conn, &model).map_err(|e| e.to_string())?;
                    let cotangent =
                        cotangent_thickening(&conn, &model).map_err(|e| e.to_string())?;
                    out.push_str("route: classical\n");
                    out.push_str(&render_form(classical.omega_tilde()));
                    out.push_str("\nroute: cotangent\n");
                    out.push_str(&render_form(cotangent.omega_tilde()));
                    out.push_str(&render_embedding(&conn, &model)?);
                    let outcome =
                        equivalence_check(&classical, &cotangent, manifest.samples, manifest.seed)
                            .map_err(|e| e.to_string())?;
                    equivalent = outcome.tables_match
                        && outcome.max_residual < manifest.tolerances.equivalence;
                    out.push_str(&format!("\nequivalent: {equivalent}\n"));
                    out.push_str(&format!(
                        "max-residual: {}\n",
                        fmt_f64(outcome.max_residual)
                    ));
                }
            }
            print!("{out}");
            if let Some(path) = emit {
                std::fs::write(&path, &out)
                    .map_err(|e| format!("cannot write emitted form to {}: {e}", path.display()))?;
            }
            Ok(if equivalent {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn render_embedding(
    conn: &symthick::Connection,
    model: &symthick::PresymplecticModel,
) -> Result<String, String> {
    let embedding = momentum_embedding(conn, model).map_err(|e| e.to_string())?;
    let source = embedding.source();
    let target = embedding.target();
    let mut out = String::from("embedding:\n");
    for (t, component) in embedding.components().iter().enumerate() {
        out.push_str(&format!(
            "{} = {}\n",
            target.name(t),
            component.normalize().display(source)
        ));
    }
    Ok(out)
}
