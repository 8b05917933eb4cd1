use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use oestrip::config::{Format, Mode, Overrides, RunConfig};
use oestrip::run::{exit_code, run};
use oestrip::CaseSelection;

/// Directivity of an impedance strip by OE-equation marching and a
/// boundary-integral reference.
#[derive(Parser, Debug)]
#[command(version)]
struct Cli {
    /// TOML configuration file; omitted keys take default values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    case: Option<CaseArg>,
    #[arg(long)]
    k0a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    eta_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    eta_im: Option<f64>,
    #[arg(long)]
    theta_inc_deg: Option<f64>,
    #[arg(long)]
    n_gamma: Option<usize>,
    #[arg(long)]
    n_panels: Option<usize>,
    #[arg(long)]
    n_theta: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    verbose: bool,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    Oe,
    Bie,
    Compare,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum CaseArg {
    Antisym,
    Sym,
    Total,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum FormatArg {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let mut config = match &cli.config {
        Some(path) => match RunConfig::from_file(path) {
            Ok(c) => c,
            Err(e) => return fail(&e),
        },
        None => RunConfig::default(),
    };
    config.apply(&Overrides {
        mode: cli.mode.map(|m| match m {
            ModeArg::Oe => Mode::Oe,
            ModeArg::Bie => Mode::Bie,
            ModeArg::Compare => Mode::Compare,
        }),
        case: cli.case.map(|c| match c {
            CaseArg::Antisym => CaseSelection::Antisym,
            CaseArg::Sym => CaseSelection::Sym,
            CaseArg::Total => CaseSelection::Total,
        }),
        k0a: cli.k0a,
        eta_re: cli.eta_re,
        eta_im: cli.eta_im,
        theta_inc_deg: cli.theta_inc_deg,
        n_gamma: cli.n_gamma,
        n_panels: cli.n_panels,
        n_theta: cli.n_theta,
        out: cli.out,
        format: cli.format.map(|f| match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }),
    });

    match run(&config) {
        Ok((out, files)) => {
            if let Some(c) = &out.compare {
                for (name, l2) in &c.l2_rel {
                    println!("{name}: L2 {l2:.4e}  Linf {:.4e}", c.linf_rel[name]);
                }
            }
            for f in files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &oestrip::Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code(e) as u8)
}
