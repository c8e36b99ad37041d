use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use chansteer::Tolerances;
use chansteer_cli::commands::{self, ExtremalityMode, Target, VerifyMode};
use chansteer_cli::doc::{self, DocError};
use chansteer_cli::{Document, Report, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "chansteer", version, about = "Verify and certify channel assemblages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true, value_enum, default_value = "json")]
    output: Output,
    /// Absolute tolerance on entries, traces and overlaps.
    #[arg(long, global = true, default_value_t = Tolerances::default().abs_tol)]
    abs_tol: f64,
    /// Relative singular-value threshold for ranks and nullspaces.
    #[arg(long, global = true, default_value_t = Tolerances::default().rank_rel_tol)]
    rank_tol: f64,
    /// Residual threshold of nonnegative least squares.
    #[arg(long, global = true, default_value_t = Tolerances::default().nnls_residual_tol)]
    nnls_tol: f64,
    /// Print the elapsed time to stderr.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// No-signaling, CPTP or asymmetric no-signaling check.
    Verify {
        file: PathBuf,
        #[arg(long, value_enum)]
        mode: VerifyMode,
    },
    /// Choi form of a channel, or the channel assemblage of a realization.
    Choi {
        file: PathBuf,
        /// Also write the produced document here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank-nullity extremality analysis of a pure-member assemblage.
    Extremality {
        file: PathBuf,
        #[arg(long, value_enum)]
        mode: ExtremalityMode,
        /// Write the certificate JSON here.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Decide whether a pure-member assemblage has a local hidden state model.
    Lhs { file: PathBuf },
    /// Perfect-key test and pinning certificate at the key settings.
    SecurityCert {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        x_star: usize,
        #[arg(long, default_value_t = 0)]
        y_star: usize,
        /// Input state document; defaults to |0><0|.
        #[arg(long)]
        rho: Option<PathBuf>,
        /// Measurement document for the output; defaults to the computational basis.
        #[arg(long)]
        charlie: Option<PathBuf>,
    },
    /// Recompute a worked example and compare with the bundled values.
    Reproduce {
        #[arg(value_enum)]
        target: Target,
    },
    /// Print the JSON Schema of input documents.
    Schema,
}

fn load_optional(path: Option<&PathBuf>) -> Result<Option<Document>, DocError> {
    path.map(|p| commands::load(p)).transpose()
}

fn dispatch(command: &Command, tol: Tolerances) -> Report {
    let with_doc = |name: &str, file: &PathBuf, f: &dyn Fn(&Document) -> Report| match commands::load(file) {
        Ok(d) => f(&d),
        Err(e) => Report::input_error(name, &e, tol),
    };
    match command {
        Command::Verify { file, mode } => with_doc("verify", file, &|d| commands::verify(d, *mode, tol)),
        Command::Choi { file, out } => with_doc("choi", file, &|d| {
            let (report, produced) = commands::choi(d, tol);
            match (out, produced) {
                (Some(path), Some(doc)) => match std::fs::write(path, doc.to_json() + "\n") {
                    Ok(()) => report,
                    Err(e) => Report::input_error(
                        "choi",
                        &DocError::Invalid { message: format!("cannot write {}: {e}", path.display()) },
                        tol,
                    ),
                },
                _ => report,
            }
        }),
        Command::Extremality { file, mode, certificate } => {
            with_doc("extremality", file, &|d| commands::extremality(d, *mode, certificate.as_deref(), tol))
        }
        Command::Lhs { file } => with_doc("lhs", file, &|d| commands::lhs(d, tol)),
        Command::SecurityCert { file, x_star, y_star, rho, charlie } => with_doc("security-cert", file, &|d| {
            match (load_optional(rho.as_ref()), load_optional(charlie.as_ref())) {
                (Ok(r), Ok(c)) => commands::security_cert(d, *x_star, *y_star, r.as_ref(), c.as_ref(), tol),
                (Err(e), _) | (_, Err(e)) => Report::input_error("security-cert", &e, tol),
            }
        }),
        Command::Reproduce { target } => commands::reproduce(*target, tol),
        Command::Schema => Report::new("schema", Status::Pass, doc::schema(), tol),
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which is the INCONCLUSIVE code here.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Status::InputError.exit_code() } else { 0 });
        }
    };
    let start = Instant::now();
    let report = match Tolerances::new(cli.abs_tol, cli.rank_tol, cli.nnls_tol) {
        Ok(tol) => dispatch(&cli.command, tol),
        Err(e) => Report::input_error(
            "tolerances",
            &DocError::Invalid { message: e.to_string() },
            Tolerances::default(),
        ),
    };
    match cli.output {
        Output::Json => println!("{}", report.to_json()),
        Output::Text => print!("{}", report.to_text()),
    }
    if cli.timing {
        eprintln!("elapsed: {:.3} s", start.elapsed().as_secs_f64());
    }
    ExitCode::from(report.status.exit_code())
}
