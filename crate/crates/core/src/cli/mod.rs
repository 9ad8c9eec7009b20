//! The `bpcalc` command-line front end.
//!
//! Exit codes: `0` success, `1` a checked bound was violated, `2` invalid
//! input or configuration, `3` a generator with spectrum in `Re λ > 0`.

mod config;
mod matrix;

pub use config::{parse_config, CONFIG_KEYS};
pub use matrix::{generator_from_matrix, parse_complex, parse_matrix};

use std::fs;
use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};

use crate::bernstein::BernsteinFunction;
use crate::calculus::apply_checked;
use crate::error::{Error, Result};
use crate::operators::IdealNorm;
use crate::quadrature::QuadratureSpec;
use crate::verify::{format_number, run_campaign, write_csv, write_records, OutputFormat, RECORD_FIELDS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SPECTRUM: i32 = 3;

const EVAL_GAP: f64 = 1e-8;

const SCHEMA_HELP: &str = "\
Report schema:
  records: line 1 is {\"campaign\":{config_digest,version,total,passed,failed,gated,errors}},
           then one JSON object per report with the fields below.
  csv:     '# key=value' header lines with the same campaign fields, then the columns
           name,lhs,rhs,margin,pass,hypotheses_met,instance_digest,norms_used
           with hypotheses_met encoded as label=true;label=false.
  Numbers carry 17 significant digits; JSON uses null and CSV uses nan/inf for
  non-finite values.";

#[derive(Debug, Parser)]
#[command(name = "bpcalc", version, about = "Bernstein functions of commuting semigroup generators", after_help = SCHEMA_HELP)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Records,
    Csv,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Records => OutputFormat::Records,
            Format::Csv => OutputFormat::Csv,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate ψ at a point with nonpositive coordinates, by closed form and by quadrature.
    Eval {
        /// Catalog name, e.g. sqrt, alpha:0.3, log, rat, poisson, sum:log,rat, diag:2:sqrt.
        psi: String,
        /// Comma-separated coordinates, e.g. -1 or -0.5,-2.
        #[arg(allow_hyphen_values = true)]
        point: String,
        /// Quadrature target tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Apply ψ to the generator in a matrix file.
    Apply {
        psi: String,
        /// First line `d`, then `d` rows of `a+bi` entries.
        matrix: String,
        #[arg(long)]
        tol: Option<f64>,
        /// Norm used for the printed ‖ψ(A)‖.
        #[arg(long, default_value = "operator")]
        norm: IdealNorm,
    },
    /// Run a verification campaign from a key=value configuration file.
    #[command(after_help = SCHEMA_HELP)]
    Verify {
        config: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        /// Quadrature target tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Norms to check; replaces the configured list when given.
        #[arg(long)]
        norm: Vec<IdealNorm>,
        /// Report path; stdout when absent.
        #[arg(long)]
        out: Option<String>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Print the report schema and the CSV column order.
    ReportSchema,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Spectrum(_) => EXIT_SPECTRUM,
        _ => EXIT_INPUT,
    }
}

fn spec_with(base: QuadratureSpec, tol: Option<f64>) -> Result<QuadratureSpec> {
    let mut spec = base;
    if let Some(t) = tol {
        spec.target_tol = t;
    }
    spec.validate()?;
    Ok(spec)
}

fn eval(psi: &str, point: &str, tol: Option<f64>, out: &mut dyn Write) -> Result<i32> {
    let psi = BernsteinFunction::from_name(psi)?;
    let s: Vec<f64> = point
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad coordinate `{x}`"))))
        .collect::<Result<_>>()?;
    let e = psi.evaluate_with_quadrature(&s, &spec_with(QuadratureSpec::scalar(), tol)?)?;
    if e.gap <= EVAL_GAP {
        writeln!(out, "{:?} (quadrature gap ≤ 1e-8)", e.closed_form)?;
    } else {
        writeln!(out, "{:?} (quadrature gap {:e} > 1e-8)", e.closed_form, e.gap)?;
    }
    writeln!(out, "quadrature {:?}", e.quadrature)?;
    Ok(EXIT_OK)
}

fn write_matrix(out: &mut dyn Write, m: &crate::operators::MatrixOp) -> Result<()> {
    writeln!(out, "{}", m.nrows())?;
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| {
                let z = m[(i, j)];
                let sign = if z.im.is_sign_negative() { '-' } else { '+' };
                format!("{}{sign}{}i", format_number(z.re), format_number(z.im.abs()))
            })
            .collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}

fn apply_cmd(psi: &str, path: &str, tol: Option<f64>, norm: IdealNorm, out: &mut dyn Write) -> Result<i32> {
    let psi = BernsteinFunction::from_name(psi)?;
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
    let a = generator_from_matrix(&parse_matrix(&text)?)?;
    let spec = spec_with(QuadratureSpec::matrix(), tol)?;
    let r = apply_checked(&psi, &a, &spec)?;
    write_matrix(out, &r.value)?;
    writeln!(out, "# certified={} M={}", a.certified(), format_number(a.bound_m()))?;
    writeln!(out, "# norm[{norm}]={}", format_number(norm.norm(&r.value)))?;
    writeln!(out, "# truncation_error={}", format_number(r.quadrature_diag.truncation_error))?;
    if let Some(res) = r.oracle_residual {
        writeln!(out, "# oracle_residual={}", format_number(res))?;
    }
    if r.flagged {
        writeln!(out, "# flagged: quadrature error estimate exceeds the target tolerance")?;
    }
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn verify_cmd(
    path: &str,
    seed: Option<u64>,
    trials: Option<usize>,
    tol: Option<f64>,
    norms: Vec<IdealNorm>,
    out_path: Option<String>,
    format: Option<Format>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
    let mut config = parse_config(&text)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    if let Some(t) = trials {
        config.trials = t;
    }
    config.quadrature = spec_with(config.quadrature, tol)?;
    if !norms.is_empty() {
        config.norms = norms;
    }
    if let Some(o) = out_path {
        config.output = Some(o);
    }
    if let Some(f) = format {
        config.format = f.into();
    }
    config.validate()?;
    let campaign = run_campaign(&config)?;
    let mut buf = Vec::new();
    match config.format {
        OutputFormat::Records => write_records(&mut buf, &config, &campaign)?,
        OutputFormat::Csv => write_csv(&mut buf, &config, &campaign)?,
    }
    match &config.output {
        Some(p) => fs::write(p, &buf).map_err(|e| Error::Io(format!("{p}: {e}")))?,
        None => out.write_all(&buf)?,
    }
    let t = campaign.totals();
    for (checker, seed, msg) in &campaign.errors {
        writeln!(err, "error: {checker} seed={seed}: {msg}")?;
    }
    writeln!(err, "{} reports: {} passed, {} failed, {} gated", t.reports, t.passed, t.failed, t.gated)?;
    Ok(if t.failed > 0 { EXIT_VIOLATION } else { EXIT_OK })
}

fn report_schema(out: &mut dyn Write) -> Result<i32> {
    writeln!(out, "{SCHEMA_HELP}")?;
    writeln!(out, "columns: {}", RECORD_FIELDS.join(","))?;
    writeln!(out, "config keys: {}", CONFIG_KEYS.join(", "))?;
    Ok(EXIT_OK)
}

/// Run with explicit arguments and streams; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{rendered}") } else { write!(err, "{rendered}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Eval { psi, point, tol } => eval(&psi, &point, tol, out),
        Command::Apply { psi, matrix, tol, norm } => apply_cmd(&psi, &matrix, tol, norm, out),
        Command::Verify { config, seed, trials, tol, norm, out: o, format } => {
            verify_cmd(&config, seed, trials, tol, norm, o, format, out, err)
        }
        Command::ReportSchema => report_schema(out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut full = vec!["bpcalc"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn eval_examples() {
        let (code, out, _) = run_args(&["eval", "sqrt", "--", "-4"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("-2.0 (quadrature gap ≤ 1e-8)"), "{out}");
        assert!(run_args(&["eval", "log", "-1"]).1.starts_with("-0.6931471805599453 "));
        assert!(run_args(&["eval", "alpha:0.25", "--", "-16"]).1.starts_with("-2.0 "));
        let (code, _, err) = run_args(&["eval", "cosh", "-1"]);
        assert_eq!(code, 2);
        assert!(err.contains("sqrt"));
        assert_eq!(run_args(&["eval", "sqrt", "1"]).0, 2);
        assert_eq!(run_args(&["eval", "sum:log,rat", "-1,-2"]).0, 0);
    }

    #[test]
    fn schema_lists_columns() {
        let (code, out, _) = run_args(&["report-schema"]);
        assert_eq!(code, 0);
        assert!(out.contains(&RECORD_FIELDS.join(",")));
    }
}
