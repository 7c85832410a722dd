use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::Signed;
use serde_json::{json, Value};

use sonc::certificate::CertMode;
use sonc::circuit::{circuit_number, circuit_zero, theta_compare, CircuitPoly, ThetaCmp};
use sonc::decompose::{decompose_with, DecomposeOptions, DecomposeOutcome};
use sonc::geom::Trellis;
use sonc::json;
use sonc::mediated::{is_h_trellis, lattice_points, maximal_mediated_set};
use sonc::poly::{parse_poly, Exponent, SparsePoly};
use sonc::verify::{verify_sonc, VerifyMode};

#[derive(Parser)]
#[command(name = "sonc", version, about = "Certify polynomial nonnegativity with circuit polynomials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Indent JSON output.
    #[arg(long, global = true)]
    pretty: bool,
    /// Write JSON here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PolyInput {
    /// Polynomial in x1..xn, e.g. "1 + x1^2 - 2*x1".
    #[arg(long, conflicts_with = "input")]
    poly: Option<String>,
    /// File holding the polynomial text.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Number of variables; defaults to the largest index used.
    #[arg(long)]
    nvars: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Eps,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a SONC certificate or a refutation.
    Decompose {
        #[command(flatten)]
        input: PolyInput,
        /// Seed for the randomized restarts.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check a certificate against a polynomial (the certificate's own by default).
    Verify {
        /// Certificate JSON file.
        cert: PathBuf,
        #[command(flatten)]
        input: PolyInput,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Relative tolerance in epsilon mode.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Maximal mediated set of a trellis, e.g. "0 4" or "0,0; 4,2; 2,4".
    Mediated {
        trellis: String,
        /// Multiply every trellis point by this factor first.
        #[arg(long, default_value_t = 1)]
        scale: u32,
    },
    /// Circuit number, nonnegativity and zero of a circuit polynomial.
    Circuit {
        #[command(flatten)]
        input: PolyInput,
    },
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn infer_nvars(text: &str) -> usize {
    let bytes = text.as_bytes();
    let mut n = 0;
    for (i, &b) in bytes.iter().enumerate() {
        if b == b'x' {
            let digits: String = bytes[i + 1..].iter().take_while(|c| c.is_ascii_digit()).map(|&c| c as char).collect();
            n = n.max(digits.parse().unwrap_or(0));
        }
    }
    n.max(1)
}

fn read_poly(input: &PolyInput) -> Result<Option<SparsePoly>, Failure> {
    let text = match (&input.poly, &input.input) {
        (Some(p), _) => p.clone(),
        (None, Some(path)) => std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?,
        (None, None) => return Ok(None),
    };
    let nvars = input.nvars.unwrap_or_else(|| infer_nvars(&text));
    Ok(Some(parse_poly(text.trim(), nvars)?))
}

fn require_poly(input: &PolyInput) -> Result<SparsePoly, Failure> {
    read_poly(input)?.ok_or_else(|| Failure("give a polynomial with --poly or --input".into()))
}

fn parse_trellis(spec: &str, scale: u32) -> Result<Trellis, Failure> {
    let groups: Vec<&str> = if spec.contains(';') || spec.contains(',') {
        spec.split(';').collect()
    } else {
        spec.split_whitespace().collect()
    };
    let points = groups
        .iter()
        .filter(|g| !g.trim().is_empty())
        .map(|g| {
            g.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    let k: u32 = s.parse().map_err(|_| Failure(format!("bad coordinate \"{s}\"")))?;
                    k.checked_mul(scale).ok_or_else(|| Failure("coordinate overflow".into()))
                })
                .collect::<Result<Vec<u32>, Failure>>()
                .map(Exponent)
        })
        .collect::<Result<Vec<_>, _>>()?;
    if points.is_empty() || points.iter().any(|p| p.nvars() != points[0].nvars()) {
        return Err(Failure("trellis points must be nonempty and share a dimension".into()));
    }
    Ok(Trellis::new(points)?)
}

fn decompose_cmd(input: &PolyInput, seed: u64) -> Result<(Value, u8), Failure> {
    let f = require_poly(input)?;
    let outcome = decompose_with(&f, &DecomposeOptions { seed });
    let code = match outcome {
        DecomposeOutcome::Sonc(_) => 0,
        DecomposeOutcome::NotSonc { .. } => 10,
        DecomposeOutcome::NotPsd { .. } => 11,
        DecomposeOutcome::Inconclusive { .. } => 12,
    };
    Ok((json::outcome(&outcome), code))
}

fn verify_cmd(cert: &PathBuf, input: &PolyInput, mode: Option<ModeArg>, eps: Option<f64>) -> Result<(Value, u8), Failure> {
    let text = std::fs::read_to_string(cert).map_err(|e| Failure(format!("{}: {e}", cert.display())))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| Failure(format!("{}: invalid JSON: {e}", cert.display())))?;
    // accept a bare certificate or the report written by `decompose`
    let cert = match doc.get("certificate") {
        Some(inner) => json::certificate_from_json(inner).map_err(|e| Failure(format!("/certificate{e}")))?,
        None => json::certificate_from_json(&doc).map_err(|e| Failure(format!("{e}")))?,
    };
    let f = read_poly(input)?.unwrap_or_else(|| cert.polynomial.clone());
    if f.nvars() != cert.nvars() {
        return Err(Failure(format!("polynomial has {} variables, certificate {}", f.nvars(), cert.nvars())));
    }
    if eps.is_some_and(|e| !(e > 0.0)) {
        return Err(Failure("--eps must be positive".into()));
    }
    let declared = match cert.mode {
        CertMode::Exact => None,
        CertMode::Epsilon(e) => Some(e),
    };
    let mode = match mode {
        Some(ModeArg::Exact) => VerifyMode::Exact,
        Some(ModeArg::Eps) => VerifyMode::Epsilon(eps.or(declared).unwrap_or(sonc::certificate::DEFAULT_EPSILON)),
        None => match (eps, declared) {
            (Some(e), _) | (None, Some(e)) => VerifyMode::Epsilon(e),
            (None, None) => VerifyMode::Exact,
        },
    };
    let report = verify_sonc(&cert, &f, mode);
    let code = if report.passed() { 0 } else { 1 };
    Ok((json::report(&report), code))
}

fn mediated_cmd(spec: &str, scale: u32) -> Result<(Value, u8), Failure> {
    let t = parse_trellis(spec, scale)?;
    let m = maximal_mediated_set(&t)?;
    let lattice = lattice_points(&t)?;
    let members: Vec<&Vec<u32>> = m.members.iter().map(|e| &e.0).collect();
    let removed: Vec<&Vec<u32>> = lattice.iter().filter(|e| !m.contains(e)).map(|e| &e.0).collect();
    Ok((
        json!({
            "trellis": t.points().iter().map(|e| &e.0).collect::<Vec<_>>(),
            "members": members,
            "lattice_points": lattice.len(),
            "not_mediated": removed,
            "is_h_trellis": is_h_trellis(&t)?,
        }),
        0,
    ))
}

fn circuit_cmd(input: &PolyInput) -> Result<(Value, u8), Failure> {
    let f = require_poly(input)?;
    let c = match CircuitPoly::from_poly(&f) {
        Ok(c) => c,
        Err(e) => {
            let squares_only = !f.is_zero() && f.terms().all(|(e, c)| e.is_even() && c.is_positive());
            let independent = Trellis::new(f.support()).is_ok();
            if squares_only && independent {
                return Ok((json!({ "is_circuit": true, "theta": null, "verdict": "nonnegative", "zero": null }), 0));
            }
            return Ok((json!({ "is_circuit": false, "verdict": "not_circuit", "reason": e.to_string() }), 0));
        }
    };
    let theta = circuit_number(&c);
    let cmp = theta_compare(&c);
    let trivially = c.beta().is_even() && !c.d.is_positive();
    let verdict = match (trivially, cmp) {
        (true, _) | (false, ThetaCmp::Below) => "nonnegative",
        (false, ThetaCmp::Equal) => "nonnegative_boundary",
        (false, ThetaCmp::Above) => "negative_somewhere",
    };
    let zero = if verdict == "nonnegative_boundary" { circuit_zero(&c).ok() } else { None };
    Ok((
        json!({
            "is_circuit": true,
            "theta": { "log": theta.log_value, "decimal": theta.value() },
            "d": json::rational(&c.d),
            "lambdas": c.lambdas().iter().map(json::rational).collect::<Vec<_>>(),
            "verdict": verdict,
            "zero": zero,
        }),
        0,
    ))
}

fn emit(value: &Value, cli: &Cli) -> Result<(), Failure> {
    let text = if cli.pretty { serde_json::to_string_pretty(value)? } else { value.to_string() };
    match &cli.out {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| Failure(format!("{}: {e}", path.display()))),
        None => match writeln!(std::io::stdout().lock(), "{text}") {
            // a closed pipe (e.g. `| head`) is the reader's choice, not an error
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure(format!("stdout: {e}"))),
            _ => Ok(()),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Decompose { input, seed } => decompose_cmd(input, *seed),
        Command::Verify { cert, input, mode, eps } => verify_cmd(cert, input, *mode, *eps),
        Command::Mediated { trellis, scale } => mediated_cmd(trellis, *scale),
        Command::Circuit { input } => circuit_cmd(input),
    };
    match result.and_then(|(value, code)| emit(&value, &cli).map(|_| code)) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
