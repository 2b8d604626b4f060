//! `fs`: command line front end for the fock-sobolev library.
//!
//! Every command prints a self-describing report (JSON or CSV with a JSON
//! config header) carrying the full run configuration, so results can be
//! reproduced from the output alone. Numeric values are emitted at working
//! precision as arbitrary-precision JSON numbers.
//!
//! Exit codes: 0 on success, 1 for usage and symbol errors, 2 for numerical
//! anomalies (non-convergence, route disagreement beyond tolerance, failed
//! verification entries).

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use rug::Float;
use serde::Serialize;
use serde_json::{Number, Value};

use fock_sobolev::berezin::{berezin, berezin_with_route, defect, Route};
use fock_sobolev::moments::{moment_closed, moment_quadrature, moment_series, MomentQuery};
use fock_sobolev::numerics::{
    float_to_decimal, kernel, kernel_closed, kernel_diag_estimate, DEFAULT_PRECISION_BITS,
    MIN_PRECISION_BITS,
};
use fock_sobolev::operators::{norm_scan, semicommutant, toeplitz_matrix, TruncatedOperator};
use fock_sobolev::symbols::{parse_symbol, AtomKind, HoloSymbol, SesquiSymbol};
use fock_sobolev::verify::{run_suite, Suite, VerifyReport};
use fock_sobolev::{Ctx, Error as LibError, PrecComplex};

/// Agreement thresholds between independent computation routes. Analytic
/// route pairs (series vs closed form) must match to near working precision;
/// quadrature is a coarser cross-check.
const ANALYTIC_AGREE_TOL: f64 = 1e-30;
const QUAD_AGREE_TOL: f64 = 1e-10;

const GRAMMAR_HELP: &str = "\
SYMBOL GRAMMAR (whitespace-insensitive):
  symbol  := term { \"+\" term }
  term    := factor { \"*\" factor }
  factor  := \"z^\" int | \"z\" | \"exp(\" cnum \")\" | \"ker(\" cnum \")\" | cnum
  cnum    := \"(\" real \",\" real \")\" | real
  real    := decimal [ \"pi\" ] | \"-\" real

A real with the \"pi\" suffix is scaled by pi (\"2pi\", \"-1pi\"; a bare \"pi\"
is not a token). A parenthesized pair whose non-zero components all carry
the suffix stays symbolically pi-scaled, so resonance conditions such as
exp((0,-2pi)) are recognized exactly. exp(c) denotes e^{cz}; ker(c) denotes
the reproducing kernel K_m(z, c) at the working order m. Products of two
kernel atoms, or of a kernel atom with a non-trivial exponential, are
rejected.

EXAMPLES:
  fs kernel --m 1 --z \"(1,0.5)\"
  fs moment --j 2 --k 1 --A \"(0.5,0)\" --B \"(0,1)\"
  fs semicomm --m 1 --N 8 --f \"exp((1,0))\" --g \"exp((0,-2pi))\"
  fs normscan --m 1 --f \"exp((2,0))\" --g \"exp((0,-1pi))\" --ns 8,16,32,64
  fs berezin --m 0 --f \"z^2\" --g \"z\" --grid \"-1:1:5,-1:1:5\" --route series
  fs dfg --m 1 --f \"exp((0,1pi))\" --g \"exp((2,0))\" --ts 1:5:9
  fs verify --suite all --out report.json
";

#[derive(Parser)]
#[command(
    name = "fs",
    version,
    about = "Toeplitz operators, semi-commutants and Berezin transforms on Fock-Sobolev spaces",
    after_long_help = GRAMMAR_HELP
)]
struct Cli {
    /// Working precision in bits (minimum 64). Overrides FS_PRECISION_BITS.
    #[arg(long, global = true)]
    precision: Option<u32>,

    /// Worker thread count; 0 keeps the default (one per logical CPU).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Report errors as one-line JSON on stderr.
    #[arg(long, global = true)]
    json_errors: bool,

    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Reproducing kernel K_m(z, w) by series and closed form (JSON).
    Kernel {
        /// Weight order m of the space.
        #[arg(long, default_value_t = 0)]
        m: u32,
        /// Evaluation point, e.g. "(1,0.5)".
        #[arg(long)]
        z: String,
        /// Second argument; defaults to z (diagonal, with growth estimate).
        #[arg(long)]
        w: Option<String>,
    },
    /// Gaussian monomial moment I_{j,k}(A, Bbar) by all routes (JSON).
    Moment {
        /// Power of conj(w) in the integrand.
        #[arg(long)]
        j: usize,
        /// Power of w in the integrand.
        #[arg(long)]
        k: usize,
        /// Exponential frequency A, e.g. "(0.5,0)".
        #[arg(long = "A")]
        a: String,
        /// Conjugate-side frequency Bbar (entered directly, not conjugated).
        #[arg(long = "B")]
        bbar: String,
    },
    /// Truncated Toeplitz matrix of f conj(g) at size N+1 (JSON).
    Toeplitz {
        #[arg(long, default_value_t = 0)]
        m: u32,
        /// Truncation index N; the matrix is (N+1) x (N+1).
        #[arg(long = "N")]
        n: usize,
        /// Holomorphic factor of the symbol.
        #[arg(long)]
        f: String,
        /// Conjugated holomorphic factor; defaults to the constant 1.
        #[arg(long, default_value = "1")]
        g: String,
    },
    /// Truncated semi-commutant T_{f conj(g)} - T_f T_conj(g) (JSON).
    Semicomm {
        #[arg(long, default_value_t = 0)]
        m: u32,
        /// Truncation index N; the matrix is (N+1) x (N+1).
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
    },
    /// Semi-commutant norm growth over truncation sizes (CSV).
    Normscan {
        #[arg(long, default_value_t = 0)]
        m: u32,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        /// Strictly increasing truncation indices, comma separated.
        #[arg(long, default_value = "8,16,32,64")]
        ns: String,
    },
    /// Berezin transform of f conj(g) over a grid (CSV).
    Berezin {
        #[arg(long, default_value_t = 0)]
        m: u32,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        /// Grid "re0:re1:n,im0:im1:n"; each axis is a uniform subdivision.
        #[arg(long)]
        grid: String,
        /// Route selection: auto, closed, series or quad.
        #[arg(long, default_value = "auto")]
        route: String,
    },
    /// Defect |f(z)|^2 |g(z)|^2 related growth witness along a ray (CSV).
    Dfg {
        #[arg(long, default_value_t = 0)]
        m: u32,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        /// Ray direction as a complex constant; z = t * ray.
        #[arg(long, default_value = "(1,0)")]
        ray: String,
        /// Parameters t: either "t0:t1:n" or a comma list like "1,2,5".
        #[arg(long, default_value = "1:5:5")]
        ts: String,
    },
    /// Run frozen verification catalogs and report pass/fail (JSON).
    Verify {
        /// all, theoremA, theoremB, boundedness, conjecture or identities.
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

enum Failure {
    Usage(String),
    Anomaly(String),
}

impl Failure {
    fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Anomaly(_) => "anomaly",
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Anomaly(m) => m,
        }
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Anomaly(_) => 2,
        }
    }
}

/// Syntax and hypothesis violations are the caller's problem; convergence
/// and search failures are anomalies of the computation itself.
fn from_lib(e: LibError) -> Failure {
    match e {
        LibError::Syntax { .. }
        | LibError::PowerCap { .. }
        | LibError::TermCap { .. }
        | LibError::UnsupportedProduct(_)
        | LibError::Hypothesis(_)
        | LibError::DegenerateZ => Failure::Usage(e.to_string()),
        LibError::NonConvergence { .. }
        | LibError::IterationCap { .. }
        | LibError::NegativeFactor { .. }
        | LibError::RowSearchFailed { .. } => Failure::Anomaly(e.to_string()),
    }
}

type CmdResult<T> = Result<T, Failure>;

#[derive(Serialize)]
struct RunConfig {
    precision_bits: u32,
    series_rel_tol: f64,
    zero_tol: f64,
    analytic_agree_tol: f64,
    quad_agree_tol: f64,
    power_cap: u32,
    term_cap: usize,
    threads: usize,
    timestamp_unix: u64,
}

impl RunConfig {
    fn collect(ctx: &Ctx) -> RunConfig {
        RunConfig {
            precision_bits: ctx.prec(),
            series_rel_tol: ctx.rel_tol().to_f64(),
            zero_tol: ctx.zero_tol().to_f64(),
            analytic_agree_tol: ANALYTIC_AGREE_TOL,
            quad_agree_tol: QUAD_AGREE_TOL,
            power_cap: ctx.power_cap(),
            term_cap: ctx.term_cap(),
            threads: rayon::current_num_threads(),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

/// Report text plus an optional anomaly: the report is always written before
/// the anomaly turns into exit code 2.
struct Rendered {
    text: String,
    anomaly: Option<String>,
}

impl Rendered {
    fn clean(text: String) -> Rendered {
        Rendered { text, anomaly: None }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let benign = matches!(
                e.kind(),
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion
            );
            // Help goes to stdout, usage errors to stderr; a closed pipe on
            // either is not worth a panic.
            let _ = e.print();
            return if benign { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    let json_errors = cli.json_errors;
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if json_errors {
                let line = serde_json::json!({
                    "error": { "kind": f.kind(), "message": f.message() }
                });
                eprintln!("{line}");
            } else {
                eprintln!("error: {}", f.message());
            }
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> CmdResult<()> {
    let prec = resolve_precision(cli.precision)?;
    if cli.threads > 0 {
        // Best effort: the global pool can only be configured once.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    let ctx = Ctx::new(prec);
    let config = RunConfig::collect(&ctx);
    let rendered = match &cli.cmd {
        Cmd::Kernel { m, z, w } => cmd_kernel(&ctx, &config, *m, z, w.as_deref())?,
        Cmd::Moment { j, k, a, bbar } => cmd_moment(&ctx, &config, *j, *k, a, bbar)?,
        Cmd::Toeplitz { m, n, f, g } => cmd_toeplitz(&ctx, &config, *m, *n, f, g)?,
        Cmd::Semicomm { m, n, f, g } => cmd_semicomm(&ctx, &config, *m, *n, f, g)?,
        Cmd::Normscan { m, f, g, ns } => cmd_normscan(&ctx, &config, *m, f, g, ns)?,
        Cmd::Berezin { m, f, g, grid, route } => {
            cmd_berezin(&ctx, &config, *m, f, g, grid, route)?
        }
        Cmd::Dfg { m, f, g, ray, ts } => cmd_dfg(&ctx, &config, *m, f, g, ray, ts)?,
        Cmd::Verify { suite } => cmd_verify(&ctx, &config, suite)?,
    };
    write_out(cli.out.as_deref(), &rendered.text)?;
    match rendered.anomaly {
        Some(msg) => Err(Failure::Anomaly(msg)),
        None => Ok(()),
    }
}

fn resolve_precision(flag: Option<u32>) -> CmdResult<u32> {
    let bits = match flag {
        Some(b) => b,
        None => match std::env::var("FS_PRECISION_BITS") {
            Ok(v) => v.trim().parse::<u32>().map_err(|_| {
                Failure::Usage(format!("FS_PRECISION_BITS is not an integer: {v:?}"))
            })?,
            Err(_) => DEFAULT_PRECISION_BITS,
        },
    };
    if bits < MIN_PRECISION_BITS {
        return Err(Failure::Usage(format!(
            "precision {bits} is below the minimum {MIN_PRECISION_BITS}"
        )));
    }
    Ok(bits)
}

fn write_out(out: Option<&Path>, text: &str) -> CmdResult<()> {
    match out {
        Some(p) => std::fs::write(p, format!("{text}\n"))
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            let done = stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.write_all(b"\n"))
                .and_then(|_| stdout.flush());
            match done {
                Ok(()) => Ok(()),
                // A reader that stopped early (fs ... | head) is fine.
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                Err(e) => Err(Failure::Usage(format!("cannot write to stdout: {e}"))),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// input parsing helpers

fn parse_sym(ctx: &Ctx, what: &str, text: &str) -> CmdResult<HoloSymbol> {
    parse_symbol(ctx, text).map_err(|e| Failure::Usage(format!("{what}: {e}")))
}

/// Parses a complex constant through the symbol grammar, so pi-suffixed
/// literals keep their exact pi scaling.
fn parse_point(ctx: &Ctx, what: &str, text: &str) -> CmdResult<PrecComplex> {
    let sym = parse_sym(ctx, what, text)?;
    let mut value = ctx.zero();
    for (coef, atom) in sym.terms() {
        if atom.power != 0 || !matches!(atom.kind, AtomKind::Poly) {
            return Err(Failure::Usage(format!(
                "{what}: expected a complex constant like (re,im), got {text:?}"
            )));
        }
        value = value.add(coef);
    }
    Ok(value)
}

fn parse_size_list(text: &str) -> CmdResult<Vec<usize>> {
    let mut ns = Vec::new();
    for part in text.split(',') {
        let n: usize = part
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("bad truncation size {:?}", part.trim())))?;
        if let Some(&last) = ns.last() {
            if n <= last {
                return Err(Failure::Usage(format!(
                    "truncation sizes must be strictly increasing, got {text}"
                )));
            }
        }
        ns.push(n);
    }
    Ok(ns)
}

/// "a:b:n" - n uniformly spaced samples from a to b inclusive.
fn parse_axis(what: &str, text: &str) -> CmdResult<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Failure::Usage(format!(
            "{what}: expected start:stop:count, got {text:?}"
        )));
    }
    let a: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("{what}: bad number {:?}", parts[0])))?;
    let b: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("{what}: bad number {:?}", parts[1])))?;
    let n: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("{what}: bad count {:?}", parts[2])))?;
    if n == 0 {
        return Err(Failure::Usage(format!("{what}: count must be positive")));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    let step = (b - a) / (n - 1) as f64;
    Ok((0..n).map(|i| a + step * i as f64).collect())
}

fn parse_ts(text: &str) -> CmdResult<Vec<f64>> {
    if text.contains(':') {
        return parse_axis("--ts", text);
    }
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Usage(format!("--ts: bad number {:?}", p.trim())))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// output helpers

fn jnum(x: &Float) -> Value {
    Value::Number(Number::from_string_unchecked(float_to_decimal(x)))
}

fn jpair(v: &PrecComplex) -> Value {
    Value::Array(vec![jnum(&v.re()), jnum(&v.im())])
}

fn pretty<T: Serialize>(out: &T) -> String {
    serde_json::to_string_pretty(out).expect("report serialization cannot fail")
}

fn csv_header(config: &RunConfig, columns: &str) -> String {
    let cfg = serde_json::to_string(config).expect("config serialization cannot fail");
    format!("# config: {cfg}\n{columns}")
}

// ---------------------------------------------------------------------------
// commands

#[derive(Serialize)]
struct KernelOut<'a> {
    config: &'a RunConfig,
    m: u32,
    z: Value,
    w: Value,
    series: Value,
    closed: Option<Value>,
    series_closed_rel: Option<f64>,
    diag_estimate: Option<Value>,
    diag_ratio: Option<f64>,
}

fn cmd_kernel(
    ctx: &Ctx,
    config: &RunConfig,
    m: u32,
    z_text: &str,
    w_text: Option<&str>,
) -> CmdResult<Rendered> {
    let z = parse_point(ctx, "--z", z_text)?;
    let diagonal = w_text.is_none();
    let w = match w_text {
        Some(t) => parse_point(ctx, "--w", t)?,
        None => z.clone(),
    };
    let series = kernel(ctx, &z, &w, m);
    let closed = kernel_closed(ctx, &z, &w, m);
    let rel = closed.as_ref().map(|c| series.rel_diff(c).to_f64());
    let (diag_estimate, diag_ratio) = if diagonal {
        let est = kernel_diag_estimate(ctx, &z, m);
        let ratio = (series.abs() / &est).to_f64();
        (Some(jnum(&est)), Some(ratio))
    } else {
        (None, None)
    };
    let out = KernelOut {
        config,
        m,
        z: jpair(&z),
        w: jpair(&w),
        series: jpair(&series),
        closed: closed.as_ref().map(jpair),
        series_closed_rel: rel,
        diag_estimate,
        diag_ratio,
    };
    let anomaly = match rel {
        Some(r) if r > ANALYTIC_AGREE_TOL => Some(format!(
            "kernel series and closed form disagree: relative difference {r:.3e}"
        )),
        _ => None,
    };
    Ok(Rendered { text: pretty(&out), anomaly })
}

#[derive(Serialize)]
struct MomentRoutes {
    closed: Value,
    series: Value,
    quad: Value,
}

#[derive(Serialize)]
struct MomentRel {
    closed_series: f64,
    closed_quad: f64,
}

#[derive(Serialize)]
struct MomentOut<'a> {
    config: &'a RunConfig,
    j: usize,
    k: usize,
    #[serde(rename = "A")]
    a: Value,
    #[serde(rename = "Bbar")]
    bbar: Value,
    value: Value,
    routes: MomentRoutes,
    rel: MomentRel,
    quad_err_estimate: Value,
}

fn cmd_moment(
    ctx: &Ctx,
    config: &RunConfig,
    j: usize,
    k: usize,
    a_text: &str,
    b_text: &str,
) -> CmdResult<Rendered> {
    let a = parse_point(ctx, "--A", a_text)?;
    let bbar = parse_point(ctx, "--B", b_text)?;
    let q = MomentQuery { j, k, a, bbar };
    let closed = moment_closed(ctx, &q);
    let series = moment_series(ctx, &q).map_err(from_lib)?;
    let quad = moment_quadrature(ctx, &q);
    let rel_cs = closed.value.rel_diff(&series.value).to_f64();
    let rel_cq = closed.value.rel_diff(&quad.value).to_f64();
    let out = MomentOut {
        config,
        j,
        k,
        a: jpair(&q.a),
        bbar: jpair(&q.bbar),
        value: jpair(&closed.value),
        routes: MomentRoutes {
            closed: jpair(&closed.value),
            series: jpair(&series.value),
            quad: jpair(&quad.value),
        },
        rel: MomentRel { closed_series: rel_cs, closed_quad: rel_cq },
        quad_err_estimate: jnum(&quad.err_estimate),
    };
    let anomaly = if rel_cs > ANALYTIC_AGREE_TOL {
        Some(format!(
            "moment closed and series routes disagree: relative difference {rel_cs:.3e}"
        ))
    } else if rel_cq > QUAD_AGREE_TOL {
        Some(format!(
            "moment closed and quadrature routes disagree: relative difference {rel_cq:.3e}"
        ))
    } else {
        None
    };
    Ok(Rendered { text: pretty(&out), anomaly })
}

#[derive(Serialize)]
struct MatrixOut<'a> {
    config: &'a RunConfig,
    m: u32,
    #[serde(rename = "N")]
    n: usize,
    /// Row-major [re, im] pairs, (N+1)^2 of them.
    entries: Vec<Value>,
}

fn matrix_out<'a>(config: &'a RunConfig, t: &TruncatedOperator) -> MatrixOut<'a> {
    let dim = t.size();
    let mut entries = Vec::with_capacity(dim * dim);
    for r in 0..dim {
        for c in 0..dim {
            entries.push(jpair(t.entry(r, c)));
        }
    }
    MatrixOut { config, m: t.m, n: t.n, entries }
}

fn cmd_toeplitz(
    ctx: &Ctx,
    config: &RunConfig,
    m: u32,
    n: usize,
    f_text: &str,
    g_text: &str,
) -> CmdResult<Rendered> {
    let f = parse_sym(ctx, "--f", f_text)?;
    let g = parse_sym(ctx, "--g", g_text)?;
    let s = SesquiSymbol::new(f, g);
    let t = toeplitz_matrix(ctx, &s, m, n).map_err(from_lib)?;
    Ok(Rendered::clean(pretty(&matrix_out(config, &t))))
}

fn cmd_semicomm(
    ctx: &Ctx,
    config: &RunConfig,
    m: u32,
    n: usize,
    f_text: &str,
    g_text: &str,
) -> CmdResult<Rendered> {
    let f = parse_sym(ctx, "--f", f_text)?;
    let g = parse_sym(ctx, "--g", g_text)?;
    let s = semicommutant(ctx, &f, &g, m, n).map_err(from_lib)?;
    Ok(Rendered::clean(pretty(&matrix_out(config, &s))))
}

fn cmd_normscan(
    ctx: &Ctx,
    config: &RunConfig,
    m: u32,
    f_text: &str,
    g_text: &str,
    ns_text: &str,
) -> CmdResult<Rendered> {
    let f = parse_sym(ctx, "--f", f_text)?;
    let g = parse_sym(ctx, "--g", g_text)?;
    let ns = parse_size_list(ns_text)?;
    let scan = norm_scan(ctx, &f, &g, m, &ns).map_err(from_lib)?;
    let mut text = csv_header(config, "N,norm,classification");
    for p in &scan.points {
        text.push_str(&format!(
            "\n{},{},{}",
            p.n,
            float_to_decimal(&p.norm),
            scan.classification.name()
        ));
    }
    Ok(Rendered::clean(text))
}

fn cmd_berezin(
    ctx: &Ctx,
    config: &RunConfig,
    m: u32,
    f_text: &str,
    g_text: &str,
    grid_text: &str,
    route_text: &str,
) -> CmdResult<Rendered> {
    let f = parse_sym(ctx, "--f", f_text)?;
    let g = parse_sym(ctx, "--g", g_text)?;
    let s = SesquiSymbol::new(f, g);
    let route = match route_text {
        "auto" => None,
        "closed" => Some(Route::Closed),
        "series" => Some(Route::Series),
        "quad" => Some(Route::Quadrature),
        other => {
            return Err(Failure::Usage(format!(
                "--route must be auto, closed, series or quad, got {other:?}"
            )))
        }
    };
    let (re_text, im_text) = grid_text.split_once(',').ok_or_else(|| {
        Failure::Usage(format!(
            "--grid: expected re0:re1:n,im0:im1:n, got {grid_text:?}"
        ))
    })?;
    let res = parse_axis("--grid (real axis)", re_text)?;
    let ims = parse_axis("--grid (imaginary axis)", im_text)?;
    let mut points = Vec::with_capacity(res.len() * ims.len());
    for re in &res {
        for im in &ims {
            points.push(ctx.complex(*re, *im));
        }
    }
    let samples = points
        .par_iter()
        .map(|z| match route {
            None => berezin(ctx, &s, m, z),
            Some(r) => berezin_with_route(ctx, &s, m, z, r),
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(from_lib)?;
    let mut text = csv_header(config, "re,im,value_re,value_im,route");
    for sample in &samples {
        text.push_str(&format!(
            "\n{},{},{},{},{}",
            float_to_decimal(&sample.z.re()),
            float_to_decimal(&sample.z.im()),
            float_to_decimal(&sample.value.re()),
            float_to_decimal(&sample.value.im()),
            sample.route.name()
        ));
    }
    Ok(Rendered::clean(text))
}

fn cmd_dfg(
    ctx: &Ctx,
    config: &RunConfig,
    m: u32,
    f_text: &str,
    g_text: &str,
    ray_text: &str,
    ts_text: &str,
) -> CmdResult<Rendered> {
    let f = parse_sym(ctx, "--f", f_text)?;
    let g = parse_sym(ctx, "--g", g_text)?;
    let ray = parse_point(ctx, "--ray", ray_text)?;
    if ray.is_zero() {
        return Err(Failure::Usage("--ray must be non-zero".into()));
    }
    let ts = parse_ts(ts_text)?;
    let rows = ts
        .par_iter()
        .map(|&t| {
            let z = ray.scale(&ctx.float(t));
            defect(ctx, &f, &g, m, &z).map(|d| (t, z, d))
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(from_lib)?;
    let mut text = csv_header(config, "t,z_re,z_im,defect");
    for (t, z, d) in &rows {
        text.push_str(&format!(
            "\n{},{},{},{}",
            t,
            float_to_decimal(&z.re()),
            float_to_decimal(&z.im()),
            float_to_decimal(d)
        ));
    }
    Ok(Rendered::clean(text))
}

#[derive(Serialize)]
struct VerifyOut<'a> {
    config: &'a RunConfig,
    passed: usize,
    failed: usize,
    reports: Vec<VerifyReport>,
}

fn cmd_verify(ctx: &Ctx, config: &RunConfig, suite_text: &str) -> CmdResult<Rendered> {
    let suites = Suite::select(suite_text).ok_or_else(|| {
        Failure::Usage(format!(
            "--suite must be all, theoremA, theoremB, boundedness, conjecture or identities, got {suite_text:?}"
        ))
    })?;
    let reports: Vec<VerifyReport> = suites.iter().map(|s| run_suite(ctx, *s)).collect();
    let passed = reports.iter().map(|r| r.passed).sum();
    let failed = reports.iter().map(|r| r.failed).sum();
    let out = VerifyOut { config, passed, failed, reports };
    let anomaly = if failed > 0 {
        Some(format!("{failed} verification entries failed"))
    } else {
        None
    };
    Ok(Rendered { text: pretty(&out), anomaly })
}
