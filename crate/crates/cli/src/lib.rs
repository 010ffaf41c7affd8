//! `newton-cycles` command line.
//!
//! Every subcommand prints one JSON object on stdout. Failures print a single
//! `error: <Kind>: <message>` line on stderr and exit with 1 for domain errors
//! or 2 for usage errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use newton_cycles::family::{self, find_brackets, FamilyParams};
use newton_cycles::render::{self, Palette, RenderSpec, Window};
use newton_cycles::sharpness::{self, MAX_CERTIFIED_N};
use newton_cycles::synthesis::{self, Cycle};
use newton_cycles::verify::{self, CycleReport};
use newton_cycles::{json as nj, Complex64, Error, Relaxation};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "newton-cycles",
    version,
    about = "Super-attracting cycles of Newton maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Polynomial whose Newton map has the given super-attracting cycle.
    Synth(SynthArgs),
    /// Real cycle of length n for a degree-d polynomial from the f_c family.
    Family(FamilyArgs),
    /// Bracketing sequences c_k and b_k.
    Brackets(BracketsArgs),
    /// Minimal-degree certificate for the n-th roots of unity.
    Sharp(SharpArgs),
    /// Check a claimed super-attracting cycle.
    Verify(VerifyArgs),
    /// Basins of attraction as a binary PPM.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Cycle as a JSON list of [re, im] pairs.
    #[arg(long)]
    cycle: String,
    /// Relaxation parameter `re,im`.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    h: Option<Complex64>,
    /// Degree bound; defaults to n + 1.
    #[arg(long)]
    degree: Option<usize>,
}

#[derive(Debug, Args)]
struct FamilyArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    n: usize,
    /// Leading coefficient `re,im` of the emitted polynomial.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    coeff_scale: Option<Complex64>,
}

#[derive(Debug, Args)]
struct BracketsArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    k: usize,
}

#[derive(Debug, Args)]
struct SharpArgs {
    #[arg(long)]
    n: usize,
    /// Allow n above the certified range.
    #[arg(long)]
    force: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Ascending coefficients as a JSON list of [re, im] pairs.
    #[arg(long)]
    poly: String,
    #[arg(long)]
    cycle: String,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    h: Option<Complex64>,
}

#[derive(Debug, Args)]
struct RenderArgs {
    #[arg(long)]
    poly: String,
    /// Cycle to color as its own basin; `[]` for roots only.
    #[arg(long)]
    cycle: String,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    center: Complex64,
    /// Window extent `WxH` in plane units.
    #[arg(long, value_parser = parse_extent)]
    size: (f64, f64),
    /// Resolution `WxH` in pixels.
    #[arg(long, value_parser = parse_pixels)]
    pixels: (usize, usize),
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    h: Option<Complex64>,
    #[arg(long, default_value_t = render::DEFAULT_MAX_ITER)]
    max_iter: u32,
    #[arg(long, default_value_t = render::DEFAULT_ATTRACT_TOL)]
    attract_tol: f64,
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let (re, im) = s.split_once(',').unwrap_or((s, "0"));
    let re: f64 = re
        .trim()
        .parse()
        .map_err(|_| format!("bad real part in {s:?}"))?;
    let im: f64 = im
        .trim()
        .parse()
        .map_err(|_| format!("bad imaginary part in {s:?}"))?;
    if !(re.is_finite() && im.is_finite()) {
        return Err(format!("non-finite value {s:?}"));
    }
    Ok(Complex64::new(re, im))
}

fn split_x(s: &str) -> Result<(&str, &str), String> {
    s.split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got {s:?}"))
}

fn parse_extent(s: &str) -> Result<(f64, f64), String> {
    let (w, h) = split_x(s)?;
    let w: f64 = w.parse().map_err(|_| format!("bad width in {s:?}"))?;
    let h: f64 = h.parse().map_err(|_| format!("bad height in {s:?}"))?;
    if !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()) {
        return Err(format!("extent must be positive, got {s:?}"));
    }
    Ok((w, h))
}

fn parse_pixels(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = split_x(s)?;
    let w: usize = w.parse().map_err(|_| format!("bad width in {s:?}"))?;
    let h: usize = h.parse().map_err(|_| format!("bad height in {s:?}"))?;
    if w == 0 || h == 0 {
        return Err(format!("resolution must be at least 1x1, got {s:?}"));
    }
    Ok((w, h))
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(msg) => Failure::Usage(msg),
            other => Failure::Domain(other),
        }
    }
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Io<'_> {
    fn warn(&mut self, msg: &str) {
        let _ = writeln!(self.err, "warning: {msg}");
    }

    fn emit(&mut self, value: &Value) {
        let _ = writeln!(self.out, "{}", nj::to_string(value));
    }
}

fn relaxation(h: Option<Complex64>, io: &mut Io) -> Result<Relaxation, Failure> {
    let h = Relaxation::new(h.unwrap_or(Complex64::new(1.0, 0.0)))?;
    if !h.in_unit_disk() {
        io.warn("|h - 1| >= 1: the cycle construction is only guaranteed for |h - 1| < 1");
    }
    Ok(h)
}

/// JSON text of a cycle; malformed text is a usage error, coinciding points
/// a domain error.
fn cycle_arg(text: &str) -> Result<Cycle, Failure> {
    let points = nj::parse_complex_list(text)?;
    Ok(Cycle::new(points)?)
}

fn report_value(report: &CycleReport) -> Value {
    serde_json::to_value(report).expect("report serializes")
}

fn synth(args: SynthArgs, io: &mut Io) -> Result<(), Failure> {
    let omega = cycle_arg(&args.cycle)?;
    let h = relaxation(args.h, io)?;
    let degree = args.degree.unwrap_or(omega.len() + 1);
    let p = synthesis::synthesize(&omega, h, degree)?;
    let report = verify::check_cycle(&p, h, omega.points(), verify::DEFAULT_CLOSURE_TOL);
    if !report.super_attracting {
        io.warn(&format!(
            "synthesized polynomial fails verification: {}",
            report.failure_summary()
        ));
    }
    io.emit(&json!({
        "polynomial": nj::complex_list_value(p.coeffs()),
        "degree": p.degree(),
        "h": nj::complex_value(h.value()),
        "report": report_value(&report),
    }));
    Ok(())
}

fn family_cmd(args: FamilyArgs, io: &mut Io) -> Result<(), Failure> {
    if args.d < 3 {
        return Err(Failure::Usage(format!(
            "--d must be at least 3, got {}",
            args.d
        )));
    }
    if args.n < 2 {
        return Err(Failure::Usage(format!(
            "--n must be at least 2, got {}",
            args.n
        )));
    }
    let scale = args.coeff_scale.unwrap_or(Complex64::new(1.0, 0.0));
    if scale.norm() == 0.0 {
        return Err(Failure::Usage("--coeff-scale must be nonzero".into()));
    }
    let h = Relaxation::plain();
    let (points, c, p) = if args.n == 2 {
        // the 2-cycle {0, 1} comes straight from the linear system
        let omega = Cycle::from_real(&[0.0, 1.0])?;
        let p = synthesis::synthesize(&omega, h, args.d)?.scale(scale);
        (omega.points().to_vec(), None, p)
    } else {
        let (cycle, params): (_, FamilyParams) = family::build_cycle(args.d, args.n)?;
        let p = family::family_polynomial(args.d, params.c, scale)?;
        (cycle.to_complex(), Some(params.c), p)
    };
    let report = verify::check_cycle(&p, h, &points, verify::DEFAULT_CLOSURE_TOL);
    if !report.super_attracting {
        io.warn(&format!(
            "family polynomial fails verification: {}",
            report.failure_summary()
        ));
    }
    io.emit(&json!({
        "d": args.d,
        "n": args.n,
        "c": c,
        "cycle": nj::complex_list_value(&points),
        "polynomial": nj::complex_list_value(p.coeffs()),
        "report": report_value(&report),
    }));
    Ok(())
}

fn brackets(args: BracketsArgs, io: &mut Io) -> Result<(), Failure> {
    let table = find_brackets(args.d, args.k)?;
    io.emit(&serde_json::to_value(&table).expect("table serializes"));
    Ok(())
}

fn sharp(args: SharpArgs, io: &mut Io) -> Result<(), Failure> {
    let cert = if args.n > MAX_CERTIFIED_N && args.force {
        io.warn(&format!(
            "n = {} is above {MAX_CERTIFIED_N}; Vandermonde conditioning degrades the certificate",
            args.n
        ));
        sharpness::min_degree_certificate_unbounded(args.n)?
    } else {
        sharpness::min_degree_certificate(args.n)?
    };
    io.emit(&serde_json::to_value(&cert).expect("certificate serializes"));
    Ok(())
}

fn verify_cmd(args: VerifyArgs, io: &mut Io) -> Result<(), Failure> {
    let p = nj::parse_polynomial(&args.poly)?;
    let omega = cycle_arg(&args.cycle)?;
    let h = relaxation(args.h, io)?;
    let report = verify::check_cycle(&p, h, omega.points(), verify::DEFAULT_CLOSURE_TOL);
    io.emit(&report_value(&report));
    if report.super_attracting {
        Ok(())
    } else {
        Err(Failure::Domain(Error::NotACycle(report.failure_summary())))
    }
}

fn render_cmd(args: RenderArgs, io: &mut Io) -> Result<(), Failure> {
    let p = nj::parse_polynomial(&args.poly)?;
    let cycle = nj::parse_complex_list(&args.cycle)?;
    let h = relaxation(args.h, io)?;
    let window = Window {
        center: args.center,
        width: args.size.0,
        height: args.size.1,
    };
    let cycle = (!cycle.is_empty()).then_some(cycle.as_slice());
    let mut spec = RenderSpec::new(p, h, window, args.pixels, cycle)?;
    spec.max_iter = args.max_iter;
    spec.attract_tol = args.attract_tol;
    spec.validate()?;
    let img = render::render_basins(&spec);
    render::write_ppm(&img, &Palette::for_attractors(&spec.attractors), &args.out)?;
    let counts: Vec<usize> = (0..spec.attractors.len())
        .map(|i| img.count(Some(i)))
        .collect();
    io.emit(&json!({
        "out": args.out.display().to_string(),
        "width": img.width,
        "height": img.height,
        "attractors": spec.attractors.iter().map(|a| a.name.clone()).collect::<Vec<_>>(),
        "pixel_counts": counts,
        "unresolved": img.count(None),
        "resolved_fraction": img.resolved_fraction(),
    }));
    Ok(())
}

fn dispatch(command: Command, io: &mut Io) -> Result<(), Failure> {
    match command {
        Command::Synth(a) => synth(a, io),
        Command::Family(a) => family_cmd(a, io),
        Command::Brackets(a) => brackets(a, io),
        Command::Sharp(a) => sharp(a, io),
        Command::Verify(a) => verify_cmd(a, io),
        Command::Render(a) => render_cmd(a, io),
    }
}

/// Runs one invocation against the given streams and returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let msg = e.to_string();
            let line: Vec<&str> = msg
                .lines()
                .take_while(|l| !l.starts_with("Usage:"))
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect();
            let line = line.join(" ");
            let _ = writeln!(
                err,
                "error: UsageError: {}",
                line.trim_start_matches("error: ")
            );
            return EXIT_USAGE;
        }
    };
    let mut io = Io { out, err };
    match dispatch(cli.command, &mut io) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(io.err, "error: UsageError: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Domain(e)) => {
            let msg = e.to_string().replace('\n', " ");
            let _ = writeln!(io.err, "error: {}: {msg}", e.kind());
            EXIT_DOMAIN
        }
    }
}

/// Runs against the process streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = run_with(args, &mut stdout.lock(), &mut stderr.lock());
    let _ = std::io::stdout().flush();
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_flags() {
        assert_eq!(parse_complex("0.5,-1").unwrap(), Complex64::new(0.5, -1.0));
        assert_eq!(parse_complex("2").unwrap(), Complex64::new(2.0, 0.0));
        assert!(parse_complex("a,b").is_err());
        assert!(parse_complex("inf,0").is_err());
    }

    #[test]
    fn extent_flags() {
        assert_eq!(parse_extent("1.5x1.5").unwrap(), (1.5, 1.5));
        assert_eq!(parse_pixels("256x128").unwrap(), (256, 128));
        assert!(parse_pixels("0x5").is_err());
        assert!(parse_extent("1.5").is_err());
        assert!(parse_extent("-1x1").is_err());
    }
}
