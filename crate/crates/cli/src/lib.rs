//! The `inflacert` command line: certify, sweep, polytope, export-ineq, verify.
//!
//! Exit codes: 0 success (nonlocal / covered / positive margin), 1 LP feasible
//! or nonpositive margin, 2 usage or input error, 3 sweep lost coverage.

pub mod certfile;
pub mod values;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use inflacert::certify::{certify_point_with, export_inequality, sweep_with, SweepConfig, SweepError, Verdict};
use inflacert::inflation::{build_inflation_lp, LpOptions};
use inflacert::lpcore::{relaxed_margin, FarkasCertificate};
use inflacert::polytope::{build_polytope, f2f3_slice, slice_lines};
use inflacert::{condition_q, eval_q, Mode, Rational, Scalar};
use serde::Serialize;

use certfile::CertificateFile;
use values::{parse_point, parse_sign, CliScalar};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_COVERAGE_LOST: i32 = 3;

/// Environment override for arithmetic mode: `auto`, `exact` or `float`.
pub const MODE_ENV: &str = "INFLACERT_MODE";

#[derive(Parser, Debug)]
#[command(name = "inflacert", version, about = "Triangle-network nonlocality certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the inflation LP at one point and write a certificate if infeasible.
    Certify(CertifyArgs),
    /// Extend certificates across a range of u.
    Sweep(SweepArgs),
    /// Halfspaces, vertices and the symmetric slice of the correlator polytope as CSV.
    Polytope(PolytopeArgs),
    /// Render a certificate as a polynomial Bell inequality.
    ExportIneq(ExportArgs),
    /// Re-evaluate a certificate's relaxed margin on a freshly built problem.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[arg(long, allow_hyphen_values = true)]
    u: String,
    /// Rational arithmetic; needs a Pythagorean u.
    #[arg(long)]
    exact: bool,
    /// `qplus-vertex` or `F_AB,F_BC,F_AC,F_ABC`.
    #[arg(long = "F", allow_hyphen_values = true)]
    f: String,
    /// `+1` or `-1`.
    #[arg(long, allow_hyphen_values = true)]
    t: String,
    #[arg(long)]
    no_lpi: bool,
    #[arg(long)]
    no_hd: bool,
    #[arg(short, long, default_value = "certificate.json")]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    #[arg(long, default_value_t = 1e-4)]
    step: f64,
    #[arg(long, default_value_t = 1e-6)]
    resolution: f64,
    #[arg(short, long, default_value = "sweep-report")]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct PolytopeArgs {
    #[arg(long)]
    u: String,
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    vertices: bool,
    #[arg(long)]
    project_f2f3: bool,
    /// CSV destination; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// Defaults to the certificate's own provenance.
    #[arg(long, allow_hyphen_values = true)]
    u: Option<String>,
    #[arg(long = "F", allow_hyphen_values = true)]
    f: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t: Option<String>,
}

/// Parse arguments, run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Certify(a) => cmd_certify(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Polytope(a) => cmd_polytope(&a),
        Command::ExportIneq(a) => cmd_export(&a),
        Command::Verify(a) => cmd_verify(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

/// Arithmetic mode from the environment override, the `--exact` flag and the
/// form of `u`: under `auto`, a Pythagorean `p/q` also selects exact mode.
pub fn resolve_mode(u_text: &str, exact_flag: bool) -> Result<Mode> {
    let setting = std::env::var(MODE_ENV).unwrap_or_else(|_| "auto".into());
    match setting.trim() {
        "exact" => Ok(Mode::Exact),
        "float" => Ok(Mode::Float),
        "auto" | "" => {
            let pythagorean_fraction = u_text.contains('/') && Rational::uparam(u_text).is_ok();
            Ok(if exact_flag || pythagorean_fraction {
                Mode::Exact
            } else {
                Mode::Float
            })
        }
        other => bail!("{MODE_ENV} must be auto, exact or float, not `{other}`"),
    }
}

fn cmd_certify(a: &CertifyArgs) -> Result<i32> {
    match resolve_mode(&a.u, a.exact)? {
        Mode::Exact => certify_in::<Rational>(a),
        Mode::Float => certify_in::<f64>(a),
    }
}

fn certify_in<S: CliScalar>(a: &CertifyArgs) -> Result<i32> {
    let u = S::uparam(&a.u)?;
    let f = parse_point(&a.f, &u)?;
    let t = parse_sign(&a.t)?;
    let options = LpOptions {
        lpi: !a.no_lpi,
        higher_degree: !a.no_hd,
        ..LpOptions::default()
    };
    let verdict = certify_point_with(&u, &f, t, options)?;
    println!("u = {} ({} mode), t = {t}", u.u().render(), S::MODE);
    for note in &verdict.notes {
        println!("{note}");
    }
    match &verdict.status {
        Verdict::Nonlocal(cert) => {
            CertificateFile::from_certificate(cert).write(&a.output)?;
            println!("NONLOCAL: certificate written to {}", a.output.display());
            println!("margin {}", cert.margin.render());
            Ok(EXIT_OK)
        }
        Verdict::LpFeasible => {
            println!("LP FEASIBLE: no certificate at this point");
            Ok(EXIT_NEGATIVE)
        }
    }
}

#[derive(Serialize)]
struct ManifestSegment {
    index: usize,
    u_start: f64,
    u_end: f64,
    min_margins: [f64; 3],
    file: String,
    checksum: String,
}

#[derive(Serialize)]
struct Manifest {
    format_version: u32,
    from: f64,
    to: f64,
    direction: String,
    frontier: f64,
    reached_stop: bool,
    total_range: [f64; 2],
    segments: Vec<ManifestSegment>,
}

fn cmd_sweep(a: &SweepArgs) -> Result<i32> {
    let cfg = SweepConfig {
        step: a.step,
        resolution: a.resolution,
        ..SweepConfig::default()
    };
    let (report, reached) = match sweep_with(a.from, a.to, &cfg) {
        Ok(r) => (r, true),
        Err(SweepError::CoverageLost { report, .. }) => (*report, false),
        Err(e) => return Err(e.into()),
    };
    std::fs::create_dir_all(&a.output).with_context(|| format!("creating {}", a.output.display()))?;
    let mut segments = Vec::new();
    for (index, seg) in report.segments.iter().enumerate() {
        let name = format!("segment_{index:04}.json");
        let file = CertificateFile::from_certificate(&seg.certificate);
        file.write(&a.output.join(&name))?;
        segments.push(ManifestSegment {
            index,
            u_start: seg.u_start,
            u_end: seg.u_end,
            min_margins: seg.min_margins,
            file: name,
            checksum: file.checksum,
        });
        println!("segment {index}: [{}, {}]", seg.u_start, seg.u_end);
    }
    let manifest = Manifest {
        format_version: certfile::FORMAT_VERSION,
        from: a.from,
        to: a.to,
        direction: format!("{:?}", report.direction).to_lowercase(),
        frontier: report.frontier,
        reached_stop: reached,
        total_range: report.total_range,
        segments,
    };
    let path = a.output.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    if reached {
        println!("covered [{}, {}] with {} segments", report.total_range[0], report.total_range[1], report.segments.len());
        Ok(EXIT_OK)
    } else {
        println!("COVERAGE LOST at u = {}", report.frontier);
        Ok(EXIT_COVERAGE_LOST)
    }
}

pub const POLYTOPE_HEADER: &str = "section,index,tag,f_ab,f_ac,f_bc,f_abc,offset,f2,f3";

fn cmd_polytope(a: &PolytopeArgs) -> Result<i32> {
    let csv = match resolve_mode(&a.u, a.exact)? {
        Mode::Exact => polytope_csv::<Rational>(a)?,
        Mode::Float => polytope_csv::<f64>(a)?,
    };
    match &a.output {
        Some(p) => std::fs::write(p, csv).with_context(|| format!("writing {}", p.display()))?,
        None => emit(&csv)?,
    }
    Ok(EXIT_OK)
}

fn polytope_csv<S: CliScalar>(a: &PolytopeArgs) -> Result<String> {
    let u = S::uparam(&a.u)?;
    let poly = build_polytope(&u);
    let mut out = String::new();
    writeln!(out, "{POLYTOPE_HEADER}")?;
    for (i, row) in poly.rows().iter().enumerate() {
        let c = row.coeffs;
        writeln!(
            out,
            "halfspace,{i},{},{},{},{},{},{},,",
            row.tag,
            c[0],
            c[1],
            c[2],
            c[3],
            cell(&row.offset)
        )?;
    }
    let empty = poly.vertices().is_empty();
    if empty {
        eprintln!("note: the polytope is empty at u = {}", u.u().render());
    }
    if a.vertices {
        for (i, v) in poly.vertices().iter().enumerate() {
            let x = v.to_halfspace_coords();
            writeln!(
                out,
                "vertex,{i},,{},{},{},{},,,",
                cell(&x[0]),
                cell(&x[1]),
                cell(&x[2]),
                cell(&x[3])
            )?;
        }
    }
    if a.project_f2f3 {
        for (i, line) in slice_lines(&poly).iter().enumerate() {
            let tags: String = line.tags.iter().collect();
            writeln!(out, "slice-line,{i},{tags},,,,,{},{},{}", cell(&line.offset), line.a2, line.a3)?;
        }
        let polygon = f2f3_slice(&poly);
        // closed polyline
        for (i, p) in polygon.iter().chain(polygon.first()).enumerate() {
            writeln!(out, "slice,{i},,,,,,,{},{}", cell(&p[0]), cell(&p[1]))?;
        }
    }
    Ok(out)
}

fn cmd_export(a: &ExportArgs) -> Result<i32> {
    let file = CertificateFile::read(&a.input)?;
    let text = match file.mode()? {
        Mode::Exact => export_inequality(&file.to_certificate::<Rational>()?).render(),
        Mode::Float => export_inequality(&file.to_certificate::<f64>()?).render(),
    };
    match &a.output {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => emit(&text)?,
    }
    Ok(EXIT_OK)
}

fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    let file = CertificateFile::read(&a.input)?;
    let prov = &file.provenance;
    let u = match &a.u {
        Some(u) => u.clone(),
        None => prov.u_exact.clone().unwrap_or_else(|| prov.u.clone()),
    };
    let f = match &a.f {
        Some(f) => f.clone(),
        None => prov
            .f
            .as_ref()
            .map(|f| f.join(","))
            .ok_or_else(|| anyhow!("no --F given and none recorded in the certificate"))?,
    };
    let t = match &a.t {
        Some(t) => t.clone(),
        None => prov
            .t
            .clone()
            .ok_or_else(|| anyhow!("no --t given and none recorded in the certificate"))?,
    };
    let options = LpOptions::from_description(&prov.options)
        .ok_or_else(|| anyhow!("unknown constraint families `{}`", prov.options))?;
    // exact certificates fall back to float when the target u is not Pythagorean
    let exact = file.mode()? == Mode::Exact && Rational::uparam(&u).is_ok();
    let margin = if exact {
        margin_at(&file.to_certificate::<Rational>()?, &u, &f, &t, options)?
    } else {
        match file.mode()? {
            Mode::Exact => margin_at(&file.to_certificate::<Rational>()?.to_f64(), &u, &f, &t, options)?,
            Mode::Float => margin_at(&file.to_certificate::<f64>()?, &u, &f, &t, options)?,
        }
    };
    let (text, positive) = margin;
    println!("margin {text}");
    Ok(if positive { EXIT_OK } else { EXIT_NEGATIVE })
}

fn margin_at<S: CliScalar>(
    cert: &FarkasCertificate<S>,
    u: &str,
    f: &str,
    t: &str,
    options: LpOptions,
) -> Result<(String, bool)> {
    let u = S::uparam(u)?;
    let f = parse_point(f, &u)?;
    let q = condition_q(&eval_q(&u, &f), parse_sign(t)?)?;
    let m = relaxed_margin(cert, &build_inflation_lp(&q, options))?;
    let text = match S::MODE {
        Mode::Exact => format!("{} (≈ {:e})", m.render(), m.to_f64()),
        Mode::Float => m.render(),
    };
    Ok((text, m.is_certified_positive()))
}

// a closed pipe (`| head`) is not an error
fn emit(text: &str) -> Result<()> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn cell<S: Scalar>(x: &S) -> String {
    match x.render() {
        s if s == "-0.0" || s == "-0" => "0".into(),
        s => s,
    }
}

/// Checksum-verified certificate from disk, for callers embedding the CLI.
pub fn read_certificate(path: &Path) -> Result<CertificateFile> {
    CertificateFile::read(path)
}
