use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::json;

use pseudoent::biortho::Family;
use pseudoent::config::{parse_angle, Config, SiteSource};
use pseudoent::constructor::{
    build_state, catalog, lookup, solve_weight, weight_terms, ConstructError, ProductSpec, StateVector,
};
use pseudoent::graded::{ket_string, BasisLabel};
use pseudoent::report::{evaluate, write_csv, Axis, Measure, Parameters, ReportError, ReportRow, SweepSpec};
use pseudoent::verify::{self, VerifyOptions};

/// Pseudo-Hermitian entangled states from Grassmann coherent states.
#[derive(Parser)]
#[command(name = "pseudoent", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the weight-function catalog.
    Catalog {
        /// Keep entries whose table (bell, ghz, w, wprime) or name matches.
        #[arg(long)]
        filter: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Print the unnormalized state of a catalog entry.
    Build {
        #[arg(long)]
        name: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Find a weight function producing a target state.
    Solve(SolveArgs),
    /// Evaluate an entanglement measure on a normalized catalog state.
    Measure {
        #[arg(long)]
        name: String,
        #[arg(long, default_value = "concurrence")]
        measure: String,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Evaluate a measure over a one- or two-dimensional grid and write CSV.
    Sweep(SweepArgs),
    /// Run the consistency suite.
    Verify {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Flip a sign in the named catalog entry before checking.
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args)]
struct SolveArgs {
    /// Solve for a catalog entry's state on its own product.
    #[arg(long, conflicts_with_all = ["target", "product"])]
    name: Option<String>,
    /// Families of the product, e.g. `psi,phi`.
    #[arg(long, requires = "target")]
    product: Option<String>,
    /// Use one shared generator instead of one per site.
    #[arg(long)]
    shared: bool,
    /// A term `[coef:]label,label,…` such as `-1:psi1,psi0`; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    target: Vec<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Default)]
struct ParamArgs {
    /// Angle for every site; accepts forms like `pi/4`.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha3: Option<String>,
    /// Atom-field coupling (uses s = t, r = delta/2, beta = -pi/2).
    #[arg(long, allow_hyphen_values = true)]
    s: Option<String>,
    /// Atom-field detuning.
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    /// Key-value parameter file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    name: String,
    #[arg(long, default_value = "concurrence")]
    measure: String,
    /// Swept variable: alpha, alpha1, alpha2, alpha3, s or delta.
    #[arg(long, default_value = "alpha")]
    var: String,
    /// `lo:hi`, e.g. `0:2pi`.
    #[arg(long, default_value = "0:2pi", allow_hyphen_values = true)]
    range: String,
    #[arg(long, default_value_t = 201)]
    steps: usize,
    /// Optional second (inner) variable.
    #[arg(long, requires = "range2")]
    var2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    range2: Option<String>,
    #[arg(long, default_value_t = 21)]
    steps2: usize,
    /// Values for unswept inputs.
    #[command(flatten)]
    params: ParamArgs,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
    broken_pipe: bool,
}

impl Failure {
    fn new(code: u8, message: impl ToString) -> Self {
        Failure { code, message: message.to_string(), broken_pipe: false }
    }
}

impl From<ReportError> for Failure {
    fn from(e: ReportError) -> Self {
        let code = if e.is_unknown_name() {
            2
        } else if e.is_degenerate() {
            3
        } else {
            1
        };
        Failure::new(code, e)
    }
}

impl From<ConstructError> for Failure {
    fn from(e: ConstructError) -> Self {
        let code = if matches!(e, ConstructError::UnknownName(_)) { 2 } else { 1 };
        Failure::new(code, e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        let broken_pipe = e.kind() == io::ErrorKind::BrokenPipe;
        Failure { broken_pipe, ..Failure::new(4, e) }
    }
}

fn angle(text: &str) -> Result<f64, Failure> {
    parse_angle(text).map_err(|e| Failure::new(1, e))
}

fn opt_angle(text: &Option<String>) -> Result<Option<f64>, Failure> {
    text.as_deref().map(angle).transpose()
}

fn parse_range(text: &str) -> Result<(f64, f64), Failure> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| Failure::new(1, format!("range {text:?} must look like lo:hi")))?;
    Ok((angle(lo)?, angle(hi)?))
}

impl ParamArgs {
    fn alphas(&self) -> Result<[f64; 3], Failure> {
        let all = opt_angle(&self.alpha)?.unwrap_or(0.0);
        Ok([
            opt_angle(&self.alpha1)?.unwrap_or(all),
            opt_angle(&self.alpha2)?.unwrap_or(all),
            opt_angle(&self.alpha3)?.unwrap_or(all),
        ])
    }

    fn atom_field(&self) -> Result<Option<(f64, f64)>, Failure> {
        if self.s.is_none() && self.delta.is_none() {
            return Ok(None);
        }
        Ok(Some((opt_angle(&self.s)?.unwrap_or(1.0), opt_angle(&self.delta)?.unwrap_or(0.0))))
    }

    fn parameters(&self, sites: usize) -> Result<Parameters, Failure> {
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)?;
            let mut cfg: Config = text.parse().map_err(|e| Failure::new(1, e))?;
            for (key, value) in [("alpha", &self.alpha), ("alpha1", &self.alpha1), ("alpha2", &self.alpha2), ("alpha3", &self.alpha3)] {
                if let Some(v) = opt_angle(value)? {
                    cfg.set(key, v).map_err(|e| Failure::new(1, e))?;
                }
            }
            let sites: Vec<SiteSource> = cfg.sites(sites).map_err(|e| Failure::new(1, e))?;
            return Ok(Parameters::Sites(sites));
        }
        if let Some((s, delta)) = self.atom_field()? {
            return Ok(Parameters::AtomField { s, delta });
        }
        Ok(Parameters::Angles(self.alphas()?[..sites].to_vec()))
    }
}

fn state_json(name: Option<&str>, state: &StateVector) -> serde_json::Value {
    json!({ "name": name, "sites": state.site_count(), "state": state.to_string(), "terms": state })
}

fn write_state_csv(out: &mut impl Write, state: &StateVector) -> io::Result<()> {
    writeln!(out, "ket,re,im")?;
    for (labels, c) in state.terms() {
        writeln!(out, "{},{},{}", ket_string(labels), c.re, c.im)?;
    }
    Ok(())
}

fn cmd_catalog(filter: Option<&str>, format: Format, out: &mut impl Write) -> Result<(), Failure> {
    let filter = filter.map(str::to_lowercase);
    let is_table = |f: &str| ["bell", "ghz", "w", "wprime"].contains(&f);
    let rows: Vec<_> = catalog()
        .iter()
        .filter(|e| match filter.as_deref() {
            None => true,
            Some(f) if is_table(f) => e.table.as_str() == f,
            Some(f) => e.name.to_lowercase().starts_with(f),
        })
        .collect();
    match format {
        Format::Json => {
            let records: Vec<_> = rows.iter().map(|e| e.record()).collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&records).expect("serializable"))?;
        }
        Format::Csv => {
            writeln!(out, "name,table,product,weight,state")?;
            for e in rows {
                writeln!(out, "{},{},{},{},{}", e.name, e.table.as_str(), e.spec, e.weight, e.state)?;
            }
        }
        Format::Text => {
            for e in rows {
                writeln!(out, "{:<8} {:<12} w = {:<28} {}", e.name, e.spec.to_string(), e.weight.to_string(), e.state)?;
                if let Some(note) = e.note {
                    writeln!(out, "         note: {note}")?;
                }
            }
        }
    }
    Ok(())
}

fn cmd_build(name: &str, format: Format, out: &mut impl Write) -> Result<(), Failure> {
    let entry = lookup(name)?;
    let state = build_state(&entry.weight, &entry.spec)?;
    match format {
        Format::Text => writeln!(out, "{state}")?,
        Format::Csv => write_state_csv(out, &state)?,
        Format::Json => {
            let mut value = state_json(Some(&entry.name), &state);
            value["product"] = json!(entry.spec.to_string());
            value["weight"] = json!(entry.weight.to_string());
            writeln!(out, "{}", serde_json::to_string_pretty(&value).expect("serializable"))?;
        }
    }
    Ok(())
}

fn parse_family(text: &str) -> Result<Family, Failure> {
    match text.trim() {
        "psi" => Ok(Family::Psi),
        "phi" => Ok(Family::Phi),
        other => Err(Failure::new(1, format!("unknown family {other:?}; use psi or phi"))),
    }
}

fn parse_term(text: &str) -> Result<(Complex64, Vec<(Family, u8)>), Failure> {
    let (coef, kets) = match text.split_once(':') {
        Some((c, k)) => (angle(c)?, k),
        None => match text.strip_prefix('-') {
            Some(rest) => (-1.0, rest),
            None => (1.0, text.strip_prefix('+').unwrap_or(text)),
        },
    };
    let labels = kets
        .split(',')
        .map(|k| {
            let k = k.trim();
            let (fam, level) = k.split_at(k.len().saturating_sub(1));
            let level = match level {
                "0" => 0,
                "1" => 1,
                _ => return Err(Failure::new(1, format!("bad ket {k:?}; use psi0, phi1, …"))),
            };
            Ok((parse_family(fam)?, level))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((Complex64::new(coef, 0.0), labels))
}

fn cmd_solve(args: &SolveArgs, out: &mut impl Write) -> Result<(), Failure> {
    let (spec, target) = if let Some(name) = &args.name {
        let entry = lookup(name)?;
        (entry.spec.clone(), entry.state.clone())
    } else {
        if args.target.is_empty() {
            return Err(Failure::new(1, "give --name or at least one --target"));
        }
        let mut target = StateVector::new();
        for t in &args.target {
            let (c, kets) = parse_term(t)?;
            let labels = kets.iter().enumerate().map(|(i, &(f, l))| BasisLabel::new(i as u8 + 1, f, l)).collect();
            target.add_term(labels, c);
        }
        let families: Vec<Family> = match &args.product {
            Some(p) => p.split(',').map(parse_family).collect::<Result<_, _>>()?,
            None => vec![Family::Psi; target.site_count()],
        };
        let spec = if args.shared { ProductSpec::shared(&families) } else { ProductSpec::distinct(&families) };
        (spec, target)
    };
    let w = solve_weight(&target, &spec)?;
    match args.format {
        Format::Json => {
            let value = json!({
                "product": spec.to_string(),
                "target": target.to_string(),
                "weight": w.to_string(),
                "weight_terms": weight_terms(&w),
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&value).expect("serializable"))?;
        }
        Format::Csv => {
            writeln!(out, "monomial,re,im")?;
            for t in weight_terms(&w) {
                let m = if t.monomial.is_empty() { "1".to_string() } else { t.monomial.join("·") };
                writeln!(out, "{m},{},{}", t.re, t.im)?;
            }
        }
        Format::Text => writeln!(out, "{w}")?,
    }
    Ok(())
}

fn write_rows(rows: &[ReportRow], format: Format, out: &mut impl Write) -> Result<(), Failure> {
    match format {
        Format::Csv => write_csv(out, rows)?,
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(rows).expect("serializable"))?,
        Format::Text => {
            for r in rows {
                let inputs: Vec<String> = r.inputs.iter().map(|(k, v)| format!("{k}={v}")).collect();
                write!(out, "{} value={}", inputs.join(" "), r.value)?;
                if let (Some(c), Some(d)) = (r.closed_form, r.abs_diff) {
                    write!(out, " closed_form={c} abs_diff={d:e}")?;
                }
                writeln!(out)?;
            }
        }
    }
    Ok(())
}

fn cmd_measure(name: &str, measure: &str, params: &ParamArgs, format: Format, out: &mut impl Write) -> Result<(), Failure> {
    let measure: Measure = measure.parse()?;
    let sites = lookup(name)?.spec.site_count();
    let row = evaluate(name, &params.parameters(sites)?, measure)?;
    write_rows(&[row], format, out)
}

fn cmd_sweep(args: &SweepArgs, stdout: &mut impl Write) -> Result<(), Failure> {
    let measure: Measure = args.measure.parse()?;
    let (lo, hi) = parse_range(&args.range)?;
    let mut axes = vec![Axis::new(args.var.parse()?, lo, hi, args.steps)?];
    if let (Some(var2), Some(range2)) = (&args.var2, &args.range2) {
        let (lo, hi) = parse_range(range2)?;
        axes.push(Axis::new(var2.parse()?, lo, hi, args.steps2)?);
    }
    let mut spec = SweepSpec::new(&args.name, measure, axes)?;
    spec.base_alphas = args.params.alphas()?;
    if let Some((s, delta)) = args.params.atom_field()? {
        spec.base_s = s;
        spec.base_delta = delta;
    }
    let rows = spec.run()?;
    match &args.out {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            write_csv(&mut file, &rows)?;
            file.flush()?;
            let skipped = rows.iter().filter(|r| r.value.is_nan()).count();
            eprintln!("wrote {} rows to {} ({skipped} degenerate)", rows.len(), path.display());
        }
        None => write_csv(stdout, &rows)?,
    }
    Ok(())
}

fn cmd_verify(format: Format, inject: Option<String>, out: &mut impl Write) -> Result<(), Failure> {
    let results = verify::run(&VerifyOptions { flip_sign_in: inject });
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&results).expect("serializable"))?,
        _ => {
            for r in &results {
                writeln!(out, "{r}")?;
            }
        }
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(Failure::new(1, format!("{failed} check(s) failed")));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Catalog { filter, format } => cmd_catalog(filter.as_deref(), format, &mut out),
        Command::Build { name, format } => cmd_build(&name, format, &mut out),
        Command::Solve(args) => cmd_solve(&args, &mut out),
        Command::Measure { name, measure, params, format } => cmd_measure(&name, &measure, &params, format, &mut out),
        Command::Sweep(args) => cmd_sweep(&args, &mut out),
        Command::Verify { format, inject_fault } => cmd_verify(format, inject_fault, &mut out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) if f.broken_pipe => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
