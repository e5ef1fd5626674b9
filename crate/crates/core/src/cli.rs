//! Command-line front end.
//!
//! ```text
//! walkfluct eval busy --model mm1 --z 0.5 --s 0.5
//! walkfluct compare --model models/markov.toml --grid default
//! ```
//!
//! Exit codes: 0 on success, 1 for usage, parse, validation and domain
//! errors, 2 for numerical non-convergence, disagreement and I/O failures.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;

use crate::contour::{ContourSpec, TransformValue};
use crate::error::{FluctError, Result};
use crate::fluct::{invert_with_error, WalkFunctionals};
use crate::model::{builtin, builtin_names, DistributionSpec, IncrementModel};
use crate::oracle::{
    default_cap, estimate_functional, max_generating_estimate, max_n_estimate, random_hewitt_case, spitzer_series,
    verify_hewitt_1d, verify_hewitt_discrete, Functional,
};
use crate::roots::find_kernel_roots;

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "walkfluct", version, about = "Fluctuation transforms of random walks with dependent increments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a transform on a (z, s) grid.
    Eval {
        functional: FunctionalArg,
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Engine::Contour)]
        engine: Engine,
        /// Series length for the series engine.
        #[arg(long = "n-max", default_value_t = 60)]
        n_max: u64,
    },
    /// Left zeros of the shifted kernel.
    Roots {
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo estimate of a first-passage functional, or of E e^{-s M_n}.
    Simulate {
        functional: FunctionalArg,
        #[command(flatten)]
        common: Common,
        /// Horizon n for `max`.
        #[arg(long = "n-max", default_value_t = 200)]
        n_max: u64,
    },
    /// Contour against rational and Monte Carlo on a grid.
    Compare {
        #[command(flatten)]
        common: Common,
    },
    /// Invert the z = 1 transform of the busy or idle period.
    Invert {
        #[arg(default_value = "busy")]
        functional: FunctionalArg,
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        engine: Option<Engine>,
        /// Time points; defaults to 0.25, 0.5, ..., 10.
        #[arg(long, value_delimiter = ',')]
        times: Vec<f64>,
        /// Invert to the distribution function instead of the density.
        #[arg(long)]
        cdf: bool,
    },
    /// Randomized checks of the two-dimensional inversion theorem.
    VerifyHewitt {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        cases: u64,
    },
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Model file, or a built-in name.
    #[arg(long, default_value = "mm1")]
    model: String,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    z: Vec<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    s: Vec<String>,
    /// `default`, or `z=0.3,0.6:s=0.5,1+2i`.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long = "T")]
    t: Option<f64>,
    #[arg(long, default_value_t = 32)]
    nodes: usize,
    #[arg(long, default_value_t = 2)]
    levels: usize,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long)]
    paths: Option<u64>,
    #[arg(long)]
    cap: Option<u64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum FunctionalArg {
    Busy,
    Idle,
    Steps,
    Max,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Engine {
    Contour,
    Rational,
    Mc,
    Series,
}

impl Engine {
    fn as_str(self) -> &'static str {
        match self {
            Engine::Contour => "contour",
            Engine::Rational => "rational",
            Engine::Mc => "mc",
            Engine::Series => "series",
        }
    }
}

impl FunctionalArg {
    fn first_passage(self) -> Option<Functional> {
        match self {
            FunctionalArg::Busy => Some(Functional::Busy),
            FunctionalArg::Idle => Some(Functional::Idle),
            FunctionalArg::Steps => Some(Functional::Steps),
            FunctionalArg::Max => None,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            FunctionalArg::Busy => "busy",
            FunctionalArg::Idle => "idle",
            FunctionalArg::Steps => "steps",
            FunctionalArg::Max => "max",
        }
    }
}

impl Common {
    fn spec(&self, default_t: f64) -> Result<ContourSpec> {
        ContourSpec::new(self.t.unwrap_or(default_t), self.nodes, self.levels, self.tol)
    }

    fn grid(&self) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        if let Some(g) = &self.grid {
            return parse_grid(g);
        }
        let parse_all = |v: &[String], name: &str| v.iter().map(|x| parse_complex(x, name)).collect::<Result<Vec<_>>>();
        let (zs, ss) = default_grid();
        let zs = if self.z.is_empty() { zs } else { parse_all(&self.z, "z")? };
        let ss = if self.s.is_empty() { ss } else { parse_all(&self.s, "s")? };
        Ok((zs, ss))
    }
}

fn default_grid() -> (Vec<Complex64>, Vec<Complex64>) {
    let r = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    (r(&[0.3, 0.6, 0.9]), r(&[0.5, 1.0, 2.0]))
}

fn usage(field: &str, message: impl Into<String>) -> FluctError {
    FluctError::Parse { line: 0, field: field.into(), message: message.into() }
}

/// Parses `a`, `bi`, `a+bi`, `a-bi` (also with `j`).
pub fn parse_complex(text: &str, field: &str) -> Result<Complex64> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || usage(field, format!("cannot parse `{text}` as a complex number"));
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        v => v.parse::<f64>().map_err(|_| bad())?,
    };
    let re = re.parse::<f64>().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

fn parse_grid(text: &str) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if text == "default" {
        return Ok(default_grid());
    }
    let (mut zs, mut ss) = (None, None);
    for part in text.split(':') {
        let (key, vals) = part.split_once('=').ok_or_else(|| usage("grid", format!("expected key=values in `{part}`")))?;
        let list = vals.split(',').map(|v| parse_complex(v, key)).collect::<Result<Vec<_>>>()?;
        match key {
            "z" => zs = Some(list),
            "s" => ss = Some(list),
            other => return Err(usage("grid", format!("unknown grid axis `{other}`"))),
        }
    }
    let (dz, ds) = default_grid();
    Ok((zs.unwrap_or(dz), ss.unwrap_or(ds)))
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ModelFile {
    Product {
        schema_version: u32,
        b: DistributionSpec,
        a: DistributionSpec,
    },
    Threshold {
        schema_version: u32,
        level: f64,
        f1: DistributionSpec,
        f2: DistributionSpec,
        a: DistributionSpec,
    },
    MarkovModulated {
        schema_version: u32,
        alpha: Vec<f64>,
        transient: Vec<Vec<f64>>,
        exit: Vec<f64>,
        b: DistributionSpec,
        a: DistributionSpec,
    },
    Builtin {
        schema_version: u32,
        name: String,
    },
}

impl ModelFile {
    fn schema_version(&self) -> u32 {
        match self {
            ModelFile::Product { schema_version, .. }
            | ModelFile::Threshold { schema_version, .. }
            | ModelFile::MarkovModulated { schema_version, .. }
            | ModelFile::Builtin { schema_version, .. } => *schema_version,
        }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn field_in(message: &str) -> String {
    message.split('`').nth(1).unwrap_or("-").to_string()
}

/// First line that opens the table `[key]` or assigns `key`.
fn line_of_key(text: &str, key: &str) -> usize {
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.starts_with(&format!("[{key}]"))
                || l.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map_or(1, |k| k + 1)
}

fn parse_error(text: &str, section: Option<&str>, e: toml::de::Error) -> FluctError {
    let field = field_in(e.message());
    let line = match (e.span(), section) {
        (Some(span), _) => line_of(text, span.start),
        (None, Some(sec)) => line_of_key(text, sec),
        (None, None) => line_of_key(text, &field),
    };
    FluctError::Parse { line, field, message: e.message().to_string() }
}

/// Parses a TOML model description.
pub fn parse_model(text: &str) -> Result<IncrementModel> {
    let table: toml::Table = toml::from_str(text).map_err(|e| parse_error(text, None, e))?;
    for section in ["a", "b", "f1", "f2"] {
        if let Some(v) = table.get(section) {
            v.clone().try_into::<DistributionSpec>().map_err(|e| parse_error(text, Some(section), e))?;
        }
    }
    let file: ModelFile = toml::Value::Table(table).try_into().map_err(|e| parse_error(text, None, e))?;
    if file.schema_version() != SCHEMA_VERSION {
        let line = text.find("schema_version").map_or(0, |o| line_of(text, o));
        return Err(FluctError::Parse {
            line,
            field: "schema_version".into(),
            message: format!("unsupported schema version {}, expected {SCHEMA_VERSION}", file.schema_version()),
        });
    }
    let model = match file {
        ModelFile::Product { b, a, .. } => IncrementModel::product(b, a),
        ModelFile::Threshold { level, f1, f2, a, .. } => IncrementModel::threshold(f1, f2, a, level),
        ModelFile::MarkovModulated { alpha, transient, exit, b, a, .. } => {
            IncrementModel::markov_modulated(alpha, transient, exit, b, a)
        }
        ModelFile::Builtin { name, .. } => builtin(&name),
    }?;
    let at0 = model.lst(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))?;
    if (at0 - 1.0).norm() > 1e-10 || !model.mean_a().is_finite() || !model.mean_b().is_finite() {
        return Err(FluctError::InvalidSpec(format!("model probe gives h(0,0) = {at0}")));
    }
    Ok(model)
}

/// Loads a model file, falling back to a built-in model named by the path or its stem.
pub fn load_model(path: &str) -> Result<IncrementModel> {
    let p = Path::new(path);
    if p.is_file() {
        return parse_model(&fs::read_to_string(p)?);
    }
    let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or(path);
    if builtin_names().contains(&stem) {
        return builtin(stem);
    }
    Err(FluctError::Io(format!(
        "model `{path}` is neither a file nor one of the built-in names {}",
        builtin_names().join(", ")
    )))
}

/// One CSV field.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Header plus rows; numbers carry 17 significant digits.
pub fn emit_csv<W: Write>(header: &[&str], rows: &[Vec<Cell>], dest: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(dest);
    let io = |e: csv::Error| FluctError::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r.iter().map(Cell::render)).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

fn cx(v: Complex64) -> [Cell; 2] {
    [Cell::Num(v.re), Cell::Num(v.im)]
}

fn exit_code(e: &FluctError) -> i32 {
    match e {
        FluctError::Domain(_)
        | FluctError::InvalidSpec(_)
        | FluctError::Parse { .. }
        | FluctError::Stability { .. }
        | FluctError::PreconditionViolated(_)
        | FluctError::UnsupportedModel(_)
        | FluctError::Pole { .. } => 1,
        _ => 2,
    }
}

/// Parses `argv` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with_io(argv, &mut io::stdout().lock(), &mut io::stderr().lock())
}

/// [`run`] with explicit output streams.
pub fn run_with_io<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let threads = std::env::var("WALKFLUCT_THREADS").ok().and_then(|v| v.parse::<usize>().ok());
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.unwrap_or(0)).build();
    let result = match pool {
        Ok(p) => p.install(|| dispatch(cli.command)),
        Err(e) => Err(FluctError::Io(e.to_string())),
    };
    let result = result.and_then(|(table, dest, ok)| {
        write_table(&table, &dest, out)?;
        Ok(if ok { 0 } else { 2 })
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

fn write_table(table: &Table, dest: &Option<PathBuf>, out: &mut dyn Write) -> Result<()> {
    match dest {
        Some(p) => emit_csv(&table.header, &table.rows, fs::File::create(p)?),
        None => emit_csv(&table.header, &table.rows, out),
    }
}

fn dispatch(cmd: Command) -> Result<(Table, Option<PathBuf>, bool)> {
    let (table, dest, ok) = match cmd {
        Command::Eval { functional, common, engine, n_max } => (eval(functional, &common, engine, n_max)?, common.out, true),
        Command::Roots { common } => (roots(&common)?, common.out, true),
        Command::Simulate { functional, common, n_max } => (simulate(functional, &common, n_max)?, common.out, true),
        Command::Compare { common } => {
            let (t, ok) = compare(&common)?;
            (t, common.out, ok)
        }
        Command::Invert { functional, common, engine, times, cdf } => {
            (invert(functional, &common, engine, &times, cdf)?, common.out, true)
        }
        Command::VerifyHewitt { common, cases } => {
            let (t, ok) = hewitt(&common, cases)?;
            (t, common.out, ok)
        }
    };
    Ok((table, dest, ok))
}

fn is_one(z: Complex64) -> bool {
    z == Complex64::new(1.0, 0.0)
}

fn check_point(functional: FunctionalArg, z: Complex64, s: Complex64) -> Result<()> {
    if !(z.is_finite() && s.is_finite()) || !(z.norm() < 1.0 || is_one(z)) {
        return Err(FluctError::Domain(format!("z = {z} must satisfy |z| < 1 or z = 1")));
    }
    if functional != FunctionalArg::Steps && s.re < 0.0 {
        return Err(FluctError::Domain(format!("s = {s} must satisfy Re s >= 0")));
    }
    if functional == FunctionalArg::Max && s.re == 0.0 && s.im != 0.0 {
        return Err(FluctError::Domain(format!("the maximum transform is evaluated for Re s > 0, got s = {s}")));
    }
    Ok(())
}

fn points(functional: FunctionalArg, common: &Common) -> Result<Vec<(Complex64, Complex64)>> {
    let (zs, ss) = common.grid()?;
    let ss = if functional == FunctionalArg::Steps { vec![Complex64::new(0.0, 0.0)] } else { ss };
    let pts: Vec<_> = zs.iter().flat_map(|&z| ss.iter().map(move |&s| (z, s))).collect();
    for &(z, s) in &pts {
        check_point(functional, z, s)?;
    }
    Ok(pts)
}

fn scale(v: TransformValue, k: Complex64) -> TransformValue {
    let mut out = v.clone();
    out.value = v.value * k;
    out.abs_err = v.abs_err * k.norm();
    out
}

/// Contour engine with ladders at `z = 1`, `s = 0` and the boundary variants on `Re s = 0`.
fn contour_value(wf: &WalkFunctionals, f: FunctionalArg, z: Complex64, s: Complex64, spec: &ContourSpec) -> Result<TransformValue> {
    if is_one(z) {
        return wf.limit_z_to_one(|zz| contour_value(wf, f, zz, s, spec));
    }
    match f {
        FunctionalArg::Steps => wf.steps_pgf(z, spec),
        _ if s == Complex64::new(0.0, 0.0) => wf.limit_s_to_zero(|ss| contour_value(wf, f, z, ss, spec)),
        FunctionalArg::Busy if s.re == 0.0 => wf.busy_period_boundary(z, s, spec),
        FunctionalArg::Idle if s.re == 0.0 => wf.idle_period_boundary(z, s, spec),
        FunctionalArg::Busy => wf.busy_period_transform(z, s, spec),
        FunctionalArg::Idle => wf.idle_period_transform(z, s, spec),
        FunctionalArg::Max => Ok(scale(wf.transient_max_transform(z, s, spec)?, 1.0 - z)),
    }
}

fn rational_value(wf: &WalkFunctionals, f: FunctionalArg, z: Complex64, s: Complex64) -> Result<TransformValue> {
    match f {
        FunctionalArg::Busy => wf.busy_period_rational(z, s),
        FunctionalArg::Steps if is_one(z) => wf.busy_period_rational(z, Complex64::new(0.0, 0.0)),
        FunctionalArg::Steps => wf.steps_pgf_rational(z),
        FunctionalArg::Max => wf.max_transform_rational(z, s),
        FunctionalArg::Idle => Err(FluctError::UnsupportedModel("the rational engine has no idle-period form".into())),
    }
}

fn mc_value(
    model: &IncrementModel,
    f: FunctionalArg,
    z: Complex64,
    s: Complex64,
    common: &Common,
    engine: Engine,
    n_max: u64,
) -> Result<TransformValue> {
    use crate::contour::Method;
    let paths = common.paths.unwrap_or(100_000);
    match (f.first_passage(), engine) {
        (Some(fp), Engine::Series) => {
            let (s1, s2) = fp.arguments(s);
            spitzer_series(model, z, s1, s2, n_max, paths, common.seed)
        }
        (Some(fp), _) => {
            let (s1, s2) = fp.arguments(s);
            let cap = common.cap.unwrap_or_else(|| default_cap(z, common.tol));
            let e = estimate_functional(model, z, s1, s2, paths, cap, common.seed)?;
            Ok(TransformValue::new(e.mean, e.std_err + e.truncation_bias_bound, Method::MonteCarlo))
        }
        (None, _) if is_one(z) => {
            let n = common.cap.unwrap_or(n_max.max(200));
            let e = max_n_estimate(model, n, s, paths, common.seed)?;
            Ok(TransformValue::new(e.mean, e.std_err, Method::MonteCarlo))
        }
        (None, _) => {
            let n = common.cap.unwrap_or_else(|| default_cap(z, common.tol));
            let e = max_generating_estimate(model, z, s, n, paths, common.seed)?;
            let v = TransformValue::new(e.mean, e.std_err + e.truncation_bias_bound, Method::MonteCarlo);
            Ok(scale(v, 1.0 - z))
        }
    }
}

fn eval(functional: FunctionalArg, common: &Common, engine: Engine, n_max: u64) -> Result<Table> {
    let spec = common.spec(200.0)?;
    let pts = points(functional, common)?;
    let model = load_model(&common.model)?;
    let wf = WalkFunctionals::new(model.clone());
    let mut rows = Vec::with_capacity(pts.len());
    for (z, s) in pts {
        let v = match engine {
            Engine::Contour => contour_value(&wf, functional, z, s, &spec)?,
            Engine::Rational => rational_value(&wf, functional, z, s)?,
            Engine::Mc | Engine::Series => mc_value(&model, functional, z, s, common, engine, n_max)?,
        };
        let mut row: Vec<Cell> = cx(z).into_iter().chain(cx(s)).chain(cx(v.value)).collect();
        row.push(v.abs_err.into());
        row.push(v.method.as_str().into());
        rows.push(row);
    }
    Ok(Table { header: vec!["z_re", "z_im", "s_re", "s_im", "value_re", "value_im", "abs_err", "method"], rows })
}

fn roots(common: &Common) -> Result<Table> {
    let pts = points(FunctionalArg::Busy, common)?;
    let model = load_model(&common.model)?;
    let kernel = model
        .rational()
        .ok_or_else(|| FluctError::UnsupportedModel("the model has no kernel rational in s1".into()))?;
    let mut rows = Vec::new();
    for (z, s) in pts {
        let rep = find_kernel_roots(kernel, z, s)?;
        for (k, (r, res)) in rep.roots.iter().zip(&rep.residuals).enumerate() {
            let mut row: Vec<Cell> = cx(z).into_iter().chain(cx(s)).collect();
            row.push((k as u64).into());
            row.extend(cx(*r));
            row.push((*res).into());
            row.push((rep.count_argument_principle as u64).into());
            row.push(rep.contour_radius.into());
            rows.push(row);
        }
    }
    Ok(Table {
        header: vec!["z_re", "z_im", "s_re", "s_im", "index", "root_re", "root_im", "residual", "count", "radius"],
        rows,
    })
}

fn simulate(functional: FunctionalArg, common: &Common, n_max: u64) -> Result<Table> {
    let pts = points(functional, common)?;
    let model = load_model(&common.model)?;
    let paths = common.paths.unwrap_or(100_000);
    let mut rows = Vec::new();
    for (z, s) in pts {
        let (s1, s2, est) = match functional.first_passage() {
            Some(fp) => {
                let (s1, s2) = fp.arguments(s);
                let cap = common.cap.unwrap_or_else(|| default_cap(z, common.tol));
                (s1, s2, estimate_functional(&model, z, s1, s2, paths, cap, common.seed)?)
            }
            None => (s, Complex64::new(0.0, 0.0), max_n_estimate(&model, n_max, s, paths, common.seed)?),
        };
        let mut row: Vec<Cell> = vec![functional.as_str().into()];
        row.extend(cx(z).into_iter().chain(cx(s1)).chain(cx(s2)).chain(cx(est.mean)));
        row.push(est.std_err.into());
        row.push(est.paths.into());
        row.push(est.cap.into());
        row.push(est.truncation_bias_bound.into());
        rows.push(row);
    }
    Ok(Table {
        header: vec![
            "functional", "z_re", "z_im", "s1_re", "s1_im", "s2_re", "s2_im", "mean_re", "mean_im", "std_err", "paths",
            "cap", "bias_bound",
        ],
        rows,
    })
}

fn compare(common: &Common) -> Result<(Table, bool)> {
    let spec = common.spec(200.0)?;
    let model = load_model(&common.model)?;
    let wf = WalkFunctionals::new(model.clone());
    let mut rows = Vec::new();
    let mut all_ok = true;
    for functional in [FunctionalArg::Busy, FunctionalArg::Idle, FunctionalArg::Steps] {
        for (z, s) in points(functional, common)? {
            let c = contour_value(&wf, functional, z, s, &spec)?;
            let r = if model.rational().is_some() && functional != FunctionalArg::Idle {
                Some(rational_value(&wf, functional, z, s)?)
            } else {
                None
            };
            let m = if model.has_sampler() {
                Some(mc_value(&model, functional, z, s, common, Engine::Mc, 0)?)
            } else {
                None
            };
            let nan = Complex64::new(f64::NAN, f64::NAN);
            let diff_r = r.as_ref().map_or(f64::NAN, |r| (r.value - c.value).norm());
            let ok_r = r.as_ref().is_none_or(|_| diff_r <= (5.0 * c.abs_err).max(1e-8));
            let (z_score, ok_m) = match &m {
                Some(m) => {
                    let d = (m.value - c.value).norm();
                    (d / m.abs_err, d <= 4.0 * m.abs_err + c.abs_err)
                }
                None => (f64::NAN, true),
            };
            all_ok &= ok_r && ok_m;
            let mut row: Vec<Cell> = vec![functional.as_str().into()];
            row.extend(cx(z).into_iter().chain(cx(s)).chain(cx(c.value)));
            row.push(c.abs_err.into());
            row.extend(cx(r.as_ref().map_or(nan, |r| r.value)));
            row.push(diff_r.into());
            row.extend(cx(m.as_ref().map_or(nan, |m| m.value)));
            row.push(m.as_ref().map_or(f64::NAN, |m| m.abs_err).into());
            row.push(z_score.into());
            row.push(if ok_r && ok_m { "pass" } else { "fail" }.into());
            rows.push(row);
        }
    }
    let header = vec![
        "functional", "z_re", "z_im", "s_re", "s_im", "contour_re", "contour_im", "contour_err", "rational_re",
        "rational_im", "rational_diff", "mc_re", "mc_im", "mc_std_err", "mc_z_score", "status",
    ];
    Ok((Table { header, rows }, all_ok))
}

fn invert(functional: FunctionalArg, common: &Common, engine: Option<Engine>, times: &[f64], cdf: bool) -> Result<Table> {
    if !matches!(functional, FunctionalArg::Busy | FunctionalArg::Idle) {
        return Err(FluctError::Domain("only the busy and idle periods can be inverted".into()));
    }
    let spec = common.spec(200.0)?;
    let model = load_model(&common.model)?;
    let wf = WalkFunctionals::new(model.clone());
    let engine = engine.unwrap_or(if model.rational().is_some() && functional == FunctionalArg::Busy {
        Engine::Rational
    } else {
        Engine::Contour
    });
    let one = Complex64::new(1.0, 0.0);
    let transform = |s: Complex64| -> Result<Complex64> {
        let v = match engine {
            Engine::Rational => rational_value(&wf, functional, one, s)?,
            Engine::Contour => contour_value(&wf, functional, one, s, &spec)?,
            other => {
                return Err(FluctError::UnsupportedModel(format!("inversion needs an analytic engine, got {}", other.as_str())))
            }
        };
        Ok(if cdf { v.value / s } else { v.value })
    };
    let grid: Vec<f64> = if times.is_empty() { (1..=40).map(|k| 0.25 * k as f64).collect() } else { times.to_vec() };
    let vals = invert_with_error(transform, &grid)?;
    let rows = grid.iter().zip(vals).map(|(&t, (v, e))| vec![t.into(), v.into(), e.into()]).collect();
    Ok(Table { header: vec!["t", if cdf { "cdf" } else { "density" }, "err_estimate"], rows })
}

fn hewitt(common: &Common, cases: u64) -> Result<(Table, bool)> {
    let t_max = common.t.unwrap_or(800.0);
    let ladder = [t_max / 8.0, t_max / 4.0, t_max / 2.0, t_max];
    let mut rows = Vec::new();
    let mut all_ok = true;
    for index in 0..cases {
        let case = random_hewitt_case(common.seed, index);
        let mut gaps = Vec::new();
        for &t in &ladder {
            let spec = ContourSpec::new(t, common.nodes, 0, 1e-6)?;
            let r = verify_hewitt_discrete(&case.measure, &case.f, &spec)?;
            let gap_1d = match &case.factors {
                Some((h1, h2)) => (verify_hewitt_1d(h1, &case.f.times_steps(h2), &spec)?.lhs - r.lhs).norm(),
                None => 0.0,
            };
            gaps.push(r.gap);
            let mut row: Vec<Cell> = vec![index.into(), case.kind.as_str().into(), t.into()];
            row.extend(cx(r.lhs).into_iter().chain(cx(r.rhs)));
            row.push(r.gap.into());
            row.push(gap_1d.into());
            rows.push(row);
        }
        let decreasing = gaps.windows(2).all(|w| w[1] <= w[0] || w[1] < 1e-8);
        all_ok &= decreasing && *gaps.last().expect("ladder") < 1e-3;
    }
    let header = vec!["case", "kind", "T", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "gap", "product_form_gap"];
    Ok((Table { header, rows }, all_ok))
}
