//! `xfeyn`: JSON front end for propagators, Gegenbauer conversions, the graph
//! Hopf algebra and Birkhoff renormalization.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical non-convergence,
//! 64 usage error.

pub mod config;
pub mod json;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};
use xfeyn_core::amplitude::{
    asymptotic_eval, asymptotic_term_coefficient, edge_gegenbauer_expansion, taylor_eval, taylor_terms, ExpansionOrders,
    MassParam,
};
use xfeyn_core::gegenbauer::{
    chebyshev_to_gegenbauer, gegenbauer_coeffs, monomial_to_gegenbauer, product_linearize, reproject_gegenbauer,
    zonal_coefficient, GegenCombo, PolySpec,
};
use xfeyn_core::propagators::{g0_real, gm_integral, gm_real, massless_normalization, Kinematics};
use xfeyn_core::specfun::{ExactScalar, HalfInt};
use xfeyn_renorm::birkhoff::{
    beta_function, birkhoff_factorize, toy_feynman_character, toy_laurent_character, universal_frame, Character,
};
use xfeyn_renorm::feyngraph::{CanonicalGraph, FeynmanGraph};
use xfeyn_renorm::hopf::HopfAlgebra;
use xfeyn_renorm::rotabaxter::{divisor_labels, LaurentSeries, LogForm, MultiLogForm, RotaBaxter};
use xfeyn_renorm::RenormError;

use crate::config::{Config, CONFIG_ENV};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{0}")]
    NonConvergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input(_) => EXIT_INVALID,
            CliError::NonConvergence(_) => EXIT_NONCONVERGENCE,
        }
    }
}

impl From<xfeyn_core::Error> for CliError {
    fn from(e: xfeyn_core::Error) -> Self {
        match e {
            xfeyn_core::Error::NonConvergence { .. } => CliError::NonConvergence(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<RenormError> for CliError {
    fn from(e: RenormError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "xfeyn", version, about = "Configuration-space Feynman amplitudes and Hopf-algebraic renormalization")]
pub struct Cli {
    /// JSON config file (overrides the file named by XFEYN_CONFIG).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the JSON result here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Terms in the small-argument Bessel series
    #[arg(long, global = true)]
    pub series_terms: Option<usize>,
    /// Terms in the large-argument Bessel expansion
    #[arg(long, global = true)]
    pub asymptotic_terms: Option<usize>,
    /// Argument above which the large-argument expansion is used
    #[arg(long, global = true)]
    pub crossover_z: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate the massive (or, for m = 0, massless) propagator.
    PropEval(PropEvalArgs),
    /// Exact expansion coefficients of the propagator.
    PropExpand(PropExpandArgs),
    /// Gegenbauer polynomial conversions.
    Gegen(GegenArgs),
    /// Coproduct of a Feynman graph.
    GraphCoproduct(GraphArgs),
    /// Antipode of a Feynman graph.
    GraphAntipode(GraphArgs),
    /// Birkhoff factorization of a character.
    Renorm(RenormArgs),
    /// Beta function and universal frame of a character.
    Beta(RenormArgs),
    /// Divisor labels of the space with n points and k marked points.
    Divisors(DivisorArgs),
}

#[derive(Args, Debug)]
pub struct PropEvalArgs {
    #[arg(long = "D")]
    pub dim: u32,
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    /// Distance; the point is (r, 0, …, 0).
    #[arg(long, conflicts_with = "x", required_unless_present = "x")]
    pub r: Option<f64>,
    /// Comma-separated coordinates.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = PropMethod::Bessel)]
    pub method: PropMethod,
    /// Terms for the taylor and asymptotic methods (default from config).
    #[arg(long)]
    pub terms: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PropMethod {
    Bessel,
    Integral,
    Taylor,
    Asymptotic,
}

#[derive(Args, Debug)]
pub struct PropExpandArgs {
    #[arg(long = "D")]
    pub dim: u32,
    #[arg(long, value_enum, default_value_t = ExpandMethod::Taylor)]
    pub method: ExpandMethod,
    /// Log-branch terms (taylor, gegenbauer) or asymptotic terms.
    #[arg(long, default_value_t = 3)]
    pub terms: u32,
    /// Highest power of r/ρ (gegenbauer).
    #[arg(long, default_value_t = 4)]
    pub radial: u32,
    /// Highest Gegenbauer degree (gegenbauer); defaults to --radial.
    #[arg(long)]
    pub degree: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExpandMethod {
    Taylor,
    Asymptotic,
    Gegenbauer,
}

#[derive(Args, Debug)]
pub struct GegenArgs {
    #[arg(long, value_enum)]
    pub op: GegenOp,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long, value_parser = parse_half_int)]
    pub lambda: Option<HalfInt>,
    #[arg(long, value_parser = parse_half_int)]
    pub ell: Option<HalfInt>,
    #[arg(long = "D")]
    pub dim: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GegenOp {
    /// Coefficients of C_n^(λ) in powers of x.
    Poly,
    /// x^m in the C^(λ) basis.
    Monomial,
    /// T_n in the C^(λ) basis.
    Chebyshev,
    /// C_n^(ℓ) in the C^(λ) basis.
    Reproject,
    /// C_n^(λ) C_m^(λ) in the C^(λ) basis.
    Product,
    /// Zonal kernel coefficient c_{D,n}.
    Zonal,
}

#[derive(Args, Debug)]
pub struct GraphArgs {
    /// Graph JSON: a file path or an inline document.
    #[arg(long)]
    pub graph: String,
    #[arg(long)]
    pub max_valence: Option<usize>,
}

#[derive(Args, Debug)]
pub struct RenormArgs {
    #[arg(long, value_enum)]
    pub target: Target,
    /// A graph or a list of graphs: file path or inline JSON.
    #[arg(long)]
    pub graphs: String,
    /// Character values `[{"graph": …, "value": …}]`; without it a seeded toy character is used.
    #[arg(long)]
    pub phi: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub max_degree: usize,
    /// Largest vertex count the toy log-form character accepts.
    #[arg(long, default_value_t = 6)]
    pub n_vertices: u32,
    #[arg(long, default_value_t = 1)]
    pub k_external: u32,
    #[arg(long)]
    pub max_valence: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Laurent,
    Logform,
}

#[derive(Args, Debug)]
pub struct DivisorArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 0)]
    pub k: u32,
}

fn parse_half_int(s: &str) -> Result<HalfInt, String> {
    s.parse()
}

/// Exit code and text produced by one invocation.
#[derive(Debug, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match execute(&cli) {
        Ok(text) => match &cli.output {
            Some(path) => match std::fs::write(path, &text) {
                Ok(()) => Outcome::default(),
                Err(e) => Outcome { code: EXIT_INVALID, stdout: String::new(), stderr: format!("error: {}: {e}\n", path.display()) },
            },
            None => Outcome { code: EXIT_OK, stdout: text, stderr: String::new() },
        },
        Err(e) => Outcome { code: e.exit_code(), stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

fn load_config(cli: &Cli) -> Result<Config, CliError> {
    let env = std::env::var_os(CONFIG_ENV).map(PathBuf::from);
    let files: Vec<&Path> = match (&cli.config, &env) {
        (Some(p), _) => vec![p.as_path()],
        (None, Some(p)) => vec![p.as_path()],
        (None, None) => vec![],
    };
    let mut cfg = Config::load(&files)?;
    if let Some(n) = cli.series_terms {
        cfg.bessel.series_terms = n;
    }
    if let Some(n) = cli.asymptotic_terms {
        cfg.bessel.asymptotic_terms = n;
    }
    if let Some(z) = cli.crossover_z {
        cfg.bessel.crossover_z = Some(z);
    }
    cfg.bessel.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<String, CliError> {
    let cfg = load_config(cli)?;
    let value = match &cli.command {
        Command::PropEval(a) => prop_eval(a, &cfg)?,
        Command::PropExpand(a) => prop_expand(a)?,
        Command::Gegen(a) => gegen(a)?,
        Command::GraphCoproduct(a) => graph_coproduct(a)?,
        Command::GraphAntipode(a) => graph_antipode(a)?,
        Command::Renorm(a) => renorm(a)?,
        Command::Beta(a) => beta(a)?,
        Command::Divisors(a) => divisors(a),
    };
    Ok(json::to_canonical(&value)?)
}

/// A rational as `"p/q"`, anything with π as its term list.
pub fn scalar_json(c: &ExactScalar) -> Value {
    match c.as_rational() {
        Some(q) => Value::String(q.to_string()),
        None => serde_json::to_value(c).expect("scalars serialize"),
    }
}

fn combo_json(c: &GegenCombo) -> Value {
    Value::Object(c.coeffs().iter().map(|(k, v)| (k.to_string(), scalar_json(v))).collect())
}

fn order_of(dim: u32) -> Result<HalfInt, CliError> {
    if dim < 3 {
        return Err(CliError::Input(format!("need D >= 3, got {dim}")));
    }
    Ok(HalfInt::from_twice(dim as i64 - 2))
}

fn prop_eval(a: &PropEvalArgs, cfg: &Config) -> Result<Value, CliError> {
    let k = match (&a.x, a.r) {
        (Some(x), _) => Kinematics::new(a.dim, x.clone(), a.m)?,
        (None, Some(r)) => Kinematics::radial(a.dim, r, a.m)?,
        (None, None) => return Err(CliError::Usage("one of --r or --x is required".into())),
    };
    let order = order_of(a.dim)?;
    let value = match a.method {
        PropMethod::Bessel if a.m == 0.0 => massless_normalization(a.dim)? * g0_real(&k)?,
        PropMethod::Bessel => gm_real(&k, &cfg.bessel)?,
        PropMethod::Integral => gm_integral(&k, &cfg.integral)?,
        PropMethod::Taylor => taylor_eval(order, a.m, k.norm(), a.terms.unwrap_or(cfg.orders.taylor_terms))?,
        PropMethod::Asymptotic => asymptotic_eval(order, a.m, k.norm(), a.terms.unwrap_or(cfg.orders.asymptotic_terms))?,
    };
    Ok(json!({ "value": value }))
}

fn prop_expand(a: &PropExpandArgs) -> Result<Value, CliError> {
    let order = order_of(a.dim)?;
    let rows: Vec<Value> = match a.method {
        ExpandMethod::Taylor => taylor_terms(order, a.terms, MassParam::Symbolic)?
            .into_iter()
            .map(|(spec, c)| json!({ "term": spec, "coefficient": c }))
            .collect(),
        ExpandMethod::Asymptotic => (0..a.terms)
            .map(|l| asymptotic_term_coefficient(l, order).map(|c| serde_json::to_value(c).expect("serializes")))
            .collect::<Result<_, _>>()?,
        ExpandMethod::Gegenbauer => {
            let orders = ExpansionOrders { radial: a.radial, degree: a.degree };
            taylor_terms(order, a.terms, MassParam::Symbolic)?
                .into_iter()
                .map(|(spec, _)| {
                    edge_gegenbauer_expansion(spec, order, MassParam::Symbolic, orders)
                        .map(|e| json!({ "term": spec, "expansion": e }))
                })
                .collect::<Result<_, _>>()?
        }
    };
    Ok(json!({ "dim": a.dim, "lambda": order, "method": format!("{:?}", a.method).to_lowercase(), "terms": rows }))
}

fn need<T: Copy>(v: Option<T>, flag: &str, op: GegenOp) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("--op {op:?} needs --{flag}").to_lowercase()))
}

fn gegen(a: &GegenArgs) -> Result<Value, CliError> {
    let op = a.op;
    let lambda = || need(a.lambda, "lambda", op);
    Ok(match op {
        GegenOp::Poly => {
            let p = gegenbauer_coeffs(PolySpec::gegenbauer(lambda()?, need(a.n, "n", op)?))?;
            Value::Object(
                p.coeffs().iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(k, c)| (k.to_string(), scalar_json(c))).collect(),
            )
        }
        GegenOp::Monomial => combo_json(&monomial_to_gegenbauer(need(a.m, "m", op)?, lambda()?)?),
        GegenOp::Chebyshev => combo_json(&chebyshev_to_gegenbauer(need(a.n, "n", op)?, lambda()?)?),
        GegenOp::Reproject => combo_json(&reproject_gegenbauer(need(a.ell, "ell", op)?, need(a.n, "n", op)?, lambda()?)?),
        GegenOp::Product => combo_json(&product_linearize(need(a.n, "n", op)?, need(a.m, "m", op)?, lambda()?)?),
        GegenOp::Zonal => json!({ "value": scalar_json(&zonal_coefficient(need(a.dim, "D", op)?, need(a.n, "n", op)?)?) }),
    })
}

/// A file path or an inline JSON document.
fn read_json(arg: &str) -> Result<Value, CliError> {
    let trimmed = arg.trim_start();
    let text = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| CliError::Input(format!("{arg}: {e}")))?
    };
    Ok(serde_json::from_str(&text)?)
}

fn parse_graph(v: Value, max_valence: Option<usize>) -> Result<FeynmanGraph, CliError> {
    let g: FeynmanGraph = serde_json::from_value(v)?;
    let bound = max_valence.or(g.max_valence);
    let g = g.with_max_valence(bound);
    g.validate().map_err(RenormError::InvalidGraph)?;
    Ok(g)
}

fn parse_graphs(v: Value, max_valence: Option<usize>) -> Result<Vec<FeynmanGraph>, CliError> {
    match v {
        Value::Array(items) => items.into_iter().map(|g| parse_graph(g, max_valence)).collect(),
        other => Ok(vec![parse_graph(other, max_valence)?]),
    }
}

fn graph_json(g: &CanonicalGraph) -> Value {
    json!({ "label": g.to_string(), "degree": g.degree(), "graph": g })
}

fn graph_coproduct(a: &GraphArgs) -> Result<Value, CliError> {
    let g = parse_graph(read_json(&a.graph)?, a.max_valence)?;
    let hopf = HopfAlgebra::with_max_valence(g.max_valence);
    let c = g.canonical();
    let subgraphs: Vec<Value> = g
        .admissible_subgraphs()
        .into_iter()
        .map(|s| {
            let quotient = g.contract(&s).map(|q| q.canonical().to_string()).unwrap_or_default();
            json!({ "edges": s.edges, "quotient": quotient })
        })
        .collect();
    Ok(json!({
        "graph": graph_json(&c),
        "admissible": subgraphs,
        "coproduct": hopf.coproduct_generator(&c),
    }))
}

fn graph_antipode(a: &GraphArgs) -> Result<Value, CliError> {
    let g = parse_graph(read_json(&a.graph)?, a.max_valence)?;
    let hopf = HopfAlgebra::with_max_valence(g.max_valence);
    let c = g.canonical();
    Ok(json!({ "graph": graph_json(&c), "antipode": &*hopf.antipode_generator(&c) }))
}

#[derive(Deserialize)]
struct PhiEntry<V> {
    graph: Value,
    value: V,
}

fn phi_table<V, A>(
    arg: &str,
    max_valence: Option<usize>,
    convert: impl Fn(V) -> A,
) -> Result<BTreeMap<CanonicalGraph, A>, CliError>
where
    V: for<'de> Deserialize<'de>,
{
    let entries: Vec<PhiEntry<V>> = serde_json::from_value(read_json(arg)?)?;
    let mut out = BTreeMap::new();
    for e in entries {
        let g = parse_graph(e.graph, max_valence)?.canonical();
        if out.insert(g.clone(), convert(e.value)).is_some() {
            return Err(CliError::Input(format!("two values for {g}")));
        }
    }
    Ok(out)
}

fn character_laurent(a: &RenormArgs) -> Result<Character<LaurentSeries>, CliError> {
    Ok(match &a.phi {
        Some(p) => Character::from_values(phi_table(p, a.max_valence, |v: LaurentSeries| v)?),
        None => toy_laurent_character(a.seed),
    })
}

fn character_logform(a: &RenormArgs) -> Result<Character<MultiLogForm>, CliError> {
    Ok(match &a.phi {
        Some(p) => Character::from_values(phi_table(p, a.max_valence, |v: LogForm| MultiLogForm::from_logform(&v))?),
        None => toy_feynman_character(a.n_vertices, a.k_external, a.seed),
    })
}

fn roots(a: &RenormArgs) -> Result<Vec<CanonicalGraph>, CliError> {
    let graphs = parse_graphs(read_json(&a.graphs)?, a.max_valence)?;
    let mut out = Vec::new();
    for g in graphs {
        g.one_pi_check().map_err(|e| CliError::Input(format!("not 1PI: {e}")))?;
        let c = g.canonical();
        if c.degree() > a.max_degree {
            return Err(CliError::Input(format!("{c} has degree {} above --max-degree {}", c.degree(), a.max_degree)));
        }
        out.push(c);
    }
    Ok(out)
}

fn renorm_report<A: RotaBaxter + serde::Serialize>(a: &RenormArgs, phi: &Character<A>) -> Result<Value, CliError> {
    let hopf = HopfAlgebra::with_max_valence(a.max_valence);
    let pair = birkhoff_factorize(&hopf, phi, &roots(a)?, a.max_degree)?;
    if let Some(g) = pair.image_violation() {
        return Err(CliError::Input(format!("factorization left the subalgebras at {g}")));
    }
    let mut rows = Vec::new();
    for (g, minus) in pair.minus.table() {
        let mut row = graph_json(&g);
        row["phi"] = serde_json::to_value(phi.generator(&g)?)?;
        row["phi_minus"] = serde_json::to_value(minus)?;
        row["phi_plus"] = serde_json::to_value(pair.plus.generator(&g)?)?;
        rows.push(row);
    }
    Ok(json!({ "target": format!("{:?}", a.target).to_lowercase(), "max_degree": a.max_degree, "graphs": rows }))
}

fn beta_report<A: RotaBaxter + serde::Serialize>(a: &RenormArgs, phi: &Character<A>) -> Result<Value, CliError> {
    let hopf = HopfAlgebra::with_max_valence(a.max_valence);
    let pair = birkhoff_factorize(&hopf, phi, &roots(a)?, a.max_degree)?;
    let beta = beta_function(&hopf, &pair, a.max_degree)?;
    let frame = universal_frame(&hopf, &beta, a.max_degree)?;
    let mut rows = Vec::new();
    for (g, b) in beta.values() {
        let minus = pair.minus.generator(g)?;
        let f = frame.generator(g)?;
        let mut row = graph_json(g);
        row["beta"] = serde_json::to_value(b)?;
        row["phi_minus"] = serde_json::to_value(&minus)?;
        row["frame"] = serde_json::to_value(&f)?;
        row["frame_matches"] = Value::Bool(f == minus);
        rows.push(row);
    }
    Ok(json!({ "target": format!("{:?}", a.target).to_lowercase(), "max_degree": a.max_degree, "graphs": rows }))
}

fn renorm(a: &RenormArgs) -> Result<Value, CliError> {
    match a.target {
        Target::Laurent => renorm_report(a, &character_laurent(a)?),
        Target::Logform => renorm_report(a, &character_logform(a)?),
    }
}

fn beta(a: &RenormArgs) -> Result<Value, CliError> {
    match a.target {
        Target::Laurent => beta_report(a, &character_laurent(a)?),
        Target::Logform => beta_report(a, &character_logform(a)?),
    }
}

fn divisors(a: &DivisorArgs) -> Value {
    let labels: Vec<String> = divisor_labels(a.n, a.k).iter().map(ToString::to_string).collect();
    json!({ "n": a.n, "k": a.k, "count": labels.len(), "labels": labels })
}
