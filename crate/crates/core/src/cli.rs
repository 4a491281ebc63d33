//! Command-line frontend. Every output starts with a header that records the
//! full configuration, so each row can be regenerated from its own file.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::channel::{ChannelError, ChannelFamily, FamilyKind, TransferFunction};
use crate::de::{self, CoupledDe, DeConfig, DeError, ExitVariant, ThresholdCell, TraceConfig};
use crate::ensemble::{self, EnsembleError, EnsembleParams, TannerGraph};
use crate::sim::{self, SimError};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Parser, Serialize)]
#[command(name = "scmn", version, about = "Thresholds, EBP curves and simulations for coupled MacKay-Neal codes on subspace channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Bisection thresholds for every (channel, m) pair.
    Threshold(ThresholdArgs),
    /// Trace the EBP curve by continuation in the mean channel-side erasure.
    ExitCurve(ExitCurveArgs),
    /// Channel capacity in bits per channel bit.
    Capacity(CapacityArgs),
    /// Design rate of the coupled ensemble.
    Rate(RateArgs),
    /// Monte-Carlo decoding of sampled codes.
    Simulate(SimulateArgs),
    /// Sample a Tanner graph and write it in the plain-text graph format.
    Graph(GraphArgs),
    /// Decode a graph file once under sampled channel noise.
    Decode(DecodeArgs),
    /// Evaluate the channel transfer function f(z).
    Transfer(TransferArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Family {
    Cd,
    Bd,
}

impl From<Family> for FamilyKind {
    fn from(f: Family) -> Self {
        match f {
            Family::Cd => FamilyKind::Cd,
            Family::Bd => FamilyKind::Bd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Variant {
    Full,
    Extrinsic,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EnsembleOpts {
    #[arg(long, default_value_t = 4)]
    pub dl: usize,
    #[arg(long, default_value_t = 2)]
    pub dr: usize,
    #[arg(long, default_value_t = 2)]
    pub dg: usize,
    /// Coupling half-width: sections run from -L to L.
    #[arg(short = 'L', long = "half-width", default_value_t = 10)]
    pub half_width: usize,
    /// Randomised window size.
    #[arg(short = 'w', long = "window", default_value_t = 2)]
    pub window: usize,
}

impl EnsembleOpts {
    fn params(&self) -> Result<EnsembleParams, EnsembleError> {
        EnsembleParams::new(self.dl, self.dr, self.dg, self.half_width, self.window)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputOpts {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DeOpts {
    /// Decoding succeeds once every punctured erasure probability is below this.
    #[arg(long, default_value_t = de::DEFAULT_TOL)]
    pub de_tol: f64,
    #[arg(long, default_value_t = de::DEFAULT_STALL_TOL)]
    pub stall_tol: f64,
    #[arg(long, default_value_t = de::DEFAULT_MAX_ITER)]
    pub max_iter: usize,
}

impl DeOpts {
    fn config(&self) -> DeConfig {
        DeConfig {
            tol: self.de_tol,
            stall_tol: self.stall_tol,
            max_iter: self.max_iter,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ThresholdArgs {
    #[command(flatten)]
    pub ensemble: EnsembleOpts,
    #[arg(long = "channel", value_enum, value_delimiter = ',', default_value = "cd")]
    pub channels: Vec<Family>,
    #[arg(short = 'm', value_delimiter = ',', default_value = "1")]
    pub m: Vec<usize>,
    #[arg(long, default_value_t = de::DEFAULT_BISECT_TOL)]
    pub bisect_tol: f64,
    #[command(flatten)]
    pub de: DeOpts,
    #[command(flatten)]
    pub output: OutputOpts,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExitCurveArgs {
    #[command(flatten)]
    pub ensemble: EnsembleOpts,
    #[arg(long = "channel", value_enum, default_value = "cd")]
    pub channel: Family,
    #[arg(short = 'm', default_value_t = 2)]
    pub m: usize,
    /// First (largest) anchor value.
    #[arg(long, default_value_t = 0.99)]
    pub chi_hi: f64,
    /// Last (smallest) anchor value.
    #[arg(long, default_value_t = 0.01)]
    pub chi_lo: f64,
    #[arg(long, default_value_t = 99)]
    pub points: usize,
    /// Extra refinement passes around the leftmost point.
    #[arg(long, default_value_t = 0)]
    pub refine: usize,
    #[arg(long, value_enum, default_value_t = Variant::Full)]
    pub variant: Variant,
    #[arg(long, default_value_t = 200_000)]
    pub max_rounds: usize,
    #[command(flatten)]
    pub output: OutputOpts,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ChannelOpts {
    #[arg(long = "channel", value_enum, default_value = "cd")]
    pub channel: Family,
    #[arg(short = 'm', default_value_t = 1)]
    pub m: usize,
    #[arg(long)]
    pub eps: f64,
}

impl ChannelOpts {
    fn family(&self) -> Result<ChannelFamily, ChannelError> {
        FamilyKind::from(self.channel).with_epsilon(self.m, self.eps)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CapacityArgs {
    #[command(flatten)]
    pub channel: ChannelOpts,
    #[command(flatten)]
    pub output: OutputOpts,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RateArgs {
    #[command(flatten)]
    pub ensemble: EnsembleOpts,
    #[command(flatten)]
    pub output: OutputOpts,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub ensemble: EnsembleOpts,
    #[arg(long = "channel", value_enum, default_value = "cd")]
    pub channel: Family,
    #[arg(short = 'm', default_value_t = 2)]
    pub m: usize,
    /// Comma-separated channel parameters.
    #[arg(long, value_delimiter = ',', required = true)]
    pub eps: Vec<f64>,
    /// Bits per section (M); defaults to the smallest valid size times 100.
    #[arg(short = 'M', long = "bits")]
    pub m_bits: Option<usize>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Emit the mean centre-section erasure trajectory instead of error rates.
    #[arg(long)]
    pub trajectory: bool,
    #[command(flatten)]
    pub output: OutputOpts,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GraphArgs {
    #[command(flatten)]
    pub ensemble: EnsembleOpts,
    #[arg(short = 'M', long = "bits")]
    pub m_bits: Option<usize>,
    /// Channel symbol width.
    #[arg(short = 'm', default_value_t = 2)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DecodeArgs {
    /// Graph file in the plain-text format written by `graph`.
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long = "channel", value_enum, default_value = "cd")]
    pub channel: Family,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputOpts,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TransferArgs {
    #[command(flatten)]
    pub channel: ChannelOpts,
    /// Comma-separated evaluation points; defaults to 0, 0.1, .., 1.
    #[arg(long, value_delimiter = ',')]
    pub z: Vec<f64>,
    #[command(flatten)]
    pub output: OutputOpts,
}

/// Failure with its exit status.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_INTERNAL,
            message: e.to_string(),
        }
    }

    fn category(&self) -> &'static str {
        match self.code {
            EXIT_USAGE => "invalid-argument",
            EXIT_NO_CONVERGENCE => "no-convergence",
            _ => "internal",
        }
    }
}

impl From<EnsembleError> for CliError {
    fn from(e: EnsembleError) -> Self {
        Self::usage(e)
    }
}

impl From<ChannelError> for CliError {
    fn from(e: ChannelError) -> Self {
        Self::usage(e)
    }
}

impl From<DeError> for CliError {
    fn from(e: DeError) -> Self {
        match e {
            DeError::Inconclusive { .. } => Self {
                code: EXIT_NO_CONVERGENCE,
                message: e.to_string(),
            },
            DeError::Channel(_) | DeError::Config(_) => Self::usage(e),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Ensemble(_) | SimError::Channel(_) | SimError::SymbolWidth { .. } | SimError::NoTrials => Self::usage(e),
            _ => Self::internal(e),
        }
    }
}

/// Formats `x` with 9 significant digits.
pub fn sig9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..9).contains(&exp) {
        format!("{:.*}", (8 - exp) as usize, x)
    } else {
        format!("{x:.8e}")
    }
}

#[derive(Debug, Clone)]
enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => sig9(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => sig9(*x).parse::<f64>().map(Value::from).unwrap_or(Value::Null),
            Cell::Int(n) => Value::from(*n),
            Cell::Text(s) => Value::from(s.clone()),
        }
    }
}

struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
    notes: Vec<(String, String)>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn note(&mut self, key: &str, value: impl std::fmt::Display) {
        self.notes.push((key.to_string(), value.to_string()));
    }

    fn render(&self, command: &str, config: &Value, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = format!("# scmn {}\n# command: {command}\n# config: {config}\n", env!("CARGO_PKG_VERSION"));
                for (k, v) in &self.notes {
                    out.push_str(&format!("# {k}: {v}\n"));
                }
                out.push_str(&self.columns.join(","));
                out.push('\n');
                for row in &self.rows {
                    out.push_str(&row.iter().map(Cell::render).collect::<Vec<_>>().join(","));
                    out.push('\n');
                }
                out
            }
            Format::Json => {
                let notes: serde_json::Map<String, Value> = self.notes.iter().map(|(k, v)| (k.clone(), Value::from(v.clone()))).collect();
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| Value::Object(self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.json())).collect()))
                    .collect();
                let doc = json!({
                    "header": {
                        "tool": "scmn",
                        "version": env!("CARGO_PKG_VERSION"),
                        "command": command,
                        "config": config,
                        "notes": notes,
                    },
                    "rows": rows,
                });
                format!("{}\n", serde_json::to_string_pretty(&doc).expect("json values serialise"))
            }
        }
    }
}

fn emit(text: &str, out: &Option<PathBuf>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::internal(format!("{}: {e}", path.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(CliError::internal),
    }
}

fn config_json(args: &impl Serialize) -> Value {
    serde_json::to_value(args).expect("arguments serialise")
}

fn threshold_cmd(a: &ThresholdArgs) -> Result<Table, CliError> {
    let params = a.ensemble.params()?;
    if !(a.bisect_tol > 0.0) {
        return Err(CliError::usage("--bisect-tol must be positive"));
    }
    let cells: Vec<ThresholdCell> = a
        .channels
        .iter()
        .flat_map(|&ch| a.m.iter().map(move |&m| ThresholdCell { params, kind: ch.into(), m }))
        .collect();
    for c in &cells {
        c.kind.with_epsilon(c.m, 0.5)?;
    }
    let results = de::threshold_table(&cells, a.bisect_tol, &a.de.config());
    let mut table = Table::new(&["m", "family", "L", "w", "epsilon_star", "bisect_tol"]);
    table.note("de", format!("tol={:e} stall_tol={:e} max_iter={}", a.de.de_tol, a.de.stall_tol, a.de.max_iter));
    for (cell, r) in cells.iter().zip(results) {
        table.rows.push(vec![
            Cell::Int(cell.m as u64),
            Cell::Text(cell.kind.name().to_string()),
            Cell::Int(params.half_width as u64),
            Cell::Int(params.window as u64),
            Cell::Num(r?),
            Cell::Num(a.bisect_tol),
        ]);
    }
    Ok(table)
}

fn exit_curve_cmd(a: &ExitCurveArgs) -> Result<Table, CliError> {
    let params = a.ensemble.params()?;
    if a.points < 2 || !(a.chi_hi > a.chi_lo) {
        return Err(CliError::usage("need --points >= 2 and --chi-hi > --chi-lo"));
    }
    let de = CoupledDe::new(params, a.channel.into(), a.m)?;
    let config = TraceConfig {
        max_rounds: a.max_rounds,
        variant: match a.variant {
            Variant::Full => ExitVariant::Full,
            Variant::Extrinsic => ExitVariant::Extrinsic,
        },
        ..TraceConfig::default()
    };
    let grid = de::chi_grid(a.chi_hi, a.chi_lo, a.points);
    let trace = de.trace(&grid, &config)?;
    if trace.points.is_empty() {
        return Err(CliError {
            code: EXIT_NO_CONVERGENCE,
            message: "no anchor converged to a fixed point".into(),
        });
    }
    let mut table = Table::new(&["chi", "epsilon", "h", "residual", "iterations"]);
    table.note(
        "trace",
        format!(
            "epsilon_tol={:e} state_tol={:e} epsilon_change_tol={:e} residual_tol={:e}",
            config.epsilon_tol,
            config.state_tol,
            config.epsilon_change_tol,
            de::CURVE_RESIDUAL_TOL
        ),
    );
    if a.refine > 0 {
        if let Some(p) = de.leftmost_point(&grid, a.refine, 9, &config)? {
            table.note("leftmost_epsilon", sig9(p.epsilon));
        }
    } else if let Some(p) = trace.leftmost() {
        table.note("leftmost_epsilon", sig9(p.epsilon));
    }
    for f in &trace.failures {
        table.note("skipped", format!("chi={} ({})", sig9(f.chi), f.reason));
    }
    for p in &trace.points {
        table.rows.push(vec![
            Cell::Num(p.chi),
            Cell::Num(p.epsilon),
            Cell::Num(p.h),
            Cell::Num(p.residual),
            Cell::Int(p.rounds as u64),
        ]);
    }
    Ok(table)
}

fn capacity_cmd(a: &CapacityArgs) -> Result<Table, CliError> {
    let fam = a.channel.family()?;
    let mut table = Table::new(&["family", "m", "epsilon", "capacity"]);
    table.rows.push(vec![
        Cell::Text(fam.kind().name().to_string()),
        Cell::Int(fam.m() as u64),
        Cell::Num(a.channel.eps),
        Cell::Num(fam.capacity()?),
    ]);
    Ok(table)
}

fn rate_cmd(a: &RateArgs) -> Result<Table, CliError> {
    let p = a.ensemble.params()?;
    let exact = p.design_rate_exact()?;
    let mut table = Table::new(&["dl", "dr", "dg", "L", "w", "rate", "rate_exact"]);
    table.rows.push(vec![
        Cell::Int(p.dl as u64),
        Cell::Int(p.dr as u64),
        Cell::Int(p.dg as u64),
        Cell::Int(p.half_width as u64),
        Cell::Int(p.window as u64),
        Cell::Num(p.design_rate()),
        Cell::Text(format!("{}/{}", exact.numer(), exact.denom())),
    ]);
    Ok(table)
}

fn resolve_m_bits(params: &EnsembleParams, m_bits: Option<usize>, m: usize) -> Result<usize, CliError> {
    let m_bits = m_bits.unwrap_or_else(|| 100 * params.smallest_graph_size(m));
    params.check_graph_size(m_bits, m)?;
    Ok(m_bits)
}

fn simulate_cmd(a: &SimulateArgs) -> Result<Table, CliError> {
    let params = a.ensemble.params()?;
    let kind: FamilyKind = a.channel.into();
    kind.with_epsilon(a.m, 0.5)?;
    let m_bits = resolve_m_bits(&params, a.m_bits, a.m)?;
    let rows = sim::run_experiment(&params, m_bits, |e| kind.with_epsilon(a.m, e), &a.eps, a.trials, a.seed)?;
    let mut table = if a.trajectory {
        Table::new(&["epsilon", "round", "q_mean", "q_std", "trials", "M", "seed"])
    } else {
        Table::new(&["epsilon", "trials", "M", "ber_mean", "ber_std", "seed"])
    };
    table.note("M", m_bits);
    table.note("trial_seed", "splitmix64(splitmix64(splitmix64(seed) ^ grid_index) ^ trial_index)");
    for r in rows {
        if a.trajectory {
            for (round, (mean, std)) in r.trajectory_mean.iter().zip(&r.trajectory_std).enumerate() {
                table.rows.push(vec![
                    Cell::Num(r.epsilon),
                    Cell::Int(round as u64),
                    Cell::Num(*mean),
                    Cell::Num(*std),
                    Cell::Int(r.trials as u64),
                    Cell::Int(m_bits as u64),
                    Cell::Int(r.seed),
                ]);
            }
        } else {
            table.rows.push(vec![
                Cell::Num(r.epsilon),
                Cell::Int(r.trials as u64),
                Cell::Int(m_bits as u64),
                Cell::Num(r.ber_mean),
                Cell::Num(r.ber_std),
                Cell::Int(r.seed),
            ]);
        }
    }
    Ok(table)
}

fn graph_cmd(a: &GraphArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let params = a.ensemble.params()?;
    let m_bits = resolve_m_bits(&params, a.m_bits, a.m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let graph = ensemble::sample_graph(&params, m_bits, a.m, &mut rng)?;
    let header = format!(
        "# scmn {}\n# command: graph\n# config: {}\n",
        env!("CARGO_PKG_VERSION"),
        config_json(a)
    );
    emit(&(header + &graph.to_text()), &a.out, stdout)
}

fn decode_cmd(a: &DecodeArgs) -> Result<Table, CliError> {
    let text = std::fs::read_to_string(&a.graph).map_err(|e| CliError::usage(format!("{}: {e}", a.graph.display())))?;
    let graph = TannerGraph::from_text(&text)?;
    let dist = FamilyKind::from(a.channel).with_epsilon(graph.symbol_width(), a.eps)?.dimension_distribution()?;
    let r = sim::decode_graph(&graph, &dist, a.seed)?;
    let mut table = Table::new(&["epsilon", "bit_erasure_rate", "punctured_erasure_rate", "iterations", "seed"]);
    table.note(
        "residual_erasures_per_section",
        r.residual_erasures_per_section.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "),
    );
    table.rows.push(vec![
        Cell::Num(a.eps),
        Cell::Num(r.bit_erasure_rate),
        Cell::Num(r.punctured_erasure_rate),
        Cell::Int(r.iterations_to_stall as u64),
        Cell::Int(a.seed),
    ]);
    Ok(table)
}

fn transfer_cmd(a: &TransferArgs) -> Result<Table, CliError> {
    let fam = a.channel.family()?;
    let f = TransferFunction::new(&fam.dimension_distribution()?)?;
    let zs: Vec<f64> = if a.z.is_empty() { (0..=10).map(|k| k as f64 / 10.0).collect() } else { a.z.clone() };
    let mut table = Table::new(&["z", "f"]);
    for z in zs {
        table.rows.push(vec![Cell::Num(z), Cell::Num(f.eval_checked(z)?)]);
    }
    Ok(table)
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let (name, table, output, config) = match &cli.command {
        Command::Threshold(a) => ("threshold", threshold_cmd(a)?, &a.output, config_json(a)),
        Command::ExitCurve(a) => ("exit-curve", exit_curve_cmd(a)?, &a.output, config_json(a)),
        Command::Capacity(a) => ("capacity", capacity_cmd(a)?, &a.output, config_json(a)),
        Command::Rate(a) => ("rate", rate_cmd(a)?, &a.output, config_json(a)),
        Command::Simulate(a) => ("simulate", simulate_cmd(a)?, &a.output, config_json(a)),
        Command::Decode(a) => ("decode", decode_cmd(a)?, &a.output, config_json(a)),
        Command::Transfer(a) => ("transfer", transfer_cmd(a)?, &a.output, config_json(a)),
        Command::Graph(a) => return graph_cmd(a, stdout),
    };
    emit(&table.render(name, &config, output.format), &output.out, stdout)
}

/// Parses `argv`, runs the command and returns the process exit status.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = if code == 0 {
                write!(stdout, "{}", e.render())
            } else {
                write!(stderr, "{}", e.render())
            };
            return code;
        }
    };
    match dispatch(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error[{}]: {}", e.category(), e.message);
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("scmn").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    fn data_rows(csv: &str) -> Vec<Vec<String>> {
        csv.lines()
            .filter(|l| !l.starts_with('#'))
            .skip(1)
            .map(|l| l.split(',').map(str::to_string).collect())
            .collect()
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(sig9(0.5), "0.500000000");
        assert_eq!(sig9(0.49950911), "0.499509110");
        assert_eq!(sig9(1.0), "1.00000000");
        assert_eq!(sig9(11.0 / 24.0), "0.458333333");
        assert_eq!(sig9(1.5e-12), "1.50000000e-12");
        assert_eq!(sig9(0.0), "0");
    }

    #[test]
    fn capacity_example() {
        let (code, out, _) = run_capture(&["capacity", "--channel", "bd", "-m", "3", "--eps", "0.3"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("# scmn "));
        assert_eq!(data_rows(&out)[0][3], "0.700000000");
    }

    #[test]
    fn rate_example() {
        let (code, out, _) = run_capture(&["rate", "--dl", "4", "--dr", "2", "--dg", "2", "-L", "10", "-w", "2"]);
        assert_eq!(code, 0);
        let row = &data_rows(&out)[0];
        assert_eq!(row[5], "0.458333333");
        assert_eq!(row[6], "11/24");
    }

    #[test]
    fn json_output_has_header() {
        let (code, out, _) = run_capture(&["capacity", "--channel", "cd", "-m", "2", "--eps", "0.25", "--format", "json"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["header"]["command"], "capacity");
        assert_eq!(v["rows"][0]["capacity"].as_f64().unwrap(), 0.75);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_capture(&["capacity", "--eps", "1.5"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["rate", "--dl", "0"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["nonsense"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["--help"]).0, 0);
        let (code, _, err) = run_capture(&["threshold", "-L", "2", "-m", "1", "--max-iter", "2", "--bisect-tol", "0.1"]);
        assert_eq!(code, EXIT_NO_CONVERGENCE);
        assert!(err.contains("no-convergence"));
    }

    #[test]
    fn transfer_rows() {
        let (code, out, _) = run_capture(&["transfer", "--channel", "cd", "-m", "1", "--eps", "0.3", "--z", "0,0.5,1"]);
        assert_eq!(code, 0);
        let rows = data_rows(&out);
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r[1] == "0.300000000"));
    }
}
