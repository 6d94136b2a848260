//! Command-line front end: verification suites, fidelity/probability tables,
//! circuit simulation, diagram export, resource-state reports and gate
//! counts.
//!
//! Exit codes: 0 success, 1 invariant failure, 2 configuration error,
//! 3 resource guard exceeded.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use pbt_core::bratteli::BratteliDiagram;
use pbt_core::circuits::{gate_count_report, simulate_vs_povm, synth_resource_prep, Encoding};
use pbt_core::error::Error as CoreError;
use pbt_core::partitions::{enumerate_partitions, Partition};
use pbt_core::protocols::{
    dpbt_f, epr_resource, isotypic_overlap, isotypic_projector, ppbt_f, prep_amplitude,
    protocol_summary, FDistribution, ProtocolKind, ResourceKind,
};
use pbt_core::verify::{run_all, VerifyConfig};

const GUARD_ENV: &str = "PBT_GUARD";

#[derive(Parser)]
#[command(name = "pbt", about = "Port-based teleportation toolkit", version)]
struct Cli {
    /// Optional JSON config file; explicit flags win over file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the module invariant suites and emit a machine-readable report.
    Verify(VerifyArgs),
    /// Emit the fidelity / success-probability table.
    Table(TableArgs),
    /// Simulate a measurement circuit against the exact POVM.
    Simulate(SimulateArgs),
    /// Export a Bratteli diagram.
    Diagram(DiagramArgs),
    /// Report a resource state: weights, overlaps, preparation amplitudes.
    Resource(ResourceArgs),
    /// Gate counts and scaling fit over a port range.
    Gatecount(GatecountArgs),
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    d_max: Option<usize>,
    /// Perturb a deformation value to confirm failures are caught.
    #[arg(long, default_value_t = false)]
    inject_fault: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ProtocolArg {
    Dpbt,
    Ppbt,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ResourceArg {
    Epr,
    Optimized,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum EncodingArg {
    Standard,
    Yamanouchi,
}

impl From<EncodingArg> for Encoding {
    fn from(e: EncodingArg) -> Self {
        match e {
            EncodingArg::Standard => Encoding::Standard,
            EncodingArg::Yamanouchi => Encoding::Yamanouchi,
        }
    }
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, value_enum)]
    protocol: Option<ProtocolArg>,
    #[arg(long, value_enum)]
    resource: Option<ResourceArg>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    n_min: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, value_enum)]
    encoding: Option<EncodingArg>,
    /// Use the EPR-resource probabilistic deformation.
    #[arg(long, default_value_t = false)]
    deformed: bool,
    /// Run the post-measurement correction pass and report fidelities.
    #[arg(long, default_value_t = false)]
    corr: bool,
    #[arg(long)]
    inputs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiagramArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = false)]
    dilated: bool,
    #[arg(long, value_enum)]
    format: Option<DiagramFormatArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum DiagramFormatArg {
    Dot,
    Json,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ResourceKindArg {
    Epr,
    Ppbt,
    Dpbt,
    CustomF,
}

#[derive(Args)]
struct ResourceArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, value_enum)]
    kind: Option<ResourceKindArg>,
    /// JSON file with [{"rows": [..], "weight": ..}, ...] for custom-f.
    #[arg(long)]
    f_file: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GatecountArgs {
    #[arg(long, value_enum)]
    encoding: Option<EncodingArg>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    n_min: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Optional config-file values; any explicit flag takes precedence.
#[derive(Default, Deserialize)]
struct FileConfig {
    guard: Option<usize>,
    n: Option<usize>,
    d: Option<usize>,
    n_min: Option<usize>,
    n_max: Option<usize>,
    d_max: Option<usize>,
    seed: Option<u64>,
    inputs: Option<usize>,
    protocol: Option<String>,
    resource: Option<String>,
    encoding: Option<String>,
    format: Option<String>,
}

enum CliError {
    Config(String),
    Invariant(String),
    Guard(String),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::GuardExceeded { .. } => CliError::Guard(e.to_string()),
            CoreError::InvalidArgument(_) | CoreError::InvalidPartition(_) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Invariant(other.to_string()),
        }
    }
}

fn guard(file: &FileConfig) -> usize {
    std::env::var(GUARD_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .or(file.guard)
        .unwrap_or(pbt_core::algebra::DEFAULT_DIM_GUARD)
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<FileConfig, CliError> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("bad config {}: {e}", p.display())))
        }
    }
}

fn parse_enum<T: Copy>(
    explicit: Option<T>,
    file: &Option<String>,
    from: impl Fn(&str) -> Option<T>,
    what: &str,
) -> Result<Option<T>, CliError> {
    if explicit.is_some() {
        return Ok(explicit);
    }
    match file {
        None => Ok(None),
        Some(s) => from(s)
            .map(Some)
            .ok_or_else(|| CliError::Config(format!("bad {what} value {s:?} in config file"))),
    }
}

fn cmd_verify(args: &VerifyArgs, file: &FileConfig) -> Result<(), CliError> {
    let config = VerifyConfig {
        n_max: args.n_max.or(file.n_max).unwrap_or(4),
        d_max: args.d_max.or(file.d_max).unwrap_or(3),
        guard: guard(file),
        inject_fault: args.inject_fault,
    };
    let reports = run_all(&config)?;
    let json =
        serde_json::to_string_pretty(&reports).map_err(|e| CliError::Invariant(e.to_string()))?;
    emit(&args.out, &json)?;
    if let Some(failed) = reports.iter().find(|r| !r.pass) {
        return Err(CliError::Invariant(format!(
            "invariant {} failed: residual {:e} > threshold {:e}",
            failed.name, failed.residual, failed.threshold
        )));
    }
    Ok(())
}

fn cmd_table(args: &TableArgs, file: &FileConfig) -> Result<(), CliError> {
    let protocol = parse_enum(
        args.protocol,
        &file.protocol,
        |s| match s {
            "dpbt" => Some(ProtocolArg::Dpbt),
            "ppbt" => Some(ProtocolArg::Ppbt),
            _ => None,
        },
        "protocol",
    )?;
    let resource = parse_enum(
        args.resource,
        &file.resource,
        |s| match s {
            "epr" => Some(ResourceArg::Epr),
            "optimized" => Some(ResourceArg::Optimized),
            _ => None,
        },
        "resource",
    )?;
    let format = parse_enum(
        args.format,
        &file.format,
        |s| match s {
            "csv" => Some(FormatArg::Csv),
            "json" => Some(FormatArg::Json),
            _ => None,
        },
        "format",
    )?
    .unwrap_or(FormatArg::Csv);
    let d = args.d.or(file.d).unwrap_or(2);
    let n_min = args.n_min.or(file.n_min).unwrap_or(2);
    let n_max = args.n_max.or(file.n_max).unwrap_or(5);
    if n_min > n_max || n_min == 0 || d < 2 {
        return Err(CliError::Config(format!(
            "invalid range n = {n_min}..{n_max}, d = {d}"
        )));
    }
    let protocols = match protocol {
        Some(ProtocolArg::Dpbt) => vec![ProtocolKind::Dpbt],
        Some(ProtocolArg::Ppbt) => vec![ProtocolKind::Ppbt],
        None => vec![ProtocolKind::Dpbt, ProtocolKind::Ppbt],
    };
    let resources = match resource {
        Some(ResourceArg::Epr) => vec![ResourceKind::Epr],
        Some(ResourceArg::Optimized) => vec![ResourceKind::Optimized],
        None => vec![ResourceKind::Epr, ResourceKind::Optimized],
    };
    let g = guard(file);
    let channel_guard = 1usize << 21;
    let mut rows = Vec::new();
    for &p in &protocols {
        for &r in &resources {
            for n in n_min..=n_max {
                rows.push(protocol_summary(p, r, n, d, g, channel_guard)?);
            }
        }
    }
    let content = match format {
        FormatArg::Json => {
            serde_json::to_string_pretty(&rows).map_err(|e| CliError::Invariant(e.to_string()))?
        }
        FormatArg::Csv => {
            let mut s = String::from("protocol,resource,n,d,F,p_succ,F_over_p,objective\n");
            for row in &rows {
                let proto = match row.protocol {
                    ProtocolKind::Dpbt => "dpbt",
                    ProtocolKind::Ppbt => "ppbt",
                };
                let res = match row.resource {
                    ResourceKind::Epr => "epr",
                    ResourceKind::Optimized => "optimized",
                };
                let obj = row
                    .objective
                    .map(|o| format!("{o:.11e}"))
                    .unwrap_or_default();
                s.push_str(&format!(
                    "{proto},{res},{},{},{:.11e},{:.11e},{:.11e},{obj}\n",
                    row.n, row.d, row.fidelity, row.success, row.ratio
                ));
            }
            s
        }
    };
    emit(&args.out, &content)
}

fn cmd_simulate(args: &SimulateArgs, file: &FileConfig) -> Result<(), CliError> {
    let n = args.n.or(file.n).unwrap_or(2);
    let d = args.d.or(file.d).unwrap_or(2);
    let encoding: Encoding = parse_enum(
        args.encoding,
        &file.encoding,
        |s| match s {
            "standard" => Some(EncodingArg::Standard),
            "yamanouchi" => Some(EncodingArg::Yamanouchi),
            _ => None,
        },
        "encoding",
    )?
    .unwrap_or(EncodingArg::Standard)
    .into();
    let seed = args.seed.or(file.seed).unwrap_or(7);
    let inputs = args.inputs.or(file.inputs).unwrap_or(20);
    let report = simulate_vs_povm(
        n,
        d,
        encoding,
        args.deformed,
        args.corr,
        inputs,
        seed,
        guard(file),
    )?;
    let json =
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Invariant(e.to_string()))?;
    emit(&args.out, &json)?;
    if report.max_tv_distance > 1e-7 {
        return Err(CliError::Invariant(format!(
            "simulated distribution deviates from the POVM: TV {:e}",
            report.max_tv_distance
        )));
    }
    Ok(())
}

fn cmd_diagram(args: &DiagramArgs, file: &FileConfig) -> Result<(), CliError> {
    let n = args.n.or(file.n).unwrap_or(5);
    let d = args.d.or(file.d).unwrap_or(3);
    let diagram = BratteliDiagram::build(n, d, args.dilated)?;
    let content = match args.format.unwrap_or(DiagramFormatArg::Dot) {
        DiagramFormatArg::Dot => diagram.export_dot(),
        DiagramFormatArg::Json => diagram.export_json(),
    };
    emit(&args.out, &content)
}

#[derive(Deserialize)]
struct FEntry {
    rows: Vec<usize>,
    weight: f64,
}

fn load_custom_f(n: usize, d: usize, path: &PathBuf) -> Result<FDistribution, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let entries: Vec<FEntry> =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("bad f file: {e}")))?;
    let pairs: Vec<(Partition, f64)> = entries
        .into_iter()
        .map(|e| {
            Partition::new(e.rows)
                .map(|p| (p, e.weight))
                .map_err(|err| CliError::Config(err.to_string()))
        })
        .collect::<Result<_, _>>()?;
    FDistribution::from_custom(n, d, &pairs).map_err(|e| CliError::Config(e.to_string()))
}

fn cmd_resource(args: &ResourceArgs, file: &FileConfig) -> Result<(), CliError> {
    let n = args.n.or(file.n).unwrap_or(3);
    let d = args.d.or(file.d).unwrap_or(2);
    let kind = args.kind.unwrap_or(ResourceKindArg::Epr);
    let (f, objective) = match kind {
        ResourceKindArg::Epr => (FDistribution::epr(n, d), None),
        ResourceKindArg::Ppbt => (ppbt_f(n, d), None),
        ResourceKindArg::Dpbt => {
            let (f, obj) = dpbt_f(n, d)?;
            (f, Some(obj))
        }
        ResourceKindArg::CustomF => {
            let path = args
                .f_file
                .as_ref()
                .ok_or_else(|| CliError::Config("custom-f requires --f-file".to_string()))?;
            (load_custom_f(n, d, path)?, None)
        }
    };

    #[derive(serde::Serialize)]
    struct ResourceReport {
        n: usize,
        d: usize,
        kind: String,
        objective: Option<f64>,
        weights: Vec<(String, f64)>,
        epr_isotypic_overlaps: Vec<(String, f64)>,
        prep_amplitudes: Vec<(String, String, f64)>,
        prep_circuit_residual: f64,
    }

    let epr = epr_resource(n, d);
    let mut overlaps = Vec::new();
    for mu in enumerate_partitions(n, d) {
        let p = isotypic_projector(&mu, n, d)?;
        overlaps.push((mu.to_string(), isotypic_overlap(&epr, &p)));
    }
    let mut amps = Vec::new();
    if matches!(kind, ResourceKindArg::Ppbt) {
        for k in 0..n {
            for nu in enumerate_partitions(k, d) {
                for a in nu.addable_cells(Some(d)) {
                    let amp = prep_amplitude(&nu, a, d)?;
                    amps.push((
                        nu.to_string(),
                        format!("({},{})", a.row, a.col),
                        pbt_core::partitions::rational_to_f64(&amp),
                    ));
                }
            }
        }
    }
    let prep = synth_resource_prep(n, d, &f)?;
    let report = ResourceReport {
        n,
        d,
        kind: match kind {
            ResourceKindArg::Epr => "epr".into(),
            ResourceKindArg::Ppbt => "ppbt".into(),
            ResourceKindArg::Dpbt => "dpbt".into(),
            ResourceKindArg::CustomF => "custom-f".into(),
        },
        objective,
        weights: f.weights.iter().map(|(p, w)| (p.to_string(), *w)).collect(),
        epr_isotypic_overlaps: overlaps,
        prep_amplitudes: amps,
        prep_circuit_residual: prep.verify_closed_form()?,
    };
    let json =
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Invariant(e.to_string()))?;
    emit(&args.out, &json)
}

fn cmd_gatecount(args: &GatecountArgs, file: &FileConfig) -> Result<(), CliError> {
    let d = args.d.or(file.d).unwrap_or(2);
    let n_min = args.n_min.or(file.n_min).unwrap_or(3);
    let n_max = args.n_max.or(file.n_max).unwrap_or(8);
    if n_min < 2 || n_min > n_max {
        return Err(CliError::Config(format!(
            "invalid range n = {n_min}..{n_max}"
        )));
    }
    let encoding: Encoding = parse_enum(
        args.encoding,
        &file.encoding,
        |s| match s {
            "standard" => Some(EncodingArg::Standard),
            "yamanouchi" => Some(EncodingArg::Yamanouchi),
            _ => None,
        },
        "encoding",
    )?
    .unwrap_or(EncodingArg::Standard)
    .into();
    let ns: Vec<usize> = (n_min..=n_max).collect();
    let report = gate_count_report(encoding, d, &ns)?;
    let format = parse_enum(
        args.format,
        &file.format,
        |s| match s {
            "csv" => Some(FormatArg::Csv),
            "json" => Some(FormatArg::Json),
            _ => None,
        },
        "format",
    )?
    .unwrap_or(FormatArg::Csv);
    let content = match format {
        FormatArg::Json => {
            serde_json::to_string_pretty(&report).map_err(|e| CliError::Invariant(e.to_string()))?
        }
        FormatArg::Csv => {
            let mut kinds: Vec<String> = report
                .rows
                .iter()
                .flat_map(|r| r.counts.keys().cloned())
                .collect();
            kinds.sort();
            kinds.dedup();
            let mut s = format!("n,total_gates,time_units,{}\n", kinds.join(","));
            for row in &report.rows {
                let per_kind: Vec<String> = kinds
                    .iter()
                    .map(|k| row.counts.get(k).copied().unwrap_or(0).to_string())
                    .collect();
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    row.n,
                    row.total_gates,
                    row.time_units,
                    per_kind.join(",")
                ));
            }
            s.push_str(&format!(
                "# fit_exponent,{:.6},fit_residual,{:.6}\n",
                report.fit_exponent, report.fit_residual
            ));
            s
        }
    };
    emit(&args.out, &content)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file = match load_config(&cli.config) {
        Ok(f) => f,
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            return ExitCode::from(2);
        }
        Err(_) => unreachable!("config loading only raises config errors"),
    };
    let result = match &cli.command {
        Command::Verify(args) => cmd_verify(args, &file),
        Command::Table(args) => cmd_table(args, &file),
        Command::Simulate(args) => cmd_simulate(args, &file),
        Command::Diagram(args) => cmd_diagram(args, &file),
        Command::Resource(args) => cmd_resource(args, &file),
        Command::Gatecount(args) => cmd_gatecount(args, &file),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Invariant(msg)) => {
            eprintln!("invariant failure: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Guard(msg)) => {
            eprintln!("guard exceeded: {msg}");
            ExitCode::from(3)
        }
    }
}
