use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cybertopo::dowker::{parse_straightline, whole_profile, windowed_profile, DEFAULT_MAX_BETTI_DIM};
use cybertopo::homology::{simplicial_chain_complex, Field};
use cybertopo::io;
use cybertopo::path::{cyclomatic, path_homology};
use cybertopo::tme::{select_bandwidth, DEFAULT_BANDWIDTHS, DEFAULT_BINS};
use cybertopo::wireless::{criticality_report, traffic_sim, ActivationSheaf, ComplexKind, CriticalityReport};

#[derive(Parser)]
#[command(name = "cybertopo", version, about = "Exact computational topology for code, digraphs, wireless networks and 1D mixtures")]
struct Cli {
    /// Where to write the main result; `-` is standard output.
    #[arg(long, short, global = true, default_value = "-")]
    output: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Betti numbers of a complex given by its facets.
    Homology(HomologyArgs),
    /// Dowker homology of a relation or straight-line program, whole or windowed.
    Dowker(DowkerArgs),
    /// Non-regular path homology of a digraph.
    PathHomology(PathArgs),
    /// Link/interference complexes, sections, local homology and traffic.
    Network(NetworkArgs),
    /// Topological mixture estimation of 1D samples.
    Tme(TmeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    F2,
    Q,
}

impl From<FieldArg> for Field {
    fn from(f: FieldArg) -> Field {
        match f {
            FieldArg::F2 => Field::Gf2,
            FieldArg::Q => Field::Rational,
        }
    }
}

#[derive(Args)]
struct HomologyArgs {
    facets: PathBuf,
    #[arg(long, value_enum, default_value = "f2")]
    field: FieldArg,
    /// Highest chain degree; when the complex goes higher, homology is
    /// reported only below it.
    #[arg(long)]
    max_dim: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum DowkerInput {
    /// `.csv` files are relations, anything else straight-line code.
    Auto,
    Relation,
    Code,
}

#[derive(Args)]
struct DowkerArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    format: DowkerInput,
    /// Rows per window; without it the whole relation is one window.
    #[arg(long)]
    window: Option<usize>,
    /// Highest homology degree reported.
    #[arg(long, default_value_t = DEFAULT_MAX_BETTI_DIM)]
    max_dim: usize,
}

#[derive(Args)]
struct PathArgs {
    /// Edge list, or a `digraph { … }` file.
    edges: PathBuf,
    #[arg(long, default_value_t = 2)]
    max_p: usize,
    /// Report reduced Betti numbers as the primary row.
    #[arg(long)]
    reduced: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Link,
    Interference,
}

impl From<KindArg> for ComplexKind {
    fn from(k: KindArg) -> ComplexKind {
        match k {
            KindArg::Link => ComplexKind::Link,
            KindArg::Interference => ComplexKind::Interference,
        }
    }
}

#[derive(Args)]
struct NetworkArgs {
    nodes: PathBuf,
    #[arg(long, value_enum, default_value = "link")]
    complex: KindArg,
    /// Local homology table for every vertex and edge.
    #[arg(long)]
    lh: bool,
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    lh_degrees: Vec<usize>,
    #[arg(long)]
    sections: bool,
    #[arg(long)]
    cohomology: bool,
    /// Simulate this many packets.
    #[arg(long)]
    traffic: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cap on simplex dimension for the reported complexes.
    #[arg(long)]
    max_dim: Option<usize>,
}

#[derive(Args)]
struct TmeArgs {
    samples: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    #[arg(long, default_value_t = DEFAULT_BANDWIDTHS)]
    bandwidths: usize,
    /// Also write the density and its components as CSV here.
    #[arg(long)]
    csv: Option<String>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] cybertopo::Error),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(cybertopo::Error::Parse { .. }) => 2,
            CliError::Core(cybertopo::Error::InvalidInput(_)) => 3,
            CliError::Core(cybertopo::Error::Internal(_)) => 4,
            CliError::Io { .. } => 3,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn write_to(target: &str, text: &str) -> Result<()> {
    let res = if target == "-" {
        std::io::stdout().lock().write_all(text.as_bytes())
    } else {
        fs::write(target, text)
    };
    res.map_err(|e| CliError::Io {
        path: target.to_string(),
        message: e.to_string(),
    })
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serialises") + "\n"
}

#[derive(Serialize)]
struct HomologyReport {
    field: Field,
    dims: Vec<usize>,
    ranks: Vec<usize>,
    betti: Vec<usize>,
    reduced_betti: Vec<i64>,
    cycles: Vec<usize>,
    boundaries: Vec<usize>,
    euler_characteristic: i64,
    truncated: bool,
}

fn cmd_homology(a: &HomologyArgs) -> Result<String> {
    let k = io::read_complex(&read(&a.facets)?, None)?;
    let cc = simplicial_chain_complex(&k, a.field.into(), a.max_dim);
    cc.verify()?;
    let b = cc.betti();
    Ok(json(&HomologyReport {
        field: cc.field,
        dims: cc.dims.clone(),
        ranks: cc.ranks(),
        betti: b.betti,
        reduced_betti: b.reduced,
        cycles: b.cycles,
        boundaries: b.boundaries,
        euler_characteristic: k.euler_characteristic(),
        truncated: cc.truncated,
    }))
}

fn cmd_dowker(a: &DowkerArgs) -> Result<String> {
    let text = read(&a.input)?;
    let is_csv = a.input.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let r = match a.format {
        DowkerInput::Relation => io::parse_relation_csv(&text)?,
        DowkerInput::Code => parse_straightline(&text)?,
        DowkerInput::Auto if is_csv => io::parse_relation_csv(&text)?,
        DowkerInput::Auto => parse_straightline(&text)?,
    };
    let profile = match a.window {
        Some(w) => windowed_profile(&r, w, a.max_dim)?,
        None => whole_profile(&r, a.max_dim)?,
    };
    Ok(profile.to_csv())
}

fn cmd_path(a: &PathArgs) -> Result<String> {
    let d = io::parse_digraph(&read(&a.edges)?)?;
    let h = path_homology(&d, a.max_p);
    let row = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let signed = |v: &[i64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let plain: Vec<i64> = h.betti.betti.iter().map(|&b| b as i64).collect();
    let mut out = String::new();
    out.push_str(&format!("vertices: {}\n", d.vertex_count()));
    out.push_str(&format!("arcs: {}\n", d.arc_count()));
    out.push_str(&format!("degrees: {}\n", row(&h.degrees)));
    out.push_str(&format!("allowed_paths: {}\n", row(&h.allowed_counts[..=a.max_p])));
    out.push_str(&format!("omega_dims: {}\n", row(&h.omega_dims[..=a.max_p])));
    if a.reduced {
        out.push_str(&format!("betti_reduced: {}\n", signed(&h.betti.reduced)));
        out.push_str(&format!("betti: {}\n", signed(&plain)));
    } else {
        out.push_str(&format!("betti: {}\n", signed(&plain)));
        out.push_str(&format!("betti_reduced: {}\n", signed(&h.betti.reduced)));
    }
    out.push_str(&format!("cyclomatic: {}\n", cyclomatic(&d)));
    Ok(out)
}

#[derive(Serialize)]
struct SectionsReport {
    count: usize,
    complete: bool,
    transmitting: Option<Vec<Vec<String>>>,
}

#[derive(Serialize)]
struct TrafficOut {
    packets: u64,
    seed: u64,
    delivered: u64,
    dropped: u64,
    forwards: Vec<(String, u64)>,
}

#[derive(Serialize)]
struct NetworkReport {
    nodes: Vec<String>,
    complex: &'static str,
    link_facets: Vec<Vec<String>>,
    interference_facets: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    local_homology: Option<CriticalityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sections: Option<SectionsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cohomology: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    traffic: Option<TrafficOut>,
}

const SECTION_LIST_LIMIT: usize = 10_000;
const SECTION_COUNT_LIMIT: usize = 10_000_000;

fn cmd_network(a: &NetworkArgs) -> Result<String> {
    let w = io::parse_network_json(&read(&a.nodes)?)?;
    let kind: ComplexKind = a.complex.into();
    let link = w.link_complex(a.max_dim)?;
    let inter = w.interference_complex(a.max_dim)?;
    let facets = |k: &cybertopo::SimplicialComplex| -> Vec<Vec<String>> {
        k.facets().iter().map(|f| k.label_simplex(f)).collect()
    };
    let base = match kind {
        ComplexKind::Link => &link,
        ComplexKind::Interference => &inter,
    };
    let mut report = NetworkReport {
        nodes: w.labels(),
        complex: match kind {
            ComplexKind::Link => "link",
            ComplexKind::Interference => "interference",
        },
        link_facets: facets(&link),
        interference_facets: facets(&inter),
        local_homology: None,
        sections: None,
        cohomology: None,
        traffic: None,
    };
    if a.lh {
        report.local_homology = Some(criticality_report(&w, &a.lh_degrees, kind)?);
    }
    if a.sections || a.cohomology {
        let sheaf = ActivationSheaf::new(base.clone())?;
        if a.sections {
            let (count, complete) = sheaf.count_global_sections(SECTION_COUNT_LIMIT);
            let transmitting = (complete && count <= SECTION_LIST_LIMIT).then(|| {
                sheaf
                    .global_sections(None)
                    .iter()
                    .map(|s| s.transmitting().iter().map(|&n| base.label(n).to_string()).collect())
                    .collect()
            });
            report.sections = Some(SectionsReport {
                count,
                complete,
                transmitting,
            });
        }
        if a.cohomology {
            report.cohomology = Some(sheaf.vector_cohomology()?);
        }
    }
    if let Some(packets) = a.traffic {
        let t = traffic_sim(&w, packets, a.seed);
        report.traffic = Some(TrafficOut {
            packets,
            seed: a.seed,
            delivered: t.delivered,
            dropped: t.dropped,
            forwards: w.labels().into_iter().zip(t.forwards).collect(),
        });
    }
    Ok(json(&report))
}

#[derive(Serialize)]
struct TmeReport<'a> {
    samples: usize,
    bins: usize,
    scan: &'a cybertopo::tme::BandwidthScan,
    weights: &'a [f64],
    masses: Vec<f64>,
}

fn cmd_tme(a: &TmeArgs) -> Result<String> {
    let samples = io::parse_samples(&read(&a.samples)?)?;
    let est = select_bandwidth(&samples, a.bandwidths, a.bins)?;
    if let Some(target) = &a.csv {
        let mut csv = String::from("x,f");
        for m in 1..=est.decomposition.len() {
            csv.push_str(&format!(",component_{m}"));
        }
        csv.push('\n');
        for (i, (x, f)) in est.density.xs.iter().zip(&est.density.fs).enumerate() {
            csv.push_str(&format!("{x},{f}"));
            for c in &est.decomposition.components {
                csv.push_str(&format!(",{}", c[i]));
            }
            csv.push('\n');
        }
        write_to(target, &csv)?;
    }
    Ok(json(&TmeReport {
        samples: samples.len(),
        bins: a.bins,
        scan: &est.scan,
        weights: &est.decomposition.weights,
        masses: est.decomposition.masses(),
    }))
}

fn run(cli: &Cli) -> Result<()> {
    let text = match &cli.command {
        Command::Homology(a) => cmd_homology(a)?,
        Command::Dowker(a) => cmd_dowker(a)?,
        Command::PathHomology(a) => cmd_path(a)?,
        Command::Network(a) => cmd_network(a)?,
        Command::Tme(a) => cmd_tme(a)?,
    };
    write_to(&cli.output, &text)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
