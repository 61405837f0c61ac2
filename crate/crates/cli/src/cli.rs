use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hbackbone::evaluate::Mode;
use hbackbone::ingest::Namespace;

#[derive(Parser, Debug)]
#[command(
    name = "hbackbone",
    version,
    about = "Extract directed tag hierarchies from object-tag data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Read object-tag input and write tag frequencies and co-occurrence counts.
    Project(ProjectArgs),
    /// Keep co-occurring pairs whose z-score reaches the threshold.
    Prune(PruneArgs),
    /// Score and threshold directed edges of a pruned graph.
    Backbone(BackboneArgs),
    /// Drop edges implied by longer paths from a backbone file.
    Reduce(ReduceArgs),
    /// Generate benchmark object-tag networks from a reference hierarchy.
    Benchgen(BenchgenArgs),
    /// Score a backbone, or sweep a pruned graph, against a reference.
    Eval(EvalArgs),
    /// Run extraction or a benchmark end to end.
    Pipeline(Box<PipelineArgs>),
    /// Render a backbone file as Graphviz DOT.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Tsv,
    #[value(name = "obo+gaf")]
    OboGaf,
}

pub fn parse_namespace(s: &str) -> Result<Namespace, String> {
    s.parse().map_err(|e: hbackbone::Error| e.to_string())
}

pub fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: hbackbone::Error| e.to_string())
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// Object-tag TSV, or the OBO ontology with `--format obo+gaf`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    pub format: Format,
    /// GAF annotation file; repeat for several species.
    #[arg(long)]
    pub gaf: Vec<PathBuf>,
    /// Object column: zero-based index or header name.
    #[arg(long, default_value = "0")]
    pub object_column: String,
    /// Tag column: zero-based index or header name.
    #[arg(long, default_value = "1")]
    pub tag_column: String,
    /// First TSV line is a header.
    #[arg(long)]
    pub header: bool,
    #[arg(long, default_value_t = '\t')]
    pub delimiter: char,
    /// GAF evidence codes to drop.
    #[arg(long, value_delimiter = ',')]
    pub exclude_evidence: Vec<String>,
    #[arg(long, value_parser = parse_namespace)]
    pub namespace: Option<Namespace>,
}

#[derive(Args, Debug, Clone)]
#[group(multiple = false)]
pub struct AlphaArgs {
    #[arg(long)]
    pub alpha_th: Option<f64>,
    /// Comma-separated, strictly increasing thresholds.
    #[arg(long, value_delimiter = ',')]
    pub alpha_grid: Option<Vec<f64>>,
    /// Pick the threshold that keeps this many of the strongest edges.
    #[arg(long)]
    pub target_edges: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ProjectArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct PruneArgs {
    /// Projection file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    pub z_th: f64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct BackboneArgs {
    /// Pruned-graph file.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub alpha: AlphaArgs,
    #[arg(long)]
    pub parsimonious: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct ReduceArgs {
    /// Backbone file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct BenchgenArgs {
    /// Hierarchy TSV or OBO file.
    #[arg(long)]
    pub reference: PathBuf,
    #[arg(long, value_parser = parse_namespace)]
    pub namespace: Option<Namespace>,
    #[arg(long)]
    pub n_products: usize,
    #[arg(long)]
    pub p_rw: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub ensembles: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Backbone file, or a pruned-graph file to sweep over `--alpha-grid`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub reference: PathBuf,
    #[arg(long, value_parser = parse_namespace)]
    pub namespace: Option<Namespace>,
    #[command(flatten)]
    pub alpha: AlphaArgs,
    /// Comma-separated evaluation modes.
    #[arg(long, value_delimiter = ',', value_parser = parse_mode, default_value = "edge,path")]
    pub mode: Vec<Mode>,
    #[arg(long)]
    pub parsimonious: bool,
    /// Restrict recall and negatives to reference terms seen in the input.
    #[arg(long)]
    pub restrict_to_observed: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct PipelineArgs {
    /// TOML pipeline config; other flags are then ignored except `--out-dir`
    /// and `--seed`, which override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub z_th: Option<f64>,
    #[command(flatten)]
    pub alpha: AlphaArgs,
    #[arg(long)]
    pub parsimonious: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Reference hierarchy; switches the run to benchmark mode.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub n_products: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub p_rw: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    pub ensembles: usize,
    #[arg(long, value_delimiter = ',', value_parser = parse_mode, default_value = "edge,path")]
    pub mode: Vec<Mode>,
    #[arg(long)]
    pub restrict_to_observed: bool,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    /// Backbone file.
    #[arg(long)]
    pub input: PathBuf,
    /// Reference used to class edges as documented or augmented.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long, value_parser = parse_namespace)]
    pub namespace: Option<Namespace>,
    #[arg(long)]
    pub out_dir: PathBuf,
}
