//! End-to-end runs driven by a [`PipelineConfig`], with every output written
//! atomically and listed in a `manifest.json` together with its SHA-256
//! digest.
//!
//! Two runs with the same config and library version produce byte-identical
//! files. The manifest holds no timestamps or host details.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::backbone::{prune, transitive_reduce, HierarchicalBackbone, ScoredPairs};
use crate::benchgen::{self, BenchmarkConfig};
use crate::error::{Error, Result, StageExt};
use crate::evaluate::{
    sweep_scored, validate_grid, EvalReport, Mode, ReferenceIndex, SweepOptions,
};
use crate::graph::{project, BipartiteGraph};
use crate::ingest::{
    filter_to_ontology, merge_annotations, parse_gaf, parse_obo, parse_tsv_bipartite,
    EvidenceFilter, GafOptions, Namespace, OboOptions, ReferenceHierarchy, TsvOptions,
};
use crate::io::{self, format_float};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "format")]
pub enum InputSpec {
    #[serde(rename = "tsv")]
    Tsv {
        path: PathBuf,
        /// Column index or header name of the object id.
        #[serde(default = "default_object_column")]
        object: String,
        #[serde(default = "default_tag_column")]
        tag: String,
        #[serde(default)]
        header: bool,
        #[serde(default = "default_delimiter")]
        delimiter: char,
    },
    #[serde(rename = "obo+gaf")]
    OboGaf {
        obo: PathBuf,
        gaf: Vec<PathBuf>,
        /// Evidence codes to drop.
        #[serde(default)]
        exclude_evidence: Vec<String>,
    },
}

fn default_object_column() -> String {
    "0".into()
}
fn default_tag_column() -> String {
    "1".into()
}
fn default_delimiter() -> char {
    '\t'
}

impl InputSpec {
    pub fn tsv(path: impl Into<PathBuf>) -> Self {
        InputSpec::Tsv {
            path: path.into(),
            object: default_object_column(),
            tag: default_tag_column(),
            header: false,
            delimiter: default_delimiter(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaSelection {
    Threshold(f64),
    Grid(Vec<f64>),
    /// Threshold admitting this many of the strongest edges.
    TargetEdges(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkPlan {
    /// Hierarchy TSV, or an `.obo` file filtered by the run's namespace.
    pub reference: PathBuf,
    pub n_products: Vec<usize>,
    pub p_rw: Vec<f64>,
    #[serde(default = "default_ensembles")]
    pub ensembles: usize,
    #[serde(default = "default_modes")]
    pub modes: Vec<Mode>,
    /// Score recall and negatives over tags present in the generated data
    /// only.
    #[serde(default)]
    pub restrict_to_observed: bool,
}

fn default_ensembles() -> usize {
    1
}
fn default_modes() -> Vec<Mode> {
    vec![Mode::Edge, Mode::Path]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub input: Option<InputSpec>,
    pub z_th: f64,
    pub alpha: AlphaSelection,
    #[serde(default)]
    pub parsimonious: bool,
    #[serde(default)]
    pub namespace: Option<Namespace>,
    #[serde(default)]
    pub benchmark: Option<BenchmarkPlan>,
    pub out_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.z_th.is_finite() {
            return Err(Error::Config(format!(
                "z_th must be finite, got {}",
                self.z_th
            )));
        }
        match &self.alpha {
            AlphaSelection::Threshold(a) if !(a.is_finite() && *a > 0.0) => {
                return Err(Error::Config(format!("alpha_th must be positive, got {a}")))
            }
            AlphaSelection::Grid(g) => validate_grid(g)?,
            AlphaSelection::TargetEdges(0) => {
                return Err(Error::Config("target edge count must be at least 1".into()))
            }
            _ => {}
        }
        match &self.benchmark {
            Some(plan) => {
                if matches!(self.alpha, AlphaSelection::TargetEdges(_)) {
                    return Err(Error::Config(
                        "benchmarks need alpha as a threshold or grid".into(),
                    ));
                }
                if plan.n_products.is_empty() || plan.p_rw.is_empty() {
                    return Err(Error::Config(
                        "benchmark needs at least one n_products and p_rw".into(),
                    ));
                }
                if plan.modes.is_empty() {
                    return Err(Error::Config(
                        "benchmark needs at least one evaluation mode".into(),
                    ));
                }
                if plan.ensembles == 0 {
                    return Err(Error::Config("need at least one ensemble".into()));
                }
                for &n in &plan.n_products {
                    for &p in &plan.p_rw {
                        BenchmarkConfig::new(n, p, self.seed).validate()?;
                    }
                }
            }
            None => {
                if self.input.is_none() {
                    return Err(Error::Config(
                        "config needs an input or a benchmark section".into(),
                    ));
                }
                if matches!(self.alpha, AlphaSelection::Grid(_)) {
                    return Err(Error::Config(
                        "extraction needs a single alpha threshold or a target edge count".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn alpha_grid(&self) -> Vec<f64> {
        match &self.alpha {
            AlphaSelection::Threshold(a) => vec![*a],
            AlphaSelection::Grid(g) => g.clone(),
            AlphaSelection::TargetEdges(_) => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

impl FileDigest {
    pub fn of_bytes(path: impl Into<String>, contents: &[u8]) -> Self {
        FileDigest {
            path: path.into(),
            sha256: hex::encode(Sha256::digest(contents)),
            bytes: contents.len() as u64,
        }
    }

    pub fn of_file(path: &Path) -> Result<Self> {
        let contents = fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::of_bytes(path.display().to_string(), &contents))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub rng: String,
    pub config: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub summary: BTreeMap<String, serde_json::Value>,
    pub warnings: Vec<String>,
}

/// Outcome of a successful run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub manifest: Manifest,
}

impl RunOutcome {
    pub fn warnings(&self) -> &[String] {
        &self.manifest.warnings
    }
}

/// Run metadata recorded in a manifest next to the output digests.
#[derive(Debug, Clone, Default)]
pub struct RunRecord {
    pub command: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub summary: BTreeMap<String, serde_json::Value>,
    pub warnings: Vec<String>,
}

/// Writes the files of one run into a directory. Files are removed again if
/// the writer is dropped before [`ArtifactWriter::finish`].
pub struct ArtifactWriter {
    dir: PathBuf,
    written: Vec<FileDigest>,
    done: bool,
}

impl ArtifactWriter {
    pub fn create(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(ArtifactWriter {
            dir,
            written: Vec::new(),
            done: false,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let contents = contents.as_ref();
        io::write_atomic(&self.dir.join(name), contents)?;
        self.written.push(FileDigest::of_bytes(name, contents));
        Ok(())
    }

    /// Writes the manifest under `manifest_name`, listing every file written
    /// so far.
    pub fn finish(mut self, manifest_name: &str, record: RunRecord) -> Result<RunOutcome> {
        let manifest = Manifest {
            tool: "hbackbone".into(),
            version: VERSION.into(),
            command: record.command,
            seed: record.seed,
            rng: benchgen::RNG_ALGORITHM.into(),
            config: record.config,
            inputs: record.inputs,
            outputs: std::mem::take(&mut self.written),
            summary: record.summary,
            warnings: record.warnings,
        };
        let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        json.push('\n');
        io::write_atomic(&self.dir.join(manifest_name), json.as_bytes())?;
        self.done = true;
        Ok(RunOutcome {
            out_dir: self.dir.clone(),
            manifest,
        })
    }
}

impl Drop for ArtifactWriter {
    fn drop(&mut self) {
        if !self.done {
            for f in &self.written {
                let _ = fs::remove_file(self.dir.join(&f.path));
            }
        }
    }
}

/// Loaded input with digests of the files read and any warnings raised.
pub struct LoadedInput {
    pub graph: BipartiteGraph,
    pub digests: Vec<FileDigest>,
    pub warnings: Vec<String>,
}

pub fn load_input(spec: &InputSpec, namespace: Option<Namespace>) -> Result<LoadedInput> {
    match spec {
        InputSpec::Tsv {
            path,
            object,
            tag,
            header,
            delimiter,
        } => {
            if !delimiter.is_ascii() {
                return Err(Error::Config(format!(
                    "delimiter `{delimiter}` is not ASCII"
                )));
            }
            let opts = TsvOptions {
                object: object.parse()?,
                tag: tag.parse()?,
                delimiter: *delimiter as u8,
                has_header: *header,
            };
            Ok(LoadedInput {
                graph: parse_tsv_bipartite(path, &opts)?,
                digests: vec![FileDigest::of_file(path)?],
                warnings: Vec::new(),
            })
        }
        InputSpec::OboGaf {
            obo,
            gaf,
            exclude_evidence,
        } => {
            if gaf.is_empty() {
                return Err(Error::Config(
                    "obo+gaf input needs at least one GAF file".into(),
                ));
            }
            let obo_opts = OboOptions {
                namespace,
                ..OboOptions::default()
            };
            let (terms, _) = parse_obo(obo, &obo_opts)?;
            let gaf_opts = GafOptions {
                species: None,
                evidence: if exclude_evidence.is_empty() {
                    EvidenceFilter::All
                } else {
                    EvidenceFilter::Exclude(exclude_evidence.iter().cloned().collect())
                },
            };
            let mut warnings = Vec::new();
            let mut lists = Vec::with_capacity(gaf.len());
            let mut digests = vec![FileDigest::of_file(obo)?];
            for path in gaf {
                let (kept, dropped) = filter_to_ontology(parse_gaf(path, &gaf_opts)?, &terms);
                if dropped > 0 {
                    warnings.push(format!(
                        "{}: dropped {dropped} annotations to unknown, obsolete or out-of-namespace terms",
                        path.display()
                    ));
                }
                lists.push(kept);
                digests.push(FileDigest::of_file(path)?);
            }
            Ok(LoadedInput {
                graph: merge_annotations(&lists, namespace)?,
                digests,
                warnings,
            })
        }
    }
}

/// Reads a reference hierarchy: OBO when the extension is `.obo`, hierarchy
/// TSV otherwise.
pub fn load_reference(path: &Path, namespace: Option<Namespace>) -> Result<ReferenceHierarchy> {
    if path.extension().is_some_and(|e| e == "obo") {
        let opts = OboOptions {
            namespace,
            ..OboOptions::default()
        };
        Ok(parse_obo(path, &opts)?.1)
    } else {
        ReferenceHierarchy::read_tsv(path)
    }
}

/// Resolves a single threshold. A target larger than the number of scored
/// edges admits all of them, with a warning.
pub fn select_alpha(scored: &ScoredPairs, alpha: &AlphaSelection) -> Result<(f64, Option<String>)> {
    match alpha {
        AlphaSelection::Threshold(a) => Ok((*a, None)),
        AlphaSelection::TargetEdges(target) => match scored.alpha_for_target_edges(*target) {
            Some(a) => Ok((a, None)),
            None => match scored.edges().last() {
                Some(weakest) => Ok((
                    weakest.alpha,
                    Some(format!(
                        "only {} edges available, fewer than the {target} requested",
                        scored.edges().len()
                    )),
                )),
                None => Ok((
                    1.0,
                    Some("no directed pairs to select a threshold from".into()),
                )),
            },
        },
        AlphaSelection::Grid(_) => {
            Err(Error::Config("a single alpha threshold is required".into()))
        }
    }
}

fn config_value(cfg: &PipelineConfig) -> serde_json::Value {
    serde_json::to_value(cfg).expect("config serializes")
}

/// Ingest, project, prune and extract a backbone. Writes `pruned.tsv`,
/// `backbone.tsv`, `removed.tsv` (parsimonious runs only) and the manifest.
pub fn run_extract(cfg: &PipelineConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let spec = cfg
        .input
        .as_ref()
        .ok_or_else(|| Error::Config("extraction needs an input".into()))?;
    let LoadedInput {
        graph,
        digests,
        mut warnings,
    } = load_input(spec, cfg.namespace).stage("ingest")?;
    let projection = project(&graph);
    let pruned = prune(&projection, cfg.z_th).stage("prune")?;
    let scored = ScoredPairs::new(&pruned);
    let (alpha_th, warning) = select_alpha(&scored, &cfg.alpha).stage("backbone")?;
    warnings.extend(warning);
    let mut backbone = scored.backbone(alpha_th).stage("backbone")?;
    if cfg.parsimonious {
        backbone = transitive_reduce(&backbone).stage("reduce")?;
    }
    if backbone.is_empty() {
        warnings.push(format!("backbone is empty at alpha_th = {alpha_th}"));
    }

    let mut out = ArtifactWriter::create(&cfg.out_dir).stage("write")?;
    out.write("pruned.tsv", io::write_pruned(&pruned))
        .stage("write")?;
    out.write("backbone.tsv", io::write_backbone(&backbone))
        .stage("write")?;
    if cfg.parsimonious {
        out.write("removed.tsv", io::write_removed(&backbone))
            .stage("write")?;
    }
    let summary = extract_summary(&graph, &pruned, &backbone);
    let record = RunRecord {
        command: "extract".into(),
        seed: cfg.seed,
        config: config_value(cfg),
        inputs: digests,
        summary,
        warnings,
    };
    out.finish(MANIFEST_FILE, record).stage("write")
}

fn extract_summary(
    graph: &BipartiteGraph,
    pruned: &crate::backbone::PrunedGraph,
    backbone: &HierarchicalBackbone,
) -> BTreeMap<String, serde_json::Value> {
    BTreeMap::from([
        ("objects".to_owned(), graph.object_count().into()),
        ("tags".to_owned(), graph.tag_count().into()),
        ("object_tag_edges".to_owned(), graph.edge_count().into()),
        ("significant_pairs".to_owned(), pruned.pairs().len().into()),
        ("k_max".to_owned(), pruned.k_max().into()),
        ("alpha_th".to_owned(), backbone.alpha_threshold().into()),
        ("backbone_edges".to_owned(), backbone.edges().len().into()),
        ("removed_edges".to_owned(), backbone.removed().len().into()),
    ])
}

/// Mean and standard error of one metric across ensembles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanErr {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n)`; zero when `n = 1`.
    pub stderr: f64,
}

impl MeanErr {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let stderr = if values.len() < 2 {
            0.0
        } else {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        };
        MeanErr { mean, stderr }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub n_products: usize,
    pub p_rw: f64,
    pub alpha_th: f64,
    pub z_th: f64,
    pub mode: Mode,
    pub n: usize,
    pub precision: MeanErr,
    pub recall: MeanErr,
    pub tpr: MeanErr,
    pub fpr: MeanErr,
    pub n_pred: MeanErr,
}

impl AggregateRow {
    pub const CSV_HEADER: &'static str =
        "n_products,p_rw,alpha_th,z_th,mode,n,precision_mean,precision_stderr,\
recall_mean,recall_stderr,tpr_mean,tpr_stderr,fpr_mean,fpr_stderr,n_pred_mean,n_pred_stderr";

    pub fn csv_row(&self) -> String {
        let m = [self.precision, self.recall, self.tpr, self.fpr, self.n_pred]
            .iter()
            .map(|x| format!("{},{}", format_float(x.mean), format_float(x.stderr)))
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "{},{},{},{},{},{},{m}",
            self.n_products,
            format_float(self.p_rw),
            format_float(self.alpha_th),
            format_float(self.z_th),
            self.mode,
            self.n
        )
    }
}

/// Aggregates per-ensemble sweeps that share one grid and mode list.
pub fn aggregate(
    n_products: usize,
    p_rw: f64,
    ensembles: &[Vec<EvalReport>],
) -> Result<Vec<AggregateRow>> {
    let Some(first) = ensembles.first() else {
        return Err(Error::Config("nothing to aggregate".into()));
    };
    if ensembles.iter().any(|e| e.len() != first.len()) {
        return Err(Error::Integrity(
            "ensembles have different sweep lengths".into(),
        ));
    }
    Ok((0..first.len())
        .map(|i| {
            let col = |f: &dyn Fn(&EvalReport) -> f64| {
                MeanErr::of(&ensembles.iter().map(|e| f(&e[i])).collect::<Vec<_>>())
            };
            AggregateRow {
                n_products,
                p_rw,
                alpha_th: first[i].alpha_th.unwrap_or(f64::NAN),
                z_th: first[i].z_th.unwrap_or(f64::NAN),
                mode: first[i].mode,
                n: ensembles.len(),
                precision: col(&|r| r.precision),
                recall: col(&|r| r.recall),
                tpr: col(&|r| r.tpr),
                fpr: col(&|r| r.fpr),
                n_pred: col(&|r| r.n_predicted_edges as f64),
            }
        })
        .collect())
}

pub fn reports_csv(reports: &[EvalReport]) -> String {
    let mut out = String::from(EvalReport::CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// One JSON object per line.
pub fn reports_jsonl(reports: &[EvalReport]) -> String {
    reports
        .iter()
        .map(|r| serde_json::to_string(r).expect("report serializes") + "\n")
        .collect()
}

pub fn aggregate_csv(rows: &[AggregateRow]) -> String {
    let mut out = String::from(AggregateRow::CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Sweep parameters shared by every ensemble of a setting.
#[derive(Debug, Clone, Copy)]
pub struct SweepSpec<'a> {
    pub z_th: f64,
    pub grid: &'a [f64],
    pub modes: &'a [Mode],
    pub restrict_to_observed: bool,
    pub options: SweepOptions,
}

/// Sweeps of every ensemble of one benchmark setting.
pub fn evaluate_setting(
    reference: &ReferenceHierarchy,
    template: &BenchmarkConfig,
    ensembles: usize,
    spec: SweepSpec<'_>,
) -> Result<Vec<Vec<EvalReport>>> {
    (0..ensembles)
        .into_par_iter()
        .map(|e| {
            let cfg = BenchmarkConfig {
                ensemble_index: e as u64,
                ..template.clone()
            };
            let graph = benchgen::generate(reference, &cfg).stage("benchgen")?;
            let pruned = prune(&project(&graph), spec.z_th).stage("prune")?;
            let scored = ScoredPairs::new(&pruned);
            let mut index = ReferenceIndex::new(reference);
            if spec.restrict_to_observed {
                index = index.restricted_to(graph.tags().iter());
            }
            sweep_scored(
                &scored,
                spec.z_th,
                &index,
                spec.grid,
                spec.modes,
                spec.options,
            )
            .stage("evaluate")
        })
        .collect()
}

/// Runs every `(n_products, p_rw)` setting of the benchmark plan and writes
/// `eval_n{N}_p{P}_e{E}.csv` per ensemble and `aggregate_n{N}_p{P}.csv` per
/// setting.
pub fn run_benchmark_eval(cfg: &PipelineConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let plan = cfg
        .benchmark
        .as_ref()
        .ok_or_else(|| Error::Config("config has no benchmark section".into()))?;
    let reference = load_reference(&plan.reference, cfg.namespace).stage("reference")?;
    let inputs = vec![FileDigest::of_file(&plan.reference).stage("reference")?];
    let grid = cfg.alpha_grid();
    let spec = SweepSpec {
        z_th: cfg.z_th,
        grid: &grid,
        modes: &plan.modes,
        restrict_to_observed: plan.restrict_to_observed,
        options: SweepOptions {
            parsimonious: cfg.parsimonious,
        },
    };

    let mut out = ArtifactWriter::create(&cfg.out_dir).stage("write")?;
    let mut settings = 0usize;
    for &n in &plan.n_products {
        for &p in &plan.p_rw {
            let template = BenchmarkConfig::new(n, p, cfg.seed);
            let per_ensemble = evaluate_setting(&reference, &template, plan.ensembles, spec)?;
            for (e, reports) in per_ensemble.iter().enumerate() {
                out.write(&format!("eval_n{n}_p{p}_e{e}.csv"), reports_csv(reports))
                    .stage("write")?;
            }
            let rows = aggregate(n, p, &per_ensemble)?;
            out.write(&format!("aggregate_n{n}_p{p}.csv"), aggregate_csv(&rows))
                .stage("write")?;
            settings += 1;
        }
    }
    let summary = BTreeMap::from([
        ("reference_nodes".to_owned(), reference.node_count().into()),
        ("reference_edges".to_owned(), reference.edge_count().into()),
        ("settings".to_owned(), settings.into()),
        ("ensembles".to_owned(), plan.ensembles.into()),
    ]);
    let record = RunRecord {
        command: "benchmark".into(),
        seed: cfg.seed,
        config: config_value(cfg),
        inputs,
        summary,
        warnings: Vec::new(),
    };
    out.finish(MANIFEST_FILE, record).stage("write")
}

/// Runs the benchmark when the config has one, extraction otherwise.
pub fn run(cfg: &PipelineConfig) -> Result<RunOutcome> {
    if cfg.benchmark.is_some() {
        run_benchmark_eval(cfg)
    } else {
        run_extract(cfg)
    }
}
