mod cli;

use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use cli::{
    AlphaArgs, BackboneArgs, BenchgenArgs, Cli, Command, EvalArgs, ExportArgs, Format, InputArgs,
    PipelineArgs, ProjectArgs, PruneArgs, ReduceArgs,
};
use hbackbone::backbone::{prune, transitive_reduce, ScoredPairs};
use hbackbone::benchgen::{self, BenchmarkConfig};
use hbackbone::evaluate::{score, sweep_scored, ReferenceIndex, SweepOptions};
use hbackbone::export::to_dot;
use hbackbone::graph::project;
use hbackbone::ingest::write_tsv_bipartite;
use hbackbone::io::{self, StageKind};
use hbackbone::pipeline::{
    self, load_input, load_reference, reports_csv, reports_jsonl, select_alpha, AlphaSelection,
    ArtifactWriter, BenchmarkPlan, FileDigest, InputSpec, PipelineConfig, RunOutcome, RunRecord,
};
use hbackbone::{Error, Result};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(outcome) => {
            for w in outcome.warnings() {
                eprintln!("warning: {w}");
            }
            eprintln!(
                "wrote {} files to {}",
                outcome.manifest.outputs.len() + 1,
                outcome.out_dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<RunOutcome> {
    match command {
        Command::Project(args) => cmd_project(args),
        Command::Prune(args) => cmd_prune(args),
        Command::Backbone(args) => cmd_backbone(args),
        Command::Reduce(args) => cmd_reduce(args),
        Command::Benchgen(args) => cmd_benchgen(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Pipeline(args) => cmd_pipeline(*args),
        Command::Export(args) => cmd_export(args),
    }
}

fn argv() -> serde_json::Value {
    std::env::args().skip(1).collect::<Vec<_>>().into()
}

fn finish(
    out: ArtifactWriter,
    command: &str,
    seed: u64,
    inputs: Vec<FileDigest>,
    summary: BTreeMap<String, serde_json::Value>,
    warnings: Vec<String>,
) -> Result<RunOutcome> {
    let record = RunRecord {
        command: command.into(),
        seed,
        config: argv(),
        inputs,
        summary,
        warnings,
    };
    out.finish(&format!("{command}.manifest.json"), record)
}

fn input_spec(args: &InputArgs) -> Result<InputSpec> {
    let Some(path) = args.input.clone() else {
        return Err(Error::Config("--input is required".into()));
    };
    Ok(match args.format {
        Format::Tsv => InputSpec::Tsv {
            path,
            object: args.object_column.clone(),
            tag: args.tag_column.clone(),
            header: args.header,
            delimiter: args.delimiter,
        },
        Format::OboGaf => InputSpec::OboGaf {
            obo: path,
            gaf: args.gaf.clone(),
            exclude_evidence: args.exclude_evidence.clone(),
        },
    })
}

fn alpha_selection(args: &AlphaArgs) -> Option<AlphaSelection> {
    if let Some(a) = args.alpha_th {
        Some(AlphaSelection::Threshold(a))
    } else if let Some(g) = &args.alpha_grid {
        Some(AlphaSelection::Grid(g.clone()))
    } else {
        args.target_edges.map(AlphaSelection::TargetEdges)
    }
}

fn cmd_project(args: ProjectArgs) -> Result<RunOutcome> {
    let spec = input_spec(&args.input)?;
    let loaded = load_input(&spec, args.input.namespace).map_err(|e| e.in_stage("ingest"))?;
    let projection = project(&loaded.graph);
    let mut out = ArtifactWriter::create(&args.out_dir)?;
    out.write("projection.tsv", io::write_projection(&projection))?;
    let summary = BTreeMap::from([
        ("objects".to_owned(), loaded.graph.object_count().into()),
        ("tags".to_owned(), loaded.graph.tag_count().into()),
        ("pairs".to_owned(), projection.pairs().len().into()),
    ]);
    finish(out, "project", 0, loaded.digests, summary, loaded.warnings)
}

fn cmd_prune(args: PruneArgs) -> Result<RunOutcome> {
    let projection =
        io::read_stage(&args.input, io::parse_projection).map_err(|e| e.in_stage("prune"))?;
    let pruned = prune(&projection, args.z_th).map_err(|e| e.in_stage("prune"))?;
    let mut out = ArtifactWriter::create(&args.out_dir)?;
    out.write("pruned.tsv", io::write_pruned(&pruned))?;
    let summary = BTreeMap::from([
        ("significant_pairs".to_owned(), pruned.pairs().len().into()),
        ("k_max".to_owned(), pruned.k_max().into()),
    ]);
    finish(
        out,
        "prune",
        0,
        vec![FileDigest::of_file(&args.input)?],
        summary,
        Vec::new(),
    )
}

fn cmd_backbone(args: BackboneArgs) -> Result<RunOutcome> {
    let stage = |e: Error| e.in_stage("backbone");
    let pruned = io::read_stage(&args.input, io::parse_pruned).map_err(stage)?;
    let selection = alpha_selection(&args.alpha)
        .ok_or_else(|| Error::Config("one of --alpha-th or --target-edges is required".into()))?;
    let scored = ScoredPairs::new(&pruned);
    let (alpha_th, warning) = select_alpha(&scored, &selection).map_err(stage)?;
    let mut warnings: Vec<String> = warning.into_iter().collect();
    let mut backbone = scored.backbone(alpha_th).map_err(stage)?;
    if args.parsimonious {
        backbone = transitive_reduce(&backbone).map_err(|e| e.in_stage("reduce"))?;
    }
    if backbone.is_empty() {
        warnings.push(format!("backbone is empty at alpha_th = {alpha_th}"));
    }
    let mut out = ArtifactWriter::create(&args.out_dir)?;
    out.write("backbone.tsv", io::write_backbone(&backbone))?;
    if args.parsimonious {
        out.write("removed.tsv", io::write_removed(&backbone))?;
    }
    let summary = BTreeMap::from([
        ("alpha_th".to_owned(), alpha_th.into()),
        ("backbone_edges".to_owned(), backbone.edges().len().into()),
        ("removed_edges".to_owned(), backbone.removed().len().into()),
    ]);
    finish(
        out,
        "backbone",
        0,
        vec![FileDigest::of_file(&args.input)?],
        summary,
        warnings,
    )
}

fn cmd_reduce(args: ReduceArgs) -> Result<RunOutcome> {
    let stage = |e: Error| e.in_stage("reduce");
    let backbone = io::read_stage(&args.input, io::parse_backbone).map_err(stage)?;
    let reduced = transitive_reduce(&backbone).map_err(stage)?;
    let mut out = ArtifactWriter::create(&args.out_dir)?;
    out.write("reduced.tsv", io::write_backbone(&reduced))?;
    out.write("removed.tsv", io::write_removed(&reduced))?;
    let summary = BTreeMap::from([
        ("backbone_edges".to_owned(), reduced.edges().len().into()),
        ("removed_edges".to_owned(), reduced.removed().len().into()),
    ]);
    finish(
        out,
        "reduce",
        0,
        vec![FileDigest::of_file(&args.input)?],
        summary,
        Vec::new(),
    )
}

fn cmd_benchgen(args: BenchgenArgs) -> Result<RunOutcome> {
    let stage = |e: Error| e.in_stage("benchgen");
    let reference =
        load_reference(&args.reference, args.namespace).map_err(|e| e.in_stage("reference"))?;
    let template = BenchmarkConfig::new(args.n_products, args.p_rw, args.seed);
    let graphs =
        benchgen::generate_ensemble(&reference, &template, args.ensembles).map_err(stage)?;
    let mut out = ArtifactWriter::create(&args.out_dir)?;
    out.write("benchgen.toml", template.to_toml())?;
    out.write("reference.tsv", reference.to_tsv())?;
    for (i, g) in graphs.iter().enumerate() {
        let mut buf = Vec::new();
        write_tsv_bipartite(g, &mut buf).map_err(|e| Error::Io {
            path: format!("bench_e{i}.tsv").into(),
            source: e,
        })?;
        out.write(&format!("bench_e{i}.tsv"), buf)?;
    }
    let summary = BTreeMap::from([
        ("reference_nodes".to_owned(), reference.node_count().into()),
        ("ensembles".to_owned(), graphs.len().into()),
    ]);
    finish(
        out,
        "benchgen",
        args.seed,
        vec![FileDigest::of_file(&args.reference)?],
        summary,
        Vec::new(),
    )
}

fn cmd_eval(args: EvalArgs) -> Result<RunOutcome> {
    let stage = |e: Error| e.in_stage("evaluate");
    let reference =
        load_reference(&args.reference, args.namespace).map_err(|e| e.in_stage("reference"))?;
    let mut warnings = Vec::new();
    let reports = match io::stage_kind(&args.input).map_err(stage)? {
        StageKind::Pruned => {
            let pruned = io::read_stage(&args.input, io::parse_pruned).map_err(stage)?;
            let scored = ScoredPairs::new(&pruned);
            let grid =
                match alpha_selection(&args.alpha) {
                    Some(AlphaSelection::Grid(g)) => g,
                    Some(single) => vec![select_alpha(&scored, &single).map_err(stage)?.0],
                    None => return Err(Error::Config(
                        "sweeping a pruned graph needs --alpha-grid, --alpha-th or --target-edges"
                            .into(),
                    )),
                };
            let mut index = ReferenceIndex::new(&reference);
            if args.restrict_to_observed {
                index = index.restricted_to(pruned.tags().iter());
            }
            let options = SweepOptions {
                parsimonious: args.parsimonious,
            };
            sweep_scored(
                &scored,
                pruned.z_threshold(),
                &index,
                &grid,
                &args.mode,
                options,
            )
            .map_err(stage)?
        }
        StageKind::Backbone => {
            if alpha_selection(&args.alpha).is_some() {
                warnings.push("alpha flags are ignored when scoring a backbone file".to_owned());
            }
            let mut backbone = io::read_stage(&args.input, io::parse_backbone).map_err(stage)?;
            if args.parsimonious {
                backbone = transitive_reduce(&backbone).map_err(|e| e.in_stage("reduce"))?;
            }
            let mut index = ReferenceIndex::new(&reference);
            if args.restrict_to_observed {
                index = index.restricted_to(backbone.tags().iter());
            }
            args.mode
                .iter()
                .map(|&m| score(&backbone, &index, m))
                .collect()
        }
        StageKind::Projection => {
            return Err(Error::Config(
                "eval needs a pruned-graph or backbone file".into(),
            ))
        }
    };
    let mut out = ArtifactWriter::create(&args.out_dir)?;
    out.write("eval.csv", reports_csv(&reports))?;
    out.write("eval.jsonl", reports_jsonl(&reports))?;
    let inputs = vec![
        FileDigest::of_file(&args.input)?,
        FileDigest::of_file(&args.reference)?,
    ];
    let summary = BTreeMap::from([("reports".to_owned(), reports.len().into())]);
    finish(out, "eval", 0, inputs, summary, warnings)
}

fn pipeline_config(args: &PipelineArgs) -> Result<PipelineConfig> {
    if let Some(path) = &args.config {
        let mut cfg = PipelineConfig::read(path)?;
        if let Some(dir) = &args.out_dir {
            cfg.out_dir = dir.clone();
        }
        if let Some(seed) = args.seed {
            cfg.seed = seed;
        }
        cfg.validate()?;
        return Ok(cfg);
    }
    let z_th = args
        .z_th
        .ok_or_else(|| Error::Config("--z-th is required without --config".into()))?;
    let alpha = alpha_selection(&args.alpha).ok_or_else(|| {
        Error::Config("one of --alpha-th, --alpha-grid or --target-edges is required".into())
    })?;
    let out_dir = args
        .out_dir
        .clone()
        .ok_or_else(|| Error::Config("--out-dir is required without --config".into()))?;
    let benchmark = args.reference.as_ref().map(|reference| BenchmarkPlan {
        reference: reference.clone(),
        n_products: args.n_products.clone(),
        p_rw: args.p_rw.clone(),
        ensembles: args.ensembles,
        modes: args.mode.clone(),
        restrict_to_observed: args.restrict_to_observed,
    });
    let input = match (&benchmark, &args.input.input) {
        (Some(_), None) => None,
        _ => Some(input_spec(&args.input)?),
    };
    let cfg = PipelineConfig {
        input,
        z_th,
        alpha,
        parsimonious: args.parsimonious,
        namespace: args.input.namespace,
        benchmark,
        out_dir,
        seed: args.seed.unwrap_or(0),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_pipeline(args: PipelineArgs) -> Result<RunOutcome> {
    pipeline::run(&pipeline_config(&args)?)
}

fn cmd_export(args: ExportArgs) -> Result<RunOutcome> {
    let backbone =
        io::read_stage(&args.input, io::parse_backbone).map_err(|e| e.in_stage("export"))?;
    let reference = match &args.reference {
        Some(path) => {
            Some(load_reference(path, args.namespace).map_err(|e| e.in_stage("reference"))?)
        }
        None => None,
    };
    let index = reference.as_ref().map(ReferenceIndex::new);
    let mut out = ArtifactWriter::create(&args.out_dir)?;
    out.write("backbone.dot", to_dot(&backbone, index.as_ref()))?;
    let mut inputs = vec![FileDigest::of_file(&args.input)?];
    if let Some(path) = &args.reference {
        inputs.push(FileDigest::of_file(Path::new(path))?);
    }
    let summary = BTreeMap::from([("edges".to_owned(), backbone.edges().len().into())]);
    finish(out, "export", 0, inputs, summary, Vec::new())
}
