//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embed::{self, embedding_rows, load_model, save_model, EmbedModel, Hyper};
use crate::graph::{
    components_and_cycle_rank, load_reduced, load_skeleton, reduced_to_dot, save_reduced, save_skeleton,
    skeleton_to_dot, GraphError, ObjectType, ReducedGraph, SkeletonGraph,
};
use crate::matching::{self, build_dictionary, decompose, default_k, part_colors, retrieve, Dictionary};
use crate::nomenclature::{name_graph, parse_name, ParseError};
use crate::reduce::{reduce_pipeline, ReduceConfig, TauMode};
use crate::spectral::{self, laplacian_eigenvalues, weighted_laplacian_eigenvalues, Spectrum};
use crate::synth::{generate, Kind, SynthSpec};

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{err}")]
    Name { input: String, err: ParseError },
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Invalid(_) | CliError::Name { .. } => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(e.to_string())
}

/// Values shared across subcommands; read from `--config`, then overridden
/// by flags.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct PipelineConfig {
    tau: f64,
    tau_relative: bool,
    preserve_loops: bool,
    smooth: bool,
    k: KSetting,
    epochs: usize,
    lr: f64,
    kl_weight: f64,
    seed: u64,
    threshold: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            tau: 4.0,
            tau_relative: false,
            preserve_loops: true,
            smooth: true,
            k: KSetting::Auto,
            epochs: 200,
            lr: 0.01,
            kl_weight: 1.0,
            seed: 1,
            threshold: 0.95,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum KSetting {
    Auto,
    Fixed(usize),
}

impl std::str::FromStr for KSetting {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(KSetting::Auto);
        }
        match s.parse::<usize>() {
            Ok(k) if k >= 1 => Ok(KSetting::Fixed(k)),
            _ => Err(format!("k must be a positive integer or 'auto', got '{s}'")),
        }
    }
}

impl<'de> Deserialize<'de> for KSetting {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u64),
            S(String),
        }
        let text = match Raw::deserialize(d)? {
            Raw::N(n) => n.to_string(),
            Raw::S(s) => s,
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

impl PipelineConfig {
    fn check(&self) -> Result<()> {
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(invalid(format!("tau must be a non-negative number, got {}", self.tau)));
        }
        if !(self.lr.is_finite() && self.lr >= 0.0) {
            return Err(invalid(format!("lr must be a non-negative number, got {}", self.lr)));
        }
        if !(self.kl_weight.is_finite() && self.kl_weight >= 0.0) {
            return Err(invalid(format!("kl_weight must be non-negative, got {}", self.kl_weight)));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(invalid(format!("threshold must lie in [0, 1], got {}", self.threshold)));
        }
        Ok(())
    }

    fn reduce(&self) -> ReduceConfig {
        ReduceConfig {
            tau: self.tau,
            preserve_loops: self.preserve_loops,
            smooth_degree2: self.smooth,
            tau_mode: if self.tau_relative { TauMode::Relative } else { TauMode::Absolute },
        }
    }

    fn hyper(&self) -> Hyper {
        Hyper {
            lr: self.lr,
            epochs: self.epochs,
            seed: self.seed,
            kl_weight: self.kl_weight,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "toponame", version, about = "Reduce, name, embed and compare skeleton graphs")]
struct Cli {
    /// TOML file with default settings; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Default)]
struct ReduceFlags {
    /// Contraction threshold for short edges [default: 4.0]
    #[arg(long)]
    tau: Option<f64>,
    /// Interpret tau as a fraction of the total skeleton length
    #[arg(long)]
    tau_relative: bool,
    /// Keep parallel paths and loops via mid nodes [default]
    #[arg(long, overrides_with = "no_preserve_loops")]
    preserve_loops: bool,
    /// Collapse parallel paths and drop loops
    #[arg(long)]
    no_preserve_loops: bool,
    /// Dissolve degree-2 key nodes after contraction [default]
    #[arg(long, overrides_with = "no_smooth")]
    smooth: bool,
    /// Keep degree-2 nodes left by contraction
    #[arg(long)]
    no_smooth: bool,
}

#[derive(Args, Debug)]
struct SeedFlag {
    /// Random seed [default: 1]
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Reduce a skeleton to its key-node graph
    Reduce {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        #[command(flatten)]
        flags: ReduceFlags,
        /// Also write the reduced graph as DOT
        #[arg(long, value_name = "FILE")]
        emit_dot: Option<PathBuf>,
    },
    /// Print the canonical name of a graph
    Name {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// Object type for the suffix: mito, pyr or other [default: from the file]
        #[arg(long = "type", value_name = "TYPE")]
        object_type: Option<ObjectType>,
        #[command(flatten)]
        flags: ReduceFlags,
    },
    /// Build the graph a name describes
    Parse {
        #[arg(long)]
        name: String,
        /// Output file [default: standard output]
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Laplacian-spectrum agreement between predicted and reference graphs
    Eval {
        #[arg(long, value_name = "DIR")]
        pred: PathBuf,
        #[arg(long, value_name = "DIR")]
        gt: PathBuf,
        /// Cosine needed for a pair to count as correct [default: 0.95]
        #[arg(long)]
        threshold: Option<f64>,
        /// Weight the Laplacian by edge length
        #[arg(long)]
        weighted: bool,
        #[command(flatten)]
        flags: ReduceFlags,
    },
    /// Train the node-embedding model on a corpus directory
    TrainEmbed {
        #[arg(long, value_name = "DIR")]
        corpus: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        #[command(flatten)]
        seed: SeedFlag,
        /// Training epochs [default: 200]
        #[arg(long)]
        epochs: Option<usize>,
        /// Adam learning rate [default: 0.01]
        #[arg(long)]
        lr: Option<f64>,
        /// Weight of the KL term [default: 1.0]
        #[arg(long)]
        kl_weight: Option<f64>,
        /// Write the per-epoch loss trace as TSV
        #[arg(long, value_name = "FILE")]
        trace: Option<PathBuf>,
        #[command(flatten)]
        flags: ReduceFlags,
    },
    /// Write node embeddings of one graph
    Embed {
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        #[command(flatten)]
        flags: ReduceFlags,
    },
    /// Rank corpus graphs by similarity to a query
    Retrieve {
        #[arg(long, value_name = "FILE")]
        query: PathBuf,
        #[arg(long, value_name = "DIR")]
        corpus: PathBuf,
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
        /// Number of results
        #[arg(long, default_value_t = 2)]
        topk: usize,
        #[command(flatten)]
        flags: ReduceFlags,
    },
    /// Cluster junction embeddings into a dictionary
    BuildDict {
        #[arg(long, value_name = "DIR")]
        corpus: PathBuf,
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
        /// Dictionary size, or 'auto' (100 for mito, 50 otherwise) [default: auto]
        #[arg(long)]
        k: Option<KSetting>,
        #[command(flatten)]
        seed: SeedFlag,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        #[command(flatten)]
        flags: ReduceFlags,
    },
    /// Split a graph into dictionary words
    Decompose {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_name = "FILE")]
        dict: PathBuf,
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
        /// Also write a DOT file colored by part
        #[arg(long, value_name = "FILE")]
        dot: Option<PathBuf>,
        #[command(flatten)]
        flags: ReduceFlags,
    },
    /// Generate a synthetic skeleton
    Synth {
        /// tree, path, star, cycle, theta, tadpole, bicyclic or spiro
        #[arg(long)]
        kind: Kind,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        seed: SeedFlag,
        /// Object type written to the file [default: other]
        #[arg(long = "type", value_name = "TYPE")]
        object_type: Option<ObjectType>,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Render a skeleton or reduced graph as DOT
    ExportDot {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Reduce and name every skeleton in a directory
    Pipeline {
        #[arg(long = "in", value_name = "DIR")]
        input: PathBuf,
        /// Directory for reduced graphs and manifest.tsv [default: manifest to standard output]
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Override the object type of every input
        #[arg(long = "type", value_name = "TYPE")]
        object_type: Option<ObjectType>,
        #[command(flatten)]
        flags: ReduceFlags,
    },
}

fn apply_reduce_flags(cfg: &mut PipelineConfig, f: &ReduceFlags) {
    if let Some(t) = f.tau {
        cfg.tau = t;
    }
    if f.tau_relative {
        cfg.tau_relative = true;
    }
    if f.preserve_loops {
        cfg.preserve_loops = true;
    }
    if f.no_preserve_loops {
        cfg.preserve_loops = false;
    }
    if f.smooth {
        cfg.smooth = true;
    }
    if f.no_smooth {
        cfg.smooth = false;
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn graph_error(path: &Path, e: GraphError) -> CliError {
    CliError::Invalid(format!("{}: {e}", path.display()))
}

enum AnyGraph {
    Skeleton(SkeletonGraph),
    Reduced(ReducedGraph),
}

/// Reduced documents carry a `role` on their nodes; anything else is read
/// as a skeleton.
fn load_any(path: &Path) -> Result<AnyGraph> {
    let bytes = read(path)?;
    let value: serde_json::Value =
        serde_json::from_slice(&bytes).map_err(|e| graph_error(path, GraphError::MalformedDocument(e.to_string())))?;
    let reduced = value
        .get("nodes")
        .and_then(|n| n.get(0))
        .is_some_and(|n| n.get("role").is_some());
    if reduced {
        load_reduced(&bytes).map(AnyGraph::Reduced).map_err(|e| graph_error(path, e))
    } else {
        load_skeleton(&bytes).map(AnyGraph::Skeleton).map_err(|e| graph_error(path, e))
    }
}

/// Reduced graph from either file kind; skeletons go through the pipeline.
fn load_reduced_any(path: &Path, cfg: &PipelineConfig) -> Result<ReducedGraph> {
    Ok(match load_any(path)? {
        AnyGraph::Reduced(g) => g,
        AnyGraph::Skeleton(s) => reduce_pipeline(&s, &cfg.reduce()),
    })
}

fn json_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?.path();
        if path.extension().is_some_and(|x| x == "json") && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn load_corpus(dir: &Path, cfg: &PipelineConfig) -> Result<Vec<ReducedGraph>> {
    let mut corpus = json_files(dir)?
        .iter()
        .map(|p| load_reduced_any(p, cfg))
        .collect::<Result<Vec<_>>>()?;
    corpus.sort_by(|a, b| a.object_id().cmp(b.object_id()));
    if let Some(w) = corpus.windows(2).find(|w| w[0].object_id() == w[1].object_id()) {
        return Err(invalid(format!("duplicate object id '{}' in {}", w[0].object_id(), dir.display())));
    }
    Ok(corpus)
}

fn load_model_file(path: &Path) -> Result<EmbedModel> {
    load_model(&read(path)?).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn spectrum(g: &ReducedGraph, weighted: bool) -> Result<Spectrum> {
    let s = if weighted {
        weighted_laplacian_eigenvalues(g)
    } else {
        laplacian_eigenvalues(g)
    };
    s.map_err(|e| invalid(format!("{}: {e}", g.object_id())))
}

#[derive(Serialize)]
struct EmbeddingDoc {
    object_id: String,
    node_ids: Vec<u64>,
    embedding: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct DecompositionDoc<'a> {
    object_id: &'a str,
    parts: &'a [matching::Part],
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

fn manifest_row(out: &mut String, g: &ReducedGraph, name: &str) {
    let (_, rank) = components_and_cycle_rank(g);
    let _ = writeln!(
        out,
        "{}\t{}\t{}\t{}\t{}",
        g.object_id(),
        name,
        g.nodes().len(),
        g.edges().len(),
        rank
    );
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = String::from_utf8(read(path)?).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?
        }
        None => PipelineConfig::default(),
    };
    let mut print = |s: &str| -> Result<()> { stdout.write_all(s.as_bytes()).map_err(|e| CliError::Io(e.to_string())) };

    match cli.cmd {
        Cmd::Reduce {
            input,
            out,
            flags,
            emit_dot,
        } => {
            apply_reduce_flags(&mut cfg, &flags);
            cfg.check()?;
            let skel = load_skeleton(&read(&input)?).map_err(|e| graph_error(&input, e))?;
            let g = reduce_pipeline(&skel, &cfg.reduce());
            write(&out, &save_reduced(&g))?;
            if let Some(dot) = emit_dot {
                write(&dot, &reduced_to_dot(&g, None))?;
            }
        }
        Cmd::Name {
            input,
            object_type,
            flags,
        } => {
            apply_reduce_flags(&mut cfg, &flags);
            cfg.check()?;
            let g = load_reduced_any(&input, &cfg)?;
            let t = object_type.unwrap_or(g.object_type());
            let name = name_graph(&g, t).map_err(|e| invalid(format!("{}: {e}", input.display())))?;
            print(&format!("{}\n", name.text))?;
        }
        Cmd::Parse { name, out } => {
            let g = parse_name(&name).map_err(|err| CliError::Name { input: name.clone(), err })?;
            let text = save_reduced(&g);
            match out {
                Some(path) => write(&path, &text)?,
                None => print(&text)?,
            }
        }
        Cmd::Eval {
            pred,
            gt,
            threshold,
            weighted,
            flags,
        } => {
            apply_reduce_flags(&mut cfg, &flags);
            if let Some(t) = threshold {
                cfg.threshold = t;
            }
            cfg.check()?;
            let pred_files = json_files(&pred)?;
            if pred_files.is_empty() {
                return Err(invalid(format!("{}: no .json files", pred.display())));
            }
            let mut pairs = Vec::new();
            for p in pred_files {
                let file = p.file_name().expect("listed file");
                let reference = gt.join(file);
                if !reference.is_file() {
                    return Err(invalid(format!("{}: no matching reference file", p.display())));
                }
                let a = spectrum(&load_reduced_any(&p, &cfg)?, weighted)?;
                let b = spectrum(&load_reduced_any(&reference, &cfg)?, weighted)?;
                pairs.push((a, b));
            }
            let mean = spectral::mean_cosine(&pairs).map_err(invalid)?;
            let acc = spectral::accuracy(&pairs, cfg.threshold).map_err(invalid)?;
            print(&format!("{mean:.6}\t{acc:.6}\n"))?;
        }
        Cmd::TrainEmbed {
            corpus,
            out,
            seed,
            epochs,
            lr,
            kl_weight,
            trace,
            flags,
        } => {
            apply_reduce_flags(&mut cfg, &flags);
            cfg.seed = seed.seed.unwrap_or(cfg.seed);
            cfg.epochs = epochs.unwrap_or(cfg.epochs);
            cfg.lr = lr.unwrap_or(cfg.lr);
            cfg.kl_weight = kl_weight.unwrap_or(cfg.kl_weight);
            cfg.check()?;
            let graphs = load_corpus(&corpus, &cfg)?;
            let (model, tr) = embed::train(&graphs, cfg.hyper()).map_err(invalid)?;
            write(&out, &save_model(&model))?;
            if let Some(path) = trace {
                let mut text = String::from("epoch\tloss\tbce\tkl\n");
                for i in 0..tr.loss.len() {
                    let _ = writeln!(text, "{}\t{}\t{}\t{}", i + 1, tr.loss[i], tr.bce[i], tr.kl[i]);
                }
                write(&path, &text)?;
            }
        }
        Cmd::Embed {
            model,
            input,
            out,
            flags,
        } => {
            apply_reduce_flags(&mut cfg, &flags);
            cfg.check()?;
            let m = load_model_file(&model)?;
            let g = load_reduced_any(&input, &cfg)?;
            let z = embed::embed_nodes(&m, &g).map_err(|e| invalid(format!("{}: {e}", input.display())))?;
            let doc = EmbeddingDoc {
                object_id: g.object_id().to_string(),
                node_ids: g.nodes().iter().map(|n| n.id).collect(),
                embedding: embedding_rows(&z),
            };
            write(&out, &to_json(&doc))?;
        }
        Cmd::Retrieve {
            query,
            corpus,
            model,
            topk,
            flags,
        } => {
            apply_reduce_flags(&mut cfg, &flags);
            cfg.check()?;
            if topk == 0 {
                return Err(invalid("topk must be at least 1"));
            }
            let m = load_model_file(&model)?;
            let q = load_reduced_any(&query, &cfg)?;
            let graphs = load_corpus(&corpus, &cfg)?;
            let hits = retrieve(&q, &graphs, &m, topk).map_err(invalid)?;
            let mut text = String::new();
            for (i, h) in hits.iter().enumerate() {
                let _ = writeln!(text, "{}\t{}\t{}", i + 1, h.object_id, h.score);
            }
            print(&text)?;
        }
        Cmd::BuildDict {
            corpus,
            model,
            k,
            seed,
            out,
            flags,
        } => {
            apply_reduce_flags(&mut cfg, &flags);
            cfg.seed = seed.seed.unwrap_or(cfg.seed);
            cfg.k = k.unwrap_or(cfg.k);
            cfg.check()?;
            let m = load_model_file(&model)?;
            let graphs = load_corpus(&corpus, &cfg)?;
            let k = match cfg.k {
                KSetting::Fixed(k) => k,
                KSetting::Auto => default_k(majority_type(&graphs)),
            };
            let source = corpus.display().to_string();
            let dict = build_dictionary(&graphs, &m, k, cfg.seed, &source).map_err(invalid)?;
            write(&out, &dict.to_json())?;
        }
        Cmd::Decompose {
            input,
            dict,
            model,
            dot,
            flags,
        } => {
            apply_reduce_flags(&mut cfg, &flags);
            cfg.check()?;
            let m = load_model_file(&model)?;
            let d = Dictionary::from_json(&read(&dict)?).map_err(|e| invalid(format!("{}: {e}", dict.display())))?;
            let g = load_reduced_any(&input, &cfg)?;
            let parts = decompose(&g, &d, &m).map_err(invalid)?;
            print(&to_json(&DecompositionDoc {
                object_id: g.object_id(),
                parts: &parts,
            }))?;
            if let Some(path) = dot {
                let colors = part_colors(&parts);
                write(&path, &reduced_to_dot(&g, Some(&colors)))?;
            }
        }
        Cmd::Synth {
            kind,
            n,
            seed,
            object_type,
            out,
        } => {
            let spec = SynthSpec::new(kind, n, seed.seed.unwrap_or(cfg.seed));
            let g = generate(&spec).map_err(invalid)?;
            let g = g.with_object_type(object_type.unwrap_or(ObjectType::Other));
            write(&out, &save_skeleton(&g))?;
        }
        Cmd::ExportDot { input, out } => {
            let text = match load_any(&input)? {
                AnyGraph::Skeleton(s) => skeleton_to_dot(&s),
                AnyGraph::Reduced(g) => reduced_to_dot(&g, None),
            };
            write(&out, &text)?;
        }
        Cmd::Pipeline {
            input,
            out,
            object_type,
            flags,
        } => {
            apply_reduce_flags(&mut cfg, &flags);
            cfg.check()?;
            let files = json_files(&input)?;
            let mut reduced = Vec::with_capacity(files.len());
            for path in &files {
                let mut skel = load_skeleton(&read(path)?).map_err(|e| graph_error(path, e))?;
                if let Some(t) = object_type {
                    skel = skel.with_object_type(t);
                }
                reduced.push(reduce_pipeline(&skel, &cfg.reduce()));
            }
            reduced.sort_by(|a, b| a.object_id().cmp(b.object_id()));
            if let Some(w) = reduced.windows(2).find(|w| w[0].object_id() == w[1].object_id()) {
                return Err(invalid(format!("duplicate object id '{}'", w[0].object_id())));
            }
            let mut manifest = String::from("object_id\tname\tnodes\tedges\tcycle_rank\n");
            for g in &reduced {
                let name = name_graph(g, g.object_type()).map_err(|e| invalid(format!("{}: {e}", g.object_id())))?;
                manifest_row(&mut manifest, g, &name.text);
            }
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
                    for g in &reduced {
                        let file = format!("{}.json", sanitize(g.object_id()));
                        write(&dir.join(file), &save_reduced(g))?;
                    }
                    write(&dir.join("manifest.tsv"), &manifest)?;
                }
                None => print(&manifest)?,
            }
        }
    }
    Ok(())
}

fn majority_type(graphs: &[ReducedGraph]) -> ObjectType {
    let mut counts = [0usize; 3];
    for g in graphs {
        counts[g.object_type() as usize] += 1;
    }
    let order = [ObjectType::Mitochondrion, ObjectType::PyramidalNeuron, ObjectType::Other];
    order
        .into_iter()
        .max_by_key(|&t| (counts[t as usize], std::cmp::Reverse(t)))
        .expect("three types")
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect()
}

fn caret(input: &str, err: &ParseError) -> String {
    let pos = err.position().min(input.len());
    let column = input[..pos].chars().count();
    format!("error: {err}\n  {input}\n  {}^\n", " ".repeat(column))
}

/// Runs the tool on `argv` (including the program name) and returns the
/// process exit code.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    2
                }
            };
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let msg = match &e {
                CliError::Name { input, err } => caret(input, err),
                other => format!("error: {other}\n"),
            };
            let _ = stderr.write_all(msg.as_bytes());
            e.code()
        }
    }
}

pub fn run() -> i32 {
    run_with(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("toponame").chain(args.iter().copied());
        let code = run_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        let (code, _, err) = call(&["frobnicate"]);
        assert_eq!(code, 2);
        assert!(err.contains("Usage"));
    }

    #[test]
    fn parse_syntax_error_has_caret() {
        let (code, _, err) = call(&["parse", "--name", "3-monopentxyz"]);
        assert_eq!(code, 2);
        let lines: Vec<&str> = err.lines().collect();
        assert_eq!(lines[1], "  3-monopentxyz");
        assert_eq!(lines[2], format!("  {}^", " ".repeat(6)));
    }

    #[test]
    fn missing_file_is_io_error() {
        let (code, _, err) = call(&["name", "--in", "/nonexistent/x.json"]);
        assert_eq!(code, 1);
        assert!(err.starts_with("error: "));
    }

    #[test]
    fn help_lists_defaults() {
        let (code, out, _) = call(&["reduce", "--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("--tau"));
        assert!(out.contains("default: 4.0"));
    }

    #[test]
    fn config_parsing() {
        let cfg: PipelineConfig = toml::from_str("tau = 2.5\nk = 30\n").unwrap();
        assert_eq!(cfg.tau, 2.5);
        assert_eq!(cfg.k, KSetting::Fixed(30));
        let cfg: PipelineConfig = toml::from_str("k = \"auto\"").unwrap();
        assert_eq!(cfg.k, KSetting::Auto);
        assert!(toml::from_str::<PipelineConfig>("k = \"many\"").is_err());
        assert!(toml::from_str::<PipelineConfig>("bogus = 1").is_err());
    }
}
