//! Stage orchestration over a manifest, with every intermediate result kept
//! as a file in the output directory.
//!
//! | stage     | reads                                   | writes |
//! |-----------|-----------------------------------------|--------|
//! | parse     | manifest sources                        | `programs.jsonl`, `ast.jsonl` |
//! | extract   | `programs.jsonl`                        | `characteristics.json`, `syvc.jsonl` |
//! | slice     | `programs.jsonl`, `syvc.jsonl`          | `sevc.jsonl` |
//! | vectorize | `sevc.jsonl`, `characteristics.json`    | `symbols.jsonl`, `embeddings.json`, `vectors.bin`, `vectors.idx.jsonl` |
//! | label     | `sevc.jsonl`, manifest ground truth     | `labels.jsonl`, `review.jsonl` |
//! | train     | vectors, `labels.jsonl`                 | `split.json`, `model.ckpt`, `train_report.json` |
//! | evaluate  | `model.ckpt`, vectors, labels, split    | `metrics.json` |
//! | detect    | `model.ckpt`, vectors, `sevc.jsonl`     | `detections.jsonl` |
//! | explain   | `model.ckpt`, vectors, `symbols.jsonl`  | `explanations.jsonl` |
//!
//! Line-delimited files start with an [`ArtifactHeader`] line; JSON files
//! carry it in a `header` field. Files are written to a temporary name and
//! renamed into place.

mod manifest;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::{compute_metrics, split_by_program, ConfusionCounts, EvalError, MetricsReport};
use crate::frontend::{ast_dump_records, FunctionId, NodeId, ProgramModel, StmtId, TokenSpan};
use crate::graphs::ProgramGraphs;
use crate::labeler::{label_sevc, parse_diff, Annotation, LabelError, LabelSource, ProgramClass};
use crate::model::{
    explain, predict_all, read_checkpoint, train, write_checkpoint, CriticalToken, Example, Hyperparams, ModelError,
    Preset, TrainReport,
};
use crate::slicer::{build_sevcs, Sevc};
use crate::syvc::{extract_syvcs, CharacteristicSet, Syvc, SyvcError, SyvcKind};
use crate::vectorizer::{
    encode, read_store, symbolize, train_embeddings, write_store, EmbeddingTable, SampleVector, SkipGramConfig,
    StoreHeader, SymbolicSevc, TrainingMode, VectorizeError,
};

pub use manifest::{Manifest, ProgramRecord, VulnerableLines};

pub const ARTIFACT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{artifact} not found in {dir}; run `{stage}` first")]
    MissingArtifact { artifact: String, dir: String, stage: &'static str },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("this stage needs a manifest (--manifest)")]
    NoManifest,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    BadArtifact { path: String, message: String },
    #[error(transparent)]
    Syvc(#[from] SyvcError),
    #[error(transparent)]
    Vectorize(#[from] VectorizeError),
    #[error("labeling program `{program}`: {source}")]
    Label { program: String, source: LabelError },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl PipelineError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.display().to_string(), source }
    }
}

/// Hyperparameter overrides applied on top of the preset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HyperOverrides {
    pub epochs: Option<usize>,
    pub hidden: Option<usize>,
    pub layers: Option<usize>,
    pub dense_dim: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub dropout: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub theta: usize,
    pub dim: usize,
    pub preset: Preset,
    pub kinds: BTreeSet<SyvcKind>,
    pub threshold: f64,
    pub strict_review: bool,
    pub embedding: TrainingMode,
    pub split_ratio: f64,
    pub overrides: HyperOverrides,
    /// Overrides the manifest's call list.
    #[serde(skip)]
    pub fc_list: Option<PathBuf>,
}

impl RunConfig {
    /// Preset defaults for theta and dim, all kinds enabled.
    pub fn new(preset: Preset, seed: u64) -> Self {
        let hp = Hyperparams::preset(preset, seed);
        Self {
            seed,
            theta: hp.theta(),
            dim: hp.input_dim,
            preset,
            kinds: SyvcKind::ALL.into_iter().collect(),
            threshold: hp.threshold,
            strict_review: false,
            embedding: TrainingMode::Skipgram,
            split_ratio: 0.8,
            overrides: HyperOverrides::default(),
            fc_list: None,
        }
    }

    /// Symbols per sample, `theta / dim`.
    pub fn seq_len(&self) -> usize {
        self.theta / self.dim.max(1)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.dim == 0 || self.theta == 0 || !self.theta.is_multiple_of(self.dim) {
            return Err(PipelineError::Config(format!(
                "theta ({}) must be a positive multiple of dim ({})",
                self.theta, self.dim
            )));
        }
        if self.kinds.is_empty() {
            return Err(PipelineError::Config("no SyVC kinds enabled".into()));
        }
        Ok(())
    }

    pub fn hyperparams(&self) -> Hyperparams {
        let o = &self.overrides;
        let base = Hyperparams::preset(self.preset, self.seed);
        Hyperparams {
            dropout: o.dropout.unwrap_or(base.dropout),
            batch_size: o.batch_size.unwrap_or(base.batch_size),
            epochs: o.epochs.unwrap_or(base.epochs),
            dense_dim: o.dense_dim.unwrap_or(base.dense_dim),
            learning_rate: o.learning_rate.unwrap_or(base.learning_rate),
            hidden: o.hidden.unwrap_or(base.hidden),
            layers: o.layers.unwrap_or(base.layers),
            seq_len: self.seq_len(),
            input_dim: self.dim,
            seed: self.seed,
            threshold: self.threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactHeader {
    pub artifact: String,
    pub version: u32,
    pub seed: u64,
    pub config: RunConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedProgram {
    pub program: String,
    pub model: ProgramModel,
}

/// One line of `syvc.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyvcRecord {
    pub program: String,
    pub id: u32,
    pub kind: SyvcKind,
    pub file: String,
    pub function: String,
    pub line: u32,
    pub span: TokenSpan,
    pub anchor_text: String,
    pub function_id: FunctionId,
    pub statement: StmtId,
    pub node: NodeId,
}

impl SyvcRecord {
    fn to_syvc(&self) -> Syvc {
        Syvc {
            id: self.id,
            kind: self.kind,
            function: self.function_id,
            statement: self.statement,
            node: self.node,
            span: self.span,
            line: self.line,
            anchor_text: self.anchor_text.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolsRecord {
    pub program: String,
    pub syvc: u32,
    pub symbols: Vec<String>,
    pub anchor_start: usize,
    pub anchor_end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub program: String,
    pub syvc: u32,
    /// `None` when the program's ground truth is unusable (add-only diff).
    pub label: Option<u8>,
    pub needs_review: bool,
    pub eligible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub header: ArtifactHeader,
    pub train: Vec<String>,
    pub test: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub header: ArtifactHeader,
    pub hyperparams: Hyperparams,
    pub samples: usize,
    pub dropped_review: usize,
    pub report: TrainReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub header: ArtifactHeader,
    pub samples: usize,
    pub counts: ConfusionCounts,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub program: String,
    pub syvc: u32,
    pub kind: SyvcKind,
    pub file: String,
    pub function: String,
    pub lines: Vec<u32>,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationRecord {
    pub program: String,
    pub syvc: u32,
    pub probability: f64,
    pub critical: Vec<CriticalToken>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CharacteristicsFile {
    header: ArtifactHeader,
    set: CharacteristicSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct EmbeddingsFile {
    header: ArtifactHeader,
    table: EmbeddingTable,
}

/// What a stage produced.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StageOutcome {
    pub written: Vec<String>,
    pub records: usize,
    pub notes: Vec<String>,
}

type Key = (String, u32);

fn producer(artifact: &str) -> &'static str {
    match artifact {
        "programs.jsonl" | "ast.jsonl" => "parse",
        "characteristics.json" | "syvc.jsonl" => "extract",
        "sevc.jsonl" => "slice",
        "labels.jsonl" | "review.jsonl" => "label",
        "split.json" | "model.ckpt" | "train_report.json" => "train",
        _ => "vectorize",
    }
}

pub struct Pipeline {
    pub manifest: Option<Manifest>,
    pub config: RunConfig,
    pub out: PathBuf,
}

impl Pipeline {
    pub fn new(manifest: Option<Manifest>, config: RunConfig, out: PathBuf) -> Result<Self, PipelineError> {
        config.validate()?;
        Ok(Self { manifest, config, out })
    }

    fn manifest(&self) -> Result<&Manifest, PipelineError> {
        self.manifest.as_ref().ok_or(PipelineError::NoManifest)
    }

    fn header(&self, artifact: &str, notes: Vec<String>) -> ArtifactHeader {
        ArtifactHeader {
            artifact: artifact.into(),
            version: ARTIFACT_VERSION,
            seed: self.config.seed,
            config: self.config.clone(),
            notes,
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<String, PipelineError> {
        fs::create_dir_all(&self.out).map_err(|e| PipelineError::io(&self.out, e))?;
        let target = self.path(name);
        let tmp = self.path(&format!(".{name}.tmp{}", std::process::id()));
        fs::write(&tmp, bytes).map_err(|e| PipelineError::io(&tmp, e))?;
        fs::rename(&tmp, &target).map_err(|e| PipelineError::io(&target, e))?;
        Ok(name.to_string())
    }

    fn write_jsonl<T: Serialize>(&self, name: &str, notes: Vec<String>, records: &[T]) -> Result<String, PipelineError> {
        let mut text = serde_json::to_string(&self.header(name, notes)).expect("header serializes");
        text.push('\n');
        for r in records {
            text.push_str(&serde_json::to_string(r).expect("record serializes"));
            text.push('\n');
        }
        self.write_bytes(name, text.as_bytes())
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<String, PipelineError> {
        let mut text = serde_json::to_string_pretty(value).expect("record serializes");
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    fn read_bytes_from(&self, path: &Path, name: &str) -> Result<Vec<u8>, PipelineError> {
        match fs::read(path) {
            Ok(b) => Ok(b),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(PipelineError::MissingArtifact {
                artifact: name.into(),
                dir: path.parent().unwrap_or(Path::new(".")).display().to_string(),
                stage: producer(name),
            }),
            Err(e) => Err(PipelineError::io(path, e)),
        }
    }

    fn read_text(&self, name: &str) -> Result<String, PipelineError> {
        let bytes = self.read_bytes_from(&self.path(name), name)?;
        String::from_utf8(bytes).map_err(|e| self.bad(name, e))
    }

    fn bad(&self, name: &str, e: impl std::fmt::Display) -> PipelineError {
        PipelineError::BadArtifact { path: self.path(name).display().to_string(), message: e.to_string() }
    }

    fn read_jsonl<T: DeserializeOwned>(&self, name: &str) -> Result<(ArtifactHeader, Vec<T>), PipelineError> {
        let text = self.read_text(name)?;
        let mut lines = text.lines();
        let header: ArtifactHeader =
            serde_json::from_str(lines.next().unwrap_or_default()).map_err(|e| self.bad(name, e))?;
        let records = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| self.bad(name, e)))
            .collect::<Result<_, _>>()?;
        Ok((header, records))
    }

    fn read_json<T: DeserializeOwned>(&self, name: &str) -> Result<T, PipelineError> {
        let text = self.read_text(name)?;
        serde_json::from_str(&text).map_err(|e| self.bad(name, e))
    }

    fn characteristic_set(&self) -> Result<CharacteristicSet, PipelineError> {
        let list = self.config.fc_list.clone().or_else(|| self.manifest.as_ref().and_then(Manifest::fc_list_path));
        let base = match list {
            Some(path) => {
                let text = fs::read_to_string(&path).map_err(|e| PipelineError::io(&path, e))?;
                CharacteristicSet::new(CharacteristicSet::parse_call_list(&text), SyvcKind::ALL.into_iter().collect())?
            }
            None => CharacteristicSet::default(),
        };
        Ok(base.with_kinds(self.config.kinds.clone())?)
    }

    /// Lexes and parses every program in the manifest. Files that fail to
    /// lex are skipped with a note.
    pub fn parse(&self) -> Result<StageOutcome, PipelineError> {
        let manifest = self.manifest()?;
        let root = manifest.root();
        let mut programs = Vec::new();
        let mut notes = Vec::new();
        let mut ast = Vec::new();
        for rec in &manifest.programs {
            let mut model = ProgramModel::new();
            for file in manifest.program_files(rec)? {
                let path = root.join(&file);
                let bytes = fs::read(&path).map_err(|e| PipelineError::io(&path, e))?;
                if let Err(e) = model.add_source(&String::from_utf8_lossy(&bytes), &file) {
                    notes.push(format!("{file}: {e}"));
                }
            }
            for d in &model.diagnostics {
                notes.push(format!("{}:{}: {}", d.file, d.line, d.message));
            }
            for f in &model.functions {
                for mut node in ast_dump_records(f) {
                    node["program"] = rec.id().into();
                    ast.push(node);
                }
            }
            programs.push(ParsedProgram { program: rec.id().to_string(), model });
        }
        let written =
            vec![self.write_jsonl("programs.jsonl", notes.clone(), &programs)?, self.write_jsonl("ast.jsonl", vec![], &ast)?];
        Ok(StageOutcome { written, records: programs.len(), notes })
    }

    fn programs(&self) -> Result<Vec<ParsedProgram>, PipelineError> {
        Ok(self.read_jsonl("programs.jsonl")?.1)
    }

    /// Finds syntax-based candidates in every parsed program.
    pub fn extract(&self) -> Result<StageOutcome, PipelineError> {
        let programs = self.programs()?;
        let set = self.characteristic_set()?;
        let mut records = Vec::new();
        for p in &programs {
            for s in extract_syvcs(&p.model, &set) {
                let f = p.model.function(s.function);
                records.push(SyvcRecord {
                    program: p.program.clone(),
                    id: s.id,
                    kind: s.kind,
                    file: f.file.clone(),
                    function: f.name.clone(),
                    line: s.line,
                    span: s.span,
                    anchor_text: s.anchor_text,
                    function_id: s.function,
                    statement: s.statement,
                    node: s.node,
                });
            }
        }
        let written = vec![
            self.write_json("characteristics.json", &CharacteristicsFile { header: self.header("characteristics.json", vec![]), set })?,
            self.write_jsonl("syvc.jsonl", vec![], &records)?,
        ];
        Ok(StageOutcome { written, records: records.len(), notes: vec![] })
    }

    /// Builds program dependence graphs and assembles one semantics-based
    /// candidate per syntax candidate.
    pub fn slice(&self) -> Result<StageOutcome, PipelineError> {
        let programs = self.programs()?;
        let (_, syvcs): (_, Vec<SyvcRecord>) = self.read_jsonl("syvc.jsonl")?;
        let mut by_program: BTreeMap<&str, Vec<Syvc>> = BTreeMap::new();
        for r in &syvcs {
            by_program.entry(r.program.as_str()).or_default().push(r.to_syvc());
        }
        let mut sevcs = Vec::new();
        let mut notes = Vec::new();
        for p in &programs {
            let Some(list) = by_program.get(p.program.as_str()) else { continue };
            let graphs = ProgramGraphs::build(&p.model);
            let (built, errors) = build_sevcs(&p.model, &graphs, list);
            for (id, e) in errors {
                notes.push(format!("{} syvc {id}: {e}", p.program));
            }
            for mut s in built {
                s.program = p.program.clone();
                sevcs.push(s);
            }
        }
        let written = vec![self.write_jsonl("sevc.jsonl", notes.clone(), &sevcs)?];
        Ok(StageOutcome { written, records: sevcs.len(), notes })
    }

    fn sevcs(&self) -> Result<Vec<Sevc>, PipelineError> {
        Ok(self.read_jsonl("sevc.jsonl")?.1)
    }

    /// Symbolizes candidates, trains (or loads) the embedding table and
    /// writes the fixed-length vector store. `embeddings` points at an
    /// `embeddings.json` from an earlier run to reuse.
    pub fn vectorize(&self, embeddings: Option<&Path>) -> Result<StageOutcome, PipelineError> {
        let sevcs = self.sevcs()?;
        let set: CharacteristicsFile = self.read_json("characteristics.json")?;
        let symbolic: Vec<(String, SymbolicSevc)> = sevcs
            .iter()
            .map(|s| Ok((s.program.clone(), symbolize(s, &set.set)?)))
            .collect::<Result<_, VectorizeError>>()?;
        let table = match embeddings {
            Some(path) => {
                let bytes = self.read_bytes_from(path, "embeddings.json")?;
                let file: EmbeddingsFile = serde_json::from_slice(&bytes).map_err(|e| PipelineError::BadArtifact {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
                if file.table.dim != self.config.dim {
                    return Err(PipelineError::Config(format!(
                        "embeddings have dim {}, run uses {}",
                        file.table.dim, self.config.dim
                    )));
                }
                file.table
            }
            None => {
                let corpus: Vec<Vec<String>> = symbolic.iter().map(|(_, s)| s.symbols.clone()).collect();
                match train_embeddings(&corpus, self.config.dim, self.config.seed, self.config.embedding, &SkipGramConfig::default()) {
                    Ok(t) => t,
                    Err(VectorizeError::EmptyCorpus) => EmbeddingTable {
                        dim: self.config.dim,
                        seed: self.config.seed,
                        mode: self.config.embedding,
                        vocab: BTreeMap::new(),
                    },
                    Err(e) => return Err(e.into()),
                }
            }
        };
        let mut vectors = Vec::new();
        let mut notes = Vec::new();
        for (program, sym) in &symbolic {
            match encode(sym, &table, self.config.theta) {
                Ok(mut v) => {
                    v.program = program.clone();
                    vectors.push(v);
                }
                Err(e @ VectorizeError::AnchorTruncated { .. }) => notes.push(format!("{program}: {e}")),
                Err(e) => return Err(e.into()),
            }
        }
        let symbols: Vec<SymbolsRecord> = symbolic
            .into_iter()
            .map(|(program, s)| SymbolsRecord {
                program,
                syvc: s.syvc,
                symbols: s.symbols,
                anchor_start: s.anchor_start,
                anchor_end: s.anchor_end,
            })
            .collect();
        let (bin, index) = write_store(&vectors, self.config.theta, self.config.dim, self.config.seed)?;
        let mut idx = serde_json::to_string(&self.header("vectors.idx.jsonl", notes.clone())).expect("header serializes");
        idx.push('\n');
        idx.push_str(&index);
        let written = vec![
            self.write_jsonl("symbols.jsonl", vec![], &symbols)?,
            self.write_json("embeddings.json", &EmbeddingsFile { header: self.header("embeddings.json", vec![]), table })?,
            self.write_bytes("vectors.bin", &bin)?,
            self.write_bytes("vectors.idx.jsonl", idx.as_bytes())?,
        ];
        Ok(StageOutcome { written, records: vectors.len(), notes })
    }

    /// Reads the vector store and its index.
    pub fn vectors(&self) -> Result<(StoreHeader, Vec<SampleVector>), PipelineError> {
        let bin = self.read_bytes_from(&self.path("vectors.bin"), "vectors.bin")?;
        let index = self.read_text("vectors.idx.jsonl")?;
        let entries = index.split_once('\n').map_or("", |(_, rest)| rest);
        Ok(read_store(&bin, entries)?)
    }

    fn label_source(&self, manifest: &Manifest, rec: &ProgramRecord) -> Result<Option<LabelSource>, PipelineError> {
        let files = manifest.program_files(rec)?;
        if let Some(diff) = &rec.diff {
            let path = manifest.root().join(diff);
            let text = fs::read_to_string(&path).map_err(|e| PipelineError::io(&path, e))?;
            let parsed =
                parse_diff(&text).map_err(|source| PipelineError::Label { program: rec.id().to_string(), source })?;
            if !parsed.eligible {
                return Ok(None);
            }
            let files: BTreeSet<String> = files.into_iter().collect();
            let vulnerable = match rec.class.unwrap_or(ProgramClass::Bad) {
                ProgramClass::Good => BTreeSet::new(),
                _ => files.clone(),
            };
            return Ok(Some(LabelSource::Diff { marks: parsed.marks, covered_files: files, vulnerable_files: vulnerable }));
        }
        let Some(class) = rec.class else {
            return Ok(Some(LabelSource::Annotation(vec![])));
        };
        let mut annotations = Vec::new();
        for file in &files {
            let lines: BTreeSet<u32> = match &rec.vulnerable_lines {
                None => BTreeSet::new(),
                Some(VulnerableLines::Lines(l)) if files.len() == 1 => l.iter().copied().collect(),
                Some(VulnerableLines::Lines(_)) => {
                    return Err(PipelineError::Manifest(format!(
                        "program `{}` spans several files; give vulnerable lines per file",
                        rec.id()
                    )))
                }
                Some(VulnerableLines::PerFile(map)) => {
                    let prefix = rec.path.trim_end_matches('/');
                    map.iter()
                        .filter(|(k, _)| file == &format!("{prefix}/{}", k.trim_start_matches("./")))
                        .flat_map(|(_, v)| v.iter().copied())
                        .collect()
                }
            };
            annotations.push(Annotation { file: file.clone(), class, vulnerable_lines: lines });
        }
        Ok(Some(LabelSource::Annotation(annotations)))
    }

    /// Assigns ground-truth labels and exports every vulnerable candidate
    /// for manual review.
    pub fn label(&self) -> Result<StageOutcome, PipelineError> {
        let manifest = self.manifest()?;
        let mut sevcs = self.sevcs()?;
        let mut sources = BTreeMap::new();
        for rec in &manifest.programs {
            sources.insert(rec.id().to_string(), self.label_source(manifest, rec)?);
        }
        let mut labels = Vec::new();
        let mut notes = Vec::new();
        for s in &mut sevcs {
            let source = sources.get(&s.program).ok_or_else(|| {
                PipelineError::Manifest(format!("candidate from program `{}` which the manifest does not list", s.program))
            })?;
            let record = match source {
                None => LabelRecord { program: s.program.clone(), syvc: s.syvc, label: None, needs_review: false, eligible: false },
                Some(src) => {
                    let out = label_sevc(s, src)
                        .map_err(|source| PipelineError::Label { program: s.program.clone(), source })?;
                    s.label = out.slot();
                    LabelRecord {
                        program: s.program.clone(),
                        syvc: s.syvc,
                        label: Some(out.label),
                        needs_review: out.needs_review,
                        eligible: true,
                    }
                }
            };
            labels.push(record);
        }
        let ineligible: BTreeSet<&str> =
            sources.iter().filter(|(_, s)| s.is_none()).map(|(p, _)| p.as_str()).collect();
        for p in ineligible {
            notes.push(format!("{p}: diff only adds lines; program is ineligible"));
        }
        let review: Vec<&Sevc> = sevcs.iter().filter(|s| s.label.as_label() == Some(1)).collect();
        let written = vec![self.write_jsonl("labels.jsonl", notes.clone(), &labels)?, self.write_jsonl("review.jsonl", vec![], &review)?];
        Ok(StageOutcome { written, records: labels.len(), notes })
    }

    /// Labeled, eligible samples in store order.
    fn labeled(&self) -> Result<(StoreHeader, Vec<(SampleVector, LabelRecord)>), PipelineError> {
        let (header, vectors) = self.vectors()?;
        let (_, labels): (_, Vec<LabelRecord>) = self.read_jsonl("labels.jsonl")?;
        let by_key: BTreeMap<Key, LabelRecord> = labels.into_iter().map(|l| ((l.program.clone(), l.syvc), l)).collect();
        let mut out = Vec::new();
        for mut v in vectors {
            let Some(l) = by_key.get(&(v.program.clone(), v.syvc)) else { continue };
            if !l.eligible {
                continue;
            }
            v.label = l.label;
            out.push((v, l.clone()));
        }
        Ok((header, out))
    }

    /// Splits programs 80/20 and trains the classifier on the training side.
    pub fn train(&self) -> Result<StageOutcome, PipelineError> {
        let (store, samples) = self.labeled()?;
        self.check_store(&store)?;
        let programs: Vec<&str> = samples.iter().map(|(v, _)| v.program.as_str()).collect();
        let (train_idx, _) = split_by_program(&programs, self.config.split_ratio, self.config.seed)?;
        let train_programs: BTreeSet<String> = train_idx.iter().map(|&i| programs[i].to_string()).collect();
        let test_programs: BTreeSet<String> =
            programs.iter().map(|p| p.to_string()).filter(|p| !train_programs.contains(p)).collect();
        let mut dropped = 0;
        let data: Vec<Example> = train_idx
            .iter()
            .filter(|&&i| {
                let keep = !(self.config.strict_review && samples[i].1.needs_review);
                dropped += usize::from(!keep);
                keep
            })
            .map(|&i| Example::from_vector(&samples[i].0))
            .collect();
        let hp = self.config.hyperparams();
        let (model, report) = train(&data, &hp)?;
        let split = SplitRecord {
            header: self.header("split.json", vec![]),
            train: train_programs.into_iter().collect(),
            test: test_programs.into_iter().collect(),
        };
        let summary = TrainSummary {
            header: self.header("train_report.json", vec![]),
            hyperparams: hp.clone(),
            samples: data.len(),
            dropped_review: dropped,
            report,
        };
        let written = vec![
            self.write_json("split.json", &split)?,
            self.write_bytes("model.ckpt", &write_checkpoint(&model, &hp, self.config.theta))?,
            self.write_json("train_report.json", &summary)?,
        ];
        Ok(StageOutcome { written, records: data.len(), notes: vec![] })
    }

    fn check_store(&self, store: &StoreHeader) -> Result<(), PipelineError> {
        if store.theta as usize != self.config.theta || store.dim as usize != self.config.dim {
            return Err(PipelineError::Config(format!(
                "vectors were built with theta={} dim={}, run uses theta={} dim={}; rerun `vectorize`",
                store.theta, store.dim, self.config.theta, self.config.dim
            )));
        }
        Ok(())
    }

    fn load_model(&self, model: Option<&Path>) -> Result<crate::model::Bgru, PipelineError> {
        let path = model.map_or_else(|| self.path("model.ckpt"), Path::to_path_buf);
        let bytes = self.read_bytes_from(&path, "model.ckpt")?;
        Ok(read_checkpoint(&bytes, Some((self.config.theta, self.config.dim)))?.1)
    }

    /// Scores the held-out programs.
    pub fn evaluate(&self) -> Result<(StageOutcome, MetricsRecord), PipelineError> {
        let model = self.load_model(None)?;
        let split: SplitRecord = self.read_json("split.json")?;
        let (store, samples) = self.labeled()?;
        self.check_store(&store)?;
        let test: BTreeSet<&str> = split.test.iter().map(String::as_str).collect();
        let data: Vec<Example> = samples
            .iter()
            .filter(|(v, _)| test.contains(v.program.as_str()))
            .map(|(v, _)| Example::from_vector(v))
            .collect();
        let predictions = predict_all(&model, &data, self.config.threshold)?;
        let counts = ConfusionCounts::from_pairs(predictions.iter().zip(&data).map(|((p, _), ex)| (*p, ex.label)));
        let record = MetricsRecord {
            header: self.header("metrics.json", vec![]),
            samples: data.len(),
            counts,
            metrics: compute_metrics(&counts),
        };
        let written = vec![self.write_json("metrics.json", &record)?];
        Ok((StageOutcome { written, records: data.len(), notes: vec![] }, record))
    }

    /// Flags every candidate whose probability reaches the threshold.
    pub fn detect(&self, model: Option<&Path>) -> Result<(StageOutcome, Vec<DetectionRecord>), PipelineError> {
        let (store, vectors) = self.vectors()?;
        let mut found = Vec::new();
        if !vectors.is_empty() {
            self.check_store(&store)?;
            let model = self.load_model(model)?;
            let sevcs: BTreeMap<Key, Sevc> =
                self.sevcs()?.into_iter().map(|s| ((s.program.clone(), s.syvc), s)).collect();
            let data: Vec<Example> = vectors.iter().map(Example::from_vector).collect();
            for (v, (label, p)) in vectors.iter().zip(predict_all(&model, &data, self.config.threshold)?) {
                if label == 0 {
                    continue;
                }
                let s = sevcs.get(&(v.program.clone(), v.syvc)).ok_or_else(|| {
                    self.bad("sevc.jsonl", format!("no candidate {} in program {}", v.syvc, v.program))
                })?;
                let anchor = &s.statements[s.anchor_index()];
                found.push(DetectionRecord {
                    program: v.program.clone(),
                    syvc: v.syvc,
                    kind: s.kind,
                    file: anchor.file.clone(),
                    function: anchor.function.clone(),
                    lines: s.statements.iter().map(|st| st.line).collect(),
                    probability: p,
                });
            }
        }
        let written = vec![self.write_jsonl("detections.jsonl", vec![], &found)?];
        Ok((StageOutcome { written, records: found.len(), notes: vec![] }, found))
    }

    /// Activation traces and critical tokens for every vectorized candidate.
    pub fn explain(&self, model: Option<&Path>, delta: f64) -> Result<StageOutcome, PipelineError> {
        let (store, vectors) = self.vectors()?;
        let mut records = Vec::new();
        if !vectors.is_empty() {
            self.check_store(&store)?;
            let model = self.load_model(model)?;
            let (_, symbols): (_, Vec<SymbolsRecord>) = self.read_jsonl("symbols.jsonl")?;
            let symbols: BTreeMap<Key, SymbolsRecord> =
                symbols.into_iter().map(|s| ((s.program.clone(), s.syvc), s)).collect();
            for v in &vectors {
                let sym = symbols
                    .get(&(v.program.clone(), v.syvc))
                    .ok_or_else(|| self.bad("symbols.jsonl", format!("no symbols for {} {}", v.program, v.syvc)))?;
                let kept = &sym.symbols[v.dropped_left..sym.symbols.len() - v.dropped_right];
                let trace = model.forward(&Example::from_vector(v))?;
                records.push(ExplanationRecord {
                    program: v.program.clone(),
                    syvc: v.syvc,
                    probability: trace.final_output(),
                    critical: explain(&trace, kept, delta),
                });
            }
        }
        let written = vec![self.write_jsonl("explanations.jsonl", vec![], &records)?];
        Ok(StageOutcome { written, records: records.len(), notes: vec![] })
    }

    /// Runs every stage in order and returns the metrics.
    pub fn run_all(&self, delta: f64) -> Result<(Vec<(&'static str, StageOutcome)>, MetricsRecord), PipelineError> {
        let mut done = vec![
            ("parse", self.parse()?),
            ("extract", self.extract()?),
            ("slice", self.slice()?),
            ("vectorize", self.vectorize(None)?),
            ("label", self.label()?),
            ("train", self.train()?),
        ];
        let (outcome, metrics) = self.evaluate()?;
        done.push(("evaluate", outcome));
        done.push(("detect", self.detect(None)?.0));
        done.push(("explain", self.explain(None, delta)?));
        Ok((done, metrics))
    }
}
