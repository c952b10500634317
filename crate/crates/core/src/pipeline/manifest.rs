use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::labeler::ProgramClass;

/// Vulnerable lines of a program: a plain list when the program is a single
/// file, or a map from file (relative to the program path) to lines.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VulnerableLines {
    Lines(Vec<u32>),
    PerFile(BTreeMap<String, Vec<u32>>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramRecord {
    /// Defaults to `path`.
    #[serde(default)]
    pub id: Option<String>,
    /// File or directory relative to the corpus root.
    pub path: String,
    #[serde(default)]
    pub class: Option<ProgramClass>,
    #[serde(default)]
    pub vulnerable_lines: Option<VulnerableLines>,
    /// Unified diff relative to the corpus root.
    #[serde(default)]
    pub diff: Option<String>,
}

impl ProgramRecord {
    pub fn id(&self) -> &str {
        self.id.as_deref().unwrap_or(&self.path)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    /// Relative to the manifest's directory.
    #[serde(default = "default_root")]
    pub corpus_root: String,
    /// Characteristic call list, relative to the manifest's directory.
    #[serde(default)]
    pub fc_list: Option<String>,
    /// Relative to the manifest's directory.
    #[serde(default)]
    pub output_dir: Option<String>,
    pub programs: Vec<ProgramRecord>,
    #[serde(skip)]
    pub base: PathBuf,
}

fn default_root() -> String {
    ".".into()
}

const SOURCE_EXTENSIONS: &[&str] = &["c", "cc", "cpp", "h", "hpp"];

impl Manifest {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        let mut m: Manifest = serde_json::from_str(&text)
            .map_err(|e| PipelineError::Manifest(format!("{}: {e}", path.display())))?;
        m.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        m.validate()?;
        Ok(m)
    }

    pub fn root(&self) -> PathBuf {
        self.base.join(&self.corpus_root)
    }

    pub fn fc_list_path(&self) -> Option<PathBuf> {
        self.fc_list.as_ref().map(|p| self.base.join(p))
    }

    pub fn output_path(&self) -> Option<PathBuf> {
        self.output_dir.as_ref().map(|p| self.base.join(p))
    }

    fn validate(&self) -> Result<(), PipelineError> {
        let mut seen = BTreeMap::new();
        let mut missing = Vec::new();
        for p in &self.programs {
            if let Some(prev) = seen.insert(p.id().to_string(), &p.path) {
                return Err(PipelineError::Manifest(format!("duplicate program id `{}` ({prev})", p.id())));
            }
            if !self.root().join(&p.path).exists() {
                missing.push(p.path.clone());
            }
            if let Some(d) = &p.diff {
                if !self.root().join(d).exists() {
                    missing.push(d.clone());
                }
            }
        }
        if let Some(f) = self.fc_list_path() {
            if !f.exists() {
                missing.push(f.display().to_string());
            }
        }
        if missing.is_empty() {
            Ok(())
        } else {
            Err(PipelineError::Manifest(format!("missing paths: {}", missing.join(", "))))
        }
    }

    /// Source files of a program, relative to the corpus root with `/`
    /// separators, sorted.
    pub fn program_files(&self, p: &ProgramRecord) -> Result<Vec<String>, PipelineError> {
        let root = self.root();
        let full = root.join(&p.path);
        if full.is_file() {
            return Ok(vec![normalize(&p.path)]);
        }
        let mut out = Vec::new();
        let mut stack = vec![full.clone()];
        while let Some(dir) = stack.pop() {
            for entry in fs::read_dir(&dir).map_err(|e| PipelineError::io(&dir, e))? {
                let path = entry.map_err(|e| PipelineError::io(&dir, e))?.path();
                if path.is_dir() {
                    stack.push(path);
                } else if path.extension().and_then(|e| e.to_str()).is_some_and(|e| SOURCE_EXTENSIONS.contains(&e)) {
                    let rel = path.strip_prefix(&root).expect("walked below the root");
                    out.push(normalize(&rel.to_string_lossy()));
                }
            }
        }
        out.sort();
        Ok(out)
    }
}

fn normalize(path: &str) -> String {
    path.replace('\\', "/").trim_start_matches("./").to_string()
}
