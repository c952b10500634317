//! Ground-truth labels from unified diffs or per-program line annotations.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::slicer::{LabelSlot, Sevc};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LabelError {
    #[error("malformed hunk header at diff line {line}: {text}")]
    HunkHeader { line: usize, text: String },
    #[error("hunk starting at diff line {line} ends early")]
    ShortHunk { line: usize },
    #[error("hunk at diff line {line} has no file header")]
    MissingFile { line: usize },
    #[error("no ground truth covers: {}", .0.join(", "))]
    Uncovered(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MarkKind {
    DeletedOrModified,
    Moved,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DiffMark {
    pub file: String,
    /// Pre-patch line number.
    pub line: u32,
    pub mark: MarkKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedDiff {
    pub marks: Vec<DiffMark>,
    pub files: BTreeSet<String>,
    /// False for diffs that only add lines.
    pub eligible: bool,
}

fn strip_prefix(path: &str) -> &str {
    let path = path.split('\t').next().unwrap_or(path).trim();
    path.strip_prefix("a/").or_else(|| path.strip_prefix("b/")).unwrap_or(path)
}

fn normalize(line: &str) -> String {
    line.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn parse_range(s: &str) -> Option<(u32, u32)> {
    let (start, count) = match s.split_once(',') {
        Some((a, b)) => (a.parse().ok()?, b.parse().ok()?),
        None => (s.parse().ok()?, 1),
    };
    Some((start, count))
}

fn parse_hunk_header(line: &str) -> Option<((u32, u32), (u32, u32))> {
    let rest = line.strip_prefix("@@ ")?;
    let (ranges, _) = rest.split_once(" @@")?;
    let mut parts = ranges.split(' ');
    let old = parse_range(parts.next()?.strip_prefix('-')?)?;
    let new = parse_range(parts.next()?.strip_prefix('+')?)?;
    parts.next().is_none().then_some((old, new))
}

/// Marks every `-` line of a unified diff. A removed line whose trimmed text
/// reappears as an added line anywhere in the same file is marked moved.
pub fn parse_diff(text: &str) -> Result<ParsedDiff, LabelError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut current: Option<String> = None;
    let mut removed: BTreeMap<String, Vec<(u32, String)>> = BTreeMap::new();
    let mut added: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut files = BTreeSet::new();
    let mut i = 0;
    while i < lines.len() {
        let line = lines[i];
        if let Some(path) = line.strip_prefix("--- ") {
            let old = strip_prefix(path);
            current = (old != "/dev/null").then(|| old.to_string());
            i += 1;
            continue;
        }
        if let Some(path) = line.strip_prefix("+++ ") {
            let new = strip_prefix(path);
            if current.is_none() && new != "/dev/null" {
                current = Some(new.to_string());
            }
            files.extend(current.clone());
            i += 1;
            continue;
        }
        if line.starts_with("@@") {
            let header_line = i + 1;
            let ((old_start, mut old_left), (_, mut new_left)) = parse_hunk_header(line)
                .ok_or_else(|| LabelError::HunkHeader { line: header_line, text: line.to_string() })?;
            let file = current.clone().ok_or(LabelError::MissingFile { line: header_line })?;
            let mut old_line = old_start;
            i += 1;
            while old_left > 0 || new_left > 0 {
                let Some(body) = lines.get(i) else {
                    return Err(LabelError::ShortHunk { line: header_line });
                };
                match body.chars().next() {
                    Some('-') if old_left > 0 => {
                        removed.entry(file.clone()).or_default().push((old_line, normalize(&body[1..])));
                        old_line += 1;
                        old_left -= 1;
                    }
                    Some('+') if new_left > 0 => {
                        added.entry(file.clone()).or_default().insert(normalize(&body[1..]));
                        new_left -= 1;
                    }
                    Some(' ') | None if old_left > 0 && new_left > 0 => {
                        old_line += 1;
                        old_left -= 1;
                        new_left -= 1;
                    }
                    Some('\\') => {}
                    _ => return Err(LabelError::ShortHunk { line: header_line }),
                }
                i += 1;
            }
            continue;
        }
        i += 1;
    }

    let mut marks = Vec::new();
    for (file, lines) in &removed {
        let plus = added.get(file);
        for (line, content) in lines {
            let moved = plus.is_some_and(|p| p.contains(content));
            marks.push(DiffMark {
                file: file.clone(),
                line: *line,
                mark: if moved { MarkKind::Moved } else { MarkKind::DeletedOrModified },
            });
        }
    }
    marks.sort();
    let eligible = !marks.is_empty();
    Ok(ParsedDiff { marks, files, eligible })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProgramClass {
    Good,
    Bad,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub file: String,
    pub class: ProgramClass,
    #[serde(default)]
    pub vulnerable_lines: BTreeSet<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelSource {
    Diff {
        marks: Vec<DiffMark>,
        /// Files the diff speaks for (a file absent from the diff is clean).
        covered_files: BTreeSet<String>,
        /// Files known to contain a vulnerability.
        vulnerable_files: BTreeSet<String>,
    },
    Annotation(Vec<Annotation>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelOutcome {
    pub label: u8,
    pub needs_review: bool,
}

impl LabelOutcome {
    pub fn slot(self) -> LabelSlot {
        match (self.label, self.needs_review) {
            (0, _) => LabelSlot::Clean,
            (_, true) => LabelSlot::NeedsReview,
            _ => LabelSlot::Vulnerable,
        }
    }
}

/// Component-wise suffix match, so `src/a.c` matches `proj/src/a.c`.
pub fn path_matches(a: &str, b: &str) -> bool {
    let pa: Vec<&str> = a.split(['/', '\\']).filter(|c| !c.is_empty() && *c != ".").collect();
    let pb: Vec<&str> = b.split(['/', '\\']).filter(|c| !c.is_empty() && *c != ".").collect();
    let n = pa.len().min(pb.len());
    n > 0 && pa[pa.len() - n..] == pb[pb.len() - n..]
}

fn covered(file: &str, set: &BTreeSet<String>) -> bool {
    set.iter().any(|f| path_matches(file, f))
}

/// Labels one candidate.
pub fn label_sevc(sevc: &Sevc, source: &LabelSource) -> Result<LabelOutcome, LabelError> {
    let files: BTreeSet<&str> = sevc.statements.iter().map(|s| s.file.as_str()).collect();
    match source {
        LabelSource::Diff { marks, covered_files, vulnerable_files } => {
            let known: BTreeSet<String> =
                covered_files.iter().cloned().chain(marks.iter().map(|m| m.file.clone())).collect();
            let missing: Vec<String> = files.iter().filter(|f| !covered(f, &known)).map(|f| f.to_string()).collect();
            if !missing.is_empty() {
                return Err(LabelError::Uncovered(missing));
            }
            let hit = |kind: MarkKind| {
                sevc.statements.iter().any(|s| {
                    marks.iter().any(|m| {
                        m.mark == kind && (s.line..=s.last_line).contains(&m.line) && path_matches(&s.file, &m.file)
                    })
                })
            };
            if hit(MarkKind::DeletedOrModified) {
                return Ok(LabelOutcome { label: 1, needs_review: false });
            }
            let moved_in_vulnerable = sevc.statements.iter().any(|s| {
                covered(&s.file, vulnerable_files)
                    && marks.iter().any(|m| {
                        m.mark == MarkKind::Moved
                            && (s.line..=s.last_line).contains(&m.line)
                            && path_matches(&s.file, &m.file)
                    })
            });
            Ok(LabelOutcome { label: u8::from(moved_in_vulnerable), needs_review: moved_in_vulnerable })
        }
        LabelSource::Annotation(annotations) => {
            let find = |file: &str| annotations.iter().find(|a| path_matches(file, &a.file));
            let missing: Vec<String> = files.iter().filter(|f| find(f).is_none()).map(|f| f.to_string()).collect();
            if !missing.is_empty() {
                return Err(LabelError::Uncovered(missing));
            }
            let vulnerable = sevc.statements.iter().any(|s| {
                let a = find(&s.file).expect("checked above");
                a.class != ProgramClass::Good && (s.line..=s.last_line).any(|l| a.vulnerable_lines.contains(&l))
            });
            Ok(LabelOutcome { label: u8::from(vulnerable), needs_review: false })
        }
    }
}

/// Candidates queued for manual audit: every candidate labeled vulnerable.
pub fn review_queue(sevcs: &[Sevc]) -> Vec<&Sevc> {
    sevcs.iter().filter(|s| s.label.as_label() == Some(1)).collect()
}
