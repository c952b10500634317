use std::collections::{BTreeMap, BTreeSet};
use std::fs;

use vulncand_core::frontend::ProgramModel;
use vulncand_core::graphs::ProgramGraphs;
use vulncand_core::labeler::{label_sevc, parse_diff, LabelSource, ProgramClass};
use vulncand_core::model::Preset;
use vulncand_core::pipeline::{LabelRecord, Manifest, Pipeline, ProgramRecord, RunConfig};
use vulncand_core::slicer::build_sevcs;
use vulncand_core::syvc::{extract_syvcs, CharacteristicSet, SyvcKind};

use crate::{fixture, Outcome};

use SyvcKind::{AE, AU, FC, PU};

/// `(file, line, kind, name in the anchor, label, needs review)`.
type Truth = (&'static str, u32, SyvcKind, &'static str, u8, bool);

/// Hand-assigned ground truth for every candidate of every fixture. `None`
/// marks a program whose diff only adds lines.
const FIXTURES: &[(&str, Option<&[Truth]>)] = &[
    (
        "01_deleted_call",
        Some(&[
            ("vuln.c", 3, AU, "buf", 1, false),
            ("vuln.c", 4, FC, "strcpy", 1, false),
            ("vuln.c", 5, FC, "printf", 0, false),
        ]),
    ),
    (
        "02_loop_bound",
        Some(&[
            ("vuln.c", 5, AE, "a [ i ]", 1, false),
            ("vuln.c", 7, FC, "memset", 1, false),
            ("vuln.c", 8, PU, "total", 0, false),
        ]),
    ),
    ("03_add_only", None),
    (
        "04_moved_line",
        Some(&[
            ("vuln.c", 3, PU, "q", 0, false),
            ("vuln.c", 4, FC, "free", 1, true),
            ("vuln.c", 5, FC, "printf", 0, false),
        ]),
    ),
    (
        "05_multi_hunk",
        Some(&[
            ("vuln.c", 3, AU, "a", 1, false),
            ("vuln.c", 4, AU, "b", 1, false),
            ("vuln.c", 5, FC, "strcpy", 1, false),
            ("vuln.c", 6, FC, "atoi", 0, false),
            ("vuln.c", 10, FC, "strcpy", 1, false),
        ]),
    ),
    (
        "06_callee",
        Some(&[
            ("vuln.c", 4, FC, "strcpy", 1, false),
            ("vuln.c", 8, AU, "local", 1, false),
        ]),
    ),
    (
        "07_two_files",
        Some(&[
            ("util.c", 3, PU, "w", 1, false),
            ("vuln.c", 3, AU, "buf", 0, false),
            ("vuln.c", 5, AE, "buf [ idx ]", 1, false),
            ("vuln.c", 6, FC, "printf", 0, false),
        ]),
    ),
    (
        "08_moved_and_deleted",
        Some(&[
            ("vuln.c", 3, AU, "tmp", 1, false),
            ("vuln.c", 4, FC, "memcpy", 1, false),
            ("vuln.c", 5, AE, "tmp [ 9 ]", 1, true),
        ]),
    ),
    (
        "09_whitespace_move",
        Some(&[
            ("vuln.c", 3, PU, "slot", 0, false),
            ("vuln.c", 3, FC, "malloc", 0, false),
            ("vuln.c", 4, FC, "printf", 1, true),
            ("vuln.c", 5, AE, "slot", 0, false),
            ("vuln.c", 6, FC, "free", 0, false),
        ]),
    ),
    (
        "10_new_file",
        Some(&[
            ("main.c", 3, AU, "table", 1, false),
            ("main.c", 4, AE, "table [ idx ]", 1, false),
            ("main.c", 5, FC, "printf", 1, false),
            ("main.c", 6, PU, "spare", 0, false),
        ]),
    ),
];

/// Library labels keyed by candidate id.
type Labeled = BTreeMap<u32, (String, u32, SyvcKind, String, u8, bool)>;

fn label_fixture(name: &str) -> Result<(bool, Labeled), String> {
    let dir = fixture(&format!("diffs/{name}"));
    let mut files: Vec<String> = fs::read_dir(&dir)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.file_name().to_string_lossy().into_owned()))
        .filter(|f| f.ends_with(".c"))
        .collect();
    files.sort();
    let mut program = ProgramModel::new();
    for f in &files {
        let src = fs::read_to_string(dir.join(f)).map_err(|e| e.to_string())?;
        program.add_source(&src, f).map_err(|e| format!("{name}/{f}: {e}"))?;
    }
    let diff = fs::read_to_string(dir.join("patch.diff")).map_err(|e| e.to_string())?;
    let parsed = parse_diff(&diff).map_err(|e| format!("{name}: {e}"))?;
    if !parsed.eligible {
        if !parsed.marks.is_empty() {
            return Err(format!("{name}: ineligible diff carries marks"));
        }
        return Ok((false, BTreeMap::new()));
    }
    let graphs = ProgramGraphs::build(&program);
    let syvcs = extract_syvcs(&program, &CharacteristicSet::default());
    let (sevcs, errors) = build_sevcs(&program, &graphs, &syvcs);
    if !errors.is_empty() {
        return Err(format!("{name}: slicing failed {errors:?}"));
    }
    let source = LabelSource::Diff {
        marks: parsed.marks,
        covered_files: parsed.files,
        vulnerable_files: files.iter().cloned().collect(),
    };
    let mut out = BTreeMap::new();
    for (syvc, sevc) in syvcs.iter().zip(&sevcs) {
        let got = label_sevc(sevc, &source).map_err(|e| format!("{name}: {e}"))?;
        let file = sevc.statements[sevc.anchor_index()].file.clone();
        out.insert(syvc.id, (file, syvc.line, syvc.kind, syvc.anchor_text.clone(), got.label, got.needs_review));
    }
    Ok((true, out))
}

fn compare(name: &str, truth: &[Truth], got: &Labeled) -> Result<(), String> {
    let want: BTreeMap<(&str, u32, SyvcKind), (&str, u8, bool)> =
        truth.iter().map(|&(f, l, k, a, y, r)| ((f, l, k), (a, y, r))).collect();
    let have: BTreeMap<(&str, u32, SyvcKind), (&str, u8, bool)> =
        got.values().map(|(f, l, k, a, y, r)| ((f.as_str(), *l, *k), (a.as_str(), *y, *r))).collect();
    let keys: BTreeSet<_> = want.keys().chain(have.keys()).collect();
    let mut wrong = Vec::new();
    for key in keys {
        match (want.get(key), have.get(key)) {
            (Some(w), Some(h)) if h.0.contains(w.0) && (w.1, w.2) == (h.1, h.2) => {}
            (w, h) => wrong.push(format!("{key:?}: expected {w:?}, got {h:?}")),
        }
    }
    if wrong.is_empty() {
        Ok(())
    } else {
        Err(format!("{name}: {}", wrong.join("; ")))
    }
}

/// Runs the labeling stage over all fixtures as one corpus and checks it
/// agrees with the per-fixture library results.
fn pipeline_agrees(library: &BTreeMap<&str, Labeled>) -> Result<(), String> {
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let manifest = Manifest {
        corpus_root: fixture("diffs").display().to_string(),
        fc_list: None,
        output_dir: None,
        programs: FIXTURES
            .iter()
            .map(|(name, _)| ProgramRecord {
                id: None,
                path: name.to_string(),
                class: Some(ProgramClass::Bad),
                vulnerable_lines: None,
                diff: Some(format!("{name}/patch.diff")),
            })
            .collect(),
        base: fixture("diffs"),
    };
    let pipeline =
        Pipeline::new(Some(manifest), RunConfig::new(Preset::Desk, 0), out.path().into()).map_err(|e| e.to_string())?;
    pipeline.parse().map_err(|e| e.to_string())?;
    pipeline.extract().map_err(|e| e.to_string())?;
    pipeline.slice().map_err(|e| e.to_string())?;
    pipeline.label().map_err(|e| e.to_string())?;
    let text = fs::read_to_string(out.path().join("labels.jsonl")).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty labels.jsonl")?;
    if !header.contains("03_add_only: diff only adds lines") {
        return Err("add-only program not reported as ineligible".into());
    }
    let mut seen = 0;
    for line in lines {
        let r: LabelRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let expected = library.get(r.program.as_str()).ok_or_else(|| format!("unknown program {}", r.program))?;
        if r.program == "03_add_only" {
            if r.eligible || r.label.is_some() {
                return Err(format!("add-only program labeled: {r:?}"));
            }
            continue;
        }
        let want = expected.get(&r.syvc).ok_or_else(|| format!("{}: unexpected candidate {}", r.program, r.syvc))?;
        if !r.eligible || r.label != Some(want.4) || r.needs_review != want.5 {
            return Err(format!("pipeline disagrees for {r:?}, library {want:?}"));
        }
        seen += 1;
    }
    let total: usize = library.values().map(BTreeMap::len).sum();
    if seen != total {
        return Err(format!("pipeline labeled {seen} candidates, library {total}"));
    }
    Ok(())
}

pub fn run() -> Outcome {
    let mut library = BTreeMap::new();
    let mut failures = Vec::new();
    let (mut positives, mut review) = (0, 0);
    for &(name, truth) in FIXTURES {
        let (eligible, got) = label_fixture(name)?;
        match truth {
            None if eligible => failures.push(format!("{name}: add-only diff treated as eligible")),
            None => {}
            Some(_) if !eligible => failures.push(format!("{name}: diff treated as add-only")),
            Some(t) => {
                if let Err(e) = compare(name, t, &got) {
                    failures.push(e);
                }
                positives += t.iter().filter(|x| x.4 == 1).count();
                review += t.iter().filter(|x| x.5).count();
            }
        }
        library.insert(name, got);
    }
    if !failures.is_empty() {
        return Err(failures.join(" | "));
    }
    pipeline_agrees(&library)?;
    let total: usize = library.values().map(BTreeMap::len).sum();
    Ok(format!(
        "10 fixtures, {total} candidates match hand labels ({positives} vulnerable, {review} flagged for review, 1 ineligible)"
    ))
}
