use std::collections::BTreeSet;

use vulncand_core::frontend::ProgramModel;
use vulncand_core::graphs::{EdgeKind, ProgramGraphs};
use vulncand_core::slicer::{build_sevcs, Region};
use vulncand_core::syvc::{extract_syvcs, CharacteristicSet, SyvcKind};

use crate::{fixture, Outcome};

const D: EdgeKind = EdgeKind::Data;
const C: EdgeKind = EdgeKind::Control;

/// Dependence edges drawn by hand from the fixture source, as
/// `(function, from line, to line, kind)`.
const HAND_DRAWN: &[(&str, u32, u32, EdgeKind)] = &[
    ("printLine", 1, 3, D),
    ("printLine", 1, 4, D),
    ("printLine", 3, 4, C),
    ("func", 7, 13, D),
    ("func", 9, 11, D),
    ("func", 9, 12, D),
    ("func", 10, 16, D),
    ("func", 10, 17, D),
    ("func", 12, 15, D),
    ("func", 13, 15, C),
    ("func", 13, 16, C),
    ("func", 13, 17, C),
    ("func", 13, 18, C),
    ("func", 13, 19, C),
    ("func", 13, 20, C),
    ("func", 13, 21, C),
    ("func", 15, 18, D),
    ("func", 15, 19, D),
    ("func", 17, 18, D),
    ("func", 19, 20, D),
];

/// `printLine(data)` on line 20 binds `data` to the parameter on line 1.
const CALL_BINDING: (u32, u32) = (20, 1);

fn reach(start: u32, forward: bool) -> BTreeSet<u32> {
    let mut edges: Vec<(u32, u32, EdgeKind)> = HAND_DRAWN.iter().map(|&(_, a, b, k)| (a, b, k)).collect();
    edges.push((CALL_BINDING.0, CALL_BINDING.1, D));
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(n) = stack.pop() {
        for &(a, b, k) in &edges {
            let next = match forward {
                true if a == n && k == D => b,
                false if b == n => a,
                _ => continue,
            };
            if seen.insert(next) {
                stack.push(next);
            }
        }
    }
    seen
}

pub fn run() -> Outcome {
    let src = std::fs::read_to_string(fixture("running_example.c")).map_err(|e| e.to_string())?;
    let mut program = ProgramModel::new();
    program.add_source(&src, "running_example.c").map_err(|e| e.to_string())?;
    let graphs = ProgramGraphs::build(&program);

    let mut built = BTreeSet::new();
    for f in &program.functions {
        for e in &graphs.pdg(f.id).edges {
            let line = |id| f.statement(id).expect("statement").first_line;
            built.insert((f.name.as_str(), line(e.src), line(e.dst), e.kind));
        }
    }
    let drawn: BTreeSet<_> = HAND_DRAWN.iter().copied().collect();
    if built != drawn {
        let missing: Vec<_> = drawn.difference(&built).collect();
        let extra: Vec<_> = built.difference(&drawn).collect();
        return Err(format!("dependence graphs differ from the drawing: missing {missing:?}, extra {extra:?}"));
    }

    let syvcs = extract_syvcs(&program, &CharacteristicSet::default());
    let data = syvcs
        .iter()
        .find(|s| s.kind == SyvcKind::PU && s.anchor_text == "data")
        .ok_or("no pointer-usage candidate for `data`")?;
    let (sevcs, errors) = build_sevcs(&program, &graphs, std::slice::from_ref(data));
    if !errors.is_empty() {
        return Err(format!("slicing failed: {errors:?}"));
    }
    let sevc = &sevcs[0];

    let first_print = sevc.statements.iter().position(|s| s.function == "printLine");
    let last_func = sevc.statements.iter().rposition(|s| s.function == "func");
    match (last_func, first_print) {
        (Some(f), Some(p)) if f < p => {}
        _ => return Err("func statements do not all precede printLine statements".into()),
    }
    let got: BTreeSet<u32> = sevc.statements.iter().map(|s| s.line).collect();
    let want: BTreeSet<u32> = &reach(data.line, true) | &reach(data.line, false);
    if !want.is_subset(&got) {
        return Err(format!("missing statements {:?}", want.difference(&got).collect::<Vec<_>>()));
    }
    if got != want {
        return Err(format!("statements {:?} are not connected by the drawn edges", got.difference(&want).collect::<Vec<_>>()));
    }
    let order: Vec<u32> = sevc.statements.iter().map(|s| s.line).collect();
    if order != [7, 9, 12, 13, 15, 18, 19, 20, 1, 3, 4] {
        return Err(format!("unexpected order {order:?}"));
    }
    if sevc.statements[4].region != Region::Anchor || sevc.anchor_index() != 4 {
        return Err("anchor not tagged on line 15".into());
    }
    Ok(format!("candidate lines {order:?}"))
}
