use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vulncand_core::frontend::{FunctionId, ProgramModel, StmtId};
use vulncand_core::graphs::{build_pdg, DependenceEdge, EdgeKind, Pdg, ProgramGraphs};
use vulncand_core::slicer::{backward_slice, forward_slice, SliceContext};
use vulncand_core::syvc::{extract_syvcs, CharacteristicSet};

use crate::{fixture, Outcome};

/// Reachability matrix by Floyd-Warshall over the chosen edge kinds.
fn closure(n: usize, edges: &[DependenceEdge], kinds: &[EdgeKind]) -> Vec<Vec<bool>> {
    let mut r = vec![vec![false; n]; n];
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = true;
    }
    for e in edges.iter().filter(|e| kinds.contains(&e.kind)) {
        r[e.src.0 as usize][e.dst.0 as usize] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r
}

fn random_pdgs() -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    for case in 0..200 {
        let n = rng.gen_range(1..=12usize);
        let density = rng.gen_range(0.05..0.35);
        let mut edges = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if a != b && rng.gen_bool(density) {
                    let kind = if rng.gen_bool(0.6) { EdgeKind::Data } else { EdgeKind::Control };
                    let variable = (kind == EdgeKind::Data).then(|| "v".to_string());
                    edges.push(DependenceEdge { src: StmtId(a as u32), dst: StmtId(b as u32), kind, variable });
                }
            }
        }
        let pdg = Pdg { function: FunctionId(0), nodes: (0..n as u32).map(StmtId).collect(), edges };
        let data = closure(n, &pdg.edges, &[EdgeKind::Data]);
        let both = closure(n, &pdg.edges, &[EdgeKind::Data, EdgeKind::Control]);
        for anchor in 0..n {
            let fwd: Vec<StmtId> = (0..n).filter(|&j| data[anchor][j]).map(|j| StmtId(j as u32)).collect();
            let bwd: Vec<StmtId> = (0..n).filter(|&j| both[j][anchor]).map(|j| StmtId(j as u32)).collect();
            let a = StmtId(anchor as u32);
            let got_f = forward_slice(&pdg, a).map_err(|e| e.to_string())?;
            let got_b = backward_slice(&pdg, a).map_err(|e| e.to_string())?;
            if got_f != fwd || got_b != bwd {
                return Err(format!("random pdg {case}, anchor {anchor}: forward {got_f:?} vs {fwd:?}, backward {got_b:?} vs {bwd:?}"));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

/// Parses `// @P =A,B` markers: `P` is the original line this inlined
/// statement stands for, `A,B` are further original lines it covers.
fn markers(src: &str) -> BTreeMap<u32, (Option<u32>, Vec<u32>)> {
    let mut out = BTreeMap::new();
    for (i, line) in src.lines().enumerate() {
        let Some((_, tail)) = line.split_once("//") else { continue };
        let mut primary = None;
        let mut extra = Vec::new();
        for part in tail.split_whitespace() {
            if let Some(p) = part.strip_prefix('@') {
                primary = p.parse().ok();
            } else if let Some(list) = part.strip_prefix('=') {
                extra.extend(list.split(',').filter_map(|x| x.parse::<u32>().ok()));
            }
        }
        out.insert(i as u32 + 1, (primary, extra));
    }
    out
}

fn parse(src: &str, file: &str) -> Result<ProgramModel, String> {
    let mut p = ProgramModel::new();
    p.add_source(src, file).map_err(|e| format!("{file}: {e}"))?;
    Ok(p)
}

fn descendants(graphs: &ProgramGraphs, f: FunctionId) -> BTreeSet<FunctionId> {
    let mut seen = BTreeSet::from([f]);
    let mut stack = vec![f];
    while let Some(g) = stack.pop() {
        for e in graphs.call_graph.callees_of(g) {
            if seen.insert(e.callee) {
                stack.push(e.callee);
            }
        }
    }
    seen
}

fn inline_fixture(name: &str) -> Result<usize, String> {
    let read = |f: &str| std::fs::read_to_string(fixture(&format!("inline/{f}"))).map_err(|e| e.to_string());
    let original = parse(&read(&format!("{name}.c"))?, "orig.c")?;
    let inlined_src = read(&format!("{name}.inlined.c"))?;
    let inlined = parse(&inlined_src, "inlined.c")?;
    let marks = markers(&inlined_src);

    let f = &inlined.functions[0];
    let (pdg, _) = build_pdg(f);
    let index: BTreeMap<StmtId, usize> = pdg.nodes.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let edges: Vec<DependenceEdge> = pdg
        .edges
        .iter()
        .map(|e| DependenceEdge { src: StmtId(index[&e.src] as u32), dst: StmtId(index[&e.dst] as u32), ..e.clone() })
        .collect();
    let n = pdg.nodes.len();
    let data = closure(n, &edges, &[EdgeKind::Data]);
    let both = closure(n, &edges, &[EdgeKind::Data, EdgeKind::Control]);
    let covers = |k: usize| -> Result<Vec<u32>, String> {
        let line = f.statement(pdg.nodes[k]).expect("pdg node").first_line;
        let (p, extra) = marks.get(&line).ok_or(format!("{name}: inlined line {line} has no marker"))?;
        Ok(p.iter().chain(extra).copied().collect())
    };

    let graphs = ProgramGraphs::build(&original);
    let ctx = SliceContext::new(&original, &graphs);
    let line_of = |id: &StmtId| original.statement(*id).expect("statement").1.first_line;
    let user_call_lines: BTreeSet<u32> = graphs.call_graph.edges.iter().map(|e| line_of(&e.site)).collect();
    let syvcs = extract_syvcs(&original, &CharacteristicSet::default());
    for s in &syvcs {
        let anchor_line = line_of(&s.statement);
        if user_call_lines.contains(&anchor_line) {
            return Err(format!("{name}: candidate on call line {anchor_line}; the oracle cannot place it"));
        }
        let k = (0..n)
            .find(|&k| marks.get(&f.statement(pdg.nodes[k]).unwrap().first_line).and_then(|m| m.0) == Some(anchor_line))
            .ok_or(format!("{name}: no inlined statement stands for line {anchor_line}"))?;
        let mut want_f = BTreeSet::new();
        let mut want_b = BTreeSet::new();
        for j in 0..n {
            if data[k][j] {
                want_f.extend(covers(j)?);
            }
            if both[j][k] {
                want_b.extend(covers(j)?);
            }
        }
        // Forward slices only descend into callees.
        let reach: BTreeSet<u32> = descendants(&graphs, s.function)
            .into_iter()
            .flat_map(|g| original.function(g).body.iter().map(|st| st.first_line))
            .collect();
        want_f.retain(|l| reach.contains(l));

        let slice = ctx.slice(s).map_err(|e| e.to_string())?;
        let got_f: BTreeSet<u32> = slice.forward.iter().map(line_of).collect();
        let got_b: BTreeSet<u32> = slice.backward.iter().map(line_of).collect();
        if got_f != want_f || got_b != want_b {
            return Err(format!(
                "{name}: {} '{}' line {anchor_line}: forward {got_f:?} vs oracle {want_f:?}, backward {got_b:?} vs oracle {want_b:?}",
                s.kind, s.anchor_text
            ));
        }
        let sevc = ctx.assemble(s, &slice).map_err(|e| e.to_string())?;
        let lines: BTreeSet<u32> = sevc.statements.iter().map(|st| st.line).collect();
        if lines != &want_f | &want_b {
            return Err(format!("{name}: assembled candidate for line {anchor_line} has lines {lines:?}"));
        }
    }
    Ok(syvcs.len())
}

pub fn run() -> Outcome {
    let checked = random_pdgs()?;
    let mut fixtures = 0;
    for name in ["args_return", "chain", "guarded_call"] {
        fixtures += inline_fixture(name)?;
    }
    Ok(format!("{checked} random anchors over 200 graphs, {fixtures} candidates in 3 inlined fixtures, 0 discrepancies"))
}
