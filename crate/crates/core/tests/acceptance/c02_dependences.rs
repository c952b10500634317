use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vulncand_core::frontend::ProgramModel;
use vulncand_core::graphs::{build_cfg, build_pdg, def_use, CfgNode, EdgeKind};

use crate::{within, Outcome};

const VARS: [&str; 4] = ["a", "b", "c", "d"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Node {
    Entry,
    Exit,
    Line(u32),
}

enum Gen {
    Assign { line: u32 },
    Return { line: u32 },
    Break { line: u32 },
    If { line: u32, then: Vec<Gen>, els: Option<Vec<Gen>> },
    While { line: u32, body: Vec<Gen> },
}

#[derive(Default)]
struct Program {
    lines: Vec<String>,
    defs: BTreeMap<u32, BTreeSet<String>>,
    uses: BTreeMap<u32, BTreeSet<String>>,
}

impl Program {
    fn emit(&mut self, depth: usize, text: String) -> u32 {
        self.lines.push(format!("{}{text}", "    ".repeat(depth)));
        self.lines.len() as u32
    }

    fn pick_uses(&self, rng: &mut ChaCha8Rng) -> Vec<&'static str> {
        let n = rng.gen_range(0..=2);
        (0..n).map(|_| VARS[rng.gen_range(0..VARS.len())]).collect()
    }

    fn record(&mut self, line: u32, def: Option<&str>, uses: &[&str]) {
        self.defs.insert(line, def.into_iter().map(String::from).collect());
        self.uses.insert(line, uses.iter().map(|s| s.to_string()).collect());
    }
}

/// Emits a block of at most `budget` statements. `tail` allows a trailing
/// `return`/`break` as the last statement of an `if` without `else`.
fn block(p: &mut Program, rng: &mut ChaCha8Rng, depth: usize, budget: &mut usize, in_loop: bool, tail: bool) -> Vec<Gen> {
    let mut out = Vec::new();
    let want = rng.gen_range(1..=3).min(*budget);
    for i in 0..want {
        if *budget == 0 {
            break;
        }
        *budget -= 1;
        let last = i + 1 == want;
        let roll = rng.gen_range(0..10);
        if tail && last && roll < 3 {
            if in_loop && rng.gen_bool(0.5) {
                let line = p.emit(depth, "break;".into());
                p.record(line, None, &[]);
                out.push(Gen::Break { line });
            } else {
                let v = VARS[rng.gen_range(0..VARS.len())];
                let line = p.emit(depth, format!("return {v};"));
                p.record(line, None, &[v]);
                out.push(Gen::Return { line });
            }
        } else if roll < 5 || *budget == 0 {
            let def = VARS[rng.gen_range(0..VARS.len())];
            let uses = p.pick_uses(rng);
            let rhs = if uses.is_empty() { rng.gen_range(0..9).to_string() } else { uses.join(" + ") };
            let line = p.emit(depth, format!("{def} = {rhs};"));
            p.record(line, Some(def), &uses);
            out.push(Gen::Assign { line });
        } else {
            let (x, y) = (VARS[rng.gen_range(0..VARS.len())], VARS[rng.gen_range(0..VARS.len())]);
            let is_while = rng.gen_bool(0.4);
            let kw = if is_while { "while" } else { "if" };
            let line = p.emit(depth, format!("{kw} ({x} < {y}) {{"));
            p.record(line, None, &[x, y]);
            if is_while {
                let body = block(p, rng, depth + 1, budget, true, false);
                p.emit(depth, "}".into());
                out.push(Gen::While { line, body });
            } else {
                let with_else = *budget > 1 && rng.gen_bool(0.5);
                let then = block(p, rng, depth + 1, budget, in_loop, !with_else);
                p.emit(depth, "}".into());
                let els = with_else.then(|| {
                    p.emit(depth, "else {".into());
                    let e = block(p, rng, depth + 1, budget, in_loop, false);
                    p.emit(depth, "}".into());
                    e
                });
                out.push(Gen::If { line, then, els });
            }
        }
    }
    out
}

/// Wires `items` so that control leaves the block to `follow`; returns the
/// block's first node.
fn wire(items: &[Gen], follow: Node, loop_exit: Option<Node>, succs: &mut BTreeMap<Node, BTreeSet<Node>>) -> Node {
    let mut next = follow;
    for g in items.iter().rev() {
        next = match g {
            Gen::Assign { line } => {
                succs.entry(Node::Line(*line)).or_default().insert(next);
                Node::Line(*line)
            }
            Gen::Return { line } => {
                succs.entry(Node::Line(*line)).or_default().insert(Node::Exit);
                Node::Line(*line)
            }
            Gen::Break { line } => {
                succs.entry(Node::Line(*line)).or_default().insert(loop_exit.expect("break outside loop"));
                Node::Line(*line)
            }
            Gen::If { line, then, els } => {
                let t = wire(then, next, loop_exit, succs);
                let e = match els {
                    Some(e) => wire(e, next, loop_exit, succs),
                    None => next,
                };
                succs.entry(Node::Line(*line)).or_default().extend([t, e]);
                Node::Line(*line)
            }
            Gen::While { line, body } => {
                let b = wire(body, Node::Line(*line), Some(next), succs);
                succs.entry(Node::Line(*line)).or_default().extend([b, next]);
                Node::Line(*line)
            }
        };
    }
    next
}

type Succs = BTreeMap<Node, BTreeSet<Node>>;

fn reaches(succs: &Succs, from: Node, to: Node, blocked: Option<Node>) -> bool {
    let mut seen = BTreeSet::from([from]);
    let mut queue = VecDeque::from([from]);
    while let Some(n) = queue.pop_front() {
        if n == to {
            return true;
        }
        for &s in succs.get(&n).into_iter().flatten() {
            if Some(s) != blocked && seen.insert(s) {
                queue.push_back(s);
            }
        }
    }
    false
}

/// `j` post-dominates `x`: every path from `x` to exit passes through `j`.
fn post_dominates(succs: &Succs, j: Node, x: Node) -> bool {
    j == x || (x != Node::Exit && !reaches(succs, x, Node::Exit, Some(j)))
}

/// Control dependence read straight off its path definition: some path from
/// `l` to `j` whose interior nodes are all post-dominated by `j`, where `j`
/// does not post-dominate `l`.
fn control_oracle(succs: &Succs, stmts: &[Node]) -> BTreeSet<(u32, u32)> {
    let mut out = BTreeSet::new();
    for &l in stmts {
        for &j in stmts {
            if post_dominates(succs, j, l) {
                continue;
            }
            let mut seen = BTreeSet::new();
            let mut queue: VecDeque<Node> = succs[&l].iter().copied().collect();
            let mut found = false;
            while let Some(v) = queue.pop_front() {
                if v == j {
                    found = true;
                    break;
                }
                if v == l || !post_dominates(succs, j, v) || !seen.insert(v) {
                    continue;
                }
                queue.extend(succs.get(&v).into_iter().flatten().copied());
            }
            if found {
                if let (Node::Line(a), Node::Line(b)) = (l, j) {
                    out.insert((a, b));
                }
            }
        }
    }
    out
}

/// Reaching definitions by search: the definition of `v` at `l` reaches `j`
/// along a path with no other definition of `v` in between.
fn data_oracle(succs: &Succs, stmts: &[Node], p: &Program) -> BTreeSet<(u32, u32, String)> {
    let defines = |n: Node, v: &str| matches!(n, Node::Line(x) if p.defs[&x].contains(v));
    let mut out = BTreeSet::new();
    for &l in stmts {
        let Node::Line(ll) = l else { continue };
        for v in &p.defs[&ll] {
            let mut seen = BTreeSet::new();
            let mut queue: VecDeque<Node> = succs[&l].iter().copied().collect();
            while let Some(n) = queue.pop_front() {
                if !seen.insert(n) {
                    continue;
                }
                if let Node::Line(x) = n {
                    if x != ll && p.uses[&x].contains(v) {
                        out.insert((ll, x, v.clone()));
                    }
                }
                if !defines(n, v) {
                    queue.extend(succs.get(&n).into_iter().flatten().copied());
                }
            }
        }
    }
    out
}

fn check_one(seed: u64) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = Program::default();
    p.emit(0, "void f()".into());
    p.emit(0, "{".into());
    let mut budget = rng.gen_range(1..=6);
    let items = block(&mut p, &mut rng, 1, &mut budget, false, false);
    p.emit(0, "}".into());
    let source = p.lines.join("\n");

    let mut succs = Succs::new();
    let first = wire(&items, Node::Exit, None, &mut succs);
    succs.entry(Node::Entry).or_default().insert(first);
    let stmts: Vec<Node> = succs.keys().copied().filter(|n| matches!(n, Node::Line(_))).collect();
    if stmts.len() + 2 > 8 {
        return Err(format!("seed {seed}: generator produced {} nodes", stmts.len() + 2));
    }

    let mut program = ProgramModel::new();
    program.add_source(&source, "gen.c").map_err(|e| format!("seed {seed}: {e}\n{source}"))?;
    let f = &program.functions[0];
    let line_of = |id| f.statement(id).map(|s| s.first_line).expect("statement");
    let cfg = build_cfg(f);
    let node_of = |k: usize| match cfg.nodes[k] {
        CfgNode::Entry => Node::Entry,
        CfgNode::Exit => Node::Exit,
        CfgNode::Stmt(id) => Node::Line(line_of(id)),
    };
    let mut lib_succs = Succs::new();
    for (a, b) in cfg.edges() {
        lib_succs.entry(node_of(a)).or_default().insert(node_of(b));
    }
    if lib_succs != succs {
        return Err(format!("seed {seed}: cfg differs\n{source}\nexpected {succs:?}\nbuilt {lib_succs:?}"));
    }
    for s in &f.body {
        let du = def_use(f, s);
        if du.defs != p.defs[&s.first_line] || du.uses != p.uses[&s.first_line] {
            return Err(format!("seed {seed}: def/use of line {} differ: {du:?}", s.first_line));
        }
    }

    let (pdg, _) = build_pdg(f);
    let control: BTreeSet<(u32, u32)> =
        pdg.edges.iter().filter(|e| e.kind == EdgeKind::Control).map(|e| (line_of(e.src), line_of(e.dst))).collect();
    let data: BTreeSet<(u32, u32, String)> = pdg
        .edges
        .iter()
        .filter(|e| e.kind == EdgeKind::Data)
        .map(|e| (line_of(e.src), line_of(e.dst), e.variable.clone().unwrap_or_default()))
        .collect();
    let want_control = control_oracle(&succs, &stmts);
    let want_data = data_oracle(&succs, &stmts, &p);
    if control != want_control {
        return Err(format!("seed {seed}: control edges {control:?}, oracle {want_control:?}\n{source}"));
    }
    if data != want_data {
        return Err(format!("seed {seed}: data edges {data:?}, oracle {want_data:?}\n{source}"));
    }
    Ok(control.len() + data.len())
}

pub fn run() -> Outcome {
    let start = Instant::now();
    let mut edges = 0;
    for seed in 0..300 {
        edges += check_one(seed)?;
    }
    within(Duration::from_secs(60), start.elapsed())?;
    Ok(format!("300 graphs, {edges} edges, 0 discrepancies"))
}
