//! Control flow graphs, post-dominators, data/control dependences, program
//! dependence graphs and the call graph.

mod cfg;
mod defuse;
mod deps;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use cfg::{build_cfg, Cfg, CfgNode};
pub use defuse::{def_use, CallSite, DefUse};
pub use deps::{control_dependences, data_dependences, post_dominates, post_dominators};

use crate::frontend::{Diagnostic, FunctionDecl, FunctionId, ProgramModel, StmtId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeKind {
    Data,
    Control,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DependenceEdge {
    pub src: StmtId,
    pub dst: StmtId,
    pub kind: EdgeKind,
    pub variable: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pdg {
    pub function: FunctionId,
    /// Statement nodes of the CFG in statement order.
    pub nodes: Vec<StmtId>,
    pub edges: Vec<DependenceEdge>,
}

impl Pdg {
    pub fn contains(&self, id: StmtId) -> bool {
        self.nodes.binary_search(&id).is_ok()
    }

    pub fn incoming(&self, id: StmtId) -> impl Iterator<Item = &DependenceEdge> + '_ {
        self.edges.iter().filter(move |e| e.dst == id)
    }

    pub fn outgoing(&self, id: StmtId) -> impl Iterator<Item = &DependenceEdge> + '_ {
        self.edges.iter().filter(move |e| e.src == id)
    }

    pub fn data_edges(&self) -> impl Iterator<Item = &DependenceEdge> + '_ {
        self.edges.iter().filter(|e| e.kind == EdgeKind::Data)
    }

    pub fn control_edges(&self) -> impl Iterator<Item = &DependenceEdge> + '_ {
        self.edges.iter().filter(|e| e.kind == EdgeKind::Control)
    }
}

/// Data dependence edges of `function` over `cfg`.
pub fn compute_data_deps(cfg: &Cfg, function: &FunctionDecl) -> Vec<DependenceEdge> {
    let mut defs = vec![Default::default(); cfg.len()];
    let mut uses = vec![Default::default(); cfg.len()];
    for (k, node) in cfg.nodes.iter().enumerate() {
        if let CfgNode::Stmt(id) = node {
            let du = def_use(function, function.statement(*id).expect("cfg node without statement"));
            defs[k] = du.defs;
            uses[k] = du.uses;
        }
    }
    data_dependences(cfg, &defs, &uses)
        .into_iter()
        .filter_map(|(a, b, v)| {
            Some(DependenceEdge { src: cfg.stmt(a)?, dst: cfg.stmt(b)?, kind: EdgeKind::Data, variable: Some(v) })
        })
        .collect()
}

/// Control dependence edges over `cfg`, and the statements that cannot reach
/// exit (attached to their enclosing predicate).
pub fn compute_control_deps(cfg: &Cfg) -> (Vec<DependenceEdge>, Vec<StmtId>) {
    let (pairs, stuck) = control_dependences(cfg);
    let edges = pairs
        .into_iter()
        .filter_map(|(a, b)| {
            Some(DependenceEdge { src: cfg.stmt(a)?, dst: cfg.stmt(b)?, kind: EdgeKind::Control, variable: None })
        })
        .collect();
    (edges, stuck.into_iter().filter_map(|k| cfg.stmt(k)).collect())
}

/// PDG of one function plus diagnostics for statements that cannot reach exit.
pub fn build_pdg(function: &FunctionDecl) -> (Pdg, Vec<Diagnostic>) {
    let cfg = build_cfg(function);
    let mut edges = compute_data_deps(&cfg, function);
    let (control, stuck) = compute_control_deps(&cfg);
    edges.extend(control);
    edges.sort();
    let mut nodes: Vec<StmtId> = cfg.statements().collect();
    nodes.sort();
    let diagnostics = stuck
        .into_iter()
        .map(|id| Diagnostic {
            file: function.file.clone(),
            line: function.statement(id).map(|s| s.first_line).unwrap_or(0),
            message: format!("statement {id} in '{}' cannot reach function exit", function.name),
        })
        .collect();
    (Pdg { function: function.id, nodes, edges }, diagnostics)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallEdge {
    pub caller: FunctionId,
    pub callee: FunctionId,
    pub site: StmtId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnresolvedCall {
    pub caller: FunctionId,
    pub site: StmtId,
    pub name: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallGraph {
    pub edges: Vec<CallEdge>,
    pub unresolved: Vec<UnresolvedCall>,
}

impl CallGraph {
    pub fn callers_of(&self, f: FunctionId) -> impl Iterator<Item = &CallEdge> + '_ {
        self.edges.iter().filter(move |e| e.callee == f)
    }

    pub fn callees_of(&self, f: FunctionId) -> impl Iterator<Item = &CallEdge> + '_ {
        self.edges.iter().filter(move |e| e.caller == f)
    }
}

/// One edge per call expression whose callee names a function in `program`.
pub fn build_call_graph(program: &ProgramModel) -> CallGraph {
    let mut graph = CallGraph::default();
    for f in &program.functions {
        for s in &f.body {
            for call in def_use(f, s).calls {
                let Some(name) = call.callee else { continue };
                match program.function_by_name(&name) {
                    Some(g) => graph.edges.push(CallEdge { caller: f.id, callee: g.id, site: s.id }),
                    None => graph.unresolved.push(UnresolvedCall { caller: f.id, site: s.id, name }),
                }
            }
        }
    }
    graph
}

/// Everything the slicer needs, built once per program.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramGraphs {
    /// Indexed by function id.
    pub pdgs: Vec<Pdg>,
    pub call_graph: CallGraph,
    pub def_use: BTreeMap<StmtId, DefUse>,
    pub diagnostics: Vec<Diagnostic>,
}

impl ProgramGraphs {
    pub fn build(program: &ProgramModel) -> Self {
        let mut pdgs = Vec::new();
        let mut diagnostics = Vec::new();
        let mut du = BTreeMap::new();
        for f in &program.functions {
            let (pdg, diags) = build_pdg(f);
            pdgs.push(pdg);
            diagnostics.extend(diags);
            for s in &f.body {
                du.insert(s.id, def_use(f, s));
            }
        }
        Self { pdgs, call_graph: build_call_graph(program), def_use: du, diagnostics }
    }

    pub fn pdg(&self, f: FunctionId) -> &Pdg {
        &self.pdgs[f.0 as usize]
    }
}

/// Trivial Graph Format export of the given PDGs: `id label` node lines, a
/// `#` separator, then `src dst kind[:variable]` edge lines.
pub fn to_tgf(program: &ProgramModel, pdgs: &[Pdg]) -> String {
    let mut out = String::new();
    for pdg in pdgs {
        let f = program.function(pdg.function);
        for id in &pdg.nodes {
            let s = f.statement(*id).expect("pdg node without statement");
            let _ = writeln!(out, "{} {}:{}:{} {}", id.0, f.file, f.name, s.first_line, s.text());
        }
    }
    out.push_str("#\n");
    for pdg in pdgs {
        for e in &pdg.edges {
            match (&e.kind, &e.variable) {
                (EdgeKind::Data, Some(v)) => {
                    let _ = writeln!(out, "{} {} data:{}", e.src.0, e.dst.0, v);
                }
                _ => {
                    let _ = writeln!(out, "{} {} control", e.src.0, e.dst.0);
                }
            }
        }
    }
    out
}
