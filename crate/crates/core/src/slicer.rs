//! Program slices and semantics-based vulnerability candidates.
//!
//! The forward slice follows data edges only; the backward slice follows data
//! and control edges. Slices cross function boundaries in three ways:
//!
//! - forward into a callee, entering at the parameter bound to an argument
//!   that carries a sliced value;
//! - backward into a callee through its `return` statements;
//! - backward into callers, from a reached parameter to the definitions of
//!   the matching argument at every call site, plus the predicates those call
//!   sites depend on.
//!
//! Functions are ordered so that callers come before callees; statements
//! within a function keep their source order.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend::{FunctionId, ProgramModel, StatementKind, StmtId, TokenSpan};
use crate::graphs::{EdgeKind, Pdg, ProgramGraphs};
use crate::syvc::{Syvc, SyvcKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SliceError {
    #[error("statement {0} is not a node of its function's dependence graph")]
    AnchorNotInPdg(StmtId),
    #[error("statement {0} does not belong to any function")]
    UnknownStatement(StmtId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    Backward,
    Anchor,
    Forward,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelSlot {
    #[default]
    Unset,
    Clean,
    Vulnerable,
    NeedsReview,
}

impl LabelSlot {
    /// Numeric label, treating needs-review as vulnerable.
    pub fn as_label(self) -> Option<u8> {
        match self {
            LabelSlot::Unset => None,
            LabelSlot::Clean => Some(0),
            LabelSlot::Vulnerable | LabelSlot::NeedsReview => Some(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramSlice {
    pub syvc: u32,
    pub anchor: StmtId,
    /// Ordered like the assembled candidate.
    pub forward: Vec<StmtId>,
    pub backward: Vec<StmtId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SevcStatement {
    pub file: String,
    pub function: String,
    pub statement: StmtId,
    pub line: u32,
    pub last_line: u32,
    pub text: String,
    pub region: Region,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sevc {
    pub syvc: u32,
    pub kind: SyvcKind,
    /// Program the candidate was extracted from (used for splitting).
    pub program: String,
    pub anchor: StmtId,
    /// Token range of the syntax candidate inside the anchor statement.
    pub anchor_span: TokenSpan,
    pub statements: Vec<SevcStatement>,
    pub label: LabelSlot,
}

impl Sevc {
    pub fn anchor_index(&self) -> usize {
        self.statements.iter().position(|s| s.region == Region::Anchor).expect("candidate without anchor")
    }
}

fn closure(pdg: &Pdg, start: StmtId, forward: bool, kinds: &[EdgeKind]) -> Result<Vec<StmtId>, SliceError> {
    if !pdg.contains(start) {
        return Err(SliceError::AnchorNotInPdg(start));
    }
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(n) = stack.pop() {
        for e in &pdg.edges {
            if !kinds.contains(&e.kind) {
                continue;
            }
            let next = match forward {
                true if e.src == n => e.dst,
                false if e.dst == n => e.src,
                _ => continue,
            };
            if seen.insert(next) {
                stack.push(next);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// Statements reachable from `anchor` over data edges, in source order.
pub fn forward_slice(pdg: &Pdg, anchor: StmtId) -> Result<Vec<StmtId>, SliceError> {
    closure(pdg, anchor, true, &[EdgeKind::Data])
}

/// Statements reaching `anchor` over data or control edges, in source order.
pub fn backward_slice(pdg: &Pdg, anchor: StmtId) -> Result<Vec<StmtId>, SliceError> {
    closure(pdg, anchor, false, &[EdgeKind::Data, EdgeKind::Control])
}

/// Read-only lookup tables shared by all slices of one program.
pub struct SliceContext<'a> {
    program: &'a ProgramModel,
    graphs: &'a ProgramGraphs,
    owner: BTreeMap<StmtId, FunctionId>,
    by_name: BTreeMap<&'a str, FunctionId>,
    returns: BTreeMap<FunctionId, Vec<StmtId>>,
    incoming: BTreeMap<StmtId, Vec<(StmtId, EdgeKind, Option<&'a str>)>>,
    outgoing: BTreeMap<StmtId, Vec<(StmtId, &'a str)>>,
}

impl<'a> SliceContext<'a> {
    pub fn new(program: &'a ProgramModel, graphs: &'a ProgramGraphs) -> Self {
        let mut by_name = BTreeMap::new();
        for f in &program.functions {
            by_name.entry(f.name.as_str()).or_insert(f.id);
        }
        let mut returns: BTreeMap<FunctionId, Vec<StmtId>> = BTreeMap::new();
        for f in &program.functions {
            let pdg = graphs.pdg(f.id);
            for s in &f.body {
                let with_value = s.kind == StatementKind::Return && f.ast.node(s.node).children.len() == 3;
                if with_value && pdg.contains(s.id) {
                    returns.entry(f.id).or_default().push(s.id);
                }
            }
        }
        let mut incoming: BTreeMap<StmtId, Vec<_>> = BTreeMap::new();
        let mut outgoing: BTreeMap<StmtId, Vec<_>> = BTreeMap::new();
        for pdg in &graphs.pdgs {
            for e in &pdg.edges {
                incoming.entry(e.dst).or_default().push((e.src, e.kind, e.variable.as_deref()));
                if let (EdgeKind::Data, Some(v)) = (e.kind, e.variable.as_deref()) {
                    outgoing.entry(e.src).or_default().push((e.dst, v));
                }
            }
        }
        Self { program, graphs, owner: program.statement_index(), by_name, returns, incoming, outgoing }
    }

    fn owner(&self, id: StmtId) -> Result<FunctionId, SliceError> {
        self.owner.get(&id).copied().ok_or(SliceError::UnknownStatement(id))
    }

    fn resolve(&self, name: Option<&str>) -> Option<FunctionId> {
        self.by_name.get(name?).copied()
    }

    fn param_statement(&self, f: FunctionId, i: usize) -> Option<StmtId> {
        let id = self.program.function(f).params.get(i)?.statement;
        self.graphs.pdg(f).contains(id).then_some(id)
    }

    fn param_index(&self, f: FunctionId, id: StmtId) -> Option<usize> {
        self.program.function(f).params.iter().position(|p| p.statement == id)
    }

    fn interprocedural_forward(&self, anchor: StmtId) -> BTreeSet<StmtId> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![anchor];
        while let Some(n) = stack.pop() {
            if !seen.insert(n) {
                continue;
            }
            for &(dst, var) in self.outgoing.get(&n).into_iter().flatten() {
                stack.push(dst);
                for call in &self.graphs.def_use[&dst].calls {
                    let Some(g) = self.resolve(call.callee.as_deref()) else { continue };
                    for (i, vars) in call.args.iter().enumerate() {
                        if vars.contains(var) {
                            stack.extend(self.param_statement(g, i));
                        }
                    }
                }
            }
        }
        seen
    }

    fn interprocedural_backward(&self, anchor: StmtId) -> Result<BTreeSet<StmtId>, SliceError> {
        let mut seen = BTreeSet::new();
        let mut out = BTreeSet::new();
        let mut lifted = BTreeSet::new();
        let mut stack = vec![(anchor, true)];
        while let Some((n, up)) = stack.pop() {
            if !seen.insert((n, up)) {
                continue;
            }
            out.insert(n);
            let f = self.owner(n)?;
            for &(src, _, _) in self.incoming.get(&n).into_iter().flatten() {
                stack.push((src, up));
            }
            for call in &self.graphs.def_use[&n].calls {
                if let Some(g) = self.resolve(call.callee.as_deref()) {
                    for &r in self.returns.get(&g).into_iter().flatten() {
                        stack.push((r, false));
                    }
                }
            }
            if !up {
                continue;
            }
            let name = self.program.function(f).name.as_str();
            let sites: BTreeSet<StmtId> = self.graphs.call_graph.callers_of(f).map(|e| e.site).collect();
            if lifted.insert(f) {
                for site in &sites {
                    for &(src, kind, _) in self.incoming.get(site).into_iter().flatten() {
                        if kind == EdgeKind::Control {
                            stack.push((src, true));
                        }
                    }
                }
            }
            let Some(i) = self.param_index(f, n) else { continue };
            for site in &sites {
                for call in &self.graphs.def_use[site].calls {
                    if call.callee.as_deref() != Some(name) {
                        continue;
                    }
                    let Some(vars) = call.args.get(i) else { continue };
                    for &(src, kind, var) in self.incoming.get(site).into_iter().flatten() {
                        if kind == EdgeKind::Data && var.is_some_and(|v| vars.contains(v)) {
                            stack.push((src, true));
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Functions of `members` ordered callers-first, callees depth-first in
    /// call-site order.
    fn function_order(&self, members: &BTreeSet<FunctionId>) -> Vec<FunctionId> {
        let children = |f: FunctionId| -> Vec<FunctionId> {
            let mut sites: Vec<_> = self
                .graphs
                .call_graph
                .callees_of(f)
                .filter(|e| members.contains(&e.callee))
                .map(|e| (e.site, e.callee))
                .collect();
            sites.sort();
            let mut out = Vec::new();
            for (_, c) in sites {
                if !out.contains(&c) {
                    out.push(c);
                }
            }
            out
        };
        let has_caller = |f: FunctionId| {
            self.graphs.call_graph.callers_of(f).any(|e| members.contains(&e.caller) && e.caller != f)
        };
        let mut roots: Vec<FunctionId> = members.iter().copied().filter(|f| !has_caller(*f)).collect();
        roots.extend(members.iter().copied().filter(|f| has_caller(*f)));

        let mut visited = BTreeSet::new();
        let mut post = Vec::new();
        for &r in roots.iter().rev() {
            if visited.contains(&r) {
                continue;
            }
            visited.insert(r);
            let mut stack = vec![(r, children(r).into_iter().rev().collect::<Vec<_>>())];
            while let Some((node, pending)) = stack.last_mut() {
                match pending.pop() {
                    Some(c) if !visited.contains(&c) => {
                        visited.insert(c);
                        let kids = children(c).into_iter().rev().collect();
                        stack.push((c, kids));
                    }
                    Some(_) => {}
                    None => {
                        post.push(*node);
                        stack.pop();
                    }
                }
            }
        }
        // Reverse post-order of a traversal that visits later roots and
        // later call sites first.
        post.reverse();
        post
    }

    fn ordered(&self, set: &BTreeSet<StmtId>, order: &[FunctionId]) -> Result<Vec<StmtId>, SliceError> {
        let rank: BTreeMap<FunctionId, usize> = order.iter().enumerate().map(|(i, f)| (*f, i)).collect();
        let mut keyed = Vec::with_capacity(set.len());
        for &s in set {
            keyed.push((rank[&self.owner(s)?], s));
        }
        keyed.sort();
        Ok(keyed.into_iter().map(|(_, s)| s).collect())
    }

    /// Interprocedural forward and backward slices of the statement holding `syvc`.
    pub fn slice(&self, syvc: &Syvc) -> Result<ProgramSlice, SliceError> {
        let anchor = syvc.statement;
        let f = self.owner(anchor)?;
        if !self.graphs.pdg(f).contains(anchor) {
            return Err(SliceError::AnchorNotInPdg(anchor));
        }
        let forward = self.interprocedural_forward(anchor);
        let backward = self.interprocedural_backward(anchor)?;
        let members: BTreeSet<FunctionId> =
            forward.iter().chain(&backward).map(|s| self.owner[s]).collect();
        let order = self.function_order(&members);
        Ok(ProgramSlice {
            syvc: syvc.id,
            anchor,
            forward: self.ordered(&forward, &order)?,
            backward: self.ordered(&backward, &order)?,
        })
    }

    /// Merges both slices into an ordered, tagged candidate.
    pub fn assemble(&self, syvc: &Syvc, slice: &ProgramSlice) -> Result<Sevc, SliceError> {
        let all: BTreeSet<StmtId> = slice.forward.iter().chain(&slice.backward).copied().collect();
        let members: BTreeSet<FunctionId> = all.iter().map(|s| self.owner(*s)).collect::<Result<_, _>>()?;
        let order = self.function_order(&members);
        let backward: BTreeSet<StmtId> = slice.backward.iter().copied().collect();
        let mut statements = Vec::with_capacity(all.len());
        for id in self.ordered(&all, &order)? {
            let (f, s) = self.program.statement(id).ok_or(SliceError::UnknownStatement(id))?;
            let region = if id == slice.anchor {
                Region::Anchor
            } else if backward.contains(&id) {
                Region::Backward
            } else {
                Region::Forward
            };
            statements.push(SevcStatement {
                file: f.file.clone(),
                function: f.name.clone(),
                statement: id,
                line: s.first_line,
                last_line: s.last_line,
                text: s.text(),
                region,
            });
        }
        let (_, anchor_stmt) =
            self.program.statement(slice.anchor).ok_or(SliceError::UnknownStatement(slice.anchor))?;
        let offset = anchor_stmt.span.start;
        let anchor_span = TokenSpan { start: syvc.span.start - offset, end: syvc.span.end - offset };
        Ok(Sevc {
            syvc: syvc.id,
            kind: syvc.kind,
            program: self.program.function(self.owner(slice.anchor)?).file.clone(),
            anchor: slice.anchor,
            anchor_span,
            statements,
            label: LabelSlot::Unset,
        })
    }
}

/// Slices and assembles every candidate. Candidates whose anchor was pruned
/// as unreachable are reported as errors alongside the successes.
pub fn build_sevcs(
    program: &ProgramModel,
    graphs: &ProgramGraphs,
    syvcs: &[Syvc],
) -> (Vec<Sevc>, Vec<(u32, SliceError)>) {
    let ctx = SliceContext::new(program, graphs);
    let mut out = Vec::new();
    let mut errors = Vec::new();
    for s in syvcs {
        match ctx.slice(s).and_then(|slice| ctx.assemble(s, &slice)) {
            Ok(sevc) => out.push(sevc),
            Err(e) => errors.push((s.id, e)),
        }
    }
    (out, errors)
}
