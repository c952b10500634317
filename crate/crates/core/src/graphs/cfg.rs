use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::frontend::{Control, FunctionDecl, StmtId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CfgNode {
    Entry,
    Exit,
    Stmt(StmtId),
}

/// Control flow graph over statement nodes. Index 0 is entry, index 1 is
/// exit; statement nodes follow in statement-id order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cfg {
    pub nodes: Vec<CfgNode>,
    pub succs: Vec<Vec<usize>>,
    pub preds: Vec<Vec<usize>>,
    /// Innermost `if`/loop predicate enclosing each node.
    pub enclosing: Vec<Option<usize>>,
}

impl Cfg {
    pub const ENTRY: usize = 0;
    pub const EXIT: usize = 1;

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, id: StmtId) -> Option<usize> {
        self.nodes.iter().position(|n| *n == CfgNode::Stmt(id))
    }

    pub fn stmt(&self, index: usize) -> Option<StmtId> {
        match self.nodes[index] {
            CfgNode::Stmt(id) => Some(id),
            _ => None,
        }
    }

    pub fn statements(&self) -> impl Iterator<Item = StmtId> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            CfgNode::Stmt(id) => Some(*id),
            _ => None,
        })
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.succs.iter().enumerate().flat_map(|(a, s)| s.iter().map(move |b| (a, *b))).collect()
    }

    /// Nodes from which `exit` is reachable.
    pub fn reaches_exit(&self) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![Self::EXIT];
        seen[Self::EXIT] = true;
        while let Some(n) = stack.pop() {
            for &p in &self.preds[n] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }
}

struct LoopCtx {
    continue_to: usize,
    breaks: Vec<usize>,
}

struct Builder {
    index: BTreeMap<StmtId, usize>,
    edges: Vec<(usize, usize)>,
    enclosing: BTreeMap<usize, Option<usize>>,
    loops: Vec<LoopCtx>,
    predicate: Vec<usize>,
}

impl Builder {
    fn node(&mut self, id: StmtId) -> usize {
        let n = self.index[&id];
        self.enclosing.insert(n, self.predicate.last().copied());
        n
    }

    fn link(&mut self, from: &[usize], to: usize) {
        for &f in from {
            if !self.edges.contains(&(f, to)) {
                self.edges.push((f, to));
            }
        }
    }

    fn seq(&mut self, items: &[Control], mut live: Vec<usize>) -> Vec<usize> {
        for item in items {
            live = self.stmt(item, live);
        }
        live
    }

    fn stmt(&mut self, c: &Control, live: Vec<usize>) -> Vec<usize> {
        match c {
            Control::Simple(id) => {
                let n = self.node(*id);
                self.link(&live, n);
                vec![n]
            }
            Control::Return(id) => {
                let n = self.node(*id);
                self.link(&live, n);
                self.link(&[n], Cfg::EXIT);
                Vec::new()
            }
            Control::Break(id) => {
                let n = self.node(*id);
                self.link(&live, n);
                if let Some(l) = self.loops.last_mut() {
                    l.breaks.push(n);
                }
                Vec::new()
            }
            Control::Continue(id) => {
                let n = self.node(*id);
                self.link(&live, n);
                if let Some(target) = self.loops.last().map(|l| l.continue_to) {
                    self.link(&[n], target);
                }
                Vec::new()
            }
            Control::Block(items) => self.seq(items, live),
            Control::If { cond, then_branch, else_branch } => {
                let p = self.node(*cond);
                self.link(&live, p);
                self.predicate.push(p);
                let mut out = self.seq(then_branch, vec![p]);
                match else_branch {
                    Some(e) => out.extend(self.seq(e, vec![p])),
                    None => out.push(p),
                }
                self.predicate.pop();
                out.sort_unstable();
                out.dedup();
                out
            }
            Control::While { cond, body } => {
                let p = self.node(*cond);
                self.link(&live, p);
                self.predicate.push(p);
                self.loops.push(LoopCtx { continue_to: p, breaks: Vec::new() });
                let tail = self.seq(body, vec![p]);
                self.link(&tail, p);
                let ctx = self.loops.pop().unwrap();
                self.predicate.pop();
                let mut out = vec![p];
                out.extend(ctx.breaks);
                out
            }
            Control::For { init, cond, step, body } => {
                let mut live = live;
                if let Some(init) = init {
                    let n = self.node(*init);
                    self.link(&live, n);
                    live = vec![n];
                }
                let p = self.node(*cond);
                self.link(&live, p);
                self.predicate.push(p);
                let step_node = step.map(|s| self.node(s));
                self.loops.push(LoopCtx { continue_to: step_node.unwrap_or(p), breaks: Vec::new() });
                let tail = self.seq(body, vec![p]);
                match step_node {
                    Some(s) => {
                        self.link(&tail, s);
                        self.link(&[s], p);
                    }
                    None => self.link(&tail, p),
                }
                let ctx = self.loops.pop().unwrap();
                self.predicate.pop();
                let mut out = vec![p];
                out.extend(ctx.breaks);
                out
            }
        }
    }
}

/// Builds the CFG of `function`. Parameter statements come first in a
/// straight line after entry. Statements unreachable from entry are pruned.
pub fn build_cfg(function: &FunctionDecl) -> Cfg {
    let mut index = BTreeMap::new();
    for (k, s) in function.body.iter().enumerate() {
        index.insert(s.id, k + 2);
    }
    let mut b = Builder {
        index,
        edges: Vec::new(),
        enclosing: BTreeMap::new(),
        loops: Vec::new(),
        predicate: Vec::new(),
    };
    let mut live = vec![Cfg::ENTRY];
    for p in &function.params {
        live = b.stmt(&Control::Simple(p.statement), live);
    }
    let live = b.seq(&function.control, live);
    b.link(&live, Cfg::EXIT);

    // Prune statements unreachable from entry.
    let total = function.body.len() + 2;
    let mut succ_all = vec![Vec::new(); total];
    for &(a, c) in &b.edges {
        succ_all[a].push(c);
    }
    let mut reach = vec![false; total];
    reach[Cfg::ENTRY] = true;
    reach[Cfg::EXIT] = true;
    let mut stack = vec![Cfg::ENTRY];
    while let Some(n) = stack.pop() {
        for &s in &succ_all[n] {
            if !reach[s] {
                reach[s] = true;
                stack.push(s);
            }
        }
    }

    let mut remap = vec![usize::MAX; total];
    let mut nodes = Vec::new();
    for old in 0..total {
        if reach[old] {
            remap[old] = nodes.len();
            nodes.push(match old {
                0 => CfgNode::Entry,
                1 => CfgNode::Exit,
                k => CfgNode::Stmt(function.body[k - 2].id),
            });
        }
    }
    let mut succs = vec![Vec::new(); nodes.len()];
    let mut preds = vec![Vec::new(); nodes.len()];
    for &(a, c) in &b.edges {
        if reach[a] && reach[c] {
            succs[remap[a]].push(remap[c]);
            preds[remap[c]].push(remap[a]);
        }
    }
    for list in succs.iter_mut().chain(preds.iter_mut()) {
        list.sort_unstable();
    }
    let mut enclosing = vec![None; nodes.len()];
    for (old, encl) in b.enclosing {
        if reach[old] {
            // The enclosing predicate precedes its body, so it is reachable too.
            enclosing[remap[old]] = encl.map(|e| remap[e]);
        }
    }
    Cfg { nodes, succs, preds, enclosing }
}
