//! Per-statement variable definitions, uses and call sites, read off the AST.
//!
//! There is no alias analysis: writing through `*p`, `p[i]`, `p->f` or `s.f`
//! counts as defining the base variable, and passing `&v` to a call counts as
//! defining `v`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::frontend::{Ast, FunctionDecl, NodeId, NodeKind, Statement};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallSite {
    /// Callee name when the callee expression is a plain identifier.
    pub callee: Option<String>,
    /// Variables used in each argument, positionally.
    pub args: Vec<BTreeSet<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefUse {
    pub defs: BTreeSet<String>,
    pub uses: BTreeSet<String>,
    pub calls: Vec<CallSite>,
}

struct Walker<'a> {
    function: &'a FunctionDecl,
    ast: &'a Ast,
    out: DefUse,
}

impl<'a> Walker<'a> {
    fn text(&self, id: NodeId) -> &'a str {
        &self.function.tokens[self.ast.node(id).span.start as usize].text
    }

    fn kind(&self, id: NodeId) -> NodeKind {
        self.ast.node(id).kind
    }

    fn child(&self, id: NodeId, k: usize) -> NodeId {
        self.ast.node(id).children[k]
    }

    fn is_op(&self, id: NodeId, ops: &[&str]) -> bool {
        let n = self.ast.node(id);
        n.kind == NodeKind::Operator && ops.contains(&self.text(id))
    }

    /// Variable occurrences in a subtree, skipping types, field names and
    /// direct callee names.
    fn vars(&self, id: NodeId, into: &mut BTreeSet<String>) {
        let n = self.ast.node(id);
        match n.kind {
            NodeKind::Identifier => {
                into.insert(self.text(id).to_string());
            }
            NodeKind::Type | NodeKind::ReturnType | NodeKind::Field => {}
            NodeKind::Callee => {
                let inner = n.children[0];
                if self.kind(inner) != NodeKind::Identifier {
                    self.vars(inner, into);
                }
            }
            _ => {
                for &c in &n.children {
                    self.vars(c, into);
                }
            }
        }
    }

    fn base(&self, id: NodeId) -> Option<String> {
        let n = self.ast.node(id);
        match n.kind {
            NodeKind::Identifier => Some(self.text(id).to_string()),
            NodeKind::ParenExpr => self.base(n.children[1]),
            NodeKind::UnaryExpr => self.base(n.children[1]),
            NodeKind::PostfixExpr | NodeKind::ArrayIndexing | NodeKind::MemberAccess | NodeKind::BinaryExpr => {
                self.base(n.children[0])
            }
            NodeKind::CastExpression => self.base(n.children[3]),
            _ => None,
        }
    }

    fn define(&mut self, target: NodeId) {
        if let Some(b) = self.base(target) {
            self.out.defs.insert(b);
        }
    }

    fn use_all(&mut self, id: NodeId) {
        let mut vs = BTreeSet::new();
        self.vars(id, &mut vs);
        self.out.uses.extend(vs);
    }

    fn expr(&mut self, id: NodeId) {
        let n = self.ast.node(id);
        match n.kind {
            NodeKind::Identifier => {
                self.out.uses.insert(self.text(id).to_string());
            }
            NodeKind::Type | NodeKind::ReturnType | NodeKind::Field => {}
            NodeKind::AssignmentExpr => {
                let (lhs, op, rhs) = (n.children[0], n.children[1], n.children[2]);
                self.define(lhs);
                if self.kind(lhs) != NodeKind::Identifier || !self.text(op).eq("=") {
                    self.use_all(lhs);
                }
                self.expr_lhs_inner(lhs);
                self.expr(rhs);
            }
            NodeKind::UnaryExpr if self.is_op(n.children[0], &["++", "--"]) => {
                self.define(n.children[1]);
                self.use_all(n.children[1]);
                self.expr_lhs_inner(n.children[1]);
            }
            NodeKind::PostfixExpr => {
                self.define(n.children[0]);
                self.use_all(n.children[0]);
                self.expr_lhs_inner(n.children[0]);
            }
            NodeKind::CallExpression => {
                let callee_node = n.children[0];
                let inner = self.child(callee_node, 0);
                let callee = (self.kind(inner) == NodeKind::Identifier).then(|| self.text(inner).to_string());
                if callee.is_none() {
                    self.expr(inner);
                }
                let mut site = CallSite { callee, args: Vec::new() };
                let list = n.children[1];
                for &a in &self.ast.node(list).children {
                    if self.kind(a) != NodeKind::Argument {
                        continue;
                    }
                    let e = self.child(a, 0);
                    let mut vs = BTreeSet::new();
                    self.vars(e, &mut vs);
                    site.args.push(vs);
                    let en = self.ast.node(e);
                    if en.kind == NodeKind::UnaryExpr && self.is_op(en.children[0], &["&"]) {
                        self.define(en.children[1]);
                    }
                }
                // Nested calls are recorded after the enclosing one.
                let args: Vec<NodeId> = self.ast.node(list).children.clone();
                self.out.calls.push(site);
                for a in args {
                    if self.kind(a) == NodeKind::Argument {
                        self.expr(self.child(a, 0));
                    }
                }
            }
            _ => {
                for &c in &n.children {
                    self.expr(c);
                }
            }
        }
    }

    /// Side effects nested inside an assignment target (`a[i++] = x`, calls).
    fn expr_lhs_inner(&mut self, id: NodeId) {
        let n = self.ast.node(id);
        match n.kind {
            NodeKind::Identifier => {}
            NodeKind::AssignmentExpr | NodeKind::CallExpression | NodeKind::PostfixExpr => self.expr(id),
            NodeKind::UnaryExpr if self.is_op(n.children[0], &["++", "--"]) => self.expr(id),
            _ => {
                for &c in &n.children {
                    self.expr_lhs_inner(c);
                }
            }
        }
    }
}

/// Definitions, uses and calls of one statement.
pub fn def_use(function: &FunctionDecl, statement: &Statement) -> DefUse {
    let ast = &function.ast;
    let mut w = Walker { function, ast, out: DefUse::default() };
    let root = ast.node(statement.node);
    match root.kind {
        NodeKind::Parameter => {
            for c in ast.children(root.id) {
                if c.kind == NodeKind::Identifier {
                    w.out.defs.insert(w.text(c.id).to_string());
                }
            }
        }
        NodeKind::IdentifierDeclStatement => {
            for c in ast.children(root.id) {
                match c.kind {
                    NodeKind::Identifier => {
                        w.out.defs.insert(w.text(c.id).to_string());
                    }
                    NodeKind::ArraySize | NodeKind::Initializer => w.expr(c.id),
                    _ => {}
                }
            }
        }
        _ => w.expr(root.id),
    }
    w.out
}
