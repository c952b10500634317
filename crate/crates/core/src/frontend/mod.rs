//! C-subset frontend: tokens, statements, functions and per-function ASTs.
//!
//! The accepted subset covers function definitions, local declarations
//! (pointer/array declarators, initializers), expression statements,
//! `if`/`else`, `while`, `for`, `return`, `break`/`continue`, nested blocks,
//! calls, unary/binary/ternary operators, casts and member access.
//! Preprocessor lines are skipped without expansion.
//!
//! AST node kinds named after the usual C code-property-graph vocabulary
//! (`IdentifierDeclStatement`, `ExpressionStatement`, `Callee`, `Condition`)
//! carry the meaning the SyVC matching rules rely on. The remaining kinds are
//! local to this crate; see [`NodeKind`].

mod lexer;
mod parser;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lexer::{is_keyword, tokenize, Token, TokenKind, KEYWORDS};
pub use parser::BUILTIN_TYPE_NAMES;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrontendError {
    #[error("lex error at line {line}: {message}")]
    Lex { line: u32, message: String },
    #[error("parse error at line {line}: {message}")]
    Parse { line: u32, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StmtId(pub u32);

impl fmt::Display for StmtId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FunctionId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

/// Half-open range of indices into a function's token stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TokenSpan {
    pub start: u32,
    pub end: u32,
}

impl TokenSpan {
    pub fn len(&self) -> usize {
        (self.end - self.start) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    pub fn contains(&self, other: &TokenSpan) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.start as usize..self.end as usize
    }
}

/// AST node kinds.
///
/// Leaves: `Identifier`, `Field` (member name after `.`/`->`), `Keyword`,
/// `Constant`, `StringLiteral`, `Operator`, `Punctuator`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    FunctionDef,
    ReturnType,
    ParameterList,
    Parameter,
    CompoundStatement,
    IdentifierDeclStatement,
    ExpressionStatement,
    IfStatement,
    WhileStatement,
    ForStatement,
    Condition,
    ReturnStatement,
    BreakStatement,
    ContinueStatement,
    EmptyStatement,
    Type,
    ArraySize,
    Initializer,
    InitializerList,
    CommaExpr,
    AssignmentExpr,
    ConditionalExpr,
    BinaryExpr,
    UnaryExpr,
    PostfixExpr,
    CastExpression,
    SizeofExpr,
    ParenExpr,
    CallExpression,
    Callee,
    ArgumentList,
    Argument,
    ArrayIndexing,
    MemberAccess,
    StringConcat,
    Identifier,
    Field,
    Keyword,
    Constant,
    StringLiteral,
    Operator,
    Punctuator,
}

impl NodeKind {
    pub fn is_leaf(self) -> bool {
        matches!(
            self,
            NodeKind::Identifier
                | NodeKind::Field
                | NodeKind::Keyword
                | NodeKind::Constant
                | NodeKind::StringLiteral
                | NodeKind::Operator
                | NodeKind::Punctuator
        )
    }

    pub fn name(self) -> &'static str {
        // Debug names match the variants; kept as a method for the dump format.
        match self {
            NodeKind::FunctionDef => "FunctionDef",
            NodeKind::ReturnType => "ReturnType",
            NodeKind::ParameterList => "ParameterList",
            NodeKind::Parameter => "Parameter",
            NodeKind::CompoundStatement => "CompoundStatement",
            NodeKind::IdentifierDeclStatement => "IdentifierDeclStatement",
            NodeKind::ExpressionStatement => "ExpressionStatement",
            NodeKind::IfStatement => "IfStatement",
            NodeKind::WhileStatement => "WhileStatement",
            NodeKind::ForStatement => "ForStatement",
            NodeKind::Condition => "Condition",
            NodeKind::ReturnStatement => "ReturnStatement",
            NodeKind::BreakStatement => "BreakStatement",
            NodeKind::ContinueStatement => "ContinueStatement",
            NodeKind::EmptyStatement => "EmptyStatement",
            NodeKind::Type => "Type",
            NodeKind::ArraySize => "ArraySize",
            NodeKind::Initializer => "Initializer",
            NodeKind::InitializerList => "InitializerList",
            NodeKind::CommaExpr => "CommaExpr",
            NodeKind::AssignmentExpr => "AssignmentExpr",
            NodeKind::ConditionalExpr => "ConditionalExpr",
            NodeKind::BinaryExpr => "BinaryExpr",
            NodeKind::UnaryExpr => "UnaryExpr",
            NodeKind::PostfixExpr => "PostfixExpr",
            NodeKind::CastExpression => "CastExpression",
            NodeKind::SizeofExpr => "SizeofExpr",
            NodeKind::ParenExpr => "ParenExpr",
            NodeKind::CallExpression => "CallExpression",
            NodeKind::Callee => "Callee",
            NodeKind::ArgumentList => "ArgumentList",
            NodeKind::Argument => "Argument",
            NodeKind::ArrayIndexing => "ArrayIndexing",
            NodeKind::MemberAccess => "MemberAccess",
            NodeKind::StringConcat => "StringConcat",
            NodeKind::Identifier => "Identifier",
            NodeKind::Field => "Field",
            NodeKind::Keyword => "Keyword",
            NodeKind::Constant => "Constant",
            NodeKind::StringLiteral => "StringLiteral",
            NodeKind::Operator => "Operator",
            NodeKind::Punctuator => "Punctuator",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AstNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub children: Vec<NodeId>,
    pub parent: Option<NodeId>,
    pub span: TokenSpan,
    /// Owning statement; `None` for the function root and for structural
    /// nodes (blocks, loop/if wrappers) that are not part of one statement.
    pub statement: Option<StmtId>,
}

/// Arena-backed AST of one function. Node 0 is the `FunctionDef` root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ast {
    pub nodes: Vec<AstNode>,
}

impl Ast {
    pub fn root(&self) -> &AstNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: NodeId) -> &AstNode {
        &self.nodes[id.0 as usize]
    }

    pub fn children(&self, id: NodeId) -> impl Iterator<Item = &AstNode> + '_ {
        self.node(id).children.iter().map(move |c| self.node(*c))
    }

    /// Pre-order traversal of the subtree rooted at `id`.
    pub fn descendants(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.node(n).children.iter().rev());
        }
        out
    }

    /// Leaves in left-to-right order.
    pub fn leaves(&self) -> Vec<NodeId> {
        self.descendants(self.root().id)
            .into_iter()
            .filter(|n| self.node(*n).children.is_empty())
            .collect()
    }

    /// Checks the structural invariants: leaves span exactly one token and
    /// every internal node's children tile its span left to right.
    pub fn check_invariants(&self) -> Result<(), String> {
        for node in &self.nodes {
            if node.children.is_empty() {
                if node.span.len() != 1 {
                    return Err(format!("leaf {:?} spans {} tokens", node.id, node.span.len()));
                }
                continue;
            }
            let mut at = node.span.start;
            for child in self.children(node.id) {
                if child.span.start != at {
                    return Err(format!("gap before child {:?} of {:?}", child.id, node.id));
                }
                if child.parent != Some(node.id) {
                    return Err(format!("bad parent link on {:?}", child.id));
                }
                at = child.span.end;
            }
            if at != node.span.end {
                return Err(format!("children of {:?} do not reach its end", node.id));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatementKind {
    Declaration,
    Expression,
    ControlPredicate,
    Return,
    Call,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statement {
    pub id: StmtId,
    pub function: FunctionId,
    pub kind: StatementKind,
    pub first_line: u32,
    pub last_line: u32,
    pub tokens: Vec<Token>,
    /// Position of `tokens` inside the owning function's token stream.
    pub span: TokenSpan,
    /// Root AST node of the statement.
    pub node: NodeId,
}

impl Statement {
    /// Tokens joined by single spaces.
    pub fn text(&self) -> String {
        join_tokens(&self.tokens)
    }
}

pub fn join_tokens(tokens: &[Token]) -> String {
    tokens.iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join(" ")
}

/// Control structure of a function body, referencing statements by id.
/// `for` loops keep their parts; the CFG builder desugars them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Control {
    Simple(StmtId),
    Return(StmtId),
    Break(StmtId),
    Continue(StmtId),
    Block(Vec<Control>),
    If { cond: StmtId, then_branch: Vec<Control>, else_branch: Option<Vec<Control>> },
    While { cond: StmtId, body: Vec<Control> },
    For { init: Option<StmtId>, cond: StmtId, step: Option<StmtId>, body: Vec<Control> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parameter {
    pub name: Option<String>,
    pub statement: StmtId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionDecl {
    pub id: FunctionId,
    pub name: String,
    pub file: String,
    pub params: Vec<Parameter>,
    /// Parameter statements first, then body statements in source order.
    pub body: Vec<Statement>,
    pub control: Vec<Control>,
    /// Every token from the return type through the closing brace.
    pub tokens: Vec<Token>,
    pub ast: Ast,
}

impl FunctionDecl {
    pub fn statement(&self, id: StmtId) -> Option<&Statement> {
        self.body.iter().find(|s| s.id == id)
    }

    pub fn param_names(&self) -> Vec<Option<&str>> {
        self.params.iter().map(|p| p.name.as_deref()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub file: String,
    pub line: u32,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramModel {
    pub functions: Vec<FunctionDecl>,
    pub files: Vec<String>,
    pub diagnostics: Vec<Diagnostic>,
}

impl ProgramModel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses one file's tokens and appends its functions. Statement ids keep
    /// counting from the functions already present.
    pub fn add_file(&mut self, tokens: &[Token], file: &str) {
        let next_stmt = self
            .functions
            .iter()
            .flat_map(|f| f.body.iter())
            .map(|s| s.id.0 + 1)
            .max()
            .unwrap_or(0);
        let next_fn = self.functions.len() as u32;
        let (functions, diagnostics) = parser::parse_file(tokens, file, next_fn, next_stmt);
        self.functions.extend(functions);
        self.diagnostics.extend(diagnostics);
        self.files.push(file.to_string());
    }

    /// Lexes and parses `source`; lexing failures are hard errors.
    pub fn add_source(&mut self, source: &str, file: &str) -> Result<(), FrontendError> {
        let tokens = tokenize(source)?;
        self.add_file(&tokens, file);
        Ok(())
    }

    pub fn function(&self, id: FunctionId) -> &FunctionDecl {
        &self.functions[id.0 as usize]
    }

    pub fn function_by_name(&self, name: &str) -> Option<&FunctionDecl> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn statement(&self, id: StmtId) -> Option<(&FunctionDecl, &Statement)> {
        self.functions.iter().find_map(|f| f.statement(id).map(|s| (f, s)))
    }

    pub fn statement_index(&self) -> BTreeMap<StmtId, FunctionId> {
        self.functions.iter().flat_map(|f| f.body.iter().map(move |s| (s.id, f.id))).collect()
    }

    pub fn is_user_function(&self, name: &str) -> bool {
        self.function_by_name(name).is_some()
    }
}

/// Parses a single token stream into a fresh program.
pub fn parse(tokens: &[Token], file: &str) -> ProgramModel {
    let mut program = ProgramModel::new();
    program.add_file(tokens, file);
    program
}

/// Line-delimited AST dump: one JSON object per node.
pub fn ast_dump_records(function: &FunctionDecl) -> Vec<serde_json::Value> {
    function
        .ast
        .nodes
        .iter()
        .map(|n| {
            serde_json::json!({
                "file": function.file,
                "function": function.name,
                "id": n.id.0,
                "kind": n.kind.name(),
                "span": [n.span.start, n.span.end],
                "parent": n.parent.map(|p| p.0),
            })
        })
        .collect()
}
