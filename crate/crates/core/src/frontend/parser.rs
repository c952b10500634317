//! Recursive-descent parser from tokens to functions, statements and ASTs.

use std::collections::HashSet;

use super::lexer::{Token, TokenKind};
use super::{
    Ast, AstNode, Control, Diagnostic, FrontendError, FunctionDecl, FunctionId, NodeId, NodeKind,
    Parameter, Statement, StatementKind, StmtId, TokenSpan,
};

/// Identifiers treated as type names without a visible `typedef`.
pub const BUILTIN_TYPE_NAMES: &[&str] = &[
    "size_t", "ssize_t", "wchar_t", "FILE", "ptrdiff_t", "intptr_t", "uintptr_t", "off_t",
    "time_t", "va_list", "int8_t", "int16_t", "int32_t", "int64_t", "uint8_t", "uint16_t",
    "uint32_t", "uint64_t", "BOOL", "DWORD", "BYTE", "WORD", "HANDLE", "SOCKET", "pid_t",
    "socklen_t", "char16_t", "char32_t",
];

const TYPE_KEYWORDS: &[&str] =
    &["char", "short", "int", "long", "float", "double", "signed", "unsigned", "void", "bool", "_Bool"];
const QUALIFIERS: &[&str] =
    &["const", "volatile", "static", "extern", "register", "auto", "inline", "restrict"];
const TAGS: &[&str] = &["struct", "union", "enum"];
const ASSIGN_OPS: &[&str] = &["=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="];
const UNSUPPORTED: &[&str] = &["do", "switch", "goto", "case", "default", "typedef"];

type PResult<T> = Result<T, FrontendError>;

/// Parses every top-level function definition in `tokens`. Functions that fall
/// outside the subset are skipped with a diagnostic.
pub(super) fn parse_file(
    tokens: &[Token],
    file: &str,
    first_fn: u32,
    first_stmt: u32,
) -> (Vec<FunctionDecl>, Vec<Diagnostic>) {
    let mut functions = Vec::new();
    let mut diagnostics = Vec::new();
    let mut typedefs: HashSet<String> = BUILTIN_TYPE_NAMES.iter().map(|s| s.to_string()).collect();
    let mut next_stmt = first_stmt;
    let mut i = 0;

    let diag = |line: u32, message: String| Diagnostic { file: file.to_string(), line, message };

    while i < tokens.len() {
        if tokens[i].is("typedef") {
            let end = find_top_level_semicolon(tokens, i).unwrap_or(tokens.len() - 1);
            if let Some(name) = typedef_name(&tokens[i..end]) {
                typedefs.insert(name);
            }
            i = end + 1;
            continue;
        }
        if tokens[i].is("}") {
            diagnostics.push(diag(tokens[i].line, "unbalanced '}' at top level".into()));
            i += 1;
            continue;
        }

        // Scan the item: a `;` ends a declaration, a `{` after `)` opens a body.
        let mut j = i;
        let mut parens = 0i32;
        let mut item_end = None;
        let mut body_start = None;
        while j < tokens.len() {
            match tokens[j].text.as_str() {
                "(" => parens += 1,
                ")" => parens -= 1,
                ";" if parens == 0 => {
                    item_end = Some(j);
                    break;
                }
                "{" if parens == 0 => {
                    if j > i && tokens[j - 1].is(")") {
                        body_start = Some(j);
                        break;
                    }
                    // struct/enum body or aggregate initializer
                    match matching_brace(tokens, j) {
                        Some(close) => j = close,
                        None => break,
                    }
                }
                _ => {}
            }
            j += 1;
        }

        if let Some(end) = item_end {
            i = end + 1;
            continue;
        }
        let Some(open) = body_start else {
            if i < tokens.len() {
                diagnostics.push(diag(tokens[i].line, "incomplete top-level item".into()));
            }
            break;
        };
        let Some(close) = matching_brace(tokens, open) else {
            diagnostics.push(diag(tokens[open].line, "unterminated function body".into()));
            break;
        };

        let slice = &tokens[i..=close];
        let fn_id = FunctionId(first_fn + functions.len() as u32);
        let mut parser = FnParser {
            toks: slice,
            pos: 0,
            nodes: Vec::new(),
            stmts: Vec::new(),
            next_stmt,
            fn_id,
            typedefs: &typedefs,
        };
        match parser.parse_function(open - i) {
            Ok(decl) => {
                next_stmt = parser.next_stmt;
                functions.push(FunctionDecl { file: file.to_string(), ..decl });
            }
            Err(err) => {
                let line = match &err {
                    FrontendError::Parse { line, .. } | FrontendError::Lex { line, .. } => *line,
                };
                diagnostics.push(diag(line, format!("{err}; function skipped")));
            }
        }
        i = close + 1;
    }
    (functions, diagnostics)
}

fn find_top_level_semicolon(tokens: &[Token], from: usize) -> Option<usize> {
    let mut depth = 0i32;
    for (k, t) in tokens.iter().enumerate().skip(from) {
        match t.text.as_str() {
            "{" | "(" => depth += 1,
            "}" | ")" => depth -= 1,
            ";" if depth == 0 => return Some(k),
            _ => {}
        }
    }
    None
}

fn typedef_name(tokens: &[Token]) -> Option<String> {
    let mut depth = 0i32;
    let mut last = None;
    for t in tokens {
        match t.text.as_str() {
            "{" | "(" | "[" => depth += 1,
            "}" | ")" | "]" => depth -= 1,
            _ if depth == 0 && t.is_identifier() => last = Some(t.text.clone()),
            _ => {}
        }
    }
    last
}

fn matching_brace(tokens: &[Token], open: usize) -> Option<usize> {
    let mut depth = 0i32;
    for (k, t) in tokens.iter().enumerate().skip(open) {
        match t.text.as_str() {
            "{" => depth += 1,
            "}" => {
                depth -= 1;
                if depth == 0 {
                    return Some(k);
                }
            }
            _ => {}
        }
    }
    None
}

struct FnParser<'a> {
    toks: &'a [Token],
    pos: usize,
    nodes: Vec<AstNode>,
    stmts: Vec<Statement>,
    next_stmt: u32,
    fn_id: FunctionId,
    typedefs: &'a HashSet<String>,
}

impl<'a> FnParser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, k: usize) -> Option<&'a Token> {
        self.toks.get(k)
    }

    fn at(&self, text: &str) -> bool {
        self.peek().is_some_and(|t| t.is(text))
    }

    fn at_kind(&self, kind: TokenKind) -> bool {
        self.peek().is_some_and(|t| t.kind == kind)
    }

    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        let line = self.peek().or(self.toks.last()).map(|t| t.line).unwrap_or(0);
        Err(FrontendError::Parse { line, message: message.into() })
    }

    fn push_node(&mut self, kind: NodeKind, children: Vec<NodeId>, span: TokenSpan) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        for c in &children {
            self.nodes[c.0 as usize].parent = Some(id);
        }
        self.nodes.push(AstNode { id, kind, children, parent: None, span, statement: None });
        id
    }

    /// Consumes the current token as a leaf.
    fn leaf(&mut self) -> PResult<NodeId> {
        let Some(tok) = self.peek() else {
            return self.err("unexpected end of input");
        };
        let kind = match tok.kind {
            TokenKind::Keyword => NodeKind::Keyword,
            TokenKind::Identifier => NodeKind::Identifier,
            TokenKind::Constant => NodeKind::Constant,
            TokenKind::StringLiteral => NodeKind::StringLiteral,
            TokenKind::Operator => NodeKind::Operator,
            TokenKind::Punctuator => NodeKind::Punctuator,
        };
        Ok(self.leaf_as(kind))
    }

    fn leaf_as(&mut self, kind: NodeKind) -> NodeId {
        let span = TokenSpan { start: self.pos as u32, end: self.pos as u32 + 1 };
        self.pos += 1;
        self.push_node(kind, Vec::new(), span)
    }

    fn expect(&mut self, text: &str) -> PResult<NodeId> {
        if self.at(text) {
            self.leaf()
        } else {
            let found = self.peek().map(|t| t.text.clone()).unwrap_or_else(|| "end of input".into());
            self.err(format!("expected '{text}', found '{found}'"))
        }
    }

    fn mk(&mut self, kind: NodeKind, children: Vec<NodeId>) -> NodeId {
        let start = self.nodes[children[0].0 as usize].span.start;
        let end = self.nodes[children.last().unwrap().0 as usize].span.end;
        self.push_node(kind, children, TokenSpan { start, end })
    }

    fn kind_of(&self, id: NodeId) -> NodeKind {
        self.nodes[id.0 as usize].kind
    }

    fn finish_stmt(&mut self, root: NodeId, kind: StatementKind) -> StmtId {
        let id = StmtId(self.next_stmt);
        self.next_stmt += 1;
        let mut stack = vec![root];
        while let Some(n) = stack.pop() {
            let node = &mut self.nodes[n.0 as usize];
            node.statement = Some(id);
            stack.extend(node.children.iter().copied());
        }
        let span = self.nodes[root.0 as usize].span;
        let tokens = self.toks[span.range()].to_vec();
        self.stmts.push(Statement {
            id,
            function: self.fn_id,
            kind,
            first_line: tokens.first().map(|t| t.line).unwrap_or(0),
            last_line: tokens.last().map(|t| t.line).unwrap_or(0),
            tokens,
            span,
            node: root,
        });
        id
    }

    // ---- functions ----------------------------------------------------

    fn parse_function(&mut self, body_open: usize) -> PResult<FunctionDecl> {
        // The header ends with `)`; its matching `(` opens the parameter list.
        let mut depth = 0i32;
        let mut lparen = None;
        for k in (0..body_open).rev() {
            match self.toks[k].text.as_str() {
                ")" => depth += 1,
                "(" => {
                    depth -= 1;
                    if depth == 0 {
                        lparen = Some(k);
                        break;
                    }
                }
                _ => {}
            }
        }
        let Some(lparen) = lparen.filter(|&k| k >= 1 && self.toks[k - 1].is_identifier()) else {
            return self.err("unsupported function declarator");
        };
        let name_idx = lparen - 1;
        let name = self.toks[name_idx].text.clone();

        let mut root_children = Vec::new();
        if name_idx > 0 {
            let mut leaves = Vec::new();
            while self.pos < name_idx {
                leaves.push(self.leaf()?);
            }
            root_children.push(self.mk(NodeKind::ReturnType, leaves));
        }
        root_children.push(self.leaf()?);

        let (params, plist) = self.parse_parameter_list(body_open)?;
        root_children.push(plist);
        if self.pos != body_open {
            return self.err("unexpected tokens between parameters and body");
        }
        let (control, body) = self.parse_compound()?;
        root_children.push(body);
        if self.pos != self.toks.len() {
            return self.err("trailing tokens after function body");
        }
        let root = self.mk(NodeKind::FunctionDef, root_children);

        let (ast, remap) = renumber(std::mem::take(&mut self.nodes), root);
        let mut body = std::mem::take(&mut self.stmts);
        for s in &mut body {
            s.node = remap[s.node.0 as usize];
        }
        Ok(FunctionDecl {
            id: self.fn_id,
            name,
            file: String::new(),
            params,
            body,
            control: flatten(control),
            tokens: self.toks.to_vec(),
            ast,
        })
    }

    fn parse_parameter_list(&mut self, limit: usize) -> PResult<(Vec<Parameter>, NodeId)> {
        let mut children = vec![self.expect("(")?];
        let mut params = Vec::new();
        if self.at("void") && self.peek_at(self.pos + 1).is_some_and(|t| t.is(")")) {
            children.push(self.leaf()?);
        }
        while !self.at(")") {
            if self.pos >= limit {
                return self.err("unterminated parameter list");
            }
            if self.at("...") {
                children.push(self.leaf()?);
                continue;
            }
            // Parameter extent: up to `,` or the closing `)` at depth 0.
            let start = self.pos;
            let mut end = start;
            let mut depth = 0i32;
            while end < limit {
                let t = &self.toks[end];
                match t.text.as_str() {
                    "(" | "[" => depth += 1,
                    ")" | "]" if depth > 0 => depth -= 1,
                    ")" | "," if depth == 0 => break,
                    _ => {}
                }
                end += 1;
            }
            if end == start {
                return self.err("empty parameter");
            }
            let (param, node) = self.parse_parameter(end)?;
            params.push(param);
            children.push(node);
            if self.at(",") {
                children.push(self.leaf()?);
            }
        }
        children.push(self.expect(")")?);
        Ok((params, self.mk(NodeKind::ParameterList, children)))
    }

    fn parse_parameter(&mut self, end: usize) -> PResult<(Parameter, NodeId)> {
        let start = self.pos;
        let mut depth = 0i32;
        let mut name_idx = None;
        for k in start..end {
            let t = &self.toks[k];
            match t.text.as_str() {
                "[" | "(" => depth += 1,
                "]" | ")" => depth -= 1,
                _ if depth == 0 && t.is_identifier() && k > start => name_idx = Some(k),
                _ => {}
            }
        }
        // Leading type tokens stop at the first `*` or at the name.
        let type_end = (start..end)
            .find(|&k| self.toks[k].is("*") || Some(k) == name_idx)
            .unwrap_or(end);
        let mut children = Vec::new();
        if type_end > start {
            let mut leaves = Vec::new();
            while self.pos < type_end {
                leaves.push(self.leaf()?);
            }
            children.push(self.mk(NodeKind::Type, leaves));
        }
        while self.pos < end {
            children.push(self.leaf()?);
        }
        let node = self.mk(NodeKind::Parameter, children);
        let statement = self.finish_stmt(node, StatementKind::Declaration);
        let name = name_idx.map(|k| self.toks[k].text.clone());
        Ok((Parameter { name, statement }, node))
    }

    // ---- statements ---------------------------------------------------

    fn parse_compound(&mut self) -> PResult<(Control, NodeId)> {
        let mut children = vec![self.expect("{")?];
        let mut items = Vec::new();
        while !self.at("}") {
            if self.peek().is_none() {
                return self.err("unterminated block");
            }
            let (ctrl, node) = self.parse_statement()?;
            items.push(ctrl);
            children.push(node);
        }
        children.push(self.expect("}")?);
        Ok((Control::Block(items), self.mk(NodeKind::CompoundStatement, children)))
    }

    fn parse_statement(&mut self) -> PResult<(Control, NodeId)> {
        let Some(tok) = self.peek() else {
            return self.err("unexpected end of input");
        };
        match tok.text.as_str() {
            "{" => return self.parse_compound(),
            "if" => return self.parse_if(),
            "while" => return self.parse_while(),
            "for" => return self.parse_for(),
            "return" => {
                let mut children = vec![self.leaf()?];
                if !self.at(";") {
                    children.push(self.parse_expression()?);
                }
                children.push(self.expect(";")?);
                let node = self.mk(NodeKind::ReturnStatement, children);
                let id = self.finish_stmt(node, StatementKind::Return);
                return Ok((Control::Return(id), node));
            }
            "break" | "continue" => {
                let is_break = tok.is("break");
                let kw = self.leaf()?;
                let semi = self.expect(";")?;
                let kind = if is_break { NodeKind::BreakStatement } else { NodeKind::ContinueStatement };
                let node = self.mk(kind, vec![kw, semi]);
                let id = self.finish_stmt(node, StatementKind::Other);
                let ctrl = if is_break { Control::Break(id) } else { Control::Continue(id) };
                return Ok((ctrl, node));
            }
            ";" => {
                let semi = self.leaf()?;
                let node = self.mk(NodeKind::EmptyStatement, vec![semi]);
                let id = self.finish_stmt(node, StatementKind::Other);
                return Ok((Control::Simple(id), node));
            }
            text if UNSUPPORTED.contains(&text) => {
                return self.err(format!("'{text}' is outside the supported subset"));
            }
            _ => {}
        }
        if tok.is_identifier() && self.peek_at(self.pos + 1).is_some_and(|t| t.is(":")) {
            return self.err("labels are outside the supported subset");
        }
        let (node, kind) = self.parse_simple_statement(true)?;
        let id = self.finish_stmt(node, kind);
        Ok((Control::Simple(id), node))
    }

    /// Declaration or expression statement, optionally consuming the `;`.
    fn parse_simple_statement(&mut self, with_semicolon: bool) -> PResult<(NodeId, StatementKind)> {
        if self.is_declaration_start(self.pos) {
            return Ok((self.parse_declaration()?, StatementKind::Declaration));
        }
        let expr = self.parse_expression()?;
        let kind = if self.kind_of(expr) == NodeKind::CallExpression {
            StatementKind::Call
        } else {
            StatementKind::Expression
        };
        let mut children = vec![expr];
        if with_semicolon {
            children.push(self.expect(";")?);
        }
        Ok((self.mk(NodeKind::ExpressionStatement, children), kind))
    }

    fn parse_condition(&mut self) -> PResult<(NodeId, StmtId)> {
        let kw = self.leaf()?;
        let lp = self.expect("(")?;
        let e = self.parse_expression()?;
        let rp = self.expect(")")?;
        let cond = self.mk(NodeKind::Condition, vec![kw, lp, e, rp]);
        let id = self.finish_stmt(cond, StatementKind::ControlPredicate);
        Ok((cond, id))
    }

    fn parse_if(&mut self) -> PResult<(Control, NodeId)> {
        let (cond, cond_id) = self.parse_condition()?;
        let (then_ctrl, then_node) = self.parse_statement()?;
        let mut children = vec![cond, then_node];
        let mut else_branch = None;
        if self.at("else") {
            children.push(self.leaf()?);
            let (else_ctrl, else_node) = self.parse_statement()?;
            children.push(else_node);
            else_branch = Some(flatten(else_ctrl));
        }
        let node = self.mk(NodeKind::IfStatement, children);
        Ok((Control::If { cond: cond_id, then_branch: flatten(then_ctrl), else_branch }, node))
    }

    fn parse_while(&mut self) -> PResult<(Control, NodeId)> {
        let (cond, cond_id) = self.parse_condition()?;
        let (body_ctrl, body) = self.parse_statement()?;
        let node = self.mk(NodeKind::WhileStatement, vec![cond, body]);
        Ok((Control::While { cond: cond_id, body: flatten(body_ctrl) }, node))
    }

    fn parse_for(&mut self) -> PResult<(Control, NodeId)> {
        let mut children = vec![self.leaf()?, self.expect("(")?];
        let init = if self.at(";") {
            children.push(self.leaf()?);
            None
        } else {
            let (node, kind) = self.parse_simple_statement(true)?;
            children.push(node);
            Some(self.finish_stmt(node, kind))
        };

        let mut cond_children = Vec::new();
        if !self.at(";") {
            cond_children.push(self.parse_expression()?);
        }
        cond_children.push(self.expect(";")?);
        let cond = self.mk(NodeKind::Condition, cond_children);
        children.push(cond);
        let cond_id = self.finish_stmt(cond, StatementKind::ControlPredicate);

        let step = if self.at(")") {
            None
        } else {
            let (node, kind) = self.parse_simple_statement(false)?;
            if self.kind_of(node) != NodeKind::ExpressionStatement {
                return self.err("declaration in for-loop step");
            }
            children.push(node);
            Some(self.finish_stmt(node, kind))
        };
        children.push(self.expect(")")?);
        let (body_ctrl, body) = self.parse_statement()?;
        children.push(body);
        let node = self.mk(NodeKind::ForStatement, children);
        Ok((Control::For { init, cond: cond_id, step, body: flatten(body_ctrl) }, node))
    }

    // ---- declarations -------------------------------------------------

    fn is_type_name(&self, tok: &Token) -> bool {
        tok.is_identifier() && self.typedefs.contains(&tok.text)
    }

    fn is_type_start(&self, k: usize) -> bool {
        self.peek_at(k).is_some_and(|t| {
            let w = t.text.as_str();
            (t.kind == TokenKind::Keyword
                && (TYPE_KEYWORDS.contains(&w) || QUALIFIERS.contains(&w) || TAGS.contains(&w)))
                || self.is_type_name(t)
        })
    }

    fn is_declaration_start(&self, k: usize) -> bool {
        let Some(t) = self.peek_at(k) else { return false };
        if t.kind == TokenKind::Keyword {
            return self.is_type_start(k);
        }
        if !t.is_identifier() {
            return false;
        }
        let Some(next) = self.peek_at(k + 1) else { return false };
        if next.is_identifier() {
            return true;
        }
        if next.is("*") {
            if self.is_type_name(t) {
                return true;
            }
            let mut j = k + 1;
            while self.peek_at(j).is_some_and(|t| t.is("*")) {
                j += 1;
            }
            return self.peek_at(j).is_some_and(|t| t.is_identifier())
                && self.peek_at(j + 1).is_some_and(|t| [";", "=", ",", "["].contains(&t.text.as_str()));
        }
        false
    }

    fn parse_type(&mut self, allow_pointer: bool) -> PResult<NodeId> {
        let mut leaves = Vec::new();
        let mut has_base = false;
        loop {
            let Some(t) = self.peek() else { break };
            let w = t.text.as_str();
            if t.kind == TokenKind::Keyword && (QUALIFIERS.contains(&w) || TYPE_KEYWORDS.contains(&w)) {
                has_base |= TYPE_KEYWORDS.contains(&w);
                leaves.push(self.leaf()?);
            } else if t.kind == TokenKind::Keyword && TAGS.contains(&w) {
                leaves.push(self.leaf()?);
                if self.at_kind(TokenKind::Identifier) {
                    leaves.push(self.leaf()?);
                }
                if self.at("{") {
                    return self.err("tag definitions inside functions are outside the supported subset");
                }
                has_base = true;
            } else if t.is_identifier() && !has_base {
                leaves.push(self.leaf()?);
                has_base = true;
            } else if allow_pointer && (t.is("*") || (t.kind == TokenKind::Keyword && QUALIFIERS.contains(&w))) {
                leaves.push(self.leaf()?);
            } else {
                break;
            }
        }
        if allow_pointer {
            while self.at("*") || self.at("const") {
                leaves.push(self.leaf()?);
            }
        }
        if leaves.is_empty() {
            return self.err("expected a type");
        }
        Ok(self.mk(NodeKind::Type, leaves))
    }

    fn parse_declaration(&mut self) -> PResult<NodeId> {
        let mut children = vec![self.parse_type(false)?];
        loop {
            while self.at("*") || self.at("const") || self.at("volatile") || self.at("restrict") {
                children.push(self.leaf()?);
            }
            if !self.at_kind(TokenKind::Identifier) {
                return self.err("expected a declarator name");
            }
            children.push(self.leaf()?);
            while self.at("[") {
                children.push(self.leaf()?);
                if !self.at("]") {
                    let size = self.parse_expression()?;
                    children.push(self.mk(NodeKind::ArraySize, vec![size]));
                }
                children.push(self.expect("]")?);
            }
            if self.at("=") {
                children.push(self.leaf()?);
                let init = self.parse_initializer()?;
                children.push(self.mk(NodeKind::Initializer, vec![init]));
            }
            if self.at(",") {
                children.push(self.leaf()?);
                continue;
            }
            children.push(self.expect(";")?);
            break;
        }
        Ok(self.mk(NodeKind::IdentifierDeclStatement, children))
    }

    fn parse_initializer(&mut self) -> PResult<NodeId> {
        if !self.at("{") {
            return self.parse_assignment();
        }
        let mut children = vec![self.leaf()?];
        while !self.at("}") {
            children.push(self.parse_initializer()?);
            if self.at(",") {
                children.push(self.leaf()?);
            } else if !self.at("}") {
                return self.err("expected ',' or '}' in initializer list");
            }
        }
        children.push(self.expect("}")?);
        Ok(self.mk(NodeKind::InitializerList, children))
    }

    // ---- expressions --------------------------------------------------

    fn parse_expression(&mut self) -> PResult<NodeId> {
        let first = self.parse_assignment()?;
        if !self.at(",") {
            return Ok(first);
        }
        let mut children = vec![first];
        while self.at(",") {
            children.push(self.leaf()?);
            children.push(self.parse_assignment()?);
        }
        Ok(self.mk(NodeKind::CommaExpr, children))
    }

    fn parse_assignment(&mut self) -> PResult<NodeId> {
        let lhs = self.parse_conditional()?;
        if self.peek().is_some_and(|t| t.kind == TokenKind::Operator && ASSIGN_OPS.contains(&t.text.as_str())) {
            let op = self.leaf()?;
            let rhs = self.parse_assignment()?;
            return Ok(self.mk(NodeKind::AssignmentExpr, vec![lhs, op, rhs]));
        }
        Ok(lhs)
    }

    fn parse_conditional(&mut self) -> PResult<NodeId> {
        let cond = self.parse_binary(1)?;
        if !self.at("?") {
            return Ok(cond);
        }
        let q = self.leaf()?;
        let then = self.parse_expression()?;
        let colon = self.expect(":")?;
        let other = self.parse_conditional()?;
        Ok(self.mk(NodeKind::ConditionalExpr, vec![cond, q, then, colon, other]))
    }

    fn binary_precedence(tok: &Token) -> Option<u8> {
        if tok.kind != TokenKind::Operator {
            return None;
        }
        Some(match tok.text.as_str() {
            "||" => 1,
            "&&" => 2,
            "|" => 3,
            "^" => 4,
            "&" => 5,
            "==" | "!=" => 6,
            "<" | ">" | "<=" | ">=" => 7,
            "<<" | ">>" => 8,
            "+" | "-" => 9,
            "*" | "/" | "%" => 10,
            _ => return None,
        })
    }

    fn parse_binary(&mut self, min_prec: u8) -> PResult<NodeId> {
        let mut lhs = self.parse_unary()?;
        while let Some(prec) = self.peek().and_then(Self::binary_precedence) {
            if prec < min_prec {
                break;
            }
            let op = self.leaf()?;
            let rhs = self.parse_binary(prec + 1)?;
            lhs = self.mk(NodeKind::BinaryExpr, vec![lhs, op, rhs]);
        }
        Ok(lhs)
    }

    fn is_cast(&self, k: usize) -> bool {
        if !self.peek_at(k).is_some_and(|t| t.is("(")) {
            return false;
        }
        if self.is_type_start(k + 1) {
            return true;
        }
        // `(name *)` with an unknown type name
        if !self.peek_at(k + 1).is_some_and(|t| t.is_identifier()) {
            return false;
        }
        let mut j = k + 2;
        let mut stars = 0;
        while self.peek_at(j).is_some_and(|t| t.is("*")) {
            j += 1;
            stars += 1;
        }
        stars > 0 && self.peek_at(j).is_some_and(|t| t.is(")"))
    }

    fn parse_unary(&mut self) -> PResult<NodeId> {
        let Some(tok) = self.peek() else {
            return self.err("unexpected end of input in expression");
        };
        if tok.kind == TokenKind::Operator
            && ["++", "--", "+", "-", "!", "~", "*", "&"].contains(&tok.text.as_str())
        {
            let op = self.leaf()?;
            let operand = self.parse_unary()?;
            return Ok(self.mk(NodeKind::UnaryExpr, vec![op, operand]));
        }
        if tok.is("sizeof") {
            let kw = self.leaf()?;
            if self.at("(") && self.is_type_start(self.pos + 1) {
                let lp = self.leaf()?;
                let ty = self.parse_type(true)?;
                let rp = self.expect(")")?;
                return Ok(self.mk(NodeKind::SizeofExpr, vec![kw, lp, ty, rp]));
            }
            let operand = self.parse_unary()?;
            return Ok(self.mk(NodeKind::SizeofExpr, vec![kw, operand]));
        }
        if self.is_cast(self.pos) {
            let lp = self.leaf()?;
            let ty = self.parse_type(true)?;
            let rp = self.expect(")")?;
            let operand = self.parse_unary()?;
            return Ok(self.mk(NodeKind::CastExpression, vec![lp, ty, rp, operand]));
        }
        self.parse_postfix()
    }

    fn parse_postfix(&mut self) -> PResult<NodeId> {
        let mut e = self.parse_primary()?;
        loop {
            if self.at("[") {
                let lb = self.leaf()?;
                let idx = self.parse_expression()?;
                let rb = self.expect("]")?;
                e = self.mk(NodeKind::ArrayIndexing, vec![e, lb, idx, rb]);
            } else if self.at("(") {
                let callee = self.mk(NodeKind::Callee, vec![e]);
                let args = self.parse_arguments()?;
                e = self.mk(NodeKind::CallExpression, vec![callee, args]);
            } else if self.at(".") || self.at("->") {
                let op = self.leaf()?;
                if !self.at_kind(TokenKind::Identifier) {
                    return self.err("expected member name");
                }
                let field = self.leaf_as(NodeKind::Field);
                e = self.mk(NodeKind::MemberAccess, vec![e, op, field]);
            } else if self.at("++") || self.at("--") {
                let op = self.leaf()?;
                e = self.mk(NodeKind::PostfixExpr, vec![e, op]);
            } else {
                return Ok(e);
            }
        }
    }

    fn parse_arguments(&mut self) -> PResult<NodeId> {
        let mut children = vec![self.expect("(")?];
        if !self.at(")") {
            loop {
                let a = self.parse_assignment()?;
                children.push(self.mk(NodeKind::Argument, vec![a]));
                if self.at(",") {
                    children.push(self.leaf()?);
                    continue;
                }
                break;
            }
        }
        children.push(self.expect(")")?);
        Ok(self.mk(NodeKind::ArgumentList, children))
    }

    fn parse_primary(&mut self) -> PResult<NodeId> {
        let Some(tok) = self.peek() else {
            return self.err("unexpected end of input in expression");
        };
        match tok.kind {
            TokenKind::Identifier | TokenKind::Constant => self.leaf(),
            TokenKind::StringLiteral => {
                let mut parts = vec![self.leaf()?];
                while self.at_kind(TokenKind::StringLiteral) {
                    parts.push(self.leaf()?);
                }
                if parts.len() == 1 {
                    Ok(parts[0])
                } else {
                    Ok(self.mk(NodeKind::StringConcat, parts))
                }
            }
            _ if tok.is("(") => {
                let lp = self.leaf()?;
                let e = self.parse_expression()?;
                let rp = self.expect(")")?;
                Ok(self.mk(NodeKind::ParenExpr, vec![lp, e, rp]))
            }
            _ => self.err(format!("unexpected token '{}'", tok.text)),
        }
    }
}

fn flatten(ctrl: Control) -> Vec<Control> {
    match ctrl {
        Control::Block(items) => items,
        other => vec![other],
    }
}

/// Re-indexes nodes in pre-order from `root`, returning the mapping old -> new.
fn renumber(nodes: Vec<AstNode>, root: NodeId) -> (Ast, Vec<NodeId>) {
    let mut order = Vec::with_capacity(nodes.len());
    let mut stack = vec![root];
    while let Some(n) = stack.pop() {
        order.push(n);
        stack.extend(nodes[n.0 as usize].children.iter().rev());
    }
    let mut remap = vec![NodeId(u32::MAX); nodes.len()];
    for (new, old) in order.iter().enumerate() {
        remap[old.0 as usize] = NodeId(new as u32);
    }
    let out = order
        .iter()
        .map(|old| {
            let n = &nodes[old.0 as usize];
            AstNode {
                id: remap[old.0 as usize],
                kind: n.kind,
                children: n.children.iter().map(|c| remap[c.0 as usize]).collect(),
                parent: n.parent.map(|p| remap[p.0 as usize]),
                span: n.span,
                statement: n.statement,
            }
        })
        .collect();
    (Ast { nodes: out }, remap)
}
