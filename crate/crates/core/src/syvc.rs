//! Syntax-based vulnerability candidates: AST elements matching one of four
//! syntax characteristics.
//!
//! - `FC`: a `Callee` whose name is in the configured call list.
//! - `AU`: a declared `Identifier` whose declaration contains `[` and `]`.
//! - `PU`: a declared `Identifier` whose declaration contains `*`.
//! - `AE`: an `ExpressionStatement` with an `=` and at least one identifier
//!   to the right of the first `=`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend::{
    join_tokens, FunctionDecl, FunctionId, NodeId, NodeKind, ProgramModel, StmtId, TokenKind,
    TokenSpan,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyvcError {
    #[error("unknown characteristic kind '{0}' (expected FC, AU, PU or AE)")]
    UnknownKind(String),
    #[error("FC is enabled but the call list is empty")]
    EmptyCallList,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SyvcKind {
    FC,
    AU,
    PU,
    AE,
}

impl SyvcKind {
    pub const ALL: [SyvcKind; 4] = [SyvcKind::FC, SyvcKind::AU, SyvcKind::PU, SyvcKind::AE];

    pub fn as_str(self) -> &'static str {
        match self {
            SyvcKind::FC => "FC",
            SyvcKind::AU => "AU",
            SyvcKind::PU => "PU",
            SyvcKind::AE => "AE",
        }
    }
}

impl fmt::Display for SyvcKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SyvcKind {
    type Err = SyvcError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "FC" => Ok(SyvcKind::FC),
            "AU" => Ok(SyvcKind::AU),
            "PU" => Ok(SyvcKind::PU),
            "AE" => Ok(SyvcKind::AE),
            _ => Err(SyvcError::UnknownKind(s.to_string())),
        }
    }
}

/// Parses a comma-separated kind list such as `"FC,AE"`.
pub fn parse_kinds(list: &str) -> Result<BTreeSet<SyvcKind>, SyvcError> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect()
}

/// Library/API calls shipped as the default FC list.
pub const SEED_CALLS: &[&str] = &[
    "memcpy", "memmove", "memset", "memcmp", "memchr", "strcpy", "strncpy", "strcat", "strncat",
    "strcmp", "strncmp", "strlen", "strchr", "strrchr", "strstr", "strtok", "strdup", "sprintf",
    "snprintf", "vsprintf", "vsnprintf", "printf", "fprintf", "scanf", "sscanf", "fscanf", "gets",
    "fgets", "getchar", "fgetc", "fread", "fwrite", "fopen", "fclose", "read", "write", "recv",
    "send", "malloc", "calloc", "realloc", "free", "alloca", "ALLOCA", "atoi", "atol", "strtol",
    "strtoul", "wcscpy", "wcsncpy", "wcscat", "wcslen", "wmemset", "wmemcpy", "getenv", "system",
    "popen", "execl", "execvp", "rand", "srand",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacteristicSet {
    pub fc_calls: BTreeSet<String>,
    pub kinds: BTreeSet<SyvcKind>,
    /// Let `+=`, `-=` and friends count as AE.
    #[serde(default)]
    pub compound_assignments: bool,
}

impl Default for CharacteristicSet {
    fn default() -> Self {
        Self {
            fc_calls: SEED_CALLS.iter().map(|s| s.to_string()).collect(),
            kinds: SyvcKind::ALL.into_iter().collect(),
            compound_assignments: false,
        }
    }
}

impl CharacteristicSet {
    pub fn new(fc_calls: BTreeSet<String>, kinds: BTreeSet<SyvcKind>) -> Result<Self, SyvcError> {
        let set = Self { fc_calls, kinds, compound_assignments: false };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<(), SyvcError> {
        if self.kinds.contains(&SyvcKind::FC) && self.fc_calls.is_empty() {
            return Err(SyvcError::EmptyCallList);
        }
        Ok(())
    }

    pub fn with_kinds(mut self, kinds: BTreeSet<SyvcKind>) -> Result<Self, SyvcError> {
        self.kinds = kinds;
        self.validate()?;
        Ok(self)
    }

    /// Reads a one-name-per-line call list; blank lines and `#` comments are ignored.
    pub fn parse_call_list(text: &str) -> BTreeSet<String> {
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Syvc {
    pub id: u32,
    pub kind: SyvcKind,
    pub function: FunctionId,
    pub statement: StmtId,
    pub node: NodeId,
    /// Span in the owning function's token stream.
    pub span: TokenSpan,
    pub line: u32,
    pub anchor_text: String,
}

/// Tests one AST node against one characteristic.
pub fn match_characteristic(
    function: &FunctionDecl,
    node: NodeId,
    kind: SyvcKind,
    set: &CharacteristicSet,
) -> bool {
    let ast = &function.ast;
    let n = ast.node(node);
    let tokens = &function.tokens[n.span.range()];
    match kind {
        SyvcKind::FC => {
            n.kind == NodeKind::Callee && set.fc_calls.contains(&join_tokens(tokens).replace(' ', ""))
        }
        SyvcKind::AU | SyvcKind::PU => {
            if n.kind != NodeKind::Identifier {
                return false;
            }
            let Some(parent) = n.parent.map(|p| ast.node(p)) else {
                return false;
            };
            if parent.kind != NodeKind::IdentifierDeclStatement {
                return false;
            }
            let decl = &function.tokens[parent.span.range()];
            if kind == SyvcKind::AU {
                decl.iter().any(|t| t.is("[")) && decl.iter().any(|t| t.is("]"))
            } else {
                decl.iter().any(|t| t.is("*"))
            }
        }
        SyvcKind::AE => {
            if n.kind != NodeKind::ExpressionStatement {
                return false;
            }
            let first_assign = tokens.iter().position(|t| {
                t.is("=")
                    || (set.compound_assignments
                        && t.kind == TokenKind::Operator
                        && t.text.len() >= 2
                        && t.text.ends_with('=')
                        && !matches!(t.text.as_str(), "==" | "!=" | "<=" | ">="))
            });
            match first_assign {
                Some(k) => tokens[k + 1..].iter().any(|t| t.is_identifier()),
                None => false,
            }
        }
    }
}

/// Extracts every (element, kind) match, ordered by function, statement,
/// span and kind. Ids are assigned in that order starting at 0.
pub fn extract_syvcs(program: &ProgramModel, set: &CharacteristicSet) -> Vec<Syvc> {
    let mut out = Vec::new();
    for function in &program.functions {
        for node in &function.ast.nodes {
            let Some(statement) = node.statement else { continue };
            for &kind in &set.kinds {
                if match_characteristic(function, node.id, kind, set) {
                    out.push(Syvc {
                        id: 0,
                        kind,
                        function: function.id,
                        statement,
                        node: node.id,
                        span: node.span,
                        line: function.tokens[node.span.start as usize].line,
                        anchor_text: join_tokens(&function.tokens[node.span.range()]),
                    });
                }
            }
        }
    }
    out.sort_by_key(|s| (s.function, s.statement, s.span.start, s.span.end, s.kind));
    for (i, s) in out.iter_mut().enumerate() {
        s.id = i as u32;
    }
    out
}
