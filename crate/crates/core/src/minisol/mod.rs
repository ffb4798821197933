//! MiniSol: a Solidity subset large enough for the migration rules.
//!
//! Grammar (EBNF, version [`GRAMMAR_VERSION`]):
//!
//! ```text
//! unit       = { pragma | contract } ;
//! pragma     = "pragma" { token } ";" ;
//! contract   = "contract" IDENT "{" { member } "}" ;
//! member     = statevar | function | constructor | modifier | event ;
//! statevar   = type { visibility | "constant" | "immutable" } IDENT [ "=" expr ] ";" ;
//! function   = "function" IDENT params { visibility | mutability | invocation
//!              | "returns" params } ( block | ";" ) ;
//! constructor= "constructor" params { visibility | mutability | invocation } block ;
//! modifier   = "modifier" IDENT [ params ] block ;
//! event      = "event" IDENT "(" [ eparam { "," eparam } ] ")" ";" ;
//! params     = "(" [ param { "," param } ] ")" ;
//! param      = type [ location ] [ IDENT ] ;
//! eparam     = type [ "indexed" ] [ IDENT ] ;
//! invocation = IDENT [ "(" [ expr { "," expr } ] ")" ] ;
//! type       = ( elementary | IDENT | mapping ) { "[" [ NUMBER ] "]" } ;
//! mapping    = "mapping" "(" ( elementary | IDENT ) "=>" type ")" ;   (* value not a mapping *)
//! elementary = "uint" | "uintN" | "int" | "intN" | "bytesN" | "bool" | "string"
//!            | "address" [ "payable" ] ;
//! block      = "{" { stmt } "}" ;
//! stmt       = block | vardecl | expr ";" | "require" "(" expr [ "," expr ] ")" ";"
//!            | "if" "(" expr ")" stmt [ "else" stmt ]
//!            | "for" "(" ( vardecl | expr ";" | ";" ) [ expr ] ";" [ expr ] ")" stmt
//!            | "while" "(" expr ")" stmt | "emit" call ";" | "return" [ expr ] ";"
//!            | "break" ";" | "continue" ";" | "_" ";" ;
//! vardecl    = type [ location ] IDENT [ "=" expr ] ";" ;
//! expr       = or [ assignop expr ] ;
//! or         = and { "||" and } ;           and  = eq { "&&" eq } ;
//! eq         = cmp { ("==" | "!=") cmp } ;  cmp  = add { ("<" | "<=" | ">" | ">=") add } ;
//! add        = mul { ("+" | "-") mul } ;    mul  = prefix { ("*" | "/" | "%") prefix } ;
//! prefix     = ( "!" | "-" | "++" | "--" ) prefix | postfix ;
//! postfix    = primary { "." IDENT | "[" expr "]" | "(" args ")" | "++" | "--" } ;
//! primary    = NUMBER [ unit ] | HEX | ADDRESS | STRING | "true" | "false" | IDENT
//!            | elementary "(" | "payable" "(" | "(" expr ")" ;
//! ```
//!
//! Inheritance, interfaces, libraries, structs, enums, inline assembly,
//! tuples, the conditional operator, bitwise operators and call options are
//! rejected with an "unsupported construct" diagnostic.

use std::fmt;

use serde::{Deserialize, Serialize};

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod resolve;

pub use ast::SourceUnit;
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::parse;
pub use printer::print;

pub const GRAMMAR_VERSION: &str = "minisol-1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub message: String,
    pub line: u32,
    pub column: u32,
    pub severity: Severity,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {sev}: {}", self.line, self.column, self.message)
    }
}

/// Tokenizes and parses in one step.
pub fn parse_source(source: &str) -> Result<SourceUnit, Vec<Diagnostic>> {
    parse(&tokenize(source)?)
}
