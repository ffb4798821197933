use serde::{Deserialize, Serialize};

use super::{Diagnostic, Severity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    Identifier,
    Keyword,
    Number,
    Hex,
    AddressLiteral,
    String,
    Punctuation,
    Operator,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// Byte offsets into the source.
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub column: u32,
}

impl Token {
    pub fn is(&self, text: &str) -> bool {
        self.text == text && self.kind != TokenKind::String
    }
}

const KEYWORDS: &[&str] = &[
    "contract",
    "function",
    "constructor",
    "modifier",
    "event",
    "emit",
    "returns",
    "return",
    "if",
    "else",
    "for",
    "while",
    "do",
    "break",
    "continue",
    "public",
    "private",
    "internal",
    "external",
    "payable",
    "view",
    "pure",
    "constant",
    "immutable",
    "memory",
    "storage",
    "calldata",
    "mapping",
    "true",
    "false",
    "pragma",
    "indexed",
    "address",
    "bool",
    "string",
    "uint",
    "int",
    "bytes",
    // reserved, rejected by the parser
    "interface",
    "library",
    "import",
    "struct",
    "enum",
    "assembly",
    "is",
    "new",
    "delete",
    "try",
    "catch",
    "unchecked",
    "using",
    "abstract",
    "virtual",
    "override",
    "receive",
    "fallback",
    "error",
    "type",
    // literal units
    "wei",
    "gwei",
    "ether",
    "seconds",
    "minutes",
    "hours",
    "days",
    "weeks",
];

pub const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "interface",
    "library",
    "import",
    "struct",
    "enum",
    "assembly",
    "is",
    "new",
    "delete",
    "try",
    "catch",
    "unchecked",
    "using",
    "abstract",
    "virtual",
    "override",
    "receive",
    "fallback",
    "error",
    "type",
    "do",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word) || sized_elementary(word)
}

/// `uint8`..`uint256`, `int8`..`int256` in steps of 8, `bytes1`..`bytes32`.
pub fn sized_elementary(word: &str) -> bool {
    let bits = |rest: &str| {
        !rest.starts_with('0')
            && rest
                .parse::<u16>()
                .is_ok_and(|n| n > 0 && n <= 256 && n % 8 == 0)
    };
    if let Some(rest) = word.strip_prefix("uint") {
        return bits(rest);
    }
    if let Some(rest) = word.strip_prefix("int") {
        return bits(rest);
    }
    if let Some(rest) = word.strip_prefix("bytes") {
        return !rest.starts_with('0') && rest.parse::<u8>().is_ok_and(|n| (1..=32).contains(&n));
    }
    false
}

const OPERATORS: &[&str] = &[
    "++", "--", "+=", "-=", "*=", "/=", "%=", "==", "!=", "<=", ">=", "&&", "||", "**", "<<", ">>",
    "=>", "!", "<", ">", "+", "-", "*", "/", "%", "=", "&", "|", "^", "~", "?", ":",
];

const PUNCTUATION: &[char] = &['(', ')', '{', '}', '[', ']', ';', ',', '.'];

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    column: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }
}

/// Splits `source` into tokens. Whitespace and comments are skipped; every
/// token records its byte range and 1-based line/column.
pub fn tokenize(source: &str) -> Result<Vec<Token>, Vec<Diagnostic>> {
    let mut cur = Cursor {
        src: source,
        pos: 0,
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();
    let mut diags = Vec::new();

    while let Some(c) = cur.peek() {
        let (start, line, column) = (cur.pos, cur.line, cur.column);
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if cur.rest().starts_with("//") {
            while cur.peek().is_some_and(|c| c != '\n') {
                cur.bump();
            }
            continue;
        }
        if cur.rest().starts_with("/*") {
            cur.bump();
            cur.bump();
            let mut closed = false;
            while cur.peek().is_some() {
                if cur.rest().starts_with("*/") {
                    cur.bump();
                    cur.bump();
                    closed = true;
                    break;
                }
                cur.bump();
            }
            if !closed {
                diags.push(Diagnostic::error(
                    "unterminated block comment",
                    line,
                    column,
                ));
                break;
            }
            continue;
        }

        let kind = if c.is_ascii_alphabetic() || c == '_' || c == '$' {
            while cur
                .peek()
                .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$')
            {
                cur.bump();
            }
            if is_keyword(&source[start..cur.pos]) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            }
        } else if c == '0' && matches!(cur.peek_at(1), Some('x') | Some('X')) {
            cur.bump();
            cur.bump();
            let digits_start = cur.pos;
            while cur
                .peek()
                .is_some_and(|c| c.is_ascii_hexdigit() || c == '_')
            {
                cur.bump();
            }
            let digits = &source[digits_start..cur.pos];
            if digits.is_empty() {
                diags.push(Diagnostic::error("hex literal has no digits", line, column));
                continue;
            }
            if digits.len() == 40 && !digits.contains('_') {
                TokenKind::AddressLiteral
            } else {
                TokenKind::Hex
            }
        } else if c.is_ascii_digit() {
            lex_decimal(&mut cur);
            TokenKind::Number
        } else if c == '"' || c == '\'' {
            cur.bump();
            let mut closed = false;
            while let Some(ch) = cur.peek() {
                if ch == '\n' {
                    break;
                }
                cur.bump();
                if ch == '\\' {
                    if cur.peek().is_some_and(|c| c != '\n') {
                        cur.bump();
                    }
                } else if ch == c {
                    closed = true;
                    break;
                }
            }
            if !closed {
                diags.push(Diagnostic::error(
                    "unterminated string literal",
                    line,
                    column,
                ));
                break;
            }
            TokenKind::String
        } else if PUNCTUATION.contains(&c) {
            cur.bump();
            TokenKind::Punctuation
        } else if let Some(op) = OPERATORS.iter().find(|op| cur.rest().starts_with(**op)) {
            for _ in 0..op.len() {
                cur.bump();
            }
            TokenKind::Operator
        } else {
            diags.push(Diagnostic::error(
                format!("illegal character {c:?}"),
                line,
                column,
            ));
            cur.bump();
            continue;
        };

        tokens.push(Token {
            kind,
            text: source[start..cur.pos].to_string(),
            start,
            end: cur.pos,
            line,
            column,
        });
    }

    if diags.is_empty() {
        Ok(tokens)
    } else {
        Err(diags)
    }
}

fn lex_decimal(cur: &mut Cursor<'_>) {
    let digits = |cur: &mut Cursor<'_>| {
        while cur.peek().is_some_and(|c| c.is_ascii_digit() || c == '_') {
            cur.bump();
        }
    };
    digits(cur);
    if cur.peek() == Some('.') && cur.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
        cur.bump();
        digits(cur);
    }
    if matches!(cur.peek(), Some('e') | Some('E'))
        && cur.peek_at(1).is_some_and(|c| c.is_ascii_digit())
    {
        cur.bump();
        digits(cur);
    }
}

impl Diagnostic {
    pub fn error(message: impl Into<String>, line: u32, column: u32) -> Self {
        Diagnostic {
            message: message.into(),
            line,
            column,
            severity: Severity::Error,
        }
    }
}
