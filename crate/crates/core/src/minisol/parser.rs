//! Recursive-descent parser for MiniSol.
//!
//! Errors inside a statement or contract member are recorded and parsing
//! resumes at the next statement or member boundary, so one pass reports
//! every independent syntax error. Any error makes [`parse`] fail; no partial
//! tree escapes.

use super::ast::*;
use super::lexer::{sized_elementary, Token, TokenKind, UNSUPPORTED_KEYWORDS};
use super::Diagnostic;

type PResult<T> = Result<T, Diagnostic>;

pub fn parse(tokens: &[Token]) -> Result<SourceUnit, Vec<Diagnostic>> {
    let mut p = Parser::new(tokens);
    let unit = p.source_unit();
    if p.diags.is_empty() {
        Ok(unit)
    } else {
        Err(p.diags)
    }
}

struct Parser<'t> {
    toks: &'t [Token],
    pos: usize,
    diags: Vec<Diagnostic>,
}

fn is_elementary_keyword(text: &str) -> bool {
    matches!(text, "uint" | "int" | "address" | "bool" | "string") || sized_elementary(text)
}

const MEMBER_STARTS: &[&str] = &["function", "constructor", "modifier", "event"];

impl<'t> Parser<'t> {
    fn new(toks: &'t [Token]) -> Self {
        Self {
            toks,
            pos: 0,
            diags: Vec::new(),
        }
    }

    // ---- token helpers ----

    fn peek(&self) -> Option<&'t Token> {
        self.toks.get(self.pos)
    }

    fn peek_n(&self, n: usize) -> Option<&'t Token> {
        self.toks.get(self.pos + n)
    }

    fn at(&self, text: &str) -> bool {
        self.peek().is_some_and(|t| t.is(text))
    }

    fn at_n(&self, n: usize, text: &str) -> bool {
        self.peek_n(n).is_some_and(|t| t.is(text))
    }

    fn at_kind(&self, kind: TokenKind) -> bool {
        self.peek().is_some_and(|t| t.kind == kind)
    }

    fn bump(&mut self) -> Option<&'t Token> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, text: &str) -> bool {
        if self.at(text) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eof_position(&self) -> (u32, u32) {
        match self.toks.last() {
            Some(t) => (t.line, t.column + t.text.chars().count() as u32),
            None => (1, 1),
        }
    }

    fn error_here(&self, message: impl Into<String>) -> Diagnostic {
        let (line, column) = match self.peek() {
            Some(t) => (t.line, t.column),
            None => self.eof_position(),
        };
        Diagnostic::error(message, line, column)
    }

    fn found(&self) -> String {
        match self.peek() {
            Some(t) => format!("'{}'", t.text),
            None => "end of input".to_string(),
        }
    }

    fn expect(&mut self, text: &str) -> PResult<&'t Token> {
        if self.at(text) {
            Ok(self.bump().expect("checked"))
        } else {
            Err(self.error_here(format!("expected '{text}', found {}", self.found())))
        }
    }

    fn unsupported(&self, what: &str) -> Diagnostic {
        self.error_here(format!("unsupported construct: {what}"))
    }

    fn span_from(&self, start: usize) -> Span {
        let first = &self.toks[start.min(self.toks.len().saturating_sub(1))];
        let last = &self.toks[self.pos.saturating_sub(1).max(start)];
        Span {
            start: first.start,
            end: last.end,
            line: first.line,
            column: first.column,
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Identifier => {
                self.pos += 1;
                Ok(Ident {
                    name: t.text.clone(),
                    span: Span {
                        start: t.start,
                        end: t.end,
                        line: t.line,
                        column: t.column,
                    },
                })
            }
            Some(t)
                if t.kind == TokenKind::Keyword
                    && UNSUPPORTED_KEYWORDS.contains(&t.text.as_str()) =>
            {
                Err(self.unsupported(&format!("'{}'", t.text)))
            }
            _ => Err(self.error_here(format!("expected identifier, found {}", self.found()))),
        }
    }

    // ---- recovery ----

    /// Skips to the end of the current statement: past a `;` or a balanced
    /// `{...}` at depth zero, or up to an enclosing `}`.
    fn recover_stmt(&mut self) {
        let mut depth = 0usize;
        while let Some(t) = self.peek() {
            if t.is("{") {
                depth += 1;
            } else if t.is("}") {
                if depth == 0 {
                    return;
                }
                depth -= 1;
                if depth == 0 {
                    self.pos += 1;
                    return;
                }
            } else if t.is(";") && depth == 0 {
                self.pos += 1;
                return;
            }
            self.pos += 1;
        }
    }

    fn recover_member(&mut self) {
        let start = self.pos;
        let mut depth = 0usize;
        while let Some(t) = self.peek() {
            if depth == 0 && self.pos > start && MEMBER_STARTS.iter().any(|m| t.is(m)) {
                return;
            }
            if t.is("{") {
                depth += 1;
            } else if t.is("}") {
                if depth == 0 {
                    return;
                }
                depth -= 1;
                if depth == 0 {
                    self.pos += 1;
                    return;
                }
            } else if t.is(";") && depth == 0 {
                self.pos += 1;
                return;
            }
            self.pos += 1;
        }
    }

    fn recover_top(&mut self) {
        let start = self.pos;
        let mut depth = 0usize;
        while let Some(t) = self.peek() {
            if depth == 0 && self.pos > start && (t.is("contract") || t.is("pragma")) {
                return;
            }
            if t.is("{") {
                depth += 1;
            } else if t.is("}") {
                depth = depth.saturating_sub(1);
            }
            self.pos += 1;
        }
    }

    // ---- top level ----

    fn source_unit(&mut self) -> SourceUnit {
        let mut unit = SourceUnit::default();
        while self.peek().is_some() {
            let before = self.pos;
            let res = if self.at("pragma") {
                self.pragma().map(|p| unit.pragmas.push(p))
            } else if self.at("contract") {
                self.contract().map(|c| unit.contracts.push(c))
            } else if let Some(t) = self.peek().filter(|t| {
                t.kind == TokenKind::Keyword && UNSUPPORTED_KEYWORDS.contains(&t.text.as_str())
            }) {
                Err(self.unsupported(&format!("'{}'", t.text)))
            } else {
                Err(self.error_here(format!("expected 'contract', found {}", self.found())))
            };
            if let Err(d) = res {
                self.diags.push(d);
                self.recover_top();
                if self.pos == before {
                    self.pos += 1;
                }
            }
        }
        if !self.toks.is_empty() {
            self.pos = self.toks.len();
            unit.span = self.span_from(0);
        }
        unit
    }

    fn pragma(&mut self) -> PResult<Pragma> {
        let start = self.pos;
        self.expect("pragma")?;
        let mut text = String::new();
        let mut prev_end: Option<usize> = None;
        while let Some(t) = self.peek() {
            if t.is(";") {
                break;
            }
            if let Some(end) = prev_end {
                if t.start > end {
                    text.push(' ');
                }
            }
            text.push_str(&t.text);
            prev_end = Some(t.end);
            self.pos += 1;
        }
        self.expect(";")?;
        if text.is_empty() {
            return Err(Diagnostic::error(
                "empty pragma",
                self.toks[start].line,
                self.toks[start].column,
            ));
        }
        Ok(Pragma {
            text,
            span: self.span_from(start),
        })
    }

    fn contract(&mut self) -> PResult<Contract> {
        let start = self.pos;
        self.expect("contract")?;
        let name = self.ident()?;
        if self.at("is") {
            return Err(self.unsupported("inheritance ('is')"));
        }
        self.expect("{")?;
        let mut members = Vec::new();
        loop {
            if self.at("}") {
                self.pos += 1;
                break;
            }
            if self.peek().is_none() {
                return Err(self.error_here("expected '}', found end of input"));
            }
            let before = self.pos;
            match self.member() {
                Ok(m) => members.push(m),
                Err(d) => {
                    self.diags.push(d);
                    self.recover_member();
                    if self.pos == before {
                        self.pos += 1;
                    }
                }
            }
        }
        Ok(Contract {
            name,
            members,
            span: self.span_from(start),
        })
    }

    fn member(&mut self) -> PResult<Member> {
        let t = self.peek().expect("caller checked");
        match t.text.as_str() {
            "function" if t.kind == TokenKind::Keyword => {
                self.function(FunctionKind::Function).map(Member::Function)
            }
            "constructor" if t.kind == TokenKind::Keyword => self
                .function(FunctionKind::Constructor)
                .map(Member::Function),
            "modifier" if t.kind == TokenKind::Keyword => self.modifier_def().map(Member::Modifier),
            "event" if t.kind == TokenKind::Keyword => self.event_def().map(Member::Event),
            _ if t.kind == TokenKind::Keyword
                && UNSUPPORTED_KEYWORDS.contains(&t.text.as_str()) =>
            {
                Err(self.unsupported(&format!("'{}'", t.text)))
            }
            _ if self.at_type_start() => self.state_var().map(Member::StateVar),
            _ => Err(self.error_here(format!("expected contract member, found {}", self.found()))),
        }
    }

    fn at_type_start(&self) -> bool {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Keyword => {
                is_elementary_keyword(&t.text) || t.is("mapping")
            }
            Some(t) => t.kind == TokenKind::Identifier,
            None => false,
        }
    }

    fn state_var(&mut self) -> PResult<StateVar> {
        let start = self.pos;
        let ty = self.type_name()?;
        let mut visibility = None;
        let mut constant = false;
        let mut immutable = false;
        loop {
            if let Some(v) = self.visibility() {
                visibility = Some(v);
            } else if self.eat("constant") {
                constant = true;
            } else if self.eat("immutable") {
                immutable = true;
            } else {
                break;
            }
        }
        let name = self.ident()?;
        let init = if self.eat("=") {
            Some(self.expr()?)
        } else {
            None
        };
        self.expect(";")?;
        Ok(StateVar {
            ty,
            visibility,
            constant,
            immutable,
            name,
            init,
            span: self.span_from(start),
        })
    }

    fn visibility(&mut self) -> Option<Visibility> {
        let v = match self.peek()?.text.as_str() {
            "public" => Visibility::Public,
            "private" => Visibility::Private,
            "internal" => Visibility::Internal,
            "external" => Visibility::External,
            _ => return None,
        };
        self.pos += 1;
        Some(v)
    }

    fn mutability(&mut self) -> Option<Mutability> {
        let m = match self.peek()?.text.as_str() {
            "payable" => Mutability::Payable,
            "view" => Mutability::View,
            "pure" => Mutability::Pure,
            _ => return None,
        };
        self.pos += 1;
        Some(m)
    }

    fn location(&mut self) -> Option<DataLocation> {
        let l = match self.peek()?.text.as_str() {
            "memory" => DataLocation::Memory,
            "storage" => DataLocation::Storage,
            "calldata" => DataLocation::Calldata,
            _ => return None,
        };
        self.pos += 1;
        Some(l)
    }

    fn type_name(&mut self) -> PResult<TypeName> {
        let t = self
            .peek()
            .ok_or_else(|| self.error_here("expected type name, found end of input"))?;
        let mut ty = if t.kind == TokenKind::Keyword && t.is("mapping") {
            self.pos += 1;
            self.expect("(")?;
            let key = self.type_name()?;
            if matches!(key, TypeName::Mapping { .. } | TypeName::Array { .. }) {
                return Err(self.unsupported("mapping key must be an elementary or named type"));
            }
            self.expect("=>")?;
            if self.at("mapping") {
                return Err(self.unsupported("nested mappings"));
            }
            let value = self.type_name()?;
            self.expect(")")?;
            TypeName::Mapping {
                key: Box::new(key),
                value: Box::new(value),
            }
        } else if t.kind == TokenKind::Keyword && is_elementary_keyword(&t.text) {
            self.pos += 1;
            let mut e = Elementary::from_keyword(&t.text).expect("elementary keyword");
            if t.text == "address" && self.at("payable") && !self.at_n(1, "(") {
                self.pos += 1;
                e = Elementary::Address { payable: true };
            }
            TypeName::Elementary(e)
        } else if t.kind == TokenKind::Keyword && t.text == "bytes" {
            return Err(self.unsupported("dynamic 'bytes'"));
        } else if t.kind == TokenKind::Identifier {
            self.pos += 1;
            TypeName::Named(t.text.clone())
        } else {
            return Err(self.error_here(format!("expected type name, found {}", self.found())));
        };
        while self.at("[") {
            self.pos += 1;
            let length = if self.at_kind(TokenKind::Number) {
                let t = self.bump().expect("checked");
                if !t.text.chars().all(|c| c.is_ascii_digit()) {
                    return Err(Diagnostic::error(
                        "array length must be a plain decimal number",
                        t.line,
                        t.column,
                    ));
                }
                Some(t.text.clone())
            } else {
                None
            };
            self.expect("]")?;
            ty = TypeName::Array {
                element: Box::new(ty),
                length,
            };
        }
        Ok(ty)
    }

    fn params(&mut self) -> PResult<Vec<Param>> {
        self.expect("(")?;
        let mut out = Vec::new();
        if self.eat(")") {
            return Ok(out);
        }
        loop {
            let start = self.pos;
            let ty = self.type_name()?;
            let location = self.location();
            let name = if self.at_kind(TokenKind::Identifier) {
                Some(self.ident()?)
            } else {
                None
            };
            out.push(Param {
                ty,
                location,
                name,
                span: self.span_from(start),
            });
            if self.eat(")") {
                return Ok(out);
            }
            self.expect(",")?;
        }
    }

    fn function(&mut self, kind: FunctionKind) -> PResult<Function> {
        let start = self.pos;
        let name = match kind {
            FunctionKind::Function => {
                self.expect("function")?;
                Some(self.ident()?)
            }
            FunctionKind::Constructor => {
                self.expect("constructor")?;
                None
            }
        };
        let params = self.params()?;
        let mut visibility = None;
        let mut mutability = None;
        let mut modifiers = Vec::new();
        let mut returns = Vec::new();
        loop {
            if let Some(v) = self.visibility() {
                visibility = Some(v);
            } else if let Some(m) = self.mutability() {
                mutability = Some(m);
            } else if self.eat("returns") {
                returns = self.params()?;
            } else if self.at("virtual") || self.at("override") {
                return Err(self.unsupported(&format!("'{}'", self.peek().expect("checked").text)));
            } else if self.at_kind(TokenKind::Identifier) {
                let mstart = self.pos;
                let mname = self.ident()?;
                let args = if self.at("(") {
                    Some(self.call_args()?)
                } else {
                    None
                };
                modifiers.push(ModifierInvocation {
                    name: mname,
                    args,
                    span: self.span_from(mstart),
                });
            } else {
                break;
            }
        }
        let body = if self.eat(";") {
            None
        } else {
            Some(self.block()?)
        };
        Ok(Function {
            kind,
            name,
            params,
            visibility,
            mutability,
            modifiers,
            returns,
            body,
            span: self.span_from(start),
        })
    }

    fn modifier_def(&mut self) -> PResult<ModifierDef> {
        let start = self.pos;
        self.expect("modifier")?;
        let name = self.ident()?;
        let params = if self.at("(") {
            self.params()?
        } else {
            Vec::new()
        };
        let body = self.block()?;
        Ok(ModifierDef {
            name,
            params,
            body,
            span: self.span_from(start),
        })
    }

    fn event_def(&mut self) -> PResult<EventDef> {
        let start = self.pos;
        self.expect("event")?;
        let name = self.ident()?;
        self.expect("(")?;
        let mut params = Vec::new();
        if !self.eat(")") {
            loop {
                let pstart = self.pos;
                let ty = self.type_name()?;
                let indexed = self.eat("indexed");
                let pname = if self.at_kind(TokenKind::Identifier) {
                    Some(self.ident()?)
                } else {
                    None
                };
                params.push(EventParam {
                    ty,
                    indexed,
                    name: pname,
                    span: self.span_from(pstart),
                });
                if self.eat(")") {
                    break;
                }
                self.expect(",")?;
            }
        }
        self.expect(";")?;
        Ok(EventDef {
            name,
            params,
            span: self.span_from(start),
        })
    }

    // ---- statements ----

    fn block(&mut self) -> PResult<Block> {
        let start = self.pos;
        self.expect("{")?;
        let mut stmts = Vec::new();
        loop {
            if self.at("}") {
                self.pos += 1;
                break;
            }
            if self.peek().is_none() {
                return Err(self.error_here("expected '}', found end of input"));
            }
            let before = self.pos;
            match self.stmt() {
                Ok(s) => stmts.push(s),
                Err(d) => {
                    self.diags.push(d);
                    self.recover_stmt();
                    if self.pos == before && !self.at("}") {
                        self.pos += 1;
                    }
                }
            }
        }
        Ok(Block {
            stmts,
            span: self.span_from(start),
        })
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let start = self.pos;
        let t = self.peek().expect("caller checked");
        let kind = if t.kind == TokenKind::Punctuation && t.is("{") {
            StmtKind::Block(self.block()?)
        } else if t.kind == TokenKind::Keyword {
            match t.text.as_str() {
                "if" => {
                    self.pos += 1;
                    self.expect("(")?;
                    let cond = self.expr()?;
                    self.expect(")")?;
                    let then_branch = Box::new(self.stmt_or_eof()?);
                    let else_branch = if self.eat("else") {
                        Some(Box::new(self.stmt_or_eof()?))
                    } else {
                        None
                    };
                    StmtKind::If {
                        cond,
                        then_branch,
                        else_branch,
                    }
                }
                "for" => {
                    self.pos += 1;
                    self.expect("(")?;
                    let init = if self.eat(";") {
                        None
                    } else {
                        Some(Box::new(self.simple_stmt()?))
                    };
                    let cond = if self.at(";") {
                        None
                    } else {
                        Some(self.expr()?)
                    };
                    self.expect(";")?;
                    let update = if self.at(")") {
                        None
                    } else {
                        Some(self.expr()?)
                    };
                    self.expect(")")?;
                    let body = Box::new(self.stmt_or_eof()?);
                    StmtKind::For {
                        init,
                        cond,
                        update,
                        body,
                    }
                }
                "while" => {
                    self.pos += 1;
                    self.expect("(")?;
                    let cond = self.expr()?;
                    self.expect(")")?;
                    let body = Box::new(self.stmt_or_eof()?);
                    StmtKind::While { cond, body }
                }
                "emit" => {
                    self.pos += 1;
                    let e = self.expr()?;
                    if !matches!(e.kind, ExprKind::Call { .. }) {
                        return Err(Diagnostic::error(
                            "emit requires an event call",
                            e.span.line,
                            e.span.column,
                        ));
                    }
                    self.expect(";")?;
                    StmtKind::Emit(e)
                }
                "return" => {
                    self.pos += 1;
                    let e = if self.at(";") {
                        None
                    } else {
                        Some(self.expr()?)
                    };
                    self.expect(";")?;
                    StmtKind::Return(e)
                }
                "break" => {
                    self.pos += 1;
                    self.expect(";")?;
                    StmtKind::Break
                }
                "continue" => {
                    self.pos += 1;
                    self.expect(";")?;
                    StmtKind::Continue
                }
                kw if UNSUPPORTED_KEYWORDS.contains(&kw) => {
                    return Err(self.unsupported(&format!("'{kw}'")));
                }
                _ => return self.simple_stmt(),
            }
        } else if t.kind == TokenKind::Identifier && t.text == "_" && self.at_n(1, ";") {
            self.pos += 2;
            StmtKind::Placeholder
        } else {
            return self.simple_stmt();
        };
        Ok(Stmt {
            kind,
            span: self.span_from(start),
        })
    }

    fn stmt_or_eof(&mut self) -> PResult<Stmt> {
        if self.peek().is_none() {
            return Err(self.error_here("expected statement, found end of input"));
        }
        self.stmt()
    }

    /// Variable declaration or expression statement, including the `;`.
    fn simple_stmt(&mut self) -> PResult<Stmt> {
        let start = self.pos;
        if let Some((ty, location, name)) = self.try_var_decl_head() {
            let init = if self.eat("=") {
                Some(self.expr()?)
            } else {
                None
            };
            self.expect(";")?;
            return Ok(Stmt {
                kind: StmtKind::VarDecl {
                    ty,
                    location,
                    name,
                    init,
                },
                span: self.span_from(start),
            });
        }
        let e = self.expr()?;
        self.expect(";")?;
        let kind = match e.kind {
            ExprKind::Call { callee, mut args } if matches!(&callee.kind, ExprKind::Ident(n) if n == "require") =>
            {
                if args.is_empty() || args.len() > 2 {
                    return Err(Diagnostic::error(
                        "require takes a condition and an optional message",
                        e.span.line,
                        e.span.column,
                    ));
                }
                let message = if args.len() == 2 { args.pop() } else { None };
                let cond = args.pop().expect("one arg");
                StmtKind::Require { cond, message }
            }
            kind => StmtKind::Expr(Expr { kind, span: e.span }),
        };
        Ok(Stmt {
            kind,
            span: self.span_from(start),
        })
    }

    fn try_var_decl_head(&mut self) -> Option<(TypeName, Option<DataLocation>, Ident)> {
        if !self.at_type_start() {
            return None;
        }
        let save = self.pos;
        let head = (|| {
            let ty = self.type_name().ok()?;
            let location = self.location();
            if !self.at_kind(TokenKind::Identifier) {
                return None;
            }
            let name = self.ident().ok()?;
            Some((ty, location, name))
        })();
        if head.is_none() {
            self.pos = save;
        }
        head
    }

    // ---- expressions ----

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        let start = self.pos;
        let lhs = self.binary(2)?;
        if let Some(op) = self.peek().and_then(|t| {
            (t.kind == TokenKind::Operator)
                .then(|| AssignOp::from_token(&t.text))
                .flatten()
        }) {
            self.pos += 1;
            let value = self.expr()?;
            return Ok(Expr {
                kind: ExprKind::Assign {
                    op,
                    target: Box::new(lhs),
                    value: Box::new(value),
                },
                span: self.span_from(start),
            });
        }
        if self.at("?") {
            return Err(self.unsupported("conditional operator '?:'"));
        }
        Ok(lhs)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let start = self.pos;
        let mut lhs = self.unary()?;
        while let Some(t) = self.peek() {
            if t.kind != TokenKind::Operator {
                break;
            }
            if matches!(t.text.as_str(), "&" | "|" | "^" | "<<" | ">>" | "**") {
                return Err(self.unsupported(&format!("operator '{}'", t.text)));
            }
            let Some(op) = BinaryOp::from_token(&t.text) else {
                break;
            };
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.pos += 1;
            let rhs = self.binary(prec + 1)?;
            lhs = Expr {
                kind: ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                span: self.span_from(start),
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let start = self.pos;
        let op = match self.peek() {
            Some(t) if t.kind == TokenKind::Operator => match t.text.as_str() {
                "!" => Some(UnaryOp::Not),
                "-" => Some(UnaryOp::Neg),
                "++" => Some(UnaryOp::PreInc),
                "--" => Some(UnaryOp::PreDec),
                "~" => return Err(self.unsupported("operator '~'")),
                _ => None,
            },
            Some(t) if t.is("delete") => return Err(self.unsupported("'delete'")),
            _ => None,
        };
        if let Some(op) = op {
            self.pos += 1;
            let operand = self.unary()?;
            return Ok(Expr {
                kind: ExprKind::Unary {
                    op,
                    operand: Box::new(operand),
                },
                span: self.span_from(start),
            });
        }
        self.postfix()
    }

    fn call_args(&mut self) -> PResult<Vec<Expr>> {
        self.expect("(")?;
        let mut args = Vec::new();
        if self.eat(")") {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat(")") {
                return Ok(args);
            }
            self.expect(",")?;
        }
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let start = self.pos;
        let mut e = self.primary()?;
        loop {
            let kind = if self.at(".") {
                self.pos += 1;
                let member = self.ident()?;
                ExprKind::Member {
                    base: Box::new(e),
                    member,
                }
            } else if self.at("[") {
                self.pos += 1;
                if self.at("]") {
                    return Err(self.error_here("expected index expression, found ']'"));
                }
                let index = self.expr()?;
                self.expect("]")?;
                ExprKind::Index {
                    base: Box::new(e),
                    index: Box::new(index),
                }
            } else if self.at("(") {
                let args = self.call_args()?;
                ExprKind::Call {
                    callee: Box::new(e),
                    args,
                }
            } else if self.at("++") || self.at("--") {
                let op = if self.at("++") {
                    UnaryOp::PostInc
                } else {
                    UnaryOp::PostDec
                };
                self.pos += 1;
                ExprKind::Unary {
                    op,
                    operand: Box::new(e),
                }
            } else if self.at("{")
                && self
                    .peek_n(1)
                    .is_some_and(|t| t.kind == TokenKind::Identifier)
                && self.at_n(2, ":")
            {
                return Err(self.unsupported("call options '{...}'"));
            } else {
                break;
            };
            e = Expr {
                kind,
                span: self.span_from(start),
            };
        }
        Ok(e)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let start = self.pos;
        let Some(t) = self.peek() else {
            return Err(self.error_here("expected expression, found end of input"));
        };
        let kind = match t.kind {
            TokenKind::Number => {
                self.pos += 1;
                let unit = self.peek().and_then(|u| {
                    (u.kind == TokenKind::Keyword)
                        .then(|| Unit::from_keyword(&u.text))
                        .flatten()
                });
                if unit.is_some() {
                    self.pos += 1;
                }
                ExprKind::Number {
                    text: t.text.clone(),
                    unit,
                }
            }
            TokenKind::Hex => {
                self.pos += 1;
                ExprKind::Hex(t.text.clone())
            }
            TokenKind::AddressLiteral => {
                self.pos += 1;
                ExprKind::Address(t.text.clone())
            }
            TokenKind::String => {
                self.pos += 1;
                ExprKind::Str(normalize_string(&t.text))
            }
            TokenKind::Identifier => {
                self.pos += 1;
                ExprKind::Ident(t.text.clone())
            }
            TokenKind::Keyword => match t.text.as_str() {
                "true" | "false" => {
                    self.pos += 1;
                    ExprKind::Bool(t.text == "true")
                }
                "payable" if self.at_n(1, "(") => {
                    self.pos += 1;
                    ExprKind::TypeConversion(Elementary::Address { payable: true })
                }
                kw if is_elementary_keyword(kw) && self.at_n(1, "(") => {
                    self.pos += 1;
                    ExprKind::TypeConversion(Elementary::from_keyword(kw).expect("elementary"))
                }
                kw if UNSUPPORTED_KEYWORDS.contains(&kw) => {
                    return Err(self.unsupported(&format!("'{kw}'")));
                }
                _ => {
                    return Err(
                        self.error_here(format!("expected expression, found {}", self.found()))
                    )
                }
            },
            TokenKind::Punctuation if t.is("(") => {
                self.pos += 1;
                if self.at_type_start() && self.try_var_decl_head().is_some() {
                    return Err(self.unsupported("tuple declarations"));
                }
                let inner = self.expr()?;
                if self.at(",") {
                    return Err(self.unsupported("tuple expressions"));
                }
                self.expect(")")?;
                return Ok(inner);
            }
            _ => {
                return Err(self.error_here(format!("expected expression, found {}", self.found())))
            }
        };
        Ok(Expr {
            kind,
            span: self.span_from(start),
        })
    }
}

/// Strips the quotes and rewrites single-quoted contents so they can be
/// printed between double quotes.
fn normalize_string(text: &str) -> String {
    let quote = text.chars().next().unwrap_or('"');
    let inner = &text[1..text.len() - 1];
    if quote == '"' {
        return inner.to_string();
    }
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some('\'') => out.push('\''),
                Some(n) => {
                    out.push('\\');
                    out.push(n);
                }
                None => out.push('\\'),
            },
            '"' => out.push_str("\\\""),
            c => out.push(c),
        }
    }
    out
}
