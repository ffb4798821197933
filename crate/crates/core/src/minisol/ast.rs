use serde::{Deserialize, Serialize};

/// Byte range plus the 1-based position of its first character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub column: u32,
}

impl Span {
    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn intersects(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SourceUnit {
    pub pragmas: Vec<Pragma>,
    pub contracts: Vec<Contract>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pragma {
    pub text: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contract {
    pub name: Ident,
    pub members: Vec<Member>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Member {
    StateVar(StateVar),
    Function(Function),
    Modifier(ModifierDef),
    Event(EventDef),
}

impl Member {
    pub fn span(&self) -> Span {
        match self {
            Member::StateVar(v) => v.span,
            Member::Function(f) => f.span,
            Member::Modifier(m) => m.span,
            Member::Event(e) => e.span,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Elementary {
    Uint(u16),
    Int(u16),
    Address { payable: bool },
    Bool,
    String,
    Bytes(u8),
}

impl Elementary {
    pub fn from_keyword(word: &str) -> Option<Self> {
        Some(match word {
            "uint" => Elementary::Uint(256),
            "int" => Elementary::Int(256),
            "address" => Elementary::Address { payable: false },
            "bool" => Elementary::Bool,
            "string" => Elementary::String,
            _ => {
                if let Some(n) = word.strip_prefix("uint").and_then(|r| r.parse().ok()) {
                    Elementary::Uint(n)
                } else if let Some(n) = word.strip_prefix("int").and_then(|r| r.parse().ok()) {
                    Elementary::Int(n)
                } else {
                    Elementary::Bytes(word.strip_prefix("bytes")?.parse().ok()?)
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TypeName {
    Elementary(Elementary),
    /// A contract or interface handle such as `AggregatorV3Interface`.
    Named(String),
    Array {
        element: Box<TypeName>,
        /// Decimal digits of a fixed length, `None` for dynamic arrays.
        length: Option<String>,
    },
    Mapping {
        key: Box<TypeName>,
        value: Box<TypeName>,
    },
}

impl TypeName {
    pub fn is_address(&self) -> bool {
        matches!(self, TypeName::Elementary(Elementary::Address { .. }))
    }

    pub fn is_dynamic_array(&self) -> bool {
        matches!(self, TypeName::Array { length: None, .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Visibility {
    Public,
    Private,
    Internal,
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mutability {
    Payable,
    View,
    Pure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DataLocation {
    Memory,
    Storage,
    Calldata,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateVar {
    pub ty: TypeName,
    pub visibility: Option<Visibility>,
    pub constant: bool,
    pub immutable: bool,
    pub name: Ident,
    pub init: Option<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FunctionKind {
    Function,
    Constructor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Function {
    pub kind: FunctionKind,
    /// `None` for constructors.
    pub name: Option<Ident>,
    pub params: Vec<Param>,
    pub visibility: Option<Visibility>,
    pub mutability: Option<Mutability>,
    pub modifiers: Vec<ModifierInvocation>,
    pub returns: Vec<Param>,
    pub body: Option<Block>,
    pub span: Span,
}

impl Function {
    pub fn display_name(&self) -> &str {
        match (&self.kind, &self.name) {
            (_, Some(n)) => &n.name,
            (FunctionKind::Constructor, None) => "constructor",
            (FunctionKind::Function, None) => "<anonymous>",
        }
    }

    pub fn is_payable(&self) -> bool {
        self.mutability == Some(Mutability::Payable)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Param {
    pub ty: TypeName,
    pub location: Option<DataLocation>,
    pub name: Option<Ident>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModifierInvocation {
    pub name: Ident,
    pub args: Option<Vec<Expr>>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModifierDef {
    pub name: Ident,
    pub params: Vec<Param>,
    pub body: Block,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventDef {
    pub name: Ident,
    pub params: Vec<EventParam>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventParam {
    pub ty: TypeName,
    pub indexed: bool,
    pub name: Option<Ident>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub stmts: Vec<Stmt>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum StmtKind {
    VarDecl {
        ty: TypeName,
        location: Option<DataLocation>,
        name: Ident,
        init: Option<Expr>,
    },
    Expr(Expr),
    Require {
        cond: Expr,
        message: Option<Expr>,
    },
    If {
        cond: Expr,
        then_branch: Box<Stmt>,
        else_branch: Option<Box<Stmt>>,
    },
    For {
        init: Option<Box<Stmt>>,
        cond: Option<Expr>,
        update: Option<Expr>,
        body: Box<Stmt>,
    },
    While {
        cond: Expr,
        body: Box<Stmt>,
    },
    Emit(Expr),
    Return(Option<Expr>),
    Block(Block),
    Break,
    Continue,
    /// `_;` inside a modifier body.
    Placeholder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Unit {
    Wei,
    Gwei,
    Ether,
    Seconds,
    Minutes,
    Hours,
    Days,
    Weeks,
}

impl Unit {
    pub fn from_keyword(word: &str) -> Option<Self> {
        Some(match word {
            "wei" => Unit::Wei,
            "gwei" => Unit::Gwei,
            "ether" => Unit::Ether,
            "seconds" => Unit::Seconds,
            "minutes" => Unit::Minutes,
            "hours" => Unit::Hours,
            "days" => Unit::Days,
            "weeks" => Unit::Weeks,
            _ => return None,
        })
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Unit::Wei => "wei",
            Unit::Gwei => "gwei",
            Unit::Ether => "ether",
            Unit::Seconds => "seconds",
            Unit::Minutes => "minutes",
            Unit::Hours => "hours",
            Unit::Days => "days",
            Unit::Weeks => "weeks",
        }
    }

    pub fn multiplier(self) -> u128 {
        match self {
            Unit::Wei | Unit::Seconds => 1,
            Unit::Gwei => 1_000_000_000,
            Unit::Ether => 1_000_000_000_000_000_000,
            Unit::Minutes => 60,
            Unit::Hours => 3600,
            Unit::Days => 86_400,
            Unit::Weeks => 604_800,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnaryOp {
    Not,
    Neg,
    PreInc,
    PreDec,
    PostInc,
    PostDec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinaryOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

impl BinaryOp {
    pub fn from_token(text: &str) -> Option<Self> {
        Some(match text {
            "||" => BinaryOp::Or,
            "&&" => BinaryOp::And,
            "==" => BinaryOp::Eq,
            "!=" => BinaryOp::Ne,
            "<" => BinaryOp::Lt,
            "<=" => BinaryOp::Le,
            ">" => BinaryOp::Gt,
            ">=" => BinaryOp::Ge,
            "+" => BinaryOp::Add,
            "-" => BinaryOp::Sub,
            "*" => BinaryOp::Mul,
            "/" => BinaryOp::Div,
            "%" => BinaryOp::Mod,
            _ => return None,
        })
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Or => "||",
            BinaryOp::And => "&&",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Mod => "%",
        }
    }

    /// Binding strength; larger binds tighter. All binary ops are
    /// left-associative.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 2,
            BinaryOp::And => 3,
            BinaryOp::Eq | BinaryOp::Ne => 4,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => 5,
            BinaryOp::Add | BinaryOp::Sub => 6,
            BinaryOp::Mul | BinaryOp::Div | BinaryOp::Mod => 7,
        }
    }

    pub fn is_equality(self) -> bool {
        matches!(self, BinaryOp::Eq | BinaryOp::Ne)
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinaryOp::Eq | BinaryOp::Ne | BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AssignOp {
    Assign,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

impl AssignOp {
    pub fn from_token(text: &str) -> Option<Self> {
        Some(match text {
            "=" => AssignOp::Assign,
            "+=" => AssignOp::Add,
            "-=" => AssignOp::Sub,
            "*=" => AssignOp::Mul,
            "/=" => AssignOp::Div,
            "%=" => AssignOp::Mod,
            _ => return None,
        })
    }

    pub fn symbol(self) -> &'static str {
        match self {
            AssignOp::Assign => "=",
            AssignOp::Add => "+=",
            AssignOp::Sub => "-=",
            AssignOp::Mul => "*=",
            AssignOp::Div => "/=",
            AssignOp::Mod => "%=",
        }
    }
}

pub const PREC_ASSIGN: u8 = 1;
pub const PREC_PREFIX: u8 = 8;
pub const PREC_POSTFIX: u8 = 9;
pub const PREC_ATOM: u8 = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExprKind {
    Number {
        text: String,
        unit: Option<Unit>,
    },
    Hex(String),
    Address(String),
    /// Contents between double quotes, escapes kept verbatim.
    Str(String),
    Bool(bool),
    Ident(String),
    /// Elementary type used as a conversion callee, e.g. `address(0)`,
    /// `payable(x)`.
    TypeConversion(Elementary),
    Member {
        base: Box<Expr>,
        member: Ident,
    },
    Index {
        base: Box<Expr>,
        index: Box<Expr>,
    },
    Call {
        callee: Box<Expr>,
        args: Vec<Expr>,
    },
    Unary {
        op: UnaryOp,
        operand: Box<Expr>,
    },
    Binary {
        op: BinaryOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Assign {
        op: AssignOp,
        target: Box<Expr>,
        value: Box<Expr>,
    },
}

impl Expr {
    pub fn precedence(&self) -> u8 {
        match &self.kind {
            ExprKind::Assign { .. } => PREC_ASSIGN,
            ExprKind::Binary { op, .. } => op.precedence(),
            ExprKind::Unary { op, .. } => match op {
                UnaryOp::PostInc | UnaryOp::PostDec => PREC_POSTFIX,
                _ => PREC_PREFIX,
            },
            ExprKind::Member { .. } | ExprKind::Index { .. } | ExprKind::Call { .. } => {
                PREC_POSTFIX
            }
            _ => PREC_ATOM,
        }
    }

    /// Numeric value of a literal with its unit applied. `None` for
    /// non-literals, fractional results and overflow.
    pub fn literal_value(&self) -> Option<u128> {
        match &self.kind {
            ExprKind::Number { text, unit } => {
                let base = parse_decimal(text)?;
                let mul = unit.map_or(1, Unit::multiplier);
                scale(base, mul)
            }
            ExprKind::Hex(digits) | ExprKind::Address(digits) => {
                let d = digits[2..].replace('_', "");
                let significant = d.trim_start_matches('0');
                match significant.len() {
                    0 => Some(0),
                    1..=32 => u128::from_str_radix(significant, 16).ok(),
                    _ => None,
                }
            }
            _ => None,
        }
    }

    /// `base.member` where `base` is the identifier `object`.
    pub fn is_member_of(&self, object: &str, member: &str) -> bool {
        match &self.kind {
            ExprKind::Member { base, member: m } => {
                m.name == member && matches!(&base.kind, ExprKind::Ident(n) if n == object)
            }
            _ => false,
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(
            self.kind,
            ExprKind::Number { .. } | ExprKind::Hex(_) | ExprKind::Address(_)
        )
    }

    /// Direct children in source order.
    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Member { base, .. } => vec![base],
            ExprKind::Index { base, index } => vec![base, index],
            ExprKind::Call { callee, args } => {
                let mut v: Vec<&Expr> = vec![callee];
                v.extend(args.iter());
                v
            }
            ExprKind::Unary { operand, .. } => vec![operand],
            ExprKind::Binary { lhs, rhs, .. } => vec![lhs, rhs],
            ExprKind::Assign { target, value, .. } => vec![target, value],
            _ => vec![],
        }
    }

    /// Pre-order walk over this expression and all sub-expressions.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    pub fn any(&self, pred: &dyn Fn(&Expr) -> bool) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= pred(e));
        found
    }
}

/// Parses decimal text with optional fraction and exponent, e.g. `1.5e3`.
/// Returns (mantissa, power of ten) so units can scale fractions exactly.
fn parse_decimal(text: &str) -> Option<(u128, i32)> {
    let t = text.replace('_', "");
    let (mant, exp) = match t.split_once(['e', 'E']) {
        Some((m, e)) => (m.to_string(), e.parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (whole, frac) = match mant.split_once('.') {
        Some((w, f)) => (w.to_string(), f.to_string()),
        None => (mant, String::new()),
    };
    let digits = format!("{whole}{frac}");
    let m: u128 = digits.parse().ok()?;
    Some((m, exp - frac.len() as i32))
}

fn scale((mantissa, pow10): (u128, i32), mul: u128) -> Option<u128> {
    let mut v = mantissa.checked_mul(mul)?;
    if pow10 >= 0 {
        for _ in 0..pow10 {
            v = v.checked_mul(10)?;
        }
        Some(v)
    } else {
        for _ in 0..(-pow10) {
            if v % 10 != 0 {
                return None;
            }
            v /= 10;
        }
        Some(v)
    }
}

impl Stmt {
    /// Expressions that belong directly to this statement (not nested
    /// statements).
    pub fn exprs(&self) -> Vec<&Expr> {
        match &self.kind {
            StmtKind::VarDecl { init, .. } => init.iter().collect(),
            StmtKind::Expr(e) | StmtKind::Emit(e) => vec![e],
            StmtKind::Require { cond, message } => {
                let mut v = vec![cond];
                v.extend(message.iter());
                v
            }
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => vec![cond],
            StmtKind::For { cond, update, .. } => cond.iter().chain(update.iter()).collect(),
            StmtKind::Return(e) => e.iter().collect(),
            _ => vec![],
        }
    }

    /// Nested statements in source order.
    pub fn children(&self) -> Vec<&Stmt> {
        match &self.kind {
            StmtKind::If {
                then_branch,
                else_branch,
                ..
            } => {
                let mut v: Vec<&Stmt> = vec![then_branch];
                v.extend(else_branch.as_deref());
                v
            }
            StmtKind::For { init, body, .. } => {
                let mut v: Vec<&Stmt> = init.as_deref().into_iter().collect();
                v.push(body);
                v
            }
            StmtKind::While { body, .. } => vec![body],
            StmtKind::Block(b) => b.stmts.iter().collect(),
            _ => vec![],
        }
    }

    /// Pre-order walk over this statement and all nested statements.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Stmt)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }
}

impl Block {
    /// All statements in pre-order (source order).
    pub fn flatten(&self) -> Vec<&Stmt> {
        let mut out = Vec::new();
        for s in &self.stmts {
            s.walk(&mut |s| out.push(s));
        }
        out
    }
}

impl SourceUnit {
    /// Resets every span to the default so two trees can be compared by
    /// structure alone.
    pub fn clear_spans(&mut self) {
        self.span = Span::default();
        for p in &mut self.pragmas {
            p.span = Span::default();
        }
        for c in &mut self.contracts {
            c.span = Span::default();
            c.name.span = Span::default();
            for m in &mut c.members {
                clear_member(m);
            }
        }
    }
}

fn clear_member(m: &mut Member) {
    match m {
        Member::StateVar(v) => {
            v.span = Span::default();
            v.name.span = Span::default();
            if let Some(e) = &mut v.init {
                clear_expr(e);
            }
        }
        Member::Function(f) => {
            f.span = Span::default();
            if let Some(n) = &mut f.name {
                n.span = Span::default();
            }
            f.params
                .iter_mut()
                .chain(f.returns.iter_mut())
                .for_each(clear_param);
            for mi in &mut f.modifiers {
                mi.span = Span::default();
                mi.name.span = Span::default();
                for a in mi.args.iter_mut().flatten() {
                    clear_expr(a);
                }
            }
            if let Some(b) = &mut f.body {
                clear_block(b);
            }
        }
        Member::Modifier(md) => {
            md.span = Span::default();
            md.name.span = Span::default();
            md.params.iter_mut().for_each(clear_param);
            clear_block(&mut md.body);
        }
        Member::Event(e) => {
            e.span = Span::default();
            e.name.span = Span::default();
            for p in &mut e.params {
                p.span = Span::default();
                if let Some(n) = &mut p.name {
                    n.span = Span::default();
                }
            }
        }
    }
}

fn clear_param(p: &mut Param) {
    p.span = Span::default();
    if let Some(n) = &mut p.name {
        n.span = Span::default();
    }
}

fn clear_block(b: &mut Block) {
    b.span = Span::default();
    b.stmts.iter_mut().for_each(clear_stmt);
}

fn clear_stmt(s: &mut Stmt) {
    s.span = Span::default();
    match &mut s.kind {
        StmtKind::VarDecl { name, init, .. } => {
            name.span = Span::default();
            if let Some(e) = init {
                clear_expr(e);
            }
        }
        StmtKind::Expr(e) | StmtKind::Emit(e) => clear_expr(e),
        StmtKind::Require { cond, message } => {
            clear_expr(cond);
            if let Some(m) = message {
                clear_expr(m);
            }
        }
        StmtKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            clear_expr(cond);
            clear_stmt(then_branch);
            if let Some(e) = else_branch {
                clear_stmt(e);
            }
        }
        StmtKind::For {
            init,
            cond,
            update,
            body,
        } => {
            if let Some(i) = init {
                clear_stmt(i);
            }
            if let Some(c) = cond {
                clear_expr(c);
            }
            if let Some(u) = update {
                clear_expr(u);
            }
            clear_stmt(body);
        }
        StmtKind::While { cond, body } => {
            clear_expr(cond);
            clear_stmt(body);
        }
        StmtKind::Return(e) => {
            if let Some(e) = e {
                clear_expr(e);
            }
        }
        StmtKind::Block(b) => clear_block(b),
        StmtKind::Break | StmtKind::Continue | StmtKind::Placeholder => {}
    }
}

pub(crate) fn clear_expr(e: &mut Expr) {
    e.span = Span::default();
    match &mut e.kind {
        ExprKind::Member { base, member } => {
            member.span = Span::default();
            clear_expr(base);
        }
        ExprKind::Index { base, index } => {
            clear_expr(base);
            clear_expr(index);
        }
        ExprKind::Call { callee, args } => {
            clear_expr(callee);
            args.iter_mut().for_each(clear_expr);
        }
        ExprKind::Unary { operand, .. } => clear_expr(operand),
        ExprKind::Binary { lhs, rhs, .. } => {
            clear_expr(lhs);
            clear_expr(rhs);
        }
        ExprKind::Assign { target, value, .. } => {
            clear_expr(target);
            clear_expr(value);
        }
        _ => {}
    }
}
