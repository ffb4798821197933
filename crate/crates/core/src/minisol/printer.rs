//! Canonical pretty-printer. Output re-parses to the same tree modulo spans,
//! using four-space indentation and the fewest parentheses that preserve
//! structure.

use std::fmt::Write;

use super::ast::*;

pub fn print(unit: &SourceUnit) -> String {
    let mut out = String::new();
    for p in &unit.pragmas {
        let _ = writeln!(out, "pragma {};", p.text);
    }
    for (i, c) in unit.contracts.iter().enumerate() {
        if i > 0 || !unit.pragmas.is_empty() {
            out.push('\n');
        }
        print_contract(&mut out, c);
    }
    out
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

fn print_contract(out: &mut String, c: &Contract) {
    let _ = writeln!(out, "contract {} {{", c.name.name);
    let mut prev: Option<&Member> = None;
    for m in &c.members {
        if let Some(p) = prev {
            let grouped = matches!(
                (p, m),
                (Member::StateVar(_), Member::StateVar(_)) | (Member::Event(_), Member::Event(_))
            );
            if !grouped {
                out.push('\n');
            }
        }
        print_member(out, m);
        prev = Some(m);
    }
    out.push_str("}\n");
}

fn print_member(out: &mut String, m: &Member) {
    match m {
        Member::StateVar(v) => {
            indent(out, 1);
            out.push_str(&type_name(&v.ty));
            if let Some(vis) = v.visibility {
                out.push(' ');
                out.push_str(visibility(vis));
            }
            if v.constant {
                out.push_str(" constant");
            }
            if v.immutable {
                out.push_str(" immutable");
            }
            out.push(' ');
            out.push_str(&v.name.name);
            if let Some(e) = &v.init {
                out.push_str(" = ");
                out.push_str(&expr(e));
            }
            out.push_str(";\n");
        }
        Member::Event(e) => {
            indent(out, 1);
            let params: Vec<String> = e
                .params
                .iter()
                .map(|p| {
                    let mut s = type_name(&p.ty);
                    if p.indexed {
                        s.push_str(" indexed");
                    }
                    if let Some(n) = &p.name {
                        s.push(' ');
                        s.push_str(&n.name);
                    }
                    s
                })
                .collect();
            let _ = writeln!(out, "event {}({});", e.name.name, params.join(", "));
        }
        Member::Modifier(md) => {
            indent(out, 1);
            let _ = write!(out, "modifier {}({}) ", md.name.name, params(&md.params));
            print_block(out, &md.body, 1);
            out.push('\n');
        }
        Member::Function(f) => {
            indent(out, 1);
            match f.kind {
                FunctionKind::Constructor => out.push_str("constructor"),
                FunctionKind::Function => {
                    out.push_str("function ");
                    out.push_str(f.display_name());
                }
            }
            let _ = write!(out, "({})", params(&f.params));
            if let Some(v) = f.visibility {
                out.push(' ');
                out.push_str(visibility(v));
            }
            if let Some(m) = f.mutability {
                out.push(' ');
                out.push_str(match m {
                    Mutability::Payable => "payable",
                    Mutability::View => "view",
                    Mutability::Pure => "pure",
                });
            }
            for mi in &f.modifiers {
                out.push(' ');
                out.push_str(&mi.name.name);
                if let Some(args) = &mi.args {
                    let _ = write!(out, "({})", args_list(args));
                }
            }
            if !f.returns.is_empty() {
                let _ = write!(out, " returns ({})", params(&f.returns));
            }
            match &f.body {
                Some(b) => {
                    out.push(' ');
                    print_block(out, b, 1);
                    out.push('\n');
                }
                None => out.push_str(";\n"),
            }
        }
    }
}

fn params(ps: &[Param]) -> String {
    ps.iter()
        .map(|p| {
            let mut s = type_name(&p.ty);
            if let Some(l) = p.location {
                s.push(' ');
                s.push_str(location(l));
            }
            if let Some(n) = &p.name {
                s.push(' ');
                s.push_str(&n.name);
            }
            s
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn visibility(v: Visibility) -> &'static str {
    match v {
        Visibility::Public => "public",
        Visibility::Private => "private",
        Visibility::Internal => "internal",
        Visibility::External => "external",
    }
}

fn location(l: DataLocation) -> &'static str {
    match l {
        DataLocation::Memory => "memory",
        DataLocation::Storage => "storage",
        DataLocation::Calldata => "calldata",
    }
}

fn elementary(e: Elementary) -> String {
    match e {
        Elementary::Uint(n) => format!("uint{n}"),
        Elementary::Int(n) => format!("int{n}"),
        Elementary::Address { payable: false } => "address".into(),
        Elementary::Address { payable: true } => "address payable".into(),
        Elementary::Bool => "bool".into(),
        Elementary::String => "string".into(),
        Elementary::Bytes(n) => format!("bytes{n}"),
    }
}

pub fn type_name(t: &TypeName) -> String {
    match t {
        TypeName::Elementary(e) => elementary(*e),
        TypeName::Named(n) => n.clone(),
        TypeName::Array { element, length } => {
            format!(
                "{}[{}]",
                type_name(element),
                length.as_deref().unwrap_or("")
            )
        }
        TypeName::Mapping { key, value } => {
            format!("mapping({} => {})", type_name(key), type_name(value))
        }
    }
}

/// Writes `{ ... }` starting at the cursor; the closing brace is indented
/// to `level`, with no trailing newline.
fn print_block(out: &mut String, b: &Block, level: usize) {
    out.push_str("{\n");
    for s in &b.stmts {
        indent(out, level + 1);
        print_stmt(out, s, level + 1);
        out.push('\n');
    }
    indent(out, level);
    out.push('}');
}

/// Body of `if`/`for`/`while`: blocks stay on the header line, anything
/// else goes on its own indented line.
fn print_body(out: &mut String, s: &Stmt, level: usize) {
    match &s.kind {
        StmtKind::Block(b) => {
            out.push(' ');
            print_block(out, b, level);
        }
        _ => {
            out.push('\n');
            indent(out, level + 1);
            print_stmt(out, s, level + 1);
        }
    }
}

/// Writes one statement starting at the cursor (indentation already
/// written), without a trailing newline.
fn print_stmt(out: &mut String, s: &Stmt, level: usize) {
    match &s.kind {
        StmtKind::VarDecl { .. } | StmtKind::Expr(_) => {
            out.push_str(&simple_stmt(s));
            out.push(';');
        }
        StmtKind::Require { cond, message } => {
            out.push_str("require(");
            out.push_str(&expr(cond));
            if let Some(m) = message {
                out.push_str(", ");
                out.push_str(&expr(m));
            }
            out.push_str(");");
        }
        StmtKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            let _ = write!(out, "if ({})", expr(cond));
            print_body(out, then_branch, level);
            if let Some(e) = else_branch {
                if matches!(then_branch.kind, StmtKind::Block(_)) {
                    out.push_str(" else");
                } else {
                    out.push('\n');
                    indent(out, level);
                    out.push_str("else");
                }
                match &e.kind {
                    StmtKind::If { .. } => {
                        out.push(' ');
                        print_stmt(out, e, level);
                    }
                    _ => print_body(out, e, level),
                }
            }
        }
        StmtKind::For {
            init,
            cond,
            update,
            body,
        } => {
            let init = init.as_deref().map(simple_stmt).unwrap_or_default();
            let cond = cond.as_ref().map(expr).unwrap_or_default();
            let update = update.as_ref().map(expr).unwrap_or_default();
            let _ = write!(out, "for ({init}; {cond}; {update})");
            print_body(out, body, level);
        }
        StmtKind::While { cond, body } => {
            let _ = write!(out, "while ({})", expr(cond));
            print_body(out, body, level);
        }
        StmtKind::Emit(e) => {
            let _ = write!(out, "emit {};", expr(e));
        }
        StmtKind::Return(None) => out.push_str("return;"),
        StmtKind::Return(Some(e)) => {
            let _ = write!(out, "return {};", expr(e));
        }
        StmtKind::Block(b) => print_block(out, b, level),
        StmtKind::Break => out.push_str("break;"),
        StmtKind::Continue => out.push_str("continue;"),
        StmtKind::Placeholder => out.push_str("_;"),
    }
}

/// Variable declaration or expression statement without the `;`.
fn simple_stmt(s: &Stmt) -> String {
    match &s.kind {
        StmtKind::VarDecl {
            ty,
            location: loc,
            name,
            init,
        } => {
            let mut out = type_name(ty);
            if let Some(l) = loc {
                out.push(' ');
                out.push_str(location(*l));
            }
            out.push(' ');
            out.push_str(&name.name);
            if let Some(e) = init {
                out.push_str(" = ");
                out.push_str(&expr(e));
            }
            out
        }
        StmtKind::Expr(e) => expr(e),
        _ => {
            let mut out = String::new();
            print_stmt(&mut out, s, 0);
            out
        }
    }
}

fn args_list(args: &[Expr]) -> String {
    args.iter().map(expr).collect::<Vec<_>>().join(", ")
}

fn wrap(e: &Expr, parens: bool) -> String {
    let s = expr(e);
    if parens {
        format!("({s})")
    } else {
        s
    }
}

pub fn expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Number { text, unit } => match unit {
            Some(u) => format!("{text} {}", u.keyword()),
            None => text.clone(),
        },
        ExprKind::Hex(t) | ExprKind::Address(t) => t.clone(),
        ExprKind::Str(s) => format!("\"{s}\""),
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Ident(n) => n.clone(),
        ExprKind::TypeConversion(Elementary::Address { payable: true }) => "payable".into(),
        ExprKind::TypeConversion(t) => elementary(*t),
        ExprKind::Member { base, member } => {
            format!(
                "{}.{}",
                wrap(base, base.precedence() < PREC_POSTFIX),
                member.name
            )
        }
        ExprKind::Index { base, index } => {
            format!(
                "{}[{}]",
                wrap(base, base.precedence() < PREC_POSTFIX),
                expr(index)
            )
        }
        ExprKind::Call { callee, args } => {
            format!(
                "{}({})",
                wrap(callee, callee.precedence() < PREC_POSTFIX),
                args_list(args)
            )
        }
        ExprKind::Unary { op, operand } => match op {
            UnaryOp::PostInc | UnaryOp::PostDec => {
                let sym = if *op == UnaryOp::PostInc { "++" } else { "--" };
                format!(
                    "{}{sym}",
                    wrap(operand, operand.precedence() < PREC_POSTFIX)
                )
            }
            _ => {
                let sym = match op {
                    UnaryOp::Not => "!",
                    UnaryOp::Neg => "-",
                    UnaryOp::PreInc => "++",
                    _ => "--",
                };
                let mut inner = wrap(operand, operand.precedence() < PREC_PREFIX);
                if *op == UnaryOp::Neg && inner.starts_with('-') {
                    inner = format!("({inner})");
                }
                format!("{sym}{inner}")
            }
        },
        ExprKind::Binary { op, lhs, rhs } => {
            let p = op.precedence();
            format!(
                "{} {} {}",
                wrap(lhs, lhs.precedence() < p),
                op.symbol(),
                wrap(rhs, rhs.precedence() <= p)
            )
        }
        ExprKind::Assign { op, target, value } => {
            format!(
                "{} {} {}",
                wrap(target, target.precedence() <= PREC_ASSIGN),
                op.symbol(),
                expr(value)
            )
        }
    }
}
