use migrisk::minisol::ast::*;
use migrisk::minisol::{parse_source, print, tokenize};
use proptest::prelude::*;

fn id(name: &str) -> Ident {
    Ident {
        name: name.to_string(),
        span: Span::default(),
    }
}

fn ex(kind: ExprKind) -> Expr {
    Expr {
        kind,
        span: Span::default(),
    }
}

fn st(kind: StmtKind) -> Stmt {
    Stmt {
        kind,
        span: Span::default(),
    }
}

const NAMES: &[&str] = &["a", "b", "total", "owner", "xs", "cfg"];

fn name() -> impl Strategy<Value = String> {
    prop::sample::select(NAMES).prop_map(str::to_string)
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        4 => name().prop_map(|n| ex(ExprKind::Ident(n))),
        2 => (0u64..100_000).prop_map(|v| ex(ExprKind::Number { text: v.to_string(), unit: None })),
        1 => (1u64..60, prop::sample::select(vec![Unit::Seconds, Unit::Minutes, Unit::Ether, Unit::Gwei]))
            .prop_map(|(v, u)| ex(ExprKind::Number { text: v.to_string(), unit: Some(u) })),
        1 => "0x[0-9a-f]{2,8}".prop_map(|h| ex(ExprKind::Hex(h))),
        1 => "[a-z ]{0,8}".prop_map(|s| ex(ExprKind::Str(s))),
        1 => any::<bool>().prop_map(|b| ex(ExprKind::Bool(b))),
    ]
}

/// Member chains and calls on plain names, the only callee shapes the
/// printer emits without parentheses.
fn path() -> impl Strategy<Value = Expr> {
    (name(), prop::option::of(name())).prop_map(|(a, m)| {
        let base = ex(ExprKind::Ident(a));
        match m {
            Some(m) => ex(ExprKind::Member {
                base: Box::new(base),
                member: id(&m),
            }),
            None => base,
        }
    })
}

fn unary_op() -> impl Strategy<Value = UnaryOp> {
    prop::sample::select(vec![
        UnaryOp::Not,
        UnaryOp::Neg,
        UnaryOp::PreInc,
        UnaryOp::PreDec,
        UnaryOp::PostInc,
        UnaryOp::PostDec,
    ])
}

fn binary_op() -> impl Strategy<Value = BinaryOp> {
    prop::sample::select(vec![
        BinaryOp::Or,
        BinaryOp::And,
        BinaryOp::Eq,
        BinaryOp::Ne,
        BinaryOp::Lt,
        BinaryOp::Le,
        BinaryOp::Gt,
        BinaryOp::Ge,
        BinaryOp::Add,
        BinaryOp::Sub,
        BinaryOp::Mul,
        BinaryOp::Div,
        BinaryOp::Mod,
    ])
}

fn assign_op() -> impl Strategy<Value = AssignOp> {
    prop::sample::select(vec![
        AssignOp::Assign,
        AssignOp::Add,
        AssignOp::Sub,
        AssignOp::Mul,
        AssignOp::Div,
        AssignOp::Mod,
    ])
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (path(), prop::collection::vec(inner.clone(), 0..3)).prop_map(|(c, args)| ex(
                ExprKind::Call {
                    callee: Box::new(c),
                    args
                }
            )),
            (inner.clone(), name()).prop_map(|(b, m)| ex(ExprKind::Member {
                base: Box::new(b),
                member: id(&m),
            })),
            (inner.clone(), inner.clone()).prop_map(|(b, i)| ex(ExprKind::Index {
                base: Box::new(b),
                index: Box::new(i),
            })),
            (unary_op(), inner.clone()).prop_map(|(op, e)| ex(ExprKind::Unary {
                op,
                operand: Box::new(e)
            })),
            (binary_op(), inner.clone(), inner.clone()).prop_map(|(op, l, r)| ex(
                ExprKind::Binary {
                    op,
                    lhs: Box::new(l),
                    rhs: Box::new(r),
                }
            )),
            (assign_op(), inner.clone(), inner.clone()).prop_map(|(op, t, v)| ex(
                ExprKind::Assign {
                    op,
                    target: Box::new(t),
                    value: Box::new(v),
                }
            )),
            inner.clone().prop_map(|e| ex(ExprKind::Call {
                callee: Box::new(ex(ExprKind::TypeConversion(Elementary::Address {
                    payable: false
                }))),
                args: vec![e],
            })),
        ]
    })
}

fn elementary() -> impl Strategy<Value = Elementary> {
    prop::sample::select(vec![
        Elementary::Uint(256),
        Elementary::Uint(8),
        Elementary::Int(128),
        Elementary::Address { payable: false },
        Elementary::Address { payable: true },
        Elementary::Bool,
        Elementary::String,
        Elementary::Bytes(32),
    ])
}

fn local_type() -> impl Strategy<Value = TypeName> {
    prop_oneof![
        4 => elementary().prop_map(TypeName::Elementary),
        1 => Just(TypeName::Named("Feed".into())),
        1 => elementary().prop_map(|e| TypeName::Array { element: Box::new(TypeName::Elementary(e)), length: None }),
        1 => (elementary(), 1u32..9).prop_map(|(e, n)| TypeName::Array {
            element: Box::new(TypeName::Elementary(e)),
            length: Some(n.to_string()),
        }),
    ]
}

fn var_decl() -> impl Strategy<Value = Stmt> {
    (local_type(), name(), prop::option::of(expr())).prop_map(|(ty, n, init)| {
        st(StmtKind::VarDecl {
            ty,
            location: None,
            name: id(&n),
            init,
        })
    })
}

fn simple() -> impl Strategy<Value = Stmt> {
    prop_oneof![
        3 => expr().prop_map(|e| st(StmtKind::Expr(e))),
        2 => var_decl(),
        2 => (expr(), prop::option::of("[a-z]{1,6}".prop_map(|s| ex(ExprKind::Str(s)))))
            .prop_map(|(cond, message)| st(StmtKind::Require { cond, message })),
        1 => (name(), prop::collection::vec(expr(), 0..3)).prop_map(|(n, args)| st(StmtKind::Emit(ex(ExprKind::Call {
            callee: Box::new(ex(ExprKind::Ident(format!("Ev{n}")))),
            args,
        })))),
        1 => prop::option::of(expr()).prop_map(|e| st(StmtKind::Return(e))),
        1 => Just(st(StmtKind::Break)),
        1 => Just(st(StmtKind::Continue)),
    ]
}

fn stmt() -> impl Strategy<Value = Stmt> {
    simple().prop_recursive(3, 20, 4, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..4).prop_map(|stmts| st(StmtKind::Block(
                Block {
                    stmts,
                    span: Span::default(),
                }
            ))),
            (expr(), inner.clone(), prop::option::of(inner.clone())).prop_map(|(cond, t, e)| {
                // a bare `if` as the then-branch would capture the `else`
                let t = match (&t.kind, &e) {
                    (
                        StmtKind::If {
                            else_branch: None, ..
                        },
                        Some(_),
                    ) => st(StmtKind::Block(Block {
                        stmts: vec![t],
                        span: Span::default(),
                    })),
                    _ => t,
                };
                st(StmtKind::If {
                    cond,
                    then_branch: Box::new(t),
                    else_branch: e.map(Box::new),
                })
            }),
            (
                prop::option::of(prop_oneof![
                    var_decl(),
                    expr().prop_map(|e| st(StmtKind::Expr(e)))
                ]),
                prop::option::of(expr()),
                prop::option::of(expr()),
                inner.clone()
            )
                .prop_map(|(init, cond, update, body)| st(StmtKind::For {
                    init: init.map(Box::new),
                    cond,
                    update,
                    body: Box::new(body),
                })),
            (expr(), inner.clone()).prop_map(|(cond, body)| st(StmtKind::While {
                cond,
                body: Box::new(body)
            })),
        ]
    })
}

fn no_dangling_else(s: &Stmt) -> bool {
    // an `if` without else nested as a then-branch in non-block position,
    // directly followed by an else, cannot be printed unambiguously
    let mut ok = true;
    s.walk(&mut |x| {
        if let StmtKind::If {
            then_branch,
            else_branch: Some(_),
            ..
        } = &x.kind
        {
            let mut t: &Stmt = then_branch;
            loop {
                match &t.kind {
                    StmtKind::If {
                        else_branch: None, ..
                    } => {
                        ok = false;
                        break;
                    }
                    StmtKind::If {
                        else_branch: Some(e),
                        ..
                    } => t = e,
                    StmtKind::For { body, .. } | StmtKind::While { body, .. } => t = body,
                    _ => break,
                }
            }
        }
    });
    ok
}

fn block(stmts: Vec<Stmt>) -> Block {
    Block {
        stmts,
        span: Span::default(),
    }
}

fn param() -> impl Strategy<Value = Param> {
    (elementary(), prop::option::of(name())).prop_map(|(e, n)| Param {
        location: (e == Elementary::String).then_some(DataLocation::Memory),
        ty: TypeName::Elementary(e),
        name: n.map(|n| id(&n)),
        span: Span::default(),
    })
}

fn member() -> impl Strategy<Value = Member> {
    let vis = prop::option::of(prop::sample::select(vec![
        Visibility::Public,
        Visibility::Private,
        Visibility::Internal,
        Visibility::External,
    ]));
    let state_ty = prop_oneof![
        3 => local_type(),
        1 => (elementary(), elementary()).prop_map(|(k, v)| TypeName::Mapping {
            key: Box::new(TypeName::Elementary(k)),
            value: Box::new(TypeName::Elementary(v)),
        }),
    ];
    prop_oneof![
        2 => (state_ty, vis.clone(), any::<bool>(), name(), prop::option::of(expr())).prop_map(
            |(ty, visibility, constant, n, init)| Member::StateVar(StateVar {
                ty,
                visibility,
                constant,
                immutable: false,
                name: id(&n),
                init,
                span: Span::default(),
            })
        ),
        3 => (
            any::<bool>(),
            name(),
            prop::collection::vec(param(), 0..3),
            vis,
            prop::option::of(prop::sample::select(vec![Mutability::Payable, Mutability::View, Mutability::Pure])),
            prop::collection::vec((name(), prop::option::of(prop::collection::vec(expr(), 0..2))), 0..2),
            prop::collection::vec(param(), 0..2),
            prop::collection::vec(stmt(), 0..4),
        )
            .prop_map(|(ctor, n, params, visibility, mutability, mods, returns, body)| {
                Member::Function(Function {
                    kind: if ctor { FunctionKind::Constructor } else { FunctionKind::Function },
                    name: (!ctor).then(|| id(&format!("f{n}"))),
                    params,
                    visibility,
                    mutability,
                    modifiers: mods
                        .into_iter()
                        .map(|(m, args)| ModifierInvocation {
                            name: id(&format!("only{m}")),
                            args,
                            span: Span::default(),
                        })
                        .collect(),
                    returns: if ctor { vec![] } else { returns },
                    body: Some(block(body)),
                    span: Span::default(),
                })
            }),
        1 => (name(), prop::collection::vec(param(), 0..2), prop::collection::vec(stmt(), 0..3)).prop_map(
            |(n, params, mut body)| {
                body.push(st(StmtKind::Placeholder));
                Member::Modifier(ModifierDef {
                    name: id(&format!("only{n}")),
                    params,
                    body: block(body),
                    span: Span::default(),
                })
            }
        ),
        1 => (name(), prop::collection::vec((elementary(), any::<bool>(), prop::option::of(name())), 0..3)).prop_map(
            |(n, ps)| Member::Event(EventDef {
                name: id(&format!("Ev{n}")),
                params: ps
                    .into_iter()
                    .map(|(e, indexed, pn)| EventParam {
                        ty: TypeName::Elementary(e),
                        indexed,
                        name: pn.map(|p| id(&p)),
                        span: Span::default(),
                    })
                    .collect(),
                span: Span::default(),
            })
        ),
    ]
}

fn unit() -> impl Strategy<Value = SourceUnit> {
    (
        any::<bool>(),
        prop::collection::vec(prop::collection::vec(member(), 0..5), 1..3),
    )
        .prop_map(|(pragma, contracts)| SourceUnit {
            pragmas: if pragma {
                vec![Pragma {
                    text: "solidity ^0.8.19".into(),
                    span: Span::default(),
                }]
            } else {
                vec![]
            },
            contracts: contracts
                .into_iter()
                .enumerate()
                .map(|(i, members)| Contract {
                    name: id(&format!("C{i}")),
                    members,
                    span: Span::default(),
                })
                .collect(),
            span: Span::default(),
        })
}

fn no_dangling(u: &SourceUnit) -> bool {
    u.contracts
        .iter()
        .flat_map(|c| &c.members)
        .all(|m| match m {
            Member::Function(f) => f.body.iter().flat_map(|b| &b.stmts).all(no_dangling_else),
            Member::Modifier(md) => md.body.stmts.iter().all(no_dangling_else),
            _ => true,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn parse_print_roundtrip(u in unit().prop_filter("dangling else", no_dangling)) {
        let printed = print(&u);
        let mut back = parse_source(&printed)
            .unwrap_or_else(|d| panic!("printed source failed to parse: {d:?}\n{printed}"));
        back.clear_spans();
        prop_assert_eq!(&back, &u, "{}", printed);
        // printing is a fixed point
        prop_assert_eq!(print(&back), printed);
    }

    #[test]
    fn spans_nest_and_tokens_slice(u in unit().prop_filter("dangling else", no_dangling)) {
        let src = print(&u);
        let toks = tokenize(&src).unwrap();
        for t in &toks {
            prop_assert_eq!(&src[t.start..t.end], t.text.as_str());
        }
        for w in toks.windows(2) {
            prop_assert!(w[0].end <= w[1].start);
        }
        let parsed = parse_source(&src).unwrap();
        for c in &parsed.contracts {
            prop_assert!(parsed.span.contains(&c.span));
            for m in &c.members {
                prop_assert!(c.span.contains(&m.span()));
                let body = match m {
                    Member::Function(f) => f.body.as_ref(),
                    Member::Modifier(md) => Some(&md.body),
                    _ => None,
                };
                if let Some(b) = body {
                    prop_assert!(m.span().contains(&b.span));
                    for s in b.flatten() {
                        prop_assert!(b.span.contains(&s.span));
                        for child in s.children() {
                            prop_assert!(s.span.contains(&child.span));
                        }
                        for e in s.exprs() {
                            prop_assert!(s.span.contains(&e.span));
                            check_expr_nesting(e, &src)?;
                        }
                    }
                }
            }
        }
    }
}

fn check_expr_nesting(e: &Expr, src: &str) -> Result<(), TestCaseError> {
    let line_start = src[..e.span.start].rfind('\n').map_or(0, |i| i + 1);
    prop_assert_eq!(
        e.span.line as usize,
        src[..e.span.start].matches('\n').count() + 1
    );
    prop_assert_eq!(
        e.span.column as usize,
        src[line_start..e.span.start].chars().count() + 1
    );
    for c in e.children() {
        prop_assert!(
            e.span.contains(&c.span),
            "{:?} outside {:?}",
            c.span,
            e.span
        );
        check_expr_nesting(c, src)?;
    }
    Ok(())
}

#[test]
fn strict_mode_rejects_any_diagnostic() {
    assert!(parse_source("contract C { function f() public { x = ; } }").is_err());
    assert!(parse_source("contract C { function f() public { x = 1; } }").is_ok());
}

#[test]
fn unsupported_constructs_error_not_panic() {
    for src in [
        "contract C { function f() public { assembly { } } }",
        "contract C { function f() public { x = a ? b : c; } }",
        "contract C { function f() public { (bool ok, ) = a.call(b); } }",
        "contract C { mapping(address => mapping(address => uint256)) m; }",
        "contract C { function f() public virtual {} }",
        "library L {}",
    ] {
        let err = parse_source(src).unwrap_err();
        assert!(!err.is_empty(), "{src}");
    }
}
