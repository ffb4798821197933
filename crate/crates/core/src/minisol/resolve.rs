//! Name resolution: binds every identifier expression to its declaration.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::ast::*;

/// Globals that resolve to nothing in the source.
pub const GLOBALS: &[&str] = &[
    "msg",
    "block",
    "tx",
    "this",
    "now",
    "require",
    "revert",
    "assert",
    "keccak256",
    "sha256",
    "abi",
    "gasleft",
    "blockhash",
    "selfdestruct",
    "ecrecover",
    "addmod",
    "mulmod",
];

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Binding {
    /// Index into the contract's member list.
    StateVar {
        contract: usize,
        member: usize,
    },
    Function {
        contract: usize,
        member: usize,
    },
    Modifier {
        contract: usize,
        member: usize,
    },
    Event {
        contract: usize,
        member: usize,
    },
    Contract {
        contract: usize,
    },
    /// Parameter or named return; byte offset of its declaration.
    Param {
        decl: usize,
    },
    Local {
        decl: usize,
    },
    /// Not declared in this unit. `global` marks built-ins such as `msg`.
    Free {
        global: bool,
    },
}

#[derive(Debug, Clone, Default)]
pub struct Resolution {
    /// Keyed by the identifier's start offset.
    bindings: BTreeMap<usize, Binding>,
}

impl Resolution {
    pub fn binding_at(&self, offset: usize) -> Option<&Binding> {
        self.bindings.get(&offset)
    }

    pub fn lookup(&self, e: &Expr) -> Option<&Binding> {
        match e.kind {
            ExprKind::Ident(_) => self.binding_at(e.span.start),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Binding)> {
        self.bindings.iter().map(|(k, v)| (*k, v))
    }
}

struct Resolver<'a> {
    unit: &'a SourceUnit,
    members: HashMap<&'a str, Binding>,
    scopes: Vec<HashMap<&'a str, Binding>>,
    out: Resolution,
}

pub fn resolve(unit: &SourceUnit) -> Resolution {
    let mut r = Resolver {
        unit,
        members: HashMap::new(),
        scopes: Vec::new(),
        out: Resolution::default(),
    };
    for (ci, c) in unit.contracts.iter().enumerate() {
        r.members.clear();
        for (mi, m) in c.members.iter().enumerate() {
            let (name, b) = match m {
                Member::StateVar(v) => (
                    v.name.name.as_str(),
                    Binding::StateVar {
                        contract: ci,
                        member: mi,
                    },
                ),
                Member::Function(f) => match &f.name {
                    Some(n) => (
                        n.name.as_str(),
                        Binding::Function {
                            contract: ci,
                            member: mi,
                        },
                    ),
                    None => continue,
                },
                Member::Modifier(md) => (
                    md.name.name.as_str(),
                    Binding::Modifier {
                        contract: ci,
                        member: mi,
                    },
                ),
                Member::Event(e) => (
                    e.name.name.as_str(),
                    Binding::Event {
                        contract: ci,
                        member: mi,
                    },
                ),
            };
            r.members.entry(name).or_insert(b);
        }
        for m in &c.members {
            r.member(m);
        }
    }
    r.out
}

impl<'a> Resolver<'a> {
    fn lookup(&self, name: &str) -> Binding {
        for scope in self.scopes.iter().rev() {
            if let Some(b) = scope.get(name) {
                return b.clone();
            }
        }
        if let Some(b) = self.members.get(name) {
            return b.clone();
        }
        if let Some(ci) = self.unit.contracts.iter().position(|c| c.name.name == name) {
            return Binding::Contract { contract: ci };
        }
        Binding::Free {
            global: GLOBALS.contains(&name),
        }
    }

    fn declare(&mut self, name: &'a Ident, local: bool) {
        let b = if local {
            Binding::Local {
                decl: name.span.start,
            }
        } else {
            Binding::Param {
                decl: name.span.start,
            }
        };
        self.scopes
            .last_mut()
            .expect("scope open")
            .insert(name.name.as_str(), b);
    }

    fn member(&mut self, m: &'a Member) {
        match m {
            Member::StateVar(v) => {
                if let Some(e) = &v.init {
                    self.expr(e);
                }
            }
            Member::Function(f) => {
                self.scopes.push(HashMap::new());
                for p in f.params.iter().chain(&f.returns) {
                    if let Some(n) = &p.name {
                        self.declare(n, false);
                    }
                }
                for mi in &f.modifiers {
                    let b = self.lookup(&mi.name.name);
                    self.out.bindings.insert(mi.name.span.start, b);
                    for a in mi.args.iter().flatten() {
                        self.expr(a);
                    }
                }
                if let Some(b) = &f.body {
                    self.block(b);
                }
                self.scopes.pop();
            }
            Member::Modifier(md) => {
                self.scopes.push(HashMap::new());
                for p in &md.params {
                    if let Some(n) = &p.name {
                        self.declare(n, false);
                    }
                }
                self.block(&md.body);
                self.scopes.pop();
            }
            Member::Event(_) => {}
        }
    }

    fn block(&mut self, b: &'a Block) {
        self.scopes.push(HashMap::new());
        for s in &b.stmts {
            self.stmt(s);
        }
        self.scopes.pop();
    }

    fn scoped_stmt(&mut self, s: &'a Stmt) {
        self.scopes.push(HashMap::new());
        self.stmt(s);
        self.scopes.pop();
    }

    fn stmt(&mut self, s: &'a Stmt) {
        match &s.kind {
            StmtKind::VarDecl { name, init, .. } => {
                if let Some(e) = init {
                    self.expr(e);
                }
                self.declare(name, true);
            }
            StmtKind::Expr(e) | StmtKind::Emit(e) => self.expr(e),
            StmtKind::Require { cond, message } => {
                self.expr(cond);
                if let Some(m) = message {
                    self.expr(m);
                }
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                self.expr(cond);
                self.scoped_stmt(then_branch);
                if let Some(e) = else_branch {
                    self.scoped_stmt(e);
                }
            }
            StmtKind::For {
                init,
                cond,
                update,
                body,
            } => {
                self.scopes.push(HashMap::new());
                if let Some(i) = init {
                    self.stmt(i);
                }
                if let Some(c) = cond {
                    self.expr(c);
                }
                if let Some(u) = update {
                    self.expr(u);
                }
                self.scoped_stmt(body);
                self.scopes.pop();
            }
            StmtKind::While { cond, body } => {
                self.expr(cond);
                self.scoped_stmt(body);
            }
            StmtKind::Return(e) => {
                if let Some(e) = e {
                    self.expr(e);
                }
            }
            StmtKind::Block(b) => self.block(b),
            StmtKind::Break | StmtKind::Continue | StmtKind::Placeholder => {}
        }
    }

    fn expr(&mut self, e: &'a Expr) {
        e.walk(&mut |x| {
            if let ExprKind::Ident(n) = &x.kind {
                let b = self.lookup(n);
                self.out.bindings.insert(x.span.start, b);
            }
        });
    }
}
