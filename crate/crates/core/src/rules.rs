//! Migration risk rules over MiniSol syntax trees, and the migration
//! checklist built from their findings.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::minisol::ast::*;
use crate::minisol::resolve::{resolve, Binding, Resolution};
use crate::minisol::{parse_source, Diagnostic};

pub const FINDINGS_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    SequencerStaleness,
    TimeLogic,
    AliasPermission,
    GasDos,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::SequencerStaleness => "sequencer_staleness",
            Category::TimeLogic => "time_logic",
            Category::AliasPermission => "alias_permission",
            Category::GasDos => "gas_dos",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    High,
    Medium,
    Info,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::High => "high",
            Severity::Medium => "medium",
            Severity::Info => "info",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rule {
    pub id: &'static str,
    pub category: Category,
    pub severity: Severity,
    pub description: &'static str,
    pub remediation: &'static str,
}

pub const SEQ_001: &str = "ARB-SEQ-001";
pub const TIME_001: &str = "ARB-TIME-001";
pub const TIME_002: &str = "ARB-TIME-002";
pub const TIME_003: &str = "ARB-TIME-003";
pub const ALIAS_001: &str = "ARB-ALIAS-001";
pub const DOS_001: &str = "ARB-DOS-001";
pub const DOS_002: &str = "ARB-DOS-002";

pub const RULE_IDS: [&str; 7] = [
    SEQ_001, TIME_001, TIME_002, TIME_003, ALIAS_001, DOS_001, DOS_002,
];

pub fn rule_catalog() -> Vec<Rule> {
    vec![
        Rule {
            id: SEQ_001,
            category: Category::SequencerStaleness,
            severity: Severity::High,
            description: "Oracle price read with no earlier sequencer uptime check in the same function.",
            remediation: "Chainlink L2 Sequencer Uptime Feeds can be used: confirm the sequencer is up \
                          (and past its grace period) before trusting off-chain data.",
        },
        Rule {
            id: TIME_001,
            category: Category::TimeLogic,
            severity: Severity::High,
            description: "Strict equality against block.number. On Arbitrum block.number is the L1 block \
                          number as synced by the sequencer and skips values, so the condition may never hold.",
            remediation: "Use range comparisons instead of equality, and avoid block.number for \
                          time-critical logic.",
        },
        Rule {
            id: TIME_002,
            category: Category::TimeLogic,
            severity: Severity::Medium,
            description: "Hardcoded block number compared with or assigned to a block.number-derived value.",
            remediation: "Take care not to hardcode block numbers; pass boundaries in as timestamps or \
                          configurable parameters.",
        },
        Rule {
            id: TIME_003,
            category: Category::TimeLogic,
            severity: Severity::Medium,
            description: "block.timestamp arithmetic against an interval shorter than the sequencer \
                          timestamp precision.",
            remediation: "Sequencer timestamps have low precision; use intervals well above it or avoid \
                          timestamp-sensitive logic.",
        },
        Rule {
            id: ALIAS_001,
            category: Category::AliasPermission,
            severity: Severity::High,
            description: "msg.sender compared with a fixed address while no alias helper is used; calls \
                          from an L1 contract arrive from the aliased address.",
            remediation: "Compare against applyL1ToL2Alias(l1Address) for cross-chain callers, or store the \
                          aliased address as owner.",
        },
        Rule {
            id: DOS_001,
            category: Category::GasDos,
            severity: Severity::High,
            description: "Loop bounded by the length of a growable state array that makes external calls \
                          or transfers; enough entries exhaust the block gas limit.",
            remediation: "Cap the array size, or switch to a mapping with pull-style withdrawals so no loop \
                          is needed.",
        },
        Rule {
            id: DOS_002,
            category: Category::GasDos,
            severity: Severity::Info,
            description: "Payable deposit function with no minimum-amount check; cheap L2 gas makes spam \
                          deposits affordable.",
            remediation: "Require a minimum deposit amount; deposit time intervals and a threshold before \
                          collateral updates also help.",
        },
    ]
}

pub fn rule(id: &str) -> Option<Rule> {
    rule_catalog().into_iter().find(|r| r.id == id)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("unknown rule id {0:?}; valid ids: {ids}", ids = RULE_IDS.join(", "))]
    UnknownRule(String),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("{0} must not be empty while {1} is enabled")]
    EmptyPatterns(&'static str, &'static str),
    #[error("invalid config: {0}")]
    Json(String),
}

/// Analyzer settings. Name patterns match exactly, with `*` as a wildcard.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RuleConfig {
    pub enabled: Vec<String>,
    pub oracle_patterns: Vec<String>,
    pub uptime_patterns: Vec<String>,
    pub alias_patterns: Vec<String>,
    pub timestamp_threshold_s: u64,
    /// Member calls that make a loop body dangerous.
    pub loop_call_triggers: Vec<String>,
    /// Function names treated as deposits, case-insensitive.
    pub deposit_patterns: Vec<String>,
    pub block_number_literal_threshold: u64,
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

impl Default for RuleConfig {
    fn default() -> Self {
        Self {
            enabled: strings(&RULE_IDS),
            oracle_patterns: strings(&["latestRoundData", "getPrice", "getGLPprice"]),
            uptime_patterns: strings(&["sequencerUptimeFeed", "checkSequencerUp"]),
            alias_patterns: strings(&["applyL1ToL2Alias", "undoL1ToL2Alias"]),
            timestamp_threshold_s: 60,
            loop_call_triggers: strings(&["transfer", "send", "call"]),
            deposit_patterns: strings(&["*deposit*"]),
            block_number_literal_threshold: 1_000_000,
        }
    }
}

impl RuleConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: RuleConfig =
            serde_json::from_str(text).map_err(|e| ConfigError::Json(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_enabled<I: IntoIterator<Item = S>, S: Into<String>>(mut self, ids: I) -> Self {
        self.enabled = ids.into_iter().map(Into::into).collect();
        self
    }

    pub fn is_enabled(&self, id: &str) -> bool {
        self.enabled.iter().any(|e| e == id)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for id in &self.enabled {
            if !RULE_IDS.contains(&id.as_str()) {
                return Err(ConfigError::UnknownRule(id.clone()));
            }
        }
        if self.timestamp_threshold_s == 0 {
            return Err(ConfigError::NonPositive("timestamp_threshold_s"));
        }
        if self.block_number_literal_threshold == 0 {
            return Err(ConfigError::NonPositive("block_number_literal_threshold"));
        }
        let needs: [(&'static str, &Vec<String>, &'static str); 5] = [
            ("oracle_patterns", &self.oracle_patterns, SEQ_001),
            ("uptime_patterns", &self.uptime_patterns, SEQ_001),
            ("alias_patterns", &self.alias_patterns, ALIAS_001),
            ("loop_call_triggers", &self.loop_call_triggers, DOS_001),
            ("deposit_patterns", &self.deposit_patterns, DOS_002),
        ];
        for (field, list, id) in needs {
            if self.is_enabled(id) && list.is_empty() {
                return Err(ConfigError::EmptyPatterns(field, id));
            }
        }
        Ok(())
    }
}

/// `*` matches any run of characters.
pub fn glob_match(pattern: &str, text: &str) -> bool {
    let parts: Vec<&str> = pattern.split('*').collect();
    if parts.len() == 1 {
        return pattern == text;
    }
    let (first, last) = (parts[0], parts[parts.len() - 1]);
    if !text.starts_with(first) || text.len() < first.len() + last.len() || !text.ends_with(last) {
        return false;
    }
    let mut rest = &text[first.len()..text.len() - last.len()];
    for mid in &parts[1..parts.len() - 1] {
        match rest.find(mid) {
            Some(i) => rest = &rest[i + mid.len()..],
            None => return false,
        }
    }
    true
}

fn matches_any(patterns: &[String], name: &str) -> bool {
    patterns.iter().any(|p| glob_match(p, name))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Finding {
    pub rule_id: String,
    pub file: String,
    pub line: u32,
    pub column: u32,
    pub excerpt: String,
    pub message: String,
    pub severity: Severity,
    pub category: Category,
}

impl Finding {
    fn sort_key(&self) -> (&str, u32, u32, &str) {
        (&self.file, self.line, self.column, &self.rule_id)
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}: {} [{}] {}\n    {}",
            self.file,
            self.line,
            self.column,
            self.rule_id,
            self.severity.as_str(),
            self.message,
            self.excerpt
        )
    }
}

pub fn sort_findings(findings: &mut Vec<Finding>) {
    findings.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()).then_with(|| a.cmp(b)));
    findings.dedup();
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FindingsReport {
    pub version: u32,
    pub files: Vec<String>,
    pub findings: Vec<Finding>,
}

impl FindingsReport {
    pub fn new(mut files: Vec<String>, mut findings: Vec<Finding>) -> Self {
        files.sort();
        files.dedup();
        sort_findings(&mut findings);
        Self {
            version: FINDINGS_VERSION,
            files,
            findings,
        }
    }

    /// Pretty JSON with a trailing newline. Struct fields serialize in a fixed
    /// order, so output is byte-stable.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("findings serialize");
        s.push('\n');
        s
    }
}

/// Parses then analyzes one file.
pub fn analyze_source(
    source: &str,
    file: &str,
    config: &RuleConfig,
) -> Result<Vec<Finding>, Vec<Diagnostic>> {
    let unit = parse_source(source)?;
    Ok(analyze(&unit, source, file, config))
}

pub fn analyze(unit: &SourceUnit, source: &str, file: &str, config: &RuleConfig) -> Vec<Finding> {
    let res = resolve(unit);
    let mut cx = Cx {
        source,
        file,
        config,
        res: &res,
        unit,
        out: Vec::new(),
    };
    let alias_helper_used = cx.file_uses_alias_helper();
    for (ci, c) in unit.contracts.iter().enumerate() {
        cx.contract(ci, c, alias_helper_used);
    }
    let mut out = cx.out;
    out.retain(|f| config.is_enabled(&f.rule_id));
    sort_findings(&mut out);
    out
}

struct Cx<'a> {
    source: &'a str,
    file: &'a str,
    config: &'a RuleConfig,
    res: &'a Resolution,
    unit: &'a SourceUnit,
    out: Vec<Finding>,
}

/// Every expression owned by a member, including nested statements.
fn member_exprs(m: &Member) -> Vec<&Expr> {
    let mut v = Vec::new();
    fn from_block<'b>(b: &'b Block, v: &mut Vec<&'b Expr>) {
        for s in b.flatten() {
            v.extend(s.exprs());
        }
    }
    match m {
        Member::StateVar(sv) => v.extend(sv.init.iter()),
        Member::Function(f) => {
            for mi in &f.modifiers {
                v.extend(mi.args.iter().flatten());
            }
            if let Some(b) = &f.body {
                from_block(b, &mut v);
            }
        }
        Member::Modifier(md) => from_block(&md.body, &mut v),
        Member::Event(_) => {}
    }
    v
}

fn all_exprs<'e>(roots: &[&'e Expr]) -> Vec<&'e Expr> {
    let mut v = Vec::new();
    for r in roots {
        r.walk(&mut |e| v.push(e));
    }
    v
}

/// (receiver, method) of a call expression.
fn call_names(e: &Expr) -> Option<(Option<&str>, &str)> {
    let ExprKind::Call { callee, .. } = &e.kind else {
        return None;
    };
    match &callee.kind {
        ExprKind::Ident(n) => Some((None, n)),
        ExprKind::Member { base, member } => Some((expr_name(base), &member.name)),
        _ => None,
    }
}

/// Best-effort name of a receiver expression.
fn expr_name(e: &Expr) -> Option<&str> {
    match &e.kind {
        ExprKind::Ident(n) => Some(n),
        ExprKind::Member { member, .. } => Some(&member.name),
        ExprKind::Index { base, .. } => expr_name(base),
        ExprKind::Call { callee, .. } => expr_name(callee),
        _ => None,
    }
}

fn is_block_number(e: &Expr) -> bool {
    e.is_member_of("block", "number")
}

fn is_block_timestamp(e: &Expr) -> bool {
    e.is_member_of("block", "timestamp") || matches!(&e.kind, ExprKind::Ident(n) if n == "now")
}

fn mentions(e: &Expr, pred: fn(&Expr) -> bool) -> bool {
    e.any(&|x| pred(x))
}

fn is_msg_sender(e: &Expr) -> bool {
    e.is_member_of("msg", "sender")
}

fn is_msg_value(e: &Expr) -> bool {
    e.is_member_of("msg", "value")
}

/// Storage key usable for taint tracking.
fn var_key(res: &Resolution, e: &Expr) -> Option<Binding> {
    match res.lookup(e)? {
        b @ (Binding::StateVar { .. } | Binding::Local { .. } | Binding::Param { .. }) => {
            Some(b.clone())
        }
        _ => None,
    }
}

impl<'a> Cx<'a> {
    fn emit(&mut self, id: &'static str, span: Span, message: String) {
        let r = rule(id).expect("known rule");
        let excerpt = self
            .source
            .get(span.start..span.end)
            .unwrap_or("")
            .lines()
            .next()
            .unwrap_or("")
            .trim()
            .to_string();
        self.out.push(Finding {
            rule_id: id.to_string(),
            file: self.file.to_string(),
            line: span.line,
            column: span.column,
            excerpt,
            message,
            severity: r.severity,
            category: r.category,
        });
    }

    fn file_uses_alias_helper(&self) -> bool {
        self.unit.contracts.iter().any(|c| {
            c.members.iter().any(|m| {
                all_exprs(&member_exprs(m)).iter().any(|e| {
                    call_names(e).is_some_and(|(recv, method)| {
                        matches_any(&self.config.alias_patterns, method)
                            || recv.is_some_and(|r| matches_any(&self.config.alias_patterns, r))
                    })
                })
            })
        })
    }

    fn state_var_type(&self, e: &Expr) -> Option<&'a TypeName> {
        match self.res.lookup(e)? {
            Binding::StateVar { contract, member } => {
                match &self.unit.contracts[*contract].members[*member] {
                    Member::StateVar(v) => Some(&v.ty),
                    _ => None,
                }
            }
            _ => None,
        }
    }

    fn contract(&mut self, ci: usize, c: &'a Contract, alias_helper_used: bool) {
        let modifiers: HashMap<&str, &ModifierDef> = c
            .members
            .iter()
            .filter_map(|m| match m {
                Member::Modifier(md) => Some((md.name.name.as_str(), md)),
                _ => None,
            })
            .collect();

        for m in &c.members {
            if let Member::Function(f) = m {
                self.seq_001(f, &modifiers);
                self.dos_002(f, &modifiers);
            }
            let exprs = all_exprs(&member_exprs(m));
            self.time_001(&exprs);
            if !alias_helper_used {
                self.alias_001(&exprs);
            }
            self.time_003(&member_exprs(m));
            match m {
                Member::Function(Function { body: Some(b), .. }) => self.dos_001(b),
                Member::Modifier(md) => self.dos_001(&md.body),
                _ => {}
            }
        }
        self.time_002(ci, c);
    }

    fn is_uptime_call(&self, e: &Expr) -> bool {
        call_names(e).is_some_and(|(recv, method)| {
            matches_any(&self.config.uptime_patterns, method)
                || recv.is_some_and(|r| matches_any(&self.config.uptime_patterns, r))
        })
    }

    fn seq_001(&mut self, f: &'a Function, modifiers: &HashMap<&str, &'a ModifierDef>) {
        let Some(body) = &f.body else { return };
        let mut checked = f.modifiers.iter().any(|mi| {
            matches_any(&self.config.uptime_patterns, &mi.name.name)
                || modifiers.get(mi.name.name.as_str()).is_some_and(|md| {
                    md.body
                        .flatten()
                        .iter()
                        .any(|s| s.exprs().iter().any(|e| e.any(&|x| self.is_uptime_call(x))))
                })
        });
        let mut hits = Vec::new();
        for s in body.flatten() {
            for root in s.exprs() {
                root.walk(&mut |e| {
                    if self.is_uptime_call(e) {
                        checked = true;
                    } else if let Some((_, method)) = call_names(e) {
                        if !checked && matches_any(&self.config.oracle_patterns, method) {
                            hits.push((e.span, method.to_string()));
                        }
                    }
                });
            }
        }
        for (span, method) in hits {
            self.emit(
                SEQ_001,
                span,
                format!(
                    "{}() reads {method} without checking the sequencer uptime feed first",
                    f.display_name()
                ),
            );
        }
    }

    fn time_001(&mut self, exprs: &[&'a Expr]) {
        for e in exprs {
            if let ExprKind::Binary { op, lhs, rhs } = &e.kind {
                if op.is_equality() && (is_block_number(lhs) || is_block_number(rhs)) {
                    self.emit(
                        TIME_001,
                        e.span,
                        format!("strict '{}' on block.number; L2 skips block numbers, so the exact value may never be seen", op.symbol()),
                    );
                }
            }
        }
    }

    fn big_literal(&self, e: &Expr) -> Option<u128> {
        e.literal_value()
            .filter(|v| *v >= self.config.block_number_literal_threshold as u128)
    }

    fn time_002(&mut self, ci: usize, c: &'a Contract) {
        let mut tainted: HashSet<Binding> = HashSet::new();
        let taint = |res: &Resolution, e: &Expr, set: &mut HashSet<Binding>| {
            if let Some(k) = var_key(res, e) {
                set.insert(k);
            }
        };
        // pass 1: variables tied to block.number
        for (mi, m) in c.members.iter().enumerate() {
            if let Member::StateVar(v) = m {
                if v.init
                    .as_ref()
                    .is_some_and(|i| mentions(i, is_block_number))
                {
                    tainted.insert(Binding::StateVar {
                        contract: ci,
                        member: mi,
                    });
                }
            }
            let body = match m {
                Member::Function(Function { body: Some(b), .. }) => Some(b),
                Member::Modifier(md) => Some(&md.body),
                _ => None,
            };
            if let Some(b) = body {
                for s in b.flatten() {
                    if let StmtKind::VarDecl {
                        name,
                        init: Some(i),
                        ..
                    } = &s.kind
                    {
                        if mentions(i, is_block_number) {
                            tainted.insert(Binding::Local {
                                decl: name.span.start,
                            });
                        }
                    }
                }
            }
            for e in all_exprs(&member_exprs(m)) {
                match &e.kind {
                    ExprKind::Assign { target, value, .. } if mentions(value, is_block_number) => {
                        taint(self.res, target, &mut tainted)
                    }
                    ExprKind::Binary { op, lhs, rhs } if op.is_comparison() => {
                        if mentions(lhs, is_block_number) {
                            taint(self.res, rhs, &mut tainted);
                        }
                        if mentions(rhs, is_block_number) {
                            taint(self.res, lhs, &mut tainted);
                        }
                    }
                    _ => {}
                }
            }
        }

        // pass 2: big literals meeting tainted variables or block.number itself
        let is_tainted = |e: &Expr| var_key(self.res, e).is_some_and(|k| tainted.contains(&k));
        let mut hits: Vec<(Span, String)> = Vec::new();
        for (mi, m) in c.members.iter().enumerate() {
            if let Member::StateVar(v) = m {
                let key = Binding::StateVar {
                    contract: ci,
                    member: mi,
                };
                if let Some(n) = v.init.as_ref().and_then(|i| self.big_literal(i)) {
                    if tainted.contains(&key) {
                        hits.push((
                            v.span,
                            format!(
                                "{} is initialized to hardcoded block number {n}",
                                v.name.name
                            ),
                        ));
                    }
                }
            }
            let body = match m {
                Member::Function(Function { body: Some(b), .. }) => Some(b),
                Member::Modifier(md) => Some(&md.body),
                _ => None,
            };
            if let Some(b) = body {
                for s in b.flatten() {
                    if let StmtKind::VarDecl {
                        name,
                        init: Some(i),
                        ..
                    } = &s.kind
                    {
                        let key = Binding::Local {
                            decl: name.span.start,
                        };
                        if let Some(n) = self.big_literal(i) {
                            if tainted.contains(&key) {
                                hits.push((
                                    s.span,
                                    format!("{} is set to hardcoded block number {n}", name.name),
                                ));
                            }
                        }
                    }
                }
            }
            for e in all_exprs(&member_exprs(m)) {
                match &e.kind {
                    ExprKind::Assign { target, value, .. } => {
                        if let Some(n) = self.big_literal(value) {
                            if is_tainted(target) {
                                hits.push((e.span, format!("hardcoded block number {n} assigned")));
                            }
                        }
                    }
                    ExprKind::Binary { op, lhs, rhs } if op.is_comparison() => {
                        let pairs = [(lhs, rhs), (rhs, lhs)];
                        if let Some(n) = pairs.iter().find_map(|(var, lit)| {
                            (is_block_number(var) || is_tainted(var))
                                .then(|| self.big_literal(lit))
                                .flatten()
                        }) {
                            hits.push((
                                e.span,
                                format!("comparison with hardcoded block number {n}"),
                            ));
                        }
                    }
                    _ => {}
                }
            }
        }
        for (span, msg) in hits {
            self.emit(TIME_002, span, msg);
        }
    }

    fn short_interval(&self, e: &Expr) -> Option<u128> {
        e.literal_value()
            .filter(|v| *v > 0 && *v < self.config.timestamp_threshold_s as u128)
    }

    /// Additive expression with a short literal operand.
    fn short_offset(&self, e: &Expr) -> Option<u128> {
        match &e.kind {
            ExprKind::Binary {
                op: BinaryOp::Add | BinaryOp::Sub,
                lhs,
                rhs,
            } => self
                .short_interval(rhs)
                .or_else(|| self.short_interval(lhs)),
            _ => None,
        }
    }

    fn time_003(&mut self, roots: &[&'a Expr]) {
        let mut hits = Vec::new();
        for r in roots {
            self.time_003_walk(r, &mut hits);
        }
        for (span, n) in hits {
            self.emit(
                TIME_003,
                span,
                format!(
                    "{n}s interval on block.timestamp is below the {}s timestamp precision threshold",
                    self.config.timestamp_threshold_s
                ),
            );
        }
    }

    fn time_003_walk(&self, e: &Expr, hits: &mut Vec<(Span, u128)>) {
        let flagged = match &e.kind {
            ExprKind::Binary {
                op: BinaryOp::Add | BinaryOp::Sub,
                lhs,
                rhs,
            } if is_block_timestamp(lhs) || is_block_timestamp(rhs) => self.short_offset(e),
            ExprKind::Binary { op, lhs, rhs } if op.is_comparison() => {
                let side = |ts: &Expr, other: &Expr| {
                    if !mentions(ts, is_block_timestamp) {
                        return None;
                    }
                    if !is_block_timestamp(ts) {
                        if let Some(n) = self.short_interval(other) {
                            return Some(n);
                        }
                    }
                    self.short_offset(other).or_else(|| self.short_offset(ts))
                };
                side(lhs, rhs).or_else(|| side(rhs, lhs))
            }
            _ => None,
        };
        match flagged {
            Some(n) => hits.push((e.span, n)),
            None => {
                for c in e.children() {
                    self.time_003_walk(c, hits);
                }
            }
        }
    }

    fn fixed_address(&self, e: &Expr) -> bool {
        match &e.kind {
            ExprKind::Address(_) => true,
            ExprKind::Call { callee, args } => {
                matches!(
                    callee.kind,
                    ExprKind::TypeConversion(Elementary::Address { .. })
                ) && args.len() == 1
                    && self.fixed_address(&args[0])
            }
            ExprKind::Ident(_) => self.state_var_type(e).is_some_and(TypeName::is_address),
            _ => false,
        }
    }

    fn alias_001(&mut self, exprs: &[&'a Expr]) {
        for e in exprs {
            if let ExprKind::Binary { op, lhs, rhs } = &e.kind {
                if !op.is_equality() {
                    continue;
                }
                let other = if is_msg_sender(lhs) {
                    rhs
                } else if is_msg_sender(rhs) {
                    lhs
                } else {
                    continue;
                };
                if self.fixed_address(other) {
                    let name = match &other.kind {
                        ExprKind::Ident(n) => n.clone(),
                        _ => "a fixed address".to_string(),
                    };
                    self.emit(
                        ALIAS_001,
                        e.span,
                        format!("msg.sender checked against {name}; an L1 contract caller arrives aliased"),
                    );
                }
            }
        }
    }

    fn dos_001(&mut self, body: &'a Block) {
        let mut hits = Vec::new();
        for s in body.flatten() {
            let (cond, loop_body) = match &s.kind {
                StmtKind::For {
                    cond: Some(c),
                    body,
                    ..
                } => (c, body),
                StmtKind::While { cond, body } => (cond, body),
                _ => continue,
            };
            let mut array = None;
            cond.walk(&mut |e| {
                if let ExprKind::Member { base, member } = &e.kind {
                    if member.name == "length"
                        && self
                            .state_var_type(base)
                            .is_some_and(TypeName::is_dynamic_array)
                    {
                        if let ExprKind::Ident(n) = &base.kind {
                            array.get_or_insert_with(|| n.clone());
                        }
                    }
                }
            });
            let Some(array) = array else { continue };
            let mut trigger = None;
            loop_body.walk(&mut |st| {
                for root in st.exprs() {
                    root.walk(&mut |e| {
                        if let ExprKind::Call { callee, .. } = &e.kind {
                            if let ExprKind::Member { member, .. } = &callee.kind {
                                if trigger.is_none()
                                    && matches_any(&self.config.loop_call_triggers, &member.name)
                                {
                                    trigger = Some(member.name.clone());
                                }
                            }
                        }
                    });
                }
            });
            if let Some(t) = trigger {
                hits.push((s.span, array, t));
            }
        }
        for (span, array, t) in hits {
            self.emit(
                DOS_001,
                span,
                format!("loop over unbounded {array}.length calls .{t}() each iteration"),
            );
        }
    }

    fn has_minimum_check(&self, stmts: &[&Stmt], params: &BTreeSet<&str>) -> bool {
        let amount = |e: &Expr| {
            is_msg_value(e) || matches!(&e.kind, ExprKind::Ident(n) if params.contains(n.as_str()))
        };
        let nonzero_bound = |e: &Expr| e.literal_value() != Some(0);
        stmts.iter().any(|s| {
            let StmtKind::Require { cond, .. } = &s.kind else {
                return false;
            };
            cond.any(&|e| match &e.kind {
                ExprKind::Binary { op, lhs, rhs } => match op {
                    BinaryOp::Ge | BinaryOp::Gt => amount(lhs) && nonzero_bound(rhs),
                    BinaryOp::Le | BinaryOp::Lt => amount(rhs) && nonzero_bound(lhs),
                    _ => false,
                },
                _ => false,
            })
        })
    }

    fn dos_002(&mut self, f: &'a Function, modifiers: &HashMap<&str, &'a ModifierDef>) {
        if f.kind != FunctionKind::Function || !f.is_payable() {
            return;
        }
        let name = f.display_name().to_ascii_lowercase();
        let is_deposit = self
            .config
            .deposit_patterns
            .iter()
            .any(|p| glob_match(&p.to_ascii_lowercase(), &name));
        if !is_deposit {
            return;
        }
        let params: BTreeSet<&str> = f
            .params
            .iter()
            .filter_map(|p| p.name.as_ref().map(|n| n.name.as_str()))
            .collect();
        let mut stmts: Vec<&Stmt> = f.body.as_ref().map(|b| b.flatten()).unwrap_or_default();
        for mi in &f.modifiers {
            if let Some(md) = modifiers.get(mi.name.name.as_str()) {
                stmts.extend(md.body.flatten());
            }
        }
        if !self.has_minimum_check(&stmts, &params) {
            self.emit(
                DOS_002,
                f.span,
                format!(
                    "payable {}() accepts deposits of any size",
                    f.display_name()
                ),
            );
        }
    }
}

// ---- migration checklist ----

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepId {
    Pause,
    Recover,
    Deploy,
    BatchedWrites,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChecklistStep {
    pub id: StepId,
    pub title: String,
    pub detail: String,
    pub sub_items: Vec<String>,
    /// `file:line rule_id` references.
    pub findings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checklist {
    pub steps: Vec<ChecklistStep>,
}

fn base_steps() -> Vec<ChecklistStep> {
    let step = |id, title: &str, detail: &str| ChecklistStep {
        id,
        title: title.to_string(),
        detail: detail.to_string(),
        sub_items: Vec::new(),
        findings: Vec::new(),
    };
    vec![
        step(
            StepId::Pause,
            "Pause the source contract",
            "Stop state-changing operations on L1 while data is recovered, and announce the migration.",
        ),
        step(
            StepId::Recover,
            "Recover state from L1",
            "Read public variables through getters, rebuild histories from events, and read private \
             slots with getStorageAt() at their computed storage offsets, all at a fixed block.",
        ),
        step(
            StepId::Deploy,
            "Deploy and initialize on Arbitrum",
            "Deploy the new contract and set simple variables through the constructor.",
        ),
        step(
            StepId::BatchedWrites,
            "Write bulk state in batches",
            "Split large state (balances, arrays, mappings) across multiple transactions.",
        ),
    ]
}

fn mapping_for(rule_id: &str) -> Option<(StepId, &'static str)> {
    Some(match rule_id {
        SEQ_001 => (StepId::Deploy, "Add a sequencer uptime feed check before every oracle read."),
        TIME_001 => (StepId::Deploy, "Replace block.number equality checks with range checks."),
        TIME_002 => (
            StepId::Deploy,
            "Re-derive hardcoded block numbers for L2 or replace them with timestamps.",
        ),
        TIME_003 => (
            StepId::Deploy,
            "Widen block.timestamp intervals shorter than the sequencer precision.",
        ),
        ALIAS_001 => (
            StepId::Deploy,
            "Re-derive owner as the aliased address (applyL1ToL2Alias) when the owner is an L1 contract.",
        ),
        DOS_001 => (
            StepId::BatchedWrites,
            "Bound array growth before migrating arrays; loops over them must fit the L2 block gas limit.",
        ),
        DOS_002 => (StepId::Deploy, "Set a minimum deposit amount in the migrated contract."),
        _ => return None,
    })
}

pub fn migration_checklist(findings: &[Finding]) -> Checklist {
    let mut steps = base_steps();
    let mut sorted = findings.to_vec();
    sort_findings(&mut sorted);
    let mut seen_rules = BTreeSet::new();
    for f in &sorted {
        let Some((step_id, sub)) = mapping_for(&f.rule_id) else {
            continue;
        };
        let step = steps
            .iter_mut()
            .find(|s| s.id == step_id)
            .expect("base step");
        step.findings
            .push(format!("{}:{} {}", f.file, f.line, f.rule_id));
        if seen_rules.insert(f.rule_id.clone()) {
            step.sub_items.push(sub.to_string());
        }
    }
    // sub-items in rule catalog order
    for step in &mut steps {
        step.sub_items.sort_by_key(|s| {
            RULE_IDS
                .iter()
                .position(|id| mapping_for(id).is_some_and(|(_, t)| t == s))
                .unwrap_or(usize::MAX)
        });
    }
    Checklist { steps }
}

impl fmt::Display for Checklist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(f, "{}. {}", i + 1, s.title)?;
            writeln!(f, "   {}", s.detail)?;
            for sub in &s.sub_items {
                writeln!(f, "   - {sub}")?;
            }
            for r in &s.findings {
                writeln!(f, "     see {r}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(src: &str) -> Vec<Finding> {
        analyze_source(src, "t.sol", &RuleConfig::default()).unwrap_or_else(|d| panic!("{d:?}"))
    }

    fn ids(src: &str) -> Vec<String> {
        run(src).into_iter().map(|f| f.rule_id).collect()
    }

    #[test]
    fn oracle_without_uptime_check() {
        let src = "contract L { Feed oracle; function p() public view returns (int256) { \
                   int256 a = oracle.latestRoundData(); return a; } }";
        let f = run(src);
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].rule_id, SEQ_001);
        assert_eq!(f[0].severity, Severity::High);
        assert_eq!(f[0].excerpt, "oracle.latestRoundData()");
    }

    #[test]
    fn uptime_check_first_is_clean() {
        let src = "contract L { function p() public { checkSequencerUp(); oracle.latestRoundData(); } \
                   function q() public { sequencerUptimeFeed.latestRoundData(); oracle.getPrice(); } }";
        assert!(ids(src).is_empty());
        let late =
            "contract L { function p() public { oracle.latestRoundData(); checkSequencerUp(); } }";
        assert_eq!(ids(late), vec![SEQ_001]);
    }

    #[test]
    fn block_number_equality() {
        let src = "contract C { function f() public { if (block.number == 17000000) { x = 1; } } }";
        let f = ids(src);
        assert!(f.contains(&TIME_001.to_string()));
    }

    #[test]
    fn empty_contract_no_findings() {
        assert!(ids("contract C {}").is_empty());
        assert!(ids("").is_empty());
    }

    #[test]
    fn catalog_texts() {
        let cat = rule_catalog();
        let seq = cat.iter().find(|r| r.id == SEQ_001).unwrap();
        assert!(seq
            .remediation
            .contains("Chainlink L2 Sequencer Uptime Feeds can be used"));
        let t2 = cat.iter().find(|r| r.id == TIME_002).unwrap();
        assert!(t2.remediation.contains("not to hardcode block numbers"));
        let unique: BTreeSet<_> = cat.iter().map(|r| r.id).collect();
        assert_eq!(unique.len(), cat.len());
    }

    #[test]
    fn hardcoded_block_number_via_state_var() {
        let src = "contract C { uint256 public start = 17000000; \
                   function f() public { require(block.number >= start); } }";
        let f = run(src);
        assert_eq!(f.len(), 1, "{f:?}");
        assert_eq!(f[0].rule_id, TIME_002);
        assert_eq!(f[0].line, 1);
        let small = "contract C { uint256 public start = 100; function f() public { require(block.number >= start); } }";
        assert!(ids(small).is_empty());
    }

    #[test]
    fn short_timestamp_interval() {
        let src = "contract C { uint256 last; function f() public { require(block.timestamp >= last + 30); \
                   require(block.timestamp - last > 10 seconds); t = block.timestamp + 5; } }";
        assert_eq!(ids(src), vec![TIME_003, TIME_003, TIME_003]);
        let ok = "contract C { uint256 last; function f() public { require(block.timestamp >= last + 1 hours); } }";
        assert!(ids(ok).is_empty());
    }

    #[test]
    fn alias_permission() {
        let src =
            "contract C { address owner; function f() public { require(msg.sender == owner); } }";
        assert_eq!(ids(src), vec![ALIAS_001]);
        let helped = "contract C { address owner; function f() public { \
                      require(msg.sender == AddressAliasHelper.applyL1ToL2Alias(owner)); } \
                      function g() public { require(msg.sender == owner); } }";
        assert!(ids(helped).is_empty());
        let local = "contract C { function f(address who) public { require(msg.sender == who); } }";
        assert!(ids(local).is_empty());
    }

    #[test]
    fn refund_loop() {
        let src = "contract C { address[] bidders; mapping(address => uint256) refunds; \
                   function r() public { for (uint256 i = 0; i < bidders.length; i++) { \
                   payable(bidders[i]).transfer(refunds[bidders[i]]); } } }";
        assert_eq!(ids(src), vec![DOS_001]);
        let fixed = "contract C { address[10] bidders; function r() public { \
                     for (uint256 i = 0; i < bidders.length; i++) { payable(bidders[i]).transfer(1); } } }";
        assert!(ids(fixed).is_empty());
    }

    #[test]
    fn deposit_minimum() {
        let src = "contract C { function deposit() external payable { b = msg.value; } }";
        assert_eq!(ids(src), vec![DOS_002]);
        let zero = "contract C { function deposit() external payable { require(msg.value > 0); } }";
        assert_eq!(ids(zero), vec![DOS_002]);
        let ok = "contract C { uint256 constant MIN = 1 ether; function depositFor(address a) external payable { require(msg.value >= MIN); } }";
        assert!(ids(ok).is_empty());
        let via_mod = "contract C { modifier atLeast(uint256 m) { require(msg.value >= m); _; } \
                       function deposit() external payable atLeast(1 ether) {} }";
        assert!(ids(via_mod).is_empty());
    }

    #[test]
    fn disabling_a_rule_removes_only_it() {
        let src =
            "contract C { address owner; function f() public { require(msg.sender == owner); \
                   if (block.number == 5) {} } }";
        let all = run(src);
        let cfg = RuleConfig::default()
            .with_enabled(RULE_IDS.iter().filter(|i| **i != TIME_001).copied());
        let some = analyze_source(src, "t.sol", &cfg).unwrap();
        let expected: Vec<_> = all.into_iter().filter(|f| f.rule_id != TIME_001).collect();
        assert_eq!(some, expected);
    }

    #[test]
    fn config_validation() {
        assert!(RuleConfig::from_json("{}").is_ok());
        assert!(matches!(
            RuleConfig::from_json("{\"bogus\": 1}"),
            Err(ConfigError::Json(_))
        ));
        assert!(matches!(
            RuleConfig::from_json("{\"enabled\": [\"ARB-NOPE\"]}"),
            Err(ConfigError::UnknownRule(_))
        ));
        assert!(matches!(
            RuleConfig::from_json("{\"timestamp_threshold_s\": 0}"),
            Err(ConfigError::NonPositive(_))
        ));
        assert!(matches!(
            RuleConfig::from_json("{\"oracle_patterns\": []}"),
            Err(ConfigError::EmptyPatterns(..))
        ));
        assert!(RuleConfig::from_json(
            "{\"oracle_patterns\": [], \"enabled\": [\"ARB-TIME-001\"]}"
        )
        .is_ok());
    }

    #[test]
    fn glob() {
        assert!(glob_match("*deposit*", "mydeposittoken"));
        assert!(glob_match("get*", "getPrice"));
        assert!(!glob_match("get*", "fetch"));
        assert!(glob_match("a*b*c", "axxbyyc"));
        assert!(!glob_match("a*b*c", "ac"));
        assert!(glob_match("exact", "exact"));
    }

    #[test]
    fn checklist_base_and_alias() {
        let base = migration_checklist(&[]);
        assert_eq!(base.steps.len(), 4);
        assert!(base
            .steps
            .iter()
            .all(|s| s.sub_items.is_empty() && s.findings.is_empty()));
        let f = run(
            "contract C { address owner; function f() public { require(msg.sender == owner); } }",
        );
        let cl = migration_checklist(&f);
        let deploy = cl.steps.iter().find(|s| s.id == StepId::Deploy).unwrap();
        assert_eq!(deploy.sub_items.len(), 1);
        assert!(deploy.sub_items[0].contains("aliased address"));
        assert_eq!(deploy.findings, vec!["t.sol:1 ARB-ALIAS-001".to_string()]);
        assert_eq!(migration_checklist(&f), cl);
    }
}
