//! Built-in differential scenarios. Each runs the same workload under L1
//! and L2 semantics and reports both outcomes plus their differences.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::aliasing::{
    alias_aware_permission_check, l2_msg_sender, raw_permission_check, Address, AliasConfig,
    SenderContext, SenderKind,
};
use crate::chainmodel::{l1_block_number_at, l2_view_l1_number_at, L1Chain, L2View, WallClock};
use crate::retryable::{
    FeeLedger, RedeemAttempt, RetryableBook, RetryableConfig, TicketParams, DEFAULT_BUFFER_LIFETIME,
};
use crate::rules;
use crate::sequencer::{L2Tx, SequencerState, Status};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarnessError {
    #[error("unknown scenario {id:?}; valid scenarios: {valid}")]
    UnknownScenario { id: String, valid: String },
    #[error("scenario {scenario} has no parameter {key:?}; valid parameters: {valid}")]
    UnknownParam {
        scenario: String,
        key: String,
        valid: String,
    },
    #[error("parameter {key}={value:?}: expected {expected}")]
    BadParamValue {
        key: String,
        value: String,
        expected: String,
    },
    #[error("invalid parameters: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamKind {
    Int,
    Address,
    Choice(&'static [&'static str]),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: ParamKind,
    pub default: &'static str,
    pub description: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScenarioInfo {
    pub id: &'static str,
    pub name: &'static str,
    pub heading: &'static str,
    pub description: &'static str,
    pub rules: &'static [&'static str],
    pub params: Vec<ParamSpec>,
}

const fn p(
    name: &'static str,
    kind: ParamKind,
    default: &'static str,
    description: &'static str,
) -> ParamSpec {
    ParamSpec {
        name,
        kind,
        default,
        description,
    }
}

pub fn list_scenarios() -> Vec<ScenarioInfo> {
    use ParamKind::*;
    vec![
        ScenarioInfo {
            id: "S1",
            name: "stale-oracle",
            heading: "Stale off-chain data while the sequencer is down",
            description: "Lending positions checked by a keeper against the on-chain oracle price. \
                          While the sequencer is down the oracle cannot post and keeper calls queue in \
                          the delayed inbox, running against the stale price on recovery.",
            rules: &[rules::SEQ_001],
            params: vec![
                p("horizon_s", Int, "7200", "simulated seconds"),
                p("downtime_start_s", Int, "1800", "sequencer outage start"),
                p("downtime_s", Int, "1800", "outage length; 0 disables the outage"),
                p("price_interval_s", Int, "60", "oracle update and price step period"),
                p("check_interval_s", Int, "300", "keeper liquidation check period"),
                p("initial_price_cents", Int, "200000", "collateral price at t=0"),
                p("volatility_bps", Int, "100", "max relative price move per step"),
                p("positions", Int, "20", "number of borrowers, one collateral unit each"),
                p("force_inclusion_delay_s", Int, "86400", "delayed inbox force-inclusion delay"),
            ],
        },
        ScenarioInfo {
            id: "S2",
            name: "block-number-equality",
            heading: "Time logic built on block.number",
            description: "Fraction of L1 block numbers that an L2 contract ever observes through \
                          block.number, i.e. how often `block.number == N` can fire.",
            rules: &[rules::TIME_001, rules::TIME_002],
            params: vec![
                p("block_interval_s", Int, "15", "L1 block interval"),
                p("sync_period_s", Int, "60", "L2 view refresh period, a multiple of the block interval"),
                p("horizon_s", Int, "3600", "enumeration horizon"),
                p("genesis_number", Int, "1000", "L1 block number at t=0"),
            ],
        },
        ScenarioInfo {
            id: "S3",
            name: "alias-permission",
            heading: "Failed permission checks under address aliasing",
            description: "An L1 contract calls an owner-gated L2 function. A raw msg.sender check sees \
                          the aliased address; an alias-aware check compares against the alias.",
            rules: &[rules::ALIAS_001],
            params: vec![
                p("l1_sender", Address, "0x00000000000000000000000000000000000a11ce", "owner on L1"),
                p("sender_kind", Choice(&["contract", "eoa"]), "contract", "L1 sender type"),
                p("alias_offset", Address, "0x1111000000000000000000000000000000001111", "alias offset"),
            ],
        },
        ScenarioInfo {
            id: "S4",
            name: "dos-refund-loop",
            heading: "Denial of service through loop gas exhaustion",
            description: "A refund loop over a growable participant array. Finds the first participant \
                          count whose loop exceeds the block gas limit and the cost of pushing the array \
                          there on each chain.",
            rules: &[rules::DOS_001, rules::DOS_002],
            params: vec![
                p("block_gas_limit", Int, "30000000", "L1 block gas limit"),
                p("l2_block_gas_limit", Int, "30000000", "L2 block gas limit"),
                p("base_gas", Int, "50000", "fixed gas of the refund call"),
                p("per_iteration_gas", Int, "40000", "gas per refunded participant"),
                p("join_gas", Int, "50000", "gas an attacker spends per added participant"),
                p("l1_gas_price_wei", Int, "20000000000", "L1 gas price"),
                p("l2_gas_price_wei", Int, "100000000", "L2 gas price"),
                p("max_participants", Int, "100000", "search bound"),
            ],
        },
        ScenarioInfo {
            id: "S5",
            name: "retryable-fee-paths",
            heading: "Repeated fee payments on retryable tickets",
            description: "One L1-to-L2 message through the retryable ticket paths: automatic success, \
                          failed automatic redeem then manual redeem, and expiry after the buffer \
                          lifetime. Compared against a single direct execution.",
            rules: &[],
            params: vec![
                p("submission_fee", Int, "100000", "ticket submission fee"),
                p("max_gas", Int, "100000", "L2 gas limit bought with the ticket"),
                p("gas_price", Int, "10", "L2 gas price bid"),
                p("gas_required", Int, "60000", "gas the L2 call needs"),
                p("spike_gas_price", Int, "20", "L2 gas price during the failed automatic redeem"),
                p("callvalue", Int, "5000000", "value carried to L2"),
                p("l1_gas_spent", Int, "50000", "L1 gas cost of creating the ticket"),
                p("manual_submission_fee", Int, "100000", "fee paid again on manual redeem"),
                p("escrow_callvalue", Choice(&["false", "true"]), "false", "hold callvalue in a separate escrow"),
            ],
        },
    ]
}

pub fn scenario_info(id: &str) -> Result<ScenarioInfo, HarnessError> {
    let all = list_scenarios();
    let valid = all
        .iter()
        .map(|s| format!("{} ({})", s.id, s.name))
        .collect::<Vec<_>>()
        .join(", ");
    all.into_iter()
        .find(|s| s.id.eq_ignore_ascii_case(id) || s.name.eq_ignore_ascii_case(id))
        .ok_or_else(|| HarnessError::UnknownScenario {
            id: id.to_string(),
            valid,
        })
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    /// Overrides as text, validated against the declared parameters.
    pub params: BTreeMap<String, String>,
    pub seed: u64,
}

impl Scenario {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            ..Self::default()
        }
    }

    pub fn with_param(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.params.insert(key.into(), value.to_string());
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferentialReport {
    pub scenario: String,
    pub name: String,
    pub heading: String,
    pub seed: u64,
    pub params: BTreeMap<String, Value>,
    pub l1_outcome: BTreeMap<String, Value>,
    pub l2_outcome: BTreeMap<String, Value>,
    pub metrics: BTreeMap<String, Value>,
    pub divergent: bool,
    pub narrative: String,
    pub rules: Vec<String>,
}

fn is_zero(v: &Value) -> bool {
    match v {
        Value::Number(n) => n.as_f64() == Some(0.0),
        Value::Null => true,
        _ => false,
    }
}

/// Canonical JSON: sorted keys, two-space indent, LF, trailing newline.
pub fn serialize_report(r: &DifferentialReport) -> String {
    // Value maps are BTreeMaps, so converting first sorts every level.
    let v = serde_json::to_value(r).expect("report serializes");
    let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
    s.push('\n');
    s
}

pub fn parse_report(text: &str) -> Result<DifferentialReport, serde_json::Error> {
    serde_json::from_str(text)
}

struct Params {
    scenario: &'static str,
    values: BTreeMap<&'static str, String>,
    kinds: BTreeMap<&'static str, ParamKind>,
}

impl Params {
    fn resolve(
        info: &ScenarioInfo,
        overrides: &BTreeMap<String, String>,
    ) -> Result<Self, HarnessError> {
        let mut values = BTreeMap::new();
        let mut kinds = BTreeMap::new();
        for spec in &info.params {
            values.insert(spec.name, spec.default.to_string());
            kinds.insert(spec.name, spec.kind);
        }
        for (k, v) in overrides {
            let Some(spec) = info.params.iter().find(|s| s.name == k) else {
                return Err(HarnessError::UnknownParam {
                    scenario: info.id.to_string(),
                    key: k.clone(),
                    valid: info
                        .params
                        .iter()
                        .map(|s| s.name)
                        .collect::<Vec<_>>()
                        .join(", "),
                });
            };
            values.insert(spec.name, v.trim().to_string());
        }
        let out = Self {
            scenario: info.id,
            values,
            kinds,
        };
        for (k, kind) in &out.kinds {
            let raw = &out.values[k];
            let bad = |expected: String| HarnessError::BadParamValue {
                key: k.to_string(),
                value: raw.clone(),
                expected,
            };
            match kind {
                ParamKind::Int => {
                    raw.parse::<u64>()
                        .map_err(|_| bad("a non-negative integer".into()))?;
                }
                ParamKind::Address => {
                    raw.parse::<Address>()
                        .map_err(|e| bad(format!("an address ({e})")))?;
                }
                ParamKind::Choice(opts) => {
                    if !opts.contains(&raw.as_str()) {
                        return Err(bad(format!("one of {}", opts.join(", "))));
                    }
                }
            }
        }
        Ok(out)
    }

    fn int(&self, k: &str) -> u64 {
        self.values[k].parse().expect("validated")
    }

    fn positive(&self, k: &str) -> Result<u64, HarnessError> {
        match self.int(k) {
            0 => Err(HarnessError::Invalid(format!(
                "{}: {k} must be positive",
                self.scenario
            ))),
            v => Ok(v),
        }
    }

    fn address(&self, k: &str) -> Address {
        self.values[k].parse().expect("validated")
    }

    fn text(&self, k: &str) -> &str {
        &self.values[k]
    }

    fn as_json(&self) -> BTreeMap<String, Value> {
        self.values
            .iter()
            .map(|(k, v)| {
                let val = match self.kinds[k] {
                    ParamKind::Int => json!(v.parse::<u64>().expect("validated")),
                    _ => json!(v),
                };
                (k.to_string(), val)
            })
            .collect()
    }
}

struct Outcome {
    l1: BTreeMap<String, Value>,
    l2: BTreeMap<String, Value>,
    metrics: BTreeMap<String, Value>,
    narrative: String,
}

pub fn run_scenario(s: &Scenario) -> Result<DifferentialReport, HarnessError> {
    let info = scenario_info(&s.id)?;
    let params = Params::resolve(&info, &s.params)?;
    let out = match info.id {
        "S1" => stale_oracle(&params, s.seed)?,
        "S2" => block_number_equality(&params)?,
        "S3" => alias_permission(&params),
        "S4" => dos_refund_loop(&params)?,
        "S5" => retryable_fee_paths(&params)?,
        _ => unreachable!("catalog ids"),
    };
    let divergent = out.metrics.values().any(|v| !is_zero(v));
    Ok(DifferentialReport {
        scenario: info.id.to_string(),
        name: info.name.to_string(),
        heading: info.heading.to_string(),
        seed: s.seed,
        params: params.as_json(),
        l1_outcome: out.l1,
        l2_outcome: out.l2,
        metrics: out.metrics,
        divergent,
        narrative: out.narrative,
        rules: info.rules.iter().map(|r| r.to_string()).collect(),
    })
}

fn map(entries: Vec<(&str, Value)>) -> BTreeMap<String, Value> {
    entries
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

// ---- S1 ----

#[derive(Debug, Clone, Default)]
struct LendingRun {
    /// position -> (liquidation time, price used in cents)
    liquidations: BTreeMap<usize, (u64, u64)>,
    max_price_age: u64,
    max_inclusion_delay: u64,
    checks_executed: u64,
}

enum S1Tx {
    Oracle(u64),
    Check,
}

#[allow(clippy::too_many_arguments)]
fn simulate_lending(
    prices: &[u64],
    thresholds: &[u64],
    horizon: u64,
    price_interval: u64,
    check_interval: u64,
    outage: Option<(u64, u64)>,
    force_delay: u64,
) -> LendingRun {
    let mut seq = SequencerState::new(force_delay);
    let mut txs: HashMap<String, S1Tx> = HashMap::new();
    let mut run = LendingRun::default();
    let mut onchain_price = prices[0];
    let mut price_time = 0u64;
    for t in 0..=horizon {
        if let Some((start, end)) = outage {
            if t == start {
                seq.set_status(Status::Down);
            }
            if t == end {
                seq.set_status(Status::Active);
            }
        }
        if t % price_interval == 0 && seq.status() == Status::Active {
            let id = format!("oracle-{t}");
            let price = prices[(t / price_interval) as usize];
            txs.insert(id.clone(), S1Tx::Oracle(price));
            seq.submit(L2Tx::direct(id, t)).expect("unique id");
        }
        if t % check_interval == 0 {
            let id = format!("check-{t}");
            txs.insert(id.clone(), S1Tx::Check);
            seq.submit(L2Tx::direct(id, t)).expect("unique id");
        }
        for tx in seq.tick(t).expect("monotone ticks") {
            run.max_inclusion_delay = run.max_inclusion_delay.max(t - tx.submit_time);
            match txs[&tx.id] {
                S1Tx::Oracle(p) => {
                    onchain_price = p;
                    price_time = tx.submit_time;
                }
                S1Tx::Check => {
                    run.checks_executed += 1;
                    run.max_price_age = run.max_price_age.max(t - price_time);
                    for (i, th) in thresholds.iter().enumerate() {
                        if onchain_price < *th && !run.liquidations.contains_key(&i) {
                            run.liquidations.insert(i, (t, onchain_price));
                        }
                    }
                }
            }
        }
    }
    run
}

fn stale_oracle(p: &Params, seed: u64) -> Result<Outcome, HarnessError> {
    let horizon = p.positive("horizon_s")?;
    let price_interval = p.positive("price_interval_s")?;
    let check_interval = p.positive("check_interval_s")?;
    let p0 = p.positive("initial_price_cents")?;
    let vol = p.int("volatility_bps");
    if vol >= 10_000 {
        return Err(HarnessError::Invalid(
            "S1: volatility_bps must be below 10000".into(),
        ));
    }
    let n = p.int("positions") as usize;
    let start = p.int("downtime_start_s");
    let downtime = p.int("downtime_s");
    let force_delay = p.int("force_inclusion_delay_s");

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = (horizon / price_interval) as usize + 1;
    let mut prices = Vec::with_capacity(steps);
    let mut price = p0 as f64;
    for _ in 0..steps {
        prices.push(price.round().max(1.0) as u64);
        let z: f64 = rng.gen_range(-1.0..=1.0);
        price *= 1.0 + (vol as f64 / 10_000.0) * z;
    }
    // liquidation prices spread over 80%..98% of the starting price
    let thresholds: Vec<u64> = (0..n)
        .map(|_| (p0 as f64 * rng.gen_range(0.80..0.98)).round() as u64)
        .collect();

    let outage = (downtime > 0).then_some((start, start.saturating_add(downtime)));
    let l1 = simulate_lending(
        &prices,
        &thresholds,
        horizon,
        price_interval,
        check_interval,
        None,
        force_delay,
    );
    let l2 = simulate_lending(
        &prices,
        &thresholds,
        horizon,
        price_interval,
        check_interval,
        outage,
        force_delay,
    );

    let liquidated = |r: &LendingRun| r.liquidations.keys().copied().collect::<BTreeSet<_>>();
    let (s1, s2) = (liquidated(&l1), liquidated(&l2));
    let wrongful = s2.difference(&s1).count() as u64;
    let missed = s1.difference(&s2).count() as u64;
    let settlement = |r: &LendingRun, i: usize| r.liquidations.get(&i).map_or(0, |(_, px)| *px);
    let monetary_delta: u64 = (0..n)
        .map(|i| settlement(&l1, i).abs_diff(settlement(&l2, i)))
        .sum();
    let same_timing = (0..n).all(|i| l1.liquidations.get(&i) == l2.liquidations.get(&i));
    let timing_mismatches = (0..n)
        .filter(|i| l1.liquidations.get(i) != l2.liquidations.get(i))
        .count() as u64;

    let delta = |a: u64, b: u64| json!(b as i64 - a as i64);
    let value = |r: &LendingRun| r.liquidations.values().map(|(_, px)| *px).sum::<u64>();
    let metrics = map(vec![
        (
            "max_price_staleness_s",
            delta(l1.max_price_age, l2.max_price_age),
        ),
        (
            "max_inclusion_delay_s",
            delta(l1.max_inclusion_delay, l2.max_inclusion_delay),
        ),
        (
            "checks_executed",
            delta(l1.checks_executed, l2.checks_executed),
        ),
        (
            "liquidations",
            delta(l1.liquidations.len() as u64, l2.liquidations.len() as u64),
        ),
        ("liquidated_value_cents", delta(value(&l1), value(&l2))),
        ("wrongful_liquidations", json!(wrongful)),
        ("missed_liquidations", json!(missed)),
        ("liquidation_timing_mismatches", json!(timing_mismatches)),
        ("monetary_delta_cents", json!(monetary_delta)),
    ]);
    let summary = |r: &LendingRun| {
        map(vec![
            ("liquidations", json!(r.liquidations.len())),
            ("liquidated_value_cents", json!(value(r))),
            ("max_price_staleness_s", json!(r.max_price_age)),
            ("max_inclusion_delay_s", json!(r.max_inclusion_delay)),
            ("checks_executed", json!(r.checks_executed)),
            ("final_price_cents", json!(prices[prices.len() - 1])),
        ])
    };
    let narrative = if outage.is_none() {
        "No outage: L2 liquidations match L1 exactly.".to_string()
    } else {
        format!(
            "Sequencer down from t={start}s for {downtime}s. Keeper checks queued in the delayed inbox \
             ran on recovery against a price up to {}s old: {wrongful} wrongful and {missed} missed \
             liquidations{}.",
            l2.max_price_age,
            if same_timing { "" } else { ", with liquidation timing shifted" }
        )
    };
    Ok(Outcome {
        l1: summary(&l1),
        l2: summary(&l2),
        metrics,
        narrative,
    })
}

// ---- S2 ----

/// (L1 numbers produced in [0, horizon), numbers seen through the L2 view).
pub fn observable_block_numbers(
    chain: &L1Chain,
    view: &L2View,
    horizon: u64,
) -> (BTreeSet<u64>, BTreeSet<u64>) {
    let mut produced = BTreeSet::new();
    let mut seen = BTreeSet::new();
    for t in 0..horizon {
        produced.insert(l1_block_number_at(WallClock(t), chain));
        seen.insert(l2_view_l1_number_at(WallClock(t), chain, view));
    }
    (produced, seen)
}

fn block_number_equality(p: &Params) -> Result<Outcome, HarnessError> {
    let interval = p.int("block_interval_s");
    let sync = p.int("sync_period_s");
    let horizon = p.positive("horizon_s")?;
    let invalid =
        |e: crate::chainmodel::ChainConfigError| HarnessError::Invalid(format!("S2: {e}"));
    let chain = L1Chain::new(p.int("genesis_number"), interval).map_err(invalid)?;
    let view = L2View::new(&chain, sync, 1).map_err(invalid)?;
    let (produced, seen) = observable_block_numbers(&chain, &view, horizon);
    let total = produced.len() as u64;
    let observed = seen.intersection(&produced).count() as u64;
    let fraction = observed as f64 / total as f64;
    let side = |obs: u64, frac: f64| {
        map(vec![
            ("l1_numbers_in_horizon", json!(total)),
            ("observable_numbers", json!(obs)),
            ("observable_fraction", json!(frac)),
        ])
    };
    Ok(Outcome {
        l1: side(total, 1.0),
        l2: side(observed, fraction),
        metrics: map(vec![
            ("unobservable_fraction", json!(1.0 - fraction)),
            ("unobservable_numbers", json!(total - observed)),
        ]),
        narrative: format!(
            "Over {horizon}s with {interval}s blocks and a {sync}s sync period, L2 contracts observe \
             {observed} of {total} L1 block numbers; `block.number == N` for a uniformly chosen N fires \
             with probability {fraction}."
        ),
    })
}

// ---- S3 ----

fn verdict(ok: bool) -> Value {
    json!(if ok { "allow" } else { "deny" })
}

fn alias_permission(p: &Params) -> Outcome {
    let owner = p.address("l1_sender");
    let offset = p.address("alias_offset");
    let kind = match p.text("sender_kind") {
        "eoa" => SenderKind::ExternallyOwned,
        _ => SenderKind::Contract,
    };
    let cfg = AliasConfig {
        offset,
        ..AliasConfig::default()
    };
    let l2_sender = l2_msg_sender(&SenderContext::new(owner, kind), &cfg);
    // On L1 the caller arrives unaliased, so both checks compare equal addresses.
    let l1 = map(vec![
        ("msg_sender", json!(owner.to_checksum())),
        ("raw_check", verdict(raw_permission_check(owner, owner))),
        (
            "alias_aware_check",
            verdict(raw_permission_check(owner, owner)),
        ),
    ]);
    let aware = match kind {
        SenderKind::Contract => alias_aware_permission_check(l2_sender, owner, offset),
        SenderKind::ExternallyOwned => raw_permission_check(l2_sender, owner),
    };
    let l2 = map(vec![
        ("msg_sender", json!(l2_sender.to_checksum())),
        ("raw_check", verdict(raw_permission_check(l2_sender, owner))),
        ("alias_aware_check", verdict(aware)),
    ]);
    let mismatch = |k: &str| json!(u64::from(l1[k] != l2[k]));
    let metrics = map(vec![
        ("sender_mismatch", mismatch("msg_sender")),
        ("raw_check_mismatch", mismatch("raw_check")),
        ("alias_aware_check_mismatch", mismatch("alias_aware_check")),
    ]);
    let narrative = format!(
        "owner {} calls from L1 as {}; on L2 msg.sender is {}. raw check: {}, alias-aware check: {}.",
        owner.to_checksum(),
        if kind == SenderKind::Contract { "a contract" } else { "an EOA" },
        l2_sender.to_checksum(),
        l2["raw_check"].as_str().unwrap_or_default(),
        l2["alias_aware_check"].as_str().unwrap_or_default(),
    );
    Outcome {
        l1,
        l2,
        metrics,
        narrative,
    }
}

// ---- S4 ----

/// Smallest N in 1..=max whose refund loop exceeds `gas_limit`, found by
/// running the loop's gas meter.
pub fn first_failing_participants(
    gas_limit: u64,
    base: u64,
    per_iteration: u64,
    max: u64,
) -> Option<u64> {
    for n in 1..=max {
        let mut gas = base;
        let mut failed = gas > gas_limit;
        let mut i = 0;
        while i < n && !failed {
            gas += per_iteration;
            failed = gas > gas_limit;
            i += 1;
        }
        if failed {
            return Some(n);
        }
    }
    None
}

fn dos_refund_loop(p: &Params) -> Result<Outcome, HarnessError> {
    let per = p.positive("per_iteration_gas")?;
    let base = p.int("base_gas");
    let max = p.positive("max_participants")?;
    let join = p.int("join_gas") as u128;
    let side = |limit: u64, price: u64| {
        let n = first_failing_participants(limit, base, per, max);
        // attacker pads the array up to the failing size
        let cost = n.map(|n| n as u128 * join * price as u128);
        map(vec![
            ("first_failing_n", json!(n)),
            ("max_safe_n", json!(n.map(|n| n - 1))),
            (
                "attack_cost_wei",
                cost.map_or(Value::Null, |c| json!(c.to_string())),
            ),
        ])
    };
    let l1 = side(p.int("block_gas_limit"), p.int("l1_gas_price_wei"));
    let l2 = side(p.int("l2_block_gas_limit"), p.int("l2_gas_price_wei"));
    let num = |m: &BTreeMap<String, Value>, k: &str| -> Option<i128> {
        match &m[k] {
            Value::Number(n) => n.as_i64().map(i128::from),
            Value::String(s) => s.parse().ok(),
            _ => None,
        }
    };
    let diff = |k: &str| match (num(&l1, k), num(&l2, k)) {
        (Some(a), Some(b)) => json!((a - b).to_string()),
        (None, None) => json!(0),
        _ => Value::Null,
    };
    let n_delta = match (num(&l1, "first_failing_n"), num(&l2, "first_failing_n")) {
        (Some(a), Some(b)) => json!((a - b) as i64),
        (None, None) => json!(0),
        _ => json!(i64::MAX),
    };
    let cost_delta = diff("attack_cost_wei");
    let cost_delta = match cost_delta.as_str() {
        Some("0") => json!(0),
        _ => cost_delta,
    };
    let narrative = format!(
        "The refund loop fails from N={} on L1 and N={} on L2. Reaching that size costs an attacker {} wei on \
         L1 and {} wei on L2.",
        l1["first_failing_n"], l2["first_failing_n"], l1["attack_cost_wei"], l2["attack_cost_wei"]
    );
    Ok(Outcome {
        metrics: map(vec![
            ("first_failing_n_delta", n_delta),
            ("attack_cost_delta_wei", cost_delta),
        ]),
        l1,
        l2,
        narrative,
    })
}

// ---- S5 ----

fn ledger_json(l: &FeeLedger) -> Value {
    json!({
        "paid_in": l.paid_in,
        "refunded": l.refunded,
        "consumed_as_fees": l.consumed_as_fees,
        "delivered_callvalue": l.delivered_callvalue,
        "lost": l.lost,
        "balanced": l.is_balanced(),
    })
}

fn retryable_fee_paths(p: &Params) -> Result<Outcome, HarnessError> {
    let gas_price = p.positive("gas_price")?;
    let max_gas = p.int("max_gas");
    let gas_required = p.int("gas_required");
    let spike = p.positive("spike_gas_price")?;
    let overflow = || HarnessError::Invalid("S5: fee arithmetic overflows".into());
    let budget = max_gas.checked_mul(gas_price).ok_or_else(overflow)?;
    let params = TicketParams {
        submission_fee: p.int("submission_fee"),
        l2_gas_provided: budget,
        callvalue: p.int("callvalue"),
        refund_address: Address::from_low_u64(0xbeef),
        l1_gas_spent: p.int("l1_gas_spent"),
        callvalue_escrowed: p.text("escrow_callvalue") == "true",
    };
    let deposit = params.deposit().ok_or_else(overflow)?;
    let needed = gas_required.checked_mul(gas_price).ok_or_else(overflow)?;
    if needed > budget {
        return Err(HarnessError::Invalid(
            "S5: gas_required exceeds max_gas, so even the success path cannot execute".into(),
        ));
    }
    if gas_required.checked_mul(spike).ok_or_else(overflow)? <= budget {
        return Err(HarnessError::Invalid(
            "S5: spike_gas_price is too low to make the automatic redeem fail".into(),
        ));
    }
    let manual_fee = p.int("manual_submission_fee");
    let invalid = |e: String| HarnessError::Invalid(format!("S5: {e}"));

    let run = |path: &str| -> Result<FeeLedger, HarnessError> {
        let mut book = RetryableBook::new(RetryableConfig::default());
        let id = book
            .create_ticket(deposit, deposit, params.clone(), 0)
            .map_err(|e| invalid(e.to_string()))?;
        let ok = RedeemAttempt {
            l2_gas_price: gas_price,
            gas_required,
            call_reverts: false,
        };
        let spiked = RedeemAttempt {
            l2_gas_price: spike,
            ..ok
        };
        match path {
            "auto_success" => {
                book.auto_redeem(id, ok)
                    .map_err(|e| invalid(e.to_string()))?;
            }
            "auto_fail_manual" => {
                book.auto_redeem(id, spiked)
                    .map_err(|e| invalid(e.to_string()))?;
                book.manual_redeem(id, manual_fee, needed, 3600)
                    .map_err(|e| invalid(e.to_string()))?;
            }
            _ => {
                book.auto_redeem(id, spiked)
                    .map_err(|e| invalid(e.to_string()))?;
                book.expire_tickets(DEFAULT_BUFFER_LIFETIME);
            }
        }
        debug_assert_eq!(book.total_escrow(), 0);
        Ok(book.ledger())
    };

    // a direct L1 call pays gas once and delivers the value
    let direct = FeeLedger {
        paid_in: params.l1_gas_spent + needed + params.callvalue,
        consumed_as_fees: params.l1_gas_spent + needed,
        delivered_callvalue: params.callvalue,
        ..FeeLedger::default()
    };
    let paths = ["auto_success", "auto_fail_manual", "expiry"];
    let mut l1 = BTreeMap::new();
    let mut l2 = BTreeMap::new();
    let mut metrics = BTreeMap::new();
    let mut total_lost = 0u64;
    let mut total_extra = 0i64;
    for path in paths {
        let led = run(path)?;
        l1.insert(path.to_string(), ledger_json(&direct));
        l2.insert(path.to_string(), ledger_json(&led));
        let extra = led.consumed_as_fees as i64 - direct.consumed_as_fees as i64;
        let undelivered = direct.delivered_callvalue as i64 - led.delivered_callvalue as i64;
        metrics.insert(format!("{path}_extra_fees"), json!(extra));
        metrics.insert(format!("{path}_undelivered_callvalue"), json!(undelivered));
        metrics.insert(format!("{path}_lost"), json!(led.lost));
        metrics.insert(
            format!("{path}_refund_delta"),
            json!(led.refunded as i64 - direct.refunded as i64),
        );
        total_lost += led.lost;
        total_extra += extra;
    }
    metrics.insert("total_lost".into(), json!(total_lost));
    metrics.insert("total_extra_fees".into(), json!(total_extra));
    let narrative = format!(
        "Automatic success consumes the same fees as a direct call. A failed automatic redeem followed by \
         a manual redeem pays {} more in fees, and letting the ticket expire loses {} of callvalue.",
        metrics["auto_fail_manual_extra_fees"], metrics["expiry_lost"]
    );
    Ok(Outcome {
        l1,
        l2,
        metrics,
        narrative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_is_s1_to_s5() {
        let ids: Vec<_> = list_scenarios().iter().map(|s| s.id).collect();
        assert_eq!(ids, ["S1", "S2", "S3", "S4", "S5"]);
        assert!(list_scenarios().iter().all(|s| !s.heading.is_empty()));
        assert!(matches!(
            scenario_info("S9"),
            Err(HarnessError::UnknownScenario { .. })
        ));
        assert_eq!(scenario_info("stale-oracle").unwrap().id, "S1");
    }

    #[test]
    fn unknown_and_bad_params_rejected() {
        let e = run_scenario(&Scenario::new("S2").with_param("nope", 1)).unwrap_err();
        assert!(matches!(e, HarnessError::UnknownParam { .. }));
        assert!(e.to_string().contains("sync_period_s"));
        let e = run_scenario(&Scenario::new("S2").with_param("horizon_s", "abc")).unwrap_err();
        assert!(matches!(e, HarnessError::BadParamValue { .. }));
        let e = run_scenario(&Scenario::new("S2").with_param("sync_period_s", 50)).unwrap_err();
        assert!(matches!(e, HarnessError::Invalid(_)));
    }

    #[test]
    fn s2_default_fraction() {
        let r = run_scenario(&Scenario::new("S2")).unwrap();
        assert_eq!(r.l2_outcome["observable_fraction"], json!(0.25));
        assert_eq!(r.l1_outcome["observable_fraction"], json!(1.0));
        assert!(r.divergent);
    }

    #[test]
    fn s3_deny_allow() {
        let r = run_scenario(&Scenario::new("S3")).unwrap();
        assert_eq!(r.l2_outcome["raw_check"], json!("deny"));
        assert_eq!(r.l2_outcome["alias_aware_check"], json!("allow"));
        let eoa = run_scenario(&Scenario::new("S3").with_param("sender_kind", "eoa")).unwrap();
        assert!(!eoa.divergent);
    }

    #[test]
    fn s4_first_failing() {
        let r = run_scenario(&Scenario::new("S4")).unwrap();
        assert_eq!(r.l1_outcome["first_failing_n"], json!(749));
        assert_eq!(r.l2_outcome["first_failing_n"], json!(749));
        assert_eq!(first_failing_participants(100, 200, 1, 5), Some(1));
        assert_eq!(first_failing_participants(100, 0, 1, 5), None);
    }

    #[test]
    fn s1_zero_downtime_is_null() {
        let r =
            run_scenario(&Scenario::new("S1").with_param("downtime_s", 0).with_seed(7)).unwrap();
        assert!(r.metrics.values().all(is_zero), "{:?}", r.metrics);
        assert!(!r.divergent);
        assert_eq!(r.l1_outcome, r.l2_outcome);
    }

    #[test]
    fn s1_outage_makes_price_stale() {
        let r = run_scenario(&Scenario::new("S1")).unwrap();
        let age = r.l2_outcome["max_price_staleness_s"].as_u64().unwrap();
        assert!(age >= 1800, "{age}");
        assert!(r.divergent);
    }

    #[test]
    fn s5_ledgers_balance() {
        let r = run_scenario(&Scenario::new("S5")).unwrap();
        for path in ["auto_success", "auto_fail_manual", "expiry"] {
            assert_eq!(r.l2_outcome[path]["balanced"], json!(true));
            assert_eq!(
                r.metrics[&format!("{path}_lost")],
                json!(if path == "expiry" { 5_000_000 } else { 0 })
            );
        }
        assert_eq!(r.metrics["auto_success_extra_fees"], json!(0));
        let escrowed =
            run_scenario(&Scenario::new("S5").with_param("escrow_callvalue", "true")).unwrap();
        assert_eq!(escrowed.metrics["total_lost"], json!(0));
    }

    #[test]
    fn serialization_is_canonical() {
        for info in list_scenarios() {
            let s = Scenario::new(info.id).with_seed(3);
            let a = serialize_report(&run_scenario(&s).unwrap());
            let b = serialize_report(&run_scenario(&s).unwrap());
            assert_eq!(a, b);
            assert!(a.ends_with("}\n") && !a.contains('\r'));
            let back = parse_report(&a).unwrap();
            assert_eq!(serialize_report(&back), a);
        }
    }
}
