use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use migrisk::aliasing::{apply_alias, undo_alias, Address, ALIAS_OFFSET};
use migrisk::chainmodel::{l1_block_number_at, l2_view_l1_number_at, L1Chain, L2View, WallClock};
use migrisk::gasmodel::{self, GasParams, REFERENCE_MEAN_PCT, REFERENCE_ROWS};
use migrisk::harness::{self, Scenario};
use migrisk::rules::{self, FindingsReport, RuleConfig};
use migrisk::sequencer::{self, SequencerEvent};

#[derive(Parser)]
#[command(
    name = "migrisk",
    version,
    about = "Ethereum to Arbitrum migration risk toolkit"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the migration-risk rules over MiniSol sources.
    Analyze(AnalyzeArgs),
    /// Differential L1/L2 scenarios.
    #[command(subcommand)]
    Scenario(ScenarioCmd),
    /// L2 gas limit, fees and the cost comparison table.
    #[command(subcommand)]
    Gas(GasCmd),
    /// Address aliasing for L1-to-L2 messages.
    Alias {
        #[arg(value_enum)]
        op: AliasOp,
        address: String,
        #[arg(long)]
        offset: Option<String>,
    },
    /// Migration checklist from a findings JSON file.
    Checklist {
        findings: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// List the built-in rules.
    Rules {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Chain-time and sequencer simulations.
    #[command(subcommand)]
    Sim(SimCmd),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum AliasOp {
    Apply,
    Undo,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Files or directories (searched for *.sol).
    #[arg(required = true)]
    paths: Vec<PathBuf>,
    /// Comma-separated rule ids to enable.
    #[arg(long, value_delimiter = ',')]
    rules: Option<Vec<String>>,
    /// JSON rule configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Exit 1 when anything is found.
    #[arg(long)]
    check: bool,
}

#[derive(Subcommand)]
enum ScenarioCmd {
    List {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    Run {
        id: String,
        /// key=value, repeatable.
        #[arg(long = "param", value_parser = parse_kv)]
        params: Vec<(String, String)>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exit 1 when the report is divergent.
        #[arg(long)]
        check: bool,
    },
}

#[derive(Subcommand)]
enum GasCmd {
    /// Gas limit and fees for one L2 transaction.
    Calc {
        #[arg(long)]
        gas_used_l2: u64,
        #[arg(long)]
        calldata_price_l1: u64,
        #[arg(long)]
        calldata_size_l1: u64,
        #[arg(long)]
        gas_price_l2: u64,
    },
    /// Recompute the reference L1/L2 cost table.
    Table {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Subcommand)]
enum SimCmd {
    /// L1 block number against the L2 view over time.
    Blocks {
        #[arg(long, default_value_t = 0)]
        from: u64,
        #[arg(long, default_value_t = 75)]
        to: u64,
        #[arg(long, default_value_t = 15)]
        step: u64,
        #[arg(long, default_value_t = 15)]
        block_interval: u64,
        #[arg(long, default_value_t = 60)]
        sync_period: u64,
        #[arg(long, default_value_t = 1000)]
        genesis: u64,
        /// Wall-clock label of t=0, seconds past midnight.
        #[arg(long, default_value_t = 43_200)]
        label_offset: u64,
    },
    /// Replay a JSON list of sequencer events.
    Events {
        /// JSON array of timed events.
        file: PathBuf,
        /// Last simulated second.
        #[arg(long)]
        until: u64,
        /// Seconds between sequencer ticks.
        #[arg(long, default_value_t = 1)]
        tick: u64,
        #[arg(long, default_value_t = sequencer::DEFAULT_FORCE_INCLUSION_DELAY)]
        force_inclusion_delay: u64,
    },
}

fn parse_kv(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected key=value, got {s:?}"))
}

/// Exit 2 with a message.
struct Fail(String);

impl<E: std::fmt::Display> From<E> for Fail {
    fn from(e: E) -> Self {
        Fail(e.to_string())
    }
}

type Res = Result<ExitCode, Fail>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(Fail(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Res {
    match cli.cmd {
        Cmd::Analyze(a) => analyze(a),
        Cmd::Scenario(ScenarioCmd::List { format }) => scenario_list(format),
        Cmd::Scenario(ScenarioCmd::Run {
            id,
            params,
            seed,
            out,
            check,
        }) => scenario_run(id, params, seed, out, check),
        Cmd::Gas(GasCmd::Calc {
            gas_used_l2,
            calldata_price_l1,
            calldata_size_l1,
            gas_price_l2,
        }) => {
            let q = gasmodel::quote(&GasParams {
                gas_used_l2,
                calldata_price_l1,
                calldata_size_l1,
                gas_price_l2,
            })?;
            println!("gas_limit {}", q.gas_limit);
            println!("gas_fees  {}", q.gas_fees);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Gas(GasCmd::Table { format }) => gas_table(format),
        Cmd::Alias {
            op,
            address,
            offset,
        } => {
            let a: Address = address.parse()?;
            let off = match offset {
                Some(o) => o.parse()?,
                None => ALIAS_OFFSET,
            };
            let out = match op {
                AliasOp::Apply => apply_alias(a, off),
                AliasOp::Undo => undo_alias(a, off),
            };
            println!("{}", out.to_checksum());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Checklist { findings, format } => {
            let text = read(&findings)?;
            let report: FindingsReport = serde_json::from_str(&text)
                .map_err(|e| Fail(format!("{}: {e}", findings.display())))?;
            let list = rules::migration_checklist(&report.findings);
            match format {
                Format::Text => print!("{list}"),
                Format::Json => println!("{}", serde_json::to_string_pretty(&list)?),
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Rules { format } => {
            let cat = rules::rule_catalog();
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&cat)?),
                Format::Text => {
                    for r in cat {
                        println!("{} [{}] {}", r.id, r.severity.as_str(), r.description);
                        println!("    fix: {}", r.remediation);
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Sim(SimCmd::Blocks {
            from,
            to,
            step,
            block_interval,
            sync_period,
            genesis,
            label_offset,
        }) => {
            let chain = L1Chain::new(genesis, block_interval)?;
            let view = L2View::new(&chain, sync_period, 1)?;
            println!("{:<10} {:>8} {:>8}", "wall", "L1", "L2");
            let mut t = from;
            while t <= to {
                let c = WallClock(t);
                println!(
                    "{:<10} {:>8} {:>8}",
                    WallClock(label_offset + t).hms(),
                    l1_block_number_at(c, &chain),
                    l2_view_l1_number_at(c, &chain, &view)
                );
                t += step.max(1);
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Sim(SimCmd::Events {
            file,
            until,
            tick,
            force_inclusion_delay,
        }) => {
            let events: Vec<SequencerEvent> = serde_json::from_str(&read(&file)?)?;
            let state = sequencer::replay(&events, force_inclusion_delay, tick, until)?;
            println!("{}", serde_json::to_string_pretty(state.executed_log())?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn read(p: &Path) -> Result<String, Fail> {
    fs::read_to_string(p).map_err(|e| Fail(format!("{}: {e}", p.display())))
}

fn collect_sources(p: &Path, out: &mut Vec<PathBuf>) -> Result<(), Fail> {
    if p.is_dir() {
        let mut entries: Vec<PathBuf> = fs::read_dir(p)
            .map_err(|e| Fail(format!("{}: {e}", p.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .collect();
        entries.sort();
        for e in entries {
            if e.is_dir() || e.extension().is_some_and(|x| x == "sol") {
                collect_sources(&e, out)?;
            }
        }
    } else {
        out.push(p.to_path_buf());
    }
    Ok(())
}

fn analyze(a: AnalyzeArgs) -> Res {
    let mut cfg = match &a.config {
        Some(p) => RuleConfig::from_json(&read(p)?)?,
        None => RuleConfig::default(),
    };
    if let Some(ids) = a.rules {
        cfg = cfg.with_enabled(ids.into_iter().map(|s| s.trim().to_string()));
        cfg.validate()?;
    }
    let mut files = Vec::new();
    for p in &a.paths {
        collect_sources(p, &mut files)?;
    }
    let mut names = Vec::new();
    let mut findings = Vec::new();
    let mut parse_failed = false;
    for f in &files {
        let name = f.display().to_string();
        let src = read(f)?;
        match rules::analyze_source(&src, &name, &cfg) {
            Ok(mut fs) => findings.append(&mut fs),
            Err(diags) => {
                parse_failed = true;
                for d in diags {
                    eprintln!("{name}:{d}");
                }
            }
        }
        names.push(name);
    }
    let report = FindingsReport::new(names, findings);
    match a.format {
        Format::Json => print!("{}", report.to_json()),
        Format::Text => {
            for f in &report.findings {
                println!("{f}");
            }
            println!(
                "{} finding(s) in {} file(s)",
                report.findings.len(),
                report.files.len()
            );
        }
    }
    Ok(if parse_failed {
        ExitCode::from(2)
    } else if a.check && !report.findings.is_empty() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn scenario_list(format: Format) -> Res {
    let all = harness::list_scenarios();
    if format == Format::Json {
        println!("{}", serde_json::to_string_pretty(&all)?);
        return Ok(ExitCode::SUCCESS);
    }
    for s in all {
        println!("{} {}: {}", s.id, s.name, s.heading);
        if !s.rules.is_empty() {
            println!("   rules: {}", s.rules.join(", "));
        }
        let pairs: Vec<String> = s
            .params
            .iter()
            .map(|p| format!("{}={}", p.name, p.default))
            .collect();
        let width = pairs.iter().map(String::len).max().unwrap_or(0);
        for (pair, p) in pairs.iter().zip(&s.params) {
            println!("   --param {pair:<width$}  {}", p.description);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn scenario_run(
    id: String,
    params: Vec<(String, String)>,
    seed: u64,
    out: Option<PathBuf>,
    check: bool,
) -> Res {
    let mut s = Scenario::new(id).with_seed(seed);
    for (k, v) in params {
        s = s.with_param(k, v);
    }
    let report = harness::run_scenario(&s)?;
    let text = harness::serialize_report(&report);
    match out {
        Some(p) => {
            fs::write(&p, &text).map_err(|e| Fail(format!("{}: {e}", p.display())))?;
            eprintln!("{}", report.narrative);
        }
        None => print!("{text}"),
    }
    Ok(if check && report.divergent {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn gas_table(format: Format) -> Res {
    let table = gasmodel::savings_table(&gasmodel::reference_inputs())?;
    if format == Format::Json {
        println!("{}", serde_json::to_string_pretty(&table)?);
        return Ok(ExitCode::SUCCESS);
    }
    println!(
        "{:<18} {:>8} {:>8} {:>6} {:>8} {:>8} {:>8}",
        "transaction", "arbitrum", "ethereum", "saved", "printed", "amount", "printed"
    );
    let mut mismatches = 0;
    for (row, reference) in table.rows.iter().zip(REFERENCE_ROWS.iter()) {
        let pct_ok = row.pct_saved == reference.printed_pct;
        let amt_ok = row.amount_saved_cents == reference.printed_amount_cents as i64;
        mismatches += usize::from(!pct_ok) + usize::from(!amt_ok);
        println!(
            "{:<18} {:>8} {:>8} {:>5}% {:>7}% {:>8} {:>8}{}",
            row.label,
            row.arb_cost.to_string(),
            row.eth_cost.to_string(),
            row.pct_saved,
            reference.printed_pct,
            gasmodel::Cents(row.amount_saved_cents.max(0) as u64).to_string(),
            gasmodel::Cents(reference.printed_amount_cents).to_string(),
            if pct_ok && amt_ok { "" } else { "  MISMATCH" }
        );
    }
    let mean_ok = (table.mean_pct_saved - REFERENCE_MEAN_PCT).abs() < 0.05;
    println!(
        "mean saved {:.1}% (printed {:.1}%){}",
        table.mean_pct_saved,
        REFERENCE_MEAN_PCT,
        if mean_ok { "" } else { "  MISMATCH" }
    );
    if mismatches > 0 || !mean_ok {
        println!(
            "{} cell(s) differ from the printed table",
            mismatches + usize::from(!mean_ok)
        );
    }
    Ok(ExitCode::SUCCESS)
}
