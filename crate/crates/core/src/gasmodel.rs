//! L2 gas limit and fee formulas, and the L1/L2 cost comparison table.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GasError {
    #[error("gas_price_l2 must be positive")]
    ZeroGasPrice,
    #[error("gas arithmetic overflow")]
    Overflow,
    #[error("row {0:?}: Ethereum cost must be positive")]
    ZeroEthCost(String),
    #[error("invalid currency amount {0:?}")]
    BadAmount(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GasParams {
    pub gas_used_l2: u64,
    pub calldata_price_l1: u64,
    pub calldata_size_l1: u64,
    pub gas_price_l2: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GasQuote {
    pub gas_limit: u64,
    pub gas_fees: u64,
}

/// `gasUsed_L2 + calldataPrice_L1 * calldataSize_L1 / gasPrice_L2`, with the
/// division rounded up.
pub fn gas_limit(p: &GasParams) -> Result<u64, GasError> {
    if p.gas_price_l2 == 0 {
        return Err(GasError::ZeroGasPrice);
    }
    let calldata_cost = p.calldata_price_l1 as u128 * p.calldata_size_l1 as u128;
    let calldata_gas = calldata_cost.div_ceil(p.gas_price_l2 as u128);
    let total = p.gas_used_l2 as u128 + calldata_gas;
    u64::try_from(total).map_err(|_| GasError::Overflow)
}

pub fn gas_fees(p: &GasParams) -> Result<u64, GasError> {
    quote(p).map(|q| q.gas_fees)
}

pub fn quote(p: &GasParams) -> Result<GasQuote, GasError> {
    let gas_limit = gas_limit(p)?;
    let gas_fees = gas_limit
        .checked_mul(p.gas_price_l2)
        .ok_or(GasError::Overflow)?;
    Ok(GasQuote {
        gas_limit,
        gas_fees,
    })
}

/// Whole cents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cents(pub u64);

impl fmt::Display for Cents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "${}.{:02}", self.0 / 100, self.0 % 100)
    }
}

impl FromStr for Cents {
    type Err = GasError;

    /// Parses `4.02`, `$4.02`, `4` or `4.5`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GasError::BadAmount(s.to_string());
        let t = s.trim().trim_start_matches('$').trim();
        let (whole, frac) = match t.split_once('.') {
            Some((w, f)) => (w, f),
            None => (t, ""),
        };
        if whole.is_empty() && frac.is_empty() || frac.len() > 2 {
            return Err(bad());
        }
        let digits = |x: &str| x.chars().all(|c| c.is_ascii_digit());
        if !digits(whole) || !digits(frac) {
            return Err(bad());
        }
        let w: u64 = if whole.is_empty() {
            0
        } else {
            whole.parse().map_err(|_| bad())?
        };
        let f: u64 = match frac.len() {
            0 => 0,
            1 => frac.parse::<u64>().map_err(|_| bad())? * 10,
            _ => frac.parse().map_err(|_| bad())?,
        };
        w.checked_mul(100)
            .and_then(|c| c.checked_add(f))
            .map(Cents)
            .ok_or_else(bad)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostRow {
    pub label: String,
    pub arb_cost: Cents,
    pub eth_cost: Cents,
    pub pct_saved: u32,
    /// Negative when the L2 is more expensive.
    pub amount_saved_cents: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavingsTable {
    pub rows: Vec<CostRow>,
    /// Mean of the per-row rounded percentages.
    pub mean_pct_saved: f64,
}

/// Nearest-integer percentage saved, halves rounded up. Saturates at 0 when
/// the L2 costs more.
fn pct_saved(arb: u64, eth: u64) -> u32 {
    if arb >= eth {
        return 0;
    }
    let saved = (eth - arb) as u128;
    let eth = eth as u128;
    ((200 * saved + eth) / (2 * eth)) as u32
}

pub fn savings_table(rows: &[(String, Cents, Cents)]) -> Result<SavingsTable, GasError> {
    let mut out = Vec::with_capacity(rows.len());
    for (label, arb, eth) in rows {
        if eth.0 == 0 {
            return Err(GasError::ZeroEthCost(label.clone()));
        }
        out.push(CostRow {
            label: label.clone(),
            arb_cost: *arb,
            eth_cost: *eth,
            pct_saved: pct_saved(arb.0, eth.0),
            amount_saved_cents: eth.0 as i64 - arb.0 as i64,
        });
    }
    let mean_pct_saved = if out.is_empty() {
        0.0
    } else {
        out.iter().map(|r| r.pct_saved as f64).sum::<f64>() / out.len() as f64
    };
    Ok(SavingsTable {
        rows: out,
        mean_pct_saved,
    })
}

/// A published Arbitrum One vs Ethereum cost row with its printed savings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReferenceRow {
    pub label: &'static str,
    pub arb_cents: u64,
    pub eth_cents: u64,
    pub printed_pct: u32,
    pub printed_amount_cents: u64,
}

/// Six-transaction comparison from gas.arbitrum.io, as printed.
pub const REFERENCE_ROWS: [ReferenceRow; 6] = [
    ReferenceRow {
        label: "Aave Deposit",
        arb_cents: 15,
        eth_cents: 402,
        printed_pct: 96,
        printed_amount_cents: 387,
    },
    ReferenceRow {
        label: "EOA Transfer",
        arb_cents: 9,
        eth_cents: 65,
        printed_pct: 87,
        printed_amount_cents: 57,
    },
    ReferenceRow {
        label: "Opensea NFT Sale",
        arb_cents: 20,
        eth_cents: 555,
        printed_pct: 96,
        printed_amount_cents: 535,
    },
    ReferenceRow {
        label: "SushiSwap Swap",
        arb_cents: 8,
        eth_cents: 253,
        printed_pct: 97,
        printed_amount_cents: 245,
    },
    ReferenceRow {
        label: "Uniswap Swap",
        arb_cents: 8,
        eth_cents: 397,
        printed_pct: 98,
        printed_amount_cents: 389,
    },
    ReferenceRow {
        label: "Yearn Deposit",
        arb_cents: 5,
        eth_cents: 363,
        printed_pct: 99,
        printed_amount_cents: 358,
    },
];

/// Printed mean percentage saved over the reference rows.
pub const REFERENCE_MEAN_PCT: f64 = 95.5;

pub fn reference_inputs() -> Vec<(String, Cents, Cents)> {
    REFERENCE_ROWS
        .iter()
        .map(|r| (r.label.to_string(), Cents(r.arb_cents), Cents(r.eth_cents)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(gas_used: u64, price_l1: u64, size: u64, price_l2: u64) -> GasParams {
        GasParams {
            gas_used_l2: gas_used,
            calldata_price_l1: price_l1,
            calldata_size_l1: size,
            gas_price_l2: price_l2,
        }
    }

    #[test]
    fn no_calldata_collapses_to_gas_used() {
        let params = p(21_000, 16, 0, 7);
        assert_eq!(gas_limit(&params).unwrap(), 21_000);
        assert_eq!(gas_fees(&params).unwrap(), 21_000 * 7);
    }

    #[test]
    fn worked_example() {
        // 100000 + 16 * 500 / 1
        let params = p(100_000, 16, 500, 1);
        assert_eq!(gas_limit(&params).unwrap(), 108_000);
        assert_eq!(gas_fees(&params).unwrap(), 108_000);
    }

    #[test]
    fn division_rounds_up() {
        // 16 * 3 / 10 = 4.8 -> 5
        assert_eq!(gas_limit(&p(0, 16, 3, 10)).unwrap(), 5);
        assert_eq!(gas_limit(&p(0, 16, 5, 10)).unwrap(), 8);
    }

    #[test]
    fn zero_price_rejected() {
        assert_eq!(gas_limit(&p(1, 1, 1, 0)), Err(GasError::ZeroGasPrice));
        assert_eq!(gas_fees(&p(1, 1, 1, 0)), Err(GasError::ZeroGasPrice));
    }

    #[test]
    fn overflow_reported() {
        assert_eq!(gas_fees(&p(u64::MAX, 0, 0, 2)), Err(GasError::Overflow));
    }

    #[test]
    fn table_rows_match_print() {
        let t = savings_table(&[
            ("Aave Deposit".into(), Cents(15), Cents(402)),
            ("Uniswap Swap".into(), Cents(8), Cents(397)),
            ("Yearn Deposit".into(), Cents(5), Cents(363)),
        ])
        .unwrap();
        assert_eq!(
            (t.rows[0].pct_saved, t.rows[0].amount_saved_cents),
            (96, 387)
        );
        assert_eq!(
            (t.rows[1].pct_saved, t.rows[1].amount_saved_cents),
            (98, 389)
        );
        assert_eq!(
            (t.rows[2].pct_saved, t.rows[2].amount_saved_cents),
            (99, 358)
        );
    }

    #[test]
    fn zero_eth_cost_rejected() {
        assert!(matches!(
            savings_table(&[("x".into(), Cents(1), Cents(0))]),
            Err(GasError::ZeroEthCost(_))
        ));
    }

    #[test]
    fn cents_parse_and_display() {
        assert_eq!("4.02".parse::<Cents>().unwrap(), Cents(402));
        assert_eq!("$0.5".parse::<Cents>().unwrap(), Cents(50));
        assert_eq!("3".parse::<Cents>().unwrap(), Cents(300));
        assert!("1.234".parse::<Cents>().is_err());
        assert!("abc".parse::<Cents>().is_err());
        assert_eq!(Cents(387).to_string(), "$3.87");
    }
}
