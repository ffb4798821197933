use migrisk::gasmodel::*;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = GasParams> {
    (
        0u64..50_000_000,
        0u64..1_000_000_000,
        0u64..200_000,
        1u64..10_000_000_000,
    )
        .prop_map(
            |(gas_used_l2, calldata_price_l1, calldata_size_l1, gas_price_l2)| GasParams {
                gas_used_l2,
                calldata_price_l1,
                calldata_size_l1,
                gas_price_l2,
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn fees_decompose_within_one_gas_unit(p in params()) {
        let q = quote(&p).unwrap();
        let exact = p.gas_used_l2 as u128 * p.gas_price_l2 as u128
            + p.calldata_price_l1 as u128 * p.calldata_size_l1 as u128;
        let fees = q.gas_fees as u128;
        // rounding the L1 component up to whole L2 gas costs less than one gas unit
        prop_assert!(fees >= exact);
        prop_assert!(fees - exact < p.gas_price_l2 as u128);
    }

    #[test]
    fn limit_is_ceiling(p in params()) {
        let l = gas_limit(&p).unwrap() as u128;
        let l1 = p.calldata_price_l1 as u128 * p.calldata_size_l1 as u128;
        let extra = l - p.gas_used_l2 as u128;
        prop_assert!(extra * p.gas_price_l2 as u128 >= l1);
        prop_assert!(extra == 0 || (extra - 1) * (p.gas_price_l2 as u128) < l1);
    }

    #[test]
    fn pct_saved_is_nearest_integer(arb in 0u64..100_000, eth in 1u64..100_000) {
        let t = savings_table(&[("r".into(), Cents(arb), Cents(eth))]).unwrap();
        let row = &t.rows[0];
        let exact = if arb >= eth { 0.0 } else { 100.0 * (eth - arb) as f64 / eth as f64 };
        prop_assert!((row.pct_saved as f64 - exact).abs() <= 0.5 + 1e-9);
        prop_assert_eq!(row.amount_saved_cents, eth as i64 - arb as i64);
    }

    #[test]
    fn cents_display_parses_back(c in 0u64..10_000_000) {
        prop_assert_eq!(Cents(c).to_string().parse::<Cents>().unwrap(), Cents(c));
    }
}

#[test]
fn worked_example() {
    let p = GasParams {
        gas_used_l2: 100_000,
        calldata_price_l1: 30,
        calldata_size_l1: 1_000,
        gas_price_l2: 7,
    };
    // ceil(30000 / 7) = 4286
    assert_eq!(gas_limit(&p).unwrap(), 104_286);
    assert_eq!(gas_fees(&p).unwrap(), 730_002);
}

#[test]
fn zero_price_rejected() {
    let p = GasParams {
        gas_price_l2: 0,
        ..GasParams::default()
    };
    assert_eq!(gas_limit(&p), Err(GasError::ZeroGasPrice));
}

#[test]
fn reference_rows_recomputed() {
    let t = savings_table(&reference_inputs()).unwrap();
    let pcts: Vec<u32> = t.rows.iter().map(|r| r.pct_saved).collect();
    // independent oracle: round(100 * saved / eth) in floating point
    let oracle: Vec<u32> = REFERENCE_ROWS
        .iter()
        .map(|r| (100.0 * (r.eth_cents - r.arb_cents) as f64 / r.eth_cents as f64).round() as u32)
        .collect();
    assert_eq!(pcts, oracle);
    let amounts: Vec<i64> = t.rows.iter().map(|r| r.amount_saved_cents).collect();
    assert_eq!(amounts, [387, 56, 535, 245, 389, 358]);
}
