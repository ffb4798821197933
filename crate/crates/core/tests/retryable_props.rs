use migrisk::aliasing::Address;
use migrisk::retryable::*;
use proptest::prelude::*;

#[derive(Debug, Clone)]
enum Op {
    Create {
        funds_pct: u64,
        fee: u64,
        gas: u64,
        value: u64,
        l1: u64,
        escrowed: bool,
    },
    Auto {
        pick: usize,
        price: u64,
        need: u64,
        reverts: bool,
    },
    Manual {
        pick: usize,
        fee: u64,
        gas: u64,
    },
    Renew {
        pick: usize,
        fee: u64,
    },
    Advance(u64),
    Expire,
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        3 => (50u64..150, 0u64..1000, 0u64..5000, 0u64..10_000, 0u64..500, any::<bool>()).prop_map(
            |(funds_pct, fee, gas, value, l1, escrowed)| Op::Create { funds_pct, fee, gas, value, l1, escrowed }
        ),
        3 => (any::<usize>(), 0u64..20, 0u64..1000, any::<bool>())
            .prop_map(|(pick, price, need, reverts)| Op::Auto { pick, price, need, reverts }),
        2 => (any::<usize>(), 0u64..1000, 0u64..5000).prop_map(|(pick, fee, gas)| Op::Manual { pick, fee, gas }),
        1 => (any::<usize>(), 0u64..500).prop_map(|(pick, fee)| Op::Renew { pick, fee }),
        2 => prop_oneof![0u64..3600, Just(DEFAULT_BUFFER_LIFETIME - 1), Just(DEFAULT_BUFFER_LIFETIME)].prop_map(Op::Advance),
        1 => Just(Op::Expire),
    ]
}

fn apply(book: &mut RetryableBook, ids: &mut Vec<TicketId>, now: &mut u64, op: &Op) {
    let pick = |ids: &[TicketId], i: usize| (!ids.is_empty()).then(|| ids[i % ids.len()]);
    match *op {
        Op::Create {
            funds_pct,
            fee,
            gas,
            value,
            l1,
            escrowed,
        } => {
            let params = TicketParams {
                submission_fee: fee,
                l2_gas_provided: gas,
                callvalue: value,
                refund_address: Address::from_low_u64(1),
                l1_gas_spent: l1,
                callvalue_escrowed: escrowed,
            };
            let deposit = params.deposit().unwrap();
            if let Ok(id) = book.create_ticket(deposit * funds_pct / 100, deposit, params, *now) {
                ids.push(id);
            }
        }
        Op::Auto {
            pick: i,
            price,
            need,
            reverts,
        } => {
            if let Some(id) = pick(ids, i) {
                let _ = book.auto_redeem(
                    id,
                    RedeemAttempt {
                        l2_gas_price: price,
                        gas_required: need,
                        call_reverts: reverts,
                    },
                );
            }
        }
        Op::Manual { pick: i, fee, gas } => {
            if let Some(id) = pick(ids, i) {
                let _ = book.manual_redeem(id, fee, gas, *now);
            }
        }
        Op::Renew { pick: i, fee } => {
            if let Some(id) = pick(ids, i) {
                let _ = book.renew(id, fee, *now);
            }
        }
        Op::Advance(dt) => *now += dt,
        Op::Expire => {
            book.expire_tickets(*now);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn ledger_conserves_over_random_sequences(ops in prop::collection::vec(op(), 1..40), renewal in any::<bool>()) {
        let mut book = RetryableBook::new(RetryableConfig { allow_renewal: renewal, ..RetryableConfig::default() });
        let mut ids = Vec::new();
        let mut now = 0;
        for o in &ops {
            apply(&mut book, &mut ids, &mut now, o);
            let l = book.ledger();
            prop_assert!(l.is_balanced(), "{:?} after {:?}", l, o);
            // everything sent in is either settled or still held by a ticket
            prop_assert_eq!(book.total_deposits(), l.paid_in as u128 + book.total_escrow());
        }
    }
}

fn buffered_ticket() -> (RetryableBook, TicketId) {
    let mut book = RetryableBook::default();
    let params = TicketParams {
        submission_fee: 10,
        l2_gas_provided: 50,
        callvalue: 1000,
        refund_address: Address::ZERO,
        l1_gas_spent: 0,
        callvalue_escrowed: false,
    };
    let id = book.create_ticket(1060, 1060, params, 0).unwrap();
    book.auto_redeem(
        id,
        RedeemAttempt {
            l2_gas_price: 1,
            gas_required: 100,
            call_reverts: false,
        },
    )
    .unwrap();
    (book, id)
}

#[test]
fn alive_one_second_before_a_week() {
    let (mut book, id) = buffered_ticket();
    assert!(book.expire_tickets(604_799).is_empty());
    assert_eq!(book.ticket(id).unwrap().state, TicketState::Buffered);
    let d = book.manual_redeem(id, 10, 40, 604_799).unwrap();
    assert_eq!(d.delivered_callvalue, 1000);
}

#[test]
fn expired_at_one_week() {
    let (mut book, id) = buffered_ticket();
    let expired = book.expire_tickets(604_800);
    assert_eq!(expired.len(), 1);
    assert_eq!(expired[0].1.lost, 1000);
    assert_eq!(book.ticket(id).unwrap().state, TicketState::Expired);
    assert!(book.manual_redeem(id, 10, 40, 604_800).is_err());
    assert!(book.ledger().is_balanced());
    assert_eq!(book.total_escrow(), 0);
}

#[test]
fn repeated_fees_on_failed_auto_redeem() {
    let (mut book, id) = buffered_ticket();
    // first attempt burned the 10 fee and the 50 gas budget
    assert_eq!(book.ledger().consumed_as_fees, 60);
    book.manual_redeem(id, 10, 40, 100).unwrap();
    assert_eq!(book.ledger().consumed_as_fees, 110);
}
