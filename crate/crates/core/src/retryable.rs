//! Retryable ticket lifecycle with fee accounting.
//!
//! A [`FeeLedger`] only records settled flows. Funds a live ticket still
//! holds are reported by [`Ticket::escrow`]; they move into the ledger when
//! the ticket settles (redeem, failure, expiry). With that split the identity
//! `paid_in = refunded + consumed_as_fees + delivered_callvalue + lost` holds
//! exactly after every operation.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::AddAssign;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aliasing::Address;

pub const DEFAULT_BUFFER_LIFETIME: u64 = 7 * 86_400;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RetryableError {
    #[error("ticket {id} is {state}, cannot {op}")]
    InvalidState {
        id: TicketId,
        state: TicketState,
        op: TicketOp,
    },
    #[error("redeem window for ticket {id} closed at {closed_at}s (now {now}s)")]
    RedeemWindowClosed {
        id: TicketId,
        closed_at: u64,
        now: u64,
    },
    #[error("buffer renewal is disabled")]
    RenewalDisabled,
    #[error("unknown ticket {0}")]
    UnknownTicket(TicketId),
    #[error("fee arithmetic overflow")]
    Overflow,
}

/// Why ticket creation reverted on L1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RevertReason {
    InsufficientFunds,
}

impl fmt::Display for RevertReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RevertReason::InsufficientFunds => f.write_str("insufficient_funds"),
        }
    }
}

/// Reverted creation. The L1 gas is gone; `ledger` records it as lost.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("createRetryableTicket reverted: {reason} (provided {provided}, required {required})")]
pub struct Revert {
    pub reason: RevertReason,
    pub provided: u64,
    pub required: u64,
    pub ledger: FeeLedger,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TicketId(pub u64);

impl fmt::Display for TicketId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TicketState {
    Created,
    AutoRedeemed,
    Buffered,
    ManuallyRedeemed,
    Expired,
}

impl TicketState {
    pub const ALL: [TicketState; 5] = [
        TicketState::Created,
        TicketState::AutoRedeemed,
        TicketState::Buffered,
        TicketState::ManuallyRedeemed,
        TicketState::Expired,
    ];

    pub fn is_terminal(self) -> bool {
        matches!(
            self,
            TicketState::AutoRedeemed | TicketState::ManuallyRedeemed | TicketState::Expired
        )
    }
}

impl fmt::Display for TicketState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TicketState::Created => "created",
            TicketState::AutoRedeemed => "auto_redeemed",
            TicketState::Buffered => "buffered",
            TicketState::ManuallyRedeemed => "manually_redeemed",
            TicketState::Expired => "expired",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TicketOp {
    AutoRedeemSuccess,
    AutoRedeemFailure,
    ManualRedeem,
    Expire,
    Renew,
}

impl TicketOp {
    pub const ALL: [TicketOp; 5] = [
        TicketOp::AutoRedeemSuccess,
        TicketOp::AutoRedeemFailure,
        TicketOp::ManualRedeem,
        TicketOp::Expire,
        TicketOp::Renew,
    ];
}

impl fmt::Display for TicketOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TicketOp::AutoRedeemSuccess | TicketOp::AutoRedeemFailure => "auto_redeem",
            TicketOp::ManualRedeem => "manual_redeem",
            TicketOp::Expire => "expire",
            TicketOp::Renew => "renew",
        };
        f.write_str(s)
    }
}

/// The lifecycle transition table.
pub fn transition(state: TicketState, op: TicketOp) -> Option<TicketState> {
    use TicketOp::*;
    use TicketState::*;
    match (state, op) {
        (Created, AutoRedeemSuccess) => Some(AutoRedeemed),
        (Created, AutoRedeemFailure) => Some(Buffered),
        (Buffered, ManualRedeem) => Some(ManuallyRedeemed),
        (Buffered, Expire) => Some(Expired),
        (Buffered, Renew) => Some(Buffered),
        _ => None,
    }
}

/// Settled fee flows, all in the smallest fee unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FeeLedger {
    pub paid_in: u64,
    pub refunded: u64,
    pub consumed_as_fees: u64,
    pub delivered_callvalue: u64,
    pub lost: u64,
}

impl FeeLedger {
    pub fn is_balanced(&self) -> bool {
        let out = self.refunded as u128
            + self.consumed_as_fees as u128
            + self.delivered_callvalue as u128
            + self.lost as u128;
        self.paid_in as u128 == out
    }

    fn settle(&mut self, amount: u64) -> &mut Self {
        self.paid_in += amount;
        self
    }
}

impl AddAssign for FeeLedger {
    fn add_assign(&mut self, rhs: Self) {
        self.paid_in += rhs.paid_in;
        self.refunded += rhs.refunded;
        self.consumed_as_fees += rhs.consumed_as_fees;
        self.delivered_callvalue += rhs.delivered_callvalue;
        self.lost += rhs.lost;
    }
}

/// Inputs to `createRetryableTicket`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TicketParams {
    pub submission_fee: u64,
    /// Prepaid L2 execution budget (max gas times bid price), in fee units.
    pub l2_gas_provided: u64,
    pub callvalue: u64,
    pub refund_address: Address,
    /// Gas burned by the L1 creation transaction itself.
    #[serde(default)]
    pub l1_gas_spent: u64,
    /// Callvalue held in a separate escrow that survives buffer expiry.
    #[serde(default)]
    pub callvalue_escrowed: bool,
}

impl TicketParams {
    /// Amount the ticket must hold: fee, gas budget and callvalue.
    pub fn deposit(&self) -> Option<u64> {
        self.submission_fee
            .checked_add(self.l2_gas_provided)?
            .checked_add(self.callvalue)
    }
}

/// Conditions of one L2 execution attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedeemAttempt {
    pub l2_gas_price: u64,
    /// Gas the L2 call needs.
    pub gas_required: u64,
    /// The call reverts even with enough gas.
    #[serde(default)]
    pub call_reverts: bool,
}

impl RedeemAttempt {
    fn cost(&self) -> Option<u64> {
        self.gas_required.checked_mul(self.l2_gas_price)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ticket {
    pub id: TicketId,
    pub created_at: u64,
    pub expires_at: u64,
    pub submission_fee: u64,
    pub l2_gas_provided: u64,
    pub callvalue: u64,
    pub refund_address: Address,
    pub callvalue_escrowed: bool,
    pub state: TicketState,
}

impl Ticket {
    /// Funds the ticket holds that the ledger has not settled yet.
    pub fn escrow(&self) -> u64 {
        match self.state {
            TicketState::Created => self.submission_fee + self.l2_gas_provided + self.callvalue,
            TicketState::Buffered => self.callvalue,
            _ => 0,
        }
    }

    fn step(&mut self, op: TicketOp) -> Result<(), RetryableError> {
        match transition(self.state, op) {
            Some(next) => {
                self.state = next;
                Ok(())
            }
            None => Err(RetryableError::InvalidState {
                id: self.id,
                state: self.state,
                op,
            }),
        }
    }

    fn check_state(&self, op: TicketOp) -> Result<(), RetryableError> {
        transition(self.state, op)
            .map(|_| ())
            .ok_or(RetryableError::InvalidState {
                id: self.id,
                state: self.state,
                op,
            })
    }

    /// Automatic redeem right after creation. Success refunds the
    /// submission fee and unused gas and delivers the callvalue. Failure
    /// buffers the ticket: the submission fee is charged, gas burned by the
    /// attempt is charged, the rest of the gas budget is refunded and the
    /// callvalue stays with the ticket.
    pub fn auto_redeem(&mut self, attempt: RedeemAttempt) -> Result<FeeLedger, RetryableError> {
        self.check_state(TicketOp::AutoRedeemSuccess)?;
        let needed = attempt.cost().ok_or(RetryableError::Overflow)?;
        let gas_ok = self.l2_gas_provided >= needed;
        let mut delta = FeeLedger::default();
        if gas_ok && !attempt.call_reverts {
            self.step(TicketOp::AutoRedeemSuccess)?;
            let settled = self.submission_fee + self.l2_gas_provided + self.callvalue;
            delta.settle(settled);
            delta.consumed_as_fees = needed;
            delta.refunded = self.submission_fee + (self.l2_gas_provided - needed);
            delta.delivered_callvalue = self.callvalue;
        } else {
            self.step(TicketOp::AutoRedeemFailure)?;
            // an out-of-gas attempt burns the whole budget
            let burned = if gas_ok { needed } else { self.l2_gas_provided };
            delta.settle(self.submission_fee + self.l2_gas_provided);
            delta.consumed_as_fees = self.submission_fee + burned;
            delta.refunded = self.l2_gas_provided - burned;
        }
        Ok(delta)
    }

    /// Manual redeem of a buffered ticket: pays a fresh submission fee and
    /// L2 gas, then delivers the callvalue.
    pub fn manual_redeem(
        &mut self,
        new_submission_fee: u64,
        l2_gas: u64,
        now: u64,
    ) -> Result<FeeLedger, RetryableError> {
        self.check_state(TicketOp::ManualRedeem)?;
        if now >= self.expires_at {
            return Err(RetryableError::RedeemWindowClosed {
                id: self.id,
                closed_at: self.expires_at,
                now,
            });
        }
        let fees = new_submission_fee
            .checked_add(l2_gas)
            .ok_or(RetryableError::Overflow)?;
        let settled = fees
            .checked_add(self.callvalue)
            .ok_or(RetryableError::Overflow)?;
        self.step(TicketOp::ManualRedeem)?;
        Ok(FeeLedger {
            paid_in: settled,
            consumed_as_fees: fees,
            delivered_callvalue: self.callvalue,
            ..FeeLedger::default()
        })
    }

    /// Expires a buffered ticket whose lifetime has elapsed. Returns `None`
    /// when nothing happens.
    pub fn expire(&mut self, now: u64, exclude_escrowed_callvalue: bool) -> Option<FeeLedger> {
        if self.state != TicketState::Buffered || now < self.expires_at {
            return None;
        }
        self.state = TicketState::Expired;
        let mut delta = FeeLedger {
            paid_in: self.callvalue,
            ..FeeLedger::default()
        };
        if self.callvalue_escrowed && exclude_escrowed_callvalue {
            delta.refunded = self.callvalue;
        } else {
            delta.lost = self.callvalue;
        }
        Some(delta)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetryableConfig {
    pub buffer_lifetime: u64,
    pub exclude_escrowed_callvalue: bool,
    pub allow_renewal: bool,
}

impl Default for RetryableConfig {
    fn default() -> Self {
        Self {
            buffer_lifetime: DEFAULT_BUFFER_LIFETIME,
            exclude_escrowed_callvalue: true,
            allow_renewal: false,
        }
    }
}

/// Owns tickets, allocates ids and accumulates the ledger.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RetryableBook {
    config: RetryableConfig,
    next_id: u64,
    tickets: BTreeMap<TicketId, Ticket>,
    ledger: FeeLedger,
    deposits: u128,
}

impl RetryableBook {
    pub fn new(config: RetryableConfig) -> Self {
        Self {
            config,
            ..Self::default()
        }
    }

    pub fn config(&self) -> &RetryableConfig {
        &self.config
    }

    pub fn ledger(&self) -> FeeLedger {
        self.ledger
    }

    pub fn tickets(&self) -> impl Iterator<Item = &Ticket> {
        self.tickets.values()
    }

    pub fn ticket(&self, id: TicketId) -> Option<&Ticket> {
        self.tickets.get(&id)
    }

    /// Everything users sent in (successful deposits plus L1 gas).
    pub fn total_deposits(&self) -> u128 {
        self.deposits
    }

    /// Sum of funds still held by live tickets.
    pub fn total_escrow(&self) -> u128 {
        self.tickets.values().map(|t| t.escrow() as u128).sum()
    }

    /// L1 `createRetryableTicket`. Funds below the requirement revert and the
    /// L1 gas is lost. Any excess over the ticket deposit is refunded.
    pub fn create_ticket(
        &mut self,
        funds_provided: u64,
        required: u64,
        params: TicketParams,
        now: u64,
    ) -> Result<TicketId, Revert> {
        let deposit = params.deposit().unwrap_or(u64::MAX);
        let effective = required.max(deposit);
        if funds_provided < effective || params.deposit().is_none() {
            let ledger = FeeLedger {
                paid_in: params.l1_gas_spent,
                lost: params.l1_gas_spent,
                ..FeeLedger::default()
            };
            self.ledger += ledger;
            self.deposits += params.l1_gas_spent as u128;
            return Err(Revert {
                reason: RevertReason::InsufficientFunds,
                provided: funds_provided,
                required: effective,
                ledger,
            });
        }
        let excess = funds_provided - deposit;
        let id = TicketId(self.next_id);
        self.next_id += 1;
        self.ledger += FeeLedger {
            paid_in: params.l1_gas_spent + excess,
            refunded: excess,
            consumed_as_fees: params.l1_gas_spent,
            ..FeeLedger::default()
        };
        self.deposits += funds_provided as u128 + params.l1_gas_spent as u128;
        self.tickets.insert(
            id,
            Ticket {
                id,
                created_at: now,
                expires_at: now.saturating_add(self.config.buffer_lifetime),
                submission_fee: params.submission_fee,
                l2_gas_provided: params.l2_gas_provided,
                callvalue: params.callvalue,
                refund_address: params.refund_address,
                callvalue_escrowed: params.callvalue_escrowed,
                state: TicketState::Created,
            },
        );
        Ok(id)
    }

    fn ticket_mut(&mut self, id: TicketId) -> Result<&mut Ticket, RetryableError> {
        self.tickets
            .get_mut(&id)
            .ok_or(RetryableError::UnknownTicket(id))
    }

    pub fn auto_redeem(
        &mut self,
        id: TicketId,
        attempt: RedeemAttempt,
    ) -> Result<FeeLedger, RetryableError> {
        let delta = self.ticket_mut(id)?.auto_redeem(attempt)?;
        self.ledger += delta;
        Ok(delta)
    }

    pub fn manual_redeem(
        &mut self,
        id: TicketId,
        new_submission_fee: u64,
        l2_gas: u64,
        now: u64,
    ) -> Result<FeeLedger, RetryableError> {
        let delta = self
            .ticket_mut(id)?
            .manual_redeem(new_submission_fee, l2_gas, now)?;
        self.deposits += (new_submission_fee as u128) + (l2_gas as u128);
        self.ledger += delta;
        Ok(delta)
    }

    /// Pays `fee` to keep a buffered ticket for another lifetime.
    pub fn renew(&mut self, id: TicketId, fee: u64, now: u64) -> Result<FeeLedger, RetryableError> {
        if !self.config.allow_renewal {
            return Err(RetryableError::RenewalDisabled);
        }
        let lifetime = self.config.buffer_lifetime;
        let ticket = self.ticket_mut(id)?;
        ticket.check_state(TicketOp::Renew)?;
        if now >= ticket.expires_at {
            return Err(RetryableError::RedeemWindowClosed {
                id,
                closed_at: ticket.expires_at,
                now,
            });
        }
        ticket.expires_at = ticket.expires_at.saturating_add(lifetime);
        let delta = FeeLedger {
            paid_in: fee,
            consumed_as_fees: fee,
            ..FeeLedger::default()
        };
        self.deposits += fee as u128;
        self.ledger += delta;
        Ok(delta)
    }

    /// Expires every buffered ticket whose lifetime has run out at `now`.
    pub fn expire_tickets(&mut self, now: u64) -> Vec<(TicketId, FeeLedger)> {
        let exclude = self.config.exclude_escrowed_callvalue;
        let mut out = Vec::new();
        for ticket in self.tickets.values_mut() {
            if let Some(delta) = ticket.expire(now, exclude) {
                out.push((ticket.id, delta));
            }
        }
        for (_, delta) in &out {
            self.ledger += *delta;
        }
        out
    }

    pub fn apply(&mut self, event: &TicketEvent) -> Result<Option<TicketId>, TicketEventError> {
        match &event.action {
            TicketAction::CreateTicket {
                funds_provided,
                required,
                params,
            } => Ok(Some(self.create_ticket(
                *funds_provided,
                *required,
                params.clone(),
                event.at,
            )?)),
            TicketAction::AutoRedeem { ticket, attempt } => {
                self.auto_redeem(*ticket, *attempt)?;
                Ok(None)
            }
            TicketAction::ManualRedeem {
                ticket,
                new_submission_fee,
                l2_gas,
            } => {
                self.manual_redeem(*ticket, *new_submission_fee, *l2_gas, event.at)?;
                Ok(None)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TicketEventError {
    #[error(transparent)]
    Revert(#[from] Revert),
    #[error(transparent)]
    Retryable(#[from] RetryableError),
}

/// Scenario event record, e.g.
/// `{"at": 0, "action": "auto_redeem", "ticket": 0, "attempt": {...}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TicketEvent {
    pub at: u64,
    #[serde(flatten)]
    pub action: TicketAction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum TicketAction {
    CreateTicket {
        funds_provided: u64,
        required: u64,
        params: TicketParams,
    },
    AutoRedeem {
        ticket: TicketId,
        attempt: RedeemAttempt,
    },
    ManualRedeem {
        ticket: TicketId,
        new_submission_fee: u64,
        l2_gas: u64,
    },
}
