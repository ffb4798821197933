//! Sequencer with a delayed inbox.
//!
//! Direct transactions go to the sequencer's pending queue while it is up.
//! Anything submitted while it is down, and anything sent through the L1
//! delayed inbox, waits in the delayed inbox. On every active tick the
//! delayed inbox drains before the pending queue. While down, only
//! delayed-inbox transactions older than the force-inclusion delay execute.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_FORCE_INCLUSION_DELAY: u64 = 86_400;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SequencerError {
    #[error("transaction id {0:?} was already submitted")]
    DuplicateId(String),
    #[error("tick at {now}s precedes previous tick at {previous}s")]
    TimeRegression { previous: u64, now: u64 },
    #[error("no delayed-inbox transaction with id {0:?}")]
    UnknownDelayedTx(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    DirectToSequencer,
    DelayedInbox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    #[default]
    Active,
    Down,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct L2Tx {
    pub id: String,
    pub submit_time: u64,
    pub origin: Origin,
    #[serde(default)]
    pub gas_price: u64,
    #[serde(default)]
    pub gas_limit: u64,
    /// Set when the user-chosen gas parameters are too low. Underpriced
    /// delayed-inbox transactions are skipped by force inclusion.
    #[serde(default)]
    pub underpriced: bool,
    /// Opaque hook for scenario code.
    #[serde(default)]
    pub payload: Option<String>,
}

impl L2Tx {
    pub fn direct(id: impl Into<String>, submit_time: u64) -> Self {
        Self::new(id, submit_time, Origin::DirectToSequencer)
    }

    pub fn via_delayed_inbox(id: impl Into<String>, submit_time: u64) -> Self {
        Self::new(id, submit_time, Origin::DelayedInbox)
    }

    pub fn new(id: impl Into<String>, submit_time: u64, origin: Origin) -> Self {
        Self {
            id: id.into(),
            submit_time,
            origin,
            gas_price: 0,
            gas_limit: 0,
            underpriced: false,
            payload: None,
        }
    }

    pub fn with_payload(mut self, payload: impl Into<String>) -> Self {
        self.payload = Some(payload.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Executed {
    pub tx: L2Tx,
    pub execution_time: u64,
}

impl Executed {
    pub fn delay(&self) -> u64 {
        self.execution_time - self.tx.submit_time
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequencerState {
    status: Status,
    pending: VecDeque<L2Tx>,
    delayed_inbox: VecDeque<L2Tx>,
    force_inclusion_delay: u64,
    executed_log: Vec<Executed>,
    seen: BTreeSet<String>,
    last_tick: Option<u64>,
}

impl Default for SequencerState {
    fn default() -> Self {
        Self::new(DEFAULT_FORCE_INCLUSION_DELAY)
    }
}

impl SequencerState {
    pub fn new(force_inclusion_delay: u64) -> Self {
        Self {
            status: Status::Active,
            pending: VecDeque::new(),
            delayed_inbox: VecDeque::new(),
            force_inclusion_delay,
            executed_log: Vec::new(),
            seen: BTreeSet::new(),
            last_tick: None,
        }
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn pending(&self) -> impl ExactSizeIterator<Item = &L2Tx> {
        self.pending.iter()
    }

    pub fn delayed_inbox(&self) -> impl ExactSizeIterator<Item = &L2Tx> {
        self.delayed_inbox.iter()
    }

    pub fn executed_log(&self) -> &[Executed] {
        &self.executed_log
    }

    pub fn force_inclusion_delay(&self) -> u64 {
        self.force_inclusion_delay
    }

    pub fn submitted_count(&self) -> usize {
        self.seen.len()
    }

    pub fn last_tick(&self) -> Option<u64> {
        self.last_tick
    }

    pub fn submit(&mut self, tx: L2Tx) -> Result<(), SequencerError> {
        if self.seen.contains(&tx.id) {
            return Err(SequencerError::DuplicateId(tx.id));
        }
        self.seen.insert(tx.id.clone());
        match (self.status, tx.origin) {
            (Status::Active, Origin::DirectToSequencer) => self.pending.push_back(tx),
            _ => self.delayed_inbox.push_back(tx),
        }
        Ok(())
    }

    pub fn set_status(&mut self, status: Status) {
        self.status = status;
    }

    /// Fixes the gas parameters of a queued delayed-inbox transaction and
    /// makes it eligible for force inclusion again.
    pub fn reprice(&mut self, id: &str, gas_price: u64) -> Result<(), SequencerError> {
        let tx = self
            .delayed_inbox
            .iter_mut()
            .find(|tx| tx.id == id)
            .ok_or_else(|| SequencerError::UnknownDelayedTx(id.to_string()))?;
        tx.gas_price = gas_price;
        tx.underpriced = false;
        Ok(())
    }

    /// Executes whatever is due at `now` and returns the executed
    /// transactions in execution order.
    pub fn tick(&mut self, now: u64) -> Result<Vec<L2Tx>, SequencerError> {
        if let Some(previous) = self.last_tick {
            if now < previous {
                return Err(SequencerError::TimeRegression { previous, now });
            }
        }
        self.last_tick = Some(now);

        let mut out = Vec::new();
        match self.status {
            Status::Active => {
                drain_due(&mut self.delayed_inbox, now, &mut out);
                drain_due(&mut self.pending, now, &mut out);
            }
            Status::Down => {
                let delay = self.force_inclusion_delay;
                let mut kept = VecDeque::with_capacity(self.delayed_inbox.len());
                for tx in self.delayed_inbox.drain(..) {
                    let due = tx.submit_time.saturating_add(delay) <= now;
                    if due && !tx.underpriced {
                        out.push(tx);
                    } else {
                        kept.push_back(tx);
                    }
                }
                self.delayed_inbox = kept;
            }
        }
        self.executed_log
            .extend(out.iter().cloned().map(|tx| Executed {
                tx,
                execution_time: now,
            }));
        Ok(out)
    }

    /// Largest execution delay in the log; zero when nothing has executed.
    pub fn staleness(&self) -> u64 {
        self.executed_log
            .iter()
            .map(Executed::delay)
            .max()
            .unwrap_or(0)
    }

    /// Applies one scripted event. Ticks are not implied; the caller decides
    /// the tick schedule.
    pub fn apply(&mut self, event: &SequencerEvent) -> Result<(), SequencerError> {
        match &event.action {
            SequencerAction::SequencerDown => self.set_status(Status::Down),
            SequencerAction::SequencerUp => self.set_status(Status::Active),
            SequencerAction::SubmitTx {
                id,
                origin,
                gas_price,
                gas_limit,
                underpriced,
            } => self.submit(L2Tx {
                id: id.clone(),
                submit_time: event.at,
                origin: origin.unwrap_or(Origin::DirectToSequencer),
                gas_price: *gas_price,
                gas_limit: *gas_limit,
                underpriced: *underpriced,
                payload: None,
            })?,
        }
        Ok(())
    }
}

fn drain_due(queue: &mut VecDeque<L2Tx>, now: u64, out: &mut Vec<L2Tx>) {
    while queue.front().is_some_and(|tx| tx.submit_time <= now) {
        out.extend(queue.pop_front());
    }
}

/// Scenario event record, e.g. `{"at": 10, "action": "submit_tx", "id": "a"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequencerEvent {
    pub at: u64,
    #[serde(flatten)]
    pub action: SequencerAction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum SequencerAction {
    SequencerDown,
    SequencerUp,
    SubmitTx {
        id: String,
        #[serde(default)]
        origin: Option<Origin>,
        #[serde(default)]
        gas_price: u64,
        #[serde(default)]
        gas_limit: u64,
        #[serde(default)]
        underpriced: bool,
    },
}

/// Replays `events` (sorted by `at`) against a fresh state, ticking every
/// `tick_interval` seconds until `until`. Events at an instant are applied
/// before that instant's tick.
pub fn replay(
    events: &[SequencerEvent],
    force_inclusion_delay: u64,
    tick_interval: u64,
    until: u64,
) -> Result<SequencerState, SequencerError> {
    let mut state = SequencerState::new(force_inclusion_delay);
    let mut events = events.to_vec();
    events.sort_by_key(|e| e.at);
    let mut idx = 0;
    let step = tick_interval.max(1);
    let mut now = 0;
    loop {
        while idx < events.len() && events[idx].at <= now {
            state.apply(&events[idx])?;
            idx += 1;
        }
        state.tick(now)?;
        if now >= until {
            break;
        }
        now = (now + step).min(until);
    }
    Ok(state)
}
