//! L1 block production and the sequencer's lagged view of it.
//!
//! Everything is integer seconds from a simulation epoch. The L1 chain
//! produces a block every `block_interval` seconds; the sequencer refreshes
//! its copy of the L1 block number every `sync_period` seconds, at instants
//! aligned to multiples of `sync_period`. A sync instant already carries the
//! fresh value.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_GENESIS_NUMBER: u64 = 1000;
pub const DEFAULT_BLOCK_INTERVAL: u64 = 15;
pub const DEFAULT_SYNC_PERIOD: u64 = 60;
pub const DEFAULT_SEQ_CLOCK_PRECISION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainConfigError {
    #[error("block interval must be positive")]
    ZeroBlockInterval,
    #[error("sync period must be positive")]
    ZeroSyncPeriod,
    #[error(
        "sync period {sync_period}s is not a multiple of the block interval {block_interval}s"
    )]
    SyncNotMultiple {
        sync_period: u64,
        block_interval: u64,
    },
    #[error("sequencer clock precision must be positive")]
    ZeroPrecision,
    #[error("wall clock cannot move backwards ({from}s -> {to}s)")]
    ClockRegression { from: u64, to: u64 },
}

/// Seconds since the simulation epoch.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
pub struct WallClock(pub u64);

impl WallClock {
    pub const EPOCH: WallClock = WallClock(0);

    pub fn secs(self) -> u64 {
        self.0
    }

    /// Moves the clock forward to `to`. Equal or earlier targets are rejected.
    pub fn advance_to(&mut self, to: u64) -> Result<(), ChainConfigError> {
        if to <= self.0 {
            return Err(ChainConfigError::ClockRegression { from: self.0, to });
        }
        self.0 = to;
        Ok(())
    }

    /// Renders the clock as `hh:mm:ss` past midnight, wrapping at 24 h.
    pub fn hms(self) -> String {
        let t = self.0 % 86_400;
        format!("{:02}:{:02}:{:02}", t / 3600, (t / 60) % 60, t % 60)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct L1Block {
    pub number: u64,
    pub timestamp: u64,
}

/// The L1 chain. Block `genesis_number` is produced at the epoch and a new
/// block follows every `block_interval` seconds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct L1Chain {
    genesis_number: u64,
    block_interval: u64,
}

impl Default for L1Chain {
    fn default() -> Self {
        Self {
            genesis_number: DEFAULT_GENESIS_NUMBER,
            block_interval: DEFAULT_BLOCK_INTERVAL,
        }
    }
}

impl L1Chain {
    pub fn new(genesis_number: u64, block_interval: u64) -> Result<Self, ChainConfigError> {
        if block_interval == 0 {
            return Err(ChainConfigError::ZeroBlockInterval);
        }
        Ok(Self {
            genesis_number,
            block_interval,
        })
    }

    pub fn genesis_number(&self) -> u64 {
        self.genesis_number
    }

    pub fn block_interval(&self) -> u64 {
        self.block_interval
    }

    /// All blocks produced up to and including wall time `until`.
    pub fn blocks(&self, until: WallClock) -> impl Iterator<Item = L1Block> + '_ {
        let count = until.0 / self.block_interval + 1;
        (0..count).map(move |i| L1Block {
            number: self.genesis_number + i,
            timestamp: i * self.block_interval,
        })
    }
}

/// Sequencer-side view of L1. `last_synced_l1_number` and `last_sync_time`
/// are maintained by [`L2View::observe`]; the pure query
/// [`l2_view_l1_number_at`] only needs the configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct L2View {
    sync_period: u64,
    seq_clock_precision: u64,
    last_synced_l1_number: u64,
    last_sync_time: u64,
}

impl Default for L2View {
    fn default() -> Self {
        Self {
            sync_period: DEFAULT_SYNC_PERIOD,
            seq_clock_precision: DEFAULT_SEQ_CLOCK_PRECISION,
            last_synced_l1_number: DEFAULT_GENESIS_NUMBER,
            last_sync_time: 0,
        }
    }
}

impl L2View {
    /// Creates a view synced with `chain` at the epoch.
    pub fn new(
        chain: &L1Chain,
        sync_period: u64,
        seq_clock_precision: u64,
    ) -> Result<Self, ChainConfigError> {
        if sync_period == 0 {
            return Err(ChainConfigError::ZeroSyncPeriod);
        }
        if !sync_period.is_multiple_of(chain.block_interval) {
            return Err(ChainConfigError::SyncNotMultiple {
                sync_period,
                block_interval: chain.block_interval,
            });
        }
        if seq_clock_precision == 0 {
            return Err(ChainConfigError::ZeroPrecision);
        }
        Ok(Self {
            sync_period,
            seq_clock_precision,
            last_synced_l1_number: chain.genesis_number,
            last_sync_time: 0,
        })
    }

    pub fn sync_period(&self) -> u64 {
        self.sync_period
    }

    pub fn seq_clock_precision(&self) -> u64 {
        self.seq_clock_precision
    }

    pub fn last_synced_l1_number(&self) -> u64 {
        self.last_synced_l1_number
    }

    pub fn last_sync_time(&self) -> u64 {
        self.last_sync_time
    }

    /// Most recent sync instant at or before `clock`.
    pub fn sync_instant(&self, clock: WallClock) -> WallClock {
        WallClock(clock.0 / self.sync_period * self.sync_period)
    }

    /// Brings the stored sync state up to `clock` and returns the L1 number
    /// the sequencer reports at that moment.
    pub fn observe(&mut self, clock: WallClock, chain: &L1Chain) -> u64 {
        let instant = self.sync_instant(clock);
        if instant.0 >= self.last_sync_time {
            self.last_sync_time = instant.0;
            self.last_synced_l1_number = l1_block_number_at(instant, chain);
        }
        self.last_synced_l1_number
    }
}

/// True L1 `block.number` at wall time `clock`.
pub fn l1_block_number_at(clock: WallClock, chain: &L1Chain) -> u64 {
    chain.genesis_number + clock.0 / chain.block_interval
}

/// L1 `block.number` as read by a contract on L2 at wall time `clock`.
pub fn l2_view_l1_number_at(clock: WallClock, chain: &L1Chain, view: &L2View) -> u64 {
    l1_block_number_at(view.sync_instant(clock), chain)
}

/// Value of `block.timestamp` on L2: the sequencer's clock truncated to its
/// precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct L2Timestamp(pub u64);

pub fn l2_timestamp_read(view: &L2View, clock: WallClock) -> L2Timestamp {
    let p = view.seq_clock_precision;
    L2Timestamp(clock.0 / p * p)
}

/// Sequencer local clock with sub-second readings. Readings are truncated to
/// the view's precision and never go backwards, so back-to-back blocks can
/// share a timestamp.
#[derive(Debug, Clone)]
pub struct SequencerClock {
    precision_ms: u64,
    last: Option<L2Timestamp>,
}

impl SequencerClock {
    pub fn new(view: &L2View) -> Self {
        Self {
            precision_ms: view.seq_clock_precision * 1000,
            last: None,
        }
    }

    /// Reads the clock at local time `local_ms` (milliseconds since epoch).
    pub fn read_millis(&mut self, local_ms: u64) -> L2Timestamp {
        let truncated = local_ms / self.precision_ms * self.precision_ms / 1000;
        let ts = match self.last {
            Some(prev) if prev.0 > truncated => prev,
            _ => L2Timestamp(truncated),
        };
        self.last = Some(ts);
        ts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> (L1Chain, L2View) {
        let chain = L1Chain::default();
        let view = L2View::new(&chain, 60, 1).unwrap();
        (chain, view)
    }

    #[test]
    fn l1_number_examples() {
        let chain = L1Chain::default();
        assert_eq!(l1_block_number_at(WallClock(45), &chain), 1003);
        assert_eq!(l1_block_number_at(WallClock(0), &chain), 1000);
        assert_eq!(l1_block_number_at(WallClock(75), &chain), 1005);
    }

    #[test]
    fn l2_view_examples() {
        let (chain, view) = defaults();
        assert_eq!(l2_view_l1_number_at(WallClock(30), &chain, &view), 1000);
        assert_eq!(l1_block_number_at(WallClock(30), &chain), 1002);
        assert_eq!(l2_view_l1_number_at(WallClock(60), &chain, &view), 1004);
        assert_eq!(l2_view_l1_number_at(WallClock(0), &chain, &view), 1000);
    }

    #[test]
    fn timestamp_reads() {
        let (_, view) = defaults();
        let mut clock = SequencerClock::new(&view);
        assert_eq!(clock.read_millis(100_200), clock.read_millis(100_800));
        assert_eq!(clock.read_millis(100_900), L2Timestamp(100));

        assert_eq!(l2_timestamp_read(&view, WallClock(100)), L2Timestamp(100));
        assert_eq!(l2_timestamp_read(&view, WallClock(101)), L2Timestamp(101));

        let seq: Vec<_> = [5, 5, 6]
            .iter()
            .map(|&t| l2_timestamp_read(&view, WallClock(t)).0)
            .collect();
        assert_eq!(seq, vec![5, 5, 6]);
    }

    #[test]
    fn sequencer_clock_never_decreases() {
        let (_, view) = defaults();
        let mut clock = SequencerClock::new(&view);
        assert_eq!(clock.read_millis(5_000), L2Timestamp(5));
        // local clock jitter backwards
        assert_eq!(clock.read_millis(4_000), L2Timestamp(5));
    }

    #[test]
    fn observe_tracks_sync_state() {
        let (chain, mut view) = defaults();
        assert_eq!(view.observe(WallClock(59), &chain), 1000);
        assert_eq!(view.last_sync_time(), 0);
        assert_eq!(view.observe(WallClock(61), &chain), 1004);
        assert_eq!(view.last_sync_time(), 60);
        assert!(view.last_synced_l1_number() <= l1_block_number_at(WallClock(61), &chain));
    }

    #[test]
    fn config_validation() {
        assert_eq!(L1Chain::new(0, 0), Err(ChainConfigError::ZeroBlockInterval));
        let chain = L1Chain::default();
        assert!(matches!(
            L2View::new(&chain, 50, 1),
            Err(ChainConfigError::SyncNotMultiple { .. })
        ));
        assert_eq!(
            L2View::new(&chain, 0, 1),
            Err(ChainConfigError::ZeroSyncPeriod)
        );
        assert_eq!(
            L2View::new(&chain, 60, 0),
            Err(ChainConfigError::ZeroPrecision)
        );
    }

    #[test]
    fn wall_clock_advances_strictly() {
        let mut c = WallClock::EPOCH;
        c.advance_to(15).unwrap();
        assert!(c.advance_to(15).is_err());
        assert!(c.advance_to(3).is_err());
        assert_eq!(c.hms(), "00:00:15");
    }

    #[test]
    fn blocks_are_consecutive() {
        let chain = L1Chain::default();
        let blocks: Vec<_> = chain.blocks(WallClock(75)).collect();
        assert_eq!(blocks.len(), 6);
        for w in blocks.windows(2) {
            assert_eq!(w[1].number, w[0].number + 1);
            assert_eq!(w[1].timestamp, w[0].timestamp + 15);
        }
    }
}
