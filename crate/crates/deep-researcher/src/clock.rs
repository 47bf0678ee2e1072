//! Injectable time sources.
//!
//! Scripted runs use [`FixedClock`] so that two executions of the same script
//! produce bit-identical contexts (the resume test depends on this).

use chrono::{DateTime, TimeZone, Utc};

/// Source of timestamps for trajectories, reports, and checkpoints.
pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

/// Wall-clock time.
#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// Always returns the same instant.
#[derive(Debug, Clone, Copy)]
pub struct FixedClock(pub DateTime<Utc>);

impl FixedClock {
    /// Clock pinned to the Unix epoch.
    pub fn epoch() -> Self {
        FixedClock(Utc.timestamp_opt(0, 0).unwrap())
    }
}

impl Clock for FixedClock {
    fn now(&self) -> DateTime<Utc> {
        self.0
    }
}
