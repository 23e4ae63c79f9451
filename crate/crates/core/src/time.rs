//! Clock abstraction so the solver and search loop can honour wall-time
//! budgets without depending on `std`.

use core::time::Duration;

pub trait Clock {
    /// Monotonic time since an arbitrary fixed origin.
    fn now(&self) -> Duration;
}

/// A clock that never advances. Deadlines against it never expire.
#[derive(Clone, Copy, Debug, Default)]
pub struct FrozenClock;

impl Clock for FrozenClock {
    fn now(&self) -> Duration {
        Duration::ZERO
    }
}

/// Optional absolute deadline on a clock.
#[derive(Clone, Copy)]
pub struct Deadline<'a> {
    clock: &'a dyn Clock,
    at: Option<Duration>,
}

impl<'a> Deadline<'a> {
    pub fn none(clock: &'a dyn Clock) -> Self {
        Deadline { clock, at: None }
    }

    pub fn at(clock: &'a dyn Clock, at: Option<Duration>) -> Self {
        Deadline { clock, at }
    }

    pub fn after(clock: &'a dyn Clock, budget: Duration) -> Self {
        Deadline {
            clock,
            at: Some(clock.now().saturating_add(budget)),
        }
    }

    pub fn clock(&self) -> &'a dyn Clock {
        self.clock
    }

    pub fn instant(&self) -> Option<Duration> {
        self.at
    }

    pub fn expired(&self) -> bool {
        match self.at {
            Some(at) => self.clock.now() >= at,
            None => false,
        }
    }

    /// The earlier of two deadlines on the same clock.
    pub fn min(self, other: Option<Duration>) -> Self {
        let at = match (self.at, other) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        Deadline { clock: self.clock, at }
    }
}
