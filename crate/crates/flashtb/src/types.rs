//! Basic index and time types shared across the crate.

use serde::{Deserialize, Serialize};

/// Seconds since midnight of the first service day.
pub type Time = u32;

/// Sentinel for "not reachable" / "no footpath".
pub const INFINITY: Time = Time::MAX;

/// Service horizon: two consecutive days plus a six hour overnight margin.
/// Journeys that would leave the horizon are truncated by construction
/// (no event may lie outside it).
pub const HORIZON: Time = 2 * 86_400 + 6 * 3_600;

macro_rules! index_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(
            Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize,
        )]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn idx(self) -> usize {
                self.0 as usize
            }
        }

        impl From<usize> for $name {
            #[inline]
            fn from(v: usize) -> Self {
                $name(v as u32)
            }
        }

        impl std::fmt::Display for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

index_type!(
    /// Dense stop index; doubles as the stop ordering `id_S`.
    StopId
);
index_type!(
    /// Dense trip index in line-major layout.
    TripId
);
index_type!(
    /// Dense line index; doubles as the line ordering `id_L`.
    LineId
);
index_type!(
    /// Dense stop-event index in trip-major layout; doubles as the
    /// event ordering `id_E`.
    EventId
);

/// Saturating addition that keeps [`INFINITY`] absorbing.
#[inline]
pub fn time_add(a: Time, b: Time) -> Time {
    if a == INFINITY || b == INFINITY {
        INFINITY
    } else {
        a.saturating_add(b)
    }
}
