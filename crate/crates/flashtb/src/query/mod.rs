//! Query engines: fixed-departure one-to-one search, one-to-all search with
//! local pruning, profile searches, and the flagged variants that scan only
//! transfers marked for the target cell.

mod onetoall;
mod onetoone;
mod profile;

pub mod flash;

pub use onetoall::{one_to_all_query, OneToAllResult};
pub use onetoone::{tb_query, OneToOneResult};
pub use profile::{profile_query_tb, one_to_all_profile, OneToAllProfile, RunRecord};

use crate::timetable::{Journey, Timetable, TripSegment};
use crate::types::{StopId, Time, TripId};

pub const DEFAULT_MAX_ROUNDS: usize = 15;

#[derive(Debug, Clone, Copy)]
pub struct QueryOptions {
    pub max_rounds: usize,
    pub target_pruning: bool,
    pub line_pruning: bool,
}

impl Default for QueryOptions {
    fn default() -> Self {
        QueryOptions {
            max_rounds: DEFAULT_MAX_ROUNDS,
            target_pruning: true,
            line_pruning: true,
        }
    }
}

/// Exact, deterministic per-query counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Statistics {
    pub rounds: u32,
    pub scanned_segments: u64,
    pub scanned_events: u64,
    pub scanned_transfers: u64,
    pub enqueued_segments: u64,
    pub query_ns: u128,
    pub unpack_ns: u128,
}

impl Statistics {
    pub fn add(&mut self, other: &Statistics) {
        self.rounds += other.rounds;
        self.scanned_segments += other.scanned_segments;
        self.scanned_events += other.scanned_events;
        self.scanned_transfers += other.scanned_transfers;
        self.enqueued_segments += other.enqueued_segments;
        self.query_ns += other.query_ns;
        self.unpack_ns += other.unpack_ns;
    }
}

/// Transfer admission: the plain engines admit everything, the flagged
/// engines admit only transfers flagged for the target cell. The engine must
/// consult the filter before touching the transfer.
pub trait TransferFilter {
    fn admits(&self, transfer_idx: usize) -> bool;
}

pub struct AllTransfers;

impl TransferFilter for AllTransfers {
    #[inline]
    fn admits(&self, _transfer_idx: usize) -> bool {
        true
    }
}

/// A trip segment in a round queue: exits `from..=to` are scannable, the
/// trip was entered at `from - 1`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct QueuedSegment {
    pub trip: TripId,
    pub from: u32,
    pub to: u32,
    pub parent: Option<SegmentRef>,
    pub parent_exit: u32,
}

/// Stable reference into the retained round queues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct SegmentRef {
    pub round: u32,
    pub offset: u32,
}

#[derive(Debug, Default)]
pub(crate) struct RoundQueues {
    rounds: Vec<Vec<QueuedSegment>>,
}

impl RoundQueues {
    pub fn new(max_rounds: usize) -> RoundQueues {
        RoundQueues {
            rounds: vec![Vec::new(); max_rounds + 2],
        }
    }

    pub fn clear(&mut self) {
        for r in &mut self.rounds {
            r.clear();
        }
    }

    #[inline]
    pub fn push(&mut self, round: usize, seg: QueuedSegment) -> SegmentRef {
        let offset = self.rounds[round].len() as u32;
        self.rounds[round].push(seg);
        SegmentRef {
            round: round as u32,
            offset,
        }
    }

    #[inline]
    pub fn round(&self, round: usize) -> &[QueuedSegment] {
        &self.rounds[round]
    }

    #[inline]
    pub fn get(&self, r: SegmentRef) -> QueuedSegment {
        self.rounds[r.round as usize][r.offset as usize]
    }

    /// Follows parent pointers back to the source.
    pub fn unpack(
        &self,
        source: StopId,
        target: StopId,
        last: SegmentRef,
        exit: u32,
    ) -> Journey {
        let mut segments = Vec::new();
        let mut cursor = Some((last, exit));
        while let Some((sref, exit_idx)) = cursor {
            let seg = self.get(sref);
            segments.push(TripSegment {
                trip: seg.trip,
                enter: seg.from - 1,
                exit: exit_idx,
            });
            cursor = seg.parent.map(|p| (p, seg.parent_exit));
        }
        segments.reverse();
        Journey::new(source, target, segments)
    }
}

/// Reached indices R(T). The fixed-departure engines only need the plain
/// store; the flagged engine layers a 16-bit timestamp over it so state
/// survives across queries without a full reset.
pub(crate) trait ReachedIndex {
    fn get(&mut self, trip: TripId) -> u32;
    fn set(&mut self, trip: TripId, value: u32);
}

pub(crate) struct FreshReached {
    r: Vec<u32>,
}

impl FreshReached {
    pub fn new(tt: &Timetable) -> FreshReached {
        FreshReached {
            r: (0..tt.num_trips())
                .map(|t| tt.trip_len(TripId::from(t)))
                .collect(),
        }
    }
}

impl ReachedIndex for FreshReached {
    #[inline]
    fn get(&mut self, trip: TripId) -> u32 {
        self.r[trip.idx()]
    }

    #[inline]
    fn set(&mut self, trip: TripId, value: u32) {
        self.r[trip.idx()] = value;
    }
}

pub(crate) struct StampedReached {
    r: Vec<u32>,
    stamp: Vec<u16>,
    current: u16,
    trip_len: Vec<u32>,
}

impl StampedReached {
    pub fn new(tt: &Timetable) -> StampedReached {
        let trip_len: Vec<u32> = (0..tt.num_trips())
            .map(|t| tt.trip_len(TripId::from(t)))
            .collect();
        StampedReached {
            r: trip_len.clone(),
            stamp: vec![0; tt.num_trips()],
            current: 0,
            trip_len,
        }
    }

    /// Starts a query. When the 16-bit counter overflows, every reached
    /// index is physically reset.
    pub fn begin_query(&mut self) {
        self.current = self.current.wrapping_add(1);
        if self.current == 0 {
            self.r.copy_from_slice(&self.trip_len);
            self.stamp.fill(0);
            self.current = 1;
        }
    }
}

impl ReachedIndex for StampedReached {
    #[inline]
    fn get(&mut self, trip: TripId) -> u32 {
        if self.stamp[trip.idx()] != self.current {
            self.stamp[trip.idx()] = self.current;
            self.r[trip.idx()] = self.trip_len[trip.idx()];
        }
        self.r[trip.idx()]
    }

    #[inline]
    fn set(&mut self, trip: TripId, value: u32) {
        debug_assert_eq!(self.stamp[trip.idx()], self.current);
        self.r[trip.idx()] = value;
    }
}

/// Seeds the first round: for every stop reachable by the initial footpath,
/// the earliest enterable trip of every line there.
pub(crate) fn seed_lines(
    tt: &Timetable,
    source: StopId,
    departure: Time,
) -> Vec<(TripId, u32)> {
    let mut seeds = Vec::new();
    for (p, walk) in tt.footpaths().from(source) {
        let ready = crate::types::time_add(departure, walk);
        for &(line, idx) in tt.lines_at(p) {
            if (idx as usize) + 1 >= tt.line(line).stops.len() {
                continue;
            }
            if let Some(trip) = tt.earliest_trip(line, idx, ready) {
                seeds.push((trip, idx));
            }
        }
    }
    seeds
}
