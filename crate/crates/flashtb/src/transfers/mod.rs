//! Event-to-event transfer sets: the classic generate-and-reduce
//! precomputation and the canonicity-preserving variant computed by a
//! two-round canonical profile search ([`trans_ultra`]).

pub(crate) mod generate;
mod ultra;

pub use generate::{generate_transfers, reduce_latest_exit, reduce_uturn, tb_transfer_set};
pub use ultra::trans_ultra;

use crate::error::{Error, Result};
use crate::io_util::{Reader, Writer};
use crate::timetable::Timetable;
use crate::types::{time_add, EventId, Time};
use std::path::Path;

const MAGIC: &[u8; 4] = b"FTTS";
const VERSION: u16 = 1;

/// One transfer: change from `from` to `to`, arriving at the target stop at
/// `walk_arrival` (source event arrival plus the footpath).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transfer {
    pub from: EventId,
    pub to: EventId,
    pub walk_arrival: Time,
}

/// Compressed sparse transfer adjacency by source event. Within one source
/// event the targets are sorted by event id. The flat index of a transfer is
/// its identity for flag storage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferSet {
    offsets: Vec<u32>,
    from: Vec<EventId>,
    to: Vec<EventId>,
    walk_arrival: Vec<Time>,
    same_stop: Vec<bool>,
    pub timetable_hash: u64,
}

impl TransferSet {
    pub fn from_transfers(tt: &Timetable, mut transfers: Vec<Transfer>) -> TransferSet {
        transfers.sort_unstable();
        transfers.dedup();
        let num_events = tt.num_events();
        let mut offsets = vec![0u32; num_events + 1];
        for t in &transfers {
            offsets[t.from.idx() + 1] += 1;
        }
        for i in 0..num_events {
            offsets[i + 1] += offsets[i];
        }
        let same_stop = transfers
            .iter()
            .map(|t| tt.event(t.from).stop == tt.event(t.to).stop)
            .collect();
        TransferSet {
            offsets,
            from: transfers.iter().map(|t| t.from).collect(),
            to: transfers.iter().map(|t| t.to).collect(),
            walk_arrival: transfers.iter().map(|t| t.walk_arrival).collect(),
            same_stop,
            timetable_hash: tt.content_hash(),
        }
    }

    pub fn len(&self) -> usize {
        self.to.len()
    }

    pub fn is_empty(&self) -> bool {
        self.to.is_empty()
    }

    /// Flat indices of the transfers leaving `event`.
    #[inline]
    pub fn range(&self, event: EventId) -> std::ops::Range<usize> {
        self.offsets[event.idx()] as usize..self.offsets[event.idx() + 1] as usize
    }

    #[inline]
    pub fn from_event(&self, idx: usize) -> EventId {
        self.from[idx]
    }

    #[inline]
    pub fn to_event(&self, idx: usize) -> EventId {
        self.to[idx]
    }

    #[inline]
    pub fn walk_arrival(&self, idx: usize) -> Time {
        self.walk_arrival[idx]
    }

    /// Whether the transfer stays at one stop (no footpath involved).
    #[inline]
    pub fn is_same_stop(&self, idx: usize) -> bool {
        self.same_stop[idx]
    }

    pub fn find(&self, from: EventId, to: EventId) -> Option<usize> {
        let range = self.range(from);
        self.to[range.clone()]
            .binary_search(&to)
            .ok()
            .map(|i| range.start + i)
    }

    pub fn iter(&self) -> impl Iterator<Item = Transfer> + '_ {
        (0..self.len()).map(|i| Transfer {
            from: self.from[i],
            to: self.to[i],
            walk_arrival: self.walk_arrival[i],
        })
    }

    pub fn num_same_stop(&self) -> usize {
        self.same_stop.iter().filter(|&&b| b).count()
    }

    pub fn content_hash(&self) -> u64 {
        crate::meta::fnv1a64(&self.to_bytes())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.bytes(MAGIC);
        w.u16(VERSION);
        w.u64(self.timetable_hash);
        w.u64(self.len() as u64);
        for i in 0..self.len() {
            w.u32(self.from[i].0);
            w.u32(self.to[i].0);
            w.u32(self.walk_arrival[i]);
        }
        w.into_bytes()
    }

    pub fn from_bytes(tt: &Timetable, bytes: &[u8]) -> Result<TransferSet> {
        let mut r = Reader::new(bytes);
        r.expect_magic(MAGIC, "transfer set")?;
        let version = r.u16()?;
        if version != VERSION {
            return Err(Error::Format(format!(
                "transfer set version {version}, expected {VERSION}"
            )));
        }
        let tt_hash = r.u64()?;
        if tt_hash != tt.content_hash() {
            return Err(Error::ArtifactMismatch(
                "transfer set was built against a different timetable".into(),
            ));
        }
        let n = r.u64()? as usize;
        let mut transfers = Vec::with_capacity(n);
        for _ in 0..n {
            let from = EventId(r.u32()?);
            let to = EventId(r.u32()?);
            let walk_arrival = r.u32()?;
            if from.idx() >= tt.num_events() || to.idx() >= tt.num_events() {
                return Err(Error::Format("transfer references unknown event".into()));
            }
            transfers.push(Transfer {
                from,
                to,
                walk_arrival,
            });
        }
        r.expect_end("transfer set")?;
        Ok(TransferSet::from_transfers(tt, transfers))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(tt: &Timetable, path: &Path) -> Result<TransferSet> {
        Self::from_bytes(tt, &std::fs::read(path)?)
    }

    /// Checks feasibility and the generation index constraints for every
    /// transfer; used by tests and `verify`.
    pub fn check_invariants(&self, tt: &Timetable) -> Result<()> {
        for t in self.iter() {
            let (from_trip, i) = tt.event_trip(t.from);
            let (to_trip, j) = tt.event_trip(t.to);
            if i == 0 {
                return Err(Error::Validation(format!("transfer leaves a first event: {t:?}")));
            }
            if j + 1 >= tt.trip_len(to_trip) {
                return Err(Error::Validation(format!("transfer enters a last event: {t:?}")));
            }
            let from_ev = tt.event(t.from);
            let to_ev = tt.event(t.to);
            let walk = tt.fp(from_ev.stop, to_ev.stop);
            if time_add(from_ev.arr, walk) != t.walk_arrival || t.walk_arrival > to_ev.dep {
                return Err(Error::Validation(format!("infeasible transfer: {t:?}")));
            }
            let same_line = tt.trip(from_trip).line == tt.trip(to_trip).line;
            if same_line
                && tt.trip(from_trip).index_in_line <= tt.trip(to_trip).index_in_line
                && i <= j
            {
                return Err(Error::Validation(format!(
                    "transfer dominated by staying seated: {t:?}"
                )));
            }
        }
        Ok(())
    }
}

/// The split view (same-stop transfers vs footpath transfers) is realized by
/// the per-entry `is_same_stop` flag; these helpers give the two filtered
/// iterators over one source event.
impl TransferSet {
    pub fn same_stop_from(&self, event: EventId) -> impl Iterator<Item = usize> + '_ {
        self.range(event).filter(move |&i| self.same_stop[i])
    }

    pub fn footpath_from(&self, event: EventId) -> impl Iterator<Item = usize> + '_ {
        self.range(event).filter(move |&i| !self.same_stop[i])
    }
}
