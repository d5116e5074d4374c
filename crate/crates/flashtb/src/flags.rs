//! Transfer flags: for every transfer and partition cell, whether the
//! transfer occurs in some canonical journey into that cell. Stored raw in a
//! cell-major bit array or compressed through a frequency-sorted pattern
//! table; both answer the same single-bit probe.

use crate::canonical::CanonicalProfile;
use crate::error::{Error, Result};
use crate::io_util::{Reader, Writer};
use crate::partition::Partition;
use crate::query::QueryOptions;
use crate::timetable::Timetable;
use crate::transfers::{Transfer, TransferSet};
use crate::types::StopId;
use rayon::prelude::*;
use std::path::Path;

const MAGIC: &[u8; 4] = b"FTFL";
const VERSION: u16 = 1;

/// The query-time contract: one boolean probe per transfer and cell.
pub trait FlagLookup {
    fn flagged(&self, transfer: usize, cell: u32) -> bool;
    fn num_cells(&self) -> u32;
}

/// Raw bit array of size `k * |transfers|`. Flags of one cell are stored
/// consecutively: the flag for transfer `t` and cell `i` lives at bit
/// `i * |transfers| + t`, so a query touches one contiguous row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlagStore {
    k: u32,
    num_transfers: usize,
    words: Vec<u64>,
}

impl FlagStore {
    pub fn new(k: u32, num_transfers: usize) -> FlagStore {
        let bits = k as usize * num_transfers;
        FlagStore {
            k,
            num_transfers,
            words: vec![0; bits.div_ceil(64)],
        }
    }

    #[inline]
    fn bit_index(&self, transfer: usize, cell: u32) -> usize {
        debug_assert!(transfer < self.num_transfers && cell < self.k);
        cell as usize * self.num_transfers + transfer
    }

    #[inline]
    pub fn set(&mut self, transfer: usize, cell: u32) {
        let bit = self.bit_index(transfer, cell);
        self.words[bit / 64] |= 1u64 << (bit % 64);
    }

    #[inline]
    pub fn get(&self, transfer: usize, cell: u32) -> bool {
        let bit = self.bit_index(transfer, cell);
        self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn num_transfers(&self) -> usize {
        self.num_transfers
    }

    pub fn count_set(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// OR-merge; both stores must have identical geometry.
    pub fn merge(&mut self, other: &FlagStore) {
        assert_eq!(self.k, other.k);
        assert_eq!(self.num_transfers, other.num_transfers);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn transfer_has_any_flag(&self, transfer: usize) -> bool {
        (0..self.k).any(|c| self.get(transfer, c))
    }

    /// The k-bit flag pattern of one transfer, packed little-endian.
    pub fn pattern_of(&self, transfer: usize) -> Vec<u64> {
        let mut pattern = vec![0u64; (self.k as usize).div_ceil(64)];
        for c in 0..self.k {
            if self.get(transfer, c) {
                pattern[(c / 64) as usize] |= 1u64 << (c % 64);
            }
        }
        pattern
    }
}

impl FlagLookup for FlagStore {
    #[inline]
    fn flagged(&self, transfer: usize, cell: u32) -> bool {
        self.get(transfer, cell)
    }

    fn num_cells(&self) -> u32 {
        self.k
    }
}

/// Pattern-compressed store: the distinct flag patterns, sorted by
/// decreasing occurrence count, and a per-transfer pattern index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedFlagStore {
    k: u32,
    num_transfers: usize,
    pattern_words: usize,
    patterns: Vec<u64>,
    index: Vec<u32>,
}

impl CompressedFlagStore {
    pub fn num_patterns(&self) -> usize {
        self.patterns
            .len()
            .checked_div(self.pattern_words)
            .unwrap_or(0)
    }

    pub fn num_transfers(&self) -> usize {
        self.num_transfers
    }

    /// Smallest of 8/16/32 bits that can hold every pattern index.
    pub fn index_width(&self) -> u8 {
        let n = self.num_patterns() as u64;
        if n <= u8::MAX as u64 + 1 {
            1
        } else if n <= u16::MAX as u64 + 1 {
            2
        } else {
            4
        }
    }
}

impl FlagLookup for CompressedFlagStore {
    #[inline]
    fn flagged(&self, transfer: usize, cell: u32) -> bool {
        let base = self.index[transfer] as usize * self.pattern_words;
        self.patterns[base + (cell / 64) as usize] >> (cell % 64) & 1 == 1
    }

    fn num_cells(&self) -> u32 {
        self.k
    }
}

pub fn compress_flags(store: &FlagStore) -> CompressedFlagStore {
    let pattern_words = (store.k as usize).div_ceil(64);
    let mut occurrences: std::collections::HashMap<Vec<u64>, u32> =
        std::collections::HashMap::new();
    let per_transfer: Vec<Vec<u64>> = (0..store.num_transfers)
        .map(|t| {
            let p = store.pattern_of(t);
            *occurrences.entry(p.clone()).or_insert(0) += 1;
            p
        })
        .collect();
    let mut table: Vec<(Vec<u64>, u32)> = occurrences.into_iter().collect();
    // Most frequent first; ties broken by pattern bits for determinism.
    table.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let position: std::collections::HashMap<&Vec<u64>, u32> = table
        .iter()
        .enumerate()
        .map(|(i, (p, _))| (p, i as u32))
        .collect();
    let index = per_transfer.iter().map(|p| position[p]).collect();
    let patterns = table.iter().flat_map(|(p, _)| p.iter().copied()).collect();
    CompressedFlagStore {
        k: store.k,
        num_transfers: store.num_transfers,
        pattern_words,
        patterns,
        index,
    }
}

pub fn decompress_flags(cstore: &CompressedFlagStore) -> FlagStore {
    let mut store = FlagStore::new(cstore.k, cstore.num_transfers);
    for t in 0..cstore.num_transfers {
        for c in 0..cstore.k {
            if cstore.flagged(t, c) {
                store.set(t, c);
            }
        }
    }
    store
}

/// Computes the flags by solving the all-to-all full-range profile problem
/// with the canonical profile search from every stop, in parallel, and
/// flagging every transfer of every unpacked journey for the target's cell.
pub fn compute_flags(
    tt: &Timetable,
    ts: &TransferSet,
    partition: &Partition,
    opts: QueryOptions,
) -> FlagStore {
    compute_flags_multi(tt, ts, &[partition], opts).pop().unwrap()
}

/// Same canonical profile pass, flagged into one store per partition.
pub fn compute_flags_multi(
    tt: &Timetable,
    ts: &TransferSet,
    partitions: &[&Partition],
    opts: QueryOptions,
) -> Vec<FlagStore> {
    let stops: Vec<StopId> = tt.stops().collect();
    stops
        .par_iter()
        .fold(
            || {
                partitions
                    .iter()
                    .map(|p| FlagStore::new(p.k, ts.len()))
                    .collect::<Vec<_>>()
            },
            |mut stores, &source| {
                let mut engine = CanonicalProfile::new(tt, ts, opts);
                engine.run_from(source, |target, _round, journey| {
                    for pair in journey.segments.windows(2) {
                        let from = tt.event_id(pair[0].trip, pair[0].exit);
                        let to = tt.event_id(pair[1].trip, pair[1].enter);
                        let idx = ts
                            .find(from, to)
                            .expect("unpacked journey uses a transfer outside the set");
                        for (p, store) in partitions.iter().zip(stores.iter_mut()) {
                            store.set(idx, p.cell(target));
                        }
                    }
                });
                stores
            },
        )
        .reduce(
            || {
                partitions
                    .iter()
                    .map(|p| FlagStore::new(p.k, ts.len()))
                    .collect::<Vec<_>>()
            },
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    x.merge(y);
                }
                a
            },
        )
}

/// Drops transfers with an all-zero flag pattern, remapping indices.
pub fn prune_unflagged(
    tt: &Timetable,
    ts: &TransferSet,
    store: &FlagStore,
) -> (TransferSet, FlagStore) {
    assert_eq!(ts.len(), store.num_transfers);
    let kept: Vec<usize> = (0..ts.len())
        .filter(|&t| store.transfer_has_any_flag(t))
        .collect();
    let transfers: Vec<Transfer> = kept
        .iter()
        .map(|&i| Transfer {
            from: ts.from_event(i),
            to: ts.to_event(i),
            walk_arrival: ts.walk_arrival(i),
        })
        .collect();
    let pruned_ts = TransferSet::from_transfers(tt, transfers);
    let mut pruned_store = FlagStore::new(store.k, pruned_ts.len());
    for (new_idx, &old_idx) in kept.iter().enumerate() {
        // from_transfers sorts the same way the kept list is ordered.
        debug_assert_eq!(pruned_ts.from_event(new_idx), ts.from_event(old_idx));
        for c in 0..store.k {
            if store.get(old_idx, c) {
                pruned_store.set(new_idx, c);
            }
        }
    }
    (pruned_ts, pruned_store)
}

/// A flags artifact: the store plus the upstream hashes it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct FlagsFile {
    pub data: FlagData,
    pub timetable_hash: u64,
    pub transfers_hash: u64,
    pub partition_hash: u64,
    pub max_rounds: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlagData {
    Raw(FlagStore),
    Compressed(CompressedFlagStore),
}

impl FlagData {
    pub fn lookup(&self) -> &dyn FlagLookup {
        match self {
            FlagData::Raw(s) => s,
            FlagData::Compressed(c) => c,
        }
    }
}

impl FlagsFile {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.bytes(MAGIC);
        w.u16(VERSION);
        w.u64(self.timetable_hash);
        w.u64(self.transfers_hash);
        w.u64(self.partition_hash);
        w.u32(self.max_rounds);
        match &self.data {
            FlagData::Raw(store) => {
                w.u8(0);
                w.u32(store.k);
                w.u64(store.num_transfers as u64);
                for word in &store.words {
                    w.u64(*word);
                }
            }
            FlagData::Compressed(c) => {
                w.u8(1);
                w.u32(c.k);
                w.u64(c.num_transfers as u64);
                w.u32(c.num_patterns() as u32);
                let width = c.index_width();
                w.u8(width);
                for word in &c.patterns {
                    w.u64(*word);
                }
                for &i in &c.index {
                    match width {
                        1 => w.u8(i as u8),
                        2 => w.u16(i as u16),
                        _ => w.u32(i),
                    }
                }
            }
        }
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<FlagsFile> {
        let mut r = Reader::new(bytes);
        r.expect_magic(MAGIC, "flags")?;
        let version = r.u16()?;
        if version != VERSION {
            return Err(Error::Format(format!(
                "flags version {version}, expected {VERSION}"
            )));
        }
        let timetable_hash = r.u64()?;
        let transfers_hash = r.u64()?;
        let partition_hash = r.u64()?;
        let max_rounds = r.u32()?;
        let mode = r.u8()?;
        let k = r.u32()?;
        let num_transfers = r.u64()? as usize;
        let data = match mode {
            0 => {
                let bits = k as usize * num_transfers;
                let mut words = Vec::with_capacity(bits.div_ceil(64));
                for _ in 0..bits.div_ceil(64) {
                    words.push(r.u64()?);
                }
                FlagData::Raw(FlagStore {
                    k,
                    num_transfers,
                    words,
                })
            }
            1 => {
                let num_patterns = r.u32()? as usize;
                let width = r.u8()?;
                let pattern_words = (k as usize).div_ceil(64);
                let mut patterns = Vec::with_capacity(num_patterns * pattern_words);
                for _ in 0..num_patterns * pattern_words {
                    patterns.push(r.u64()?);
                }
                let mut index = Vec::with_capacity(num_transfers);
                for _ in 0..num_transfers {
                    let i = match width {
                        1 => r.u8()? as u32,
                        2 => r.u16()? as u32,
                        4 => r.u32()?,
                        _ => return Err(Error::Format("bad index width".into())),
                    };
                    if i as usize >= num_patterns {
                        return Err(Error::Format("pattern index out of range".into()));
                    }
                    index.push(i);
                }
                FlagData::Compressed(CompressedFlagStore {
                    k,
                    num_transfers,
                    pattern_words,
                    patterns,
                    index,
                })
            }
            _ => return Err(Error::Format("bad flags mode".into())),
        };
        r.expect_end("flags")?;
        Ok(FlagsFile {
            data,
            timetable_hash,
            transfers_hash,
            partition_hash,
            max_rounds,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<FlagsFile> {
        Self::from_bytes(&std::fs::read(path)?)
    }

    /// Validates the artifact chain: the flags must have been computed from
    /// exactly these inputs.
    pub fn check_against(
        &self,
        tt: &Timetable,
        ts: &TransferSet,
        partition: &Partition,
    ) -> Result<()> {
        if self.timetable_hash != tt.content_hash() {
            return Err(Error::ArtifactMismatch("flags: timetable hash differs".into()));
        }
        if self.transfers_hash != ts.content_hash() {
            return Err(Error::ArtifactMismatch("flags: transfer set hash differs".into()));
        }
        if self.partition_hash != partition.content_hash(tt) {
            return Err(Error::ArtifactMismatch("flags: partition hash differs".into()));
        }
        let n = match &self.data {
            FlagData::Raw(s) => s.num_transfers,
            FlagData::Compressed(c) => c.num_transfers,
        };
        if n != ts.len() || self.data.lookup().num_cells() != partition.k {
            return Err(Error::ArtifactMismatch("flags: geometry differs".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_store(seed: u64, k: u32, n: usize) -> FlagStore {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut store = FlagStore::new(k, n);
        for t in 0..n {
            for c in 0..k {
                if rng.random_bool(0.25) {
                    store.set(t, c);
                }
            }
        }
        store
    }

    #[test]
    fn compression_round_trip_bit_exact() {
        for seed in 0..5 {
            let store = random_store(seed, 67, 40);
            let c = compress_flags(&store);
            assert_eq!(decompress_flags(&c), store);
        }
    }

    #[test]
    fn uniform_store_compresses_to_one_pattern() {
        let mut store = FlagStore::new(8, 10);
        for t in 0..10 {
            store.set(t, 3);
        }
        let c = compress_flags(&store);
        assert_eq!(c.num_patterns(), 1);
        assert_eq!(c.index_width(), 1);
    }

    #[test]
    fn prune_drops_exactly_the_zero_rows_and_preserves_queries() {
        use crate::query::flash::flash_query;
        use crate::query::QueryOptions;
        use crate::transfers::generate_transfers;
        for seed in [2u64, 5, 9] {
            let tt = crate::testgen::random_net(seed);
            // The generated set is larger than what canonical journeys use,
            // so pruning has something to remove.
            let ts = generate_transfers(&tt);
            let k = 8.min(tt.num_stops() as u32);
            let partition = crate::partition::random_partition(tt.num_stops(), k, seed);
            let store = compute_flags(&tt, &ts, &partition, QueryOptions::default());
            let zero_rows = (0..ts.len())
                .filter(|&t| !store.transfer_has_any_flag(t))
                .count();
            let (pruned_ts, pruned_store) = prune_unflagged(&tt, &ts, &store);
            assert_eq!(ts.len() - pruned_ts.len(), zero_rows, "seed {seed}");
            assert!(zero_rows > 0, "seed {seed}: want a non-trivial prune");
            pruned_ts.check_invariants(&tt).unwrap();
            // Queries are unchanged through the pruned artifacts.
            for q in crate::testgen::random_queries(&tt, 60, seed) {
                let q = crate::Query {
                    departure: q.departure % (4 * 3600),
                    ..q
                };
                let before =
                    flash_query(&tt, &ts, &store, &partition, &q, QueryOptions::default())
                        .unwrap();
                let after = flash_query(
                    &tt,
                    &pruned_ts,
                    &pruned_store,
                    &partition,
                    &q,
                    QueryOptions::default(),
                )
                .unwrap();
                assert_eq!(before.front, after.front, "seed {seed}");
            }
            // A store with no zero rows prunes to identity.
            let (again_ts, again_store) = prune_unflagged(&tt, &pruned_ts, &pruned_store);
            assert_eq!(again_ts, pruned_ts);
            assert_eq!(again_store, pruned_store);
        }
    }

    #[test]
    fn flags_file_round_trip_both_modes() {
        let store = random_store(3, 9, 17);
        for data in [
            FlagData::Raw(store.clone()),
            FlagData::Compressed(compress_flags(&store)),
        ] {
            let file = FlagsFile {
                data,
                timetable_hash: 1,
                transfers_hash: 2,
                partition_hash: 3,
                max_rounds: 15,
            };
            let bytes = file.to_bytes();
            let back = FlagsFile::from_bytes(&bytes).unwrap();
            assert_eq!(back, file);
            assert_eq!(back.to_bytes(), bytes);
            // Lookups agree across modes.
            for t in 0..17 {
                for c in 0..9 {
                    assert_eq!(back.data.lookup().flagged(t, c), store.get(t, c));
                }
            }
        }
        // Truncation is an error.
        let bytes = FlagsFile {
            data: FlagData::Raw(store),
            timetable_hash: 0,
            transfers_hash: 0,
            partition_hash: 0,
            max_rounds: 15,
        }
        .to_bytes();
        assert!(FlagsFile::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }
}
