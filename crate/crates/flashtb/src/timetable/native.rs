//! The native binary timetable container (magic `FTTB`): little-endian
//! sectioned arrays with a bit-exact round trip.

use super::{Line, Stop, StopEvent, Timetable, Trip};
use crate::error::{Error, Result};
use crate::io_util::{Reader, Writer};
use crate::types::{LineId, StopId, TripId};
use std::path::Path;

const MAGIC: &[u8; 4] = b"FTTB";
const VERSION: u16 = 1;

pub fn to_bytes(tt: &Timetable) -> Vec<u8> {
    let mut w = Writer::new();
    w.bytes(MAGIC);
    w.u16(VERSION);
    w.u32(tt.stops.len() as u32);
    w.u32(tt.events.len() as u32);
    w.u32(tt.trips.len() as u32);
    w.u32(tt.lines.len() as u32);
    for stop in &tt.stops {
        w.string(&stop.external_id);
    }
    for ev in &tt.events {
        w.u32(ev.stop.0);
        w.u32(ev.arr);
        w.u32(ev.dep);
    }
    for trip in &tt.trips {
        w.u32(trip.first_event);
        w.u32(trip.num_events);
        w.u32(trip.line.0);
        w.u32(trip.index_in_line);
        w.u32(trip.source_rank);
    }
    for line in &tt.lines {
        w.u32(line.stops.len() as u32);
        for s in &line.stops {
            w.u32(s.0);
        }
        w.u32(line.trips.len() as u32);
        for t in &line.trips {
            w.u32(t.0);
        }
    }
    // Footpaths as CSR: per-stop edge counts then (target, duration) pairs.
    for s in 0..tt.stops.len() {
        let edges: Vec<_> = tt.footpaths.from(StopId::from(s)).collect();
        w.u32(edges.len() as u32);
        for (to, dur) in edges {
            w.u32(to.0);
            w.u32(dur);
        }
    }
    w.into_bytes()
}

pub fn from_bytes(bytes: &[u8]) -> Result<Timetable> {
    let mut r = Reader::new(bytes);
    r.expect_magic(MAGIC, "timetable")?;
    let version = r.u16()?;
    if version != VERSION {
        return Err(Error::Format(format!(
            "timetable version {version}, expected {VERSION}"
        )));
    }
    let num_stops = r.u32()? as usize;
    let num_events = r.u32()? as usize;
    let num_trips = r.u32()? as usize;
    let num_lines = r.u32()? as usize;
    let mut stops = Vec::with_capacity(num_stops);
    for _ in 0..num_stops {
        stops.push(Stop {
            external_id: r.string()?,
        });
    }
    let mut events = Vec::with_capacity(num_events);
    for _ in 0..num_events {
        events.push(StopEvent {
            stop: StopId(r.u32()?),
            arr: r.u32()?,
            dep: r.u32()?,
        });
    }
    let mut trips = Vec::with_capacity(num_trips);
    for _ in 0..num_trips {
        trips.push(Trip {
            first_event: r.u32()?,
            num_events: r.u32()?,
            line: LineId(r.u32()?),
            index_in_line: r.u32()?,
            source_rank: r.u32()?,
        });
    }
    let mut lines = Vec::with_capacity(num_lines);
    for _ in 0..num_lines {
        let n = r.u32()? as usize;
        let mut stops_seq = Vec::with_capacity(n);
        for _ in 0..n {
            stops_seq.push(StopId(r.u32()?));
        }
        let m = r.u32()? as usize;
        let mut line_trips = Vec::with_capacity(m);
        for _ in 0..m {
            line_trips.push(TripId(r.u32()?));
        }
        lines.push(Line {
            stops: stops_seq,
            trips: line_trips,
        });
    }
    let mut fp_edges = Vec::new();
    for s in 0..num_stops {
        let n = r.u32()? as usize;
        for _ in 0..n {
            let to = StopId(r.u32()?);
            let dur = r.u32()?;
            fp_edges.push((StopId::from(s), to, dur));
        }
    }
    r.expect_end("timetable")?;

    let footpaths =
        super::footpaths::FootpathSet::from_sorted_edges(num_stops, &fp_edges);
    let mut lines_at_stop = vec![Vec::new(); num_stops];
    for (li, line) in lines.iter().enumerate() {
        for (idx, &stop) in line.stops.iter().enumerate() {
            if stop.idx() >= num_stops {
                return Err(Error::Format("line references unknown stop".into()));
            }
            lines_at_stop[stop.idx()].push((LineId::from(li), idx as u32));
        }
    }
    for l in &mut lines_at_stop {
        l.sort_unstable();
    }
    let tt = Timetable {
        stops,
        events,
        trips,
        lines,
        footpaths,
        lines_at_stop,
    };
    let report = tt.validate();
    if !report.is_ok() {
        return Err(Error::Format(format!(
            "timetable fails validation: {}",
            report.violations[0].message
        )));
    }
    Ok(tt)
}

pub fn save(tt: &Timetable, path: &Path) -> Result<()> {
    std::fs::write(path, to_bytes(tt))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Timetable> {
    from_bytes(&std::fs::read(path)?)
}
