//! Import of a GTFS text subset: stops.txt, trips.txt, stop_times.txt and
//! transfers.txt. Unknown columns are ignored; transfers must be of type 2
//! (minimum transfer time). Calendars and frequencies are out of scope.

use super::builder::{RawTrip, TimetableBuilder};
use super::Timetable;
use crate::error::{Error, Result};
use crate::types::Time;
use std::collections::HashMap;
use std::path::Path;

/// Splits one CSV line. Handles quoted fields with embedded commas, which is
/// all real-world GTFS needs.
fn split_csv(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut field = String::new();
    let mut in_quotes = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if in_quotes && chars.peek() == Some(&'"') => {
                field.push('"');
                chars.next();
            }
            '"' => in_quotes = !in_quotes,
            ',' if !in_quotes => {
                out.push(std::mem::take(&mut field));
            }
            _ => field.push(c),
        }
    }
    out.push(field);
    out
}

struct Table {
    headers: HashMap<String, usize>,
    rows: Vec<(usize, Vec<String>)>,
    file: String,
}

impl Table {
    fn read(dir: &Path, name: &str) -> Result<Table> {
        let path = dir.join(name);
        let content = std::fs::read_to_string(&path).map_err(|e| Error::Parse {
            file: name.to_string(),
            line: 0,
            message: e.to_string(),
        })?;
        let content = content.strip_prefix('\u{feff}').unwrap_or(&content);
        let mut lines = content.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::Parse {
            file: name.to_string(),
            line: 0,
            message: "empty file".into(),
        })?;
        let headers: HashMap<String, usize> = split_csv(header)
            .into_iter()
            .enumerate()
            .map(|(i, h)| (h.trim().to_string(), i))
            .collect();
        let mut rows = Vec::new();
        for (lineno, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            rows.push((lineno + 1, split_csv(line)));
        }
        Ok(Table {
            headers,
            rows,
            file: name.to_string(),
        })
    }

    fn col(&self, name: &str) -> Result<usize> {
        self.headers.get(name).copied().ok_or_else(|| Error::Parse {
            file: self.file.clone(),
            line: 1,
            message: format!("missing column {name}"),
        })
    }

    fn get<'a>(&self, row: &'a (usize, Vec<String>), col: usize) -> Result<&'a str> {
        row.1.get(col).map(|s| s.trim()).ok_or_else(|| Error::Parse {
            file: self.file.clone(),
            line: row.0,
            message: "short row".into(),
        })
    }
}

/// Parses `HH:MM:SS`; hours may exceed 24 for overnight trips.
fn parse_time(s: &str, file: &str, line: usize) -> Result<Time> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::Parse {
        file: file.to_string(),
        line,
        message: format!("bad time {s:?}"),
    };
    if parts.len() != 3 {
        return Err(bad());
    }
    let h: Time = parts[0].parse().map_err(|_| bad())?;
    let m: Time = parts[1].parse().map_err(|_| bad())?;
    let sec: Time = parts[2].parse().map_err(|_| bad())?;
    // Hours may exceed 24 for overnight trips, but anything that cannot fit
    // the service horizon is malformed.
    if h > 1_000 || m >= 60 || sec >= 60 {
        return Err(bad());
    }
    Ok(h * 3600 + m * 60 + sec)
}

/// Reads the GTFS subset in `dir` and builds a normalized timetable.
pub fn load_gtfs_dir(dir: &Path, component_limit: usize) -> Result<Timetable> {
    let stops = Table::read(dir, "stops.txt")?;
    let trips = Table::read(dir, "trips.txt")?;
    let stop_times = Table::read(dir, "stop_times.txt")?;

    let mut builder = TimetableBuilder::new().component_limit(component_limit);

    let stop_id_col = stops.col("stop_id")?;
    let mut known_stops = std::collections::HashSet::new();
    for row in &stops.rows {
        let id = stops.get(row, stop_id_col)?;
        if !known_stops.insert(id.to_string()) {
            return Err(Error::Parse {
                file: stops.file.clone(),
                line: row.0,
                message: format!("duplicate stop_id {id}"),
            });
        }
        builder.add_stop(id);
    }

    let trip_id_col = trips.col("trip_id")?;
    let mut known_trips = std::collections::HashSet::new();
    for row in &trips.rows {
        known_trips.insert(trips.get(row, trip_id_col)?.to_string());
    }

    let st_trip = stop_times.col("trip_id")?;
    let st_arr = stop_times.col("arrival_time")?;
    let st_dep = stop_times.col("departure_time")?;
    let st_stop = stop_times.col("stop_id")?;
    let st_seq = stop_times.col("stop_sequence")?;
    let mut per_trip: HashMap<String, Vec<(u32, String, Time, Time)>> = HashMap::new();
    for row in &stop_times.rows {
        let trip_id = stop_times.get(row, st_trip)?;
        if !known_trips.contains(trip_id) {
            return Err(Error::Validation(format!(
                "stop_times references unknown trip {trip_id}"
            )));
        }
        let stop_id = stop_times.get(row, st_stop)?;
        if !known_stops.contains(stop_id) {
            return Err(Error::Validation(format!(
                "stop_times references unknown stop {stop_id}"
            )));
        }
        let seq: u32 = stop_times.get(row, st_seq)?.parse().map_err(|_| Error::Parse {
            file: stop_times.file.clone(),
            line: row.0,
            message: "bad stop_sequence".into(),
        })?;
        let arr = parse_time(stop_times.get(row, st_arr)?, &stop_times.file, row.0)?;
        let dep = parse_time(stop_times.get(row, st_dep)?, &stop_times.file, row.0)?;
        per_trip
            .entry(trip_id.to_string())
            .or_default()
            .push((seq, stop_id.to_string(), arr, dep));
    }

    let mut trip_ids: Vec<&String> = known_trips.iter().collect();
    trip_ids.sort();
    for trip_id in trip_ids {
        let mut events = per_trip.remove(trip_id.as_str()).unwrap_or_default();
        if events.len() < 2 {
            return Err(Error::Validation(format!("trip {trip_id} with <2 events")));
        }
        events.sort_by_key(|e| e.0);
        builder.add_raw_trip(RawTrip {
            external_id: trip_id.clone(),
            stops: events.iter().map(|e| e.1.clone()).collect(),
            times: events.iter().map(|e| (e.2, e.3)).collect(),
        });
    }

    // transfers.txt is optional in the subset.
    if dir.join("transfers.txt").exists() {
        let transfers = Table::read(dir, "transfers.txt")?;
        let tr_from = transfers.col("from_stop_id")?;
        let tr_to = transfers.col("to_stop_id")?;
        let tr_type = transfers.col("transfer_type")?;
        let tr_time = transfers.headers.get("min_transfer_time").copied();
        for row in &transfers.rows {
            let ttype = transfers.get(row, tr_type)?;
            if ttype != "2" {
                continue;
            }
            let from = transfers.get(row, tr_from)?;
            let to = transfers.get(row, tr_to)?;
            if !known_stops.contains(from) || !known_stops.contains(to) {
                return Err(Error::Validation(format!(
                    "transfers references unknown stop in row {}",
                    row.0
                )));
            }
            let time: Time = match tr_time {
                Some(col) => transfers.get(row, col)?.parse().map_err(|_| Error::Parse {
                    file: transfers.file.clone(),
                    line: row.0,
                    message: "bad min_transfer_time".into(),
                })?,
                None => 0,
            };
            if from != to {
                builder.add_footpath(from, to, time);
                builder.add_footpath(to, from, time);
            }
        }
    }

    builder.build()
}
