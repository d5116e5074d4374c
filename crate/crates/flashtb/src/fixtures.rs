//! Small hand-built networks used by tests and the `verify` command.

use crate::timetable::{Timetable, TimetableBuilder};
use crate::types::{LineId, StopId, Time, TripId};

/// Six stops a..f. Trip `t_a` rides a->b->c->d (dep 0, arr 10/20/30), trip
/// `t_b` rides e->f (dep 25, arr 35). Footpaths (b,c,5) and (c,e,2); the
/// closure adds (b,e,7). Exiting `t_a` at b and walking to c beats staying
/// seated, which makes the latest-exit reduction clash with local pruning.
pub fn latest_exit_net() -> Timetable {
    TimetableBuilder::new()
        .trip("t_a", &[("a", 0, 0), ("b", 10, 10), ("c", 20, 20), ("d", 30, 30)])
        .trip("t_b", &[("e", 25, 25), ("f", 35, 35)])
        .footpath("b", "c", 5)
        .footpath("c", "e", 2)
        .build()
        .expect("latest-exit fixture is valid")
}

/// Five stops s, m, w, x, t. Trips `t_b` (s->m, dep 0 arr 5) and `t_a`
/// (s->m, dep 5 arr 10) share a line with t_b preceding t_a. From m,
/// footpaths of one minute lead to w and x; `t_d` rides w->t (dep 10 arr 20)
/// and `t_c` rides x->t (dep 15 arr 20). Stop names are chosen so that the
/// line through w sorts before the line through x.
pub fn equal_cost_net() -> Timetable {
    TimetableBuilder::new()
        .trip("t_a", &[("s", 5, 5), ("m", 10, 10)])
        .trip("t_b", &[("s", 0, 0), ("m", 5, 5)])
        .trip("t_c", &[("x", 15, 15), ("t", 20, 20)])
        .trip("t_d", &[("w", 10, 10), ("t", 20, 20)])
        .footpath("m", "w", 1)
        .footpath("m", "x", 1)
        .build()
        .expect("equal-cost fixture is valid")
}

/// Six stops with four trips and a two-way footpath, shaped so the layout
/// graph has two edges of weight 2 and all other weights 1.
pub fn layout_net() -> Timetable {
    let hops = |stops: &[&str], start: Time| -> Vec<(String, Time, Time)> {
        stops
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let t = start + 600 * i as Time;
                (s.to_string(), t, t)
            })
            .collect()
    };
    let mut b = TimetableBuilder::new();
    for (name, stops, start) in [
        ("green", &["v1", "v2", "v3"][..], 0),
        ("blue", &["v7", "v5", "v8"][..], 100),
        ("red", &["v2", "v5"][..], 200),
        ("lilac", &["v2", "v5", "v8", "v3"][..], 300),
    ] {
        let ev = hops(stops, start);
        let ev_ref: Vec<(&str, Time, Time)> =
            ev.iter().map(|(s, a, d)| (s.as_str(), *a, *d)).collect();
        b = b.trip(name, &ev_ref);
    }
    b.footpath("v1", "v7", 60)
        .footpath("v7", "v1", 60)
        .build()
        .expect("layout fixture is valid")
}

pub fn stop(tt: &Timetable, name: &str) -> StopId {
    tt.stop_by_external_id(name).expect("fixture stop exists")
}

/// Trip of a single-trip line identified by its first stop.
fn single_trip_line(tt: &Timetable, first_stop: &str) -> (LineId, TripId) {
    let s = stop(tt, first_stop);
    for li in 0..tt.num_lines() {
        let line = LineId::from(li);
        if tt.line(line).stops[0] == s && tt.line(line).trips.len() == 1 {
            return (line, tt.line(line).trips[0]);
        }
    }
    panic!("no single-trip line starting at {first_stop}");
}

pub fn latest_exit_trip_a(tt: &Timetable) -> TripId {
    single_trip_line(tt, "a").1
}

pub fn latest_exit_trip_b(tt: &Timetable) -> TripId {
    single_trip_line(tt, "e").1
}

/// The equal-cost fixture line riding x->t.
pub fn equal_cost_line_c(tt: &Timetable) -> (LineId, TripId) {
    single_trip_line(tt, "x")
}

/// The equal-cost fixture line riding w->t.
pub fn equal_cost_line_d(tt: &Timetable) -> (LineId, TripId) {
    single_trip_line(tt, "w")
}

/// The equal-cost fixture trips on the shared s->m line, as (t_b, t_a).
pub fn equal_cost_trips_ba(tt: &Timetable) -> (TripId, TripId) {
    let s = stop(tt, "s");
    for li in 0..tt.num_lines() {
        let line = LineId::from(li);
        if tt.line(line).stops[0] == s {
            let trips = &tt.line(line).trips;
            assert_eq!(trips.len(), 2);
            return (trips[0], trips[1]);
        }
    }
    panic!("equal-cost fixture s->m line missing");
}
