//! Python bindings: a `Network` wrapping the timetable and the preprocessing
//! artifacts, with query methods returning plain dicts.

use flashtb::flags::{compute_flags, FlagStore};
use flashtb::partition::{build_layout_graph, partition_stops, Partition};
use flashtb::query::flash::{flash_profile_query, flash_query};
use flashtb::query::{profile_query_tb, tb_query, QueryOptions};
use flashtb::transfers::{tb_transfer_set, trans_ultra, TransferSet};
use flashtb::{Journey, Timetable};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use std::path::Path;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass]
struct Network {
    tt: Timetable,
    transfers: Option<TransferSet>,
    partition: Option<Partition>,
    flags: Option<FlagStore>,
}

impl Network {
    fn transfers_ref(&self) -> PyResult<&TransferSet> {
        self.transfers
            .as_ref()
            .ok_or_else(|| err("no transfer set: call compute_transfers() first"))
    }

    fn opts(max_rounds: usize) -> QueryOptions {
        QueryOptions {
            max_rounds,
            ..QueryOptions::default()
        }
    }

    fn journey_dict<'py>(&self, py: Python<'py>, journey: &Journey) -> PyResult<Bound<'py, PyDict>> {
        let tt = &self.tt;
        let d = PyDict::new(py);
        d.set_item("source", &tt.stop(journey.source).external_id)?;
        d.set_item("target", &tt.stop(journey.target).external_id)?;
        d.set_item("departure", journey.departure(tt))?;
        d.set_item("arrival", journey.arrival(tt))?;
        let segments = PyList::empty(py);
        for seg in &journey.segments {
            let enter = tt.event_at(seg.trip, seg.enter);
            let exit = tt.event_at(seg.trip, seg.exit);
            let s = PyDict::new(py);
            s.set_item("line", tt.trip(seg.trip).line.0)?;
            s.set_item("trip_of_line", tt.trip(seg.trip).index_in_line)?;
            s.set_item("enter_stop", &tt.stop(enter.stop).external_id)?;
            s.set_item("enter_time", enter.dep)?;
            s.set_item("exit_stop", &tt.stop(exit.stop).external_id)?;
            s.set_item("exit_time", exit.arr)?;
            segments.append(s)?;
        }
        d.set_item("segments", segments)?;
        Ok(d)
    }
}

#[pymethods]
impl Network {
    /// Loads a GTFS text subset directory.
    #[staticmethod]
    #[pyo3(signature = (path, fp_limit=2000))]
    fn from_gtfs(path: &str, fp_limit: usize) -> PyResult<Network> {
        let tt = flashtb::timetable::gtfs::load_gtfs_dir(Path::new(path), fp_limit).map_err(err)?;
        Ok(Network {
            tt,
            transfers: None,
            partition: None,
            flags: None,
        })
    }

    /// Loads a native timetable file.
    #[staticmethod]
    fn from_native(path: &str) -> PyResult<Network> {
        let tt = Timetable::load_native(Path::new(path)).map_err(err)?;
        Ok(Network {
            tt,
            transfers: None,
            partition: None,
            flags: None,
        })
    }

    fn save_native(&self, path: &str) -> PyResult<()> {
        self.tt.save_native(Path::new(path)).map_err(err)
    }

    fn stops(&self) -> Vec<String> {
        self.tt
            .stops()
            .map(|s| self.tt.stop(s).external_id.clone())
            .collect()
    }

    fn counts<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        d.set_item("stops", self.tt.num_stops())?;
        d.set_item("events", self.tt.num_events())?;
        d.set_item("trips", self.tt.num_trips())?;
        d.set_item("lines", self.tt.num_lines())?;
        d.set_item("footpaths", self.tt.footpaths().num_edges())?;
        Ok(d)
    }

    /// Precomputes the transfer set; mode "ultra" (default) or "tb".
    #[pyo3(signature = (mode="ultra"))]
    fn compute_transfers(&mut self, mode: &str) -> PyResult<usize> {
        let ts = match mode {
            "ultra" => trans_ultra(&self.tt),
            "tb" => tb_transfer_set(&self.tt),
            other => return Err(err(format!("unknown mode {other:?}"))),
        };
        let n = ts.len();
        self.transfers = Some(ts);
        self.flags = None;
        Ok(n)
    }

    /// Partitions the stops with the internal partitioner.
    #[pyo3(signature = (k, eps=0.05, seed=1))]
    fn partition(&mut self, k: u32, eps: f64, seed: u64) -> PyResult<Vec<u32>> {
        let graph = build_layout_graph(&self.tt);
        let partition = partition_stops(&graph, k, eps, seed).map_err(err)?;
        let cells = partition.cells.clone();
        self.partition = Some(partition);
        self.flags = None;
        Ok(cells)
    }

    /// Computes transfer flags for the current partition; returns the
    /// number of set flags.
    #[pyo3(signature = (max_rounds=15))]
    fn compute_flags(&mut self, max_rounds: usize) -> PyResult<u64> {
        let ts = self
            .transfers
            .as_ref()
            .ok_or_else(|| err("no transfer set: call compute_transfers() first"))?;
        let partition = self
            .partition
            .as_ref()
            .ok_or_else(|| err("no partition: call partition() first"))?;
        let store = compute_flags(&self.tt, ts, partition, Self::opts(max_rounds));
        let bits = store.count_set();
        self.flags = Some(store);
        Ok(bits)
    }

    /// Fixed-departure query. Uses the flagged engine when flags have been
    /// computed, the plain one otherwise. Returns one dict per Pareto
    /// optimum.
    #[pyo3(signature = (source, target, departure, max_rounds=15))]
    fn query<'py>(
        &self,
        py: Python<'py>,
        source: &str,
        target: &str,
        departure: u32,
        max_rounds: usize,
    ) -> PyResult<Bound<'py, PyList>> {
        let ts = self.transfers_ref()?;
        let q = flashtb::Query {
            source: self.tt.resolve_stop(source).map_err(err)?,
            target: self.tt.resolve_stop(target).map_err(err)?,
            departure,
        };
        let result = match (&self.flags, &self.partition) {
            (Some(flags), Some(partition)) => {
                flash_query(&self.tt, ts, flags, partition, &q, Self::opts(max_rounds))
                    .map_err(err)?
            }
            _ => tb_query(&self.tt, ts, &q, Self::opts(max_rounds)).map_err(err)?,
        };
        let list = PyList::empty(py);
        for (cost, journey) in result.front.0.iter().zip(&result.journeys) {
            let d = PyDict::new(py);
            d.set_item("arrival", cost.arrival)?;
            d.set_item("trips", cost.trips)?;
            d.set_item("journey", self.journey_dict(py, journey)?)?;
            list.append(d)?;
        }
        Ok(list)
    }

    /// Profile query over a departure range; returns (departure, arrival,
    /// trips) tuples.
    #[pyo3(signature = (source, target, from_time, to_time, max_rounds=15))]
    fn profile(
        &self,
        source: &str,
        target: &str,
        from_time: u32,
        to_time: u32,
        max_rounds: usize,
    ) -> PyResult<Vec<(u32, u32, u32)>> {
        let ts = self.transfers_ref()?;
        let s = self.tt.resolve_stop(source).map_err(err)?;
        let t = self.tt.resolve_stop(target).map_err(err)?;
        let range = (from_time, to_time);
        let entries = match (&self.flags, &self.partition) {
            (Some(flags), Some(partition)) => flash_profile_query(
                &self.tt,
                ts,
                flags,
                partition,
                s,
                t,
                range,
                Self::opts(max_rounds),
            )
            .map_err(err)?,
            _ => profile_query_tb(&self.tt, ts, s, t, range, Self::opts(max_rounds))
                .map_err(err)?,
        };
        Ok(entries
            .into_iter()
            .map(|e| (e.departure, e.cost.arrival, e.cost.trips))
            .collect())
    }
}

/// A small seeded random network, exposed for experimentation.
#[pyfunction]
fn random_network(seed: u64) -> Network {
    Network {
        tt: flashtb::testgen::random_net(seed),
        transfers: None,
        partition: None,
        flags: None,
    }
}

#[pymodule]
fn flashtb_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Network>()?;
    m.add_function(wrap_pyfunction!(random_network, m)?)?;
    Ok(())
}
