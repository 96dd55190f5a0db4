//! CSV files with JSON sidecars for observations, tensors and BSBM graphs.
//!
//! `data.csv` is paired with `data.json`. Indices are 0-based.
//!
//! | data         | CSV columns        | sidecar                  |
//! |--------------|--------------------|--------------------------|
//! | observations | `i,j,value`        | `{d1, d2, p}`            |
//! | tensor       | `i,j,k,value`      | `{d, p}`                 |
//! | BSBM graph   | `i,j` (edges)      | `{nu, nv, qin, qout}`    |
//!
//! A missing `p` in the observation sidecar is replaced by the observed
//! fraction.

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::apps::{BsbmInstance, TensorEntry, TensorObservations};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::model::{check_probability, Entry, ObservationSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservationMeta {
    pub d1: usize,
    pub d2: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TensorMeta {
    pub d: usize,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BsbmMeta {
    pub nu: usize,
    pub nv: usize,
    pub qin: f64,
    pub qout: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct Edge {
    i: usize,
    j: usize,
}

/// `data.csv` → `data.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(File::open(path)?)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_observations(csv_path: &Path, meta_path: Option<&Path>) -> Result<ObservationSet> {
    let meta: ObservationMeta = read_json(&meta_path.map_or_else(|| sidecar_path(csv_path), Path::to_path_buf))?;
    let entries: Vec<Entry> = read_rows(csv_path)?;
    match meta.p {
        Some(p) => ObservationSet::new(meta.d1, meta.d2, p, entries),
        None => ObservationSet::with_estimated_p(meta.d1, meta.d2, entries),
    }
}

/// Writes the entries and, next to them, the sidecar.
pub fn write_observations(csv_path: &Path, obs: &ObservationSet) -> Result<()> {
    write_rows(csv_path, obs.entries())?;
    let meta = ObservationMeta {
        d1: obs.d1,
        d2: obs.d2,
        p: Some(obs.p),
    };
    write_json(&sidecar_path(csv_path), &meta)
}

pub fn read_tensor(csv_path: &Path, meta_path: Option<&Path>) -> Result<TensorObservations> {
    let meta: TensorMeta = read_json(&meta_path.map_or_else(|| sidecar_path(csv_path), Path::to_path_buf))?;
    check_probability(meta.p)?;
    let mut entries: Vec<TensorEntry> = read_rows(csv_path)?;
    for e in &entries {
        for idx in [e.i, e.j, e.k] {
            if idx >= meta.d {
                return Err(Error::IndexOutOfRange { index: idx, dim: meta.d });
            }
        }
        if !e.value.is_finite() {
            return Err(Error::NonFinite(format!("tensor entry ({}, {}, {})", e.i, e.j, e.k)));
        }
    }
    entries.sort_by_key(|e| (e.i, e.j, e.k));
    Ok(TensorObservations {
        d: meta.d,
        p: meta.p,
        entries,
    })
}

pub fn write_tensor(csv_path: &Path, obs: &TensorObservations) -> Result<()> {
    write_rows(csv_path, &obs.entries)?;
    write_json(&sidecar_path(csv_path), &TensorMeta { d: obs.d, p: obs.p })
}

pub fn read_bsbm(csv_path: &Path, meta_path: Option<&Path>) -> Result<BsbmInstance> {
    let meta: BsbmMeta = read_json(&meta_path.map_or_else(|| sidecar_path(csv_path), Path::to_path_buf))?;
    let edges: Vec<Edge> = read_rows(csv_path)?;
    let mut c = DenseMatrix::zeros(meta.nu, meta.nv);
    for e in edges {
        if e.i >= meta.nu {
            return Err(Error::IndexOutOfRange { index: e.i, dim: meta.nu });
        }
        if e.j >= meta.nv {
            return Err(Error::IndexOutOfRange { index: e.j, dim: meta.nv });
        }
        if c[(e.i, e.j)] != 0.0 {
            return Err(Error::DuplicateEntry(e.i, e.j));
        }
        c[(e.i, e.j)] = 1.0;
    }
    BsbmInstance::from_adjacency(c, meta.qin, meta.qout)
}

pub fn write_bsbm(csv_path: &Path, inst: &BsbmInstance) -> Result<()> {
    write_rows(csv_path, inst.edges().into_iter().map(|(i, j)| Edge { i, j }))?;
    let meta = BsbmMeta {
        nu: inst.nu,
        nv: inst.nv,
        qin: inst.qin,
        qout: inst.qout,
    };
    write_json(&sidecar_path(csv_path), &meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apps::{gen_bsbm, gen_tensor_truth, sample_tensor};
    use crate::model::{gen_lowrank_gaussian, sample_observations, NoiseSpec};

    #[test]
    fn observation_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("obs.csv");
        let t = gen_lowrank_gaussian(6, 9, 2, 1).unwrap();
        let obs = sample_observations(&t, 0.4, NoiseSpec::gaussian(0.3), 2).unwrap();
        write_observations(&path, &obs).unwrap();
        assert_eq!(read_observations(&path, None).unwrap(), obs);
    }

    #[test]
    fn missing_rate_is_estimated() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("o.csv");
        std::fs::write(&path, "i,j,value\n0,0,1.5\n1,1,-2\n").unwrap();
        std::fs::write(dir.path().join("o.json"), r#"{"d1": 2, "d2": 4}"#).unwrap();
        let obs = read_observations(&path, None).unwrap();
        assert_eq!(obs.p, 0.25);
        assert!(obs.p_is_estimated);
    }

    #[test]
    fn tensor_and_graph_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let tp = dir.path().join("t.csv");
        let truth = gen_tensor_truth(4, 2, 3).unwrap();
        let obs = sample_tensor(&truth, 0.5, NoiseSpec::None, 4).unwrap();
        write_tensor(&tp, &obs).unwrap();
        assert_eq!(read_tensor(&tp, None).unwrap(), obs);

        let gp = dir.path().join("g.csv");
        let inst = gen_bsbm(4, 6, 0.8, 0.2, 5).unwrap();
        write_bsbm(&gp, &inst).unwrap();
        let back = read_bsbm(&gp, None).unwrap();
        assert_eq!(back.c, inst.c);
        assert_eq!((back.qin, back.qout), (0.8, 0.2));
    }

    #[test]
    fn rejects_out_of_range_edges() {
        let dir = tempfile::tempdir().unwrap();
        let gp = dir.path().join("g.csv");
        std::fs::write(&gp, "i,j\n0,7\n").unwrap();
        std::fs::write(dir.path().join("g.json"), r#"{"nu": 2, "nv": 2, "qin": 0.5, "qout": 0.1}"#).unwrap();
        assert!(matches!(read_bsbm(&gp, None), Err(Error::IndexOutOfRange { index: 7, dim: 2 })));
    }
}
