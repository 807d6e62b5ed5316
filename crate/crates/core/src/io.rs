//! Delimited text tables: `#`-prefixed `key=value` metadata lines, one
//! tab-separated header line, then tab-separated rows. Floats are written
//! in shortest round-trip form, so reading a table back is exact.

use std::fmt::Display;
use std::fs;
use std::path::Path;

use crate::analysis::Ensemble;
use crate::error::{Error, Result};
use crate::model::StateVec;
use crate::noise::{JumpEvent, SeedSpec};
use crate::scheme::{GridSpec, PathRecord, SchemeTag};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn with_path(e: std::io::Error, path: &Path) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Self {
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get_meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Metadata value parsed as `T`.
    pub fn meta_as<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let v = self.get_meta(key).ok_or_else(|| parse_err(0, format!("missing metadata `{key}`")))?;
        v.parse().map_err(|_| parse_err(0, format!("bad value `{v}` for metadata `{key}`")))
    }

    pub fn push<D: Display>(&mut self, row: &[D]) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row.iter().map(|v| v.to_string()).collect());
    }

    pub fn push_raw(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| parse_err(0, format!("missing column `{name}`")))
    }

    /// A whole column parsed as floats.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self.column_index(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                row[i]
                    .parse()
                    .map_err(|_| parse_err(r + 1, format!("bad number `{}` in column `{name}`", row[i])))
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            s.push_str(&format!("# {k}={v}\n"));
        }
        s.push_str(&self.columns.join("\t"));
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.join("\t"));
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut t = Table::default();
        let mut header = false;
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            if let Some(m) = line.strip_prefix('#') {
                if header {
                    return Err(parse_err(n, "metadata after the header"));
                }
                let (k, v) = m
                    .trim()
                    .split_once('=')
                    .ok_or_else(|| parse_err(n, format!("metadata line `{line}` is not key=value")))?;
                t.meta.push((k.trim().to_string(), v.trim().to_string()));
            } else if !header {
                t.columns = line.split('\t').map(str::to_string).collect();
                header = true;
            } else if !line.is_empty() {
                let row: Vec<String> = line.split('\t').map(str::to_string).collect();
                if row.len() != t.columns.len() {
                    return Err(parse_err(n, format!("expected {} fields, found {}", t.columns.len(), row.len())));
                }
                t.rows.push(row);
            }
        }
        if !header {
            return Err(parse_err(0, "table has no header line"));
        }
        Ok(t)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| with_path(e, path))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| with_path(e, path))?;
        Self::parse(&text)
    }
}

fn path_meta(t: &mut Table, grid: GridSpec, stride: usize, scheme: SchemeTag) {
    t.meta("T", grid.t_end)
        .meta("N", grid.n_steps)
        .meta("record_stride", stride)
        .meta("scheme", scheme);
}

/// One path as `t J A E P` rows with its jumps as metadata.
pub fn path_table(path: &PathRecord) -> Table {
    let mut t = Table::new(&["t", "J", "A", "E", "P"]);
    path_meta(&mut t, path.grid, path.record_stride, path.scheme);
    t.meta("master_seed", path.seed.master_seed)
        .meta("trajectory", path.seed.trajectory_index)
        .meta("jumps", path.jumps.len());
    for j in &path.jumps {
        t.meta("jump", format!("{},{}", j.time, j.mark));
    }
    for (time, s) in path.times().zip(&path.states) {
        t.push(&[time, s.j, s.a, s.e, s.p]);
    }
    t
}

/// Every state of every path as `path t J A E P` rows.
pub fn ensemble_table(ens: &Ensemble) -> Table {
    let first = &ens.paths[0];
    let mut t = Table::new(&["path", "t", "J", "A", "E", "P"]);
    path_meta(&mut t, first.grid, first.record_stride, first.scheme);
    t.meta("master_seed", ens.master_seed)
        .meta("params_hash", &ens.params_hash)
        .meta("threshold", ens.threshold)
        .meta("paths", ens.len());
    for (i, p) in ens.paths.iter().enumerate() {
        for (time, s) in p.times().zip(&p.states) {
            t.push_raw(vec![
                i.to_string(),
                time.to_string(),
                s.j.to_string(),
                s.a.to_string(),
                s.e.to_string(),
                s.p.to_string(),
            ]);
        }
    }
    t
}

/// Jump events of every path as `path time mark` rows.
pub fn ensemble_jumps_table(ens: &Ensemble) -> Table {
    let mut t = Table::new(&["path", "time", "mark"]);
    t.meta("paths", ens.len());
    for (i, p) in ens.paths.iter().enumerate() {
        for j in &p.jumps {
            t.push_raw(vec![i.to_string(), j.time.to_string(), j.mark.to_string()]);
        }
    }
    t
}

/// Rebuild an ensemble from [`ensemble_table`] and, optionally,
/// [`ensemble_jumps_table`] output.
pub fn read_ensemble(states: &Table, jumps: Option<&Table>) -> Result<Ensemble> {
    let grid = GridSpec::new(states.meta_as("T")?, states.meta_as("N")?)?;
    let stride: usize = states.meta_as("record_stride")?;
    let scheme_name: String = states.meta_as("scheme")?;
    let scheme = SchemeTag::parse(&scheme_name).ok_or_else(|| parse_err(0, format!("unknown scheme `{scheme_name}`")))?;
    let master_seed: u64 = states.meta_as("master_seed")?;
    let m: usize = states.meta_as("paths")?;
    let hash: String = states.meta_as("params_hash")?;
    let threshold: f64 = states.meta_as("threshold")?;

    let idx = states.column("path")?;
    let cols = ["J", "A", "E", "P"].map(|c| states.column(c));
    let [j, a, e, p] = cols;
    let (j, a, e, p) = (j?, a?, e?, p?);
    let mut paths: Vec<PathRecord> = (0..m)
        .map(|i| PathRecord {
            grid,
            record_stride: stride,
            states: Vec::new(),
            jumps: Vec::new(),
            seed: SeedSpec::new(master_seed, i as u64),
            scheme,
        })
        .collect();
    for r in 0..idx.len() {
        let i = idx[r] as usize;
        let path = paths.get_mut(i).ok_or_else(|| parse_err(r + 1, format!("path index {i} out of range")))?;
        path.states.push(StateVec { j: j[r], a: a[r], e: e[r], p: p[r] });
    }
    if let Some(jt) = jumps {
        let idx = jt.column("path")?;
        let time = jt.column("time")?;
        let mark = jt.column("mark")?;
        for r in 0..idx.len() {
            let i = idx[r] as usize;
            let path = paths.get_mut(i).ok_or_else(|| parse_err(r + 1, format!("path index {i} out of range")))?;
            path.jumps.push(JumpEvent { time: time[r], mark: mark[r] });
        }
    }
    Ensemble::from_paths(paths, master_seed, hash, threshold)
}
