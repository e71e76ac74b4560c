//! CSV field snapshots and the per-run JSON manifest.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::solver::{Frame, Observer, RunConfig, Simulation};

pub const SNAPSHOT_HEADER: &str = "x,y,ux,uy,jx,jy,r";

/// Adding zero folds `-0.0` into `0.0` so that signs never flicker in the
/// text output.
fn clean(v: f64) -> f64 {
    v + 0.0
}

pub fn write_snapshot_to(sim: &Simulation, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{SNAPSHOT_HEADER}")?;
    let grid = sim.grid();
    let r = sim.r();
    for (node, r) in r.iter().enumerate() {
        let x = grid.position(node);
        let u = sim.displacement()[node];
        let j = sim.momentum()[node];
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            clean(x.x),
            clean(x.y),
            clean(u.x),
            clean(u.y),
            clean(j.x),
            clean(j.y),
            clean(*r)
        )?;
    }
    out.flush()
}

pub fn write_snapshot(sim: &Simulation, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_snapshot_to(sim, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub version: &'static str,
    pub config: RunConfig,
    pub dt: f64,
    pub steps: usize,
    pub final_time: f64,
    pub snapshots: Vec<String>,
}

pub fn write_manifest(manifest: &Manifest, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, manifest).map_err(|e| Error::io(path, e.into()))?;
    writeln!(out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

/// Observer writing `snapshot_<step>.csv` files into a directory and a
/// `manifest.json` once the run ends.
pub struct SnapshotWriter {
    dir: PathBuf,
    manifest: Manifest,
}

impl SnapshotWriter {
    pub fn new(dir: impl Into<PathBuf>, config: &RunConfig) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(SnapshotWriter {
            dir,
            manifest: Manifest {
                version: env!("CARGO_PKG_VERSION"),
                config: config.clone(),
                dt: config.dt(),
                steps: 0,
                final_time: 0.0,
                snapshots: Vec::new(),
            },
        })
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }
}

impl Observer for SnapshotWriter {
    fn observe(&mut self, frame: &Frame<'_>) -> Result<()> {
        let name = format!("snapshot_{:06}.csv", frame.step);
        write_snapshot(frame.sim, &self.dir.join(&name))?;
        self.manifest.steps = frame.step;
        self.manifest.final_time = frame.time;
        self.manifest.snapshots.push(name);
        Ok(())
    }

    fn finish(&mut self) -> Result<()> {
        write_manifest(&self.manifest, &self.dir.join("manifest.json"))
    }
}
