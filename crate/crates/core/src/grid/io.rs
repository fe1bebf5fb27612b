//! Trajectories on disk: a flat little-endian `f64` array plus a JSON sidecar.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::mesh::{ScalarField, SpaceTimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::maps::DegenParams;

/// Layout tag stored in every sidecar.
pub const LAYOUT: &str = "f64-le, level-major, nodes row-major with y outer";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub layout: String,
    pub domain_size: f64,
    pub cells_per_side: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub steps: usize,
    pub params: Option<DegenParams>,
    pub problem: Option<String>,
}

impl TrajectoryMeta {
    pub fn grid(&self) -> Result<SpaceTimeGrid> {
        SpaceTimeGrid::new(
            self.domain_size,
            self.cells_per_side,
            self.t_start,
            self.t_end,
            self.steps,
        )
    }
}

/// Path of the sidecar belonging to a binary trajectory file.
pub fn sidecar_path(bin: &Path) -> PathBuf {
    bin.with_extension("json")
}

/// Writes `traj` to `bin` and its metadata to the sidecar next to it.
pub fn write_trajectory(
    bin: &Path,
    traj: &Trajectory,
    params: Option<&DegenParams>,
    problem: Option<&str>,
) -> Result<()> {
    let g = traj.grid();
    let meta = TrajectoryMeta {
        layout: LAYOUT.to_string(),
        domain_size: g.space.length(),
        cells_per_side: g.space.cells(),
        t_start: g.t_start(),
        t_end: g.t_end(),
        steps: g.steps(),
        params: params.copied(),
        problem: problem.map(str::to_string),
    };
    let mut w = BufWriter::new(fs::File::create(bin)?);
    for level in traj.levels() {
        for v in level.values() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    fs::write(sidecar_path(bin), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

/// Reads a trajectory written by [`write_trajectory`].
pub fn read_trajectory(bin: &Path) -> Result<(Trajectory, TrajectoryMeta)> {
    let meta: TrajectoryMeta = serde_json::from_str(&fs::read_to_string(sidecar_path(bin))?)?;
    if meta.layout != LAYOUT {
        return Err(Error::Serialization(format!(
            "unsupported layout '{}'",
            meta.layout
        )));
    }
    let grid = meta.grid()?;
    let bytes = fs::read(bin)?;
    let per_level = grid.space.num_nodes();
    let expected = per_level * grid.levels() * 8;
    if bytes.len() != expected {
        return Err(Error::Serialization(format!(
            "trajectory file holds {} bytes, expected {expected}",
            bytes.len()
        )));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let levels = values
        .chunks_exact(per_level)
        .map(|c| ScalarField::from_values(grid.space, c.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    Ok((Trajectory::new(grid, levels)?, meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let grid = SpaceTimeGrid::new(2.0, 5, 0.0, 1.0, 3).unwrap();
        let traj = Trajectory::from_fn(grid, |x, y, t| x - 2.0 * y + t * t);
        let params = DegenParams::with_default_alpha(3.0, 1.0, 0.01).unwrap();
        let path = dir.path().join("u.bin");
        write_trajectory(&path, &traj, Some(&params), Some("cone")).unwrap();
        let (back, meta) = read_trajectory(&path).unwrap();
        assert_eq!(back, traj);
        assert_eq!(meta.params, Some(params));
        assert_eq!(meta.problem.as_deref(), Some("cone"));
        assert_eq!(fs::metadata(&path).unwrap().len(), 36 * 4 * 8);
    }

    #[test]
    fn truncated_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let grid = SpaceTimeGrid::new(1.0, 4, 0.0, 1.0, 1).unwrap();
        let path = dir.path().join("u.bin");
        write_trajectory(&path, &Trajectory::zeros(grid), None, None).unwrap();
        fs::write(&path, [0u8; 16]).unwrap();
        assert!(matches!(
            read_trajectory(&path),
            Err(Error::Serialization(_))
        ));
    }
}
