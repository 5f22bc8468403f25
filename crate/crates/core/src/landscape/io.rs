//! CSV serialization of profiles and surfaces.

use std::io::{BufRead, Write};

use super::{LandscapeProfile, ProfileMeta, Surface2D};
use crate::error::{Error, Result};

pub const PROFILE_HEADER: &str = "direction,t,loss_energy_mev_per_atom,loss_force_mev_per_ang";
pub const SURFACE_HEADER: &str = "t1,t2,loss_energy,loss_force";

/// Rows for directions 1..=N, followed by the averaged curve as `mean`.
pub fn write_profile_csv<W: Write>(mut w: W, p: &LandscapeProfile) -> std::io::Result<()> {
    writeln!(w, "{PROFILE_HEADER}")?;
    for n in 0..p.n_directions() {
        for (i, t) in p.t_grid.iter().enumerate() {
            writeln!(w, "{},{t},{},{}", n + 1, p.energy[n][i], p.force[n][i])?;
        }
    }
    for (i, t) in p.t_grid.iter().enumerate() {
        writeln!(w, "mean,{t},{},{}", p.mean_energy[i], p.mean_force[i])?;
    }
    Ok(())
}

pub fn write_surface_csv<W: Write>(mut w: W, s: &Surface2D) -> std::io::Result<()> {
    writeln!(w, "{SURFACE_HEADER}")?;
    for (i, t1) in s.t1_grid.iter().enumerate() {
        for (j, t2) in s.t2_grid.iter().enumerate() {
            writeln!(w, "{t1},{t2},{},{}", s.energy[i][j], s.force[i][j])?;
        }
    }
    Ok(())
}

fn bad(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        frame: 0,
        line,
        message: msg.into(),
    }
}

/// Read a profile CSV. Per-direction rows define the profile; `mean` rows
/// are ignored because the averages are recomputed. A file with only `mean`
/// rows is read as a single-direction profile.
pub fn read_profile_csv<R: BufRead>(r: R, meta: ProfileMeta) -> Result<LandscapeProfile> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| bad(1, "empty profile file"))??;
    if header.trim() != PROFILE_HEADER {
        return Err(bad(1, format!("unexpected header {header:?}")));
    }
    let mut dirs: Vec<(usize, Vec<(f64, f64, f64)>)> = Vec::new();
    let mut mean: Vec<(f64, f64, f64)> = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line?;
        let lineno = k + 2;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(bad(lineno, "expected 4 columns"));
        }
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| bad(lineno, format!("not a number: {s:?}")))
        };
        let row = (num(cols[1])?, num(cols[2])?, num(cols[3])?);
        if cols[0] == "mean" {
            mean.push(row);
            continue;
        }
        let n: usize = cols[0]
            .parse()
            .map_err(|_| bad(lineno, format!("bad direction {:?}", cols[0])))?;
        match dirs.last_mut() {
            Some((d, rows)) if *d == n => rows.push(row),
            _ => dirs.push((n, vec![row])),
        }
    }
    if dirs.is_empty() {
        if mean.is_empty() {
            return Err(bad(1, "profile has no rows"));
        }
        dirs.push((1, mean));
    }
    let t_grid: Vec<f64> = dirs[0].1.iter().map(|r| r.0).collect();
    for (n, rows) in &dirs {
        if rows.iter().map(|r| r.0).ne(t_grid.iter().copied()) {
            return Err(bad(0, format!("direction {n} uses a different grid")));
        }
    }
    let energy = dirs
        .iter()
        .map(|(_, r)| r.iter().map(|x| x.1).collect())
        .collect();
    let force = dirs
        .iter()
        .map(|(_, r)| r.iter().map(|x| x.2).collect())
        .collect();
    let mut meta = meta;
    meta.n_directions = dirs.len();
    LandscapeProfile::from_curves(t_grid, energy, force, meta)
}
