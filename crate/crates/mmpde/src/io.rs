//! Mesh and log file I/O: legacy ASCII VTK (write + read), a small OBJ
//! subset, the node/ele two-file text format, and the per-step CSV log.
//!
//! Coordinates are written with 17 significant digits so a write/read round
//! trip reproduces every f64 bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::flow::StepRecord;
use crate::mesh::SimplicialMesh;

/// Optional per-vertex fields attached to a VTK file.
#[derive(Debug, Clone, Copy, Default)]
pub struct VtkPointData<'a> {
    pub curvature: Option<&'a [f64]>,
    /// flat Nv x d
    pub velocity: Option<&'a [f64]>,
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write a mesh (plus optional point data) as legacy ASCII VTK. Curves and
/// surfaces become POLYDATA, tetrahedral meshes an UNSTRUCTURED_GRID. The
/// title line records (m, d) so reading restores the exact dimensions.
pub fn write_vtk(mesh: &SimplicialMesh, data: &VtkPointData, path: &Path) -> Result<()> {
    if mesh.num_vertices() == 0 || mesh.num_elements() == 0 {
        return Err(Error::InvalidMesh("refusing to write an empty mesh".into()));
    }
    let (m, d) = (mesh.elem_dim(), mesh.space_dim());
    let nv = mesh.num_vertices();
    let ne = mesh.num_elements();
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(out, "mmpde mesh m={m} d={d}");
    out.push_str("ASCII\n");
    if m == 3 {
        out.push_str("DATASET UNSTRUCTURED_GRID\n");
    } else {
        out.push_str("DATASET POLYDATA\n");
    }
    let _ = writeln!(out, "POINTS {nv} double");
    for i in 0..nv {
        let v = mesh.vertex(i);
        for c in 0..3 {
            if c > 0 {
                out.push(' ');
            }
            out.push_str(&fmt_f64(if c < d { v[c] } else { 0.0 }));
        }
        out.push('\n');
    }
    match m {
        1 => {
            let _ = writeln!(out, "LINES {ne} {}", 3 * ne);
        }
        2 => {
            let _ = writeln!(out, "POLYGONS {ne} {}", 4 * ne);
        }
        _ => {
            let _ = writeln!(out, "CELLS {ne} {}", 5 * ne);
        }
    }
    for k in 0..ne {
        let el = mesh.element(k);
        let _ = write!(out, "{}", el.len());
        for &v in el {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    if m == 3 {
        let _ = writeln!(out, "CELL_TYPES {ne}");
        for _ in 0..ne {
            out.push_str("10\n");
        }
    }
    if data.curvature.is_some() || data.velocity.is_some() {
        let _ = writeln!(out, "POINT_DATA {nv}");
    }
    if let Some(curv) = data.curvature {
        out.push_str("SCALARS curvature double 1\nLOOKUP_TABLE default\n");
        for &k in curv {
            out.push_str(&fmt_f64(k));
            out.push('\n');
        }
    }
    if let Some(vel) = data.velocity {
        out.push_str("VECTORS velocity double\n");
        for i in 0..nv {
            for c in 0..3 {
                if c > 0 {
                    out.push(' ');
                }
                out.push_str(&fmt_f64(if c < d { vel[i * d + c] } else { 0.0 }));
            }
            out.push('\n');
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Line-number-tracking token stream over a text file.
struct Tokens {
    words: Vec<(usize, String)>,
    pos: usize,
}

impl Tokens {
    fn new(text: &str) -> Self {
        let mut words = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            for w in line.split_whitespace() {
                words.push((lineno + 1, w.to_string()));
            }
        }
        Self { words, pos: 0 }
    }

    fn line(&self) -> usize {
        self.words
            .get(self.pos.min(self.words.len().saturating_sub(1)))
            .map_or(0, |(l, _)| *l)
    }

    fn next(&mut self, what: &str) -> Result<&str> {
        match self.words.get(self.pos) {
            Some((_, w)) => {
                self.pos += 1;
                Ok(w)
            }
            None => Err(Error::Parse {
                line: self.words.last().map_or(0, |(l, _)| *l),
                message: format!("unexpected end of file, expected {what}"),
            }),
        }
    }

    fn next_usize(&mut self, what: &str) -> Result<usize> {
        let line = self.line();
        let w = self.next(what)?;
        w.parse().map_err(|_| Error::Parse {
            line,
            message: format!("expected integer {what}, got {w:?}"),
        })
    }

    fn next_f64(&mut self, what: &str) -> Result<f64> {
        let line = self.line();
        let w = self.next(what)?;
        w.parse().map_err(|_| Error::Parse {
            line,
            message: format!("expected number {what}, got {w:?}"),
        })
    }
}

fn shrink_dim(points: &[f64]) -> usize {
    // drop a trailing all-zero z column written only for the VTK layout
    if points.iter().skip(2).step_by(3).all(|&z| z == 0.0) {
        2
    } else {
        3
    }
}

fn mesh_from_points3(
    m: usize,
    d_hint: Option<usize>,
    points: Vec<f64>,
    elems: Vec<usize>,
) -> Result<SimplicialMesh> {
    let d = d_hint.unwrap_or_else(|| if m == 3 { 3 } else { shrink_dim(&points) });
    let coords: Vec<f64> = points
        .chunks(3)
        .flat_map(|p| p[..d].to_vec())
        .collect();
    SimplicialMesh::new(m, d, coords, elems)
}

/// Read a legacy ASCII VTK file written by `write_vtk` (or compatible).
pub fn read_vtk(path: &Path) -> Result<SimplicialMesh> {
    let text = fs::read_to_string(path)?;
    // the title line may carry the original (m, d)
    let mut d_hint = None;
    let mut m_hint = None;
    if let Some(title) = text.lines().nth(1) {
        for w in title.split_whitespace() {
            if let Some(v) = w.strip_prefix("m=") {
                m_hint = v.parse::<usize>().ok();
            }
            if let Some(v) = w.strip_prefix("d=") {
                d_hint = v.parse::<usize>().ok();
            }
        }
    }
    let mut toks = Tokens::new(&text);
    loop {
        let w = toks.next("POINTS section")?;
        if w == "POINTS" {
            break;
        }
    }
    let np = toks.next_usize("point count")?;
    toks.next("point scalar type")?;
    let mut points = Vec::with_capacity(np * 3);
    for _ in 0..np * 3 {
        points.push(toks.next_f64("point coordinate")?);
    }
    let (section_line, section) = {
        let line = toks.line();
        (line, toks.next("cell section")?.to_string())
    };
    let m = match section.as_str() {
        "LINES" => 1,
        "POLYGONS" => 2,
        "CELLS" => 3,
        other => {
            return Err(Error::Parse {
                line: section_line,
                message: format!("expected LINES, POLYGONS or CELLS, got {other:?}"),
            })
        }
    };
    let m = m_hint.unwrap_or(m);
    let ne = toks.next_usize("cell count")?;
    toks.next_usize("cell index total")?;
    let mut elems = Vec::with_capacity(ne * (m + 1));
    for _ in 0..ne {
        let line = toks.line();
        let arity = toks.next_usize("cell arity")?;
        if arity != m + 1 {
            return Err(Error::Parse {
                line,
                message: format!("expected {}-vertex cells, got arity {arity}", m + 1),
            });
        }
        for _ in 0..arity {
            elems.push(toks.next_usize("cell vertex index")?);
        }
    }
    mesh_from_points3(m, d_hint, points, elems)
}

/// Read the OBJ subset `v`/`l`/`f`. Faces give (2,3) meshes; polylines give
/// curves with d inferred from the z column.
pub fn read_obj(path: &Path) -> Result<SimplicialMesh> {
    let text = fs::read_to_string(path)?;
    let mut points = Vec::new();
    let mut segments: Vec<usize> = Vec::new();
    let mut faces: Vec<usize> = Vec::new();
    let parse_index = |w: &str, lineno: usize, nv: usize| -> Result<usize> {
        let idx_part = w.split('/').next().unwrap_or(w);
        let i: i64 = idx_part.parse().map_err(|_| Error::Parse {
            line: lineno,
            message: format!("bad vertex index {w:?}"),
        })?;
        let resolved = if i < 0 { nv as i64 + i } else { i - 1 };
        if resolved < 0 || resolved >= nv as i64 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("vertex index {i} out of range (file has {nv} vertices)"),
            });
        }
        Ok(resolved as usize)
    };
    for (n, line) in text.lines().enumerate() {
        let lineno = n + 1;
        let mut words = line.split_whitespace();
        match words.next() {
            Some("v") => {
                let mut got = 0;
                for w in words.by_ref().take(3) {
                    points.push(w.parse::<f64>().map_err(|_| Error::Parse {
                        line: lineno,
                        message: format!("bad coordinate {w:?}"),
                    })?);
                    got += 1;
                }
                if got < 3 {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("vertex record has {got} coordinates, expected 3"),
                    });
                }
            }
            Some("l") => {
                let idx: Vec<usize> = words
                    .map(|w| parse_index(w, lineno, points.len() / 3))
                    .collect::<Result<_>>()?;
                if idx.len() < 2 {
                    return Err(Error::Parse {
                        line: lineno,
                        message: "polyline record needs at least two indices".into(),
                    });
                }
                for pair in idx.windows(2) {
                    segments.extend_from_slice(pair);
                }
            }
            Some("f") => {
                let idx: Vec<usize> = words
                    .map(|w| parse_index(w, lineno, points.len() / 3))
                    .collect::<Result<_>>()?;
                if idx.len() != 3 {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("only triangular faces supported, got {}", idx.len()),
                    });
                }
                faces.extend_from_slice(&idx);
            }
            _ => {}
        }
    }
    match (segments.is_empty(), faces.is_empty()) {
        (false, true) => mesh_from_points3(1, None, points, segments),
        (true, false) => mesh_from_points3(2, Some(3), points, faces),
        (false, false) => Err(Error::Parse {
            line: 0,
            message: "file mixes line and face elements".into(),
        }),
        (true, true) => Err(Error::Parse {
            line: 0,
            message: "no elements found".into(),
        }),
    }
}

/// Read the node/ele format: `<base>.node` holds `nv d` then `i x ...`, the
/// sibling `<base>.ele` holds `ne k` then `i v0 ... v(k-1)` with zero-based
/// vertex indices.
pub fn read_node_ele(node_path: &Path) -> Result<SimplicialMesh> {
    let ele_path = node_path.with_extension("ele");
    let node_text = fs::read_to_string(node_path)?;
    let ele_text = fs::read_to_string(&ele_path)?;

    let mut toks = Tokens::new(&node_text);
    let nv = toks.next_usize("vertex count")?;
    let d = toks.next_usize("space dimension")?;
    if !(1..=3).contains(&d) {
        return Err(Error::Parse {
            line: toks.line(),
            message: format!("space dimension must be 1, 2 or 3, got {d}"),
        });
    }
    let mut coords = Vec::with_capacity(nv * d);
    for want in 0..nv {
        let line = toks.line();
        let idx = toks.next_usize("vertex index")?;
        if idx != want {
            return Err(Error::Parse {
                line,
                message: format!("expected vertex index {want}, got {idx}"),
            });
        }
        for _ in 0..d {
            coords.push(toks.next_f64("vertex coordinate")?);
        }
    }

    let mut toks = Tokens::new(&ele_text);
    let ne = toks.next_usize("element count")?;
    let arity = toks.next_usize("element arity")?;
    if !(2..=4).contains(&arity) {
        return Err(Error::Parse {
            line: toks.line(),
            message: format!("element arity must be 2, 3 or 4, got {arity}"),
        });
    }
    let mut elems = Vec::with_capacity(ne * arity);
    for want in 0..ne {
        let line = toks.line();
        let idx = toks.next_usize("element index")?;
        if idx != want {
            return Err(Error::Parse {
                line,
                message: format!("expected element index {want}, got {idx}"),
            });
        }
        for _ in 0..arity {
            elems.push(toks.next_usize("element vertex index")?);
        }
    }
    SimplicialMesh::new(arity - 1, d, coords, elems)
}

/// Supported input formats for `read_mesh`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Vtk,
    Obj,
    NodeEle,
}

impl MeshFormat {
    /// Guess from the file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "vtk" => Some(Self::Vtk),
            "obj" => Some(Self::Obj),
            "node" => Some(Self::NodeEle),
            _ => None,
        }
    }
}

pub fn read_mesh(path: &Path, format: MeshFormat) -> Result<SimplicialMesh> {
    match format {
        MeshFormat::Vtk => read_vtk(path),
        MeshFormat::Obj => read_obj(path),
        MeshFormat::NodeEle => read_node_ele(path),
    }
}

pub const LOG_HEADER: &str = "step,t,energy,min_K,min_aKM,max_vel,grad_residual";

/// Render the per-step CSV log. The fixed 17-significant-digit formatting
/// makes identical trajectories byte-identical.
pub fn render_log(steps: &[StepRecord]) -> String {
    let mut out = String::from(LOG_HEADER);
    out.push('\n');
    for s in steps {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.step,
            fmt_f64(s.t),
            fmt_f64(s.energy),
            fmt_f64(s.min_measure),
            fmt_f64(s.min_metric_height),
            fmt_f64(s.max_velocity),
            fmt_f64(s.grad_residual),
        );
    }
    out
}

pub fn write_log(steps: &[StepRecord], path: &Path) -> Result<()> {
    fs::write(path, render_log(steps))?;
    Ok(())
}
