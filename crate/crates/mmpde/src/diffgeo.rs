//! Discrete differential geometry on simplicial curves and surfaces: vertex
//! frames (unit tangents and normals) and mean curvature magnitudes.
//!
//! Curvature of a curve vertex is the inverse circumradius of the vertex and
//! its two neighbors. Surface curvature is the norm of the cotangent-weighted
//! Laplacian of position over twice the mixed Voronoi area, which converges to
//! the mean curvature `(k1 + k2) / 2` of the underlying surface.

use nalgebra::SVector;

use crate::error::{Error, Result};
use crate::mesh::SimplicialMesh;

fn vert<const D: usize>(mesh: &SimplicialMesh, i: usize) -> SVector<f64, D> {
    SVector::from_column_slice(mesh.vertex(i))
}

fn curve_tangents_typed<const D: usize>(mesh: &SimplicialMesh) -> Result<Vec<f64>> {
    let (prev, next) = mesh.curve_neighbors()?;
    let nv = mesh.num_vertices();
    let mut out = vec![0.0; nv * D];
    for i in 0..nv {
        let x = vert::<D>(mesh, i);
        // central difference where both neighbors exist, one-sided at ends
        let dir = match (prev[i], next[i]) {
            (Some(p), Some(n)) => vert::<D>(mesh, n) - vert::<D>(mesh, p),
            (None, Some(n)) => vert::<D>(mesh, n) - x,
            (Some(p), None) => x - vert::<D>(mesh, p),
            (None, None) => return Err(Error::CurveValence { vertex: i, valence: 0 }),
        };
        let norm = dir.norm();
        if norm == 0.0 {
            return Err(Error::DegenerateSimplex { element: i });
        }
        for c in 0..D {
            out[i * D + c] = dir[c] / norm;
        }
    }
    Ok(out)
}

/// Unit tangent per vertex of a curve mesh (m = 1), flat `Nv x d`.
pub fn curve_tangents(mesh: &SimplicialMesh) -> Result<Vec<f64>> {
    if mesh.elem_dim() != 1 {
        return Err(Error::UnsupportedDims { m: mesh.elem_dim(), d: mesh.space_dim() });
    }
    match mesh.space_dim() {
        2 => curve_tangents_typed::<2>(mesh),
        3 => curve_tangents_typed::<3>(mesh),
        d => Err(Error::UnsupportedDims { m: 1, d }),
    }
}

/// Every interior edge of an oriented surface mesh must be traversed in
/// opposite directions by its two triangles.
pub fn check_surface_orientation(mesh: &SimplicialMesh) -> Result<()> {
    use std::collections::HashSet;
    let mut directed: HashSet<(usize, usize)> = HashSet::new();
    for k in 0..mesh.num_elements() {
        let el = mesh.element(k);
        for j in 0..3 {
            let edge = (el[j], el[(j + 1) % 3]);
            // a repeated directed edge means two triangles traverse it the
            // same way
            if !directed.insert(edge) {
                return Err(Error::InconsistentOrientation(edge.0, edge.1));
            }
        }
    }
    Ok(())
}

/// Angle-weighted unit vertex normals of an oriented triangle mesh in R^3,
/// flat `Nv x 3`.
pub fn surface_normals(mesh: &SimplicialMesh) -> Result<Vec<f64>> {
    if mesh.elem_dim() != 2 || mesh.space_dim() != 3 {
        return Err(Error::UnsupportedDims { m: mesh.elem_dim(), d: mesh.space_dim() });
    }
    check_surface_orientation(mesh)?;
    let nv = mesh.num_vertices();
    let mut acc = vec![SVector::<f64, 3>::zeros(); nv];
    for k in 0..mesh.num_elements() {
        let el = mesh.element(k);
        let x = [vert::<3>(mesh, el[0]), vert::<3>(mesh, el[1]), vert::<3>(mesh, el[2])];
        let n = (x[1] - x[0]).cross(&(x[2] - x[0]));
        if n.norm() == 0.0 {
            return Err(Error::DegenerateSimplex { element: k });
        }
        let n = n.normalize();
        for j in 0..3 {
            let u = (x[(j + 1) % 3] - x[j]).normalize();
            let v = (x[(j + 2) % 3] - x[j]).normalize();
            let angle = u.dot(&v).clamp(-1.0, 1.0).acos();
            acc[el[j]] += n * angle;
        }
    }
    let mut out = vec![0.0; nv * 3];
    for i in 0..nv {
        let norm = acc[i].norm();
        if norm == 0.0 {
            return Err(Error::InvalidMesh(format!("isolated vertex {i} has no normal")));
        }
        for c in 0..3 {
            out[i * 3 + c] = acc[i][c] / norm;
        }
    }
    Ok(out)
}

/// Inverse circumradius of the triangle (a, b, c); zero when collinear.
fn circum_curvature<const D: usize>(
    a: &SVector<f64, D>,
    b: &SVector<f64, D>,
    c: &SVector<f64, D>,
) -> f64 {
    let la = (b - a).norm();
    let lb = (c - b).norm();
    let lc = (a - c).norm();
    // 2 * area from the Gram determinant of two edges
    let u = b - a;
    let v = c - a;
    let gram = u.norm_squared() * v.norm_squared() - u.dot(&v).powi(2);
    let double_area = gram.max(0.0).sqrt();
    if la == 0.0 || lb == 0.0 || lc == 0.0 {
        return 0.0;
    }
    2.0 * double_area / (la * lb * lc)
}

fn curve_curvature_typed<const D: usize>(mesh: &SimplicialMesh) -> Result<Vec<f64>> {
    let (prev, next) = mesh.curve_neighbors()?;
    let nv = mesh.num_vertices();
    let mut out = vec![f64::NAN; nv];
    for i in 0..nv {
        if let (Some(p), Some(n)) = (prev[i], next[i]) {
            out[i] =
                circum_curvature(&vert::<D>(mesh, p), &vert::<D>(mesh, i), &vert::<D>(mesh, n));
        }
    }
    // open-curve endpoints copy the adjacent interior value
    for i in 0..nv {
        if out[i].is_nan() {
            let neighbor = next[i].or(prev[i]).ok_or(Error::CurveValence { vertex: i, valence: 0 })?;
            if out[neighbor].is_nan() {
                // two-vertex curve: no curvature information at all
                out[i] = 0.0;
            } else {
                out[i] = out[neighbor];
            }
        }
    }
    Ok(out)
}

/// Mixed Voronoi area contribution of one triangle to its vertex `j`.
fn mixed_area_contribution(x: &[SVector<f64, 3>; 3], j: usize) -> f64 {
    let a = x[j];
    let b = x[(j + 1) % 3];
    let c = x[(j + 2) % 3];
    let area = 0.5 * (b - a).cross(&(c - a)).norm();
    if area == 0.0 {
        return 0.0;
    }
    let cos_a = (b - a).normalize().dot(&(c - a).normalize());
    let cos_b = (a - b).normalize().dot(&(c - b).normalize());
    let cos_c = (a - c).normalize().dot(&(b - c).normalize());
    if cos_a < 0.0 {
        return area / 2.0;
    }
    if cos_b < 0.0 || cos_c < 0.0 {
        return area / 4.0;
    }
    // non-obtuse: Voronoi area (1/8)(|ab|^2 cot C + |ac|^2 cot B)
    let cot = |cos: f64| cos / (1.0 - cos * cos).max(1e-300).sqrt();
    ((b - a).norm_squared() * cot(cos_c) + (c - a).norm_squared() * cot(cos_b)) / 8.0
}

fn surface_curvature(mesh: &SimplicialMesh) -> Result<Vec<f64>> {
    let nv = mesh.num_vertices();
    let mut lap = vec![SVector::<f64, 3>::zeros(); nv];
    let mut area = vec![0.0f64; nv];
    for k in 0..mesh.num_elements() {
        let el = mesh.element(k);
        let x = [vert::<3>(mesh, el[0]), vert::<3>(mesh, el[1]), vert::<3>(mesh, el[2])];
        let double_area = (x[1] - x[0]).cross(&(x[2] - x[0])).norm();
        if double_area == 0.0 {
            return Err(Error::DegenerateSimplex { element: k });
        }
        for j in 0..3 {
            // cotangent at the vertex opposite to edge (j+1, j+2)
            let u = x[(j + 1) % 3] - x[j];
            let v = x[(j + 2) % 3] - x[j];
            let cot = u.dot(&v) / double_area;
            // the edge (j+1, j+2) sees this angle from across
            let e = x[(j + 2) % 3] - x[(j + 1) % 3];
            lap[el[(j + 1) % 3]] += e * (0.5 * cot);
            lap[el[(j + 2) % 3]] -= e * (0.5 * cot);
            area[el[j]] += mixed_area_contribution(&x, j);
        }
    }
    let is_boundary = mesh.boundary_vertices();
    let mut out = vec![0.0f64; nv];
    for i in 0..nv {
        if is_boundary[i] {
            continue;
        }
        if area[i] <= 0.0 {
            return Err(Error::ZeroMixedArea(i));
        }
        out[i] = lap[i].norm() / (2.0 * area[i]);
    }
    if is_boundary.iter().any(|&b| b) {
        // borrow the value of the closest interior neighbor
        let mut neighbors = vec![Vec::new(); nv];
        for &(a, b) in &mesh.edges() {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for i in 0..nv {
            if !is_boundary[i] {
                continue;
            }
            let xi = vert::<3>(mesh, i);
            let mut best: Option<(f64, usize)> = None;
            for &j in &neighbors[i] {
                if is_boundary[j] {
                    continue;
                }
                let dist = (vert::<3>(mesh, j) - xi).norm();
                if best.map_or(true, |(d, _)| dist < d) {
                    best = Some((dist, j));
                }
            }
            if let Some((_, j)) = best {
                out[i] = out[j];
            }
        }
    }
    Ok(out)
}

/// Nonnegative mean curvature magnitude per vertex of a curve or surface
/// mesh. Bulk meshes (m = d) carry no extrinsic curvature.
pub fn discrete_curvature(mesh: &SimplicialMesh) -> Result<Vec<f64>> {
    match (mesh.elem_dim(), mesh.space_dim()) {
        (1, 2) => curve_curvature_typed::<2>(mesh),
        (1, 3) => curve_curvature_typed::<3>(mesh),
        (2, 3) => surface_curvature(mesh),
        (m, d) => Err(Error::UnsupportedDims { m, d }),
    }
}
