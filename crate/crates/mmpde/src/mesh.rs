//! Simplicial meshes of m-simplexes embedded in R^d, with 1 <= m <= d <= 3.
//!
//! Vertex coordinates are stored flat (`num_vertices * d`), element
//! connectivity as `num_elements * (m + 1)` vertex indices.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Supported (m, d) combinations.
pub const SUPPORTED_DIMS: [(usize, usize); 6] = [(1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)];

#[derive(Debug, Clone)]
pub struct SimplicialMesh {
    m: usize,
    d: usize,
    coords: Vec<f64>,
    elems: Vec<usize>,
}

impl SimplicialMesh {
    pub fn new(m: usize, d: usize, coords: Vec<f64>, elems: Vec<usize>) -> Result<Self> {
        if !SUPPORTED_DIMS.contains(&(m, d)) {
            return Err(Error::UnsupportedDims { m, d });
        }
        if coords.len() % d != 0 {
            return Err(Error::InvalidMesh(format!(
                "coordinate array length {} is not a multiple of d={}",
                coords.len(),
                d
            )));
        }
        if elems.len() % (m + 1) != 0 {
            return Err(Error::InvalidMesh(format!(
                "element array length {} is not a multiple of m+1={}",
                elems.len(),
                m + 1
            )));
        }
        let nv = coords.len() / d;
        if let Some(&bad) = elems.iter().find(|&&v| v >= nv) {
            return Err(Error::InvalidMesh(format!(
                "element references vertex {bad}, mesh has {nv} vertices"
            )));
        }
        Ok(Self { m, d, coords, elems })
    }

    pub fn elem_dim(&self) -> usize {
        self.m
    }

    pub fn space_dim(&self) -> usize {
        self.d
    }

    pub fn num_vertices(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn num_elements(&self) -> usize {
        self.elems.len() / (self.m + 1)
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn set_vertex(&mut self, i: usize, x: &[f64]) {
        self.coords[i * self.d..(i + 1) * self.d].copy_from_slice(x);
    }

    pub fn element(&self, e: usize) -> &[usize] {
        &self.elems[e * (self.m + 1)..(e + 1) * (self.m + 1)]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    pub fn elements_flat(&self) -> &[usize] {
        &self.elems
    }

    /// Element patches omega_i: for each vertex, the elements that contain it.
    pub fn vertex_patches(&self) -> Vec<Vec<usize>> {
        let mut patches = vec![Vec::new(); self.num_vertices()];
        for e in 0..self.num_elements() {
            for &v in self.element(e) {
                patches[v].push(e);
            }
        }
        patches
    }

    /// Unique undirected edges (vertex index pairs, lo < hi).
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut seen = HashMap::new();
        let mut out = Vec::new();
        for e in 0..self.num_elements() {
            let el = self.element(e);
            for i in 0..el.len() {
                for j in (i + 1)..el.len() {
                    let key = (el[i].min(el[j]), el[i].max(el[j]));
                    seen.entry(key).or_insert_with(|| {
                        out.push(key);
                    });
                }
            }
        }
        out
    }

    pub fn edge_length(&self, a: usize, b: usize) -> f64 {
        let (xa, xb) = (self.vertex(a), self.vertex(b));
        xa.iter()
            .zip(xb)
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt()
    }

    pub fn mean_edge_length(&self) -> f64 {
        let edges = self.edges();
        if edges.is_empty() {
            return 0.0;
        }
        edges.iter().map(|&(a, b)| self.edge_length(a, b)).sum::<f64>() / edges.len() as f64
    }

    /// Shortest edge incident to each vertex.
    pub fn min_incident_edge_lengths(&self) -> Vec<f64> {
        let mut out = vec![f64::INFINITY; self.num_vertices()];
        for &(a, b) in &self.edges() {
            let len = self.edge_length(a, b);
            out[a] = out[a].min(len);
            out[b] = out[b].min(len);
        }
        out
    }

    /// Bounding-box diagonal, used as a scale reference.
    pub fn diameter(&self) -> f64 {
        let d = self.d;
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for i in 0..self.num_vertices() {
            for (k, &x) in self.vertex(i).iter().enumerate() {
                lo[k] = lo[k].min(x);
                hi[k] = hi[k].max(x);
            }
        }
        lo.iter()
            .zip(&hi)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }

    /// Boundary vertices: on curves those with valence 1, on surfaces (and bulk
    /// meshes) the vertices of facets shared by a single element.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut boundary = vec![false; self.num_vertices()];
        match self.m {
            1 => {
                let mut valence = vec![0usize; self.num_vertices()];
                for &v in &self.elems {
                    valence[v] += 1;
                }
                for (i, &c) in valence.iter().enumerate() {
                    if c == 1 {
                        boundary[i] = true;
                    }
                }
            }
            _ => {
                // count facets; a facet on the boundary belongs to exactly one element
                let mut facets: HashMap<Vec<usize>, usize> = HashMap::new();
                for e in 0..self.num_elements() {
                    let el = self.element(e);
                    for skip in 0..el.len() {
                        let mut f: Vec<usize> = el
                            .iter()
                            .enumerate()
                            .filter(|&(k, _)| k != skip)
                            .map(|(_, &v)| v)
                            .collect();
                        f.sort_unstable();
                        *facets.entry(f).or_insert(0) += 1;
                    }
                }
                for (f, count) in facets {
                    if count == 1 {
                        for v in f {
                            boundary[v] = true;
                        }
                    }
                }
            }
        }
        boundary
    }

    /// For a curve mesh, the connectivity neighbors of each vertex in element
    /// orientation order: `prev[i]` is the source of the edge ending at i,
    /// `next[i]` the target of the edge starting at i.
    pub fn curve_neighbors(&self) -> Result<(Vec<Option<usize>>, Vec<Option<usize>>)> {
        if self.m != 1 {
            return Err(Error::InvalidMesh("curve_neighbors requires m=1".into()));
        }
        let nv = self.num_vertices();
        let mut prev = vec![None; nv];
        let mut next = vec![None; nv];
        let mut valence = vec![0usize; nv];
        for e in 0..self.num_elements() {
            let el = self.element(e);
            let (a, b) = (el[0], el[1]);
            valence[a] += 1;
            valence[b] += 1;
            if next[a].is_some() || prev[b].is_some() {
                // inconsistent orientation or branching
                return Err(Error::CurveValence {
                    vertex: if next[a].is_some() { a } else { b },
                    valence: 3,
                });
            }
            next[a] = Some(b);
            prev[b] = Some(a);
        }
        for (i, &c) in valence.iter().enumerate() {
            if c > 2 {
                return Err(Error::CurveValence { vertex: i, valence: c });
            }
        }
        Ok((prev, next))
    }
}
