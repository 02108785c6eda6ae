//! Example geometry catalogue: analytic parametrizations of the curve and
//! surface families, seeded nonuniform mesh generation in parameter space,
//! and Gauss-Newton reprojection of moved vertices back onto the geometry.
//!
//! Perturbation happens in parameter space so every generated vertex lies on
//! the geometry exactly; closedness of a parameter direction is detected by
//! comparing the endpoint images.

use nalgebra::{SMatrix, SVector, Vector2};

use crate::error::{Error, Result};
use crate::mesh::SimplicialMesh;
use crate::rng::SplitMix;

const CLOSURE_TOL: f64 = 1e-9;

/// Catalogue of analytic geometries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeometryKind {
    /// (r cos s, sin s), r = 1
    Circle { r: f64 },
    /// (r cos s, sin s), elongated, r > 1
    Ellipse { r: f64 },
    /// (2 cos s, sin s cos s) / (1 + sin^2 s), self-intersecting
    Lemniscate,
    /// 2 (cos s, sin s) (1 - cos s)
    Cardioid,
    /// (cos(rs) cos s, cos(rs) sin s), s in [0, c pi]
    Rose { r: f64, c: f64 },
    /// (e^{0.1 s} cos 10s, e^{0.1 s} sin 10s, s), s in [-12, 12]
    MexicanCap,
    /// ((3 + cos sqrt2 s) cos s, cos sqrt2 s, (3 + cos sqrt2 s) sin s), s in [0, 40 pi]
    TorusCurve,
    /// (sqrt(1 + z^2) cos s, sqrt(1 + z^2) sin s, z), z in [-2, 2]
    Hyperboloid,
    /// corkscrew tube surface, s in [0, 70], z in [0, 150]
    Cavatappi,
}

impl GeometryKind {
    /// (m, d) of meshes for this geometry.
    pub fn dims(&self) -> (usize, usize) {
        match self {
            Self::Circle { .. } | Self::Ellipse { .. } | Self::Lemniscate
            | Self::Cardioid | Self::Rose { .. } => (1, 2),
            Self::MexicanCap | Self::TorusCurve => (1, 3),
            Self::Hyperboloid | Self::Cavatappi => (2, 3),
        }
    }

    /// Number of parameters per vertex (1 for curves, 2 for surfaces).
    pub fn param_dim(&self) -> usize {
        self.dims().0
    }

    /// Parameter range in the first direction.
    pub fn s_range(&self) -> (f64, f64) {
        use std::f64::consts::PI;
        match self {
            Self::Circle { .. } | Self::Ellipse { .. } | Self::Lemniscate
            | Self::Cardioid | Self::Hyperboloid => (0.0, 2.0 * PI),
            Self::Rose { c, .. } => (0.0, c * PI),
            Self::MexicanCap => (-12.0, 12.0),
            Self::TorusCurve => (0.0, 40.0 * PI),
            Self::Cavatappi => (0.0, 70.0),
        }
    }

    /// Parameter range in the second direction (surfaces only).
    pub fn zeta_range(&self) -> Option<(f64, f64)> {
        match self {
            Self::Hyperboloid => Some((-2.0, 2.0)),
            Self::Cavatappi => Some((0.0, 150.0)),
            _ => None,
        }
    }

    /// Geometry point at parameter `u` (1 or 2 entries).
    pub fn point(&self, u: &[f64]) -> Vec<f64> {
        let s = u[0];
        match self {
            Self::Circle { r } | Self::Ellipse { r } => vec![r * s.cos(), s.sin()],
            Self::Lemniscate => {
                let w = 1.0 + s.sin().powi(2);
                vec![2.0 * s.cos() / w, s.sin() * s.cos() / w]
            }
            Self::Cardioid => {
                let f = 2.0 * (1.0 - s.cos());
                vec![f * s.cos(), f * s.sin()]
            }
            Self::Rose { r, .. } => {
                let a = (r * s).cos();
                vec![a * s.cos(), a * s.sin()]
            }
            Self::MexicanCap => {
                let e = (0.1 * s).exp();
                vec![e * (10.0 * s).cos(), e * (10.0 * s).sin(), s]
            }
            Self::TorusCurve => {
                let q = (2.0f64.sqrt() * s).cos();
                vec![(3.0 + q) * s.cos(), q, (3.0 + q) * s.sin()]
            }
            Self::Hyperboloid => {
                let z = u[1];
                let w = (1.0 + z * z).sqrt();
                vec![w * s.cos(), w * s.sin(), z]
            }
            Self::Cavatappi => {
                let z = u[1];
                let pi = std::f64::consts::PI;
                let a = 3.0 + 2.0 * (pi * s / 35.0).cos();
                let b = 0.1 * (2.0 * pi * s / 7.0).cos();
                let c = 3.0 + 2.0 * (pi * s / 35.0).sin() + 0.1 * (2.0 * pi * s / 7.0).sin();
                let phi = pi * z / 30.0;
                vec![a + b * phi.cos(), a + b * phi.sin(), c + z / 6.0]
            }
        }
    }

    /// Jacobian of `point`, d rows by param_dim columns, flattened row-major.
    pub fn jacobian(&self, u: &[f64]) -> Vec<f64> {
        let s = u[0];
        match self {
            Self::Circle { r } | Self::Ellipse { r } => vec![-r * s.sin(), s.cos()],
            Self::Lemniscate => {
                let w = 1.0 + s.sin().powi(2);
                let wp = (2.0 * s).sin();
                vec![
                    -2.0 * s.sin() / w - 2.0 * s.cos() * wp / (w * w),
                    (2.0 * s).cos() / w - 0.5 * (2.0 * s).sin() * wp / (w * w),
                ]
            }
            Self::Cardioid => vec![
                -2.0 * s.sin() + 2.0 * (2.0 * s).sin(),
                2.0 * s.cos() - 2.0 * (2.0 * s).cos(),
            ],
            Self::Rose { r, .. } => {
                let (a, ap) = ((r * s).cos(), -r * (r * s).sin());
                vec![ap * s.cos() - a * s.sin(), ap * s.sin() + a * s.cos()]
            }
            Self::MexicanCap => {
                let e = (0.1 * s).exp();
                let (c, n) = ((10.0 * s).cos(), (10.0 * s).sin());
                vec![e * (0.1 * c - 10.0 * n), e * (0.1 * n + 10.0 * c), 1.0]
            }
            Self::TorusCurve => {
                let rt2 = 2.0f64.sqrt();
                let q = (rt2 * s).cos();
                let qp = -rt2 * (rt2 * s).sin();
                vec![
                    qp * s.cos() - (3.0 + q) * s.sin(),
                    qp,
                    qp * s.sin() + (3.0 + q) * s.cos(),
                ]
            }
            Self::Hyperboloid => {
                let z = u[1];
                let w = (1.0 + z * z).sqrt();
                // rows (x, y, z) x columns (d/ds, d/dz)
                vec![
                    -w * s.sin(), z / w * s.cos(),
                    w * s.cos(), z / w * s.sin(),
                    0.0, 1.0,
                ]
            }
            Self::Cavatappi => {
                let z = u[1];
                let pi = std::f64::consts::PI;
                let b = 0.1 * (2.0 * pi * s / 7.0).cos();
                let ap = -2.0 * pi / 35.0 * (pi * s / 35.0).sin();
                let bp = -0.2 * pi / 7.0 * (2.0 * pi * s / 7.0).sin();
                let cp = 2.0 * pi / 35.0 * (pi * s / 35.0).cos()
                    + 0.2 * pi / 7.0 * (2.0 * pi * s / 7.0).cos();
                let phi = pi * z / 30.0;
                vec![
                    ap + bp * phi.cos(), -b * pi / 30.0 * phi.sin(),
                    ap + bp * phi.sin(), b * pi / 30.0 * phi.cos(),
                    cp, 1.0 / 6.0,
                ]
            }
        }
    }

    /// Whether the first parameter direction wraps (endpoint images match).
    pub fn s_closed(&self) -> bool {
        let (s0, s1) = self.s_range();
        let probe = |s: f64| match self.zeta_range() {
            Some((z0, z1)) => self.point(&[s, 0.5 * (z0 + z1)]),
            None => self.point(&[s]),
        };
        let (a, b) = (probe(s0), probe(s1));
        a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt() < CLOSURE_TOL
    }
}

/// Resolution, seed, and perturbation of a generated mesh.
#[derive(Debug, Clone, Copy)]
pub struct GeometrySpec {
    pub kind: GeometryKind,
    /// elements along a curve; ignored for surfaces
    pub n: usize,
    /// surface grid intervals in s
    pub n_s: usize,
    /// surface grid intervals in zeta
    pub n_zeta: usize,
    pub seed: u64,
    /// fraction of the mean parameter spacing, in [0, 0.45)
    pub perturb_amplitude: f64,
}

impl GeometrySpec {
    pub fn curve(kind: GeometryKind, n: usize, seed: u64, perturb_amplitude: f64) -> Self {
        Self { kind, n, n_s: 0, n_zeta: 0, seed, perturb_amplitude }
    }

    pub fn surface(
        kind: GeometryKind,
        n_s: usize,
        n_zeta: usize,
        seed: u64,
        perturb_amplitude: f64,
    ) -> Self {
        Self { kind, n: 0, n_s, n_zeta, seed, perturb_amplitude }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..0.45).contains(&self.perturb_amplitude) {
            return Err(Error::Geometry(format!(
                "perturb_amplitude must lie in [0, 0.45), got {}",
                self.perturb_amplitude
            )));
        }
        match self.kind.param_dim() {
            1 => {
                let min = if self.kind.s_closed() { 3 } else { 2 };
                if self.n < min {
                    return Err(Error::Geometry(format!(
                        "curve resolution N = {} below minimum {min}",
                        self.n
                    )));
                }
            }
            _ => {
                if self.n_s < 3 || self.n_zeta < 1 {
                    return Err(Error::Geometry(format!(
                        "surface grid {}x{} too small",
                        self.n_s, self.n_zeta
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Per-vertex parameter values tied to a geometry; supports evaluating the
/// map, reprojecting moved vertices, and measuring deviation.
#[derive(Debug, Clone)]
pub struct Parametrization {
    pub kind: GeometryKind,
    /// flat Nv x param_dim
    pub params: Vec<f64>,
    /// rim vertices of open-in-zeta surfaces keep their zeta during
    /// reprojection, so sliding stays on the rim curve
    pub frozen_zeta: Vec<bool>,
}

impl Parametrization {
    pub fn vertex_param(&self, i: usize) -> &[f64] {
        let p = self.kind.param_dim();
        &self.params[i * p..(i + 1) * p]
    }

    /// One Gauss-Newton solve pulling `x` onto the geometry, starting from
    /// the stored parameter of vertex `i`. Updates the stored parameter and
    /// returns the on-geometry point.
    fn project_vertex(&mut self, i: usize, x: &[f64]) -> Vec<f64> {
        let pdim = self.kind.param_dim();
        let d = self.kind.dims().1;
        let frozen = pdim == 2 && self.frozen_zeta.get(i).copied().unwrap_or(false);
        let mut u: Vec<f64> = self.vertex_param(i).to_vec();
        for _ in 0..50 {
            let p = self.kind.point(&u);
            let jac = self.kind.jacobian(&u);
            let r: Vec<f64> = (0..d).map(|k| p[k] - x[k]).collect();
            if frozen {
                // zeta pinned: one-dimensional solve along s
                let (mut jtj, mut jtr) = (0.0, 0.0);
                for k in 0..d {
                    jtj += jac[k * 2] * jac[k * 2];
                    jtr += jac[k * 2] * r[k];
                }
                if jtj == 0.0 {
                    break;
                }
                let step = jtr / jtj;
                u[0] -= step;
                if step.abs() <= 1e-15 * (1.0 + u[0].abs()) {
                    break;
                }
            } else if pdim == 1 {
                let (mut jtj, mut jtr) = (0.0, 0.0);
                for k in 0..d {
                    jtj += jac[k] * jac[k];
                    jtr += jac[k] * r[k];
                }
                if jtj == 0.0 {
                    break;
                }
                let step = jtr / jtj;
                u[0] -= step;
                if step.abs() <= 1e-15 * (1.0 + u[0].abs()) {
                    break;
                }
            } else {
                let mut jtj = SMatrix::<f64, 2, 2>::zeros();
                let mut jtr = SVector::<f64, 2>::zeros();
                for k in 0..d {
                    let row = Vector2::new(jac[k * 2], jac[k * 2 + 1]);
                    jtj += row * row.transpose();
                    jtr += row * r[k];
                }
                let Some(inv) = crate::smallmat::inverse(&jtj) else { break };
                let step = inv * jtr;
                u[0] -= step[0];
                u[1] -= step[1];
                if step.norm() <= 1e-15 * (1.0 + Vector2::new(u[0], u[1]).norm()) {
                    break;
                }
            }
        }
        for (slot, &v) in u.iter().enumerate() {
            self.params[i * pdim + slot] = v;
        }
        self.kind.point(&u)
    }

    /// Pull every vertex of `mesh` back onto the geometry in place.
    pub fn reproject(&mut self, mesh: &mut SimplicialMesh) {
        for i in 0..mesh.num_vertices() {
            let x = mesh.vertex(i).to_vec();
            let p = self.project_vertex(i, &x);
            mesh.set_vertex(i, &p);
        }
    }

    /// Largest distance from a mesh vertex to the geometry, estimated by
    /// Gauss-Newton projection seeded at the stored parameters.
    pub fn max_deviation(&self, mesh: &SimplicialMesh) -> f64 {
        let mut probe = self.clone();
        let mut max = 0.0f64;
        for i in 0..mesh.num_vertices() {
            let x = mesh.vertex(i).to_vec();
            let p = probe.project_vertex(i, &x);
            let dist = x.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            max = max.max(dist);
        }
        max
    }
}

fn generate_curve(spec: &GeometrySpec) -> Result<(SimplicialMesh, Parametrization)> {
    let kind = spec.kind;
    let (s0, s1) = kind.s_range();
    let closed = kind.s_closed();
    let n = spec.n;
    let nv = if closed { n } else { n + 1 };
    let ds = (s1 - s0) / n as f64;
    let mut rng = SplitMix::new(spec.seed);
    let mut params = Vec::with_capacity(nv);
    for i in 0..nv {
        let interior = closed || (i > 0 && i < n);
        let jitter = if interior {
            rng.uniform(-spec.perturb_amplitude, spec.perturb_amplitude)
        } else {
            // endpoints of an open curve stay put
            0.0
        };
        params.push(s0 + (i as f64 + jitter) * ds);
    }
    let d = kind.dims().1;
    let mut coords = Vec::with_capacity(nv * d);
    for &s in &params {
        coords.extend(kind.point(&[s]));
    }
    let mut elems = Vec::with_capacity(2 * n);
    for i in 0..n {
        elems.push(i);
        elems.push(if closed { (i + 1) % n } else { i + 1 });
    }
    let mesh = SimplicialMesh::new(1, d, coords, elems)?;
    let frozen_zeta = vec![false; nv];
    Ok((mesh, Parametrization { kind, params, frozen_zeta }))
}

fn generate_surface(spec: &GeometrySpec) -> Result<(SimplicialMesh, Parametrization)> {
    let kind = spec.kind;
    let (s0, s1) = kind.s_range();
    let (z0, z1) = kind.zeta_range().expect("surface geometry has a zeta range");
    let closed = kind.s_closed();
    let (ns, nz) = (spec.n_s, spec.n_zeta);
    let cols = if closed { ns } else { ns + 1 };
    let ds = (s1 - s0) / ns as f64;
    let dz = (z1 - z0) / nz as f64;
    let mut rng = SplitMix::new(spec.seed);
    let mut params = Vec::with_capacity(cols * (nz + 1) * 2);
    for j in 0..=nz {
        for i in 0..cols {
            let s_jitter = if closed || (i > 0 && i < ns) {
                rng.uniform(-spec.perturb_amplitude, spec.perturb_amplitude)
            } else {
                0.0
            };
            // zeta boundary rows stay on the rims
            let z_jitter = if j > 0 && j < nz {
                rng.uniform(-spec.perturb_amplitude, spec.perturb_amplitude)
            } else {
                0.0
            };
            params.push(s0 + (i as f64 + s_jitter) * ds);
            params.push(z0 + (j as f64 + z_jitter) * dz);
        }
    }
    let mut coords = Vec::with_capacity(cols * (nz + 1) * 3);
    for v in 0..cols * (nz + 1) {
        coords.extend(kind.point(&params[v * 2..v * 2 + 2]));
    }
    let idx = |i: usize, j: usize| j * cols + i % cols;
    let mut elems = Vec::with_capacity(ns * nz * 6);
    for j in 0..nz {
        for i in 0..ns {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            elems.extend_from_slice(&[a, b, c, a, c, d]);
        }
    }
    let mesh = SimplicialMesh::new(2, 3, coords, elems)?;
    let mut frozen_zeta = vec![false; cols * (nz + 1)];
    for i in 0..cols {
        frozen_zeta[idx(i, 0)] = true;
        frozen_zeta[idx(i, nz)] = true;
    }
    Ok((mesh, Parametrization { kind, params, frozen_zeta }))
}

/// Build the seeded nonuniform mesh of a geometry together with the
/// parametrization used for reprojection. Identical specs produce bitwise
/// identical meshes.
pub fn generate_mesh(spec: &GeometrySpec) -> Result<(SimplicialMesh, Parametrization)> {
    spec.validate()?;
    match spec.kind.param_dim() {
        1 => generate_curve(spec),
        _ => generate_surface(spec),
    }
}
