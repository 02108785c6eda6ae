//! Riemannian metric tensor fields on the mesh: per-vertex SPD d x d tensors
//! with element averaging and eigenvalue bounds.

use nalgebra::SMatrix;

use crate::error::{Error, Result};
use crate::mesh::SimplicialMesh;
use crate::smallmat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Identity,
    Curvature,
    User,
}

/// Per-vertex symmetric positive definite tensors, stored flat (`Nv * d * d`).
#[derive(Debug, Clone)]
pub struct MetricField {
    d: usize,
    tensors: Vec<f64>,
    pub kind: MetricKind,
    pub floor_eps: f64,
}

impl MetricField {
    /// M_i = I at every vertex.
    pub fn identity(mesh: &SimplicialMesh) -> Self {
        let d = mesh.space_dim();
        let nv = mesh.num_vertices();
        let mut tensors = vec![0.0; nv * d * d];
        for i in 0..nv {
            for k in 0..d {
                tensors[i * d * d + k * d + k] = 1.0;
            }
        }
        Self { d, tensors, kind: MetricKind::Identity, floor_eps: 1.0 }
    }

    /// Curvature-based metric `M_i = max(kbar_i, floor_eps) * I`.
    ///
    /// Curvatures must be nonnegative (mean-curvature magnitudes); the floor
    /// keeps the field uniformly positive definite where the curvature
    /// vanishes.
    pub fn from_curvature(
        mesh: &SimplicialMesh,
        curvatures: &[f64],
        floor_eps: f64,
    ) -> Result<Self> {
        let d = mesh.space_dim();
        let nv = mesh.num_vertices();
        if curvatures.len() != nv {
            return Err(Error::InvalidMetric(format!(
                "got {} curvature values for {} vertices",
                curvatures.len(),
                nv
            )));
        }
        if floor_eps <= 0.0 {
            return Err(Error::InvalidMetric("floor_eps must be positive".into()));
        }
        if let Some(k) = curvatures.iter().find(|&&k| k < 0.0 || !k.is_finite()) {
            return Err(Error::InvalidMetric(format!(
                "curvature must be a nonnegative magnitude, got {k}"
            )));
        }
        let mut tensors = vec![0.0; nv * d * d];
        for (i, &k) in curvatures.iter().enumerate() {
            let v = k.max(floor_eps);
            for j in 0..d {
                tensors[i * d * d + j * d + j] = v;
            }
        }
        Ok(Self { d, tensors, kind: MetricKind::Curvature, floor_eps })
    }

    /// User-supplied nodal tensors (row-major d x d per vertex). Each tensor
    /// must be symmetric and positive definite.
    pub fn from_tensors(d: usize, tensors: Vec<f64>, floor_eps: f64) -> Result<Self> {
        if tensors.len() % (d * d) != 0 {
            return Err(Error::InvalidMetric("tensor array length mismatch".into()));
        }
        let field = Self { d, tensors, kind: MetricKind::User, floor_eps };
        field.validate()?;
        Ok(field)
    }

    pub fn space_dim(&self) -> usize {
        self.d
    }

    pub fn num_vertices(&self) -> usize {
        self.tensors.len() / (self.d * self.d)
    }

    pub fn tensor<const D: usize>(&self, i: usize) -> SMatrix<f64, D, D> {
        debug_assert_eq!(D, self.d);
        let base = i * D * D;
        SMatrix::<f64, D, D>::from_fn(|r, c| self.tensors[base + r * D + c])
    }

    pub fn set_tensor<const D: usize>(&mut self, i: usize, t: &SMatrix<f64, D, D>) {
        let base = i * D * D;
        for r in 0..D {
            for c in 0..D {
                self.tensors[base + r * D + c] = t[(r, c)];
            }
        }
    }

    /// Arithmetic vertex average `M_K = (1/(m+1)) sum_j M_j` over an element.
    pub fn element_average<const D: usize>(&self, element: &[usize]) -> SMatrix<f64, D, D> {
        let mut avg = SMatrix::<f64, D, D>::zeros();
        for &v in element {
            avg += self.tensor::<D>(v);
        }
        avg / element.len() as f64
    }

    fn validate_typed<const D: usize>(&self) -> Result<()> {
        for i in 0..self.num_vertices() {
            let t = self.tensor::<D>(i);
            if !smallmat::is_symmetric(&t, 1e-14) {
                return Err(Error::InvalidMetric(format!("tensor at vertex {i} is not symmetric")));
            }
            if smallmat::sym_eig_min(&t) <= 0.0 {
                return Err(Error::InvalidMetric(format!(
                    "tensor at vertex {i} is not positive definite"
                )));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        match self.d {
            1 => self.validate_typed::<1>(),
            2 => self.validate_typed::<2>(),
            3 => self.validate_typed::<3>(),
            d => Err(Error::UnsupportedDims { m: 0, d }),
        }
    }

    fn bounds_typed<const D: usize>(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.num_vertices() {
            let t = self.tensor::<D>(i);
            lo = lo.min(smallmat::sym_eig_min(&t));
            hi = hi.max(smallmat::sym_eig_max(&t));
        }
        (lo, hi)
    }

    /// `(rho_lower, rho_upper)` such that `rho_lower I <= M_i <= rho_upper I`
    /// holds at every vertex.
    pub fn bounds(&self) -> (f64, f64) {
        match self.d {
            1 => self.bounds_typed::<1>(),
            2 => self.bounds_typed::<2>(),
            3 => self.bounds_typed::<3>(),
            _ => unreachable!(),
        }
    }
}

/// Jacobi passes of vertex-neighbor averaging, used to take the noise out of
/// discrete curvature before it is turned into a metric.
pub fn smooth_vertex_values(mesh: &SimplicialMesh, values: &[f64], passes: usize) -> Vec<f64> {
    let mut current = values.to_vec();
    if passes == 0 {
        return current;
    }
    let nv = mesh.num_vertices();
    let mut neighbors = vec![Vec::new(); nv];
    for &(a, b) in &mesh.edges() {
        neighbors[a].push(b);
        neighbors[b].push(a);
    }
    for _ in 0..passes {
        let mut next = vec![0.0; nv];
        for i in 0..nv {
            let mut acc = current[i];
            for &j in &neighbors[i] {
                acc += current[j];
            }
            next[i] = acc / (neighbors[i].len() + 1) as f64;
        }
        current = next;
    }
    current
}
