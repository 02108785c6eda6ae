//! Mesh energy: the equidistribution/alignment functional summed over
//! elements, and its analytic gradient with respect to vertex positions.
//!
//! For an element K with edge matrix E, averaged metric M_K, and reference
//! edge matrix Ehat, the shape operator is J = Ehat (E^T M_K E)^{-1} Ehat^T.
//! Only tr(J) and det(J) enter the energy density, so the kernels work with
//! A = E^T M_K E and B = Ehat^T Ehat directly:
//!
//!   tr(J)  = tr(A^{-1} B),       det(J) = det(Ehat)^2 / det(A).
//!
//! The gradient splits into a shape part (through E) and a metric part
//! (through the vertex average M_K when the nodal tensors are samples of a
//! spatial field). Both come out of one intermediate matrix
//! W = g1 A^{-1} B A^{-1} + g2 det(J) A^{-1}.

use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};
use crate::mesh::SimplicialMesh;
use crate::metric::MetricField;
use crate::simplex::{self, ReferenceElement};
use crate::smallmat;

/// Parameters of the energy density: `p > 1`, `theta` in (0, 1]. The
/// nonsingularity guarantees only hold when `coercive()` is true.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParams {
    pub p: f64,
    pub theta: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        Self { p: 1.5, theta: 1.0 / 3.0 }
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0) {
            return Err(Error::Config(format!("energy exponent p must exceed 1, got {}", self.p)));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::Config(format!(
                "energy weight theta must lie in (0, 1], got {}",
                self.theta
            )));
        }
        Ok(())
    }

    /// The energy is coercive (and the height lower bound valid) only for
    /// theta <= 0.5.
    pub fn coercive(&self) -> bool {
        self.theta <= 0.5
    }

    /// Coercivity exponent q = m p / 2 of the alignment term.
    pub fn coercivity_exponent(&self, m: usize) -> f64 {
        m as f64 * self.p / 2.0
    }
}

/// Energy density
/// `G = theta detJ^{-1/2} trJ^{mp/2} + (1 - 2 theta) m^{mp/2} detJ^{(p-1)/2}`.
pub fn g_value(m: usize, params: &EnergyParams, tr_j: f64, det_j: f64) -> f64 {
    let mf = m as f64;
    let mp2 = mf * params.p / 2.0;
    params.theta * det_j.powf(-0.5) * tr_j.powf(mp2)
        + (1.0 - 2.0 * params.theta) * mf.powf(mp2) * det_j.powf((params.p - 1.0) / 2.0)
}

/// Partial derivatives `(dG/dtrJ, dG/ddetJ)`.
pub fn g_derivatives(m: usize, params: &EnergyParams, tr_j: f64, det_j: f64) -> (f64, f64) {
    let mf = m as f64;
    let mp2 = mf * params.p / 2.0;
    let g1 = params.theta * mp2 * det_j.powf(-0.5) * tr_j.powf(mp2 - 1.0);
    let g2 = -0.5 * params.theta * det_j.powf(-1.5) * tr_j.powf(mp2)
        + 0.5 * (params.p - 1.0) * (1.0 - 2.0 * params.theta) * mf.powf(mp2)
            * det_j.powf((params.p - 3.0) / 2.0);
    (g1, g2)
}

/// `(trJ, detJ, A^{-1})` for one element; fails on degenerate geometry.
pub fn element_jacobian<const M: usize, const D: usize>(
    e: &SMatrix<f64, D, M>,
    metric: &SMatrix<f64, D, D>,
    ref_el: &ReferenceElement<M>,
) -> Result<(f64, f64, SMatrix<f64, M, M>)> {
    let a = e.transpose() * metric * e;
    let det_a = smallmat::det(&a);
    if det_a <= 0.0 || !det_a.is_finite() {
        return Err(Error::DegenerateSimplex { element: usize::MAX });
    }
    let a_inv = smallmat::inverse(&a).ok_or(Error::DegenerateSimplex { element: usize::MAX })?;
    let b = ref_el.edge.transpose() * ref_el.edge;
    let tr_j = (a_inv * b).trace();
    let det_j = ref_el.det * ref_el.det / det_a;
    Ok((tr_j, det_j, a_inv))
}

/// Energy density and gradient rows of one element.
#[derive(Debug, Clone)]
pub struct ElementGradient<const D: usize> {
    /// G evaluated on the element
    pub g: f64,
    /// dG/dx_j for the m+1 vertices, in element vertex order
    pub rows: Vec<SVector<f64, D>>,
}

/// Analytic gradient of G with respect to the element's vertex positions.
///
/// `nodal_metrics` are the per-vertex tensors; the element tensor is their
/// arithmetic average, and the metric part of the gradient treats them as
/// samples of a linearly interpolated spatial field (it is exact for affine
/// fields and drops out for constant ones).
pub fn element_energy_gradient<const M: usize, const D: usize>(
    verts: &[SVector<f64, D>],
    nodal_metrics: &[SMatrix<f64, D, D>],
    ref_el: &ReferenceElement<M>,
    params: &EnergyParams,
) -> Result<ElementGradient<D>> {
    assert_eq!(verts.len(), M + 1);
    assert_eq!(nodal_metrics.len(), M + 1);
    let e = simplex::edge_matrix::<M, D>(verts);
    let mut m_k = SMatrix::<f64, D, D>::zeros();
    for t in nodal_metrics {
        m_k += t;
    }
    m_k /= (M + 1) as f64;

    let (tr_j, det_j, a_inv) = element_jacobian(&e, &m_k, ref_el)?;
    let g = g_value(M, params, tr_j, det_j);
    let (g1, g2) = g_derivatives(M, params, tr_j, det_j);

    let b = ref_el.edge.transpose() * ref_el.edge;
    let w = a_inv * b * a_inv * g1 + a_inv * (g2 * det_j);
    let dg_de = -2.0 * w * e.transpose() * m_k; // M x D, row j-1 is dG/dx_j
    let dg_dm = -(e * w * e.transpose()); // D x D

    // metric part: (1/(m+1)) sum_j tr(dG/dM M_j) grad(phi_j), the same vector
    // for every vertex of the element
    let qv = simplex::pseudo_inverse_q_vectors(&e)?;
    let mut metric_term = SVector::<f64, D>::zeros();
    for j in 0..=M {
        metric_term += qv.q[j] * (dg_dm * nodal_metrics[j]).trace();
    }
    metric_term /= (M + 1) as f64;

    let mut rows = Vec::with_capacity(M + 1);
    rows.push(metric_term);
    for j in 0..M {
        let row = dg_de.row(j).transpose();
        rows[0] -= row;
        rows.push(row + metric_term);
    }
    Ok(ElementGradient { g, rows })
}

/// Energy, per-element densities, and assembled vertex gradient of the mesh.
#[derive(Debug, Clone)]
pub struct EnergyReport {
    /// I_h = (1/N) sum_K G_K
    pub energy: f64,
    /// total metric volume, sum_K |K|_M
    pub sigma_h: f64,
    /// G_K per element
    pub element_values: Vec<f64>,
    /// dI_h/dx, flat Nv x d
    pub gradient: Vec<f64>,
}

fn total_energy_typed<const M: usize, const D: usize>(
    mesh: &SimplicialMesh,
    field: &MetricField,
    params: &EnergyParams,
) -> Result<EnergyReport> {
    let n = mesh.num_elements();
    let nv = mesh.num_vertices();
    let ref_el = simplex::reference_element::<M>(1.0 / n as f64);
    let weight = 1.0 / n as f64;

    let mut energy = 0.0;
    let mut sigma_h = 0.0;
    let mut element_values = Vec::with_capacity(n);
    let mut gradient = vec![0.0; nv * D];

    let mut verts = [SVector::<f64, D>::zeros(); 4];
    let mut metrics = [SMatrix::<f64, D, D>::zeros(); 4];
    for k in 0..n {
        let element = mesh.element(k);
        for (slot, &v) in element.iter().enumerate() {
            verts[slot] = SVector::from_column_slice(mesh.vertex(v));
            metrics[slot] = field.tensor::<D>(v);
        }
        let eg = element_energy_gradient::<M, D>(&verts[..=M], &metrics[..=M], &ref_el, params)
            .map_err(|err| match err {
                Error::DegenerateSimplex { .. } => Error::DegenerateSimplex { element: k },
                other => other,
            })?;
        energy += weight * eg.g;
        element_values.push(eg.g);
        for (slot, &v) in element.iter().enumerate() {
            for c in 0..D {
                gradient[v * D + c] += weight * eg.rows[slot][c];
            }
        }
        let e = simplex::edge_matrix::<M, D>(&verts[..=M]);
        let mut m_k = SMatrix::<f64, D, D>::zeros();
        for t in &metrics[..=M] {
            m_k += t;
        }
        sigma_h += simplex::metric_measure_unchecked(&e, &(m_k / (M + 1) as f64));
    }
    Ok(EnergyReport { energy, sigma_h, element_values, gradient })
}

fn resampled_energy_typed<const M: usize, const D: usize>(
    old: &SimplicialMesh,
    new: &SimplicialMesh,
    field: &MetricField,
    params: &EnergyParams,
) -> Result<f64> {
    let n = old.num_elements();
    let ref_el = simplex::reference_element::<M>(1.0 / n as f64);
    let weight = 1.0 / n as f64;
    let mut energy = 0.0;
    let mut old_verts = [SVector::<f64, D>::zeros(); 4];
    let mut new_verts = [SVector::<f64, D>::zeros(); 4];
    let mut metrics = [SMatrix::<f64, D, D>::zeros(); 4];
    for k in 0..n {
        let element = old.element(k);
        for (slot, &v) in element.iter().enumerate() {
            old_verts[slot] = SVector::from_column_slice(old.vertex(v));
            new_verts[slot] = SVector::from_column_slice(new.vertex(v));
            metrics[slot] = field.tensor::<D>(v);
        }
        let e_old = simplex::edge_matrix::<M, D>(&old_verts[..=M]);
        let qv = simplex::pseudo_inverse_q_vectors(&e_old)
            .map_err(|_| Error::DegenerateSimplex { element: k })?;
        let mut m_k = SMatrix::<f64, D, D>::zeros();
        let mut centroid_shift = SVector::<f64, D>::zeros();
        for slot in 0..=M {
            m_k += metrics[slot];
            centroid_shift += new_verts[slot] - old_verts[slot];
        }
        m_k /= (M + 1) as f64;
        centroid_shift /= (M + 1) as f64;
        for slot in 0..=M {
            m_k += metrics[slot] * qv.q[slot].dot(&centroid_shift);
        }
        if !smallmat::is_spd(&m_k, 1e-10) {
            return Err(Error::DegenerateSimplex { element: k });
        }
        let e_new = simplex::edge_matrix::<M, D>(&new_verts[..=M]);
        let (tr_j, det_j, _) = element_jacobian(&e_new, &m_k, &ref_el)
            .map_err(|_| Error::DegenerateSimplex { element: k })?;
        energy += weight * g_value(M, params, tr_j, det_j);
    }
    Ok(energy)
}

/// I_h of a displaced mesh with the element metric transported along each
/// element's own linear interpolation: `M_K(new) = M_K(old) + sum_j M_j
/// (grad(phi_j) . centroid shift)`. The exact gradient of this functional at
/// zero displacement is the assembled gradient of `total_energy`, so a small
/// step along the negative gradient always lowers it.
pub fn resampled_energy(
    old: &SimplicialMesh,
    new: &SimplicialMesh,
    field: &MetricField,
    params: &EnergyParams,
) -> Result<f64> {
    params.validate()?;
    let energy = dispatch_md!(
        old.elem_dim(),
        old.space_dim(),
        resampled_energy_typed(old, new, field, params)
    )?;
    Ok(energy)
}

/// Assemble I_h and its gradient over the whole mesh. Elements are visited in
/// storage order so the floating-point result is reproducible.
pub fn total_energy(
    mesh: &SimplicialMesh,
    field: &MetricField,
    params: &EnergyParams,
) -> Result<EnergyReport> {
    params.validate()?;
    let report = dispatch_md!(
        mesh.elem_dim(),
        mesh.space_dim(),
        total_energy_typed(mesh, field, params)
    )?;
    Ok(report)
}
