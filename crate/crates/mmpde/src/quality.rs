//! Mesh quality analytics: per-element equidistribution and alignment
//! measures against the metric, the coercivity lower bound on element
//! heights, and edge-length statistics.

use nalgebra::SVector;

use crate::energy::{self, EnergyParams};
use crate::error::{Error, Result};
use crate::mesh::SimplicialMesh;
use crate::metric::MetricField;
use crate::simplex;
use crate::smallmat;

/// Quality summary of one mesh state under a metric field.
#[derive(Debug, Clone)]
pub struct QualityReport {
    /// per-element N |K|_M / sigma_h; 1 everywhere when equidistributed
    pub eq_values: Vec<f64>,
    pub eq_max: f64,
    pub eq_min: f64,
    /// coefficient of variation of eq_values
    pub eq_cov: f64,
    /// per-element (tr(T)/m) / det(T)^{1/m} with T = F'^T M_K F'; 1 when the
    /// element is similar to the reference element in the metric
    pub ali_values: Vec<f64>,
    /// min over elements of a_{K,M} minus the coercivity lower bound
    pub bound_margin: f64,
    /// min a_{K,M} itself
    pub min_metric_height: f64,
    /// max / min Euclidean edge length
    pub edge_ratio: f64,
    /// I_h of this state, the energy the bound was evaluated from
    pub energy: f64,
}

/// Lower bound on a_{K,M} implied by energy coercivity:
/// `C1 * energy^{-1/(2q-m)} * N^{-2q/(m(2q-m))}` with q = m p / 2,
/// `C1 = (theta lambda^{2q} / (m^{m/2} m!))^{m/(2q-m)}`.
pub fn height_lower_bound(energy: f64, n: usize, m: usize, params: &EnergyParams) -> f64 {
    let mf = m as f64;
    let q = params.coercivity_exponent(m);
    let lambda = simplex::lambda_coeff(m);
    let c1 = (params.theta * lambda.powf(2.0 * q) / (mf.powf(mf / 2.0) * smallmat::factorial(m)))
        .powf(mf / (2.0 * q - mf));
    c1 * energy.powf(-1.0 / (2.0 * q - mf))
        * (n as f64).powf(-2.0 * q / (mf * (2.0 * q - mf)))
}

fn quality_typed<const M: usize, const D: usize>(
    mesh: &SimplicialMesh,
    field: &MetricField,
    params: &EnergyParams,
) -> Result<QualityReport> {
    let n = mesh.num_elements();
    let ref_el = simplex::reference_element::<M>(1.0 / n as f64);
    let ref_inv = smallmat::inverse(&ref_el.edge).expect("reference element is nonsingular");

    let mut verts = [SVector::<f64, D>::zeros(); 4];
    let mut measures = Vec::with_capacity(n);
    let mut ali_values = Vec::with_capacity(n);
    let mut min_height = f64::INFINITY;
    let mut sigma_h = 0.0;
    for k in 0..n {
        let el = mesh.element(k);
        for (slot, &v) in el.iter().enumerate() {
            verts[slot] = SVector::from_column_slice(mesh.vertex(v));
        }
        let e = simplex::edge_matrix::<M, D>(&verts[..=M]);
        let m_k = field.element_average::<D>(el);
        let measure = simplex::metric_measure(&e, &m_k)
            .map_err(|_| Error::DegenerateSimplex { element: k })?;
        sigma_h += measure;
        measures.push(measure);
        let height = simplex::min_metric_height(&e, &m_k)
            .map_err(|_| Error::DegenerateSimplex { element: k })?;
        min_height = min_height.min(height);

        let f = e * ref_inv;
        let t = f.transpose() * m_k * f;
        let det_t = smallmat::det(&t);
        if det_t <= 0.0 {
            return Err(Error::DegenerateSimplex { element: k });
        }
        ali_values.push(t.trace() / M as f64 / det_t.powf(1.0 / M as f64));
    }

    let eq_values: Vec<f64> = measures.iter().map(|&v| n as f64 * v / sigma_h).collect();
    let eq_max = eq_values.iter().cloned().fold(0.0f64, f64::max);
    let eq_min = eq_values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = eq_values.iter().sum::<f64>() / n as f64;
    let var = eq_values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    let eq_cov = var.sqrt() / mean;

    let mut edge_min = f64::INFINITY;
    let mut edge_max = 0.0f64;
    for (a, b) in mesh.edges() {
        let l = mesh.edge_length(a, b);
        edge_min = edge_min.min(l);
        edge_max = edge_max.max(l);
    }

    let energy = energy::total_energy(mesh, field, params)?.energy;
    let bound = height_lower_bound(energy, n, M, params);
    Ok(QualityReport {
        eq_values,
        eq_max,
        eq_min,
        eq_cov,
        ali_values,
        bound_margin: min_height - bound,
        min_metric_height: min_height,
        edge_ratio: edge_max / edge_min,
        energy,
    })
}

/// Full quality report of a mesh under a metric field.
pub fn quality_report(
    mesh: &SimplicialMesh,
    field: &MetricField,
    params: &EnergyParams,
) -> Result<QualityReport> {
    params.validate()?;
    let report = dispatch_md!(
        mesh.elem_dim(),
        mesh.space_dim(),
        quality_typed(mesh, field, params)
    )?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::{self, GeometryKind, GeometrySpec};
    use approx::assert_relative_eq;
    use nalgebra::{Matrix3, Vector3};

    fn circle_mesh(n: usize, seed: u64, amp: f64) -> SimplicialMesh {
        let spec = GeometrySpec::curve(GeometryKind::Circle { r: 1.0 }, n, seed, amp);
        shapes::generate_mesh(&spec).unwrap().0
    }

    #[test]
    fn regular_polygon_is_perfect() {
        let mesh = circle_mesh(64, 0, 0.0);
        let field = MetricField::identity(&mesh);
        let rep = quality_report(&mesh, &field, &EnergyParams::default()).unwrap();
        assert_relative_eq!(rep.eq_max, 1.0, epsilon = 1e-12);
        assert_relative_eq!(rep.eq_min, 1.0, epsilon = 1e-12);
        assert!(rep.eq_cov < 1e-12);
        for a in &rep.ali_values {
            assert_relative_eq!(*a, 1.0, epsilon = 1e-12);
        }
        assert_relative_eq!(rep.edge_ratio, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn alignment_at_least_one_and_margin_nonnegative() {
        for seed in [3u64, 7, 21] {
            let mesh = circle_mesh(80, seed, 0.35);
            let field = MetricField::identity(&mesh);
            let rep = quality_report(&mesh, &field, &EnergyParams::default()).unwrap();
            for a in &rep.ali_values {
                assert!(*a >= 1.0 - 1e-12);
            }
            for e in &rep.eq_values {
                assert!(*e > 0.0);
            }
            assert!(rep.bound_margin >= 0.0, "margin {}", rep.bound_margin);
        }
    }

    #[test]
    fn surface_alignment_detects_similarity() {
        let spec = GeometrySpec::surface(GeometryKind::Hyperboloid, 16, 12, 2, 0.3);
        let (mesh, _) = shapes::generate_mesh(&spec).unwrap();
        let field = MetricField::identity(&mesh);
        let rep = quality_report(&mesh, &field, &EnergyParams::default()).unwrap();
        for a in &rep.ali_values {
            assert!(*a >= 1.0 - 1e-12);
        }
        assert!(rep.eq_cov > 0.0);
        assert!(rep.bound_margin >= 0.0);
    }

    #[test]
    fn invariant_under_rigid_motion() {
        let mesh = circle_mesh(50, 11, 0.3);
        let mut moved_coords = Vec::new();
        let angle = 0.37f64;
        let rot = Matrix3::new(
            angle.cos(), -angle.sin(), 0.0,
            angle.sin(), angle.cos(), 0.0,
            0.0, 0.0, 1.0,
        );
        for i in 0..mesh.num_vertices() {
            let v = mesh.vertex(i);
            let x = rot * Vector3::new(v[0], v[1], 0.0) + Vector3::new(2.0, -5.0, 0.0);
            moved_coords.extend_from_slice(&[x[0], x[1]]);
        }
        let moved = SimplicialMesh::new(1, 2, moved_coords, mesh.elements_flat().to_vec()).unwrap();
        let params = EnergyParams::default();
        let a = quality_report(&mesh, &MetricField::identity(&mesh), &params).unwrap();
        let b = quality_report(&moved, &MetricField::identity(&moved), &params).unwrap();
        assert_relative_eq!(a.eq_cov, b.eq_cov, epsilon = 1e-10);
        assert_relative_eq!(a.edge_ratio, b.edge_ratio, epsilon = 1e-10);
        assert_relative_eq!(a.bound_margin, b.bound_margin, epsilon = 1e-10);
    }

    #[test]
    fn degenerate_element_reported() {
        // repeated vertex collapses the second segment
        let coords = vec![0.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        let elems = vec![0, 1, 1, 2];
        let mesh = SimplicialMesh::new(1, 2, coords, elems).unwrap();
        let field = MetricField::identity(&mesh);
        match quality_report(&mesh, &field, &EnergyParams::default()) {
            Err(Error::DegenerateSimplex { element }) => assert_eq!(element, 1),
            other => panic!("expected degenerate element, got {other:?}"),
        }
    }
}
