//! Linear-algebra kernel for m-simplexes embedded in R^d: edge matrices,
//! measures, pseudo-inverses and q-vectors, heights, and their Riemannian
//! analogues under an SPD metric tensor.

use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};
use crate::smallmat;

/// Scale-invariant rank test: smallest singular value below this fraction of
/// the largest marks the simplex degenerate.
pub const DEGENERACY_RATIO: f64 = 1e-13;

/// Edge matrix of an m-simplex in R^d: column j is `x_j - x_0`.
pub fn edge_matrix<const M: usize, const D: usize>(
    vertices: &[SVector<f64, D>],
) -> SMatrix<f64, D, M> {
    assert_eq!(vertices.len(), M + 1, "an m-simplex has m+1 vertices");
    SMatrix::<f64, D, M>::from_fn(|i, j| vertices[j + 1][i] - vertices[0][i])
}

/// Singular values of E via the eigenvalues of E^T E.
pub fn singular_values<const M: usize, const D: usize>(e: &SMatrix<f64, D, M>) -> [f64; 3] {
    let gram = e.transpose() * e;
    let mut ev = smallmat::sym_eigenvalues(&gram);
    for v in ev.iter_mut() {
        *v = v.max(0.0).sqrt();
    }
    ev
}

pub fn is_degenerate<const M: usize, const D: usize>(e: &SMatrix<f64, D, M>) -> bool {
    let sv = singular_values(e);
    sv[0] <= DEGENERACY_RATIO * sv[M - 1]
}

/// Euclidean measure |K| = (1/m!) sqrt(det(E^T E)); zero for degenerate input.
pub fn simplex_measure<const M: usize, const D: usize>(e: &SMatrix<f64, D, M>) -> f64 {
    let gram = e.transpose() * e;
    let det = smallmat::det(&gram);
    if det <= 0.0 {
        return 0.0;
    }
    det.sqrt() / smallmat::factorial(M)
}

/// The q-vectors of a simplex: rows of the Moore-Penrose pseudo-inverse of E,
/// plus `q_0 = -sum(q_j)`. Their inverse norms are the simplex heights.
#[derive(Debug, Clone)]
pub struct QVectors<const D: usize> {
    /// q_0 .. q_m
    pub q: Vec<SVector<f64, D>>,
    /// a_j = 1 / ||q_j||
    pub heights: Vec<f64>,
}

impl<const D: usize> QVectors<D> {
    pub fn min_height(&self) -> f64 {
        self.heights.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Pseudo-inverse rows `(E^T E)^{-1} E^T` as q-vectors. These equal the
/// gradients of the Lagrange linear basis functions of the simplex.
pub fn pseudo_inverse_q_vectors<const M: usize, const D: usize>(
    e: &SMatrix<f64, D, M>,
) -> Result<QVectors<D>> {
    if is_degenerate(e) {
        return Err(Error::DegenerateSimplex { element: usize::MAX });
    }
    let gram = e.transpose() * e;
    let gram_inv = smallmat::inverse(&gram).ok_or(Error::DegenerateSimplex { element: usize::MAX })?;
    let pinv = gram_inv * e.transpose(); // M x D
    let mut q = Vec::with_capacity(M + 1);
    q.push(SVector::<f64, D>::zeros());
    for j in 0..M {
        let qj = pinv.row(j).transpose();
        q[0] -= qj;
        q.push(qj);
    }
    let heights = q.iter().map(|v| 1.0 / v.norm()).collect();
    Ok(QVectors { q, heights })
}

fn spd_check<const D: usize>(m: &SMatrix<f64, D, D>) -> Result<()> {
    if !smallmat::is_spd(m, 1e-12) {
        return Err(Error::NotSpd);
    }
    Ok(())
}

/// Measure of K in the metric M: (1/m!) sqrt(det(E^T M E)).
pub fn metric_measure<const M: usize, const D: usize>(
    e: &SMatrix<f64, D, M>,
    metric: &SMatrix<f64, D, D>,
) -> Result<f64> {
    spd_check(metric)?;
    Ok(metric_measure_unchecked(e, metric))
}

pub fn metric_measure_unchecked<const M: usize, const D: usize>(
    e: &SMatrix<f64, D, M>,
    metric: &SMatrix<f64, D, D>,
) -> f64 {
    let a = e.transpose() * metric * e;
    let det = smallmat::det(&a);
    if det <= 0.0 {
        return 0.0;
    }
    det.sqrt() / smallmat::factorial(M)
}

/// q-vectors and altitudes of the mapped simplex `M^{1/2} K`, expressed in
/// the mapped coordinates. For m = d this reduces to `q_{j,M} = M^{-1/2} q_j`,
/// but for embedded simplexes the pseudo-inverse does not commute with the
/// mapping, so the mapped element is formed first.
pub fn metric_q_vectors<const M: usize, const D: usize>(
    e: &SMatrix<f64, D, M>,
    metric: &SMatrix<f64, D, D>,
) -> Result<QVectors<D>> {
    spd_check(metric)?;
    let sqrt = smallmat::sqrt_spd(metric);
    pseudo_inverse_q_vectors(&(sqrt * e))
}

/// Minimum altitude of K in the metric M, `a_{K,M}`.
pub fn min_metric_height<const M: usize, const D: usize>(
    e: &SMatrix<f64, D, M>,
    metric: &SMatrix<f64, D, D>,
) -> Result<f64> {
    Ok(metric_q_vectors(e, metric)?.min_height())
}

/// AM-GM gaps of T = (F')^T M F' and its inverse, with F' = E Ehat^{-1}.
/// Both vanish exactly when K (measured in M) is similar to the reference
/// element, and are nonnegative otherwise.
pub fn similarity_residuals<const M: usize, const D: usize>(
    e: &SMatrix<f64, D, M>,
    ref_edge: &SMatrix<f64, M, M>,
    metric: &SMatrix<f64, D, D>,
) -> Result<(f64, f64)> {
    spd_check(metric)?;
    if is_degenerate(e) {
        return Err(Error::DegenerateSimplex { element: usize::MAX });
    }
    let ref_inv =
        smallmat::inverse(ref_edge).ok_or(Error::DegenerateSimplex { element: usize::MAX })?;
    let f = e * ref_inv;
    let t = f.transpose() * metric * f;
    let t_inv = smallmat::inverse(&t).ok_or(Error::DegenerateSimplex { element: usize::MAX })?;
    let gap = |a: &SMatrix<f64, M, M>| {
        a.trace() / M as f64 - smallmat::det(a).max(0.0).powf(1.0 / M as f64)
    };
    Ok((gap(&t), gap(&t_inv)))
}

/// Regular reference m-simplex scaled to a prescribed measure, with
/// upper-triangular edge matrix.
#[derive(Debug, Clone)]
pub struct ReferenceElement<const M: usize> {
    pub edge: SMatrix<f64, M, M>,
    pub det: f64,
    pub measure: f64,
    /// minimum height (all heights agree on a regular simplex)
    pub a_hat: f64,
    /// diameter = edge length
    pub h_hat: f64,
}

/// `lambda` such that a regular m-simplex with measure 1/N has height
/// `lambda * N^{-1/m}`.
pub fn lambda_coeff(m: usize) -> f64 {
    let mf = m as f64;
    (mf + 1.0).sqrt() * smallmat::factorial(m).powf(1.0 / mf)
        / (mf.sqrt() * (mf + 1.0).powf(1.0 / (2.0 * mf)))
}

pub fn reference_element<const M: usize>(target_measure: f64) -> ReferenceElement<M> {
    assert!((1..=3).contains(&M), "reference element needs m in 1..=3");
    assert!(target_measure > 0.0);
    // unit-edge regular simplex, columns chosen upper-triangular
    let mut edge = SMatrix::<f64, M, M>::zeros();
    match M {
        1 => edge[(0, 0)] = 1.0,
        2 => {
            edge[(0, 0)] = 1.0;
            edge[(0, 1)] = 0.5;
            edge[(1, 1)] = 3.0f64.sqrt() / 2.0;
        }
        3 => {
            edge[(0, 0)] = 1.0;
            edge[(0, 1)] = 0.5;
            edge[(1, 1)] = 3.0f64.sqrt() / 2.0;
            edge[(0, 2)] = 0.5;
            edge[(1, 2)] = 3.0f64.sqrt() / 6.0;
            edge[(2, 2)] = (2.0f64 / 3.0).sqrt();
        }
        _ => unreachable!(),
    }
    let mf = M as f64;
    let unit_measure = (0..M).map(|i| edge[(i, i)]).product::<f64>() / smallmat::factorial(M);
    let scale = (target_measure / unit_measure).powf(1.0 / mf);
    edge *= scale;
    ReferenceElement {
        edge,
        det: smallmat::det(&edge),
        measure: target_measure,
        a_hat: scale * ((mf + 1.0) / (2.0 * mf)).sqrt(),
        h_hat: scale,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix;
    use approx::assert_relative_eq;
    use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

    #[test]
    fn edge_matrix_identity_legs() {
        let verts = [Vector2::new(0.0, 0.0), Vector2::new(1.0, 0.0), Vector2::new(0.0, 1.0)];
        let e = edge_matrix::<2, 2>(&verts);
        assert_eq!(e, Matrix2::identity());
    }

    #[test]
    fn edge_matrix_single_edge() {
        let verts = [Vector3::zeros(), Vector3::new(3.0, 4.0, 0.0)];
        let e = edge_matrix::<1, 3>(&verts);
        assert_eq!(e.column(0), Vector3::new(3.0, 4.0, 0.0).column(0));
    }

    #[test]
    fn edge_matrix_matches_subtraction_on_random_tets() {
        let mut rng = SplitMix::new(7);
        for _ in 0..50 {
            let verts: Vec<Vector3<f64>> =
                (0..4).map(|_| Vector3::from_fn(|_, _| rng.uniform(-1.0, 1.0))).collect();
            let e = edge_matrix::<3, 3>(&verts);
            for j in 0..3 {
                for i in 0..3 {
                    assert_eq!(e[(i, j)], verts[j + 1][i] - verts[0][i]);
                }
            }
        }
    }

    #[test]
    fn measure_345_segment() {
        let e = edge_matrix::<1, 3>(&[Vector3::zeros(), Vector3::new(3.0, 4.0, 0.0)]);
        assert_relative_eq!(simplex_measure(&e), 5.0, max_relative = 1e-14);
    }

    #[test]
    fn measure_right_triangle_in_r3() {
        let e = edge_matrix::<2, 3>(&[Vector3::zeros(), Vector3::x(), Vector3::y()]);
        assert_relative_eq!(simplex_measure(&e), 0.5, max_relative = 1e-14);
    }

    #[test]
    fn measure_matches_cross_product_oracle() {
        let mut rng = SplitMix::new(11);
        for _ in 0..1000 {
            let v: Vec<Vector3<f64>> =
                (0..3).map(|_| Vector3::from_fn(|_, _| rng.uniform(-2.0, 2.0))).collect();
            let e = edge_matrix::<2, 3>(&v);
            let oracle = 0.5 * (v[1] - v[0]).cross(&(v[2] - v[0])).norm();
            assert_relative_eq!(simplex_measure(&e), oracle, max_relative = 1e-12, epsilon = 1e-15);
        }
    }

    #[test]
    fn measure_rotation_invariant_and_det_for_square() {
        let mut rng = SplitMix::new(3);
        for _ in 0..100 {
            let v: Vec<Vector2<f64>> =
                (0..3).map(|_| Vector2::from_fn(|_, _| rng.uniform(-1.0, 1.0))).collect();
            let e = edge_matrix::<2, 2>(&v);
            if simplex_measure(&e) < 1e-2 {
                continue;
            }
            let angle = rng.uniform(0.0, std::f64::consts::TAU);
            let q = Matrix2::new(angle.cos(), -angle.sin(), angle.sin(), angle.cos());
            assert_relative_eq!(
                simplex_measure(&(q * e)),
                simplex_measure(&e),
                max_relative = 1e-12,
                epsilon = 1e-15
            );
            // for m = d the measure is |det E| / m!
            assert_relative_eq!(
                simplex_measure(&e),
                smallmat::det(&e).abs() / 2.0,
                max_relative = 1e-12,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn q_vectors_segment() {
        let len = 2.5;
        let e = edge_matrix::<1, 2>(&[Vector2::zeros(), Vector2::new(len, 0.0)]);
        let qv = pseudo_inverse_q_vectors(&e).unwrap();
        assert_relative_eq!(qv.q[1], Vector2::new(1.0 / len, 0.0), epsilon = 1e-15);
        assert_relative_eq!(qv.q[0], Vector2::new(-1.0 / len, 0.0), epsilon = 1e-15);
        assert_relative_eq!(qv.heights[0], len, max_relative = 1e-14);
        assert_relative_eq!(qv.heights[1], len, max_relative = 1e-14);
    }

    #[test]
    fn q_vectors_unit_right_triangle() {
        let e = edge_matrix::<2, 2>(&[Vector2::zeros(), Vector2::x(), Vector2::y()]);
        let qv = pseudo_inverse_q_vectors(&e).unwrap();
        assert_relative_eq!(qv.q[1], Vector2::new(1.0, 0.0), epsilon = 1e-14);
        assert_relative_eq!(qv.q[2], Vector2::new(0.0, 1.0), epsilon = 1e-14);
        assert_relative_eq!(qv.q[0], Vector2::new(-1.0, -1.0), epsilon = 1e-14);
        assert_relative_eq!(qv.heights[1], 1.0, max_relative = 1e-14);
        assert_relative_eq!(qv.heights[2], 1.0, max_relative = 1e-14);
        assert_relative_eq!(qv.heights[0], 1.0 / 2.0f64.sqrt(), max_relative = 1e-14);
    }

    /// Distance from point p to the plane through three points.
    fn point_plane_distance(p: &Vector3<f64>, a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> f64 {
        let n = (b - a).cross(&(c - a)).normalize();
        (p - a).dot(&n).abs()
    }

    #[test]
    fn heights_equal_point_facet_distance_on_random_tets() {
        let mut rng = SplitMix::new(21);
        let mut checked = 0;
        while checked < 200 {
            let v: Vec<Vector3<f64>> =
                (0..4).map(|_| Vector3::from_fn(|_, _| rng.uniform(-1.0, 1.0))).collect();
            let e = edge_matrix::<3, 3>(&v);
            if simplex_measure(&e) < 1e-3 {
                continue;
            }
            let qv = pseudo_inverse_q_vectors(&e).unwrap();
            for j in 0..4 {
                let others: Vec<&Vector3<f64>> =
                    (0..4).filter(|&k| k != j).map(|k| &v[k]).collect();
                let dist = point_plane_distance(&v[j], others[0], others[1], others[2]);
                assert_relative_eq!(qv.heights[j], dist, max_relative = 1e-10);
                // q_j points from the facet toward x_j
                let centroid = (others[0] + others[1] + others[2]) / 3.0;
                assert!(qv.q[j].dot(&(v[j] - centroid)) > 0.0);
            }
            checked += 1;
        }
    }

    #[test]
    fn q_vectors_orthogonal_to_facet_edges() {
        let mut rng = SplitMix::new(5);
        for _ in 0..100 {
            let v: Vec<Vector3<f64>> =
                (0..3).map(|_| Vector3::from_fn(|_, _| rng.uniform(-1.0, 1.0))).collect();
            let e = edge_matrix::<2, 3>(&v);
            if simplex_measure(&e) < 1e-3 {
                continue;
            }
            let qv = pseudo_inverse_q_vectors(&e).unwrap();
            let scale = e.amax();
            // facet of q_1 is the edge (x_0, x_2); of q_2, (x_0, x_1); of q_0, (x_1, x_2)
            assert!(qv.q[1].dot(&(v[2] - v[0])).abs() <= 1e-10 * scale / qv.heights[1]);
            assert!(qv.q[2].dot(&(v[1] - v[0])).abs() <= 1e-10 * scale / qv.heights[2]);
            assert!(qv.q[0].dot(&(v[2] - v[1])).abs() <= 1e-10 * scale / qv.heights[0]);
        }
    }

    #[test]
    fn degenerate_simplex_rejected() {
        let e = edge_matrix::<2, 2>(&[
            Vector2::zeros(),
            Vector2::new(1.0, 1.0),
            Vector2::new(2.0, 2.0),
        ]);
        assert!(is_degenerate(&e));
        assert!(pseudo_inverse_q_vectors(&e).is_err());
        assert_eq!(simplex_measure(&e), 0.0);
    }

    fn random_spd3(rng: &mut SplitMix) -> Matrix3<f64> {
        let b = Matrix3::from_fn(|_, _| rng.uniform(-1.0, 1.0));
        b.transpose() * b + Matrix3::identity() * rng.uniform(0.1, 1.0)
    }

    #[test]
    fn metric_measure_identity_and_scaling() {
        let mut rng = SplitMix::new(9);
        for _ in 0..50 {
            let v: Vec<Vector3<f64>> =
                (0..3).map(|_| Vector3::from_fn(|_, _| rng.uniform(-1.0, 1.0))).collect();
            let e = edge_matrix::<2, 3>(&v);
            let eye = Matrix3::identity();
            assert_relative_eq!(
                metric_measure(&e, &eye).unwrap(),
                simplex_measure(&e),
                max_relative = 1e-13,
                epsilon = 1e-15
            );
            let c = rng.uniform(0.2, 5.0);
            assert_relative_eq!(
                metric_measure(&e, &(eye * c)).unwrap(),
                c.powf(1.0) * simplex_measure(&e), // c^{m/2} with m = 2
                max_relative = 1e-12,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn metric_measure_matches_sqrt_metric_oracle() {
        let mut rng = SplitMix::new(13);
        for _ in 0..200 {
            let v: Vec<Vector3<f64>> =
                (0..3).map(|_| Vector3::from_fn(|_, _| rng.uniform(-1.0, 1.0))).collect();
            let e = edge_matrix::<2, 3>(&v);
            let m = random_spd3(&mut rng);
            let oracle = simplex_measure(&(smallmat::sqrt_spd(&m) * e));
            assert_relative_eq!(
                metric_measure(&e, &m).unwrap(),
                oracle,
                max_relative = 1e-12,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn metric_measure_rejects_non_spd() {
        let e = edge_matrix::<1, 2>(&[Vector2::zeros(), Vector2::x()]);
        let neg = Matrix2::new(-1.0, 0.0, 0.0, 1.0);
        assert!(matches!(metric_measure(&e, &neg), Err(Error::NotSpd)));
    }

    #[test]
    fn metric_heights_identity_and_scaling() {
        let mut rng = SplitMix::new(17);
        let v: Vec<Vector3<f64>> =
            (0..4).map(|_| Vector3::from_fn(|_, _| rng.uniform(-1.0, 1.0))).collect();
        let e = edge_matrix::<3, 3>(&v);
        let eye = Matrix3::identity();
        let euclid = pseudo_inverse_q_vectors(&e).unwrap();
        let in_metric = metric_q_vectors(&e, &eye).unwrap();
        for j in 0..4 {
            assert_relative_eq!(euclid.heights[j], in_metric.heights[j], max_relative = 1e-12);
        }
        let c = 4.0;
        let scaled = metric_q_vectors(&e, &(eye * c)).unwrap();
        for j in 0..4 {
            assert_relative_eq!(scaled.heights[j], euclid.heights[j] * c.sqrt(), max_relative = 1e-12);
        }
    }

    #[test]
    fn metric_size_lower_bound_in_min_height() {
        // |K|_M >= a_{K,M}^m / (m^{m/2} m!), with the m=2 case |K|_M >= a^2/4
        let mut rng = SplitMix::new(23);
        for _ in 0..1000 {
            let v: Vec<Vector3<f64>> =
                (0..3).map(|_| Vector3::from_fn(|_, _| rng.uniform(-1.0, 1.0))).collect();
            let e = edge_matrix::<2, 3>(&v);
            if simplex_measure(&e) < 1e-4 {
                continue;
            }
            let m = random_spd3(&mut rng);
            let size = metric_measure(&e, &m).unwrap();
            let a = min_metric_height(&e, &m).unwrap();
            assert!(size >= a * a / 4.0 * (1.0 - 1e-12));
        }
    }

    #[test]
    fn similarity_residuals_zero_for_similar() {
        let reference = reference_element::<2>(1.0);
        let mut rng = SplitMix::new(31);
        // embed the reference triangle in R^3, rotate and scale it
        let p0 = Vector3::zeros();
        let p1 = Vector3::new(reference.edge[(0, 0)], reference.edge[(1, 0)], 0.0);
        let p2 = Vector3::new(reference.edge[(0, 1)], reference.edge[(1, 1)], 0.0);
        let eye = Matrix3::identity();
        let congruent = edge_matrix::<2, 3>(&[p0, p1, p2]);
        let (r1, r2) = similarity_residuals(&congruent, &reference.edge, &eye).unwrap();
        assert!(r1.abs() < 1e-12 && r2.abs() < 1e-12);

        for _ in 0..20 {
            let axis = Vector3::from_fn(|_, _| rng.uniform(-1.0, 1.0)).normalize();
            let rot = nalgebra::Rotation3::from_axis_angle(
                &nalgebra::Unit::new_normalize(axis),
                rng.uniform(0.0, std::f64::consts::TAU),
            );
            let s = rng.uniform(0.3, 3.0);
            let e = rot.matrix() * congruent * s;
            let (r1, r2) = similarity_residuals(&e, &reference.edge, &eye).unwrap();
            assert!(r1.abs() < 1e-12 * s * s, "r1 = {r1}");
            assert!(r2.abs() < 1e-12 / (s * s), "r2 = {r2}");
        }
    }

    #[test]
    fn similarity_residual_matches_eigen_gap() {
        let reference = reference_element::<2>(1.0);
        let mut rng = SplitMix::new(37);
        for _ in 0..100 {
            let v: Vec<Vector3<f64>> =
                (0..3).map(|_| Vector3::from_fn(|_, _| rng.uniform(-1.0, 1.0))).collect();
            let e = edge_matrix::<2, 3>(&v);
            if simplex_measure(&e) < 1e-3 {
                continue;
            }
            let m = random_spd3(&mut rng);
            let (r1, _) = similarity_residuals(&e, &reference.edge, &m).unwrap();
            assert!(r1 >= -1e-12);
            // oracle: AM - GM gap of the eigenvalues of T
            let f = e * smallmat::inverse(&reference.edge).unwrap();
            let t = f.transpose() * m * f;
            let ev = smallmat::sym_eigenvalues(&t);
            let am = (ev[0] + ev[1]) / 2.0;
            let gm = (ev[0] * ev[1]).sqrt();
            assert_relative_eq!(r1, am - gm, max_relative = 1e-9, epsilon = 1e-12);
        }
    }

    #[test]
    fn reference_element_unit_segment() {
        let r = reference_element::<1>(1.0);
        assert_relative_eq!(r.edge[(0, 0)], 1.0);
        assert_relative_eq!(r.a_hat, 1.0);
        assert_relative_eq!(r.measure, 1.0);
    }

    #[test]
    fn reference_element_height_matches_lambda() {
        let n = 100.0;
        let r = reference_element::<2>(1.0 / n);
        let lambda = lambda_coeff(2);
        assert_relative_eq!(lambda, 3.0f64.sqrt() * 2.0f64.sqrt() / (2.0f64.sqrt() * 3.0f64.powf(0.25)), max_relative = 1e-14);
        assert_relative_eq!(r.a_hat, lambda * n.powf(-0.5), max_relative = 1e-12);
        for m in 1..=3usize {
            let rr = match m {
                1 => reference_element::<1>(1.0 / n).a_hat,
                2 => reference_element::<2>(1.0 / n).a_hat,
                _ => reference_element::<3>(1.0 / n).a_hat,
            };
            assert_relative_eq!(rr, lambda_coeff(m) * n.powf(-1.0 / m as f64), max_relative = 1e-12);
        }
    }

    #[test]
    fn reference_element_measure_round_trip() {
        let r = reference_element::<3>(1.0);
        assert_relative_eq!(simplex_measure(&r.edge), 1.0, max_relative = 1e-12);
        assert_relative_eq!(r.det / smallmat::factorial(3), 1.0, max_relative = 1e-12);
        // regularity: all edges equal
        let cols: Vec<Vector3<f64>> = (0..3).map(|j| r.edge.column(j).into()).collect();
        let l0 = cols[0].norm();
        for i in 0..3 {
            for j in (i + 1)..3 {
                assert_relative_eq!((cols[i] - cols[j]).norm(), l0, max_relative = 1e-12);
            }
        }
        // height bound from the q-vectors
        let qv = pseudo_inverse_q_vectors(&r.edge).unwrap();
        assert_relative_eq!(qv.min_height(), r.a_hat, max_relative = 1e-12);
    }

    #[test]
    fn pseudo_inverse_is_left_inverse() {
        let mut rng = SplitMix::new(41);
        for _ in 0..100 {
            let v: Vec<Vector3<f64>> =
                (0..3).map(|_| Vector3::from_fn(|_, _| rng.uniform(-1.0, 1.0))).collect();
            let e = edge_matrix::<2, 3>(&v);
            if simplex_measure(&e) < 1e-3 {
                continue;
            }
            let qv = pseudo_inverse_q_vectors(&e).unwrap();
            // E^+ E = I
            for i in 0..2 {
                for j in 0..2 {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    let col: Vector3<f64> = e.column(j).into();
                    let got = qv.q[i + 1].dot(&col);
                    assert_relative_eq!(got, expected, epsilon = 1e-11);
                }
            }
        }
    }

    #[test]
    fn norm_bounds_hold_on_random_simplexes() {
        let mut rng = SplitMix::new(43);
        for _ in 0..200 {
            let v: Vec<Vector3<f64>> =
                (0..4).map(|_| Vector3::from_fn(|_, _| rng.uniform(-1.0, 1.0))).collect();
            let e = edge_matrix::<3, 3>(&v);
            if simplex_measure(&e) < 1e-3 {
                continue;
            }
            let m = 3.0;
            let h: f64 = {
                let mut h = 0.0f64;
                for i in 0..4 {
                    for j in (i + 1)..4 {
                        h = h.max((v[i] - v[j]).norm());
                    }
                }
                h
            };
            let gram = e.transpose() * e;
            let norm = smallmat::sym_eig_max(&gram);
            assert!(h * h / m <= norm * (1.0 + 1e-12));
            assert!(norm <= m * h * h * (1.0 + 1e-12));
            let a = pseudo_inverse_q_vectors(&e).unwrap().min_height();
            let inv_norm = smallmat::sym_eig_max(&smallmat::inverse(&gram).unwrap());
            assert!(1.0 / (m * m * a * a) <= inv_norm * (1.0 + 1e-12));
            assert!(inv_norm <= m / (a * a) * (1.0 + 1e-12));
        }
    }
}
