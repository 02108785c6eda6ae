//! Closed-form linear algebra for the stack-sized matrices used in the
//! element kernels (n <= 3). Determinants and inverses are explicit, symmetric
//! eigenvalues use the direct quadratic/trigonometric formulas, and SPD matrix
//! square roots go through a dense symmetric eigen-decomposition.

use nalgebra::{DMatrix, SMatrix};

pub fn factorial(n: usize) -> f64 {
    (1..=n).product::<usize>() as f64
}

pub fn det<const N: usize>(a: &SMatrix<f64, N, N>) -> f64 {
    match N {
        1 => a[(0, 0)],
        2 => a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)],
        3 => {
            a[(0, 0)] * (a[(1, 1)] * a[(2, 2)] - a[(1, 2)] * a[(2, 1)])
                - a[(0, 1)] * (a[(1, 0)] * a[(2, 2)] - a[(1, 2)] * a[(2, 0)])
                + a[(0, 2)] * (a[(1, 0)] * a[(2, 1)] - a[(1, 1)] * a[(2, 0)])
        }
        _ => unreachable!("only n <= 3 supported"),
    }
}

/// Inverse by adjugate; `None` when the determinant vanishes.
pub fn inverse<const N: usize>(a: &SMatrix<f64, N, N>) -> Option<SMatrix<f64, N, N>> {
    let d = det(a);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let mut inv = SMatrix::<f64, N, N>::zeros();
    match N {
        1 => inv[(0, 0)] = 1.0 / d,
        2 => {
            inv[(0, 0)] = a[(1, 1)] / d;
            inv[(0, 1)] = -a[(0, 1)] / d;
            inv[(1, 0)] = -a[(1, 0)] / d;
            inv[(1, 1)] = a[(0, 0)] / d;
        }
        3 => {
            for i in 0..3 {
                for j in 0..3 {
                    let (r0, r1) = ((i + 1) % 3, (i + 2) % 3);
                    let (c0, c1) = ((j + 1) % 3, (j + 2) % 3);
                    // cofactor transpose
                    inv[(j, i)] =
                        (a[(r0, c0)] * a[(r1, c1)] - a[(r0, c1)] * a[(r1, c0)]) / d;
                }
            }
        }
        _ => unreachable!("only n <= 3 supported"),
    }
    Some(inv)
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues<const N: usize>(a: &SMatrix<f64, N, N>) -> [f64; 3] {
    let mut out = [0.0f64; 3];
    match N {
        1 => out[0] = a[(0, 0)],
        2 => {
            let tr = a[(0, 0)] + a[(1, 1)];
            let det2 = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
            let disc = (tr * tr / 4.0 - det2).max(0.0).sqrt();
            out[0] = tr / 2.0 - disc;
            out[1] = tr / 2.0 + disc;
        }
        3 => {
            // Smith's trigonometric method
            let p1 = a[(0, 1)] * a[(0, 1)] + a[(0, 2)] * a[(0, 2)] + a[(1, 2)] * a[(1, 2)];
            if p1 == 0.0 {
                let mut ev = [a[(0, 0)], a[(1, 1)], a[(2, 2)]];
                ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
                out.copy_from_slice(&ev);
            } else {
                let q = (a[(0, 0)] + a[(1, 1)] + a[(2, 2)]) / 3.0;
                let p2 = (a[(0, 0)] - q).powi(2)
                    + (a[(1, 1)] - q).powi(2)
                    + (a[(2, 2)] - q).powi(2)
                    + 2.0 * p1;
                let p = (p2 / 6.0).sqrt();
                let mut b = *a;
                for i in 0..3 {
                    b[(i, i)] -= q;
                }
                let r = (det(&b) / 2.0 / p.powi(3)).clamp(-1.0, 1.0);
                let phi = r.acos() / 3.0;
                let e1 = q + 2.0 * p * phi.cos();
                let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
                let e2 = 3.0 * q - e1 - e3;
                out[0] = e3;
                out[1] = e2;
                out[2] = e1;
            }
        }
        _ => unreachable!("only n <= 3 supported"),
    }
    out
}

pub fn sym_eig_min<const N: usize>(a: &SMatrix<f64, N, N>) -> f64 {
    sym_eigenvalues(a)[0]
}

pub fn sym_eig_max<const N: usize>(a: &SMatrix<f64, N, N>) -> f64 {
    sym_eigenvalues(a)[N - 1]
}

pub fn is_symmetric<const N: usize>(a: &SMatrix<f64, N, N>, tol: f64) -> bool {
    let scale = a.amax().max(1e-300);
    for i in 0..N {
        for j in (i + 1)..N {
            if (a[(i, j)] - a[(j, i)]).abs() > tol * scale {
                return false;
            }
        }
    }
    true
}

pub fn is_spd<const N: usize>(a: &SMatrix<f64, N, N>, sym_tol: f64) -> bool {
    is_symmetric(a, sym_tol) && sym_eig_min(a) > 0.0
}

fn sym_power<const N: usize>(a: &SMatrix<f64, N, N>, exp: f64) -> SMatrix<f64, N, N> {
    let dyn_a = DMatrix::from_fn(N, N, |i, j| a[(i, j)]);
    let eig = dyn_a.symmetric_eigen();
    let mut out = SMatrix::<f64, N, N>::zeros();
    for k in 0..N {
        let lk = eig.eigenvalues[k].powf(exp);
        for i in 0..N {
            for j in 0..N {
                out[(i, j)] += lk * eig.eigenvectors[(i, k)] * eig.eigenvectors[(j, k)];
            }
        }
    }
    out
}

/// Symmetric square root of an SPD matrix.
pub fn sqrt_spd<const N: usize>(a: &SMatrix<f64, N, N>) -> SMatrix<f64, N, N> {
    sym_power(a, 0.5)
}

/// Symmetric inverse square root of an SPD matrix.
pub fn inv_sqrt_spd<const N: usize>(a: &SMatrix<f64, N, N>) -> SMatrix<f64, N, N> {
    sym_power(a, -0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{Matrix2, Matrix3};

    #[test]
    fn det_and_inverse_3x3() {
        let a = Matrix3::new(2.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 4.0);
        assert_relative_eq!(det(&a), a.determinant(), max_relative = 1e-14);
        let inv = inverse(&a).unwrap();
        assert_relative_eq!(inv * a, Matrix3::identity(), epsilon = 1e-12);
    }

    #[test]
    fn eigenvalues_match_trace_det() {
        let a = Matrix3::new(4.0, 1.0, 0.3, 1.0, 5.0, 0.7, 0.3, 0.7, 6.0);
        let ev = sym_eigenvalues(&a);
        assert_relative_eq!(ev.iter().sum::<f64>(), a.trace(), max_relative = 1e-12);
        assert_relative_eq!(ev[0] * ev[1] * ev[2], det(&a), max_relative = 1e-10);
        assert!(ev[0] <= ev[1] && ev[1] <= ev[2]);
    }

    #[test]
    fn sqrt_round_trip() {
        let a = Matrix2::new(3.0, 1.0, 1.0, 2.0);
        let s = sqrt_spd(&a);
        assert_relative_eq!(s * s, a, epsilon = 1e-12);
        let isq = inv_sqrt_spd(&a);
        assert_relative_eq!(isq * a * isq, Matrix2::identity(), epsilon = 1e-12);
    }
}
