//! Thin wrappers over the LAPACK-backed dense solvers plus the two iterative
//! kernels the spectral routines lean on: a shift-invert eigenpair solver
//! (with left vectors, for analytic eigenvalue derivatives) and an
//! LU-based smallest-singular-value estimator with an exact SVD fallback.

use crate::error::{Error, Result};
use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, EigVals, EigValsh, Factorize, Solve, UPLO, SVD};
use num_complex::Complex64;

/// All eigenvalues of a general complex matrix (zgeev, no vectors).
pub fn eigenvalues(a: &Array2<Complex64>) -> Result<Vec<Complex64>> {
    Ok(a.eigvals()?.to_vec())
}

/// Eigenvalues and right eigenvectors (columns).
pub fn eigen_pairs(a: &Array2<Complex64>) -> Result<(Vec<Complex64>, Array2<Complex64>)> {
    let (vals, vecs) = a.eig()?;
    Ok((vals.to_vec(), vecs))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &Array2<Complex64>) -> Result<Vec<f64>> {
    Ok(a.eigvalsh(UPLO::Lower)?.to_vec())
}

/// Singular values, descending (LAPACK order).
pub fn singular_values(a: &Array2<Complex64>) -> Result<Vec<f64>> {
    let (_, s, _) = a.svd(false, false)?;
    Ok(s.to_vec())
}

/// Smallest singular value together with its right singular vector and the
/// second-smallest singular value.
pub fn smallest_singular_triplet(
    a: &Array2<Complex64>,
) -> Result<(f64, Array1<Complex64>, f64)> {
    let (_, s, vt) = a.svd(false, true)?;
    let vt = vt.expect("requested VT");
    let n = s.len();
    let sigma_min = s[n - 1];
    let sigma_second = s[n - 2];
    // A = U Σ V^H; rows of VT are v_i^H, so v_min = conj of the last row.
    let v = vt.row(n - 1).mapv(|z| z.conj());
    Ok((sigma_min, v.to_owned(), sigma_second))
}

/// Deterministic pseudo-random unit vector (fixed phases, no RNG state).
fn seeded_unit(n: usize, salt: u64) -> Array1<Complex64> {
    let mut v = Array1::zeros(n);
    for i in 0..n {
        let t = (i as f64 + 1.0) * 0.618_033_988_749_894 + salt as f64 * 0.414_213_562_373_095;
        v[i] = Complex64::new((2.3 * t).sin(), (1.7 * t).cos());
    }
    let norm = v.iter().map(|z: &Complex64| z.norm_sqr()).sum::<f64>().sqrt();
    v.mapv_into(|z| z / norm)
}

/// Smallest singular value via inverse power iteration on (A^H A)^{-1}
/// using one LU factorization of A. Falls back to a full SVD when the
/// iteration stalls or the factorization fails.
pub fn sigma_min_fast(a: &Array2<Complex64>, rel_tol: f64, max_iters: usize) -> Result<f64> {
    let lu = match a.factorize() {
        Ok(lu) => lu,
        Err(_) => {
            let s = singular_values(a)?;
            return Ok(*s.last().unwrap());
        }
    };
    let n = a.nrows();
    let mut x = seeded_unit(n, 1);
    let mut rho_prev = f64::INFINITY;
    for it in 0..max_iters {
        // y = A^{-1} A^{-H} x
        let u = match lu.solve_h(&x) {
            Ok(u) => u,
            Err(_) => break,
        };
        let y = match lu.solve(&u) {
            Ok(y) => y,
            Err(_) => break,
        };
        let rho = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !rho.is_finite() || rho == 0.0 {
            break;
        }
        let sigma = 1.0 / rho.sqrt();
        if it > 0 && (rho - rho_prev).abs() <= rel_tol * rho {
            return Ok(sigma);
        }
        rho_prev = rho;
        x = y.mapv(|z| z / rho);
        if it == max_iters - 1 {
            return Ok(sigma);
        }
    }
    let s = singular_values(a)?;
    Ok(*s.last().unwrap())
}

/// Converged eigenpair nearest to an anchor, with the left eigenvector.
#[derive(Debug, Clone)]
pub struct NearestEigen {
    pub value: Complex64,
    /// Second Ritz value of the two-dimensional shift-invert subspace; a
    /// coarse estimate of the next-nearest eigenvalue.
    pub second: Complex64,
    pub right: Array1<Complex64>,
    pub left: Array1<Complex64>,
}

fn dot_h(a: &Array1<Complex64>, b: &Array1<Complex64>) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

fn normalize(v: &mut Array1<Complex64>) -> f64 {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        v.mapv_inplace(|z| z / n);
    }
    n
}

/// Eigenvalues of a 2x2 complex matrix.
fn eig2(h: [[Complex64; 2]; 2]) -> (Complex64, Complex64) {
    let tr = h[0][0] + h[1][1];
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    let disc = (tr * tr - 4.0 * det).sqrt();
    ((tr + disc) / 2.0, (tr - disc) / 2.0)
}

/// Shift-invert block iteration (block size 2) around `anchor`. Returns the
/// converged nearest eigenpair; falls back to the dense eigensolver when the
/// iteration does not settle.
pub fn nearest_eigenpair(t: &Array2<Complex64>, anchor: Complex64) -> Result<NearestEigen> {
    let n = t.nrows();
    let mut shifted = t.clone();
    let mut shift = anchor;
    for attempt in 0..2 {
        for i in 0..n {
            shifted[[i, i]] = t[[i, i]] - shift;
        }
        if let Ok(lu) = shifted.factorize() {
            let mut v0 = seeded_unit(n, 2);
            let mut v1 = seeded_unit(n, 3);
            let mut mu_prev = Complex64::new(f64::INFINITY, 0.0);
            for _it in 0..80 {
                let s0 = lu.solve(&v0);
                let s1 = lu.solve(&v1);
                let (mut y0, mut y1) = match (s0, s1) {
                    (Ok(a), Ok(b)) => (a, b),
                    _ => break,
                };
                if normalize(&mut y0) == 0.0 {
                    break;
                }
                let proj = dot_h(&y0, &y1);
                y1 = &y1 - &y0.mapv(|z| z * proj);
                if normalize(&mut y1) < 1e-14 {
                    y1 = seeded_unit(n, 5);
                    let proj = dot_h(&y0, &y1);
                    y1 = &y1 - &y0.mapv(|z| z * proj);
                    normalize(&mut y1);
                }
                // project T onto span{y0, y1}
                let ty0 = t.dot(&y0);
                let ty1 = t.dot(&y1);
                let h = [
                    [dot_h(&y0, &ty0), dot_h(&y0, &ty1)],
                    [dot_h(&y1, &ty0), dot_h(&y1, &ty1)],
                ];
                let (mu_a, mu_b) = eig2(h);
                let (mu, mu2) = if (mu_a - shift).norm() <= (mu_b - shift).norm() {
                    (mu_a, mu_b)
                } else {
                    (mu_b, mu_a)
                };
                v0 = y0.clone();
                v1 = y1.clone();
                if (mu - mu_prev).norm() <= 1e-13 * (1.0 + mu.norm()) {
                    // Ritz vector for mu from the 2x2 problem
                    let (a, b) = ritz_weights(h, mu);
                    let mut right = y0.mapv(|z| z * a) + y1.mapv(|z| z * b);
                    normalize(&mut right);
                    // residual check on the Ritz pair
                    let res = (&t.dot(&right) - &right.mapv(|z| z * mu))
                        .iter()
                        .map(|z| z.norm_sqr())
                        .sum::<f64>()
                        .sqrt();
                    if res > 1e-9 * (1.0 + mu.norm()) {
                        break;
                    }
                    let left = left_vector(&lu, t, mu, n)?;
                    return Ok(NearestEigen {
                        value: mu,
                        second: mu2,
                        right,
                        left,
                    });
                }
                mu_prev = mu;
            }
        }
        // retry once with the anchor nudged off an exact eigenvalue
        shift += Complex64::new(1e-10, 1e-10) * (1.0 + shift.norm());
        let _ = attempt;
    }
    dense_nearest(t, anchor)
}

fn ritz_weights(h: [[Complex64; 2]; 2], mu: Complex64) -> (Complex64, Complex64) {
    // (H - mu) w = 0 for the 2x2 projection
    let r0 = (h[0][0] - mu, h[0][1]);
    let r1 = (h[1][0], h[1][1] - mu);
    if r0.0.norm() + r0.1.norm() >= r1.0.norm() + r1.1.norm() && r0.1.norm() > 0.0 {
        (Complex64::new(1.0, 0.0), -r0.0 / r0.1)
    } else if r1.0.norm() > 0.0 {
        (-r1.1 / r1.0, Complex64::new(1.0, 0.0))
    } else {
        (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }
}

fn left_vector(
    lu: &ndarray_linalg::solve::LUFactorized<ndarray::OwnedRepr<Complex64>>,
    t: &Array2<Complex64>,
    mu: Complex64,
    n: usize,
) -> Result<Array1<Complex64>> {
    // left eigenvector: T^H w = conj(mu) w; shift-invert with (T - shift)^H
    let mut w = seeded_unit(n, 7);
    for _ in 0..60 {
        let mut y = lu
            .solve_h(&w)
            .map_err(|e| Error::Linalg(e.to_string()))?;
        if normalize(&mut y) == 0.0 {
            break;
        }
        let res = (&t.t().mapv(|z| z.conj()).dot(&y) - &y.mapv(|z| z * mu.conj()))
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        w = y;
        if res < 1e-11 * (1.0 + mu.norm()) {
            break;
        }
    }
    Ok(w)
}

/// Dense fallback: full eigendecomposition, pick nearest to anchor.
fn dense_nearest(t: &Array2<Complex64>, anchor: Complex64) -> Result<NearestEigen> {
    let (vals, vecs) = eigen_pairs(t)?;
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&i, &j| {
        (vals[i] - anchor)
            .norm()
            .partial_cmp(&(vals[j] - anchor).norm())
            .unwrap()
    });
    let i0 = order[0];
    let mu = vals[i0];
    let right = vecs.column(i0).to_owned();
    // left eigenvector via one shift-invert pass on T^H
    let n = t.nrows();
    let mut shifted = t.clone();
    for i in 0..n {
        shifted[[i, i]] = t[[i, i]] - mu * (1.0 + 1e-12) - Complex64::new(1e-13, 0.0);
    }
    let left = match shifted.factorize() {
        Ok(lu) => left_vector(&lu, t, mu, n)?,
        Err(_) => right.mapv(|z| z.conj()),
    };
    Ok(NearestEigen {
        value: mu,
        second: vals[order[1]],
        right,
        left,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn test_matrix(n: usize) -> Array2<Complex64> {
        let mut a = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                a[[i, j]] = Complex64::new(
                    ((i * 3 + j) as f64 * 0.41).sin(),
                    ((i as f64) - 0.7 * j as f64).cos() * 0.3,
                ) / (1.0 + (i as f64 - j as f64).abs());
            }
        }
        a
    }

    #[test]
    fn sigma_min_fast_matches_svd() {
        let a = test_matrix(60);
        let exact = *singular_values(&a).unwrap().last().unwrap();
        let fast = sigma_min_fast(&a, 1e-10, 80).unwrap();
        assert_abs_diff_eq!(fast, exact, epsilon = 1e-8 * (1.0 + exact));
    }

    #[test]
    fn nearest_eigenpair_agrees_with_dense() {
        let a = test_matrix(40);
        let vals = eigenvalues(&a).unwrap();
        let target = vals[7];
        let anchor = target + Complex64::new(3e-3, -2e-3);
        let got = nearest_eigenpair(&a, anchor).unwrap();
        assert!((got.value - target).norm() < 1e-10 * (1.0 + target.norm()));
        // right residual
        let res = (&a.dot(&got.right) - &got.right.mapv(|z| z * got.value))
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(res < 1e-9);
        // left residual: T^H w = conj(mu) w
        let res_l = (&a.t().mapv(|z| z.conj()).dot(&got.left)
            - &got.left.mapv(|z| z * got.value.conj()))
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(res_l < 1e-8, "left residual {res_l:.2e}");
    }

    #[test]
    fn smallest_singular_vector_is_near_kernel() {
        let mut a = test_matrix(30);
        // make the matrix nearly singular
        let (_, _, vt) = a.svd(false, true).unwrap();
        let v = vt.unwrap().row(29).mapv(|z| z.conj()).to_owned();
        let av = a.dot(&v);
        for i in 0..30 {
            for j in 0..30 {
                a[[i, j]] -= av[i] * v[j].conj() * 0.999;
            }
        }
        let (smin, vmin, s2) = smallest_singular_triplet(&a).unwrap();
        let res = a.dot(&vmin).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(res < smin + 1e-10);
        assert!(s2 >= smin);
    }
}
