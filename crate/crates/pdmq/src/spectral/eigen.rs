//! Lowest-k eigenpairs of a symmetric tridiagonal matrix via Sturm-count
//! bisection and inverse iteration. Suited to k << N, which is the regime
//! every solve here lives in.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("inverse iteration failed to converge for eigenvalue index {0}")]
    NoConvergence(usize),
    #[error("requested {k} eigenvalues from a matrix of dimension {n}")]
    TooMany { k: usize, n: usize },
}

/// Number of eigenvalues of (diag, off) strictly below `lambda`,
/// by the standard LDL^T sign-count recurrence.
pub fn sturm_count(diag: &[f64], off: &[f64], lambda: f64) -> usize {
    let n = diag.len();
    let mut count = 0;
    let mut q = diag[0] - lambda;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        if q == 0.0 {
            q = 1e-300;
        }
        q = diag[i] - lambda - off[i - 1] * off[i - 1] / q;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Lowest `k` eigenvalues by bisection on the Gershgorin interval.
pub fn lowest_eigenvalues(diag: &[f64], off: &[f64], k: usize) -> Result<Vec<f64>, EigenError> {
    let n = diag.len();
    if k > n {
        return Err(EigenError::TooMany { k, n });
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 }
            + if i < n - 1 { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let scale = hi.abs().max(lo.abs()).max(1.0);
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let (mut a, mut b) = (lo, hi);
        // shrink using already-found eigenvalues
        if let Some(&prev) = out.last() {
            a = prev;
        }
        for _ in 0..120 {
            let mid = 0.5 * (a + b);
            if sturm_count(diag, off, mid) > j {
                b = mid;
            } else {
                a = mid;
            }
            if b - a <= 1e-15 * scale + f64::EPSILON * mid.abs() {
                break;
            }
        }
        out.push(0.5 * (a + b));
    }
    Ok(out)
}

/// Eigenvector for an isolated eigenvalue by inverse iteration with a
/// partially pivoted tridiagonal LU factorization. Returns a unit vector
/// in the Euclidean norm.
pub fn eigenvector(
    diag: &[f64],
    off: &[f64],
    lambda: f64,
    index: usize,
) -> Result<Vec<f64>, EigenError> {
    let n = diag.len();
    let norm_est = diag
        .iter()
        .map(|d| d.abs())
        .chain(off.iter().map(|e| 2.0 * e.abs()))
        .fold(0.0, f64::max)
        .max(1.0);
    // tiny shift keeps the factorization nonsingular at an exact eigenvalue
    let shift = lambda + 1e-14 * norm_est;

    // LU of (T - shift I) with partial pivoting; band becomes (l, d, u1, u2)
    let mut d: Vec<f64> = diag.iter().map(|v| v - shift).collect();
    let mut u1: Vec<f64> = off.to_vec();
    let mut u2 = vec![0.0; n.saturating_sub(2)];
    let mut l = vec![0.0; n.saturating_sub(1)];
    let mut swapped = vec![false; n.saturating_sub(1)];
    for i in 0..n - 1 {
        let mut sub = off[i];
        if sub.abs() > d[i].abs() {
            // swap rows i, i+1
            swapped[i] = true;
            std::mem::swap(&mut d[i], &mut sub);
            let tmp = u1[i];
            u1[i] = d[i + 1];
            d[i + 1] = tmp;
            if i + 2 < n {
                u2[i] = u1[i + 1];
                u1[i + 1] = 0.0;
            }
        }
        if d[i] == 0.0 {
            d[i] = 1e-300;
        }
        let m = sub / d[i];
        l[i] = m;
        d[i + 1] -= m * u1[i];
        if i + 2 < n {
            u1[i + 1] -= m * u2[i];
        }
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = 1e-300;
    }

    // deterministic random start vector
    let mut rng = ChaCha8Rng::seed_from_u64(0xE16E_5EED ^ index as u64);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let start_norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut v {
        *x /= start_norm;
    }
    let mut converged = false;
    for iter in 0..8 {
        // forward substitution with the recorded pivoting
        let mut w = v.clone();
        for i in 0..n - 1 {
            if swapped[i] {
                w.swap(i, i + 1);
            }
            w[i + 1] -= l[i] * w[i];
        }
        // back substitution
        w[n - 1] /= d[n - 1];
        if n >= 2 {
            w[n - 2] = (w[n - 2] - u1[n - 2] * w[n - 1]) / d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            w[i] = (w[i] - u1[i] * w[i + 1] - u2[i] * w[i + 2]) / d[i];
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let growth = norm;
        for x in &mut w {
            *x /= norm;
        }
        v = w;
        // growth ~ 1/|T v - lambda v|; large growth means convergence.
        // Always take at least two sweeps: the first can show large
        // growth while the iterate is still contaminated.
        if iter >= 1 && growth > 1.0 / (1e-10 * norm_est) {
            converged = true;
            break;
        }
    }
    if !converged {
        // accept if the residual is small anyway
        let res = residual(diag, off, lambda, &v);
        if res > 1e-8 * norm_est {
            return Err(EigenError::NoConvergence(index));
        }
    }
    Ok(v)
}

fn residual(diag: &[f64], off: &[f64], lambda: f64, v: &[f64]) -> f64 {
    let n = v.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let mut r = (diag[i] - lambda) * v[i];
        if i > 0 {
            r += off[i - 1] * v[i - 1];
        }
        if i < n - 1 {
            r += off[i] * v[i + 1];
        }
        worst = worst.max(r.abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Second-difference Laplacian on [0, pi]: discrete eigenvalues are
    /// known in closed form, the continuum limit is n^2.
    fn laplacian(n: usize) -> (Vec<f64>, Vec<f64>, f64) {
        let h = PI / (n + 1) as f64;
        let diag = vec![2.0 / (h * h); n];
        let off = vec![-1.0 / (h * h); n];
        (diag, off, h)
    }

    #[test]
    fn sturm_count_brackets_known_eigenvalues() {
        let (diag, off, h) = laplacian(200);
        // exact discrete eigenvalues: (4/h^2) sin^2(j h / 2)
        let exact = |j: usize| 4.0 / (h * h) * ((j as f64) * h / 2.0).sin().powi(2);
        assert_eq!(sturm_count(&diag, &off, 0.5 * (exact(1) + exact(2))), 1);
        assert_eq!(sturm_count(&diag, &off, exact(5) + 1e-9), 5);
    }

    #[test]
    fn lowest_eigenvalues_match_closed_form() {
        let (diag, off, h) = laplacian(500);
        let vals = lowest_eigenvalues(&diag, &off, 4).unwrap();
        for (j, &v) in vals.iter().enumerate() {
            let exact = 4.0 / (h * h) * ((j + 1) as f64 * h / 2.0).sin().powi(2);
            assert!(
                (v - exact).abs() <= 1e-10 * exact.max(1.0),
                "e_{j} = {v} vs {exact}"
            );
        }
    }

    #[test]
    fn eigenvector_residual_and_nodes() {
        let (diag, off, _) = laplacian(300);
        let vals = lowest_eigenvalues(&diag, &off, 3).unwrap();
        for (j, &lam) in vals.iter().enumerate() {
            let v = eigenvector(&diag, &off, lam, j).unwrap();
            assert!(residual(&diag, &off, lam, &v) < 1e-8);
            let nodes = v.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
            assert_eq!(nodes, j, "eigenvector {j} node count");
        }
    }

    #[test]
    fn rejects_oversized_request() {
        let (diag, off, _) = laplacian(5);
        assert!(matches!(
            lowest_eigenvalues(&diag, &off, 9),
            Err(EigenError::TooMany { .. })
        ));
    }
}
