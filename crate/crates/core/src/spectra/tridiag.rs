//! Symmetric tridiagonal eigenproblems: Sturm-count bisection for eigenvalues
//! and inverse iteration for eigenvectors.
//!
//! `diag` holds the n diagonal entries, `off` the n − 1 sub/super-diagonal
//! entries.

/// Number of eigenvalues strictly below `x`, from the signs of the LDLᵀ pivots
/// of T − xI.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64, pivot_floor: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let coupling = if i == 0 {
            0.0
        } else {
            off[i - 1] * off[i - 1] / q
        };
        q = diag[i] - x - coupling;
        if q.abs() < pivot_floor {
            q = -pivot_floor;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn pivot_floor(off: &[f64]) -> f64 {
    let max_sq = off.iter().map(|e| e * e).fold(1.0, f64::max);
    f64::MIN_POSITIVE * max_sq
}

fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - left - right);
        hi = hi.max(diag[i] + left + right);
    }
    let pad = f64::EPSILON * lo.abs().max(hi.abs()).max(1.0) * n as f64;
    (lo - pad, hi + pad)
}

/// The `k` smallest eigenvalues in ascending order, each bisected until its
/// bracket is at the level of floating-point resolution.
pub fn lowest_eigenvalues(diag: &[f64], off: &[f64], k: usize) -> Vec<f64> {
    let n = diag.len();
    assert_eq!(off.len() + 1, n, "off-diagonal length must be n - 1");
    assert!(k <= n, "requested {k} eigenvalues of an order-{n} matrix");
    let floor = pivot_floor(off);
    let (g_lo, g_hi) = gershgorin(diag, off);

    let mut values = Vec::with_capacity(k);
    let mut lower = g_lo;
    for index in 0..k {
        // invariant: count(lo) <= index < count(hi)
        let mut lo = lower;
        let mut hi = g_hi;
        for _ in 0..256 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
            if sturm_count(diag, off, mid, floor) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let value = 0.5 * (lo + hi);
        values.push(value);
        lower = lo;
    }
    values
}

/// Solves (T − shift·I)x = rhs by Gaussian elimination with partial pivoting.
/// Zero pivots are replaced by a tiny value, which is what inverse iteration
/// wants near an eigenvalue.
fn shifted_solve(diag: &[f64], off: &[f64], shift: f64, rhs: &mut [f64]) {
    let n = diag.len();
    let tiny = f64::EPSILON
        * diag
            .iter()
            .chain(off)
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1.0);
    // row i after elimination: u0[i]·x[i] + u1[i]·x[i+1] + u2[i]·x[i+2]
    let mut u0 = vec![0.0; n];
    let mut u1 = vec![0.0; n];
    let mut u2 = vec![0.0; n];

    // current working row i: (a, b, c) on columns i, i+1, i+2
    let mut a = diag[0] - shift;
    let mut b = if n > 1 { off[0] } else { 0.0 };
    let mut c = 0.0;
    for i in 0..n {
        if i + 1 < n {
            // next row: (off[i], diag[i+1]-shift, off[i+1])
            let na = off[i];
            let nb = diag[i + 1] - shift;
            let nc = if i + 2 < n { off[i + 1] } else { 0.0 };
            if na.abs() > a.abs() {
                // swap rows i and i+1
                rhs.swap(i, i + 1);
                let factor = a / na;
                u0[i] = na;
                u1[i] = nb;
                u2[i] = nc;
                let r = rhs[i + 1] - factor * rhs[i];
                rhs[i + 1] = r;
                a = b - factor * nb;
                b = c - factor * nc;
            } else {
                if a == 0.0 {
                    a = tiny;
                }
                let factor = na / a;
                u0[i] = a;
                u1[i] = b;
                u2[i] = c;
                rhs[i + 1] -= factor * rhs[i];
                a = nb - factor * b;
                b = nc - factor * c;
            }
            c = 0.0;
        } else {
            if a == 0.0 {
                a = tiny;
            }
            u0[i] = a;
            u1[i] = b;
            u2[i] = c;
        }
    }

    for i in (0..n).rev() {
        let mut s = rhs[i];
        if i + 1 < n {
            s -= u1[i] * rhs[i + 1];
        }
        if i + 2 < n {
            s -= u2[i] * rhs[i + 2];
        }
        rhs[i] = s / u0[i];
    }
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Unit eigenvectors for the given eigenvalues by inverse iteration from a
/// fixed start vector. Vectors belonging to nearby eigenvalues are
/// re-orthogonalized against each other.
pub fn eigenvectors(diag: &[f64], off: &[f64], eigenvalues: &[f64]) -> Vec<Vec<f64>> {
    let n = diag.len();
    let scale = diag
        .iter()
        .chain(off)
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let cluster_gap = 1e-3 * scale;
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(eigenvalues.len());

    for (j, &lambda) in eigenvalues.iter().enumerate() {
        // deterministic, non-symmetric start vector
        let mut v: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * (((i * 7919 + 13) % 1013) as f64 / 1013.0))
            .collect();
        normalize(&mut v);
        for _ in 0..4 {
            shifted_solve(diag, off, lambda, &mut v);
            for (other, &mu) in vectors.iter().zip(eigenvalues.iter()).take(j) {
                if (mu - lambda).abs() < cluster_gap {
                    let dot: f64 = other.iter().zip(&v).map(|(a, b)| a * b).sum();
                    v.iter_mut().zip(other).for_each(|(x, o)| *x -= dot * o);
                }
            }
            normalize(&mut v);
        }
        // sign: first significant component positive
        let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-8 * max) {
            if *first < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
        vectors.push(v);
    }
    vectors
}
