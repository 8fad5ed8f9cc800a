//! One-sided Jacobi SVD with singular-value soft thresholding.

use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 60;

/// Replaces the column-major `m × n` matrix `a` by its soft-thresholded
/// reconstruction `Σ max(sᵢ - τ, 0) uᵢ vᵢᵀ` and returns the retained rank.
pub(crate) fn soft_threshold<T: Scalar>(a: &mut [T], m: usize, n: usize, tau: T) -> usize {
    debug_assert_eq!(a.len(), m * n);
    if m >= n {
        shrink_tall(a, m, n, tau)
    } else {
        let mut t = transpose(a, m, n);
        let rank = shrink_tall(&mut t, n, m, tau);
        a.copy_from_slice(&transpose(&t, n, m));
        rank
    }
}

/// Column-major `m × n` to column-major `n × m`.
fn transpose<T: Scalar>(a: &[T], m: usize, n: usize) -> Vec<T> {
    let mut out = vec![T::zero(); m * n];
    for j in 0..n {
        for i in 0..m {
            out[i * n + j] = a[j * m + i];
        }
    }
    out
}

/// Hestenes iteration on a tall matrix (`m >= n`): rotate column pairs until
/// all columns are mutually orthogonal, so `A·V = U·diag(s)`.
fn shrink_tall<T: Scalar>(a: &mut [T], m: usize, n: usize, tau: T) -> usize {
    let mut w = a.to_vec();
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let eps = T::epsilon();
    let half = T::of(0.5);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let (wi, wj) = column_pair(&mut w, m, i, j);
                let mut alpha = T::zero();
                let mut beta = T::zero();
                let mut gamma = T::zero();
                for (x, y) in wi.iter().zip(wj.iter()) {
                    alpha += *x * *x;
                    beta += *y * *y;
                    gamma += *x * *y;
                }
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) * half / gamma;
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(wi, wj, c, s);
                let (vi, vj) = column_pair(&mut v, n, i, j);
                rotate(vi, vj, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let sv: Vec<T> = (0..n)
        .map(|i| w[i * m..(i + 1) * m].iter().map(|x| *x * *x).sum::<T>().sqrt())
        .collect();
    let s_max = sv.iter().cloned().fold(T::zero(), T::max);
    let floor = s_max * eps * T::of(n as f64);
    let mut rank = 0;
    let factors: Vec<T> = sv
        .iter()
        .map(|&s| {
            if s <= T::zero() {
                return T::zero();
            }
            if s > tau && s > floor {
                rank += 1;
            }
            (s - tau).max(T::zero()) / s
        })
        .collect();

    for col in 0..n {
        let out = &mut a[col * m..(col + 1) * m];
        out.iter_mut().for_each(|x| *x = T::zero());
        for (i, &f) in factors.iter().enumerate() {
            if f == T::zero() {
                continue;
            }
            let coef = f * v[i * n + col];
            for (o, &x) in out.iter_mut().zip(&w[i * m..(i + 1) * m]) {
                *o += coef * x;
            }
        }
    }
    rank
}

fn column_pair<T>(a: &mut [T], rows: usize, i: usize, j: usize) -> (&mut [T], &mut [T]) {
    debug_assert!(i < j);
    let (left, right) = a.split_at_mut(j * rows);
    (&mut left[i * rows..(i + 1) * rows], &mut right[..rows])
}

#[inline]
fn rotate<T: Scalar>(x: &mut [T], y: &mut [T], c: T, s: T) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (p, q) = (*a, *b);
        *a = c * p - s * q;
        *b = s * p + c * q;
    }
}
