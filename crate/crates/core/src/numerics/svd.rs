//! One-sided (Hestenes) Jacobi SVD and the decompositions built on it.
//!
//! The tall case rotates column pairs of a working copy of `A` until all
//! columns are mutually orthogonal; the accumulated rotations form `V` and
//! the normalized columns form the leading block of `U`. Wide inputs are
//! decomposed through their transpose.

use super::matrix::{dot, Matrix};
use crate::{Error, Result};

/// Maximum number of full sweeps before giving up.
pub const MAX_SWEEPS: usize = 60;

/// Pairs whose cosine falls below this are treated as already orthogonal.
const ROTATION_TOL: f64 = 1e-12;

/// Full singular value decomposition `a = u · diag(s) · vᵀ`.
///
/// `u` is `rows × rows`, `v` is `cols × cols`, and `s` holds the
/// `min(rows, cols)` singular values in non-increasing order.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

impl SvdResult {
    /// Rebuilds `u · diag(s) · vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        let mut out = vec![0.0; m * n];
        for (k, &sk) in self.s.iter().enumerate() {
            if sk == 0.0 {
                continue;
            }
            for i in 0..m {
                let uik = self.u.get(i, k) * sk;
                let row = &mut out[i * n..(i + 1) * n];
                for (j, o) in row.iter_mut().enumerate() {
                    *o += uik * self.v.get(j, k);
                }
            }
        }
        Matrix::from_raw(m, n, out)
    }

    /// Singular values counted as non-zero under the `max(rows, cols)·ε·σ_max` cutoff.
    pub fn rank(&self) -> usize {
        let cutoff = self.cutoff();
        self.s.iter().filter(|&&x| x > cutoff).count()
    }

    fn cutoff(&self) -> f64 {
        let smax = self.s.first().copied().unwrap_or(0.0);
        self.u.rows().max(self.v.rows()) as f64 * f64::EPSILON * smax
    }
}

/// Full SVD via one-sided Jacobi, deterministic for a given input.
///
/// Sign convention: the largest-magnitude entry of each column of `u` is
/// non-negative (first such entry on ties); the matching column of `v` is
/// flipped alongside.
pub fn svd_full(a: &Matrix) -> Result<SvdResult> {
    let mut svd = if a.rows() >= a.cols() {
        tall_svd(a)?
    } else {
        let t = tall_svd(&a.transpose())?;
        SvdResult { u: t.v, s: t.s, v: t.u }
    };
    canonicalize_signs(&mut svd);
    Ok(svd)
}

fn tall_svd(a: &Matrix) -> Result<SvdResult> {
    let (m, n) = a.shape();
    debug_assert!(m >= n);

    // Column-major working copies: `work` holds A·V, `vcols` holds V.
    let mut work: Vec<f64> = a.transpose().into_vec();
    let mut vcols: Vec<f64> = Matrix::identity(n).into_vec();

    let mut converged = n < 2;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps });
        }
        sweeps += 1;
        converged = true;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (cp, cq) = column_pair(&mut work, m, p, q);
                let alpha = dot(cp, cp);
                let beta = dot(cq, cq);
                let gamma = dot(cp, cq);
                if gamma.abs() <= ROTATION_TOL * (alpha * beta).sqrt() || gamma.abs() < f64::MIN_POSITIVE {
                    continue;
                }
                converged = false;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(cp, cq, c, s);
                let (vp, vq) = column_pair(&mut vcols, n, p, q);
                rotate(vp, vq, c, s);
            }
        }
    }

    let norms: Vec<f64> = work.chunks(m).map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let s: Vec<f64> = order.iter().map(|&k| norms[k]).collect();
    let smax = s.first().copied().unwrap_or(0.0);
    let cutoff = m as f64 * f64::EPSILON * smax;

    let mut ucols: Vec<Vec<f64>> = Vec::with_capacity(m);
    for &k in &order {
        if norms[k] > cutoff && norms[k] > 0.0 {
            let inv = 1.0 / norms[k];
            ucols.push(work[k * m..(k + 1) * m].iter().map(|x| x * inv).collect());
        }
    }
    complete_basis(&mut ucols, m);

    let u = Matrix::from_fn(m, m, |i, j| ucols[j][i])?;
    let v = Matrix::from_fn(n, n, |i, j| vcols[order[j] * n + i])?;
    Ok(SvdResult { u, s, v })
}

fn column_pair(buf: &mut [f64], len: usize, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert!(p < q);
    let (head, tail) = buf.split_at_mut(q * len);
    (&mut head[p * len..(p + 1) * len], &mut tail[..len])
}

#[inline]
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (xa, yb) = (*a, *b);
        *a = c * xa - s * yb;
        *b = s * xa + c * yb;
    }
}

/// Extends an orthonormal set of `dim`-vectors to a full basis, greedily taking
/// the standard basis vector with the largest residual each time.
fn complete_basis(cols: &mut Vec<Vec<f64>>, dim: usize) {
    while cols.len() < dim {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for e in 0..dim {
            let mut w = vec![0.0; dim];
            w[e] = 1.0;
            // two passes of classical Gram-Schmidt
            for _ in 0..2 {
                for c in cols.iter() {
                    let proj = dot(c, &w);
                    for (wi, ci) in w.iter_mut().zip(c) {
                        *wi -= proj * ci;
                    }
                }
            }
            let norm = dot(&w, &w).sqrt();
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, w));
            }
        }
        let (norm, mut w) = best.expect("dim > 0");
        w.iter_mut().for_each(|x| *x /= norm);
        cols.push(w);
    }
}

fn canonicalize_signs(svd: &mut SvdResult) {
    let k = svd.s.len();
    let (m, n) = (svd.u.rows(), svd.v.rows());
    for j in 0..m {
        let mut pivot = 0;
        for i in 1..m {
            if svd.u.get(i, j).abs() > svd.u.get(pivot, j).abs() {
                pivot = i;
            }
        }
        if svd.u.get(pivot, j) < 0.0 {
            for i in 0..m {
                svd.u.set(i, j, -svd.u.get(i, j));
            }
            if j < k {
                for i in 0..n {
                    svd.v.set(i, j, -svd.v.get(i, j));
                }
            }
        }
    }
}

/// Moore–Penrose pseudo-inverse; singular values at or below
/// `max(rows, cols)·ε·σ_max` are treated as zero.
pub fn pinv(a: &Matrix) -> Result<Matrix> {
    let svd = svd_full(a)?;
    let (m, n) = a.shape();
    let rank = svd.rank();
    let mut out = vec![0.0; n * m];
    for k in 0..rank {
        let inv = 1.0 / svd.s[k];
        for i in 0..n {
            let vik = svd.v.get(i, k) * inv;
            let row = &mut out[i * m..(i + 1) * m];
            for (j, o) in row.iter_mut().enumerate() {
                *o += vik * svd.u.get(j, k);
            }
        }
    }
    Matrix::checked(n, m, out, "pinv")
}

/// Orthogonal polar factor `U_thin · V_thinᵀ`: same shape as `a`, every
/// singular value equal to one.
pub fn orthogonal_factor(a: &Matrix) -> Result<Matrix> {
    let svd = svd_full(a)?;
    let (m, n) = a.shape();
    let k = m.min(n);
    let mut out = vec![0.0; m * n];
    for l in 0..k {
        for i in 0..m {
            let uil = svd.u.get(i, l);
            let row = &mut out[i * n..(i + 1) * n];
            for (j, o) in row.iter_mut().enumerate() {
                *o += uil * svd.v.get(j, l);
            }
        }
    }
    Matrix::checked(m, n, out, "orthogonal_factor")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{gaussian_matrix, seeded_rng};

    fn gram_error(q: &Matrix) -> f64 {
        let g = q.transpose().matmul(q).unwrap();
        g.max_abs_diff(&Matrix::identity(q.cols())).unwrap()
    }

    #[test]
    fn diagonal_input() {
        let a = Matrix::diag(&[3.0, 1.0]).unwrap();
        let svd = svd_full(&a).unwrap();
        assert_eq!(svd.s, vec![3.0, 1.0]);
        assert!(svd.u.max_abs_diff(&Matrix::identity(2)).unwrap() < 1e-15);
        assert!(svd.v.max_abs_diff(&Matrix::identity(2)).unwrap() < 1e-15);
    }

    #[test]
    fn ascending_diagonal_is_sorted() {
        let a = Matrix::diag(&[0.5, 2.0, 1.0]).unwrap();
        let svd = svd_full(&a).unwrap();
        assert_eq!(svd.s, vec![2.0, 1.0, 0.5]);
        assert!(svd.reconstruct().max_abs_diff(&a).unwrap() < 1e-15);
    }

    #[test]
    fn zero_matrix() {
        let a = Matrix::zeros(4, 2);
        let svd = svd_full(&a).unwrap();
        assert_eq!(svd.s, vec![0.0, 0.0]);
        assert!(gram_error(&svd.u) < 1e-15);
        assert!(gram_error(&svd.v) < 1e-15);
        assert_eq!(svd.rank(), 0);
    }

    #[test]
    fn random_tall_reconstructs() {
        let mut rng = seeded_rng(11);
        let a = gaussian_matrix(30, 20, 1.0, &mut rng).unwrap();
        let svd = svd_full(&a).unwrap();
        let err = svd.reconstruct().sub(&a).unwrap().frobenius_norm() / a.frobenius_norm();
        assert!(err <= 1e-10, "relative error {err}");
        assert!(gram_error(&svd.u) <= 1e-10);
        assert!(gram_error(&svd.v) <= 1e-10);
        assert!(svd.s.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn sign_convention_holds() {
        let mut rng = seeded_rng(3);
        let a = gaussian_matrix(5, 8, 1.0, &mut rng).unwrap();
        let svd = svd_full(&a).unwrap();
        for j in 0..svd.u.cols() {
            let col = svd.u.column(j);
            let pivot = col
                .iter()
                .copied()
                .fold(0.0_f64, |b, x| if x.abs() > b.abs() { x } else { b });
            assert!(pivot >= 0.0);
        }
        let err = svd.reconstruct().max_abs_diff(&a).unwrap();
        assert!(err < 1e-12);
    }

    #[test]
    fn deterministic() {
        let mut rng = seeded_rng(8);
        let a = gaussian_matrix(9, 6, 1.0, &mut rng).unwrap();
        let x = svd_full(&a).unwrap();
        let y = svd_full(&a).unwrap();
        assert_eq!(x.u, y.u);
        assert_eq!(x.v, y.v);
        assert_eq!(x.s, y.s);
    }

    #[test]
    fn pinv_of_diagonal() {
        let a = Matrix::from_rows(&[[2.0, 0.0], [0.0, 4.0]]).unwrap();
        let p = pinv(&a).unwrap();
        let want = Matrix::from_rows(&[[0.5, 0.0], [0.0, 0.25]]).unwrap();
        assert!(p.max_abs_diff(&want).unwrap() < 1e-15);
    }

    #[test]
    fn pinv_of_rank_one() {
        let a = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        let p = pinv(&a).unwrap();
        let want = Matrix::from_rows(&[[0.25, 0.25], [0.25, 0.25]]).unwrap();
        assert!(p.max_abs_diff(&want).unwrap() < 1e-15);
    }

    #[test]
    fn polar_factor_of_positive_diagonal_is_identity() {
        let a = Matrix::diag(&[5.0, 0.2]).unwrap();
        let q = orthogonal_factor(&a).unwrap();
        assert!(q.max_abs_diff(&Matrix::identity(2)).unwrap() < 1e-15);
    }

    #[test]
    fn polar_factor_fixes_orthogonal_input() {
        let mut rng = seeded_rng(2);
        let q = orthogonal_factor(&gaussian_matrix(6, 6, 1.0, &mut rng).unwrap()).unwrap();
        let again = orthogonal_factor(&q).unwrap();
        assert!(again.max_abs_diff(&q).unwrap() < 1e-10);
    }
}
