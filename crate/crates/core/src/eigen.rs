//! Eigenvalue tools for the pencil `(A, M)` with `A` a [`StarMatrix`] and
//! `M` diagonal positive: inertia counts, bisection, shift-invert subspace
//! iteration and a small dense Jacobi solver for Rayleigh–Ritz.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::star_matrix::StarMatrix;

/// `A - sigma M` with diagonal `M`.
pub fn shifted<T: Real>(a: &StarMatrix<T>, mass: &[T], sigma: T) -> StarMatrix<T> {
    let mut s = a.clone();
    s.vertex -= sigma * mass[0];
    let mut offset = 1;
    for br in s.branches.iter_mut() {
        for d in br.diag.iter_mut() {
            *d -= sigma * mass[offset];
            offset += 1;
        }
    }
    s
}

/// Number of pencil eigenvalues strictly below `sigma` (Sylvester inertia of
/// `A - sigma M`).
pub fn count_below<T: Real>(a: &StarMatrix<T>, mass: &[T], sigma: T) -> Result<usize> {
    Ok(shifted(a, mass, sigma).factor()?.inertia().negative)
}

/// Interval containing every pencil eigenvalue (Gershgorin on `M^{-1/2} A M^{-1/2}`).
pub fn spectral_bounds<T: Real>(a: &StarMatrix<T>, mass: &[T]) -> (T, T) {
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    let mut push = |centre: T, radius: T| {
        lo = lo.min(centre - radius);
        hi = hi.max(centre + radius);
    };
    let sv = mass[0].sqrt();
    let mut vertex_radius = T::zero();
    let mut offset = 1;
    for br in &a.branches {
        let n = br.diag.len();
        for i in 0..n {
            let si = mass[offset + i].sqrt();
            let mut r = T::zero();
            if i == 0 {
                r += br.coupling.abs() / (si * sv);
                vertex_radius += br.coupling.abs() / (si * sv);
            } else {
                r += br.off[i - 1].abs() / (si * mass[offset + i - 1].sqrt());
            }
            if i + 1 < n {
                r += br.off[i].abs() / (si * mass[offset + i + 1].sqrt());
            }
            push(br.diag[i] / mass[offset + i], r);
        }
        offset += n;
    }
    push(a.vertex / mass[0], vertex_radius);
    (lo, hi)
}

/// The `index`-th smallest pencil eigenvalue (0-based) by inertia bisection.
pub fn eigenvalue_by_bisection<T: Real>(a: &StarMatrix<T>, mass: &[T], index: usize, tol: T) -> Result<T> {
    if index >= a.dim() {
        return Err(Error::Dimension(format!("eigenvalue index {index} out of range")));
    }
    let (mut lo, mut hi) = spectral_bounds(a, mass);
    let pad = (hi - lo).abs() * T::lit(1e-8) + T::epsilon();
    lo -= pad;
    hi += pad;
    for _ in 0..200 {
        if hi - lo <= tol * (T::one() + lo.abs().max(hi.abs())) {
            break;
        }
        let mid = (lo + hi) * T::lit(0.5);
        if count_below(a, mass, mid)? > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo + hi) * T::lit(0.5))
}

/// Lowest `count` pencil eigenvalues in ascending order.
pub fn lowest_eigenvalues<T: Real>(a: &StarMatrix<T>, mass: &[T], count: usize, tol: T) -> Result<Vec<T>> {
    (0..count.min(a.dim())).map(|i| eigenvalue_by_bisection(a, mass, i, tol)).collect()
}

/// Eigen-decomposition of a small dense symmetric matrix by cyclic Jacobi
/// rotations. Returns ascending eigenvalues and column eigenvectors
/// (`vectors[i][j]` is component `i` of eigenvector `j`).
pub fn jacobi_eigen<T: Real>(matrix: &[Vec<T>]) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let n = matrix.len();
    let mut a: Vec<Vec<T>> = matrix.to_vec();
    let mut v: Vec<Vec<T>> = (0..n).map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect()).collect();
    let scale = a.iter().flatten().fold(T::zero(), |m, x| m.max(x.abs())).max(T::min_positive_value());
    let mut converged = n < 2;
    for _ in 0..100 {
        let off: T = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off.sqrt() <= T::epsilon() * scale * T::from_usize_lossy(n) {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let g = a[p][q].abs() * T::lit(100.0);
                if a[p][p].abs() + g == a[p][p].abs() && a[q][q].abs() + g == a[q][q].abs() {
                    a[p][q] = T::zero();
                    a[q][p] = T::zero();
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (T::lit(2.0) * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = (t * t + T::one()).sqrt().recip();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                let (rp, rq) = (a[p].clone(), a[q].clone());
                for k in 0..n {
                    a[p][k] = c * rp[k] - s * rq[k];
                    a[q][k] = s * rp[k] + c * rq[k];
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::Convergence("Jacobi eigen-iteration did not converge".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].partial_cmp(&a[j][j]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = (0..n).map(|r| order.iter().map(|&c| v[r][c]).collect()).collect();
    Ok((values, vectors))
}

/// A Ritz pair of the pencil; the vector is `M`-normalized.
#[derive(Debug, Clone)]
pub struct EigenPair<T> {
    pub value: T,
    pub vector: Vec<T>,
    /// `||A x - value M x||_{M^{-1}}`.
    pub residual: T,
}

/// `M`-orthonormalizes the columns of `basis` by modified Gram–Schmidt.
/// Columns that become negligible are dropped.
pub fn m_orthonormalize<T: Real>(basis: &mut Vec<Vec<T>>, mass: &[T]) {
    let mut out: Vec<Vec<T>> = Vec::with_capacity(basis.len());
    for mut x in basis.drain(..) {
        let norm0 = m_norm(&x, mass);
        for _ in 0..2 {
            for q in &out {
                let c: T = x.iter().zip(q).zip(mass).map(|((&a, &b), &m)| a * b * m).sum();
                for (xi, &qi) in x.iter_mut().zip(q) {
                    *xi -= c * qi;
                }
            }
        }
        let norm = m_norm(&x, mass);
        if norm > norm0 * T::lit(1e-10) && norm > T::zero() {
            x.iter_mut().for_each(|xi| *xi /= norm);
            out.push(x);
        }
    }
    *basis = out;
}

fn m_norm<T: Real>(x: &[T], mass: &[T]) -> T {
    x.iter().zip(mass).map(|(&a, &m)| a * a * m).sum::<T>().sqrt()
}

/// Shift-invert block subspace iteration with `block` vectors. Stops when
/// the `want` Ritz pairs nearest `shift` have residuals below
/// `tol * max(1, |value|)`; all pairs are returned.
pub fn shift_invert<T: Real>(
    a: &StarMatrix<T>,
    mass: &[T],
    shift: T,
    want: usize,
    block: usize,
    tol: T,
    max_iter: usize,
) -> Result<Vec<EigenPair<T>>> {
    let n = a.dim();
    let block = block.min(n);
    let factor = shifted(a, mass, shift).factor()?;
    // deterministic, generic start block
    let mut basis: Vec<Vec<T>> = (0..block)
        .map(|j| {
            (0..n)
                .map(|i| {
                    let t = T::from_usize_lossy(i * (2 * j + 3) + 7 * j + 1);
                    (t * T::lit(0.618_033_988_75)).fract() - T::lit(0.5)
                })
                .collect()
        })
        .collect();
    m_orthonormalize(&mut basis, mass);
    let mut pairs = Vec::new();
    for _ in 0..max_iter {
        let mut next: Vec<Vec<T>> = Vec::with_capacity(basis.len());
        for x in &basis {
            let mx: Vec<T> = x.iter().zip(mass).map(|(&a, &m)| a * m).collect();
            next.push(factor.solve(&mx)?);
        }
        m_orthonormalize(&mut next, mass);
        if next.is_empty() {
            return Err(Error::Numerical("subspace iteration collapsed".into()));
        }
        pairs = rayleigh_ritz(a, mass, &next)?;
        basis = pairs.iter().map(|p| p.vector.clone()).collect();
        if nearest(&pairs, shift, want).iter().all(|p| p.residual <= tol * p.value.abs().max(T::one())) {
            return Ok(pairs);
        }
    }
    let worst = nearest(&pairs, shift, want).iter().fold(T::zero(), |m, p| m.max(p.residual));
    Err(Error::Numerical(format!("shift-invert iteration stalled, residual {worst:e}")))
}

fn nearest<T: Real>(pairs: &[EigenPair<T>], shift: T, want: usize) -> Vec<&EigenPair<T>> {
    let mut refs: Vec<&EigenPair<T>> = pairs.iter().collect();
    refs.sort_by(|p, q| {
        (p.value - shift).abs().partial_cmp(&(q.value - shift).abs()).unwrap_or(std::cmp::Ordering::Equal)
    });
    refs.truncate(want);
    refs
}

/// Ritz pairs of the pencil on the span of `M`-orthonormal `basis`.
pub fn rayleigh_ritz<T: Real>(a: &StarMatrix<T>, mass: &[T], basis: &[Vec<T>]) -> Result<Vec<EigenPair<T>>> {
    let k = basis.len();
    let ab: Vec<Vec<T>> = basis.iter().map(|x| a.matvec(x)).collect::<Result<_>>()?;
    let proj: Vec<Vec<T>> = (0..k)
        .map(|i| (0..k).map(|j| basis[i].iter().zip(&ab[j]).map(|(&x, &y)| x * y).sum()).collect())
        .collect();
    let sym: Vec<Vec<T>> = (0..k)
        .map(|i| (0..k).map(|j| (proj[i][j] + proj[j][i]) * T::lit(0.5)).collect())
        .collect();
    let (values, vecs) = jacobi_eigen(&sym)?;
    let n = a.dim();
    let mut pairs = Vec::with_capacity(k);
    for (c, &value) in values.iter().enumerate() {
        let mut x = vec![T::zero(); n];
        let mut ax = vec![T::zero(); n];
        for (j, b) in basis.iter().enumerate() {
            let w = vecs[j][c];
            for i in 0..n {
                x[i] += w * b[i];
                ax[i] += w * ab[j][i];
            }
        }
        let residual = ax
            .iter()
            .zip(&x)
            .zip(mass)
            .map(|((&y, &xi), &m)| {
                let r = y - value * m * xi;
                r * r / m
            })
            .sum::<T>()
            .sqrt();
        pairs.push(EigenPair { value, vector: x, residual });
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, SymmetricEigen};

    fn pencil(len: usize) -> (StarMatrix<f64>, Vec<f64>) {
        let mut a = StarMatrix::zeros(3, len);
        a.vertex = -2.0;
        for (b, br) in a.branches.iter_mut().enumerate() {
            br.coupling = -1.0;
            for i in 0..len {
                br.diag[i] = 2.0 - 3.0 * (-(i as f64) / (3.0 + b as f64)).exp();
            }
            br.off.iter_mut().for_each(|o| *o = -1.0);
        }
        let mass: Vec<f64> = (0..a.dim()).map(|i| 1.0 + 0.1 * ((i % 4) as f64)).collect();
        (a, mass)
    }

    fn dense_eigenvalues(a: &StarMatrix<f64>, mass: &[f64]) -> Vec<f64> {
        let d = a.to_dense();
        let n = d.len();
        let m = DMatrix::from_fn(n, n, |i, j| d[i][j] / (mass[i] * mass[j]).sqrt());
        let mut e: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        e
    }

    #[test]
    fn inertia_matches_dense_spectrum() {
        let (a, mass) = pencil(40);
        let e = dense_eigenvalues(&a, &mass);
        for &s in &[-1.5, -0.2, 0.0, 0.3, 1.0, 3.9] {
            let expected = e.iter().filter(|&&x| x < s).count();
            assert_eq!(count_below(&a, &mass, s).unwrap(), expected, "shift {s}");
        }
        let (lo, hi) = spectral_bounds(&a, &mass);
        assert!(lo <= e[0] && hi >= *e.last().unwrap());
    }

    #[test]
    fn bisection_and_shift_invert_agree_with_dense() {
        let (a, mass) = pencil(30);
        let e = dense_eigenvalues(&a, &mass);
        let low = lowest_eigenvalues(&a, &mass, 4, 1e-13).unwrap();
        for (x, y) in low.iter().zip(&e) {
            assert!((x - y).abs() < 1e-10);
        }
        let pairs = shift_invert(&a, &mass, e[2] + 1e-3, 1, 3, 1e-10, 500).unwrap();
        let nearest = pairs
            .iter()
            .min_by(|p, q| (p.value - e[2]).abs().partial_cmp(&(q.value - e[2]).abs()).unwrap())
            .unwrap();
        assert!((nearest.value - e[2]).abs() < 1e-9);
        let nrm: f64 = nearest.vector.iter().zip(&mass).map(|(x, m)| x * x * m).sum();
        assert!((nrm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_small_matrix() {
        let m = vec![vec![2.0, 1.0, 0.0], vec![1.0, 2.0, 1.0], vec![0.0, 1.0, 2.0]];
        let (vals, vecs) = jacobi_eigen(&m).unwrap();
        let s = 2f64.sqrt();
        for (v, e) in vals.iter().zip([2.0 - s, 2.0, 2.0 + s]) {
            assert!((v - e).abs() < 1e-14);
        }
        // columns orthonormal
        let dot: f64 = (0..3).map(|i| vecs[i][0] * vecs[i][2]).sum();
        assert!(dot.abs() < 1e-14);
    }
}
