//! Dense symmetric eigensolvers.
//!
//! Small matrices go through cyclic Jacobi rotations; larger ones through
//! Householder tridiagonalization followed by implicit-shift QL. Both are
//! deterministic and depend on nothing but `f64` arithmetic.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest order handled by Jacobi under [`EighMethod::Auto`].
pub const JACOBI_MAX_N: usize = 64;

const MAX_JACOBI_SWEEPS: usize = 100;
const MAX_QL_ITERS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EighMethod {
    #[default]
    Auto,
    Jacobi,
    TridiagonalQl,
}

/// Eigenvalues in nondecreasing order, eigenvectors as matching columns.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

pub fn eigh(m: &DMatrix<f64>) -> Result<Eigh> {
    eigh_with(m, EighMethod::Auto)
}

pub fn eigvalsh(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    Ok(eigh(m)?.values.as_slice().to_vec())
}

pub fn eigh_with(m: &DMatrix<f64>, method: EighMethod) -> Result<Eigh> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::InvalidParameter(format!(
            "eigh on a {}x{} matrix",
            n,
            m.ncols()
        )));
    }
    let scale = m.amax().max(1.0);
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            asym = asym.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    if asym > 1e-10 * scale || m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotSymmetric(asym));
    }
    // Row-major working copy of the symmetrized matrix.
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = 0.5 * (m[(i, j)] + m[(j, i)]);
        }
    }
    let use_jacobi = match method {
        EighMethod::Auto => n <= JACOBI_MAX_N,
        EighMethod::Jacobi => true,
        EighMethod::TridiagonalQl => false,
    };
    let (d, v) = if n == 0 {
        (Vec::new(), Vec::new())
    } else if use_jacobi {
        jacobi(a, n)?
    } else {
        tridiagonal_ql(a, n)?
    };
    Ok(sorted(d, v, n))
}

fn sorted(d: Vec<f64>, v: Vec<f64>, n: usize) -> Eigh {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
    let values = DVector::from_iterator(n, order.iter().map(|&k| d[k]));
    let vectors = DMatrix::from_fn(n, n, |i, c| v[i * n + order[c]]);
    Eigh { values, vectors }
}

#[inline]
fn rotate(a: &mut [f64], ij: usize, kl: usize, s: f64, tau: f64) {
    let g = a[ij];
    let h = a[kl];
    a[ij] = g - s * (h + g * tau);
    a[kl] = h + s * (g - h * tau);
}

/// Cyclic Jacobi with threshold sweeps on the upper triangle.
fn jacobi(mut a: Vec<f64>, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let mut d: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    let mut b = d.clone();
    let mut z = vec![0.0; n];
    for sweep in 1..=MAX_JACOBI_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q].abs();
            }
        }
        if off == 0.0 {
            return Ok((d, v));
        }
        let thresh = if sweep < 4 {
            0.2 * off / (n * n) as f64
        } else {
            0.0
        };
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let g = 100.0 * apq.abs();
                if sweep > 4 && d[p].abs() + g == d[p].abs() && d[q].abs() + g == d[q].abs() {
                    a[p * n + q] = 0.0;
                } else if apq.abs() > thresh {
                    let h = d[q] - d[p];
                    let t = if h.abs() + g == h.abs() {
                        apq / h
                    } else {
                        let theta = 0.5 * h / apq;
                        let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                        if theta < 0.0 {
                            -t
                        } else {
                            t
                        }
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    let tau = s / (1.0 + c);
                    let h = t * apq;
                    z[p] -= h;
                    z[q] += h;
                    d[p] -= h;
                    d[q] += h;
                    a[p * n + q] = 0.0;
                    for j in 0..p {
                        rotate(&mut a, j * n + p, j * n + q, s, tau);
                    }
                    for j in (p + 1)..q {
                        rotate(&mut a, p * n + j, j * n + q, s, tau);
                    }
                    for j in (q + 1)..n {
                        rotate(&mut a, p * n + j, q * n + j, s, tau);
                    }
                    for j in 0..n {
                        rotate(&mut v, j * n + p, j * n + q, s, tau);
                    }
                }
            }
        }
        for i in 0..n {
            b[i] += z[i];
            d[i] = b[i];
            z[i] = 0.0;
        }
    }
    Err(Error::NoConvergence(
        "Jacobi eigensolver",
        MAX_JACOBI_SWEEPS,
    ))
}

/// Householder reduction to tridiagonal form, then implicit-shift QL on the
/// tridiagonal, accumulating the orthogonal transforms.
fn tridiagonal_ql(a: Vec<f64>, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut v = a;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let idx = |i: usize, j: usize| i * n + j;

    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = 0.0;
                v[idx(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                let f = d[j];
                v[idx(j, i)] = f;
                let mut g = e[j] + v[idx(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[idx(k, j)] * d[k];
                    e[k] += v[idx(k, j)] * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                for k in j..i {
                    v[idx(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n.saturating_sub(1) {
        v[idx(n - 1, i)] = v[idx(i, i)];
        v[idx(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[idx(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[idx(k, i + 1)] * v[idx(k, j)];
                }
                for k in 0..=i {
                    v[idx(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[idx(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
        v[idx(n - 1, j)] = 0.0;
    }
    v[idx(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;

    // QL iterations
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERS {
                    return Err(Error::NoConvergence(
                        "tridiagonal QL eigensolver",
                        MAX_QL_ITERS,
                    ));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let h = v[idx(k, i + 1)];
                        v[idx(k, i + 1)] = s * v[idx(k, i)] + c * h;
                        v[idx(k, i)] = c * v[idx(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok((d, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn check_decomposition(m: &DMatrix<f64>, eig: &Eigh, tol: f64) {
        let n = m.nrows();
        let v = &eig.vectors;
        let orth = v.transpose() * v - DMatrix::<f64>::identity(n, n);
        assert!(orth.amax() <= tol, "orthogonality defect {}", orth.amax());
        let resid = m * v - v * DMatrix::from_diagonal(&eig.values);
        assert!(
            resid.amax() <= tol * m.amax().max(1.0),
            "residual {}",
            resid.amax()
        );
        for w in eig.values.as_slice().windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn identity_and_swap() {
        for method in [EighMethod::Jacobi, EighMethod::TridiagonalQl] {
            let e = eigh_with(&DMatrix::identity(3, 3), method).unwrap();
            assert_eq!(e.values.as_slice(), &[1.0, 1.0, 1.0]);
            let e = eigh_with(
                &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
                method,
            )
            .unwrap();
            assert_abs_diff_eq!(e.values[0], -1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(e.values[1], 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn negative_triangle_laplacian() {
        let l = DMatrix::from_row_slice(3, 3, &[1.0, 0.5, 0.5, 0.5, 1.0, 0.5, 0.5, 0.5, 1.0]);
        for method in [EighMethod::Jacobi, EighMethod::TridiagonalQl] {
            let e = eigh_with(&l, method).unwrap();
            assert_abs_diff_eq!(e.values[0], 0.5, epsilon = 1e-14);
            assert_abs_diff_eq!(e.values[1], 0.5, epsilon = 1e-14);
            assert_abs_diff_eq!(e.values[2], 2.0, epsilon = 1e-14);
            check_decomposition(&l, &e, 1e-13);
        }
    }

    #[test]
    fn rejects_asymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(eigh(&m), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn large_matrix_uses_ql() {
        let n = 90;
        let m = DMatrix::from_fn(n, n, |i, j| {
            ((i * 7 + j * 7) % 13) as f64 - 6.0 + if i == j { 0.5 } else { 0.0 }
        });
        let e = eigh(&m).unwrap();
        check_decomposition(&m, &e, 1e-11);
    }

    proptest! {
        #[test]
        fn jacobi_and_ql_agree(n in 1usize..12, entries in proptest::collection::vec(-5.0f64..5.0, 144)) {
            let m = DMatrix::from_fn(n, n, |i, j| entries[i.min(j) * 12 + i.max(j)]);
            let a = eigh_with(&m, EighMethod::Jacobi).unwrap();
            let b = eigh_with(&m, EighMethod::TridiagonalQl).unwrap();
            check_decomposition(&m, &a, 1e-12);
            check_decomposition(&m, &b, 1e-12);
            let oracle = nalgebra::SymmetricEigen::new(m.clone());
            let mut ov: Vec<f64> = oracle.eigenvalues.iter().copied().collect();
            ov.sort_by(f64::total_cmp);
            for k in 0..n {
                prop_assert!((a.values[k] - b.values[k]).abs() <= 1e-11);
                prop_assert!((a.values[k] - ov[k]).abs() <= 1e-11);
            }
        }
    }
}
