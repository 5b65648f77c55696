//! Eigenvalues of a real square matrix by Householder reduction to upper
//! Hessenberg form followed by the Francis implicit double-shift QR
//! iteration. Only eigenvalues are produced; Schur vectors are never formed.

use num_complex::Complex64;

use super::RealMatrix;
use crate::error::{Error, Result};

/// Relative size below which a subdiagonal entry is set to zero.
pub const DEFLATION_TOL: f64 = 1e-12;
/// Total QR sweeps allowed per unit of dimension.
pub const ITERATIONS_PER_DIM: usize = 40;

/// Reduces `a` (row-major, `n×n`) to upper Hessenberg form in place by
/// orthogonal similarity.
pub(crate) fn hessenberg(a: &mut [f64], n: usize) {
    let mut v = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let norm = (k + 1..n).map(|i| a[i * n + k] * a[i * n + k]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1) * n + k];
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        for i in k + 1..n {
            v[i] = a[i * n + k];
        }
        v[k + 1] -= alpha;
        let vnorm2: f64 = (k + 1..n).map(|i| v[i] * v[i]).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // H A: rows k+1.., columns k..
        for j in k..n {
            let s: f64 = (k + 1..n).map(|i| v[i] * a[i * n + j]).sum::<f64>() * beta;
            for i in k + 1..n {
                a[i * n + j] -= s * v[i];
            }
        }
        // (H A) H: all rows, columns k+1..
        for i in 0..n {
            let row = &mut a[i * n..(i + 1) * n];
            let s: f64 = (k + 1..n).map(|j| row[j] * v[j]).sum::<f64>() * beta;
            for j in k + 1..n {
                row[j] -= s * v[j];
            }
        }
        a[(k + 1) * n + k] = alpha;
        for i in k + 2..n {
            a[i * n + k] = 0.0;
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix, destroying it. Also returns
/// the largest subdiagonal entry neglected at a deflation.
///
/// Indices follow the classic 1-based formulation of the algorithm; the
/// matrix is copied into an `(n+1)²` buffer so the port stays literal.
pub(crate) fn hqr(h: &[f64], n: usize) -> Result<(Vec<Complex64>, f64)> {
    let w = n + 1;
    let mut a = vec![0.0; w * w];
    for i in 0..n {
        for j in 0..n {
            a[(i + 1) * w + j + 1] = h[i * n + j];
        }
    }
    let at = |i: usize, j: usize| i * w + j;
    let mut wr = vec![0.0; w];
    let mut wi = vec![0.0; w];
    let mut neglected: f64 = 0.0;

    let mut anorm = 0.0;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += a[at(i, j)].abs();
        }
    }

    let cap = ITERATIONS_PER_DIM * n.max(1);
    let mut total_its = 0usize;
    let mut nn = n;
    let mut t = 0.0;
    let (mut p, mut q, mut r, mut s, mut x, mut y, mut z, mut ww): (f64, f64, f64, f64, f64, f64, f64, f64);
    while nn >= 1 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 2 {
                s = a[at(l - 1, l - 1)].abs() + a[at(l, l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[at(l, l - 1)].abs() <= DEFLATION_TOL * s {
                    neglected = neglected.max(a[at(l, l - 1)].abs());
                    a[at(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }
            x = a[at(nn, nn)];
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = 0.0;
                nn -= 1;
                break;
            }
            y = a[at(nn - 1, nn - 1)];
            ww = a[at(nn, nn - 1)] * a[at(nn - 1, nn)];
            if l == nn - 1 {
                p = 0.5 * (y - x);
                q = p * p + ww;
                z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + z.copysign(p);
                    wr[nn - 1] = x + z;
                    wr[nn] = x + z;
                    if z != 0.0 {
                        wr[nn] = x - ww / z;
                    }
                    wi[nn - 1] = 0.0;
                    wi[nn] = 0.0;
                } else {
                    wr[nn - 1] = x + p;
                    wr[nn] = x + p;
                    wi[nn - 1] = -z;
                    wi[nn] = z;
                }
                nn -= 2;
                break;
            }
            if total_its >= cap {
                return Err(Error::NonConvergence { iterations: total_its });
            }
            if its == 10 || its == 20 {
                // exceptional shift
                t += x;
                for i in 1..=nn {
                    a[at(i, i)] -= x;
                }
                s = a[at(nn, nn - 1)].abs() + a[at(nn - 1, nn - 2)].abs();
                x = 0.75 * s;
                y = x;
                ww = -0.4375 * s * s;
            }
            its += 1;
            total_its += 1;

            let mut m = nn - 2;
            loop {
                z = a[at(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - ww) / a[at(m + 1, m)] + a[at(m, m + 1)];
                q = a[at(m + 1, m + 1)] - z - r - s;
                r = a[at(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[at(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[at(m - 1, m - 1)].abs() + z.abs() + a[at(m + 1, m + 1)].abs());
                if u <= f64::EPSILON * v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nn {
                a[at(i, i - 2)] = 0.0;
                if i != m + 2 {
                    a[at(i, i - 3)] = 0.0;
                }
            }
            for k in m..nn {
                if k != m {
                    p = a[at(k, k - 1)];
                    q = a[at(k + 1, k - 1)];
                    r = if k != nn - 1 { a[at(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[at(k, k - 1)] = -a[at(k, k - 1)];
                        }
                    } else {
                        a[at(k, k - 1)] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nn {
                        p = a[at(k, j)] + q * a[at(k + 1, j)];
                        if k != nn - 1 {
                            p += r * a[at(k + 2, j)];
                            a[at(k + 2, j)] -= p * z;
                        }
                        a[at(k + 1, j)] -= p * y;
                        a[at(k, j)] -= p * x;
                    }
                    let mmin = nn.min(k + 3);
                    for i in l..=mmin {
                        p = x * a[at(i, k)] + y * a[at(i, k + 1)];
                        if k != nn - 1 {
                            p += z * a[at(i, k + 2)];
                            a[at(i, k + 2)] -= p * r;
                        }
                        a[at(i, k + 1)] -= p * q;
                        a[at(i, k)] -= p;
                    }
                }
            }
            if l >= nn - 1 {
                break;
            }
        }
    }
    let eig = (1..=n).map(|i| Complex64::new(wr[i], wi[i])).collect();
    Ok((eig, neglected))
}

pub(crate) fn eigenvalues_of(m: &RealMatrix) -> Result<(Vec<Complex64>, f64)> {
    let n = m.n();
    let mut a = m.as_slice().to_vec();
    hessenberg(&mut a, n);
    hqr(&a, n)
}
