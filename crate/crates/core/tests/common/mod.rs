//! Independent reference computations for integration tests. Nothing here
//! calls into the library: matrices are built from bit operations and
//! diagonalized with a plain cyclic Jacobi sweep.

#![allow(dead_code)]

pub type Matrix = Vec<Vec<f64>>;

/// `sign * (Σ X_i X_{i+1} + g Σ Z_i)` on a ring, dense, from bit flips.
/// Qubit `q` is bit `q` of the row index; `Z|0> = |0>`.
pub fn tfim_matrix(l: usize, g: f64, sign: f64) -> Matrix {
    let dim = 1usize << l;
    let mut h = vec![vec![0.0; dim]; dim];
    let bonds: Vec<(usize, usize)> = if l == 2 {
        vec![(0, 1)]
    } else {
        (0..l).map(|i| (i, (i + 1) % l)).collect()
    };
    for x in 0..dim {
        for q in 0..l {
            let z = if x >> q & 1 == 0 { 1.0 } else { -1.0 };
            h[x][x] += sign * g * z;
        }
        for &(i, j) in &bonds {
            let y = x ^ (1 << i) ^ (1 << j);
            h[y][x] += sign;
        }
    }
    h
}

/// Eigenvalues (ascending) and eigenvectors (as columns `vecs[k]`) of a
/// real symmetric matrix.
pub fn jacobi_eigh(a: &Matrix) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut a = a.clone();
    let mut v = identity(n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = order.iter().map(|&i| (0..n).map(|k| v[k][i]).collect()).collect();
    (values, vectors)
}

pub fn identity(n: usize) -> Matrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b[0].len();
    let mut c = vec![vec![0.0; m]; n];
    for i in 0..n {
        for k in 0..b.len() {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..m {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

pub fn matvec(a: &Matrix, x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum()).collect()
}

/// `e^{-βH}/Z` by Taylor series with scaling and squaring.
pub fn gibbs(h: &Matrix, beta: f64) -> Matrix {
    let n = h.len();
    let norm: f64 = h.iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let mut squarings = 0;
    let mut scale = beta;
    while scale * norm > 0.5 {
        scale /= 2.0;
        squarings += 1;
    }
    let a: Matrix = h.iter().map(|r| r.iter().map(|x| -scale * x).collect()).collect();
    let mut term = identity(n);
    let mut e = identity(n);
    for k in 1..30 {
        term = matmul(&term, &a);
        for row in term.iter_mut() {
            for x in row.iter_mut() {
                *x /= k as f64;
            }
        }
        for i in 0..n {
            for j in 0..n {
                e[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        e = matmul(&e, &e);
    }
    let z: f64 = (0..n).map(|i| e[i][i]).sum();
    e.iter().map(|r| r.iter().map(|x| x / z).collect()).collect()
}

/// `(re, im)` pairs of `Tr_B |ψ><ψ|` for a register whose low `l` qubits are A.
pub fn reduce_to_low(amps: &[(f64, f64)], l: usize) -> Vec<Vec<(f64, f64)>> {
    let da = 1usize << l;
    let db = amps.len() / da;
    let mut rho = vec![vec![(0.0, 0.0); da]; da];
    for a in 0..da {
        for a2 in 0..da {
            let mut acc = (0.0, 0.0);
            for b in 0..db {
                let (x, y) = amps[a + (b << l)];
                let (u, w) = amps[a2 + (b << l)];
                // x y* with y = u + iw
                acc.0 += x * u + y * w;
                acc.1 += y * u - x * w;
            }
            rho[a][a2] = acc;
        }
    }
    rho
}

/// `<ψ|O|ψ>` for `O = ⊗ Z` on `sites` (real amplitudes or not).
pub fn z_string(amps: &[(f64, f64)], sites: &[usize]) -> f64 {
    amps.iter()
        .enumerate()
        .map(|(x, (re, im))| {
            let flips = sites.iter().filter(|&&q| x >> q & 1 == 1).count();
            let sign = if flips % 2 == 0 { 1.0 } else { -1.0 };
            sign * (re * re + im * im)
        })
        .sum()
}

/// `<ψ|X_i X_j|ψ>` for a real vector.
pub fn xx_real(v: &[f64], i: usize, j: usize) -> f64 {
    v.iter().enumerate().map(|(x, a)| a * v[x ^ (1 << i) ^ (1 << j)]).sum()
}

/// Simpson rule on `[a, b]` with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}
