#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};

/// Gauss-Legendre rule from the eigen-decomposition of the Jacobi matrix,
/// independent of the Newton iteration in the library.
pub fn golub_welsch(q: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::zeros(q, q);
    for k in 1..q {
        let b = k as f64 / ((4 * k * k - 1) as f64).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..q)
        .map(|i| (eig.eigenvalues[i], 2.0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Legendre polynomial by the explicit sum formula.
pub fn legendre_sum(k: usize, x: f64) -> f64 {
    // P_k(x) = 2^-k sum_m C(k,m)^2 (x-1)^(k-m) (x+1)^m
    let mut s = 0.0;
    for m in 0..=k {
        let c = binom(k, m);
        s += c * c * (x - 1.0).powi((k - m) as i32) * (x + 1.0).powi(m as i32);
    }
    s / 2f64.powi(k as i32)
}

pub fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `int_a^b f` by composite Gauss with `panels` pieces of `q` points.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, q: usize) -> f64 {
    let (x, w) = golub_welsch(q);
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    for i in 0..panels {
        let l = a + i as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            s += wi * 0.5 * h * f(l + 0.5 * h * (xi + 1.0));
        }
    }
    s
}

/// Value of the basis function `i` of a `(p, n)` element at reference `xi`
/// (sub-cell edges belong to the sub-cell on their right, the last edge to the last sub-cell).
pub fn basis_ref(p: usize, n: usize, i: usize, xi: f64) -> f64 {
    if i < p {
        legendre_sum(i + 1, xi)
    } else {
        let j = i - p;
        let a = -1.0 + 2.0 * j as f64 / n as f64;
        let b = -1.0 + 2.0 * (j + 1) as f64 / n as f64;
        let inside = xi >= a && (xi < b || (j + 1 == n && xi <= b));
        if inside { 1.0 } else { 0.0 }
    }
}

/// Brute-force Gram matrix on `[-1, 1]` with the sub-cells integrated separately.
pub fn brute_mass(p: usize, n: usize) -> DMatrix<f64> {
    let dof = p + n;
    let mut m = DMatrix::zeros(dof, dof);
    for j in 0..n {
        let a = -1.0 + 2.0 * j as f64 / n as f64;
        let b = -1.0 + 2.0 * (j + 1) as f64 / n as f64;
        let mid = 0.5 * (a + b);
        for r in 0..dof {
            for c in 0..dof {
                m[(r, c)] += integrate(
                    |x| {
                        let y = if x == b { mid } else { x };
                        basis_ref(p, n, r, y) * basis_ref(p, n, c, y)
                    },
                    a,
                    b,
                    3,
                    12,
                );
            }
        }
    }
    m
}

pub fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    assert!((a - b).abs() <= tol, "{what}: {a} vs {b} (tol {tol})");
}
