//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use fractal_hm::Rational;
use num_traits::{One, Zero};

pub fn q(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

/// Gauss–Jordan elimination over the rationals; `a` is square and regular.
pub fn solve_exact(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Vec<Rational> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero()).expect("regular system");
        a.swap(col, piv);
        b.swap(col, piv);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] /= p;
        }
        b[col] /= p;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col];
                for j in 0..n {
                    let v = a[col][j];
                    a[r][j] -= f * v;
                }
                let v = b[col];
                b[r] -= f * v;
            }
        }
    }
    b
}

/// Schur complement of a rational Laplacian onto `keep`.
pub fn schur_exact(l: &[Vec<Rational>], keep: &[usize]) -> Vec<Vec<Rational>> {
    let n = l.len();
    let drop: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
    let mut out = vec![vec![Rational::zero(); keep.len()]; keep.len()];
    for (jj, &j) in keep.iter().enumerate() {
        // solve L_II x = -L_Ij, then column j of the Schur complement is L_Kj + L_KI x
        let a: Vec<Vec<Rational>> = drop.iter().map(|&r| drop.iter().map(|&c| l[r][c]).collect()).collect();
        let b: Vec<Rational> = drop.iter().map(|&r| -l[r][j]).collect();
        let x = if drop.is_empty() { Vec::new() } else { solve_exact(a, b) };
        for (ii, &i) in keep.iter().enumerate() {
            let mut v = l[i][j];
            for (k, &d) in drop.iter().enumerate() {
                v += l[i][d] * x[k];
            }
            out[ii][jj] = v;
        }
    }
    out
}

/// Exact Laplacian of an edge list with rational conductances.
pub fn laplacian(n: usize, edges: &[(usize, usize, Rational)]) -> Vec<Vec<Rational>> {
    let mut l = vec![vec![Rational::zero(); n]; n];
    for &(a, b, c) in edges {
        l[a][a] += c;
        l[b][b] += c;
        l[a][b] -= c;
        l[b][a] -= c;
    }
    l
}

pub fn one() -> Rational {
    Rational::one()
}
