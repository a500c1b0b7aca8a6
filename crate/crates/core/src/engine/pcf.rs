//! Energy minimization on a general cut graph.
//!
//! Boundary values are fixed and each plus copy is eliminated through
//! `f(plus) = f(minus) + shift`; the remaining free variables solve a
//! symmetric positive definite system. Small systems use a dense Cholesky
//! factorization, large ones Jacobi-preconditioned conjugate gradients.

use nalgebra::{DMatrix, DVector};

use crate::covering::CutGraph;
use crate::error::{Error, Result};
use crate::scalar::rational_to_f64;

/// Free-variable count above which the iterative solver is used.
pub const DENSE_LIMIT: usize = 3000;

#[derive(Debug, Clone, Copy)]
enum Term {
    Var(usize, f64),
    Const(f64),
}

/// Compressed sparse rows of a symmetric matrix.
struct Csr {
    start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Csr {
    fn from_rows(rows: &[Vec<(usize, f64)>]) -> Self {
        let mut start = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for row in rows {
            let mut row = row.clone();
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if last == Some(c) {
                    *vals.last_mut().expect("entry") += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = Some(c);
                }
            }
            start.push(cols.len());
        }
        Csr { start, cols, vals }
    }

    fn mul(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = (self.start[i]..self.start[i + 1]).map(|k| self.vals[k] * x[self.cols[k]]).sum();
        }
    }

    fn diag(&self) -> Vec<f64> {
        (0..self.start.len() - 1)
            .map(|i| {
                (self.start[i]..self.start[i + 1])
                    .find(|&k| self.cols[k] == i)
                    .map(|k| self.vals[k])
                    .unwrap_or(0.0)
            })
            .collect()
    }
}

fn inf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn conjugate_gradient(a: &Csr, b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let d = a.diag();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&d).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let target = 1e-14 * inf_norm(b).max(1e-300);
    let mut ap = vec![0.0; n];
    for _ in 0..(20 * n).max(100) {
        if inf_norm(&r) <= target {
            return Ok(x);
        }
        a.mul(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / d[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if inf_norm(&r) <= 1e3 * target {
        Ok(x)
    } else {
        Err(Error::NotConverged(format!("conjugate gradients stalled at residual {:.3e}", inf_norm(&r))))
    }
}

/// Minimizes the cut-graph energy under the boundary and jump constraints.
/// Returns one value per cut-graph vertex.
pub fn solve_pcf(cut: &CutGraph) -> Result<Vec<f64>> {
    solve_pcf_with_limit(cut, DENSE_LIMIT)
}

pub fn solve_pcf_with_limit(cut: &CutGraph, dense_limit: usize) -> Result<Vec<f64>> {
    let total = cut.vertices.len();
    let mut terms: Vec<Option<Term>> = vec![None; total];
    for &(v, x) in &cut.fixed {
        terms[v] = Some(Term::Const(rational_to_f64(&x)));
    }
    let mut free = Vec::new();
    for v in 0..cut.original_count() {
        if terms[v].is_none() {
            terms[v] = Some(Term::Var(free.len(), 0.0));
            free.push(v);
        }
    }
    for j in &cut.jumps {
        terms[j.plus] = Some(match terms[j.minus].expect("minus assigned") {
            Term::Var(i, k) => Term::Var(i, k + j.shift as f64),
            Term::Const(c) => Term::Const(c + j.shift as f64),
        });
    }
    let terms: Vec<Term> = terms.into_iter().map(|t| t.expect("every vertex assigned")).collect();
    let n = free.len();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut rhs = vec![0.0; n];
    let mut anchored = vec![false; n];
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for e in &cut.edges {
        let c = e.conductance;
        match (terms[e.a], terms[e.b]) {
            (Term::Var(i, ki), Term::Var(j, kj)) => {
                if i == j {
                    continue;
                }
                rows[i].push((i, c));
                rows[j].push((j, c));
                rows[i].push((j, -c));
                rows[j].push((i, -c));
                // gradient of c (u_i - u_j + ki - kj)^2 / 2
                rhs[i] -= c * (ki - kj);
                rhs[j] += c * (ki - kj);
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
            (Term::Var(i, k), Term::Const(x)) | (Term::Const(x), Term::Var(i, k)) => {
                rows[i].push((i, c));
                rhs[i] += c * (x - k);
                anchored[i] = true;
            }
            (Term::Const(_), Term::Const(_)) => {}
        }
    }
    let mut root_anchored = vec![false; n];
    for i in 0..n {
        if anchored[i] {
            let r = find(&mut parent, i);
            root_anchored[r] = true;
        }
    }
    for i in 0..n {
        let r = find(&mut parent, i);
        if !root_anchored[r] {
            return Err(Error::SingularSystem(format!("cut-graph vertex {}", free[i])));
        }
    }

    let csr = Csr::from_rows(&rows);
    let u = if n == 0 {
        Vec::new()
    } else if n <= dense_limit {
        let mut h = DMatrix::zeros(n, n);
        for i in 0..n {
            for k in csr.start[i]..csr.start[i + 1] {
                h[(i, csr.cols[k])] += csr.vals[k];
            }
        }
        let chol = h
            .cholesky()
            .ok_or_else(|| Error::SingularSystem("reduced Laplacian is not positive definite".into()))?;
        chol.solve(&DVector::from_vec(rhs.clone())).as_slice().to_vec()
    } else {
        conjugate_gradient(&csr, &rhs)?
    };

    let mut check = vec![0.0; n];
    csr.mul(&u, &mut check);
    let res = check.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let scale = inf_norm(&rhs) + inf_norm(&csr.diag()) * inf_norm(&u);
    if res > 1e-10 * scale.max(1e-300) {
        return Err(Error::NotConverged(format!("relative residual {:.3e}", res / scale)));
    }
    Ok(terms
        .iter()
        .map(|t| match *t {
            Term::Var(i, k) => u[i] + k,
            Term::Const(x) => x,
        })
        .collect())
}
