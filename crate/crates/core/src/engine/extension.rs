//! One-step harmonic extension on a gasket cell, with and without a jump.
//!
//! Midpoints are returned as `(x, y, z)`: `x` between corners 1 and 2, `y`
//! between 2 and 3, `z` between 1 and 3.

use crate::scalar::Scalar;

fn r<T: Scalar>(n: i64, d: i64) -> T {
    T::from_ratio(n, d)
}

/// Classical 1/5–2/5 rule.
pub fn classical_extension<T: Scalar>(a: &T, b: &T, c: &T) -> [T; 3] {
    let (a, b, c) = (a.clone(), b.clone(), c.clone());
    [
        r::<T>(2, 5) * a.clone() + r::<T>(2, 5) * b.clone() + r::<T>(1, 5) * c.clone(),
        r::<T>(1, 5) * a.clone() + r::<T>(2, 5) * b.clone() + r::<T>(2, 5) * c.clone(),
        r::<T>(2, 5) * a + r::<T>(1, 5) * b + r::<T>(2, 5) * c,
    ]
}

/// `(2I + J) / 10`, the inverse of the midpoint stationarity matrix `5I - J`.
pub fn midpoint_solve<T: Scalar>(rhs: &[T; 3]) -> [T; 3] {
    let s = rhs[0].clone() + rhs[1].clone() + rhs[2].clone();
    let tenth = r::<T>(1, 10);
    [
        tenth.clone() * (T::from_ratio(2, 1) * rhs[0].clone() + s.clone()),
        tenth.clone() * (T::from_ratio(2, 1) * rhs[1].clone() + s.clone()),
        tenth * (T::from_ratio(2, 1) * rhs[2].clone() + s),
    ]
}

/// Extension when the midpoint `z` is cut and the copy seen from the cell at
/// corner 3 carries `z + ρ`. Returns `(x, y, z_minus)` and `z_plus`.
pub fn jump_extension<T: Scalar>(a: &T, b: &T, c: &T, rho: &T) -> ([T; 3], T) {
    let base = classical_extension(a, b, c);
    let shift = [T::zero(), rho.clone(), -(T::from_ratio(2, 1) * rho.clone())];
    let corr = midpoint_solve(&shift);
    let out = [
        base[0].clone() + corr[0].clone(),
        base[1].clone() + corr[1].clone(),
        base[2].clone() + corr[2].clone(),
    ];
    let plus = out[2].clone() + rho.clone();
    (out, plus)
}

/// Response of one gasket cell to the cuts inside it, in the cell's own
/// energy units, with all corner values zero.
///
/// `delta[k]` is the midpoint opposite corner `k` (0-based) and `flux[i]` is
/// half the derivative of the cell energy in corner `i`; the full cell energy
/// is `E_0(a) + 2 <flux, a> + const`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResponse<T> {
    pub delta: [T; 3],
    pub flux: [T; 3],
}

impl<T: Scalar> CellResponse<T> {
    pub fn zero() -> Self {
        CellResponse { delta: [T::zero(), T::zero(), T::zero()], flux: [T::zero(), T::zero(), T::zero()] }
    }
}

/// Plus-side corner (0-based) of the cut on the midpoint opposite corner `k`.
pub fn plus_side(k: usize) -> usize {
    (k + 1) % 3
}

/// Offset seen by child `s` at the midpoint opposite corner `k`.
pub fn offset<T: Scalar>(cut: &Option<(usize, T)>, s: usize, k: usize) -> T {
    match cut {
        Some((ck, rho)) if *ck == k && plus_side(k) == s => rho.clone(),
        _ => T::zero(),
    }
}

/// Solves the three midpoints of a cell given its children's fluxes and an
/// optional cut `(k, ρ)` on the midpoint opposite corner `k`.
pub fn cell_response<T: Scalar>(children: &[CellResponse<T>; 3], cut: &Option<(usize, T)>) -> CellResponse<T> {
    let two = T::from_ratio(2, 1);
    let rhs: [T; 3] = std::array::from_fn(|k| {
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        // child i sees m_k at its slot j and m_j at its slot k; child j symmetric
        -(two.clone() * (offset(cut, i, k) + offset(cut, j, k))) + offset(cut, i, j) + offset(cut, j, i)
            - children[i].flux[j].clone()
            - children[j].flux[i].clone()
    });
    let delta = midpoint_solve(&rhs);
    let five_thirds = T::from_ratio(5, 3);
    let flux = std::array::from_fn(|i| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let seen_j = delta[j].clone() + offset(cut, i, j);
        let seen_k = delta[k].clone() + offset(cut, i, k);
        five_thirds.clone() * (children[i].flux[i].clone() - seen_j - seen_k)
    });
    CellResponse { delta, flux }
}
