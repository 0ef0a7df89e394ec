//! Rank, kernels and determinants of the tiny matrices the criteria need.
//! Exact versions run Gaussian elimination over the rationals; float
//! versions use the SVD from nalgebra.

use nalgebra::DMatrix;
use crate::scalar::Scalar;

/// Singular values below `rel_tol * max(1, sigma_max)` count as zero. The
/// floor at 1 keeps an all-but-zero matrix (rounding noise only) at rank 0.
pub fn numeric_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let scale = sv.max().max(1.0);
    sv.iter().filter(|&&s| s > rel_tol * scale).count()
}

/// Smallest singular value (zero for an empty matrix).
pub fn min_singular_value(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.min()
}

/// Orthonormal basis of the kernel, plus an orthonormal basis of its
/// complement, both from the right singular vectors. Requires
/// `rows >= cols`.
pub fn svd_kernel(m: &DMatrix<f64>, rank: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    assert!(m.nrows() >= m.ncols(), "kernel needs a tall matrix");
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let mut order: Vec<usize> = (0..m.ncols()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let row = |i: usize| vt.row(i).iter().copied().collect::<Vec<f64>>();
    let complement = order[..rank].iter().map(|&i| row(i)).collect();
    let kernel = order[rank..].iter().map(|&i| row(i)).collect();
    (kernel, complement)
}

/// Reduced row echelon form in place; returns the pivot columns.
fn rref<S: Scalar>(m: &mut [Vec<S>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = S::one() / m[r][c].clone();
        for x in m[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let factor = m[i][c].clone();
                for j in 0..cols {
                    let delta = factor.clone() * m[r][j].clone();
                    m[i][j] = m[i][j].clone() - delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Rank by elimination; only meaningful for exact scalars.
pub fn exact_rank<S: Scalar>(m: &[Vec<S>]) -> usize {
    rref(&mut m.to_vec()).len()
}

/// Exact elimination for exact scalars, thresholded SVD otherwise.
pub fn rank<S: Scalar>(m: &[Vec<S>], rel_tol: f64) -> usize {
    if S::EXACT {
        exact_rank(m)
    } else {
        numeric_rank(&to_dmatrix(m), rel_tol)
    }
}

/// Kernel basis with one free coordinate set to 1 per vector.
pub fn exact_kernel<S: Scalar>(m: &[Vec<S>]) -> Vec<Vec<S>> {
    let cols = m.first().map_or(0, Vec::len);
    let mut r = m.to_vec();
    let pivots = rref(&mut r);
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut x = vec![S::zero(); cols];
            x[free] = S::one();
            for (row, &pc) in pivots.iter().enumerate() {
                x[pc] = -r[row][free].clone();
            }
            x
        })
        .collect()
}

/// A vector completing `basis` to a basis, chosen among coordinate vectors.
pub fn exact_complement<S: Scalar>(basis: &[Vec<S>], dim: usize) -> Option<Vec<S>> {
    (0..dim).find_map(|i| {
        let mut e = vec![S::zero(); dim];
        e[i] = S::one();
        let mut rows = basis.to_vec();
        rows.push(e.clone());
        (exact_rank(&rows) == basis.len() + 1).then_some(e)
    })
}

/// Determinant by cofactor expansion; sizes here never exceed 3.
pub fn det<S: Scalar>(m: &[Vec<S>]) -> S {
    match m.len() {
        0 => S::one(),
        1 => m[0][0].clone(),
        2 => m[0][0].clone() * m[1][1].clone() - m[0][1].clone() * m[1][0].clone(),
        n => {
            let mut acc = S::zero();
            for col in 0..n {
                let minor: Vec<Vec<S>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(j, _)| j != col)
                            .map(|(_, x)| x.clone())
                            .collect()
                    })
                    .collect();
                let term = m[0][col].clone() * det(&minor);
                acc = if col % 2 == 0 { acc + term } else { acc - term };
            }
            acc
        }
    }
}

pub fn to_dmatrix<S: Scalar>(m: &[Vec<S>]) -> DMatrix<f64> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    DMatrix::from_fn(rows, cols, |i, j| m[i][j].to_f64())
}
