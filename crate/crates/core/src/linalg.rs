//! Dense Householder QR for tall least-squares problems.

use crate::scalar::Scalar;

/// Least-squares solution of `X b ≈ y`.
#[derive(Debug, Clone)]
pub struct LsSolution<T> {
    pub coefficients: Vec<T>,
    pub residuals: Vec<T>,
    /// Diagonal of `(XᵀX)⁻¹`, obtained as the row norms of `R⁻¹`.
    pub xtx_inv_diag: Vec<T>,
}

/// Column `column` is (numerically) a combination of the listed earlier columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankDeficiency {
    pub column: usize,
    pub depends_on: Vec<usize>,
}

/// Solves the least-squares problem for a design given as columns, each of
/// length `n`. Requires `n >= p`.
pub fn least_squares<T: Scalar>(columns: &[Vec<T>], y: &[T]) -> Result<LsSolution<T>, RankDeficiency> {
    let p = columns.len();
    let n = y.len();
    assert!(columns.iter().all(|c| c.len() == n), "ragged design");
    assert!(n >= p, "underdetermined least squares");

    let mut a: Vec<Vec<T>> = columns.to_vec();
    let mut qty: Vec<T> = y.to_vec();
    let norm = |v: &[T]| v.iter().fold(T::zero(), |s, &x| s.hypot(x));
    let scale = columns.iter().map(|c| norm(c)).fold(T::zero(), T::max);
    let tol = T::lit(10.0) * T::from_usize_lossy(n.max(p)) * T::epsilon() * scale;

    for j in 0..p {
        let alpha = norm(&a[j][j..]);
        if !(alpha > tol) {
            return Err(RankDeficiency { column: j, depends_on: dependency(&a, j) });
        }
        let alpha = if a[j][j] > T::zero() { -alpha } else { alpha };
        // v = x - alpha e1, stored in place of column j below the diagonal
        let mut v: Vec<T> = a[j][j..].to_vec();
        v[0] = v[0] - alpha;
        let vnorm2: T = v.iter().map(|&x| x * x).sum();
        let reflect = |col: &mut [T]| {
            let dot: T = v.iter().zip(col.iter()).map(|(&a, &b)| a * b).sum();
            let f = (dot + dot) / vnorm2;
            for (c, &vi) in col.iter_mut().zip(v.iter()) {
                *c = *c - f * vi;
            }
        };
        for col in a.iter_mut().skip(j + 1) {
            reflect(&mut col[j..]);
        }
        reflect(&mut qty[j..]);
        a[j][j] = alpha;
        for x in a[j][j + 1..].iter_mut() {
            *x = T::zero();
        }
    }

    // back substitution on R b = (Qᵀy)[..p]
    let mut b = vec![T::zero(); p];
    for i in (0..p).rev() {
        let s: T = ((i + 1)..p).map(|k| a[k][i] * b[k]).sum();
        b[i] = (qty[i] - s) / a[i][i];
    }

    // R⁻¹ is upper triangular; column-major like `a`.
    let mut rinv = vec![vec![T::zero(); p]; p];
    for j in 0..p {
        rinv[j][j] = T::one() / a[j][j];
        for i in (0..j).rev() {
            let s: T = ((i + 1)..=j).map(|k| a[k][i] * rinv[j][k]).sum();
            rinv[j][i] = -s / a[i][i];
        }
    }
    let xtx_inv_diag = (0..p)
        .map(|i| (i..p).map(|j| rinv[j][i] * rinv[j][i]).sum())
        .collect();

    let residuals = (0..n)
        .map(|r| y[r] - columns.iter().zip(&b).map(|(c, &bj)| c[r] * bj).sum::<T>())
        .collect();
    Ok(LsSolution { coefficients: b, residuals, xtx_inv_diag })
}

/// For a dependent column `j`, solves the leading triangle for the
/// combination of earlier columns that reproduces it.
fn dependency<T: Scalar>(a: &[Vec<T>], j: usize) -> Vec<usize> {
    let mut c = vec![T::zero(); j];
    for i in (0..j).rev() {
        let s: T = ((i + 1)..j).map(|k| a[k][i] * c[k]).sum();
        c[i] = (a[j][i] - s) / a[i][i];
    }
    let cmax = c.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let cut = cmax * T::epsilon().sqrt();
    (0..j).filter(|&i| c[i].abs() > cut && c[i] != T::zero()).collect()
}
