use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::scalar::Scalar;
use crate::stats::{f_tail_p, t_tail_p};

/// Classical least-squares fit with per-coefficient inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit<T> {
    pub names: Vec<String>,
    pub estimates: Vec<T>,
    pub std_errors: Vec<T>,
    pub t_stats: Vec<T>,
    pub p_values: Vec<T>,
    /// `sqrt(SSE / (n - p))`.
    pub rmse: T,
    pub r2: T,
    /// F statistic of the model against the intercept-only model; `None`
    /// when the design has no slope columns.
    pub f_stat: Option<T>,
    pub f_p_value: Option<T>,
    pub n_obs: usize,
    pub df_error: usize,
    pub has_intercept: bool,
    #[serde(skip)]
    pub residuals: Vec<T>,
}

impl<T: Scalar> OlsFit<T> {
    pub fn estimate(&self, name: &str) -> Option<T> {
        self.index_of(name).map(|i| self.estimates[i])
    }

    pub fn std_error(&self, name: &str) -> Option<T> {
        self.index_of(name).map(|i| self.std_errors[i])
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn sse(&self) -> T {
        self.residuals.iter().map(|&r| r * r).sum()
    }
}

fn is_intercept_column<T: Scalar>(c: &[T]) -> bool {
    c.first().is_some_and(|&v| v != T::zero() && c.iter().all(|&x| x == v))
}

/// Fits `y ≈ X b` by Householder QR. A constant nonzero column is treated as
/// the intercept for R² and the F test.
pub fn ols<T: Scalar, S: AsRef<str>>(columns: &[Vec<T>], y: &[T], names: &[S]) -> Result<OlsFit<T>> {
    let p = columns.len();
    let n = y.len();
    if names.len() != p {
        return Err(Error::Domain(format!("{} names for {p} columns", names.len())));
    }
    if p == 0 {
        return Err(Error::Domain("empty design".into()));
    }
    if n < p + 1 {
        return Err(Error::InsufficientData(format!("{n} rows cannot fit {p} coefficients with inference")));
    }
    if let Some(c) = columns.iter().position(|c| c.len() != n) {
        return Err(Error::Domain(format!("column `{}` has wrong length", names[c].as_ref())));
    }
    let sol = least_squares(columns, y).map_err(|d| Error::SingularDesign {
        column: names[d.column].as_ref().to_string(),
        depends_on: d.depends_on.iter().map(|&i| names[i].as_ref().to_string()).collect(),
    })?;

    let df_error = n - p;
    let dfe = T::from_usize_lossy(df_error);
    let sse: T = sol.residuals.iter().map(|&r| r * r).sum();
    let sigma2 = sse / dfe;
    let mut std_errors = Vec::with_capacity(p);
    let mut t_stats = Vec::with_capacity(p);
    let mut p_values = Vec::with_capacity(p);
    for (&b, &d) in sol.coefficients.iter().zip(&sol.xtx_inv_diag) {
        let se = (sigma2 * d).sqrt();
        let (t, pv) = if se > T::zero() {
            let t = b / se;
            (t, t_tail_p(t, dfe)?)
        } else if b != T::zero() {
            (b.signum() * T::infinity(), T::zero())
        } else {
            (T::zero(), T::one())
        };
        std_errors.push(se);
        t_stats.push(t);
        p_values.push(pv);
    }

    let has_intercept = columns.iter().any(|c| is_intercept_column(c));
    let nf = T::from_usize_lossy(n);
    let sst = if has_intercept {
        let mean = y.iter().copied().sum::<T>() / nf;
        y.iter().map(|&v| (v - mean) * (v - mean)).sum()
    } else {
        y.iter().map(|&v| v * v).sum()
    };
    let r2 = if sst > T::zero() {
        (T::one() - sse / sst).max(T::zero()).min(T::one())
    } else {
        T::one()
    };
    let df_model = if has_intercept { p - 1 } else { p };
    let (f_stat, f_p_value) = if df_model == 0 {
        (None, None)
    } else if sse == T::zero() {
        (Some(T::max_value()), Some(T::zero()))
    } else {
        let f = ((sst - sse).max(T::zero()) / T::from_usize_lossy(df_model)) / sigma2;
        (Some(f), Some(f_tail_p(f, T::from_usize_lossy(df_model), dfe)?))
    };

    Ok(OlsFit {
        names: names.iter().map(|s| s.as_ref().to_string()).collect(),
        estimates: sol.coefficients,
        std_errors,
        t_stats,
        p_values,
        rmse: sigma2.sqrt(),
        r2,
        f_stat,
        f_p_value,
        n_obs: n,
        df_error,
        has_intercept,
        residuals: sol.residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_linear_fit() {
        let x: Vec<f64> = (0..12).map(|i| i as f64 * 0.5).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let fit = ols(&[x, vec![1.0; 12]], &y, &["x", "const"]).unwrap();
        assert!((fit.estimates[0] - 2.0).abs() < 1e-12);
        assert!((fit.estimates[1] - 1.0).abs() < 1e-12);
        assert_eq!(fit.r2, 1.0);
        assert!(fit.rmse < 1e-12);
        assert!(fit.has_intercept);
    }

    #[test]
    fn singular_design_names_columns() {
        let a: Vec<f64> = (0..6).map(f64::from).collect();
        let b: Vec<f64> = a.iter().map(|v| 2.0 * v).collect();
        let y = vec![1.0, 3.0, 2.0, 5.0, 4.0, 6.0];
        let err = ols(&[vec![1.0; 6], a, b], &y, &["const", "a", "b"]).unwrap_err();
        assert_eq!(err, Error::SingularDesign { column: "b".into(), depends_on: vec!["a".into()] });
    }

    #[test]
    fn too_few_rows() {
        let err = ols(&[vec![1.0; 2], vec![1.0, 2.0]], &[1.0, 2.0], &["c", "x"]).unwrap_err();
        assert!(matches!(err, Error::InsufficientData(_)));
    }

    #[test]
    fn intercept_only_has_no_f() {
        let fit = ols(&[vec![1.0; 4]], &[1.0, 2.0, 3.0, 4.0], &["c"]).unwrap();
        assert_eq!(fit.estimates[0], 2.5);
        assert!(fit.f_stat.is_none());
        assert_eq!(fit.r2, 0.0);
    }
}
