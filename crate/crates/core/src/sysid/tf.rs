use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::arx::{ArxModel, InputTransform};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `B(z⁻¹) / A(z⁻¹)`; index `i` of either vector multiplies `z⁻ⁱ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferFunction<T> {
    pub numerator: Vec<T>,
    /// Leading coefficient is always 1.
    pub denominator: Vec<T>,
}

impl<T: Scalar> TransferFunction<T> {
    /// Numerator `Σ βⱼ z⁻ʲ`, denominator `1 - Σ αᵢ z⁻ⁱ`.
    pub fn from_model(model: &ArxModel<T>) -> Self {
        let nd = model.ar_lags.last().copied().unwrap_or(0);
        let mut denominator = vec![T::zero(); nd + 1];
        denominator[0] = T::one();
        for (&l, &a) in model.ar_lags.iter().zip(&model.ar_coeffs) {
            denominator[l] = -a;
        }
        let nn = model.x_lags.last().copied().unwrap_or(0);
        let mut numerator = vec![T::zero(); nn + 1];
        for (&l, &b) in model.x_lags.iter().zip(&model.x_coeffs) {
            numerator[l] = b;
        }
        Self { numerator, denominator }
    }

    pub fn new(numerator: Vec<T>, denominator: Vec<T>) -> Result<Self> {
        if denominator.first() != Some(&T::one()) {
            return Err(Error::InvalidSpec("denominator must start with 1".into()));
        }
        Ok(Self { numerator: if numerator.is_empty() { vec![T::zero()] } else { numerator }, denominator })
    }

    /// Inverse of [`TransferFunction::from_model`]: nonzero terms become lags.
    pub fn to_model(
        &self,
        intercept: T,
        transform: InputTransform,
        noise_std: T,
        interval_mins: u32,
    ) -> Result<ArxModel<T>> {
        let ar = (1..self.denominator.len())
            .filter(|&i| self.denominator[i] != T::zero())
            .map(|i| (i, -self.denominator[i]))
            .collect();
        let x = (1..self.numerator.len())
            .filter(|&i| self.numerator[i] != T::zero())
            .map(|i| (i, self.numerator[i]))
            .collect();
        if self.numerator[0] != T::zero() {
            return Err(Error::InvalidSpec("numerator has a direct (lag 0) term".into()));
        }
        ArxModel::new(ar, x, intercept, transform, noise_std, interval_mins)
    }

    /// Steady-state gain `B(1) / A(1)`.
    pub fn dc_gain(&self) -> Result<T> {
        let a: T = self.denominator.iter().copied().sum();
        if a == T::zero() {
            return Err(Error::Domain("denominator vanishes at z = 1".into()));
        }
        Ok(self.numerator.iter().copied().sum::<T>() / a)
    }

    /// Characteristic polynomial `zᵐ + a₁zᵐ⁻¹ + … + aₘ` in descending powers,
    /// with trailing zero coefficients of the denominator dropped.
    pub fn characteristic(&self) -> Vec<T> {
        let last = self.denominator.iter().rposition(|&c| c != T::zero()).unwrap_or(0);
        self.denominator[..=last].to_vec()
    }
}

/// Roots of `c[0] zⁿ + c[1] zⁿ⁻¹ + … + c[n]` by Aberth iteration with a
/// final Newton polish.
pub fn polynomial_roots<T: Scalar>(coeffs: &[T]) -> Result<Vec<Complex<T>>> {
    let first = coeffs.iter().position(|&c| c != T::zero());
    let Some(first) = first else {
        return Err(Error::Degenerate("zero polynomial".into()));
    };
    let lead = coeffs[first];
    let mut c: Vec<T> = coeffs[first..].iter().map(|&v| v / lead).collect();
    let mut roots = Vec::new();
    while c.len() > 1 && *c.last().unwrap() == T::zero() {
        c.pop();
        roots.push(Complex::new(T::zero(), T::zero()));
    }
    let n = c.len() - 1;
    if n == 0 {
        return Ok(roots);
    }
    if n == 1 {
        roots.push(Complex::new(-c[1], T::zero()));
        return Ok(roots);
    }

    let eval = |z: Complex<T>| {
        let mut p = Complex::new(c[0], T::zero());
        let mut dp = Complex::new(T::zero(), T::zero());
        for &ci in &c[1..] {
            dp = dp * z + p;
            p = p * z + ci;
        }
        (p, dp)
    };

    let radius = (1..=n)
        .map(|i| c[i].abs().powf(T::one() / T::from_usize_lossy(i)))
        .fold(T::zero(), T::max)
        .max(T::lit(1e-3));
    let two_pi = T::PI() + T::PI();
    let mut z: Vec<Complex<T>> = (0..n)
        .map(|k| {
            let theta = two_pi * T::from_usize_lossy(k) / T::from_usize_lossy(n) + T::lit(0.4);
            Complex::from_polar(radius, theta)
        })
        .collect();

    let eps = T::epsilon();
    for _ in 0..1000 {
        let mut moved = T::zero();
        for k in 0..n {
            let (p, dp) = eval(z[k]);
            if p.norm() == T::zero() {
                continue;
            }
            let ratio = p / dp;
            let s: Complex<T> = (0..n)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b);
            let w = ratio / (Complex::new(T::one(), T::zero()) - ratio * s);
            if w.re.is_finite() && w.im.is_finite() {
                z[k] = z[k] - w;
                moved = moved.max(w.norm() / z[k].norm().max(T::one()));
            }
        }
        if moved < eps {
            break;
        }
    }
    for zk in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = eval(*zk);
            if dp.norm() == T::zero() {
                break;
            }
            let step = p / dp;
            if !(step.re.is_finite() && step.im.is_finite()) {
                break;
            }
            *zk = *zk - step;
        }
    }
    roots.extend(z);
    Ok(roots)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport<T> {
    pub roots_re: Vec<T>,
    pub roots_im: Vec<T>,
    pub moduli: Vec<T>,
    pub max_modulus: T,
    /// Every root strictly inside the unit circle.
    pub stable: bool,
    /// Largest root lies on the unit circle within tolerance.
    pub marginal: bool,
}

/// Roots of the characteristic polynomial in `z`. Stable iff every root
/// lies strictly inside the unit circle.
pub fn stability<T: Scalar>(tf: &TransferFunction<T>) -> Result<StabilityReport<T>> {
    let roots = polynomial_roots(&tf.characteristic())?;
    let moduli: Vec<T> = roots.iter().map(|r| r.norm()).collect();
    let max_modulus = moduli.iter().copied().fold(T::zero(), T::max);
    let tol = T::lit(10.0) * T::epsilon().sqrt();
    let marginal = (max_modulus - T::one()).abs() <= tol;
    Ok(StabilityReport {
        roots_re: roots.iter().map(|r| r.re).collect(),
        roots_im: roots.iter().map(|r| r.im).collect(),
        moduli,
        max_modulus,
        stable: max_modulus < T::one() - tol,
        marginal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_order() {
        let tf = TransferFunction::new(vec![0.0, 1.0], vec![1.0, -0.5]).unwrap();
        let s = stability(&tf).unwrap();
        assert_eq!(s.moduli, vec![0.5]);
        assert!(s.stable && !s.marginal);
    }

    #[test]
    fn unit_root_is_marginal() {
        let tf = TransferFunction::new(vec![0.0], vec![1.0, -1.0]).unwrap();
        let s = stability(&tf).unwrap();
        assert!(s.marginal && !s.stable);
    }

    #[test]
    fn known_roots() {
        // (z - 2)(z + 0.5)(z² + 1)
        let r = polynomial_roots(&[1.0, -1.5, 0.0, -1.5, -1.0]).unwrap();
        let mut m: Vec<f64> = r.iter().map(|z| z.norm()).collect();
        m.sort_by(f64::total_cmp);
        for (a, b) in m.iter().zip([0.5, 1.0, 1.0, 2.0]) {
            assert!((a - b).abs() < 1e-12, "{m:?}");
        }
        let r = polynomial_roots(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn pure_ar_has_zero_numerator() {
        let m = ArxModel::new(vec![(1, 0.3)], vec![], 1.0, InputTransform::Identity, 1.0, 15).unwrap();
        let tf = TransferFunction::from_model(&m);
        assert_eq!(tf.numerator, vec![0.0]);
        assert_eq!(tf.denominator, vec![1.0, -0.3]);
    }

    #[test]
    fn f32_roots() {
        let r = polynomial_roots(&[1.0f32, -0.9, 0.2]).unwrap();
        let mut m: Vec<f32> = r.iter().map(|z| z.norm()).collect();
        m.sort_by(f32::total_cmp);
        assert!((m[0] - 0.4).abs() < 1e-5 && (m[1] - 0.5).abs() < 1e-5);
    }
}
