use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest eigenvalue modulus of a square matrix.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::invalid("spectral radius needs a non-empty square matrix"));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let n = m.nrows();
    if m.amax() == 0.0 {
        return Ok(0.0);
    }
    // nalgebra's real Schur iteration stalls on many ring-with-jump
    // matrices, so eigenvalues come from faer.
    let dense = faer::Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)]);
    let eigenvalues = dense
        .eigenvalues()
        .map_err(|e| Error::Numerical(format!("eigenvalue computation failed: {e:?}")))?;
    let radius = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !radius.is_finite() {
        return Err(Error::Numerical("non-finite eigenvalue".into()));
    }
    Ok(radius)
}

/// Multiplies `m` by one positive factor so its spectral radius becomes
/// `scaling`.
pub fn spectral_rescale(m: &DMatrix<f64>, scaling: f64) -> Result<DMatrix<f64>> {
    if !(scaling.is_finite() && scaling > 0.0) {
        return Err(Error::invalid(format!("scaling {scaling} must be positive")));
    }
    let radius = spectral_radius(m)?;
    // Eigenvalues of a nilpotent matrix come back as rounding noise.
    let noise = f64::EPSILON * m.norm() * m.nrows() as f64;
    if radius <= noise {
        return Err(Error::ZeroSpectralRadius);
    }
    Ok(m * (scaling / radius))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize, w: f64) -> DMatrix<f64> {
        let mut r = DMatrix::zeros(n, n);
        for i in 0..n {
            r[((i + 1) % n, i)] = w;
        }
        r
    }

    #[test]
    fn cycle_radius_is_its_weight() {
        for n in [2, 3, 5, 16, 64, 128] {
            let r = spectral_radius(&cycle(n, 0.5)).unwrap();
            assert!((r - 0.5).abs() < 1e-12, "n={n}: {r}");
        }
    }

    #[test]
    fn rescaled_cycle_entries() {
        let out = spectral_rescale(&cycle(6, 0.5), 0.85).unwrap();
        for i in 0..6 {
            assert!((out[((i + 1) % 6, i)] - 0.85).abs() < 1e-12);
        }
        assert_eq!(out.iter().filter(|v| **v != 0.0).count(), 6);
    }

    #[test]
    fn unit_radius_unchanged_and_idempotent() {
        let m = cycle(5, 1.0);
        let out = spectral_rescale(&m, 1.0).unwrap();
        assert!((out - &m).amax() < 1e-12);

        let mut j = cycle(7, 0.3);
        j[(0, 3)] = 0.9;
        j[(3, 0)] = 0.9;
        let once = spectral_rescale(&j, 0.7).unwrap();
        let twice = spectral_rescale(&once, 0.7).unwrap();
        assert!((once - twice).amax() < 1e-10);
    }

    #[test]
    fn nilpotent_is_rejected() {
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 1)] = 1.0;
        m[(1, 2)] = 2.0;
        m[(2, 3)] = 0.5;
        assert!(matches!(spectral_rescale(&m, 0.9), Err(Error::ZeroSpectralRadius)));
        assert!(matches!(
            spectral_rescale(&DMatrix::zeros(3, 3), 0.9),
            Err(Error::ZeroSpectralRadius)
        ));
    }
}
