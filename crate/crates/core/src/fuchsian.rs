//! Closed-form quantities of the Fuchsian (umbilic) CMC foliation.
//!
//! Every leaf is umbilic with shape operator `tau Id`, so the Gauss equation
//! gives curvature `-(1 + tau^2)`, the lapse is the constant `1/(1 + tau^2)`
//! and Gauss-Bonnet fixes the leaf area at `2 pi |chi| / (1 + tau^2)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::slicegen::ShapeOperatorSample;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuchsianSlice {
    pub tau: f64,
    pub curvature: f64,
    pub lapse: f64,
    pub area: f64,
}

impl FuchsianSlice {
    /// `B = tau Id`
    pub fn shape_operator(&self) -> ShapeOperatorSample {
        ShapeOperatorSample { b11: self.tau, b12: 0.0, b22: self.tau }
    }

    /// Volume per unit `tau`: leaf area times lapse.
    pub fn density(&self) -> f64 {
        self.area * self.lapse
    }
}

/// Euler characteristics of closed orientable surfaces of genus >= 2.
pub fn check_euler_characteristic(chi: i64) -> Result<()> {
    if chi <= -2 && chi % 2 == 0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "Euler characteristic must be even and <= -2, got {chi}"
        )))
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("tau must be finite, got {tau}")))
    }
}

pub fn fuchsian_slice(tau: f64, chi: i64) -> Result<FuchsianSlice> {
    check_euler_characteristic(chi)?;
    check_tau(tau)?;
    let q = 1.0 + tau * tau;
    Ok(FuchsianSlice {
        tau,
        curvature: -q,
        lapse: 1.0 / q,
        area: 2.0 * PI * chi.unsigned_abs() as f64 / q,
    })
}

/// `pi^2 |chi|`
pub fn fuchsian_volume(chi: i64) -> Result<f64> {
    check_euler_characteristic(chi)?;
    Ok(PI * PI * chi.unsigned_abs() as f64)
}

/// `2 pi |chi| / (1 + tau^2)^2`
pub fn fuchsian_density(tau: f64, chi: i64) -> Result<f64> {
    check_euler_characteristic(chi)?;
    check_tau(tau)?;
    let q = 1.0 + tau * tau;
    Ok(2.0 * PI * chi.unsigned_abs() as f64 / (q * q))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn slice_at_tau_zero() {
        let s = fuchsian_slice(0.0, -2).unwrap();
        assert_eq!(s.curvature, -1.0);
        assert_eq!(s.lapse, 1.0);
        assert!((s.area - 4.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn slice_at_tau_one() {
        let s = fuchsian_slice(1.0, -2).unwrap();
        assert_eq!(s.curvature, -2.0);
        assert_eq!(s.lapse, 0.5);
        assert!((s.area - 2.0 * PI).abs() < 1e-15);
        assert_eq!(fuchsian_slice(-1.0, -2).unwrap().density(), s.density());
    }

    #[test]
    fn umbilic_shape_operator() {
        let b = fuchsian_slice(0.7, -4).unwrap().shape_operator();
        assert_eq!(b.umbilicity_defect(), 0.0);
        assert_eq!(b.mean_curvature(), 0.7);
        assert!((b.gauss_curvature() + 1.0 + 0.49).abs() < 1e-15);
    }

    #[test]
    fn volumes() {
        assert!((fuchsian_volume(-2).unwrap() - 19.739_208_802_178_716).abs() < 1e-12);
        assert_eq!(fuchsian_volume(-4).unwrap(), 4.0 * PI * PI);
    }

    #[test]
    fn densities() {
        assert!((fuchsian_density(0.0, -2).unwrap() - 4.0 * PI).abs() < 1e-15);
        assert!((fuchsian_density(1.0, -2).unwrap() - PI).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_euler_characteristic() {
        for chi in [0, 2, -3, -1] {
            assert!(matches!(fuchsian_volume(chi), Err(Error::Domain(_))));
            assert!(matches!(fuchsian_slice(0.0, chi), Err(Error::Domain(_))));
        }
        assert!(fuchsian_density(f64::NAN, -2).is_err());
    }

    proptest! {
        #[test]
        fn lapse_times_one_plus_tau_sq_is_one(tau in -50.0f64..50.0) {
            let s = fuchsian_slice(tau, -2).unwrap();
            prop_assert!((s.lapse * (1.0 + tau * tau) - 1.0).abs() <= 2.0 * f64::EPSILON);
            prop_assert!(s.lapse > 0.0 && s.lapse <= 1.0);
        }

        #[test]
        fn density_is_even_and_decreasing(a in 0.0f64..20.0, b in 0.0f64..20.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-6);
            let d = |t| fuchsian_density(t, -2).unwrap();
            prop_assert_eq!(d(lo), d(-lo));
            prop_assert!(d(hi) < d(lo));
        }
    }
}
