//! Model constants and the normalization equation for the reaction-zone width.
//!
//! With ignition temperature θᵢ the width R of the reaction zone solves
//! `θᵢ R = 1 − e^{−R}`; the reaction rate is normalized to `A = 1/R` so the
//! planar front travels with unit speed.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Physical and numerical constants of one run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Params<T> {
    /// Ignition temperature θᵢ in (0, 1).
    pub theta_i: T,
    /// Lewis number.
    pub le: T,
    /// Strip width ℓ.
    pub ell: T,
    /// Reaction-zone width R.
    pub r: T,
    /// Normalizing factor 1/R.
    pub a_norm: T,
    /// Half width of the mollifier plateau.
    pub delta: T,
    /// Left extent A of the computational domain, ξ ∈ [−A, B].
    pub a_ext: T,
    /// Right extent B of the computational domain.
    pub b_ext: T,
}

impl<T: Real> Params<T> {
    /// Builds constants with the defaults δ = R/8 and A = B = 10.
    pub fn new(theta_i: T, le: T, ell: T) -> Result<Self> {
        let r = solve_r(theta_i)?;
        Self::with_geometry(theta_i, le, ell, r / T::lit(8.0), T::lit(10.0), T::lit(10.0))
    }

    /// Builds constants with explicit mollifier width and domain extents.
    pub fn with_geometry(theta_i: T, le: T, ell: T, delta: T, a_ext: T, b_ext: T) -> Result<Self> {
        let r = solve_r(theta_i)?;
        let p = Params {
            theta_i,
            le,
            ell,
            r,
            a_norm: T::one() / r,
            delta,
            a_ext,
            b_ext,
        };
        p.validate()?;
        Ok(p)
    }

    /// Returns a copy with a different Lewis number.
    pub fn with_le(&self, le: T) -> Result<Self> {
        let p = Params { le, ..*self };
        p.validate()?;
        Ok(p)
    }

    /// Returns a copy with different domain extents.
    pub fn with_extents(&self, a_ext: T, b_ext: T) -> Result<Self> {
        let p = Params {
            a_ext,
            b_ext,
            ..*self
        };
        p.validate()?;
        Ok(p)
    }

    /// Returns a copy with a different strip width.
    pub fn with_ell(&self, ell: T) -> Result<Self> {
        let p = Params { ell, ..*self };
        p.validate()?;
        Ok(p)
    }

    /// Checks the invariants of the constants.
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &'static str, reason: String| Err(Error::InvalidParameter { field, reason });
        let two = T::lit(2.0);
        if !(self.theta_i > T::zero() && self.theta_i < T::one()) {
            return bad("theta_i", format!("{} not in (0, 1)", self.theta_i));
        }
        if !(self.le > T::zero()) || !self.le.is_finite() {
            return bad("le", format!("{} must be positive", self.le));
        }
        if !(self.ell > T::zero()) || !self.ell.is_finite() {
            return bad("ell", format!("{} must be positive", self.ell));
        }
        let resid = (self.theta_i * self.r - (T::one() - (-self.r).exp())).abs();
        if resid > T::tight_tol() {
            return bad("r", format!("normalization residual {resid}"));
        }
        if !(self.delta > T::zero() && two * self.delta < self.r) {
            return bad("delta", format!("need 0 < 2 delta < R = {}, got {}", self.r, self.delta));
        }
        if !(self.a_ext > two * self.delta) {
            return bad("a_ext", format!("need A > 2 delta, got {}", self.a_ext));
        }
        if !(self.b_ext > self.r + two * self.delta) {
            return bad("b_ext", format!("need B > R + 2 delta, got {}", self.b_ext));
        }
        Ok(())
    }

    /// Transverse eigenvalue of mode k for this strip width.
    pub fn lambda_k(&self, k: usize) -> T {
        lambda_k(self.ell, k)
    }
}

/// Solves `θᵢ R = 1 − e^{−R}` for the positive root R.
///
/// Safeguarded Newton iteration inside a bisection bracket.
pub fn solve_r<T: Real>(theta_i: T) -> Result<T> {
    if !(theta_i > T::zero() && theta_i < T::one()) {
        return Err(Error::Domain(format!("theta_i = {theta_i} not in (0, 1)")));
    }
    let g = |x: T| theta_i * x + (-x).exp_m1();
    let dg = |x: T| theta_i - (-x).exp();
    let mut lo = T::lit(1e-8);
    // θᵢ R < 1 so the root lies below 1/θᵢ; widen the bracket for small θᵢ.
    let mut hi = T::lit(50.0).max(T::lit(2.0) / theta_i);
    if g(lo) >= T::zero() {
        return Err(Error::Domain(format!(
            "theta_i = {theta_i} too close to 1: root below {lo}"
        )));
    }
    let mut x = T::lit(2.0) * (T::one() - theta_i).max(T::lit(1e-3));
    if !(x > lo && x < hi) {
        x = (lo + hi) / T::lit(2.0);
    }
    for _ in 0..200 {
        let gx = g(x);
        if gx < T::zero() {
            lo = x;
        } else {
            hi = x;
        }
        let d = dg(x);
        let mut next = x - gx / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = (lo + hi) / T::lit(2.0);
        }
        if (next - x).abs() <= T::epsilon() * x.abs() * T::lit(4.0) {
            x = next;
            break;
        }
        x = next;
    }
    Ok(x)
}

/// Transverse eigenvalue `λ_k = 4π²k²/ℓ²`.
pub fn lambda_k<T: Real>(ell: T, k: usize) -> T {
    let kk = T::from_usize(k).expect("mode index representable");
    let two_pi = T::lit(2.0) * T::PI();
    (two_pi * kk / ell).powi(2)
}

/// Long-strip limit of the critical Lewis number, `R / (2e^R − R − 2)`.
pub fn le_zero<T: Real>(r: T) -> T {
    // 2e^R − R − 2 = 2(e^R − 1) − R, written with expm1 for small R.
    let den = T::lit(2.0) * r.exp_m1() - r;
    let le0 = r / den;
    debug_assert!(le0 > T::zero() && le0 < T::one());
    le0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bisect(theta: f64) -> f64 {
        let g = |x: f64| theta * x - 1.0 + (-x).exp();
        let (mut lo, mut hi) = (1e-8, 50.0);
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn r_at_three_quarters() {
        let r = solve_r(0.75_f64).unwrap();
        assert!((r - 0.60586).abs() < 1e-5, "{r}");
        assert!((0.75 * r - 1.0 + (-r).exp()).abs() < 1e-12);
    }

    #[test]
    fn r_matches_bisection_at_one_half() {
        let r = solve_r(0.5_f64).unwrap();
        assert!((r - bisect(0.5)).abs() < 1e-10);
    }

    #[test]
    fn r_in_single_precision() {
        let r = solve_r(0.75_f32).unwrap();
        assert!((r - 0.605_86).abs() < 1e-4);
    }

    #[test]
    fn r_rejects_out_of_range() {
        assert!(solve_r(0.0_f64).is_err());
        assert!(solve_r(1.0_f64).is_err());
        assert!(solve_r(-0.5_f64).is_err());
    }

    #[test]
    fn r_small_theta_beyond_default_bracket() {
        let r = solve_r(0.01_f64).unwrap();
        assert!((0.01 * r - 1.0 + (-r).exp()).abs() < 1e-12);
    }

    #[test]
    fn r_decreasing_in_theta() {
        let mut prev = f64::INFINITY;
        for i in 1..=100 {
            let th = i as f64 / 101.0;
            let r = solve_r(th).unwrap();
            assert!(r < prev);
            prev = r;
        }
    }

    #[test]
    fn lambda_k_values() {
        let l1: f64 = lambda_k(100.0, 1);
        assert!((l1.sqrt() - std::f64::consts::PI / 50.0).abs() < 1e-15);
        assert_eq!(lambda_k(37.0_f64, 0), 0.0);
        assert!((lambda_k(100.0_f64, 2) - 4.0 * l1).abs() < 1e-15);
    }

    #[test]
    fn le_zero_values() {
        let r = solve_r(0.75_f64).unwrap();
        let le0 = le_zero(r);
        let oracle = r / (2.0 * r.exp() - r - 2.0);
        assert!((le0 - oracle).abs() < 1e-14);
        assert!((le0 - 0.5716).abs() < 1e-3, "{le0}");
        assert!((le_zero(1e-7_f64) - 1.0).abs() < 1e-6);
        for i in 1..=50 {
            let v = le_zero(i as f64 * 0.1);
            assert!(v > 0.0 && v < 1.0);
        }
    }

    #[test]
    fn params_defaults_and_validation() {
        let p = Params::<f64>::new(0.75, 0.3, 100.0).unwrap();
        assert!((p.delta - p.r / 8.0).abs() < 1e-15);
        assert_eq!(p.a_ext, 10.0);
        assert_eq!(p.b_ext, 10.0);
        assert!((p.a_norm * p.r - 1.0).abs() < 1e-15);
        assert!(Params::new(0.75, 0.3, -1.0).is_err());
        assert!(p.with_extents(0.01, 10.0).is_err());
        assert!(Params::with_geometry(0.75, 0.3, 100.0, 0.4, 10.0, 10.0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn round_trip_theta(theta in 0.01f64..0.99) {
            let r = solve_r(theta).unwrap();
            proptest::prop_assert!(((1.0 - (-r).exp()) / r - theta).abs() < 1e-12);
        }
    }
}
