//! Planar traveling wave (Θ⁰, Φ⁰) in the frame moving with the front.
//!
//! The trailing interface sits at x = 0 and the ignition interface at x = R.
//! Both profiles are C¹; their second derivatives jump at the interfaces.

use crate::error::{Error, Result};
use crate::params::Params;
use crate::scalar::Real;

/// Which one-sided limit to take at x = 0 or x = R.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Closed-form traveling wave for given θᵢ and Le.
#[derive(Clone, Copy, Debug)]
pub struct WaveProfile<T> {
    pub theta_i: T,
    pub le: T,
    pub r: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Piece {
    Burnt,
    Reaction,
    Fresh,
}

impl<T: Real> WaveProfile<T> {
    pub fn new(params: &Params<T>) -> Self {
        WaveProfile {
            theta_i: params.theta_i,
            le: params.le,
            r: params.r,
        }
    }

    fn piece(&self, x: T, side: Option<Side>) -> Piece {
        if x < T::zero() || (x == T::zero() && side != Some(Side::Right)) {
            Piece::Burnt
        } else if x < self.r || (x == self.r && side == Some(Side::Left)) {
            Piece::Reaction
        } else {
            Piece::Fresh
        }
    }

    /// Temperature profile Θ⁰.
    pub fn theta0(&self, x: T) -> T {
        let r = self.r;
        match self.piece(x, None) {
            Piece::Burnt => T::one(),
            Piece::Reaction => T::one() - (x + (-x).exp_m1()) / r,
            Piece::Fresh => self.theta_i * (r - x).exp(),
        }
    }

    /// Concentration profile Φ⁰.
    pub fn phi0(&self, x: T) -> T {
        let (le, r) = (self.le, self.r);
        match self.piece(x, None) {
            Piece::Burnt => T::zero(),
            Piece::Reaction => (-le * x).exp_m1() / (le * r) + x / r,
            Piece::Fresh => T::one() + self.fresh_phi_coeff() * (-le * x).exp(),
        }
    }

    /// (1 − e^{Le R}) / (Le R), the coefficient of e^{−Le x} ahead of the front.
    fn fresh_phi_coeff(&self) -> T {
        let lr = self.le * self.r;
        -lr.exp_m1() / lr
    }

    /// Derivatives of order 1 to 4 of (Θ⁰, Φ⁰).
    ///
    /// Orders ≥ 2 are two-valued at x = 0 and x = R and need a side.
    pub fn derivatives(&self, x: T, order: u32, side: Option<Side>) -> Result<(T, T)> {
        if order == 0 || order > 4 {
            return Err(Error::Domain(format!("derivative order {order} not in 1..=4")));
        }
        if order >= 2 && side.is_none() && (x == T::zero() || x == self.r) {
            return Err(Error::AmbiguousDerivative {
                x: x.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(self.derivatives_on(x, order, side))
    }

    /// Derivatives on the piece selected by `side` at the kinks; no ambiguity check.
    pub fn derivatives_on(&self, x: T, order: u32, side: Option<Side>) -> (T, T) {
        let (le, r) = (self.le, self.r);
        let sign = if order.is_multiple_of(2) { T::one() } else { -T::one() };
        match self.piece(x, side) {
            Piece::Burnt => (T::zero(), T::zero()),
            Piece::Reaction => {
                let ex = (-x).exp() / r;
                let el = (-le * x).exp() / r;
                if order == 1 {
                    ((-x).exp_m1() / r, -(-le * x).exp_m1() / r)
                } else {
                    // Θ⁰ = 1 − (x + e^{−x} − 1)/R and Φ⁰ = (e^{−Le x} − 1)/(Le R) + x/R
                    let dth = -sign * ex;
                    let dph = sign * le.powi(order as i32 - 1) * el;
                    (dth, dph)
                }
            }
            Piece::Fresh => {
                let th = sign * self.theta_i * (r - x).exp();
                let ph = self.fresh_phi_coeff() * sign * le.powi(order as i32) * (-le * x).exp();
                (th, ph)
            }
        }
    }

    /// Samples (x, Θ⁰, Φ⁰) on a uniform grid.
    pub fn sample(&self, x_min: T, x_max: T, n: usize) -> Vec<(T, T, T)> {
        let n = n.max(2);
        (0..n)
            .map(|i| {
                let s = T::from_usize(i).unwrap() / T::from_usize(n - 1).unwrap();
                let x = x_min + (x_max - x_min) * s;
                (x, self.theta0(x), self.phi0(x))
            })
            .collect()
    }
}
