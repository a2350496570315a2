//! Dispersion relation of the planar front and the quantities derived from it.
//!
//! For transverse mode k with `λ_k = 4π²k²/ℓ²` the reduced relation is
//!
//! `𝒟₀,ₖ(λ, Le) = exp(R/2 (Le − 1 − X_k − Y_k)) − 1 + θᵢ R X_k`
//!
//! with `X_k = √(1 + 4λ + 4λ_k)` and `Y_k = √(Le² + 4λLe + 4λ_k)` on the
//! principal branch. Positive real roots are growth rates of unstable modes.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::params::Params;
use crate::scalar::Real;

/// X_k and Y_k at a given λ.
#[derive(Clone, Copy, Debug)]
pub struct ModeConstants<T> {
    pub k: usize,
    pub lambda_k: T,
    pub x_k: Complex<T>,
    pub y_k: Complex<T>,
}

impl<T: Real> ModeConstants<T> {
    pub fn new(k: usize, lambda: Complex<T>, le: T, params: &Params<T>) -> Self {
        let lambda_k = params.lambda_k(k);
        let four = T::lit(4.0);
        let one = Complex::new(T::one(), T::zero());
        let lk = Complex::new(four * lambda_k, T::zero());
        let x_k = (one + lambda * four + lk).sqrt();
        let y_k = (Complex::new(le * le, T::zero()) + lambda * (four * le) + lk).sqrt();
        ModeConstants {
            k,
            lambda_k,
            x_k,
            y_k,
        }
    }
}

/// Growth curve λ = φ̃(Le) of the leading mode.
#[derive(Clone, Debug)]
pub struct GrowthCurve<T> {
    /// (Le, λ) pairs with increasing Le.
    pub samples: Vec<(T, T)>,
    pub le_c: T,
    /// Growth rate in the limit Le → 0⁺.
    pub lambda_star: T,
}

/// Reduced dispersion relation 𝒟₀,ₖ(λ, Le).
pub fn reduced_dispersion<T: Real>(k: usize, lambda: Complex<T>, le: T, params: &Params<T>) -> Complex<T> {
    let m = ModeConstants::new(k, lambda, le, params);
    let half_r = params.r / T::lit(2.0);
    let arg = (Complex::new(le - T::one(), T::zero()) - m.x_k - m.y_k) * half_r;
    arg.exp() - T::one() + m.x_k * (params.theta_i * params.r)
}

/// 𝒟₀,ₖ restricted to real λ ≥ −(1 + 4λ_k)/4 and −(Le² + 4λ_k)/(4Le).
pub fn reduced_dispersion_real<T: Real>(k: usize, lambda: T, le: T, params: &Params<T>) -> T {
    let four = T::lit(4.0);
    let lk = params.lambda_k(k);
    let x = (T::one() + four * lambda + four * lk).sqrt();
    let y = (le * le + four * lambda * le + four * lk).sqrt();
    (params.r / T::lit(2.0) * (le - T::one() - x - y)).exp() - T::one() + params.theta_i * params.r * x
}

/// Full dispersion relation 𝒟ₖ = (Le − Y_k) 𝒟₀,ₖ.
pub fn full_dispersion<T: Real>(k: usize, lambda: Complex<T>, le: T, params: &Params<T>) -> Complex<T> {
    let m = ModeConstants::new(k, lambda, le, params);
    (Complex::new(le, T::zero()) - m.y_k) * reduced_dispersion(k, lambda, le, params)
}

/// Companion relation 𝒟̃ₖ = (Le − Y_k)[e^{R/2(Le−1−X−Y)} − e^{R/2(Le−1+X−Y)} + θᵢ R X_k].
pub fn tilde_dispersion<T: Real>(k: usize, lambda: Complex<T>, le: T, params: &Params<T>) -> Complex<T> {
    let m = ModeConstants::new(k, lambda, le, params);
    let half_r = params.r / T::lit(2.0);
    let base = Complex::new(le - T::one(), T::zero()) - m.y_k;
    let bracket = ((base - m.x_k) * half_r).exp() - ((base + m.x_k) * half_r).exp()
        + m.x_k * (params.theta_i * params.r);
    (Complex::new(le, T::zero()) - m.y_k) * bracket
}

/// `1 − θᵢ R X_k(0)`; the critical Lewis number of mode k exists only when positive.
pub fn cutoff_margin<T: Real>(k: usize, params: &Params<T>) -> T {
    let x0 = (T::one() + T::lit(4.0) * params.lambda_k(k)).sqrt();
    T::one() - params.theta_i * params.r * x0
}

/// Critical Lewis number of mode k: the Le at which λ = 0 solves 𝒟₀,ₖ.
pub fn le_critical<T: Real>(k: usize, params: &Params<T>) -> Result<T> {
    let margin = cutoff_margin(k, params);
    if !(margin > T::zero()) {
        return Err(Error::ModeCutoff {
            k,
            margin: margin.to_f64().unwrap_or(f64::NAN),
        });
    }
    let r = params.r;
    let two = T::lit(2.0);
    let x0 = (T::one() + T::lit(4.0) * params.lambda_k(k)).sqrt();
    let l = margin.ln();
    let num = (T::one() + x0) * (r * r + two * r * l) + two * l * l;
    let den = r * r * (T::one() + x0) + two * r * l;
    let le_c = num / den;
    if !(le_c > T::zero() && le_c < T::one()) {
        log::warn!("critical Lewis number of mode {k} is {le_c}, outside (0, 1)");
    }
    Ok(le_c)
}

/// Largest mode index k with a critical Lewis number in (0, 1); 0 if none.
pub fn max_unstable_mode<T: Real>(params: &Params<T>) -> usize {
    let tr = params.theta_i * params.r;
    // X_k(0) < 1/(θᵢR)  ⇔  k < ℓ/(4π) √((θᵢR)⁻² − 1)
    let bound = params.ell / (T::lit(4.0) * T::PI()) * (T::one() / (tr * tr) - T::one()).sqrt();
    let mut k = bound.floor().to_usize().unwrap_or(0) + 1;
    while k > 0 && !(cutoff_margin(k, params) > T::zero()) {
        k -= 1;
    }
    while k > 0 {
        match le_critical(k, params) {
            Ok(v) if v > T::zero() && v < T::one() => return k,
            _ => k -= 1,
        }
    }
    log::warn!("strip width {} admits no unstable transverse mode", params.ell);
    0
}

fn bisect<T: Real, F: Fn(T) -> T>(f: F, mut lo: T, mut hi: T) -> T {
    let mut flo = f(lo);
    let tol = T::tight_tol();
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi || hi - lo <= tol * T::lit(1e-3) {
            break;
        }
        let fm = f(mid);
        if fm == T::zero() {
            return mid;
        }
        if (fm < T::zero()) == (flo < T::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / T::lit(2.0)
}

/// Unique growth rate λ ∈ [0, √λ_k) of mode k for Le below its critical value.
pub fn growth_root<T: Real>(le: T, k: usize, params: &Params<T>) -> Result<T> {
    let hi = params.lambda_k(k).sqrt();
    let f = |lam: T| reduced_dispersion_real(k, lam, le, params);
    let f0 = f(T::zero());
    if f0.abs() <= T::tight_tol() {
        return Ok(T::zero());
    }
    let fhi = f(hi);
    if !(f0 < T::zero() && fhi > T::zero()) {
        return Err(Error::Bracket {
            lo: 0.0,
            hi: hi.to_f64().unwrap_or(f64::NAN),
            le: le.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(bisect(f, T::zero(), hi))
}

/// Samples φ̃ on a log-spaced grid of Lewis numbers in [1e−6, Le_c].
pub fn trace_growth_curve<T: Real>(n_samples: usize, params: &Params<T>) -> Result<GrowthCurve<T>> {
    if n_samples < 2 {
        return Err(Error::Domain(format!("need at least 2 samples, got {n_samples}")));
    }
    let le_c = le_critical(1, params)?;
    let lo = T::lit(1e-6).ln();
    let hi = le_c.ln();
    let last = T::from_usize(n_samples - 1).unwrap();
    let mut samples = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let le = if i + 1 == n_samples {
            le_c
        } else {
            (lo + (hi - lo) * T::from_usize(i).unwrap() / last).exp()
        };
        samples.push((le, growth_root(le, 1, params)?));
    }
    let lambda_star = samples[0].1;
    Ok(GrowthCurve {
        samples,
        le_c,
        lambda_star,
    })
}

/// All real roots of λ ↦ 𝒟₀,ₖ(λ, Le) on [0, lambda_max] found by a sign scan.
pub fn real_root_scan<T: Real>(k: usize, le: T, lambda_max: T, n_grid: usize, params: &Params<T>) -> Vec<T> {
    let n = n_grid.max(2);
    let f = |lam: T| reduced_dispersion_real(k, lam, le, params);
    let zero_tol = T::tight_tol() * T::lit(10.0);
    let grid: Vec<T> = (0..=n)
        .map(|i| lambda_max * T::from_usize(i).unwrap() / T::from_usize(n).unwrap())
        .collect();
    let vals: Vec<T> = grid.iter().map(|&l| f(l)).collect();
    let mut roots = Vec::new();
    for i in 0..=n {
        if vals[i].abs() <= zero_tol {
            roots.push(grid[i]);
            continue;
        }
        if i < n && vals[i + 1].abs() > zero_tol && (vals[i] < T::zero()) != (vals[i + 1] < T::zero()) {
            roots.push(bisect(f, grid[i], grid[i + 1]));
        }
    }
    roots
}
