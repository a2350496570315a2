//! Chebyshev–Gauss–Lobatto collocation, Fourier transforms along the strip and
//! the affine maps of the three subdomains onto [−1, 1].
//!
//! Nodes are ordered as `x_j = cos(jπ/N)`, so `x_0 = 1` and `x_N = −1`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex;
use rustfft::{Fft, FftNum, FftPlanner};

use crate::error::{Error, Result};
use crate::params::Params;
use crate::scalar::Real;

/// Chebyshev–Gauss–Lobatto points `cos(jπ/N)`, j = 0..N.
pub fn cgl_nodes<T: Real>(n_x: usize) -> Vec<T> {
    let n = T::from_usize(n_x).unwrap();
    // sin form keeps the nodes exactly antisymmetric
    (0..=n_x)
        .map(|j| {
            let m = T::from_i64(n_x as i64 - 2 * j as i64).unwrap();
            (T::PI() * m / (T::lit(2.0) * n)).sin()
        })
        .collect()
}

/// Collocation differentiation matrix of order 1 or 2 on the CGL nodes.
///
/// Off-diagonal entries come from the barycentric formulas, diagonals from the
/// negative row sum; the second-order matrix is built directly, not as `D·D`.
pub fn diff_matrix<T: Real>(n_x: usize, order: usize) -> Result<DMatrix<T>> {
    if n_x < 2 {
        return Err(Error::Domain(format!("n_x = {n_x} < 2")));
    }
    let x = cgl_nodes::<T>(n_x);
    let n = n_x + 1;
    let c: Vec<T> = (0..n)
        .map(|i| {
            let w = if i == 0 || i == n_x { T::lit(2.0) } else { T::one() };
            if i % 2 == 0 {
                w
            } else {
                -w
            }
        })
        .collect();
    let mut d1 = DMatrix::<T>::zeros(n, n);
    for i in 0..n {
        let mut sum = T::zero();
        for j in 0..n {
            if i != j {
                let v = c[i] / c[j] / (x[i] - x[j]);
                d1[(i, j)] = v;
                sum = sum + v;
            }
        }
        d1[(i, i)] = -sum;
    }
    match order {
        1 => Ok(d1),
        2 => {
            let mut d2 = DMatrix::<T>::zeros(n, n);
            for i in 0..n {
                let mut sum = T::zero();
                for j in 0..n {
                    if i != j {
                        let v = T::lit(2.0) * d1[(i, j)] * (d1[(i, i)] - T::one() / (x[i] - x[j]));
                        d2[(i, j)] = v;
                        sum = sum + v;
                    }
                }
                d2[(i, i)] = -sum;
            }
            Ok(d2)
        }
        _ => Err(Error::Domain(format!("differentiation order {order} not in 1..=2"))),
    }
}

/// Matrix Q with `(Q f)_j = ∫_{−1}^{x_j} f(s) ds` for the interpolant of f.
pub fn integration_matrix<T: Real>(n_x: usize) -> DMatrix<T> {
    let n = n_x;
    let nt = T::from_usize(n).unwrap();
    // values -> Chebyshev coefficients a_m
    let mut to_coef = DMatrix::<T>::zeros(n + 1, n + 1);
    for m in 0..=n {
        for j in 0..=n {
            let cj = if j == 0 || j == n { T::lit(0.5) } else { T::one() };
            let cm = if m == 0 || m == n { T::lit(0.5) } else { T::one() };
            let ang = T::PI() * T::from_usize(m * j).unwrap() / nt;
            to_coef[(m, j)] = T::lit(2.0) / nt * cm * cj * ang.cos();
        }
    }
    // coefficients of the antiderivative (degree n + 1), constant fixed later
    let mut integ = DMatrix::<T>::zeros(n + 2, n + 1);
    for m in 0..=n {
        let mt = T::from_usize(m).unwrap();
        match m {
            0 => integ[(1, 0)] = integ[(1, 0)] + T::one(),
            1 => integ[(2, 1)] = integ[(2, 1)] + T::lit(0.25),
            _ => {
                integ[(m + 1, m)] = integ[(m + 1, m)] + T::one() / (T::lit(2.0) * (mt + T::one()));
                integ[(m - 1, m)] = integ[(m - 1, m)] - T::one() / (T::lit(2.0) * (mt - T::one()));
            }
        }
    }
    // evaluate at nodes minus the value at −1
    let mut eval = DMatrix::<T>::zeros(n + 1, n + 2);
    for j in 0..=n {
        let theta = T::PI() * T::from_usize(j).unwrap() / nt;
        for m in 0..=n + 1 {
            let mt = T::from_usize(m).unwrap();
            let at_minus_one = if m % 2 == 0 { T::one() } else { -T::one() };
            let tm = if j == 0 {
                T::one()
            } else if j == n {
                at_minus_one
            } else {
                (mt * theta).cos()
            };
            eval[(j, m)] = tm - at_minus_one;
        }
    }
    matmul(&matmul(&eval, &integ), &to_coef)
}

fn matmul<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    let mut c = DMatrix::<T>::zeros(a.nrows(), b.ncols());
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            let aik = a[(i, k)];
            if aik == T::zero() {
                continue;
            }
            for j in 0..b.ncols() {
                c[(i, j)] = c[(i, j)] + aik * b[(k, j)];
            }
        }
    }
    c
}

/// The three subdomains Ω₋ = [−A, 0], Ω₀ = [0, R], Ω₊ = [R, B].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    Minus,
    Zero,
    Plus,
}

impl Domain {
    pub const ALL: [Domain; 3] = [Domain::Minus, Domain::Zero, Domain::Plus];

    /// 1, 2, 3 for Ω₋, Ω₀, Ω₊.
    pub fn id(self) -> u8 {
        match self {
            Domain::Minus => 1,
            Domain::Zero => 2,
            Domain::Plus => 3,
        }
    }
}

/// Affine map x ∈ [−1, 1] ↦ ξ of one subdomain.
#[derive(Clone, Copy, Debug)]
pub struct SubdomainMap<T> {
    pub domain: Domain,
    /// ξ at x = −1.
    pub left: T,
    /// ξ at x = 1.
    pub right: T,
    /// dξ/dx.
    pub jac: T,
}

impl<T: Real> SubdomainMap<T> {
    pub fn new(domain: Domain, params: &Params<T>) -> Self {
        let (left, right) = match domain {
            Domain::Minus => (-params.a_ext, T::zero()),
            Domain::Zero => (T::zero(), params.r),
            Domain::Plus => (params.r, params.b_ext),
        };
        SubdomainMap {
            domain,
            left,
            right,
            jac: (right - left) / T::lit(2.0),
        }
    }

    pub fn xi_of_x(&self, x: T) -> T {
        self.left + self.jac * (x + T::one())
    }

    pub fn x_of_xi(&self, xi: T) -> T {
        (xi - self.left) / self.jac - T::one()
    }
}

/// Collocation grid: Chebyshev nodes and matrices shared by the three
/// subdomains, the Fourier resolution along the strip, and the subdomain maps.
#[derive(Clone, Debug)]
pub struct Grid<T> {
    pub n_x: usize,
    pub n_y: usize,
    pub nodes_x: Vec<T>,
    pub d1: DMatrix<T>,
    pub d2: DMatrix<T>,
    pub maps: [SubdomainMap<T>; 3],
}

impl<T: Real> Grid<T> {
    pub fn new(n_x: usize, n_y: usize, params: &Params<T>) -> Result<Self> {
        if n_y < 2 || !n_y.is_multiple_of(2) {
            return Err(Error::InvalidParameter {
                field: "n_y",
                reason: format!("{n_y} must be even and at least 2"),
            });
        }
        if n_x < 2 {
            return Err(Error::InvalidParameter {
                field: "n_x",
                reason: format!("{n_x} must be at least 2"),
            });
        }
        Ok(Grid {
            n_x,
            n_y,
            nodes_x: cgl_nodes(n_x),
            d1: diff_matrix(n_x, 1)?,
            d2: diff_matrix(n_x, 2)?,
            maps: Domain::ALL.map(|d| SubdomainMap::new(d, params)),
        })
    }

    pub fn map(&self, domain: Domain) -> &SubdomainMap<T> {
        &self.maps[domain.id() as usize - 1]
    }

    /// ξ at each node of a subdomain.
    pub fn xi_nodes(&self, domain: Domain) -> Vec<T> {
        let m = self.map(domain);
        self.nodes_x.iter().map(|&x| m.xi_of_x(x)).collect()
    }

    /// Uniform points `2πm/N_y` on [0, 2π).
    pub fn y_nodes(&self) -> Vec<T> {
        let ny = T::from_usize(self.n_y).unwrap();
        (0..self.n_y)
            .map(|m| T::lit(2.0) * T::PI() * T::from_usize(m).unwrap() / ny)
            .collect()
    }

    /// Stored wavenumbers k = −N_y/2 .. N_y/2 − 1.
    pub fn wavenumbers(&self) -> Vec<i64> {
        let h = self.n_y as i64 / 2;
        (-h..h).collect()
    }
}

/// Discrete Fourier transform along the strip with `u(y) = Σ_k û_k e^{iky}`.
///
/// Full coefficient vectors are in FFT order: index m holds k = m for
/// m ≤ N/2 and k = m − N above; the Nyquist coefficient is kept real.
pub struct Fourier<T: FftNum> {
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real + FftNum> Fourier<T> {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fourier {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Wavenumber stored at FFT index m.
    pub fn wavenumber(&self, m: usize) -> i64 {
        if m <= self.n / 2 {
            m as i64
        } else {
            m as i64 - self.n as i64
        }
    }

    fn check(&self, got: usize, expected: usize) -> Result<()> {
        if got != expected {
            return Err(Error::Length { expected, got });
        }
        Ok(())
    }

    /// Complex samples to coefficients.
    pub fn to_modes_complex(&self, field: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        self.check(field.len(), self.n)?;
        let mut buf = field.to_vec();
        self.forward.process(&mut buf);
        let scale = T::one() / T::from_usize(self.n).unwrap();
        Ok(buf.into_iter().map(|c| c * scale).collect())
    }

    /// Real samples to the full coefficient vector.
    pub fn to_modes(&self, field: &[T]) -> Result<Vec<Complex<T>>> {
        let buf: Vec<Complex<T>> = field.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.to_modes_complex(&buf)
    }

    /// Coefficients to complex samples.
    pub fn from_modes_complex(&self, modes: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        self.check(modes.len(), self.n)?;
        let mut buf = modes.to_vec();
        self.inverse.process(&mut buf);
        Ok(buf)
    }

    /// Coefficients of a real field to samples (imaginary residue dropped).
    pub fn from_modes(&self, modes: &[Complex<T>]) -> Result<Vec<T>> {
        Ok(self.from_modes_complex(modes)?.into_iter().map(|c| c.re).collect())
    }

    /// Real samples to the coefficients k = 0..=N/2.
    pub fn to_half_modes(&self, field: &[T]) -> Result<Vec<Complex<T>>> {
        let mut full = self.to_modes(field)?;
        full.truncate(self.n / 2 + 1);
        let last = full.len() - 1;
        full[last] = Complex::new(full[last].re, T::zero());
        Ok(full)
    }

    /// Coefficients k = 0..=N/2 of a real field to samples.
    pub fn from_half_modes(&self, half: &[Complex<T>]) -> Result<Vec<T>> {
        self.check(half.len(), self.n / 2 + 1)?;
        let mut full = vec![Complex::new(T::zero(), T::zero()); self.n];
        full[..half.len()].copy_from_slice(half);
        full[0] = Complex::new(half[0].re, T::zero());
        full[self.n / 2] = Complex::new(half[self.n / 2].re, T::zero());
        for m in 1..self.n / 2 {
            full[self.n - m] = half[m].conj();
        }
        self.from_modes(&full)
    }

    /// Multiplies coefficients by (ik)^order; odd orders zero the Nyquist mode.
    pub fn differentiate(&self, modes: &mut [Complex<T>], order: u32) {
        let n = modes.len();
        let full = n == self.n;
        for (m, c) in modes.iter_mut().enumerate() {
            let k = if full { self.wavenumber(m) } else { m as i64 };
            if order % 2 == 1 && (m == self.n / 2) {
                *c = Complex::new(T::zero(), T::zero());
                continue;
            }
            let ik = Complex::new(T::zero(), T::from_i64(k).unwrap());
            *c = *c * ik.powu(order);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_small_cases() {
        let x: Vec<f64> = cgl_nodes(2);
        assert_eq!(x, vec![1.0, 0.0, -1.0]);
        let x: Vec<f64> = cgl_nodes(4);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (a, b) in x.iter().zip([1.0, h, 0.0, -h, -1.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        let x: Vec<f64> = cgl_nodes(17);
        for j in 0..=17 {
            assert_eq!(x[j], -x[17 - j]);
        }
    }

    #[test]
    fn first_row_of_quadratic_matrix() {
        // Lagrange basis on (1, 0, −1): l0 = x(x+1)/2, l1 = 1 − x², l2 = x(x−1)/2;
        // their derivatives at x = 1 are 3/2, −2, 1/2
        let d = diff_matrix::<f64>(2, 1).unwrap();
        let row = [d[(0, 0)], d[(0, 1)], d[(0, 2)]];
        for (a, b) in row.iter().zip([1.5, -2.0, 0.5]) {
            assert!((a - b).abs() < 1e-15);
        }
        let d2 = diff_matrix::<f64>(2, 2).unwrap();
        for i in 0..3 {
            for (j, v) in [1.0, -2.0, 1.0].iter().enumerate() {
                assert!((d2[(i, j)] - v).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn exact_on_polynomials() {
        let n = 8;
        let x: Vec<f64> = cgl_nodes(n);
        let d = diff_matrix::<f64>(n, 1).unwrap();
        let d2 = diff_matrix::<f64>(n, 2).unwrap();
        let f = nalgebra::DVector::from_iterator(n + 1, x.iter().map(|v| v.powi(3)));
        let df = &d * &f;
        for j in 0..=n {
            assert!((df[j] - 3.0 * x[j].powi(2)).abs() < 1e-12);
        }
        let g = nalgebra::DVector::from_iterator(n + 1, x.iter().map(|v| v * v));
        let dg = &d2 * &g;
        assert!(dg.iter().all(|v| (v - 2.0).abs() < 1e-10));
    }

    #[test]
    fn row_sums_and_square() {
        for &n in &[4, 16, 32, 64] {
            let d = diff_matrix::<f64>(n, 1).unwrap();
            let d2 = diff_matrix::<f64>(n, 2).unwrap();
            for i in 0..=n {
                assert!(d.row(i).sum().abs() < 1e-10);
            }
            let sq = &d * &d;
            let scale = d2.amax();
            assert!((sq - &d2).amax() / scale < 1e-8);
        }
    }

    #[test]
    fn spectral_convergence_on_exponential() {
        let errs: Vec<f64> = [8, 16, 32]
            .iter()
            .map(|&n| {
                let x: Vec<f64> = cgl_nodes(n);
                let d = diff_matrix::<f64>(n, 1).unwrap();
                let f = nalgebra::DVector::from_iterator(n + 1, x.iter().map(|v| v.exp()));
                let df = &d * &f;
                (0..=n).map(|j| (df[j] - x[j].exp()).abs()).fold(0.0, f64::max)
            })
            .collect();
        assert!(errs[0] < 1e-5);
        assert!(errs[1] < 1e-12);
        // faster than any fixed power: error at 16 beats the N^-8 extrapolation from 8
        assert!(errs[1] < errs[0] * 2f64.powi(-8) * 1e-3);
        assert!(errs[2] < 1e-11);
    }

    #[test]
    fn integration_is_exact_on_polynomials() {
        let n = 10;
        let q = integration_matrix::<f64>(n);
        let x: Vec<f64> = cgl_nodes(n);
        let f = nalgebra::DVector::from_iterator(n + 1, x.iter().map(|v| 3.0 * v * v - 2.0 * v + 1.0));
        let g = &q * &f;
        for j in 0..=n {
            let exact = |s: f64| s.powi(3) - s * s + s;
            assert!((g[j] - (exact(x[j]) - exact(-1.0))).abs() < 1e-13);
        }
    }

    #[test]
    fn maps_send_endpoints() {
        let p = Params::<f64>::new(0.75, 0.3, 100.0).unwrap();
        let g = Grid::new(8, 8, &p).unwrap();
        let m = g.map(Domain::Minus);
        assert_eq!(m.xi_of_x(-1.0), -10.0);
        assert_eq!(m.xi_of_x(1.0), 0.0);
        assert!((m.jac - 5.0).abs() < 1e-15);
        let z = g.map(Domain::Zero);
        assert_eq!(z.xi_of_x(-1.0), 0.0);
        assert!((z.xi_of_x(1.0) - p.r).abs() < 1e-15);
        assert!((z.jac - p.r / 2.0).abs() < 1e-15);
        let pl = g.map(Domain::Plus);
        assert!((pl.xi_of_x(-1.0) - p.r).abs() < 1e-15);
        assert!((pl.xi_of_x(1.0) - 10.0).abs() < 1e-14);
        assert!((pl.x_of_xi(pl.xi_of_x(0.3)) - 0.3).abs() < 1e-14);
        assert!(Grid::new(8, 7, &p).is_err());
        assert_eq!(g.wavenumbers(), vec![-4, -3, -2, -1, 0, 1, 2, 3]);
    }

    #[test]
    fn single_mode_and_second_derivative() {
        let n = 16;
        let f = Fourier::<f64>::new(n);
        let y: Vec<f64> = (0..n).map(|m| 2.0 * std::f64::consts::PI * m as f64 / n as f64).collect();
        let field: Vec<Complex<f64>> = y.iter().map(|&v| Complex::new(v.cos(), v.sin())).collect();
        let modes = f.to_modes_complex(&field).unwrap();
        for (m, c) in modes.iter().enumerate() {
            let expected = if m == 1 { 1.0 } else { 0.0 };
            assert!((c.re - expected).abs() < 1e-14 && c.im.abs() < 1e-14);
        }
        let s: Vec<f64> = y.iter().map(|v| (2.0 * v).sin()).collect();
        let mut half = f.to_half_modes(&s).unwrap();
        f.differentiate(&mut half, 2);
        let back = f.from_half_modes(&half).unwrap();
        for (a, b) in back.iter().zip(&s) {
            assert!((a + 4.0 * b).abs() < 1e-12);
        }
        assert!(f.to_modes(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn parseval() {
        let n = 32;
        let f = Fourier::<f64>::new(n);
        let field: Vec<f64> = (0..n).map(|m| ((m * 7 % 11) as f64 - 5.0) / 3.0).collect();
        let modes = f.to_modes(&field).unwrap();
        let grid_energy: f64 = field.iter().map(|v| v * v).sum::<f64>() / n as f64;
        let mode_energy: f64 = modes.iter().map(|c| c.norm_sqr()).sum();
        assert!((grid_energy - mode_energy).abs() < 1e-10);
    }

    proptest::proptest! {
        #[test]
        fn round_trip(values in proptest::collection::vec(-10.0f64..10.0, 24)) {
            let f = Fourier::<f64>::new(24);
            let modes = f.to_modes(&values).unwrap();
            for m in 1..12 {
                proptest::prop_assert!((modes[m] - modes[24 - m].conj()).norm() < 1e-12);
            }
            let back = f.from_modes(&modes).unwrap();
            for (a, b) in back.iter().zip(&values) {
                proptest::prop_assert!((a - b).abs() < 1e-12);
            }
            let half = f.to_half_modes(&values).unwrap();
            let back = f.from_half_modes(&half).unwrap();
            for (a, b) in back.iter().zip(&values) {
                proptest::prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
