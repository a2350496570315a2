//! Physical-frame oracle for the transport correction.
//!
//! A smooth field `Θ(τ, x′, y) = T(ξ) + ρT′(ξ) + u` with `x′ = ξ + ρ(τ, ξ, y)`
//! is evaluated by Newton inversion of the coordinate map. Its residual
//! `Θ_τ − Θ_x′ − κΔΘ − S` from finite differences in the physical frame must
//! equal `u_τ − u_ξ − κΔu − N`.

use proptest::prelude::*;
use thickflame::dual::Dual;
use thickflame::nonlinear::{transport_correction, TransportJet};

const H: f64 = 1e-3;

fn d1<F: Fn(f64) -> f64>(f: F, x: f64) -> f64 {
    (f(x - 2.0 * H) - 8.0 * f(x - H) + 8.0 * f(x + H) - f(x + 2.0 * H)) / (12.0 * H)
}

fn d2<F: Fn(f64) -> f64>(f: F, x: f64) -> f64 {
    (-f(x - 2.0 * H) + 16.0 * f(x - H) - 30.0 * f(x) + 16.0 * f(x + H) - f(x + 2.0 * H)) / (12.0 * H * H)
}

#[derive(Clone, Copy, Debug)]
struct Case {
    kappa: f64,
    source: f64,
    c0: f64,
    c1: f64,
    a: f64,
    b: f64,
    center: f64,
    tau: f64,
    xi: f64,
    eta: f64,
}

impl Case {
    /// Background with `κT″ + T′ + S = 0`.
    fn t(&self, xi: f64) -> f64 {
        self.c0 + self.c1 * (-xi / self.kappa).exp() - self.source * xi
    }

    fn t_n(&self, xi: f64, n: i32) -> f64 {
        let lead = self.c1 * (-1.0 / self.kappa).powi(n) * (-xi / self.kappa).exp();
        match n {
            0 => self.t(xi),
            1 => lead - self.source,
            _ => lead,
        }
    }

    fn rho(&self, tau: f64, xi: f64, eta: f64) -> f64 {
        let s = eta.sin();
        self.a * (1.0 + 0.5 * s + 0.3 * tau + 0.2 * tau * s) * (-(xi - self.center).powi(2) / 2.0).exp()
    }

    fn u(&self, tau: f64, xi: f64, eta: f64) -> f64 {
        self.b * (eta + 0.7 * tau).cos() * (1.0 + xi) * (-xi * xi / 4.0).exp()
    }

    /// Transformed field as a function of the straightened coordinates.
    fn g(&self, tau: f64, xi: f64, eta: f64) -> f64 {
        self.t(xi) + self.rho(tau, xi, eta) * self.t_n(xi, 1) + self.u(tau, xi, eta)
    }

    /// ξ with `ξ + ρ(τ, ξ, y) = x′`.
    fn invert(&self, tau: f64, x: f64, y: f64) -> f64 {
        let mut xi = x - self.rho(tau, x, y);
        for _ in 0..60 {
            let f = xi + self.rho(tau, xi, y) - x;
            let df = 1.0 + d1(|s| self.rho(tau, s, y), xi);
            let step = f / df;
            xi -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        xi
    }

    fn theta(&self, tau: f64, x: f64, y: f64) -> f64 {
        self.g(tau, self.invert(tau, x, y), y)
    }

    fn physical_residual(&self) -> f64 {
        let (tau, y) = (self.tau, self.eta);
        let x = self.xi + self.rho(tau, self.xi, y);
        let th_t = d1(|s| self.theta(s, x, y), tau);
        let th_x = d1(|s| self.theta(tau, s, y), x);
        let th_xx = d2(|s| self.theta(tau, s, y), x);
        let th_yy = d2(|s| self.theta(tau, x, s), y);
        th_t - th_x - self.kappa * (th_xx + th_yy) - self.source
    }

    fn jet(&self) -> TransportJet<f64> {
        let (tau, xi, eta) = (self.tau, self.xi, self.eta);
        let rx = |t: f64, e: f64| d1(|s| self.rho(t, s, e), xi);
        let ux = |e: f64| d1(|s| self.u(tau, s, e), xi);
        TransportJet {
            rho: self.rho(tau, xi, eta),
            rho_x: rx(tau, eta),
            rho_xx: d2(|s| self.rho(tau, s, eta), xi),
            rho_y: d1(|s| self.rho(tau, xi, s), eta),
            rho_yy: d2(|s| self.rho(tau, xi, s), eta),
            rho_xy: d1(|e| rx(tau, e), eta),
            rho_t: d1(|s| self.rho(s, xi, eta), tau),
            b2: self.t_n(xi, 2),
            b3: self.t_n(xi, 3),
            f_x: ux(eta),
            f_xx: d2(|s| self.u(tau, s, eta), xi),
            f_xy: d1(ux, eta),
        }
    }

    fn transformed_residual(&self) -> f64 {
        let (tau, xi, eta) = (self.tau, self.xi, self.eta);
        let u_t = d1(|s| self.u(s, xi, eta), tau);
        let u_x = d1(|s| self.u(tau, s, eta), xi);
        let u_xx = d2(|s| self.u(tau, s, eta), xi);
        let u_yy = d2(|s| self.u(tau, xi, s), eta);
        u_t - u_x - self.kappa * (u_xx + u_yy) - transport_correction(self.kappa, &self.jet())
    }
}

fn base_case() -> Case {
    Case {
        kappa: 1.0,
        source: 0.4,
        c0: 1.0,
        c1: -0.5,
        a: 0.1,
        b: 0.05,
        center: 0.3,
        tau: 0.2,
        xi: 0.1,
        eta: 0.7,
    }
}

#[test]
fn matches_physical_frame_at_a_fixed_point() {
    let c = base_case();
    let lhs = c.physical_residual();
    let rhs = c.transformed_residual();
    assert!((lhs - rhs).abs() < 1e-7, "{lhs} vs {rhs}");
    // the correction is not negligible at this point
    assert!(transport_correction(c.kappa, &c.jet()).abs() > 1e-3);
}

#[test]
fn vanishes_without_displacement() {
    let mut c = base_case();
    c.a = 0.0;
    assert_eq!(transport_correction(c.kappa, &c.jet()), 0.0);
}

#[test]
fn dual_part_is_the_xi_derivative() {
    let c = base_case();
    let at = |xi: f64| Case { xi, ..c }.jet();
    let n = |xi: f64| transport_correction(c.kappa, &at(xi));
    let j = at(c.xi);
    let dj = |f: fn(&TransportJet<f64>) -> f64| d1(|s| f(&at(s)), c.xi);
    let dual = TransportJet {
        rho: Dual::new(j.rho, dj(|j| j.rho)),
        rho_x: Dual::new(j.rho_x, dj(|j| j.rho_x)),
        rho_xx: Dual::new(j.rho_xx, dj(|j| j.rho_xx)),
        rho_y: Dual::new(j.rho_y, dj(|j| j.rho_y)),
        rho_yy: Dual::new(j.rho_yy, dj(|j| j.rho_yy)),
        rho_xy: Dual::new(j.rho_xy, dj(|j| j.rho_xy)),
        rho_t: Dual::new(j.rho_t, dj(|j| j.rho_t)),
        b2: Dual::new(j.b2, dj(|j| j.b2)),
        b3: Dual::new(j.b3, dj(|j| j.b3)),
        f_x: Dual::new(j.f_x, dj(|j| j.f_x)),
        f_xx: Dual::new(j.f_xx, dj(|j| j.f_xx)),
        f_xy: Dual::new(j.f_xy, dj(|j| j.f_xy)),
    };
    let out = transport_correction(c.kappa, &dual);
    assert!((out.re - n(c.xi)).abs() < 1e-15);
    assert!((out.eps - d1(n, c.xi)).abs() < 1e-6, "{} vs {}", out.eps, d1(n, c.xi));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn matches_physical_frame(
        kappa in prop_oneof![Just(1.0), 1.2f64..5.0],
        source in -1.0f64..1.0,
        c1 in -1.0f64..1.0,
        a in -0.15f64..0.15,
        b in -0.1f64..0.1,
        center in -0.5f64..0.5,
        tau in 0.0f64..1.0,
        xi in -0.5f64..0.8,
        eta in 0.0f64..std::f64::consts::TAU,
    ) {
        let c = Case { kappa, source, c0: 1.0, c1, a, b, center, tau, xi, eta };
        let lhs = c.physical_residual();
        let rhs = c.transformed_residual();
        prop_assert!((lhs - rhs).abs() < 1e-6 * (1.0 + lhs.abs()), "{} vs {}", lhs, rhs);
    }
}
