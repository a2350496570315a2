//! Fully nonlinear perturbation problem.
//!
//! The fronts are straightened by `x′ = ξ + ρ(τ, ξ, η)` with
//! `ρ = β(ξ − R) f + β(ξ) g`, `f = u(R)/θᵢ`, `g = −R w(0⁺)/Le` and a trapezoid
//! cutoff β. Writing `Θ = Θ⁰ + ρΘ⁰_ξ + u` and `Φ = Φ⁰ + ρΦ⁰_ξ + v`, the
//! perturbations obey the linear equations plus transport corrections that
//! vanish wherever ρ does. They are evaluated pseudo-spectrally at the
//! collocation nodes inside the two cutoff supports; `w = v_ξ` receives the
//! ξ-derivative of the Φ correction, computed with dual numbers.
//!
//! The front velocities entering ρ_τ come from the second-order Stefan
//! conditions, and the two curvature-driven interface data `h₄`, `h₇` enter
//! the boundary solve.

use num_complex::Complex64;

use crate::dual::{Arith, Dual};
use crate::error::{Error, Result};
use crate::linear::{Field, InitialData, LinearModel, State, ROW_H4, ROW_H7};
use crate::params::Params;
use crate::spectral::Domain;
use crate::wave::{Side, WaveProfile};

/// Trapezoid cutoff: 1 on [−δ, δ], 0 outside (−2δ, 2δ), linear in between.
pub fn beta(xi: f64, delta: f64) -> f64 {
    let a = xi.abs();
    if a <= delta {
        1.0
    } else if a < 2.0 * delta {
        2.0 - a / delta
    } else {
        0.0
    }
}

/// Slope of the trapezoid, right limit at the kinks.
pub fn beta_prime(xi: f64, delta: f64) -> f64 {
    if (-2.0 * delta..-delta).contains(&xi) {
        1.0 / delta
    } else if (delta..2.0 * delta).contains(&xi) {
        -1.0 / delta
    } else {
        0.0
    }
}

/// The eight ξ-intervals on which the cutoffs are nonconstant or unity.
pub fn interval_bounds(interval: usize, params: &Params<f64>) -> Option<(f64, f64)> {
    let (d, r) = (params.delta, params.r);
    let lo = match interval {
        1 => -2.0 * d,
        2 => -d,
        3 => 0.0,
        4 => d,
        5 => r - 2.0 * d,
        6 => r - d,
        7 => r,
        8 => r + d,
        _ => return None,
    };
    Some((lo, lo + d))
}

/// Traces along y entering ρ, its time derivative and the interface data.
///
/// Quantities at R are taken from Ω₊ except `ux_r_minus`; quantities at 0⁺
/// from Ω₀. y-derivatives are with respect to the physical coordinate η.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceBundle {
    pub u_r: Vec<f64>,
    pub ux_r_plus: Vec<f64>,
    pub ux_r_minus: Vec<f64>,
    pub uy_r: Vec<f64>,
    pub uyy_r: Vec<f64>,
    pub uxy_r_plus: Vec<f64>,
    pub uxx_r_plus: Vec<f64>,
    pub w0: Vec<f64>,
    pub wx0: Vec<f64>,
    pub wy0: Vec<f64>,
    pub wyy0: Vec<f64>,
    pub wxy0: Vec<f64>,
    pub wxx0: Vec<f64>,
}

impl TraceBundle {
    pub fn zeros(n_y: usize) -> Self {
        let z = vec![0.0; n_y];
        TraceBundle {
            u_r: z.clone(),
            ux_r_plus: z.clone(),
            ux_r_minus: z.clone(),
            uy_r: z.clone(),
            uyy_r: z.clone(),
            uxy_r_plus: z.clone(),
            uxx_r_plus: z.clone(),
            w0: z.clone(),
            wx0: z.clone(),
            wy0: z.clone(),
            wyy0: z.clone(),
            wxy0: z.clone(),
            wxx0: z,
        }
    }
}

/// Physical samples along y of a field and its derivatives at one node.
#[derive(Clone, Debug, Default)]
pub struct NodeJet {
    pub v: Vec<f64>,
    pub x: Vec<f64>,
    pub xx: Vec<f64>,
    pub y: Vec<f64>,
    pub xy: Vec<f64>,
    pub yy: Vec<f64>,
}

/// Local derivatives entering the transport correction of one scalar.
///
/// `b2`, `b3` are the second and third derivatives of the planar profile;
/// `f_x`, `f_xx`, `f_xy` the corresponding derivatives of the perturbation
/// potential (`u` for temperature, `v` with `v_ξ = w` for concentration).
#[derive(Clone, Copy, Debug)]
pub struct TransportJet<T> {
    pub rho: T,
    pub rho_x: T,
    pub rho_xx: T,
    pub rho_y: T,
    pub rho_yy: T,
    pub rho_xy: T,
    pub rho_t: T,
    pub b2: T,
    pub b3: T,
    pub f_x: T,
    pub f_xx: T,
    pub f_xy: T,
}

/// Transport correction of a scalar with diffusivity κ under `x′ = ξ + ρ`.
///
/// With `P = ρB₂ + f_ξ` and `J = 1 + ρ_ξ`:
///
/// ```text
/// N = ρ_τP/J − κρ_ξξ(1 + ρ_η²)P/J³ − [(ρ_ξ + κρ_ηη)P + 2κρ_η(ρ_ηB₂ + f_ξη)]/J
///   + κ[2ρ_ηρ_ξηP + (ρ_η² − ρ_ξ²)(ρB₃ + B₂ + f_ξξ) − 2ρ_ξ(ρB₃ − ρ_η²B₂ + f_ξξ)]/J²
/// ```
///
/// exact whenever the planar profile solves `B₁ + κB₂ = const` locally.
pub fn transport_correction<T: Arith>(kappa: f64, j: &TransportJet<T>) -> T {
    let k = T::from(kappa);
    let one = T::from(1.0);
    let two = T::from(2.0);
    let jac = one + j.rho_x;
    let p = j.rho * j.b2 + j.f_x;
    let ry2 = j.rho_y * j.rho_y;
    let t1 = j.rho_t * p / jac;
    let t2 = k * j.rho_xx * (one + ry2) * p / (jac * jac * jac);
    let t3 = ((j.rho_x + k * j.rho_yy) * p + two * k * j.rho_y * (j.rho_y * j.b2 + j.f_xy)) / jac;
    let t4 = k
        * (two * j.rho_y * j.rho_xy * p + (ry2 - j.rho_x * j.rho_x) * (j.rho * j.b3 + j.b2 + j.f_xx)
            - two * j.rho_x * (j.rho * j.b3 - ry2 * j.b2 + j.f_xx))
        / (jac * jac);
    t1 - t2 - t3 + t4
}

/// Front displacements at one time: `f` of the ignition front, `g` of the trailing front.
#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceTrace {
    pub t: f64,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

impl InterfaceTrace {
    pub fn f_max(&self) -> f64 {
        self.f.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn g_max(&self) -> f64 {
        self.g.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Temperature and concentration on the collocation grid at one time.
#[derive(Clone, Debug)]
pub struct FieldSnapshot {
    pub t: f64,
    /// One entry per (subdomain, node, y): (domain id, ξ, y, x′, Θ, Φ).
    pub rows: Vec<(u8, f64, f64, f64, f64, f64)>,
}

/// Stefan-condition time derivatives `(u_τ(R, ·), w_τ(0⁺, ·))`.
pub fn rho_time_derivatives(b: &TraceBundle, params: &Params<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
    let (th, le, r) = (params.theta_i, params.le, params.r);
    let n = b.u_r.len();
    let mut ut = vec![0.0; n];
    let mut wt = vec![0.0; n];
    for m in 0..n {
        let (u, ux, uxx, uy, uyy, uxy) = (b.u_r[m], b.ux_r_plus[m], b.uxx_r_plus[m], b.uy_r[m], b.uyy_r[m], b.uxy_r_plus[m]);
        let den = 1.0 - (u + ux) / th;
        if !(den > 1e-8) {
            return Err(Error::Degenerate {
                what: "1 - (u(R) + u_x(R+))/theta_i",
                index: m,
                value: den,
            });
        }
        let lap = uxx + uyy;
        let num = ux + lap - uyy * ux / th - u * uyy / th - 2.0 * uy * uxy / th
            + uy * uy * (uxx - u - th) / (th * th);
        ut[m] = num / den;

        let (w, wx, wxx, wy, wyy, wxy) = (b.w0[m], b.wx0[m], b.wxx0[m], b.wy0[m], b.wyy0[m], b.wxy0[m]);
        let den = le + r * (le * w + wx);
        if !(den > 1e-8 * le) {
            return Err(Error::Degenerate {
                what: "Le + R(Le w(0+) + w_x(0+))",
                index: m,
                value: den,
            });
        }
        let num = le * wx
            + wxx
            + wyy
            + r / le * (wyy * (le * w + wx) + 2.0 * wy * wxy)
            + r * r / (le * le) * wy * wy * (-le * le * w + le * le / r + wxx);
        wt[m] = num / den;
    }
    Ok((ut, wt))
}

/// Interface data `(h₄, h₇)` along y.
pub fn boundary_rhs_h(b: &TraceBundle, params: &Params<f64>) -> (Vec<f64>, Vec<f64>) {
    let (th, le, r) = (params.theta_i, params.le, params.r);
    let h4 = b
        .wy0
        .iter()
        .map(|&wy| -r * le * wy * wy / (le * le + r * r * wy * wy))
        .collect();
    let h7 = b
        .uy_r
        .iter()
        .map(|&uy| le * uy * uy / (r * (th * th + uy * uy)))
        .collect();
    (h4, h7)
}

/// Discretized nonlinear problem.
pub struct NonlinearModel {
    pub linear: LinearModel,
    pub wave: WaveProfile<f64>,
    /// Zero the upper third of the spectrum of every nonlinear product.
    pub dealias: bool,
    /// Per subdomain, the nodes inside a cutoff support.
    active: [Vec<usize>; 3],
    /// 2π/ℓ.
    y_scale: f64,
}

impl NonlinearModel {
    pub fn new(params: &Params<f64>, n_x: usize, n_y: usize, dealias: bool) -> Result<Self> {
        let linear = LinearModel::new(params, n_x, n_y)?;
        let (d, r) = (params.delta, params.r);
        let active = Domain::ALL.map(|dom| {
            linear
                .grid
                .xi_nodes(dom)
                .iter()
                .enumerate()
                .filter(|(_, &xi)| xi.abs() <= 2.0 * d || (xi - r).abs() <= 2.0 * d)
                .map(|(j, _)| j)
                .collect()
        });
        Ok(NonlinearModel {
            wave: WaveProfile::new(params),
            linear,
            dealias,
            active,
            y_scale: 2.0 * std::f64::consts::PI / params.ell,
        })
    }

    pub fn params(&self) -> &Params<f64> {
        &self.linear.params
    }

    pub fn zero_state(&self) -> State {
        self.linear.zero_state()
    }

    /// Field value and derivatives at node j, in ξ and η.
    pub fn node_jet(&self, state: &State, f: Field, j: usize) -> NodeJet {
        let g = &self.linear.grid;
        let jac = g.map(f.domain()).jac;
        let n = g.n_x + 1;
        let modes = state.n_modes();
        let zero = Complex64::new(0.0, 0.0);
        let mut v = vec![zero; modes];
        let mut x = vec![zero; modes];
        let mut xx = vec![zero; modes];
        let data = &state.coeffs[f.index()];
        for k in 0..modes {
            let col = &data[k * n..(k + 1) * n];
            v[k] = col[j];
            let (mut a, mut b) = (zero, zero);
            for (c, val) in col.iter().enumerate() {
                a += val * g.d1[(j, c)];
                b += val * g.d2[(j, c)];
            }
            x[k] = a / jac;
            xx[k] = b / (jac * jac);
        }
        let ik = |k: usize| Complex64::new(0.0, k as f64 * self.y_scale);
        let y: Vec<Complex64> = v.iter().enumerate().map(|(k, c)| c * ik(k)).collect();
        let xy: Vec<Complex64> = x.iter().enumerate().map(|(k, c)| c * ik(k)).collect();
        let yy: Vec<Complex64> = y.iter().enumerate().map(|(k, c)| c * ik(k)).collect();
        let fr = &self.linear.fourier;
        let phys = |h: &[Complex64]| fr.from_half_modes(h).expect("sizes agree");
        NodeJet {
            v: phys(&v),
            x: phys(&x),
            xx: phys(&xx),
            y: phys(&y),
            xy: phys(&xy),
            yy: phys(&yy),
        }
    }

    /// Boundary values and derivatives at the two fronts.
    pub fn traces(&self, state: &State) -> TraceBundle {
        let nx = self.linear.grid.n_x;
        let up = self.node_jet(state, Field::U3, nx);
        let um = self.node_jet(state, Field::U2, 0);
        let w = self.node_jet(state, Field::W2, nx);
        TraceBundle {
            u_r: up.v,
            ux_r_plus: up.x,
            ux_r_minus: um.x,
            uy_r: up.y,
            uyy_r: up.yy,
            uxy_r_plus: up.xy,
            uxx_r_plus: up.xx,
            w0: w.v,
            wx0: w.x,
            wy0: w.y,
            wyy0: w.yy,
            wxy0: w.xy,
            wxx0: w.xx,
        }
    }

    fn to_half(&self, values: &[f64]) -> Vec<Complex64> {
        let mut half = self.linear.fourier.to_half_modes(values).expect("sizes agree");
        if self.dealias {
            let cut = self.linear.grid.n_y / 3;
            for c in half.iter_mut().skip(cut + 1) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        half
    }

    /// Nonlinear contributions to the time derivatives, restricted to one of
    /// the eight cutoff intervals (`Some(1..=8)`) or summed over all (`None`).
    ///
    /// Returns the contributions in coefficient space together with the
    /// interface data `(h₄, h₇)` as half spectra.
    pub fn nonlinear_terms(
        &self,
        state: &State,
        interval: Option<usize>,
    ) -> Result<(State, Vec<Complex64>, Vec<Complex64>)> {
        let p = self.params();
        if let Some(i) = interval {
            if interval_bounds(i, p).is_none() {
                return Err(Error::InvalidParameter {
                    field: "interval",
                    reason: format!("{i} not in 1..=8"),
                });
            }
        }
        let mut out = self.zero_state();
        out.t = state.t;
        let bundle = self.traces(state);
        let (h4, h7) = boundary_rhs_h(&bundle, p);
        let h4 = self.to_half(&h4);
        let h7 = self.to_half(&h7);

        let (ut, wt) = rho_time_derivatives(&bundle, p)?;
        let (th, le, r, delta) = (p.theta_i, p.le, p.r, p.delta);
        let n_y = state.n_y;
        // f = u(R)/θᵢ and g = −R w(0⁺)/Le with their y- and τ-derivatives
        let fa = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| x / th).collect() };
        let gb = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| -r * x / le).collect() };
        let (a, a_y, a_yy, a_t) = (fa(&bundle.u_r), fa(&bundle.uy_r), fa(&bundle.uyy_r), fa(&ut));
        let (b, b_y, b_yy, b_t) = (gb(&bundle.w0), gb(&bundle.wy0), gb(&bundle.wyy0), gb(&wt));

        let grid = &self.linear.grid;
        for dom in Domain::ALL {
            let xi_nodes = grid.xi_nodes(dom);
            let has_w = dom != Domain::Minus;
            for &j in &self.active[dom.id() as usize - 1] {
                let xi = xi_nodes[j];
                if let Some(i) = interval {
                    if interval_of(dom, xi, p) != Some(i) {
                        continue;
                    }
                }
                let side = match dom {
                    Domain::Minus => Side::Left,
                    Domain::Zero if xi < 0.5 * r => Side::Right,
                    Domain::Zero => Side::Left,
                    Domain::Plus => Side::Right,
                };
                let d = |o| self.wave.derivatives_on(xi, o, Some(side));
                let ((t2, p2), (t3, p3), (_, p4)) = (d(2), d(3), d(4));
                let (br, b0) = (beta(xi - r, delta), beta(xi, delta));
                let (dbr, db0) = (beta_prime(xi - r, delta), beta_prime(xi, delta));
                let u = self.node_jet(state, Field::ALL[dom_u(dom)], j);
                let w = if has_w {
                    Some(self.node_jet(state, if dom == Domain::Zero { Field::W2 } else { Field::W3 }, j))
                } else {
                    None
                };
                let mut nu = vec![0.0; n_y];
                let mut nw = vec![0.0; n_y];
                for m in 0..n_y {
                    let rho = br * a[m] + b0 * b[m];
                    let rho_x = dbr * a[m] + db0 * b[m];
                    let rho_y = br * a_y[m] + b0 * b_y[m];
                    let rho_yy = br * a_yy[m] + b0 * b_yy[m];
                    let rho_xy = dbr * a_y[m] + db0 * b_y[m];
                    let rho_t = br * a_t[m] + b0 * b_t[m];
                    if !(1.0 + rho_x > 0.0) {
                        return Err(Error::Degenerate {
                            what: "1 + rho_xi",
                            index: m,
                            value: 1.0 + rho_x,
                        });
                    }
                    let jet = TransportJet {
                        rho,
                        rho_x,
                        rho_xx: 0.0,
                        rho_y,
                        rho_yy,
                        rho_xy,
                        rho_t,
                        b2: t2,
                        b3: t3,
                        f_x: u.x[m],
                        f_xx: u.xx[m],
                        f_xy: u.xy[m],
                    };
                    nu[m] = transport_correction(1.0, &jet);
                    if let Some(w) = &w {
                        let dual = TransportJet {
                            rho: Dual::new(rho, rho_x),
                            rho_x: Dual::constant(rho_x),
                            rho_xx: Dual::constant(0.0),
                            rho_y: Dual::new(rho_y, rho_xy),
                            rho_yy: Dual::new(rho_yy, dbr * a_yy[m] + db0 * b_yy[m]),
                            rho_xy: Dual::constant(rho_xy),
                            rho_t: Dual::new(rho_t, dbr * a_t[m] + db0 * b_t[m]),
                            b2: Dual::new(p2, p3),
                            b3: Dual::new(p3, p4),
                            f_x: Dual::new(w.v[m], w.x[m]),
                            f_xx: Dual::new(w.x[m], w.xx[m]),
                            f_xy: Dual::new(w.y[m], w.xy[m]),
                        };
                        nw[m] = transport_correction(1.0 / le, &dual).eps;
                    }
                }
                let n = grid.n_x + 1;
                let fu = Field::ALL[dom_u(dom)];
                for (k, c) in self.to_half(&nu).into_iter().enumerate() {
                    out.coeffs[fu.index()][k * n + j] = c;
                }
                if has_w {
                    let fw = if dom == Domain::Zero { Field::W2 } else { Field::W3 };
                    for (k, c) in self.to_half(&nw).into_iter().enumerate() {
                        out.coeffs[fw.index()][k * n + j] = c;
                    }
                }
            }
        }
        Ok((out, h4, h7))
    }

    /// Nonlinear contributions summed over all intervals.
    pub fn nonlinear_rhs(&self, state: &State) -> Result<State> {
        Ok(self.nonlinear_terms(state, None)?.0)
    }

    /// One forward-Euler step: linear operator plus nonlinear contributions on
    /// interior nodes, then the interface solve with `h₄`, `h₇` from the old state.
    pub fn step_nonlinear(&self, state: &mut State, dt: f64) -> Result<()> {
        let (nl, h4, h7) = self.nonlinear_terms(state, None)?;
        let lin = &self.linear;
        let n = lin.n_x() + 1;
        let r = self.params().r;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..state.n_modes() {
            let quiet = state.mode_is_zero(k)
                && nl.mode_is_zero(k)
                && h4[k].norm() == 0.0
                && h7[k].norm() == 0.0;
            if quiet {
                continue;
            }
            for f in Field::ALL {
                lin.apply_mode_operator(f, k, state.mode(f, k), &mut buf);
                let add = nl.mode(f, k);
                let data = state.mode_mut(f, k);
                for j in 1..n - 1 {
                    data[j] += (buf[j] + add[j]) * dt;
                }
            }
            let mut h = [Complex64::new(0.0, 0.0); 10];
            h[ROW_H4] = h4[k] * (r / 2.0);
            h[ROW_H7] = -h7[k] * (r / 2.0);
            lin.bc.solve_mode(state, k, &h);
        }
        state.t += dt;
        let bound = state.coeff_bound();
        if !(bound < crate::linear::BLOW_UP) {
            return Err(Error::BlowUp { t: state.t, max: bound });
        }
        Ok(())
    }

    /// Largest residual of the ten boundary rows with the current interface data.
    pub fn boundary_residual(&self, state: &State, h_state: &State) -> Result<f64> {
        let (_, h4, h7) = self.nonlinear_terms(h_state, None)?;
        let r = self.params().r;
        let mut worst: f64 = 0.0;
        for k in 0..state.n_modes() {
            let mut h = [Complex64::new(0.0, 0.0); 10];
            h[ROW_H4] = h4[k] * (r / 2.0);
            h[ROW_H7] = -h7[k] * (r / 2.0);
            for c in self.linear.bc.residuals(state, k, &h) {
                worst = worst.max(c.norm());
            }
        }
        Ok(worst)
    }
}

fn dom_u(d: Domain) -> usize {
    match d {
        Domain::Minus => Field::U1.index(),
        Domain::Zero => Field::U2.index(),
        Domain::Plus => Field::U3.index(),
    }
}

/// Interval 1..=8 containing a node, or `None` outside both supports.
///
/// Nodes on a shared endpoint belong to the interval on their own subdomain's
/// side, and otherwise to the interval on the right.
pub fn interval_of(domain: Domain, xi: f64, params: &Params<f64>) -> Option<usize> {
    let candidates: &[usize] = match domain {
        Domain::Minus => &[1, 2],
        Domain::Zero => &[3, 4, 5, 6],
        Domain::Plus => &[7, 8],
    };
    let mut hit = None;
    for &i in candidates {
        let (lo, hi) = interval_bounds(i, params)?;
        if xi >= lo && xi <= hi {
            hit = Some(i);
            if xi < hi {
                break;
            }
        }
    }
    hit
}

/// Front displacements `f = u(R)/θᵢ`, `g = −R w(0⁺)/Le`.
pub fn extract_interfaces(state: &State, model: &LinearModel) -> InterfaceTrace {
    let p = &model.params;
    let nx = model.n_x();
    let u = state.physical_at_node(Field::U3, nx, &model.fourier);
    let w = state.physical_at_node(Field::W2, nx, &model.fourier);
    InterfaceTrace {
        t: state.t,
        f: u.iter().map(|v| v / p.theta_i).collect(),
        g: w.iter().map(|v| -p.r * v / p.le).collect(),
    }
}

/// Temperature and concentration with `Θ = Θ⁰ + ρΘ⁰_ξ + u` and
/// `Φ = Φ⁰ + ρΦ⁰_ξ + v` at `x′ = ξ + ρ`; `v` is the ξ-antiderivative of `w`
/// vanishing in the burnt region and continuous at R.
pub fn reconstruct_fields(state: &State, model: &LinearModel) -> FieldSnapshot {
    let p = &model.params;
    let grid = &model.grid;
    let fr = &model.fourier;
    let wave = WaveProfile::new(p);
    let trace = extract_interfaces(state, model);
    let n = grid.n_x + 1;
    let integ = crate::spectral::integration_matrix::<f64>(grid.n_x);
    // v per subdomain in coefficient space
    let mut v2 = vec![Complex64::new(0.0, 0.0); state.n_modes() * n];
    let mut v3 = v2.clone();
    for k in 0..state.n_modes() {
        let (w2, w3) = (state.mode(Field::W2, k), state.mode(Field::W3, k));
        let (j2, j3) = (grid.map(Domain::Zero).jac, grid.map(Domain::Plus).jac);
        let anti = |w: &[Complex64], i: usize| -> Complex64 {
            (0..n).map(|c| w[c] * integ[(i, c)]).sum::<Complex64>()
        };
        for i in 0..n {
            v2[k * n + i] = anti(w2, i) * j2;
        }
        let v2_r = v2[k * n];
        for i in 0..n {
            v3[k * n + i] = v2_r + anti(w3, i) * j3;
        }
    }
    let y = grid.y_nodes();
    let mut rows = Vec::with_capacity(3 * n * state.n_y);
    for dom in Domain::ALL {
        let xi = grid.xi_nodes(dom);
        let fu = Field::ALL[dom_u(dom)];
        for j in 0..n {
            let side = match dom {
                Domain::Minus => Side::Left,
                Domain::Zero if xi[j] < 0.5 * p.r => Side::Right,
                Domain::Zero => Side::Left,
                Domain::Plus => Side::Right,
            };
            let u = state.physical_at_node(fu, j, fr);
            let v = match dom {
                Domain::Minus => vec![0.0; state.n_y],
                Domain::Zero => node_physical(&v2, j, n, state.n_modes(), fr),
                Domain::Plus => node_physical(&v3, j, n, state.n_modes(), fr),
            };
            let (t1, p1) = wave.derivatives_on(xi[j], 1, Some(side));
            let (t0, p0) = match dom {
                Domain::Minus => (1.0, 0.0),
                _ => (wave.theta0(xi[j]), wave.phi0(xi[j])),
            };
            for m in 0..state.n_y {
                let rho = beta(xi[j] - p.r, p.delta) * trace.f[m] + beta(xi[j], p.delta) * trace.g[m];
                rows.push((
                    dom.id(),
                    xi[j],
                    y[m],
                    xi[j] + rho,
                    t0 + rho * t1 + u[m],
                    p0 + rho * p1 + v[m],
                ));
            }
        }
    }
    FieldSnapshot { t: state.t, rows }
}

fn node_physical(
    data: &[Complex64],
    j: usize,
    n: usize,
    modes: usize,
    fr: &crate::spectral::Fourier<f64>,
) -> Vec<f64> {
    let half: Vec<Complex64> = (0..modes).map(|k| data[k * n + j]).collect();
    fr.from_half_modes(&half).expect("sizes agree")
}

/// Outcome of the steady-pattern check on a series of front displacements.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternReport {
    /// Pattern flagged steady: small relative change over the final window,
    /// one dominant mode throughout it, and a nonplanar ignition front.
    pub steady: bool,
    /// max over y of |f − mean f| at the last sample.
    pub nonplanar_amplitude: f64,
    /// ‖f‖∞ at the last sample.
    pub final_norm: f64,
    /// (max − min)/max of ‖f‖∞ over the final window.
    pub relative_change: f64,
    /// Dominant mode k ≥ 1 of f at the last sample.
    pub dominant_mode: usize,
    pub mode_stable: bool,
    pub window: usize,
}

/// Declares a pattern steady when ‖f‖∞ changes by less than 1% over the last
/// 10% of the samples and the dominant y-mode of f stays the same there.
pub fn detect_steady_pattern(traces: &[InterfaceTrace]) -> Result<PatternReport> {
    if traces.len() < 10 {
        return Err(Error::TooFewSamples {
            got: traces.len(),
            need: 10,
        });
    }
    let window = (traces.len() / 10).max(2);
    let tail = &traces[traces.len() - window..];
    let n_y = tail[0].f.len();
    let fourier = crate::spectral::Fourier::<f64>::new(n_y);
    let dominant = |f: &[f64]| -> usize {
        let half = fourier.to_half_modes(f).expect("sizes agree");
        half.iter()
            .enumerate()
            .skip(1)
            .fold((0usize, 0.0f64), |(bk, bv), (k, c)| if c.norm() > bv { (k, c.norm()) } else { (bk, bv) })
            .0
    };
    let norms: Vec<f64> = tail.iter().map(|t| t.f_max()).collect();
    let hi = norms.iter().cloned().fold(0.0, f64::max);
    let lo = norms.iter().cloned().fold(f64::INFINITY, f64::min);
    let relative_change = if hi > 0.0 { (hi - lo) / hi } else { 0.0 };
    let modes: Vec<usize> = tail.iter().map(|t| dominant(&t.f)).collect();
    let mode_stable = modes.iter().all(|&m| m == modes[0]) && modes[0] > 0;
    let last = tail.last().expect("window is nonempty");
    let mean = last.f.iter().sum::<f64>() / n_y as f64;
    let nonplanar_amplitude = last.f.iter().fold(0.0, |m: f64, v| m.max((v - mean).abs()));
    let steady = relative_change < 0.01 && mode_stable && nonplanar_amplitude > 1e-12;
    Ok(PatternReport {
        steady,
        nonplanar_amplitude,
        final_norm: last.f_max(),
        relative_change,
        dominant_mode: modes[modes.len() - 1],
        mode_stable,
        window,
    })
}

/// Settings of a nonlinear run.
#[derive(Clone, Debug)]
pub struct NonlinearConfig {
    pub params: Params<f64>,
    pub n_x: usize,
    pub n_y: usize,
    pub dt: f64,
    pub t_final: f64,
    pub snapshot_every: usize,
    pub initial: InitialData,
    pub dealias: bool,
}

/// Output of a nonlinear run.
#[derive(Clone, Debug)]
pub struct NonlinearRun {
    pub interfaces: Vec<InterfaceTrace>,
    pub substeps: usize,
    pub dt_internal: f64,
    pub final_state: State,
}

/// Runs the nonlinear problem and records the fronts.
pub fn run_nonlinear(config: &NonlinearConfig) -> Result<NonlinearRun> {
    let model = NonlinearModel::new(&config.params, config.n_x, config.n_y, config.dealias)?;
    let state = config.initial.build(&model.linear)?;
    run_nonlinear_from(&model, state, config)
}

/// Runs the nonlinear problem from a given state.
pub fn run_nonlinear_from(model: &NonlinearModel, mut state: State, config: &NonlinearConfig) -> Result<NonlinearRun> {
    if !(config.dt > 0.0) || !(config.t_final >= 0.0) {
        return Err(Error::InvalidParameter {
            field: "dt",
            reason: format!("dt = {} and t_final = {} must be positive", config.dt, config.t_final),
        });
    }
    let limit = model.linear.euler_dt_limit();
    let substeps = crate::linear::substeps_for(config.dt, limit);
    if substeps > 1 {
        log::warn!(
            "dt = {:.3e} exceeds the forward-Euler limit {:.3e}; using {} substeps",
            config.dt,
            limit,
            substeps
        );
    }
    let h = config.dt / substeps as f64;
    let n_steps = (config.t_final / config.dt).round() as usize;
    let every = config.snapshot_every.max(1);
    let t0 = state.t;
    let mut interfaces = vec![extract_interfaces(&state, &model.linear)];
    for step in 1..=n_steps {
        for _ in 0..substeps {
            model.step_nonlinear(&mut state, h)?;
        }
        state.t = t0 + step as f64 * config.dt;
        if step % every == 0 || step == n_steps {
            interfaces.push(extract_interfaces(&state, &model.linear));
        }
    }
    Ok(NonlinearRun {
        interfaces,
        substeps,
        dt_internal: h,
        final_state: state,
    })
}
