//! Linearized perturbation problem on the three mapped subdomains.
//!
//! Unknowns are `u₁` on Ω₋, `(u₂, w₂)` on Ω₀ and `(u₃, w₃)` on Ω₊; `w₁ ≡ 0`.
//! Each field is stored as Fourier coefficients k = 0..=N_y/2 at every
//! Chebyshev node, which keeps the per-mode operators and the interface solve
//! cheap; physical samples are available through [`State::physical`].
//!
//! Time stepping is forward Euler on interior nodes followed by a solve for
//! the ten boundary values of every mode:
//!
//! ```text
//! u₁(−1) = 0,  u₃(1) = 0,  w₃(1) = 0,  u₁(1) = u₂(−1),  u₃(−1) = u₂(1)
//! w₂(−1) = (2Le/A) Dₓu₁(1) − (2Le/R) Dₓu₂(−1)
//! Dₓw₂(−1) + (Le R/2) w₂(−1) = (R/2) h₄
//! Dₓw₂(1) − R/(B−R) Dₓw₃(−1) − (Le R/2)(w₃(−1) − w₂(1)) = −(R/2) h₇
//! Dₓu₃(−1) − (B−R)/R Dₓu₂(1) + (B−R)/(2Le) (w₃(−1) − w₂(1)) = 0
//! u₂(1) = −2θᵢR/(B−R) Dₓu₃(−1) + 2θᵢ Dₓu₂(1)
//! ```
//!
//! with `h₄ = h₇ = 0` in the linear problem.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dispersion::{growth_root, ModeConstants};
use crate::error::{Error, Result};
use crate::params::Params;
use crate::spectral::{Domain, Fourier, Grid};

/// Blow-up threshold of the explicit scheme.
pub const BLOW_UP: f64 = 1e12;

/// The five evolved fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    U1,
    U2,
    U3,
    W2,
    W3,
}

impl Field {
    pub const ALL: [Field; 5] = [Field::U1, Field::U2, Field::U3, Field::W2, Field::W3];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn domain(self) -> Domain {
        match self {
            Field::U1 => Domain::Minus,
            Field::U2 | Field::W2 => Domain::Zero,
            Field::U3 | Field::W3 => Domain::Plus,
        }
    }

    pub fn is_w(self) -> bool {
        matches!(self, Field::W2 | Field::W3)
    }

    pub fn name(self) -> &'static str {
        match self {
            Field::U1 => "u1",
            Field::U2 => "u2",
            Field::U3 => "u3",
            Field::W2 => "w2",
            Field::W3 => "w3",
        }
    }
}

/// Fields at one time: `coeffs[f][k·(N_x+1) + j]` is mode k at node j.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub t: f64,
    pub n_x: usize,
    pub n_y: usize,
    pub coeffs: [Vec<Complex64>; 5],
}

impl State {
    pub fn zeros(n_x: usize, n_y: usize) -> Self {
        let len = (n_y / 2 + 1) * (n_x + 1);
        State {
            t: 0.0,
            n_x,
            n_y,
            coeffs: std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); len]),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_y / 2 + 1
    }

    pub fn n_nodes(&self) -> usize {
        self.n_x + 1
    }

    pub fn mode(&self, f: Field, k: usize) -> &[Complex64] {
        let n = self.n_nodes();
        &self.coeffs[f.index()][k * n..(k + 1) * n]
    }

    pub fn mode_mut(&mut self, f: Field, k: usize) -> &mut [Complex64] {
        let n = self.n_nodes();
        &mut self.coeffs[f.index()][k * n..(k + 1) * n]
    }

    /// Whether every coefficient of mode k vanishes.
    pub fn mode_is_zero(&self, k: usize) -> bool {
        Field::ALL
            .iter()
            .all(|&f| self.mode(f, k).iter().all(|c| c.re == 0.0 && c.im == 0.0))
    }

    /// Physical samples, node-major: `out[j·N_y + m]` at node j and y_m.
    pub fn physical(&self, f: Field, fourier: &Fourier<f64>) -> Vec<f64> {
        let n = self.n_nodes();
        let mut out = Vec::with_capacity(n * self.n_y);
        let mut half = vec![Complex64::new(0.0, 0.0); self.n_modes()];
        for j in 0..n {
            for (k, h) in half.iter_mut().enumerate() {
                *h = self.coeffs[f.index()][k * n + j];
            }
            out.extend(fourier.from_half_modes(&half).expect("sizes agree"));
        }
        out
    }

    /// Samples of one field along y at node j.
    pub fn physical_at_node(&self, f: Field, j: usize, fourier: &Fourier<f64>) -> Vec<f64> {
        let n = self.n_nodes();
        let half: Vec<Complex64> = (0..self.n_modes())
            .map(|k| self.coeffs[f.index()][k * n + j])
            .collect();
        fourier.from_half_modes(&half).expect("sizes agree")
    }

    /// Sets one field from node-major physical samples.
    pub fn set_physical(&mut self, f: Field, values: &[f64], fourier: &Fourier<f64>) -> Result<()> {
        let n = self.n_nodes();
        if values.len() != n * self.n_y {
            return Err(Error::Length {
                expected: n * self.n_y,
                got: values.len(),
            });
        }
        for j in 0..n {
            let half = fourier.to_half_modes(&values[j * self.n_y..(j + 1) * self.n_y])?;
            for (k, c) in half.into_iter().enumerate() {
                self.coeffs[f.index()][k * n + j] = c;
            }
        }
        Ok(())
    }

    /// Largest physical magnitude over all fields.
    pub fn max_abs(&self, fourier: &Fourier<f64>) -> f64 {
        Field::ALL
            .iter()
            .flat_map(|&f| self.physical(f, fourier))
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Upper bound of the physical magnitude from the coefficients.
    pub fn coeff_bound(&self) -> f64 {
        let n = self.n_nodes();
        let mut best: f64 = 0.0;
        for f in Field::ALL {
            for j in 0..n {
                let s: f64 = (0..self.n_modes())
                    .map(|k| {
                        let c = self.coeffs[f.index()][k * n + j].norm();
                        if k == 0 || 2 * k == self.n_y {
                            c
                        } else {
                            2.0 * c
                        }
                    })
                    .sum();
                best = best.max(s);
            }
        }
        best
    }

    pub fn scale(&mut self, s: f64) {
        for v in self.coeffs.iter_mut() {
            for c in v.iter_mut() {
                *c *= s;
            }
        }
    }
}

/// One boundary unknown: a field value at x = −1 (node N) or x = 1 (node 0).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryNode {
    pub field: Field,
    pub node: usize,
}

#[derive(Clone, Copy, Debug)]
enum Term {
    Value(Field, usize),
    Deriv(Field, usize),
}

/// The ten boundary relations of every Fourier mode, pre-solved.
#[derive(Clone, Debug)]
pub struct BoundarySystem {
    n: usize,
    unknowns: [BoundaryNode; 10],
    /// Dense rows over the 5(N_x+1) nodal values.
    rows: DMatrix<f64>,
    /// Boundary values as a linear map of interior values: `b = G v + S h`.
    gain: DMatrix<f64>,
    source: DMatrix<f64>,
    pub cond: f64,
}

/// Row index of the trailing-interface condition fed by h₄.
pub const ROW_H4: usize = 5;
/// Row index of the ignition-interface condition fed by h₇.
pub const ROW_H7: usize = 6;
/// Rows holding interface (not far-field) conditions.
pub const INTERFACE_ROWS: [usize; 7] = [3, 4, 5, 6, 7, 8, 9];

impl BoundarySystem {
    pub fn new(params: &Params<f64>, grid: &Grid<f64>) -> Result<Self> {
        let n_x = grid.n_x;
        let n = n_x + 1;
        let (p, m) = (0usize, n_x); // x = 1, x = −1
        let (le, r, a, b, th) = (params.le, params.r, params.a_ext, params.b_ext, params.theta_i);
        let br = b - r;
        use Field::*;
        use Term::*;
        let spec: Vec<Vec<(Term, f64)>> = vec![
            vec![(Value(U1, m), 1.0)],
            vec![(Value(U3, p), 1.0)],
            vec![(Value(W3, p), 1.0)],
            vec![(Value(U1, p), 1.0), (Value(U2, m), -1.0)],
            vec![
                (Value(W2, m), 1.0),
                (Deriv(U1, p), -2.0 * le / a),
                (Deriv(U2, m), 2.0 * le / r),
            ],
            vec![(Deriv(W2, m), 1.0), (Value(W2, m), le * r / 2.0)],
            vec![
                (Deriv(W2, p), 1.0),
                (Deriv(W3, m), -r / br),
                (Value(W3, m), -le * r / 2.0),
                (Value(W2, p), le * r / 2.0),
            ],
            vec![
                (Deriv(U3, m), 1.0),
                (Deriv(U2, p), -br / r),
                (Value(W3, m), br / (2.0 * le)),
                (Value(W2, p), -br / (2.0 * le)),
            ],
            vec![
                (Value(U2, p), 1.0),
                (Deriv(U3, m), 2.0 * th * r / br),
                (Deriv(U2, p), -2.0 * th),
            ],
            vec![(Value(U3, m), 1.0), (Value(U2, p), -1.0)],
        ];
        let mut rows = DMatrix::<f64>::zeros(10, 5 * n);
        for (i, terms) in spec.iter().enumerate() {
            for &(term, coef) in terms {
                match term {
                    Value(f, j) => rows[(i, f.index() * n + j)] += coef,
                    Deriv(f, j) => {
                        for c in 0..n {
                            rows[(i, f.index() * n + c)] += coef * grid.d1[(j, c)];
                        }
                    }
                }
            }
        }
        let unknowns = [
            BoundaryNode { field: U1, node: m },
            BoundaryNode { field: U1, node: p },
            BoundaryNode { field: U2, node: m },
            BoundaryNode { field: U2, node: p },
            BoundaryNode { field: U3, node: m },
            BoundaryNode { field: U3, node: p },
            BoundaryNode { field: W2, node: m },
            BoundaryNode { field: W2, node: p },
            BoundaryNode { field: W3, node: m },
            BoundaryNode { field: W3, node: p },
        ];
        let cols: Vec<usize> = unknowns.iter().map(|u| u.field.index() * n + u.node).collect();
        let mut mb = DMatrix::<f64>::zeros(10, 10);
        let mut mi = rows.clone();
        for (c, &col) in cols.iter().enumerate() {
            for i in 0..10 {
                mb[(i, c)] = rows[(i, col)];
                mi[(i, col)] = 0.0;
            }
        }
        let sv = mb.clone().singular_values();
        let cond = sv.max() / sv.min();
        let inv = match mb.try_inverse() {
            Some(inv) if cond.is_finite() && cond < 1e14 => inv,
            _ => return Err(Error::SingularBoundary { mode: 0, cond }),
        };
        let gain = -(&inv * &mi);
        Ok(BoundarySystem {
            n,
            unknowns,
            rows,
            gain,
            source: inv,
            cond,
        })
    }

    pub fn unknowns(&self) -> &[BoundaryNode; 10] {
        &self.unknowns
    }

    /// Overwrites the boundary values of one mode; `h` is the right-hand side
    /// of the ten rows (zero except rows [`ROW_H4`] and [`ROW_H7`]).
    pub fn solve_mode(&self, state: &mut State, k: usize, h: &[Complex64; 10]) {
        let n = self.n;
        let mut values = [Complex64::new(0.0, 0.0); 10];
        for (i, v) in values.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for f in Field::ALL {
                let data = state.mode(f, k);
                let base = f.index() * n;
                for j in 1..n - 1 {
                    acc += data[j] * self.gain[(i, base + j)];
                }
            }
            for (l, hl) in h.iter().enumerate() {
                if hl.re != 0.0 || hl.im != 0.0 {
                    acc += hl * self.source[(i, l)];
                }
            }
            *v = acc;
        }
        for (u, v) in self.unknowns.iter().zip(values) {
            state.mode_mut(u.field, k)[u.node] = v;
        }
    }

    /// Row residuals `rows·v − h` of one mode.
    pub fn residuals(&self, state: &State, k: usize, h: &[Complex64; 10]) -> [Complex64; 10] {
        let n = self.n;
        let mut out = [Complex64::new(0.0, 0.0); 10];
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = -h[i];
            for f in Field::ALL {
                let data = state.mode(f, k);
                for (j, d) in data.iter().enumerate() {
                    acc += d * self.rows[(i, f.index() * n + j)];
                }
            }
            *o = acc;
        }
        out
    }

    /// Boundary values of one mode as a linear map of its interior values.
    pub fn gain(&self) -> &DMatrix<f64> {
        &self.gain
    }
}

/// Discretized linear problem: grid, transforms, mapped operators and the
/// interface system.
pub struct LinearModel {
    pub params: Params<f64>,
    pub grid: Grid<f64>,
    pub fourier: Fourier<f64>,
    pub bc: BoundarySystem,
    /// Row-major x-operators `a D + b D²` per field.
    ops: [Vec<f64>; 5],
    /// Coefficient of −k² per field.
    kcoef: [f64; 5],
}

impl LinearModel {
    pub fn new(params: &Params<f64>, n_x: usize, n_y: usize) -> Result<Self> {
        params.validate()?;
        let grid = Grid::new(n_x, n_y, params)?;
        let bc = BoundarySystem::new(params, &grid)?;
        let n = n_x + 1;
        let (le, r, a, b) = (params.le, params.r, params.a_ext, params.b_ext);
        let br = b - r;
        let coef = |f: Field| -> (f64, f64) {
            match f {
                Field::U1 => (2.0 / a, 4.0 / (a * a)),
                Field::U2 => (2.0 / r, 4.0 / (r * r)),
                Field::U3 => (2.0 / br, 4.0 / (br * br)),
                Field::W2 => (2.0 / r, 4.0 / (le * r * r)),
                Field::W3 => (2.0 / br, 4.0 / (le * br * br)),
            }
        };
        let ops = Field::ALL.map(|f| {
            let (c1, c2) = coef(f);
            let mut op = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    op[i * n + j] = c1 * grid.d1[(i, j)] + c2 * grid.d2[(i, j)];
                }
            }
            op
        });
        let base = (2.0 * std::f64::consts::PI / params.ell).powi(2);
        let kcoef = Field::ALL.map(|f| if f.is_w() { base / le } else { base });
        Ok(LinearModel {
            params: *params,
            grid,
            fourier: Fourier::new(n_y),
            bc,
            ops,
            kcoef,
        })
    }

    pub fn n_x(&self) -> usize {
        self.grid.n_x
    }

    pub fn n_y(&self) -> usize {
        self.grid.n_y
    }

    pub fn zero_state(&self) -> State {
        State::zeros(self.grid.n_x, self.grid.n_y)
    }

    /// Applies the mapped x-operator of field f for mode k to `u`.
    pub fn apply_mode_operator(&self, f: Field, k: usize, u: &[Complex64], out: &mut [Complex64]) {
        let n = self.grid.n_x + 1;
        let op = &self.ops[f.index()];
        let shift = self.kcoef[f.index()] * (k * k) as f64;
        for i in 0..n {
            let row = &op[i * n..(i + 1) * n];
            let mut re = 0.0;
            let mut im = 0.0;
            for (a, c) in row.iter().zip(u) {
                re += a * c.re;
                im += a * c.im;
            }
            out[i] = Complex64::new(re - shift * u[i].re, im - shift * u[i].im);
        }
    }

    /// Time derivative of every field under the linear operator.
    ///
    /// Boundary entries are computed as well but carry no meaning; the
    /// interface solve replaces them.
    pub fn rhs_linear(&self, state: &State) -> State {
        let mut out = State::zeros(state.n_x, state.n_y);
        out.t = state.t;
        for k in 0..state.n_modes() {
            if state.mode_is_zero(k) {
                continue;
            }
            for f in Field::ALL {
                let u = state.mode(f, k).to_vec();
                self.apply_mode_operator(f, k, &u, out.mode_mut(f, k));
            }
        }
        out
    }

    /// Solves the interface system of every mode with zero right-hand side.
    pub fn apply_bcs_linear(&self, state: &mut State) {
        let zero = [Complex64::new(0.0, 0.0); 10];
        for k in 0..state.n_modes() {
            self.bc.solve_mode(state, k, &zero);
        }
    }

    /// Largest boundary-row residual of the linear problem over all modes.
    pub fn boundary_residual(&self, state: &State) -> f64 {
        let zero = [Complex64::new(0.0, 0.0); 10];
        (0..state.n_modes())
            .flat_map(|k| self.bc.residuals(state, k, &zero))
            .fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Largest residual of the seven interface rows of mode k.
    pub fn interface_residual(&self, state: &State, k: usize) -> f64 {
        let zero = [Complex64::new(0.0, 0.0); 10];
        let res = self.bc.residuals(state, k, &zero);
        INTERFACE_ROWS.iter().fold(0.0, |m, &i| m.max(res[i].norm()))
    }

    /// Largest interior deviation of `rhs_linear(state)` from `lambda · state`
    /// relative to the largest `|lambda · state|`, over mode k.
    pub fn eigen_residual(&self, state: &State, k: usize, lambda: f64) -> f64 {
        let rhs = self.rhs_linear(state);
        let n = self.grid.n_x;
        let (mut num, mut den) = (0.0f64, 0.0f64);
        for f in Field::ALL {
            let (a, b) = (state.mode(f, k), rhs.mode(f, k));
            for j in 1..n {
                num = num.max((b[j] - a[j] * lambda).norm());
                den = den.max((a[j] * lambda).norm());
            }
        }
        num / den
    }

    /// One forward-Euler step of size dt followed by the interface solve.
    pub fn step_linear(&self, state: &mut State, dt: f64) -> Result<()> {
        let n = self.grid.n_x + 1;
        let zero = [Complex64::new(0.0, 0.0); 10];
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..state.n_modes() {
            if state.mode_is_zero(k) {
                continue;
            }
            for f in Field::ALL {
                self.apply_mode_operator(f, k, state.mode(f, k), &mut buf);
                let data = state.mode_mut(f, k);
                for j in 1..n - 1 {
                    data[j] += buf[j] * dt;
                }
            }
            self.bc.solve_mode(state, k, &zero);
        }
        state.t += dt;
        let bound = state.coeff_bound();
        if !(bound < BLOW_UP) {
            return Err(Error::BlowUp {
                t: state.t,
                max: bound,
            });
        }
        Ok(())
    }

    /// Interior-to-interior operator of mode k with the interface relations
    /// eliminated; its eigenvalues govern the semi-discrete dynamics.
    pub fn effective_operator(&self, k: usize) -> DMatrix<f64> {
        let n = self.grid.n_x + 1;
        let ni = n - 2;
        let dim = 5 * ni;
        let mut out = DMatrix::<f64>::zeros(dim, dim);
        let gain = self.bc.gain();
        // full nodal vector for a unit interior value, then apply the operator
        let mut full = vec![0.0; 5 * n];
        for col in 0..dim {
            full.iter_mut().for_each(|v| *v = 0.0);
            let (fc, jc) = (col / ni, col % ni + 1);
            full[fc * n + jc] = 1.0;
            for (i, u) in self.bc.unknowns().iter().enumerate() {
                full[u.field.index() * n + u.node] = gain[(i, fc * n + jc)];
            }
            for f in Field::ALL {
                let op = &self.ops[f.index()];
                let shift = self.kcoef[f.index()] * (k * k) as f64;
                let seg = &full[f.index() * n..(f.index() + 1) * n];
                for i in 1..n - 1 {
                    let mut acc: f64 = op[i * n..(i + 1) * n].iter().zip(seg).map(|(a, b)| a * b).sum();
                    acc -= shift * seg[i];
                    out[(f.index() * ni + i - 1, col)] = acc;
                }
            }
        }
        out
    }

    /// Eigenvalues of the effective operator of mode k.
    pub fn mode_spectrum(&self, k: usize) -> Vec<Complex64> {
        self.effective_operator(k).complex_eigenvalues().iter().copied().collect()
    }

    /// Largest forward-Euler step with |1 + dt μ| ≤ 1 for every decaying
    /// eigenvalue μ of modes 0 and N_y/2.
    pub fn euler_dt_limit(&self) -> f64 {
        let mut limit = f64::INFINITY;
        for k in [0, self.grid.n_y / 2] {
            for mu in self.mode_spectrum(k) {
                if mu.re < 0.0 {
                    limit = limit.min(-2.0 * mu.re / mu.norm_sqr());
                }
            }
        }
        limit
    }

    /// Conservative a-priori bound `0.5 jac_min² / (max(1, 1/Le) N_x⁴)`.
    pub fn conservative_dt_bound(&self) -> f64 {
        let jac_min = self
            .grid
            .maps
            .iter()
            .map(|m| m.jac)
            .fold(f64::INFINITY, f64::min);
        let nx4 = (self.grid.n_x as f64).powi(4);
        0.5 * jac_min * jac_min / ((1.0f64).max(1.0 / self.params.le) * nx4)
    }
}

/// Explicit eigenfunction of the linear problem for an unstable real growth rate.
///
/// In ξ, with e^{ikη·2π/ℓ} factored out:
/// `u = e^{ν⁺ξ}` (ξ < 0), `c₁e^{ν⁻ξ} + c₂e^{ν⁺ξ}` (0 < ξ < R), `c₃e^{ν⁻ξ}` (ξ > R);
/// `w = 0` (ξ < 0), `d₁e^{μ⁻ξ} + d₂e^{μ⁺ξ}` (0 < ξ < R), `d₃e^{μ⁻ξ}` (ξ > R).
#[derive(Clone, Copy, Debug)]
pub struct EigenMode {
    pub k: usize,
    pub le: f64,
    pub tilde_lambda: f64,
    pub nu_plus: f64,
    pub nu_minus: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl EigenMode {
    /// Builds the eigenfunction of mode k at the growth rate from the dispersion relation.
    pub fn build(params: &Params<f64>, k: usize) -> Result<Self> {
        let le = params.le;
        let lam = growth_root(le, k, params)?;
        let mc = ModeConstants::new(k, Complex64::new(lam, 0.0), le, params);
        let (x, y) = (mc.x_k.re, mc.y_k.re);
        let (r, th) = (params.r, params.theta_i);
        let nu_plus = -0.5 + x / 2.0;
        let nu_minus = -0.5 - x / 2.0;
        let mu_plus = -le / 2.0 + y / 2.0;
        let mu_minus = -le / 2.0 - y / 2.0;
        let den = (mu_plus * r).exp() - (nu_plus * r).exp();
        if den.abs() < 1e-14 {
            return Err(Error::Degenerate {
                what: "e^{mu+ R} - e^{nu+ R}",
                index: k,
                value: den,
            });
        }
        let c1 = ((x + mu_plus) * r).exp() * (th * r * x - 1.0) / den;
        let c2 = (mu_plus * r).exp() / den;
        let c3 = th * r * ((x + mu_plus) * r).exp() * x / den;
        let d1 = -le * (le + mu_plus) * (nu_plus * r).exp() * x / (den * y);
        let d2 = -(le + mu_minus) * d1 / (le + mu_plus);
        let d3 = (1.0 - (y * r).exp()) * d1;
        Ok(EigenMode {
            k,
            le,
            tilde_lambda: lam,
            nu_plus,
            nu_minus,
            mu_plus,
            mu_minus,
            c1,
            c2,
            c3,
            d1,
            d2,
            d3,
        })
    }

    /// Derivative of order `n` of the u profile on the given subdomain.
    pub fn u_on(&self, domain: Domain, xi: f64, n: i32) -> f64 {
        let e = |a: f64| a.powi(n) * (a * xi).exp();
        match domain {
            Domain::Minus => e(self.nu_plus),
            Domain::Zero => self.c1 * e(self.nu_minus) + self.c2 * e(self.nu_plus),
            Domain::Plus => self.c3 * e(self.nu_minus),
        }
    }

    /// Derivative of order `n` of the w profile on the given subdomain.
    pub fn w_on(&self, domain: Domain, xi: f64, n: i32) -> f64 {
        let e = |a: f64| a.powi(n) * (a * xi).exp();
        match domain {
            Domain::Minus => 0.0,
            Domain::Zero => self.d1 * e(self.mu_minus) + self.d2 * e(self.mu_plus),
            Domain::Plus => self.d3 * e(self.mu_minus),
        }
    }

    /// Trace w(0⁺) = d₁ + d₂.
    pub fn w_trace(&self) -> f64 {
        self.d1 + self.d2
    }

    /// Residuals of the seven interface relations in physical form.
    pub fn interface_residuals(&self, params: &Params<f64>) -> [f64; 7] {
        use Domain::*;
        let (le, r, th) = (params.le, params.r, params.theta_i);
        let u = |d, xi, n| self.u_on(d, xi, n);
        let w = |d, xi, n| self.w_on(d, xi, n);
        [
            u(Zero, 0.0, 0) - u(Minus, 0.0, 0),
            u(Plus, r, 0) - u(Zero, r, 0),
            le * (u(Zero, 0.0, 1) - u(Minus, 0.0, 1)) + w(Zero, 0.0, 0),
            le * w(Zero, 0.0, 0) + w(Zero, 0.0, 1),
            u(Plus, r, 0) + th * r * (u(Plus, r, 1) - u(Zero, r, 1)),
            le * (u(Plus, r, 1) - u(Zero, r, 1)) + w(Plus, r, 0) - w(Zero, r, 0),
            le * (w(Plus, r, 0) - w(Zero, r, 0)) + w(Plus, r, 1) - w(Zero, r, 1),
        ]
    }

    /// Samples `amplitude · 2Re(profile · e^{iky})` on the grid.
    pub fn sample(&self, model: &LinearModel, amplitude: f64) -> State {
        let mut state = model.zero_state();
        if self.k >= state.n_modes() {
            return state;
        }
        for f in Field::ALL {
            let d = f.domain();
            let xi = model.grid.xi_nodes(d);
            let vals: Vec<f64> = xi
                .iter()
                .map(|&s| if f.is_w() { self.w_on(d, s, 0) } else { self.u_on(d, s, 0) })
                .collect();
            let scale = if self.k == 0 { 2.0 } else { 1.0 };
            for (c, v) in state.mode_mut(f, self.k).iter_mut().zip(vals) {
                *c = Complex64::new(amplitude * scale * v, 0.0);
            }
        }
        state
    }
}

/// Initial data of a linear run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialData {
    /// `u ≡ 0`, `w₂ = ε(1 + sin²y)` on Ω₀, `w₃ ≡ 0`, then the interface solve.
    SinSquared { epsilon: f64 },
    /// Like [`InitialData::SinSquared`] but with `w₂` nonzero only at the
    /// Chebyshev node closest to the middle of Ω₀.
    SinSquaredMidNode { epsilon: f64 },
    /// The explicit eigenfunction of mode k scaled by `amplitude`.
    Eigen { k: usize, amplitude: f64 },
}

impl InitialData {
    pub fn build(&self, model: &LinearModel) -> Result<State> {
        let mut state = model.zero_state();
        match *self {
            InitialData::SinSquared { epsilon } | InitialData::SinSquaredMidNode { epsilon } => {
                // ε(1 + sin²y) = ε(3/2 − cos(2y)/2)
                let n = model.n_x() + 1;
                let mid = model.n_x() / 2;
                for j in 0..n {
                    if matches!(self, InitialData::SinSquaredMidNode { .. }) && j != mid {
                        continue;
                    }
                    state.mode_mut(Field::W2, 0)[j] = Complex64::new(1.5 * epsilon, 0.0);
                    if model.n_y() >= 6 {
                        state.mode_mut(Field::W2, 2)[j] = Complex64::new(-0.25 * epsilon, 0.0);
                    }
                }
            }
            InitialData::Eigen { k, amplitude } => {
                state = EigenMode::build(&model.params, k)?.sample(model, amplitude);
            }
        }
        model.apply_bcs_linear(&mut state);
        Ok(state)
    }
}

/// Settings of a linear run.
#[derive(Clone, Debug)]
pub struct LinearConfig {
    pub params: Params<f64>,
    pub n_x: usize,
    pub n_y: usize,
    /// Output step; split into stable Euler substeps when needed.
    pub dt: f64,
    pub t_final: f64,
    /// Record traces every this many output steps.
    pub snapshot_every: usize,
    pub initial: InitialData,
}

/// Traces at ξ = 0 (taken at x = −1 of Ω₀) at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceSample {
    pub t: f64,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
}

impl TraceSample {
    pub fn max_u(&self) -> f64 {
        self.u.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_w(&self) -> f64 {
        self.w.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// max over y of max(|u|, |w|).
    pub fn amplitude(&self) -> f64 {
        self.max_u().max(self.max_w())
    }
}

/// Output of a linear run.
#[derive(Clone, Debug)]
pub struct LinearRun {
    pub samples: Vec<TraceSample>,
    /// Euler substeps per output step.
    pub substeps: usize,
    /// Euler step actually used.
    pub dt_internal: f64,
    pub final_state: State,
}

/// Traces u(ξ = 0, y) and w(ξ = 0⁺, y).
pub fn traces_at_trailing_front(state: &State, model: &LinearModel) -> TraceSample {
    let j = model.n_x();
    TraceSample {
        t: state.t,
        u: state.physical_at_node(Field::U2, j, &model.fourier),
        w: state.physical_at_node(Field::W2, j, &model.fourier),
    }
}

/// Number of Euler substeps that keeps `dt / m` below 90% of the stability limit.
pub fn substeps_for(dt: f64, limit: f64) -> usize {
    if dt <= 0.9 * limit {
        1
    } else {
        (dt / (0.9 * limit)).ceil() as usize
    }
}

/// Runs the linear problem and records traces at the trailing front.
pub fn run_linear(config: &LinearConfig) -> Result<LinearRun> {
    let model = LinearModel::new(&config.params, config.n_x, config.n_y)?;
    let state = config.initial.build(&model)?;
    run_linear_from(&model, state, config)
}

/// Runs the linear problem from a given state.
pub fn run_linear_from(model: &LinearModel, mut state: State, config: &LinearConfig) -> Result<LinearRun> {
    if !(config.dt > 0.0) || !(config.t_final >= 0.0) {
        return Err(Error::InvalidParameter {
            field: "dt",
            reason: format!("dt = {} and t_final = {} must be positive", config.dt, config.t_final),
        });
    }
    let limit = model.euler_dt_limit();
    let substeps = substeps_for(config.dt, limit);
    if substeps > 1 {
        log::warn!(
            "dt = {:.3e} exceeds the forward-Euler limit {:.3e}; using {} substeps",
            config.dt,
            limit,
            substeps
        );
    }
    let h = config.dt / substeps as f64;
    if h > model.conservative_dt_bound() {
        log::info!(
            "Euler step {:.3e} above the conservative bound {:.3e} (actual limit {:.3e})",
            h,
            model.conservative_dt_bound(),
            limit
        );
    }
    let n_steps = (config.t_final / config.dt).round() as usize;
    let every = config.snapshot_every.max(1);
    let t0 = state.t;
    let mut samples = vec![traces_at_trailing_front(&state, model)];
    for step in 1..=n_steps {
        for _ in 0..substeps {
            model.step_linear(&mut state, h)?;
        }
        state.t = t0 + step as f64 * config.dt;
        if step % every == 0 || step == n_steps {
            samples.push(traces_at_trailing_front(&state, model));
        }
    }
    Ok(LinearRun {
        samples,
        substeps,
        dt_internal: h,
        final_state: state,
    })
}

/// Least-squares slope of log(amplitude) against t over the last half of the series.
pub fn measured_growth_rate(times: &[f64], amplitudes: &[f64]) -> Result<f64> {
    if times.len() != amplitudes.len() {
        return Err(Error::Length {
            expected: times.len(),
            got: amplitudes.len(),
        });
    }
    if times.len() < 10 {
        return Err(Error::TooFewSamples {
            got: times.len(),
            need: 10,
        });
    }
    let positive: Vec<f64> = amplitudes.iter().copied().filter(|a| *a > 0.0).collect();
    let (lo, hi) = positive
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), &a| (l.min(a), h.max(a)));
    let decades = if positive.len() == amplitudes.len() {
        (hi / lo).log10()
    } else {
        0.0
    };
    if !(decades >= 1.0) {
        return Err(Error::NoGrowth { decades });
    }
    let start = times.len() / 2;
    let xs = &times[start..];
    let ys: Vec<f64> = amplitudes[start..].iter().map(|a| a.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(le: f64, n_x: usize, n_y: usize) -> LinearModel {
        LinearModel::new(&Params::new(0.75, le, 100.0).unwrap(), n_x, n_y).unwrap()
    }

    #[test]
    fn zero_state_stays_zero() {
        let m = model(0.3, 12, 8);
        let mut s = m.zero_state();
        m.apply_bcs_linear(&mut s);
        assert!(s.coeffs.iter().all(|v| v.iter().all(|c| c.norm() == 0.0)));
        m.step_linear(&mut s, 1e-5).unwrap();
        assert!(s.coeffs.iter().all(|v| v.iter().all(|c| c.norm() == 0.0)));
    }

    #[test]
    fn boundary_solve_satisfies_rows() {
        let m = model(0.3, 16, 8);
        let mut s = m.zero_state();
        let mut seed = 7u64;
        for v in s.coeffs.iter_mut() {
            for c in v.iter_mut() {
                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let a = (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                *c = Complex64::new(a, 0.5 * a);
            }
        }
        m.apply_bcs_linear(&mut s);
        assert!(m.boundary_residual(&s) < 1e-10);
    }

    #[test]
    fn advection_of_linear_profile() {
        // u₁ = ξ on Ω₋ has u_ξ + u_ξξ = 1
        let m = model(0.3, 10, 4);
        let mut s = m.zero_state();
        let xi = m.grid.xi_nodes(Domain::Minus);
        for (c, x) in s.mode_mut(Field::U1, 0).iter_mut().zip(xi) {
            *c = Complex64::new(x, 0.0);
        }
        let r = m.rhs_linear(&s);
        assert!(r.mode(Field::U1, 0).iter().all(|c| (c.re - 1.0).abs() < 1e-12));
    }

    #[test]
    fn flat_mode_decays_by_transverse_diffusion() {
        let m = model(0.3, 10, 8);
        let mut s = m.zero_state();
        s.mode_mut(Field::U2, 1).iter_mut().for_each(|c| *c = Complex64::new(1.0, 0.0));
        let r = m.rhs_linear(&s);
        let expected = -(2.0 * std::f64::consts::PI / 100.0).powi(2);
        assert!(r.mode(Field::U2, 1).iter().all(|c| (c.re - expected).abs() < 1e-10));
    }

    #[test]
    fn eigenmode_constants() {
        let p = Params::new(0.75, 0.3, 100.0).unwrap();
        let e = EigenMode::build(&p, 1).unwrap();
        assert!((e.tilde_lambda - 0.006706722341529116).abs() < 1e-12);
        for r in e.interface_residuals(&p) {
            assert!(r.abs() < 1e-12, "{r}");
        }
        assert!(e.w_trace().abs() > 1e-3);
        assert!((e.d3 - (1.0 - ((e.mu_plus - e.mu_minus) * p.r).exp()) * e.d1).abs() < 1e-12);
        assert!((e.d2 * (p.le + e.mu_plus) + (p.le + e.mu_minus) * e.d1).abs() < 1e-12);
    }

    #[test]
    fn sampled_eigenfunction_is_discrete_eigenvector() {
        let p = Params::new(0.75, 0.3, 100.0).unwrap();
        let m = LinearModel::new(&p, 32, 8).unwrap();
        let e = EigenMode::build(&p, 1).unwrap();
        let s = e.sample(&m, 1.0);
        assert!(m.eigen_residual(&s, 1, e.tilde_lambda) < 1e-5);
        assert!(m.interface_residual(&s, 1) < 1e-9);
    }

    #[test]
    fn eigenfunction_grows_at_its_rate() {
        let p = Params::new(0.75, 0.3, 100.0).unwrap();
        let m = LinearModel::new(&p, 12, 4).unwrap();
        let e = EigenMode::build(&p, 1).unwrap();
        let s0 = e.sample(&m, 1.0);
        let mut s = s0.clone();
        m.apply_bcs_linear(&mut s);
        let cfg = LinearConfig {
            params: p,
            n_x: 12,
            n_y: 4,
            dt: 1e-4,
            t_final: 0.01,
            snapshot_every: 100,
            initial: InitialData::Eigen { k: 1, amplitude: 1.0 },
        };
        let run = run_linear_from(&m, s, &cfg).unwrap();
        let g = (e.tilde_lambda * 0.01).exp();
        let (a, b) = (s0.mode(Field::W2, 1), run.final_state.mode(Field::W2, 1));
        for j in 0..=12 {
            assert!((b[j] - a[j] * g).norm() <= 1e-3 * a[j].norm(), "node {j}");
        }
    }

    #[test]
    fn growth_rate_of_synthetic_series() {
        let t: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let a: Vec<f64> = t.iter().map(|t| 3.0 * (0.02 * t).exp()).collect();
        assert!((measured_growth_rate(&t, &a).unwrap() - 0.02).abs() < 1e-6);
        let d: Vec<f64> = t.iter().map(|t| (-0.02 * t).exp()).collect();
        assert!(measured_growth_rate(&t, &d).unwrap() < 0.0);
        let flat: Vec<f64> = t.iter().map(|t| 1.0 + 1e-3 * t).collect();
        assert!(matches!(measured_growth_rate(&t, &flat), Err(Error::NoGrowth { .. })));
        assert!(measured_growth_rate(&t[..5], &a[..5]).is_err());
    }

    #[test]
    fn euler_limit_is_sharp() {
        let m = model(0.3, 12, 4);
        let lim = m.euler_dt_limit();
        assert!(lim > m.conservative_dt_bound());
        let run = |dt: f64| {
            let mut s = InitialData::SinSquared { epsilon: 1e-2 }.build(&m).unwrap();
            let steps = (0.2 / dt) as usize;
            for _ in 0..steps {
                if m.step_linear(&mut s, dt).is_err() {
                    return f64::INFINITY;
                }
            }
            s.coeff_bound()
        };
        assert!(run(0.9 * lim) < 1.0);
        assert!(run(1.5 * lim) > 1.0);
    }

    #[test]
    fn mode_decoupling() {
        let m = model(0.3, 12, 8);
        let mut s = InitialData::Eigen { k: 1, amplitude: 1.0 }.build(&m).unwrap();
        for _ in 0..20 {
            m.step_linear(&mut s, 1e-5).unwrap();
        }
        for k in [0, 2, 3, 4] {
            assert!(s.mode_is_zero(k));
        }
    }
}

