//! Coordinate-stretched second-order layer, stepped by the three-level
//! linearly implicit scheme (FD-FP) with a GMRES solve per step.
//!
//! With the stretch `S = 1/(1 + Rσ)` and `A = -S∂x S∂x` (plus the same
//! term in `y` on 2D grids), a step solves
//!
//! ```text
//! (ε²/τ² + 1/(2ε²) + A/2) w = (2ε²/τ²) uⁿ - λ|uⁿ|²uⁿ,     uⁿ⁺¹ = w - uⁿ⁻¹
//! ```
//!
//! preconditioned by the Fourier multiplier
//! `(ε²/τ² + 1/(2ε²) + |μ|²/2)⁻¹`. `ε = 1` is the classical scaling.
//!
//! 2D fields are row-major with `x` as the slow index (see [`Grid2D::index`]).

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::absorption::{sample_profile, LayerModel, ProfileSpec};
use crate::error::{Error, Result};
use crate::krylov::{gmres_solve, GmresSettings, KrylovReport, LinearOperator, MultiplierOperator};
use crate::spectral::{Axis, Field, FourierMultiplier, Grid, Grid1D, Grid2D, Spectral};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Amplitude treated as a blow-up even before overflow.
pub const BLOWUP_AMPLITUDE: f64 = 1e100;

#[inline]
fn cubic(lambda: f64, u: Complex64) -> Complex64 {
    u * (lambda * u.norm_sqr())
}

fn check_finite(values: &[Complex64], step: usize) -> Result<()> {
    let limit = BLOWUP_AMPLITUDE * BLOWUP_AMPLITUDE;
    if values
        .iter()
        .all(|z| z.re.is_finite() && z.im.is_finite() && z.norm_sqr() < limit)
    {
        Ok(())
    } else {
        Err(Error::Blowup { step })
    }
}

/// Two consecutive time levels.
#[derive(Debug, Clone, PartialEq)]
pub struct Pml2State {
    pub u_prev: Field,
    pub u_curr: Field,
    /// Index of `u_curr`.
    pub time_index: usize,
}

impl Pml2State {
    /// Centered time derivative `(u_next - u_prev)/(2τ)` at the current level.
    pub fn centered_velocity(&self, u_next: &Field, tau: f64) -> Field {
        let scale = 1.0 / (2.0 * tau);
        Field::from_values(
            u_next
                .values()
                .iter()
                .zip(self.u_prev.values())
                .map(|(a, b)| (a - b) * scale)
                .collect(),
        )
    }
}

/// `A = -S_x∂x S_x∂x (- S_y∂y S_y∂y)` applied matrix-free.
#[derive(Debug, Clone)]
pub struct StretchedLaplacian {
    spectral: Spectral,
    stretch_x: Vec<Complex64>,
    stretch_y: Vec<Complex64>,
    dx: FourierMultiplier,
    dy: Option<FourierMultiplier>,
    tx: Vec<Complex64>,
    ty: Vec<Complex64>,
}

impl StretchedLaplacian {
    /// `stretch_y` is required on 2D grids and ignored in 1D.
    pub fn new(grid: Grid, stretch_x: Vec<Complex64>, stretch_y: Option<Vec<Complex64>>) -> Result<Self> {
        let (nx, ny) = match &grid {
            Grid::One(g) => (g.len(), 0),
            Grid::Two(g) => (g.x.len(), g.y.len()),
        };
        if stretch_x.len() != nx {
            return Err(Error::SizeMismatch {
                expected: nx,
                found: stretch_x.len(),
            });
        }
        let (stretch_y, dy) = match &grid {
            Grid::One(_) => (Vec::new(), None),
            Grid::Two(_) => {
                let sy = stretch_y.ok_or_else(|| Error::config("2D operator needs a y stretch"))?;
                if sy.len() != ny {
                    return Err(Error::SizeMismatch {
                        expected: ny,
                        found: sy.len(),
                    });
                }
                (sy, Some(grid.first_derivative(Axis::Y)))
            }
        };
        let n = grid.len();
        Ok(Self {
            dx: grid.first_derivative(Axis::X),
            dy,
            stretch_x,
            stretch_y,
            spectral: Spectral::new(grid),
            tx: vec![ZERO; n],
            ty: vec![ZERO; n],
        })
    }

    /// The unstretched operator `-Δ`.
    pub fn unstretched(grid: Grid) -> Self {
        let ones = |n: usize| vec![Complex64::new(1.0, 0.0); n];
        let (sx, sy) = match &grid {
            Grid::One(g) => (ones(g.len()), None),
            Grid::Two(g) => (ones(g.x.len()), Some(ones(g.y.len()))),
        };
        Self::new(grid, sx, sy).expect("unit stretches always match the grid")
    }

    pub fn grid(&self) -> &Grid {
        self.spectral.grid()
    }
}

impl LinearOperator for StretchedLaplacian {
    fn dim(&self) -> usize {
        self.spectral.len()
    }

    fn apply(&mut self, x: &[Complex64], y: &mut [Complex64]) {
        match self.dy.as_ref() {
            None => {
                self.spectral.apply_into(x, &self.dx, &mut self.tx);
                for (t, s) in self.tx.iter_mut().zip(&self.stretch_x) {
                    *t *= s;
                }
                self.spectral.apply_in_place(&mut self.tx, &self.dx);
                for ((yi, t), s) in y.iter_mut().zip(&self.tx).zip(&self.stretch_x) {
                    *yi = -(s * t);
                }
            }
            Some(dy) => {
                let ny = self.stretch_y.len();
                self.spectral
                    .apply_many(x, &[&self.dx, dy], &mut [&mut self.tx[..], &mut self.ty[..]]);
                for (k, (a, b)) in self.tx.iter_mut().zip(self.ty.iter_mut()).enumerate() {
                    *a *= self.stretch_x[k / ny];
                    *b *= self.stretch_y[k % ny];
                }
                self.spectral.apply_in_place(&mut self.tx, &self.dx);
                self.spectral.apply_in_place(&mut self.ty, dy);
                for (k, yi) in y.iter_mut().enumerate() {
                    *yi = -(self.stretch_x[k / ny] * self.tx[k] + self.stretch_y[k % ny] * self.ty[k]);
                }
            }
        }
    }
}

/// `c·I + A/2`.
struct ShiftedOperator<'a> {
    lap: &'a mut StretchedLaplacian,
    shift: f64,
}

impl LinearOperator for ShiftedOperator<'_> {
    fn dim(&self) -> usize {
        self.lap.dim()
    }

    fn apply(&mut self, x: &[Complex64], y: &mut [Complex64]) {
        self.lap.apply(x, y);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = *yi * 0.5 + xi * self.shift;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pml2Params {
    pub lambda: f64,
    pub tau: f64,
    pub eps: f64,
    pub gmres: GmresSettings,
    pub preconditioned: bool,
    /// Accept a non-real or nonpositive `R`. Only for stability demonstrations.
    pub allow_complex_shift: bool,
    pub form: SolveForm,
}

/// Unknown of the linear solve in each step.
///
/// Both give the same `uⁿ⁺¹` in exact arithmetic. With `Direct` the GMRES
/// stopping error is relative to `|w| ≈ 2|uⁿ|` and accumulates through the
/// three-level recurrence roughly like `(t/τ)²·tol`, which dominates for small `τ`;
/// `Increment` solves for `w - 2uⁿ = O(τ²)` instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum SolveForm {
    /// Solve for `w = uⁿ⁺¹ + uⁿ⁻¹`.
    Direct,
    /// Solve for `w - 2uⁿ`.
    Increment,
}

impl Pml2Params {
    pub fn new(lambda: f64, tau: f64, eps: f64) -> Self {
        Self {
            lambda,
            tau,
            eps,
            gmres: GmresSettings::default(),
            preconditioned: true,
            allow_complex_shift: false,
            form: SolveForm::Increment,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) {
            return Err(Error::config("time step must be positive"));
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::config("epsilon must lie in (0, 1]"));
        }
        if !(self.lambda >= 0.0) {
            return Err(Error::config("lambda must be nonnegative"));
        }
        if !(self.gmres.tol > 0.0) {
            return Err(Error::config("GMRES tolerance must be positive"));
        }
        Ok(())
    }

    /// Diagonal part `ε²/τ² + 1/(2ε²)` of the implicit operator.
    pub fn shift(&self) -> f64 {
        let e2 = self.eps * self.eps;
        e2 / (self.tau * self.tau) + 1.0 / (2.0 * e2)
    }
}

fn check_shift(spec: &ProfileSpec, params: &Pml2Params) -> Result<()> {
    let r = spec.shift;
    if !params.allow_complex_shift && !(r.im == 0.0 && r.re > 0.0) {
        return Err(Error::config(
            "R must be real and positive; complex values are only accepted in stability demo mode",
        ));
    }
    Ok(())
}

fn sample_stretch(axis: &Grid1D, spec: &ProfileSpec) -> Result<Vec<Complex64>> {
    Ok(sample_profile(axis, spec, LayerModel::Stretched)?.stretch().to_vec())
}

/// FD-FP stepper on a 1D or 2D grid.
#[derive(Debug, Clone)]
pub struct Pml2Solver {
    params: Pml2Params,
    lap: StretchedLaplacian,
    precond: MultiplierOperator,
    rhs: Vec<Complex64>,
}

impl Pml2Solver {
    /// Layer of the given profile along every axis of `grid`.
    pub fn new(grid: impl Into<Grid>, spec: &ProfileSpec, params: Pml2Params) -> Result<Self> {
        let grid = grid.into();
        check_shift(spec, &params)?;
        let lap = match &grid {
            Grid::One(g) => StretchedLaplacian::new(grid.clone(), sample_stretch(g, spec)?, None)?,
            Grid::Two(g) => {
                let sx = sample_stretch(&g.x, spec)?;
                let sy = sample_stretch(&g.y, spec)?;
                StretchedLaplacian::new(grid.clone(), sx, Some(sy))?
            }
        };
        Self::with_operator(lap, params)
    }

    /// No layer (`σ ≡ 0`).
    pub fn without_layer(grid: impl Into<Grid>, params: Pml2Params) -> Result<Self> {
        Self::with_operator(StretchedLaplacian::unstretched(grid.into()), params)
    }

    pub fn with_operator(lap: StretchedLaplacian, params: Pml2Params) -> Result<Self> {
        params.validate()?;
        let grid = lap.grid().clone();
        let c = params.shift();
        let factors = grid
            .squared_wavenumbers()
            .iter()
            .map(|k2| Complex64::new(1.0 / (c + k2 / 2.0), 0.0))
            .collect();
        let n = grid.len();
        Ok(Self {
            precond: MultiplierOperator {
                spectral: Spectral::new(grid),
                multiplier: FourierMultiplier::new(factors),
            },
            lap,
            params,
            rhs: vec![ZERO; n],
        })
    }

    pub fn params(&self) -> &Pml2Params {
        &self.params
    }

    pub fn grid(&self) -> &Grid {
        self.lap.grid()
    }

    pub fn laplacian_mut(&mut self) -> &mut StretchedLaplacian {
        &mut self.lap
    }

    fn a_plus(&mut self, u0: &Field, lambda: f64) -> Vec<Complex64> {
        let mut au = vec![ZERO; u0.len()];
        self.lap.apply(u0.values(), &mut au);
        for (a, u) in au.iter_mut().zip(u0.values()) {
            *a += cubic(lambda, *u);
        }
        au
    }

    /// Taylor start `u¹ = u0 + τv0 - τ²/2 (Au0 + u0 + λ|u0|²u0)`; needs `ε = 1`.
    pub fn first_step_classical(&mut self, u0: &Field, v0: &Field) -> Result<Pml2State> {
        if self.params.eps != 1.0 {
            return Err(Error::config("the Taylor start is only valid for epsilon = 1"));
        }
        let n = self.lap.dim();
        u0.check_len(n)?;
        v0.check_len(n)?;
        let tau = self.params.tau;
        let au = self.a_plus(u0, self.params.lambda);
        let u1 = u0
            .values()
            .iter()
            .zip(v0.values())
            .zip(&au)
            .map(|((u, v), a)| u + v * tau - (a + u) * (tau * tau / 2.0))
            .collect();
        self.finish_start(u0, u1)
    }

    /// Filtered start for `ε < 1`:
    /// `u¹ = u0 + τv0 - (τ/2)sin(τ/ε²)(Au0 + λ|u0|²u0) - (τ/2)sin(τ/ε⁴)u0`.
    pub fn first_step_filtered(&mut self, u0: &Field, v0: &Field) -> Result<Pml2State> {
        let eps = self.params.eps;
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::config("the filtered start needs epsilon in (0, 1)"));
        }
        let n = self.lap.dim();
        u0.check_len(n)?;
        v0.check_len(n)?;
        let tau = self.params.tau;
        let e2 = eps * eps;
        let s1 = (tau / 2.0) * (tau / e2).sin();
        let s2 = (tau / 2.0) * (tau / (e2 * e2)).sin();
        let au = self.a_plus(u0, self.params.lambda);
        let u1 = u0
            .values()
            .iter()
            .zip(v0.values())
            .zip(&au)
            .map(|((u, v), a)| u + v * tau - a * s1 - u * s2)
            .collect();
        self.finish_start(u0, u1)
    }

    /// Taylor start at `ε = 1`, filtered start otherwise.
    pub fn first_step(&mut self, u0: &Field, v0: &Field) -> Result<Pml2State> {
        if self.params.eps == 1.0 {
            self.first_step_classical(u0, v0)
        } else {
            self.first_step_filtered(u0, v0)
        }
    }

    fn finish_start(&self, u0: &Field, u1: Vec<Complex64>) -> Result<Pml2State> {
        check_finite(&u1, 1)?;
        Ok(Pml2State {
            u_prev: u0.clone(),
            u_curr: Field::from_values(u1),
            time_index: 1,
        })
    }

    /// Advances by one step. Fails if GMRES stalls or the state blows up.
    pub fn fd_step(&mut self, state: &mut Pml2State) -> Result<KrylovReport> {
        let n = self.lap.dim();
        state.u_curr.check_len(n)?;
        state.u_prev.check_len(n)?;
        let e2 = self.params.eps * self.params.eps;
        let lambda = self.params.lambda;
        let u = state.u_curr.values();
        match self.params.form {
            SolveForm::Direct => {
                let coef = 2.0 * e2 / (self.params.tau * self.params.tau);
                for (r, u) in self.rhs.iter_mut().zip(u) {
                    *r = u * coef - cubic(lambda, *u);
                }
            }
            SolveForm::Increment => {
                // G(2u) subtracted analytically: d = w - 2u solves G d = -(u/ε² + Au + λ|u|²u)
                self.lap.apply(u, &mut self.rhs);
                for (r, u) in self.rhs.iter_mut().zip(u) {
                    *r = -(*r + u / e2 + cubic(lambda, *u));
                }
            }
        }
        let mut op = ShiftedOperator {
            lap: &mut self.lap,
            shift: self.params.shift(),
        };
        let precond: Option<&mut dyn LinearOperator> = if self.params.preconditioned {
            Some(&mut self.precond)
        } else {
            None
        };
        let (w, report) = gmres_solve(&mut op, precond, &self.rhs, &self.params.gmres);
        let step = state.time_index + 1;
        if !report.converged {
            return Err(Error::NoConvergence {
                step,
                iterations: report.iterations,
                residual: report.final_residual,
            });
        }
        let mut next = w;
        match self.params.form {
            SolveForm::Direct => {
                for (x, p) in next.iter_mut().zip(state.u_prev.values()) {
                    *x -= p;
                }
            }
            SolveForm::Increment => {
                for ((x, c), p) in next.iter_mut().zip(state.u_curr.values()).zip(state.u_prev.values()) {
                    *x += (c - p) + c;
                }
            }
        }
        check_finite(&next, step)?;
        state.u_prev = core::mem::replace(&mut state.u_curr, Field::from_values(next));
        state.time_index = step;
        Ok(report)
    }
}

/// Initial data in rotating coordinates: `u0 = ψ0`,
/// `v0 = Ω(y∂xψ0 - x∂yψ0) + ψ1`.
pub fn build_rotating_initial_data(grid: &Grid2D, psi0: &Field, psi1: &Field, omega: f64) -> Result<(Field, Field)> {
    psi0.check_len(grid.len())?;
    psi1.check_len(grid.len())?;
    let g = Grid::Two(grid.clone());
    let mut spectral = Spectral::new(g.clone());
    let n = grid.len();
    let mut dx = vec![ZERO; n];
    let mut dy = vec![ZERO; n];
    let mx = g.first_derivative(Axis::X);
    let my = g.first_derivative(Axis::Y);
    spectral.apply_many(psi0.values(), &[&mx, &my], &mut [&mut dx[..], &mut dy[..]]);
    let ny = grid.y.len();
    let v0 = (0..n)
        .map(|k| {
            let x = grid.x.nodes()[k / ny];
            let y = grid.y.nodes()[k % ny];
            (dx[k] * y - dy[k] * x) * omega + psi1.values()[k]
        })
        .collect();
    Ok((psi0.clone(), Field::from_values(v0)))
}

/// `max|u|` at each step of a run on `[0, t_final]`, starting with the
/// initial value. Once the state blows up or GMRES fails, the remaining
/// entries hold `cap`.
pub fn stability_probe(
    solver: &mut Pml2Solver,
    u0: &Field,
    v0: &Field,
    t_final: f64,
    cap: f64,
) -> Result<Vec<(f64, f64)>> {
    let tau = solver.params().tau;
    let steps = (t_final / tau).round() as usize;
    let mut series = Vec::with_capacity(steps + 1);
    series.push((0.0, u0.max_abs().min(cap)));
    if steps == 0 {
        return Ok(series);
    }
    let mut state = match solver.first_step(u0, v0) {
        Ok(s) => s,
        Err(Error::Blowup { .. }) => {
            series.extend((1..=steps).map(|k| (k as f64 * tau, cap)));
            return Ok(series);
        }
        Err(e) => return Err(e),
    };
    series.push((tau, state.u_curr.max_abs().min(cap)));
    let mut k = 1;
    while k < steps {
        let amp = match solver.fd_step(&mut state) {
            Ok(_) => state.u_curr.max_abs(),
            Err(Error::Blowup { .. }) | Err(Error::NoConvergence { .. }) => cap,
            Err(e) => return Err(e),
        };
        k += 1;
        if amp >= cap {
            series.extend((k..=steps).map(|j| (j as f64 * tau, cap)));
            break;
        }
        series.push((k as f64 * tau, amp));
    }
    Ok(series)
}
