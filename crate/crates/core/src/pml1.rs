//! First-order layer system with two auxiliary fields, integrated by the
//! exponential wave integrator with Fourier collocation (EWI-FP).
//!
//! With `ω = √(1 - ε²∂xx)/ε²` and the forcing
//! `f = σ(η2 - ε²v + ε²αu) + ∂x(ση1) - λ|u|²u`, one step reads
//!
//! ```text
//! u⁺  = cos(ωτ)u + sin(ωτ)/ω v + τ sin(ωτ)/(2ε²ω) f
//! η1⁺ = e^{-(σ+α)τ}η1 - τ/2 [e^{-(σ+α)τ}∂x u + ∂x u⁺]
//! η2⁺ = e^{-ατ}η2 - τ/2 [e^{-ατ}(c u + λ|u|²u) + c u⁺ + λ|u⁺|²u⁺],   c = ε²α² + ε⁻²
//! v⁺  = -ω sin(ωτ)u + cos(ωτ)v + τ/(2ε²) [cos(ωτ)f + f⁺]
//! ```
//!
//! `f⁺` contains `-σε²v⁺`, so the last line is solved node by node by
//! dividing by `1 + τσ/2`. `ε = 1` is the classical scaling.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::absorption::{AbsorptionProfile, ProfileKind};
use crate::error::{Error, Result};
use crate::spectral::{op_trig, Field, FourierMultiplier, Grid, Grid1D, Spectral, TrigKind, Axis};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Amplitude treated as a blow-up even before overflow.
pub const BLOWUP_AMPLITUDE: f64 = 1e100;

#[derive(Debug, Clone, PartialEq)]
pub struct Pml1State {
    pub u: Field,
    pub v: Field,
    pub eta1: Field,
    pub eta2: Field,
    pub time_index: usize,
    pub alpha: f64,
}

/// Initial state with both auxiliary fields at zero.
pub fn init_pml1(u0: Field, v0: Field, alpha: f64) -> Result<Pml1State> {
    v0.check_len(u0.len())?;
    if !(alpha >= 0.0) {
        return Err(Error::config("alpha must be nonnegative"));
    }
    let n = u0.len();
    Ok(Pml1State {
        u: u0,
        v: v0,
        eta1: Field::zeros(n),
        eta2: Field::zeros(n),
        time_index: 0,
        alpha,
    })
}

#[derive(Debug, Clone)]
pub struct Pml1Params {
    pub lambda: f64,
    pub profile: AbsorptionProfile,
    pub tau: f64,
    pub eps: f64,
}

impl Pml1Params {
    pub fn validate(&self) -> Result<()> {
        if self.profile.spec().kind != ProfileKind::Polynomial {
            return Err(Error::config(
                "the first-order layer system only accepts the polynomial profile",
            ));
        }
        if !(self.tau > 0.0) {
            return Err(Error::config("time step must be positive"));
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::config("epsilon must lie in (0, 1]"));
        }
        if !(self.lambda >= 0.0) {
            return Err(Error::config("lambda must be nonnegative"));
        }
        Ok(())
    }
}

#[inline]
fn cubic(lambda: f64, u: Complex64) -> Complex64 {
    u * (lambda * u.norm_sqr())
}

fn check_finite(values: &[Complex64], step: usize) -> Result<()> {
    let ok = values
        .iter()
        .all(|z| z.re.is_finite() && z.im.is_finite() && z.norm_sqr() < BLOWUP_AMPLITUDE * BLOWUP_AMPLITUDE);
    if ok {
        Ok(())
    } else {
        Err(Error::Blowup { step })
    }
}

/// EWI-FP stepper for the first-order layer system on a 1D grid.
#[derive(Debug, Clone)]
pub struct Pml1Solver {
    params: Pml1Params,
    alpha: f64,
    spectral: Spectral,
    cos: FourierMultiplier,
    sinc: FourierMultiplier,
    sin_times: FourierMultiplier,
    deriv: FourierMultiplier,
    decay_eta1: Vec<f64>,
    decay_eta2: f64,
    // scratch
    u_hat: Vec<Complex64>,
    v_hat: Vec<Complex64>,
    f_hat: Vec<Complex64>,
    du_old: Vec<Complex64>,
    du_new: Vec<Complex64>,
    b: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Pml1Solver {
    pub fn new(grid: &Grid1D, params: Pml1Params, alpha: f64) -> Result<Self> {
        params.validate()?;
        if params.profile.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                found: params.profile.len(),
            });
        }
        if !(alpha >= 0.0) {
            return Err(Error::config("alpha must be nonnegative"));
        }
        let g = Grid::One(grid.clone());
        let omega = g.bracket(params.eps)?;
        let tau = params.tau;
        let decay_eta1 = params
            .profile
            .sigma()
            .iter()
            .map(|s| (-(s + alpha) * tau).exp())
            .collect();
        let n = grid.len();
        Ok(Self {
            cos: op_trig(&omega, tau, TrigKind::Cos),
            sinc: op_trig(&omega, tau, TrigKind::Sinc),
            sin_times: op_trig(&omega, tau, TrigKind::SinTimes),
            deriv: g.first_derivative(Axis::X),
            spectral: Spectral::new(grid.clone()),
            decay_eta1,
            decay_eta2: (-alpha * tau).exp(),
            alpha,
            params,
            u_hat: vec![ZERO; n],
            v_hat: vec![ZERO; n],
            f_hat: vec![ZERO; n],
            du_old: vec![ZERO; n],
            du_new: vec![ZERO; n],
            b: vec![ZERO; n],
            tmp: vec![ZERO; n],
        })
    }

    pub fn params(&self) -> &Pml1Params {
        &self.params
    }

    /// `f = σ(η2 - ε²v + ε²αu) + ∂x(ση1) - λ|u|²u`, written to `out`.
    fn forcing(&mut self, u: &[Complex64], v: &[Complex64], eta1: &[Complex64], eta2: &[Complex64], out: &mut [Complex64]) {
        let sigma = self.params.profile.sigma();
        let e2 = self.params.eps * self.params.eps;
        for ((t, s), e) in self.tmp.iter_mut().zip(sigma).zip(eta1) {
            *t = e * s;
        }
        self.spectral.apply_in_place(&mut self.tmp, &self.deriv);
        for j in 0..out.len() {
            out[j] = (eta2[j] - v[j] * e2 + u[j] * (e2 * self.alpha)) * sigma[j] + self.tmp[j]
                - cubic(self.params.lambda, u[j]);
        }
    }

    /// Advances `state` by one step.
    pub fn step(&mut self, state: &mut Pml1State) -> Result<()> {
        let n = state.u.len();
        state.u.check_len(self.spectral.len())?;
        let tau = self.params.tau;
        let e2 = self.params.eps * self.params.eps;
        let lambda = self.params.lambda;
        let c2 = e2 * self.alpha * self.alpha + 1.0 / e2;
        let half = tau / (2.0 * e2);

        let mut f = vec![ZERO; n];
        self.forcing(state.u.values(), state.v.values(), state.eta1.values(), state.eta2.values(), &mut f);

        self.u_hat.copy_from_slice(state.u.values());
        self.spectral.forward(&mut self.u_hat);
        self.v_hat.copy_from_slice(state.v.values());
        self.spectral.forward(&mut self.v_hat);
        self.f_hat.copy_from_slice(&f);
        self.spectral.forward(&mut self.f_hat);

        let mut u_new_hat = vec![ZERO; n];
        for l in 0..n {
            let c = self.cos.factors()[l].re;
            let s = self.sinc.factors()[l].re;
            let w = self.sin_times.factors()[l].re;
            u_new_hat[l] = self.u_hat[l] * c + self.v_hat[l] * s + self.f_hat[l] * (half * s);
            self.b[l] = -self.u_hat[l] * w + self.v_hat[l] * c + self.f_hat[l] * (half * c);
            let d = self.deriv.factors()[l];
            self.du_old[l] = self.u_hat[l] * d;
            self.du_new[l] = u_new_hat[l] * d;
        }
        self.spectral.inverse(&mut self.b);
        self.spectral.inverse(&mut self.du_old);
        self.spectral.inverse(&mut self.du_new);
        let mut u_new = u_new_hat;
        self.spectral.inverse(&mut u_new);

        let u_old = state.u.values();
        {
            let eta1 = state.eta1.values_mut();
            for j in 0..n {
                let d = self.decay_eta1[j];
                eta1[j] = eta1[j] * d - (self.du_old[j] * d + self.du_new[j]) * (tau / 2.0);
            }
        }
        {
            let eta2 = state.eta2.values_mut();
            let d = self.decay_eta2;
            for j in 0..n {
                let old = u_old[j] * c2 + cubic(lambda, u_old[j]);
                let new = u_new[j] * c2 + cubic(lambda, u_new[j]);
                eta2[j] = eta2[j] * d - (old * d + new) * (tau / 2.0);
            }
        }

        // f⁺ without its -σε²v⁺ part
        let zero_v = vec![ZERO; n];
        let mut g = vec![ZERO; n];
        self.forcing(&u_new, &zero_v, state.eta1.values(), state.eta2.values(), &mut g);
        let sigma = self.params.profile.sigma();
        let v = state.v.values_mut();
        for j in 0..n {
            v[j] = (self.b[j] + g[j] * half) / (1.0 + tau * sigma[j] / 2.0);
        }
        state.u.values_mut().copy_from_slice(&u_new);
        state.time_index += 1;
        check_finite(state.u.values(), state.time_index)?;
        check_finite(state.v.values(), state.time_index)?;
        Ok(())
    }
}

/// One EWI-FP step without a persistent solver (rebuilds the operators).
pub fn ewi_step(state: &Pml1State, grid: &Grid1D, params: &Pml1Params) -> Result<Pml1State> {
    let mut solver = Pml1Solver::new(grid, params.clone(), state.alpha)?;
    let mut next = state.clone();
    solver.step(&mut next)?;
    Ok(next)
}

/// `g(s) = -√(s² + 1)/(s + α)` on the principal branch, for `Re s > 0`.
pub fn damping_factor(s: Complex64, alpha: f64) -> Result<Complex64> {
    if !(s.re > 0.0) {
        return Err(Error::config("damping factor requires Re(s) > 0"));
    }
    if !(alpha >= 0.0) {
        return Err(Error::config("alpha must be nonnegative"));
    }
    Ok(-(s * s + 1.0).sqrt() / (s + alpha))
}

/// EWI-FP for the unbounded problem (`σ ≡ 0`) on a 1D or 2D grid; only `u`
/// and `v` are evolved. Used for enlarged-domain reference solutions.
#[derive(Debug, Clone)]
pub struct FreeEwiSolver {
    spectral: Spectral,
    cos: FourierMultiplier,
    sinc: FourierMultiplier,
    sin_times: FourierMultiplier,
    lambda: f64,
    tau: f64,
    eps: f64,
    u_hat: Vec<Complex64>,
    v_hat: Vec<Complex64>,
    f_hat: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreeState {
    pub u: Field,
    pub v: Field,
    pub time_index: usize,
}

impl FreeEwiSolver {
    pub fn new(grid: impl Into<Grid>, lambda: f64, tau: f64, eps: f64) -> Result<Self> {
        let grid = grid.into();
        if !(tau > 0.0) {
            return Err(Error::config("time step must be positive"));
        }
        let omega = grid.bracket(eps)?;
        let n = grid.len();
        Ok(Self {
            cos: op_trig(&omega, tau, TrigKind::Cos),
            sinc: op_trig(&omega, tau, TrigKind::Sinc),
            sin_times: op_trig(&omega, tau, TrigKind::SinTimes),
            spectral: Spectral::new(grid),
            lambda,
            tau,
            eps,
            u_hat: vec![ZERO; n],
            v_hat: vec![ZERO; n],
            f_hat: vec![ZERO; n],
        })
    }

    pub fn spectral_mut(&mut self) -> &mut Spectral {
        &mut self.spectral
    }

    pub fn step(&mut self, state: &mut FreeState) -> Result<()> {
        let n = self.spectral.len();
        state.u.check_len(n)?;
        let half = self.tau / (2.0 * self.eps * self.eps);
        let lambda = self.lambda;
        self.u_hat.copy_from_slice(state.u.values());
        self.v_hat.copy_from_slice(state.v.values());
        for (f, u) in self.f_hat.iter_mut().zip(state.u.values()) {
            *f = -cubic(lambda, *u);
        }
        self.spectral.forward(&mut self.u_hat);
        self.spectral.forward(&mut self.v_hat);
        self.spectral.forward(&mut self.f_hat);
        let u = state.u.values_mut();
        let v = state.v.values_mut();
        for l in 0..n {
            let c = self.cos.factors()[l].re;
            let s = self.sinc.factors()[l].re;
            let w = self.sin_times.factors()[l].re;
            u[l] = self.u_hat[l] * c + self.v_hat[l] * s + self.f_hat[l] * (half * s);
            v[l] = -self.u_hat[l] * w + self.v_hat[l] * c + self.f_hat[l] * (half * c);
        }
        self.spectral.inverse(u);
        self.spectral.inverse(v);
        for (vj, uj) in v.iter_mut().zip(u.iter()) {
            *vj -= cubic(lambda, *uj) * half;
        }
        state.time_index += 1;
        check_finite(state.u.values(), state.time_index)?;
        check_finite(state.v.values(), state.time_index)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::absorption::{sample_profile, LayerModel, ProfileSpec};
    use crate::spectral::make_grid;

    fn setup(n: usize, lambda: f64, tau: f64, eps: f64) -> (Grid1D, Pml1Params) {
        let spec = ProfileSpec::polynomial(8.0, 0.5, 4.0);
        let grid = make_grid(4.5, n).unwrap();
        let profile = sample_profile(&grid, &spec, LayerModel::FirstOrder).unwrap();
        (grid, Pml1Params { lambda, profile, tau, eps })
    }

    #[test]
    fn init_zeroes_auxiliaries() {
        let g = make_grid(4.5, 16).unwrap();
        let u0 = Field::sample_1d(&g, |x| Complex64::new(5.0 * (-x * x).exp(), 0.0));
        let v0 = Field::sample_1d(&g, |x| Complex64::new(0.5 / (x * x).cosh(), 0.0));
        let s = init_pml1(u0.clone(), v0, 0.0).unwrap();
        assert_eq!(s.eta1.max_abs(), 0.0);
        assert_eq!(s.eta2.max_abs(), 0.0);
        assert_eq!(s.time_index, 0);
        assert_eq!(s.u, u0);
        assert!(init_pml1(u0.clone(), Field::zeros(8), 0.0).is_err());
        assert!(init_pml1(u0, Field::zeros(16), -1.0).is_err());
    }

    #[test]
    fn zero_state_stays_zero() {
        let (grid, params) = setup(32, 1.0, 0.01, 1.0);
        let mut s = init_pml1(Field::zeros(32), Field::zeros(32), 0.0).unwrap();
        let mut solver = Pml1Solver::new(&grid, params, 0.0).unwrap();
        for _ in 0..5 {
            solver.step(&mut s).unwrap();
        }
        assert_eq!(s.u.max_abs(), 0.0);
        assert_eq!(s.v.max_abs(), 0.0);
    }

    #[test]
    fn constant_mode_is_exact_without_forcing() {
        let grid = make_grid(4.5, 16).unwrap();
        let spec = ProfileSpec::polynomial(8.0, 0.5, 4.0);
        let profile = AbsorptionProfile::vanishing(spec, 16);
        let tau = 0.1;
        let params = Pml1Params { lambda: 0.0, profile, tau, eps: 1.0 };
        let c = 2.5;
        let mut s = init_pml1(Field::from_real([c; 16]), Field::zeros(16), 0.0).unwrap();
        let mut solver = Pml1Solver::new(&grid, params, 0.0).unwrap();
        solver.step(&mut s).unwrap();
        for (u, v) in s.u.values().iter().zip(s.v.values()) {
            assert!((u.re - c * tau.cos()).abs() < 1e-14);
            assert!((v.re + c * tau.sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bermudez_profile() {
        let grid = make_grid(4.5, 16).unwrap();
        let poly = ProfileSpec::polynomial(8.0, 0.5, 4.0);
        let profile = sample_profile(&grid, &poly, LayerModel::FirstOrder).unwrap();
        let mut bad = profile.clone();
        // profile tagged as Bermudez
        let b2 = ProfileSpec::bermudez(2, 3.0, 0.5, 4.0);
        bad = AbsorptionProfile::vanishing(b2, bad.len());
        let params = Pml1Params { lambda: 1.0, profile: bad, tau: 0.01, eps: 1.0 };
        assert!(Pml1Solver::new(&grid, params, 0.0).is_err());
    }

    #[test]
    fn damping_factor_values() {
        let g = damping_factor(Complex64::new(1.0, 0.0), 0.0).unwrap();
        assert!((g.re + 2.0f64.sqrt()).abs() < 1e-15 && g.im == 0.0);
        let far = damping_factor(Complex64::new(1e8, 0.0), 0.5).unwrap();
        assert!((far.re + 1.0).abs() < 1e-7);
        assert!(damping_factor(Complex64::new(0.0, 1.0), 0.0).is_err());
        assert!(damping_factor(Complex64::new(-1.0, 1.0), 0.0).is_err());
    }

    #[test]
    fn reduces_to_free_solver_without_layer() {
        let grid = make_grid(4.5, 64).unwrap();
        let spec = ProfileSpec::polynomial(8.0, 0.5, 4.0);
        let profile = AbsorptionProfile::vanishing(spec, 64);
        let tau = 0.01;
        let params = Pml1Params { lambda: 1.0, profile, tau, eps: 1.0 };
        let u0 = Field::sample_1d(&grid, |x| Complex64::new(5.0 * (-x * x).exp(), 0.0));
        let v0 = Field::sample_1d(&grid, |x| Complex64::new(0.5 / (x * x).cosh(), 0.0));
        let mut s = init_pml1(u0.clone(), v0.clone(), 0.0).unwrap();
        let mut solver = Pml1Solver::new(&grid, params, 0.0).unwrap();
        let mut free = FreeEwiSolver::new(grid.clone(), 1.0, tau, 1.0).unwrap();
        let mut fs = FreeState { u: u0, v: v0, time_index: 0 };
        for _ in 0..20 {
            solver.step(&mut s).unwrap();
            free.step(&mut fs).unwrap();
        }
        for (a, b) in s.u.values().iter().zip(fs.u.values()) {
            assert!((a - b).norm() < 1e-12);
        }
        for (a, b) in s.v.values().iter().zip(fs.v.values()) {
            assert!((a - b).norm() < 1e-11);
        }
    }
}
