//! Run configuration, initial-data presets and experiment loops.
//!
//! A run advances one layer solver and, optionally, a free-field reference
//! on an enlarged grid in lockstep, recording every `snapshot_stride` steps
//! a [`Row`] with relative errors on `(-L, L)^d`, truncated energies and
//! the GMRES iteration count.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::absorption::{sample_profile, LayerModel, ProfileSpec};
use crate::error::{Error, Result};
use crate::krylov::GmresSettings;
use crate::metrics::{fitted_order, local_orders, rel_l2_error, rel_linf_error, Embedding, EnergyFunctional, ReferenceRun};
use crate::pml1::{init_pml1, Pml1Params, Pml1Solver, Pml1State};
use crate::pml2::{build_rotating_initial_data, stability_probe, Pml2Params, Pml2Solver, Pml2State, SolveForm};
use crate::spectral::{Field, Grid, Grid1D, Grid2D};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "snake_case"))]
pub enum Formulation {
    Pml1,
    Pml2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "snake_case"))]
pub enum Scaling {
    Classical,
    Nonrel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "snake_case"))]
pub enum ProfileChoice {
    Polynomial,
    Bermudez,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "snake_case"))]
pub enum RPolicy {
    /// `R = r`.
    Fixed,
    /// `R = r/ε²`.
    InverseEps2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "snake_case"))]
pub enum Preset {
    /// `u0 = 5e^{-x²}`, `v0 = sech(x²)/2`, default `λ = 1`.
    GaussianSech,
    /// Same data, default `λ = 1/2`.
    GaussianSechEps,
    /// Four vortices `ψ0 = ψ1 = (z⁴ - c0⁴)e^{-|x|²/2}` in rotating coordinates, default `λ = 3`.
    Vortex4,
}

impl Preset {
    pub fn default_lambda(self) -> f64 {
        match self {
            Preset::GaussianSech => 1.0,
            Preset::GaussianSechEps => 0.5,
            Preset::Vortex4 => 3.0,
        }
    }
}

/// Everything needed to reproduce one run. All fields have defaults, see
/// [`SolverConfig::default`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(default, deny_unknown_fields))]
pub struct SolverConfig {
    pub formulation: Formulation,
    pub dimension: usize,
    pub scaling: Scaling,
    pub eps: f64,
    pub profile: ProfileChoice,
    /// Bermúdez regularization order `k`.
    pub order: i32,
    pub sigma0: f64,
    pub delta: f64,
    pub r_policy: RPolicy,
    pub r: f64,
    /// Argument of a complex `R = r·e^{iθ}`; nonzero only in stability demos.
    pub r_angle: f64,
    pub alpha: f64,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub lambda: Option<f64>,
    /// Physical half-width `L`.
    pub half_width: f64,
    /// Nodes per axis on `(-L-δ, L+δ)`.
    pub nodes: usize,
    pub tau: f64,
    pub t_final: f64,
    pub preset: Preset,
    pub c0: f64,
    pub omega: f64,
    pub reference: bool,
    pub enlargement: f64,
    /// Reference time step is `tau / reference_substeps`.
    pub reference_substeps: usize,
    /// Relative boundary amplitude above which the reference is flagged.
    pub reference_threshold: f64,
    pub gmres_tol: f64,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub gmres_max_iter: Option<usize>,
    pub preconditioned: bool,
    /// Unknown of the layer-II linear solve.
    pub solve_form: SolveForm,
    pub snapshot_stride: usize,
    pub demo_stability: bool,
    /// Convergence studies: time step of the self-reference.
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub ref_tau: Option<f64>,
    /// Convergence studies: node count of the self-reference.
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub ref_nodes: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            formulation: Formulation::Pml2,
            dimension: 1,
            scaling: Scaling::Classical,
            eps: 1.0,
            profile: ProfileChoice::Polynomial,
            order: 2,
            sigma0: 8.0,
            delta: 0.5,
            r_policy: RPolicy::Fixed,
            r: 1.0,
            r_angle: 0.0,
            alpha: 0.0,
            lambda: None,
            half_width: 4.0,
            nodes: 288,
            tau: 0.01,
            t_final: 4.0,
            preset: Preset::GaussianSech,
            c0: 1.32,
            omega: 2.0,
            reference: true,
            enlargement: 4.0,
            reference_substeps: 1,
            reference_threshold: 1e-8,
            gmres_tol: 1e-10,
            gmres_max_iter: None,
            preconditioned: true,
            solve_form: SolveForm::Increment,
            snapshot_stride: 1,
            demo_stability: false,
            ref_tau: None,
            ref_nodes: None,
        }
    }
}

fn rule(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl SolverConfig {
    pub fn lambda(&self) -> f64 {
        self.lambda.unwrap_or_else(|| self.preset.default_lambda())
    }

    /// `ε` actually used: 1 for classical runs.
    pub fn effective_eps(&self) -> f64 {
        match self.scaling {
            Scaling::Classical => 1.0,
            Scaling::Nonrel => self.eps,
        }
    }

    pub fn shift(&self) -> Complex64 {
        let e = self.effective_eps();
        let mag = match self.r_policy {
            RPolicy::Fixed => self.r,
            RPolicy::InverseEps2 => self.r / (e * e),
        };
        Complex64::from_polar(mag, self.r_angle)
    }

    pub fn profile_spec(&self) -> ProfileSpec {
        let spec = match self.profile {
            ProfileChoice::Polynomial => ProfileSpec::polynomial(self.sigma0, self.delta, self.half_width),
            ProfileChoice::Bermudez => ProfileSpec::bermudez(self.order, self.sigma0, self.delta, self.half_width),
        };
        spec.with_shift(self.shift())
    }

    pub fn total_half_width(&self) -> f64 {
        self.half_width + self.delta
    }

    pub fn axis(&self) -> Result<Grid1D> {
        Grid1D::new(self.total_half_width(), self.nodes)
    }

    pub fn grid(&self) -> Result<Grid> {
        let axis = self.axis()?;
        Ok(match self.dimension {
            1 => Grid::One(axis),
            _ => Grid::Two(Grid2D::new(axis.clone(), axis)),
        })
    }

    pub fn steps(&self) -> Result<usize> {
        let n = (self.t_final / self.tau).round();
        if (n * self.tau - self.t_final).abs() > 1e-9 * self.t_final.max(self.tau) {
            return Err(rule("t_final must be an integer multiple of tau"));
        }
        Ok(n as usize)
    }

    /// Checks every rule a run depends on and names the first violated one.
    pub fn validate(&self) -> Result<()> {
        if self.dimension != 1 && self.dimension != 2 {
            return Err(rule("dimension must be 1 or 2"));
        }
        if self.formulation == Formulation::Pml1 {
            if self.profile != ProfileChoice::Polynomial {
                return Err(rule("pml1 requires the polynomial profile"));
            }
            if self.dimension != 1 {
                return Err(rule("pml1 is one-dimensional"));
            }
            if !(self.alpha >= 0.0) {
                return Err(rule("alpha must be nonnegative"));
            }
        }
        if self.formulation == Formulation::Pml2 && !self.demo_stability && (self.r_angle != 0.0 || !(self.r > 0.0)) {
            return Err(rule("pml2 requires a real R > 0 (complex R needs demo_stability)"));
        }
        if self.scaling == Scaling::Nonrel && !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(rule("nonrel scaling requires eps in (0, 1)"));
        }
        if (self.preset == Preset::Vortex4) != (self.dimension == 2) {
            return Err(rule("the vortex4 preset is the only 2D preset"));
        }
        if self.dimension == 2 && self.scaling != Scaling::Classical {
            return Err(rule("2D runs use the classical scaling"));
        }
        if !(self.half_width > 0.0 && self.delta > 0.0) {
            return Err(rule("half_width and delta must be positive"));
        }
        if !(self.tau > 0.0) {
            return Err(rule("tau must be positive"));
        }
        if !(self.t_final >= 0.0) {
            return Err(rule("t_final must be nonnegative"));
        }
        if self.snapshot_stride == 0 {
            return Err(rule("snapshot_stride must be positive"));
        }
        if self.reference_substeps == 0 {
            return Err(rule("reference_substeps must be positive"));
        }
        if self.reference && !(self.enlargement >= 2.0) {
            return Err(rule("enlargement must be at least 2"));
        }
        if !(self.gmres_tol > 0.0) {
            return Err(rule("gmres_tol must be positive"));
        }
        if !(self.lambda() >= 0.0) {
            return Err(rule("lambda must be nonnegative"));
        }
        self.profile_spec().validate()?;
        self.axis()?;
        self.steps()?;
        Ok(())
    }

    fn pml2_params(&self) -> Pml2Params {
        let mut p = Pml2Params::new(self.lambda(), self.tau, self.effective_eps());
        p.gmres = GmresSettings {
            tol: self.gmres_tol,
            max_iter: self.gmres_max_iter,
        };
        p.preconditioned = self.preconditioned;
        p.form = self.solve_form;
        p.allow_complex_shift = self.demo_stability;
        p
    }
}

/// `(u0, v0)` of the preset on `grid`.
pub fn initial_data(cfg: &SolverConfig, grid: &Grid) -> Result<(Field, Field)> {
    match (cfg.preset, grid) {
        (Preset::GaussianSech | Preset::GaussianSechEps, Grid::One(g)) => Ok((
            Field::sample_1d(g, |x| Complex64::new(5.0 * (-x * x).exp(), 0.0)),
            Field::sample_1d(g, |x| Complex64::new(0.5 / (x * x).cosh(), 0.0)),
        )),
        (Preset::Vortex4, Grid::Two(g)) => {
            let c4 = cfg.c0.powi(4);
            let psi = Field::sample_2d(g, |x, y| {
                let z = Complex64::new(x, y);
                (z.powu(4) - c4) * (-(x * x + y * y) / 2.0).exp()
            });
            build_rotating_initial_data(g, &psi, &psi, cfg.omega)
        }
        _ => Err(rule("preset does not match the grid dimension")),
    }
}

/// One sampled time level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub t: f64,
    pub e2_pml: Option<f64>,
    pub einf_pml: Option<f64>,
    pub hi_pml: f64,
    pub hi_ref: Option<f64>,
    /// Iterations of the solve that produced this level (0 for explicit steps).
    pub gmres_iters: usize,
    pub umax: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub rows: Vec<Row>,
    /// Solution at `t_final` on the layer grid.
    pub final_u: Field,
    pub grid: Grid,
    /// GMRES iterations of every implicit step, in order.
    pub gmres_iterations: Vec<usize>,
    pub reference_boundary_peak: Option<f64>,
    pub reference_contaminated: bool,
}

impl RunOutput {
    pub fn last(&self) -> Option<&Row> {
        self.rows.last()
    }
}

impl fmt::Display for Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t={} e2={:?} hi={}", self.t, self.e2_pml, self.hi_pml)
    }
}

/// Layer solver for either formulation, exposing the current level.
enum Layer {
    One {
        solver: Pml1Solver,
        state: Pml1State,
    },
    Two {
        solver: Pml2Solver,
        /// At level 0, `u_prev` holds `v0` so the start step can read it.
        state: Pml2State,
        /// `u^{n+1}` once computed, so the energy at level `n` can use a
        /// centered velocity.
        ahead: Option<(Field, Option<usize>)>,
        v0: Field,
    },
}

struct Reference {
    run: ReferenceRun,
    substeps: usize,
    energy: EnergyFunctional,
}

/// Advances a configured run and collects rows.
pub fn run(cfg: &SolverConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let lambda = cfg.lambda();
    let eps = cfg.effective_eps();
    let steps = cfg.steps()?;
    let (u0, v0) = initial_data(cfg, &grid)?;
    let spec = cfg.profile_spec();

    let mut layer = match cfg.formulation {
        Formulation::Pml1 => {
            let axis = cfg.axis()?;
            let profile = sample_profile(&axis, &spec, LayerModel::FirstOrder)?;
            let params = Pml1Params {
                lambda,
                profile,
                tau: cfg.tau,
                eps,
            };
            Layer::One {
                solver: Pml1Solver::new(&axis, params, cfg.alpha)?,
                state: init_pml1(u0.clone(), v0.clone(), cfg.alpha)?,
            }
        }
        Formulation::Pml2 => {
            let solver = Pml2Solver::new(grid.clone(), &spec, cfg.pml2_params())?;
            let state = Pml2State {
                u_prev: v0.clone(),
                u_curr: u0.clone(),
                time_index: 0,
            };
            Layer::Two {
                solver,
                state,
                ahead: None,
                v0: v0.clone(),
            }
        }
    };

    let mut reference = if cfg.reference {
        let emb = Embedding::new(&grid, cfg.half_width, cfg.enlargement)?;
        let (ru, rv) = initial_data(cfg, emb.outer())?;
        let rtau = cfg.tau / cfg.reference_substeps as f64;
        let run = ReferenceRun::new(emb, ru, rv, lambda, rtau, eps, cfg.reference_threshold)?;
        Some(Reference {
            run,
            substeps: cfg.reference_substeps,
            energy: EnergyFunctional::new(&grid, cfg.half_width),
        })
    } else {
        None
    };

    let mut energy = EnergyFunctional::new(&grid, cfg.half_width);
    let mut rows = Vec::new();
    let mut gmres_iterations = Vec::new();
    let mut last_iters = 0;

    for n in 0..=steps {
        if n > 0 {
            last_iters = advance(&mut layer, &mut gmres_iterations)?;
            if let Some(r) = reference.as_mut() {
                for _ in 0..r.substeps {
                    r.run.step()?;
                }
            }
        }
        if n % cfg.snapshot_stride == 0 || n == steps {
            let (u, u_dot) = current_level(&mut layer, cfg.tau)?;
            let hi_pml = energy.eval(&u, &u_dot, lambda)?;
            let (e2, einf, hi_ref) = match reference.as_mut() {
                Some(r) => {
                    let ur = r.run.restricted_u();
                    let vr = r.run.restricted_v();
                    let e2 = rel_l2_error(&u, &ur, &grid, cfg.half_width).ok();
                    let einf = rel_linf_error(&u, &ur, &grid, cfg.half_width).ok();
                    (e2, einf, Some(r.energy.eval(&ur, &vr, lambda)?))
                }
                None => (None, None, None),
            };
            rows.push(Row {
                t: n as f64 * cfg.tau,
                e2_pml: e2,
                einf_pml: einf,
                hi_pml,
                hi_ref,
                gmres_iters: if n == 0 { 0 } else { last_iters },
                umax: u.max_abs(),
            });
        }
    }

    let final_u = match &layer {
        Layer::One { state, .. } => state.u.clone(),
        Layer::Two { state, .. } => state.u_curr.clone(),
    };
    Ok(RunOutput {
        rows,
        final_u,
        grid,
        gmres_iterations,
        reference_boundary_peak: reference.as_ref().map(|r| r.run.boundary_peak()),
        reference_contaminated: reference.as_ref().map(|r| r.run.contaminated()).unwrap_or(false),
    })
}

/// Moves the layer solution one level forward; returns GMRES iterations.
fn advance(layer: &mut Layer, iterations: &mut Vec<usize>) -> Result<usize> {
    match layer {
        Layer::One { solver, state } => {
            solver.step(state)?;
            Ok(0)
        }
        Layer::Two { solver, state, ahead, .. } => {
            ensure_ahead(solver, state, ahead)?;
            let (u_next, iters) = ahead.take().expect("filled above");
            state.u_prev = core::mem::replace(&mut state.u_curr, u_next);
            state.time_index += 1;
            if let Some(k) = iters {
                iterations.push(k);
            }
            Ok(iters.unwrap_or(0))
        }
    }
}

/// The current level and its time derivative. For the three-level scheme
/// the next level is computed (and kept for the following step) to form a
/// centered difference; at `t = 0` the initial velocity is used.
fn current_level(layer: &mut Layer, tau: f64) -> Result<(Field, Field)> {
    match layer {
        Layer::One { state, .. } => Ok((state.u.clone(), state.v.clone())),
        Layer::Two { solver, state, ahead, v0 } => {
            if state.time_index == 0 {
                return Ok((state.u_curr.clone(), v0.clone()));
            }
            let next = ensure_ahead(solver, state, ahead)?;
            Ok((state.u_curr.clone(), state.centered_velocity(next, tau)))
        }
    }
}

/// `u^{n+1}` with the GMRES count of its solve (`None` for the start step).
fn ensure_ahead<'a>(
    solver: &mut Pml2Solver,
    state: &Pml2State,
    ahead: &'a mut Option<(Field, Option<usize>)>,
) -> Result<&'a Field> {
    if ahead.is_none() {
        *ahead = Some(if state.time_index == 0 {
            (solver.first_step(&state.u_curr, &state.u_prev)?.u_curr, None)
        } else {
            let mut probe = state.clone();
            let report = solver.fd_step(&mut probe)?;
            (probe.u_curr, Some(report.iterations))
        });
    }
    Ok(&ahead.as_ref().expect("just filled").0)
}

/// Final-time solution only (no reference, no rows beyond the last).
pub fn final_solution(cfg: &SolverConfig) -> Result<Field> {
    let mut c = cfg.clone();
    c.reference = false;
    c.snapshot_stride = usize::MAX;
    Ok(run(&c)?.final_u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergenceAxis {
    Tau,
    Mesh,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceLevel {
    /// `τ` or `h` of the level.
    pub step: f64,
    pub nodes: usize,
    pub tau: f64,
    pub e2: f64,
    pub einf: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub axis: ConvergenceAxis,
    pub levels: Vec<ConvergenceLevel>,
    /// Least-squares order of `einf`; `None` for a single level.
    pub fitted_order: Option<f64>,
    pub local_orders: Vec<f64>,
}

/// Every `stride`-th node of a fine grid, i.e. the nodes of the coarse grid.
fn subsample(fine: &Field, fine_grid: &Grid, stride: usize) -> Field {
    match fine_grid {
        Grid::One(_) => Field::from_values(fine.values().iter().step_by(stride).copied().collect()),
        Grid::Two(g) => {
            let ny = g.y.len();
            let mut out = Vec::new();
            for i in (0..g.x.len()).step_by(stride) {
                for j in (0..ny).step_by(stride) {
                    out.push(fine.values()[g.index(i, j)]);
                }
            }
            Field::from_values(out)
        }
    }
}

/// Self-convergence at `t_final`: levels halve `τ` (or `h`) starting from
/// the configured value; the reference is the same solver at `ref_tau`
/// (default `τ/2^(levels+2)`) or `ref_nodes` (default `N·2^(levels+1)`).
pub fn run_convergence(cfg: &SolverConfig, axis: ConvergenceAxis, levels: usize) -> Result<ConvergenceTable> {
    cfg.validate()?;
    if levels == 0 {
        return Err(rule("at least one level is required"));
    }
    let mut base = cfg.clone();
    base.reference = false;
    base.snapshot_stride = usize::MAX;
    let scale = 1usize << (levels - 1);
    let mut reference = base.clone();
    match axis {
        ConvergenceAxis::Tau => {
            reference.tau = cfg.ref_tau.unwrap_or(cfg.tau / (scale * 8) as f64);
        }
        ConvergenceAxis::Mesh => {
            let n = cfg.ref_nodes.unwrap_or(cfg.nodes * scale * 4);
            if n % (cfg.nodes * scale) != 0 {
                return Err(rule("ref_nodes must be a multiple of every level's node count"));
            }
            reference.nodes = n;
        }
    }
    let ref_u = run(&reference)?.final_u;
    let ref_grid = reference.grid()?;

    let mut out = Vec::with_capacity(levels);
    for k in 0..levels {
        let mut c = base.clone();
        match axis {
            ConvergenceAxis::Tau => c.tau = cfg.tau / (1usize << k) as f64,
            ConvergenceAxis::Mesh => c.nodes = cfg.nodes << k,
        }
        let grid = c.grid()?;
        let u = run(&c)?.final_u;
        let r = subsample(&ref_u, &ref_grid, reference.nodes / c.nodes);
        out.push(ConvergenceLevel {
            step: match axis {
                ConvergenceAxis::Tau => c.tau,
                ConvergenceAxis::Mesh => 2.0 * c.total_half_width() / c.nodes as f64,
            },
            nodes: c.nodes,
            tau: c.tau,
            e2: rel_l2_error(&u, &r, &grid, c.half_width)?,
            einf: rel_linf_error(&u, &r, &grid, c.half_width)?,
        });
    }
    let steps: Vec<f64> = out.iter().map(|l| l.step).collect();
    let errs: Vec<f64> = out.iter().map(|l| l.einf).collect();
    Ok(ConvergenceTable {
        axis,
        fitted_order: fitted_order(&steps, &errs),
        local_orders: if levels > 1 { local_orders(&steps, &errs) } else { Vec::new() },
        levels: out,
    })
}

/// Parameters a sweep may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Sigma0,
    Delta,
    R,
    Eps,
    Order,
    Alpha,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Sigma0 => "sigma0",
            SweepParam::Delta => "delta",
            SweepParam::R => "r",
            SweepParam::Eps => "eps",
            SweepParam::Order => "order",
            SweepParam::Alpha => "alpha",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "sigma0" => SweepParam::Sigma0,
            "delta" => SweepParam::Delta,
            "r" => SweepParam::R,
            "eps" => SweepParam::Eps,
            "order" | "k" => SweepParam::Order,
            "alpha" => SweepParam::Alpha,
            other => return Err(rule(format!("unknown sweep parameter `{other}`"))),
        })
    }

    pub fn apply(self, cfg: &mut SolverConfig, value: f64) {
        match self {
            SweepParam::Sigma0 => cfg.sigma0 = value,
            SweepParam::Delta => cfg.delta = value,
            SweepParam::R => cfg.r = value,
            SweepParam::Eps => {
                if value == 1.0 {
                    cfg.scaling = Scaling::Classical;
                } else {
                    cfg.scaling = Scaling::Nonrel;
                }
                cfg.eps = value;
            }
            SweepParam::Order => cfg.order = value as i32,
            SweepParam::Alpha => cfg.alpha = value,
        }
    }
}

/// Cartesian product of the axes applied to `cfg`, first axis slowest.
/// Each point carries its coordinates.
pub fn sweep_points(cfg: &SolverConfig, axes: &[(SweepParam, Vec<f64>)]) -> Result<Vec<(Vec<f64>, SolverConfig)>> {
    if axes.is_empty() || axes.iter().any(|(_, v)| v.is_empty()) {
        return Err(rule("sweep grid is empty"));
    }
    let mut points = vec![(Vec::new(), cfg.clone())];
    for (param, values) in axes {
        let mut next = Vec::with_capacity(points.len() * values.len());
        for (coords, c) in &points {
            for &v in values {
                let mut c2 = c.clone();
                param.apply(&mut c2, v);
                let mut k = coords.clone();
                k.push(v);
                next.push((k, c2));
            }
        }
        points = next;
    }
    for (_, c) in &points {
        c.validate()?;
    }
    Ok(points)
}

/// The last row of a run with reference (errors at `t_final`).
pub fn final_errors(cfg: &SolverConfig) -> Result<Row> {
    let mut c = cfg.clone();
    c.reference = true;
    c.snapshot_stride = usize::MAX;
    let out = run(&c)?;
    out.rows.last().copied().ok_or_else(|| rule("run produced no rows"))
}

/// `max|u|` history of the configured layer-II run; see [`stability_probe`].
pub fn run_stability_probe(cfg: &SolverConfig, cap: f64) -> Result<Vec<(f64, f64)>> {
    cfg.validate()?;
    if cfg.formulation != Formulation::Pml2 {
        return Err(rule("the stability probe drives the pml2 formulation"));
    }
    let grid = cfg.grid()?;
    let (u0, v0) = initial_data(cfg, &grid)?;
    let mut solver = Pml2Solver::new(grid, &cfg.profile_spec(), cfg.pml2_params())?;
    stability_probe(&mut solver, &u0, &v0, cfg.t_final, cap)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SolverConfig {
        SolverConfig {
            nodes: 64,
            tau: 0.02,
            t_final: 0.2,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn default_config_is_valid() {
        SolverConfig::default().validate().unwrap();
    }

    #[test]
    fn validation_rules() {
        let bad = |f: fn(&mut SolverConfig)| {
            let mut c = small();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| {
            c.formulation = Formulation::Pml1;
            c.profile = ProfileChoice::Bermudez;
        }));
        assert!(bad(|c| c.r_angle = 0.3));
        assert!(bad(|c| c.r = 0.0));
        assert!(bad(|c| {
            c.scaling = Scaling::Nonrel;
            c.eps = 1.0;
        }));
        assert!(bad(|c| c.dimension = 3));
        assert!(bad(|c| c.preset = Preset::Vortex4));
        assert!(bad(|c| c.t_final = 0.205));
        assert!(bad(|c| c.nodes = 63));
        let mut demo = small();
        demo.r_angle = 0.3;
        demo.demo_stability = true;
        demo.validate().unwrap();
    }

    #[test]
    fn zero_horizon_gives_initial_row() {
        for formulation in [Formulation::Pml1, Formulation::Pml2] {
            let cfg = SolverConfig {
                formulation,
                t_final: 0.0,
                ..small()
            };
            let out = run(&cfg).unwrap();
            assert_eq!(out.rows.len(), 1);
            assert_eq!(out.rows[0].e2_pml, Some(0.0));
            assert_eq!(out.rows[0].hi_pml, out.rows[0].hi_ref.unwrap());
        }
    }

    #[test]
    fn short_runs_track_the_reference() {
        for formulation in [Formulation::Pml1, Formulation::Pml2] {
            let cfg = SolverConfig { formulation, ..small() };
            let out = run(&cfg).unwrap();
            assert_eq!(out.rows.len(), 11);
            let last = out.last().unwrap();
            assert!(last.e2_pml.unwrap() < 1e-2, "{formulation:?}: {last}");
            assert!(!out.reference_contaminated);
        }
    }

    #[test]
    fn pml2_iterations_are_recorded() {
        let out = run(&small()).unwrap();
        assert_eq!(out.gmres_iterations.len(), 9);
        assert!(out.rows[1].gmres_iters == 0);
        assert!(out.rows[2..].iter().all(|r| r.gmres_iters > 0));
    }

    #[test]
    fn sweep_product() {
        let pts = sweep_points(
            &small(),
            &[(SweepParam::Sigma0, vec![2.0, 4.0]), (SweepParam::Delta, vec![0.375, 0.5, 0.75])],
        )
        .unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[1].0, vec![2.0, 0.5]);
        assert_eq!(pts[1].1.delta, 0.5);
        assert!(sweep_points(&small(), &[]).is_err());
        assert!(sweep_points(&small(), &[(SweepParam::R, vec![])]).is_err());
    }
}
