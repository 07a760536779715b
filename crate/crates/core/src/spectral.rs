//! Periodic collocation grids and Fourier-multiplier operators.
//!
//! Fields are stored as complex nodal values. In 2D the layout is row-major
//! with `x` as the slow index: node `(i, j)` lives at `i * ny + j`.
//! Multipliers are stored in the transform's natural mode order, and every
//! grid keeps its wavenumbers explicitly so callers never rely on it.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fft::FftPlan;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Uniform periodic grid on `[-L*, L*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    half_width: f64,
    mesh: f64,
    nodes: Vec<f64>,
    wavenumbers: Vec<f64>,
}

impl Grid1D {
    pub fn new(half_width_total: f64, num_nodes: usize) -> Result<Self> {
        if !(half_width_total > 0.0) || !half_width_total.is_finite() {
            return Err(Error::config("grid half-width must be positive and finite"));
        }
        if num_nodes < 4 || num_nodes % 2 != 0 {
            return Err(Error::config("number of grid nodes must be even and at least 4"));
        }
        let n = num_nodes as isize;
        let mesh = 2.0 * half_width_total / num_nodes as f64;
        let nodes = (0..num_nodes)
            .map(|j| -half_width_total + j as f64 * mesh)
            .collect();
        let wavenumbers = (0..n)
            .map(|l| {
                let idx = if l < n / 2 { l } else { l - n };
                PI * idx as f64 / half_width_total
            })
            .collect();
        Ok(Self {
            half_width: half_width_total,
            mesh,
            nodes,
            wavenumbers,
        })
    }

    /// Grid with a prescribed mesh size; `2 L* / h` must be an even integer
    /// (up to roundoff).
    pub fn with_mesh(half_width_total: f64, mesh: f64) -> Result<Self> {
        let n = 2.0 * half_width_total / mesh;
        let rounded = n.round();
        if (n - rounded).abs() > 1e-8 * n.max(1.0) {
            return Err(Error::config("mesh size does not divide the domain width"));
        }
        Self::new(half_width_total, rounded as usize)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Index of the Nyquist mode in the natural layout.
    pub fn nyquist_index(&self) -> usize {
        self.len() / 2
    }
}

/// Spec-named constructor for [`Grid1D::new`].
pub fn make_grid(half_width_total: f64, num_nodes: usize) -> Result<Grid1D> {
    Grid1D::new(half_width_total, num_nodes)
}

/// Tensor grid on `[-Lx*, Lx*) × [-Ly*, Ly*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    pub x: Grid1D,
    pub y: Grid1D,
}

impl Grid2D {
    pub fn new(x: Grid1D, y: Grid1D) -> Self {
        Self { x, y }
    }

    pub fn square(half_width_total: f64, num_nodes: usize) -> Result<Self> {
        let axis = Grid1D::new(half_width_total, num_nodes)?;
        Ok(Self {
            x: axis.clone(),
            y: axis,
        })
    }

    pub fn len(&self) -> usize {
        self.x.len() * self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.y.len() + j
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Either a 1D or a 2D periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    One(Grid1D),
    Two(Grid2D),
}

impl From<Grid1D> for Grid {
    fn from(g: Grid1D) -> Self {
        Grid::One(g)
    }
}

impl From<Grid2D> for Grid {
    fn from(g: Grid2D) -> Self {
        Grid::Two(g)
    }
}

impl Grid {
    pub fn len(&self) -> usize {
        match self {
            Grid::One(g) => g.len(),
            Grid::Two(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dimension(&self) -> usize {
        match self {
            Grid::One(_) => 1,
            Grid::Two(_) => 2,
        }
    }

    /// Quadrature weight of one node (`h` or `hx·hy`).
    pub fn cell_measure(&self) -> f64 {
        match self {
            Grid::One(g) => g.mesh(),
            Grid::Two(g) => g.x.mesh() * g.y.mesh(),
        }
    }

    fn axis(&self, axis: Axis) -> &Grid1D {
        match (self, axis) {
            (Grid::One(g), _) => g,
            (Grid::Two(g), Axis::X) => &g.x,
            (Grid::Two(g), Axis::Y) => &g.y,
        }
    }

    /// Builds a multiplier from a function of the mode's wavenumber vector.
    fn multiplier_from(&self, f: impl Fn(f64, f64) -> Complex64) -> FourierMultiplier {
        let factors = match self {
            Grid::One(g) => g.wavenumbers().iter().map(|&mu| f(mu, 0.0)).collect(),
            Grid::Two(g) => {
                let mut out = Vec::with_capacity(g.len());
                for &mx in g.x.wavenumbers() {
                    for &my in g.y.wavenumbers() {
                        out.push(f(mx, my));
                    }
                }
                out
            }
        };
        FourierMultiplier { factors }
    }

    /// `∂` along `axis` with the Nyquist mode removed.
    pub fn first_derivative(&self, axis: Axis) -> FourierMultiplier {
        match self {
            Grid::One(g) => op_first_derivative(g),
            Grid::Two(g) => {
                let along = self.axis(axis);
                let nyq_val = along.wavenumbers()[along.nyquist_index()];
                let mut factors = Vec::with_capacity(g.len());
                for &mx in g.x.wavenumbers() {
                    for &my in g.y.wavenumbers() {
                        let mu = if axis == Axis::X { mx } else { my };
                        factors.push(if mu == nyq_val {
                            ZERO
                        } else {
                            Complex64::new(0.0, mu)
                        });
                    }
                }
                FourierMultiplier { factors }
            }
        }
    }

    /// Squared modulus of each mode's wavenumber vector.
    pub fn squared_wavenumbers(&self) -> Vec<f64> {
        self.multiplier_from(|mx, my| Complex64::new(mx * mx + my * my, 0.0))
            .factors
            .iter()
            .map(|z| z.re)
            .collect()
    }

    /// The Laplacian `∂xx (+ ∂yy)`.
    pub fn laplacian(&self) -> FourierMultiplier {
        self.multiplier_from(|mx, my| Complex64::new(-(mx * mx + my * my), 0.0))
    }

    /// `√(1 - ε²Δ)/ε²`; equals `√(1 - Δ)` at `ε = 1`.
    pub fn bracket(&self, eps: f64) -> Result<FourierMultiplier> {
        check_eps(eps)?;
        let e2 = eps * eps;
        Ok(self.multiplier_from(|mx, my| {
            let s = if eps == 1.0 {
                (1.0 + mx * mx + my * my).sqrt()
            } else {
                (1.0 + e2 * (mx * mx + my * my)).sqrt() / e2
            };
            Complex64::new(s, 0.0)
        }))
    }

    /// Boolean mask of nodes strictly inside the window `(-L, L)^d`.
    pub fn window_mask(&self, half_width: f64) -> Vec<bool> {
        match self {
            Grid::One(g) => g.nodes().iter().map(|x| x.abs() < half_width).collect(),
            Grid::Two(g) => {
                let mut mask = Vec::with_capacity(g.len());
                for x in g.x.nodes() {
                    for y in g.y.nodes() {
                        mask.push(x.abs() < half_width && y.abs() < half_width);
                    }
                }
                mask
            }
        }
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(Error::config("epsilon must lie in (0, 1]"))
    }
}

/// Complex nodal values of one time level of a space-dependent function.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    values: Vec<Complex64>,
}

impl Field {
    pub fn zeros(len: usize) -> Self {
        Self {
            values: vec![ZERO; len],
        }
    }

    pub fn from_values(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn from_real(values: impl IntoIterator<Item = f64>) -> Self {
        Self {
            values: values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
        }
    }

    /// Samples `f` at the nodes of a 1D grid.
    pub fn sample_1d(grid: &Grid1D, f: impl Fn(f64) -> Complex64) -> Self {
        Self {
            values: grid.nodes().iter().map(|&x| f(x)).collect(),
        }
    }

    /// Samples `f(x, y)` at the nodes of a 2D grid.
    pub fn sample_2d(grid: &Grid2D, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for &x in grid.x.nodes() {
            for &y in grid.y.nodes() {
                values.push(f(x, y));
            }
        }
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn check_len(&self, expected: usize) -> Result<()> {
        if self.len() == expected {
            Ok(())
        } else {
            Err(Error::SizeMismatch {
                expected,
                found: self.len(),
            })
        }
    }
}

/// Per-mode complex factors in the grid's natural mode order.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierMultiplier {
    factors: Vec<Complex64>,
}

impl FourierMultiplier {
    pub fn new(factors: Vec<Complex64>) -> Self {
        Self { factors }
    }

    pub fn ones(len: usize) -> Self {
        Self {
            factors: vec![Complex64::new(1.0, 0.0); len],
        }
    }

    pub fn factors(&self) -> &[Complex64] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            factors: self.factors.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }
}

/// `i μ_l`, with the Nyquist mode zeroed.
pub fn op_first_derivative(g: &Grid1D) -> FourierMultiplier {
    let nyq = g.nyquist_index();
    FourierMultiplier {
        factors: g
            .wavenumbers()
            .iter()
            .enumerate()
            .map(|(l, &mu)| if l == nyq { ZERO } else { Complex64::new(0.0, mu) })
            .collect(),
    }
}

/// `-μ_l²`.
pub fn op_second_derivative(g: &Grid1D) -> FourierMultiplier {
    Grid::One(g.clone()).laplacian()
}

/// `√(1 + μ²)`.
pub fn op_bracket(g: &Grid1D) -> FourierMultiplier {
    FourierMultiplier {
        factors: g
            .wavenumbers()
            .iter()
            .map(|&mu| Complex64::new((1.0 + mu * mu).sqrt(), 0.0))
            .collect(),
    }
}

/// `√(1 + ε²μ²)/ε²`.
pub fn op_bracket_eps(g: &Grid1D, eps: f64) -> Result<FourierMultiplier> {
    check_eps(eps)?;
    if eps == 1.0 {
        return Ok(op_bracket(g));
    }
    let e2 = eps * eps;
    Ok(FourierMultiplier {
        factors: g
            .wavenumbers()
            .iter()
            .map(|&mu| Complex64::new((1.0 + e2 * mu * mu).sqrt() / e2, 0.0))
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrigKind {
    /// `cos(ωτ)`
    Cos,
    /// `sin(ωτ)/ω`
    Sinc,
    /// `ω sin(ωτ)`
    SinTimes,
}

/// Trigonometric function of a real, positive multiplier (a bracket operator).
pub fn op_trig(m: &FourierMultiplier, tau: f64, kind: TrigKind) -> FourierMultiplier {
    m.map(|z| {
        let w = z.re;
        let v = match kind {
            TrigKind::Cos => (w * tau).cos(),
            TrigKind::Sinc => (w * tau).sin() / w,
            TrigKind::SinTimes => w * (w * tau).sin(),
        };
        Complex64::new(v, 0.0)
    })
}

/// Transform plans and workspace for one grid.
///
/// Holds mutable scratch, so each solver owns its own instance.
#[derive(Debug, Clone)]
pub struct Spectral {
    grid: Grid,
    plan_x: FftPlan,
    plan_y: Option<FftPlan>,
    scratch: Vec<Complex64>,
    line: Vec<Complex64>,
    work: Vec<Complex64>,
}

impl Spectral {
    pub fn new(grid: impl Into<Grid>) -> Self {
        let grid = grid.into();
        let (plan_x, plan_y, longest) = match &grid {
            Grid::One(g) => (FftPlan::new(g.len()), None, g.len()),
            Grid::Two(g) => (
                FftPlan::new(g.x.len()),
                Some(FftPlan::new(g.y.len())),
                g.x.len().max(g.y.len()),
            ),
        };
        let len = grid.len();
        Self {
            grid,
            plan_x,
            plan_y,
            scratch: vec![ZERO; longest],
            line: vec![ZERO; longest],
            work: vec![ZERO; len],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn forward(&mut self, data: &mut [Complex64]) {
        self.transform(data, false);
    }

    pub fn inverse(&mut self, data: &mut [Complex64]) {
        self.transform(data, true);
    }

    fn transform(&mut self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.grid.len());
        let run = |plan: &FftPlan, buf: &mut [Complex64], scratch: &mut [Complex64]| {
            if inverse {
                plan.inverse(buf, scratch)
            } else {
                plan.forward(buf, scratch)
            }
        };
        match (&self.grid, &self.plan_y) {
            (Grid::One(_), _) => run(&self.plan_x, data, &mut self.scratch),
            (Grid::Two(g), Some(plan_y)) => {
                let nx = g.x.len();
                let ny = g.y.len();
                for row in data.chunks_exact_mut(ny) {
                    run(plan_y, row, &mut self.scratch);
                }
                let line = &mut self.line[..nx];
                for j in 0..ny {
                    for i in 0..nx {
                        line[i] = data[i * ny + j];
                    }
                    run(&self.plan_x, line, &mut self.scratch);
                    for i in 0..nx {
                        data[i * ny + j] = line[i];
                    }
                }
            }
            (Grid::Two(_), None) => unreachable!("2D grid always has a y plan"),
        }
    }

    /// `out = F⁻¹(m ⊙ F(f))`.
    pub fn apply_into(&mut self, f: &[Complex64], m: &FourierMultiplier, out: &mut [Complex64]) {
        assert_eq!(f.len(), self.grid.len(), "field does not match grid");
        assert_eq!(m.len(), self.grid.len(), "multiplier does not match grid");
        out.copy_from_slice(f);
        self.forward(out);
        for (z, w) in out.iter_mut().zip(m.factors()) {
            *z *= w;
        }
        self.inverse(out);
    }

    pub fn apply_in_place(&mut self, f: &mut [Complex64], m: &FourierMultiplier) {
        assert_eq!(f.len(), self.grid.len(), "field does not match grid");
        assert_eq!(m.len(), self.grid.len(), "multiplier does not match grid");
        self.forward(f);
        for (z, w) in f.iter_mut().zip(m.factors()) {
            *z *= w;
        }
        self.inverse(f);
    }

    /// Applies several multipliers to the same input with one forward transform.
    pub fn apply_many(&mut self, f: &[Complex64], ms: &[&FourierMultiplier], outs: &mut [&mut [Complex64]]) {
        assert_eq!(ms.len(), outs.len());
        let mut work = core::mem::take(&mut self.work);
        work.copy_from_slice(f);
        self.forward(&mut work);
        for (m, out) in ms.iter().zip(outs.iter_mut()) {
            for ((o, z), w) in out.iter_mut().zip(&work).zip(m.factors()) {
                *o = z * w;
            }
            self.inverse(out);
        }
        self.work = work;
    }
}

/// Returns `F⁻¹(m ⊙ F(f))` as a new field.
pub fn apply_multiplier(f: &Field, m: &FourierMultiplier, spectral: &mut Spectral) -> Result<Field> {
    f.check_len(spectral.len())?;
    if m.len() != spectral.len() {
        return Err(Error::SizeMismatch {
            expected: spectral.len(),
            found: m.len(),
        });
    }
    let mut out = Field::zeros(f.len());
    spectral.apply_into(f.values(), m, out.values_mut());
    Ok(out)
}
