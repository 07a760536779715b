//! Reference solutions on enlarged domains, error norms, the truncated
//! energy `H_I`, and small dispersion utilities.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::pml1::{FreeEwiSolver, FreeState};
use crate::spectral::{Axis, Field, FourierMultiplier, Grid, Grid1D, Grid2D, Spectral};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn is_smooth(mut n: usize) -> bool {
    for p in [2, 3, 5] {
        while n % p == 0 {
            n /= p;
        }
    }
    n == 1
}

/// Extends `inner` by `m` nodes per side, keeping the mesh, so that inner
/// nodes coincide with enlarged nodes `m..m+N`. `m` is the smallest count
/// reaching half-width `min_half_width` with a 5-smooth total size.
pub fn extend_grid(inner: &Grid1D, min_half_width: f64) -> Result<(Grid1D, usize)> {
    let h = inner.mesh();
    let n = inner.len();
    let need = ((min_half_width - inner.half_width()) / h).ceil().max(0.0) as usize;
    let mut m = need;
    while !is_smooth(n + 2 * m) {
        m += 1;
    }
    let grid = Grid1D::new(inner.half_width() + m as f64 * h, n + 2 * m)?;
    Ok((grid, m))
}

/// Maps fields between a grid and its extension.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    inner: Grid,
    outer: Grid,
    offset: usize,
}

impl Embedding {
    /// Extension to half-width at least `factor·physical_half_width` on every axis.
    pub fn new(inner: &Grid, physical_half_width: f64, factor: f64) -> Result<Self> {
        if !(factor >= 2.0) {
            return Err(Error::config("enlargement factor must be at least 2"));
        }
        let target = factor * physical_half_width;
        let (outer, offset) = match inner {
            Grid::One(g) => {
                let (e, m) = extend_grid(g, target)?;
                (Grid::One(e), m)
            }
            Grid::Two(g) => {
                if g.x.len() != g.y.len() || g.x.half_width() != g.y.half_width() {
                    return Err(Error::config("enlarged 2D references need a square grid"));
                }
                let (e, m) = extend_grid(&g.x, target)?;
                (Grid::Two(Grid2D::new(e.clone(), e)), m)
            }
        };
        Ok(Self {
            inner: inner.clone(),
            outer,
            offset,
        })
    }

    pub fn inner(&self) -> &Grid {
        &self.inner
    }

    pub fn outer(&self) -> &Grid {
        &self.outer
    }

    /// Nodes added on each side of each axis.
    pub fn offset(&self) -> usize {
        self.offset
    }

    fn outer_index(&self, k: usize) -> usize {
        match (&self.inner, &self.outer) {
            (Grid::One(_), _) => k + self.offset,
            (Grid::Two(g), Grid::Two(o)) => {
                let ny = g.y.len();
                o.index(k / ny + self.offset, k % ny + self.offset)
            }
            _ => unreachable!("inner and outer grids share a dimension"),
        }
    }

    pub fn restrict(&self, outer: &Field) -> Result<Field> {
        outer.check_len(self.outer.len())?;
        let v = outer.values();
        Ok(Field::from_values(
            (0..self.inner.len()).map(|k| v[self.outer_index(k)]).collect(),
        ))
    }

    /// Zero-padded copy of an inner field.
    pub fn extend(&self, inner: &Field) -> Result<Field> {
        inner.check_len(self.inner.len())?;
        let mut out = vec![ZERO; self.outer.len()];
        for (k, z) in inner.values().iter().enumerate() {
            out[self.outer_index(k)] = *z;
        }
        Ok(Field::from_values(out))
    }
}

/// Free-field EWI run on an enlarged grid, watched for amplitude reaching
/// the outer boundary.
#[derive(Debug, Clone)]
pub struct ReferenceRun {
    embedding: Embedding,
    solver: FreeEwiSolver,
    state: FreeState,
    band: Vec<usize>,
    threshold: f64,
    scale: f64,
    boundary_peak: f64,
}

/// Fraction of the enlarged half-width, measured from the edge, that is
/// monitored for contamination.
pub const BOUNDARY_BAND: f64 = 0.05;

impl ReferenceRun {
    /// `u0`, `v0` are sampled on the enlarged grid; `threshold` bounds the
    /// boundary amplitude relative to the initial maximum.
    pub fn new(
        embedding: Embedding,
        u0: Field,
        v0: Field,
        lambda: f64,
        tau: f64,
        eps: f64,
        threshold: f64,
    ) -> Result<Self> {
        let outer = embedding.outer().clone();
        u0.check_len(outer.len())?;
        v0.check_len(outer.len())?;
        let band = boundary_band(&outer);
        let scale = u0.max_abs().max(v0.max_abs());
        let solver = FreeEwiSolver::new(outer, lambda, tau, eps)?;
        let mut run = Self {
            embedding,
            solver,
            state: FreeState { u: u0, v: v0, time_index: 0 },
            band,
            threshold,
            scale,
            boundary_peak: 0.0,
        };
        run.watch();
        Ok(run)
    }

    fn watch(&mut self) {
        let u = self.state.u.values();
        let peak = self.band.iter().map(|&k| u[k].norm()).fold(0.0, f64::max);
        let rel = if self.scale > 0.0 { peak / self.scale } else { peak };
        self.boundary_peak = self.boundary_peak.max(rel);
    }

    pub fn step(&mut self) -> Result<()> {
        self.solver.step(&mut self.state)?;
        self.watch();
        Ok(())
    }

    pub fn time_index(&self) -> usize {
        self.state.time_index
    }

    pub fn state(&self) -> &FreeState {
        &self.state
    }

    pub fn embedding(&self) -> &Embedding {
        &self.embedding
    }

    pub fn restricted_u(&self) -> Field {
        self.embedding.restrict(&self.state.u).expect("state lives on the outer grid")
    }

    pub fn restricted_v(&self) -> Field {
        self.embedding.restrict(&self.state.v).expect("state lives on the outer grid")
    }

    /// Largest relative amplitude seen so far near the enlarged boundary.
    pub fn boundary_peak(&self) -> f64 {
        self.boundary_peak
    }

    /// Set once the boundary amplitude has exceeded the threshold.
    pub fn contaminated(&self) -> bool {
        self.boundary_peak > self.threshold
    }
}

fn boundary_band(grid: &Grid) -> Vec<usize> {
    let edge = |g: &Grid1D, x: f64| x.abs() >= (1.0 - BOUNDARY_BAND) * g.half_width();
    match grid {
        Grid::One(g) => (0..g.len()).filter(|&j| edge(g, g.nodes()[j])).collect(),
        Grid::Two(g) => {
            let mut out = Vec::new();
            for (i, &x) in g.x.nodes().iter().enumerate() {
                for (j, &y) in g.y.nodes().iter().enumerate() {
                    if edge(&g.x, x) || edge(&g.y, y) {
                        out.push(g.index(i, j));
                    }
                }
            }
            out
        }
    }
}

fn masked_sums(u: &[Complex64], r: &[Complex64], mask: &[bool]) -> (f64, f64, f64, f64) {
    let mut d2 = 0.0;
    let mut r2 = 0.0;
    let mut dmax: f64 = 0.0;
    let mut rmax: f64 = 0.0;
    for ((a, b), &m) in u.iter().zip(r).zip(mask) {
        if m {
            let d = (a - b).norm();
            let n = b.norm();
            d2 += d * d;
            r2 += n * n;
            dmax = dmax.max(d);
            rmax = rmax.max(n);
        }
    }
    (d2, r2, dmax, rmax)
}

fn check_pair(u: &Field, r: &Field, grid: &Grid) -> Result<()> {
    u.check_len(grid.len())?;
    r.check_len(grid.len())
}

/// `‖u - u_ref‖ / ‖u_ref‖` in `L²` over nodes strictly inside `(-L, L)^d`.
pub fn rel_l2_error(u: &Field, u_ref: &Field, grid: &Grid, half_width: f64) -> Result<f64> {
    check_pair(u, u_ref, grid)?;
    let (d2, r2, _, _) = masked_sums(u.values(), u_ref.values(), &grid.window_mask(half_width));
    if r2 == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok((d2 / r2).sqrt())
}

/// Relative maximum error over the same window.
pub fn rel_linf_error(u: &Field, u_ref: &Field, grid: &Grid, half_width: f64) -> Result<f64> {
    check_pair(u, u_ref, grid)?;
    let (_, _, dmax, rmax) = masked_sums(u.values(), u_ref.values(), &grid.window_mask(half_width));
    if rmax == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(dmax / rmax)
}

/// Rectangle-rule evaluation of
/// `H_I = ∫_I |∂t u|² + |∇u|² + |u|² + λ/2 |u|⁴` over `I = (-L, L)^d`.
#[derive(Debug, Clone)]
pub struct EnergyFunctional {
    spectral: Spectral,
    derivatives: Vec<FourierMultiplier>,
    mask: Vec<bool>,
    cell: f64,
    work: Vec<Vec<Complex64>>,
}

impl EnergyFunctional {
    pub fn new(grid: &Grid, half_width: f64) -> Self {
        let derivatives = match grid {
            Grid::One(_) => vec![grid.first_derivative(Axis::X)],
            Grid::Two(_) => vec![grid.first_derivative(Axis::X), grid.first_derivative(Axis::Y)],
        };
        let work = vec![vec![ZERO; grid.len()]; derivatives.len()];
        Self {
            spectral: Spectral::new(grid.clone()),
            mask: grid.window_mask(half_width),
            cell: grid.cell_measure(),
            derivatives,
            work,
        }
    }

    pub fn eval(&mut self, u: &Field, u_dot: &Field, lambda: f64) -> Result<f64> {
        let n = self.spectral.len();
        u.check_len(n)?;
        u_dot.check_len(n)?;
        let ms: Vec<&FourierMultiplier> = self.derivatives.iter().collect();
        let mut outs: Vec<&mut [Complex64]> = self.work.iter_mut().map(|w| &mut w[..]).collect();
        self.spectral.apply_many(u.values(), &ms, &mut outs);
        let mut total = 0.0;
        for k in 0..n {
            if !self.mask[k] {
                continue;
            }
            let a2 = u.values()[k].norm_sqr();
            let grad: f64 = self.work.iter().map(|w| w[k].norm_sqr()).sum();
            total += u_dot.values()[k].norm_sqr() + grad + a2 + 0.5 * lambda * a2 * a2;
        }
        Ok(total * self.cell)
    }
}

/// One-off evaluation of `H_I`; see [`EnergyFunctional`].
pub fn energy_hi(u: &Field, u_dot: &Field, lambda: f64, grid: &Grid, half_width: f64) -> Result<f64> {
    EnergyFunctional::new(grid, half_width).eval(u, u_dot, lambda)
}

/// Principal root `k = -√(s² + 1)` of the Laplace-domain dispersion relation.
pub fn dispersion_root(s: Complex64) -> Result<Complex64> {
    if s.re < 0.0 {
        return Err(Error::config("dispersion root needs Re(s) >= 0"));
    }
    Ok(-(s * s + 1.0).sqrt())
}

/// Phase speed `√(k⁻² + ε²)/ε²` of a mode in the scaled equation.
pub fn phase_velocity_eps(k: f64, eps: f64) -> Result<f64> {
    if k == 0.0 || !k.is_finite() {
        return Err(Error::config("wavenumber must be nonzero"));
    }
    if !(eps > 0.0) {
        return Err(Error::config("epsilon must be positive"));
    }
    let e2 = eps * eps;
    Ok((1.0 / (k * k) + e2).sqrt() / e2)
}

/// Maps rotating coordinates to the lab frame: `x = A(t)x̃` with
/// `A = [[cos Ωt, sin Ωt], [-sin Ωt, cos Ωt]]`.
pub fn rotate_to_lab_frame(p: [f64; 2], t: f64, omega: f64) -> [f64; 2] {
    let (s, c) = (omega * t).sin_cos();
    [c * p[0] + s * p[1], -s * p[0] + c * p[1]]
}

/// Least-squares slope of `log e` against `log(1/h)` (positive for
/// converging data). `None` with fewer than two usable points.
pub fn fitted_order(steps: &[f64], errors: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = steps
        .iter()
        .zip(errors)
        .filter(|(h, e)| **h > 0.0 && **e > 0.0)
        .map(|(h, e)| (-h.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(-sxy / sxx)
}

/// Orders between consecutive levels: `log(e_i/e_{i+1}) / log(h_i/h_{i+1})`.
pub fn local_orders(steps: &[f64], errors: &[f64]) -> Vec<f64> {
    steps
        .windows(2)
        .zip(errors.windows(2))
        .map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn relative_errors_of_constants() {
        let g = Grid::One(make_grid(4.5, 32).unwrap());
        let one = Field::from_real([1.0; 32]);
        let near = Field::from_real([1.01; 32]);
        assert!((rel_l2_error(&near, &one, &g, 4.0).unwrap() - 0.01).abs() < 1e-14);
        assert_eq!(rel_l2_error(&one, &one, &g, 4.0).unwrap(), 0.0);
        let two = Field::from_real([2.0; 32]);
        let off = Field::from_real([2.1; 32]);
        assert!((rel_linf_error(&off, &two, &g, 4.0).unwrap() - 0.05).abs() < 1e-14);
        assert_eq!(
            rel_l2_error(&one, &Field::zeros(32), &g, 4.0),
            Err(Error::ZeroReference)
        );
    }

    #[test]
    fn energy_of_constant_field() {
        // mask holds |x| < 4 on a mesh that divides 4 exactly
        let grid = make_grid(4.5, 36).unwrap();
        let g = Grid::One(grid);
        let (cst, lambda) = (0.7, 2.0);
        let u = Field::from_real([cst; 36]);
        let e = energy_hi(&u, &Field::zeros(36), lambda, &g, 4.0).unwrap();
        let nodes = g.window_mask(4.0).iter().filter(|m| **m).count() as f64;
        let expected = nodes * 0.25 * (cst * cst + lambda / 2.0 * cst.powi(4));
        assert!((e - expected).abs() < 1e-12);
        // 31 interior nodes of width 1/4 cover (-4, 4) minus one cell
        assert!((nodes * 0.25 - 7.75).abs() < 1e-12);
        assert_eq!(energy_hi(&Field::zeros(36), &Field::zeros(36), 1.0, &g, 4.0).unwrap(), 0.0);
    }

    #[test]
    fn dispersion_utilities() {
        assert_eq!(dispersion_root(c(0.0)).unwrap(), c(-1.0));
        assert!(dispersion_root(c(-1.0)).is_err());
        assert!((phase_velocity_eps(1.0, 1.0).unwrap() - 2.0f64.sqrt()).abs() < 1e-15);
        assert!((phase_velocity_eps(1.0, 0.1).unwrap() - 100.498756).abs() < 1e-5);
        assert!(phase_velocity_eps(0.0, 1.0).is_err());
    }

    #[test]
    fn lab_frame_rotation() {
        assert_eq!(rotate_to_lab_frame([0.3, -2.0], 0.0, 2.0), [0.3, -2.0]);
        let q = rotate_to_lab_frame([1.0, 0.0], core::f64::consts::FRAC_PI_2, 1.0);
        assert!(q[0].abs() < 1e-15 && (q[1] + 1.0).abs() < 1e-15);
        let p = [1.7, -0.4];
        let r = rotate_to_lab_frame(p, core::f64::consts::PI, 2.0);
        assert!((r[0] - p[0]).abs() < 1e-12 && (r[1] - p[1]).abs() < 1e-12);
    }

    #[test]
    fn extension_keeps_nodes() {
        let inner = make_grid(4.5, 288).unwrap();
        let (outer, m) = extend_grid(&inner, 16.0).unwrap();
        assert!(outer.half_width() >= 16.0);
        assert!(is_smooth(outer.len()));
        assert!((outer.mesh() - inner.mesh()).abs() < 1e-15);
        for (j, x) in inner.nodes().iter().enumerate() {
            assert!((outer.nodes()[j + m] - x).abs() < 1e-12);
        }
    }

    #[test]
    fn embedding_round_trip_2d() {
        let g = Grid::Two(Grid2D::square(4.5, 8).unwrap());
        let emb = Embedding::new(&g, 4.0, 2.0).unwrap();
        let f = Field::from_values((0..64).map(|k| c(k as f64)).collect());
        let back = emb.restrict(&emb.extend(&f).unwrap()).unwrap();
        assert_eq!(back, f);
        assert!(Embedding::new(&g, 4.0, 1.5).is_err());
    }

    #[test]
    fn zero_reference_run_stays_zero() {
        let g = Grid::One(make_grid(4.5, 32).unwrap());
        let emb = Embedding::new(&g, 4.0, 4.0).unwrap();
        let n = emb.outer().len();
        let mut run = ReferenceRun::new(emb, Field::zeros(n), Field::zeros(n), 1.0, 0.01, 1.0, 1e-8).unwrap();
        for _ in 0..10 {
            run.step().unwrap();
        }
        assert_eq!(run.restricted_u().max_abs(), 0.0);
        assert!(!run.contaminated());
    }

    #[test]
    fn order_fits() {
        let h = [0.1, 0.05, 0.025];
        let e: Vec<f64> = h.iter().map(|x| 3.0 * x * x).collect();
        assert!((fitted_order(&h, &e).unwrap() - 2.0).abs() < 1e-12);
        assert!(local_orders(&h, &e).iter().all(|p| (p - 2.0).abs() < 1e-12));
        assert!(fitted_order(&h[..1], &e[..1]).is_none());
    }
}
