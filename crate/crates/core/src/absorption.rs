//! Absorption profiles for the layer `L ≤ |x| ≤ L* = L + δ`.
//!
//! Two families are provided:
//!
//! * the degree-16 polynomial `σ0 [1 - ((|x| - L*)/δ)²]^8`, bounded by `σ0`;
//! * the regularized Bermúdez functions `σ0 β_k(|x| - L*)`, which subtract the
//!   first `k + 1` Taylor terms (taken at the inner interface) from the
//!   singular profile `-1/z`. They blow up at `|x| = L*`, have a divergent
//!   integral over the layer and `k` continuous derivatives at `|x| = L`.
//!
//! Both are evaluated with `|x|` so one formula serves both sides of the box.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::spectral::Grid1D;

/// Stored in place of `σ = +∞` at a Bermúdez pole. Never consumed: the only
/// model accepting Bermúdez profiles reads the stretch factor, which is 0 there.
pub const POLE_SENTINEL: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "type", rename_all = "lowercase"))]
pub enum ProfileKind {
    Polynomial,
    /// Regularization order `k ≥ -1`; `k = -1` is the unregularized profile.
    Bermudez { order: i32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSpec {
    pub kind: ProfileKind,
    /// `σ0 > 0`.
    pub strength: f64,
    /// `δ > 0`.
    pub thickness: f64,
    /// `L > 0`.
    pub physical_half_width: f64,
    /// Shift `R` in the stretch factor `1/(1 + Rσ)`.
    pub shift: Complex64,
}

impl ProfileSpec {
    pub fn polynomial(strength: f64, thickness: f64, physical_half_width: f64) -> Self {
        Self {
            kind: ProfileKind::Polynomial,
            strength,
            thickness,
            physical_half_width,
            shift: Complex64::new(1.0, 0.0),
        }
    }

    pub fn bermudez(order: i32, strength: f64, thickness: f64, physical_half_width: f64) -> Self {
        Self {
            kind: ProfileKind::Bermudez { order },
            strength,
            thickness,
            physical_half_width,
            shift: Complex64::new(1.0, 0.0),
        }
    }

    pub fn with_shift(mut self, shift: Complex64) -> Self {
        self.shift = shift;
        self
    }

    pub fn total_half_width(&self) -> f64 {
        self.physical_half_width + self.thickness
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.strength) {
            return Err(Error::config("absorption strength sigma0 must be positive"));
        }
        if !positive(self.thickness) {
            return Err(Error::config("layer thickness delta must be positive"));
        }
        if !positive(self.physical_half_width) {
            return Err(Error::config("physical half-width L must be positive"));
        }
        if let ProfileKind::Bermudez { order } = self.kind {
            if order < -1 {
                return Err(Error::config("Bermudez order must be at least -1"));
            }
        }
        if !(self.shift.re.is_finite() && self.shift.im.is_finite()) {
            return Err(Error::config("shift R must be finite"));
        }
        Ok(())
    }

    /// Absorption value at `x`; `+∞` at a Bermúdez pole.
    pub fn sigma(&self, x: f64) -> f64 {
        match self.kind {
            ProfileKind::Polynomial => sigma_polynomial(x, self),
            ProfileKind::Bermudez { .. } => sigma_bermudez(x, self),
        }
    }

    pub fn is_singular(&self) -> bool {
        matches!(self.kind, ProfileKind::Bermudez { .. })
    }
}

/// `σ0 [1 - ((|x| - L*)/δ)²]^8` on the layer, 0 elsewhere.
///
/// Evaluated as `σ0 [s (2 - s)]^8` with `s = (|x| - L)/δ`, which is the same
/// polynomial without the cancellation near the interface.
pub fn sigma_polynomial(x: f64, spec: &ProfileSpec) -> f64 {
    let a = x.abs();
    let l = spec.physical_half_width;
    if a < l || a > spec.total_half_width() {
        return 0.0;
    }
    let s = (a - l) / spec.thickness;
    spec.strength * (s * (2.0 - s)).powi(8)
}

/// Taylor coefficient `(1/j!) d^j/dz^j (-1/z)` at `z = -δ`.
pub fn bermudez_taylor_coefficient(j: u32, thickness: f64) -> f64 {
    thickness.powi(-(j as i32 + 1))
}

/// `σ0 β_k(|x| - L*)` on the layer, 0 elsewhere, `+∞` at `|x| = L*`.
///
/// With `t = |x| - L` the Taylor-corrected profile sums to the closed form
/// `β_k = (t/δ)^(k+1) / (L* - |x|)`.
pub fn sigma_bermudez(x: f64, spec: &ProfileSpec) -> f64 {
    let order = match spec.kind {
        ProfileKind::Bermudez { order } => order,
        ProfileKind::Polynomial => -1,
    };
    let a = x.abs();
    let l = spec.physical_half_width;
    let l_star = spec.total_half_width();
    if a < l || a > l_star {
        return 0.0;
    }
    let to_pole = l_star - a;
    if to_pole <= 0.0 {
        return f64::INFINITY;
    }
    let t = (a - l) / spec.thickness;
    spec.strength * t.powi(order + 1) / to_pole
}

/// Which layer model will consume a sampled profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerModel {
    /// Needs `σ` itself (first-order system with auxiliary fields).
    FirstOrder,
    /// Only needs the stretch factor `1/(1 + Rσ)`.
    Stretched,
}

/// A profile sampled at the nodes of one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionProfile {
    spec: ProfileSpec,
    sigma: Vec<f64>,
    stretch: Vec<Complex64>,
}

impl AbsorptionProfile {
    pub fn spec(&self) -> &ProfileSpec {
        &self.spec
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn stretch(&self) -> &[Complex64] {
        &self.stretch
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    /// A profile with `σ ≡ 0` (no layer), e.g. for reference runs.
    pub fn vanishing(spec: ProfileSpec, len: usize) -> Self {
        Self {
            spec,
            sigma: alloc::vec![0.0; len],
            stretch: alloc::vec![Complex64::new(1.0, 0.0); len],
        }
    }
}

pub fn sample_profile(grid: &Grid1D, spec: &ProfileSpec, model: LayerModel) -> Result<AbsorptionProfile> {
    spec.validate()?;
    if model == LayerModel::FirstOrder && spec.is_singular() {
        return Err(Error::config(
            "Bermudez profiles are singular at the outer boundary and cannot drive the \
             first-order layer system; use the polynomial profile",
        ));
    }
    let l_star = spec.total_half_width();
    if (grid.half_width() - l_star).abs() > 1e-12 * l_star {
        return Err(Error::config("grid half-width must equal L + delta"));
    }
    let mut sigma = Vec::with_capacity(grid.len());
    let mut stretch = Vec::with_capacity(grid.len());
    for &x in grid.nodes() {
        let s = spec.sigma(x);
        if s.is_infinite() {
            sigma.push(POLE_SENTINEL);
            stretch.push(Complex64::new(0.0, 0.0));
        } else {
            sigma.push(s);
            stretch.push((Complex64::new(1.0, 0.0) + spec.shift * s).inv());
        }
    }
    Ok(AbsorptionProfile {
        spec: *spec,
        sigma,
        stretch,
    })
}

/// Highest derivative order at which the profile matches the identically
/// zero interior across `|x| = L`, estimated from forward differences at
/// shrinking steps. Returns `-1` when the profile itself jumps there.
pub fn continuity_order_estimate(spec: &ProfileSpec) -> i32 {
    const MAX_ORDER: usize = 12;
    let l = spec.physical_half_width;
    let delta = spec.thickness;
    let mut order = -1;
    for m in 0..=MAX_ORDER {
        let base = delta / (64.0 * (m as f64 + 1.0));
        let estimates: Vec<f64> = (0..4)
            .map(|q| {
                let s = base / (1u32 << q) as f64;
                forward_difference(|x| spec.sigma(x), l, s, m).abs() / s.powi(m as i32)
            })
            .collect();
        let vanishing = estimates.iter().all(|&e| e == 0.0)
            || estimates.windows(2).all(|w| w[1] < 0.75 * w[0]);
        if !vanishing {
            break;
        }
        order = m as i32;
    }
    order
}

fn forward_difference(f: impl Fn(f64) -> f64, x0: f64, step: f64, order: usize) -> f64 {
    let mut binom = 1.0;
    let mut acc = 0.0;
    for i in 0..=order {
        let sign = if (order - i) % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binom * f(x0 + i as f64 * step);
        binom = binom * (order - i) as f64 / (i + 1) as f64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn polynomial_values() {
        let spec = ProfileSpec::polynomial(8.0, 0.5, 4.0);
        assert_eq!(sigma_polynomial(0.0, &spec), 0.0);
        assert_eq!(sigma_polynomial(4.0, &spec), 0.0);
        assert_eq!(sigma_polynomial(4.5, &spec), 8.0);
        assert_eq!(sigma_polynomial(-4.5, &spec), 8.0);
        let mid = sigma_polynomial(4.25, &spec);
        assert!((mid - 8.0 * 0.75f64.powi(8)).abs() < 1e-14);
        assert!((mid - 0.800903).abs() < 1e-6);
    }

    #[test]
    fn polynomial_matches_literal_formula() {
        let spec = ProfileSpec::polynomial(3.0, 0.75, 4.0);
        for i in 0..=100 {
            let x = 4.0 + 0.75 * i as f64 / 100.0;
            let y = (x - 4.75) / 0.75;
            let literal = 3.0 * (1.0 - y * y).powi(8);
            assert!((sigma_polynomial(x, &spec) - literal).abs() < 1e-13);
        }
    }

    #[test]
    fn bermudez_values() {
        let b2 = ProfileSpec::bermudez(2, 3.0, 0.5, 4.0);
        assert_eq!(sigma_bermudez(4.0, &b2), 0.0);
        assert!((sigma_bermudez(4.25, &b2) - 1.5).abs() < 1e-14);
        assert!(sigma_bermudez(4.5, &b2).is_infinite());
        let bm1 = ProfileSpec::bermudez(-1, 3.0, 0.5, 4.0);
        assert!((sigma_bermudez(4.0, &bm1) - 6.0).abs() < 1e-14);
        assert!((sigma_bermudez(-4.0, &bm1) - 6.0).abs() < 1e-14);
        assert_eq!(sigma_bermudez(3.99, &bm1), 0.0);
    }

    #[test]
    fn taylor_coefficients_vanish_correction_at_interface() {
        // β_k(-δ) = 0 for every k ≥ 0
        for k in 0..6 {
            for delta in [0.375, 0.5, 0.75] {
                let spec = ProfileSpec::bermudez(k, 1.0, delta, 4.0);
                assert_eq!(sigma_bermudez(4.0, &spec), 0.0);
                let sum: f64 = (0..=k as u32)
                    .map(|j| bermudez_taylor_coefficient(j, delta) * 0.0f64.powi(j as i32))
                    .sum();
                assert!((1.0 / delta - sum).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn sampled_profiles() {
        let spec = ProfileSpec::polynomial(8.0, 0.5, 4.0);
        let grid = make_grid(4.5, 256).unwrap();
        let p = sample_profile(&grid, &spec, LayerModel::FirstOrder).unwrap();
        for (&x, &s) in grid.nodes().iter().zip(p.sigma()) {
            if x.abs() <= 4.0 {
                assert_eq!(s, 0.0);
            } else {
                assert!(s > 0.0);
            }
        }

        let b2 = ProfileSpec::bermudez(2, 3.0, 0.5, 4.0);
        let p = sample_profile(&grid, &b2, LayerModel::Stretched).unwrap();
        assert_eq!(grid.nodes()[0], -4.5);
        assert_eq!(p.stretch()[0], Complex64::new(0.0, 0.0));
        assert_eq!(p.sigma()[0], POLE_SENTINEL);
        assert!(p.stretch().iter().all(|s| s.re.is_finite()));

        assert!(matches!(
            sample_profile(&grid, &b2, LayerModel::FirstOrder),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn stretch_of_known_sigma() {
        // node at x = L + δ/2 with k = 2, σ0 = 3, δ = 0.5 gives σ = 1.5
        let spec = ProfileSpec::bermudez(2, 3.0, 0.5, 4.0);
        let grid = make_grid(4.5, 36).unwrap();
        let p = sample_profile(&grid, &spec, LayerModel::Stretched).unwrap();
        let j = grid.nodes().iter().position(|&x| x == 4.25).unwrap();
        assert!((p.stretch()[j].re - 0.4).abs() < 1e-14);

        let spec = ProfileSpec::polynomial(3.0, 0.5, 4.0);
        let p = sample_profile(&grid, &spec, LayerModel::Stretched).unwrap();
        let j = grid.nodes().iter().position(|&x| x == -4.5).unwrap();
        assert!((p.sigma()[j] - 3.0).abs() < 1e-14);
        assert!((p.stretch()[j].re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_grid_of_wrong_width() {
        let spec = ProfileSpec::polynomial(8.0, 0.5, 4.0);
        let grid = make_grid(5.0, 64).unwrap();
        assert!(sample_profile(&grid, &spec, LayerModel::Stretched).is_err());
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(ProfileSpec::polynomial(0.0, 0.5, 4.0).validate().is_err());
        assert!(ProfileSpec::polynomial(1.0, -0.5, 4.0).validate().is_err());
        assert!(ProfileSpec::polynomial(1.0, 0.5, 0.0).validate().is_err());
        assert!(ProfileSpec::bermudez(-2, 1.0, 0.5, 4.0).validate().is_err());
    }

    #[test]
    fn continuity_orders() {
        assert_eq!(continuity_order_estimate(&ProfileSpec::bermudez(-1, 3.0, 0.5, 4.0)), -1);
        assert_eq!(continuity_order_estimate(&ProfileSpec::bermudez(0, 3.0, 0.5, 4.0)), 0);
        for k in 1..=4 {
            let est = continuity_order_estimate(&ProfileSpec::bermudez(k, 3.0, 0.5, 4.0));
            assert!(est >= k, "k = {k}, estimate = {est}");
        }
        assert!(continuity_order_estimate(&ProfileSpec::polynomial(8.0, 0.5, 4.0)) >= 7);
    }
}
