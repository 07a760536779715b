//! Regularized Bermúdez profiles checked against a brute-force symbolic
//! differentiator: the Taylor coefficients of `-1/z` are obtained by
//! repeatedly differentiating an expression tree, then the truncated series
//! is summed term by term and compared with the closed form.

use kgpml_core::absorption::{bermudez_taylor_coefficient, ProfileSpec};

mod common;

use common::symbolic_coefficients;

/// `β_k` summed literally: `-1/z - Σ c_j (|x| - L)^j` with `z = |x| - L*`.
fn beta_by_series(k: usize, delta: f64, dist_from_interface: f64) -> f64 {
    let z = dist_from_interface - delta;
    let c = symbolic_coefficients(k, -delta);
    -1.0 / z - c.iter().enumerate().map(|(j, cj)| cj * dist_from_interface.powi(j as i32)).sum::<f64>()
}

#[test]
fn symbolic_derivatives_of_reciprocal() {
    // d^j/dz^j (-1/z) = (-1)^(j+1) j! z^-(j+1), checked at a generic point.
    let z = 0.7;
    let c = symbolic_coefficients(5, z);
    for (j, cj) in c.iter().enumerate() {
        let expect = (-1f64).powi(j as i32 + 1) * z.powi(-(j as i32 + 1));
        assert!((cj - expect).abs() < 1e-12 * expect.abs(), "j={j}");
    }
}

#[test]
fn taylor_coefficients_match_symbolic_oracle() {
    for &delta in &[0.375, 0.5, 0.75, 1.3] {
        let c = symbolic_coefficients(6, -delta);
        for (j, cj) in c.iter().enumerate() {
            let got = bermudez_taylor_coefficient(j as u32, delta);
            assert!((got - cj).abs() <= 1e-12 * cj.abs(), "delta={delta} j={j}: {got} vs {cj}");
        }
    }
}

#[test]
fn closed_form_profile_matches_series() {
    let (l, sigma0) = (4.0, 3.0);
    for &delta in &[0.375, 0.5, 0.75] {
        for k in 0..=4 {
            let spec = ProfileSpec::bermudez(k, sigma0, delta, l);
            for i in 0..40 {
                let d = delta * (i as f64 + 0.5) / 41.0;
                let series = sigma0 * beta_by_series(k as usize, delta, d);
                for x in [l + d, -(l + d)] {
                    let closed = spec.sigma(x);
                    let scale = series.abs().max(sigma0 / delta);
                    assert!((closed - series).abs() < 1e-11 * scale, "k={k} delta={delta} x={x}: {closed} vs {series}");
                }
            }
        }
    }
}

#[test]
fn unregularized_profile_is_reciprocal_distance() {
    let spec = ProfileSpec::bermudez(-1, 2.0, 0.5, 4.0);
    for &x in &[4.0, 4.1, 4.3, 4.49] {
        let expect = 2.0 / (4.5 - x);
        assert!((spec.sigma(x) - expect).abs() < 1e-12 * expect);
    }
}

#[test]
fn regularized_profiles_vanish_to_order_k_at_interface() {
    // β_k(t) = O(t^(k+1)) near |x| = L: one-sided difference quotients of
    // orders 0..=k vanish.
    let (l, delta) = (4.0, 0.5);
    for k in 0..=3 {
        let spec = ProfileSpec::bermudez(k, 1.0, delta, l);
        let h = 1e-3;
        let s = spec.sigma(l + h);
        assert!(s < 4.0 * h.powi(k + 1) / delta.powi(k + 2), "k={k}: {s}");
        assert_eq!(spec.sigma(l), 0.0);
    }
}

/// Composite Simpson rule with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + inner) * h / 3.0
}

#[test]
fn layer_integral_diverges_at_the_outer_edge() {
    // Near the pole each decade adds σ0·ln 10 to ∫σ, for every k.
    let (l, delta, sigma0) = (4.0, 0.5, 3.0);
    for k in -1..=3 {
        let spec = ProfileSpec::bermudez(k, sigma0, delta, l);
        let integral = |eta: f64| {
            // log-spaced substitution x = L* - e^s keeps the pole resolved
            let (s0, s1) = (eta.ln(), delta.ln());
            simpson(|s| spec.sigma(l + delta - s.exp()) * s.exp(), s0, s1, 4000)
        };
        let values: Vec<f64> = (4..=9).map(|p| integral(10f64.powi(-p))).collect();
        for w in values.windows(2) {
            let gain = w[1] - w[0];
            assert!((gain - sigma0 * 10f64.ln()).abs() < 1e-3 * gain, "k={k}: {values:?}");
        }
    }
}
