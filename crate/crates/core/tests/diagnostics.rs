//! Energy quadrature, reference-solution validity and conditioning of the
//! preconditioned layer-II system.

use kgpml_core::absorption::ProfileSpec;
use kgpml_core::krylov::{LinearOperator, MultiplierOperator};
use kgpml_core::metrics::{energy_hi, rel_l2_error, Embedding, ReferenceRun};
use kgpml_core::pml2::StretchedLaplacian;
use kgpml_core::spectral::{Field, FourierMultiplier, Grid, Grid1D, Spectral};
use kgpml_core::Complex64;
use proptest::prelude::*;

fn example(g: &Grid1D) -> (Field, Field) {
    (
        Field::sample_1d(g, |x| Complex64::new(5.0 * (-x * x).exp(), 0.0)),
        Field::sample_1d(g, |x| Complex64::new(0.5 / (x * x).cosh(), 0.0)),
    )
}

#[test]
fn energy_quadrature_is_spectrally_accurate() {
    let energy = |n: usize| {
        let g = Grid1D::new(4.5, n).unwrap();
        let (u, v) = example(&g);
        energy_hi(&u, &v, 1.0, &Grid::One(g), 4.0).unwrap()
    };
    for n in [288, 576] {
        let (a, b) = (energy(n), energy(2 * n));
        assert!((a - b).abs() < 1e-8 * b, "N={n}: {a} vs {b}");
    }
}

#[test]
fn reference_does_not_depend_on_the_enlargement() {
    let inner = Grid::One(Grid1D::new(4.5, 288).unwrap());
    let (tau, steps) = (0.01, 400);
    let finals: Vec<Field> = [4.0, 8.0]
        .iter()
        .map(|&factor| {
            let emb = Embedding::new(&inner, 4.0, factor).unwrap();
            let Grid::One(outer) = emb.outer().clone() else { unreachable!() };
            let (u0, v0) = example(&outer);
            let mut run = ReferenceRun::new(emb, u0, v0, 1.0, tau, 1.0, 1e-8).unwrap();
            for _ in 0..steps {
                run.step().unwrap();
            }
            assert!(!run.contaminated(), "factor {factor}: boundary peak {}", run.boundary_peak());
            run.restricted_u()
        })
        .collect();
    let e = rel_l2_error(&finals[0], &finals[1], &inner, 4.0).unwrap();
    assert!(e < 1e-8, "{e}");
}

/// `P G` for the ε-scaled step with a `σ_B2` layer, `R = 1`.
struct Preconditioned {
    lap: StretchedLaplacian,
    shift: f64,
    p: MultiplierOperator,
    tmp: Vec<Complex64>,
}

impl Preconditioned {
    fn new(n: usize, tau: f64, eps: f64) -> Self {
        let g = Grid1D::new(4.5, n).unwrap();
        let spec = ProfileSpec::bermudez(2, 3.0, 0.5, 4.0);
        let stretch = g.nodes().iter().map(|&x| Complex64::new(1.0 / (1.0 + spec.sigma(x)), 0.0)).collect();
        let e2 = eps * eps;
        let shift = e2 / (tau * tau) + 1.0 / (2.0 * e2);
        let p = FourierMultiplier::new(g.wavenumbers().iter().map(|&mu| Complex64::new(1.0 / (shift + mu * mu / 2.0), 0.0)).collect());
        Self {
            lap: StretchedLaplacian::new(Grid::One(g.clone()), stretch, None).unwrap(),
            shift,
            p: MultiplierOperator { spectral: Spectral::new(g), multiplier: p },
            tmp: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    fn rayleigh(&mut self, x: &[Complex64]) -> f64 {
        let mut gx = vec![Complex64::new(0.0, 0.0); x.len()];
        self.lap.apply(x, &mut gx);
        for (g, xi) in gx.iter_mut().zip(x) {
            *g = *g * 0.5 + xi * self.shift;
        }
        self.p.apply(&gx, &mut self.tmp);
        let num: Complex64 = self.tmp.iter().zip(x).map(|(a, b)| a * b.conj()).sum();
        let den: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        num.norm() / den
    }
}

fn layer_mode(n: usize, l: usize) -> Vec<Complex64> {
    let g = Grid1D::new(4.5, n).unwrap();
    let mu = g.wavenumbers()[l % n];
    g.nodes()
        .iter()
        .map(|&x| if x.abs() > 4.0 { Complex64::new(0.0, mu * x).exp() } else { Complex64::new(0.0, 0.0) })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(32) })]

    #[test]
    fn preconditioned_rayleigh_quotients_are_bounded_uniformly_in_eps(
        re in prop::collection::vec(-1.0..1.0f64, 1152),
        im in prop::collection::vec(-1.0..1.0f64, 1152),
        l in 0usize..1152,
    ) {
        let noise: Vec<Complex64> = re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        for x in [noise, layer_mode(1152, l)] {
            for eps in [1.0, 0.5, 0.25, 0.125] {
                for tau in [0.02, 1e-4] {
                    let q = Preconditioned::new(1152, tau, eps).rayleigh(&x);
                    prop_assert!((0.2..=1.0 + 1e-9).contains(&q), "eps={} tau={}: {}", eps, tau, q);
                }
            }
        }
    }
}
