//! Unrestarted GMRES on matrix-free operators with left preconditioning.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::spectral::{FourierMultiplier, Spectral};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A linear map on `C^dim`, applied without forming a matrix.
///
/// `apply` takes `&mut self` so implementations can keep transform scratch.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&mut self, x: &[Complex64], y: &mut [Complex64]);
}

impl<T: LinearOperator + ?Sized> LinearOperator for &mut T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&mut self, x: &[Complex64], y: &mut [Complex64]) {
        (**self).apply(x, y)
    }
}

/// `y = c·x`.
#[derive(Debug, Clone, Copy)]
pub struct ScaledIdentity {
    pub dim: usize,
    pub scale: Complex64,
}

impl LinearOperator for ScaledIdentity {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&mut self, x: &[Complex64], y: &mut [Complex64]) {
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = *xi * self.scale;
        }
    }
}

/// A Fourier multiplier viewed as an operator.
#[derive(Debug, Clone)]
pub struct MultiplierOperator {
    pub spectral: Spectral,
    pub multiplier: FourierMultiplier,
}

impl LinearOperator for MultiplierOperator {
    fn dim(&self) -> usize {
        self.multiplier.len()
    }

    fn apply(&mut self, x: &[Complex64], y: &mut [Complex64]) {
        self.spectral.apply_into(x, &self.multiplier, y);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresSettings {
    /// Relative tolerance on the preconditioned residual.
    pub tol: f64,
    /// Iteration cap; `None` means the system dimension.
    pub max_iter: Option<usize>,
}

impl Default for GmresSettings {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrylovReport {
    pub iterations: usize,
    /// `‖M(b - Ax)‖ / ‖Mb‖` at exit.
    pub final_residual: f64,
    pub converged: bool,
    /// Relative preconditioned residual after each iteration.
    pub history: Vec<f64>,
}

pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Solves `M A x = M b` from a zero initial guess, `M` being the optional
/// left preconditioner. Stops once `‖M(b - Ax)‖ ≤ tol·‖Mb‖`.
///
/// Orthogonalization is modified Gram-Schmidt, with a second pass whenever
/// the new direction loses more than 30% of its norm.
pub fn gmres_solve(
    op: &mut dyn LinearOperator,
    mut precond: Option<&mut dyn LinearOperator>,
    rhs: &[Complex64],
    settings: &GmresSettings,
) -> (Vec<Complex64>, KrylovReport) {
    let n = op.dim();
    assert_eq!(rhs.len(), n, "right-hand side does not match operator");
    let max_iter = settings.max_iter.unwrap_or(n).max(1);

    let mut tmp = vec![ZERO; n];
    let mut r0 = vec![ZERO; n];
    match precond.as_deref_mut() {
        Some(m) => m.apply(rhs, &mut r0),
        None => r0.copy_from_slice(rhs),
    }
    let beta = norm(&r0);
    if beta == 0.0 {
        return (
            vec![ZERO; n],
            KrylovReport {
                iterations: 0,
                final_residual: 0.0,
                converged: true,
                history: Vec::new(),
            },
        );
    }

    let inv = 1.0 / beta;
    r0.iter_mut().for_each(|z| *z *= inv);
    let mut basis: Vec<Vec<Complex64>> = vec![r0];
    // Column j of the Hessenberg matrix after rotation, length j + 2.
    let mut columns: Vec<Vec<Complex64>> = Vec::new();
    let mut rot_c: Vec<f64> = Vec::new();
    let mut rot_s: Vec<Complex64> = Vec::new();
    let mut g: Vec<Complex64> = vec![Complex64::new(beta, 0.0)];
    let mut history = Vec::new();
    let mut w = vec![ZERO; n];
    let mut converged = false;
    let mut residual = 1.0;

    for j in 0..max_iter {
        op.apply(&basis[j], &mut tmp);
        match precond.as_deref_mut() {
            Some(m) => m.apply(&tmp, &mut w),
            None => w.copy_from_slice(&tmp),
        }

        let mut h = vec![ZERO; j + 2];
        let before = norm(&w);
        for (i, v) in basis.iter().enumerate() {
            let hij = dot(v, &w);
            axpy(-hij, v, &mut w);
            h[i] += hij;
        }
        let mut after = norm(&w);
        if after < 0.7 * before {
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(v, &w);
                axpy(-hij, v, &mut w);
                h[i] += hij;
            }
            after = norm(&w);
        }
        h[j + 1] = Complex64::new(after, 0.0);

        for i in 0..j {
            let (c, s) = (rot_c[i], rot_s[i]);
            let top = h[i] * c + s * h[i + 1];
            let bottom = -s.conj() * h[i] + h[i + 1] * c;
            h[i] = top;
            h[i + 1] = bottom;
        }
        let a = h[j];
        let b = h[j + 1];
        let nu = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (c, s) = if a.norm() == 0.0 {
            (0.0, Complex64::new(1.0, 0.0))
        } else {
            let phase = a / a.norm();
            (a.norm() / nu, phase * b.conj() / nu)
        };
        h[j] = a * c + s * b;
        h[j + 1] = ZERO;
        rot_c.push(c);
        rot_s.push(s);
        let gj = g[j];
        g[j] = gj * c;
        g.push(-s.conj() * gj);
        columns.push(h);

        residual = g[j + 1].norm() / beta;
        history.push(residual);
        if residual <= settings.tol || after == 0.0 {
            converged = residual <= settings.tol || after == 0.0;
            break;
        }
        let inv = 1.0 / after;
        basis.push(w.iter().map(|z| z * inv).collect());
    }

    let k = columns.len();
    let mut y = vec![ZERO; k];
    for i in (0..k).rev() {
        let mut acc = g[i];
        for (l, yl) in y.iter().enumerate().take(k).skip(i + 1) {
            acc -= columns[l][i] * yl;
        }
        y[i] = acc / columns[i][i];
    }
    let mut x = vec![ZERO; n];
    for (yi, v) in y.iter().zip(&basis) {
        axpy(*yi, v, &mut x);
    }
    (
        x,
        KrylovReport {
            iterations: k,
            final_residual: residual,
            converged,
            history,
        },
    )
}
