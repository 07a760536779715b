//! Brute-force symbolic differentiation of `-1/z`, shared by the profile
//! oracle tests.

#[derive(Debug, Clone)]
enum Expr {
    Const(f64),
    Var,
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    /// `e^n` for integer `n`.
    Pow(Box<Expr>, i32),
}

use Expr::*;

fn add(a: Expr, b: Expr) -> Expr {
    Add(Box::new(a), Box::new(b))
}

fn mul(a: Expr, b: Expr) -> Expr {
    Mul(Box::new(a), Box::new(b))
}

fn diff(e: &Expr) -> Expr {
    match e {
        Const(_) => Const(0.0),
        Var => Const(1.0),
        Add(a, b) => add(diff(a), diff(b)),
        Mul(a, b) => add(mul(diff(a), (**b).clone()), mul((**a).clone(), diff(b))),
        Pow(a, n) => mul(mul(Const(*n as f64), Pow(a.clone(), n - 1)), diff(a)),
    }
}

/// Folds constants so repeated derivatives do not blow up in size.
fn simplify(e: Expr) -> Expr {
    match e {
        Add(a, b) => match (simplify(*a), simplify(*b)) {
            (Const(x), Const(y)) => Const(x + y),
            (Const(z), o) | (o, Const(z)) if z == 0.0 => o,
            (a, b) => add(a, b),
        },
        Mul(a, b) => match (simplify(*a), simplify(*b)) {
            (Const(x), Const(y)) => Const(x * y),
            (Const(z), _) | (_, Const(z)) if z == 0.0 => Const(0.0),
            (Const(o), e) | (e, Const(o)) if o == 1.0 => e,
            (a, b) => mul(a, b),
        },
        Pow(a, n) => match simplify(*a) {
            Const(x) => Const(x.powi(n)),
            _ if n == 0 => Const(1.0),
            a => Pow(Box::new(a), n),
        },
        e => e,
    }
}

fn eval(e: &Expr, z: f64) -> f64 {
    match e {
        Const(c) => *c,
        Var => z,
        Add(a, b) => eval(a, z) + eval(b, z),
        Mul(a, b) => eval(a, z) * eval(b, z),
        Pow(a, n) => eval(a, z).powi(*n),
    }
}

/// `(1/j!) d^j/dz^j (-1/z)` at `z`, for `j = 0..=k`.
pub fn symbolic_coefficients(k: usize, z: f64) -> Vec<f64> {
    let mut e = mul(Const(-1.0), Pow(Box::new(Var), -1));
    let mut out = Vec::new();
    let mut fact = 1.0;
    for j in 0..=k {
        if j > 0 {
            fact *= j as f64;
            e = simplify(diff(&e));
        }
        out.push(eval(&e, z) / fact);
    }
    out
}
