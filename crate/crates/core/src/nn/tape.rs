//! Scalar reverse-mode tape for losses written as closures over network
//! outputs.
//!
//! ```
//! use fracpinn::nn::Tape;
//!
//! let tape = Tape::new();
//! let x = tape.var(3.0);
//! let y = x * x + 2.0 * x;
//! let grads = tape.gradient(y).unwrap();
//! assert_eq!(y.value(), 15.0);
//! assert_eq!(grads[x.index()], 8.0);
//! ```

use std::cell::RefCell;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
struct Node {
    op: &'static str,
    value: f64,
    parents: [(usize, f64); 2],
    arity: u8,
}

/// Wengert list of scalar operations.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
}

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    index: usize,
    value: f64,
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    fn push(&self, op: &'static str, value: f64, parents: &[(usize, f64)]) -> Var<'_> {
        let mut nodes = self.nodes.borrow_mut();
        let mut p = [(0, 0.0); 2];
        p[..parents.len()].copy_from_slice(parents);
        nodes.push(Node {
            op,
            value,
            parents: p,
            arity: parents.len() as u8,
        });
        Var {
            tape: self,
            index: nodes.len() - 1,
            value,
        }
    }

    /// New independent variable.
    pub fn var(&self, value: f64) -> Var<'_> {
        self.push("input", value, &[])
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Adjoints of every node with respect to `output`, indexed by
    /// [`Var::index`].
    pub fn gradient(&self, output: Var<'_>) -> Result<Vec<f64>> {
        let nodes = self.nodes.borrow();
        if let Some(bad) = nodes[..=output.index].iter().find(|n| !n.value.is_finite()) {
            return Err(Error::numeric(bad.op, "non-finite value on the tape"));
        }
        let mut adj = vec![0.0; nodes.len()];
        adj[output.index] = 1.0;
        for i in (0..=output.index).rev() {
            let a = adj[i];
            if a == 0.0 {
                continue;
            }
            let node = nodes[i];
            for &(p, local) in &node.parents[..node.arity as usize] {
                adj[p] += a * local;
            }
        }
        Ok(adj)
    }
}

impl<'t> Var<'t> {
    pub fn value(self) -> f64 {
        self.value
    }

    pub fn index(self) -> usize {
        self.index
    }

    fn unary(self, op: &'static str, value: f64, local: f64) -> Var<'t> {
        self.tape.push(op, value, &[(self.index, local)])
    }

    pub fn exp(self) -> Var<'t> {
        let e = self.value.exp();
        self.unary("exp", e, e)
    }

    pub fn ln(self) -> Var<'t> {
        self.unary("ln", self.value.ln(), 1.0 / self.value)
    }

    pub fn sqrt(self) -> Var<'t> {
        let s = self.value.sqrt();
        self.unary("sqrt", s, 0.5 / s)
    }

    pub fn powi(self, n: i32) -> Var<'t> {
        self.unary("powi", self.value.powi(n), n as f64 * self.value.powi(n - 1))
    }

    pub fn square(self) -> Var<'t> {
        self.unary("square", self.value * self.value, 2.0 * self.value)
    }

    pub fn abs(self) -> Var<'t> {
        self.unary("abs", self.value.abs(), self.value.signum())
    }

    pub fn sigmoid(self) -> Var<'t> {
        let s = 1.0 / (1.0 + (-self.value).exp());
        self.unary("sigmoid", s, s * (1.0 - s))
    }
}

impl<'t> Add for Var<'t> {
    type Output = Var<'t>;
    fn add(self, rhs: Var<'t>) -> Var<'t> {
        self.tape.push("add", self.value + rhs.value, &[(self.index, 1.0), (rhs.index, 1.0)])
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, rhs: Var<'t>) -> Var<'t> {
        self.tape.push("sub", self.value - rhs.value, &[(self.index, 1.0), (rhs.index, -1.0)])
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, rhs: Var<'t>) -> Var<'t> {
        self.tape.push("mul", self.value * rhs.value, &[(self.index, rhs.value), (rhs.index, self.value)])
    }
}

impl<'t> Div for Var<'t> {
    type Output = Var<'t>;
    fn div(self, rhs: Var<'t>) -> Var<'t> {
        let q = self.value / rhs.value;
        self.tape.push("div", q, &[(self.index, 1.0 / rhs.value), (rhs.index, -q / rhs.value)])
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Var<'t>;
    fn neg(self) -> Var<'t> {
        self.unary("neg", -self.value, -1.0)
    }
}

impl<'t> Add<f64> for Var<'t> {
    type Output = Var<'t>;
    fn add(self, rhs: f64) -> Var<'t> {
        self.unary("add_const", self.value + rhs, 1.0)
    }
}

impl<'t> Sub<f64> for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, rhs: f64) -> Var<'t> {
        self.unary("sub_const", self.value - rhs, 1.0)
    }
}

impl<'t> Mul<f64> for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, rhs: f64) -> Var<'t> {
        self.unary("scale", self.value * rhs, rhs)
    }
}

impl<'t> Div<f64> for Var<'t> {
    type Output = Var<'t>;
    fn div(self, rhs: f64) -> Var<'t> {
        self.unary("div_const", self.value / rhs, 1.0 / rhs)
    }
}

impl<'t> Add<Var<'t>> for f64 {
    type Output = Var<'t>;
    fn add(self, rhs: Var<'t>) -> Var<'t> {
        rhs + self
    }
}

impl<'t> Sub<Var<'t>> for f64 {
    type Output = Var<'t>;
    fn sub(self, rhs: Var<'t>) -> Var<'t> {
        rhs.unary("rsub_const", self - rhs.value, -1.0)
    }
}

impl<'t> Mul<Var<'t>> for f64 {
    type Output = Var<'t>;
    fn mul(self, rhs: Var<'t>) -> Var<'t> {
        rhs * self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_rule() {
        let tape = Tape::new();
        let x = tape.var(0.7);
        let y = tape.var(-1.3);
        let f = (x * y).exp() + (x / y).square() - 3.0 * y.sigmoid();
        let g = tape.gradient(f).unwrap();
        let (xv, yv) = (0.7f64, -1.3f64);
        let s = 1.0 / (1.0 + yv.exp().recip());
        let dfx = yv * (xv * yv).exp() + 2.0 * (xv / yv) / yv;
        let dfy = xv * (xv * yv).exp() - 2.0 * (xv / yv) * xv / (yv * yv) - 3.0 * s * (1.0 - s);
        assert!((g[x.index()] - dfx).abs() < 1e-14);
        assert!((g[y.index()] - dfy).abs() < 1e-14);
    }

    #[test]
    fn non_finite_reports_operation() {
        let tape = Tape::new();
        let x = tape.var(-1.0);
        let f = x.ln();
        match tape.gradient(f) {
            Err(Error::Numeric { op, .. }) => assert_eq!(op, "ln"),
            other => panic!("expected numeric error, got {other:?}"),
        }
    }
}
