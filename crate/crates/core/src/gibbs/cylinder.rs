use serde::{Deserialize, Serialize};

use crate::gibbs::measure::{mode_direction, Part};
use crate::spectral::field::{FourierField, KVec};

/// Outer functions of the dictionary; all but `Linear` are bounded with bounded derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outer {
    Constant(f64),
    /// `y₀` (unbounded; Gaussian oracles only).
    Linear,
    /// `tanh y₀`
    Tanh,
    /// `cos(y₀ + y₁)`
    CosSum,
    /// `tanh y₀ · cos y₁`
    TanhCos,
    /// `sin(tanh y₀ + y₁)`
    SinTanh,
    /// `tanh y₀ · tanh y₁`
    TanhTanh,
}

impl Outer {
    pub fn arity(&self) -> usize {
        match self {
            Outer::Constant(_) => 0,
            Outer::Linear | Outer::Tanh => 1,
            _ => 2,
        }
    }

    fn value_and_grad(&self, y: &[f64]) -> (f64, [f64; 2]) {
        let sech2 = |v: f64| 1.0 - v.tanh().powi(2);
        match *self {
            Outer::Constant(c) => (c, [0.0, 0.0]),
            Outer::Linear => (y[0], [1.0, 0.0]),
            Outer::Tanh => (y[0].tanh(), [sech2(y[0]), 0.0]),
            Outer::CosSum => {
                let s = y[0] + y[1];
                (s.cos(), [-s.sin(), -s.sin()])
            }
            Outer::TanhCos => {
                let (t, c) = (y[0].tanh(), y[1].cos());
                (t * c, [sech2(y[0]) * c, -t * y[1].sin()])
            }
            Outer::SinTanh => {
                let s = y[0].tanh() + y[1];
                (s.sin(), [s.cos() * sech2(y[0]), s.cos()])
            }
            Outer::TanhTanh => {
                let (a, b) = (y[0].tanh(), y[1].tanh());
                (a * b, [sech2(y[0]) * b, a * sech2(y[1])])
            }
        }
    }
}

/// `f(x) = F(s⟨l₁,x⟩, …)` with trigonometric-polynomial `l_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderFunction {
    pub name: String,
    pub outer: Outer,
    pub inner: Vec<FourierField>,
    pub scale: f64,
}

impl CylinderFunction {
    pub fn new(name: impl Into<String>, outer: Outer, inner: Vec<FourierField>, scale: f64) -> Self {
        assert_eq!(inner.len(), outer.arity(), "outer function arity");
        Self { name: name.into(), outer, inner, scale }
    }

    fn args(&self, x: &FourierField) -> Vec<f64> {
        self.inner.iter().map(|l| self.scale * x.inner(l)).collect()
    }

    pub fn eval(&self, x: &FourierField) -> f64 {
        self.outer.value_and_grad(&self.args(x)).0
    }

    /// `Df = s Σ ∂_iF · l_i`, on the box of `x`.
    pub fn gradient(&self, x: &FourierField) -> FourierField {
        let (_, g) = self.outer.value_and_grad(&self.args(x));
        let mut out = FourierField::zeros(x.dim(), x.cutoff(), false);
        for (gi, l) in g.iter().zip(&self.inner) {
            out.add_scaled(self.scale * gi, &l.resized(x.cutoff()));
        }
        out
    }

    /// Derivative along the unit direction `h`.
    pub fn directional(&self, x: &FourierField, h: &FourierField) -> f64 {
        self.gradient(x).inner(h)
    }
}

/// Version tag of [`dictionary`]; bump when its members change.
pub const DICTIONARY_VERSION: &str = "v1";

/// The fixed test dictionary: five bounded cylinder functions on the lowest modes.
pub fn dictionary(dim: usize, cutoff: usize) -> Vec<CylinderFunction> {
    let d = |k: KVec, p| mode_direction(dim, cutoff, &k, p);
    let a = d([1, 0, 0], Part::Cos);
    let b = d([0, 1, 0], Part::Sin);
    let c = d([1, 1, 0], Part::Cos);
    let zero = d([0, 0, 0], Part::Cos);
    let s = 3.0;
    vec![
        CylinderFunction::new("tanh_a", Outer::Tanh, vec![a.clone()], s),
        CylinderFunction::new("cos_b0", Outer::CosSum, vec![b.clone(), zero.clone()], s),
        CylinderFunction::new("tanhcos_0c", Outer::TanhCos, vec![zero, c.clone()], s),
        CylinderFunction::new("sintanh_ac", Outer::SinTanh, vec![a.clone(), c], s),
        CylinderFunction::new("tanhtanh_ba", Outer::TanhTanh, vec![b, a], s),
    ]
}

/// Directions used by the integration-by-parts suite.
pub fn ibp_directions(dim: usize, cutoff: usize) -> Vec<(String, FourierField)> {
    [([0, 0, 0], Part::Cos, "cos0"), ([1, 0, 0], Part::Cos, "cos100"), ([0, 1, 0], Part::Sin, "sin010")]
        .into_iter()
        .map(|(k, p, name)| (name.to_string(), mode_direction(dim, cutoff, &k, p)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::ops::hermitian_from_pairs;

    #[test]
    fn gradients_match_finite_differences() {
        let mut s = 11u64;
        let x = hermitian_from_pairs(3, 2, false, || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
            let a = (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            (a, -0.5 * a)
        });
        let h = mode_direction(3, 2, &[1, 1, 0], Part::Cos);
        let g = mode_direction(3, 2, &[0, 1, 0], Part::Sin);
        for f in dictionary(3, 2) {
            for dir in [&h, &g] {
                let e = 1e-6;
                let mut xp = x.clone();
                xp.add_scaled(e, dir);
                let mut xm = x.clone();
                xm.add_scaled(-e, dir);
                let fd = (f.eval(&xp) - f.eval(&xm)) / (2.0 * e);
                assert!((fd - f.directional(&x, dir)).abs() < 1e-7, "{}", f.name);
            }
        }
    }

    #[test]
    fn constant_has_no_gradient() {
        let f = CylinderFunction::new("one", Outer::Constant(1.0), vec![], 1.0);
        let x = FourierField::cosine_pair(3, 1, &[1, 0, 0]);
        assert_eq!(f.eval(&x), 1.0);
        assert_eq!(f.gradient(&x).max_abs_coeff(), 0.0);
        assert_eq!(dictionary(3, 1).len(), 5);
    }
}
