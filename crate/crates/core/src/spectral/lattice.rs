use crate::error::{Error, Result};
use crate::spectral::field::{grid_coordinate, FourierField};

/// Real values on the periodic lattice of `(2N+1)^d` sites with mesh `ε = 2/(2N+1)`.
///
/// Site `p ∈ {0..2N}^d` sits at `x = ε p` (read modulo 2, represented in `[-1, 1)`).
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeField {
    dim: usize,
    n: usize,
    values: Vec<f64>,
}

impl LatticeField {
    pub fn zeros(dim: usize, n: usize) -> Self {
        assert!(dim == 2 || dim == 3, "dimension must be 2 or 3");
        let side = 2 * n + 1;
        Self { dim, n, values: vec![0.0; side.pow(dim as u32)] }
    }

    pub fn from_values(dim: usize, n: usize, values: Vec<f64>) -> Result<Self> {
        let side = 2 * n + 1;
        let expected = side.pow(dim as u32);
        if values.len() != expected || !(dim == 2 || dim == 3) {
            return Err(Error::SizeMismatch {
                expected: format!("{expected} sites (dim {dim}, N {n})"),
                found: format!("{}", values.len()),
            });
        }
        Ok(Self { dim, n, values })
    }

    pub fn from_fn(dim: usize, n: usize, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut out = Self::zeros(dim, n);
        for p in 0..out.values.len() {
            let x = out.site(p);
            out.values[p] = f(&x[..dim]);
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> usize {
        2 * self.n + 1
    }

    pub fn eps(&self) -> f64 {
        2.0 / self.side() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Coordinates of site `p` (trailing entries zero when `dim = 2`).
    pub fn site(&self, mut p: usize) -> [f64; 3] {
        let side = self.side();
        let mut x = [0.0; 3];
        for a in (0..self.dim).rev() {
            x[a] = grid_coordinate(p % side, side);
            p /= side;
        }
        x
    }

    /// `Σ_x ε^d f(x)^2`.
    pub fn norm_l2_sq(&self) -> f64 {
        self.eps().powi(self.dim as i32) * self.values.iter().map(|v| v * v).sum::<f64>()
    }

    /// `(Σ_x ε^d |f(x)|^p)^{1/p}`.
    pub fn norm_lp(&self, p: f64) -> f64 {
        let w = self.eps().powi(self.dim as i32);
        (w * self.values.iter().map(|v| v.abs().powf(p)).sum::<f64>()).powf(1.0 / p)
    }

    /// `Σ_x ε^d f(x) g(x)`.
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!((self.dim, self.n), (other.dim, other.n), "lattice mismatch");
        self.eps().powi(self.dim as i32) * self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Fourier coefficients on the box `|k|_inf <= N`.
    pub fn to_fourier(&self) -> FourierField {
        FourierField::from_grid(self.dim, self.side(), &self.values, self.n, false)
            .expect("lattice box always fits its own grid")
    }
}

/// Lattice values of a field whose box is exactly `|k|_inf <= N`.
pub fn transform_to_lattice(field: &FourierField, n: usize) -> Result<LatticeField> {
    if field.cutoff() != n {
        return Err(Error::SizeMismatch { expected: format!("cutoff {n}"), found: format!("cutoff {}", field.cutoff()) });
    }
    let defect = field.hermitian_defect();
    if defect > 1e-9 * (1.0 + field.max_abs_coeff()) {
        return Err(Error::NonHermitian { defect });
    }
    let side = 2 * n + 1;
    LatticeField::from_values(field.dim(), n, field.to_grid(side))
}

/// Band-limited interpolant: the unique trigonometric polynomial of degree `<= N`
/// agreeing with the lattice values at every site.
pub fn ext(lattice: &LatticeField) -> FourierField {
    lattice.to_fourier()
}

/// Restriction to lattice sites; any cutoff is accepted (frequencies alias modulo `2N+1`).
pub fn ext_inverse(field: &FourierField, n: usize) -> LatticeField {
    let side = 2 * n + 1;
    let dim = field.dim();
    let folded = if field.cutoff() <= n {
        field.resized(n)
    } else {
        let mut out = FourierField::zeros(dim, n, false);
        let nn = n as i64;
        for (k, c) in field.frequencies().iter().zip(field.coeffs()) {
            let mut q = *k;
            for a in q.iter_mut().take(dim) {
                *a = (*a + nn).rem_euclid(side as i64) - nn;
            }
            let i = out.index(&q).unwrap();
            out.coeffs_mut()[i] += *c;
        }
        out
    };
    LatticeField::from_values(dim, n, folded.to_grid(side)).expect("shape fixed by construction")
}
