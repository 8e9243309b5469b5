//! The Heisenberg group H^n in exponential coordinates of the first kind.
//!
//! Points are written (z, t) with z = (x_1, y_1, ..., x_n, y_n) interleaved;
//! this ordering matches the 2x2 block layout of the structural skew matrix
//! and is used everywhere in the crate. The left-invariant horizontal frame is
//! X_i = d/dx_i - (y_i/2) d/dt, Y_i = d/dy_i + (x_i/2) d/dt, with [X_i, Y_i] = T.

use crate::error::GeomError;

/// The ambient group H^n: carries the Heisenberg index `n` and the
/// homogeneous dimension Q = 2n + 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupContext {
    n: usize,
}

impl GroupContext {
    pub fn new(n: usize) -> Result<Self, GeomError> {
        if n == 0 {
            return Err(GeomError::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Homogeneous dimension Q = 2n + 2.
    pub fn q(&self) -> usize {
        2 * self.n + 2
    }

    /// Horizontal rank 2n.
    pub fn horizontal_dim(&self) -> usize {
        2 * self.n
    }

    fn check_dim(&self, len: usize) -> Result<(), GeomError> {
        if len != 2 * self.n {
            Err(GeomError::DimensionMismatch {
                expected: 2 * self.n,
                got: len,
            })
        } else {
            Ok(())
        }
    }

    /// Group law p ⋆ q: (z, t) ⋆ (z', t') = (z + z', t + t' + (1/2) Σ (x_i y'_i - x'_i y_i)).
    pub fn group_mul(&self, p: &Point, q: &Point) -> Result<Point, GeomError> {
        self.check_dim(p.z.len())?;
        self.check_dim(q.z.len())?;
        let mut z = Vec::with_capacity(2 * self.n);
        let mut twist = 0.0;
        for i in 0..self.n {
            let (x, y) = (p.z[2 * i], p.z[2 * i + 1]);
            let (xq, yq) = (q.z[2 * i], q.z[2 * i + 1]);
            z.push(x + xq);
            z.push(y + yq);
            twist += x * yq - xq * y;
        }
        Ok(Point::new(z, p.t + q.t + 0.5 * twist))
    }

    /// Group inverse: (z, t) -> (-z, -t).
    pub fn group_inv(&self, p: &Point) -> Result<Point, GeomError> {
        self.check_dim(p.z.len())?;
        Ok(Point::new(p.z.iter().map(|c| -c).collect(), -p.t))
    }

    /// Heisenberg dilation δ_s(z, t) = (s z, s² t), s ≥ 0.
    pub fn dilate(&self, s: f64, p: &Point) -> Result<Point, GeomError> {
        self.check_dim(p.z.len())?;
        if s < 0.0 {
            return Err(GeomError::RhoOutOfRange {
                rho: s,
                range: "[0, inf)",
            });
        }
        Ok(Point::new(
            p.z.iter().map(|c| s * c).collect(),
            s * s * p.t,
        ))
    }

    /// Identity element.
    pub fn identity(&self) -> Point {
        Point::new(vec![0.0; 2 * self.n], 0.0)
    }

    /// Contact form θ = dt + (1/2) Σ (y_i dx_i - x_i dy_i) evaluated at p on an
    /// ambient velocity (dz, dt) of length 2n + 1.
    pub fn contact_eval(&self, p: &Point, velocity: &[f64]) -> Result<f64, GeomError> {
        self.check_dim(p.z.len())?;
        if velocity.len() != 2 * self.n + 1 {
            return Err(GeomError::DimensionMismatch {
                expected: 2 * self.n + 1,
                got: velocity.len(),
            });
        }
        let mut val = velocity[2 * self.n];
        for i in 0..self.n {
            let (x, y) = (p.z[2 * i], p.z[2 * i + 1]);
            val += 0.5 * (y * velocity[2 * i] - x * velocity[2 * i + 1]);
        }
        Ok(val)
    }

    /// Ambient coordinate components of the frame field with index k at p:
    /// k = 2i gives X_{i+1}, k = 2i+1 gives Y_{i+1}, k = 2n gives T.
    pub fn frame_vector(&self, p: &Point, k: usize) -> Result<Vec<f64>, GeomError> {
        self.check_dim(p.z.len())?;
        let dim = 2 * self.n + 1;
        if k >= dim {
            return Err(GeomError::DimensionMismatch {
                expected: dim,
                got: k,
            });
        }
        let mut v = vec![0.0; dim];
        if k == 2 * self.n {
            v[2 * self.n] = 1.0;
        } else {
            v[k] = 1.0;
            let i = k / 2;
            if k % 2 == 0 {
                // X_{i+1} = d/dx_i - (y_i/2) d/dt
                v[2 * self.n] = -0.5 * p.z[2 * i + 1];
            } else {
                // Y_{i+1} = d/dy_i + (x_i/2) d/dt
                v[2 * self.n] = 0.5 * p.z[2 * i];
            }
        }
        Ok(v)
    }

    /// Embed a horizontal vector at p as an ambient velocity (coefficients on
    /// the frame turned into coordinate components).
    pub fn horizontal_to_ambient(&self, p: &Point, v: &HVector) -> Result<Vec<f64>, GeomError> {
        self.check_dim(p.z.len())?;
        self.check_dim(v.components.len())?;
        let mut out = Vec::with_capacity(2 * self.n + 1);
        out.extend_from_slice(&v.components);
        let mut t_comp = 0.0;
        for i in 0..self.n {
            t_comp += 0.5 * (p.z[2 * i] * v.components[2 * i + 1] - p.z[2 * i + 1] * v.components[2 * i]);
        }
        out.push(t_comp);
        Ok(out)
    }
}

/// A point of H^n in exponential coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub z: Vec<f64>,
    pub t: f64,
}

impl Point {
    pub fn new(z: Vec<f64>, t: f64) -> Self {
        Self { z, t }
    }

    /// Euclidean norm of the horizontal coordinates.
    pub fn rho(&self) -> f64 {
        self.z.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// A horizontal vector: coefficients on the frame X_1, Y_1, ..., X_n, Y_n.
#[derive(Debug, Clone, PartialEq)]
pub struct HVector {
    pub components: Vec<f64>,
}

impl HVector {
    pub fn new(components: Vec<f64>) -> Self {
        Self { components }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            components: vec![0.0; 2 * n],
        }
    }

    /// Summed per (x_i, y_i) block so that the perp map is an exact isometry.
    pub fn norm(&self) -> f64 {
        self.components
            .chunks_exact(2)
            .map(|p| p[0] * p[0] + p[1] * p[1])
            .sum::<f64>()
            .sqrt()
    }

    pub fn dot(&self, other: &HVector) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// v^perp = -C v: pairwise (a, b) -> (-b, a).
    pub fn perp(&self) -> HVector {
        HVector::new(apply_neg_c(&self.components))
    }

    pub fn scale(&self, s: f64) -> HVector {
        HVector::new(self.components.iter().map(|c| s * c).collect())
    }

    pub fn add(&self, other: &HVector) -> HVector {
        HVector::new(
            self.components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

/// Apply the structural skew matrix C: pairwise (a, b) -> (b, -a).
pub fn apply_c(v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len());
    for pair in v.chunks_exact(2) {
        out.push(pair[1]);
        out.push(-pair[0]);
    }
    out
}

/// Apply -C, i.e. the perp map z -> z^perp = (-y_1, x_1, ..., -y_n, x_n).
pub fn apply_neg_c(v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len());
    for pair in v.chunks_exact(2) {
        out.push(-pair[1]);
        out.push(pair[0]);
    }
    out
}

/// j_perp on horizontal vectors: v -> v^perp = -C v.
pub fn j_perp(v: &HVector) -> HVector {
    v.perp()
}
