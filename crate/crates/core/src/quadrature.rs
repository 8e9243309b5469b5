//! Weighted quadrature over the unit profile and planar disks.
//!
//! The profile measure per hemisphere reduces, in spherical coordinates, to
//! |S^{2n-1}| ρ^{2n} / (2 sqrt(1-ρ²)) dρ. The substitution ρ = sin s absorbs
//! the endpoint singularity: the weight becomes ρ^{2n}/2 against Gauss-Legendre
//! nodes in s, so smooth integrands converge spectrally.

use crate::error::QuadError;
use crate::heisenberg::GroupContext;

/// Hemisphere tag used throughout the crate: the profile is the union of the
/// graphs t = +u0 and t = -u0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hemisphere {
    Upper,
    Lower,
}

impl Hemisphere {
    pub fn sign(&self) -> f64 {
        match self {
            Hemisphere::Upper => 1.0,
            Hemisphere::Lower => -1.0,
        }
    }

    pub fn both() -> [Hemisphere; 2] {
        [Hemisphere::Upper, Hemisphere::Lower]
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * d * d);
        nodes[i] = -x; // ascending from the left end
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Pairwise (cascade) summation: deterministic regardless of how the values
/// were produced, with O(log n) error growth.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        len => {
            let mid = len / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// Node placement scheme for the radial rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialScheme {
    /// ρ = sin s substitution, Gauss-Legendre in s on (0, π/2).
    SineSubstituted,
    /// Plain Gauss-Legendre mapped to (0, 1).
    GaussLegendreMapped,
}

/// Quadrature rule for ∫₀¹ g(ρ) dρ with strictly interior nodes. The rule
/// also carries weights for the singular family ∫₀¹ g(ρ)/sqrt(1-ρ²) dρ; under
/// the sine substitution the cosine Jacobian cancels the singular factor
/// analytically, so no cancellation-prone 1-ρ² is ever formed.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// weights_i / sqrt(1 - nodes_i²), computed stably.
    pub singular_weights: Vec<f64>,
    pub scheme: RadialScheme,
}

impl RadialGrid {
    pub fn new(count: usize, scheme: RadialScheme) -> Self {
        let (xs, ws) = gauss_legendre(count);
        let mut nodes = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        let mut singular = Vec::with_capacity(count);
        match scheme {
            RadialScheme::SineSubstituted => {
                // s in (0, pi/2), rho = sin s, drho = cos s ds
                for (x, w) in xs.iter().zip(&ws) {
                    let s = (x + 1.0) * std::f64::consts::FRAC_PI_4;
                    nodes.push(s.sin());
                    weights.push(w * std::f64::consts::FRAC_PI_4 * s.cos());
                    singular.push(w * std::f64::consts::FRAC_PI_4);
                }
            }
            RadialScheme::GaussLegendreMapped => {
                for (x, w) in xs.iter().zip(&ws) {
                    let rho = 0.5 * (x + 1.0);
                    nodes.push(rho);
                    weights.push(0.5 * w);
                    singular.push(0.5 * w / (1.0 - rho * rho).sqrt());
                }
            }
        }
        Self {
            nodes,
            weights,
            singular_weights: singular,
            scheme,
        }
    }

    /// ∫₀¹ g(ρ) dρ.
    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F) -> Result<f64, QuadError> {
        self.accumulate(&self.weights, g)
    }

    /// ∫₀¹ g(ρ)/sqrt(1-ρ²) dρ with the stable singular weights.
    pub fn integrate_singular<F: Fn(f64) -> f64>(&self, g: F) -> Result<f64, QuadError> {
        self.accumulate(&self.singular_weights, g)
    }

    fn accumulate<F: Fn(f64) -> f64>(&self, weights: &[f64], g: F) -> Result<f64, QuadError> {
        let mut terms = Vec::with_capacity(self.nodes.len());
        for (&rho, &w) in self.nodes.iter().zip(weights) {
            let v = g(rho);
            if !v.is_finite() {
                return Err(QuadError::NonFinite {
                    node: rho,
                    value: v,
                });
            }
            terms.push(w * v);
        }
        Ok(pairwise_sum(&terms))
    }
}

/// Tensor quadrature over the unit disk (full angular grid for n = 1, radial
/// reduction with the analytic sphere factor for n > 1).
#[derive(Debug, Clone)]
pub struct DiskGrid {
    pub radial: RadialGrid,
    pub angular: usize,
}

impl DiskGrid {
    pub fn new(radial_count: usize, angular_count: usize) -> Self {
        Self {
            radial: RadialGrid::new(radial_count, RadialScheme::SineSubstituted),
            angular: angular_count,
        }
    }
}

/// Default radial node count used by the integral front-ends.
pub const DEFAULT_RADIAL_NODES: usize = 400;
/// Default angular node count for n = 1 disk integrals.
pub const DEFAULT_ANGULAR_NODES: usize = 256;

/// Surface area of the unit sphere S^{2n-1} in R^{2n}: 2 π^n / (n-1)!.
pub fn sphere_area(n: usize) -> f64 {
    assert!(n >= 1);
    let mut fact = 1.0;
    for k in 1..n {
        fact *= k as f64;
    }
    2.0 * std::f64::consts::PI.powi(n as i32) / fact
}

/// ∫ over the closed unit profile of f(ρ, hemisphere) against the H-perimeter
/// measure: Σ_± |S^{2n-1}| ∫₀¹ f(ρ, ±) ρ^{2n} / (2 sqrt(1-ρ²)) dρ.
pub fn integrate_radial_profile<F>(
    f: F,
    ctx: &GroupContext,
    grid: &RadialGrid,
) -> Result<f64, QuadError>
where
    F: Fn(f64, Hemisphere) -> f64,
{
    let n = ctx.n() as i32;
    let area = sphere_area(ctx.n());
    let mut total = 0.0;
    for hemi in Hemisphere::both() {
        let part = grid.integrate_singular(|rho| f(rho, hemi) * rho.powi(2 * n) / 2.0)?;
        total += area * part;
    }
    Ok(total)
}

/// ∫_{B_R} f dz for a planar function on the disk of radius R in R^{2n}.
/// For n = 1 the function receives Cartesian coordinates (x, y); for n > 1 it
/// must be radial and receives (ρ, 0, ..., unused): see `integrate_disk_radial`.
pub fn integrate_disk<F>(f: F, radius: f64, grid: &DiskGrid) -> Result<f64, QuadError>
where
    F: Fn(f64, f64) -> f64,
{
    let m = grid.angular;
    let dtheta = 2.0 * std::f64::consts::PI / m as f64;
    let mut ring = Vec::with_capacity(grid.radial.nodes.len());
    for (&rho_unit, &w) in grid.radial.nodes.iter().zip(&grid.radial.weights) {
        let rho = radius * rho_unit;
        let mut angular_terms = Vec::with_capacity(m);
        for j in 0..m {
            let theta = dtheta * j as f64;
            let v = f(rho * theta.cos(), rho * theta.sin());
            if !v.is_finite() {
                return Err(QuadError::NonFinite {
                    node: rho,
                    value: v,
                });
            }
            angular_terms.push(v);
        }
        ring.push(w * radius * rho * dtheta * pairwise_sum(&angular_terms));
    }
    Ok(pairwise_sum(&ring))
}

/// ∫_{B_R} f(|z|) dz in R^{2n}: |S^{2n-1}| ∫₀^R f(ρ) ρ^{2n-1} dρ.
pub fn integrate_disk_radial<F>(
    f: F,
    radius: f64,
    ctx: &GroupContext,
    grid: &RadialGrid,
) -> Result<f64, QuadError>
where
    F: Fn(f64) -> f64,
{
    let n = ctx.n() as i32;
    let area = sphere_area(ctx.n());
    let val = grid.integrate(|rho_unit| {
        let rho = radius * rho_unit;
        f(rho) * rho.powi(2 * n - 1) * radius
    })?;
    Ok(area * val)
}
