//! The operator L_HS on the profile, the singular radial eigenproblem, its
//! Frobenius series solutions, and finite-element spectra.
//!
//! Radially the operator reads L φ = (1-ρ²) φ'' + ((2n-(2n+1)ρ²)/ρ) φ', which
//! factors as (p φ')'/w with p = ρ^{2n} sqrt(1-ρ²) and w = ρ^{2n}/sqrt(1-ρ²).
//! The eigenproblem L φ + (μ/ρ²) φ = 0 becomes the definite pencil
//! K v = μ M v with stiffness density p and mass density ρ^{2n-2}/sqrt(1-ρ²).
//!
//! A radial eigenfunction on the closed profile is a hemisphere pair glued at
//! the equator: even pairs see a natural (zero-flux) condition at ρ = 1 and
//! odd pairs a Dirichlet condition. Both sectors are assembled from one mesh;
//! the odd sector carries the first eigenvalue 2n-2 with eigenfunction κ.

use crate::error::SpectralError;
use crate::quadrature::{gauss_legendre, pairwise_sum, Hemisphere};

/// A radial function with two derivatives.
pub trait RadialC2 {
    fn value(&self, rho: f64) -> f64;
    fn d1(&self, rho: f64) -> f64;
    fn d2(&self, rho: f64) -> f64;
}

pub type RadialClosureFn = Box<dyn Fn(f64) -> f64 + Sync + Send>;

/// Closure-backed RadialC2.
pub struct RadialClosure {
    pub f: RadialClosureFn,
    pub df: RadialClosureFn,
    pub ddf: RadialClosureFn,
}

impl RadialC2 for RadialClosure {
    fn value(&self, rho: f64) -> f64 {
        (self.f)(rho)
    }
    fn d1(&self, rho: f64) -> f64 {
        (self.df)(rho)
    }
    fn d2(&self, rho: f64) -> f64 {
        (self.ddf)(rho)
    }
}

/// κ on the given hemisphere as a RadialC2.
pub fn kappa_c2(hemisphere: Hemisphere) -> RadialClosure {
    let s = hemisphere.sign();
    RadialClosure {
        f: Box::new(move |r| s * (1.0 - r * r).sqrt() / r),
        df: Box::new(move |r| -s / (r * r * (1.0 - r * r).sqrt())),
        ddf: Box::new(move |r| s * (2.0 - 3.0 * r * r) / (r.powi(3) * (1.0 - r * r).powf(1.5))),
    }
}

fn check_interior(rho: f64) -> Result<(), SpectralError> {
    if rho <= 0.0 || rho >= 1.0 {
        return Err(SpectralError::EndpointEvaluation { rho });
    }
    Ok(())
}

/// Radial part of L_HS: (1-ρ²) φ'' + ((2n-(2n+1)ρ²)/ρ) φ'.
pub fn apply_lss_radial(n: usize, phi: &dyn RadialC2, rho: f64) -> Result<f64, SpectralError> {
    check_interior(rho)?;
    let nf = n as f64;
    Ok((1.0 - rho * rho) * phi.d2(rho)
        + (2.0 * nf - (2.0 * nf + 1.0) * rho * rho) / rho * phi.d1(rho))
}

/// Residual of the radial eigen-ODE: L φ + (μ/ρ²) φ.
pub fn ode_residual(
    n: usize,
    phi: &dyn RadialC2,
    mu: f64,
    rho: f64,
) -> Result<f64, SpectralError> {
    Ok(apply_lss_radial(n, phi, rho)? + mu / (rho * rho) * phi.value(rho))
}

/// Candidate Frobenius eigenvalues μ_m = m(2n-(m+1)) for m = 1..2n-1; the
/// membership condition of the weighted L² class keeps only m ≤ n-1.
pub fn candidate_mu(n: usize) -> Vec<(usize, f64, bool)> {
    (1..=(2 * n - 1))
        .map(|m| {
            let mu = (m as f64) * (2.0 * n as f64 - (m as f64 + 1.0));
            (m, mu, m < n)
        })
        .collect()
}

/// Laurent-type series solution ρ^{-m} Σ a_l ρ^l of the radial eigen-ODE.
#[derive(Debug, Clone)]
pub struct FrobeniusSolution {
    pub m: i64,
    pub mu: f64,
    pub a: Vec<f64>,
}

impl FrobeniusSolution {
    pub fn eval(&self, rho: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.a.iter().rev() {
            acc = acc * rho + c;
        }
        acc * rho.powi(-self.m as i32)
    }
}

/// Run the recurrence a_{l+2} = a_l (l-m)(l+2n-m) / ((l+2-m)(l+2n+1-m)+μ)
/// from the seeds (a_0, a_1) up to length terms.
pub fn frobenius_series(
    n: usize,
    m: i64,
    mu: f64,
    a0: f64,
    a1: f64,
    terms: usize,
) -> Result<FrobeniusSolution, SpectralError> {
    let two_n = 2 * n as i64;
    let mut a = vec![0.0; terms];
    if terms > 0 {
        a[0] = a0;
    }
    if terms > 1 {
        a[1] = a1;
    }
    for l in 0..terms.saturating_sub(2) {
        let li = l as i64;
        let denom = ((li + 2 - m) * (li + two_n + 1 - m)) as f64 + mu;
        if denom == 0.0 {
            return Err(SpectralError::IndicialResonance { l, m, mu });
        }
        let numer = ((li - m) * (li + two_n - m)) as f64;
        a[l + 2] = a[l] * numer / denom;
    }
    Ok(FrobeniusSolution { m, mu, a })
}

/// Full operator on the profile for n = 1, per hemisphere, in spherical
/// coordinates (ρ, θ):
///
///   L φ = (1-ρ²) φ_ρρ + ((2-3ρ²)/ρ) φ_ρ ∓ 2 sqrt(1-ρ²) φ_ρθ + φ_θθ
///         ∓ (2 sqrt(1-ρ²)/ρ) φ_θ
///
/// with the upper sign on the upper hemisphere. The ζ-derivative is the unit
/// directional derivative along z^⊥/ρ, i.e. (1/ρ)∂_θ; the first-order angular
/// coefficient is Q-2 = 2, the value validated against the graph-coordinate
/// oracle (and forced by symmetry of L in the Green formulas).
pub struct PolarField {
    pub rho_nodes: Vec<f64>,
    pub theta_nodes: Vec<f64>,
    /// values[i * theta_nodes.len() + j] = φ(ρ_i, θ_j)
    pub values: Vec<f64>,
}

impl PolarField {
    pub fn sample<F: Fn(f64, f64) -> f64>(
        rho_lo: f64,
        rho_hi: f64,
        rho_count: usize,
        theta_count: usize,
        f: F,
    ) -> Self {
        let rho_nodes: Vec<f64> = (0..rho_count)
            .map(|i| rho_lo + (rho_hi - rho_lo) * i as f64 / (rho_count - 1) as f64)
            .collect();
        let theta_nodes: Vec<f64> = (0..theta_count)
            .map(|j| std::f64::consts::TAU * j as f64 / theta_count as f64)
            .collect();
        let mut values = Vec::with_capacity(rho_count * theta_count);
        for &r in &rho_nodes {
            for &t in &theta_nodes {
                values.push(f(r, t));
            }
        }
        Self {
            rho_nodes,
            theta_nodes,
            values,
        }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        let m = self.theta_nodes.len();
        self.values[i * m + (j % m)]
    }

    fn drho(&self) -> f64 {
        self.rho_nodes[1] - self.rho_nodes[0]
    }

    fn dtheta(&self) -> f64 {
        std::f64::consts::TAU / self.theta_nodes.len() as f64
    }

    /// Fourth-order centered first derivative in ρ at node (i, j).
    fn d_rho(&self, i: usize, j: usize) -> f64 {
        let h = self.drho();
        (-self.at(i + 2, j) + 8.0 * self.at(i + 1, j) - 8.0 * self.at(i - 1, j)
            + self.at(i - 2, j))
            / (12.0 * h)
    }

    fn d_rho2(&self, i: usize, j: usize) -> f64 {
        let h = self.drho();
        (-self.at(i + 2, j) + 16.0 * self.at(i + 1, j) - 30.0 * self.at(i, j)
            + 16.0 * self.at(i - 1, j)
            - self.at(i - 2, j))
            / (12.0 * h * h)
    }

    fn d_theta(&self, i: usize, j: usize) -> f64 {
        let m = self.theta_nodes.len();
        let h = self.dtheta();
        let jp = |k: isize| ((j as isize + k).rem_euclid(m as isize)) as usize;
        (-self.at(i, jp(2)) + 8.0 * self.at(i, jp(1)) - 8.0 * self.at(i, jp(-1))
            + self.at(i, jp(-2)))
            / (12.0 * h)
    }

    fn d_theta2(&self, i: usize, j: usize) -> f64 {
        let m = self.theta_nodes.len();
        let h = self.dtheta();
        let jp = |k: isize| ((j as isize + k).rem_euclid(m as isize)) as usize;
        (-self.at(i, jp(2)) + 16.0 * self.at(i, jp(1)) - 30.0 * self.at(i, j)
            + 16.0 * self.at(i, jp(-1))
            - self.at(i, jp(-2)))
            / (12.0 * h * h)
    }

    fn d_rho_theta(&self, i: usize, j: usize) -> f64 {
        let m = self.theta_nodes.len();
        let h = self.drho();
        let jp = |k: isize| ((j as isize + k).rem_euclid(m as isize)) as usize;
        // 4th-order theta derivative of the 4th-order rho derivative
        let dr = |ii: usize, jj: usize| {
            (-self.at(ii + 2, jj) + 8.0 * self.at(ii + 1, jj) - 8.0 * self.at(ii - 1, jj)
                + self.at(ii - 2, jj))
                / (12.0 * h)
        };
        let ht = self.dtheta();
        (-dr(i, jp(2)) + 8.0 * dr(i, jp(1)) - 8.0 * dr(i, jp(-1)) + dr(i, jp(-2))) / (12.0 * ht)
    }
}

/// Apply the full n = 1 operator at an interior grid node.
pub fn apply_lss_full_n1(
    n: usize,
    field: &PolarField,
    hemisphere: Hemisphere,
    i: usize,
    j: usize,
) -> Result<f64, SpectralError> {
    if n != 1 {
        return Err(SpectralError::UnsupportedDimension { n });
    }
    if i < 2 || i + 2 > field.rho_nodes.len() - 1 {
        return Err(SpectralError::EndpointEvaluation {
            rho: field.rho_nodes[i],
        });
    }
    let rho = field.rho_nodes[i];
    check_interior(rho)?;
    let s = hemisphere.sign();
    let g = (1.0 - rho * rho).sqrt();
    let f_rr = field.d_rho2(i, j);
    let f_r = field.d_rho(i, j);
    let f_tt = field.d_theta2(i, j);
    let f_t = field.d_theta(i, j);
    let f_rt = field.d_rho_theta(i, j);

    let radial = (1.0 - rho * rho) * f_rr + (2.0 - 3.0 * rho * rho) / rho * f_r;
    // mixed: -2 ρ g φ''_{ζρ} with φ''_{ζρ} = (1/ρ) ∂_θ ∂_ρ φ
    let mixed = -s * 2.0 * rho * g * (f_rt / rho);
    // angular: (1/ρ²) Δ_{S¹} φ - (1-ρ²) φ''_{ζζ} - (Q-2) g φ'_ζ
    let angular =
        f_tt / (rho * rho) - (1.0 - rho * rho) * (f_tt / (rho * rho)) - s * 2.0 * g * (f_t / rho);
    Ok(radial + mixed + angular)
}

/// Spherical mean: for n = 1, the θ-integral over the fiber at radius ρ; a
/// radial field integrates to |S^{2n-1}| times its value.
pub fn spherical_mean_n1(field: &PolarField, i: usize) -> f64 {
    let m = field.theta_nodes.len();
    let terms: Vec<f64> = (0..m).map(|j| field.at(i, j)).collect();
    pairwise_sum(&terms) * field.dtheta()
}

/// Symmetric tridiagonal matrix stored as diagonal and subdiagonal.
#[derive(Debug, Clone)]
pub struct TriDiag {
    pub diag: Vec<f64>,
    pub sub: Vec<f64>,
}

impl TriDiag {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// y = A x.
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[i] = self.diag[i] * x[i];
            if i > 0 {
                y[i] += self.sub[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                y[i] += self.sub[i] * x[i + 1];
            }
        }
        y
    }

    fn drop_last(&self) -> TriDiag {
        TriDiag {
            diag: self.diag[..self.len() - 1].to_vec(),
            sub: self.sub[..self.len().saturating_sub(2)].to_vec(),
        }
    }
}

/// Count of eigenvalues of the pencil (K, M) strictly below lambda, by the
/// inertia of K - lambda M (LDLᵀ pivot signs with safeguarded small pivots).
fn inertia_below(k: &TriDiag, m: &TriDiag, lambda: f64) -> usize {
    let n = k.len();
    let max_e_sq = (0..n.saturating_sub(1))
        .map(|i| (k.sub[i] - lambda * m.sub[i]).powi(2))
        .fold(0.0f64, f64::max);
    let pivmin = 1e-292 * max_e_sq.max(1.0);
    let mut count = 0;
    let mut d = k.diag[0] - lambda * m.diag[0];
    if d.abs() < pivmin {
        d = -pivmin;
    }
    if d < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let e = k.sub[i - 1] - lambda * m.sub[i - 1];
        d = (k.diag[i] - lambda * m.diag[i]) - e * e / d;
        if d.abs() < pivmin {
            d = -pivmin;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Solve (K - shift M) x = b with the Thomas algorithm (no pivoting; the
/// shifted matrix is safeguarded against exact zero pivots).
fn shifted_solve(k: &TriDiag, m: &TriDiag, shift: f64, b: &[f64]) -> Vec<f64> {
    let n = k.len();
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    let diag = |i: usize| k.diag[i] - shift * m.diag[i];
    let off = |i: usize| k.sub[i] - shift * m.sub[i];
    let scale: f64 = (0..n).map(|i| diag(i).abs()).fold(0.0, f64::max);
    let tiny = 1e-300 * (1.0 + scale) + f64::MIN_POSITIVE;
    let safeguard = |v: f64| {
        if v.abs() < tiny {
            tiny.copysign(if v == 0.0 { 1.0 } else { v })
        } else {
            v
        }
    };
    let mut denom = safeguard(diag(0));
    c_prime[0] = off(0) / denom;
    d_prime[0] = b[0] / denom;
    for i in 1..n {
        denom = safeguard(diag(i) - off(i - 1) * c_prime[i - 1]);
        if i + 1 < n {
            c_prime[i] = off(i) / denom;
        }
        d_prime[i] = (b[i] - off(i - 1) * d_prime[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d_prime[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d_prime[i] - c_prime[i] * x[i + 1];
    }
    x
}

fn m_inner(m: &TriDiag, x: &[f64], y: &[f64]) -> f64 {
    let mx = m.mul(x);
    mx.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Lowest k eigenpairs of K v = μ M v by bisection on the inertia count plus
/// shifted inverse iteration.
pub fn lowest_eigenpairs(
    k_mat: &TriDiag,
    m_mat: &TriDiag,
    count: usize,
) -> Result<Vec<(f64, Vec<f64>)>, SpectralError> {
    let n = k_mat.len();
    if n == 0 || count == 0 {
        return Ok(Vec::new());
    }
    // upper bound by doubling
    let mut hi = 1.0;
    for _ in 0..200 {
        if inertia_below(k_mat, m_mat, hi) >= count {
            break;
        }
        hi *= 2.0;
        if hi > 1e18 {
            return Err(SpectralError::SolverBreakdown {
                reason: "no upper bound for the requested eigenvalue count".into(),
            });
        }
    }
    let lo0 = -1e-6 * hi.max(1.0);
    let mut out: Vec<(f64, Vec<f64>)> = Vec::with_capacity(count);
    for idx in 0..count {
        let (mut lo, mut hi_i) = (lo0, hi);
        // bisection: find lambda with count(lambda) > idx from above
        for _ in 0..220 {
            let mid = 0.5 * (lo + hi_i);
            if inertia_below(k_mat, m_mat, mid) > idx {
                hi_i = mid;
            } else {
                lo = mid;
            }
            if (hi_i - lo) <= 1e-13 * (1.0 + hi_i.abs()) {
                break;
            }
        }
        let mu = 0.5 * (lo + hi_i);
        // inverse iteration at a slightly detuned shift
        let shift = mu - 1e-8 * (1.0 + mu.abs());
        let mut v: Vec<f64> = (0..n)
            .map(|i| ((i * 2654435761usize) as f64 / usize::MAX as f64) - 0.5)
            .collect();
        // deflate previously found directions (M-orthogonalize)
        for _ in 0..8 {
            let mv = m_mat.mul(&v);
            let mut rhs = mv;
            for (_, prev) in &out {
                let coef = m_inner(m_mat, prev, &v) / m_inner(m_mat, prev, prev);
                for (r, p) in v.iter_mut().zip(prev.iter()) {
                    *r -= coef * p;
                }
                rhs = m_mat.mul(&v);
            }
            let next = shifted_solve(k_mat, m_mat, shift, &rhs);
            let norm = m_inner(m_mat, &next, &next).sqrt();
            if !norm.is_finite() || norm == 0.0 {
                return Err(SpectralError::SolverBreakdown {
                    reason: "inverse iteration produced a non-finite vector".into(),
                });
            }
            v = next.into_iter().map(|c| c / norm).collect();
        }
        // Rayleigh quotient refinement of the eigenvalue
        let kv = k_mat.mul(&v);
        let num: f64 = kv.iter().zip(&v).map(|(a, b)| a * b).sum();
        let den = m_inner(m_mat, &v, &v);
        let mu_refined = num / den;
        out.push((mu_refined, v));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(out)
}

/// Finite-element discretization of the radial pencil on [ρ_min, ρ_max].
#[derive(Debug, Clone)]
pub struct SturmLiouvilleDiscretization {
    pub n: usize,
    pub rho_min: f64,
    pub rho_max: f64,
    pub mesh: Vec<f64>,
    pub stiffness: TriDiag,
    pub mass: TriDiag,
}

/// Stiffness density p(ρ) = ρ^{2n} sqrt(1-ρ²).
pub fn sl_p(n: usize, rho: f64) -> f64 {
    rho.powi(2 * n as i32) * (1.0 - rho * rho).sqrt()
}

/// dp/dρ = ρ^{2n-1} (2n - (2n+1)ρ²) / sqrt(1-ρ²).
pub fn sl_p_prime(n: usize, rho: f64) -> f64 {
    let nf = n as f64;
    rho.powi(2 * n as i32 - 1) * (2.0 * nf - (2.0 * nf + 1.0) * rho * rho)
        / (1.0 - rho * rho).sqrt()
}

/// Measure density w(ρ) = ρ^{2n}/sqrt(1-ρ²) and mass density w/ρ².
pub fn sl_w(n: usize, rho: f64) -> f64 {
    rho.powi(2 * n as i32) / (1.0 - rho * rho).sqrt()
}

pub fn sl_mass_density(n: usize, rho: f64) -> f64 {
    rho.powi(2 * n as i32 - 2) / (1.0 - rho * rho).sqrt()
}

/// Residual of the Sturm-Liouville factorization (p φ')'/w against the radial
/// operator coefficients, at one point, for a cubic test function. Checks the
/// hand-derived p' against the displayed ODE form.
pub fn sturm_liouville_residual(n: usize, rho: f64) -> f64 {
    // phi = rho^3 - 2 rho: phi' = 3 rho^2 - 2, phi'' = 6 rho
    let phi1 = 3.0 * rho * rho - 2.0;
    let phi2 = 6.0 * rho;
    let lhs = (sl_p_prime(n, rho) * phi1 + sl_p(n, rho) * phi2) / sl_w(n, rho);
    let nf = n as f64;
    let rhs = (1.0 - rho * rho) * phi2 + (2.0 * nf - (2.0 * nf + 1.0) * rho * rho) / rho * phi1;
    lhs - rhs
}

impl SturmLiouvilleDiscretization {
    /// Build the mesh (quadratically graded toward both ends) and assemble the
    /// P1 stiffness and mass matrices with 4-point Gauss quadrature.
    pub fn new(n: usize, rho_min: f64, rho_max: f64, elements: usize) -> Self {
        assert!(n >= 1 && rho_min > 0.0 && rho_max < 1.0 && rho_min < rho_max);
        assert!(elements >= 4);
        let mesh: Vec<f64> = (0..=elements)
            .map(|j| {
                let s = j as f64 / elements as f64;
                let t = s * s * (3.0 - 2.0 * s);
                rho_min + (rho_max - rho_min) * t
            })
            .collect();
        let (gx, gw) = gauss_legendre(4);
        let nn = mesh.len();
        let mut kd = vec![0.0; nn];
        let mut ks = vec![0.0; nn - 1];
        let mut md = vec![0.0; nn];
        let mut ms = vec![0.0; nn - 1];
        for e in 0..elements {
            let (x0, x1) = (mesh[e], mesh[e + 1]);
            let h = x1 - x0;
            let mut k_loc = 0.0;
            let (mut m00, mut m01, mut m11) = (0.0, 0.0, 0.0);
            for (xq, wq) in gx.iter().zip(&gw) {
                let x = 0.5 * (x0 + x1) + 0.5 * h * xq;
                let w = 0.5 * h * wq;
                let p = sl_p(n, x);
                let md_ = sl_mass_density(n, x);
                k_loc += w * p / (h * h);
                let b0 = (x1 - x) / h;
                let b1 = (x - x0) / h;
                m00 += w * md_ * b0 * b0;
                m01 += w * md_ * b0 * b1;
                m11 += w * md_ * b1 * b1;
            }
            kd[e] += k_loc;
            kd[e + 1] += k_loc;
            ks[e] -= k_loc;
            md[e] += m00;
            md[e + 1] += m11;
            ms[e] += m01;
        }
        Self {
            n,
            rho_min,
            rho_max,
            mesh,
            stiffness: TriDiag { diag: kd, sub: ks },
            mass: TriDiag { diag: md, sub: ms },
        }
    }
}

/// Parity of a radial hemisphere pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// φ⁺ = φ⁻: natural (zero-flux) condition at the equator.
    Even,
    /// φ⁺ = -φ⁻: Dirichlet condition at the equator.
    Odd,
}

/// One discrete eigenpair with its diagnostics.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub mu: f64,
    pub parity: Parity,
    /// Samples on the mesh nodes (upper-hemisphere restriction).
    pub values: Vec<f64>,
    /// (∫ φ σ, ∫ (φ/ρ²) σ) over the closed profile.
    pub constraint_integrals: (f64, f64),
    /// Relative residual |K v - μ M v| / |M v|.
    pub residual: f64,
}

/// Discrete spectrum of the radial eigenproblem.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub n: usize,
    pub pairs: Vec<EigenPair>,
    /// Number of near-kernel modes dropped (the even constant).
    pub dropped_kernel: usize,
}

impl EigenResult {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.mu).collect()
    }

    /// Lowest eigenvalue whose constraint integrals are below the given
    /// relative threshold (the admissible test class requires zero σ-mean).
    pub fn lowest_constrained(&self, rel_tol: f64) -> Option<&EigenPair> {
        self.pairs.iter().find(|p| {
            let scale = p
                .values
                .iter()
                .map(|v| v.abs())
                .fold(0.0, f64::max)
                .max(1e-300);
            p.constraint_integrals.0.abs() <= rel_tol * scale
        })
    }
}

/// Solve both parity sectors of the radial problem and merge the lowest k
/// eigenpairs in ascending order. The trivial even kernel mode (the constant,
/// μ = 0) is dropped and counted.
pub fn solve_radial_spectrum(
    disc: &SturmLiouvilleDiscretization,
    k: usize,
) -> Result<EigenResult, SpectralError> {
    assert!(k >= 1);
    let n = disc.n;
    let area = crate::quadrature::sphere_area(n);
    let kernel_tol = 1e-6;

    let mut all: Vec<EigenPair> = Vec::new();
    let mut dropped = 0usize;

    for parity in [Parity::Even, Parity::Odd] {
        let (k_mat, m_mat) = match parity {
            Parity::Even => (disc.stiffness.clone(), disc.mass.clone()),
            Parity::Odd => (disc.stiffness.drop_last(), disc.mass.drop_last()),
        };
        let pairs = lowest_eigenpairs(&k_mat, &m_mat, k + 1)?;
        for (mu, mut v) in pairs {
            if mu < kernel_tol {
                dropped += 1;
                continue;
            }
            // residual before padding
            let kv = k_mat.mul(&v);
            let mv = m_mat.mul(&v);
            let res_num: f64 = kv
                .iter()
                .zip(&mv)
                .map(|(a, b)| (a - mu * b) * (a - mu * b))
                .sum::<f64>()
                .sqrt();
            let res_den: f64 = mv.iter().map(|c| c * c).sum::<f64>().sqrt();
            if matches!(parity, Parity::Odd) {
                v.push(0.0); // Dirichlet node at the equator
            }
            // normalize sign and sup
            let sup = v.iter().map(|c| c.abs()).fold(0.0, f64::max).max(1e-300);
            let sign = v
                .iter()
                .find(|c| c.abs() > 0.1 * sup)
                .map(|c| c.signum())
                .unwrap_or(1.0);
            let v: Vec<f64> = v.iter().map(|c| c * sign / sup).collect();
            // constraint integrals over the closed profile
            let (m0, m2) = match parity {
                Parity::Odd => (0.0, 0.0),
                Parity::Even => {
                    let m0 = 2.0 * area * mesh_integral(disc, &v, |r| sl_w(n, r) / 2.0);
                    let m2 = 2.0 * area * mesh_integral(disc, &v, |r| sl_mass_density(n, r) / 2.0);
                    (m0, m2)
                }
            };
            all.push(EigenPair {
                mu,
                parity,
                values: v,
                constraint_integrals: (m0, m2),
                residual: res_num / res_den,
            });
        }
    }
    all.sort_by(|a, b| a.mu.partial_cmp(&b.mu).unwrap());
    all.truncate(k);
    Ok(EigenResult {
        n,
        pairs: all,
        dropped_kernel: dropped,
    })
}

/// ∫ over [ρmin, ρmax] of the P1 interpolant of the nodal values against a
/// density, by per-element 4-point Gauss quadrature.
fn mesh_integral<F: Fn(f64) -> f64>(
    disc: &SturmLiouvilleDiscretization,
    nodal: &[f64],
    density: F,
) -> f64 {
    let (gx, gw) = gauss_legendre(4);
    let mut terms = Vec::with_capacity(disc.mesh.len() - 1);
    for e in 0..disc.mesh.len() - 1 {
        let (x0, x1) = (disc.mesh[e], disc.mesh[e + 1]);
        let h = x1 - x0;
        let mut acc = 0.0;
        for (xq, wq) in gx.iter().zip(&gw) {
            let x = 0.5 * (x0 + x1) + 0.5 * h * xq;
            let w = 0.5 * h * wq;
            let b1 = (x - x0) / h;
            let val = nodal[e] * (1.0 - b1) + nodal[e + 1] * b1;
            acc += w * density(x) * val;
        }
        terms.push(acc);
    }
    pairwise_sum(&terms)
}

/// Weighted cosine similarity of a mesh-sampled eigenfunction with κ, in the
/// mass inner product.
pub fn kappa_similarity(disc: &SturmLiouvilleDiscretization, values: &[f64]) -> f64 {
    let n = disc.n;
    let kappa: Vec<f64> = disc
        .mesh
        .iter()
        .map(|&r| (1.0 - r * r).sqrt() / r)
        .collect();
    let ip = |a: &[f64], b: &[f64]| -> f64 {
        let prod: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
        mesh_integral(disc, &prod, |r| sl_mass_density(n, r))
    };
    // mesh_integral interpolates the product linearly; adequate for a similarity score
    let num = ip(values, &kappa);
    let den = (ip(values, values) * ip(&kappa, &kappa)).sqrt();
    (num / den).abs()
}

/// Three-level refinement ladder used by convergence studies and acceptance
/// checks: (elements, ρ_min, ρ_max).
pub const REFINEMENT_LADDER: [(usize, f64, f64); 3] = [
    (1000, 1e-3, 1.0 - 1e-5),
    (4000, 3e-4, 1.0 - 1e-8),
    (16000, 1e-4, 1.0 - 1e-10),
];

/// Lowest constrained eigenvalue at each ladder level.
pub fn spectrum_refinement_study(n: usize) -> Result<Vec<f64>, SpectralError> {
    let mut out = Vec::new();
    for &(elems, lo, hi) in REFINEMENT_LADDER.iter() {
        let disc = SturmLiouvilleDiscretization::new(n, lo, hi, elems);
        let result = solve_radial_spectrum(&disc, 3)?;
        let lowest = result
            .lowest_constrained(1e-6)
            .ok_or_else(|| SpectralError::SolverBreakdown {
                reason: "no constrained eigenpair found".into(),
            })?;
        out.push(lowest.mu);
    }
    Ok(out)
}
