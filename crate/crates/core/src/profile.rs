//! Closed-form geometry of the unit isoperimetric profile.
//!
//! The profile is the union of the graphs t = ±u0(ρ) over the closed unit disk,
//! with u0(ρ) = π/8 + (ρ/4) sqrt(1-ρ²) - (1/4) arcsin ρ. The arcsin term carries
//! the coefficient 1/4 (not ρ/4): this is the antiderivative consistent with
//! u0'(ρ) = -ρ²/(2 sqrt(1-ρ²)), with u0(1) = 0, and with the pole-to-pole
//! geodesic arc reproduced by the `geodesics` module.

use crate::error::GeomError;
use crate::heisenberg::{apply_neg_c, GroupContext, HVector};
use crate::quadrature::Hemisphere;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Height function of the upper hemisphere.
pub fn u0(rho: f64) -> Result<f64, GeomError> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(GeomError::RhoOutOfRange {
            rho,
            range: "[0, 1]",
        });
    }
    Ok(std::f64::consts::PI / 8.0 + 0.25 * rho * (1.0 - rho * rho).sqrt() - 0.25 * rho.asin())
}

/// u0'(ρ) = -ρ² / (2 sqrt(1-ρ²)).
pub fn u0_prime(rho: f64) -> Result<f64, GeomError> {
    if !(0.0..1.0).contains(&rho) {
        return Err(GeomError::RhoOutOfRange {
            rho,
            range: "[0, 1)",
        });
    }
    Ok(-rho * rho / (2.0 * (1.0 - rho * rho).sqrt()))
}

/// A point of the unit profile: radial coordinate, hemisphere, and optionally
/// the angular position ξ ∈ S^{2n-1} (needed only to assemble frames).
#[derive(Debug, Clone)]
pub struct ProfilePoint {
    pub rho: f64,
    pub hemisphere: Hemisphere,
    pub xi: Option<Vec<f64>>,
}

impl ProfilePoint {
    pub fn new(rho: f64, hemisphere: Hemisphere) -> Self {
        Self {
            rho,
            hemisphere,
            xi: None,
        }
    }

    pub fn with_xi(rho: f64, hemisphere: Hemisphere, xi: Vec<f64>) -> Self {
        Self {
            rho,
            hemisphere,
            xi: Some(xi),
        }
    }
}

/// Every closed-form scalar and vector of the profile at one point.
#[derive(Debug, Clone)]
pub struct ClosedFormBundle {
    pub u0: f64,
    /// κ = ±sqrt(1-ρ²)/ρ (sign of the hemisphere).
    pub kappa: f64,
    /// ϖ = 2κ, the weighted vertical normal component.
    pub varpi: f64,
    /// Unit horizontal normal ν_H = z + κ z^⊥ as frame coefficients.
    pub nu_h: HVector,
    /// Characteristic direction ν_H^⊥ = z^⊥ - κ z.
    pub nu_h_perp: HVector,
    /// H-perimeter density ρ/(2 sqrt(1-ρ²)) against planar Lebesgue measure.
    pub sigma_h_density: f64,
    /// |P_H ν| = ρ / sqrt(4 - 3ρ²).
    pub p_norm: f64,
    /// Horizontal support function g_H = <z, ν_H> = ρ².
    pub g_h: f64,
    /// g_H^⊥ = <z, ν_H^⊥> = ∓ρ sqrt(1-ρ²).
    pub g_h_perp: f64,
    /// Horizontal mean curvature H = -2n.
    pub h_mean: f64,
    /// |z_HS|² = ρ²(1-ρ²).
    pub z_hs_sq: f64,
}

fn check_open_rho(rho: f64) -> Result<(), GeomError> {
    if rho <= 0.0 || rho > 1.0 {
        return Err(GeomError::RhoOutOfRange {
            rho,
            range: "(0, 1]",
        });
    }
    Ok(())
}

/// Angular position: stored ξ when present, e_1 otherwise.
fn xi_or_default(p: &ProfilePoint, ctx: &GroupContext) -> Vec<f64> {
    match &p.xi {
        Some(xi) => xi.clone(),
        None => {
            let mut xi = vec![0.0; ctx.horizontal_dim()];
            xi[0] = 1.0;
            xi
        }
    }
}

/// All §3 closed forms at a profile point. Poles (ρ = 0) are characteristic
/// and rejected.
pub fn bundle(p: &ProfilePoint, ctx: &GroupContext) -> Result<ClosedFormBundle, GeomError> {
    check_open_rho(p.rho)?;
    let rho = p.rho;
    let sign = p.hemisphere.sign();
    let g = (1.0 - rho * rho).sqrt();
    let kappa = sign * g / rho;
    let xi = xi_or_default(p, ctx);
    let z: Vec<f64> = xi.iter().map(|c| rho * c).collect();
    let z_perp = apply_neg_c(&z);
    let nu_h = HVector::new(
        z.iter()
            .zip(&z_perp)
            .map(|(a, b)| a + kappa * b)
            .collect(),
    );
    let nu_h_perp = nu_h.perp();
    Ok(ClosedFormBundle {
        u0: u0(rho)?,
        kappa,
        varpi: 2.0 * kappa,
        nu_h,
        nu_h_perp,
        sigma_h_density: rho / (2.0 * g),
        p_norm: rho / (4.0 - 3.0 * rho * rho).sqrt(),
        g_h: rho * rho,
        g_h_perp: -sign * rho * g,
        h_mean: -2.0 * ctx.n() as f64,
        z_hs_sq: rho * rho * (1.0 - rho * rho),
    })
}

/// dκ/dρ on the given hemisphere: ∓1/(ρ² sqrt(1-ρ²)).
pub fn kappa_prime(rho: f64, hemisphere: Hemisphere) -> Result<f64, GeomError> {
    check_open_rho(rho)?;
    if rho >= 1.0 {
        return Err(GeomError::RhoOutOfRange {
            rho,
            range: "(0, 1)",
        });
    }
    Ok(-hemisphere.sign() / (rho * rho * (1.0 - rho * rho).sqrt()))
}

/// d²κ/dρ² on the given hemisphere.
pub fn kappa_second(rho: f64, hemisphere: Hemisphere) -> Result<f64, GeomError> {
    check_open_rho(rho)?;
    let g2 = 1.0 - rho * rho;
    // d/drho [ -1/(rho^2 g) ] = (2 - 3 rho^2) / (rho^3 g^3)
    Ok(hemisphere.sign() * (2.0 - 3.0 * rho * rho) / (rho.powi(3) * g2.powf(1.5)))
}

/// Gram norms of the shape operators and the mean curvature:
/// (|B|², |S|², |A|², H).
pub fn curvature_norms(
    p: &ProfilePoint,
    ctx: &GroupContext,
) -> Result<(f64, f64, f64, f64), GeomError> {
    check_open_rho(p.rho)?;
    let n = ctx.n() as f64;
    let rho = p.rho;
    let varpi_sq = 4.0 * (1.0 - rho * rho) / (rho * rho);
    Ok((
        4.0 + (2.0 * n - 2.0) / (rho * rho),
        2.0 * n + 2.0,
        0.5 * (n - 1.0) * varpi_sq,
        -2.0 * n,
    ))
}

/// ∂ϖ/∂ν_H^⊥ = 2/ρ², hemisphere-independent.
pub fn dvarpi_dnuperp(p: &ProfilePoint) -> Result<f64, GeomError> {
    check_open_rho(p.rho)?;
    Ok(2.0 / (p.rho * p.rho))
}

/// Shape operators in an adapted horizontal-tangent frame with τ_2 = ν_H^⊥.
#[derive(Debug, Clone)]
pub struct ShapeOperators {
    pub s_matrix: DMatrix<f64>,
    pub a_matrix: DMatrix<f64>,
    pub b_matrix: DMatrix<f64>,
    /// Frame rows: τ_2, ..., τ_{2n} as coefficient vectors in R^{2n}.
    pub frame: Vec<Vec<f64>>,
}

/// Assemble the horizontal shape operators at a profile point.
///
/// The frame is built by Gram-Schmidt: τ_2 = ν_H^⊥, then a deterministic
/// pseudo-random completion orthogonal to {ν_H, ν_H^⊥}. The operator B is
/// assembled from the Jacobian of the normal field, B(τ_i, τ_j) = -<J τ_i, τ_j>
/// with J = I + (κ'/ρ) z^⊥⊗z - κ C; S and A are its symmetric and
/// skew-symmetric parts.
pub fn assemble_shape_operators(
    p: &ProfilePoint,
    ctx: &GroupContext,
) -> Result<ShapeOperators, GeomError> {
    let rho = p.rho;
    if rho < 1e-10 || rho > 1.0 - 1e-10 {
        return Err(GeomError::DegenerateFrame { rho });
    }
    let b = bundle(p, ctx)?;
    let dim = ctx.horizontal_dim();
    let kp = kappa_prime(rho, p.hemisphere)?;
    let xi = xi_or_default(p, ctx);
    let z: Vec<f64> = xi.iter().map(|c| rho * c).collect();
    let z_perp = apply_neg_c(&z);

    // orthonormal frame: nu_h, then tau_2 = nu_h_perp, then Gram-Schmidt fill
    let mut frame: Vec<Vec<f64>> = vec![b.nu_h.components.clone(), b.nu_h_perp.components.clone()];
    let mut rng = ChaCha8Rng::seed_from_u64(0x4849_534f);
    while frame.len() < dim {
        let cand: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut v = cand;
        for f in &frame {
            let proj: f64 = v.iter().zip(f).map(|(a, b)| a * b).sum();
            for (vi, fi) in v.iter_mut().zip(f) {
                *vi -= proj * fi;
            }
        }
        let norm: f64 = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-6 {
            frame.push(v.into_iter().map(|c| c / norm).collect());
        }
    }
    let tangent = &frame[1..]; // tau_2 .. tau_{2n}

    // W tau = J tau with J = I + (kappa'/rho) z^perp (x) z - kappa C
    let jac = |v: &[f64]| -> Vec<f64> {
        let zdotv: f64 = z.iter().zip(v).map(|(a, b)| a * b).sum();
        let cv = crate::heisenberg::apply_c(v);
        (0..dim)
            .map(|k| v[k] + kp / rho * z_perp[k] * zdotv - b.kappa * cv[k])
            .collect()
    };

    let m = dim - 1;
    let mut b_mat = DMatrix::zeros(m, m);
    for (i, ti) in tangent.iter().enumerate() {
        let jti = jac(ti);
        for (j, tj) in tangent.iter().enumerate() {
            let val: f64 = jti.iter().zip(tj.iter()).map(|(a, c)| a * c).sum();
            b_mat[(i, j)] = -val;
        }
    }
    let s_mat = 0.5 * (&b_mat + b_mat.transpose());
    let a_mat = 0.5 * (&b_mat - b_mat.transpose());
    Ok(ShapeOperators {
        s_matrix: s_mat,
        a_matrix: a_mat,
        b_matrix: b_mat,
        frame: tangent.to_vec(),
    })
}

impl ShapeOperators {
    /// Gram norms (|B|², |S|², |A|²) of the assembled matrices.
    pub fn gram_norms(&self) -> (f64, f64, f64) {
        let sq = |m: &DMatrix<f64>| m.iter().map(|v| v * v).sum::<f64>();
        (
            sq(&self.b_matrix),
            sq(&self.s_matrix),
            sq(&self.a_matrix),
        )
    }

    /// Ascending eigenvalues of the symmetric part.
    pub fn principal_curvatures(&self) -> Vec<f64> {
        let eig = self.s_matrix.clone().symmetric_eigen();
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals
    }

    /// A applied to the ν_H^⊥ direction (first frame vector), as coordinates
    /// in the tangent frame.
    pub fn a_applied_to_nuperp(&self) -> DVector<f64> {
        let mut e = DVector::zeros(self.a_matrix.nrows());
        e[0] = 1.0;
        &self.a_matrix * e
    }
}

/// Residuals of the radial identities: Δ_HS κ + ((2n-4)/ρ²) κ computed from
/// closed forms, and L_HS κ + ((2n-2)/ρ²) κ through the radial operator.
pub fn radial_identity_residuals(
    p: &ProfilePoint,
    ctx: &GroupContext,
) -> Result<(f64, f64), GeomError> {
    let rho = p.rho;
    if !(0.0..1.0).contains(&rho) || rho == 0.0 {
        return Err(GeomError::RhoOutOfRange {
            rho,
            range: "(0, 1)",
        });
    }
    let n = ctx.n() as f64;
    let b = bundle(p, ctx)?;
    let kp = kappa_prime(rho, p.hemisphere)?;
    let kpp = kappa_second(rho, p.hemisphere)?;

    // radial operator: L phi = (1-rho^2) phi'' + ((2n - (2n+1) rho^2)/rho) phi'
    let l_kappa = (1.0 - rho * rho) * kpp + (2.0 * n - (2.0 * n + 1.0) * rho * rho) / rho * kp;
    // directional derivative of kappa along nu_h_perp: kappa'(rho) <z/rho, nu_h_perp> = 1/rho^2
    let dk_nuperp = kp * (b.g_h_perp / rho);
    let laplacian_kappa = l_kappa + b.varpi * dk_nuperp;

    let res_laplacian = laplacian_kappa + (2.0 * n - 4.0) / (rho * rho) * b.kappa;
    let res_l = l_kappa + (2.0 * n - 2.0) / (rho * rho) * b.kappa;
    Ok((res_laplacian, res_l))
}
