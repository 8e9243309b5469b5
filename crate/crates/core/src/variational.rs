//! First and second variation of the H-perimeter on the unit profile, the
//! stability functional F, the Rayleigh quotient G, the isoperimetric
//! functional J, Green-formula residuals, and the integral identities used by
//! the stability analysis.
//!
//! On the profile the volume-preserving second variation reduces to
//! F(φ) = ∫ (|grad_HS φ|² - ((Q-4)/ρ²) φ²) dσ_H with zero-mean φ; the
//! potential comes from -|S|² + 2 ∂ϖ/∂ν^⊥ - ((n+1)/2) ϖ² = -(Q-4)/ρ².

use crate::error::{QuadError, VariationalError};
use crate::heisenberg::GroupContext;
use crate::profile;
use crate::quadrature::{
    integrate_radial_profile, pairwise_sum, Hemisphere, RadialGrid, RadialScheme,
};
use crate::spectral::RadialC2;
use rayon::prelude::*;
use std::sync::Arc;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Sync + Send>;
type PolarFn = Arc<dyn Fn(f64, f64) -> f64 + Sync + Send>;

/// A radial function with first derivative and optional second derivative.
#[derive(Clone)]
pub struct RadialFn {
    f: ScalarFn,
    d1: ScalarFn,
    d2: Option<ScalarFn>,
}

impl RadialFn {
    pub fn new(
        f: impl Fn(f64) -> f64 + Sync + Send + 'static,
        d1: impl Fn(f64) -> f64 + Sync + Send + 'static,
    ) -> Self {
        Self {
            f: Arc::new(f),
            d1: Arc::new(d1),
            d2: None,
        }
    }

    pub fn with_d2(mut self, d2: impl Fn(f64) -> f64 + Sync + Send + 'static) -> Self {
        self.d2 = Some(Arc::new(d2));
        self
    }

    pub fn value(&self, rho: f64) -> f64 {
        (self.f)(rho)
    }

    pub fn deriv(&self, rho: f64) -> f64 {
        (self.d1)(rho)
    }

    pub fn second(&self, rho: f64) -> Option<f64> {
        self.d2.as_ref().map(|d| d(rho))
    }

    fn shifted(&self, c: f64) -> RadialFn {
        let f = self.f.clone();
        RadialFn {
            f: Arc::new(move |r| f(r) - c),
            d1: self.d1.clone(),
            d2: self.d2.clone(),
        }
    }
}

impl RadialC2 for RadialFn {
    fn value(&self, rho: f64) -> f64 {
        (self.f)(rho)
    }
    fn d1(&self, rho: f64) -> f64 {
        (self.d1)(rho)
    }
    fn d2(&self, rho: f64) -> f64 {
        self.second(rho)
            .expect("RadialFn: second derivative required but not provided")
    }
}

/// A per-hemisphere field φ(ρ, θ) for n = 1 with closed-form partials.
#[derive(Clone)]
pub struct AngularFn {
    pub f: PolarFn,
    pub d_rho: PolarFn,
    pub d_theta: PolarFn,
}

impl AngularFn {
    fn shifted(&self, c: f64) -> AngularFn {
        let f = self.f.clone();
        AngularFn {
            f: Arc::new(move |r, t| f(r, t) - c),
            d_rho: self.d_rho.clone(),
            d_theta: self.d_theta.clone(),
        }
    }
}

/// A variation generator on the profile: a radial hemisphere pair, or a full
/// (ρ, θ) field per hemisphere (n = 1 only).
#[derive(Clone)]
pub enum SurfaceTestFunction {
    RadialPair { plus: RadialFn, minus: RadialFn },
    FullN1 { plus: AngularFn, minus: AngularFn },
}

impl SurfaceTestFunction {
    /// Odd pair (φ, -φ).
    pub fn odd(phi: RadialFn) -> Self {
        let neg_f = {
            let f = phi.f.clone();
            Arc::new(move |r: f64| -f(r)) as ScalarFn
        };
        let neg_d1 = {
            let d = phi.d1.clone();
            Arc::new(move |r: f64| -d(r)) as ScalarFn
        };
        let neg_d2 = phi.d2.clone().map(|d| {
            Arc::new(move |r: f64| -d(r)) as ScalarFn
        });
        SurfaceTestFunction::RadialPair {
            minus: RadialFn {
                f: neg_f,
                d1: neg_d1,
                d2: neg_d2,
            },
            plus: phi,
        }
    }

    /// Even pair (φ, φ).
    pub fn even(phi: RadialFn) -> Self {
        SurfaceTestFunction::RadialPair {
            minus: phi.clone(),
            plus: phi,
        }
    }

    /// κ as the odd-parity prototype.
    pub fn kappa() -> Self {
        SurfaceTestFunction::odd(
            RadialFn::new(
                |r| (1.0 - r * r).sqrt() / r,
                |r| -1.0 / (r * r * (1.0 - r * r).sqrt()),
            )
            .with_d2(|r| (2.0 - 3.0 * r * r) / (r.powi(3) * (1.0 - r * r).powf(1.5))),
        )
    }

    fn component(&self, hemi: Hemisphere) -> FieldView<'_> {
        match self {
            SurfaceTestFunction::RadialPair { plus, minus } => FieldView::Radial(match hemi {
                Hemisphere::Upper => plus,
                Hemisphere::Lower => minus,
            }),
            SurfaceTestFunction::FullN1 { plus, minus } => FieldView::Full(match hemi {
                Hemisphere::Upper => plus,
                Hemisphere::Lower => minus,
            }),
        }
    }
}

enum FieldView<'a> {
    Radial(&'a RadialFn),
    Full(&'a AngularFn),
}

/// Quadrature configuration shared by the variational integrals.
#[derive(Clone)]
pub struct VariationalEngine {
    pub ctx: GroupContext,
    pub grid: RadialGrid,
    pub angular_nodes: usize,
}

impl VariationalEngine {
    pub fn new(n: usize) -> Self {
        Self {
            ctx: GroupContext::new(n).expect("n >= 1"),
            grid: RadialGrid::new(400, RadialScheme::SineSubstituted),
            angular_nodes: 256,
        }
    }

    pub fn n(&self) -> usize {
        self.ctx.n()
    }

    /// ∫ f(ρ, hemi) dσ_H over the closed profile (angular factor analytic for
    /// radial integrands; full θ-grid for n = 1 fields).
    fn sigma_integral_radial<F: Fn(f64, Hemisphere) -> f64>(&self, f: F) -> Result<f64, QuadError> {
        integrate_radial_profile(f, &self.ctx, &self.grid)
    }

    fn sigma_integral_full<F: Fn(f64, f64, Hemisphere) -> f64>(
        &self,
        f: F,
    ) -> Result<f64, QuadError> {
        // per hemisphere: ∫∫ f ρ/(2 sqrt(1-ρ²)) ρ dρ dθ
        let m = self.angular_nodes;
        let dtheta = std::f64::consts::TAU / m as f64;
        let mut total = 0.0;
        for hemi in Hemisphere::both() {
            let part = self.grid.integrate_singular(|rho| {
                let weight = rho * rho / 2.0;
                let ring: Vec<f64> = (0..m)
                    .map(|j| f(rho, dtheta * j as f64, hemi) * weight * dtheta)
                    .collect();
                pairwise_sum(&ring)
            })?;
            total += part;
        }
        Ok(total)
    }

    /// ∫ φ dσ_H.
    pub fn integral_sigma(&self, phi: &SurfaceTestFunction) -> Result<f64, QuadError> {
        match phi {
            SurfaceTestFunction::RadialPair { .. } => self.sigma_integral_radial(|rho, hemi| {
                match phi.component(hemi) {
                    FieldView::Radial(r) => r.value(rho),
                    FieldView::Full(_) => unreachable!(),
                }
            }),
            SurfaceTestFunction::FullN1 { plus, minus } => self.sigma_integral_full(|rho, th, hemi| {
                match hemi {
                    Hemisphere::Upper => (plus.f)(rho, th),
                    Hemisphere::Lower => (minus.f)(rho, th),
                }
            }),
        }
    }

    /// ∫ (φ/ρ²) dσ_H (the compatibility integral) and ∫ φ² dσ_H.
    pub fn compatibility_integral(&self, phi: &SurfaceTestFunction) -> Result<f64, QuadError> {
        match phi {
            SurfaceTestFunction::RadialPair { .. } => {
                self.sigma_integral_radial(|rho, hemi| match phi.component(hemi) {
                    FieldView::Radial(r) => r.value(rho) / (rho * rho),
                    FieldView::Full(_) => unreachable!(),
                })
            }
            SurfaceTestFunction::FullN1 { plus, minus } => {
                self.sigma_integral_full(|rho, th, hemi| {
                    let v = match hemi {
                        Hemisphere::Upper => (plus.f)(rho, th),
                        Hemisphere::Lower => (minus.f)(rho, th),
                    };
                    v / (rho * rho)
                })
            }
        }
    }

    pub fn l2_norm_sq(&self, phi: &SurfaceTestFunction) -> Result<f64, QuadError> {
        match phi {
            SurfaceTestFunction::RadialPair { .. } => {
                self.sigma_integral_radial(|rho, hemi| match phi.component(hemi) {
                    FieldView::Radial(r) => r.value(rho).powi(2),
                    FieldView::Full(_) => unreachable!(),
                })
            }
            SurfaceTestFunction::FullN1 { plus, minus } => {
                self.sigma_integral_full(|rho, th, hemi| {
                    match hemi {
                        Hemisphere::Upper => (plus.f)(rho, th),
                        Hemisphere::Lower => (minus.f)(rho, th),
                    }
                    .powi(2)
                })
            }
        }
    }

    /// Total H-perimeter of the profile.
    pub fn sigma_total(&self) -> Result<f64, QuadError> {
        self.sigma_integral_radial(|_, _| 1.0)
    }

    /// Riemannian volume of the region bounded by the profile: ∫ 2 u0 dz.
    pub fn volume(&self) -> Result<f64, QuadError> {
        let n = self.n() as i32;
        let area = crate::quadrature::sphere_area(self.n());
        let v = self.grid.integrate(|rho| {
            2.0 * profile::u0(rho).unwrap_or(0.0) * rho.powi(2 * n - 1)
        })?;
        Ok(area * v)
    }

    /// Subtract the σ-mean: φ - (∫φσ)/σ(S).
    pub fn zero_mean_project(
        &self,
        phi: &SurfaceTestFunction,
    ) -> Result<SurfaceTestFunction, QuadError> {
        let mean = self.integral_sigma(phi)? / self.sigma_total()?;
        Ok(match phi {
            SurfaceTestFunction::RadialPair { plus, minus } => SurfaceTestFunction::RadialPair {
                plus: plus.shifted(mean),
                minus: minus.shifted(mean),
            },
            SurfaceTestFunction::FullN1 { plus, minus } => SurfaceTestFunction::FullN1 {
                plus: plus.shifted(mean),
                minus: minus.shifted(mean),
            },
        })
    }

    /// First variation of σ_H under the normal variation generated by φ:
    /// -∫ H φ σ = 2n ∫ φ σ.
    pub fn first_variation(&self, phi: &SurfaceTestFunction) -> Result<f64, QuadError> {
        Ok(2.0 * self.n() as f64 * self.integral_sigma(phi)?)
    }

    /// Squared horizontal tangent gradient at a point of the profile:
    /// radial fields give φ'²(1-ρ²); full fields (φ_θ ∓ sqrt(1-ρ²) φ_ρ)².
    fn grad_sq(&self, phi: &SurfaceTestFunction, rho: f64, theta: f64, hemi: Hemisphere) -> f64 {
        match phi.component(hemi) {
            FieldView::Radial(r) => {
                let d = r.deriv(rho);
                d * d * (1.0 - rho * rho)
            }
            FieldView::Full(a) => {
                let g = (1.0 - rho * rho).sqrt();
                let d = (a.d_theta)(rho, theta) - hemi.sign() * g * (a.d_rho)(rho, theta);
                d * d
            }
        }
    }

    /// The stability functional F(φ) = ∫ (|grad_HS φ|² - ((Q-4)/ρ²) φ²) σ.
    pub fn second_variation_profile(&self, phi: &SurfaceTestFunction) -> Result<f64, QuadError> {
        let coeff = 2.0 * self.n() as f64 - 2.0; // Q - 4
        match phi {
            SurfaceTestFunction::RadialPair { .. } => self.sigma_integral_radial(|rho, hemi| {
                let v = match phi.component(hemi) {
                    FieldView::Radial(r) => r.value(rho),
                    FieldView::Full(_) => unreachable!(),
                };
                self.grad_sq(phi, rho, 0.0, hemi) - coeff / (rho * rho) * v * v
            }),
            SurfaceTestFunction::FullN1 { plus, minus } => {
                self.sigma_integral_full(|rho, th, hemi| {
                    let v = match hemi {
                        Hemisphere::Upper => (plus.f)(rho, th),
                        Hemisphere::Lower => (minus.f)(rho, th),
                    };
                    self.grad_sq(phi, rho, th, hemi) - coeff / (rho * rho) * v * v
                })
            }
        }
    }

    /// Rayleigh quotient G(φ) = ∫|grad_HS φ|²σ / ∫(φ²/ρ²)σ.
    pub fn rayleigh_g(&self, phi: &SurfaceTestFunction) -> Result<f64, VariationalError> {
        let num = match phi {
            SurfaceTestFunction::RadialPair { .. } => self
                .sigma_integral_radial(|rho, hemi| self.grad_sq(phi, rho, 0.0, hemi))?,
            SurfaceTestFunction::FullN1 { .. } => {
                self.sigma_integral_full(|rho, th, hemi| self.grad_sq(phi, rho, th, hemi))?
            }
        };
        let den = match phi {
            SurfaceTestFunction::RadialPair { .. } => {
                self.sigma_integral_radial(|rho, hemi| match phi.component(hemi) {
                    FieldView::Radial(r) => r.value(rho).powi(2) / (rho * rho),
                    FieldView::Full(_) => unreachable!(),
                })?
            }
            SurfaceTestFunction::FullN1 { plus, minus } => {
                self.sigma_integral_full(|rho, th, hemi| {
                    let v = match hemi {
                        Hemisphere::Upper => (plus.f)(rho, th),
                        Hemisphere::Lower => (minus.f)(rho, th),
                    };
                    v * v / (rho * rho)
                })?
            }
        };
        if !(den.is_finite() && den > 0.0) {
            return Err(VariationalError::ZeroDenominator);
        }
        Ok(num / den)
    }

    /// Pointwise residual of the potential identity
    /// -|S|² + 2 ∂ϖ/∂ν^⊥ - ((n+1)/2) ϖ² = -(Q-4)/ρ².
    pub fn potential_residual(&self, rho: f64) -> f64 {
        let n = self.n() as f64;
        let s_sq = 2.0 * n + 2.0;
        let dvarpi = 2.0 / (rho * rho);
        let varpi_sq = 4.0 * (1.0 - rho * rho) / (rho * rho);
        (-s_sq + 2.0 * dvarpi - 0.5 * (n + 1.0) * varpi_sq) + (2.0 * n - 2.0) / (rho * rho)
    }
}

/// σ_H of the profile dilated by s, evaluated as an honest s-dependent
/// integral (no homogeneity shortcut).
pub fn sigma_dilated(n: usize, s: f64, grid: &RadialGrid) -> Result<f64, QuadError> {
    let area = crate::quadrature::sphere_area(n);
    // with rho = s x, u_s'(rho) = -s x²/(2 sqrt(1-x²)) and
    // u_s'² + rho²/4 = (s x/2)²/(1-x²), so the graph density is the singular
    // family handled by the stable weights
    let v = grid.integrate_singular(|x| {
        let rho = s * x;
        (s * x / 2.0) * rho.powi(2 * n as i32 - 1) * s
    })?;
    Ok(2.0 * area * v)
}

/// Volume bounded by the dilated profile.
pub fn volume_dilated(n: usize, s: f64, grid: &RadialGrid) -> Result<f64, QuadError> {
    let area = crate::quadrature::sphere_area(n);
    let v = grid.integrate(|x| {
        let rho = s * x;
        2.0 * s * s * profile::u0(x).unwrap_or(0.0) * rho.powi(2 * n as i32 - 1) * s
    })?;
    Ok(area * v)
}

/// Isoperimetric functional J(δ_s D) = σ_H(∂D_s) / vol(D_s)^{1-1/Q}.
pub fn isoperimetric_j(n: usize, s: f64, grid: &RadialGrid) -> Result<f64, QuadError> {
    let q = 2.0 * n as f64 + 2.0;
    let sigma = sigma_dilated(n, s, grid)?;
    let vol = volume_dilated(n, s, grid)?;
    Ok(sigma / vol.powf(1.0 - 1.0 / q))
}

/// Residual of the criticality relation vol·H + ((Q-1)/Q) σ_H = 0.
pub fn criticality_residual(n: usize, grid: &RadialGrid) -> Result<f64, QuadError> {
    let q = 2.0 * n as f64 + 2.0;
    let sigma = sigma_dilated(n, 1.0, grid)?;
    let vol = volume_dilated(n, 1.0, grid)?;
    Ok(vol * (-2.0 * n as f64) + (q - 1.0) / q * sigma)
}

/// Apply the radial L_HS to a RadialFn with second derivative.
fn l_radial(n: usize, phi: &RadialFn, rho: f64) -> f64 {
    let nf = n as f64;
    (1.0 - rho * rho) * phi.second(rho).expect("second derivative required")
        + (2.0 * nf - (2.0 * nf + 1.0) * rho * rho) / rho * phi.deriv(rho)
}

/// Residuals of the Green formulas for compactly supported radial pairs:
/// (i) ∫Lφ σ, (iii) ∫ψLφ σ - ∫φLψ σ, (v) ∫ψLφ σ + ∫<grad φ, grad ψ> σ,
/// (vi) ∫L(φ²) σ - 2∫φLφ σ - 2∫|grad φ|² σ.
pub fn green_residuals(
    engine: &VariationalEngine,
    phi: &SurfaceTestFunction,
    psi: &SurfaceTestFunction,
    support: (f64, f64),
) -> Result<[f64; 4], VariationalError> {
    if support.0 <= 0.0 || support.1 >= 1.0 {
        return Err(VariationalError::SupportViolation {
            a: support.0,
            b: support.1,
            requirement: "support must avoid the poles and the equator".into(),
        });
    }
    let n = engine.n();
    let (phi_p, phi_m) = match phi {
        SurfaceTestFunction::RadialPair { plus, minus } => (plus, minus),
        _ => unreachable!("green_residuals takes radial pairs"),
    };
    let (psi_p, psi_m) = match psi {
        SurfaceTestFunction::RadialPair { plus, minus } => (plus, minus),
        _ => unreachable!("green_residuals takes radial pairs"),
    };
    let pick = |hemi: Hemisphere| match hemi {
        Hemisphere::Upper => (phi_p, psi_p),
        Hemisphere::Lower => (phi_m, psi_m),
    };

    let i1 = engine.sigma_integral_radial(|rho, hemi| l_radial(n, pick(hemi).0, rho))?;

    let sym_a = engine
        .sigma_integral_radial(|rho, hemi| pick(hemi).1.value(rho) * l_radial(n, pick(hemi).0, rho))?;
    let sym_b = engine
        .sigma_integral_radial(|rho, hemi| pick(hemi).0.value(rho) * l_radial(n, pick(hemi).1, rho))?;
    let i3 = sym_a - sym_b;

    let grad_pair = engine.sigma_integral_radial(|rho, hemi| {
        let (f, g) = pick(hemi);
        f.deriv(rho) * g.deriv(rho) * (1.0 - rho * rho)
    })?;
    let i5 = sym_a + grad_pair;

    // L(φ²) needs (φ²)'' = 2 φ'² + 2 φ φ''
    let l_phi_sq = engine.sigma_integral_radial(|rho, hemi| {
        let f = pick(hemi).0;
        let nf = n as f64;
        let d2 = 2.0 * f.deriv(rho).powi(2) + 2.0 * f.value(rho) * f.second(rho).unwrap();
        let d1 = 2.0 * f.value(rho) * f.deriv(rho);
        (1.0 - rho * rho) * d2 + (2.0 * nf - (2.0 * nf + 1.0) * rho * rho) / rho * d1
    })?;
    let phi_l_phi = engine
        .sigma_integral_radial(|rho, hemi| pick(hemi).0.value(rho) * l_radial(n, pick(hemi).0, rho))?;
    let grad_sq = engine.sigma_integral_radial(|rho, hemi| {
        let d = pick(hemi).0.deriv(rho);
        d * d * (1.0 - rho * rho)
    })?;
    let i6 = l_phi_sq - 2.0 * phi_l_phi - 2.0 * grad_sq;

    Ok([i1, i3, i5, i6])
}

/// Appendix-B necessary condition: lhs = ∫|grad ϖ|²σ must equal
/// rhs = ∫ϖ²(|S|² + ((3-n)/6)ϖ²)σ on the profile. Integrable only for n ≥ 2.
pub fn necessary_condition_check(
    engine: &VariationalEngine,
) -> Result<(f64, f64, f64), VariationalError> {
    let n = engine.n();
    if n < 2 {
        return Err(QuadError::NotIntegrable {
            n,
            exponent: -4,
            weight_exponent: 2 * n as i64,
        }
        .into());
    }
    let lhs = engine.sigma_integral_radial(|rho, _| 4.0 / rho.powi(4))?;
    let s_sq = 2.0 * n as f64 + 2.0;
    let rhs = engine.sigma_integral_radial(|rho, _| {
        let varpi_sq = 4.0 * (1.0 - rho * rho) / (rho * rho);
        varpi_sq * (s_sq + (3.0 - n as f64) / 6.0 * varpi_sq)
    })?;
    Ok((lhs, rhs, lhs - rhs))
}

/// Appendix-B admissibility identity: ∫(2ϖ²·(2/ρ²) - (2n/3)ϖ⁴)σ = 0 for n ≥ 2.
pub fn lemma_mio_check(engine: &VariationalEngine) -> Result<f64, VariationalError> {
    let n = engine.n();
    if n < 2 {
        return Err(QuadError::NotIntegrable {
            n,
            exponent: -4,
            weight_exponent: 2 * n as i64,
        }
        .into());
    }
    Ok(engine.sigma_integral_radial(|rho, _| {
        let varpi_sq = 4.0 * (1.0 - rho * rho) / (rho * rho);
        2.0 * varpi_sq * 2.0 / (rho * rho) - 2.0 * n as f64 / 3.0 * varpi_sq * varpi_sq
    })?)
}

/// Which local-stability quadratic form to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalStabilityKind {
    /// q = -(2n-2)/ρ² on a single open hemisphere.
    SingleHemisphere,
    /// q = -2(2n-3)/ρ² on the outer band ρ² ≥ (2n-3)/(2n-2).
    OuterBand,
}

/// ∫ (|grad_HS φ|² + q φ²) σ over one hemisphere for a compactly supported
/// radial φ with support in [a, b].
pub fn local_stability_check(
    engine: &VariationalEngine,
    support: (f64, f64),
    phi: &RadialFn,
    kind: LocalStabilityKind,
) -> Result<f64, VariationalError> {
    let n = engine.n() as f64;
    let (a, b) = support;
    if !(0.0 < a && a < b && b < 1.0) {
        return Err(VariationalError::SupportViolation {
            a,
            b,
            requirement: "0 < a < b < 1".into(),
        });
    }
    if kind == LocalStabilityKind::OuterBand {
        let threshold = (2.0 * n - 3.0) / (2.0 * n - 2.0);
        if a * a < threshold - 1e-12 {
            return Err(VariationalError::SupportViolation {
                a,
                b,
                requirement: format!("a² ≥ (2n-3)/(2n-2) = {threshold:.6}"),
            });
        }
    }
    let q_coeff = match kind {
        LocalStabilityKind::SingleHemisphere => -(2.0 * n - 2.0),
        LocalStabilityKind::OuterBand => -2.0 * (2.0 * n - 3.0),
    };
    // one hemisphere only: half of the both-hemisphere radial integral of an
    // even integrand
    let full = engine.sigma_integral_radial(|rho, _| {
        let v = phi.value(rho);
        let d = phi.deriv(rho);
        d * d * (1.0 - rho * rho) + q_coeff / (rho * rho) * v * v
    })?;
    Ok(0.5 * full)
}

/// Pointwise residual of the logarithmic substitution identity
/// L(log ψ) = q - |grad_HS log ψ|² for radial ψ > 0.
pub fn log_substitution_residual(
    engine: &VariationalEngine,
    psi: &dyn RadialC2,
    q: f64,
    rho: f64,
) -> Result<f64, VariationalError> {
    let v = psi.value(rho);
    if v <= 0.0 {
        return Err(VariationalError::NonPositivePsi { rho, value: v });
    }
    let n = engine.n() as f64;
    let lp1 = psi.d1(rho) / v;
    let lp2 = psi.d2(rho) / v - lp1 * lp1;
    let l_log = (1.0 - rho * rho) * lp2 + (2.0 * n - (2.0 * n + 1.0) * rho * rho) / rho * lp1;
    Ok(l_log - q + lp1 * lp1 * (1.0 - rho * rho))
}

/// One evaluated battery entry.
#[derive(Debug, Clone)]
pub struct StabilityEntry {
    pub id: String,
    pub f_value: f64,
    pub g_value: Option<f64>,
    /// (∫φσ, ∫(φ/ρ²)σ) after projection.
    pub constraints: (f64, f64),
    pub l2_norm_sq: f64,
}

/// Battery verdict for the sign of the second variation.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub n: usize,
    pub entries: Vec<StabilityEntry>,
    pub min_value: f64,
    /// True when every F value clears -tol * |φ|²_{L²(σ)}.
    pub nonnegative: bool,
    pub tolerance: f64,
}

/// Evaluate a battery: zero-mean project each test function, compute F, G,
/// and the constraint integrals, and aggregate the verdict.
pub fn run_stability_battery(
    engine: &VariationalEngine,
    battery: Vec<(String, SurfaceTestFunction)>,
    tolerance: f64,
) -> Result<StabilityReport, VariationalError> {
    let entries: Result<Vec<StabilityEntry>, VariationalError> = battery
        .into_par_iter()
        .map(|(id, raw)| {
            let phi = engine.zero_mean_project(&raw)?;
            let f_value = engine.second_variation_profile(&phi)?;
            let g_value = engine.rayleigh_g(&phi).ok();
            let constraints = (
                engine.integral_sigma(&phi)?,
                engine.compatibility_integral(&phi)?,
            );
            let l2 = engine.l2_norm_sq(&phi)?;
            Ok(StabilityEntry {
                id,
                f_value,
                g_value,
                constraints,
                l2_norm_sq: l2,
            })
        })
        .collect();
    let entries = entries?;
    let min_value = entries
        .iter()
        .map(|e| e.f_value)
        .fold(f64::INFINITY, f64::min);
    let nonnegative = entries
        .iter()
        .all(|e| e.f_value >= -tolerance * e.l2_norm_sq.max(1e-300));
    Ok(StabilityReport {
        n: engine.n(),
        entries,
        min_value,
        nonnegative,
        tolerance,
    })
}

/// Deterministic test-function families.
pub mod batteries {
    use super::*;

    /// Shifted Legendre polynomials P_k(2ρ-1), alternating parity pairs.
    /// Odd pairs get P_k(1) = 1 subtracted: an odd gluing is a function on
    /// the profile only when it vanishes at the equator.
    pub fn legendre(count: usize) -> Vec<(String, SurfaceTestFunction)> {
        (1..=count)
            .map(|k| {
                let odd = k % 2 == 1;
                let shift = if odd { 1.0 } else { 0.0 };
                let phi = RadialFn::new(
                    move |r| legendre_poly(k, 2.0 * r - 1.0) - shift,
                    move |r| 2.0 * legendre_poly_deriv(k, 2.0 * r - 1.0),
                );
                let f = if odd {
                    SurfaceTestFunction::odd(phi)
                } else {
                    SurfaceTestFunction::even(phi)
                };
                (format!("legendre-{k}"), f)
            })
            .collect()
    }

    /// Cubic-power bumps on staggered subintervals of (0, 1).
    pub fn bumps(count: usize) -> Vec<(String, SurfaceTestFunction)> {
        (0..count)
            .map(|k| {
                let t = k as f64 / count as f64;
                let a = 0.05 + 0.55 * t;
                let b = (a + 0.25 + 0.1 * ((k * 2654435761) % 97) as f64 / 97.0).min(0.98);
                let phi = bump_fn(a, b);
                let f = if k % 2 == 0 {
                    SurfaceTestFunction::odd(phi)
                } else {
                    SurfaceTestFunction::even(phi)
                };
                (format!("bump-{k}-[{a:.3},{b:.3}]"), f)
            })
            .collect()
    }

    /// sin/cos waves in ρ.
    pub fn trig(count: usize) -> Vec<(String, SurfaceTestFunction)> {
        (1..=count)
            .map(|k| {
                let w = k as f64 * std::f64::consts::PI;
                let phi = RadialFn::new(move |r| (w * r).sin(), move |r| w * (w * r).cos());
                let f = if k % 2 == 0 {
                    SurfaceTestFunction::even(phi)
                } else {
                    SurfaceTestFunction::odd(phi)
                };
                (format!("trig-{k}"), f)
            })
            .collect()
    }

    /// Full (ρ, θ) fields for n = 1: radial envelopes times low harmonics.
    /// Odd-mirrored entries carry a (1-ρ²) factor so the pair is continuous
    /// across the equator.
    pub fn full_n1(count: usize) -> Vec<(String, SurfaceTestFunction)> {
        (0..count)
            .map(|k| {
                let harmonic = (k % 4) as f64;
                let pow = 1 + (k % 3) as i32;
                let amp = 0.3 + 0.1 * (k % 5) as f64;
                let equator_zero = k % 2 == 1;
                let env = move |r: f64| if equator_zero { 1.0 - r * r } else { 1.0 };
                let denv = move |r: f64| if equator_zero { -2.0 * r } else { 0.0 };
                let f = move |r: f64, t: f64| {
                    env(r) * (r.powi(pow) * (harmonic * t).sin()
                        + amp * (1.0 - r * r) * (harmonic * t).cos())
                };
                let d_rho = move |r: f64, t: f64| {
                    denv(r)
                        * (r.powi(pow) * (harmonic * t).sin()
                            + amp * (1.0 - r * r) * (harmonic * t).cos())
                        + env(r)
                            * (pow as f64 * r.powi(pow - 1) * (harmonic * t).sin()
                                - amp * 2.0 * r * (harmonic * t).cos())
                };
                let d_theta = move |r: f64, t: f64| {
                    env(r)
                        * harmonic
                        * (r.powi(pow) * (harmonic * t).cos()
                            - amp * (1.0 - r * r) * (harmonic * t).sin())
                };
                let comp = AngularFn {
                    f: Arc::new(f),
                    d_rho: Arc::new(d_rho),
                    d_theta: Arc::new(d_theta),
                };
                let mirrored = if k % 2 == 0 {
                    comp.clone()
                } else {
                    AngularFn {
                        f: {
                            let f = comp.f.clone();
                            Arc::new(move |r, t| -f(r, t))
                        },
                        d_rho: {
                            let d = comp.d_rho.clone();
                            Arc::new(move |r, t| -d(r, t))
                        },
                        d_theta: {
                            let d = comp.d_theta.clone();
                            Arc::new(move |r, t| -d(r, t))
                        },
                    }
                };
                (
                    format!("full-{k}"),
                    SurfaceTestFunction::FullN1 {
                        plus: comp,
                        minus: mirrored,
                    },
                )
            })
            .collect()
    }

    /// Polynomial bump ((ρ-a)(b-ρ))³ (zero outside [a, b]) with derivatives.
    pub fn bump_fn(a: f64, b: f64) -> RadialFn {
        RadialFn::new(
            move |r| {
                if r <= a || r >= b {
                    0.0
                } else {
                    ((r - a) * (b - r)).powi(3)
                }
            },
            move |r| {
                if r <= a || r >= b {
                    0.0
                } else {
                    3.0 * ((r - a) * (b - r)).powi(2) * (a + b - 2.0 * r)
                }
            },
        )
        .with_d2(move |r| {
            if r <= a || r >= b {
                0.0
            } else {
                let p = (r - a) * (b - r);
                let dp = a + b - 2.0 * r;
                6.0 * p * dp * dp - 6.0 * p * p
            }
        })
    }

    pub(super) fn legendre_poly(k: usize, x: f64) -> f64 {
        let (mut p0, mut p1) = (1.0, x);
        if k == 0 {
            return p0;
        }
        for j in 2..=k {
            let jf = j as f64;
            let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
            p0 = p1;
            p1 = p2;
        }
        p1
    }

    pub(super) fn legendre_poly_deriv(k: usize, x: f64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let p = legendre_poly(k, x);
        let pm1 = legendre_poly(k - 1, x);
        if (x * x - 1.0).abs() < 1e-12 {
            // endpoint limit: P_k'(±1) = ±^{k+1} k(k+1)/2
            let s = if x > 0.0 { 1.0 } else { (-1.0f64).powi(k as i32 + 1) };
            return s * (k * (k + 1)) as f64 / 2.0;
        }
        k as f64 * (x * p - pm1) / (x * x - 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn zero_mean_projection() {
        let eng = VariationalEngine::new(2);
        // constant maps to zero
        let one = SurfaceTestFunction::even(RadialFn::new(|_| 1.0, |_| 0.0));
        let proj = eng.zero_mean_project(&one).unwrap();
        assert_abs_diff_eq!(eng.integral_sigma(&proj).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eng.l2_norm_sq(&proj).unwrap(), 0.0, epsilon = 1e-12);
        // kappa is already zero-mean (odd pair)
        let kappa = SurfaceTestFunction::kappa();
        assert_abs_diff_eq!(eng.integral_sigma(&kappa).unwrap(), 0.0, epsilon = 1e-12);
        // idempotence
        let any = SurfaceTestFunction::even(RadialFn::new(|r| r * r, |r| 2.0 * r));
        let p1 = eng.zero_mean_project(&any).unwrap();
        let p2 = eng.zero_mean_project(&p1).unwrap();
        let m1 = eng.integral_sigma(&p1).unwrap();
        let m2 = eng.integral_sigma(&p2).unwrap();
        assert_abs_diff_eq!(m1, m2, epsilon = 1e-13);
    }

    #[test]
    fn first_variation_values() {
        let eng = VariationalEngine::new(1);
        // phi = 1: 2 * sigma = 2 * pi^2/2 = pi^2
        let one = SurfaceTestFunction::even(RadialFn::new(|_| 1.0, |_| 0.0));
        assert_abs_diff_eq!(eng.first_variation(&one).unwrap(), PI * PI, epsilon = 1e-10);
        // zero-mean -> 0
        let phi = SurfaceTestFunction::even(RadialFn::new(|r| r, |_| 1.0));
        let proj = eng.zero_mean_project(&phi).unwrap();
        assert_abs_diff_eq!(eng.first_variation(&proj).unwrap(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn kappa_is_equality_case() {
        for n in [2usize, 3] {
            let eng = VariationalEngine::new(n);
            let kappa = SurfaceTestFunction::kappa();
            let f = eng.second_variation_profile(&kappa).unwrap();
            let norm = eng.l2_norm_sq(&kappa).unwrap();
            assert!(f.abs() <= 1e-10 * norm, "n = {n}: F(kappa) = {f}");
            let g = eng.rayleigh_g(&kappa).unwrap();
            assert_abs_diff_eq!(g, 2.0 * n as f64 - 2.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn rayleigh_homogeneity() {
        let eng = VariationalEngine::new(2);
        let phi = SurfaceTestFunction::odd(batteries::bump_fn(0.2, 0.8));
        let scaled = match &phi {
            SurfaceTestFunction::RadialPair { plus, minus } => SurfaceTestFunction::RadialPair {
                plus: {
                    let f = plus.f.clone();
                    let d = plus.d1.clone();
                    RadialFn {
                        f: Arc::new(move |r| 3.7 * f(r)),
                        d1: Arc::new(move |r| 3.7 * d(r)),
                        d2: None,
                    }
                },
                minus: {
                    let f = minus.f.clone();
                    let d = minus.d1.clone();
                    RadialFn {
                        f: Arc::new(move |r| 3.7 * f(r)),
                        d1: Arc::new(move |r| 3.7 * d(r)),
                        d2: None,
                    }
                },
            },
            _ => unreachable!(),
        };
        let g1 = eng.rayleigh_g(&phi).unwrap();
        let g2 = eng.rayleigh_g(&scaled).unwrap();
        assert_abs_diff_eq!(g1, g2, epsilon = 1e-12);
        // F is a quadratic form
        let f1 = eng.second_variation_profile(&phi).unwrap();
        let f2 = eng.second_variation_profile(&scaled).unwrap();
        assert_abs_diff_eq!(f2, 3.7 * 3.7 * f1, epsilon = 1e-10 * f1.abs().max(1.0));
    }

    #[test]
    fn frozen_value_zero_mean_rho_n2() {
        // oracle value computed with an independent quadrature before build
        let eng = VariationalEngine::new(2);
        let phi = SurfaceTestFunction::even(RadialFn::new(|r| r, |_| 1.0));
        let proj = eng.zero_mean_project(&phi).unwrap();
        let f = eng.second_variation_profile(&proj).unwrap();
        assert_abs_diff_eq!(f, 0.9241093659300954, epsilon = 1e-9);
        assert!(f > 0.0);
        let g = eng.rayleigh_g(&proj).unwrap();
        assert_abs_diff_eq!(g, 3.8230911996903783, epsilon = 1e-9);
    }

    #[test]
    fn isoperimetric_values() {
        let grid = RadialGrid::new(400, RadialScheme::SineSubstituted);
        // n=1: sigma = pi^2/2, vol = 3 pi^2/16
        assert_abs_diff_eq!(sigma_dilated(1, 1.0, &grid).unwrap(), PI * PI / 2.0, epsilon = 1e-11);
        assert_abs_diff_eq!(
            volume_dilated(1, 1.0, &grid).unwrap(),
            3.0 * PI * PI / 16.0,
            epsilon = 1e-11
        );
        let j1 = isoperimetric_j(1, 1.0, &grid).unwrap();
        let expected = (PI * PI / 2.0) / (3.0 * PI * PI / 16.0f64).powf(0.75);
        assert_abs_diff_eq!(j1, expected, epsilon = 1e-10);
        // dilation invariance
        for &s in &[0.5, 2.0] {
            assert_abs_diff_eq!(isoperimetric_j(1, s, &grid).unwrap(), j1, epsilon = 1e-10);
        }
        // criticality for n = 1 and 2
        for n in [1usize, 2] {
            assert_abs_diff_eq!(criticality_residual(n, &grid).unwrap(), 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn green_formula_residuals() {
        let eng = VariationalEngine::new(2);
        let phi = SurfaceTestFunction::odd(batteries::bump_fn(0.2, 0.8));
        let psi = SurfaceTestFunction::odd(batteries::bump_fn(0.3, 0.85));
        let res = green_residuals(&eng, &phi, &psi, (0.2, 0.85)).unwrap();
        for (k, r) in res.iter().enumerate() {
            assert!(r.abs() < 1e-8, "green residual {k} = {r}");
        }
        // zero functions: all zero
        let zero = SurfaceTestFunction::odd(RadialFn::new(|_| 0.0, |_| 0.0).with_d2(|_| 0.0));
        let res = green_residuals(&eng, &zero, &zero, (0.2, 0.8)).unwrap();
        assert!(res.iter().all(|r| r.abs() < 1e-14));
        // support touching the poles rejected
        assert!(green_residuals(&eng, &phi, &psi, (0.0, 0.8)).is_err());
    }

    #[test]
    fn appendix_b_identities() {
        for n in [2usize, 3] {
            let eng = VariationalEngine::new(n);
            let (lhs, rhs, _) = necessary_condition_check(&eng).unwrap();
            assert!(
                (lhs - rhs).abs() <= 1e-6 * lhs.abs(),
                "n = {n}: lhs = {lhs}, rhs = {rhs}"
            );
            let mio = lemma_mio_check(&eng).unwrap();
            assert!(mio.abs() <= 1e-8, "n = {n}: mio = {mio}");
        }
        let eng1 = VariationalEngine::new(1);
        assert!(matches!(
            necessary_condition_check(&eng1),
            Err(VariationalError::Quadrature(QuadError::NotIntegrable { n: 1, .. }))
        ));
        assert!(lemma_mio_check(&eng1).is_err());
    }

    #[test]
    fn local_stability_and_log_substitution() {
        for n in [2usize, 3] {
            let eng = VariationalEngine::new(n);
            let phi = batteries::bump_fn(0.2, 0.8);
            let v = local_stability_check(
                &eng,
                (0.2, 0.8),
                &phi,
                LocalStabilityKind::SingleHemisphere,
            )
            .unwrap();
            assert!(v >= -1e-10, "zxc2 value {v}");
            // kappa certificate
            let kap = crate::spectral::kappa_c2(Hemisphere::Upper);
            for &rho in &[0.2, 0.5, 0.9] {
                let r = log_substitution_residual(
                    &eng,
                    &kap,
                    -(2.0 * n as f64 - 2.0) / (rho * rho),
                    rho,
                )
                .unwrap();
                assert_abs_diff_eq!(r, 0.0, epsilon = 1e-10);
            }
            // outer band: support precondition
            let thr = ((2.0 * n as f64 - 3.0) / (2.0 * n as f64 - 2.0)).sqrt();
            let phi_band = batteries::bump_fn(thr + 0.01, 0.99);
            let v = local_stability_check(
                &eng,
                (thr + 0.01, 0.99),
                &phi_band,
                LocalStabilityKind::OuterBand,
            )
            .unwrap();
            assert!(v >= -1e-10, "zxc3 value {v}");
            assert!(local_stability_check(
                &eng,
                (thr - 0.2, 0.9),
                &phi_band,
                LocalStabilityKind::OuterBand
            )
            .is_err());
            // zxc3 certificate residual
            let c = (2.0 * n as f64 - 2.0) / (2.0 * n as f64 - 3.0);
            let psi = crate::spectral::RadialClosure {
                f: Box::new(move |r| c - 1.0 / (r * r)),
                df: Box::new(|r| 2.0 / (r * r * r)),
                ddf: Box::new(|r| -6.0 / (r * r * r * r)),
            };
            let rho = 0.95;
            let r = log_substitution_residual(
                &eng,
                &psi,
                -2.0 * (2.0 * n as f64 - 3.0) / (rho * rho),
                rho,
            )
            .unwrap();
            assert_abs_diff_eq!(r, 0.0, epsilon = 1e-10);
        }
        // constant psi: residual = |q|
        let eng = VariationalEngine::new(2);
        let one = crate::spectral::RadialClosure {
            f: Box::new(|_| 2.0),
            df: Box::new(|_| 0.0),
            ddf: Box::new(|_| 0.0),
        };
        let q = -3.0;
        let r = log_substitution_residual(&eng, &one, q, 0.5).unwrap();
        assert_abs_diff_eq!(r.abs(), q.abs());
        // non-positive psi rejected
        let neg = crate::spectral::RadialClosure {
            f: Box::new(|_| -1.0),
            df: Box::new(|_| 0.0),
            ddf: Box::new(|_| 0.0),
        };
        assert!(log_substitution_residual(&eng, &neg, q, 0.5).is_err());
    }

    #[test]
    fn integration_by_parts_consistency() {
        // F(phi) = -int phi (L phi + (2n-2)/rho^2 phi) sigma for compact radial phi
        for n in [2usize, 3] {
            let eng = VariationalEngine::new(n);
            let bump = batteries::bump_fn(0.25, 0.75);
            let phi = SurfaceTestFunction::odd(bump);
            let f_direct = eng.second_variation_profile(&phi).unwrap();
            let coeff = 2.0 * n as f64 - 2.0;
            let (plus, minus) = match &phi {
                SurfaceTestFunction::RadialPair { plus, minus } => (plus, minus),
                _ => unreachable!(),
            };
            let f_parts = -eng
                .sigma_integral_radial(|rho, hemi| {
                    let f = match hemi {
                        Hemisphere::Upper => plus,
                        Hemisphere::Lower => minus,
                    };
                    f.value(rho) * (l_radial(n, f, rho) + coeff / (rho * rho) * f.value(rho))
                })
                .unwrap();
            assert!(
                (f_direct - f_parts).abs() <= 1e-7 * (1.0 + f_direct.abs()),
                "n = {n}: direct {f_direct} vs parts {f_parts}"
            );
        }
    }

    #[test]
    fn potential_identity_pointwise() {
        for n in [1usize, 2, 3] {
            let eng = VariationalEngine::new(n);
            for &rho in &[0.1, 0.4, 0.7, 0.95] {
                assert_abs_diff_eq!(eng.potential_residual(rho), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn battery_report() {
        let eng = VariationalEngine::new(2);
        let mut battery = batteries::legendre(6);
        battery.extend(batteries::bumps(6));
        battery.extend(batteries::trig(6));
        battery.push(("kappa".into(), SurfaceTestFunction::kappa()));
        let report = run_stability_battery(&eng, battery, 1e-8).unwrap();
        assert!(report.nonnegative, "min = {}", report.min_value);
        // Rayleigh quotients stay above the first radial eigenvalue 2n-2
        let g_min = report
            .entries
            .iter()
            .filter_map(|e| e.g_value)
            .fold(f64::INFINITY, f64::min);
        assert!(g_min >= 2.0 * 2.0 - 2.0 - 1e-6, "min G = {g_min}");
        // constraints near zero after projection
        for e in &report.entries {
            assert!(
                e.constraints.0.abs() <= 1e-8 * (1.0 + e.l2_norm_sq.sqrt()),
                "{}: mean {}",
                e.id,
                e.constraints.0
            );
        }
    }

    #[test]
    fn n1_second_variation_is_dirichlet_energy() {
        let eng = VariationalEngine::new(1);
        let mut battery = batteries::full_n1(8);
        battery.extend(batteries::legendre(4));
        let report = run_stability_battery(&eng, battery, 1e-8).unwrap();
        assert!(report.nonnegative);
        // F = int |grad|^2 >= 0 with zero potential: check one field explicitly
        let phi = eng
            .zero_mean_project(&batteries::full_n1(3).pop().unwrap().1)
            .unwrap();
        let f = eng.second_variation_profile(&phi).unwrap();
        let grad_only = eng
            .sigma_integral_full(|rho, th, hemi| eng.grad_sq(&phi, rho, th, hemi))
            .unwrap();
        assert_abs_diff_eq!(f, grad_only, epsilon = 1e-12);
        assert!(f >= 0.0);
    }
}
