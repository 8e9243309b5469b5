//! Carnot-Carathéodory geodesics and profile regeneration.
//!
//! The geodesic system is γ' = P_H, P_H' = -P_{2n+1} C P_H, P_{2n+1}' = 0:
//! the horizontal momentum rotates blockwise at rate P_{2n+1}, the projection
//! traces a circle of radius 1/|P_{2n+1}|, and the vertical coordinate sweeps
//! the area of the projected circle.

use crate::error::GeomError;
use crate::heisenberg::{apply_c, GroupContext, HVector, Point};
use crate::profile;

/// State of the geodesic flow: base point, unit horizontal momentum, and the
/// vertical multiplier P_{2n+1}.
#[derive(Debug, Clone)]
pub struct GeodesicState {
    pub gamma: Point,
    pub p_h: HVector,
    pub p_last: f64,
}

impl GeodesicState {
    pub fn new(gamma: Point, p_h: HVector, p_last: f64) -> Self {
        Self { gamma, p_h, p_last }
    }

    /// From the origin with momentum direction p_h (normalized here).
    pub fn from_origin(ctx: &GroupContext, p_h: HVector, p_last: f64) -> Self {
        let norm = p_h.norm();
        Self {
            gamma: ctx.identity(),
            p_h: p_h.scale(1.0 / norm),
            p_last,
        }
    }
}

/// Pole-to-pole facts for a helix of multiplier P_{2n+1}: projected radius,
/// vertical gap, and arclength of one full loop. The vertical gap always
/// measures π r² while the loop arclength is 2π r; both are kept.
#[derive(Debug, Clone, Copy)]
pub struct PoleData {
    pub r: f64,
    pub delta_t: f64,
    pub arc_length: f64,
}

/// Exact solution of the geodesic system at arclength s.
pub fn geodesic_closed_form(state0: &GeodesicState, s: f64) -> GeodesicState {
    let c = state0.p_last;
    let p0 = &state0.p_h.components;
    let z0 = &state0.gamma.z;
    let t0 = state0.gamma.t;
    let dim = p0.len();

    if c == 0.0 {
        // straight horizontal line: z = z0 + s P0, t advances by the contact term
        let z: Vec<f64> = z0.iter().zip(p0).map(|(a, b)| a + s * b).collect();
        let mut twist = 0.0;
        for i in 0..dim / 2 {
            twist += z0[2 * i] * p0[2 * i + 1] - z0[2 * i + 1] * p0[2 * i];
        }
        return GeodesicState::new(
            Point::new(z, t0 + 0.5 * twist * s),
            state0.p_h.clone(),
            c,
        );
    }

    let theta = c * s;
    let (sin_t, cos_t) = theta.sin_cos();
    let cp0 = apply_c(p0);
    // P_H(s) = cos(cs) P0 - sin(cs) C P0
    let p_s: Vec<f64> = p0
        .iter()
        .zip(&cp0)
        .map(|(p, cp)| cos_t * p - sin_t * cp)
        .collect();
    // A(s) P0 with A(s) = (sin(cs)/c) I - ((1 - cos(cs))/c) C
    let a_p0: Vec<f64> = p0
        .iter()
        .zip(&cp0)
        .map(|(p, cp)| sin_t / c * p - (1.0 - cos_t) / c * cp)
        .collect();
    let z: Vec<f64> = z0.iter().zip(&a_p0).map(|(a, b)| a + b).collect();
    // t(s) = t0 + (1/2) <z0^perp, A(s) P0> + (s - sin(cs)/c) / (2c)
    let z0_perp = crate::heisenberg::apply_neg_c(z0);
    let cross: f64 = z0_perp.iter().zip(&a_p0).map(|(a, b)| a * b).sum();
    let t = t0 + 0.5 * cross + (s - sin_t / c) / (2.0 * c);
    GeodesicState::new(Point::new(z, t), HVector::new(p_s), c)
}

fn derivative(state: &GeodesicState) -> (Vec<f64>, f64, Vec<f64>) {
    let p = &state.p_h.components;
    let z = &state.gamma.z;
    // t' = (1/2) <z^perp, P_H>
    let z_perp = crate::heisenberg::apply_neg_c(z);
    let tdot: f64 = 0.5 * z_perp.iter().zip(p).map(|(a, b)| a * b).sum::<f64>();
    // P' = -c C P
    let cp = apply_c(p);
    let pdot: Vec<f64> = cp.iter().map(|v| -state.p_last * v).collect();
    (p.clone(), tdot, pdot)
}

/// Classical RK4 over [0, s] with the given number of steps.
pub fn integrate_rk4(state0: &GeodesicState, s: f64, steps: usize) -> GeodesicState {
    assert!(steps >= 1);
    let h = s / steps as f64;
    let dim = state0.p_h.components.len();
    let mut z = state0.gamma.z.clone();
    let mut t = state0.gamma.t;
    let mut p = state0.p_h.components.clone();
    let c = state0.p_last;

    let stage = |z: &[f64], t: f64, p: &[f64]| -> (Vec<f64>, f64, Vec<f64>) {
        let st = GeodesicState::new(Point::new(z.to_vec(), t), HVector::new(p.to_vec()), c);
        derivative(&st)
    };

    for _ in 0..steps {
        let (k1z, k1t, k1p) = stage(&z, t, &p);
        let z2: Vec<f64> = (0..dim).map(|i| z[i] + 0.5 * h * k1z[i]).collect();
        let p2: Vec<f64> = (0..dim).map(|i| p[i] + 0.5 * h * k1p[i]).collect();
        let (k2z, k2t, k2p) = stage(&z2, t + 0.5 * h * k1t, &p2);
        let z3: Vec<f64> = (0..dim).map(|i| z[i] + 0.5 * h * k2z[i]).collect();
        let p3: Vec<f64> = (0..dim).map(|i| p[i] + 0.5 * h * k2p[i]).collect();
        let (k3z, k3t, k3p) = stage(&z3, t + 0.5 * h * k2t, &p3);
        let z4: Vec<f64> = (0..dim).map(|i| z[i] + h * k3z[i]).collect();
        let p4: Vec<f64> = (0..dim).map(|i| p[i] + h * k3p[i]).collect();
        let (k4z, k4t, k4p) = stage(&z4, t + h * k3t, &p4);
        for i in 0..dim {
            z[i] += h / 6.0 * (k1z[i] + 2.0 * k2z[i] + 2.0 * k3z[i] + k4z[i]);
            p[i] += h / 6.0 * (k1p[i] + 2.0 * k2p[i] + 2.0 * k3p[i] + k4p[i]);
        }
        t += h / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
    }
    GeodesicState::new(Point::new(z, t), HVector::new(p), c)
}

/// Locate the first return of the projected radius to zero by RK4 marching
/// plus bisection on <z, P_H> (the derivative of |z|²/2), and report the
/// measured pole facts. The integrator, not the closed form, is the oracle.
pub fn pole_data(ctx: &GroupContext, p_last: f64) -> Result<PoleData, GeomError> {
    if p_last == 0.0 {
        return Err(GeomError::StraightLineGeodesic);
    }
    let mut p0 = HVector::zeros(ctx.n());
    p0.components[0] = 1.0;
    let start = GeodesicState::from_origin(ctx, p0, p_last);

    // single stored march past the full loop
    let guess_period = 2.0 * std::f64::consts::PI / p_last.abs();
    let coarse_steps: usize = 8192;
    let h = 1.25 * guess_period / coarse_steps as f64;
    let radial_speed =
        |st: &GeodesicState| -> f64 { st.gamma.z.iter().zip(&st.p_h.components).map(|(a, b)| a * b).sum() };
    let mut states = Vec::with_capacity(coarse_steps + 1);
    states.push(start.clone());
    for _ in 0..coarse_steps {
        let next = integrate_rk4(states.last().unwrap(), h, 1);
        states.push(next);
    }

    // bracket the minus-to-plus crossing of <z, P_H> past the half loop
    let mut bracket = None;
    for k in 1..=coarse_steps {
        let s = k as f64 * h;
        if s < 0.6 * guess_period {
            continue;
        }
        if radial_speed(&states[k - 1]) < 0.0 && radial_speed(&states[k]) >= 0.0 {
            bracket = Some(k - 1);
            break;
        }
    }
    let k0 = bracket.ok_or(GeomError::StraightLineGeodesic)?;
    let base = &states[k0];
    let (mut lo, mut hi) = (0.0, h);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let st = integrate_rk4(base, mid, 32);
        if radial_speed(&st) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    let s_star = k0 as f64 * h + 0.5 * (lo + hi);
    let end = integrate_rk4(base, 0.5 * (lo + hi), 64);

    // projected circle radius = half the diameter, measured at the half loop
    let k_half = ((0.5 * s_star) / h).floor() as usize;
    let mid_state = integrate_rk4(&states[k_half], 0.5 * s_star - k_half as f64 * h, 64);
    Ok(PoleData {
        r: 0.5 * mid_state.gamma.rho(),
        delta_t: (end.gamma.t - start.gamma.t).abs(),
        arc_length: s_star,
    })
}

/// Sample the pole-to-pole minimizing arc as a radial graph (ρ, t), recentred
/// so the barycentre sits at t = 0.
pub fn generate_profile(
    ctx: &GroupContext,
    p_last: f64,
    samples: usize,
) -> Result<Vec<(f64, f64)>, GeomError> {
    if p_last == 0.0 {
        return Err(GeomError::StraightLineGeodesic);
    }
    assert!(samples >= 2);
    let pd = pole_data(ctx, p_last)?;
    let mut p0 = HVector::zeros(ctx.n());
    p0.components[0] = 1.0;
    let start = GeodesicState::from_origin(ctx, p0, p_last);
    let t_mid = {
        let end = geodesic_closed_form(&start, pd.arc_length);
        0.5 * (end.gamma.t + start.gamma.t)
    };
    let mut out = Vec::with_capacity(samples);
    for k in 0..samples {
        let s = pd.arc_length * k as f64 / (samples - 1) as f64;
        let st = geodesic_closed_form(&start, s);
        out.push((st.gamma.rho(), st.gamma.t - t_mid));
    }
    Ok(out)
}

/// Evaluate the recentred profile height at the same stations as `generate_profile`
/// from the closed form u0, for cross-checks: the P_{2n+1} = 2 arc is the unit
/// profile and general multipliers are its dilates.
pub fn profile_reference_height(p_last: f64, rho: f64, t: f64) -> Result<f64, GeomError> {
    let scale = 2.0 / p_last.abs(); // delta_{scale} of the unit profile
    let rho_unit = rho / scale;
    let u = profile::u0(rho_unit.min(1.0))?;
    let sign = if t >= 0.0 { 1.0 } else { -1.0 };
    Ok(sign * u * scale * scale)
}
