//! Subcommand drivers over the core library. Each returns data plus an exit
//! outcome; main() handles serialization paths and process exit codes.

use crate::expr::{self, Expr};
use crate::report::*;
use hiso_core::geodesics;
use hiso_core::heisenberg::{GroupContext, HVector, Point};
use hiso_core::profile::{self, ProfilePoint};
use hiso_core::quadrature::{self, Hemisphere, RadialGrid, RadialScheme};
use hiso_core::nalgebra;
use hiso_core::spectral::{self, Parity, SturmLiouvilleDiscretization};
use hiso_core::tgraph;
use hiso_core::variational::{self, batteries, RadialFn, SurfaceTestFunction, VariationalEngine};

/// Process outcome; main maps these to exit codes 0/1/3 (2 is usage).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    VerificationFailure,
    NonConvergence,
}

fn analytic_sigma(n: usize) -> f64 {
    // |S^{2n-1}| * Wallis integral of rho^{2n}/sqrt(1-rho^2)
    quadrature::sphere_area(n) * wallis(n)
}

fn analytic_volume(n: usize) -> f64 {
    // integration by parts: vol = |S^{2n-1}| W_{n+1} / (2n)
    quadrature::sphere_area(n) * wallis(n + 1) / (2.0 * n as f64)
}

/// ∫₀¹ ρ^{2k} / sqrt(1-ρ²) dρ = (π/2) (2k-1)!!/(2k)!!.
fn wallis(k: usize) -> f64 {
    let mut v = std::f64::consts::FRAC_PI_2;
    for j in 1..=k {
        v *= (2.0 * j as f64 - 1.0) / (2.0 * j as f64);
    }
    v
}

/// Full verification battery for one n.
pub fn run_verify(n: usize, tol: f64, threads: usize) -> (VerifyReport, Outcome) {
    let ctx = GroupContext::new(n).expect("validated by CLI");
    let eng = VariationalEngine::new(n);
    let grid = RadialGrid::new(400, RadialScheme::SineSubstituted);
    let mut checks: Vec<CheckResult> = Vec::new();

    // --- group identities
    {
        let p = Point::new(sample_vec(2 * n, 1), 0.37);
        let q = Point::new(sample_vec(2 * n, 2), -0.81);
        let r = Point::new(sample_vec(2 * n, 3), 0.12);
        let a = ctx
            .group_mul(&ctx.group_mul(&p, &q).unwrap(), &r)
            .unwrap();
        let b = ctx
            .group_mul(&p, &ctx.group_mul(&q, &r).unwrap())
            .unwrap();
        let assoc = a
            .z
            .iter()
            .zip(&b.z)
            .map(|(x, y)| (x - y).abs())
            .fold((a.t - b.t).abs(), f64::max);
        checks.push(CheckResult::pass_fail("group/associativity", assoc, 1e-14));

        let s = 1.37;
        let da = ctx.dilate(s, &ctx.group_mul(&p, &q).unwrap()).unwrap();
        let db = ctx
            .group_mul(&ctx.dilate(s, &p).unwrap(), &ctx.dilate(s, &q).unwrap())
            .unwrap();
        let dil = da
            .z
            .iter()
            .zip(&db.z)
            .map(|(x, y)| (x - y).abs())
            .fold((da.t - db.t).abs(), f64::max);
        checks.push(CheckResult::pass_fail("group/dilation-homomorphism", dil, 1e-14));

        let v = HVector::new(sample_vec(2 * n, 4));
        checks.push(CheckResult::pass_fail(
            "group/j-perp-isometry",
            v.perp().norm() - v.norm(),
            0.0,
        ));
    }

    // --- profile closed forms
    {
        checks.push(CheckResult::pass_fail(
            "profile/u0-at-0",
            profile::u0(0.0).unwrap() - std::f64::consts::PI / 8.0,
            1e-15,
        ));
        checks.push(CheckResult::pass_fail(
            "profile/u0-at-1",
            profile::u0(1.0).unwrap(),
            1e-15,
        ));
        let mut worst = 0.0f64;
        for k in 1..=50 {
            let rho = 0.019 * k as f64;
            let stated = -rho * rho / (2.0 * (1.0 - rho * rho).sqrt());
            worst = worst.max((profile::u0_prime(rho).unwrap() - stated).abs());
        }
        checks.push(CheckResult::pass_fail("profile/u0-derivative", worst, 1e-14));

        let mut worst_ops = 0.0f64;
        for &rho in &[0.25, 0.6, 0.9] {
            let p = ProfilePoint::new(rho, Hemisphere::Upper);
            let ops = profile::assemble_shape_operators(&p, &ctx).unwrap();
            let (b_sq, s_sq, a_sq, _) = profile::curvature_norms(&p, &ctx).unwrap();
            let (gb, gs, ga) = ops.gram_norms();
            worst_ops = worst_ops
                .max((gb - b_sq).abs())
                .max((gs - s_sq).abs())
                .max((ga - a_sq).abs());
        }
        checks.push(CheckResult::pass_fail(
            "profile/shape-operator-gram-norms",
            worst_ops,
            1e-9,
        ));

        let mut worst_id = 0.0f64;
        for &rho in &[0.2, 0.5, 0.8] {
            for hemi in Hemisphere::both() {
                let p = ProfilePoint::new(rho, hemi);
                let (r1, r2) = profile::radial_identity_residuals(&p, &ctx).unwrap();
                worst_id = worst_id.max(r1.abs()).max(r2.abs());
            }
        }
        checks.push(CheckResult::pass_fail(
            "profile/radial-identities",
            worst_id,
            1e-11,
        ));
    }

    // --- T-graph cross-check against the bundle (n = 1 graph machinery)
    if n == 1 {
        let g = u0_graph();
        let mut worst = 0.0f64;
        for &rho in &[0.3, 0.6, 0.85] {
            let z = [rho, 0.0];
            let fields = tgraph::geometry_fields(&g, &z).unwrap();
            let p = ProfilePoint::with_xi(rho, Hemisphere::Upper, vec![1.0, 0.0]);
            let b = profile::bundle(&p, &ctx).unwrap();
            worst = worst
                .max((fields.varpi - b.varpi).abs())
                .max((fields.p_norm - b.p_norm).abs())
                .max((fields.sigma_h_density - b.sigma_h_density).abs());
        }
        checks.push(CheckResult::pass_fail("tgraph/bundle-agreement", worst, 1e-8));
        let mut worst_h = 0.0f64;
        for &rho in &[0.2, 0.5, 0.8] {
            worst_h = worst_h
                .max((tgraph::mean_curvature(&g, &[rho, 0.0]).unwrap() + 2.0).abs());
        }
        checks.push(CheckResult::pass_fail("tgraph/mean-curvature", worst_h, 1e-8));
    }

    // --- geodesics
    {
        let ctx1 = GroupContext::new(1).unwrap();
        let pd = geodesics::pole_data(&ctx1, 2.0).unwrap();
        checks.push(CheckResult::pass_fail(
            "geodesics/delta-t",
            pd.delta_t * 4.0 - std::f64::consts::PI,
            1e-8,
        ));
        checks.push(CheckResult::pass_fail(
            "geodesics/arc-length",
            pd.arc_length * 2.0 - 2.0 * std::f64::consts::PI,
            1e-8,
        ));
        let prof = geodesics::generate_profile(&ctx1, 2.0, 33).unwrap();
        let mut worst = 0.0f64;
        for &(rho, t) in &prof {
            let expected = geodesics::profile_reference_height(2.0, rho, t).unwrap();
            worst = worst.max((t - expected).abs());
        }
        checks.push(CheckResult::pass_fail("geodesics/profile-regeneration", worst, 1e-8));
    }

    // --- quadrature constants
    {
        let sigma = variational::sigma_dilated(n, 1.0, &grid).unwrap();
        let vol = variational::volume_dilated(n, 1.0, &grid).unwrap();
        checks.push(CheckResult::pass_fail(
            "quadrature/sigma-total",
            sigma - analytic_sigma(n),
            1e-10,
        ));
        checks.push(CheckResult::pass_fail(
            "quadrature/volume",
            vol - analytic_volume(n),
            1e-10,
        ));
        checks.push(CheckResult::pass_fail(
            "variational/criticality",
            variational::criticality_residual(n, &grid).unwrap(),
            1e-8,
        ));
    }

    // --- spectral identities
    {
        let mut worst = 0.0f64;
        for &rho in &[0.1, 0.45, 0.9] {
            worst = worst.max(spectral::sturm_liouville_residual(n, rho).abs());
        }
        checks.push(CheckResult::pass_fail(
            "spectral/sturm-liouville-factors",
            worst,
            1e-12,
        ));

        let kap = spectral::kappa_c2(Hemisphere::Upper);
        let mu = 2.0 * n as f64 - 2.0;
        let mut worst_ode = 0.0f64;
        for &rho in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            worst_ode = worst_ode.max(spectral::ode_residual(n, &kap, mu, rho).unwrap().abs());
        }
        checks.push(CheckResult::pass_fail(
            "spectral/kappa-eigenfunction",
            worst_ode,
            1e-10,
        ));

        let sol = spectral::frobenius_series(n.max(2), 1, 2.0 * n.max(2) as f64 - 2.0, 1.0, 0.0, 8)
            .unwrap();
        let frob =
            (sol.a[2] + 0.5).abs().max((sol.a[4] + 0.125).abs()).max((sol.a[6] + 0.0625).abs());
        checks.push(CheckResult::pass_fail("spectral/frobenius-coefficients", frob, 1e-14));

        // moderate-mesh spectrum: lowest constrained eigenvalue near 2n-2
        if n >= 2 {
            let disc = SturmLiouvilleDiscretization::new(n, 1e-3, 1.0 - 1e-7, 2000);
            match spectral::solve_radial_spectrum(&disc, 3) {
                Ok(result) => match result.lowest_constrained(1e-6) {
                    Some(lowest) => {
                        let rel = (lowest.mu - mu) / mu;
                        let cos = spectral::kappa_similarity(&disc, &lowest.values);
                        checks.push(CheckResult::pass_fail("spectral/lowest-eigenvalue", rel, 0.01));
                        checks.push(CheckResult::condition(
                            "spectral/kappa-similarity",
                            cos >= 0.999,
                            cos,
                            0.999,
                            "weighted cosine similarity with kappa",
                        ));
                    }
                    None => checks.push(CheckResult::condition(
                        "spectral/lowest-eigenvalue",
                        false,
                        f64::NAN,
                        0.01,
                        "no constrained eigenpair",
                    )),
                },
                Err(e) => checks.push(CheckResult::condition(
                    "spectral/lowest-eigenvalue",
                    false,
                    f64::NAN,
                    0.01,
                    &format!("{e}"),
                )),
            }
        }
    }

    // --- variational identities
    {
        // kappa lies in the weighted class only for n >= 2 (the admissible
        // Frobenius set m <= n-1 is empty at n = 1 and |grad kappa| leaves
        // L²(σ) at the poles)
        if n >= 2 {
            let kappa = SurfaceTestFunction::kappa();
            let f_kappa = eng.second_variation_profile(&kappa).unwrap();
            let norm = eng.l2_norm_sq(&kappa).unwrap();
            checks.push(CheckResult::pass_fail(
                "variational/kappa-equality-case",
                f_kappa / norm,
                1e-10,
            ));
            let g_kappa = eng.rayleigh_g(&kappa).unwrap();
            checks.push(CheckResult::pass_fail(
                "variational/rayleigh-kappa",
                g_kappa - (2.0 * n as f64 - 2.0),
                1e-10,
            ));
        } else {
            checks.push(CheckResult::excluded(
                "variational/kappa-equality-case",
                "kappa not in the weighted class (n=1)",
            ));
            checks.push(CheckResult::excluded(
                "variational/rayleigh-kappa",
                "kappa not in the weighted class (n=1)",
            ));
        }
        let mut worst_pot = 0.0f64;
        for &rho in &[0.15, 0.5, 0.85] {
            worst_pot = worst_pot.max(eng.potential_residual(rho).abs());
        }
        checks.push(CheckResult::pass_fail(
            "variational/potential-identity",
            worst_pot,
            1e-12,
        ));

        let phi = SurfaceTestFunction::odd(batteries::bump_fn(0.2, 0.8));
        let psi = SurfaceTestFunction::even(batteries::bump_fn(0.3, 0.85));
        let res = variational::green_residuals(&eng, &phi, &psi, (0.2, 0.85)).unwrap();
        let worst_green = res.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        checks.push(CheckResult::pass_fail("variational/green-formulas", worst_green, 1e-8));
    }

    // --- Appendix B (integrable only for n >= 2)
    if n >= 2 {
        let mio = variational::lemma_mio_check(&eng).unwrap();
        checks.push(CheckResult::pass_fail("appendix-b/lemma-mio", mio, 1e-8));
        let (lhs, rhs, _) = variational::necessary_condition_check(&eng).unwrap();
        checks.push(CheckResult::pass_fail(
            "appendix-b/necessary-condition",
            (lhs - rhs) / lhs,
            1e-6,
        ));
    } else {
        checks.push(CheckResult::excluded(
            "appendix-b/lemma-mio",
            "integrability (n=1)",
        ));
        checks.push(CheckResult::excluded(
            "appendix-b/necessary-condition",
            "integrability (n=1)",
        ));
    }

    let all_pass = !checks.iter().any(|c| c.failed());
    let outcome = if all_pass {
        Outcome::Pass
    } else {
        Outcome::VerificationFailure
    };
    (
        VerifyReport {
            meta: RunMeta::new(n, tol, threads),
            checks,
            all_pass,
        },
        outcome,
    )
}

fn sample_vec(len: usize, seed: u64) -> Vec<f64> {
    // deterministic quasi-random values in (-1, 1)
    let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
    (0..len)
        .map(|_| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        })
        .collect()
}

fn u0_graph() -> tgraph::TGraph {
    tgraph::TGraph::new(
        tgraph::Domain::Disk { radius: 1.0 },
        Box::new(tgraph::AnalyticField {
            dim: 2,
            f: Box::new(|z| profile::u0((z[0] * z[0] + z[1] * z[1]).sqrt().min(1.0)).unwrap()),
            grad: Box::new(|z| {
                let rho = (z[0] * z[0] + z[1] * z[1]).sqrt();
                let up = profile::u0_prime(rho).unwrap();
                vec![up * z[0] / rho, up * z[1] / rho]
            }),
            hess: Box::new(|z| {
                let rho = (z[0] * z[0] + z[1] * z[1]).sqrt();
                let up = profile::u0_prime(rho).unwrap();
                let g2 = 1.0 - rho * rho;
                let upp = -(rho * (2.0 - rho * rho)) / (2.0 * g2.powf(1.5));
                let mut m = nalgebra::DMatrix::zeros(2, 2);
                for i in 0..2 {
                    for j in 0..2 {
                        let e = z[i] * z[j] / (rho * rho);
                        m[(i, j)] = upp * e + up / rho * (if i == j { 1.0 } else { 0.0 } - e);
                    }
                }
                m
            }),
        }),
    )
}

pub struct EigenConfig {
    pub n: usize,
    pub elements: usize,
    pub rho_min: f64,
    pub rho_max: f64,
    pub k: usize,
}

/// Report plus eigenfunction samples and the mesh they live on.
pub type EigenOutput = (EigenReport, Vec<Vec<f64>>, Vec<f64>);

pub fn run_eigen(cfg: &EigenConfig, tol: f64, threads: usize) -> Result<EigenOutput, String> {
    let disc =
        SturmLiouvilleDiscretization::new(cfg.n, cfg.rho_min, cfg.rho_max, cfg.elements);
    let result = spectral::solve_radial_spectrum(&disc, cfg.k).map_err(|e| e.to_string())?;
    let lowest_cos = result
        .lowest_constrained(1e-6)
        .map(|p| spectral::kappa_similarity(&disc, &p.values))
        .unwrap_or(f64::NAN);
    let report = EigenReport {
        meta: RunMeta::new(cfg.n, tol, threads),
        mesh: MeshInfo {
            elements: cfg.elements,
            rho_min: cfg.rho_min,
            rho_max: cfg.rho_max,
        },
        dropped_kernel: result.dropped_kernel,
        eigenvalues: result.eigenvalues(),
        parities: result
            .pairs
            .iter()
            .map(|p| {
                match p.parity {
                    Parity::Even => "even",
                    Parity::Odd => "odd",
                }
                .to_string()
            })
            .collect(),
        residuals: result.pairs.iter().map(|p| p.residual).collect(),
        constraints: result
            .pairs
            .iter()
            .map(|p| [p.constraint_integrals.0, p.constraint_integrals.1])
            .collect(),
        kappa_similarity_lowest: lowest_cos,
    };
    let functions = result.pairs.iter().map(|p| p.values.clone()).collect();
    Ok((report, functions, disc.mesh))
}

pub fn run_frobenius(
    n: usize,
    m: i64,
    mu: f64,
    terms: usize,
    tol: f64,
    threads: usize,
) -> Result<FrobeniusReport, String> {
    let sol = spectral::frobenius_series(n, m, mu, 1.0, 0.0, terms).map_err(|e| e.to_string())?;
    Ok(FrobeniusReport {
        meta: RunMeta::new(n, tol, threads),
        m,
        mu,
        coefficients: sol.a,
        candidates: spectral::candidate_mu(n)
            .into_iter()
            .map(|(m, mu, admissible)| CandidateRow { m, mu, admissible })
            .collect(),
    })
}

/// Geodesic trace: closed-form states sampled over one measured loop.
pub fn run_geodesic(n: usize, p_last: f64, samples: usize) -> Result<Vec<Vec<f64>>, String> {
    let ctx = GroupContext::new(n).map_err(|e| e.to_string())?;
    let pd = geodesics::pole_data(&ctx, p_last).map_err(|e| e.to_string())?;
    let mut p0 = HVector::zeros(n);
    p0.components[0] = 1.0;
    let start = geodesics::GeodesicState::from_origin(&ctx, p0, p_last);
    let mut rows = Vec::with_capacity(samples);
    for k in 0..samples {
        let s = pd.arc_length * k as f64 / (samples - 1) as f64;
        let st = geodesics::geodesic_closed_form(&start, s);
        let mut row = vec![s];
        row.extend_from_slice(&st.gamma.z);
        row.push(st.gamma.t);
        row.push(st.gamma.rho());
        row.push(st.gamma.t - start.gamma.t);
        rows.push(row);
    }
    Ok(rows)
}

/// Profile sample export over both hemispheres.
pub fn run_profile_export(n: usize, samples: usize) -> Result<Vec<Vec<f64>>, String> {
    let ctx = GroupContext::new(n).map_err(|e| e.to_string())?;
    let mut rows = Vec::new();
    for hemi in Hemisphere::both() {
        for k in 1..samples {
            let rho = k as f64 / samples as f64;
            let p = ProfilePoint::new(rho, hemi);
            let b = profile::bundle(&p, &ctx).map_err(|e| e.to_string())?;
            let (b_sq, s_sq, a_sq, h) = profile::curvature_norms(&p, &ctx).map_err(|e| e.to_string())?;
            rows.push(vec![
                hemi.sign(),
                rho,
                b.u0 * hemi.sign(),
                b.kappa,
                b.varpi,
                b.sigma_h_density,
                b.p_norm,
                b_sq,
                s_sq,
                a_sq,
                h,
            ]);
        }
    }
    Ok(rows)
}

pub const PROFILE_HEADER: [&str; 11] = [
    "hemisphere",
    "rho",
    "t",
    "kappa",
    "varpi",
    "sigma_h_density",
    "p_norm",
    "b_norm_sq",
    "s_norm_sq",
    "a_norm_sq",
    "h_mean",
];

pub struct TGraphOutput {
    pub rows: Vec<Vec<f64>>,
    pub characteristic_points: usize,
    pub converged: bool,
}

/// Evaluate graph geometry over a sampled grid; expression input for u.
pub fn run_tgraph(u_expr: &Expr, radius: f64, per_axis: usize) -> Result<TGraphOutput, String> {
    if u_expr.uses_theta() {
        return Err("tgraph expressions must be functions of rho only".into());
    }
    let e = u_expr.clone();
    let g = tgraph::TGraph::new(
        tgraph::Domain::Disk { radius },
        Box::new(tgraph::FdField {
            dim: 2,
            h: 1e-4,
            f: Box::new(move |z: &[f64]| {
                let rho = (z[0] * z[0] + z[1] * z[1]).sqrt();
                e.eval(rho, 0.0)
            }),
        }),
    );
    let nodes: Vec<[f64; 2]> = (0..per_axis)
        .flat_map(|i| {
            (0..per_axis).map(move |j| {
                [
                    -radius + 2.0 * radius * i as f64 / (per_axis - 1) as f64,
                    -radius + 2.0 * radius * j as f64 / (per_axis - 1) as f64,
                ]
            })
        })
        .collect();
    tabulate_graph(g, &nodes, true)
}

/// Same evaluation for a sampled height grid loaded from CSV.
pub fn run_tgraph_grid(csv_text: &str) -> Result<TGraphOutput, String> {
    let grid = tgraph::parse_grid_csv(csv_text)?;
    if grid.shape.len() != 2 {
        return Err("tgraph grid mode supports planar (n = 1) grids".into());
    }
    let lo = grid.lo.clone();
    let spacing = grid.spacing;
    let shape = grid.shape.clone();
    let hi: Vec<f64> = lo
        .iter()
        .zip(&shape)
        .map(|(l, s)| l + spacing * (*s as f64 - 1.0))
        .collect();
    let mut nodes = Vec::new();
    for i in 1..shape[0] - 1 {
        for j in 1..shape[1] - 1 {
            nodes.push([
                lo[0] + spacing * i as f64,
                lo[1] + spacing * j as f64,
            ]);
        }
    }
    let g = tgraph::TGraph::new(
        tgraph::Domain::Rect { lo, hi },
        Box::new(grid),
    );
    // the admissibility refinement probe needs a resolvable integrand, which
    // sampled data cannot provide
    tabulate_graph(g, &nodes, false)
}

fn tabulate_graph(
    g: tgraph::TGraph,
    nodes: &[[f64; 2]],
    probe_admissibility: bool,
) -> Result<TGraphOutput, String> {
    let mut rows = Vec::new();
    let mut characteristic = 0usize;
    for z in nodes {
        if !g.domain.contains(z) {
            continue;
        }
        match tgraph::geometry_fields(&g, z) {
            Ok(fields) => {
                let h = tgraph::mean_curvature(&g, z).unwrap_or(f64::NAN);
                rows.push(vec![
                    z[0],
                    z[1],
                    g.u.value(z),
                    fields.nu_h.components[0],
                    fields.nu_h.components[1],
                    fields.p_norm,
                    fields.varpi,
                    fields.sigma_h_density,
                    h,
                ]);
            }
            Err(_) => characteristic += 1,
        }
    }
    let converged = if probe_admissibility {
        tgraph::admissibility_condvar2(&g).1
    } else {
        true
    };
    Ok(TGraphOutput {
        rows,
        characteristic_points: characteristic,
        converged,
    })
}

pub const TGRAPH_HEADER: [&str; 9] = [
    "x", "y", "u", "nu_h_x", "nu_h_y", "p_norm", "varpi", "sigma_h_density", "mean_curvature",
];

/// Evaluate F, G and the constraint integrals for an expression test function.
pub fn run_variation(
    n: usize,
    phi_src: &str,
    parity: &str,
    tol: f64,
    threads: usize,
) -> Result<VariationReport, String> {
    let parsed = expr::parse(phi_src).map_err(|e| e.render(phi_src))?;
    if parsed.uses_theta() && n != 1 {
        return Err("theta-dependent test functions need n = 1".into());
    }
    let eng = VariationalEngine::new(n);
    let phi = build_test_function(&parsed, parity)?;
    let projected = eng.zero_mean_project(&phi).map_err(|e| e.to_string())?;
    let f_value = eng
        .second_variation_profile(&projected)
        .map_err(|e| e.to_string())?;
    let g_value = eng.rayleigh_g(&projected).ok();
    let constraints = [
        eng.integral_sigma(&projected).map_err(|e| e.to_string())?,
        eng.compatibility_integral(&projected)
            .map_err(|e| e.to_string())?,
    ];
    Ok(VariationReport {
        meta: RunMeta::new(n, tol, threads),
        phi: phi_src.to_string(),
        parity: parity.to_string(),
        f_value,
        g_value,
        constraints,
    })
}

/// d/dρ of an expression by a five-point stencil in the substituted variable
/// s = asin(ρ). Functions with sqrt(1-ρ²)-type behaviour are smooth in s, so
/// the stencil stays accurate up to the equator; the cos(s) Jacobian is the
/// stable form of sqrt(1-ρ²).
fn rho_derivative(e: &Expr, r: f64, t: f64) -> f64 {
    let s = r.asin();
    let mut h = 1e-6;
    let margin = (std::f64::consts::FRAC_PI_2 - s).max(1e-300);
    if 2.0 * h > 0.5 * margin {
        h = 0.25 * margin;
    }
    if 2.0 * h > 0.5 * s {
        h = (0.25 * s).max(1e-12);
    }
    let at = |ds: f64| e.eval((s + ds).sin(), t);
    let dphi_ds = (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h);
    dphi_ds / s.cos()
}

/// Expression to a surface test function; derivatives by five-point stencils.
fn build_test_function(parsed: &Expr, parity: &str) -> Result<SurfaceTestFunction, String> {
    let fd = 1e-6;
    if parsed.uses_theta() {
        let e1 = parsed.clone();
        let e2 = parsed.clone();
        let e3 = parsed.clone();
        let component = variational::AngularFn {
            f: std::sync::Arc::new(move |r, t| e1.eval(r, t)),
            d_rho: std::sync::Arc::new(move |r, t| rho_derivative(&e2, r, t)),
            d_theta: std::sync::Arc::new(move |r, t| {
                (e3.eval(r, t + fd) - e3.eval(r, t - fd)) / (2.0 * fd)
            }),
        };
        let mirrored = match parity {
            "even" => component.clone(),
            "odd" => {
                let e4 = parsed.clone();
                let e5 = parsed.clone();
                let e6 = parsed.clone();
                variational::AngularFn {
                    f: std::sync::Arc::new(move |r, t| -e4.eval(r, t)),
                    d_rho: std::sync::Arc::new(move |r, t| -rho_derivative(&e5, r, t)),
                    d_theta: std::sync::Arc::new(move |r, t| {
                        -(e6.eval(r, t + fd) - e6.eval(r, t - fd)) / (2.0 * fd)
                    }),
                }
            }
            other => return Err(format!("unknown parity `{other}` (use even or odd)")),
        };
        return Ok(SurfaceTestFunction::FullN1 {
            plus: component,
            minus: mirrored,
        });
    }
    let e1 = parsed.clone();
    let e2 = parsed.clone();
    let radial = RadialFn::new(
        move |r| e1.eval(r, 0.0),
        move |r| rho_derivative(&e2, r, 0.0),
    );
    match parity {
        "even" => Ok(SurfaceTestFunction::even(radial)),
        "odd" => Ok(SurfaceTestFunction::odd(radial)),
        other => Err(format!("unknown parity `{other}` (use even or odd)")),
    }
}

/// Run a named battery and produce the stability report.
pub fn run_stability(
    n: usize,
    family: &str,
    count: usize,
    tol: f64,
    threads: usize,
) -> Result<(StabilityJson, Outcome), String> {
    let eng = VariationalEngine::new(n);
    let battery = match family {
        "legendre" => batteries::legendre(count),
        "bumps" => batteries::bumps(count),
        "trig" => batteries::trig(count),
        other => return Err(format!("unknown family `{other}` (legendre | bumps | trig)")),
    };
    let report =
        variational::run_stability_battery(&eng, battery, tol).map_err(|e| e.to_string())?;
    let verdict = if report.nonnegative {
        "nonnegative"
    } else {
        "violation found"
    };
    let json = StabilityJson {
        meta: RunMeta::new(n, tol, threads),
        family: family.to_string(),
        tests: report
            .entries
            .iter()
            .map(|e| StabilityTestJson {
                id: e.id.clone(),
                f: e.f_value,
                g: e.g_value,
                constraints: [e.constraints.0, e.constraints.1],
            })
            .collect(),
        min: report.min_value,
        verdict: verdict.to_string(),
    };
    let outcome = if report.nonnegative {
        Outcome::Pass
    } else {
        Outcome::VerificationFailure
    };
    Ok((json, outcome))
}
