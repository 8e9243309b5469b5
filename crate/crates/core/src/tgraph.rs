//! Generic T-graphs t = u(z): pointwise geometry, characteristic loci, the
//! divergence-form mean curvature, and the T-variation integrals.
//!
//! All formulas are driven by the planar field F = -grad u + z^⊥/2 with
//! N = |F|: the unit normal is (F, 1)/sqrt(1+N²), the horizontal normal F/N,
//! ϖ = 1/N, and the H-perimeter density against dz is N itself.

use crate::error::{GeomError, QuadError};
use crate::heisenberg::{apply_neg_c, HVector};
use crate::quadrature::{self, pairwise_sum, DiskGrid};
use nalgebra::DMatrix;

/// Planar domain of a T-graph.
#[derive(Debug, Clone)]
pub enum Domain {
    /// Disk of the given radius centred at the origin.
    Disk { radius: f64 },
    /// Axis-aligned box [lo_k, hi_k] per coordinate.
    Rect { lo: Vec<f64>, hi: Vec<f64> },
}

impl Domain {
    pub fn contains(&self, z: &[f64]) -> bool {
        match self {
            Domain::Disk { radius } => {
                z.iter().map(|c| c * c).sum::<f64>().sqrt() < *radius
            }
            Domain::Rect { lo, hi } => z
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(c, (l, h))| c > l && c < h),
        }
    }
}

/// Access to the height function and its derivatives.
pub trait HeightField: Sync {
    fn dim(&self) -> usize;
    fn value(&self, z: &[f64]) -> f64;
    fn gradient(&self, z: &[f64]) -> Vec<f64>;
    fn hessian(&self, z: &[f64]) -> DMatrix<f64>;
    /// True when derivatives come from closed-form callables.
    fn is_analytic(&self) -> bool;
    /// Step at which finite differences of this field make sense.
    fn natural_step(&self) -> Option<f64> {
        None
    }
}

pub type ScalarField = Box<dyn Fn(&[f64]) -> f64 + Sync + Send>;
pub type VectorField = Box<dyn Fn(&[f64]) -> Vec<f64> + Sync + Send>;
pub type MatrixField = Box<dyn Fn(&[f64]) -> DMatrix<f64> + Sync + Send>;

/// Height function with closed-form gradient and Hessian.
pub struct AnalyticField {
    pub dim: usize,
    pub f: ScalarField,
    pub grad: VectorField,
    pub hess: MatrixField,
}

impl HeightField for AnalyticField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, z: &[f64]) -> f64 {
        (self.f)(z)
    }
    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        (self.grad)(z)
    }
    fn hessian(&self, z: &[f64]) -> DMatrix<f64> {
        (self.hess)(z)
    }
    fn is_analytic(&self) -> bool {
        true
    }
}

/// Height function known only through point values; derivatives by centered
/// finite differences with step h.
pub struct FdField {
    pub dim: usize,
    pub h: f64,
    pub f: ScalarField,
}

impl HeightField for FdField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, z: &[f64]) -> f64 {
        (self.f)(z)
    }
    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        // fourth-order stencil: the divergence-form curvature differentiates
        // this again, so second-order truncation would dominate the result
        let mut g = vec![0.0; self.dim];
        let mut zp = z.to_vec();
        let h = self.h;
        for k in 0..self.dim {
            let mut at = |offset: f64| {
                zp[k] = z[k] + offset;
                let v = (self.f)(&zp);
                zp[k] = z[k];
                v
            };
            let (p1, m1, p2, m2) = (at(h), at(-h), at(2.0 * h), at(-2.0 * h));
            g[k] = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
        }
        g
    }
    fn hessian(&self, z: &[f64]) -> DMatrix<f64> {
        let d = self.dim;
        let h = self.h;
        let mut m = DMatrix::zeros(d, d);
        let f0 = (self.f)(z);
        let mut zp = z.to_vec();
        for i in 0..d {
            zp[i] = z[i] + h;
            let fp = (self.f)(&zp);
            zp[i] = z[i] - h;
            let fm = (self.f)(&zp);
            zp[i] = z[i];
            m[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
            for j in (i + 1)..d {
                zp[i] = z[i] + h;
                zp[j] = z[j] + h;
                let fpp = (self.f)(&zp);
                zp[j] = z[j] - h;
                let fpm = (self.f)(&zp);
                zp[i] = z[i] - h;
                let fmm = (self.f)(&zp);
                zp[j] = z[j] + h;
                let fmp = (self.f)(&zp);
                zp[i] = z[i];
                zp[j] = z[j];
                let v = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }
    fn is_analytic(&self) -> bool {
        false
    }
    fn natural_step(&self) -> Option<f64> {
        Some(self.h)
    }
}

/// Uniformly sampled height values on a 2n-dimensional box grid, with centered
/// stencils inside and one-sided fallback on the boundary ring.
pub struct GridField {
    pub lo: Vec<f64>,
    pub spacing: f64,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn from_samples(lo: Vec<f64>, spacing: f64, shape: Vec<usize>, values: Vec<f64>) -> Self {
        assert_eq!(shape.iter().product::<usize>(), values.len());
        assert!(spacing > 0.0);
        Self {
            lo,
            spacing,
            shape,
            values,
        }
    }

    /// Sample an analytic function on a uniform grid over [lo, hi]^d.
    pub fn sample<F: Fn(&[f64]) -> f64>(lo: Vec<f64>, hi: Vec<f64>, per_axis: usize, f: F) -> Self {
        let d = lo.len();
        let spacing = (hi[0] - lo[0]) / (per_axis - 1) as f64;
        let shape = vec![per_axis; d];
        let total: usize = shape.iter().product();
        let mut values = vec![0.0; total];
        let mut idx = vec![0usize; d];
        for (flat, slot) in values.iter_mut().enumerate() {
            let mut rem = flat;
            for k in (0..d).rev() {
                idx[k] = rem % per_axis;
                rem /= per_axis;
            }
            let z: Vec<f64> = (0..d).map(|k| lo[k] + spacing * idx[k] as f64).collect();
            *slot = f(&z);
        }
        Self::from_samples(lo, spacing, shape, values)
    }

    fn nearest_index(&self, z: &[f64]) -> Vec<usize> {
        z.iter()
            .enumerate()
            .map(|(k, c)| {
                let raw = ((c - self.lo[k]) / self.spacing).round();
                (raw.max(0.0) as usize).min(self.shape[k] - 1)
            })
            .collect()
    }

    fn flat(&self, idx: &[usize]) -> usize {
        let mut f = 0;
        for (k, &i) in idx.iter().enumerate() {
            f = f * self.shape[k] + i;
        }
        f
    }

    fn value_at(&self, idx: &[usize]) -> f64 {
        self.values[self.flat(idx)]
    }

    /// True when the node has a full centered stencil in every axis.
    pub fn is_interior(&self, idx: &[usize]) -> bool {
        idx.iter()
            .zip(&self.shape)
            .all(|(&i, &s)| i >= 1 && i + 1 < s)
    }

    pub fn node_coords(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(k, &i)| self.lo[k] + self.spacing * i as f64)
            .collect()
    }
}

impl HeightField for GridField {
    fn dim(&self) -> usize {
        self.shape.len()
    }
    fn value(&self, z: &[f64]) -> f64 {
        self.value_at(&self.nearest_index(z))
    }
    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let idx = self.nearest_index(z);
        let mut g = vec![0.0; d];
        for k in 0..d {
            let mut ip = idx.clone();
            let mut im = idx.clone();
            if idx[k] >= 1 && idx[k] + 1 < self.shape[k] {
                ip[k] += 1;
                im[k] -= 1;
                g[k] = (self.value_at(&ip) - self.value_at(&im)) / (2.0 * self.spacing);
            } else if idx[k] + 1 < self.shape[k] {
                ip[k] += 1;
                g[k] = (self.value_at(&ip) - self.value_at(&idx)) / self.spacing;
            } else {
                im[k] -= 1;
                g[k] = (self.value_at(&idx) - self.value_at(&im)) / self.spacing;
            }
        }
        g
    }
    fn hessian(&self, z: &[f64]) -> DMatrix<f64> {
        let d = self.dim();
        let idx = self.nearest_index(z);
        let h = self.spacing;
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            let mut ip = idx.clone();
            let mut im = idx.clone();
            if idx[i] >= 1 && idx[i] + 1 < self.shape[i] {
                ip[i] += 1;
                im[i] -= 1;
                m[(i, i)] =
                    (self.value_at(&ip) - 2.0 * self.value_at(&idx) + self.value_at(&im)) / (h * h);
            }
            for j in (i + 1)..d {
                if idx[i] >= 1 && idx[i] + 1 < self.shape[i] && idx[j] >= 1 && idx[j] + 1 < self.shape[j]
                {
                    let mut pp = idx.clone();
                    let mut pm = idx.clone();
                    let mut mp = idx.clone();
                    let mut mm = idx.clone();
                    pp[i] += 1;
                    pp[j] += 1;
                    pm[i] += 1;
                    pm[j] -= 1;
                    mp[i] -= 1;
                    mp[j] += 1;
                    mm[i] -= 1;
                    mm[j] -= 1;
                    let v = (self.value_at(&pp) - self.value_at(&pm) - self.value_at(&mp)
                        + self.value_at(&mm))
                        / (4.0 * h * h);
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
        }
        m
    }
    fn is_analytic(&self) -> bool {
        false
    }
    fn natural_step(&self) -> Option<f64> {
        Some(self.spacing)
    }
}

/// A T-graph: domain plus height field.
pub struct TGraph {
    pub domain: Domain,
    pub u: Box<dyn HeightField>,
    /// Characteristic threshold: 1e-8 (1 + sup |grad u|), estimated on a sample.
    pub epsilon: f64,
}

impl TGraph {
    pub fn new(domain: Domain, u: Box<dyn HeightField>) -> Self {
        let sup_grad = estimate_sup_gradient(&domain, u.as_ref());
        Self {
            domain,
            u,
            epsilon: 1e-8 * (1.0 + sup_grad),
        }
    }

    /// F = -grad u + z^⊥/2 and its norm.
    pub fn horizontal_field(&self, z: &[f64]) -> (Vec<f64>, f64) {
        let g = self.u.gradient(z);
        let zp = apply_neg_c(z);
        let f: Vec<f64> = g.iter().zip(&zp).map(|(gi, zi)| -gi + 0.5 * zi).collect();
        let n = f.iter().map(|c| c * c).sum::<f64>().sqrt();
        (f, n)
    }
}

fn estimate_sup_gradient(domain: &Domain, u: &dyn HeightField) -> f64 {
    // coarse deterministic sample of the domain
    let d = u.dim();
    let probe: Vec<Vec<f64>> = match domain {
        Domain::Disk { radius } => {
            let mut pts = Vec::new();
            for i in 1..8 {
                let r = radius * i as f64 / 8.5;
                for j in 0..8 {
                    let th = std::f64::consts::TAU * j as f64 / 8.0;
                    let mut z = vec![0.0; d];
                    z[0] = r * th.cos();
                    if d > 1 {
                        z[1] = r * th.sin();
                    }
                    pts.push(z);
                }
            }
            pts
        }
        Domain::Rect { lo, hi } => {
            let mut pts = Vec::new();
            for i in 1..8 {
                let f = i as f64 / 8.0;
                pts.push(
                    lo.iter()
                        .zip(hi)
                        .map(|(l, h)| l + f * (h - l))
                        .collect::<Vec<f64>>(),
                );
            }
            pts
        }
    };
    probe
        .iter()
        .map(|z| {
            u.gradient(z)
                .iter()
                .map(|c| c * c)
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

/// Pointwise geometry of the graph at an interior non-characteristic point:
/// Riemannian unit normal, unit horizontal normal, |P_H ν|, ϖ, and the
/// H-perimeter density against dz.
pub struct GeometryFields {
    pub nu: Vec<f64>,
    pub nu_h: HVector,
    pub p_norm: f64,
    pub varpi: f64,
    pub sigma_h_density: f64,
}

pub fn geometry_fields(g: &TGraph, z: &[f64]) -> Result<GeometryFields, GeomError> {
    let (f, n) = g.horizontal_field(z);
    if n <= g.epsilon {
        return Err(GeomError::CharacteristicPoint {
            norm: n,
            threshold: g.epsilon,
        });
    }
    let denom = (1.0 + n * n).sqrt();
    let mut nu: Vec<f64> = f.iter().map(|c| c / denom).collect();
    nu.push(1.0 / denom);
    Ok(GeometryFields {
        nu,
        nu_h: HVector::new(f.iter().map(|c| c / n).collect()),
        p_norm: n / denom,
        varpi: 1.0 / n,
        sigma_h_density: n,
    })
}

/// Points of a grid where |grad u - z^⊥/2| drops below the threshold.
#[derive(Debug, Clone)]
pub struct CharacteristicLocus {
    pub points: Vec<Vec<f64>>,
    pub epsilon: f64,
}

pub fn characteristic_locus(g: &TGraph, grid: &GridField) -> CharacteristicLocus {
    let mut points = Vec::new();
    let d = grid.dim();
    let total: usize = grid.shape.iter().product();
    let mut idx = vec![0usize; d];
    for flat in 0..total {
        let mut rem = flat;
        for k in (0..d).rev() {
            idx[k] = rem % grid.shape[k];
            rem /= grid.shape[k];
        }
        if !grid.is_interior(&idx) {
            continue;
        }
        let z = grid.node_coords(&idx);
        if !g.domain.contains(&z) {
            continue;
        }
        let (_, n) = g.horizontal_field(&z);
        if n < g.epsilon {
            points.push(z);
        }
    }
    CharacteristicLocus {
        points,
        epsilon: g.epsilon,
    }
}

/// Horizontal mean curvature H = -div(F/|F|). Analytic fields expand the
/// divergence through the Hessian; sampled fields use a finite-difference
/// divergence of the normalized field.
pub fn mean_curvature(g: &TGraph, z: &[f64]) -> Result<f64, GeomError> {
    let (f, n) = g.horizontal_field(z);
    if n <= g.epsilon {
        return Err(GeomError::CharacteristicPoint {
            norm: n,
            threshold: g.epsilon,
        });
    }
    if g.u.is_analytic() {
        // div F = -Δu, <F, J_F F> = -F^T Hess(u) F, so
        // H = Δu/|F| - F^T Hess(u) F / |F|³
        let hess = g.u.hessian(z);
        let lap = hess.trace();
        let mut quad = 0.0;
        for i in 0..f.len() {
            for j in 0..f.len() {
                quad += f[i] * hess[(i, j)] * f[j];
            }
        }
        Ok(lap / n - quad / (n * n * n))
    } else {
        // fourth-order FD divergence of the normalized field
        let d = f.len();
        let h = g.u.natural_step().unwrap_or(1e-5);
        let mut div = 0.0;
        let mut zp = z.to_vec();
        let component = |zp: &mut Vec<f64>, k: usize, offset: f64| {
            zp[k] = z[k] + offset;
            let (fo, no) = g.horizontal_field(zp);
            zp[k] = z[k];
            fo[k] / no
        };
        for k in 0..d {
            let p1 = component(&mut zp, k, h);
            let m1 = component(&mut zp, k, -h);
            let p2 = component(&mut zp, k, 2.0 * h);
            let m2 = component(&mut zp, k, -2.0 * h);
            div += (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
        }
        Ok(-div)
    }
}

/// A planar test function with gradient access.
pub struct PlanarTestFunction {
    pub f: ScalarField,
    pub grad: VectorField,
}

/// First T-variation: -∫ <grad φ, F/|F|> dz over the domain (disk quadrature).
pub fn variation_t_first(
    g: &TGraph,
    phi: &PlanarTestFunction,
    grid: &DiskGrid,
) -> Result<f64, QuadError> {
    let radius = disk_radius(g);
    quadrature::integrate_disk(
        |x, y| {
            let z = [x, y];
            let (f, n) = g.horizontal_field(&z);
            let gp = (phi.grad)(&z);
            -(gp[0] * f[0] + gp[1] * f[1]) / n
        },
        radius,
        grid,
    )
}

/// Second T-variation: ∫ (|grad φ|² |F|² - <F, grad φ>²) / |F|³ dz ≥ 0.
pub fn variation_t_second(
    g: &TGraph,
    phi: &PlanarTestFunction,
    grid: &DiskGrid,
) -> Result<f64, QuadError> {
    let radius = disk_radius(g);
    quadrature::integrate_disk(
        |x, y| {
            let z = [x, y];
            let (f, n) = g.horizontal_field(&z);
            let gp = (phi.grad)(&z);
            let g2: f64 = gp.iter().map(|c| c * c).sum();
            let dot: f64 = f.iter().zip(&gp).map(|(a, b)| a * b).sum();
            (g2 * n * n - dot * dot) / (n * n * n)
        },
        radius,
        grid,
    )
}

fn disk_radius(g: &TGraph) -> f64 {
    match &g.domain {
        Domain::Disk { radius } => *radius,
        Domain::Rect { lo, hi } => {
            // circumscribing radius; variation integrals are used on disks
            lo.iter()
                .zip(hi)
                .map(|(l, h)| l.abs().max(h.abs()))
                .fold(0.0, f64::max)
        }
    }
}

/// Estimate ∫ dz / |F| with a dyadic refinement study; the flag reports
/// whether the last two refinements agree.
pub fn admissibility_condvar2(g: &TGraph) -> (f64, bool) {
    let radius = disk_radius(g);
    let mut prev: Option<f64> = None;
    let mut last = f64::NAN;
    let mut converged = false;
    for level in 0..4 {
        let grid = DiskGrid::new(100 << level, 64 << level);
        let value = quadrature::integrate_disk(
            |x, y| {
                let z = [x, y];
                let (_, n) = g.horizontal_field(&z);
                1.0 / n
            },
            radius,
            &grid,
        );
        match value {
            Ok(v) if v.is_finite() => {
                if let Some(p) = prev {
                    converged = (v - p).abs() <= 1e-6 * (1.0 + v.abs());
                }
                prev = Some(v);
                last = v;
            }
            _ => {
                return (f64::INFINITY, false);
            }
        }
    }
    (last, converged)
}

/// Grid CSV input: header `x,y[,x2,y2,...],u`, uniform spacing required.
pub fn parse_grid_csv(text: &str) -> Result<GridField, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or("empty grid CSV")?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() < 3 || cols.last() != Some(&"u") {
        return Err("grid CSV header must be x,y[,x2,y2,...],u".into());
    }
    let d = cols.len() - 1;
    if d % 2 != 0 {
        return Err("grid CSV needs an even number of coordinate columns".into());
    }
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != d + 1 {
            return Err(format!("row {} has {} fields, expected {}", lineno + 2, fields.len(), d + 1));
        }
        let nums: Result<Vec<f64>, _> = fields.iter().map(|s| s.parse::<f64>()).collect();
        let nums = nums.map_err(|e| format!("row {}: {}", lineno + 2, e))?;
        rows.push((nums[..d].to_vec(), nums[d]));
    }
    if rows.is_empty() {
        return Err("grid CSV has no data rows".into());
    }
    // unique sorted coordinates per axis
    let mut axes: Vec<Vec<f64>> = vec![Vec::new(); d];
    for (z, _) in &rows {
        for (k, &c) in z.iter().enumerate() {
            if !axes[k].iter().any(|&a| (a - c).abs() < 1e-12) {
                axes[k].push(c);
            }
        }
    }
    for ax in &mut axes {
        ax.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    let spacing = axes[0].get(1).map(|&b| b - axes[0][0]).ok_or("grid needs at least 2 nodes per axis")?;
    for ax in &axes {
        if ax.len() < 2 {
            return Err("grid needs at least 2 nodes per axis".into());
        }
        for w in ax.windows(2) {
            if ((w[1] - w[0]) - spacing).abs() > 1e-9 * (1.0 + spacing.abs()) {
                return Err(format!(
                    "non-uniform grid spacing: {} vs {}",
                    w[1] - w[0],
                    spacing
                ));
            }
        }
    }
    let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
    let total: usize = shape.iter().product();
    if total != rows.len() {
        return Err(format!(
            "grid is not complete: {} rows for shape {:?}",
            rows.len(),
            shape
        ));
    }
    let lo: Vec<f64> = axes.iter().map(|ax| ax[0]).collect();
    let mut values = vec![f64::NAN; total];
    for (z, u) in &rows {
        let mut flat = 0;
        for (k, &c) in z.iter().enumerate() {
            let i = ((c - lo[k]) / spacing).round() as usize;
            flat = flat * shape[k] + i;
        }
        values[flat] = *u;
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err("grid has duplicate or missing nodes".into());
    }
    Ok(GridField::from_samples(lo, spacing, shape, values))
}

/// Trapezoid-weight sum of f over interior grid nodes inside the domain,
/// with the boundary ring excluded.
pub fn grid_integral<F: Fn(&[f64]) -> f64>(g: &TGraph, grid: &GridField, f: F) -> f64 {
    let d = grid.dim();
    let total: usize = grid.shape.iter().product();
    let cell = grid.spacing.powi(d as i32);
    let mut idx = vec![0usize; d];
    let mut terms = Vec::new();
    for flat in 0..total {
        let mut rem = flat;
        for k in (0..d).rev() {
            idx[k] = rem % grid.shape[k];
            rem /= grid.shape[k];
        }
        if !grid.is_interior(&idx) {
            continue;
        }
        let z = grid.node_coords(&idx);
        if !g.domain.contains(&z) {
            continue;
        }
        terms.push(f(&z) * cell);
    }
    pairwise_sum(&terms)
}
