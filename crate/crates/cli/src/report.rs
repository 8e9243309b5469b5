//! JSON report shapes. Every report embeds the crate version, the resolved
//! run configuration, and the tolerances used, so output files are
//! self-describing (see docs/schemas.md).

use serde::Serialize;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct RunMeta {
    pub version: String,
    pub n: usize,
    pub tolerance: f64,
    pub threads: usize,
}

impl RunMeta {
    pub fn new(n: usize, tolerance: f64, threads: usize) -> Self {
        Self {
            version: VERSION.to_string(),
            n,
            tolerance,
            threads,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    /// "pass", "fail" or "excluded: <reason>".
    pub status: String,
    pub value: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl CheckResult {
    pub fn pass_fail(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            status: if value.abs() <= tolerance {
                "pass".into()
            } else {
                "fail".into()
            },
            value,
            tolerance,
            detail: String::new(),
        }
    }

    pub fn condition(name: &str, ok: bool, value: f64, tolerance: f64, detail: &str) -> Self {
        Self {
            name: name.to_string(),
            status: if ok { "pass".into() } else { "fail".into() },
            value,
            tolerance,
            detail: detail.to_string(),
        }
    }

    pub fn excluded(name: &str, reason: &str) -> Self {
        Self {
            name: name.to_string(),
            status: format!("excluded: {reason}"),
            value: f64::NAN,
            tolerance: f64::NAN,
            detail: String::new(),
        }
    }

    pub fn failed(&self) -> bool {
        self.status == "fail"
    }
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub meta: RunMeta,
    pub checks: Vec<CheckResult>,
    pub all_pass: bool,
}

#[derive(Debug, Serialize)]
pub struct EigenReport {
    pub meta: RunMeta,
    pub mesh: MeshInfo,
    pub dropped_kernel: usize,
    pub eigenvalues: Vec<f64>,
    pub parities: Vec<String>,
    pub residuals: Vec<f64>,
    /// Per eigenfunction: [∫φσ, ∫(φ/ρ²)σ].
    pub constraints: Vec<[f64; 2]>,
    pub kappa_similarity_lowest: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeshInfo {
    pub elements: usize,
    pub rho_min: f64,
    pub rho_max: f64,
}

#[derive(Debug, Serialize)]
pub struct FrobeniusReport {
    pub meta: RunMeta,
    pub m: i64,
    pub mu: f64,
    pub coefficients: Vec<f64>,
    pub candidates: Vec<CandidateRow>,
}

#[derive(Debug, Serialize)]
pub struct CandidateRow {
    pub m: usize,
    pub mu: f64,
    pub admissible: bool,
}

#[derive(Debug, Serialize)]
pub struct VariationReport {
    pub meta: RunMeta,
    pub phi: String,
    pub parity: String,
    pub f_value: f64,
    pub g_value: Option<f64>,
    /// [∫φσ, ∫(φ/ρ²)σ] after zero-mean projection.
    pub constraints: [f64; 2],
}

#[derive(Debug, Serialize)]
pub struct StabilityJson {
    pub meta: RunMeta,
    pub family: String,
    pub tests: Vec<StabilityTestJson>,
    pub min: f64,
    /// "nonnegative" or "violation found".
    pub verdict: String,
}

#[derive(Debug, Serialize)]
pub struct StabilityTestJson {
    pub id: String,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "G")]
    pub g: Option<f64>,
    pub constraints: [f64; 2],
}

/// Write rows as comma-separated values with a mandatory header, `.` decimal
/// point, full round-trip float formatting.
pub fn write_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
