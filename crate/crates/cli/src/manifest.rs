//! Run manifest written next to the CSV outputs.

use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Serialize)]
pub struct Lcg {
    pub multiplier: u64,
    pub increment: u64,
    pub modulus: &'static str,
    pub seeding: &'static str,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub program: &'static str,
    pub version: &'static str,
    pub core_version: &'static str,
    pub subcommand: String,
    /// `ok`, `violation` or `error`.
    pub status: String,
    pub config: BTreeMap<String, String>,
    pub timings_seconds: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub normalizations: BTreeMap<String, String>,
    pub lcg: Lcg,
    pub outputs: Vec<String>,
    pub summary: Vec<String>,
    pub violations: Vec<String>,
    pub metrics: BTreeMap<String, serde_json::Value>,
    pub error: Option<String>,
}

pub fn lcg() -> Lcg {
    Lcg {
        multiplier: mpvlasov_core::corpus::LCG_MULTIPLIER,
        increment: mpvlasov_core::corpus::LCG_INCREMENT,
        modulus: "2^64",
        seeding: "state = seed, advanced once before the first draw",
    }
}

pub fn normalizations() -> BTreeMap<String, String> {
    [
        ("vlasov", "df/dt = e phi' df/dp - (p/m) df/dq = {h, f}, h = p^2/2m + e phi"),
        ("poisson", "phi'' = -e (rho - rho_bar), phi zero-mean, rho = int f dp"),
        ("energy", "E = int int p^2/(2m) f dq dp + 1/2 int (phi')^2 dq"),
        ("initial_f", "(1 + alpha cos(k q)) exp(-p^2/2) / sqrt(2 pi), k = 2 pi mode / L"),
        ("initial_pi", "Pi_q = alpha sin(k q) G(p), Pi_p = (1 + alpha cos(k q)) G(p), G unit Gaussian"),
        ("prescribed_phi", "phi = phi_amp sin(k q)"),
        ("quadrature", "rectangle rule in q, trapezoid rule in p"),
        ("derivatives", "q: scheme (Fourier or periodic FD4); p: FD4 with one-sided closures"),
        ("fluid", "polytropic w(rho) = kappa rho^(gamma-1)/(gamma-1), kappa = 1, gamma = 2"),
        ("fluid_initial", "rho = 1 + alpha cos(k q), M = alpha sin(k q)"),
        ("relative_error", "|a - b| / max(|a|, |b|), 0 when both vanish"),
        ("csv_float", "%.16e"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}
