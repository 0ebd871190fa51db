//! Identity suite: each exact finite-`N` statement checked against an
//! independent numerical route, with measured residuals.

use serde::{Deserialize, Serialize};

use crate::ensemble::EnsembleParams;
use crate::error::{Error, Result};
use crate::linalg::QuadratureSpec;
use crate::real_kernel::{expected_real_in, expected_real_in_quadrature, RealKernel};
use crate::skew_system::{
    eps_quadrature, line_integral, skew_inner, skew_moment_exact, sum_identities, ChebyshevU, SkewBasis,
};
use crate::specfun::C64;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub n: usize,
    pub s: f64,
    /// Quadrature tolerance of the numerical routes.
    pub tol: f64,
    /// Multiplies `π_index` by `1 + rel` before checking; a sensitivity control.
    pub perturbation: Option<(usize, f64)>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { n: 8, s: 12.0, tol: 1e-11, perturbation: None }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub group: &'static str,
    pub name: String,
    pub residual: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub passed: bool,
    pub max_residual_by_group: Vec<(String, f64)>,
    pub checks: Vec<Check>,
}

struct Collector(Vec<Check>);

impl Collector {
    fn push(&mut self, group: &'static str, name: String, residual: f64, threshold: f64) {
        // NaN residuals fail.
        let passed = residual <= threshold;
        self.0.push(Check { group, name, residual, threshold, passed });
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Residual of a quadrature `q` against a closed form `exact`: relative,
/// falling back to absolute (scaled to the relative threshold) for exact zeros.
fn moment_residual(q: f64, exact: f64) -> f64 {
    if exact == 0.0 {
        q.abs() * 1e-6 / 1e-8
    } else {
        rel(q, exact)
    }
}

/// Runs the suite for an even `N` and `s > N + 1`.
pub fn run(config: &VerifyConfig) -> Result<VerifyReport> {
    let params = EnsembleParams::real(config.n, config.s)?;
    let (n, s) = (config.n, config.s);
    if !(s > n as f64 + 1.0) {
        return Err(Error::InvalidParams(format!("verification needs s > N + 1, got N = {n}, s = {s}")));
    }
    let spec = QuadratureSpec::default().with_tol(config.tol);
    spec.validate()?;
    let mut basis = SkewBasis::new(params)?;
    if let Some((index, r)) = config.perturbation {
        basis = basis.with_perturbation(index, r)?;
    }
    let mut out = Collector(Vec::new());

    // Skew moments of Chebyshev polynomials against the closed form.
    for m in 1..=n {
        for k in 1..=n {
            let q = skew_inner(&params, &ChebyshevU(m - 1), &ChebyshevU(k - 1), &spec)?;
            let exact = skew_moment_exact(s, m, k)?;
            out.push("skew-moment", format!("<U{}|U{}>", m - 1, k - 1), moment_residual(q, exact), 1e-6);
        }
    }

    // Skew-orthonormality of the basis.
    for i in 0..n {
        for j in (i + 1)..n {
            let q = skew_inner(&params, &basis.poly(i)?, &basis.poly(j)?, &spec)?;
            let target = if i % 2 == 0 && j == i + 1 { 1.0 } else { 0.0 };
            out.push("skew-orthonormality", format!("<pi{i}|pi{j}>"), (q - target).abs(), 1e-6);
        }
    }

    // Gegenbauer form against the U-expansion.
    for k in 0..n {
        let mut worst = 0.0f64;
        for i in 0..200 {
            let x = C64::new(-2.5 + 5.0 * i as f64 / 199.0, 0.0);
            let a = basis.skew_poly(k, x)?;
            let b = basis.skew_poly_expansion(k, x)?;
            let scale = a.norm().max(b.norm()).max(1.0);
            worst = worst.max((a - b).norm() / scale);
        }
        out.push("dual-representation", format!("pi{k}"), worst, 1e-10);
    }

    // Gamma-sum identities.
    for k in 0..=6usize {
        for a in [0.3, 1.0, 2.7, k as f64 + 1.0] {
            for c in sum_identities(k, a)?.checks {
                out.push("sum-identity", format!("{} n={k} a={a}", c.name), c.residual, 1e-12);
            }
        }
    }

    // Γ_n against quadrature of φπ_{2n}.
    for k in 0..n / 2 {
        let p = |x: f64| basis.skew_poly(2 * k, C64::new(x, 0.0)).map(|v| v.re).unwrap_or(f64::NAN);
        let q = line_integral(s, &p, 2 * k, config.tol)?;
        out.push("gamma", format!("Gamma_{k}"), rel(q, basis.gamma_n(k)?), 1e-6);
    }

    // ε closed forms (including the interior constant Δ_n at the origin)
    // against direct quadrature, inside, outside, and across the junctions.
    let kernel = RealKernel::from_basis(basis.clone())?;
    let xs = [0.0, -1.3, 0.7, 1.95, 2.3, 3.7, 5.9, -2.6, -4.4];
    for &x in &xs {
        let closed = kernel.eps_all(C64::new(x, 0.0));
        for k in 0..n {
            let p = |t: f64| basis.skew_poly(k, C64::new(t, 0.0)).map(|v| v.re).unwrap_or(f64::NAN);
            let q = eps_quadrature(s, &p, k, x, config.tol)?;
            let group = if x == 0.0 && k % 2 == 1 { "delta" } else { "eps-closed-form" };
            out.push(group, format!("eps(phi pi{k})({x})"), (closed[k].re - q).abs(), 1e-6);
        }
    }
    for x0 in [2.0f64, -2.0] {
        let a = kernel.eps_all(C64::new(x0 * (1.0 - 1e-12), 0.0));
        let b = kernel.eps_all(C64::new(x0 * (1.0 + 1e-12), 0.0));
        let worst = a.iter().zip(&b).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max);
        out.push("eps-junction", format!("x={x0}"), worst, 1e-6);
    }

    // Expected real zeros in [−2, 2]: closed form against quadrature.
    let closed = expected_real_in(&params)?;
    let quad = expected_real_in_quadrature(&kernel, &spec)?.value;
    out.push("expected-real-in", format!("N={n} s={s}"), (closed - quad).abs(), 1e-6);

    let checks = out.0;
    let mut groups: Vec<(String, f64)> = Vec::new();
    for c in &checks {
        match groups.iter_mut().find(|(g, _)| g == c.group) {
            Some((_, m)) => *m = m.max(c.residual),
            None => groups.push((c.group.to_string(), c.residual)),
        }
    }
    Ok(VerifyReport { config: config.clone(), passed: checks.iter().all(|c| c.passed), max_residual_by_group: groups, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let r = run(&VerifyConfig::default()).unwrap();
        let failed: Vec<_> = r.checks.iter().filter(|c| !c.passed).collect();
        assert!(r.passed, "{failed:#?}");
        assert!(r.checks.iter().all(|c| c.residual.is_finite()));
    }

    #[test]
    fn perturbation_breaks_orthonormality() {
        let cfg = VerifyConfig { perturbation: Some((3, 1e-3)), ..VerifyConfig::default() };
        let r = run(&cfg).unwrap();
        assert!(!r.passed);
        assert!(r.checks.iter().any(|c| c.group == "skew-orthonormality" && !c.passed));
        assert!(r.checks.iter().filter(|c| c.group == "skew-moment").all(|c| c.passed));
    }

    #[test]
    fn rejects_bad_config() {
        assert!(run(&VerifyConfig { n: 3, ..VerifyConfig::default() }).is_err());
        assert!(run(&VerifyConfig { n: 8, s: 8.5, ..VerifyConfig::default() }).is_err());
    }
}
