//! Determinantal kernel of the complex ensemble, its correlation functions and
//! expected counts.
//!
//! `K(z, w) = φ(z) φ(w) K̃(z, w)` with
//! `K̃(z, w) = Σ_{n<N} (s² − (n+1)²)/(2πs) · U_n(z) · conj(U_n(w))`.

use std::f64::consts::PI;

use crate::ensemble::{weight_phi, EnsembleParams, Field};
use crate::error::{Error, Result};
use crate::linalg::{
    determinant, exterior_truncation_radius, integrate_exterior_upper, integrate_region, rho_for_radius, QuadResult,
    QuadratureSpec, Region,
};
use crate::specfun::{cheb_u_all, cheb_u_all_scaled, joukowski_phi, C64};

/// Kernel value with the weight product and the polynomial sum kept apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEvaluation {
    pub value: C64,
    pub weight_product: f64,
    pub tilde: C64,
}

/// `(s² − (n+1)²) / (2πs)`.
#[inline]
pub fn kernel_coefficient(s: f64, n: usize) -> f64 {
    let m = (n + 1) as f64;
    (s - m) * (s + m) / (2.0 * PI * s)
}

fn require_complex(params: &EnsembleParams) -> Result<()> {
    if params.field() != Field::Complex {
        return Err(Error::InvalidParams("the determinantal kernel belongs to the complex ensemble".into()));
    }
    Ok(())
}

/// `K̃(z, w)`, the weight-free polynomial part.
pub fn kernel_tilde(params: &EnsembleParams, z: C64, w: C64) -> C64 {
    let s = params.s();
    let n = params.n();
    let uz = cheb_u_all(n, z);
    let uw = if z == w { uz.clone() } else { cheb_u_all(n, w) };
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..n {
        acc += uz[k] * uw[k].conj() * kernel_coefficient(s, k);
    }
    acc
}

pub fn kernel_k(params: &EnsembleParams, z: C64, w: C64) -> Result<KernelEvaluation> {
    require_complex(params)?;
    let tilde = kernel_tilde(params, z, w);
    let weight_product = weight_phi(params.s(), z) * weight_phi(params.s(), w);
    Ok(KernelEvaluation { value: tilde * weight_product, weight_product, tilde })
}

/// `K(z, z) = φ(z)² Σ c_n |U_n(z)|²`, the one-point intensity.
pub fn kernel_diagonal(params: &EnsembleParams, z: C64) -> f64 {
    let s = params.s();
    let u = cheb_u_all(params.n(), z);
    let sum: f64 = u.iter().enumerate().map(|(k, v)| v.norm_sqr() * kernel_coefficient(s, k)).sum();
    let phi = weight_phi(s, z);
    phi * phi * sum
}

/// `K̃(z, w) / (Φ(z) conj Φ(w))^N` for `z, w` off the cut, evaluated without
/// forming the exponentially large `U_n`.
pub fn kernel_tilde_exterior_normalized(params: &EnsembleParams, z: C64, w: C64) -> Result<C64> {
    let n = params.n();
    let s = params.s();
    let pz = joukowski_phi(z);
    let pw = joukowski_phi(w);
    if pz.norm() <= 1.0 || pw.norm() <= 1.0 {
        return Err(Error::OnCut(format!("exterior normalization at z = {z}, w = {w}")));
    }
    let uz = cheb_u_all_scaled(n, z, pz);
    let uw = cheb_u_all_scaled(n, w, pw);
    // U_n(z)/Φ(z)^N = (U_n/Φ^n) · Φ^{n−N}; walk n downward so the power is built by multiplication.
    let iz = pz.inv();
    let iw = pw.inv().conj();
    let mut fz = iz;
    let mut fw = iw;
    let mut acc = C64::new(0.0, 0.0);
    for k in (0..n).rev() {
        acc += uz[k] * fz * (uw[k].conj() * fw) * kernel_coefficient(s, k);
        fz *= iz;
        fw *= iw;
    }
    Ok(acc)
}

/// `R_n(z_1, …, z_n) = det[K(z_j, z_k)]`.
pub fn correlation_rn(params: &EnsembleParams, points: &[C64]) -> Result<f64> {
    require_complex(params)?;
    let n = points.len();
    if n == 0 || n > params.n() {
        return Err(Error::InvalidParams(format!("need 1 ≤ n ≤ N points, got {n}")));
    }
    let mut m = vec![C64::new(0.0, 0.0); n * n];
    for j in 0..n {
        for k in j..n {
            let v = kernel_k(params, points[j], points[k])?.value;
            m[j * n + k] = v;
            m[k * n + j] = v.conj();
        }
    }
    Ok(determinant(n, &m)?.re)
}

/// Truncation radius for integrals of the kernel diagonal, recorded in output metadata.
pub fn diagonal_truncation_radius(params: &EnsembleParams, tol: f64) -> Result<f64> {
    exterior_truncation_radius(params.s(), 2.0 * (params.n() as f64 - 1.0), tol)
}

/// `E[N_B] = ∫_B K(z, z) dμ`.
pub fn expected_count_complex(params: &EnsembleParams, region: &Region, spec: &QuadratureSpec) -> Result<QuadResult<f64>> {
    require_complex(params)?;
    match region {
        Region::WholePlane => {
            let r = diagonal_truncation_radius(params, spec.tol)?.max(spec.truncation_radius);
            let half = integrate_exterior_upper(|z| kernel_diagonal(params, z), rho_for_radius(r), spec)?;
            Ok(QuadResult { value: 2.0 * half.value, error: 2.0 * half.error, evaluations: half.evaluations })
        }
        _ => integrate_region(|z| kernel_diagonal(params, z), region, spec),
    }
}
