//! Elementary and special functions: the exterior map of `[-2, 2]`,
//! Chebyshev and Gegenbauer polynomials, Bessel functions of small order and
//! sign-aware Gamma quotients.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Replaces a negative zero imaginary part by a positive one so that real
/// inputs always take the upper-half-plane boundary values.
#[inline]
fn canon(z: C64) -> C64 {
    if z.im == 0.0 {
        C64::new(z.re, 0.0)
    } else {
        z
    }
}

/// `sqrt(z^2 - 4)` on the branch that is analytic off `[-2, 2]` and behaves like
/// `z` at infinity.
#[inline]
pub fn exterior_sqrt(z: C64) -> C64 {
    let z = canon(z);
    (z - 2.0).sqrt() * (z + 2.0).sqrt()
}

/// Exterior conformal map `(z + sqrt(z^2 - 4)) / 2` of `C \ [-2, 2]` onto `|u| > 1`.
///
/// The square root is taken on the branch that makes the map analytic off
/// `[-2, 2]`, so `|Φ(z)| >= 1` everywhere. On the cut the upper boundary value
/// is returned; use [`joukowski_phi_trace`] when the lower one is needed.
pub fn joukowski_phi(z: C64) -> C64 {
    let z = canon(z);
    (z + exterior_sqrt(z)) * 0.5
}

/// Side of the cut `(-2, 2)` for boundary traces of the exterior map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutSide {
    Upper,
    Lower,
}

/// Boundary value of the exterior map on `(-2, 2)` from the chosen side.
pub fn joukowski_phi_trace(x: f64, side: CutSide) -> Result<C64> {
    if !(x > -2.0 && x < 2.0) {
        return Err(Error::OnCut(format!("trace requested off the cut at x = {x}")));
    }
    let y = (4.0 - x * x).sqrt() * 0.5;
    Ok(match side {
        CutSide::Upper => C64::new(0.5 * x, y),
        CutSide::Lower => C64::new(0.5 * x, -y),
    })
}

/// Derivative of the exterior map, `Φ² / (Φ² − 1)`. Singular at `±2`.
pub fn joukowski_phi_prime(z: C64) -> C64 {
    let p = joukowski_phi(z);
    let p2 = p * p;
    p2 / (p2 - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChebKind {
    First,
    Second,
}

/// Monic Chebyshev polynomial for `[-2, 2]`: `T_n(z) = Φ^n + Φ^{-n}` (with
/// `T_0 = 2`) or `U_n(z) = (Φ^{n+1} − Φ^{-n-1}) / sqrt(z² − 4)`.
pub fn cheb(kind: ChebKind, n: usize, z: C64) -> C64 {
    let (mut prev, mut cur) = match kind {
        ChebKind::First => (C64::new(2.0, 0.0), z),
        ChebKind::Second => (C64::new(1.0, 0.0), z),
    };
    if n == 0 {
        return prev;
    }
    for _ in 1..n {
        let next = z * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `U_0(z), …, U_{len-1}(z)` in one pass.
pub fn cheb_u_all(len: usize, z: C64) -> Vec<C64> {
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return out;
    }
    out.push(C64::new(1.0, 0.0));
    if len == 1 {
        return out;
    }
    out.push(z);
    for n in 2..len {
        let next = z * out[n - 1] - out[n - 2];
        out.push(next);
    }
    out
}

/// `U_n(z) / σ^n` for `n < len`, computed without forming `σ^n`. Used for
/// exterior rescalings where `|U_n|` overflows but the ratio stays bounded.
pub fn cheb_u_all_scaled(len: usize, z: C64, sigma: C64) -> Vec<C64> {
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return out;
    }
    let inv = sigma.inv();
    let zs = z * inv;
    let inv2 = inv * inv;
    out.push(C64::new(1.0, 0.0));
    if len == 1 {
        return out;
    }
    out.push(zs);
    for n in 2..len {
        let next = zs * out[n - 1] - out[n - 2] * inv2;
        out.push(next);
    }
    out
}

/// The three Gegenbauer orders used by the skew-orthogonal polynomials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GegenbauerOrder {
    Half,
    One,
    ThreeHalves,
}

impl GegenbauerOrder {
    pub fn alpha(self) -> f64 {
        match self {
            GegenbauerOrder::Half => 0.5,
            GegenbauerOrder::One => 1.0,
            GegenbauerOrder::ThreeHalves => 1.5,
        }
    }
}

/// Classical ultraspherical polynomial `C_n^{(α)}(x)` by forward recurrence.
pub fn gegenbauer(n: usize, alpha: GegenbauerOrder, x: C64) -> C64 {
    let all = gegenbauer_all(n + 1, alpha, x, C64::new(1.0, 0.0));
    all[n]
}

/// `C_k^{(α)}(x) / σ^k` for `k < len`.
///
/// With `σ = 1` these are the plain values. The recurrence
/// `k C_k = 2x(k+α−1) C_{k−1} − (k+2α−2) C_{k−2}` is run on the scaled
/// sequence so large arguments do not overflow.
pub fn gegenbauer_all(len: usize, alpha: GegenbauerOrder, x: C64, sigma: C64) -> Vec<C64> {
    let a = alpha.alpha();
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return out;
    }
    let inv = sigma.inv();
    let xs = x * inv;
    let inv2 = inv * inv;
    out.push(C64::new(1.0, 0.0));
    if len == 1 {
        return out;
    }
    out.push(xs * (2.0 * a));
    for k in 2..len {
        let kf = k as f64;
        let next = (xs * out[k - 1] * (2.0 * (kf + a - 1.0)) - out[k - 2] * inv2 * (kf + 2.0 * a - 2.0)) / kf;
        out.push(next);
    }
    out
}

/// Bessel orders supported by [`bessel_j`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselOrder {
    Zero,
    One,
    Half,
}

impl BesselOrder {
    pub fn nu(self) -> f64 {
        match self {
            BesselOrder::Zero => 0.0,
            BesselOrder::One => 1.0,
            BesselOrder::Half => 0.5,
        }
    }
}

const BESSEL_SERIES_RADIUS: f64 = 12.0;

/// Entire function `(2/z)^ν J_ν(z)`; equals `1/Γ(ν+1)` at the origin.
pub fn tilde_j(nu: BesselOrder, z: C64) -> C64 {
    // Even in z, so fold onto the right half-plane where the Hankel expansion is valid.
    let z = if z.re < 0.0 { -z } else { z };
    if z.norm() <= BESSEL_SERIES_RADIUS {
        tilde_j_series(nu, z)
    } else {
        let v = nu.nu();
        bessel_j_asymptotic(v, z) * (C64::new(2.0, 0.0) / z).powf(v)
    }
}

fn tilde_j_series(nu: BesselOrder, z: C64) -> C64 {
    let v = nu.nu();
    let q = -(z * z) * 0.25;
    // First term 1/Γ(ν+1).
    let mut term = C64::new(
        match nu {
            BesselOrder::Zero | BesselOrder::One => 1.0,
            BesselOrder::Half => 2.0 / PI.sqrt(),
        },
        0.0,
    );
    let mut sum = term;
    for k in 1..200 {
        let kf = k as f64;
        term = term * q / (kf * (kf + v));
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}

/// Hankel asymptotic expansion of `J_ν(z)` for large `|z|`, `Re z >= 0`.
fn bessel_j_asymptotic(v: f64, z: C64) -> C64 {
    let mu = 4.0 * v * v;
    let chi = z - (0.5 * v + 0.25) * PI;
    let mut p = C64::new(1.0, 0.0);
    let mut q = C64::new(0.0, 0.0);
    let mut a = 1.0;
    let inv8z = (z * 8.0).inv();
    let mut zpow = C64::new(1.0, 0.0);
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        a *= (mu - (2.0 * kf - 1.0).powi(2)) / kf;
        zpow *= inv8z;
        let t = zpow * a;
        let tn = t.norm();
        if tn == 0.0 {
            break;
        }
        if tn > last {
            break;
        }
        last = tn;
        // Terms alternate between Q and P with signs + - - + + - - ...
        match k % 4 {
            1 => q += t,
            2 => p -= t,
            3 => q -= t,
            _ => p += t,
        }
        if tn < 1e-17 {
            break;
        }
    }
    (C64::new(2.0, 0.0) / (z * PI)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Bessel function of the first kind, principal branch of `(z/2)^ν`.
pub fn bessel_j(nu: BesselOrder, z: C64) -> C64 {
    let z = canon(z);
    match nu {
        BesselOrder::Zero => tilde_j(nu, z),
        BesselOrder::One => tilde_j(nu, z) * z * 0.5,
        BesselOrder::Half => tilde_j(nu, z) * (z * 0.5).sqrt(),
    }
}

/// `J_{-1/2}(z) = sqrt(2/(πz)) cos z`, needed for derivatives of `J_{1/2}`.
pub fn bessel_j_minus_half(z: C64) -> C64 {
    let z = canon(z);
    (C64::new(2.0, 0.0) / (z * PI)).sqrt() * z.cos()
}

/// Whether `x` is a pole of the Gamma function.
#[inline]
pub fn is_gamma_pole(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// `(log|Γ(x)|, sign Γ(x))`.
pub fn ln_gamma_signed(x: f64) -> Result<(f64, f64)> {
    if is_gamma_pole(x) {
        return Err(Error::GammaPole(x));
    }
    let (v, sign) = libm::lgamma_r(x);
    Ok((v, if sign < 0 { -1.0 } else { 1.0 }))
}

/// `Γ(a) / Γ(b)` through log-Gamma differences with sign tracking.
pub fn gamma_ratio(a: f64, b: f64) -> Result<f64> {
    let (la, sa) = ln_gamma_signed(a)?;
    let (lb, sb) = ln_gamma_signed(b)?;
    Ok(sa * sb * (la - lb).exp())
}

/// `∏Γ(num_i) / ∏Γ(den_j)`. A pole in the denominator makes the quotient
/// vanish (`1/Γ` is entire); a pole in the numerator is an error.
pub fn gamma_product_ratio(num: &[f64], den: &[f64]) -> Result<f64> {
    let mut log = 0.0;
    let mut sign = 1.0;
    for &x in num {
        let (l, s) = ln_gamma_signed(x)?;
        log += l;
        sign *= s;
    }
    for &x in den {
        if is_gamma_pole(x) {
            return Ok(0.0);
        }
        let (l, s) = ln_gamma_signed(x)?;
        log -= l;
        sign *= s;
    }
    Ok(sign * log.exp())
}
