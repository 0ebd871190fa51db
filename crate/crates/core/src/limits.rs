//! Large-`N` limits of the kernels in the exterior, bulk and edge regimes,
//! and the harness comparing them with rescaled finite-`N` kernels.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex_kernel::{kernel_tilde, kernel_tilde_exterior_normalized};
use crate::ensemble::{EnsembleParams, Field};
use crate::error::{Error, Result};
use crate::linalg::{adaptive_gk, gl64};
use crate::real_kernel::RealKernel;
use crate::specfun::{
    bessel_j, bessel_j_minus_half, gamma_product_ratio, joukowski_phi, joukowski_phi_prime, tilde_j, BesselOrder, C64,
};

/// `c = lim (s − N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "value")]
pub enum CParam {
    Finite(f64),
    Infinite,
}

impl CParam {
    fn inv(self) -> f64 {
        match self {
            CParam::Finite(c) => 1.0 / c,
            CParam::Infinite => 0.0,
        }
    }
}

/// Limit constants `λ = lim N/s ∈ [0, 1]` and `c`; a finite `c` forces `λ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitParams {
    lambda: f64,
    c: CParam,
}

impl LimitParams {
    pub fn new(lambda: f64, c: CParam) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParams(format!("λ must lie in [0, 1], got {lambda}")));
        }
        if let CParam::Finite(cv) = c {
            if !(cv > 0.0 && cv.is_finite()) {
                return Err(Error::InvalidParams(format!("c must be positive, got {cv}")));
            }
            if lambda != 1.0 {
                return Err(Error::InvalidParams("a finite c forces λ = 1".into()));
            }
        }
        Ok(Self { lambda, c })
    }

    pub fn with_lambda(lambda: f64) -> Result<Self> {
        Self::new(lambda, CParam::Infinite)
    }

    pub fn with_c(c: f64) -> Result<Self> {
        Self::new(1.0, CParam::Finite(c))
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn c(&self) -> CParam {
        self.c
    }

    /// Finite-`N` surrogates: `c = s − N` with `λ = 1` when `finite_c`,
    /// otherwise `λ = N/s` and `c = ∞`.
    pub fn surrogate(params: &EnsembleParams, finite_c: bool) -> Result<Self> {
        if finite_c {
            Self::with_c(params.s() - params.n() as f64)
        } else {
            Self::with_lambda(params.n() as f64 / params.s())
        }
    }
}

/// Limit of `φ` near the segment: `e^{−|Im a|/λ}`, and for `λ = 0` the
/// indicator of `a` being real.
pub fn weight_limit(lambda: f64, a: C64) -> f64 {
    if lambda == 0.0 {
        return if a.im == 0.0 { 1.0 } else { 0.0 };
    }
    (-a.im.abs() / lambda).exp()
}

fn exterior_phi(z: C64) -> Result<C64> {
    if z.im == 0.0 && z.re.abs() <= 2.0 {
        return Err(Error::OnCut(format!("{z} lies on [-2, 2]")));
    }
    Ok(joukowski_phi(z))
}

/// `√(u² − 1)` holomorphic off `[−1, 1]`, asymptotic to `u`.
fn sqrt_u2m1(u: C64) -> C64 {
    (u - 1.0).sqrt() * (u + 1.0).sqrt()
}

/// Exterior limit of the complex kernel:
/// `((1+λ)/2π) [1 + c⁻¹/(Φ(z)conj Φ(w) − 1)] Φ′(z)conj Φ′(w) / (Φ(z)conj Φ(w) − 1)`.
pub fn limit_exterior_complex(lp: &LimitParams, z: C64, w: C64) -> Result<C64> {
    let (pz, pw) = (exterior_phi(z)?, exterior_phi(w)?.conj());
    let q = pz * pw - 1.0;
    let bracket = C64::new(1.0, 0.0) + q.inv() * lp.c.inv();
    Ok(bracket * joukowski_phi_prime(z) * joukowski_phi_prime(w).conj() / q * ((1.0 + lp.lambda) / (2.0 * PI)))
}

/// `lim K(z, z) = (1/π)|Φ|^{−2c} [c + 1/(|Φ|²−1)] |Φ′|²/(|Φ|²−1)`; zero for `c = ∞`.
pub fn limit_exterior_complex_diagonal(lp: &LimitParams, z: C64) -> Result<f64> {
    let p = exterior_phi(z)?;
    match lp.c {
        CParam::Infinite => Ok(0.0),
        CParam::Finite(c) => {
            let m2 = p.norm_sqr();
            Ok(c * m2.powf(-c) * limit_exterior_complex(lp, z, z)?.re)
        }
    }
}

/// Exterior limit of the orto-kernel: the complex-kernel form with conjugations
/// dropped, times `λ (Φ(w) − Φ(z)) / (√(Φ²(z)−1) √(Φ²(w)−1))`.
pub fn limit_exterior_real(lp: &LimitParams, z: C64, w: C64) -> Result<C64> {
    let (pz, pw) = (exterior_phi(z)?, exterior_phi(w)?);
    let q = pz * pw - 1.0;
    let bracket = C64::new(1.0, 0.0) + q.inv() * lp.c.inv();
    let base = bracket * joukowski_phi_prime(z) * joukowski_phi_prime(w) / q;
    let factor = (pw - pz) / (sqrt_u2m1(pz) * sqrt_u2m1(pw));
    Ok(base * factor * (lp.lambda * (1.0 + lp.lambda) / (2.0 * PI)))
}

/// Exterior limits of the `ε`-entries, built on the function `F(x, y)` of
/// two real exterior points.
#[derive(Debug, Clone, Copy)]
pub struct ExteriorF {
    c: f64,
    gamma_c: f64,
    tol: f64,
}

impl ExteriorF {
    pub fn new(lp: &LimitParams, tol: f64) -> Result<Self> {
        let c = match lp.c {
            CParam::Finite(c) => c,
            CParam::Infinite => return Err(Error::RegimeMismatch("F exists only for finite c".into())),
        };
        let gamma_c = gamma_product_ratio(&[(c + 1.0) / 2.0], &[c / 2.0])? / PI.sqrt();
        Ok(Self { c, gamma_c, tol })
    }

    /// `Γ((c+1)/2) / (√π Γ(c/2))`.
    pub fn gamma_prefactor(&self) -> f64 {
        self.gamma_c
    }

    /// `|u|^{−c}` continued holomorphically from the real half-line containing `u`.
    fn abs_pow(&self, u: C64) -> C64 {
        let sigma = if u.re < 0.0 { -1.0 } else { 1.0 };
        (u * sigma).powf(-self.c)
    }

    /// `[c + 1/(uv−1)] |uv|^{−c} (v − u)/(uv − 1)`. The orientation `(v − u)`
    /// is the one consistent with the orto-kernel limit and with finite `N`.
    fn core(&self, u: C64, v: C64) -> C64 {
        let q = u * v - 1.0;
        (q.inv() + self.c) * self.abs_pow(u) * self.abs_pow(v) * (v - u) / q
    }

    /// `∫_{σ∞}^{σp} q(v) dv/√(v²−1) = −∫_{acosh p}^∞ q(σ cosh θ) dθ`, evaluated in
    /// `τ = e^{−cθ}` where the integrands here are bounded.
    fn path(&self, x: f64, q: &dyn Fn(C64) -> C64) -> Result<C64> {
        let big = exterior_phi(C64::new(x, 0.0))?.re;
        let sigma = big.signum();
        let p = big.abs();
        let tau0 = (p + (p * p - 1.0).sqrt()).powf(-self.c);
        let c = self.c;
        let r = adaptive_gk(
            |tau: f64| {
                let ch = 0.5 * (tau.powf(-1.0 / c) + tau.powf(1.0 / c));
                q(C64::new(sigma * ch, 0.0)) / (c * tau)
            },
            0.0,
            tau0,
            self.tol,
            4000,
        )?;
        Ok(-r.value)
    }

    /// `∫_{sgn(x)∞}^{Φ(x)} |u|^{−c} du/√(u²−1)`.
    fn single(&self, x: f64) -> Result<f64> {
        Ok(self.path(x, &|u| self.abs_pow(u))?.re)
    }

    /// `F(x, y)` for real `x, y` outside `[−2, 2]`.
    pub fn value(&self, x: f64, y: f64) -> Result<f64> {
        let inner_err = std::cell::RefCell::new(None);
        let double = self.path(x, &|u| {
            self.path(y, &|v| self.core(u, v)).unwrap_or_else(|e| {
                inner_err.borrow_mut().get_or_insert(e);
                C64::new(0.0, 0.0)
            })
        })?;
        if let Some(e) = inner_err.into_inner() {
            return Err(e);
        }
        let single = x.signum() * self.single(y)? - y.signum() * self.single(x)?;
        Ok(double.re / PI + self.gamma_c * single)
    }

    /// `(∂_x F)(z, y)` continued to complex `z` off the cut, `y` real.
    pub fn partial_x(&self, z: C64, y: f64) -> Result<C64> {
        let u = exterior_phi(z)?;
        let su = sqrt_u2m1(u);
        let integral = self.path(y, &|v| self.core(u, v))? / su;
        let h = self.abs_pow(u) / su;
        Ok(joukowski_phi_prime(z) * (integral / PI - h * (y.signum() * self.gamma_c)))
    }

    /// `(∂_y F)(x, w)`, by antisymmetry of `F`.
    pub fn partial_y(&self, x: f64, w: C64) -> Result<C64> {
        Ok(-self.partial_x(w, x)?)
    }

    /// `(∂²_{xy} F)(z, w) = (1/π) Φ′(z)Φ′(w) core(Φ(z), Φ(w)) / (√(Φ²(z)−1)√(Φ²(w)−1))`.
    pub fn partial_xy(&self, z: C64, w: C64) -> Result<C64> {
        let (u, v) = (exterior_phi(z)?, exterior_phi(w)?);
        Ok(joukowski_phi_prime(z) * joukowski_phi_prime(w) * self.core(u, v) / (sqrt_u2m1(u) * sqrt_u2m1(v) * PI))
    }
}

/// Which kernel entry a limit refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitKind {
    ComplexK,
    Kappa,
    KappaEps,
    EpsKappaEps,
    KappaEpsGeneral,
    EpsKappaEpsGeneral,
}

impl std::str::FromStr for LimitKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "complex-k" => LimitKind::ComplexK,
            "kappa" => LimitKind::Kappa,
            "kappa-eps" => LimitKind::KappaEps,
            "eps-kappa-eps" => LimitKind::EpsKappaEps,
            "kappa-eps-general" => LimitKind::KappaEpsGeneral,
            "eps-kappa-eps-general" => LimitKind::EpsKappaEpsGeneral,
            _ => return Err(Error::InvalidParams(format!("unknown kernel kind '{s}'"))),
        })
    }
}

impl LimitKind {
    pub fn field(self) -> Field {
        match self {
            LimitKind::ComplexK => Field::Complex,
            _ => Field::Real,
        }
    }
}

/// `sin z / z`, entire.
fn sinc(z: C64) -> C64 {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        return C64::new(1.0, 0.0) - z2 / 6.0 + z2 * z2 / 120.0;
    }
    z.sin() / z
}

/// Bulk limits:
/// `(1/π)∫_0^1 (1 − (λt)²) · {cos((b̄−a)t) | t sin((b−a)t) | cos((b−a)t) | sin((b−a)t)/t} dt`.
pub fn limit_bulk(lp: &LimitParams, kind: LimitKind, a: C64, b: C64) -> Result<C64> {
    let l2 = lp.lambda * lp.lambda;
    let v = match kind {
        LimitKind::ComplexK => {
            let d = b.conj() - a;
            gl64(|t| (d * t).cos() * (1.0 - l2 * t * t))
        }
        LimitKind::Kappa => {
            let d = b - a;
            gl64(|t| (d * t).sin() * (t * (1.0 - l2 * t * t)))
        }
        LimitKind::KappaEps => {
            let d = b - a;
            gl64(|t| (d * t).cos() * (1.0 - l2 * t * t))
        }
        LimitKind::EpsKappaEps => {
            let d = b - a;
            gl64(|t| d * sinc(d * t) * (1.0 - l2 * t * t))
        }
        _ => return Err(Error::RegimeMismatch(format!("{kind:?} has no bulk form"))),
    };
    Ok(v / PI)
}

fn j0(z: C64) -> C64 {
    bessel_j(BesselOrder::Zero, z)
}

fn j1(z: C64) -> C64 {
    bessel_j(BesselOrder::One, z)
}

fn jt1(z: C64) -> C64 {
    tilde_j(BesselOrder::One, z)
}

/// Path integral `∫_0^b w(u) g(u) du` along the segment `0 → b`.
fn segment(lambda: f64, b: C64, g: impl Fn(C64) -> C64) -> C64 {
    gl64(|r| {
        let u = b * r;
        g(u) * weight_limit(lambda, u)
    }) * b
}

fn check_path(lambda: f64, b: C64, name: &str) -> Result<()> {
    if (b * b).im.abs() > 1e-12 * b.norm_sqr().max(1.0) {
        return Err(Error::InvalidParams(format!("{name}² must be real, got {name} = {b}")));
    }
    if lambda == 0.0 && b.im != 0.0 {
        return Err(Error::InvalidParams(format!("λ = 0 degenerates the weight along a nonreal path to {name} = {b}")));
    }
    Ok(())
}

/// Edge limits at `2 − a²/N²`:
/// complex `(1/(2πab̄))∫(1−λ²t²) sin(at) sin(b̄t)`, `κ` `(1/(8ab))∫t(1−λ²t²)𝕁₁₁(at,bt)`,
/// `κε` `(1/(4a))∫(1−λ²t²)𝕁₁₂(at,bt)`, `εκε` `½∫(1−λ²t²)𝕁₂₂(at,bt)/t`, and the
/// path forms of the last two valid for `b² ∈ ℝ`.
pub fn limit_edge(lp: &LimitParams, kind: LimitKind, a: C64, b: C64) -> Result<C64> {
    let lambda = lp.lambda;
    let l2 = lambda * lambda;
    let damp = |t: f64| 1.0 - l2 * t * t;
    Ok(match kind {
        LimitKind::ComplexK => {
            let bc = b.conj();
            gl64(|t| sinc(a * t) * sinc(bc * t) * (t * t * damp(t))) / (2.0 * PI)
        }
        LimitKind::Kappa => {
            gl64(|t| (jt1(a * t) * j0(b * t) - jt1(b * t) * j0(a * t)) * (t * t * t * damp(t))) / 16.0
        }
        LimitKind::KappaEps => {
            gl64(|t| {
                let t2 = t * t;
                (jt1(a * t) * jt1(b * t) * b * b * (t2 / 4.0) + j0(a * t) * j0(b * t)) * (t * damp(t))
            }) / 4.0
        }
        LimitKind::EpsKappaEps => gl64(|t| (a * j1(a * t) * j0(b * t) - b * j1(b * t) * j0(a * t)) * damp(t)) / 2.0,
        LimitKind::KappaEpsGeneral => {
            check_path(lambda, b, "b")?;
            gl64(|t| {
                // (1/a)∫_0^b w 𝕁₁₁(at, ut) du + J_0(at), split into separable pieces.
                let u_j0 = segment(lambda, b, |u| u * j0(u * t));
                let j1_int = segment(lambda, b, |u| j1(u * t));
                let bracket = jt1(a * t) * u_j0 * (t * t / 2.0) - j0(a * t) * j1_int * t + j0(a * t);
                bracket * (t * damp(t))
            }) / 4.0
        }
        LimitKind::EpsKappaEpsGeneral => {
            check_path(lambda, a, "a")?;
            check_path(lambda, b, "b")?;
            gl64(|t| {
                let j1_a = segment(lambda, a, |u| j1(u * t));
                let j1_b = segment(lambda, b, |u| j1(u * t));
                let uj0_a = segment(lambda, a, |u| u * j0(u * t));
                let uj0_b = segment(lambda, b, |u| u * j0(u * t));
                // ∫∫ w w 𝕁₁₁(ut, vt) = t (∫J₁ ∫vJ₀ − ∫J₁ ∫uJ₀) over the respective paths.
                let double = (j1_a * uj0_b - j1_b * uj0_a) * t;
                (double - (uj0_b - uj0_a)) * (t * damp(t))
            }) / 2.0
        }
    })
}

/// `(1/(2√(ab))) [J(a) b J′(b) − J(b) a J′(a)] / (2(a² − b²))` with `J = J_{1/2}`,
/// the classical Bessel kernel form of the complex edge limit at `λ = 0`.
pub fn classical_bessel_kernel(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidParams("the classical Bessel form needs a, b > 0".into()));
    }
    let j = |x: f64| bessel_j(BesselOrder::Half, C64::new(x, 0.0)).re;
    let jp = |x: f64| bessel_j_minus_half(C64::new(x, 0.0)).re - j(x) / (2.0 * x);
    let pre = 1.0 / (2.0 * (a * b).sqrt());
    if (a - b).abs() <= 1e-6 * a.max(b) {
        // L'Hôpital in b at b = a, with J″ from Bessel's equation.
        let (jv, jd) = (j(a), jp(a));
        let jdd = -jd / a - (1.0 - 0.25 / (a * a)) * jv;
        return Ok(pre * -(jv * jd + a * jv * jdd - a * jd * jd) / (4.0 * a));
    }
    Ok(pre * (j(a) * b * jp(b) - j(b) * a * jp(a)) / (2.0 * (a * a - b * b)))
}

/// Scaling regime of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "regime")]
pub enum ScalingFrame {
    Exterior,
    Bulk { x: f64 },
    Edge,
}

impl ScalingFrame {
    pub fn bulk(x: f64) -> Result<Self> {
        if !(x.abs() < 2.0) {
            return Err(Error::InvalidParams(format!("bulk centre must lie in (−2, 2), got {x}")));
        }
        Ok(ScalingFrame::Bulk { x })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScalingFrame::Exterior => "exterior",
            ScalingFrame::Bulk { .. } => "bulk",
            ScalingFrame::Edge => "edge",
        }
    }
}

/// `ω(x) = 1/√(4 − x²)`.
pub fn omega(x: f64) -> f64 {
    1.0 / (4.0 - x * x).sqrt()
}

/// One row of a convergence table.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub s: f64,
    pub regime: String,
    pub point: usize,
    pub finite: C64,
    pub limit: C64,
    pub error: f64,
}

/// Limit value for `kind` in `frame` at the point pair `(a, b)` (exterior
/// frames take the points themselves).
pub fn limit_value(lp: &LimitParams, frame: &ScalingFrame, kind: LimitKind, a: C64, b: C64, tol: f64) -> Result<C64> {
    match frame {
        ScalingFrame::Bulk { .. } => limit_bulk(lp, kind, a, b),
        ScalingFrame::Edge => limit_edge(lp, kind, a, b),
        ScalingFrame::Exterior => match kind {
            LimitKind::ComplexK => limit_exterior_complex(lp, a, b),
            LimitKind::Kappa => limit_exterior_real(lp, a, b),
            LimitKind::KappaEps => {
                require_real_arg(b)?;
                Ok(-ExteriorF::new(lp, tol)?.partial_x(a, b.re)?)
            }
            LimitKind::EpsKappaEps => {
                require_real_arg(a)?;
                require_real_arg(b)?;
                Ok(ExteriorF::new(lp, tol)?.value(a.re, b.re)?.into())
            }
            _ => Err(Error::RegimeMismatch(format!("{kind:?} has no exterior form"))),
        },
    }
}

fn require_real_arg(x: C64) -> Result<()> {
    if x.im != 0.0 {
        return Err(Error::InvalidParams(format!("argument {x} must be real for this entry")));
    }
    Ok(())
}

enum FiniteKernel {
    Complex(EnsembleParams),
    Real(RealKernel),
}

/// Rescaled finite-`N` kernel matching [`limit_value`].
fn finite_value(k: &FiniteKernel, frame: &ScalingFrame, kind: LimitKind, a: C64, b: C64) -> Result<C64> {
    let params = match k {
        FiniteKernel::Complex(p) => p,
        FiniteKernel::Real(r) => r.params(),
    };
    let n = params.n() as f64;
    let s = params.s();
    let (za, zb, scale_k, scale_kappa, scale_ke) = match frame {
        ScalingFrame::Bulk { x } => {
            let w = omega(*x);
            (C64::new(*x, 0.0) + a / (n * w), C64::new(*x, 0.0) + b / (n * w), s * n * w * w, n * n * w * w, n * w)
        }
        ScalingFrame::Edge => {
            let n2 = n * n;
            (C64::new(2.0, 0.0) - a * a / n2, C64::new(2.0, 0.0) - b * b / n2, s * n2 * n, n2 * n2, n2)
        }
        ScalingFrame::Exterior => {
            return match (k, kind) {
                (FiniteKernel::Complex(p), LimitKind::ComplexK) => Ok(kernel_tilde_exterior_normalized(p, a, b)? / (s - n)),
                (FiniteKernel::Real(r), LimitKind::Kappa) => Ok(r.kappa_exterior_normalized(a, b)? / (s - n)),
                (FiniteKernel::Real(r), LimitKind::KappaEps) => r.kappa_eps_exterior_normalized(a, b),
                (FiniteKernel::Real(r), LimitKind::EpsKappaEps) => Ok(r.eps_kappa_eps(a, b)),
                _ => Err(Error::RegimeMismatch(format!("{kind:?} has no exterior form"))),
            };
        }
    };
    // Real arguments stay exactly real so the ε closed forms apply.
    let real_if = |z: C64, src: C64| if src.im == 0.0 && (src * src).im == 0.0 && z.im.abs() < 1e-300 { C64::new(z.re, 0.0) } else { z };
    let (za, zb) = (real_if(za, a), real_if(zb, b));
    match (k, kind) {
        (FiniteKernel::Complex(p), LimitKind::ComplexK) => Ok(kernel_tilde(p, za, zb) / scale_k),
        (FiniteKernel::Real(r), LimitKind::Kappa) => Ok(r.kappa_tilde(za, zb) / scale_kappa),
        (FiniteKernel::Real(r), LimitKind::KappaEps | LimitKind::KappaEpsGeneral) => Ok(r.kappa_eps_tilde(za, zb) / scale_ke),
        (FiniteKernel::Real(r), LimitKind::EpsKappaEps | LimitKind::EpsKappaEpsGeneral) => Ok(r.eps_kappa_eps(za, zb)),
        _ => Err(Error::RegimeMismatch(format!("{kind:?} does not match the ensemble field"))),
    }
}

/// Compares rescaled finite-`N` kernels against their limit for each entry of
/// `sequence` (strictly increasing in `N`) at every point pair.
pub fn converge(
    sequence: &[EnsembleParams],
    frame: &ScalingFrame,
    kind: LimitKind,
    points: &[(C64, C64)],
    lp: &LimitParams,
    tol: f64,
) -> Result<Vec<ConvergenceRow>> {
    if sequence.is_empty() || points.is_empty() {
        return Err(Error::InvalidParams("empty parameter sequence or point list".into()));
    }
    if sequence.windows(2).any(|w| w[1].n() <= w[0].n()) {
        return Err(Error::InvalidParams("N must increase strictly along the sequence".into()));
    }
    if sequence.iter().any(|p| p.field() != kind.field()) {
        return Err(Error::RegimeMismatch(format!("{kind:?} needs the {:?} ensemble", kind.field())));
    }
    if let ScalingFrame::Bulk { x } = frame {
        ScalingFrame::bulk(*x)?;
    }
    let limits: Vec<C64> = points.iter().map(|&(a, b)| limit_value(lp, frame, kind, a, b, tol)).collect::<Result<_>>()?;
    let tables: Vec<Vec<ConvergenceRow>> = sequence
        .par_iter()
        .map(|p| {
            let k = match p.field() {
                Field::Complex => FiniteKernel::Complex(*p),
                Field::Real => FiniteKernel::Real(RealKernel::new(*p)?),
            };
            points
                .iter()
                .zip(&limits)
                .enumerate()
                .map(|(i, (&(a, b), &limit))| {
                    let finite = finite_value(&k, frame, kind, a, b)?;
                    Ok(ConvergenceRow {
                        n: p.n(),
                        s: p.s(),
                        regime: frame.name().to_string(),
                        point: i,
                        finite,
                        limit,
                        error: (finite - limit).norm(),
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(tables.into_iter().flatten().collect())
}

/// Largest error per `N` in a convergence table, in sequence order.
pub fn sup_errors(rows: &[ConvergenceRow]) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = Vec::new();
    for r in rows {
        match out.last_mut() {
            Some((n, e)) if *n == r.n => *e = e.max(r.error),
            _ => out.push((r.n, r.error)),
        }
    }
    out
}
