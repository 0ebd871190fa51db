//! Skew-orthogonal polynomials of the real ensemble, the skew-symmetric inner
//! product, skew-moments of Chebyshev polynomials, the Gamma sum identities and
//! the constants `Γ_n(s)`, `Δ_n(s)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::ensemble::{weight_phi, EnsembleParams, Field};
use crate::error::{Error, Result};
use crate::linalg::{
    adaptive_gk, exterior_truncation_radius, gauss_legendre, integrate_exterior_upper, rho_for_radius, QuadratureSpec,
};
use crate::specfun::{cheb_u_all, gamma_product_ratio, gegenbauer, gegenbauer_all, joukowski_phi, GegenbauerOrder, C64};

/// Polynomials with real coefficients, `p(conj z) = conj p(z)`.
pub trait RealPolynomial: Sync {
    fn degree(&self) -> usize;
    fn eval(&self, z: C64) -> C64;
}

/// Monic Chebyshev `U_n` for `[-2, 2]`.
#[derive(Debug, Clone, Copy)]
pub struct ChebyshevU(pub usize);

impl RealPolynomial for ChebyshevU {
    fn degree(&self) -> usize {
        self.0
    }
    fn eval(&self, z: C64) -> C64 {
        crate::specfun::cheb(crate::specfun::ChebKind::Second, self.0, z)
    }
}

/// Polynomial given by ascending real coefficients.
#[derive(Debug, Clone)]
pub struct RealCoeffPoly(pub Vec<f64>);

impl RealPolynomial for RealCoeffPoly {
    fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }
    fn eval(&self, z: C64) -> C64 {
        self.0.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }
}

/// `Γ_{2n,i} = Γ(n−i+½)Γ(n+i+3/2) / (Γ(n−i+1)Γ(n+i+2))`.
pub fn gamma_even(n: usize, i: usize) -> f64 {
    let (n, i) = (n as f64, i as f64);
    gamma_product_ratio(&[n - i + 0.5, n + i + 1.5], &[n - i + 1.0, n + i + 2.0]).expect("arguments are positive")
}

/// `Γ_{2n+1,i} = Γ(n−i−½)Γ(n+i+3/2) / (Γ(n−i+1)Γ(n+i+3))`; negative at `i = n`.
pub fn gamma_odd(n: usize, i: usize) -> f64 {
    let (n, i) = (n as f64, i as f64);
    gamma_product_ratio(&[n - i - 0.5, n + i + 1.5], &[n - i + 1.0, n + i + 3.0]).expect("arguments avoid poles")
}

/// Skew-orthogonal basis `π_0, …, π_{N−1}` for the weight `|Φ|^{-s}`, with
/// both the Gegenbauer form and the Chebyshev-`U` expansion.
#[derive(Debug, Clone)]
pub struct SkewBasis {
    params: EnsembleParams,
    /// `expansions[n]` lists `(k, c)` with `π_n = Σ c · U_k`.
    expansions: Vec<Vec<(usize, f64)>>,
    gamma: Vec<f64>,
    delta: Vec<f64>,
    scale: Vec<f64>,
    odd_shift: f64,
}

impl SkewBasis {
    pub fn new(params: EnsembleParams) -> Result<Self> {
        if params.field() != Field::Real {
            return Err(Error::InvalidParams("skew-orthogonal polynomials belong to the real ensemble".into()));
        }
        let n_tot = params.n();
        let s = params.s();
        let mut expansions = Vec::with_capacity(n_tot);
        for idx in 0..n_tot {
            let n = idx / 2;
            let nf = n as f64;
            let terms: Vec<(usize, f64)> = if idx % 2 == 0 {
                (0..=n)
                    .map(|i| (2 * i, (nf + 0.75) / (2.0 * PI) * (2 * i + 1) as f64 * gamma_even(n, i)))
                    .collect()
            } else {
                (0..=n)
                    .map(|i| {
                        let m = (2 * i + 2) as f64;
                        (2 * i + 1, -m * (1.0 - m * m / (s * s)) * gamma_odd(n, i) / (2.0 * PI))
                    })
                    .collect()
            };
            expansions.push(terms);
        }
        let mut basis = Self { params, expansions, gamma: vec![], delta: vec![], scale: vec![1.0; n_tot], odd_shift: 0.0 };
        let half = n_tot / 2;
        basis.gamma = (0..half).map(|n| gamma_n_closed(s, n)).collect::<Result<_>>()?;
        basis.delta = (0..half).map(|n| basis.delta_closed(n)).collect();
        Ok(basis)
    }

    /// Replaces every `π_{2m+1}` by `π_{2m+1} + c·π_{2m}`.
    pub fn with_odd_shift(mut self, c: f64) -> Self {
        self.odd_shift = c;
        self
    }

    /// Multiplies `π_index` by `1 + rel` (sensitivity control for verification).
    pub fn with_perturbation(mut self, index: usize, rel: f64) -> Result<Self> {
        self.check(index)?;
        self.scale[index] *= 1.0 + rel;
        Ok(self)
    }

    pub fn params(&self) -> &EnsembleParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.params.n()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check(&self, n: usize) -> Result<()> {
        if n >= self.len() {
            return Err(Error::IndexOutOfRange { index: n, size: self.len() });
        }
        Ok(())
    }

    /// Applies scaling and the odd shift to raw values of the fixed representative.
    pub(crate) fn adjust(&self, raw: &[C64]) -> Vec<C64> {
        let mut out: Vec<C64> = raw.iter().zip(&self.scale).map(|(v, k)| v * *k).collect();
        if self.odd_shift != 0.0 {
            for i in (1..out.len()).step_by(2) {
                let prev = out[i - 1];
                out[i] += prev * self.odd_shift;
            }
        }
        out
    }

    pub(crate) fn adjust_real(&self, raw: &[f64]) -> Vec<f64> {
        let c: Vec<C64> = raw.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.adjust(&c).iter().map(|v| v.re).collect()
    }

    fn raw_gegenbauer(&self, z: C64, sigma: C64) -> Vec<C64> {
        let n_tot = self.len();
        let s2 = self.params.s() * self.params.s();
        let x = z * 0.5;
        let half = gegenbauer_all(n_tot, GegenbauerOrder::Half, x, sigma);
        let three = gegenbauer_all(n_tot, GegenbauerOrder::ThreeHalves, x, sigma);
        (0..n_tot)
            .map(|idx| {
                let n = (idx / 2) as f64;
                if idx % 2 == 0 {
                    three[idx] * ((4.0 * n + 3.0) / 16.0)
                } else {
                    let k = (2.0 * n + 1.0).powi(2);
                    half[idx] * (1.0 - k / s2) - three[idx] / s2
                }
            })
            .collect()
    }

    /// `π_0(z), …, π_{N−1}(z)` from the Gegenbauer form.
    pub fn eval_all(&self, z: C64) -> Vec<C64> {
        self.adjust(&self.raw_gegenbauer(z, C64::new(1.0, 0.0)))
    }

    /// `π_n(z) · (2/σ)^n` for all `n`, computed without forming `π_n` itself;
    /// keeps exterior asymptotics free of overflow.
    pub fn eval_all_scaled(&self, z: C64, sigma: C64) -> Vec<C64> {
        self.adjust_scaled(&self.raw_gegenbauer(z, sigma * 0.5), sigma)
    }

    fn adjust_scaled(&self, raw: &[C64], sigma: C64) -> Vec<C64> {
        let mut out: Vec<C64> = raw.iter().zip(&self.scale).map(|(v, k)| v * *k).collect();
        if self.odd_shift != 0.0 {
            // π_{2m} is one degree lower than π_{2m+1}, so it carries one fewer factor.
            let inv = (sigma * 0.5).inv();
            for i in (1..out.len()).step_by(2) {
                let prev = out[i - 1];
                out[i] += prev * inv * self.odd_shift;
            }
        }
        out
    }

    /// `π_n(z)` from the Gegenbauer form.
    pub fn skew_poly(&self, n: usize, z: C64) -> Result<C64> {
        self.check(n)?;
        let s2 = self.params.s() * self.params.s();
        let x = z * 0.5;
        let m = (n / 2) as f64;
        let raw = |idx: usize| -> C64 {
            if idx.is_multiple_of(2) {
                gegenbauer(idx, GegenbauerOrder::ThreeHalves, x) * ((4.0 * m + 3.0) / 16.0)
            } else {
                let k = (2.0 * m + 1.0).powi(2);
                gegenbauer(idx, GegenbauerOrder::Half, x) * (1.0 - k / s2) - gegenbauer(idx, GegenbauerOrder::ThreeHalves, x) / s2
            }
        };
        let mut v = raw(n) * self.scale[n];
        if n % 2 == 1 && self.odd_shift != 0.0 {
            let mm = m;
            let even = gegenbauer(n - 1, GegenbauerOrder::ThreeHalves, x) * ((4.0 * mm + 3.0) / 16.0);
            v += even * self.scale[n - 1] * self.odd_shift;
        }
        Ok(v)
    }

    /// `π_n(z)` from the Chebyshev-`U` expansion.
    pub fn skew_poly_expansion(&self, n: usize, z: C64) -> Result<C64> {
        self.check(n)?;
        let u = cheb_u_all(n + 1, z);
        let raw = |idx: usize| -> C64 { self.expansions[idx].iter().map(|&(k, c)| u[k] * c).sum() };
        let mut v = raw(n) * self.scale[n];
        if n % 2 == 1 && self.odd_shift != 0.0 {
            v += raw(n - 1) * self.scale[n - 1] * self.odd_shift;
        }
        Ok(v)
    }

    /// `(k, c)` pairs with `π_n = Σ c U_k` for the fixed representative.
    pub fn expansion(&self, n: usize) -> Result<&[(usize, f64)]> {
        self.check(n)?;
        Ok(&self.expansions[n])
    }

    /// `Γ_n(s) = ∫_R φ π_{2n}`.
    pub fn gamma_n(&self, n: usize) -> Result<f64> {
        self.check(2 * n)?;
        Ok(self.gamma[n])
    }

    /// `Δ_n(s)`, the constant in the interior closed form of `ε(φπ_{2n+1})`.
    pub fn delta_n(&self, n: usize) -> Result<f64> {
        self.check(2 * n + 1)?;
        Ok(self.delta[n])
    }

    /// `Δ_n(s) = (2/(4n+3))[(1−(2n+2)²/s²) P_{2n+2}(0) − (1−(2n+1)²/s²) P_{2n}(0)] + ∫_0^∞ φπ_{2n+1}`,
    /// with the half-line integral taken from the `U`-expansion and the
    /// antiderivative of `U_{m−1}φ`.
    fn delta_closed(&self, n: usize) -> f64 {
        let s = self.params.s();
        let s2 = s * s;
        let a = 1.0 - ((2 * n + 2) as f64).powi(2) / s2;
        let b = 1.0 - ((2 * n + 1) as f64).powi(2) / s2;
        let p_next = legendre_at_zero(2 * n + 2);
        let p_cur = legendre_at_zero(2 * n);
        let bracket = 2.0 / (4 * n + 3) as f64 * (a * p_next - b * p_cur);
        let half_line: f64 = self.expansions[2 * n + 1]
            .iter()
            .map(|&(k, c)| {
                c * int_u_phi(s, k + 1, 2.0) + c * tail_u_phi(s, k + 1, 2.0)
            })
            .sum();
        bracket + half_line
    }
}

/// `P_{2k}(0) = (−1)^k Γ(k+½)/(√π Γ(k+1))`.
fn legendre_at_zero(n: usize) -> f64 {
    if n % 2 == 1 {
        return 0.0;
    }
    let k = (n / 2) as f64;
    let sign = if (n / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * gamma_product_ratio(&[k + 0.5], &[k + 1.0]).expect("positive") / PI.sqrt()
}

/// `Γ_n(s) = (s/2)(n+¾) Γ(s/2+n+1)Γ(s/2−n−½) / (Γ(s/2+n+3/2)Γ(s/2−n))`.
pub fn gamma_n_closed(s: f64, n: usize) -> Result<f64> {
    let h = s / 2.0;
    let nf = n as f64;
    Ok(h * (nf + 0.75) * gamma_product_ratio(&[h + nf + 1.0, h - nf - 0.5], &[h + nf + 1.5, h - nf])?)
}

/// `∫_0^y U_{m−1} φ` for `y ≥ 0`: `(T_m(y) − T_m(0))/m` on `[0, 2]`, and beyond
/// `(2 − T_m(0))/m + 2m/(s²−m²) − ∫_y^∞ U_{m−1}φ`.
pub fn int_u_phi(s: f64, m: usize, y: f64) -> f64 {
    let mf = m as f64;
    let t = |x: f64| crate::specfun::cheb(crate::specfun::ChebKind::First, m, C64::new(x, 0.0)).re;
    let t0 = t(0.0);
    if y <= 2.0 {
        return (t(y) - t0) / mf;
    }
    (2.0 - t0) / mf + 2.0 * mf / (s * s - mf * mf) - tail_u_phi(s, m, y)
}

/// `∫_y^∞ U_{m−1} φ = Φ^{m−s}/(s−m) − Φ^{−s−m}/(s+m)` for `y ≥ 2`.
pub fn tail_u_phi(s: f64, m: usize, y: f64) -> f64 {
    let mf = m as f64;
    let lp = joukowski_phi(C64::new(y, 0.0)).re.ln();
    ((mf - s) * lp).exp() / (s - mf) - ((-s - mf) * lp).exp() / (s + mf)
}

/// `⟨U_{m−1} | U_{n−1}⟩` in closed form.
pub fn skew_moment_exact(s: f64, m: usize, n: usize) -> Result<f64> {
    if m == 0 || n == 0 || !(s > m.max(n) as f64) {
        return Err(Error::InvalidParams(format!("skew moment needs m, n ≥ 1 and s > max(m, n); got {m}, {n}, {s}")));
    }
    if (m + n).is_multiple_of(2) {
        return Ok(0.0);
    }
    let value = |m: usize, n: usize| {
        let (mf, nf) = (m as f64, n as f64);
        (nf / mf) * 16.0 * s * s / ((nf * nf - mf * mf) * (s * s - nf * nf))
    };
    Ok(if m % 2 == 1 { value(m, n) } else { -value(n, m) })
}

/// `∫_{ρ_a}^{ρ_b} p(σ(ρ + 1/ρ)) ρ^s (1/ρ² − 1) dρ`: the integral of `pφ` over the
/// part of the half-line `σ·[2, ∞)` corresponding to `ρ ∈ [ρ_a, ρ_b]`.
fn exterior_line_integral(s: f64, p: &dyn Fn(f64) -> f64, sigma: f64, ra: f64, rb: f64, tol: f64) -> Result<f64> {
    Ok(adaptive_gk(
        |rho: f64| {
            let t = rho + 1.0 / rho;
            p(sigma * t) * (s * rho.ln()).exp() * (1.0 / (rho * rho) - 1.0)
        },
        ra,
        rb,
        tol,
        4000,
    )?
    .value)
}

/// `ρ` such that the real half-line tail of `|x|^d |Φ|^{-s}` beyond `1/ρ` is below `tol/10`.
fn real_rho_min(s: f64, d: usize, tol: f64) -> f64 {
    // ∫_R^∞ x^d (x/2)^{-s} dx = 2^s R^{d+1-s}/(s-d-1).
    let p = s - d as f64 - 1.0;
    let log_r = (s * 2f64.ln() - (p * tol / 10.0).ln()) / p;
    rho_for_radius(log_r.exp().max(4.0))
}

fn integrability(s: f64, df: usize, dg: usize) -> Result<()> {
    let need = df.max(dg) as f64 + 1.0;
    if !(s > need) {
        return Err(Error::NotIntegrable { deg_f: df, deg_g: dg, need, s });
    }
    Ok(())
}

/// Complex half of the skew product: `Re(4i ∫_{C+} f conj(g) φ² dμ) = −4 ∫_{C+} Im(f conj g) φ² dμ`.
pub fn skew_inner_complex_part(s: f64, f: &dyn RealPolynomial, g: &dyn RealPolynomial, spec: &QuadratureSpec) -> Result<f64> {
    integrability(s, f.degree(), g.degree())?;
    let d = (f.degree() + g.degree()) as f64;
    let r = exterior_truncation_radius(s, d, spec.tol)?;
    let res = integrate_exterior_upper(
        |z| {
            let w = weight_phi(s, z);
            -4.0 * (f.eval(z) * g.eval(z).conj()).im * w * w
        },
        rho_for_radius(r),
        spec,
    )?;
    Ok(res.value)
}

/// Real half of the skew product: `∬ f(x)φ(x) g(y)φ(y) sgn(y − x) dx dy`,
/// written as `∫ gφ(y) (2H(y) − H(∞)) dy` with `H(y) = ∫_{−∞}^y fφ`.
pub fn skew_inner_real_part(s: f64, f: &dyn RealPolynomial, g: &dyn RealPolynomial, spec: &QuadratureSpec) -> Result<f64> {
    let (df, dg) = (f.degree(), g.degree());
    integrability(s, df, dg)?;
    let tol = spec.tol;
    let rho0 = real_rho_min(s, df.max(dg), tol);
    let fr = |x: f64| f.eval(C64::new(x, 0.0)).re;
    let gr = |x: f64| g.eval(C64::new(x, 0.0)).re;

    // H(−2), ∫_{−2}^{2} f and the right tail.
    let left = exterior_line_integral(s, &fr, -1.0, rho0, 1.0, tol * 0.01)?;
    let right = exterior_line_integral(s, &fr, 1.0, rho0, 1.0, tol * 0.01)?;
    let (gx, gw) = gauss_legendre((df + dg) / 2 + 4);
    let inner_nodes = gauss_legendre(df / 2 + 3);
    let m_of = |y: f64| -> f64 {
        // ∫_{−2}^{y} f, exact for the polynomial degree.
        let (c, h) = (0.5 * (y - 2.0), 0.5 * (y + 2.0));
        inner_nodes.0.iter().zip(&inner_nodes.1).map(|(t, w)| w * fr(c + h * t)).sum::<f64>() * h
    };
    let middle_total = m_of(2.0);
    let total = left + middle_total + right;

    let mut acc = 0.0;
    // y ∈ [−2, 2].
    for (t, w) in gx.iter().zip(&gw) {
        let y = 2.0 * t;
        acc += 2.0 * w * gr(y) * (2.0 * (left + m_of(y)) - total);
    }
    // y < −2: H(y) = ∫_{ρ0}^{ρ_y} over the mirrored line.
    let mut inner_err = None;
    let lower = adaptive_gk(
        |rho: f64| {
            let h = exterior_line_integral(s, &fr, -1.0, rho0, rho, tol * 0.01).unwrap_or_else(|e| {
                inner_err.get_or_insert(e);
                0.0
            });
            gr(-(rho + 1.0 / rho)) * (s * rho.ln()).exp() * (1.0 / (rho * rho) - 1.0) * (2.0 * h - total)
        },
        rho0,
        1.0,
        tol,
        spec.max_subdivisions,
    )?;
    // y > 2: H(y) = total − ∫_y^∞ fφ.
    let upper = adaptive_gk(
        |rho: f64| {
            let tail = exterior_line_integral(s, &fr, 1.0, rho0, rho, tol * 0.01).unwrap_or_else(|e| {
                inner_err.get_or_insert(e);
                0.0
            });
            gr(rho + 1.0 / rho) * (s * rho.ln()).exp() * (1.0 / (rho * rho) - 1.0) * (total - 2.0 * tail)
        },
        rho0,
        1.0,
        tol,
        spec.max_subdivisions,
    )?;
    if let Some(e) = inner_err {
        return Err(e);
    }
    Ok(acc + lower.value + upper.value)
}

/// `⟨f | g⟩` by quadrature: complex half-plane part plus real double integral.
pub fn skew_inner(params: &EnsembleParams, f: &dyn RealPolynomial, g: &dyn RealPolynomial, spec: &QuadratureSpec) -> Result<f64> {
    let s = params.s();
    Ok(skew_inner_complex_part(s, f, g, spec)? + skew_inner_real_part(s, f, g, spec)?)
}

/// `π_n` of a basis as a [`RealPolynomial`].
#[derive(Clone, Copy)]
pub struct SkewPoly<'a> {
    pub basis: &'a SkewBasis,
    pub n: usize,
}

impl RealPolynomial for SkewPoly<'_> {
    fn degree(&self) -> usize {
        self.n
    }
    fn eval(&self, z: C64) -> C64 {
        self.basis.skew_poly(self.n, z).expect("index validated at construction")
    }
}

impl SkewBasis {
    pub fn poly(&self, n: usize) -> Result<SkewPoly<'_>> {
        self.check(n)?;
        Ok(SkewPoly { basis: self, n })
    }
}

/// `∫_R p φ` by quadrature, splitting at `±2`.
pub fn line_integral(s: f64, p: &dyn Fn(f64) -> f64, deg: usize, tol: f64) -> Result<f64> {
    if !(s > deg as f64 + 1.0) {
        return Err(Error::NotIntegrable { deg_f: deg, deg_g: 0, need: deg as f64 + 1.0, s });
    }
    let rho0 = real_rho_min(s, deg, tol);
    let mid = adaptive_gk(p, -2.0, 2.0, tol * 0.01, 4000)?.value;
    let right = exterior_line_integral(s, p, 1.0, rho0, 1.0, tol * 0.01)?;
    let left = exterior_line_integral(s, p, -1.0, rho0, 1.0, tol * 0.01)?;
    Ok(left + mid + right)
}

/// `ε(pφ)(x) = ½ ∫ p(t)φ(t) sgn(t − x) dt` by direct quadrature; a test
/// oracle for the closed forms.
pub fn eps_quadrature(s: f64, p: &dyn Fn(f64) -> f64, deg: usize, x: f64, tol: f64) -> Result<f64> {
    if !(s > deg as f64 + 1.0) {
        return Err(Error::NotIntegrable { deg_f: deg, deg_g: 0, need: deg as f64 + 1.0, s });
    }
    let rho0 = real_rho_min(s, deg, tol);
    let gk = |a: f64, b: f64| -> Result<f64> {
        if a >= b {
            return Ok(0.0);
        }
        Ok(adaptive_gk(p, a, b, tol * 0.01, 4000)?.value)
    };
    // Signed integral of pφ over a piece of the line: + to the right of x, − to the left.
    let mut total = 0.0;
    // Middle piece [−2, 2].
    let xm = x.clamp(-2.0, 2.0);
    total += gk(xm, 2.0)? - gk(-2.0, xm)?;
    // Right tail (2, ∞).
    if x <= 2.0 {
        total += exterior_line_integral(s, p, 1.0, rho0, 1.0, tol * 0.01)?;
    } else {
        let rx = 1.0 / joukowski_phi(C64::new(x, 0.0)).re;
        let beyond = exterior_line_integral(s, p, 1.0, rho0, rx, tol * 0.01)?;
        let between = exterior_line_integral(s, p, 1.0, rx, 1.0, tol * 0.01)?;
        total += beyond - between;
    }
    // Left tail (−∞, −2).
    if x >= -2.0 {
        total -= exterior_line_integral(s, p, -1.0, rho0, 1.0, tol * 0.01)?;
    } else {
        let rx = 1.0 / joukowski_phi(C64::new(-x, 0.0)).re;
        let beyond = exterior_line_integral(s, p, -1.0, rho0, rx, tol * 0.01)?;
        let between = exterior_line_integral(s, p, -1.0, rx, 1.0, tol * 0.01)?;
        total += between - beyond;
    }
    Ok(0.5 * total)
}

/// One line of a [`SumIdentityReport`].
#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SumIdentityReport {
    pub n: usize,
    pub a: f64,
    pub checks: Vec<IdentityCheck>,
}

impl SumIdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.checks.iter().fold(0.0, |m, c| m.max(c.residual))
    }
}

const POLE_GUARD: f64 = 1e-6;

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() < POLE_GUARD
}

/// Evaluates both sides of the four Gamma-sum identities for `(n, a)`:
/// `Σ 4Γ_{2n,i}/((2a)²−(2i+1)²)`, `Σ (2i+2)²Γ_{2n+1,i}/((2i+2)²−(2a+1)²)`,
/// `Σ Γ_{2n,i} = π/2` and `Σ (2i+2)²Γ_{2n+1,i} = −2π`.
pub fn sum_identities(n: usize, a: f64) -> Result<SumIdentityReport> {
    let nf = n as f64;
    let half_integer = (a - 0.5).rem_euclid(1.0);
    if near(half_integer, 0.0) || near(half_integer, 1.0) || near(a, 0.0) {
        return Err(Error::NearPole(a, POLE_GUARD));
    }
    if a + nf + 1.0 <= 0.0 && near(a + nf + 1.0, (a + nf + 1.0).round()) {
        return Err(Error::NearPole(a, POLE_GUARD));
    }
    let mut checks = Vec::new();

    let lhs7: f64 = (0..=n).map(|i| 4.0 * gamma_even(n, i) / ((2.0 * a).powi(2) - ((2 * i + 1) as f64).powi(2))).sum();
    let rhs7 = PI / (2.0 * a) * gamma_product_ratio(&[nf + a + 1.0, a - nf - 0.5], &[nf + a + 1.5, a - nf])?;
    checks.push(IdentityCheck { name: "even-reciprocal-sum".into(), lhs: lhs7, rhs: rhs7, residual: (lhs7 - rhs7).abs() });

    let lhs8: f64 = (0..=n)
        .map(|i| {
            let m2 = ((2 * i + 2) as f64).powi(2);
            m2 * gamma_odd(n, i) / (m2 - (2.0 * a + 1.0).powi(2))
        })
        .sum();
    let rhs8 = (2.0 * a + 1.0) * PI / 4.0 * gamma_product_ratio(&[nf + a + 1.0, a - nf - 0.5], &[nf + a + 2.5, a - nf + 1.0])?;
    checks.push(IdentityCheck { name: "odd-reciprocal-sum".into(), lhs: lhs8, rhs: rhs8, residual: (lhs8 - rhs8).abs() });

    let lhs9a: f64 = (0..=n).map(|i| gamma_even(n, i)).sum();
    checks.push(IdentityCheck { name: "even-total".into(), lhs: lhs9a, rhs: PI / 2.0, residual: (lhs9a - PI / 2.0).abs() });

    let lhs9b: f64 = (0..=n).map(|i| ((2 * i + 2) as f64).powi(2) * gamma_odd(n, i)).sum();
    checks.push(IdentityCheck { name: "odd-total".into(), lhs: lhs9b, rhs: -2.0 * PI, residual: (lhs9b + 2.0 * PI).abs() });

    Ok(SumIdentityReport { n, a, checks })
}
