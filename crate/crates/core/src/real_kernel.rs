//! Pfaffian kernel of the real ensemble: the orto-kernel `κ`, closed-form
//! `ε` transforms of the weighted skew-orthogonal polynomials, the 2×2 matrix
//! kernel, correlation functions and expected numbers of real zeros.

use serde::Serialize;

use crate::ensemble::{weight_phi, EnsembleParams};
use crate::error::{Error, Result};
use crate::linalg::{
    adaptive_gk, exterior_truncation_radius, integrate_exterior_upper, integrate_interval, pfaffian, rho_for_radius,
    QuadResult, QuadratureSpec, SkewMatrix,
};
use crate::skew_system::{tail_u_phi, SkewBasis};
use crate::specfun::{gegenbauer_all, joukowski_phi, GegenbauerOrder, C64};

/// Real arguments closer than this count as equal in the `sgn` term.
const SGN_TIE: f64 = 1e-12;

/// Entries of the 2×2 matrix kernel at `(z, w)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatrixKernelValue {
    pub kappa: C64,
    pub kappa_eps: C64,
    pub eps_kappa: C64,
    pub eps_kappa_eps_plus_sgn: C64,
}

/// Kernel of the real ensemble for even `N`.
#[derive(Debug, Clone)]
pub struct RealKernel {
    basis: SkewBasis,
    tail_at_two: Vec<f64>,
}

impl RealKernel {
    pub fn new(params: EnsembleParams) -> Result<Self> {
        Self::from_basis(SkewBasis::new(params)?)
    }

    pub fn from_basis(basis: SkewBasis) -> Result<Self> {
        let n = basis.len();
        if !n.is_multiple_of(2) {
            return Err(Error::InvalidParams(format!("the real kernel needs even N, got {n}")));
        }
        let s = basis.params().s();
        let tail_at_two = (0..=n).map(|m| if m == 0 { 0.0 } else { tail_u_phi(s, m, 2.0) }).collect();
        Ok(Self { basis, tail_at_two })
    }

    pub fn basis(&self) -> &SkewBasis {
        &self.basis
    }

    pub fn params(&self) -> &EnsembleParams {
        self.basis.params()
    }

    fn eps_raw_real(&self, x: f64) -> Vec<f64> {
        let n_tot = self.basis.len();
        let s = self.params().s();
        let s2 = s * s;
        let mut out = vec![0.0; n_tot];
        if x.abs() <= 2.0 {
            let p: Vec<f64> = gegenbauer_all(n_tot + 1, GegenbauerOrder::Half, C64::new(x / 2.0, 0.0), C64::new(1.0, 0.0))
                .iter()
                .map(|v| v.re)
                .collect();
            for k in 0..n_tot / 2 {
                let kf = k as f64;
                out[2 * k] = -(4.0 * kf + 3.0) / 8.0 * p[2 * k + 1];
                let a = 1.0 - (2.0 * kf + 2.0).powi(2) / s2;
                let b = 1.0 - (2.0 * kf + 1.0).powi(2) / s2;
                let delta = self.basis.delta_n(k).expect("k < N/2");
                out[2 * k + 1] = -2.0 / (4.0 * kf + 3.0) * (a * p[2 * k + 2] - b * p[2 * k]) + delta;
            }
            return out;
        }
        let ax = x.abs();
        let sign = x.signum();
        let tails: Vec<f64> = (0..=n_tot).map(|m| if m == 0 { 0.0 } else { tail_u_phi(s, m, ax) }).collect();
        for (n, slot) in out.iter_mut().enumerate() {
            let terms = self.basis.expansion(n).expect("n < N");
            if n % 2 == 0 {
                // ε is odd: −∫_0^{|x|} φπ_{2k} = −(4k+3)/8 − ∫_2^{|x|} φπ_{2k}.
                let k = (n / 2) as f64;
                let beyond: f64 = terms.iter().map(|&(j, c)| c * (self.tail_at_two[j + 1] - tails[j + 1])).sum();
                *slot = sign * (-(4.0 * k + 3.0) / 8.0 - beyond);
            } else {
                // ε is even: ∫_{|x|}^∞ φπ_{2k+1}.
                *slot = terms.iter().map(|&(j, c)| c * tails[j + 1]).sum();
            }
        }
        out
    }

    /// `ε(φπ_n)(z)` for all `n < N`: closed forms on the real line, and
    /// `i·sgn(Im z)·(φπ_n)(z̄)` off it.
    pub fn eps_all(&self, z: C64) -> Vec<C64> {
        if z.im == 0.0 {
            let raw = self.eps_raw_real(z.re);
            return self.basis.adjust_real(&raw).into_iter().map(|v| C64::new(v, 0.0)).collect();
        }
        let phi = weight_phi(self.params().s(), z);
        let i_sgn = C64::new(0.0, z.im.signum());
        self.basis.eval_all(z).into_iter().map(|p| i_sgn * (p * phi).conj()).collect()
    }

    pub fn eps_transform(&self, n: usize, z: C64) -> Result<C64> {
        if n >= self.basis.len() {
            return Err(Error::IndexOutOfRange { index: n, size: self.basis.len() });
        }
        Ok(self.eps_all(z)[n])
    }

    /// `κ(z, w) = 2φ(z)φ(w) Σ_j (π_{2j}(z)π_{2j+1}(w) − π_{2j}(w)π_{2j+1}(z))`.
    pub fn orto_kernel(&self, z: C64, w: C64) -> C64 {
        let s = self.params().s();
        let (pz, pw) = (self.basis.eval_all(z), self.basis.eval_all(w));
        pair_sum(&pz, &pw) * (2.0 * weight_phi(s, z) * weight_phi(s, w))
    }

    pub fn matrix_kernel(&self, z: C64, w: C64) -> MatrixKernelValue {
        let s = self.params().s();
        let (fz, fw) = (weight_phi(s, z), weight_phi(s, w));
        let (pz, pw) = (self.basis.eval_all(z), self.basis.eval_all(w));
        let (ez, ew) = (self.eps_all(z), self.eps_all(w));
        let mut sgn = 0.0;
        if z.im == 0.0 && w.im == 0.0 && (z.re - w.re).abs() > SGN_TIE {
            sgn = 0.5 * (z.re - w.re).signum();
        }
        MatrixKernelValue {
            kappa: pair_sum(&pz, &pw) * (2.0 * fz * fw),
            kappa_eps: pair_sum(&pz, &ew) * (2.0 * fz),
            eps_kappa: pair_sum(&ez, &pw) * (2.0 * fw),
            eps_kappa_eps_plus_sgn: pair_sum(&ez, &ew) * 2.0 + sgn,
        }
    }

    /// `κ̃ = κ/(φ(z)φ(w))`.
    pub fn kappa_tilde(&self, z: C64, w: C64) -> C64 {
        pair_sum(&self.basis.eval_all(z), &self.basis.eval_all(w)) * 2.0
    }

    /// `κε̃(z, y) = κε(z, y)/φ(z)`.
    pub fn kappa_eps_tilde(&self, z: C64, y: C64) -> C64 {
        pair_sum(&self.basis.eval_all(z), &self.eps_all(y)) * 2.0
    }

    /// `εκε(z, w)` without the `½ sgn` term.
    pub fn eps_kappa_eps(&self, z: C64, w: C64) -> C64 {
        pair_sum(&self.eps_all(z), &self.eps_all(w)) * 2.0
    }

    /// `π_n(z)/Φ(z)^N` for all `n`, free of overflow for large `N`.
    fn eval_over_phi_n(&self, z: C64) -> Result<Vec<C64>> {
        let big = joukowski_phi_checked(z)?;
        let n_tot = self.basis.len() as i32;
        Ok(self
            .basis
            .eval_all_scaled(z, big)
            .into_iter()
            .enumerate()
            .map(|(n, v)| v * 0.5f64.powi(n as i32) * big.powi(n as i32 - n_tot))
            .collect())
    }

    /// `κ̃(z, w)/(Φ(z)Φ(w))^N`, the exterior normalization of the orto-kernel.
    pub fn kappa_exterior_normalized(&self, z: C64, w: C64) -> Result<C64> {
        Ok(pair_sum(&self.eval_over_phi_n(z)?, &self.eval_over_phi_n(w)?) * 2.0)
    }

    /// `(|Φ(z)|/Φ(z))^N κε(z, y)`.
    pub fn kappa_eps_exterior_normalized(&self, z: C64, y: C64) -> Result<C64> {
        let big = joukowski_phi_checked(z)?;
        let (n, s) = (self.params().n() as f64, self.params().s());
        let scale = (big.norm().ln() * (n - s)).exp();
        Ok(pair_sum(&self.eval_over_phi_n(z)?, &self.eps_all(y)) * (2.0 * scale))
    }

    /// Density of real zeros, `R_{1,0}(x) = κε(x, x)`.
    pub fn real_intensity(&self, x: f64) -> f64 {
        let z = C64::new(x, 0.0);
        let s = self.params().s();
        (pair_sum(&self.basis.eval_all(z), &self.eps_all(z)) * (2.0 * weight_phi(s, x.into()))).re
    }

    /// Density of nonreal zeros in the upper half-plane,
    /// `R_{0,1}(z) = κε(z, z) = −4|φ(z)|² Σ_j Im(π_{2j}(z) conj π_{2j+1}(z))`.
    pub fn complex_intensity(&self, z: C64) -> f64 {
        let p = self.basis.eval_all(z);
        let phi = weight_phi(self.params().s(), z);
        let sum: f64 = p.chunks_exact(2).map(|c| (c[0] * c[1].conj()).im).sum();
        -4.0 * phi * phi * sum * z.im.signum()
    }

    /// `R_{ℓ,m}(x, z)`: Pfaffian of the `2(ℓ+m)`-dimensional matrix of 2×2
    /// kernel blocks at the real points `xs` followed by the points `zs`.
    pub fn correlation_rlm(&self, xs: &[f64], zs: &[C64]) -> Result<f64> {
        if zs.iter().any(|z| !(z.im > 0.0)) {
            return Err(Error::InvalidParams("nonreal points must lie in the open upper half-plane".into()));
        }
        let pts: Vec<C64> = xs.iter().map(|&x| C64::new(x, 0.0)).chain(zs.iter().copied()).collect();
        let k = pts.len();
        if k == 0 {
            return Err(Error::InvalidParams("no points given".into()));
        }
        let mut blocks = vec![None; k * k];
        for i in 0..k {
            for j in i..k {
                blocks[i * k + j] = Some(self.matrix_kernel(pts[i], pts[j]));
            }
        }
        let m = SkewMatrix::from_upper(2 * k, |a, b| {
            let v = blocks[(a / 2) * k + b / 2].expect("upper block");
            match (a % 2, b % 2) {
                (0, 0) => v.kappa,
                (0, 1) => v.kappa_eps,
                (1, 0) => v.eps_kappa,
                _ => v.eps_kappa_eps_plus_sgn,
            }
        })?;
        Ok(pfaffian(&m).re)
    }
}

fn joukowski_phi_checked(z: C64) -> Result<C64> {
    if z.im == 0.0 && z.re.abs() <= 2.0 {
        return Err(Error::OnCut(format!("{z} lies on [-2, 2]")));
    }
    Ok(joukowski_phi(z))
}

/// `Σ_j (a_{2j} b_{2j+1} − b_{2j} a_{2j+1})`.
fn pair_sum(a: &[C64], b: &[C64]) -> C64 {
    a.chunks_exact(2).zip(b.chunks_exact(2)).map(|(x, y)| x[0] * y[1] - y[0] * x[1]).sum()
}

fn require_real(params: &EnsembleParams) -> Result<()> {
    if params.field() != crate::ensemble::Field::Real {
        return Err(Error::InvalidParams("real-zero counts belong to the real ensemble".into()));
    }
    Ok(())
}

/// `E[#real zeros in [−2, 2]] = N [1 − (N+1)(2N+1)/(6s²)]`.
pub fn expected_real_in(params: &EnsembleParams) -> Result<f64> {
    require_real(params)?;
    let (n, s) = (params.n() as f64, params.s());
    Ok(n * (1.0 - (n + 1.0) * (2.0 * n + 1.0) / (6.0 * s * s)))
}

/// `∫_{−2}^{2} κε(x, x) dx` by quadrature.
pub fn expected_real_in_quadrature(kernel: &RealKernel, spec: &QuadratureSpec) -> Result<QuadResult<f64>> {
    integrate_interval(|x| kernel.real_intensity(x), -2.0, 2.0, spec)
}

/// `x_max` beyond which `∫ κε(x, x)` is below `tol/10`, from
/// `κε(x, x) ≲ 4^s x^{2N−1−2s}`.
pub fn real_truncation_radius(params: &EnsembleParams, tol: f64) -> Result<f64> {
    exterior_truncation_radius(params.s(), 2.0 * params.n() as f64 - 3.0, tol)
}

/// `E[#real zeros outside (−2, 2)] = 2 ∫_2^∞ κε(x, x) dx`, integrated in
/// `x = ρ + 1/ρ` where `φ(x) = ρ^s`.
pub fn expected_real_out(kernel: &RealKernel, spec: &QuadratureSpec) -> Result<QuadResult<f64>> {
    spec.validate()?;
    let r = real_truncation_radius(kernel.params(), spec.tol)?;
    let half = adaptive_gk(
        |rho: f64| kernel.real_intensity(rho + 1.0 / rho) * (1.0 / (rho * rho) - 1.0),
        rho_for_radius(r),
        1.0,
        spec.tol,
        spec.max_subdivisions,
    )?;
    Ok(QuadResult { value: 2.0 * half.value, error: 2.0 * half.error, evaluations: half.evaluations })
}

/// `∫_{C+} R_{0,1} dμ`, the expected number of conjugate pairs.
pub fn expected_complex_pairs(kernel: &RealKernel, spec: &QuadratureSpec) -> Result<QuadResult<f64>> {
    let r = exterior_truncation_radius(kernel.params().s(), 2.0 * kernel.params().n() as f64 - 2.0, spec.tol)?;
    integrate_exterior_upper(|z| kernel.complex_intensity(z), rho_for_radius(r), spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RuleKind;
    use crate::skew_system::eps_quadrature;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn kernel(n: usize, s: f64) -> RealKernel {
        RealKernel::new(EnsembleParams::real(n, s).unwrap()).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn low_order_values() {
        let k = kernel(2, 10.0);
        assert!((k.eps_transform(0, c(2.0, 0.0)).unwrap().re + 3.0 / 8.0).abs() < 1e-15);
        assert!((k.orto_kernel(c(0.0, 0.0), c(1.0, 0.0)).re - 0.18).abs() < 1e-15);
        // ε(φπ_1)(0) = ∫_0^∞ φπ_1 = 0.24·4 + 2/s².
        assert!((k.eps_transform(1, c(0.0, 0.0)).unwrap().re - 0.98).abs() < 1e-14);
        let m = k.matrix_kernel(c(0.0, 0.0), c(0.0, 0.0));
        assert!((m.kappa_eps.re - 0.3675).abs() < 1e-14);
        // Interior diagonal (3/8)(0.98 − 0.24x² + 0.48x²).
        for x in [-1.5, 0.3, 1.9] {
            assert!((k.real_intensity(x) - 0.375 * (0.98 + 0.24 * x * x)).abs() < 1e-14);
        }
        assert!(EnsembleParams::real(3, 10.0).is_err());
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let k = kernel(8, 12.0);
        let b = k.basis();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for trial in 0..30 {
            let x = if trial % 2 == 0 { rng.gen_range(-2.0..2.0) } else { rng.gen_range(2.0..6.0) * if trial % 4 == 1 { 1.0 } else { -1.0 } };
            let eps = k.eps_all(c(x, 0.0));
            for n in 0..8 {
                let p = |t: f64| b.skew_poly(n, c(t, 0.0)).unwrap().re;
                let q = eps_quadrature(12.0, &p, n, x, 1e-11).unwrap();
                assert!((eps[n].re - q).abs() < 1e-8, "n={n} x={x}: {} vs {q}", eps[n].re);
            }
        }
    }

    #[test]
    fn junction_continuity() {
        let k = kernel(10, 14.0);
        for x0 in [2.0f64, -2.0] {
            let a = k.eps_all(c(x0 * (1.0 - 5e-10), 0.0));
            let b = k.eps_all(c(x0 * (1.0 + 5e-10), 0.0));
            for n in 0..10 {
                assert!((a[n] - b[n]).norm() < 1e-6, "n={n} at {x0}");
            }
        }
    }

    #[test]
    fn complex_branch_and_shift() {
        let k = kernel(4, 9.0);
        let z = c(0.4, 0.9);
        let s = 9.0;
        for n in 0..4 {
            let direct = c(0.0, 1.0) * (k.basis().skew_poly_expansion(n, z.conj()).unwrap() * weight_phi(s, z.conj()));
            assert!((k.eps_transform(n, z).unwrap() - direct).norm() < 1e-13);
            let below = k.eps_transform(n, z.conj()).unwrap();
            assert!((below + c(0.0, 1.0) * k.basis().skew_poly(n, z).unwrap() * weight_phi(s, z)).norm() < 1e-13);
        }
    }

    #[test]
    fn kernel_invariant_under_odd_shift() {
        let p = EnsembleParams::real(6, 11.0).unwrap();
        let a = RealKernel::new(p).unwrap();
        let b = RealKernel::from_basis(SkewBasis::new(p).unwrap().with_odd_shift(0.7)).unwrap();
        for (z, w) in [(c(0.3, 0.0), c(-1.1, 0.0)), (c(2.7, 0.0), c(0.5, 1.2)), (c(-0.4, 0.3), c(3.1, -0.2))] {
            let (ma, mb) = (a.matrix_kernel(z, w), b.matrix_kernel(z, w));
            assert!((ma.kappa - mb.kappa).norm() < 1e-12);
            assert!((ma.kappa_eps - mb.kappa_eps).norm() < 1e-12);
            assert!((ma.eps_kappa - mb.eps_kappa).norm() < 1e-12);
            assert!((ma.eps_kappa_eps_plus_sgn - mb.eps_kappa_eps_plus_sgn).norm() < 1e-12);
        }
    }

    #[test]
    fn pfaffian_correlations() {
        let k = kernel(4, 10.0);
        assert!((k.correlation_rlm(&[0.7], &[]).unwrap() - k.real_intensity(0.7)).abs() < 1e-14);
        assert!(k.correlation_rlm(&[0.7, 0.7], &[]).unwrap().abs() < 1e-9);
        let z = c(0.5, 0.5);
        let k2 = kernel(2, 10.0);
        let r = k2.correlation_rlm(&[], &[z]).unwrap();
        // Independent 2×2 assembly from the complex ε branch.
        let b = k2.basis();
        let phi = weight_phi(10.0, z);
        let eps1 = c(0.0, 1.0) * (b.skew_poly_expansion(1, z).unwrap() * phi).conj();
        let eps0 = c(0.0, 1.0) * (b.skew_poly_expansion(0, z).unwrap() * phi).conj();
        let oracle = 2.0 * phi * (b.skew_poly_expansion(0, z).unwrap() * eps1 - eps0 * b.skew_poly_expansion(1, z).unwrap());
        assert!(r >= 0.0 && (r - oracle.re).abs() < 1e-13 && oracle.im.abs() < 1e-13, "{r} {oracle}");
        assert!((r - k2.complex_intensity(z)).abs() < 1e-13);
        assert!(k.correlation_rlm(&[], &[c(0.1, -0.2)]).is_err());
        let two = k.correlation_rlm(&[0.2, 1.5], &[c(0.3, 0.8)]).unwrap();
        assert!(two.is_finite());
    }

    #[test]
    fn expected_counts_small() {
        let p = EnsembleParams::real(2, 10.0).unwrap();
        assert!((expected_real_in(&p).unwrap() - 1.95).abs() < 1e-15);
        let k = kernel(2, 10.0);
        let spec = QuadratureSpec::default().with_rule(RuleKind::TanhSinh);
        let q = expected_real_in_quadrature(&k, &spec).unwrap().value;
        assert!((q - 1.95).abs() < 1e-9);
        let out = expected_real_out(&k, &QuadratureSpec::default()).unwrap().value;
        assert!(out > 0.0);
        let pairs = expected_complex_pairs(&k, &QuadratureSpec::default()).unwrap().value;
        assert!((q + out + 2.0 * pairs - 2.0).abs() < 1e-6, "{q} {out} {pairs}");
    }

    #[test]
    fn intensities_nonnegative() {
        let k = kernel(6, 9.0);
        for i in 0..60 {
            let x = -6.0 + 0.2 * i as f64;
            assert!(k.real_intensity(x) >= -1e-12, "x={x}");
            for j in 1..8 {
                assert!(k.complex_intensity(c(x, 0.25 * j as f64)) >= -1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn matrix_kernel_symmetries(x in -5.0f64..5.0, y in -5.0f64..5.0, u in -3.0f64..3.0, v in 0.05f64..3.0) {
            let k = kernel(4, 8.0);
            let (z, w) = (c(x, 0.0), c(u, v));
            let a = k.matrix_kernel(z, w);
            let b = k.matrix_kernel(w, z);
            prop_assert!((a.eps_kappa + b.kappa_eps).norm() < 1e-11);
            prop_assert!((a.kappa + b.kappa).norm() < 1e-11);
            prop_assert!(k.orto_kernel(z, z).norm() < 1e-12);
            let r = k.matrix_kernel(c(x, 0.0), c(y, 0.0));
            let rt = k.matrix_kernel(c(y, 0.0), c(x, 0.0));
            prop_assert!((r.eps_kappa_eps_plus_sgn + rt.eps_kappa_eps_plus_sgn).norm() < 1e-12);
            prop_assert!((k.orto_kernel(-z, -w) + k.orto_kernel(z, w)).norm() < 1e-11);
        }
    }
}
