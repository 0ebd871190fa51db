//! Ensemble parameters, the weight `φ = |Φ|^{-s}`, the potential and the two
//! Mahler measures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::poly_roots;
use crate::specfun::{joukowski_phi, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl std::str::FromStr for Field {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(Field::Real),
            "complex" => Ok(Field::Complex),
            other => Err(Error::InvalidParams(format!("unknown field '{other}'"))),
        }
    }
}

/// `(N, s, field)` with `s > N`, and `N` even for the real ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct EnsembleParams {
    n: usize,
    s: f64,
    field: Field,
}

#[derive(Deserialize)]
struct RawParams {
    n: usize,
    s: f64,
    field: Field,
}

impl TryFrom<RawParams> for EnsembleParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        EnsembleParams::new(r.n, r.s, r.field)
    }
}

impl EnsembleParams {
    pub fn new(n: usize, s: f64, field: Field) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("N must be positive".into()));
        }
        if !s.is_finite() || s <= n as f64 {
            return Err(Error::InvalidParams(format!("need s > N, got N = {n}, s = {s}")));
        }
        if field == Field::Real && !n.is_multiple_of(2) {
            return Err(Error::InvalidParams(format!("the real ensemble needs even N, got {n}")));
        }
        Ok(Self { n, s, field })
    }

    pub fn complex(n: usize, s: f64) -> Result<Self> {
        Self::new(n, s, Field::Complex)
    }

    pub fn real(n: usize, s: f64) -> Result<Self> {
        Self::new(n, s, Field::Real)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// `N / s`.
    pub fn lambda_eff(&self) -> f64 {
        self.n as f64 / self.s
    }

    /// `s − N`.
    pub fn c_eff(&self) -> f64 {
        self.s - self.n as f64
    }

    pub fn weight(&self, z: C64) -> f64 {
        weight_phi(self.s, z)
    }
}

fn on_segment(z: C64) -> bool {
    z.im == 0.0 && z.re.abs() <= 2.0
}

/// `φ(z) = |Φ(z)|^{-s}`; exactly 1 on `[-2, 2]`.
pub fn weight_phi(s: f64, z: C64) -> f64 {
    if on_segment(z) {
        return 1.0;
    }
    (-potential_v(s, z)).exp()
}

/// `V(z) = s log|Φ(z)|`, the scaled equilibrium potential of `[-2, 2]`.
pub fn potential_v(s: f64, z: C64) -> f64 {
    if on_segment(z) {
        return 0.0;
    }
    s * joukowski_phi(z).norm().ln()
}

/// Coefficients `a_0, …, a_N` of a degree-`N` polynomial, ascending.
/// Serialized as an array of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct PolynomialCoeffs {
    coeffs: Vec<C64>,
}

impl TryFrom<Vec<[f64; 2]>> for PolynomialCoeffs {
    type Error = Error;
    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(v.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

impl From<PolynomialCoeffs> for Vec<[f64; 2]> {
    fn from(p: PolynomialCoeffs) -> Self {
        p.coeffs.iter().map(|c| [c.re, c.im]).collect()
    }
}

impl PolynomialCoeffs {
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::DegeneratePolynomial);
        }
        let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        let lead = coeffs[coeffs.len() - 1].norm();
        if lead == 0.0 || lead <= 1e-15 * scale {
            return Err(Error::DegeneratePolynomial);
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn leading(&self) -> C64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im == 0.0)
    }

    pub fn eval(&self, z: C64) -> C64 {
        crate::linalg::horner(&self.coeffs, z).0
    }

    pub fn roots(&self) -> Result<Vec<C64>> {
        poly_roots(&self.coeffs)
    }

    pub fn scaled(&self, t: C64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * t).collect() }
    }
}

const UNIT_GUARD: f64 = 1e-12;

fn lead_power(lead: C64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        1.0
    } else {
        lead.norm().powf(lambda)
    }
}

/// `|a|^λ ∏ max(1, |α_n|)`.
pub fn mahler(lambda: f64, f: &PolynomialCoeffs) -> Result<f64> {
    mahler_from_roots(lambda, f.leading(), &f.roots()?)
}

pub fn mahler_from_roots(lambda: f64, lead: C64, roots: &[C64]) -> Result<f64> {
    check_lambda(lambda)?;
    let mut log = 0.0;
    for r in roots {
        let m = r.norm();
        if m > 1.0 + UNIT_GUARD {
            log += m.ln();
        }
    }
    Ok(lead_power(lead, lambda) * log.exp())
}

/// `|a|^λ ∏ |Φ(α_n)|`, the Mahler measure of `f(z + 1/z)`.
pub fn mahler_rec(lambda: f64, f: &PolynomialCoeffs) -> Result<f64> {
    mahler_rec_from_roots(lambda, f.leading(), &f.roots()?)
}

pub fn mahler_rec_from_roots(lambda: f64, lead: C64, roots: &[C64]) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(lead_power(lead, lambda) * log_phi_product(roots).exp())
}

/// `Σ log|Φ(α)|` with the unit guard applied per root.
pub fn log_phi_product(roots: &[C64]) -> f64 {
    let mut log = 0.0;
    for r in roots {
        let m = joukowski_phi(*r).norm();
        if m > 1.0 + UNIT_GUARD {
            log += m.ln();
        }
    }
    log
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParams(format!("λ must be finite and nonnegative, got {lambda}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn params_validation() {
        assert!(EnsembleParams::complex(3, 3.0).is_err());
        assert!(EnsembleParams::real(3, 10.0).is_err());
        assert!(EnsembleParams::complex(0, 1.0).is_err());
        let p = EnsembleParams::real(4, 10.0).unwrap();
        assert!((p.lambda_eff() - 0.4).abs() < 1e-15);
        assert!((p.c_eff() - 6.0).abs() < 1e-15);
        let json = serde_json::to_string(&p).unwrap();
        let back: EnsembleParams = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<EnsembleParams>(r#"{"n":4,"s":3.0,"field":"real"}"#).is_err());
    }

    #[test]
    fn weight_examples() {
        assert_eq!(weight_phi(7.3, c(0.7, 0.0)), 1.0);
        assert!((weight_phi(10.0, c(2.5, 0.0)) - 2f64.powi(-10)).abs() < 1e-18);
        let z = c(1.0, 2.0);
        assert!((weight_phi(5.0, -z) - weight_phi(5.0, z)).abs() < 1e-15);
        assert!((weight_phi(5.0, z.conj()) - weight_phi(5.0, z)).abs() < 1e-15);
    }

    #[test]
    fn potential_examples() {
        assert_eq!(potential_v(10.0, c(-1.3, 0.0)), 0.0);
        assert!((potential_v(10.0, c(2.5, 0.0)) - 10.0 * 2f64.ln()).abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let z = c(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            assert!(((-potential_v(4.0, z)).exp() - weight_phi(4.0, z)).abs() < 1e-15);
            assert!(potential_v(4.0, z) >= 0.0);
        }
    }

    #[test]
    fn mahler_examples() {
        let z = PolynomialCoeffs::from_real(&[0.0, 1.0]).unwrap();
        assert!((mahler_rec(1.0, &z).unwrap() - 1.0).abs() < 1e-15);
        let f = PolynomialCoeffs::from_real(&[-3.0, 1.0]).unwrap();
        assert!((mahler_rec(1.0, &f).unwrap() - (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-14);
        let g = PolynomialCoeffs::from_real(&[1.0, -0.5, 3.0]).unwrap();
        let two = g.scaled(c(2.0, 0.0));
        for m in [mahler, mahler_rec] {
            let ratio = m(0.5, &two).unwrap() / m(0.5, &g).unwrap();
            assert!((ratio - 2f64.sqrt()).abs() < 1e-12);
        }
        let lead3 = PolynomialCoeffs::from_real(&[0.0, 3.0]).unwrap();
        assert_eq!(mahler(0.0, &lead3).unwrap(), 1.0);
        assert!(PolynomialCoeffs::from_real(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn coeffs_serialize_as_pairs() {
        let f = PolynomialCoeffs::new(vec![c(1.0, 2.0), c(-0.5, 0.0)]).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, "[[1.0,2.0],[-0.5,0.0]]");
        let back: PolynomialCoeffs = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }

    /// Coefficients of `z^N f(z + 1/z) = Σ a_k z^{N-k} (z² + 1)^k`.
    fn reciprocal_lift(f: &[C64]) -> Vec<C64> {
        let n = f.len() - 1;
        let mut out = vec![c(0.0, 0.0); 2 * n + 1];
        for (k, &a) in f.iter().enumerate() {
            let mut binom = 1.0;
            for j in 0..=k {
                out[n - k + 2 * j] += a * binom;
                binom = binom * (k - j) as f64 / (j + 1) as f64;
            }
        }
        out
    }

    fn mul(a: &[C64], b: &[C64]) -> Vec<C64> {
        let mut out = vec![c(0.0, 0.0); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    #[test]
    fn reciprocal_measure_is_measure_of_lift() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=6 {
            for complex in [false, true] {
                let f: Vec<C64> = (0..=n)
                    .map(|_| c(rng.gen_range(-2.0..2.0), if complex { rng.gen_range(-2.0..2.0) } else { 0.0 }))
                    .collect();
                let f = PolynomialCoeffs::new(f).unwrap();
                let lam = rng.gen_range(0.0..2.0);
                let g = PolynomialCoeffs::new(reciprocal_lift(f.coeffs())).unwrap();
                let a = mahler_rec(lam, &f).unwrap();
                let b = mahler(lam, &g).unwrap();
                assert!((a - b).abs() <= 1e-8 * b, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn mahler_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let da = rng.gen_range(1..=4);
            let db = rng.gen_range(1..=4);
            let a: Vec<C64> = (0..=da).map(|_| c(rng.gen_range(-3.0..3.0), 0.0)).collect();
            let b: Vec<C64> = (0..=db).map(|_| c(rng.gen_range(-3.0..3.0), 0.0)).collect();
            let fa = PolynomialCoeffs::new(a.clone()).unwrap();
            let fb = PolynomialCoeffs::new(b.clone()).unwrap();
            let fab = PolynomialCoeffs::new(mul(&a, &b)).unwrap();
            let lhs = mahler(1.0, &fab).unwrap();
            let rhs = mahler(1.0, &fa).unwrap() * mahler(1.0, &fb).unwrap();
            assert!((lhs - rhs).abs() <= 1e-8 * rhs);
        }
    }
}
