//! Uniform sampling from the reciprocal Mahler starbody, empirical root
//! statistics, and a Metropolis chain on the complex ensemble for
//! cross-validation.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ensemble::{log_phi_product, EnsembleParams, Field, PolynomialCoeffs};
use crate::error::{Error, Result};
use crate::linalg::{poly_roots, poly_roots_with_tol, Region};
use crate::specfun::C64;

/// Default relative tolerance below which a root counts as real.
pub const DEFAULT_REALNESS_TOL: f64 = 1e-8;

/// Proposals allowed per batch before the sampler gives up. Acceptance falls
/// steeply with `N` because the starbody has thin spikes at polynomials whose
/// roots cluster at `±2`.
pub const PROPOSAL_BUDGET: u64 = 200_000_000;

/// Tolerances reported in the realness sensitivity sweep.
pub const SENSITIVITY_TOLS: [f64; 3] = [1e-10, 1e-8, 1e-6];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialSample {
    pub coeffs: PolynomialCoeffs,
    #[serde(with = "complex_vec")]
    pub roots: Vec<C64>,
    pub seed: u64,
    pub index: usize,
}

mod complex_vec {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        Ok(Vec::<[f64; 2]>::deserialize(d)?.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

/// Output of [`sample_starbody`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StarbodyBatch {
    pub lambda: f64,
    pub dimension: usize,
    pub samples: Vec<PolynomialSample>,
    /// Lower envelope on the gauge over the unit sphere used for rejection.
    pub envelope: f64,
    pub proposals: u64,
    /// Directions redrawn because their leading coefficient vanished numerically.
    pub resampled: usize,
    /// Times the envelope was lowered and the stream restarted.
    pub restarts: usize,
}

/// Homogeneity exponent `λ = (N+1)/s` whose starbody induces the ensemble.
pub fn starbody_lambda(params: &EnsembleParams) -> f64 {
    (params.n() + 1) as f64 / params.s()
}

/// Real dimension of the coefficient space.
pub fn starbody_dimension(params: &EnsembleParams) -> usize {
    match params.field() {
        Field::Real => params.n() + 1,
        Field::Complex => 2 * (params.n() + 1),
    }
}

/// The 1-homogeneous gauge `(M^rec_λ)^{1/λ} = |a_N| ∏ max(1, |Φ(α)|)^{1/λ}`.
pub fn starbody_gauge(lambda: f64, lead: C64, roots: &[C64]) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParams(format!("gauge needs λ > 0, got {lambda}")));
    }
    Ok(lead.norm() * (log_phi_product(roots) / lambda).exp())
}

/// Radius along a direction of gauge `gauge` for a uniform point of the
/// `d`-dimensional starbody: `V^{1/d}/gauge`, `V ~ U(0, 1)`.
pub fn sample_radius<R: Rng>(rng: &mut R, d: usize, gauge: f64) -> f64 {
    let v: f64 = rng.gen();
    v.powf(1.0 / d as f64) / gauge
}

/// Monomial coefficients (ascending) of `1, D_1, …, D_N` with
/// `D_k(x) = 2T_k(x/2)`, so that `D_k(z + 1/z) = z^k + z^{−k}`.
fn chebyshev_basis(n: usize) -> Vec<Vec<C64>> {
    let mut d: Vec<Vec<f64>> = vec![vec![2.0], vec![0.0, 1.0]];
    for k in 2..=n {
        let mut next = vec![0.0; k + 1];
        for (i, v) in d[k - 1].iter().enumerate() {
            next[i + 1] += v;
        }
        for (i, v) in d[k - 2].iter().enumerate() {
            next[i] -= v;
        }
        d.push(next);
    }
    d[0] = vec![1.0];
    d.truncate(n + 1);
    d.into_iter().map(|col| col.into_iter().map(|v| C64::new(v, 0.0)).collect()).collect()
}

/// Linear chart `w ↦ Σ_j w_j col_j` onto monomial coefficients. Linear maps
/// carry uniform laws on one starbody to uniform laws on its image.
#[derive(Debug, Clone)]
struct Chart {
    cols: Vec<Vec<C64>>,
}

impl Chart {
    fn apply(&self, w: &[C64]) -> Vec<C64> {
        let mut x = vec![C64::new(0.0, 0.0); w.len()];
        for (wk, col) in w.iter().zip(&self.cols) {
            for (i, v) in col.iter().enumerate() {
                x[i] += wk * v;
            }
        }
        x
    }

    /// Monomial coefficients, roots and gauge of `w`; `None` when the
    /// leading coefficient degenerates.
    fn gauge(&self, lambda: f64, w: &[C64]) -> Result<Option<(f64, Vec<C64>, Vec<C64>)>> {
        let x = self.apply(w);
        match poly_roots(&x) {
            Ok(roots) => {
                let g = starbody_gauge(lambda, x[x.len() - 1], &roots)?;
                Ok((g.is_finite() && g > 0.0).then_some((g, roots, x)))
            }
            Err(Error::DegeneratePolynomial) => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn gauge_or_inf(&self, lambda: f64, w: &[C64]) -> Result<f64> {
        Ok(self.gauge(lambda, w)?.map_or(f64::INFINITY, |t| t.0))
    }
}

fn gaussian_vec<R: Rng>(rng: &mut R, field: Field, len: usize) -> Vec<C64> {
    (0..len)
        .map(|_| match field {
            Field::Real => C64::new(rng.sample(StandardNormal), 0.0),
            Field::Complex => C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)),
        })
        .collect()
}

fn draw_direction<R: Rng>(rng: &mut R, params: &EnsembleParams) -> Vec<C64> {
    let mut u = gaussian_vec(rng, params.field(), params.n() + 1);
    normalize(&mut u);
    u
}

fn normalize(u: &mut [C64]) {
    let norm = u.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for c in u.iter_mut() {
        *c /= norm;
    }
}

/// Whitening chart: Chebyshev coordinates times the Cholesky factor of the
/// second-moment matrix of a pilot random walk on the starbody. The walk only
/// shapes the proposal; exactness rests on the envelope.
fn whitened_chart<R: Rng>(rng: &mut R, params: &EnsembleParams, lambda: f64) -> Result<Chart> {
    let len = params.n() + 1;
    let cheb = Chart { cols: chebyshev_basis(params.n()) };
    let mut x = vec![C64::new(0.0, 0.0); len];
    x[len - 1] = C64::new(1e-3, 0.0);
    let steps = 4000 * len;
    let burn = steps / 4;
    let mut sigma = 0.1;
    let mut accepted = 0;
    let mut cov = DMatrix::<C64>::zeros(len, len);
    for it in 0..steps {
        let y: Vec<C64> = x.iter().zip(gaussian_vec(rng, params.field(), len)).map(|(a, g)| a + g * sigma).collect();
        if cheb.gauge_or_inf(lambda, &y)? <= 1.0 {
            x = y;
            accepted += 1;
        }
        if it % 200 == 199 {
            sigma *= if accepted > 60 { 1.2 } else { 0.8 };
            accepted = 0;
        }
        if it >= burn {
            for a in 0..len {
                for b in 0..len {
                    cov[(a, b)] += x[a] * x[b].conj();
                }
            }
        }
    }
    cov /= C64::new((steps - burn) as f64, 0.0);
    let ridge = 1e-9 * (0..len).map(|k| cov[(k, k)].re).fold(0.0, f64::max);
    for k in 0..len {
        cov[(k, k)] += ridge;
    }
    let l = cov.cholesky().ok_or_else(|| Error::InvalidParams("degenerate pilot covariance".into()))?.l();
    let cols = (0..len).map(|j| cheb.apply(&(0..len).map(|i| l[(i, j)]).collect::<Vec<_>>())).collect();
    Ok(Chart { cols })
}

/// Numerical lower envelope for the gauge on the unit sphere of the chart:
/// multistart from the coordinate axes and random directions, shrinking-step
/// local search, less a 10% margin.
fn gauge_envelope<R: Rng>(rng: &mut R, params: &EnsembleParams, lambda: f64, chart: &Chart) -> Result<f64> {
    let len = params.n() + 1;
    let mut starts: Vec<Vec<C64>> = (0..len)
        .map(|k| (0..len).map(|i| C64::new(if i == k { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect();
    let mut pool: Vec<(f64, Vec<C64>)> = Vec::new();
    for _ in 0..2000 {
        let u = draw_direction(rng, params);
        pool.push((chart.gauge_or_inf(lambda, &u)?, u));
    }
    pool.sort_by(|a, b| a.0.total_cmp(&b.0));
    starts.extend(pool.into_iter().take(24).map(|(_, u)| u));
    let mut best = f64::INFINITY;
    for mut u in starts {
        let mut g = chart.gauge_or_inf(lambda, &u)?;
        if !g.is_finite() {
            continue;
        }
        let mut step = 0.1;
        while step > 1e-4 {
            let mut improved = false;
            for _ in 0..20 {
                let mut v: Vec<C64> = u.iter().zip(gaussian_vec(rng, params.field(), len)).map(|(c, e)| c + e * step).collect();
                normalize(&mut v);
                let gv = chart.gauge_or_inf(lambda, &v)?;
                if gv < g {
                    (u, g, improved) = (v, gv, true);
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        best = best.min(g);
    }
    Ok(0.9 * best)
}

/// `count` i.i.d. uniform draws from the reciprocal starbody for `params`.
///
/// Points are drawn in a whitened chart of the coordinates
/// `f = b_0 + Σ_k b_k D_k`, where the starbody is far rounder than in
/// monomial coordinates. Directions are accepted with probability
/// `(envelope/D(u))^d`, which turns the uniform law on the sphere into the
/// cone-volume law `∝ D(u)^{−d}`, and the radius then follows
/// `V^{1/d}/D(u)`. This needs a bounded starbody, i.e. `s ≥ N + 1`. If a
/// direction ever beats the envelope, the envelope is lowered and the stream
/// restarts, so the output stays exact. The stream is sequential and fully
/// determined by `seed`.
pub fn sample_starbody(params: &EnsembleParams, seed: u64, count: usize) -> Result<StarbodyBatch> {
    if count == 0 {
        return Err(Error::InvalidParams("sample count must be at least 1".into()));
    }
    let lambda = starbody_lambda(params);
    if lambda > 1.0 {
        return Err(Error::InvalidParams(format!(
            "the starbody is unbounded for s < N + 1 (N = {}, s = {}); direct sampling needs s ≥ N + 1",
            params.n(),
            params.s()
        )));
    }
    let d = starbody_dimension(params);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chart = whitened_chart(&mut rng, params, lambda)?;
    let mut envelope = gauge_envelope(&mut rng, params, lambda, &chart)?;
    let mut restarts = 0;
    'restart: loop {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let mut samples = Vec::with_capacity(count);
        let (mut resampled, mut proposals) = (0usize, 0u64);
        while samples.len() < count {
            proposals += 1;
            if proposals > PROPOSAL_BUDGET {
                return Err(Error::NonConvergence { value: samples.len() as f64, error: count as f64 });
            }
            let u = draw_direction(&mut rng, params);
            let Some((gauge, roots, x)) = chart.gauge(lambda, &u)? else {
                resampled += 1;
                continue;
            };
            if gauge < envelope {
                envelope = 0.9 * gauge;
                restarts += 1;
                continue 'restart;
            }
            if rng.gen::<f64>() >= (envelope / gauge).powi(d as i32) {
                continue;
            }
            let r = sample_radius(&mut rng, d, gauge);
            let coeffs = PolynomialCoeffs::new(x.iter().map(|c| c * r).collect())?;
            samples.push(PolynomialSample { coeffs, roots, seed, index: samples.len() });
        }
        return Ok(StarbodyBatch { lambda, dimension: d, samples, envelope, proposals, resampled, restarts });
    }
}

/// Where roots are counted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "count", rename_all = "kebab-case")]
pub enum CountRegion {
    /// Real roots in `[a, b]`.
    RealInterval { a: f64, b: f64 },
    /// Nonreal roots inside a planar region.
    Nonreal { region: Region },
    /// All roots inside a planar region.
    All { region: Region },
}

impl CountRegion {
    fn count(&self, roots: &[C64], is_real: impl Fn(C64) -> bool) -> u64 {
        roots
            .iter()
            .filter(|&&r| match self {
                CountRegion::RealInterval { a, b } => is_real(r) && r.re >= *a && r.re <= *b,
                CountRegion::Nonreal { region } => !is_real(r) && region.contains(r),
                CountRegion::All { region } => region.contains(r),
            })
            .count() as u64
    }

    fn depends_on_realness(&self) -> bool {
        !matches!(self, CountRegion::All { .. })
    }
}

/// Sufficient statistics of a count; merging is exact and order-independent.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountAccumulator {
    pub n: u64,
    pub sum: u64,
    pub sum_sq: u64,
}

impl CountAccumulator {
    pub fn push(&mut self, k: u64) {
        self.n += 1;
        self.sum += k;
        self.sum_sq += k * k;
    }

    pub fn merge(&mut self, other: &Self) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn summary(&self) -> CountSummary {
        let n = self.n as f64;
        let mean = self.sum as f64 / n;
        let var = if self.n > 1 { (self.sum_sq as f64 - n * mean * mean) / (n - 1.0) } else { 0.0 };
        CountSummary { mean, var, stderr: (var / n).sqrt(), n: self.n }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountSummary {
    pub mean: f64,
    pub var: f64,
    pub stderr: f64,
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub region: CountRegion,
    #[serde(flatten)]
    pub stats: CountSummary,
}

/// Mean counts of the realness-dependent regions at one tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sensitivity {
    pub tol: f64,
    pub means: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootsReport {
    pub realness_tol: f64,
    pub samples: usize,
    /// Every sample carried exactly `degree` roots.
    pub root_count_ok: bool,
    pub regions: Vec<RegionReport>,
    pub tol_sensitivity: Vec<Sensitivity>,
}

fn realness(roots: &[C64], tol: f64) -> impl Fn(C64) -> bool {
    let scale = roots.iter().fold(0.0f64, |m, r| m.max(r.norm())).max(f64::MIN_POSITIVE);
    move |r: C64| r.im.abs() <= tol * scale
}

/// Empirical count statistics per region. For real-coefficient samples the
/// realness classification is redone from the coefficients at each tolerance
/// in [`SENSITIVITY_TOLS`].
pub fn roots_statistics(samples: &[PolynomialSample], regions: &[CountRegion], realness_tol: f64) -> Result<RootsReport> {
    if samples.is_empty() {
        return Err(Error::InvalidParams("no samples".into()));
    }
    if !(realness_tol > 0.0) {
        return Err(Error::InvalidParams(format!("realness tolerance must be positive, got {realness_tol}")));
    }
    let mut acc = vec![CountAccumulator::default(); regions.len()];
    let mut root_count_ok = true;
    for s in samples {
        root_count_ok &= s.roots.len() == s.coeffs.degree();
        let is_real = realness(&s.roots, realness_tol);
        for (a, reg) in acc.iter_mut().zip(regions) {
            a.push(reg.count(&s.roots, &is_real));
        }
    }
    let dependent: Vec<&CountRegion> = regions.iter().filter(|r| r.depends_on_realness()).collect();
    let all_real = samples.iter().all(|s| s.coeffs.is_real());
    let mut tol_sensitivity = Vec::new();
    for &tol in &SENSITIVITY_TOLS {
        let mut acc = vec![CountAccumulator::default(); dependent.len()];
        for s in samples {
            let roots = if all_real { poly_roots_with_tol(s.coeffs.coeffs(), tol)? } else { s.roots.clone() };
            let is_real = realness(&roots, tol);
            for (a, reg) in acc.iter_mut().zip(&dependent) {
                a.push(reg.count(&roots, &is_real));
            }
        }
        tol_sensitivity.push(Sensitivity { tol, means: acc.iter().map(|a| a.summary().mean).collect() });
    }
    Ok(RootsReport {
        realness_tol,
        samples: samples.len(),
        root_count_ok,
        regions: regions.iter().zip(&acc).map(|(r, a)| RegionReport { region: *r, stats: a.summary() }).collect(),
        tol_sensitivity,
    })
}

/// States of a Metropolis chain, one per sweep of `N` single-site proposals.
#[derive(Debug, Clone, Serialize)]
pub struct McmcRun {
    #[serde(skip)]
    pub states: Vec<Vec<C64>>,
    pub proposed: u64,
    pub accepted: u64,
}

impl McmcRun {
    pub fn acceptance_rate(&self) -> f64 {
        self.accepted as f64 / self.proposed as f64
    }
}

fn log_site(s: f64, z: C64) -> f64 {
    let m = crate::specfun::joukowski_phi(z).norm();
    if m > 1.0 {
        -s * m.ln()
    } else {
        0.0
    }
}

/// Random-walk Metropolis on `Σ 2 log φ(z_n) + 2 Σ_{m<n} log|z_n − z_m|`,
/// the density whose kernel is `φ(z)φ(w) Σ π_n(z) conj π_n(w)`, with Gaussian
/// proposals of scale `step_scale` per site.
pub fn mcmc_complex(params: &EnsembleParams, seed: u64, chain_length: usize, step_scale: f64) -> Result<McmcRun> {
    if params.field() != Field::Complex {
        return Err(Error::RegimeMismatch("the Metropolis chain targets the complex ensemble".into()));
    }
    if chain_length == 0 || !(step_scale > 0.0 && step_scale.is_finite()) {
        return Err(Error::InvalidParams("chain length and step scale must be positive".into()));
    }
    let n = params.n();
    let s = params.s();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z: Vec<C64> = (0..n).map(|k| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n as f64)).collect();
    let site_energy = |z: &[C64], k: usize, w: C64| -> f64 {
        let pair: f64 = z.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, &p)| (w - p).norm().ln()).sum();
        2.0 * (log_site(s, w) + pair)
    };
    let mut states = Vec::with_capacity(chain_length);
    let (mut proposed, mut accepted) = (0u64, 0u64);
    for _ in 0..chain_length {
        for k in 0..n {
            let dz = C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)) * step_scale;
            let w = z[k] + dz;
            let delta = site_energy(&z, k, w) - site_energy(&z, k, z[k]);
            proposed += 1;
            if delta >= 0.0 || rng.gen::<f64>() < delta.exp() {
                z[k] = w;
                accepted += 1;
            }
        }
        states.push(z.clone());
    }
    if accepted == 0 {
        return Err(Error::NoAcceptance);
    }
    Ok(McmcRun { states, proposed, accepted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex_kernel::{correlation_rn, expected_count_complex, kernel_diagonal};
    use crate::ensemble::mahler_rec;
    use crate::linalg::QuadratureSpec;
    use crate::real_kernel::{expected_complex_pairs, expected_real_in, RealKernel};

    #[test]
    fn samples_lie_in_the_starbody() {
        for params in [EnsembleParams::real(2, 3.0).unwrap(), EnsembleParams::complex(1, 4.0).unwrap(), EnsembleParams::complex(2, 6.0).unwrap()] {
            let lambda = starbody_lambda(&params);
            let batch = sample_starbody(&params, 11, if params.n() == 2 && params.field() == Field::Complex { 5 } else { 300 }).unwrap();
            for s in &batch.samples {
                assert_eq!(s.roots.len(), params.n());
                assert!(mahler_rec(lambda, &s.coeffs).unwrap() <= 1.0 + 1e-10);
            }
        }
        assert!(sample_starbody(&EnsembleParams::real(2, 10.0).unwrap(), 0, 0).is_err());
        assert!(sample_starbody(&EnsembleParams::real(2, 2.5).unwrap(), 0, 1).is_err());
    }

    #[test]
    fn gauge_is_one_homogeneous() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let params = EnsembleParams::complex(4, 9.0).unwrap();
        let lambda = starbody_lambda(&params);
        for _ in 0..50 {
            let u = draw_direction(&mut rng, &params);
            let t = C64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let tu: Vec<C64> = u.iter().map(|c| c * t).collect();
            let g = starbody_gauge(lambda, u[4], &poly_roots(&u).unwrap()).unwrap();
            let gt = starbody_gauge(lambda, tu[4], &poly_roots(&tu).unwrap()).unwrap();
            assert!((gt - t.norm() * g).abs() < 1e-10 * gt);
        }
    }

    #[test]
    fn real_samples_are_conjugation_closed_and_reproducible() {
        let params = EnsembleParams::real(2, 4.0).unwrap();
        let a = sample_starbody(&params, 42, 1000).unwrap();
        for s in &a.samples {
            let mut re: Vec<(f64, f64)> = s.roots.iter().map(|r| (r.re, r.im)).collect();
            let mut conj: Vec<(f64, f64)> = s.roots.iter().map(|r| (r.re, -r.im)).collect();
            re.sort_by(|x, y| x.partial_cmp(y).unwrap());
            conj.sort_by(|x, y| x.partial_cmp(y).unwrap());
            assert_eq!(re, conj);
        }
        let b = sample_starbody(&params, 42, 1000).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn radius_law_matches_gauge() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (d, gauge) = (5usize, 1.7);
        let mut r: Vec<f64> = (0..10_000).map(|_| sample_radius(&mut rng, d, gauge)).collect();
        r.sort_by(f64::total_cmp);
        let n = r.len() as f64;
        let ks = r
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = (x * gauge).powi(d as i32);
                (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
            })
            .fold(0.0f64, f64::max);
        assert!(ks < 0.02, "{ks}");
        assert!(r.last().copied().unwrap() <= 1.0 / gauge);
    }

    #[test]
    fn real_counts_match_kernel_predictions() {
        let params = EnsembleParams::real(2, 10.0).unwrap();
        let batch = sample_starbody(&params, 2024, 20_000).unwrap();
        let upper = Region::Rectangle { x0: -1e9, x1: 1e9, y0: 0.0, y1: 1e9 };
        let regions = [
            CountRegion::RealInterval { a: -2.0, b: 2.0 },
            CountRegion::Nonreal { region: upper },
            CountRegion::Nonreal { region: upper.reflect() },
            CountRegion::All { region: Region::WholePlane },
        ];
        let rep = roots_statistics(&batch.samples, &regions, DEFAULT_REALNESS_TOL).unwrap();
        assert!(rep.root_count_ok);
        let e_in = expected_real_in(&params).unwrap();
        let r = &rep.regions[0].stats;
        assert!((r.mean - e_in).abs() < 3.0 * r.stderr, "{} vs {e_in} ± {}", r.mean, r.stderr);
        let kernel = RealKernel::new(params).unwrap();
        let pairs = expected_complex_pairs(&kernel, &QuadratureSpec::default()).unwrap().value;
        let u = &rep.regions[1].stats;
        assert!((u.mean - pairs).abs() < 3.0 * u.stderr, "{} vs {pairs}", u.mean);
        assert_eq!(rep.regions[1].stats.mean, rep.regions[2].stats.mean);
        assert_eq!(rep.regions[3].stats.mean, 2.0);
        assert_eq!(rep.tol_sensitivity.len(), 3);
        assert_eq!(rep.tol_sensitivity[0].means.len(), 3);
    }

    #[test]
    fn complex_counts_match_kernel_prediction() {
        // Also pins the identification s = (N+1)/λ with the weight φ² per root.
        let params = EnsembleParams::complex(1, 4.0).unwrap();
        let disk = Region::Disk { center: [0.5, 0.0], radius: 2.2 };
        let expected = expected_count_complex(&params, &disk, &QuadratureSpec::default().with_tol(1e-8)).unwrap().value;
        let batch = sample_starbody(&params, 77, 20_000).unwrap();
        let rep = roots_statistics(&batch.samples, &[CountRegion::All { region: disk }], DEFAULT_REALNESS_TOL).unwrap();
        let st = &rep.regions[0].stats;
        assert!((st.mean - expected).abs() < 3.0 * st.stderr, "{} vs {expected} ± {}", st.mean, st.stderr);
    }

    /// Mean and batch-means standard error of a correlated series.
    fn batch_means(x: &[f64], batches: usize) -> (f64, f64) {
        let m = x.len() / batches;
        let means: Vec<f64> = x.chunks_exact(m).map(|c| c.iter().sum::<f64>() / m as f64).collect();
        let mu = means.iter().sum::<f64>() / batches as f64;
        let var = means.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (batches - 1) as f64;
        (mu, (var / batches as f64).sqrt())
    }

    #[test]
    fn metropolis_chain_matches_kernel_and_reflection() {
        let params = EnsembleParams::complex(3, 6.0).unwrap();
        let disk = Region::Disk { center: [0.0, 0.0], radius: 2.2 };
        let expected = expected_count_complex(&params, &disk, &QuadratureSpec::default().with_tol(1e-8)).unwrap().value;
        let run = mcmc_complex(&params, 3, 400_000, 0.8).unwrap();
        assert!(run.acceptance_rate() > 0.1 && run.acceptance_rate() < 0.9);
        let burn = 1000;
        let counts: Vec<f64> = run.states[burn..].iter().map(|z| z.iter().filter(|&&w| disk.contains(w)).count() as f64).collect();
        let (mu, se) = batch_means(&counts, 50);
        assert!((mu - expected).abs() < 3.0 * se, "{mu} ± {se} vs {expected}");
        let half = Region::Disk { center: [0.5, 1.0], radius: 1.0 };
        let c1: Vec<f64> = run.states[burn..].iter().map(|z| z.iter().filter(|&&w| half.contains(w)).count() as f64).collect();
        let c2: Vec<f64> = run.states[burn..].iter().map(|z| z.iter().filter(|&&w| half.reflect().contains(w)).count() as f64).collect();
        let ((m1, s1), (m2, s2)) = (batch_means(&c1, 50), batch_means(&c2, 50));
        assert!((m1 - m2).abs() < 3.0 * (s1 * s1 + s2 * s2).sqrt(), "{m1} {m2}");
    }

    #[test]
    fn metropolis_rejects_bad_setup() {
        assert!(mcmc_complex(&EnsembleParams::real(2, 10.0).unwrap(), 0, 10, 0.5).is_err());
        assert!(matches!(mcmc_complex(&EnsembleParams::complex(3, 6.0).unwrap(), 0, 5, 1e12), Err(Error::NoAcceptance)));
    }

    #[test]
    fn pair_correlation_vanishes_at_coincidence() {
        let params = EnsembleParams::complex(3, 6.0).unwrap();
        let z = C64::new(0.3, 0.4);
        let r1 = kernel_diagonal(&params, z);
        let ratio = |d: f64| correlation_rn(&params, &[z, z + d]).unwrap() / (r1 * kernel_diagonal(&params, z + d));
        assert!(ratio(1e-2) < 0.1 * ratio(2.0), "{} {}", ratio(1e-2), ratio(2.0));
    }
}
