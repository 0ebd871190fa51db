//! Dense determinants and Pfaffians, one- and two-dimensional quadrature, and
//! polynomial root finding.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{joukowski_phi, C64};

/// Field scalars for the dense routines (`f64` and `Complex64`).
pub trait Scalar:
    Copy
    + PartialEq
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Mul<f64, Output = Self>
    + Send
    + Sync
{
    fn zero() -> Self;
    fn one() -> Self;
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Dense skew-symmetric matrix of even dimension, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> SkewMatrix<T> {
    /// Validates evenness and antisymmetry (`max|A + Aᵀ| < 1e-12·scale`).
    pub fn new(dim: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::NotSquare);
        }
        if !dim.is_multiple_of(2) {
            return Err(Error::OddDimension(dim));
        }
        let scale = data.iter().fold(0.0f64, |m, v| m.max(v.modulus())).max(f64::MIN_POSITIVE);
        let mut asym = 0.0f64;
        for i in 0..dim {
            for j in i..dim {
                asym = asym.max((data[i * dim + j] + data[j * dim + i]).modulus());
            }
        }
        if asym > 1e-12 * scale {
            return Err(Error::NotSkew(asym));
        }
        Ok(Self { dim, data })
    }

    /// Builds an exactly antisymmetric matrix from its strict upper triangle.
    pub fn from_upper(dim: usize, mut upper: impl FnMut(usize, usize) -> T) -> Result<Self> {
        if !dim.is_multiple_of(2) {
            return Err(Error::OddDimension(dim));
        }
        let mut data = vec![T::zero(); dim * dim];
        for i in 0..dim {
            for j in (i + 1)..dim {
                let v = upper(i, j);
                data[i * dim + j] = v;
                data[j * dim + i] = -v;
            }
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

/// Pfaffian by skew-symmetric Gaussian elimination with partial pivoting
/// (Parlett–Reid), `O(n³)`. `Pf([[0, a], [-a, 0]]) = a`.
pub fn pfaffian<T: Scalar>(m: &SkewMatrix<T>) -> T {
    let n = m.dim;
    let mut a = m.data.clone();
    let mut pf = T::one();
    let idx = |i: usize, j: usize| i * n + j;
    let mut k = 0;
    while k + 1 < n {
        let mut kp = k + 1;
        let mut best = a[idx(k + 1, k)].modulus();
        for i in (k + 2)..n {
            let v = a[idx(i, k)].modulus();
            if v > best {
                best = v;
                kp = i;
            }
        }
        if kp != k + 1 {
            for j in 0..n {
                a.swap(idx(k + 1, j), idx(kp, j));
            }
            for i in 0..n {
                a.swap(idx(i, k + 1), idx(i, kp));
            }
            pf = -pf;
        }
        if best == 0.0 {
            return T::zero();
        }
        let piv = a[idx(k, k + 1)];
        pf *= piv;
        if k + 2 < n {
            let tau: Vec<T> = ((k + 2)..n).map(|j| a[idx(k, j)] / piv).collect();
            let col: Vec<T> = ((k + 2)..n).map(|i| a[idx(i, k + 1)]).collect();
            for (ii, i) in ((k + 2)..n).enumerate() {
                for (jj, j) in ((k + 2)..n).enumerate() {
                    let upd = tau[ii] * col[jj] - col[ii] * tau[jj];
                    a[idx(i, j)] += upd;
                }
            }
        }
        k += 2;
    }
    pf
}

/// Determinant of a square row-major matrix by LU with partial pivoting.
pub fn determinant<T: Scalar>(dim: usize, data: &[T]) -> Result<T> {
    if data.len() != dim * dim {
        return Err(Error::NotSquare);
    }
    let mut a = data.to_vec();
    let mut det = T::one();
    for k in 0..dim {
        let mut p = k;
        let mut best = a[k * dim + k].modulus();
        for i in (k + 1)..dim {
            let v = a[i * dim + k].modulus();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            return Ok(T::zero());
        }
        if p != k {
            for j in 0..dim {
                a.swap(k * dim + j, p * dim + j);
            }
            det = -det;
        }
        let piv = a[k * dim + k];
        det *= piv;
        for i in (k + 1)..dim {
            let f = a[i * dim + k] / piv;
            if f.modulus() == 0.0 {
                continue;
            }
            for j in (k + 1)..dim {
                let v = a[k * dim + j];
                a[i * dim + j] -= f * v;
            }
        }
    }
    Ok(det)
}

// ---------------------------------------------------------------------------
// Quadrature

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    /// Globally adaptive Gauss–Kronrod (7/15).
    GaussLegendre,
    /// Double-exponential rule; absorbs algebraic endpoint singularities.
    TanhSinh,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rule: RuleKind,
    pub tol: f64,
    pub truncation_radius: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { rule: RuleKind::GaussLegendre, tol: 1e-10, truncation_radius: 16.0, max_subdivisions: 4000 }
    }
}

impl QuadratureSpec {
    pub fn with_rule(mut self, rule: RuleKind) -> Self {
        self.rule = rule;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_radius(mut self, r: f64) -> Self {
        self.truncation_radius = r;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !(self.truncation_radius > 0.0) || self.max_subdivisions == 0 {
            return Err(Error::InvalidParams(format!("bad quadrature spec {self:?}")));
        }
        Ok(())
    }
}

/// Values that can be integrated: real or complex.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + AddAssign + Send + Sync
{
    fn zero() -> Self;
    fn norm(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn norm(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn norm(self) -> f64 {
        C64::norm(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<T: QuadValue>(f: &mut impl FnMut(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    let mut vals = [(T::zero(), T::zero()); 7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        vals[j] = (f1, f2);
        rk += (f1 + f2) * WGK[j];
        if j % 2 == 1 {
            rg += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = rk * 0.5;
    let mut asc = (fc - mean).norm() * WGK[7];
    for j in 0..7 {
        asc += ((vals[j].0 - mean).norm() + (vals[j].1 - mean).norm()) * WGK[j];
    }
    let asc = asc * h.abs();
    let value = rk * h;
    let mut err = ((rk - rg) * h).norm();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    (value, err.max(50.0 * f64::EPSILON * value.norm()))
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Globally adaptive Gauss–Kronrod on `[a, b]`. The target is met when the
/// summed error estimate is below `max(tol, tol·|I|)`.
pub fn adaptive_gk<T: QuadValue>(
    mut f: impl FnMut(f64) -> T,
    a: f64,
    b: f64,
    tol: f64,
    max_subdivisions: usize,
) -> Result<QuadResult<T>> {
    if a == b {
        return Ok(QuadResult { value: T::zero(), error: 0.0, evaluations: 0 });
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut evals = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, error: e });
    let mut total = v;
    let mut total_err = e;
    let mut splits = 0;
    loop {
        if !total_err.is_finite() || !total.norm().is_finite() {
            return Err(Error::NonConvergence { value: total.norm(), error: total_err });
        }
        if total_err <= tol.max(tol * total.norm()) {
            break;
        }
        if splits >= max_subdivisions {
            return Err(Error::NonConvergence { value: total.norm(), error: total_err });
        }
        let seg = heap.pop().expect("heap never empty");
        let m = 0.5 * (seg.a + seg.b);
        let (v1, e1) = gk15(&mut f, seg.a, m);
        let (v2, e2) = gk15(&mut f, m, seg.b);
        evals += 30;
        splits += 1;
        total = total - seg.value + v1 + v2;
        total_err = total_err - seg.error + e1 + e2;
        heap.push(Segment { a: seg.a, b: m, value: v1, error: e1 });
        heap.push(Segment { a: m, b: seg.b, value: v2, error: e2 });
        if splits % 64 == 0 {
            // Re-sum to shed accumulated cancellation in the running totals.
            total = T::zero();
            total_err = 0.0;
            let mut segs: Vec<&Segment<T>> = heap.iter().collect();
            segs.sort_by(|x, y| x.a.total_cmp(&y.a));
            for s in segs {
                total += s.value;
                total_err += s.error;
            }
        }
    }
    let mut segs: Vec<Segment<T>> = heap.into_vec();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut value = T::zero();
    let mut error = 0.0;
    for s in &segs {
        value += s.value;
        error += s.error;
    }
    Ok(QuadResult { value, error, evaluations: evals })
}

/// Tanh-sinh quadrature on `[a, b]`; nodes never coincide with the endpoints,
/// so integrable endpoint singularities are allowed.
pub fn tanh_sinh<T: QuadValue>(mut f: impl FnMut(f64) -> T, a: f64, b: f64, tol: f64, max_level: usize) -> Result<QuadResult<T>> {
    if a == b {
        return Ok(QuadResult { value: T::zero(), error: 0.0, evaluations: 0 });
    }
    let c = 0.5 * (a + b);
    let d = 0.5 * (b - a);
    const T_MAX: f64 = 4.0;
    let mut evals = 0;
    // Node at t: offset from the nearer endpoint computed without cancellation.
    let eval_pair = |t: f64, f: &mut dyn FnMut(f64) -> T| -> T {
        let u = 0.5 * PI * t.sinh();
        let e = (-2.0 * u.abs()).exp();
        let off = d * 2.0 * e / (1.0 + e); // distance to the endpoint: d(1 − tanh|u|)
        let cu = u.cosh();
        let w = d * 0.5 * PI * t.cosh() / (cu * cu);
        if w == 0.0 || !w.is_finite() {
            return T::zero();
        }
        let mut acc = T::zero();
        let xr = b - off;
        let xl = a + off;
        if t == 0.0 {
            return f(c) * w;
        }
        if xr != b && xr > a {
            acc += f(xr) * w;
        }
        if xl != a && xl < b {
            acc += f(xl) * w;
        }
        acc
    };
    let mut h = 1.0;
    let mut sum = eval_pair(0.0, &mut f);
    evals += 1;
    let mut k = 1;
    while (k as f64) * h <= T_MAX {
        sum += eval_pair(k as f64 * h, &mut f);
        evals += 2;
        k += 1;
    }
    let mut estimate = sum * h;
    let mut err = f64::INFINITY;
    for level in 1..=max_level {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= T_MAX {
            sum += eval_pair(k as f64 * h, &mut f);
            evals += 2;
            k += 2;
        }
        let next = sum * h;
        err = (next - estimate).norm();
        estimate = next;
        if !estimate.norm().is_finite() {
            break;
        }
        if level >= 3 && err <= tol.max(tol * estimate.norm()) {
            return Ok(QuadResult { value: estimate, error: err, evaluations: evals });
        }
    }
    Err(Error::NonConvergence { value: estimate.norm(), error: err })
}

/// `∫_a^b f` with the rule chosen by `spec`.
pub fn integrate_interval<T: QuadValue>(f: impl FnMut(f64) -> T, a: f64, b: f64, spec: &QuadratureSpec) -> Result<QuadResult<T>> {
    spec.validate()?;
    match spec.rule {
        RuleKind::GaussLegendre => adaptive_gk(f, a, b, spec.tol, spec.max_subdivisions),
        RuleKind::TanhSinh => {
            let levels = (spec.max_subdivisions as f64).log2().ceil().clamp(4.0, 12.0) as usize;
            tanh_sinh(f, a, b, spec.tol, levels)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    PosInf,
    NegInf,
}

/// `∫_a^{∞} f` or `∫_{-∞}^a f` for `f` decaying like `|x|^{-p}` with `p > 1`.
///
/// The piece beyond the truncation radius `R` is mapped by `x = R τ^{-1/(p-1)}`,
/// which turns the algebraic tail into a bounded integrand on `(0, 1]`.
pub fn integrate_semiinfinite<T: QuadValue>(
    mut f: impl FnMut(f64) -> T,
    a: f64,
    dir: Direction,
    decay: f64,
    spec: &QuadratureSpec,
) -> Result<QuadResult<T>> {
    spec.validate()?;
    if !(decay > 1.0) {
        return Err(Error::InvalidParams(format!("decay exponent {decay} must exceed 1")));
    }
    let sign = match dir {
        Direction::PosInf => 1.0,
        Direction::NegInf => -1.0,
    };
    // Work on y = sign·x, starting at y0 = sign·a.
    let y0 = sign * a;
    let r = spec.truncation_radius.max(y0.abs() + 1.0).max(y0 + 1.0);
    let body = if r > y0 {
        integrate_interval(|y| f(sign * y), y0, r, spec)?
    } else {
        QuadResult { value: T::zero(), error: 0.0, evaluations: 0 }
    };
    let q = 1.0 / (decay - 1.0);
    let tail = integrate_interval(
        |tau: f64| {
            if tau <= 0.0 {
                return T::zero();
            }
            let y = r * tau.powf(-q);
            if !y.is_finite() {
                return T::zero();
            }
            f(sign * y) * (q * r * tau.powf(-q - 1.0))
        },
        0.0,
        1.0,
        spec,
    )?;
    Ok(QuadResult {
        value: body.value + tail.value, error: body.error + tail.error, evaluations: body.evaluations + tail.evaluations })
}

/// `∫_{C+} f dμ` by an adaptive tensor rule on `[-R, R] × (0, R]`, with `R`
/// the truncation radius of `spec`.
pub fn integrate_halfplane(mut f: impl FnMut(C64) -> f64, spec: &QuadratureSpec) -> Result<QuadResult<f64>> {
    let r = spec.truncation_radius;
    integrate_rectangle(&mut f, -r, r, 0.0, r, spec)
}

fn integrate_rectangle(f: &mut impl FnMut(C64) -> f64, x0: f64, x1: f64, y0: f64, y1: f64, spec: &QuadratureSpec) -> Result<QuadResult<f64>> {
    let mut inner_err: Option<Error> = None;
    let mut evals = 0usize;
    let xs = x_breaks(x0, x1);
    let outer = integrate_interval(
        |y| {
            let mut acc = 0.0;
            for w in xs.windows(2) {
                match adaptive_gk(|x| f(C64::new(x, y)), w[0], w[1], spec.tol * 0.1, spec.max_subdivisions) {
                    Ok(r) => {
                        acc += r.value;
                        evals += r.evaluations;
                    }
                    Err(e) => {
                        inner_err.get_or_insert(e);
                    }
                }
            }
            acc
        },
        y0,
        y1,
        spec,
    )?;
    if let Some(e) = inner_err {
        return Err(e);
    }
    Ok(QuadResult { value: outer.value, error: outer.error, evaluations: evals })
}

/// Breakpoints of `[x0, x1]` at `±2`, where the weight has a square-root kink.
fn x_breaks(x0: f64, x1: f64) -> Vec<f64> {
    let mut v = vec![x0];
    for b in [-2.0, 2.0] {
        if b > x0 && b < x1 {
            v.push(b);
        }
    }
    v.push(x1);
    v
}

/// Planar regions for counting integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Region {
    Disk { center: [f64; 2], radius: f64 },
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
    Annulus { center: [f64; 2], inner: f64, outer: f64 },
    WholePlane,
}

impl Region {
    pub fn contains(&self, z: C64) -> bool {
        match *self {
            Region::Disk { center, radius } => (z - C64::new(center[0], center[1])).norm() <= radius,
            Region::Rectangle { x0, x1, y0, y1 } => z.re >= x0 && z.re <= x1 && z.im >= y0 && z.im <= y1,
            Region::Annulus { center, inner, outer } => {
                let r = (z - C64::new(center[0], center[1])).norm();
                r >= inner && r <= outer
            }
            Region::WholePlane => true,
        }
    }

    /// Mirror image under complex conjugation.
    pub fn reflect(&self) -> Region {
        match *self {
            Region::Disk { center, radius } => Region::Disk { center: [center[0], -center[1]], radius },
            Region::Rectangle { x0, x1, y0, y1 } => Region::Rectangle { x0, x1, y0: -y1, y1: -y0 },
            Region::Annulus { center, inner, outer } => Region::Annulus { center: [center[0], -center[1]], inner, outer },
            Region::WholePlane => Region::WholePlane,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Region::Disk { radius, .. } => radius >= 0.0,
            Region::Rectangle { x0, x1, y0, y1 } => x0 <= x1 && y0 <= y1,
            Region::Annulus { inner, outer, .. } => inner >= 0.0 && inner <= outer,
            Region::WholePlane => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("malformed region {self:?}")))
        }
    }

    fn y_range(&self) -> (f64, f64) {
        match *self {
            Region::Disk { center, radius } => (center[1] - radius, center[1] + radius),
            Region::Rectangle { y0, y1, .. } => (y0, y1),
            Region::Annulus { center, outer, .. } => (center[1] - outer, center[1] + outer),
            Region::WholePlane => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Horizontal chords of the region at height `y`.
    fn chords(&self, y: f64) -> Vec<(f64, f64)> {
        let half = |cx: f64, cy: f64, r: f64| -> Option<(f64, f64)> {
            let d = r * r - (y - cy) * (y - cy);
            (d > 0.0).then(|| (cx - d.sqrt(), cx + d.sqrt()))
        };
        match *self {
            Region::Disk { center, radius } => half(center[0], center[1], radius).into_iter().collect(),
            Region::Rectangle { x0, x1, .. } => vec![(x0, x1)],
            Region::Annulus { center, inner, outer } => match (half(center[0], center[1], outer), half(center[0], center[1], inner)) {
                (Some(o), Some(i)) => vec![(o.0, i.0), (i.1, o.1)],
                (Some(o), None) => vec![o],
                _ => vec![],
            },
            Region::WholePlane => vec![],
        }
    }
}

/// `∫_B f dμ` over a bounded region by nested adaptive quadrature. The outer
/// integral is split at `y = 0` and the inner ones at `x = ±2`, the only places
/// where the weight of the ensembles fails to be smooth.
pub fn integrate_region(mut f: impl FnMut(C64) -> f64, region: &Region, spec: &QuadratureSpec) -> Result<QuadResult<f64>> {
    region.validate()?;
    if matches!(region, Region::WholePlane) {
        return Err(Error::InvalidParams("whole plane requires an exterior integrator".into()));
    }
    let (ya, yb) = region.y_range();
    if ya >= yb {
        return Ok(QuadResult { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let mut ys = vec![ya];
    if ya < 0.0 && yb > 0.0 {
        ys.push(0.0);
    }
    ys.push(yb);
    let mut inner_err: Option<Error> = None;
    let mut evals = 0usize;
    let mut total = 0.0;
    let mut error = 0.0;
    for w in ys.windows(2) {
        let piece = integrate_interval(
            |y| {
                let mut acc = 0.0;
                for (xa, xb) in region.chords(y) {
                    for seg in x_breaks(xa, xb).windows(2) {
                        match adaptive_gk(|x| f(C64::new(x, y)), seg[0], seg[1], spec.tol * 0.1, spec.max_subdivisions) {
                            Ok(r) => {
                                acc += r.value;
                                evals += r.evaluations;
                            }
                            Err(e) => {
                                inner_err.get_or_insert(e);
                            }
                        }
                    }
                }
                acc
            },
            w[0],
            w[1],
            spec,
        )?;
        total += piece.value;
        error += piece.error;
    }
    if let Some(e) = inner_err {
        return Err(e);
    }
    Ok(QuadResult { value: total, error, evaluations: evals })
}

/// `∫_{C+ \ [-2,2]} f dμ` through the exterior map: `z = u + 1/u` with
/// `u = e^{iθ}/ρ`, `θ ∈ (0, π)`, `ρ ∈ [ρ_min, 1]`. The Jacobian is
/// `|1 − u^{-2}|² / ρ³`. Integrands of the form polynomial × `|Φ|^{-2s}` become
/// smooth in `(ρ, θ)`, which a rectangle rule in `z` cannot exploit.
pub fn integrate_exterior_upper(mut f: impl FnMut(C64) -> f64, rho_min: f64, spec: &QuadratureSpec) -> Result<QuadResult<f64>> {
    spec.validate()?;
    let mut inner_err: Option<Error> = None;
    let mut evals = 0usize;
    let outer = adaptive_gk(
        |rho: f64| {
            let r = adaptive_gk(
                |theta: f64| {
                    let u = C64::from_polar(1.0 / rho, theta);
                    let z = u + u.inv();
                    let jac = (C64::new(1.0, 0.0) - (u * u).inv()).norm_sqr() / (rho * rho * rho);
                    f(z) * jac
                },
                0.0,
                PI,
                spec.tol * 0.1,
                spec.max_subdivisions,
            );
            match r {
                Ok(r) => {
                    evals += r.evaluations;
                    r.value
                }
                Err(e) => {
                    inner_err.get_or_insert(e);
                    0.0
                }
            }
        },
        rho_min.max(0.0),
        1.0,
        spec.tol,
        spec.max_subdivisions,
    )?;
    if let Some(e) = inner_err {
        return Err(e);
    }
    Ok(QuadResult { value: outer.value, error: outer.error, evaluations: evals })
}

/// Truncation radius `R ≥ 4` for `∫_{|z|>R} |z|^deg |Φ(z)|^{-2s} dμ < tol/10`,
/// using `|Φ(z)| ≥ |z|/2`: the tail is at most `2π 4^s R^{deg+2-2s}/(2s-deg-2)`.
pub fn exterior_truncation_radius(s: f64, deg: f64, tol: f64) -> Result<f64> {
    let p = 2.0 * s - deg - 2.0;
    if !(p > 0.0) {
        return Err(Error::InvalidParams(format!("|z|^{deg}|Φ|^(-2s) is not integrable for s = {s}")));
    }
    // 2π 4^s R^{-p} / p < tol/10.
    let log_r = ((2.0 * PI / p).ln() + s * 4f64.ln() - (tol / 10.0).ln()) / p;
    Ok(log_r.exp().max(4.0))
}

/// `1/|Φ(R)|`, the inner radius in the exterior-map coordinates matching `R`.
pub fn rho_for_radius(r: f64) -> f64 {
    1.0 / joukowski_phi(C64::new(r, 0.0)).norm()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Cached 64-point Gauss–Legendre rule on `[0, 1]`.
pub fn gl64_unit() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let (x, w) = gauss_legendre(64);
        (x.iter().map(|t| 0.5 * (t + 1.0)).collect(), w.iter().map(|v| 0.5 * v).collect())
    })
}

/// Fixed 64-point Gauss–Legendre on `[0, 1]`.
pub fn gl64<T: QuadValue>(mut f: impl FnMut(f64) -> T) -> T {
    let (x, w) = gl64_unit();
    let mut acc = T::zero();
    for (xi, wi) in x.iter().zip(w) {
        acc += f(*xi) * *wi;
    }
    acc
}

// ---------------------------------------------------------------------------
// Roots

/// Horner evaluation of `Σ c_k z^k` and its derivative.
pub fn horner(coeffs: &[C64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All roots of `Σ c_k z^k` (ascending coefficients) with multiplicity:
/// companion-matrix eigenvalues followed by Newton polishing. Real coefficient
/// vectors yield an exactly conjugation-closed multiset.
pub fn poly_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    poly_roots_with_tol(coeffs, 1e-8)
}

/// As [`poly_roots`] with an explicit relative pairing tolerance.
pub fn poly_roots_with_tol(coeffs: &[C64], pair_tol: f64) -> Result<Vec<C64>> {
    let n = coeffs.len().saturating_sub(1);
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let lead = *coeffs.last().ok_or(Error::DegeneratePolynomial)?;
    if n == 0 || lead.norm() == 0.0 || lead.norm() <= 1e-15 * scale {
        return Err(Error::DegeneratePolynomial);
    }
    let mut roots: Vec<C64> = if n == 1 {
        vec![-coeffs[0] / lead]
    } else {
        let mut m = DMatrix::<C64>::zeros(n, n);
        for i in 1..n {
            m[(i, i - 1)] = C64::new(1.0, 0.0);
        }
        for i in 0..n {
            m[(i, n - 1)] = -coeffs[i] / lead;
        }
        let eig = m.schur().eigenvalues().ok_or(Error::DegeneratePolynomial)?;
        eig.iter().copied().collect()
    };
    let abs_coeffs: Vec<C64> = coeffs.iter().map(|c| C64::new(c.norm(), 0.0)).collect();
    for r in roots.iter_mut() {
        for _ in 0..8 {
            let (p, dp) = horner(coeffs, *r);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            let cand = *r - step;
            let (pc, _) = horner(coeffs, cand);
            if pc.norm() < p.norm() {
                *r = cand;
            } else {
                break;
            }
            let (ps, _) = horner(&abs_coeffs, C64::new(r.norm(), 0.0));
            if step.norm() <= 1e-16 * r.norm().max(1.0) || p.norm() <= 1e-16 * ps.norm() {
                break;
            }
        }
    }
    if coeffs.iter().all(|c| c.im == 0.0) {
        pair_conjugates(&mut roots, pair_tol);
    }
    Ok(roots)
}

/// Forces a root multiset to be closed under conjugation: near-real roots
/// become real, the rest are matched into symmetrized conjugate pairs.
pub fn pair_conjugates(roots: &mut Vec<C64>, tol: f64) {
    let scale = roots.iter().fold(0.0f64, |m, r| m.max(r.norm())).max(f64::MIN_POSITIVE);
    let thr = tol * scale;
    let mut reals = Vec::new();
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for &r in roots.iter() {
        if r.im.abs() <= thr {
            reals.push(C64::new(r.re, 0.0));
        } else if r.im > 0.0 {
            upper.push(r);
        } else {
            lower.push(r);
        }
    }
    let by_im = |a: &C64, b: &C64| a.im.abs().total_cmp(&b.im.abs());
    while upper.len() > lower.len() {
        upper.sort_by(by_im);
        let r = upper.remove(0);
        reals.push(C64::new(r.re, 0.0));
    }
    while lower.len() > upper.len() {
        lower.sort_by(by_im);
        let r = lower.remove(0);
        reals.push(C64::new(r.re, 0.0));
    }
    let mut out = reals;
    out.sort_by(|a, b| a.re.total_cmp(&b.re));
    upper.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut pool = lower;
    for u in upper {
        let (k, _) = pool
            .iter()
            .enumerate()
            .map(|(k, l)| (k, (u - l.conj()).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("pools have equal size");
        let l = pool.swap_remove(k);
        let m = (u + l.conj()) * 0.5;
        out.push(m);
        out.push(m.conj());
    }
    *roots = out;
}
