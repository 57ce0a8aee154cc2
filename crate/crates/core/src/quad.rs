//! Adaptive Gauss–Kronrod quadrature (21-point rule) for real and complex
//! integrands, with maps for infinite ranges and a square substitution for
//! endpoints carrying a power-law singularity.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

// Kronrod abscissae; odd indices are the 10-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_136_092_103,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Values that can be integrated: reals and complex numbers.
pub trait QuadValue:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn norm(&self) -> f64;
    fn is_finite_value(&self) -> bool;
}

impl QuadValue for f64 {
    fn norm(&self) -> f64 {
        self.abs()
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_segments: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_segments: 4000,
        }
    }
}

impl QuadConfig {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        QuadConfig {
            abs_tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub converged: bool,
    pub evaluations: usize,
}

impl<T: QuadValue> Estimate<T> {
    fn zero() -> Self {
        Estimate {
            value: T::default(),
            error: 0.0,
            converged: true,
            evaluations: 0,
        }
    }

    fn merge(self, other: Estimate<T>) -> Self {
        Estimate {
            value: self.value + other.value,
            error: self.error + other.error,
            converged: self.converged && other.converged,
            evaluations: self.evaluations + other.evaluations,
        }
    }
}

/// How the integrand behaves at an endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Regular,
    /// Integrable power-law or square-root behaviour; handled by x = a + (b-a) s².
    PowerLaw,
}

struct Segment<T> {
    lo: f64,
    hi: f64,
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
        self.error.total_cmp(&other.error)
    }
}

fn kronrod21<T: QuadValue, F: Fn(f64) -> T>(f: &F, lo: f64, hi: f64) -> (T, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = T::default();
    let mut abs_sum = fc.norm() * WGK[10];
    let mut samples = [T::default(); 21];
    samples[20] = fc;
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        samples[2 * j] = f1;
        samples[2 * j + 1] = f2;
        kronrod = kronrod + (f1 + f2) * WGK[j];
        abs_sum += WGK[j] * (f1.norm() + f2.norm());
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut asc = WGK[10] * (fc - mean).norm();
    for j in 0..10 {
        asc += WGK[j] * ((samples[2 * j] - mean).norm() + (samples[2 * j + 1] - mean).norm());
    }
    let abs_half = half.abs();
    let result = kronrod * half;
    let res_abs = abs_sum * abs_half;
    let res_asc = asc * abs_half;
    let mut err = ((kronrod - gauss) * half).norm();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (result, err)
}

fn adaptive_finite<T: QuadValue, F: Fn(f64) -> T>(
    f: &F,
    lo: f64,
    hi: f64,
    cfg: &QuadConfig,
) -> Estimate<T> {
    if lo == hi {
        return Estimate::zero();
    }
    let (value, error) = kronrod21(f, lo, hi);
    let mut evaluations = 21;
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        lo,
        hi,
        value,
        error,
    });
    let mut total = value;
    let mut total_err = error;
    let mut converged = false;
    while heap.len() < cfg.max_segments {
        if total_err <= cfg.abs_tol.max(cfg.rel_tol * total.norm()) && total.is_finite_value() {
            converged = true;
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo.min(worst.hi) || mid >= worst.lo.max(worst.hi) {
            // Segment cannot be split further in floating point.
            heap.push(worst);
            break;
        }
        let (v1, e1) = kronrod21(f, worst.lo, mid);
        let (v2, e2) = kronrod21(f, mid, worst.hi);
        evaluations += 42;
        total = total - worst.value + v1 + v2;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment {
            lo: worst.lo,
            hi: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            lo: mid,
            hi: worst.hi,
            value: v2,
            error: e2,
        });
    }
    // Re-sum to limit drift from incremental updates.
    let mut value = T::default();
    let mut error = 0.0;
    for seg in heap.iter() {
        value = value + seg.value;
        error += seg.error;
    }
    if !converged {
        converged = error <= cfg.abs_tol.max(cfg.rel_tol * value.norm()) && value.is_finite_value();
    }
    Estimate {
        value,
        error,
        converged,
        evaluations,
    }
}

/// Integrate `f` over `[lo, hi]`; either end may be infinite.
pub fn integrate<T, F>(f: F, lo: f64, hi: f64, cfg: &QuadConfig) -> Estimate<T>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    integrate_with_endpoints(f, lo, hi, Endpoint::Regular, Endpoint::Regular, cfg)
}

/// Integrate with declared endpoint behaviour. Infinite ends are always mapped
/// with x = a + (1 - t) / t.
pub fn integrate_with_endpoints<T, F>(
    f: F,
    lo: f64,
    hi: f64,
    lo_kind: Endpoint,
    hi_kind: Endpoint,
    cfg: &QuadConfig,
) -> Estimate<T>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    endpoints_dyn(&f, lo, hi, lo_kind, hi_kind, cfg)
}

fn endpoints_dyn<T: QuadValue>(
    f: &dyn Fn(f64) -> T,
    lo: f64,
    hi: f64,
    lo_kind: Endpoint,
    hi_kind: Endpoint,
    cfg: &QuadConfig,
) -> Estimate<T>
{
    if hi < lo {
        let est = endpoints_dyn(f, hi, lo, hi_kind, lo_kind, cfg);
        return Estimate {
            value: est.value * -1.0,
            ..est
        };
    }
    if lo == hi {
        return Estimate::zero();
    }
    match (lo.is_finite(), hi.is_finite()) {
        (false, false) => {
            let left = endpoints_dyn(f, lo, 0.0, lo_kind, Endpoint::Regular, cfg);
            let right = endpoints_dyn(f, 0.0, hi, Endpoint::Regular, hi_kind, cfg);
            left.merge(right)
        }
        (true, false) => {
            if lo_kind == Endpoint::PowerLaw {
                let mid = lo + 1.0;
                let near = endpoints_dyn(f, lo, mid, lo_kind, Endpoint::Regular, cfg);
                let far = endpoints_dyn(f, mid, hi, Endpoint::Regular, hi_kind, cfg);
                return near.merge(far);
            }
            let g = |t: f64| {
                let x = lo + (1.0 - t) / t;
                f(x) * (1.0 / (t * t))
            };
            adaptive_finite(&g, 0.0, 1.0, cfg)
        }
        (false, true) => {
            if hi_kind == Endpoint::PowerLaw {
                let mid = hi - 1.0;
                let far = endpoints_dyn(f, lo, mid, lo_kind, Endpoint::Regular, cfg);
                let near = endpoints_dyn(f, mid, hi, Endpoint::Regular, hi_kind, cfg);
                return far.merge(near);
            }
            let g = |t: f64| {
                let x = hi - (1.0 - t) / t;
                f(x) * (1.0 / (t * t))
            };
            adaptive_finite(&g, 0.0, 1.0, cfg)
        }
        (true, true) => match (lo_kind, hi_kind) {
            (Endpoint::Regular, Endpoint::Regular) => adaptive_finite(&f, lo, hi, cfg),
            (Endpoint::PowerLaw, Endpoint::Regular) => {
                let w = hi - lo;
                let g = |s: f64| f(lo + w * s * s) * (2.0 * w * s);
                adaptive_finite(&g, 0.0, 1.0, cfg)
            }
            (Endpoint::Regular, Endpoint::PowerLaw) => {
                let w = hi - lo;
                let g = |s: f64| f(hi - w * s * s) * (2.0 * w * s);
                adaptive_finite(&g, 0.0, 1.0, cfg)
            }
            (Endpoint::PowerLaw, Endpoint::PowerLaw) => {
                let mid = 0.5 * (lo + hi);
                let a = endpoints_dyn(f, lo, mid, Endpoint::PowerLaw, Endpoint::Regular, cfg);
                let b = endpoints_dyn(f, mid, hi, Endpoint::Regular, Endpoint::PowerLaw, cfg);
                a.merge(b)
            }
        },
    }
}

/// Integrate over `[lo, hi]` split at the given interior breakpoints.
pub fn integrate_pieces<T, F>(f: F, lo: f64, hi: f64, breakpoints: &[f64], cfg: &QuadConfig) -> Estimate<T>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|b| *b > lo && *b < hi)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(lo);
    edges.extend(cuts);
    edges.push(hi);
    edges
        .windows(2)
        .map(|w| integrate(&f, w[0], w[1], cfg))
        .fold(Estimate::zero(), Estimate::merge)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let est = integrate(|x: f64| x.powi(5) - 3.0 * x * x, -1.0, 2.0, &QuadConfig::default());
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((est.value - exact).abs() < 1e-13);
        assert!(est.converged);
    }

    #[test]
    fn cauchy_tail_on_half_line() {
        let est = integrate(|x: f64| 1.0 / (PI * x * x), 1.0, f64::INFINITY, &QuadConfig::default());
        assert!((est.value - 1.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn lorentzian_on_line() {
        let est = integrate(|x: f64| 1.0 / (1.0 + x * x), f64::NEG_INFINITY, f64::INFINITY, &QuadConfig::default());
        assert!((est.value - PI).abs() < 1e-10);
    }

    #[test]
    fn inverse_sqrt_endpoint() {
        let est = integrate_with_endpoints(
            |x: f64| 1.0 / x.sqrt(),
            0.0,
            4.0,
            Endpoint::PowerLaw,
            Endpoint::Regular,
            &QuadConfig::default(),
        );
        assert!((est.value - 4.0).abs() < 1e-12);
    }

    #[test]
    fn semicircle_mass_and_second_moment() {
        let cfg = QuadConfig::with_abs_tol(1e-12);
        let rho = |x: f64| (4.0 - x * x).max(0.0).sqrt() / (2.0 * PI);
        let m0 = integrate_with_endpoints(rho, -2.0, 2.0, Endpoint::PowerLaw, Endpoint::PowerLaw, &cfg);
        let m2 = integrate_with_endpoints(|x| x * x * rho(x), -2.0, 2.0, Endpoint::PowerLaw, Endpoint::PowerLaw, &cfg);
        assert!((m0.value - 1.0).abs() < 1e-12);
        assert!((m2.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complex_integrand() {
        let z = Complex64::new(0.3, 1.0);
        // ∫ 1/(z - x) · 1/(π(1+x²)) dx = 1/(z + i)
        let est = integrate(
            |x: f64| (z - x).inv() * (1.0 / (PI * (1.0 + x * x))),
            f64::NEG_INFINITY,
            f64::INFINITY,
            &QuadConfig::with_abs_tol(1e-13),
        );
        let exact = (z + Complex64::i()).inv();
        assert!((est.value - exact).norm() < 1e-10);
    }

    #[test]
    fn reversed_bounds_negate() {
        let cfg = QuadConfig::default();
        let a = integrate(|x: f64| x.exp(), 0.0, 1.0, &cfg).value;
        let b = integrate(|x: f64| x.exp(), 1.0, 0.0, &cfg).value;
        assert!((a + b).abs() < 1e-14);
    }

    #[test]
    fn pieces_handle_kinks() {
        let est = integrate_pieces(|x: f64| x.abs(), -1.0, 2.0, &[0.0], &QuadConfig::default());
        assert!((est.value - 2.5).abs() < 1e-14);
    }
}
