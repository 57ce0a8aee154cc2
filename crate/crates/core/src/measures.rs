//! Signed measures built from atoms and closed-form density kernels, the
//! quasi-Lévy measures derived from them, and the two parametrisations of a
//! freely (quasi-)infinitely divisible law: the characteristic pair `(b, τ)`
//! and the characteristic triplet `(a, ν, γ)`.
//!
//! The pair and triplet are linked by
//!
//! ```text
//! a = τ({0}),   ν(dx) = (1 + x²)/x² · 1_{x≠0} τ(dx),
//! γ = b + ∫ x (1_{[-1,1]}(x) − 1/(1 + x²)) ν(dx).
//! ```
//!
//! Every measure is kept in canonical form (atoms sorted by position, equal
//! positions merged, zero weights dropped) so that equality of pairs is a
//! structural comparison.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, Endpoint, Estimate, QuadConfig, QuadValue};

/// A closed interval of the real line; `None` ends are unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Interval {
    #[serde(default)]
    pub lo: Option<f64>,
    #[serde(default)]
    pub hi: Option<f64>,
}

impl Interval {
    pub const fn line() -> Self {
        Interval { lo: None, hi: None }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval {
            lo: Some(lo),
            hi: Some(hi),
        }
    }

    pub fn from(lo: f64) -> Self {
        Interval {
            lo: Some(lo),
            hi: None,
        }
    }

    pub fn to(hi: f64) -> Self {
        Interval {
            lo: None,
            hi: Some(hi),
        }
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo.unwrap_or(f64::NEG_INFINITY)
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.unwrap_or(f64::INFINITY)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo_f64() && x <= self.hi_f64()
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_some() && self.hi.is_some()
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo_f64().max(other.lo_f64());
        let hi = self.hi_f64().min(other.hi_f64());
        if lo > hi {
            return None;
        }
        Some(Interval {
            lo: lo.is_finite().then_some(lo),
            hi: hi.is_finite().then_some(hi),
        })
    }

    fn hull(&self, other: &Interval) -> Interval {
        let lo = self.lo_f64().min(other.lo_f64());
        let hi = self.hi_f64().max(other.hi_f64());
        Interval {
            lo: lo.is_finite().then_some(lo),
            hi: hi.is_finite().then_some(hi),
        }
    }
}

/// Density reweightings that move between pair and triplet form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weight {
    /// Multiply by (1 + x²)/x².
    LevyFromPair,
    /// Multiply by x²/(1 + x²).
    PairFromLevy,
}

impl Weight {
    fn factor(self, x: f64) -> f64 {
        let x2 = x * x;
        match self {
            Weight::LevyFromPair => (1.0 + x2) / x2,
            Weight::PairFromLevy => x2 / (1.0 + x2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartSign {
    Positive,
    Negative,
}

/// Closed-form density shapes. Coefficients live on [`DensityTerm`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityKernel {
    /// x ↦ 1/x², singular at 0.
    CauchyLevyTail,
    /// x ↦ s/(s² + x²).
    PoissonKernel { scale: f64 },
    /// Semicircle density with the given mean and variance.
    SemicircleArc { mean: f64, variance: f64 },
    /// Absolutely continuous part of the free Meixner law FM_{a,b}.
    FreeMeixnerArc { a: f64, b: f64 },
    /// The free quasi-Lévy density of the free deconvolution of FM_{0,b}
    /// from the Cauchy law C_{2√2}.
    FmQuasiLevy { b: f64 },
    /// x ↦ |x|^exponent.
    PowerLaw { exponent: f64 },
    /// Piecewise-linear interpolation of samples, zero outside the nodes.
    NumericGrid { xs: Vec<f64>, fs: Vec<f64> },
    Reweighted {
        weight: Weight,
        inner: Box<DensityKernel>,
    },
    /// x ↦ max(±Σ terms(x), 0); produced by the Hahn–Jordan split.
    SignPart {
        sign: PartSign,
        terms: Vec<DensityTerm>,
    },
}

impl DensityKernel {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            DensityKernel::CauchyLevyTail => {
                if x == 0.0 {
                    f64::INFINITY
                } else {
                    1.0 / (x * x)
                }
            }
            DensityKernel::PoissonKernel { scale } => scale / (scale * scale + x * x),
            DensityKernel::SemicircleArc { mean, variance } => {
                let d = x - mean;
                let r = 4.0 * variance - d * d;
                if r <= 0.0 {
                    0.0
                } else {
                    r.sqrt() / (2.0 * PI * variance)
                }
            }
            DensityKernel::FreeMeixnerArc { a, b } => {
                let d = x - a;
                let r = 4.0 * (1.0 + b) - d * d;
                if r <= 0.0 {
                    0.0
                } else {
                    r.sqrt() / (2.0 * PI * (b * x * x + a * x + 1.0))
                }
            }
            DensityKernel::FmQuasiLevy { b } => fm_quasi_levy_value(*b, x),
            DensityKernel::PowerLaw { exponent } => x.abs().powf(*exponent),
            DensityKernel::NumericGrid { xs, fs } => interpolate(xs, fs, x),
            DensityKernel::Reweighted { weight, inner } => {
                if x == 0.0 {
                    return match weight {
                        Weight::PairFromLevy => 0.0,
                        Weight::LevyFromPair => f64::INFINITY,
                    };
                }
                weight.factor(x) * inner.eval(x)
            }
            DensityKernel::SignPart { sign, terms } => {
                let s: f64 = terms.iter().map(|t| t.eval(x)).sum();
                let v = match sign {
                    PartSign::Positive => s,
                    PartSign::Negative => -s,
                };
                v.max(0.0)
            }
        }
    }

    /// Closed hull of the set where the kernel can be nonzero.
    pub fn natural_support(&self) -> Interval {
        match self {
            DensityKernel::SemicircleArc { mean, variance } => {
                let r = 2.0 * variance.sqrt();
                Interval::closed(mean - r, mean + r)
            }
            DensityKernel::FreeMeixnerArc { a, b } => {
                let r = 2.0 * (1.0 + b).sqrt();
                Interval::closed(a - r, a + r)
            }
            DensityKernel::NumericGrid { xs, .. } => match (xs.first(), xs.last()) {
                (Some(lo), Some(hi)) => Interval::closed(*lo, *hi),
                _ => Interval::closed(0.0, 0.0),
            },
            DensityKernel::Reweighted { inner, .. } => inner.natural_support(),
            DensityKernel::SignPart { terms, .. } => terms
                .iter()
                .filter_map(|t| t.effective_support())
                .reduce(|a, b| a.hull(&b))
                .unwrap_or(Interval::closed(0.0, 0.0)),
            _ => Interval::line(),
        }
    }

    /// Points where the kernel is not smooth; quadrature splits there.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            DensityKernel::SemicircleArc { .. } | DensityKernel::FreeMeixnerArc { .. } => {
                let s = self.natural_support();
                vec![s.lo_f64(), s.hi_f64()]
            }
            DensityKernel::FmQuasiLevy { b } => {
                let r = 2.0 * b.sqrt();
                vec![-r, 0.0, r]
            }
            DensityKernel::CauchyLevyTail | DensityKernel::PowerLaw { .. } => vec![0.0],
            DensityKernel::NumericGrid { xs, .. } => xs.clone(),
            DensityKernel::Reweighted { inner, .. } => {
                let mut b = inner.breakpoints();
                b.push(0.0);
                b
            }
            DensityKernel::SignPart { terms, .. } => {
                terms.iter().flat_map(|t| t.breakpoints()).collect()
            }
            DensityKernel::PoissonKernel { .. } => Vec::new(),
        }
    }

    /// Exponent `p` such that the kernel behaves like |x|^p near 0.
    /// `+∞` when the kernel vanishes identically near 0.
    pub fn order_at_zero(&self) -> f64 {
        match self {
            DensityKernel::CauchyLevyTail => -2.0,
            DensityKernel::PowerLaw { exponent } => *exponent,
            DensityKernel::FmQuasiLevy { b } => {
                let lead = 2.0 * 2f64.sqrt() - 1.0 / b.sqrt();
                if lead.abs() > 1e-12 {
                    -2.0
                } else {
                    0.0
                }
            }
            DensityKernel::Reweighted { weight, inner } => {
                let o = inner.order_at_zero();
                match weight {
                    Weight::LevyFromPair => o - 2.0,
                    Weight::PairFromLevy => o + 2.0,
                }
            }
            DensityKernel::SignPart { terms, .. } => terms
                .iter()
                .map(|t| {
                    if t.effective_support().is_some_and(|s| s.contains(0.0)) {
                        t.kernel.order_at_zero()
                    } else {
                        f64::INFINITY
                    }
                })
                .fold(f64::INFINITY, f64::min),
            _ => {
                if self.natural_support().contains(0.0) && self.eval(0.0) != 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Exponent `p` such that the kernel behaves like |x|^p as |x| → ∞;
    /// `-∞` for compactly supported kernels.
    pub fn tail_order(&self) -> f64 {
        if self.natural_support().is_bounded() {
            return f64::NEG_INFINITY;
        }
        match self {
            DensityKernel::CauchyLevyTail
            | DensityKernel::PoissonKernel { .. }
            | DensityKernel::FmQuasiLevy { .. } => -2.0,
            DensityKernel::PowerLaw { exponent } => *exponent,
            DensityKernel::Reweighted { inner, .. } => inner.tail_order(),
            DensityKernel::SignPart { terms, .. } => terms
                .iter()
                .map(|t| {
                    if t.effective_support().is_some_and(|s| s.is_bounded()) {
                        f64::NEG_INFINITY
                    } else {
                        t.kernel.tail_order()
                    }
                })
                .fold(f64::NEG_INFINITY, f64::max),
            _ => f64::NEG_INFINITY,
        }
    }

    /// Whether the kernel never takes negative values.
    pub fn is_nonnegative(&self) -> bool {
        match self {
            DensityKernel::FmQuasiLevy { b } => *b >= 0.125,
            DensityKernel::NumericGrid { fs, .. } => fs.iter().all(|f| *f >= 0.0),
            DensityKernel::FreeMeixnerArc { a, b } => {
                // Denominator positive on the support.
                let s = self.natural_support();
                let n = 64;
                (0..=n).all(|i| {
                    let x = s.lo_f64() + (s.hi_f64() - s.lo_f64()) * i as f64 / n as f64;
                    b * x * x + a * x + 1.0 > 0.0
                })
            }
            DensityKernel::Reweighted { inner, .. } => inner.is_nonnegative(),
            _ => true,
        }
    }

    /// Push a reweighting through, cancelling inverse pairs and mapping
    /// the Poisson kernel to the Cauchy Lévy tail and back.
    pub fn reweighted(self, weight: Weight) -> DensityKernel {
        match (weight, self) {
            (Weight::LevyFromPair, DensityKernel::PoissonKernel { scale: 1.0 }) => {
                DensityKernel::CauchyLevyTail
            }
            (Weight::PairFromLevy, DensityKernel::CauchyLevyTail) => {
                DensityKernel::PoissonKernel { scale: 1.0 }
            }
            (
                w,
                DensityKernel::Reweighted {
                    weight: inner_w,
                    inner,
                },
            ) if inner_w != w => *inner,
            (w, k) => DensityKernel::Reweighted {
                weight: w,
                inner: Box::new(k),
            },
        }
    }
}

fn interpolate(xs: &[f64], fs: &[f64], x: f64) -> f64 {
    if xs.is_empty() || x < xs[0] || x > xs[xs.len() - 1] {
        return 0.0;
    }
    let i = xs.partition_point(|v| *v <= x);
    if i == 0 {
        return fs[0];
    }
    if i >= xs.len() {
        return fs[xs.len() - 1];
    }
    let (x0, x1) = (xs[i - 1], xs[i]);
    let t = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
    fs[i - 1] + t * (fs[i] - fs[i - 1])
}

pub(crate) fn fm_quasi_levy_value(b: f64, x: f64) -> f64 {
    if x == 0.0 {
        return f64::NAN;
    }
    let x2 = x * x;
    let edge = 2.0 * b.sqrt();
    if b > 0.0 && x.abs() <= edge {
        let inner = (4.0 * b - x2).max(0.0).sqrt() / (2.0 * b);
        (2.0 * 2f64.sqrt() - inner) / (PI * x2)
    } else {
        2.0 * 2f64.sqrt() / (PI * x2)
    }
}

/// One density summand `coefficient · kernel(x)` restricted to `support`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityTerm {
    pub coefficient: f64,
    pub kernel: DensityKernel,
    #[serde(default)]
    pub support: Interval,
}

impl DensityTerm {
    pub fn new(coefficient: f64, kernel: DensityKernel) -> Self {
        DensityTerm {
            coefficient,
            kernel,
            support: Interval::line(),
        }
    }

    pub fn on(mut self, support: Interval) -> Self {
        self.support = support;
        self
    }

    pub fn effective_support(&self) -> Option<Interval> {
        self.support.intersect(&self.kernel.natural_support())
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.effective_support() {
            Some(s) if s.contains(x) => self.coefficient * self.kernel.eval(x),
            _ => 0.0,
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.kernel.breakpoints();
        if let Some(s) = self.effective_support() {
            b.extend(s.lo);
            b.extend(s.hi);
        }
        b
    }

    fn order_at_zero(&self) -> f64 {
        match self.effective_support() {
            Some(s) if s.contains(0.0) => self.kernel.order_at_zero(),
            _ => f64::INFINITY,
        }
    }

    fn tail_order(&self) -> f64 {
        match self.effective_support() {
            Some(s) if !s.is_bounded() => self.kernel.tail_order(),
            _ => f64::NEG_INFINITY,
        }
    }
}

/// Record of a truncated infinite atomic series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub terms: usize,
    /// Bound on the total variation of the discarded tail.
    pub tail_bound: f64,
}

/// Atoms plus closed-form density terms with real (possibly negative) weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SignedMeasure {
    /// `[position, weight]` pairs.
    #[serde(default)]
    pub atoms: Vec<(f64, f64)>,
    #[serde(default)]
    pub densities: Vec<DensityTerm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<Truncation>,
}

/// Growth of an integrand `g` near 0 and at infinity: g ~ |x|^at_zero and
/// g ~ |x|^at_infinity.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Growth {
    pub at_zero: f64,
    pub at_infinity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Obstruction {
    AtZero,
    AtInfinity,
}

impl SignedMeasure {
    pub fn zero() -> Self {
        SignedMeasure::default()
    }

    /// Build and canonicalise.
    pub fn new(atoms: Vec<(f64, f64)>, densities: Vec<DensityTerm>) -> Self {
        let mut m = SignedMeasure {
            atoms,
            densities,
            truncation: None,
        };
        m.canonicalize();
        m
    }

    pub fn dirac(position: f64, weight: f64) -> Self {
        SignedMeasure::new(vec![(position, weight)], Vec::new())
    }

    pub fn from_atoms(atoms: Vec<(f64, f64)>) -> Self {
        SignedMeasure::new(atoms, Vec::new())
    }

    pub fn from_density(coefficient: f64, kernel: DensityKernel) -> Self {
        SignedMeasure::new(Vec::new(), vec![DensityTerm::new(coefficient, kernel)])
    }

    pub fn with_truncation(mut self, truncation: Truncation) -> Self {
        self.truncation = Some(truncation);
        self
    }

    /// Sort atoms, merge equal positions, drop zero weights and zero terms.
    pub fn canonicalize(&mut self) {
        self.atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(self.atoms.len());
        for &(x, w) in &self.atoms {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += w,
                _ => merged.push((x, w)),
            }
        }
        merged.retain(|(_, w)| *w != 0.0);
        self.atoms = merged;
        self.densities.retain(|t| t.coefficient != 0.0);
    }

    pub fn is_atomic(&self) -> bool {
        self.densities.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.densities.is_empty()
    }

    pub fn atom_at(&self, x: f64) -> f64 {
        self.atoms
            .iter()
            .find(|(p, _)| *p == x)
            .map(|(_, w)| *w)
            .unwrap_or(0.0)
    }

    pub fn density_at(&self, x: f64) -> f64 {
        self.densities.iter().map(|t| t.eval(x)).sum()
    }

    pub fn add(&self, other: &SignedMeasure) -> SignedMeasure {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        let mut densities = self.densities.clone();
        densities.extend(other.densities.iter().cloned());
        SignedMeasure::new(atoms, densities)
    }

    pub fn scale(&self, s: f64) -> SignedMeasure {
        SignedMeasure::new(
            self.atoms.iter().map(|&(x, w)| (x, s * w)).collect(),
            self.densities
                .iter()
                .map(|t| DensityTerm {
                    coefficient: s * t.coefficient,
                    ..t.clone()
                })
                .collect(),
        )
    }

    pub fn neg(&self) -> SignedMeasure {
        self.scale(-1.0)
    }

    /// Whether ν(−B) = ν(B) structurally: atoms mirrored and densities even.
    pub fn is_symmetric(&self) -> bool {
        let atoms_ok = self.atoms.iter().all(|&(x, w)| {
            let m = self.atom_at(-x);
            (m - w).abs() <= 1e-14 * w.abs().max(1.0)
        });
        let dens_ok = self.densities.iter().all(|t| {
            let even_kernel = match &t.kernel {
                DensityKernel::CauchyLevyTail
                | DensityKernel::PowerLaw { .. }
                | DensityKernel::PoissonKernel { .. }
                | DensityKernel::FmQuasiLevy { .. } => true,
                DensityKernel::SemicircleArc { mean, .. } => *mean == 0.0,
                _ => false,
            };
            even_kernel && t.support.lo.map(|v| -v) == t.support.hi
        });
        atoms_ok && dens_ok
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.densities.iter().flat_map(|t| t.breakpoints()).collect();
        b.retain(|v| v.is_finite());
        b.push(0.0);
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    fn order_at_zero(&self) -> f64 {
        self.densities
            .iter()
            .map(DensityTerm::order_at_zero)
            .fold(f64::INFINITY, f64::min)
    }

    fn tail_order(&self) -> f64 {
        self.densities
            .iter()
            .map(DensityTerm::tail_order)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// ∫_window g(x) ρ(x) dx where ρ is the density part (or |ρ| when
    /// `absolute`). Integrability is decided from the declared orders
    /// before any quadrature is attempted.
    pub(crate) fn integrate_density<T, G>(
        &self,
        g: G,
        window: &Interval,
        growth: Growth,
        absolute: bool,
        cfg: &QuadConfig,
    ) -> std::result::Result<Estimate<T>, Obstruction>
    where
        T: QuadValue,
        G: Fn(f64) -> T,
    {
        let zero_estimate = Estimate {
            value: T::default(),
            error: 0.0,
            converged: true,
            evaluations: 0,
        };
        if self.densities.is_empty() {
            return Ok(zero_estimate);
        }
        let lo = window.lo_f64();
        let hi = window.hi_f64();
        if lo <= 0.0 && hi >= 0.0 && self.order_at_zero() + growth.at_zero <= -1.0 {
            return Err(Obstruction::AtZero);
        }
        if (!lo.is_finite() || !hi.is_finite()) && self.tail_order() + growth.at_infinity >= -1.0 {
            return Err(Obstruction::AtInfinity);
        }
        let mut edges: Vec<f64> = vec![lo];
        edges.extend(self.breakpoints().into_iter().filter(|b| *b > lo && *b < hi));
        edges.push(hi);
        let density = |x: f64| {
            let d = self.density_at(x);
            if absolute {
                d.abs()
            } else {
                d
            }
        };
        let mut total = zero_estimate;
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a == b {
                continue;
            }
            let kind = |e: f64| {
                if e.is_finite() {
                    Endpoint::PowerLaw
                } else {
                    Endpoint::Regular
                }
            };
            let est = quad::integrate_with_endpoints(
                |x| {
                    let d = density(x);
                    if d == 0.0 {
                        T::default()
                    } else {
                        g(x) * d
                    }
                },
                a,
                b,
                kind(a),
                kind(b),
                cfg,
            );
            total = Estimate {
                value: total.value + est.value,
                error: total.error + est.error,
                converged: total.converged && est.converged,
                evaluations: total.evaluations + est.evaluations,
            };
        }
        Ok(total)
    }
}

/// Split ν into its positive and negative parts ν⁺, ν⁻ ≥ 0 with ν = ν⁺ − ν⁻.
///
/// Atoms go by the sign of their weight; the absolutely continuous part is
/// split by the sign of the pointwise density. Atoms and densities never
/// cancel one another.
pub fn hahn_jordan(nu: &SignedMeasure) -> (SignedMeasure, SignedMeasure) {
    let mut pos_atoms = Vec::new();
    let mut neg_atoms = Vec::new();
    for &(x, w) in &nu.atoms {
        if w > 0.0 {
            pos_atoms.push((x, w));
        } else if w < 0.0 {
            neg_atoms.push((x, -w));
        }
    }
    let mut pos_dens = Vec::new();
    let mut neg_dens = Vec::new();
    let definite = nu.densities.iter().all(|t| t.kernel.is_nonnegative());
    let all_pos = nu.densities.iter().all(|t| t.coefficient > 0.0);
    let all_neg = nu.densities.iter().all(|t| t.coefficient < 0.0);
    if definite && (all_pos || all_neg || nu.densities.len() <= 1) {
        for t in &nu.densities {
            if t.coefficient > 0.0 {
                pos_dens.push(t.clone());
            } else {
                neg_dens.push(DensityTerm {
                    coefficient: -t.coefficient,
                    ..t.clone()
                });
            }
        }
    } else if !nu.densities.is_empty() {
        for (sign, out) in [
            (PartSign::Positive, &mut pos_dens),
            (PartSign::Negative, &mut neg_dens),
        ] {
            out.push(DensityTerm::new(
                1.0,
                DensityKernel::SignPart {
                    sign,
                    terms: nu.densities.clone(),
                },
            ));
        }
    }
    (
        SignedMeasure::new(pos_atoms, pos_dens),
        SignedMeasure::new(neg_atoms, neg_dens),
    )
}

/// |ν|(window).
pub fn total_variation(nu: &SignedMeasure, window: &Interval, cfg: &QuadConfig) -> Result<f64> {
    let atoms: f64 = nu
        .atoms
        .iter()
        .filter(|(x, _)| window.contains(*x))
        .map(|(_, w)| w.abs())
        .sum();
    let growth = Growth {
        at_zero: 0.0,
        at_infinity: 0.0,
    };
    let est = nu
        .integrate_density(|_| 1.0, window, growth, true, cfg)
        .map_err(|o| Error::SingularWindow {
            lo: window.lo_f64(),
            hi: window.hi_f64(),
            at: match o {
                Obstruction::AtZero => 0.0,
                Obstruction::AtInfinity => f64::INFINITY,
            },
        })?;
    Ok(atoms + est.value)
}

/// ∫ xⁿ m(dx); exact for atoms.
pub fn moment(m: &SignedMeasure, n: usize, cfg: &QuadConfig) -> Result<f64> {
    let atoms: f64 = m.atoms.iter().map(|&(x, w)| w * x.powi(n as i32)).sum();
    let growth = Growth {
        at_zero: n as f64,
        at_infinity: n as f64,
    };
    let est = m
        .integrate_density(|x| x.powi(n as i32), &Interval::line(), growth, false, cfg)
        .map_err(|o| Error::DivergentMoment {
            order: n,
            reason: match o {
                Obstruction::AtZero => "density too singular at 0".into(),
                Obstruction::AtInfinity => "density tail too heavy".into(),
            },
        })?;
    Ok(atoms + est.value)
}

/// A signed measure on ℝ∖{0} that is finite away from 0 and satisfies
/// ∫ (1 ∧ x²) |ν|(dx) < ∞.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SignedMeasure", into = "SignedMeasure")]
pub struct QuasiLevyMeasure {
    underlying: SignedMeasure,
}

impl QuasiLevyMeasure {
    pub fn new(measure: SignedMeasure) -> Result<Self> {
        Self::check(&measure, &QuadConfig::default())?;
        Ok(QuasiLevyMeasure {
            underlying: measure,
        })
    }

    pub fn zero() -> Self {
        QuasiLevyMeasure {
            underlying: SignedMeasure::zero(),
        }
    }

    /// ∫ (1 ∧ x²) |ν|(dx); errors when the measure is not of quasi-Lévy type.
    pub fn check(measure: &SignedMeasure, cfg: &QuadConfig) -> Result<f64> {
        if measure.atom_at(0.0) != 0.0 {
            return Err(Error::InvalidMeasure("atom at 0".into()));
        }
        let atoms: f64 = measure
            .atoms
            .iter()
            .map(|&(x, w)| (x * x).min(1.0) * w.abs())
            .sum();
        let growth = Growth {
            at_zero: 2.0,
            at_infinity: 0.0,
        };
        let est = measure
            .integrate_density(|x| (x * x).min(1.0), &Interval::line(), growth, true, cfg)
            .map_err(|o| {
                Error::InvalidMeasure(match o {
                    Obstruction::AtZero => "∫(1∧x²)|ν|(dx) diverges at 0".into(),
                    Obstruction::AtInfinity => "|ν| is infinite away from 0".into(),
                })
            })?;
        if !est.value.is_finite() {
            return Err(Error::InvalidMeasure("∫(1∧x²)|ν|(dx) is not finite".into()));
        }
        Ok(atoms + est.value)
    }

    pub fn measure(&self) -> &SignedMeasure {
        &self.underlying
    }

    pub fn into_measure(self) -> SignedMeasure {
        self.underlying
    }

    /// Total variation of the restriction to {|x| ≥ r}.
    pub fn tail_variation(&self, r: f64, cfg: &QuadConfig) -> Result<f64> {
        assert!(r > 0.0);
        let left = total_variation(&self.underlying, &Interval::to(-r), cfg)?;
        let right = total_variation(&self.underlying, &Interval::from(r), cfg)?;
        Ok(left + right)
    }
}

impl TryFrom<SignedMeasure> for QuasiLevyMeasure {
    type Error = Error;
    fn try_from(m: SignedMeasure) -> Result<Self> {
        QuasiLevyMeasure::new(m)
    }
}

impl From<QuasiLevyMeasure> for SignedMeasure {
    fn from(q: QuasiLevyMeasure) -> SignedMeasure {
        q.underlying
    }
}

/// Free characteristic pair (b, τ) with τ a finite signed measure:
/// φ(z) = b + ∫ (1 + xz)/(z − x) τ(dx).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeCharPair {
    pub b: f64,
    pub tau: SignedMeasure,
}

impl FreeCharPair {
    pub fn new(b: f64, tau: SignedMeasure) -> Result<Self> {
        let mut tau = tau;
        tau.canonicalize();
        total_variation(&tau, &Interval::line(), &QuadConfig::default())
            .map_err(|e| Error::InvalidMeasure(format!("τ must be finite: {e}")))?;
        Ok(FreeCharPair { b, tau })
    }

    pub fn approx_eq(&self, other: &FreeCharPair, tol: f64) -> bool {
        (self.b - other.b).abs() <= tol && measures_approx_eq(&self.tau, &other.tau, tol)
    }
}

/// Free characteristic triplet (a, ν, γ); `a` may be negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeTriplet {
    pub a: f64,
    pub nu: QuasiLevyMeasure,
    pub gamma: f64,
}

impl FreeTriplet {
    pub fn new(a: f64, nu: SignedMeasure, gamma: f64) -> Result<Self> {
        let mut nu = nu;
        nu.canonicalize();
        Ok(FreeTriplet {
            a,
            nu: QuasiLevyMeasure::new(nu)?,
            gamma,
        })
    }

    pub fn approx_eq(&self, other: &FreeTriplet, tol: f64) -> bool {
        (self.a - other.a).abs() <= tol
            && (self.gamma - other.gamma).abs() <= tol
            && measures_approx_eq(self.nu.measure(), other.nu.measure(), tol)
    }

    /// Componentwise sum; the triplet of the free convolution.
    pub fn add(&self, other: &FreeTriplet) -> Result<FreeTriplet> {
        FreeTriplet::new(
            self.a + other.a,
            self.nu.measure().add(other.nu.measure()),
            self.gamma + other.gamma,
        )
    }
}

/// Compare atoms and density coefficients within `tol`; kernels must match
/// structurally.
pub fn measures_approx_eq(a: &SignedMeasure, b: &SignedMeasure, tol: f64) -> bool {
    let close_atoms = |x: &[(f64, f64)], y: &[(f64, f64)]| {
        x.iter().all(|&(p, w)| {
            let other: f64 = y
                .iter()
                .filter(|(q, _)| (p - q).abs() <= tol)
                .map(|(_, v)| v)
                .sum();
            (w - other).abs() <= tol
        })
    };
    let significant = |m: &SignedMeasure| -> Vec<(f64, f64)> {
        m.atoms.iter().copied().filter(|(_, w)| w.abs() > tol).collect()
    };
    let (sa, sb) = (significant(a), significant(b));
    if !(close_atoms(&sa, &sb) && close_atoms(&sb, &sa)) {
        return false;
    }
    if a.densities.len() != b.densities.len() {
        return false;
    }
    a.densities.iter().zip(&b.densities).all(|(s, t)| {
        s.kernel == t.kernel && s.support == t.support && (s.coefficient - t.coefficient).abs() <= tol
    })
}

/// Correction weight of the drift in terms of τ: x on [−1, 1], −1/x outside.
fn drift_correction_from_pair(x: f64) -> f64 {
    if x.abs() <= 1.0 {
        x
    } else {
        -1.0 / x
    }
}

/// x(1_{[−1,1]}(x) − 1/(1 + x²)).
fn drift_correction_from_levy(x: f64) -> f64 {
    let x2 = x * x;
    if x.abs() <= 1.0 {
        x * x2 / (1.0 + x2)
    } else {
        -x / (1.0 + x2)
    }
}

pub fn pair_to_triplet(p: &FreeCharPair) -> Result<FreeTriplet> {
    pair_to_triplet_with(p, &QuadConfig::with_abs_tol(1e-13))
}

pub fn pair_to_triplet_with(p: &FreeCharPair, cfg: &QuadConfig) -> Result<FreeTriplet> {
    let a = p.tau.atom_at(0.0);
    let mut nu_atoms = Vec::new();
    let mut gamma = p.b;
    for &(x, w) in &p.tau.atoms {
        if x == 0.0 {
            continue;
        }
        nu_atoms.push((x, w * (1.0 + x * x) / (x * x)));
        gamma += w * drift_correction_from_pair(x);
    }
    let growth = Growth {
        at_zero: 1.0,
        at_infinity: -1.0,
    };
    let corr = p
        .tau
        .integrate_density(drift_correction_from_pair, &Interval::line(), growth, false, cfg)
        .map_err(|o| Error::NonIntegrableCorrection(format!("{o:?}")))?;
    if !corr.value.is_finite() {
        return Err(Error::NonIntegrableCorrection("quadrature returned a non-finite value".into()));
    }
    gamma += corr.value;
    let nu_dens = p
        .tau
        .densities
        .iter()
        .map(|t| DensityTerm {
            coefficient: t.coefficient,
            kernel: t.kernel.clone().reweighted(Weight::LevyFromPair),
            support: t.support,
        })
        .collect();
    FreeTriplet::new(a, SignedMeasure::new(nu_atoms, nu_dens), gamma)
}

pub fn triplet_to_pair(t: &FreeTriplet) -> Result<FreeCharPair> {
    triplet_to_pair_with(t, &QuadConfig::with_abs_tol(1e-13))
}

pub fn triplet_to_pair_with(t: &FreeTriplet, cfg: &QuadConfig) -> Result<FreeCharPair> {
    let nu = t.nu.measure();
    let mut atoms = vec![(0.0, t.a)];
    let mut b = t.gamma;
    for &(x, w) in &nu.atoms {
        atoms.push((x, w * x * x / (1.0 + x * x)));
        b -= w * drift_correction_from_levy(x);
    }
    let growth = Growth {
        at_zero: 3.0,
        at_infinity: -1.0,
    };
    let corr = nu
        .integrate_density(drift_correction_from_levy, &Interval::line(), growth, false, cfg)
        .map_err(|o| Error::NonIntegrableCorrection(format!("{o:?}")))?;
    if !corr.value.is_finite() {
        return Err(Error::NonIntegrableCorrection("quadrature returned a non-finite value".into()));
    }
    b -= corr.value;
    let dens = nu
        .densities
        .iter()
        .map(|d| DensityTerm {
            coefficient: d.coefficient,
            kernel: d.kernel.clone().reweighted(Weight::PairFromLevy),
            support: d.support,
        })
        .collect();
    FreeCharPair::new(b, SignedMeasure::new(atoms, dens))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadConfig {
        QuadConfig::with_abs_tol(1e-12)
    }

    #[test]
    fn canonical_form_merges_and_drops() {
        let m = SignedMeasure::new(vec![(2.0, 1.0), (1.0, 0.5), (2.0, -1.0), (1.0, 0.25)], Vec::new());
        assert_eq!(m.atoms, vec![(1.0, 0.75)]);
    }

    #[test]
    fn hahn_jordan_disjoint_atoms() {
        let nu = SignedMeasure::from_atoms(vec![(1.0, 1.0), (2.0, -1.0)]);
        let (p, n) = hahn_jordan(&nu);
        assert_eq!(p, SignedMeasure::dirac(1.0, 1.0));
        assert_eq!(n, SignedMeasure::dirac(2.0, 1.0));
    }

    #[test]
    fn hahn_jordan_atoms_never_cancel_density() {
        let c = 3.0;
        let (p, lam) = (0.5, 1.0);
        let nu = SignedMeasure::new(
            vec![(-lam, -p), (lam, -p)],
            vec![DensityTerm::new(c / PI, DensityKernel::CauchyLevyTail)],
        );
        let (plus, minus) = hahn_jordan(&nu);
        assert_eq!(minus, SignedMeasure::from_atoms(vec![(-lam, p), (lam, p)]));
        assert_eq!(plus, SignedMeasure::from_density(c / PI, DensityKernel::CauchyLevyTail));
        // Shrinking windows around an atom: |ν|([λ−ε, λ+ε]) → p.
        for eps in [1e-1, 1e-2, 1e-3] {
            let tv = total_variation(&nu, &Interval::closed(lam - eps, lam + eps), &cfg()).unwrap();
            let dens = c / PI * (1.0 / (lam - eps) - 1.0 / (lam + eps));
            assert!((tv - p - dens).abs() < 1e-9);
        }
    }

    #[test]
    fn hahn_jordan_sign_split_of_fm_density() {
        let b = 1.0 / 16.0;
        let nu = SignedMeasure::from_density(1.0, DensityKernel::FmQuasiLevy { b });
        let (plus, minus) = hahn_jordan(&nu);
        assert!(minus.density_at(0.1) > 0.0);
        assert_eq!(plus.density_at(0.1), 0.0);
        assert!(plus.density_at(1.0) > 0.0);
        for &x in &[-2.0, -0.4, -0.1, 0.05, 0.3, 0.49, 0.6, 3.0] {
            let d = plus.density_at(x) - minus.density_at(x) - nu.density_at(x);
            assert!(d.abs() < 1e-12, "x = {x}");
        }
        // Negative part carried inside [-1/2, 1/2].
        assert_eq!(minus.density_at(0.51), 0.0);
        assert_eq!(minus.density_at(-0.51), 0.0);
    }

    #[test]
    fn total_variation_examples() {
        let nu = SignedMeasure::from_atoms(vec![(1.0, 1.0), (2.0, -1.0)]);
        assert_eq!(total_variation(&nu, &Interval::line(), &cfg()).unwrap(), 2.0);

        let tail = SignedMeasure::new(
            Vec::new(),
            vec![DensityTerm::new(1.0 / PI, DensityKernel::CauchyLevyTail).on(Interval::from(1.0))],
        );
        let tv = total_variation(&tail, &Interval::line(), &cfg()).unwrap();
        assert!((tv - 1.0 / PI).abs() < 1e-11);
    }

    #[test]
    fn singular_window_is_reported() {
        let nu = SignedMeasure::from_density(1.0, DensityKernel::CauchyLevyTail);
        let err = total_variation(&nu, &Interval::closed(-1.0, 1.0), &cfg()).unwrap_err();
        assert!(matches!(err, Error::SingularWindow { .. }));
        let ok = total_variation(&nu, &Interval::closed(0.5, 1.0), &cfg()).unwrap();
        assert!((ok - 1.0).abs() < 1e-11);
    }

    #[test]
    fn moments() {
        let c = 1.7;
        assert_eq!(moment(&SignedMeasure::dirac(c, 1.0), 3, &cfg()).unwrap(), c.powi(3));
        let s = SignedMeasure::from_density(1.0, DensityKernel::SemicircleArc { mean: 0.0, variance: 1.0 });
        assert!((moment(&s, 2, &cfg()).unwrap() - 1.0).abs() < 1e-11);
        assert!((moment(&s, 4, &cfg()).unwrap() - 2.0).abs() < 1e-11);
        let lam = 0.8;
        assert!((moment(&SignedMeasure::dirac(1.0, lam / 2.0), 2, &cfg()).unwrap() - lam / 2.0).abs() < 1e-15);
        let p = SignedMeasure::from_density(1.0, DensityKernel::PoissonKernel { scale: 1.0 });
        assert!((moment(&p, 0, &cfg()).unwrap() - PI).abs() < 1e-9);
        assert!(matches!(moment(&p, 1, &cfg()), Err(Error::DivergentMoment { .. })));
    }

    #[test]
    fn quasi_levy_check() {
        let cauchy = SignedMeasure::from_density(1.0 / PI, DensityKernel::CauchyLevyTail);
        assert!(QuasiLevyMeasure::new(cauchy).is_ok());
        let fm = SignedMeasure::from_density(1.0, DensityKernel::FmQuasiLevy { b: 1.0 / 16.0 });
        assert!(QuasiLevyMeasure::new(fm).is_ok());
        let cubic = SignedMeasure::from_density(1.0, DensityKernel::PowerLaw { exponent: -3.0 });
        assert!(QuasiLevyMeasure::new(cubic).is_err());
        assert!(QuasiLevyMeasure::new(SignedMeasure::dirac(0.0, 1.0)).is_err());
    }

    #[test]
    fn semicircle_pair_to_triplet() {
        let (m, s2) = (0.3, 2.0);
        let p = FreeCharPair::new(m, SignedMeasure::dirac(0.0, s2)).unwrap();
        let t = pair_to_triplet(&p).unwrap();
        assert_eq!(t.a, s2);
        assert!(t.nu.measure().is_zero());
        assert_eq!(t.gamma, m);
        assert!(triplet_to_pair(&t).unwrap().approx_eq(&p, 1e-15));
    }

    #[test]
    fn cauchy_pair_to_triplet() {
        let a = 1.5;
        let p = FreeCharPair::new(0.0, SignedMeasure::from_density(a / PI, DensityKernel::PoissonKernel { scale: 1.0 })).unwrap();
        let t = pair_to_triplet(&p).unwrap();
        assert_eq!(t.a, 0.0);
        assert_eq!(t.nu.measure(), &SignedMeasure::from_density(a / PI, DensityKernel::CauchyLevyTail));
        assert!(t.gamma.abs() < 1e-12);
    }

    #[test]
    fn marchenko_pastur_pair_follows_drift_formula() {
        // (λ/2, (λ/2)δ₁) ↦ (0, λδ₁, λ): the drift picks up ∫x(1 − 1/(1+x²))ν = λ/2.
        let lam = 0.6;
        let p = FreeCharPair::new(lam / 2.0, SignedMeasure::dirac(1.0, lam / 2.0)).unwrap();
        let t = pair_to_triplet(&p).unwrap();
        assert_eq!(t.a, 0.0);
        assert!(measures_approx_eq(t.nu.measure(), &SignedMeasure::dirac(1.0, lam), 1e-15));
        assert!((t.gamma - lam).abs() < 1e-15);
    }

    #[test]
    fn dilated_mp_triplet_to_pair() {
        let (lam, c) = (0.7, 2.5);
        let t = FreeTriplet::new(0.0, SignedMeasure::dirac(c, lam), 0.0).unwrap();
        let p = triplet_to_pair(&t).unwrap();
        let c2 = c * c;
        let expected = FreeCharPair::new(lam * c / (1.0 + c2), SignedMeasure::dirac(c, lam * c2 / (1.0 + c2))).unwrap();
        assert!(p.approx_eq(&expected, 1e-14));
    }

    #[test]
    fn negative_gaussian_part_to_pair() {
        let (a, s2) = (1.0, 0.25);
        let t = FreeTriplet::new(-s2, SignedMeasure::from_density(a / PI, DensityKernel::CauchyLevyTail), 0.0).unwrap();
        let p = triplet_to_pair(&t).unwrap();
        let expected = FreeCharPair::new(
            0.0,
            SignedMeasure::new(
                vec![(0.0, -s2)],
                vec![DensityTerm::new(a / PI, DensityKernel::PoissonKernel { scale: 1.0 })],
            ),
        )
        .unwrap();
        assert!(p.approx_eq(&expected, 1e-12));
    }

    #[test]
    fn json_layout() {
        let m = SignedMeasure::new(
            vec![(1.0, -0.5)],
            vec![DensityTerm::new(2.0, DensityKernel::PoissonKernel { scale: 1.0 })],
        );
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains("\"atoms\":[[1.0,-0.5]]"), "{s}");
        assert!(s.contains("\"kind\":\"poisson_kernel\""), "{s}");
        let back: SignedMeasure = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        let bad = r#"{"a":0.0,"nu":{"atoms":[[0.0,1.0]]},"gamma":0.0}"#;
        assert!(serde_json::from_str::<FreeTriplet>(bad).is_err());
    }
}
