//! Analytic transforms of free probability: Voiculescu transforms as
//! evaluable expression trees, inversion of K(w) = w + φ(w), Cauchy and
//! reciprocal Cauchy transforms, Stieltjes inversion and Pick checks.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::DistributionModel;
use crate::measures::{DensityKernel, FreeCharPair, FreeTriplet, Growth, Interval, SignedMeasure};
use crate::par;
use crate::quad::{QuadConfig, QuadValue};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Square root with arg √z = (arg z)/2 where arg z ∈ [0, 2π); the cut is ℝ₊.
pub fn branch_sqrt(z: Complex64) -> Complex64 {
    let z = Complex64::new(z.re, if z.im == 0.0 { 0.0 } else { z.im });
    if z.im < 0.0 {
        -z.sqrt()
    } else {
        z.sqrt()
    }
}

/// √((z − r₁)(z − r₂)) continued from ∞ with √ ~ z; the cut is [r₁, r₂] and
/// real points on the cut take the limit from above.
pub(crate) fn arc_sqrt(z: Complex64, r1: f64, r2: f64) -> Complex64 {
    let z = Complex64::new(z.re, if z.im == 0.0 { 0.0 } else { z.im });
    (z - r1).sqrt() * (z - r2).sqrt()
}

/// A value with its first two complex derivatives.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub value: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
}

impl Jet {
    pub fn new(value: Complex64, d1: Complex64, d2: Complex64) -> Self {
        Jet { value, d1, d2 }
    }

    fn constant(value: Complex64) -> Self {
        Jet::new(value, Complex64::default(), Complex64::default())
    }

    fn conj(self) -> Self {
        Jet::new(self.value.conj(), self.d1.conj(), self.d2.conj())
    }

    fn scale_c(self, s: Complex64) -> Self {
        Jet::new(self.value * s, self.d1 * s, self.d2 * s)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.value + o.value, self.d1 + o.d1, self.d2 + o.d2)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.value - o.value, self.d1 - o.d1, self.d2 - o.d2)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        Jet::new(self.value * s, self.d1 * s, self.d2 * s)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self * -1.0
    }
}

impl QuadValue for Jet {
    fn norm(&self) -> f64 {
        self.value.norm().max(self.d1.norm()).max(self.d2.norm())
    }
    fn is_finite_value(&self) -> bool {
        [self.value, self.d1, self.d2]
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Symbolic Voiculescu transform φ built from the closed-form pieces that
/// appear in the constructions of this crate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum PhiExpression {
    Const { value: Complex64 },
    /// z ↦ λcz/(z − c).
    RationalMp { c: f64, lambda: f64 },
    /// z ↦ weight/z.
    Pole { weight: f64 },
    /// Cauchy transform of the semicircle law S(mean, variance); a point
    /// mass when the variance is 0.
    SemicircleCauchy { mean: f64, variance: f64 },
    /// z ↦ b + ∫ (1 + xz)/(z − x) τ(dx).
    PairIntegral { pair: FreeCharPair },
    /// z ↦ z·R(1/z) with R the R-transform of the triplet.
    TripletR { triplet: FreeTriplet },
    /// z ↦ c·φ(z/c), continued by reflection when c < 0.
    Dilate { factor: f64, inner: Box<PhiExpression> },
    Sum { terms: Vec<PhiExpression> },
    Scale { factor: f64, inner: Box<PhiExpression> },
    Negate { inner: Box<PhiExpression> },
}

fn quad_cfg() -> QuadConfig {
    QuadConfig {
        abs_tol: 1e-13,
        rel_tol: 1e-13,
        max_segments: 4000,
    }
}

fn is_line(t: &crate::measures::DensityTerm) -> bool {
    t.support == Interval::line()
}

fn finite_or_pole(j: Jet, z: Complex64) -> Result<Jet> {
    if j.is_finite_value() {
        Ok(j)
    } else {
        Err(Error::Pole(z))
    }
}

impl PhiExpression {
    pub fn zero() -> Self {
        PhiExpression::Const {
            value: Complex64::default(),
        }
    }

    pub fn constant(value: Complex64) -> Self {
        PhiExpression::Const { value }
    }

    pub fn sum(terms: Vec<PhiExpression>) -> Self {
        PhiExpression::Sum { terms }
    }

    pub fn plus(self, other: PhiExpression) -> Self {
        match self {
            PhiExpression::Sum { mut terms } => {
                terms.push(other);
                PhiExpression::Sum { terms }
            }
            e => PhiExpression::Sum {
                terms: vec![e, other],
            },
        }
    }

    pub fn minus(self, other: PhiExpression) -> Self {
        self.plus(other.negate())
    }

    pub fn negate(self) -> Self {
        PhiExpression::Negate { inner: Box::new(self) }
    }

    pub fn scaled(self, factor: f64) -> Self {
        PhiExpression::Scale {
            factor,
            inner: Box::new(self),
        }
    }

    pub fn dilate(self, factor: f64) -> Self {
        PhiExpression::Dilate {
            factor,
            inner: Box::new(self),
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.jet(z)?.value)
    }

    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.jet(z)?.d1)
    }

    /// R(z) = z·φ(1/z).
    pub fn r_eval(&self, z: Complex64) -> Result<Complex64> {
        if z == Complex64::default() {
            return Err(Error::Pole(z));
        }
        Ok(z * self.eval(z.inv())?)
    }

    /// φ, φ′ and φ″ at z.
    pub fn jet(&self, z: Complex64) -> Result<Jet> {
        match self {
            PhiExpression::Const { value } => Ok(Jet::constant(*value)),
            PhiExpression::RationalMp { c, lambda } => {
                let d = z - c;
                if d == Complex64::default() {
                    return Err(Error::Pole(z));
                }
                let k = lambda * c * c;
                let inv = d.inv();
                Ok(Jet::new(
                    lambda * c + k * inv,
                    -k * inv * inv,
                    2.0 * k * inv * inv * inv,
                ))
            }
            PhiExpression::Pole { weight } => {
                if z == Complex64::default() {
                    return Err(Error::Pole(z));
                }
                let inv = z.inv();
                Ok(Jet::new(
                    weight * inv,
                    -weight * inv * inv,
                    2.0 * weight * inv * inv * inv,
                ))
            }
            PhiExpression::SemicircleCauchy { mean, variance } => {
                let u = z - mean;
                if *variance == 0.0 {
                    if u == Complex64::default() {
                        return Err(Error::Pole(z));
                    }
                    let g = u.inv();
                    return Ok(Jet::new(g, -g * g, 2.0 * g * g * g));
                }
                let s = variance.sqrt();
                let g = 2.0 / (u + arc_sqrt(u, -2.0 * s, 2.0 * s));
                let d = 2.0 * variance * g - u;
                let g1 = g / d;
                let g2 = (g1 * d - g * (2.0 * variance * g1 - 1.0)) / (d * d);
                finite_or_pole(Jet::new(g, g1, g2), z)
            }
            PhiExpression::PairIntegral { pair } => pair_jet(pair, z),
            PhiExpression::TripletR { triplet } => {
                if z == Complex64::default() {
                    return Err(Error::Pole(z));
                }
                let u = z.inv();
                let r = r_jet(triplet, u)?;
                Ok(Jet::new(r.value / u, r.value - u * r.d1, u * u * u * r.d2))
            }
            PhiExpression::Dilate { factor, inner } => {
                let c = *factor;
                if c == 0.0 {
                    return Err(Error::Unsupported("dilation by 0".into()));
                }
                let u = z / c;
                let j = if c > 0.0 {
                    inner.jet(u)?
                } else {
                    inner.jet(u.conj())?.conj()
                };
                Ok(Jet::new(c * j.value, j.d1, j.d2 / c))
            }
            PhiExpression::Sum { terms } => terms
                .iter()
                .try_fold(Jet::default(), |acc, t| Ok(acc + t.jet(z)?)),
            PhiExpression::Scale { factor, inner } => Ok(inner.jet(z)? * *factor),
            PhiExpression::Negate { inner } => Ok(-inner.jet(z)?),
        }
    }

    /// Normal form: summed constants, summed poles, Marchenko–Pastur terms
    /// merged by node, everything else kept as scaled opaque terms.
    pub fn canonical(&self) -> Canonical {
        let mut acc = Canonical::default();
        collect(self, 1.0, &mut acc);
        acc.normalize();
        acc
    }
}

fn collect(e: &PhiExpression, s: f64, acc: &mut Canonical) {
    match e {
        PhiExpression::Const { value } => acc.constant += value * s,
        PhiExpression::Pole { weight } => acc.pole += weight * s,
        PhiExpression::RationalMp { c, lambda } => acc.mp.push((*c, lambda * s)),
        PhiExpression::Sum { terms } => terms.iter().for_each(|t| collect(t, s, acc)),
        PhiExpression::Scale { factor, inner } => collect(inner, s * factor, acc),
        PhiExpression::Negate { inner } => collect(inner, -s, acc),
        PhiExpression::Dilate { factor, inner } => {
            let c = *factor;
            let mut inner_acc = Canonical::default();
            collect(inner, 1.0, &mut inner_acc);
            inner_acc.normalize();
            if inner_acc.opaque.is_empty() {
                let k = if c > 0.0 {
                    inner_acc.constant
                } else {
                    inner_acc.constant.conj()
                };
                acc.constant += k * (c * s);
                acc.pole += inner_acc.pole * c * c * s;
                for (node, lam) in inner_acc.mp {
                    acc.mp.push((c * node, lam * s));
                }
            } else {
                acc.opaque.push((s, e.clone()));
            }
        }
        other => acc.opaque.push((s, other.clone())),
    }
}

/// Sum-of-parts normal form of a [`PhiExpression`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Canonical {
    pub constant: Complex64,
    pub pole: f64,
    /// (node c, weight λ) of λcz/(z − c), sorted by node.
    pub mp: Vec<(f64, f64)>,
    pub opaque: Vec<(f64, PhiExpression)>,
}

impl Canonical {
    fn normalize(&mut self) {
        self.mp.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for &(c, l) in &self.mp {
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 += l,
                _ => merged.push((c, l)),
            }
        }
        merged.retain(|(_, l)| *l != 0.0);
        self.mp = merged;
        self.opaque.retain(|(s, _)| *s != 0.0);
    }

    pub fn approx_eq(&self, other: &Canonical, tol: f64) -> bool {
        (self.constant - other.constant).norm() <= tol
            && (self.pole - other.pole).abs() <= tol
            && self.mp.len() == other.mp.len()
            && self
                .mp
                .iter()
                .zip(&other.mp)
                .all(|(a, b)| (a.0 - b.0).abs() <= tol && (a.1 - b.1).abs() <= tol)
            && self.opaque.len() == other.opaque.len()
            && self
                .opaque
                .iter()
                .zip(&other.opaque)
                .all(|(a, b)| (a.0 - b.0).abs() <= tol && a.1 == b.1)
    }

    pub fn to_expression(&self) -> PhiExpression {
        let mut terms = Vec::new();
        if self.constant != Complex64::default() {
            terms.push(PhiExpression::constant(self.constant));
        }
        if self.pole != 0.0 {
            terms.push(PhiExpression::Pole { weight: self.pole });
        }
        for &(c, lambda) in &self.mp {
            terms.push(PhiExpression::RationalMp { c, lambda });
        }
        for (s, e) in &self.opaque {
            terms.push(if *s == 1.0 { e.clone() } else { e.clone().scaled(*s) });
        }
        match terms.len() {
            0 => PhiExpression::zero(),
            1 => terms.pop().unwrap(),
            _ => PhiExpression::sum(terms),
        }
    }
}

fn pair_jet(pair: &FreeCharPair, z: Complex64) -> Result<Jet> {
    let mut acc = Jet::constant(Complex64::new(pair.b, 0.0));
    for &(x, w) in &pair.tau.atoms {
        let d = z - x;
        if d == Complex64::default() {
            return Err(Error::Pole(z));
        }
        let inv = d.inv();
        let k = 1.0 + x * x;
        acc = acc + Jet::new(x + k * inv, -k * inv * inv, 2.0 * k * inv * inv * inv) * w;
    }
    for term in &pair.tau.densities {
        if let (DensityKernel::PoissonKernel { scale }, true) = (&term.kernel, is_line(term)) {
            let s = *scale;
            let jet = |z: Complex64| {
                let d = z + I * s;
                Jet::new(
                    PI * (1.0 - I * s * z) / d,
                    PI * (s * s - 1.0) / (d * d),
                    -2.0 * PI * (s * s - 1.0) / (d * d * d),
                )
            };
            let j = if z.im >= 0.0 { jet(z) } else { jet(z.conj()).conj() };
            acc = acc + j * term.coefficient;
            continue;
        }
        if z.im == 0.0 {
            return Err(Error::Domain(z));
        }
        let single = SignedMeasure::new(Vec::new(), vec![term.clone()]);
        let est = single
            .integrate_density(
                |x| {
                    let inv = (z - x).inv();
                    let k = 1.0 + x * x;
                    Jet::new(x + k * inv, -k * inv * inv, 2.0 * k * inv * inv * inv)
                },
                &Interval::line(),
                Growth {
                    at_zero: 0.0,
                    at_infinity: 0.0,
                },
                false,
                &quad_cfg(),
            )
            .map_err(|o| Error::NonIntegrable(format!("{o:?}")))?;
        acc = acc + est.value;
    }
    finite_or_pole(acc, z)
}

/// R, R′ and R″ at u for the triplet (a, ν, γ).
fn r_jet(t: &FreeTriplet, u: Complex64) -> Result<Jet> {
    let a = t.a;
    let mut acc = Jet::new(a * u * u + t.gamma * u, 2.0 * a * u + t.gamma, Complex64::new(2.0 * a, 0.0));
    let nu = t.nu.measure();
    let kernel = |x: f64| -> Jet {
        let xu = x * u;
        let d = (1.0 - xu).inv();
        if x.abs() <= 1.0 {
            // Cancellation-free forms of d − 1 − xu and x·d² − x.
            Jet::new(xu * xu * d, x * xu * (2.0 - xu) * d * d, 2.0 * x * x * d * d * d)
        } else {
            Jet::new(d - 1.0, x * d * d, 2.0 * x * x * d * d * d)
        }
    };
    for &(x, w) in &nu.atoms {
        if 1.0 - x * u == Complex64::default() {
            return Err(Error::Pole(u));
        }
        acc = acc + kernel(x) * w;
    }
    for term in &nu.densities {
        if let (DensityKernel::CauchyLevyTail, true) = (&term.kernel, is_line(term)) {
            // ∫ k(x, u) dx/x² = −iπu on the closed lower half-plane.
            let sign = if u.im <= 0.0 { -1.0 } else { 1.0 };
            let j = Jet::new(I * PI * u, I * PI, Complex64::default()).scale_c(Complex64::new(sign, 0.0));
            acc = acc + j * term.coefficient;
            continue;
        }
        if u.im == 0.0 {
            return Err(Error::Domain(u));
        }
        let single = SignedMeasure::new(Vec::new(), vec![term.clone()]);
        let est = single
            .integrate_density(
                kernel,
                &Interval::line(),
                Growth {
                    at_zero: 2.0,
                    at_infinity: 0.0,
                },
                false,
                &quad_cfg(),
            )
            .map_err(|o| Error::NonIntegrable(format!("{o:?}")))?;
        acc = acc + est.value;
    }
    finite_or_pole(acc, u)
}

/// R-transform of a triplet at z ∈ ℂ⁻:
/// R(z) = az² + γz + ∫ (1/(1 − xz) − 1 − xz·1_{[−1,1]}(x)) ν(dx).
pub fn r_from_triplet(t: &FreeTriplet, z: Complex64) -> Result<Complex64> {
    if z.im >= 0.0 {
        return Err(Error::Domain(z));
    }
    Ok(r_jet(t, z)?.value)
}

/// The truncated cone Γ_{α,β} = {Im z > β, |Re z| < α Im z}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub alpha: f64,
    pub beta: f64,
}

impl ConeSpec {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(Error::Validity(format!("cone parameters α = {alpha}, β = {beta} must be positive")));
        }
        Ok(ConeSpec { alpha, beta })
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.im > self.beta && z.re.abs() < self.alpha * z.im
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    pub max_iterations: usize,
    /// Accept when |K(w) − z| ≤ tolerance·(1 + |z|).
    pub tolerance: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            max_iterations: 200,
            tolerance: 1e-10,
        }
    }
}

/// Result of solving K(w) = z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inversion {
    pub w: Complex64,
    pub residual: f64,
    pub iterations: usize,
}

fn k_jet(phi: &PhiExpression, w: Complex64) -> Result<Jet> {
    let j = phi.jet(w)?;
    Ok(Jet::new(w + j.value, j.d1 + 1.0, j.d2))
}

/// Damped Newton on K(w) − target. With `closed` the iterate may touch the
/// real axis (used for boundary values).
fn newton(
    phi: &PhiExpression,
    target: Complex64,
    w0: Complex64,
    closed: bool,
    cfg: &NewtonConfig,
) -> Result<Inversion> {
    let tol = cfg.tolerance * (1.0 + target.norm());
    let admissible = |w: Complex64| if closed { w.im >= 0.0 } else { w.im > 0.0 };
    let project = |w: Complex64| {
        if closed && w.im < 0.0 && w.im > -1e-12 * (1.0 + w.norm()) {
            Complex64::new(w.re, 0.0)
        } else {
            w
        }
    };
    let mut w = w0;
    let mut k = k_jet(phi, w)?;
    let mut r = (k.value - target).norm();
    let mut history = vec![w];
    for it in 0..cfg.max_iterations {
        if r <= tol {
            // Polish while it helps.
            for _ in 0..3 {
                if k.d1 == Complex64::default() {
                    break;
                }
                let cand = project(w - (k.value - target) / k.d1);
                if !admissible(cand) {
                    break;
                }
                match k_jet(phi, cand) {
                    Ok(kc) if (kc.value - target).norm() < r => {
                        w = cand;
                        k = kc;
                        r = (kc.value - target).norm();
                    }
                    _ => break,
                }
            }
            let refined = refine_near_critical(phi, target, w, k, closed)?;
            return Ok(Inversion {
                w: refined.0,
                residual: refined.1,
                iterations: it,
            });
        }
        if k.d1 == Complex64::default() {
            break;
        }
        let step = -(k.value - target) / k.d1;
        let mut t = 1.0;
        let mut accepted = false;
        let mut escaped = true;
        for _ in 0..60 {
            let cand = project(w + step * t);
            if admissible(cand) {
                escaped = false;
                if let Ok(kc) = k_jet(phi, cand) {
                    let rc = (kc.value - target).norm();
                    if rc < r {
                        w = cand;
                        k = kc;
                        r = rc;
                        accepted = true;
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        history.push(w);
        if !accepted {
            if escaped {
                return Err(Error::LeftHalfPlaneEscape(w));
            }
            break;
        }
    }
    if r <= tol {
        return Ok(Inversion {
            w,
            residual: r,
            iterations: cfg.max_iterations,
        });
    }
    let keep = history.len().saturating_sub(5);
    Err(Error::NoConvergence {
        iterations: history.len() - 1,
        residual: r,
        iterates: history.split_off(keep),
    })
}

/// Near a double root of K − z Newton only reaches √ε accuracy. Locate the
/// critical point K′(w_c) = 0 and, when K(w_c) matches the target, return it;
/// otherwise step from w_c along the local quadratic model.
fn refine_near_critical(
    phi: &PhiExpression,
    target: Complex64,
    w: Complex64,
    k: Jet,
    closed: bool,
) -> Result<(Complex64, f64)> {
    let r = (k.value - target).norm();
    let scale = 1.0 + w.norm();
    if k.d1.norm() > 1e-4 || k.d2.norm() == 0.0 {
        return Ok((w, r));
    }
    let mut wc = w;
    let mut kc = k;
    for _ in 0..50 {
        if kc.d2 == Complex64::default() {
            break;
        }
        let step = -kc.d1 / kc.d2;
        wc += step;
        kc = match k_jet(phi, wc) {
            Ok(j) => j,
            Err(_) => return Ok((w, r)),
        };
        if step.norm() <= 1e-15 * scale {
            break;
        }
    }
    if kc.d1.norm() > 1e-10 || (wc - w).norm() > 1e-3 * scale {
        return Ok((w, r));
    }
    let gap = target - kc.value;
    let ok = |c: Complex64| if closed { c.im >= 0.0 } else { c.im > 0.0 };
    if gap.norm() <= 1e-14 * (1.0 + target.norm()) && ok(wc) {
        return Ok((wc, gap.norm()));
    }
    let delta = (2.0 * gap / kc.d2).sqrt();
    let mut best = (w, r);
    for cand in [wc + delta, wc - delta] {
        if !ok(cand) || (cand - w).norm() > 1e-3 * scale {
            continue;
        }
        let mut c = cand;
        let mut rc = f64::INFINITY;
        for _ in 0..4 {
            let kj = match k_jet(phi, c) {
                Ok(j) => j,
                Err(_) => break,
            };
            rc = (kj.value - target).norm();
            if kj.d1 == Complex64::default() {
                break;
            }
            let next = c - (kj.value - target) / kj.d1;
            if !ok(next) {
                break;
            }
            c = next;
        }
        if let Ok(kj) = k_jet(phi, c) {
            rc = rc.min((kj.value - target).norm());
            let rr = (kj.value - target).norm();
            if rr <= best.1 && (c - w).norm() <= (cand - w).norm() + 1e-3 * scale {
                best = (c, rr);
            }
        }
        let _ = rc;
    }
    Ok(best)
}

/// Solve K(w) = w + φ(w) = z for w ∈ ℂ⁺, i.e. evaluate F = K⁻¹ at z.
pub fn invert_k(phi: &PhiExpression, z: Complex64, cone: Option<&ConeSpec>) -> Result<Complex64> {
    Ok(invert_k_with(phi, z, cone, &NewtonConfig::default())?.w)
}

pub fn invert_k_with(
    phi: &PhiExpression,
    z: Complex64,
    cone: Option<&ConeSpec>,
    cfg: &NewtonConfig,
) -> Result<Inversion> {
    if z.im <= 0.0 {
        return Err(Error::Domain(z));
    }
    if let Some(c) = cone {
        if !c.contains(z) {
            return Err(Error::Domain(z));
        }
    }
    // F maps ℂ⁺ into {Im F ≥ Im z}; a root below that is the wrong sheet.
    let slack = 1e-9 * (1.0 + z.norm());
    let first = match newton(phi, z, z, false, cfg) {
        Ok(inv) if inv.w.im >= z.im - slack => return Ok(inv),
        Ok(inv) => Error::BranchMismatch { z, value: inv.w },
        Err(e) => e,
    };
    // Follow the branch down from far up the vertical line through z.
    let top = 10.0 * (1.0 + z.norm());
    let mut w = Complex64::new(z.re, z.im + top);
    let steps = 24;
    for k in 1..steps {
        let t = 1.0 - k as f64 / steps as f64;
        let zk = Complex64::new(z.re, z.im + top * t * t);
        match newton(phi, zk, w, false, cfg) {
            Ok(inv) => w = inv.w,
            Err(_) => return Err(first),
        }
    }
    newton(phi, z, w, false, cfg).map_err(|_| first)
}

/// Boundary value F(x + i0) by continuation in the imaginary part.
pub fn boundary_f(phi: &PhiExpression, x: f64) -> Result<Inversion> {
    let cfg = NewtonConfig::default();
    let ladder = [1.0, 0.3, 0.1, 0.03, 0.01, 3e-3, 1e-3, 1e-4, 1e-5];
    let mut w = invert_k_with(phi, Complex64::new(x, ladder[0]), None, &cfg)?.w;
    for &y in &ladder[1..] {
        w = newton(phi, Complex64::new(x, y), w, false, &cfg)?.w;
    }
    newton(phi, Complex64::new(x, 0.0), w, true, &cfg)
}

/// Cauchy transform G_μ(z), z ∈ ℂ⁺.
pub fn cauchy_transform(model: &DistributionModel, z: Complex64) -> Result<Complex64> {
    if z.im <= 0.0 {
        return Err(Error::Domain(z));
    }
    let f = f_transform(model, z)?;
    Ok(f.inv())
}

/// Reciprocal Cauchy transform F_μ = 1/G_μ, z ∈ ℂ⁺.
pub fn f_transform(model: &DistributionModel, z: Complex64) -> Result<Complex64> {
    if z.im <= 0.0 {
        return Err(Error::Domain(z));
    }
    let f = match model.closed_form_g(z) {
        Some(g) => g?.inv(),
        None => invert_k(&model.phi()?, z, None)?,
    };
    if !(f.im > 0.0) {
        return Err(Error::BranchMismatch { z, value: f });
    }
    Ok(f)
}

/// Boundary value G_μ(x + i0) on the real line, with an error estimate.
pub fn boundary_cauchy(model: &DistributionModel, x: f64) -> Result<(Complex64, f64)> {
    if let Some(g) = model.boundary_g(x) {
        let g = g?;
        return Ok((g, 1e-14 * (1.0 + g.norm())));
    }
    let phi = model.phi()?;
    let inv = boundary_f(&phi, x)?;
    let g = inv.w.inv();
    let k1 = k_jet(&phi, inv.w)?.d1;
    let dw = if k1.norm() > 0.0 { inv.residual / k1.norm() } else { inv.residual.sqrt() };
    Ok((g, dw.min(inv.w.norm()) * g.norm() * g.norm() + 1e-14 * (1.0 + g.norm())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InversionMethod {
    /// Direct limit G(x + i0): closed forms on the real line, or Newton
    /// continuation of K(w) = x + iy down to y = 0.
    Boundary,
    /// Polynomial extrapolation in y of −Im G(x + iy)/π to y = 0.
    Richardson,
    /// Cosine transform of a real even characteristic function.
    Fourier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StieltjesOptions {
    pub method: InversionMethod,
    pub y_levels: Vec<f64>,
}

impl Default for StieltjesOptions {
    fn default() -> Self {
        StieltjesOptions {
            method: InversionMethod::Boundary,
            y_levels: vec![1e-3, 5e-4, 2.5e-4],
        }
    }
}

impl StieltjesOptions {
    pub fn richardson(y_levels: Vec<f64>) -> Self {
        StieltjesOptions {
            method: InversionMethod::Richardson,
            y_levels,
        }
    }
}

/// A sampled density with inversion metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub xs: Vec<f64>,
    pub fs: Vec<f64>,
    pub y_levels: Vec<f64>,
    pub est_error: Vec<f64>,
    pub method: InversionMethod,
}

impl DensityGrid {
    /// Indices where the density is negative beyond its error bound.
    pub fn negativity_violations(&self) -> Vec<usize> {
        (0..self.fs.len())
            .filter(|&i| self.fs[i] < -self.est_error[i])
            .collect()
    }

    /// Trapezoidal mass of the sampled values.
    pub fn trapezoid_mass(&self) -> f64 {
        self.xs
            .windows(2)
            .zip(self.fs.windows(2))
            .map(|(x, f)| 0.5 * (x[1] - x[0]) * (f[0] + f[1]))
            .sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,f,est_error\n");
        for i in 0..self.xs.len() {
            out.push_str(&format!(
                "{},{},{}\n",
                crate::format::csv_float(self.xs[i]),
                crate::format::csv_float(self.fs[i]),
                crate::format::csv_float(self.est_error[i])
            ));
        }
        out
    }
}

/// Richardson (Neville) extrapolation of samples (h_i, v_i) to h = 0; returns
/// the extrapolated value and the gap between the last two orders.
pub fn extrapolate_to_zero(hs: &[f64], vs: &[f64]) -> (f64, f64) {
    assert_eq!(hs.len(), vs.len());
    let n = hs.len();
    if n == 1 {
        return (vs[0], f64::INFINITY);
    }
    let mut p = vs.to_vec();
    let mut prev = p[n - 1];
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (hs[i + m] * p[i] - hs[i] * p[i + 1]) / (hs[i + m] - hs[i]);
        }
        if m == n - 1 {
            return (p[0], (p[0] - prev).abs());
        }
        prev = p[n - m - 1];
    }
    (p[0], 0.0)
}

fn density_point(model: &DistributionModel, x: f64, opts: &StieltjesOptions) -> Result<(f64, f64)> {
    match opts.method {
        InversionMethod::Boundary => {
            let (g, err) = boundary_cauchy(model, x)?;
            Ok((-g.im / PI, err / PI))
        }
        InversionMethod::Fourier => Err(Error::Unsupported(
            "Fourier inversion needs a characteristic function, not a Cauchy transform".into(),
        )),
        InversionMethod::Richardson => {
            let vals = opts
                .y_levels
                .iter()
                .map(|&y| Ok(-cauchy_transform(model, Complex64::new(x, y))?.im / PI))
                .collect::<Result<Vec<f64>>>()?;
            Ok(extrapolate_to_zero(&opts.y_levels, &vals))
        }
    }
}

/// Stieltjes inversion f(x) = −(1/π) lim_{y↓0} Im G(x + iy) on a grid.
pub fn stieltjes_density(model: &DistributionModel, xs: &[f64], opts: &StieltjesOptions) -> Result<DensityGrid> {
    let pts = par::map(xs, |&x| density_point(model, x, opts));
    assemble(xs, pts, opts)
}

/// Sequential variant of [`stieltjes_density`].
pub fn stieltjes_density_seq(model: &DistributionModel, xs: &[f64], opts: &StieltjesOptions) -> Result<DensityGrid> {
    let pts = par::map_seq(xs, |&x| density_point(model, x, opts));
    assemble(xs, pts, opts)
}

fn assemble(xs: &[f64], pts: Vec<Result<(f64, f64)>>, opts: &StieltjesOptions) -> Result<DensityGrid> {
    let mut fs = Vec::with_capacity(xs.len());
    let mut est = Vec::with_capacity(xs.len());
    for p in pts {
        let (f, e) = p?;
        fs.push(f);
        est.push(e);
    }
    let y_levels = match opts.method {
        InversionMethod::Boundary | InversionMethod::Fourier => vec![0.0],
        InversionMethod::Richardson => opts.y_levels.clone(),
    };
    Ok(DensityGrid {
        xs: xs.to_vec(),
        fs,
        y_levels,
        est_error: est,
        method: opts.method,
    })
}

/// Sampling plan for [`pick_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PickSampleSpec {
    pub x_max: f64,
    pub x_points: usize,
    pub y_min: f64,
    pub y_max: f64,
    pub y_points: usize,
    pub asymptotic_y: f64,
    pub asymptotic_tol: f64,
}

impl Default for PickSampleSpec {
    fn default() -> Self {
        PickSampleSpec {
            x_max: 10.0,
            x_points: 21,
            y_min: 1e-2,
            y_max: 1e2,
            y_points: 9,
            asymptotic_y: 1e4,
            asymptotic_tol: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PickWitness {
    pub z: Complex64,
    pub reason: String,
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactCriterion {
    pub family: String,
    pub inequality: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PickReport {
    pub passed: bool,
    pub samples: usize,
    pub min_im_f: f64,
    pub asymptotic_error: f64,
    pub exact: Option<ExactCriterion>,
    pub witnesses: Vec<PickWitness>,
}

/// The two quadratic patterns with a known exact criterion.
enum Pattern {
    /// φ = −ai − λcz/(z − c)
    Rho { a: f64, c: f64, lambda: f64 },
    /// φ = −ai − σ²/z
    Gamma { a: f64, sigma2: f64 },
}

fn detect_pattern(phi: &PhiExpression) -> Option<Pattern> {
    let can = phi.canonical();
    if !can.opaque.is_empty() || can.constant.re != 0.0 || can.constant.im >= 0.0 {
        return None;
    }
    let a = -can.constant.im;
    match (can.pole, can.mp.as_slice()) {
        (p, []) if p < 0.0 => Some(Pattern::Gamma { a, sigma2: -p }),
        (p, [(c, l)]) if p == 0.0 && *l < 0.0 => Some(Pattern::Rho {
            a,
            c: *c,
            lambda: -l,
        }),
        _ => None,
    }
}

/// Check that F = K⁻¹ is a Pick function with F(iy)/(iy) → 1.
pub fn pick_check(phi: &PhiExpression, spec: &PickSampleSpec) -> PickReport {
    let mut witnesses = Vec::new();
    let mut exact = None;
    match detect_pattern(phi) {
        Some(Pattern::Rho { a, c, lambda }) => {
            let bound = (a / (2.0 * c)).powi(2);
            let holds = lambda <= bound;
            if !holds {
                // q(z) is real on Re z = c(1 − λ) where it equals 4c²λ − (y + a)².
                let y = (2.0 * c.abs() * lambda.sqrt() - a) / 2.0;
                let z = Complex64::new(c * (1.0 - lambda), y);
                let s = z + c * (lambda + 1.0) + I * a;
                let q = s * s - 4.0 * c * (z + I * a);
                witnesses.push(PickWitness {
                    z,
                    reason: format!("q(z) = {:.6e} lies on the cut ℝ₊, so F is not analytic there", q.re),
                    value: q,
                });
            }
            exact = Some(ExactCriterion {
                family: "rho_acl".into(),
                inequality: format!("λ ≤ (a/2c)²: {lambda} ≤ {bound}"),
                holds,
            });
        }
        Some(Pattern::Gamma { a, sigma2 }) => {
            let sigma = sigma2.sqrt();
            let holds = 2.0 * sigma <= a;
            if !holds {
                let y = (2.0 * sigma - a) / 2.0;
                let z = Complex64::new(0.0, y);
                let q = (z + I * a) * (z + I * a) + 4.0 * sigma2;
                witnesses.push(PickWitness {
                    z,
                    reason: format!("(z + ai)² + 4σ² = {:.6e} lies on the cut ℝ₊, so F is not analytic there", q.re),
                    value: q,
                });
            }
            exact = Some(ExactCriterion {
                family: "gamma_as".into(),
                inequality: format!("2σ ≤ a: {} ≤ {a}", 2.0 * sigma),
                holds,
            });
        }
        None => {}
    }

    let mut zs = Vec::new();
    for i in 0..spec.x_points {
        let x = if spec.x_points == 1 {
            0.0
        } else {
            -spec.x_max + 2.0 * spec.x_max * i as f64 / (spec.x_points - 1) as f64
        };
        for j in 0..spec.y_points {
            let t = if spec.y_points == 1 { 0.0 } else { j as f64 / (spec.y_points - 1) as f64 };
            let y = spec.y_min * (spec.y_max / spec.y_min).powf(t);
            zs.push(Complex64::new(x, y));
        }
    }
    let results = par::map(&zs, |&z| invert_k(phi, z, None));
    let mut min_im = f64::INFINITY;
    for (z, r) in zs.iter().zip(results) {
        match r {
            Ok(f) => {
                min_im = min_im.min(f.im);
                let slack = 1e-9 * (1.0 + z.norm());
                if !(f.im > 0.0) || f.im < z.im - slack {
                    witnesses.push(PickWitness {
                        z: *z,
                        reason: "Im F(z) < Im z".into(),
                        value: f,
                    });
                }
            }
            Err(e) => witnesses.push(PickWitness {
                z: *z,
                reason: format!("inversion failed: {e}"),
                value: Complex64::new(f64::NAN, f64::NAN),
            }),
        }
    }
    let zy = Complex64::new(0.0, spec.asymptotic_y);
    let asymptotic_error = match invert_k(phi, zy, None) {
        Ok(f) => (f / zy - 1.0).norm(),
        Err(_) => f64::INFINITY,
    };
    if !(asymptotic_error <= spec.asymptotic_tol) {
        witnesses.push(PickWitness {
            z: zy,
            reason: format!("|F(iy)/(iy) − 1| = {asymptotic_error:e} exceeds {}", spec.asymptotic_tol),
            value: Complex64::new(asymptotic_error, 0.0),
        });
    }
    PickReport {
        passed: witnesses.is_empty() && exact.as_ref().is_none_or(|e| e.holds),
        samples: zs.len() + 1,
        min_im_f: min_im,
        asymptotic_error,
        exact,
        witnesses,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{DensityTerm, SignedMeasure};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn branch_sqrt_argument_is_half_angle() {
        for k in 1..64 {
            let theta = 2.0 * PI * k as f64 / 64.0;
            for r in [0.25, 1.0, 7.5] {
                let z = Complex64::from_polar(r, theta);
                let s = branch_sqrt(z);
                let mut arg = s.im.atan2(s.re);
                if arg < 0.0 {
                    arg += 2.0 * PI;
                }
                assert!((arg - theta / 2.0).abs() < 1e-14, "θ = {theta}");
                assert!((s.norm() - r.sqrt()).abs() < 1e-14);
            }
        }
        assert_eq!(branch_sqrt(c(4.0, 0.0)), c(2.0, 0.0));
        assert_eq!(branch_sqrt(c(4.0, -0.0)), c(2.0, 0.0));
    }

    #[test]
    fn jets_match_finite_differences() {
        let phis = vec![
            PhiExpression::constant(c(0.0, -1.0)).minus(PhiExpression::RationalMp { c: 1.0, lambda: 0.25 }),
            PhiExpression::Pole { weight: -0.25 },
            PhiExpression::SemicircleCauchy { mean: 0.3, variance: 0.5 },
            PhiExpression::RationalMp { c: 2.0, lambda: 0.5 }.dilate(-1.5),
            PhiExpression::PairIntegral {
                pair: FreeCharPair::new(
                    0.2,
                    SignedMeasure::new(
                        vec![(0.5, 0.3)],
                        vec![DensityTerm::new(0.7, DensityKernel::SemicircleArc { mean: 0.0, variance: 1.0 })],
                    ),
                )
                .unwrap(),
            },
            PhiExpression::TripletR {
                triplet: FreeTriplet::new(
                    -0.25,
                    SignedMeasure::new(
                        vec![(1.5, -0.2)],
                        vec![DensityTerm::new(1.0 / PI, DensityKernel::CauchyLevyTail)],
                    ),
                    0.1,
                )
                .unwrap(),
            },
        ];
        let h = 1e-5;
        for phi in &phis {
            for z in [c(0.3, 1.2), c(-2.0, 0.7), c(1.1, 3.0)] {
                let j = phi.jet(z).unwrap();
                let fd1 = (phi.eval(z + h).unwrap() - phi.eval(z - h).unwrap()) / (2.0 * h);
                let fd2 = (phi.derivative(z + h).unwrap() - phi.derivative(z - h).unwrap()) / (2.0 * h);
                assert!((fd1 - j.d1).norm() < 1e-6 * (1.0 + j.d1.norm()), "{phi:?} at {z}");
                assert!((fd2 - j.d2).norm() < 1e-6 * (1.0 + j.d2.norm()), "{phi:?} at {z}");
            }
        }
    }

    #[test]
    fn poisson_pair_integral_is_minus_ai() {
        let a = 1.3;
        let pair = FreeCharPair::new(0.0, SignedMeasure::from_density(a / PI, DensityKernel::PoissonKernel { scale: 1.0 })).unwrap();
        let phi = PhiExpression::PairIntegral { pair: pair.clone() };
        for z in [c(0.0, 1.0), c(3.0, 0.2), c(-1.0, 5.0)] {
            assert!((phi.eval(z).unwrap() - c(0.0, -a)).norm() < 1e-14);
        }
        // The fast path agrees with quadrature on a restricted copy.
        let s = 2.0;
        let fast = PhiExpression::PairIntegral {
            pair: FreeCharPair::new(0.0, SignedMeasure::from_density(1.0, DensityKernel::PoissonKernel { scale: s })).unwrap(),
        };
        let split = PhiExpression::PairIntegral {
            pair: FreeCharPair::new(
                0.0,
                SignedMeasure::new(
                    Vec::new(),
                    vec![
                        DensityTerm::new(1.0, DensityKernel::PoissonKernel { scale: s }).on(Interval::to(0.0)),
                        DensityTerm::new(1.0, DensityKernel::PoissonKernel { scale: s }).on(Interval::from(0.0)),
                    ],
                ),
            )
            .unwrap(),
        };
        let z = c(0.4, 0.9);
        assert!((fast.jet(z).unwrap().value - split.jet(z).unwrap().value).norm() < 1e-9);
        assert!((fast.jet(z).unwrap().d1 - split.jet(z).unwrap().d1).norm() < 1e-9);
    }

    #[test]
    fn cauchy_tail_r_integral_matches_quadrature() {
        let fast = FreeTriplet::new(0.0, SignedMeasure::from_density(1.0, DensityKernel::CauchyLevyTail), 0.0).unwrap();
        let split = FreeTriplet::new(
            0.0,
            SignedMeasure::new(
                Vec::new(),
                vec![
                    DensityTerm::new(1.0, DensityKernel::CauchyLevyTail).on(Interval::to(0.0)),
                    DensityTerm::new(1.0, DensityKernel::CauchyLevyTail).on(Interval::from(0.0)),
                ],
            ),
            0.0,
        )
        .unwrap();
        for u in [c(0.5, -0.5), c(-1.0, -0.1), c(2.0, -3.0)] {
            let a = r_from_triplet(&fast, u).unwrap();
            let b = r_from_triplet(&split, u).unwrap();
            assert!((a - b).norm() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn pair_integral_of_mp_pair() {
        let lam = 0.8;
        let pair = FreeCharPair::new(lam / 2.0, SignedMeasure::dirac(1.0, lam / 2.0)).unwrap();
        let z = c(0.0, 2.0);
        let v = PhiExpression::PairIntegral { pair }.eval(z).unwrap();
        assert!((v - lam * z / (z - 1.0)).norm() < 1e-15);
    }

    #[test]
    fn r_of_gaussian_triplet() {
        let t = FreeTriplet::new(1.0, SignedMeasure::zero(), 0.0).unwrap();
        let z = c(0.3, -0.7);
        assert!((r_from_triplet(&t, z).unwrap() - z * z).norm() < 1e-15);
        assert!(matches!(r_from_triplet(&t, c(0.3, 0.7)), Err(Error::Domain(_))));
    }

    #[test]
    fn r_agrees_with_z_phi_of_inverse() {
        let (a, s2) = (1.0, 0.25);
        let t = FreeTriplet::new(-s2, SignedMeasure::from_density(a / PI, DensityKernel::CauchyLevyTail), 0.0).unwrap();
        let phi = PhiExpression::constant(c(0.0, -a)).plus(PhiExpression::Pole { weight: -s2 });
        let z = c(0.0, -1.0);
        let r = r_from_triplet(&t, z).unwrap();
        assert!((r - (-a + s2)).norm() < 1e-14, "{r}");
        assert!((r - phi.r_eval(z).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn invert_identity_and_pole() {
        let z = c(0.7, 1.3);
        assert_eq!(invert_k(&PhiExpression::zero(), z, None).unwrap(), z);
        let zz = c(0.0, 2.5);
        let w = invert_k(&PhiExpression::Pole { weight: 1.0 }, zz, None).unwrap();
        // w + 1/w = z ⇒ w = (z + √(z² − 4))/2 on the upper branch.
        let oracle = (zz + arc_sqrt(zz, -2.0, 2.0)) / 2.0;
        assert!((w - oracle).norm() < 1e-12);
    }

    #[test]
    fn invert_rho_matches_closed_form() {
        let (a, cc, lam) = (1.0, 1.0, 0.25);
        let phi = PhiExpression::constant(c(0.0, -a)).minus(PhiExpression::RationalMp { c: cc, lambda: lam });
        let z = c(0.0, 1.0);
        let w = invert_k(&phi, z, None).unwrap();
        let s = z + cc * (lam + 1.0) + c(0.0, a);
        let q = s * s - 4.0 * cc * (z + c(0.0, a));
        let f = (s + branch_sqrt(q)) / 2.0;
        assert!((w - f).norm() < 1e-10);
    }

    #[test]
    fn cone_rejects_outside_points() {
        let cone = ConeSpec::new(1.0, 1.0).unwrap();
        let phi = PhiExpression::zero();
        assert!(invert_k(&phi, c(0.0, 2.0), Some(&cone)).is_ok());
        assert!(matches!(invert_k(&phi, c(5.0, 2.0), Some(&cone)), Err(Error::Domain(_))));
        assert!(matches!(invert_k(&phi, c(0.0, -1.0), None), Err(Error::Domain(_))));
    }

    #[test]
    fn boundary_value_at_double_root() {
        let phi = PhiExpression::constant(c(0.0, -1.0)).plus(PhiExpression::Pole { weight: -0.25 });
        let inv = boundary_f(&phi, 0.0).unwrap();
        assert!((inv.w - c(0.0, 0.5)).norm() < 1e-13, "{}", inv.w);
    }

    #[test]
    fn richardson_is_exact_on_quadratics() {
        let hs = [1e-3, 5e-4, 2.5e-4];
        let vs: Vec<f64> = hs.iter().map(|h| 2.0 + 3.0 * h - 7.0 * h * h).collect();
        let (v, _) = extrapolate_to_zero(&hs, &vs);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn canonical_collects_parts() {
        let phi = PhiExpression::sum(vec![
            PhiExpression::RationalMp { c: 1.0, lambda: 0.25 },
            PhiExpression::constant(c(0.0, -1.0)),
            PhiExpression::RationalMp { c: 1.0, lambda: 0.25 }.negate(),
            PhiExpression::Pole { weight: 2.0 }.dilate(-2.0),
        ]);
        let can = phi.canonical();
        assert!(can.mp.is_empty());
        assert_eq!(can.constant, c(0.0, -1.0));
        assert_eq!(can.pole, 8.0);
    }

    #[test]
    fn pick_patterns() {
        let rho = |a: f64, cc: f64, lam: f64| {
            PhiExpression::constant(c(0.0, -a)).minus(PhiExpression::RationalMp { c: cc, lambda: lam })
        };
        let spec = PickSampleSpec::default();
        let good = pick_check(&rho(1.0, 1.0, 0.25), &spec);
        assert!(good.passed, "{:?}", good.witnesses.iter().take(5).collect::<Vec<_>>());
        let bad = pick_check(&rho(1.0, 1.0, 1.0), &spec);
        assert!(!bad.passed);
        let w = &bad.witnesses[0];
        assert_eq!(w.z.re, 0.0);
        assert!(w.value.re > 0.0 && w.value.im.abs() < 1e-12);
        let gamma = PhiExpression::constant(c(0.0, -1.0)).plus(PhiExpression::Pole { weight: -0.25 });
        assert!(pick_check(&gamma, &spec).passed);
    }

    #[test]
    fn density_grid_csv() {
        let g = DensityGrid {
            xs: vec![0.0, 1.0],
            fs: vec![0.5, 0.25],
            y_levels: vec![0.0],
            est_error: vec![0.0, 0.0],
            method: InversionMethod::Boundary,
        };
        let csv = g.to_csv();
        assert!(csv.starts_with("x,f,est_error\n"));
        assert_eq!(csv.lines().count(), 3);
    }
}
