//! Pairs (c, ν) whose common triplet (0, c/(πx²)dx − ν, 0) may be both a
//! classical and a free characteristic triplet, membership tests for the
//! classes Φ, Φ⁺, Φ*, Φ^⊞, and the extended Bercovici–Pata map.
//!
//! ν is a finite symmetric atomic measure. Certificates are sufficient
//! conditions only; a class is reported `unknown` when none applies.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::DistributionModel;
use crate::measures::{DensityKernel, FreeTriplet, Growth, Interval, SignedMeasure};
use crate::par;
use crate::quad::QuadConfig;
use crate::transforms::{self, DensityGrid, InversionMethod, PhiExpression, StieltjesOptions};

/// A candidate pair (c, ν): c > 0 and ν symmetric, nonnegative, atomic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiPair {
    pub c: f64,
    pub nu: SignedMeasure,
}

impl PhiPair {
    /// Pair with ν = Σ p(δ_{−λ} + δ_λ) over the given (λ, p).
    pub fn symmetric(c: f64, half_atoms: &[(f64, f64)]) -> Result<Self> {
        let mut atoms = Vec::with_capacity(2 * half_atoms.len());
        for &(lam, p) in half_atoms {
            if !(lam > 0.0) {
                return Err(Error::Validity(format!("atom positions λ > 0 (got λ = {lam})")));
            }
            atoms.push((-lam, p));
            atoms.push((lam, p));
        }
        let pair = PhiPair {
            c,
            nu: SignedMeasure::from_atoms(atoms),
        };
        pair.validate()?;
        Ok(pair)
    }

    /// The corollary instance ν = p(δ_{−λ} + δ_λ), c = 4λ√p.
    pub fn corollary(p: f64, lambda: f64) -> Result<Self> {
        PhiPair::symmetric(4.0 * lambda * p.sqrt(), &[(lambda, p)])
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) {
            return Err(Error::Validity(format!("c > 0 (got c = {})", self.c)));
        }
        if !self.nu.densities.is_empty() {
            return Err(Error::Unsupported("ν with an absolutely continuous part".into()));
        }
        for &(x, w) in &self.nu.atoms {
            if x == 0.0 {
                return Err(Error::InvalidMeasure("ν has an atom at 0".into()));
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidMeasure(format!("ν must be nonnegative (weight {w} at {x})")));
            }
        }
        if !self.nu.is_symmetric() {
            return Err(Error::InvalidMeasure("ν must be symmetric".into()));
        }
        Ok(())
    }

    /// Atoms of ν on (0, ∞).
    pub fn half_atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nu.atoms.iter().copied().filter(|(x, _)| *x > 0.0)
    }

    /// Second moment m₂(ν).
    pub fn m2(&self) -> f64 {
        self.nu.atoms.iter().map(|(x, w)| w * x * x).sum()
    }

    /// (c₁ + c₂, ν₁ + ν₂).
    pub fn add(&self, other: &PhiPair) -> PhiPair {
        PhiPair {
            c: self.c + other.c,
            nu: self.nu.add(&other.nu),
        }
    }

    /// The common triplet (0, c/(πx²)dx − ν, 0).
    pub fn triplet(&self) -> Result<FreeTriplet> {
        let nu = self
            .nu
            .neg()
            .add(&SignedMeasure::from_density(self.c / PI, DensityKernel::CauchyLevyTail));
        FreeTriplet::new(0.0, nu, 0.0)
    }
}

/// h(p) = √(2p(4p + 1)) for p ≤ 1/4 and 2p + √p beyond.
pub fn h_threshold(p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::Validity(format!("p > 0 (got p = {p})")));
    }
    Ok(if p <= 0.25 {
        (2.0 * p * (4.0 * p + 1.0)).sqrt()
    } else {
        2.0 * p + p.sqrt()
    })
}

/// A(z) = 2∫₀^∞ x² cos zx ν(dx) + (−c + 2∫₀^∞ x sin zx ν(dx))².
pub fn polya_a(p: &PhiPair, z: f64) -> f64 {
    let mut cos_part = 0.0;
    let mut sin_part = 0.0;
    for (x, w) in p.half_atoms() {
        cos_part += w * x * x * (z * x).cos();
        sin_part += w * x * (z * x).sin();
    }
    let lin = -p.c + 2.0 * sin_part;
    2.0 * cos_part + lin * lin
}

/// Exponent −c|z| + 2∫₀^∞ (1 − cos zx) ν(dx).
fn star_exponent(p: &PhiPair, z: f64) -> f64 {
    let s: f64 = p.half_atoms().map(|(x, w)| w * (1.0 - (z * x).cos())).sum();
    -p.c * z.abs() + 2.0 * s
}

/// φ(z) = exp(−c|z| + 2∫₀^∞ (1 − cos zx) ν(dx)), the characteristic function
/// of μ*(c, ν) when the pair lies in Φ*.
pub fn mu_star_cf(p: &PhiPair, z: f64) -> f64 {
    star_exponent(p, z).exp()
}

/// R-transform of the free side: −ciz − 2∫₀^∞ x²z²/(1 − x²z²) ν(dx), Im z < 0.
pub fn mu_box_r(p: &PhiPair, z: Complex64) -> Result<Complex64> {
    if z.im >= 0.0 {
        return Err(Error::Domain(z));
    }
    let i = Complex64::new(0.0, 1.0);
    let mut r = -p.c * i * z;
    for (x, w) in p.half_atoms() {
        let q = x * x * z * z;
        let d = 1.0 - q;
        if d == Complex64::default() {
            return Err(Error::Pole(z));
        }
        r -= 2.0 * w * q / d;
    }
    Ok(r)
}

/// φ of μ^⊞(c, ν) as an expression: −ci − Σ [MP(λ, p) + MP(−λ, p)].
pub fn mu_box_phi(p: &PhiPair) -> PhiExpression {
    let mut terms = vec![PhiExpression::constant(Complex64::new(0.0, -p.c))];
    for (x, w) in p.half_atoms() {
        terms.push(PhiExpression::RationalMp { c: x, lambda: w }.negate());
        terms.push(PhiExpression::RationalMp { c: -x, lambda: w }.negate());
    }
    PhiExpression::sum(terms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Yes,
    No,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub status: Status,
    /// Certifying criterion, failing inequality, or why nothing applies.
    pub reason: String,
    /// Point z where a criterion or necessary condition fails.
    pub witness_z: Option<f64>,
}

impl Membership {
    fn yes(reason: impl Into<String>) -> Self {
        Membership {
            status: Status::Yes,
            reason: reason.into(),
            witness_z: None,
        }
    }

    fn no(reason: impl Into<String>, z: Option<f64>) -> Self {
        Membership {
            status: Status::No,
            reason: reason.into(),
            witness_z: z,
        }
    }

    fn unknown(reason: impl Into<String>, z: Option<f64>) -> Self {
        Membership {
            status: Status::Unknown,
            reason: reason.into(),
            witness_z: z,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub in_phi: Membership,
    pub in_phi_plus: Membership,
    pub in_phi_star: Membership,
    pub in_phi_boxplus: Membership,
}

/// Sampling used when A(z) ≥ 0 has to be certified numerically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub points_per_period: usize,
    /// Range (0, z_max] scanned for violations when ν has several atoms.
    pub z_max: f64,
    pub points: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            points_per_period: 20_000,
            z_max: 100.0,
            points: 200_000,
        }
    }
}

pub fn classify(p: &PhiPair) -> MembershipReport {
    classify_with(p, &ScanConfig::default())
}

pub fn classify_with(p: &PhiPair, scan: &ScanConfig) -> MembershipReport {
    if let Err(e) = p.validate() {
        let no = || Membership::no(format!("not in Φ: {e}"), None);
        return MembershipReport {
            in_phi: no(),
            in_phi_plus: no(),
            in_phi_star: no(),
            in_phi_boxplus: no(),
        };
    }
    let in_phi = Membership::yes("c > 0 and ν is a finite symmetric atomic Lévy measure, so ∫(x² ∨ |x|)dν < ∞");
    let in_phi_plus = match p.nu.atoms.first() {
        None => Membership::yes("ν = 0, the triplet is that of the Cauchy law C_c"),
        Some(&(x, w)) => Membership::no(
            format!("c/(πx²)dx − ν has the negative atom −{w}δ_{x}"),
            None,
        ),
    };
    MembershipReport {
        in_phi,
        in_phi_plus,
        in_phi_star: star_membership(p, scan),
        in_phi_boxplus: boxplus_membership(p),
    }
}

const BOUNDARY_SLACK: f64 = 1e-12;

fn boxplus_membership(p: &PhiPair) -> Membership {
    let bound = (8.0 * p.m2()).sqrt();
    // The corollary family sits exactly on the boundary; allow rounding.
    if p.c >= bound * (1.0 - BOUNDARY_SLACK) {
        Membership::yes(format!("c ≥ √(8m₂(ν)): {} ≥ {bound}", p.c))
    } else {
        Membership::unknown(format!("c < √(8m₂(ν)) = {bound}; no sufficient criterion applies"), None)
    }
}

fn star_membership(p: &PhiPair, scan: &ScanConfig) -> Membership {
    let half: Vec<(f64, f64)> = p.half_atoms().collect();
    if half.is_empty() {
        return Membership::yes("ν = 0: φ(z) = e^{−c|z|} is the Cauchy characteristic function");
    }
    if let [(lam, w)] = half[..] {
        let h = h_threshold(w).expect("positive weight");
        if p.c >= lam * h * (1.0 - BOUNDARY_SLACK) {
            return Membership::yes(format!("c ≥ λh(p): {} ≥ {}", p.c, lam * h));
        }
    }
    let s1: f64 = half.iter().map(|(x, w)| w * x).sum();
    let s2: f64 = half.iter().map(|(x, w)| w * x * x).sum();
    let lin = p.c - 2.0 * s1;
    if lin >= 0.0 && lin * lin >= 2.0 * s2 {
        return Membership::yes(format!(
            "A(z) ≥ (c − 2∫x dν₊)² − 2∫x² dν₊ = {} ≥ 0 for all z",
            lin * lin - 2.0 * s2
        ));
    }
    // A characteristic function never exceeds 1.
    let (zs, step) = scan_points(&half, scan);
    let over = zs.iter().copied().find(|&z| star_exponent(p, z) > 1e-12);
    if let Some(z) = over {
        return Membership::no(format!("φ(z) = {} > 1 is not a characteristic function", mu_star_cf(p, z)), Some(z));
    }
    let values = par::map(&zs, |&z| polya_a(p, z));
    let (imin, amin) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    if amin < 0.0 {
        return Membership::unknown(
            format!("A(z) = {amin:e} < 0: the Pólya convexity criterion fails here"),
            Some(zs[imin]),
        );
    }
    if let (Some(step), [(lam, w)]) = (step, &half[..]) {
        // |A'| ≤ 2pλ³ + 2(c + 2pλ)·2pλ², so the grid minimum minus L·step/2
        // bounds A over a whole period.
        let l = 2.0 * w * lam.powi(3) + 4.0 * (p.c + 2.0 * w * lam) * w * lam * lam;
        let lower = amin - l * step / 2.0;
        if lower >= 0.0 {
            return Membership::yes(format!(
                "A(z) ≥ {lower:e} over one period by a Lipschitz-certified scan"
            ));
        }
    }
    Membership::unknown(
        format!("A(z) ≥ {amin:e} on the scanned grid, but not certified"),
        None,
    )
}

/// Scan grid: one period for a single atom pair, else (0, z_max].
fn scan_points(half: &[(f64, f64)], scan: &ScanConfig) -> (Vec<f64>, Option<f64>) {
    if let [(lam, _)] = half {
        let period = 2.0 * PI / lam;
        let n = scan.points_per_period;
        let step = period / n as f64;
        ((0..=n).map(|k| k as f64 * step).collect(), Some(step))
    } else {
        let step = scan.z_max / scan.points as f64;
        ((1..=scan.points).map(|k| k as f64 * step).collect(), None)
    }
}

fn require_yes(m: &Membership, class: &str) -> Result<()> {
    if m.status == Status::Yes {
        Ok(())
    } else {
        Err(Error::NotCertified(format!("{class} membership: {}", m.reason)))
    }
}

/// Filon–Simpson rule for ∫_0^{2nh} f(z) cos(tz) dz from samples f_j = f(jh).
pub fn filon_cos(fs: &[f64], h: f64, t: f64) -> f64 {
    assert!(fs.len() >= 3 && fs.len() % 2 == 1, "need an odd number of samples");
    let th = t * h;
    let (alpha, beta, gamma) = if th.abs() < 0.05 {
        let t2 = th * th;
        (
            th * t2 * (2.0 / 45.0 - t2 * (2.0 / 315.0 - t2 * 2.0 / 4725.0)),
            2.0 / 3.0 + t2 * (2.0 / 15.0 - t2 * (4.0 / 105.0 - t2 * 2.0 / 567.0)),
            4.0 / 3.0 - t2 * (2.0 / 15.0 - t2 * (1.0 / 210.0 - t2 / 11340.0)),
        )
    } else {
        let (s, c) = th.sin_cos();
        let t3 = th * th * th;
        (
            (th * th + th * s * c - 2.0 * s * s) / t3,
            2.0 * (th * (1.0 + c * c) - 2.0 * s * c) / t3,
            4.0 * (s - th * c) / t3,
        )
    };
    let n = fs.len() - 1;
    let b = n as f64 * h;
    let mut even = 0.0;
    let mut odd = 0.0;
    for (j, f) in fs.iter().enumerate() {
        let v = f * (t * j as f64 * h).cos();
        if j % 2 == 0 {
            even += v;
        } else {
            odd += v;
        }
    }
    even -= 0.5 * (fs[0] + fs[n] * (t * b).cos());
    h * (alpha * (fs[n] * (t * b).sin()) + beta * even + gamma * odd)
}

/// Fourier inversion settings for μ*(c, ν).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierConfig {
    pub step: f64,
    /// φ is cut where its envelope e^{−c z + 4∫₀^∞ dν} drops below this.
    pub envelope_tol: f64,
}

impl Default for FourierConfig {
    fn default() -> Self {
        FourierConfig {
            step: 2e-3,
            envelope_tol: 1e-14,
        }
    }
}

/// Density of μ*(c, ν) by f(x) = (1/π)∫₀^∞ φ(z) cos(zx) dz.
pub fn mu_star_density(p: &PhiPair, xs: &[f64]) -> Result<DensityGrid> {
    mu_star_density_with(p, xs, &FourierConfig::default())
}

pub fn mu_star_density_with(p: &PhiPair, xs: &[f64], cfg: &FourierConfig) -> Result<DensityGrid> {
    require_yes(&classify(p).in_phi_star, "Φ*")?;
    let mass: f64 = p.half_atoms().map(|(_, w)| w).sum();
    let z_max = (4.0 * mass - cfg.envelope_tol.ln()) / p.c;
    let mut n = (z_max / cfg.step).ceil() as usize;
    n += n % 2;
    let h = z_max / n as f64;
    let samples: Vec<f64> = (0..=n).map(|j| mu_star_cf(p, j as f64 * h)).collect();
    let fs = par::map(xs, |&x| filon_cos(&samples, h, x) / PI);
    // Tail beyond z_max is bounded by the envelope.
    let tail = cfg.envelope_tol / (PI * p.c);
    Ok(DensityGrid {
        xs: xs.to_vec(),
        fs,
        y_levels: Vec::new(),
        est_error: vec![tail; xs.len()],
        method: InversionMethod::Fourier,
    })
}

/// Second differences of φ on a grid of [0, z_max]; all ≥ −tol means convex.
pub fn star_cf_is_convex(p: &PhiPair, z_max: f64, points: usize, tol: f64) -> bool {
    let h = z_max / points as f64;
    let vals: Vec<f64> = (0..=points).map(|k| mu_star_cf(p, k as f64 * h)).collect();
    vals.windows(3).all(|w| w[0] - 2.0 * w[1] + w[2] >= -tol)
}

/// μ^⊞(c, ν) as an implicit model.
pub fn mu_box_model(p: &PhiPair) -> Result<DistributionModel> {
    require_yes(&classify(p).in_phi_boxplus, "Φ^⊞")?;
    Ok(DistributionModel::ImplicitPhi { phi: mu_box_phi(p) })
}

/// Density of μ^⊞(c, ν) by inverting K and Stieltjes inversion.
pub fn mu_box_density(p: &PhiPair, xs: &[f64]) -> Result<DensityGrid> {
    transforms::stieltjes_density(&mu_box_model(p)?, xs, &StieltjesOptions::default())
}

/// A pair with both Φ* and Φ^⊞ established.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifiedPair {
    pub pair: PhiPair,
    pub star: String,
    pub boxplus: String,
}

impl CertifiedPair {
    pub fn new(pair: PhiPair) -> Result<Self> {
        let r = classify(&pair);
        require_yes(&r.in_phi_star, "Φ*")?;
        require_yes(&r.in_phi_boxplus, "Φ^⊞")?;
        Ok(CertifiedPair {
            pair,
            star: r.in_phi_star.reason,
            boxplus: r.in_phi_boxplus.reason,
        })
    }

    /// Sum of two certified pairs. The laws convolve (classically and freely)
    /// to the law of the summed pair, so both memberships carry over.
    pub fn compose(&self, other: &CertifiedPair) -> CertifiedPair {
        CertifiedPair {
            pair: self.pair.add(&other.pair),
            star: "μ*(c₁,ν₁) ∗ μ*(c₂,ν₂) realises the summed triplet".into(),
            boxplus: "μ^⊞(c₁,ν₁) ⊞ μ^⊞(c₂,ν₂) realises the summed triplet".into(),
        }
    }
}

/// Classical log-characteristic function of the triplet read as a classical
/// Lévy–Khintchine triplet: −az²/2 + iγz + ∫ (e^{izx} − 1 − izx·1_{[−1,1]}) ν(dx).
pub fn classical_log_cf(t: &FreeTriplet, z: f64) -> Result<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    let mut acc = Complex64::new(-0.5 * t.a * z * z, t.gamma * z);
    let kernel = |x: f64| {
        let comp = if x.abs() <= 1.0 { i * z * x } else { Complex64::default() };
        (i * z * x).exp() - 1.0 - comp
    };
    let nu = t.nu.measure();
    for &(x, w) in &nu.atoms {
        acc += kernel(x) * w;
    }
    for term in &nu.densities {
        let whole_line = term.support.lo.is_none() && term.support.hi.is_none();
        if matches!(term.kernel, DensityKernel::CauchyLevyTail) && whole_line {
            acc += term.coefficient * (-PI * z.abs());
            continue;
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
                &QuadConfig::default(),
            )
            .map_err(|o| Error::NonIntegrable(format!("{o:?}")))?;
        acc += est.value;
    }
    Ok(acc)
}

/// Images of μ ∗ μ*(c, ν) and Λ(μ) ⊞ μ^⊞(c, ν) under the extended map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedBp {
    /// Triplet of μ, read classically on one side and freely on the other.
    pub mu: FreeTriplet,
    pub pair: CertifiedPair,
}

impl ExtendedBp {
    /// log of the characteristic function of μ ∗ μ*(c, ν).
    pub fn classical_log_cf(&self, z: f64) -> Result<Complex64> {
        Ok(classical_log_cf(&self.mu, z)? + star_exponent(&self.pair.pair, z))
    }

    pub fn classical_cf(&self, z: f64) -> Result<Complex64> {
        Ok(self.classical_log_cf(z)?.exp())
    }

    /// R-transform of Λ(μ) ⊞ μ^⊞(c, ν), Im z < 0.
    pub fn free_r(&self, z: Complex64) -> Result<Complex64> {
        Ok(transforms::r_from_triplet(&self.mu, z)? + mu_box_r(&self.pair.pair, z)?)
    }

    /// φ of the free side.
    pub fn free_phi(&self) -> PhiExpression {
        PhiExpression::TripletR {
            triplet: self.mu.clone(),
        }
        .plus(mu_box_phi(&self.pair.pair))
    }

    /// Triplet common to both sides.
    pub fn triplet(&self) -> Result<FreeTriplet> {
        self.mu.add(&self.pair.pair.triplet()?)
    }

    pub fn compose(&self, other: &ExtendedBp) -> Result<ExtendedBp> {
        Ok(ExtendedBp {
            mu: self.mu.add(&other.mu)?,
            pair: self.pair.compose(&other.pair),
        })
    }
}

/// Λ̃(μ ∗ μ*(c, ν)) := Λ(μ) ⊞ μ^⊞(c, ν) for an ordinary triplet of μ.
pub fn extended_bp(mu: &FreeTriplet, pair: &CertifiedPair) -> Result<ExtendedBp> {
    if mu.a < 0.0 {
        return Err(Error::Validity(format!("Gaussian part a ≥ 0 (got a = {})", mu.a)));
    }
    let (_, neg) = crate::measures::hahn_jordan(mu.nu.measure());
    if !neg.is_zero() {
        return Err(Error::Validity("Lévy measure ν ≥ 0".into()));
    }
    Ok(ExtendedBp {
        mu: mu.clone(),
        pair: pair.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn h_values() {
        let below = (2.0f64 * 0.25 * 2.0).sqrt();
        let above: f64 = 0.5 + 0.5;
        assert!((below - 1.0).abs() < 1e-15 && (above - 1.0).abs() < 1e-15);
        assert!((h_threshold(0.25).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(h_threshold(1.0).unwrap(), 3.0);
        assert!((h_threshold(0.125).unwrap() - 0.375f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn classify_examples() {
        let r = classify(&PhiPair::symmetric(4.0, &[(1.0, 1.0)]).unwrap());
        assert_eq!(r.in_phi.status, Status::Yes);
        assert_eq!(r.in_phi_plus.status, Status::No);
        assert_eq!(r.in_phi_star.status, Status::Yes);
        assert_eq!(r.in_phi_boxplus.status, Status::Yes);
        let r = classify(&PhiPair::symmetric(2.5, &[]).unwrap());
        assert_eq!(r.in_phi_plus.status, Status::Yes);
        assert_eq!(r.in_phi_star.status, Status::Yes);
        let r = classify(&PhiPair::symmetric(8.0, &[(1.0, 4.0)]).unwrap());
        assert_eq!(r.in_phi_boxplus.status, Status::Yes);
        assert_ne!(r.in_phi_star.status, Status::No);
        assert!(!r.in_phi_star.reason.contains("λh(p)"));
    }

    #[test]
    fn cf_above_one_rules_out_star() {
        let r = classify(&PhiPair::symmetric(0.1, &[(1.0, 1.0)]).unwrap());
        assert_eq!(r.in_phi_star.status, Status::No);
        assert!(r.in_phi_star.witness_z.is_some());
    }

    #[test]
    fn polya_reduces_to_atomic_form() {
        let p = PhiPair::symmetric(4.0, &[(1.5, 0.7)]).unwrap();
        for z in [0.1f64, 1.0, 7.3] {
            let want = 2.0 * 0.7 * 2.25 * (1.5 * z).cos() + (-4.0 + 2.0 * 0.7 * 1.5 * (1.5 * z).sin()).powi(2);
            assert!((polya_a(&p, z) - want).abs() < 1e-13);
        }
        assert!((polya_a(&p, 1e-9) - (2.0 * 0.7 * 2.25 + 16.0)).abs() < 1e-7);
    }

    #[test]
    fn cf_values() {
        let p = PhiPair::symmetric(4.0, &[(1.0, 1.0)]).unwrap();
        assert_eq!(mu_star_cf(&p, 0.0), 1.0);
        assert!((mu_star_cf(&p, PI) - (4.0 - 4.0 * PI).exp()).abs() < 1e-15);
        assert_eq!(mu_star_cf(&p, -2.2), mu_star_cf(&p, 2.2));
    }

    #[test]
    fn second_derivative_identity() {
        let p = PhiPair::symmetric(4.0, &[(1.0, 1.0)]).unwrap();
        let d2 = |z: f64, h: f64| (mu_star_cf(&p, z + h) - 2.0 * mu_star_cf(&p, z) + mu_star_cf(&p, z - h)) / (h * h);
        for k in 1..=20 {
            let z = 0.37 * k as f64;
            let h = 1e-2;
            let fd = (4.0 * d2(z, h / 2.0) - d2(z, h)) / 3.0;
            let exact = polya_a(&p, z) * mu_star_cf(&p, z);
            let scale = (polya_a(&p, z).abs() + p.c * p.c) * mu_star_cf(&p, z);
            assert!((fd - exact).abs() / scale < 1e-6, "z = {z}");
        }
    }

    #[test]
    fn box_r_against_triplet() {
        assert_eq!(mu_box_r(&PhiPair::symmetric(2.0, &[]).unwrap(), c(0.3, -0.4)).unwrap(), c(0.0, -2.0) * c(0.3, -0.4));
        let p = PhiPair::symmetric(4.0, &[(1.0, 1.0), (0.5, 0.3)]).unwrap();
        let t = p.triplet().unwrap();
        for k in 0..20 {
            let z = c(-2.0 + 0.2 * k as f64, -0.1 - 0.05 * k as f64);
            let a = mu_box_r(&p, z).unwrap();
            let b = transforms::r_from_triplet(&t, z).unwrap();
            assert!((a - b).norm() < 1e-10, "{z}: {a} vs {b}");
            let via_phi = z * mu_box_phi(&p).eval(z.inv()).unwrap();
            assert!((a - via_phi).norm() < 1e-12);
        }
    }

    #[test]
    fn filon_against_closed_form() {
        let h = 0.01;
        let fs: Vec<f64> = (0..=4000).map(|j| (-(j as f64) * h).exp()).collect();
        for t in [0.0f64, 0.5, 3.0, 20.0] {
            let want = 1.0 / (1.0 + t * t) * (1.0 - (-40.0f64).exp() * ((40.0 * t).cos() - t * (40.0 * t).sin()));
            assert!((filon_cos(&fs, h, t) - want).abs() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn star_density_of_pure_cauchy() {
        let p = PhiPair::symmetric(1.5, &[]).unwrap();
        let xs: Vec<f64> = (0..=200).map(|k| -10.0 + 0.1 * k as f64).collect();
        let g = mu_star_density(&p, &xs).unwrap();
        for (x, f) in xs.iter().zip(&g.fs) {
            let want = 1.5 / (PI * (1.5 * 1.5 + x * x));
            assert!((f - want).abs() < 1e-6);
        }
    }

    #[test]
    fn star_density_requires_certificate() {
        let p = PhiPair::symmetric(0.1, &[(1.0, 1.0)]).unwrap();
        assert!(matches!(mu_star_density(&p, &[0.0]), Err(Error::NotCertified(_))));
    }

    #[test]
    fn classical_log_cf_of_cauchy_tail() {
        let t = PhiPair::symmetric(2.0, &[]).unwrap().triplet().unwrap();
        assert!((classical_log_cf(&t, 1.3).unwrap() - c(-2.6, 0.0)).norm() < 1e-14);
        let split = FreeTriplet::new(
            0.0,
            SignedMeasure::new(
                Vec::new(),
                vec![
                    crate::measures::DensityTerm::new(2.0 / PI, DensityKernel::CauchyLevyTail).on(Interval::to(0.0)),
                    crate::measures::DensityTerm::new(2.0 / PI, DensityKernel::CauchyLevyTail).on(Interval::from(0.0)),
                ],
            ),
            0.0,
        )
        .unwrap();
        let v = classical_log_cf(&split, 1.3).unwrap();
        // Generic quadrature on an oscillatory 1/x² tail.
        assert!((v - c(-2.6, 0.0)).norm() < 1e-6, "{v}");
    }
}
