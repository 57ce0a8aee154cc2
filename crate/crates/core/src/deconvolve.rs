//! Free deconvolutions built from Cauchy, semicircle and Marchenko–Pastur
//! laws, the free Meixner quasi-Lévy density, the Cramér-type pair μ±(t),
//! partial-fraction weights for sums of MP laws, and a triplet classifier.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::DistributionModel;
use crate::measures::{hahn_jordan, DensityKernel, FreeCharPair, FreeTriplet, SignedMeasure};
use crate::quad::{self, QuadConfig};
use crate::scalar::Field;
use crate::transforms::PhiExpression;

fn validity(ok: bool, msg: String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Validity(msg))
    }
}

/// C_a ⊟ MP(c, λ), with φ(z) = −ai − λcz/(z − c). Exists iff λ ≤ (a/2c)².
pub fn rho_acl(a: f64, c: f64, lambda: f64) -> Result<DistributionModel> {
    let m = DistributionModel::RhoAcl { a, c, lambda };
    m.validate()?;
    Ok(m)
}

/// C_a ⊟ S(0, σ²), with φ(z) = −ai − σ²/z. Exists iff 2σ ≤ a.
pub fn gamma_as(a: f64, sigma2: f64) -> Result<DistributionModel> {
    let m = DistributionModel::GammaAs { a, sigma2 };
    m.validate()?;
    Ok(m)
}

/// Free characteristic triplet of ρ_{a,c,λ}:
/// (0, (a/π)x⁻²dx − λδ_c, −λc·1{|c| ≤ 1}).
pub fn rho_triplet(a: f64, c: f64, lambda: f64) -> Result<FreeTriplet> {
    let nu = SignedMeasure::new(
        vec![(c, -lambda)],
        vec![crate::measures::DensityTerm::new(a / PI, DensityKernel::CauchyLevyTail)],
    );
    let gamma = if c.abs() <= 1.0 { -lambda * c } else { 0.0 };
    FreeTriplet::new(0.0, nu, gamma)
}

/// Free characteristic pair of ρ_{a,c,λ}:
/// b = −λc/(1 + c²), τ = (a/π)(1 + x²)⁻¹dx − λc²/(1 + c²)·δ_c.
pub fn rho_pair(a: f64, c: f64, lambda: f64) -> Result<FreeCharPair> {
    let tau = SignedMeasure::new(
        vec![(c, -lambda * c * c / (1.0 + c * c))],
        vec![crate::measures::DensityTerm::new(
            a / PI,
            DensityKernel::PoissonKernel { scale: 1.0 },
        )],
    );
    FreeCharPair::new(-lambda * c / (1.0 + c * c), tau)
}

/// Free characteristic triplet of γ_{a,σ²}: (−σ², (a/π)x⁻²dx, 0).
pub fn gamma_triplet(a: f64, sigma2: f64) -> Result<FreeTriplet> {
    FreeTriplet::new(
        -sigma2,
        SignedMeasure::from_density(a / PI, DensityKernel::CauchyLevyTail),
        0.0,
    )
}

/// Point c + iy with 0 < y < c²λ/a where Im φ_ρ > 0, so ρ_{a,c,λ} is not FID.
pub fn rho_non_fid_witness(a: f64, c: f64, lambda: f64) -> Result<(Complex64, Complex64)> {
    let y = c * c * lambda / (2.0 * a);
    let z = Complex64::new(c, y);
    let phi = rho_acl(a, c, lambda)?.phi()?;
    Ok((z, phi.eval(z)?))
}

/// max over the sample points of |R_{γ_{a,σ²}}(z) − a·R_{γ_{1,σ²/a}}(z)|,
/// the R-transform form of γ_{a,σ²} = γ_{1,σ²/a}^{⊞a}.
pub fn gamma_semigroup_error(a: f64, sigma2: f64, zs: &[Complex64]) -> Result<f64> {
    validity(a >= 1.0, format!("a ≥ 1 (got a = {a})"))?;
    let whole = gamma_as(a, sigma2)?.phi()?;
    let unit = gamma_as(1.0, sigma2 / a)?.phi()?;
    let mut worst: f64 = 0.0;
    for &z in zs {
        let lhs = whole.r_eval(z)?;
        let rhs = unit.r_eval(z)? * a;
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// Explicit densities of the two worked deconvolutions.
pub mod closed_forms {
    use super::*;

    /// Density of ρ_{1,1,1/4}.
    pub fn rho_1_quarter(x: f64) -> f64 {
        let d = 4.0 * x - 3.0;
        let r = (16.0 * x * x - 24.0 * x + 73.0).sqrt();
        let pm = (r - d.abs()).sqrt();
        let pp = (r + d.abs()).sqrt();
        let num = 5.0 * SQRT_2 + d.abs().sqrt() * (x * pm - d.signum() * pp);
        num / (8.0 * SQRT_2 * PI * (x * x + 1.0))
    }

    /// Density of γ_{1,1/4}.
    pub fn gamma_1_quarter(x: f64) -> f64 {
        (SQRT_2 / PI) * (SQRT_2 - (x.abs() * (x * x + 4.0).sqrt() - x * x).sqrt())
    }
}

/// Density of the free quasi-Lévy measure of ρ(FM_{0,b}) = C_{2√2} ⊟ FM_{0,b}.
pub fn fm_quasi_levy_density(b: f64, x: f64) -> Result<f64> {
    validity(b > 0.0, format!("b > 0 (got b = {b})"))?;
    validity(x != 0.0, "x ≠ 0".into())?;
    Ok(crate::measures::fm_quasi_levy_value(b, x))
}

/// Positive zero of the FM quasi-Lévy density, present for 0 < b < 1/8.
pub fn fm_zero_crossing(b: f64) -> Option<f64> {
    let s = 4.0 * b - 32.0 * b * b;
    (b > 0.0 && s > 0.0).then(|| s.sqrt())
}

/// Mass of the negative part of ν_b on {cutoff ≤ |x|}. Grows like 1/cutoff
/// when b < 1/8.
pub fn fm_negative_mass(b: f64, cutoff: f64) -> Result<f64> {
    validity(b > 0.0, format!("b > 0 (got b = {b})"))?;
    validity(cutoff > 0.0, format!("cutoff > 0 (got {cutoff})"))?;
    let Some(x0) = fm_zero_crossing(b) else {
        return Ok(0.0);
    };
    if cutoff >= x0 {
        return Ok(0.0);
    }
    // x = 1/t turns ∫ f(x) dx into ∫ f(1/t)/t² dt with a bounded integrand.
    let g = |t: f64| {
        let x = 1.0 / t;
        (-crate::measures::fm_quasi_levy_value(b, x)).max(0.0) / (t * t)
    };
    let est = quad::integrate(g, 1.0 / x0, 1.0 / cutoff, &QuadConfig::default());
    if !est.converged {
        return Err(Error::NoConvergence {
            iterations: est.evaluations,
            residual: est.error,
            iterates: Vec::new(),
        });
    }
    Ok(2.0 * est.value)
}

/// Sign of the tail sum in R_t^± = z² ± tz⁴ Σ tⁿz²ⁿ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RtSign {
    Plus,
    Minus,
}

/// Coefficients of R_t^±, index n holding the coefficient of zⁿ, up to `order`.
pub fn r_t_series<T: Field>(t: &T, sign: RtSign, order: usize) -> Vec<T> {
    let mut out = vec![T::zero(); order + 1];
    if order >= 2 {
        out[2] = T::one();
    }
    let mut power = t.clone();
    let mut k = 4;
    while k <= order {
        out[k] = match sign {
            RtSign::Plus => power.clone(),
            RtSign::Minus => -power.clone(),
        };
        power = power * t.clone();
        k += 2;
    }
    out
}

/// R-series of MP(c, λ): λcⁿ for n ≥ 1.
pub fn mp_r_series<T: Field>(c: &T, lambda: &T, order: usize) -> Vec<T> {
    let mut out = vec![T::zero(); order + 1];
    let mut power = T::one();
    for slot in out.iter_mut().skip(1) {
        power = power * c.clone();
        *slot = lambda.clone() * power.clone();
    }
    out
}

/// Threshold below which μ₋(t) is treated as a probability law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RtConfig {
    pub t0: f64,
}

impl Default for RtConfig {
    fn default() -> Self {
        RtConfig { t0: 0.05 }
    }
}

/// μ₊(t) = MP(√t, 1/(2t)) ⊞ MP(−√t, 1/(2t)), whose R-transform is R_t^+.
pub fn mu_plus(t: f64) -> Result<DistributionModel> {
    validity(t > 0.0, format!("t > 0 (got t = {t})"))?;
    let s = t.sqrt();
    let lam = 1.0 / (2.0 * t);
    Ok(DistributionModel::FreeConv {
        parts: vec![DistributionModel::mp(s, lam)?, DistributionModel::mp(-s, lam)?],
    })
}

/// φ of μ₋(t): 2/z − φ_{μ₊(t)}, so that R⁺ + R⁻ = 2z².
pub fn mu_minus_phi(t: f64) -> Result<PhiExpression> {
    Ok(PhiExpression::Pole { weight: 2.0 }.minus(mu_plus(t)?.phi()?))
}

/// μ₋(t) as an implicit model; only offered for t ≤ t₀.
pub fn mu_minus(t: f64, cfg: &RtConfig) -> Result<DistributionModel> {
    validity(t > 0.0, format!("t > 0 (got t = {t})"))?;
    validity(t <= cfg.t0, format!("t ≤ t₀: t = {t} exceeds t₀ = {}", cfg.t0))?;
    Ok(DistributionModel::ImplicitPhi { phi: mu_minus_phi(t)? })
}

/// Free characteristic triplet of S(0, x³u²) ⊟ MP-type mixtures:
/// R(z) = x³u²z² + (1 − x)³uz/(1 − uz).
pub fn smp_triplet(u: f64, x: f64) -> Result<FreeTriplet> {
    validity(u != 0.0, "u ≠ 0".into())?;
    let w = (1.0 - x).powi(3);
    let gamma = if u.abs() <= 1.0 { w * u } else { 0.0 };
    FreeTriplet::new(u * u * x.powi(3), SignedMeasure::dirac(u, w), gamma)
}

/// a(x) = (u − x)³/(u²(u − v)), b(x) = (v − x)³/(v²(v − u)).
pub fn two_mp_weights<T: Field>(u: &T, v: &T, x: &T) -> Result<(T, T)> {
    validity(!u.is_zero() && !v.is_zero(), "u, v ≠ 0".into())?;
    validity((v.clone() - u.clone()).is_positive(), "u < v".into())?;
    let cube = |y: T| y.clone() * y.clone() * y;
    let a = cube(u.clone() - x.clone()) / (u.clone() * u.clone() * (u.clone() - v.clone()));
    let b = cube(v.clone() - x.clone()) / (v.clone() * v.clone() * (v.clone() - u.clone()));
    Ok((a, b))
}

/// (u²v² − 3uvx² + (u + v)x³)/(u²v²), the closed form of a(x) + b(x).
pub fn two_mp_weight_sum<T: Field>(u: &T, v: &T, x: &T) -> T {
    let uv = u.clone() * v.clone();
    let x2 = x.clone() * x.clone();
    let num = uv.clone() * uv.clone() - T::from_i64(3) * uv.clone() * x2.clone()
        + (u.clone() + v.clone()) * x2 * x.clone();
    num / (uv.clone() * uv)
}

/// Free triplet (0, a(x)δ_u + b(x)δ_v, γ) of the two-MP deconvolution.
pub fn two_mp_triplet(u: f64, v: f64, x: f64) -> Result<FreeTriplet> {
    let (a, b) = two_mp_weights(&u, &v, &x)?;
    let ind = |y: f64| if y.abs() <= 1.0 { y } else { 0.0 };
    FreeTriplet::new(
        0.0,
        SignedMeasure::from_atoms(vec![(u, a), (v, b)]),
        a * ind(u) + b * ind(v),
    )
}

/// t_k = u_k^{n−1}/∏_{i≠k}(u_k − u_i); these sum to 1.
pub fn multi_mp_weights<T: Field>(us: &[T]) -> Result<Vec<T>> {
    validity(us.len() >= 2, format!("n ≥ 2 (got {})", us.len()))?;
    for (k, u) in us.iter().enumerate() {
        if u.is_zero() {
            return Err(Error::Validity("nodes must be nonzero".into()));
        }
        if us[..k].contains(u) {
            return Err(Error::DuplicateNode(format!("{u:?}")));
        }
    }
    let n = us.len() as u32;
    Ok(us
        .iter()
        .enumerate()
        .map(|(k, uk)| {
            let denom = us
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != k)
                .fold(T::one(), |acc, (_, ui)| acc * (uk.clone() - ui.clone()));
            uk.powi(n - 1) / denom
        })
        .collect())
}

/// Structural flags of a free characteristic triplet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripletReport {
    /// a < 0, so the triplet is not a classical one.
    pub gaussian_negative: bool,
    /// ν⁻ ≠ 0 and ν⁺ is zero or a single atom: no QID law has this triplet.
    pub qid_excluded: bool,
    /// a ≥ 0 and ν ≥ 0: an ordinary free Lévy triplet.
    pub plain_fid: bool,
    pub negative_part_zero: bool,
    /// Number of support points of ν⁺ when it is purely atomic.
    pub positive_support_points: Option<usize>,
}

pub fn classify_triplet(t: &FreeTriplet) -> TripletReport {
    let (pos, neg) = hahn_jordan(t.nu.measure());
    let negative_part_zero = neg.is_zero();
    let positive_support_points = pos.densities.is_empty().then_some(pos.atoms.len());
    let single_or_none = matches!(positive_support_points, Some(0) | Some(1));
    TripletReport {
        gaussian_negative: t.a < 0.0,
        qid_excluded: !negative_part_zero && single_or_none,
        plain_fid: t.a >= 0.0 && negative_part_zero,
        negative_part_zero,
        positive_support_points,
    }
}

/// μ_minuend ⊟ μ_subtrahend, represented by φ_minuend − φ_subtrahend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeconvolutionSpec {
    pub minuend: DistributionModel,
    pub subtrahend: DistributionModel,
    pub phi: PhiExpression,
}

impl DeconvolutionSpec {
    pub fn new(minuend: DistributionModel, subtrahend: DistributionModel) -> Result<Self> {
        let phi = minuend.phi()?.minus(subtrahend.phi()?);
        Ok(DeconvolutionSpec {
            minuend,
            subtrahend,
            phi,
        })
    }

    /// φ_subtrahend + φ collects to the same canonical form as φ_minuend.
    pub fn identity_holds(&self, tol: f64) -> Result<bool> {
        let lhs = self.subtrahend.phi()?.plus(self.phi.clone()).canonical();
        Ok(lhs.approx_eq(&self.minuend.phi()?.canonical(), tol))
    }

    /// max |φ_subtrahend(z) + φ(z) − φ_minuend(z)| over the sample points.
    pub fn reconstruction_error(&self, zs: &[Complex64]) -> Result<f64> {
        let sub = self.subtrahend.phi()?;
        let min = self.minuend.phi()?;
        let mut worst: f64 = 0.0;
        for &z in zs {
            worst = worst.max((sub.eval(z)? + self.phi.eval(z)? - min.eval(z)?).norm());
        }
        Ok(worst)
    }

    pub fn model(&self) -> DistributionModel {
        DistributionModel::ImplicitPhi { phi: self.phi.clone() }
    }
}

/// The smp law as a deconvolution: MP(u, (1 − x)³) ⊟ S(0, −x³u²) for x < 0 and
/// S(0, x³u²) ⊟ MP(u, (x − 1)³) for x > 1.
pub fn smp_deconvolution(u: f64, x: f64) -> Result<DeconvolutionSpec> {
    if x < 0.0 {
        DeconvolutionSpec::new(
            DistributionModel::mp(u, (1.0 - x).powi(3))?,
            DistributionModel::semicircle(0.0, -x.powi(3) * u * u)?,
        )
    } else if x > 1.0 {
        DeconvolutionSpec::new(
            DistributionModel::semicircle(0.0, x.powi(3) * u * u)?,
            DistributionModel::mp(u, (x - 1.0).powi(3))?,
        )
    } else {
        Err(Error::Validity(format!("x < 0 or x > 1 (got x = {x}); otherwise the law is FID")))
    }
}

/// Named free characteristic pairs used by sweeps and property tests.
pub fn pair_library() -> Result<Vec<(String, FreeCharPair)>> {
    use crate::measures::triplet_to_pair;
    let mut out = vec![
        (
            "semicircle".to_string(),
            FreeCharPair::new(0.0, SignedMeasure::dirac(0.0, 1.0))?,
        ),
        (
            "mp(0.6)".to_string(),
            FreeCharPair::new(0.3, SignedMeasure::dirac(1.0, 0.3))?,
        ),
        (
            "mp(-2,0.5)".to_string(),
            FreeCharPair::new(-0.2, SignedMeasure::dirac(-2.0, 0.4))?,
        ),
        (
            "two-atom".to_string(),
            FreeCharPair::new(0.1, SignedMeasure::from_atoms(vec![(-1.0, 0.5), (0.5, 0.25)]))?,
        ),
    ];
    out.push(("rho(1,1,1/4)".to_string(), rho_pair(1.0, 1.0, 0.25)?));
    out.push(("gamma(1,1/4)".to_string(), triplet_to_pair(&gamma_triplet(1.0, 0.25)?)?));
    out.push(("smp(1,2)".to_string(), triplet_to_pair(&smp_triplet(1.0, 2.0)?)?));
    out.push(("two-mp(1,2,3)".to_string(), triplet_to_pair(&two_mp_triplet(1.0, 2.0, 3.0)?)?));
    Ok(out)
}
