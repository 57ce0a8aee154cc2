//! Closed-form laws, their Voiculescu transforms and densities.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{DensityKernel, FreeTriplet, SignedMeasure};
use crate::transforms::{self, arc_sqrt, branch_sqrt, PhiExpression};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A probability law given either in closed form or implicitly through φ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistributionModel {
    Cauchy { a: f64 },
    Semicircle { m: f64, sigma2: f64 },
    /// Marchenko–Pastur law with jump size c and rate λ: D_c(MP(λ)).
    Mp { c: f64, lambda: f64 },
    FreeMeixner { a: f64, b: f64 },
    PointMass { x: f64 },
    TwoPoint { p: f64, x1: f64, x2: f64 },
    Dilation { c: f64, inner: Box<DistributionModel> },
    FreeConv { parts: Vec<DistributionModel> },
    ImplicitPhi { phi: PhiExpression },
    /// φ(z) = −ai − λcz/(z − c): the free deconvolution C_a ⊟ MP(c, λ).
    RhoAcl { a: f64, c: f64, lambda: f64 },
    /// φ(z) = −ai − σ²/z: the free deconvolution C_a ⊟ S(0, σ²).
    GammaAs { a: f64, sigma2: f64 },
}

fn require(ok: bool, what: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Validity(what.into()))
    }
}

impl DistributionModel {
    pub fn cauchy(a: f64) -> Result<Self> {
        let m = DistributionModel::Cauchy { a };
        m.validate()?;
        Ok(m)
    }

    pub fn semicircle(m: f64, sigma2: f64) -> Result<Self> {
        let d = DistributionModel::Semicircle { m, sigma2 };
        d.validate()?;
        Ok(d)
    }

    pub fn mp(c: f64, lambda: f64) -> Result<Self> {
        let d = DistributionModel::Mp { c, lambda };
        d.validate()?;
        Ok(d)
    }

    pub fn free_meixner(a: f64, b: f64) -> Result<Self> {
        let d = DistributionModel::FreeMeixner { a, b };
        d.validate()?;
        Ok(d)
    }

    pub fn dilation(c: f64, inner: DistributionModel) -> Result<Self> {
        let d = DistributionModel::Dilation {
            c,
            inner: Box::new(inner),
        };
        d.validate()?;
        Ok(d)
    }

    /// Check parameter ranges.
    pub fn validate(&self) -> Result<()> {
        match self {
            DistributionModel::Cauchy { a } => require(*a > 0.0, format!("a > 0 (got a = {a})")),
            DistributionModel::Semicircle { sigma2, .. } => {
                require(*sigma2 > 0.0, format!("σ² > 0 (got σ² = {sigma2})"))
            }
            DistributionModel::Mp { c, lambda } => {
                require(*c != 0.0, "c ≠ 0")?;
                require(*lambda > 0.0, format!("λ > 0 (got λ = {lambda})"))
            }
            DistributionModel::FreeMeixner { b, .. } => require(*b >= -1.0, format!("b ≥ −1 (got b = {b})")),
            DistributionModel::PointMass { .. } => Ok(()),
            DistributionModel::TwoPoint { p, x1, x2 } => {
                require((0.0..=1.0).contains(p), format!("0 ≤ p ≤ 1 (got p = {p})"))?;
                require(x1 != x2, "x₁ ≠ x₂")
            }
            DistributionModel::Dilation { c, inner } => {
                require(*c != 0.0, "c ≠ 0")?;
                inner.validate()
            }
            DistributionModel::FreeConv { parts } => {
                require(!parts.is_empty(), "at least one summand")?;
                parts.iter().try_for_each(|p| p.validate())
            }
            DistributionModel::ImplicitPhi { .. } => Ok(()),
            DistributionModel::RhoAcl { a, c, lambda } => {
                require(*a > 0.0, format!("a > 0 (got a = {a})"))?;
                require(*c != 0.0, "c ≠ 0")?;
                require(*lambda > 0.0, format!("λ > 0 (got λ = {lambda})"))?;
                let bound = (a / (2.0 * c)).powi(2);
                require(
                    *lambda <= bound,
                    format!("λ ≤ (a/2c)²: λ = {lambda} exceeds (a/2c)² = {bound}"),
                )
            }
            DistributionModel::GammaAs { a, sigma2 } => {
                require(*a > 0.0, format!("a > 0 (got a = {a})"))?;
                require(*sigma2 > 0.0, format!("σ² > 0 (got σ² = {sigma2})"))?;
                let two_sigma = 2.0 * sigma2.sqrt();
                require(two_sigma <= *a, format!("2σ ≤ a: 2σ = {two_sigma} exceeds a = {a}"))
            }
        }
    }

    /// Voiculescu transform as an expression.
    pub fn phi(&self) -> Result<PhiExpression> {
        Ok(match self {
            DistributionModel::Cauchy { a } => PhiExpression::constant(Complex64::new(0.0, -a)),
            DistributionModel::Semicircle { m, sigma2 } => PhiExpression::constant(Complex64::new(*m, 0.0))
                .plus(PhiExpression::Pole { weight: *sigma2 }),
            DistributionModel::Mp { c, lambda } => PhiExpression::RationalMp { c: *c, lambda: *lambda },
            DistributionModel::FreeMeixner { a, b } => {
                if *b < 0.0 {
                    return Err(Error::NoClosedForm(format!(
                        "FM with b = {b} < 0 is not freely quasi-infinitely divisible"
                    )));
                }
                PhiExpression::SemicircleCauchy {
                    mean: *a,
                    variance: *b,
                }
            }
            DistributionModel::PointMass { x } => PhiExpression::constant(Complex64::new(*x, 0.0)),
            DistributionModel::TwoPoint { .. } => {
                return Err(Error::NoClosedForm(
                    "two-point laws are not freely quasi-infinitely divisible".into(),
                ))
            }
            DistributionModel::Dilation { c, inner } => {
                let dilated = inner.phi()?.dilate(*c);
                let can = dilated.canonical();
                if can.opaque.is_empty() {
                    can.to_expression()
                } else {
                    dilated
                }
            }
            DistributionModel::FreeConv { parts } => {
                PhiExpression::sum(parts.iter().map(|p| p.phi()).collect::<Result<Vec<_>>>()?)
            }
            DistributionModel::ImplicitPhi { phi } => phi.clone(),
            DistributionModel::RhoAcl { a, c, lambda } => PhiExpression::constant(Complex64::new(0.0, -a))
                .minus(PhiExpression::RationalMp { c: *c, lambda: *lambda }),
            DistributionModel::GammaAs { a, sigma2 } => PhiExpression::constant(Complex64::new(0.0, -a))
                .minus(PhiExpression::Pole { weight: *sigma2 }),
        })
    }

    /// Free characteristic triplet for the families where it is explicit.
    pub fn triplet(&self) -> Result<FreeTriplet> {
        match self {
            DistributionModel::Cauchy { a } => {
                FreeTriplet::new(0.0, SignedMeasure::from_density(a / PI, DensityKernel::CauchyLevyTail), 0.0)
            }
            DistributionModel::Semicircle { m, sigma2 } => FreeTriplet::new(*sigma2, SignedMeasure::zero(), *m),
            DistributionModel::Mp { c, lambda } => {
                let gamma = if c.abs() <= 1.0 { lambda * c } else { 0.0 };
                FreeTriplet::new(0.0, SignedMeasure::dirac(*c, *lambda), gamma)
            }
            DistributionModel::PointMass { x } => FreeTriplet::new(0.0, SignedMeasure::zero(), *x),
            DistributionModel::FreeConv { parts } => {
                let mut acc = FreeTriplet::new(0.0, SignedMeasure::zero(), 0.0)?;
                for p in parts {
                    acc = acc.add(&p.triplet()?)?;
                }
                Ok(acc)
            }
            DistributionModel::RhoAcl { a, c, lambda } => crate::deconvolve::rho_triplet(*a, *c, *lambda),
            DistributionModel::GammaAs { a, sigma2 } => crate::deconvolve::gamma_triplet(*a, *sigma2),
            DistributionModel::ImplicitPhi {
                phi: PhiExpression::TripletR { triplet },
            } => Ok(triplet.clone()),
            other => Err(Error::NoClosedForm(format!("no explicit triplet for {other}"))),
        }
    }

    /// G(z) for z ∈ ℂ⁺ when a closed form exists.
    pub fn closed_form_g(&self, z: Complex64) -> Option<Result<Complex64>> {
        self.g_closed(z, false)
    }

    /// Boundary value G(x + i0) when a closed form exists.
    pub fn boundary_g(&self, x: f64) -> Option<Result<Complex64>> {
        self.g_closed(Complex64::new(x, 0.0), true)
    }

    fn g_closed(&self, z: Complex64, boundary: bool) -> Option<Result<Complex64>> {
        let from_f = |f: Complex64| -> Result<Complex64> {
            let ok = if boundary { f.im >= -1e-14 * (1.0 + f.norm()) } else { f.im > 0.0 };
            if !ok {
                return Err(Error::BranchMismatch { z, value: f });
            }
            if f == Complex64::default() {
                return Err(Error::Pole(z));
            }
            Ok(f.inv())
        };
        let pole_free = |g: Complex64| -> Result<Complex64> {
            if g.re.is_finite() && g.im.is_finite() {
                Ok(g)
            } else {
                Err(Error::Pole(z))
            }
        };
        Some(match self {
            DistributionModel::Cauchy { a } => from_f(z + I * a),
            DistributionModel::Semicircle { m, sigma2 } => {
                let s = sigma2.sqrt();
                let u = z - m;
                from_f((u + arc_sqrt(u, -2.0 * s, 2.0 * s)) / 2.0)
            }
            DistributionModel::Mp { c, lambda } => {
                let r = lambda.sqrt();
                let s = z + c * (1.0 - lambda);
                from_f((s + arc_sqrt(z, c * (1.0 - r).powi(2), c * (1.0 + r).powi(2))) / 2.0)
            }
            DistributionModel::FreeMeixner { a, b } => {
                if *b == -1.0 {
                    let atoms = fm_atoms(*a, *b).expect("b = −1 has atoms");
                    pole_free(atoms.iter().map(|&(x, w)| w / (z - x)).sum())
                } else {
                    let r = 2.0 * (1.0 + b).sqrt();
                    let sq = arc_sqrt(z, a - r, a + r);
                    pole_free(2.0 * (1.0 + b) / ((1.0 + 2.0 * b) * z + a + sq))
                }
            }
            DistributionModel::PointMass { x } => pole_free((z - x).inv()),
            DistributionModel::TwoPoint { p, x1, x2 } => pole_free(p / (z - x1) + (1.0 - p) / (z - x2)),
            DistributionModel::Dilation { c, inner } => {
                let u = z / *c;
                if *c > 0.0 {
                    return inner.g_closed(u, boundary).map(|g| g.map(|g| g / *c));
                }
                let u = if boundary { Complex64::new(u.re, 0.0) } else { u.conj() };
                return inner.g_closed(u, boundary).map(|g| g.map(|g| g.conj() / *c));
            }
            DistributionModel::RhoAcl { a, c, lambda } => {
                let s = z + c * (lambda + 1.0) + I * a;
                let q = s * s - 4.0 * c * (z + I * a);
                from_f((s + branch_sqrt(q)) / 2.0)
            }
            DistributionModel::GammaAs { a, sigma2 } => {
                let s = z + I * a;
                from_f((s + branch_sqrt(s * s + 4.0 * sigma2)) / 2.0)
            }
            DistributionModel::FreeConv { .. } | DistributionModel::ImplicitPhi { .. } => return None,
        })
    }

    /// Atoms of the law, where known in closed form.
    pub fn atoms(&self) -> Result<Vec<(f64, f64)>> {
        Ok(match self {
            DistributionModel::Mp { lambda, .. } if *lambda < 1.0 => vec![(0.0, 1.0 - lambda)],
            DistributionModel::PointMass { x } => vec![(*x, 1.0)],
            DistributionModel::TwoPoint { p, x1, x2 } => vec![(*x1, *p), (*x2, 1.0 - p)],
            DistributionModel::FreeMeixner { a, b } => fm_atoms(*a, *b)?,
            DistributionModel::Dilation { c, inner } => {
                inner.atoms()?.into_iter().map(|(x, w)| (c * x, w)).collect()
            }
            _ => Vec::new(),
        })
    }
}

/// Density of the absolutely continuous part at x.
pub fn density_of(model: &DistributionModel, x: f64) -> Result<f64> {
    Ok(match model {
        DistributionModel::Cauchy { a } => a / (PI * (x * x + a * a)),
        DistributionModel::Semicircle { m, sigma2 } => {
            let r = 4.0 * sigma2 - (x - m).powi(2);
            if r > 0.0 {
                r.sqrt() / (2.0 * PI * sigma2)
            } else {
                0.0
            }
        }
        DistributionModel::Mp { c, lambda } => {
            let t = x / c;
            let r = lambda.sqrt();
            let (lo, hi) = ((1.0 - r).powi(2), (1.0 + r).powi(2));
            if t > lo && t < hi {
                ((t - lo) * (hi - t)).sqrt() / (2.0 * PI * t) / c.abs()
            } else {
                0.0
            }
        }
        DistributionModel::FreeMeixner { a, b } => {
            let r = 4.0 * (1.0 + b) - (x - a).powi(2);
            if r > 0.0 {
                r.sqrt() / (2.0 * PI * (b * x * x + a * x + 1.0))
            } else {
                0.0
            }
        }
        DistributionModel::PointMass { .. } | DistributionModel::TwoPoint { .. } => 0.0,
        DistributionModel::Dilation { c, inner } => density_of(inner, x / c)? / c.abs(),
        _ => {
            let (g, _) = transforms::boundary_cauchy(model, x)?;
            (-g.im / PI).max(0.0)
        }
    })
}

/// Atoms of FM_{a,b}. Closed form for b = −1; for b ≥ 0 the real poles of
/// G (experimental); b ∈ (−1, 0) is not enumerated.
pub fn fm_atoms(a: f64, b: f64) -> Result<Vec<(f64, f64)>> {
    if b == -1.0 {
        let s = (4.0 + a * a).sqrt();
        let t = a / s;
        return Ok(vec![((a - s) / 2.0, 0.5 * (1.0 + t)), ((a + s) / 2.0, 0.5 * (1.0 - t))]);
    }
    if b < 0.0 {
        return Err(Error::Unsupported(format!(
            "atom enumeration of FM_{{a,b}} for b = {b} in (−1, 0)"
        )));
    }
    // Real zeros of bx² + ax + 1 off the arc where the numerator survives.
    let roots: Vec<f64> = if b == 0.0 {
        if a == 0.0 {
            Vec::new()
        } else {
            vec![-1.0 / a]
        }
    } else {
        let disc = a * a - 4.0 * b;
        if disc < 0.0 {
            Vec::new()
        } else {
            let s = disc.sqrt();
            vec![(-a - s) / (2.0 * b), (-a + s) / (2.0 * b)]
        }
    };
    let r = 2.0 * (1.0 + b).sqrt();
    let mut atoms = Vec::new();
    for x in roots {
        if (x - a).abs() <= r {
            continue;
        }
        let z = Complex64::new(x, 0.0);
        let numer = (1.0 + 2.0 * b) * x + a - arc_sqrt(z, a - r, a + r).re;
        if numer.abs() <= 1e-12 * (1.0 + x.abs()) {
            continue;
        }
        let dd = 2.0 * b * x + a;
        atoms.push((x, numer / (2.0 * dd)));
    }
    Ok(atoms)
}

/// Reference library: every closed-form family plus implicit models.
pub fn model_library() -> Vec<(String, DistributionModel)> {
    use crate::measures::{DensityTerm, FreeCharPair};
    let pair = FreeCharPair::new(
        0.1,
        SignedMeasure::new(
            vec![(0.0, 0.5), (1.5, 0.25)],
            vec![DensityTerm::new(0.5, DensityKernel::SemicircleArc { mean: 0.0, variance: 1.0 })],
        ),
    )
    .expect("finite pair");
    let triplet = FreeTriplet::new(
        -0.25,
        SignedMeasure::from_density(1.0 / PI, DensityKernel::CauchyLevyTail),
        0.0,
    )
    .expect("valid triplet");
    vec![
        ("cauchy(1)".into(), DistributionModel::Cauchy { a: 1.0 }),
        ("semicircle(0,1)".into(), DistributionModel::Semicircle { m: 0.0, sigma2: 1.0 }),
        ("semicircle(0.5,2)".into(), DistributionModel::Semicircle { m: 0.5, sigma2: 2.0 }),
        ("mp(1,0.25)".into(), DistributionModel::Mp { c: 1.0, lambda: 0.25 }),
        ("mp(-2,1.5)".into(), DistributionModel::Mp { c: -2.0, lambda: 1.5 }),
        ("fm(0,1)".into(), DistributionModel::FreeMeixner { a: 0.0, b: 1.0 }),
        ("fm(0.5,0.5)".into(), DistributionModel::FreeMeixner { a: 0.5, b: 0.5 }),
        ("point(0.3)".into(), DistributionModel::PointMass { x: 0.3 }),
        (
            "dilation(2,mp(1,0.5))".into(),
            DistributionModel::Dilation {
                c: 2.0,
                inner: Box::new(DistributionModel::Mp { c: 1.0, lambda: 0.5 }),
            },
        ),
        (
            "dilation(-1.5,semicircle(0.2,1))".into(),
            DistributionModel::Dilation {
                c: -1.5,
                inner: Box::new(DistributionModel::Semicircle { m: 0.2, sigma2: 1.0 }),
            },
        ),
        ("rho-acl(1,1,0.25)".into(), DistributionModel::RhoAcl { a: 1.0, c: 1.0, lambda: 0.25 }),
        ("gamma(1,0.25)".into(), DistributionModel::GammaAs { a: 1.0, sigma2: 0.25 }),
        (
            "mp(1,0.25)+rho-acl(1,1,0.25)".into(),
            DistributionModel::FreeConv {
                parts: vec![
                    DistributionModel::Mp { c: 1.0, lambda: 0.25 },
                    DistributionModel::RhoAcl { a: 1.0, c: 1.0, lambda: 0.25 },
                ],
            },
        ),
        ("implicit-pair".into(), DistributionModel::ImplicitPhi { phi: PhiExpression::PairIntegral { pair } }),
        ("implicit-triplet".into(), DistributionModel::ImplicitPhi { phi: PhiExpression::TripletR { triplet } }),
    ]
}

impl fmt::Display for DistributionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistributionModel::Cauchy { a } => write!(f, "cauchy:a={a}"),
            DistributionModel::Semicircle { m, sigma2 } => write!(f, "semicircle:m={m},sigma2={sigma2}"),
            DistributionModel::Mp { c, lambda } => write!(f, "mp:c={c},lambda={lambda}"),
            DistributionModel::FreeMeixner { a, b } => write!(f, "fm:a={a},b={b}"),
            DistributionModel::PointMass { x } => write!(f, "point:x={x}"),
            DistributionModel::TwoPoint { p, x1, x2 } => write!(f, "twopoint:p={p},x1={x1},x2={x2}"),
            DistributionModel::RhoAcl { a, c, lambda } => write!(f, "rho-acl:a={a},c={c},lambda={lambda}"),
            DistributionModel::GammaAs { a, sigma2 } => write!(f, "gamma:a={a},sigma2={sigma2}"),
            DistributionModel::Dilation { c, inner } => write!(f, "dilation({c}, {inner})"),
            DistributionModel::FreeConv { parts } => {
                let names: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "{}", names.join(" ⊞ "))
            }
            DistributionModel::ImplicitPhi { .. } => write!(f, "implicit"),
        }
    }
}

/// Parses `name:k=v,...` or `name:v1,v2,...`, e.g. `mp:c=1,lambda=0.25`.
impl FromStr for DistributionModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let name = name.trim().to_ascii_lowercase();
        let keys: &[&str] = match name.as_str() {
            "cauchy" => &["a"],
            "semicircle" | "s" => &["m", "sigma2"],
            "mp" => &["c", "lambda"],
            "fm" | "free-meixner" | "freemeixner" => &["a", "b"],
            "point" | "delta" => &["x"],
            "twopoint" | "two-point" => &["p", "x1", "x2"],
            "rho-acl" | "rho" => &["a", "c", "lambda"],
            "gamma" => &["a", "sigma2"],
            other => return Err(Error::Parse(format!("unknown model `{other}`"))),
        };
        let mut values: Vec<Option<f64>> = vec![None; keys.len()];
        for (i, item) in rest.split(',').map(str::trim).filter(|t| !t.is_empty()).enumerate() {
            let (key, val) = match item.split_once('=') {
                Some((k, v)) => {
                    let k = k.trim();
                    let idx = keys
                        .iter()
                        .position(|x| *x == k)
                        .ok_or_else(|| Error::Parse(format!("unknown parameter `{k}` for `{name}`")))?;
                    (idx, v.trim())
                }
                None => {
                    if i >= keys.len() {
                        return Err(Error::Parse(format!("too many parameters for `{name}`")));
                    }
                    (i, item)
                }
            };
            let v: f64 = val
                .parse()
                .map_err(|_| Error::Parse(format!("`{val}` is not a number")))?;
            values[key] = Some(v);
        }
        let get = |i: usize| {
            values[i].ok_or_else(|| Error::Parse(format!("missing parameter `{}` for `{name}`", keys[i])))
        };
        let model = match name.as_str() {
            "cauchy" => DistributionModel::Cauchy { a: get(0)? },
            "semicircle" | "s" => DistributionModel::Semicircle {
                m: get(0)?,
                sigma2: get(1)?,
            },
            "mp" => DistributionModel::Mp {
                c: get(0)?,
                lambda: get(1)?,
            },
            "fm" | "free-meixner" | "freemeixner" => DistributionModel::FreeMeixner { a: get(0)?, b: get(1)? },
            "point" | "delta" => DistributionModel::PointMass { x: get(0)? },
            "twopoint" | "two-point" => DistributionModel::TwoPoint {
                p: get(0)?,
                x1: get(1)?,
                x2: get(2)?,
            },
            "rho-acl" | "rho" => DistributionModel::RhoAcl {
                a: get(0)?,
                c: get(1)?,
                lambda: get(2)?,
            },
            _ => DistributionModel::GammaAs {
                a: get(0)?,
                sigma2: get(1)?,
            },
        };
        model.validate()?;
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate_pieces, QuadConfig};
    use crate::transforms::{f_transform, stieltjes_density, StieltjesOptions};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn phi_examples() {
        assert_eq!(DistributionModel::Cauchy { a: 2.0 }.phi().unwrap(), PhiExpression::constant(c(0.0, -2.0)));
        let d = DistributionModel::Dilation {
            c: 3.0,
            inner: Box::new(DistributionModel::Mp { c: 1.0, lambda: 0.5 }),
        };
        assert_eq!(d.phi().unwrap(), PhiExpression::RationalMp { c: 3.0, lambda: 0.5 });
        let s = DistributionModel::Semicircle { m: 0.5, sigma2: 2.0 }.phi().unwrap();
        let z = c(0.2, 1.1);
        assert!((s.eval(z).unwrap() - (0.5 + 2.0 / z)).norm() < 1e-15);
        assert!(matches!(
            DistributionModel::TwoPoint { p: 0.5, x1: 0.0, x2: 1.0 }.phi(),
            Err(Error::NoClosedForm(_))
        ));
        assert!(matches!(
            DistributionModel::FreeMeixner { a: 0.0, b: -0.5 }.phi(),
            Err(Error::NoClosedForm(_))
        ));
    }

    #[test]
    fn densities() {
        assert!((density_of(&DistributionModel::Semicircle { m: 0.0, sigma2: 1.0 }, 0.0).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert!((density_of(&DistributionModel::Cauchy { a: 1.0 }, 0.0).unwrap() - 1.0 / PI).abs() < 1e-15);
        let fm = density_of(&DistributionModel::FreeMeixner { a: 0.0, b: 1.0 }, 0.0).unwrap();
        assert!((fm - 2f64.sqrt() / PI).abs() < 1e-15);
    }

    #[test]
    fn fm_density_normalised() {
        for (a, b) in [(0.0, 1.0), (0.5, 0.5), (0.0, 0.0), (-0.3, 2.0)] {
            let m = DistributionModel::FreeMeixner { a, b };
            let r = 2.0 * (1.0_f64 + b).sqrt();
            let est = integrate_pieces(|x| density_of(&m, x).unwrap(), a - r, a + r, &[], &QuadConfig::default());
            let atoms: f64 = fm_atoms(a, b).unwrap().iter().map(|x| x.1).sum();
            assert!((est.value + atoms - 1.0).abs() < 1e-7, "a = {a}, b = {b}: {}", est.value);
        }
    }

    #[test]
    fn fm_two_point_atoms() {
        let at = fm_atoms(0.0, -1.0).unwrap();
        assert_eq!(at, vec![(-1.0, 0.5), (1.0, 0.5)]);
        let a: f64 = 0.75;
        let at = fm_atoms(a, -1.0).unwrap();
        let s = (4.0 + a * a).sqrt();
        assert!((at[0].0 - (a - s) / 2.0).abs() < 1e-15);
        assert!((at[0].1 - 0.5 * (1.0 + a / s)).abs() < 1e-15);
        assert!((at[0].1 + at[1].1 - 1.0).abs() < 1e-15);
        // Mean of FM_{a,-1} is 0.
        let mean: f64 = at.iter().map(|(x, w)| x * w).sum();
        assert!(mean.abs() < 1e-15);
        let var: f64 = at.iter().map(|(x, w)| x * x * w).sum();
        assert!((var - 1.0).abs() < 1e-15);
        assert!(matches!(fm_atoms(0.0, -0.5), Err(Error::Unsupported(_))));
    }

    #[test]
    fn f_transform_examples() {
        let f = f_transform(&DistributionModel::PointMass { x: 0.0 }, c(0.0, 2.0)).unwrap();
        assert_eq!(f, c(0.0, 2.0));
        let s = DistributionModel::Semicircle { m: 0.0, sigma2: 1.0 };
        let g = s.boundary_g(3.0).unwrap().unwrap();
        assert!((g.inv() - c((3.0 + 5f64.sqrt()) / 2.0, 0.0)).norm() < 1e-14);
        let gm = DistributionModel::GammaAs { a: 1.0, sigma2: 0.25 };
        let y = 1e4;
        let f = f_transform(&gm, c(0.0, y)).unwrap();
        assert!((f - c(0.0, y + 1.0)).norm() < 1e-3);
    }

    #[test]
    fn dilation_density_and_transform() {
        for cc in [2.0, -1.5] {
            let inner = DistributionModel::Semicircle { m: 0.2, sigma2: 1.0 };
            let d = DistributionModel::Dilation { c: cc, inner: Box::new(inner.clone()) };
            for x in [-2.0, -0.5, 0.3, 1.7] {
                assert!((density_of(&d, x).unwrap() - density_of(&inner, x / cc).unwrap() / cc.abs()).abs() < 1e-15);
            }
            // Closed-form G agrees with inversion of the dilated φ.
            let z = c(0.4, 0.8);
            let closed = d.closed_form_g(z).unwrap().unwrap();
            let implicit = crate::transforms::invert_k(&d.phi().unwrap(), z, None).unwrap().inv();
            assert!((closed - implicit).norm() < 1e-10);
        }
    }

    #[test]
    fn inverted_phi_reproduces_closed_densities() {
        let xs: Vec<f64> = (0..81).map(|i| -4.0 + 0.1 * i as f64).collect();
        for (name, model) in model_library() {
            let closed = matches!(
                &model,
                DistributionModel::Cauchy { .. }
                    | DistributionModel::Semicircle { .. }
                    | DistributionModel::Mp { .. }
                    | DistributionModel::FreeMeixner { .. }
                    | DistributionModel::Dilation { .. }
            );
            if !closed {
                continue;
            }
            let implicit = DistributionModel::ImplicitPhi { phi: model.phi().unwrap() };
            let grid = stieltjes_density(&implicit, &xs, &StieltjesOptions::default()).unwrap();
            for (x, f) in grid.xs.iter().zip(&grid.fs) {
                // Stay off the support edges where √ behaviour limits accuracy.
                let near_edge = [-1e-2, 1e-2].iter().any(|h| {
                    (density_of(&model, x + h).unwrap() == 0.0) != (density_of(&model, *x).unwrap() == 0.0)
                });
                if near_edge || x.abs() < 1e-12 {
                    continue;
                }
                let want = density_of(&model, *x).unwrap();
                assert!((f - want).abs() < 1e-6, "{name} at {x}: {f} vs {want}");
            }
        }
    }

    #[test]
    fn parse_specs() {
        let m: DistributionModel = "mp:c=1,lambda=0.25".parse().unwrap();
        assert_eq!(m, DistributionModel::Mp { c: 1.0, lambda: 0.25 });
        let s: DistributionModel = "semicircle:0,1".parse().unwrap();
        assert_eq!(s, DistributionModel::Semicircle { m: 0.0, sigma2: 1.0 });
        assert!(matches!("rho-acl:a=1,c=1,lambda=1".parse::<DistributionModel>(), Err(Error::Validity(_))));
        assert!(matches!("nope:1".parse::<DistributionModel>(), Err(Error::Parse(_))));
        assert!(matches!("cauchy:a=x".parse::<DistributionModel>(), Err(Error::Parse(_))));
        let g: DistributionModel = "gamma:a=1,sigma2=0.25".parse().unwrap();
        assert_eq!(g.to_string().parse::<DistributionModel>().unwrap(), g);
    }

    #[test]
    fn explicit_triplets_reproduce_phi() {
        let models = [
            DistributionModel::Cauchy { a: 1.5 },
            DistributionModel::Semicircle { m: 0.3, sigma2: 2.0 },
            DistributionModel::Mp { c: 0.5, lambda: 2.0 },
            DistributionModel::Mp { c: -2.0, lambda: 0.7 },
            DistributionModel::PointMass { x: -1.0 },
            DistributionModel::RhoAcl { a: 1.0, c: 1.0, lambda: 0.25 },
            DistributionModel::GammaAs { a: 1.0, sigma2: 0.25 },
        ];
        for m in models {
            let t = m.triplet().unwrap();
            let phi = m.phi().unwrap();
            let via = PhiExpression::TripletR { triplet: t };
            for z in [Complex64::new(0.3, 1.0), Complex64::new(-2.0, 0.5), Complex64::new(4.0, 3.0)] {
                let d = (phi.eval(z).unwrap() - via.eval(z).unwrap()).norm();
                assert!(d < 1e-9, "{m}: {d:e}");
            }
        }
        assert!(matches!(
            DistributionModel::TwoPoint { p: 0.5, x1: 0.0, x2: 1.0 }.triplet(),
            Err(Error::NoClosedForm(_))
        ));
    }
}
