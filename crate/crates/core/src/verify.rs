//! Self-check suites run by `freedeconv verify`. Each check records the
//! measured quantity, its tolerance and whether it passed.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::bpx::{self, PhiPair, Status};
use crate::cumulants::{self, Sequence, SeriesCut};
use crate::deconvolve::{self, closed_forms, RtSign};
use crate::error::{Error, Result};
use crate::families::{self, DistributionModel};
use crate::measures::{pair_to_triplet, triplet_to_pair};
use crate::par;
use crate::scalar::ratio;
use crate::transforms::{self, PickSampleSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Transforms,
    Deconv,
    Cumulants,
    Bpx,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "transforms" => Suite::Transforms,
            "deconv" => Suite::Deconv,
            "cumulants" => Suite::Cumulants,
            "bpx" => Suite::Bpx,
            "all" => Suite::All,
            other => return Err(Error::Parse(format!("unknown suite {other:?}"))),
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::Transforms => "transforms",
            Suite::Deconv => "deconv",
            Suite::Cumulants => "cumulants",
            Suite::Bpx => "bpx",
            Suite::All => "all",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Measured error or statistic; NaN when the check errored.
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

/// Error-style check: passes when the computed value is at most `tol`.
fn at_most(name: &str, tol: f64, detail: &str, r: Result<f64>) -> Check {
    match r {
        Ok(v) => Check {
            name: name.into(),
            passed: v <= tol,
            value: v,
            tolerance: tol,
            detail: detail.into(),
        },
        Err(e) => failed(name, tol, e),
    }
}

/// Boolean check with an attached statistic.
fn holds(name: &str, detail: &str, r: Result<(bool, f64)>) -> Check {
    match r {
        Ok((ok, v)) => Check {
            name: name.into(),
            passed: ok,
            value: v,
            tolerance: 0.0,
            detail: detail.into(),
        },
        Err(e) => failed(name, 0.0, e),
    }
}

fn failed(name: &str, tol: f64, e: Error) -> Check {
    Check {
        name: name.into(),
        passed: false,
        value: f64::NAN,
        tolerance: tol,
        detail: format!("error: {e}"),
    }
}

fn sample_points(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| {
            let t = k as f64 / n as f64;
            Complex64::new(-4.0 + 8.0 * t, 0.05 + 3.0 * ((7.0 * t).sin().abs()))
        })
        .collect()
}

pub fn run(suite: Suite) -> VerifyReport {
    let suites = match suite {
        Suite::All => vec![
            suite_report(Suite::Transforms),
            suite_report(Suite::Deconv),
            suite_report(Suite::Cumulants),
            suite_report(Suite::Bpx),
        ],
        s => vec![suite_report(s)],
    };
    VerifyReport {
        passed: suites.iter().all(|s| s.passed),
        suites,
    }
}

fn suite_report(suite: Suite) -> SuiteReport {
    let checks = match suite {
        Suite::Transforms => transforms_checks(),
        Suite::Deconv => deconv_checks(),
        Suite::Cumulants => cumulants_checks(),
        Suite::Bpx => bpx_checks(),
        Suite::All => unreachable!("expanded by run"),
    };
    SuiteReport {
        suite,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

fn transforms_checks() -> Vec<Check> {
    let mut out = Vec::new();
    let zs = sample_points(100);
    for (name, model) in families::model_library() {
        let r = (|| {
            let phi = model.phi()?;
            let errs = par::map(&zs, |&z| -> Result<f64> {
                let w = transforms::invert_k(&phi, z, None)?;
                Ok((w + phi.eval(w)? - z).norm())
            });
            errs.into_iter().try_fold(0.0f64, |m, e| Ok(m.max(e?)))
        })();
        match r {
            Err(Error::NoClosedForm(_)) => {}
            r => out.push(at_most(
                &format!("K(F(z)) = z for {name}"),
                1e-10,
                "max over 100 points in ℂ⁺",
                r,
            )),
        }
    }
    out.push(at_most(
        "pair ↔ triplet round trips",
        1e-10,
        "triplet_to_pair(pair_to_triplet(p)) over the pair library",
        (|| {
            let mut worst: f64 = 0.0;
            for (_, p) in deconvolve::pair_library()? {
                let back = triplet_to_pair(&pair_to_triplet(&p)?)?;
                let zs = sample_points(10);
                let a = transforms::PhiExpression::PairIntegral { pair: p };
                let b = transforms::PhiExpression::PairIntegral { pair: back };
                for z in zs {
                    worst = worst.max((a.eval(z)? - b.eval(z)?).norm());
                }
            }
            Ok(worst)
        })(),
    ));
    out.push(at_most(
        "implicit MP density matches closed form",
        1e-6,
        "MP(1, 1/2) through invert_k vs the closed density on 40 interior points",
        (|| {
            let mp = DistributionModel::mp(1.0, 0.5)?;
            let implicit = DistributionModel::ImplicitPhi { phi: mp.phi()? };
            let mut worst: f64 = 0.0;
            for k in 1..40 {
                let x = 0.1 + 2.6 * k as f64 / 40.0;
                worst = worst.max((families::density_of(&implicit, x)? - families::density_of(&mp, x)?).abs());
            }
            Ok(worst)
        })(),
    ));
    out.push(at_most(
        "semicircle Stieltjes mass",
        1e-3,
        "|trapezoid mass − 1| on [−2.5, 2.5]",
        (|| {
            let xs: Vec<f64> = (0..=5000).map(|k| -2.5 + k as f64 * 1e-3).collect();
            let g = transforms::stieltjes_density(
                &DistributionModel::semicircle(0.0, 1.0)?,
                &xs,
                &transforms::StieltjesOptions::default(),
            )?;
            Ok((g.trapezoid_mass() - 1.0).abs())
        })(),
    ));
    out
}

fn deconv_checks() -> Vec<Check> {
    let mut out = Vec::new();
    out.push(at_most(
        "ρ_{1,1,1/4} density vs closed form",
        1e-6,
        "max |f − f_closed| on [−5, 5] away from 3/4 ± 0.01",
        (|| {
            let m = deconvolve::rho_acl(1.0, 1.0, 0.25)?;
            let implicit = DistributionModel::ImplicitPhi { phi: m.phi()? };
            let xs: Vec<f64> = (0..=200)
                .map(|k| -5.0 + 0.05 * k as f64)
                .filter(|x| (x - 0.75).abs() > 0.01)
                .collect();
            let fs = par::map(&xs, |&x| families::density_of(&implicit, x));
            let mut worst: f64 = 0.0;
            for (x, f) in xs.iter().zip(fs) {
                worst = worst.max((f? - closed_forms::rho_1_quarter(*x)).abs());
            }
            Ok(worst)
        })(),
    ));
    out.push(at_most(
        "γ_{1,1/4} density at 0",
        1e-8,
        "|f(0) − 2/π| through invert_k",
        (|| {
            let m = deconvolve::gamma_as(1.0, 0.25)?;
            let implicit = DistributionModel::ImplicitPhi { phi: m.phi()? };
            Ok((families::density_of(&implicit, 0.0)? - 2.0 / PI).abs())
        })(),
    ));
    out.push(holds(
        "multi_mp_weights(1,2,3,4)",
        "exact (−1/6, 4, −27/2, 32/3) with unit sum",
        (|| {
            let us: Vec<BigRational> = (1..=4).map(|k| ratio(k, 1)).collect();
            let ts = deconvolve::multi_mp_weights(&us)?;
            let want = vec![ratio(-1, 6), ratio(4, 1), ratio(-27, 2), ratio(32, 3)];
            let sum = ts.iter().fold(ratio(0, 1), |a, b| a + b.clone());
            Ok((ts == want && sum == ratio(1, 1), 0.0))
        })(),
    ));
    out.push(holds(
        "pick_check on ρ and γ regions",
        "passes inside λ ≤ (a/2c)² and 2σ ≤ a, fails with a witness outside",
        (|| {
            let spec = PickSampleSpec::default();
            let inside = deconvolve::rho_acl(1.0, 1.0, 0.25)?.phi()?;
            let outside = transforms::PhiExpression::constant(Complex64::new(0.0, -1.0))
                .minus(transforms::PhiExpression::RationalMp { c: 1.0, lambda: 0.5 });
            let g_in = deconvolve::gamma_as(1.0, 0.25)?.phi()?;
            let g_out = transforms::PhiExpression::constant(Complex64::new(0.0, -1.0))
                .minus(transforms::PhiExpression::Pole { weight: 0.5 });
            let a = transforms::pick_check(&inside, &spec);
            let b = transforms::pick_check(&outside, &spec);
            let c = transforms::pick_check(&g_in, &spec);
            let d = transforms::pick_check(&g_out, &spec);
            let ok = a.passed && !b.passed && !b.witnesses.is_empty() && c.passed && !d.passed && !d.witnesses.is_empty();
            Ok((ok, a.min_im_f))
        })(),
    ));
    out.push(holds(
        "FM quasi-Lévy density signs",
        "negative at b = 1/16, x = 0.1; positive for b = 1/2; negative mass at cutoff 1e−6 exceeds 10³",
        (|| {
            let neg = deconvolve::fm_quasi_levy_density(1.0 / 16.0, 0.1)? < 0.0;
            let pos = (1..=1000).all(|k| {
                let x = -5.0 + 10.0 * (k as f64 - 0.5) / 1000.0;
                deconvolve::fm_quasi_levy_density(0.5, x).is_ok_and(|v| v > 0.0)
            });
            let mass = deconvolve::fm_negative_mass(1.0 / 16.0, 1e-6)?;
            Ok((neg && pos && mass > 1e3, mass))
        })(),
    ));
    out.push(holds(
        "MP(1,1/4) ⊞ ρ_{1,1,1/4} = C₁",
        "φ-sum collects to the constant −i",
        (|| {
            let sum = DistributionModel::mp(1.0, 0.25)?
                .phi()?
                .plus(deconvolve::rho_acl(1.0, 1.0, 0.25)?.phi()?);
            let cauchy = DistributionModel::cauchy(1.0)?.phi()?;
            Ok((sum.canonical().approx_eq(&cauchy.canonical(), 1e-15), 0.0))
        })(),
    ));
    out.push(holds(
        "R_t^+ + R_t^− = 2z²",
        "exact rational coefficients to order 20 for t = 1/9",
        {
            let t = ratio(1, 9);
            let p = deconvolve::r_t_series(&t, RtSign::Plus, 20);
            let m = deconvolve::r_t_series(&t, RtSign::Minus, 20);
            let ok = (0..=20).all(|n| {
                let s = p[n].clone() + m[n].clone();
                s == if n == 2 { ratio(2, 1) } else { ratio(0, 1) }
            }) && m[4] == -t;
            Ok((ok, 0.0))
        },
    ));
    out
}

fn cumulants_checks() -> Vec<Check> {
    let mut out = Vec::new();
    out.push(holds(
        "Hankel obstruction a³(a − 1)³",
        "k = 2 determinant for the free-cumulant sequence of τ_a, a = 1/100 … 99/100, exact",
        (|| {
            let mut ok = true;
            for k in 1..100 {
                let a = ratio(k, 100);
                let s = cumulants::free_cumulants_to_moments(&cumulants::bernoulli_cumulants(&a, 4))?;
                let det = cumulants::hankel_det(&s, 2)?;
                let one = ratio(1, 1);
                let want = a.clone() * a.clone() * a.clone() * (a.clone() - one.clone()) * (a.clone() - one.clone()) * (a - one);
                ok &= det == want && det < ratio(0, 1);
            }
            Ok((ok, 99.0))
        })(),
    ));
    out.push(holds(
        "constant free cumulants give a moment sequence",
        "κₙ ≡ a (free Poisson) has k = 2 Hankel determinant ≥ 0",
        (|| {
            let mut ok = true;
            for k in 1..100 {
                let a = ratio(k, 100);
                let s = cumulants::free_cumulants_to_moments(&Sequence::free_cumulants(vec![a; 4]))?;
                ok &= cumulants::hankel_det(&s, 2)? >= ratio(0, 1);
            }
            Ok((ok, 99.0))
        })(),
    ));
    out.push(holds(
        "moment ↔ cumulant round trips",
        "exact rationals, n ≤ 12, free and classical",
        (|| {
            let k: Vec<BigRational> = (1..=12).map(|i| ratio(3 * i - 17, i + 2)).collect();
            let f = cumulants::moments_to_free_cumulants(&cumulants::free_cumulants_to_moments(&Sequence::free_cumulants(k.clone()))?)?;
            let c = cumulants::moments_to_classical_cumulants(&cumulants::classical_cumulants_to_moments(
                &Sequence::classical_cumulants(k.clone()),
            )?)?;
            Ok((f.values == k && c.values == k, 12.0))
        })(),
    ));
    out.push(at_most(
        "Bernoulli(1/4) classical triplet",
        1e-8,
        "max |exp(LK exponent) − (3/4 + e^{iz}/4)| on z ∈ [−10, 10], 60 atoms",
        (|| {
            let t = cumulants::bernoulli_qid_triplet(0.25, SeriesCut::Atoms(60))?;
            let mut worst: f64 = 0.0;
            for k in 0..=200 {
                let z = -10.0 + 0.1 * k as f64;
                let want = Complex64::new(0.75, 0.0) + 0.25 * Complex64::new(0.0, z).exp();
                worst = worst.max((cumulants::qlk_characteristic_function(&t, z) - want).norm());
            }
            Ok(worst)
        })(),
    ));
    out.push(at_most(
        "semicircle growth rate",
        0.02,
        "|rate − 2| for Catalan moments up to order 40",
        (|| {
            let mut k = vec![0.0; 40];
            k[1] = 1.0;
            let s = cumulants::free_cumulants_to_moments(&Sequence::free_cumulants(k))?;
            let r = cumulants::exp_growth_check(&s);
            Ok((r.rate.unwrap_or(f64::INFINITY) - 2.0).abs())
        })(),
    ));
    out
}

fn bpx_checks() -> Vec<Check> {
    let mut out = Vec::new();
    out.push(holds(
        "corollary sweep",
        "25 points with 0 < 4p ≤ 9, c = 4λ√p classify as Φ* ∩ Φ^⊞ ∖ Φ⁺ and min A ≥ 0 on (0, 100]",
        (|| {
            let mut ok = true;
            let mut worst = f64::INFINITY;
            for p in [0.1, 0.25, 0.8, 1.5, 2.25] {
                for lam in [0.5, 1.0, 1.7, 2.0, 3.0] {
                    let pair = PhiPair::corollary(p, lam)?;
                    let r = bpx::classify(&pair);
                    ok &= r.in_phi_star.status == Status::Yes
                        && r.in_phi_boxplus.status == Status::Yes
                        && r.in_phi_plus.status == Status::No;
                    let amin = (1..=20_000)
                        .map(|k| bpx::polya_a(&pair, 100.0 * k as f64 / 20_000.0))
                        .fold(f64::INFINITY, f64::min);
                    worst = worst.min(amin);
                }
            }
            Ok((ok && worst >= 0.0, worst))
        })(),
    ));
    out.push(at_most(
        "μ^⊞ R-transform vs triplet quadrature",
        1e-10,
        "mu_box_r against r_from_triplet at 20 points",
        (|| {
            let pair = PhiPair::corollary(1.0, 1.0)?;
            let t = pair.triplet()?;
            let mut worst: f64 = 0.0;
            for k in 0..20 {
                let z = Complex64::new(-2.0 + 0.2 * k as f64, -0.1 - 0.05 * k as f64);
                worst = worst.max((bpx::mu_box_r(&pair, z)? - transforms::r_from_triplet(&t, z)?).norm());
            }
            Ok(worst)
        })(),
    ));
    out.push(at_most(
        "μ* density of a pure Cauchy pair",
        1e-6,
        "Fourier inversion vs c/(π(c² + x²)) on [−10, 10]",
        (|| {
            let pair = PhiPair::symmetric(2.0, &[])?;
            let xs: Vec<f64> = (0..=200).map(|k| -10.0 + 0.1 * k as f64).collect();
            let g = bpx::mu_star_density(&pair, &xs)?;
            Ok(xs
                .iter()
                .zip(&g.fs)
                .map(|(x, f)| (f - 2.0 / (PI * (4.0 + x * x))).abs())
                .fold(0.0, f64::max))
        })(),
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_parse() {
        for s in ["transforms", "deconv", "cumulants", "bpx", "all"] {
            assert_eq!(s.parse::<Suite>().unwrap().to_string(), s);
        }
        assert!(matches!("nope".parse::<Suite>(), Err(Error::Parse(_))));
    }

    #[test]
    fn cumulants_suite_passes() {
        let r = run(Suite::Cumulants);
        assert!(r.passed, "{:#?}", r.suites[0].checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
    }
}
