//! Parsers for the textual arguments: model specs, atom lists, rationals.

use freedeconv::deconvolve;
use freedeconv::{DistributionModel, Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

/// What a `density` argument names.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Model(DistributionModel),
    /// The signed free quasi-Lévy density of C_{2√2} ⊟ FM_{0,b}.
    FmLevy { b: f64 },
}

fn params(name: &str, rest: &str, keys: &[&str]) -> Result<Vec<f64>> {
    let mut values = vec![None; keys.len()];
    for (i, item) in rest.split(',').map(str::trim).filter(|t| !t.is_empty()).enumerate() {
        let (idx, val) = match item.split_once('=') {
            Some((k, v)) => (
                keys.iter()
                    .position(|x| *x == k.trim())
                    .ok_or_else(|| Error::Parse(format!("unknown parameter `{}` for `{name}`", k.trim())))?,
                v.trim(),
            ),
            None if i < keys.len() => (i, item),
            None => return Err(Error::Parse(format!("too many parameters for `{name}`"))),
        };
        values[idx] = Some(val.parse::<f64>().map_err(|_| Error::Parse(format!("`{val}` is not a number")))?);
    }
    values
        .into_iter()
        .zip(keys)
        .map(|(v, k)| v.ok_or_else(|| Error::Parse(format!("missing parameter `{k}` for `{name}`"))))
        .collect()
}

/// A single law, or several joined by `+` (free convolution).
pub fn parse_model(s: &str) -> Result<DistributionModel> {
    // A '+' right after an exponent marker belongs to the number.
    let mut parts = Vec::new();
    let mut start = 0;
    let bytes = s.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if b == b'+' && !(i > 0 && matches!(bytes[i - 1], b'e' | b'E') && i > 1 && bytes[i - 2].is_ascii_digit()) {
            parts.push(s[start..i].trim());
            start = i + 1;
        }
    }
    parts.push(s[start..].trim());
    if parts.len() > 1 {
        return Ok(DistributionModel::FreeConv {
            parts: parts.into_iter().map(parse_one).collect::<Result<_>>()?,
        });
    }
    parse_one(s.trim())
}

fn parse_one(s: &str) -> Result<DistributionModel> {
    let (name, rest) = s.split_once(':').unwrap_or((s, ""));
    match name.trim().to_ascii_lowercase().as_str() {
        "mu-plus" => deconvolve::mu_plus(params(name, rest, &["t"])?[0]),
        "mu-minus" => deconvolve::mu_minus(params(name, rest, &["t"])?[0], &deconvolve::RtConfig::default()),
        "smp" => {
            let v = params(name, rest, &["u", "x"])?;
            Ok(deconvolve::smp_deconvolution(v[0], v[1])?.model())
        }
        "fm-levy" => Err(Error::Parse(
            "fm-levy is a signed Lévy density, not a law; only `density` accepts it".into(),
        )),
        _ => s.parse(),
    }
}

pub fn parse_target(s: &str) -> Result<Target> {
    let (name, rest) = s.split_once(':').unwrap_or((s, ""));
    if name.trim().eq_ignore_ascii_case("fm-levy") {
        let b = params(name, rest, &["b"])?[0];
        if !(b > 0.0) {
            return Err(Error::Validity(format!("b > 0 (got b = {b})")));
        }
        return Ok(Target::FmLevy { b });
    }
    parse_model(s).map(Target::Model)
}

/// Half of a symmetric atomic ν: `λ:p,λ:p,…` meaning p(δ_λ + δ_{−λ}).
pub fn parse_atoms(s: &str) -> Result<Vec<(f64, f64)>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|item| {
            let (l, p) = item
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("atom `{item}` is not λ:p")))?;
            let num = |t: &str| t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("`{t}` is not a number")));
            Ok((num(l)?, num(p)?))
        })
        .collect()
}

/// `3`, `-1/6` or a finite decimal such as `0.25`, read exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("`{s}` is not a rational number"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("`{s}` has a zero denominator")));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.trim_start().starts_with('-');
        let digits = format!("{}{frac}", int.trim_start_matches(['-', '+']));
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let q = BigRational::new(n, d);
        return Ok(if negative { -q } else { q });
    }
    Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?))
}

pub fn parse_rationals(s: &str) -> Result<Vec<BigRational>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(parse_rational)
        .collect()
}

/// Points `re,im;re,im;…`.
pub fn parse_complex_list(s: &str) -> Result<Vec<num_complex::Complex64>> {
    s.split(';')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|item| {
            let (re, im) = item
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("point `{item}` is not re,im")))?;
            let num = |t: &str| t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("`{t}` is not a number")));
            Ok(num_complex::Complex64::new(num(re)?, num(im)?))
        })
        .collect()
}

pub fn parse_reals(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("`{t}` is not a number"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("-1/6").unwrap(), q(-1, 6));
        assert_eq!(parse_rational("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), q(-3, 2));
        assert_eq!(parse_rational("7").unwrap(), q(7, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1.").is_err());
    }

    #[test]
    fn models_and_targets() {
        assert_eq!(
            parse_model("gamma:a=1,sigma2=0.25").unwrap(),
            DistributionModel::GammaAs { a: 1.0, sigma2: 0.25 }
        );
        assert!(matches!(parse_model("mp:1,0.25 + rho-acl:1,1,0.25").unwrap(), DistributionModel::FreeConv { parts } if parts.len() == 2));
        assert_eq!(parse_model("cauchy:a=1e+0").unwrap(), DistributionModel::Cauchy { a: 1.0 });
        assert!(matches!(parse_model("mu-plus:t=0.5").unwrap(), DistributionModel::FreeConv { .. }));
        assert!(matches!(parse_model("mu-minus:t=0.5"), Err(Error::Validity(_))));
        assert_eq!(parse_target("fm-levy:b=0.0625").unwrap(), Target::FmLevy { b: 0.0625 });
        assert!(matches!(parse_model("nope:1"), Err(Error::Parse(_))));
        assert!(matches!(parse_model("cauchy:a=x"), Err(Error::Parse(_))));
    }

    #[test]
    fn atoms_and_points() {
        assert_eq!(parse_atoms("1:1, 2:0.5").unwrap(), vec![(1.0, 1.0), (2.0, 0.5)]);
        assert!(parse_atoms("1").is_err());
        let zs = parse_complex_list("0.1,-1; 2,-0.5").unwrap();
        assert_eq!(zs.len(), 2);
        assert_eq!(zs[1].im, -0.5);
    }
}
