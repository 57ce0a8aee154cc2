//! Moment–cumulant conversions (free and classical), cumulants of a free
//! characteristic pair, an exponential-growth proxy, Hankel determinants,
//! and the classical quasi-infinitely divisible triplet of a Bernoulli law.
//!
//! Every recursion is generic over [`Field`], so rational inputs give exact
//! answers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{self, FreeCharPair, SignedMeasure, Truncation};
use crate::quad::QuadConfig;
use crate::scalar::Field;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    /// s₀, s₁, …; index 0 is s₀.
    Moments,
    /// κ₁, κ₂, …; index 0 is κ₁.
    FreeCumulants,
    /// r₁, r₂, …; index 0 is r₁.
    ClassicalCumulants,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sequence<T> {
    pub kind: SequenceKind,
    pub values: Vec<T>,
}

impl<T: Field> Sequence<T> {
    pub fn new(kind: SequenceKind, values: Vec<T>) -> Self {
        Sequence { kind, values }
    }

    pub fn moments(values: Vec<T>) -> Self {
        Sequence::new(SequenceKind::Moments, values)
    }

    pub fn free_cumulants(values: Vec<T>) -> Self {
        Sequence::new(SequenceKind::FreeCumulants, values)
    }

    pub fn classical_cumulants(values: Vec<T>) -> Self {
        Sequence::new(SequenceKind::ClassicalCumulants, values)
    }

    fn expect(&self, kind: SequenceKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::Validity(format!("expected a {kind:?} sequence, got {:?}", self.kind)));
        }
        if self.values.is_empty() {
            return Err(Error::Validity("sequence must be nonempty".into()));
        }
        Ok(())
    }
}

/// Coefficients [x^j] M(x)^s for s = 1..=n − 1 and j ≤ n − 1, where
/// M(x) = Σ mᵢ xⁱ uses the moments m₀..m_{n−1}.
fn power_coefficient<T: Field>(m: &[T], s: usize, j: usize) -> T {
    // Truncated power by repeated multiplication.
    let deg = j;
    let mut acc: Vec<T> = vec![T::zero(); deg + 1];
    acc[0] = T::one();
    for _ in 0..s {
        let mut next = vec![T::zero(); deg + 1];
        for (a, av) in acc.iter().enumerate() {
            if av.is_zero() {
                continue;
            }
            for b in 0..=(deg - a) {
                if b < m.len() && !m[b].is_zero() {
                    next[a + b] = next[a + b].clone() + av.clone() * m[b].clone();
                }
            }
        }
        acc = next;
    }
    acc[deg].clone()
}

/// mₙ = Σ_{s=1}^{n} κ_s [x^{n−s}] M(x)^s, the non-crossing recursion.
pub fn free_cumulants_to_moments<T: Field>(k: &Sequence<T>) -> Result<Sequence<T>> {
    k.expect(SequenceKind::FreeCumulants)?;
    let n_max = k.values.len();
    let mut m = vec![T::one()];
    for n in 1..=n_max {
        let mut mn = T::zero();
        for s in 1..=n {
            let kappa = &k.values[s - 1];
            if kappa.is_zero() {
                continue;
            }
            mn = mn + kappa.clone() * power_coefficient(&m, s, n - s);
        }
        m.push(mn);
    }
    Ok(Sequence::moments(m))
}

/// Inverse of [`free_cumulants_to_moments`].
pub fn moments_to_free_cumulants<T: Field>(s: &Sequence<T>) -> Result<Sequence<T>> {
    s.expect(SequenceKind::Moments)?;
    if s.values[0] != T::one() {
        return Err(Error::Validity("s₀ must equal 1".into()));
    }
    let m = &s.values;
    let mut k: Vec<T> = Vec::with_capacity(m.len() - 1);
    for n in 1..m.len() {
        let mut kn = m[n].clone();
        for sidx in 1..n {
            let kappa = &k[sidx - 1];
            if kappa.is_zero() {
                continue;
            }
            kn = kn - kappa.clone() * power_coefficient(&m[..n], sidx, n - sidx);
        }
        k.push(kn);
    }
    Ok(Sequence::free_cumulants(k))
}

fn binomial_rows<T: Field>(n: usize) -> Vec<Vec<T>> {
    let mut rows: Vec<Vec<T>> = vec![vec![T::one()]];
    for i in 1..=n {
        let prev = &rows[i - 1];
        let mut row = vec![T::one(); i + 1];
        for j in 1..i {
            row[j] = prev[j - 1].clone() + prev[j].clone();
        }
        rows.push(row);
    }
    rows
}

/// rₙ = mₙ − Σ_{k=1}^{n−1} C(n−1, k−1) r_k m_{n−k}.
pub fn moments_to_classical_cumulants<T: Field>(s: &Sequence<T>) -> Result<Sequence<T>> {
    s.expect(SequenceKind::Moments)?;
    if s.values[0] != T::one() {
        return Err(Error::Validity("s₀ must equal 1".into()));
    }
    let m = &s.values;
    let binom = binomial_rows::<T>(m.len());
    let mut r: Vec<T> = Vec::with_capacity(m.len() - 1);
    for n in 1..m.len() {
        let mut rn = m[n].clone();
        for k in 1..n {
            rn = rn - binom[n - 1][k - 1].clone() * r[k - 1].clone() * m[n - k].clone();
        }
        r.push(rn);
    }
    Ok(Sequence::classical_cumulants(r))
}

/// mₙ = Σ_{k=1}^{n} C(n−1, k−1) r_k m_{n−k}.
pub fn classical_cumulants_to_moments<T: Field>(r: &Sequence<T>) -> Result<Sequence<T>> {
    r.expect(SequenceKind::ClassicalCumulants)?;
    let binom = binomial_rows::<T>(r.values.len());
    let mut m = vec![T::one()];
    for n in 1..=r.values.len() {
        let mut mn = T::zero();
        for k in 1..=n {
            mn = mn + binom[n - 1][k - 1].clone() * r.values[k - 1].clone() * m[n - k].clone();
        }
        m.push(mn);
    }
    Ok(Sequence::moments(m))
}

/// Free cumulants κ₁..κ_N of the law with pair (b, τ):
/// κ₁ = b + m₁(τ), κ₂ = τ(ℝ) + m₂(τ), κₙ = m_{n−2}(τ) + mₙ(τ).
///
/// With `claim_probability` the pair is asserted to come from a probability
/// law, which forces κ₂ ≥ 0.
pub fn cumulants_from_pair(p: &FreeCharPair, n: usize, claim_probability: bool) -> Result<Sequence<f64>> {
    let cfg = QuadConfig::with_abs_tol(1e-12);
    let mut moments = Vec::with_capacity(n + 1);
    for k in 0..=n {
        moments.push(measures::moment(&p.tau, k, &cfg)?);
    }
    let kappa = cumulants_from_moments_of_tau(p.b, &moments, n);
    if claim_probability && n >= 2 && kappa[1] < -1e-12 {
        return Err(Error::Validity(format!(
            "κ₂ = τ(ℝ) + m₂(τ) ≥ 0 for a probability law (got {:e})",
            kappa[1]
        )));
    }
    Ok(Sequence::free_cumulants(kappa))
}

/// The same formulas over any field for an atomic τ = Σ w δ_x.
pub fn cumulants_from_atomic_pair<T: Field>(b: &T, atoms: &[(T, T)], n: usize) -> Sequence<T> {
    let moments: Vec<T> = (0..=n)
        .map(|k| {
            atoms
                .iter()
                .fold(T::zero(), |acc, (x, w)| acc + w.clone() * x.powi(k as u32))
        })
        .collect();
    Sequence::free_cumulants(cumulants_from_moments_of_tau(b.clone(), &moments, n))
}

fn cumulants_from_moments_of_tau<T: Field>(b: T, m: &[T], n: usize) -> Vec<T> {
    (1..=n)
        .map(|k| match k {
            1 => b.clone() + m[1].clone(),
            _ => m[k - 2].clone() + m[k].clone(),
        })
        .collect()
}

/// Finite-N estimate of the exponential growth rate of a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    /// max_{n ≥ 1} |sₙ|^{1/n} over the available terms.
    pub proxy: f64,
    /// Extrapolated limit of the root ratios |sₙ/s_{n−2}|^{1/2}, if enough
    /// nonzero terms exist.
    pub rate: Option<f64>,
    /// The proxy keeps increasing: |s|^{1/n} at N exceeds that at N/2 by
    /// more than half.
    pub unbounded: bool,
}

/// Heuristic check that |sₙ| ≤ Cⁿ; the underlying statement is asymptotic.
pub fn exp_growth_check(seq: &Sequence<f64>) -> GrowthReport {
    let offset = match seq.kind {
        SequenceKind::Moments => 0,
        _ => 1,
    };
    let idx = |i: usize| i + offset;
    let vals = &seq.values;
    let roots: Vec<(usize, f64)> = vals
        .iter()
        .enumerate()
        .filter(|(i, v)| idx(*i) >= 1 && **v != 0.0)
        .map(|(i, v)| (idx(i), v.abs().powf(1.0 / idx(i) as f64)))
        .collect();
    let proxy = roots.iter().map(|r| r.1).fold(0.0, f64::max);
    let last_n = roots.last().map(|r| r.0).unwrap_or(0);
    let half = roots
        .iter()
        .filter(|r| r.0 <= last_n / 2)
        .map(|r| r.1)
        .fold(0.0, f64::max);
    let last_proxy = roots.iter().filter(|r| r.0 > last_n / 2).map(|r| r.1).fold(0.0, f64::max);
    let unbounded = half > 0.0 && last_proxy / half > 1.5;

    // Root ratios over steps of two (symmetric laws have zero odd moments).
    let ratios: Vec<(usize, f64)> = (2..vals.len())
        .filter(|&i| vals[i] != 0.0 && vals[i - 2] != 0.0 && idx(i) >= 3)
        .map(|i| (idx(i), (vals[i] / vals[i - 2]).abs().sqrt()))
        .collect();
    let rate = match ratios.last() {
        None => None,
        Some(&(n1, r1)) => {
            let target = n1 / 2;
            match ratios.iter().rev().find(|(n, _)| *n <= target.max(1) && (n1 - n) % 2 == 0) {
                Some(&(n0, r0)) if n0 < n1 => {
                    let (a, b) = (n1 as f64, n0 as f64);
                    Some((a * r1 - b * r0) / (a - b))
                }
                _ => Some(r1),
            }
        }
    };
    GrowthReport { proxy, rate, unbounded }
}

/// det(s_{i+j})_{i,j=0}^{k} by elimination with largest-magnitude pivots.
pub fn hankel_det<T: Field>(s: &Sequence<T>, k: usize) -> Result<T> {
    s.expect(SequenceKind::Moments)?;
    if s.values.len() < 2 * k + 1 {
        return Err(Error::Validity(format!("need moments up to order {}", 2 * k)));
    }
    let n = k + 1;
    let mut a: Vec<Vec<T>> = (0..n)
        .map(|i| (0..n).map(|j| s.values[i + j].clone()).collect())
        .collect();
    Ok(determinant(&mut a))
}

pub(crate) fn determinant<T: Field>(a: &mut [Vec<T>]) -> T {
    let n = a.len();
    let mut det = T::one();
    for col in 0..n {
        let pivot = (col..n)
            .filter(|&r| !a[r][col].is_zero())
            .max_by(|&x, &y| a[x][col].magnitude().total_cmp(&a[y][col].magnitude()));
        let Some(p) = pivot else {
            return T::zero();
        };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        let pv = a[col][col].clone();
        det = det * pv.clone();
        let pivot_row = a[col].clone();
        for row in a.iter_mut().skip(col + 1) {
            if row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone() / pv.clone();
            for (dst, v) in row.iter_mut().zip(&pivot_row).skip(col) {
                *dst = dst.clone() - factor.clone() * v.clone();
            }
        }
    }
    det
}

/// Free cumulants of the would-be free counterpart τ_a of Bernoulli(a):
/// the classical cumulants of (1 − a)δ₀ + aδ₁.
pub fn bernoulli_cumulants<T: Field>(a: &T, n: usize) -> Sequence<T> {
    let mut m = vec![T::one()];
    m.extend(std::iter::repeat_n(a.clone(), n));
    let r = moments_to_classical_cumulants(&Sequence::moments(m)).expect("moment sequence");
    Sequence::free_cumulants(r.values)
}

/// How to cut the infinite atomic series of the Bernoulli Lévy measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesCut {
    Atoms(usize),
    /// Smallest number of atoms whose discarded tail has total variation
    /// below the bound.
    TailBound(f64),
}

impl Default for SeriesCut {
    fn default() -> Self {
        SeriesCut::TailBound(1e-12)
    }
}

/// Classical quasi-Lévy–Khintchine data of Bernoulli(a):
/// log μ̂(z) = −gaussian·z²/2 + i·drift·z + ∫ (e^{izx} − 1 − izx·1_{[−1,1]}(x)) ν(dx).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernoulliTriplet {
    pub a: f64,
    pub gaussian: f64,
    pub nu: SignedMeasure,
    pub drift: f64,
    /// Truncation function of the compensator.
    pub truncation: String,
}

/// Quasi-infinitely divisible triplet of (1 − a)δ₀ + aδ₁, a ∈ (0, 1) ∖ {1/2}.
///
/// For a < 1/2 the Lévy measure is −Σ (1/m)(a/(a − 1))^m δ_m, for a > 1/2 it
/// is −Σ (1/m)((a − 1)/a)^m δ_{−m}; the Gaussian part vanishes in both cases.
pub fn bernoulli_qid_triplet(a: f64, cut: SeriesCut) -> Result<BernoulliTriplet> {
    if a == 0.5 {
        return Err(Error::HalfPoint);
    }
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Validity(format!("0 < a < 1 (got a = {a})")));
    }
    let (ratio, sign, drift) = if a < 0.5 {
        (a / (a - 1.0), 1.0, a / (1.0 - a))
    } else {
        ((a - 1.0) / a, -1.0, (2.0 * a - 1.0) / a)
    };
    let q = ratio.abs();
    let tail = |m: usize| q.powi(m as i32 + 1) / ((m as f64 + 1.0) * (1.0 - q));
    let count = match cut {
        SeriesCut::Atoms(n) => n,
        SeriesCut::TailBound(eps) => {
            let mut m = 1;
            while tail(m) > eps {
                m += 1;
            }
            m
        }
    };
    let atoms: Vec<(f64, f64)> = (1..=count)
        .map(|m| (sign * m as f64, -ratio.powi(m as i32) / m as f64))
        .collect();
    let nu = SignedMeasure::from_atoms(atoms).with_truncation(Truncation {
        terms: count,
        tail_bound: tail(count),
    });
    Ok(BernoulliTriplet {
        a,
        gaussian: 0.0,
        nu,
        drift,
        truncation: "1_[-1,1]".into(),
    })
}

/// exp of the classical quasi-Lévy–Khintchine exponent of the triplet.
pub fn qlk_characteristic_function(t: &BernoulliTriplet, z: f64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let mut expo = -0.5 * t.gaussian * z * z + i * t.drift * z;
    for &(x, w) in &t.nu.atoms {
        let comp = if x.abs() <= 1.0 { i * z * x } else { Complex64::default() };
        expo += w * ((i * z * x).exp() - 1.0 - comp);
    }
    expo.exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use num_rational::BigRational;

    #[test]
    fn semicircle_catalan() {
        let k = Sequence::free_cumulants(vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        let m = free_cumulants_to_moments(&k).unwrap();
        assert_eq!(m.values, vec![1.0, 0.0, 1.0, 0.0, 2.0, 0.0, 5.0]);
    }

    #[test]
    fn narayana_mp_moment() {
        let lam = ratio(2, 7);
        let k = Sequence::free_cumulants(vec![lam.clone(); 3]);
        let m = free_cumulants_to_moments(&k).unwrap();
        let want = lam.clone() + ratio(3, 1) * lam.clone() * lam.clone() + lam.clone() * lam.clone() * lam.clone();
        assert_eq!(m.values[3], want);
    }

    #[test]
    fn round_trips_exact() {
        let k: Vec<BigRational> = (1..=12).map(|i| ratio(i * i - 7, 3 + i)).collect();
        let seq = Sequence::free_cumulants(k.clone());
        let back = moments_to_free_cumulants(&free_cumulants_to_moments(&seq).unwrap()).unwrap();
        assert_eq!(back.values, k);
        let r = Sequence::classical_cumulants(k.clone());
        let back = moments_to_classical_cumulants(&classical_cumulants_to_moments(&r).unwrap()).unwrap();
        assert_eq!(back.values, k);
    }

    #[test]
    fn bernoulli_classical_cumulants() {
        let a = ratio(2, 9);
        let m = Sequence::moments(vec![ratio(1, 1), a.clone(), a.clone(), a.clone(), a.clone()]);
        let r = moments_to_classical_cumulants(&m).unwrap().values;
        let p = |c: &[i64]| {
            c.iter()
                .enumerate()
                .fold(ratio(0, 1), |acc, (i, ci)| acc + ratio(*ci, 1) * Field::powi(&a, i as u32 + 1))
        };
        assert_eq!(r[0], p(&[1]));
        assert_eq!(r[1], p(&[1, -1]));
        assert_eq!(r[2], p(&[1, -3, 2]));
        assert_eq!(r[3], p(&[1, -7, 12, -6]));
        let half = ratio(1, 2);
        let mh = Sequence::moments(vec![ratio(1, 1), half.clone(), half.clone(), half.clone()]);
        assert_eq!(moments_to_classical_cumulants(&mh).unwrap().values[2], ratio(0, 1));
    }

    #[test]
    fn point_mass_cumulants() {
        let c = 1.7;
        let m = Sequence::moments((0..6).map(|n| c.powi(n)).collect());
        let r = moments_to_classical_cumulants(&m).unwrap().values;
        assert!((r[0] - c).abs() < 1e-14);
        for v in &r[1..] {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn tau_a_moments_and_hankel() {
        let a = ratio(1, 3);
        let s = free_cumulants_to_moments(&bernoulli_cumulants(&a, 4)).unwrap();
        assert_eq!(&s.values[1..4], &[a.clone(), a.clone(), a.clone()]);
        let a2 = a.clone() * a.clone();
        let s4 = a.clone() - a2.clone() + ratio(2, 1) * a2.clone() * a.clone() - a2.clone() * a2.clone();
        assert_eq!(s.values[4], s4);
        assert_eq!(hankel_det(&s, 2).unwrap(), ratio(-8, 729));
    }

    #[test]
    fn hankel_examples() {
        let cat = Sequence::moments(vec![1.0, 0.0, 1.0, 0.0, 2.0]);
        assert!(hankel_det(&cat, 2).unwrap() >= 0.0);
        let c = ratio(3, 2);
        let pm = Sequence::moments((0..5).map(|n| Field::powi(&c, n)).collect());
        assert_eq!(hankel_det(&pm, 2).unwrap(), ratio(0, 1));
    }

    #[test]
    fn pair_cumulants() {
        let sc = FreeCharPair::new(0.0, SignedMeasure::dirac(0.0, 1.0)).unwrap();
        assert_eq!(cumulants_from_pair(&sc, 4, true).unwrap().values, vec![0.0, 1.0, 0.0, 0.0]);
        let lam = 0.6;
        let mp = FreeCharPair::new(lam / 2.0, SignedMeasure::dirac(1.0, lam / 2.0)).unwrap();
        for v in cumulants_from_pair(&mp, 6, true).unwrap().values {
            assert!((v - lam).abs() < 1e-15);
        }
        let neg = FreeCharPair::new(0.0, SignedMeasure::dirac(0.0, -1.0)).unwrap();
        assert!(matches!(cumulants_from_pair(&neg, 3, true), Err(Error::Validity(_))));
        assert!(cumulants_from_pair(&neg, 3, false).is_ok());
    }

    #[test]
    fn growth() {
        let cat: Vec<f64> = {
            let mut c = vec![1.0f64];
            for n in 0..20 {
                let next = c[n] * 2.0 * (2.0 * n as f64 + 1.0) / (n as f64 + 2.0);
                c.push(next);
            }
            let mut m = vec![0.0; 41];
            for (k, v) in c.iter().enumerate() {
                m[2 * k] = *v;
            }
            m
        };
        let r = exp_growth_check(&Sequence::moments(cat));
        assert!((r.rate.unwrap() - 2.0).abs() < 0.02, "{r:?}");
        assert!(!r.unbounded);
        let geo = exp_growth_check(&Sequence::moments((0..20).map(|n| 3f64.powi(n)).collect()));
        assert!((geo.rate.unwrap() - 3.0).abs() < 1e-12);
        assert!((geo.proxy - 3.0).abs() < 1e-12);
        let mut f = vec![1.0f64];
        for n in 1..25 {
            f.push(f[n - 1] * n as f64);
        }
        assert!(exp_growth_check(&Sequence::moments(f)).unbounded);
    }

    #[test]
    fn bernoulli_triplet() {
        let t = bernoulli_qid_triplet(0.25, SeriesCut::Atoms(60)).unwrap();
        assert!((t.nu.atoms[0].1 - 1.0 / 3.0).abs() < 1e-15);
        assert!((t.nu.atoms[1].1 + 1.0 / 18.0).abs() < 1e-15);
        assert_eq!(t.gaussian, 0.0);
        for k in 0..=200 {
            let z = -10.0 + 0.1 * k as f64;
            let want = Complex64::new(0.75, 0.0) + 0.25 * Complex64::new(0.0, z).exp();
            assert!((qlk_characteristic_function(&t, z) - want).norm() <= 1e-8);
        }
        let t = bernoulli_qid_triplet(0.75, SeriesCut::default()).unwrap();
        assert_eq!(t.nu.atoms.last().unwrap().0, -1.0);
        assert!((t.nu.atom_at(-1.0) - 1.0 / 3.0).abs() < 1e-15);
        for z in [-3.0, 0.5, 7.0] {
            let want = Complex64::new(0.25, 0.0) + 0.75 * Complex64::new(0.0, z).exp();
            assert!((qlk_characteristic_function(&t, z) - want).norm() <= 1e-10);
        }
        assert_eq!(bernoulli_qid_triplet(0.5, SeriesCut::default()), Err(Error::HalfPoint));
    }
}
