use freedeconv::cumulants::{self, Sequence};
use freedeconv::deconvolve;
use freedeconv::measures::{pair_to_triplet, triplet_to_pair, FreeCharPair, SignedMeasure};
use freedeconv::transforms::{self, PhiExpression, StieltjesOptions};
use freedeconv::DistributionModel;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use proptest::prelude::*;

fn rat() -> impl Strategy<Value = BigRational> {
    (-20i64..20, 1i64..9).prop_map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
}

fn upper() -> impl Strategy<Value = Complex64> {
    (-8.0..8.0f64, 0.02..10.0f64).prop_map(|(x, y)| Complex64::new(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn free_and_classical_conversions_invert(k in prop::collection::vec(rat(), 1..10)) {
        let m = cumulants::free_cumulants_to_moments(&Sequence::free_cumulants(k.clone())).unwrap();
        prop_assert_eq!(cumulants::moments_to_free_cumulants(&m).unwrap().values, k.clone());
        let m = cumulants::classical_cumulants_to_moments(&Sequence::classical_cumulants(k.clone())).unwrap();
        prop_assert_eq!(cumulants::moments_to_classical_cumulants(&m).unwrap().values, k);
    }

    #[test]
    fn two_mp_weights_sum_to_closed_form(u in rat(), v in rat(), x in rat()) {
        prop_assume!(u < v && !num_traits::Zero::is_zero(&u) && !num_traits::Zero::is_zero(&v));
        let (a, b) = deconvolve::two_mp_weights(&u, &v, &x).unwrap();
        prop_assert_eq!(a + b, deconvolve::two_mp_weight_sum(&u, &v, &x));
    }

    #[test]
    fn mp_inversion_round_trip(c in prop_oneof![-3.0..-0.2f64, 0.2..3.0f64], lambda in 0.05..4.0f64, z in upper()) {
        let phi = DistributionModel::mp(c, lambda).unwrap().phi().unwrap();
        let w = transforms::invert_k(&phi, z, None).unwrap();
        prop_assert!((w + phi.eval(w).unwrap() - z).norm() < 1e-10);
        prop_assert!(w.im >= z.im - 1e-9 * (1.0 + z.norm()));
    }

    #[test]
    fn rho_region_inversion_stays_pick(a in 0.2..3.0f64, c in 0.2..3.0f64, frac in 0.0..1.0f64, z in upper()) {
        let lambda = frac * (a / (2.0 * c)).powi(2);
        let phi = deconvolve::rho_acl(a, c, lambda).unwrap().phi().unwrap();
        let w = transforms::invert_k(&phi, z, None).unwrap();
        prop_assert!((w + phi.eval(w).unwrap() - z).norm() < 1e-10);
        prop_assert!(w.im >= z.im - 1e-9 * (1.0 + z.norm()));
    }

    #[test]
    fn atomic_pair_triplet_round_trip(
        b in -2.0..2.0f64,
        atoms in prop::collection::vec((-4.0..4.0f64, -1.0..1.0f64), 0..4),
        z in upper(),
    ) {
        let p = FreeCharPair::new(b, SignedMeasure::from_atoms(atoms)).unwrap();
        let back = triplet_to_pair(&pair_to_triplet(&p).unwrap()).unwrap();
        prop_assert!(back.approx_eq(&p, 1e-10));
        let t = pair_to_triplet(&p).unwrap();
        let a = PhiExpression::PairIntegral { pair: p }.eval(z);
        let r = PhiExpression::TripletR { triplet: t }.eval(z);
        if let (Ok(a), Ok(r)) = (a, r) {
            prop_assert!((a - r).norm() < 1e-9 * (1.0 + a.norm()));
        }
    }
}

#[test]
fn parallel_and_sequential_grids_agree() {
    let model = DistributionModel::ImplicitPhi {
        phi: deconvolve::rho_acl(1.0, 1.0, 0.25).unwrap().phi().unwrap(),
    };
    let xs: Vec<f64> = (0..500).map(|k| -5.0 + 0.02 * k as f64).collect();
    let opts = StieltjesOptions::default();
    let a = transforms::stieltjes_density(&model, &xs, &opts).unwrap();
    let b = transforms::stieltjes_density_seq(&model, &xs, &opts).unwrap();
    assert_eq!(a, b);
}
