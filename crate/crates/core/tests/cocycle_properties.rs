use nalgebra::DMatrix;
use pesinlab::cocycle::{angle_report, lyapunov_spectrum, mean_exponents, SplittingField};
use pesinlab::dynsys::{StatePoint, SystemSpec};
use pesinlab::linalg::{Block, Mat3};
use proptest::prelude::*;

fn block(n: usize, entries: &[f64]) -> Block {
    let mut m = Mat3::zeros();
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = entries[i * 3 + j];
        }
    }
    Block::new(m, n)
}

/// Extreme singular values from a general-purpose SVD.
fn svd_extremes(b: &Block) -> (f64, f64) {
    let d = DMatrix::from_fn(b.n, b.n, |i, j| b.m[(i, j)]);
    let s = d.singular_values();
    (s.min(), s.max())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn norms_are_sub_and_super_multiplicative(
        n in 1usize..=3,
        a in proptest::collection::vec(-3.0f64..3.0, 9),
        b in proptest::collection::vec(-3.0f64..3.0, 9),
    ) {
        let (a, b) = (block(n, &a), block(n, &b));
        let ab = a.mul(&b);
        let tol = 1e-9 * (1.0 + a.sigma_max() * b.sigma_max());
        prop_assert!(ab.sigma_max() <= a.sigma_max() * b.sigma_max() + tol);
        prop_assert!(ab.sigma_min() + tol >= a.sigma_min() * b.sigma_min());
        let (lo, hi) = svd_extremes(&ab);
        prop_assert!((ab.sigma_min() - lo).abs() <= tol && (ab.sigma_max() - hi).abs() <= tol);
    }

    #[test]
    fn cat_spectrum_is_symmetric(x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let s = lyapunov_spectrum(&SystemSpec::CatMap, &StatePoint::new(&[x, y]).unwrap(), 5000).unwrap();
        prop_assert!((s.raw[0] + s.raw[1]).abs() < 1e-9);
        prop_assert!(s.raw[1] > 0.96);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn limdom_dominates_exponent_gap(x in 0.0f64..1.0, y in 0.0f64..1.0, z in 0.0f64..1.0, k_block in 1usize..=3) {
        let m = mean_exponents(&SystemSpec::Product24, &StatePoint::new(&[x, y, z]).unwrap(), &SplittingField::Reference, k_block, 3000)
            .unwrap();
        prop_assert!(m.limdom_hat >= m.lambda_sup_s_hat - m.lambda_sup_u_hat - 1e-2, "{m:?}");
    }

    #[test]
    fn reference_angles_stay_away_from_zero(x in 0.0f64..1.0, y in 0.0f64..1.0, z in 0.0f64..1.0) {
        for (sys, p) in [
            (SystemSpec::CatMap, StatePoint::new(&[y, z]).unwrap()),
            (SystemSpec::Product24, StatePoint::new(&[x, y, z]).unwrap()),
        ] {
            let r = angle_report(&sys, &p, &SplittingField::Reference, 3, 100).unwrap();
            prop_assert!(r.angles.iter().all(|&a| a >= 1.0), "{:?}", r.angles);
        }
    }
}

#[test]
fn limdom_bound_is_tight_on_constant_cocycles() {
    for (sys, p) in [
        (SystemSpec::CatMap, StatePoint::new(&[0.7, 0.1]).unwrap()),
        (SystemSpec::Product24, StatePoint::new(&[0.0, 0.1, 0.6]).unwrap()),
    ] {
        let m = mean_exponents(&sys, &p, &SplittingField::Reference, 1, 10_000).unwrap();
        let gap = m.lambda_sup_s_hat - m.lambda_sup_u_hat;
        assert!(m.limdom_hat >= gap - 1e-6, "{m:?}");
        assert!((m.limdom_hat - gap).abs() < 1e-6, "{m:?}");
    }
}
