use approx::assert_relative_eq;

use super::*;
use crate::dynsys::{Jacobian, StatePoint, SystemSpec};
use crate::linalg::{Mat3, Subspace};

const LOG_PHI2: f64 = 0.962_423_650_119_206_9;

fn pt(c: &[f64]) -> StatePoint {
    StatePoint::new(c).unwrap()
}

fn lam_u() -> f64 {
    (3.0 + 5f64.sqrt()) / 2.0
}

#[test]
fn log_phi2_constant() {
    assert_relative_eq!(lam_u().ln(), LOG_PHI2, epsilon = 1e-15);
}

#[test]
fn minimal_norm_examples() {
    let id = Jacobian::new(Mat3::identity(), 2);
    let plane = Subspace::from_vectors(&[vec![1.0, 0.0], vec![0.0, 1.0]], 2).unwrap();
    assert_relative_eq!(minimal_norm(&id, &plane).unwrap(), 1.0);

    let cat = SystemSpec::CatMap.derivative(&pt(&[0.1, 0.2])).unwrap();
    assert_relative_eq!(
        minimal_norm(&cat, &plane).unwrap(),
        (3.0 - 5f64.sqrt()) / 2.0,
        epsilon = 1e-15
    );
    let split = SystemSpec::CatMap.reference_splitting(&pt(&[0.1, 0.2])).unwrap();
    assert_relative_eq!(minimal_norm(&cat, split.f()).unwrap(), lam_u(), epsilon = 1e-14);

    let sing = Jacobian::new(Mat3::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0), 2);
    let line = Subspace::from_vectors(&[vec![0.0, 1.0]], 2).unwrap();
    assert!(matches!(
        minimal_norm(&sing, &line),
        Err(crate::Error::SingularRestriction(_))
    ));
}

#[test]
fn log_norm_block_examples() {
    let r = log_norm_blocks(
        &SystemSpec::CatMap,
        &pt(&[0.3, 0.4]),
        &SplittingField::Reference,
        Bundle::F,
        1,
        4,
        0,
        Direction::Fwd,
    )
    .unwrap();
    assert_eq!(r.blocks.len(), 4);
    for b in &r.blocks {
        assert_relative_eq!(*b, LOG_PHI2, epsilon = 1e-14);
    }
    assert_eq!(r.remainder, 0.0);

    let r = log_norm_blocks(
        &SystemSpec::Product24,
        &pt(&[0.0, 0.3, 0.7]),
        &SplittingField::Reference,
        Bundle::E,
        1,
        3,
        0,
        Direction::Fwd,
    )
    .unwrap();
    for b in &r.blocks {
        assert_relative_eq!(*b, 0.5f64.ln(), epsilon = 1e-15);
    }

    let r = log_norm_blocks(
        &SystemSpec::Product24,
        &pt(&[0.2, 0.3, 0.7]),
        &SplittingField::Reference,
        Bundle::F,
        2,
        0,
        0,
        Direction::Bwd,
    )
    .unwrap();
    assert!(r.blocks.is_empty());
    assert_eq!(r.sum(), 0.0);
}

#[test]
fn backward_blocks_match_forward_from_the_past() {
    let sys = SystemSpec::Product24;
    let x = pt(&[0.37, 0.3, 0.7]);
    let (k, l, r) = (3, 4, 2);
    let bwd = log_norm_blocks(&sys, &x, &SplittingField::Reference, Bundle::F, k, l, r, Direction::Bwd)
        .unwrap();
    let mut past = x;
    for _ in 0..(l * k + r) {
        past = sys.inverse_step(&past).unwrap();
    }
    let fwd = log_norm_blocks(&sys, &past, &SplittingField::Reference, Bundle::F, k, l, 0, Direction::Fwd)
        .unwrap();
    let head = log_norm_blocks(&sys, &past, &SplittingField::Reference, Bundle::F, k, 0, r, Direction::Fwd)
        .unwrap();
    assert_relative_eq!(bwd.remainder, head.remainder, epsilon = 1e-10);
    let fwd_shifted = log_norm_blocks(&sys, &past, &SplittingField::Reference, Bundle::F, k, l, r, Direction::Fwd)
        .unwrap();
    for (a, b) in bwd.blocks.iter().zip(&fwd_shifted.blocks) {
        assert_relative_eq!(*a, *b, epsilon = 1e-10);
    }
    assert_eq!(fwd.blocks.len(), l);
}

#[test]
fn mean_exponent_examples() {
    let m = mean_exponents(&SystemSpec::Product24, &pt(&[0.0, 0.3, 0.7]), &SplittingField::Reference, 1, 100)
        .unwrap();
    assert_relative_eq!(m.lambda_sup_s_hat, -(2f64.ln()), epsilon = 1e-14);
    assert_relative_eq!(m.lambda_sup_u_hat, LOG_PHI2, epsilon = 1e-14);
    assert_relative_eq!(m.limdom_hat, -(3.0 + 5f64.sqrt()).ln(), epsilon = 1e-12);

    let h = mean_exponents(&SystemSpec::Product24, &pt(&[0.5, 0.3, 0.7]), &SplittingField::Reference, 1, 100)
        .unwrap();
    assert!(h.limdom_hat.abs() < 1e-12);

    let c = mean_exponents(&SystemSpec::CatMap, &pt(&[0.1, 0.6]), &SplittingField::Reference, 1, 50).unwrap();
    assert_relative_eq!(c.lambda_sup_s_hat, -LOG_PHI2, epsilon = 1e-13);
    assert_relative_eq!(c.lambda_sup_s_hat, -c.lambda_sup_u_hat, epsilon = 1e-13);
    assert!(mean_exponents(&SystemSpec::CatMap, &pt(&[0.1, 0.6]), &SplittingField::Reference, 1, 9).is_err());
}

#[test]
fn lyapunov_examples() {
    let s = lyapunov_spectrum(&SystemSpec::CatMap, &pt(&[0.1, 0.2]), 10_000).unwrap();
    assert_eq!(s.exponents.len(), 2);
    assert!((s.exponents[0] + LOG_PHI2).abs() < 1e-6);
    assert!((s.exponents[1] - LOG_PHI2).abs() < 1e-6);
    assert_eq!(s.stable_index, 1);

    let p = lyapunov_spectrum(&SystemSpec::Product24, &pt(&[0.0, 0.1, 0.2]), 10_000).unwrap();
    let want = [-LOG_PHI2, -(2f64.ln()), LOG_PHI2];
    for (a, b) in p.exponents.iter().zip(want) {
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
    assert_eq!(p.multiplicities, vec![1, 1, 1]);

    let rot = SystemSpec::translation(&[0.318]).unwrap();
    let r = lyapunov_spectrum(&rot, &pt(&[0.5]), 1000).unwrap();
    assert_eq!(r.exponents, vec![0.0]);
    assert_eq!(r.stable_index, 0);

    let rot2 = SystemSpec::translation(&[0.318, 0.1]).unwrap();
    let r2 = lyapunov_spectrum(&rot2, &pt(&[0.5, 0.5]), 1000).unwrap();
    assert_eq!(r2.multiplicities, vec![2]);
    assert!(lyapunov_spectrum(&rot, &pt(&[0.5]), 999).is_err());
}

#[test]
fn alpha_examples() {
    let a = alpha_constant(&SystemSpec::CatMap, &[pt(&[0.1, 0.1])]).unwrap();
    assert_relative_eq!(a, 2.0 * LOG_PHI2, epsilon = 1e-13);
    let rot = SystemSpec::translation(&[0.2, 0.3]).unwrap();
    assert_eq!(alpha_constant(&rot, &[pt(&[0.1, 0.1])]).unwrap(), 0.0);

    // Oracle: the Jacobian is diag(g', A), so its singular values are
    // g' and the eigenvalues of the symmetric cat matrix.
    let r5 = 5f64.sqrt();
    let (b, c) = (-(2.0 + r5) / 4.0, r5 / 4.0);
    let n = 20_000;
    let sample: Vec<_> = (0..n).map(|i| pt(&[i as f64 / n as f64, 0.2, 0.3])).collect();
    let oracle = (0..n)
        .map(|i| {
            let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            let gp = 1.0 + b * t.cos() + c * (2.0 * t).cos();
            let hi = gp.max(lam_u());
            let lo = gp.min(1.0 / lam_u());
            (hi / lo).ln()
        })
        .fold(0.0, f64::max);
    let a = alpha_constant(&SystemSpec::Product24, &sample).unwrap();
    assert_relative_eq!(a, oracle, epsilon = 1e-12);
    assert!((a - 2.622).abs() < 2e-3, "alpha = {a}");
}

#[test]
fn upgrade_examples() {
    let (k2, l2) = upgrade_limit_domination(1, 0.8278, 3, 0, 2.0).unwrap();
    assert_eq!(k2, 3);
    assert_relative_eq!(l2, 2.4834, epsilon = 1e-12);
    assert_eq!(upgrade_limit_domination(4, 0.3, 1, 0, 1.0).unwrap(), (4, 0.3));
    assert_eq!(upgrade_limit_domination(2, 1.0, 2, 1, 1.0).unwrap(), (5, 1.5));
    assert!(upgrade_limit_domination(2, 0.1, 1, 1, 1.0).is_err());
    assert!(upgrade_limit_domination(2, 1.0, 1, 2, 1.0).is_err());

    assert_eq!(domination_upgrade_n0(1, 0.7, 0.0).unwrap(), 4);
    assert_eq!(domination_upgrade_n0(5, 1.0, 1.0).unwrap(), 13);
    assert_eq!(domination_upgrade_n0(3, 0.5, 0.25).unwrap(), 7);
    assert!(domination_upgrade_n0(3, 0.0, 0.25).is_err());
}

#[test]
fn angle_report_on_constant_splitting() {
    let r = angle_report(&SystemSpec::Product24, &pt(&[0.2, 0.3, 0.4]), &SplittingField::Reference, 1, 50)
        .unwrap();
    assert_eq!(r.angles.len(), 50);
    assert!(r.tail_running_inf.windows(2).all(|w| w[1] <= w[0]));
    assert_relative_eq!(r.e0_hat, 2f64.sqrt(), epsilon = 1e-14);
}

#[test]
fn transported_splitting_matches_reference_forward() {
    let sys = SystemSpec::Product24;
    let x = pt(&[0.31, 0.3, 0.4]);
    let s = sys.reference_splitting(&x).unwrap();
    let a = mean_exponents(&sys, &x, &SplittingField::Reference, 1, 10).unwrap();
    let b = mean_exponents(&sys, &x, &SplittingField::Transported(s), 1, 10).unwrap();
    assert_relative_eq!(a.lambda_sup_u_hat, b.lambda_sup_u_hat, epsilon = 1e-10);
    assert_relative_eq!(a.lambda_s_hat, b.lambda_s_hat, epsilon = 1e-6);
    assert!(OrbitCocycle::build(&sys, &x, &SplittingField::Transported(s), 1, 1).is_err());
    assert!(matches!(
        OrbitCocycle::build(&sys, &x, &SplittingField::Transported(s), 0, 40),
        Err(crate::Error::PrecisionLoss { steps }) if steps < 20
    ));
}

#[test]
fn fixed_splitting_must_be_invariant() {
    let bad = crate::dynsys::Splitting::new(&[vec![1.0, 0.0]], &[vec![0.0, 1.0]]).unwrap();
    let r = OrbitCocycle::build(&SystemSpec::CatMap, &pt(&[0.1, 0.2]), &SplittingField::Fixed(bad), 0, 3);
    assert!(matches!(r, Err(crate::Error::InvalidParameter(_))));
}
