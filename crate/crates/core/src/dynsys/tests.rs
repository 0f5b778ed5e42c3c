use approx::assert_relative_eq;

use super::*;
use crate::linalg::Mat3;

fn pt(c: &[f64]) -> StatePoint {
    StatePoint::new(c).unwrap()
}

#[test]
fn cat_steps() {
    let s = SystemSpec::CatMap;
    assert_eq!(s.step(&pt(&[0.0, 0.0])).unwrap(), pt(&[0.0, 0.0]));
    assert_eq!(s.step(&pt(&[0.5, 0.5])).unwrap(), pt(&[0.5, 0.0]));
    assert!(s.step(&pt(&[0.5])).is_err());
}

#[test]
fn product_fiber_zero_is_invariant() {
    let s = SystemSpec::Product24;
    let (y, z) = (0.3, 0.7);
    let q = s.step(&pt(&[0.0, y, z])).unwrap();
    assert_eq!(q.coords()[0], 0.0);
    let expect = pt(&[0.0, 2.0 * y + z, y + z]);
    assert!(torus_distance(&q, &expect).unwrap() < 1e-15);
}

#[test]
fn iterate_examples() {
    let p = pt(&[0.3, 0.1]);
    let seg = SystemSpec::CatMap.iterate(&p, 0).unwrap();
    assert_eq!(seg.points(), &[p]);
    let o = SystemSpec::CatMap.iterate(&pt(&[0.0, 0.0]), 5).unwrap();
    assert_eq!(o.len(), 5);
    assert!(o.points().iter().all(|q| q.coords() == [0.0, 0.0]));
    let h = SystemSpec::CircleG.iterate(&pt(&[0.5]), 3).unwrap();
    assert!(h.points().iter().all(|q| q.coords() == [0.5]));
}

#[test]
fn derivative_examples() {
    let cat = SystemSpec::CatMap.derivative(&pt(&[0.123, 0.9])).unwrap();
    assert_eq!(cat.entries(), vec![vec![2.0, 1.0], vec![1.0, 1.0]]);

    let j0 = SystemSpec::Product24.derivative(&pt(&[0.0, 0.2, 0.4])).unwrap();
    let mut want = Mat3::new(0.5, 0.0, 0.0, 0.0, 2.0, 1.0, 0.0, 1.0, 1.0);
    assert_relative_eq!(*j0.matrix(), want, epsilon = 1e-15);

    let jh = SystemSpec::Product24.derivative(&pt(&[0.5, 0.2, 0.4])).unwrap();
    want[(0, 0)] = (3.0 + 5f64.sqrt()) / 2.0;
    assert_relative_eq!(*jh.matrix(), want, epsilon = 1e-15);
}

#[test]
fn cat_reference_splitting_is_eigen() {
    let s = SystemSpec::CatMap.reference_splitting(&pt(&[0.1, 0.2])).unwrap();
    let r5 = 5f64.sqrt();
    // Oracle: roots of t^2 - 3t + 1 and the eigenvector equation (2 - t) v1 + v2 = 0.
    let (ls, lu) = ((3.0 - r5) / 2.0, (3.0 + r5) / 2.0);
    let es = s.e_basis()[0].clone();
    let eu = s.f_basis()[0].clone();
    let n_s = (1.0 + (ls - 2.0f64).powi(2)).sqrt();
    let n_u = (1.0 + (lu - 2.0f64).powi(2)).sqrt();
    let sign = es[0].signum();
    assert_relative_eq!(sign * es[0], 1.0 / n_s, epsilon = 1e-15);
    assert_relative_eq!(sign * es[1], (ls - 2.0) / n_s, epsilon = 1e-15);
    let sign = eu[0].signum();
    assert_relative_eq!(sign * eu[0], 1.0 / n_u, epsilon = 1e-15);
    assert_relative_eq!(sign * eu[1], (r5 - 1.0) / 2.0 / n_u, epsilon = 1e-15);
    assert_relative_eq!(s.angle(), 2f64.sqrt(), epsilon = 1e-14);
}

#[test]
fn product_reference_splitting_shape() {
    let s = SystemSpec::Product24
        .reference_splitting(&pt(&[0.4, 0.2, 0.9]))
        .unwrap();
    assert_eq!(s.dims(), (2, 1));
    assert_relative_eq!(s.angle(), 2f64.sqrt(), epsilon = 1e-14);
    assert!(matches!(
        SystemSpec::CircleG.reference_splitting(&pt(&[0.1])),
        Err(crate::Error::UnsupportedSystem(_))
    ));
}

#[test]
fn translation_is_isometry() {
    let s = SystemSpec::translation(&[0.25, 0.5]).unwrap();
    let p = pt(&[0.9, 0.75]);
    let q = s.step(&p).unwrap();
    assert!(torus_distance(&q, &pt(&[0.15, 0.25])).unwrap() < 1e-15);
    assert!(torus_distance(&s.inverse_step(&q).unwrap(), &p).unwrap() < 1e-15);
}
