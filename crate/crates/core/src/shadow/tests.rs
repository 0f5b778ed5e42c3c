use approx::assert_relative_eq;
use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::dynsys::{torus_distance, StatePoint, SystemSpec};
use crate::linalg::Vec3;

fn pt(c: &[f64]) -> StatePoint {
    StatePoint::new(c).unwrap()
}

fn cat_power(n: usize) -> [[i128; 2]; 2] {
    let mut m = [[1i128, 0], [0, 1]];
    for _ in 0..n {
        m = [[2 * m[0][0] + m[1][0], 2 * m[0][1] + m[1][1]], [m[0][0] + m[1][0], m[0][1] + m[1][1]]];
    }
    m
}

/// Dense minimum-norm solution of the linearized orbit equation at `z`,
/// used as an oracle for one Newton step on the (linear) cat map.
fn dense_newton_step(sys: &SystemSpec, z: &[StatePoint], periodic: bool) -> Vec<StatePoint> {
    let d = sys.dim();
    let q = if periodic { z.len() } else { z.len() - 1 };
    let cols = d * z.len();
    let mut j = DMatrix::<f64>::zeros(d * q, cols);
    let mut rhs = DVector::<f64>::zeros(d * q);
    for k in 0..q {
        let next = (k + 1) % z.len();
        let a = sys.derivative(&z[k]).unwrap().entries();
        let r = sys.step(&z[k]).unwrap().diff_to(&z[next]);
        for i in 0..d {
            j[(d * k + i, d * next + i)] += 1.0;
            for c in 0..d {
                j[(d * k + i, d * k + c)] -= a[i][c];
            }
            rhs[d * k + i] = -r[i];
        }
    }
    let dz = j.pseudo_inverse(1e-13).unwrap() * rhs;
    z.iter()
        .enumerate()
        .map(|(k, p)| {
            let mut v = Vec3::zeros();
            for i in 0..d {
                v[i] = dz[d * k + i];
            }
            p.displaced(&v)
        })
        .collect()
}

fn cat_pseudo(seed: u64, segs: usize, len: (usize, usize), delta: f64) -> PseudoOrbit {
    let sys = SystemSpec::CatMap;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = pt(&[rng.random(), rng.random()]);
    let mut segments = Vec::new();
    for i in 0..segs {
        if i > 0 {
            x = x.displaced(&(random_dir2(&mut rng) * (0.9 * delta)));
        }
        let n = rng.random_range(len.0..=len.1);
        let s = sys.iterate(&x, n).unwrap().into_points();
        x = s[n];
        segments.push(s);
    }
    PseudoOrbit::new(segments, false, delta).unwrap()
}

fn random_dir2(rng: &mut ChaCha8Rng) -> Vec3 {
    let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    Vec3::new(t.cos(), t.sin(), 0.0)
}

#[test]
fn cumulative_time_examples() {
    assert_eq!(cumulative_times(&[3, 4, 5], 0, 2).unwrap(), 7);
    assert_eq!(cumulative_times(&[3, 4, 5], 0, 0).unwrap(), 0);
    assert_eq!(cumulative_times(&[3, 4, 5], 0, 3).unwrap(), 12);
    assert_eq!(cumulative_times(&[2, 3, 4], -1, -1).unwrap(), -2);
    assert_eq!(cumulative_times(&[6, 2, 3], -2, -2).unwrap(), -8);
    assert_eq!(cumulative_times(&[6, 2, 3], -2, 1).unwrap(), 3);
    assert!(cumulative_times(&[3, 4, 5], 0, 4).is_err());
    assert!(cumulative_times(&[3, 4, 5], 0, -1).is_err());
    assert!(cumulative_times(&[3, 4, 5], 1, 2).is_err());
}

#[test]
fn text_round_trip() {
    let p = cat_pseudo(3, 3, (2, 4), 1e-6);
    let text = p.to_text();
    assert!(text.starts_with("PSEUDO d=2 periodic=0 delta="));
    assert!(text.contains("\n\nSEG n="));
    let back = PseudoOrbit::from_text(&text).unwrap();
    assert_eq!(back, p);
    assert!(PseudoOrbit::from_text("PSEUDO d=2 periodic=0 delta=1e-3\nSEG n=1\n0.1 0.2\n").is_err());
    assert!(PseudoOrbit::from_text("PSEUDO d=2 periodic=2 delta=1e-3\n").is_err());
    let e = PseudoOrbit::from_text("PSEUDO d=2 periodic=0 delta=1e-3\nSEG n=1\n0.1 0.2\n0.4\n").unwrap_err();
    assert_eq!(e, crate::Error::Parse { line: 4, msg: "expected 2 coordinates, got 1".into() });
}

#[test]
fn gaps_must_be_below_delta() {
    let sys = SystemSpec::CatMap;
    let x = pt(&[0.1, 0.2]);
    let y = pt(&[0.5, 0.5]);
    assert!(PseudoOrbit::from_starts(&sys, &[(x, 3), (y, 2)], false, 0.1).is_err());
    assert!(PseudoOrbit::from_starts(&sys, &[(x, 0)], false, 0.1).is_err());
    let exact = sys.iterate_to(&x, 3).unwrap();
    let p = PseudoOrbit::from_starts(&sys, &[(x, 3), (exact, 2)], false, 1e-12).unwrap();
    assert_eq!(p.gaps(), vec![0.0]);
    assert_eq!((p.total_length(), p.offsets()), (5, vec![0, 3]));
}

#[test]
fn exact_orbit_is_unchanged() {
    let sys = SystemSpec::CatMap;
    let x = pt(&[0.23, 0.71]);
    let y = sys.iterate_to(&x, 4).unwrap();
    let p = PseudoOrbit::from_starts(&sys, &[(x, 4), (y, 6)], false, 1e-9).unwrap();
    let r = solve_shadow(&sys, &p, &ShadowOptions::default()).unwrap();
    assert!(r.iterations <= 1);
    assert!(r.eps_achieved < 1e-15, "{}", r.eps_achieved);
    let check = verify_shadowing(&sys, &x, &p, 1e-12).unwrap();
    assert!(check.pass && check.max_deviation == 0.0);
    let far = x.displaced(&Vec3::new(2e-6, 0.0, 0.0));
    let check = verify_shadowing(&sys, &far, &p, 1e-6).unwrap();
    assert!(!check.pass);
}

#[test]
fn newton_matches_dense_linear_solve() {
    let sys = SystemSpec::CatMap;
    for seed in 0..6 {
        for periodic in [false, true] {
            let open = cat_pseudo(seed, 3, (2, 6), 1e-3);
            let p = if periodic {
                let segs = open.segments().to_vec();
                PseudoOrbit::new(segs, true, 2.0).unwrap()
            } else {
                open
            };
            assert!(p.total_length() <= 20);
            let mut z: Vec<StatePoint> = p.segments().iter().flat_map(|s| s[..s.len() - 1].to_vec()).collect();
            if !periodic {
                z.push(*p.segments().last().unwrap().last().unwrap());
            }
            let oracle = dense_newton_step(&sys, &z, periodic);
            let r = solve_shadow(&sys, &p, &ShadowOptions::default()).unwrap();
            assert!(r.residual < 1e-12);
            assert_eq!(r.orbit.len(), oracle.len());
            for (a, b) in r.orbit.iter().zip(&oracle) {
                assert!(torus_distance(a, b).unwrap() < 1e-10, "seed {seed} periodic {periodic}");
            }
        }
    }
}

#[test]
fn cat_closing_matches_power_solve() {
    let sys = SystemSpec::CatMap;
    let n = 5;
    let a = cat_power(n);
    let an = Matrix2::new(a[0][0] as f64 - 1.0, a[0][1] as f64, a[1][0] as f64, a[1][1] as f64 - 1.0);
    // A point whose fifth iterate is 1e-6 away: a periodic point moved along
    // the stable direction.
    let z_star = {
        let m = Vector2::new(3.0, 7.0);
        an.lu().solve(&m).unwrap()
    };
    let es = crate::dynsys::CAT_E_S;
    let norm = es[0].hypot(es[1]);
    let es = [es[0] / norm, es[1] / norm];
    let lam5 = crate::dynsys::CAT_LAMBDA_S.powi(5);
    let step = 1e-6 / (1.0 - lam5);
    let x = pt(&[z_star[0] + step * es[0], z_star[1] + step * es[1]]);
    let fx = sys.iterate_to(&x, n).unwrap();
    let gap = x.diff_to(&fx);
    assert!((gap.norm() - 1e-6).abs() < 1e-9);
    let r = close_orbit(&sys, &x, n, &ShadowOptions::default()).unwrap();
    let w = an.lu().solve(&Vector2::new(-gap[0], -gap[1])).unwrap();
    let dz = x.diff_to(r.point());
    assert!((dz[0] - w[0]).abs() < 1e-12 && (dz[1] - w[1]).abs() < 1e-12);
    assert!(r.eps_achieved <= 1e-5);
    assert_eq!(r.period, Some(5));
    assert!(torus_distance(&sys.iterate_to(r.point(), n).unwrap(), r.point()).unwrap() < 1e-11);
}

#[test]
fn periodic_point_closes_to_itself() {
    let sys = SystemSpec::CatMap;
    let x = pt(&[0.5, 0.5]);
    let r = close_orbit(&sys, &x, 3, &ShadowOptions::default()).unwrap();
    assert_eq!(r.iterations, 0);
    assert_eq!(r.eps_achieved, 0.0);
    assert_eq!(r.point(), &x);
}

#[test]
fn product_pseudo_orbit_near_fiber_zero() {
    let sys = SystemSpec::Product24;
    let delta = 1e-8;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut x = pt(&[0.02, 0.3, 0.6]);
    let mut segs = Vec::new();
    for i in 0..6 {
        if i > 0 {
            x = x.displaced(&(random_direction(&mut rng, 3) * (0.9 * delta)));
        }
        let s = sys.iterate(&x, 15).unwrap().into_points();
        x = s[15];
        segs.push(s);
    }
    let p = PseudoOrbit::new(segs, false, delta).unwrap();
    let r = solve_shadow(&sys, &p, &ShadowOptions::default()).unwrap();
    assert!(r.residual < 1e-12 && r.eps_achieved < 1e-5);
    let (check, res) = verify_shadowing_orbit(&sys, &r.orbit, &p, r.eps_achieved + 1e-12).unwrap();
    assert!(check.pass && res < 1e-12);
}

#[test]
fn product_closing_on_fiber_zero() {
    let sys = SystemSpec::Product24;
    let x = pt(&[0.0, 0.5 + 1e-7, 0.5]);
    let r = close_orbit(&sys, &x, 3, &ShadowOptions::default()).unwrap();
    assert_eq!(r.point().coords()[0], 0.0);
    assert!(r.orbit.iter().all(|p| p.coords()[0] == 0.0));
    assert!(r.eps_achieved < 1e-5);
}

#[test]
fn iteration_limits_are_reported() {
    let sys = SystemSpec::CatMap;
    let p = cat_pseudo(1, 3, (5, 8), 1e-4);
    let opts = ShadowOptions { tol: 1e-12, max_iter: 0 };
    assert!(matches!(solve_shadow(&sys, &p, &opts), Err(crate::Error::NotConverged { .. })));
    let opts = ShadowOptions { tol: 0.0, max_iter: 5 };
    assert!(solve_shadow(&sys, &p, &opts).is_err());
    let wrong = SystemSpec::Product24;
    assert!(solve_shadow(&wrong, &p, &ShadowOptions::default()).is_err());
}

#[test]
fn long_window_converges() {
    let sys = SystemSpec::CatMap;
    let p = cat_pseudo(5, 200, (30, 70), 1e-8);
    let r = solve_shadow(&sys, &p, &ShadowOptions::default()).unwrap();
    assert!(r.residual < 1e-12);
    assert!(r.eps_achieved <= 20.0 * 1e-8, "{}", r.eps_achieved);
    let periodic = PseudoOrbit::new(p.segments().to_vec(), true, 1.0).unwrap();
    let r = solve_shadow(&sys, &periodic, &ShadowOptions::default()).unwrap();
    assert!(r.residual < 1e-12);
    assert_eq!(r.period, Some(p.total_length()));
}

/// Exact gain of the linearized shadowing operator on the cat map: worst
/// deviation per unit gap, summed over the cut columns of the pseudo-inverse.
fn cat_gain_oracle(lens: &[usize]) -> f64 {
    let p: usize = lens.iter().sum();
    let a = [[2.0, 1.0], [1.0, 1.0]];
    let mut j = DMatrix::<f64>::zeros(2 * p, 2 * (p + 1));
    for k in 0..p {
        for i in 0..2 {
            j[(2 * k + i, 2 * (k + 1) + i)] = 1.0;
            for c in 0..2 {
                j[(2 * k + i, 2 * k + c)] = -a[i][c];
            }
        }
    }
    let pinv = j.pseudo_inverse(1e-13).unwrap();
    let cuts: Vec<usize> = lens.iter().scan(0, |c, n| {
        *c += n;
        Some(*c - 1)
    }).take(lens.len() - 1).collect();
    (0..=p)
        .map(|row| {
            cuts.iter()
                .map(|&k| pinv.view((2 * row, 2 * k), (2, 2)).singular_values()[0])
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

#[test]
fn shadowing_constant_against_linear_oracle() {
    let sys = SystemSpec::CatMap;
    let cfg = ShadowProbeConfig {
        deltas: vec![1e-6, 5e-7, 0.0],
        trials: 40,
        len_range: (15, 15),
        segments: 5,
        seed: 4,
        opts: ShadowOptions::default(),
    };
    let c = estimate_shadowing_constant(&sys, &cfg).unwrap();
    assert_eq!(c.d0_hat, 1e-6);
    assert!(c.per_delta[2].eps.iter().all(|e| *e == Some(0.0)));
    let exact = cat_gain_oracle(&[15; 5]);
    assert!(c.l_hat <= exact * (1.0 + 1e-6), "{} vs {exact}", c.l_hat);
    assert!(c.l_hat >= exact / 2.0, "{} vs {exact}", c.l_hat);
    // Halving delta halves the response.
    for (a, b) in c.per_delta[0].eps.iter().zip(&c.per_delta[1].eps) {
        let (a, b) = (a.unwrap(), b.unwrap());
        assert!(b <= 1.1 * a);
        assert_relative_eq!(b, 0.5 * a, max_relative = 1e-4);
    }
}

#[test]
fn density_probe_on_cat_map() {
    let sys = SystemSpec::CatMap;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sample: Vec<StatePoint> = (0..40).map(|_| pt(&[rng.random(), rng.random()])).collect();
    let probe = periodic_density_probe(&sys, &sample, 30, 1e-2, &ShadowOptions::default()).unwrap();
    assert_eq!(probe.fraction, Some(1.0));
    // Each orbit found is an exact rational periodic orbit: (A^n - I) z is an
    // integer vector.
    for p in &probe.points {
        let n = p.period.unwrap();
        let x = p.point;
        let back = n / 2;
        let mut y = x;
        for _ in 0..back {
            y = sys.inverse_step(&y).unwrap();
        }
        let r = close_orbit(&sys, &y, n, &ShadowOptions::default()).unwrap();
        let z = r.point().coords();
        let a = cat_power(n);
        let img = [
            (a[0][0] - 1) as f64 * z[0] + a[0][1] as f64 * z[1],
            a[1][0] as f64 * z[0] + (a[1][1] - 1) as f64 * z[1],
        ];
        let scale = (a[0][0] + a[0][1]) as f64;
        for v in img {
            assert!((v - v.round()).abs() < 1e-14 * scale.max(1.0) * 8.0, "n={n}");
        }
    }
    let periodic = [pt(&[0.0, 0.0]), pt(&[0.5, 0.5]), pt(&[0.2, 0.4])];
    let probe = periodic_density_probe(&sys, &periodic, 30, 1e-10, &ShadowOptions::default()).unwrap();
    assert_eq!(probe.fraction, Some(1.0));
}

#[test]
fn density_probe_skips_neutral_fiber() {
    let sys = SystemSpec::Product24;
    let sample = [pt(&[0.5, 0.1, 0.2]), pt(&[0.0, 0.1, 0.2])];
    let probe = periodic_density_probe(&sys, &sample, 10, 1e-2, &ShadowOptions::default()).unwrap();
    assert_eq!((probe.skipped, probe.passed), (1, 1));
    assert_eq!(probe.points[0].status, ProbeStatus::Skipped);
    assert_eq!(probe.fraction, Some(1.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reported_eps_is_honest(seed in 0u64..1000, periodic in any::<bool>(), delta_exp in 4i32..10) {
        let sys = SystemSpec::CatMap;
        let delta = 10f64.powi(-delta_exp);
        let open = cat_pseudo(seed, 3, (1, 3), delta);
        let p = if periodic { PseudoOrbit::new(open.segments().to_vec(), true, 2.0).unwrap() } else { open };
        let r = solve_shadow(&sys, &p, &ShadowOptions::default()).unwrap();
        let (check, res) = verify_shadowing_orbit(&sys, &r.orbit, &p, r.eps_achieved + 1e-12).unwrap();
        prop_assert!(check.pass && res < 1e-12);
        // Short windows: iterating the point itself stays within rounding.
        let direct = verify_shadowing(&sys, r.point(), &p, r.eps_achieved + 1e-12).unwrap();
        prop_assert!(direct.pass, "{:?}", direct);
        if periodic {
            let n = r.period.unwrap();
            let back = sys.iterate_to(r.point(), n).unwrap();
            prop_assert!(torus_distance(&back, r.point()).unwrap() < 10.0 * 1e-12);
        }
    }
}
