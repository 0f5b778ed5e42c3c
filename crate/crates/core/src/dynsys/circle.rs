//! The circle map of the product example: an increasing degree-one map with
//! fixed points 0 (attracting, g' = 1/2) and 1/2 (repelling, g' = (3+sqrt5)/2).

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use super::point::{reduce, round_fast};

pub const SQRT5: f64 = 2.236_067_977_499_789_7;
/// Coefficient of `sin(2 pi x)` in `g'`.
pub const G_B: f64 = -(2.0 + SQRT5) / 4.0;
/// Coefficient of `sin(4 pi x)` in `g'`.
pub const G_C: f64 = SQRT5 / 4.0;

/// `1.5 * 2^52`: adding it rounds to an integer held in the low mantissa bits.
const ROUND_MAGIC: f64 = 6_755_399_441_055_744.0;

/// Reduction to `r` in `[-pi/4, pi/4]` and the quadrant `q` with
/// `2 pi x = r + q pi / 2 (mod 2 pi)`; exact for |x| < 2^49.
#[inline]
fn quadrant(x: f64) -> (f64, u64) {
    let y = 4.0 * x;
    let big = y + ROUND_MAGIC;
    let n = big - ROUND_MAGIC;
    ((y - n) * FRAC_PI_2, big.to_bits() & 3)
}

/// `(sin 2 pi x, cos 2 pi x)` with exact values at multiples of 1/4.
#[inline]
pub fn sin_cos_2pi(x: f64) -> (f64, f64) {
    let x = x - round_fast(x);
    let (r, q) = quadrant(x);
    let (s, c) = r.sin_cos();
    // Branch-free selection: quadrants of chaotic orbits are unpredictable.
    let (a, b) = if q & 1 == 1 { (c, s) } else { (s, c) };
    let sa = if q & 2 == 2 { -1.0 } else { 1.0 };
    let sb = if q == 1 || q == 2 { -1.0 } else { 1.0 };
    (sa * a, sb * b)
}

/// `cos 2 pi x`, exact at multiples of 1/4.
#[inline]
pub fn cos_2pi(x: f64) -> f64 {
    sin_cos_2pi(x).1
}

/// Lift of g to the reals (no reduction).
#[inline]
fn lift_with(x: f64, s: f64, c: f64) -> f64 {
    x + (G_B / (2.0 * PI)) * s + (G_C / (4.0 * PI)) * (2.0 * s * c)
}

#[inline]
fn deriv_with(c: f64) -> f64 {
    1.0 + G_B * c + G_C * (2.0 * c * c - 1.0)
}

#[inline]
pub fn g(x: f64) -> f64 {
    let (s, c) = sin_cos_2pi(x);
    reduce(lift_with(x, s, c))
}

#[inline]
pub fn g_prime(x: f64) -> f64 {
    deriv_with(cos_2pi(x))
}

/// `(g(x), g'(x))` from one trigonometric evaluation.
#[inline]
pub fn g_and_prime(x: f64) -> (f64, f64) {
    let (s, c) = sin_cos_2pi(x);
    (reduce(lift_with(x, s, c)), deriv_with(c))
}

/// Nodes of the interpolation table for [`g_inverse`].
const INV_TABLE_SIZE: usize = 1 << 14;

/// `h(y) = g^{-1}(y)` with `h'` and `h''` at `y_i = i / INV_TABLE_SIZE`.
fn inverse_table() -> &'static [[f64; 3]] {
    static TABLE: OnceLock<Vec<[f64; 3]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..=INV_TABLE_SIZE)
            .map(|i| {
                let y = i as f64 / INV_TABLE_SIZE as f64;
                let u = match i {
                    0 => 0.0,
                    INV_TABLE_SIZE => 1.0,
                    _ => solve_inverse(y, y),
                };
                let (s, c) = sin_cos_2pi(u);
                let d1 = 1.0 / deriv_with(c);
                let g2 = -2.0 * PI * (G_B * s + 4.0 * G_C * s * c);
                [u, d1, -g2 * d1 * d1 * d1]
            })
            .collect()
    })
}

/// Safeguarded Newton for `G(u) = x` on the lift, `x` in `(0, 1)`, from `u0`.
fn solve_inverse(x: f64, u0: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut u = u0;
    for _ in 0..200 {
        let (s, c) = sin_cos_2pi(u);
        let r = lift_with(u, s, c) - x;
        if r == 0.0 {
            break;
        }
        if r < 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        let mut next = u - r / deriv_with(c);
        if next == u {
            break;
        }
        let newton = next > lo && next < hi;
        if !newton {
            next = 0.5 * (lo + hi);
        }
        let step = (next - u).abs();
        u = next;
        // Quadratic convergence: the error after a Newton step of size s is
        // below 40 s^2 (|g''| / 2g' < 40), i.e. at rounding level once s < 1e-9.
        if (newton && step < 1e-9) || hi - lo < 4.0 * f64::EPSILON {
            break;
        }
    }
    u
}

/// Solves `g(u) = x` on the circle; returns `(u, g'(u))`.
///
/// Quintic Hermite interpolation of a table of the inverse; its error is
/// below rounding level at this node spacing.
pub fn g_inverse_and_prime(x: f64) -> (f64, f64) {
    let x = reduce(x);
    let table = inverse_table();
    let t = x * INV_TABLE_SIZE as f64;
    let i = (t as usize).min(INV_TABLE_SIZE - 1);
    let h = 1.0 / INV_TABLE_SIZE as f64;
    let s = t - i as f64;
    let [p0, m0, a0] = table[i];
    let [p1, m1, a1] = table[i + 1];
    let (s2, s3) = (s * s, s * s * s);
    let (s4, s5) = (s3 * s, s3 * s2);
    let u = p0
        + (p1 - p0) * (10.0 * s3 - 15.0 * s4 + 6.0 * s5)
        + h * (m0 * (s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5) + m1 * (-4.0 * s3 + 7.0 * s4 - 3.0 * s5))
        + 0.5 * h * h * (a0 * (s2 - 3.0 * s3 + 3.0 * s4 - s5) + a1 * (s3 - 2.0 * s4 + s5));
    let u = reduce(u);
    (u, deriv_with(cos_2pi(u)))
}

pub fn g_inverse(x: f64) -> f64 {
    g_inverse_and_prime(x).0
}
