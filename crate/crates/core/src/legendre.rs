//! Legendre polynomials, associated Legendre functions and real spherical
//! harmonics.
//!
//! Conventions: `P_ℓm(x) = (-1)^m (1-x²)^{m/2} dᵐ/dxᵐ P_ℓ(x)` (Condon–Shortley
//! phase included) and
//!
//! ```text
//! Y_ℓm  = √2 N_ℓm P_ℓm(cos θ) cos(mφ)     m > 0
//! Y_ℓ0  =    N_ℓ0 P_ℓ(cos θ)
//! Y_ℓm  = √2 N_ℓ|m| P_ℓ|m|(cos θ) sin(|m|φ)   m < 0
//! N_ℓm  = √((2ℓ+1)/(4π) · (ℓ-m)!/(ℓ+m)!)
//! ```
//!
//! Harmonic coefficient vectors are ordered ℓ-major with `m` ascending from
//! `-ℓ`, i.e. `(ℓ, m)` lives at [`harmonic_index`]`(ℓ, m) = ℓ² + ℓ + m`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use crate::error::domain;
use crate::math;
use crate::sphere::{EvalGrid, GridLayout, UnitVector};
use crate::{Result, FOUR_PI};

fn check_unit_interval(x: f64) -> Result<()> {
    if x.abs() <= 1.0 {
        Ok(())
    } else {
        Err(domain!("argument {x} outside [-1, 1]"))
    }
}

/// `P_ℓ(x)` by the three-term recurrence.
pub fn legendre_p(ell: usize, x: f64) -> Result<f64> {
    check_unit_interval(x)?;
    Ok(legendre_p_unchecked(ell, x))
}

pub(crate) fn legendre_p_unchecked(ell: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if ell == 0 {
        return prev;
    }
    for l in 1..ell {
        let lf = l as f64;
        let next = ((2.0 * lf + 1.0) * x * cur - lf * prev) / (lf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `Σ_ℓ c_ℓ P_ℓ(x)` for a finite coefficient list.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LegendreSeries {
    coeffs: Vec<f64>,
}

impl LegendreSeries {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Highest ℓ stored (trailing zeros included); `None` when empty.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        check_unit_interval(x)?;
        Ok(self.eval_unchecked(x))
    }

    /// Clenshaw backward recurrence; callers guarantee `|x| ≤ 1`.
    pub fn eval_unchecked(&self, x: f64) -> f64 {
        // P_{k+1} = α_k P_k + β_{k+1} P_{k-1}, α_k = (2k+1)x/(k+1),
        // β_{k+1} = -(k+1)/(k+2); the sum is b_0 because P_1 = α_0 P_0.
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            let kf = k as f64;
            let alpha = (2.0 * kf + 1.0) * x / (kf + 1.0);
            let beta = -(kf + 1.0) / (kf + 2.0);
            let b0 = c + alpha * b1 + beta * b2;
            b2 = b1;
            b1 = b0;
        }
        b1
    }
}

/// Unnormalised `P_ℓm(x)` with the Condon–Shortley phase.
///
/// Overflows for large `m` (roughly `m > 150`); use [`real_sph_harm`] or
/// [`NormalizedAssocTable`] where normalised values are wanted.
pub fn assoc_legendre(ell: usize, m: usize, x: f64) -> Result<f64> {
    if m > ell {
        return Err(domain!("order m = {m} exceeds degree ℓ = {ell}"));
    }
    check_unit_interval(x)?;
    let somx2 = math::sqrt((1.0 - x) * (1.0 + x));
    let mut pmm = 1.0;
    let mut fact = 1.0;
    for _ in 0..m {
        pmm *= -fact * somx2;
        fact += 2.0;
    }
    if ell == m {
        return Ok(pmm);
    }
    let mut pmmp1 = x * (2.0 * m as f64 + 1.0) * pmm;
    for l in (m + 2)..=ell {
        let lf = l as f64;
        let mf = m as f64;
        let pll = (x * (2.0 * lf - 1.0) * pmmp1 - (lf + mf - 1.0) * pmm) / (lf - mf);
        pmm = pmmp1;
        pmmp1 = pll;
    }
    Ok(pmmp1)
}

/// `ln N_ℓm`, summed in log space so large degrees do not overflow.
pub fn log_norm_factor(ell: usize, m: usize) -> Result<f64> {
    if m > ell {
        return Err(domain!("order m = {m} exceeds degree ℓ = {ell}"));
    }
    let log_ratio: f64 = ((ell - m + 1)..=(ell + m)).map(|i| math::ln(i as f64)).sum();
    Ok(0.5 * (math::ln((2.0 * ell as f64 + 1.0) / FOUR_PI) - log_ratio))
}

/// Position of `(ℓ, m)` in an ℓ-major harmonic coefficient vector.
pub const fn harmonic_index(ell: usize, m: isize) -> usize {
    ((ell * ell + ell) as isize + m) as usize
}

/// Number of real harmonics with degree at most `lmax`.
pub const fn harmonic_count(lmax: usize) -> usize {
    (lmax + 1) * (lmax + 1)
}

/// All normalised `P̄_ℓm(x) = N_ℓm P_ℓm(x)` for `0 ≤ m ≤ ℓ ≤ lmax`.
#[derive(Debug, Clone)]
pub struct NormalizedAssocTable {
    lmax: usize,
    values: Vec<f64>,
}

impl NormalizedAssocTable {
    /// `sin_theta` is passed separately so callers holding Cartesian
    /// coordinates keep full precision near the poles.
    pub fn new(lmax: usize, cos_theta: f64, sin_theta: f64) -> Self {
        let mut values = vec![0.0; (lmax + 1) * (lmax + 2) / 2];
        let idx = |l: usize, m: usize| l * (l + 1) / 2 + m;
        let x = cos_theta;
        let mut pmm = 1.0 / math::sqrt(FOUR_PI);
        for m in 0..=lmax {
            if m > 0 {
                let mf = m as f64;
                pmm *= -math::sqrt((2.0 * mf + 1.0) / (2.0 * mf)) * sin_theta;
            }
            values[idx(m, m)] = pmm;
            if m == lmax {
                break;
            }
            let mf = m as f64;
            let mut p_prev = pmm;
            let mut p_cur = math::sqrt(2.0 * mf + 3.0) * x * pmm;
            values[idx(m + 1, m)] = p_cur;
            for l in (m + 2)..=lmax {
                let lf = l as f64;
                let a = math::sqrt((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf));
                let b = math::sqrt(
                    ((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0),
                );
                let p_next = a * (x * p_cur - b * p_prev);
                values[idx(l, m)] = p_next;
                p_prev = p_cur;
                p_cur = p_next;
            }
        }
        Self { lmax, values }
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    /// `P̄_ℓm`; requires `m ≤ ℓ ≤ lmax`.
    #[inline]
    pub fn get(&self, ell: usize, m: usize) -> f64 {
        self.values[ell * (ell + 1) / 2 + m]
    }
}

fn polar_parts(s: &UnitVector) -> (f64, f64, f64, f64) {
    let sin_theta = math::sqrt(s.x() * s.x() + s.y() * s.y());
    let (cos_phi, sin_phi) = if sin_theta > 0.0 {
        (s.x() / sin_theta, s.y() / sin_theta)
    } else {
        (1.0, 0.0)
    };
    (s.z(), sin_theta, cos_phi, sin_phi)
}

/// Real spherical harmonic `Y_ℓm(s)`.
pub fn real_sph_harm(ell: usize, m: isize, s: &UnitVector) -> Result<f64> {
    if m.unsigned_abs() > ell {
        return Err(domain!("|m| = {} exceeds degree ℓ = {ell}", m.unsigned_abs()));
    }
    let am = m.unsigned_abs();
    let (ct, st, _, _) = polar_parts(s);
    // Normalised recurrence in ℓ at fixed |m|.
    let mut pmm = 1.0 / math::sqrt(FOUR_PI);
    for k in 1..=am {
        let kf = k as f64;
        pmm *= -math::sqrt((2.0 * kf + 1.0) / (2.0 * kf)) * st;
    }
    let mf = am as f64;
    let mut p = pmm;
    if ell > am {
        let mut p_prev = pmm;
        p = math::sqrt(2.0 * mf + 3.0) * ct * pmm;
        for l in (am + 2)..=ell {
            let lf = l as f64;
            let a = math::sqrt((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf));
            let b = math::sqrt(((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0));
            let next = a * (ct * p - b * p_prev);
            p_prev = p;
            p = next;
        }
    }
    if m == 0 {
        return Ok(p);
    }
    let phi = math::atan2(s.y(), s.x());
    let angle = mf * phi;
    Ok(if m > 0 {
        SQRT_2 * p * math::cos(angle)
    } else {
        SQRT_2 * p * math::sin(angle)
    })
}

/// `cos(mφ)` and `sin(mφ)` for `m = 0..=mmax` by angle addition.
fn trig_multiples(cos_phi: f64, sin_phi: f64, mmax: usize, cos_out: &mut Vec<f64>, sin_out: &mut Vec<f64>) {
    cos_out.clear();
    sin_out.clear();
    let (mut c, mut s) = (1.0, 0.0);
    for _ in 0..=mmax {
        cos_out.push(c);
        sin_out.push(s);
        let nc = c * cos_phi - s * sin_phi;
        let ns = s * cos_phi + c * sin_phi;
        c = nc;
        s = ns;
    }
}

/// Every `Y_ℓm(s)` with `ℓ ≤ lmax`, in [`harmonic_index`] order.
pub fn harmonics_at(s: &UnitVector, lmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; harmonic_count(lmax)];
    fill_harmonics(s, lmax, &mut out);
    out
}

pub(crate) fn fill_harmonics(s: &UnitVector, lmax: usize, out: &mut [f64]) {
    let (ct, st, cp, sp) = polar_parts(s);
    let table = NormalizedAssocTable::new(lmax, ct, st);
    let mut cos_m = Vec::with_capacity(lmax + 1);
    let mut sin_m = Vec::with_capacity(lmax + 1);
    trig_multiples(cp, sp, lmax, &mut cos_m, &mut sin_m);
    for ell in 0..=lmax {
        let base = ell * ell + ell;
        out[base] = table.get(ell, 0);
        for m in 1..=ell {
            let p = SQRT_2 * table.get(ell, m);
            out[base + m] = p * cos_m[m];
            out[base - m] = p * sin_m[m];
        }
    }
}

/// Evaluates `Σ_{ℓ≤lmax} Σ_m a_ℓm Y_ℓm` on every grid point.
///
/// Equirectangular grids are synthesised ring by ring (one Legendre table
/// per colatitude); other layouts point by point.
pub fn synthesize(coeffs: &[f64], lmax: usize, grid: &EvalGrid) -> Result<Vec<f64>> {
    if coeffs.len() != harmonic_count(lmax) {
        return Err(domain!(
            "expected {} harmonic coefficients for lmax {lmax}, got {}",
            harmonic_count(lmax),
            coeffs.len()
        ));
    }
    match grid.layout() {
        GridLayout::Equirectangular { n_theta, n_phi } => Ok(synthesize_rings(coeffs, lmax, grid, n_theta, n_phi)),
        GridLayout::List => {
            let mut y = vec![0.0; coeffs.len()];
            Ok(grid
                .points()
                .iter()
                .map(|s| {
                    fill_harmonics(s, lmax, &mut y);
                    y.iter().zip(coeffs).map(|(a, b)| a * b).sum()
                })
                .collect())
        }
    }
}

fn synthesize_rings(coeffs: &[f64], lmax: usize, grid: &EvalGrid, n_theta: usize, n_phi: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_theta * n_phi);
    let mut fc = vec![0.0; lmax + 1];
    let mut fs = vec![0.0; lmax + 1];
    let mut cos_m = Vec::with_capacity(lmax + 1);
    let mut sin_m = Vec::with_capacity(lmax + 1);
    for row in grid.points().chunks(n_phi) {
        let (ct, st, _, _) = polar_parts(&row[0]);
        let table = NormalizedAssocTable::new(lmax, ct, st);
        for m in 0..=lmax {
            let (mut c, mut s) = (0.0, 0.0);
            for ell in m..=lmax {
                let p = table.get(ell, m);
                let base = ell * ell + ell;
                c += coeffs[base + m] * p;
                if m > 0 {
                    s += coeffs[base - m] * p;
                }
            }
            let scale = if m > 0 { SQRT_2 } else { 1.0 };
            fc[m] = scale * c;
            fs[m] = scale * s;
        }
        for point in row {
            let (_, _, cp, sp) = polar_parts(point);
            trig_multiples(cp, sp, lmax, &mut cos_m, &mut sin_m);
            let mut v = fc[0];
            for m in 1..=lmax {
                v += fc[m] * cos_m[m] + fs[m] * sin_m[m];
            }
            out.push(v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::point_from_angles;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    // Explicit closed forms, independent of the recurrences.
    fn p2(x: f64) -> f64 {
        0.5 * (3.0 * x * x - 1.0)
    }
    fn p3(x: f64) -> f64 {
        0.5 * (5.0 * x * x * x - 3.0 * x)
    }

    #[test]
    fn low_degree_values() {
        assert_eq!(legendre_p(0, 0.3).unwrap(), 1.0);
        assert_eq!(legendre_p(1, -0.5).unwrap(), -0.5);
        assert!((legendre_p(2, 0.5).unwrap() + 0.125).abs() < 1e-15);
        for i in 0..=20 {
            let x = -1.0 + 0.1 * i as f64;
            assert!((legendre_p(3, x).unwrap() - p3(x)).abs() < 1e-14);
            assert!((legendre_p(2, x).unwrap() - p2(x)).abs() < 1e-14);
        }
        assert!(legendre_p(2, 1.0 + 1e-12).is_err());
    }

    #[test]
    fn p7_maximum_is_one_at_endpoints() {
        let n = 10_000;
        let mut best = (0.0f64, 0.0f64);
        for i in 0..=n {
            let x = -1.0 + 2.0 * i as f64 / n as f64;
            let v = legendre_p(7, x).unwrap().abs();
            if v > best.0 {
                best = (v, x);
            }
        }
        assert!((best.0 - 1.0).abs() < 1e-14);
        assert!(best.1.abs() == 1.0);
    }

    #[test]
    fn series_basics() {
        let s = LegendreSeries::new(vec![0.0, 0.0, 1.0]);
        assert!((s.eval(0.5).unwrap() + 0.125).abs() < 1e-15);
        let c = LegendreSeries::new(vec![2.5]);
        for x in [-1.0, -0.3, 0.0, 0.9, 1.0] {
            assert_eq!(c.eval(x).unwrap(), 2.5);
        }
        assert_eq!(LegendreSeries::default().eval(0.2).unwrap(), 0.0);
        assert!(s.eval(-1.5).is_err());
    }

    fn naive_sum(coeffs: &[f64], x: f64) -> (f64, f64) {
        // Forward recurrence, term by term; also returns Σ|c_ℓ P_ℓ(x)|.
        let (mut prev, mut cur) = (1.0, x);
        let (mut sum, mut abs) = (0.0, 0.0);
        for (l, c) in coeffs.iter().enumerate() {
            let p = if l == 0 { 1.0 } else if l == 1 { x } else {
                let lf = (l - 1) as f64;
                let next = ((2.0 * lf + 1.0) * x * cur - lf * prev) / (lf + 1.0);
                prev = cur;
                cur = next;
                next
            };
            sum += c * p;
            abs += (c * p).abs();
        }
        (sum, abs)
    }

    fn lcg(state: &mut u64) -> f64 {
        *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*state >> 11) as f64) / (1u64 << 53) as f64 * 2.0 - 1.0
    }

    #[test]
    fn clenshaw_matches_naive_summation() {
        let mut st = 7u64;
        for &len in &[65usize, 513, 4097] {
            let coeffs: Vec<f64> = (0..len).map(|_| lcg(&mut st)).collect();
            let s = LegendreSeries::new(coeffs.clone());
            for _ in 0..50 {
                let x = lcg(&mut st);
                let (naive, scale) = naive_sum(&coeffs, x);
                let got = s.eval(x).unwrap();
                assert!((got - naive).abs() <= 1e-12 * scale, "len {len} x {x}: {got} vs {naive}");
            }
        }
    }

    #[test]
    fn associated_legendre_values() {
        for l in 0..=10 {
            for i in 0..=20 {
                let x = -1.0 + 0.1 * i as f64;
                let a = assoc_legendre(l, 0, x).unwrap();
                assert!((a - legendre_p(l, x).unwrap()).abs() < 1e-13);
            }
        }
        assert!((assoc_legendre(1, 1, 0.0).unwrap() + 1.0).abs() < 1e-15);
        assert!((assoc_legendre(2, 2, 0.0).unwrap() - 3.0).abs() < 1e-15);
        // P_21 = -3x√(1-x²)
        let x: f64 = 0.3;
        assert!((assoc_legendre(2, 1, x).unwrap() + 3.0 * x * (1.0 - x * x).sqrt()).abs() < 1e-14);
        assert!(assoc_legendre(2, 3, 0.1).is_err());
    }

    #[test]
    fn normalized_table_matches_unnormalized_times_factor() {
        let x: f64 = -0.37;
        let t = NormalizedAssocTable::new(30, x, (1.0 - x * x).sqrt());
        for l in 0..=30 {
            for m in 0..=l {
                let n = log_norm_factor(l, m).unwrap().exp();
                let want = n * assoc_legendre(l, m, x).unwrap();
                assert!((t.get(l, m) - want).abs() <= 1e-12 * (1.0 + want.abs()), "{l} {m}");
            }
        }
    }

    #[test]
    fn log_norm_is_finite_at_high_degree() {
        let v = log_norm_factor(255, 255).unwrap();
        assert!(v.is_finite() && v < -500.0);
    }

    #[test]
    fn spherical_harmonic_values() {
        let s = point_from_angles(1.1, 2.3).unwrap();
        assert!((real_sph_harm(0, 0, &s).unwrap() - 0.282_094_791_773_878_14).abs() < 1e-15);
        let n = UnitVector::NORTH;
        assert!((real_sph_harm(1, 0, &n).unwrap() - (3.0 / (4.0 * PI)).sqrt()).abs() < 1e-15);
        assert!(real_sph_harm(2, -3, &n).is_err());
        // Y_11 = -√(3/4π) sinθ cosφ with the conventions above.
        let (th, ph): (f64, f64) = (1.1, 2.3);
        let want = -(3.0 / (4.0 * PI)).sqrt() * th.sin() * ph.cos();
        assert!((real_sph_harm(1, 1, &s).unwrap() - want).abs() < 1e-14);
        let want = -(3.0 / (4.0 * PI)).sqrt() * th.sin() * ph.sin();
        assert!((real_sph_harm(1, -1, &s).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn harmonic_table_agrees_with_single_evaluations() {
        let s = point_from_angles(0.4, 5.0).unwrap();
        let all = harmonics_at(&s, 12);
        for l in 0..=12usize {
            for m in -(l as isize)..=(l as isize) {
                let one = real_sph_harm(l, m, &s).unwrap();
                assert!((all[harmonic_index(l, m)] - one).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn sum_of_squares_at_degree_five() {
        let s = point_from_angles(2.0, 0.7).unwrap();
        let y = harmonics_at(&s, 5);
        let sum: f64 = (-5isize..=5).map(|m| y[harmonic_index(5, m)].powi(2)).sum();
        assert!((sum - 11.0 / (4.0 * PI)).abs() < 1e-13);
    }

    #[test]
    fn ring_and_pointwise_synthesis_agree() {
        let lmax = 9;
        let mut st = 3u64;
        let coeffs: Vec<f64> = (0..harmonic_count(lmax)).map(|_| lcg(&mut st)).collect();
        let grid = EvalGrid::equirectangular(7, 11).unwrap();
        let rings = synthesize(&coeffs, lmax, &grid).unwrap();
        let list = EvalGrid::from_points(grid.points().to_vec());
        let points = synthesize(&coeffs, lmax, &list).unwrap();
        for (a, b) in rings.iter().zip(&points) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(synthesize(&coeffs[1..], lmax, &grid).is_err());
    }

    fn any_unit() -> impl Strategy<Value = UnitVector> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
            .prop_filter("non-degenerate", |(x, y, z)| x * x + y * y + z * z > 1e-3)
            .prop_map(|(x, y, z)| UnitVector::normalized(x, y, z).unwrap())
    }

    proptest! {
        #[test]
        fn addition_theorem(s in any_unit(), t in any_unit(), ell in 0usize..=32) {
            let ys = harmonics_at(&s, ell);
            let yt = harmonics_at(&t, ell);
            let lhs: f64 = (-(ell as isize)..=(ell as isize))
                .map(|m| ys[harmonic_index(ell, m)] * yt[harmonic_index(ell, m)])
                .sum();
            let rhs = (2.0 * ell as f64 + 1.0) / (4.0 * PI) * legendre_p(ell, s.dot(&t).clamp(-1.0, 1.0)).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10);
        }
    }
}
