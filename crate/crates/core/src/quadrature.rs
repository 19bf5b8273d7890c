//! Per-level quadrature rules on S² and their verification.
//!
//! Level `j` needs a positive-weight rule that integrates every spherical
//! polynomial of degree at most `2(2^j - 1)` exactly. Three sources are
//! provided:
//!
//! * [`gauss_product_rule`]: Gauss–Legendre nodes in `cos θ` times
//!   equispaced longitudes. Exact by construction; nodes cluster at the poles.
//! * [`equal_area_rule`]: rings of roughly equal-area cells with
//!   weights corrected to exactness. Nodes stay well separated.
//! * [`load_tdesign`]: equal-weight spherical designs read from text.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use crate::error::domain;
use crate::legendre::{fill_harmonics, harmonic_count, harmonic_index, NormalizedAssocTable};
use crate::math;
use crate::sphere::{mesh_quantities, SphericalAngles, UnitVector};
use crate::{Error, Result, FOUR_PI};

/// Polynomial degree that level `j` must integrate exactly, `2(2^j - 1)`.
pub const fn required_degree(level: u32) -> usize {
    2 * ((1usize << level) - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureSource {
    GaussProduct,
    EqualArea,
    TDesign,
}

impl QuadratureSource {
    pub fn name(&self) -> &'static str {
        match self {
            QuadratureSource::GaussProduct => "gauss-product",
            QuadratureSource::EqualArea => "equal-area",
            QuadratureSource::TDesign => "t-design",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureNode {
    pub weight: f64,
    pub point: UnitVector,
}

/// Nodes `(λ_jk, ξ_jk)` of one level.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureLevel {
    level: u32,
    nodes: Vec<QuadratureNode>,
    exactness_degree: usize,
    source: QuadratureSource,
}

impl QuadratureLevel {
    /// Validates positivity of the weights; exactness is the caller's claim.
    pub fn new(
        level: u32,
        nodes: Vec<QuadratureNode>,
        exactness_degree: usize,
        source: QuadratureSource,
    ) -> Result<Self> {
        if nodes.is_empty() {
            return Err(domain!("quadrature level {level} has no nodes"));
        }
        if let Some(bad) = nodes.iter().position(|n| !(n.weight > 0.0) || !n.weight.is_finite()) {
            return Err(domain!(
                "quadrature weight {} at node {bad} is not strictly positive",
                nodes[bad].weight
            ));
        }
        Ok(Self {
            level,
            nodes,
            exactness_degree,
            source,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn nodes(&self) -> &[QuadratureNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn exactness_degree(&self) -> usize {
        self.exactness_degree
    }

    pub fn source(&self) -> QuadratureSource {
        self.source
    }

    pub fn total_weight(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).sum()
    }

    pub fn max_weight(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).fold(0.0, f64::max)
    }

    pub fn points(&self) -> Vec<UnitVector> {
        self.nodes.iter().map(|n| n.point).collect()
    }
}

/// `Σ_k λ_k f(ξ_k)`.
pub fn integrate<F: FnMut(&UnitVector) -> f64>(mut f: F, q: &QuadratureLevel) -> f64 {
    q.nodes.iter().map(|n| n.weight * f(&n.point)).sum()
}

/// `(P_n(x), P_n'(x))` for `n ≥ 1`, `|x| < 1`.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes descending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = math::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        weights[i] = w;
        nodes[n - 1 - i] = -x;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Product rule of `2^j` Gauss–Legendre nodes in `cos θ` and `2^{j+1}`
/// equispaced longitudes: `n_j = 2^{2j+1}` nodes, exact to degree
/// `2^{j+1} - 1 ≥ 2(2^j - 1)`.
pub fn gauss_product_rule(level: u32) -> QuadratureLevel {
    let n_lat = 1usize << level;
    let n_lon = 2 * n_lat;
    let (xs, ws) = gauss_legendre(n_lat);
    let dphi = 2.0 * PI / n_lon as f64;
    let mut nodes = Vec::with_capacity(n_lat * n_lon);
    for (x, w) in xs.iter().zip(&ws) {
        let sin_theta = math::sqrt((1.0 - x) * (1.0 + x));
        for k in 0..n_lon {
            let phi = dphi * k as f64;
            let point = UnitVector::normalized(sin_theta * math::cos(phi), sin_theta * math::sin(phi), *x)
                .expect("unit ring point");
            nodes.push(QuadratureNode {
                weight: w * dphi,
                point,
            });
        }
    }
    QuadratureLevel {
        level,
        nodes,
        exactness_degree: 2 * n_lat - 1,
        source: QuadratureSource::GaussProduct,
    }
}

/// One iso-latitude ring of an equal-area layout.
struct Ring {
    cos_theta: f64,
    sin_theta: f64,
    count: usize,
    /// Longitudes are `2π(k + shift/2)/count`, `shift ∈ {0, 1}`.
    shift: usize,
    /// `cos(πr/count)`, `sin(πr/count)` for `r < 2·count`.
    cos_table: Vec<f64>,
    sin_table: Vec<f64>,
}

impl Ring {
    fn new(theta: f64, count: usize, shift: usize) -> Self {
        let (cos_table, sin_table) = (0..2 * count)
            .map(|r| {
                let a = PI * r as f64 / count as f64;
                (math::cos(a), math::sin(a))
            })
            .unzip();
        Self {
            cos_theta: math::cos(theta),
            sin_theta: math::sin(theta),
            count,
            shift,
            cos_table,
            sin_table,
        }
    }

    #[inline]
    fn angle_index(&self, m: usize, k: usize) -> usize {
        (m * (2 * k + self.shift)) % (2 * self.count)
    }
}

/// Harmonic analysis and synthesis on ring-structured point sets, used to
/// apply the Gram operator of the exactness constraints without forming it.
struct RingTransform {
    lmax: usize,
    rings: Vec<Ring>,
    offsets: Vec<usize>,
    tables: Option<Vec<NormalizedAssocTable>>,
}

impl RingTransform {
    fn new(lmax: usize, rings: Vec<Ring>) -> Self {
        let mut offsets = Vec::with_capacity(rings.len() + 1);
        let mut acc = 0;
        for r in &rings {
            offsets.push(acc);
            acc += r.count;
        }
        offsets.push(acc);
        let table_size = rings.len() * (lmax + 1) * (lmax + 2) / 2;
        let tables = (table_size <= 8_000_000).then(|| {
            rings
                .iter()
                .map(|r| NormalizedAssocTable::new(lmax, r.cos_theta, r.sin_theta))
                .collect()
        });
        Self {
            lmax,
            rings,
            offsets,
            tables,
        }
    }

    fn len(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    fn table(&self, i: usize) -> NormalizedAssocTable {
        match &self.tables {
            Some(t) => t[i].clone(),
            None => NormalizedAssocTable::new(self.lmax, self.rings[i].cos_theta, self.rings[i].sin_theta),
        }
    }

    /// `c_ℓm = Σ_k v_k Y_ℓm(ξ_k)`.
    fn analysis(&self, values: &[f64]) -> Vec<f64> {
        let lmax = self.lmax;
        let mut out = vec![0.0; harmonic_count(lmax)];
        let mut cm = vec![0.0; lmax + 1];
        let mut sm = vec![0.0; lmax + 1];
        for (i, ring) in self.rings.iter().enumerate() {
            let v = &values[self.offsets[i]..self.offsets[i + 1]];
            for m in 0..=lmax {
                let (mut c, mut s) = (0.0, 0.0);
                for (k, vk) in v.iter().enumerate() {
                    let r = ring.angle_index(m, k);
                    c += vk * ring.cos_table[r];
                    s += vk * ring.sin_table[r];
                }
                cm[m] = c;
                sm[m] = s;
            }
            let table = self.table(i);
            for ell in 0..=lmax {
                let base = ell * ell + ell;
                out[base] += table.get(ell, 0) * cm[0];
                for m in 1..=ell {
                    let p = SQRT_2 * table.get(ell, m);
                    out[base + m] += p * cm[m];
                    out[base - m] += p * sm[m];
                }
            }
        }
        out
    }

    /// `v_k = Σ_ℓm a_ℓm Y_ℓm(ξ_k)`.
    fn synthesis(&self, coeffs: &[f64]) -> Vec<f64> {
        let lmax = self.lmax;
        let mut out = vec![0.0; self.len()];
        let mut fc = vec![0.0; lmax + 1];
        let mut fs = vec![0.0; lmax + 1];
        for (i, ring) in self.rings.iter().enumerate() {
            let table = self.table(i);
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
            let v = &mut out[self.offsets[i]..self.offsets[i + 1]];
            for (k, vk) in v.iter_mut().enumerate() {
                let mut acc = fc[0];
                for m in 1..=lmax {
                    let r = ring.angle_index(m, k);
                    acc += fc[m] * ring.cos_table[r] + fs[m] * ring.sin_table[r];
                }
                *vk = acc;
            }
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Exact positive-weight rule on well-separated equal-area rings.
///
/// With `T = 2(2^j - 1)`, the layout has `T + 1` rings at colatitudes
/// `(i + ½)π/(T + 1)`, ring `i` carrying `max(3, round(2(T+1) sin θ_i))`
/// equispaced points (alternate rings shifted by half a cell). Starting
/// from the cell areas `w₀`, the weights are the minimiser of
/// `Σ (w - w₀)²/w₀` subject to exactness for every `Y_ℓm`, `ℓ ≤ T`,
/// found by conjugate gradients on the Gram system. Node separation stays
/// within a constant of the mesh norm, unlike the product rule.
pub fn equal_area_rule(level: u32) -> Result<QuadratureLevel> {
    let degree = required_degree(level);
    let n_rings = degree + 1;
    let dtheta = PI / n_rings as f64;
    let mut rings = Vec::with_capacity(n_rings);
    let mut w0 = Vec::new();
    for i in 0..n_rings {
        let theta = (i as f64 + 0.5) * dtheta;
        let count = (math::round(2.0 * n_rings as f64 * math::sin(theta)) as usize).max(3);
        let area = 2.0 * PI * (math::cos(theta - 0.5 * dtheta) - math::cos(theta + 0.5 * dtheta));
        w0.extend(core::iter::repeat(area / count as f64).take(count));
        rings.push(Ring::new(theta, count, i % 2));
    }
    let transform = RingTransform::new(degree, rings);

    let mut target = vec![0.0; harmonic_count(degree)];
    target[0] = math::sqrt(FOUR_PI);
    let moments = transform.analysis(&w0);
    let rhs: Vec<f64> = target.iter().zip(&moments).map(|(t, m)| t - m).collect();

    let gram = |a: &[f64]| -> Vec<f64> {
        let mut v = transform.synthesis(a);
        for (vk, wk) in v.iter_mut().zip(&w0) {
            *vk *= wk;
        }
        transform.analysis(&v)
    };

    // Conjugate gradients; the Gram operator is close to the identity
    // because w₀ is already a good quadrature.
    let mut x = vec![0.0; rhs.len()];
    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let tol = 1e-28 * FOUR_PI;
    let mut converged = rr <= tol;
    for _ in 0..500 {
        if converged {
            break;
        }
        let ap = gram(&p);
        let alpha = rr / dot(&p, &ap);
        for i in 0..x.len() {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        converged = rr_new <= tol;
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..p.len() {
            p[i] = r[i] + beta * p[i];
        }
    }
    if !converged {
        return Err(Error::Convergence(format!(
            "equal-area weights for level {level}: residual {} after 500 iterations",
            math::sqrt(rr)
        )));
    }
    let correction = transform.synthesis(&x);
    let weights: Vec<f64> = w0.iter().zip(&correction).map(|(w, c)| w + w * c).collect();

    // Independent residual from the final weights.
    let achieved = transform.analysis(&weights);
    let worst = achieved
        .iter()
        .zip(&target)
        .map(|(a, t)| (a - t).abs())
        .fold(0.0, f64::max);
    if worst > 1e-10 {
        return Err(Error::Convergence(format!(
            "equal-area rule for level {level} misses exactness by {worst}"
        )));
    }

    let mut nodes = Vec::with_capacity(weights.len());
    for (i, ring) in transform.rings.iter().enumerate() {
        let theta = (i as f64 + 0.5) * dtheta;
        for k in 0..ring.count {
            let phi = PI * (2 * k + ring.shift) as f64 / ring.count as f64;
            let point = UnitVector::from_angles(SphericalAngles::new(theta, phi)?);
            nodes.push(QuadratureNode {
                weight: weights[transform.offsets[i] + k],
                point,
            });
        }
    }
    QuadratureLevel::new(level, nodes, degree, QuadratureSource::EqualArea)
}

/// Parses an equal-weight spherical design: one `x y z` triple per line,
/// blank lines and `#` comments ignored. Weights are `4π/n`; points are
/// renormalised after checking `| |ξ| - 1 | ≤ 1e-6`. `claimed_degree` is
/// verified with [`verify_exactness`] up to `min(claimed, 2(2^j - 1))`.
pub fn load_tdesign(text: &str, level: u32, claimed_degree: usize) -> Result<QuadratureLevel> {
    let mut points = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 3 coordinates, found {}", fields.len()),
            });
        }
        let mut xyz = [0.0; 3];
        for (slot, field) in xyz.iter_mut().zip(&fields) {
            *slot = field.parse::<f64>().map_err(|e| Error::Parse {
                line: line_no,
                message: format!("`{field}`: {e}"),
            })?;
        }
        let point = UnitVector::with_tolerance(xyz[0], xyz[1], xyz[2], 1e-6).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        points.push(point);
    }
    if points.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "design file contains no points".into(),
        });
    }
    let weight = FOUR_PI / points.len() as f64;
    let nodes = points.into_iter().map(|point| QuadratureNode { weight, point }).collect();
    let q = QuadratureLevel::new(level, nodes, claimed_degree, QuadratureSource::TDesign)?;
    let check = claimed_degree.min(required_degree(level));
    let report = verify_exactness(&q, check);
    if !report.passed {
        let (ell, m) = report.first_failure.unwrap_or((0, 0));
        return Err(domain!(
            "design does not integrate Y_({ell},{m}) exactly (violation {:.3e}); claimed degree {claimed_degree}",
            report.worst_violation
        ));
    }
    Ok(q)
}

/// Outcome of checking `Σ_k λ_k Y_ℓm(ξ_k) = √(4π) δ_ℓ0` for all `ℓ ≤ degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactnessReport {
    pub degree: usize,
    /// `1e-8 · n_j`.
    pub tolerance: f64,
    /// `|Σ_k λ_k Y_ℓm(ξ_k) - √(4π)δ_ℓ0|` in harmonic-index order.
    pub violations: Vec<f64>,
    pub worst_violation: f64,
    pub worst_at: (usize, isize),
    /// Lowest-degree `(ℓ, m)` exceeding the tolerance.
    pub first_failure: Option<(usize, isize)>,
    pub passed: bool,
}

pub fn verify_exactness(q: &QuadratureLevel, degree: usize) -> ExactnessReport {
    let mut sums = vec![0.0; harmonic_count(degree)];
    let mut y = vec![0.0; sums.len()];
    for node in &q.nodes {
        fill_harmonics(&node.point, degree, &mut y);
        for (s, v) in sums.iter_mut().zip(&y) {
            *s += node.weight * v;
        }
    }
    sums[0] -= math::sqrt(FOUR_PI);
    let violations: Vec<f64> = sums.iter().map(|s| s.abs()).collect();
    let tolerance = 1e-8 * q.len() as f64;
    let mut worst_violation = 0.0;
    let mut worst_at = (0, 0);
    let mut first_failure = None;
    for ell in 0..=degree {
        for m in -(ell as isize)..=(ell as isize) {
            let v = violations[harmonic_index(ell, m)];
            if v > worst_violation {
                worst_violation = v;
                worst_at = (ell, m);
            }
            if !(v <= tolerance) && first_failure.is_none() {
                first_failure = Some((ell, m));
            }
        }
    }
    ExactnessReport {
        degree,
        tolerance,
        violations,
        worst_violation,
        worst_at,
        passed: first_failure.is_none(),
        first_failure,
    }
}

/// Measured counterparts of the quadrature assumptions for one level.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureReport {
    pub level: u32,
    pub source: QuadratureSource,
    pub node_count: usize,
    pub max_weight: f64,
    pub mesh_norm: f64,
    pub min_separation: f64,
    /// Constants the bounds were checked against.
    pub weight_constant: f64,
    pub count_constant: f64,
    /// `max λ_jk ≤ c·2^{-2j}`.
    pub weight_bound_ok: bool,
    /// `n_j ≤ C·2^{2j}`.
    pub count_bound_ok: bool,
    /// `h_j ≤ min_{k≠k'} d(ξ_jk, ξ_jk')`.
    pub mesh_ratio_ok: bool,
}

pub fn quadrature_report(q: &QuadratureLevel, weight_constant: f64, count_constant: f64) -> Result<QuadratureReport> {
    let scale = math::pow(2.0, 2.0 * q.level as f64);
    let max_weight = q.max_weight();
    let (mesh_norm, min_separation) = if q.len() >= 2 {
        let m = mesh_quantities(&q.points())?;
        (m.mesh_norm, m.min_separation)
    } else {
        (PI, PI)
    };
    Ok(QuadratureReport {
        level: q.level,
        source: q.source,
        node_count: q.len(),
        max_weight,
        mesh_norm,
        min_separation,
        weight_constant,
        count_constant,
        weight_bound_ok: max_weight <= weight_constant / scale,
        count_bound_ok: q.len() as f64 <= count_constant * scale,
        mesh_ratio_ok: mesh_norm <= min_separation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::legendre::real_sph_harm;

    #[test]
    fn gauss_legendre_integrates_monomials() {
        for n in 1..=12 {
            let (x, w) = gauss_legendre(n);
            for p in 0..(2 * n) {
                let got: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(p as i32)).sum();
                let want = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
                assert!((got - want).abs() < 1e-14, "n {n} p {p}");
            }
        }
    }

    #[test]
    fn product_rule_level_zero() {
        let q = gauss_product_rule(0);
        assert_eq!(q.len(), 2);
        assert!((q.total_weight() - FOUR_PI).abs() < 1e-14);
    }

    #[test]
    fn product_rule_annihilates_nonconstant_harmonics() {
        let q = gauss_product_rule(2);
        for ell in 1..=6usize {
            for m in -(ell as isize)..=(ell as isize) {
                let v = integrate(|s| real_sph_harm(ell, m, s).unwrap(), &q);
                assert!(v.abs() < 1e-12, "({ell},{m}) -> {v}");
            }
        }
    }

    #[test]
    fn product_rule_norm_of_y53() {
        let q = gauss_product_rule(3);
        let v = integrate(|s| real_sph_harm(5, 3, s).unwrap().powi(2), &q);
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn integrate_examples() {
        let q = gauss_product_rule(2);
        assert!((integrate(|_| 1.0, &q) - FOUR_PI).abs() < 1e-13);
        assert!(integrate(|s| real_sph_harm(3, -2, s).unwrap(), &q).abs() < 1e-12);
        let v = integrate(|s| real_sph_harm(2, 1, s).unwrap().powi(2), &q);
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn product_rule_bounds() {
        for j in 0..=8 {
            let q = gauss_product_rule(j);
            assert_eq!(q.len(), 1 << (2 * j + 1));
            let scaled = q.max_weight() * 4f64.powi(j as i32);
            assert!(scaled <= PI * PI, "level {j}: {scaled}");
            assert!(q.exactness_degree() >= required_degree(j));
        }
    }

    #[test]
    fn product_rule_weight_constant_exceeds_eight_from_level_two() {
        // The central ring weight tends to π²·2^{-2j}.
        let flags: Vec<bool> = (0..=8)
            .map(|j| quadrature_report(&gauss_product_rule(j), 8.0, 2.0).unwrap().weight_bound_ok)
            .collect();
        assert_eq!(flags, [true, true, false, false, false, false, false, false, false]);
    }

    #[test]
    fn product_rule_exactness_verified() {
        for j in 0..=6 {
            let q = gauss_product_rule(j);
            let r = verify_exactness(&q, required_degree(j));
            assert!(r.passed, "level {j}: worst {} at {:?}", r.worst_violation, r.worst_at);
        }
        // Degree 7 at level 2 is only reported, whichever way it goes.
        let r = verify_exactness(&gauss_product_rule(2), 7);
        assert_eq!(r.violations.len(), 64);
    }

    #[test]
    fn single_pole_node_fails_at_degree_one() {
        let q = QuadratureLevel::new(
            0,
            vec![QuadratureNode {
                weight: FOUR_PI,
                point: UnitVector::NORTH,
            }],
            0,
            QuadratureSource::TDesign,
        )
        .unwrap();
        let r = verify_exactness(&q, 1);
        assert!(!r.passed);
        assert_eq!(r.first_failure, Some((1, 0)));
        assert!(verify_exactness(&q, 0).passed);
    }

    #[test]
    fn orthonormality_under_quadrature() {
        let lmax = 16;
        let q = gauss_product_rule(5); // exact to degree 63 ≥ 2·16
        let n = harmonic_count(lmax);
        let mut gram = vec![0.0; n * n];
        let mut y = vec![0.0; n];
        for node in q.nodes() {
            fill_harmonics(&node.point, lmax, &mut y);
            for a in 0..n {
                let wa = node.weight * y[a];
                for b in 0..n {
                    gram[a * n + b] += wa * y[b];
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((gram[a * n + b] - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn equal_area_rule_is_exact_positive_and_separated() {
        for j in 0..=4 {
            let q = equal_area_rule(j).unwrap();
            assert!(q.nodes().iter().all(|n| n.weight > 0.0));
            let r = verify_exactness(&q, required_degree(j));
            assert!(r.passed, "level {j}: {}", r.worst_violation);
            assert!(r.worst_violation < 1e-11);
        }
        let rep = quadrature_report(&equal_area_rule(3).unwrap(), 8.0, 8.0).unwrap();
        assert!(rep.mesh_ratio_ok, "{rep:?}");
        assert!(rep.weight_bound_ok && rep.count_bound_ok);
    }

    #[test]
    fn product_rule_violates_mesh_ratio_at_poles() {
        let rep = quadrature_report(&gauss_product_rule(4), PI * PI, 2.0).unwrap();
        assert!(rep.weight_bound_ok && rep.count_bound_ok);
        assert!(!rep.mesh_ratio_ok);
    }

    #[test]
    fn tdesign_parsing() {
        let q = load_tdesign("0 0 1\n", 0, 0).unwrap();
        assert_eq!(q.len(), 1);
        assert!((q.nodes()[0].weight - FOUR_PI).abs() < 1e-15);

        match load_tdesign("0 0 1\n0 0 2\n", 0, 0) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match load_tdesign("1 0 0\n0 1\n", 0, 0) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(load_tdesign("1 0 x", 0, 0), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(load_tdesign("\n# nothing\n", 0, 0), Err(Error::Parse { .. })));
    }

    #[test]
    fn octahedron_is_a_three_design() {
        let text = "1 0 0\n-1 0 0\n0 1 0\n0 -1 0\n0 0 1\n0 0 -1\n";
        let q = load_tdesign(text, 1, 3).unwrap();
        assert!(verify_exactness(&q, 3).passed);
        assert!(!verify_exactness(&q, 4).passed);
        // Claiming more than holds is caught for levels that need it.
        assert!(load_tdesign("0 0 1\n0 0 -1\n", 1, 2).is_err());
    }
}
