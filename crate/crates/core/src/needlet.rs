//! Smooth dyadic cutoff, level windows, radial kernels and the needlet frame.
//!
//! A level-`j` needlet centred at quadrature node `ξ_jk` is
//! `ψ_jk(s) = √λ_jk · K_j(s·ξ_jk)`, where the radial kernel
//! `K_j(t) = Σ_ℓ b_j(ℓ) √A_ℓ (2ℓ+1)/(4π) P_ℓ(t)` only involves the degrees
//! with `b_j(ℓ) ≠ 0`. `A_ℓ ≡ 1` gives the standard needlets; any other
//! spectrum gives the spectrum-adapted ones whose i.i.d. expansion samples
//! the field with that spectrum.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::domain;
use crate::legendre::{legendre_p_unchecked, real_sph_harm, LegendreSeries};
use crate::math;
use crate::quadrature::{equal_area_rule, gauss_product_rule, required_degree, QuadratureLevel, QuadratureSource};
use crate::spectrum::PowerSpectrum;
use crate::{Error, Result, UnitVector, FOUR_PI};

/// `exp(-1/x)` for `x > 0`, else 0.
pub fn eta0(x: f64) -> f64 {
    if x > 0.0 {
        math::exp(-1.0 / x)
    } else {
        0.0
    }
}

/// Smooth step from 0 (`x ≤ 0`) to 1 (`x ≥ 1`).
pub fn eta(x: f64) -> f64 {
    let a = eta0(x);
    let b = eta0(1.0 - x);
    a / (a + b)
}

/// The Meyer-type cutoff: supported on `[1/2, 2]`, infinitely smooth, with
/// `κ(t)² + κ(2t)² = 1` on `[1/2, 1]`.
pub fn kappa_eval(t: f64) -> f64 {
    CutoffFunction::Meyer.eval(t)
}

/// `b_j(t) = κ(2^{-j}(2t + 1))` for the Meyer-type cutoff.
pub fn window_b(level: u32, t: f64) -> f64 {
    CutoffFunction::Meyer.window(level, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum CutoffFunction {
    #[default]
    Meyer,
    /// Meyer cutoff scaled by `1 + amplitude` on `(1, 2)`. Breaks the
    /// partition of unity on purpose, for exercising the failure paths of
    /// the diagnostics.
    Perturbed { amplitude: f64 },
}

impl CutoffFunction {
    pub fn eval(&self, t: f64) -> f64 {
        if !(t > 0.5 && t < 2.0) {
            return 0.0;
        }
        if t <= 1.0 {
            math::sin(0.5 * PI * eta(2.0 * t - 1.0))
        } else {
            let v = math::cos(0.5 * PI * eta(t - 1.0));
            match self {
                CutoffFunction::Meyer => v,
                CutoffFunction::Perturbed { amplitude } => v * (1.0 + amplitude),
            }
        }
    }

    pub fn window(&self, level: u32, t: f64) -> f64 {
        self.eval(math::pow(2.0, -(level as f64)) * (2.0 * t + 1.0))
    }

    /// `g_J(ℓ) = Σ_{j≤J} b_j(ℓ)²`.
    pub fn window_mass(&self, top_level: u32, ell: usize) -> f64 {
        (0..=top_level)
            .map(|j| {
                let b = self.window(j, ell as f64);
                b * b
            })
            .sum()
    }

    pub fn name(&self) -> &'static str {
        match self {
            CutoffFunction::Meyer => "meyer",
            CutoffFunction::Perturbed { .. } => "perturbed",
        }
    }
}

/// Degrees `[⌈2^{j-2} - 1/2⌉, 2^j - 1]` outside which `b_j` vanishes.
pub fn band(level: u32) -> (usize, usize) {
    let upper = (1usize << level) - 1;
    let lower = math::ceil(math::pow(2.0, level as f64 - 2.0) - 0.5).max(0.0) as usize;
    (lower, upper)
}

/// `K_j(t) = Σ_{ℓ in band} c_ℓ P_ℓ(t)` with `c_ℓ = b_j(ℓ)√A_ℓ(2ℓ+1)/(4π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialKernel {
    level: u32,
    band: (usize, usize),
    /// Dense from degree 0; zero below the band.
    series: LegendreSeries,
}

impl RadialKernel {
    pub fn new(level: u32, spectrum: &PowerSpectrum, cutoff: CutoffFunction) -> Result<Self> {
        let band = band(level);
        let mut coeffs = vec![0.0; band.1 + 1];
        for (ell, c) in coeffs.iter_mut().enumerate().skip(band.0) {
            let a = spectrum.value(ell).ok_or_else(|| {
                domain!(
                    "level {level} needs the spectrum up to degree {}, table stops at {}",
                    band.1,
                    spectrum.lmax()
                )
            })?;
            *c = cutoff.window(level, ell as f64) * math::sqrt(a) * (2 * ell + 1) as f64 / FOUR_PI;
        }
        Ok(Self {
            level,
            band,
            series: LegendreSeries::new(coeffs),
        })
    }

    pub fn standard(level: u32) -> Self {
        let lmax = (1usize << level) - 1;
        Self::new(level, &PowerSpectrum::standard(lmax), CutoffFunction::Meyer).expect("standard spectrum covers band")
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn band(&self) -> (usize, usize) {
        self.band
    }

    /// Legendre coefficients `c_0..c_{2^j-1}`.
    pub fn coefficients(&self) -> &[f64] {
        self.series.coeffs()
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        self.series.eval(t)
    }

    pub(crate) fn value_unchecked(&self, t: f64) -> f64 {
        self.series.eval_unchecked(t)
    }

    /// `K_j(1) = Σ c_ℓ`, which is also `max |K_j|` when all `c_ℓ ≥ 0`.
    pub fn peak(&self) -> f64 {
        self.series.coeffs().iter().sum()
    }
}

/// Default target for the interpolants' certified relative error.
pub const INTERPOLANT_TOLERANCE: f64 = 1e-10;
const INITIAL_NODES: usize = 16;
const MAX_NODES: usize = 1 << 16;

/// Chebyshev interpolant of `t ↦ K_j(t)` on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialInterpolant {
    level: u32,
    node_count: usize,
    /// Chebyshev coefficients with the constant term already halved,
    /// trailing exact zeros trimmed.
    coeffs: Vec<f64>,
    certified_error: f64,
    peak: f64,
}

impl RadialInterpolant {
    /// Doubles the Chebyshev node count from 16 until the maximum deviation
    /// from direct summation over `10·2^j` probe angles, uniform in `θ`, is
    /// at most `target · max|K_j|`.
    pub fn build(kernel: &RadialKernel, target: f64) -> Result<Self> {
        if !(target > 0.0) {
            return Err(domain!("interpolation target must be positive, got {target}"));
        }
        let probes = ProbeSet::new(kernel);
        let mut n = INITIAL_NODES;
        loop {
            let interp = Self::certify(kernel, n, &probes);
            if interp.certified_error <= target {
                return Ok(interp);
            }
            if n >= MAX_NODES {
                return Err(Error::Convergence(format!(
                    "level {} interpolant reached {n} nodes with relative error {:.3e}",
                    kernel.level, interp.certified_error
                )));
            }
            n *= 2;
        }
    }

    /// Interpolant on exactly `nodes` Chebyshev points, with its error
    /// measured on the same probe grid as [`RadialInterpolant::build`].
    pub fn with_nodes(kernel: &RadialKernel, nodes: usize) -> Result<Self> {
        if nodes == 0 || nodes > MAX_NODES {
            return Err(domain!("node count {nodes} outside 1..={MAX_NODES}"));
        }
        Ok(Self::certify(kernel, nodes, &ProbeSet::new(kernel)))
    }

    fn certify(kernel: &RadialKernel, nodes: usize, probes: &ProbeSet) -> Self {
        let mut interp = Self {
            level: kernel.level,
            node_count: nodes,
            coeffs: chebyshev_coefficients(nodes, |t| kernel.value_unchecked(t)),
            certified_error: 0.0,
            peak: probes.peak,
        };
        let err = probes
            .t
            .iter()
            .zip(&probes.exact)
            .map(|(t, e)| (interp.eval(*t) - e).abs())
            .fold(0.0, f64::max);
        interp.certified_error = if probes.peak > 0.0 { err / probes.peak } else { err };
        interp
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Maximum probe-grid error relative to `max|K_j|`.
    pub fn certified_error(&self) -> f64 {
        self.certified_error
    }

    pub fn peak(&self) -> f64 {
        self.peak
    }

    /// Clenshaw evaluation; `t` is clamped to `[-1, 1]`.
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(-1.0, 1.0);
        let two_t = 2.0 * t;
        let (mut b1, mut b2) = (0.0, 0.0);
        for a in self.coeffs[1..].iter().rev() {
            let b0 = a + two_t * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + t * b1 - b2
    }

    /// Four independent evaluations interleaved to overlap their latency.
    #[inline]
    pub fn eval4(&self, t: [f64; 4]) -> [f64; 4] {
        let t = t.map(|x| x.clamp(-1.0, 1.0));
        let two_t = t.map(|x| 2.0 * x);
        let mut b1 = [0.0; 4];
        let mut b2 = [0.0; 4];
        for a in self.coeffs[1..].iter().rev() {
            for i in 0..4 {
                let b0 = a + two_t[i] * b1[i] - b2[i];
                b2[i] = b1[i];
                b1[i] = b0;
            }
        }
        core::array::from_fn(|i| self.coeffs[0] + t[i] * b1[i] - b2[i])
    }
}

/// `10·2^j + 1` angles uniform in `θ ∈ [0, π]` with direct kernel values.
struct ProbeSet {
    t: Vec<f64>,
    exact: Vec<f64>,
    peak: f64,
}

impl ProbeSet {
    fn new(kernel: &RadialKernel) -> Self {
        let n = 10usize << kernel.level;
        let t: Vec<f64> = (0..=n).map(|i| math::cos(PI * i as f64 / n as f64)).collect();
        let exact: Vec<f64> = t.iter().map(|t| kernel.value_unchecked(*t)).collect();
        let peak = exact.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Self { t, exact, peak }
    }
}

/// Coefficients of the degree-`n-1` interpolant at the first-kind
/// Chebyshev points, constant term halved.
fn chebyshev_coefficients<F: Fn(f64) -> f64>(n: usize, f: F) -> Vec<f64> {
    // cos(π m (2k+1) / 2n) = table[m(2k+1) mod 4n]
    let table: Vec<f64> = (0..4 * n).map(|r| math::cos(PI * r as f64 / (2 * n) as f64)).collect();
    let values: Vec<f64> = (0..n).map(|k| f(table[2 * k + 1])).collect();
    let mut coeffs: Vec<f64> = (0..n)
        .map(|m| {
            let s: f64 = values
                .iter()
                .enumerate()
                .map(|(k, v)| v * table[(m * (2 * k + 1)) % (4 * n)])
                .sum();
            2.0 * s / n as f64
        })
        .collect();
    coeffs[0] *= 0.5;
    // Drop the tail that is rounding noise relative to the largest term.
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.abs() <= 1e-17 * scale) {
        coeffs.pop();
    }
    coeffs
}

/// Where the per-level quadrature rules come from.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum QuadratureChoice {
    #[default]
    GaussProduct,
    EqualArea,
    /// One rule per level `0..=J`, in order.
    Supplied(Vec<QuadratureLevel>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameLevel {
    pub quadrature: QuadratureLevel,
    pub kernel: RadialKernel,
    pub interpolant: RadialInterpolant,
    /// Flat index of `(j, 0)`.
    pub offset: usize,
}

/// All levels `0..=J` of (spectrum-adapted) needlets. Coefficients are
/// indexed level-major, `k` ascending within a level.
#[derive(Debug, Clone, PartialEq)]
pub struct NeedletFrame {
    top_level: u32,
    cutoff: CutoffFunction,
    spectrum: PowerSpectrum,
    levels: Vec<FrameLevel>,
    len: usize,
}

impl NeedletFrame {
    /// `spectrum` must provide `A_ℓ` for `ℓ ≤ 2^J - 1`; analytic families
    /// are extended as needed.
    pub fn build(
        top_level: u32,
        spectrum: &PowerSpectrum,
        quadrature: QuadratureChoice,
        cutoff: CutoffFunction,
    ) -> Result<Self> {
        if top_level > 16 {
            return Err(domain!("top level {top_level} is beyond the supported range 0..=16"));
        }
        let lmax = (1usize << top_level) - 1;
        let spectrum = spectrum.with_lmax(lmax)?;
        let rules: Vec<QuadratureLevel> = match quadrature {
            QuadratureChoice::GaussProduct => (0..=top_level).map(gauss_product_rule).collect(),
            QuadratureChoice::EqualArea => (0..=top_level).map(equal_area_rule).collect::<Result<_>>()?,
            QuadratureChoice::Supplied(rules) => {
                if rules.len() != top_level as usize + 1 {
                    return Err(domain!(
                        "{} quadrature rules supplied for levels 0..={top_level}",
                        rules.len()
                    ));
                }
                rules
            }
        };
        let mut levels = Vec::with_capacity(rules.len());
        let mut offset = 0;
        for (j, quadrature) in rules.into_iter().enumerate() {
            let j = j as u32;
            if quadrature.level() != j {
                return Err(domain!("quadrature for level {} supplied in slot {j}", quadrature.level()));
            }
            if quadrature.exactness_degree() < required_degree(j) {
                return Err(Error::Exactness {
                    level: j,
                    degree: quadrature.exactness_degree(),
                    required: required_degree(j),
                });
            }
            let kernel = RadialKernel::new(j, &spectrum, cutoff)?;
            let interpolant = RadialInterpolant::build(&kernel, INTERPOLANT_TOLERANCE)?;
            let n = quadrature.len();
            levels.push(FrameLevel {
                quadrature,
                kernel,
                interpolant,
                offset,
            });
            offset += n;
        }
        Ok(Self {
            top_level,
            cutoff,
            spectrum,
            levels,
            len: offset,
        })
    }

    /// Standard needlets (`A_ℓ ≡ 1`) with the Meyer cutoff.
    pub fn standard(top_level: u32, quadrature: QuadratureChoice) -> Result<Self> {
        let lmax = (1usize << top_level) - 1;
        Self::build(top_level, &PowerSpectrum::standard(lmax), quadrature, CutoffFunction::Meyer)
    }

    pub fn top_level(&self) -> u32 {
        self.top_level
    }

    pub fn cutoff(&self) -> CutoffFunction {
        self.cutoff
    }

    /// The spectrum restricted to `ℓ ≤ 2^J - 1`.
    pub fn spectrum(&self) -> &PowerSpectrum {
        &self.spectrum
    }

    pub fn lmax(&self) -> usize {
        self.spectrum.lmax()
    }

    pub fn levels(&self) -> &[FrameLevel] {
        &self.levels
    }

    pub fn level(&self, j: u32) -> Result<&FrameLevel> {
        self.levels
            .get(j as usize)
            .ok_or_else(|| domain!("level {j} outside frame levels 0..={}", self.top_level))
    }

    /// Total number of needlets `Σ_j n_j`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn flat_index(&self, j: u32, k: usize) -> Result<usize> {
        let level = self.level(j)?;
        if k >= level.quadrature.len() {
            return Err(domain!("node {k} outside level {j} with {} nodes", level.quadrature.len()));
        }
        Ok(level.offset + k)
    }

    pub fn level_index(&self, flat: usize) -> Result<(u32, usize)> {
        if flat >= self.len {
            return Err(domain!("flat index {flat} outside 0..{}", self.len));
        }
        let j = self.levels.partition_point(|l| l.offset <= flat) - 1;
        Ok((j as u32, flat - self.levels[j].offset))
    }

    fn node(&self, j: u32, k: usize) -> Result<(&FrameLevel, f64, UnitVector)> {
        let level = self.level(j)?;
        let node = level
            .quadrature
            .nodes()
            .get(k)
            .ok_or_else(|| domain!("node {k} outside level {j} with {} nodes", level.quadrature.len()))?;
        Ok((level, node.weight, node.point))
    }

    /// `ψ_jk(s)` through the cached interpolant.
    pub fn evaluate_needlet(&self, j: u32, k: usize, s: &UnitVector) -> Result<f64> {
        let (level, weight, point) = self.node(j, k)?;
        Ok(math::sqrt(weight) * level.interpolant.eval(s.dot(&point)))
    }

    /// `ψ_jk(s)` by direct Legendre summation.
    pub fn evaluate_needlet_direct(&self, j: u32, k: usize, s: &UnitVector) -> Result<f64> {
        let (level, weight, point) = self.node(j, k)?;
        Ok(math::sqrt(weight) * level.kernel.value_unchecked(s.dot(&point).clamp(-1.0, 1.0)))
    }

    /// Closed-form `⟨ψ_jk, ψ_j'k'⟩ = √(λλ') Σ_ℓ b_j b_j' A_ℓ (2ℓ+1)/(4π) P_ℓ(ξ·ξ')`
    /// The window product vanishes identically when `|j - j'| ≥ 2`, so the
    /// result is then exactly 0.
    pub fn inner_product(&self, a: (u32, usize), b: (u32, usize)) -> Result<f64> {
        let (la, wa, pa) = self.node(a.0, a.1)?;
        let (lb, wb, pb) = self.node(b.0, b.1)?;
        let hi = la.kernel.band.1.min(lb.kernel.band.1);
        let t = pa.dot(&pb).clamp(-1.0, 1.0);
        let mut sum = 0.0;
        for ell in 0..=hi {
            let weight = self.cutoff.window(a.0, ell as f64) * self.cutoff.window(b.0, ell as f64);
            if weight != 0.0 {
                sum += weight * self.spectrum.values()[ell] * (2 * ell + 1) as f64 / FOUR_PI
                    * legendre_p_unchecked(ell, t);
            }
        }
        Ok(math::sqrt(wa * wb) * sum)
    }

    /// Closed-form `⟨ψ_jk, Y_ℓm⟩ = √λ_jk b_j(ℓ) √A_ℓ Y_ℓm(ξ_jk)`; exactly 0
    /// outside the band of level `j`, where `b_j(ℓ) = 0`. Degrees beyond the
    /// frame's spectrum table lie outside every band.
    pub fn harmonic_coefficient(&self, j: u32, k: usize, ell: usize, m: isize) -> Result<f64> {
        let (_, weight, point) = self.node(j, k)?;
        let y = real_sph_harm(ell, m, &point)?;
        let b = self.cutoff.window(j, ell as f64);
        let a = self.spectrum.value(ell).unwrap_or(0.0);
        Ok(math::sqrt(weight) * b * math::sqrt(a) * y)
    }

    /// `g_J(ℓ) = Σ_{j≤J} b_j(ℓ)²` for this frame's cutoff.
    pub fn window_mass(&self, ell: usize) -> f64 {
        self.cutoff.window_mass(self.top_level, ell)
    }

    pub fn summary(&self) -> FrameSummary {
        FrameSummary {
            top_level: self.top_level,
            cutoff: self.cutoff,
            total: self.len,
            levels: self
                .levels
                .iter()
                .map(|l| LevelSummary {
                    level: l.kernel.level,
                    node_count: l.quadrature.len(),
                    source: l.quadrature.source(),
                    exactness_degree: l.quadrature.exactness_degree(),
                    band: l.kernel.band,
                    offset: l.offset,
                    interpolant_nodes: l.interpolant.node_count(),
                    certified_error: l.interpolant.certified_error(),
                    kernel_peak: l.kernel.peak(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSummary {
    pub level: u32,
    pub node_count: usize,
    pub source: QuadratureSource,
    pub exactness_degree: usize,
    pub band: (usize, usize),
    pub offset: usize,
    pub interpolant_nodes: usize,
    pub certified_error: f64,
    pub kernel_peak: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSummary {
    pub top_level: u32,
    pub cutoff: CutoffFunction,
    pub total: usize,
    pub levels: Vec<LevelSummary>,
}
