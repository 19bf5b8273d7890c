//! Numerical checks of frame identities, localisation and sampling.
//!
//! Closed-form checks (partition of unity, Parseval on harmonics,
//! orthogonality between non-adjacent levels, vanishing moments) are exact
//! up to rounding. Scaling claims are checked as least-squares slopes of
//! `log₂` quantities against the level. Monte Carlo checks report z-scores.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::domain;
use crate::legendre::{fill_harmonics, harmonic_count, harmonic_index};
use crate::math;
use crate::needlet::{band, CutoffFunction, NeedletFrame};
use crate::sampling::{draw_coefficients, truncated_covariance_series};
use crate::spectrum::PowerSpectrum;
use crate::{EvalGrid, Result, UnitVector, FOUR_PI};

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    math::fit_slope(xs, ys)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionReport {
    pub top_level: u32,
    /// `2^{J-1} - 1` (0 for `J = 0`): the last degree where `g_J = 1` must hold.
    pub boundary: usize,
    /// `max_{ℓ ≤ boundary} |g_J(ℓ) - 1|`.
    pub max_deviation: f64,
    /// `(ℓ, 1 - g_J(ℓ))` for `boundary < ℓ ≤ 2^J - 1`, reported only.
    pub beyond: Vec<(usize, f64)>,
}

pub fn partition_check(cutoff: CutoffFunction, top_level: u32) -> PartitionReport {
    let boundary = if top_level == 0 { 0 } else { (1usize << (top_level - 1)) - 1 };
    let lmax = (1usize << top_level) - 1;
    let max_deviation = (0..=boundary)
        .map(|ell| (cutoff.window_mass(top_level, ell) - 1.0).abs())
        .fold(0.0, f64::max);
    let beyond = (boundary + 1..=lmax)
        .map(|ell| (ell, 1.0 - cutoff.window_mass(top_level, ell)))
        .collect();
    PartitionReport {
        top_level,
        boundary,
        max_deviation,
        beyond,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsevalReport {
    pub lmax_tested: usize,
    /// `Σ_{j,k} λ_jk b_j(ℓ)² Y_ℓm(ξ_jk)²` in harmonic-index order.
    pub sums: Vec<f64>,
    pub worst_deviation: f64,
    pub worst_at: (usize, isize),
}

/// `Σ_{j,k} λ_jk b_j(ℓ)² Y_ℓm(ξ_jk)²` for all `(ℓ, m)` with `ℓ ≤ lmax`: the
/// Parseval sum of `Y_ℓm` against the standard needlets on this frame's
/// quadrature and cutoff. Any `lmax ≤ 2^J - 1` is accepted.
pub fn parseval_sums(frame: &NeedletFrame, lmax: usize) -> Result<Vec<f64>> {
    if lmax > frame.lmax() {
        return Err(domain!("degree {lmax} beyond the frame's top degree {}", frame.lmax()));
    }
    let count = harmonic_count(lmax);
    let mut sums = vec![0.0; count];
    let mut y = vec![0.0; count];
    let mut level_sum = vec![0.0; count];
    for level in frame.levels() {
        let j = level.kernel.level();
        level_sum.iter_mut().for_each(|v| *v = 0.0);
        for node in level.quadrature.nodes() {
            fill_harmonics(&node.point, lmax, &mut y);
            for (acc, v) in level_sum.iter_mut().zip(&y) {
                *acc += node.weight * v * v;
            }
        }
        for ell in 0..=lmax {
            let b = frame.cutoff().window(j, ell as f64);
            let b2 = b * b;
            for idx in ell * ell..(ell + 1) * (ell + 1) {
                sums[idx] += b2 * level_sum[idx];
            }
        }
    }
    Ok(sums)
}

/// Parseval identity on `Y_ℓm`, `ℓ ≤ l_test ≤ 2^{J-1} - 1`. Beyond that
/// boundary the level truncation removes `1 - g_J(ℓ)` of the mass, which
/// [`parseval_sums`] and [`partition_check`] report.
pub fn parseval_check(frame: &NeedletFrame, l_test: usize) -> Result<ParsevalReport> {
    let boundary = if frame.top_level() == 0 { 0 } else { (1usize << (frame.top_level() - 1)) - 1 };
    if l_test > boundary {
        return Err(domain!(
            "degree {l_test} is beyond the truncation boundary {boundary} of a frame with top level {}; \
             levels above J would be needed for the identity to hold there",
            frame.top_level()
        ));
    }
    let sums = parseval_sums(frame, l_test)?;
    let mut worst_deviation = 0.0;
    let mut worst_at = (0, 0);
    for ell in 0..=l_test {
        for m in -(ell as isize)..=(ell as isize) {
            let d = (sums[harmonic_index(ell, m)] - 1.0).abs();
            if d > worst_deviation {
                worst_deviation = d;
                worst_at = (ell, m);
            }
        }
    }
    Ok(ParsevalReport {
        lmax_tested: l_test,
        sums,
        worst_deviation,
        worst_at,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalityReport {
    pub pairs_checked: usize,
    /// `max |⟨ψ_jk, ψ_j'k'⟩|` over sampled pairs with `|j - j'| ≥ 2`.
    pub max_nonadjacent: f64,
    /// Same over sampled adjacent-level pairs; informational.
    pub max_adjacent: f64,
    pub moments_checked: usize,
    /// `max |⟨ψ_jk, Y_ℓm⟩|` over `ℓ < ℓ_min(j)`.
    pub max_moment: f64,
}

/// Samples `sample_size` index pairs with `|j - j'| ≥ 2` (and as many
/// adjacent pairs), and every node's moments below its band for
/// `ℓ ≤ moment_lmax`.
pub fn orthogonality_check(
    frame: &NeedletFrame,
    sample_size: usize,
    moment_lmax: usize,
    seed: u64,
) -> Result<OrthogonalityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = frame.top_level();
    let mut pick = |levels: &[u32]| -> (u32, usize) {
        let j = levels[(rng.next_u64() % levels.len() as u64) as usize];
        let n = frame.levels()[j as usize].quadrature.len();
        (j, (rng.next_u64() % n as u64) as usize)
    };
    let all: Vec<u32> = (0..=top).collect();
    let mut max_nonadjacent = 0.0f64;
    let mut max_adjacent = 0.0f64;
    let mut pairs_checked = 0;
    if top >= 2 {
        for _ in 0..sample_size {
            let a = pick(&all);
            let far: Vec<u32> = all.iter().copied().filter(|j| j.abs_diff(a.0) >= 2).collect();
            let b = pick(&far);
            max_nonadjacent = max_nonadjacent.max(frame.inner_product(a, b)?.abs());
            pairs_checked += 1;
        }
    }
    if top >= 1 {
        for _ in 0..sample_size {
            let a = pick(&all[..top as usize]);
            let b = pick(&[a.0 + 1]);
            max_adjacent = max_adjacent.max(frame.inner_product(a, b)?.abs());
        }
    }

    let mut max_moment = 0.0f64;
    let mut moments_checked = 0;
    for level in frame.levels() {
        let j = level.kernel.level();
        let lo = band(j).0.min(moment_lmax + 1);
        for k in 0..level.quadrature.len() {
            for ell in 0..lo {
                for m in -(ell as isize)..=(ell as isize) {
                    max_moment = max_moment.max(frame.harmonic_coefficient(j, k, ell, m)?.abs());
                    moments_checked += 1;
                }
            }
        }
    }
    Ok(OrthogonalityReport {
        pairs_checked,
        max_nonadjacent,
        max_adjacent,
        moments_checked,
        max_moment,
    })
}

/// Index of the largest weight at level `j`, smallest index on ties.
pub fn heaviest_node(frame: &NeedletFrame, j: u32) -> Result<usize> {
    let nodes = frame.level(j)?.quadrature.nodes();
    let mut best = 0;
    for (k, n) in nodes.iter().enumerate() {
        if n.weight > nodes[best].weight {
            best = k;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalisationProfile {
    pub level: u32,
    pub index: usize,
    /// `0` followed by log-spaced angles up to `π`.
    pub thetas: Vec<f64>,
    pub values: Vec<f64>,
    pub peak: f64,
    /// `-slope` of `log` of the decreasing envelope of `|ψ|` against
    /// `log θ` over `[8·2^{-j}, π/2]`; `None` if fewer than 3 samples fall
    /// in the window or the envelope reaches 0.
    pub tail_exponent: Option<f64>,
}

/// `|ψ_jk|` along a great circle leaving `ξ_jk`.
pub fn localisation_profile(frame: &NeedletFrame, j: u32, k: usize, n_theta: usize) -> Result<LocalisationProfile> {
    if n_theta < 16 {
        return Err(domain!("profile needs at least 16 angles, got {n_theta}"));
    }
    let centre = frame.level(j)?.quadrature.nodes().get(k).map(|n| n.point).ok_or_else(|| {
        domain!("node {k} outside level {j}")
    })?;
    let direction = centre.orthogonal();
    let first = 1e-3 * math::pow(2.0, -(j as f64));
    let ratio = math::ln(PI / first) / (n_theta - 2) as f64;
    let mut thetas = Vec::with_capacity(n_theta);
    thetas.push(0.0);
    for i in 0..n_theta - 1 {
        thetas.push((first * math::exp(ratio * i as f64)).min(PI));
    }
    *thetas.last_mut().expect("n_theta ≥ 16") = PI;
    let values = thetas
        .iter()
        .map(|theta| {
            let s = centre.towards(&direction, *theta);
            frame.evaluate_needlet(j, k, &s).map(f64::abs)
        })
        .collect::<Result<Vec<_>>>()?;
    let peak = values.iter().copied().fold(0.0, f64::max);

    let mut envelope = values.clone();
    for i in (0..envelope.len() - 1).rev() {
        envelope[i] = envelope[i].max(envelope[i + 1]);
    }
    let lo = 8.0 * math::pow(2.0, -(j as f64));
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (theta, env) in thetas.iter().zip(&envelope) {
        if *theta >= lo && *theta <= PI / 2.0 && *env > 0.0 {
            xs.push(math::ln(*theta));
            ys.push(math::ln(*env));
        }
    }
    let tail_exponent = (xs.len() >= 3).then(|| -math::fit_slope(&xs, &ys));
    Ok(LocalisationProfile {
        level: j,
        index: k,
        thetas,
        values,
        peak,
        tail_exponent,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub levels: Vec<u32>,
    pub values: Vec<f64>,
    /// Slope of `log₂ value` against `j`.
    pub slope: f64,
}

impl ScalingFit {
    fn new(levels: Vec<u32>, values: Vec<f64>) -> Self {
        let xs: Vec<f64> = levels.iter().map(|j| *j as f64).collect();
        let ys: Vec<f64> = values.iter().map(|v| math::log2(*v)).collect();
        let slope = math::fit_slope(&xs, &ys);
        Self { levels, values, slope }
    }
}

/// `max_s |ψ_{j,k₀}(s)| = √λ_{jk₀} |K_j(1)|` with `k₀` the heaviest node,
/// fitted over `levels`. The maximum sits at the centre because the
/// kernel coefficients are non-negative and `|P_ℓ| ≤ 1`.
pub fn peak_scaling(frame: &NeedletFrame, levels: core::ops::RangeInclusive<u32>) -> Result<ScalingFit> {
    let mut js = Vec::new();
    let mut peaks = Vec::new();
    for j in levels {
        let k = heaviest_node(frame, j)?;
        let centre = frame.level(j)?.quadrature.nodes()[k].point;
        js.push(j);
        peaks.push(frame.evaluate_needlet(j, k, &centre)?.abs());
    }
    Ok(ScalingFit::new(js, peaks))
}

/// `max_{s in probe} Σ_k |ψ_jk(s)|`.
pub fn levelwise_sum(frame: &NeedletFrame, j: u32, probe: &EvalGrid) -> Result<f64> {
    let level = frame.level(j)?;
    let nodes = level.quadrature.nodes();
    let sqrt_w: Vec<f64> = nodes.iter().map(|n| math::sqrt(n.weight)).collect();
    let mut best = 0.0f64;
    for s in probe.points() {
        let mut acc = 0.0;
        let mut chunks = nodes.chunks_exact(4);
        let mut weights = sqrt_w.chunks_exact(4);
        for (quad, w) in (&mut chunks).zip(&mut weights) {
            let r = level.interpolant.eval4(core::array::from_fn(|i| s.dot(&quad[i].point)));
            acc += w[0] * r[0].abs() + w[1] * r[1].abs() + w[2] * r[2].abs() + w[3] * r[3].abs();
        }
        for (n, w) in chunks.remainder().iter().zip(weights.remainder()) {
            acc += w * level.interpolant.eval(s.dot(&n.point)).abs();
        }
        best = best.max(acc);
    }
    Ok(best)
}

pub fn levelwise_scaling(
    frame: &NeedletFrame,
    levels: core::ops::RangeInclusive<u32>,
    probe: &EvalGrid,
) -> Result<ScalingFit> {
    let mut js = Vec::new();
    let mut sums = Vec::new();
    for j in levels {
        js.push(j);
        sums.push(levelwise_sum(frame, j, probe)?);
    }
    Ok(ScalingFit::new(js, sums))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceRow {
    pub s: UnitVector,
    pub t: UnitVector,
    pub empirical: f64,
    pub expected: f64,
    /// Standard error of the empirical mean of `u(s)u(t)`.
    pub std_error: f64,
    pub z: f64,
}

/// Empirical `E[u(s)u(t)]` over `seeds` realisations (seeds
/// `master, master+1, …`) of the needlet field, against the truncated
/// covariance.
pub fn covariance_check(
    frame: &NeedletFrame,
    seeds: usize,
    pairs: &[(UnitVector, UnitVector)],
    master_seed: u64,
) -> Result<Vec<CovarianceRow>> {
    if seeds < 100 {
        return Err(domain!("covariance check needs at least 100 seeds, got {seeds}"));
    }
    let (points, index) = distinct_points(pairs);
    // Row p holds ψ_i(points[p]) for every flat index i.
    let mut design = vec![0.0; points.len() * frame.len()];
    for (p, s) in points.iter().enumerate() {
        for flat in 0..frame.len() {
            let (j, k) = frame.level_index(flat)?;
            design[p * frame.len() + flat] = frame.evaluate_needlet(j, k, s)?;
        }
    }
    let series = truncated_covariance_series(frame);
    let expected: Vec<f64> = pairs
        .iter()
        .map(|(s, t)| series.eval_unchecked(s.dot(t).clamp(-1.0, 1.0)))
        .collect();
    let n = frame.len();
    monte_carlo(pairs, &index, &expected, seeds, |i, u| {
        let y = draw_coefficients(master_seed.wrapping_add(i as u64), n);
        for (p, value) in u.iter_mut().enumerate() {
            *value = design[p * n..(p + 1) * n].iter().zip(&y).map(|(a, b)| a * b).sum();
        }
    })
}

/// As [`covariance_check`] for the KL expansion truncated at `lmax`,
/// against `ρ_L(s·t)`.
pub fn kl_covariance_check(
    spectrum: &PowerSpectrum,
    lmax: usize,
    seeds: usize,
    pairs: &[(UnitVector, UnitVector)],
    master_seed: u64,
) -> Result<Vec<CovarianceRow>> {
    if seeds < 100 {
        return Err(domain!("covariance check needs at least 100 seeds, got {seeds}"));
    }
    spectrum.require(lmax)?;
    let (points, index) = distinct_points(pairs);
    let n = harmonic_count(lmax);
    let mut design = vec![0.0; points.len() * n];
    for (p, s) in points.iter().enumerate() {
        let row = &mut design[p * n..(p + 1) * n];
        fill_harmonics(s, lmax, row);
        for ell in 0..=lmax {
            let scale = math::sqrt(spectrum.values()[ell]);
            for v in &mut row[ell * ell..(ell + 1) * (ell + 1)] {
                *v *= scale;
            }
        }
    }
    let expected = pairs
        .iter()
        .map(|(s, t)| crate::sampling::covariance(spectrum, s.dot(t).clamp(-1.0, 1.0), lmax))
        .collect::<Result<Vec<_>>>()?;
    monte_carlo(pairs, &index, &expected, seeds, |i, u| {
        let y = draw_coefficients(master_seed.wrapping_add(i as u64), n);
        for (p, value) in u.iter_mut().enumerate() {
            *value = design[p * n..(p + 1) * n].iter().zip(&y).map(|(a, b)| a * b).sum();
        }
    })
}

fn distinct_points(pairs: &[(UnitVector, UnitVector)]) -> (Vec<UnitVector>, Vec<(usize, usize)>) {
    let mut points: Vec<UnitVector> = Vec::new();
    let mut slot = |p: UnitVector| match points.iter().position(|q| *q == p) {
        Some(i) => i,
        None => {
            points.push(p);
            points.len() - 1
        }
    };
    let index = pairs.iter().map(|(s, t)| (slot(*s), slot(*t))).collect();
    (points, index)
}

fn monte_carlo<F: FnMut(usize, &mut [f64])>(
    pairs: &[(UnitVector, UnitVector)],
    index: &[(usize, usize)],
    expected: &[f64],
    seeds: usize,
    mut realise: F,
) -> Result<Vec<CovarianceRow>> {
    let n_points = index.iter().map(|(a, b)| a.max(b) + 1).max().unwrap_or(0);
    let mut u = vec![0.0; n_points];
    let mut sum = vec![0.0; pairs.len()];
    let mut sum_sq = vec![0.0; pairs.len()];
    for i in 0..seeds {
        realise(i, &mut u);
        for (r, (a, b)) in index.iter().enumerate() {
            let x = u[*a] * u[*b];
            sum[r] += x;
            sum_sq[r] += x * x;
        }
    }
    let n = seeds as f64;
    Ok(pairs
        .iter()
        .enumerate()
        .map(|(r, (s, t))| {
            let mean = sum[r] / n;
            let var = ((sum_sq[r] - n * mean * mean) / (n - 1.0)).max(0.0);
            let std_error = math::sqrt(var / n);
            CovarianceRow {
                s: *s,
                t: *t,
                empirical: mean,
                expected: expected[r],
                std_error,
                z: if std_error > 0.0 { (mean - expected[r]) / std_error } else { 0.0 },
            }
        })
        .collect())
}

/// Point variance of the truncated KL field, `Σ_{ℓ≤L} A_ℓ (2ℓ+1)/(4π)`.
pub fn kl_variance(spectrum: &PowerSpectrum, lmax: usize) -> Result<f64> {
    spectrum.require(lmax)?;
    Ok(spectrum.values()[..=lmax]
        .iter()
        .enumerate()
        .map(|(ell, a)| a * (2 * ell + 1) as f64 / FOUR_PI)
        .sum())
}

/// Knobs of [`frame_checks`].
#[derive(Debug, Clone, PartialEq)]
pub struct CheckSettings {
    pub partition_tolerance: f64,
    pub parseval_tolerance: f64,
    /// Random index pairs per orthogonality class.
    pub pair_samples: usize,
    pub moment_lmax: usize,
    pub seed: u64,
    /// First level of the scaling fits; fits need two levels up to `J`.
    pub scaling_from: u32,
    /// Probe grid for the levelwise sums; skipped when `None`.
    pub probe: Option<EvalGrid>,
    pub profile_angles: usize,
}

impl Default for CheckSettings {
    fn default() -> Self {
        Self {
            partition_tolerance: 1e-10,
            parseval_tolerance: 1e-8,
            pair_samples: 1000,
            moment_lmax: 40,
            seed: 0,
            scaling_from: 3,
            probe: None,
            profile_angles: 256,
        }
    }
}

/// Everything the theorem-level regression suite computes. Only the
/// closed-form checks are assertion-bearing; fits and profiles are reported.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameCheckReport {
    pub partition: PartitionReport,
    pub parseval: ParsevalReport,
    pub orthogonality: OrthogonalityReport,
    pub peaks: Option<ScalingFit>,
    pub levelwise: Option<ScalingFit>,
    /// Heaviest-node profiles for the levels from `scaling_from` up.
    pub profiles: Vec<LocalisationProfile>,
    /// Names of the failed assertion-bearing checks.
    pub failures: Vec<&'static str>,
}

impl FrameCheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Largest tail exponent seen on any profile's fit window.
    pub fn largest_tail_exponent(&self) -> Option<f64> {
        self.profiles.iter().filter_map(|p| p.tail_exponent).reduce(f64::max)
    }
}

/// Runs partition, Parseval (below the truncation boundary), orthogonality
/// and vanishing moments, plus peak and levelwise scaling fits.
pub fn frame_checks(frame: &NeedletFrame, settings: &CheckSettings) -> Result<FrameCheckReport> {
    let top = frame.top_level();
    let partition = partition_check(frame.cutoff(), top);
    let boundary = partition.boundary;
    let parseval = parseval_check(frame, boundary)?;
    let orthogonality = orthogonality_check(frame, settings.pair_samples, settings.moment_lmax, settings.seed)?;

    let from = settings.scaling_from;
    let fits = top > from;
    let peaks = if fits { Some(peak_scaling(frame, from..=top)?) } else { None };
    let levelwise = match (&settings.probe, fits) {
        (Some(probe), true) => Some(levelwise_scaling(frame, from..=top, probe)?),
        _ => None,
    };
    let profiles = (from.min(top)..=top)
        .map(|j| localisation_profile(frame, j, heaviest_node(frame, j)?, settings.profile_angles))
        .collect::<Result<Vec<_>>>()?;

    let mut failures = Vec::new();
    if !(partition.max_deviation <= settings.partition_tolerance) {
        failures.push("partition");
    }
    if !(parseval.worst_deviation <= settings.parseval_tolerance) {
        failures.push("parseval");
    }
    if orthogonality.max_nonadjacent != 0.0 {
        failures.push("orthogonality");
    }
    if orthogonality.max_moment != 0.0 {
        failures.push("vanishing_moments");
    }
    Ok(FrameCheckReport {
        partition,
        parseval,
        orthogonality,
        peaks,
        levelwise,
        profiles,
        failures,
    })
}
