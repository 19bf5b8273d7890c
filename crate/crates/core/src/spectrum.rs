//! Angular power spectra `A_ℓ`, forward differences of `√A_ℓ` and the
//! finite-range checks of the decay hypothesis.

use alloc::format;
use alloc::vec::Vec;

use crate::error::domain;
use crate::math;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectrumFamily {
    /// `A_ℓ = (1 + ℓ)^{-2(1+β)}`.
    PowerLaw { beta: f64 },
    Constant { value: f64 },
    Table,
}

/// Non-negative `A_ℓ` for `ℓ = 0..=lmax`. Analytic families also evaluate
/// beyond the stored range.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    values: Vec<f64>,
    family: SpectrumFamily,
}

fn power_law_value(beta: f64, ell: usize) -> f64 {
    math::pow(1.0 + ell as f64, -2.0 * (1.0 + beta))
}

impl PowerSpectrum {
    pub fn power_law(beta: f64, lmax: usize) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(domain!("power-law exponent beta must be positive and finite, got {beta}"));
        }
        Ok(Self {
            values: (0..=lmax).map(|ell| power_law_value(beta, ell)).collect(),
            family: SpectrumFamily::PowerLaw { beta },
        })
    }

    pub fn constant(value: f64, lmax: usize) -> Result<Self> {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(domain!("constant spectrum value must be finite and non-negative, got {value}"));
        }
        Ok(Self {
            values: alloc::vec![value; lmax + 1],
            family: SpectrumFamily::Constant { value },
        })
    }

    /// `A_ℓ ≡ 1`, the spectrum under which modified needlets are the standard ones.
    pub fn standard(lmax: usize) -> Self {
        Self::constant(1.0, lmax).expect("1 is a valid constant")
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(domain!("spectrum table is empty"));
        }
        if let Some(ell) = values.iter().position(|a| !(*a >= 0.0) || !a.is_finite()) {
            return Err(domain!("A_{ell} = {} is not a finite non-negative number", values[ell]));
        }
        Ok(Self {
            values,
            family: SpectrumFamily::Table,
        })
    }

    /// Parses `ℓ A_ℓ` lines with `ℓ` dense from 0. Blank lines and `#`
    /// comments are skipped.
    pub fn parse_table(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message| Error::Parse { line: i + 1, message };
            let mut fields = line.split_whitespace();
            let (Some(l), Some(a), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(parse_err("expected `ell A_ell`".into()));
            };
            let ell: usize = l.parse().map_err(|e| parse_err(format!("degree `{l}`: {e}")))?;
            if ell != values.len() {
                return Err(parse_err(format!("expected degree {}, found {ell}", values.len())));
            }
            let value: f64 = a.parse().map_err(|e| parse_err(format!("value `{a}`: {e}")))?;
            if !(value >= 0.0) || !value.is_finite() {
                return Err(parse_err(format!("A_{ell} = {value} is not finite and non-negative")));
            }
            values.push(value);
        }
        if values.is_empty() {
            return Err(Error::Parse {
                line: 0,
                message: "spectrum table has no entries".into(),
            });
        }
        Self::from_values(values)
    }

    pub fn family(&self) -> SpectrumFamily {
        self.family
    }

    pub fn lmax(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `A_ℓ`, from the closed form beyond the table for analytic families.
    pub fn value(&self, ell: usize) -> Option<f64> {
        if let Some(v) = self.values.get(ell) {
            return Some(*v);
        }
        match self.family {
            SpectrumFamily::PowerLaw { beta } => Some(power_law_value(beta, ell)),
            SpectrumFamily::Constant { value } => Some(value),
            SpectrumFamily::Table => None,
        }
    }

    /// The same family restricted to (or extended to) `ℓ ≤ lmax`.
    pub fn with_lmax(&self, lmax: usize) -> Result<Self> {
        let values = (0..=lmax)
            .map(|ell| {
                self.value(ell)
                    .ok_or_else(|| domain!("spectrum table stops at degree {}, degree {lmax} needed", self.lmax()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            values,
            family: self.family,
        })
    }

    /// Checks the table covers `ℓ ≤ lmax`.
    pub fn require(&self, lmax: usize) -> Result<()> {
        if self.lmax() < lmax {
            return Err(domain!(
                "spectrum covers degrees up to {}, degree {lmax} needed",
                self.lmax()
            ));
        }
        Ok(())
    }

    pub fn sqrt_values(&self) -> Vec<f64> {
        self.values.iter().map(|a| math::sqrt(*a)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|a| *a == 0.0)
    }

    /// `Σ_{ℓ≤L}(2ℓ+1)A_ℓ` and an upper bound on the omitted tail.
    pub fn summability(&self) -> Summability {
        let partial = self
            .values
            .iter()
            .enumerate()
            .map(|(ell, a)| (2 * ell + 1) as f64 * a)
            .sum();
        let next = (self.lmax() + 1) as f64;
        let tail_bound = match self.family {
            // (2ℓ+1)A_ℓ ≤ 2(1+ℓ)^{-1-2β}, bounded by its integral from L+1.
            SpectrumFamily::PowerLaw { beta } => Some(math::pow(next, -2.0 * beta) / beta),
            SpectrumFamily::Constant { value: 0.0 } => Some(0.0),
            SpectrumFamily::Constant { .. } => Some(f64::INFINITY),
            SpectrumFamily::Table => None,
        };
        Summability { partial, tail_bound }
    }
}

/// Truncated `Σ(2ℓ+1)A_ℓ`; the tail bound is `None` when only a table is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summability {
    pub partial: f64,
    pub tail_bound: Option<f64>,
}

impl Summability {
    pub fn is_summable(&self) -> bool {
        self.partial.is_finite() && self.tail_bound.map_or(true, f64::is_finite)
    }
}

/// `Δ^0 … Δ^r` of `seq`; `Δ^i` has `seq.len() - i` entries.
pub fn forward_differences(seq: &[f64], order: usize) -> Result<Vec<Vec<f64>>> {
    if order >= seq.len() {
        return Err(domain!(
            "difference order {order} needs at least {} entries, got {}",
            order + 1,
            seq.len()
        ));
    }
    let mut out = Vec::with_capacity(order + 1);
    out.push(seq.to_vec());
    for i in 1..=order {
        let prev = &out[i - 1];
        let next: Vec<f64> = prev.windows(2).map(|w| w[1] - w[0]).collect();
        out.push(next);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub order: usize,
    pub beta: f64,
    pub threshold: f64,
    pub lmax: usize,
    /// `ĉ_i = max_ℓ |Δ^i_ℓ|(1+ℓ)^{1+β+i}` for `i = 0..=order`.
    pub constants: Vec<f64>,
    pub passes: Vec<bool>,
    pub passed: bool,
    /// Whether `√A_ℓ` visibly tends to 0 on the available range.
    pub tends_to_zero: bool,
    /// Count of `A_ℓ = 0` entries (allowed, unlike a strictly positive sequence).
    pub zero_entries: usize,
}

/// Finite-range test of `|Δ^i_ℓ| ≤ c(1+ℓ)^{-(1+β+i)}` for `i ≤ r`.
pub fn validate_decay(spectrum: &PowerSpectrum, beta: f64, order: usize, threshold: f64) -> Result<DecayReport> {
    if !(beta > 0.0) {
        return Err(domain!("decay exponent beta must be positive, got {beta}"));
    }
    let sqrt_a = spectrum.sqrt_values();
    let diffs = forward_differences(&sqrt_a, order)?;
    let constants: Vec<f64> = diffs
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let exponent = 1.0 + beta + i as f64;
            d.iter()
                .enumerate()
                .map(|(ell, v)| v.abs() * math::pow(1.0 + ell as f64, exponent))
                .fold(0.0, f64::max)
        })
        .collect();
    let passes: Vec<bool> = constants.iter().map(|c| c.is_finite() && *c <= threshold).collect();
    let tends_to_zero = match spectrum.family {
        SpectrumFamily::PowerLaw { .. } => true,
        SpectrumFamily::Constant { value } => value == 0.0,
        SpectrumFamily::Table => {
            let head = sqrt_a.iter().copied().fold(0.0, f64::max);
            let tail_start = sqrt_a.len() - sqrt_a.len().div_ceil(4);
            let tail = sqrt_a[tail_start..].iter().copied().fold(0.0, f64::max);
            head == 0.0 || tail <= 0.1 * head
        }
    };
    Ok(DecayReport {
        order,
        beta,
        threshold,
        lmax: spectrum.lmax(),
        passed: passes.iter().all(|p| *p),
        constants,
        passes,
        tends_to_zero,
        zero_entries: spectrum.values.iter().filter(|a| **a == 0.0).count(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesBehaviour {
    Converges,
    /// Terms decay exactly like `1/(1+ℓ)`: logarithmic divergence.
    Borderline,
    Diverges,
    /// Only a finite table is known.
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularitySum {
    pub partial: f64,
    pub tail_bound: Option<f64>,
    pub behaviour: SeriesBehaviour,
}

/// Truncated `Σ_{ℓ≤L}(1+ℓ)^{1+2β}A_ℓ`, with the tail classified for analytic
/// families.
pub fn regularity_sum(spectrum: &PowerSpectrum, beta: f64) -> Result<RegularitySum> {
    if !(beta >= 0.0) {
        return Err(domain!("regularity exponent beta must be non-negative, got {beta}"));
    }
    let exponent = 1.0 + 2.0 * beta;
    let partial = spectrum
        .values
        .iter()
        .enumerate()
        .map(|(ell, a)| if *a == 0.0 { 0.0 } else { math::pow(1.0 + ell as f64, exponent) * a })
        .sum();
    let next = (spectrum.lmax() + 1) as f64;
    let (tail_bound, behaviour) = match spectrum.family {
        SpectrumFamily::PowerLaw { beta: b } => {
            // Terms are (1+ℓ)^{-1-2δ} with δ = b - β.
            let delta = b - beta;
            if delta.abs() <= 1e-12 {
                (Some(f64::INFINITY), SeriesBehaviour::Borderline)
            } else if delta > 0.0 {
                (Some(math::pow(next, -2.0 * delta) / (2.0 * delta)), SeriesBehaviour::Converges)
            } else {
                (Some(f64::INFINITY), SeriesBehaviour::Diverges)
            }
        }
        SpectrumFamily::Constant { value: 0.0 } => (Some(0.0), SeriesBehaviour::Converges),
        SpectrumFamily::Constant { .. } => (Some(f64::INFINITY), SeriesBehaviour::Diverges),
        SpectrumFamily::Table => (None, SeriesBehaviour::Unknown),
    };
    Ok(RegularitySum {
        partial,
        tail_bound,
        behaviour,
    })
}
