//! The five subcommands. Each writes its files into the output directory
//! and returns whether its checks passed.

use std::path::{Path, PathBuf};

use needlets_core::diagnostics::{frame_checks, CheckSettings, FrameCheckReport, ScalingFit};
use needlets_core::quadrature::quadrature_report;
use needlets_core::sampling::{
    covariance_deficit, kl_coefficients, kl_field, needlet_coefficients, needlet_field, CoefficientVector,
    FieldRealization, Provenance, GENERATOR,
};
use needlets_core::spectrum::{regularity_sum, validate_decay, SeriesBehaviour, SpectrumFamily};
use needlets_core::{CutoffFunction, EvalGrid, NeedletFrame, PowerSpectrum, QuadratureChoice};
use serde_json::{json, Value};

use crate::binary::Record;
use crate::config::{
    expansion_name, quadrature_name, spectrum_text, subcommand_name, ExpansionSpec, QuadratureSpec, RunConfig,
    SpectrumSpec, Subcommand,
};
use crate::error::{Error, Result};
use crate::image::render;
use crate::io::{load_spectrum_table, load_tdesign_dir, read_record, write_atomic};
use crate::report::{self, number};
use crate::csv;

/// Degree range for decay checks of analytic spectra.
pub const ANALYTIC_DECAY_LMAX: usize = 512;
/// Constants the per-level quadrature bounds are reported against.
pub const WEIGHT_CONSTANT: f64 = 10.0;
pub const COUNT_CONSTANT: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Passed,
    /// Names of the failed checks.
    Failed(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Completed {
    pub outcome: Outcome,
    /// Files written, in order.
    pub written: Vec<PathBuf>,
}

pub fn execute(config: &RunConfig) -> Result<Completed> {
    let mut run = Run {
        config,
        written: Vec::new(),
    };
    let outcome = match config.subcommand {
        Subcommand::SpectrumCheck => run.spectrum_check()?,
        Subcommand::BuildFrame => run.build_frame()?,
        Subcommand::Sample => run.sample()?,
        Subcommand::Diagnose => run.diagnose()?,
        Subcommand::Render => run.render()?,
    };
    Ok(Completed {
        outcome,
        written: run.written,
    })
}

/// `A_ℓ` for `ℓ ≤ lmax`; tables must cover `lmax`.
pub fn load_spectrum(config: &RunConfig, lmax: usize) -> Result<PowerSpectrum> {
    Ok(match &config.spectrum {
        SpectrumSpec::PowerLaw => PowerSpectrum::power_law(config.beta, lmax)?,
        SpectrumSpec::Constant(a) => PowerSpectrum::constant(*a, lmax)?,
        SpectrumSpec::Table(path) => {
            let table = load_spectrum_table(path)?;
            table.with_lmax(lmax).map_err(|source| Error::Input {
                path: path.clone(),
                source,
            })?
        }
    })
}

pub fn quadrature_choice(config: &RunConfig) -> Result<QuadratureChoice> {
    Ok(match config.quadrature {
        QuadratureSpec::Gauss => QuadratureChoice::GaussProduct,
        QuadratureSpec::EqualArea => QuadratureChoice::EqualArea,
        QuadratureSpec::TDesign => {
            let dir = config
                .tdesign_dir
                .as_ref()
                .ok_or_else(|| Error::Config("`--quadrature tdesign` needs `--tdesign-dir`".into()))?;
            QuadratureChoice::Supplied(load_tdesign_dir(dir, config.top_level)?)
        }
    })
}

pub fn cutoff(config: &RunConfig) -> CutoffFunction {
    match config.corrupt_cutoff {
        Some(amplitude) => CutoffFunction::Perturbed { amplitude },
        None => CutoffFunction::Meyer,
    }
}

/// The frame the configuration describes, on `A_ℓ` for `ℓ ≤ 2^J - 1`.
pub fn build_frame(config: &RunConfig) -> Result<NeedletFrame> {
    let spectrum = load_spectrum(config, (1usize << config.top_level) - 1)?;
    Ok(NeedletFrame::build(config.top_level, &spectrum, quadrature_choice(config)?, cutoff(config))?)
}

struct Run<'a> {
    config: &'a RunConfig,
    written: Vec<PathBuf>,
}

impl Run<'_> {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.config.out.join(name);
        write_atomic(&path, bytes)?;
        self.written.push(path);
        Ok(())
    }

    fn write_report(&mut self, stem: &str, document: &Value) -> Result<()> {
        let format = self.config.report;
        let name = format!("{stem}.{}", report::extension(format));
        self.write(&name, report::encode(document, format).as_bytes())
    }

    fn header(&self) -> Value {
        let c = self.config;
        json!({
            "subcommand": subcommand_name(c.subcommand),
            "spectrum": spectrum_text(&c.spectrum),
            "beta": c.beta,
            "J": c.top_level,
            "quadrature": quadrature_name(c.quadrature),
        })
    }

    fn spectrum_check(&mut self) -> Result<Outcome> {
        let c = self.config;
        let spectrum = match &c.spectrum {
            SpectrumSpec::Table(path) => load_spectrum_table(path)?,
            _ => load_spectrum(c, ANALYTIC_DECAY_LMAX.max((1usize << c.top_level) - 1))?,
        };
        let decay = validate_decay(&spectrum, c.beta, c.order, c.decay_threshold).map_err(|source| match &c.spectrum {
            SpectrumSpec::Table(path) => Error::Input {
                path: path.clone(),
                source,
            },
            _ => Error::Core(source),
        })?;
        let summability = spectrum.summability();
        let regularity = regularity_sum(&spectrum, c.beta)?;
        let passed = decay.passed && decay.tends_to_zero;
        let mut failures = Vec::new();
        for (i, ok) in decay.passes.iter().enumerate() {
            if !ok {
                failures.push(format!("decay_order_{i}"));
            }
        }
        if !decay.tends_to_zero {
            failures.push("tends_to_zero".into());
        }
        let document = json!({
            "run": self.header(),
            "spectrum": spectrum_summary(&spectrum),
            "decay": {
                "order": decay.order,
                "beta": decay.beta,
                "threshold": decay.threshold,
                "lmax": decay.lmax,
                "constants": decay.constants.iter().map(|v| number(*v)).collect::<Vec<_>>(),
                "passes": decay.passes,
                "tends_to_zero": decay.tends_to_zero,
                "zero_entries": decay.zero_entries,
            },
            "summability": {
                "partial": number(summability.partial),
                "tail_bound": summability.tail_bound.map(number),
                "summable": summability.is_summable(),
            },
            "regularity": {
                "partial": number(regularity.partial),
                "tail_bound": regularity.tail_bound.map(number),
                "behaviour": behaviour_name(regularity.behaviour),
            },
            "failures": failures,
            "passed": passed,
        });
        self.write_report("spectrum-check", &document)?;
        Ok(outcome(failures))
    }

    fn build_frame(&mut self) -> Result<Outcome> {
        let frame = build_frame(self.config)?;
        let mut levels = Vec::new();
        for (summary, level) in frame.summary().levels.iter().zip(frame.levels()) {
            let q = quadrature_report(&level.quadrature, WEIGHT_CONSTANT, COUNT_CONSTANT)?;
            levels.push(json!({
                "level": summary.level,
                "nodes": summary.node_count,
                "source": summary.source.name(),
                "exactness": summary.exactness_degree,
                "band_lo": summary.band.0,
                "band_hi": summary.band.1,
                "offset": summary.offset,
                "interpolant_nodes": summary.interpolant_nodes,
                "certified_error": number(summary.certified_error),
                "kernel_peak": number(summary.kernel_peak),
                "max_weight": number(q.max_weight),
                "mesh_norm": number(q.mesh_norm),
                "min_separation": number(q.min_separation),
                "weight_bound_ok": q.weight_bound_ok,
                "count_bound_ok": q.count_bound_ok,
                "mesh_ratio_ok": q.mesh_ratio_ok,
            }));
        }
        let document = json!({
            "run": self.header(),
            "cutoff": frame.cutoff().name(),
            "total": frame.len(),
            "lmax": frame.lmax(),
            "weight_constant": WEIGHT_CONSTANT,
            "count_constant": COUNT_CONSTANT,
            "levels": levels,
        });
        self.write_report("frame", &document)?;
        Ok(Outcome::Passed)
    }

    fn sample(&mut self) -> Result<Outcome> {
        let c = self.config;
        let lmax = (1usize << c.top_level) - 1;
        let spectrum = load_spectrum(c, lmax)?;
        let summability = spectrum.summability();
        if !summability.is_summable() {
            return Err(Error::Config(format!(
                "spectrum {} is not summable: Σ(2ℓ+1)A_ℓ diverges",
                spectrum_text(&c.spectrum)
            )));
        }
        let grid = EvalGrid::equirectangular(c.grid.0, c.grid.1)?;
        let (coefficients, values, deficit): (CoefficientVector, Vec<f64>, Value) = match c.expansion {
            ExpansionSpec::Kl => {
                let coefficients = kl_coefficients(c.seed, lmax);
                let values = kl_field(&spectrum, lmax, &coefficients.values, &grid)?;
                let tail = summability.tail_bound.map(|t| number(t / needlets_core::FOUR_PI));
                (coefficients, values, json!({ "in_band": 0.0, "tail_bound": tail }))
            }
            ExpansionSpec::Needlet => {
                let frame = NeedletFrame::build(c.top_level, &spectrum, quadrature_choice(c)?, cutoff(c))?;
                let coefficients = needlet_coefficients(c.seed, &frame);
                let values = needlet_field(&frame, &coefficients.values, &grid)?;
                let d = covariance_deficit(&frame, &spectrum);
                (
                    coefficients,
                    values,
                    json!({ "in_band": number(d.in_band), "tail_bound": d.tail_bound.map(number) }),
                )
            }
        };
        let field = FieldRealization {
            grid,
            values,
            provenance: Provenance {
                expansion: coefficients.expansion,
                seed: c.seed,
            },
        };
        if let Some(index) = field.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Config(format!("synthesised value {index} is not finite")));
        }
        self.write("coefficients.bin", &Record::from_coefficients(&coefficients).encode())?;
        self.write("coefficients.csv", csv::encode(&coefficients.values).as_bytes())?;
        self.write("field.bin", &Record::from_field(&field).encode())?;
        self.write("field.csv", csv::encode(&field.values).as_bytes())?;
        let mut image = Value::Null;
        if c.image {
            let rendering = render(&field.values, c.grid.0, c.grid.1, c.palette)
                .map_err(|e| Error::Config(e.to_string()))?;
            let name = format!("field.{}", c.palette.extension());
            self.write(&name, &rendering.encode())?;
            image = json!({ "file": name, "palette": c.palette.name(), "min": rendering.min, "max": rendering.max });
        }
        let (min, max) = min_max(&field.values);
        let document = json!({
            "run": self.header(),
            "provenance": {
                "expansion": expansion_name(c.expansion),
                "truncation": coefficients.expansion.truncation(),
                "seed": c.seed,
                "generator": GENERATOR,
            },
            "grid": { "n_theta": c.grid.0, "n_phi": c.grid.1 },
            "coefficients": coefficients.values.len(),
            "field": { "min": number(min), "max": number(max) },
            "summability": {
                "partial": number(summability.partial),
                "tail_bound": summability.tail_bound.map(number),
            },
            "covariance_deficit": deficit,
            "image": image,
        });
        self.write_report("sample", &document)?;
        Ok(Outcome::Passed)
    }

    fn diagnose(&mut self) -> Result<Outcome> {
        let c = self.config;
        let frame = build_frame(c)?;
        let settings = CheckSettings {
            partition_tolerance: c.partition_tolerance,
            parseval_tolerance: c.parseval_tolerance,
            pair_samples: c.pairs,
            seed: c.seed,
            probe: Some(EvalGrid::equirectangular(c.grid.0, c.grid.1)?),
            ..CheckSettings::default()
        };
        let checks = frame_checks(&frame, &settings)?;
        let document = diagnose_document(self.header(), &checks, &settings);
        self.write_report("diagnose", &document)?;
        Ok(outcome(checks.failures.iter().map(|s| s.to_string()).collect()))
    }

    fn render(&mut self) -> Result<Outcome> {
        let c = self.config;
        let input = c
            .input
            .as_ref()
            .ok_or_else(|| Error::Config("render needs a field file".into()))?;
        let record = read_record(input)?;
        let (n_theta, n_phi) = record
            .grid_dims()
            .ok_or_else(|| Error::Config(format!("{} is not an equirectangular field", input.display())))?;
        let rendering = render(&record.values, n_theta, n_phi, c.palette).map_err(|e| Error::Config(e.to_string()))?;
        let stem = file_stem(input);
        let name = format!("{stem}.{}", c.palette.extension());
        self.write(&name, &rendering.encode())?;
        let document = json!({
            "input": input.display().to_string(),
            "image": name,
            "palette": c.palette.name(),
            "width": rendering.width,
            "height": rendering.height,
            "min": number(rendering.min),
            "max": number(rendering.max),
            "expansion": record.expansion.name(),
            "seed": record.seed,
        });
        self.write_report(&format!("{stem}.render"), &document)?;
        Ok(Outcome::Passed)
    }
}

fn outcome(failures: Vec<String>) -> Outcome {
    if failures.is_empty() {
        Outcome::Passed
    } else {
        Outcome::Failed(failures)
    }
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "field".into(), |s| s.to_string_lossy().into_owned())
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)))
}

fn spectrum_summary(spectrum: &PowerSpectrum) -> Value {
    let (family, parameter) = match spectrum.family() {
        SpectrumFamily::PowerLaw { beta } => ("power-law", Some(beta)),
        SpectrumFamily::Constant { value } => ("constant", Some(value)),
        SpectrumFamily::Table => ("table", None),
    };
    json!({ "family": family, "parameter": parameter, "lmax": spectrum.lmax() })
}

fn behaviour_name(b: SeriesBehaviour) -> &'static str {
    match b {
        SeriesBehaviour::Converges => "converges",
        SeriesBehaviour::Borderline => "borderline",
        SeriesBehaviour::Diverges => "diverges",
        SeriesBehaviour::Unknown => "unknown",
    }
}

fn fit_document(fit: &Option<ScalingFit>) -> Value {
    match fit {
        None => Value::Null,
        Some(fit) => json!({
            "levels": fit.levels,
            "values": fit.values.iter().map(|v| number(*v)).collect::<Vec<_>>(),
            "slope": number(fit.slope),
        }),
    }
}

pub fn diagnose_document(run: Value, checks: &FrameCheckReport, settings: &CheckSettings) -> Value {
    let p = &checks.partition;
    let parseval = &checks.parseval;
    let o = &checks.orthogonality;
    json!({
        "run": run,
        "partition": {
            "boundary": p.boundary,
            "max_deviation": number(p.max_deviation),
            "tolerance": settings.partition_tolerance,
            "passed": !checks.failures.contains(&"partition"),
        },
        "parseval": {
            "lmax_tested": parseval.lmax_tested,
            "worst_deviation": number(parseval.worst_deviation),
            "worst_at": [parseval.worst_at.0, parseval.worst_at.1],
            "tolerance": settings.parseval_tolerance,
            "passed": !checks.failures.contains(&"parseval"),
        },
        "orthogonality": {
            "pairs_checked": o.pairs_checked,
            "max_nonadjacent": number(o.max_nonadjacent),
            "max_adjacent": number(o.max_adjacent),
            "passed": !checks.failures.contains(&"orthogonality"),
        },
        "vanishing_moments": {
            "moments_checked": o.moments_checked,
            "moment_lmax": settings.moment_lmax,
            "max_moment": number(o.max_moment),
            "passed": !checks.failures.contains(&"vanishing_moments"),
        },
        "localisation": {
            "peak_fit": fit_document(&checks.peaks),
            "profiles": checks.profiles.iter().map(|pr| json!({
                "level": pr.level,
                "index": pr.index,
                "peak": number(pr.peak),
                "tail_exponent": pr.tail_exponent.map(number),
            })).collect::<Vec<_>>(),
            "largest_tail_exponent": checks.largest_tail_exponent().map(number),
        },
        "levelwise": fit_document(&checks.levelwise),
        "failures": checks.failures,
        "passed": checks.passed(),
    })
}
