//! Run configuration and its normalized `key=value` text form.
//!
//! The same keys are accepted in configuration files. Blank lines and `#`
//! comments are ignored there, and omitted keys take their defaults.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::image::Palette;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    SpectrumCheck,
    BuildFrame,
    Sample,
    Diagnose,
    Render,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumSpec {
    /// `A_ℓ = (1+ℓ)^{-2(1+β)}` with `β` from the `beta` key.
    PowerLaw,
    Constant(f64),
    Table(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureSpec {
    Gauss,
    EqualArea,
    /// Designs from the `tdesign-dir` directory.
    TDesign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionSpec {
    Kl,
    Needlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub spectrum: SpectrumSpec,
    pub beta: f64,
    pub top_level: u32,
    pub seed: u64,
    /// `(n_theta, n_phi)`.
    pub grid: (usize, usize),
    pub quadrature: QuadratureSpec,
    pub tdesign_dir: Option<PathBuf>,
    pub out: PathBuf,
    pub expansion: ExpansionSpec,
    pub report: ReportFormat,
    /// Forward-difference order `r` for `spectrum-check`.
    pub order: usize,
    pub decay_threshold: f64,
    pub partition_tolerance: f64,
    pub parseval_tolerance: f64,
    /// Random index pairs for the orthogonality check.
    pub pairs: usize,
    /// Whether `sample` also writes a map image.
    pub image: bool,
    pub palette: Palette,
    /// Field file for `render`.
    pub input: Option<PathBuf>,
    /// Test hook: perturbs the cutoff so the partition of unity fails.
    pub corrupt_cutoff: Option<f64>,
}

impl RunConfig {
    pub fn new(subcommand: Subcommand) -> Self {
        Self {
            subcommand,
            spectrum: SpectrumSpec::PowerLaw,
            beta: 0.5,
            top_level: 4,
            seed: 0,
            grid: (64, 128),
            quadrature: QuadratureSpec::Gauss,
            tdesign_dir: None,
            out: PathBuf::from("."),
            expansion: ExpansionSpec::Needlet,
            report: ReportFormat::Json,
            order: 3,
            decay_threshold: 100.0,
            partition_tolerance: 1e-10,
            parseval_tolerance: 1e-8,
            pairs: 1000,
            image: false,
            palette: Palette::Gray,
            input: None,
            corrupt_cutoff: None,
        }
    }

    /// One `key=value` line per setting in a fixed order. `corrupt-cutoff`
    /// appears only when set.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |key: &str, value: String| {
            writeln!(out, "{key}={value}").expect("writing to a String");
        };
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        line("subcommand", subcommand_name(self.subcommand).into());
        line("spectrum", spectrum_text(&self.spectrum));
        line("beta", format!("{:?}", self.beta));
        line("J", self.top_level.to_string());
        line("seed", self.seed.to_string());
        line("grid", format!("{}x{}", self.grid.0, self.grid.1));
        line("quadrature", quadrature_name(self.quadrature).into());
        line("tdesign-dir", path(&self.tdesign_dir));
        line("out", self.out.display().to_string());
        line("expansion", expansion_name(self.expansion).into());
        line("report", report_name(self.report).into());
        line("order", self.order.to_string());
        line("decay-threshold", format!("{:?}", self.decay_threshold));
        line("partition-tolerance", format!("{:?}", self.partition_tolerance));
        line("parseval-tolerance", format!("{:?}", self.parseval_tolerance));
        line("pairs", self.pairs.to_string());
        line("image", self.image.to_string());
        line("palette", self.palette.name().into());
        line("input", path(&self.input));
        if let Some(a) = self.corrupt_cutoff {
            line("corrupt-cutoff", format!("{a:?}"));
        }
        out
    }

    /// Parses a full configuration; `subcommand` is required.
    pub fn from_text(text: &str) -> Result<Self> {
        let pairs = parse_pairs(text)?;
        let name = pairs.get("subcommand").ok_or_else(|| Error::Config("missing key `subcommand`".into()))?;
        let mut config = Self::new(parse_subcommand(name)?);
        config.apply(&pairs)?;
        Ok(config)
    }

    /// Overrides settings from `key → value` pairs.
    pub fn apply(&mut self, pairs: &BTreeMap<String, String>) -> Result<()> {
        for (key, value) in pairs {
            self.set(key, value)?;
        }
        self.validate()
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("`{key}`: {what}, got `{value}`"));
        let number = || value.parse::<f64>().map_err(|_| bad("expected a number"));
        let path = || (!value.is_empty()).then(|| PathBuf::from(value));
        match key {
            "subcommand" => self.subcommand = parse_subcommand(value)?,
            "spectrum" => self.spectrum = parse_spectrum(value).ok_or_else(|| bad("expected `power-law`, `constant[:A]` or `table:PATH`"))?,
            "beta" => self.beta = number()?,
            "J" => self.top_level = value.parse().map_err(|_| bad("expected a level"))?,
            "seed" => self.seed = value.parse().map_err(|_| bad("expected an unsigned 64-bit integer"))?,
            "grid" => self.grid = parse_grid(value).ok_or_else(|| bad("expected `NTHETAxNPHI`"))?,
            "quadrature" => {
                self.quadrature = match value {
                    "gauss" => QuadratureSpec::Gauss,
                    "equal-area" => QuadratureSpec::EqualArea,
                    "tdesign" => QuadratureSpec::TDesign,
                    _ => return Err(bad("expected `gauss`, `equal-area` or `tdesign`")),
                }
            }
            "tdesign-dir" => self.tdesign_dir = path(),
            "out" => self.out = path().ok_or_else(|| bad("expected a directory"))?,
            "expansion" => {
                self.expansion = match value {
                    "kl" => ExpansionSpec::Kl,
                    "needlet" => ExpansionSpec::Needlet,
                    _ => return Err(bad("expected `kl` or `needlet`")),
                }
            }
            "report" => {
                self.report = match value {
                    "json" => ReportFormat::Json,
                    "text" => ReportFormat::Text,
                    _ => return Err(bad("expected `json` or `text`")),
                }
            }
            "order" => self.order = value.parse().map_err(|_| bad("expected a non-negative integer"))?,
            "decay-threshold" => self.decay_threshold = number()?,
            "partition-tolerance" => self.partition_tolerance = number()?,
            "parseval-tolerance" => self.parseval_tolerance = number()?,
            "pairs" => self.pairs = value.parse().map_err(|_| bad("expected a non-negative integer"))?,
            "image" => self.image = value.parse().map_err(|_| bad("expected `true` or `false`"))?,
            "palette" => {
                self.palette = match value {
                    "gray" => Palette::Gray,
                    "diverging" => Palette::Diverging,
                    _ => return Err(bad("expected `gray` or `diverging`")),
                }
            }
            "input" => self.input = path(),
            "corrupt-cutoff" => self.corrupt_cutoff = if value.is_empty() { None } else { Some(number()?) },
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("`{name}` must be positive and finite, got {v}")))
            }
        };
        positive("beta", self.beta)?;
        positive("decay-threshold", self.decay_threshold)?;
        positive("partition-tolerance", self.partition_tolerance)?;
        positive("parseval-tolerance", self.parseval_tolerance)?;
        if let SpectrumSpec::Constant(a) = self.spectrum {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(Error::Config(format!("constant spectrum value must be non-negative, got {a}")));
            }
        }
        if self.top_level > 16 {
            return Err(Error::Config(format!("`J` must be at most 16, got {}", self.top_level)));
        }
        Ok(())
    }
}

/// `key=value` lines; duplicate keys are rejected.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut pairs = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key=value`", i + 1)))?;
        let key = key.trim().to_owned();
        if pairs.insert(key.clone(), value.trim().to_owned()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key `{key}`", i + 1)));
        }
    }
    Ok(pairs)
}

fn parse_subcommand(value: &str) -> Result<Subcommand> {
    Ok(match value {
        "spectrum-check" => Subcommand::SpectrumCheck,
        "build-frame" => Subcommand::BuildFrame,
        "sample" => Subcommand::Sample,
        "diagnose" => Subcommand::Diagnose,
        "render" => Subcommand::Render,
        _ => return Err(Error::Config(format!("unknown subcommand `{value}`"))),
    })
}

pub fn subcommand_name(s: Subcommand) -> &'static str {
    match s {
        Subcommand::SpectrumCheck => "spectrum-check",
        Subcommand::BuildFrame => "build-frame",
        Subcommand::Sample => "sample",
        Subcommand::Diagnose => "diagnose",
        Subcommand::Render => "render",
    }
}

/// `power-law`, `constant` (value 1), `constant:A`, or `table:PATH`.
pub fn parse_spectrum(value: &str) -> Option<SpectrumSpec> {
    match value {
        "power-law" => Some(SpectrumSpec::PowerLaw),
        "constant" => Some(SpectrumSpec::Constant(1.0)),
        _ => {
            if let Some(a) = value.strip_prefix("constant:") {
                a.parse().ok().map(SpectrumSpec::Constant)
            } else {
                value
                    .strip_prefix("table:")
                    .filter(|p| !p.is_empty())
                    .map(|p| SpectrumSpec::Table(PathBuf::from(p)))
            }
        }
    }
}

pub fn spectrum_text(spec: &SpectrumSpec) -> String {
    match spec {
        SpectrumSpec::PowerLaw => "power-law".into(),
        SpectrumSpec::Constant(a) => format!("constant:{a:?}"),
        SpectrumSpec::Table(p) => format!("table:{}", p.display()),
    }
}

fn parse_grid(value: &str) -> Option<(usize, usize)> {
    let (a, b) = value.split_once('x')?;
    let dims = (a.parse().ok()?, b.parse().ok()?);
    (dims.0 > 0 && dims.1 > 0).then_some(dims)
}

pub fn quadrature_name(q: QuadratureSpec) -> &'static str {
    match q {
        QuadratureSpec::Gauss => "gauss",
        QuadratureSpec::EqualArea => "equal-area",
        QuadratureSpec::TDesign => "tdesign",
    }
}

pub fn expansion_name(e: ExpansionSpec) -> &'static str {
    match e {
        ExpansionSpec::Kl => "kl",
        ExpansionSpec::Needlet => "needlet",
    }
}

pub fn report_name(r: ReportFormat) -> &'static str {
    match r {
        ReportFormat::Json => "json",
        ReportFormat::Text => "text",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_round_trip() {
        let config = RunConfig::new(Subcommand::Diagnose);
        let text = config.to_text();
        assert!(text.starts_with("subcommand=diagnose\nspectrum=power-law\nbeta=0.5\nJ=4\n"));
        assert!(!text.contains("corrupt-cutoff"));
        assert_eq!(RunConfig::from_text(&text).unwrap(), config);
    }

    #[test]
    fn file_syntax() {
        let config = RunConfig::from_text("# run\nsubcommand = sample\n\nseed=42 # fixed\ngrid=8x16\n").unwrap();
        assert_eq!(config.seed, 42);
        assert_eq!(config.grid, (8, 16));
        assert!(RunConfig::from_text("seed=1\n").is_err());
        assert!(RunConfig::from_text("subcommand=sample\nseed=1\nseed=2\n").is_err());
        assert!(RunConfig::from_text("subcommand=sample\ncolour=red\n").is_err());
        assert!(RunConfig::from_text("subcommand=sample\ngrid=0x4\n").is_err());
        assert!(RunConfig::from_text("subcommand=sample\nbeta=-1\n").is_err());
        assert!(RunConfig::from_text("subcommand=sample\nJ=17\n").is_err());
    }

    #[test]
    fn spectrum_specs() {
        assert_eq!(parse_spectrum("constant"), Some(SpectrumSpec::Constant(1.0)));
        assert_eq!(parse_spectrum("constant:2.5"), Some(SpectrumSpec::Constant(2.5)));
        assert_eq!(parse_spectrum("table:a/b.txt"), Some(SpectrumSpec::Table("a/b.txt".into())));
        assert_eq!(parse_spectrum("table:"), None);
        assert_eq!(parse_spectrum("gaussian"), None);
    }

    fn arb_config() -> impl Strategy<Value = RunConfig> {
        let sub = prop_oneof![
            Just(Subcommand::SpectrumCheck),
            Just(Subcommand::BuildFrame),
            Just(Subcommand::Sample),
            Just(Subcommand::Diagnose),
            Just(Subcommand::Render),
        ];
        let spectrum = prop_oneof![
            Just(SpectrumSpec::PowerLaw),
            (0.0f64..1e6).prop_map(SpectrumSpec::Constant),
            "[a-z]{1,8}(/[a-z0-9_.]{1,8}){0,2}".prop_map(|p| SpectrumSpec::Table(p.into())),
        ];
        let quadrature = prop_oneof![
            Just(QuadratureSpec::Gauss),
            Just(QuadratureSpec::EqualArea),
            Just(QuadratureSpec::TDesign)
        ];
        let path = proptest::option::of("[a-z]{1,8}(/[a-z0-9]{1,4})?".prop_map(PathBuf::from));
        (
            (sub, spectrum, 1e-3f64..10.0, 0u32..=16, any::<u64>(), (1usize..512, 1usize..1024)),
            (quadrature, path.clone(), "[a-z]{1,6}".prop_map(PathBuf::from), any::<bool>(), any::<bool>()),
            (0usize..8, 1e-3f64..1e6, 1e-14f64..1.0, 1e-14f64..1.0, 0usize..5000, any::<bool>(), any::<bool>()),
            (path, proptest::option::of(-0.5f64..0.5)),
        )
            .prop_map(|(a, b, c, d)| RunConfig {
                subcommand: a.0,
                spectrum: a.1,
                beta: a.2,
                top_level: a.3,
                seed: a.4,
                grid: a.5,
                quadrature: b.0,
                tdesign_dir: b.1,
                out: b.2,
                expansion: if b.3 { ExpansionSpec::Kl } else { ExpansionSpec::Needlet },
                report: if b.4 { ReportFormat::Json } else { ReportFormat::Text },
                order: c.0,
                decay_threshold: c.1,
                partition_tolerance: c.2,
                parseval_tolerance: c.3,
                pairs: c.4,
                image: c.5,
                palette: if c.6 { Palette::Gray } else { Palette::Diverging },
                input: d.0,
                corrupt_cutoff: d.1,
            })
    }

    proptest! {
        #[test]
        fn normalized_text_round_trips(config in arb_config()) {
            let text = config.to_text();
            let back = RunConfig::from_text(&text).unwrap();
            prop_assert_eq!(&back, &config);
            prop_assert_eq!(back.to_text(), text);
        }
    }
}
