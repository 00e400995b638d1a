//! TOML run configuration: model, spectrum source and per-command parameters.
//!
//! A file either names a preset (`interval`, `gasket`, `toy(N,τ)`, `carpet`)
//! or spells out a `[model]` block; any other block overrides the preset's
//! defaults.
//!
//! ```toml
//! preset = "gasket"
//!
//! [spectrum]
//! levels = 12
//!
//! [zeta]
//! gamma = 0.0
//! mode = "lemma"
//! grid = "0.2:3:0.1,-10:10:0.5"
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::FractalModel;
use crate::partition::Window;
use crate::spectrum::decimation::{fractal_spectrum, DecimationConfig, Rational};
use crate::spectrum::{interval_spectrum, toy_geometric_spectrum, SpectrumBatch};
use crate::zeta::poles::Region;
use crate::zeta::Mode;

#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    Interval,
    Gasket,
    Toy { n_cells: u32, tau: f64 },
    Carpet,
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::Interval => f.write_str("interval"),
            Preset::Gasket => f.write_str("gasket"),
            Preset::Toy { n_cells, tau } => write!(f, "toy({n_cells},{tau})"),
            Preset::Carpet => f.write_str("carpet"),
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "interval" => return Ok(Preset::Interval),
            "gasket" => return Ok(Preset::Gasket),
            "carpet" => return Ok(Preset::Carpet),
            "toy" => return Ok(Preset::Toy { n_cells: 3, tau: 5.0 }),
            _ => {}
        }
        let args = s
            .strip_prefix("toy(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| {
                Error::Config(format!(
                    "preset: unknown preset '{s}' (interval, gasket, toy(N,tau), carpet)"
                ))
            })?;
        let (n, tau) = args
            .split_once(',')
            .ok_or_else(|| Error::Config(format!("preset: toy needs two arguments, got '{s}'")))?;
        let n_cells = n
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("preset: toy N '{n}' is not an integer")))?;
        let tau = tau
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("preset: toy tau '{tau}' is not a number")))?;
        Ok(Preset::Toy { n_cells, tau })
    }
}

impl Preset {
    pub fn model(&self) -> Result<FractalModel> {
        match *self {
            Preset::Interval => Ok(FractalModel::interval()),
            Preset::Gasket => Ok(FractalModel::gasket()),
            Preset::Toy { n_cells, tau } => {
                FractalModel::toy(n_cells, tau).map_err(|e| Error::Config(format!("preset: {e}")))
            }
            Preset::Carpet => Ok(FractalModel::carpet()),
        }
    }

    fn spectrum(&self) -> SpectrumSource {
        match *self {
            Preset::Interval => SpectrumSource::Interval { m: 2000 },
            Preset::Gasket => SpectrumSource::Decimation {
                levels: 12,
                count: None,
            },
            Preset::Toy { n_cells, .. } => SpectrumSource::Toy {
                depth: default_toy_depth(n_cells),
            },
            Preset::Carpet => SpectrumSource::None,
        }
    }
}

/// Deepest level whose multiplicity `N^K` fits in 64 bits, capped at 40.
fn default_toy_depth(n_cells: u32) -> u32 {
    (1..=40u32)
        .take_while(|&k| u64::from(n_cells).checked_pow(k).is_some())
        .last()
        .unwrap_or(0)
}

/// Energy scaling as a number or an exact `"p/q"` string.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Exact(Rational),
}

impl Scalar {
    pub fn to_f64(self) -> f64 {
        match self {
            Scalar::Number(x) => x,
            Scalar::Exact(r) => r.to_f64(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(rename = "N")]
    pub n_cells: u32,
    #[serde(rename = "rho_F")]
    pub rho_f: Scalar,
    pub d_w: f64,
    #[serde(default)]
    pub d_boundary: f64,
    #[serde(default)]
    pub d_k: Option<Vec<f64>>,
}

fn default_name() -> String {
    "custom".into()
}

impl ModelBlock {
    pub fn build(&self) -> Result<FractalModel> {
        FractalModel::new(
            self.name.clone(),
            self.n_cells,
            self.rho_f.to_f64(),
            self.d_w,
            self.d_boundary,
            self.d_k.clone(),
        )
        .map_err(|e| Error::Config(format!("model: {e}")))
    }
}

/// Where eigenvalues come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase", deny_unknown_fields)]
pub enum SpectrumSource {
    /// `(πn)²` for `n = 1..=m`.
    Interval {
        m: usize,
    },
    /// `τ^k` with multiplicity `N^k`, `k = 0..=depth`.
    Toy {
        depth: u32,
    },
    /// Renormalized decimation limits from `levels` levels, optionally the first `count`.
    Decimation {
        levels: u32,
        #[serde(default)]
        count: Option<usize>,
    },
    None,
}

/// `lo:hi:step` with `hi` included when it lies on the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.lo + self.step * i as f64).collect()
    }
}

impl FromStr for Range {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let parse = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("range '{s}': '{p}' is not a number")))
        };
        let (lo, hi, step) = match parts.as_slice() {
            [lo, hi, step] => (parse(lo)?, parse(hi)?, parse(step)?),
            [lo, hi] => (parse(lo)?, parse(hi)?, 0.0),
            _ => return Err(Error::Config(format!("range '{s}' must be lo:hi or lo:hi:step"))),
        };
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::Config(format!("range '{s}' needs finite lo <= hi")));
        }
        if parts.len() == 3 && !(step > 0.0) {
            return Err(Error::Config(format!("range '{s}': step must be positive")));
        }
        Ok(Range { lo, hi, step })
    }
}

/// Rectangle in `s`: `"re_lo:re_hi:re_step,im_lo:im_hi:im_step"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub re: Range,
    pub im: Range,
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (re, im) = s
            .split_once(',')
            .ok_or_else(|| Error::Config(format!("grid '{s}' must be <re range>,<im range>")))?;
        Ok(Grid {
            re: re.parse()?,
            im: im.parse()?,
        })
    }
}

impl Grid {
    pub fn region(&self) -> Region {
        Region::new((self.re.lo, self.re.hi), (self.im.lo, self.im.hi))
    }
}

/// `"t_lo:t_hi"` with `0 < t_lo < t_hi`.
pub fn parse_window(s: &str) -> Result<Window> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("window '{s}' must be t_lo:t_hi")))?;
    let parse = |p: &str| {
        p.trim()
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("window '{s}': '{p}' is not a number")))
    };
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::Config(format!("window '{s}' needs 0 < t_lo < t_hi")));
    }
    Ok(Window::new(lo, hi))
}

fn de_parsed<'de, D, T>(deserializer: D) -> std::result::Result<Option<T>, D::Error>
where
    D: serde::Deserializer<'de>,
    T: FromStr<Err = Error>,
{
    let raw: Option<String> = Option::deserialize(deserializer)?;
    raw.map(|s| s.parse().map_err(serde::de::Error::custom)).transpose()
}

fn ser_display<S, T: fmt::Display>(value: &Option<T>, serializer: S) -> std::result::Result<S::Ok, S::Error>
where
    S: serde::Serializer,
{
    match value {
        Some(v) => serializer.serialize_some(&v.to_string()),
        None => serializer.serialize_none(),
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.step > 0.0 {
            write!(f, "{}:{}:{}", self.lo, self.hi, self.step)
        } else {
            write!(f, "{}:{}", self.lo, self.hi)
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.re, self.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PartitionBlock {
    /// `t_lo:t_hi:points`; the third entry counts log-spaced samples.
    #[serde(deserialize_with = "de_parsed", serialize_with = "ser_display")]
    pub grid: Option<Range>,
    pub n_max: usize,
    /// Fit window for `weyl`; one period is chosen automatically when absent.
    pub window: Option<String>,
}

impl Default for PartitionBlock {
    fn default() -> Self {
        PartitionBlock {
            grid: None,
            n_max: 8,
            window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZetaBlock {
    pub gamma: f64,
    pub mode: Mode,
    pub n_max: usize,
    /// Continuation fit window `t_lo:t_hi`.
    pub window: Option<String>,
    #[serde(deserialize_with = "de_parsed", serialize_with = "ser_display")]
    pub grid: Option<Grid>,
}

impl Default for ZetaBlock {
    fn default() -> Self {
        ZetaBlock {
            gamma: 0.0,
            mode: Mode::Lemma,
            n_max: 8,
            window: None,
            grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolesBlock {
    /// `re_lo:re_hi,im_lo:im_hi`.
    #[serde(deserialize_with = "de_parsed", serialize_with = "ser_display")]
    pub region: Option<Grid>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub dir: PathBuf,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock {
            dir: PathBuf::from("out"),
        }
    }
}

/// On-disk form, before presets are resolved.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    preset: Option<String>,
    model: Option<ModelBlock>,
    spectrum: Option<SpectrumSource>,
    decimation: Option<DecimationConfig>,
    #[serde(default)]
    partition: PartitionBlock,
    #[serde(default)]
    zeta: ZetaBlock,
    #[serde(default)]
    poles: PolesBlock,
    #[serde(default)]
    output: OutputBlock,
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub model: FractalModel,
    pub spectrum: SpectrumSource,
    pub decimation: Option<DecimationConfig>,
    pub partition: PartitionBlock,
    pub zeta: ZetaBlock,
    pub poles: PolesBlock,
    pub output: OutputBlock,
}

impl RunConfig {
    pub fn preset(name: &str) -> Result<Self> {
        Self::resolve(RawConfig {
            preset: Some(name.to_string()),
            ..RawConfig::default()
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
        Self::resolve(raw)
    }

    fn resolve(raw: RawConfig) -> Result<Self> {
        let preset = raw.preset.as_deref().map(str::parse::<Preset>).transpose()?;
        let model = match (&raw.model, &preset) {
            (Some(block), _) => block.build()?,
            (None, Some(p)) => p.model()?,
            (None, None) => return Err(Error::Config("model: give either `preset` or a [model] block".into())),
        };
        let spectrum = raw
            .spectrum
            .or_else(|| preset.as_ref().map(Preset::spectrum))
            .unwrap_or(SpectrumSource::None);
        let decimation = match (&spectrum, raw.decimation) {
            (SpectrumSource::Decimation { .. }, None) if matches!(preset, Some(Preset::Gasket)) => {
                Some(DecimationConfig::gasket())
            }
            (SpectrumSource::Decimation { .. }, None) => {
                return Err(Error::Config(
                    "decimation: spectrum source 'decimation' needs a [decimation] block".into(),
                ))
            }
            (_, d) => d,
        };
        if let Some(d) = &decimation {
            d.validate(&model)
                .map_err(|e| Error::Config(format!("decimation: {e}")))?;
        }
        let config = RunConfig {
            model,
            spectrum,
            decimation,
            partition: raw.partition,
            zeta: raw.zeta,
            poles: raw.poles,
            output: raw.output,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        match self.spectrum {
            SpectrumSource::Interval { m: 0 } => return Err(Error::Config("spectrum.m must be >= 1".into())),
            SpectrumSource::Decimation { levels: 0, .. } => {
                return Err(Error::Config("spectrum.levels must be >= 1".into()))
            }
            SpectrumSource::Decimation { count: Some(0), .. } => {
                return Err(Error::Config("spectrum.count must be >= 1".into()))
            }
            _ => {}
        }
        if !self.zeta.gamma.is_finite() {
            return Err(Error::Config(format!(
                "zeta.gamma must be finite, got {}",
                self.zeta.gamma
            )));
        }
        if self.zeta.n_max == 0 || self.partition.n_max == 0 {
            return Err(Error::Config("n_max must be >= 1".into()));
        }
        if let Some(w) = &self.zeta.window {
            parse_window(w).map_err(|e| Error::Config(format!("zeta.window: {e}")))?;
        }
        if let Some(w) = &self.partition.window {
            parse_window(w).map_err(|e| Error::Config(format!("partition.window: {e}")))?;
        }
        if let Some(g) = &self.partition.grid {
            if !(g.lo > 0.0 && g.hi > g.lo && g.step >= 2.0) {
                return Err(Error::Config(
                    "partition.grid must be t_lo:t_hi:points with 0 < t_lo < t_hi, points >= 2".into(),
                ));
            }
        }
        Ok(())
    }

    /// Generate the configured spectrum.
    pub fn spectrum(&self) -> Result<SpectrumBatch> {
        match self.spectrum {
            SpectrumSource::Interval { m } => interval_spectrum(m),
            SpectrumSource::Toy { depth } => toy_geometric_spectrum(&self.model, depth),
            SpectrumSource::Decimation { levels, count } => {
                let config = self.decimation.as_ref().expect("validated decimation block");
                fractal_spectrum(&self.model, config, levels, count)
            }
            SpectrumSource::None => Err(Error::Config(format!(
                "spectrum: model '{}' has no spectrum source (parameter-only)",
                self.model.name
            ))),
        }
    }

    pub fn zeta_window(&self) -> Option<Window> {
        self.zeta
            .window
            .as_deref()
            .map(|w| parse_window(w).expect("validated window"))
    }

    pub fn partition_window(&self) -> Option<Window> {
        self.partition
            .window
            .as_deref()
            .map(|w| parse_window(w).expect("validated window"))
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    RunConfig::from_toml_str(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        let c = RunConfig::preset("interval").unwrap();
        assert_eq!(
            (c.model.n_cells, c.model.rho_f, c.model.tau, c.model.d_s),
            (2, 2.0, 4.0, 1.0)
        );
        let c = RunConfig::preset("gasket").unwrap();
        assert_eq!(c.model.tau, 5.0);
        assert!((c.model.d_s - 1.365_212_4).abs() < 1e-7);
        assert!(c.decimation.is_some());
        let c = RunConfig::preset("toy(3, 5)").unwrap();
        assert_eq!(c.spectrum, SpectrumSource::Toy { depth: 40 });
        let c = RunConfig::preset("carpet").unwrap();
        assert!(c.spectrum().is_err());
        assert!(RunConfig::preset("sponge").is_err());
    }

    #[test]
    fn explicit_model_block() {
        let text = r#"
            [model]
            name = "gasket-like"
            N = 3
            rho_F = "5/3"
            d_w = 2.321928094887362

            [spectrum]
            source = "decimation"
            levels = 6
        "#;
        let err = RunConfig::from_toml_str(text).unwrap_err();
        assert!(err.to_string().contains("[decimation]"), "{err}");
        let c = RunConfig::from_toml_str(&format!("preset = \"gasket\"\n{text}")).unwrap();
        assert_eq!(c.model.name, "gasket-like");
        assert_eq!(c.model.tau, 5.0);
        assert!(c.spectrum().unwrap().pairs().len() > 10);
    }

    #[test]
    fn errors_name_the_field() {
        let err = RunConfig::from_toml_str("[model]\nN = 1\nrho_F = 0.5\nd_w = 2\n").unwrap_err();
        assert!(err.to_string().contains("tau <= 1"), "{err}");
        let err = RunConfig::from_toml_str("[model]\nN = 2\nrho_F = 2\nd_w = 2\nd_boundary = 1.5\n").unwrap_err();
        assert!(err.to_string().contains("d_boundary"), "{err}");
        let err = RunConfig::from_toml_str("preset = \"interval\"\n[zeta]\ngama = 1.0\n").unwrap_err();
        assert!(err.to_string().contains("gama"), "{err}");
        let err = RunConfig::from_toml_str("preset = \"interval\"\n[zeta]\nwindow = \"3:1\"\n").unwrap_err();
        assert!(err.to_string().contains("zeta.window"), "{err}");
    }

    #[test]
    fn grid_parsing() {
        let g: Grid = "0.2:3:0.1,-10:10:0.5".parse().unwrap();
        assert_eq!(g.re.values().len(), 29);
        assert_eq!(g.im.values().len(), 41);
        assert_eq!(g.to_string().parse::<Grid>().unwrap(), g);
        assert!("1:0:0.1,0:1:1".parse::<Grid>().is_err());
        assert!("0:1:0,0:1:1".parse::<Grid>().is_err());
        assert!(parse_window("1e-5:4e-5").is_ok());
    }
}
