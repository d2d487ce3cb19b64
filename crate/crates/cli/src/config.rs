//! Run configuration: one serializable struct behind every subcommand, so a
//! parsed configuration can be written out and re-read identically.

use std::path::PathBuf;
use std::str::FromStr;

use hsystem_core::{GridMap, Rational};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandName {
    Bubble,
    Energy,
    Zeromode,
    Reduce,
    Spectrum,
    Scan,
    Series,
    Shoot,
}

impl CommandName {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandName::Bubble => "bubble",
            CommandName::Energy => "energy",
            CommandName::Zeromode => "zeromode",
            CommandName::Reduce => "reduce",
            CommandName::Spectrum => "spectrum",
            CommandName::Scan => "scan",
            CommandName::Series => "series",
            CommandName::Shoot => "shoot",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapName {
    Rational,
    Stereographic,
}

impl MapName {
    pub fn to_grid_map(self) -> GridMap {
        match self {
            MapName::Rational => GridMap::Rational,
            MapName::Stereographic => GridMap::Stereographic,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MapName::Rational => "rational",
            MapName::Stereographic => "stereographic",
        }
    }
}

impl FromStr for MapName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rational" => Ok(MapName::Rational),
            "stereographic" => Ok(MapName::Stereographic),
            other => Err(format!("unknown map: {other}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChartName {
    R,
    Kelvin,
}

impl ChartName {
    pub fn to_chart(self) -> hsystem_core::Chart {
        match self {
            ChartName::R => hsystem_core::Chart::R,
            ChartName::Kelvin => hsystem_core::Chart::KelvinT,
        }
    }
}

impl FromStr for ChartName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "r" => Ok(ChartName::R),
            "kelvin" => Ok(ChartName::Kelvin),
            other => Err(format!("unknown chart: {other} (expected r|kelvin)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    StructuredText,
    Csv,
}

/// λ as typed on the command line. `p/q` text stays exact for the series
/// engine; float consumers coerce it to double.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LambdaArg(pub String);

impl LambdaArg {
    pub fn validate(&self) -> Result<(), String> {
        self.as_f64().map(|_| ())
    }

    /// Exact rational view; decimal text is rejected here.
    pub fn as_rational(&self) -> Result<Rational, String> {
        hsystem_core::series::parse_rational(&self.0)
            .map_err(|_| format!("series lambda must be exact p/q or integer, got {}", self.0))
    }

    /// Double view: decimal, or p/q coerced by division.
    pub fn as_f64(&self) -> Result<f64, String> {
        let text = self.0.trim();
        if let Some((p, q)) = text.split_once('/') {
            let p: f64 = p
                .trim()
                .parse()
                .map_err(|_| format!("malformed rational: {text}"))?;
            let q: f64 = q
                .trim()
                .parse()
                .map_err(|_| format!("malformed rational: {text}"))?;
            if q == 0.0 {
                return Err(format!("zero denominator: {text}"));
            }
            Ok(p / q)
        } else {
            text.parse()
                .map_err(|_| format!("malformed number: {text}"))
        }
    }
}

/// The full run configuration; serializing and re-parsing is the identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandName,
    pub degree: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<LambdaArg>,
    /// node count for single-grid commands
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub grid: Option<usize>,
    /// node counts for scans
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub grids: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub map: Option<MapName>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub maps: Option<Vec<MapName>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub chart: Option<ChartName>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub window: Option<(f64, f64)>,
    /// series seeds a0, a1, b0, b1 as exact rational text
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<[String; 4]>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub g0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub csv_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub plot_script: Option<PathBuf>,
    pub format: OutputFormat,
}

impl RunConfig {
    /// Structural checks shared by argv- and file-sourced configs.
    pub fn validate(&self) -> Result<(), String> {
        if self.degree == 0 {
            return Err("degree must be at least 1".into());
        }
        if let Some(lambda) = &self.lambda {
            lambda.validate()?;
            if self.command == CommandName::Series {
                lambda.as_rational()?;
            }
        }
        if let Some((lo, hi)) = self.window {
            if !(lo < hi) {
                return Err(format!("empty window: {lo}:{hi}"));
            }
        }
        if self.command == CommandName::Scan {
            if self.window.is_none() {
                return Err("scan requires --window".into());
            }
            match &self.grids {
                None => return Err("scan requires --grids".into()),
                Some(g) if g.is_empty() => return Err("scan requires at least one grid".into()),
                _ => {}
            }
        }
        if let Some(seed) = &self.seed {
            for s in seed {
                hsystem_core::series::parse_rational(s)
                    .map_err(|_| format!("malformed rational seed entry: {s}"))?;
            }
        }
        if self.command == CommandName::Series && self.degree != 1 {
            return Err("the exact series engine is specific to degree 1".into());
        }
        if let Some(order) = self.order {
            if order < 4 {
                return Err("series order must be at least 4".into());
            }
        }
        if self.plot_script.is_some() && self.csv_dir.is_none() {
            return Err("--plot-script needs --csv-dir for the data it references".into());
        }
        Ok(())
    }

    /// The config echo embedded at the top of every report.
    pub fn echo(&self) -> String {
        let body = toml::to_string(self).expect("config serializes");
        let mut out = String::new();
        for line in body.lines() {
            out.push_str("#   ");
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}

pub fn parse_window(text: &str) -> Result<(f64, f64), String> {
    let (a, b) = text
        .split_once(':')
        .ok_or_else(|| format!("window must be lo:hi, got {text}"))?;
    let lo: f64 = a
        .parse()
        .map_err(|_| format!("malformed window bound: {a}"))?;
    let hi: f64 = b
        .parse()
        .map_err(|_| format!("malformed window bound: {b}"))?;
    if !(lo < hi) {
        return Err(format!("empty window: {text}"));
    }
    Ok((lo, hi))
}

pub fn parse_seed(text: &str) -> Result<[String; 4], String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(format!(
            "seed must be four comma-separated rationals a0,a1,b0,b1, got {text}"
        ));
    }
    for p in &parts {
        hsystem_core::series::parse_rational(p)
            .map_err(|_| format!("malformed rational seed entry: {p}"))?;
    }
    Ok([
        parts[0].to_string(),
        parts[1].to_string(),
        parts[2].to_string(),
        parts[3].to_string(),
    ])
}

pub fn parse_list_usize(text: &str) -> Result<Vec<usize>, String> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| format!("malformed grid size: {p}"))
        })
        .collect()
}

pub fn parse_maps(text: &str) -> Result<Vec<MapName>, String> {
    text.split(',')
        .map(|p| MapName::from_str(p.trim()))
        .collect()
}
