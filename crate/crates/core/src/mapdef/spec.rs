//! The map spec file: a TOML document with `[chart]`, `[map]`,
//! `[normalization]` and `[tasks]` tables.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::parse::{locate, parse_map_located};
use super::MapDefinition;
use crate::error::{Error, Result, SourcePos};
use crate::surface::{pt, Chart, Point};

/// Where the action function is pinned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Anchor {
    /// The boundary circle at the top of the radial range.
    Outer,
    /// The boundary circle at the bottom of the radial range (the center on the disk).
    Inner,
    Point(Point),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormValue {
    /// The rotation number of the anchoring boundary circle.
    Theta,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub anchor: Anchor,
    pub value: NormValue,
}

impl Default for Normalization {
    fn default() -> Self {
        Self { anchor: Anchor::Outer, value: NormValue::Theta }
    }
}

impl Normalization {
    pub fn at_point(p: Point, value: f64) -> Self {
        Self { anchor: Anchor::Point(p), value: NormValue::Value(value) }
    }

    pub fn describe(&self) -> String {
        let anchor = match self.anchor {
            Anchor::Outer => "outer boundary".to_string(),
            Anchor::Inner => "inner boundary".to_string(),
            Anchor::Point(p) => format!("point ({}, {})", p.x, p.y),
        };
        let value = match self.value {
            NormValue::Theta => "boundary rotation number".to_string(),
            NormValue::Value(v) => format!("{v}"),
        };
        format!("g = {value} at {anchor}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskConfig {
    pub k_max: u32,
    pub grid: u32,
    pub tol: f64,
    pub a: f64,
    pub birkhoff_n: u32,
    pub birkhoff_starts: u32,
    pub seed: u64,
}

impl Default for TaskConfig {
    fn default() -> Self {
        Self { k_max: 12, grid: 64, tol: 1e-9, a: 1.0, birkhoff_n: 4000, birkhoff_starts: 100, seed: 0 }
    }
}

/// A parsed spec file.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSpec {
    pub map: MapDefinition,
    pub normalization: Normalization,
    pub tasks: TaskConfig,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    chart: Option<RawChart>,
    map: RawMap,
    normalization: Option<RawNorm>,
    tasks: Option<TaskConfig>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChart {
    kind: toml::Spanned<String>,
    x_min: Option<f64>,
    x_max: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    expr: toml::Spanned<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNorm {
    anchor: Option<toml::Spanned<String>>,
    value: Option<toml::Spanned<toml::Value>>,
    point: Option<[f64; 2]>,
}

#[derive(Serialize)]
struct OutSpec<'a> {
    chart: OutChart,
    map: OutMap,
    normalization: OutNorm,
    tasks: &'a TaskConfig,
}

#[derive(Serialize)]
struct OutChart {
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    x_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    x_max: Option<f64>,
}

#[derive(Serialize)]
struct OutMap {
    expr: String,
}

#[derive(Serialize)]
struct OutNorm {
    anchor: &'static str,
    value: toml::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    point: Option<[f64; 2]>,
}

impl MapSpec {
    pub fn new(map: MapDefinition) -> Self {
        Self { map, normalization: Normalization::default(), tasks: TaskConfig::default() }
    }

    pub fn parse(text: &str) -> Result<MapSpec> {
        let at = |off: usize| locate(text, off);
        let raw: RawSpec = toml::from_str(text).map_err(|e| Error::Parse {
            pos: e.span().map_or(SourcePos { line: 1, column: 1 }, |s| at(s.start)),
            message: e.message().trim().to_string(),
        })?;
        let chart = match &raw.chart {
            None => None,
            Some(c) => Some(match c.kind.get_ref().as_str() {
                "annulus" => {
                    let (lo, hi) = (c.x_min.unwrap_or(0.0), c.x_max.unwrap_or(1.0));
                    Chart::annulus(lo, hi).map_err(|e| Error::Validation { pos: at(c.kind.span().start), message: e.to_string() })?
                }
                "disk" => {
                    if c.x_min.is_some() || c.x_max.is_some() {
                        return Err(Error::Validation {
                            pos: at(c.kind.span().start),
                            message: "the disk chart takes no x_min/x_max".into(),
                        });
                    }
                    Chart::disk()
                }
                other => {
                    return Err(Error::Validation {
                        pos: at(c.kind.span().start),
                        message: format!("unknown chart kind `{other}` (expected `annulus` or `disk`)"),
                    })
                }
            }),
        };
        let body_start = string_body_start(text, raw.map.expr.span().start);
        let src = raw.map.expr.get_ref();
        let map = parse_map_located(src, chart, &|off| at(body_start + off))?;
        let normalization = match raw.normalization {
            None => Normalization::default(),
            Some(n) => normalization(&n, &at)?,
        };
        let tasks = raw.tasks.unwrap_or_default();
        validate_tasks(&tasks)?;
        Ok(MapSpec { map, normalization, tasks })
    }

    /// Canonical TOML text; parsing it gives back an equal spec.
    pub fn to_toml(&self) -> String {
        let chart = match self.map.chart {
            Chart::Annulus(a) => OutChart { kind: "annulus", x_min: Some(a.x_min), x_max: Some(a.x_max) },
            Chart::Disk(_) => OutChart { kind: "disk", x_min: None, x_max: None },
        };
        let (anchor, point) = match self.normalization.anchor {
            Anchor::Outer => ("outer", None),
            Anchor::Inner => ("inner", None),
            Anchor::Point(p) => ("point", Some([p.x, p.y])),
        };
        let value = match self.normalization.value {
            NormValue::Theta => toml::Value::String("theta".into()),
            NormValue::Value(v) => toml::Value::Float(v),
        };
        let out = OutSpec {
            chart,
            map: OutMap { expr: self.map.expr.to_source() },
            normalization: OutNorm { anchor, value, point },
            tasks: &self.tasks,
        };
        toml::to_string(&out).expect("spec serializes")
    }

    /// SHA-256 of the canonical map text (hex).
    pub fn map_hash(&self) -> String {
        let digest = Sha256::digest(self.map.to_source().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn string_body_start(text: &str, start: usize) -> usize {
    let rest = &text[start..];
    if rest.starts_with("\"\"\"") || rest.starts_with("'''") {
        let after = start + 3;
        if text[after..].starts_with("\r\n") {
            after + 2
        } else if text[after..].starts_with('\n') {
            after + 1
        } else {
            after
        }
    } else {
        start + 1
    }
}

fn normalization(n: &RawNorm, at: &dyn Fn(usize) -> SourcePos) -> Result<Normalization> {
    let anchor = match &n.anchor {
        None => Anchor::Outer,
        Some(a) => match a.get_ref().as_str() {
            "outer" => Anchor::Outer,
            "inner" => Anchor::Inner,
            "point" => match n.point {
                Some([x, y]) => Anchor::Point(pt(x, y)),
                None => {
                    return Err(Error::Validation {
                        pos: at(a.span().start),
                        message: "anchor = \"point\" needs `point = [x, y]`".into(),
                    })
                }
            },
            other => {
                return Err(Error::Validation {
                    pos: at(a.span().start),
                    message: format!("unknown anchor `{other}` (expected outer, inner or point)"),
                })
            }
        },
    };
    let value = match &n.value {
        None => NormValue::Theta,
        Some(v) => match v.get_ref() {
            toml::Value::String(s) if s == "theta" => NormValue::Theta,
            toml::Value::Float(f) => NormValue::Value(*f),
            toml::Value::Integer(i) => NormValue::Value(*i as f64),
            _ => {
                return Err(Error::Validation {
                    pos: at(v.span().start),
                    message: "normalization value must be a number or \"theta\"".into(),
                })
            }
        },
    };
    if matches!(anchor, Anchor::Point(_)) && value == NormValue::Theta {
        return Err(Error::Validation {
            pos: at(n.anchor.as_ref().map_or(0, |a| a.span().start)),
            message: "a point anchor needs a numeric value".into(),
        });
    }
    Ok(Normalization { anchor, value })
}

fn validate_tasks(t: &TaskConfig) -> Result<()> {
    let bad = |m: &str| Err(Error::InvalidInput(m.to_string()));
    if t.k_max < 1 {
        return bad("tasks.k_max must be at least 1");
    }
    if t.grid < 8 {
        return bad("tasks.grid must be at least 8");
    }
    if !(t.tol > 0.0) {
        return bad("tasks.tol must be positive");
    }
    if !(t.a >= 0.0) {
        return bad("tasks.a must be nonnegative");
    }
    if t.birkhoff_n < 2 {
        return bad("tasks.birkhoff_n must be at least 2");
    }
    Ok(())
}
