//! Deterministic JSON, CSV and SVG output.
//!
//! Floats are written with a fixed 12 digits after the point; residual-like
//! fields (see [`SCIENTIFIC_KEYS`]) in scientific notation with 6 digits.
//! Non-finite values become `null`.

use std::fmt::Write;

use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{Diagram, PointKind};
use crate::error::{Error, Result};
use crate::mapdef::MapSpec;
use crate::orbits::{BirkhoffSample, PeriodicOrbit};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Keys whose values are printed as `{:.6e}`.
pub const SCIENTIFIC_KEYS: [&str; 7] = ["residual", "tail_gap", "tol", "gap", "slack", "max_gap", "estimate"];

/// The block every output file starts with.
pub fn header<C: Serialize>(spec: &MapSpec, config: &C) -> Result<Value> {
    Ok(json!({
        "tool": "calabi",
        "tool_version": TOOL_VERSION,
        "map": spec.map.to_source(),
        "map_hash": spec.map_hash(),
        "config": to_value(config)?,
    }))
}

pub fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::InvalidInput(format!("cannot serialize report: {e}")))
}

pub fn orbit_value(o: &PeriodicOrbit) -> Value {
    json!({
        "k": o.k,
        "m": o.m,
        "rho": format!("{}/{}", o.rho.numer(), o.rho.denom()),
        "rho_value": o.rho_f64(),
        "mean_action": o.mean_action,
        "residual": o.residual,
        "continuum": o.continuum,
        "points": o.points.iter().map(|p| json!([p.x, p.y])).collect::<Vec<_>>(),
    })
}

pub fn birkhoff_value(b: &BirkhoffSample) -> Value {
    json!({
        "start": [b.start.x, b.start.y],
        "n": b.n,
        "rho": b.rho_estimate,
        "action": b.action_average,
        "tail_gap": b.tail_gap,
    })
}

/// Pretty JSON with the fixed float formats.
pub fn to_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, None, 0);
    out.push('\n');
    out
}

fn fmt_float(x: f64, key: Option<&str>) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    if key.is_some_and(|k| SCIENTIFIC_KEYS.contains(&k)) {
        format!("{x:.6e}")
    } else {
        let s = format!("{x:.12}");
        // Avoid "-0.000000000000".
        if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
            s.trim_start_matches('-').to_string()
        } else {
            s
        }
    }
}

fn write_value(out: &mut String, v: &Value, key: Option<&str>, indent: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => write!(out, "{i}").unwrap(),
            (_, Some(u)) => write!(out, "{u}").unwrap(),
            _ => out.push_str(&fmt_float(n.as_f64().unwrap_or(f64::NAN), key)),
        },
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            let flat = items.iter().all(|i| !i.is_array() && !i.is_object());
            if items.is_empty() {
                out.push_str("[]");
            } else if flat {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, item, key, indent);
                }
                out.push(']');
            } else {
                out.push_str("[\n");
                for (i, item) in items.iter().enumerate() {
                    out.push_str(&pad(indent + 1));
                    write_value(out, item, key, indent + 1);
                    out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
                }
                out.push_str(&pad(indent));
                out.push(']');
            }
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, item, Some(k), indent + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

/// Diagram rows `rho,action,kind,k,m,continuum`, preceded by `#` lines
/// carrying the header.
pub fn diagram_csv(d: &Diagram, header: &Value) -> String {
    let mut out = String::new();
    for line in to_json(header).lines() {
        writeln!(out, "# {line}").unwrap();
    }
    out.push_str("rho,action,kind,k,m,continuum\n");
    for p in &d.points {
        let (k, m, c) = match p.kind {
            PointKind::Orbit { k, m, continuum } => (k.to_string(), m.to_string(), continuum.to_string()),
            _ => (String::new(), String::new(), String::new()),
        };
        writeln!(out, "{},{},{},{k},{m},{c}", fmt_float(p.rho, None), fmt_float(p.action, None), p.kind.label()).unwrap();
    }
    out
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 480.0;
const MARGIN: f64 = 60.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn sx(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (SVG_W - 2.0 * MARGIN)
    }

    fn sy(&self, y: f64) -> f64 {
        SVG_H - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (SVG_H - 2.0 * MARGIN)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    let w = hi - lo;
    if w > 1e-9 {
        (lo - 0.08 * w, hi + 0.08 * w)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace("--", "- -")
}

/// Static action–rotation plot: hull, points colored by kind, the Lebesgue
/// point in red, the line `ρ = θ₀` and dashed green `a`-lines.
pub fn diagram_svg(d: &Diagram, header: &Value, title: &str) -> String {
    let (rlo, rhi) = d.rho_span();
    let (alo, ahi) = d.action_span();
    let (x0, x1) = padded(rlo, rhi);
    let (y0, y1) = padded(alo, ahi);
    let f = Frame { x0, x1, y0, y1 };
    let n = |v: f64| format!("{v:.3}");
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" viewBox="0 0 {SVG_W} {SVG_H}">"#).unwrap();
    writeln!(s, "<!--\n{}-->", escape(&to_json(header))).unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#, n(SVG_W / 2.0), escape(title)).unwrap();
    writeln!(s, r#"<defs><clipPath id="plot"><rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}"/></clipPath></defs>"#, SVG_W - 2.0 * MARGIN, SVG_H - 2.0 * MARGIN).unwrap();

    // Axes with end labels.
    let (bx, by) = (f.sx(x0), f.sy(y0));
    writeln!(s, r#"<g stroke="black" stroke-width="1"><line x1="{}" y1="{}" x2="{}" y2="{}"/><line x1="{}" y1="{}" x2="{}" y2="{}"/></g>"#, n(bx), n(by), n(f.sx(x1)), n(by), n(bx), n(by), n(bx), n(f.sy(y1))).unwrap();
    for (v, label) in [(rlo, fmt_short(rlo)), (rhi, fmt_short(rhi))] {
        writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{label}</text>"#, n(f.sx(v)), n(by + 16.0)).unwrap();
    }
    for (v, label) in [(alo, fmt_short(alo)), (ahi, fmt_short(ahi))] {
        writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{label}</text>"#, n(bx - 6.0), n(f.sy(v) + 4.0)).unwrap();
    }
    writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">rotation number</text>"#, n(SVG_W / 2.0), n(SVG_H - 18.0)).unwrap();
    writeln!(s, r#"<text x="16" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {})">mean action</text>"#, n(SVG_H / 2.0), n(SVG_H / 2.0)).unwrap();

    s.push_str("<g clip-path=\"url(#plot)\">\n");
    if let Some(t0) = d.theta0 {
        writeln!(s, r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#555" stroke-width="1"/>"##, n(f.sx(t0)), n(f.sy(y0)), n(f.sx(t0)), n(f.sy(y1))).unwrap();
    }
    for line in &d.green_lines {
        let label = line.a.map_or("a=inf".to_string(), |a| format!("a={a}"));
        let (ax, ay, bx2, by2) = match line.slope {
            Some(_) => (x0, line.at(x0).unwrap_or(0.0), x1, line.at(x1).unwrap_or(0.0)),
            None => (line.through.0, y0, line.through.0, y1),
        };
        writeln!(s, r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="green" stroke-width="1" stroke-dasharray="5,4"/>"##, n(f.sx(ax)), n(f.sy(ay)), n(f.sx(bx2)), n(f.sy(by2))).unwrap();
        writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10" fill="green">{label}</text>"#, n(f.sx(line.through.0) + 4.0), n(f.sy(line.through.1) - 4.0)).unwrap();
    }
    if d.hull.len() >= 2 {
        let pts: Vec<String> = d.hull.iter().map(|&(x, y)| format!("{},{}", n(f.sx(x)), n(f.sy(y)))).collect();
        writeln!(s, r##"<polygon points="{}" fill="#4477aa" fill-opacity="0.15" stroke="#4477aa" stroke-width="1"/>"##, pts.join(" ")).unwrap();
    }
    for p in &d.points {
        let (color, r) = match p.kind {
            PointKind::Orbit { continuum: true, .. } => ("#7733aa", 3.0),
            PointKind::Orbit { .. } => ("#2255cc", 3.0),
            PointKind::Birkhoff { .. } => ("#ee8800", 2.0),
            PointKind::Lebesgue => continue,
        };
        writeln!(s, r#"<circle cx="{}" cy="{}" r="{r}" fill="{color}"/>"#, n(f.sx(p.rho)), n(f.sy(p.action))).unwrap();
    }
    if let Some((x, y)) = d.lebesgue {
        writeln!(s, r#"<circle cx="{}" cy="{}" r="4.5" fill="red"/>"#, n(f.sx(x)), n(f.sy(y))).unwrap();
    }
    s.push_str("</g>\n</svg>\n");
    s
}

fn fmt_short(v: f64) -> String {
    format!("{v:.4}")
}
