use super::{BumpTwist, HamiltonianFlow, Leaf, MapDefinition, MapExpr};
use crate::error::{Error, Result, SourcePos};
use crate::expr::syntax::{Node, Parser, Syntax, SyntaxError};
use crate::expr::{Expr, Var};
use crate::surface::{pt, Chart};

pub(crate) const DEFAULT_FLOW_STEP: f64 = 1e-3;

/// Position of a byte offset inside a standalone source string.
pub(crate) fn locate(src: &str, offset: usize) -> SourcePos {
    let offset = offset.min(src.len());
    let before = &src[..offset];
    let line = before.matches('\n').count() + 1;
    let col_start = before.rfind('\n').map_or(0, |i| i + 1);
    SourcePos { line, column: before[col_start..].chars().count() + 1 }
}

/// Parses `<map> on annulus[a, b]` or `<map> on disk`.
pub fn parse_map(src: &str) -> Result<MapDefinition> {
    parse_map_located(src, None, &|off| locate(src, off))
}

/// Parses a map expression. `chart` is used when the text has no `on ...`
/// suffix; if both are present they must agree.
pub(crate) fn parse_map_located(
    src: &str,
    chart: Option<Chart>,
    at: &dyn Fn(usize) -> SourcePos,
) -> Result<MapDefinition> {
    let syn = |e: SyntaxError| Error::Parse { pos: at(e.offset), message: e.message };
    let mut p = Parser::new(src).map_err(syn)?;
    let node = p.expression().map_err(syn)?;
    let mut inline = None;
    if p.eat_keyword("on") {
        let (kind, off) = p.expect_ident().map_err(syn)?;
        inline = Some(match kind.as_str() {
            "annulus" => {
                let ((lo, hi), boff) = p.bracket_pair().map_err(syn)?;
                Chart::annulus(lo, hi).map_err(|e| Error::Validation { pos: at(boff), message: e.to_string() })?
            }
            "disk" => Chart::disk(),
            other => {
                return Err(Error::Parse { pos: at(off), message: format!("unknown chart `{other}`") });
            }
        });
    }
    p.finish().map_err(syn)?;
    let chart = match (inline, chart) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::Validation {
                pos: at(0),
                message: format!("inline chart {} disagrees with configured chart {}", a.describe(), b.describe()),
            });
        }
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => {
            return Err(Error::Validation {
                pos: at(src.len()),
                message: "no chart given (append `on annulus[a, b]` or `on disk`)".into(),
            });
        }
    };
    let expr = Builder { chart, at }.map(&node)?;
    MapDefinition::new(chart, expr)
}

struct Builder<'a> {
    chart: Chart,
    at: &'a dyn Fn(usize) -> SourcePos,
}

impl Builder<'_> {
    fn invalid(&self, offset: usize, message: impl Into<String>) -> Error {
        Error::Validation { pos: (self.at)(offset), message: message.into() }
    }

    fn parse_err(&self, offset: usize, message: impl Into<String>) -> Error {
        Error::Parse { pos: (self.at)(offset), message: message.into() }
    }

    fn map(&self, node: &Node) -> Result<MapExpr> {
        let (name, args): (&str, &[Node]) = match &node.syntax {
            Syntax::Call { name, args } => (name, args),
            Syntax::Ident(name) if name == "identity" => (name, &[]),
            _ => return Err(self.parse_err(node.offset, "expected a map constructor")),
        };
        let arity = |lo: usize, hi: usize| -> Result<()> {
            if args.len() < lo || args.len() > hi {
                let want = if lo == hi { format!("{lo}") } else { format!("{lo} to {hi}") };
                return Err(self.parse_err(
                    node.offset,
                    format!("arity: `{name}` expects {want} argument(s), got {}", args.len()),
                ));
            }
            Ok(())
        };
        let disk = self.chart.is_disk();
        let leaf = match name {
            "compose" => {
                if args.is_empty() {
                    return Err(self.parse_err(node.offset, "arity: `compose` needs at least one map"));
                }
                let parts = args.iter().map(|a| self.map(a)).collect::<Result<Vec<_>>>()?;
                return Ok(MapExpr::Compose(parts));
            }
            "identity" => {
                arity(0, 0)?;
                Leaf::Identity
            }
            "rotation" | "rigid_rotation" => {
                arity(1, 1)?;
                self.annulus_only(name, node)?;
                Leaf::Rotation(self.constant(&args[0])?)
            }
            "twist" => {
                arity(2, 2)?;
                self.annulus_only(name, node)?;
                Leaf::Twist { a1: self.constant(&args[0])?, a0: self.constant(&args[1])? }
            }
            "hamiltonian_flow" => {
                arity(2, 3)?;
                self.annulus_only(name, node)?;
                let h = self.scalar(&args[0], &[Var::X, Var::Y])?;
                let t = self.constant(&args[1])?;
                let step = match args.get(2) {
                    Some(a) => self.constant(a)?,
                    None => DEFAULT_FLOW_STEP,
                };
                if !(step > 0.0) {
                    return Err(self.invalid(args.get(2).map_or(node.offset, |a| a.offset), "flow step must be positive"));
                }
                Leaf::HamiltonianFlow(HamiltonianFlow::new(h, t, step).map_err(|e| self.invalid(node.offset, e.to_string()))?)
            }
            "disk_rotation" => {
                arity(1, 1)?;
                self.disk_only(name, node)?;
                Leaf::DiskRotation(self.constant(&args[0])?)
            }
            "disk_twist" => {
                arity(2, 2)?;
                self.disk_only(name, node)?;
                Leaf::DiskTwist { a1: self.constant(&args[0])?, a0: self.constant(&args[1])? }
            }
            "bump_twist" => {
                arity(3, 3)?;
                let center = match &args[0].syntax {
                    Syntax::Tuple(items) if items.len() == 2 => {
                        pt(self.constant(&items[0])?, self.constant(&items[1])?)
                    }
                    _ => return Err(self.invalid(args[0].offset, "bump_twist center must be a pair `(a, b)`")),
                };
                let radius = self.constant(&args[1])?;
                let profile = self.scalar(&args[2], &[Var::R])?;
                let b = BumpTwist::new(center, radius, profile, disk);
                self.check_bump(&b, node.offset, args[2].offset)?;
                Leaf::BumpTwist(b)
            }
            other => return Err(self.parse_err(node.offset, format!("unknown map `{other}`"))),
        };
        Ok(MapExpr::Leaf(leaf))
    }

    fn annulus_only(&self, name: &str, node: &Node) -> Result<()> {
        if self.chart.is_disk() {
            return Err(self.invalid(node.offset, format!("`{name}` is an annulus map but the chart is the disk")));
        }
        Ok(())
    }

    fn disk_only(&self, name: &str, node: &Node) -> Result<()> {
        if !self.chart.is_disk() {
            return Err(self.invalid(node.offset, format!("`{name}` is a disk map but the chart is an annulus")));
        }
        Ok(())
    }

    fn scalar(&self, node: &Node, allowed: &[Var]) -> Result<Expr> {
        let e = Expr::from_syntax(node).map_err(|e| self.parse_err(e.offset, e.message))?;
        if let Some(v) = e.variables().into_iter().find(|v| !allowed.contains(v)) {
            let names: Vec<&str> = allowed.iter().map(|v| v.name()).collect();
            return Err(self.invalid(
                node.offset,
                format!("variable `{}` is not available here (allowed: {})", v.name(), names.join(", ")),
            ));
        }
        Ok(e)
    }

    fn constant(&self, node: &Node) -> Result<f64> {
        let e = self.scalar(node, &[])?;
        let v = e.constant_value().unwrap_or(f64::NAN);
        if !v.is_finite() {
            return Err(self.invalid(node.offset, "argument does not evaluate to a finite number"));
        }
        Ok(v)
    }

    fn check_bump(&self, b: &BumpTwist, at: usize, profile_at: usize) -> Result<()> {
        if !(b.radius > 0.0) {
            return Err(self.invalid(at, "bump_twist radius must be positive"));
        }
        if b.profile_at(1.0).abs() > 1e-12 {
            return Err(self.invalid(profile_at, "bump_twist profile must vanish at r = 1"));
        }
        match self.chart {
            Chart::Disk(_) => {
                let (rc, r) = (b.center.x, b.radius);
                if rc - r <= 0.0 || rc + r >= 1.0 {
                    return Err(self.invalid(
                        at,
                        "bump_twist disk must avoid the origin and stay inside the unit disk",
                    ));
                }
            }
            Chart::Annulus(a) => {
                if b.radius >= 0.5 {
                    return Err(self.invalid(at, "bump_twist radius must be below 1/2 on the annulus"));
                }
                if b.center.x - b.radius <= a.x_min || b.center.x + b.radius >= a.x_max {
                    return Err(self.invalid(at, "bump_twist disk must lie inside the annulus"));
                }
            }
        }
        Ok(())
    }
}
