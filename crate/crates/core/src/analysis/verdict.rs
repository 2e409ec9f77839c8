use serde::Serialize;

use crate::orbits::PeriodicOrbit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    WitnessFound,
    NoWitnessAtDepth,
    HypothesisNotMet,
}

/// The numbers a hypothesis is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypothesisValues {
    pub theta0: f64,
    pub theta1: f64,
    pub flux: f64,
    pub calabi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtLeast,
    AtMost,
}

/// An inequality an orbit can witness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Conclusion {
    /// `𝒜 ≥ constant + rho_coeff·ρ` (or `≤`).
    Action { bound: Bound, constant: f64, rho_coeff: f64 },
    /// `ρ ≥ θ₀`, and `𝒜 ≥ action_if_equal` when `ρ = θ₀`.
    RhoAtLeast { theta0: f64, action_if_equal: f64 },
}

impl Conclusion {
    pub fn at_least(constant: f64, rho_coeff: f64) -> Self {
        Conclusion::Action { bound: Bound::AtLeast, constant, rho_coeff }
    }

    pub fn at_most(constant: f64, rho_coeff: f64) -> Self {
        Conclusion::Action { bound: Bound::AtMost, constant, rho_coeff }
    }

    /// Margin by which `(ρ, 𝒜)` satisfies the inequality; `None` if it
    /// fails by more than `tol`.
    pub fn slack(&self, rho: f64, action: f64, tol: f64) -> Option<f64> {
        let s = match *self {
            Conclusion::Action { bound, constant, rho_coeff } => {
                let rhs = constant + rho_coeff * rho;
                match bound {
                    Bound::AtLeast => action - rhs,
                    Bound::AtMost => rhs - action,
                }
            }
            Conclusion::RhoAtLeast { theta0, action_if_equal } => {
                if (rho - theta0).abs() <= tol {
                    action - action_if_equal
                } else {
                    rho - theta0
                }
            }
        };
        (s >= -tol).then_some(s)
    }

    pub fn describe(&self) -> String {
        match *self {
            Conclusion::Action { bound, constant, rho_coeff } => {
                let op = if bound == Bound::AtLeast { ">=" } else { "<=" };
                if rho_coeff == 0.0 {
                    format!("A(gamma) {op} {constant}")
                } else {
                    format!("A(gamma) {op} {constant} + ({rho_coeff})*rho(gamma)")
                }
            }
            Conclusion::RhoAtLeast { theta0, action_if_equal } => {
                format!("rho(gamma) >= {theta0}, and A(gamma) >= {action_if_equal} if rho(gamma) = {theta0}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub k: u32,
    pub m: i64,
    pub rho: f64,
    pub action: f64,
    pub start: (f64, f64),
    pub continuum: bool,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub check: String,
    pub hypothesis: String,
    pub hypothesis_holds: bool,
    pub values: HypothesisValues,
    pub conclusions: Vec<Conclusion>,
    /// One witness per conclusion when the status is `witness_found`.
    pub witnesses: Vec<Option<Witness>>,
    pub status: Status,
    pub tol: f64,
    pub note: Option<String>,
}

/// The orbit with the smallest nonnegative margin for `c`.
pub fn tightest_witness(c: &Conclusion, atlas: &[PeriodicOrbit], tol: f64) -> Option<Witness> {
    atlas
        .iter()
        .filter_map(|o| {
            let rho = o.rho_f64();
            c.slack(rho, o.mean_action, tol).map(|slack| Witness {
                k: o.k,
                m: o.m,
                rho,
                action: o.mean_action,
                start: (o.points[0].x, o.points[0].y),
                continuum: o.continuum,
                slack,
            })
        })
        .min_by(|a, b| a.slack.total_cmp(&b.slack))
}

impl Verdict {
    /// Evaluates the conclusions against the atlas when the hypothesis holds.
    pub fn evaluate(
        check: impl Into<String>,
        hypothesis: impl Into<String>,
        hypothesis_holds: bool,
        values: HypothesisValues,
        conclusions: Vec<Conclusion>,
        atlas: &[PeriodicOrbit],
        tol: f64,
    ) -> Verdict {
        let (witnesses, status) = if !hypothesis_holds {
            (vec![None; conclusions.len()], Status::HypothesisNotMet)
        } else {
            let w: Vec<Option<Witness>> = conclusions.iter().map(|c| tightest_witness(c, atlas, tol)).collect();
            let status = if w.iter().all(Option::is_some) { Status::WitnessFound } else { Status::NoWitnessAtDepth };
            (w, status)
        };
        Verdict {
            check: check.into(),
            hypothesis: hypothesis.into(),
            hypothesis_holds,
            values,
            conclusions,
            witnesses,
            status,
            tol,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Re-derives every witness's inequality from the atlas entry it names.
    pub fn recheck(&self, atlas: &[PeriodicOrbit]) -> bool {
        if self.status != Status::WitnessFound {
            return true;
        }
        self.conclusions.iter().zip(&self.witnesses).all(|(c, w)| {
            let Some(w) = w else { return false };
            atlas.iter().any(|o| {
                o.k == w.k
                    && o.m == w.m
                    && o.points[0].x == w.start.0
                    && o.points[0].y == w.start.1
                    && c.slack(o.m as f64 / o.k as f64, o.mean_action, self.tol).is_some()
            })
        })
    }
}
