//! Report documents emitted by the subcommands. JSON carries exact
//! rationals only; text output appends base-10 approximations that are
//! explicitly marked as display values.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::ToPrimitive;
use serde::Serialize;

use reglab_core::criteria::CriterionReport;
use reglab_core::extnum::ExtReal;
use reglab_core::perturb::{Derivation, ExperimentReport, FindViolationReport};
use reglab_core::point::Point;
use reglab_core::rat::Rat;
use reglab_core::verdict::{Verdict, Witness};

use crate::schema::{PointDto, RatDto};

/// Six-significant-digit decimal approximation for display.
pub fn display_approx(v: &ExtReal) -> String {
    match v {
        ExtReal::Inf => "inf".to_string(),
        ExtReal::Finite(r) => match r.to_f64() {
            Some(x) => format!("{x:.5e}"),
            None => "~".to_string(),
        },
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessDto {
    pub x: PointDto,
    pub y: PointDto,
    pub extra: Vec<PointDto>,
}

impl WitnessDto {
    pub fn new(w: &Witness) -> Self {
        WitnessDto {
            x: PointDto::from_point(&w.x),
            y: PointDto::from_point(&w.y),
            extra: w.extra.iter().map(PointDto::from_point).collect(),
        }
    }
}

/// Verdict document: fields holds, witness, lhs, rhs, property,
/// constants.
#[derive(Debug, Clone, Serialize)]
pub struct VerdictDoc {
    pub property: String,
    pub constants: BTreeMap<String, RatDto>,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<RatDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<RatDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vacuous: Option<bool>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl VerdictDoc {
    pub fn new(property: &str, verdict: &Verdict) -> Self {
        VerdictDoc {
            property: property.to_string(),
            constants: BTreeMap::new(),
            holds: verdict.holds,
            witness: verdict.witness.as_ref().map(WitnessDto::new),
            lhs: verdict.witness.as_ref().map(|w| RatDto::from_ext(&w.lhs)),
            rhs: verdict.witness.as_ref().map(|w| RatDto::from_ext(&w.rhs)),
            vacuous: None,
            notes: Vec::new(),
        }
    }

    pub fn with_constant(mut self, name: &str, value: RatDto) -> Self {
        self.constants.insert(name.to_string(), value);
        self
    }

    pub fn to_text(&self, verdict: &Verdict) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{}: {}",
            self.property,
            if self.holds { "PASS" } else { "FAIL" }
        );
        if let Some(v) = self.vacuous {
            if v {
                let _ = writeln!(out, "  (vacuous: no pair constrained the estimate)");
            }
        }
        for (k, v) in &self.constants {
            let _ = writeln!(out, "  {k} = {}", rat_dto_text(v));
        }
        if let Some(w) = &verdict.witness {
            let _ = writeln!(out, "  witness: x = {}, y = {}", w.x, w.y);
            for e in &w.extra {
                let _ = writeln!(out, "           extra point {e}");
            }
            let _ = writeln!(
                out,
                "  lhs = {} (~ {} display), rhs = {} (~ {} display)",
                w.lhs,
                display_approx(&w.lhs),
                w.rhs,
                display_approx(&w.rhs)
            );
        }
        for n in &self.notes {
            let _ = writeln!(out, "  note: {n}");
        }
        out
    }
}

fn rat_dto_text(v: &RatDto) -> String {
    match v {
        RatDto::Int(n) => n.to_string(),
        RatDto::Str(s) => s.clone(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModulusDoc {
    pub modulus: RatDto,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attained_at: Option<(PointDto, PointDto)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvpDoc {
    pub point: PointDto,
    pub steps: usize,
    pub verdict: VerdictDoc,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionDoc {
    pub variant: String,
    pub hypothesis_holds: bool,
    pub vacuous: bool,
    pub qualifying_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failing: Option<FailingDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conclusion: Option<VerdictDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sound: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FailingDto {
    pub u: PointDto,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<PointDto>,
    pub y: PointDto,
    pub x: PointDto,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_tilde: Option<PointDto>,
    pub value: RatDto,
    pub bound: RatDto,
}

impl CriterionDoc {
    pub fn new(variant: &str, report: &CriterionReport) -> Self {
        CriterionDoc {
            variant: variant.to_string(),
            hypothesis_holds: report.hypothesis_holds,
            vacuous: report.vacuous,
            qualifying_count: report.qualifying_count,
            failing: report.failing.as_ref().map(|f| FailingDto {
                u: PointDto::from_point(&f.u),
                v: f.v.as_ref().map(PointDto::from_point),
                y: PointDto::from_point(&f.y),
                x: PointDto::from_point(&f.x),
                v_tilde: f.v_tilde.as_ref().map(PointDto::from_point),
                value: RatDto::from_ext(&f.value),
                bound: RatDto::from_ext(&f.bound),
            }),
            conclusion: report
                .conclusion
                .as_ref()
                .map(|c| VerdictDoc::new("conclusion", c)),
            sound: report.sound,
        }
    }

    pub fn to_text(&self, report: &CriterionReport) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "criterion {}: hypothesis {}{}",
            self.variant,
            if self.hypothesis_holds { "PASS" } else { "FAIL" },
            if self.vacuous { " (vacuous)" } else { "" }
        );
        let _ = writeln!(out, "  qualifying configurations: {}", self.qualifying_count);
        if let Some(f) = &report.failing {
            let _ = writeln!(out, "  stuck configuration: u = {}, y = {}, via x = {}", f.u, f.y, f.x);
            let _ = writeln!(
                out,
                "  value = {} (~ {} display), bound = {} (~ {} display)",
                f.value,
                display_approx(&f.value),
                f.bound,
                display_approx(&f.bound)
            );
        }
        if let Some(c) = &report.conclusion {
            let _ = write!(out, "  conclusion: {c}\n");
        }
        if let Some(s) = self.sound {
            let _ = writeln!(out, "  sound: {s}");
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentDoc {
    pub theorem: String,
    pub derived: BTreeMap<String, RatDto>,
    pub side_conditions: BTreeMap<String, bool>,
    pub hypotheses: Vec<(String, VerdictDoc)>,
    pub conclusion: VerdictDoc,
    pub conclusion_vacuous: bool,
    pub sound: bool,
    pub notes: Vec<String>,
}

impl ExperimentDoc {
    pub fn new(report: &ExperimentReport) -> Self {
        ExperimentDoc {
            theorem: report.theorem.as_str().to_string(),
            derived: derivation_values(&report.derivation),
            side_conditions: report.derivation.side_conditions.clone(),
            hypotheses: report
                .hypotheses
                .iter()
                .map(|(name, v)| (name.clone(), VerdictDoc::new(name, v)))
                .collect(),
            conclusion: VerdictDoc::new("conclusion", &report.conclusion),
            conclusion_vacuous: report.conclusion_vacuous,
            sound: report.sound,
            notes: report.notes.clone(),
        }
    }

    pub fn to_text(&self, report: &ExperimentReport) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "theorem {}", self.theorem);
        for (k, v) in &self.derived {
            let _ = writeln!(out, "  derived {k} = {}", rat_dto_text(v));
        }
        for (k, v) in &self.side_conditions {
            let _ = writeln!(out, "  side condition {k}: {}", if *v { "holds" } else { "fails" });
        }
        for (name, v) in &report.hypotheses {
            let _ = writeln!(out, "  hypothesis {name}: {v}");
        }
        let _ = writeln!(
            out,
            "  conclusion: {}{}",
            report.conclusion,
            if self.conclusion_vacuous { " (vacuous)" } else { "" }
        );
        let _ = writeln!(out, "  sound: {}", self.sound);
        for n in &self.notes {
            let _ = writeln!(out, "  note: {n}");
        }
        out
    }
}

fn derivation_values(d: &Derivation) -> BTreeMap<String, RatDto> {
    d.values
        .iter()
        .map(|(k, v)| (k.clone(), RatDto::from_ext(v)))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ViolationDoc {
    pub kappa_hat: RatDto,
    pub per_scale: Vec<ScaleDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<RatDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<RatDto>,
    pub violated_at_all_scales: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScaleDto {
    pub radius: RatDto,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessDto>,
}

impl ViolationDoc {
    pub fn new(kappa_hat: &Rat, report: &FindViolationReport) -> Self {
        ViolationDoc {
            kappa_hat: RatDto::from_rat(kappa_hat),
            per_scale: report
                .per_scale
                .iter()
                .map(|(r, w)| ScaleDto {
                    radius: RatDto::from_rat(r),
                    witness: w.as_ref().map(WitnessDto::new),
                })
                .collect(),
            witness: report.witness().map(WitnessDto::new),
            lhs: report.witness().map(|w| RatDto::from_ext(&w.lhs)),
            rhs: report.witness().map(|w| RatDto::from_ext(&w.rhs)),
            violated_at_all_scales: report.violated_at_all_scales(),
        }
    }
}

/// Stable pretty JSON used by every subcommand.
pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serialization cannot fail")
}

/// One point rendered the way instance files accept it.
pub fn point_text(p: &Point) -> String {
    format!("{p}")
}
