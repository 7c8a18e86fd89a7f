//! Subcommand drivers: resolve inputs, dispatch to the core checkers,
//! and produce machine-readable and human-readable reports. Exit
//! status is derived from `ok`: a holding verdict (or a produced
//! artifact) exits 0, a failed verdict exits 1, input problems exit 2.

use std::collections::BTreeSet;

use anyhow::{anyhow, bail, Result};

use reglab_core::criteria::{
    criterion_dist_graph, criterion_gamma_graph, criterion_graph_restricted,
    criterion_semireg_dist, criterion_semireg_graph, criterion_single, OmegaParam,
};
use reglab_core::evp::{evp_descend_scaled, evp_verify_scaled, EvpInstance};
use reglab_core::extnum::ExtReal;
use reglab_core::maps::SetValuedMap;
use reglab_core::perturb::{find_violation, run_experiment, ExperimentInstance, TheoremId};
use reglab_core::point::Point;
use reglab_core::rat::{rint, Rat};
use reglab_core::regularity::{
    check_aubin, check_gamma_regular, check_milyutin, check_regular, check_restricted_regular,
    check_semiregular, check_strong_regular, check_sum_stable, coincidence_bound, lipschitz_check,
    regularity_modulus, ModulusReport, Window,
};
use reglab_core::spaces::validate_metric;
use reglab_core::verdict::Verdict;

use crate::report::{
    to_json, CriterionDoc, EvpDoc, ExperimentDoc, ModulusDoc, VerdictDoc, ViolationDoc,
    WitnessDto,
};
use crate::schema::{Instance, PointDto, RatDto};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            other => bail!("unknown format '{other}' (expected json or text)"),
        }
    }
}

/// Outcome of one subcommand run: the rendered output and whether the
/// checked statement holds (None for pure artifact producers).
pub struct Outcome {
    pub output: String,
    pub ok: bool,
}

fn need<'a, T>(value: &'a Option<T>, what: &str) -> Result<&'a T> {
    value.as_ref().ok_or_else(|| anyhow!("instance is missing {what}"))
}

fn need_owned<T: Clone>(value: &Option<T>, what: &str) -> Result<T> {
    Ok(need(value, what)?.clone())
}

fn default_window(inst: &Instance) -> Window {
    inst.window
        .clone()
        .unwrap_or_else(|| Window::product(&inst.x_candidates, &inst.y_candidates))
}

/// Splits a window into contiguous chunks of its sorted pair order so
/// chunked scans report the same witness as the serial scan.
fn window_chunks(w: &Window, jobs: usize) -> Vec<Window> {
    let pairs: Vec<(Point, Point)> = w.pairs().iter().cloned().collect();
    if jobs <= 1 || pairs.len() <= 1 {
        return vec![w.clone()];
    }
    let chunk = pairs.len().div_ceil(jobs);
    pairs
        .chunks(chunk)
        .map(|c| Window::from_pairs(c.iter().cloned()))
        .collect()
}

/// Regularity scan partitioned across threads; the merged verdict
/// equals the serial one because chunks preserve the pair order.
pub fn check_regular_parallel(
    f: &SetValuedMap,
    w: &Window,
    kappa: &Rat,
    jobs: usize,
) -> reglab_core::error::Result<Verdict> {
    let chunks = window_chunks(w, jobs);
    if chunks.len() == 1 {
        return check_regular(f, w, kappa);
    }
    let results: Vec<reglab_core::error::Result<Verdict>> = std::thread::scope(|scope| {
        let handles: Vec<_> = chunks
            .iter()
            .map(|chunk| scope.spawn(move || check_regular(f, chunk, kappa)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("scan worker panicked")).collect()
    });
    for r in results {
        let verdict = r?;
        if !verdict.holds {
            return Ok(verdict);
        }
    }
    Ok(Verdict::pass())
}

/// Modulus scan partitioned across threads with an order-preserving
/// merge: the reported attaining pair matches the serial scan.
pub fn regularity_modulus_parallel(
    f: &SetValuedMap,
    w: &Window,
    jobs: usize,
) -> reglab_core::error::Result<ModulusReport> {
    let chunks = window_chunks(w, jobs);
    if chunks.len() == 1 {
        return regularity_modulus(f, w);
    }
    let results: Vec<reglab_core::error::Result<ModulusReport>> = std::thread::scope(|scope| {
        let handles: Vec<_> = chunks
            .iter()
            .map(|chunk| scope.spawn(move || regularity_modulus(f, chunk)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("scan worker panicked")).collect()
    });
    let mut best = ModulusReport { modulus: ExtReal::zero(), attained_at: None };
    for r in results {
        let report = r?;
        if report.modulus > best.modulus {
            best = report;
        }
    }
    Ok(best)
}

pub fn run_validate(inst: &Instance, format: Format) -> Result<Outcome> {
    let reglab_core::spaces::Space::Explicit(space) = &inst.x_space else {
        bail!("metric validation needs an explicit x_space");
    };
    let verdict = validate_metric(space);
    let doc = VerdictDoc::new("metric-axioms", &verdict);
    let output = match format {
        Format::Json => to_json(&doc),
        Format::Text => doc.to_text(&verdict),
    };
    Ok(Outcome { output, ok: verdict.holds })
}

#[allow(clippy::too_many_arguments)]
pub fn run_verify(
    inst: &Instance,
    property: &str,
    jobs: usize,
    format: Format,
) -> Result<Outcome> {
    let cs = &inst.constants;
    let f = need(&inst.f, "the mapping f")?;
    let window = default_window(inst);
    let mut doc_constants: Vec<(&str, RatDto)> = Vec::new();
    let mut vacuous = None;

    let verdict = match property {
        "regular" => {
            let kappa = need_owned(&cs.kappa, "constant kappa")?;
            doc_constants.push(("kappa", RatDto::from_rat(&kappa)));
            vacuous = Some(window.is_empty());
            check_regular_parallel(f, &window, &kappa, jobs)?
        }
        "restricted" => {
            let kappa = need_owned(&cs.kappa, "constant kappa")?;
            let v: BTreeSet<Point> =
                need_owned(&inst.v_set, "the restriction set v_set")?.into_iter().collect();
            doc_constants.push(("kappa", RatDto::from_rat(&kappa)));
            vacuous = Some(window.is_empty());
            check_restricted_regular(f, &window, &v, &kappa)?
        }
        "gamma" => {
            let kappa = need_owned(&cs.kappa, "constant kappa")?;
            let gamma = need(&inst.gamma, "the gauge")?;
            doc_constants.push(("kappa", RatDto::from_rat(&kappa)));
            check_gamma_regular(
                f,
                &window,
                gamma,
                &kappa,
                &inst.gamma_variant,
                &inst.x_candidates,
            )?
        }
        "milyutin" => {
            let kappa = need_owned(&cs.kappa, "constant kappa")?;
            doc_constants.push(("kappa", RatDto::from_rat(&kappa)));
            check_milyutin(f, &window, &kappa, &inst.gamma_variant, &inst.x_candidates)?
        }
        "semiregular" => {
            let kappa = need_owned(&cs.kappa, "constant kappa")?;
            let x_bar = pick_center_x(inst)?;
            let gamma_set = need_owned(&inst.gamma_set, "the right-hand-side set gamma_set")?;
            let lambda: BTreeSet<Point> =
                need_owned(&inst.lambda_set, "the reference set lambda_set")?
                    .into_iter()
                    .collect();
            doc_constants.push(("kappa", RatDto::from_rat(&kappa)));
            check_semiregular(f, &x_bar, &gamma_set, &lambda, &kappa)?
        }
        "aubin" => {
            let ell = need_owned(&cs.ell, "constant ell")?;
            let u = inst.u_set.clone().unwrap_or_else(|| inst.x_candidates.clone());
            let v: BTreeSet<Point> = match &inst.v_set {
                Some(v) => v.iter().cloned().collect(),
                None => inst
                    .y_candidates
                    .iter()
                    .cloned()
                    .chain(f.range().cloned())
                    .collect(),
            };
            doc_constants.push(("ell", RatDto::from_rat(&ell)));
            check_aubin(f, &u, &v, &ell)?
        }
        "lipschitz" => {
            let ell = need_owned(&cs.ell, "constant ell")?;
            let g = need(&inst.g_single, "the single-valued mapping g")?;
            let u = inst.u_set.clone().unwrap_or_else(|| inst.x_candidates.clone());
            doc_constants.push(("ell", RatDto::from_rat(&ell)));
            lipschitz_check(g, &u, &ell)?
        }
        "sum-stable" => {
            let g = need(&inst.g_set, "the mapping g_set")?;
            let center = need(&inst.center, "the center")?;
            if inst.levels.is_empty() {
                vacuous = Some(true);
            }
            let report =
                check_sum_stable(f, g, (&center.0, &center.1, &center.2), &inst.levels)?;
            report.verdict
        }
        "strong" => {
            let kappa = need_owned(&cs.kappa, "constant kappa")?;
            doc_constants.push(("kappa", RatDto::from_rat(&kappa)));
            check_strong_regular(f, &window, &kappa)?
        }
        "coincidence" => {
            let kappa = need_owned(&cs.kappa, "constant kappa")?;
            let g = need(&inst.g_set, "the mapping g_set")?;
            let x = need_owned(&inst.point, "the query point")?;
            doc_constants.push(("kappa", RatDto::from_rat(&kappa)));
            let report = coincidence_bound(f, g, &x, &kappa)?;
            report.verdict
        }
        other => bail!("unknown property '{other}'"),
    };

    let mut doc = VerdictDoc::new(property, &verdict);
    for (name, value) in doc_constants {
        doc = doc.with_constant(name, value);
    }
    doc.vacuous = vacuous;
    let output = match format {
        Format::Json => to_json(&doc),
        Format::Text => doc.to_text(&verdict),
    };
    Ok(Outcome { output, ok: verdict.holds })
}

fn pick_center_x(inst: &Instance) -> Result<Point> {
    if let Some(p) = &inst.point {
        return Ok(p.clone());
    }
    if let Some((x, _, _)) = &inst.center {
        return Ok(x.clone());
    }
    bail!("instance is missing the reference point (set 'point' or 'center')")
}

pub fn run_modulus(inst: &Instance, jobs: usize, format: Format) -> Result<Outcome> {
    let f = need(&inst.f, "the mapping f")?;
    let window = default_window(inst);
    let report = regularity_modulus_parallel(f, &window, jobs)?;
    let doc = ModulusDoc {
        modulus: RatDto::from_ext(&report.modulus),
        attained_at: report
            .attained_at
            .as_ref()
            .map(|(x, y)| (PointDto::from_point(x), PointDto::from_point(y))),
    };
    let output = match format {
        Format::Json => to_json(&doc),
        Format::Text => {
            let mut s = format!(
                "modulus = {} (~ {} display)\n",
                report.modulus,
                crate::report::display_approx(&report.modulus)
            );
            if let Some((x, y)) = &report.attained_at {
                s.push_str(&format!("attained at x = {x}, y = {y}\n"));
            }
            s
        }
    };
    Ok(Outcome { output, ok: true })
}

/// The descent instance document: space, enumerated points, objective
/// table, start point, optional metric scale.
#[derive(Debug, Clone, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvpDocIn {
    pub space: crate::schema::SpaceDto,
    #[serde(default)]
    pub points: Option<Vec<PointDto>>,
    pub phi: Vec<(PointDto, RatDto)>,
    pub start: PointDto,
    #[serde(default)]
    pub scale: Option<RatDto>,
}

pub fn run_evp(doc: &EvpDocIn, format: Format) -> Result<Outcome> {
    let space = doc.space.to_space()?;
    let phi: std::collections::BTreeMap<Point, ExtReal> = doc
        .phi
        .iter()
        .map(|(p, v)| Ok((p.to_point()?, v.to_ext()?)))
        .collect::<Result<_>>()?;
    let points = match &doc.points {
        Some(list) => list.iter().map(|p| p.to_point()).collect::<Result<Vec<_>>>()?,
        None => phi.keys().cloned().collect(),
    };
    let start = doc.start.to_point()?;
    let scale = match &doc.scale {
        Some(s) => s.to_rat()?,
        None => rint(1),
    };
    let inst = EvpInstance::new(space, points, phi, start)?;
    let outcome = evp_descend_scaled(&inst, &scale)?;
    let verdict = evp_verify_scaled(&inst, &outcome.point, &scale)?;
    let doc_out = EvpDoc {
        point: PointDto::from_point(&outcome.point),
        steps: outcome.steps,
        verdict: VerdictDoc::new("descent-conclusions", &verdict),
    };
    let output = match format {
        Format::Json => to_json(&doc_out),
        Format::Text => format!(
            "descent reached {} in {} steps\n{}",
            outcome.point,
            outcome.steps,
            doc_out.verdict.to_text(&verdict)
        ),
    };
    Ok(Outcome { output, ok: verdict.holds })
}

#[allow(clippy::too_many_arguments)]
pub fn run_criterion(
    inst: &Instance,
    variant: &str,
    omega_param: OmegaParam,
    check_conclusion: bool,
    format: Format,
) -> Result<Outcome> {
    let cs = &inst.constants;
    let f = need(&inst.f, "the mapping f")?;
    let window = default_window(inst);
    let kappa = need_owned(&cs.kappa, "constant kappa")?;

    let report = match variant {
        "single" => {
            let g = need(&inst.g_single, "the single-valued mapping g")?;
            let v: BTreeSet<Point> = match &inst.v_set {
                Some(v) => v.iter().cloned().collect(),
                None => inst.y_candidates.iter().cloned().collect(),
            };
            criterion_single(g, &window, &v, &kappa, check_conclusion)?
        }
        "graph" => {
            let lambda = need_owned(&cs.lambda, "constant lambda")?;
            let v: BTreeSet<Point> = match &inst.v_set {
                Some(v) => v.iter().cloned().collect(),
                None => inst.y_candidates.iter().cloned().collect(),
            };
            criterion_graph_restricted(f, &window, &v, &kappa, &lambda, check_conclusion)?
        }
        "semireg-graph" => {
            let lambda = need_owned(&cs.lambda, "constant lambda")?;
            let x_bar = pick_center_x(inst)?;
            let gamma_set = need_owned(&inst.gamma_set, "the right-hand-side set gamma_set")?;
            let lambda_set: BTreeSet<Point> =
                need_owned(&inst.lambda_set, "the reference set lambda_set")?
                    .into_iter()
                    .collect();
            criterion_semireg_graph(
                f,
                &x_bar,
                &gamma_set,
                &lambda_set,
                &kappa,
                &lambda,
                check_conclusion,
            )?
        }
        "dist-graph" => {
            let kappa_hat = need_owned(&cs.kappa_hat, "constant kappa_hat")?;
            criterion_dist_graph(
                f,
                &window,
                &kappa,
                &kappa_hat,
                omega_param,
                &inst.x_candidates,
                check_conclusion,
            )?
        }
        "gamma" => {
            let kappa_hat = need_owned(&cs.kappa_hat, "constant kappa_hat")?;
            let gamma = need(&inst.gamma, "the gauge")?;
            criterion_gamma_graph(
                f,
                &window,
                gamma,
                &kappa,
                &kappa_hat,
                omega_param,
                &inst.x_candidates,
                check_conclusion,
            )?
        }
        "semireg-dist" => {
            let kappa_hat = need_owned(&cs.kappa_hat, "constant kappa_hat")?;
            let x_bar = pick_center_x(inst)?;
            let gamma_set = need_owned(&inst.gamma_set, "the right-hand-side set gamma_set")?;
            criterion_semireg_dist(
                f,
                &x_bar,
                &gamma_set,
                &kappa,
                &kappa_hat,
                omega_param,
                &inst.x_candidates,
                check_conclusion,
            )?
        }
        other => bail!("unknown criterion variant '{other}'"),
    };

    let doc = CriterionDoc::new(variant, &report);
    let output = match format {
        Format::Json => to_json(&doc),
        Format::Text => doc.to_text(&report),
    };
    let ok = report.hypothesis_holds && report.sound != Some(false);
    Ok(Outcome { output, ok })
}

pub fn run_perturb(inst: &Instance, theorem: &str, format: Format) -> Result<Outcome> {
    let id = TheoremId::parse(theorem)?;
    let f = need(&inst.f, "the mapping f")?.clone();
    let center = need_owned(&inst.center, "the center")?;
    let experiment = ExperimentInstance {
        f,
        g_set: inst.g_set.clone(),
        g_single: inst.g_single.clone(),
        center,
        constants: inst.constants.clone(),
        x_candidates: inst.x_candidates.clone(),
        y_candidates: inst.y_candidates.clone(),
        omega: inst.omega.clone(),
        gamma: inst.gamma.clone(),
        u_set: inst.u_set.clone(),
        v_set: inst.v_set.clone(),
    };
    let report = run_experiment(id, &experiment)?;
    let doc = ExperimentDoc::new(&report);
    let output = match format {
        Format::Json => to_json(&doc),
        Format::Text => doc.to_text(&report),
    };
    let ok = report.hypotheses_hold() && report.conclusion.holds && report.sound;
    Ok(Outcome { output, ok })
}

pub fn run_find_violation(inst: &Instance, format: Format) -> Result<Outcome> {
    let f = need(&inst.f, "the mapping f")?;
    let kappa_hat = need_owned(&inst.constants.kappa_hat, "constant kappa_hat")?;
    let center = need(&inst.center, "the center")?;
    if inst.radii.is_empty() {
        bail!("instance is missing the window radii");
    }
    let h = match &inst.g_set {
        Some(g) => f.sum(g)?,
        None => f.clone(),
    };
    let y_center = reglab_core::point::add_points(&center.1, &center.2)
        .unwrap_or_else(|_| center.1.clone());
    let report = find_violation(
        &h,
        &kappa_hat,
        (&center.0, &y_center),
        &inst.radii,
        &inst.x_candidates,
        &inst.y_candidates,
    )?;
    let doc = ViolationDoc::new(&kappa_hat, &report);
    let found = report.witness().is_some();
    let output = match format {
        Format::Json => to_json(&doc),
        Format::Text => {
            let mut s = String::new();
            for (radius, w) in &report.per_scale {
                match w {
                    Some(w) => s.push_str(&format!(
                        "scale {radius}: violation at (x, y) = ({}, {}), lhs = {}, rhs = {}\n",
                        w.x, w.y, w.lhs, w.rhs
                    )),
                    None => s.push_str(&format!("scale {radius}: no violation\n")),
                }
            }
            s
        }
    };
    // finding a violation is this command's successful outcome
    Ok(Outcome { output, ok: found })
}

pub fn run_gallery(inst: &reglab_core::gallery::GalleryInstance, format: Format) -> Result<Outcome> {
    let doc = crate::schema::InstanceDoc::from_gallery(inst)?;
    let output = match format {
        Format::Json => to_json(&doc),
        Format::Text => format!(
            "{}: |X| = {}, |Y candidates| = {}, graph size = {}\n",
            inst.name,
            inst.x_candidates.len(),
            inst.y_candidates.len(),
            inst.f.graph().len()
        ),
    };
    Ok(Outcome { output, ok: true })
}

/// Re-checks a reported witness on its singleton window; used by the
/// CLI tests to confirm failures reproduce.
pub fn recheck_witness(
    f: &SetValuedMap,
    witness: &WitnessDto,
    kappa: &Rat,
) -> Result<Verdict> {
    let x = witness.x.to_point()?;
    let y = witness.y.to_point()?;
    let w = Window::from_pairs([(x, y)]);
    Ok(check_regular(f, &w, kappa)?)
}
