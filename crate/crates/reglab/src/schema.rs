//! Instance JSON schema and its conversion into core types. Rationals
//! cross this boundary as strings "p/q" or integers, never as floats;
//! the extended values "inf" are admitted where the statements allow
//! them.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use reglab_core::extnum::ExtReal;
use reglab_core::gallery::GalleryInstance;
use reglab_core::maps::{SetValuedMap, SingleValuedMap};
use reglab_core::perturb::ConstantSet;
use reglab_core::point::Point;
use reglab_core::rat::{format_rat, parse_rat, Rat};
use reglab_core::regularity::{GammaFunction, GammaVariant, Window};
use reglab_core::spaces::{ExplicitSpace, LinearSpace, Norm, Space};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RatDto {
    Int(i64),
    Str(String),
}

impl RatDto {
    pub fn to_rat(&self) -> Result<Rat> {
        match self {
            RatDto::Int(n) => Ok(reglab_core::rat::rint(*n)),
            RatDto::Str(s) => Ok(parse_rat(s)?),
        }
    }

    pub fn to_ext(&self) -> Result<ExtReal> {
        match self {
            RatDto::Int(n) => Ok(ExtReal::from_rat(reglab_core::rat::rint(*n))?),
            RatDto::Str(s) => Ok(ExtReal::parse(s)?),
        }
    }

    pub fn from_rat(r: &Rat) -> Self {
        RatDto::Str(format_rat(r))
    }

    pub fn from_ext(v: &ExtReal) -> Self {
        RatDto::Str(format!("{v}"))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointDto {
    Id(String),
    Vector(Vec<RatDto>),
    Pair { pair: Box<(PointDto, PointDto)> },
}

impl PointDto {
    pub fn to_point(&self) -> Result<Point> {
        Ok(match self {
            PointDto::Id(s) => Point::Id(s.clone()),
            PointDto::Vector(coords) => Point::Vector(
                coords.iter().map(|c| c.to_rat()).collect::<Result<Vec<_>>>()?,
            ),
            PointDto::Pair { pair } => {
                Point::pair(pair.0.to_point()?, pair.1.to_point()?)
            }
        })
    }

    pub fn from_point(p: &Point) -> Self {
        match p {
            Point::Id(s) => PointDto::Id(s.clone()),
            Point::Vector(v) => PointDto::Vector(v.iter().map(RatDto::from_rat).collect()),
            Point::Pair(a, b) => PointDto::Pair {
                pair: Box::new((PointDto::from_point(a), PointDto::from_point(b))),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SpaceDto {
    Explicit { points: Vec<String>, dist: Vec<Vec<RatDto>> },
    Linear { dim: usize, norm: String },
}

impl SpaceDto {
    pub fn to_space(&self) -> Result<Space> {
        Ok(match self {
            SpaceDto::Explicit { points, dist } => {
                let matrix = dist
                    .iter()
                    .map(|row| row.iter().map(|c| c.to_rat()).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                Space::Explicit(ExplicitSpace::new(points.clone(), matrix)?)
            }
            SpaceDto::Linear { dim, norm } => {
                let norm = match norm.to_ascii_lowercase().as_str() {
                    "l1" => Norm::L1,
                    "linf" => Norm::Linf,
                    other => bail!("unknown norm '{other}' (expected l1 or linf)"),
                };
                Space::Linear(LinearSpace::new(*dim, norm)?)
            }
        })
    }

    pub fn from_space(s: &Space) -> Result<Self> {
        Ok(match s {
            Space::Explicit(e) => SpaceDto::Explicit {
                points: e.point_ids().to_vec(),
                dist: e
                    .point_ids()
                    .iter()
                    .map(|a| {
                        e.point_ids()
                            .iter()
                            .map(|b| {
                                e.distance(&Point::id(a.clone()), &Point::id(b.clone()))
                                    .map(|d| RatDto::from_rat(&d))
                            })
                            .collect::<reglab_core::error::Result<Vec<_>>>()
                    })
                    .collect::<reglab_core::error::Result<Vec<_>>>()?,
            },
            Space::Linear(l) => SpaceDto::Linear {
                dim: l.dim,
                norm: match l.norm {
                    Norm::L1 => "l1".into(),
                    Norm::Linf => "linf".into(),
                },
            },
            Space::Product(_) => bail!("product spaces are internal and have no JSON form"),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphDto {
    pub graph: Vec<(PointDto, PointDto)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableDto {
    pub table: Vec<(PointDto, PointDto)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WindowDto {
    Pairs { pairs: Vec<(PointDto, PointDto)> },
    Product { product: ProductDto },
    BallProduct { ball_product: BallProductDto },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProductDto {
    pub x: Vec<PointDto>,
    pub y: Vec<PointDto>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BallProductDto {
    pub center_x: PointDto,
    pub center_y: PointDto,
    pub radius_x: RatDto,
    pub radius_y: RatDto,
    #[serde(default)]
    pub closed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GammaDto {
    Constant { value: RatDto },
    Table { entries: Vec<(PointDto, RatDto)> },
    Milyutin,
}

impl GammaDto {
    pub fn to_gamma(&self) -> Result<GammaFunction> {
        Ok(match self {
            GammaDto::Constant { value } => GammaFunction::Constant(value.to_ext()?),
            GammaDto::Table { entries } => GammaFunction::Table(
                entries
                    .iter()
                    .map(|(p, v)| Ok((p.to_point()?, v.to_ext()?)))
                    .collect::<Result<_>>()?,
            ),
            GammaDto::Milyutin => GammaFunction::Milyutin,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GammaVariantDto {
    A,
    B { delta: RatDto },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CenterDto {
    pub x: PointDto,
    pub z: PointDto,
    #[serde(default)]
    pub w: Option<PointDto>,
}

/// The one instance document consumed by every subcommand; each
/// operation names the fields it needs.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_space: Option<SpaceDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_space: Option<SpaceDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<GraphDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_set: Option<GraphDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<TableDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_candidates: Option<Vec<PointDto>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_candidates: Option<Vec<PointDto>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<WindowDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<GammaDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_variant: Option<GammaVariantDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<CenterDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constants: Option<BTreeMap<String, RatDto>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_set: Option<Vec<PointDto>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_set: Option<Vec<PointDto>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_set: Option<Vec<PointDto>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_set: Option<Vec<PointDto>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<PointDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<(RatDto, RatDto)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<RatDto>>,
    /// Informational notes attached by the gallery generators.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<Vec<String>>,
}

/// A resolved instance with core types and defaulted candidate sets.
#[derive(Debug, Clone)]
pub struct Instance {
    pub name: Option<String>,
    pub x_space: Space,
    pub y_space: Space,
    pub f: Option<SetValuedMap>,
    pub g_set: Option<SetValuedMap>,
    pub g_single: Option<SingleValuedMap>,
    pub x_candidates: Vec<Point>,
    pub y_candidates: Vec<Point>,
    pub window: Option<Window>,
    pub omega: Option<Window>,
    pub gamma: Option<GammaFunction>,
    pub gamma_variant: GammaVariant,
    pub center: Option<(Point, Point, Point)>,
    pub constants: ConstantSet,
    pub u_set: Option<Vec<Point>>,
    pub v_set: Option<Vec<Point>>,
    pub gamma_set: Option<Vec<Point>>,
    pub lambda_set: Option<Vec<Point>>,
    pub point: Option<Point>,
    pub levels: Vec<(Rat, Rat)>,
    pub radii: Vec<Rat>,
}

fn resolve_points(list: &[PointDto]) -> Result<Vec<Point>> {
    list.iter().map(|p| p.to_point()).collect()
}

fn resolve_window(dto: &WindowDto, inst_x: &[Point], inst_y: &[Point], sx: &Space, sy: &Space) -> Result<Window> {
    Ok(match dto {
        WindowDto::Pairs { pairs } => Window::from_pairs(
            pairs
                .iter()
                .map(|(a, b)| Ok((a.to_point()?, b.to_point()?)))
                .collect::<Result<Vec<_>>>()?,
        ),
        WindowDto::Product { product } => {
            let xs = resolve_points(&product.x)?;
            let ys = resolve_points(&product.y)?;
            Window::product(&xs, &ys)
        }
        WindowDto::BallProduct { ball_product } => Window::ball_product(
            sx,
            &ball_product.center_x.to_point()?,
            &ball_product.radius_x.to_ext()?,
            inst_x,
            sy,
            &ball_product.center_y.to_point()?,
            &ball_product.radius_y.to_ext()?,
            inst_y,
            ball_product.closed,
        )?,
    })
}

fn parse_constants(map: &BTreeMap<String, RatDto>) -> Result<ConstantSet> {
    let mut cs = ConstantSet::default();
    for (key, value) in map {
        apply_constant(&mut cs, key, value)?;
    }
    Ok(cs)
}

/// Sets one named constant, rejecting unknown names. The extended
/// constants (c, r, mu, diam_g) accept "inf".
pub fn apply_constant(cs: &mut ConstantSet, key: &str, value: &RatDto) -> Result<()> {
    match key {
        "kappa" => cs.kappa = Some(value.to_rat()?),
        "kappa_hat" => cs.kappa_hat = Some(value.to_rat()?),
        "ell" => cs.ell = Some(value.to_rat()?),
        "lambda" => cs.lambda = Some(value.to_rat()?),
        "a" => cs.a = Some(value.to_rat()?),
        "b" => cs.b = Some(value.to_rat()?),
        "c" => cs.c = Some(value.to_ext()?),
        "r" => cs.r = Some(value.to_ext()?),
        "mu" => cs.mu = Some(value.to_ext()?),
        "eps" => cs.eps = Some(value.to_rat()?),
        "delta" => cs.delta = Some(value.to_rat()?),
        "alpha" => cs.alpha = Some(value.to_rat()?),
        "beta" => cs.beta = Some(value.to_rat()?),
        "diam_g" => cs.diam_g = Some(value.to_ext()?),
        "g_norm" => cs.g_norm = Some(value.to_rat()?),
        "cap_r" => cs.cap_r = Some(value.to_rat()?),
        "alpha_hat" => cs.alpha_hat = Some(value.to_rat()?),
        other => bail!("unknown constant name '{other}'"),
    }
    Ok(())
}

impl InstanceDoc {
    pub fn parse_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("malformed instance JSON")
    }

    pub fn resolve(&self) -> Result<Instance> {
        let x_space = self
            .x_space
            .as_ref()
            .ok_or_else(|| anyhow!("instance is missing x_space"))?
            .to_space()?;
        let y_space = self
            .y_space
            .as_ref()
            .ok_or_else(|| anyhow!("instance is missing y_space"))?
            .to_space()?;
        let f = match &self.f {
            Some(gd) => Some(SetValuedMap::new(
                x_space.clone(),
                y_space.clone(),
                gd.graph
                    .iter()
                    .map(|(a, b)| Ok((a.to_point()?, b.to_point()?)))
                    .collect::<Result<Vec<_>>>()?,
            )?),
            None => None,
        };
        let g_set = match &self.g_set {
            Some(gd) => Some(SetValuedMap::new(
                x_space.clone(),
                y_space.clone(),
                gd.graph
                    .iter()
                    .map(|(a, b)| Ok((a.to_point()?, b.to_point()?)))
                    .collect::<Result<Vec<_>>>()?,
            )?),
            None => None,
        };
        let g_single = match &self.g {
            Some(td) => Some(SingleValuedMap::new(
                x_space.clone(),
                y_space.clone(),
                td.table
                    .iter()
                    .map(|(a, b)| Ok((a.to_point()?, b.to_point()?)))
                    .collect::<Result<Vec<_>>>()?,
            )?),
            None => None,
        };

        // candidate sets default to everything the document mentions
        let x_candidates = match &self.x_candidates {
            Some(list) => resolve_points(list)?,
            None => {
                let mut out: std::collections::BTreeSet<Point> = Default::default();
                if let Some(pts) = x_space.enumerate() {
                    out.extend(pts);
                }
                if let Some(f) = &f {
                    out.extend(f.domain().cloned());
                }
                if let Some(g) = &g_set {
                    out.extend(g.domain().cloned());
                }
                if let Some(g) = &g_single {
                    out.extend(g.domain().cloned());
                }
                out.into_iter().collect()
            }
        };
        let y_candidates = match &self.y_candidates {
            Some(list) => resolve_points(list)?,
            None => {
                let mut out: std::collections::BTreeSet<Point> = Default::default();
                if let Some(pts) = y_space.enumerate() {
                    out.extend(pts);
                }
                if let Some(f) = &f {
                    out.extend(f.range().cloned());
                }
                if let Some(g) = &g_set {
                    out.extend(g.range().cloned());
                }
                out.into_iter().collect()
            }
        };

        let window = match &self.window {
            Some(w) => Some(resolve_window(w, &x_candidates, &y_candidates, &x_space, &y_space)?),
            None => None,
        };
        let omega = match &self.omega {
            Some(w) => Some(resolve_window(w, &x_candidates, &y_candidates, &x_space, &y_space)?),
            None => None,
        };
        let gamma = match &self.gamma {
            Some(g) => Some(g.to_gamma()?),
            None => None,
        };
        let gamma_variant = match &self.gamma_variant {
            Some(GammaVariantDto::A) | None => GammaVariant::A,
            Some(GammaVariantDto::B { delta }) => GammaVariant::B(delta.to_rat()?),
        };
        let center = match &self.center {
            Some(c) => {
                let x = c.x.to_point()?;
                let z = c.z.to_point()?;
                let w = match &c.w {
                    Some(w) => w.to_point()?,
                    None => z.clone(),
                };
                Some((x, z, w))
            }
            None => None,
        };
        let constants = match &self.constants {
            Some(map) => parse_constants(map)?,
            None => ConstantSet::default(),
        };
        let opt_points = |list: &Option<Vec<PointDto>>| -> Result<Option<Vec<Point>>> {
            Ok(match list {
                Some(l) => Some(resolve_points(l)?),
                None => None,
            })
        };
        let levels = match &self.levels {
            Some(ls) => ls
                .iter()
                .map(|(a, b)| Ok((a.to_rat()?, b.to_rat()?)))
                .collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
        };
        let radii = match &self.radii {
            Some(rs) => rs.iter().map(|r| r.to_rat()).collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
        };

        Ok(Instance {
            name: self.name.clone(),
            x_space,
            y_space,
            f,
            g_set,
            g_single,
            x_candidates,
            y_candidates,
            window,
            omega,
            gamma,
            gamma_variant,
            center,
            constants,
            u_set: opt_points(&self.u_set)?,
            v_set: opt_points(&self.v_set)?,
            gamma_set: opt_points(&self.gamma_set)?,
            lambda_set: opt_points(&self.lambda_set)?,
            point: match &self.point {
                Some(p) => Some(p.to_point()?),
                None => None,
            },
            levels,
            radii,
        })
    }

    pub fn from_gallery(inst: &GalleryInstance) -> Result<Self> {
        let graph_dto = |m: &SetValuedMap| GraphDto {
            graph: m
                .graph()
                .iter()
                .map(|(a, b)| (PointDto::from_point(a), PointDto::from_point(b)))
                .collect(),
        };
        let mut constants = BTreeMap::new();
        let cs = &inst.constants;
        if let Some(v) = &cs.kappa {
            constants.insert("kappa".into(), RatDto::from_rat(v));
        }
        if let Some(v) = &cs.kappa_hat {
            constants.insert("kappa_hat".into(), RatDto::from_rat(v));
        }
        let window = inst.window.as_ref().map(|w| WindowDto::Pairs {
            pairs: w
                .pairs()
                .iter()
                .map(|(a, b)| (PointDto::from_point(a), PointDto::from_point(b)))
                .collect(),
        });
        let expected: Vec<String> = inst
            .expectations
            .iter()
            .map(|e| format!("{e:?}"))
            .collect();
        Ok(InstanceDoc {
            name: Some(inst.name.clone()),
            x_space: Some(SpaceDto::from_space(&inst.x_space)?),
            y_space: Some(SpaceDto::from_space(&inst.y_space)?),
            f: Some(graph_dto(&inst.f)),
            g_set: inst.g.as_ref().map(graph_dto),
            g: None,
            x_candidates: Some(inst.x_candidates.iter().map(PointDto::from_point).collect()),
            y_candidates: Some(inst.y_candidates.iter().map(PointDto::from_point).collect()),
            window,
            omega: None,
            gamma: None,
            gamma_variant: None,
            center: inst.center.as_ref().map(|(x, z, w)| CenterDto {
                x: PointDto::from_point(x),
                z: PointDto::from_point(z),
                w: Some(PointDto::from_point(w)),
            }),
            constants: if constants.is_empty() { None } else { Some(constants) },
            u_set: None,
            v_set: None,
            gamma_set: None,
            lambda_set: None,
            point: None,
            levels: None,
            radii: if inst.radii.is_empty() {
                None
            } else {
                Some(inst.radii.iter().map(RatDto::from_rat).collect())
            },
            expected: if expected.is_empty() { None } else { Some(expected) },
        })
    }
}

/// Parses a gallery constructor string like `two_lines(1/4,1/4,1/20)`,
/// `sum_failure(5,1/100)`, or `random(7,20,4)`.
pub fn parse_gallery_spec(spec: &str) -> Result<GalleryInstance> {
    let spec = spec.trim();
    let open = spec
        .find('(')
        .ok_or_else(|| anyhow!("gallery spec must look like name(arg,...)"))?;
    if !spec.ends_with(')') {
        bail!("gallery spec must end with ')'");
    }
    let name = spec[..open].trim().replace('_', "-");
    let args: Vec<&str> = spec[open + 1..spec.len() - 1]
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    match name.as_str() {
        "two-lines" => {
            if args.len() != 3 {
                bail!("two-lines takes (alpha, beta, step)");
            }
            Ok(reglab_core::gallery::two_lines(
                &parse_rat(args[0])?,
                &parse_rat(args[1])?,
                &parse_rat(args[2])?,
            )?)
        }
        "sum-failure" => {
            if args.len() != 2 {
                bail!("sum-failure takes (kappa_hat, step)");
            }
            Ok(reglab_core::gallery::sum_failure(
                &parse_rat(args[0])?,
                &parse_rat(args[1])?,
            )?)
        }
        "random" => {
            if args.len() != 3 {
                bail!("random takes (seed, points, max_fiber)");
            }
            let seed: u64 = args[0].parse().context("bad seed")?;
            let points: usize = args[1].parse().context("bad point count")?;
            let max_fiber: usize = args[2].parse().context("bad fiber bound")?;
            Ok(reglab_core::gallery::random_instance(
                seed,
                reglab_core::gallery::RandomSizes { points, max_fiber },
            )?)
        }
        other => bail!("unknown gallery name '{other}'"),
    }
}

/// Loads an instance from a path, or from a gallery constructor string
/// when the argument contains parentheses.
pub fn load_instance(arg: &str) -> Result<Instance> {
    if arg.contains('(') {
        let gallery = parse_gallery_spec(arg)?;
        return InstanceDoc::from_gallery(&gallery)?.resolve();
    }
    let text = std::fs::read_to_string(arg)
        .with_context(|| format!("cannot read instance file '{arg}'"))?;
    InstanceDoc::parse_json(&text)?.resolve()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gallery_round_trips_through_the_document() {
        let g = parse_gallery_spec("two_lines(1/4,1/4,1/20)").unwrap();
        let doc = InstanceDoc::from_gallery(&g).unwrap();
        let text = serde_json::to_string_pretty(&doc).unwrap();
        let inst = InstanceDoc::parse_json(&text).unwrap().resolve().unwrap();
        assert_eq!(inst.f.as_ref().unwrap().graph(), g.f.graph());
        assert_eq!(inst.window.as_ref().unwrap(), g.window.as_ref().unwrap());
    }

    #[test]
    fn unknown_constant_names_are_rejected() {
        let mut doc = InstanceDoc {
            x_space: Some(SpaceDto::Linear { dim: 1, norm: "l1".into() }),
            y_space: Some(SpaceDto::Linear { dim: 1, norm: "l1".into() }),
            ..Default::default()
        };
        let mut constants = BTreeMap::new();
        constants.insert("kappa_typo".to_string(), RatDto::Int(1));
        doc.constants = Some(constants);
        assert!(doc.resolve().is_err());
    }

    #[test]
    fn floats_are_rejected_in_rationals() {
        let text = r#"{"x_space": {"kind": "linear", "dim": 1, "norm": "l1"},
                       "y_space": {"kind": "linear", "dim": 1, "norm": "l1"},
                       "constants": {"kappa": 0.5}}"#;
        assert!(InstanceDoc::parse_json(text).is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"x_space": {"kind": "linear", "dim": 1, "norm": "l1"},
                       "y_space": {"kind": "linear", "dim": 1, "norm": "l1"},
                       "not_a_field": 3}"#;
        assert!(InstanceDoc::parse_json(text).is_err());
    }
}
