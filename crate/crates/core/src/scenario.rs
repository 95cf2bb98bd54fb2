//! JSON scenario definitions, validation and experiment dispatch.
//!
//! A scenario fixes a grid domain, a density pair built from box indicators
//! and Gaussian bumps, a set and a list of experiments. Running it yields
//! in-memory CSV and plot files; nothing touches the disk until
//! [`Outputs::write`].

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::adversarial::{
    adversarial_risk, bayes_risk, convergence_experiment, minimize_adversarial, ClassificationMeasure, Method,
};
use crate::error::{Error, Result};
use crate::gammalab::{eps_sweep, minkowski_content, minkowski_content_refined, recovery_shift};
use crate::geometry::{BinaryField, DensityPair, GridDomain, Point, ScalarField};
use crate::graph::{graph_convergence_experiment, EpsRule, LabelStrips};
use crate::limit::{default_trace_radius, extract_interface, per_limit, per_limit_detailed, PolygonalSet};
use crate::nonlocal::per_eps;
use crate::report::{SweepReport, SweepRow};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    #[serde(default)]
    pub description: String,
    pub domain: DomainSpec,
    pub density: DensitySpec,
    pub set: SetSpec,
    #[serde(default)]
    pub seeds: Vec<u64>,
    pub experiments: Vec<ExperimentSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub cells: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    pub rho0: Vec<DensityTerm>,
    pub rho1: Vec<DensityTerm>,
}

/// One summand of a density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensityTerm {
    Constant { value: f64 },
    /// `value` on the open box `(lower, upper)`.
    Box { lower: Vec<f64>, upper: Vec<f64>, value: f64 },
    /// `amplitude * exp(-|x - center|^2 / (2 sigma^2))`.
    Gaussian { center: Vec<f64>, sigma: f64, amplitude: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Intervals { intervals: Vec<[f64; 2]> },
    /// Closed loops keeping the set on their left.
    Polygons { loops: Vec<Vec<[f64; 2]>> },
    Rectangle { lower: [f64; 2], upper: [f64; 2] },
    /// Open ball; an interval in 1D.
    Disk { center: Vec<f64>, radius: f64 },
    /// `{x : normal · x < offset}`.
    HalfPlane { normal: Vec<f64>, offset: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentSpec {
    /// `Per_eps` over a decreasing eps list against `Per`.
    EpsSweep {
        eps: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        trace_radius: Option<f64>,
    },
    /// `Per_eps` of the shifted set against `Per` of the original.
    Recovery { eta: f64, eps: Vec<f64> },
    /// Minkowski contents; with `finest_cells` the grid is refined per eps.
    Minkowski {
        eps: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        finest_cells: Option<usize>,
    },
    /// Adversarial risk of the set and of the trained minimizer.
    Adversarial {
        eps: Vec<f64>,
        #[serde(default)]
        method: MethodSpec,
    },
    /// Graph energies over sample sizes and the scenario seeds.
    Graph {
        n: Vec<usize>,
        #[serde(default)]
        eps_rule: EpsRuleSpec,
        #[serde(default)]
        strips: StripsSpec,
    },
}

impl ExperimentSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::EpsSweep { .. } => "eps_sweep",
            Self::Recovery { .. } => "recovery",
            Self::Minkowski { .. } => "minkowski",
            Self::Adversarial { .. } => "adversarial",
            Self::Graph { .. } => "graph",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodSpec {
    Exhaustive1d { max_intervals: usize },
    LocalSearch2d { max_iterations: usize },
}

impl Default for MethodSpec {
    fn default() -> Self {
        Self::Exhaustive1d { max_intervals: 2 }
    }
}

impl MethodSpec {
    fn method(&self) -> Method {
        match *self {
            Self::Exhaustive1d { max_intervals } => Method::Exhaustive1d { max_intervals },
            Self::LocalSearch2d { max_iterations } => Method::LocalSearch2d { max_iterations },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EpsRuleSpec {
    SqrtDelta { c: f64 },
    DeltaMultiple { c: f64 },
    Fixed { eps: f64 },
}

impl Default for EpsRuleSpec {
    fn default() -> Self {
        Self::SqrtDelta { c: 1.5 }
    }
}

impl EpsRuleSpec {
    fn rule(self) -> EpsRule {
        match self {
            Self::SqrtDelta { c } => EpsRule::SqrtDelta { c },
            Self::DeltaMultiple { c } => EpsRule::DeltaMultiple { c },
            Self::Fixed { eps } => EpsRule::Fixed { eps },
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StripsSpec {
    #[default]
    Consistent,
    AsDisplayed,
}

/// Command-line overrides applied before validation.
#[derive(Clone, Debug, PartialEq)]
pub struct Options {
    /// Replaces the seeds by `n, n+1, ...` keeping their count.
    pub seed_override: Option<u64>,
    /// Multiplies every cell count.
    pub resolution_scale: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self { seed_override: None, resolution_scale: 1.0 }
    }
}

fn at(key: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter(m) => Error::InvalidParameter(format!("{key}: {m}")),
        Error::UnsupportedDimension(d) => Error::InvalidParameter(format!("{key}: unsupported dimension {d}")),
        Error::DegenerateSet(m) | Error::GeometryConflict(m) => Error::InvalidParameter(format!("{key}: {m}")),
        other => other,
    }
}

fn bad(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::InvalidParameter(format!("{key}: {msg}"))
}

fn check_positive(key: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(bad(key, format!("must be positive and finite, got {x}")))
    }
}

fn check_eps_list(key: &str, eps: &[f64], h: f64) -> Result<()> {
    if eps.is_empty() {
        return Err(bad(key, "must not be empty"));
    }
    for (i, &e) in eps.iter().enumerate() {
        check_positive(&format!("{key}[{i}]"), e)?;
        if e < 2.0 * h {
            return Err(bad(&format!("{key}[{i}]"), format!("{e} is below 2h = {}", 2.0 * h)));
        }
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(bad(key, "must be strictly decreasing"));
    }
    Ok(())
}

impl Scenario {
    /// Parses JSON, rejecting unknown keys; errors name the offending key.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Parse(format!("{path}: {}", e.into_inner()))
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Applies `options` and checks every field, rasterizing the densities
    /// and the set.
    pub fn prepare(&self, options: &Options) -> Result<Prepared> {
        let mut sc = self.clone();
        check_positive("--resolution-scale", options.resolution_scale)?;
        let scale = |n: usize| ((n as f64 * options.resolution_scale).round() as usize).max(2);
        if sc.id.is_empty() || !sc.id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(bad("id", "must be a nonempty identifier of [A-Za-z0-9_-]"));
        }
        sc.domain.cells = sc.domain.cells.iter().map(|&n| scale(n)).collect();
        for e in &mut sc.experiments {
            if let ExperimentSpec::Minkowski { finest_cells: Some(n), .. } = e {
                *n = scale(*n);
            }
        }
        if let Some(base) = options.seed_override {
            sc.seeds = (0..sc.seeds.len().max(1) as u64).map(|k| base + k).collect();
        }
        let domain = GridDomain::new(&sc.domain.lower, &sc.domain.upper, &sc.domain.cells).map_err(|e| at("domain", e))?;
        let d = domain.dim();
        let rho0 = density_field(&domain, &sc.density.rho0, "density.rho0")?;
        let rho1 = density_field(&domain, &sc.density.rho1, "density.rho1")?;
        let rho = DensityPair::new(rho0, rho1).map_err(|e| at("density", e))?;
        sc.set.validate(d)?;
        let polygonal = sc.set.polygonal(&domain).map_err(|e| at("set", e))?;
        let field = match &polygonal {
            Some(p) => p.rasterize(&domain).map_err(|e| at("set", e))?,
            None => BinaryField::from_fn(&domain, |p| sc.set.contains(p)),
        };
        if sc.experiments.is_empty() {
            return Err(bad("experiments", "must not be empty"));
        }
        let mut kinds = BTreeSet::new();
        let h = domain.h();
        for (i, e) in sc.experiments.iter().enumerate() {
            let key = format!("experiments[{i}]");
            if !kinds.insert(e.kind()) {
                return Err(bad(&key, format!("duplicate experiment kind {}", e.kind())));
            }
            match e {
                ExperimentSpec::EpsSweep { eps, trace_radius } => {
                    check_eps_list(&format!("{key}.eps"), eps, h)?;
                    if let Some(r) = trace_radius {
                        check_positive(&format!("{key}.trace_radius"), *r)?;
                    }
                }
                ExperimentSpec::Recovery { eta, eps } => {
                    check_positive(&format!("{key}.eta"), *eta)?;
                    check_eps_list(&format!("{key}.eps"), eps, h)?;
                    if polygonal.is_none() {
                        return Err(bad(&format!("{key}.kind"), "recovery needs an intervals, polygons, rectangle or half_plane set"));
                    }
                }
                ExperimentSpec::Minkowski { eps, finest_cells } => {
                    let floor = match finest_cells {
                        Some(n) => (domain.upper()[0] - domain.lower()[0]) / *n as f64,
                        None => h,
                    };
                    check_eps_list(&format!("{key}.eps"), eps, floor)?;
                    if field.is_empty() || field.is_full() {
                        return Err(bad("set", "Minkowski content needs a nondegenerate set"));
                    }
                }
                ExperimentSpec::Adversarial { eps, method } => {
                    check_eps_list(&format!("{key}.eps"), eps, h)?;
                    match (method, d) {
                        (MethodSpec::Exhaustive1d { max_intervals }, 1) if *max_intervals >= 1 => {}
                        (MethodSpec::LocalSearch2d { max_iterations }, 2) if *max_iterations >= 1 => {}
                        _ => {
                            return Err(bad(
                                &format!("{key}.method"),
                                format!("{} with these limits does not apply to dimension {d}", method.method().tag()),
                            ))
                        }
                    }
                }
                ExperimentSpec::Graph { n, eps_rule, .. } => {
                    if n.is_empty() || n.iter().any(|&k| k < 2) {
                        return Err(bad(&format!("{key}.n"), "need sample sizes of at least 2"));
                    }
                    if sc.seeds.is_empty() {
                        return Err(bad("seeds", "graph experiments need at least one seed"));
                    }
                    let c = match *eps_rule {
                        EpsRuleSpec::SqrtDelta { c } | EpsRuleSpec::DeltaMultiple { c } => c,
                        EpsRuleSpec::Fixed { eps } => eps,
                    };
                    check_positive(&format!("{key}.eps_rule"), c)?;
                }
            }
        }
        Ok(Prepared { scenario: sc, domain, rho, field, polygonal })
    }
}

fn density_field(domain: &GridDomain, terms: &[DensityTerm], key: &str) -> Result<ScalarField> {
    let d = domain.dim();
    for (i, t) in terms.iter().enumerate() {
        let k = format!("{key}[{i}]");
        match t {
            DensityTerm::Constant { value } => {
                if !(value.is_finite() && *value >= 0.0) {
                    return Err(bad(&format!("{k}.value"), "must be finite and nonnegative"));
                }
            }
            DensityTerm::Box { lower, upper, value } => {
                if lower.len() != d || upper.len() != d {
                    return Err(bad(&k, format!("box corners must have {d} coordinates")));
                }
                if lower.iter().zip(upper).any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b)) {
                    return Err(bad(&k, "need finite lower < upper"));
                }
                if !(value.is_finite() && *value >= 0.0) {
                    return Err(bad(&format!("{k}.value"), "must be finite and nonnegative"));
                }
            }
            DensityTerm::Gaussian { center, sigma, amplitude } => {
                if center.len() != d || center.iter().any(|c| !c.is_finite()) {
                    return Err(bad(&format!("{k}.center"), format!("must have {d} finite coordinates")));
                }
                check_positive(&format!("{k}.sigma"), *sigma)?;
                if !(amplitude.is_finite() && *amplitude >= 0.0) {
                    return Err(bad(&format!("{k}.amplitude"), "must be finite and nonnegative"));
                }
            }
        }
    }
    Ok(ScalarField::from_fn(domain, |p| terms.iter().map(|t| t.eval(p, d)).sum()))
}

impl DensityTerm {
    fn eval(&self, p: Point, d: usize) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::Box { lower, upper, value } => {
                if (0..d).all(|k| p[k] > lower[k] && p[k] < upper[k]) {
                    *value
                } else {
                    0.0
                }
            }
            Self::Gaussian { center, sigma, amplitude } => {
                let r2: f64 = (0..d).map(|k| (p[k] - center[k]).powi(2)).sum();
                amplitude * (-r2 / (2.0 * sigma * sigma)).exp()
            }
        }
    }
}

impl SetSpec {
    fn validate(&self, d: usize) -> Result<()> {
        let need = |dim: usize| {
            if d == dim {
                Ok(())
            } else {
                Err(bad("set.kind", format!("needs a {dim}D domain, got {d}D")))
            }
        };
        match self {
            Self::Intervals { .. } => need(1),
            Self::Polygons { .. } | Self::Rectangle { .. } => need(2),
            Self::Disk { center, radius } => {
                if center.len() != d || center.iter().any(|c| !c.is_finite()) {
                    return Err(bad("set.center", format!("must have {d} finite coordinates")));
                }
                check_positive("set.radius", *radius)
            }
            Self::HalfPlane { normal, offset } => {
                if normal.len() != d || !normal.iter().all(|c| c.is_finite()) || normal.iter().all(|&c| c == 0.0) {
                    return Err(bad("set.normal", format!("must be a nonzero finite {d}-vector")));
                }
                if !offset.is_finite() {
                    return Err(bad("set.offset", "must be finite"));
                }
                Ok(())
            }
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        match self {
            Self::Intervals { intervals } => intervals.iter().any(|&[a, b]| p[0] > a && p[0] < b),
            Self::Polygons { loops } => {
                let mut inside = false;
                for l in loops {
                    for k in 0..l.len() {
                        let (a, b) = (l[k], l[(k + 1) % l.len()]);
                        if (a[1] > p[1]) != (b[1] > p[1]) && p[0] < a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]) {
                            inside = !inside;
                        }
                    }
                }
                inside
            }
            Self::Rectangle { lower, upper } => (0..2).all(|k| p[k] > lower[k] && p[k] < upper[k]),
            Self::Disk { center, radius } => {
                let r2: f64 = center.iter().enumerate().map(|(k, c)| (p[k] - c).powi(2)).sum();
                r2 < radius * radius
            }
            Self::HalfPlane { normal, offset } => {
                normal.iter().enumerate().map(|(k, n)| n * p[k]).sum::<f64>() < *offset
            }
        }
    }

    /// Exact polygonal form within the domain, when there is one.
    fn polygonal(&self, domain: &GridDomain) -> Result<Option<PolygonalSet>> {
        let (lo, hi) = (domain.lower(), domain.upper());
        Ok(Some(match self {
            Self::Intervals { intervals } => PolygonalSet::intervals(intervals.iter().map(|&[a, b]| (a, b)).collect())?,
            Self::Polygons { loops } => PolygonalSet::polygons(loops.clone())?,
            Self::Rectangle { lower, upper } => PolygonalSet::rectangle(*lower, *upper)?,
            Self::Disk { center, radius } if domain.dim() == 1 => {
                PolygonalSet::intervals(vec![((center[0] - radius).max(lo[0]), (center[0] + radius).min(hi[0]))])?
            }
            Self::Disk { .. } => return Ok(None),
            Self::HalfPlane { normal, offset } if domain.dim() == 1 => {
                let cut = offset / normal[0];
                let iv = if normal[0] > 0.0 { (lo[0], cut.min(hi[0])) } else { (cut.max(lo[0]), hi[0]) };
                PolygonalSet::intervals(vec![iv])?
            }
            Self::HalfPlane { normal, offset } => {
                let corners = [[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]];
                let side = |p: Point| normal[0] * p[0] + normal[1] * p[1] - offset;
                let mut out: Vec<Point> = Vec::new();
                for k in 0..4 {
                    let (a, b) = (corners[k], corners[(k + 1) % 4]);
                    let (sa, sb) = (side(a), side(b));
                    if sa <= 0.0 {
                        out.push(a);
                    }
                    if (sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0) {
                        let t = sa / (sa - sb);
                        out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
                    }
                }
                out.dedup_by(|p, q| (p[0] - q[0]).hypot(p[1] - q[1]) < 1e-12);
                if out.len() > 1 && (out[0][0] - out[out.len() - 1][0]).hypot(out[0][1] - out[out.len() - 1][1]) < 1e-12 {
                    out.pop();
                }
                if out.len() < 3 {
                    return Err(Error::DegenerateSet("half plane misses the domain".into()));
                }
                PolygonalSet::polygons(vec![out])?
            }
        }))
    }

    /// `H^{d-1}` of the interface inside the domain.
    fn interface_measure(&self, polygonal: Option<&PolygonalSet>, domain: &GridDomain) -> Result<f64> {
        match (self, polygonal) {
            (Self::Disk { radius, .. }, None) => Ok(2.0 * PI * radius),
            (_, Some(p)) => Ok(extract_interface(p, domain)?.total_measure),
            (_, None) => Err(Error::DegenerateSet("no interface".into())),
        }
    }
}

/// A validated scenario with its rasterized fields.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub scenario: Scenario,
    pub domain: GridDomain,
    pub rho: DensityPair,
    pub field: BinaryField,
    pub polygonal: Option<PolygonalSet>,
}

/// Named text files produced by a run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outputs {
    pub id: String,
    pub files: Vec<(String, String)>,
}

impl Outputs {
    fn add(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }

    fn add_report(&mut self, stem: &str, report: &SweepReport, quantities: &[&str]) -> Result<()> {
        for r in report.rows() {
            if !(r.value.is_finite() && r.reference.is_finite() && r.terms.iter().all(|t| t.is_finite())) {
                return Err(Error::NonFinite(format!("{stem}: row at {}={}", report.parameter_name, r.parameter)));
            }
        }
        self.add(format!("{stem}.csv"), report.to_csv());
        for q in quantities {
            if let Some(data) = report.plot_data(q) {
                self.add(format!("{stem}_{q}.dat"), data);
            }
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }

    /// Writes every file under `dir/<id>/` and returns that directory.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let target = dir.join(&self.id);
        let io = |e: std::io::Error, p: &Path| Error::Io(format!("{}: {e}", p.display()));
        fs::create_dir_all(&target).map_err(|e| io(e, &target))?;
        for (name, contents) in &self.files {
            let path = target.join(name);
            fs::write(&path, contents).map_err(|e| io(e, &path))?;
        }
        Ok(target)
    }
}

impl Prepared {
    pub fn run(&self) -> Result<Outputs> {
        let sc = &self.scenario;
        let mut out = Outputs { id: sc.id.clone(), files: Vec::new() };
        out.add("scenario.json", sc.to_json() + "\n");
        let r_default = default_trace_radius(&self.domain);
        for e in &sc.experiments {
            match e {
                ExperimentSpec::EpsSweep { eps, trace_radius } => {
                    let r = trace_radius.unwrap_or(r_default);
                    let mut s = eps_sweep(&self.field, &self.rho, eps, r)?;
                    s.report.scenario = sc.id.clone();
                    out.add_report("eps_sweep", &s.report, &["value", "abs_error"])?;
                    if !(self.field.is_empty() || self.field.is_full()) {
                        out.add("limit_facets.csv", self.limit_energy(r)?.to_csv());
                    }
                }
                ExperimentSpec::Recovery { eta, eps } => {
                    let poly = self.polygonal.as_ref().expect("validated");
                    let shifted = recovery_shift(poly, &self.rho, *eta)?;
                    let raster = shifted.rasterize(&self.domain)?;
                    let reference = per_limit(poly, &self.rho, r_default)?;
                    let facets = extract_interface(poly, &self.domain)?.total_measure;
                    let mut report = SweepReport::new(sc.id.clone(), "eps", &["outer", "inner"], self.domain.h());
                    report.note(format!("eta={eta}"));
                    report.note(format!("shift={}", 1.5 * eta));
                    report.note(format!("symmetric_difference={}", poly.symmetric_difference_measure(&shifted, &self.domain)?));
                    report.note(format!("facet_measure={facets}"));
                    for &e in eps {
                        let p = per_eps(&raster, &self.rho, e)?;
                        report.push(SweepRow {
                            parameter: e,
                            terms: vec![p.outer, p.inner],
                            value: p.total,
                            reference,
                            warn: p.under_resolved,
                        });
                    }
                    out.add_report("recovery", &report, &["value"])?;
                }
                ExperimentSpec::Minkowski { eps, finest_cells } => {
                    let reference = sc.set.interface_measure(self.polygonal.as_ref(), &self.domain)?;
                    let mut report = match finest_cells {
                        Some(n) => {
                            let set = &sc.set;
                            minkowski_content_refined(
                                &|p| set.contains(p),
                                self.domain.lower(),
                                self.domain.upper(),
                                *n,
                                eps,
                                reference,
                            )?
                        }
                        None => minkowski_content(&self.field, eps, reference)?,
                    };
                    report.scenario = sc.id.clone();
                    out.add_report("minkowski", &report, &["value", "abs_error"])?;
                }
                ExperimentSpec::Adversarial { eps, method } => {
                    let mu = ClassificationMeasure::new(self.rho.clone());
                    let m = method.method();
                    let mut report = SweepReport::new(
                        sc.id.clone(),
                        "eps",
                        &["bayes_risk", "per_eps", "trained_objective"],
                        self.domain.h(),
                    );
                    report.note(format!("method={}", m.tag()));
                    report.note("value=adversarial_risk(A) reference=bayes_risk(A)+eps*per_eps(A)");
                    for &e in eps {
                        let trained = minimize_adversarial(&mu, e, &m)?;
                        let bayes = bayes_risk(&self.field, &mu)?;
                        let per = per_eps(&self.field, &self.rho, e)?.total;
                        report.push(SweepRow {
                            parameter: e,
                            terms: vec![bayes, per, trained.objective],
                            value: adversarial_risk(&self.field, &mu, e)?,
                            reference: bayes + e * per,
                            warn: false,
                        });
                    }
                    out.add_report("adversarial", &report, &["value", "trained_objective"])?;
                    if let MethodSpec::Exhaustive1d { max_intervals } = method {
                        let mut conv = convergence_experiment(&mu, eps, *max_intervals)?;
                        conv.scenario = sc.id.clone();
                        out.add_report("adversarial_convergence", &conv, &["value"])?;
                    }
                }
                ExperimentSpec::Graph { n, eps_rule, strips } => {
                    let reference = match &self.polygonal {
                        Some(p) => per_limit(p, &self.rho, r_default)?,
                        None => per_limit(&self.field, &self.rho, r_default)?,
                    };
                    let strips = match strips {
                        StripsSpec::Consistent => LabelStrips::Consistent,
                        StripsSpec::AsDisplayed => LabelStrips::AsDisplayed,
                    };
                    let set = &sc.set;
                    let mut exp = graph_convergence_experiment(
                        &self.rho,
                        &|p| set.contains(p),
                        reference,
                        n,
                        &sc.seeds,
                        eps_rule.rule(),
                        strips,
                    )?;
                    exp.report.scenario = sc.id.clone();
                    out.add_report("graph", &exp.report, &["value", "median_abs_err"])?;
                    out.add("graph_samples.csv", exp.samples_csv());
                }
            }
        }
        Ok(out)
    }

    fn limit_energy(&self, r: f64) -> Result<crate::limit::LimitEnergy> {
        match &self.polygonal {
            Some(p) => per_limit_detailed(p, &self.rho, r),
            None => per_limit_detailed(&self.field, &self.rho, r),
        }
    }
}

const BUNDLED: &[(&str, &str)] = &[
    ("remark23_case1", include_str!("../scenarios/remark23_case1.json")),
    ("remark23_case2", include_str!("../scenarios/remark23_case2.json")),
    ("disk_uniform", include_str!("../scenarios/disk_uniform.json")),
    ("disk_gaussian", include_str!("../scenarios/disk_gaussian.json")),
    ("graph_halfplane", include_str!("../scenarios/graph_halfplane.json")),
    ("adversarial_remark23", include_str!("../scenarios/adversarial_remark23.json")),
];

/// Ids of the bundled scenarios.
pub fn bundled_ids() -> Vec<&'static str> {
    BUNDLED.iter().map(|(id, _)| *id).collect()
}

pub fn bundled(id: &str) -> Result<Scenario> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(k, _)| *k == id)
        .ok_or_else(|| Error::InvalidParameter(format!("--config: no bundled scenario named {id}")))?;
    Scenario::from_json(text)
}

/// One line per bundled scenario: id and description.
pub fn list_scenarios() -> String {
    let width = BUNDLED.iter().map(|(id, _)| id.len()).max().unwrap_or(0);
    BUNDLED
        .iter()
        .map(|(id, text)| {
            let desc = Scenario::from_json(text).map(|s| s.description).unwrap_or_default();
            format!("{id:<width$}  {desc}\n")
        })
        .collect()
}

/// Reads a scenario from `path`, or from the bundle for `bundled:<id>`.
pub fn load(path: &str) -> Result<Scenario> {
    match path.strip_prefix("bundled:") {
        Some(id) => bundled(id),
        None => {
            let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
            Scenario::from_json(&text)
        }
    }
}
