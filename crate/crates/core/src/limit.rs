//! The sharp-interface limit energy `Per(A; rho) = ∫ β dH^{d-1}`.
//!
//! Interfaces come either from an analytic [`PolygonalSet`] (exact facets) or
//! from a [`BinaryField`] via marching squares on a box-smoothed indicator. One-sided traces of the densities are half-ball averages,
//! Richardson-extrapolated in the radius.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::geometry::{BinaryField, DensityPair, GridDomain, Point, ScalarField};
use crate::sum::ExactSum;

const NORMAL_TOL: f64 = 1e-12;
const MIN_HALF_BALL_CELLS: usize = 8;
const BOUNDARY_TOL: f64 = 1e-12;

/// A piece of interface with its inner normal (pointing into `A`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Facet {
    pub midpoint: Point,
    pub normal: Point,
    /// Length in 2D, 1 per interface point in 1D.
    pub measure: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceMesh {
    pub facets: Vec<Facet>,
    pub total_measure: f64,
}

impl InterfaceMesh {
    fn new(facets: Vec<Facet>) -> Self {
        let total_measure = facets.iter().map(|f| f.measure).collect::<ExactSum>().value();
        Self { facets, total_measure }
    }
}

/// One-sided traces at a facet. `plus` is the side `ν` points to, i.e. the
/// inside of `A`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Traces {
    pub rho0_plus: f64,
    pub rho0_minus: f64,
    pub rho1_plus: f64,
    pub rho1_minus: f64,
}

impl Traces {
    pub fn new(rho0_plus: f64, rho0_minus: f64, rho1_plus: f64, rho1_minus: f64) -> Self {
        Self { rho0_plus, rho0_minus, rho1_plus, rho1_minus }
    }

    /// The three sums whose minimum is `β`, in the order
    /// `ρ0^ν + ρ1^ν`, `ρ0^-ν + ρ1^-ν`, `ρ0^-ν + ρ1^ν`.
    pub fn candidates(&self) -> [f64; 3] {
        [
            self.rho0_plus + self.rho1_plus,
            self.rho0_minus + self.rho1_minus,
            self.rho0_minus + self.rho1_plus,
        ]
    }

    fn validate(&self) -> Result<()> {
        let all = [self.rho0_plus, self.rho0_minus, self.rho1_plus, self.rho1_minus];
        if all.iter().all(|t| t.is_finite() && *t >= 0.0) {
            Ok(())
        } else {
            Err(invalid(format!("traces must be finite and nonnegative, got {all:?}")))
        }
    }
}

/// `β(ν; ρ)`, the minimum of [`Traces::candidates`].
pub fn beta(traces: &Traces) -> Result<f64> {
    Ok(beta_argmin(traces)?.0)
}

/// `β` together with the index of the first candidate attaining it.
pub fn beta_argmin(traces: &Traces) -> Result<(f64, usize)> {
    traces.validate()?;
    let c = traces.candidates();
    let mut best = (c[0], 0);
    for (k, &v) in c.iter().enumerate().skip(1) {
        if v < best.0 {
            best = (v, k);
        }
    }
    Ok(best)
}

/// A set with analytic boundary: open intervals in 1D, polygon loops in 2D.
///
/// Polygon loops are oriented so that the set lies to their left (outer
/// loops counter-clockwise, holes clockwise); membership is even-odd.
#[derive(Clone, Debug, PartialEq)]
pub enum PolygonalSet {
    Intervals(Vec<(f64, f64)>),
    Polygons(Vec<Vec<Point>>),
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn segments_cross(p: Point, q: Point, r: Point, s: Point) -> bool {
    let d1 = cross(r, s, p);
    let d2 = cross(r, s, q);
    let d3 = cross(p, q, r);
    let d4 = cross(p, q, s);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

impl PolygonalSet {
    pub fn intervals(mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(a, b) in &intervals {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(invalid(format!("interval ({a}, {b}) is empty or not finite")));
            }
        }
        for w in intervals.windows(2) {
            if w[0].1 > w[1].0 {
                return Err(invalid(format!("intervals {:?} and {:?} overlap", w[0], w[1])));
            }
        }
        Ok(Self::Intervals(intervals))
    }

    pub fn polygons(loops: Vec<Vec<Point>>) -> Result<Self> {
        let mut area = 0.0;
        for l in &loops {
            if l.len() < 3 {
                return Err(invalid("polygon loops need at least three vertices"));
            }
            if l.iter().flatten().any(|c| !c.is_finite()) {
                return Err(invalid("polygon vertices must be finite"));
            }
            area += signed_area(l);
        }
        let edges: Vec<(Point, Point)> =
            loops.iter().flat_map(|l| (0..l.len()).map(move |k| (l[k], l[(k + 1) % l.len()]))).collect();
        for i in 0..edges.len() {
            for j in i + 1..edges.len() {
                if segments_cross(edges[i].0, edges[i].1, edges[j].0, edges[j].1) {
                    return Err(Error::GeometryConflict(format!(
                        "polygon edges {:?} and {:?} cross",
                        edges[i], edges[j]
                    )));
                }
            }
        }
        if !loops.is_empty() && area <= 0.0 {
            return Err(invalid("polygon loops must enclose positive area (set to the left)"));
        }
        Ok(Self::Polygons(loops))
    }

    pub fn rectangle(lower: Point, upper: Point) -> Result<Self> {
        Self::polygons(vec![vec![lower, [upper[0], lower[1]], upper, [lower[0], upper[1]]]])
    }

    /// Regular polygon with `vertices` corners inscribed in the circle.
    pub fn disk(center: Point, radius: f64, vertices: usize) -> Result<Self> {
        if !(radius > 0.0) || vertices < 3 {
            return Err(invalid("disk needs a positive radius and at least three vertices"));
        }
        let l = (0..vertices)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / vertices as f64;
                [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
            })
            .collect();
        Self::polygons(vec![l])
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Intervals(_) => 1,
            Self::Polygons(_) => 2,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        match self {
            Self::Intervals(iv) => iv.iter().any(|&(a, b)| p[0] > a && p[0] < b),
            Self::Polygons(loops) => {
                let mut inside = false;
                for l in loops {
                    for k in 0..l.len() {
                        let (a, b) = (l[k], l[(k + 1) % l.len()]);
                        if (a[1] > p[1]) != (b[1] > p[1]) {
                            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
                            if p[0] < x {
                                inside = !inside;
                            }
                        }
                    }
                }
                inside
            }
        }
    }

    fn check_domain(&self, domain: &GridDomain) -> Result<()> {
        if self.dim() != domain.dim() {
            return Err(invalid(format!("{}D set on a {}D domain", self.dim(), domain.dim())));
        }
        let (lo, hi) = (domain.lower(), domain.upper());
        let outside = |p: Point| (0..domain.dim()).any(|a| p[a] < lo[a] - BOUNDARY_TOL || p[a] > hi[a] + BOUNDARY_TOL);
        let bad = match self {
            Self::Intervals(iv) => iv.iter().any(|&(a, b)| outside([a, 0.0]) || outside([b, 0.0])),
            Self::Polygons(loops) => loops.iter().flatten().any(|&p| outside(p)),
        };
        if bad {
            return Err(Error::GeometryConflict("set extends outside the domain".into()));
        }
        Ok(())
    }

    /// Cells whose centers lie in the set.
    pub fn rasterize(&self, domain: &GridDomain) -> Result<BinaryField> {
        self.check_domain(domain)?;
        Ok(BinaryField::from_fn(domain, |p| self.contains(p)))
    }

    /// The complement within the domain box.
    pub fn complement(&self, domain: &GridDomain) -> Result<Self> {
        self.check_domain(domain)?;
        let (lo, hi) = (domain.lower(), domain.upper());
        match self {
            Self::Intervals(iv) => {
                let mut out = Vec::new();
                let mut start = lo[0];
                for &(a, b) in iv {
                    if a > start {
                        out.push((start, a));
                    }
                    start = start.max(b);
                }
                if start < hi[0] {
                    out.push((start, hi[0]));
                }
                Self::intervals(out)
            }
            Self::Polygons(loops) => {
                let mut out = vec![vec![[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]]];
                out.extend(loops.iter().map(|l| l.iter().rev().copied().collect::<Vec<_>>()));
                Self::polygons(out)
            }
        }
    }

    /// Lebesgue measure of the set (signed area sum in 2D).
    pub fn measure(&self) -> f64 {
        match self {
            Self::Intervals(iv) => iv.iter().map(|&(a, b)| b - a).collect::<ExactSum>().value(),
            Self::Polygons(loops) => loops.iter().map(|l| signed_area(l)).collect::<ExactSum>().value(),
        }
    }

    /// `|A △ B|`: exact for intervals, rasterized on `domain` for polygons.
    pub fn symmetric_difference_measure(&self, other: &Self, domain: &GridDomain) -> Result<f64> {
        match (self, other) {
            (Self::Intervals(a), Self::Intervals(b)) => {
                let mut cuts: Vec<f64> = a.iter().chain(b).flat_map(|&(x, y)| [x, y]).collect();
                cuts.sort_by(f64::total_cmp);
                cuts.dedup();
                let mut sum = ExactSum::new();
                for w in cuts.windows(2) {
                    let mid = [0.5 * (w[0] + w[1]), 0.0];
                    if self.contains(mid) != other.contains(mid) {
                        sum.add(w[1]);
                        sum.add(-w[0]);
                    }
                }
                Ok(sum.value())
            }
            (Self::Polygons(_), Self::Polygons(_)) => {
                Ok(self.rasterize(domain)?.symmetric_difference(&other.rasterize(domain)?)?.measure())
            }
            _ => Err(invalid("sets have different dimensions")),
        }
    }
}

fn signed_area(l: &[Point]) -> f64 {
    let mut s = ExactSum::new();
    for k in 0..l.len() {
        let (a, b) = (l[k], l[(k + 1) % l.len()]);
        s.add_product(a[0], b[1]);
        s.add_product(-b[0], a[1]);
    }
    0.5 * s.value()
}

/// Sets whose interface can be extracted.
pub trait InterfaceSource {
    fn interface(&self, domain: &GridDomain) -> Result<InterfaceMesh>;
}

/// `∂*A ∩ Ω` as a list of facets with inner normals.
pub fn extract_interface<S: InterfaceSource + ?Sized>(a: &S, domain: &GridDomain) -> Result<InterfaceMesh> {
    a.interface(domain)
}

impl InterfaceSource for PolygonalSet {
    fn interface(&self, domain: &GridDomain) -> Result<InterfaceMesh> {
        self.check_domain(domain)?;
        let (lo, hi) = (domain.lower(), domain.upper());
        let on_wall = |x: f64, axis: usize| (x - lo[axis]).abs() <= BOUNDARY_TOL || (x - hi[axis]).abs() <= BOUNDARY_TOL;
        let mut facets = Vec::new();
        match self {
            Self::Intervals(iv) => {
                for &(a, b) in iv {
                    if !on_wall(a, 0) {
                        facets.push(Facet { midpoint: [a, 0.0], normal: [1.0, 0.0], measure: 1.0 });
                    }
                    if !on_wall(b, 0) {
                        facets.push(Facet { midpoint: [b, 0.0], normal: [-1.0, 0.0], measure: 1.0 });
                    }
                }
            }
            Self::Polygons(loops) => {
                let max_len = 4.0 * domain.h();
                for l in loops {
                    for k in 0..l.len() {
                        let (a, b) = (l[k], l[(k + 1) % l.len()]);
                        let same_wall = (0..2).any(|axis| {
                            on_wall(a[axis], axis) && on_wall(b[axis], axis) && (a[axis] - b[axis]).abs() <= BOUNDARY_TOL
                        });
                        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
                        if same_wall || len == 0.0 {
                            continue;
                        }
                        let normal = [-(b[1] - a[1]) / len, (b[0] - a[0]) / len];
                        let m = (len / max_len).ceil().max(1.0) as usize;
                        let mf = m as f64;
                        let at = |k: usize| {
                            let (wa, wb) = ((m - k) as f64, k as f64);
                            [(a[0] * wa + b[0] * wb) / mf, (a[1] * wa + b[1] * wb) / mf]
                        };
                        for j in 0..m {
                            let (p, q) = (at(j), at(j + 1));
                            facets.push(Facet {
                                midpoint: [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])],
                                normal,
                                measure: (q[0] - p[0]).hypot(q[1] - p[1]),
                            });
                        }
                    }
                }
            }
        }
        if facets.is_empty() {
            return Err(Error::DegenerateSet("set has no interface inside the domain".into()));
        }
        Ok(InterfaceMesh::new(facets))
    }
}

/// Half width in cells of the box filter applied before marching squares:
/// `round(sqrt(n) / 4)`, at least 1, with `n` the larger cell count. The
/// staircase bias decays with the width while the curvature shrinkage grows
/// like its physical size, so the width grows slower than `1/h`.
pub fn smoothing_half_width(domain: &GridDomain) -> usize {
    let n = domain.cells().iter().copied().max().unwrap_or(1) as f64;
    ((n.sqrt() / 4.0).round() as usize).max(1)
}

/// Box average of the indicator over in-domain cells within `w` cells.
fn presmooth(a: &BinaryField, w: usize) -> Vec<f64> {
    let d = a.domain();
    let [n0, n1] = d.shape();
    (0..d.len())
        .into_par_iter()
        .map(|idx| {
            let (i0, i1) = d.coords(idx);
            let (mut sum, mut count) = (0.0, 0.0);
            for j0 in i0.saturating_sub(w)..=(i0 + w).min(n0 - 1) {
                for j1 in i1.saturating_sub(w)..=(i1 + w).min(n1 - 1) {
                    sum += f64::from(u8::from(a.get(d.index(j0, j1))));
                    count += 1.0;
                }
            }
            sum / count
        })
        .collect()
}

fn marching_square(d: &GridDomain, s: &[f64], i0: usize, i1: usize, out: &mut Vec<Facet>) {
    let h = d.h();
    let v = [
        s[d.index(i0, i1)],
        s[d.index(i0 + 1, i1)],
        s[d.index(i0 + 1, i1 + 1)],
        s[d.index(i0, i1 + 1)],
    ];
    // corner offsets in cell units along (axis 0, axis 1)
    const CORNER: [(f64, f64); 4] = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
    let inside = v.map(|x| x > 0.5);
    let mut crossings = [None; 4];
    for k in 0..4 {
        let (a, b) = (k, (k + 1) % 4);
        if inside[a] != inside[b] {
            let t = (0.5 - v[a]) / (v[b] - v[a]);
            let (ua, wa) = CORNER[a];
            let (ub, wb) = CORNER[b];
            crossings[k] = Some((ua + t * (ub - ua), wa + t * (wb - wa)));
        }
    }
    let found: Vec<usize> = (0..4).filter(|&k| crossings[k].is_some()).collect();
    let pairs: Vec<(usize, usize)> = match found.len() {
        2 => vec![(found[0], found[1])],
        4 => {
            let center_inside = v.iter().sum::<f64>() / 4.0 > 0.5;
            if center_inside == inside[0] {
                vec![(0, 1), (2, 3)]
            } else {
                vec![(3, 0), (1, 2)]
            }
        }
        _ => Vec::new(),
    };
    let origin = d.center_of(i0, i1);
    for (p, q) in pairs {
        let (pu, pw) = crossings[p].unwrap();
        let (qu, qw) = crossings[q].unwrap();
        let (mu, mw) = (0.5 * (pu + qu), 0.5 * (pw + qw));
        let measure = h * (qu - pu).hypot(qw - pw);
        if measure == 0.0 {
            continue;
        }
        let gu = (v[1] - v[0]) * (1.0 - mw) + (v[2] - v[3]) * mw;
        let gw = (v[3] - v[0]) * (1.0 - mu) + (v[2] - v[1]) * mu;
        let g = gu.hypot(gw);
        let normal = if g > 0.0 {
            [gu / g, gw / g]
        } else {
            let (tu, tw) = ((qu - pu) * h / measure, (qw - pw) * h / measure);
            let n = [-tw, tu];
            let side: f64 = (0..4).map(|c| (v[c] - 0.5) * ((CORNER[c].0 - mu) * n[0] + (CORNER[c].1 - mw) * n[1])).sum();
            if side >= 0.0 {
                n
            } else {
                [-n[0], -n[1]]
            }
        };
        out.push(Facet { midpoint: [origin[0] + mu * h, origin[1] + mw * h], normal, measure });
    }
}

impl InterfaceSource for BinaryField {
    fn interface(&self, domain: &GridDomain) -> Result<InterfaceMesh> {
        domain.check_same(self.domain())?;
        if self.is_empty() || self.is_full() {
            return Err(Error::DegenerateSet("set is empty or full".into()));
        }
        let [n0, n1] = domain.shape();
        let facets = if domain.dim() == 1 {
            (0..n0 - 1)
                .filter(|&i| self.get(i) != self.get(i + 1))
                .map(|i| {
                    let x = domain.lower()[0] + (i + 1) as f64 * domain.h();
                    let nx = if self.get(i + 1) { 1.0 } else { -1.0 };
                    Facet { midpoint: [x, 0.0], normal: [nx, 0.0], measure: 1.0 }
                })
                .collect()
        } else {
            let s = presmooth(self, smoothing_half_width(domain));
            (0..n0.saturating_sub(1))
                .into_par_iter()
                .flat_map_iter(|i0| {
                    let mut row = Vec::new();
                    for i1 in 0..n1 - 1 {
                        marching_square(domain, &s, i0, i1, &mut row);
                    }
                    row
                })
                .collect::<Vec<_>>()
        };
        if facets.is_empty() {
            return Err(Error::DegenerateSet("no interface between cell centers".into()));
        }
        Ok(InterfaceMesh::new(facets))
    }
}

/// Cells with centers in `{y : |y - x| < r, <y - x, ν> > 0}`.
fn half_ball(domain: &GridDomain, x: Point, nu: Point, r: f64) -> Vec<usize> {
    let h = domain.h();
    let [n0, n1] = domain.shape();
    let range = |axis: usize, n: usize| {
        if axis >= domain.dim() {
            return (0, 0);
        }
        let lo = domain.lower()[axis];
        let a = ((x[axis] - r - lo) / h - 0.5).floor().max(0.0) as usize;
        let b = (((x[axis] + r - lo) / h - 0.5).ceil().max(0.0) as usize).min(n - 1);
        (a, b)
    };
    let (a0, b0) = range(0, n0);
    let (a1, b1) = range(1, n1);
    let mut cells = Vec::new();
    if a0 > b0 || a1 > b1 {
        return cells;
    }
    for i0 in a0..=b0 {
        for i1 in a1..=b1 {
            let y = domain.center_of(i0, i1);
            let (dx, dy) = (y[0] - x[0], y[1] - x[1]);
            if dx.hypot(dy) < r && dx * nu[0] + dy * nu[1] > 0.0 {
                cells.push(domain.index(i0, i1));
            }
        }
    }
    cells
}

fn half_ball_mean(rho: &ScalarField, cells: &[usize]) -> f64 {
    let s: ExactSum = cells.iter().map(|&c| rho.get(c)).collect();
    s.value() / cells.len() as f64
}

/// Estimate of the one-sided trace `rho^ν(x)`.
///
/// Averages over the half balls of radius `r` and `r/2` are combined as
/// `2 T(r/2) - T(r)` and clamped to the range of sampled values.
pub fn trace_estimate(rho: &ScalarField, x: Point, nu: Point, r: f64) -> Result<f64> {
    let domain = rho.domain();
    if !((nu[0].hypot(nu[1]) - 1.0).abs() <= NORMAL_TOL) {
        return Err(invalid(format!("normal {nu:?} is not a unit vector")));
    }
    if !(r.is_finite() && r >= 4.0 * domain.h()) {
        return Err(invalid(format!("trace radius {r} is below 4h = {}", 4.0 * domain.h())));
    }
    let outer = half_ball(domain, x, nu, r);
    let inner = half_ball(domain, x, nu, 0.5 * r);
    if outer.len() < MIN_HALF_BALL_CELLS || inner.is_empty() {
        return Err(Error::BoundaryProximity { x: x[0], y: x[1], cells: outer.len() });
    }
    let (lo, hi) = outer
        .iter()
        .map(|&c| rho.get(c))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let t = 2.0 * half_ball_mean(rho, &inner) - half_ball_mean(rho, &outer);
    Ok(t.clamp(lo.max(0.0), hi.max(0.0)))
}

/// Default trace radius: eight cells.
pub fn default_trace_radius(domain: &GridDomain) -> f64 {
    8.0 * domain.h()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracedFacet {
    pub facet: Facet,
    pub traces: Traces,
    pub beta: f64,
    /// Index into [`Traces::candidates`] of the attaining candidate.
    pub argmin: usize,
}

impl TracedFacet {
    pub const CSV_HEADER: &'static str = "x,y,nu_x,nu_y,measure,t00,t01,t10,t11,beta";

    pub fn csv_row(&self) -> String {
        let f = &self.facet;
        let t = &self.traces;
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            f.midpoint[0],
            f.midpoint[1],
            f.normal[0],
            f.normal[1],
            f.measure,
            t.rho0_plus,
            t.rho0_minus,
            t.rho1_plus,
            t.rho1_minus,
            self.beta
        )
    }
}

/// Traces and `β` at one facet.
pub fn trace_facet(facet: &Facet, rho: &DensityPair, r: f64) -> Result<TracedFacet> {
    let (x, nu) = (facet.midpoint, facet.normal);
    let minus = [-nu[0], -nu[1]];
    let traces = Traces::new(
        trace_estimate(rho.rho0(), x, nu, r)?,
        trace_estimate(rho.rho0(), x, minus, r)?,
        trace_estimate(rho.rho1(), x, nu, r)?,
        trace_estimate(rho.rho1(), x, minus, r)?,
    );
    let (beta, argmin) = beta_argmin(&traces)?;
    Ok(TracedFacet { facet: *facet, traces, beta, argmin })
}

/// Facet-level breakdown of the limit energy.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitEnergy {
    pub total: f64,
    pub facets: Vec<TracedFacet>,
    /// Facets whose traces could not be estimated.
    pub skipped: Vec<Facet>,
}

impl LimitEnergy {
    pub fn skipped_measure(&self) -> f64 {
        self.skipped.iter().map(|f| f.measure).collect::<ExactSum>().value()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(TracedFacet::CSV_HEADER);
        out.push('\n');
        for f in &self.facets {
            let _ = writeln!(out, "{}", f.csv_row());
        }
        out
    }
}

/// `Σ β · measure` over the extracted interface, with per-facet details.
pub fn per_limit_detailed<S: InterfaceSource + ?Sized>(
    a: &S,
    rho: &DensityPair,
    trace_radius: f64,
) -> Result<LimitEnergy> {
    let domain = rho.domain();
    if !(trace_radius.is_finite() && trace_radius >= 4.0 * domain.h()) {
        return Err(invalid(format!("trace radius {trace_radius} is below 4h = {}", 4.0 * domain.h())));
    }
    let mesh = a.interface(domain)?;
    let results: Vec<Result<TracedFacet>> = mesh.facets.par_iter().map(|f| trace_facet(f, rho, trace_radius)).collect();
    let mut facets = Vec::with_capacity(results.len());
    let mut skipped = Vec::new();
    let mut sum = ExactSum::new();
    for (facet, r) in mesh.facets.iter().zip(results) {
        match r {
            Ok(t) => {
                sum.add_product(t.beta, t.facet.measure);
                facets.push(t);
            }
            Err(Error::BoundaryProximity { x, y, cells }) => {
                log::info!("skipping facet at ({x}, {y}) of measure {}: {cells} cells in half ball", facet.measure);
                skipped.push(*facet);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(LimitEnergy { total: sum.value(), facets, skipped })
}

/// The limit perimeter `Per(A; rho)`.
pub fn per_limit<S: InterfaceSource + ?Sized>(a: &S, rho: &DensityPair, trace_radius: f64) -> Result<f64> {
    Ok(per_limit_detailed(a, rho, trace_radius)?.total)
}

/// `∫ Per({u > t}; rho) dt` by the midpoint rule over `thresholds` levels.
/// Level sets that are empty or full contribute zero.
pub fn tv_limit(u: &ScalarField, rho: &DensityPair, thresholds: usize, trace_radius: f64) -> Result<f64> {
    if thresholds == 0 {
        return Err(invalid("need at least one threshold"));
    }
    u.domain().check_same(rho.domain())?;
    let (lo, hi) = (u.min(), u.max());
    let range = hi - lo;
    if range == 0.0 {
        return Ok(0.0);
    }
    let step = range / thresholds as f64;
    let levels: Vec<f64> = (0..thresholds)
        .into_par_iter()
        .map(|k| {
            let level = u.superlevel(lo + (k as f64 + 0.5) * step);
            if level.is_empty() || level.is_full() {
                Ok(0.0)
            } else {
                per_limit(&level, rho, trace_radius)
            }
        })
        .collect::<Result<_>>()?;
    Ok(levels.into_iter().collect::<ExactSum>().value() * range / thresholds as f64)
}
