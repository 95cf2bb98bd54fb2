//! Experiments around the limit `Per_eps -> Per`: eps sweeps, recovery
//! shifts of flat facets, compactness fields and Minkowski contents.

use crate::error::{check_eps, invalid, Error, Result};
use crate::geometry::{
    dilate, distance_transform, erode, BinaryField, DensityPair, GridDomain, Point, ScalarField,
};
use crate::limit::{default_trace_radius, per_limit_detailed, trace_facet, Facet, LimitEnergy, PolygonalSet};
use crate::nonlocal::per_eps;
use crate::report::{SweepReport, SweepRow};
use crate::sum::ExactSum;

pub use crate::report::Trend;

/// Candidate index of `β` that keeps a facet in place.
const KEEP: usize = 2;
/// Candidate index realized by moving the facet outward (along `-ν`).
const OUTWARD: usize = 1;
/// Candidate index realized by moving the facet inward (along `ν`).
const INWARD: usize = 0;

/// Tolerance for ties between `β` candidates: round-off plus the
/// `O(h / r)` accuracy of the trace estimates.
fn tie_tolerance(h: f64, r: f64, candidates: &[f64; 3]) -> f64 {
    let largest = candidates.iter().copied().fold(0.0, f64::max);
    1e-9 + 2.0 * h / r * largest
}

/// The candidate realized by the recovery construction, preferring to keep
/// the facet, then to move it outward, then inward, among near-ties.
fn recovery_choice(candidates: &[f64; 3], tol: f64) -> usize {
    let min = candidates.iter().copied().fold(f64::INFINITY, f64::min);
    [KEEP, OUTWARD, INWARD].into_iter().find(|&k| candidates[k] <= min + tol).unwrap_or(KEEP)
}

/// Whether constant sequences fail to recover `Per` for this set: some facet
/// has a strictly better candidate than keeping it in place, and not all
/// candidates tie.
pub fn expected_gap(limit: &LimitEnergy, h: f64, r: f64) -> bool {
    limit.facets.iter().any(|f| {
        let c = f.traces.candidates();
        let tol = tie_tolerance(h, r, &c);
        let all_tie = c.iter().all(|&x| (x - c[0]).abs() <= tol);
        !all_tie && recovery_choice(&c, tol) != KEEP
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpsSweep {
    /// Rows: `eps`, terms `outer`, `inner`; value `Per_eps`, reference `Per`.
    pub report: SweepReport,
    /// A persisting gap between `Per_eps(A)` and `Per(A)` is expected.
    pub expected_gap: bool,
}

fn check_decreasing(eps_list: &[f64], h: f64) -> Result<()> {
    if eps_list.is_empty() {
        return Err(invalid("eps list is empty"));
    }
    for &e in eps_list {
        check_eps(e)?;
        if e < 2.0 * h {
            return Err(invalid(format!("eps = {e} is below 2h = {}", 2.0 * h)));
        }
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("eps list must be strictly decreasing"));
    }
    Ok(())
}

/// `Per_eps(A)` over `eps_list` against `Per(A)`.
pub fn eps_sweep(a: &BinaryField, rho: &DensityPair, eps_list: &[f64], trace_radius: f64) -> Result<EpsSweep> {
    let h = a.domain().h();
    check_decreasing(eps_list, h)?;
    let (reference, gap) = if a.is_empty() || a.is_full() {
        (0.0, false)
    } else {
        let limit = per_limit_detailed(a, rho, trace_radius)?;
        let gap = expected_gap(&limit, h, trace_radius);
        (limit.total, gap)
    };
    let mut report = SweepReport::new("eps_sweep", "eps", &["outer", "inner"], h);
    report.note(format!("trace_radius={trace_radius}"));
    report.note(format!("expected_gap={gap}"));
    for &eps in eps_list {
        let e = per_eps(a, rho, eps)?;
        report.push(SweepRow {
            parameter: eps,
            terms: vec![e.outer, e.inner],
            value: e.total,
            reference,
            warn: e.under_resolved,
        });
    }
    Ok(EpsSweep { report, expected_gap: gap })
}

fn segment_distance(p: Point, q: Point, r: Point, s: Point) -> f64 {
    let point_segment = |x: Point, a: Point, b: Point| {
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let len2 = dx * dx + dy * dy;
        let t = if len2 > 0.0 { (((x[0] - a[0]) * dx + (x[1] - a[1]) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
        (x[0] - a[0] - t * dx).hypot(x[1] - a[1] - t * dy)
    };
    point_segment(p, r, s).min(point_segment(q, r, s)).min(point_segment(r, p, q)).min(point_segment(s, p, q))
}

/// Shifted copy of a polygonal set: each flat facet moves by `1.5 eta`
/// toward the side selected by the minimizing `β` candidate (outward for
/// `ρ0^-ν + ρ1^-ν`, inward for `ρ0^ν + ρ1^ν`) or stays for the third
/// candidate. Facets on the domain boundary stay.
pub fn recovery_shift(a: &PolygonalSet, rho: &DensityPair, eta: f64) -> Result<PolygonalSet> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(invalid(format!("eta must be positive, got {eta}")));
    }
    let domain = rho.domain();
    let (lo, hi) = (domain.lower().to_vec(), domain.upper().to_vec());
    let r = default_trace_radius(domain);
    let h = domain.h();
    let shift = 1.5 * eta;
    let on_wall = |x: f64, axis: usize| (x - lo[axis]).abs() <= 1e-12 || (x - hi[axis]).abs() <= 1e-12;
    // signed displacement along the inner normal
    let displacement = |facet: Facet| -> Result<f64> {
        let t = trace_facet(&facet, rho, r)?;
        let c = t.traces.candidates();
        Ok(match recovery_choice(&c, tie_tolerance(h, r, &c)) {
            OUTWARD => -shift,
            INWARD => shift,
            _ => 0.0,
        })
    };
    let out = match a {
        PolygonalSet::Intervals(iv) => {
            let mut ends: Vec<f64> = iv.iter().flat_map(|&(x, y)| [x, y]).collect();
            ends.sort_by(f64::total_cmp);
            if ends.windows(2).any(|w| w[1] - w[0] <= 4.0 * eta) {
                return Err(Error::GeometryConflict(format!("facets closer than 4 eta = {}", 4.0 * eta)));
            }
            let mut moved = Vec::with_capacity(iv.len());
            for &(x, y) in iv {
                let nx = if on_wall(x, 0) {
                    x
                } else {
                    x + displacement(Facet { midpoint: [x, 0.0], normal: [1.0, 0.0], measure: 1.0 })?
                };
                let ny = if on_wall(y, 0) {
                    y
                } else {
                    y - displacement(Facet { midpoint: [y, 0.0], normal: [-1.0, 0.0], measure: 1.0 })?
                };
                moved.push((nx, ny));
            }
            PolygonalSet::intervals(moved)?
        }
        PolygonalSet::Polygons(loops) => {
            let edges: Vec<(usize, usize)> =
                loops.iter().enumerate().flat_map(|(l, lp)| (0..lp.len()).map(move |k| (l, k))).collect();
            let edge = |(l, k): (usize, usize)| (loops[l][k], loops[l][(k + 1) % loops[l].len()]);
            for (x, &ei) in edges.iter().enumerate() {
                for &ej in &edges[x + 1..] {
                    let adjacent = ei.0 == ej.0 && {
                        let m = loops[ei.0].len();
                        (ei.1 + 1) % m == ej.1 || (ej.1 + 1) % m == ei.1
                    };
                    let (p, q) = edge(ei);
                    let (s, t) = edge(ej);
                    if !adjacent && segment_distance(p, q, s, t) <= 4.0 * eta {
                        return Err(Error::GeometryConflict(format!(
                            "facets {p:?}-{q:?} and {s:?}-{t:?} are closer than 4 eta"
                        )));
                    }
                }
            }
            let mut out = Vec::with_capacity(loops.len());
            for lp in loops {
                let m = lp.len();
                let mut normals = Vec::with_capacity(m);
                let mut offsets = Vec::with_capacity(m);
                for k in 0..m {
                    let (p, q) = (lp[k], lp[(k + 1) % m]);
                    let len = (q[0] - p[0]).hypot(q[1] - p[1]);
                    let n = [-(q[1] - p[1]) / len, (q[0] - p[0]) / len];
                    let wall = (0..2).any(|ax| on_wall(p[ax], ax) && on_wall(q[ax], ax) && p[ax] == q[ax]);
                    let mid = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
                    offsets.push(if wall { 0.0 } else { displacement(Facet { midpoint: mid, normal: n, measure: len })? });
                    normals.push(n);
                }
                let mut moved = Vec::with_capacity(m);
                for k in 0..m {
                    let prev = (k + m - 1) % m;
                    let (n1, n2) = (normals[prev], normals[k]);
                    let v = lp[k];
                    let c1 = n1[0] * v[0] + n1[1] * v[1] + offsets[prev];
                    let c2 = n2[0] * v[0] + n2[1] * v[1] + offsets[k];
                    let det = n1[0] * n2[1] - n1[1] * n2[0];
                    if det.abs() < 1e-12 {
                        if (offsets[prev] - offsets[k]).abs() > 1e-15 {
                            return Err(Error::GeometryConflict(format!("collinear edges at {v:?} move apart")));
                        }
                        moved.push([v[0] + offsets[k] * n2[0], v[1] + offsets[k] * n2[1]]);
                    } else {
                        moved.push([(c1 * n2[1] - c2 * n1[1]) / det, (n1[0] * c2 - n2[0] * c1) / det]);
                    }
                }
                out.push(moved);
            }
            PolygonalSet::polygons(out)?
        }
    };
    let inside = match &out {
        PolygonalSet::Intervals(iv) => iv.iter().all(|&(x, y)| x >= lo[0] && y <= hi[0]),
        PolygonalSet::Polygons(loops) => loops
            .iter()
            .flatten()
            .all(|p| (0..2).all(|ax| p[ax] >= lo[ax] - 1e-12 && p[ax] <= hi[ax] + 1e-12)),
    };
    if !inside {
        return Err(Error::GeometryConflict("shifted set leaves the domain".into()));
    }
    Ok(out)
}

/// `u = max(1 - dist(x, A)/eps, 0)` and `v = min(dist(x, A^c)/eps, 1)`.
pub fn compactness_fields(a: &BinaryField, eps: f64) -> Result<(ScalarField, ScalarField)> {
    check_eps(eps)?;
    if a.is_empty() || a.is_full() {
        return Err(Error::DegenerateSet("compactness fields need a nondegenerate set".into()));
    }
    let to_a = distance_transform(a);
    let to_complement = distance_transform(&a.complement());
    Ok((to_a.map(|d| (1.0 - d / eps).max(0.0)), to_complement.map(|d| (d / eps).min(1.0))))
}

/// `∫ |∇_h f| w` with central differences (one-sided at the edges).
pub fn discrete_gradient_integral(f: &ScalarField, w: &ScalarField) -> Result<f64> {
    let d = f.domain();
    d.check_same(w.domain())?;
    let [n0, n1] = d.shape();
    let h = d.h();
    let derivative = |i0: usize, i1: usize, axis: usize| {
        let (n, i) = if axis == 0 { (n0, i0) } else { (n1, i1) };
        if n < 2 {
            return 0.0;
        }
        let at = |j: usize| if axis == 0 { f.get(d.index(j, i1)) } else { f.get(d.index(i0, j)) };
        let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
        (at(b) - at(a)) / ((b - a) as f64 * h)
    };
    let mut s = ExactSum::new();
    for idx in 0..d.len() {
        let (i0, i1) = d.coords(idx);
        let g = derivative(i0, i1, 0).hypot(derivative(i0, i1, 1));
        s.add_product(g, w.get(idx));
    }
    Ok(s.value() * d.cell_volume())
}

/// Both sides of `∫ |∇u| rho0 <= Per_eps^0(A)` and `∫ |∇v| rho1 <= Per_eps^1(A)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradientCheck {
    pub grad_u_rho0: f64,
    pub per_outer: f64,
    pub grad_v_rho1: f64,
    pub per_inner: f64,
}

impl GradientCheck {
    /// Largest amount by which a gradient integral exceeds its bound.
    pub fn excess(&self) -> f64 {
        (self.grad_u_rho0 - self.per_outer).max(self.grad_v_rho1 - self.per_inner)
    }
}

pub fn gradient_check(a: &BinaryField, rho: &DensityPair, eps: f64) -> Result<GradientCheck> {
    let (u, v) = compactness_fields(a, eps)?;
    let per = per_eps(a, rho, eps)?;
    Ok(GradientCheck {
        grad_u_rho0: discrete_gradient_integral(&u, rho.rho0())?,
        per_outer: per.outer,
        grad_v_rho1: discrete_gradient_integral(&v, rho.rho1())?,
        per_inner: per.inner,
    })
}

/// `|{x : dist(x, ∂A) < eps}| / (2 eps)` on the grid, the strip being
/// `dilate(A) \ erode(A)`.
pub fn minkowski_value(a: &BinaryField, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    if a.is_empty() || a.is_full() {
        return Err(Error::DegenerateSet("Minkowski content of an empty or full set".into()));
    }
    let strip = dilate(a, eps)?.difference(&erode(a, eps)?)?;
    Ok(strip.measure() / (2.0 * eps))
}

/// Minkowski contents of one rasterized set over `eps_list` against the
/// interface measure `reference`.
pub fn minkowski_content(a: &BinaryField, eps_list: &[f64], reference: f64) -> Result<SweepReport> {
    let mut report = SweepReport::new("minkowski", "eps", &["cells"], a.domain().h());
    for &eps in eps_list {
        let value = minkowski_value(a, eps)?;
        report.push(SweepRow {
            parameter: eps,
            terms: vec![a.domain().cells()[0] as f64],
            value,
            reference,
            warn: eps < 2.0 * a.domain().h(),
        });
    }
    Ok(report)
}

/// Minkowski sweep with the grid refined per `eps` so that `h ∝ eps^2`:
/// the smallest `eps` uses `finest_cells` per axis. Keeps the
/// discretization error below the (vanishing) continuum error as `eps`
/// shrinks.
pub fn minkowski_content_refined(
    indicator: &(dyn Fn(Point) -> bool + Sync),
    lower: &[f64],
    upper: &[f64],
    finest_cells: usize,
    eps_list: &[f64],
    reference: f64,
) -> Result<SweepReport> {
    let eps_min = eps_list.iter().copied().fold(f64::INFINITY, f64::min);
    check_eps(eps_min)?;
    let mut report = SweepReport::new("minkowski_refined", "eps", &["cells"], f64::NAN);
    let mut finest_h = f64::NAN;
    for &eps in eps_list {
        let ratio = (eps_min / eps).powi(2);
        let n = ((finest_cells as f64 * ratio).round() as usize).max(2);
        let cells = vec![n; lower.len()];
        let domain = GridDomain::new(lower, upper, &cells)?;
        if eps == eps_min {
            finest_h = domain.h();
        }
        let a = BinaryField::from_fn(&domain, indicator);
        report.push(SweepRow {
            parameter: eps,
            terms: vec![n as f64],
            value: minkowski_value(&a, eps)?,
            reference,
            warn: eps < 2.0 * domain.h(),
        });
    }
    report.h = finest_h;
    report.note("grid refined per eps with h proportional to eps^2");
    Ok(report)
}
