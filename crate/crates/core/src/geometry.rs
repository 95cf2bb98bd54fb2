//! Grid domains, scalar and indicator fields, exact Euclidean distance
//! transforms and the ball dilation/erosion operators.
//!
//! Fields live on cell centers of an axis-aligned box in one or two
//! dimensions. Storage is row-major with the last axis fastest, so the flat
//! index of cell `(i0, i1)` is `i0 * n1 + i1`; one-dimensional domains use
//! `n1 = 1`.
//!
//! Balls are open: a cell center `y` lies in `B(x, eps)` iff
//! `h * sqrt(k) < eps`, where `k` is the squared index distance between the
//! two cells. Balls never reach outside the domain because no cells exist
//! there, which realizes `B(x, eps) ∩ Ω` without padding.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{check_eps, invalid, Error, Result};
use crate::sum::ExactSum;

/// A point in the plane. One-dimensional domains use the first coordinate
/// and keep the second at zero.
pub type Point = [f64; 2];

/// Distance reported by [`distance_transform`] when the set is empty.
pub const NO_SITE: f64 = f64::INFINITY;

const SPACING_RTOL: f64 = 1e-12;

/// Whether a cell at squared index distance `squared_cells` lies in the open
/// ball of radius `eps`.
#[inline]
pub fn within_ball(squared_cells: f64, h: f64, eps: f64) -> bool {
    cell_distance(squared_cells, h) < eps
}

#[inline]
fn cell_distance(squared_cells: f64, h: f64) -> f64 {
    h * squared_cells.sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridDomain {
    dim: usize,
    lower: [f64; 2],
    upper: [f64; 2],
    cells: [usize; 2],
    h: f64,
}

impl GridDomain {
    pub fn new(lower: &[f64], upper: &[f64], cells: &[usize]) -> Result<Self> {
        let dim = lower.len();
        if !(1..=2).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if upper.len() != dim || cells.len() != dim {
            return Err(invalid("lower, upper and cells must have the same length"));
        }
        let mut lo = [0.0; 2];
        let mut hi = [0.0; 2];
        let mut n = [1usize; 2];
        let mut spacing = [0.0; 2];
        for axis in 0..dim {
            if !(lower[axis].is_finite() && upper[axis].is_finite()) || upper[axis] <= lower[axis] {
                return Err(invalid(format!("axis {axis}: need finite lower < upper")));
            }
            if cells[axis] < 2 {
                return Err(invalid(format!("axis {axis}: need at least 2 cells")));
            }
            lo[axis] = lower[axis];
            hi[axis] = upper[axis];
            n[axis] = cells[axis];
            spacing[axis] = (upper[axis] - lower[axis]) / cells[axis] as f64;
        }
        if dim == 2 && (spacing[0] - spacing[1]).abs() > SPACING_RTOL * spacing[0].max(spacing[1]) {
            return Err(invalid(format!(
                "spacing differs between axes: {} vs {}",
                spacing[0], spacing[1]
            )));
        }
        Ok(Self { dim, lower: lo, upper: hi, cells: n, h: spacing[0] })
    }

    pub fn interval(lower: f64, upper: f64, cells: usize) -> Result<Self> {
        Self::new(&[lower], &[upper], &[cells])
    }

    pub fn rectangle(lower: [f64; 2], upper: [f64; 2], cells: [usize; 2]) -> Result<Self> {
        Self::new(&lower, &upper, &cells)
    }

    /// The square `(lower, upper)^2` with `cells` cells per axis.
    pub fn square(lower: f64, upper: f64, cells: usize) -> Result<Self> {
        Self::rectangle([lower, lower], [upper, upper], [cells, cells])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower[..self.dim]
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper[..self.dim]
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells[..self.dim]
    }

    /// `[n0, n1]`, with `n1 = 1` in one dimension.
    pub fn shape(&self) -> [usize; 2] {
        self.cells
    }

    pub fn len(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `h^d`, the quadrature weight of one cell.
    pub fn cell_volume(&self) -> f64 {
        if self.dim == 1 {
            self.h
        } else {
            self.h * self.h
        }
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim).map(|a| self.upper[a] - self.lower[a]).product()
    }

    #[inline]
    pub fn index(&self, i0: usize, i1: usize) -> usize {
        i0 * self.cells[1] + i1
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx / self.cells[1], idx % self.cells[1])
    }

    #[inline]
    pub fn center_of(&self, i0: usize, i1: usize) -> Point {
        let x = self.lower[0] + (i0 as f64 + 0.5) * self.h;
        if self.dim == 1 {
            [x, 0.0]
        } else {
            [x, self.lower[1] + (i1 as f64 + 0.5) * self.h]
        }
    }

    #[inline]
    pub fn center(&self, idx: usize) -> Point {
        let (i0, i1) = self.coords(idx);
        self.center_of(i0, i1)
    }

    /// The cell containing `p`, if `p` lies in the closed domain.
    pub fn cell_of(&self, p: Point) -> Option<usize> {
        let mut ij = [0usize; 2];
        for axis in 0..self.dim {
            let t = (p[axis] - self.lower[axis]) / self.h;
            if !(t >= 0.0 && p[axis] <= self.upper[axis]) {
                return None;
            }
            ij[axis] = (t.floor() as usize).min(self.cells[axis] - 1);
        }
        Some(self.index(ij[0], ij[1]))
    }

    pub fn contains(&self, p: Point) -> bool {
        (0..self.dim).all(|a| p[a] > self.lower[a] && p[a] < self.upper[a])
    }

    /// Distance from `p` to the boundary of the box.
    pub fn distance_to_boundary(&self, p: Point) -> f64 {
        (0..self.dim)
            .map(|a| (p[a] - self.lower[a]).min(self.upper[a] - p[a]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Same box with the cell count per axis multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(invalid(format!("resolution factor must be positive, got {factor}")));
        }
        let cells: Vec<usize> = self
            .cells()
            .iter()
            .map(|&n| ((n as f64 * factor).round() as usize).max(2))
            .collect();
        Self::new(self.lower(), self.upper(), &cells)
    }

    pub(crate) fn check_same(&self, other: &GridDomain) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(invalid("fields live on different domains"))
        }
    }

    fn header(&self) -> String {
        let mut s = format!("{}", self.dim);
        for v in self.lower() {
            write!(s, " {v}").unwrap();
        }
        for v in self.upper() {
            write!(s, " {v}").unwrap();
        }
        for v in self.cells() {
            write!(s, " {v}").unwrap();
        }
        s
    }

    fn parse_header(line: &str) -> Result<Self> {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let dim: usize = tokens
            .first()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse("missing dimension in header".into()))?;
        if !(1..=2).contains(&dim) || tokens.len() != 1 + 3 * dim {
            return Err(Error::Parse(format!("malformed header: {line:?}")));
        }
        let float = |t: &str| t.parse::<f64>().map_err(|e| Error::Parse(format!("{t:?}: {e}")));
        let lower: Vec<f64> = tokens[1..1 + dim].iter().map(|t| float(t)).collect::<Result<_>>()?;
        let upper: Vec<f64> =
            tokens[1 + dim..1 + 2 * dim].iter().map(|t| float(t)).collect::<Result<_>>()?;
        let cells: Vec<usize> = tokens[1 + 2 * dim..]
            .iter()
            .map(|t| t.parse().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
            .collect::<Result<_>>()?;
        Self::new(&lower, &upper, &cells)
    }
}

/// Real values per cell.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    domain: GridDomain,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(domain: GridDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(invalid(format!(
                "field has {} values, domain has {} cells",
                values.len(),
                domain.len()
            )));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(invalid("field contains NaN"));
        }
        Ok(Self { domain, values })
    }

    pub fn from_fn(domain: &GridDomain, f: impl Fn(Point) -> f64) -> Self {
        let values = (0..domain.len()).map(|i| f(domain.center(i))).collect();
        Self { domain: domain.clone(), values }
    }

    pub fn constant(domain: &GridDomain, value: f64) -> Self {
        Self { domain: domain.clone(), values: vec![value; domain.len()] }
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { domain: self.domain.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// Cells where the value is strictly above `t`.
    pub fn superlevel(&self, t: f64) -> BinaryField {
        BinaryField {
            domain: self.domain.clone(),
            values: self.values.iter().map(|&v| v > t).collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = self.domain.header();
        s.push('\n');
        for v in &self.values {
            writeln!(s, "{v}").unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (domain, body) = split_text(text)?;
        let values = body
            .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(domain, values)
    }

    pub fn write_text(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn read_text(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(e.to_string()))?;
        Self::from_text(&text)
    }
}

fn split_text(text: &str) -> Result<(GridDomain, impl Iterator<Item = &str>)> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty input".into()))?;
    let domain = GridDomain::parse_header(header)?;
    Ok((domain, lines.map(str::trim).filter(|l| !l.is_empty())))
}

/// Indicator of a set of cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryField {
    domain: GridDomain,
    values: Vec<bool>,
}

// GridDomain holds floats but never NaN (validated at construction).
impl Eq for GridDomain {}

impl BinaryField {
    pub fn new(domain: GridDomain, values: Vec<bool>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(invalid(format!(
                "field has {} values, domain has {} cells",
                values.len(),
                domain.len()
            )));
        }
        Ok(Self { domain, values })
    }

    pub fn from_fn(domain: &GridDomain, f: impl Fn(Point) -> bool) -> Self {
        let values = (0..domain.len()).map(|i| f(domain.center(i))).collect();
        Self { domain: domain.clone(), values }
    }

    pub fn empty(domain: &GridDomain) -> Self {
        Self { domain: domain.clone(), values: vec![false; domain.len()] }
    }

    pub fn full(domain: &GridDomain) -> Self {
        Self { domain: domain.clone(), values: vec![true; domain.len()] }
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn get(&self, idx: usize) -> bool {
        self.values[idx]
    }

    pub fn set(&mut self, idx: usize, value: bool) {
        self.values[idx] = value;
    }

    pub fn count(&self) -> usize {
        self.values.iter().filter(|&&v| v).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.values.iter().any(|&v| v)
    }

    pub fn is_full(&self) -> bool {
        self.values.iter().all(|&v| v)
    }

    /// Complement relative to the domain.
    pub fn complement(&self) -> Self {
        Self { domain: self.domain.clone(), values: self.values.iter().map(|&v| !v).collect() }
    }

    fn zip_with(&self, other: &BinaryField, f: impl Fn(bool, bool) -> bool) -> Result<Self> {
        self.domain.check_same(&other.domain)?;
        Ok(Self {
            domain: self.domain.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn intersection(&self, other: &BinaryField) -> Result<Self> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn union(&self, other: &BinaryField) -> Result<Self> {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn difference(&self, other: &BinaryField) -> Result<Self> {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn symmetric_difference(&self, other: &BinaryField) -> Result<Self> {
        self.zip_with(other, |a, b| a != b)
    }

    pub fn is_subset_of(&self, other: &BinaryField) -> bool {
        self.domain == other.domain && self.values.iter().zip(&other.values).all(|(&a, &b)| !a || b)
    }

    /// Lebesgue measure of the set, `h^d * count`.
    pub fn measure(&self) -> f64 {
        self.count() as f64 * self.domain.cell_volume()
    }

    pub fn to_scalar(&self) -> ScalarField {
        ScalarField {
            domain: self.domain.clone(),
            values: self.values.iter().map(|&v| if v { 1.0 } else { 0.0 }).collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = self.domain.header();
        s.push('\n');
        for &v in &self.values {
            s.push_str(if v { "1\n" } else { "0\n" });
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (domain, body) = split_text(text)?;
        let values = body
            .map(|t| match t {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(Error::Parse(format!("indicator value must be 0 or 1, got {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(domain, values)
    }

    pub fn write_text(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn read_text(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(e.to_string()))?;
        Self::from_text(&text)
    }
}

/// The class densities `(rho0, rho1)` on a shared domain.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityPair {
    rho0: ScalarField,
    rho1: ScalarField,
    floor: f64,
}

impl DensityPair {
    pub fn new(rho0: ScalarField, rho1: ScalarField) -> Result<Self> {
        rho0.domain.check_same(&rho1.domain)?;
        for (name, f) in [("rho0", &rho0), ("rho1", &rho1)] {
            if f.values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(invalid(format!("{name} must be finite and nonnegative")));
            }
        }
        let floor = rho0
            .values
            .iter()
            .zip(&rho1.values)
            .map(|(a, b)| a + b)
            .fold(f64::INFINITY, f64::min);
        Ok(Self { rho0, rho1, floor })
    }

    pub fn from_fns(
        domain: &GridDomain,
        rho0: impl Fn(Point) -> f64,
        rho1: impl Fn(Point) -> f64,
    ) -> Result<Self> {
        Self::new(ScalarField::from_fn(domain, rho0), ScalarField::from_fn(domain, rho1))
    }

    pub fn uniform(domain: &GridDomain, rho0: f64, rho1: f64) -> Result<Self> {
        Self::new(ScalarField::constant(domain, rho0), ScalarField::constant(domain, rho1))
    }

    pub fn rho0(&self) -> &ScalarField {
        &self.rho0
    }

    pub fn rho1(&self) -> &ScalarField {
        &self.rho1
    }

    pub fn domain(&self) -> &GridDomain {
        &self.rho0.domain
    }

    /// Minimum over cells of `rho0 + rho1`.
    pub fn floor(&self) -> f64 {
        self.floor
    }

    /// `∫ (rho0 + rho1)`.
    pub fn mass(&self) -> f64 {
        let mut s = ExactSum::new();
        for (&a, &b) in self.rho0.values.iter().zip(&self.rho1.values) {
            s.add(a);
            s.add(b);
        }
        s.value() * self.domain().cell_volume()
    }

    pub fn require_positive_floor(&self) -> Result<()> {
        if self.floor > 0.0 {
            Ok(())
        } else {
            Err(invalid("operation requires ess inf (rho0 + rho1) > 0"))
        }
    }

    /// The pair with the roles of the two classes exchanged.
    pub fn swapped(&self) -> Self {
        Self { rho0: self.rho1.clone(), rho1: self.rho0.clone(), floor: self.floor }
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.rho0.scaled(c), self.rho1.scaled(c))
    }

    /// `rho0 + rho1` as a field.
    pub fn total(&self) -> ScalarField {
        ScalarField {
            domain: self.domain().clone(),
            values: self.rho0.values.iter().zip(&self.rho1.values).map(|(a, b)| a + b).collect(),
        }
    }
}

/// Lower envelope of parabolas `f[p] + (q - p)^2`, sites with infinite `f`
/// ignored.
fn envelope(f: &[f64], out: &mut [f64], sites: &mut Vec<usize>, bounds: &mut Vec<f64>) {
    sites.clear();
    bounds.clear();
    for (q, &fq) in f.iter().enumerate() {
        if !fq.is_finite() {
            continue;
        }
        let vq = fq + (q * q) as f64;
        loop {
            match sites.last() {
                None => {
                    sites.push(q);
                    bounds.push(f64::NEG_INFINITY);
                    break;
                }
                Some(&p) => {
                    let vp = f[p] + (p * p) as f64;
                    let s = (vq - vp) / (2 * (q - p)) as f64;
                    if s <= *bounds.last().unwrap() {
                        sites.pop();
                        bounds.pop();
                    } else {
                        sites.push(q);
                        bounds.push(s);
                        break;
                    }
                }
            }
        }
    }
    if sites.is_empty() {
        out.fill(f64::INFINITY);
        return;
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while k + 1 < sites.len() && bounds[k + 1] < q as f64 {
            k += 1;
        }
        let d = q.abs_diff(sites[k]);
        *o = (d * d) as f64 + f[sites[k]];
    }
}

fn envelope_rows(data: &mut [f64], row_len: usize) {
    data.par_chunks_mut(row_len).for_each_init(
        || (Vec::new(), Vec::new(), vec![0.0; row_len]),
        |(sites, bounds, out), row| {
            envelope(row, out, sites, bounds);
            row.copy_from_slice(out);
        },
    );
}

/// Squared index distance from every cell to the nearest cell of `a`
/// (`+inf` everywhere when `a` is empty).
///
/// Exact: separable lower-envelope passes along each axis, linear time per
/// row. All intermediate values are integers below 2^53.
pub fn squared_cell_distances(a: &BinaryField) -> Vec<f64> {
    let [n0, n1] = a.domain.shape();
    let mut d: Vec<f64> = a.values.iter().map(|&v| if v { 0.0 } else { f64::INFINITY }).collect();
    if n1 > 1 {
        envelope_rows(&mut d, n1);
    }
    // second pass along axis 0 on the transposed buffer
    let mut t = vec![0.0; d.len()];
    for i0 in 0..n0 {
        for i1 in 0..n1 {
            t[i1 * n0 + i0] = d[i0 * n1 + i1];
        }
    }
    envelope_rows(&mut t, n0);
    for i0 in 0..n0 {
        for i1 in 0..n1 {
            d[i0 * n1 + i1] = t[i1 * n0 + i0];
        }
    }
    d
}

/// Euclidean distance from each cell center to the nearest center of a cell
/// in `a`; [`NO_SITE`] everywhere when `a` is empty.
pub fn distance_transform(a: &BinaryField) -> ScalarField {
    let h = a.domain.h;
    let values = squared_cell_distances(a).into_iter().map(|k| cell_distance(k, h)).collect();
    ScalarField { domain: a.domain.clone(), values }
}

/// Cells whose center lies within distance `< eps` of a center in `a`:
/// the grid version of `ess sup_{B(x,eps) ∩ Ω} χ_A`.
pub fn dilate(a: &BinaryField, eps: f64) -> Result<BinaryField> {
    check_eps(eps)?;
    let h = a.domain.h;
    let values = squared_cell_distances(a).into_iter().map(|k| within_ball(k, h, eps)).collect();
    Ok(BinaryField { domain: a.domain.clone(), values })
}

/// `ess inf_{B(x,eps) ∩ Ω} χ_A`, computed as the complement of the dilated
/// complement.
pub fn erode(a: &BinaryField, eps: f64) -> Result<BinaryField> {
    Ok(dilate(&a.complement(), eps)?.complement())
}

/// Midpoint quadrature `h^d Σ f w`, summed exactly and rounded once.
pub fn integrate(f: &ScalarField, w: &ScalarField) -> Result<f64> {
    f.domain.check_same(&w.domain)?;
    let mut s = ExactSum::new();
    for (&a, &b) in f.values.iter().zip(&w.values) {
        s.add_product(a, b);
    }
    Ok(s.value() * f.domain.cell_volume())
}

/// Unscaled exact sum of `w` over the cells of `mask`.
pub(crate) fn masked_sum(mask: &BinaryField, w: &ScalarField) -> ExactSum {
    mask.values
        .iter()
        .zip(&w.values)
        .filter_map(|(&m, &v)| m.then_some(v))
        .collect()
}

/// `dist(x, A) - dist(x, A^c)`: positive outside `A`, negative inside.
pub fn signed_distance(a: &BinaryField) -> Result<ScalarField> {
    if a.is_empty() || a.is_full() {
        return Err(Error::DegenerateSet("signed distance needs a set that is neither empty nor full".into()));
    }
    let outside = distance_transform(a);
    let inside = distance_transform(&a.complement());
    let values = outside.values.iter().zip(&inside.values).map(|(o, i)| o - i).collect();
    Ok(ScalarField { domain: a.domain.clone(), values })
}

/// Index offsets of all cells inside the open ball of radius `eps`.
pub fn ball_offsets(domain: &GridDomain, eps: f64) -> Vec<(isize, isize)> {
    let h = domain.h;
    let r = (eps / h).ceil() as isize + 1;
    let r1 = if domain.dim == 1 { 0 } else { r };
    let mut out = Vec::new();
    for di in -r..=r {
        for dj in -r1..=r1 {
            if within_ball((di * di + dj * dj) as f64, h, eps) {
                out.push((di, dj));
            }
        }
    }
    out
}

/// For each row offset `di` of the ball (from `-r` to `r`), the largest
/// column offset still inside the ball.
pub(crate) fn ball_half_widths(domain: &GridDomain, eps: f64) -> Vec<(isize, isize)> {
    let h = domain.h;
    let r = (eps / h).ceil() as isize + 1;
    let mut out = Vec::new();
    for di in -r..=r {
        if !within_ball((di * di) as f64, h, eps) {
            continue;
        }
        let mut w = 0isize;
        if domain.dim == 2 {
            while within_ball((di * di + (w + 1) * (w + 1)) as f64, h, eps) {
                w += 1;
            }
        }
        out.push((di, w));
    }
    out
}
