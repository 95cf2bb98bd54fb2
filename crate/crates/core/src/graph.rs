//! Random geometric graphs on labeled samples and the graph perimeter
//! `E_n`, with discrete-to-continuum experiments.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::geometry::{DensityPair, Point};
use crate::report::{SweepReport, SweepRow};
use crate::sum::ExactSum;

/// `n` samples of `rho0 + rho1` with class labels.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledCloud {
    pub points: Vec<Point>,
    pub labels: Vec<u8>,
    pub seed: u64,
    pub source: DensityPair,
}

impl LabeledCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.source.domain().dim()
    }

    /// Fraction of points labeled 1.
    pub fn class1_fraction(&self) -> f64 {
        self.labels.iter().filter(|&&l| l == 1).count() as f64 / self.len() as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,label\n");
        for (p, l) in self.points.iter().zip(&self.labels) {
            let _ = writeln!(out, "{},{},{}", p[0], p[1], l);
        }
        out
    }
}

/// Rejection sampling from `(rho0 + rho1) / mass` on the grid cells,
/// uniform within a cell; labels are Bernoulli(`rho1 / (rho0 + rho1)`).
pub fn sample_cloud(rho: &DensityPair, n: usize, seed: u64) -> Result<LabeledCloud> {
    sample_with(rho, n, seed, ChaCha8Rng::seed_from_u64(seed))
}

fn sample_with(rho: &DensityPair, n: usize, seed: u64, mut rng: ChaCha8Rng) -> Result<LabeledCloud> {
    if n < 2 {
        return Err(invalid(format!("need at least two points, got {n}")));
    }
    if !(rho.mass() > 0.0) {
        return Err(invalid("density has zero mass"));
    }
    let domain = rho.domain();
    let total = rho.total();
    let envelope = total.max();
    let (lo, hi) = (domain.lower(), domain.upper());
    let mut points = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    while points.len() < n {
        let mut p = [0.0; 2];
        for axis in 0..domain.dim() {
            p[axis] = rng.gen_range(lo[axis]..hi[axis]);
        }
        let cell = domain.cell_of(p).expect("proposal lies in the domain");
        let t = total.get(cell);
        if rng.gen::<f64>() * envelope >= t {
            continue;
        }
        let label = u8::from(rng.gen::<f64>() * t < rho.rho1().get(cell));
        points.push(p);
        labels.push(label);
    }
    Ok(LabeledCloud { points, labels, seed, source: rho.clone() })
}

/// Connectivity length scale: `(log n)^{3/4} / n^{1/2}` in 2D and
/// `(log n / n)^{1/d}` for `d >= 3`.
pub fn delta_n(n: f64, d: usize) -> Result<f64> {
    if !(n >= 2.0 && n.is_finite()) {
        return Err(invalid(format!("n must be at least 2, got {n}")));
    }
    match d {
        0 | 1 => Err(Error::UnsupportedDimension(d)),
        2 => Ok(n.ln().powf(0.75) / n.sqrt()),
        _ => Ok((n.ln() / n).powf(1.0 / d as f64)),
    }
}

/// Ball graph `|x_i - x_j| <= eps_n`, stored as points bucketed into a
/// uniform grid of bins of side `eps_n`. Neighbors are enumerated on demand.
#[derive(Clone, Debug)]
pub struct BallGraph {
    cloud: LabeledCloud,
    eps_n: f64,
    bins: [usize; 2],
    /// CSR layout: points of bin `b` are `order[starts[b]..starts[b + 1]]`.
    starts: Vec<usize>,
    order: Vec<usize>,
    bin_of: Vec<usize>,
}

pub fn build_graph(cloud: LabeledCloud, eps_n: f64) -> Result<BallGraph> {
    if !(eps_n.is_finite() && eps_n > 0.0) {
        return Err(invalid(format!("eps_n must be positive and finite, got {eps_n}")));
    }
    let domain = cloud.source.domain();
    let (lo, hi) = (domain.lower(), domain.upper());
    let mut bins = [1usize; 2];
    for axis in 0..domain.dim() {
        // bins at least eps_n wide so neighbors lie in adjacent bins
        bins[axis] = (((hi[axis] - lo[axis]) / eps_n).floor() as usize).clamp(1, 1 << 12);
    }
    let side = |axis: usize| (hi[axis] - lo[axis]) / bins[axis] as f64;
    let bin_of: Vec<usize> = cloud
        .points
        .iter()
        .map(|p| {
            let mut b = [0usize; 2];
            for axis in 0..domain.dim() {
                b[axis] = (((p[axis] - lo[axis]) / side(axis)) as usize).min(bins[axis] - 1);
            }
            b[0] * bins[1] + b[1]
        })
        .collect();
    let mut starts = vec![0usize; bins[0] * bins[1] + 1];
    for &b in &bin_of {
        starts[b + 1] += 1;
    }
    for b in 0..bins[0] * bins[1] {
        starts[b + 1] += starts[b];
    }
    let mut fill = starts.clone();
    let mut order = vec![0usize; cloud.len()];
    for (i, &b) in bin_of.iter().enumerate() {
        order[fill[b]] = i;
        fill[b] += 1;
    }
    Ok(BallGraph { cloud, eps_n, bins, starts, order, bin_of })
}

impl BallGraph {
    pub fn cloud(&self) -> &LabeledCloud {
        &self.cloud
    }

    pub fn eps_n(&self) -> f64 {
        self.eps_n
    }

    pub fn len(&self) -> usize {
        self.cloud.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cloud.is_empty()
    }

    /// Neighbors of point `i` in bin order.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let b = self.bin_of[i];
        let (b0, b1) = (b / self.bins[1], b % self.bins[1]);
        let p = self.cloud.points[i];
        let eps = self.eps_n;
        let r0 = b0.saturating_sub(1)..=(b0 + 1).min(self.bins[0] - 1);
        r0.flat_map(move |c0| {
            (b1.saturating_sub(1)..=(b1 + 1).min(self.bins[1] - 1)).map(move |c1| c0 * self.bins[1] + c1)
        })
        .flat_map(move |c| self.order[self.starts[c]..self.starts[c + 1]].iter().copied())
        .filter(move |&j| {
            let q = self.cloud.points[j];
            j != i && (q[0] - p[0]).hypot(q[1] - p[1]) <= eps
        })
    }

    /// Sorted neighbor lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.len())
            .into_par_iter()
            .map(|i| {
                let mut v: Vec<usize> = self.neighbors(i).collect();
                v.sort_unstable();
                v
            })
            .collect()
    }

    /// Number of connected components.
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.len()];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..self.len() {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            stack.push(s);
            while let Some(i) = stack.pop() {
                for j in self.neighbors(i) {
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        count
    }
}

/// Membership of cloud points in a discrete set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscreteSet {
    pub membership: Vec<bool>,
}

impl DiscreteSet {
    pub fn from_fn(cloud: &LabeledCloud, f: impl Fn(Point) -> bool) -> Self {
        Self { membership: cloud.points.iter().map(|&p| f(p)).collect() }
    }

    pub fn len(&self) -> usize {
        self.membership.len()
    }

    pub fn is_empty(&self) -> bool {
        self.membership.is_empty()
    }
}

/// Which labels are counted in which graph strip.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LabelStrips {
    /// Label-0 points outside `A` next to `A`, label-1 points inside `A` next
    /// to `A^c`; the graph analogue of the continuum strips.
    #[default]
    Consistent,
    /// Label-0 points inside `A` next to `A^c`, label-1 points outside `A`
    /// next to `A`.
    AsDisplayed,
}

/// `E_n(A)` with point weight `mass / n`, so that it is comparable with the
/// continuum perimeter of the unnormalized densities.
pub fn graph_perimeter(g: &BallGraph, a: &DiscreteSet, strips: LabelStrips) -> Result<f64> {
    if a.len() != g.len() {
        return Err(invalid(format!("set has {} entries for {} points", a.len(), g.len())));
    }
    let labels = &g.cloud.labels;
    let count = (0..g.len())
        .into_par_iter()
        .filter(|&i| {
            let member = a.membership[i];
            let counted_label = match (strips, member) {
                (LabelStrips::Consistent, false) | (LabelStrips::AsDisplayed, true) => 0,
                (LabelStrips::Consistent, true) | (LabelStrips::AsDisplayed, false) => 1,
            };
            labels[i] == counted_label && g.neighbors(i).any(|j| a.membership[j] != member)
        })
        .count();
    let weight = g.cloud.source.mass() / g.len() as f64;
    Ok(count as f64 * weight / g.eps_n)
}

/// A function sampled on a 1D weighted point cloud.
#[derive(Clone, Copy, Debug)]
pub struct Empirical1d<'a> {
    pub points: &'a [Point],
    pub values: &'a [f64],
    /// Point masses; `None` means uniform. Normalized internally.
    pub weights: Option<&'a [f64]>,
}

impl<'a> Empirical1d<'a> {
    pub fn uniform(points: &'a [Point], values: &'a [f64]) -> Self {
        Self { points, values, weights: None }
    }

    /// Points sorted by position with their values, and the cumulative
    /// normalized mass after each point (the last entry is exactly 1).
    fn sorted(&self) -> Result<(Vec<(f64, f64)>, Vec<f64>)> {
        if self.points.is_empty() || self.points.len() != self.values.len() {
            return Err(invalid("empirical function needs matching, nonempty points and values"));
        }
        if self.points.iter().any(|p| p[1] != 0.0) {
            return Err(Error::UnsupportedDimension(2));
        }
        let n = self.points.len();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&i, &j| {
            self.points[i][0].total_cmp(&self.points[j][0]).then(self.values[i].total_cmp(&self.values[j]))
        });
        let sorted = idx.iter().map(|&i| (self.points[i][0], self.values[i])).collect();
        let cumulative = match self.weights {
            None => (1..=n).map(|k| k as f64 / n as f64).collect(),
            Some(w) => {
                if w.len() != n || w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                    return Err(invalid("weights must be nonnegative and match the points"));
                }
                let total = w.iter().copied().collect::<ExactSum>().value();
                if !(total > 0.0) {
                    return Err(invalid("weights sum to zero"));
                }
                let mut acc = ExactSum::new();
                let mut c: Vec<f64> = idx
                    .iter()
                    .map(|&i| {
                        acc.add(w[i]);
                        acc.value() / total
                    })
                    .collect();
                c[n - 1] = 1.0;
                c
            }
        };
        Ok((sorted, cumulative))
    }
}

/// TL¹ distance `∫ |x - y| + |u(x) - v(y)| dπ` under the monotone (sorted)
/// coupling of the two weighted empirical measures. The coupling is optimal
/// for the transport part, so this equals the TL¹ distance whenever the
/// monotone coupling is optimal for the full cost and bounds it above
/// otherwise.
pub fn tl1_distance_1d(a: Empirical1d<'_>, b: Empirical1d<'_>) -> Result<f64> {
    let ((a, ca), (b, cb)) = (a.sorted()?, b.sorted()?);
    let (mut i, mut j, mut current) = (0, 0, 0.0);
    let mut cost = ExactSum::new();
    while i < a.len() && j < b.len() {
        let next = ca[i].min(cb[j]);
        cost.add((next - current) * ((a[i].0 - b[j].0).abs() + (a[i].1 - b[j].1).abs()));
        current = next;
        if ca[i] <= next {
            i += 1;
        }
        if cb[j] <= next {
            j += 1;
        }
    }
    Ok(cost.value())
}

/// How `eps_n` is chosen from `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EpsRule {
    /// `c * delta_n^{1/2}`.
    SqrtDelta { c: f64 },
    /// `c * delta_n`.
    DeltaMultiple { c: f64 },
    Fixed { eps: f64 },
}

impl Default for EpsRule {
    fn default() -> Self {
        EpsRule::SqrtDelta { c: 1.5 }
    }
}

impl EpsRule {
    pub fn eps_n(&self, n: usize, d: usize) -> Result<f64> {
        match *self {
            EpsRule::SqrtDelta { c } => Ok(c * delta_n(n as f64, d)?.sqrt()),
            EpsRule::DeltaMultiple { c } => Ok(c * delta_n(n as f64, d)?),
            EpsRule::Fixed { eps } => Ok(eps),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            EpsRule::SqrtDelta { c } => format!("eps_n = {c} * delta_n^(1/2)"),
            EpsRule::DeltaMultiple { c } => format!("eps_n = {c} * delta_n"),
            EpsRule::Fixed { eps } => format!("eps_n = {eps}"),
        }
    }
}

/// One graph energy evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GraphSample {
    pub n: usize,
    pub eps_n: f64,
    pub seed: u64,
    pub energy: f64,
    pub continuum_ref: f64,
}

impl GraphSample {
    pub const CSV_HEADER: &'static str = "n,eps_n,seed,E_n,continuum_ref,abs_err";

    pub fn abs_err(&self) -> f64 {
        (self.energy - self.continuum_ref).abs()
    }

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{},{},{}", self.n, self.eps_n, self.seed, self.energy, self.continuum_ref, self.abs_err())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphExperiment {
    pub samples: Vec<GraphSample>,
    /// One row per `n`: value is the median `E_n`; terms are `eps_n`, the
    /// median absolute error and the quartiles of `E_n`.
    pub report: SweepReport,
}

impl GraphExperiment {
    pub fn median_errors(&self) -> Vec<f64> {
        self.report.rows().iter().map(|r| r.terms[1]).collect()
    }

    pub fn samples_csv(&self) -> String {
        let mut out = String::from(GraphSample::CSV_HEADER);
        out.push('\n');
        for s in &self.samples {
            let _ = writeln!(out, "{}", s.csv_row());
        }
        out
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

/// For each `n` and seed, samples a cloud, builds the graph with
/// `eps_rule`, restricts the continuum set to the cloud with `set_generator`
/// and records `E_n` against `continuum_ref`.
pub fn graph_convergence_experiment(
    rho: &DensityPair,
    set_generator: &(dyn Fn(Point) -> bool + Sync),
    continuum_ref: f64,
    n_list: &[usize],
    seeds: &[u64],
    eps_rule: EpsRule,
    strips: LabelStrips,
) -> Result<GraphExperiment> {
    if seeds.is_empty() {
        return Err(invalid("need at least one seed"));
    }
    let d = rho.domain().dim();
    let jobs: Vec<(usize, u64)> = n_list.iter().flat_map(|&n| seeds.iter().map(move |&s| (n, s))).collect();
    let samples: Vec<GraphSample> = jobs
        .par_iter()
        .map(|&(n, seed)| {
            let eps_n = eps_rule.eps_n(n, d)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(n as u64);
            let cloud = sample_with(rho, n, seed, rng)?;
            let set = DiscreteSet::from_fn(&cloud, set_generator);
            let g = build_graph(cloud, eps_n)?;
            let energy = graph_perimeter(&g, &set, strips)?;
            Ok(GraphSample { n, eps_n, seed, energy, continuum_ref })
        })
        .collect::<Result<_>>()?;
    let mut report = SweepReport::new(
        "graph_convergence",
        "n",
        &["eps_n", "median_abs_err", "q1_E_n", "q3_E_n"],
        rho.domain().h(),
    );
    report.seeds = seeds.to_vec();
    report.note(eps_rule.describe());
    report.note(format!("label strips: {strips:?}"));
    for &n in n_list {
        let group: Vec<&GraphSample> = samples.iter().filter(|s| s.n == n).collect();
        let mut energies: Vec<f64> = group.iter().map(|s| s.energy).collect();
        energies.sort_by(f64::total_cmp);
        let errors: Vec<f64> = group.iter().map(|s| s.abs_err()).collect();
        report.push(SweepRow {
            parameter: n as f64,
            terms: vec![group[0].eps_n, median(&errors), quantile(&energies, 0.25), quantile(&energies, 0.75)],
            value: quantile(&energies, 0.5),
            reference: continuum_ref,
            warn: false,
        });
    }
    let errors: Vec<f64> = report.rows().iter().map(|r| r.terms[1]).collect();
    if errors.windows(2).any(|w| w[1] >= w[0]) {
        report.note("warning: median error is not decreasing in n");
    }
    Ok(GraphExperiment { samples, report })
}
