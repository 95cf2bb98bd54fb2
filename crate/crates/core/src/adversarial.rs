//! Bayes and adversarial risks of binary classifiers, the identity
//! `adversarial = bayes + eps * Per_eps`, and desk-scale minimizers of the
//! adversarial risk.

use crate::error::{check_eps, invalid, Error, Result};
use crate::geometry::{dilate, erode, masked_sum, within_ball, BinaryField, DensityPair, GridDomain};
use crate::limit::{default_trace_radius, trace_facet, Facet};
use crate::nonlocal::{per_eps, strip_sums, strips, EnergyBreakdown};
use crate::report::{SweepReport, SweepRow};
use crate::sum::ExactSum;

/// The joint law of inputs and labels: `rho0` and `rho1` are the class
/// densities.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationMeasure {
    rho: DensityPair,
    mass: f64,
}

impl ClassificationMeasure {
    pub fn new(rho: DensityPair) -> Self {
        let mass = rho.mass();
        Self { rho, mass }
    }

    pub fn rho(&self) -> &DensityPair {
        &self.rho
    }

    pub fn domain(&self) -> &GridDomain {
        self.rho.domain()
    }

    /// `∫ (rho0 + rho1)`.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn is_probability(&self) -> bool {
        (self.mass - 1.0).abs() <= 1e-12
    }

    /// Rescaled to total mass one.
    pub fn normalized(&self) -> Result<Self> {
        if self.mass <= 0.0 {
            return Err(invalid("cannot normalize a measure with zero mass"));
        }
        Ok(Self::new(self.rho.scaled(1.0 / self.mass)?))
    }
}

/// `Σ_A rho0 + Σ_{A^c} rho1` over cells, unscaled.
fn bayes_sum(a: &BinaryField, mu: &ClassificationMeasure) -> Result<ExactSum> {
    a.domain().check_same(mu.domain())?;
    let mut s = masked_sum(a, mu.rho.rho0());
    s.merge(&masked_sum(&a.complement(), mu.rho.rho1()));
    Ok(s)
}

fn adversarial_sum(a: &BinaryField, mu: &ClassificationMeasure, eps: f64) -> Result<ExactSum> {
    check_eps(eps)?;
    a.domain().check_same(mu.domain())?;
    let mut s = masked_sum(&dilate(a, eps)?, mu.rho.rho0());
    s.merge(&masked_sum(&erode(a, eps)?.complement(), mu.rho.rho1()));
    Ok(s)
}

/// `E|χ_A(x) - y| = ∫ χ_A rho0 + ∫ (1 - χ_A) rho1`.
pub fn bayes_risk(a: &BinaryField, mu: &ClassificationMeasure) -> Result<f64> {
    Ok(bayes_sum(a, mu)?.value() * a.domain().cell_volume())
}

/// `∫ χ_{dilate(A)} rho0 + ∫ (1 - χ_{erode(A)}) rho1`.
pub fn adversarial_risk(a: &BinaryField, mu: &ClassificationMeasure, eps: f64) -> Result<f64> {
    Ok(adversarial_sum(a, mu, eps)?.value() * a.domain().cell_volume())
}

/// Both sides of `adversarial_risk = bayes_risk + eps * Per_eps`.
#[derive(Clone, Debug, PartialEq)]
pub struct Equivalence {
    /// The adversarial risk, from the dilated and eroded sets.
    pub lhs: f64,
    /// Bayes cell sums plus strip cell sums, rounded once.
    pub rhs: f64,
    pub bayes: f64,
    pub per_eps: EnergyBreakdown,
}

impl Equivalence {
    pub fn holds(&self) -> bool {
        self.lhs.to_bits() == self.rhs.to_bits()
    }
}

pub fn equivalence_check(a: &BinaryField, mu: &ClassificationMeasure, eps: f64) -> Result<Equivalence> {
    check_eps(eps)?;
    let domain = a.domain();
    domain.check_same(mu.domain())?;
    let vol = domain.cell_volume();
    let fields = strips(a, eps)?;
    let lhs_sum = {
        let mut s = masked_sum(&fields.dilated, mu.rho.rho0());
        s.merge(&masked_sum(&fields.eroded.complement(), mu.rho.rho1()));
        s
    };
    let bayes = bayes_sum(a, mu)?;
    let strip = strip_sums(a, &mu.rho, &fields)?;
    let mut rhs_sum = bayes.clone();
    rhs_sum.merge(&strip.outer);
    rhs_sum.merge(&strip.inner);
    Ok(Equivalence {
        lhs: lhs_sum.value() * vol,
        rhs: rhs_sum.value() * vol,
        bayes: bayes.value() * vol,
        per_eps: EnergyBreakdown::from_sums(&strip.outer, &strip.inner, domain, eps),
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("alpha must be finite and nonnegative, got {alpha}")))
    }
}

/// `bayes_risk + alpha * Per_eps`, evaluated as one exact sum.
pub fn fixed_alpha_objective(a: &BinaryField, mu: &ClassificationMeasure, eps: f64, alpha: f64) -> Result<f64> {
    check_eps(eps)?;
    check_alpha(alpha)?;
    let fields = strips(a, eps)?;
    let strip = strip_sums(a, &mu.rho, &fields)?;
    let t = alpha / eps;
    let mut s = bayes_sum(a, mu)?;
    s.merge(&strip.outer.scaled(t));
    s.merge(&strip.inner.scaled(t));
    Ok(s.value() * a.domain().cell_volume())
}

/// `(alpha/eps) * adversarial_risk + (1 - alpha/eps) * bayes_risk`, evaluated
/// as one exact sum; equals [`fixed_alpha_objective`] bit for bit.
pub fn fixed_alpha_affine(a: &BinaryField, mu: &ClassificationMeasure, eps: f64, alpha: f64) -> Result<f64> {
    check_eps(eps)?;
    check_alpha(alpha)?;
    let t = alpha / eps;
    let bayes = bayes_sum(a, mu)?;
    let mut s = adversarial_sum(a, mu, eps)?.scaled(t);
    s.merge(&bayes);
    s.merge(&bayes.scaled(-t));
    Ok(s.value() * a.domain().cell_volume())
}

/// The pointwise Bayes classifier `{rho1 > rho0}`; tie cells go to class 0.
pub fn bayes_set(mu: &ClassificationMeasure) -> BinaryField {
    let (r0, r1) = (mu.rho.rho0(), mu.rho.rho1());
    let values = (0..mu.domain().len()).map(|i| r1.get(i) > r0.get(i)).collect();
    BinaryField::new(mu.domain().clone(), values).expect("shape matches domain")
}

/// `J_eps(A) = (bayes_risk(A) - bayes_opt) / eps + Per_eps(A)`.
pub fn rescaled_j(a: &BinaryField, mu: &ClassificationMeasure, eps: f64, bayes_opt: f64) -> Result<f64> {
    check_eps(eps)?;
    if !bayes_opt.is_finite() {
        return Err(invalid("bayes_opt must be finite"));
    }
    Ok((bayes_risk(a, mu)? - bayes_opt) / eps + per_eps(a, &mu.rho, eps)?.total)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Method {
    /// Global search over unions of at most `max_intervals` cell-aligned
    /// intervals (1D only).
    Exhaustive1d { max_intervals: usize },
    /// First-improvement local search from the Bayes set (2D only).
    LocalSearch2d { max_iterations: usize },
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::Exhaustive1d { .. } => "exhaustive1d",
            Method::LocalSearch2d { .. } => "localsearch2d",
        }
    }
}

impl Default for Method {
    fn default() -> Self {
        Method::Exhaustive1d { max_intervals: 2 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingResult {
    pub minimizer: BinaryField,
    /// `adversarial_risk(minimizer)`.
    pub objective: f64,
    pub eps: f64,
    /// Accepted moves for local search, DP stages for the exhaustive search.
    pub iterations: usize,
    pub method: &'static str,
    pub converged: bool,
}

/// Largest index distance `k` with cells `k` apart inside an `eps`-ball.
fn ball_reach(h: f64, eps: f64) -> usize {
    let mut k = 0usize;
    while within_ball(((k + 1) * (k + 1)) as f64, h, eps) {
        k += 1;
    }
    k
}

fn prefix(values: &[f64]) -> Vec<f64> {
    let mut s = ExactSum::new();
    let mut out = Vec::with_capacity(values.len() + 1);
    out.push(0.0);
    for &v in values {
        s.add(v);
        out.push(s.value());
    }
    out
}

fn range_sum(p: &[f64], (a, b): (usize, usize)) -> f64 {
    if a < b {
        p[b] - p[a]
    } else {
        0.0
    }
}

/// Sum over the union of `l = [x, ..)` and `r = [.., y)` with `l` starting
/// at or before `r` and ending at or before it.
fn union_sum(p: &[f64], l: Option<(usize, usize)>, r: Option<(usize, usize)>) -> f64 {
    match (l, r) {
        (Some(l), Some(r)) if l.1 >= r.0 => range_sum(p, (l.0, r.1)),
        (l, r) => l.map_or(0.0, |l| range_sum(p, l)) + r.map_or(0.0, |r| range_sum(p, r)),
    }
}

/// Minimizes `gap(0, a1) + run(a1, b1) + gap(b1, a2) + ... + gap(bm, n)` over
/// `m <= k_max` runs of cells `[a, b)` separated by nonempty gaps. Returns
/// the runs of the best configuration (empty for the empty set).
fn interval_dp(
    n: usize,
    k_max: usize,
    run: impl Fn(usize, usize) -> f64,
    gap: impl Fn(usize, usize) -> f64,
) -> Vec<(usize, usize)> {
    let mut best_cost = gap(0, n);
    let mut best: Option<(usize, usize)> = None;
    let mut stage_a: Vec<Vec<usize>> = Vec::new();
    let mut stage_b: Vec<Vec<usize>> = Vec::new();
    let mut f = vec![f64::INFINITY; n + 1];
    for k in 1..=k_max {
        let mut fa = vec![0usize; n + 1];
        let mut gb = vec![0usize; n + 1];
        let mut next = vec![f64::INFINITY; n + 1];
        if k == 1 {
            for b in 1..=n {
                for a in 0..b {
                    let c = gap(0, a) + run(a, b);
                    if c < next[b] {
                        next[b] = c;
                        fa[b] = a;
                    }
                }
            }
        } else {
            let mut g = vec![f64::INFINITY; n + 1];
            for a in 2..n {
                for b in 1..a {
                    let c = f[b] + gap(b, a);
                    if c < g[a] {
                        g[a] = c;
                        gb[a] = b;
                    }
                }
            }
            for b2 in 3..=n {
                for a in 2..b2 {
                    let c = g[a] + run(a, b2);
                    if c < next[b2] {
                        next[b2] = c;
                        fa[b2] = a;
                    }
                }
            }
        }
        for b in 1..=n {
            let c = next[b] + gap(b, n);
            if c < best_cost {
                best_cost = c;
                best = Some((k, b));
            }
        }
        f = next;
        stage_a.push(fa);
        stage_b.push(gb);
    }
    let mut runs = Vec::new();
    if let Some((mut k, mut b)) = best {
        loop {
            let a = stage_a[k - 1][b];
            runs.push((a, b));
            if k == 1 {
                break;
            }
            b = stage_b[k - 1][a];
            k -= 1;
        }
    }
    runs.reverse();
    runs
}

fn runs_to_field(domain: &GridDomain, runs: &[(usize, usize)]) -> BinaryField {
    let mut a = BinaryField::empty(domain);
    for &(lo, hi) in runs {
        for i in lo..hi {
            a.set(i, true);
        }
    }
    a
}

fn exhaustive_1d(mu: &ClassificationMeasure, eps: f64, k_max: usize) -> Result<BinaryField> {
    let domain = mu.domain();
    if domain.dim() != 1 {
        return Err(Error::UnsupportedDimension(domain.dim()));
    }
    if k_max == 0 {
        return Err(invalid("max_intervals must be at least 1"));
    }
    let n = domain.len();
    let rc = ball_reach(domain.h(), eps);
    let p0 = prefix(mu.rho.rho0().values());
    let p1 = prefix(mu.rho.rho1().values());
    // a run pays rho0 everywhere and rho1 within reach of a non-member cell
    let run = |a: usize, b: usize| {
        let l = (a > 0).then(|| (a, b.min(a + rc)));
        let r = (b < n).then(|| (a.max(b.saturating_sub(rc)), b));
        range_sum(&p0, (a, b)) + union_sum(&p1, l, r)
    };
    // a gap pays rho1 everywhere and rho0 within reach of a member cell
    let gap = |b: usize, a: usize| {
        if b >= a {
            return 0.0;
        }
        let l = (b > 0).then(|| (b, a.min(b + rc)));
        let r = (a < n).then(|| (b.max(a.saturating_sub(rc)), a));
        range_sum(&p1, (b, a)) + union_sum(&p0, l, r)
    };
    Ok(runs_to_field(domain, &interval_dp(n, k_max, run, gap)))
}

fn four_neighbors(domain: &GridDomain, idx: usize) -> impl Iterator<Item = usize> + '_ {
    let [n0, n1] = domain.shape();
    let (i0, i1) = domain.coords(idx);
    [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)].into_iter().filter_map(move |(a, b)| {
        let (j0, j1) = (i0 as isize + a, i1 as isize + b);
        (j0 >= 0 && j1 >= 0 && j0 < n0 as isize && j1 < n1 as isize).then(|| domain.index(j0 as usize, j1 as usize))
    })
}

fn interface_cells(a: &BinaryField) -> Vec<usize> {
    let d = a.domain();
    (0..d.len()).filter(|&i| four_neighbors(d, i).any(|j| a.get(j) != a.get(i))).collect()
}

fn local_search_2d(mu: &ClassificationMeasure, eps: f64, max_iterations: usize) -> Result<(BinaryField, usize, bool)> {
    let domain = mu.domain();
    if domain.dim() != 2 {
        return Err(Error::UnsupportedDimension(domain.dim()));
    }
    let mut current = bayes_set(mu);
    let mut value = adversarial_risk(&current, mu, eps)?;
    let mut iterations = 0;
    'search: loop {
        if iterations >= max_iterations {
            return Ok((current, iterations, false));
        }
        let boundary = interface_cells(&current);
        let grow = {
            let mut g = current.clone();
            boundary.iter().filter(|&&i| !current.get(i)).for_each(|&i| g.set(i, true));
            g
        };
        let shrink = {
            let mut s = current.clone();
            boundary.iter().filter(|&&i| current.get(i)).for_each(|&i| s.set(i, false));
            s
        };
        for candidate in [grow, shrink] {
            let v = adversarial_risk(&candidate, mu, eps)?;
            if v < value {
                (current, value) = (candidate, v);
                iterations += 1;
                continue 'search;
            }
        }
        for &i in &boundary {
            let mut candidate = current.clone();
            candidate.set(i, !current.get(i));
            let v = adversarial_risk(&candidate, mu, eps)?;
            if v < value {
                (current, value) = (candidate, v);
                iterations += 1;
                continue 'search;
            }
        }
        return Ok((current, iterations, true));
    }
}

/// Minimizes the adversarial risk over the candidate class of `method`.
pub fn minimize_adversarial(mu: &ClassificationMeasure, eps: f64, method: &Method) -> Result<TrainingResult> {
    check_eps(eps)?;
    let (minimizer, iterations, converged) = match *method {
        Method::Exhaustive1d { max_intervals } => (exhaustive_1d(mu, eps, max_intervals)?, max_intervals, true),
        Method::LocalSearch2d { max_iterations } => local_search_2d(mu, eps, max_iterations)?,
    };
    if !converged {
        log::warn!("local search stopped at the iteration cap of {iterations}");
    }
    let objective = adversarial_risk(&minimizer, mu, eps)?;
    Ok(TrainingResult { minimizer, objective, eps, iterations, method: method.tag(), converged })
}

/// Weight of the limit perimeter in the lexicographic Bayes/perimeter
/// objective used to select a perimeter-minimal Bayes classifier.
const PERIMETER_WEIGHT: f64 = 1e-9;

/// A perimeter-minimal Bayes classifier among unions of at most
/// `max_intervals` intervals (1D): minimizes
/// `bayes_risk + PERIMETER_WEIGHT * Per(A; rho)`. Interfaces too close to
/// the domain boundary for trace estimation are excluded.
pub fn perimeter_minimal_bayes_set(mu: &ClassificationMeasure, max_intervals: usize) -> Result<BinaryField> {
    let domain = mu.domain();
    if domain.dim() != 1 {
        return Err(Error::UnsupportedDimension(domain.dim()));
    }
    if max_intervals == 0 {
        return Err(invalid("max_intervals must be at least 1"));
    }
    let n = domain.len();
    let h = domain.h();
    let r = default_trace_radius(domain);
    let face_beta = |j: usize, nu: f64| {
        let facet = Facet { midpoint: [domain.lower()[0] + j as f64 * h, 0.0], normal: [nu, 0.0], measure: 1.0 };
        match trace_facet(&facet, &mu.rho, r) {
            Ok(t) => Ok(t.beta),
            Err(Error::BoundaryProximity { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };
    let starts: Vec<f64> = (0..=n).map(|j| face_beta(j, 1.0)).collect::<Result<_>>()?;
    let ends: Vec<f64> = (0..=n).map(|j| face_beta(j, -1.0)).collect::<Result<_>>()?;
    let p0 = prefix(mu.rho.rho0().values());
    let p1 = prefix(mu.rho.rho1().values());
    let run = |a: usize, b: usize| {
        let mut c = h * range_sum(&p0, (a, b));
        if a > 0 {
            c += PERIMETER_WEIGHT * starts[a];
        }
        if b < n {
            c += PERIMETER_WEIGHT * ends[b];
        }
        c
    };
    let gap = |b: usize, a: usize| h * range_sum(&p1, (b, a));
    Ok(runs_to_field(domain, &interval_dp(n, max_intervals, run, gap)))
}

/// For each `eps`, the exhaustive 1D minimizer is compared with a
/// perimeter-minimal Bayes classifier. Value column: `L1_gap`; terms:
/// `per_eps_of_minimizer` and the objective.
pub fn convergence_experiment(mu: &ClassificationMeasure, eps_list: &[f64], max_intervals: usize) -> Result<SweepReport> {
    let reference = perimeter_minimal_bayes_set(mu, max_intervals)?;
    let mut report =
        SweepReport::new("convergence", "eps", &["per_eps_of_minimizer", "objective"], mu.domain().h());
    report.note(format!("candidate class: unions of at most {max_intervals} intervals"));
    for &eps in eps_list {
        let result = minimize_adversarial(mu, eps, &Method::Exhaustive1d { max_intervals })?;
        let gap = result.minimizer.symmetric_difference(&reference)?.measure();
        let per = per_eps(&result.minimizer, &mu.rho, eps)?;
        report.push(SweepRow {
            parameter: eps,
            terms: vec![per.total, result.objective],
            value: gap,
            reference: 0.0,
            warn: per.under_resolved,
        });
    }
    Ok(report)
}
