//! The nonlocal perimeter `Per_eps(A; rho)`, its localized variants, the
//! nonlocal total variation and the coarea identity linking them.
//!
//! The production path uses the strip representation: the outer term is the
//! `rho0`-mass of `dilate(A) \ A`, the inner term the `rho1`-mass of
//! `A \ erode(A)`, both divided by `eps`. [`per_eps_supform`] evaluates the
//! sup/inf definition literally and must agree bit for bit.

use rayon::prelude::*;

use crate::error::{check_eps, invalid, Error, Result};
use crate::geometry::{
    ball_half_widths, ball_offsets, dilate, erode, masked_sum, within_ball, BinaryField, DensityPair,
    GridDomain, ScalarField,
};
use crate::sum::ExactSum;

/// Outer (`rho0`) and inner (`rho1`) parts of a nonlocal energy.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyBreakdown {
    pub outer: f64,
    pub inner: f64,
    pub total: f64,
    pub eps: f64,
    pub h: f64,
    /// Set when `eps < 2h`: strips thinner than two cells are under-resolved.
    pub under_resolved: bool,
}

impl EnergyBreakdown {
    pub const CSV_HEADER: &'static str = "eps,outer,inner,total,h,warn_flag";

    pub(crate) fn from_sums(outer: &ExactSum, inner: &ExactSum, domain: &GridDomain, eps: f64) -> Self {
        let vol = domain.cell_volume();
        let outer = outer.value() * vol / eps;
        let inner = inner.value() * vol / eps;
        let h = domain.h();
        Self { outer, inner, total: outer + inner, eps, h, under_resolved: eps < 2.0 * h }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.eps,
            self.outer,
            self.inner,
            self.total,
            self.h,
            u8::from(self.under_resolved)
        )
    }
}

/// Unscaled strip sums `Σ_{outer strip} rho0` and `Σ_{inner strip} rho1`.
#[derive(Clone, Debug)]
pub(crate) struct StripSums {
    pub outer: ExactSum,
    pub inner: ExactSum,
}

/// The morphological fields behind one perimeter evaluation.
#[derive(Clone, Debug)]
pub(crate) struct Strips {
    pub dilated: BinaryField,
    pub eroded: BinaryField,
}

pub(crate) fn strips(a: &BinaryField, eps: f64) -> Result<Strips> {
    Ok(Strips { dilated: dilate(a, eps)?, eroded: erode(a, eps)? })
}

pub(crate) fn strip_sums(a: &BinaryField, rho: &DensityPair, strips: &Strips) -> Result<StripSums> {
    let outer_strip = strips.dilated.difference(a)?;
    let inner_strip = a.difference(&strips.eroded)?;
    Ok(StripSums {
        outer: masked_sum(&outer_strip, rho.rho0()),
        inner: masked_sum(&inner_strip, rho.rho1()),
    })
}

fn check_inputs(a: &BinaryField, rho: &DensityPair, eps: f64) -> Result<()> {
    check_eps(eps)?;
    a.domain().check_same(rho.domain())?;
    let h = a.domain().h();
    if eps < 2.0 * h {
        log::warn!("eps = {eps} is below 2h = {}; strips are under-resolved", 2.0 * h);
    }
    Ok(())
}

/// `Per_eps(A; rho)` through the strip representation.
pub fn per_eps(a: &BinaryField, rho: &DensityPair, eps: f64) -> Result<EnergyBreakdown> {
    check_inputs(a, rho, eps)?;
    let s = strip_sums(a, rho, &strips(a, eps)?)?;
    Ok(EnergyBreakdown::from_sums(&s.outer, &s.inner, a.domain(), eps))
}

/// `Per_eps(A; rho)` evaluated literally: ball sup and inf of `χ_A` by a
/// per-cell neighborhood scan.
pub fn per_eps_supform(a: &BinaryField, rho: &DensityPair, eps: f64) -> Result<EnergyBreakdown> {
    check_inputs(a, rho, eps)?;
    let domain = a.domain();
    let [n0, n1] = domain.shape();
    let offsets = ball_offsets(domain, eps);
    let extremes: Vec<(bool, bool)> = (0..domain.len())
        .into_par_iter()
        .map(|idx| {
            let (i0, i1) = domain.coords(idx);
            let mut sup = false;
            let mut inf = true;
            for &(di, dj) in &offsets {
                let (j0, j1) = (i0 as isize + di, i1 as isize + dj);
                if j0 < 0 || j1 < 0 || j0 >= n0 as isize || j1 >= n1 as isize {
                    continue;
                }
                let v = a.get(domain.index(j0 as usize, j1 as usize));
                sup |= v;
                inf &= v;
            }
            (sup, inf)
        })
        .collect();
    let mut outer = ExactSum::new();
    let mut inner = ExactSum::new();
    for (idx, &(sup, inf)) in extremes.iter().enumerate() {
        let chi = f64::from(u8::from(a.get(idx)));
        outer.add_product(f64::from(u8::from(sup)) - chi, rho.rho0().get(idx));
        inner.add_product(chi - f64::from(u8::from(inf)), rho.rho1().get(idx));
    }
    Ok(EnergyBreakdown::from_sums(&outer, &inner, domain, eps))
}

/// `Per_eps^0(A; rho, Ω') + Per_eps^1(A; rho, Ω')` with `Ω'` the cells of
/// `sub`: strips are taken inside `Ω'` and distances are measured to
/// `A ∩ Ω'` and `A^c ∩ Ω'` respectively.
pub fn per_eps_localized(
    a: &BinaryField,
    rho: &DensityPair,
    eps: f64,
    sub: &BinaryField,
) -> Result<EnergyBreakdown> {
    check_inputs(a, rho, eps)?;
    a.domain().check_same(sub.domain())?;
    if sub.is_empty() {
        return Err(Error::DegenerateSet("localizing subdomain is empty".into()));
    }
    let inside = a.intersection(sub)?;
    let outside = a.complement().intersection(sub)?;
    let outer_strip = dilate(&inside, eps)?.intersection(&outside)?;
    let inner_strip = dilate(&outside, eps)?.intersection(&inside)?;
    let outer = masked_sum(&outer_strip, rho.rho0());
    let inner = masked_sum(&inner_strip, rho.rho1());
    Ok(EnergyBreakdown::from_sums(&outer, &inner, a.domain(), eps))
}

/// Running maximum over windows `[j - w, j + w]` clipped to the slice
/// (van Herk / Gil-Werman, linear in the length).
fn window_max(values: &[f64], w: usize, out: &mut [f64]) {
    let n = values.len();
    if w == 0 {
        out.copy_from_slice(values);
        return;
    }
    let k = 2 * w + 1;
    let padded_len = n + 2 * w;
    let at = |i: usize| if i < w || i >= w + n { f64::NEG_INFINITY } else { values[i - w] };
    let mut prefix = vec![f64::NEG_INFINITY; padded_len];
    let mut suffix = vec![f64::NEG_INFINITY; padded_len];
    for i in 0..padded_len {
        prefix[i] = if i % k == 0 { at(i) } else { prefix[i - 1].max(at(i)) };
    }
    for i in (0..padded_len).rev() {
        suffix[i] = if i % k == k - 1 || i == padded_len - 1 { at(i) } else { suffix[i + 1].max(at(i)) };
    }
    for (j, o) in out.iter_mut().enumerate() {
        // padded window [j, j + 2w]
        *o = suffix[j].max(prefix[j + 2 * w]);
    }
}

/// `max_{B(x, eps) ∩ Ω} u` on every cell.
///
/// The ball is decomposed into horizontal segments, one per row offset, each
/// handled by a running window maximum, so the cost is `O(N r)` rather than
/// `O(N r^2)`. Covers exactly the cells of [`ball_offsets`].
pub fn ball_sup(u: &ScalarField, eps: f64) -> Result<ScalarField> {
    check_eps(eps)?;
    let domain = u.domain();
    let [n0, n1] = domain.shape();
    let values = u.values();
    if domain.dim() == 1 {
        let h = domain.h();
        let mut r = 0usize;
        while within_ball(((r + 1) * (r + 1)) as f64, h, eps) {
            r += 1;
        }
        let mut out = vec![0.0; n0];
        window_max(values, r, &mut out);
        return ScalarField::new(domain.clone(), out);
    }
    let widths = ball_half_widths(domain, eps);
    let mut distinct: Vec<usize> = widths.iter().map(|&(_, w)| w as usize).collect();
    distinct.sort_unstable();
    distinct.dedup();
    // row-wise window maxima for each distinct half width
    let per_width: Vec<Vec<f64>> = distinct
        .par_iter()
        .map(|&w| {
            let mut out = vec![0.0; values.len()];
            for (row, o) in values.chunks(n1).zip(out.chunks_mut(n1)) {
                window_max(row, w, o);
            }
            out
        })
        .collect();
    let mut out = vec![f64::NEG_INFINITY; values.len()];
    out.par_chunks_mut(n1).enumerate().for_each(|(i0, orow)| {
        for &(di, w) in &widths {
            let src = i0 as isize + di;
            if src < 0 || src >= n0 as isize {
                continue;
            }
            let table = &per_width[distinct.binary_search(&(w as usize)).unwrap()];
            let srow = &table[src as usize * n1..(src as usize + 1) * n1];
            for (o, &s) in orow.iter_mut().zip(srow) {
                *o = o.max(s);
            }
        }
    });
    ScalarField::new(domain.clone(), out)
}

/// `min_{B(x, eps) ∩ Ω} u` on every cell.
pub fn ball_inf(u: &ScalarField, eps: f64) -> Result<ScalarField> {
    Ok(ball_sup(&u.map(|v| -v), eps)?.map(|v| -v))
}

/// `TV_eps(u; rho)` split into its `rho0` and `rho1` parts.
pub fn tv_eps_breakdown(u: &ScalarField, rho: &DensityPair, eps: f64) -> Result<EnergyBreakdown> {
    check_eps(eps)?;
    u.domain().check_same(rho.domain())?;
    let sup = ball_sup(u, eps)?;
    let inf = ball_inf(u, eps)?;
    let mut outer = ExactSum::new();
    let mut inner = ExactSum::new();
    for idx in 0..u.domain().len() {
        let v = u.get(idx);
        outer.add_product(sup.get(idx) - v, rho.rho0().get(idx));
        inner.add_product(v - inf.get(idx), rho.rho1().get(idx));
    }
    Ok(EnergyBreakdown::from_sums(&outer, &inner, u.domain(), eps))
}

/// The nonlocal total variation `TV_eps(u; rho)`.
pub fn tv_eps(u: &ScalarField, rho: &DensityPair, eps: f64) -> Result<f64> {
    Ok(tv_eps_breakdown(u, rho, eps)?.total)
}

/// Both sides of the coarea identity `TV_eps(u) = ∫ Per_eps({u > t}) dt`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoareaCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub thresholds: usize,
}

impl CoareaCheck {
    pub fn gap(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

/// Compares `tv_eps(u)` with the midpoint rule over `thresholds` uniform
/// levels in `[min u, max u]`, level sets taken as `{u > t}`.
pub fn coarea_check(u: &ScalarField, rho: &DensityPair, eps: f64, thresholds: usize) -> Result<CoareaCheck> {
    if thresholds < 16 {
        return Err(invalid(format!("need at least 16 thresholds, got {thresholds}")));
    }
    let lhs = tv_eps(u, rho, eps)?;
    let (lo, hi) = (u.min(), u.max());
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(invalid("u must be bounded"));
    }
    let range = hi - lo;
    let step = range / thresholds as f64;
    let levels: Vec<f64> = (0..thresholds)
        .into_par_iter()
        .map(|k| {
            let t = lo + (k as f64 + 0.5) * step;
            per_eps(&u.superlevel(t), rho, eps).map(|e| e.total)
        })
        .collect::<Result<_>>()?;
    let sum: ExactSum = levels.into_iter().collect();
    let rhs = if range > 0.0 { sum.value() * range / thresholds as f64 } else { 0.0 };
    Ok(CoareaCheck { lhs, rhs, thresholds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::tests::random_set;
    use crate::geometry::GridDomain;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn interval() -> GridDomain {
        GridDomain::interval(-1.0, 1.0, 1024).unwrap()
    }

    fn indicator(x: f64, lo: f64, hi: f64) -> f64 {
        if x > lo && x < hi {
            1.0
        } else {
            0.0
        }
    }

    fn step_case1(d: &GridDomain) -> DensityPair {
        DensityPair::from_fns(d, |p| indicator(p[0], 0.0, 1.0), |p| indicator(p[0], -1.0, 0.0)).unwrap()
    }

    fn random_densities(d: &GridDomain, seed: u64) -> DensityPair {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c, e) = (rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>());
        let (sx, sy) = (rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        DensityPair::from_fns(d, |p| if p[0] > sx { a } else { b }, |p| if p[1] > sy { c } else { e })
            .unwrap()
    }

    #[test]
    fn step_values() {
        let d = interval();
        let tol = 2.0 * d.h() / 0.1;
        let rho = step_case1(&d);
        let a = BinaryField::from_fn(&d, |p| p[0] < 0.0);
        let e = per_eps(&a, &rho, 0.1).unwrap();
        assert!((e.total - 2.0).abs() < tol && (e.outer - 1.0).abs() < tol && (e.inner - 1.0).abs() < tol);
        let shifted = BinaryField::from_fn(&d, |p| p[0] < 0.2);
        assert!((per_eps(&shifted, &rho, 0.1).unwrap().total - 1.0).abs() < tol);
        let e = per_eps(&a, &rho.swapped(), 0.1).unwrap();
        assert_eq!(e.total, 0.0);
        assert_eq!(per_eps(&BinaryField::empty(&d), &rho, 0.1).unwrap().total, 0.0);
        assert_eq!(per_eps(&BinaryField::full(&d), &rho, 0.1).unwrap().total, 0.0);
        assert!(per_eps(&a, &rho, 0.0).is_err());
        let other = GridDomain::interval(-1.0, 1.0, 64).unwrap();
        assert!(per_eps(&BinaryField::empty(&other), &rho, 0.1).is_err());
        assert!(per_eps(&a, &rho, 0.001).unwrap().under_resolved);
    }

    #[test]
    fn supform_matches_strip_form() {
        let d = interval();
        let rho = step_case1(&d);
        for a in [
            BinaryField::from_fn(&d, |p| p[0] < 0.0),
            BinaryField::from_fn(&d, |p| p[0] < 0.2),
            BinaryField::full(&d),
        ] {
            for r in [rho.clone(), rho.swapped()] {
                assert_eq!(per_eps(&a, &r, 0.1).unwrap(), per_eps_supform(&a, &r, 0.1).unwrap());
            }
        }
        let d = GridDomain::square(-1.0, 1.0, 64).unwrap();
        for seed in 0..20 {
            let a = random_set(&d, seed);
            let rho = random_densities(&d, seed);
            let eps = 0.05 + 0.01 * seed as f64;
            assert_eq!(per_eps(&a, &rho, eps).unwrap(), per_eps_supform(&a, &rho, eps).unwrap());
        }
    }

    #[test]
    fn complement_symmetry_and_scaling() {
        let d = GridDomain::square(-1.0, 1.0, 64).unwrap();
        for seed in 0..10 {
            let a = random_set(&d, seed);
            let rho = random_densities(&d, seed + 7);
            let p = per_eps(&a, &rho, 0.1).unwrap();
            let q = per_eps(&a.complement(), &rho.swapped(), 0.1).unwrap();
            assert_eq!(p.total, q.total);
            assert_eq!(p.outer, q.inner);
            for c in [0.25, 2.0, 8.0] {
                assert_eq!(per_eps(&a, &rho.scaled(c).unwrap(), 0.1).unwrap().total, c * p.total);
            }
            let c = 0.3;
            let scaled = per_eps(&a, &rho.scaled(c).unwrap(), 0.1).unwrap().total;
            assert!((scaled - c * p.total).abs() <= 1e-12 * p.total.max(1.0));
        }
    }

    #[test]
    fn localized_perimeter() {
        let d = interval();
        let rho = step_case1(&d);
        let a = BinaryField::from_fn(&d, |p| p[0] < 0.0);
        let full = BinaryField::full(&d);
        assert_eq!(per_eps_localized(&a, &rho, 0.1, &full).unwrap(), per_eps(&a, &rho, 0.1).unwrap());
        let right = BinaryField::from_fn(&d, |p| p[0] > 0.0);
        let e = per_eps_localized(&a, &rho, 0.1, &right).unwrap();
        assert_eq!(e.inner, 0.0);
        assert!(matches!(
            per_eps_localized(&a, &rho, 0.1, &BinaryField::empty(&d)),
            Err(Error::DegenerateSet(_))
        ));

        let d = GridDomain::square(-1.0, 1.0, 48).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..20 {
            let a = random_set(&d, seed);
            let rho = random_densities(&d, seed);
            let (x0, y0) = (rng.gen_range(-1.0..0.0), rng.gen_range(-1.0..0.0));
            let (x1, y1) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
            let s = rng.gen_range(0.0..0.4);
            let big = BinaryField::from_fn(&d, |p| p[0] > x0 && p[0] < x1 && p[1] > y0 && p[1] < y1);
            let small = BinaryField::from_fn(&d, |p| {
                p[0] > x0 + s && p[0] < x1 - s && p[1] > y0 + s && p[1] < y1 - s
            });
            if small.is_empty() {
                continue;
            }
            let eb = per_eps_localized(&a, &rho, 0.1, &big).unwrap();
            let es = per_eps_localized(&a, &rho, 0.1, &small).unwrap();
            assert!(es.outer <= eb.outer && es.inner <= eb.inner);
        }
    }

    #[test]
    fn window_max_matches_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1usize, 2, 5, 17, 64] {
            let v: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
            for w in 0..8 {
                let mut out = vec![0.0; n];
                window_max(&v, w, &mut out);
                for j in 0..n {
                    let lo = j.saturating_sub(w);
                    let hi = (j + w).min(n - 1);
                    let m = v[lo..=hi].iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    assert_eq!(out[j], m);
                }
            }
        }
    }

    #[test]
    fn ball_sup_matches_scan() {
        let d = GridDomain::square(-1.0, 1.0, 40).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = ScalarField::from_fn(&d, |_| 0.0).map(|_| 0.0);
        let u = ScalarField::new(d.clone(), u.values().iter().map(|_| rng.gen()).collect()).unwrap();
        let eps = 0.17;
        let sup = ball_sup(&u, eps).unwrap();
        let offsets = ball_offsets(&d, eps);
        let [n0, n1] = d.shape();
        for idx in 0..d.len() {
            let (i0, i1) = d.coords(idx);
            let m = offsets
                .iter()
                .filter_map(|&(a, b)| {
                    let (j0, j1) = (i0 as isize + a, i1 as isize + b);
                    (j0 >= 0 && j1 >= 0 && j0 < n0 as isize && j1 < n1 as isize)
                        .then(|| u.get(d.index(j0 as usize, j1 as usize)))
                })
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(sup.get(idx), m);
        }
    }

    #[test]
    fn tv_properties() {
        let d = interval();
        let rho = step_case1(&d);
        let a = BinaryField::from_fn(&d, |p| p[0] < 0.0);
        assert_eq!(tv_eps(&a.to_scalar(), &rho, 0.1).unwrap(), per_eps(&a, &rho, 0.1).unwrap().total);
        assert_eq!(tv_eps(&ScalarField::constant(&d, 3.0), &rho, 0.1).unwrap(), 0.0);

        let d2 = GridDomain::square(-1.0, 1.0, 48).unwrap();
        for seed in 0..10 {
            let a = random_set(&d2, seed);
            let rho = random_densities(&d2, seed);
            let eps = 0.04 + 0.02 * seed as f64;
            assert_eq!(tv_eps(&a.to_scalar(), &rho, eps).unwrap(), per_eps(&a, &rho, eps).unwrap().total);
            let u = ScalarField::from_fn(&d2, |p| (3.0 * p[0]).sin() * p[1]);
            let tv = tv_eps(&u, &rho, eps).unwrap();
            let shifted = tv_eps(&u.map(|v| v + 0.7), &rho, eps).unwrap();
            assert!((tv - shifted).abs() <= 1e-12 * tv.max(1.0));
            assert_eq!(tv_eps(&u.scaled(4.0), &rho, eps).unwrap(), 4.0 * tv);
        }
    }

    #[test]
    fn ramp_matches_coarea_quadrature() {
        let d = GridDomain::interval(-1.0, 1.0, 4096).unwrap();
        let rho = DensityPair::uniform(&d, 0.5, 0.5).unwrap();
        let ramp = ScalarField::from_fn(&d, |p| p[0].clamp(0.0, 1.0));
        let c = coarea_check(&ramp, &rho, 0.1, 64).unwrap();
        assert!(c.gap() < 1e-3, "{c:?}");
        let bound = 5.0 * (ramp.max() - ramp.min()) / 64.0;
        assert!(c.gap() <= bound);
    }

    #[test]
    fn coarea_indicator_and_plateaus() {
        let d = interval();
        let rho = step_case1(&d);
        let a = BinaryField::from_fn(&d, |p| p[0] < 0.0);
        let c = coarea_check(&a.to_scalar(), &rho, 0.1, 64).unwrap();
        assert_eq!(c.lhs, c.rhs);

        // u = 0.5 χ_B + 0.5 χ_C with C ⊂ B: rhs = 0.5 Per(B) + 0.5 Per(C)
        let rho = DensityPair::uniform(&d, 0.5, 0.5).unwrap();
        let b = BinaryField::from_fn(&d, |p| p[0] > -0.5);
        let c_set = BinaryField::from_fn(&d, |p| p[0] > 0.3);
        let u = ScalarField::from_fn(&d, |p| 0.5 * f64::from(u8::from(p[0] > -0.5)) + 0.5 * f64::from(u8::from(p[0] > 0.3)));
        let hand = 0.5 * per_eps(&b, &rho, 0.1).unwrap().total + 0.5 * per_eps(&c_set, &rho, 0.1).unwrap().total;
        let check = coarea_check(&u, &rho, 0.1, 64).unwrap();
        assert!((check.rhs - hand).abs() < 1e-12);
        assert!((check.lhs - hand).abs() < 1e-12);
        assert!(coarea_check(&u, &rho, 0.1, 8).is_err());
    }
}
