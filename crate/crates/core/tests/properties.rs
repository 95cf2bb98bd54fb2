use perimlab::adversarial::{
    adversarial_risk, bayes_risk, bayes_set, equivalence_check, fixed_alpha_affine, fixed_alpha_objective,
    ClassificationMeasure,
};
use perimlab::gammalab::compactness_fields;
use perimlab::geometry::{dilate, erode, BinaryField, DensityPair, GridDomain, ScalarField};
use perimlab::graph::{build_graph, graph_perimeter, sample_cloud, DiscreteSet, LabelStrips};
use perimlab::limit::{beta, Traces};
use perimlab::nonlocal::{per_eps, per_eps_supform, tv_eps};
use proptest::prelude::*;

fn square(n: usize) -> GridDomain {
    GridDomain::square(-1.0, 1.0, n).unwrap()
}

prop_compose! {
    fn grid_set()(n in 4usize..20)(bits in proptest::collection::vec(any::<bool>(), n * n), n in Just(n)) -> BinaryField {
        BinaryField::new(square(n), bits).unwrap()
    }
}

prop_compose! {
    fn set_and_density()(a in grid_set())
        (r0 in proptest::collection::vec(0.0f64..2.0, a.domain().len()),
         r1 in proptest::collection::vec(0.05f64..2.0, a.domain().len()),
         a in Just(a)) -> (BinaryField, DensityPair) {
        let d = a.domain().clone();
        let rho = DensityPair::new(ScalarField::new(d.clone(), r0).unwrap(), ScalarField::new(d, r1).unwrap()).unwrap();
        (a, rho)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn erosion_is_dual_to_dilation(a in grid_set(), eps in 0.05f64..0.8) {
        prop_assert_eq!(erode(&a, eps).unwrap(), dilate(&a.complement(), eps).unwrap().complement());
    }

    #[test]
    fn morphology_is_monotone(a in grid_set(), extra in proptest::collection::vec(any::<bool>(), 400),
                              e1 in 0.05f64..0.5, de in 0.0f64..0.5) {
        let b = BinaryField::new(a.domain().clone(),
            (0..a.domain().len()).map(|i| a.get(i) || extra[i % extra.len()]).collect()).unwrap();
        prop_assert!(dilate(&a, e1).unwrap().is_subset_of(&dilate(&b, e1).unwrap()));
        prop_assert!(erode(&a, e1).unwrap().is_subset_of(&erode(&b, e1).unwrap()));
        prop_assert!(dilate(&a, e1).unwrap().is_subset_of(&dilate(&a, e1 + de).unwrap()));
    }

    #[test]
    fn strip_form_equals_sup_form((a, rho) in set_and_density(), eps in 0.05f64..0.6) {
        prop_assert_eq!(per_eps(&a, &rho, eps).unwrap(), per_eps_supform(&a, &rho, eps).unwrap());
    }

    #[test]
    fn complement_swaps_densities((a, rho) in set_and_density(), eps in 0.05f64..0.6) {
        let p = per_eps(&a, &rho, eps).unwrap().total;
        let q = per_eps(&a.complement(), &rho.swapped(), eps).unwrap().total;
        prop_assert_eq!(p, q);
    }

    #[test]
    fn tv_of_indicator_and_shifts((a, rho) in set_and_density(), eps in 0.05f64..0.6, k in 0i32..4) {
        let u = a.to_scalar();
        let tv = tv_eps(&u, &rho, eps).unwrap();
        prop_assert_eq!(tv, per_eps(&a, &rho, eps).unwrap().total);
        prop_assert_eq!(tv_eps(&u.map(|x| x + 3.0), &rho, eps).unwrap(), tv);
        let c = 2f64.powi(k);
        prop_assert_eq!(tv_eps(&u.scaled(c), &rho, eps).unwrap(), c * tv);
    }

    #[test]
    fn beta_bounds_and_flip(t in proptest::array::uniform4(0.0f64..3.0)) {
        let b = beta(&Traces::new(t[0], t[1], t[2], t[3])).unwrap();
        let c = Traces::new(t[0], t[1], t[2], t[3]).candidates();
        prop_assert!(c.iter().all(|&x| b <= x));
        prop_assert_eq!(b, beta(&Traces::new(t[3], t[2], t[1], t[0])).unwrap());
    }

    #[test]
    fn adversarial_identities((a, rho) in set_and_density(), eps in 0.05f64..0.5, de in 0.0f64..0.3, s in 0.0f64..1.0) {
        let mu = ClassificationMeasure::new(rho);
        prop_assert!(equivalence_check(&a, &mu, eps).unwrap().holds());
        let r = adversarial_risk(&a, &mu, eps).unwrap();
        prop_assert!(adversarial_risk(&a, &mu, eps + de).unwrap() >= r);
        let bayes = bayes_risk(&a, &mu).unwrap();
        prop_assert!(r >= bayes);
        prop_assert!(bayes >= bayes_risk(&bayes_set(&mu), &mu).unwrap());
        let alpha = s * eps;
        prop_assert_eq!(fixed_alpha_objective(&a, &mu, eps, alpha).unwrap(), fixed_alpha_affine(&a, &mu, eps, alpha).unwrap());
    }

    #[test]
    fn compactness_fields_are_lipschitz(a in grid_set(), eps in 0.2f64..1.0) {
        prop_assume!(!a.is_empty() && !a.is_full());
        let (u, v) = compactness_fields(&a, eps).unwrap();
        let d = a.domain();
        let [n0, n1] = d.shape();
        let bound = d.h() / eps + 2.0 * d.h() / eps;
        for i0 in 0..n0 {
            for i1 in 0..n1 {
                let here = d.index(i0, i1);
                let mut next = Vec::new();
                if i0 + 1 < n0 { next.push(d.index(i0 + 1, i1)); }
                if i1 + 1 < n1 { next.push(d.index(i0, i1 + 1)); }
                for there in next {
                    prop_assert!((u.get(here) - u.get(there)).abs() <= bound);
                    prop_assert!((v.get(here) - v.get(there)).abs() <= bound);
                }
                prop_assert!((0.0..=1.0).contains(&u.get(here)) && (0.0..=1.0).contains(&v.get(here)));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn graph_energy_vanishes_on_trivial_sets(seed in any::<u64>(), n in 20usize..300) {
        let d = square(16);
        let rho = DensityPair::uniform(&d, 0.2, 0.3).unwrap();
        let g = build_graph(sample_cloud(&rho, n, seed).unwrap(), 0.3).unwrap();
        for strips in [LabelStrips::Consistent, LabelStrips::AsDisplayed] {
            let empty = DiscreteSet::from_fn(g.cloud(), |_| false);
            let full = DiscreteSet::from_fn(g.cloud(), |_| true);
            prop_assert_eq!(graph_perimeter(&g, &empty, strips).unwrap(), 0.0);
            prop_assert_eq!(graph_perimeter(&g, &full, strips).unwrap(), 0.0);
        }
    }
}
