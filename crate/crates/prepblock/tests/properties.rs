//! Property tests: pseudoinverse axioms on random symmetric matrices, and
//! structural invariants of randomly generated valid design specs.

use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use prepblock::criteria::{a_bound, a_value, a2_value, mv_thresholds, mv_value};
use prepblock::linalg::{self, SymMatrix};
use prepblock::oracle::random_spec;

fn sym_matrix(max_order: usize) -> impl Strategy<Value = SymMatrix> {
    (1..=max_order)
        .prop_flat_map(|n| {
            proptest::collection::vec(-1.0f64..1.0, n * (n + 1) / 2)
                .prop_map(move |entries| {
                    let mut it = entries.into_iter();
                    let mut m = SymMatrix::zeros(n);
                    for i in 0..n {
                        for j in i..n {
                            m.set(i, j, it.next().unwrap());
                        }
                    }
                    m
                })
        })
}

fn max_abs_diff(a: &SymMatrix, b: &SymMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.order() {
        for j in 0..a.order() {
            worst = worst.max((a.get(i, j) - b.get(i, j)).abs());
        }
    }
    worst
}

fn sym_product(a: &SymMatrix, b: &SymMatrix) -> Vec<Vec<f64>> {
    let n = a.order();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|r| a.get(i, r) * b.get(r, j)).sum())
                .collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn pseudoinverse_satisfies_the_four_axioms(m in sym_matrix(24)) {
        let p = linalg::pinv_default(&m).unwrap();
        let scale = m.max_abs().max(1.0);
        let mp = sym_product(&m, &p);
        let pm = sym_product(&p, &m);

        // M P M = M and P M P = P.
        let n = m.order();
        for i in 0..n {
            for j in 0..n {
                let mpm: f64 = (0..n).map(|r| mp[i][r] * m.get(r, j)).sum();
                prop_assert!((mpm - m.get(i, j)).abs() <= 1e-8 * scale);
                let pmp: f64 = (0..n).map(|r| pm[i][r] * p.get(r, j)).sum();
                prop_assert!((pmp - p.get(i, j)).abs() <= 1e-8 * p.max_abs().max(1.0));
                // Both products are symmetric (the remaining two axioms).
                prop_assert!((mp[i][j] - mp[j][i]).abs() <= 1e-8 * scale);
                prop_assert!((pm[i][j] - pm[j][i]).abs() <= 1e-8 * scale);
            }
        }
    }

    #[test]
    fn pseudoinverse_is_an_involution_away_from_the_cutoff(m in sym_matrix(16)) {
        // Restrict to matrices whose spectrum stays clear of the rank
        // tolerance, where the double pseudoinverse is numerically stable.
        let eig = linalg::eigen_sym(&m).unwrap();
        let top = eig.values.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        prop_assume!(eig.values.iter().all(|&x| x == 0.0 || x.abs() > 1e-4 * top.max(1.0)));
        let back = linalg::pinv_default(&linalg::pinv_default(&m).unwrap()).unwrap();
        prop_assert!(max_abs_diff(&m, &back) <= 1e-7 * m.max_abs().max(1.0));
    }

    #[test]
    fn eigenvalue_sum_matches_the_trace(m in sym_matrix(24)) {
        let eig = linalg::eigen_sym(&m).unwrap();
        let sum: f64 = eig.values.iter().sum();
        prop_assert!((sum - m.trace()).abs() <= 1e-8 * m.max_abs().max(1.0) * m.order() as f64);
    }

    #[test]
    fn random_specs_satisfy_model_invariants(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = random_spec(&mut rng);
        let (u, b, k) = (spec.u(), spec.b(), spec.k());

        // Shape of the assembled full design.
        let d0 = spec.full_design();
        prop_assert_eq!(d0.num_blocks(), b);
        prop_assert!(d0.blocks().iter().all(|blk| blk.len() == k));
        prop_assert_eq!(d0.num_treatments(), spec.v());
        let reps = d0.replications();
        prop_assert!(reps.iter().take(u).all(|&r| r == 2));
        prop_assert!(reps.iter().skip(u).all(|&r| r == 1));
        prop_assert_eq!(spec.w(), b * k - 2 * u);

        // Both information matrices annihilate the all-ones contrast.
        let c = spec.info_c();
        for i in 0..u {
            let row_sum: f64 = (0..u).map(|j| c.get(i, j)).sum();
            prop_assert!(row_sum.abs() <= 1e-9);
        }
        let ct = spec.info_ctilde();
        let eig = linalg::eigen_sym(&ct).unwrap();
        let top = eig.values.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        prop_assert!(eig.values.iter().all(|&x| x >= -1e-9 * top.max(1.0)));

        // Criterion decompositions and bounds.
        let a = a_value(&spec).unwrap();
        prop_assert!((a.uu + a.ww + a.uw - a.total).abs() <= 1e-8 * a.total.max(1.0));
        let bound = a_bound(u, b, k).unwrap();
        prop_assert!(bound <= a.total * (1.0 + 1e-9));
        let a2 = a2_value(&spec).unwrap();
        prop_assert!(a2.eff <= 1.0 + 1e-9);
        prop_assert!((a2.a1 + a.uw + a.uu - a.total).abs() <= 1e-8 * a.total.max(1.0));

        let thresholds = mv_thresholds(spec.sub()).unwrap();
        if k >= thresholds.k_sharp {
            let total = mv_value(&spec).unwrap().total;
            prop_assert!(total >= 2.0 + 2.0 * (b as f64 - 1.0) / u as f64 - 1e-9);
        }
    }
}
