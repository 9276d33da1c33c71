mod common;

use common::*;
use gapclique::ffield::FieldVector;
use gapclique::lintest::*;
use gapclique::stats::{frac, to_f64};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Every scalar-respecting scalar table over `F_q^d`, by enumerating the
/// value at each line representative.
fn all_scalar_respecting(q: u64, d: usize) -> Vec<FunctionTable> {
    let base = FunctionTable::new(field(q), d, 1, vec![0; (q as usize).pow(d as u32)]).unwrap();
    let reps = line_reps(&base);
    let total = (q as usize).pow(reps.len() as u32);
    (0..total)
        .map(|mut code| {
            let mut t = base.clone();
            for &r in &reps {
                t.set_value(r, &[(code % q as usize) as u64]).unwrap();
                code /= q as usize;
            }
            t.scalar_closure()
        })
        .collect()
}

#[test]
fn fast_transform_matches_direct_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for q in [2u64, 3, 5, 7] {
        for d in 1..=2 {
            let t = FunctionTable::random(field(q), d, 1, &mut rng).unwrap();
            let fast = fourier_transform(&t).unwrap();
            for (a, b) in fast.coeffs().iter().zip(naive_fourier(&t)) {
                assert!((a - b).norm() < 1e-9);
            }
        }
    }
}

#[test]
fn agreement_identity_holds_for_every_scalar_respecting_table() {
    for (q, d) in [(3u64, 1usize), (3, 2), (5, 1), (5, 2)] {
        let tables = all_scalar_respecting(q, d);
        assert_eq!(tables.len(), (q as usize).pow(((q.pow(d as u32) - 1) / (q - 1)) as u32));
        for t in tables.iter().step_by(if q == 5 && d == 2 { 7 } else { 1 }) {
            let ft = fourier_transform(t).unwrap();
            for rho in 0..t.domain_size() {
                let c = LinearScalarFn::new(t.space().vector(rho));
                let exact = agreement(t, &c).unwrap();
                assert_eq!(exact, naive_agreement(t, rho));
                assert!((to_f64(&exact) - agreement_from_fourier(&ft, rho)).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn agreement_with_other_character_is_one_third() {
    let t = linear_table(&LinearVecFn::from_scalar_fns(&[scalar_fn(3, &[1])]).unwrap());
    let other = scalar_fn(3, &[2]);
    assert_eq!(agreement(&t, &other).unwrap(), frac(1, 3));
    let ft = fourier_transform(&t).unwrap();
    assert!(ft.coeff(2).norm() < 1e-12);
    // 1 = 1/q + (q-1)/q * 1
    assert!((agreement_from_fourier(&ft, 1) - 1.0).abs() < 1e-12);
}

#[test]
fn triple_identity_holds_for_all_triples_at_q3_d1() {
    let tables: Vec<_> = all_scalar_respecting(3, 1)
        .into_iter()
        .map(|t| t.into_scalar_respecting().unwrap())
        .collect();
    assert_eq!(tables.len(), 3);
    for f1 in &tables {
        for f2 in &tables {
            for f3 in &tables {
                let r = triple_correlation_check(f1, f2, f3, 1 << 20).unwrap();
                assert_eq!(r.lhs_exact, naive_triple(f1, f2, f3));
                assert!(r.abs_diff <= 1e-9, "{r:?}");
            }
        }
    }
}

#[test]
fn triple_identity_on_random_tables_q3_d2() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let g: Vec<_> = (0..3)
            .map(|_| FunctionTable::random_scalar_respecting(field(3), 2, 1, &mut rng).unwrap())
            .collect();
        let r = triple_correlation_check(&g[0], &g[1], &g[2], 1 << 20).unwrap();
        assert_eq!(r.lhs_exact, naive_triple(&g[0], &g[1], &g[2]));
        assert!(r.abs_diff <= 1e-9);
    }
}

#[test]
fn triple_check_reports_large_coefficient() {
    // With g2 = g3 the same character, the left side is the agreement of g1
    // with that character, which forces g1^ at it to be large.
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let chi = linear_table(&LinearVecFn::from_scalar_fns(&[scalar_fn(7, &[3, 2])]).unwrap());
    for _ in 0..10 {
        let g1 = corrupt_lines(&chi, 5, &mut rng);
        let r = triple_correlation_check(&g1, &chi, &chi, 1 << 20).unwrap();
        let q = 7.0;
        assert_eq!(r.lhs_exact, naive_agreement(&g1, chi.space().index_of(&[3, 2])));
        assert!(r.max_g1_coefficient >= (r.lhs - 1.0 / q) * q / (q - 1.0) - 1e-9);
    }
}

#[test]
fn decoder_finds_dominant_linear_function() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..10 {
        let c = random_linear(11, 2, 1, &mut rng);
        let exact = linear_table(&c);
        // 8 of the 12 lines kept: agreement at least 81/121 > 0.6
        let f = corrupt_lines(&exact, 4, &mut rng);
        let rho = f.space().index_of(c.rows()[0].entries());
        assert!(naive_agreement(&f, rho) >= frac(6, 10));
        let list = list_decode_scalar(&f, frac(1, 4), default_c_list()).unwrap();
        assert!(list.contains(&c.coordinate(0)));
        let oracle = brute_force_list(&f, default_c_list() * frac(1, 4));
        let got: Vec<usize> = list.iter().map(|l| f.space().index_of(l.coeffs().entries())).collect();
        assert_eq!(got, oracle);
        assert!((list.len() as f64) <= 256.0);
    }
}

#[test]
fn exactly_linear_decodes_to_singleton() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for q in [3u64, 5, 11] {
        let c = random_linear(q, 2, 1, &mut rng);
        let list = list_decode_scalar(&linear_table(&c), frac(1, 2), default_c_list()).unwrap();
        assert_eq!(list, vec![c.coordinate(0)]);
    }
}

#[test]
fn scalar_respecting_tables_in_one_dimension_are_linear() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..10 {
        let t = FunctionTable::random_scalar_respecting(field(101), 1, 1, &mut rng).unwrap();
        let list = list_decode_scalar(&t, frac(1, 4), default_c_list()).unwrap();
        assert_eq!(list, vec![scalar_fn(101, &[t.value(1)[0]])]);
    }
}

#[test]
fn random_tables_have_no_heavy_coefficient() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let empty = (0..100)
        .filter(|_| {
            let t = FunctionTable::random(field(101), 1, 1, &mut rng).unwrap();
            decode_with_threshold(&fourier_transform(&t).unwrap(), 0.25).is_empty()
        })
        .count();
    assert!(empty >= 97, "only {empty}/100 empty");
}

#[test]
fn consistency_of_linear_and_corrupted_tables() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let c = random_linear(11, 2, 1, &mut rng);
    let exact = linear_table(&c);
    let s = accepted_set(&exact, DEFAULT_PAIR_BUDGET).unwrap();
    let r = verify_unique_consistency(&exact, &[c.coordinate(0)], &s).unwrap();
    assert_eq!(r.fraction, frac(1, 1));

    for _ in 0..5 {
        // 2 of 12 lines replaced: agreement about 0.83
        let f = corrupt_lines(&exact, 2, &mut rng);
        let list = list_decode_scalar(&f, frac(1, 4), default_c_list()).unwrap();
        let s = accepted_set(&f, DEFAULT_PAIR_BUDGET).unwrap();
        let r = verify_unique_consistency(&f, &list, &s).unwrap();
        let brute = s
            .pairs()
            .filter(|&(a, b)| {
                list.iter()
                    .filter(|l| {
                        let pa = f.space().point(a);
                        let pb = f.space().point(b);
                        l.eval_point(&pa) == f.value(a)[0] && l.eval_point(&pb) == f.value(b)[0]
                    })
                    .count()
                    == 1
            })
            .count() as u64;
        assert_eq!(r.consistent_pairs, brute);
        assert_eq!(r.accepted_pairs, s.len());
        assert!(to_f64(&r.fraction) >= 0.75, "{r:?}");
    }
}

#[test]
fn piecing_recovers_lightly_corrupted_linear_map() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..5 {
        let c0 = random_linear(11, 2, 4, &mut rng);
        let f = corrupt_lines(&linear_table(&c0), 1, &mut rng);
        let cfg = PiecingConfig::new(frac(1, 10), frac(1, 4)).with_delta(DeltaRule::Fixed(frac(1, 2)));
        let out = piece_together(&f, &cfg).unwrap();
        let c = out.map.expect("anchor exists");
        for i in 0..4 {
            let fi = f.coordinate(i);
            let best = (0..fi.domain_size())
                .max_by_key(|&rho| (naive_agreement(&fi, rho), std::cmp::Reverse(rho)))
                .unwrap();
            assert_eq!(c.rows()[i].entries(), fi.space().point(best).as_slice());
        }
        assert_eq!(c, c0);
        let agreement = out.stats.agreement.unwrap();
        assert!(to_f64(&agreement) >= out.stats.agreement_floor);
    }
}

#[test]
fn piecing_agreement_meets_floor_on_noisier_tables() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for lines in [2usize, 3, 4] {
        let c0 = random_linear(7, 2, 3, &mut rng);
        let f = corrupt_lines(&linear_table(&c0), lines, &mut rng);
        let cfg = PiecingConfig::new(frac(0, 1), frac(1, 3)).with_delta(DeltaRule::Fixed(frac(1, 2)));
        let out = piece_together(&f, &cfg).unwrap();
        if let Some(a) = out.stats.agreement {
            assert!(to_f64(&a) >= out.stats.agreement_floor, "{:?}", out.stats);
        }
    }
}

#[test]
fn random_tables_pass_with_probability_one_over_q_on_average() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let probs: Vec<f64> = (0..200)
        .map(|_| {
            let t = FunctionTable::random(field(3), 1, 1, &mut rng).unwrap();
            pass_probability(&t, PassMode::exact()).unwrap().as_f64()
        })
        .collect();
    let n = probs.len() as f64;
    let mean = probs.iter().sum::<f64>() / n;
    let var = probs.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((mean - 1.0 / 3.0).abs() <= 3.0 * (var / n).sqrt(), "mean {mean}");
}

#[test]
fn table_file_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.json");
    let t = FunctionTable::random(field(5), 2, 2, &mut ChaCha8Rng::seed_from_u64(22)).unwrap();
    t.write(&path).unwrap();
    assert_eq!(FunctionTable::read(&path).unwrap(), t);
    let missing = FunctionTable::read(&dir.path().join("nope.json")).unwrap_err();
    assert!(missing.is_io());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn accepted_set_agrees_with_pass_probability(seed in any::<u64>(), q in prop::sample::select(vec![2u64, 3, 5]), d in 1usize..=2, ell in 1usize..=2) {
        let t = FunctionTable::random(field(q), d, ell, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let s = accepted_set(&t, DEFAULT_PAIR_BUDGET).unwrap();
        let p = pass_probability(&t, PassMode::exact()).unwrap();
        let exact = matches!(p, PassProbability::Exact { value, .. } if value == s.fraction());
        prop_assert!(exact);
        let var = s.var();
        for a in 0..t.domain_size() {
            prop_assert_eq!(var.contains(&a), (0..t.domain_size()).any(|b| s.contains(a, b)));
        }
        if t.value(0).iter().all(|&v| v == 0) {
            prop_assert!(var.contains(&0));
        }
    }

    #[test]
    fn scalar_respecting_transforms_are_real_and_normalized(seed in any::<u64>(), q in prop::sample::select(vec![3u64, 5, 7, 11, 13]), d in 1usize..=2) {
        let t = FunctionTable::random_scalar_respecting(field(q), d, 1, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let ft = fourier_transform(&t).unwrap();
        prop_assert!(ft.max_imaginary() < 1e-9);
        prop_assert!((ft.parseval_mass() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn linear_maps_evaluate_coordinatewise(seed in any::<u64>(), q in prop::sample::select(vec![2u64, 3, 7, 13]), d in 1usize..=4, ell in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_linear(q, d, ell, &mut rng);
        let a = FieldVector::random(field(q), d, &mut rng);
        let b = FieldVector::random(field(q), d, &mut rng);
        let lhs = c.eval(&a.add(&b).unwrap()).unwrap();
        prop_assert_eq!(lhs, c.eval(&a).unwrap().add(&c.eval(&b).unwrap()).unwrap());
        for i in 0..ell {
            prop_assert_eq!(c.coordinate(i).eval(&a).unwrap(), c.eval(&a).unwrap().entries()[i]);
        }
    }
}
