mod common;

use common::field;
use gapclique::ffield::FieldVector;
use gapclique::vecsum::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// All index tuples in lexicographic order, the first summing to zero.
fn naive_first_witness(inst: &VecSumInstance) -> Option<Vec<usize>> {
    let sizes: Vec<usize> = inst.collections().iter().map(Vec::len).collect();
    let total: usize = sizes.iter().product();
    (0..total)
        .map(|mut code| {
            let mut t = vec![0; sizes.len()];
            for (slot, &s) in t.iter_mut().zip(&sizes).rev() {
                *slot = code % s;
                code /= s;
            }
            t
        })
        .find(|t| inst.is_witness(t))
}

fn random_instance<R: Rng>(rng: &mut R, q: u64, k: usize, m: usize, max_n: usize) -> VecSumInstance {
    let f = field(q);
    let cols = (0..k)
        .map(|_| {
            let n = rng.random_range(1..=max_n);
            (0..n).map(|_| FieldVector::random(f, m, rng)).collect()
        })
        .collect();
    VecSumInstance::new(f, m, cols).unwrap()
}

fn sum_of(inst: &VecSumInstance, t: &[usize]) -> FieldVector {
    let mut acc = FieldVector::zeros(inst.field(), inst.m());
    for v in inst.tuple(t).unwrap() {
        acc.add_scaled(1, v).unwrap();
    }
    acc
}

#[test]
fn planted_instances_are_always_yes() {
    let mut runs = 0;
    for k in 1..=3 {
        for m in 1..=4 {
            for n in [1usize, 3, 5] {
                for seed in 0..100u64 {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed * 1000 + (k * 100 + m * 10 + n) as u64);
                    let inst = generate_planted(&mut rng, field(3), k, m, n).unwrap();
                    assert!(sum_of(&inst, inst.planted().unwrap()).is_zero());
                    match brute_force_decide(&inst, DEFAULT_ENUM_BUDGET).unwrap() {
                        Decision::Yes { witness } => assert!(sum_of(&inst, &witness).is_zero()),
                        Decision::No { .. } => panic!("planted instance decided NO"),
                    }
                    runs += 1;
                }
            }
        }
    }
    assert_eq!(runs, 3600);
}

#[test]
fn fixed_seed_planted_example_is_yes() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let inst = generate_planted(&mut rng, field(3), 2, 2, 4).unwrap();
    let d = brute_force_decide(&inst, DEFAULT_ENUM_BUDGET).unwrap();
    assert_eq!(
        d,
        Decision::Yes {
            witness: naive_first_witness(&inst).unwrap()
        }
    );
}

#[test]
fn decide_matches_naive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..300 {
        let k = rng.random_range(1..=4);
        let inst = random_instance(&mut rng, 3, k, 2, 4);
        let got = brute_force_decide(&inst, DEFAULT_ENUM_BUDGET).unwrap();
        match naive_first_witness(&inst) {
            Some(w) => assert_eq!(got, Decision::Yes { witness: w }),
            None => assert_eq!(
                got,
                Decision::No {
                    tuples: inst.tuple_count()
                }
            ),
        }
    }
}

#[test]
fn unsat_generation_within_few_retries() {
    let mut attempts = Vec::new();
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = generate_unsat(&mut rng, field(5), 2, 3, 4, 20, DEFAULT_ENUM_BUDGET).unwrap();
        assert_eq!(naive_first_witness(&inst), None);
        let cert = inst.certificate().unwrap();
        assert_eq!(cert.instance_hash, inst.fingerprint());
        attempts.push(cert.attempts);
    }
    let mean = attempts.iter().sum::<usize>() as f64 / attempts.len() as f64;
    // collision probability about 16/125 per attempt
    assert!(mean < 2.0, "mean attempts {mean}");
}

#[test]
fn unsat_generation_fails_when_pigeonhole_forces_yes() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    // q^m = 3 <= n^k = 16
    let err = generate_unsat(&mut rng, field(3), 2, 1, 4, 25, DEFAULT_ENUM_BUDGET).unwrap_err();
    assert!(matches!(err, gapclique::Error::RetriesExhausted { .. }));
    let err = generate_unsat(&mut rng, field(3), 4, 4, 100, 1, 1000).unwrap_err();
    assert!(err.is_budget());
}

#[test]
fn target_variant_preserves_decision() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let k = rng.random_range(1..=3);
        let inst = random_instance(&mut rng, 3, k, 2, 3);
        let target = FieldVector::random(field(3), 2, &mut rng);
        let direct = {
            let sizes: Vec<usize> = inst.collections().iter().map(Vec::len).collect();
            let total: usize = sizes.iter().product();
            (0..total).any(|mut code| {
                let mut t = vec![0; k];
                for (slot, &s) in t.iter_mut().zip(&sizes).rev() {
                    *slot = code % s;
                    code /= s;
                }
                sum_of(&inst, &t) == target
            })
        };
        let conv = from_target_variant(&inst, &target).unwrap();
        assert_eq!(conv.k(), k + 1);
        assert_eq!(brute_force_decide(&conv, DEFAULT_ENUM_BUDGET).unwrap().is_yes(), direct);
    }
}

#[test]
fn sumsets_are_closed_under_scalars() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for q in [2u64, 3, 5] {
        for r in 1..=3 {
            let b: Vec<FieldVector> = (0..2).map(|_| FieldVector::random(field(q), 3, &mut rng)).collect();
            let s = enumerate_sumset(field(q), &b, r, 1 << 20).unwrap();
            for x in s.elements() {
                for gamma in 0..q {
                    assert!(s.contains(&x.scale(gamma)));
                }
            }
            // every element is some combination of at most r basis vectors
            let smaller = if r > 1 {
                Some(enumerate_sumset(field(q), &b, r - 1, 1 << 20).unwrap())
            } else {
                None
            };
            if let Some(sm) = smaller {
                assert!(sm.elements().iter().all(|x| s.contains(x)));
            }
        }
    }
}

#[test]
fn instance_files_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let inst = generate_planted(&mut rng, field(7), 3, 3, 4)
        .unwrap()
        .with_provenance(Some(8), "planted");
    let path = dir.path().join("inst.json");
    inst.write(&path).unwrap();
    let back = VecSumInstance::read(&path).unwrap();
    assert_eq!(back, inst);
    assert_eq!(back.provenance().seed, Some(8));
    std::fs::write(&path, "{not json").unwrap();
    assert!(VecSumInstance::read(&path).unwrap_err().is_io());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn returned_witnesses_sum_to_zero(seed in any::<u64>(), q in prop::sample::select(vec![2u64, 3, 5]), k in 1usize..=3, m in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, q, k, m, 4);
        if let Decision::Yes { witness } = brute_force_decide(&inst, DEFAULT_ENUM_BUDGET).unwrap() {
            prop_assert!(sum_of(&inst, &witness).is_zero());
        }
    }
}
