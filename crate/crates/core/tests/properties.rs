use cbctt::evaluation::{apply_move, assignment_cost, delta_components, Move};
use cbctt::instance::{extract_features, format_ctt, generate_toy_instance, parse_ctt, validate_instance, FindingKind, ToySpec};
use cbctt::neighborhood::sample_move;
use cbctt::stats::{benjamini_hochberg, friedman, kruskal_wallis, wilcoxon_rank_sum, wilcoxon_signed_rank};
use cbctt::tuning::{hammersley_points, scale_to_ranges, ParamRange};
use cbctt::{delta_cost, format_solution, full_cost, parse_solution, random_assignment};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn toy_spec() -> impl Strategy<Value = ToySpec> {
    (1usize..=5, 1usize..=5, 1usize..=4, 1usize..=12, 1usize..=5, 1usize..=4).prop_filter_map(
        "lectures must fit in the periods",
        |(days, timeslots, rooms, courses, curricula, max_lectures)| {
            (max_lectures <= days * timeslots && courses <= rooms * days * timeslots).then_some(ToySpec { days, timeslots, rooms, courses, curricula, max_lectures })
        },
    )
}

fn sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0i32..40).prop_map(f64::from), 2..10)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ctt_text_round_trip(spec in toy_spec(), seed in 0u64..1000) {
        let inst = generate_toy_instance(spec, seed).unwrap();
        let text = format_ctt(&inst);
        let back = parse_ctt(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(format_ctt(&back), text);
    }

    #[test]
    fn toy_instances_are_never_provably_infeasible(spec in toy_spec(), seed in 0u64..1000) {
        let inst = generate_toy_instance(spec, seed).unwrap();
        prop_assert!(validate_instance(&inst).iter().all(|f| f.kind != FindingKind::ProvablyInfeasible));
    }

    #[test]
    fn features_stay_in_range(spec in toy_spec(), seed in 0u64..1000) {
        let inst = generate_toy_instance(spec, seed).unwrap();
        let f = extract_features::<f64>(&inst).unwrap();
        for v in [f.room_occupation, f.conflicts, f.availability, f.room_suitability] {
            prop_assert!((0.0..=100.0).contains(&v));
        }
        prop_assert!(f.daily_lectures >= 0.0);
        prop_assert_eq!(f.lectures, inst.n_lectures() as f64);
        prop_assert_eq!(f, extract_features::<f64>(&inst.clone()).unwrap());
    }

    #[test]
    fn delta_matches_recomputation(spec in toy_spec(), seed in 0u64..1000, sr in 0.0f64..=1.0, w_hard in 1u64..500) {
        let inst = generate_toy_instance(spec, seed).unwrap();
        let mut tt = random_assignment(&inst, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cost = full_cost(&inst, &tt, w_hard);
        for _ in 0..200 {
            let Ok(mv) = sample_move(&inst, &tt, sr, &mut rng) else { break };
            let d = delta_cost(&inst, &tt, &mv, w_hard).unwrap();
            let parts = delta_components(&inst, &tt, &mv);
            apply_move(&inst, &mut tt, &mv).unwrap();
            let after = assignment_cost(&inst, tt.assignment(), w_hard);
            prop_assert_eq!(after.total as i64 - cost.total as i64, d);
            prop_assert_eq!(after.conflicts as i64 - cost.conflicts as i64, parts.conflicts);
            prop_assert_eq!(after.isolated_lectures as i64 - cost.isolated_lectures as i64, parts.isolated_lectures);
            prop_assert!(after.is_consistent());
            cost = after;
        }
        prop_assert!(tt.tables_consistent(&inst));
    }

    #[test]
    fn moves_are_involutions(spec in toy_spec(), seed in 0u64..1000) {
        let inst = generate_toy_instance(spec, seed).unwrap();
        let mut tt = random_assignment(&inst, seed).unwrap();
        let original = tt.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
        for _ in 0..50 {
            let Ok(mv) = sample_move(&inst, &tt, 0.5, &mut rng) else { break };
            let undo = match mv {
                Move::SwapLectures { a, b } => Move::SwapLectures { a: b, b: a },
                Move::MoveLecture { lecture, .. } => {
                    let s = tt.slot_of(lecture);
                    Move::MoveLecture { lecture, period: s.period, room: s.room }
                }
            };
            let before = tt.clone();
            apply_move(&inst, &mut tt, &mv).unwrap();
            prop_assert_eq!(delta_cost(&inst, &tt, &undo, 100).unwrap(), -delta_cost(&inst, &before, &mv, 100).unwrap());
            apply_move(&inst, &mut tt, &undo).unwrap();
            prop_assert_eq!(&tt, &before);
        }
        prop_assert_eq!(tt, original);
    }

    #[test]
    fn solution_text_round_trip(spec in toy_spec(), seed in 0u64..1000) {
        let inst = generate_toy_instance(spec, seed).unwrap();
        let tt = random_assignment(&inst, seed).unwrap();
        let text = format_solution(&inst, &tt);
        let back = parse_solution(&inst, &text).unwrap();
        prop_assert_eq!(full_cost(&inst, &back, 100), full_cost(&inst, &tt, 100));
        // lectures of a course are interchangeable, so compare canonical text
        prop_assert_eq!(format_solution(&inst, &back), text);
    }

    #[test]
    fn w_hard_scales_only_the_hard_part(spec in toy_spec(), seed in 0u64..1000, w in 1u64..1000) {
        let inst = generate_toy_instance(spec, seed).unwrap();
        let tt = random_assignment(&inst, seed).unwrap();
        let c = full_cost(&inst, &tt, w);
        prop_assert_eq!(c.total, w * c.hard() + c.soft());
        prop_assert_eq!(c.with_w_hard(1).total, c.hard() + c.soft());
    }

    #[test]
    fn bh_rejections_grow_with_q(p in prop::collection::vec(0.0f64..=1.0, 1..30), q1 in 0.001f64..0.5, dq in 0.0f64..0.49) {
        let a = benjamini_hochberg(&p, q1).unwrap();
        let b = benjamini_hochberg(&p, q1 + dq).unwrap();
        prop_assert!(a.iter().zip(&b).all(|(x, y)| !x || *y));
        // rejections form a prefix of the sorted p-values
        let max_rejected = p.iter().zip(&a).filter(|(_, r)| **r).map(|(v, _)| *v).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(p.iter().zip(&a).all(|(v, r)| *r || *v > max_rejected || *v == max_rejected));
    }

    #[test]
    fn rank_tests_ignore_monotone_transforms(a in sample(), b in sample(), c in sample()) {
        let t = |v: &Vec<f64>| v.iter().map(|x| 2.0 * x + 1.0).collect::<Vec<_>>();
        let close = |x: f64, y: f64| (x - y).abs() < 1e-9;
        prop_assert!(close(wilcoxon_rank_sum(&a, &b).unwrap().p_value, wilcoxon_rank_sum(&t(&a), &t(&b)).unwrap().p_value));
        let kw = kruskal_wallis(&[a.clone(), b.clone(), c.clone()]).unwrap();
        let kw_t = kruskal_wallis(&[t(&a), t(&b), t(&c)]).unwrap();
        prop_assert!(close(kw.statistic, kw_t.statistic) && close(kw.p_value, kw_t.p_value));
        let n = a.len().min(b.len());
        let sr = wilcoxon_signed_rank(&a[..n], &b[..n]).unwrap();
        let sr_t = wilcoxon_signed_rank(&t(&a)[..n], &t(&b)[..n]).unwrap();
        prop_assert!(close(sr.p_value, sr_t.p_value));
    }

    #[test]
    fn two_sided_tests_are_symmetric(a in sample(), b in sample()) {
        let close = |x: f64, y: f64| (x - y).abs() < 1e-9;
        prop_assert!(close(wilcoxon_rank_sum(&a, &b).unwrap().p_value, wilcoxon_rank_sum(&b, &a).unwrap().p_value));
        let n = a.len().min(b.len());
        prop_assert!(close(
            wilcoxon_signed_rank(&a[..n], &b[..n]).unwrap().p_value,
            wilcoxon_signed_rank(&b[..n], &a[..n]).unwrap().p_value
        ));
        for p in [wilcoxon_rank_sum(&a, &b).unwrap().p_value, kruskal_wallis(&[a.clone(), b.clone()]).unwrap().p_value] {
            prop_assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn friedman_ignores_row_shifts(rows in prop::collection::vec(prop::collection::vec(0i32..20, 4), 3..12), shift in 0i32..100) {
        let a: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&v| f64::from(v)).collect()).collect();
        let b: Vec<Vec<f64>> = rows.iter().enumerate().map(|(i, r)| r.iter().map(|&v| f64::from(v + shift * i as i32)).collect()).collect();
        let (x, y) = (friedman(&a).unwrap(), friedman(&b).unwrap());
        prop_assert!((x.p_value - y.p_value).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&x.p_value));
    }

    #[test]
    fn scaled_points_lie_in_their_ranges(n in 1usize..64, lo in -50.0f64..50.0, width in 0.0f64..100.0) {
        let ranges = vec![ParamRange::<f64>::new("a", lo, lo + width), ParamRange::new("b", 0.0, 1.0), ParamRange::new("c", lo, lo + 2.0 * width)];
        let configs = scale_to_ranges(&hammersley_points(n, 3).unwrap(), &ranges).unwrap();
        prop_assert_eq!(configs.len(), n);
        prop_assert!(configs.iter().all(|c| c.within(&ranges)));
    }
}
