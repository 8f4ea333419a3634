use evoforge::candidate::{rank_cmp, Candidate, FitnessValue, Payload, Provenance};
use evoforge::digest::derive_seed;
use evoforge::engine::survivor_select;
use evoforge::fitness::{adaptive_weight, aggregate, AdaptiveSchedule, Aggregator};
use evoforge::hdsl::{self, mutate, random_expr};
use evoforge::llmio::parse_script;
use evoforge::problems::{
    bpp_lower_bound, bpp_pack, canonical_cycle, tsp_tour_length, BppInstance, Point, TourPermutation, TspInstance,
    BPP_VARS,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

fn tour_candidate(id: u64, cost: f64, generation: u32) -> Candidate {
    let mut prov = Provenance::initial("p");
    prov.generation_created = generation;
    let fit = if cost.is_finite() {
        FitnessValue::feasible(cost, BTreeMap::new())
    } else {
        FitnessValue::infeasible(BTreeMap::new())
    };
    Candidate::new(id, Payload::Tour(TourPermutation(vec![0, 1, 2])), prov).unwrap().evaluated(fit)
}

proptest! {
    #[test]
    fn printed_expressions_round_trip(seed in any::<u64>(), depth in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_expr(&mut rng, &BPP_VARS, depth);
        let text = hdsl::print(&e);
        let back = hdsl::parse(&text).unwrap();
        prop_assert_eq!(&back, &e);
        prop_assert_eq!(hdsl::print(&back), text);
    }

    #[test]
    fn mutation_respects_size_and_variables(seed in any::<u64>(), max_size in 3usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_expr(&mut rng, &BPP_VARS, 3);
        let m = mutate(&e, &mut rng, &BPP_VARS, max_size);
        prop_assert!(m.complexity() <= max_size.max(e.complexity()));
        prop_assert!(m.variables().iter().all(|v| BPP_VARS.contains(v)));
    }

    #[test]
    fn tour_length_ignores_rotation_and_direction(
        coords in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 3..10),
        shift in 0usize..10,
        reverse in any::<bool>(),
    ) {
        let points: Vec<Point> = coords.iter().map(|&(x, y)| Point::new(x, y)).collect();
        let n = points.len();
        let inst = TspInstance::new("p", points).unwrap();
        let base: Vec<usize> = (0..n).collect();
        let mut other: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        if reverse {
            other.reverse();
        }
        prop_assert_eq!(canonical_cycle(&base), canonical_cycle(&other));
        let a = tsp_tour_length(&inst, &TourPermutation(base)).unwrap();
        let b = tsp_tour_length(&inst, &TourPermutation(other)).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn packing_keeps_items_and_capacity(
        items in prop::collection::vec(1u32..=50, 1..60),
        seed in any::<u64>(),
    ) {
        let items: Vec<f64> = items.into_iter().map(f64::from).collect();
        let inst = BppInstance::new("p", 50.0, items.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let expr = random_expr(&mut rng, &BPP_VARS, 3);
        if let Ok(packing) = bpp_pack(&inst, &expr) {
            let mut packed: Vec<f64> = packing.bins.iter().flatten().copied().collect();
            let mut want = items;
            packed.sort_by(f64::total_cmp);
            want.sort_by(f64::total_cmp);
            prop_assert_eq!(packed, want);
            prop_assert!(packing.loads().iter().all(|&l| l <= 50.0));
            prop_assert!(packing.bin_count() >= bpp_lower_bound(&inst));
        }
    }

    #[test]
    fn mean_lies_between_extremes(values in prop::collection::vec(-1e6f64..1e6, 1..30)) {
        let m = aggregate(&values, &Aggregator::mean()).unwrap();
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(m >= lo - 1e-6 && m <= hi + 1e-6);
    }

    #[test]
    fn schedule_is_monotone_and_capped(
        lambda_max in 0.0f64..5.0,
        ramp in 1u32..50,
        exponent in 0.25f64..4.0,
    ) {
        let s = AdaptiveSchedule { lambda_max, ramp_generations: ramp, exponent, size_budget: 25 };
        let w: Vec<f64> = (0..=ramp * 2).map(|t| adaptive_weight(t, &s)).collect();
        prop_assert_eq!(w[0], 0.0);
        prop_assert!(w.windows(2).all(|p| p[1] >= p[0]));
        prop_assert!(w.iter().all(|&x| x <= lambda_max));
        prop_assert_eq!(w[ramp as usize], lambda_max);
    }

    #[test]
    fn survivors_keep_the_best(
        parents in prop::collection::vec(prop_oneof![9 => 0.0f64..100.0, 1 => Just(f64::INFINITY)], 1..12),
        offspring in prop::collection::vec(prop_oneof![9 => 0.0f64..100.0, 1 => Just(f64::INFINITY)], 0..12),
    ) {
        let n = parents.len();
        let p: Vec<Candidate> = parents.iter().enumerate().map(|(i, &c)| tour_candidate(i as u64, c, 1)).collect();
        let o: Vec<Candidate> =
            offspring.iter().enumerate().map(|(i, &c)| tour_candidate(100 + i as u64, c, 2)).collect();
        let best = p.iter().chain(&o).min_by(|a, b| rank_cmp(a, b)).unwrap().id();
        let kept = survivor_select(p, o, n);
        prop_assert_eq!(kept.len(), n);
        prop_assert_eq!(kept[0].id(), best);
        prop_assert!(kept.windows(2).all(|w| rank_cmp(&w[0], &w[1]).is_le()));
    }

    #[test]
    fn script_records_round_trip(records in prop::collection::vec("[a-z<>/ ]{1,20}", 1..8)) {
        let text: String = records.iter().map(|r| format!("{r}\n---\n")).collect();
        prop_assert_eq!(parse_script(&text), records);
    }

    #[test]
    fn derived_seeds_are_stable(seed in any::<u64>(), i in 0u64..1000) {
        prop_assert_eq!(derive_seed(seed, i), derive_seed(seed, i));
        prop_assert_ne!(derive_seed(seed, i), derive_seed(seed, i + 1));
    }
}
