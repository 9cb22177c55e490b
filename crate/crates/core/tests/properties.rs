use ajar::exec::{aggro_ghd_join, generic_join, ExecOptions};
use ajar::ghd::{is_decomposable, is_valid, normalize_decomposable, BagMeasure, FractionalCover};
use ajar::io::{read_relation, relation_to_string};
use ajar::oracle::{exhaustive_valid_ghds, naive_eval, random_instance, random_query, RandomInstanceSpec, RandomQuerySpec};
use ajar::ordering::{compute_prec, test_equivalence};
use ajar::planner::{plan, run_with_stats, transitive_closure, with_self_loops, ClosureShape, PlanConfig};
use ajar::relation::join;
use ajar::{AggregationOrdering, AnnotatedRelation, Annotation, Attr, ExtInt, Hypergraph, SemiringSpec, Value};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn query(seed: u64, n: usize, ops: &[&str]) -> (Hypergraph, AggregationOrdering) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_query(&RandomQuerySpec::new(n, ops), &mut rng)
}

fn instance<K: Annotation>(h: &Hypergraph, seed: u64, s: &SemiringSpec<K>) -> (Vec<AnnotatedRelation<K>>, ajar::DomainRegistry) {
    random_instance(h, &RandomInstanceSpec { domain_size: 3, density: 0.6, seed }, s)
}

const PRIMES: [i64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generic_join_matches_pairwise(seed in any::<u64>(), n in 2usize..=5) {
        let s = SemiringSpec::integers();
        let (h, _) = query(seed, n, &["sum"]);
        let (rels, _) = instance(&h, seed ^ 1, &s);
        let refs: Vec<&AnnotatedRelation<i64>> = rels.iter().collect();
        prop_assert_eq!(generic_join(&h, &rels, &s).unwrap(), join(&refs, &s));
    }

    #[test]
    fn planned_run_matches_naive(seed in any::<u64>(), n in 2usize..=5) {
        let s = SemiringSpec::nonneg_rationals();
        let (h, alpha) = query(seed, n, &["sum", "max"]);
        let (rels, d) = instance(&h, seed ^ 2, &s);
        let p = plan(&h, &alpha, &PlanConfig::default()).unwrap();
        let got = aggro_ghd_join(&h, &p.ghd, &p.beta, &rels, Some(&d), &s).unwrap();
        prop_assert_eq!(got, naive_eval(&h, &alpha, &rels, Some(&d), &s).unwrap());
    }

    #[test]
    fn product_plans_match_naive(seed in any::<u64>(), n in 2usize..=4) {
        let s = SemiringSpec::boolean();
        let (h, alpha) = query(seed, n, &["max", "prod"]);
        let (rels, d) = instance(&h, seed ^ 3, &s);
        let p = plan(&h, &alpha, &PlanConfig::default()).unwrap();
        let (got, _) = run_with_stats(&p, &rels, &d, &s, &ExecOptions::default()).unwrap();
        prop_assert_eq!(got, naive_eval(&h, &alpha, &rels, Some(&d), &s).unwrap());
    }

    /// Relation `i` annotates every tuple with the `i`-th prime. Each output
    /// annotation must be its witness count times the product of all primes.
    #[test]
    fn each_annotation_enters_once(seed in any::<u64>(), n in 2usize..=5) {
        let s = SemiringSpec::integers();
        let (h, alpha) = query(seed, n, &["sum"]);
        prop_assume!(h.edges().len() <= PRIMES.len());
        let (rels, d) = instance(&h, seed ^ 4, &s);
        let ones: Vec<_> = rels.iter().map(|r| r.iter().fold(AnnotatedRelation::empty(r.schema().to_vec()).unwrap(), |mut acc, (t, _)| {
            acc.insert(t.clone(), 1, &s).unwrap();
            acc
        })).collect();
        let primed: Vec<_> = ones.iter().zip(PRIMES).map(|(r, p)| r.scale(&p, &s)).collect();
        let all: i64 = PRIMES[..rels.len()].iter().product();
        let p = plan(&h, &alpha, &PlanConfig::default()).unwrap();
        let (got, _) = run_with_stats(&p, &primed, &d, &s, &ExecOptions::default()).unwrap();
        let counts = naive_eval(&h, &alpha, &ones, Some(&d), &s).unwrap();
        prop_assert_eq!(got, counts.scale(&all, &s));
    }

    #[test]
    fn semijoins_only_change_counters(seed in any::<u64>(), n in 2usize..=5) {
        let s = SemiringSpec::min_plus();
        let (h, alpha) = query(seed, n, &["min"]);
        let (rels, d) = instance(&h, seed ^ 5, &s);
        let p = plan(&h, &alpha, &PlanConfig::default()).unwrap();
        let (on, _) = run_with_stats(&p, &rels, &d, &s, &ExecOptions { semijoins: true }).unwrap();
        let (off, _) = run_with_stats(&p, &rels, &d, &s, &ExecOptions { semijoins: false }).unwrap();
        prop_assert_eq!(on, off);
    }

    #[test]
    fn prec_extensions_are_equivalent(seed in any::<u64>(), n in 2usize..=5) {
        let (h, alpha) = query(seed, n, &["sum", "max", "min"]);
        let prec = compute_prec(&h, &alpha).unwrap();
        prop_assert!(prec.rounds() <= 2 * alpha.len() * alpha.len() + 1);
        for (a, b) in prec.pairs() {
            prop_assert!(!prec.precedes(b, a));
        }
        for beta in prec.linear_extensions().take(200) {
            prop_assert!(test_equivalence(&h, &alpha, &beta));
        }
    }

    #[test]
    fn planned_ghd_is_valid(seed in any::<u64>(), n in 2usize..=6) {
        let (h, alpha) = query(seed, n, &["sum", "max"]);
        let p = plan(&h, &alpha, &PlanConfig::default()).unwrap();
        prop_assert!(is_valid(&p.ghd, &compute_prec(&h, &alpha).unwrap()));
        prop_assert!(test_equivalence(&h, &alpha, &p.beta));
    }

    #[test]
    fn bag_width_is_monotone(seed in any::<u64>(), n in 2usize..=6) {
        let (h, _) = query(seed, n, &["sum"]);
        let m = FractionalCover::unit(&h);
        let verts: Vec<Attr> = h.vertices().iter().cloned().collect();
        let mut bag = ajar::AttrSet::new();
        let mut last = m.measure(&bag).unwrap();
        for v in verts {
            bag.insert(v);
            let w = m.measure(&bag).unwrap();
            prop_assert!(!w.compare(&last).is_lt());
            last = w;
        }
    }

    #[test]
    fn normalized_bags_come_from_old_bags(seed in any::<u64>(), n in 2usize..=4) {
        let (h, alpha) = query(seed, n, &["sum", "max"]);
        let prec = compute_prec(&h, &alpha).unwrap();
        for g in exhaustive_valid_ghds(&h, &alpha, n).unwrap().iter().take(10) {
            let d = normalize_decomposable(&h, &alpha, &prec, g).unwrap();
            prop_assert!(is_decomposable(&h, &alpha, &d));
            for b in d.bags() {
                prop_assert!(g.bags().iter().any(|o| b.is_subset(o)));
            }
        }
    }

    #[test]
    fn csv_round_trip(rows in proptest::collection::btree_map((0i64..5, "[a-z]{1,3}"), -50i64..50, 0..12)) {
        let s = SemiringSpec::integers();
        let schema = vec![Attr::new("A"), Attr::new("B")];
        let mut r = AnnotatedRelation::empty(schema.clone()).unwrap();
        for ((a, b), k) in rows {
            r.insert(vec![Value::Int(a), Value::Text(b.as_str().into())], k, &s).unwrap();
        }
        let text = relation_to_string(&r, &schema).unwrap();
        let back = read_relation(text.as_bytes(), &s).unwrap();
        prop_assert_eq!(&back, &r);
        prop_assert_eq!(relation_to_string(&back, &schema).unwrap(), text);
    }

    #[test]
    fn closure_is_idempotent(edges in proptest::collection::btree_map((0i64..6, 0i64..6), 0i64..10, 0..20)) {
        let s = SemiringSpec::min_plus();
        let mut r = AnnotatedRelation::empty(vec![Attr::new("X"), Attr::new("Y")]).unwrap();
        for ((a, b), w) in edges {
            r.insert(vec![Value::Int(a), Value::Int(b)], ExtInt::Finite(w), &s).unwrap();
        }
        let r = with_self_loops(&r, &s).unwrap();
        let once = transitive_closure(&r, &s, 8, ClosureShape::Chain).unwrap();
        let twice = transitive_closure(&once.relation, &s, 8, ClosureShape::Chain).unwrap();
        prop_assert_eq!(twice.rounds, 1);
        prop_assert_eq!(&twice.relation, &once.relation);
        let balanced = transitive_closure(&r, &s, 8, ClosureShape::Balanced).unwrap();
        prop_assert_eq!(&balanced.relation, &once.relation);
    }
}
