use ajar::oracle::{random_query, RandomQuerySpec};
use ajar_cli::query::{parse_query, Atom, Query};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn print_parse_round_trip(seed in any::<u64>(), n in 1usize..=6, tagged in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (h, ordering) = random_query(&RandomQuerySpec::new(n, &["sum", "max", "min"]), &mut rng);
        let q = Query {
            name: "Q".into(),
            head: h.vertices().iter().filter(|a| ordering.position(a).is_none()).cloned().collect(),
            ordering,
            body: h.edges().iter().enumerate().map(|(i, e)| Atom { relation: format!("R{i}"), attrs: e.attrs.clone() }).collect(),
            semiring: tagged.then(|| "rational".to_string()),
        };
        let text = q.to_string();
        let back = parse_query(&text).unwrap();
        prop_assert_eq!(&back, &q);
        prop_assert_eq!(back.to_string(), text);
    }
}
