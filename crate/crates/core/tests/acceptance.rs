//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the test
//! fails if any criterion does.

use std::collections::BTreeSet;
use std::io::Write;
use std::time::{Duration, Instant};

use ajar::exec::{aggro_ghd_join, execute_aghd, generic_join, left_deep_counts};
use ajar::ghd::{
    product_partition_hypergraph, stitched_decomposition, width, Aghd, BagMeasure, FractionalCover, Ghd,
    SearchConfig, Width,
};
use ajar::oracle::{
    exhaustive_valid_ghds, floyd_warshall, naive_eval, random_instance, random_query, RandomInstanceSpec,
    RandomQuerySpec,
};
use ajar::ordering::{compute_prec, test_equivalence};
use ajar::planner::{plan, run_with_stats, transitive_closure, ClosureShape, PlanConfig};
use ajar::semiring::{check_laws, DomainKind};
use ajar::value::attrs;
use ajar::{
    AggregationOrdering, AnnotatedRelation, Annotation, Attr, DomainRegistry, ExtInt, Hypergraph, Rational,
    SemiringSpec, Value,
};
use itertools::Itertools;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Wall-clock budget for the worked examples.
const WORKED_EXAMPLE_BUDGET: Duration = Duration::from_secs(1);
/// Log-log slope bounds for the parity-cycle family.
const PLANNED_SLOPE_MAX: f64 = 2.0;
const NAIVE_SLOPE_MIN: f64 = 2.5;
const SLOPE_GAP_MIN: f64 = 0.4;
const LAW_TRIPLES: usize = 1000;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ord(p: &[(&str, &str)]) -> AggregationOrdering {
    AggregationOrdering::from_pairs(p).unwrap()
}

fn hg(sets: &[&[&str]]) -> Hypergraph {
    Hypergraph::from_sets(sets).unwrap()
}

fn ints(v: &[i64]) -> Vec<Value> {
    v.iter().map(|&x| Value::Int(x)).collect()
}

fn rat(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn rel<K: Annotation>(schema: &[&str], rows: &[(&[i64], K)], s: &SemiringSpec<K>) -> AnnotatedRelation<K> {
    AnnotatedRelation::from_rows(
        schema.iter().map(|a| Attr::new(a)).collect(),
        rows.iter().map(|(t, k)| (ints(t), k.clone())),
        s,
    )
    .unwrap()
}

/// `({0,1,2,...}, gcd, lcm)`: idempotent multiplication, and distinct
/// primes make products readable as sets of symbols.
fn gcd_lcm() -> SemiringSpec<i64> {
    SemiringSpec::new("gcd-lcm", DomainKind::Integer, 0, 1, |a: &i64, b: &i64| a.lcm(b), true)
        .with_op("max", |a: &i64, b: &i64| a.gcd(b))
        .unwrap()
}

fn product_example<K: Annotation>(s: &SemiringSpec<K>, x: K, y: K, p: K, q: K) -> Result<(AnnotatedRelation<K>, AnnotatedRelation<K>), String> {
    let h = hg(&[&["A", "B"], &["B", "C"]]);
    let alpha = ord(&[("B", "prod")]);
    let r = rel(&["A", "B"], &[(&[0, 0], x), (&[0, 1], y)], s);
    let t = rel(&["B", "C"], &[(&[0, 1], p), (&[1, 1], q)], s);
    let mut d = DomainRegistry::new();
    for a in ["A", "B", "C"] {
        d.declare(Attr::new(a), ints(&[0, 1]));
    }
    let tree = Ghd::from_parents(vec![attrs(&["A", "C"]), attrs(&["A", "B"]), attrs(&["B", "C"])], vec![None, Some(0), Some(0)])
        .map_err(|e| e.to_string())?;
    let aghd = Aghd::from_tree(&h, &alpha, &tree).map_err(|e| e.to_string())?;
    let rels = vec![r, t];
    let got = execute_aghd(&h, &aghd, &alpha, &rels, &d, s).map_err(|e| e.to_string())?;
    let want = naive_eval(&h, &alpha, &rels, Some(&d), s).map_err(|e| e.to_string())?;
    Ok((got, want))
}

fn c1_worked_examples() -> Outcome {
    let start = Instant::now();
    let zs = SemiringSpec::integers();
    let h = hg(&[&["A", "B"], &["B", "C"]]);
    let r = rel(&["A", "B"], &[(&[1, 3], 3), (&[1, 2], 1), (&[1, 1], 2)], &zs);
    let s = rel(&["B", "C"], &[(&[1, 1], 4), (&[3, 3], 6)], &zs);
    let join = generic_join(&h, &[r.clone(), s.clone()], &zs).map_err(|e| e.to_string())?;
    let want = rel(&["A", "B", "C"], &[(&[1, 3, 3], 18), (&[1, 1, 1], 8)], &zs);
    ensure(join == want, || format!("first example join {join:?}"))?;
    let alpha = ord(&[("C", "sum"), ("B", "sum")]);
    let p = plan(&h, &alpha, &PlanConfig::default()).map_err(|e| e.to_string())?;
    let (out, _) = run_with_stats(&p, &[r, s], &DomainRegistry::new(), &zs, &Default::default()).map_err(|e| e.to_string())?;
    ensure(out == rel(&["A"], &[(&[1], 26)], &zs), || format!("first example result {out:?}"))?;

    let qs = SemiringSpec::nonneg_rationals();
    let r = rel(&["A", "B"], &[(&[1, 1], rat(1)), (&[2, 1], rat(2))], &qs);
    let s = rel(&["B", "C"], &[(&[1, 1], rat(3)), (&[1, 2], rat(4))], &qs);
    let join = generic_join(&h, &[r, s.clone()], &qs).map_err(|e| e.to_string())?;
    let want = rel(
        &["A", "B", "C"],
        &[(&[1, 1, 1], rat(3)), (&[1, 1, 2], rat(4)), (&[2, 1, 1], rat(6)), (&[2, 1, 2], rat(8))],
        &qs,
    );
    ensure(join == want, || format!("operator figure join {join:?}"))?;
    let sc = naive_eval(&hg(&[&["B", "C"]]), &ord(&[("C", "sum")]), &[s], None, &qs).map_err(|e| e.to_string())?;
    ensure(sc == rel(&["B"], &[(&[1], rat(7))], &qs), || format!("sum over C of S {sc:?}"))?;

    let g = gcd_lcm();
    let (got, want) = product_example(&g, 2, 5, 3, 7)?;
    ensure(got == want, || format!("product example: aghd {got:?} vs naive {want:?}"))?;
    ensure(got == rel(&["A", "C"], &[(&[0, 1], 210)], &g), || format!("product example symbolic result {got:?}"))?;
    let b = SemiringSpec::boolean();
    for bits in 0..16u32 {
        let v: Vec<bool> = (0..4).map(|i| bits >> i & 1 == 1).collect();
        let (got, want) = product_example(&b, v[0], v[1], v[2], v[3])?;
        let all = v.iter().all(|&x| x);
        let expect = if all { rel(&["A", "C"], &[(&[0, 1], true)], &b) } else { AnnotatedRelation::empty(vec![Attr::new("A"), Attr::new("C")]).unwrap() };
        ensure(got == want && got == expect, || format!("boolean product example at {v:?}: {got:?}"))?;
    }
    let hp = product_partition_hypergraph(
        &h,
        &ord(&[("B", "prod")]),
        &Aghd::from_tree(&h, &ord(&[("B", "prod")]), &Ghd::from_parents(vec![attrs(&["A", "C"]), attrs(&["A", "B"]), attrs(&["B", "C"])], vec![None, Some(0), Some(0)]).unwrap())
            .map_err(|e| e.to_string())?
            .partition,
    )
    .map_err(|e| e.to_string())?;
    ensure(hp.vertices().len() == 4, || format!("partition hypergraph {:?}", hp.edge_sets()))?;
    let elapsed = start.elapsed();
    ensure(elapsed < WORKED_EXAMPLE_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("joins 18/8 and 3/4/6/8, results 26 and 7, product 210 plus 16 boolean cases, {elapsed:?}"))
}

/// Product-free queries with at most four attributes.
fn equivalence_suite() -> Vec<(Hypergraph, AggregationOrdering)> {
    let mut out = vec![
        (hg(&[&["A", "B"], &["B", "C"]]), ord(&[("A", "sum"), ("C", "max")])),
        (hg(&[&["A", "B"], &["B", "C"]]), ord(&[("B", "min"), ("A", "max"), ("C", "sum")])),
        (hg(&[&["A", "B"], &["B", "C"]]), ord(&[("A", "sum"), ("B", "max"), ("C", "max")])),
        (hg(&[&["A", "B"], &["B", "C"]]), ord(&[("B", "max"), ("A", "sum"), ("C", "max")])),
        (hg(&[&["A", "B"], &["B", "D"], &["C", "D"]]), ord(&[("A", "sum"), ("B", "max"), ("C", "max"), ("D", "sum")])),
        (hg(&[&["A", "B"], &["A", "C"]]), ord(&[("A", "sum"), ("B", "max"), ("C", "sum")])),
        (hg(&[&["A", "B"], &["B", "C"], &["A", "C"]]), ord(&[("A", "sum"), ("B", "max"), ("C", "min")])),
        (hg(&[&["A", "B", "C"], &["C", "D"]]), ord(&[("D", "max"), ("A", "sum"), ("B", "sum")])),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    while out.len() < 32 {
        let n = rng.gen_range(2..=4);
        let (h, a) = random_query(&RandomQuerySpec::new(n, &["sum", "max", "min"]), &mut rng);
        out.push((h, a));
    }
    out
}

fn c2_equivalence_characterization() -> Outcome {
    let suite = equivalence_suite();
    let mut checked = 0;
    for (h, alpha) in &suite {
        let prec = compute_prec(h, alpha).map_err(|e| e.to_string())?;
        let extensions: BTreeSet<String> = prec.linear_extensions().map(|b| b.to_string()).collect();
        let accepted: BTreeSet<String> = alpha
            .items()
            .iter()
            .cloned()
            .permutations(alpha.len())
            .map(|items| AggregationOrdering::new(items).unwrap())
            .filter(|b| test_equivalence(h, alpha, b))
            .map(|b| b.to_string())
            .collect();
        checked += 1;
        ensure(extensions == accepted, || {
            format!("{alpha:?} on {:?}: extensions {extensions:?} vs accepted {accepted:?}", h.edge_sets())
        })?;
    }
    Ok(format!("{checked} queries, every permutation"))
}

fn pairs(p: &[(&str, &str)]) -> BTreeSet<(Attr, Attr)> {
    p.iter().map(|(a, b)| (Attr::new(a), Attr::new(b))).collect()
}

fn c3_prec_vectors() -> Outcome {
    let cases = [
        (hg(&[&["A", "B"], &["B", "C"]]), ord(&[("A", "sum"), ("B", "max"), ("C", "max")]), pairs(&[("A", "B"), ("A", "C")])),
        (hg(&[&["A", "B"], &["B", "C"]]), ord(&[("B", "max"), ("A", "sum"), ("C", "max")]), pairs(&[("B", "A")])),
        (
            hg(&[&["A", "B"], &["B", "D"], &["C", "D"]]),
            ord(&[("A", "sum"), ("B", "max"), ("C", "max"), ("D", "sum")]),
            pairs(&[("A", "B"), ("A", "C"), ("A", "D"), ("B", "D"), ("C", "D")]),
        ),
    ];
    for (h, alpha, want) in &cases {
        let got = compute_prec(h, alpha).map_err(|e| e.to_string())?;
        ensure(got.pairs() == want, || format!("{alpha:?}: got {:?}, want {want:?}", got.pairs()))?;
    }
    Ok("3 examples exact".into())
}

fn c4_faq_incompleteness() -> Outcome {
    let h = hg(&[&["A", "B"], &["A", "C"]]);
    let alpha = ord(&[("A", "sum"), ("B", "max"), ("C", "sum")]);
    let ext: BTreeSet<String> =
        compute_prec(&h, &alpha).map_err(|e| e.to_string())?.linear_extensions().map(|b| b.to_string()).collect();
    let want: BTreeSet<String> =
        ["sum[A] max[B] sum[C]", "sum[A] sum[C] max[B]", "sum[C] sum[A] max[B]"].iter().map(|s| s.to_string()).collect();
    ensure(ext == want, || format!("extensions {ext:?}"))?;
    let accepted = alpha
        .items()
        .iter()
        .cloned()
        .permutations(3)
        .filter(|items| test_equivalence(&h, &alpha, &AggregationOrdering::new(items.clone()).unwrap()))
        .count();
    ensure(accepted == 3, || format!("{accepted} permutations accepted"))?;
    Ok("ABC, ACB, CAB".into())
}

fn soundness_sweep<K: Annotation>(s: &SemiringSpec<K>, ops: &[&str], want: usize, products: bool, rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let mut done = 0;
    while done < want {
        let n = rng.gen_range(2..=5);
        let (h, alpha) = random_query(&RandomQuerySpec::new(n, ops), rng);
        if products != alpha.has_products() {
            continue;
        }
        let spec = RandomInstanceSpec { domain_size: rng.gen_range(2..=3), density: 0.6, seed: rng.gen() };
        let (rels, d) = random_instance(&h, &spec, s);
        let config = PlanConfig { multiply_idempotent: s.is_multiply_idempotent(), ..PlanConfig::default() };
        let p = plan(&h, &alpha, &config).map_err(|e| format!("{alpha:?} on {:?}: {e}", h.edge_sets()))?;
        let got = match &p.aghd {
            Some(aghd) => execute_aghd(&h, aghd, &p.beta, &rels, &d, s),
            None => aggro_ghd_join(&h, &p.ghd, &p.beta, &rels, Some(&d), s),
        }
        .map_err(|e| format!("{alpha:?} on {:?}: {e}", h.edge_sets()))?;
        let want = naive_eval(&h, &alpha, &rels, Some(&d), s).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("{} {alpha:?} on {:?}: {got:?} vs {want:?}", s.name(), h.edge_sets()))?;
        done += 1;
    }
    Ok(done)
}

fn c5_semantic_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = soundness_sweep(&SemiringSpec::integers(), &["sum"], 70, false, &mut rng)?;
    let b = soundness_sweep(&SemiringSpec::nonneg_rationals(), &["sum", "max"], 70, false, &mut rng)?;
    let c = soundness_sweep(&SemiringSpec::min_plus(), &["min"], 70, false, &mut rng)?;
    let d = soundness_sweep(&SemiringSpec::boolean(), &["max", "prod"], 100, true, &mut rng)?;
    Ok(format!("{} semiring pairs, {d} product pairs", a + b + c))
}

fn c6_decomposition_optimality() -> Outcome {
    let mut suite: Vec<(Hypergraph, AggregationOrdering)> = equivalence_suite();
    suite.push((hg(&[&["A", "B1"], &["A", "B2"], &["A", "B3"], &["A", "B4"]]), ord(&[("B1", "sum"), ("B2", "sum"), ("B3", "sum"), ("B4", "sum")])));
    suite.push((hg(&[&["A", "B"], &["B", "C"], &["C", "D"], &["D", "E"], &["E", "A"]]), ord(&[("B", "sum"), ("D", "max")])));
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..12 {
        suite.push(random_query(&RandomQuerySpec::new(5, &["sum", "max"]), &mut rng));
    }
    let mut checked = 0;
    for (h, alpha) in &suite {
        let m = FractionalCover::unit(h);
        let st = stitched_decomposition(h, alpha, &m, &SearchConfig::default()).map_err(|e| e.to_string())?;
        let identity = st.part_widths.iter().chain(&st.leaf_widths).cloned().fold(Width::exact(0, 1), Width::max);
        ensure(st.width == identity, || format!("{alpha:?}: stitched {:?} vs parts {:?}", st.width, st.part_widths))?;
        let all = exhaustive_valid_ghds(h, alpha, h.vertices().len()).map_err(|e| e.to_string())?;
        let best = all
            .iter()
            .map(|g| width(g, &m).map(|r| r.overall))
            .collect::<ajar::Result<Vec<_>>>()
            .map_err(|e| e.to_string())?
            .into_iter()
            .reduce(|a, b| if b.compare(&a).is_lt() { b } else { a })
            .ok_or_else(|| format!("no valid GHD for {alpha:?}"))?;
        ensure(matches!((&st.width, &best), (Width::Exact(a), Width::Exact(b)) if a == b), || {
            format!("{alpha:?} on {:?}: stitched {:?}, exhaustive {best:?}", h.edge_sets(), st.width)
        })?;
        checked += 1;
    }
    Ok(format!("{checked} queries, widths equal exhaustive minimum"))
}

fn cycle(n: usize) -> Hypergraph {
    let names: Vec<String> = (1..=n).map(|i| format!("A{i}")).collect();
    let edges: Vec<Vec<&str>> = (0..n).map(|i| vec![names[i].as_str(), names[(i + 1) % n].as_str()]).collect();
    let refs: Vec<&[&str]> = edges.iter().map(|e| e.as_slice()).collect();
    hg(&refs)
}

fn c7_width_vectors() -> Outcome {
    let h = hg(&[&["A", "B"], &["B", "C"]]);
    let p = plan(&h, &ord(&[("B", "sum"), ("C", "sum")]), &PlanConfig::default()).map_err(|e| e.to_string())?;
    ensure(p.width.overall == Width::exact(1, 1), || format!("two-hop width {:?}", p.width.overall))?;
    let abc = FractionalCover::unit(&h).measure(&attrs(&["A", "B", "C"])).map_err(|e| e.to_string())?;
    ensure(abc == Width::exact(2, 1), || format!("output-addition bag width {abc:?}"))?;

    let c6 = cycle(6);
    let p = plan(&c6, &AggregationOrdering::empty(), &PlanConfig::default()).map_err(|e| e.to_string())?;
    ensure(p.width.overall == Width::exact(2, 1), || format!("cycle width {:?}", p.width.overall))?;

    let tri = hg(&[&["A", "B"], &["B", "C"], &["A", "C"]]);
    let p = plan(&tri, &AggregationOrdering::empty(), &PlanConfig::default()).map_err(|e| e.to_string())?;
    ensure(p.ghd.len() == 1 && p.width.overall == Width::exact(3, 2), || format!("triangle {:?}", p.width.overall))?;

    let n = 6;
    let leaves: Vec<String> = (1..=n).map(|i| format!("B{i}")).collect();
    let edges: Vec<Vec<&str>> = leaves.iter().map(|b| vec!["A", b.as_str()]).collect();
    let refs: Vec<&[&str]> = edges.iter().map(|e| e.as_slice()).collect();
    let star = hg(&refs);
    let alpha = AggregationOrdering::new(leaves.iter().map(|b| (Attr::new(b), ajar::AggOp::named("sum"))).collect()).unwrap();
    let st = stitched_decomposition(&star, &alpha, &FractionalCover::unit(&star), &SearchConfig::default()).map_err(|e| e.to_string())?;
    ensure(st.characteristic.len() == n + 1, || format!("star gave {} hypergraphs", st.characteristic.len()))?;
    Ok("1, 2, 2, 3/2, star n+1".into())
}

/// Parity cycle: `A_i A_{i+1}` joins equal parities, `A_n A_1` opposite ones.
fn parity_cycle(n: usize, big_n: usize, s: &SemiringSpec<i64>) -> (Hypergraph, Vec<AnnotatedRelation<i64>>) {
    let h = cycle(n);
    let m = 2 * (big_n as f64).sqrt().floor() as i64;
    let rels = h
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let same = i + 1 < n;
            let mut r = AnnotatedRelation::empty(e.attrs.clone()).unwrap();
            for a in 1..=m {
                for b in 1..=m {
                    if ((a - b) % 2 == 0) == same {
                        r.insert(ints(&[a, b]), 1, s).unwrap();
                    }
                }
            }
            r
        })
        .collect();
    (h, rels)
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

fn c8_output_sensitivity() -> Outcome {
    let s = SemiringSpec::integers();
    let sizes = [16usize, 64, 256];
    let mut planned = Vec::new();
    let mut naive = Vec::new();
    for &n in &sizes {
        let (h, rels) = parity_cycle(6, n, &s);
        let p = plan(&h, &AggregationOrdering::empty(), &PlanConfig::default()).map_err(|e| e.to_string())?;
        ensure(p.width.overall == Width::exact(2, 1), || format!("width {:?}", p.width.overall))?;
        let (out, stats) = run_with_stats(&p, &rels, &DomainRegistry::new(), &s, &Default::default()).map_err(|e| e.to_string())?;
        ensure(out.is_empty(), || "parity cycle output is not empty".into())?;
        planned.push(stats.intermediate_tuples() as f64);
        naive.push(left_deep_counts(&rels).iter().sum::<u64>() as f64);
    }
    let xs: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    let (sp, sn) = (slope(&xs, &planned), slope(&xs, &naive));
    let detail = format!("planned slope {sp:.3} ({planned:?}), left-deep slope {sn:.3} ({naive:?})");
    ensure(sp <= PLANNED_SLOPE_MAX && sn >= NAIVE_SLOPE_MIN && sn - sp >= SLOPE_GAP_MIN, || detail.clone())?;
    Ok(detail)
}

fn c9_transitive_closure() -> Outcome {
    let s = SemiringSpec::min_plus();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut max_rounds = 0;
    for _ in 0..50 {
        let v = rng.gen_range(1..=8i64);
        let mut r = AnnotatedRelation::empty(vec![Attr::new("X"), Attr::new("Y")]).unwrap();
        for a in 0..v {
            r.insert(ints(&[a, a]), ExtInt::Finite(0), &s).unwrap();
            for b in 0..v {
                if a != b && rng.gen_bool(0.3) {
                    r.insert(ints(&[a, b]), ExtInt::Finite(rng.gen_range(0..10)), &s).unwrap();
                }
            }
        }
        let c = transitive_closure(&r, &s, 16, ClosureShape::Chain).map_err(|e| e.to_string())?;
        let fw = floyd_warshall(&r).map_err(|e| e.to_string())?;
        ensure(c.relation == fw, || format!("{v} nodes: closure differs from Floyd-Warshall"))?;
        let bound = (v as f64).log2().ceil() as usize + 1;
        ensure(c.rounds <= bound, || format!("{v} nodes: {} rounds, bound {bound}", c.rounds))?;
        max_rounds = max_rounds.max(c.rounds);
    }
    Ok(format!("50 graphs, at most {max_rounds} rounds"))
}

fn c10_semiring_laws() -> Outcome {
    let reports = [
        ("int", check_laws(&SemiringSpec::integers(), LAW_TRIPLES, 10)),
        ("rational", check_laws(&SemiringSpec::nonneg_rationals(), LAW_TRIPLES, 11)),
        ("minplus", check_laws(&SemiringSpec::min_plus(), LAW_TRIPLES, 12)),
        ("bool", check_laws(&SemiringSpec::boolean(), LAW_TRIPLES, 13)),
    ];
    for (name, r) in &reports {
        ensure(r.holds() && r.triples == LAW_TRIPLES, || format!("{name}: {:?}", r.violations))?;
    }
    let b = SemiringSpec::boolean();
    ensure(b.is_multiply_idempotent() && [false, true].iter().all(|x| b.mul(x, x) == *x), || "boolean idempotence".into())?;
    Ok(format!("4 semirings x {LAW_TRIPLES} triples, boolean multiply idempotent"))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 worked examples", c1_worked_examples),
        ("2 equivalence characterization", c2_equivalence_characterization),
        ("3 PREC vectors", c3_prec_vectors),
        ("4 FAQ-incompleteness vector", c4_faq_incompleteness),
        ("5 semantic soundness", c5_semantic_soundness),
        ("6 decomposition optimality", c6_decomposition_optimality),
        ("7 width vectors", c7_width_vectors),
        ("8 output sensitivity", c8_output_sensitivity),
        ("9 transitive closure", c9_transitive_closure),
        ("10 semiring laws", c10_semiring_laws),
    ];
    let mut failed = Vec::new();
    let mut err = std::io::stderr();
    for (name, f) in criteria {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let line = match &outcome {
            Ok(d) => format!("PASS criterion {name}: {d}\n"),
            Err(d) => {
                failed.push(name);
                format!("FAIL criterion {name}: {d}\n")
            }
        };
        // Written to the raw handle so the line shows without --nocapture.
        err.write_all(line.as_bytes()).unwrap();
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
