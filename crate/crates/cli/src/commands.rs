//! The `plan`, `run`, `equiv`, `closure` and `selftest` commands, as
//! functions from inputs to printable output.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use ajar::ghd::{Statistics, WidthMode};
use ajar::io::{parse_domains, parse_stats, read_relation_file, relation_to_string};
use ajar::oracle::{floyd_warshall, naive_eval, random_instance, random_query, semantic_equiv, RandomInstanceSpec, RandomQuerySpec};
use ajar::ordering::{compute_prec, explain_equivalence, test_equivalence, test_equivalence_product, EquivalenceVerdict};
use ajar::planner::{plan, run_with_stats, transitive_closure, with_self_loops, ClosureShape, Plan, PlanConfig};
use ajar::semiring::check_laws;
use ajar::{AjarError, AnnotatedRelation, Annotation, Attr, DomainRegistry, ExtInt, SemiringSpec, Value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::query::{parse_ordering, parse_query, ParseError, Query};
use crate::semirings::{builtin, from_config, AnySemiring};
use crate::with_semiring;

/// Exit status 1 for query and data errors, 2 for broken engine invariants.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<AjarError> for CliError {
    fn from(e: AjarError) -> Self {
        CliError { code: if e.is_internal() { 2 } else { 1 }, message: e.to_string() }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError { code: 1, message: format!("query {e}") }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError { code: 1, message: format!("{}: {e}", path.display()) })
}

/// Semiring for a query: an explicit config wins, then the query's
/// `@ semiring=` selector, then `int`.
pub fn select_semiring(q: &Query, config: Option<&Path>) -> CliResult<AnySemiring> {
    let s = match config {
        Some(p) => from_config(&read_text(p)?)?,
        None => builtin(q.semiring.as_deref().unwrap_or("int"))?,
    };
    with_semiring!(&s, s => {
        for (_, op) in q.ordering.items() {
            s.check_op(op)?;
        }
    });
    Ok(s)
}

/// Statistics keyed by relation name, expanded to the query's edge names.
fn edge_stats(q: &Query, stats: &Statistics) -> CliResult<Statistics> {
    q.edge_names()
        .into_iter()
        .zip(&q.body)
        .map(|(edge, atom)| match stats.get(&atom.relation) {
            Some(&n) => Ok((edge, n)),
            None => Err(CliError { code: 1, message: format!("stats: no cardinality for relation {}", atom.relation) }),
        })
        .collect()
}

fn make_plan(q: &Query, s: &AnySemiring, mode: WidthMode, stats: Option<&Statistics>) -> CliResult<Plan> {
    let stats = stats.map(|st| edge_stats(q, st)).transpose()?;
    if mode == WidthMode::Data && stats.is_none() {
        return Err(CliError { code: 1, message: "--mode data needs --stats".into() });
    }
    let config = PlanConfig {
        mode,
        stats,
        multiply_idempotent: with_semiring!(s, s => s.is_multiply_idempotent()),
        ..PlanConfig::default()
    };
    Ok(plan(&q.hypergraph(), &q.ordering, &config)?)
}

pub struct PlanArgs<'a> {
    pub query: &'a Path,
    pub stats: Option<&'a Path>,
    pub mode: WidthMode,
    pub semiring_config: Option<&'a Path>,
}

/// Plan JSON, pretty-printed with a trailing newline.
pub fn cmd_plan(a: &PlanArgs) -> CliResult<String> {
    let q = parse_query(&read_text(a.query)?)?;
    let s = select_semiring(&q, a.semiring_config)?;
    let stats = a.stats.map(|p| read_text(p).and_then(|t| Ok(parse_stats(&t)?))).transpose()?;
    let p = make_plan(&q, &s, a.mode, stats.as_ref())?;
    let mut out = serde_json::to_string_pretty(&p.to_json()).expect("plan JSON");
    out.push('\n');
    Ok(out)
}

/// One relation per atom, read from `<dir>/<relation>.csv`, with its
/// columns renamed positionally to the atom's attributes.
pub fn load_relations<K: Annotation>(q: &Query, dir: &Path, s: &SemiringSpec<K>) -> CliResult<Vec<AnnotatedRelation<K>>> {
    let mut files: BTreeMap<&str, AnnotatedRelation<K>> = BTreeMap::new();
    let mut out = Vec::new();
    for atom in &q.body {
        if !files.contains_key(atom.relation.as_str()) {
            let path = dir.join(format!("{}.csv", atom.relation));
            let r = read_relation_file(&path, s).map_err(|e| {
                let shown = path.display().to_string();
                let text = e.to_string();
                let message = if text.contains(&shown) { text } else { format!("{shown}: {text}") };
                CliError { code: 1, message }
            })?;
            files.insert(&atom.relation, r);
        }
        let r = &files[atom.relation.as_str()];
        if r.schema().len() != atom.attrs.len() {
            return Err(CliError {
                code: 1,
                message: format!(
                    "{}.csv has {} columns but the atom {}({}) has {}",
                    atom.relation,
                    r.schema().len(),
                    atom.relation,
                    atom.attrs.iter().map(|a| a.as_str()).collect::<Vec<_>>().join(","),
                    atom.attrs.len()
                ),
            });
        }
        let map: BTreeMap<Attr, Attr> = r.schema().iter().cloned().zip(atom.attrs.iter().cloned()).collect();
        out.push(r.rename(&map)?);
    }
    Ok(out)
}

pub struct RunArgs<'a> {
    pub query: &'a Path,
    pub data: &'a Path,
    pub domains: Option<&'a Path>,
    pub explain: bool,
    pub semiring_config: Option<&'a Path>,
}

pub struct RunOutput {
    pub csv: String,
    /// Plan and counter summary when `explain` was set.
    pub explain: Option<String>,
}

pub fn cmd_run(a: &RunArgs) -> CliResult<RunOutput> {
    let q = parse_query(&read_text(a.query)?)?;
    let s = select_semiring(&q, a.semiring_config)?;
    let domains_text = a.domains.map(read_text).transpose()?;
    let p = make_plan(&q, &s, WidthMode::Unit, None)?;
    with_semiring!(&s, s => run_loaded(&q, &p, a, domains_text.as_deref(), s))
}

fn run_loaded<K: Annotation>(
    q: &Query,
    p: &Plan,
    a: &RunArgs,
    domains_text: Option<&str>,
    s: &SemiringSpec<K>,
) -> CliResult<RunOutput> {
    let rels = load_relations(q, a.data, s)?;
    let domains = match domains_text {
        Some(t) => {
            let refs: Vec<&AnnotatedRelation<K>> = rels.iter().collect();
            parse_domains(t, &refs)?
        }
        None => DomainRegistry::new(),
    };
    let (out, stats) = run_with_stats(p, &rels, &domains, s, &Default::default())?;
    let csv = relation_to_string(&out, &q.head)?;
    let explain = a.explain.then(|| {
        let mut t = String::new();
        t.push_str(&format!("query ordering: {}\n", p.alpha));
        t.push_str(&format!("plan ordering: {}\n", p.beta));
        t.push_str(&format!("width: {}\n", p.width.overall));
        for n in p.ghd.preorder() {
            let bag: Vec<&str> = p.ghd.bag(n).iter().map(|a| a.as_str()).collect();
            let parent = p.ghd.parent(n).map(|x| x.to_string()).unwrap_or_else(|| "-".into());
            t.push_str(&format!("node {n} parent {parent} bag {{{}}} width {}\n", bag.join(","), p.width.per_bag[n]));
        }
        for b in &stats.bags {
            t.push_str(&format!(
                "bag {}: input {} partial {} output {}\n",
                b.node, b.input_tuples, b.partial_bindings, b.output_tuples
            ));
        }
        t.push_str(&format!("semijoin removed: {}\n", stats.semijoin_removed));
        t.push_str(&format!("intermediate tuples: {}\n", stats.intermediate_tuples()));
        t
    });
    Ok(RunOutput { csv, explain })
}

pub struct EquivOutput {
    pub equivalent: bool,
    pub text: String,
}

/// Verdict for the query's ordering against `ordering`, with the first
/// violated precedence constraint when they differ.
pub fn cmd_equiv(query: &Path, ordering: &str) -> CliResult<EquivOutput> {
    let q = parse_query(&read_text(query)?)?;
    let beta = parse_ordering(ordering)?;
    let h = q.hypergraph();
    let alpha = &q.ordering;
    let equivalent = if alpha.has_products() {
        test_equivalence_product(&h, alpha, &beta)
    } else {
        test_equivalence(&h, alpha, &beta)
    };
    let mut text = format!("equivalent: {equivalent}\n");
    if !equivalent {
        let prec_line = if alpha.has_products() || !alpha.same_signature(&beta) {
            None
        } else {
            compute_prec(&h, alpha)?
                .first_violation(&beta)
                .map(|(a, b, rule)| format!("violated: {a} must precede {b} ({rule})\n"))
        };
        match prec_line {
            Some(l) => text.push_str(&l),
            None => match explain_equivalence(&h, alpha, &beta) {
                EquivalenceVerdict::Mismatch(m) => text.push_str(&format!("violated: {m}\n")),
                EquivalenceVerdict::Conflict { earlier, later } => text.push_str(&format!(
                    "violated: {later} must precede {earlier} (different operators joined by a path)\n"
                )),
                EquivalenceVerdict::Equivalent => {}
            },
        }
    }
    Ok(EquivOutput { equivalent, text })
}

pub struct ClosureOutput {
    pub csv: String,
    pub rounds: usize,
}

pub struct ClosureArgs<'a> {
    pub relation: &'a Path,
    pub semiring: &'a str,
    pub max_rounds: usize,
    pub shape: ClosureShape,
    /// Add a `one`-annotated self-loop on every node first.
    pub reflexive: bool,
}

pub fn cmd_closure(a: &ClosureArgs) -> CliResult<ClosureOutput> {
    let s = builtin(a.semiring)?;
    let (max_rounds, shape) = (a.max_rounds, a.shape);
    with_semiring!(&s, s => {
        let mut r = read_relation_file(a.relation, s)?;
        if a.reflexive {
            r = with_self_loops(&r, s)?;
        }
        let c = transitive_closure(&r, s, max_rounds, shape)?;
        Ok(ClosureOutput { csv: relation_to_string(&c.relation, c.relation.schema())?, rounds: c.rounds })
    })
}

pub struct SelftestOutput {
    pub passed: bool,
    pub text: String,
}

struct Suite {
    name: &'static str,
    cases: usize,
    failures: Vec<String>,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Suite { name, cases: 0, failures: Vec::new() }
    }

    fn record(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok && self.failures.len() < 5 {
            self.failures.push(detail());
        }
    }

    fn line(&self) -> String {
        let mut l = format!(
            "{} {}: {} cases",
            if self.failures.is_empty() { "PASS" } else { "FAIL" },
            self.name,
            self.cases
        );
        for f in &self.failures {
            l.push_str(&format!("\n    {f}"));
        }
        l
    }
}

fn plan_vs_naive<K: Annotation>(suite: &mut Suite, s: &SemiringSpec<K>, ops: &[&str], trials: usize, rng: &mut ChaCha8Rng) {
    for _ in 0..trials {
        let n = rng.gen_range(2..=5);
        let (h, alpha) = random_query(&RandomQuerySpec::new(n, ops), rng);
        let spec = RandomInstanceSpec { domain_size: rng.gen_range(2..=3), density: 0.6, seed: rng.gen() };
        let (rels, domains) = random_instance(&h, &spec, s);
        let config = PlanConfig { multiply_idempotent: s.is_multiply_idempotent(), ..PlanConfig::default() };
        let got = plan(&h, &alpha, &config).and_then(|p| run_with_stats(&p, &rels, &domains, s, &Default::default()));
        let want = naive_eval(&h, &alpha, &rels, Some(&domains), s);
        let ok = matches!((&got, &want), (Ok((g, _)), Ok(w)) if g == w);
        suite.record(ok, || format!("{} on {:?}: {:?}", alpha, h.edge_sets(), got.err()));
    }
}

fn beta_semantics<K: Annotation>(suite: &mut Suite, s: &SemiringSpec<K>, ops: &[&str], trials: usize, rng: &mut ChaCha8Rng) {
    for _ in 0..trials {
        let n = rng.gen_range(2..=4);
        let (h, alpha) = random_query(&RandomQuerySpec::new(n, ops), rng);
        let r = plan(&h, &alpha, &PlanConfig::default())
            .and_then(|p| semantic_equiv(&h, &alpha, &p.beta, s, 3, rng.gen()));
        let ok = matches!(&r, Ok(v) if v.is_equiv_likely());
        suite.record(ok, || format!("{alpha} on {:?}", h.edge_sets()));
    }
}

/// Oracle suites over random queries and instances.
pub fn cmd_selftest(seed: u64, trials: usize) -> SelftestOutput {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut suites = Vec::new();

    let mut laws = Suite::new("semiring laws");
    for name in crate::semirings::BUILTIN_NAMES {
        let s = builtin(name).expect("built-in");
        let report = with_semiring!(&s, s => check_laws(s, 1000, seed));
        laws.record(report.holds(), || format!("{name}: {}", report.violations.join("; ")));
    }
    suites.push(laws);

    let mut pn = Suite::new("planned run equals naive evaluation");
    plan_vs_naive(&mut pn, &SemiringSpec::integers(), &["sum"], trials, &mut rng);
    plan_vs_naive(&mut pn, &SemiringSpec::nonneg_rationals(), &["sum", "max"], trials, &mut rng);
    plan_vs_naive(&mut pn, &SemiringSpec::min_plus(), &["min"], trials, &mut rng);
    suites.push(pn);

    let mut pp = Suite::new("product plans equal naive evaluation");
    plan_vs_naive(&mut pp, &SemiringSpec::boolean(), &["max", "prod"], trials, &mut rng);
    suites.push(pp);

    let mut eq = Suite::new("plan ordering agrees with query ordering on instances");
    beta_semantics(&mut eq, &SemiringSpec::nonneg_rationals(), &["sum", "max"], trials, &mut rng);
    suites.push(eq);

    let mut cl = Suite::new("min-plus closure equals Floyd-Warshall");
    let s = SemiringSpec::min_plus();
    for _ in 0..trials {
        let v = rng.gen_range(1..=8);
        let mut r = AnnotatedRelation::empty(vec![Attr::new("X"), Attr::new("Y")]).expect("schema");
        for a in 0..v {
            for b in 0..v {
                if rng.gen_bool(0.3) {
                    r.insert(vec![Value::Int(a), Value::Int(b)], ExtInt::Finite(rng.gen_range(0..10)), &s)
                        .expect("fresh tuple");
                }
            }
        }
        let r = match with_self_loops(&r, &s) {
            Ok(r) => r,
            Err(e) => {
                cl.record(false, || e.to_string());
                continue;
            }
        };
        let got = transitive_closure(&r, &s, 8, ClosureShape::Chain).map(|c| c.relation);
        let want = floyd_warshall(&r);
        let ok = matches!((&got, &want), (Ok(g), Ok(w)) if g == w);
        cl.record(ok, || format!("{v} nodes, {} edges", r.len()));
    }
    suites.push(cl);

    let passed = suites.iter().all(|s| s.failures.is_empty());
    let mut text: String = suites.iter().map(|s| s.line() + "\n").collect();
    text.push_str(if passed { "selftest passed\n" } else { "selftest FAILED\n" });
    SelftestOutput { passed, text }
}
