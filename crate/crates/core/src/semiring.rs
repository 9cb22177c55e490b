//! Commutative semirings with several named additive operators and one shared
//! multiplication.
//!
//! A [`SemiringSpec`] bundles the carrier type `K`, the additive operators
//! (`sum`, `max`, `min`, or custom names), the multiplication, and the two
//! constants. Operators are compared by name only: two aggregations are
//! distinct exactly when their operator names differ.

use std::fmt::{self, Debug};
use std::hash::Hash;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AjarError, Result};

/// Reserved name of the product aggregation marker.
pub const PRODUCT_OP: &str = "prod";

/// Carrier type of a semiring.
pub trait Annotation: Clone + Eq + Ord + Hash + Debug + Send + Sync + 'static {
    fn parse_annotation(text: &str) -> Option<Self>;
    fn render(&self) -> String;
    /// Embedding of a small integer, used by samplers and constructed instances.
    fn from_small(n: i64) -> Self;
    /// Draw used by the semiring law checks; covers the whole carrier.
    fn sample_law(rng: &mut dyn RngCore) -> Self;
    /// Draw used for random instance annotations.
    fn sample_instance(rng: &mut dyn RngCore) -> Self;
    /// Built-in binary operation usable from a semiring config file.
    fn primitive(p: Primitive) -> Option<BinOp<Self>>;
    /// Below zero in the usual order; only meaningful for numeric carriers.
    fn is_negative(&self) -> bool {
        false
    }
}

pub type BinOp<K> = fn(&K, &K) -> K;

/// Named primitives a config file may bind operator names to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Primitive {
    Add,
    Mul,
    Max,
    Min,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    NonnegReal,
    Integer,
    ExtendedInteger,
    Boolean01,
}

impl DomainKind {
    pub fn name(self) -> &'static str {
        match self {
            DomainKind::NonnegReal => "nonneg-real",
            DomainKind::Integer => "integer",
            DomainKind::ExtendedInteger => "extended-integer",
            DomainKind::Boolean01 => "boolean01",
        }
    }
}

/// An aggregation operator occurring in an ordering.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AggOp {
    /// One of the semiring's additive operators, by name.
    Add(Arc<str>),
    /// Product aggregation with the semiring multiplication.
    Product,
}

impl AggOp {
    pub fn named(name: &str) -> AggOp {
        if name == PRODUCT_OP {
            AggOp::Product
        } else {
            AggOp::Add(Arc::from(name))
        }
    }

    pub fn name(&self) -> &str {
        match self {
            AggOp::Add(n) => n,
            AggOp::Product => PRODUCT_OP,
        }
    }

    pub fn is_product(&self) -> bool {
        matches!(self, AggOp::Product)
    }
}

impl fmt::Display for AggOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Debug for AggOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone)]
struct NamedOp<K> {
    name: Arc<str>,
    apply: BinOp<K>,
}

#[derive(Clone)]
pub struct SemiringSpec<K> {
    name: String,
    domain: DomainKind,
    additive: Vec<NamedOp<K>>,
    multiply: BinOp<K>,
    zero: K,
    one: K,
    multiply_idempotent: bool,
}

impl<K: Annotation> Debug for SemiringSpec<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SemiringSpec")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("ops", &self.op_names())
            .field("zero", &self.zero)
            .field("one", &self.one)
            .field("multiply_idempotent", &self.multiply_idempotent)
            .finish()
    }
}

impl<K: Annotation> SemiringSpec<K> {
    pub fn new(
        name: &str,
        domain: DomainKind,
        zero: K,
        one: K,
        multiply: BinOp<K>,
        multiply_idempotent: bool,
    ) -> Self {
        SemiringSpec {
            name: name.to_string(),
            domain,
            additive: Vec::new(),
            multiply,
            zero,
            one,
            multiply_idempotent,
        }
    }

    /// Register an additive operator. `prod` is reserved and names must be unique.
    pub fn with_op(mut self, name: &str, apply: BinOp<K>) -> Result<Self> {
        if name == PRODUCT_OP || name.is_empty() {
            return Err(AjarError::Schema(format!("operator name `{name}` is reserved")));
        }
        if self.additive.iter().any(|o| &*o.name == name) {
            return Err(AjarError::Schema(format!("operator `{name}` registered twice")));
        }
        self.additive.push(NamedOp { name: Arc::from(name), apply });
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> DomainKind {
        self.domain
    }

    pub fn zero(&self) -> &K {
        &self.zero
    }

    pub fn one(&self) -> &K {
        &self.one
    }

    pub fn is_zero(&self, k: &K) -> bool {
        *k == self.zero
    }

    pub fn is_multiply_idempotent(&self) -> bool {
        self.multiply_idempotent
    }

    pub fn mul(&self, a: &K, b: &K) -> K {
        (self.multiply)(a, b)
    }

    pub fn op_names(&self) -> Vec<&str> {
        self.additive.iter().map(|o| &*o.name).collect()
    }

    pub fn add_op(&self, name: &str) -> Option<BinOp<K>> {
        self.additive.iter().find(|o| &*o.name == name).map(|o| o.apply)
    }

    /// First registered additive operator.
    pub fn default_op(&self) -> Option<AggOp> {
        self.additive.first().map(|o| AggOp::Add(o.name.clone()))
    }

    /// Whether the operator may appear in an ordering over this semiring.
    /// Product aggregation additionally needs an idempotent multiplication.
    pub fn supports(&self, op: &AggOp) -> bool {
        match op {
            AggOp::Add(n) => self.add_op(n).is_some(),
            AggOp::Product => self.multiply_idempotent,
        }
    }

    pub fn check_op(&self, op: &AggOp) -> Result<()> {
        match op {
            AggOp::Add(n) if self.add_op(n).is_none() => Err(AjarError::UnknownOperator {
                op: n.to_string(),
                semiring: self.name.clone(),
            }),
            AggOp::Product if !self.multiply_idempotent => {
                Err(AjarError::NonIdempotentProduct(self.name.clone()))
            }
            _ => Ok(()),
        }
    }

    /// Apply an aggregation operator to two annotations.
    pub fn combine(&self, op: &AggOp, a: &K, b: &K) -> Result<K> {
        match op {
            AggOp::Add(n) => match self.add_op(n) {
                Some(f) => Ok(f(a, b)),
                None => Err(AjarError::UnknownOperator {
                    op: n.to_string(),
                    semiring: self.name.clone(),
                }),
            },
            AggOp::Product => Ok(self.mul(a, b)),
        }
    }

    pub fn product<'a>(&self, items: impl IntoIterator<Item = &'a K>) -> K {
        items.into_iter().fold(self.one.clone(), |acc, k| self.mul(&acc, k))
    }
}

fn num_add<K: Num + Clone>(a: &K, b: &K) -> K {
    a.clone() + b.clone()
}

fn num_mul<K: Num + Clone>(a: &K, b: &K) -> K {
    a.clone() * b.clone()
}

fn ord_max<K: Ord + Clone>(a: &K, b: &K) -> K {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

fn ord_min<K: Ord + Clone>(a: &K, b: &K) -> K {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

impl<K: Annotation + Num> SemiringSpec<K> {
    /// `(K, +, ·)` with `sum` as its single additive operator.
    pub fn sum_product(name: &str, domain: DomainKind) -> Self {
        SemiringSpec::new(name, domain, K::zero(), K::one(), num_mul::<K>, false)
            .with_op("sum", num_add::<K>)
            .expect("fresh operator table")
    }

    /// `(K, max, ·)`; only a semiring when the carrier is non-negative.
    pub fn max_product(name: &str, domain: DomainKind) -> Self {
        SemiringSpec::new(name, domain, K::zero(), K::one(), num_mul::<K>, false)
            .with_op("max", ord_max::<K>)
            .expect("fresh operator table")
    }
}

impl SemiringSpec<i64> {
    /// `(ℤ, +, ·)` with wrapping arithmetic, i.e. the ring ℤ/2⁶⁴.
    pub fn integers() -> Self {
        SemiringSpec::new("int", DomainKind::Integer, 0, 1, |a, b| a.wrapping_mul(*b), false)
            .with_op("sum", |a, b| a.wrapping_add(*b))
            .expect("fresh operator table")
    }
}

impl SemiringSpec<BigRational> {
    /// `(ℚ≥0, +, ·)` with `max` as a second additive operator.
    pub fn nonneg_rationals() -> Self {
        SemiringSpec::<BigRational>::sum_product("rational", DomainKind::NonnegReal)
            .with_op("max", ord_max::<BigRational>)
            .expect("fresh operator table")
    }
}

impl SemiringSpec<ExtInt> {
    /// `(ℤ ∪ {∞}, min, +)`.
    pub fn min_plus() -> Self {
        SemiringSpec::new(
            "minplus",
            DomainKind::ExtendedInteger,
            ExtInt::Infinity,
            ExtInt::Finite(0),
            ExtInt::plus,
            false,
        )
        .with_op("min", ord_min::<ExtInt>)
        .expect("fresh operator table")
    }
}

impl SemiringSpec<bool> {
    /// `({0,1}, max, ·)`; multiplication is idempotent so `prod` is allowed.
    pub fn boolean() -> Self {
        SemiringSpec::new("bool", DomainKind::Boolean01, false, true, |a, b| *a && *b, true)
            .with_op("max", |a, b| *a || *b)
            .expect("fresh operator table")
    }
}

/// Integers extended with `+∞`; `Finite(_) < Infinity`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtInt {
    Finite(i64),
    Infinity,
}

impl ExtInt {
    pub fn plus(a: &ExtInt, b: &ExtInt) -> ExtInt {
        match (a, b) {
            (ExtInt::Finite(x), ExtInt::Finite(y)) => ExtInt::Finite(x.saturating_add(*y)),
            _ => ExtInt::Infinity,
        }
    }

    pub fn finite(&self) -> Option<i64> {
        match self {
            ExtInt::Finite(v) => Some(*v),
            ExtInt::Infinity => None,
        }
    }
}

impl fmt::Display for ExtInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtInt::Finite(v) => write!(f, "{v}"),
            ExtInt::Infinity => f.write_str("inf"),
        }
    }
}

impl Debug for ExtInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Annotation for i64 {
    fn parse_annotation(text: &str) -> Option<Self> {
        text.trim().parse().ok()
    }

    fn render(&self) -> String {
        self.to_string()
    }

    fn from_small(n: i64) -> Self {
        n
    }

    fn sample_law(rng: &mut dyn RngCore) -> Self {
        rng.gen_range(-50..=50)
    }

    fn sample_instance(rng: &mut dyn RngCore) -> Self {
        rng.gen_range(0..=5)
    }

    fn primitive(p: Primitive) -> Option<BinOp<Self>> {
        Some(match p {
            Primitive::Add => |a, b| a.wrapping_add(*b),
            Primitive::Mul => |a, b| a.wrapping_mul(*b),
            Primitive::Max => ord_max::<i64>,
            Primitive::Min => ord_min::<i64>,
        })
    }
}

impl Annotation for BigRational {
    fn parse_annotation(text: &str) -> Option<Self> {
        parse_rational(text.trim())
    }

    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }

    fn render(&self) -> String {
        if self.is_integer() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }

    fn from_small(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn sample_law(rng: &mut dyn RngCore) -> Self {
        let p: i64 = rng.gen_range(0..=20);
        let q: i64 = rng.gen_range(1..=6);
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    fn sample_instance(rng: &mut dyn RngCore) -> Self {
        let p: i64 = rng.gen_range(0..=6);
        let q: i64 = rng.gen_range(1..=2);
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    fn primitive(p: Primitive) -> Option<BinOp<Self>> {
        Some(match p {
            Primitive::Add => num_add::<BigRational>,
            Primitive::Mul => num_mul::<BigRational>,
            Primitive::Max => ord_max::<BigRational>,
            Primitive::Min => ord_min::<BigRational>,
        })
    }
}

/// Parse `p`, `p/q`, or a finite decimal such as `0.25` into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    if let Some((int, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let negative = int.starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().ok()?
        };
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let frac_part: BigInt = frac.parse().ok()?;
        let magnitude = int_part.abs() * &scale + frac_part;
        let numer = if negative { -magnitude } else { magnitude };
        return Some(BigRational::new(numer, scale));
    }
    text.parse::<BigInt>().ok().map(BigRational::from_integer)
}

impl Annotation for ExtInt {
    fn parse_annotation(text: &str) -> Option<Self> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            Some(ExtInt::Infinity)
        } else {
            t.parse().ok().map(ExtInt::Finite)
        }
    }

    fn render(&self) -> String {
        self.to_string()
    }

    fn from_small(n: i64) -> Self {
        ExtInt::Finite(n)
    }

    fn sample_law(rng: &mut dyn RngCore) -> Self {
        if rng.gen_bool(0.15) {
            ExtInt::Infinity
        } else {
            ExtInt::Finite(rng.gen_range(-20..=20))
        }
    }

    fn sample_instance(rng: &mut dyn RngCore) -> Self {
        ExtInt::Finite(rng.gen_range(0..=9))
    }

    fn primitive(p: Primitive) -> Option<BinOp<Self>> {
        match p {
            Primitive::Add => Some(ExtInt::plus),
            Primitive::Mul => None,
            Primitive::Max => Some(ord_max::<ExtInt>),
            Primitive::Min => Some(ord_min::<ExtInt>),
        }
    }
}

impl Annotation for bool {
    fn parse_annotation(text: &str) -> Option<Self> {
        match text.trim() {
            "0" | "false" => Some(false),
            "1" | "true" => Some(true),
            _ => None,
        }
    }

    fn render(&self) -> String {
        if *self { "1" } else { "0" }.to_string()
    }

    fn from_small(n: i64) -> Self {
        n != 0
    }

    fn sample_law(rng: &mut dyn RngCore) -> Self {
        rng.gen_bool(0.5)
    }

    fn sample_instance(rng: &mut dyn RngCore) -> Self {
        rng.gen_bool(0.5)
    }

    fn primitive(p: Primitive) -> Option<BinOp<Self>> {
        Some(match p {
            Primitive::Add => |a, b| *a ^ *b,
            Primitive::Mul => |a, b| *a && *b,
            Primitive::Max => |a, b| *a || *b,
            Primitive::Min => |a, b| *a && *b,
        })
    }
}

/// Outcome of a sampled law check.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LawReport {
    pub triples: usize,
    pub violations: Vec<String>,
}

impl LawReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check the semiring axioms on `triples` sampled triples per additive
/// operator, plus agreement of the idempotence flag with the samples.
pub fn check_laws<K: Annotation>(s: &SemiringSpec<K>, triples: usize, seed: u64) -> LawReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<(K, K, K)> = (0..triples)
        .map(|_| {
            (
                K::sample_law(&mut rng),
                K::sample_law(&mut rng),
                K::sample_law(&mut rng),
            )
        })
        .collect();
    check_laws_on(s, &samples)
}

/// Same as [`check_laws`] on caller-supplied triples.
pub fn check_laws_on<K: Annotation>(s: &SemiringSpec<K>, samples: &[(K, K, K)]) -> LawReport {
    let mut violations = Vec::new();
    let zero = s.zero();
    let one = s.one();
    let mut push = |law: &str, op: &str, a: &K, b: &K, c: &K| {
        if violations.len() < 16 {
            violations.push(format!("{law} fails for `{op}` at ({a:?}, {b:?}, {c:?})"));
        }
    };
    let mut non_idempotent_witness = false;
    for (a, b, c) in samples {
        let m = |x: &K, y: &K| s.mul(x, y);
        if m(&m(a, b), c) != m(a, &m(b, c)) {
            push("associativity", "*", a, b, c);
        }
        if m(a, b) != m(b, a) {
            push("commutativity", "*", a, b, c);
        }
        if m(a, one) != *a {
            push("identity", "*", a, b, c);
        }
        if m(a, zero) != *zero {
            push("annihilation", "*", a, b, c);
        }
        if m(a, a) != *a {
            non_idempotent_witness = true;
        }
        for op in &s.additive {
            let p = |x: &K, y: &K| (op.apply)(x, y);
            if p(&p(a, b), c) != p(a, &p(b, c)) {
                push("associativity", &op.name, a, b, c);
            }
            if p(a, b) != p(b, a) {
                push("commutativity", &op.name, a, b, c);
            }
            if p(a, zero) != *a {
                push("identity", &op.name, a, b, c);
            }
            if m(a, &p(b, c)) != p(&m(a, b), &m(a, c)) {
                push("distributivity", &op.name, a, b, c);
            }
        }
    }
    if s.multiply_idempotent && non_idempotent_witness {
        violations.push("multiplication flagged idempotent but a*a != a on a sample".into());
    }
    if !s.multiply_idempotent && !non_idempotent_witness && !samples.is_empty() {
        violations.push("multiplication flagged non-idempotent but every sample has a*a = a".into());
    }
    LawReport { triples: samples.len(), violations }
}

/// Values `x, y` with `x op1 y != x op2 y`, searched over small embedded integers
/// and law samples. Used to build distinguishing instances.
pub fn distinguishing_pair<K: Annotation>(
    s: &SemiringSpec<K>,
    op1: &AggOp,
    op2: &AggOp,
) -> Option<(K, K)> {
    if op1.is_product() || op2.is_product() {
        return Some((s.one().clone(), s.one().clone()));
    }
    let mut pool: Vec<K> = (0..=6).map(K::from_small).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    pool.extend((0..64).map(|_| K::sample_law(&mut rng)));
    for x in &pool {
        for y in &pool {
            let l = s.combine(op1, x, y).ok()?;
            let r = s.combine(op2, x, y).ok()?;
            if l != r {
                return Some((x.clone(), y.clone()));
            }
        }
    }
    None
}
