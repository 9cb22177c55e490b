//! Semiring selection by name or from a JSON config.
//!
//! A config binds operator names to primitives over one of the built-in
//! carriers, and is rejected unless the sampled semiring laws hold:
//!
//! ```json
//! {"name": "maxint", "carrier": "rational", "zero": "0", "one": "1",
//!  "multiply": "mul", "multiply_idempotent": false,
//!  "ops": {"max": "max", "sum": "add"}}
//! ```

use std::collections::BTreeMap;

use ajar::semiring::{check_laws, DomainKind, Primitive};
use ajar::{AjarError, Annotation, ExtInt, Rational, Result, SemiringSpec};
use serde::Deserialize;

/// Sampled triples per operator when checking a config.
pub const CONFIG_LAW_TRIPLES: usize = 1000;

#[derive(Clone, Debug)]
pub enum AnySemiring {
    Int(SemiringSpec<i64>),
    Rational(SemiringSpec<Rational>),
    MinPlus(SemiringSpec<ExtInt>),
    Bool(SemiringSpec<bool>),
}

/// Run `$body` with `$s` bound to the concrete `SemiringSpec<K>`.
#[macro_export]
macro_rules! with_semiring {
    ($any:expr, $s:ident => $body:expr) => {
        match $any {
            $crate::semirings::AnySemiring::Int($s) => $body,
            $crate::semirings::AnySemiring::Rational($s) => $body,
            $crate::semirings::AnySemiring::MinPlus($s) => $body,
            $crate::semirings::AnySemiring::Bool($s) => $body,
        }
    };
}

pub const BUILTIN_NAMES: [&str; 4] = ["int", "rational", "minplus", "bool"];

pub fn builtin(name: &str) -> Result<AnySemiring> {
    Ok(match name {
        "int" => AnySemiring::Int(SemiringSpec::integers()),
        "rational" => AnySemiring::Rational(SemiringSpec::nonneg_rationals()),
        "minplus" => AnySemiring::MinPlus(SemiringSpec::min_plus()),
        "bool" => AnySemiring::Bool(SemiringSpec::boolean()),
        other => {
            return Err(AjarError::Parse(format!(
                "unknown semiring `{other}`; expected one of {}",
                BUILTIN_NAMES.join(", ")
            )))
        }
    })
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Carrier {
    Int,
    Rational,
    Extint,
    Bool,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemiringConfig {
    pub name: String,
    pub carrier: Carrier,
    pub zero: String,
    pub one: String,
    pub multiply: Primitive,
    #[serde(default)]
    pub multiply_idempotent: bool,
    pub ops: BTreeMap<String, Primitive>,
}

fn build<K: Annotation>(c: &SemiringConfig, domain: DomainKind, seed: u64) -> Result<SemiringSpec<K>> {
    let constant = |t: &str| {
        K::parse_annotation(t).ok_or_else(|| AjarError::Parse(format!("semiring config: bad constant {t:?}")))
    };
    let prim = |p: Primitive| {
        K::primitive(p).ok_or_else(|| AjarError::Parse(format!("semiring config: {p:?} is not defined on this carrier")))
    };
    let mut s = SemiringSpec::new(
        &c.name,
        domain,
        constant(&c.zero)?,
        constant(&c.one)?,
        prim(c.multiply)?,
        c.multiply_idempotent,
    );
    for (name, p) in &c.ops {
        s = s.with_op(name, prim(*p)?)?;
    }
    let report = check_laws(&s, CONFIG_LAW_TRIPLES, seed);
    if !report.holds() {
        return Err(AjarError::LawViolation(report.violations.join("; ")));
    }
    Ok(s)
}

pub fn from_config(text: &str) -> Result<AnySemiring> {
    let c: SemiringConfig =
        serde_json::from_str(text).map_err(|e| AjarError::Parse(format!("semiring config: {e}")))?;
    let seed = 0x5e11;
    Ok(match c.carrier {
        Carrier::Int => AnySemiring::Int(build(&c, DomainKind::Integer, seed)?),
        Carrier::Rational => AnySemiring::Rational(build(&c, DomainKind::NonnegReal, seed)?),
        Carrier::Extint => AnySemiring::MinPlus(build(&c, DomainKind::ExtendedInteger, seed)?),
        Carrier::Bool => AnySemiring::Bool(build(&c, DomainKind::Boolean01, seed)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_resolve() {
        for n in BUILTIN_NAMES {
            let s = builtin(n).unwrap();
            assert_eq!(with_semiring!(&s, s => s.name().to_string()), n);
        }
        assert!(builtin("gf2").is_err());
    }

    #[test]
    fn config_law_check() {
        let ok = r#"{"name": "maxsum", "carrier": "rational", "zero": "0", "one": "1",
                     "multiply": "mul", "ops": {"max": "max", "sum": "add"}}"#;
        assert!(from_config(ok).is_ok());
        let bad = r#"{"name": "intmax", "carrier": "int", "zero": "0", "one": "1",
                      "multiply": "mul", "ops": {"max": "max"}}"#;
        assert!(matches!(from_config(bad), Err(AjarError::LawViolation(_))));
    }
}
