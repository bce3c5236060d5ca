use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::{AttrValue, Entity, Roster, Schema};
use crate::sexpr::{self, SExpr, SyntaxError};

/// Yes/no question about an entity's attributes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AttrQuestion {
    /// The attribute is exactly this value (a set attribute must be exactly `{value}`).
    Eq(String, String),
    /// The attribute is or contains this value.
    Has(String, String),
    Not(Box<AttrQuestion>),
    And(Vec<AttrQuestion>),
    Or(Vec<AttrQuestion>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AttrQuestionError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("unknown attribute '{0}'")]
    UnknownKey(String),
}

impl AttrQuestion {
    pub fn not(q: AttrQuestion) -> Self {
        AttrQuestion::Not(Box::new(q))
    }

    /// Parses DSL text such as `(and (attr-eq gender male) (attr-has accessories scarf))`.
    /// Keys and values are case-insensitive.
    pub fn parse(text: &str) -> Result<Self, AttrQuestionError> {
        let expr = sexpr::read(&text.to_lowercase())?;
        Ok(from_expr(&expr)?.canonical())
    }

    /// Parses and checks every key against a roster schema.
    pub fn parse_for(text: &str, schema: &Schema) -> Result<Self, AttrQuestionError> {
        let q = Self::parse(text)?;
        q.check(schema)?;
        Ok(q)
    }

    pub fn check(&self, schema: &Schema) -> Result<(), AttrQuestionError> {
        match self {
            AttrQuestion::Eq(k, _) | AttrQuestion::Has(k, _) => {
                if schema.values.contains_key(k) {
                    Ok(())
                } else {
                    Err(AttrQuestionError::UnknownKey(k.clone()))
                }
            }
            AttrQuestion::Not(q) => q.check(schema),
            AttrQuestion::And(qs) | AttrQuestion::Or(qs) => {
                qs.iter().try_for_each(|q| q.check(schema))
            }
        }
    }

    /// Children of and/or sorted by text so equal questions print equally.
    pub fn canonical(&self) -> Self {
        match self {
            AttrQuestion::Not(q) => AttrQuestion::not(q.canonical()),
            AttrQuestion::And(qs) | AttrQuestion::Or(qs) => {
                let mut v: Vec<AttrQuestion> = qs.iter().map(|q| q.canonical()).collect();
                v.sort_by_cached_key(|q| q.to_string());
                if matches!(self, AttrQuestion::And(_)) {
                    AttrQuestion::And(v)
                } else {
                    AttrQuestion::Or(v)
                }
            }
            atom => atom.clone(),
        }
    }

    pub fn canonical_text(&self) -> String {
        self.canonical().to_string()
    }

    /// Evaluates on one entity; keys outside the schema are an error.
    pub fn eval(&self, e: &Entity, schema: &Schema) -> Result<bool, AttrQuestionError> {
        self.check(schema)?;
        Ok(self.eval_unchecked(e))
    }

    pub(crate) fn eval_unchecked(&self, e: &Entity) -> bool {
        match self {
            AttrQuestion::Eq(k, v) => match e.get(k) {
                Some(AttrValue::One(x)) => x == v,
                Some(AttrValue::Many(xs)) => xs.len() == 1 && xs[0] == *v,
                None => false,
            },
            AttrQuestion::Has(k, v) => e.get(k).is_some_and(|x| x.values().any(|x| x == v)),
            AttrQuestion::Not(q) => !q.eval_unchecked(e),
            AttrQuestion::And(qs) => qs.iter().all(|q| q.eval_unchecked(e)),
            AttrQuestion::Or(qs) => qs.iter().any(|q| q.eval_unchecked(e)),
        }
    }

    /// Answers for every entity in roster order.
    pub fn answers(&self, roster: &Roster) -> Result<super::EntitySet, AttrQuestionError> {
        self.check(roster.schema())?;
        Ok(super::EntitySet::from_fn(roster.len(), |i| {
            self.eval_unchecked(&roster.entities()[i])
        }))
    }
}

fn from_expr(e: &SExpr) -> Result<AttrQuestion, SyntaxError> {
    let (head, args) = e
        .as_form()
        .ok_or_else(|| SyntaxError::new(e.pos(), "expected a parenthesized form"))?;
    let sub = |args: &[SExpr]| args.iter().map(from_expr).collect::<Result<Vec<_>, _>>();
    match head {
        "not" => match args {
            [q] => Ok(AttrQuestion::not(from_expr(q)?)),
            _ => Err(SyntaxError::new(e.pos(), "not takes exactly one question")),
        },
        "and" | "or" if args.len() < 2 => Err(SyntaxError::new(
            e.pos(),
            format!("{head} needs at least two questions"),
        )),
        "and" => Ok(AttrQuestion::And(sub(args)?)),
        "or" => Ok(AttrQuestion::Or(sub(args)?)),
        "attr-eq" | "attr-has" => {
            let [k, v] = args else {
                return Err(SyntaxError::new(
                    e.pos(),
                    format!("{head} takes an attribute and a value"),
                ));
            };
            let key = k
                .as_atom()
                .ok_or_else(|| SyntaxError::new(k.pos(), "expected an attribute name"))?;
            let value = v
                .as_atom()
                .ok_or_else(|| SyntaxError::new(v.pos(), "expected a value"))?;
            let (key, value) = (key.to_string(), value.to_string());
            Ok(if head == "attr-eq" {
                AttrQuestion::Eq(key, value)
            } else {
                AttrQuestion::Has(key, value)
            })
        }
        other => Err(SyntaxError::new(e.pos(), format!("unknown form '{other}'"))),
    }
}

fn write_token(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    if s.is_empty()
        || s.chars()
            .any(|c| c.is_whitespace() || c == '(' || c == ')' || c == '"')
    {
        write!(f, "\"{}\"", s.replace('"', ""))
    } else {
        f.write_str(s)
    }
}

impl fmt::Display for AttrQuestion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrQuestion::Eq(k, v) | AttrQuestion::Has(k, v) => {
                f.write_str(if matches!(self, AttrQuestion::Eq(..)) {
                    "(attr-eq "
                } else {
                    "(attr-has "
                })?;
                write_token(f, k)?;
                f.write_str(" ")?;
                write_token(f, v)?;
                f.write_str(")")
            }
            AttrQuestion::Not(q) => write!(f, "(not {q})"),
            AttrQuestion::And(qs) | AttrQuestion::Or(qs) => {
                f.write_str(if matches!(self, AttrQuestion::And(_)) {
                    "(and"
                } else {
                    "(or"
                })?;
                for q in qs {
                    write!(f, " {q}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl serde::Serialize for AttrQuestion {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&self.canonical())
    }
}

impl<'de> serde::Deserialize<'de> for AttrQuestion {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        AttrQuestion::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Every attribute atom of a roster, and their pairwise and/or combinations.
#[derive(Debug, Clone)]
pub struct TemplatePool {
    atoms: Vec<AttrQuestion>,
}

impl TemplatePool {
    /// `attr-has` for set-valued keys, `attr-eq` otherwise; one atom per (key, value).
    pub fn new(roster: &Roster) -> Self {
        let schema = roster.schema();
        let mut atoms = Vec::new();
        for (k, vs) in &schema.values {
            for v in vs {
                atoms.push(if schema.multi.contains(k) {
                    AttrQuestion::Has(k.clone(), v.clone())
                } else {
                    AttrQuestion::Eq(k.clone(), v.clone())
                });
            }
        }
        TemplatePool { atoms }
    }

    pub fn atoms(&self) -> &[AttrQuestion] {
        &self.atoms
    }

    pub fn combination_count(&self) -> usize {
        let n = self.atoms.len();
        n * n.saturating_sub(1)
    }

    /// Index in `0..combination_count()`: even indices are `and`, odd are `or`.
    pub fn combination(&self, index: usize) -> AttrQuestion {
        let (pair, is_or) = (index / 2, index % 2 == 1);
        let n = self.atoms.len();
        // unrank pair (i, j) with i < j
        let mut i = 0;
        let mut rest = pair;
        while rest >= n - 1 - i {
            rest -= n - 1 - i;
            i += 1;
        }
        let j = i + 1 + rest;
        let (a, b) = (self.atoms[i].clone(), self.atoms[j].clone());
        let q = if is_or {
            AttrQuestion::Or(alloc::vec![a, b])
        } else {
            AttrQuestion::And(alloc::vec![a, b])
        };
        q.canonical()
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::entity;
    use super::*;
    use alloc::collections::BTreeSet;
    use alloc::vec;

    fn pair() -> Roster {
        Roster::new(vec![
            entity(
                "Alex",
                &[("gender", "male"), ("hair_color", "brown")],
                &["glasses"],
            ),
            entity(
                "Elena",
                &[("gender", "female"), ("hair_color", "blonde")],
                &["scarf"],
            ),
        ])
        .unwrap()
    }

    #[test]
    fn examples() {
        let r = pair();
        let (alex, elena) = (&r.entities()[0], &r.entities()[1]);
        let s = r.schema();
        assert!(AttrQuestion::parse("(attr-eq gender male)")
            .unwrap()
            .eval(alex, s)
            .unwrap());
        assert!(AttrQuestion::parse("(attr-has accessories scarf)")
            .unwrap()
            .eval(elena, s)
            .unwrap());
        assert!(AttrQuestion::parse("(not (attr-eq hair_color blonde))")
            .unwrap()
            .eval(alex, s)
            .unwrap());
        assert!(AttrQuestion::parse("(attr-eq accessories glasses)")
            .unwrap()
            .eval(alex, s)
            .unwrap());
        let unknown = AttrQuestion::parse("(attr-eq height tall)").unwrap();
        assert_eq!(
            unknown.eval(alex, s),
            Err(AttrQuestionError::UnknownKey("height".into()))
        );
        assert!(AttrQuestion::parse("(attr-eq gender)").is_err());
        assert!(AttrQuestion::parse("(and (attr-eq gender male))").is_err());
    }

    #[test]
    fn text_round_trip() {
        let q = AttrQuestion::parse("(OR (attr-has accessories scarf) (attr-eq Gender \"male\"))")
            .unwrap();
        assert_eq!(
            q.to_string(),
            "(or (attr-eq gender male) (attr-has accessories scarf))"
        );
        assert_eq!(AttrQuestion::parse(&q.to_string()).unwrap(), q);
        let spaced = AttrQuestion::Eq("hat_type".into(), "top hat".into());
        assert_eq!(AttrQuestion::parse(&spaced.to_string()).unwrap(), spaced);
    }

    #[test]
    fn pool_combinations_are_distinct() {
        let pool = TemplatePool::new(&pair());
        assert_eq!(pool.atoms().len(), 6);
        let all: BTreeSet<String> = (0..pool.combination_count())
            .map(|i| pool.combination(i).to_string())
            .collect();
        assert_eq!(all.len(), pool.combination_count());
    }
}
