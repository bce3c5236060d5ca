//! Guess Who: identify a hidden entity from a roster with yes/no attribute
//! questions, one guess at the end. The belief is exact (one weight per
//! entity) and shares the channel model and EIG formula with Battleship.

mod belief;
mod game;
mod question;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use belief::{EntityBelief, EntitySet};
pub use game::{
    run_guesswho, sample_target, select_question, EntitySpotter, ExternalGuesser, GuessEvent,
    GuessPolicy, GuessResult, GuessTrajectory, GuessTrajectoryHeader, GuessWhoSetup, GwGuessRule,
    GwQuestionRule, ScriptedGuesser, GW_PRESETS,
};
pub use question::{AttrQuestion, TemplatePool as AttrTemplatePool};

/// A single value or a set of values (for attributes like accessories).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttrValue {
    One(String),
    Many(Vec<String>),
}

impl AttrValue {
    pub fn values(&self) -> impl Iterator<Item = &str> {
        let (one, many) = match self {
            AttrValue::One(v) => (Some(v.as_str()), &[][..]),
            AttrValue::Many(vs) => (None, vs.as_slice()),
        };
        one.into_iter().chain(many.iter().map(String::as_str))
    }

    fn normalized(&self) -> AttrValue {
        match self {
            AttrValue::One(v) => AttrValue::One(v.trim().to_lowercase()),
            AttrValue::Many(vs) => {
                let set: BTreeSet<String> = vs.iter().map(|v| v.trim().to_lowercase()).collect();
                AttrValue::Many(set.into_iter().collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub name: String,
    #[serde(flatten)]
    pub attributes: BTreeMap<String, AttrValue>,
}

impl Entity {
    pub fn get(&self, key: &str) -> Option<&AttrValue> {
        self.attributes.get(key)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RosterError {
    #[error("roster is empty")]
    Empty,
    #[error("duplicate entity name '{0}'")]
    DuplicateName(String),
    #[error("entities '{0}' and '{1}' are indistinguishable")]
    Indistinguishable(String, String),
}

/// Keys and the values each key takes across a roster.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schema {
    pub values: BTreeMap<String, BTreeSet<String>>,
    /// Keys whose values are sets on at least one entity.
    pub multi: BTreeSet<String>,
}

/// A validated list of entities: unique names, pairwise distinguishable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Roster {
    entities: Vec<Entity>,
    schema: Schema,
}

impl Roster {
    /// Normalizes keys and values to lowercase, then validates.
    pub fn new(entities: Vec<Entity>) -> Result<Self, RosterError> {
        if entities.is_empty() {
            return Err(RosterError::Empty);
        }
        let entities: Vec<Entity> = entities
            .into_iter()
            .map(|e| Entity {
                name: e.name.trim().to_string(),
                attributes: e
                    .attributes
                    .iter()
                    .map(|(k, v)| (k.trim().to_lowercase(), v.normalized()))
                    .collect(),
            })
            .collect();
        let mut names = BTreeSet::new();
        for e in &entities {
            if !names.insert(e.name.to_lowercase()) {
                return Err(RosterError::DuplicateName(e.name.clone()));
            }
        }
        let mut schema = Schema::default();
        for e in &entities {
            for (k, v) in &e.attributes {
                let set = schema.values.entry(k.clone()).or_default();
                set.extend(v.values().map(String::from));
                if matches!(v, AttrValue::Many(_)) {
                    schema.multi.insert(k.clone());
                }
            }
        }
        let mut seen: BTreeMap<Vec<(String, Vec<String>)>, &str> = BTreeMap::new();
        for e in &entities {
            let key: Vec<(String, Vec<String>)> = schema
                .values
                .keys()
                .map(|k| {
                    (
                        k.clone(),
                        e.get(k)
                            .map_or(Vec::new(), |v| v.values().map(String::from).collect()),
                    )
                })
                .collect();
            if let Some(other) = seen.insert(key, &e.name) {
                return Err(RosterError::Indistinguishable(
                    other.to_string(),
                    e.name.clone(),
                ));
            }
        }
        Ok(Roster { entities, schema })
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.entities
            .iter()
            .position(|e| e.name.eq_ignore_ascii_case(name))
    }
}
