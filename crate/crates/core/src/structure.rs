//! Finite structures over domains `{0, …, n-1}` and variable assignments.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Map, Value};

use crate::formula::{Signature, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub arity: usize,
    pub tuples: BTreeSet<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StructureError {
    #[error("domain must be non-empty")]
    EmptyDomain,
    #[error("tuple {tuple:?} of {name} does not fit arity {arity} over a domain of size {domain}")]
    BadTuple {
        name: String,
        tuple: Vec<u32>,
        arity: usize,
        domain: u32,
    },
    #[error("invalid structure text: {0}")]
    Format(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Structure {
    domain: u32,
    relations: BTreeMap<String, Relation>,
}

impl Structure {
    pub fn new(domain: u32) -> Result<Self, StructureError> {
        if domain == 0 {
            return Err(StructureError::EmptyDomain);
        }
        Ok(Self {
            domain,
            relations: BTreeMap::new(),
        })
    }

    pub fn domain_size(&self) -> u32 {
        self.domain
    }

    pub fn set_relation<I>(&mut self, name: &str, arity: usize, tuples: I) -> Result<(), StructureError>
    where
        I: IntoIterator<Item = Vec<u32>>,
    {
        let mut set = BTreeSet::new();
        for t in tuples {
            if t.len() != arity || t.iter().any(|e| *e >= self.domain) {
                return Err(StructureError::BadTuple {
                    name: name.to_owned(),
                    tuple: t,
                    arity,
                    domain: self.domain,
                });
            }
            set.insert(t);
        }
        self.relations.insert(name.to_owned(), Relation { arity, tuples: set });
        Ok(())
    }

    pub fn with_relation<I>(mut self, name: &str, arity: usize, tuples: I) -> Result<Self, StructureError>
    where
        I: IntoIterator<Item = Vec<u32>>,
    {
        self.set_relation(name, arity, tuples)?;
        Ok(self)
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.get(name)
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, &Relation)> {
        self.relations.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn signature(&self) -> Signature {
        self.relations.iter().map(|(k, r)| (k.clone(), r.arity)).collect()
    }

    pub fn holds(&self, name: &str, tuple: &[u32]) -> bool {
        self.relations
            .get(name)
            .is_some_and(|r| r.tuples.contains(tuple))
    }

    /// The isomorphic copy under the element map `perm` (a permutation of
    /// the domain).
    pub fn relabel(&self, perm: &[u32]) -> Result<Self, StructureError> {
        let mut out = Structure::new(self.domain)?;
        for (name, r) in &self.relations {
            let tuples = r
                .tuples
                .iter()
                .map(|t| t.iter().map(|e| perm[*e as usize]).collect());
            out.set_relation(name, r.arity, tuples)?;
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        let mut rels = Map::new();
        let mut arities = Map::new();
        for (name, r) in &self.relations {
            rels.insert(name.clone(), json!(r.tuples));
            if r.tuples.is_empty() {
                arities.insert(name.clone(), json!(r.arity));
            }
        }
        let mut out = json!({ "domain": self.domain, "relations": rels });
        if !arities.is_empty() {
            out["arities"] = Value::Object(arities);
        }
        out
    }

    pub fn from_json(v: &Value) -> Result<Self, StructureError> {
        let bad = |m: &str| StructureError::Format(m.to_owned());
        let domain = v
            .get("domain")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("missing domain"))?;
        let mut s = Structure::new(domain as u32)?;
        let arities = v.get("arities").and_then(Value::as_object);
        if let Some(rels) = v.get("relations") {
            let rels = rels.as_object().ok_or_else(|| bad("relations must be an object"))?;
            for (name, tuples) in rels {
                let tuples: Vec<Vec<u32>> = serde_json::from_value(tuples.clone())
                    .map_err(|e| StructureError::Format(e.to_string()))?;
                let arity = match tuples.first() {
                    Some(t) => t.len(),
                    None => arities
                        .and_then(|a| a.get(name))
                        .and_then(Value::as_u64)
                        .ok_or_else(|| bad(&format!("arity of empty relation {name} unknown")))?
                        as usize,
                };
                s.set_relation(name, arity, tuples)?;
            }
        }
        Ok(s)
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

impl Serialize for Structure {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Structure {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        Structure::from_json(&v).map_err(D::Error::custom)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment(BTreeMap<Var, u32>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(mut self, v: Var, e: u32) -> Self {
        self.0.insert(v, e);
        self
    }

    pub fn set(&mut self, v: Var, e: u32) {
        self.0.insert(v, e);
    }

    pub fn get(&self, v: Var) -> Option<u32> {
        self.0.get(&v).copied()
    }

    pub fn relabel(&self, perm: &[u32]) -> Self {
        self.0.iter().map(|(v, e)| (*v, perm[*e as usize])).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, u32)> + '_ {
        self.0.iter().map(|(v, e)| (*v, *e))
    }

    pub fn to_json(&self) -> Value {
        Value::Object(
            self.0
                .iter()
                .map(|(v, e)| (v.to_string(), json!(e)))
                .collect(),
        )
    }

    pub fn from_json(v: &Value) -> Result<Self, StructureError> {
        let obj = v
            .as_object()
            .ok_or_else(|| StructureError::Format("assignment must be an object".into()))?;
        let mut out = Assignment::new();
        for (k, e) in obj {
            let idx = k
                .strip_prefix('x')
                .and_then(|d| d.parse::<u32>().ok())
                .and_then(Var::try_new)
                .ok_or_else(|| StructureError::Format(format!("bad variable {k}")))?;
            let e = e
                .as_u64()
                .ok_or_else(|| StructureError::Format(format!("bad element for {k}")))?;
            out.set(idx, e as u32);
        }
        Ok(out)
    }
}

impl FromIterator<(Var, u32)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (Var, u32)>>(iter: I) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

impl Serialize for Assignment {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::x;

    #[test]
    fn json_round_trip() {
        let m = Structure::new(2)
            .unwrap()
            .with_relation("R", 2, [vec![0, 1]])
            .unwrap()
            .with_relation("P", 1, [])
            .unwrap();
        let text = m.to_json();
        assert_eq!(
            text,
            json!({"domain": 2, "relations": {"P": [], "R": [[0, 1]]}, "arities": {"P": 1}})
        );
        assert_eq!(Structure::from_json(&text).unwrap(), m);
        let g = Assignment::new().bind(x(1), 0).bind(x(2), 1);
        assert_eq!(g.to_json(), json!({"x1": 0, "x2": 1}));
        assert_eq!(Assignment::from_json(&g.to_json()).unwrap(), g);
    }

    #[test]
    fn rejects_out_of_range_tuples() {
        let m = Structure::new(2).unwrap();
        assert!(m.with_relation("R", 2, [vec![0, 2]]).is_err());
        assert!(Structure::new(0).is_err());
    }
}
