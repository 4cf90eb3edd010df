use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::schema::{Label, Schema, VarId};

/// Conjunction of per-variable constraints. A variable maps to the set of
/// labels it may take; a single label is the usual `var = value` pair.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventSpec(BTreeMap<String, BTreeSet<String>>);

impl EventSpec {
    pub fn new() -> Self {
        EventSpec::default()
    }

    /// Adds `var = value`, intersecting with any existing constraint on `var`.
    pub fn with(self, var: impl Into<String>, value: impl Into<String>) -> Self {
        self.with_any(var, [value.into()])
    }

    /// Adds `var ∈ values`, intersecting with any existing constraint.
    pub fn with_any<I, S>(mut self, var: impl Into<String>, values: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let new: BTreeSet<String> = values.into_iter().map(Into::into).collect();
        let var = var.into();
        match self.0.get_mut(&var) {
            Some(existing) => existing.retain(|v| new.contains(v)),
            None => {
                self.0.insert(var, new);
            }
        }
        self
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &BTreeSet<String>)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn get(&self, var: &str) -> Option<&BTreeSet<String>> {
        self.0.get(var)
    }

    pub fn contains_var(&self, var: &str) -> bool {
        self.0.contains_key(var)
    }

    /// Conjunction of two events.
    pub fn and(&self, other: &EventSpec) -> EventSpec {
        let mut out = self.clone();
        for (k, v) in &other.0 {
            out = out.with_any(k.clone(), v.iter().cloned());
        }
        out
    }

    /// Drops constraints on the named variables.
    pub fn without<'a>(&self, vars: impl IntoIterator<Item = &'a str>) -> EventSpec {
        let mut out = self.clone();
        for v in vars {
            out.0.remove(v);
        }
        out
    }

    /// Keeps only constraints on the named variables.
    pub fn restrict<'a>(&self, vars: impl IntoIterator<Item = &'a str>) -> EventSpec {
        let keep: BTreeSet<&str> = vars.into_iter().collect();
        EventSpec(
            self.0
                .iter()
                .filter(|(k, _)| keep.contains(k.as_str()))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        )
    }

    /// Resolves names and labels against a schema.
    pub fn compile(&self, schema: &Schema) -> Result<CompiledEvent> {
        let mut terms = Vec::with_capacity(self.0.len());
        for (name, labels) in &self.0 {
            let id = schema.id(name)?;
            let var = schema.var(id);
            let mut allowed = vec![false; var.len()];
            for l in labels {
                allowed[var.code(l)?] = true;
            }
            terms.push((id, allowed));
        }
        Ok(CompiledEvent { terms })
    }
}

impl fmt::Display for EventSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("(empty event)");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(k, v)| {
                if v.len() == 1 {
                    format!("{k}={}", v.iter().next().unwrap())
                } else {
                    let vs: Vec<&str> = v.iter().map(String::as_str).collect();
                    format!("{k}∈{{{}}}", vs.join(","))
                }
            })
            .collect();
        f.write_str(&parts.join(", "))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(Label),
    Many(Vec<Label>),
}

impl Serialize for EventSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let map: BTreeMap<&str, OneOrMany> = self
            .0
            .iter()
            .map(|(k, v)| {
                let labels: Vec<Label> = v.iter().cloned().map(Label::Text).collect();
                let value = if labels.len() == 1 {
                    OneOrMany::One(labels.into_iter().next().unwrap())
                } else {
                    OneOrMany::Many(labels)
                };
                (k.as_str(), value)
            })
            .collect();
        map.serialize(s)
    }
}

impl<'de> Deserialize<'de> for EventSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let map = BTreeMap::<String, OneOrMany>::deserialize(d)?;
        Ok(map.into_iter().fold(EventSpec::new(), |ev, (k, v)| match v {
            OneOrMany::One(l) => ev.with(k, l.into_string()),
            OneOrMany::Many(ls) => ev.with_any(k, ls.into_iter().map(Label::into_string)),
        }))
    }
}

/// Event resolved to variable ids and per-code membership masks.
#[derive(Debug, Clone, Default)]
pub struct CompiledEvent {
    terms: Vec<(VarId, Vec<bool>)>,
}

impl CompiledEvent {
    #[inline]
    pub fn matches(&self, row: &[u32]) -> bool {
        self.terms.iter().all(|(id, ok)| ok[row[*id] as usize])
    }

    pub fn terms(&self) -> &[(VarId, Vec<bool>)] {
        &self.terms
    }

    /// True when no assignment satisfies the event.
    pub fn is_void(&self) -> bool {
        self.terms.iter().any(|(_, ok)| !ok.contains(&true))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjunction_intersects() {
        let a = EventSpec::new().with_any("o", ["1", "2"]);
        let b = EventSpec::new().with("o", "2").with("x", "0");
        let c = a.and(&b);
        assert_eq!(c.get("o").unwrap().len(), 1);
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn json_forms() {
        let e: EventSpec = serde_json::from_str(r#"{"x":1,"o":["a","b"]}"#).unwrap();
        assert_eq!(e, EventSpec::new().with("x", "1").with_any("o", ["a", "b"]));
        let back = serde_json::to_string(&e).unwrap();
        assert_eq!(back, r#"{"o":["a","b"],"x":"1"}"#);
    }

    #[test]
    fn display() {
        let e = EventSpec::new().with("x", "1").with_any("o", ["3", "4"]);
        assert_eq!(e.to_string(), "o∈{3,4}, x=1");
    }
}
