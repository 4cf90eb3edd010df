//! Variables and their finite domains.
//!
//! Domain values are kept as labels. A label that parses as a number also
//! behaves as a number inside expressions. Domains are listed in ascending
//! order: for an `ordered` variable a later value is the more desirable one.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a variable inside a [`Schema`].
pub type VarId = usize;

/// A domain value as it appears in JSON: either a string or a number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Text(String),
    Number(serde_json::Number),
}

impl Label {
    pub fn into_string(self) -> String {
        match self {
            Label::Text(s) => s,
            Label::Number(n) => n.to_string(),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Text(s) => f.write_str(s),
            Label::Number(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    name: String,
    domain: Vec<String>,
    ordered: bool,
    index: HashMap<String, usize>,
}

impl Variable {
    pub fn new(
        name: impl Into<String>,
        domain: impl IntoIterator<Item = impl Into<String>>,
        ordered: bool,
    ) -> Result<Self> {
        let name = name.into();
        let domain: Vec<String> = domain.into_iter().map(Into::into).collect();
        if name.is_empty() {
            return Err(Error::Schema("variable name must not be empty".into()));
        }
        if domain.len() < 2 {
            return Err(Error::Schema(format!(
                "domain of `{name}` needs at least two values"
            )));
        }
        let mut index = HashMap::with_capacity(domain.len());
        for (i, v) in domain.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(Error::Schema(format!(
                    "value `{v}` repeated in domain of `{name}`"
                )));
            }
        }
        Ok(Variable {
            name,
            domain,
            ordered,
            index,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }

    pub fn ordered(&self) -> bool {
        self.ordered
    }

    pub fn code(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownValue {
                variable: self.name.clone(),
                value: label.to_string(),
            })
    }

    pub fn label(&self, code: usize) -> &str {
        &self.domain[code]
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableDecl {
    pub name: String,
    pub domain: Vec<Label>,
    #[serde(default)]
    pub ordered: bool,
}

/// Ordered collection of variables with unique names.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Schema {
    variables: Vec<Variable>,
    by_name: HashMap<String, VarId>,
}

impl Schema {
    pub fn new(variables: Vec<Variable>) -> Result<Self> {
        let mut by_name = HashMap::with_capacity(variables.len());
        for (i, v) in variables.iter().enumerate() {
            if by_name.insert(v.name.clone(), i).is_some() {
                return Err(Error::Schema(format!("duplicate variable `{}`", v.name)));
            }
        }
        Ok(Schema { variables, by_name })
    }

    pub fn from_decls(decls: Vec<VariableDecl>) -> Result<Self> {
        let vars = decls
            .into_iter()
            .map(|d| {
                Variable::new(
                    d.name,
                    d.domain.into_iter().map(Label::into_string),
                    d.ordered,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Schema::new(vars)
    }

    pub fn to_decls(&self) -> Vec<VariableDecl> {
        self.variables
            .iter()
            .map(|v| VariableDecl {
                name: v.name.clone(),
                domain: v.domain.iter().cloned().map(Label::Text).collect(),
                ordered: v.ordered,
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.variables[id]
    }

    pub fn id(&self, name: &str) -> Result<VarId> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.by_name.contains_key(name)
    }

    pub fn get(&self, name: &str) -> Result<&Variable> {
        Ok(&self.variables[self.id(name)?])
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.variables.iter().map(|v| v.name.as_str())
    }

    /// Sub-schema with the named variables, in the given order.
    pub fn select<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> Result<Schema> {
        let vars = names
            .into_iter()
            .map(|n| self.get(n).cloned())
            .collect::<Result<Vec<_>>>()?;
        Schema::new(vars)
    }

    /// Copy of this schema with `var` appended, or replacing a variable with
    /// the same name.
    pub fn with_variable(&self, var: Variable) -> Schema {
        let mut vars = self.variables.clone();
        match self.by_name.get(var.name()) {
            Some(&i) => vars[i] = var,
            None => vars.push(var),
        }
        Schema::new(vars).expect("names stay unique")
    }
}
