use serde::{Deserialize, Serialize};

use crate::data::EventSpec;
use crate::error::{Error, Result};
use crate::schema::{Label, Schema, Variable};

/// Outcome declaration as it appears in model and session files.
///
/// `order` lists values from most to least desirable; it defaults to the
/// reverse of `domain`. `domain` may be omitted when the outcome is already
/// a schema variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeDecl {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Vec<Label>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<Label>>,
    pub threshold: Label,
}

/// Outcome variable with a desirability order and a positive threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeSpec {
    variable: Variable,
    /// Codes from most to least desirable.
    order: Vec<usize>,
    threshold: usize,
}

impl OutcomeSpec {
    /// `order` lists labels best first; `None` means the reverse of the
    /// variable's domain.
    pub fn new(variable: Variable, order: Option<Vec<String>>, threshold: &str) -> Result<Self> {
        let order: Vec<usize> = match order {
            None => (0..variable.len()).rev().collect(),
            Some(labels) => {
                let codes = labels
                    .iter()
                    .map(|l| variable.code(l))
                    .collect::<Result<Vec<_>>>()?;
                let mut sorted = codes.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != variable.len() || codes.len() != variable.len() {
                    return Err(Error::Schema(format!(
                        "order of `{}` must list every domain value once",
                        variable.name()
                    )));
                }
                codes
            }
        };
        let threshold = variable.code(threshold)?;
        if order[order.len() - 1] == threshold {
            return Err(Error::Schema(format!(
                "threshold of `{}` leaves no negative outcome",
                variable.name()
            )));
        }
        Ok(OutcomeSpec {
            variable,
            order,
            threshold,
        })
    }

    pub fn from_decl(decl: &OutcomeDecl, schema: Option<&Schema>) -> Result<Self> {
        let order: Option<Vec<String>> = decl
            .order
            .as_ref()
            .map(|o| o.iter().cloned().map(Label::into_string).collect());
        let domain: Vec<String> = match (&decl.domain, schema.and_then(|s| s.get(&decl.name).ok())) {
            (Some(d), _) => d.iter().cloned().map(Label::into_string).collect(),
            (None, Some(v)) => v.domain().to_vec(),
            (None, None) => match &order {
                Some(o) => o.iter().rev().cloned().collect(),
                None => {
                    return Err(Error::Schema(format!(
                        "outcome `{}` needs a domain or an order",
                        decl.name
                    )))
                }
            },
        };
        let variable = Variable::new(decl.name.clone(), domain, true)?;
        OutcomeSpec::new(variable, order, &decl.threshold.to_string())
    }

    pub fn to_decl(&self) -> OutcomeDecl {
        OutcomeDecl {
            name: self.variable.name().to_string(),
            domain: Some(
                self.variable
                    .domain()
                    .iter()
                    .cloned()
                    .map(Label::Text)
                    .collect(),
            ),
            order: Some(
                self.order
                    .iter()
                    .map(|&c| Label::Text(self.variable.label(c).to_string()))
                    .collect(),
            ),
            threshold: Label::Text(self.threshold_label().to_string()),
        }
    }

    pub fn name(&self) -> &str {
        self.variable.name()
    }

    pub fn variable(&self) -> &Variable {
        &self.variable
    }

    pub fn threshold_label(&self) -> &str {
        self.variable.label(self.threshold)
    }

    /// Labels from most to least desirable.
    pub fn order(&self) -> Vec<&str> {
        self.order.iter().map(|&c| self.variable.label(c)).collect()
    }

    /// Same outcome with a different threshold.
    pub fn with_threshold(&self, threshold: &str) -> Result<Self> {
        let order = self.order().into_iter().map(String::from).collect();
        OutcomeSpec::new(self.variable.clone(), Some(order), threshold)
    }

    pub fn is_positive_code(&self, code: usize) -> bool {
        let t = self.order.iter().position(|&c| c == self.threshold).unwrap();
        self.order[..=t].contains(&code)
    }

    /// Labels at or above the threshold.
    pub fn positive(&self) -> Vec<&str> {
        (0..self.variable.len())
            .filter(|&c| self.is_positive_code(c))
            .map(|c| self.variable.label(c))
            .collect()
    }

    pub fn negative(&self) -> Vec<&str> {
        (0..self.variable.len())
            .filter(|&c| !self.is_positive_code(c))
            .map(|c| self.variable.label(c))
            .collect()
    }

    /// Event `O ∈ O^≥`.
    pub fn positive_event(&self) -> EventSpec {
        EventSpec::new().with_any(self.name(), self.positive())
    }

    /// Event `O ∈ O^<`.
    pub fn negative_event(&self) -> EventSpec {
        EventSpec::new().with_any(self.name(), self.negative())
    }

    /// The most desirable negative value, used by two-valued backends.
    pub(crate) fn best_negative_code(&self) -> usize {
        *self
            .order
            .iter()
            .find(|&&c| !self.is_positive_code(c))
            .expect("threshold leaves a negative value")
    }
}
