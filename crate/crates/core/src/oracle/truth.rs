use super::{CfQuery, CfTarget, Scm};
use crate::error::Result;
use crate::scalar::Scalar;
use crate::scores::{ContrastQuery, ScoreKind, ScoreTriple};

impl Scm {
    /// One score by abduction, action and prediction. The model must
    /// contain the query's outcome variable.
    pub fn ground_truth_score<S: Scalar>(&self, q: &ContrastQuery, kind: ScoreKind) -> Result<S> {
        q.validate(self.schema())?;
        let o = q.outcome().positive_event();
        let o_neg = q.outcome().negative_event();
        let (x, x_prime) = (q.x_event(), q.x_prime_event());
        let k = q.context();
        let query = match kind {
            ScoreKind::Nec => CfQuery {
                targets: vec![CfTarget {
                    intervention: x_prime,
                    event: o_neg,
                }],
                evidence: o.and(&x).and(k),
            },
            ScoreKind::Suf => CfQuery {
                targets: vec![CfTarget {
                    intervention: x,
                    event: o,
                }],
                evidence: o_neg.and(&x_prime).and(k),
            },
            ScoreKind::Nesuf => CfQuery {
                targets: vec![
                    CfTarget {
                        intervention: x,
                        event: o,
                    },
                    CfTarget {
                        intervention: x_prime,
                        event: o_neg,
                    },
                ],
                evidence: k.clone(),
            },
        };
        self.counterfactual_prob(&query)
    }

    pub fn ground_truth_scores<S: Scalar>(&self, q: &ContrastQuery) -> Result<ScoreTriple<S>> {
        Ok(ScoreTriple {
            nec: self.ground_truth_score(q, ScoreKind::Nec)?,
            suf: self.ground_truth_score(q, ScoreKind::Suf)?,
            nesuf: self.ground_truth_score(q, ScoreKind::Nesuf)?,
        })
    }
}
