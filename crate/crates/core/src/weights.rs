//! Weight functions on manuals: validation against the per-operation sum
//! rule, the weight-space dimension of unconnected manuals, event
//! probabilities, and the Foulis-Piron-Randall superposition relation.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::manual::{Event, Manual, OutcomeId};
use crate::scalar::Real;

/// Sum-rule tolerance. Empirical weights come from frequencies and
/// theory-generated weights from exact arithmetic; 1e-9 separates modeling
/// error (reported) from float error (absorbed).
pub const OPERATION_SUM_TOL: f64 = 1e-9;

/// Violations of the weight-function contract.
#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[serde(tag = "kind", bound = "")]
pub enum WeightError<R: Real> {
    #[error("outcome {outcome} has no assigned value")]
    MissingOutcome { outcome: OutcomeId },
    #[error("value assigned to unknown outcome {outcome}")]
    UnknownOutcome { outcome: OutcomeId },
    #[error("value {value} for outcome {outcome} is outside [0, 1]")]
    ValueOutOfRange { outcome: OutcomeId, value: R },
    #[error("operation {op_index} sums to {sum}, not 1")]
    OperationSumViolation {
        op_index: usize,
        outcomes: Vec<OutcomeId>,
        sum: R,
    },
    #[error("weight functions are defined on different manuals")]
    ManualMismatch,
}

/// A probability assignment to every outcome of a manual, summing to 1 on
/// each operation. Values are stored for all outcomes explicitly, so
/// validation failures are attributable.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFunction<R: Real> {
    manual: Arc<Manual>,
    values: BTreeMap<OutcomeId, R>,
}

/// Wire form of a weight function:
/// `{"manual": {"operations": [...]}, "weights": {"T_T": 0.95, ...}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct WeightSpec<R: Real> {
    pub manual: Manual,
    pub weights: BTreeMap<OutcomeId, R>,
}

impl<R: Real> WeightFunction<R> {
    /// Validates a value map into a weight function: every outcome covered,
    /// every value in `[0, 1]`, every operation summing to 1 within
    /// [`OPERATION_SUM_TOL`]. The first failing operation is reported with
    /// its sum.
    pub fn validate(
        manual: Arc<Manual>,
        values: BTreeMap<OutcomeId, R>,
    ) -> Result<Self, WeightError<R>> {
        for id in values.keys() {
            if !manual.contains_outcome(id) {
                return Err(WeightError::UnknownOutcome {
                    outcome: id.clone(),
                });
            }
        }
        for id in manual.outcomes() {
            match values.get(id) {
                None => {
                    return Err(WeightError::MissingOutcome {
                        outcome: id.clone(),
                    })
                }
                Some(&v) => {
                    if !(v >= R::zero() && v <= R::one()) {
                        return Err(WeightError::ValueOutOfRange {
                            outcome: id.clone(),
                            value: v,
                        });
                    }
                }
            }
        }
        let tol = R::tol(OPERATION_SUM_TOL);
        for (op_index, sum) in operation_sums(&manual, &values)?.into_iter().enumerate() {
            if (sum - R::one()).abs() > tol {
                return Err(WeightError::OperationSumViolation {
                    op_index,
                    outcomes: manual.operations()[op_index].outcomes().to_vec(),
                    sum,
                });
            }
        }
        Ok(WeightFunction { manual, values })
    }

    pub fn from_spec(spec: WeightSpec<R>) -> Result<Self, WeightError<R>> {
        WeightFunction::validate(Arc::new(spec.manual), spec.weights)
    }

    pub fn manual(&self) -> &Arc<Manual> {
        &self.manual
    }

    pub fn values(&self) -> &BTreeMap<OutcomeId, R> {
        &self.values
    }

    /// Value at one outcome. The outcome must belong to the manual.
    pub fn value(&self, id: &OutcomeId) -> R {
        *self
            .values
            .get(id)
            .expect("weight function covers every outcome of its manual")
    }

    /// Probability of an event: the sum of the weights of its outcomes.
    ///
    /// Every outcome of the event must carry a value here. The event may be
    /// witnessed by a refinement of this manual: comparing a packed
    /// outcome's weight against the probability of the unpacked event is
    /// exactly the comparison that needs this.
    pub fn event_probability(&self, event: &Event) -> R {
        event.outcomes().iter().map(|id| self.value(id)).sum()
    }

    pub fn to_spec(&self) -> WeightSpec<R> {
        WeightSpec {
            manual: (*self.manual).clone(),
            weights: self.values.clone(),
        }
    }
}

/// Per-operation sums of a candidate value map (useful before validation,
/// e.g. to quantify how badly a sum rule fails).
pub fn operation_sums<R: Real>(
    manual: &Manual,
    values: &BTreeMap<OutcomeId, R>,
) -> Result<Vec<R>, WeightError<R>> {
    manual
        .operations()
        .iter()
        .map(|op| {
            op.outcomes()
                .iter()
                .map(|id| {
                    values
                        .get(id)
                        .copied()
                        .ok_or_else(|| WeightError::MissingOutcome {
                            outcome: id.clone(),
                        })
                })
                .sum()
        })
        .collect()
}

/// Dimension of the weight space, when the manual's structure makes it a
/// product of simplices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum WeightSpaceDof {
    /// No outcome is shared between operations; the weight space is a
    /// product of simplices with this dimension.
    Unconnected { dof: usize },
    /// A shared outcome couples two operations; general weight spaces are
    /// polytopes and their dimension is not computed here.
    Connected {
        outcome: OutcomeId,
        operations: (usize, usize),
    },
}

/// Σ (|op| − 1) for unconnected (semiclassical) manuals, or a report naming
/// a shared outcome.
pub fn weight_space_dof(manual: &Manual) -> WeightSpaceDof {
    for (id, ops) in manual.outcome_index() {
        if ops.len() > 1 {
            let mut it = ops.iter();
            let a = *it.next().expect("nonempty");
            let b = *it.next().expect("len > 1");
            return WeightSpaceDof::Connected {
                outcome: id.clone(),
                operations: (a, b),
            };
        }
    }
    WeightSpaceDof::Unconnected {
        dof: manual
            .operations()
            .iter()
            .map(|op| op.len() - 1)
            .sum(),
    }
}

/// Outcomes at which every generator vanishes exactly.
pub fn common_zero_set<R: Real>(generators: &[WeightFunction<R>]) -> BTreeSet<OutcomeId> {
    let mut zeros = BTreeSet::new();
    if generators.is_empty() {
        return zeros;
    }
    for id in generators[0].manual().outcomes() {
        if generators.iter().all(|g| g.value(id) == R::zero()) {
            zeros.insert(id.clone());
        }
    }
    zeros
}

/// The Foulis-Piron-Randall superposition relation: `omega` is a
/// superposition of the generators iff it vanishes on every outcome where
/// all generators vanish. The outcome-level check suffices for event-level
/// vanishing because weights are nonnegative and additive over an event's
/// outcomes.
///
/// With an empty generator set every outcome vacuously qualifies, so no
/// valid weight function is a superposition of nothing.
pub fn is_superposition<R: Real>(
    omega: &WeightFunction<R>,
    generators: &[WeightFunction<R>],
) -> Result<bool, WeightError<R>> {
    for g in generators {
        if g.manual() != omega.manual() {
            return Err(WeightError::ManualMismatch);
        }
    }
    if generators.is_empty() {
        return Ok(false);
    }
    Ok(common_zero_set(generators)
        .iter()
        .all(|id| omega.value(id) == R::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_tru() -> WeightFunction<f64> {
        let manual = Arc::new(
            Manual::validate(vec![
                vec!["T_T", "R_T", "U_T"],
                vec!["T_R", "R_R", "U_R"],
                vec!["T_U", "R_U", "U_U"],
            ])
            .unwrap(),
        );
        let values = manual
            .outcomes()
            .map(|id| (id.clone(), 1.0 / 3.0))
            .collect();
        WeightFunction::validate(manual, values).unwrap()
    }

    #[test]
    fn uniform_third_is_valid() {
        let w = uniform_tru();
        for sum in operation_sums(w.manual(), w.values()).unwrap() {
            assert!((sum - 1.0).abs() <= OPERATION_SUM_TOL);
        }
    }

    #[test]
    fn missing_and_out_of_range_values_are_rejected() {
        let manual = Arc::new(Manual::validate(vec![vec!["a", "b"]]).unwrap());
        let err = WeightFunction::<f64>::validate(
            manual.clone(),
            [(OutcomeId::from("a"), 1.0)].into(),
        )
        .unwrap_err();
        assert!(matches!(err, WeightError::MissingOutcome { .. }));

        let err = WeightFunction::validate(
            manual.clone(),
            [
                (OutcomeId::from("a"), 1.5),
                (OutcomeId::from("b"), -0.5),
            ]
            .into(),
        )
        .unwrap_err();
        assert!(matches!(err, WeightError::ValueOutOfRange { .. }));

        let err = WeightFunction::<f64>::validate(
            manual,
            [
                (OutcomeId::from("a"), 0.5),
                (OutcomeId::from("b"), 0.5),
                (OutcomeId::from("c"), 0.5),
            ]
            .into(),
        )
        .unwrap_err();
        assert!(matches!(err, WeightError::UnknownOutcome { .. }));
    }

    #[test]
    fn nan_values_are_rejected() {
        let manual = Arc::new(Manual::validate(vec![vec!["a", "b"]]).unwrap());
        let err = WeightFunction::validate(
            manual,
            [
                (OutcomeId::from("a"), f64::NAN),
                (OutcomeId::from("b"), 0.5),
            ]
            .into(),
        )
        .unwrap_err();
        assert!(matches!(err, WeightError::ValueOutOfRange { .. }));
    }

    #[test]
    fn sum_violation_reports_first_failing_operation() {
        let manual = Arc::new(
            Manual::validate(vec![vec!["a", "b"], vec!["c", "d"]]).unwrap(),
        );
        let err = WeightFunction::<f64>::validate(
            manual,
            [
                (OutcomeId::from("a"), 0.5),
                (OutcomeId::from("b"), 0.5),
                (OutcomeId::from("c"), 0.9),
                (OutcomeId::from("d"), 0.9),
            ]
            .into(),
        )
        .unwrap_err();
        match err {
            WeightError::OperationSumViolation { op_index, sum, .. } => {
                assert_eq!(op_index, 1);
                assert!((sum - 1.8).abs() < 1e-12);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn dof_examples() {
        let tru = uniform_tru();
        assert_eq!(
            weight_space_dof(tru.manual()),
            WeightSpaceDof::Unconnected { dof: 6 }
        );

        let connected = Manual::validate(vec![vec!["a", "b"], vec!["b", "c"]]).unwrap();
        match weight_space_dof(&connected) {
            WeightSpaceDof::Connected { outcome, .. } => {
                assert_eq!(outcome, OutcomeId::from("b"))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn event_probability_is_additive() {
        let w = uniform_tru();
        let e = w.manual().event(["R_T", "U_T"]).unwrap();
        assert!((w.event_probability(&e) - 2.0 / 3.0).abs() < 1e-12);
        let empty = w.manual().event(Vec::<&str>::new()).unwrap();
        assert_eq!(w.event_probability(&empty), 0.0);

        let a = w.manual().event(["T_T"]).unwrap();
        let b = w.manual().event(["R_T"]).unwrap();
        let ab = w.manual().event(["T_T", "R_T"]).unwrap();
        assert!(
            (w.event_probability(&ab)
                - (w.event_probability(&a) + w.event_probability(&b)))
            .abs()
                <= 1e-12
        );
    }

    #[test]
    fn superposition_is_reflexive_and_rejects_mismatched_manuals() {
        let w = uniform_tru();
        assert!(is_superposition(&w, std::slice::from_ref(&w)).unwrap());
        assert!(!is_superposition(&w, &[]).unwrap());

        let other = Arc::new(Manual::validate(vec![vec!["x", "y"]]).unwrap());
        let other_w = WeightFunction::validate(
            other,
            [
                (OutcomeId::from("x"), 0.5),
                (OutcomeId::from("y"), 0.5),
            ]
            .into(),
        )
        .unwrap();
        assert!(matches!(
            is_superposition(&w, &[other_w]),
            Err(WeightError::ManualMismatch)
        ));
    }

    #[test]
    fn weight_spec_json_round_trip() {
        let w = uniform_tru();
        let json = serde_json::to_string(&w.to_spec()).unwrap();
        assert!(json.contains("\"manual\"") && json.contains("\"weights\""));
        let spec: WeightSpec<f64> = serde_json::from_str(&json).unwrap();
        let back = WeightFunction::from_spec(spec).unwrap();
        assert_eq!(back.values(), w.values());
    }
}
