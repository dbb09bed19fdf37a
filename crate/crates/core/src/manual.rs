//! Finite manuals (test spaces): operations over shared outcomes, events,
//! orthogonality, and the two coarsening constructions (packing and outcome
//! identification).
//!
//! A manual is a set of operations, each operation a set of mutually
//! exclusive outcomes. Operations may share outcomes; that sharing is the
//! only structural connection between experiments. Manuals are immutable
//! values: every coarsening returns a new manual.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Symbolic outcome identifier. Case-sensitive; equality is exact symbol
/// equality. The memory-manual convention `X_Y` (response X to a probe of
/// type Y) is documented but not enforced.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OutcomeId(String);

impl OutcomeId {
    pub fn new(id: impl Into<String>) -> Self {
        OutcomeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for OutcomeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for OutcomeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<&str> for OutcomeId {
    fn from(s: &str) -> Self {
        OutcomeId::new(s)
    }
}

impl From<String> for OutcomeId {
    fn from(s: String) -> Self {
        OutcomeId::new(s)
    }
}

/// One experiment, represented by its outcomes. The stored order is
/// presentational only; identity is the outcome set.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Operation {
    outcomes: Vec<OutcomeId>,
}

impl Operation {
    pub fn outcomes(&self) -> &[OutcomeId] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn contains(&self, id: &OutcomeId) -> bool {
        self.outcomes.iter().any(|o| o == id)
    }

    pub fn outcome_set(&self) -> BTreeSet<OutcomeId> {
        self.outcomes.iter().cloned().collect()
    }
}

impl PartialEq for Operation {
    fn eq(&self, other: &Self) -> bool {
        self.outcome_set() == other.outcome_set()
    }
}

impl Eq for Operation {}

/// An observable event: a subset of some operation's outcomes.
///
/// The witness records the lowest-index operation containing the set; it
/// makes downstream constructions deterministic but is not part of the
/// event's identity. Equality, ordering, and hashing use the outcome set
/// only.
#[derive(Clone, Debug, Serialize)]
pub struct Event {
    outcomes: BTreeSet<OutcomeId>,
    witness: usize,
}

impl Event {
    pub fn outcomes(&self) -> &BTreeSet<OutcomeId> {
        &self.outcomes
    }

    pub fn witness(&self) -> usize {
        self.witness
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn is_disjoint(&self, other: &Event) -> bool {
        self.outcomes.is_disjoint(&other.outcomes)
    }
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.outcomes == other.outcomes
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.outcomes.cmp(&other.outcomes)
    }
}

impl std::hash::Hash for Event {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.outcomes.hash(state);
    }
}

/// Violations of manual structure.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "kind")]
pub enum ManualError {
    #[error("manual has no operations")]
    EmptyManual,
    #[error("operation {op_index} has no outcomes")]
    EmptyOperation { op_index: usize },
    #[error("operation {op_index} contains an empty outcome identifier")]
    EmptyOutcomeId { op_index: usize },
    #[error("operation {op_index} lists outcome {outcome} more than once")]
    DuplicateOutcomeInOperation { op_index: usize, outcome: OutcomeId },
    #[error("operation {subset_index} is strictly contained in operation {superset_index}")]
    RedundantOperation {
        subset_index: usize,
        superset_index: usize,
    },
    #[error("unknown outcome {outcome}")]
    UnknownOutcome { outcome: OutcomeId },
    #[error("outcome set {outcomes:?} is contained in no single operation")]
    NotAnEvent { outcomes: Vec<OutcomeId> },
    #[error("no operation with index {op_index}")]
    NoSuchOperation { op_index: usize },
    #[error("packed set is not a nonempty proper subset of operation {op_index}")]
    PackedNotSubset { op_index: usize },
    #[error("outcome id {id} already occurs in the manual")]
    NewIdCollision { id: OutcomeId },
    #[error("identification merges outcomes {a} and {b} inside operation {op_index}")]
    MergeCollapsesOperation {
        op_index: usize,
        a: OutcomeId,
        b: OutcomeId,
    },
}

/// Wire form of a manual: `{"operations": [["T_T","R_T","U_T"], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManualSpec {
    pub operations: Vec<Vec<String>>,
}

/// Wire form of an outcome identification: `{"identify": {"from": "to"}}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IdentificationSpec {
    pub identify: BTreeMap<String, String>,
}

/// A finite test space: a set of operations, irredundant (no operation
/// strictly contained in another), with an index from each outcome to the
/// operations containing it. Immutable after validation.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "ManualSpec", into = "ManualSpec")]
pub struct Manual {
    operations: Vec<Operation>,
    outcome_index: BTreeMap<OutcomeId, BTreeSet<usize>>,
}

impl TryFrom<ManualSpec> for Manual {
    type Error = ManualError;

    fn try_from(spec: ManualSpec) -> Result<Self, ManualError> {
        Manual::validate(spec.operations)
    }
}

impl From<Manual> for ManualSpec {
    fn from(m: Manual) -> ManualSpec {
        ManualSpec {
            operations: m
                .operations
                .iter()
                .map(|op| op.outcomes.iter().map(|o| o.0.clone()).collect())
                .collect(),
        }
    }
}

/// Manuals are equal when they present the same set of operation sets;
/// presentational order of operations and outcomes is ignored.
impl PartialEq for Manual {
    fn eq(&self, other: &Self) -> bool {
        self.operation_sets() == other.operation_sets()
    }
}

impl Eq for Manual {}

impl Manual {
    /// Validates raw outcome-id lists into a manual.
    ///
    /// Duplicate presentations of the same operation set collapse (a manual
    /// is a set of sets); a strict containment between distinct operations
    /// is rejected as [`ManualError::RedundantOperation`], reported with the
    /// indices of the raw input.
    pub fn validate<S: Into<OutcomeId>>(raw_operations: Vec<Vec<S>>) -> Result<Manual, ManualError> {
        if raw_operations.is_empty() {
            return Err(ManualError::EmptyManual);
        }
        let raw: Vec<Vec<OutcomeId>> = raw_operations
            .into_iter()
            .map(|op| op.into_iter().map(Into::into).collect())
            .collect();

        let mut sets: Vec<BTreeSet<OutcomeId>> = Vec::with_capacity(raw.len());
        for (op_index, op) in raw.iter().enumerate() {
            if op.is_empty() {
                return Err(ManualError::EmptyOperation { op_index });
            }
            let mut set = BTreeSet::new();
            for id in op {
                if id.is_empty() {
                    return Err(ManualError::EmptyOutcomeId { op_index });
                }
                if !set.insert(id.clone()) {
                    return Err(ManualError::DuplicateOutcomeInOperation {
                        op_index,
                        outcome: id.clone(),
                    });
                }
            }
            sets.push(set);
        }

        for i in 0..sets.len() {
            for j in 0..sets.len() {
                if i != j && sets[i].len() < sets[j].len() && sets[i].is_subset(&sets[j]) {
                    return Err(ManualError::RedundantOperation {
                        subset_index: i,
                        superset_index: j,
                    });
                }
            }
        }

        // Collapse repeated presentations, keeping the first.
        let mut seen: BTreeSet<BTreeSet<OutcomeId>> = BTreeSet::new();
        let mut operations = Vec::new();
        for (op, set) in raw.into_iter().zip(sets) {
            if seen.insert(set) {
                operations.push(Operation { outcomes: op });
            }
        }

        let mut outcome_index: BTreeMap<OutcomeId, BTreeSet<usize>> = BTreeMap::new();
        for (idx, op) in operations.iter().enumerate() {
            for id in &op.outcomes {
                outcome_index.entry(id.clone()).or_default().insert(idx);
            }
        }

        Ok(Manual {
            operations,
            outcome_index,
        })
    }

    pub fn operations(&self) -> &[Operation] {
        &self.operations
    }

    pub fn outcome_index(&self) -> &BTreeMap<OutcomeId, BTreeSet<usize>> {
        &self.outcome_index
    }

    pub fn outcomes(&self) -> impl Iterator<Item = &OutcomeId> {
        self.outcome_index.keys()
    }

    pub fn num_outcomes(&self) -> usize {
        self.outcome_index.len()
    }

    pub fn contains_outcome(&self, id: &OutcomeId) -> bool {
        self.outcome_index.contains_key(id)
    }

    /// The manual as a set of operation sets (its mathematical identity).
    pub fn operation_sets(&self) -> BTreeSet<BTreeSet<OutcomeId>> {
        self.operations.iter().map(|op| op.outcome_set()).collect()
    }

    /// Rebuilds the outcome index from the operations. Always identical to
    /// the stored index; exposed so that can be checked.
    pub fn rebuild_outcome_index(&self) -> BTreeMap<OutcomeId, BTreeSet<usize>> {
        let mut index: BTreeMap<OutcomeId, BTreeSet<usize>> = BTreeMap::new();
        for (idx, op) in self.operations.iter().enumerate() {
            for id in &op.outcomes {
                index.entry(id.clone()).or_default().insert(idx);
            }
        }
        index
    }

    /// Recognizes a set of outcomes as an event, witnessed by the
    /// lowest-index operation containing it. The empty set is an event of
    /// every manual, witnessed by operation 0.
    pub fn is_event(&self, outcomes: &BTreeSet<OutcomeId>) -> Result<Event, ManualError> {
        for id in outcomes {
            if !self.contains_outcome(id) {
                return Err(ManualError::UnknownOutcome {
                    outcome: id.clone(),
                });
            }
        }
        if outcomes.is_empty() {
            return Ok(Event {
                outcomes: BTreeSet::new(),
                witness: 0,
            });
        }
        let witness = (0..self.operations.len()).find(|&idx| {
            let op = self.operations[idx].outcome_set();
            outcomes.is_subset(&op)
        });
        match witness {
            Some(witness) => Ok(Event {
                outcomes: outcomes.clone(),
                witness,
            }),
            None => Err(ManualError::NotAnEvent {
                outcomes: outcomes.iter().cloned().collect(),
            }),
        }
    }

    /// Convenience for building an event from anything iterable.
    pub fn event<S: Into<OutcomeId>>(
        &self,
        outcomes: impl IntoIterator<Item = S>,
    ) -> Result<Event, ManualError> {
        let set: BTreeSet<OutcomeId> = outcomes.into_iter().map(Into::into).collect();
        self.is_event(&set)
    }

    /// Two events operationally reject one another: disjoint, and their
    /// union is again an event.
    pub fn are_orthogonal(&self, a: &Event, b: &Event) -> bool {
        if !a.is_disjoint(b) {
            return false;
        }
        let union: BTreeSet<OutcomeId> = a.outcomes.union(&b.outcomes).cloned().collect();
        self.is_event(&union).is_ok()
    }

    /// All events orthogonal to `a` whose union with `a` is a full
    /// operation. There is exactly one per operation containing `a`.
    pub fn local_complements(&self, a: &Event) -> Vec<Event> {
        let mut result = Vec::new();
        for op in &self.operations {
            let op_set = op.outcome_set();
            if a.outcomes.is_subset(&op_set) {
                let complement: BTreeSet<OutcomeId> =
                    op_set.difference(&a.outcomes).cloned().collect();
                let event = self
                    .is_event(&complement)
                    .expect("difference of an operation and a subset is an event");
                result.push(event);
            }
        }
        result
    }

    /// Packs a nonempty proper subset of one operation's outcomes into a
    /// single fresh outcome. The packed outcome is a genuinely new outcome
    /// of a new two-or-more-outcome operation, not an alias for the packed
    /// event; other operations are untouched.
    pub fn coarsen_pack(
        &self,
        op_index: usize,
        packed: &BTreeSet<OutcomeId>,
        new_id: OutcomeId,
    ) -> Result<Manual, ManualError> {
        let op = self
            .operations
            .get(op_index)
            .ok_or(ManualError::NoSuchOperation { op_index })?;
        let op_set = op.outcome_set();
        if packed.is_empty() || !packed.is_subset(&op_set) || packed.len() == op_set.len() {
            return Err(ManualError::PackedNotSubset { op_index });
        }
        if self.contains_outcome(&new_id) {
            return Err(ManualError::NewIdCollision { id: new_id });
        }

        let mut raw: Vec<Vec<OutcomeId>> = self
            .operations
            .iter()
            .map(|o| o.outcomes.clone())
            .collect();
        let mut replaced = Vec::with_capacity(op.len() - packed.len() + 1);
        let mut inserted = false;
        for id in &op.outcomes {
            if packed.contains(id) {
                if !inserted {
                    replaced.push(new_id.clone());
                    inserted = true;
                }
            } else {
                replaced.push(id.clone());
            }
        }
        raw[op_index] = replaced;
        Manual::validate(raw)
    }

    /// Merges outcomes under an identification map (applied once, no
    /// chaining). Every key must be an existing outcome. The result is
    /// re-validated: merging may surface redundancy, and merging two
    /// outcomes of a single operation is rejected outright.
    pub fn identify_outcomes(
        &self,
        identification: &BTreeMap<OutcomeId, OutcomeId>,
    ) -> Result<Manual, ManualError> {
        for from in identification.keys() {
            if !self.contains_outcome(from) {
                return Err(ManualError::UnknownOutcome {
                    outcome: from.clone(),
                });
            }
        }
        let apply = |id: &OutcomeId| -> OutcomeId {
            identification.get(id).cloned().unwrap_or_else(|| id.clone())
        };

        let mut raw: Vec<Vec<OutcomeId>> = Vec::with_capacity(self.operations.len());
        for (op_index, op) in self.operations.iter().enumerate() {
            let mapped: Vec<OutcomeId> = op.outcomes.iter().map(&apply).collect();
            let mut seen: BTreeMap<OutcomeId, OutcomeId> = BTreeMap::new();
            for (orig, new) in op.outcomes.iter().zip(&mapped) {
                if let Some(prev) = seen.get(new) {
                    return Err(ManualError::MergeCollapsesOperation {
                        op_index,
                        a: prev.clone(),
                        b: orig.clone(),
                    });
                }
                seen.insert(new.clone(), orig.clone());
            }
            raw.push(mapped);
        }
        Manual::validate(raw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tru_raw() -> Vec<Vec<&'static str>> {
        vec![
            vec!["T_T", "R_T", "U_T"],
            vec!["T_R", "R_R", "U_R"],
            vec!["T_U", "R_U", "U_U"],
        ]
    }

    fn ids(list: &[&str]) -> BTreeSet<OutcomeId> {
        list.iter().map(|s| OutcomeId::from(*s)).collect()
    }

    #[test]
    fn validates_tru_manual() {
        let m = Manual::validate(tru_raw()).unwrap();
        assert_eq!(m.operations().len(), 3);
        assert_eq!(m.num_outcomes(), 9);
    }

    #[test]
    fn validates_minimal_manual() {
        let m = Manual::validate(vec![vec!["a"]]).unwrap();
        assert_eq!(m.operations().len(), 1);
        assert_eq!(m.num_outcomes(), 1);
    }

    #[test]
    fn rejects_subset_operation() {
        let err = Manual::validate(vec![vec!["a", "b"], vec!["a"]]).unwrap_err();
        assert_eq!(
            err,
            ManualError::RedundantOperation {
                subset_index: 1,
                superset_index: 0
            }
        );
    }

    #[test]
    fn rejects_duplicate_outcome_and_empty_operation() {
        let err = Manual::validate(vec![vec!["a", "a"]]).unwrap_err();
        assert!(matches!(
            err,
            ManualError::DuplicateOutcomeInOperation { op_index: 0, .. }
        ));
        let err = Manual::validate(vec![vec!["a"], vec![]]).unwrap_err();
        assert_eq!(err, ManualError::EmptyOperation { op_index: 1 });
        let err = Manual::validate(Vec::<Vec<&str>>::new()).unwrap_err();
        assert_eq!(err, ManualError::EmptyManual);
    }

    #[test]
    fn collapses_repeated_operations() {
        let m = Manual::validate(vec![vec!["a", "b"], vec!["b", "a"]]).unwrap();
        assert_eq!(m.operations().len(), 1);
    }

    #[test]
    fn event_recognition_uses_lowest_witness() {
        let m = Manual::validate(tru_raw()).unwrap();
        let e = m.is_event(&ids(&["R_T", "U_T"])).unwrap();
        assert_eq!(e.witness(), 0);
        assert_eq!(e.len(), 2);

        let empty = m.is_event(&BTreeSet::new()).unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.witness(), 0);

        let err = m.is_event(&ids(&["T_T", "T_R"])).unwrap_err();
        assert!(matches!(err, ManualError::NotAnEvent { .. }));

        let err = m.is_event(&ids(&["nope"])).unwrap_err();
        assert!(matches!(err, ManualError::UnknownOutcome { .. }));
    }

    #[test]
    fn orthogonality_examples() {
        let m = Manual::validate(tru_raw()).unwrap();
        let t = m.event(["T_T"]).unwrap();
        let r = m.event(["R_T"]).unwrap();
        assert!(m.are_orthogonal(&t, &r));
        assert!(m.are_orthogonal(&r, &t));
        assert!(!m.are_orthogonal(&t, &t));

        let overlap = Manual::validate(vec![vec!["a", "b", "c"], vec!["c", "d", "e"]]).unwrap();
        let a = overlap.event(["a"]).unwrap();
        let d = overlap.event(["d"]).unwrap();
        // Exhaustive enumeration over both operations: no operation
        // contains {a, d}, so the union is not an event.
        let mut all_events: BTreeSet<BTreeSet<OutcomeId>> = BTreeSet::new();
        for op in overlap.operations() {
            let items: Vec<_> = op.outcomes().to_vec();
            for mask in 0u32..(1 << items.len()) {
                let subset: BTreeSet<OutcomeId> = items
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, id)| id.clone())
                    .collect();
                all_events.insert(subset);
            }
        }
        assert!(!all_events.contains(&ids(&["a", "d"])));
        assert!(!overlap.are_orthogonal(&a, &d));
    }

    #[test]
    fn every_event_is_orthogonal_to_empty() {
        let m = Manual::validate(tru_raw()).unwrap();
        let empty = m.event(Vec::<&str>::new()).unwrap();
        for ev in [
            m.event(["T_T"]).unwrap(),
            m.event(["R_T", "U_T"]).unwrap(),
            m.event(["T_R", "R_R", "U_R"]).unwrap(),
        ] {
            assert!(m.are_orthogonal(&ev, &empty));
            assert!(m.are_orthogonal(&empty, &ev));
        }
    }

    #[test]
    fn local_complements_examples() {
        let dichotomy = Manual::validate(vec![vec!["T", "T'"]]).unwrap();
        let t = dichotomy.event(["T"]).unwrap();
        let comps = dichotomy.local_complements(&t);
        assert_eq!(comps, vec![dichotomy.event(["T'"]).unwrap()]);

        let m = Manual::validate(tru_raw()).unwrap();
        let comps = m.local_complements(&m.event(["T_T"]).unwrap());
        assert_eq!(comps, vec![m.event(["R_T", "U_T"]).unwrap()]);

        // Complements of the empty event are exactly the full operations.
        let empty = m.event(Vec::<&str>::new()).unwrap();
        let comps = m.local_complements(&empty);
        assert_eq!(comps.len(), 3);
        for (op, c) in m.operations().iter().zip(&comps) {
            assert_eq!(c.outcomes(), &op.outcome_set());
        }
    }

    #[test]
    fn local_complement_definition_replay() {
        let m = Manual::validate(vec![vec!["a", "b", "c"], vec!["c", "d", "e"]]).unwrap();
        let c = m.event(["c"]).unwrap();
        let comps = m.local_complements(&c);
        assert_eq!(comps.len(), 2);
        for comp in &comps {
            assert!(m.are_orthogonal(&c, comp));
            let union: BTreeSet<OutcomeId> =
                c.outcomes().union(comp.outcomes()).cloned().collect();
            assert!(m
                .operations()
                .iter()
                .any(|op| op.outcome_set() == union));
        }
    }

    #[test]
    fn coarsen_pack_tru_to_dichotomy() {
        let m = Manual::validate(tru_raw()).unwrap();
        let packed = ids(&["R_T", "U_T"]);
        let coarse = m.coarsen_pack(0, &packed, "T'_T".into()).unwrap();
        assert_eq!(
            coarse.operations()[0].outcome_set(),
            ids(&["T_T", "T'_T"])
        );
        assert_eq!(coarse.operations().len(), 3);
        assert_eq!(coarse.operations()[1], m.operations()[1]);
    }

    #[test]
    fn coarsen_pack_singleton_relabels() {
        let m = Manual::validate(tru_raw()).unwrap();
        let coarse = m.coarsen_pack(0, &ids(&["U_T"]), "U*_T".into()).unwrap();
        assert_eq!(
            coarse.operations()[0].outcome_set(),
            ids(&["T_T", "R_T", "U*_T"])
        );
    }

    #[test]
    fn coarsen_pack_rejects_full_operation_and_collisions() {
        let m = Manual::validate(tru_raw()).unwrap();
        let err = m
            .coarsen_pack(0, &ids(&["T_T", "R_T", "U_T"]), "X".into())
            .unwrap_err();
        assert_eq!(err, ManualError::PackedNotSubset { op_index: 0 });

        let err = m.coarsen_pack(0, &ids(&[]), "X".into()).unwrap_err();
        assert_eq!(err, ManualError::PackedNotSubset { op_index: 0 });

        let err = m
            .coarsen_pack(0, &ids(&["R_T", "U_T"]), "T_R".into())
            .unwrap_err();
        assert_eq!(
            err,
            ManualError::NewIdCollision { id: "T_R".into() }
        );

        let err = m
            .coarsen_pack(7, &ids(&["R_T"]), "X".into())
            .unwrap_err();
        assert_eq!(err, ManualError::NoSuchOperation { op_index: 7 });
    }

    #[test]
    fn disjoint_packs_commute() {
        let m = Manual::validate(tru_raw()).unwrap();
        let p1 = ids(&["R_T", "U_T"]);
        let p2 = ids(&["T_R", "R_R"]);
        let one_way = m
            .coarsen_pack(0, &p1, "T'_T".into())
            .unwrap()
            .coarsen_pack(1, &p2, "U'_R".into())
            .unwrap();
        let other_way = m
            .coarsen_pack(1, &p2, "U'_R".into())
            .unwrap()
            .coarsen_pack(0, &p1, "T'_T".into())
            .unwrap();
        assert_eq!(one_way, other_way);
    }

    #[test]
    fn identify_outcomes_identity_map_is_noop() {
        let m = Manual::validate(tru_raw()).unwrap();
        let map: BTreeMap<OutcomeId, OutcomeId> = m
            .outcomes()
            .map(|id| (id.clone(), id.clone()))
            .collect();
        assert_eq!(m.identify_outcomes(&map).unwrap(), m);
    }

    #[test]
    fn identify_outcomes_builds_combined_manual() {
        let combined = Manual::validate(vec![
            vec!["T_T@tru", "R_T@tru", "U_T@tru"],
            vec!["T_T", "T'_T"],
            vec!["R_T", "R'_T"],
            vec!["U_T", "U'_T"],
        ])
        .unwrap();
        let map: BTreeMap<OutcomeId, OutcomeId> = [
            ("T_T@tru", "T_T"),
            ("R_T@tru", "R_T"),
            ("U_T@tru", "U_T"),
        ]
        .into_iter()
        .map(|(a, b)| (OutcomeId::from(a), OutcomeId::from(b)))
        .collect();
        let merged = combined.identify_outcomes(&map).unwrap();
        assert_eq!(merged.operations().len(), 4);
        assert_eq!(merged.operations()[0].outcome_set(), ids(&["T_T", "R_T", "U_T"]));
        // T_T is now shared between the trichotomy and its dichotomy.
        assert_eq!(
            merged.outcome_index()[&OutcomeId::from("T_T")],
            [0usize, 1].into_iter().collect::<BTreeSet<_>>()
        );
    }

    #[test]
    fn identify_outcomes_rejects_collapse_within_operation() {
        let m = Manual::validate(tru_raw()).unwrap();
        let map: BTreeMap<OutcomeId, OutcomeId> =
            [(OutcomeId::from("R_T"), OutcomeId::from("U_T"))].into();
        let err = m.identify_outcomes(&map).unwrap_err();
        assert!(matches!(
            err,
            ManualError::MergeCollapsesOperation { op_index: 0, .. }
        ));
    }

    #[test]
    fn identify_outcomes_can_surface_redundancy() {
        let m = Manual::validate(vec![vec!["a", "b"], vec!["a", "c"]]).unwrap();
        let map: BTreeMap<OutcomeId, OutcomeId> =
            [(OutcomeId::from("c"), OutcomeId::from("b"))].into();
        // After merging, both operations are {a, b}: equal sets collapse
        // rather than conflict.
        let merged = m.identify_outcomes(&map).unwrap();
        assert_eq!(merged.operations().len(), 1);

        let m = Manual::validate(vec![vec!["a", "b", "x"], vec!["a", "c"]]).unwrap();
        let map: BTreeMap<OutcomeId, OutcomeId> =
            [(OutcomeId::from("c"), OutcomeId::from("b"))].into();
        let err = m.identify_outcomes(&map).unwrap_err();
        assert!(matches!(err, ManualError::RedundantOperation { .. }));
    }

    #[test]
    fn outcome_index_rebuild_matches() {
        let m = Manual::validate(vec![vec!["a", "b", "c"], vec!["c", "d", "e"]]).unwrap();
        assert_eq!(&m.rebuild_outcome_index(), m.outcome_index());
    }

    #[test]
    fn manual_json_round_trip() {
        let m = Manual::validate(tru_raw()).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.contains("\"operations\""));
        let back: Manual = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);

        let bad = r#"{"operations": [["a","b"],["a"]]}"#;
        let err = serde_json::from_str::<Manual>(bad).unwrap_err();
        assert!(err.to_string().contains("contained"));
    }
}
