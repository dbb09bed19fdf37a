//! The logic Π of a finite manual: events modulo perspectivity, with the
//! induced order and orthocomplementation, and a brute-force orthomodularity
//! checker.
//!
//! Two events are perspective when they share a common local complement;
//! classes are formed by transitive closure. Favorable structure is
//! detected, never assumed: a manual whose classes do not carry a
//! well-defined orthocomplement or a genuine partial order yields a
//! structured degeneracy report instead of a `Logic`.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::manual::{Event, Manual, OutcomeId};

/// Default cap on the number of enumerated events (counted per operation,
/// before deduplication).
pub const DEFAULT_EVENT_CAP: u128 = 1 << 20;

/// A perspectivity class of events. The representative is the
/// lexicographically least member.
#[derive(Debug, Clone, Serialize)]
pub struct LogicElement {
    members: Vec<Event>,
    representative: Event,
}

impl LogicElement {
    pub fn members(&self) -> &[Event] {
        &self.members
    }

    pub fn representative(&self) -> &Event {
        &self.representative
    }
}

/// Ways the class construction can fail to produce an orthoposet skeleton.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "degeneracy")]
pub enum Degeneracy {
    /// The class of the empty event coincides with the class of the full
    /// operations.
    ZeroEqualsOne,
    /// Two local complements of one event fall into distinct classes.
    OrthocomplementIllDefined {
        event: Vec<OutcomeId>,
        complement_a: Vec<OutcomeId>,
        complement_b: Vec<OutcomeId>,
    },
    /// Distinct classes each contain a member included in a member of the
    /// other.
    OrderNotAntisymmetric {
        a: Vec<OutcomeId>,
        b: Vec<OutcomeId>,
    },
    /// The class relation `[A] <= [B]` (some member of `[A]` included in
    /// some member of `[B]`) fails to be transitive.
    OrderNotTransitive {
        a: Vec<OutcomeId>,
        b: Vec<OutcomeId>,
        c: Vec<OutcomeId>,
    },
}

#[derive(Debug, Clone, Error, Serialize)]
#[serde(tag = "kind")]
pub enum LogicError {
    #[error("manual has on the order of {estimated} events, above the cap {cap}")]
    EventCapExceeded { estimated: u128, cap: u128 },
    #[error("logic construction degenerate: {0:?}")]
    Degenerate(Degeneracy),
}

/// First failure found by the orthomodularity checker, by element index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum OmpCounterexample {
    InvolutionFailure { p: usize },
    OrderReversalFailure { p: usize, q: usize },
    /// p ∨ p′ does not exist or is not 1 (or dually for the meet).
    ComplementJoinFailure { p: usize },
    ComplementMeetFailure { p: usize },
    /// p ⊥ q but p ∨ q does not exist.
    OrthogonalJoinMissing { p: usize, q: usize },
    /// p ≤ q but no r ≤ p′ has q = p ∨ r.
    OrthomodularLawFailure { p: usize, q: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct OmpVerdict {
    pub orthomodular: bool,
    pub counterexample: Option<OmpCounterexample>,
}

/// The logic of a finite manual.
#[derive(Debug, Clone)]
pub struct Logic {
    elements: Vec<LogicElement>,
    leq: Vec<Vec<bool>>,
    orthocomplement: Vec<usize>,
    zero: usize,
    one: usize,
}

/// Builds the logic with the default event cap.
pub fn build_logic(manual: &Manual) -> Result<Logic, LogicError> {
    build_logic_with_cap(manual, DEFAULT_EVENT_CAP)
}

/// Enumerates all events, forms perspectivity classes (transitive closure
/// of sharing a common local complement), and equips the classes with the
/// inclusion-induced order and the complement-induced orthocomplementation.
pub fn build_logic_with_cap(manual: &Manual, cap: u128) -> Result<Logic, LogicError> {
    let estimated: u128 = manual
        .operations()
        .iter()
        .map(|op| 1u128.checked_shl(op.len() as u32).unwrap_or(u128::MAX))
        .fold(0u128, |acc, x| acc.saturating_add(x));
    if estimated > cap {
        return Err(LogicError::EventCapExceeded { estimated, cap });
    }

    // All distinct events, in outcome-set order.
    let mut event_sets: BTreeSet<BTreeSet<OutcomeId>> = BTreeSet::new();
    for op in manual.operations() {
        let items = op.outcomes();
        for mask in 0u128..(1u128 << items.len()) {
            let subset: BTreeSet<OutcomeId> = items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, id)| id.clone())
                .collect();
            event_sets.insert(subset);
        }
    }
    let events: Vec<Event> = event_sets
        .iter()
        .map(|set| {
            manual
                .is_event(set)
                .expect("enumerated subsets of operations are events")
        })
        .collect();
    let index_of: BTreeMap<&BTreeSet<OutcomeId>, usize> = events
        .iter()
        .enumerate()
        .map(|(i, e)| (e.outcomes(), i))
        .collect();

    // Local complements, as event indices.
    let complements: Vec<Vec<usize>> = events
        .iter()
        .map(|e| {
            manual
                .local_complements(e)
                .iter()
                .map(|c| index_of[c.outcomes()])
                .collect()
        })
        .collect();

    // Perspectivity: union everything that shares a complement, then close
    // transitively (union-find does the closure).
    let mut uf = UnionFind::new(events.len());
    let mut holders: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (e, comps) in complements.iter().enumerate() {
        for &c in comps {
            holders.entry(c).or_default().push(e);
        }
    }
    for bucket in holders.values() {
        for pair in bucket.windows(2) {
            uf.union(pair[0], pair[1]);
        }
    }

    let mut class_of_root: BTreeMap<usize, usize> = BTreeMap::new();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for e in 0..events.len() {
        let root = uf.find(e);
        let class = *class_of_root.entry(root).or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[class].push(e);
    }
    // Events were enumerated in order, so each class's members are sorted
    // and the first is the lexicographically least representative.
    let elements: Vec<LogicElement> = classes
        .iter()
        .map(|members| LogicElement {
            members: members.iter().map(|&e| events[e].clone()).collect(),
            representative: events[members[0]].clone(),
        })
        .collect();
    let class_of_event: Vec<usize> = {
        let mut v = vec![0usize; events.len()];
        for (class, members) in classes.iter().enumerate() {
            for &e in members {
                v[e] = class;
            }
        }
        v
    };

    let empty_idx = index_of[&BTreeSet::new()];
    let zero = class_of_event[empty_idx];
    let full_idx = index_of[&manual.operations()[0].outcome_set()];
    let one = class_of_event[full_idx];
    if zero == one {
        return Err(LogicError::Degenerate(Degeneracy::ZeroEqualsOne));
    }

    // Orthocomplement: every local complement of every member of a class
    // must land in a single class.
    let mut orthocomplement = vec![usize::MAX; elements.len()];
    for (class, members) in classes.iter().enumerate() {
        let mut target: Option<(usize, usize)> = None;
        for &e in members {
            for &c in &complements[e] {
                let cc = class_of_event[c];
                match target {
                    None => target = Some((cc, c)),
                    Some((expected, first)) if expected != cc => {
                        return Err(LogicError::Degenerate(
                            Degeneracy::OrthocomplementIllDefined {
                                event: events[e].outcomes().iter().cloned().collect(),
                                complement_a: events[first]
                                    .outcomes()
                                    .iter()
                                    .cloned()
                                    .collect(),
                                complement_b: events[c]
                                    .outcomes()
                                    .iter()
                                    .cloned()
                                    .collect(),
                            },
                        ));
                    }
                    _ => {}
                }
            }
        }
        orthocomplement[class] =
            target.expect("every event has at least one local complement").0;
    }

    // Order: [A] ≤ [B] iff some member of [A] is included in some member
    // of [B]. Reflexive by construction; antisymmetry and transitivity are
    // checked, not assumed.
    let n = elements.len();
    let mut leq = vec![vec![false; n]; n];
    for (p, p_members) in classes.iter().enumerate() {
        for (q, q_members) in classes.iter().enumerate() {
            leq[p][q] = p_members.iter().any(|&a| {
                q_members
                    .iter()
                    .any(|&b| events[a].outcomes().is_subset(events[b].outcomes()))
            });
        }
    }
    let rep = |p: usize| -> Vec<OutcomeId> {
        elements[p].representative().outcomes().iter().cloned().collect()
    };
    #[allow(clippy::needless_range_loop)]
    for p in 0..n {
        for q in 0..n {
            if p != q && leq[p][q] && leq[q][p] {
                return Err(LogicError::Degenerate(Degeneracy::OrderNotAntisymmetric {
                    a: rep(p),
                    b: rep(q),
                }));
            }
        }
    }
    #[allow(clippy::needless_range_loop)]
    for p in 0..n {
        for q in 0..n {
            if leq[p][q] {
                for r in 0..n {
                    if leq[q][r] && !leq[p][r] {
                        return Err(LogicError::Degenerate(Degeneracy::OrderNotTransitive {
                            a: rep(p),
                            b: rep(q),
                            c: rep(r),
                        }));
                    }
                }
            }
        }
    }

    Ok(Logic {
        elements,
        leq,
        orthocomplement,
        zero,
        one,
    })
}

impl Logic {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[LogicElement] {
        &self.elements
    }

    pub fn zero(&self) -> usize {
        self.zero
    }

    pub fn one(&self) -> usize {
        self.one
    }

    pub fn leq(&self, p: usize, q: usize) -> bool {
        self.leq[p][q]
    }

    pub fn orthocomplement(&self, p: usize) -> usize {
        self.orthocomplement[p]
    }

    /// p and q are orthogonal when p ≤ q′.
    pub fn orthogonal(&self, p: usize, q: usize) -> bool {
        self.leq(p, self.orthocomplement(q))
    }

    /// The class containing an event with the given outcome set, if any.
    pub fn class_of(&self, outcomes: &BTreeSet<OutcomeId>) -> Option<usize> {
        self.elements.iter().position(|el| {
            el.members.iter().any(|m| m.outcomes() == outcomes)
        })
    }

    /// Least upper bound of a set of elements, when it exists in the poset.
    pub fn lub(&self, of: &[usize]) -> Option<usize> {
        let uppers: Vec<usize> = (0..self.len())
            .filter(|&u| of.iter().all(|&p| self.leq(p, u)))
            .collect();
        uppers
            .iter()
            .copied()
            .find(|&u0| uppers.iter().all(|&u| self.leq(u0, u)))
    }

    /// Greatest lower bound, when it exists.
    pub fn glb(&self, of: &[usize]) -> Option<usize> {
        let lowers: Vec<usize> = (0..self.len())
            .filter(|&l| of.iter().all(|&p| self.leq(l, p)))
            .collect();
        lowers
            .iter()
            .copied()
            .find(|&l0| lowers.iter().all(|&l| self.leq(l, l0)))
    }

    /// Elements covering zero.
    pub fn atoms(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&p| p != self.zero && self.covers(self.zero, p))
            .collect()
    }

    /// q covers p: p < q with nothing strictly between.
    pub fn covers(&self, p: usize, q: usize) -> bool {
        p != q
            && self.leq(p, q)
            && !(0..self.len())
                .any(|r| r != p && r != q && self.leq(p, r) && self.leq(r, q))
    }

    /// Covering pairs (p, q), the Hasse diagram edges.
    pub fn hasse_edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for p in 0..self.len() {
            for q in 0..self.len() {
                if self.covers(p, q) {
                    edges.push((p, q));
                }
            }
        }
        edges
    }

    /// Read-only view of an element as a (confirming, refuting) pair of
    /// outcome sets: the union of its members' outcomes, and the union of
    /// its orthocomplement's members' outcomes.
    pub fn proposition_view(&self, p: usize) -> (BTreeSet<OutcomeId>, BTreeSet<OutcomeId>) {
        let collect = |idx: usize| -> BTreeSet<OutcomeId> {
            self.elements[idx]
                .members
                .iter()
                .flat_map(|m| m.outcomes().iter().cloned())
                .collect()
        };
        (collect(p), collect(self.orthocomplement(p)))
    }

    /// Brute-force orthoposet and orthomodularity check. Verifies, in
    /// order: involution, order reversal, p ∨ p′ = 1 and p ∧ p′ = 0,
    /// existence of orthogonal joins, and the orthomodular law (for every
    /// p ≤ q some r ≤ p′ has q as the least upper bound of {p, r}).
    /// Returns the first counterexample on failure.
    pub fn is_orthomodular_poset(&self) -> OmpVerdict {
        let n = self.len();
        let fail = |c: OmpCounterexample| OmpVerdict {
            orthomodular: false,
            counterexample: Some(c),
        };
        for p in 0..n {
            if self.orthocomplement(self.orthocomplement(p)) != p {
                return fail(OmpCounterexample::InvolutionFailure { p });
            }
        }
        for p in 0..n {
            for q in 0..n {
                if self.leq(p, q)
                    && !self.leq(self.orthocomplement(q), self.orthocomplement(p))
                {
                    return fail(OmpCounterexample::OrderReversalFailure { p, q });
                }
            }
        }
        for p in 0..n {
            if self.lub(&[p, self.orthocomplement(p)]) != Some(self.one) {
                return fail(OmpCounterexample::ComplementJoinFailure { p });
            }
            if self.glb(&[p, self.orthocomplement(p)]) != Some(self.zero) {
                return fail(OmpCounterexample::ComplementMeetFailure { p });
            }
        }
        for p in 0..n {
            for q in 0..n {
                if self.orthogonal(p, q) && self.lub(&[p, q]).is_none() {
                    return fail(OmpCounterexample::OrthogonalJoinMissing { p, q });
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                if self.leq(p, q) {
                    let pperp = self.orthocomplement(p);
                    let witness = (0..n).any(|r| {
                        self.leq(r, pperp) && self.lub(&[p, r]) == Some(q)
                    });
                    if !witness {
                        return fail(OmpCounterexample::OrthomodularLawFailure { p, q });
                    }
                }
            }
        }
        OmpVerdict {
            orthomodular: true,
            counterexample: None,
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disjoint_manual(k: usize, n: usize) -> Manual {
        let raw: Vec<Vec<String>> = (0..k)
            .map(|op| (0..n).map(|i| format!("x{op}_{i}")).collect())
            .collect();
        Manual::validate(raw).unwrap()
    }

    #[test]
    fn single_tru_operation_is_boolean_eight() {
        let m = Manual::validate(vec![vec!["T", "R", "U"]]).unwrap();
        let logic = build_logic(&m).unwrap();
        assert_eq!(logic.len(), 8);
        assert_eq!(logic.atoms().len(), 3);
        assert!(logic.is_orthomodular_poset().orthomodular);
    }

    #[test]
    fn nine_dichotomies_have_twenty_elements() {
        let logic = build_logic(&disjoint_manual(9, 2)).unwrap();
        assert_eq!(logic.len(), 20);
        assert_eq!(logic.atoms().len(), 18);
        assert!(logic.is_orthomodular_poset().orthomodular);
    }

    #[test]
    fn single_outcome_manual_gives_two_element_logic() {
        let m = Manual::validate(vec![vec!["a"]]).unwrap();
        let logic = build_logic(&m).unwrap();
        assert_eq!(logic.len(), 2);
        assert_ne!(logic.zero(), logic.one());
        assert!(logic.is_orthomodular_poset().orthomodular);
    }

    #[test]
    fn disjoint_block_counts_match_closed_form() {
        for (k, n) in [(1usize, 2usize), (1, 3), (9, 2), (3, 3)] {
            let logic = build_logic(&disjoint_manual(k, n)).unwrap();
            assert_eq!(
                logic.len(),
                2 + k * ((1 << n) - 2),
                "block count mismatch at k={k}, n={n}"
            );
            assert!(logic.is_orthomodular_poset().orthomodular);
        }
    }

    #[test]
    fn overlap_manual_logic_structure() {
        // Two 3-outcome operations sharing one outcome: 12 classes, with
        // {a,b} and {d,e} identified through the shared complement {c}.
        let m = Manual::validate(vec![vec!["a", "b", "c"], vec!["c", "d", "e"]]).unwrap();
        let logic = build_logic(&m).unwrap();
        assert_eq!(logic.len(), 12);
        let ab: BTreeSet<OutcomeId> = ["a", "b"].into_iter().map(OutcomeId::from).collect();
        let de: BTreeSet<OutcomeId> = ["d", "e"].into_iter().map(OutcomeId::from).collect();
        assert_eq!(logic.class_of(&ab), logic.class_of(&de));
        let c: BTreeSet<OutcomeId> = ["c"].into_iter().map(OutcomeId::from).collect();
        let c_class = logic.class_of(&c).unwrap();
        assert_eq!(logic.orthocomplement(c_class), logic.class_of(&ab).unwrap());
        assert!(logic.is_orthomodular_poset().orthomodular);
    }

    #[test]
    fn bounds_and_involution_hold() {
        let logic = build_logic(&disjoint_manual(3, 3)).unwrap();
        for p in 0..logic.len() {
            assert!(logic.leq(logic.zero(), p));
            assert!(logic.leq(p, logic.one()));
            assert_eq!(logic.orthocomplement(logic.orthocomplement(p)), p);
            for q in 0..logic.len() {
                if logic.leq(p, q) {
                    assert!(logic.leq(logic.orthocomplement(q), logic.orthocomplement(p)));
                }
            }
        }
    }

    #[test]
    fn proposition_view_of_atom() {
        let m = Manual::validate(vec![vec!["T", "T'"]]).unwrap();
        let logic = build_logic(&m).unwrap();
        let t: BTreeSet<OutcomeId> = ["T"].into_iter().map(OutcomeId::from).collect();
        let t_class = logic.class_of(&t).unwrap();
        let (confirm, refute) = logic.proposition_view(t_class);
        assert_eq!(confirm, t);
        let tp: BTreeSet<OutcomeId> = ["T'"].into_iter().map(OutcomeId::from).collect();
        assert_eq!(refute, tp);
    }

    #[test]
    fn event_cap_is_enforced() {
        let m = disjoint_manual(2, 12);
        let err = build_logic_with_cap(&m, 1 << 10).unwrap_err();
        assert!(matches!(err, LogicError::EventCapExceeded { .. }));
    }

    #[test]
    fn hasse_edges_of_boolean_two() {
        let m = Manual::validate(vec![vec!["a", "b"]]).unwrap();
        let logic = build_logic(&m).unwrap();
        assert_eq!(logic.len(), 4);
        let edges = logic.hasse_edges();
        // 0 -> each atom -> 1.
        assert_eq!(edges.len(), 4);
        assert!(edges.iter().all(|&(p, q)| p != q && logic.leq(p, q)));
    }
}
