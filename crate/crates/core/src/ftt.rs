//! Fuzzy Trace Theory forward model for recognition memory.
//!
//! Covert-judgment parameters (identity and similarity for targets,
//! nonidentity and similarity for related distractors) determine the overt
//! response probabilities on two families of memory manuals: the nine
//! yes/no dichotomies actually run in experiments, and the three-way
//! target/related/unrelated forced choice. Identifying outcomes across the
//! two families over-counts by the gist-driven term, which is the
//! interference this module quantifies.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::manual::{Manual, OutcomeId};
use crate::scalar::Real;
use crate::weights::WeightFunction;

/// Response / probe labels: target, related distractor, unrelated
/// distractor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    T,
    R,
    U,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::T, Label::R, Label::U];

    pub fn index(self) -> usize {
        match self {
            Label::T => 0,
            Label::R => 1,
            Label::U => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::T => "T",
            Label::R => "R",
            Label::U => "U",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "T" => Ok(Label::T),
            "R" => Ok(Label::R),
            "U" => Ok(Label::U),
            other => Err(format!("expected T, R or U, got {other:?}")),
        }
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[serde(tag = "kind", bound = "")]
pub enum FttError<R: Real> {
    #[error("parameter {name} = {value} is outside [0, 1]")]
    ParamOutOfRange { name: &'static str, value: R },
}

fn check_unit<R: Real>(name: &'static str, value: R) -> Result<R, FttError<R>> {
    if value >= R::zero() && value <= R::one() {
        Ok(value)
    } else {
        Err(FttError::ParamOutOfRange { name, value })
    }
}

/// Covert-judgment probabilities: identity (targets), similarity given no
/// identity (targets), nonidentity (related distractors), similarity given
/// no nonidentity (related distractors).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FttParamsWire<R>", into = "FttParamsWire<R>", bound = "")]
pub struct FttParams<R: Real> {
    iota_t: R,
    sigma_t: R,
    nu_r: R,
    sigma_r: R,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(bound = "")]
struct FttParamsWire<R: Real> {
    iota_t: R,
    sigma_t: R,
    nu_r: R,
    sigma_r: R,
}

impl<R: Real> TryFrom<FttParamsWire<R>> for FttParams<R> {
    type Error = FttError<R>;

    fn try_from(w: FttParamsWire<R>) -> Result<Self, FttError<R>> {
        FttParams::new(w.iota_t, w.sigma_t, w.nu_r, w.sigma_r)
    }
}

impl<R: Real> From<FttParams<R>> for FttParamsWire<R> {
    fn from(p: FttParams<R>) -> Self {
        FttParamsWire {
            iota_t: p.iota_t,
            sigma_t: p.sigma_t,
            nu_r: p.nu_r,
            sigma_r: p.sigma_r,
        }
    }
}

impl<R: Real> FttParams<R> {
    pub fn new(iota_t: R, sigma_t: R, nu_r: R, sigma_r: R) -> Result<Self, FttError<R>> {
        Ok(FttParams {
            iota_t: check_unit("iota_t", iota_t)?,
            sigma_t: check_unit("sigma_t", sigma_t)?,
            nu_r: check_unit("nu_r", nu_r)?,
            sigma_r: check_unit("sigma_r", sigma_r)?,
        })
    }

    pub fn iota_t(&self) -> R {
        self.iota_t
    }

    pub fn sigma_t(&self) -> R {
        self.sigma_t
    }

    pub fn nu_r(&self) -> R {
        self.nu_r
    }

    pub fn sigma_r(&self) -> R {
        self.sigma_r
    }

    pub fn as_array(&self) -> [R; 4] {
        [self.iota_t, self.sigma_t, self.nu_r, self.sigma_r]
    }

    pub const NAMES: [&'static str; 4] = ["iota_t", "sigma_t", "nu_r", "sigma_r"];
}

/// Response biases, one per discrimination: the probability of answering
/// "Y" in the Y vs Y′ task when no covert judgment was made.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BiasParamsWire<R>", into = "BiasParamsWire<R>", bound = "")]
pub struct BiasParams<R: Real> {
    b_t: R,
    b_r: R,
    b_u: R,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(bound = "")]
struct BiasParamsWire<R: Real> {
    #[serde(rename = "b_T")]
    b_t: R,
    #[serde(rename = "b_R")]
    b_r: R,
    #[serde(rename = "b_U")]
    b_u: R,
}

impl<R: Real> TryFrom<BiasParamsWire<R>> for BiasParams<R> {
    type Error = FttError<R>;

    fn try_from(w: BiasParamsWire<R>) -> Result<Self, FttError<R>> {
        BiasParams::new(w.b_t, w.b_r, w.b_u)
    }
}

impl<R: Real> From<BiasParams<R>> for BiasParamsWire<R> {
    fn from(b: BiasParams<R>) -> Self {
        BiasParamsWire {
            b_t: b.b_t,
            b_r: b.b_r,
            b_u: b.b_u,
        }
    }
}

impl<R: Real> BiasParams<R> {
    pub fn new(b_t: R, b_r: R, b_u: R) -> Result<Self, FttError<R>> {
        Ok(BiasParams {
            b_t: check_unit("b_T", b_t)?,
            b_r: check_unit("b_R", b_r)?,
            b_u: check_unit("b_U", b_u)?,
        })
    }

    /// The bias-free baseline (0, 0, 1): never accept "T" or "R" without a
    /// judgment, and answer "U" in the U vs U′ task otherwise. This is the
    /// plain four-parameter model.
    pub fn baseline() -> Self {
        BiasParams {
            b_t: R::zero(),
            b_r: R::zero(),
            b_u: R::one(),
        }
    }

    pub fn b_t(&self) -> R {
        self.b_t
    }

    pub fn b_r(&self) -> R {
        self.b_r
    }

    pub fn b_u(&self) -> R {
        self.b_u
    }

    pub fn as_array(&self) -> [R; 3] {
        [self.b_t, self.b_r, self.b_u]
    }

    pub const NAMES: [&'static str; 3] = ["b_T", "b_R", "b_U"];
}

/// Combined wire form of parameters plus optional bias:
/// `{"iota_t":0.6,"sigma_t":0.5,"nu_r":0.4,"sigma_r":0.5,"bias":{"b_T":0,...}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ParamSpec<R: Real> {
    #[serde(flatten)]
    pub params: FttParams<R>,
    #[serde(default = "Option::default", skip_serializing_if = "Option::is_none")]
    pub bias: Option<BiasParams<R>>,
}

/// The nine response probabilities p(respond "Y" | probe Z) for the three
/// yes/no discriminations Y and three probe types Z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DichotomyPredictions<R: Real> {
    // p[discrimination][probe]
    p: [[R; 3]; 3],
}

impl<R: Real> DichotomyPredictions<R> {
    pub fn new(p: [[R; 3]; 3]) -> Self {
        DichotomyPredictions { p }
    }

    /// P(respond "Y" | probe of type Z) in the Y vs Y′ discrimination.
    pub fn p(&self, discrimination: Label, probe: Label) -> R {
        self.p[discrimination.index()][probe.index()]
    }

    pub fn as_rows(&self) -> &[[R; 3]; 3] {
        &self.p
    }

    /// Weight values on the nine-dichotomy outcome ids, with primed
    /// complements filled in as 1 − p.
    pub fn to_weight_values(&self) -> BTreeMap<OutcomeId, R> {
        let mut values = BTreeMap::new();
        for disc in Label::ALL {
            for probe in Label::ALL {
                let p = self.p(disc, probe);
                values.insert(outcome_id(disc, probe, false), p);
                values.insert(outcome_id(disc, probe, true), R::one() - p);
            }
        }
        values
    }
}

impl<R: Real> Serialize for DichotomyPredictions<R> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut outer = s.serialize_map(Some(3))?;
        for disc in Label::ALL {
            let row: BTreeMap<&str, R> = Label::ALL
                .iter()
                .map(|&probe| (probe.as_str(), self.p(disc, probe)))
                .collect();
            outer.serialize_entry(disc.as_str(), &row)?;
        }
        outer.end()
    }
}

impl<'de, R: Real> Deserialize<'de> for DichotomyPredictions<R> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V<R>(std::marker::PhantomData<R>);
        impl<'de, R: Real> Visitor<'de> for V<R> {
            type Value = DichotomyPredictions<R>;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map discrimination -> probe -> probability")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
                let mut p = [[None::<R>; 3]; 3];
                while let Some((disc, row)) = map.next_entry::<Label, BTreeMap<Label, R>>()? {
                    for (probe, value) in row {
                        p[disc.index()][probe.index()] = Some(value);
                    }
                }
                let mut out = [[R::zero(); 3]; 3];
                for disc in Label::ALL {
                    for probe in Label::ALL {
                        out[disc.index()][probe.index()] = p[disc.index()][probe.index()]
                            .ok_or_else(|| {
                                serde::de::Error::custom(format!(
                                    "missing prediction for {disc}|{probe}"
                                ))
                            })?;
                    }
                }
                Ok(DichotomyPredictions::new(out))
            }
        }
        d.deserialize_map(V(std::marker::PhantomData))
    }
}

/// Overt response probabilities for the nine dichotomies.
///
/// Identity and nonidentity judgments answer the discrimination from
/// verbatim information; a similarity judgment without them accepts
/// whichever of "T" or "R" is asked and denies "U"; with no judgment at
/// all, the discrimination's bias decides. The baseline bias (0, 0, 1)
/// yields the four-parameter model.
pub fn predict_dichotomies<R: Real>(
    params: &FttParams<R>,
    bias: Option<&BiasParams<R>>,
) -> DichotomyPredictions<R> {
    let baseline = BiasParams::baseline();
    let b = bias.unwrap_or(&baseline);
    let one = R::one();
    let (i, st) = (params.iota_t, params.sigma_t);
    let (v, sr) = (params.nu_r, params.sigma_r);

    // No-judgment branch weights per probe type.
    let none_t = (one - i) * (one - st);
    let none_r = (one - v) * (one - sr);

    let p_t_t = i + (one - i) * st + none_t * b.b_t;
    let p_t_r = (one - v) * sr + none_r * b.b_t;
    let p_t_u = b.b_t;

    let p_r_t = (one - i) * st + none_t * b.b_r;
    let p_r_r = v + (one - v) * sr + none_r * b.b_r;
    let p_r_u = b.b_r;

    let p_u_t = none_t * b.b_u;
    let p_u_r = none_r * b.b_u;
    let p_u_u = b.b_u;

    DichotomyPredictions::new([
        [p_t_t, p_t_r, p_t_u],
        [p_r_t, p_r_r, p_r_u],
        [p_u_t, p_u_r, p_u_u],
    ])
}

/// Per-probe-type sums of the dichotomy probabilities, read as if the
/// unprimed outcomes were identified with the three-way forced choice:
/// (1 + (1−ι_t)σ_t, 1 + (1−ν_r)σ_r, 1).
pub fn tru_sums<R: Real>(params: &FttParams<R>) -> [R; 3] {
    let one = R::one();
    [
        one + (one - params.iota_t) * params.sigma_t,
        one + (one - params.nu_r) * params.sigma_r,
        one,
    ]
}

/// How the covert similarity judgment resolves a genuine three-way forced
/// choice when no verbatim judgment was made.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", bound = "")]
#[derive(Default)]
pub enum TruResponseRule<R: Real> {
    /// Similarity without verbatim information responds "R".
    #[default]
    SimilarityAsRelated,
    /// Similarity without verbatim information responds "T" with the given
    /// share and "R" otherwise.
    SimilaritySplit { target_share: R },
}


impl<R: Real> TruResponseRule<R> {
    fn target_share(&self) -> R {
        match self {
            TruResponseRule::SimilarityAsRelated => R::zero(),
            TruResponseRule::SimilaritySplit { target_share } => *target_share,
        }
    }
}

/// Three-way forced-choice response probabilities per probe type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct TruPredictions<R: Real> {
    // p[probe][response]
    p: [[R; 3]; 3],
}

impl<R: Real> TruPredictions<R> {
    /// P(respond `response` | probe of type `probe`).
    pub fn p(&self, probe: Label, response: Label) -> R {
        self.p[probe.index()][response.index()]
    }

    pub fn row(&self, probe: Label) -> [R; 3] {
        self.p[probe.index()]
    }
}

/// Forward model for the three-way forced choice. Each row sums to exactly
/// 1: the "U" component is defined as one minus the other two.
pub fn predict_tru<R: Real>(
    params: &FttParams<R>,
    rule: TruResponseRule<R>,
) -> TruPredictions<R> {
    let one = R::one();
    let share = rule.target_share();
    let (i, st) = (params.iota_t, params.sigma_t);
    let (v, sr) = (params.nu_r, params.sigma_r);

    let target_t = i + (one - i) * st * share;
    let target_r = (one - i) * st * (one - share);
    let target_u = one - (target_t + target_r);

    let related_t = (one - v) * sr * share;
    let related_r = v + (one - v) * sr * (one - share);
    let related_u = one - (related_t + related_r);

    TruPredictions {
        p: [
            [target_t, target_r, target_u],
            [related_t, related_r, related_u],
            [R::zero(), R::zero(), one],
        ],
    }
}

/// The amount by which identified dichotomy probabilities over-count the
/// three-way operation: ((1−ι_t)σ_t, (1−ν_r)σ_r). Zero exactly when
/// verbatim information is perfect or gist-driven acceptance absent.
pub fn interference_excess<R: Real>(params: &FttParams<R>) -> (R, R) {
    let one = R::one();
    (
        (one - params.iota_t) * params.sigma_t,
        (one - params.nu_r) * params.sigma_r,
    )
}

/// Outcome id `Y_Z` (respond Y to a probe of type Z), primed for the
/// complementary outcome `Y'_Z`.
pub fn outcome_id(response: Label, probe: Label, primed: bool) -> OutcomeId {
    let prime = if primed { "'" } else { "" };
    OutcomeId::new(format!("{}{}_{}", response.as_str(), prime, probe.as_str()))
}

/// The three-way forced-choice manual: one TRU operation per probe type.
pub fn tru_manual() -> Manual {
    let raw: Vec<Vec<OutcomeId>> = Label::ALL
        .iter()
        .map(|&probe| {
            Label::ALL
                .iter()
                .map(|&resp| outcome_id(resp, probe, false))
                .collect()
        })
        .collect();
    Manual::validate(raw).expect("three disjoint trichotomies form a manual")
}

/// The nine yes/no operations: for each discrimination Y and probe type Z,
/// the dichotomy {Y_Z, Y'_Z}.
pub fn nine_dichotomy_manual() -> Manual {
    let mut raw: Vec<Vec<OutcomeId>> = Vec::with_capacity(9);
    for probe in Label::ALL {
        for disc in Label::ALL {
            raw.push(vec![
                outcome_id(disc, probe, false),
                outcome_id(disc, probe, true),
            ]);
        }
    }
    Manual::validate(raw).expect("nine disjoint dichotomies form a manual")
}

/// Suffix used to keep three-way outcomes distinct before identification.
const TRU_TAG: &str = "@tru";

/// The combined manual: the three TRU operations adjoined to the nine
/// dichotomies, with each three-way outcome identified with its
/// like-labeled dichotomy outcome. Returned with the identification map
/// that produced it. Structurally this is a valid manual; it is the weight
/// functions that refuse to live on it.
pub fn combined_manual() -> (Manual, BTreeMap<OutcomeId, OutcomeId>) {
    let mut raw: Vec<Vec<OutcomeId>> = Label::ALL
        .iter()
        .map(|&probe| {
            Label::ALL
                .iter()
                .map(|&resp| OutcomeId::new(format!("{}{}", outcome_id(resp, probe, false), TRU_TAG)))
                .collect()
        })
        .collect();
    for op in nine_dichotomy_manual().operations() {
        raw.push(op.outcomes().to_vec());
    }
    let disjoint = Manual::validate(raw).expect("tagged trichotomies and dichotomies are disjoint");
    let identification: BTreeMap<OutcomeId, OutcomeId> = Label::ALL
        .iter()
        .flat_map(|&probe| {
            Label::ALL.iter().map(move |&resp| {
                let clean = outcome_id(resp, probe, false);
                (OutcomeId::new(format!("{clean}{TRU_TAG}")), clean)
            })
        })
        .collect();
    let merged = disjoint
        .identify_outcomes(&identification)
        .expect("identification across disjoint families cannot collapse an operation");
    (merged, identification)
}

/// The three canonical states on the nine-dichotomy manual, as exact 0/1
/// weight functions: perfect verbatim and gist memory, no memory at all,
/// and perfect gist with no verbatim memory.
#[derive(Debug, Clone)]
pub struct CanonicalStates<R: Real> {
    pub manual: Arc<Manual>,
    pub omega_p: WeightFunction<R>,
    pub omega_0: WeightFunction<R>,
    pub omega_g: WeightFunction<R>,
}

pub fn canonical_states<R: Real>() -> CanonicalStates<R> {
    let manual = Arc::new(nine_dichotomy_manual());
    // Rows are (discrimination, probe) -> unprimed value.
    let columns: [(&str, [[u8; 3]; 3]); 3] = [
        ("omega_p", [[1, 0, 0], [0, 1, 0], [0, 0, 1]]),
        ("omega_0", [[0, 0, 0], [0, 0, 0], [1, 1, 1]]),
        ("omega_g", [[1, 1, 0], [1, 1, 0], [0, 0, 1]]),
    ];
    let mut built: Vec<WeightFunction<R>> = columns
        .iter()
        .map(|(_, table)| {
            let mut values = BTreeMap::new();
            for disc in Label::ALL {
                for probe in Label::ALL {
                    let v = if table[disc.index()][probe.index()] == 1 {
                        R::one()
                    } else {
                        R::zero()
                    };
                    values.insert(outcome_id(disc, probe, false), v);
                    values.insert(outcome_id(disc, probe, true), R::one() - v);
                }
            }
            WeightFunction::validate(manual.clone(), values)
                .expect("canonical 0/1 tables satisfy the sum rule")
        })
        .collect();
    let omega_g = built.pop().expect("three columns");
    let omega_0 = built.pop().expect("three columns");
    let omega_p = built.pop().expect("three columns");
    CanonicalStates {
        manual,
        omega_p,
        omega_0,
        omega_g,
    }
}
