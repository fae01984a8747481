//! Mining models for construction principles and Factory Method.
//!
//! Detection only looks at structure: who declares which method, which
//! calls a known body makes (through `self` or an association), what is
//! abstract or overridden, and the generalization graph. Methods without a
//! known body contribute nothing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::expander::collect_instances;
use crate::model::{
    CallTarget, ClassifierId, ElementId, MethodId, Model, Multiplicity, Receiver, TagApplication,
    TagOrigin,
};
use crate::registry::Registry;

/// The tag sets the detector can propose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DetectKind {
    Unif,
    Sep,
    Comp,
    Dec,
    CoR,
    FacM,
}

impl DetectKind {
    pub const ALL: [DetectKind; 6] = [
        DetectKind::Unif,
        DetectKind::Sep,
        DetectKind::Comp,
        DetectKind::Dec,
        DetectKind::CoR,
        DetectKind::FacM,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DetectKind::Unif => "Unif",
            DetectKind::Sep => "Sep",
            DetectKind::Comp => "Comp",
            DetectKind::Dec => "Dec",
            DetectKind::CoR => "CoR",
            DetectKind::FacM => "FacM",
        }
    }
}

impl fmt::Display for DetectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DetectKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DetectKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                format!("unknown detection kind '{s}' (expected Unif, Sep, Comp, Dec, CoR or FacM)")
            })
    }
}

pub mod evidence {
    pub const CALLS_HOOK: &str = "calls-hook";
    pub const ASSOC_PRESENT: &str = "assoc-present";
    pub const HOOK_ABSTRACT: &str = "hook-abstract";
    pub const HOOK_OVERRIDDEN: &str = "hook-overridden";
    pub const HOOK_INTERFACE: &str = "hook-interface";
    pub const RETURNS_PRODUCT: &str = "returns-product";
    pub const CONCRETE_PRODUCT: &str = "concrete-product";
    pub const CONCRETE_CREATOR: &str = "concrete-creator";

    /// Codes every candidate of its kind has; they do not add to the score.
    pub const MANDATORY: [&str; 3] = [CALLS_HOOK, ASSOC_PRESENT, RETURNS_PRODUCT];
}

/// A proposed tag-set instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub kind: DetectKind,
    /// Role name (internal spelling, e.g. `facM-impl`) to bound elements.
    pub bindings: BTreeMap<String, Vec<ElementId>>,
    pub evidence: Vec<&'static str>,
    pub score: u32,
    /// The TH, T or Creator class.
    pub anchor: ClassifierId,
}

/// JSON shape of a candidate: `{set, bindings: {role: [qualifiedName]}, evidence, score}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CandidateRecord {
    pub set: String,
    pub bindings: BTreeMap<String, Vec<String>>,
    pub evidence: Vec<String>,
    pub score: u32,
}

impl Candidate {
    fn new(
        kind: DetectKind,
        anchor: ClassifierId,
        bindings: Vec<(&str, Vec<ElementId>)>,
        evidence: Vec<&'static str>,
    ) -> Self {
        let score = evidence
            .iter()
            .filter(|e| !evidence::MANDATORY.contains(e))
            .count() as u32;
        Candidate {
            kind,
            bindings: bindings
                .into_iter()
                .filter(|(_, v)| !v.is_empty())
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            evidence,
            score,
            anchor,
        }
    }

    pub fn set(&self) -> &'static str {
        self.kind.as_str()
    }

    pub fn bound(&self, role: &str) -> &[ElementId] {
        self.bindings.get(role).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn record(&self, model: &Model) -> CandidateRecord {
        CandidateRecord {
            set: self.set().to_string(),
            bindings: self
                .bindings
                .iter()
                .map(|(role, elements)| {
                    (
                        role.clone(),
                        elements.iter().map(|&e| model.qualified_name(e)).collect(),
                    )
                })
                .collect(),
            evidence: self.evidence.iter().map(|e| e.to_string()).collect(),
            score: self.score,
        }
    }

    fn order_key(&self) -> impl Ord + '_ {
        (
            ElementId::Classifier(self.anchor).position_key(),
            self.set(),
            std::cmp::Reverse(self.score),
            self.bindings
                .iter()
                .map(|(k, v)| {
                    (
                        k.as_str(),
                        v.iter().map(|e| e.position_key()).collect::<Vec<_>>(),
                    )
                })
                .collect::<Vec<_>>(),
        )
    }
}

/// Whether the body of `m` is given.
fn known_body(model: &Model, m: MethodId) -> bool {
    model.method(m).calls.is_some()
}

fn hook_evidence(model: &Model, hooks: &[MethodId], out: &mut Vec<&'static str>) {
    if hooks.iter().any(|&h| model.method(h).is_abstract) {
        out.push(evidence::HOOK_ABSTRACT);
    }
    if hooks.iter().any(|&h| !model.overrides_of(h).is_empty()) {
        out.push(evidence::HOOK_OVERRIDDEN);
    }
}

fn is_overridable(model: &Model, h: MethodId) -> bool {
    model.method(h).is_abstract || !model.overrides_of(h).is_empty()
}

fn methods(ids: &[MethodId]) -> Vec<ElementId> {
    ids.iter().map(|&m| ElementId::Method(m)).collect()
}

/// One Unification per (TH, t): `t` calls, through `self`, methods declared
/// in TH itself that are abstract or overridden, other than `t`.
fn unification(model: &Model) -> Vec<(ClassifierId, MethodId, Vec<MethodId>)> {
    let mut out = Vec::new();
    for class in model.classifier_ids() {
        for t in model.method_ids(class) {
            if !known_body(model, t) {
                continue;
            }
            let mut hooks: Vec<MethodId> = model
                .call_targets(t)
                .into_iter()
                .filter_map(|target| match target {
                    CallTarget::Resolved { site, method, .. }
                        if site.receiver == Receiver::SelfRef =>
                    {
                        Some(method)
                    }
                    _ => None,
                })
                .filter(|&h| h.classifier == class && h != t && is_overridable(model, h))
                .collect();
            hooks.sort();
            hooks.dedup();
            if !hooks.is_empty() {
                out.push((class, t, hooks));
            }
        }
    }
    out
}

/// A call from `t` in T through an association to hook `h` declared in H.
struct SeparatedCall {
    t: MethodId,
    h: MethodId,
    association: usize,
}

/// Calls through associations whose hook is abstract or sits in an interface.
/// Self-loop associations are included; callers filter.
fn separated_calls(model: &Model) -> Vec<SeparatedCall> {
    let mut out = Vec::new();
    for class in model.classifier_ids() {
        for t in model.method_ids(class) {
            if !known_body(model, t) {
                continue;
            }
            for target in model.call_targets(t) {
                let CallTarget::Resolved {
                    site, method: h, ..
                } = target
                else {
                    continue;
                };
                let Receiver::Association(label) = &site.receiver else {
                    continue;
                };
                let Some(association) = model.find_association(class, label) else {
                    continue;
                };
                let hook_class = model.classifier(h.classifier);
                if model.method(h).is_abstract || hook_class.is_interface() {
                    out.push(SeparatedCall { t, h, association });
                }
            }
        }
    }
    out
}

fn is_self_loop(model: &Model, association: usize) -> bool {
    model.association_source(association) == model.association_target(association)
}

fn separated_candidate(model: &Model, kind: DetectKind, call: &SeparatedCall) -> Candidate {
    let mut ev = vec![evidence::CALLS_HOOK, evidence::ASSOC_PRESENT];
    if model.method(call.h).is_abstract {
        ev.push(evidence::HOOK_ABSTRACT);
    }
    if model.classifier(call.h.classifier).is_interface() {
        ev.push(evidence::HOOK_INTERFACE);
    }
    if !model.overrides_of(call.h).is_empty() {
        ev.push(evidence::HOOK_OVERRIDDEN);
    }
    Candidate::new(
        kind,
        call.t.classifier,
        vec![
            ("T", vec![ElementId::Classifier(call.t.classifier)]),
            ("t", vec![ElementId::Method(call.t)]),
            ("H", vec![ElementId::Classifier(call.h.classifier)]),
            ("h", vec![ElementId::Method(call.h)]),
            ("ref", vec![ElementId::Association(call.association)]),
        ],
        ev,
    )
}

/// Keeps the first call per (t, h): one candidate per template/hook pair.
fn first_per_pair<'a>(calls: impl Iterator<Item = &'a SeparatedCall>) -> Vec<&'a SeparatedCall> {
    let mut seen = BTreeSet::new();
    calls.filter(|c| seen.insert((c.t, c.h))).collect()
}

fn factory_method(
    model: &Model,
    class: ClassifierId,
    t: MethodId,
    hooks: &[MethodId],
) -> Vec<Candidate> {
    let mut out = Vec::new();
    for &h in hooks {
        let Some(product) = model
            .method(h)
            .return_type
            .as_deref()
            .and_then(|r| model.resolve_type(r))
        else {
            continue;
        };
        if !model.classifier(product).is_effectively_abstract() {
            continue;
        }
        let mut ev = vec![evidence::CALLS_HOOK, evidence::RETURNS_PRODUCT];
        hook_evidence(model, &[h], &mut ev);
        let concrete_product = model
            .subtypes(product)
            .into_iter()
            .find(|&s| !model.classifier(s).is_effectively_abstract());
        if concrete_product.is_some() {
            ev.push(evidence::CONCRETE_PRODUCT);
        }
        let implementation = model.overrides_of(h).into_iter().next();
        if implementation.is_some() {
            ev.push(evidence::CONCRETE_CREATOR);
        }
        out.push(Candidate::new(
            DetectKind::FacM,
            class,
            vec![
                ("Creator", vec![ElementId::Classifier(class)]),
                ("facM", vec![ElementId::Method(h)]),
                ("anOp", vec![ElementId::Method(t)]),
                ("Product", vec![ElementId::Classifier(product)]),
                (
                    "ConcreteProduct",
                    concrete_product
                        .map(ElementId::Classifier)
                        .into_iter()
                        .collect(),
                ),
                (
                    "ConcreteCreator",
                    implementation
                        .map(|m| ElementId::Classifier(m.classifier))
                        .into_iter()
                        .collect(),
                ),
                (
                    "facM-impl",
                    implementation.map(ElementId::Method).into_iter().collect(),
                ),
            ],
            ev,
        ));
    }
    out
}

/// Proposes instances of the requested kinds, ordered by anchor class
/// position, set name and descending score. Candidates whose bindings are
/// already covered by an instance of the same set are left out.
pub fn detect_candidates(
    model: &Model,
    registry: &Registry,
    kinds: &[DetectKind],
) -> Vec<Candidate> {
    let wanted: BTreeSet<DetectKind> = kinds.iter().copied().collect();
    let mut out = Vec::new();

    if wanted.contains(&DetectKind::Unif) || wanted.contains(&DetectKind::FacM) {
        for (class, t, hooks) in unification(model) {
            if wanted.contains(&DetectKind::Unif) {
                let mut ev = vec![evidence::CALLS_HOOK];
                hook_evidence(model, &hooks, &mut ev);
                out.push(Candidate::new(
                    DetectKind::Unif,
                    class,
                    vec![
                        ("TH", vec![ElementId::Classifier(class)]),
                        ("t", vec![ElementId::Method(t)]),
                        ("h", methods(&hooks)),
                    ],
                    ev,
                ));
            }
            if wanted.contains(&DetectKind::FacM) {
                out.extend(factory_method(model, class, t, &hooks));
            }
        }
    }

    let recursive = [DetectKind::Comp, DetectKind::Dec, DetectKind::CoR];
    if wanted.contains(&DetectKind::Sep) || recursive.iter().any(|k| wanted.contains(k)) {
        let calls = separated_calls(model);
        if wanted.contains(&DetectKind::Sep) {
            for call in first_per_pair(calls.iter().filter(|c| !is_self_loop(model, c.association)))
            {
                out.push(separated_candidate(model, DetectKind::Sep, call));
            }
        }
        for kind in recursive.into_iter().filter(|k| wanted.contains(k)) {
            let fits = |c: &&SeparatedCall| {
                let association = &model.associations[c.association];
                model.is_subtype_of(c.t.classifier, c.h.classifier)
                    && match kind {
                        DetectKind::Comp => {
                            !is_self_loop(model, c.association)
                                && association.multiplicity == Multiplicity::Many
                        }
                        DetectKind::Dec => {
                            !is_self_loop(model, c.association)
                                && association.multiplicity == Multiplicity::One
                        }
                        _ => is_self_loop(model, c.association),
                    }
            };
            for call in first_per_pair(calls.iter().filter(fits)) {
                out.push(separated_candidate(model, kind, call));
            }
        }
    }

    let existing = collect_instances(model, registry);
    out.retain(|c| {
        !existing.iter().any(|i| {
            registry.get(&i.set).map(|d| d.abbreviation.as_str()) == Some(c.set())
                && c.bindings
                    .iter()
                    .all(|(role, elements)| elements.iter().all(|e| i.bound(role).contains(e)))
        })
    });
    out.sort_by(|a, b| a.order_key().cmp(&b.order_key()));
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApplyError {
    #[error("'{0}' is not a valid instance name")]
    InvalidName(String),
    #[error("instance name '{name}' is already used for {set}")]
    NameCollision { set: String, name: String },
    #[error("candidate no longer matches the model")]
    Stale,
}

/// Tags every binding of the candidate as instance `name`, with origin
/// `Detected`. Roles use their surface spelling (`facM-impl` is written
/// `facM`).
pub fn apply_candidate(
    model: &Model,
    registry: &Registry,
    candidate: &Candidate,
    name: &str,
) -> Result<Model, ApplyError> {
    let valid_name = name
        .chars()
        .next()
        .is_some_and(|c| c == '_' || c.is_alphabetic())
        && name.chars().all(|c| c == '_' || c.is_alphanumeric())
        && !crate::parser::KEYWORDS.contains(&name);
    if !valid_name {
        return Err(ApplyError::InvalidName(name.to_string()));
    }
    let def = registry.get(candidate.set()).ok_or(ApplyError::Stale)?;
    let taken = collect_instances(model, registry)
        .iter()
        .any(|i| i.set == def.abbreviation && i.instance.as_deref() == Some(name));
    if taken {
        return Err(ApplyError::NameCollision {
            set: def.abbreviation.clone(),
            name: name.to_string(),
        });
    }
    if !detect_candidates(model, registry, &[candidate.kind]).contains(candidate) {
        return Err(ApplyError::Stale);
    }

    let mut out = model.clone();
    for (role, elements) in &candidate.bindings {
        let surface = def.surface_role(role);
        for &element in elements {
            let tag = TagApplication::role(&def.abbreviation, surface)
                .with_instance(Some(name))
                .with_origin(TagOrigin::Detected);
            if !out.tags(element).iter().any(|t| t.same_triple(&tag)) {
                out.tags_mut(element).push(tag);
            }
        }
    }
    Ok(out)
}
