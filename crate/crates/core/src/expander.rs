//! Grouping tag applications into pattern instances and pushing them down
//! the layers: pattern tags imply principle tags, which imply template and
//! hook marks.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{ClassifierId, ElementId, Model, TagApplication, TagOrigin};
use crate::registry::{Registry, TagSetDefinition};

/// One grouped occurrence of a tag set, e.g. the `Rounding` Unification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternInstance {
    /// Abbreviation of the tag set (`Unif`, `FacM`, ...).
    pub set: String,
    pub instance: Option<String>,
    /// For anonymous instances: the classifier the tags were grouped around.
    pub anchor: Option<ClassifierId>,
    /// Role name to bound elements in declaration order. Elements of the
    /// wrong kind are kept here; the validator reports them.
    pub bindings: BTreeMap<String, Vec<ElementId>>,
    pub origin: TagOrigin,
}

impl PatternInstance {
    pub fn bound(&self, role: &str) -> &[ElementId] {
        self.bindings.get(role).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Stable identifier: `Set@instance`, or `Set@<anon:Class>` for anonymous groups.
    pub fn key(&self, model: &Model) -> String {
        match (&self.instance, self.anchor) {
            (Some(name), _) => format!("{}@{}", self.set, name),
            (None, Some(anchor)) => {
                format!("{}@<anon:{}>", self.set, model.classifier(anchor).name)
            }
            (None, None) => format!("{}@<anon>", self.set),
        }
    }

    fn first_position(&self) -> Option<ElementId> {
        self.bindings.values().flatten().min().copied()
    }
}

/// Instances plus the anonymous tags that could not be attributed to one.
#[derive(Debug, Clone, Default)]
pub struct Grouping {
    pub instances: Vec<PatternInstance>,
    pub ambiguous: Vec<(ElementId, TagApplication)>,
}

/// The classifier whose neighbourhood an element belongs to.
fn neighbourhood(model: &Model, element: ElementId) -> Option<ClassifierId> {
    match element {
        ElementId::Classifier(c) => Some(c),
        ElementId::Method(_) | ElementId::Attribute(_) => model.owner(element),
        ElementId::Association(i) => model.association_source(i),
        ElementId::Package(_) => None,
    }
}

#[derive(Default)]
struct Builder {
    bindings: BTreeMap<String, BTreeSet<ElementId>>,
    origins: BTreeSet<u8>,
}

impl Builder {
    fn add(&mut self, role: &str, element: ElementId, origin: TagOrigin) {
        self.bindings
            .entry(role.to_string())
            .or_default()
            .insert(element);
        self.origins.insert(match origin {
            TagOrigin::Explicit => 0,
            TagOrigin::Detected => 1,
            TagOrigin::Expanded => 2,
        });
    }

    fn origin(&self) -> TagOrigin {
        match self.origins.first() {
            Some(0) | None => TagOrigin::Explicit,
            Some(1) => TagOrigin::Detected,
            _ => TagOrigin::Expanded,
        }
    }
}

/// Groups role tags by `(set, instance)`. Anonymous tags gather around the
/// set's anchor role (TH, T, Creator): a tag in an anchor classifier's
/// neighbourhood joins that group, a stray joins the only anchor group, and a
/// stray facing several anchors is reported as ambiguous.
pub fn group_tags(model: &Model, registry: &Registry) -> Grouping {
    let mut named: BTreeMap<(String, String), Builder> = BTreeMap::new();
    // set -> anonymous tags in element order
    let mut anonymous: BTreeMap<String, Vec<(ElementId, &TagApplication, String)>> =
        BTreeMap::new();

    for element in model.elements() {
        for tag in model.tags(element) {
            let Ok((def, Some(role))) = registry.resolve(tag) else {
                continue;
            };
            let set = def.abbreviation.clone();
            match &tag.instance {
                Some(name) => named
                    .entry((set, name.clone()))
                    .or_default()
                    .add(&role.name, element, tag.origin),
                None => anonymous
                    .entry(set)
                    .or_default()
                    .push((element, tag, role.name.clone())),
            }
        }
    }

    let mut grouping = Grouping::default();
    for ((set, name), builder) in named {
        let def = registry.get(&set).expect("grouped sets resolve");
        grouping
            .instances
            .push(finish(model, def, Some(name), None, builder));
    }

    for (set, tags) in anonymous {
        let def = registry.get(&set).expect("grouped sets resolve");
        let anchor_role = def.anchor_role().map(|r| r.name.as_str());
        let anchors: BTreeSet<ClassifierId> = tags
            .iter()
            .filter(|(_, _, role)| Some(role.as_str()) == anchor_role)
            .filter_map(|(e, _, _)| e.as_classifier())
            .collect();
        let mut groups: BTreeMap<Option<ClassifierId>, Builder> = BTreeMap::new();
        for (element, tag, role) in tags {
            let home = neighbourhood(model, element).filter(|c| anchors.contains(c));
            let group = match (home, anchors.len()) {
                (Some(c), _) => Some(c),
                (None, 0) => None,
                (None, 1) => anchors.first().copied(),
                (None, _) => {
                    grouping.ambiguous.push((element, tag.clone()));
                    continue;
                }
            };
            groups
                .entry(group)
                .or_default()
                .add(&role, element, tag.origin);
        }
        for (anchor, builder) in groups {
            grouping
                .instances
                .push(finish(model, def, None, anchor, builder));
        }
    }

    grouping.instances.sort_by(|a, b| {
        (a.first_position(), &a.set, &a.instance).cmp(&(b.first_position(), &b.set, &b.instance))
    });
    grouping
}

fn finish(
    model: &Model,
    def: &TagSetDefinition,
    instance: Option<String>,
    anchor: Option<ClassifierId>,
    builder: Builder,
) -> PatternInstance {
    let origin = builder.origin();
    let mut bindings: BTreeMap<String, Vec<ElementId>> = builder
        .bindings
        .into_iter()
        .map(|(role, elements)| (role, elements.into_iter().collect()))
        .collect();
    rebind_impl_roles(model, def, &mut bindings);
    PatternInstance {
        set: def.abbreviation.clone(),
        instance,
        anchor,
        bindings,
        origin,
    }
}

/// A surface `FacM-facM` on a method of the class bound as ConcreteCreator
/// denotes the override, role `facM-impl`.
fn rebind_impl_roles(
    model: &Model,
    def: &TagSetDefinition,
    bindings: &mut BTreeMap<String, Vec<ElementId>>,
) {
    for role in &def.roles {
        let Some(impl_role) = def.impl_role_for(&role.name) else {
            continue;
        };
        let (Some(impl_container), Some(container)) = (&impl_role.contained_in, &role.contained_in)
        else {
            continue;
        };
        let impl_owners: BTreeSet<ElementId> = bindings
            .get(impl_container)
            .into_iter()
            .flatten()
            .copied()
            .collect();
        let owners: BTreeSet<ElementId> = bindings
            .get(container)
            .into_iter()
            .flatten()
            .copied()
            .collect();
        let Some(elements) = bindings.get_mut(&role.name) else {
            continue;
        };
        let (moved, kept): (Vec<ElementId>, Vec<ElementId>) = elements.iter().partition(|&&e| {
            model.owner(e).is_some_and(|o| {
                let o = ElementId::Classifier(o);
                impl_owners.contains(&o) && !owners.contains(&o)
            })
        });
        if moved.is_empty() {
            continue;
        }
        if kept.is_empty() {
            bindings.remove(&role.name);
        } else {
            *elements = kept;
        }
        let target = bindings.entry(impl_role.name.clone()).or_default();
        target.extend(moved);
        target.sort();
        target.dedup();
    }
}

/// Tag-set instances of a model, in order of their first bound element.
pub fn collect_instances(model: &Model, registry: &Registry) -> Vec<PatternInstance> {
    group_tags(model, registry).instances
}

/// Lower-layer tags one instance implies, each with the element it goes on.
/// Only elements of the right kind for their role are expanded.
pub fn expand_instance(
    model: &Model,
    registry: &Registry,
    instance: &PatternInstance,
) -> Vec<(ElementId, TagApplication)> {
    let Some(def) = registry.get(&instance.set) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for (role_name, elements) in &instance.bindings {
        let Some(role) = def.role(role_name) else {
            continue;
        };
        for lower in def.expansions(role_name) {
            let Some(lower_def) = registry.get(&lower.set) else {
                continue;
            };
            for &element in elements {
                let kind = model.kind_of(element);
                if !role.applies_to.accepts(kind) {
                    continue;
                }
                let tag = match &lower.role {
                    Some(r) => TagApplication::role(&lower_def.abbreviation, r)
                        .with_instance(instance.instance.clone()),
                    None => {
                        if !lower_def.targets.contains(&kind) {
                            continue;
                        }
                        TagApplication::unary(&lower_def.abbreviation)
                    }
                };
                out.push((element, tag.with_origin(TagOrigin::Expanded)));
            }
        }
    }
    out
}

/// Adds every implied lower-layer tag until nothing changes. Tags already
/// present (compared on set, role and instance) are not added again.
pub fn expand_model(model: &Model, registry: &Registry) -> Model {
    let mut out = model.clone();
    loop {
        let mut changed = false;
        for instance in collect_instances(&out, registry) {
            for (element, tag) in expand_instance(&out, registry, &instance) {
                if !has_tag(&out, registry, element, &tag) {
                    out.tags_mut(element).push(tag);
                    changed = true;
                }
            }
        }
        if !changed {
            return out;
        }
    }
}

/// Whether `element` already carries `tag`, comparing canonical set names.
pub(crate) fn has_tag(
    model: &Model,
    registry: &Registry,
    element: ElementId,
    tag: &TagApplication,
) -> bool {
    let canonical = |set: &str| registry.get(set).map(|d| d.abbreviation.clone());
    let wanted = canonical(&tag.set);
    model
        .tags(element)
        .iter()
        .any(|t| t.role == tag.role && t.instance == tag.instance && canonical(&t.set) == wanted)
}
