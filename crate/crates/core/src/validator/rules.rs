use std::collections::BTreeSet;

use super::{Diagnostic, RuleId, Severity};
use crate::expander::{group_tags, PatternInstance};
use crate::model::{scope_tags, ClassifierId, ElementId, Model, TagOrigin};
use crate::registry::{
    AbstractRequirement, AppliesTo, ConstraintKind, Layer, Mark, Registry, RoleSpec, SetKind,
    SeverityIfUnknown, StructConstraint, TagSetDefinition,
};

struct Checker<'a> {
    model: &'a Model,
    registry: &'a Registry,
    /// `(set, role)` of anonymous tags that could not be grouped. Anonymous
    /// instances of that set are not told they miss that role.
    unattributed: BTreeSet<(String, String)>,
    out: Vec<Diagnostic>,
}

fn downgradable(complete: bool) -> Severity {
    if complete {
        Severity::Error
    } else {
        Severity::Warning
    }
}

pub(super) fn run(model: &Model, registry: &Registry) -> Vec<Diagnostic> {
    let mut checker = Checker {
        model,
        registry,
        unattributed: BTreeSet::new(),
        out: Vec::new(),
    };
    checker.tags();
    checker.scopes();
    checker.template_hook();
    let grouping = group_tags(model, registry);
    for (_, tag) in &grouping.ambiguous {
        if let Ok((def, Some(role))) = registry.resolve(tag) {
            checker
                .unattributed
                .insert((def.abbreviation.clone(), role.name.clone()));
        }
    }
    for instance in &grouping.instances {
        checker.instance(instance);
    }
    for (element, tag) in &grouping.ambiguous {
        let layer = registry.get(&tag.set).and_then(|d| d.layer);
        checker.push(
            RuleId::AnonAmbiguous,
            Severity::Error,
            *element,
            None,
            layer,
            format!(
                "anonymous tag {tag} cannot be attributed to a single instance; name the instance"
            ),
        );
    }
    checker.out
}

impl Checker<'_> {
    fn push(
        &mut self,
        rule: RuleId,
        severity: Severity,
        element: ElementId,
        instance: Option<String>,
        layer: Option<Layer>,
        message: String,
    ) {
        self.out.push(Diagnostic {
            rule,
            severity,
            target: self.model.qualified_name(element),
            kind: self.model.kind_of(element),
            instance,
            message,
            element,
            layer,
        });
    }

    fn is_interface_element(&self, element: ElementId) -> bool {
        match element {
            ElementId::Classifier(c) => self.model.classifier(c).is_interface(),
            ElementId::Method(m) => self.model.classifier(m.classifier).is_interface(),
            _ => false,
        }
    }

    /// Marks carried by an element: marker tags plus those implied by role
    /// tags bound to an element of the right kind.
    fn marks(&self, element: ElementId) -> BTreeSet<Mark> {
        let kind = self.model.kind_of(element);
        let mut out = BTreeSet::new();
        for tag in self.model.tags(element) {
            let Ok((def, role)) = self.registry.resolve(tag) else {
                continue;
            };
            match role {
                None if def.kind == SetKind::Marker => out.extend(self.registry.marks(def, None)),
                Some(role) if role.applies_to.accepts(kind) => {
                    out.extend(self.registry.marks(def, Some(&role.name)))
                }
                _ => {}
            }
        }
        out
    }

    /// Marks carried by the element's own marker tags (`<<template>>`,
    /// `<<hook>>`), leaving out markers added by expansion.
    fn marker_marks(&self, element: ElementId) -> BTreeSet<Mark> {
        let mut out = BTreeSet::new();
        for tag in self.model.tags(element) {
            if tag.origin == TagOrigin::Expanded {
                continue;
            }
            if let Ok((def, None)) = self.registry.resolve(tag) {
                if def.kind == SetKind::Marker {
                    out.extend(self.registry.marks(def, None));
                }
            }
        }
        out
    }

    /// Whether any tag on the element, of any kind, implies a template mark.
    fn implies_template(&self, def: &TagSetDefinition, role: Option<&RoleSpec>) -> bool {
        self.registry
            .marks(def, role.map(|r| r.name.as_str()))
            .contains(&Mark::Template)
    }

    fn tags(&mut self) {
        for element in self.model.elements() {
            let kind = self.model.kind_of(element);
            for tag in self.model.tags(element) {
                match self.registry.resolve(tag) {
                    Err(problem) => self.push(
                        RuleId::TagUnknown,
                        Severity::Warning,
                        element,
                        None,
                        None,
                        format!("{tag}: {problem}"),
                    ),
                    Ok((def, None)) if !def.targets.contains(&kind) => {
                        let on_interface =
                            def.abbreviation == "template" && self.is_interface_element(element);
                        if !on_interface {
                            self.push(
                                RuleId::RoleKind,
                                Severity::Error,
                                element,
                                None,
                                def.layer,
                                format!(
                                    "tag {tag} does not apply to {}",
                                    with_article(&kind.to_string())
                                ),
                            );
                        }
                    }
                    Ok(_) => {}
                }
            }
        }
    }

    fn scopes(&mut self) {
        for c in self.model.classifier_ids() {
            let element = ElementId::Classifier(c);
            let own: BTreeSet<_> = scope_tags(&self.model.classifier(c).tags)
                .into_iter()
                .collect();
            if own.len() > 1 {
                let names: Vec<_> = own.iter().map(|s| s.as_str()).collect();
                self.push(
                    RuleId::ScopeMulti,
                    Severity::Error,
                    element,
                    None,
                    None,
                    format!("more than one scope tag: {}", names.join(", ")),
                );
                continue;
            }
            let package = scope_tags(&self.model.package(c.package).tags);
            if let (Some(own), Some(pkg)) = (own.first(), package.first()) {
                if own != pkg {
                    self.push(
                        RuleId::ScopeOverride,
                        Severity::Warning,
                        element,
                        None,
                        None,
                        format!("<<{own}>> overrides the package's <<{pkg}>>"),
                    );
                }
            }
        }
    }

    fn template_hook(&mut self) {
        let layer = Some(Layer::TemplateHook);
        for c in self.model.classifier_ids() {
            let classifier = self.model.classifier(c);
            let element = ElementId::Classifier(c);
            let methods: Vec<ElementId> = self.model.method_ids(c).map(ElementId::Method).collect();

            for e in std::iter::once(element).chain(methods.iter().copied()) {
                if !self.is_interface_element(e) {
                    continue;
                }
                let culprit = self.model.tags(e).iter().find(|tag| {
                    self.registry
                        .resolve(tag)
                        .is_ok_and(|(def, role)| self.implies_template(def, role))
                });
                if let Some(tag) = culprit {
                    let what = if e == element {
                        "an interface"
                    } else {
                        "an interface method"
                    };
                    let message =
                        format!("{tag} implies a template, which {what} cannot implement");
                    self.push(
                        RuleId::TemplateOnInterface,
                        Severity::Error,
                        e,
                        None,
                        layer,
                        message,
                    );
                }
            }

            // A class mark implied by an instance role is checked by that
            // instance's cardinality and containment rules instead.
            let class_marks = self.marker_marks(element);
            let method_marks: Vec<BTreeSet<Mark>> =
                methods.iter().map(|&m| self.marks(m)).collect();
            let complete = classifier.completeness.methods_complete();
            if class_marks.contains(&Mark::Template)
                && !classifier.is_interface()
                && !method_marks.iter().any(|m| m.contains(&Mark::Template))
            {
                self.push(
                    RuleId::ClassNoTemplate,
                    downgradable(complete),
                    element,
                    None,
                    layer,
                    "marked as containing a template method, but no method is a template".into(),
                );
            }
            if class_marks.contains(&Mark::Hook)
                && !method_marks.iter().any(|m| m.contains(&Mark::Hook))
            {
                self.push(
                    RuleId::ClassNoHook,
                    downgradable(complete),
                    element,
                    None,
                    layer,
                    "marked as containing a hook method, but no method is a hook".into(),
                );
            }

            let subtypes = self.model.subtypes(c);
            let closed = !subtypes.is_empty()
                && subtypes
                    .iter()
                    .all(|&s| self.model.classifier(s).completeness.methods_complete());
            if !closed {
                continue;
            }
            for (&m, marks) in methods.iter().zip(&method_marks) {
                let id = m.as_method().unwrap();
                if marks.contains(&Mark::Hook)
                    && !self.model.method(id).is_abstract
                    && self.model.overrides_of(id).is_empty()
                {
                    self.push(
                        RuleId::HookNotOverridable,
                        Severity::Warning,
                        m,
                        None,
                        layer,
                        "hook is concrete and no subtype overrides it".into(),
                    );
                }
            }
        }
    }

    fn instance(&mut self, instance: &PatternInstance) {
        let Some(def) = self.registry.get(&instance.set) else {
            return;
        };
        let mut ctx = InstanceCheck {
            key: instance.key(self.model),
            layer: def.layer,
            def,
            instance,
            valid: Default::default(),
        };

        // Kind of each binding; wrong kinds still count toward cardinality.
        for role in &def.roles {
            let mut valid = Vec::new();
            for &e in instance.bound(&role.name) {
                let kind = self.model.kind_of(e);
                if role.applies_to.accepts(kind) {
                    valid.push(e);
                } else if !(self.is_interface_element(e) && self.implies_template(def, Some(role)))
                {
                    self.push(
                        RuleId::RoleKind,
                        Severity::Error,
                        e,
                        Some(ctx.key.clone()),
                        ctx.layer,
                        format!(
                            "role {} must be bound to {}, not to {}",
                            role.name,
                            with_article(role.applies_to.as_str()),
                            with_article(&kind.to_string())
                        ),
                    );
                }
            }
            ctx.valid.insert(role.name.clone(), valid);
        }

        for role in &def.roles {
            self.cardinality(&ctx, role);
            self.containment(&ctx, role);
            self.abstractness(&ctx, role);
        }
        for constraint in &def.constraints {
            match constraint.kind {
                ConstraintKind::Calls => self.calls(&ctx, constraint),
                ConstraintKind::AssociationFromTo => self.association(&ctx, constraint),
                ConstraintKind::Generalization => self.generalization(&ctx, constraint),
                ConstraintKind::ReturnsRole => self.returns(&ctx, constraint),
                ConstraintKind::Contains => self.contains(&ctx, constraint),
            }
        }
    }

    /// Where to report an instance-level absence: the container of the
    /// missing role, else the anchor, else the first bound element.
    fn report_site(&self, ctx: &InstanceCheck, role: &RoleSpec) -> ElementId {
        role.contained_in
            .as_deref()
            .and_then(|c| ctx.valid(c).first())
            .or_else(|| {
                ctx.def
                    .anchor_role()
                    .and_then(|a| ctx.valid(&a.name).first())
            })
            .or_else(|| ctx.instance.bindings.values().flatten().min())
            .copied()
            .expect("instances bind at least one element")
    }

    fn cardinality(&mut self, ctx: &InstanceCheck, role: &RoleSpec) {
        let count = ctx.instance.bound(&role.name).len();
        if role.cardinality.admits(count) {
            return;
        }
        let site = self.report_site(ctx, role);
        let unattributed = (ctx.def.abbreviation.clone(), role.name.clone());
        if count == 0
            && ctx.instance.instance.is_none()
            && self.unattributed.contains(&unattributed)
        {
            return;
        }
        if count == 0 {
            let containers: Vec<ClassifierId> = role
                .contained_in
                .as_deref()
                .map(|c| {
                    ctx.valid(c)
                        .iter()
                        .filter_map(|e| e.as_classifier())
                        .collect()
                })
                .unwrap_or_default();
            let complete = containers.iter().any(|&c| {
                let mark = self.model.classifier(c).completeness;
                match role.applies_to {
                    AppliesTo::Method => mark.methods_complete(),
                    AppliesTo::Attribute => mark.attributes_complete(),
                    _ => false,
                }
            });
            self.push(
                RuleId::RoleMissing,
                downgradable(complete),
                site,
                Some(ctx.key.clone()),
                ctx.layer,
                format!("role {} is not bound", role.name),
            );
        } else {
            self.push(
                RuleId::RoleMissing,
                Severity::Error,
                site,
                Some(ctx.key.clone()),
                ctx.layer,
                format!(
                    "role {} is bound {count} times but admits at most one",
                    role.name
                ),
            );
        }
    }

    fn owner_of(&self, element: ElementId) -> Option<ClassifierId> {
        match element {
            ElementId::Association(i) => self.model.association_source(i),
            _ => self.model.owner(element),
        }
    }

    fn containment(&mut self, ctx: &InstanceCheck, role: &RoleSpec) {
        let Some(container) = role.contained_in.as_deref() else {
            return;
        };
        let containers = ctx.valid(container);
        if containers.is_empty() {
            return;
        }
        for &e in ctx.valid(&role.name) {
            let inside = self
                .owner_of(e)
                .is_some_and(|o| containers.contains(&ElementId::Classifier(o)));
            if !inside {
                let names: Vec<String> = containers
                    .iter()
                    .map(|&c| self.model.qualified_name(c))
                    .collect();
                self.push(
                    RuleId::Containment,
                    Severity::Error,
                    e,
                    Some(ctx.key.clone()),
                    ctx.layer,
                    format!(
                        "role {} must be declared in the {container} element {}",
                        role.name,
                        names.join(", ")
                    ),
                );
            }
        }
    }

    fn is_abstract(&self, element: ElementId) -> Option<bool> {
        match element {
            ElementId::Classifier(c) => Some(self.model.classifier(c).is_effectively_abstract()),
            ElementId::Method(m) => Some(self.model.method(m).is_abstract),
            _ => None,
        }
    }

    fn abstractness(&mut self, ctx: &InstanceCheck, role: &RoleSpec) {
        let wanted = match role.must_be_abstract {
            AbstractRequirement::Yes => true,
            AbstractRequirement::No => false,
            AbstractRequirement::Unconstrained => return,
        };
        for &e in ctx.valid(&role.name) {
            if self.is_abstract(e).is_some_and(|a| a != wanted) {
                let message = if wanted {
                    format!("role {} should be abstract", role.name)
                } else {
                    format!("role {} should be concrete", role.name)
                };
                self.push(
                    RuleId::Abstract,
                    Severity::Warning,
                    e,
                    Some(ctx.key.clone()),
                    ctx.layer,
                    message,
                );
            }
        }
    }

    fn calls(&mut self, ctx: &InstanceCheck, c: &StructConstraint) {
        let hooks: Vec<_> = ctx
            .valid(&c.to)
            .iter()
            .filter_map(|e| e.as_method())
            .collect();
        if hooks.is_empty() {
            return;
        }
        for &t in ctx.valid(&c.from) {
            let Some(template) = t.as_method() else {
                continue;
            };
            if self.model.method(template).calls.is_none() {
                if c.severity_if_unknown == SeverityIfUnknown::Warn {
                    self.push(
                        RuleId::NoCall,
                        Severity::Warning,
                        t,
                        Some(ctx.key.clone()),
                        ctx.layer,
                        format!(
                            "body of {} is unknown; cannot confirm it calls {}",
                            c.from, c.to
                        ),
                    );
                }
                continue;
            }
            let reaches = self.model.call_targets(template).iter().any(|target| {
                target.method().is_some_and(|m| {
                    hooks.iter().any(|&h| {
                        m == h || self.model.overrides(m, h) || self.model.overrides(h, m)
                    })
                })
            });
            if !reaches {
                self.push(
                    RuleId::NoCall,
                    Severity::Warning,
                    t,
                    Some(ctx.key.clone()),
                    ctx.layer,
                    format!(
                        "{} calls no method bound to {} in this instance",
                        c.from, c.to
                    ),
                );
            }
        }
    }

    fn association(&mut self, ctx: &InstanceCheck, c: &StructConstraint) {
        let froms: Vec<_> = ctx
            .valid(&c.from)
            .iter()
            .filter_map(|e| e.as_classifier())
            .collect();
        let tos: Vec<_> = ctx
            .valid(&c.to)
            .iter()
            .filter_map(|e| e.as_classifier())
            .collect();
        for &from in &froms {
            for &to in &tos {
                let sources: BTreeSet<_> = std::iter::once(from)
                    .chain(self.model.supertypes(from))
                    .collect();
                let targets: BTreeSet<_> =
                    std::iter::once(to).chain(self.model.subtypes(to)).collect();
                let matching: Vec<usize> = (0..self.model.associations.len())
                    .filter(|&i| {
                        let (Some(s), Some(t)) = (
                            self.model.association_source(i),
                            self.model.association_target(i),
                        ) else {
                            return false;
                        };
                        sources.contains(&s)
                            && targets.contains(&t)
                            && (s != t || c.allow_self_association)
                    })
                    .collect();
                let element = ElementId::Classifier(from);
                let to_name = self.model.classifier_qname(to);
                if matching.is_empty() {
                    let complete = self
                        .model
                        .classifier(from)
                        .completeness
                        .attributes_complete();
                    self.push(
                        RuleId::SepNoAssoc,
                        downgradable(complete),
                        element,
                        Some(ctx.key.clone()),
                        ctx.layer,
                        format!("no association from {} to {to_name}", c.from),
                    );
                } else if let Some(wanted) = c.multiplicity {
                    if !matching
                        .iter()
                        .any(|&i| self.model.associations[i].multiplicity == wanted)
                    {
                        let shown = match wanted {
                            crate::model::Multiplicity::One => "1",
                            crate::model::Multiplicity::Many => "*",
                        };
                        self.push(
                            RuleId::RecMult,
                            Severity::Warning,
                            element,
                            Some(ctx.key.clone()),
                            ctx.layer,
                            format!("association to {to_name} should have multiplicity [{shown}]"),
                        );
                    }
                }
            }
        }
    }

    fn generalization(&mut self, ctx: &InstanceCheck, c: &StructConstraint) {
        for &sub in ctx.valid(&c.from) {
            let Some(sub_id) = sub.as_classifier() else {
                continue;
            };
            for &sup in ctx.valid(&c.to) {
                let Some(sup_id) = sup.as_classifier() else {
                    continue;
                };
                if !self.model.is_subtype_of(sub_id, sup_id) {
                    let complete = self.model.classifier(sub_id).completeness.class_complete();
                    self.push(
                        RuleId::RecNoGen,
                        downgradable(complete),
                        sub,
                        Some(ctx.key.clone()),
                        ctx.layer,
                        format!(
                            "{} must inherit from {} ({})",
                            c.from,
                            c.to,
                            self.model.classifier_qname(sup_id)
                        ),
                    );
                }
            }
        }
    }

    fn returns(&mut self, ctx: &InstanceCheck, c: &StructConstraint) {
        let products: Vec<_> = ctx
            .valid(&c.to)
            .iter()
            .filter_map(|e| e.as_classifier())
            .collect();
        if products.is_empty() {
            return;
        }
        for &m in ctx.valid(&c.from) {
            let Some(method) = m.as_method() else {
                continue;
            };
            let returned = self
                .model
                .method(method)
                .return_type
                .as_deref()
                .and_then(|t| self.model.resolve_type(t));
            let ok = returned.is_some_and(|r| {
                products
                    .iter()
                    .any(|&p| r == p || self.model.is_subtype_of(r, p))
            });
            if !ok {
                let shown = self
                    .model
                    .method(method)
                    .return_type
                    .as_deref()
                    .unwrap_or("nothing");
                self.push(
                    RuleId::FacmReturn,
                    Severity::Warning,
                    m,
                    Some(ctx.key.clone()),
                    ctx.layer,
                    format!("{} returns {shown}, not the {} or a subtype", c.from, c.to),
                );
            }
        }
    }

    fn contains(&mut self, ctx: &InstanceCheck, c: &StructConstraint) {
        let owners = ctx.valid(&c.from);
        if owners.is_empty() {
            return;
        }
        for &e in ctx.valid(&c.to) {
            if !self
                .owner_of(e)
                .is_some_and(|o| owners.contains(&ElementId::Classifier(o)))
            {
                self.push(
                    RuleId::Containment,
                    Severity::Error,
                    e,
                    Some(ctx.key.clone()),
                    ctx.layer,
                    format!("{} must be declared in {}", c.to, c.from),
                );
            }
        }
    }
}

struct InstanceCheck<'a> {
    key: String,
    layer: Option<Layer>,
    def: &'a TagSetDefinition,
    instance: &'a PatternInstance,
    /// Role to the bound elements of the right kind.
    valid: std::collections::BTreeMap<String, Vec<ElementId>>,
}

impl InstanceCheck<'_> {
    fn valid(&self, role: &str) -> &[ElementId] {
        self.valid.get(role).map(Vec::as_slice).unwrap_or(&[])
    }
}

fn with_article(noun: &str) -> String {
    let article = if noun.starts_with(['a', 'e', 'i', 'o', 'u']) {
        "an"
    } else {
        "a"
    };
    format!("{article} {noun}")
}
