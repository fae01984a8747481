use std::collections::{BTreeSet, VecDeque};

use super::{
    scope_tags, Attribute, AttributeId, CallSite, Classifier, ClassifierId, ElementId, ElementKind,
    Method, MethodId, Model, Package, Receiver, Scope, TagApplication,
};

/// Where a classifier's effective scope tag came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScopeOrigin {
    Explicit,
    InheritedFromPackage,
    None,
}

/// One resolved (or unresolvable) call of a method body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CallTarget {
    Resolved {
        site: CallSite,
        /// Classifier the lookup started from: the caller's own class for
        /// `self`, the association target otherwise.
        receiver: ClassifierId,
        method: MethodId,
    },
    External {
        site: CallSite,
    },
}

impl CallTarget {
    pub fn method(&self) -> Option<MethodId> {
        match self {
            CallTarget::Resolved { method, .. } => Some(*method),
            CallTarget::External { .. } => None,
        }
    }
}

impl Model {
    pub fn package(&self, index: usize) -> &Package {
        &self.packages[index]
    }

    pub fn classifier(&self, id: ClassifierId) -> &Classifier {
        &self.packages[id.package].classifiers[id.index]
    }

    pub fn classifier_mut(&mut self, id: ClassifierId) -> &mut Classifier {
        &mut self.packages[id.package].classifiers[id.index]
    }

    pub fn method(&self, id: MethodId) -> &Method {
        &self.classifier(id.classifier).methods[id.index]
    }

    pub fn attribute(&self, id: AttributeId) -> &Attribute {
        &self.classifier(id.classifier).attributes[id.index]
    }

    /// All classifiers in declaration order.
    pub fn classifier_ids(&self) -> impl Iterator<Item = ClassifierId> + '_ {
        self.packages.iter().enumerate().flat_map(|(p, pkg)| {
            (0..pkg.classifiers.len()).map(move |index| ClassifierId { package: p, index })
        })
    }

    pub fn method_ids(&self, classifier: ClassifierId) -> impl Iterator<Item = MethodId> {
        (0..self.classifier(classifier).methods.len())
            .map(move |index| MethodId { classifier, index })
    }

    pub fn attribute_ids(&self, classifier: ClassifierId) -> impl Iterator<Item = AttributeId> {
        (0..self.classifier(classifier).attributes.len())
            .map(move |index| AttributeId { classifier, index })
    }

    /// Every taggable element in declaration order.
    pub fn elements(&self) -> Vec<ElementId> {
        let mut out = Vec::new();
        for (p, pkg) in self.packages.iter().enumerate() {
            out.push(ElementId::Package(p));
            for index in 0..pkg.classifiers.len() {
                let c = ClassifierId { package: p, index };
                out.push(ElementId::Classifier(c));
                out.extend(self.attribute_ids(c).map(ElementId::Attribute));
                out.extend(self.method_ids(c).map(ElementId::Method));
            }
        }
        out.extend((0..self.associations.len()).map(ElementId::Association));
        out
    }

    /// Looks a classifier up by `Package.Name` or by its (model-unique) simple name.
    pub fn find_classifier(&self, name: &str) -> Option<ClassifierId> {
        match name.split_once('.') {
            Some((pkg, simple)) => {
                let p = self.packages.iter().position(|x| x.name == pkg)?;
                let index = self.packages[p]
                    .classifiers
                    .iter()
                    .position(|c| c.name == simple)?;
                Some(ClassifierId { package: p, index })
            }
            None => self
                .classifier_ids()
                .find(|&c| self.classifier(c).name == name),
        }
    }

    /// A type name resolved to a declared classifier; `None` for external names.
    pub fn resolve_type(&self, type_name: &str) -> Option<ClassifierId> {
        self.find_classifier(type_name)
    }

    pub fn classifier_qname(&self, id: ClassifierId) -> String {
        format!(
            "{}.{}",
            self.packages[id.package].name,
            self.classifier(id).name
        )
    }

    pub fn qualified_name(&self, element: ElementId) -> String {
        match element {
            ElementId::Package(p) => self.packages[p].name.clone(),
            ElementId::Classifier(c) => self.classifier_qname(c),
            ElementId::Attribute(a) => format!(
                "{}.{}",
                self.classifier_qname(a.classifier),
                self.attribute(a).name
            ),
            ElementId::Method(m) => format!(
                "{}.{}",
                self.classifier_qname(m.classifier),
                self.method(m).name
            ),
            ElementId::Association(i) => {
                let assoc = &self.associations[i];
                format!("{}.{}", assoc.source, assoc.label)
            }
        }
    }

    pub fn kind_of(&self, element: ElementId) -> ElementKind {
        match element {
            ElementId::Package(_) => ElementKind::Package,
            ElementId::Classifier(c) if self.classifier(c).is_interface() => ElementKind::Interface,
            ElementId::Classifier(_) => ElementKind::Class,
            ElementId::Attribute(_) => ElementKind::Attribute,
            ElementId::Method(_) => ElementKind::Method,
            ElementId::Association(_) => ElementKind::Association,
        }
    }

    /// The classifier an element lives in: itself, its owner, or an association's source.
    pub fn owner(&self, element: ElementId) -> Option<ClassifierId> {
        match element {
            ElementId::Package(_) => None,
            ElementId::Classifier(c) => Some(c),
            ElementId::Attribute(a) => Some(a.classifier),
            ElementId::Method(m) => Some(m.classifier),
            ElementId::Association(i) => self.association_source(i),
        }
    }

    pub fn tags(&self, element: ElementId) -> &[TagApplication] {
        match element {
            ElementId::Package(p) => &self.packages[p].tags,
            ElementId::Classifier(c) => &self.classifier(c).tags,
            ElementId::Attribute(a) => &self.attribute(a).tags,
            ElementId::Method(m) => &self.method(m).tags,
            ElementId::Association(i) => &self.associations[i].tags,
        }
    }

    pub fn tags_mut(&mut self, element: ElementId) -> &mut Vec<TagApplication> {
        match element {
            ElementId::Package(p) => &mut self.packages[p].tags,
            ElementId::Classifier(c) => &mut self.classifier_mut(c).tags,
            ElementId::Attribute(a) => {
                &mut self.classifier_mut(a.classifier).attributes[a.index].tags
            }
            ElementId::Method(m) => &mut self.classifier_mut(m.classifier).methods[m.index].tags,
            ElementId::Association(i) => &mut self.associations[i].tags,
        }
    }

    /// Resolves `Package`, `Package.Classifier` or `Package.Classifier.member`,
    /// where a member is an attribute, a method or the label of an
    /// association whose source is that classifier.
    pub fn resolve(&self, qualified_name: &str) -> Option<ElementId> {
        let parts: Vec<&str> = qualified_name.split('.').collect();
        let p = self.packages.iter().position(|x| x.name == parts[0])?;
        if parts.len() == 1 {
            return Some(ElementId::Package(p));
        }
        let index = self.packages[p]
            .classifiers
            .iter()
            .position(|c| c.name == parts[1])?;
        let c = ClassifierId { package: p, index };
        match parts.len() {
            2 => Some(ElementId::Classifier(c)),
            3 => {
                let member = parts[2];
                let classifier = self.classifier(c);
                if let Some(i) = classifier.attributes.iter().position(|a| a.name == member) {
                    return Some(ElementId::Attribute(AttributeId {
                        classifier: c,
                        index: i,
                    }));
                }
                if let Some(i) = classifier.method_named(member) {
                    return Some(ElementId::Method(MethodId {
                        classifier: c,
                        index: i,
                    }));
                }
                self.associations
                    .iter()
                    .position(|a| a.label == member && self.find_classifier(&a.source) == Some(c))
                    .map(ElementId::Association)
            }
            _ => None,
        }
    }

    pub fn association_source(&self, index: usize) -> Option<ClassifierId> {
        self.find_classifier(&self.associations[index].source)
    }

    pub fn association_target(&self, index: usize) -> Option<ClassifierId> {
        self.find_classifier(&self.associations[index].target)
    }

    /// Declared supertypes that resolve to classifiers of this model, `extends` first.
    pub fn direct_supertypes(&self, id: ClassifierId) -> Vec<ClassifierId> {
        self.classifier(id)
            .supertype_names()
            .filter_map(|name| self.find_classifier(name))
            .collect()
    }

    /// All strict supertypes, nearest first (breadth-first over declaration order).
    pub fn supertypes(&self, id: ClassifierId) -> Vec<ClassifierId> {
        let mut seen = BTreeSet::from([id]);
        let mut out = Vec::new();
        let mut queue = VecDeque::from([id]);
        while let Some(current) = queue.pop_front() {
            for sup in self.direct_supertypes(current) {
                if seen.insert(sup) {
                    out.push(sup);
                    queue.push_back(sup);
                }
            }
        }
        out
    }

    /// Strict subtype test over `extends`/`implements`, transitively.
    pub fn is_subtype_of(&self, sub: ClassifierId, sup: ClassifierId) -> bool {
        sub != sup && self.supertypes(sub).contains(&sup)
    }

    /// All strict subtypes in declaration order.
    pub fn subtypes(&self, id: ClassifierId) -> Vec<ClassifierId> {
        self.classifier_ids()
            .filter(|&c| self.is_subtype_of(c, id))
            .collect()
    }

    /// `overrider` redefines `base`: same signature, declared in a strict subtype.
    pub fn overrides(&self, overrider: MethodId, base: MethodId) -> bool {
        self.is_subtype_of(overrider.classifier, base.classifier)
            && self.method(overrider).same_signature(self.method(base))
    }

    /// Methods in strict subtypes with the same name and parameter types.
    pub fn overrides_of(&self, method: MethodId) -> Vec<MethodId> {
        let base = self.method(method);
        self.subtypes(method.classifier)
            .into_iter()
            .flat_map(|sub| self.method_ids(sub))
            .filter(|&m| self.method(m).same_signature(base))
            .collect()
    }

    /// Looks a method name up in `start` and then its supertypes, nearest first.
    pub fn lookup_method(&self, start: ClassifierId, name: &str) -> Option<MethodId> {
        std::iter::once(start)
            .chain(self.supertypes(start))
            .find_map(|c| {
                self.classifier(c).method_named(name).map(|index| MethodId {
                    classifier: c,
                    index,
                })
            })
    }

    /// The association labelled `label` whose source is `from` or its nearest supertype.
    pub fn find_association(&self, from: ClassifierId, label: &str) -> Option<usize> {
        std::iter::once(from)
            .chain(self.supertypes(from))
            .find_map(|c| {
                self.associations
                    .iter()
                    .enumerate()
                    .find(|(i, a)| a.label == label && self.association_source(*i) == Some(c))
                    .map(|(i, _)| i)
            })
    }

    /// Resolves the call sites of a method body. Empty when the body is unknown.
    pub fn call_targets(&self, method: MethodId) -> Vec<CallTarget> {
        let Some(calls) = &self.method(method).calls else {
            return Vec::new();
        };
        let owner = method.classifier;
        calls
            .iter()
            .map(|site| {
                let start = match &site.receiver {
                    Receiver::SelfRef => Some(owner),
                    Receiver::Association(label) => self
                        .find_association(owner, label)
                        .and_then(|i| self.association_target(i)),
                    Receiver::External(_) => None,
                };
                let resolved = start.and_then(|receiver| {
                    self.lookup_method(receiver, &site.method)
                        .map(|method| (receiver, method))
                });
                match resolved {
                    Some((receiver, method)) => CallTarget::Resolved {
                        site: site.clone(),
                        receiver,
                        method,
                    },
                    None => CallTarget::External { site: site.clone() },
                }
            })
            .collect()
    }

    /// The classifier's own scope tag wins over its package's.
    pub fn implicit_scope(&self, id: ClassifierId) -> (Option<Scope>, ScopeOrigin) {
        if let Some(&scope) = scope_tags(&self.classifier(id).tags).first() {
            return (Some(scope), ScopeOrigin::Explicit);
        }
        match scope_tags(&self.packages[id.package].tags).first() {
            Some(&scope) => (Some(scope), ScopeOrigin::InheritedFromPackage),
            None => (None, ScopeOrigin::None),
        }
    }

    /// Type, supertype and association-end names that do not denote a declared classifier.
    pub fn external_names(&self) -> BTreeSet<String> {
        let mut names = BTreeSet::new();
        let mut note = |name: &str| {
            if self.find_classifier(name).is_none() {
                names.insert(name.to_string());
            }
        };
        for c in self.classifier_ids() {
            let classifier = self.classifier(c);
            classifier.supertype_names().for_each(&mut note);
            for a in &classifier.attributes {
                note(&a.type_name);
            }
            for m in &classifier.methods {
                m.params.iter().for_each(|p| note(&p.type_name));
                if let Some(ret) = &m.return_type {
                    note(ret);
                }
            }
        }
        names
    }
}
