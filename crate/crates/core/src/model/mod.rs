//! Annotated class models.
//!
//! A [`Model`] is the class-diagram substrate that UML-F tags attach to:
//! packages holding classes and interfaces, their attributes and methods,
//! and the associations between classifiers. Models are plain immutable
//! values once built; every transformation in this crate returns a new one.
//!
//! Elements are addressed by [`ElementId`], whose ordering follows the order
//! of declarations in the source text (packages, their classifiers, the
//! attributes and then methods of each classifier, and finally the
//! associations). Diagnostics, candidates and generated docs are all sorted
//! by that order.

mod query;

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

pub use query::{CallTarget, ScopeOrigin};

/// Whether a classifier is a class or an interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Class,
    Interface,
}

/// Target multiplicity of an association end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Multiplicity {
    One,
    Many,
}

/// Where a tag application came from.
///
/// `Expanded` and `Detected` tags are printed with a trailing `!` so that
/// they survive a print/parse cycle; on reparse both read back as `Expanded`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TagOrigin {
    #[default]
    Explicit,
    Expanded,
    Detected,
}

impl TagOrigin {
    pub fn is_generated(self) -> bool {
        !matches!(self, TagOrigin::Explicit)
    }
}

/// One tag occurrence on one element, e.g. `<<Unif-t @ Rounding>>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TagApplication {
    pub set: String,
    pub role: Option<String>,
    pub instance: Option<String>,
    pub origin: TagOrigin,
}

impl TagApplication {
    /// A unary tag such as `framework` or `hook`.
    pub fn unary(set: impl Into<String>) -> Self {
        TagApplication {
            set: set.into(),
            role: None,
            instance: None,
            origin: TagOrigin::Explicit,
        }
    }

    pub fn role(set: impl Into<String>, role: impl Into<String>) -> Self {
        TagApplication {
            role: Some(role.into()),
            ..TagApplication::unary(set)
        }
    }

    pub fn with_instance(mut self, instance: Option<impl Into<String>>) -> Self {
        self.instance = instance.map(Into::into);
        self
    }

    pub fn with_origin(mut self, origin: TagOrigin) -> Self {
        self.origin = origin;
        self
    }

    /// The `(set, role, instance)` identity; origin is not part of it.
    pub fn same_triple(&self, other: &TagApplication) -> bool {
        self.set == other.set && self.role == other.role && self.instance == other.instance
    }

    /// The tag name without instance or origin, e.g. `Unif-t`.
    pub fn name(&self) -> String {
        match &self.role {
            Some(role) => format!("{}-{}", self.set, role),
            None => self.set.clone(),
        }
    }
}

impl fmt::Display for TagApplication {
    /// Canonical surface form including the guillemet replacements.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<<{}", self.name())?;
        if let Some(instance) = &self.instance {
            write!(f, " @ {instance}")?;
        }
        if self.origin.is_generated() {
            f.write_str(" !")?;
        }
        f.write_str(">>")
    }
}

/// Completeness markers of a classifier.
///
/// Compartments are incomplete unless marked; a complete class implies
/// complete attribute and method compartments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CompletenessMark {
    class: bool,
    attributes: bool,
    methods: bool,
}

impl CompletenessMark {
    pub fn new(class: bool, attributes: bool, methods: bool) -> Self {
        CompletenessMark {
            class,
            attributes: attributes || class,
            methods: methods || class,
        }
    }

    pub fn complete() -> Self {
        CompletenessMark::new(true, true, true)
    }

    pub fn class_complete(&self) -> bool {
        self.class
    }

    pub fn attributes_complete(&self) -> bool {
        self.attributes
    }

    pub fn methods_complete(&self) -> bool {
        self.methods
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub name: String,
    pub packages: Vec<Package>,
    pub associations: Vec<Association>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Package {
    pub name: String,
    pub tags: Vec<TagApplication>,
    pub classifiers: Vec<Classifier>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classifier {
    pub name: String,
    pub kind: ClassifierKind,
    /// As written; interfaces are abstract regardless, see [`Classifier::is_effectively_abstract`].
    pub is_abstract: bool,
    pub extends: Vec<String>,
    pub implements: Vec<String>,
    pub attributes: Vec<Attribute>,
    pub methods: Vec<Method>,
    pub tags: Vec<TagApplication>,
    pub completeness: CompletenessMark,
}

impl Classifier {
    pub fn new(name: impl Into<String>, kind: ClassifierKind) -> Self {
        Classifier {
            name: name.into(),
            kind,
            is_abstract: false,
            extends: Vec::new(),
            implements: Vec::new(),
            attributes: Vec::new(),
            methods: Vec::new(),
            tags: Vec::new(),
            completeness: CompletenessMark::default(),
        }
    }

    pub fn is_interface(&self) -> bool {
        self.kind == ClassifierKind::Interface
    }

    pub fn is_effectively_abstract(&self) -> bool {
        self.is_abstract || self.is_interface()
    }

    /// Declared supertype names, `extends` first.
    pub fn supertype_names(&self) -> impl Iterator<Item = &str> {
        self.extends
            .iter()
            .chain(self.implements.iter())
            .map(String::as_str)
    }

    pub fn method_named(&self, name: &str) -> Option<usize> {
        self.methods.iter().position(|m| m.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub type_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Method {
    pub name: String,
    pub is_abstract: bool,
    pub params: Vec<Param>,
    pub return_type: Option<String>,
    /// `None`: body unknown. `Some(vec![])`: body known to call nothing.
    pub calls: Option<Vec<CallSite>>,
    pub tags: Vec<TagApplication>,
}

impl Method {
    pub fn new(name: impl Into<String>) -> Self {
        Method {
            name: name.into(),
            is_abstract: false,
            params: Vec::new(),
            return_type: None,
            calls: None,
            tags: Vec::new(),
        }
    }

    /// Overriding identity: name plus parameter type names. Return types are ignored.
    pub fn same_signature(&self, other: &Method) -> bool {
        self.name == other.name
            && self.params.len() == other.params.len()
            && self
                .params
                .iter()
                .zip(&other.params)
                .all(|(a, b)| a.type_name == b.type_name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub name: String,
    pub type_name: String,
    pub tags: Vec<TagApplication>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Receiver {
    SelfRef,
    /// Label of an association whose source is the enclosing classifier or a supertype.
    Association(String),
    /// Any other receiver name; opaque.
    External(String),
}

impl Receiver {
    pub fn text(&self) -> &str {
        match self {
            Receiver::SelfRef => "self",
            Receiver::Association(name) | Receiver::External(name) => name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CallSite {
    pub receiver: Receiver,
    pub method: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Association {
    pub label: String,
    /// Qualified `Package.Classifier` name.
    pub source: String,
    /// Qualified `Package.Classifier` name.
    pub target: String,
    pub multiplicity: Multiplicity,
    pub tags: Vec<TagApplication>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassifierId {
    pub package: usize,
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MethodId {
    pub classifier: ClassifierId,
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AttributeId {
    pub classifier: ClassifierId,
    pub index: usize,
}

/// Reference to any taggable element of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementId {
    Package(usize),
    Classifier(ClassifierId),
    Attribute(AttributeId),
    Method(MethodId),
    Association(usize),
}

impl ElementId {
    /// Sort key matching declaration order in the source text.
    pub fn position_key(&self) -> (usize, usize, usize, usize) {
        match *self {
            ElementId::Package(p) => (p, 0, 0, 0),
            ElementId::Classifier(c) => (c.package, c.index + 1, 0, 0),
            ElementId::Attribute(a) => (a.classifier.package, a.classifier.index + 1, 1, a.index),
            ElementId::Method(m) => (m.classifier.package, m.classifier.index + 1, 2, m.index),
            ElementId::Association(i) => (usize::MAX, i, 0, 0),
        }
    }

    pub fn as_classifier(&self) -> Option<ClassifierId> {
        match *self {
            ElementId::Classifier(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_method(&self) -> Option<MethodId> {
        match *self {
            ElementId::Method(m) => Some(m),
            _ => None,
        }
    }
}

impl Ord for ElementId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.position_key().cmp(&other.position_key())
    }
}

impl PartialOrd for ElementId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<ClassifierId> for ElementId {
    fn from(id: ClassifierId) -> Self {
        ElementId::Classifier(id)
    }
}

impl From<MethodId> for ElementId {
    fn from(id: MethodId) -> Self {
        ElementId::Method(id)
    }
}

/// Kind of a model element, as reported in diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Package,
    Class,
    Interface,
    Attribute,
    Method,
    Association,
}

impl ElementKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ElementKind::Package => "package",
            ElementKind::Class => "class",
            ElementKind::Interface => "interface",
            ElementKind::Attribute => "attribute",
            ElementKind::Method => "method",
            ElementKind::Association => "association",
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The three ownership levels a classifier or package may be tagged with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Framework,
    Application,
    Utility,
}

impl Scope {
    pub const ALL: [Scope; 3] = [Scope::Framework, Scope::Application, Scope::Utility];

    pub fn from_tag(set: &str) -> Option<Scope> {
        match set {
            "framework" => Some(Scope::Framework),
            "application" => Some(Scope::Application),
            "utility" => Some(Scope::Utility),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Scope::Framework => "framework",
            Scope::Application => "application",
            Scope::Utility => "utility",
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Scope tags carried directly by a tag list, in order.
pub fn scope_tags(tags: &[TagApplication]) -> Vec<Scope> {
    tags.iter()
        .filter(|t| t.role.is_none())
        .filter_map(|t| Scope::from_tag(&t.set))
        .collect()
}
