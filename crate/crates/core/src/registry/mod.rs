//! Tag-set definitions and the registry that resolves tag text against them.
//!
//! Tag sets come in layers. Template/hook markers form the bottom layer,
//! construction principles (Unification, Separation and the recursive
//! Composite, Decorator and Chain-of-Responsibility) the middle one, and
//! catalog or domain patterns the top. Each definition records how its roles
//! map onto the layer below, which is what the expander follows.

mod builtin;
mod patfile;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::model::{ElementKind, Multiplicity, TagApplication};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetKind {
    ScopeTag,
    Marker,
    ConstructionPrinciple,
    CatalogPattern,
    DomainPattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Layer {
    TemplateHook = 1,
    Principle = 2,
    Pattern = 3,
}

impl Layer {
    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn title(self) -> &'static str {
        match self {
            Layer::Pattern => "patterns",
            Layer::Principle => "construction principles",
            Layer::TemplateHook => "template and hook",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AppliesTo {
    Class,
    Interface,
    ClassOrInterface,
    Method,
    Attribute,
    Association,
}

impl AppliesTo {
    pub fn accepts(self, kind: ElementKind) -> bool {
        matches!(
            (self, kind),
            (AppliesTo::Class, ElementKind::Class)
                | (AppliesTo::Interface, ElementKind::Interface)
                | (
                    AppliesTo::ClassOrInterface,
                    ElementKind::Class | ElementKind::Interface
                )
                | (AppliesTo::Method, ElementKind::Method)
                | (AppliesTo::Attribute, ElementKind::Attribute)
                | (AppliesTo::Association, ElementKind::Association)
        )
    }

    pub fn is_classifier(self) -> bool {
        matches!(
            self,
            AppliesTo::Class | AppliesTo::Interface | AppliesTo::ClassOrInterface
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AppliesTo::Class => "class",
            AppliesTo::Interface => "interface",
            AppliesTo::ClassOrInterface => "class-or-interface",
            AppliesTo::Method => "method",
            AppliesTo::Attribute => "attribute",
            AppliesTo::Association => "association",
        }
    }

    pub fn parse(s: &str) -> Option<AppliesTo> {
        Some(match s {
            "class" => AppliesTo::Class,
            "interface" => AppliesTo::Interface,
            "class-or-interface" => AppliesTo::ClassOrInterface,
            "method" => AppliesTo::Method,
            "attribute" => AppliesTo::Attribute,
            "association" => AppliesTo::Association,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cardinality {
    ExactlyOne,
    AtLeastOne,
    Optional,
    Any,
}

impl Cardinality {
    pub fn admits(self, count: usize) -> bool {
        match self {
            Cardinality::ExactlyOne => count == 1,
            Cardinality::AtLeastOne => count >= 1,
            Cardinality::Optional => count <= 1,
            Cardinality::Any => true,
        }
    }

    pub fn is_required(self) -> bool {
        matches!(self, Cardinality::ExactlyOne | Cardinality::AtLeastOne)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbstractRequirement {
    Yes,
    No,
    Unconstrained,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoleSpec {
    pub name: String,
    pub applies_to: AppliesTo,
    pub cardinality: Cardinality,
    pub must_be_abstract: AbstractRequirement,
    /// A class or interface role of the same set that must declare this element.
    pub contained_in: Option<String>,
}

impl RoleSpec {
    pub fn new(name: &str, applies_to: AppliesTo) -> Self {
        RoleSpec {
            name: name.to_string(),
            applies_to,
            cardinality: Cardinality::ExactlyOne,
            must_be_abstract: AbstractRequirement::Unconstrained,
            contained_in: None,
        }
    }

    pub fn within(mut self, container: &str) -> Self {
        self.contained_in = Some(container.to_string());
        self
    }

    pub fn cardinality(mut self, cardinality: Cardinality) -> Self {
        self.cardinality = cardinality;
        self
    }

    pub fn abstract_(mut self) -> Self {
        self.must_be_abstract = AbstractRequirement::Yes;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintKind {
    Contains,
    Calls,
    AssociationFromTo,
    Generalization,
    ReturnsRole,
}

impl ConstraintKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ConstraintKind::Contains => "contains",
            ConstraintKind::Calls => "calls",
            ConstraintKind::AssociationFromTo => "assoc",
            ConstraintKind::Generalization => "extends",
            ConstraintKind::ReturnsRole => "returns",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeverityIfUnknown {
    Skip,
    Warn,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructConstraint {
    pub kind: ConstraintKind,
    pub from: String,
    pub to: String,
    /// What to do when the evidence is unknown (a method body that is not given).
    pub severity_if_unknown: SeverityIfUnknown,
    /// Association constraints only: required target multiplicity.
    pub multiplicity: Option<Multiplicity>,
    /// Association constraints only: whether an association from a classifier
    /// to itself satisfies the constraint.
    pub allow_self_association: bool,
}

impl StructConstraint {
    pub fn new(kind: ConstraintKind, from: &str, to: &str) -> Self {
        StructConstraint {
            kind,
            from: from.to_string(),
            to: to.to_string(),
            severity_if_unknown: SeverityIfUnknown::Skip,
            multiplicity: None,
            allow_self_association: false,
        }
    }
}

/// The lower-layer tag a role expands to. `role` is `None` for the unary markers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct LowerTag {
    pub set: String,
    pub role: Option<String>,
}

/// A template or hook mark, the bottom of the layering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mark {
    Template,
    Hook,
}

impl Mark {
    pub fn tag_name(self) -> &'static str {
        match self {
            Mark::Template => "template",
            Mark::Hook => "hook",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TagSetDefinition {
    pub name: String,
    pub abbreviation: String,
    pub kind: SetKind,
    /// `None` for scope tags, which sit outside the pattern layering.
    pub layer: Option<Layer>,
    /// Abbreviation of the principle underlying a layer-3 set.
    pub based_on: Option<String>,
    pub roles: Vec<RoleSpec>,
    pub constraints: Vec<StructConstraint>,
    /// Role → lower-layer tag, in declaration order. A role may map to several.
    pub expands_to: Vec<(String, LowerTag)>,
    /// Element kinds a unary tag may be attached to.
    pub targets: Vec<ElementKind>,
    pub doc_url: Option<String>,
}

impl TagSetDefinition {
    /// Unary tags (`framework`, `hook`, ...) carry no role and no instance name.
    pub fn is_unary(&self) -> bool {
        matches!(self.kind, SetKind::ScopeTag | SetKind::Marker)
    }

    pub fn role(&self, name: &str) -> Option<&RoleSpec> {
        self.roles.iter().find(|r| r.name == name)
    }

    pub fn role_index(&self, name: &str) -> Option<usize> {
        self.roles.iter().position(|r| r.name == name)
    }

    /// The classifier role anonymous tags are grouped around (TH, T, Creator, ...):
    /// the first class or interface role that is not itself contained in another.
    pub fn anchor_role(&self) -> Option<&RoleSpec> {
        self.roles
            .iter()
            .find(|r| r.applies_to.is_classifier() && r.contained_in.is_none())
    }

    pub fn expansions<'a>(&'a self, role: &'a str) -> impl Iterator<Item = &'a LowerTag> + 'a {
        self.expands_to
            .iter()
            .filter(move |(r, _)| r == role)
            .map(|(_, lower)| lower)
    }

    /// One tag name per role, `Abbrev-role`, in role order.
    pub fn derive_tag_names(&self) -> Vec<String> {
        self.roles
            .iter()
            .map(|r| format!("{}-{}", self.abbreviation, r.name))
            .collect()
    }

    /// Tag names as written on diagrams, in role order. Differs from
    /// [`derive_tag_names`](Self::derive_tag_names) only for `-impl` roles,
    /// which share their base role's spelling (`FacM-facM` twice).
    pub fn surface_tag_names(&self) -> Vec<String> {
        self.roles
            .iter()
            .map(|r| format!("{}-{}", self.abbreviation, self.surface_role(&r.name)))
            .collect()
    }

    /// Role `x-impl` declared for surface role `x` (the override in a subclass).
    pub fn impl_role_for(&self, role: &str) -> Option<&RoleSpec> {
        self.role(&format!("{role}-impl"))
    }

    /// Surface spelling of a role; `facM-impl` is written `facM`.
    pub fn surface_role<'a>(&self, role: &'a str) -> &'a str {
        match role.strip_suffix("-impl") {
            Some(base) if self.role(base).is_some() => base,
            _ => role,
        }
    }
}

/// Why a tag could not be resolved.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TagProblem {
    #[error("unknown tag set '{0}'")]
    UnknownSet(String),
    #[error("tag set '{set}' has no role '{role}'")]
    UnknownRole { set: String, role: String },
    #[error("tag set '{0}' needs a role")]
    MissingRole(String),
    #[error("tag '{0}' takes no role")]
    UnexpectedRole(String),
    #[error("tag '{0}' takes no instance name")]
    UnexpectedInstance(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct DefinitionError {
    pub line: usize,
    pub message: String,
}

impl DefinitionError {
    pub(crate) fn new(line: usize, message: impl Into<String>) -> Self {
        DefinitionError {
            line,
            message: message.into(),
        }
    }
}

/// All tag sets known to a run: built-ins plus loaded definitions. Immutable
/// once assembled.
#[derive(Debug, Clone)]
pub struct Registry {
    defs: Vec<TagSetDefinition>,
    index: HashMap<String, usize>,
}

impl Default for Registry {
    fn default() -> Self {
        Registry::builtin()
    }
}

impl Registry {
    pub fn builtin() -> Self {
        let mut registry = Registry {
            defs: Vec::new(),
            index: HashMap::new(),
        };
        for def in builtin::builtin_definitions() {
            registry
                .add(def)
                .expect("built-in definitions do not collide");
        }
        registry
    }

    pub fn definitions(&self) -> &[TagSetDefinition] {
        &self.defs
    }

    /// Looks a set up by full name or abbreviation.
    pub fn get(&self, name: &str) -> Option<&TagSetDefinition> {
        self.index.get(name).map(|&i| &self.defs[i])
    }

    /// Adds a validated definition. Name or abbreviation collisions are errors.
    pub fn add(&mut self, def: TagSetDefinition) -> Result<(), DefinitionError> {
        for key in [&def.name, &def.abbreviation] {
            if self.index.contains_key(key.as_str()) {
                return Err(DefinitionError::new(
                    1,
                    format!("tag set name '{key}' is already registered"),
                ));
            }
        }
        let i = self.defs.len();
        self.index.insert(def.name.clone(), i);
        self.index.insert(def.abbreviation.clone(), i);
        self.defs.push(def);
        Ok(())
    }

    /// Parses, validates and registers a pattern-definition file.
    pub fn load(&mut self, text: &str) -> Result<&TagSetDefinition, Vec<DefinitionError>> {
        let def = self.load_pattern_definition(text)?;
        self.add(def).map_err(|e| vec![e])?;
        Ok(self.defs.last().unwrap())
    }

    /// Parses and validates a domain-pattern definition against this registry
    /// without registering it.
    pub fn load_pattern_definition(
        &self,
        text: &str,
    ) -> Result<TagSetDefinition, Vec<DefinitionError>> {
        patfile::load(self, text)
    }

    pub fn set_doc_url(&mut self, set: &str, url: impl Into<String>) -> bool {
        match self.index.get(set) {
            Some(&i) => {
                self.defs[i].doc_url = Some(url.into());
                true
            }
            None => false,
        }
    }

    /// Resolves `Set` or `Set-Role` text.
    pub fn lookup_tag(
        &self,
        text: &str,
    ) -> Result<(&TagSetDefinition, Option<&RoleSpec>), TagProblem> {
        let tag = match text.split_once(['-', '–']) {
            Some((set, role)) => TagApplication::role(set, role),
            None => TagApplication::unary(text),
        };
        self.resolve(&tag)
    }

    pub fn resolve(
        &self,
        tag: &TagApplication,
    ) -> Result<(&TagSetDefinition, Option<&RoleSpec>), TagProblem> {
        let def = self
            .get(&tag.set)
            .ok_or_else(|| TagProblem::UnknownSet(tag.set.clone()))?;
        if def.is_unary() {
            if tag.role.is_some() {
                return Err(TagProblem::UnexpectedRole(tag.name()));
            }
            if tag.instance.is_some() {
                return Err(TagProblem::UnexpectedInstance(tag.name()));
            }
            return Ok((def, None));
        }
        let role_name = tag
            .role
            .as_deref()
            .ok_or_else(|| TagProblem::MissingRole(tag.set.clone()))?;
        let role = def.role(role_name).ok_or_else(|| TagProblem::UnknownRole {
            set: tag.set.clone(),
            role: role_name.to_string(),
        })?;
        Ok((def, Some(role)))
    }

    /// The template/hook marks a resolved tag implies, following the layering down.
    pub fn marks(&self, def: &TagSetDefinition, role: Option<&str>) -> BTreeSet<Mark> {
        let mut out = BTreeSet::new();
        self.collect_marks(def, role, &mut out, 0);
        out
    }

    fn collect_marks(
        &self,
        def: &TagSetDefinition,
        role: Option<&str>,
        out: &mut BTreeSet<Mark>,
        depth: usize,
    ) {
        if depth > 4 {
            return;
        }
        if def.kind == SetKind::Marker {
            match def.abbreviation.as_str() {
                "template" => out.insert(Mark::Template),
                "hook" => out.insert(Mark::Hook),
                _ => false,
            };
            return;
        }
        let Some(role) = role else { return };
        for lower in def.expansions(role) {
            if let Some(lower_def) = self.get(&lower.set) {
                self.collect_marks(lower_def, lower.role.as_deref(), out, depth + 1);
            }
        }
    }

    /// Principle chain of a set, e.g. `FacM → Unif → template/hook`.
    pub fn chain(&self, def: &TagSetDefinition) -> Vec<String> {
        let mut chain = vec![def.abbreviation.clone()];
        let mut current = def;
        while let Some(base) = current.based_on.as_deref().and_then(|b| self.get(b)) {
            chain.push(base.abbreviation.clone());
            current = base;
        }
        if matches!(current.layer, Some(Layer::Principle) | Some(Layer::Pattern)) {
            chain.push("template/hook".to_string());
        }
        chain
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "layer {}", self.number())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_resolves_abbreviations_and_roles() {
        let r = Registry::builtin();
        let (def, role) = r.lookup_tag("Unif-t").unwrap();
        assert_eq!(def.abbreviation, "Unif");
        assert_eq!(role.unwrap().name, "t");
        let (def, role) = r.lookup_tag("framework").unwrap();
        assert_eq!(def.kind, SetKind::ScopeTag);
        assert!(role.is_none());
        assert_eq!(
            r.lookup_tag("Bogus-x").unwrap_err(),
            TagProblem::UnknownSet("Bogus".into())
        );
        assert!(r.lookup_tag("Unification-TH").is_ok());
        assert!(r.lookup_tag("FacM-facM-impl").is_ok());
        assert!(matches!(
            r.lookup_tag("Unif"),
            Err(TagProblem::MissingRole(_))
        ));
        assert!(matches!(
            r.lookup_tag("framework-x"),
            Err(TagProblem::UnexpectedRole(_))
        ));
        assert!(matches!(
            r.lookup_tag("Unif-zz"),
            Err(TagProblem::UnknownRole { .. })
        ));
    }

    #[test]
    fn marks_follow_the_layers_down() {
        let r = Registry::builtin();
        let facm = r.get("FacM").unwrap();
        assert_eq!(
            r.marks(facm, Some("Creator")),
            BTreeSet::from([Mark::Template, Mark::Hook])
        );
        assert_eq!(r.marks(facm, Some("facM")), BTreeSet::from([Mark::Hook]));
        assert_eq!(
            r.marks(facm, Some("anOp")),
            BTreeSet::from([Mark::Template])
        );
        assert!(r.marks(facm, Some("Product")).is_empty());
        let sep = r.get("Sep").unwrap();
        assert_eq!(r.marks(sep, Some("T")), BTreeSet::from([Mark::Template]));
        assert_eq!(r.marks(sep, Some("H")), BTreeSet::from([Mark::Hook]));
    }

    #[test]
    fn chain_lists_underlying_principles() {
        let r = Registry::builtin();
        assert_eq!(
            r.chain(r.get("FacM").unwrap()),
            vec!["FacM", "Unif", "template/hook"]
        );
        assert_eq!(r.chain(r.get("Sep").unwrap()), vec!["Sep", "template/hook"]);
    }

    #[test]
    fn doc_urls_are_overridable() {
        let mut r = Registry::builtin();
        assert!(r.set_doc_url("Unification", "https://docs.example/unif"));
        assert_eq!(
            r.get("Unif").unwrap().doc_url.as_deref(),
            Some("https://docs.example/unif")
        );
        assert!(!r.set_doc_url("Nope", "x"));
    }
}
