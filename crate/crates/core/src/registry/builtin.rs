use crate::model::{ElementKind, Multiplicity};

use super::{
    AppliesTo, Cardinality, ConstraintKind, Layer, LowerTag, RoleSpec, SetKind, StructConstraint,
    TagSetDefinition,
};

const DOC_BASE: &str = "https://umlf.example.org/tagsets";

fn doc(abbrev: &str) -> Option<String> {
    Some(format!("{DOC_BASE}/{}", abbrev.to_lowercase()))
}

fn unary(
    name: &str,
    kind: SetKind,
    layer: Option<Layer>,
    targets: &[ElementKind],
) -> TagSetDefinition {
    TagSetDefinition {
        name: name.to_string(),
        abbreviation: name.to_string(),
        kind,
        layer,
        based_on: None,
        roles: Vec::new(),
        constraints: Vec::new(),
        expands_to: Vec::new(),
        targets: targets.to_vec(),
        doc_url: doc(name),
    }
}

fn lower(set: &str, role: Option<&str>) -> LowerTag {
    LowerTag {
        set: set.to_string(),
        role: role.map(str::to_string),
    }
}

fn marks(pairs: &[(&str, &str)]) -> Vec<(String, LowerTag)> {
    pairs
        .iter()
        .map(|(role, mark)| (role.to_string(), lower(mark, None)))
        .collect()
}

fn principle(
    name: &str,
    abbrev: &str,
    roles: Vec<RoleSpec>,
    constraints: Vec<StructConstraint>,
    expands_to: Vec<(String, LowerTag)>,
) -> TagSetDefinition {
    TagSetDefinition {
        name: name.to_string(),
        abbreviation: abbrev.to_string(),
        kind: SetKind::ConstructionPrinciple,
        layer: Some(Layer::Principle),
        based_on: None,
        roles,
        constraints,
        expands_to,
        targets: Vec::new(),
        doc_url: doc(abbrev),
    }
}

fn unification() -> TagSetDefinition {
    principle(
        "Unification",
        "Unif",
        vec![
            RoleSpec::new("TH", AppliesTo::Class),
            RoleSpec::new("t", AppliesTo::Method).within("TH"),
            RoleSpec::new("h", AppliesTo::Method)
                .within("TH")
                .cardinality(Cardinality::AtLeastOne),
        ],
        vec![StructConstraint::new(ConstraintKind::Calls, "t", "h")],
        marks(&[
            ("TH", "template"),
            ("TH", "hook"),
            ("t", "template"),
            ("h", "hook"),
        ]),
    )
}

/// T, t, H, h and the association `ref` from T to H.
fn separated_roles() -> Vec<RoleSpec> {
    vec![
        RoleSpec::new("T", AppliesTo::Class),
        RoleSpec::new("t", AppliesTo::Method).within("T"),
        RoleSpec::new("H", AppliesTo::ClassOrInterface),
        RoleSpec::new("h", AppliesTo::Method)
            .within("H")
            .cardinality(Cardinality::AtLeastOne),
        RoleSpec::new("ref", AppliesTo::Association).cardinality(Cardinality::Optional),
    ]
}

fn separated_marks() -> Vec<(String, LowerTag)> {
    marks(&[
        ("T", "template"),
        ("t", "template"),
        ("H", "hook"),
        ("h", "hook"),
    ])
}

fn separation() -> TagSetDefinition {
    principle(
        "Separation",
        "Sep",
        separated_roles(),
        vec![
            StructConstraint::new(ConstraintKind::AssociationFromTo, "T", "H"),
            StructConstraint::new(ConstraintKind::Calls, "t", "h"),
        ],
        separated_marks(),
    )
}

/// Composite, Decorator and Chain-of-Responsibility: Separation plus T
/// inheriting from H. They differ in the shape of the T→H association.
fn recursive(
    name: &str,
    abbrev: &str,
    multiplicity: Option<Multiplicity>,
    allow_self: bool,
) -> TagSetDefinition {
    let mut assoc = StructConstraint::new(ConstraintKind::AssociationFromTo, "T", "H");
    assoc.multiplicity = multiplicity;
    assoc.allow_self_association = allow_self;
    principle(
        name,
        abbrev,
        separated_roles(),
        vec![
            StructConstraint::new(ConstraintKind::Generalization, "T", "H"),
            assoc,
            StructConstraint::new(ConstraintKind::Calls, "t", "h"),
        ],
        separated_marks(),
    )
}

fn factory_method() -> TagSetDefinition {
    use Cardinality::Optional;
    TagSetDefinition {
        name: "FactoryMethod".to_string(),
        abbreviation: "FacM".to_string(),
        kind: SetKind::CatalogPattern,
        layer: Some(Layer::Pattern),
        based_on: Some("Unif".to_string()),
        roles: vec![
            RoleSpec::new("Creator", AppliesTo::Class).abstract_(),
            RoleSpec::new("facM", AppliesTo::Method)
                .within("Creator")
                .abstract_(),
            RoleSpec::new("anOp", AppliesTo::Method).within("Creator"),
            RoleSpec::new("Product", AppliesTo::ClassOrInterface).abstract_(),
            RoleSpec::new("ConcreteProduct", AppliesTo::Class).cardinality(Optional),
            RoleSpec::new("ConcreteCreator", AppliesTo::Class).cardinality(Optional),
            RoleSpec::new("facM-impl", AppliesTo::Method)
                .within("ConcreteCreator")
                .cardinality(Optional),
        ],
        constraints: vec![
            StructConstraint::new(ConstraintKind::Calls, "anOp", "facM"),
            StructConstraint::new(ConstraintKind::ReturnsRole, "facM", "Product"),
            StructConstraint::new(ConstraintKind::Generalization, "ConcreteCreator", "Creator"),
            StructConstraint::new(ConstraintKind::Generalization, "ConcreteProduct", "Product"),
        ],
        expands_to: vec![
            ("Creator".to_string(), lower("Unif", Some("TH"))),
            ("anOp".to_string(), lower("Unif", Some("t"))),
            ("facM".to_string(), lower("Unif", Some("h"))),
        ],
        targets: Vec::new(),
        doc_url: doc("FacM"),
    }
}

pub(super) fn builtin_definitions() -> Vec<TagSetDefinition> {
    use ElementKind::{Class, Interface, Method, Package};
    vec![
        unary(
            "framework",
            SetKind::ScopeTag,
            None,
            &[Package, Class, Interface],
        ),
        unary(
            "application",
            SetKind::ScopeTag,
            None,
            &[Package, Class, Interface],
        ),
        unary(
            "utility",
            SetKind::ScopeTag,
            None,
            &[Package, Class, Interface],
        ),
        // Templates need an implementation, so never on interfaces.
        unary(
            "template",
            SetKind::Marker,
            Some(Layer::TemplateHook),
            &[Class, Method],
        ),
        unary(
            "hook",
            SetKind::Marker,
            Some(Layer::TemplateHook),
            &[Class, Interface, Method],
        ),
        unification(),
        separation(),
        recursive("Composite", "Comp", Some(Multiplicity::Many), false),
        recursive("Decorator", "Dec", Some(Multiplicity::One), false),
        recursive("ChainOfResponsibility", "CoR", None, true),
        factory_method(),
    ]
}
