//! Line-oriented pattern-definition files (`.pat`).
//!
//! ```text
//! pattern <Name> abbrev <Abbrev> based-on <Unif|Sep|Comp|Dec|CoR> [doc <url>]
//! role <roleName> <class|interface|class-or-interface|method|attribute|association>
//!      [in <containerRole>] [abstract] [one|many|optional]
//! constrain <contains|calls|assoc|extends|returns> <fromRole> <toRole>
//! expand <roleName> -> <principleRole>
//! ```
//!
//! `#` starts a comment. A line that does not start with a directive
//! continues the previous one.

use std::collections::HashSet;

use super::{
    AbstractRequirement, AppliesTo, Cardinality, ConstraintKind, DefinitionError, Layer, LowerTag,
    Registry, RoleSpec, SetKind, StructConstraint, TagSetDefinition,
};
use crate::parser::KEYWORDS;

const DIRECTIVES: [&str; 4] = ["pattern", "role", "constrain", "expand"];

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c == '_' || c.is_alphabetic())
        && chars.all(|c| c == '_' || c.is_alphanumeric())
        && !KEYWORDS.contains(&s)
}

/// Role names may carry dashes (`facM-impl`), each part an identifier.
fn is_role_name(s: &str) -> bool {
    s.split('-').all(is_identifier)
}

/// Joins continuation lines onto their directive: `(line number, words)`.
fn directives(text: &str) -> Result<Vec<(usize, Vec<String>)>, DefinitionError> {
    let mut out: Vec<(usize, Vec<String>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let words: Vec<String> = line.split_whitespace().map(str::to_string).collect();
        let Some(first) = words.first() else { continue };
        if DIRECTIVES.contains(&first.as_str()) {
            out.push((i + 1, words));
        } else if let Some(last) = out.last_mut() {
            last.1.extend(words);
        } else {
            return Err(DefinitionError::new(
                i + 1,
                format!("expected a 'pattern' line, found '{first}'"),
            ));
        }
    }
    Ok(out)
}

pub(super) fn load(
    registry: &Registry,
    text: &str,
) -> Result<TagSetDefinition, Vec<DefinitionError>> {
    let lines = directives(text).map_err(|e| vec![e])?;
    let mut errors = Vec::new();
    let mut def: Option<TagSetDefinition> = None;
    let mut role_lines: Vec<usize> = Vec::new();

    for (line, words) in lines {
        let err = |msg: String| DefinitionError::new(line, msg);
        match words[0].as_str() {
            "pattern" => {
                if def.is_some() {
                    errors.push(err("more than one 'pattern' line".into()));
                    continue;
                }
                match pattern_header(registry, &words) {
                    Ok(d) => def = Some(d),
                    Err(msg) => {
                        errors.push(err(msg));
                        return Err(errors);
                    }
                }
            }
            _ if def.is_none() => {
                errors.push(err(format!("'{}' before the 'pattern' line", words[0])));
                return Err(errors);
            }
            "role" => match role_line(&words) {
                Ok(role) => {
                    let d = def.as_mut().unwrap();
                    if d.role(&role.name).is_some() {
                        errors.push(err(format!("duplicate role '{}'", role.name)));
                    } else {
                        d.roles.push(role);
                        role_lines.push(line);
                    }
                }
                Err(msg) => errors.push(err(msg)),
            },
            "constrain" => match constraint_line(&words) {
                Ok(c) => def.as_mut().unwrap().constraints.push(c),
                Err(msg) => errors.push(err(msg)),
            },
            "expand" => {
                if words.len() != 4 || words[2] != "->" {
                    errors.push(err("expected 'expand <role> -> <principleRole>'".into()));
                    continue;
                }
                let d = def.as_mut().unwrap();
                let base = d.based_on.clone().unwrap();
                d.expands_to.push((
                    words[1].clone(),
                    LowerTag {
                        set: base,
                        role: Some(words[3].clone()),
                    },
                ));
            }
            _ => unreachable!("directives() only yields known keywords"),
        }
    }

    let Some(def) = def else {
        errors.push(DefinitionError::new(1, "missing 'pattern' line"));
        return Err(errors);
    };
    for message in check_definition(registry, &def) {
        // Attribute to the first role line when we cannot do better.
        let line = role_lines.first().copied().unwrap_or(1);
        errors.push(DefinitionError::new(line, message));
    }
    if errors.is_empty() {
        Ok(def)
    } else {
        errors.sort_by_key(|e| e.line);
        Err(errors)
    }
}

fn pattern_header(registry: &Registry, words: &[String]) -> Result<TagSetDefinition, String> {
    let usage = "expected 'pattern <Name> abbrev <Abbrev> based-on <Principle> [doc <url>]'";
    if !(words.len() == 6 || words.len() == 8)
        || words[2] != "abbrev"
        || words[4] != "based-on"
        || (words.len() == 8 && words[6] != "doc")
    {
        return Err(usage.into());
    }
    let (name, abbrev, base) = (&words[1], &words[3], &words[5]);
    for n in [name, abbrev] {
        if !is_identifier(n) {
            return Err(format!("'{n}' is not a valid tag set name"));
        }
        if registry.get(n).is_some() {
            return Err(format!("tag set name '{n}' is already registered"));
        }
    }
    let principle = registry
        .get(base)
        .filter(|d| d.kind == SetKind::ConstructionPrinciple)
        .ok_or_else(|| format!("unknown based-on principle '{base}'"))?;
    Ok(TagSetDefinition {
        name: name.clone(),
        abbreviation: abbrev.clone(),
        kind: SetKind::DomainPattern,
        layer: Some(Layer::Pattern),
        based_on: Some(principle.abbreviation.clone()),
        roles: Vec::new(),
        constraints: Vec::new(),
        expands_to: Vec::new(),
        targets: Vec::new(),
        doc_url: words.get(7).cloned(),
    })
}

fn role_line(words: &[String]) -> Result<RoleSpec, String> {
    if words.len() < 3 {
        return Err("expected 'role <name> <kind> ...'".into());
    }
    if !is_role_name(&words[1]) {
        return Err(format!("'{}' is not a valid role name", words[1]));
    }
    let kind = AppliesTo::parse(&words[2])
        .ok_or_else(|| format!("unknown element kind '{}'", words[2]))?;
    let mut role = RoleSpec::new(&words[1], kind);
    let mut rest = words[3..].iter();
    while let Some(word) = rest.next() {
        match word.as_str() {
            "in" => {
                let container = rest.next().ok_or("expected a role name after 'in'")?;
                role.contained_in = Some(container.clone());
            }
            "abstract" => role.must_be_abstract = AbstractRequirement::Yes,
            "concrete" => role.must_be_abstract = AbstractRequirement::No,
            "one" => role.cardinality = Cardinality::ExactlyOne,
            "many" => role.cardinality = Cardinality::AtLeastOne,
            "optional" => role.cardinality = Cardinality::Optional,
            "any" => role.cardinality = Cardinality::Any,
            other => return Err(format!("unexpected '{other}' in role declaration")),
        }
    }
    Ok(role)
}

fn constraint_line(words: &[String]) -> Result<StructConstraint, String> {
    if words.len() != 4 {
        return Err("expected 'constrain <kind> <fromRole> <toRole>'".into());
    }
    let kind = match words[1].as_str() {
        "contains" => ConstraintKind::Contains,
        "calls" => ConstraintKind::Calls,
        "assoc" => ConstraintKind::AssociationFromTo,
        "extends" => ConstraintKind::Generalization,
        "returns" => ConstraintKind::ReturnsRole,
        other => return Err(format!("unknown constraint kind '{other}'")),
    };
    Ok(StructConstraint::new(kind, &words[2], &words[3]))
}

/// Structural invariants every definition must satisfy; one message per violation.
pub(crate) fn check_definition(registry: &Registry, def: &TagSetDefinition) -> Vec<String> {
    let mut problems = Vec::new();
    match (def.layer, &def.based_on) {
        (Some(Layer::Pattern), None) => {
            problems.push("pattern sets need a based-on principle".into())
        }
        (Some(Layer::Pattern), Some(base)) => {
            if !registry
                .get(base)
                .is_some_and(|b| b.kind == SetKind::ConstructionPrinciple)
            {
                problems.push(format!("unknown based-on principle '{base}'"));
            }
        }
        (_, Some(_)) => problems.push("only pattern sets may have a based-on principle".into()),
        _ => {}
    }

    let mut seen = HashSet::new();
    for role in &def.roles {
        if !seen.insert(role.name.as_str()) {
            problems.push(format!("duplicate role '{}'", role.name));
        }
        if let Some(container) = &role.contained_in {
            match def.role(container) {
                None => problems.push(format!(
                    "role '{}' is contained in unknown role '{container}'",
                    role.name
                )),
                Some(c) if !c.applies_to.is_classifier() => problems.push(format!(
                    "role '{}' is contained in '{container}', which is not a class or interface role",
                    role.name
                )),
                _ => {}
            }
        }
    }
    for c in &def.constraints {
        for r in [&c.from, &c.to] {
            if def.role(r).is_none() {
                problems.push(format!(
                    "constraint '{} {} {}' names unknown role '{r}'",
                    c.kind.keyword(),
                    c.from,
                    c.to
                ));
            }
        }
    }
    for (role, lower) in &def.expands_to {
        if def.role(role).is_none() {
            problems.push(format!("expansion of unknown role '{role}'"));
        }
        let target = registry.get(&lower.set);
        let ok = match def.layer {
            Some(Layer::Pattern) => {
                def.based_on.as_deref() == target.map(|t| t.abbreviation.as_str())
                    && lower
                        .role
                        .as_deref()
                        .is_some_and(|r| target.is_some_and(|t| t.role(r).is_some()))
            }
            Some(Layer::Principle) => {
                target.is_some_and(|t| t.kind == SetKind::Marker) && lower.role.is_none()
            }
            _ => false,
        };
        if !ok {
            let shown = match &lower.role {
                Some(r) => format!("{}-{r}", lower.set),
                None => lower.set.clone(),
            };
            problems.push(format!("role '{role}' cannot expand to '{shown}'"));
        }
    }
    problems
}

#[cfg(test)]
mod tests {
    use super::*;

    const STRATEGY: &str = include_str!("../../../../patterns/strategy.pat");
    const OBSERVER: &str = include_str!("../../../../patterns/observer.pat");

    #[test]
    fn shipped_strategy_definition() {
        let r = Registry::builtin();
        let def = r.load_pattern_definition(STRATEGY).unwrap();
        assert_eq!(def.name, "Strategy");
        assert_eq!(def.based_on.as_deref(), Some("Sep"));
        assert_eq!(def.kind, SetKind::DomainPattern);
        let roles: Vec<_> = def.roles.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(
            roles,
            [
                "Context",
                "contextInterface",
                "Strategy",
                "algorithmInterface",
                "ConcreteStrategy"
            ]
        );
    }

    #[test]
    fn shipped_observer_definition() {
        let mut r = Registry::builtin();
        let def = r.load(OBSERVER).unwrap();
        assert_eq!(def.based_on.as_deref(), Some("Sep"));
        assert!(r.get("Observer").is_some());
    }

    fn load_err(text: &str) -> Vec<DefinitionError> {
        Registry::builtin()
            .load_pattern_definition(text)
            .unwrap_err()
    }

    #[test]
    fn unknown_based_on_is_rejected() {
        let e = load_err("pattern P abbrev Pp based-on NoSuchPrinciple\nrole A class\n");
        assert!(e[0]
            .message
            .contains("unknown based-on principle 'NoSuchPrinciple'"));
        // A pattern is not a principle.
        let e = load_err("pattern P abbrev Pp based-on FacM\n");
        assert!(e[0].message.contains("unknown based-on"));
    }

    #[test]
    fn container_must_be_a_classifier_role() {
        let e =
            load_err("pattern P abbrev Pp based-on Unif\nrole op method\nrole x method in op\n");
        assert!(
            e.iter()
                .any(|e| e.message.contains("not a class or interface role")),
            "{e:?}"
        );
        let e = load_err("pattern P abbrev Pp based-on Unif\nrole x method in Nowhere\n");
        assert!(e
            .iter()
            .any(|e| e.message.contains("unknown role 'Nowhere'")));
    }

    #[test]
    fn duplicate_roles_and_dangling_references() {
        let e = load_err("pattern P abbrev Pp based-on Sep\nrole A class\nrole A class\n");
        assert!(e
            .iter()
            .any(|e| e.message.contains("duplicate role 'A'") && e.line == 3));
        let e = load_err("pattern P abbrev Pp based-on Sep\nrole A class\nconstrain calls A B\n");
        assert!(e.iter().any(|e| e.message.contains("unknown role 'B'")));
        let e = load_err("pattern P abbrev Pp based-on Sep\nrole A class\nexpand A -> Zed\n");
        assert!(e
            .iter()
            .any(|e| e.message.contains("cannot expand to 'Sep-Zed'")));
    }

    #[test]
    fn name_collisions_are_load_errors() {
        let e = load_err("pattern Whatever abbrev FacM based-on Unif\n");
        assert!(e[0].message.contains("already registered"));
        let mut r = Registry::builtin();
        r.load(STRATEGY).unwrap();
        assert!(r.load(STRATEGY).is_err());
    }

    #[test]
    fn continuation_lines_and_comments() {
        let def = Registry::builtin()
            .load_pattern_definition(
                "# header\npattern P abbrev Pp based-on Sep doc https://x.example/p\nrole A class\nrole op method\n    in A abstract # trailing\n   optional\n",
            )
            .unwrap();
        let op = def.role("op").unwrap();
        assert_eq!(op.contained_in.as_deref(), Some("A"));
        assert_eq!(op.must_be_abstract, AbstractRequirement::Yes);
        assert_eq!(op.cardinality, Cardinality::Optional);
        assert_eq!(def.doc_url.as_deref(), Some("https://x.example/p"));
    }

    #[test]
    fn zero_role_definitions_load() {
        let def = Registry::builtin()
            .load_pattern_definition("pattern Empty abbrev Emp based-on Unif\n")
            .unwrap();
        assert!(def.derive_tag_names().is_empty());
    }

    #[test]
    fn stray_text_before_header() {
        let e = load_err("role A class\n");
        assert!(e[0].message.contains("before the 'pattern' line"));
        let e = load_err("hello\n");
        assert!(e[0].message.contains("expected a 'pattern' line"));
        let e = load_err("");
        assert!(e[0].message.contains("missing 'pattern' line"));
    }
}
