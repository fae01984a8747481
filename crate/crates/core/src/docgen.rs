//! Markdown documentation of a model's tag-set instances.
//!
//! The bundle is an `index.md` plus one `inst-<Set>-<instance>.md` page per
//! instance. Pages link back to the index and out to the tag set's
//! documentation URL.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::expander::{collect_instances, PatternInstance};
use crate::model::{CallTarget, ElementId, Model, Scope};
use crate::registry::{ConstraintKind, Layer, Registry, TagSetDefinition};
use crate::validator::{validate_model, ValidateOptions};

#[derive(Debug, Clone, Default)]
pub struct DocOptions {
    /// Options for the diagnostics listed on the index page.
    pub validate: ValidateOptions,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocPage {
    /// Instance key, `Set@instance` or `Set@<anon:Class>`.
    pub key: String,
    pub file: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocBundle {
    pub index: String,
    pub pages: Vec<DocPage>,
}

impl DocBundle {
    pub const INDEX: &'static str = "index.md";

    /// Every file of the bundle as `(file name, contents)`, index first.
    pub fn files(&self) -> impl Iterator<Item = (&str, &str)> {
        std::iter::once((Self::INDEX, self.index.as_str())).chain(
            self.pages
                .iter()
                .map(|p| (p.file.as_str(), p.text.as_str())),
        )
    }

    pub fn page(&self, key: &str) -> Option<&DocPage> {
        self.pages.iter().find(|p| p.key == key)
    }
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

fn title(model: &Model, instance: &PatternInstance) -> String {
    match (&instance.instance, instance.anchor) {
        (Some(name), _) => format!("{} @ {name}", instance.set),
        (None, Some(anchor)) => format!(
            "{} (anonymous, {})",
            instance.set,
            model.classifier(anchor).name
        ),
        (None, None) => format!("{} (anonymous)", instance.set),
    }
}

fn file_stem(model: &Model, instance: &PatternInstance) -> String {
    let name = match (&instance.instance, instance.anchor) {
        (Some(name), _) => name.clone(),
        (None, Some(anchor)) => format!("anon-{}", model.classifier(anchor).name),
        (None, None) => "anon".to_string(),
    };
    format!("inst-{}-{}", sanitize(&instance.set), sanitize(&name))
}

/// Builds the documentation bundle. Output depends only on the inputs.
pub fn generate_docs(model: &Model, registry: &Registry, options: &DocOptions) -> DocBundle {
    let instances = collect_instances(model, registry);
    let mut used = BTreeSet::new();
    let mut pages = Vec::new();
    for instance in &instances {
        let stem = file_stem(model, instance);
        let mut file = format!("{stem}.md");
        let mut n = 2;
        while !used.insert(file.clone()) {
            file = format!("{stem}-{n}.md");
            n += 1;
        }
        let Some(def) = registry.get(&instance.set) else {
            continue;
        };
        pages.push(DocPage {
            key: instance.key(model),
            text: instance_page(model, registry, def, instance),
            file,
        });
    }
    let index = index_page(model, registry, options, &instances, &pages);
    DocBundle { index, pages }
}

fn index_page(
    model: &Model,
    registry: &Registry,
    options: &DocOptions,
    instances: &[PatternInstance],
    pages: &[DocPage],
) -> String {
    let mut out = String::new();
    writeln!(out, "# Model {}\n", model.name).unwrap();

    out.push_str("## Scope\n\n");
    let mut counts: BTreeMap<Scope, usize> = BTreeMap::new();
    let mut unscoped = 0;
    for c in model.classifier_ids() {
        match model.implicit_scope(c).0 {
            Some(scope) => *counts.entry(scope).or_default() += 1,
            None => unscoped += 1,
        }
    }
    for scope in Scope::ALL {
        writeln!(
            out,
            "- {scope}: {}",
            counts.get(&scope).copied().unwrap_or(0)
        )
        .unwrap();
    }
    writeln!(out, "- untagged: {unscoped}\n").unwrap();

    writeln!(out, "## Instances\n").unwrap();
    if instances.is_empty() {
        out.push_str("No tag-set instances.\n\n");
    }
    for layer in [Layer::Pattern, Layer::Principle] {
        let in_layer: Vec<(&PatternInstance, &DocPage)> = instances
            .iter()
            .zip(pages)
            .filter(|(i, _)| registry.get(&i.set).and_then(|d| d.layer) == Some(layer))
            .collect();
        if in_layer.is_empty() {
            continue;
        }
        writeln!(out, "### Layer {}: {}\n", layer.number(), layer.title()).unwrap();
        let sets: BTreeSet<&str> = in_layer.iter().map(|(i, _)| i.set.as_str()).collect();
        for set in sets {
            let def = registry.get(set).expect("instances resolve");
            writeln!(out, "#### {} ({})\n", def.name, def.abbreviation).unwrap();
            for (instance, page) in in_layer.iter().filter(|(i, _)| i.set == set) {
                writeln!(out, "- [{}]({})", title(model, instance), page.file).unwrap();
            }
            out.push('\n');
        }
    }

    out.push_str("## Diagnostics\n\n");
    let diagnostics = validate_model(model, registry, &options.validate);
    if diagnostics.is_empty() {
        out.push_str("None.\n");
    }
    for d in diagnostics {
        writeln!(out, "- {}", d.to_string().replace('<', "\\<")).unwrap();
    }
    out
}

fn flexibility(principle: &str) -> Option<&'static str> {
    Some(match principle {
        "Unif" => {
            "Template and hooks share one class, so a variant is made by subclassing it \
             and overriding the hooks. The variant is picked when the code is built; \
             switching to another one means shipping and starting a different program."
        }
        "Sep" => {
            "The hook lives in a separate class reached through an association. A \
             different hook object can be plugged in while the program runs, and the \
             template class stays untouched."
        }
        "Comp" => {
            "The template class is itself a hook type and holds many hook objects, so \
             part-whole trees can be assembled and the template reaches every child."
        }
        "Dec" => {
            "The template class is a hook type wrapping exactly one hook object, so \
             behaviour is added by stacking wrappers at runtime."
        }
        "CoR" => {
            "Each hook object may pass work on to a successor of the same type, so the \
             chain of handlers can be rearranged at runtime."
        }
        _ => return None,
    })
}

fn instance_page(
    model: &Model,
    registry: &Registry,
    def: &TagSetDefinition,
    instance: &PatternInstance,
) -> String {
    let mut out = String::new();
    writeln!(out, "# {}\n", title(model, instance)).unwrap();
    let layer = def
        .layer
        .map(|l| format!("layer {}, {}", l.number(), l.title()))
        .unwrap_or_else(|| "no layer".into());
    writeln!(
        out,
        "Tag set: {} ({}), {layer}.\n",
        def.name, def.abbreviation
    )
    .unwrap();
    writeln!(out, "Chain: {}\n", registry.chain(def).join(" → ")).unwrap();
    match &def.doc_url {
        Some(url) => writeln!(out, "Documentation: [{}]({url})\n", def.name).unwrap(),
        None => out.push_str("Documentation: none\n\n"),
    }

    out.push_str("## Roles\n\n| role | tag | participants |\n|---|---|---|\n");
    for role in def.roles.iter().map(|r| r.name.as_str()) {
        let participants: Vec<String> = instance
            .bound(role)
            .iter()
            .map(|&e| model.qualified_name(e))
            .collect();
        let shown = if participants.is_empty() {
            "(unbound)".to_string()
        } else {
            participants.join(", ")
        };
        writeln!(
            out,
            "| {role} | {}-{} | {shown} |",
            def.abbreviation,
            def.surface_role(role)
        )
        .unwrap();
    }
    out.push('\n');

    out.push_str("## Template-to-hook calls\n\n");
    let mut any = false;
    for constraint in def
        .constraints
        .iter()
        .filter(|c| c.kind == ConstraintKind::Calls)
    {
        let hooks: Vec<ElementId> = instance.bound(&constraint.to).to_vec();
        for &t in instance.bound(&constraint.from) {
            let Some(template) = t.as_method() else {
                continue;
            };
            any = true;
            let name = model.qualified_name(t);
            if model.method(template).calls.is_none() {
                writeln!(out, "- {name}: body not given").unwrap();
                continue;
            }
            let reached: Vec<String> = model
                .call_targets(template)
                .into_iter()
                .filter_map(|target| match target {
                    CallTarget::Resolved { site, method, .. } => {
                        let hit = hooks.iter().any(|&h| {
                            h.as_method().is_some_and(|h| {
                                h == method
                                    || model.overrides(method, h)
                                    || model.overrides(h, method)
                            })
                        });
                        hit.then(|| {
                            format!(
                                "{} via {}",
                                model.qualified_name(ElementId::Method(method)),
                                site.receiver.text()
                            )
                        })
                    }
                    CallTarget::External { .. } => None,
                })
                .collect();
            if reached.is_empty() {
                writeln!(out, "- {name}: calls none of the {} methods", constraint.to).unwrap();
            } else {
                writeln!(out, "- {name} → {}", reached.join(", ")).unwrap();
            }
        }
    }
    if !any {
        out.push_str("No template method bound.\n");
    }
    out.push('\n');

    let principle = registry.chain(def).into_iter().rev().find(|s| {
        registry
            .get(s)
            .is_some_and(|d| d.layer == Some(Layer::Principle))
    });
    if let Some(text) = principle.as_deref().and_then(flexibility) {
        writeln!(out, "## Flexibility\n\n{text}\n").unwrap();
    }
    out.push_str("[Back to index](index.md)\n");
    out
}
