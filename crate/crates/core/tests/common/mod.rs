#![allow(dead_code)]

use std::collections::BTreeSet;

use umlf::testkit::{random_model, ShapeConfig};
use umlf::{Model, Registry};

/// `(element, set, role, instance)` for every tag in the model.
pub type Triple = (String, String, Option<String>, Option<String>);

pub fn tag_triples(model: &Model) -> BTreeSet<Triple> {
    model
        .elements()
        .into_iter()
        .flat_map(|e| {
            let name = model.qualified_name(e);
            model
                .tags(e)
                .iter()
                .map(move |t| {
                    (
                        name.clone(),
                        t.set.clone(),
                        t.role.clone(),
                        t.instance.clone(),
                    )
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

pub fn random(seed: u64) -> Model {
    random_model(seed, &ShapeConfig::default())
}

pub fn registry() -> Registry {
    Registry::builtin()
}

pub fn fixture(name: &str) -> String {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}
