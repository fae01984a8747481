//! Brute-force reference predicates for detector equivalence. Written
//! straight against the model's data, without the model's query helpers,
//! so that a bug there cannot hide in both implementations.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use umlf::model::{Classifier, Method};
use umlf::Model;

/// A Unification occurrence: `(TH, t, {h})` as qualified names.
pub type UnifFact = (String, String, Vec<String>);
/// A Separation occurrence: `(T, t, H, h, association)` as qualified names.
pub type SepFact = (String, String, String, String, String);

struct Index<'a> {
    classes: BTreeMap<String, (&'a str, &'a Classifier)>,
}

impl<'a> Index<'a> {
    fn new(model: &'a Model) -> Self {
        let mut classes = BTreeMap::new();
        for p in &model.packages {
            for c in &p.classifiers {
                classes.insert(format!("{}.{}", p.name, c.name), (p.name.as_str(), c));
            }
        }
        Index { classes }
    }

    /// Qualified name for a reference written either plain or qualified.
    fn qualify(&self, name: &str) -> Option<String> {
        if self.classes.contains_key(name) {
            return Some(name.to_string());
        }
        let matches: Vec<&String> = self
            .classes
            .iter()
            .filter(|(_, (_, c))| c.name == name)
            .map(|(q, _)| q)
            .collect();
        (matches.len() == 1).then(|| matches[0].clone())
    }

    fn parents(&self, q: &str) -> Vec<String> {
        let (_, c) = self.classes[q];
        c.extends
            .iter()
            .chain(&c.implements)
            .filter_map(|n| self.qualify(n))
            .collect()
    }

    /// Strict supertypes with their distance.
    fn ancestors(&self, q: &str) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        let mut queue = VecDeque::from([(q.to_string(), 0)]);
        while let Some((current, d)) = queue.pop_front() {
            for p in self.parents(&current) {
                if p != q && !out.contains_key(&p) {
                    out.insert(p.clone(), d + 1);
                    queue.push_back((p, d + 1));
                }
            }
        }
        out
    }

    fn method(&self, q: &str, name: &str) -> Option<&'a Method> {
        self.classes[q].1.methods.iter().find(|m| m.name == name)
    }

    fn overridden(&self, q: &str, h: &Method) -> bool {
        self.classes.keys().any(|sub| {
            self.ancestors(sub).contains_key(q)
                && self.classes[sub].1.methods.iter().any(|m| {
                    m.name == h.name
                        && m.params
                            .iter()
                            .map(|p| &p.type_name)
                            .eq(h.params.iter().map(|p| &p.type_name))
                })
        })
    }

    /// Nearest classifier among `q` and its supertypes that declares `name`.
    fn nearest_declaring(&self, q: &str, name: &str) -> Option<String> {
        let mut options: Vec<(usize, String)> = self
            .ancestors(q)
            .into_iter()
            .map(|(c, d)| (d, c))
            .chain(std::iter::once((0, q.to_string())))
            .filter(|(_, c)| self.method(c, name).is_some())
            .collect();
        options.sort();
        let nearest = options.first()?.0;
        let tied: Vec<_> = options.iter().filter(|(d, _)| *d == nearest).collect();
        assert_eq!(
            tied.len(),
            1,
            "ambiguous lookup of {name} from {q}; the oracle covers single inheritance only"
        );
        Some(tied[0].1.clone())
    }
}

pub fn unification(model: &Model) -> BTreeSet<UnifFact> {
    let index = Index::new(model);
    let mut out = BTreeSet::new();
    for (q, (_, c)) in &index.classes {
        for t in &c.methods {
            let Some(calls) = &t.calls else { continue };
            let hooks: BTreeSet<String> = c
                .methods
                .iter()
                .filter(|h| h.name != t.name)
                .filter(|h| {
                    calls
                        .iter()
                        .any(|s| s.receiver.text() == "self" && s.method == h.name)
                })
                .filter(|h| h.is_abstract || index.overridden(q, h))
                .map(|h| format!("{q}.{}", h.name))
                .collect();
            if !hooks.is_empty() {
                out.insert((
                    q.clone(),
                    format!("{q}.{}", t.name),
                    hooks.into_iter().collect(),
                ));
            }
        }
    }
    out
}

pub fn separation(model: &Model) -> BTreeSet<SepFact> {
    let index = Index::new(model);
    let mut out = BTreeSet::new();
    for (q, (_, c)) in &index.classes {
        let mut reach = index.ancestors(q);
        reach.insert(q.clone(), 0);
        for t in &c.methods {
            let Some(calls) = &t.calls else { continue };
            let mut seen = BTreeSet::new();
            for site in calls {
                let label = site.receiver.text();
                if label == "self" {
                    continue;
                }
                let mut via: Vec<(usize, usize)> = model
                    .associations
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| a.label == label)
                    .filter_map(|(i, a)| {
                        index
                            .qualify(&a.source)
                            .and_then(|s| reach.get(&s))
                            .map(|&d| (d, i))
                    })
                    .collect();
                via.sort();
                let Some(&(_, i)) = via.first() else { continue };
                let a = &model.associations[i];
                let (Some(source), Some(target)) =
                    (index.qualify(&a.source), index.qualify(&a.target))
                else {
                    continue;
                };
                if source == target {
                    continue;
                }
                let Some(declaring) = index.nearest_declaring(&target, &site.method) else {
                    continue;
                };
                let hook = index.method(&declaring, &site.method).unwrap();
                let interface = index.classes[&declaring].1.is_interface();
                if !(hook.is_abstract || interface) {
                    continue;
                }
                let h = format!("{declaring}.{}", hook.name);
                if seen.insert(h.clone()) {
                    out.insert((
                        q.clone(),
                        format!("{q}.{}", t.name),
                        declaring.clone(),
                        h,
                        format!("{source}.{}", a.label),
                    ));
                }
            }
        }
    }
    out
}
