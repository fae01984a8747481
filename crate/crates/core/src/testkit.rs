//! Model generators for tests and benchmarks: seeded random models, random
//! models with a consistently planted Factory Method, and an exhaustive
//! enumeration of small class shapes.

use std::collections::BTreeSet;
use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::Model;
use crate::parser::parse_model;

/// Size limits of the random shape grammar.
#[derive(Debug, Clone, Copy)]
pub struct ShapeConfig {
    pub max_classes: usize,
    pub max_methods: usize,
    pub max_attributes: usize,
    pub max_associations: usize,
    /// Chance that an element carries at least one tag.
    pub tag_chance: f64,
}

impl Default for ShapeConfig {
    fn default() -> Self {
        ShapeConfig {
            max_classes: 5,
            max_methods: 3,
            max_attributes: 2,
            max_associations: 2,
            tag_chance: 0.35,
        }
    }
}

const METHOD_NAMES: [&str; 4] = ["run", "step", "make", "check"];
const PRIMITIVES: [&str; 2] = ["Int", "Text"];
const SCOPES: [&str; 3] = ["framework", "application", "utility"];

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random tag text for an element, never repeating a `(set, role, instance)`.
fn random_tags(rng: &mut ChaCha8Rng, chance: f64, scope_ok: bool, single_scope: bool) -> String {
    if !rng.gen_bool(chance) {
        return String::new();
    }
    const ROLE_TAGS: [&str; 14] = [
        "Unif-TH",
        "Unif-t",
        "Unif-h",
        "Sep-T",
        "Sep-t",
        "Sep-H",
        "Sep-h",
        "Comp-T",
        "FacM-Creator",
        "FacM-facM",
        "FacM-anOp",
        "FacM-Product",
        "Dec-ref",
        "Bogus-x",
    ];
    let mut seen = BTreeSet::new();
    let mut scoped = false;
    let mut out = String::new();
    for _ in 0..rng.gen_range(1..=2) {
        let (name, instance) = match rng.gen_range(0..4) {
            0 if scope_ok && !(single_scope && scoped) => {
                scoped = true;
                (SCOPES.choose(rng).unwrap().to_string(), None)
            }
            1 => (["template", "hook"].choose(rng).unwrap().to_string(), None),
            _ => {
                let instance = [None, Some("i0"), Some("i1")]
                    .choose(rng)
                    .unwrap()
                    .map(str::to_string);
                (ROLE_TAGS.choose(rng).unwrap().to_string(), instance)
            }
        };
        if !seen.insert((name.clone(), instance.clone())) {
            continue;
        }
        let generated = if rng.gen_bool(0.2) { " !" } else { "" };
        match instance {
            Some(i) => write!(out, " <<{name} @ {i}{generated}>>").unwrap(),
            None => write!(out, " <<{name}{generated}>>").unwrap(),
        }
    }
    out
}

struct ClassPlan {
    name: String,
    interface: bool,
}

/// Source text of a random, parseable model.
pub fn random_model_source(seed: u64, config: &ShapeConfig) -> String {
    let rng = &mut rng(seed);
    let chance = config.tag_chance;
    let packages = rng.gen_range(1..=2);
    let classes = rng.gen_range(1..=config.max_classes);
    let mut plans: Vec<ClassPlan> = Vec::new();
    let mut out = format!("model R{seed} {{\n");
    let labels: Vec<String> = (0..config.max_associations)
        .map(|i| format!("r{i}"))
        .collect();

    for p in 0..packages {
        let tags = random_tags(rng, chance, true, true);
        writeln!(out, "  package P{p}{tags} {{").unwrap();
        let share = if p + 1 == packages {
            classes - plans.len()
        } else {
            classes / packages
        };
        for _ in 0..share {
            let index = plans.len();
            let interface = rng.gen_bool(0.25);
            let name = format!("C{index}");
            let keyword = if interface { "interface" } else { "class" };
            let tags = random_tags(rng, chance, true, false);
            write!(out, "    {keyword} {name}{tags}").unwrap();
            let earlier_interfaces: Vec<&str> = plans
                .iter()
                .filter(|c| c.interface)
                .map(|c| c.name.as_str())
                .collect();
            let earlier_classes: Vec<&str> = plans
                .iter()
                .filter(|c| !c.interface)
                .map(|c| c.name.as_str())
                .collect();
            if interface {
                let supers: Vec<&str> = earlier_interfaces
                    .iter()
                    .copied()
                    .filter(|_| rng.gen_bool(0.4))
                    .collect();
                if !supers.is_empty() {
                    write!(out, " extends {}", supers.join(", ")).unwrap();
                }
            } else {
                if rng.gen_bool(0.3) {
                    out.push_str(" abstract");
                }
                if !earlier_classes.is_empty() && rng.gen_bool(0.5) {
                    write!(out, " extends {}", earlier_classes.choose(rng).unwrap()).unwrap();
                }
                let supers: Vec<&str> = earlier_interfaces
                    .iter()
                    .copied()
                    .filter(|_| rng.gen_bool(0.4))
                    .collect();
                if !supers.is_empty() {
                    write!(out, " implements {}", supers.join(", ")).unwrap();
                }
            }
            out.push_str(" {\n");
            for (flag, word) in [(0.15, "class"), (0.2, "attributes"), (0.3, "methods")] {
                if rng.gen_bool(flag) {
                    writeln!(out, "      complete {word};").unwrap();
                }
            }
            let mut types: Vec<String> = PRIMITIVES.iter().map(|s| s.to_string()).collect();
            types.extend(plans.iter().map(|c| c.name.clone()));
            types.push(name.clone());
            for a in 0..rng.gen_range(0..=config.max_attributes) {
                let tags = random_tags(rng, chance * 0.5, false, false);
                writeln!(out, "      a{a}: {}{tags};", types.choose(rng).unwrap()).unwrap();
            }
            let mut names = METHOD_NAMES.to_vec();
            names.shuffle(rng);
            for &m in names.iter().take(rng.gen_range(0..=config.max_methods)) {
                out.push_str("      ");
                let abstract_ = interface || rng.gen_bool(0.25);
                if abstract_ && !interface {
                    out.push_str("abstract ");
                }
                let param = match rng.gen_range(0..3) {
                    0 => "",
                    1 => "x: Int",
                    _ => "x: Text",
                };
                write!(out, "{m}({param})").unwrap();
                if rng.gen_bool(0.5) {
                    write!(out, ": {}", types.choose(rng).unwrap()).unwrap();
                }
                out.push_str(&random_tags(rng, chance, false, false));
                if !abstract_ {
                    match rng.gen_range(0..4) {
                        0 => {}
                        1 => out.push_str(" { }"),
                        _ => {
                            let sites: Vec<String> = (0..rng.gen_range(1..=2))
                                .map(|_| {
                                    let receiver = match rng.gen_range(0..4) {
                                        0 | 1 => "self".to_string(),
                                        2 => labels.choose(rng).cloned().unwrap_or("self".into()),
                                        _ => "util".to_string(),
                                    };
                                    format!("{receiver}.{}()", METHOD_NAMES.choose(rng).unwrap())
                                })
                                .collect();
                            write!(out, " {{ calls {}; }}", sites.join(", ")).unwrap();
                        }
                    }
                }
                out.push('\n');
            }
            out.push_str("    }\n");
            plans.push(ClassPlan { name, interface });
        }
        out.push_str("  }\n");
    }
    let mut used = BTreeSet::new();
    for label in labels
        .iter()
        .take(rng.gen_range(0..=config.max_associations))
    {
        let source = &plans.choose(rng).unwrap().name;
        let target = &plans.choose(rng).unwrap().name;
        if !used.insert((source.clone(), label.clone())) {
            continue;
        }
        let mult = ["", " [1]", " [*]"].choose(rng).unwrap();
        let tags = random_tags(rng, chance * 0.5, false, false);
        writeln!(out, "  assoc {label}: {source} -> {target}{mult}{tags};").unwrap();
    }
    out.push_str("}\n");
    out
}

pub fn random_model(seed: u64, config: &ShapeConfig) -> Model {
    let text = random_model_source(seed, config);
    parse_model(&text).unwrap_or_else(|e| panic!("generator produced invalid text: {e:?}\n{text}"))
}

/// `count` random models from consecutive seeds.
pub fn random_corpus(first_seed: u64, count: usize, config: &ShapeConfig) -> Vec<Model> {
    (first_seed..first_seed + count as u64)
        .map(|seed| random_model(seed, config))
        .collect()
}

/// A random untagged model annotated by applying every detected candidate in
/// turn, as instances `d0`, `d1`, ... Most of these models validate cleanly,
/// which the purely random ones rarely do.
pub fn annotated_model(seed: u64, config: &ShapeConfig) -> Model {
    use crate::detector::{apply_candidate, detect_candidates, DetectKind};
    use crate::registry::Registry;

    let untagged = ShapeConfig {
        tag_chance: 0.0,
        ..*config
    };
    let registry = Registry::builtin();
    let mut model = random_model(seed, &untagged);
    for n in 0.. {
        let candidates = detect_candidates(&model, &registry, &DetectKind::ALL);
        let Some(candidate) = candidates.first() else {
            break;
        };
        model = apply_candidate(&model, &registry, candidate, &format!("d{n}"))
            .expect("fresh candidates apply");
    }
    model
}

/// A random model of at most five classifiers with a Factory Method tagged
/// consistently: abstract creator whose template calls the abstract factory
/// method, factory method returning the product, optional concrete creator
/// and product. Other classifiers are untagged filler.
pub fn planted_facm_source(seed: u64) -> String {
    let rng = &mut rng(seed ^ 0x5eed_facc);
    let instance = if rng.gen_bool(0.5) {
        Some("Plant")
    } else {
        None
    };
    let tag = |role: &str| match instance {
        Some(i) => format!("<<FacM-{role} @ {i}>>"),
        None => format!("<<FacM-{role}>>"),
    };
    let facm = *["create", "make", "build"].choose(rng).unwrap();
    let anop = *["render", "open", "process"].choose(rng).unwrap();
    let param = if rng.gen_bool(0.5) { "k: Int" } else { "" };
    let product_interface = rng.gen_bool(0.5);
    let concrete_creator = rng.gen_bool(0.6);
    let concrete_product = rng.gen_bool(0.6);
    let filler = rng.gen_range(0..=(5 - 2 - concrete_creator as usize - concrete_product as usize));

    let mut out = format!("model Plant{seed} {{\n  package Core {{\n");
    let completeness = ["", "      complete methods;\n", "      complete class;\n"]
        .choose(rng)
        .unwrap();
    let extra_call = if rng.gen_bool(0.5) {
        ", util.log()"
    } else {
        ""
    };
    let helper = rng.gen_bool(0.5);
    write!(
        out,
        "    class Creator {} abstract {{\n{completeness}",
        tag("Creator")
    )
    .unwrap();
    if rng.gen_bool(0.5) {
        writeln!(out, "      cache: Product;").unwrap();
    }
    writeln!(
        out,
        "      abstract {facm}({param}): Product {}",
        tag("facM")
    )
    .unwrap();
    let helper_call = if helper { ", self.helper()" } else { "" };
    writeln!(
        out,
        "      {anop}() {} {{ calls self.{facm}(){helper_call}{extra_call}; }}",
        tag("anOp")
    )
    .unwrap();
    if helper {
        writeln!(out, "      helper() {{ }}").unwrap();
    }
    out.push_str("    }\n");
    if product_interface {
        writeln!(out, "    interface Product {} {{ }}", tag("Product")).unwrap();
    } else {
        writeln!(out, "    class Product {} abstract {{ }}", tag("Product")).unwrap();
    }
    out.push_str("  }\n  package Variants {\n");
    if concrete_product {
        let relation = if product_interface {
            "implements"
        } else {
            "extends"
        };
        writeln!(
            out,
            "    class ConcreteProduct {} {relation} Product {{ }}",
            tag("ConcreteProduct")
        )
        .unwrap();
    }
    if concrete_creator {
        writeln!(
            out,
            "    class ConcreteCreator {} extends Creator {{\n      {facm}({param}): Product {} {{ }}\n    }}",
            tag("ConcreteCreator"),
            tag("facM")
        )
        .unwrap();
    }
    for i in 0..filler {
        let parent = match rng.gen_range(0..3) {
            0 => " extends Creator",
            1 if !product_interface => " extends Product",
            _ => "",
        };
        let body = if rng.gen_bool(0.5) {
            "{ calls self.step(); }"
        } else {
            "{ }"
        };
        writeln!(
            out,
            "    class Extra{i}{parent} {{\n      step() {body}\n    }}"
        )
        .unwrap();
    }
    out.push_str("  }\n}\n");
    out
}

pub fn planted_facm(seed: u64) -> Model {
    let text = planted_facm_source(seed);
    parse_model(&text).unwrap_or_else(|e| panic!("planted model does not parse: {e:?}\n{text}"))
}

/// Exhaustive enumeration of small untagged shapes.
///
/// A shape has one to four classifiers `C0..C3` in one package. Each picks a
/// body from [`PROFILES`] and optionally inherits from the classifier just
/// before it (`extends` or `implements` as the kinds require; an interface
/// cannot inherit from a class). Profiles call through association labels
/// `r` and `s`; for each label some profile uses, the shape either has no
/// association of that label or one from any classifier to any classifier.
/// `r` has multiplicity 1 and `s` multiplicity many, so a shape has at most
/// two associations.
pub mod exhaustive {
    use super::*;
    use crate::model::{
        Association, CallSite, Classifier, ClassifierKind, Method, Multiplicity, Package, Receiver,
    };

    /// A method of a profile; `calls` is `None` for an unknown body.
    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub struct MethodSpec {
        pub name: &'static str,
        pub is_abstract: bool,
        /// `(receiver, method)` pairs.
        pub calls: Option<&'static [(&'static str, &'static str)]>,
    }

    const fn concrete(
        name: &'static str,
        calls: &'static [(&'static str, &'static str)],
    ) -> MethodSpec {
        MethodSpec {
            name,
            is_abstract: false,
            calls: Some(calls),
        }
    }

    const fn abstract_(name: &'static str) -> MethodSpec {
        MethodSpec {
            name,
            is_abstract: true,
            calls: None,
        }
    }

    /// Body of a classifier in the exhaustive grammar.
    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub struct Profile {
        pub name: &'static str,
        pub interface: bool,
        pub is_abstract: bool,
        pub methods: &'static [MethodSpec],
    }

    pub const PROFILES: [Profile; 6] = [
        Profile {
            name: "unif-abstract",
            interface: false,
            is_abstract: true,
            methods: &[concrete("t", &[("self", "h")]), abstract_("h")],
        },
        Profile {
            name: "unif-concrete",
            interface: false,
            is_abstract: false,
            methods: &[concrete("t", &[("self", "h")]), concrete("h", &[])],
        },
        Profile {
            name: "hook-impl",
            interface: false,
            is_abstract: false,
            methods: &[concrete("h", &[])],
        },
        Profile {
            name: "sep-template",
            interface: false,
            is_abstract: false,
            methods: &[concrete("t", &[("r", "h"), ("self", "t")])],
        },
        Profile {
            name: "hook-interface",
            interface: true,
            is_abstract: true,
            methods: &[abstract_("h")],
        },
        Profile {
            name: "mixed",
            interface: false,
            is_abstract: true,
            methods: &[
                abstract_("h"),
                concrete("k", &[("s", "h"), ("self", "h")]),
                concrete("t", &[]),
            ],
        },
    ];

    fn uses(profile: &Profile, label: &str) -> bool {
        profile.methods.iter().any(|m| {
            m.calls
                .unwrap_or(&[])
                .iter()
                .any(|&(receiver, _)| receiver == label)
        })
    }

    #[derive(Debug, Clone, PartialEq, Eq)]
    pub struct Shape {
        /// Profile index and whether the classifier inherits from the previous one.
        pub classes: Vec<(usize, bool)>,
        /// `(source, target)` of the `r` association, if any.
        pub r: Option<(usize, usize)>,
        /// `(source, target)` of the `s` association, if any.
        pub s: Option<(usize, usize)>,
    }

    impl Shape {
        fn profile(&self, i: usize) -> &'static Profile {
            &PROFILES[self.classes[i].0]
        }

        /// `extends` or `implements` for classifier `i`, if it inherits.
        fn relation(&self, i: usize) -> Option<&'static str> {
            let (p, inherits) = self.classes[i];
            if !inherits {
                return None;
            }
            let parent_is_interface = self.profile(i - 1).interface;
            Some(if PROFILES[p].interface || !parent_is_interface {
                "extends"
            } else {
                "implements"
            })
        }

        fn associations(&self) -> impl Iterator<Item = (&'static str, usize, usize, Multiplicity)> {
            let r = self.r.map(|(a, b)| ("r", a, b, Multiplicity::One));
            let s = self.s.map(|(a, b)| ("s", a, b, Multiplicity::Many));
            r.into_iter().chain(s)
        }

        pub fn source(&self) -> String {
            let mut out = String::from("model Shape {\n  package P {\n");
            for i in 0..self.classes.len() {
                let profile = self.profile(i);
                let keyword = if profile.interface {
                    "interface"
                } else {
                    "class"
                };
                write!(out, "    {keyword} C{i}").unwrap();
                if profile.is_abstract && !profile.interface {
                    out.push_str(" abstract");
                }
                if let Some(relation) = self.relation(i) {
                    write!(out, " {relation} C{}", i - 1).unwrap();
                }
                out.push_str(" {\n");
                for m in profile.methods {
                    out.push_str("      ");
                    if m.is_abstract && !profile.interface {
                        out.push_str("abstract ");
                    }
                    write!(out, "{}()", m.name).unwrap();
                    match m.calls {
                        None => {}
                        Some([]) => out.push_str(" { }"),
                        Some(calls) => {
                            let sites: Vec<String> =
                                calls.iter().map(|(r, m)| format!("{r}.{m}()")).collect();
                            write!(out, " {{ calls {}; }}", sites.join(", ")).unwrap();
                        }
                    }
                    out.push('\n');
                }
                out.push_str("    }\n");
            }
            out.push_str("  }\n");
            for (label, a, b, multiplicity) in self.associations() {
                let mult = if multiplicity == Multiplicity::One {
                    "1"
                } else {
                    "*"
                };
                writeln!(out, "  assoc {label}: C{a} -> C{b} [{mult}];").unwrap();
            }
            out.push_str("}\n");
            out
        }

        /// The model [`source`](Self::source) parses to, built directly.
        pub fn model(&self) -> Model {
            let mut classifiers = Vec::new();
            for i in 0..self.classes.len() {
                let profile = self.profile(i);
                let kind = if profile.interface {
                    ClassifierKind::Interface
                } else {
                    ClassifierKind::Class
                };
                let mut c = Classifier::new(format!("C{i}"), kind);
                c.is_abstract = profile.is_abstract && !profile.interface;
                match self.relation(i) {
                    Some("extends") => c.extends.push(format!("C{}", i - 1)),
                    Some(_) => c.implements.push(format!("C{}", i - 1)),
                    None => {}
                }
                for spec in profile.methods {
                    let mut m = Method::new(spec.name);
                    m.is_abstract = spec.is_abstract;
                    m.calls = spec.calls.map(|calls| {
                        calls
                            .iter()
                            .map(|&(receiver, method)| CallSite {
                                receiver: self.receiver(i, receiver),
                                method: method.to_string(),
                            })
                            .collect()
                    });
                    c.methods.push(m);
                }
                classifiers.push(c);
            }
            Model {
                name: "Shape".into(),
                packages: vec![Package {
                    name: "P".into(),
                    tags: Vec::new(),
                    classifiers,
                }],
                associations: self
                    .associations()
                    .map(|(label, a, b, multiplicity)| Association {
                        label: label.into(),
                        source: format!("P.C{a}"),
                        target: format!("P.C{b}"),
                        multiplicity,
                        tags: Vec::new(),
                    })
                    .collect(),
            }
        }

        /// A label is an association receiver when classifier `i` or one of
        /// its ancestors is the source of an association with that label.
        fn receiver(&self, i: usize, text: &str) -> Receiver {
            if text == "self" {
                return Receiver::SelfRef;
            }
            let mut lineage = vec![i];
            let mut k = i;
            while self.classes[k].1 {
                k -= 1;
                lineage.push(k);
            }
            let visible = self
                .associations()
                .any(|(label, source, _, _)| label == text && lineage.contains(&source));
            if visible {
                Receiver::Association(text.into())
            } else {
                Receiver::External(text.into())
            }
        }
    }

    fn class_lists(n: usize) -> Vec<Vec<(usize, bool)>> {
        let mut lists: Vec<Vec<(usize, bool)>> = vec![Vec::new()];
        for i in 0..n {
            let mut next = Vec::new();
            for list in &lists {
                for (p, profile) in PROFILES.iter().enumerate() {
                    for inherits in [false, true] {
                        if inherits && i == 0 {
                            continue;
                        }
                        if inherits && profile.interface && !PROFILES[list[i - 1].0].interface {
                            continue;
                        }
                        let mut l = list.clone();
                        l.push((p, inherits));
                        next.push(l);
                    }
                }
            }
            lists = next;
        }
        lists
    }

    /// Every shape, smallest first, in a fixed order.
    pub fn shapes() -> impl Iterator<Item = Shape> {
        (1..=4).flat_map(|n| {
            let ends: Vec<Option<(usize, usize)>> = std::iter::once(None)
                .chain((0..n).flat_map(move |a| (0..n).map(move |b| Some((a, b)))))
                .collect();
            class_lists(n).into_iter().flat_map(move |classes| {
                let options = |label: &str| {
                    if classes.iter().any(|&(p, _)| uses(&PROFILES[p], label)) {
                        ends.clone()
                    } else {
                        vec![None]
                    }
                };
                let (r_options, s_options) = (options("r"), options("s"));
                r_options.into_iter().flat_map(move |r| {
                    let classes = classes.clone();
                    s_options.clone().into_iter().map(move |s| Shape {
                        classes: classes.clone(),
                        r,
                        s,
                    })
                })
            })
        })
    }
}

/// Targets of the markdown links `[text](target)` in `text`.
pub fn link_targets(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(start) = rest.find("](") {
        let after = &rest[start + 2..];
        let Some(end) = after.find(')') else { break };
        out.push(after[..end].to_string());
        rest = &after[end..];
    }
    out
}

/// Links that point inside the bundle but name no file of it, or name a
/// `#fragment` with no matching heading.
pub fn dangling_links(bundle: &crate::docgen::DocBundle) -> Vec<String> {
    let files: std::collections::BTreeMap<&str, &str> = bundle.files().collect();
    let mut out = Vec::new();
    for (file, text) in &files {
        for target in link_targets(text) {
            if target.starts_with("http://") || target.starts_with("https://") {
                continue;
            }
            let (path, fragment) = match target.split_once('#') {
                Some((p, f)) => (p, Some(f)),
                None => (target.as_str(), None),
            };
            let page = if path.is_empty() {
                Some(*text)
            } else {
                files.get(path).copied()
            };
            let ok = match (page, fragment) {
                (None, _) => false,
                (Some(_), None) => true,
                (Some(page), Some(f)) => page
                    .lines()
                    .filter(|l| l.starts_with('#'))
                    .any(|l| slug(l.trim_start_matches('#').trim()) == f),
            };
            if !ok {
                out.push(format!("{file}: {target}"));
            }
        }
    }
    out
}

fn slug(heading: &str) -> String {
    heading
        .to_lowercase()
        .chars()
        .filter_map(|c| match c {
            ' ' => Some('-'),
            c if c.is_alphanumeric() || c == '-' || c == '_' => Some(c),
            _ => None,
        })
        .collect()
}
