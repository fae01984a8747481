use std::fmt::Write;

use crate::model::{Classifier, Method, Model, Multiplicity, TagApplication};

/// Canonical text of a model: declaration order kept, two-space indentation,
/// ASCII tag brackets, fully qualified association ends.
pub fn print_model(model: &Model) -> String {
    let mut out = String::new();
    writeln!(out, "model {} {{", model.name).unwrap();
    for pkg in &model.packages {
        writeln!(out, "  package {}{} {{", pkg.name, tag_suffix(&pkg.tags)).unwrap();
        for classifier in &pkg.classifiers {
            print_classifier(&mut out, classifier);
        }
        out.push_str("  }\n");
    }
    for assoc in &model.associations {
        let mult = match assoc.multiplicity {
            Multiplicity::One => "1",
            Multiplicity::Many => "*",
        };
        writeln!(
            out,
            "  assoc {}: {} -> {} [{}]{};",
            assoc.label,
            assoc.source,
            assoc.target,
            mult,
            tag_suffix(&assoc.tags)
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

fn tag_suffix(tags: &[TagApplication]) -> String {
    tags.iter().map(|t| format!(" {t}")).collect()
}

fn print_classifier(out: &mut String, c: &Classifier) {
    let keyword = if c.is_interface() {
        "interface"
    } else {
        "class"
    };
    write!(out, "    {keyword} {}{}", c.name, tag_suffix(&c.tags)).unwrap();
    if c.is_abstract {
        out.push_str(" abstract");
    }
    if !c.extends.is_empty() {
        write!(out, " extends {}", c.extends.join(", ")).unwrap();
    }
    if !c.implements.is_empty() {
        write!(out, " implements {}", c.implements.join(", ")).unwrap();
    }
    out.push_str(" {\n");
    let mark = c.completeness;
    if mark.class_complete() {
        out.push_str("      complete class;\n");
    } else {
        if mark.attributes_complete() {
            out.push_str("      complete attributes;\n");
        }
        if mark.methods_complete() {
            out.push_str("      complete methods;\n");
        }
    }
    for a in &c.attributes {
        writeln!(
            out,
            "      {}: {}{};",
            a.name,
            a.type_name,
            tag_suffix(&a.tags)
        )
        .unwrap();
    }
    for m in &c.methods {
        print_method(out, m);
    }
    out.push_str("    }\n");
}

fn print_method(out: &mut String, m: &Method) {
    out.push_str("      ");
    if m.is_abstract {
        out.push_str("abstract ");
    }
    let params: Vec<String> = m
        .params
        .iter()
        .map(|p| format!("{}: {}", p.name, p.type_name))
        .collect();
    write!(out, "{}({})", m.name, params.join(", ")).unwrap();
    if let Some(ret) = &m.return_type {
        write!(out, ": {ret}").unwrap();
    }
    out.push_str(&tag_suffix(&m.tags));
    match &m.calls {
        None => {}
        Some(calls) if calls.is_empty() => out.push_str(" { }"),
        Some(calls) => {
            let sites: Vec<String> = calls
                .iter()
                .map(|s| format!("{}.{}()", s.receiver.text(), s.method))
                .collect();
            write!(out, " {{ calls {}; }}", sites.join(", ")).unwrap();
        }
    }
    out.push('\n');
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_model;

    #[test]
    fn untagged_models_print_without_tag_brackets() {
        let m = parse_model(
            "model M { package P { class A { x: T; f(a: T): T { calls self.g(); } g() } } assoc r: A -> A; }",
        )
        .unwrap();
        let text = print_model(&m);
        assert!(!text.contains("<<"));
        assert_eq!(parse_model(&text).unwrap(), m);
    }

    #[test]
    fn generated_tags_print_with_marker() {
        let m = parse_model("model M { package P { class A <<Unif-TH @ R !>> <<hook !>> { } } }")
            .unwrap();
        let text = print_model(&m);
        assert!(text.contains("<<Unif-TH @ R !>> <<hook !>>"), "{text}");
    }

    #[test]
    fn complete_class_subsumes_compartments() {
        let m = parse_model(
            "model M { package P { class A { complete methods; complete class; complete attributes; } } }",
        )
        .unwrap();
        let text = print_model(&m);
        assert!(text.contains("complete class;"));
        assert!(!text.contains("complete methods;"));
    }
}
