//! The `.umlf` text format.
//!
//! ```text
//! model      := "model" IDENT "{" package* assoc* "}"
//! package    := "package" IDENT tags? "{" classifier* "}"
//! classifier := ("class" | "interface") IDENT tags? "abstract"?
//!               ("extends" IDENT ("," IDENT)*)? ("implements" IDENT ("," IDENT)*)?
//!               "{" complet* attribute* method* "}"
//! complet    := "complete" ("class" | "attributes" | "methods") ";"
//! attribute  := IDENT ":" IDENT tags? ";"
//! method     := "abstract"? IDENT "(" params? ")" (":" IDENT)? tags? body?
//! body       := "{" ("calls" callsite ("," callsite)* ";")? "}"
//! callsite   := ("self" | IDENT) "." IDENT "(" ")"
//! assoc      := "assoc" IDENT ":" QNAME "->" QNAME ("[" ("1"|"*") "]")? tags? ";"
//! tags       := ("<<" TAG ">>")+        TAG := IDENT ("-" IDENT)? ("@" IDENT)?
//! ```
//!
//! Guillemets are accepted in place of `<<`/`>>`. A trailing `!` inside a
//! tag marks it as generated (expanded or detected). Role names may contain
//! further dashes (`FacM-facM-impl`). Methods of interfaces are abstract
//! whether or not the keyword is written.

mod lexer;
mod printer;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::model::{
    scope_tags, Association, Attribute, CallSite, Classifier, ClassifierId, ClassifierKind,
    CompletenessMark, Method, Model, Multiplicity, Package, Param, Receiver, TagApplication,
    TagOrigin,
};
use lexer::{tokenize, Pos, Tok, Token};

pub use printer::print_model;

/// Words that cannot be used as identifiers.
pub const KEYWORDS: &[&str] = &[
    "model",
    "package",
    "class",
    "interface",
    "abstract",
    "extends",
    "implements",
    "complete",
    "calls",
    "self",
    "assoc",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    /// 1-based.
    pub line: usize,
    /// 1-based, in characters.
    pub column: usize,
    pub message: String,
    /// The offending source line.
    pub snippet: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl ParseError {
    fn at(lines: &[&str], line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
            snippet: lines
                .get(line - 1)
                .map(|s| s.to_string())
                .unwrap_or_default(),
        }
    }
}

/// Parses one model. On failure, returns at least one error and no model.
pub fn parse_model(text: &str) -> Result<Model, Vec<ParseError>> {
    let lines: Vec<&str> = text.split('\n').collect();
    let tokens = tokenize(text, &lines).map_err(|e| vec![e])?;
    let mut parser = Parser {
        tokens,
        cursor: 0,
        lines: &lines,
        errors: Vec::new(),
        positions: Positions::default(),
    };
    let model = parser.model().map_err(|e| vec![e])?;
    parser.check(model)
}

#[derive(Default)]
struct Positions {
    packages: Vec<Pos>,
    classifiers: HashMap<ClassifierId, Pos>,
    /// (classifier, supertype name, position, written after `extends`)
    supertypes: Vec<(ClassifierId, String, Pos, bool)>,
    associations: Vec<(Pos, Pos, Pos)>,
}

struct Parser<'a> {
    tokens: Vec<Token>,
    cursor: usize,
    lines: &'a [&'a str],
    errors: Vec<ParseError>,
    positions: Positions,
}

type PResult<T> = Result<T, ParseError>;

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.cursor].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.cursor + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn pos(&self) -> Pos {
        self.tokens[self.cursor].pos
    }

    fn bump(&mut self) -> Token {
        let token = self.tokens[self.cursor].clone();
        if self.cursor + 1 < self.tokens.len() {
            self.cursor += 1;
        }
        token
    }

    fn error_at(&self, pos: Pos, message: impl Into<String>) -> ParseError {
        ParseError::at(self.lines, pos.line, pos.column, message)
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        self.error_at(
            self.pos(),
            format!("expected {expected}, found {}", self.peek().describe()),
        )
    }

    fn expect(&mut self, tok: Tok) -> PResult<Pos> {
        if *self.peek() == tok {
            Ok(self.bump().pos)
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<Pos> {
        if self.at_keyword(kw) {
            Ok(self.bump().pos)
        } else {
            Err(self.unexpected(&format!("'{kw}'")))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Pos)> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let pos = self.bump().pos;
                Ok((s, pos))
            }
            Tok::Ident(s) => {
                Err(self.error_at(self.pos(), format!("expected {what}, found keyword '{s}'")))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn model(&mut self) -> PResult<Model> {
        self.expect_keyword("model")?;
        let (name, _) = self.ident("model name")?;
        self.expect(Tok::LBrace)?;
        let mut packages = Vec::new();
        while self.at_keyword("package") {
            packages.push(self.package(packages.len())?);
        }
        let mut associations = Vec::new();
        while self.at_keyword("assoc") {
            associations.push(self.association()?);
        }
        if *self.peek() != Tok::RBrace {
            return Err(self.unexpected("'package', 'assoc' or '}'"));
        }
        self.bump();
        if *self.peek() != Tok::Eof {
            return Err(self.unexpected("end of input"));
        }
        Ok(Model {
            name,
            packages,
            associations,
        })
    }

    fn package(&mut self, index: usize) -> PResult<Package> {
        self.expect_keyword("package")?;
        let (name, pos) = self.ident("package name")?;
        self.positions.packages.push(pos);
        let tags = self.tags_opt()?;
        if scope_tags(&tags).len() > 1 {
            self.errors.push(self.error_at(
                pos,
                format!("package '{name}' carries more than one scope tag"),
            ));
        }
        self.expect(Tok::LBrace)?;
        let mut classifiers = Vec::new();
        while self.at_keyword("class") || self.at_keyword("interface") {
            let id = ClassifierId {
                package: index,
                index: classifiers.len(),
            };
            classifiers.push(self.classifier(id)?);
        }
        if *self.peek() != Tok::RBrace {
            return Err(self.unexpected("'class', 'interface' or '}'"));
        }
        self.bump();
        Ok(Package {
            name,
            tags,
            classifiers,
        })
    }

    fn classifier(&mut self, id: ClassifierId) -> PResult<Classifier> {
        let kind = if self.eat_keyword("class") {
            ClassifierKind::Class
        } else {
            self.expect_keyword("interface")?;
            ClassifierKind::Interface
        };
        let (name, pos) = self.ident("classifier name")?;
        self.positions.classifiers.insert(id, pos);
        let mut classifier = Classifier::new(name, kind);
        classifier.tags = self.tags_opt()?;
        classifier.is_abstract = self.eat_keyword("abstract");
        if self.eat_keyword("extends") {
            classifier.extends = self.supertype_list(id, true)?;
        }
        if self.eat_keyword("implements") {
            classifier.implements = self.supertype_list(id, false)?;
        }
        self.expect(Tok::LBrace)?;

        let (mut class, mut attrs, mut methods) = (false, false, false);
        while self.at_keyword("complete") {
            self.bump();
            match self.peek().clone() {
                Tok::Ident(s) if s == "class" => class = true,
                Tok::Ident(s) if s == "attributes" => attrs = true,
                Tok::Ident(s) if s == "methods" => methods = true,
                _ => return Err(self.unexpected("'class', 'attributes' or 'methods'")),
            }
            self.bump();
            self.expect(Tok::Semi)?;
        }
        classifier.completeness = CompletenessMark::new(class, attrs, methods);

        let mut members: HashSet<String> = HashSet::new();
        loop {
            match (self.peek(), self.peek_at(1)) {
                (Tok::RBrace, _) => {
                    self.bump();
                    break;
                }
                (Tok::Ident(_), Tok::Colon) => {
                    if !classifier.methods.is_empty() {
                        return Err(
                            self.error_at(self.pos(), "attributes must be declared before methods")
                        );
                    }
                    let (attr, pos) = self.attribute()?;
                    if !members.insert(attr.name.clone()) {
                        self.errors.push(self.error_at(
                            pos,
                            format!("duplicate member '{}' in '{}'", attr.name, classifier.name),
                        ));
                    }
                    classifier.attributes.push(attr);
                }
                (Tok::Ident(s), _) if s == "complete" => {
                    return Err(self.error_at(
                        self.pos(),
                        "completeness marks must come first in a classifier body",
                    ));
                }
                (Tok::Ident(_), _) => {
                    let (method, pos) = self.method(classifier.is_interface())?;
                    if !members.insert(method.name.clone()) {
                        self.errors.push(self.error_at(
                            pos,
                            format!(
                                "duplicate member '{}' in '{}'",
                                method.name, classifier.name
                            ),
                        ));
                    }
                    classifier.methods.push(method);
                }
                _ => return Err(self.unexpected("attribute, method or '}'")),
            }
        }
        Ok(classifier)
    }

    fn supertype_list(&mut self, id: ClassifierId, extends: bool) -> PResult<Vec<String>> {
        let mut names = Vec::new();
        loop {
            let (name, pos) = self.ident("supertype name")?;
            self.positions
                .supertypes
                .push((id, name.clone(), pos, extends));
            names.push(name);
            if *self.peek() != Tok::Comma {
                return Ok(names);
            }
            self.bump();
        }
    }

    fn attribute(&mut self) -> PResult<(Attribute, Pos)> {
        let (name, pos) = self.ident("attribute name")?;
        self.expect(Tok::Colon)?;
        let (type_name, _) = self.ident("type name")?;
        let tags = self.tags_opt()?;
        self.expect(Tok::Semi)?;
        Ok((
            Attribute {
                name,
                type_name,
                tags,
            },
            pos,
        ))
    }

    fn method(&mut self, in_interface: bool) -> PResult<(Method, Pos)> {
        let written_abstract = self.eat_keyword("abstract");
        let (name, pos) = self.ident("method name")?;
        let mut method = Method::new(name);
        method.is_abstract = written_abstract || in_interface;
        self.expect(Tok::LParen)?;
        if *self.peek() != Tok::RParen {
            loop {
                let (pname, _) = self.ident("parameter name")?;
                self.expect(Tok::Colon)?;
                let (type_name, _) = self.ident("parameter type")?;
                method.params.push(Param {
                    name: pname,
                    type_name,
                });
                if *self.peek() != Tok::Comma {
                    break;
                }
                self.bump();
            }
        }
        self.expect(Tok::RParen)?;
        if *self.peek() == Tok::Colon {
            self.bump();
            method.return_type = Some(self.ident("return type")?.0);
        }
        method.tags = self.tags_opt()?;
        match self.peek() {
            Tok::LBrace => {
                let body_pos = self.bump().pos;
                let mut calls = Vec::new();
                if self.eat_keyword("calls") {
                    loop {
                        calls.push(self.call_site()?);
                        if *self.peek() != Tok::Comma {
                            break;
                        }
                        self.bump();
                    }
                    self.expect(Tok::Semi)?;
                }
                self.expect(Tok::RBrace)?;
                if method.is_abstract {
                    let why = if in_interface {
                        "interface methods cannot have a body"
                    } else {
                        "abstract methods cannot have a body"
                    };
                    self.errors.push(self.error_at(body_pos, why));
                }
                method.calls = Some(calls);
            }
            Tok::Semi => {
                self.bump();
            }
            _ => {}
        }
        Ok((method, pos))
    }

    fn call_site(&mut self) -> PResult<CallSite> {
        let receiver = if self.eat_keyword("self") {
            Receiver::SelfRef
        } else {
            // Classified as association or external once all associations are known.
            Receiver::External(self.ident("call receiver")?.0)
        };
        self.expect(Tok::Dot)?;
        let (method, _) = self.ident("method name")?;
        self.expect(Tok::LParen)?;
        self.expect(Tok::RParen)?;
        Ok(CallSite { receiver, method })
    }

    fn qname(&mut self) -> PResult<(String, Pos)> {
        let (mut name, pos) = self.ident("classifier name")?;
        while *self.peek() == Tok::Dot {
            self.bump();
            name.push('.');
            name.push_str(&self.ident("name")?.0);
        }
        Ok((name, pos))
    }

    fn association(&mut self) -> PResult<Association> {
        self.expect_keyword("assoc")?;
        let (label, label_pos) = self.ident("association label")?;
        self.expect(Tok::Colon)?;
        let (source, source_pos) = self.qname()?;
        self.expect(Tok::Arrow)?;
        let (target, target_pos) = self.qname()?;
        let mut multiplicity = Multiplicity::One;
        if *self.peek() == Tok::LBracket {
            self.bump();
            multiplicity = match self.peek() {
                Tok::Number(n) if n == "1" => Multiplicity::One,
                Tok::Star => Multiplicity::Many,
                _ => return Err(self.unexpected("'1' or '*'")),
            };
            self.bump();
            self.expect(Tok::RBracket)?;
        }
        let tags = self.tags_opt()?;
        self.expect(Tok::Semi)?;
        self.positions
            .associations
            .push((label_pos, source_pos, target_pos));
        Ok(Association {
            label,
            source,
            target,
            multiplicity,
            tags,
        })
    }

    fn tags_opt(&mut self) -> PResult<Vec<TagApplication>> {
        let mut tags: Vec<TagApplication> = Vec::new();
        while *self.peek() == Tok::TagOpen {
            let pos = self.bump().pos;
            let tag = self.tag_body()?;
            self.expect(Tok::TagClose)?;
            if tags.iter().any(|t| t.same_triple(&tag)) {
                self.errors
                    .push(self.error_at(pos, format!("duplicate tag {tag}")));
            } else {
                tags.push(tag);
            }
        }
        Ok(tags)
    }

    fn tag_body(&mut self) -> PResult<TagApplication> {
        let (set, _) = self.ident("tag name")?;
        let mut tag = TagApplication::unary(set);
        if *self.peek() == Tok::Dash {
            let mut role = String::new();
            while *self.peek() == Tok::Dash {
                self.bump();
                if !role.is_empty() {
                    role.push('-');
                }
                role.push_str(&self.ident("role name")?.0);
            }
            tag.role = Some(role);
        }
        if *self.peek() == Tok::At {
            self.bump();
            tag.instance = Some(self.ident("instance name")?.0);
        }
        if *self.peek() == Tok::Bang {
            self.bump();
            tag.origin = TagOrigin::Expanded;
        }
        Ok(tag)
    }

    /// Reference resolution and structural invariants.
    fn check(mut self, mut model: Model) -> Result<Model, Vec<ParseError>> {
        let mut package_names = HashSet::new();
        for (p, pkg) in model.packages.iter().enumerate() {
            if !package_names.insert(pkg.name.clone()) {
                let pos = self.positions.packages[p];
                self.errors
                    .push(self.error_at(pos, format!("duplicate package '{}'", pkg.name)));
            }
        }
        let mut classifier_names: HashMap<String, ClassifierId> = HashMap::new();
        for c in model.classifier_ids() {
            let name = &model.classifier(c).name;
            if classifier_names.contains_key(name) {
                let pos = self.positions.classifiers[&c];
                self.errors
                    .push(self.error_at(pos, format!("duplicate classifier name '{name}'")));
            } else {
                classifier_names.insert(name.clone(), c);
            }
        }

        self.check_supertypes(&model);
        self.check_cycles(&model);
        self.check_associations(&mut model);

        // Call receivers: association labels visible from the enclosing classifier.
        let ids: Vec<ClassifierId> = model.classifier_ids().collect();
        for c in ids {
            for mi in 0..model.classifier(c).methods.len() {
                let Some(calls) = model.classifier(c).methods[mi].calls.clone() else {
                    continue;
                };
                let resolved: Vec<CallSite> = calls
                    .into_iter()
                    .map(|site| match site.receiver {
                        Receiver::External(name) | Receiver::Association(name) => {
                            let receiver = if model.find_association(c, &name).is_some() {
                                Receiver::Association(name)
                            } else {
                                Receiver::External(name)
                            };
                            CallSite { receiver, ..site }
                        }
                        Receiver::SelfRef => site,
                    })
                    .collect();
                model.classifier_mut(c).methods[mi].calls = Some(resolved);
            }
        }

        if self.errors.is_empty() {
            Ok(model)
        } else {
            self.errors.sort_by_key(|e| (e.line, e.column));
            Err(self.errors)
        }
    }

    fn check_supertypes(&mut self, model: &Model) {
        let refs = std::mem::take(&mut self.positions.supertypes);
        let mut class_extends: BTreeMap<ClassifierId, usize> = BTreeMap::new();
        for (c, name, pos, extends) in &refs {
            let owner = model.classifier(*c);
            let target = model.find_classifier(name).map(|t| model.classifier(t));
            let msg = match (owner.kind, *extends, target.map(|t| t.kind)) {
                (ClassifierKind::Class, true, Some(ClassifierKind::Interface)) => Some(format!(
                    "class '{}' cannot extend interface '{name}'; use implements",
                    owner.name
                )),
                (ClassifierKind::Class, false, Some(ClassifierKind::Class)) => Some(format!(
                    "class '{}' cannot implement class '{name}'; use extends",
                    owner.name
                )),
                (ClassifierKind::Interface, false, _) => Some(format!(
                    "interface '{}' cannot implement '{name}'; interfaces extend interfaces",
                    owner.name
                )),
                (ClassifierKind::Interface, true, Some(ClassifierKind::Class)) => Some(format!(
                    "interface '{}' cannot extend class '{name}'",
                    owner.name
                )),
                _ => None,
            };
            if let Some(msg) = msg {
                self.errors.push(self.error_at(*pos, msg));
            }
            if owner.kind == ClassifierKind::Class && *extends {
                let n = class_extends.entry(*c).or_default();
                *n += 1;
                if *n == 2 {
                    self.errors.push(self.error_at(
                        *pos,
                        format!("class '{}' extends more than one class", owner.name),
                    ));
                }
            }
        }
        let mut seen = HashSet::new();
        for (c, name, pos, _) in &refs {
            if !seen.insert((*c, name.clone())) {
                self.errors.push(self.error_at(
                    *pos,
                    format!(
                        "'{}' lists supertype '{name}' twice",
                        model.classifier(*c).name
                    ),
                ));
            }
        }
    }

    fn check_cycles(&mut self, model: &Model) {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        let ids: Vec<ClassifierId> = model.classifier_ids().collect();
        let mut marks: HashMap<ClassifierId, Mark> = ids.iter().map(|&c| (c, Mark::New)).collect();
        let mut reported: HashSet<ClassifierId> = HashSet::new();

        fn visit(
            model: &Model,
            c: ClassifierId,
            marks: &mut HashMap<ClassifierId, Mark>,
            stack: &mut Vec<ClassifierId>,
            cycles: &mut Vec<Vec<ClassifierId>>,
        ) {
            marks.insert(c, Mark::Active);
            stack.push(c);
            for sup in model.direct_supertypes(c) {
                match marks[&sup] {
                    Mark::New => visit(model, sup, marks, stack, cycles),
                    Mark::Active => {
                        let start = stack.iter().position(|&x| x == sup).unwrap();
                        cycles.push(stack[start..].to_vec());
                    }
                    Mark::Done => {}
                }
            }
            stack.pop();
            marks.insert(c, Mark::Done);
        }

        let mut cycles = Vec::new();
        for &c in &ids {
            if marks[&c] == Mark::New {
                visit(model, c, &mut marks, &mut Vec::new(), &mut cycles);
            }
        }
        for cycle in cycles {
            let first = *cycle.iter().min().unwrap();
            if !reported.insert(first) {
                continue;
            }
            let mut names: Vec<&str> = cycle
                .iter()
                .map(|&c| model.classifier(c).name.as_str())
                .collect();
            names.push(names[0]);
            let pos = self.positions.classifiers[&cycle[0]];
            self.errors
                .push(self.error_at(pos, format!("cyclic inheritance: {}", names.join(" -> "))));
        }
    }

    fn check_associations(&mut self, model: &mut Model) {
        let positions = std::mem::take(&mut self.positions.associations);
        let mut labels: HashSet<(ClassifierId, String)> = HashSet::new();
        for (i, &(label_pos, source_pos, target_pos)) in positions.iter().enumerate() {
            let source = model.find_classifier(&model.associations[i].source);
            let target = model.find_classifier(&model.associations[i].target);
            let label = model.associations[i].label.clone();
            match source {
                Some(c) => {
                    model.associations[i].source = model.classifier_qname(c);
                    let owner = model.classifier(c);
                    let clashes = owner.attributes.iter().any(|a| a.name == label)
                        || owner.methods.iter().any(|m| m.name == label);
                    if !labels.insert((c, label.clone())) {
                        self.errors.push(self.error_at(
                            label_pos,
                            format!("duplicate association label '{label}' on '{}'", owner.name),
                        ));
                    } else if clashes {
                        self.errors.push(self.error_at(
                            label_pos,
                            format!(
                                "association label '{label}' clashes with a member of '{}'",
                                owner.name
                            ),
                        ));
                    }
                }
                None => self.errors.push(self.error_at(
                    source_pos,
                    format!(
                        "unknown association source '{}'",
                        model.associations[i].source
                    ),
                )),
            }
            match target {
                Some(c) => model.associations[i].target = model.classifier_qname(c),
                None => self.errors.push(self.error_at(
                    target_pos,
                    format!(
                        "unknown association target '{}'",
                        model.associations[i].target
                    ),
                )),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const CURRENCY: &str = r#"model Converters {
  package Money <<framework>> {
    class CurrencyConverter <<Unif-TH @ Rounding>> {
      complete methods;
      convert(amount: Money): Money <<Unif-t @ Rounding>> { calls self.round(); }
      round(value: Money): Money <<Unif-h @ Rounding>> { }
    }
  }
}
"#;

    fn errors(text: &str) -> Vec<ParseError> {
        parse_model(text).expect_err("expected a parse error")
    }

    #[test]
    fn currency_fixture_parses() {
        let m = parse_model(CURRENCY).unwrap();
        assert_eq!(m.name, "Converters");
        assert_eq!(m.packages.len(), 1);
        let pkg = &m.packages[0];
        assert_eq!(pkg.tags, vec![TagApplication::unary("framework")]);
        assert_eq!(pkg.classifiers.len(), 1);
        let cc = &pkg.classifiers[0];
        assert!(cc.completeness.methods_complete());
        assert!(!cc.completeness.attributes_complete());
        assert_eq!(
            cc.methods[0].tags,
            vec![TagApplication::role("Unif", "t").with_instance(Some("Rounding"))]
        );
        assert_eq!(
            cc.methods[1].tags,
            vec![TagApplication::role("Unif", "h").with_instance(Some("Rounding"))]
        );
        assert_eq!(
            cc.methods[0].calls,
            Some(vec![CallSite {
                receiver: Receiver::SelfRef,
                method: "round".into()
            }])
        );
        assert_eq!(cc.methods[1].calls, Some(vec![]));
    }

    #[test]
    fn empty_input_expects_model() {
        let e = errors("");
        assert_eq!(e.len(), 1);
        assert_eq!((e[0].line, e[0].column), (1, 1));
        assert!(
            e[0].message.contains("expected 'model'"),
            "{}",
            e[0].message
        );
    }

    #[test]
    fn self_extension_names_the_cycle() {
        let e = errors("model M { package P { class A extends A { } } }");
        assert!(
            e.iter().any(|e| e.message == "cyclic inheritance: A -> A"),
            "{e:?}"
        );
    }

    #[test]
    fn longer_cycles_are_reported_once() {
        let e = errors(
            "model M { package P { class A extends B { } class B extends C { } class C extends A { } } }",
        );
        let cycles: Vec<_> = e
            .iter()
            .filter(|e| e.message.starts_with("cyclic"))
            .collect();
        assert_eq!(cycles.len(), 1, "{e:?}");
        assert!(cycles[0].message.contains("A -> B -> C -> A"));
    }

    #[test]
    fn guillemets_and_en_dash_are_accepted() {
        let m =
            parse_model("model M { package P «framework» { class C «FacM–Creator @ x !» { } } }")
                .unwrap();
        let tag = &m.packages[0].classifiers[0].tags[0];
        assert_eq!(tag.set, "FacM");
        assert_eq!(tag.role.as_deref(), Some("Creator"));
        assert_eq!(tag.instance.as_deref(), Some("x"));
        assert_eq!(tag.origin, TagOrigin::Expanded);
    }

    #[test]
    fn multi_dash_roles() {
        let m =
            parse_model("model M { package P { class C { f() <<FacM-facM-impl>> } } }").unwrap();
        let tag = &m.packages[0].classifiers[0].methods[0].tags[0];
        assert_eq!(tag.role.as_deref(), Some("facM-impl"));
    }

    #[test]
    fn structural_violations() {
        let cases = [
            (
                "model M { package P { class A { } class A { } } }",
                "duplicate classifier",
            ),
            (
                "model M { package P { class A { x: T; x(): T } } }",
                "duplicate member",
            ),
            (
                "model M { package P { class A { f() f() } } }",
                "duplicate member",
            ),
            (
                "model M { package P <<framework>> <<utility>> { } }",
                "more than one scope tag",
            ),
            (
                "model M { package P { class A { f() <<hook>> <<hook>> } } }",
                "duplicate tag",
            ),
            (
                "model M { package P { interface I { f() { } } } }",
                "interface methods cannot",
            ),
            (
                "model M { package P { class A { abstract f() { } } } }",
                "abstract methods cannot",
            ),
            (
                "model M { package P { interface I { } class A extends I { } } }",
                "use implements",
            ),
            (
                "model M { package P { class B { } class A implements B { } } }",
                "use extends",
            ),
            (
                "model M { package P { class B { } class C { } class A extends B, C { } } }",
                "more than one class",
            ),
            (
                "model M { package P { class A { } } assoc r: P.A -> P.Z; }",
                "unknown association target",
            ),
            (
                "model M { package P { class A { } } assoc r: A -> A; assoc r: A -> A; }",
                "duplicate association label",
            ),
            (
                "model M { package P { class A { r: T; } } assoc r: A -> A; }",
                "clashes",
            ),
            (
                "model M { package P { class A { f() complete methods; } } }",
                "must come first",
            ),
            (
                "model M { package P { class A { f() x: T; } } }",
                "before methods",
            ),
            ("model M { package class { } }", "keyword 'class'"),
            (
                "model M { package P { class A { } } } trailing",
                "end of input",
            ),
            (
                "model M { package P { class A $ { } } }",
                "unexpected character",
            ),
        ];
        for (text, needle) in cases {
            let e = errors(text);
            assert!(
                e.iter().any(|e| e.message.contains(needle)),
                "{text}: wanted '{needle}', got {e:?}"
            );
        }
    }

    #[test]
    fn error_positions_and_snippets() {
        let text = "model M {\n  package P {\n    class A extends A { }\n  }\n}\n";
        let e = errors(text);
        assert_eq!((e[0].line, e[0].column), (3, 11));
        assert_eq!(e[0].snippet, "    class A extends A { }");
    }

    #[test]
    fn receivers_are_classified() {
        let m = parse_model(
            "model M { package P { class A { f() { calls h.g(), x.g(), self.f(); } } class B extends A { k() { calls h.g(); } } class H { g() { } } } assoc h: P.A -> P.H; }",
        )
        .unwrap();
        let calls = m.packages[0].classifiers[0].methods[0]
            .calls
            .clone()
            .unwrap();
        assert_eq!(calls[0].receiver, Receiver::Association("h".into()));
        assert_eq!(calls[1].receiver, Receiver::External("x".into()));
        assert_eq!(calls[2].receiver, Receiver::SelfRef);
        // inherited association
        let calls = m.packages[0].classifiers[1].methods[0]
            .calls
            .clone()
            .unwrap();
        assert_eq!(calls[0].receiver, Receiver::Association("h".into()));
    }

    #[test]
    fn association_ends_are_qualified() {
        let m =
            parse_model("model M { package P { class A { } } assoc r: A -> P.A [*]; }").unwrap();
        assert_eq!(m.associations[0].source, "P.A");
        assert_eq!(m.associations[0].target, "P.A");
        assert_eq!(m.associations[0].multiplicity, Multiplicity::Many);
    }

    #[test]
    fn interface_methods_are_abstract() {
        let m = parse_model("model M { package P { interface I { f() g(); } } }").unwrap();
        assert!(m.packages[0].classifiers[0]
            .methods
            .iter()
            .all(|m| m.is_abstract));
    }
}
