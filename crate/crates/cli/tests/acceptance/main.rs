//! Acceptance suite: one pass/fail line per criterion. Run with
//! `cargo test -p umlf-cli --test acceptance`.

mod oracle;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

use serde_json::Value;
use umlf::registry::Layer;
use umlf::testkit::{
    annotated_model, dangling_links, exhaustive, planted_facm, random_model, ShapeConfig,
};
use umlf::{
    apply_candidate, collect_instances, detect_candidates, expand_model, generate_docs,
    parse_model, print_model, validate_model, DetectKind, DocOptions, Model, Registry, RuleId,
    Severity, ValidateOptions,
};

/// Wall-clock budget for criterion 1 (all fixture and mutant checks).
const FIXTURE_BUDGET: Duration = Duration::from_secs(1);
/// Wall-clock budget for criterion 5 (the exhaustive sweep).
const EXHAUSTIVE_BUDGET: Duration = Duration::from_secs(60);
/// Every this many exhaustive shapes, the directly built model is compared
/// with the parse of its source text.
const SOURCE_CHECK_STRIDE: usize = 97;
/// Minimum number of hand-mutated fixtures criterion 1 requires.
const MIN_MUTANTS: usize = 10;
/// Planted Factory Method models for criterion 3.
const PLANTED_MODELS: u64 = 200;
/// Random models for criterion 6.
const ROUND_TRIP_MODELS: u64 = 500;
/// Seeds of the random corpus used by criteria 4 and 8.
const CORPUS_SEEDS: std::ops::Range<u64> = 0..500;

/// Factory Method tag list as printed on diagrams, in role order, including
/// the repeated `facM` of the concrete creator.
const FACM_TAGS: [&str; 7] = [
    "FacM-Creator",
    "FacM-facM",
    "FacM-anOp",
    "FacM-Product",
    "FacM-ConcreteProduct",
    "FacM-ConcreteCreator",
    "FacM-facM",
];
/// The shorter list without the subclasses.
const FACM_SHORT_TAGS: [&str; 4] = ["FacM-Creator", "FacM-facM", "FacM-anOp", "FacM-Product"];
const UNIF_TAGS: [&str; 3] = ["Unif-TH", "Unif-t", "Unif-h"];

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture_dir() -> PathBuf {
    root().join("fixtures")
}

fn umlf_files(dir: &Path) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "umlf"))
        .collect();
    files.sort();
    files
}

fn all_fixtures() -> Vec<PathBuf> {
    let mut files = umlf_files(&fixture_dir());
    files.extend(umlf_files(&fixture_dir().join("mutants")));
    files
}

fn umlf(args: &[&str], stdin: Option<&[u8]>) -> Output {
    use std::io::Write;
    let mut child = Command::new(env!("CARGO_BIN_EXE_umlf"))
        .args(args)
        .stdin(if stdin.is_some() {
            Stdio::piped()
        } else {
            Stdio::null()
        })
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("umlf binary runs");
    if let Some(input) = stdin {
        child.stdin.take().unwrap().write_all(input).unwrap();
    }
    child.wait_with_output().unwrap()
}

fn ensure(condition: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if condition {
        Ok(())
    } else {
        Err(message())
    }
}

fn corpus() -> Vec<(String, Model)> {
    let config = ShapeConfig::default();
    let mut out = Vec::new();
    for seed in CORPUS_SEEDS {
        out.push((format!("random {seed}"), random_model(seed, &config)));
        out.push((format!("annotated {seed}"), annotated_model(seed, &config)));
    }
    for seed in 0..PLANTED_MODELS {
        out.push((format!("planted {seed}"), planted_facm(seed)));
    }
    out
}

fn c1_fixture_fidelity() -> Verdict {
    let start = Instant::now();
    for name in ["currency.umlf", "facm.umlf"] {
        let path = fixture_dir().join(name);
        let out = umlf(&["check", path.to_str().unwrap()], None);
        ensure(
            out.status.code() == Some(0) && out.stdout.is_empty(),
            || {
                format!(
                    "{name}: exit {:?}, output {}",
                    out.status.code(),
                    String::from_utf8_lossy(&out.stdout)
                )
            },
        )?;
    }
    let mutants = umlf_files(&fixture_dir().join("mutants"));
    ensure(mutants.len() >= MIN_MUTANTS, || {
        format!("only {} mutants", mutants.len())
    })?;
    for path in &mutants {
        let text = fs::read_to_string(path).unwrap();
        let expected: BTreeSet<String> = text
            .lines()
            .next()
            .and_then(|l| l.strip_prefix("// expect:"))
            .ok_or_else(|| format!("{} lacks an expect header", path.display()))?
            .split(',')
            .map(|s| s.trim().to_string())
            .collect();
        let out = umlf(&["check", path.to_str().unwrap(), "--format", "json"], None);
        let json: Value =
            serde_json::from_slice(&out.stdout).map_err(|e| format!("{}: {e}", path.display()))?;
        let found: BTreeSet<String> = json
            .as_array()
            .unwrap()
            .iter()
            .map(|d| d["rule"].as_str().unwrap().to_string())
            .collect();
        ensure(found == expected, || {
            format!("{}: expected {expected:?}, got {found:?}", path.display())
        })?;
        let errors = json
            .as_array()
            .unwrap()
            .iter()
            .any(|d| d["severity"] == "error");
        let code = if errors { 1 } else { 0 };
        ensure(out.status.code() == Some(code), || {
            format!("{}: exit {:?}", path.display(), out.status.code())
        })?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < FIXTURE_BUDGET, || {
        format!("took {elapsed:?}, budget {FIXTURE_BUDGET:?}")
    })?;
    Ok(format!(
        "2 clean fixtures, {} mutants each with exactly its rule, {elapsed:.2?}",
        mutants.len()
    ))
}

fn c2_derivation() -> Verdict {
    let registry = Registry::builtin();
    let facm = registry.get("FacM").unwrap();
    let surface = facm.surface_tag_names();
    ensure(surface == FACM_TAGS, || {
        format!("FacM surface list {surface:?}")
    })?;
    let required: Vec<String> = facm
        .roles
        .iter()
        .filter(|r| r.cardinality.is_required())
        .map(|r| format!("FacM-{}", r.name))
        .collect();
    ensure(required == FACM_SHORT_TAGS, || {
        format!("FacM required roles {required:?}")
    })?;
    let unif = registry.get("Unif").unwrap().derive_tag_names();
    ensure(unif == UNIF_TAGS, || format!("Unif list {unif:?}"))?;
    Ok(format!(
        "FacM {} tags, short list {}, Unif {}",
        surface.len(),
        required.len(),
        unif.len()
    ))
}

fn c3_layering() -> Verdict {
    let registry = Registry::builtin();
    let options = ValidateOptions::default();
    let mut instances = 0;
    for seed in 0..PLANTED_MODELS {
        let model = planted_facm(seed);
        ensure(
            model
                .packages
                .iter()
                .map(|p| p.classifiers.len())
                .sum::<usize>()
                <= 5,
            || format!("planted model {seed} has more than 5 classifiers"),
        )?;
        instances += collect_instances(&model, &registry).len();
        let expanded = expand_model(&model, &registry);
        let bad: Vec<String> = validate_model(&expanded, &registry, &options)
            .iter()
            .filter(|d| d.severity == Severity::Error)
            .filter(|d| matches!(d.layer, Some(Layer::Principle | Layer::TemplateHook)))
            .map(|d| d.to_string())
            .collect();
        ensure(bad.is_empty(), || {
            format!("planted model {seed}: {bad:?}\n{}", print_model(&model))
        })?;
    }
    Ok(format!("{PLANTED_MODELS} planted models ({instances} instances), no principle or template/hook errors"))
}

type Triple = (String, String, Option<String>, Option<String>);

fn triples(model: &Model) -> BTreeSet<Triple> {
    let mut out = BTreeSet::new();
    for e in model.elements() {
        for t in model.tags(e) {
            out.insert((
                model.qualified_name(e),
                t.set.clone(),
                t.role.clone(),
                t.instance.clone(),
            ));
        }
    }
    out
}

fn c4_expansion_algebra() -> Verdict {
    let registry = Registry::builtin();
    let corpus = corpus();
    let mut added = 0;
    for (name, model) in &corpus {
        let once = expand_model(model, &registry);
        let twice = expand_model(&once, &registry);
        let (t0, t1, t2) = (triples(model), triples(&once), triples(&twice));
        ensure(t0.is_subset(&t1), || {
            format!("{name}: expansion removed tags")
        })?;
        ensure(t1 == t2, || {
            format!("{name}: second expansion changed tags")
        })?;
        added += t1.len() - t0.len();
    }
    Ok(format!(
        "{} models, {added} tags added, monotone and idempotent",
        corpus.len()
    ))
}

fn errors(model: &Model, registry: &Registry) -> BTreeSet<String> {
    validate_model(model, registry, &ValidateOptions::default())
        .into_iter()
        .filter(|d| d.severity == Severity::Error)
        .map(|d| d.to_string())
        .collect()
}

fn c5_detector_oracle() -> Verdict {
    let registry = Registry::builtin();
    let start = Instant::now();
    let (mut models, mut candidates) = (0usize, BTreeMap::<&str, usize>::new());
    for shape in exhaustive::shapes() {
        models += 1;
        let model = shape.model();
        if models % SOURCE_CHECK_STRIDE == 0 {
            let parsed = parse_model(&shape.source()).map_err(|e| format!("{e:?}"))?;
            ensure(parsed == model, || {
                format!("direct build differs from parse\n{}", shape.source())
            })?;
        }
        let found = detect_candidates(&model, &registry, &DetectKind::ALL);

        let unif: BTreeSet<oracle::UnifFact> = found
            .iter()
            .filter(|c| c.kind == DetectKind::Unif)
            .map(|c| {
                let name = |role: &str| {
                    c.bound(role)
                        .iter()
                        .map(|&e| model.qualified_name(e))
                        .collect::<Vec<_>>()
                };
                (name("TH")[0].clone(), name("t")[0].clone(), name("h"))
            })
            .collect();
        let sep: BTreeSet<oracle::SepFact> = found
            .iter()
            .filter(|c| c.kind == DetectKind::Sep)
            .map(|c| {
                let name = |role: &str| model.qualified_name(c.bound(role)[0]);
                (name("T"), name("t"), name("H"), name("h"), name("ref"))
            })
            .collect();
        let unif_count = found.iter().filter(|c| c.kind == DetectKind::Unif).count();
        let sep_count = found.iter().filter(|c| c.kind == DetectKind::Sep).count();
        let (want_unif, want_sep) = (oracle::unification(&model), oracle::separation(&model));
        ensure(unif == want_unif && unif_count == want_unif.len(), || {
            format!(
                "Unif mismatch\n{}\ndetector {unif:?}\noracle {want_unif:?}",
                shape.source()
            )
        })?;
        ensure(sep == want_sep && sep_count == want_sep.len(), || {
            format!(
                "Sep mismatch\n{}\ndetector {sep:?}\noracle {want_sep:?}",
                shape.source()
            )
        })?;

        if found.is_empty() {
            continue;
        }
        let before = errors(&model, &registry);
        for candidate in &found {
            *candidates.entry(candidate.set()).or_default() += 1;
            let applied = apply_candidate(&model, &registry, candidate, "Found")
                .map_err(|e| format!("apply failed: {e}\n{}", shape.source()))?;
            let new: Vec<String> = errors(&applied, &registry)
                .difference(&before)
                .cloned()
                .collect();
            ensure(new.is_empty(), || {
                format!(
                    "applying {:?} added {new:?}\n{}",
                    candidate.record(&model),
                    shape.source()
                )
            })?;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < EXHAUSTIVE_BUDGET, || {
        format!("took {elapsed:?}, budget {EXHAUSTIVE_BUDGET:?}")
    })?;
    Ok(format!(
        "{models} shapes, candidates {candidates:?}, all applied without new errors, {elapsed:.1?}"
    ))
}

fn round_trips(text: &str) -> Result<(), String> {
    let model = parse_model(text).map_err(|e| format!("{e:?}"))?;
    let printed = print_model(&model);
    let reparsed = parse_model(&printed).map_err(|e| format!("reparse: {e:?}\n{printed}"))?;
    ensure(reparsed == model, || {
        format!("structure changed\n{printed}")
    })?;
    ensure(print_model(&reparsed) == printed, || {
        format!("printing not idempotent\n{printed}")
    })
}

fn c6_round_trip() -> Verdict {
    let fixtures = all_fixtures();
    for path in &fixtures {
        round_trips(&fs::read_to_string(path).unwrap())
            .map_err(|e| format!("{}: {e}", path.display()))?;
    }
    let config = ShapeConfig::default();
    for seed in 0..ROUND_TRIP_MODELS {
        round_trips(&umlf::testkit::random_model_source(seed, &config))
            .map_err(|e| format!("seed {seed}: {e}"))?;
    }
    Ok(format!(
        "{} fixtures and {ROUND_TRIP_MODELS} random models",
        fixtures.len()
    ))
}

const RULE_IDS_EXPECTED: usize = 17;

fn check_diagnostic_schema(json: &Value) -> Result<(), String> {
    let known: BTreeSet<&str> = RuleId::ALL.iter().map(|r| r.as_str()).collect();
    ensure(known.len() == RULE_IDS_EXPECTED, || {
        "rule catalog size changed".into()
    })?;
    for d in json.as_array().ok_or("diagnostics are not an array")? {
        let o = d.as_object().ok_or("diagnostic is not an object")?;
        let keys: BTreeSet<&str> = o.keys().map(String::as_str).collect();
        ensure(
            keys == BTreeSet::from(["rule", "severity", "target", "kind", "instance", "message"]),
            || format!("diagnostic keys {keys:?}"),
        )?;
        ensure(
            o["rule"].as_str().is_some_and(|r| known.contains(r)),
            || format!("rule {}", o["rule"]),
        )?;
        ensure(
            matches!(o["severity"].as_str(), Some("error" | "warning" | "info")),
            || format!("severity {}", o["severity"]),
        )?;
        ensure(
            o["target"].is_string() && o["kind"].is_string() && o["message"].is_string(),
            || format!("field types in {d}"),
        )?;
        ensure(o["instance"].is_string() || o["instance"].is_null(), || {
            format!("instance {}", o["instance"])
        })?;
    }
    Ok(())
}

fn check_candidate_schema(json: &Value) -> Result<(), String> {
    for c in json.as_array().ok_or("candidates are not an array")? {
        let o = c.as_object().ok_or("candidate is not an object")?;
        let keys: BTreeSet<&str> = o.keys().map(String::as_str).collect();
        ensure(
            keys == BTreeSet::from(["set", "bindings", "evidence", "score"]),
            || format!("candidate keys {keys:?}"),
        )?;
        ensure(o["set"].is_string() && o["score"].is_u64(), || {
            format!("field types in {c}")
        })?;
        let bindings = o["bindings"]
            .as_object()
            .ok_or("bindings are not an object")?;
        ensure(
            bindings
                .values()
                .all(|v| v.as_array().is_some_and(|a| a.iter().all(Value::is_string))),
            || format!("bindings {}", o["bindings"]),
        )?;
        ensure(
            o["evidence"]
                .as_array()
                .is_some_and(|a| a.iter().all(Value::is_string)),
            || format!("evidence {}", o["evidence"]),
        )?;
    }
    Ok(())
}

fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            (
                path.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&path).unwrap(),
            )
        })
        .collect()
}

fn c7_determinism() -> Verdict {
    let fixtures = all_fixtures();
    let scratch = tempfile::tempdir().unwrap();
    let mut runs = 0;
    for path in &fixtures {
        let file = path.to_str().unwrap();
        let commands: Vec<Vec<&str>> = vec![
            vec!["check", file],
            vec!["check", file, "--format", "json"],
            vec!["expand", file],
            vec!["detect", file],
            vec!["detect", file, "--format", "json"],
            vec!["fmt", file],
        ];
        for args in &commands {
            let (a, b) = (umlf(args, None), umlf(args, None));
            runs += 2;
            ensure(
                a.status.code() == b.status.code() && a.stdout == b.stdout && a.stderr == b.stderr,
                || format!("{args:?} differs between runs"),
            )?;
            ensure(a.status.code() != Some(2), || {
                format!("{args:?} failed: {}", String::from_utf8_lossy(&a.stderr))
            })?;
            if args.contains(&"json") {
                let json: Value =
                    serde_json::from_slice(&a.stdout).map_err(|e| format!("{args:?}: {e}"))?;
                match args[0] {
                    "check" => check_diagnostic_schema(&json),
                    _ => check_candidate_schema(&json),
                }
                .map_err(|e| format!("{args:?}: {e}"))?;
            }
        }
        let stem = path.file_stem().unwrap().to_string_lossy();
        let (da, db) = (
            scratch.path().join(format!("{stem}-a")),
            scratch.path().join(format!("{stem}-b")),
        );
        for dir in [&da, &db] {
            let out = umlf(&["doc", file, "-o", dir.to_str().unwrap()], None);
            runs += 1;
            ensure(out.status.success(), || {
                format!("doc {file}: {}", String::from_utf8_lossy(&out.stderr))
            })?;
        }
        ensure(dir_contents(&da) == dir_contents(&db), || {
            format!("doc {file} differs between runs")
        })?;

        let fmt = umlf(&["fmt", file], None);
        let again = umlf(&["fmt", "-"], Some(&fmt.stdout));
        runs += 2;
        ensure(again.stdout == fmt.stdout, || {
            format!("fmt is not idempotent on {file}")
        })?;
    }
    let facm = fixture_dir().join("facm.umlf");
    let expanded = umlf(&["expand", facm.to_str().unwrap()], None);
    let checked = umlf(&["check", "-"], Some(&expanded.stdout));
    ensure(checked.status.code() == Some(0), || {
        format!(
            "expand facm | check - exited {:?}: {}",
            checked.status.code(),
            String::from_utf8_lossy(&checked.stdout)
        )
    })?;
    Ok(format!(
        "{} fixtures, {runs} invocations byte-identical, JSON schemas hold",
        fixtures.len()
    ))
}

fn c8_docgen() -> Verdict {
    let registry = Registry::builtin();
    let mut models: Vec<(String, Model)> = all_fixtures()
        .iter()
        .map(|p| {
            (
                p.display().to_string(),
                parse_model(&fs::read_to_string(p).unwrap()).unwrap(),
            )
        })
        .collect();
    models.extend(corpus());
    let mut pages = 0;
    for (name, model) in &models {
        let bundle = generate_docs(model, &registry, &DocOptions::default());
        ensure(
            bundle == generate_docs(model, &registry, &DocOptions::default()),
            || format!("{name}: regenerated bundle differs"),
        )?;
        let dangling = dangling_links(&bundle);
        ensure(dangling.is_empty(), || {
            format!("{name}: dangling links {dangling:?}")
        })?;
        let instances = collect_instances(model, &registry);
        ensure(bundle.pages.len() == instances.len(), || {
            format!(
                "{name}: {} pages for {} instances",
                bundle.pages.len(),
                instances.len()
            )
        })?;
        for instance in &instances {
            let key = instance.key(model);
            let count = bundle.pages.iter().filter(|p| p.key == key).count();
            ensure(count == 1, || format!("{name}: {key} has {count} pages"))?;
        }
        let files: BTreeSet<&str> = bundle.files().map(|(f, _)| f).collect();
        ensure(files.len() == bundle.pages.len() + 1, || {
            format!("{name}: duplicate file names")
        })?;
        pages += bundle.pages.len();
    }
    Ok(format!(
        "{} models, {pages} instance pages, no dangling links",
        models.len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("C1 fixture fidelity", c1_fixture_fidelity),
        ("C2 derivation-rule exactness", c2_derivation),
        ("C3 layering soundness", c3_layering),
        ("C4 expansion algebra", c4_expansion_algebra),
        ("C5 detector oracle equivalence", c5_detector_oracle),
        ("C6 round-trip", c6_round_trip),
        ("C7 determinism", c7_determinism),
        ("C8 docgen integrity", c8_docgen),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let message = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {message}"))
        });
        match verdict {
            Ok(detail) => println!("PASS {name}: {detail} [{:.2?}]", start.elapsed()),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} [{:.2?}]", start.elapsed());
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
