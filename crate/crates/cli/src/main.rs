//! `umlf`: check, expand, mine, document and format UML-F annotated class models.
//!
//! Exit status: 0 on success, 1 when `check` reports findings at or above the
//! `--fail-on` threshold, 2 on unreadable input, parse errors and usage errors.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use umlf::validator::{RuleId, Severity};
use umlf::{
    apply_candidate, detect_candidates, expand_model, generate_docs, parse_model, print_model,
    validate_model, DetectKind, DocOptions, Model, Registry, ValidateOptions,
};

#[derive(Debug, Parser)]
#[command(
    name = "umlf",
    version,
    about = "Tools for UML-F annotated class models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate tag usage and report diagnostics.
    Check {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Lowest severity that makes the exit status 1.
        #[arg(long, value_enum, default_value_t = FailOn::Error)]
        fail_on: FailOn,
        /// Rule id to switch off; repeatable.
        #[arg(long = "disable", value_name = "RULE_ID")]
        disabled: Vec<String>,
    },
    /// Add every tag implied by the model's tag-set instances and print the result.
    Expand {
        #[command(flatten)]
        input: Input,
        /// Write the expanded model here instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Propose tag-set instances found in the model's structure.
    Detect {
        #[command(flatten)]
        input: Input,
        /// Comma-separated subset of Unif, Sep, Comp, Dec, CoR, FacM.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "Unif,Sep,Comp,Dec,CoR,FacM"
        )]
        kinds: Vec<String>,
        /// Apply candidate INDEX of set SET as instance NAME and print the tagged model.
        #[arg(long, value_name = "SET@NAME=INDEX")]
        apply: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Write markdown documentation of the model's instances.
    Doc {
        #[command(flatten)]
        input: Input,
        /// Output directory; created if missing.
        #[arg(short, long)]
        output: PathBuf,
        /// Override a tag set's documentation link; repeatable.
        #[arg(long = "doc-url", value_name = "SET=URL")]
        doc_urls: Vec<String>,
    },
    /// Print the model in canonical form.
    Fmt {
        #[command(flatten)]
        input: Input,
    },
}

#[derive(Debug, Args)]
struct Input {
    /// Model file, or `-` for standard input.
    file: String,
    /// Directory of `.pat` pattern definitions to load.
    #[arg(long)]
    patterns: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FailOn {
    Error,
    Warning,
}

/// Input the command could not work with; reported and mapped to exit status 2.
#[derive(Debug)]
struct Rejected;

impl Input {
    fn read(&self) -> Result<(Model, Registry)> {
        let (name, text) = if self.file == "-" {
            let mut text = String::new();
            io::stdin()
                .read_to_string(&mut text)
                .context("cannot read standard input")?;
            ("<stdin>".to_string(), text)
        } else {
            let text = fs::read_to_string(&self.file)
                .with_context(|| format!("cannot read {}", self.file))?;
            (self.file.clone(), text)
        };
        let registry = match &self.patterns {
            Some(dir) => load_patterns(dir)?,
            None => Registry::builtin(),
        };
        match parse_model(&text) {
            Ok(model) => Ok((model, registry)),
            Err(errors) => {
                let mut stderr = io::stderr().lock();
                for e in &errors {
                    writeln!(stderr, "{name}:{e}")?;
                    writeln!(stderr, "    {}", e.snippet)?;
                    writeln!(stderr, "    {}^", " ".repeat(e.column.saturating_sub(1)))?;
                }
                Err(anyhow!(Rejected))
            }
        }
    }
}

impl std::fmt::Display for Rejected {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("input rejected")
    }
}

impl std::error::Error for Rejected {}

/// Built-in tag sets plus every `.pat` file of `dir`, loaded in file-name order.
fn load_patterns(dir: &Path) -> Result<Registry> {
    let mut registry = Registry::builtin();
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot read pattern directory {}", dir.display()))?
        .map(|entry| entry.map(|e| e.path()))
        .collect::<io::Result<_>>()?;
    files.retain(|p| p.extension().is_some_and(|e| e == "pat"));
    files.sort();
    for path in files {
        let text =
            fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
        if let Err(errors) = registry.load(&text) {
            let details: Vec<String> = errors
                .iter()
                .map(|e| format!("{}:{e}", path.display()))
                .collect();
            bail!("invalid pattern definition\n{}", details.join("\n"));
        }
    }
    Ok(registry)
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn json(value: &impl serde::Serialize) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

fn check(input: &Input, format: Format, fail_on: FailOn, disabled: &[String]) -> Result<ExitCode> {
    let mut options = ValidateOptions::default();
    for id in disabled {
        let rule: RuleId = id.parse().map_err(|e: String| anyhow!(e))?;
        options = options.disable(rule);
    }
    let (model, registry) = input.read()?;
    let diagnostics = validate_model(&model, &registry, &options);
    let text = match format {
        Format::Json => json(&diagnostics)?,
        Format::Text => diagnostics.iter().map(|d| format!("{d}\n")).collect(),
    };
    emit(None, &text)?;
    let threshold = match fail_on {
        FailOn::Error => Severity::Error,
        FailOn::Warning => Severity::Warning,
    };
    Ok(if diagnostics.iter().any(|d| d.severity >= threshold) {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

/// Splits `SET@NAME=INDEX`.
fn parse_apply(spec: &str) -> Result<(&str, &str, usize)> {
    let usage = || anyhow!("--apply expects SET@NAME=INDEX, got '{spec}'");
    let (set, rest) = spec.split_once('@').ok_or_else(usage)?;
    let (name, index) = rest.split_once('=').ok_or_else(usage)?;
    let index = index.trim().parse().map_err(|_| usage())?;
    Ok((set.trim(), name.trim(), index))
}

fn detect(
    input: &Input,
    kinds: &[String],
    apply: Option<&str>,
    format: Format,
) -> Result<ExitCode> {
    let kinds: Vec<DetectKind> = kinds
        .iter()
        .map(|k| k.trim().parse().map_err(|e: String| anyhow!(e)))
        .collect::<Result<_>>()?;
    let (model, registry) = input.read()?;
    let candidates = detect_candidates(&model, &registry, &kinds);

    if let Some(spec) = apply {
        let (set, name, index) = parse_apply(spec)?;
        let candidate = candidates.get(index).ok_or_else(|| {
            anyhow!(
                "no candidate with index {index} ({} found)",
                candidates.len()
            )
        })?;
        if candidate.set() != set {
            bail!(
                "candidate {index} is a {} candidate, not {set}",
                candidate.set()
            );
        }
        let applied = apply_candidate(&model, &registry, candidate, name)?;
        emit(None, &print_model(&applied))?;
        return Ok(ExitCode::SUCCESS);
    }

    let records: Vec<_> = candidates.iter().map(|c| c.record(&model)).collect();
    let text = match format {
        Format::Json => json(&records)?,
        Format::Text => {
            let mut out = String::new();
            for (i, r) in records.iter().enumerate() {
                let bindings: Vec<String> = r
                    .bindings
                    .iter()
                    .map(|(role, names)| format!("{role}={}", names.join(",")))
                    .collect();
                out.push_str(&format!(
                    "{i}: {} score {} {} ({})\n",
                    r.set,
                    r.score,
                    bindings.join(" "),
                    r.evidence.join(", ")
                ));
            }
            out
        }
    };
    emit(None, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn doc(input: &Input, output: &Path, doc_urls: &[String]) -> Result<ExitCode> {
    let (model, mut registry) = input.read()?;
    for spec in doc_urls {
        let (set, url) = spec
            .split_once('=')
            .ok_or_else(|| anyhow!("--doc-url expects SET=URL, got '{spec}'"))?;
        if !registry.set_doc_url(set.trim(), url.trim()) {
            bail!("unknown tag set '{set}' in --doc-url");
        }
    }
    let bundle = generate_docs(&model, &registry, &DocOptions::default());
    fs::create_dir_all(output).with_context(|| format!("cannot create {}", output.display()))?;
    for (file, text) in bundle.files() {
        let path = output.join(file);
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Check {
            input,
            format,
            fail_on,
            disabled,
        } => check(&input, format, fail_on, &disabled),
        Command::Expand { input, output } => {
            let (model, registry) = input.read()?;
            emit(
                output.as_deref(),
                &print_model(&expand_model(&model, &registry)),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Detect {
            input,
            kinds,
            apply,
            format,
        } => detect(&input, &kinds, apply.as_deref(), format),
        Command::Doc {
            input,
            output,
            doc_urls,
        } => doc(&input, &output, &doc_urls),
        Command::Fmt { input } => {
            let (model, _) = input.read()?;
            emit(None, &print_model(&model))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            if !e.is::<Rejected>() {
                eprintln!("umlf: {e:#}");
            }
            ExitCode::from(2)
        }
    }
}
