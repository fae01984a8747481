//! The rule catalog: structural checks of tag usage over a model.
//!
//! Diagnostics come out sorted by the declaration position of their target,
//! then rule id, instance and message, so identical inputs always give
//! identical output. Absence findings marked "downgradable" below are errors
//! only when the compartment that would hold the missing piece is marked
//! complete; otherwise the diagram is read as possibly elided and the finding
//! is a warning.

mod rules;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::model::{ElementId, ElementKind, Model};
use crate::registry::{Layer, Registry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warning,
    Error,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Info => "info",
            Severity::Warning => "warning",
            Severity::Error => "error",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Severity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "info" => Ok(Severity::Info),
            "warning" => Ok(Severity::Warning),
            "error" => Ok(Severity::Error),
            _ => Err(format!("unknown severity '{s}'")),
        }
    }
}

macro_rules! rule_ids {
    ($($variant:ident => $id:literal,)*) => {
        /// Identifier of a rule in the catalog.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum RuleId {
            $($variant,)*
        }

        impl RuleId {
            pub const ALL: &'static [RuleId] = &[$(RuleId::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(RuleId::$variant => $id,)*
                }
            }
        }

        impl FromStr for RuleId {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($id => Ok(RuleId::$variant),)*
                    _ => Err(format!("unknown rule id '{s}'")),
                }
            }
        }
    };
}

rule_ids! {
    TagUnknown => "R-TAG-UNKNOWN",
    ScopeMulti => "R-SCOPE-MULTI",
    ScopeOverride => "R-SCOPE-OVERRIDE",
    TemplateOnInterface => "R-TH-TEMPLATE-ON-INTERFACE",
    ClassNoTemplate => "R-TH-CLASS-NO-TEMPLATE",
    ClassNoHook => "R-TH-CLASS-NO-HOOK",
    HookNotOverridable => "R-TH-HOOK-NOT-OVERRIDABLE",
    RoleMissing => "R-SET-ROLE-MISSING",
    RoleKind => "R-SET-ROLE-KIND",
    Containment => "R-SET-CONTAINMENT",
    Abstract => "R-SET-ABSTRACT",
    NoCall => "R-SET-NO-CALL",
    SepNoAssoc => "R-SEP-NO-ASSOC",
    RecNoGen => "R-REC-NO-GEN",
    RecMult => "R-REC-MULT",
    FacmReturn => "R-FACM-RETURN",
    AnonAmbiguous => "R-ANON-AMBIGUOUS",
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for RuleId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

/// One finding. Serializes to `{rule, severity, target, kind, instance, message}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub rule: RuleId,
    pub severity: Severity,
    /// Qualified name of the offending element.
    pub target: String,
    pub kind: ElementKind,
    /// `Set@instance` or `Set@<anon:Class>` for instance-level findings.
    pub instance: Option<String>,
    pub message: String,
    #[serde(skip)]
    pub element: ElementId,
    /// Tag layer the finding belongs to: template/hook rules are layer 1,
    /// instance rules take the layer of their tag set.
    #[serde(skip)]
    pub layer: Option<Layer>,
}

impl Diagnostic {
    fn sort_key(&self) -> impl Ord + '_ {
        (
            self.element.position_key(),
            self.rule.as_str(),
            &self.instance,
            &self.message,
        )
    }
}

impl fmt::Display for Diagnostic {
    /// `severity rule target [instance]: message`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.severity, self.rule, self.target)?;
        if let Some(instance) = &self.instance {
            write!(f, " [{instance}]")?;
        }
        write!(f, ": {}", self.message)
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidateOptions {
    /// Rules whose findings are dropped.
    pub disabled: BTreeSet<RuleId>,
}

impl ValidateOptions {
    pub fn disable(mut self, rule: RuleId) -> Self {
        self.disabled.insert(rule);
        self
    }
}

/// Runs every enabled rule over the model.
pub fn validate_model(
    model: &Model,
    registry: &Registry,
    options: &ValidateOptions,
) -> Vec<Diagnostic> {
    let mut diagnostics = rules::run(model, registry);
    diagnostics.retain(|d| !options.disabled.contains(&d.rule));
    diagnostics.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    diagnostics.dedup();
    diagnostics
}
