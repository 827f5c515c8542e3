//! Format-agnostic entry points over the DSL and JSON codecs.

use std::path::Path;

use crate::diagnostic::Diagnostics;
use crate::keyword_enum;
use crate::model::{SlaDocument, Validated};
use crate::vocabulary::VocabularyRegistry;
use crate::{dsl, json};

keyword_enum!(
    Format {
        Dsl => "dsl",
        Json => "json",
    }
);

impl Format {
    /// `.slaiot` is DSL, `.json` (including `.sla.json`) is JSON.
    pub fn from_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()? {
            "slaiot" => Some(Format::Dsl),
            "json" => Some(Format::Json),
            _ => None,
        }
    }

    /// JSON when the first non-blank character is `{`, DSL otherwise.
    pub fn sniff(text: &str) -> Format {
        match text
            .trim_start_matches(|c: char| c.is_whitespace() || c == '\u{feff}')
            .chars()
            .next()
        {
            Some('{') => Format::Json,
            _ => Format::Dsl,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Dsl => "slaiot",
            Format::Json => "sla.json",
        }
    }
}

pub fn parse(
    text: &str,
    format: Format,
    registry: &VocabularyRegistry,
) -> Result<Validated, Diagnostics> {
    match format {
        Format::Dsl => dsl::parse_text(text, registry),
        Format::Json => json::from_json(text, registry),
    }
}

pub fn print(doc: &SlaDocument, format: Format) -> String {
    match format {
        Format::Dsl => dsl::print_text(doc),
        Format::Json => json::to_json(doc),
    }
}

/// Reads `text` as `from` and prints the document canonically as `to`.
pub fn convert(
    text: &str,
    from: Format,
    to: Format,
    registry: &VocabularyRegistry,
) -> Result<String, Diagnostics> {
    parse(text, from, registry).map(|v| print(&v.document, to))
}
