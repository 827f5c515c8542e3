use std::fmt::Write as _;

use num_rational::BigRational;
use slaiot_core::codec::{self, Format};
use slaiot_core::diagnostic::Diagnostic;
use slaiot_core::matcher::{rank_offers, reports_to_json, MatchError, MatchReport, Weights};
use slaiot_core::model::SlaDocument;
use slaiot_core::vocabulary::{decimal, VocabularyRegistry};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    /// The document is invalid or no offer is acceptable.
    Failure = 1,
    Usage = 2,
    Io = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// Every diagnostic for `text`, errors and warnings alike, in report order.
pub fn validate(text: &str, format: Format, registry: &VocabularyRegistry) -> Vec<Diagnostic> {
    match codec::parse(text, format, registry) {
        Ok(v) => v.warnings,
        Err(d) => d.into_vec(),
    }
}

/// Canonical JSON for a diagnostics list: 2-space indentation, trailing newline.
pub fn diagnostics_json(diagnostics: &[Diagnostic]) -> String {
    let mut out = serde_json::to_string_pretty(diagnostics).expect("diagnostics serialize");
    out.push('\n');
    out
}

/// `file:line:col: severity: message [code at path]`, one per line.
pub fn diagnostics_text(file: &str, diagnostics: &[Diagnostic]) -> String {
    let mut out = String::new();
    for d in diagnostics {
        match d.span {
            Some(s) => writeln!(out, "{file}:{}:{}: {d}", s.start_line, s.start_col),
            None => writeln!(out, "{file}: {d}"),
        }
        .expect("writing to a String");
    }
    out
}

pub fn rank(
    request: &SlaDocument,
    offers: &[SlaDocument],
    registry: &VocabularyRegistry,
    weights: &Weights,
) -> Result<(Vec<MatchReport>, String), MatchError> {
    let reports = rank_offers(offers, request, registry, weights)?;
    let json = reports_to_json(&reports);
    Ok((reports, json))
}

/// Whether the top-ranked offer passes every hard constraint and reaches
/// `min_score`.
pub fn accepted(reports: &[MatchReport], min_score: f64) -> bool {
    reports.first().is_some_and(|top| {
        let score = BigRational::new((*top.score.numer()).into(), (*top.score.denom()).into());
        top.hard_pass && score >= decimal(min_score)
    })
}
