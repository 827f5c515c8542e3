//! Textual SLA syntax (`.slaiot`).
//!
//! ```text
//! sla "rhms" type request {
//!   description "Remote health monitoring"
//!   application "smart health"
//!   start 2025-01-01
//!   end 2026-01-01
//!   party "City Hospital" id "hospital" roles ["IoT administrator"]
//!   slo "Response Time" priority high lt 5 minutes
//!   activity "capture" name "Capture EoI" {
//!     service sensing {
//!       slo "Data Freshness" priority high gte 90 %
//!       config "Measurement Collection Interval" lte 10 seconds
//!     }
//!     resource iot_device {}
//!   }
//!   activity "examine" name "Examine the captured EoI" after "capture" {
//!     service ingestion {}
//!     resource edge {}
//!   }
//! }
//! ```
//!
//! Comparators `gt gte eq neq lt lte` stand for the grammar's
//! `greater than … less than or equal`. Metric names, ids and free text are
//! double-quoted with `\"`, `\\`, `\n`, `\t`, `\r` and `\u{...}` escapes. A
//! unit follows a numeric value either bare (`ms`, `KB`, `%`) or quoted
//! (`"per month"`). `#` comments run to end of line.
//!
//! Metadata clauses (`name`, `description`, `application`, `start`, `end`)
//! may come in any order and at most once; `description` and `name` are
//! optional. An activity's `name` defaults to its id.

mod lexer;
mod parser;
mod printer;

pub use lexer::{tokenize, Token, TokenKind};
pub use parser::SpanMap;
pub use printer::print_text;

use crate::diagnostic::{Code, Diagnostic, Diagnostics, SourceSpan};
use crate::model::{build_document, SlaParts, Validated};
use crate::vocabulary::VocabularyRegistry;

/// Parses without validating: syntax only, plus the span of every element.
pub fn parse_parts(
    source: &str,
    registry: &VocabularyRegistry,
) -> Result<(SlaParts, SpanMap), Diagnostic> {
    let tokens = tokenize(source)?;
    let mut p = parser::Parser::new(tokens, registry);
    let parts = p.parse_document()?;
    Ok((parts, p.spans))
}

/// The first `}` that starts a line indented differently from the line
/// holding its `{`. A dropped brace is usually inside that block.
fn misindented_block(tokens: &[Token]) -> Option<Diagnostic> {
    let mut indent = std::collections::HashMap::new();
    for t in tokens {
        indent.entry(t.span.start_line).or_insert(t.span.start_col);
    }
    let mut open: Vec<SourceSpan> = Vec::new();
    for t in tokens {
        match t.kind {
            TokenKind::LBrace => open.push(t.span),
            TokenKind::RBrace => {
                let Some(start) = open.pop() else { continue };
                let line = t.span.start_line;
                if indent[&line] == t.span.start_col && indent[&line] != indent[&start.start_line] {
                    return Some(
                        Diagnostic::error(
                            Code::UnclosedBrace,
                            format!("'{{' on line {} may be unclosed; the '}}' on line {line} is indented differently", start.start_line),
                        )
                        .with_span(start.join(t.span)),
                    );
                }
            }
            _ => {}
        }
    }
    None
}

/// Parses and validates a `.slaiot` document. Every returned diagnostic
/// carries a span.
pub fn parse_text(source: &str, registry: &VocabularyRegistry) -> Result<Validated, Diagnostics> {
    let (parts, spans) = parse_parts(source, registry).map_err(|d| {
        let mut ds = vec![d];
        if ds[0].code == Code::SyntaxError {
            if let Ok(tokens) = tokenize(source) {
                ds.extend(misindented_block(&tokens));
            }
        }
        Diagnostics(ds)
    })?;
    let attach = |mut d: Diagnostic| {
        if d.span.is_none() {
            d.span = d.path.as_deref().and_then(|p| spans.lookup(p));
        }
        d
    };
    match build_document(parts, registry) {
        Ok(mut v) => {
            v.warnings = v.warnings.into_iter().map(attach).collect();
            Ok(v)
        }
        Err(Diagnostics(ds)) => Err(Diagnostics(ds.into_iter().map(attach).collect())),
    }
}
