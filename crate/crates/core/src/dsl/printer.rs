use std::fmt::Write;

use super::parser::CLAUSE_KEYWORDS;
use crate::model::*;

pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{{{:x}}}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn unit_token(unit: &str) -> String {
    let bare = unit == "%"
        || (unit
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && unit.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            && !CLAUSE_KEYWORDS.contains(&unit));
    if bare {
        unit.to_string()
    } else {
        quote(unit)
    }
}

/// `{}` prints the shortest decimal that reads back to the same `f64`, and
/// never uses exponent notation.
fn number(n: f64) -> String {
    format!("{n}")
}

fn constraint(out: &mut String, indent: &str, keyword: &str, c: &Constraint) {
    let _ = write!(out, "{indent}{keyword} {}", quote(&c.metric));
    if let Some(p) = c.priority {
        let _ = write!(out, " priority {p}");
    }
    let _ = write!(out, " {}", c.comparator);
    match &c.value {
        Value::Number(n) => {
            let _ = write!(out, " {}", number(*n));
        }
        Value::Bool(b) => {
            let _ = write!(out, " {b}");
        }
        Value::Text(s) => {
            let _ = write!(out, " {}", quote(s));
        }
    }
    if let Some(u) = &c.unit {
        let _ = write!(out, " {}", unit_token(u));
    }
    out.push('\n');
}

fn spec_block(out: &mut String, head: &str, slos: &[Constraint], configuration: &[Constraint]) {
    if slos.is_empty() && configuration.is_empty() {
        let _ = writeln!(out, "    {head} {{}}");
        return;
    }
    let _ = writeln!(out, "    {head} {{");
    for c in slos {
        constraint(out, "      ", "slo", c);
    }
    for c in configuration {
        constraint(out, "      ", "config", c);
    }
    out.push_str("    }\n");
}

/// Canonical text: 2-space indentation, LF line endings, metadata, parties,
/// SLOs and activities in that order.
pub fn print_text(doc: &SlaDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "sla {} type {} {{", quote(&doc.id), doc.sla_type);
    if let Some(name) = &doc.name {
        let _ = writeln!(out, "  name {}", quote(name));
    }
    if !doc.description.is_empty() {
        let _ = writeln!(out, "  description {}", quote(&doc.description));
    }
    let _ = writeln!(out, "  application {}", quote(&doc.application_type));
    let _ = writeln!(out, "  start {}", doc.start_date.format("%Y-%m-%d"));
    let _ = writeln!(out, "  end {}", doc.end_date.format("%Y-%m-%d"));
    for p in &doc.parties {
        let roles: Vec<String> = p.roles.iter().map(|r| quote(r)).collect();
        let _ = writeln!(
            out,
            "  party {} id {} roles [{}]",
            quote(&p.name),
            quote(&p.id),
            roles.join(", ")
        );
    }
    for c in &doc.slos {
        constraint(&mut out, "  ", "slo", c);
    }
    for a in &doc.activities {
        let _ = write!(out, "  activity {}", quote(&a.id));
        if a.name != a.id {
            let _ = write!(out, " name {}", quote(&a.name));
        }
        if !a.depends_on.is_empty() {
            let deps: Vec<String> = a.depends_on.iter().map(|d| quote(d)).collect();
            let _ = write!(out, " after {}", deps.join(", "));
        }
        out.push_str(" {\n");
        spec_block(
            &mut out,
            &format!("service {}", a.service.kind),
            &a.service.slos,
            &a.service.configuration,
        );
        spec_block(
            &mut out,
            &format!("resource {}", a.resource.kind),
            &a.resource.slos,
            &a.resource.configuration,
        );
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}
