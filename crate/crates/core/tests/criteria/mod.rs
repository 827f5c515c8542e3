//! Checks behind the acceptance criteria, shared by the core test suites
//! and the acceptance report. Each returns a one-line summary or the
//! reasons it failed.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;
use slaiot_core::codec::{convert, parse, Format};
use slaiot_core::dsl::{parse_text, print_text, tokenize, TokenKind};
use slaiot_core::generate::generate_document;
use slaiot_core::json::{from_json, to_json};
use slaiot_core::model::{
    collect_constraints, Comparator, Location, Priority, ScopeFilter, Section, SlaDocument,
    SlaType, Value as ConstraintValue,
};
use slaiot_core::vocabulary::{MetricKind, ResourceKind, ServiceKind, VocabularyRegistry};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn registry() -> VocabularyRegistry {
    VocabularyRegistry::builtin()
}

fn corpus() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = fs::read_dir(fixtures().join("corpus"))
        .map(|rd| {
            rd.filter_map(Result::ok)
                .map(|e| e.path())
                .filter(|p| p.extension().is_some_and(|x| x == "slaiot"))
                .filter_map(|p| {
                    let name = p.file_name()?.to_string_lossy().into_owned();
                    Some((name, fs::read_to_string(&p).ok()?))
                })
                .collect()
        })
        .unwrap_or_default();
    out.sort();
    out
}

fn required() -> BTreeSet<String> {
    let mut r: BTreeSet<String> = [
        "party-roles",
        "sla-name",
        "sla-description",
        "activity-name",
        "activity-after",
        "application-slo",
        "application-boolean-slo",
        "service-slo",
        "service-config",
        "resource-slo",
        "resource-config",
        "config-boolean",
        "config-type",
        "config-numerical",
        "unit-bare",
        "unit-quoted",
        "unit-percent",
        "comment",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    r.extend(SlaType::ALL.iter().map(|t| format!("type-{t}")));
    r.extend(Comparator::ALL.iter().map(|c| format!("comparator-{c}")));
    r.extend(Priority::ALL.iter().map(|p| format!("priority-{p}")));
    r.extend(ServiceKind::ALL.iter().map(|s| format!("service-{s}")));
    r.extend(ResourceKind::ALL.iter().map(|k| format!("resource-{k}")));
    r
}

fn exercised(text: &str, doc: &SlaDocument) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut add = |s: String| {
        out.insert(s);
    };
    add(format!("type-{}", doc.sla_type));
    if doc.parties.iter().any(|p| !p.roles.is_empty()) {
        add("party-roles".into());
    }
    if doc.name.is_some() {
        add("sla-name".into());
    }
    if !doc.description.is_empty() {
        add("sla-description".into());
    }
    for a in &doc.activities {
        add(format!("service-{}", a.service.kind));
        add(format!("resource-{}", a.resource.kind));
        if a.name != a.id {
            add("activity-name".into());
        }
        if !a.depends_on.is_empty() {
            add("activity-after".into());
        }
    }
    for l in collect_constraints(doc, ScopeFilter::All) {
        let c = l.constraint;
        add(format!("comparator-{}", c.comparator));
        if let Some(p) = c.priority {
            add(format!("priority-{p}"));
        }
        let place = match l.location {
            Location::Application => "application",
            Location::Service { .. } => "service",
            Location::Resource { .. } => "resource",
        };
        let section = match l.location {
            Location::Application => Section::Slo,
            Location::Service { section, .. } | Location::Resource { section, .. } => section,
        };
        match section {
            Section::Slo => add(format!("{place}-slo")),
            Section::Configuration => {
                add(format!("{place}-config"));
                match c.kind {
                    MetricKind::Boolean => add("config-boolean".into()),
                    MetricKind::Type => add("config-type".into()),
                    MetricKind::Numerical => add("config-numerical".into()),
                    MetricKind::Performance => {}
                }
            }
        }
        if place == "application" && c.kind == MetricKind::Boolean {
            add("application-boolean-slo".into());
        }
    }
    // Unit spellings and comments are only visible in the source.
    let tokens = tokenize(text).unwrap();
    for w in tokens.windows(2) {
        if let TokenKind::Number(_) = w[0].kind {
            match &w[1].kind {
                TokenKind::Percent => add("unit-percent".into()),
                TokenKind::Str(_) => add("unit-quoted".into()),
                TokenKind::Ident(s)
                    if !matches!(s.as_str(), "slo" | "config" | "activity" | "party") =>
                {
                    add("unit-bare".into())
                }
                _ => {}
            }
        }
    }
    if text
        .lines()
        .any(|l| l.trim_start().starts_with('#') || l.contains(" #"))
    {
        add("comment".into());
    }
    out
}

/// Every production is exercised and the committed checklist is truthful.
pub fn grammar_coverage() -> Result<String, String> {
    let reg = registry();
    let corpus = corpus();
    if corpus.len() < 20 {
        return Err(format!("corpus has only {} files", corpus.len()));
    }
    let mut by_file: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (name, text) in &corpus {
        let doc = parse_text(text, &reg)
            .map_err(|e| format!("{name}:\n{e}"))?
            .document;
        by_file.insert(name.clone(), exercised(text, &doc));
    }
    let covered: BTreeSet<String> = by_file.values().flatten().cloned().collect();
    let missing: Vec<String> = required()
        .into_iter()
        .filter(|p| !covered.contains(p))
        .collect();
    if !missing.is_empty() {
        return Err(format!(
            "productions not exercised by the corpus: {missing:?}"
        ));
    }

    let checklist =
        fs::read_to_string(fixtures().join("corpus/COVERAGE.txt")).map_err(|e| e.to_string())?;
    let mut listed = BTreeSet::new();
    for line in checklist
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
    {
        let (production, file) = line
            .split_once(':')
            .ok_or_else(|| format!("malformed checklist line: {line}"))?;
        let (production, file) = (production.trim(), file.trim());
        let hits = by_file
            .get(file)
            .ok_or_else(|| format!("checklist names unknown file {file}"))?;
        if !hits.contains(production) {
            return Err(format!("{file} does not exercise {production}"));
        }
        listed.insert(production.to_string());
    }
    let unlisted: Vec<String> = required()
        .iter()
        .filter(|p| !listed.contains(*p))
        .map(|p| {
            let file = by_file
                .iter()
                .find(|(_, h)| h.contains(p))
                .map(|(f, _)| f.as_str());
            format!("{p}: {}", file.unwrap_or("?"))
        })
        .collect();
    if !unlisted.is_empty() {
        return Err(format!("checklist lacks:\n{}", unlisted.join("\n")));
    }
    Ok(format!(
        "{} files cover all {} productions",
        corpus.len(),
        required().len()
    ))
}

/// Each invalid fixture yields exactly its expected (code, path), with a
/// span on the expected line.
pub fn validator_suite() -> Result<String, String> {
    let reg = registry();
    let dir = fixtures().join("invalid");
    let manifest: serde_json::Map<String, Value> = fs::read_to_string(dir.join("expected.json"))
        .map_err(|e| e.to_string())
        .and_then(|t| serde_json::from_str(&t).map_err(|e| e.to_string()))?;
    if manifest.len() < 15 {
        return Err(format!("only {} invalid fixtures", manifest.len()));
    }
    let mut failures = Vec::new();
    for (file, want) in &manifest {
        let text = fs::read_to_string(dir.join(file)).map_err(|e| format!("{file}: {e}"))?;
        let format =
            Format::from_path(Path::new(file)).ok_or_else(|| format!("{file}: extension"))?;
        let diags = match parse(&text, format, &reg) {
            Ok(_) => {
                failures.push(format!("{file}: accepted"));
                continue;
            }
            Err(d) => d,
        };
        let errors: Vec<_> = diags.errors().collect();
        let got: Vec<(String, Option<String>)> = errors
            .iter()
            .map(|d| (d.code.to_string(), d.path.clone()))
            .collect();
        let expected = (
            want["code"].as_str().unwrap().to_string(),
            want["path"].as_str().map(String::from),
        );
        if got != [expected.clone()] {
            failures.push(format!("{file}: expected {expected:?}, got {got:?}"));
            continue;
        }
        let Some(span) = errors[0].span else {
            failures.push(format!("{file}: diagnostic without span"));
            continue;
        };
        if let Some(line) = want.get("line").and_then(Value::as_u64) {
            if !span.covers_line(line as u32) {
                failures.push(format!("{file}: span {span:?} misses line {line}"));
            }
        }
    }
    if !failures.is_empty() {
        return Err(failures.join("\n"));
    }
    Ok(format!(
        "{} invalid fixtures rejected as expected",
        manifest.len()
    ))
}

/// DSL and JSON identity on generated documents, plus the DSL -> JSON -> DSL
/// byte fixed point.
pub fn round_trip(seeds: u64) -> Result<String, String> {
    let reg = registry();
    for seed in 0..seeds {
        let doc = generate_document(seed, &reg);
        let text = print_text(&doc);
        let from_text = parse_text(&text, &reg)
            .map_err(|e| format!("seed {seed}: {e}\n{text}"))?
            .document;
        if from_text != doc {
            return Err(format!("seed {seed}: DSL round trip changed the document"));
        }
        let json = to_json(&doc);
        let from_j = from_json(&json, &reg)
            .map_err(|e| format!("seed {seed}: {e}\n{json}"))?
            .document;
        if from_j != doc {
            return Err(format!("seed {seed}: JSON round trip changed the document"));
        }
        let back = convert(&json, Format::Json, Format::Dsl, &reg).map_err(|e| e.to_string())?;
        if back != text {
            return Err(format!(
                "seed {seed}: DSL -> JSON -> DSL is not a byte fixed point"
            ));
        }
    }
    Ok(format!("{seeds} seeds"))
}

fn expect(ok: bool, what: &str) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.to_string())
    }
}

/// The remote health monitoring request converts to the golden JSON and
/// carries the expected SLOs and mappings.
pub fn rhms_fidelity() -> Result<String, String> {
    let reg = registry();
    let dsl = fs::read_to_string(fixtures().join("corpus/rhms-request.slaiot"))
        .map_err(|e| e.to_string())?;
    let golden =
        fs::read_to_string(fixtures().join("golden/rhms.sla.json")).map_err(|e| e.to_string())?;
    let json = convert(&dsl, Format::Dsl, Format::Json, &reg).map_err(|e| e.to_string())?;
    expect(
        json == golden,
        "conversion differs from golden/rhms.sla.json",
    )?;
    let doc = parse(&golden, Format::Json, &reg)
        .map_err(|e| e.to_string())?
        .document;
    expect(doc.sla_type == SlaType::Request, "not a request")?;
    let rt = doc
        .slos
        .iter()
        .find(|c| c.metric == "Response Time")
        .ok_or("no application Response Time SLO")?;
    expect(
        rt.priority == Some(Priority::High)
            && rt.comparator == Comparator::Lt
            && rt.value == ConstraintValue::Number(5.0)
            && rt.unit.as_deref() == Some("minutes"),
        "Response Time is not 'high lt 5 minutes'",
    )?;
    let mapping: Vec<(ServiceKind, ResourceKind)> = doc
        .activities
        .iter()
        .map(|a| (a.service.kind, a.resource.kind))
        .collect();
    expect(
        mapping
            == [
                (ServiceKind::Sensing, ResourceKind::IotDevice),
                (ServiceKind::Ingestion, ResourceKind::Edge),
                (ServiceKind::StreamProcessing, ResourceKind::Cloud),
                (ServiceKind::DatabaseNosql, ResourceKind::Cloud),
            ],
        "activity mappings differ",
    )?;
    let sensing = &doc.activities[0].service;
    expect(
        sensing.slos.iter().any(|c| c.metric == "Data Freshness"),
        "sensing lacks a Data Freshness SLO",
    )?;
    expect(
        sensing
            .configuration
            .iter()
            .any(|c| c.metric == "Measurement Collection Interval"),
        "sensing lacks a Measurement Collection Interval configuration",
    )?;
    Ok(format!(
        "golden match, {} activities checked",
        doc.activities.len()
    ))
}
