//! Canonical JSON form of an SLA document (`.sla.json`).
//!
//! ```json
//! {
//!   "formatVersion": "1.0",
//!   "sla": {
//!     "id": "rhms-request",
//!     "description": "",
//!     "type": "request",
//!     "applicationType": "smart health",
//!     "startDate": "2025-01-01",
//!     "endDate": "2026-01-01",
//!     "parties": [],
//!     "slos": [ { "metric": "Response Time", "kind": "performance", "priority": "high",
//!                 "comparator": "lt", "value": 5, "unit": "minutes" } ],
//!     "workflowActivities": []
//!   }
//! }
//! ```
//!
//! [`to_json`] emits keys in the fixed order above with 2-space indentation.
//! [`from_json`] accepts any key order but rejects unknown keys.

use std::collections::HashMap;
use std::str::FromStr;

use chrono::NaiveDate;
use serde_json::{Map, Number, Value as Json};

use crate::diagnostic::{Code, Diagnostic, Diagnostics, SourceSpan};
use crate::model::*;
use crate::vocabulary::{MetricKind, ResourceKind, ServiceKind, VocabularyRegistry};

pub const FORMAT_VERSION: &str = "1.0";

/// Largest integer below which every integer is exactly representable in f64.
const MAX_SAFE_INTEGER: f64 = 9_007_199_254_740_992.0;

fn number(n: f64) -> Json {
    if n.fract() == 0.0 && n.abs() < MAX_SAFE_INTEGER {
        Json::Number(Number::from(n as i64))
    } else {
        Number::from_f64(n).map_or(Json::Null, Json::Number)
    }
}

fn strings(items: &[String]) -> Json {
    Json::Array(items.iter().cloned().map(Json::String).collect())
}

fn constraint_json(c: &Constraint) -> Json {
    let mut m = Map::new();
    m.insert("metric".into(), c.metric.clone().into());
    m.insert("kind".into(), c.kind.as_str().into());
    if let Some(p) = c.priority {
        m.insert("priority".into(), p.as_str().into());
    }
    m.insert("comparator".into(), c.comparator.as_str().into());
    let value = match &c.value {
        Value::Number(n) => number(*n),
        Value::Bool(b) => Json::Bool(*b),
        Value::Text(s) => Json::String(s.clone()),
    };
    m.insert("value".into(), value);
    if let Some(u) = &c.unit {
        m.insert("unit".into(), u.clone().into());
    }
    Json::Object(m)
}

fn spec_json(kind: &str, slos: &[Constraint], configuration: &[Constraint]) -> Json {
    let mut m = Map::new();
    m.insert("kind".into(), kind.into());
    m.insert("slos".into(), slos.iter().map(constraint_json).collect());
    m.insert(
        "configuration".into(),
        configuration.iter().map(constraint_json).collect(),
    );
    Json::Object(m)
}

/// Canonical document tree; [`to_json`] is its pretty-printed form.
pub fn to_value(doc: &SlaDocument) -> Json {
    let mut sla = Map::new();
    sla.insert("id".into(), doc.id.clone().into());
    if let Some(name) = &doc.name {
        sla.insert("name".into(), name.clone().into());
    }
    sla.insert("description".into(), doc.description.clone().into());
    sla.insert("type".into(), doc.sla_type.as_str().into());
    sla.insert(
        "applicationType".into(),
        doc.application_type.clone().into(),
    );
    sla.insert(
        "startDate".into(),
        doc.start_date.format("%Y-%m-%d").to_string().into(),
    );
    sla.insert(
        "endDate".into(),
        doc.end_date.format("%Y-%m-%d").to_string().into(),
    );
    let parties = doc
        .parties
        .iter()
        .map(|p| {
            let mut m = Map::new();
            m.insert("id".into(), p.id.clone().into());
            m.insert("name".into(), p.name.clone().into());
            m.insert("roles".into(), strings(&p.roles));
            Json::Object(m)
        })
        .collect();
    sla.insert("parties".into(), Json::Array(parties));
    sla.insert(
        "slos".into(),
        doc.slos.iter().map(constraint_json).collect(),
    );
    let activities = doc
        .activities
        .iter()
        .map(|a| {
            let mut m = Map::new();
            m.insert("id".into(), a.id.clone().into());
            m.insert("name".into(), a.name.clone().into());
            m.insert("dependsOn".into(), strings(&a.depends_on));
            m.insert(
                "requiredService".into(),
                spec_json(
                    a.service.kind.as_str(),
                    &a.service.slos,
                    &a.service.configuration,
                ),
            );
            m.insert(
                "infrastructureResource".into(),
                spec_json(
                    a.resource.kind.as_str(),
                    &a.resource.slos,
                    &a.resource.configuration,
                ),
            );
            Json::Object(m)
        })
        .collect();
    sla.insert("workflowActivities".into(), Json::Array(activities));

    let mut root = Map::new();
    root.insert("formatVersion".into(), FORMAT_VERSION.into());
    root.insert("sla".into(), Json::Object(sla));
    Json::Object(root)
}

/// Canonical bytes: fixed key order, 2-space indentation, integral numbers
/// without a fraction, trailing newline.
pub fn to_json(doc: &SlaDocument) -> String {
    let mut out = serde_json::to_string_pretty(&to_value(doc)).expect("document tree serializes");
    out.push('\n');
    out
}

/// Rewrites a model path (`activities[1].service.kind`) into the JSON
/// document's terms (`sla.workflowActivities[1].requiredService.kind`).
pub fn json_path(model_path: &str) -> String {
    let mut out = String::from("sla");
    for seg in model_path.split('.').filter(|s| !s.is_empty()) {
        let (key, index) = match seg.find('[') {
            Some(i) => seg.split_at(i),
            None => (seg, ""),
        };
        let key = match key {
            "activities" => "workflowActivities",
            "service" => "requiredService",
            "resource" => "infrastructureResource",
            other => other,
        };
        out.push('.');
        out.push_str(key);
        out.push_str(index);
    }
    out
}

/// Parses, schema-checks and validates a JSON document. Diagnostics carry
/// JSON paths (`sla.slos[0].unit`) and spans into `text`.
pub fn from_json(text: &str, registry: &VocabularyRegistry) -> Result<Validated, Diagnostics> {
    let tree: Json = serde_json::from_str(text).map_err(|e| {
        let line = e.line().max(1) as u32;
        let col = e.column().max(1) as u32;
        let byte = byte_offset(text, line, col);
        Diagnostics(vec![Diagnostic::error(
            Code::JsonSyntax,
            strip_position(&e),
        )
        .with_span(SourceSpan::point(line, col, byte))])
    })?;
    let positions = locate(text);
    let attach = |mut d: Diagnostic| {
        if d.span.is_none() {
            d.span = d.path.as_deref().and_then(|p| positions.lookup(p));
        }
        d
    };
    let mut reader = Reader::default();
    let parts = reader.document(&tree);
    if !reader.diagnostics.is_empty() {
        return Err(Diagnostics(
            reader.diagnostics.into_iter().map(attach).collect(),
        ));
    }
    let parts = parts.expect("schema walk without diagnostics yields parts");
    let relocate = |mut d: Diagnostic| {
        d.path = d.path.map(|p| json_path(&p));
        attach(d)
    };
    match build_document(parts, registry) {
        Ok(mut v) => {
            v.warnings = v.warnings.into_iter().map(relocate).collect();
            Ok(v)
        }
        Err(Diagnostics(ds)) => Err(Diagnostics(ds.into_iter().map(relocate).collect())),
    }
}

fn strip_position(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg,
    }
}

fn byte_offset(text: &str, line: u32, col: u32) -> usize {
    let mut offset = 0;
    for (i, l) in text.split_inclusive('\n').enumerate() {
        if i + 1 == line as usize {
            return offset
                + l.char_indices()
                    .nth(col as usize - 1)
                    .map_or(l.len(), |(b, _)| b);
        }
        offset += l.len();
    }
    text.len()
}

fn member(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn json_type(v: &Json) -> &'static str {
    match v {
        Json::Null => "null",
        Json::Bool(_) => "boolean",
        Json::Number(_) => "number",
        Json::String(_) => "string",
        Json::Array(_) => "array",
        Json::Object(_) => "object",
    }
}

/// Closed-schema walk. Returns `None` where a value is unusable; every
/// `None` is accompanied by a diagnostic.
#[derive(Default)]
struct Reader {
    diagnostics: Vec<Diagnostic>,
}

impl Reader {
    fn error(&mut self, code: Code, path: &str, message: String) {
        self.diagnostics
            .push(Diagnostic::error(code, message).at(path));
    }

    fn object<'j>(
        &mut self,
        v: &'j Json,
        path: &str,
        required: &[&str],
        optional: &[&str],
    ) -> Option<&'j Map<String, Json>> {
        let Some(m) = v.as_object() else {
            self.type_error(v, path, "object");
            return None;
        };
        for key in m.keys() {
            if !required.contains(&key.as_str()) && !optional.contains(&key.as_str()) {
                let mut known: Vec<&str> = required.iter().chain(optional).copied().collect();
                known.sort_unstable();
                self.error(
                    Code::SchemaUnknownKey,
                    &member(path, key),
                    format!("unknown key '{key}' (allowed: {})", known.join(", ")),
                );
            }
        }
        let mut ok = true;
        for key in required {
            if !m.contains_key(*key) {
                self.error(
                    Code::SchemaMissingKey,
                    path,
                    format!("missing required key '{key}'"),
                );
                ok = false;
            }
        }
        ok.then_some(m)
    }

    fn type_error(&mut self, v: &Json, path: &str, expected: &str) {
        self.error(
            Code::SchemaType,
            path,
            format!("expected {expected}, found {}", json_type(v)),
        );
    }

    fn string(&mut self, v: &Json, path: &str) -> Option<String> {
        match v {
            Json::String(s) => Some(s.clone()),
            other => {
                self.type_error(other, path, "string");
                None
            }
        }
    }

    fn keyword<K: FromStr<Err = crate::keyword::UnknownKeyword>>(
        &mut self,
        v: &Json,
        path: &str,
    ) -> Option<K> {
        let s = self.string(v, path)?;
        match s.parse() {
            Ok(k) => Some(k),
            Err(e) => {
                let expected: Vec<&str> = e.expected().collect();
                self.error(
                    Code::SchemaEnum,
                    path,
                    format!("'{s}' is not one of: {}", expected.join(", ")),
                );
                None
            }
        }
    }

    fn date(&mut self, v: &Json, path: &str) -> Option<NaiveDate> {
        let s = self.string(v, path)?;
        let parsed = (s.len() == 10)
            .then(|| NaiveDate::parse_from_str(&s, "%Y-%m-%d").ok())
            .flatten();
        if parsed.is_none() {
            self.error(
                Code::InvalidDate,
                path,
                format!("'{s}' is not a calendar date (YYYY-MM-DD)"),
            );
        }
        parsed
    }

    fn array<'j>(&mut self, v: Option<&'j Json>, path: &str) -> Option<&'j [Json]> {
        match v {
            None => Some(&[]),
            Some(Json::Array(items)) => Some(items),
            Some(other) => {
                self.type_error(other, path, "array");
                None
            }
        }
    }

    fn list<T>(
        &mut self,
        v: Option<&Json>,
        path: &str,
        mut item: impl FnMut(&mut Self, &Json, &str) -> Option<T>,
    ) -> Option<Vec<T>> {
        let items = self.array(v, path)?;
        let mut out = Some(Vec::with_capacity(items.len()));
        for (i, v) in items.iter().enumerate() {
            let parsed = item(self, v, &format!("{path}[{i}]"));
            out = out.zip(parsed).map(|(mut acc, x)| {
                acc.push(x);
                acc
            });
        }
        out
    }

    fn document(&mut self, root: &Json) -> Option<SlaParts> {
        let m = self.object(root, "", &["formatVersion", "sla"], &[])?;
        let version = self.string(&m["formatVersion"], "formatVersion");
        if let Some(v) = &version {
            if v != FORMAT_VERSION {
                self.error(
                    Code::UnsupportedVersion,
                    "formatVersion",
                    format!("unsupported format version '{v}' (expected {FORMAT_VERSION})"),
                );
            }
        }
        self.sla(&m["sla"])
    }

    fn sla(&mut self, v: &Json) -> Option<SlaParts> {
        let m = self.object(
            v,
            "sla",
            &[
                "id",
                "type",
                "applicationType",
                "startDate",
                "endDate",
                "slos",
            ],
            &["name", "description", "parties", "workflowActivities"],
        )?;
        let id = self.string(&m["id"], "sla.id");
        let name = match m.get("name") {
            Some(n) => self.string(n, "sla.name").map(Some),
            None => Some(None),
        };
        let description = match m.get("description") {
            Some(d) => self.string(d, "sla.description"),
            None => Some(String::new()),
        };
        let sla_type = self.keyword::<SlaType>(&m["type"], "sla.type");
        let application_type = self.string(&m["applicationType"], "sla.applicationType");
        let start_date = self.date(&m["startDate"], "sla.startDate");
        let end_date = self.date(&m["endDate"], "sla.endDate");
        let parties = self.list(m.get("parties"), "sla.parties", Self::party);
        let slos = self.list(m.get("slos"), "sla.slos", Self::constraint);
        let activities = self.list(
            m.get("workflowActivities"),
            "sla.workflowActivities",
            Self::activity,
        );
        Some(SlaParts {
            id: id?,
            name: name?,
            description: description?,
            sla_type: sla_type?,
            application_type: application_type?,
            start_date: start_date?,
            end_date: end_date?,
            parties: parties?,
            slos: slos?,
            activities: activities?,
        })
    }

    fn party(&mut self, v: &Json, path: &str) -> Option<Party> {
        let m = self.object(v, path, &["id", "name", "roles"], &[])?;
        let id = self.string(&m["id"], &format!("{path}.id"));
        let name = self.string(&m["name"], &format!("{path}.name"));
        let roles = self.list(Some(&m["roles"]), &format!("{path}.roles"), Self::string);
        Some(Party {
            id: id?,
            name: name?,
            roles: roles?,
        })
    }

    fn activity(&mut self, v: &Json, path: &str) -> Option<WorkflowActivity> {
        let m = self.object(
            v,
            path,
            &["id", "name", "requiredService", "infrastructureResource"],
            &["dependsOn"],
        )?;
        let id = self.string(&m["id"], &format!("{path}.id"));
        let name = self.string(&m["name"], &format!("{path}.name"));
        let depends_on = self.list(
            m.get("dependsOn"),
            &format!("{path}.dependsOn"),
            Self::string,
        );
        let service =
            self.spec::<ServiceKind>(&m["requiredService"], &format!("{path}.requiredService"));
        let resource = self.spec::<ResourceKind>(
            &m["infrastructureResource"],
            &format!("{path}.infrastructureResource"),
        );
        let (service_kind, service_slos, service_config) = service?;
        let (resource_kind, resource_slos, resource_config) = resource?;
        Some(WorkflowActivity {
            id: id?,
            name: name?,
            depends_on: depends_on?,
            service: ServiceSpec {
                kind: service_kind,
                slos: service_slos,
                configuration: service_config,
            },
            resource: ResourceSpec {
                kind: resource_kind,
                slos: resource_slos,
                configuration: resource_config,
            },
        })
    }

    fn spec<K: FromStr<Err = crate::keyword::UnknownKeyword>>(
        &mut self,
        v: &Json,
        path: &str,
    ) -> Option<(K, Vec<Constraint>, Vec<Constraint>)> {
        let m = self.object(v, path, &["kind"], &["slos", "configuration"])?;
        let kind = self.keyword::<K>(&m["kind"], &format!("{path}.kind"));
        let slos = self.list(m.get("slos"), &format!("{path}.slos"), Self::constraint);
        let configuration = self.list(
            m.get("configuration"),
            &format!("{path}.configuration"),
            Self::constraint,
        );
        Some((kind?, slos?, configuration?))
    }

    fn constraint(&mut self, v: &Json, path: &str) -> Option<Constraint> {
        let m = self.object(
            v,
            path,
            &["metric", "kind", "value"],
            &["priority", "comparator", "unit"],
        )?;
        let metric = self.string(&m["metric"], &format!("{path}.metric"));
        let kind = self.keyword::<MetricKind>(&m["kind"], &format!("{path}.kind"));
        let priority = match m.get("priority") {
            Some(p) => self
                .keyword::<Priority>(p, &format!("{path}.priority"))
                .map(Some),
            None => Some(None),
        };
        let comparator = match m.get("comparator") {
            Some(c) => self
                .keyword::<Comparator>(c, &format!("{path}.comparator"))
                .map(Some),
            None => Some(None),
        };
        let value = match &m["value"] {
            Json::Number(n) => n.as_f64().map(Value::Number),
            Json::Bool(b) => Some(Value::Bool(*b)),
            Json::String(s) => Some(Value::Text(s.clone())),
            other => {
                self.type_error(other, &format!("{path}.value"), "number, boolean or string");
                None
            }
        };
        let unit = match m.get("unit") {
            Some(u) => self.string(u, &format!("{path}.unit")).map(Some),
            None => Some(None),
        };
        let kind = kind?;
        let (priority, comparator) = (priority?, comparator?);
        let numeric = matches!(kind, MetricKind::Performance | MetricKind::Numerical);
        if kind == MetricKind::Performance && priority.is_none() {
            self.error(
                Code::SchemaMissingKey,
                path,
                "missing required key 'priority' (required for performance metrics)".into(),
            );
            return None;
        }
        if numeric && comparator.is_none() {
            self.error(
                Code::SchemaMissingKey,
                path,
                format!("missing required key 'comparator' (required for {kind} metrics)"),
            );
            return None;
        }
        Some(Constraint {
            metric: metric?,
            kind,
            priority,
            comparator: comparator.unwrap_or(Comparator::Eq),
            value: value?,
            unit: unit?,
        })
    }
}

/// Source positions of the members and elements of a JSON text, keyed by
/// JSON path. An object member is located at its key, an array element at
/// its first character.
#[derive(Debug, Clone, Default)]
pub struct JsonPositions(HashMap<String, SourceSpan>);

impl JsonPositions {
    /// Span of `path`, falling back to the nearest recorded ancestor.
    pub fn lookup(&self, path: &str) -> Option<SourceSpan> {
        let mut p = path;
        loop {
            if let Some(span) = self.0.get(p) {
                return Some(*span);
            }
            match p.rfind(['.', '[']) {
                Some(i) => p = &p[..i],
                None => return self.0.get("").copied(),
            }
        }
    }
}

/// Scans well-formed JSON text and records the position of every value.
/// Malformed input yields whatever was recorded before the fault.
pub fn locate(text: &str) -> JsonPositions {
    let mut s = Scanner {
        src: text,
        pos: 0,
        line: 1,
        col: 1,
        out: HashMap::new(),
    };
    s.skip_ws();
    s.value(String::new(), None);
    JsonPositions(s.out)
}

struct Scanner<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
    out: HashMap<String, SourceSpan>,
}

impl Scanner<'_> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn here(&self) -> SourceSpan {
        SourceSpan::point(self.line, self.col, self.pos)
    }

    fn close(&self, start: SourceSpan) -> SourceSpan {
        SourceSpan {
            end_line: self.line,
            end_col: self.col,
            end_byte: self.pos,
            ..start
        }
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    /// `anchor` is the span of the member key when the value is an object
    /// member; the recorded span then runs from the key to the value's end.
    fn value(&mut self, path: String, anchor: Option<SourceSpan>) -> Option<()> {
        let start = anchor.unwrap_or_else(|| self.here());
        match self.peek()? {
            '{' => {
                self.bump();
                self.skip_ws();
                if self.peek() == Some('}') {
                    self.bump();
                } else {
                    loop {
                        self.skip_ws();
                        let key_span = self.here();
                        let key = self.string()?;
                        self.skip_ws();
                        if self.bump()? != ':' {
                            return None;
                        }
                        self.skip_ws();
                        self.value(member(&path, &key), Some(key_span))?;
                        self.skip_ws();
                        match self.bump()? {
                            ',' => continue,
                            '}' => break,
                            _ => return None,
                        }
                    }
                }
            }
            '[' => {
                self.bump();
                self.skip_ws();
                if self.peek() == Some(']') {
                    self.bump();
                } else {
                    let mut i = 0;
                    loop {
                        self.skip_ws();
                        self.value(format!("{path}[{i}]"), None)?;
                        i += 1;
                        self.skip_ws();
                        match self.bump()? {
                            ',' => continue,
                            ']' => break,
                            _ => return None,
                        }
                    }
                }
            }
            '"' => {
                self.string()?;
            }
            _ => {
                while self
                    .peek()
                    .is_some_and(|c| c.is_ascii_alphanumeric() || "+-.".contains(c))
                {
                    self.bump();
                }
            }
        }
        let span = self.close(start);
        self.out.insert(path, span);
        Some(())
    }

    fn string(&mut self) -> Option<String> {
        let begin = self.pos;
        if self.bump()? != '"' {
            return None;
        }
        loop {
            match self.bump()? {
                '"' => break,
                '\\' => {
                    self.bump()?;
                }
                _ => {}
            }
        }
        serde_json::from_str(&self.src[begin..self.pos]).ok()
    }
}
