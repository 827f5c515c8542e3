use std::collections::HashMap;

use chrono::NaiveDate;

use super::lexer::{Token, TokenKind};
use crate::diagnostic::{Code, Diagnostic, SourceSpan};
use crate::model::*;
use crate::vocabulary::{MetricKind, ResourceKind, ServiceKind, VocabularyRegistry};

/// Source spans of document elements, keyed by model path.
#[derive(Debug, Default, Clone)]
pub struct SpanMap(HashMap<String, SourceSpan>);

impl SpanMap {
    fn put(&mut self, path: impl Into<String>, span: SourceSpan) {
        self.0.insert(path.into(), span);
    }

    /// Span of `path`, or of its nearest recorded ancestor.
    pub fn lookup(&self, path: &str) -> Option<SourceSpan> {
        let mut p = path;
        loop {
            if let Some(s) = self.0.get(p) {
                return Some(*s);
            }
            if p.is_empty() {
                return None;
            }
            p = match p.rfind(['.', '[']) {
                Some(i) => &p[..i],
                None => "",
            };
        }
    }
}

/// Clause keywords that may follow a constraint; anything else in unit
/// position is taken as a unit symbol.
pub(crate) const CLAUSE_KEYWORDS: &[&str] = &[
    "sla",
    "type",
    "name",
    "description",
    "application",
    "start",
    "end",
    "party",
    "id",
    "roles",
    "slo",
    "priority",
    "config",
    "activity",
    "after",
    "service",
    "resource",
    "true",
    "false",
];

const COMPARATORS: &[&str] = &["'gt'", "'gte'", "'eq'", "'neq'", "'lt'", "'lte'"];

type PResult<T> = Result<T, Diagnostic>;

pub(crate) struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    registry: &'a VocabularyRegistry,
    pub spans: SpanMap,
}

impl<'a> Parser<'a> {
    pub fn new(tokens: Vec<Token>, registry: &'a VocabularyRegistry) -> Self {
        Parser {
            tokens,
            pos: 0,
            registry,
            spans: SpanMap::default(),
        }
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if !matches!(t.kind, TokenKind::Eof) {
            self.pos += 1;
        }
        t
    }

    fn prev_span(&self) -> Option<SourceSpan> {
        self.pos.checked_sub(1).map(|i| self.tokens[i].span)
    }

    /// Syntax error at the current token. The span starts at the end of the
    /// previous token so a missing token's line is always covered.
    fn unexpected(&self, expected: &[&str]) -> Diagnostic {
        let tok = self.peek();
        let span = match self.prev_span() {
            Some(prev) => SourceSpan {
                start_line: prev.end_line,
                start_col: prev.end_col,
                start_byte: prev.end_byte,
                ..tok.span
            },
            None => tok.span,
        };
        let mut d = Diagnostic::error(
            Code::SyntaxError,
            format!(
                "expected {}, found {}",
                expected.join(" or "),
                tok.kind.describe()
            ),
        )
        .with_span(span);
        d.expected = expected.iter().map(|s| s.to_string()).collect();
        d
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().kind, TokenKind::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> PResult<SourceSpan> {
        if self.is_keyword(kw) {
            Ok(self.advance().span)
        } else {
            Err(self.unexpected(&[&format!("'{kw}'")]))
        }
    }

    fn punct(&mut self, kind: TokenKind) -> PResult<SourceSpan> {
        if self.peek().kind == kind {
            Ok(self.advance().span)
        } else {
            Err(self.unexpected(&[&kind.describe()]))
        }
    }

    fn string(&mut self) -> PResult<(String, SourceSpan)> {
        match &self.peek().kind {
            TokenKind::Str(s) => {
                let s = s.clone();
                Ok((s, self.advance().span))
            }
            _ => Err(self.unexpected(&["string"])),
        }
    }

    /// One of a closed set of keywords parsed through `FromStr`.
    fn choice<T: std::str::FromStr>(&mut self, options: &[&str]) -> PResult<(T, SourceSpan)> {
        if let TokenKind::Ident(s) = &self.peek().kind {
            if let Ok(v) = s.parse::<T>() {
                return Ok((v, self.advance().span));
            }
        }
        Err(self.unexpected(options))
    }

    fn date(&mut self) -> PResult<(NaiveDate, SourceSpan)> {
        match &self.peek().kind {
            TokenKind::Date(text) => {
                let text = text.clone();
                let span = self.peek().span;
                match NaiveDate::parse_from_str(&text, "%Y-%m-%d") {
                    Ok(d) => {
                        self.advance();
                        Ok((d, span))
                    }
                    Err(_) => Err(Diagnostic::error(
                        Code::InvalidDate,
                        format!("'{text}' is not a calendar date"),
                    )
                    .with_span(span)),
                }
            }
            _ => Err(self.unexpected(&["date (YYYY-MM-DD)"])),
        }
    }

    pub fn parse_document(&mut self) -> PResult<SlaParts> {
        let sla_span = self.keyword("sla")?;
        let (id, id_span) = self.string()?;
        self.keyword("type")?;
        let (sla_type, _) = self.choice::<SlaType>(&["'offer'", "'request'"])?;
        let open = self.punct(TokenKind::LBrace)?;
        let header = sla_span.join(open);
        self.spans.put("", header);
        self.spans.put("id", id_span);
        self.spans.put("slos", header);
        self.spans.put("parties", header);

        let mut name = None;
        let mut description = None;
        let mut application = None;
        let mut start = None;
        let mut end = None;
        let mut parties = Vec::new();
        let mut slos = Vec::new();
        let mut activities = Vec::new();

        loop {
            let kw = match &self.peek().kind {
                TokenKind::Ident(s) => s.clone(),
                TokenKind::RBrace => break,
                _ => return Err(self.unexpected(ITEM_START)),
            };
            let kw_span = self.peek().span;
            match kw.as_str() {
                "name" | "description" | "application" => {
                    self.advance();
                    let (text, span) = self.string()?;
                    let (slot, path) = match kw.as_str() {
                        "name" => (&mut name, "name"),
                        "description" => (&mut description, "description"),
                        _ => (&mut application, "applicationType"),
                    };
                    set_once(slot, text, &kw, kw_span.join(span))?;
                    self.spans.put(path, kw_span.join(span));
                }
                "start" | "end" => {
                    self.advance();
                    let (d, span) = self.date()?;
                    let (slot, path) = if kw == "start" {
                        (&mut start, "startDate")
                    } else {
                        (&mut end, "endDate")
                    };
                    set_once(slot, d, &kw, kw_span.join(span))?;
                    self.spans.put(path, kw_span.join(span));
                }
                "party" => {
                    let path = format!("parties[{}]", parties.len());
                    parties.push(self.party(&path)?);
                }
                "slo" => {
                    let path = format!("slos[{}]", slos.len());
                    slos.push(self.constraint(&path, Section::Slo)?);
                }
                "activity" => {
                    let path = format!("activities[{}]", activities.len());
                    activities.push(self.activity(&path)?);
                }
                _ => return Err(self.unexpected(ITEM_START)),
            }
        }
        let close = self.advance().span;
        if !matches!(self.peek().kind, TokenKind::Eof) {
            return Err(self.unexpected(&["end of input"]));
        }

        let missing = |what: &str| {
            Diagnostic::error(
                Code::MissingClause,
                format!("sla block lacks the '{what}' clause"),
            )
            .with_span(header.join(close))
        };
        Ok(SlaParts {
            id,
            name,
            description: description.unwrap_or_default(),
            sla_type,
            application_type: application.ok_or_else(|| missing("application"))?,
            start_date: start.ok_or_else(|| missing("start"))?,
            end_date: end.ok_or_else(|| missing("end"))?,
            parties,
            slos,
            activities,
        })
    }

    fn party(&mut self, path: &str) -> PResult<Party> {
        let start = self.keyword("party")?;
        let (name, name_span) = self.string()?;
        self.keyword("id")?;
        let (id, id_span) = self.string()?;
        let roles_kw = self.keyword("roles")?;
        self.punct(TokenKind::LBracket)?;
        let mut roles = Vec::new();
        if self.peek().kind != TokenKind::RBracket {
            loop {
                let (role, span) = self.string()?;
                self.spans
                    .put(format!("{path}.roles[{}]", roles.len()), span);
                roles.push(role);
                if self.peek().kind == TokenKind::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        if self.peek().kind != TokenKind::RBracket {
            return Err(self.unexpected(&["','", "']'"]));
        }
        let close = self.advance().span;
        self.spans.put(path, start.join(close));
        self.spans.put(format!("{path}.name"), name_span);
        self.spans.put(format!("{path}.id"), id_span);
        self.spans
            .put(format!("{path}.roles"), roles_kw.join(close));
        Ok(Party { id, name, roles })
    }

    /// `slo` or `config` clause.
    fn constraint(&mut self, path: &str, section: Section) -> PResult<Constraint> {
        let start = match section {
            Section::Slo => self.keyword("slo")?,
            Section::Configuration => self.keyword("config")?,
        };
        let (metric, metric_span) = self.string()?;
        self.spans.put(format!("{path}.metric"), metric_span);
        let mut priority = None;
        if section == Section::Slo && self.is_keyword("priority") {
            let kw = self.advance().span;
            let (p, span) = self.choice::<Priority>(&["'high'", "'medium'", "'low'"])?;
            self.spans.put(format!("{path}.priority"), kw.join(span));
            priority = Some(p);
        }
        let expected: Vec<&str> = if section == Section::Slo && priority.is_none() {
            std::iter::once("'priority'")
                .chain(COMPARATORS.iter().copied())
                .collect()
        } else {
            COMPARATORS.to_vec()
        };
        let (comparator, cmp_span) = self.choice::<Comparator>(&expected)?;
        self.spans.put(format!("{path}.comparator"), cmp_span);

        let value_tok = self.peek().clone();
        let value = match &value_tok.kind {
            TokenKind::Number(n) => Value::Number(*n),
            TokenKind::Str(s) => Value::Text(s.clone()),
            TokenKind::Ident(s) if s == "true" => Value::Bool(true),
            TokenKind::Ident(s) if s == "false" => Value::Bool(false),
            _ => return Err(self.unexpected(&["number", "string", "'true'", "'false'"])),
        };
        self.advance();
        self.spans.put(format!("{path}.value"), value_tok.span);
        let mut end = value_tok.span;

        let mut unit = None;
        if matches!(value, Value::Number(_)) {
            let t = self.peek().clone();
            let symbol = match &t.kind {
                TokenKind::Percent => Some("%".to_string()),
                TokenKind::Str(s) => Some(s.clone()),
                TokenKind::Ident(s) if !CLAUSE_KEYWORDS.contains(&s.as_str()) => Some(s.clone()),
                _ => None,
            };
            if let Some(symbol) = symbol {
                self.advance();
                self.spans.put(format!("{path}.unit"), t.span);
                end = t.span;
                unit = Some(symbol);
            }
        }
        self.spans.put(path, start.join(end));

        let kind = match self.registry.metric(&metric) {
            Some(def) => def.kind,
            None => match (&value, section) {
                (Value::Bool(_), _) => MetricKind::Boolean,
                (Value::Text(_), _) => MetricKind::Type,
                (Value::Number(_), Section::Slo) => MetricKind::Performance,
                (Value::Number(_), Section::Configuration) => MetricKind::Numerical,
            },
        };
        Ok(Constraint {
            metric,
            kind,
            priority,
            comparator,
            value,
            unit,
        })
    }

    fn activity(&mut self, path: &str) -> PResult<WorkflowActivity> {
        let start = self.keyword("activity")?;
        let (id, id_span) = self.string()?;
        self.spans.put(format!("{path}.id"), id_span);
        let mut name = id.clone();
        if self.is_keyword("name") {
            let kw = self.advance().span;
            let (n, span) = self.string()?;
            self.spans.put(format!("{path}.name"), kw.join(span));
            name = n;
        } else {
            self.spans.put(format!("{path}.name"), id_span);
        }
        let mut depends_on = Vec::new();
        if self.is_keyword("after") {
            let kw = self.advance().span;
            loop {
                let (dep, span) = self.string()?;
                self.spans
                    .put(format!("{path}.dependsOn[{}]", depends_on.len()), span);
                depends_on.push(dep);
                if self.peek().kind == TokenKind::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
            let last = self.prev_span().unwrap_or(kw);
            self.spans.put(format!("{path}.dependsOn"), kw.join(last));
        }
        if self.peek().kind != TokenKind::LBrace {
            let mut expected = vec!["'{'"];
            if depends_on.is_empty() {
                expected.insert(0, "'after'");
            } else {
                expected.insert(0, "','");
            }
            return Err(self.unexpected(&expected));
        }
        let open = self.advance().span;
        let header = start.join(open);
        self.spans.put(path, header);
        if depends_on.is_empty() {
            self.spans.put(format!("{path}.dependsOn"), header);
        }

        let svc_kw = self.keyword("service")?;
        let (service_kind, kind_span) = self.choice::<ServiceKind>(SERVICE_KINDS)?;
        self.spans
            .put(format!("{path}.service"), svc_kw.join(kind_span));
        let (slos, configuration) = self.spec_body(&format!("{path}.service"))?;
        let service = ServiceSpec {
            kind: service_kind,
            slos,
            configuration,
        };

        let res_kw = self.keyword("resource")?;
        let (resource_kind, kind_span) = self.choice::<ResourceKind>(RESOURCE_KINDS)?;
        self.spans
            .put(format!("{path}.resource"), res_kw.join(kind_span));
        let (slos, configuration) = self.spec_body(&format!("{path}.resource"))?;
        let resource = ResourceSpec {
            kind: resource_kind,
            slos,
            configuration,
        };
        self.punct(TokenKind::RBrace)?;

        Ok(WorkflowActivity {
            id,
            name,
            depends_on,
            service,
            resource,
        })
    }

    fn spec_body(&mut self, path: &str) -> PResult<(Vec<Constraint>, Vec<Constraint>)> {
        self.punct(TokenKind::LBrace)?;
        let mut slos = Vec::new();
        let mut configuration = Vec::new();
        loop {
            if self.is_keyword("slo") {
                let p = format!("{path}.slos[{}]", slos.len());
                slos.push(self.constraint(&p, Section::Slo)?);
            } else if self.is_keyword("config") {
                let p = format!("{path}.configuration[{}]", configuration.len());
                configuration.push(self.constraint(&p, Section::Configuration)?);
            } else if self.peek().kind == TokenKind::RBrace {
                self.advance();
                return Ok((slos, configuration));
            } else {
                return Err(self.unexpected(&["'slo'", "'config'", "'}'"]));
            }
        }
    }
}

const ITEM_START: &[&str] = &[
    "'name'",
    "'description'",
    "'application'",
    "'start'",
    "'end'",
    "'party'",
    "'slo'",
    "'activity'",
    "'}'",
];

const SERVICE_KINDS: &[&str] = &[
    "'sensing'",
    "'networking'",
    "'ingestion'",
    "'stream_processing'",
    "'batch_processing'",
    "'machine_learning'",
    "'database_sql'",
    "'database_nosql'",
];

const RESOURCE_KINDS: &[&str] = &["'iot_device'", "'edge'", "'cloud'"];

fn set_once<T>(slot: &mut Option<T>, value: T, kw: &str, span: SourceSpan) -> PResult<()> {
    if slot.is_some() {
        return Err(Diagnostic::error(
            Code::DuplicateClause,
            format!("'{kw}' given more than once"),
        )
        .with_span(span));
    }
    *slot = Some(value);
    Ok(())
}
