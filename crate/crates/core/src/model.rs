//! In-memory SLA documents.
//!
//! [`SlaParts`] is plain, unchecked data produced by the front ends.
//! [`build_document`] validates a part-set against a [`VocabularyRegistry`] and
//! is the only way to obtain an [`SlaDocument`], so every document value in
//! the program satisfies the structural invariants below:
//!
//! * at least one application-level SLO;
//! * `start_date < end_date`;
//! * activity ids are unique, every `depends_on` entry names an existing
//!   activity, and the dependency relation is acyclic;
//! * every constraint resolves in the registry under its scope and carries a
//!   value, comparator, priority and unit consistent with its metric.
//!
//! Building also canonicalizes vocabulary spellings (metric names, roles,
//! catalog activity names and type values) to the registry's form.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet};
use std::fmt;
use std::ops::Deref;

use chrono::NaiveDate;

use crate::diagnostic::{Code, Diagnostic, Diagnostics};
use crate::keyword_enum;
use crate::vocabulary::{
    Dimension, MetricKind, ResourceKind, Scope, ServiceKind, VocabError, VocabularyRegistry,
};

keyword_enum!(
    SlaType {
        Offer => "offer",
        Request => "request",
    }
);

keyword_enum!(
    Priority {
        High => "high",
        Medium => "medium",
        Low => "low",
    }
);

keyword_enum!(
    /// Required level of a constraint. Each keyword stands for one of the
    /// grammar's English comparator phrases.
    Comparator {
        Gt => "gt",
        Gte => "gte",
        Eq => "eq",
        Neq => "neq",
        Lt => "lt",
        Lte => "lte",
    }
);

impl Comparator {
    /// The grammar's spelled-out form, e.g. `greater than or equal`.
    pub fn phrase(self) -> &'static str {
        match self {
            Comparator::Gt => "greater than",
            Comparator::Gte => "greater than or equal",
            Comparator::Eq => "equal",
            Comparator::Neq => "not equal",
            Comparator::Lt => "less than",
            Comparator::Lte => "less than or equal",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Bool(bool),
    Text(String),
}

impl Value {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Number(n) => Some(*n),
            _ => None,
        }
    }

    fn type_name(&self) -> &'static str {
        match self {
            Value::Number(_) => "number",
            Value::Bool(_) => "boolean",
            Value::Text(_) => "string",
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Text(s) => write!(f, "{s:?}"),
        }
    }
}

/// One metric requirement: an SLO or a configuration metric.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub metric: String,
    pub kind: MetricKind,
    pub priority: Option<Priority>,
    pub comparator: Comparator,
    pub value: Value,
    pub unit: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Party {
    pub id: String,
    pub name: String,
    pub roles: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceSpec {
    pub kind: ServiceKind,
    pub slos: Vec<Constraint>,
    pub configuration: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResourceSpec {
    pub kind: ResourceKind,
    pub slos: Vec<Constraint>,
    pub configuration: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkflowActivity {
    pub id: String,
    pub name: String,
    /// Ids of the activities this one runs after.
    pub depends_on: Vec<String>,
    pub service: ServiceSpec,
    pub resource: ResourceSpec,
}

/// Unvalidated document content.
#[derive(Debug, Clone, PartialEq)]
pub struct SlaParts {
    pub id: String,
    pub name: Option<String>,
    pub description: String,
    pub sla_type: SlaType,
    pub application_type: String,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub parties: Vec<Party>,
    /// Application-level SLOs.
    pub slos: Vec<Constraint>,
    pub activities: Vec<WorkflowActivity>,
}

/// A validated SLA. Read access goes through `Deref<Target = SlaParts>`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlaDocument(SlaParts);

impl Deref for SlaDocument {
    type Target = SlaParts;

    fn deref(&self) -> &SlaParts {
        &self.0
    }
}

impl SlaDocument {
    pub fn parts(&self) -> &SlaParts {
        &self.0
    }

    /// Gives the content back for editing; re-validate with [`build_document`].
    pub fn into_parts(self) -> SlaParts {
        self.0
    }
}

/// A successfully built document plus non-fatal findings.
#[derive(Debug, Clone, PartialEq)]
pub struct Validated {
    pub document: SlaDocument,
    pub warnings: Vec<Diagnostic>,
}

/// Which list a constraint sits in; decides the admissible metric kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Section {
    Slo,
    Configuration,
}

impl Section {
    pub fn key(self) -> &'static str {
        match self {
            Section::Slo => "slos",
            Section::Configuration => "configuration",
        }
    }

    fn admits(self, kind: MetricKind) -> bool {
        match self {
            Section::Slo => matches!(kind, MetricKind::Performance | MetricKind::Boolean),
            Section::Configuration => !matches!(kind, MetricKind::Performance),
        }
    }
}

pub fn build_document(
    parts: SlaParts,
    registry: &VocabularyRegistry,
) -> Result<Validated, Diagnostics> {
    let mut b = Builder {
        registry,
        diagnostics: Vec::new(),
    };
    let parts = b.check(parts);
    if b.diagnostics.iter().any(Diagnostic::is_error) {
        Err(Diagnostics(b.diagnostics))
    } else {
        Ok(Validated {
            document: SlaDocument(parts),
            warnings: b.diagnostics,
        })
    }
}

struct Builder<'r> {
    registry: &'r VocabularyRegistry,
    diagnostics: Vec<Diagnostic>,
}

impl Builder<'_> {
    fn error(&mut self, code: Code, path: impl Into<String>, message: impl Into<String>) {
        self.diagnostics
            .push(Diagnostic::error(code, message).at(path));
    }

    fn check(&mut self, mut parts: SlaParts) -> SlaParts {
        if parts.id.trim().is_empty() {
            self.error(Code::EmptyField, "id", "SLA id must not be empty");
        }
        if parts.application_type.trim().is_empty() {
            self.error(
                Code::EmptyField,
                "applicationType",
                "application type must not be empty",
            );
        }
        if parts.start_date >= parts.end_date {
            self.error(
                Code::DateOrder,
                "startDate",
                format!(
                    "start date {} must be before end date {}",
                    parts.start_date, parts.end_date
                ),
            );
        }

        self.check_parties(&mut parts.parties);

        if parts.slos.is_empty() {
            self.error(Code::MissingSlo, "slos", "SLA requires at least one SLO");
        }
        for (i, c) in parts.slos.iter_mut().enumerate() {
            self.check_constraint(c, Scope::Application, Section::Slo, &format!("slos[{i}]"));
        }

        self.check_activities(&mut parts.activities);
        parts
    }

    fn check_parties(&mut self, parties: &mut [Party]) {
        if parties.is_empty() {
            self.diagnostics
                .push(Diagnostic::warning(Code::NoParties, "SLA names no parties").at("parties"));
        }
        let mut seen = HashSet::new();
        for (i, party) in parties.iter_mut().enumerate() {
            if party.id.trim().is_empty() {
                self.error(
                    Code::EmptyField,
                    format!("parties[{i}].id"),
                    "party id must not be empty",
                );
            } else if !seen.insert(party.id.clone()) {
                self.error(
                    Code::DuplicateParty,
                    format!("parties[{i}].id"),
                    format!("duplicate party id '{}'", party.id),
                );
            }
            if party.name.trim().is_empty() {
                self.error(
                    Code::EmptyField,
                    format!("parties[{i}].name"),
                    "party name must not be empty",
                );
            }
            if party.roles.is_empty() {
                self.error(
                    Code::EmptyRoles,
                    format!("parties[{i}].roles"),
                    format!("party '{}' needs at least one role", party.name),
                );
            }
            for (j, role) in party.roles.iter_mut().enumerate() {
                match self.registry.role(role) {
                    Some(canonical) => *role = canonical.to_string(),
                    None => self.error(
                        Code::UnknownRole,
                        format!("parties[{i}].roles[{j}]"),
                        format!("unknown role '{role}'"),
                    ),
                }
            }
        }
    }

    fn check_activities(&mut self, activities: &mut [WorkflowActivity]) {
        let mut ids: HashMap<String, usize> = HashMap::new();
        for (i, a) in activities.iter().enumerate() {
            if a.id.trim().is_empty() {
                self.error(
                    Code::EmptyField,
                    format!("activities[{i}].id"),
                    "activity id must not be empty",
                );
            } else if ids.contains_key(&a.id) {
                self.error(
                    Code::DuplicateActivity,
                    format!("activities[{i}].id"),
                    format!("duplicate activity id '{}'", a.id),
                );
            } else {
                ids.insert(a.id.clone(), i);
            }
        }

        for (i, a) in activities.iter_mut().enumerate() {
            let base = format!("activities[{i}]");
            match self.registry.activity(&a.name) {
                Some(canonical) => a.name = canonical.to_string(),
                None if a.name.trim().is_empty() => self.error(
                    Code::EmptyField,
                    format!("{base}.name"),
                    "activity name must not be empty",
                ),
                None => self.diagnostics.push(
                    Diagnostic::warning(
                        Code::FreeFormActivity,
                        format!("activity name '{}' is not in the activity catalog", a.name),
                    )
                    .at(format!("{base}.name")),
                ),
            }
            let mut seen = HashSet::new();
            for (j, dep) in a.depends_on.iter().enumerate() {
                if !ids.contains_key(dep) {
                    self.error(
                        Code::DanglingDependency,
                        format!("{base}.dependsOn[{j}]"),
                        format!("activity '{}' depends on unknown activity '{dep}'", a.id),
                    );
                } else if !seen.insert(dep.as_str()) {
                    self.error(
                        Code::DuplicateDependency,
                        format!("{base}.dependsOn[{j}]"),
                        format!("activity '{}' lists '{dep}' twice", a.id),
                    );
                }
            }

            let service_scope = a.service.kind.scope();
            for (section, list) in [
                (Section::Slo, &mut a.service.slos),
                (Section::Configuration, &mut a.service.configuration),
            ] {
                for (k, c) in list.iter_mut().enumerate() {
                    let path = format!("{base}.service.{}[{k}]", section.key());
                    self.check_constraint(c, service_scope, section, &path);
                }
            }
            let resource_scope = a.resource.kind.scope();
            for (section, list) in [
                (Section::Slo, &mut a.resource.slos),
                (Section::Configuration, &mut a.resource.configuration),
            ] {
                for (k, c) in list.iter_mut().enumerate() {
                    let path = format!("{base}.resource.{}[{k}]", section.key());
                    self.check_constraint(c, resource_scope, section, &path);
                }
            }
        }

        for cycle in find_cycles(activities, &ids) {
            let first = *cycle.iter().min().expect("non-empty cycle");
            let pos = cycle.iter().position(|&n| n == first).unwrap();
            let mut names: Vec<String> = cycle[pos..]
                .iter()
                .chain(&cycle[..pos])
                .map(|&n| format!("'{}'", activities[n].id))
                .collect();
            names.push(format!("'{}'", activities[first].id));
            self.error(
                Code::DependencyCycle,
                format!("activities[{first}].dependsOn"),
                format!("dependency cycle: {}", names.join(" depends on ")),
            );
        }
    }

    fn check_constraint(&mut self, c: &mut Constraint, scope: Scope, section: Section, path: &str) {
        let def = match self.registry.resolve_metric(&c.metric, scope) {
            Ok(def) => def,
            Err(e) => {
                let code = match e {
                    VocabError::UnknownMetric { .. } => Code::UnknownMetric,
                    VocabError::ScopeMismatch { .. } => Code::ScopeMismatch,
                };
                self.error(code, format!("{path}.metric"), e.to_string());
                return;
            }
        };
        c.metric = def.name.clone();

        if c.kind != def.kind {
            self.error(
                Code::KindMismatch,
                format!("{path}.kind"),
                format!("metric '{}' is {}, not {}", def.name, def.kind, c.kind),
            );
            return;
        }
        if !section.admits(def.kind) {
            self.error(
                Code::MisplacedConstraint,
                path,
                format!(
                    "{} metric '{}' cannot appear in {}",
                    def.kind,
                    def.name,
                    section.key()
                ),
            );
            return;
        }

        match (def.kind, c.priority) {
            (MetricKind::Performance, None) => self.error(
                Code::MissingPriority,
                format!("{path}.priority"),
                format!("performance metric '{}' needs a priority", def.name),
            ),
            (MetricKind::Performance, Some(_)) | (_, None) => {}
            (kind, Some(_)) => self.error(
                Code::UnexpectedPriority,
                format!("{path}.priority"),
                format!("{kind} metric '{}' takes no priority", def.name),
            ),
        }

        if matches!(def.kind, MetricKind::Boolean | MetricKind::Type)
            && c.comparator != Comparator::Eq
        {
            self.error(
                Code::InvalidComparator,
                format!("{path}.comparator"),
                format!("{} metric '{}' only admits eq", def.kind, def.name),
            );
        }

        let value_ok = match (def.kind, &mut c.value) {
            (MetricKind::Boolean, Value::Bool(_)) => true,
            (MetricKind::Type, Value::Text(text)) => {
                let allowed = def.allowed_values.as_deref().unwrap_or_default();
                let key = crate::vocabulary::normalize_name(text);
                match allowed
                    .iter()
                    .find(|v| crate::vocabulary::normalize_name(v) == key)
                {
                    Some(canonical) => *text = canonical.clone(),
                    None => self.error(
                        Code::DisallowedValue,
                        format!("{path}.value"),
                        format!(
                            "'{text}' is not an allowed value of '{}' (allowed: {})",
                            def.name,
                            allowed.join(", ")
                        ),
                    ),
                }
                true
            }
            (MetricKind::Performance | MetricKind::Numerical, Value::Number(n)) => {
                if *n == 0.0 {
                    // -0 would print as "-0", which the DSL cannot read back.
                    *n = 0.0;
                }
                if !n.is_finite() || *n < 0.0 {
                    self.error(
                        Code::ValueRange,
                        format!("{path}.value"),
                        format!("value {n} must be a finite number >= 0"),
                    );
                }
                true
            }
            (kind, v) => {
                let expected = match kind {
                    MetricKind::Boolean => "boolean",
                    MetricKind::Type => "string",
                    _ => "number",
                };
                let msg = format!(
                    "metric '{}' expects a {expected} value, got {}",
                    def.name,
                    v.type_name()
                );
                self.error(Code::ValueType, format!("{path}.value"), msg);
                false
            }
        };

        let unit_path = format!("{path}.unit");
        match (&c.unit, def.dimension) {
            (Some(u), _) if matches!(def.kind, MetricKind::Boolean | MetricKind::Type) => self
                .error(
                    Code::UnexpectedUnit,
                    unit_path,
                    format!(
                        "{} metric '{}' takes no unit (got '{u}')",
                        def.kind, def.name
                    ),
                ),
            (Some(u), Dimension::Dimensionless) => self.error(
                Code::UnexpectedUnit,
                unit_path,
                format!(
                    "dimensionless metric '{}' takes no unit (got '{u}')",
                    def.name
                ),
            ),
            (Some(symbol), dim) => match self.registry.unit(symbol) {
                None => self.error(
                    Code::UnknownUnit,
                    unit_path,
                    format!("unknown unit '{symbol}'"),
                ),
                Some(unit) if unit.dimension != dim => self.error(
                    Code::UnitDimension,
                    unit_path,
                    format!(
                        "unit '{symbol}' measures {}, but '{}' is {dim}",
                        unit.dimension, def.name
                    ),
                ),
                Some(unit) => {
                    if value_ok && dim == Dimension::Percentage {
                        if let Some(n) = c.value.as_number() {
                            self.check_percentage(
                                crate::vocabulary::normalize(n, unit).value,
                                path,
                            );
                        }
                    }
                }
            },
            (None, dim) => {
                if matches!(def.kind, MetricKind::Performance | MetricKind::Numerical)
                    && dim.unit_required()
                {
                    self.error(
                        Code::MissingUnit,
                        unit_path,
                        format!("'{}' is measured in {dim} and needs a unit", def.name),
                    );
                } else if value_ok && dim == Dimension::Percentage {
                    if let Some(n) = c.value.as_number() {
                        self.check_percentage(n, path);
                    }
                }
            }
        }
    }

    fn check_percentage(&mut self, percent: f64, path: &str) {
        if percent > 100.0 {
            self.error(
                Code::PercentageRange,
                format!("{path}.value"),
                format!("percentage {percent} lies outside [0, 100]"),
            );
        }
    }
}

/// Returns each dependency cycle as a list of activity indices, where every
/// element depends on the next and the last depends on the first.
fn find_cycles(activities: &[WorkflowActivity], ids: &HashMap<String, usize>) -> Vec<Vec<usize>> {
    let n = activities.len();
    let preds: Vec<Vec<usize>> = activities
        .iter()
        .map(|a| {
            a.depends_on
                .iter()
                .filter_map(|d| ids.get(d).copied())
                .collect()
        })
        .collect();

    // Kahn pass: anything left over lies on or downstream of a cycle.
    let mut succs = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    for (i, ps) in preds.iter().enumerate() {
        for &p in ps {
            succs[p].push(i);
            indeg[i] += 1;
        }
    }
    let mut queue: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    while let Some(u) = queue.pop() {
        for &v in &succs[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                queue.push(v);
            }
        }
    }
    let mut remaining: BTreeSet<usize> = (0..n).filter(|&i| indeg[i] > 0).collect();

    let mut cycles = Vec::new();
    while let Some(&start) = remaining.iter().next() {
        let mut trail = vec![start];
        let mut pos_in_trail = HashMap::from([(start, 0usize)]);
        let mut cur = start;
        loop {
            match preds[cur].iter().find(|p| remaining.contains(p)) {
                None => {
                    // `cur` only hangs off already-reported cycles.
                    remaining.remove(&cur);
                    break;
                }
                Some(&p) => {
                    if let Some(&at) = pos_in_trail.get(&p) {
                        let cycle = trail[at..].to_vec();
                        for c in &cycle {
                            remaining.remove(c);
                        }
                        cycles.push(cycle);
                        break;
                    }
                    pos_in_trail.insert(p, trail.len());
                    trail.push(p);
                    cur = p;
                }
            }
        }
    }
    cycles
}

/// Dependency-respecting order of activity ids; among ready activities the
/// smallest id goes first.
pub fn topological_order(doc: &SlaDocument) -> Vec<String> {
    let acts = &doc.activities;
    let index: HashMap<&str, usize> = acts
        .iter()
        .enumerate()
        .map(|(i, a)| (a.id.as_str(), i))
        .collect();
    let mut succs = vec![Vec::new(); acts.len()];
    let mut indeg = vec![0usize; acts.len()];
    for (i, a) in acts.iter().enumerate() {
        for d in &a.depends_on {
            succs[index[d.as_str()]].push(i);
            indeg[i] += 1;
        }
    }
    let mut ready: BinaryHeap<Reverse<(&str, usize)>> = acts
        .iter()
        .enumerate()
        .filter(|(i, _)| indeg[*i] == 0)
        .map(|(i, a)| Reverse((a.id.as_str(), i)))
        .collect();
    let mut order = Vec::with_capacity(acts.len());
    while let Some(Reverse((id, u))) = ready.pop() {
        order.push(id.to_string());
        for &v in &succs[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                ready.push(Reverse((acts[v].id.as_str(), v)));
            }
        }
    }
    debug_assert_eq!(order.len(), acts.len(), "validated documents are acyclic");
    order
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScopeFilter {
    All,
    Only(Scope),
}

impl ScopeFilter {
    fn admits(self, scope: Scope) -> bool {
        match self {
            ScopeFilter::All => true,
            ScopeFilter::Only(s) => s == scope,
        }
    }
}

/// Where a collected constraint lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Application,
    Service { activity: usize, section: Section },
    Resource { activity: usize, section: Section },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Located<'d> {
    pub path: String,
    pub scope: Scope,
    pub location: Location,
    pub constraint: &'d Constraint,
}

/// Every constraint whose scope passes `filter`, in document order:
/// application SLOs first, then per activity the service SLOs, service
/// configuration, resource SLOs and resource configuration.
pub fn collect_constraints(doc: &SlaDocument, filter: ScopeFilter) -> Vec<Located<'_>> {
    let mut out = Vec::new();
    if filter.admits(Scope::Application) {
        for (k, c) in doc.slos.iter().enumerate() {
            out.push(Located {
                path: format!("slos[{k}]"),
                scope: Scope::Application,
                location: Location::Application,
                constraint: c,
            });
        }
    }
    for (i, a) in doc.activities.iter().enumerate() {
        let scope = a.service.kind.scope();
        if filter.admits(scope) {
            for (section, list) in [
                (Section::Slo, &a.service.slos),
                (Section::Configuration, &a.service.configuration),
            ] {
                for (k, c) in list.iter().enumerate() {
                    out.push(Located {
                        path: format!("activities[{i}].service.{}[{k}]", section.key()),
                        scope,
                        location: Location::Service {
                            activity: i,
                            section,
                        },
                        constraint: c,
                    });
                }
            }
        }
        let scope = a.resource.kind.scope();
        if filter.admits(scope) {
            for (section, list) in [
                (Section::Slo, &a.resource.slos),
                (Section::Configuration, &a.resource.configuration),
            ] {
                for (k, c) in list.iter().enumerate() {
                    out.push(Located {
                        path: format!("activities[{i}].resource.{}[{k}]", section.key()),
                        scope,
                        location: Location::Resource {
                            activity: i,
                            section,
                        },
                        constraint: c,
                    });
                }
            }
        }
    }
    out
}
