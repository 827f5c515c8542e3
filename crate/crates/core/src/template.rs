//! DSL skeletons for new SLAs.
//!
//! | activity                                        | service           | resource   |
//! |-------------------------------------------------|-------------------|------------|
//! | Capture event of interest(EoI), Capture EoI     | sensing           | iot_device |
//! | Examine the captured (EoI) on fly, ... EoI      | ingestion         | edge       |
//! | Actuate based on the captured event's value     | networking        | iot_device |
//! | Analyze real-time data                          | stream_processing | cloud      |
//! | Analyze historical data                         | batch_processing  | cloud      |
//! | Store Unstructured Data, Store results          | database_nosql    | cloud      |
//! | anything else (warning)                         | stream_processing | cloud      |

use crate::diagnostic::{Code, Diagnostic, Diagnostics};
use crate::dsl::print_text;
use crate::model::*;
use crate::vocabulary::{
    normalize_name, MetricKind, ResourceKind, Scope, ServiceKind, VocabularyRegistry,
};

pub const DEFAULT_MAPPING: &[(&str, ServiceKind, ResourceKind)] = &[
    (
        "Capture event of interest(EoI)",
        ServiceKind::Sensing,
        ResourceKind::IotDevice,
    ),
    ("Capture EoI", ServiceKind::Sensing, ResourceKind::IotDevice),
    (
        "Examine the captured (EoI) on fly",
        ServiceKind::Ingestion,
        ResourceKind::Edge,
    ),
    (
        "Examine the captured EoI",
        ServiceKind::Ingestion,
        ResourceKind::Edge,
    ),
    (
        "Actuate based on the captured event's value",
        ServiceKind::Networking,
        ResourceKind::IotDevice,
    ),
    (
        "Analyze real-time data",
        ServiceKind::StreamProcessing,
        ResourceKind::Cloud,
    ),
    (
        "Analyze historical data",
        ServiceKind::BatchProcessing,
        ResourceKind::Cloud,
    ),
    (
        "Store Unstructured Data",
        ServiceKind::DatabaseNosql,
        ResourceKind::Cloud,
    ),
    (
        "Store results",
        ServiceKind::DatabaseNosql,
        ResourceKind::Cloud,
    ),
];

pub const FALLBACK_MAPPING: (ServiceKind, ResourceKind) =
    (ServiceKind::StreamProcessing, ResourceKind::Cloud);

/// The default (service, resource) for an activity name, if it has one.
pub fn default_mapping(activity: &str) -> Option<(ServiceKind, ResourceKind)> {
    let key = normalize_name(activity);
    DEFAULT_MAPPING
        .iter()
        .find(|(name, _, _)| normalize_name(name) == key)
        .map(|&(_, s, r)| (s, r))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub text: String,
    pub warnings: Vec<Diagnostic>,
}

fn slug(name: &str, taken: &[String]) -> String {
    let mut s = String::new();
    for c in name.chars() {
        if c.is_alphanumeric() {
            s.extend(c.to_lowercase());
        } else if !s.is_empty() && !s.ends_with('-') {
            s.push('-');
        }
    }
    while s.ends_with('-') {
        s.pop();
    }
    if s.is_empty() {
        s.push_str("activity");
    }
    let mut id = s.clone();
    let mut n = 2;
    while taken.contains(&id) {
        id = format!("{s}-{n}");
        n += 1;
    }
    id
}

/// A zero-valued `lte` placeholder on the first performance metric of
/// `scope`, in its dimension's canonical unit when one is needed.
fn placeholder(scope: Scope, registry: &VocabularyRegistry) -> Option<Constraint> {
    let def = registry
        .metrics_for(scope)
        .find(|m| m.kind == MetricKind::Performance)?;
    let unit = registry
        .canonical_unit(def.dimension)
        .map(|u| u.symbol.clone())
        .filter(|_| def.dimension.unit_required());
    Some(Constraint {
        metric: def.name.clone(),
        kind: MetricKind::Performance,
        priority: Some(Priority::High),
        comparator: Comparator::Lte,
        value: Value::Number(0.0),
        unit,
    })
}

/// Builds a request skeleton: one placeholder application SLO, one party,
/// and the given activities chained in order, each mapped by
/// [`DEFAULT_MAPPING`] and carrying placeholder SLOs. Activities without a
/// default mapping get [`FALLBACK_MAPPING`] and a warning.
pub fn template(
    application: Option<&str>,
    activities: &[String],
    registry: &VocabularyRegistry,
) -> Result<Template, Diagnostics> {
    let mut warnings = Vec::new();
    let mut acts: Vec<WorkflowActivity> = Vec::new();
    let mut ids: Vec<String> = Vec::new();
    for (i, name) in activities.iter().enumerate() {
        let (service, resource) = default_mapping(name).unwrap_or_else(|| {
            warnings.push(
                Diagnostic::warning(
                    Code::FreeFormActivity,
                    format!(
                        "no default mapping for activity '{name}'; using {}/{}",
                        FALLBACK_MAPPING.0, FALLBACK_MAPPING.1
                    ),
                )
                .at(format!("activities[{i}].name")),
            );
            FALLBACK_MAPPING
        });
        let id = slug(name, &ids);
        acts.push(WorkflowActivity {
            id: id.clone(),
            name: registry.activity(name).unwrap_or(name).to_string(),
            depends_on: ids.last().cloned().into_iter().collect(),
            service: ServiceSpec {
                kind: service,
                slos: placeholder(service.scope(), registry).into_iter().collect(),
                configuration: vec![],
            },
            resource: ResourceSpec {
                kind: resource,
                slos: placeholder(resource.scope(), registry)
                    .into_iter()
                    .collect(),
                configuration: vec![],
            },
        });
        ids.push(id);
    }
    let consumer_role = registry
        .role("Service Consumer")
        .or_else(|| registry.roles().first().map(String::as_str));
    let parties = consumer_role
        .map(|role| Party {
            id: "consumer".into(),
            name: "Consumer".into(),
            roles: vec![role.to_string()],
        })
        .into_iter()
        .collect();
    let parts = SlaParts {
        id: "new-sla".into(),
        name: None,
        description: String::new(),
        sla_type: SlaType::Request,
        application_type: application.unwrap_or("IoT application").to_string(),
        start_date: chrono::NaiveDate::from_ymd_opt(2025, 1, 1).expect("valid date"),
        end_date: chrono::NaiveDate::from_ymd_opt(2026, 1, 1).expect("valid date"),
        parties,
        slos: placeholder(Scope::Application, registry)
            .into_iter()
            .collect(),
        activities: acts,
    };
    let built = build_document(parts, registry)?;
    warnings.extend(
        built
            .warnings
            .into_iter()
            .filter(|w| w.code != Code::FreeFormActivity),
    );
    Ok(Template {
        text: print_text(&built.document),
        warnings,
    })
}
