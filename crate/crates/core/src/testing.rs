//! Part-set builders shared by unit tests.

use chrono::NaiveDate;

use crate::model::*;
use crate::vocabulary::{MetricKind, ResourceKind, ServiceKind};

pub fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

pub fn perf(metric: &str, p: Priority, cmp: Comparator, v: f64, unit: Option<&str>) -> Constraint {
    Constraint {
        metric: metric.into(),
        kind: MetricKind::Performance,
        priority: Some(p),
        comparator: cmp,
        value: Value::Number(v),
        unit: unit.map(Into::into),
    }
}

pub fn numerical(metric: &str, cmp: Comparator, v: f64, unit: Option<&str>) -> Constraint {
    Constraint {
        metric: metric.into(),
        kind: MetricKind::Numerical,
        priority: None,
        comparator: cmp,
        value: Value::Number(v),
        unit: unit.map(Into::into),
    }
}

pub fn boolean(metric: &str, v: bool) -> Constraint {
    Constraint {
        metric: metric.into(),
        kind: MetricKind::Boolean,
        priority: None,
        comparator: Comparator::Eq,
        value: Value::Bool(v),
        unit: None,
    }
}

pub fn type_metric(metric: &str, v: &str) -> Constraint {
    Constraint {
        metric: metric.into(),
        kind: MetricKind::Type,
        priority: None,
        comparator: Comparator::Eq,
        value: Value::Text(v.into()),
        unit: None,
    }
}

pub fn activity(id: &str, after: &[&str], s: ServiceKind, r: ResourceKind) -> WorkflowActivity {
    WorkflowActivity {
        id: id.into(),
        name: "Analyze real-time data".into(),
        depends_on: after.iter().map(|a| a.to_string()).collect(),
        service: ServiceSpec {
            kind: s,
            slos: vec![],
            configuration: vec![],
        },
        resource: ResourceSpec {
            kind: r,
            slos: vec![],
            configuration: vec![],
        },
    }
}

pub fn minimal_parts() -> SlaParts {
    SlaParts {
        id: "min".into(),
        name: None,
        description: String::new(),
        sla_type: SlaType::Request,
        application_type: "smart home".into(),
        start_date: date(2025, 1, 1),
        end_date: date(2025, 12, 31),
        parties: vec![Party {
            id: "p1".into(),
            name: "Owner".into(),
            roles: vec!["End User".into()],
        }],
        slos: vec![perf(
            "Response Time",
            Priority::High,
            Comparator::Lt,
            5.0,
            Some("minutes"),
        )],
        activities: vec![],
    }
}

/// The remote health monitoring request: capture, examine, analyze, store.
pub fn rhms_parts() -> SlaParts {
    let mut capture = activity(
        "capture",
        &[],
        ServiceKind::Sensing,
        ResourceKind::IotDevice,
    );
    capture.name = "Capture EoI".into();
    capture.service.slos.push(perf(
        "Data Freshness",
        Priority::High,
        Comparator::Gte,
        90.0,
        Some("%"),
    ));
    capture.service.configuration.push(numerical(
        "Measurement Collection Interval",
        Comparator::Lte,
        10.0,
        Some("seconds"),
    ));

    let mut examine = activity(
        "examine",
        &["capture"],
        ServiceKind::Ingestion,
        ResourceKind::Edge,
    );
    examine.name = "Examine the captured EoI".into();
    examine.service.slos.push(perf(
        "Latency",
        Priority::High,
        Comparator::Lt,
        500.0,
        Some("ms"),
    ));
    examine.resource.slos.push(perf(
        "Availability",
        Priority::Medium,
        Comparator::Gte,
        99.9,
        Some("%"),
    ));

    let mut analyze = activity(
        "analyze",
        &["examine"],
        ServiceKind::StreamProcessing,
        ResourceKind::Cloud,
    );
    analyze.service.slos.push(perf(
        "Latency",
        Priority::High,
        Comparator::Lt,
        2.0,
        Some("seconds"),
    ));
    analyze.resource.slos.push(perf(
        "CPU Utilization",
        Priority::Medium,
        Comparator::Gt,
        80.0,
        Some("%"),
    ));
    analyze
        .resource
        .configuration
        .push(numerical("No of vCPU", Comparator::Gte, 4.0, None));

    let mut store = activity(
        "store",
        &["analyze"],
        ServiceKind::DatabaseNosql,
        ResourceKind::Cloud,
    );
    store.name = "Store results".into();
    store.service.slos.push(perf(
        "Query Response Time",
        Priority::Medium,
        Comparator::Lt,
        1.0,
        Some("seconds"),
    ));
    store
        .service
        .configuration
        .push(boolean("Encryption Support", true));
    store.resource.configuration.push(numerical(
        "Storage Capacity",
        Comparator::Gte,
        100.0,
        Some("GB"),
    ));

    SlaParts {
        id: "rhms-request".into(),
        name: Some("Remote Health Monitoring Service".into()),
        description: "Detect urgent cases and notify emergency services".into(),
        sla_type: SlaType::Request,
        application_type: "smart health".into(),
        start_date: date(2025, 1, 1),
        end_date: date(2026, 1, 1),
        parties: vec![Party {
            id: "hospital".into(),
            name: "City Hospital".into(),
            roles: vec!["IoT administrator".into()],
        }],
        slos: vec![perf(
            "Response Time",
            Priority::High,
            Comparator::Lt,
            5.0,
            Some("minutes"),
        )],
        activities: vec![capture, examine, analyze, store],
    }
}
