//! Controlled vocabulary: metric definitions, units of measure, party roles and
//! the workflow activity catalog.
//!
//! Every terminal set of the SLA grammar that may grow per application domain
//! lives here as data. The compiled-in default is `vocab/default.json`; other
//! registries are loaded from files of the same shape.
//!
//! Metric and role names compare case-insensitively with internal whitespace
//! runs collapsed, so `"response   time"` resolves to `Response Time`.
//!
//! Units convert to one canonical unit per dimension (millisecond, percent,
//! kilobyte, per-second, unit, currency unit). Months are 30 days and years
//! are 365 days.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::keyword_enum;

const DEFAULT_REGISTRY: &str = include_str!("../../../vocab/default.json");

/// Marker accepted by [`RegistrySource::parse`] for the built-in registry.
pub const DEFAULT_MARKER: &str = "default";

keyword_enum!(
    /// Value kind of a metric; decides which constraint forms it admits.
    MetricKind {
        Performance => "performance",
        Boolean => "boolean",
        Type => "type",
        Numerical => "numerical",
    }
);

keyword_enum!(
    Dimension {
        Time => "time",
        Percentage => "percentage",
        DataSize => "data_size",
        Rate => "rate",
        Count => "count",
        Currency => "currency",
        Dimensionless => "dimensionless",
    }
);

keyword_enum!(
    Tendency {
        HigherIsBetter => "higher_is_better",
        LowerIsBetter => "lower_is_better",
        Exact => "exact",
    }
);

keyword_enum!(
    /// Where a constraint may appear: the application level or one of the
    /// service / resource kinds.
    Scope {
        Application => "application",
        Sensing => "sensing",
        Networking => "networking",
        Ingestion => "ingestion",
        StreamProcessing => "stream_processing",
        BatchProcessing => "batch_processing",
        MachineLearning => "machine_learning",
        SqlDb => "sql_db",
        NosqlDb => "nosql_db",
        IotDevice => "iot_device",
        Edge => "edge",
        Cloud => "cloud",
    }
);

keyword_enum!(
    ServiceKind {
        Sensing => "sensing",
        Networking => "networking",
        Ingestion => "ingestion",
        StreamProcessing => "stream_processing",
        BatchProcessing => "batch_processing",
        MachineLearning => "machine_learning",
        DatabaseSql => "database_sql",
        DatabaseNosql => "database_nosql",
    }
);

keyword_enum!(
    ResourceKind {
        IotDevice => "iot_device",
        Edge => "edge",
        Cloud => "cloud",
    }
);

impl ServiceKind {
    pub fn scope(self) -> Scope {
        match self {
            ServiceKind::Sensing => Scope::Sensing,
            ServiceKind::Networking => Scope::Networking,
            ServiceKind::Ingestion => Scope::Ingestion,
            ServiceKind::StreamProcessing => Scope::StreamProcessing,
            ServiceKind::BatchProcessing => Scope::BatchProcessing,
            ServiceKind::MachineLearning => Scope::MachineLearning,
            ServiceKind::DatabaseSql => Scope::SqlDb,
            ServiceKind::DatabaseNosql => Scope::NosqlDb,
        }
    }
}

impl ResourceKind {
    pub fn scope(self) -> Scope {
        match self {
            ResourceKind::IotDevice => Scope::IotDevice,
            ResourceKind::Edge => Scope::Edge,
            ResourceKind::Cloud => Scope::Cloud,
        }
    }
}

impl Dimension {
    /// Human name of the unit every value of this dimension normalizes to.
    pub fn canonical_unit_name(self) -> &'static str {
        match self {
            Dimension::Time => "millisecond",
            Dimension::Percentage => "percent",
            Dimension::DataSize => "kilobyte",
            Dimension::Rate => "per second",
            Dimension::Count => "unit",
            Dimension::Currency => "currency unit",
            Dimension::Dimensionless => "",
        }
    }

    /// Whether a bare number is meaningful without a unit symbol. Time, size
    /// and rate values are ambiguous without one.
    pub fn unit_required(self) -> bool {
        matches!(
            self,
            Dimension::Time | Dimension::DataSize | Dimension::Rate
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct MetricDef {
    pub name: String,
    pub kind: MetricKind,
    pub dimension: Dimension,
    pub tendency: Tendency,
    pub applicability: BTreeSet<Scope>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allowed_values: Option<Vec<String>>,
}

impl MetricDef {
    pub fn applies_to(&self, scope: Scope) -> bool {
        self.applicability.contains(&scope)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitDef {
    pub symbol: String,
    pub dimension: Dimension,
    /// Multiplier into the dimension's canonical unit.
    #[serde(rename = "factor", with = "rational_string")]
    pub factor_to_canonical: Rational64,
}

impl UnitDef {
    pub fn factor_exact(&self) -> BigRational {
        BigRational::new(
            BigInt::from(*self.factor_to_canonical.numer()),
            BigInt::from(*self.factor_to_canonical.denom()),
        )
    }

    pub fn factor_f64(&self) -> f64 {
        self.factor_to_canonical.to_f64().unwrap_or(f64::NAN)
    }
}

mod rational_string {
    use num_rational::Rational64;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational64, D::Error> {
        let s = String::deserialize(d)?;
        s.trim()
            .parse::<Rational64>()
            .map_err(|e| serde::de::Error::custom(format!("invalid rational '{s}': {e}")))
    }
}

/// A value expressed in its dimension's canonical unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalized {
    pub value: f64,
    pub dimension: Dimension,
}

impl Normalized {
    pub fn canonical_unit(&self) -> &'static str {
        self.dimension.canonical_unit_name()
    }
}

/// Converts `value` into the canonical unit of `unit`'s dimension.
pub fn normalize(value: f64, unit: &UnitDef) -> Normalized {
    Normalized {
        value: value * unit.factor_f64(),
        dimension: unit.dimension,
    }
}

/// Exact variant of [`normalize`]. The value is read as the decimal it
/// prints as, so `0.1` seconds and `100` milliseconds normalize equal.
pub fn normalize_exact(value: f64, unit: &UnitDef) -> BigRational {
    decimal(value) * unit.factor_exact()
}

/// The shortest decimal that reads back as `value`, as a rational.
pub fn decimal(value: f64) -> BigRational {
    assert!(value.is_finite(), "finite value");
    let text = format!("{}", value.abs());
    let (int, frac) = text.split_once('.').unwrap_or((&text, ""));
    let digits: BigInt = format!("{int}{frac}").parse().expect("decimal digits");
    let r = BigRational::new(digits, BigInt::from(10u8).pow(frac.len() as u32));
    if value.is_sign_negative() {
        -r
    } else {
        r
    }
}

/// Lowercase, trim, and collapse internal whitespace runs to one space.
pub fn normalize_name(name: &str) -> String {
    name.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("registry parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate {what} definition '{term}'")]
    Duplicate { what: &'static str, term: String },
    #[error("invalid definition '{term}': {reason}")]
    Invalid { term: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VocabError {
    #[error("unknown metric '{name}'{}", suggestion.as_ref().map(|s| format!(" (did you mean '{s}'?)")).unwrap_or_default())]
    UnknownMetric {
        name: String,
        suggestion: Option<String>,
    },
    #[error("metric '{name}' does not apply to scope {scope} (valid scopes: {})", valid.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", "))]
    ScopeMismatch {
        name: String,
        scope: Scope,
        valid: Vec<Scope>,
    },
}

/// Where a registry comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegistrySource {
    Default,
    Json(String),
}

impl RegistrySource {
    /// Treats the literal text `default` as the built-in marker.
    pub fn parse(content: &str) -> Self {
        if content.trim() == DEFAULT_MARKER {
            RegistrySource::Default
        } else {
            RegistrySource::Json(content.to_string())
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryFile {
    #[serde(default = "default_version")]
    version: String,
    metrics: Vec<MetricDef>,
    units: Vec<UnitDef>,
    roles: Vec<String>,
    activities: Vec<String>,
}

fn default_version() -> String {
    "1.0".to_string()
}

/// Immutable after construction; share freely across threads.
#[derive(Debug, Clone)]
pub struct VocabularyRegistry {
    version: String,
    metrics: Vec<MetricDef>,
    units: Vec<UnitDef>,
    roles: Vec<String>,
    activities: Vec<String>,
    metric_index: HashMap<String, usize>,
    unit_index: HashMap<String, usize>,
    role_index: HashMap<String, usize>,
    activity_index: HashMap<String, usize>,
}

pub fn load_registry(source: RegistrySource) -> Result<VocabularyRegistry, RegistryError> {
    match source {
        RegistrySource::Default => VocabularyRegistry::from_json(DEFAULT_REGISTRY),
        RegistrySource::Json(text) => VocabularyRegistry::from_json(&text),
    }
}

impl VocabularyRegistry {
    /// The compiled-in registry shipped as `vocab/default.json`.
    pub fn builtin() -> VocabularyRegistry {
        VocabularyRegistry::from_json(DEFAULT_REGISTRY).expect("built-in registry is valid")
    }

    pub fn from_json(text: &str) -> Result<VocabularyRegistry, RegistryError> {
        let file: RegistryFile = serde_json::from_str(text).map_err(|e| RegistryError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Self::from_parts(
            file.version,
            file.metrics,
            file.units,
            file.roles,
            file.activities,
        )
    }

    pub fn from_parts(
        version: String,
        metrics: Vec<MetricDef>,
        units: Vec<UnitDef>,
        roles: Vec<String>,
        activities: Vec<String>,
    ) -> Result<VocabularyRegistry, RegistryError> {
        let mut metric_index = HashMap::new();
        for (i, m) in metrics.iter().enumerate() {
            check_metric(m)?;
            if metric_index.insert(normalize_name(&m.name), i).is_some() {
                return Err(RegistryError::Duplicate {
                    what: "metric",
                    term: m.name.clone(),
                });
            }
        }
        let mut unit_index = HashMap::new();
        for (i, u) in units.iter().enumerate() {
            if u.symbol.trim().is_empty() || u.symbol.trim() != u.symbol {
                return Err(invalid(
                    &u.symbol,
                    "unit symbol must be non-empty and trimmed",
                ));
            }
            if *u.factor_to_canonical.numer() <= 0 {
                return Err(invalid(&u.symbol, "factor must be positive"));
            }
            if u.dimension == Dimension::Dimensionless {
                return Err(invalid(&u.symbol, "dimensionless quantities take no unit"));
            }
            if unit_index.insert(u.symbol.clone(), i).is_some() {
                return Err(RegistryError::Duplicate {
                    what: "unit",
                    term: u.symbol.clone(),
                });
            }
        }
        let role_index = index_names("role", &roles)?;
        let activity_index = index_names("activity", &activities)?;
        Ok(VocabularyRegistry {
            version,
            metrics,
            units,
            roles,
            activities,
            metric_index,
            unit_index,
            role_index,
            activity_index,
        })
    }

    /// Serializes to the registry file format (2-space indented JSON).
    pub fn to_json(&self) -> String {
        let file = RegistryFile {
            version: self.version.clone(),
            metrics: self.metrics.clone(),
            units: self.units.clone(),
            roles: self.roles.clone(),
            activities: self.activities.clone(),
        };
        let mut out = serde_json::to_string_pretty(&file).expect("registry serializes");
        out.push('\n');
        out
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn metrics(&self) -> &[MetricDef] {
        &self.metrics
    }

    pub fn units(&self) -> &[UnitDef] {
        &self.units
    }

    pub fn roles(&self) -> &[String] {
        &self.roles
    }

    pub fn activities(&self) -> &[String] {
        &self.activities
    }

    pub fn service_kinds(&self) -> &'static [ServiceKind] {
        ServiceKind::ALL
    }

    pub fn resource_kinds(&self) -> &'static [ResourceKind] {
        ResourceKind::ALL
    }

    /// Looks a metric up by name alone, ignoring scope.
    pub fn metric(&self, name: &str) -> Option<&MetricDef> {
        self.metric_index
            .get(&normalize_name(name))
            .map(|&i| &self.metrics[i])
    }

    pub fn resolve_metric(&self, name: &str, scope: Scope) -> Result<&MetricDef, VocabError> {
        let Some(def) = self.metric(name) else {
            return Err(VocabError::UnknownMetric {
                name: name.to_string(),
                suggestion: self.suggest_metric(name),
            });
        };
        if def.applies_to(scope) {
            Ok(def)
        } else {
            Err(VocabError::ScopeMismatch {
                name: def.name.clone(),
                scope,
                valid: def.applicability.iter().copied().collect(),
            })
        }
    }

    /// Nearest metric name within edit distance 2, if any.
    pub fn suggest_metric(&self, name: &str) -> Option<String> {
        let key = normalize_name(name);
        self.metrics
            .iter()
            .map(|m| (strsim::levenshtein(&key, &normalize_name(&m.name)), &m.name))
            .filter(|(d, _)| *d <= 2)
            .min_by_key(|(d, _)| *d)
            .map(|(_, n)| n.clone())
    }

    /// Metrics usable in `scope`, in registry order.
    pub fn metrics_for(&self, scope: Scope) -> impl Iterator<Item = &MetricDef> {
        self.metrics.iter().filter(move |m| m.applies_to(scope))
    }

    /// Unit symbols are matched exactly.
    pub fn unit(&self, symbol: &str) -> Option<&UnitDef> {
        self.unit_index.get(symbol).map(|&i| &self.units[i])
    }

    pub fn units_for(&self, dimension: Dimension) -> impl Iterator<Item = &UnitDef> {
        self.units.iter().filter(move |u| u.dimension == dimension)
    }

    /// First unit of `dimension` whose factor is exactly one.
    pub fn canonical_unit(&self, dimension: Dimension) -> Option<&UnitDef> {
        self.units_for(dimension)
            .find(|u| u.factor_to_canonical == Rational64::from_integer(1))
    }

    /// Canonical spelling of a role, if the registry knows it.
    pub fn role(&self, name: &str) -> Option<&str> {
        self.role_index
            .get(&normalize_name(name))
            .map(|&i| self.roles[i].as_str())
    }

    /// Canonical spelling of a catalog activity, if the registry knows it.
    pub fn activity(&self, name: &str) -> Option<&str> {
        self.activity_index
            .get(&normalize_name(name))
            .map(|&i| self.activities[i].as_str())
    }
}

/// Name-wise equality: same metric, unit, role and activity definitions.
impl PartialEq for VocabularyRegistry {
    fn eq(&self, other: &Self) -> bool {
        self.metrics == other.metrics
            && self.units == other.units
            && self.roles == other.roles
            && self.activities == other.activities
    }
}

fn invalid(term: &str, reason: &str) -> RegistryError {
    RegistryError::Invalid {
        term: term.to_string(),
        reason: reason.to_string(),
    }
}

fn check_metric(m: &MetricDef) -> Result<(), RegistryError> {
    if normalize_name(&m.name).is_empty() {
        return Err(invalid(&m.name, "metric name must be non-empty"));
    }
    if m.applicability.is_empty() {
        return Err(invalid(
            &m.name,
            "applicability must name at least one scope",
        ));
    }
    match m.kind {
        MetricKind::Boolean => {
            if m.dimension != Dimension::Dimensionless {
                return Err(invalid(&m.name, "boolean metrics must be dimensionless"));
            }
            if m.allowed_values.is_some() {
                return Err(invalid(&m.name, "boolean metrics take no allowedValues"));
            }
        }
        MetricKind::Type => match &m.allowed_values {
            Some(values) if !values.is_empty() => {}
            _ => {
                return Err(invalid(
                    &m.name,
                    "type metrics need non-empty allowedValues",
                ))
            }
        },
        MetricKind::Performance | MetricKind::Numerical => {
            if m.allowed_values.is_some() {
                return Err(invalid(&m.name, "only type metrics take allowedValues"));
            }
        }
    }
    Ok(())
}

fn index_names(
    what: &'static str,
    names: &[String],
) -> Result<HashMap<String, usize>, RegistryError> {
    let mut index = HashMap::new();
    for (i, n) in names.iter().enumerate() {
        let key = normalize_name(n);
        if key.is_empty() {
            return Err(invalid(n, "name must be non-empty"));
        }
        if index.insert(key, i).is_some() {
            return Err(RegistryError::Duplicate {
                what,
                term: n.clone(),
            });
        }
    }
    Ok(index)
}
