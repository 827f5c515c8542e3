//! Seeded pseudo-random valid documents for property tests.

use chrono::{Duration, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::*;
use crate::vocabulary::{
    Dimension, MetricDef, MetricKind, ResourceKind, Scope, ServiceKind, VocabularyRegistry,
};

/// Characters that stress both printers' quoting.
const ODD_CHARS: &[char] = &[
    ' ', ' ', '"', '\\', '\n', '\t', '\r', '#', '{', '}', '[', ']', ',', '%', 'é', 'ß', '√', '🛰',
    '\u{1}', '\u{7f}',
];

/// Deterministic valid document for `seed`: 1 to 5 application SLOs, 0 to 6
/// activities over a random DAG, 0 to 3 parties. Every constraint is drawn
/// from the registry's (metric, comparator, unit) combinations.
///
/// Panics if the registry has no application-scope SLO metric.
pub fn generate_document(seed: u64, registry: &VocabularyRegistry) -> SlaDocument {
    let parts = generate_parts(seed, registry);
    match build_document(parts, registry) {
        Ok(v) => v.document,
        Err(e) => panic!("generator produced an invalid document for seed {seed}:\n{e}"),
    }
}

pub fn generate_parts(seed: u64, registry: &VocabularyRegistry) -> SlaParts {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        registry,
    };
    g.parts()
}

struct Gen<'r> {
    rng: ChaCha8Rng,
    registry: &'r VocabularyRegistry,
}

impl Gen<'_> {
    fn text(&mut self, max: usize) -> String {
        let len = self.rng.gen_range(0..=max);
        let mut s = String::new();
        s.push(self.rng.gen_range('a'..='z'));
        for _ in 0..len {
            if self.rng.gen_bool(0.2) {
                s.push(*ODD_CHARS.choose(&mut self.rng).unwrap());
            } else {
                s.push(self.rng.gen_range('a'..='z'));
            }
        }
        s
    }

    fn date(&mut self) -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, 1, 1).unwrap() + Duration::days(self.rng.gen_range(0..4000))
    }

    fn parts(&mut self) -> SlaParts {
        let start_date = self.date();
        let end_date = start_date + Duration::days(self.rng.gen_range(1..2000));
        let n_parties = self.rng.gen_range(0..=3);
        let parties = (0..n_parties).map(|i| self.party(i)).collect();
        let n_slos = self.rng.gen_range(1..=5);
        let slos = (0..n_slos)
            .map(|_| {
                self.constraint(Scope::Application, Section::Slo)
                    .expect("registry has an application-scope SLO metric")
            })
            .collect();
        SlaParts {
            id: self.text(10),
            name: self.rng.gen_bool(0.5).then(|| self.text(20)),
            description: if self.rng.gen_bool(0.3) {
                String::new()
            } else {
                self.text(40)
            },
            sla_type: *SlaType::ALL.choose(&mut self.rng).unwrap(),
            application_type: self.text(12),
            start_date,
            end_date,
            parties,
            slos,
            activities: self.activities(),
        }
    }

    fn party(&mut self, i: usize) -> Party {
        let roles = self.registry.roles();
        let n = self.rng.gen_range(1..=3.min(roles.len()));
        Party {
            id: format!("{}{i}", self.text(4)),
            name: self.text(15),
            roles: roles.choose_multiple(&mut self.rng, n).cloned().collect(),
        }
    }

    fn activities(&mut self) -> Vec<WorkflowActivity> {
        let n = self.rng.gen_range(0..=6);
        let ids: Vec<String> = (0..n).map(|i| format!("{}{i}", self.text(6))).collect();
        let mut acts: Vec<WorkflowActivity> = (0..n)
            .map(|i| {
                let mut depends_on: Vec<String> = (0..i)
                    .filter(|_| self.rng.gen_bool(0.35))
                    .map(|j| ids[j].clone())
                    .collect();
                depends_on.shuffle(&mut self.rng);
                let catalog = self.registry.activities();
                let name = if !catalog.is_empty() && self.rng.gen_bool(0.6) {
                    catalog.choose(&mut self.rng).unwrap().clone()
                } else if self.rng.gen_bool(0.5) {
                    ids[i].clone()
                } else {
                    self.text(20)
                };
                let service = *ServiceKind::ALL.choose(&mut self.rng).unwrap();
                let resource = *ResourceKind::ALL.choose(&mut self.rng).unwrap();
                let (s_slos, s_conf) = self.spec_lists(service.scope());
                let (r_slos, r_conf) = self.spec_lists(resource.scope());
                WorkflowActivity {
                    id: ids[i].clone(),
                    name,
                    depends_on,
                    service: ServiceSpec {
                        kind: service,
                        slos: s_slos,
                        configuration: s_conf,
                    },
                    resource: ResourceSpec {
                        kind: resource,
                        slos: r_slos,
                        configuration: r_conf,
                    },
                }
            })
            .collect();
        acts.shuffle(&mut self.rng);
        acts
    }

    fn spec_lists(&mut self, scope: Scope) -> (Vec<Constraint>, Vec<Constraint>) {
        let n_slos = self.rng.gen_range(0..=3);
        let n_conf = self.rng.gen_range(0..=3);
        let slos = (0..n_slos)
            .filter_map(|_| self.constraint(scope, Section::Slo))
            .collect();
        let conf = (0..n_conf)
            .filter_map(|_| self.constraint(scope, Section::Configuration))
            .collect();
        (slos, conf)
    }

    fn constraint(&mut self, scope: Scope, section: Section) -> Option<Constraint> {
        let candidates: Vec<&MetricDef> = self
            .registry
            .metrics_for(scope)
            .filter(|m| match section {
                Section::Slo => matches!(m.kind, MetricKind::Performance | MetricKind::Boolean),
                Section::Configuration => m.kind != MetricKind::Performance,
            })
            .collect();
        let def = *candidates.choose(&mut self.rng)?;
        Some(self.constraint_for(def))
    }

    /// A random constraint on `def` that satisfies every model invariant.
    fn constraint_for(&mut self, def: &MetricDef) -> Constraint {
        match def.kind {
            MetricKind::Boolean => Constraint {
                metric: def.name.clone(),
                kind: def.kind,
                priority: None,
                comparator: Comparator::Eq,
                value: Value::Bool(self.rng.gen()),
                unit: None,
            },
            MetricKind::Type => {
                let allowed = def.allowed_values.as_deref().unwrap_or_default();
                Constraint {
                    metric: def.name.clone(),
                    kind: def.kind,
                    priority: None,
                    comparator: Comparator::Eq,
                    value: Value::Text(allowed.choose(&mut self.rng).cloned().unwrap_or_default()),
                    unit: None,
                }
            }
            MetricKind::Performance | MetricKind::Numerical => {
                let units: Vec<_> = self.registry.units_for(def.dimension).collect();
                let unit = if units.is_empty()
                    || (!def.dimension.unit_required() && self.rng.gen_bool(0.3))
                {
                    None
                } else {
                    Some(*units.choose(&mut self.rng).unwrap())
                };
                // Keep normalized percentages within [0, 100].
                let cap = unit.map_or(100.0, |u| 100.0 / u.factor_f64());
                let value = match def.dimension {
                    Dimension::Percentage => (self.number() / 10.0).min(cap),
                    _ => self.number(),
                };
                Constraint {
                    metric: def.name.clone(),
                    kind: def.kind,
                    priority: (def.kind == MetricKind::Performance)
                        .then(|| *Priority::ALL.choose(&mut self.rng).unwrap()),
                    comparator: *Comparator::ALL.choose(&mut self.rng).unwrap(),
                    value: Value::Number(value),
                    unit: unit.map(|u| u.symbol.clone()),
                }
            }
        }
    }

    fn number(&mut self) -> f64 {
        match self.rng.gen_range(0..5) {
            0 => 0.0,
            1 => self.rng.gen_range(0..1000) as f64,
            2 => self.rng.gen_range(0..100_000) as f64 / 100.0,
            3 => self.rng.gen::<f64>() * 1000.0,
            _ => self.rng.gen_range(0..10) as f64 * 0.1,
        }
    }
}
