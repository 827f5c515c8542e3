//! Offer/request matching.
//!
//! A numerical constraint admits a set of normalized values: `gt t` is
//! `(t, ∞)`, `lte t` is `[0, t]`, `neq t` is `[0, ∞) \ {t}` and so on, all
//! clamped to `[0, ∞)` or to `[0, 100]` for percentages. An offer constraint
//! satisfies a request constraint when its set is contained in the request's.
//! Boolean and type constraints satisfy on equal values.
//!
//! Every request constraint is paired with the offer constraints on the same
//! metric in the corresponding scope: application SLOs with application
//! SLOs, activity constraints with constraints of an offer activity of the
//! same name on a service (or resource) of the same kind. Several offer
//! constraints found for one request constraint all hold at once, so their
//! sets are intersected. A contradictory combination satisfies nothing.
//!
//! Scores weigh performance constraints by priority (3/2/1 by default) and
//! everything else by 1. An offer passes hard when no high-priority or
//! unprioritized request constraint is violated or unspecified.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::keyword_enum;
use crate::model::*;
use crate::vocabulary::{
    normalize_exact, normalize_name, Dimension, MetricKind, VocabularyRegistry,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Endpoint {
    pub value: BigRational,
    pub closed: bool,
}

/// A connected set of non-negative values; `hi = None` is unbounded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Endpoint,
    pub hi: Option<Endpoint>,
}

impl Interval {
    fn is_empty(&self) -> bool {
        match &self.hi {
            None => false,
            Some(hi) => match self.lo.value.cmp(&hi.value) {
                Ordering::Less => false,
                Ordering::Equal => !(self.lo.closed && hi.closed),
                Ordering::Greater => true,
            },
        }
    }

    fn intersect(&self, other: &Interval) -> Interval {
        let lo = match self.lo.value.cmp(&other.lo.value) {
            Ordering::Greater => self.lo.clone(),
            Ordering::Less => other.lo.clone(),
            Ordering::Equal => Endpoint {
                value: self.lo.value.clone(),
                closed: self.lo.closed && other.lo.closed,
            },
        };
        let hi = match (&self.hi, &other.hi) {
            (None, h) | (h, None) => h.clone(),
            (Some(a), Some(b)) => Some(match a.value.cmp(&b.value) {
                Ordering::Less => a.clone(),
                Ordering::Greater => b.clone(),
                Ordering::Equal => Endpoint {
                    value: a.value.clone(),
                    closed: a.closed && b.closed,
                },
            }),
        };
        Interval { lo, hi }
    }

    fn covers(&self, inner: &Interval) -> bool {
        if inner.is_empty() {
            return true;
        }
        let lo_ok = match self.lo.value.cmp(&inner.lo.value) {
            Ordering::Less => true,
            Ordering::Equal => self.lo.closed || !inner.lo.closed,
            Ordering::Greater => false,
        };
        let hi_ok = match (&self.hi, &inner.hi) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => match a.value.cmp(&b.value) {
                Ordering::Greater => true,
                Ordering::Equal => a.closed || !b.closed,
                Ordering::Less => false,
            },
        };
        lo_ok && hi_ok
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        let above = match self.lo.value.cmp(x) {
            Ordering::Less => true,
            Ordering::Equal => self.lo.closed,
            Ordering::Greater => false,
        };
        let below = match &self.hi {
            None => true,
            Some(hi) => match x.cmp(&hi.value) {
                Ordering::Less => true,
                Ordering::Equal => hi.closed,
                Ordering::Greater => false,
            },
        };
        above && below
    }
}

/// A union of disjoint, pairwise separated intervals in ascending order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntervalSet(Vec<Interval>);

fn closed(value: BigRational) -> Endpoint {
    Endpoint {
        value,
        closed: true,
    }
}

fn open(value: BigRational) -> Endpoint {
    Endpoint {
        value,
        closed: false,
    }
}

impl IntervalSet {
    /// Values admitted by `comparator threshold` within `[0, upper]`
    /// (`[0, ∞)` when `upper` is `None`).
    pub fn admitted(
        comparator: Comparator,
        threshold: &BigRational,
        upper: Option<&BigRational>,
    ) -> IntervalSet {
        let zero = || closed(BigRational::zero());
        let t = threshold.clone();
        let raw = match comparator {
            Comparator::Gt => vec![Interval {
                lo: open(t),
                hi: None,
            }],
            Comparator::Gte => vec![Interval {
                lo: closed(t),
                hi: None,
            }],
            Comparator::Lt => vec![Interval {
                lo: zero(),
                hi: Some(open(t)),
            }],
            Comparator::Lte => vec![Interval {
                lo: zero(),
                hi: Some(closed(t)),
            }],
            Comparator::Eq => vec![Interval {
                lo: closed(t.clone()),
                hi: Some(closed(t)),
            }],
            Comparator::Neq => vec![
                Interval {
                    lo: zero(),
                    hi: Some(open(t.clone())),
                },
                Interval {
                    lo: open(t),
                    hi: None,
                },
            ],
        };
        let domain = IntervalSet(vec![Interval {
            lo: zero(),
            hi: upper.cloned().map(closed),
        }]);
        IntervalSet(raw).intersect(&domain)
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut out: Vec<Interval> = Vec::new();
        for a in &self.0 {
            for b in &other.0 {
                let i = a.intersect(b);
                if !i.is_empty() {
                    out.push(i);
                }
            }
        }
        out.sort_by(|x, y| {
            x.lo.value
                .cmp(&y.lo.value)
                .then(y.lo.closed.cmp(&x.lo.closed))
        });
        IntervalSet(out)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Every member interval of `self` lies inside one interval of `other`;
    /// exact because `other`'s intervals are separated.
    pub fn is_subset(&self, other: &IntervalSet) -> bool {
        self.0
            .iter()
            .all(|inner| other.0.iter().any(|outer| outer.covers(inner)))
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        self.0.iter().any(|i| i.contains(x))
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.0
    }
}

fn show(r: &BigRational) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        r.to_f64().map_or_else(|| r.to_string(), |f| f.to_string())
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("∅");
        }
        for (i, iv) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ∪ ")?;
            }
            match &iv.hi {
                Some(hi) if hi.value == iv.lo.value => write!(f, "{{{}}}", show(&hi.value))?,
                Some(hi) => write!(
                    f,
                    "{}{}, {}{}",
                    if iv.lo.closed { '[' } else { '(' },
                    show(&iv.lo.value),
                    show(&hi.value),
                    if hi.closed { ']' } else { ')' }
                )?,
                None => write!(
                    f,
                    "{}{}, ∞)",
                    if iv.lo.closed { '[' } else { '(' },
                    show(&iv.lo.value)
                )?,
            }
        }
        Ok(())
    }
}

/// Outcome of comparing offer constraints against one request constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub satisfied: bool,
    pub detail: String,
}

fn quantity(
    c: &Constraint,
    registry: &VocabularyRegistry,
) -> Result<(BigRational, Dimension), String> {
    let Value::Number(v) = c.value else {
        return Err(format!("'{}' has a non-numeric value", c.metric));
    };
    match &c.unit {
        Some(sym) => {
            let unit = registry
                .unit(sym)
                .ok_or_else(|| format!("unknown unit '{sym}'"))?;
            Ok((normalize_exact(v, unit), unit.dimension))
        }
        None => {
            let dim = registry
                .metric(&c.metric)
                .map_or(Dimension::Dimensionless, |m| m.dimension);
            Ok((crate::vocabulary::decimal(v), dim))
        }
    }
}

fn admitted(
    c: &Constraint,
    registry: &VocabularyRegistry,
) -> Result<(IntervalSet, Dimension), String> {
    let (t, dim) = quantity(c, registry)?;
    let hundred = BigRational::from_integer(BigInt::from(100));
    let upper = (dim == Dimension::Percentage).then_some(&hundred);
    Ok((IntervalSet::admitted(c.comparator, &t, upper), dim))
}

fn is_numeric(c: &Constraint) -> bool {
    matches!(c.kind, MetricKind::Performance | MetricKind::Numerical)
}

/// Whether the offer constraints, holding together, guarantee `request`.
/// Incomparable pairs (mixed kinds, different dimensions, unknown units)
/// are reported as unsatisfied with an explanation.
pub fn check(offers: &[&Constraint], request: &Constraint, registry: &VocabularyRegistry) -> Check {
    let fail = |detail: String| Check {
        satisfied: false,
        detail,
    };
    if offers.is_empty() {
        return fail(format!("offer states no '{}' constraint", request.metric));
    }
    if offers.iter().any(|o| is_numeric(o) != is_numeric(request)) {
        return fail(format!("incomparable: '{}' kinds differ", request.metric));
    }
    if !is_numeric(request) {
        let first = &offers[0].value;
        if offers.iter().any(|o| &o.value != first) {
            return fail("offer constraints are contradictory".into());
        }
        let satisfied = *first == request.value;
        return Check {
            satisfied,
            detail: format!("offer {first}, request {}", request.value),
        };
    }
    let (wanted, dim) = match admitted(request, registry) {
        Ok(x) => x,
        Err(e) => return fail(format!("incomparable: {e}")),
    };
    let mut offered: Option<IntervalSet> = None;
    for o in offers {
        match admitted(o, registry) {
            Ok((set, d)) if d == dim => {
                offered = Some(match offered {
                    None => set,
                    Some(acc) => acc.intersect(&set),
                });
            }
            Ok((_, d)) => {
                return fail(format!(
                    "incomparable: offer unit is {d}, request unit is {dim}"
                ));
            }
            Err(e) => return fail(format!("incomparable: {e}")),
        }
    }
    let offered = offered.unwrap_or_default();
    let unit = dim.canonical_unit_name();
    let unit = if unit.is_empty() {
        String::new()
    } else {
        format!(" ({unit})")
    };
    if offered.is_empty() {
        return fail(format!("offer constraints are contradictory{unit}"));
    }
    let satisfied = offered.is_subset(&wanted);
    Check {
        satisfied,
        detail: format!(
            "offer {offered} {} request {wanted}{unit}",
            if satisfied { "within" } else { "not within" }
        ),
    }
}

/// Single-constraint form of [`check`].
pub fn constraint_satisfies(
    offer: &Constraint,
    request: &Constraint,
    registry: &VocabularyRegistry,
) -> bool {
    check(&[offer], request, registry).satisfied
}

keyword_enum!(
    Status {
        Satisfied => "satisfied",
        Violated => "violated",
        Unspecified => "unspecified",
    }
);

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConstraintVerdict {
    pub request_path: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offer_path: Option<String>,
    pub detail: String,
}

fn score_number<S: Serializer>(score: &Ratio<u64>, s: S) -> Result<S::Ok, S::Error> {
    if score.is_integer() {
        s.serialize_u64(score.to_integer())
    } else {
        s.serialize_f64(*score.numer() as f64 / *score.denom() as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MatchReport {
    pub offer_id: String,
    pub request_id: String,
    pub hard_pass: bool,
    /// Satisfied weight over total weight, exact.
    #[serde(serialize_with = "score_number")]
    pub score: Ratio<u64>,
    pub verdicts: Vec<ConstraintVerdict>,
}

/// Priority weights for performance constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Weights {
    pub high: u64,
    pub medium: u64,
    pub low: u64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            high: 3,
            medium: 2,
            low: 1,
        }
    }
}

impl Weights {
    pub fn of(&self, c: &Constraint) -> u64 {
        match (c.kind, c.priority) {
            (MetricKind::Performance, Some(Priority::High)) => self.high,
            (MetricKind::Performance, Some(Priority::Medium)) => self.medium,
            (MetricKind::Performance, Some(Priority::Low)) => self.low,
            _ => 1,
        }
    }
}

impl FromStr for Weights {
    type Err = String;

    /// `h,m,l`, each a positive integer.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [h, m, l] = parts.as_slice() else {
            return Err(format!("expected three comma-separated weights, got '{s}'"));
        };
        let parse = |x: &str| match x.parse::<u64>() {
            Ok(n) if n > 0 && n <= u32::MAX as u64 => Ok(n),
            _ => Err(format!("weight '{x}' is not a positive integer")),
        };
        Ok(Weights {
            high: parse(h)?,
            medium: parse(m)?,
            low: parse(l)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("'{id}' is {actual} but was given as the {expected}")]
    TypeMismatch {
        id: String,
        expected: SlaType,
        actual: SlaType,
    },
}

fn corresponds(
    offer: &SlaDocument,
    o: &Located<'_>,
    request: &SlaDocument,
    r: &Located<'_>,
) -> bool {
    if normalize_name(&o.constraint.metric) != normalize_name(&r.constraint.metric) {
        return false;
    }
    let same_name = |a: usize, b: usize| {
        normalize_name(&offer.activities[a].name) == normalize_name(&request.activities[b].name)
    };
    match (o.location, r.location) {
        (Location::Application, Location::Application) => true,
        (Location::Service { activity: a, .. }, Location::Service { activity: b, .. }) => {
            same_name(a, b)
                && offer.activities[a].service.kind == request.activities[b].service.kind
        }
        (Location::Resource { activity: a, .. }, Location::Resource { activity: b, .. }) => {
            same_name(a, b)
                && offer.activities[a].resource.kind == request.activities[b].resource.kind
        }
        _ => false,
    }
}

fn section(l: Location) -> Option<Section> {
    match l {
        Location::Application => None,
        Location::Service { section, .. } | Location::Resource { section, .. } => Some(section),
    }
}

/// Evaluates `offer` against every constraint of `request`.
pub fn match_offer(
    offer: &SlaDocument,
    request: &SlaDocument,
    registry: &VocabularyRegistry,
    weights: &Weights,
) -> Result<MatchReport, MatchError> {
    for (doc, expected) in [(offer, SlaType::Offer), (request, SlaType::Request)] {
        if doc.sla_type != expected {
            return Err(MatchError::TypeMismatch {
                id: doc.id.clone(),
                expected,
                actual: doc.sla_type,
            });
        }
    }
    let offered = collect_constraints(offer, ScopeFilter::All);
    let mut verdicts = Vec::new();
    let (mut total, mut won) = (0u64, 0u64);
    let mut hard_pass = true;
    for r in collect_constraints(request, ScopeFilter::All) {
        let mut candidates: Vec<&Located<'_>> = offered
            .iter()
            .filter(|o| corresponds(offer, o, request, &r))
            .collect();
        candidates.sort_by_key(|o| section(o.location) != section(r.location));
        let (status, offer_path, detail) = if candidates.is_empty() {
            (
                Status::Unspecified,
                None,
                format!(
                    "offer states no '{}' constraint for this scope",
                    r.constraint.metric
                ),
            )
        } else {
            let cs: Vec<&Constraint> = candidates.iter().map(|o| o.constraint).collect();
            let c = check(&cs, r.constraint, registry);
            let status = if c.satisfied {
                Status::Satisfied
            } else {
                Status::Violated
            };
            (status, Some(candidates[0].path.clone()), c.detail)
        };
        let w = weights.of(r.constraint);
        total += w;
        if status == Status::Satisfied {
            won += w;
        } else if matches!(r.constraint.priority, None | Some(Priority::High)) {
            hard_pass = false;
        }
        verdicts.push(ConstraintVerdict {
            request_path: r.path,
            status,
            offer_path,
            detail,
        });
    }
    Ok(MatchReport {
        offer_id: offer.id.clone(),
        request_id: request.id.clone(),
        hard_pass,
        score: if total == 0 {
            Ratio::from_integer(1)
        } else {
            Ratio::new(won, total)
        },
        verdicts,
    })
}

/// Matches every offer and orders the reports by hard pass, then score
/// (both descending), then offer id. Equal keys keep input order.
pub fn rank_offers(
    offers: &[SlaDocument],
    request: &SlaDocument,
    registry: &VocabularyRegistry,
    weights: &Weights,
) -> Result<Vec<MatchReport>, MatchError> {
    let mut reports = offers
        .iter()
        .map(|o| match_offer(o, request, registry, weights))
        .collect::<Result<Vec<_>, _>>()?;
    reports.sort_by(|a, b| {
        b.hard_pass
            .cmp(&a.hard_pass)
            .then(b.score.cmp(&a.score))
            .then(a.offer_id.cmp(&b.offer_id))
    });
    Ok(reports)
}

/// Canonical JSON for a ranked report list: 2-space indentation, trailing
/// newline.
pub fn reports_to_json(reports: &[MatchReport]) -> String {
    let mut out = serde_json::to_string_pretty(reports).expect("reports serialize");
    out.push('\n');
    out
}
