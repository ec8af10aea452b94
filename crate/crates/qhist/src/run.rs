//! Query execution and report documents.
//!
//! Subcommand logic lives here so the same code path backs the CLI, the
//! integration tests and the golden files. Substantive negative verdicts
//! (incompatible, inconsistent, non-commuting, zero conditioning) are
//! recorded in the report; only input and numerical failures propagate as
//! errors.

use serde::{Deserialize, Serialize};

use crate::consistent::{consistency_of, decoherence_functional, HistoryFamily};
use crate::contexts::{clamp_probability, conditional_probability, trace_probability};
use crate::error::{Error, Result};
use crate::histories::{
    build_generalized_context, heisenberg_translate, multi_index, CompatibilityOutcome,
};
use crate::inference::{analyze_retrodiction, RetrodictionReport, ScanOutcome};
use crate::linalg::Projector;
use crate::scenario::{Compiled, Scenario};

/// Echo of the invocation, embedded in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Invocation {
    pub command: String,
    pub tolerance: f64,
    pub consistency_tolerance: f64,
    pub seed: Option<u64>,
}

/// The single JSON document emitted by a run. Sections are present only
/// when the subcommand produces them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub schema_version: String,
    pub invocation: Invocation,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub results: Option<Vec<QueryResultDoc>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compatibility: Option<CompatibilityDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub consistency: Option<ConsistencyDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retrodiction: Option<RetrodictionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanOutcome>,
}

impl ReportDoc {
    pub fn new(invocation: Invocation) -> Self {
        ReportDoc {
            schema_version: crate::scenario::SCHEMA_VERSION.to_string(),
            invocation,
            validation: None,
            results: None,
            compatibility: None,
            consistency: None,
            retrodiction: None,
            scan: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationDoc {
    pub valid: bool,
    pub dimension: usize,
    pub contexts: usize,
    pub queries: usize,
}

/// Outcome of one query. `value` is a clamped probability; when the
/// formalism refuses the question, `verdict` holds the reason instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResultDoc {
    pub query: usize,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retrodiction: Option<RetrodictionReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonCommutingPairDoc {
    /// (context position, atom index) of each side.
    pub first: [usize; 2],
    pub second: [usize; 2],
    pub commutator_norm: f64,
    pub marginal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityDoc {
    pub compatible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shape: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atom_count: Option<usize>,
    /// Multi-indices of zero-rank atoms (kept in the lattice, flagged).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero_atoms: Option<Vec<Vec<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noncommuting: Option<Vec<NonCommutingPairDoc>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_commutator_norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryProbabilityDoc {
    pub history: Vec<usize>,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyDoc {
    pub consistent: bool,
    pub max_offdiagonal: f64,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_pair: Option<[Vec<usize>; 2]>,
    pub histories: usize,
    /// Present only when the family is consistent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probabilities: Option<Vec<HistoryProbabilityDoc>>,
}

/// Validate-only summary.
pub fn run_validate(scenario: &Scenario, compiled: &Compiled) -> ValidationDoc {
    ValidationDoc {
        valid: true,
        dimension: compiled.dimension,
        contexts: compiled.contexts.len(),
        queries: scenario.queries.len(),
    }
}

/// Build the generalized context over every scenario context and report the
/// verdict.
pub fn run_gc_build(compiled: &Compiled, tol: f64) -> Result<CompatibilityDoc> {
    let outcome = build_generalized_context(
        compiled.reference_time,
        &compiled.contexts,
        &compiled.propagator,
        tol,
    )?;
    Ok(match outcome {
        CompatibilityOutcome::Compatible(gc) => CompatibilityDoc {
            compatible: true,
            shape: Some(gc.shape().to_vec()),
            atom_count: Some(gc.atom_count()),
            zero_atoms: Some(
                gc.atoms()
                    .filter(|(_, a)| a.zero)
                    .map(|(multi, _)| multi)
                    .collect(),
            ),
            noncommuting: None,
            worst_commutator_norm: None,
        },
        CompatibilityOutcome::Incompatible(verdict) => CompatibilityDoc {
            compatible: false,
            shape: None,
            atom_count: None,
            zero_atoms: None,
            worst_commutator_norm: Some(verdict.worst_norm()),
            noncommuting: Some(
                verdict
                    .pairs
                    .iter()
                    .map(|p| NonCommutingPairDoc {
                        first: [p.first.0, p.first.1],
                        second: [p.second.0, p.second.1],
                        commutator_norm: p.commutator_norm,
                        marginal: p.marginal,
                    })
                    .collect(),
            ),
        },
    })
}

/// Check consistency of the family formed by every scenario context, for
/// the scenario state; list history probabilities when consistent.
pub fn run_ch_check(compiled: &Compiled, tol: f64, tol_c: f64) -> Result<ConsistencyDoc> {
    let family = HistoryFamily::new(
        compiled.reference_time,
        &compiled.contexts,
        &compiled.propagator,
        tol,
    )?;
    let d = decoherence_functional(&family, &compiled.state)?;
    let report = consistency_of(&d, tol_c);
    let shape = family.shape().to_vec();
    let probabilities = report.consistent.then(|| {
        (0..family.history_count())
            .map(|linear| HistoryProbabilityDoc {
                history: multi_index(&shape, linear),
                probability: clamp_probability(d.diagonal(linear)),
            })
            .collect()
    });
    Ok(ConsistencyDoc {
        consistent: report.consistent,
        max_offdiagonal: report.max_offdiagonal,
        threshold: tol_c,
        worst_pair: report
            .worst_pair
            .map(|(a, b)| [multi_index(&shape, a), multi_index(&shape, b)]),
        histories: family.history_count(),
        probabilities,
    })
}

/// Scan the scenario contexts for contrary property pairs.
pub fn run_scan(compiled: &Compiled, budget: usize, tol: f64) -> Result<ScanOutcome> {
    let contexts: Vec<_> = compiled
        .contexts
        .iter()
        .map(|tc| tc.context.clone())
        .collect();
    crate::inference::scan_contrary_pairs(&contexts, budget, tol)
}

/// Execute one query by index.
pub fn run_query(
    scenario: &Scenario,
    compiled: &Compiled,
    index: usize,
    tol: f64,
    tol_c: f64,
) -> Result<QueryResultDoc> {
    let query = &scenario.queries[index];
    let mut doc = QueryResultDoc {
        query: index,
        kind: query.kind.clone(),
        value: None,
        verdict: None,
        detail: None,
        retrodiction: None,
    };
    match query.kind.as_str() {
        "born" => {
            let ci = query.context.expect("validated");
            let atoms = query.atoms.as_ref().expect("validated");
            let tc = &compiled.contexts[ci];
            let mut m = crate::linalg::CMatrix::zeros(compiled.dimension, compiled.dimension);
            for &a in atoms {
                m += tc.context.atoms()[a].matrix();
            }
            let p = Projector::new(m, 100.0 * tol)?;
            let p0 = heisenberg_translate(&p, &compiled.propagator, tc.time, compiled.reference_time)?;
            doc.value = Some(clamp_probability(trace_probability(&compiled.state, &p0)?));
        }
        "conditional" => {
            let (p, tp) = scenario.resolve_ref(
                query.p.as_ref().expect("validated"),
                &compiled.contexts,
                tol,
                "/p",
            )?;
            let (r, tr) = scenario.resolve_ref(
                query.r.as_ref().expect("validated"),
                &compiled.contexts,
                tol,
                "/r",
            )?;
            let p0 = heisenberg_translate(&p, &compiled.propagator, tp, compiled.reference_time)?;
            let r0 = heisenberg_translate(&r, &compiled.propagator, tr, compiled.reference_time)?;
            match conditional_probability(&compiled.state, &p0, &r0, tol) {
                Ok(v) => doc.value = Some(clamp_probability(v)),
                Err(e) if e.is_verdict() => {
                    doc.verdict = Some(verdict_name(&e).to_string());
                    doc.detail = Some(e.to_string());
                }
                Err(e) => return Err(e),
            }
        }
        "gc_probability" => {
            let outcome = build_generalized_context(
                compiled.reference_time,
                &compiled.contexts,
                &compiled.propagator,
                tol,
            )?;
            match outcome {
                CompatibilityOutcome::Incompatible(v) => {
                    doc.verdict = Some("incompatible".to_string());
                    doc.detail = Some(format!(
                        "{} non-commuting pairs, worst commutator norm {:.6e}",
                        v.pairs.len(),
                        v.worst_norm()
                    ));
                }
                CompatibilityOutcome::Compatible(gc) => {
                    let multis = query.property.as_ref().expect("validated");
                    let prop = gc.property(multis)?;
                    let v = crate::histories::generalized_probability(&compiled.state, &prop)?;
                    doc.value = Some(clamp_probability(v));
                }
            }
        }
        "ch_probability" => {
            let family = HistoryFamily::new(
                compiled.reference_time,
                &compiled.contexts,
                &compiled.propagator,
                tol,
            )?;
            let d = decoherence_functional(&family, &compiled.state)?;
            let report = consistency_of(&d, tol_c);
            if !report.consistent {
                doc.verdict = Some("inconsistent_family".to_string());
                doc.detail = Some(format!(
                    "max off-diagonal |D| = {:.6e} exceeds {:.6e}",
                    report.max_offdiagonal, tol_c
                ));
            } else {
                let alpha = query.history.as_ref().expect("validated");
                doc.value = Some(clamp_probability(d.entry_multi(alpha, alpha)?.re));
            }
        }
        "retrodiction" => {
            let (p, t_p) = scenario.resolve_ref(
                query.p.as_ref().expect("validated"),
                &compiled.contexts,
                tol,
                "/p",
            )?;
            let (q, t_q) = scenario.resolve_ref(
                query.q.as_ref().expect("validated"),
                &compiled.contexts,
                tol,
                "/q",
            )?;
            let (r, t_r) = scenario.resolve_ref(
                query.r.as_ref().expect("validated"),
                &compiled.contexts,
                tol,
                "/r",
            )?;
            if t_p != t_q {
                return Err(Error::Scenario {
                    path: format!("/queries/{index}"),
                    detail: "p and q must sit at the same time".to_string(),
                });
            }
            let report = analyze_retrodiction(
                &compiled.state,
                &p,
                &q,
                &r,
                &compiled.propagator,
                compiled.reference_time,
                t_p,
                t_r,
                tol,
                tol_c,
            )?;
            doc.retrodiction = Some(report);
        }
        other => {
            return Err(Error::Scenario {
                path: format!("/queries/{index}/type"),
                detail: format!("unknown query type {other:?}"),
            })
        }
    }
    Ok(doc)
}

/// Queries matching one of `kinds`, or a single query checked against them.
pub fn select_queries(
    scenario: &Scenario,
    kinds: &[&str],
    only: Option<usize>,
) -> Result<Vec<usize>> {
    match only {
        Some(i) => {
            if i >= scenario.queries.len() {
                return Err(Error::Scenario {
                    path: "/queries".to_string(),
                    detail: format!(
                        "query index {i} out of range ({})",
                        scenario.queries.len()
                    ),
                });
            }
            if !kinds.contains(&scenario.queries[i].kind.as_str()) {
                return Err(Error::Scenario {
                    path: format!("/queries/{i}/type"),
                    detail: format!(
                        "query {i} has type {:?}, expected one of {kinds:?}",
                        scenario.queries[i].kind
                    ),
                });
            }
            Ok(vec![i])
        }
        None => Ok(scenario
            .queries
            .iter()
            .enumerate()
            .filter(|(_, q)| kinds.contains(&q.kind.as_str()))
            .map(|(i, _)| i)
            .collect()),
    }
}

fn verdict_name(e: &Error) -> &'static str {
    match e {
        Error::NonCommuting { .. } => "non_commuting",
        Error::ZeroConditioning { .. } => "zero_conditioning",
        Error::InconsistentFamily { .. } => "inconsistent_family",
        _ => "error",
    }
}
