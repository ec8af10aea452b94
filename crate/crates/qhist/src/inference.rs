//! Retrodiction analysis: detect contrary pairs, run the two-family
//! retrodiction of consistent histories, and check whether a generalized
//! context can even pose the question.
//!
//! The shipped three-box fixture realizes the textbook situation: both
//! consistent families retrodict with certainty two contrary properties,
//! while the compatibility conditions of generalized contexts fail for the
//! same ingredients, so no generalized context contains the offending
//! conditionals.

use serde::{Deserialize, Serialize};

use crate::consistent::{conditional_of, consistency_of, decoherence_functional, HistoryFamily};
use crate::contexts::{clamp_probability, is_contrary, Context, State};
use crate::error::{Error, Result};
use crate::histories::{heisenberg_translate, TimedContext};
use crate::linalg::{
    basis_vector, commutation_residual, ray, vector_from_pairs, Projector, Propagator,
};
use crate::scenario::{
    AtomSpec, ContextSpec, DynamicsSpec, ProjectorRef, QuerySpec, Scenario, StateSpec,
    SCHEMA_VERSION,
};

/// Overall outcome of a retrodiction analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Conclusion {
    /// Both families consistent and both conditionals equal one: the
    /// contrary inference is realized in consistent histories.
    ContraryInferenceInCh,
    /// The compatibility conditions fail: no generalized context contains
    /// the required conditionals, so the question cannot be posed there.
    BlockedByGcIncompatibility,
    /// All pairs compatible; both frameworks assign the same well-defined
    /// conditionals, which cannot both be one.
    BothFrameworksAgree,
    /// The two properties are not contrary; the analysis does not apply.
    NotContrary,
}

/// Consistent-histories half of the report, for one binary family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyAnalysis {
    pub consistent: bool,
    pub max_offdiagonal: f64,
    /// Pr(x, t1 | r, t2) in this family, clamped; absent when refused.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditional: Option<f64>,
    /// Pr(r, t2) in this family (the conditioning weight), clamped.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditioning_probability: Option<f64>,
    /// Why the conditional is absent, when it is.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// One commutation check between Heisenberg-translated projectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCheck {
    pub pair: (String, String),
    pub commutator_norm: f64,
    pub commutes: bool,
    /// Norm within [tol, 100 tol]: numerically borderline.
    pub marginal: bool,
}

/// Everything the analysis measured, plus the conclusion drawn from it.
///
/// The conclusion is a pure function of the recorded verdicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrodictionReport {
    pub contrary: bool,
    pub p_family: FamilyAnalysis,
    pub q_family: FamilyAnalysis,
    /// Commutation checks for (p, r), (q, r), (p, q) at the reference time.
    pub pair_checks: Vec<PairCheck>,
    pub gc_compatible: bool,
    pub conclusion: Conclusion,
}

#[allow(clippy::too_many_arguments)]
fn analyze_family(
    x: &Projector,
    r: &Projector,
    state: &State,
    prop: &Propagator,
    t0: f64,
    t1: f64,
    t2: f64,
    tol: f64,
    tol_c: f64,
) -> Result<FamilyAnalysis> {
    let tcs = vec![
        TimedContext::new(t1, Context::binary(x, tol)?),
        TimedContext::new(t2, Context::binary(r, tol)?),
    ];
    let family = HistoryFamily::new(t0, &tcs, prop, tol)?;
    let d = decoherence_functional(&family, state)?;
    let report = consistency_of(&d, tol_c);

    if !report.consistent {
        return Ok(FamilyAnalysis {
            consistent: false,
            max_offdiagonal: report.max_offdiagonal,
            conditional: None,
            conditioning_probability: None,
            note: Some("inconsistent_family".to_string()),
        });
    }
    // x occupies index 0 of its context unless it is the zero projector;
    // same for r
    let a = if x.is_zero() {
        Default::default()
    } else {
        family.histories_with(0, 0)?
    };
    let b = if r.is_zero() {
        Default::default()
    } else {
        family.histories_with(1, 0)?
    };
    let weight: f64 = b.iter().map(|&k| d.diagonal(k)).sum();
    match conditional_of(&d, &a, &b, tol) {
        Ok(pr) => Ok(FamilyAnalysis {
            consistent: true,
            max_offdiagonal: report.max_offdiagonal,
            conditional: Some(clamp_probability(pr)),
            conditioning_probability: Some(clamp_probability(weight)),
            note: None,
        }),
        Err(Error::ZeroConditioning { .. }) => Ok(FamilyAnalysis {
            consistent: true,
            max_offdiagonal: report.max_offdiagonal,
            conditional: None,
            conditioning_probability: Some(clamp_probability(weight)),
            note: Some("zero_conditioning".to_string()),
        }),
        Err(e) => Err(e),
    }
}

/// Run the full analysis: the two consistent families that retrodict p and
/// q from r, and the three compatibility checks of the generalized-context
/// formalism.
///
/// Degenerate conditioning is recorded in the report, not raised. Requires
/// t0 <= t1 < t2.
#[allow(clippy::too_many_arguments)]
pub fn analyze_retrodiction(
    state: &State,
    p: &Projector,
    q: &Projector,
    r: &Projector,
    prop: &Propagator,
    t0: f64,
    t1: f64,
    t2: f64,
    tol: f64,
    tol_c: f64,
) -> Result<RetrodictionReport> {
    if t1 >= t2 {
        return Err(Error::NonIncreasingTimes { index: 1 });
    }
    if t0 > t1 {
        return Err(Error::NonIncreasingTimes { index: 0 });
    }

    let contrary = is_contrary(p, q, tol)?;
    let p_family = analyze_family(p, r, state, prop, t0, t1, t2, tol, tol_c)?;
    let q_family = analyze_family(q, r, state, prop, t0, t1, t2, tol, tol_c)?;

    let p0 = heisenberg_translate(p, prop, t1, t0)?;
    let q0 = heisenberg_translate(q, prop, t1, t0)?;
    let r0 = heisenberg_translate(r, prop, t2, t0)?;
    let mut pair_checks = Vec::with_capacity(3);
    for (label_a, label_b, a, b) in [
        ("p", "r", &p0, &r0),
        ("q", "r", &q0, &r0),
        ("p", "q", &p0, &q0),
    ] {
        let norm = commutation_residual(a, b)?;
        pair_checks.push(PairCheck {
            pair: (label_a.to_string(), label_b.to_string()),
            commutator_norm: norm,
            commutes: norm <= tol,
            marginal: norm > tol && norm <= 100.0 * tol,
        });
    }
    let gc_compatible = pair_checks.iter().all(|c| c.commutes);

    let near_one = |fa: &FamilyAnalysis| {
        fa.consistent && fa.conditional.is_some_and(|c| c >= 1.0 - 10.0 * tol)
    };
    let conclusion = if !contrary {
        Conclusion::NotContrary
    } else if !gc_compatible {
        Conclusion::BlockedByGcIncompatibility
    } else if near_one(&p_family) && near_one(&q_family) {
        Conclusion::ContraryInferenceInCh
    } else {
        Conclusion::BothFrameworksAgree
    };

    Ok(RetrodictionReport {
        contrary,
        p_family,
        q_family,
        pair_checks,
        gc_compatible,
        conclusion,
    })
}

/// The runtime ingredients of the three-box fixture.
#[derive(Debug, Clone)]
pub struct ThreeBox {
    pub state: State,
    pub p: Projector,
    pub q: Projector,
    pub r: Projector,
    pub propagator: Propagator,
    pub t0: f64,
    pub t1: f64,
    pub t2: f64,
}

/// The canonical d = 3 instance exhibiting contrary retrodictions:
/// psi = (1,1,1)/sqrt(3) at t0, p = ray(e1) and q = ray(e2) at t1,
/// r = ray((1,1,-1)/sqrt(3)) at t2, frozen dynamics.
pub fn three_box() -> ThreeBox {
    let tol = crate::linalg::DEFAULT_TOLERANCE;
    let psi = vector_from_pairs(&[(1.0, 0.0), (1.0, 0.0), (1.0, 0.0)]);
    ThreeBox {
        state: State::pure(&psi, tol).expect("unit vector"),
        p: ray(&basis_vector(3, 0), tol).expect("ray"),
        q: ray(&basis_vector(3, 1), tol).expect("ray"),
        r: ray(&vector_from_pairs(&[(1.0, 0.0), (1.0, 0.0), (-1.0, 0.0)]), tol).expect("ray"),
        propagator: Propagator::trivial(3),
        t0: 0.0,
        t1: 1.0,
        t2: 2.0,
    }
}

/// The three-box fixture as a serializable scenario.
///
/// Contexts: the coordinate decomposition at t1 (p and q are its first two
/// atoms) and {r, complement} at t2. Queries: the Born probability of p and
/// the retrodiction analysis.
pub fn three_box_scenario() -> Scenario {
    let c = 1.0 / 3.0_f64.sqrt();
    let fixture = three_box();
    let r_matrix = crate::scenario::from_cmatrix(fixture.r.matrix());
    let r_complement = crate::scenario::from_cmatrix(fixture.r.complement().matrix());

    let coordinate_atom = |k: usize| {
        let mut v = vec![[0.0, 0.0]; 3];
        v[k] = [1.0, 0.0];
        AtomSpec {
            vectors: Some(vec![v]),
            matrix: None,
        }
    };
    let atom_ref = |context: usize, atoms: Vec<usize>| ProjectorRef {
        context: Some(context),
        atoms: Some(atoms),
        vectors: None,
        time: None,
    };

    Scenario {
        schema_version: SCHEMA_VERSION.to_string(),
        dimension: 3,
        state: StateSpec {
            vector: Some(vec![[c, 0.0], [c, 0.0], [c, 0.0]]),
            matrix: None,
        },
        dynamics: DynamicsSpec {
            mode: "trivial".to_string(),
            hamiltonian: None,
            unitaries: None,
        },
        reference_time: 0.0,
        contexts: vec![
            ContextSpec {
                time: 1.0,
                atoms: vec![coordinate_atom(0), coordinate_atom(1), coordinate_atom(2)],
            },
            ContextSpec {
                time: 2.0,
                atoms: vec![
                    AtomSpec {
                        vectors: None,
                        matrix: Some(r_matrix),
                    },
                    AtomSpec {
                        vectors: None,
                        matrix: Some(r_complement),
                    },
                ],
            },
        ],
        queries: vec![
            QuerySpec {
                kind: "born".to_string(),
                context: Some(0),
                atoms: Some(vec![0]),
                property: None,
                history: None,
                p: None,
                q: None,
                r: None,
            },
            QuerySpec {
                kind: "retrodiction".to_string(),
                context: None,
                atoms: None,
                property: None,
                history: None,
                p: Some(atom_ref(0, vec![0])),
                q: Some(atom_ref(0, vec![1])),
                r: Some(atom_ref(1, vec![0])),
            },
        ],
    }
}

/// A property inside one of the scanned contexts, named by its atom indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyId {
    pub context: usize,
    pub atoms: Vec<usize>,
}

/// Result of a contrary-pair scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanOutcome {
    pub pairs: Vec<(PropertyId, PropertyId)>,
    /// Number of candidate pairs examined.
    pub examined: usize,
    /// True when the pair budget ran out before the enumeration finished.
    pub truncated: bool,
}

fn mask_atoms(mask: u64) -> Vec<usize> {
    (0..64).filter(|k| mask & (1u64 << k) != 0).collect()
}

fn mask_projector(ctx: &Context, mask: u64) -> Projector {
    let dim = ctx.dim();
    let mut m = crate::linalg::CMatrix::zeros(dim, dim);
    for k in mask_atoms(mask) {
        m += ctx.atoms()[k].matrix();
    }
    Projector::new(m, 100.0 * crate::linalg::DEFAULT_TOLERANCE)
        .expect("sum of orthogonal atoms")
}

/// Enumerate contrary pairs among the non-empty properties of the given
/// contexts, in deterministic order, capped by `budget` examined pairs.
///
/// Within one context, contrariness is exact index-set disjointness; across
/// contexts it is checked numerically.
pub fn scan_contrary_pairs(contexts: &[Context], budget: usize, tol: f64) -> Result<ScanOutcome> {
    for ctx in contexts {
        if ctx.len() > 60 {
            return Err(Error::IndexOutOfRange {
                index: ctx.len(),
                len: 60,
            });
        }
    }
    // property universe: (context index, non-empty atom mask), masks ascending
    let universe: Vec<(usize, u64)> = contexts
        .iter()
        .enumerate()
        .flat_map(|(ci, ctx)| (1u64..(1u64 << ctx.len())).map(move |mask| (ci, mask)))
        .collect();

    let mut pairs = Vec::new();
    let mut examined = 0usize;
    let mut truncated = false;
    'outer: for i in 0..universe.len() {
        for j in (i + 1)..universe.len() {
            if examined >= budget {
                truncated = true;
                break 'outer;
            }
            examined += 1;
            let (ci, mi) = universe[i];
            let (cj, mj) = universe[j];
            let contrary = if ci == cj {
                mi & mj == 0
            } else {
                let pi = mask_projector(&contexts[ci], mi);
                let pj = mask_projector(&contexts[cj], mj);
                is_contrary(&pi, &pj, tol)?
            };
            if contrary {
                pairs.push((
                    PropertyId {
                        context: ci,
                        atoms: mask_atoms(mi),
                    },
                    PropertyId {
                        context: cj,
                        atoms: mask_atoms(mj),
                    },
                ));
            }
        }
    }
    Ok(ScanOutcome {
        pairs,
        examined,
        truncated,
    })
}
