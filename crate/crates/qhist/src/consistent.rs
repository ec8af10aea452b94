//! Consistent-histories engine: class operators, decoherence functional,
//! the state-dependent consistency test, and family probabilities.
//!
//! A history family assigns to each multi-index alpha the class operator
//! C_alpha (time-ordered product of Heisenberg atoms) and the decoherence
//! functional D(alpha, beta) = Tr(C_alpha rho C_beta^dag). Probabilities
//! are the diagonal entries and are only defined when the off-diagonals
//! vanish (medium decoherence); that test depends on the state, unlike the
//! compatibility condition of generalized contexts.

use std::collections::BTreeSet;

use crate::contexts::State;
use crate::error::{Error, Result};
use crate::histories::{linear_index, multi_index, translate_contexts, TimedContext};
use crate::linalg::{identity, CMatrix, Projector, Propagator};

/// Default consistency threshold on off-diagonal |D|.
pub const DEFAULT_CONSISTENCY_TOLERANCE: f64 = 1e-9;

/// n timed contexts with their Heisenberg atoms; probabilities are assigned
/// through the decoherence functional and are state-dependent.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryFamily {
    reference_time: f64,
    times: Vec<f64>,
    dim: usize,
    heisenberg_atoms: Vec<Vec<Projector>>,
    shape: Vec<usize>,
}

impl HistoryFamily {
    /// Validate contexts, translate all atoms to the reference time.
    pub fn new(t0: f64, tcs: &[TimedContext], prop: &Propagator, tol: f64) -> Result<Self> {
        let heisenberg_atoms = translate_contexts(t0, tcs, prop, tol)?;
        let shape = heisenberg_atoms.iter().map(Vec::len).collect::<Vec<_>>();
        Ok(HistoryFamily {
            reference_time: t0,
            times: tcs.iter().map(|tc| tc.time).collect(),
            dim: prop.dim(),
            heisenberg_atoms,
            shape,
        })
    }

    pub fn reference_time(&self) -> f64 {
        self.reference_time
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Number of histories in the family.
    pub fn history_count(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn heisenberg_atoms(&self, position: usize) -> &[Projector] {
        &self.heisenberg_atoms[position]
    }

    /// Histories whose outcome at `position` is atom `k`.
    pub fn histories_with(&self, position: usize, k: usize) -> Result<BTreeSet<usize>> {
        if position >= self.shape.len() {
            return Err(Error::IndexOutOfRange {
                index: position,
                len: self.shape.len(),
            });
        }
        if k >= self.shape[position] {
            return Err(Error::IndexOutOfRange {
                index: k,
                len: self.shape[position],
            });
        }
        Ok((0..self.history_count())
            .filter(|&linear| multi_index(&self.shape, linear)[position] == k)
            .collect())
    }

    /// All histories.
    pub fn all_histories(&self) -> BTreeSet<usize> {
        (0..self.history_count()).collect()
    }
}

/// Class operator C_alpha = Pi_{n,0}^{k_n} ... Pi_{1,0}^{k_1}
/// (latest time leftmost). The sum over all alpha is the identity.
pub fn class_operator(family: &HistoryFamily, alpha: &[usize]) -> Result<CMatrix> {
    let _ = linear_index(&family.shape, alpha)?;
    let mut m = identity(family.dim);
    for (pos, &k) in alpha.iter().enumerate() {
        m = family.heisenberg_atoms[pos][k].matrix() * m;
    }
    Ok(m)
}

/// The decoherence functional of a family for a given state,
/// D(alpha, beta) = Tr(C_alpha rho C_beta^dag), indexed by the linear
/// history index in lexicographic multi-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceMatrix {
    shape: Vec<usize>,
    entries: CMatrix,
}

impl DecoherenceMatrix {
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.nrows() == 0
    }

    /// Entry by linear indices.
    pub fn entry(&self, alpha: usize, beta: usize) -> num_complex::Complex<f64> {
        self.entries[(alpha, beta)]
    }

    /// Entry by multi-indices.
    pub fn entry_multi(&self, alpha: &[usize], beta: &[usize]) -> Result<num_complex::Complex<f64>> {
        Ok(self.entries[(
            linear_index(&self.shape, alpha)?,
            linear_index(&self.shape, beta)?,
        )])
    }

    /// Diagonal entry (candidate probability) by linear index.
    pub fn diagonal(&self, alpha: usize) -> f64 {
        self.entries[(alpha, alpha)].re
    }

    /// Largest off-diagonal modulus with the pair realizing it.
    pub fn max_offdiagonal(&self) -> (f64, Option<(usize, usize)>) {
        let n = self.entries.nrows();
        let mut worst = 0.0;
        let mut pair = None;
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    let m = self.entries[(a, b)].norm();
                    if m > worst {
                        worst = m;
                        pair = Some((a, b));
                    }
                }
            }
        }
        (worst, pair)
    }

    /// Sum of every entry; equals Tr(rho) = 1 up to roundoff.
    pub fn total(&self) -> num_complex::Complex<f64> {
        self.entries.iter().sum()
    }
}

/// Compute the full decoherence functional.
pub fn decoherence_functional(family: &HistoryFamily, state: &State) -> Result<DecoherenceMatrix> {
    if state.dim() != family.dim {
        return Err(Error::DimensionMismatch {
            expected: family.dim,
            found: state.dim(),
        });
    }
    let n = family.history_count();
    let mut class_ops = Vec::with_capacity(n);
    for linear in 0..n {
        class_ops.push(class_operator(family, &multi_index(&family.shape, linear))?);
    }
    // D(a,b) = Tr(C_a rho C_b^dag) = sum_ij (C_a rho)_ij conj(C_b)_ij
    let weighted: Vec<CMatrix> = class_ops.iter().map(|c| c * state.rho()).collect();
    let entries = CMatrix::from_fn(n, n, |a, b| {
        weighted[a]
            .iter()
            .zip(class_ops[b].iter())
            .map(|(x, y)| x * y.conj())
            .sum()
    });
    Ok(DecoherenceMatrix {
        shape: family.shape.clone(),
        entries,
    })
}

/// Consistency verdict with the worst offending pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub consistent: bool,
    pub max_offdiagonal: f64,
    /// Linear history indices of the worst off-diagonal pair, if any
    /// off-diagonal entry exists.
    pub worst_pair: Option<(usize, usize)>,
    pub threshold: f64,
}

/// Medium-decoherence test: every off-diagonal |D(alpha, beta)| <= tol_c.
pub fn is_consistent(
    family: &HistoryFamily,
    state: &State,
    tol_c: f64,
) -> Result<ConsistencyReport> {
    let d = decoherence_functional(family, state)?;
    Ok(consistency_of(&d, tol_c))
}

/// Consistency verdict from an already-computed decoherence matrix.
pub fn consistency_of(d: &DecoherenceMatrix, tol_c: f64) -> ConsistencyReport {
    let (max_offdiagonal, worst_pair) = d.max_offdiagonal();
    ConsistencyReport {
        consistent: max_offdiagonal <= tol_c,
        max_offdiagonal,
        worst_pair,
        threshold: tol_c,
    }
}

/// Probability of history alpha: D(alpha, alpha).
///
/// Refused with [`Error::InconsistentFamily`] when the family fails the
/// consistency test for this state; probabilities are only defined on
/// consistent families.
pub fn history_probability(
    family: &HistoryFamily,
    state: &State,
    alpha: &[usize],
    tol_c: f64,
) -> Result<f64> {
    let d = decoherence_functional(family, state)?;
    let report = consistency_of(&d, tol_c);
    if !report.consistent {
        return Err(Error::InconsistentFamily {
            max_offdiagonal: report.max_offdiagonal,
        });
    }
    Ok(d.entry_multi(alpha, alpha)?.re)
}

/// Conditional probability over history predicates (sets of linear history
/// indices): sum_{a in A and B} D(a,a) / sum_{a in B} D(a,a).
pub fn family_conditional(
    family: &HistoryFamily,
    state: &State,
    a: &BTreeSet<usize>,
    b: &BTreeSet<usize>,
    tol: f64,
    tol_c: f64,
) -> Result<f64> {
    let d = decoherence_functional(family, state)?;
    let report = consistency_of(&d, tol_c);
    if !report.consistent {
        return Err(Error::InconsistentFamily {
            max_offdiagonal: report.max_offdiagonal,
        });
    }
    conditional_of(&d, a, b, tol)
}

/// Conditional from an already-computed (and already consistency-checked)
/// decoherence matrix.
pub fn conditional_of(
    d: &DecoherenceMatrix,
    a: &BTreeSet<usize>,
    b: &BTreeSet<usize>,
    tol: f64,
) -> Result<f64> {
    let denom: f64 = b.iter().map(|&k| d.diagonal(k)).sum();
    if denom <= tol {
        return Err(Error::ZeroConditioning { probability: denom });
    }
    let joint: f64 = a.intersection(b).map(|&k| d.diagonal(k)).sum();
    Ok(joint / denom)
}
