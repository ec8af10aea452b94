//! Generalized contexts for quantum histories.
//!
//! Contexts at different times are translated to a common reference time in
//! Heisenberg representation. If every pair of translated atomic projectors
//! commutes, their products form a projective decomposition whose elements
//! are the atoms of a generalized context; joint probabilities over times
//! are then ordinary Born probabilities on that decomposition.
//!
//! Compatibility is a function of (contexts, dynamics, times) only — no
//! state enters the check. Incompatibility is returned as data
//! ([`IncompatibleVerdict`]), not as an error: it is the formalism's
//! substantive answer.

use std::collections::BTreeSet;

use crate::contexts::{Context, State};
use crate::error::{Error, Result};
use crate::linalg::{
    self, identity, propagate, CMatrix, Projector, Propagator, C64,
};

/// A context placed at a point in time.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedContext {
    pub time: f64,
    pub context: Context,
}

impl TimedContext {
    pub fn new(time: f64, context: Context) -> Self {
        TimedContext { time, context }
    }
}

/// Heisenberg translation of a projector from time `t_i` to reference time
/// `t0`: U(t0, t_i) P U(t_i, t0).
///
/// Unitary conjugation preserves rank; trivial dynamics and `t_i == t0`
/// return the input unchanged.
pub fn heisenberg_translate(
    p: &Projector,
    prop: &Propagator,
    t_i: f64,
    t0: f64,
) -> Result<Projector> {
    if t_i == t0 || matches!(prop, Propagator::Trivial { .. }) {
        return Ok(p.clone());
    }
    let u_back = propagate(prop, t_i, t0)?; // U(t0, t_i)
    let translated = &u_back * p.matrix() * u_back.adjoint();
    // conjugation keeps Hermiticity and idempotency to roundoff
    let symmetrized = (&translated + translated.adjoint()) * C64::new(0.5, 0.0);
    Projector::new(symmetrized, 100.0 * linalg::DEFAULT_TOLERANCE)
}

fn check_times(t_list: &[f64]) -> Result<()> {
    for i in 1..t_list.len() {
        if t_list[i] <= t_list[i - 1] {
            return Err(Error::NonIncreasingTimes { index: i });
        }
    }
    Ok(())
}

/// Translate every atom of every timed context to the reference time.
///
/// Times t1 < ... < tn must be strictly increasing. The reference time is
/// conventionally taken at or before t1 (the state is given there), but any
/// finite t0 is accepted: the construction is the same.
pub(crate) fn translate_contexts(
    t0: f64,
    tcs: &[TimedContext],
    prop: &Propagator,
    tol: f64,
) -> Result<Vec<Vec<Projector>>> {
    if tcs.is_empty() {
        return Err(Error::EmptyContext);
    }
    let times: Vec<f64> = tcs.iter().map(|tc| tc.time).collect();
    check_times(&times)?;
    let dim = prop.dim();
    let mut translated = Vec::with_capacity(tcs.len());
    for tc in tcs {
        if tc.context.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: tc.context.dim(),
            });
        }
        // revalidate under the caller's tolerance
        let ctx = Context::new(tc.context.atoms().to_vec(), tol)?;
        let mut atoms = Vec::with_capacity(ctx.len());
        for a in ctx.atoms() {
            atoms.push(heisenberg_translate(a, prop, tc.time, t0)?);
        }
        translated.push(atoms);
    }
    Ok(translated)
}

/// One non-commuting pair of Heisenberg atoms found during compatibility
/// checking.
#[derive(Debug, Clone, PartialEq)]
pub struct NonCommutingPair {
    /// (context position, atom index) of the first projector.
    pub first: (usize, usize),
    /// (context position, atom index) of the second projector.
    pub second: (usize, usize),
    /// Scaled commutator Frobenius norm.
    pub commutator_norm: f64,
    /// True when the norm falls in [tol, 100 tol]: numerically borderline.
    pub marginal: bool,
}

/// Every non-commuting pair, with norms; the formalism's answer when no
/// generalized context exists for the inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct IncompatibleVerdict {
    pub pairs: Vec<NonCommutingPair>,
}

impl IncompatibleVerdict {
    /// Largest commutator norm among the offending pairs.
    pub fn worst_norm(&self) -> f64 {
        self.pairs
            .iter()
            .map(|p| p.commutator_norm)
            .fold(0.0, f64::max)
    }
}

/// Outcome of [`build_generalized_context`].
#[derive(Debug, Clone, PartialEq)]
pub enum CompatibilityOutcome {
    Compatible(GeneralizedContext),
    Incompatible(IncompatibleVerdict),
}

impl CompatibilityOutcome {
    pub fn is_compatible(&self) -> bool {
        matches!(self, CompatibilityOutcome::Compatible(_))
    }

    pub fn compatible(self) -> Option<GeneralizedContext> {
        match self {
            CompatibilityOutcome::Compatible(g) => Some(g),
            CompatibilityOutcome::Incompatible(_) => None,
        }
    }

    pub fn incompatible(self) -> Option<IncompatibleVerdict> {
        match self {
            CompatibilityOutcome::Compatible(_) => None,
            CompatibilityOutcome::Incompatible(v) => Some(v),
        }
    }
}

/// One atom of a generalized context: the product of one translated atom
/// per time.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedAtom {
    pub projector: Projector,
    /// Zero-rank atoms stay in the map (the product index structure is
    /// regular) but are flagged.
    pub zero: bool,
}

/// n timed contexts whose Heisenberg atoms pairwise commute, together with
/// the product atoms they generate.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedContext {
    reference_time: f64,
    times: Vec<f64>,
    dim: usize,
    /// Translated atoms per context position.
    heisenberg_atoms: Vec<Vec<Projector>>,
    /// Atom counts per position (the shape of the product label set).
    shape: Vec<usize>,
    /// Product atoms in lexicographic order of their multi-index.
    atoms: Vec<GeneralizedAtom>,
}

/// Build the generalized context, or report why none exists.
///
/// Every pair of translated atoms from different contexts must commute
/// within `tol`; on failure all offending pairs are listed. On success the
/// product atoms are computed in lexicographic multi-index order and
/// verified to form a projective decomposition within `5 tol`.
pub fn build_generalized_context(
    t0: f64,
    tcs: &[TimedContext],
    prop: &Propagator,
    tol: f64,
) -> Result<CompatibilityOutcome> {
    let heisenberg_atoms = translate_contexts(t0, tcs, prop, tol)?;
    let dim = prop.dim();

    let mut pairs = Vec::new();
    for i in 0..heisenberg_atoms.len() {
        for j in (i + 1)..heisenberg_atoms.len() {
            for (ki, a) in heisenberg_atoms[i].iter().enumerate() {
                for (kj, b) in heisenberg_atoms[j].iter().enumerate() {
                    let norm = linalg::commutation_residual(a, b)?;
                    if norm > tol {
                        pairs.push(NonCommutingPair {
                            first: (i, ki),
                            second: (j, kj),
                            commutator_norm: norm,
                            marginal: norm <= 100.0 * tol,
                        });
                    }
                }
            }
        }
    }
    if !pairs.is_empty() {
        return Ok(CompatibilityOutcome::Incompatible(IncompatibleVerdict {
            pairs,
        }));
    }

    let shape: Vec<usize> = heisenberg_atoms.iter().map(Vec::len).collect();
    let total: usize = shape.iter().product();
    let mut atoms = Vec::with_capacity(total);
    for linear in 0..total {
        let multi = multi_index(&shape, linear);
        let mut m = identity(dim);
        for (i, &k) in multi.iter().enumerate() {
            m *= heisenberg_atoms[i][k].matrix();
        }
        // products of commuting projectors are projectors, up to roundoff
        let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        let projector = Projector::new(m, 100.0 * tol)?;
        let zero = projector.is_zero();
        atoms.push(GeneralizedAtom { projector, zero });
    }

    let gc = GeneralizedContext {
        reference_time: t0,
        times: tcs.iter().map(|tc| tc.time).collect(),
        dim,
        heisenberg_atoms,
        shape,
        atoms,
    };
    gc.verify_decomposition(5.0 * tol)?;
    Ok(CompatibilityOutcome::Compatible(gc))
}

/// Multi-index of `linear` in row-major order over `shape` (first position
/// slowest).
pub fn multi_index(shape: &[usize], linear: usize) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    let mut rem = linear;
    for pos in (0..shape.len()).rev() {
        idx[pos] = rem % shape[pos];
        rem /= shape[pos];
    }
    idx
}

/// Inverse of [`multi_index`].
pub fn linear_index(shape: &[usize], multi: &[usize]) -> Result<usize> {
    if multi.len() != shape.len() {
        return Err(Error::DimensionMismatch {
            expected: shape.len(),
            found: multi.len(),
        });
    }
    let mut linear = 0;
    for (pos, &k) in multi.iter().enumerate() {
        if k >= shape[pos] {
            return Err(Error::IndexOutOfRange {
                index: k,
                len: shape[pos],
            });
        }
        linear = linear * shape[pos] + k;
    }
    Ok(linear)
}

impl GeneralizedContext {
    pub fn reference_time(&self) -> f64 {
        self.reference_time
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Atom counts per time position.
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Total number of product atoms.
    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    /// Translated atoms of context position `i`.
    pub fn heisenberg_atoms(&self, position: usize) -> &[Projector] {
        &self.heisenberg_atoms[position]
    }

    /// Product atom by multi-index.
    pub fn atom(&self, multi: &[usize]) -> Result<&GeneralizedAtom> {
        Ok(&self.atoms[linear_index(&self.shape, multi)?])
    }

    /// Product atoms in lexicographic multi-index order.
    pub fn atoms(&self) -> impl Iterator<Item = (Vec<usize>, &GeneralizedAtom)> {
        self.atoms
            .iter()
            .enumerate()
            .map(|(linear, atom)| (multi_index(&self.shape, linear), atom))
    }

    /// Check that the product atoms form a projective decomposition.
    fn verify_decomposition(&self, tol: f64) -> Result<()> {
        let mut sum = CMatrix::zeros(self.dim, self.dim);
        for a in &self.atoms {
            sum += a.projector.matrix();
        }
        let res = (sum - identity(self.dim)).norm();
        if res > tol * (self.dim as f64).sqrt() {
            return Err(Error::CompletenessFailure { residual: res });
        }
        for i in 0..self.atoms.len() {
            for j in (i + 1)..self.atoms.len() {
                let prod =
                    (self.atoms[i].projector.matrix() * self.atoms[j].projector.matrix()).norm();
                if prod > tol {
                    return Err(Error::OrthogonalityFailure { i, j, residual: prod });
                }
            }
        }
        Ok(())
    }

    /// Generalized property from a set of multi-indices.
    pub fn property(&self, multis: &[Vec<usize>]) -> Result<GeneralizedProperty<'_>> {
        let mut index_set = BTreeSet::new();
        for m in multis {
            index_set.insert(linear_index(&self.shape, m)?);
        }
        Ok(GeneralizedProperty {
            gcontext: self,
            index_set,
        })
    }

    /// Property selecting every atom.
    pub fn full_property(&self) -> GeneralizedProperty<'_> {
        GeneralizedProperty {
            gcontext: self,
            index_set: (0..self.atoms.len()).collect(),
        }
    }

    /// Property selecting no atom.
    pub fn empty_property(&self) -> GeneralizedProperty<'_> {
        GeneralizedProperty {
            gcontext: self,
            index_set: BTreeSet::new(),
        }
    }

    /// Property fixing position `i` to atom `k` (marginal cylinder set).
    pub fn cylinder(&self, position: usize, k: usize) -> Result<GeneralizedProperty<'_>> {
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
        let index_set = (0..self.atoms.len())
            .filter(|&linear| multi_index(&self.shape, linear)[position] == k)
            .collect();
        Ok(GeneralizedProperty {
            gcontext: self,
            index_set,
        })
    }

    /// Sum of product atoms over all positions except `position`, holding
    /// it at `k`. Equals the translated atom Pi_{i,0}^{k} (marginalization).
    pub fn marginal_projector(&self, position: usize, k: usize) -> Result<Projector> {
        Ok(self.cylinder(position, k)?.projector())
    }
}

/// An element of the generalized lattice: a subset of product-atom indices.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedProperty<'a> {
    gcontext: &'a GeneralizedContext,
    index_set: BTreeSet<usize>,
}

fn same_gcontext(a: &GeneralizedProperty<'_>, b: &GeneralizedProperty<'_>) -> Result<()> {
    if std::ptr::eq(a.gcontext, b.gcontext) {
        Ok(())
    } else {
        Err(Error::CrossContext)
    }
}

impl<'a> GeneralizedProperty<'a> {
    pub fn gcontext(&self) -> &'a GeneralizedContext {
        self.gcontext
    }

    pub fn index_set(&self) -> &BTreeSet<usize> {
        &self.index_set
    }

    pub fn projector(&self) -> Projector {
        let dim = self.gcontext.dim;
        let mut m = CMatrix::zeros(dim, dim);
        let mut rank = 0;
        for &k in &self.index_set {
            m += self.gcontext.atoms[k].projector.matrix();
            rank += self.gcontext.atoms[k].projector.rank();
        }
        let _ = rank;
        Projector::new(m, 100.0 * linalg::DEFAULT_TOLERANCE)
            .expect("sum of orthogonal generalized atoms is a projector")
    }

    pub fn complement(&self) -> GeneralizedProperty<'a> {
        let index_set = (0..self.gcontext.atoms.len())
            .filter(|k| !self.index_set.contains(k))
            .collect();
        GeneralizedProperty {
            gcontext: self.gcontext,
            index_set,
        }
    }

    pub fn meet(&self, other: &GeneralizedProperty<'a>) -> Result<GeneralizedProperty<'a>> {
        same_gcontext(self, other)?;
        Ok(GeneralizedProperty {
            gcontext: self.gcontext,
            index_set: self.index_set.intersection(&other.index_set).copied().collect(),
        })
    }

    pub fn join(&self, other: &GeneralizedProperty<'a>) -> Result<GeneralizedProperty<'a>> {
        same_gcontext(self, other)?;
        Ok(GeneralizedProperty {
            gcontext: self.gcontext,
            index_set: self.index_set.union(&other.index_set).copied().collect(),
        })
    }

    pub fn leq(&self, other: &GeneralizedProperty<'a>) -> Result<bool> {
        same_gcontext(self, other)?;
        Ok(self.index_set.is_subset(&other.index_set))
    }
}

/// Extended Born rule on the generalized context: Pr(p) = Tr(rho_t0 Pi_p).
pub fn generalized_probability(state: &State, p: &GeneralizedProperty<'_>) -> Result<f64> {
    crate::contexts::trace_probability(state, &p.projector())
}

/// Conditional probability on the generalized lattice:
/// Pr(a | b) = Pr(a and b) / Pr(b).
///
/// Because all atoms commute, this equals Tr(rho* Pi_a) with rho*
/// conditioned on Pi_b.
pub fn generalized_conditional(
    state: &State,
    a: &GeneralizedProperty<'_>,
    b: &GeneralizedProperty<'_>,
    tol: f64,
) -> Result<f64> {
    same_gcontext(a, b)?;
    let denom = generalized_probability(state, b)?;
    if denom <= tol {
        return Err(Error::ZeroConditioning { probability: denom });
    }
    let joint = generalized_probability(state, &a.meet(b)?)?;
    Ok(joint / denom)
}
