//! Single-time contexts: projective decompositions, the distributive
//! orthocomplemented lattice of properties they generate, Born-rule and
//! conditional probabilities, and the contrary-property relation.
//!
//! Properties are stored as index subsets of their context's atom list.
//! Set algebra makes the lattice exactly distributive; the corresponding
//! projector identities then hold within numerical tolerance.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::linalg::{
    self, commutation_residual, identity, is_hermitian, subspace_leq, CMatrix, Projector, C64,
};

/// An ordered list of mutually orthogonal, nonzero projectors summing to
/// the identity: a projective decomposition of the space.
#[derive(Debug, Clone, PartialEq)]
pub struct Context {
    dim: usize,
    atoms: Vec<Projector>,
}

/// Validate a list of atoms as a projective decomposition within `tol`.
///
/// Reports the first failure found: a non-projector atom, a zero atom, an
/// orthogonality violation (with the offending index pair and residual), or
/// a completeness violation.
pub fn validate_context(atoms: Vec<Projector>, tol: f64) -> Result<Context> {
    Context::new(atoms, tol)
}

impl Context {
    pub fn new(atoms: Vec<Projector>, tol: f64) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyContext);
        }
        let dim = atoms[0].dim();
        for (i, a) in atoms.iter().enumerate() {
            if a.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: a.dim(),
                });
            }
            // revalidate: callers may hand us projectors built under a looser tolerance
            if let Err(e) = Projector::new(a.matrix().clone(), tol) {
                return Err(Error::InvalidAtom {
                    index: i,
                    source: Box::new(e),
                });
            }
            if a.is_zero() {
                return Err(Error::ZeroAtom { index: i });
            }
        }
        for i in 0..atoms.len() {
            for j in (i + 1)..atoms.len() {
                let prod = (atoms[i].matrix() * atoms[j].matrix()).norm();
                let scale = (linalg::frobenius(atoms[i].matrix())
                    * linalg::frobenius(atoms[j].matrix()))
                .max(1.0);
                if prod > tol * scale {
                    return Err(Error::OrthogonalityFailure {
                        i,
                        j,
                        residual: prod,
                    });
                }
            }
        }
        let mut sum = CMatrix::zeros(dim, dim);
        for a in &atoms {
            sum += a.matrix();
        }
        let residual = (sum - identity(dim)).norm();
        if residual > tol * (dim as f64).sqrt() {
            return Err(Error::CompletenessFailure { residual });
        }
        Ok(Context { dim, atoms })
    }

    /// The binary context {P, I - P}, dropping whichever side is zero.
    pub fn binary(p: &Projector, tol: f64) -> Result<Self> {
        let mut atoms = Vec::new();
        if !p.is_zero() {
            atoms.push(p.clone());
        }
        let comp = p.complement();
        if !comp.is_zero() {
            atoms.push(comp);
        }
        Context::new(atoms, tol)
    }

    /// The coordinate context {|e_0><e_0|, ..., |e_{d-1}><e_{d-1}|}.
    pub fn coordinate(dim: usize) -> Self {
        let atoms = (0..dim)
            .map(|k| {
                let mut m = CMatrix::zeros(dim, dim);
                m[(k, k)] = C64::new(1.0, 0.0);
                Projector::new(m, linalg::DEFAULT_TOLERANCE).expect("coordinate atom")
            })
            .collect();
        Context { dim, atoms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Projector] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Property selecting the given atom indices.
    pub fn property(&self, indices: impl IntoIterator<Item = usize>) -> Result<Property<'_>> {
        Property::new(self, indices.into_iter().collect())
    }

    /// Property selecting every atom (the sure event).
    pub fn full_property(&self) -> Property<'_> {
        Property {
            context: self,
            index_set: (0..self.atoms.len()).collect(),
        }
    }

    /// Property selecting no atom (the null event).
    pub fn empty_property(&self) -> Property<'_> {
        Property {
            context: self,
            index_set: BTreeSet::new(),
        }
    }
}

/// An element of a context's lattice: a subset of its atom indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Property<'a> {
    context: &'a Context,
    index_set: BTreeSet<usize>,
}

fn same_context(a: &Property<'_>, b: &Property<'_>) -> Result<()> {
    if std::ptr::eq(a.context, b.context) {
        Ok(())
    } else {
        Err(Error::CrossContext)
    }
}

impl<'a> Property<'a> {
    pub fn new(context: &'a Context, index_set: BTreeSet<usize>) -> Result<Self> {
        for &k in &index_set {
            if k >= context.atoms.len() {
                return Err(Error::IndexOutOfRange {
                    index: k,
                    len: context.atoms.len(),
                });
            }
        }
        Ok(Property { context, index_set })
    }

    pub fn context(&self) -> &'a Context {
        self.context
    }

    pub fn index_set(&self) -> &BTreeSet<usize> {
        &self.index_set
    }

    /// Projector sum over the selected atoms; the empty set gives the zero
    /// projector.
    pub fn projector(&self) -> Projector {
        let dim = self.context.dim;
        let mut m = CMatrix::zeros(dim, dim);
        let mut rank = 0;
        for &k in &self.index_set {
            m += self.context.atoms[k].matrix();
            rank += self.context.atoms[k].rank();
        }
        Projector::new(m, 100.0 * linalg::DEFAULT_TOLERANCE).unwrap_or_else(|_| {
            // sums of validated orthogonal atoms stay projectors to roundoff
            unreachable!("sum of orthogonal atoms must be a projector (rank {rank})")
        })
    }

    /// Orthocomplement: the complementary index set.
    pub fn complement(&self) -> Property<'a> {
        let index_set = (0..self.context.atoms.len())
            .filter(|k| !self.index_set.contains(k))
            .collect();
        Property {
            context: self.context,
            index_set,
        }
    }

    /// Lattice meet: index intersection.
    pub fn meet(&self, other: &Property<'a>) -> Result<Property<'a>> {
        same_context(self, other)?;
        Ok(Property {
            context: self.context,
            index_set: self.index_set.intersection(&other.index_set).copied().collect(),
        })
    }

    /// Lattice join: index union.
    pub fn join(&self, other: &Property<'a>) -> Result<Property<'a>> {
        same_context(self, other)?;
        Ok(Property {
            context: self.context,
            index_set: self.index_set.union(&other.index_set).copied().collect(),
        })
    }

    /// Lattice order: index-set inclusion. Agrees with [`subspace_leq`] on
    /// the projectors.
    pub fn leq(&self, other: &Property<'a>) -> Result<bool> {
        same_context(self, other)?;
        Ok(self.index_set.is_subset(&other.index_set))
    }
}

/// Projector of a property (free-function form).
pub fn property_projector(p: &Property<'_>) -> Projector {
    p.projector()
}

/// A density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    rho: CMatrix,
}

impl State {
    pub fn new(rho: CMatrix, tol: f64) -> Result<Self> {
        if rho.nrows() != rho.ncols() {
            return Err(Error::NotSquare {
                rows: rho.nrows(),
                cols: rho.ncols(),
            });
        }
        if !linalg::all_finite(&rho) {
            return Err(Error::NonFinite);
        }
        if !is_hermitian(&rho, tol) {
            return Err(Error::NotHermitian {
                residual: linalg::hermiticity_residual(&rho),
            });
        }
        let trace = rho.trace().re;
        if (trace - 1.0).abs() > tol {
            return Err(Error::TraceNotOne { trace });
        }
        let eig = rho
            .clone()
            .try_symmetric_eigen(f64::EPSILON, 100_000)
            .ok_or(Error::Eigensolver)?;
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -tol {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        Ok(State { rho })
    }

    /// Pure state |psi><psi| from a (not necessarily normalized) vector.
    pub fn pure(psi: &linalg::CVector, tol: f64) -> Result<Self> {
        let n = psi.norm();
        if n <= tol {
            return Err(Error::ZeroSpan);
        }
        let normalized = psi / C64::new(n, 0.0);
        Ok(State {
            rho: &normalized * normalized.adjoint(),
        })
    }

    /// The maximally mixed state I/d.
    pub fn maximally_mixed(dim: usize) -> Self {
        State {
            rho: identity(dim) * C64::new(1.0 / dim as f64, 0.0),
        }
    }

    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }
}

/// Tr(rho P) as a real number.
pub fn trace_probability(state: &State, p: &Projector) -> Result<f64> {
    if state.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            found: p.dim(),
        });
    }
    Ok((state.rho() * p.matrix()).trace().re)
}

/// Born rule Pr(p) = Tr(rho Pi_p).
///
/// Returned unclamped; values sit in [-tol, 1+tol] and are clamped only at
/// the reporting boundary.
pub fn born_probability(state: &State, p: &Property<'_>) -> Result<f64> {
    trace_probability(state, &p.projector())
}

/// Clamp a probability for reporting.
pub fn clamp_probability(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Conditional probability Pr(p | r) = Tr(rho Pi_p Pi_r) / Tr(rho Pi_r).
///
/// Defined only for commuting projectors; otherwise a [`Error::NonCommuting`]
/// verdict is returned. Conditioning on Pr(r) <= tol is
/// [`Error::ZeroConditioning`] (the reduced state rho* is undefined there).
pub fn conditional_probability(
    state: &State,
    p: &Projector,
    r: &Projector,
    tol: f64,
) -> Result<f64> {
    if state.dim() != p.dim() || p.dim() != r.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            found: p.dim().max(r.dim()),
        });
    }
    let residual = commutation_residual(p, r)?;
    if residual > tol {
        return Err(Error::NonCommuting { residual });
    }
    let denom = trace_probability(state, r)?;
    if denom <= tol {
        return Err(Error::ZeroConditioning { probability: denom });
    }
    let joint = (state.rho() * p.matrix() * r.matrix()).trace().re;
    Ok(joint / denom)
}

/// Contrary test: Pi_p H included in (I - Pi_q) H.
///
/// Implemented as `subspace_leq(p, complement(q))`; the equivalent
/// characterization Pi_p Pi_q = Pi_q Pi_p = 0 is verified as a self-check.
pub fn is_contrary(p: &Projector, q: &Projector, tol: f64) -> Result<bool> {
    let leq = subspace_leq(p, &q.complement(), tol)?;
    let pq = (p.matrix() * q.matrix()).norm();
    let qp = (q.matrix() * p.matrix()).norm();
    let by_product = pq <= tol && qp <= tol;
    debug_assert_eq!(
        leq, by_product,
        "contrary routes disagree: leq={leq}, pq={pq:.3e}, qp={qp:.3e}"
    );
    Ok(leq && by_product)
}
