//! Dense complex matrix kernel: projector predicates, commutators, subspace
//! order and unitary propagation.
//!
//! Everything here works on [`CMatrix`]/[`CVector`] (dense, `Complex<f64>`),
//! which is adequate for the dimensions this crate targets (a few dozen at
//! most). All values are immutable after construction.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = Complex<f64>;
/// Dense complex square matrix.
pub type CMatrix = DMatrix<C64>;
/// Dense complex vector.
pub type CVector = DVector<C64>;

/// Default numerical tolerance (Frobenius, relative where stated).
///
/// Double-precision roundoff for the matrix sizes handled here stays far
/// below this.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Complex one and zero, spelled once.
pub(crate) const C_ONE: C64 = Complex::new(1.0, 0.0);
pub(crate) const C_ZERO: C64 = Complex::new(0.0, 0.0);

/// d-dimensional identity.
pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Frobenius norm.
pub fn frobenius(m: &CMatrix) -> f64 {
    m.norm()
}

/// Commutator AB - BA.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// True iff every entry is finite.
pub fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn check_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

fn check_same_dim(a: &CMatrix, b: &CMatrix) -> Result<usize> {
    let da = check_square(a)?;
    let db = check_square(b)?;
    if da != db {
        return Err(Error::DimensionMismatch {
            expected: da,
            found: db,
        });
    }
    Ok(da)
}

/// Hermiticity residual ||M - M^dag||_F.
pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

/// True iff M is Hermitian within `tol` (absolute Frobenius residual).
pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.nrows() == m.ncols() && hermiticity_residual(m) <= tol
}

/// True iff M is unitary within `tol`: ||M^dag M - I||_F <= tol * sqrt(d).
pub fn is_unitary(m: &CMatrix, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let d = m.nrows();
    (m.adjoint() * m - identity(d)).norm() <= tol * (d as f64).sqrt().max(1.0)
}

/// True iff M is Hermitian and idempotent within `tol`.
///
/// Hermiticity is absolute; idempotency is relative to ||M||_F so the zero
/// matrix is accepted (it is the rank-0 projector).
pub fn is_projector(m: &CMatrix, tol: f64) -> bool {
    if m.nrows() != m.ncols() || !all_finite(m) {
        return false;
    }
    if hermiticity_residual(m) > tol {
        return false;
    }
    let idem = (m * m - m).norm();
    idem <= tol * frobenius(m).max(1.0)
}

/// Hermitian idempotent matrix with its rank; the representation of a
/// quantum property.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: CMatrix,
    rank: usize,
}

impl Projector {
    /// Validate `matrix` as a projector within `tol`.
    ///
    /// Checks Hermiticity, idempotency and that the trace is close to an
    /// integer (the rank). The zero matrix is accepted with rank 0.
    pub fn new(matrix: CMatrix, tol: f64) -> Result<Self> {
        let _ = check_square(&matrix)?;
        if !all_finite(&matrix) {
            return Err(Error::NonFinite);
        }
        let herm = hermiticity_residual(&matrix);
        if herm > tol {
            return Err(Error::NotHermitian { residual: herm });
        }
        let idem = (&matrix * &matrix - &matrix).norm();
        if idem > tol * frobenius(&matrix).max(1.0) {
            return Err(Error::NotIdempotent { residual: idem });
        }
        let trace = matrix.trace().re;
        let rank = trace.round();
        if (trace - rank).abs() > tol || rank < 0.0 {
            return Err(Error::NonIntegralTrace { trace });
        }
        Ok(Projector {
            matrix,
            rank: rank as usize,
        })
    }

    /// Rank-0 projector in dimension `dim`.
    pub fn zero(dim: usize) -> Self {
        Projector {
            matrix: CMatrix::zeros(dim, dim),
            rank: 0,
        }
    }

    /// Identity projector in dimension `dim`.
    pub fn full(dim: usize) -> Self {
        Projector {
            matrix: identity(dim),
            rank: dim,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0
    }

    /// Orthocomplement I - P.
    pub fn complement(&self) -> Projector {
        Projector {
            matrix: identity(self.dim()) - &self.matrix,
            rank: self.dim() - self.rank,
        }
    }
}

/// True iff ||AB - BA||_F <= tol * max(1, ||A||_F ||B||_F).
pub fn commutes(a: &Projector, b: &Projector, tol: f64) -> Result<bool> {
    Ok(commutation_residual(a, b)? <= tol)
}

/// Commutator norm scaled by max(1, ||A||_F ||B||_F), for verdict reporting.
pub fn commutation_residual(a: &Projector, b: &Projector) -> Result<f64> {
    check_same_dim(a.matrix(), b.matrix())?;
    let scale = (frobenius(a.matrix()) * frobenius(b.matrix())).max(1.0);
    Ok(commutator(a.matrix(), b.matrix()).norm() / scale)
}

/// Subspace inclusion P <= Q, tested as ||QP - P||_F <= tol.
pub fn subspace_leq(p: &Projector, q: &Projector, tol: f64) -> Result<bool> {
    check_same_dim(p.matrix(), q.matrix())?;
    Ok((q.matrix() * p.matrix() - p.matrix()).norm() <= tol)
}

/// Orthogonal projector onto span of `vs`, built by modified Gram-Schmidt
/// with one re-orthogonalization pass.
///
/// Vectors whose residual after orthogonalization falls below
/// `tol * max(1, ||v||)` are dropped (duplicates collapse, zero vectors are
/// ignored). Errors if nothing survives.
pub fn projector_from_vectors(vs: &[CVector], tol: f64) -> Result<Projector> {
    if vs.is_empty() {
        return Err(Error::EmptyVectorList);
    }
    let dim = vs[0].len();
    let mut basis: Vec<CVector> = Vec::new();
    for v in vs {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
        if !v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for u in &basis {
                let coeff = u.dotc(&w);
                w -= u * coeff;
            }
        }
        if w.norm() > tol * v.norm().max(1.0) {
            let n = w.norm();
            basis.push(w / C64::new(n, 0.0));
        }
    }
    if basis.is_empty() {
        return Err(Error::ZeroSpan);
    }
    let mut m = CMatrix::zeros(dim, dim);
    for u in &basis {
        m += u * u.adjoint();
    }
    let rank = basis.len();
    // symmetrize away Gram-Schmidt roundoff
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    debug_assert!(is_projector(&m, tol));
    Ok(Projector { matrix: m, rank })
}

/// Projector onto the ray spanned by a single vector.
pub fn ray(v: &CVector, tol: f64) -> Result<Projector> {
    projector_from_vectors(std::slice::from_ref(v), tol)
}

/// A registered unitary for one ordered time pair in explicit dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitUnitary {
    pub t_from: f64,
    pub t_to: f64,
    pub matrix: CMatrix,
}

/// Time evolution: frozen, generated by a Hamiltonian, or given as explicit
/// unitaries for registered time pairs.
///
/// Convention: hbar = 1 and U(t, t0) = exp(-i H (t - t0)), so
/// [`propagate`] with `(t_from, t_to)` returns U(t_to, t_from).
#[derive(Debug, Clone, PartialEq)]
pub enum Propagator {
    /// U = I for every pair of times.
    Trivial { dim: usize },
    /// Generated by a time-independent Hermitian Hamiltonian.
    Hamiltonian { hamiltonian: CMatrix },
    /// Explicit unitaries; pairs not registered are composed along a path
    /// of registered pairs (reversed pairs contribute the adjoint).
    Explicit {
        dim: usize,
        unitaries: Vec<ExplicitUnitary>,
    },
}

impl Propagator {
    pub fn trivial(dim: usize) -> Self {
        Propagator::Trivial { dim }
    }

    /// Hamiltonian-mode propagator; `h` must be Hermitian within `tol`.
    pub fn hamiltonian(h: CMatrix, tol: f64) -> Result<Self> {
        check_square(&h)?;
        if !all_finite(&h) {
            return Err(Error::NonFinite);
        }
        let res = hermiticity_residual(&h);
        if res > tol * frobenius(&h).max(1.0) {
            return Err(Error::NotHermitian { residual: res });
        }
        Ok(Propagator::Hamiltonian { hamiltonian: h })
    }

    /// Explicit-mode propagator over registered time pairs.
    ///
    /// Every matrix must be unitary within `tol`, and any pair with
    /// `t_from == t_to` must be the identity (group property).
    pub fn explicit(dim: usize, unitaries: Vec<ExplicitUnitary>, tol: f64) -> Result<Self> {
        for u in &unitaries {
            let d = check_square(&u.matrix)?;
            if d != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: d,
                });
            }
            if !all_finite(&u.matrix) {
                return Err(Error::NonFinite);
            }
            if !is_unitary(&u.matrix, tol) {
                let res = (u.matrix.adjoint() * &u.matrix - identity(dim)).norm();
                return Err(Error::NotUnitary { residual: res });
            }
            if u.t_from == u.t_to && (&u.matrix - identity(dim)).norm() > tol * (dim as f64).sqrt()
            {
                let res = (&u.matrix - identity(dim)).norm();
                return Err(Error::NotUnitary { residual: res });
            }
        }
        Ok(Propagator::Explicit { dim, unitaries })
    }

    pub fn dim(&self) -> usize {
        match self {
            Propagator::Trivial { dim } => *dim,
            Propagator::Hamiltonian { hamiltonian } => hamiltonian.nrows(),
            Propagator::Explicit { dim, .. } => *dim,
        }
    }
}

/// U(t_to, t_from) for the given dynamics.
///
/// Hamiltonian mode uses the Hermitian eigendecomposition
/// U = V exp(-i Lambda dt) V^dag, which is unitary up to roundoff.
/// `t_from == t_to` returns the identity exactly in trivial and Hamiltonian
/// modes.
pub fn propagate(prop: &Propagator, t_from: f64, t_to: f64) -> Result<CMatrix> {
    match prop {
        Propagator::Trivial { dim } => Ok(identity(*dim)),
        Propagator::Hamiltonian { hamiltonian } => {
            let dt = t_to - t_from;
            if dt == 0.0 {
                return Ok(identity(hamiltonian.nrows()));
            }
            let eig = hamiltonian
                .clone()
                .try_symmetric_eigen(f64::EPSILON, 100_000)
                .ok_or(Error::Eigensolver)?;
            let d = hamiltonian.nrows();
            let phases = CMatrix::from_fn(d, d, |i, j| {
                if i == j {
                    let theta = -eig.eigenvalues[i] * dt;
                    C64::new(theta.cos(), theta.sin())
                } else {
                    C_ZERO
                }
            });
            Ok(&eig.eigenvectors * phases * eig.eigenvectors.adjoint())
        }
        Propagator::Explicit { dim, unitaries } => {
            compose_explicit(*dim, unitaries, t_from, t_to)
        }
    }
}

/// Breadth-first composition of registered unitaries from `t_from` to `t_to`.
/// Registered pairs are usable in both directions (adjoint when reversed).
fn compose_explicit(
    dim: usize,
    unitaries: &[ExplicitUnitary],
    t_from: f64,
    t_to: f64,
) -> Result<CMatrix> {
    if t_from == t_to {
        return Ok(identity(dim));
    }
    // node set: every time mentioned, in sorted order for determinism
    let mut times: Vec<f64> = Vec::new();
    let add = |t: f64, times: &mut Vec<f64>| {
        if !times.contains(&t) {
            times.push(t);
        }
    };
    add(t_from, &mut times);
    add(t_to, &mut times);
    for u in unitaries {
        add(u.t_from, &mut times);
        add(u.t_to, &mut times);
    }
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    let node = |t: f64| times.iter().position(|&x| x == t).expect("registered");

    let start = node(t_from);
    let goal = node(t_to);
    // accumulated[i] = U(times[i], t_from) once visited
    let mut accumulated: Vec<Option<CMatrix>> = vec![None; times.len()];
    accumulated[start] = Some(identity(dim));
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(cur) = queue.pop_front() {
        if cur == goal {
            break;
        }
        let here = accumulated[cur].clone().expect("visited");
        for u in unitaries {
            for (src, dst, forward) in [(u.t_from, u.t_to, true), (u.t_to, u.t_from, false)] {
                if node(src) == cur {
                    let next = node(dst);
                    if accumulated[next].is_none() {
                        let step = if forward {
                            u.matrix.clone()
                        } else {
                            u.matrix.adjoint()
                        };
                        accumulated[next] = Some(&step * &here);
                        queue.push_back(next);
                    }
                }
            }
        }
    }
    accumulated[goal]
        .clone()
        .ok_or(Error::UnregisteredTimePair { t_from, t_to })
}

/// Basis vector e_k in dimension `dim`.
pub fn basis_vector(dim: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[k] = C_ONE;
    v
}

/// Build a complex vector from (re, im) pairs.
pub fn vector_from_pairs(entries: &[(f64, f64)]) -> CVector {
    CVector::from_iterator(entries.len(), entries.iter().map(|&(re, im)| C64::new(re, im)))
}
