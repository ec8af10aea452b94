//! Random generators for states, unitaries and contexts.
//!
//! Used by the randomized invariant suites; exposed publicly because
//! desk-scale experiments want the same building blocks. All functions are
//! deterministic given the RNG.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::contexts::{Context, State};
use crate::linalg::{projector_from_vectors, CMatrix, CVector, Projector, C64, DEFAULT_TOLERANCE};

/// Complex Ginibre matrix: independent standard-normal real and imaginary
/// parts.
pub fn random_ginibre<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-like random unitary via QR of a Ginibre matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
    random_ginibre(rng, dim).qr().q()
}

/// Random Hermitian matrix (A + A^dag)/2 with Ginibre A.
pub fn random_hermitian<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
    let a = random_ginibre(rng, dim);
    (&a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Random normalized pure state vector.
pub fn random_pure_vector<R: Rng>(rng: &mut R, dim: usize) -> CVector {
    loop {
        let v = CVector::from_fn(dim, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let n = v.norm();
        if n > 1e-6 {
            return v / C64::new(n, 0.0);
        }
    }
}

/// Random full-rank density matrix G G^dag / Tr(G G^dag).
pub fn random_density<R: Rng>(rng: &mut R, dim: usize) -> State {
    let g = random_ginibre(rng, dim);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    State::new(m * C64::new(1.0 / tr, 0.0), 1e-6).expect("Gram matrix is a state")
}

/// Random pure state.
pub fn random_pure_state<R: Rng>(rng: &mut R, dim: usize) -> State {
    State::pure(&random_pure_vector(rng, dim), DEFAULT_TOLERANCE).expect("normalized")
}

/// Random rank-`rank` projector: span of `rank` columns of a random unitary.
pub fn random_projector<R: Rng>(rng: &mut R, dim: usize, rank: usize) -> Projector {
    assert!(rank <= dim);
    if rank == 0 {
        return Projector::zero(dim);
    }
    let u = random_unitary(rng, dim);
    let cols: Vec<CVector> = (0..rank).map(|k| u.column(k).into_owned()).collect();
    projector_from_vectors(&cols, DEFAULT_TOLERANCE).expect("unitary columns span")
}

/// Split `dim` basis labels into `parts` non-empty consecutive blocks.
pub fn random_partition<R: Rng>(rng: &mut R, dim: usize, parts: usize) -> Vec<Vec<usize>> {
    assert!(parts >= 1 && parts <= dim);
    // choose parts-1 distinct cut points in 1..dim
    let mut cuts: Vec<usize> = Vec::new();
    while cuts.len() < parts - 1 {
        let c = rng.gen_range(1..dim);
        if !cuts.contains(&c) {
            cuts.push(c);
        }
    }
    cuts.sort_unstable();
    cuts.push(dim);
    let mut blocks = Vec::with_capacity(parts);
    let mut start = 0;
    for &end in &cuts {
        blocks.push((start..end).collect());
        start = end;
    }
    blocks
}

/// Context whose atoms project onto blocks of columns of `basis`.
pub fn context_from_basis(basis: &CMatrix, blocks: &[Vec<usize>]) -> Context {
    let atoms: Vec<Projector> = blocks
        .iter()
        .map(|block| {
            let cols: Vec<CVector> = block.iter().map(|&k| basis.column(k).into_owned()).collect();
            projector_from_vectors(&cols, DEFAULT_TOLERANCE).expect("basis columns")
        })
        .collect();
    Context::new(atoms, 100.0 * DEFAULT_TOLERANCE).expect("partition of a unitary basis")
}

/// Random context with `parts` atoms, drawn from a random orthonormal basis.
pub fn random_context<R: Rng>(rng: &mut R, dim: usize, parts: usize) -> Context {
    let basis = random_unitary(rng, dim);
    let blocks = random_partition(rng, dim, parts);
    context_from_basis(&basis, &blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for dim in 2..=6 {
            let u = random_unitary(&mut rng, dim);
            assert!(crate::linalg::is_unitary(&u, 1e-10));
        }
    }

    #[test]
    fn random_partition_covers_everything() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let dim = rng.gen_range(2..=8);
            let parts = rng.gen_range(1..=dim);
            let blocks = random_partition(&mut rng, dim, parts);
            assert_eq!(blocks.len(), parts);
            let mut all: Vec<usize> = blocks.concat();
            all.sort_unstable();
            assert_eq!(all, (0..dim).collect::<Vec<_>>());
        }
    }

    #[test]
    fn random_context_validates() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let dim = rng.gen_range(2..=6);
            let parts = rng.gen_range(1..=dim);
            let ctx = random_context(&mut rng, dim, parts);
            assert_eq!(ctx.len(), parts);
        }
    }
}
