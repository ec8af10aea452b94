//! Randomized and property-based invariant suites for the engine modules.

mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qhist::consistent::{decoherence_functional, is_consistent, HistoryFamily};
use qhist::contexts::{
    born_probability, conditional_probability, is_contrary, trace_probability, Context, State,
};
use qhist::histories::{
    build_generalized_context, generalized_conditional, generalized_probability,
    heisenberg_translate, linear_index, multi_index, TimedContext,
};
use qhist::inference::{analyze_retrodiction, three_box, Conclusion};
use qhist::linalg::{
    identity, is_unitary, projector_from_vectors, propagate, subspace_leq, CMatrix, CVector,
    Projector, Propagator, C64,
};
use qhist::sampling::{
    context_from_basis, random_context, random_density, random_hermitian, random_partition,
    random_projector, random_pure_state, random_pure_vector, random_unitary,
};

const TOL: f64 = 1e-9;
const TOL_C: f64 = 1e-9;

#[test]
fn propagation_is_unitary_and_composes() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..1000 {
        let d = rng.gen_range(2..=8);
        let h = random_hermitian(&mut rng, d);
        let prop = Propagator::hamiltonian(h, 1e-6).unwrap();
        let t1: f64 = rng.gen_range(-10.0..10.0);
        let t2: f64 = rng.gen_range(-10.0..10.0);
        let u = propagate(&prop, t1, t2).unwrap();
        assert!(is_unitary(&u, 1e-8), "U not unitary to 10 tol");

        let t3: f64 = rng.gen_range(-10.0..10.0);
        let u32 = propagate(&prop, t2, t3).unwrap();
        let u31 = propagate(&prop, t1, t3).unwrap();
        assert!(
            (u32 * u - u31).norm() <= 1e-8,
            "composition violated beyond 10 tol"
        );
    }
}

#[test]
fn subspace_leq_is_a_partial_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for _ in 0..200 {
        let d = rng.gen_range(2..=6);
        // nested triple built from one basis: P <= Q <= S
        let basis = random_unitary(&mut rng, d);
        let r1 = rng.gen_range(1..=d);
        let r2 = rng.gen_range(r1..=d);
        let cols = |r: usize| -> Vec<CVector> {
            (0..r).map(|k| basis.column(k).into_owned()).collect()
        };
        let p = projector_from_vectors(&cols(r1), TOL).unwrap();
        let q = projector_from_vectors(&cols(r2), TOL).unwrap();
        let s = Projector::full(d);

        // reflexive
        assert!(subspace_leq(&p, &p, TOL).unwrap());
        // transitive within slack
        assert!(subspace_leq(&p, &q, 3.0 * TOL).unwrap());
        assert!(subspace_leq(&q, &s, 3.0 * TOL).unwrap());
        assert!(subspace_leq(&p, &s, 3.0 * TOL).unwrap());
        // antisymmetric: mutual inclusion forces equality
        if subspace_leq(&q, &p, TOL).unwrap() {
            assert!((p.matrix() - q.matrix()).norm() <= 2.0 * TOL);
        }
        // unrelated random projector is not below p unless it is
        let other_rank = rng.gen_range(1..=d);
        let other = random_projector(&mut rng, d, other_rank);
        if subspace_leq(&other, &p, TOL).unwrap() && subspace_leq(&p, &other, TOL).unwrap() {
            assert!((p.matrix() - other.matrix()).norm() <= 2.0 * TOL);
        }
    }
}

#[test]
fn contrary_probabilities_sum_with_remainder_to_one() {
    // Pr(p) + Pr(q) + Pr(not (p or q)) = 1 for contrary p, q
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for _ in 0..300 {
        let d = rng.gen_range(2..=8);
        let basis = random_unitary(&mut rng, d);
        let mut s_p = Vec::new();
        let mut s_q = Vec::new();
        for k in 0..d {
            match rng.gen_range(0..3) {
                0 => s_p.push(k),
                1 => s_q.push(k),
                _ => {}
            }
        }
        if s_p.is_empty() || s_q.is_empty() {
            continue;
        }
        let take = |s: &[usize]| -> Projector {
            let vs: Vec<CVector> = s.iter().map(|&k| basis.column(k).into_owned()).collect();
            projector_from_vectors(&vs, TOL).unwrap()
        };
        let p = take(&s_p);
        let q = take(&s_q);
        assert!(is_contrary(&p, &q, TOL).unwrap());
        let state = random_density(&mut rng, d);
        let join = Projector::new(p.matrix() + q.matrix(), 100.0 * TOL).unwrap();
        let remainder = join.complement();
        let total = trace_probability(&state, &p).unwrap()
            + trace_probability(&state, &q).unwrap()
            + trace_probability(&state, &remainder).unwrap();
        assert!((total - 1.0).abs() <= 5.0 * TOL, "total = {total}");
    }
}

#[test]
fn born_probability_is_additive_over_disjoint_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for _ in 0..200 {
        let d = rng.gen_range(2..=8);
        let parts = rng.gen_range(2..=d);
        let ctx = random_context(&mut rng, d, parts);
        let state = random_density(&mut rng, d);
        let mut s_a = BTreeSet::new();
        let mut s_b = BTreeSet::new();
        for k in 0..ctx.len() {
            match rng.gen_range(0..3) {
                0 => {
                    s_a.insert(k);
                }
                1 => {
                    s_b.insert(k);
                }
                _ => {}
            }
        }
        let a = ctx.property(s_a).unwrap();
        let b = ctx.property(s_b).unwrap();
        let joined = a.join(&b).unwrap();
        let sum = born_probability(&state, &a).unwrap() + born_probability(&state, &b).unwrap();
        let direct = born_probability(&state, &joined).unwrap();
        assert!((sum - direct).abs() <= 5.0 * TOL);
    }
}

#[test]
fn decoherence_matrix_invariants() {
    // Hermitian, non-negative diagonal, total sum one — random families and
    // states, up to three times
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    for _ in 0..150 {
        let d = rng.gen_range(2..=6);
        let n_times = rng.gen_range(1..=3);
        let tcs: Vec<TimedContext> = (0..n_times)
            .map(|i| {
                let parts = rng.gen_range(1..=d.min(3));
                TimedContext::new(i as f64, random_context(&mut rng, d, parts))
            })
            .collect();
        let h = random_hermitian(&mut rng, d);
        let prop = Propagator::hamiltonian(h, 1e-6).unwrap();
        let family = HistoryFamily::new(-1.0, &tcs, &prop, 1e-6).unwrap();
        let state = if rng.gen_bool(0.5) {
            random_density(&mut rng, d)
        } else {
            random_pure_state(&mut rng, d)
        };
        let dm = decoherence_functional(&family, &state).unwrap();
        let n = family.history_count();
        for a in 0..n {
            assert!(dm.diagonal(a) >= -TOL, "negative diagonal");
            for b in 0..n {
                let z = dm.entry(a, b);
                let w = dm.entry(b, a);
                assert!(
                    (z - w.conj()).norm() <= 5.0 * TOL,
                    "D not Hermitian: {z} vs {w}"
                );
            }
        }
        let total = dm.total();
        assert!((total.re - 1.0).abs() <= 5.0 * TOL && total.im.abs() <= 5.0 * TOL);
    }
}

#[test]
fn compatibility_verdict_is_state_independent() {
    // the builder consumes no state; identical inputs give identical
    // verdicts no matter which states are used around them
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    for _ in 0..50 {
        let d = rng.gen_range(2..=5);
        let parts1 = rng.gen_range(1..=d);
        let parts2 = rng.gen_range(1..=d);
        let tcs = vec![
            TimedContext::new(0.5, random_context(&mut rng, d, parts1)),
            TimedContext::new(1.5, random_context(&mut rng, d, parts2)),
        ];
        let prop = Propagator::trivial(d);
        let first = build_generalized_context(0.0, &tcs, &prop, TOL).unwrap();
        // interleave state-dependent computations
        for _ in 0..3 {
            let state = random_density(&mut rng, d);
            let family = HistoryFamily::new(0.0, &tcs, &prop, TOL).unwrap();
            let _ = is_consistent(&family, &state, TOL_C).unwrap();
        }
        let second = build_generalized_context(0.0, &tcs, &prop, TOL).unwrap();
        assert_eq!(first, second);
    }
}

#[test]
fn consistency_is_state_dependent_unlike_compatibility() {
    // fixed three-box p-family: consistent for the fixture state, and a
    // seeded random search quickly exhibits a state where it is not
    let f = three_box();
    let tcs = vec![
        TimedContext::new(f.t1, Context::binary(&f.p, TOL).unwrap()),
        TimedContext::new(f.t2, Context::binary(&f.r, TOL).unwrap()),
    ];
    let family = HistoryFamily::new(f.t0, &tcs, &f.propagator, TOL).unwrap();
    assert!(is_consistent(&family, &f.state, TOL_C).unwrap().consistent);

    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let mut found = None;
    for _ in 0..100 {
        let state = random_pure_state(&mut rng, 3);
        let report = is_consistent(&family, &state, TOL_C).unwrap();
        if !report.consistent {
            found = Some(report.max_offdiagonal);
            break;
        }
    }
    let worst = found.expect("a generic state breaks consistency");
    assert!(worst > 1e-3, "found only marginal violation {worst:e}");
}

#[test]
fn marginal_projectors_match_translated_atoms() {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    for _ in 0..50 {
        let d = rng.gen_range(2..=5);
        let basis = random_unitary(&mut rng, d);
        let parts1 = rng.gen_range(1..=d);
        let parts2 = rng.gen_range(1..=d);
        let tcs = vec![
            TimedContext::new(
                1.0,
                context_from_basis(&basis, &random_partition(&mut rng, d, parts1)),
            ),
            TimedContext::new(
                2.0,
                context_from_basis(&basis, &random_partition(&mut rng, d, parts2)),
            ),
        ];
        // Hamiltonian diagonal in the shared basis keeps compatibility while
        // exercising real propagation
        let diag = CMatrix::from_fn(d, d, |i, j| {
            if i == j {
                C64::new(rng.gen_range(-2.0..2.0), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let prop = Propagator::hamiltonian(&basis * diag * basis.adjoint(), 1e-6).unwrap();
        let gc = build_generalized_context(0.0, &tcs, &prop, 1e-6)
            .unwrap()
            .compatible()
            .expect("shared eigenbasis");
        for pos in 0..2 {
            for k in 0..gc.shape()[pos] {
                let marginal = gc.marginal_projector(pos, k).unwrap();
                let direct = &gc.heisenberg_atoms(pos)[k];
                assert!(
                    (marginal.matrix() - direct.matrix()).norm() <= 5e-6,
                    "marginalization failed at ({pos}, {k})"
                );
            }
        }
        // single-time Born probabilities recovered as marginals
        let state = random_density(&mut rng, d);
        for k in 0..gc.shape()[0] {
            let via_marginal =
                trace_probability(&state, &gc.marginal_projector(0, k).unwrap()).unwrap();
            let direct = trace_probability(&state, &gc.heisenberg_atoms(0)[k]).unwrap();
            assert!((via_marginal - direct).abs() <= 5e-6);
        }
    }
}

#[test]
fn no_contrary_inference_inside_a_generalized_context() {
    // for disjoint (hence contrary) generalized properties a, b and any
    // conditioning property c: Pr(a|c) + Pr(b|c) <= 1
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let mut done = 0;
    while done < 300 {
        let d = rng.gen_range(2..=6);
        let basis = random_unitary(&mut rng, d);
        let parts1 = rng.gen_range(1..=d.min(3));
        let parts2 = rng.gen_range(1..=d.min(3));
        let tcs = vec![
            TimedContext::new(
                1.0,
                context_from_basis(&basis, &random_partition(&mut rng, d, parts1)),
            ),
            TimedContext::new(
                2.0,
                context_from_basis(&basis, &random_partition(&mut rng, d, parts2)),
            ),
        ];
        let gc = build_generalized_context(0.0, &tcs, &Propagator::trivial(d), TOL)
            .unwrap()
            .compatible()
            .unwrap();
        let total = gc.atom_count();
        if total < 3 {
            continue;
        }
        let mut s_a = Vec::new();
        let mut s_b = Vec::new();
        let mut s_c = Vec::new();
        for linear in 0..total {
            match rng.gen_range(0..3) {
                0 => s_a.push(linear),
                1 => s_b.push(linear),
                _ => {}
            }
            if rng.gen_bool(0.5) {
                s_c.push(linear);
            }
        }
        if s_a.is_empty() || s_b.is_empty() || s_c.is_empty() {
            continue;
        }
        let to_prop = |s: &[usize]| {
            gc.property(
                &s.iter()
                    .map(|&l| multi_index(gc.shape(), l))
                    .collect::<Vec<_>>(),
            )
            .unwrap()
        };
        let a = to_prop(&s_a);
        let b = to_prop(&s_b);
        let c = to_prop(&s_c);
        assert!(is_contrary(&a.projector(), &b.projector(), 100.0 * TOL).unwrap());
        let state = random_density(&mut rng, d);
        if generalized_probability(&state, &c).unwrap() <= 1e-3 {
            continue;
        }
        let ca = generalized_conditional(&state, &a, &c, TOL).unwrap();
        let cb = generalized_conditional(&state, &b, &c, TOL).unwrap();
        assert!(ca + cb <= 1.0 + 5.0 * TOL, "{ca} + {cb}");
        done += 1;
    }
}

#[test]
fn conditional_probability_agrees_with_reduced_state_route() {
    // Tr(rho Pi_p Pi_r) / Tr(rho Pi_r) must equal Tr(rho* Pi_p) with
    // rho* = Pi_r rho Pi_r / Tr(Pi_r rho Pi_r), for commuting p, r
    let mut rng = ChaCha8Rng::seed_from_u64(115);
    let mut done = 0;
    while done < 100 {
        let d = rng.gen_range(2..=7);
        let basis = random_unitary(&mut rng, d);
        let mask = |rng: &mut ChaCha8Rng| -> Vec<usize> {
            (0..d).filter(|_| rng.gen_bool(0.5)).collect()
        };
        let s_p = mask(&mut rng);
        let s_r = mask(&mut rng);
        if s_p.is_empty() || s_r.is_empty() {
            continue;
        }
        let take = |s: &[usize]| -> Projector {
            let vs: Vec<CVector> = s.iter().map(|&k| basis.column(k).into_owned()).collect();
            projector_from_vectors(&vs, TOL).unwrap()
        };
        let p = take(&s_p);
        let r = take(&s_r);
        let state = random_density(&mut rng, d);
        let weight = trace_probability(&state, &r).unwrap();
        if weight <= 1e-3 {
            continue;
        }
        let direct = conditional_probability(&state, &p, &r, TOL).unwrap();
        let reduced = r.matrix() * state.rho() * r.matrix();
        let rho_star = State::new(&reduced * C64::new(1.0 / reduced.trace().re, 0.0), 1e-6).unwrap();
        let via_reduced = trace_probability(&rho_star, &p).unwrap();
        assert!(
            (direct - via_reduced).abs() <= 5.0 * TOL,
            "{direct} vs {via_reduced}"
        );
        done += 1;
    }
}

#[test]
fn generalized_conditional_agrees_with_reduced_state_route() {
    // Pr(a | b) computed by index sets must match Tr(rho* Pi_a) with
    // rho* = Pi_b rho Pi_b / Tr(Pi_b rho Pi_b)
    let mut rng = ChaCha8Rng::seed_from_u64(110);
    let mut done = 0;
    while done < 100 {
        let d = rng.gen_range(2..=6);
        let basis = random_unitary(&mut rng, d);
        let parts1 = rng.gen_range(1..=d.min(3));
        let parts2 = rng.gen_range(1..=d.min(3));
        let tcs = vec![
            TimedContext::new(
                1.0,
                context_from_basis(&basis, &random_partition(&mut rng, d, parts1)),
            ),
            TimedContext::new(
                2.0,
                context_from_basis(&basis, &random_partition(&mut rng, d, parts2)),
            ),
        ];
        let gc = build_generalized_context(0.0, &tcs, &Propagator::trivial(d), TOL)
            .unwrap()
            .compatible()
            .unwrap();
        let total = gc.atom_count();
        let pick = |rng: &mut ChaCha8Rng| -> Vec<Vec<usize>> {
            (0..total)
                .filter(|_| rng.gen_bool(0.5))
                .map(|l| multi_index(gc.shape(), l))
                .collect()
        };
        let sa = pick(&mut rng);
        let sb = pick(&mut rng);
        if sa.is_empty() || sb.is_empty() {
            continue;
        }
        let a = gc.property(&sa).unwrap();
        let b = gc.property(&sb).unwrap();
        let state = random_density(&mut rng, d);
        let pb = generalized_probability(&state, &b).unwrap();
        if pb <= 1e-3 {
            continue;
        }
        let via_sets = generalized_conditional(&state, &a, &b, TOL).unwrap();

        let pib = b.projector();
        let reduced = pib.matrix() * state.rho() * pib.matrix();
        let weight = reduced.trace().re;
        let rho_star = State::new(
            reduced * C64::new(1.0 / weight, 0.0),
            1e-6,
        )
        .unwrap();
        let via_reduced = trace_probability(&rho_star, &a.projector()).unwrap();
        assert!(
            (via_sets - via_reduced).abs() <= 5.0 * TOL,
            "{via_sets} vs {via_reduced}"
        );
        done += 1;
    }
}

#[test]
fn three_box_is_stable_under_global_unitary_conjugation() {
    let f = three_box();
    let baseline = analyze_retrodiction(
        &f.state, &f.p, &f.q, &f.r, &f.propagator, f.t0, f.t1, f.t2, TOL, TOL_C,
    )
    .unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(111);
    for _ in 0..20 {
        let u = random_unitary(&mut rng, 3);
        let conj_p = |p: &Projector| {
            Projector::new(&u * p.matrix() * u.adjoint(), 1e-6).unwrap()
        };
        let state = State::new(&u * f.state.rho() * u.adjoint(), 1e-6).unwrap();
        let report = analyze_retrodiction(
            &state,
            &conj_p(&f.p),
            &conj_p(&f.q),
            &conj_p(&f.r),
            &f.propagator,
            f.t0,
            f.t1,
            f.t2,
            TOL,
            TOL_C,
        )
        .unwrap();

        assert_eq!(report.contrary, baseline.contrary);
        assert_eq!(report.conclusion, baseline.conclusion);
        assert_eq!(report.gc_compatible, baseline.gc_compatible);
        for (a, b) in report.pair_checks.iter().zip(&baseline.pair_checks) {
            assert_eq!(a.commutes, b.commutes);
            assert!((a.commutator_norm - b.commutator_norm).abs() <= 1e-8);
        }
        for (x, y) in [
            (&report.p_family, &baseline.p_family),
            (&report.q_family, &baseline.q_family),
        ] {
            assert_eq!(x.consistent, y.consistent);
            assert!((x.conditional.unwrap() - y.conditional.unwrap()).abs() <= 1e-8);
            assert!(
                (x.conditioning_probability.unwrap() - y.conditioning_probability.unwrap()).abs()
                    <= 1e-8
            );
        }
    }
}

#[test]
fn contrary_inference_conclusion_requires_certainty_in_both_families() {
    // report soundness: whenever the analysis announces the contrary
    // inference, both families must be consistent with near-one conditionals
    let mut rng = ChaCha8Rng::seed_from_u64(112);
    for _ in 0..200 {
        let d = rng.gen_range(2..=5);
        let (rp, rq, rr) = (
            rng.gen_range(1..d),
            rng.gen_range(1..d),
            rng.gen_range(1..d),
        );
        let p = random_projector(&mut rng, d, rp);
        let q = random_projector(&mut rng, d, rq);
        let r = random_projector(&mut rng, d, rr);
        let state = random_density(&mut rng, d);
        let report = analyze_retrodiction(
            &state,
            &p,
            &q,
            &r,
            &Propagator::trivial(d),
            0.0,
            1.0,
            2.0,
            TOL,
            TOL_C,
        )
        .unwrap();
        if report.conclusion == Conclusion::ContraryInferenceInCh {
            assert!(report.contrary);
            assert!(report.p_family.consistent && report.q_family.consistent);
            assert!(report.p_family.conditional.unwrap() >= 1.0 - 1e-8);
            assert!(report.q_family.conditional.unwrap() >= 1.0 - 1e-8);
            assert!(report.gc_compatible);
        }
        // and the theorem itself: when everything commutes and both
        // conditionals exist, they cannot both be one
        if report.contrary && report.gc_compatible {
            if let (Some(cp), Some(cq)) =
                (report.p_family.conditional, report.q_family.conditional)
            {
                assert!(cp + cq <= 1.0 + 5.0 * TOL);
            }
        }
    }
}

#[test]
fn heisenberg_translation_preserves_rank_and_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(113);
    for _ in 0..100 {
        let d = rng.gen_range(2..=6);
        let h = random_hermitian(&mut rng, d);
        let prop = Propagator::hamiltonian(h, 1e-6).unwrap();
        let rank = rng.gen_range(0..=d);
        let p = random_projector(&mut rng, d, rank);
        let q = heisenberg_translate(&p, &prop, 1.3, -0.7).unwrap();
        assert_eq!(q.rank(), p.rank());
        // conjugation preserves the subspace order against the identity
        assert!(subspace_leq(&q, &Projector::full(d), TOL).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multi_linear_index_roundtrip(shape in prop::collection::vec(1usize..5, 1..4)) {
        let total: usize = shape.iter().product();
        for linear in 0..total {
            let multi = multi_index(&shape, linear);
            prop_assert_eq!(linear_index(&shape, &multi).unwrap(), linear);
            for (pos, &k) in multi.iter().enumerate() {
                prop_assert!(k < shape[pos]);
            }
        }
    }

    #[test]
    fn property_lattice_is_boolean_on_masks(
        n in 1usize..6,
        seed_a in 0u64..64,
        seed_b in 0u64..64,
    ) {
        let ctx = Context::coordinate(n);
        let mask = |bits: u64| -> BTreeSet<usize> {
            (0..n).filter(|k| bits & (1 << k) != 0).collect()
        };
        let a = ctx.property(mask(seed_a)).unwrap();
        let b = ctx.property(mask(seed_b)).unwrap();
        // absorption and idempotence
        prop_assert_eq!(a.meet(&a.join(&b).unwrap()).unwrap(), a.clone());
        prop_assert_eq!(a.join(&a.meet(&b).unwrap()).unwrap(), a.clone());
        prop_assert_eq!(a.meet(&a).unwrap(), a.clone());
        // complement laws
        prop_assert!(a.meet(&a.complement()).unwrap().index_set().is_empty());
        prop_assert_eq!(a.join(&a.complement()).unwrap(), ctx.full_property());
        // order compatibility
        prop_assert!(a.meet(&b).unwrap().leq(&a).unwrap());
        prop_assert!(a.leq(&a.join(&b).unwrap()).unwrap());
    }

    #[test]
    fn projector_from_random_vectors_validates(
        entries in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 2..9),
    ) {
        let v = CVector::from_iterator(
            entries.len(),
            entries.iter().map(|&(re, im)| C64::new(re, im)),
        );
        if v.norm() > 1e-3 {
            let p = projector_from_vectors(&[v], TOL).unwrap();
            prop_assert!(qhist::linalg::is_projector(p.matrix(), TOL));
            prop_assert_eq!(p.rank(), 1);
            prop_assert!((p.matrix().trace().re - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn random_pure_states_normalize(dim in 2usize..8, seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = random_pure_vector(&mut rng, dim);
        prop_assert!((v.norm() - 1.0).abs() < 1e-12);
        let state = State::pure(&v, TOL).unwrap();
        prop_assert!((state.rho().trace().re - 1.0).abs() < 1e-12);
    }
}

#[test]
fn identity_context_probabilities_are_degenerate() {
    // conditioning on the full property is a no-op
    let mut rng = ChaCha8Rng::seed_from_u64(114);
    let d = 4;
    let state = random_density(&mut rng, d);
    let p = random_projector(&mut rng, d, 2);
    let full = Projector::full(d);
    let conditional = conditional_probability(&state, &p, &full, TOL).unwrap();
    let unconditional = trace_probability(&state, &p).unwrap();
    assert!((conditional - unconditional).abs() <= 5.0 * TOL);
    let _ = identity(d);
}
