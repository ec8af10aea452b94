//! Independent brute-force oracle.
//!
//! Plain-loop complex matrix arithmetic on `Vec`s — deliberately sharing no
//! code with the crate under test. Expected values asserted by the
//! acceptance suite are computed here from first principles: class
//! operators as explicit time-ordered products, the decoherence functional
//! as explicit traces.

pub type C = (f64, f64);
pub type Mat = Vec<Vec<C>>;

pub fn cadd(a: C, b: C) -> C {
    (a.0 + b.0, a.1 + b.1)
}

pub fn csub(a: C, b: C) -> C {
    (a.0 - b.0, a.1 - b.1)
}

pub fn cmul(a: C, b: C) -> C {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

pub fn conj(a: C) -> C {
    (a.0, -a.1)
}

pub fn modulus(a: C) -> f64 {
    (a.0 * a.0 + a.1 * a.1).sqrt()
}

pub fn zeros(n: usize) -> Mat {
    vec![vec![(0.0, 0.0); n]; n]
}

pub fn eye(n: usize) -> Mat {
    let mut m = zeros(n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = (1.0, 0.0);
    }
    m
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut out = zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = (0.0, 0.0);
            for k in 0..n {
                acc = cadd(acc, cmul(a[i][k], b[k][j]));
            }
            out[i][j] = acc;
        }
    }
    out
}

pub fn msub(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut out = zeros(n);
    for i in 0..n {
        for j in 0..n {
            out[i][j] = csub(a[i][j], b[i][j]);
        }
    }
    out
}

pub fn adjoint(a: &Mat) -> Mat {
    let n = a.len();
    let mut out = zeros(n);
    for i in 0..n {
        for j in 0..n {
            out[i][j] = conj(a[j][i]);
        }
    }
    out
}

pub fn trace(a: &Mat) -> C {
    let mut acc = (0.0, 0.0);
    for (i, row) in a.iter().enumerate() {
        acc = cadd(acc, row[i]);
    }
    acc
}

pub fn frob(a: &Mat) -> f64 {
    let mut acc = 0.0;
    for row in a {
        for &z in row {
            acc += z.0 * z.0 + z.1 * z.1;
        }
    }
    acc.sqrt()
}

/// |v><v| for a (not necessarily normalized) complex vector.
pub fn ray(v: &[C]) -> Mat {
    let norm_sq: f64 = v.iter().map(|z| z.0 * z.0 + z.1 * z.1).sum();
    let n = v.len();
    let mut out = zeros(n);
    for i in 0..n {
        for j in 0..n {
            let z = cmul(v[i], conj(v[j]));
            out[i][j] = (z.0 / norm_sq, z.1 / norm_sq);
        }
    }
    out
}

/// Density matrix of a pure state.
pub fn pure_state(v: &[C]) -> Mat {
    ray(v)
}

/// All multi-indices over `shape`, lexicographic, first position slowest.
pub fn product_indices(shape: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = shape.iter().product();
    (0..total)
        .map(|mut linear| {
            let mut idx = vec![0; shape.len()];
            for pos in (0..shape.len()).rev() {
                idx[pos] = linear % shape[pos];
                linear /= shape[pos];
            }
            idx
        })
        .collect()
}

/// Decoherence functional D(alpha, beta) = Tr(C_alpha rho C_beta^dag) with
/// class operators C_alpha = P_n^{k_n} ... P_1^{k_1} (later time leftmost).
/// Entries indexed by lexicographic multi-index order.
pub fn decoherence(contexts: &[Vec<Mat>], rho: &Mat) -> Vec<Vec<C>> {
    let shape: Vec<usize> = contexts.iter().map(Vec::len).collect();
    let indices = product_indices(&shape);
    let dim = rho.len();
    let class_ops: Vec<Mat> = indices
        .iter()
        .map(|alpha| {
            let mut m = eye(dim);
            for (pos, &k) in alpha.iter().enumerate() {
                m = matmul(&contexts[pos][k], &m);
            }
            m
        })
        .collect();
    let n = indices.len();
    let mut d = vec![vec![(0.0, 0.0); n]; n];
    for a in 0..n {
        let ca_rho = matmul(&class_ops[a], rho);
        for b in 0..n {
            d[a][b] = trace(&matmul(&ca_rho, &adjoint(&class_ops[b])));
        }
    }
    d
}

pub fn max_offdiagonal(d: &[Vec<C>]) -> f64 {
    let mut worst = 0.0f64;
    for (a, row) in d.iter().enumerate() {
        for (b, &z) in row.iter().enumerate() {
            if a != b {
                worst = worst.max(modulus(z));
            }
        }
    }
    worst
}

/// Everything the acceptance suite needs about the three-box instance,
/// computed by brute force.
pub struct ThreeBoxOracle {
    /// ||[P1, R]||_F.
    pub commutator_p1_r: f64,
    /// ||[P2, R]||_F.
    pub commutator_p2_r: f64,
    /// Tr(rho P1).
    pub born_p1: f64,
    /// Diagonal of D in the p-family, order ((p,r),(p,rbar),(pbar,r),(pbar,rbar)).
    pub p_family_diag: [f64; 4],
    pub p_family_max_offdiag: f64,
    /// Pr(p, t1 | r, t2) in the p-family.
    pub p_conditional: f64,
    pub q_family_max_offdiag: f64,
    pub q_conditional: f64,
    /// Worst off-diagonal in the joint {P1,P2,P3} x {R, Rbar} family.
    pub joint_max_offdiag: f64,
    /// ||R P1||_F^2.
    pub class_norm_sq: f64,
    /// Worst off-diagonal of the p-family for the state (1,1,0)/sqrt(2).
    pub altered_state_max_offdiag: f64,
}

pub fn three_box_oracle() -> ThreeBoxOracle {
    let one = (1.0, 0.0);
    let zero = (0.0, 0.0);
    let p1 = ray(&[one, zero, zero]);
    let p2 = ray(&[zero, one, zero]);
    let r = ray(&[one, one, (-1.0, 0.0)]);
    let id = eye(3);
    let p1_bar = msub(&id, &p1);
    let p2_bar = msub(&id, &p2);
    let r_bar = msub(&id, &r);
    let p3 = msub(&msub(&id, &p1), &p2);
    let rho = pure_state(&[one, one, one]);

    let comm = |a: &Mat, b: &Mat| frob(&msub(&matmul(a, b), &matmul(b, a)));

    let dp = decoherence(&[vec![p1.clone(), p1_bar.clone()], vec![r.clone(), r_bar.clone()]], &rho);
    let dq = decoherence(&[vec![p2.clone(), p2_bar], vec![r.clone(), r_bar.clone()]], &rho);
    let djoint = decoherence(
        &[vec![p1.clone(), p2, p3], vec![r.clone(), r_bar.clone()]],
        &rho,
    );

    // conditional Pr(x at t1 | r at t2) from the diagonal: histories with
    // k2 = 0 are linear indices 0 and 2 in a 2x2 family
    let conditional = |d: &[Vec<C>]| {
        let joint = d[0][0].0;
        let weight = d[0][0].0 + d[2][2].0;
        joint / weight
    };

    let altered = pure_state(&[one, one, zero]);
    let dp_altered = decoherence(&[vec![p1.clone(), p1_bar], vec![r.clone(), r_bar]], &altered);

    ThreeBoxOracle {
        commutator_p1_r: comm(&p1, &r),
        commutator_p2_r: comm(&ray(&[zero, one, zero]), &r),
        born_p1: trace(&matmul(&rho, &p1)).0,
        p_family_diag: [dp[0][0].0, dp[1][1].0, dp[2][2].0, dp[3][3].0],
        p_family_max_offdiag: max_offdiagonal(&dp),
        p_conditional: conditional(&dp),
        q_family_max_offdiag: max_offdiagonal(&dq),
        q_conditional: conditional(&dq),
        joint_max_offdiag: max_offdiagonal(&djoint),
        class_norm_sq: frob(&matmul(&r, &p1)).powi(2),
        altered_state_max_offdiag: max_offdiagonal(&dp_altered),
    }
}

#[test]
fn oracle_self_check() {
    // frozen closed-form values: the oracle must reproduce them before it
    // is allowed to vouch for the implementation
    let o = three_box_oracle();
    assert!((o.commutator_p1_r - 2.0 / 3.0).abs() < 1e-12);
    assert!((o.commutator_p2_r - 2.0 / 3.0).abs() < 1e-12);
    assert!((o.born_p1 - 1.0 / 3.0).abs() < 1e-12);
    assert!((o.p_family_diag[0] - 1.0 / 9.0).abs() < 1e-12);
    assert!((o.p_family_diag[1] - 2.0 / 9.0).abs() < 1e-12);
    assert!(o.p_family_diag[2].abs() < 1e-12);
    assert!((o.p_family_diag[3] - 2.0 / 3.0).abs() < 1e-12);
    assert!(o.p_family_max_offdiag < 1e-15);
    assert!((o.p_conditional - 1.0).abs() < 1e-12);
    assert!((o.q_conditional - 1.0).abs() < 1e-12);
    assert!((o.joint_max_offdiag - 1.0 / 9.0).abs() < 1e-12);
    assert!((o.class_norm_sq - 1.0 / 3.0).abs() < 1e-12);
    assert!((o.altered_state_max_offdiag - 1.0 / 6.0).abs() < 1e-12);
}
