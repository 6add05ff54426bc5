use proptest::prelude::*;
use qtransfer_core::entanglement::{negativity_general, pt_spectrum};
use qtransfer_core::jcdynamics::{jc_hamiltonian, jc_unitary, jc_unitary_oracle, JCParams};
use qtransfer_core::tensorops::{
    eig_hermitian, hermiticity_error, mat_exp, max_abs_diff, partial_trace, partial_transpose, unitarity_error,
    CMatrix, DensityOperator, Kron, TruncatedFockSpace, C64,
};

fn density_from(dims: Vec<usize>, raw: &[(f64, f64)]) -> DensityOperator {
    let space = TruncatedFockSpace::new(dims).unwrap();
    let n = space.total_dim();
    let a = CMatrix::from_fn(n, n, |i, j| {
        let (re, im) = raw[(i * n + j) % raw.len()];
        C64::new(re, im)
    });
    let m = &a * a.adjoint();
    let tr = m.trace().re;
    DensityOperator::new(space, m / C64::new(tr, 0.0), 0.0).unwrap()
}

fn entries(len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), len)
}

fn random_density(max_dim: usize) -> impl Strategy<Value = DensityOperator> {
    (1..=max_dim, entries(max_dim * max_dim)).prop_map(|(d, raw)| density_from(vec![d], &raw))
}

fn qubit_pair() -> impl Strategy<Value = DensityOperator> {
    entries(16).prop_map(|raw| density_from(vec![2, 2], &raw))
}

fn single_qubit() -> impl Strategy<Value = DensityOperator> {
    entries(4).prop_map(|raw| density_from(vec![2], &raw))
}

/// Element-by-element Kronecker product with the first factor slowest.
fn kron_reference(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kron_is_associative(a in random_density(3), b in random_density(3), c in random_density(3)) {
        let left = a.kron(&b).kron(&c);
        let right = a.kron(&b.kron(&c));
        prop_assert_eq!(left.space(), right.space());
        prop_assert!(max_abs_diff(left.matrix(), right.matrix()) < 1e-14);
    }

    #[test]
    fn kron_matches_reference(a in random_density(4), b in random_density(4)) {
        let got = a.kron(&b);
        prop_assert!(max_abs_diff(got.matrix(), &kron_reference(a.matrix(), b.matrix())) == 0.0);
    }

    #[test]
    fn partial_trace_of_product(a in random_density(4), b in random_density(3)) {
        let ab = a.kron(&b);
        let ra = partial_trace(&ab, &[0]).unwrap();
        let rb = partial_trace(&ab, &[1]).unwrap();
        prop_assert!(max_abs_diff(ra.matrix(), a.matrix()) < 1e-13);
        prop_assert!(max_abs_diff(rb.matrix(), b.matrix()) < 1e-13);
    }

    #[test]
    fn partial_trace_preserves_trace_and_validity(raw in entries(144), keep in prop::sample::subsequence(vec![0usize, 1, 2, 3], 1..4)) {
        let rho = density_from(vec![2, 3, 2, 1], &raw);
        let reduced = partial_trace(&rho, &keep).unwrap();
        prop_assert!((reduced.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(reduced.validate(1e-12).is_ok());
    }

    #[test]
    fn partial_transpose_keeps_trace_and_hermiticity(rho in qubit_pair(), factor in 0usize..2) {
        let pt = partial_transpose(&rho, factor).unwrap();
        prop_assert!((pt.trace() - rho.trace()).norm() < 1e-14);
        prop_assert!(hermiticity_error(pt.matrix()) < 1e-14);
        let twice = partial_transpose(&pt, factor).unwrap();
        prop_assert!(max_abs_diff(twice.matrix(), rho.matrix()) == 0.0);
    }

    #[test]
    fn transposing_either_side_gives_one_spectrum(rho in qubit_pair()) {
        let a = pt_spectrum(&rho, 0).unwrap();
        let b = pt_spectrum(&rho, 1).unwrap();
        for (x, y) in a.iter().zip(b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn measure_lies_in_unit_interval(rho in qubit_pair()) {
        let m = negativity_general(&rho).unwrap().measure;
        prop_assert!((0.0..=1.0 + 1e-12).contains(&m));
    }

    #[test]
    fn separable_mixtures_have_no_negative_partial_transpose(
        parts in prop::collection::vec((single_qubit(), single_qubit(), 0.01..1.0f64), 1..=8)
    ) {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let mut m = CMatrix::zeros(4, 4);
        for (a, b, w) in &parts {
            m += a.kron(b).matrix() * C64::new(w / total, 0.0);
        }
        let rho = DensityOperator::new(TruncatedFockSpace::qubits(2).unwrap(), m, 0.0).unwrap();
        let rep = negativity_general(&rho).unwrap();
        prop_assert!(rep.min_eigenvalue > -1e-12);
        prop_assert!(rep.measure < 1e-12);
    }

    #[test]
    fn eigenvalues_sum_to_trace(raw in entries(256)) {
        let rho = density_from(vec![16], &raw);
        let h = rho.matrix() - CMatrix::identity(16, 16) * C64::new(0.05, 0.0);
        let eig = eig_hermitian(&h).unwrap();
        prop_assert_eq!(eig.len(), 16);
        prop_assert!(eig.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!((eig.iter().sum::<f64>() - h.trace().re).abs() < 1e-12);
        let sq: f64 = eig.iter().map(|x| x * x).sum();
        prop_assert!((sq - (&h * &h).trace().re).abs() < 1e-12);
    }

    #[test]
    fn jaynes_cummings_evolution_is_unitary(lt in 0.0..20.0f64, d in 2usize..12) {
        let params = JCParams::new(lt).unwrap();
        let u = jc_unitary_oracle(params, d).unwrap();
        prop_assert!(unitarity_error(&u) < 1e-10);
        let closed = jc_unitary(params, d).unwrap();
        // the top level |e, d−1⟩ has no partner inside the truncation
        let top = d - 1;
        let mut gap: f64 = 0.0;
        for i in (0..2 * d).filter(|&i| i != top) {
            for j in (0..2 * d).filter(|&j| j != top) {
                gap = gap.max((u[(i, j)] - closed[(i, j)]).norm());
            }
        }
        prop_assert!(gap < 1e-9, "gap {gap}");
    }
}

#[test]
fn random_four_factor_trace_matches_loops() {
    let raw: Vec<(f64, f64)> = (0..400).map(|i| ((i as f64 * 0.37).sin(), (i as f64 * 0.91).cos())).collect();
    let dims = vec![2, 3, 2, 3];
    let rho = density_from(dims.clone(), &raw);
    let got = partial_trace(&rho, &[1, 2]).unwrap();
    let mut want = CMatrix::zeros(6, 6);
    for a in 0..3 {
        for b in 0..2 {
            for a2 in 0..3 {
                for b2 in 0..2 {
                    for x in 0..2 {
                        for y in 0..3 {
                            let i = ((x * 3 + a) * 2 + b) * 3 + y;
                            let j = ((x * 3 + a2) * 2 + b2) * 3 + y;
                            want[(a * 2 + b, a2 * 2 + b2)] += rho.matrix()[(i, j)];
                        }
                    }
                }
            }
        }
    }
    assert!(max_abs_diff(got.matrix(), &want) < 1e-15);
}

#[test]
fn hamiltonian_exponential_matches_taylor_series() {
    let d = 6;
    let h = jc_hamiltonian(d).unwrap();
    let t = 0.7;
    let mut term = CMatrix::identity(2 * d, 2 * d);
    let mut sum = term.clone();
    for k in 1..60 {
        term = &term * &h * C64::new(0.0, -t / k as f64);
        sum += &term;
    }
    assert!(max_abs_diff(&mat_exp(&(h * C64::new(0.0, -1.0)), t), &sum) < 1e-13);
}
