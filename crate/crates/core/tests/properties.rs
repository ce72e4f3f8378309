use nalgebra::DMatrix;
use proptest::prelude::*;

use pauli_qfi::channels::{
    assemble_block_derivative, assemble_blocks, post_channel_blocks, prepared_state_blocks, Axis,
};
use pauli_qfi::correlations::{
    bell_diagonalize, discord_protocol, discord_rmu, discord_xstate, is_separable_ppt,
    rho_final_two_qubit, separability_threshold, PPT_TOL,
};
use pauli_qfi::linop::{hermitian_eig, partial_trace, tensor, Operator, C64};
use pauli_qfi::mc::single_use_fisher;
use pauli_qfi::protocol::{gain, qfi_correlated, ProtocolPoint};
use pauli_qfi::qfi::{
    block_qfi_sum, block_route_sld, qfi_independent_opt, sld_eig, DEFAULT_SUPPORT_TOL,
};
use pauli_qfi::verify::dense_post_channel;

fn complex_matrix(dim: usize) -> impl Strategy<Value = DMatrix<C64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |v| {
        DMatrix::from_iterator(dim, dim, v.into_iter().map(|(a, b)| C64::new(a, b)))
    })
}

fn hermitian(dim: usize) -> impl Strategy<Value = Operator> {
    complex_matrix(dim).prop_map(|g| Operator::from_matrix(&g + g.adjoint()).unwrap())
}

/// `G G^dagger / Tr + eps I`, renormalized: full rank with eigenvalues
/// bounded away from zero.
fn full_rank_density(dim: usize) -> impl Strategy<Value = Operator> {
    complex_matrix(dim).prop_map(move |g| {
        let mut m = &g * g.adjoint();
        let tr = m.trace().re;
        m /= C64::new(tr, 0.0);
        m += DMatrix::identity(dim, dim) * C64::new(0.05, 0.0);
        m /= C64::new(1.0 + 0.05 * dim as f64, 0.0);
        Operator::from_matrix(m).unwrap()
    })
}

fn traceless_hermitian(dim: usize) -> impl Strategy<Value = Operator> {
    hermitian(dim).prop_map(move |h| {
        let shift = h.trace().re / dim as f64;
        h.sub(&Operator::identity(dim).unwrap().scale_re(shift))
    })
}

fn dims() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![2usize, 4, 8, 16, 32])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigendecomposition_reconstructs(h in dims().prop_flat_map(hermitian)) {
        let s = hermitian_eig(&h).unwrap();
        let rec = Operator::from_matrix(s.reconstruct()).unwrap();
        prop_assert!(rec.max_abs_diff(&h) < 1e-12 * h.max_abs().max(1.0));
        prop_assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let v = &s.eigenvectors;
        let gram = v.adjoint() * v - DMatrix::<C64>::identity(h.dim(), h.dim());
        prop_assert!(gram.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn partial_trace_of_product(a in full_rank_density(2), b in full_rank_density(4)) {
        // b occupies qubits 1 and 2, a sits on qubit 3
        let ab = tensor(&[a.clone(), b.clone()]).unwrap();
        prop_assert!(partial_trace(&ab, &[1, 2]).unwrap().max_abs_diff(&b) < 1e-14);
        prop_assert!(partial_trace(&ab, &[3]).unwrap().max_abs_diff(&a) < 1e-14);
    }

    #[test]
    fn sld_solves_the_defining_equation(
        (rho, drho) in prop::sample::select(vec![2usize, 4, 8])
            .prop_flat_map(|d| (full_rank_density(d), traceless_hermitian(d)))
    ) {
        let res = sld_eig(&rho, &drho, DEFAULT_SUPPORT_TOL).unwrap();
        prop_assert!(res.residual(&rho, &drho) < 1e-10 * drho.max_abs().max(1.0));
        let second_moment = rho.mul(&res.sld).mul(&res.sld).trace().re;
        prop_assert!((second_moment - res.qfi).abs() < 1e-9 * res.qfi.max(1.0));
        prop_assert!(res.qfi >= 0.0);
    }

    #[test]
    fn block_derivative_matches_finite_difference(
        n in 2usize..=5, r in 0.05f64..0.95, lambda in 0.05f64..0.95, m_frac in 0.0f64..1.0
    ) {
        let m = 1 + ((n as f64 * m_frac) as usize).min(n - 1);
        let blocks = prepared_state_blocks(n, r).unwrap();
        let h = 1e-6;
        let up = assemble_blocks(&post_channel_blocks(&blocks, lambda + h, m).unwrap()).unwrap();
        let down = assemble_blocks(&post_channel_blocks(&blocks, lambda - h, m).unwrap()).unwrap();
        let fd = up.sub(&down).scale_re(0.5 / h);
        let exact = assemble_block_derivative(&blocks, lambda, m).unwrap();
        prop_assert!(fd.max_abs_diff(&exact) < 1e-8);
    }

    #[test]
    fn three_qfi_routes_agree(
        n in 2usize..=4, r in 0.02f64..0.98, lambda in 0.02f64..0.98, m_frac in 0.0f64..1.0
    ) {
        let m = 1 + ((n as f64 * m_frac) as usize).min(n - 1);
        let closed = qfi_correlated(&ProtocolPoint::new(n, m, r, lambda).unwrap());
        let post = post_channel_blocks(&prepared_state_blocks(n, r).unwrap(), lambda, m).unwrap();
        let blocks = block_qfi_sum(&post, lambda, m).unwrap();
        let (rho, drho) = dense_post_channel(n, r, lambda, m).unwrap();
        let dense = sld_eig(&rho, &drho, DEFAULT_SUPPORT_TOL).unwrap();
        let tol = 1e-8 * closed.max(1e-300);
        prop_assert!((blocks - closed).abs() <= tol, "block {blocks} vs {closed}");
        prop_assert!((dense.qfi - closed).abs() <= tol, "dense {} vs {closed}", dense.qfi);
        let assembled = block_route_sld(&post, lambda, m).unwrap();
        prop_assert!(assembled.sld.max_abs_diff(&dense.sld) < 1e-7 * dense.sld.max_abs().max(1.0));
    }

    #[test]
    fn ppt_verdict_flips_at_threshold(m in 1usize..=3, lambda in 0.01f64..0.99) {
        let t = separability_threshold(m, lambda).unwrap();
        prop_assume!(t + 1e-6 < 1.0);
        let below = is_separable_ppt(&rho_final_two_qubit(t - 1e-6, lambda, m).unwrap(), PPT_TOL).unwrap();
        let above = is_separable_ppt(&rho_final_two_qubit(t + 1e-6, lambda, m).unwrap(), PPT_TOL).unwrap();
        prop_assert!(below.separable && !above.separable);
    }

    #[test]
    fn discord_routes_agree(r in 0.0f64..0.99, lambda in 0.0f64..1.0, m in 1usize..=4) {
        let closed = discord_protocol(r, lambda, m).unwrap();
        let generic = discord_xstate(&bell_diagonalize(&rho_final_two_qubit(r, lambda, m).unwrap()).unwrap()).unwrap();
        prop_assert!((closed.q - generic.q).abs() < 1e-10);
        prop_assert!((closed.c - generic.c).abs() < 1e-12);
        prop_assert!(closed.q >= -1e-10);
    }

    #[test]
    fn discord_ignores_the_sign_of_mu(r in 0.0f64..0.99, mu in 0.0f64..1.0) {
        prop_assert_eq!(discord_rmu(r, mu).unwrap().q, discord_rmu(r, -mu).unwrap().q);
    }

    #[test]
    fn classical_information_never_exceeds_quantum(r in 0.01f64..0.999, lambda in 0.01f64..0.99) {
        let h = qfi_independent_opt(r, lambda, 1).unwrap();
        let fy = single_use_fisher(r, lambda, Axis::Y).unwrap();
        let fx = single_use_fisher(r, lambda, Axis::X).unwrap();
        prop_assert!(fy <= h + 1e-9 && (fy - h).abs() < 1e-10 * h);
        prop_assert!(fx <= h + 1e-9 && fx < h);
    }

    #[test]
    fn single_use_gain_exceeds_one(n in 2usize..=12, r in 0.001f64..0.999, lambda in 0.0f64..1.0) {
        prop_assert!(gain(&ProtocolPoint::new(n, 1, r, lambda).unwrap()).unwrap() > 1.0);
    }
}
