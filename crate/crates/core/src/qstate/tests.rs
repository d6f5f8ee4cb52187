use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use super::io::{parse_state, render_state, LoadedState};
use super::*;
use crate::linalg::{c, max_abs_diff};

fn dm(dims: &[usize], entries: &[f64]) -> DensityMatrix {
    let n: usize = dims.iter().product();
    let m = CMatrix::from_fn(n, n, |i, j| c(entries[i * n + j], 0.0));
    DensityMatrix::new(DimSpec::new(dims.to_vec()).unwrap(), m).unwrap()
}

fn mixed(d: usize) -> DensityMatrix {
    DensityMatrix::maximally_mixed(DimSpec::new(vec![d]).unwrap()).unwrap()
}

#[test]
fn tensor_of_maximally_mixed_qubits() {
    let r = mixed(2).tensor(&mixed(2)).unwrap();
    assert_eq!(r.dims(), &[2, 2]);
    assert!(max_abs_diff(r.matrix(), &(linalg::identity(4) * c(0.25, 0.0))) < 1e-15);
}

#[test]
fn tensor_of_basis_projectors() {
    let zero = basis_state(&[2], 0).unwrap().to_density().unwrap();
    let one = basis_state(&[2], 1).unwrap().to_density().unwrap();
    let r = zero.tensor(&one).unwrap();
    let expect = basis_state(&[2, 2], 1).unwrap().to_density().unwrap();
    assert!(max_abs_diff(r.matrix(), expect.matrix()) < 1e-15);
}

#[test]
fn tensor_entropy_is_additive() {
    let a = random_density(DimSpec::new(vec![3]).unwrap(), 3, 1).unwrap();
    let b = random_density(DimSpec::new(vec![2]).unwrap(), 2, 2).unwrap();
    let s = a.tensor(&b).unwrap().entropy().unwrap();
    assert_abs_diff_eq!(s, a.entropy().unwrap() + b.entropy().unwrap(), epsilon = tol::NUM);
}

#[test]
fn tensor_beyond_capacity_is_rejected() {
    let big = mixed(16);
    let bigger = big.tensor(&big).unwrap();
    assert!(matches!(bigger.tensor(&mixed(2)), Err(Error::Capacity { requested: 512, .. })));
}

#[test]
fn partial_trace_recovers_factor() {
    let a = random_density(DimSpec::new(vec![3]).unwrap(), 2, 5).unwrap();
    let b = random_density(DimSpec::new(vec![2]).unwrap(), 2, 6).unwrap();
    let ab = a.tensor(&b).unwrap();
    assert!(max_abs_diff(ab.partial_trace(&[0]).unwrap().matrix(), a.matrix()) < 1e-14);
    assert!(max_abs_diff(ab.partial_trace(&[1]).unwrap().matrix(), b.matrix()) < 1e-14);
}

#[test]
fn partial_trace_of_epr_is_maximally_mixed() {
    let e = epr().to_density().unwrap();
    for k in 0..2 {
        assert!(max_abs_diff(e.partial_trace(&[k]).unwrap().matrix(), mixed(2).matrix()) < 1e-15);
    }
}

#[test]
fn partial_trace_rejects_empty_keep() {
    let e = epr().to_density().unwrap();
    assert!(matches!(e.partial_trace(&[]), Err(Error::Argument(_))));
    assert!(matches!(e.partial_trace(&[2]), Err(Error::Argument(_))));
}

#[test]
fn ghz_epr_phi_ab_marginal_factorises() {
    // ρ_AB = EPR(a2 b2) ⊗ CC(a1 b1) ⊗ I/4 (a3 b3)
    let phi = make_ghz_epr_phi();
    let labels = phi.spec().labels().unwrap().to_vec();
    let idx = |name: &str| labels.iter().position(|l| l == name).unwrap();
    let keep = [idx("a2"), idx("b2"), idx("a1"), idx("b1"), idx("a3"), idx("b3")];
    let rho = phi.reduced(&keep).unwrap();
    // reduced() keeps original order: a1 b1 a2 b2 a3 b3
    let order = [2, 3, 0, 1, 4, 5];
    let rho = rho.permute(&order).unwrap();
    let expect = epr()
        .to_density()
        .unwrap()
        .tensor(&cc_state())
        .unwrap()
        .tensor(&mixed(2))
        .unwrap()
        .tensor(&mixed(2))
        .unwrap();
    assert!(max_abs_diff(rho.matrix(), expect.matrix()) < 1e-14);
}

#[test]
fn purify_maximally_mixed_qubit() {
    let p = mixed(2).purify().unwrap();
    assert_eq!(p.dims(), &[2, 2]);
    assert_abs_diff_eq!(p.marginal_entropy(&[0]).unwrap(), 1.0, epsilon = 1e-12);
}

#[test]
fn purify_pure_state_uses_trivial_ancilla() {
    let proj = basis_state(&[3], 1).unwrap().to_density().unwrap();
    let p = proj.purify().unwrap();
    assert_eq!(p.dims(), &[3, 1]);
    assert!(max_abs_diff(p.reduced(&[0]).unwrap().matrix(), proj.matrix()) < 1e-14);
}

#[test]
fn purify_schmidt_coefficients() {
    // oracle: eigenvalues of diag(3/4, 1/4) are the squared Schmidt coefficients
    let r = dm(&[2], &[0.75, 0.0, 0.0, 0.25]);
    let p = r.purify().unwrap();
    let mut schmidt: Vec<f64> = linalg::eigvalsh(p.reduced(&[1]).unwrap().matrix())
        .into_iter()
        .map(f64::sqrt)
        .collect();
    schmidt.sort_by(|a, b| b.total_cmp(a));
    assert_abs_diff_eq!(schmidt[0], 0.75f64.sqrt(), epsilon = 1e-12);
    assert_abs_diff_eq!(schmidt[1], 0.25f64.sqrt(), epsilon = 1e-12);
}

#[test]
fn purify_then_trace_is_identity_on_random_states() {
    let dims = [vec![2], vec![3], vec![2, 2], vec![2, 3], vec![4], vec![3, 3], vec![2, 2, 2], vec![4, 4]];
    for seed in 0..1000u64 {
        let d = &dims[(seed % dims.len() as u64) as usize];
        let n: usize = d.iter().product();
        let rank = 1 + (seed as usize / dims.len()) % n;
        let r = random_density(DimSpec::new(d.clone()).unwrap(), rank, seed).unwrap();
        let p = r.purify().unwrap();
        let system: Vec<usize> = (0..d.len()).collect();
        let back = p.reduced(&system).unwrap();
        assert!(max_abs_diff(back.matrix(), r.matrix()) < tol::RECON, "seed {seed}");
    }
}

#[test]
fn entropy_examples() {
    assert_abs_diff_eq!(mixed(2).entropy().unwrap(), 1.0, epsilon = 1e-14);
    let pure = random_pure(DimSpec::new(vec![3]).unwrap(), 3).unwrap().to_density().unwrap();
    assert_abs_diff_eq!(pure.entropy().unwrap(), 0.0, epsilon = 1e-12);
    // oracle: -(3/4)log2(3/4) - (1/4)log2(1/4)
    let r = dm(&[2], &[0.75, 0.0, 0.0, 0.25]);
    assert_abs_diff_eq!(r.entropy().unwrap(), 0.811_278_124_459_132_8, epsilon = 1e-12);
}

#[test]
fn entropy_rejects_negative_spectrum() {
    let m = CMatrix::from_row_slice(2, 2, &[c(1.1, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.1, 0.0)]);
    assert!(matches!(von_neumann_entropy(&m), Err(Error::InvalidState(_))));
}

#[test]
fn density_validation_errors() {
    let spec = DimSpec::new(vec![2]).unwrap();
    let non_herm = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.2, 0.0), c(0.5, 0.0)]);
    assert!(DensityMatrix::new(spec.clone(), non_herm).is_err());
    let bad_trace = linalg::identity(2);
    assert!(DensityMatrix::new(spec.clone(), bad_trace).is_err());
    let neg = CMatrix::from_row_slice(2, 2, &[c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]);
    assert!(DensityMatrix::new(spec, neg).is_err());
}

#[test]
fn cq_state_examples() {
    let z0 = basis_state(&[2], 0).unwrap().to_density().unwrap();
    let z1 = basis_state(&[2], 1).unwrap().to_density().unwrap();
    let cc = make_cq_state(&[0.5, 0.5], &[z0.clone(), z1]).unwrap();
    assert!(max_abs_diff(cc.matrix(), cc_state().matrix()) < 1e-15);
    let single = make_cq_state(&[1.0], &[z0.clone()]).unwrap();
    assert_eq!(single.dims(), &[1, 2]);
    assert!(matches!(make_cq_state(&[0.5, 0.5], &[z0]), Err(Error::Argument(_))));
}

#[test]
fn trine_marginals() {
    let t = make_trine();
    assert_eq!(t.dims(), &[3, 2]);
    assert!(max_abs_diff(t.partial_trace(&[1]).unwrap().matrix(), mixed(2).matrix()) < 1e-15);
    assert!(max_abs_diff(t.partial_trace(&[0]).unwrap().matrix(), mixed(3).matrix()) < 1e-15);
    let states = trine_states();
    for (i, s) in states.iter().enumerate() {
        let j = (i + 1) % 3;
        // equal angles of 2π/3 on the Bloch sphere ⇒ |⟨φ_i|φ_j⟩|² = 1/4
        assert_abs_diff_eq!(s.amplitudes().dotc(states[j].amplitudes()).norm_sqr(), 0.25, epsilon = 1e-14);
    }
}

#[test]
fn ghz_epr_states_have_expected_shape() {
    let psi = make_ghz_epr_psi();
    assert_eq!(psi.dims().len(), 7);
    assert_eq!(psi.spec().subsystems_of(Party::A).unwrap(), vec![0, 3, 5]);
    assert_eq!(psi.spec().subsystems_of(Party::C).unwrap(), vec![2, 6]);
    let phi = make_ghz_epr_phi();
    assert_eq!(phi.dims().len(), 9);
    assert_eq!(phi.spec().subsystems_of(Party::B).unwrap(), vec![1, 4, 7]);
    let ac = phi.reduced_parties(&[Party::A, Party::C]).unwrap().bipartite(Party::A, Party::C).unwrap();
    assert_eq!(ac.dims(), &[8, 8]);
}

#[test]
fn one_way_mcs_with_orthogonal_overlaps_is_block_diagonal() {
    let a = vec![basis_state(&[2], 0).unwrap(), bloch_equatorial(1.0)];
    let r = make_one_way_mcs(&[0.3, 0.7], &a, &linalg::identity(2)).unwrap();
    for x in 0..2 {
        for y in 0..2 {
            assert!(r.matrix()[(x * 2, y * 2 + 1)].norm() < 1e-15);
        }
    }
}

#[test]
fn one_way_mcs_single_term_is_product_pure() {
    let a = vec![bloch_equatorial(0.4)];
    let r = make_one_way_mcs(&[1.0], &a, &linalg::identity(1)).unwrap();
    assert_abs_diff_eq!(r.entropy().unwrap(), 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(r.partial_trace(&[0]).unwrap().entropy().unwrap(), 0.0, epsilon = 1e-12);
}

#[test]
fn one_way_mcs_with_identical_b_states_is_pure_entangled() {
    let p = [0.25, 0.75];
    let a = vec![basis_state(&[2], 0).unwrap(), basis_state(&[2], 1).unwrap()];
    let ones = CMatrix::from_element(2, 2, linalg::ONE);
    let r = make_one_way_mcs(&p, &a, &ones).unwrap();
    // direct construction: Σ √p_i |a_i⟩|i⟩
    let mut v = CVector::zeros(4);
    v[0] = c(p[0].sqrt(), 0.0);
    v[3] = c(p[1].sqrt(), 0.0);
    assert!(max_abs_diff(r.matrix(), &linalg::outer(&v)) < 1e-14);
}

#[test]
fn one_way_mcs_rejects_inconsistent_overlaps() {
    let a = vec![basis_state(&[2], 0).unwrap(), basis_state(&[2], 1).unwrap()];
    let bad = CMatrix::from_row_slice(2, 2, &[linalg::ONE, c(2.0, 0.0), c(2.0, 0.0), linalg::ONE]);
    assert!(matches!(make_one_way_mcs(&[0.5, 0.5], &a, &bad), Err(Error::Argument(_))));
}

#[test]
fn random_samplers_are_valid_and_deterministic() {
    let r = random_density(DimSpec::new(vec![2, 2]).unwrap(), 4, 7).unwrap();
    let again = random_density(DimSpec::new(vec![2, 2]).unwrap(), 4, 7).unwrap();
    assert_eq!(r.matrix(), again.matrix());
    DensityMatrix::new(r.spec().clone(), r.matrix().clone()).unwrap();

    let sep = random_separable(2, 3, 1, 11).unwrap();
    let s = sep.state();
    let mi = s.partial_trace(&[0]).unwrap().entropy().unwrap() + s.partial_trace(&[1]).unwrap().entropy().unwrap()
        - s.entropy().unwrap();
    assert_abs_diff_eq!(mi, 0.0, epsilon = 1e-9);

    let p = random_pure(DimSpec::new(vec![2, 2]).unwrap(), 3).unwrap();
    assert_abs_diff_eq!(p.marginal_entropy(&[0]).unwrap(), p.marginal_entropy(&[1]).unwrap(), epsilon = 1e-10);
}

#[test]
fn ppt_certificate_accepts_separable_and_rejects_epr() {
    let sep = random_separable(2, 2, 3, 4).unwrap();
    assert!(SeparableState::ppt_certified(sep.state()).is_ok());
    let e = epr().to_density().unwrap();
    assert!(matches!(SeparableState::ppt_certified(&e), Err(Error::Argument(_))));
}

#[test]
fn bipartite_grouping_orders_parties() {
    let psi = make_ghz_epr_psi();
    let ac = psi.reduced_parties(&[Party::A, Party::C]).unwrap();
    let ca = ac.bipartite(Party::C, Party::A).unwrap();
    assert_eq!(ca.dims(), &[4, 8]);
    let s_c = ca.partial_trace(&[0]).unwrap().entropy().unwrap();
    assert_abs_diff_eq!(s_c, 2.0, epsilon = 1e-12);
}

#[test]
fn state_file_roundtrip_is_exact() {
    let r = random_density(DimSpec::new(vec![2, 3]).unwrap(), 3, 9).unwrap();
    let text = render_state(&LoadedState::Mixed(r.clone()), Some("x"), None);
    let back = parse_state(&text).unwrap();
    assert_eq!(back.label.as_deref(), Some("x"));
    assert_eq!(back.state.density().unwrap().matrix(), r.matrix());
    let psi = make_ghz_epr_psi();
    let text = render_state(&LoadedState::Pure(psi.clone()), None, None);
    let back = parse_state(&text).unwrap();
    assert_eq!(back.state.as_pure().unwrap().amplitudes(), psi.amplitudes());
    assert_eq!(back.state.spec(), psi.spec());
}

#[test]
fn state_file_rejects_both_payloads() {
    let text = r#"{"dims":[1],"matrix":[[[1,0]]],"vector":[[1,0]]}"#;
    assert!(matches!(parse_state(text), Err(Error::Parse(_))));
}

fn entropies(r: &DensityMatrix) -> (f64, f64, f64) {
    (
        r.partial_trace(&[0]).unwrap().entropy().unwrap(),
        r.partial_trace(&[1]).unwrap().entropy().unwrap(),
        r.entropy().unwrap(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn araki_lieb_and_subadditivity(seed in any::<u64>(), da in 2usize..4, db in 2usize..4, rank_frac in 0.0f64..1.0) {
        let n = da * db;
        let rank = 1 + ((n - 1) as f64 * rank_frac) as usize;
        let r = random_density(DimSpec::new(vec![da, db]).unwrap(), rank, seed).unwrap();
        let (sa, sb, sab) = entropies(&r);
        prop_assert!((sa - sb).abs() <= sab + tol::NUM);
        prop_assert!(sab <= sa + sb + tol::NUM);
    }

    #[test]
    fn separable_states_have_larger_joint_entropy(seed in any::<u64>(), da in 2usize..4, db in 2usize..4, terms in 1usize..6) {
        let s = random_separable(da, db, terms, seed).unwrap();
        let (sa, sb, sab) = entropies(s.state());
        prop_assert!(sa <= sab + tol::NUM);
        prop_assert!(sb <= sab + tol::NUM);
    }

    #[test]
    fn tensor_entropy_additivity(s1 in any::<u64>(), s2 in any::<u64>(), d1 in 1usize..5, d2 in 1usize..5) {
        let a = random_density(DimSpec::new(vec![d1]).unwrap(), d1, s1).unwrap();
        let b = random_density(DimSpec::new(vec![d2]).unwrap(), 1 + (s2 as usize) % d2, s2).unwrap();
        let s = a.tensor(&b).unwrap().entropy().unwrap();
        prop_assert!((s - a.entropy().unwrap() - b.entropy().unwrap()).abs() < tol::NUM);
    }
}
