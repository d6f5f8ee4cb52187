use super::*;
use crate::qstate::{self, random_density, random_pure, random_separable};

fn cfg() -> OptConfig {
    OptConfig::default().with_restarts(8).with_seed(3)
}

fn ab() -> CutSpec {
    CutSpec::default()
}

fn psi_ac() -> DensityMatrix {
    CutSpec::new(Party::A, Party::C).restrict_pure(&qstate::make_ghz_epr_psi()).unwrap()
}

fn phi_ac() -> DensityMatrix {
    CutSpec::new(Party::A, Party::C).restrict_pure(&qstate::make_ghz_epr_phi()).unwrap()
}

fn ac_measuring_c() -> CutSpec {
    CutSpec::new(Party::A, Party::C).measuring(Party::C)
}

fn product_state() -> DensityMatrix {
    random_density(DimSpec::new(vec![2]).unwrap(), 2, 1)
        .unwrap()
        .tensor(&random_density(DimSpec::new(vec![3]).unwrap(), 2, 2).unwrap())
        .unwrap()
}

fn epr() -> DensityMatrix {
    qstate::epr().to_density().unwrap()
}

#[test]
fn mutual_information_examples() {
    assert!(mutual_information(&product_state(), &ab()).unwrap().value.abs() < 1e-10);
    assert!((mutual_information(&epr(), &ab()).unwrap().value - 2.0).abs() < 1e-10);
    let ac = CutSpec::new(Party::A, Party::C);
    assert!((mutual_information(&psi_ac(), &ac).unwrap().value - 3.0).abs() < 1e-10);
}

#[test]
fn s_min_examples() {
    let ac = CutSpec::new(Party::A, Party::C);
    let r = s_min(&psi_ac(), &ac).unwrap();
    assert!((r.value - 2.0).abs() < 1e-9);
    assert_eq!(r.bound_direction, BoundDirection::Exact);
    assert!(r.diagnostics.optimizer.is_none());
    assert!((s_min(&phi_ac(), &ac).unwrap().value - 3.0).abs() < 1e-9);
    let psi = random_pure(DimSpec::new(vec![3, 2]).unwrap(), 5).unwrap();
    let sa = psi.marginal_entropy(&[0]).unwrap();
    assert!((s_min(&psi.to_density().unwrap(), &ab()).unwrap().value - sa).abs() < 1e-10);
}

#[test]
fn s_min_equals_mutual_information_for_separable_states() {
    for seed in 0..10 {
        let sigma = random_separable(2, 3, 4, seed).unwrap();
        let sm = s_min(sigma.state(), &ab()).unwrap().value;
        let mi = mutual_information(sigma.state(), &ab()).unwrap().value;
        assert!((sm - mi).abs() < 1e-10);
    }
}

#[test]
fn coherent_information_examples() {
    assert!((coherent_information(&epr(), &ab()).unwrap().value - 1.0).abs() < 1e-10);
    let mixed = DensityMatrix::maximally_mixed(DimSpec::new(vec![2, 2]).unwrap()).unwrap();
    assert_eq!(coherent_information(&mixed, &ab()).unwrap().value, 0.0);
    let psi_ab = CutSpec::default().restrict_pure(&qstate::make_ghz_epr_psi()).unwrap();
    assert!((coherent_information(&psi_ab, &ab()).unwrap().value - 1.0).abs() < 1e-10);
}

#[test]
fn holevo_on_factorised_ghz_epr_marginal() {
    let r = holevo_correlation(&psi_ac(), &ac_measuring_c(), &cfg()).unwrap();
    assert!((r.value - 2.0).abs() < 1e-4, "{}", r.value);
    assert!(r.value <= 2.0 + 1e-9);
    assert_eq!(r.bound_direction, BoundDirection::Lower);
    let Some(Certificate::Single(p)) = &r.certificate else { panic!() };
    assert_eq!(p.dim(), 4);
    assert!((holevo_of(&psi_ac(), &ac_measuring_c(), p).unwrap() - r.value).abs() < 1e-10);
}

#[test]
fn holevo_of_epr_is_one_bit_from_either_side() {
    for side in [Party::A, Party::B] {
        let r = holevo_correlation(&epr(), &ab().measuring(side), &cfg()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-6);
    }
}

#[test]
fn product_blocks_of_ghz_epr_marginal() {
    let rho = psi_ac();
    let labels = rho.spec().labels().unwrap().to_vec();
    let blocks: Vec<Vec<&str>> = product_blocks(&rho)
        .unwrap()
        .iter()
        .map(|b| b.iter().map(|&k| labels[k].as_str()).collect())
        .collect();
    assert_eq!(blocks, vec![vec!["a1", "c1"], vec!["a2"], vec!["a3", "c2"]]);
}

#[test]
fn symmetric_correlation_examples() {
    let cc = symmetric_correlation(&qstate::cc_state(), &ab(), &cfg(), &cfg()).unwrap();
    assert!((cc.value - 1.0).abs() < 1e-9);
    assert!(symmetric_correlation(&product_state(), &ab(), &cfg(), &cfg()).unwrap().value.abs() < 1e-9);
    let trine = qstate::make_trine();
    let proj = opt::projective_variant(&cfg());
    let p = symmetric_correlation(&trine, &ab(), &proj, &proj).unwrap().value;
    let r = symmetric_correlation(&trine, &ab(), &cfg(), &cfg()).unwrap().value;
    assert!(r > p + 0.01, "{r} vs {p}");
}

#[test]
fn trine_symmetric_correlation_matches_qubit_side_holevo() {
    let trine = qstate::make_trine();
    let c = symmetric_correlation(&trine, &ab(), &cfg(), &cfg()).unwrap().value;
    let ch = holevo_correlation(&trine, &ab().measuring(Party::B), &cfg()).unwrap().value;
    assert!((c - ch).abs() < 1e-3, "{c} vs {ch}");
    assert!((ch - 0.5849625007211561).abs() < 1e-4, "{ch}");
}

#[test]
fn discord_examples() {
    let probs = [0.3, 0.7];
    let states = [
        random_density(DimSpec::new(vec![2]).unwrap(), 2, 8).unwrap(),
        random_density(DimSpec::new(vec![2]).unwrap(), 1, 9).unwrap(),
    ];
    let cq = qstate::make_cq_state(&probs, &states).unwrap();
    let d = discord(&cq, &ab().measuring(Party::A), &cfg()).unwrap();
    assert!(d.value.abs() < 1e-4, "{}", d.value);
    assert_eq!(d.bound_direction, BoundDirection::Upper);
    assert!((discord(&epr(), &ab().measuring(Party::A), &cfg()).unwrap().value - 1.0).abs() < 1e-6);
    assert!(discord(&product_state(), &ab().measuring(Party::B), &cfg()).unwrap().value.abs() < 1e-6);
}

#[test]
fn symmetric_discord_examples() {
    let trine = qstate::make_trine();
    let qs = symmetric_discord(&trine, &ab(), &cfg(), &cfg()).unwrap().value;
    let qd = discord(&trine, &ab().measuring(Party::B), &cfg()).unwrap().value;
    assert!((qs - qd).abs() < 1e-3);
    assert!(symmetric_discord(&qstate::cc_state(), &ab(), &cfg(), &cfg()).unwrap().value.abs() < 1e-4);
    assert!((symmetric_discord(&epr(), &ab(), &cfg(), &cfg()).unwrap().value - 1.0).abs() < 1e-6);
}

#[test]
fn eof_examples() {
    assert!((eof_two_qubit(&epr()).unwrap().value - 1.0).abs() < 1e-10);
    for seed in 0..10 {
        let s = random_separable(2, 2, 3, seed).unwrap();
        assert!(eof_two_qubit(s.state()).unwrap().value.abs() < 1e-10);
    }
    let b0 = qstate::bell_state(0).unwrap().to_density().unwrap();
    let b1 = qstate::bell_state(1).unwrap().to_density().unwrap();
    let m = b0.matrix() * c(0.9, 0.0) + b1.matrix() * c(0.1, 0.0);
    let rho = DensityMatrix::new(DimSpec::new(vec![2, 2]).unwrap(), m).unwrap();
    let r = eof_two_qubit(&rho).unwrap();
    assert!((r.diagnostics.get("concurrence").unwrap() - 0.8).abs() < 1e-10);
    assert!((r.value - 0.7219280948873624).abs() < 1e-10);
    assert!(matches!(eof_two_qubit(&qstate::make_trine()), Err(Error::Argument(_))));
}

#[test]
fn koashi_winter_examples() {
    let ket0 = qstate::basis_state(&[2], 0).unwrap();
    let psi = qstate::epr().tensor(&ket0);
    let map = [Party::A, Party::B, Party::C];
    let kw = koashi_winter_residual(&psi, Some(&map), &cfg()).unwrap();
    assert!(kw.residual.abs() < 1e-8, "{kw:?}");
    let kw = koashi_winter_residual(&qstate::ghz(), Some(&map), &cfg()).unwrap();
    assert!((kw.eof).abs() < 1e-10 && (kw.holevo - 1.0).abs() < 1e-8);
    assert!(kw.residual.abs() < 1e-8);
    for seed in 0..5 {
        let psi = random_pure(DimSpec::new(vec![2, 2, 2]).unwrap(), seed).unwrap();
        let kw = koashi_winter_residual(&psi, Some(&map), &cfg()).unwrap();
        assert!(kw.residual >= -1e-3 && kw.residual <= 1e-8, "{kw:?}");
    }
    let big = random_pure(DimSpec::new(vec![3, 2, 2]).unwrap(), 1).unwrap();
    assert!(matches!(koashi_winter_residual(&big, Some(&map), &cfg()), Err(Error::Argument(_))));
}

#[test]
fn irreversibility_on_ghz_epr_states() {
    let psi = irreversibility_bound(&qstate::make_ghz_epr_psi(), None, &cfg()).unwrap();
    assert!(psi.bound.value.abs() < 1e-3, "{psi:?}");
    assert!((psi.discord_form.value - 1.0).abs() < 1e-3);
    assert_eq!(psi.bound.bound_direction, BoundDirection::Upper);
    let phi = irreversibility_bound(&qstate::make_ghz_epr_phi(), None, &cfg()).unwrap();
    assert!((phi.s_min_ac - 3.0).abs() < 1e-9);
    assert!((phi.holevo_additive.unwrap() - 2.0).abs() < 1e-9);
    assert!((phi.bound.value - 1.0).abs() < 1e-3);
}

#[test]
fn probe_examples() {
    let sigma = random_separable(2, 2, 3, 17).unwrap();
    let cut = ab().measuring(Party::A);
    let single = holevo_correlation(sigma.state(), &cut, &cfg()).unwrap().value;
    let probe = regularization_probe_n2(sigma.state(), &cut, &cfg()).unwrap();
    assert!((probe.value - single).abs() < 1e-3, "{} vs {single}", probe.value);

    let psi = random_pure(DimSpec::new(vec![2, 2]).unwrap(), 4).unwrap();
    let sa = psi.marginal_entropy(&[0]).unwrap();
    let probe = regularization_probe_n2(&psi.to_density().unwrap(), &cut, &cfg()).unwrap();
    assert!((probe.value - sa).abs() < 1e-3);

    let trine = qstate::make_trine();
    let cut_b = ab().measuring(Party::B);
    let single = holevo_correlation(&trine, &cut_b, &cfg()).unwrap().value;
    let probe = regularization_probe_n2(&trine, &cut_b, &cfg()).unwrap().value;
    assert!(probe >= single - 1e-6);

    let big = random_density(DimSpec::new(vec![3, 3]).unwrap(), 2, 1).unwrap();
    assert!(matches!(regularization_probe_n2(&big, &cut, &cfg()), Err(Error::Capacity { .. })));
}

#[test]
fn lemma2_examples() {
    let cc = qstate::cc_state();
    let sep = SeparableState::declared(cc.clone());
    let cut = ab().measuring(Party::A);
    assert!((lemma2_additive_value(&cc, &sep, &cut, &cfg()).unwrap().value - 2.0).abs() < 1e-9);

    let prod = SeparableState::declared(product_state());
    let v = lemma2_additive_value(&epr(), &prod, &ab().measuring(Party::B), &cfg()).unwrap();
    assert!((v.value - 1.0).abs() < 1e-6);

    // EPR on (a3, c2) and the remaining separable part of the nine-qubit marginal
    let rho = phi_ac();
    let labels = rho.spec().labels().unwrap().to_vec();
    let idx = |names: &[&str]| -> Vec<usize> { names.iter().map(|n| labels.iter().position(|l| l == n).unwrap()).collect() };
    let pair = rho.partial_trace(&idx(&["a3", "c2"])).unwrap();
    let rest = rho.partial_trace(&idx(&["a1", "a2", "c1", "c3"])).unwrap();
    let v = lemma2_additive_value(&pair, &SeparableState::declared(rest), &ac_measuring_c(), &cfg()).unwrap();
    assert!((v.value - 2.0).abs() < 1e-6, "{}", v.value);
}

#[test]
fn sandwich_examples() {
    let s = cl_sandwich(&qstate::cc_state(), &ab(), &cfg(), &cfg()).unwrap();
    assert!((s.lower.value - 1.0).abs() < 1e-9 && (s.upper.value - 1.0).abs() < 1e-9);
    assert!(s.width().abs() < 1e-9);
    let s = cl_sandwich(&product_state(), &ab(), &cfg(), &cfg()).unwrap();
    assert!(s.lower.value.abs() < 1e-9 && s.upper.value.abs() < 1e-6);
    let s = cl_sandwich(&qstate::make_trine(), &ab(), &cfg(), &cfg()).unwrap();
    assert!((s.upper.value - 1.0).abs() < 1e-6);
    assert!(s.width() > 0.3);
}

#[test]
fn report_json_shape() {
    let r = s_min(&epr(), &ab()).unwrap();
    let j = r.to_json(None);
    assert_eq!(j["name"], "s-min");
    assert_eq!(j["bound_direction"], "exact");
    assert_eq!(j["value"], 1.0);
    let h = holevo_correlation(&epr(), &ab().measuring(Party::A), &cfg()).unwrap().to_json(Some("cert.json"));
    assert_eq!(h["certificate_file"], "cert.json");
    assert!(h["diagnostics"]["restarts"].as_u64().unwrap() > 0);
    assert_eq!(round12(0.45914791702724467), 0.459147917027);
}

#[test]
fn cut_validation() {
    assert!(mutual_information(&epr(), &CutSpec::new(Party::A, Party::A)).is_err());
    assert!(holevo_correlation(&epr(), &ab(), &cfg()).is_err());
    assert!(holevo_correlation(&epr(), &ab().measuring(Party::C), &cfg()).is_err());
    let three = random_density(DimSpec::new(vec![2, 2, 2]).unwrap(), 2, 1).unwrap();
    assert!(mutual_information(&three, &ab()).is_err());
    let mapped = ab().with_party_map(vec![Party::A, Party::B, Party::B]);
    assert!(mutual_information(&three, &mapped).is_ok());
}
