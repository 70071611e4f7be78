use speclearn::group::parse_group_spec;
use speclearn::recover::recover_table;
use speclearn::specnet::{unitary_symmetry_witness, Model, WitnessOutcome};
use speclearn::train::{train, ModelSpec, TrainConfig};

#[test]
fn c6_defaults_converge_and_recover() {
    let group = parse_group_spec("C6").unwrap();
    let report = train(&group, &TrainConfig::default(), &ModelSpec::power_spectral()).unwrap();
    let last = report.final_loss().unwrap();
    assert!(last.invariance <= 1e-6, "{}", last.invariance);
    let mut recovery = recover_table(&report.weights);
    assert!(recovery.compare(&group.table()).unwrap());
    assert!(report.curve.iter().all(|r| r.invariance.is_finite() && r.invariance >= 0.0));
}

#[test]
fn translated_trained_weights_admit_a_unitary_witness() {
    let group = parse_group_spec("D3").unwrap();
    let report = train(&group, &TrainConfig::default(), &ModelSpec::power_spectral()).unwrap();
    let w = &report.weights;
    for g in 0..group.order() {
        let moved = w.act(&group, g).unwrap();
        let outcome = unitary_symmetry_witness(&Model::power_spectral(), w, &moved, 3).unwrap();
        assert!(matches!(outcome, WitnessOutcome::Aligned { .. }), "g = {g}: {outcome:?}");
    }
}
