use lprx_core::equalizer::{self, codes};
use lprx_core::model::EvidenceTable;

// Triangle-code ISI instance with per-section edge likelihoods chosen so
// the relaxation's optimum sits on a fractional vertex while the best
// valid configuration scores strictly lower.
fn main() {
    let trellis = equalizer::build_trellis(&codes::default_taps_l1());
    let structure = equalizer::equalizer_structure(&codes::triangle(), &trellis).unwrap();
    let weights: Vec<f64> = [0.0f64, 1.0, 1.0, -10.0].iter().map(|l| l.exp()).collect();
    let evidence = (0..3).map(|i| EvidenceTable::new(i, weights.clone())).collect();
    let model = structure.with_evidence(evidence).unwrap();
    let text = serde_json::to_string_pretty(&model.to_file()).unwrap();
    std::fs::write("models/halfint_witness.json", text + "\n").unwrap();
    println!("written");
}
