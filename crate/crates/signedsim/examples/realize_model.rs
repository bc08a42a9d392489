//! # Minimal-negativity realizations from model files
//!
//! Loads outcome tables from the JSON schema (rationals like `3/8` enter
//! exactly) and solves for a signed phase-space measure of minimal total
//! variation weight.  Three tables with three different answers:
//!
//! - uniform rows: weight 1, no negativity needed;
//! - the Bell table: weight 5/4;
//! - the extremal no-signaling box: weight 2, maximal negativity demand.
//!
//! ## Run
//! ```sh
//! cargo run --example realize_model
//! ```

use signedsim::measures::ProbDist;
use signedsim::scenario::{
    model_from_json, no_signaling_check, nonnegative_realization_exists, realize_minimal,
    EmpiricalModel, MeasurementScenario,
};

const BELL: &str = include_str!("data/bell.json");
const PR_BOX: &str = include_str!("data/pr_box.json");

fn uniform_model() -> EmpiricalModel {
    let scenario = MeasurementScenario::bell();
    let labels = scenario.joint_outcome_labels();
    let rows = scenario
        .contexts()
        .into_iter()
        .map(|c| (c, ProbDist::new(labels.clone(), vec![0.25; 4]).unwrap()))
        .collect();
    EmpiricalModel::new(scenario, rows).unwrap()
}

fn report(name: &str, model: &EmpiricalModel) {
    let ns = no_signaling_check(model).unwrap();
    println!("{name}:");
    println!(
        "  no-signaling: pass={} (worst gap {:.1e})",
        ns.pass, ns.max_gap
    );
    let real = realize_minimal(model).unwrap();
    println!(
        "  minimal weight = {:.6}, residual = {:.1e}",
        real.total_weight, real.residual
    );
    let negatives: Vec<(usize, f64)> = real
        .lam
        .weights()
        .iter()
        .enumerate()
        .filter(|(_, w)| **w < 0.0)
        .map(|(i, w)| (i, *w))
        .collect();
    println!("  negative weights: {negatives:?}");
    println!(
        "  classical realization exists: {}",
        nonnegative_realization_exists(model).unwrap()
    );
}

fn main() {
    report("uniform rows", &uniform_model());
    report("Bell table", &model_from_json(BELL).unwrap());
    report(
        "extremal no-signaling box",
        &model_from_json(PR_BOX).unwrap(),
    );
}
