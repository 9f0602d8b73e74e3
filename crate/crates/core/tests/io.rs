//! Serialization round trips through files.

use std::fs::File;

use dr_audit::experiments::{simulate_tradeoff, SimulationConfig, Table};
use dr_audit::geometry::sample_uniform_ball;
use dr_audit::measures::{audit, AuditConfig, EmbeddingPair};
use dr_audit::synth::coordinate_projection;
use dr_audit::transport::{cost_matrix, solve_discrete_ot, uniform_weights};
use dr_audit::PointCloud;

#[test]
fn cloud_csv_and_json_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cloud = sample_uniform_ball(7, 2.5, 64, 1).unwrap();
    let path = dir.path().join("c.csv");
    cloud.write_csv(File::create(&path).unwrap()).unwrap();
    let back = PointCloud::read_csv(File::open(&path).unwrap()).unwrap();
    assert!(back.as_flat().iter().zip(cloud.as_flat()).all(|(a, b)| a.to_bits() == b.to_bits()));
    let json = cloud.to_json().unwrap();
    assert_eq!(PointCloud::from_json(&json).unwrap(), cloud);
}

#[test]
fn report_json_has_schema_fields() {
    let x = sample_uniform_ball(3, 1.0, 40, 2).unwrap();
    let y = coordinate_projection(3, 2).unwrap().apply(&x).unwrap();
    let rep = audit(&EmbeddingPair::new(x, y).unwrap(), &AuditConfig { k: 5, r_u: 0.5, r_v: 0.5, beta: 0.3 }).unwrap();
    let v: serde_json::Value = serde_json::from_str(&rep.to_json().unwrap()).unwrap();
    for key in ["per_query", "aggregates", "skipped", "config", "w2_solver"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let q = &v["per_query"][0];
    for key in ["index", "precision", "recall", "f_beta", "w2_many_to_one", "w2_discontinuity", "w2_cost", "retrieved_count", "relevant_count"] {
        assert!(q.get(key).is_some(), "missing {key}");
    }
    for q in &rep.per_query {
        let (a, b, c) = (q.w2_many_to_one.unwrap(), q.w2_discontinuity.unwrap(), q.w2_cost.unwrap());
        assert_eq!(c, (a + b) / 2.0);
    }
}

#[test]
fn plan_csv_triplets() {
    let a = sample_uniform_ball(2, 1.0, 5, 3).unwrap();
    let w = uniform_weights(5);
    let plan = solve_discrete_ot(&w, &w, &cost_matrix(&a, &a).unwrap()).unwrap();
    let mut buf = Vec::new();
    plan.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), "i,j,mass");
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn simulation_csv_reads_back_as_table() {
    let cfg = SimulationConfig { k_target: 15, m_list: vec![2], ..SimulationConfig::uniform_ball(3, 200, 4) };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let t = simulate_tradeoff(&cfg, Some(Box::new(File::create(&path).unwrap()))).unwrap();
    let read = Table::read_csv(File::open(&path).unwrap()).unwrap();
    assert_eq!(read, Table::from(&t));
    assert_eq!(read.headers, ["m", "r_V", "precision", "recall", "f_beta", "is_rv_star", "is_fbeta_argmax"]);
}
