use std::fs;

use proptest::prelude::*;
use wrdyn::ensemble::draw;
use wrdyn::report::{read_csv_trace, read_json_trace, write_trace, CsvRecord};
use wrdyn::spec::{Ensemble, RunSpec, TraceFormat};
use wrdyn_core::dynamics::{iterate, WRConfig};
use wrdyn_core::matcore::norm2;

fn trace_for(seed: u64) -> wrdyn_core::dynamics::WRTrace {
    let inst = draw(Ensemble::Wishart, 3, 0.4, seed);
    let mut cfg = WRConfig::new(inst.r0, inst.u).unwrap();
    cfg.max_iter = 40;
    iterate(&cfg).unwrap()
}

#[test]
fn json_trace_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.json");
    let tr = trace_for(3);
    write_trace(&p, &tr.records, TraceFormat::Json).unwrap();
    let back = read_json_trace(&p).unwrap();
    assert_eq!(back.len(), tr.records.len());
    for (a, b) in back.iter().zip(&tr.records) {
        let mut b = b.clone();
        b.support = None;
        assert_eq!(*a, b);
    }
}

#[test]
fn csv_trace_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.csv");
    let tr = trace_for(4);
    write_trace(&p, &tr.records, TraceFormat::Csv).unwrap();
    let back = read_csv_trace(&p).unwrap();
    let want: Vec<CsvRecord> = tr.records.iter().map(CsvRecord::from).collect();
    assert_eq!(back, want);
}

#[test]
fn spec_paths_resolve_next_to_spec() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.json");
    fs::write(&p, r#"{"matrix": [[[2,0],[0,1]],[[0,-1],[3,0]]], "u": [[3,0],[0,4]], "outputs": {"trace_path": "sub/t.json", "report_path": "/abs/r.json"}}"#).unwrap();
    let spec = RunSpec::load(&p).unwrap();
    assert_eq!(spec.outputs.trace_path.clone().unwrap(), dir.path().join("sub/t.json"));
    assert_eq!(spec.outputs.report_path.clone().unwrap(), std::path::PathBuf::from("/abs/r.json"));
    let cfg = spec.config().unwrap();
    assert!((norm2(cfg.u.as_slice()) - 1.0).abs() < 1e-15);
    assert!((cfg.u.as_slice()[1].im - 0.8).abs() < 1e-15);
    assert_eq!(cfg.r0.as_mat()[(0, 1)].im, 1.0);
}

#[test]
fn ensembles_hit_their_targets() {
    for (ens, dim) in [(Ensemble::Wishart, 4), (Ensemble::CoupledBlock, 4), (Ensemble::DecoupledTransverse, 3)] {
        let a = draw(ens, dim, 0.35, 9);
        let b = draw(ens, dim, 0.35, 9);
        assert_eq!(a.r0, b.r0);
        assert_eq!(a.u, b.u);
        assert_eq!(a.r0.dim(), dim + 1);
        assert!(a.t.lambda_min() > 0.0);
        let mut cfg = WRConfig::new(a.r0, a.u).unwrap();
        cfg.max_iter = 3;
        let tr = iterate(&cfg).unwrap();
        let act = tr.active.unwrap();
        assert_eq!(act.n, 0);
        assert_eq!(act.dim(), dim);
        assert!((act.tau - 0.35).abs() < 1e-12);
    }
    assert_ne!(draw(Ensemble::Wishart, 3, 0.35, 1).r0, draw(Ensemble::Wishart, 3, 0.35, 2).r0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn float_text_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let s = serde_json::to_string(&x).unwrap();
        prop_assert_eq!(serde_json::from_str::<f64>(&s).unwrap().to_bits(), x.to_bits());
        prop_assert_eq!(x.to_string().parse::<f64>().unwrap().to_bits(), x.to_bits());
    }
}
