use cubic_core::harness::{run_family, write_class_csv, FamilyRun, FamilySpec, RunOptions, SignatureFilter};
use cubic_core::shapes::{Rect, ShapeRegion};

fn run(spec: &FamilySpec, workers: usize) -> FamilyRun {
    run_family(spec, &RunOptions { class_data: true, workers, cache: None }).unwrap()
}

fn csv_bytes(run: &FamilyRun) -> Vec<u8> {
    let mut out = Vec::new();
    write_class_csv(&run.rows, &mut out).unwrap();
    out
}

#[test]
fn output_does_not_depend_on_worker_count() {
    let spec = FamilySpec::new(SignatureFilter::Any, -3000, 1500);
    let base = run(&spec, 1);
    let base_csv = csv_bytes(&base);
    let base_json = serde_json::to_string(&base.report).unwrap();
    assert!(base.rows.len() > 200);
    for workers in [4, 16] {
        let other = run(&spec, workers);
        assert_eq!(csv_bytes(&other), base_csv, "{workers} workers");
        assert_eq!(serde_json::to_string(&other.report).unwrap(), base_json, "{workers} workers");
    }
}

#[test]
fn split_windows_merge() {
    let region = ShapeRegion::Rectangles(vec![Rect::new(0.0, 0.5, 1.1, f64::INFINITY)]);
    let whole = run(&FamilySpec::new(SignatureFilter::Complex, -2000, 0).with_region(region.clone()), 0);
    let lo = run(&FamilySpec::new(SignatureFilter::Complex, -2000, -700).with_region(region.clone()), 0);
    let hi = run(&FamilySpec::new(SignatureFilter::Complex, -700, 0).with_region(region), 0);
    let (w, a, b) = (&whole.report, &lo.report, &hi.report);
    assert_eq!(w.n, a.n + b.n);
    assert_eq!(w.n_window, a.n_window + b.n_window);
    assert_eq!(w.class_rows, a.class_rows + b.class_rows);
    assert_eq!(w.cl2_sum, a.cl2_sum + b.cl2_sum);
    let mut merged: Vec<_> = lo.rows.iter().chain(&hi.rows).map(|r| r.form).collect();
    let mut direct: Vec<_> = whole.rows.iter().map(|r| r.form).collect();
    merged.sort();
    direct.sort();
    assert_eq!(merged, direct);
}

#[test]
fn cache_is_coherent() {
    let dir = tempfile::tempdir().unwrap();
    let spec = FamilySpec::new(SignatureFilter::TotallyReal, 0, 1500);
    let cached = RunOptions { class_data: true, workers: 3, cache: Some(dir.path().to_path_buf()) };
    let fresh = run(&spec, 3);
    let cold = run_family(&spec, &cached).unwrap();
    let warm = run_family(&spec, &cached).unwrap();
    assert_eq!(cold.computed, cold.rows.len());
    assert_eq!((warm.computed, warm.cache_hits), (0, cold.rows.len()));
    assert_eq!(csv_bytes(&warm), csv_bytes(&fresh));
    assert_eq!(warm.report, fresh.report);

    // A cached row without a regulator is recomputed when one is asked for.
    let mut with_reg = spec.clone();
    with_reg.regulators = true;
    let reg = run_family(&with_reg, &cached).unwrap();
    assert_eq!(reg.computed, reg.rows.len());
    assert!(reg.rows.iter().all(|r| r.class_row().unwrap().regulator.is_some()));
    let again = run_family(&with_reg, &cached).unwrap();
    assert_eq!(again.computed, 0);
    assert_eq!(csv_bytes(&again), csv_bytes(&reg));
}
