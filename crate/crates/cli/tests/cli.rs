use std::fs;
use std::process::{Command, Output};

fn cubic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cubic")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn enumerate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("forms.csv");
    let o = cubic(&["enumerate", "--dmin", "-50", "--dmax", "0", "--signature", "complex", "--maximal", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "form,disc,signature,maximal");
    let discs: Vec<&str> = lines[1..].iter().map(|l| l.rsplit(',').nth(2).unwrap()).collect();
    assert!(discs.contains(&"-23") && discs.contains(&"-31") && discs.contains(&"-44"));
    assert!(lines[1..].iter().all(|l| l.ends_with(",complex,1")));
}

#[test]
fn conditions_restrict_the_list() {
    let all = stdout(&cubic(&["enumerate", "--dmin", "0", "--dmax", "2000", "--maximal"]));
    let cut = stdout(&cubic(&["enumerate", "--dmin", "0", "--dmax", "2000", "--maximal", "--cond", "2:3"]));
    assert!(cut.lines().count() > 1);
    assert!(cut.lines().count() < all.lines().count());
    assert!(cut.lines().skip(1).all(|l| all.contains(l)));
}

#[test]
fn shape_of_one_form_and_a_file() {
    let o = cubic(&["shape", "--form", "1,1,-2,-1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().rsplitn(3, ',').collect();
    // the cyclic field of discriminant 49 has the hexagonal shape
    let (x, y): (f64, f64) = (row[1].parse().unwrap(), row[0].parse().unwrap());
    assert!((x - 0.5).abs() < 1e-12 && (y - 0.75f64.sqrt()).abs() < 1e-12);

    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("forms.txt");
    fs::write(&input, "# two forms\n1,0,0,-2\n1,1,-2,-1\n").unwrap();
    let o = cubic(&["shape", "--in", input.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 3);
}

#[test]
fn shape_needs_exactly_one_input() {
    assert!(!cubic(&["shape"]).status.success());
    assert!(!cubic(&["shape", "--form", "1,0,0,-2", "--in", "x"]).status.success());
}

#[test]
fn class_groups() {
    let o = cubic(&["classgroup", "--form", "1,0,-3,-1"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("class group: trivial (order 1)"));
    // x^3 - 11 has a class group of order 2
    let o = cubic(&["classgroup", "--form", "1,0,0,-11"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("Z/2 (order 2)"));
}

#[test]
fn narrow_class_group_can_be_larger() {
    // discriminant 229: h = 1 but a totally positive unit is not a square
    let plain = stdout(&cubic(&["classgroup", "--form", "1,0,-4,-1"]));
    let narrow = stdout(&cubic(&["classgroup", "--form", "1,0,-4,-1", "--narrow"]));
    assert!(plain.contains("class group: trivial"), "{plain}");
    assert!(narrow.contains("narrow class group: Z/2 (order 2)"), "{narrow}");
}

#[test]
fn measure_of_a_cusp() {
    let dir = tempfile::tempdir().unwrap();
    let region = dir.path().join("cusp.txt");
    fs::write(&region, "0 0.5 2 inf\n").unwrap();
    let o = cubic(&["measure", "--region", region.to_str().unwrap()]);
    let text = stdout(&o);
    let m: f64 = text.lines().next().unwrap().strip_prefix("measure ").unwrap().parse().unwrap();
    assert!((m - 0.25).abs() < 1e-12);
}

#[test]
fn stats_report_and_cache() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("family.txt");
    let region = dir.path().join("w.txt");
    fs::write(&region, "0 0.5 1.2 inf\n").unwrap();
    fs::write(&spec, "signature=complex\ndmin=-3000\ndmax=0\nregion=w.txt\n").unwrap();
    let cache = dir.path().join("cache");
    fs::create_dir(&cache).unwrap();
    let report = dir.path().join("report.json");
    let args = [
        "stats",
        "--spec",
        spec.to_str().unwrap(),
        "--classdata",
        "--workers",
        "2",
        "--cache",
        cache.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ];
    assert!(cubic(&args).status.success());
    let first = fs::read_to_string(&report).unwrap();
    assert!(cache.join("classdata.csv").exists());
    let o = cubic(&args);
    assert!(String::from_utf8_lossy(&o.stderr).contains(" 0 computed"));
    assert_eq!(fs::read_to_string(&report).unwrap(), first);
    let json: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert!(json["n"].as_u64().unwrap() > 0);
    assert!(json["n"].as_u64() < json["n_window"].as_u64());
    assert_eq!(json["valid"], true);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.txt");
    fs::write(&spec, "signature=complex\ndmin=10\ndmax=0\n").unwrap();
    assert_eq!(cubic(&["stats", "--spec", spec.to_str().unwrap()]).status.code(), Some(2));
    fs::write(&spec, "cond.4=111\ndmin=0\ndmax=10\n").unwrap();
    assert_eq!(cubic(&["stats", "--spec", spec.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(cubic(&["enumerate", "--dmin", "0", "--dmax", "9", "--cond", "2:3", "--cond", "2:max"]).status.code(), Some(2));
    assert_eq!(cubic(&["classgroup", "--form", "1,2"]).status.code(), Some(2));
}
