use std::process::Command;

fn km(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_km")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn verify_main_degree_two() {
    let (code, out) = km(&["verify", "main", "--n", "2", "--k", "8", "--nmax", "30", "--variant", "eisenstein"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["all_ok"], true);
    assert_eq!(v["rows"].as_array().unwrap().len(), 30);
}

#[test]
fn verify_main_cusp_n4_and_determinism() {
    let args = ["verify", "main", "--n", "4", "--k", "8", "--nmax", "20"];
    let (c1, a) = km(&args);
    let (c2, b) = km(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
}

#[test]
fn classes_degree_one() {
    let (code, out) = km(&["classes", "--m", "1", "--nmax", "10"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let idx: Vec<u64> = v["rows"].as_array().unwrap().iter().map(|r| r["index"].as_u64().unwrap()).collect();
    assert_eq!(idx, vec![3, 4, 7, 8]);
}

#[test]
fn verify_local_single_prime() {
    let (code, out) = km(&["verify", "local", "--p", "3", "--n", "4", "--order", "6"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["ok"], true);
    assert_eq!(v["rows"].as_array().unwrap().len(), 8);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(km(&["verify", "main", "--n", "4", "--k", "14"]).0, 2);
    assert_eq!(km(&["nonsense"]).0, 2);
    assert_eq!(km(&["density", "--matrix", "[[1,2],[3,4]]", "--p", "3"]).0, 2);
    assert_eq!(km(&["verify", "main", "--n", "x"]).0, 2);
}

#[test]
fn density_and_siegel_outputs() {
    let (code, out) = km(&["density", "--matrix", "[[2,1],[1,2]]", "--p", "3", "--brute", "3"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["auto"]["value"], v["bruteforce"]["value"]);
    let (code, out) = km(&["siegel", "--matrix", "[[2,1,0],[1,2,0],[0,0,6]]", "--p", "3", "--n", "4"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["symmetric"], true);
}

#[test]
fn qexp_tables_and_formats() {
    let (code, out) = km(&["qexp", "--what", "delta", "--nmax", "3"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["coeffs"][2], "-24/1");
    let (code, out) = km(&["qexp", "--what", "cohen", "--k", "2", "--nmax", "5", "--format", "text"]);
    assert_eq!(code, 0);
    assert!(out.contains("coeffs.0 = 1/120"));
    let (code, out) = km(&["verify", "mass", "--n", "4", "--dmax", "20", "--format", "csv"]);
    assert_eq!(code, 0);
    assert!(out.lines().next().unwrap().contains("lhs"));
}

#[test]
fn json_to_file() {
    let dir = std::env::temp_dir().join(format!("km-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("out.json");
    let (code, out) = km(&["qexp", "--what", "h", "--n", "4", "--k", "8", "--nmax", "10", "--json", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["h"]["coeffs"]["4"], "-56/1");
}
