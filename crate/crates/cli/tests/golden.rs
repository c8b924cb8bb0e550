//! Golden regression fixture: the canonical sweep must reproduce these
//! bytes exactly. Guards both the formula values and the CSV format
//! against silent drift.

use std::process::Command;

const GOLDEN_SWEEP_BODY: &str = "\
c1,c_star_right,c_star_left,regime,s_base
0,2,2,kpp_right,2
0.5,2,2,kpp_right,2
1,2,2,kpp_right,2
1.5,2,2,kpp_right,2
2,2,2,kpp_right,2
2.5,2.5,2,keep_pace,2
3,2.5,2,nonlocal_pulling,2
3.5,2.083333333333333,2,nonlocal_pulling,2
4,2,2,nonlocal_pulling,2
4.5,2,2,kpp_left,2
5,2,2,kpp_left,2
5.5,2,2,kpp_left,2
6,2,2,kpp_left,2
";

#[test]
fn sweep_matches_golden_fixture() {
    let mut path = std::env::temp_dir();
    path.push(format!("kpp-front-lab-golden-{}.csv", std::process::id()));
    let out = Command::new(env!("CARGO_BIN_EXE_kpp-front-lab"))
        .args([
            "sweep",
            "--c1-range",
            "0:6:13",
            "--r-minus",
            "1",
            "--r-plus",
            "1",
            "--lambda1",
            "2",
            "--emit",
            path.to_str().unwrap(),
        ])
        .output()
        .expect("binary runs");
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    assert_eq!(body, GOLDEN_SWEEP_BODY);
}
