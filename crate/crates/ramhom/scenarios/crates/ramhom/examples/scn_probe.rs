use ramhom::scenario::{bundled_scenario, parse_scenario, print_scenario, run_scenario};

fn main() {
    let s = bundled_scenario("thh_tmf0_2").expect("parse");
    let printed = print_scenario(&s);
    let reparsed = parse_scenario(&printed).expect("round trip parse");
    assert_eq!(s, reparsed, "round trip");
    let report = run_scenario(&s).expect("run");
    println!("{}", report.render_text());
    println!("timing: {:?}", report.timing);
    assert!(report.passed);
}
