use ramhom::scenario::{bundled_scenario, run_scenario};

fn main() {
    let s = bundled_scenario("tate_tmf1_3").unwrap();
    let report = run_scenario(&s).unwrap();
    let t8 = &report.tables[&8];
    for (&(n, m), e) in t8.entries.iter() {
        if n + m == -16 || n + m == 16 {
            println!("({n},{m}): {} names={:?} partial={}", e.shape, e.names, e.partial);
        }
    }
}
