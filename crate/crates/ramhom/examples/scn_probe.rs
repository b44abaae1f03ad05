use ramhom::scenario::{parse_scenario, print_scenario, run_scenario, BUNDLED};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let filter = args.get(1).cloned();
    for b in BUNDLED {
        if let Some(f) = &filter {
            if !b.name.contains(f.as_str()) {
                continue;
            }
        }
        let s = match parse_scenario(b.text) {
            Ok(s) => s,
            Err(e) => {
                println!("{}: PARSE ERROR: {e}", b.name);
                continue;
            }
        };
        let printed = print_scenario(&s);
        match parse_scenario(&printed) {
            Ok(r) if r == s => {}
            Ok(_) => println!("{}: ROUND TRIP MISMATCH", b.name),
            Err(e) => println!("{}: ROUND TRIP PARSE ERROR: {e}", b.name),
        }
        let t = std::time::Instant::now();
        match run_scenario(&s) {
            Ok(report) => {
                print!("{}", report.render_text());
                println!("  timing: {:?}", t.elapsed());
            }
            Err(e) => println!("{}: RUN ERROR: {e}", b.name),
        }
    }
}
