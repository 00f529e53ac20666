use qava_core::corpus;
fn main() {
    let mut seen = std::collections::HashSet::new();
    for inst in corpus::all_instances() {
        if !seen.insert(inst.bench) { continue; }
        match inst.build() {
            Ok((pts, _, _)) => {
                println!("== {} {} locs={} ==", inst.bench, inst.param, pts.loc_names.len());
                for (i, n) in pts.loc_names.iter().enumerate() {
                    print!("  {i}:{n}");
                }
                println!();
                for t in &pts.transitions {
                    let g: Vec<String> = t.guard.rows.iter().map(|(a,b)| format!("{a:?}<={b}")).collect();
                    let f: Vec<String> = t.forks.iter().map(|fk| format!("p={} dst={}", fk.prob, fk.dst)).collect();
                    println!("   src={} guard=[{}] forks=[{}]", t.src, g.join(";"), f.join(" | "));
                }
            }
            Err(e) => println!("== {} {} ERROR {:?}", inst.bench, inst.param, e),
        }
    }
}
