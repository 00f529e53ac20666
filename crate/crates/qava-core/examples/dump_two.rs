use qava_core::{corpus, frontend};
fn main() {
    for (bench, p) in [("coupon", "100"), ("prspeed", "150")] {
        let inst = corpus::instance(bench, p).unwrap();
        let prog = frontend::parse(&inst.source).unwrap();
        let (pts, _) = frontend::translate(&prog, &frontend::AnnotationSet::default()).unwrap();
        println!("== {bench} locs={} ==", pts.loc_names.len());
        for t in &pts.transitions {
            let g: Vec<String> = t.guard.rows.iter().map(|(a, b)| format!("{a:?}<={b}")).collect();
            let f: Vec<String> = t.forks.iter().map(|fk| format!("p={:.2} dst={} e={:?}", fk.prob, fk.dst, fk.update.e)).collect();
            println!("   src={} guard=[{}] forks=[{}]", t.src, g.join(";"), f.join(" | "));
        }
    }
}
