use qava_core::{corpus, hoeffding};
fn main() {
    for inst in corpus::all_instances() {
        if inst.lower { continue; }
        let (pts, _, _) = inst.build().unwrap();
        let t0 = std::time::Instant::now();
        match hoeffding::hoeffding_synthesize(&pts, None) {
            Ok(out) => println!(
                "{:>8} {:>12}  log_bound={:12.4}  bound={:.4e}  ({:?})",
                inst.bench, inst.param, out.log_bound(), out.log_bound().exp(), t0.elapsed()
            ),
            Err(e) => println!("{:>8} {:>12}  ERROR {e:?}", inst.bench, inst.param),
        }
    }
}
