use qava_core::{corpus, hoeffding};
fn main() {
    let bench = std::env::args().nth(1).unwrap_or("coupon".into());
    let param = std::env::args().nth(2).unwrap_or("100".into());
    let inst = corpus::instance(&bench, &param).unwrap();
    let (pts, _, _) = inst.build().unwrap();
    let t0 = std::time::Instant::now();
    let r = hoeffding::hoeffding_synthesize(&pts, None);
    println!("{bench} {param}: {r:?} in {:?}", t0.elapsed());
}
