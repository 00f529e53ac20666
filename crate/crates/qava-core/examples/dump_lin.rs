use qava_core::explinsyn::*;
use qava_core::solvers::VarPool;
use qava_core::solvers::convex::{solve_convex, ConvexProgram};
use qava_core::corpus;

fn main() {
    let (pts, _, _) = corpus::instance("1dwalk", "10").unwrap().build().unwrap();
    let mut pool = VarPool::new();
    let tmpl = ExpTemplate::new(&pts, &mut pool);
    let cons = canonicalize(&pts, &tmpl, Direction::Le).unwrap();
    println!("{} constraints", cons.len());
    let mut prog = ConvexProgram::default();
    for (k, &x) in pts.init_val.iter().enumerate() {
        prog.objective.add_scaled(&tmpl.a(pts.init_loc, k), x);
    }
    prog.objective.add(&tmpl.b(pts.init_loc));
    for con in &cons {
        println!("con t{} psi rows {:?} terms {}", con.transition, con.psi.rows, con.terms.len());
        let el = eliminate(con, &pts.dists, &mut pool).unwrap();
        println!("  lin_le {} lin_eq {} exp_sums {}", el.lin_le.len(), el.lin_eq.len(), el.exp_sums.len());
        for e in &el.lin_eq { println!("   eq {:?}", e); }
        for es in &el.exp_sums { for t in &es.terms { println!("   exp w={} e={:?}", t.weight, t.exponent); } }
        prog.lin_le.extend(el.lin_le);
        prog.lin_eq.extend(el.lin_eq);
        prog.exp_sums.extend(el.exp_sums);
    }
    prog.num_vars = pool.len();
    for i in 0..pool.len() { print!("{}:{} ", i, pool.name(i)); }
    println!();
    let sol = solve_convex(&prog, 1e-9).unwrap();
    println!("status {:?} obj {} point {:?}", sol.status, sol.objective, sol.point);
}
