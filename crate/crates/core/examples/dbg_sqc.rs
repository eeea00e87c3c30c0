fn main() {
    let c = [3i64, -1, 0, 2, 5, -4];
    match crlab_core::arith::s_qc_brute(5, &c, 0, 6) {
        Ok(v) => println!("paired = {v}"),
        Err(e) => println!("paired err: {e}"),
    }
    match crlab_core::arith::s_qc_brute_literal(5, &c, 0, 6) {
        Ok(v) => println!("literal = {v}"),
        Err(e) => println!("literal err: {e}"),
    }
    // tiny case comparison
    for q in 1..=7u64 {
        let c4 = [2i64, -3, 1, 4];
        let a = crlab_core::arith::s_qc_brute(q, &c4, 2, 4);
        let b = crlab_core::arith::s_qc_brute_literal(q, &c4, 2, 4);
        println!("q={q}: {a:?} {b:?}");
    }
}
