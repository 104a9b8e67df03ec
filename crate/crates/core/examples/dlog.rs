//! Bounded discrete logarithms with the shared baby-step giant-step tables.
//!
//! cargo run --release --example dlog -- [lambda] [bound]

use std::time::Instant;

use cryptonn::group::{bsgs_table, group_gen};

fn main() -> cryptonn::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let lambda: u32 = args.get(1).map_or(256, |s| s.parse().expect("lambda"));
    let bound: u64 = args.get(2).map_or(1_000_000, |s| s.parse().expect("bound"));

    let t = Instant::now();
    let params = group_gen(lambda, Some(1));
    println!("{lambda}-bit safe-prime group in {:.2}s", t.elapsed().as_secs_f64());

    let t = Instant::now();
    let table = bsgs_table(&params, bound)?;
    println!(
        "table for |z| <= {bound}: {} baby steps in {:.2}s",
        table.len(),
        t.elapsed().as_secs_f64()
    );

    for z in [0, 1, -1, 12_345, -(bound as i64), bound as i64] {
        let target = params.g_pow_i64(z);
        let t = Instant::now();
        let found = params.dlog(&target, bound)?;
        println!("dlog(g^{z}) = {found}  ({:.3} ms)", t.elapsed().as_secs_f64() * 1e3);
    }
    match params.dlog(&params.g_pow_i64(bound as i64 + 1), bound) {
        Err(e) => println!("outside the bound: {e}"),
        Ok(v) => println!("unexpected: {v}"),
    }
    Ok(())
}
