//! `b^6` in BS(2,3): which vertices of the linear subtree it fixes, with the
//! rewriting trace for each.

use bsl::bs23::Bs23;

fn main() {
    let report = Bs23.verify_b6(6).unwrap();
    println!("fixed:");
    for c in &report.fixed {
        println!(
            "  {} -> {} ({})",
            c.vertex,
            c.image,
            if c.holds { "ok" } else { "MISMATCH" }
        );
        for step in &c.trace {
            println!("      {step}");
        }
    }
    println!("moved:");
    for c in &report.moved {
        println!("  {} -> {}", c.vertex, c.image);
    }
    println!("all displayed computations reproduced: {}", report.passed);
}
