//! Prints the level-1 encoder and its stabilizer groups after each step.

use surflab::surface9::{encode_check, encoding_circuit};

fn main() -> surflab::Result<()> {
    print!("{}", encoding_circuit().to_text());
    let check = encode_check()?;
    println!("\nafter step 1 (matches expected group: {}):", check.step1_matches);
    for g in &check.step1 {
        println!("  {g}");
    }
    println!("after step 2 (matches |0>_L: {}):", check.step2_matches);
    for g in &check.step2 {
        println!("  {g}");
    }
    Ok(())
}
