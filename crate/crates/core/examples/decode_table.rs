//! The syndrome lookup table next to a brute-force minimum-weight decoder,
//! and the soft decoder's view of a few outcome patterns.

use surflab::soft::level1_posteriors;
use surflab::surface9::{brute_force_decode, hard_decode, table_correction, ZSyndrome, N};

fn main() -> surflab::Result<()> {
    println!("syndrome          table        brute force");
    for s in ZSyndrome::all() {
        println!(
            "{:<17} {:<12} {}",
            format!("{:?}", s.values()),
            table_correction(s).to_sparse_string(),
            brute_force_decode(s).to_sparse_string()
        );
    }
    println!("\noutcomes (qubits with -1)   hard   soft p(+1) at p_e = 0.01");
    for flipped in [&[][..], &[7], &[2, 3], &[7, 8], &[1, 9]] {
        let m: [i8; N] = std::array::from_fn(|j| if flipped.contains(&(j + 1)) { -1 } else { 1 });
        let post = level1_posteriors(&m, 0.01)?;
        println!("{:<27} {:+}     {:.6}", format!("{flipped:?}"), hard_decode(&m).logical_value, post.p_plus);
    }
    Ok(())
}
