//! Emits one decoupling cycle and checks its phase cancellation.

use surflab::dd::dd_schedule;
use surflab::surface9::N;

fn main() -> surflab::Result<()> {
    let schedule = dd_schedule(1)?;
    schedule.validate()?;
    schedule.write_csv(std::io::stdout())?;
    eprintln!("cycle length {:.1} ns", schedule.total_ns());
    for q in 1..=N {
        eprintln!("qubit {q}: single phase sum {} ticks", schedule.single_phase_sum(q));
    }
    for q in 1..N {
        eprintln!("pair {q}-{}: ZZ phase sum {} ticks", q + 1, schedule.pair_phase_sum(q, q + 1));
    }
    Ok(())
}
