//! Sup error to ReLU against parameter count for Zolotarev, Newman and the
//! best polynomial.

use ratnet::classic::{check_ordering, convergence_table, Family};

fn main() -> ratnet::Result<()> {
    let mut rows = Vec::new();
    for family in Family::ALL {
        rows.extend(convergence_table(family, &family.default_budgets())?);
    }
    for row in &rows {
        println!("{:<10} {:>4} {:.3e}", row.family, row.param_count, row.sup_error);
    }
    match check_ordering(&rows) {
        Ok(()) => println!("ordering holds"),
        Err(why) => println!("ordering broken: {why}"),
    }
    Ok(())
}
