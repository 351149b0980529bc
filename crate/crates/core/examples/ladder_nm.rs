//! Multi-start Nelder-Mead on a ladder graph at depths 1 and 2.

use qaoa_rl::bench::approximation_ratio;
use qaoa_rl::graphs::{brute_force_maxcut, gen_ladder};
use qaoa_rl::optimizers::{multi_start, OptimizerSpec};
use qaoa_rl::qsim::{CostDiagonal, QaoaObjective};

fn main() -> qaoa_rl::Result<()> {
    let g = gen_ladder(5)?;
    let best = brute_force_maxcut(&g)?;
    let d = CostDiagonal::from_graph(&g)?;
    for p in [1, 2] {
        let obj = QaoaObjective::new(&d, p)?;
        let res = multi_start(OptimizerSpec::NelderMead, &obj, 10, 192, 0)?;
        let f = res.overall_best();
        println!("{} p={p}: f = {f:.6}, eta = {:.4}", g.label(), approximation_ratio(f, &best)?);
    }
    Ok(())
}
