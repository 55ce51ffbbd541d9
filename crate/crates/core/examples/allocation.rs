//! Weighted split of an effective command `U` over the two lateral channels.

use target_enclosing::guidance::{allocate_lateral, GuidanceParams};
use target_enclosing::verify::{allocation_cost, grid_min_cost};

fn main() {
    let mut p = GuidanceParams::with_targets(8.0, 5.0);
    p.a_sat = f64::INFINITY;
    let u = 10.0;
    for (w_1, w_2) in [(0.5, 0.5), (1.0, 0.25), (0.25, 1.0)] {
        p.w_1 = w_1;
        p.w_2 = w_2;
        for deg in [(10.0, 10.0), (45.0, 30.0), (-20.0, 120.0)] {
            let (gamma, chi) = (f64::to_radians(deg.0), f64::to_radians(deg.1));
            let a = allocate_lateral(u, gamma, chi, &p);
            let cost = allocation_cost(a.a_gamma, a.a_chi, w_1, w_2);
            let grid = grid_min_cost(u, gamma, chi, w_1, w_2, 2001);
            println!(
                "w ({w_1}, {w_2})  gamma {:>5.1}  chi {:>6.1}  a_gamma {:+8.3}  a_chi {:+8.3}  cost {:.5} (grid {:.5})",
                deg.0, deg.1, a.a_gamma, a.a_chi, cost, grid
            );
        }
    }
}
