// quick diagnostic, compiled as an example
use dpm::geometry::*;
use dpm::grid::*;

fn main() {
    for order in [Order::Two, Order::Four] {
        for (name, shape) in [("circle", make_circle()), ("ellipse4", make_ellipse(4.0).unwrap())] {
            let grid = AuxGrid::build(-1.2, 1.2, -1.2, 1.2, 48).unwrap();
            let raw = grid_line_intersections(&shape, &grid).unwrap();
            let sets = classify_points(&grid, &shape, order).unwrap();
            println!(
                "{name} {order:?}: raw={} gm={} l1={} l2={} g={} g+={}",
                raw.len(),
                sets.gamma_minus.len(),
                sets.gamma_minus_l1.len(),
                sets.gamma_minus_l2.len(),
                sets.gamma.len(),
                sets.gamma_plus.len()
            );
        }
    }
}
