//! Evaluates the scalarizing function of a few ordering cones and checks the
//! representability property on sample vectors.

use nalgebra::DVector;
use setcg::bench::ex4_cone_k2;
use setcg::cone::OrderingCone;

fn main() {
    let cones = [
        ("R^2_+", OrderingCone::nonnegative_orthant(2)),
        ("K2 (ex4)", ex4_cone_k2()),
    ];
    let samples = [[1.0, 2.0], [-1.0, -0.5], [0.3, -2.0], [-3.0, 1.0]];
    for (name, cone) in &cones {
        println!("{name}: e = {:?}", cone.e().as_slice());
        for s in samples {
            let y = DVector::from_column_slice(&s);
            let psi = cone.gerstewitz(&y);
            println!("  psi({s:?}) = {psi:+.4}   -y in K: {}", cone.contains(&-&y));
        }
    }

    let soc = OrderingCone::second_order();
    for s in [[0.0, 0.0, 1.0], [3.0, 4.0, 0.0], [1.0, 0.0, -2.0]] {
        let y = DVector::from_column_slice(&s);
        println!("soc3: psi({s:?}) = {:+.4}", soc.gerstewitz(&y));
    }
}
