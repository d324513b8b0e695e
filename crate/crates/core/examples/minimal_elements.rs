//! Filters the minimal images of a finite set and enumerates the resulting
//! partition set.

use nalgebra::DVector;
use setcg::cone::OrderingCone;
use setcg::minimal::{enumerate_partition, minimal_elements, weakly_minimal_elements, EQUALITY_TOL, PARTITION_CAP};

fn main() {
    let images: Vec<DVector<f64>> = [
        [0.0, 3.0],
        [1.0, 1.0],
        [1.0, 1.0],
        [3.0, 0.0],
        [2.0, 2.0],
        [3.0, 3.0],
        [0.0, 4.0],
    ]
    .iter()
    .map(|p| DVector::from_column_slice(p))
    .collect();
    let cone = OrderingCone::nonnegative_orthant(2);

    let decomp = minimal_elements(&images, &cone, EQUALITY_TOL);
    for (value, group) in decomp.minimal_values.iter().zip(&decomp.groups) {
        println!("minimal value {:?} attained by {:?}", value.as_slice(), group);
    }
    println!(
        "weakly minimal indices: {:?}",
        weakly_minimal_elements(&images, &cone, EQUALITY_TOL)
    );

    let partition = enumerate_partition(&decomp, PARTITION_CAP).expect("small partition");
    println!("partition set ({} elements):", partition.len());
    for a in &partition {
        println!("  {:?}", a.indices());
    }
}
