// SPDX-License-Identifier: MIT OR Apache-2.0

//! Projection error of new points onto a small kernel dictionary, and how
//! it drops once a point is admitted.

use koad::dictionary::Dictionary;
use koad::kernel::KernelSpec;

fn main() {
    let kernel = KernelSpec::gaussian(1.0).unwrap();
    let mut dict = Dictionary::new(2, 10);

    for x in [[0.0, 0.0], [1.0, 0.0], [0.0, 1.5]] {
        let p = dict.project(&kernel, &x).unwrap();
        dict.admit(&x, &p).unwrap();
    }
    println!("dictionary of {} points, inverse drift {:.1e}", dict.len(), dict.consistency_error(&kernel));

    for x in [[0.5, 0.0], [0.0, 0.75], [2.0, 2.0], [4.0, -3.0]] {
        let p = dict.project(&kernel, &x).unwrap();
        let coeffs: Vec<String> = p.coeffs.iter().map(|a| format!("{a:+.3}")).collect();
        println!("x = {x:?}: delta = {:.4}, coefficients [{}]", p.delta, coeffs.join(", "));
    }

    let x = [2.0, 2.0];
    let p = dict.project(&kernel, &x).unwrap();
    dict.admit(&x, &p).unwrap();
    println!("after admitting {x:?}: delta = {:.2e}", dict.project(&kernel, &x).unwrap().delta);

    let removed = dict.remove(0).unwrap();
    println!("removed {removed:?}; {} left, inverse drift {:.1e}", dict.len(), dict.consistency_error(&kernel));
}
