//! Fledge reports: bounded hulls for elliptic elements of the amalgam and
//! the HNN extension, a growing hull for `b^6` in BS(2,3).

use bsl::amalgam::{Amalgam, AmalgamParams};
use bsl::bs23::Bs23;
use bsl::hnn::{Hnn, HnnParams};
use bsl::tree::{delta, fledge_report, TreeGroup};

fn report<G: TreeGroup>(group: &G, word: &str) {
    let g = group.parse(word).unwrap();
    let r = fledge_report(group, &g, &[2, 4, 6, 8], 8).unwrap();
    println!(
        "{word:<28} diameters {:?} psi {:?} {:?}",
        r.diameters, r.psi_sizes, r.verdict
    );
    if let Ok(point) = delta(group, &g, &[4, 6, 8], 8) {
        println!("{:<28} delta {point:?}", "");
    }
}

fn main() {
    let a = Amalgam::new(AmalgamParams::symmetric(3, 3).unwrap());
    report(&a, "g0[(1 2)]");
    report(&a, "g1[(0 1)] g0[(1 2)] g1[(0 1)]^-1");
    let h = Hnn::new(HnnParams::symmetric(2, 2).unwrap());
    report(&h, "h[(0 1)]");
    report(&h, "t h[(0 1)] t^-1");
    report(&Bs23, "b^6");
}
