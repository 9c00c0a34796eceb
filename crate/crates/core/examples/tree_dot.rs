//! Graphviz rendering of a ball of the HNN tree, coloured by the fixed set
//! of an elliptic element. Pipe the output into `dot -Tsvg`.

use bsl::hnn::{Hnn, HnnParams};
use bsl::tree::{hull, psi_set, Ball, BallMarks, TreeGroup};

fn main() {
    let h = Hnn::new(HnnParams::symmetric(2, 2).unwrap());
    let g = h.parse("t h[(0 1)] t^-1").unwrap();
    let ball = Ball::new(&h, 3, 3).unwrap();
    let fixed = ball.fixed(&h, &g).unwrap();
    let psi = psi_set(&ball, &fixed, 3).determined;
    let marks = BallMarks {
        hull: hull(&ball, &psi).into_iter().collect(),
        psi: psi.into_iter().collect(),
        fixed,
    };
    print!("{}", ball.to_dot(&|v| h.render_vertex(v), Some(&marks)));
}
