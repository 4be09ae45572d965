use infsup_core::condition::{check_condition, ConditionOptions};
use infsup_core::geometry::GeometryMap;
use std::time::Instant;

fn main() {
    let map = GeometryMap::affine3d_from_frame(
        [0.1, -0.2, 0.0],
        [1.0, 0.3, 0.1],
        [0.0, 1.1, 0.2],
        [0.1, 0.0, 0.9],
    );
    for k in [2usize, 3] {
        let t0 = Instant::now();
        let r = check_condition(&map, 0, k, &ConditionOptions::default()).unwrap();
        println!("k={k}: holds={} gap={:.2e} in {:?}", r.holds(), r.max_quadrature_gap, t0.elapsed());
    }
}
