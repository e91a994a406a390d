use rand::Rng;

use crate::rng::SimRng;

/// One `Lap(b)` draw by inverse CDF: `sign(u - 1/2) * b * ln(1 - 2|u - 1/2|)`
/// with `u` uniform on the open interval (0, 1).
pub fn laplace_sample(scale: f64, rng: &mut SimRng) -> f64 {
    debug_assert!(scale > 0.0);
    let u: f64 = loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            break u;
        }
    };
    let c = u - 0.5;
    // ln(1 - 2|c|) <= 0, so the sign flips relative to c
    -c.signum() * scale * (1.0 - 2.0 * c.abs()).ln()
}
