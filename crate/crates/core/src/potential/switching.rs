//! Quintic smoothstep switch: s(0) = 1, s(1) = 0, first and second
//! derivatives vanish at both ends.

use super::scalar::Scalar;

/// s(x) on x in [0, 1], clamped outside.
pub fn smoothstep(x: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (1.0, 0.0);
    }
    if x >= 1.0 {
        return (0.0, 0.0);
    }
    // written in y = 1 − x so that s stays accurate as x → 1
    let y = 1.0 - x;
    let s = y * y * y * (10.0 - 15.0 * y + 6.0 * y * y);
    let ds = -30.0 * x * x * y * y;
    (s, ds)
}

pub(crate) fn smoothstep_generic<T: Scalar>(x: T) -> T {
    let xv = x.value();
    if xv <= 0.0 {
        return T::cst(1.0);
    }
    if xv >= 1.0 {
        return T::zero();
    }
    let y = T::cst(1.0) - x;
    y * y * y * (T::cst(10.0) - y * 15.0 + y * y * 6.0)
}

/// Cutoff over the full range [0, rc]: returns (f, df/dr).
pub fn cutoff_fn(r: f64, rc: f64) -> (f64, f64) {
    let (s, ds) = smoothstep(r / rc);
    (s, ds / rc)
}

/// Switch between `r_on` and `rc`: 1 below `r_on`, 0 beyond `rc`.
pub fn switch_fn(r: f64, r_on: f64, rc: f64) -> (f64, f64) {
    let w = rc - r_on;
    let (s, ds) = smoothstep((r - r_on) / w);
    (s, ds / w)
}
