//! C^∞ plateau functions shared by the dyadic partition and the mollifier.

fn bump_tail(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth step: 0 for `x <= 0`, 1 for `x >= 1`, C^∞ in between.
pub fn smooth_step(x: f64) -> f64 {
    let a = bump_tail(x);
    let b = bump_tail(1.0 - x);
    if a + b == 0.0 {
        return if x >= 1.0 { 1.0 } else { 0.0 };
    }
    a / (a + b)
}

/// Radial plateau: 1 on `r <= inner`, 0 on `r >= outer`, decreasing and C^∞ in between.
pub fn plateau(r: f64, inner: f64, outer: f64) -> f64 {
    smooth_step((outer - r) / (outer - inner))
}

/// The mollifier symbol `g`: 1 on `|x| <= 1/2`, supported in `|x| <= 1`.
pub fn mollifier(r: f64) -> f64 {
    plateau(r, 0.5, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_shape() {
        assert_eq!(plateau(0.0, 0.75, 4.0 / 3.0), 1.0);
        assert_eq!(plateau(0.75, 0.75, 4.0 / 3.0), 1.0);
        assert_eq!(plateau(4.0 / 3.0, 0.75, 4.0 / 3.0), 0.0);
        let mid = plateau(1.0, 0.75, 4.0 / 3.0);
        assert!(mid > 0.0 && mid < 1.0);
        let mut prev = 1.0;
        for i in 0..100 {
            let v = mollifier(0.5 + 0.005 * i as f64);
            assert!(v <= prev);
            prev = v;
        }
        assert_eq!(mollifier(1.0), 0.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
    }
}
