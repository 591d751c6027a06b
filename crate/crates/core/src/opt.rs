//! One-dimensional maximization: coarse grid seeding plus golden-section
//! refinement.  Used wherever a supremum over the parameter band is taken.

const INV_GOLD: f64 = 0.618_033_988_749_894_8; // 1/phi

/// Golden-section search for the maximum of `f` on `[a, b]`.
///
/// Stops once the bracket is narrower than `xtol` (or after `max_evals`).
/// Returns `(x_max, f_max)` for the better of the two interior probes.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, xtol: f64, max_evals: usize) -> (f64, f64) {
    if b < a {
        std::mem::swap(&mut a, &mut b);
    }
    let mut x1 = b - INV_GOLD * (b - a);
    let mut x2 = a + INV_GOLD * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evals = 2usize;
    while (b - a) > xtol && evals < max_evals {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_GOLD * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_GOLD * (b - a);
            f2 = f(x2);
        }
        evals += 1;
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Maximize over a closed interval: uniform coarse grid of `grid_points`
/// (endpoints included), then golden-section inside the bracket around the
/// best sample.  The result is cross-checked against the grid maximum and
/// ties break toward the smaller argument.
pub fn grid_then_golden_max(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    grid_points: usize,
    xtol: f64,
) -> (f64, f64) {
    if hi <= lo {
        return (lo, f(lo));
    }
    let m = grid_points.max(3);
    let step = (hi - lo) / (m - 1) as f64;
    let mut best_i = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    let mut samples = Vec::with_capacity(m);
    for i in 0..m {
        let x = if i + 1 == m { hi } else { lo + i as f64 * step };
        let v = f(x);
        samples.push((x, v));
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let a = samples[best_i.saturating_sub(1)].0;
    let b = samples[(best_i + 1).min(m - 1)].0;
    let (xg, vg) = golden_max(&f, a, b, xtol, 200);
    let (grid_x, grid_v) = samples[best_i];
    if vg > grid_v {
        (xg, vg)
    } else if vg < grid_v || grid_x <= xg {
        (grid_x, grid_v)
    } else {
        (xg, vg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_parabola_peak() {
        let (x, v) = grid_then_golden_max(|x| -(x - 0.37).powi(2), 0.0, 1.0, 5, 1e-10);
        assert!((x - 0.37).abs() < 1e-6);
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn edge_maximum_lands_on_endpoint() {
        let (x, _) = grid_then_golden_max(|x| x, 0.25, 0.5, 4, 1e-9);
        assert!((x - 0.5).abs() < 1e-9);
        let (x, _) = grid_then_golden_max(|x| -x, 0.25, 0.5, 4, 1e-9);
        assert!((x - 0.25).abs() < 1e-9);
    }

    #[test]
    fn degenerate_interval() {
        let (x, v) = grid_then_golden_max(|x| x * x, 0.3, 0.3, 5, 1e-9);
        assert_eq!(x, 0.3);
        assert!((v - 0.09).abs() < 1e-15);
    }
}
