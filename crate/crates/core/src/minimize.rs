//! Derivative-free one-dimensional minimisation.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the minimum of a unimodal `f` on `[a, b]`.
///
/// Returns `(x, f(x))` for the best point evaluated, endpoints included.
pub(crate) fn golden_section<F>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let fa = f(lo);
    let fb = f(hi);
    let mut best = if fb < fa { (hi, fb) } else { (lo, fa) };
    if hi - lo <= tol {
        return best;
    }
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
        // interior points collapse onto each other below rounding
        if x2 <= x1 {
            break;
        }
    }
    for (x, fx) in [(x1, f1), (x2, f2)] {
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Maximises a unimodal `f` on `[a, b]`.
pub(crate) fn golden_max<F>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let (x, v) = golden_section(|x| -f(x), a, b, tol);
    (x, -v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_minimum() {
        let (x, v) = golden_section(|x| (x - 0.3) * (x - 0.3) + 1.0, -2.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn minimum_at_endpoint() {
        let (x, v) = golden_section(|x| x, 1.0, 2.0, 1e-10);
        assert_eq!(x, 1.0);
        assert_eq!(v, 1.0);
        let (x, _) = golden_section(|x| -x, 1.0, 2.0, 1e-10);
        assert_eq!(x, 2.0);
    }

    #[test]
    fn degenerate_interval() {
        assert_eq!(golden_section(|x| x * x, 0.5, 0.5, 1e-8), (0.5, 0.25));
    }
}
