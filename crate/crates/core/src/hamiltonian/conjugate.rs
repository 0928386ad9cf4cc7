use super::HamiltonianError;

/// Discrete Legendre–Fenchel transform.
///
/// For samples `(μᵢ, f(μᵢ))` returns `f*(λ) = maxᵢ μᵢλ − f(μᵢ)` at every dual
/// point. This is exact for the grid-restricted problem.
pub fn legendre_transform(
    abscissae: &[f64],
    values: &[f64],
    duals: &[f64],
) -> Result<Vec<f64>, HamiltonianError> {
    if abscissae.is_empty() || abscissae.len() != values.len() {
        return Err(HamiltonianError::EmptyGrid);
    }
    Ok(duals
        .iter()
        .map(|&l| {
            abscissae
                .iter()
                .zip(values)
                .map(|(&m, &f)| m * l - f)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect())
}

/// Convex piecewise-linear function given by knots, extended affinely
/// outside them with the stored tail slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    knots: Vec<(f64, f64)>,
    left_slope: f64,
    right_slope: f64,
}

impl PiecewiseLinear {
    /// Knots must be strictly increasing in the abscissa.
    pub fn from_knots(knots: Vec<(f64, f64)>) -> Self {
        assert!(!knots.is_empty());
        let n = knots.len();
        let (left_slope, right_slope) = if n == 1 {
            (0.0, 0.0)
        } else {
            (slope(knots[0], knots[1]), slope(knots[n - 2], knots[n - 1]))
        };
        PiecewiseLinear {
            knots,
            left_slope,
            right_slope,
        }
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn tail_slopes(&self) -> (f64, f64) {
        (self.left_slope, self.right_slope)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.knots.len();
        let (x0, y0) = self.knots[0];
        if x <= x0 {
            return y0 + self.left_slope * (x - x0);
        }
        let (xn, yn) = self.knots[n - 1];
        if x >= xn {
            return yn + self.right_slope * (x - xn);
        }
        let k = self.knots.partition_point(|&(kx, _)| kx < x);
        let (a, b) = (self.knots[k - 1], self.knots[k]);
        let t = (x - a.0) / (b.0 - a.0);
        (1.0 - t) * a.1 + t * b.1
    }

    /// Greatest convex minorant of this function restricted to its knots and
    /// continued by rays of slope `±bound` from the end knots. Segments
    /// steeper than `bound` are replaced by tangent rays.
    pub fn clip_slopes(&self, bound: f64) -> PiecewiseLinear {
        let n = self.knots.len();
        let mut first = 0;
        while first + 1 < n && slope(self.knots[first], self.knots[first + 1]) < -bound {
            first += 1;
        }
        let mut last = n - 1;
        while last > first && slope(self.knots[last - 1], self.knots[last]) > bound {
            last -= 1;
        }
        PiecewiseLinear {
            knots: self.knots[first..=last].to_vec(),
            left_slope: -bound,
            right_slope: bound,
        }
    }
}

fn slope(a: (f64, f64), b: (f64, f64)) -> f64 {
    (b.1 - a.1) / (b.0 - a.0)
}

/// Lower convex hull of points sorted by abscissa (Andrew's monotone chain,
/// lower half only). Collinear interior points are dropped.
pub fn lower_convex_envelope(points: &[(f64, f64)]) -> Result<PiecewiseLinear, HamiltonianError> {
    if points.len() < 2 {
        return Err(HamiltonianError::TooFewPoints(points.len()));
    }
    for (k, w) in points.windows(2).enumerate() {
        if !(w[1].0 > w[0].0) {
            return Err(HamiltonianError::NonMonotoneAbscissae(k + 1));
        }
    }
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for &p in points {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    Ok(PiecewiseLinear::from_knots(hull))
}
