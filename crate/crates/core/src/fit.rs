//! Ordinary least squares on (x, y) pairs.

/// Straight-line fit `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; zero when only two points are given.
    pub slope_se: f64,
    pub n: usize,
}

/// Least-squares line through the points. Returns `None` with fewer than two
/// points or when all abscissae coincide.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_se = if n > 2 {
        let rss: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| {
                let r = y - intercept - slope * x;
                r * r
            })
            .sum();
        (rss / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Some(LineFit {
        slope,
        intercept,
        slope_se,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let f = least_squares(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 1.0).abs() < 1e-12);
        assert!(f.slope_se < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(least_squares(&[1.0], &[2.0]).is_none());
        assert!(least_squares(&[1.0, 1.0], &[2.0, 3.0]).is_none());
    }

    #[test]
    fn standard_error_matches_hand_computation() {
        // residuals +-0.5 around y = x
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [0.5, 0.5, 2.5, 2.5];
        let f = least_squares(&xs, &ys).unwrap();
        // sxx = 5, sxy = 4 -> slope 0.8, intercept 0.3
        assert!((f.slope - 0.8).abs() < 1e-12);
        let rss: f64 = [0.5 - 0.3, 0.5 - 1.1, 2.5 - 1.9, 2.5 - 2.7]
            .iter()
            .map(|r: &f64| r * r)
            .sum();
        assert!((f.slope_se - (rss / 2.0 / 5.0).sqrt()).abs() < 1e-12);
    }
}
