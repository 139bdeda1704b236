//! Least-squares order fits on log-log data.

/// Slope of log(err) against log(n). Points with non-positive error are skipped;
/// returns None when fewer than two usable points remain.
pub fn loglog_slope(ns: &[f64], errs: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .zip(errs)
        .filter(|(n, e)| **n > 0.0 && **e > 0.0 && e.is_finite())
        .map(|(n, e)| (n.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

/// Fitted order together with a round-off flag.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderFit {
    pub slope: Option<f64>,
    /// Some error fell below `floor` and was dropped from the fit.
    pub at_roundoff: bool,
}

pub fn fit_with_floor(ns: &[f64], errs: &[f64], floor: f64) -> OrderFit {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut at_roundoff = false;
    for (n, e) in ns.iter().zip(errs) {
        if *e < floor {
            at_roundoff = true;
        } else {
            xs.push(*n);
            ys.push(*e);
        }
    }
    OrderFit { slope: loglog_slope(&xs, &ys), at_roundoff }
}
