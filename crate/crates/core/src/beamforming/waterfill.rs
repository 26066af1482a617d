use crate::error::{Error, Result};

/// Water-filling power allocation over parallel channels with amplitude
/// gains `gains` and noise power `noise`: `p_i = max(0, mu - noise / g_i^2)`
/// with the water level `mu` found by bisection so that `sum p_i = total_power`.
pub fn waterfilling(gains: &[f64], total_power: f64, noise: f64) -> Result<Vec<f64>> {
    if gains.iter().any(|g| !g.is_finite() || *g < 0.0) {
        return Err(Error::param("channel_gains", "must be finite and >= 0"));
    }
    if !(total_power > 0.0) || !total_power.is_finite() {
        return Err(Error::param("total_power", "must be positive"));
    }
    if !(noise > 0.0) {
        return Err(Error::param("noise", "must be positive"));
    }
    if gains.iter().all(|&g| g == 0.0) {
        return Err(Error::Numerical("all channel gains are zero".into()));
    }
    // inverse SNR per channel; dead channels never receive power
    let floors: Vec<f64> = gains
        .iter()
        .map(|&g| if g > 0.0 { noise / (g * g) } else { f64::INFINITY })
        .collect();
    let alloc = |mu: f64| -> Vec<f64> { floors.iter().map(|&f| (mu - f).max(0.0)).collect() };
    let min_floor = floors.iter().copied().fold(f64::INFINITY, f64::min);
    let (mut lo, mut hi) = (min_floor, min_floor + total_power);
    let tol = 1e-12 * total_power.max(1.0);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        let sum: f64 = alloc(mid).iter().sum();
        if (sum - total_power).abs() <= tol {
            lo = mid;
            hi = mid;
            break;
        }
        if sum > total_power {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs() {
            break;
        }
    }
    let mut p = alloc(0.5 * (lo + hi));
    // remove the last bit of bisection slack so the budget holds exactly
    let sum: f64 = p.iter().sum();
    if sum > 0.0 {
        let scale = total_power / sum;
        p.iter_mut().for_each(|x| *x *= scale);
    }
    Ok(p)
}
