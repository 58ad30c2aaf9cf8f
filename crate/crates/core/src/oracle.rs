//! Brute-force references for checking the closed forms and the samplers.
//!
//! Nothing here calls into [`crate::pk_math`]: the ODE integrator works on the
//! raw differential system and the quadrature only sees a [`ScalarTarget`].

use crate::error::{Error, Result};
use crate::kernels::ScalarTarget;

/// Classical RK4 on `dA_a/dt = -k_a A_a`, `dA/dt = k_a A_a - k_e A` from
/// `(D, 0)`. Returns `(A_a(t_end), A(t_end))`.
pub fn integrate_ode(dose: f64, ka: f64, ke: f64, t_end: f64, n_steps: usize) -> (f64, f64) {
    let rhs = |a: f64, c: f64| (-ka * a, ka * a - ke * c);
    let h = t_end / n_steps as f64;
    let (mut a, mut c) = (dose, 0.0);
    for _ in 0..n_steps {
        let (k1a, k1c) = rhs(a, c);
        let (k2a, k2c) = rhs(a + 0.5 * h * k1a, c + 0.5 * h * k1c);
        let (k3a, k3c) = rhs(a + 0.5 * h * k2a, c + 0.5 * h * k2c);
        let (k4a, k4c) = rhs(a + h * k3a, c + h * k3c);
        a += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
        c += h / 6.0 * (k1c + 2.0 * k2c + 2.0 * k3c + k4c);
    }
    (a, c)
}

/// RK4 trajectory that also integrates `∫ A(s) ds` alongside the state.
/// Returns `(A_a, A, ∫_0^t A)` at `t_end`.
pub fn integrate_ode_with_elimination(dose: f64, ka: f64, ke: f64, t_end: f64, n_steps: usize) -> (f64, f64, f64) {
    let rhs = |a: f64, c: f64| (-ka * a, ka * a - ke * c, c);
    let h = t_end / n_steps as f64;
    let (mut a, mut c, mut auc) = (dose, 0.0, 0.0);
    for _ in 0..n_steps {
        let k1 = rhs(a, c);
        let k2 = rhs(a + 0.5 * h * k1.0, c + 0.5 * h * k1.1);
        let k3 = rhs(a + 0.5 * h * k2.0, c + 0.5 * h * k2.1);
        let k4 = rhs(a + h * k3.0, c + h * k3.1);
        a += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        c += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        auc += h / 6.0 * (k1.2 + 2.0 * k2.2 + 2.0 * k3.2 + k4.2);
    }
    (a, c, auc)
}

/// Log-density tail that must be cleared at both grid ends, relative to the peak.
pub const TAIL_LOG_RATIO: f64 = -30.0;

/// A normalised density tabulated on a uniform grid.
#[derive(Debug, Clone)]
pub struct GridPosterior {
    pub x: Vec<f64>,
    pub density: Vec<f64>,
    pub cdf: Vec<f64>,
}

impl GridPosterior {
    fn spacing(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    pub fn mean(&self) -> f64 {
        trapezoid(self.spacing(), self.x.iter().zip(&self.density).map(|(x, p)| x * p))
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        trapezoid(self.spacing(), self.x.iter().zip(&self.density).map(|(x, p)| (x - m) * (x - m) * p))
    }

    /// CDF by linear interpolation between grid nodes; 0 below and 1 above.
    pub fn cdf_at(&self, v: f64) -> f64 {
        let n = self.x.len();
        if v <= self.x[0] {
            return 0.0;
        }
        if v >= self.x[n - 1] {
            return 1.0;
        }
        let pos = (v - self.x[0]) / self.spacing();
        let k = (pos.floor() as usize).min(n - 2);
        let w = pos - k as f64;
        self.cdf[k] * (1.0 - w) + self.cdf[k + 1] * w
    }

    /// Kolmogorov–Smirnov distance between the empirical CDF of `draws` and this table.
    pub fn ks_distance(&self, draws: &[f64]) -> f64 {
        let mut sorted = draws.to_vec();
        sorted.sort_by(f64::total_cmp);
        ks_distance_sorted(&sorted, |v| self.cdf_at(v))
    }
}

/// Sup-distance between the empirical CDF of sorted `draws` and `cdf`.
pub fn ks_distance_sorted(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

fn trapezoid(h: f64, values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let n = v.len();
    h * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[n - 1]))
}

/// Tabulate `target` on `n_points` nodes in `[lo, hi]` and normalise with the
/// trapezoid rule.
///
/// Fails if either endpoint carries more than `e^{-30}` of the peak density,
/// i.e. the interval truncates real mass.
pub fn grid_posterior<T: ScalarTarget + ?Sized>(target: &T, lo: f64, hi: f64, n_points: usize) -> Result<GridPosterior> {
    if !(hi > lo) || n_points < 1000 {
        return Err(Error::InvalidConfig(format!(
            "grid needs hi > lo and at least 1000 points (got [{lo}, {hi}], {n_points})"
        )));
    }
    let h = (hi - lo) / (n_points - 1) as f64;
    let x: Vec<f64> = (0..n_points).map(|k| lo + h * k as f64).collect();
    let log_p: Vec<f64> = x.iter().map(|&v| target.log_density(v)).collect();
    let peak = log_p.iter().copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return Err(Error::InvalidConfig("target has no finite density on the grid".into()));
    }
    let tail = |v: f64| !(v - peak > TAIL_LOG_RATIO);
    if !tail(log_p[0]) || !tail(log_p[n_points - 1]) {
        return Err(Error::InvalidConfig(format!(
            "grid [{lo}, {hi}] truncates the target: endpoint density above e^-30 of the peak"
        )));
    }
    let unnorm: Vec<f64> = log_p
        .iter()
        .map(|&v| if v.is_finite() { (v - peak).exp() } else { 0.0 })
        .collect();
    let z = trapezoid(h, unnorm.iter().copied());
    let density: Vec<f64> = unnorm.iter().map(|p| p / z).collect();
    let mut cdf = Vec::with_capacity(n_points);
    let mut acc = 0.0;
    cdf.push(0.0);
    for k in 1..n_points {
        acc += 0.5 * h * (density[k - 1] + density[k]);
        cdf.push(acc);
    }
    // Renormalise the running sum so the last node is exactly 1.
    let total = acc;
    for c in &mut cdf {
        *c /= total;
    }
    cdf[n_points - 1] = 1.0;
    Ok(GridPosterior { x, density, cdf })
}

/// [`grid_posterior`] on `[center - half_width, center + half_width]`,
/// doubling the half-width until the tail criterion holds.
pub fn grid_posterior_auto<T: ScalarTarget + ?Sized>(
    target: &T,
    center: f64,
    half_width: f64,
    n_points: usize,
) -> Result<GridPosterior> {
    let mut w = half_width;
    for _ in 0..40 {
        match grid_posterior(target, center - w, center + w, n_points) {
            Ok(g) => return Ok(g),
            Err(Error::InvalidConfig(msg)) if msg.contains("truncates") => w *= 2.0,
            Err(e) => return Err(e),
        }
    }
    Err(Error::InvalidConfig(format!("no grid around {center} contains the target's mass")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::targets::Normal;

    #[test]
    fn ode_initial_conditions() {
        assert_eq!(integrate_ode(100.0, 1.5, 0.3, 0.0, 100), (100.0, 0.0));
    }

    #[test]
    fn ode_matches_hand_closed_form() {
        // Written out directly so the oracle shares nothing with pk_math.
        let (d, ka, ke, t): (f64, f64, f64, f64) = (100.0, 1.5, 0.3, 8.0);
        let exact_c = d * ka / (ka - ke) * ((-ke * t).exp() - (-ka * t).exp());
        let exact_a = d * (-ka * t).exp();
        let (a, c) = integrate_ode(d, ka, ke, t, 10_000);
        assert!(((c - exact_c) / exact_c).abs() < 1e-8);
        assert!(((a - exact_a) / exact_a).abs() < 1e-8);
    }

    #[test]
    fn ode_is_fourth_order() {
        let (d, ka, ke, t): (f64, f64, f64, f64) = (100.0, 1.5, 0.3, 8.0);
        let exact = d * ka / (ka - ke) * ((-ke * t).exp() - (-ka * t).exp());
        let err = |n| (integrate_ode(d, ka, ke, t, n).1 - exact).abs();
        let ratio = err(100) / err(200);
        assert!(ratio >= 8.0, "convergence ratio {ratio}");
    }

    #[test]
    fn gaussian_grid_moments() {
        let t = Normal { mean: 1.3, variance: 0.49 };
        let g = grid_posterior(&t, 1.3 - 12.0, 1.3 + 12.0, 20_001).unwrap();
        assert!((g.mean() - 1.3).abs() < 1e-4);
        assert!((g.variance() - 0.49).abs() < 1e-4);
        let mass = trapezoid(g.spacing(), g.density.iter().copied());
        assert!((mass - 1.0).abs() < 1e-12);
        assert_eq!(*g.cdf.last().unwrap(), 1.0);
    }

    #[test]
    fn truncated_grid_is_rejected() {
        let t = Normal::standard();
        assert!(grid_posterior(&t, -2.0, 2.0, 2000).is_err());
        assert!(grid_posterior(&t, 2.0, -2.0, 2000).is_err());
        assert!(grid_posterior(&t, -20.0, 20.0, 10).is_err());
        let g = grid_posterior_auto(&t, 0.0, 1.0, 4001).unwrap();
        assert!(g.x[0] <= -7.7);
    }
}
