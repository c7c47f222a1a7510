//! Gauss–Legendre rules, composite panels and Richardson extrapolation.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, computed by Newton
/// iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A plain (unweighted) quadrature rule.
#[derive(Debug, Clone, Default)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Appends `order` Gauss nodes on `[a, b]`.
    pub fn push_panel(&mut self, a: f64, b: f64, gl: &(Vec<f64>, Vec<f64>)) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, w) in gl.0.iter().zip(&gl.1) {
            self.nodes.push(mid + half * x);
            self.weights.push(half * w);
        }
    }

    /// Composite Gauss rule over consecutive break points.
    pub fn composite(breaks: &[f64], order: usize) -> Rule {
        let gl = gauss_legendre(order);
        let mut rule = Rule::default();
        for pair in breaks.windows(2) {
            rule.push_panel(pair[0], pair[1], &gl);
        }
        rule
    }

    /// Composite Gauss rule with `panels` equal panels on `[a, b]`.
    pub fn uniform_panels(a: f64, b: f64, panels: usize, order: usize) -> Rule {
        let breaks: Vec<f64> = (0..=panels)
            .map(|i| a + (b - a) * i as f64 / panels as f64)
            .collect();
        Rule::composite(&breaks, order)
    }

    /// Rule on `[0, b]` whose panels shrink geometrically towards the origin,
    /// for integrands behaving like `x^p` with `p > -1`. `levels` halvings are
    /// used below `first`; the rest of `[first, b]` is split uniformly.
    pub fn graded_from_zero(first: f64, b: f64, levels: usize, panel: f64, order: usize) -> Rule {
        let mut breaks = Vec::with_capacity(levels + 2);
        let mut x = first;
        for _ in 0..levels {
            x *= 0.5;
        }
        breaks.push(x);
        let mut y = x;
        for _ in 0..levels {
            y *= 2.0;
            breaks.push(y);
        }
        if b > first {
            let panels = ((b - first) / panel).ceil().max(1.0) as usize;
            for i in 1..=panels {
                breaks.push(first + (b - first) * i as f64 / panels as f64);
            }
        }
        Rule::composite(&breaks, order)
    }
}

/// Richardson table for a sequence of approximations at step sizes
/// `h, h/2, h/4, ...` with error expansion `c1 h + c2 h^2 + ...`.
///
/// Returns the most extrapolated value and the difference to the previous
/// level, which serves as an error estimate.
pub fn richardson_halving(values: &[f64]) -> (f64, f64) {
    assert!(!values.is_empty());
    let mut row: Vec<f64> = values.to_vec();
    let mut estimate = f64::INFINITY;
    let mut order = 1;
    while row.len() > 1 {
        let factor = (1u64 << order) as f64;
        let next: Vec<f64> = row
            .windows(2)
            .map(|w| (factor * w[1] - w[0]) / (factor - 1.0))
            .collect();
        estimate = (next[next.len() - 1] - row[row.len() - 1]).abs();
        row = next;
        order += 1;
    }
    (row[0], estimate)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 8, 16] {
            let (x, w) = gauss_legendre(n);
            for deg in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-14, "n={n} deg={deg} q={q}");
            }
        }
    }

    #[test]
    fn graded_rule_handles_weak_singularity() {
        let rule = Rule::graded_from_zero(1.0, 3.0, 60, 0.5, 12);
        let q = rule.integrate(|x| x.powf(-0.5));
        assert!((q - 2.0 * 3f64.sqrt()).abs() < 1e-8, "{q}");
    }

    #[test]
    fn richardson_removes_linear_and_quadratic_terms() {
        let f = |h: f64| 3.0 + 2.0 * h - 5.0 * h * h + 0.1 * h * h * h;
        let (v, _) = richardson_halving(&[f(0.1), f(0.05), f(0.025)]);
        assert!((v - 3.0).abs() < 5e-5);
    }

    #[test]
    fn loglog_slope_of_power_law() {
        let x = [2.0, 4.0, 8.0, 16.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(0.37)).collect();
        assert!((loglog_slope(&x, &y) - 0.37).abs() < 1e-12);
    }
}
