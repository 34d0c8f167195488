use std::f64::consts::{PI, TAU};

use super::{Convergence, QuadratureReport};

const MIN_TRAPEZOID_NODES: usize = 64;
const MAX_TRAPEZOID_NODES: usize = 1 << 21;
const TANH_SINH_T_MAX: f64 = 6.2;
const TANH_SINH_MAX_LEVEL: u32 = 11;

/// `∫ g dλ` over the circle with the normalized measure `dλ = dθ / 2π`.
///
/// Without breakpoints this is the node-doubling trapezoid rule, spectrally accurate for
/// smooth periodic `g`. With breakpoints the circle is cut at each breakpoint and at the
/// midpoints between them, and every piece is integrated by a tanh-sinh rule graded toward
/// its breakpoint end. Integrable power singularities and sharp kernel peaks at the
/// breakpoints are resolved this way.
///
/// `g` receives angles of the form `b ± x` without reduction modulo `2π`, so a breakpoint at
/// `0` is approached with exact offsets.
pub fn periodic_integrate<G: Fn(f64) -> f64>(g: G, breakpoints: &[f64], tol: f64) -> QuadratureReport {
    let tol = tol.abs().max(f64::MIN_POSITIVE);
    if breakpoints.is_empty() {
        trapezoid(&g, tol)
    } else {
        graded(&g, breakpoints, tol)
    }
}

fn trapezoid<G: Fn(f64) -> f64>(g: &G, tol: f64) -> QuadratureReport {
    let mut n = 16usize;
    let mut sum: f64 = (0..n).map(|k| g(TAU * k as f64 / n as f64)).sum();
    let mut prev = sum / n as f64;
    loop {
        let step = TAU / (2 * n) as f64;
        let odd: f64 = (0..n).map(|k| g(step * (2 * k + 1) as f64)).sum();
        sum += odd;
        n *= 2;
        let value = sum / n as f64;
        if !value.is_finite() {
            return QuadratureReport { value, est_error: f64::INFINITY, cells_or_nodes: n, status: Convergence::Divergent };
        }
        let diff = (value - prev).abs();
        if n >= MIN_TRAPEZOID_NODES && diff <= tol * value.abs().max(1.0) {
            return QuadratureReport { value, est_error: diff, cells_or_nodes: n, status: Convergence::Converged };
        }
        if n >= MAX_TRAPEZOID_NODES {
            return QuadratureReport { value, est_error: diff, cells_or_nodes: n, status: Convergence::Budget };
        }
        prev = value;
    }
}

/// One tanh-sinh panel: `θ = anchor + direction·x`, `x ∈ (0, length)`, singular end at `x = 0`.
struct Panel {
    anchor: f64,
    direction: f64,
    length: f64,
}

impl Panel {
    /// Abscissa and weight at parameter `t`; `None` once the abscissa underflows.
    #[inline]
    fn node(&self, t: f64) -> Option<(f64, f64)> {
        let v = PI * t.sinh();
        let q = (-v.abs()).exp();
        let x = if v >= 0.0 { self.length / (1.0 + q) } else { self.length * q / (1.0 + q) };
        let w = self.length * PI * t.cosh() * q / ((1.0 + q) * (1.0 + q));
        if x <= 0.0 || x >= self.length || w == 0.0 {
            None
        } else {
            Some((x, w))
        }
    }
}

fn panels(breakpoints: &[f64]) -> Vec<Panel> {
    let mut b: Vec<f64> = breakpoints.iter().map(|t| t.rem_euclid(TAU)).collect();
    b.sort_by(f64::total_cmp);
    b.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    if b.len() > 1 && (b[0] + TAU - b[b.len() - 1]) < 1e-14 {
        b.pop();
    }
    // keep exact representatives of the caller's breakpoints (e.g. 0 instead of 2π)
    let mut anchors: Vec<f64> = b
        .iter()
        .map(|&r| {
            breakpoints
                .iter()
                .copied()
                .find(|t| (t.rem_euclid(TAU) - r).abs() < 1e-14)
                .unwrap_or(r)
        })
        .collect();
    if anchors.is_empty() {
        anchors.push(0.0);
    }
    let n = b.len().max(1);
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        let gap = if n == 1 { TAU } else if i + 1 < n { b[i + 1] - b[i] } else { b[0] + TAU - b[i] };
        let half = 0.5 * gap;
        let next = if n == 1 { 0 } else { (i + 1) % n };
        out.push(Panel { anchor: anchors[i], direction: 1.0, length: half });
        out.push(Panel { anchor: anchors[next], direction: -1.0, length: half });
    }
    out
}

fn graded<G: Fn(f64) -> f64>(g: &G, breakpoints: &[f64], tol: f64) -> QuadratureReport {
    let panels = panels(breakpoints);
    let mut sums = vec![0.0f64; panels.len()];
    let mut tails = vec![0.0f64; panels.len()];
    let mut evaluations = 0usize;
    let mut prev = f64::NAN;
    let mut h = 0.5f64;
    for level in 0..=TANH_SINH_MAX_LEVEL {
        if level > 0 {
            h *= 0.5;
        }
        let n_max = (TANH_SINH_T_MAX / h).floor() as i64;
        for (p, panel) in panels.iter().enumerate() {
            for j in -n_max..=n_max {
                if level > 0 && j % 2 == 0 {
                    continue;
                }
                let t = j as f64 * h;
                let Some((x, w)) = panel.node(t) else { continue };
                let fx = g(panel.anchor + panel.direction * x);
                evaluations += 1;
                let term = w * fx;
                sums[p] += term;
                if t <= -(TANH_SINH_T_MAX - 1.0) {
                    tails[p] = tails[p].max(term.abs());
                }
            }
        }
        let value: f64 = sums.iter().sum::<f64>() * h / TAU;
        if !value.is_finite() {
            return QuadratureReport { value, est_error: f64::INFINITY, cells_or_nodes: evaluations, status: Convergence::Divergent };
        }
        let tail = tails.iter().copied().fold(0.0, f64::max) / TAU;
        let scale = value.abs().max(1.0);
        if level >= 3 {
            let diff = (value - prev).abs();
            if tail > tol * scale {
                // integrand does not vanish at the graded end: the integral is not finite
                if level >= 4 {
                    return QuadratureReport { value, est_error: f64::INFINITY, cells_or_nodes: evaluations, status: Convergence::Divergent };
                }
            } else if diff <= tol * scale {
                return QuadratureReport { value, est_error: diff, cells_or_nodes: evaluations, status: Convergence::Converged };
            }
            if level == TANH_SINH_MAX_LEVEL {
                return QuadratureReport { value, est_error: diff, cells_or_nodes: evaluations, status: Convergence::Budget };
            }
        }
        prev = value;
    }
    unreachable!("level loop always returns")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    /// Exact value of `∫ |1 - e^{iθ}|^{-s} dλ = Γ(1-s) / Γ(1-s/2)²`.
    fn singular_mean(s: f64) -> f64 {
        use statrs::function::gamma::gamma;
        gamma(1.0 - s) / gamma(1.0 - 0.5 * s).powi(2)
    }

    #[test]
    fn constants_and_trig() {
        let r = periodic_integrate(|_| 2.5, &[], 1e-12);
        assert!(r.converged());
        assert!((r.value - 2.5).abs() < 1e-14);
        let r = periodic_integrate(|t| t.cos().powi(2), &[], 1e-12);
        assert!((r.value - 0.5).abs() < 1e-14);
        let r = periodic_integrate(|t| t.cos().powi(2), &[1.0, 4.0], 1e-12);
        assert!(r.converged());
        assert!((r.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn power_singularity_at_zero() {
        let g = |t: f64| (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, t)).norm().powf(-0.75);
        let r = periodic_integrate(g, &[0.0], 1e-12);
        assert!(r.converged(), "{r:?}");
        assert!((r.value - singular_mean(0.75)).abs() < 1e-9, "{} vs {}", r.value, singular_mean(0.75));
    }

    #[test]
    fn non_integrable_singularity_is_divergent() {
        let g = |t: f64| 1.0 / (2.0 * (0.5 * t).sin()).abs();
        let r = periodic_integrate(g, &[0.0], 1e-10);
        assert_eq!(r.status, Convergence::Divergent);
    }

    #[test]
    fn sharp_poisson_peak_at_breakpoint() {
        let a = Complex64::new(1.0 - 2f64.powi(-40), 0.0);
        let r = periodic_integrate(|t| crate::kernels::poisson_kernel(a, t), &[0.0], 1e-12);
        assert!(r.converged(), "{r:?}");
        assert!((r.value - 1.0).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn breakpoint_representatives_are_kept() {
        let p = panels(&[0.0, TAU]);
        assert_eq!(p.len(), 2);
        assert_eq!(p[0].anchor, 0.0);
        assert_eq!(p[1].anchor, 0.0);
    }
}
