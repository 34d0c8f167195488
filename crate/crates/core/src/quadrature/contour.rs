use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gauss::bracket_root;
use super::{Convergence, QuadratureReport};
use crate::error::{Error, Result};

/// Gradients smaller than this on an extracted contour reject the level as non-regular.
pub const REGULAR_GRADIENT_FLOOR: f64 = 1e-6;
const MIN_CLOSED_VERTICES: usize = 8;

/// A real field on (a neighbourhood of) the unit disk with an analytic gradient.
///
/// The gradient is returned as the vector `(∂ₓ, ∂ᵧ)` packed into a complex number.
pub trait ScalarField {
    fn value(&self, z: Complex64) -> f64;
    fn gradient(&self, z: Complex64) -> Complex64;
}

/// Adapter turning a pair of closures into a [`ScalarField`].
pub struct FnField<V, G> {
    pub value: V,
    pub gradient: G,
}

impl<V, G> ScalarField for FnField<V, G>
where
    V: Fn(Complex64) -> f64,
    G: Fn(Complex64) -> Complex64,
{
    fn value(&self, z: Complex64) -> f64 {
        (self.value)(z)
    }

    fn gradient(&self, z: Complex64) -> Complex64 {
        (self.gradient)(z)
    }
}

/// A piece of a level curve as a polyline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolylineContour {
    pub vertices: Vec<Complex64>,
    pub closed: bool,
}

impl PolylineContour {
    fn segments(&self) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
        let n = self.vertices.len();
        let count = if self.closed { n } else { n.saturating_sub(1) };
        (0..count).map(move |k| (self.vertices[k], self.vertices[(k + 1) % n]))
    }

    /// Every other vertex; used as the coarse polyline for error estimates.
    fn thinned(&self) -> PolylineContour {
        let n = self.vertices.len();
        let mut vertices: Vec<Complex64> = self.vertices.iter().step_by(2).copied().collect();
        if !self.closed && n.is_multiple_of(2) {
            vertices.push(self.vertices[n - 1]);
        }
        PolylineContour { vertices, closed: self.closed }
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| (b - a).norm()).sum()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Edge {
    /// between grid vertices (i, j) and (i + 1, j)
    H(usize, usize),
    /// between grid vertices (i, j) and (i, j + 1)
    V(usize, usize),
}

/// Marching squares for `{u = r}` on a `grid_n × grid_n` grid over `[-1, 1]²`.
///
/// Cells lying entirely outside the unit disk are skipped; corner values outside the disk use
/// the field's continuation there. Edge crossings are polished by root finding on the edge, so
/// every vertex lies on the level set to rounding accuracy.
pub fn trace_levelset<S: ScalarField + ?Sized>(field: &S, r: f64, grid_n: usize) -> Result<Vec<PolylineContour>> {
    if grid_n < 4 {
        return Err(Error::Precondition(format!("grid_n = {grid_n} is too coarse")));
    }
    if !r.is_finite() {
        return Err(Error::Domain(format!("level {r} is not finite")));
    }
    let n = grid_n;
    let h = 2.0 / n as f64;
    let point = |i: usize, j: usize| Complex64::new(-1.0 + h * i as f64, -1.0 + h * j as f64);
    let mut values = vec![0.0f64; (n + 1) * (n + 1)];
    for j in 0..=n {
        for i in 0..=n {
            values[j * (n + 1) + i] = field.value(point(i, j));
        }
    }
    let val = |i: usize, j: usize| values[j * (n + 1) + i];
    let above = |v: f64| v.is_nan() || v >= r;

    let mut links: BTreeMap<Edge, Vec<Edge>> = BTreeMap::new();
    let mut connect = |a: Edge, b: Edge| {
        links.entry(a).or_default().push(b);
        links.entry(b).or_default().push(a);
    };
    for j in 0..n {
        for i in 0..n {
            let corners = [point(i, j), point(i + 1, j), point(i + 1, j + 1), point(i, j + 1)];
            if corners.iter().all(|z| z.norm_sqr() >= 1.0) {
                continue;
            }
            let bl = above(val(i, j));
            let br = above(val(i + 1, j));
            let tr = above(val(i + 1, j + 1));
            let tl = above(val(i, j + 1));
            let bottom = Edge::H(i, j);
            let right = Edge::V(i + 1, j);
            let top = Edge::H(i, j + 1);
            let left = Edge::V(i, j);
            let mut cut = Vec::with_capacity(4);
            if bl != br {
                cut.push(bottom);
            }
            if br != tr {
                cut.push(right);
            }
            if tr != tl {
                cut.push(top);
            }
            if tl != bl {
                cut.push(left);
            }
            match cut.len() {
                0 => {}
                2 => connect(cut[0], cut[1]),
                4 => {
                    let centre = above(field.value(point(i, j) + Complex64::new(0.5 * h, 0.5 * h)));
                    if centre == bl {
                        connect(bottom, right);
                        connect(top, left);
                    } else {
                        connect(left, bottom);
                        connect(right, top);
                    }
                }
                _ => unreachable!("marching squares cell with an odd number of crossings"),
            }
        }
    }

    let locate = |e: Edge| -> Complex64 {
        let (a, b, fa, fb) = match e {
            Edge::H(i, j) => (point(i, j), point(i + 1, j), val(i, j), val(i + 1, j)),
            Edge::V(i, j) => (point(i, j), point(i, j + 1), val(i, j), val(i, j + 1)),
        };
        let dir = b - a;
        let g = |s: f64| field.value(a + dir * s) - r;
        let s = bracket_root(g, 0.0, 1.0, fa - r, fb - r, 1e-16);
        a + dir * s
    };

    let mut visited: BTreeMap<Edge, bool> = links.keys().map(|&e| (e, false)).collect();
    let mut contours = Vec::new();
    // open chains first (they start at degree-one nodes), then closed loops
    let starts: Vec<Edge> = links
        .iter()
        .filter(|(_, v)| v.len() == 1)
        .map(|(&k, _)| k)
        .chain(links.keys().copied())
        .collect();
    for start in starts {
        if visited[&start] {
            continue;
        }
        let mut chain = vec![start];
        visited.insert(start, true);
        let mut current = start;
        loop {
            let next = links[&current].iter().copied().find(|e| !visited[e]);
            match next {
                Some(e) => {
                    visited.insert(e, true);
                    chain.push(e);
                    current = e;
                }
                None => break,
            }
        }
        let closed = chain.len() > 2 && links[&current].contains(&start);
        let mut vertices: Vec<Complex64> = Vec::with_capacity(chain.len());
        for e in chain {
            let v = locate(e);
            if vertices.last().is_none_or(|&last: &Complex64| (v - last).norm() > 1e-14) {
                vertices.push(v);
            }
        }
        if closed && vertices.len() > 1 && (vertices[0] - vertices[vertices.len() - 1]).norm() <= 1e-14 {
            vertices.pop();
        }
        if closed && vertices.len() < MIN_CLOSED_VERTICES {
            return Err(Error::UnresolvedContour { vertices: vertices.len(), grid_n });
        }
        contours.push(PolylineContour { vertices, closed });
    }

    let min_gradient = contours
        .iter()
        .flat_map(|c| c.vertices.iter())
        .map(|&v| field.gradient(v).norm())
        .fold(f64::INFINITY, f64::min);
    if min_gradient < REGULAR_GRADIENT_FLOOR {
        return Err(Error::DegenerateLevel { level: r, min_gradient });
    }
    Ok(contours)
}

/// Arc-length line integral of `density` along the polyline, midpoint rule per segment.
pub fn contour_integrate<D: Fn(Complex64) -> f64>(contour: &PolylineContour, density: D) -> Result<f64> {
    let mut sum = 0.0;
    for (a, b) in contour.segments() {
        let mid = 0.5 * (a + b);
        let d = density(mid);
        if !d.is_finite() {
            return Err(Error::Domain(format!("contour density is {d} at {mid}")));
        }
        sum += (b - a).norm() * d;
    }
    Ok(sum)
}

/// [`contour_integrate`] with an error estimate from the polyline through every other vertex.
pub fn contour_integrate_report<D: Fn(Complex64) -> f64>(contour: &PolylineContour, density: D) -> Result<QuadratureReport> {
    let fine = contour_integrate(contour, &density)?;
    let coarse = contour_integrate(&contour.thinned(), &density)?;
    let segments = contour.segments().count();
    Ok(QuadratureReport { value: fine, est_error: (fine - coarse).abs(), cells_or_nodes: segments, status: Convergence::Converged })
}

/// Line integral of `density` along a contour of `{field = r}`, with every segment split into
/// pieces whose new vertices are projected back onto the level set.
///
/// The value uses four pieces per segment and the error estimate is the difference to two
/// pieces per segment; with uniform splitting the midpoint error drops by about four, so the
/// estimate is roughly three times the actual error.
pub fn level_integrate_report<S, D>(field: &S, r: f64, contour: &PolylineContour, density: D) -> Result<QuadratureReport>
where
    S: ScalarField + ?Sized,
    D: Fn(Complex64) -> f64,
{
    let project = |z: Complex64, scale: f64| -> Complex64 {
        let mut w = z;
        for _ in 0..4 {
            let g = field.gradient(w);
            let g2 = g.norm_sqr();
            if g2 <= 0.0 || !g2.is_finite() {
                return z;
            }
            let step = g * ((field.value(w) - r) / g2);
            w -= step;
            if step.norm() <= 1e-16 {
                break;
            }
        }
        if (w - z).norm() <= scale && w.re.is_finite() && w.im.is_finite() {
            w
        } else {
            z
        }
    };
    let mut fine = 0.0;
    let mut coarse = 0.0;
    let mut segments = 0usize;
    for (a, b) in contour.segments() {
        let len = (b - a).norm();
        let pts: Vec<Complex64> =
            (0..=4).map(|k| if k == 0 { a } else if k == 4 { b } else { project(a + (b - a) * (k as f64 / 4.0), len) }).collect();
        let piece = |p: Complex64, q: Complex64| -> Result<f64> {
            let mid = 0.5 * (p + q);
            let d = density(mid);
            if !d.is_finite() {
                return Err(Error::Domain(format!("contour density is {d} at {mid}")));
            }
            Ok((q - p).norm() * d)
        };
        for k in 0..4 {
            fine += piece(pts[k], pts[k + 1])?;
        }
        coarse += piece(pts[0], pts[2])? + piece(pts[2], pts[4])?;
        segments += 4;
    }
    Ok(QuadratureReport { value: fine, est_error: (fine - coarse).abs(), cells_or_nodes: segments, status: Convergence::Converged })
}
