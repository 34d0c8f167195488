//! Adaptive quadtree quadrature over subsets of the unit disk.
//!
//! Regions are intersections of sets `{L < 0}` with the unit disk. Leaf cells are integrated
//! with a tensor Gauss rule; cells crossed by a region boundary switch to a line rule that
//! locates the boundary on every Gauss line by root finding, so the boundary never costs more
//! than a few levels of refinement. Declared singular points that sit inside the region are cut
//! out as small disks and integrated in polar coordinates on geometrically graded rings.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::TAU;

use num_complex::Complex64;

use super::contour::ScalarField;
use super::gauss::{bracket_root, rule};
use super::{Convergence, QuadratureReport};

const CELL_RULE: usize = 6;
const RING_RULE: usize = 10;
const INITIAL_CELLS_PER_SIDE: usize = 8;
const MAX_DEPTH: u32 = 40;
const MAX_SPLITS: usize = 60_000;
const LINE_SAMPLES: usize = 9;
const RING_RATIO: f64 = 0.25;
const RING_COUNT: usize = 26;
const HINT_CELL_SIZE: f64 = 1.0 / 256.0;

type LevelFn<'a> = Box<dyn Fn(Complex64) -> f64 + 'a>;

/// A subset of the unit disk given as `{z : |z| < 1, L_k(z) < 0 for every k}`.
pub struct Region<'a> {
    levels: Vec<LevelFn<'a>>,
}

impl<'a> Region<'a> {
    /// The whole unit disk.
    pub fn disk() -> Self {
        Region { levels: Vec::new() }
    }

    /// Adds the constraint `level(z) < 0`.
    pub fn with_level<L: Fn(Complex64) -> f64 + 'a>(mut self, level: L) -> Self {
        self.levels.push(Box::new(level));
        self
    }

    /// `{u < r}`.
    pub fn sublevel<S: ScalarField + ?Sized>(field: &'a S, r: f64) -> Self {
        Region::disk().with_level(move |z| field.value(z) - r)
    }

    /// `{u > r}`.
    pub fn superlevel<S: ScalarField + ?Sized>(field: &'a S, r: f64) -> Self {
        Region::disk().with_level(move |z| r - field.value(z))
    }

    /// A region given only by a membership predicate. The boundary is then located by
    /// bisection, which is slower and only first-order accurate in the cut cells.
    pub fn from_predicate<P: Fn(Complex64) -> bool + 'a>(inside: P) -> Self {
        Region::disk().with_level(move |z| if inside(z) { -1.0 } else { 1.0 })
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.norm_sqr() < 1.0 && self.levels.iter().all(|l| l(z) < 0.0)
    }
}

enum Constraint<'r, 'a> {
    Level(&'r LevelFn<'a>),
    UnitDisk,
    Exclude { center: Complex64, radius: f64 },
}

enum Status {
    Inside,
    Outside,
    Cut,
}

impl Constraint<'_, '_> {
    fn eval(&self, z: Complex64) -> f64 {
        match self {
            Constraint::Level(l) => l(z),
            Constraint::UnitDisk => z.norm_sqr() - 1.0,
            Constraint::Exclude { center, radius } => radius * radius - (z - center).norm_sqr(),
        }
    }

    fn classify(&self, x0: f64, y0: f64, size: f64) -> Status {
        match self {
            Constraint::UnitDisk => {
                let (near, far) = box_distances(x0, y0, size, Complex64::new(0.0, 0.0));
                if far < 1.0 {
                    Status::Inside
                } else if near >= 1.0 {
                    Status::Outside
                } else {
                    Status::Cut
                }
            }
            Constraint::Exclude { center, radius } => {
                let (near, far) = box_distances(x0, y0, size, *center);
                if near > *radius {
                    Status::Inside
                } else if far <= *radius {
                    Status::Outside
                } else {
                    Status::Cut
                }
            }
            Constraint::Level(l) => {
                let mut neg = false;
                let mut pos = false;
                for i in 0..5 {
                    for j in 0..5 {
                        let z = Complex64::new(x0 + size * i as f64 / 4.0, y0 + size * j as f64 / 4.0);
                        if l(z) < 0.0 {
                            neg = true;
                        } else {
                            pos = true;
                        }
                    }
                }
                match (neg, pos) {
                    (true, false) => Status::Inside,
                    (false, true) => Status::Outside,
                    _ => Status::Cut,
                }
            }
        }
    }

    /// Points `s ∈ (a, b)` on the segment `p(s) = origin + s·dir` where the constraint changes sign.
    fn crossings(&self, origin: Complex64, dir: Complex64, a: f64, b: f64, out: &mut Vec<f64>) {
        match self {
            Constraint::UnitDisk => circle_crossings(origin, dir, Complex64::new(0.0, 0.0), 1.0, a, b, out),
            Constraint::Exclude { center, radius } => circle_crossings(origin, dir, *center, *radius, a, b, out),
            Constraint::Level(l) => {
                let f = |s: f64| l(origin + dir * s);
                let mut s_prev = a;
                let mut f_prev = f(a);
                for k in 1..LINE_SAMPLES {
                    let s = a + (b - a) * k as f64 / (LINE_SAMPLES - 1) as f64;
                    let fs = f(s);
                    if (f_prev < 0.0) != (fs < 0.0) {
                        let xtol = 1e-15 * (b - a).abs().max(1e-300);
                        out.push(bracket_root(f, s_prev, s, f_prev, fs, xtol));
                    }
                    s_prev = s;
                    f_prev = fs;
                }
            }
        }
    }
}

/// Nearest and farthest distance from `c` to the closed square `[x0, x0+size]×[y0, y0+size]`.
fn box_distances(x0: f64, y0: f64, size: f64, c: Complex64) -> (f64, f64) {
    let dx = (x0 - c.re).max(0.0).max(c.re - (x0 + size));
    let dy = (y0 - c.im).max(0.0).max(c.im - (y0 + size));
    let fx = (c.re - x0).abs().max((c.re - x0 - size).abs());
    let fy = (c.im - y0).abs().max((c.im - y0 - size).abs());
    (dx.hypot(dy), fx.hypot(fy))
}

fn circle_crossings(origin: Complex64, dir: Complex64, center: Complex64, radius: f64, a: f64, b: f64, out: &mut Vec<f64>) {
    // |origin - center + s·dir|² = radius², dir a unit vector
    let d = origin - center;
    let half_b = d.re * dir.re + d.im * dir.im;
    let c = d.norm_sqr() - radius * radius;
    let disc = half_b * half_b - c;
    if disc <= 0.0 {
        return;
    }
    let sq = disc.sqrt();
    // stable pair of roots
    let q = -(half_b + sq.copysign(half_b));
    let (r1, r2) = if q != 0.0 { (q, c / q) } else { (-sq, sq) };
    for r in [r1, r2] {
        if r > a && r < b {
            out.push(r);
        }
    }
}

struct Integrator<'f, 'r, 'a, F: Fn(Complex64) -> f64> {
    f: &'f F,
    constraints: Vec<Constraint<'r, 'a>>,
}

impl<F: Fn(Complex64) -> f64> Integrator<'_, '_, '_, F> {
    /// Integral of `f` over the part of the cell satisfying every constraint.
    fn cell(&self, x0: f64, y0: f64, size: f64) -> f64 {
        let mut active: Vec<&Constraint> = Vec::new();
        for c in &self.constraints {
            match c.classify(x0, y0, size) {
                Status::Outside => return 0.0,
                Status::Inside => {}
                Status::Cut => active.push(c),
            }
        }
        let r = rule(CELL_RULE);
        let half = 0.5 * size;
        if active.is_empty() {
            let mut sum = 0.0;
            for (xi, wi) in r.nodes.iter().zip(&r.weights) {
                let x = x0 + half * (1.0 + xi);
                for (yj, wj) in r.nodes.iter().zip(&r.weights) {
                    let y = y0 + half * (1.0 + yj);
                    sum += wi * wj * (self.f)(Complex64::new(x, y));
                }
            }
            return sum * half * half;
        }
        // lines run along the axis where the first cut constraint varies most, so the
        // boundary crosses each line transversally
        let along_y = line_axis_is_y(active[0], x0, y0, size);
        let (dir, outer_unit) = if along_y {
            (Complex64::new(0.0, 1.0), Complex64::new(1.0, 0.0))
        } else {
            (Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0))
        };
        let corner = Complex64::new(x0, y0);
        // the inside length of a line has kinks where the boundary leaves through the two
        // edges parallel to the outer axis; splitting the outer rule there keeps it smooth
        let mut outer = vec![0.0, size];
        for c in &active {
            c.crossings(corner, outer_unit, 0.0, size, &mut outer);
            c.crossings(corner + dir * size, outer_unit, 0.0, size, &mut outer);
        }
        outer.sort_by(f64::total_cmp);
        let mut breaks = Vec::with_capacity(8);
        let mut sum = 0.0;
        for piece in outer.windows(2) {
            let (lo, hi) = (piece[0], piece[1]);
            if hi <= lo {
                continue;
            }
            let outer_half = 0.5 * (hi - lo);
            let mut part = 0.0;
            for (xi, wi) in r.nodes.iter().zip(&r.weights) {
                let origin = corner + outer_unit * (lo + outer_half * (1.0 + xi));
                breaks.clear();
                breaks.push(0.0);
                breaks.push(size);
                for c in &active {
                    c.crossings(origin, dir, 0.0, size, &mut breaks);
                }
                breaks.sort_by(f64::total_cmp);
                let mut line = 0.0;
                for seg in breaks.windows(2) {
                    let (a, b) = (seg[0], seg[1]);
                    if b <= a {
                        continue;
                    }
                    let mid = origin + dir * (0.5 * (a + b));
                    if active.iter().any(|c| c.eval(mid) >= 0.0) {
                        continue;
                    }
                    let h = 0.5 * (b - a);
                    let mut s = 0.0;
                    for (yj, wj) in r.nodes.iter().zip(&r.weights) {
                        s += wj * (self.f)(origin + dir * (a + h * (1.0 + yj)));
                    }
                    line += s * h;
                }
                part += wi * line;
            }
            sum += part * outer_half;
        }
        sum
    }

    /// Polar integral over the disk `|z - center| < radius` on graded rings.
    fn polar(&self, center: Complex64, radius: f64, tol: f64) -> QuadratureReport {
        let r = rule(RING_RULE);
        let ray = |theta: f64| -> f64 {
            let e = Complex64::from_polar(1.0, theta);
            let mut outer = radius;
            let mut total = 0.0;
            for _ in 0..RING_COUNT {
                let inner = outer * RING_RATIO;
                let h = 0.5 * (outer - inner);
                let mut s = 0.0;
                for (x, w) in r.nodes.iter().zip(&r.weights) {
                    let rho = inner + h * (1.0 + x);
                    s += w * rho * (self.f)(center + e * rho);
                }
                total += s * h;
                outer = inner;
            }
            total
        };
        let mut n = 8usize;
        let mut sum: f64 = (0..n).map(|k| ray(TAU * k as f64 / n as f64)).sum();
        let mut prev = sum * TAU / n as f64;
        loop {
            let step = TAU / (2 * n) as f64;
            sum += (0..n).map(|k| ray(step * (2 * k + 1) as f64)).sum::<f64>();
            n *= 2;
            let value = sum * TAU / n as f64;
            let diff = (value - prev).abs();
            let nodes = n * RING_COUNT * RING_RULE;
            if !value.is_finite() {
                return QuadratureReport { value, est_error: f64::INFINITY, cells_or_nodes: nodes, status: Convergence::Divergent };
            }
            if n >= 32 && diff <= tol {
                return QuadratureReport { value, est_error: diff, cells_or_nodes: nodes, status: Convergence::Converged };
            }
            if n >= 1 << 14 {
                return QuadratureReport { value, est_error: diff, cells_or_nodes: nodes, status: Convergence::Budget };
            }
            prev = value;
        }
    }
}

fn line_axis_is_y(c: &Constraint, x0: f64, y0: f64, size: f64) -> bool {
    let mid = Complex64::new(x0 + 0.5 * size, y0 + 0.5 * size);
    match c {
        Constraint::UnitDisk => mid.im.abs() > mid.re.abs(),
        Constraint::Exclude { center, .. } => {
            let d = mid - center;
            d.im.abs() > d.re.abs()
        }
        Constraint::Level(l) => {
            let mut vx = 0.0;
            let mut vy = 0.0;
            let pts: Vec<Vec<f64>> = (0..5)
                .map(|i| (0..5).map(|j| l(Complex64::new(x0 + size * i as f64 / 4.0, y0 + size * j as f64 / 4.0))).collect())
                .collect();
            #[allow(clippy::needless_range_loop)]
            for i in 0..5 {
                for j in 0..4 {
                    let dy = pts[i][j + 1] - pts[i][j];
                    if dy.is_finite() {
                        vy += dy.abs();
                    }
                    let dx = pts[j + 1][i] - pts[j][i];
                    if dx.is_finite() {
                        vx += dx.abs();
                    }
                }
            }
            vy > vx
        }
    }
}

#[derive(Clone, Copy)]
struct Leaf {
    x0: f64,
    y0: f64,
    size: f64,
    depth: u32,
    children: [f64; 4],
    err: f64,
    live: bool,
}

impl Leaf {
    fn fine(&self) -> f64 {
        self.children.iter().sum()
    }
}

#[derive(PartialEq)]
struct Key(f64, usize);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then_with(|| other.1.cmp(&self.1))
    }
}

/// Integral of `f` over `region` with respect to planar area.
///
/// `singular_points` declares where `f` has integrable point singularities (logarithmic
/// poles, power singularities). Those inside the region get a polar sub-disk; the rest only
/// steer the initial refinement. The result is summed in a fixed cell order, so repeated runs
/// are bit-identical.
pub fn disk_integrate<F>(f: F, region: &Region, singular_points: &[Complex64], tol: f64) -> QuadratureReport
where
    F: Fn(Complex64) -> f64,
{
    let tol = tol.abs().max(1e-15);
    let mut constraints: Vec<Constraint> = region.levels.iter().map(Constraint::Level).collect();
    constraints.push(Constraint::UnitDisk);

    let mut points: Vec<Complex64> = Vec::new();
    for &s in singular_points {
        if s.re.is_finite() && s.im.is_finite() && !points.iter().any(|p| (p - s).norm() < 1e-12) {
            points.push(s);
        }
    }
    let mut disks: Vec<(Complex64, f64)> = Vec::new();
    let mut hints: Vec<Complex64> = Vec::new();
    for (i, &s) in points.iter().enumerate() {
        match polar_radius(&constraints, &points, i) {
            Some(radius) => disks.push((s, radius)),
            None => hints.push(s),
        }
    }

    let mut report = QuadratureReport::exact(0.0);
    {
        let integrator = Integrator { f: &f, constraints: Vec::new() };
        let polar_tol = 0.25 * tol / disks.len().max(1) as f64;
        for &(c, r) in &disks {
            report = report.combine(integrator.polar(c, r, polar_tol));
        }
    }
    for &(center, radius) in &disks {
        constraints.push(Constraint::Exclude { center, radius });
    }
    let integrator = Integrator { f: &f, constraints };

    let initial = 2.0 / INITIAL_CELLS_PER_SIDE as f64;
    let mut seeds: Vec<(f64, f64, f64, u32)> = Vec::new();
    for j in 0..INITIAL_CELLS_PER_SIDE {
        for i in 0..INITIAL_CELLS_PER_SIDE {
            seeds.push((-1.0 + initial * i as f64, -1.0 + initial * j as f64, initial, 0));
        }
    }
    let mut leaves: Vec<Leaf> = Vec::new();
    while let Some((x0, y0, size, depth)) = seeds.pop() {
        if needs_presplit(x0, y0, size, &disks, &hints) && depth < MAX_DEPTH {
            let h = 0.5 * size;
            for (dx, dy) in [(0.0, 0.0), (h, 0.0), (0.0, h), (h, h)] {
                seeds.push((x0 + dx, y0 + dy, h, depth + 1));
            }
            continue;
        }
        let coarse = integrator.cell(x0, y0, size);
        leaves.push(make_leaf(&integrator, x0, y0, size, depth, coarse));
    }

    let mut heap = BinaryHeap::new();
    let mut total_err = 0.0;
    for (id, leaf) in leaves.iter().enumerate() {
        total_err += leaf.err;
        if leaf.err > 0.0 {
            heap.push(Key(leaf.err, id));
        }
    }
    let cell_tol = 0.5 * tol;
    let mut splits = 0usize;
    let mut status = Convergence::Converged;
    while total_err > cell_tol {
        if !total_err.is_finite() {
            status = Convergence::Divergent;
            break;
        }
        let Some(Key(_, id)) = heap.pop() else {
            status = Convergence::Budget;
            break;
        };
        if splits >= MAX_SPLITS {
            status = Convergence::Budget;
            break;
        }
        let leaf = leaves[id];
        if leaf.depth >= MAX_DEPTH {
            continue;
        }
        leaves[id].live = false;
        total_err -= leaf.err;
        let h = 0.5 * leaf.size;
        let offsets = [(0.0, 0.0), (h, 0.0), (0.0, h), (h, h)];
        for (k, (dx, dy)) in offsets.into_iter().enumerate() {
            let child = make_leaf(&integrator, leaf.x0 + dx, leaf.y0 + dy, h, leaf.depth + 1, leaf.children[k]);
            total_err += child.err;
            let cid = leaves.len();
            if child.err > 0.0 {
                heap.push(Key(child.err, cid));
            }
            leaves.push(child);
        }
        splits += 1;
        if splits.is_multiple_of(1024) {
            // resync the running sum
            total_err = leaves.iter().filter(|l| l.live).map(|l| l.err).sum();
        }
    }
    let live: Vec<&Leaf> = leaves.iter().filter(|l| l.live).collect();
    let value: f64 = live.iter().map(|l| l.fine()).sum();
    let est: f64 = live.iter().map(|l| l.err).sum();
    if status == Convergence::Converged && !value.is_finite() {
        status = Convergence::Divergent;
    }
    let cells = QuadratureReport { value, est_error: est, cells_or_nodes: live.len(), status };
    report.combine(cells)
}

fn make_leaf<F: Fn(Complex64) -> f64>(integ: &Integrator<F>, x0: f64, y0: f64, size: f64, depth: u32, coarse: f64) -> Leaf {
    let h = 0.5 * size;
    let children = [
        integ.cell(x0, y0, h),
        integ.cell(x0 + h, y0, h),
        integ.cell(x0, y0 + h, h),
        integ.cell(x0 + h, y0 + h, h),
    ];
    let fine: f64 = children.iter().sum();
    let err = if coarse.is_finite() && fine.is_finite() { (coarse - fine).abs() } else { f64::INFINITY };
    Leaf { x0, y0, size, depth, children, err, live: true }
}

fn needs_presplit(x0: f64, y0: f64, size: f64, disks: &[(Complex64, f64)], hints: &[Complex64]) -> bool {
    let margin = 0.25 * size;
    for &(c, r) in disks {
        let (near, _) = box_distances(x0, y0, size, c);
        if near <= r + margin && size > r {
            return true;
        }
    }
    for &p in hints {
        let (near, _) = box_distances(x0, y0, size, p);
        if near <= margin && size > HINT_CELL_SIZE {
            return true;
        }
    }
    false
}

/// Radius of a polar disk around `points[i]` lying inside every constraint, or `None`
/// when the point is not an interior point of the region.
fn polar_radius(constraints: &[Constraint], points: &[Complex64], i: usize) -> Option<f64> {
    let s = points[i];
    let modulus = s.norm();
    if modulus >= 1.0 - 1e-9 || constraints.iter().any(|c| c.eval(s) >= 0.0) {
        return None;
    }
    let mut radius = 0.25f64.min(0.5 * (1.0 - modulus));
    for (j, &t) in points.iter().enumerate() {
        if j != i {
            radius = radius.min(0.5 * (s - t).norm());
        }
    }
    while radius > 1e-12 {
        let fits = [1.0, 0.75, 0.5].iter().all(|&scale| {
            (0..32).all(|k| {
                let z = s + Complex64::from_polar(radius * scale, TAU * (k as f64 + 0.5 * scale) / 32.0);
                constraints.iter().all(|c| c.eval(z) < 0.0)
            })
        });
        if fits {
            return Some(radius);
        }
        radius *= 0.5;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_PI, PI};

    #[test]
    fn unit_disk_area() {
        let r = disk_integrate(|_| FRAC_1_PI, &Region::disk(), &[], 1e-10);
        assert!(r.converged(), "{r:?}");
        assert!((r.value - 1.0).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn polynomial_over_small_disk() {
        let region = Region::disk().with_level(|z| z.norm_sqr() - 0.25);
        let f = |z: Complex64| FRAC_1_PI * (Complex64::new(1.0, 0.0) + z).norm_sqr();
        let r = disk_integrate(f, &region, &[], 1e-9);
        assert!((r.value - 0.28125).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn logarithmic_integrand_with_declared_pole() {
        let level = 0.5f64.ln();
        let region = Region::disk().with_level(move |z| z.norm().ln() - level);
        let f = move |z: Complex64| 2.0 * FRAC_1_PI * (level - z.norm().ln());
        let r = disk_integrate(f, &region, &[Complex64::new(0.0, 0.0)], 1e-9);
        assert!((r.value - 0.25).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn inverse_distance_singularity() {
        // ∫_{|z|<1} 1/|z - a| dA has no elementary form; compare against the polar oracle
        // centred at the singular point, integrated ray by ray with the exit distance
        let a = Complex64::new(0.3, -0.2);
        let exact = {
            let n = 4096;
            let mut s = 0.0;
            for k in 0..n {
                let th = TAU * (k as f64 + 0.5) / n as f64;
                let e = Complex64::from_polar(1.0, th);
                let b = a.re * e.re + a.im * e.im;
                s += -b + (b * b + 1.0 - a.norm_sqr()).sqrt();
            }
            s * TAU / n as f64
        };
        let r = disk_integrate(|z| 1.0 / (z - a).norm(), &Region::disk(), &[a], 1e-9);
        assert!((r.value - exact).abs() < 1e-8, "{} vs {}", r.value, exact);
    }

    #[test]
    fn complementary_regions_add_up() {
        let level = |z: Complex64| (z - Complex64::new(0.2, 0.1)).norm_sqr() - 0.3;
        let f = |z: Complex64| (3.0 * z.re).cos() + z.im * z.im;
        let inside = disk_integrate(f, &Region::disk().with_level(level), &[], 1e-9);
        let outside = disk_integrate(f, &Region::disk().with_level(move |z| -level(z)), &[], 1e-9);
        let whole = disk_integrate(f, &Region::disk(), &[], 1e-9);
        let gap = (inside.value + outside.value - whole.value).abs();
        assert!(gap <= 2.0 * (inside.est_error + outside.est_error + whole.est_error) + 1e-12, "gap {gap}");
        let _ = PI;
    }

    #[test]
    fn predicate_region() {
        let region = Region::from_predicate(|z| z.re > 0.0);
        let r = disk_integrate(|_| FRAC_1_PI, &region, &[], 1e-7);
        assert!((r.value - 0.5).abs() < 1e-7, "{}", r.value);
    }
}
