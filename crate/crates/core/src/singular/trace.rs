//! Cell-based extraction of `{lambda = 0}`. Corner signs locate crossing
//! edges, bisection refines the crossings, and rank-zero points of `df` are
//! found separately by Gauss-Newton, since `lambda` has a degenerate critical
//! point there and the cell picture around it is ambiguous.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{dist, BranchSample, SingularBranch, SingularError};
use crate::exec::{map_indices, Execution};
use crate::front::{jacobian, lambda_jet, recover_normal, FrontGerm, NormalSpec};

/// Below this `|w| / (|f_u| |f_v|)` the normal is recovered from jets
/// instead of normalizing `w` directly.
const DIRECT_NORMAL_REL: f64 = 1e-6;

/// Bisection stops once the bracket is this small relative to the point.
const BISECT_REL: f64 = 1e-15;
const BISECT_MAX: usize = 200;

const NEWTON_MAX: usize = 60;
/// Accept a rank-zero point when `|df| <= CRITICAL_TOL * max(1, |d^2 f|)`.
const CRITICAL_TOL: f64 = 1e-9;
/// Crossings are cut out of the cell picture within this many cells.
const CUT_CELLS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

impl Rect {
    pub fn new(u_min: f64, u_max: f64, v_min: f64, v_max: f64) -> Result<Self, SingularError> {
        let ok = [u_min, u_max, v_min, v_max].iter().all(|x| x.is_finite()) && u_min < u_max && v_min < v_max;
        if !ok {
            return Err(SingularError::Precondition(format!(
                "bad rectangle [{u_min}, {u_max}] x [{v_min}, {v_max}]"
            )));
        }
        Ok(Rect {
            u_min,
            u_max,
            v_min,
            v_max,
        })
    }

    /// `[-r, r]^2`.
    pub fn square(r: f64) -> Self {
        Rect {
            u_min: -r,
            u_max: r,
            v_min: -r,
            v_max: r,
        }
    }

    fn contains(&self, p: [f64; 2]) -> bool {
        (self.u_min..=self.u_max).contains(&p[0]) && (self.v_min..=self.v_max).contains(&p[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    /// Cells per side; the grid has `(grid + 1)^2` vertices.
    pub grid: usize,
    /// Largest `|lambda|` accepted at a refined crossing.
    pub trace_tol: f64,
    pub rank_tol: f64,
    pub exec: Execution,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            grid: 200,
            trace_tol: 1e-10,
            rank_tol: 1e-8,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriticalKind {
    /// `det Hess lambda < 0`: two smooth curves of `{lambda = 0}` cross.
    Crossing,
    /// `det Hess lambda > 0`: an isolated singular point.
    Isolated,
    Degenerate,
}

/// A point where `df = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalZero {
    pub point: [f64; 2],
    pub kind: CriticalKind,
    pub lambda: f64,
    pub hess_det: f64,
    /// For crossings, the four unit directions along which the quadratic
    /// part of `lambda` vanishes, by increasing angle.
    pub directions: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSet {
    pub rect: Rect,
    pub grid: usize,
    pub branches: Vec<SingularBranch>,
    pub critical: Vec<CriticalZero>,
}

impl SingularSet {
    pub fn isolated(&self) -> impl Iterator<Item = &CriticalZero> {
        self.critical.iter().filter(|c| c.kind == CriticalKind::Isolated)
    }

    /// Branches leaving crossing `c`.
    pub fn branches_from(&self, c: usize) -> impl Iterator<Item = &SingularBranch> {
        self.branches.iter().filter(move |b| b.start == Some(c))
    }
}

#[derive(Debug, Clone, Copy)]
struct Sample {
    lam: f64,
    nu: [f64; 3],
    /// `|f_u|^2 + |f_v|^2`.
    df_sq: f64,
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn to3(v: &[f64]) -> [f64; 3] {
    [v[0], v[1], v[2]]
}

/// `lambda` and a unit normal at `p`. For automatic normals near the
/// singular set `f_u x f_v` loses its direction, so a nearby aligned normal
/// `reference` is projected on instead; without one the normal is recovered
/// from jets.
fn sample(germ: &FrontGerm, p: [f64; 2], reference: Option<[f64; 3]>) -> Option<Sample> {
    let f = germ.map_jets(&p, 1).ok()?;
    let jac = jacobian(&f);
    let fu = [jac[0][0], jac[1][0], jac[2][0]];
    let fv = [jac[0][1], jac[1][1], jac[2][1]];
    let w = cross3(fu, fv);
    let df_sq = dot3(fu, fu) + dot3(fv, fv);
    let (lam, nu) = match germ.normal() {
        NormalSpec::Explicit(_) => {
            let raw = to3(&germ.raw_normal_jets(&p, 0).ok()??.value());
            let n = dot3(raw, raw).sqrt();
            if !(n > 0.0) {
                return None;
            }
            let nu = raw.map(|x| x / n);
            (dot3(w, nu), nu)
        }
        NormalSpec::Auto => {
            let wn = dot3(w, w).sqrt();
            if wn > DIRECT_NORMAL_REL * (dot3(fu, fu) * dot3(fv, fv)).sqrt() {
                (wn, w.map(|x| x / wn))
            } else if let Some(r) = reference {
                (dot3(w, r), r)
            } else {
                let (nu, lam) = recover_normal(germ, &p, 0).ok()?;
                (lam.value(), to3(&nu.value()))
            }
        }
    };
    (lam.is_finite() && nu.iter().all(|x| x.is_finite())).then_some(Sample { lam, nu, df_sq })
}

fn aligned(mut s: Sample, reference: [f64; 3], auto: bool) -> Sample {
    if auto && dot3(s.nu, reference) < 0.0 {
        s.lam = -s.lam;
        s.nu = s.nu.map(|x| -x);
    }
    s
}

struct Grid<'a> {
    germ: &'a FrontGerm,
    rect: Rect,
    n: usize,
    auto: bool,
    values: Vec<Option<Sample>>,
}

impl Grid<'_> {
    fn point(&self, i: usize, j: usize) -> [f64; 2] {
        let r = &self.rect;
        let s = |a: f64, b: f64, k: usize| a + (b - a) * k as f64 / self.n as f64;
        [s(r.u_min, r.u_max, i), s(r.v_min, r.v_max, j)]
    }

    fn at(&self, i: usize, j: usize) -> Option<Sample> {
        self.values[j * (self.n + 1) + i]
    }

    fn cell_size(&self) -> f64 {
        let r = &self.rect;
        ((r.u_max - r.u_min) / self.n as f64).max((r.v_max - r.v_min) / self.n as f64)
    }

    /// Horizontal edges `(i, j)-(i+1, j)` first, then vertical ones.
    fn edge_key(&self, horizontal: bool, i: usize, j: usize) -> usize {
        let n = self.n;
        if horizontal {
            j * n + i
        } else {
            (n + 1) * n + j * (n + 1) + i
        }
    }

    fn edge_ends(&self, key: usize) -> ((usize, usize), (usize, usize)) {
        let n = self.n;
        if key < (n + 1) * n {
            let (j, i) = (key / n, key % n);
            ((i, j), (i + 1, j))
        } else {
            let k = key - (n + 1) * n;
            let (j, i) = (k / (n + 1), k % (n + 1));
            ((i, j), (i, j + 1))
        }
    }

    /// Flips automatic normals so neighbouring vertices agree: along each
    /// row, and from row start to row start.
    fn align(&mut self) {
        if !self.auto {
            return;
        }
        let n = self.n;
        let mut row_ref: Option<[f64; 3]> = None;
        for j in 0..=n {
            let mut prev = row_ref;
            let mut first = None;
            for i in 0..=n {
                let k = j * (n + 1) + i;
                if let Some(s) = self.values[k] {
                    let s = match prev {
                        Some(r) => aligned(s, r, true),
                        None => s,
                    };
                    self.values[k] = Some(s);
                    prev = Some(s.nu);
                    first.get_or_insert(s.nu);
                }
            }
            if first.is_some() {
                row_ref = first;
            }
        }
    }

    /// Refines the zero on a sign-changing edge by bisection.
    fn refine(&self, key: usize, tol: f64) -> Option<([f64; 2], f64)> {
        let ((ia, ja), (ib, jb)) = self.edge_ends(key);
        let (sa, sb) = (self.at(ia, ja)?, self.at(ib, jb)?);
        let (mut lo, mut hi) = (self.point(ia, ja), self.point(ib, jb));
        let lo_pos = sa.lam >= 0.0;
        let mut best = if sa.lam.abs() <= sb.lam.abs() { (lo, sa.lam) } else { (hi, sb.lam) };
        for _ in 0..BISECT_MAX {
            if best.1.abs() <= tol {
                break;
            }
            let mid = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
            if dist(lo, hi) <= BISECT_REL * (1.0 + mid[0].abs() + mid[1].abs()) {
                break;
            }
            let s = aligned(sample(self.germ, mid, Some(sa.nu))?, sa.nu, self.auto);
            if s.lam.abs() < best.1.abs() {
                best = (mid, s.lam);
            }
            if (s.lam >= 0.0) == lo_pos {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some((best.0, best.1.abs()))
    }

    /// Marching-squares segments as pairs of edge keys. Saddle cells are
    /// split by the sign at the cell centre.
    fn segments(&self) -> Vec<(usize, usize)> {
        let n = self.n;
        let mut out = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let corners = [self.at(i, j), self.at(i + 1, j), self.at(i + 1, j + 1), self.at(i, j + 1)];
                let Some(c) = corners.iter().copied().collect::<Option<Vec<_>>>() else {
                    continue;
                };
                let pos: Vec<bool> = c.iter().map(|s| s.lam >= 0.0).collect();
                // Edge k joins corners k and k + 1.
                let keys = [
                    self.edge_key(true, i, j),
                    self.edge_key(false, i + 1, j),
                    self.edge_key(true, i, j + 1),
                    self.edge_key(false, i, j),
                ];
                let crossing: Vec<usize> = (0..4).filter(|&k| pos[k] != pos[(k + 1) % 4]).collect();
                match crossing.len() {
                    2 => out.push((keys[crossing[0]], keys[crossing[1]])),
                    4 => {
                        let p = self.point(i, j);
                        let q = self.point(i + 1, j + 1);
                        let centre = [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0];
                        let centre_pos = sample(self.germ, centre, Some(c[0].nu))
                            .map(|s| aligned(s, c[0].nu, self.auto).lam >= 0.0)
                            .unwrap_or(pos[0]);
                        if centre_pos == pos[0] {
                            out.push((keys[0], keys[1]));
                            out.push((keys[2], keys[3]));
                        } else {
                            out.push((keys[3], keys[0]));
                            out.push((keys[1], keys[2]));
                        }
                    }
                    _ => {}
                }
            }
        }
        out
    }

    /// Interior vertices where `|df|^2` is a strict local minimum.
    fn critical_seeds(&self) -> Vec<[f64; 2]> {
        let n = self.n;
        let mut seeds = Vec::new();
        for j in 1..n {
            for i in 1..n {
                let Some(c) = self.at(i, j) else { continue };
                let mut strict = false;
                let mut min = true;
                for (di, dj) in [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)] {
                    let (ii, jj) = ((i as i64 + di) as usize, (j as i64 + dj) as usize);
                    match self.at(ii, jj) {
                        Some(s) if s.df_sq < c.df_sq => min = false,
                        Some(s) if s.df_sq > c.df_sq => strict = true,
                        _ => {}
                    }
                }
                if min && strict {
                    seeds.push(self.point(i, j));
                }
            }
        }
        seeds
    }
}

/// Gauss-Newton for `(f_u, f_v) = 0` from `seed`.
fn rank_zero_point(germ: &FrontGerm, seed: [f64; 2], max_move: f64) -> Option<[f64; 2]> {
    let mut p = seed;
    for _ in 0..NEWTON_MAX {
        let f = germ.map_jets(&p, 2).ok()?;
        let mut residual = DVector::zeros(6);
        let mut jac = DMatrix::zeros(6, 2);
        for (k, c) in f.components().iter().enumerate() {
            residual[k] = c.coeff(&[1, 0, 0]);
            residual[3 + k] = c.coeff(&[0, 1, 0]);
            let (uu, uv, vv) = (2.0 * c.coeff(&[2, 0, 0]), c.coeff(&[1, 1, 0]), 2.0 * c.coeff(&[0, 2, 0]));
            jac[(k, 0)] = uu;
            jac[(k, 1)] = uv;
            jac[(3 + k, 0)] = uv;
            jac[(3 + k, 1)] = vv;
        }
        let scale = jac.amax().max(1.0);
        if residual.amax() <= CRITICAL_TOL * scale * 1e-3 {
            return Some(p);
        }
        let step = jac.clone().svd(true, true).solve(&(-&residual), 1e-14 * scale).ok()?;
        p = [p[0] + step[0], p[1] + step[1]];
        if !p.iter().all(|x| x.is_finite()) || dist(p, seed) > max_move {
            return None;
        }
        if step.amax() <= 1e-15 * (1.0 + p[0].abs() + p[1].abs()) {
            return (residual.amax() <= CRITICAL_TOL * scale).then_some(p);
        }
    }
    None
}

/// Null directions of `a x^2 + 2 b x y + c y^2` when `b^2 > ac`.
fn null_directions(a: f64, b: f64, c: f64) -> Vec<[f64; 2]> {
    let disc = b * b - a * c;
    if disc <= 0.0 {
        return Vec::new();
    }
    let r = disc.sqrt();
    let raw: Vec<[f64; 2]> = if a.abs() >= c.abs() {
        vec![[(-b + r) / a, 1.0], [(-b - r) / a, 1.0]]
    } else {
        vec![[1.0, (-b + r) / c], [1.0, (-b - r) / c]]
    };
    let mut out: Vec<[f64; 2]> = raw
        .into_iter()
        .flat_map(|d| {
            let n = d[0].hypot(d[1]);
            [[d[0] / n, d[1] / n], [-d[0] / n, -d[1] / n]]
        })
        .collect();
    out.sort_by(|x, y| angle(*x).total_cmp(&angle(*y)));
    out
}

/// Angle in `[0, 2 pi)`.
fn angle(d: [f64; 2]) -> f64 {
    d[1].atan2(d[0]).rem_euclid(std::f64::consts::TAU)
}

fn classify_critical(germ: &FrontGerm, p: [f64; 2]) -> Option<CriticalZero> {
    let lam = lambda_jet(germ, &p, 2).ok()?.lam;
    let (a, b, c) = (2.0 * lam.coeff(&[2, 0, 0]), lam.coeff(&[1, 1, 0]), 2.0 * lam.coeff(&[0, 2, 0]));
    let det = a * c - b * b;
    let tol = 1e-9 * (a.abs() + b.abs() + c.abs()).powi(2).max(1e-300);
    let kind = if det < -tol {
        CriticalKind::Crossing
    } else if det > tol {
        CriticalKind::Isolated
    } else {
        CriticalKind::Degenerate
    };
    let directions = if kind == CriticalKind::Crossing { null_directions(a, b, c) } else { Vec::new() };
    Some(CriticalZero {
        point: p,
        kind,
        lambda: lam.value(),
        hess_det: det,
        directions,
    })
}

/// Chains of segments joined at shared edges. Open chains come first.
fn chains(segments: &[(usize, usize)]) -> Vec<(Vec<usize>, bool)> {
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for (s, &(a, b)) in segments.iter().enumerate() {
        adj.entry(a).or_default().push(s);
        adj.entry(b).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();
    let walk = |start_node: usize, used: &mut Vec<bool>| -> Vec<usize> {
        let mut nodes = vec![start_node];
        let mut node = start_node;
        while let Some(&s) = adj[&node].iter().find(|&&s| !used[s]) {
            used[s] = true;
            let (a, b) = segments[s];
            node = if a == node { b } else { a };
            nodes.push(node);
        }
        nodes
    };
    let mut ends: Vec<usize> = adj.iter().filter(|(_, v)| v.len() == 1).map(|(&k, _)| k).collect();
    ends.sort_unstable();
    for e in ends {
        if adj[&e].iter().all(|&s| used[s]) {
            continue;
        }
        out.push((walk(e, &mut used), false));
    }
    let mut rest: Vec<usize> = (0..segments.len()).filter(|&s| !used[s]).collect();
    rest.sort_unstable();
    for s in rest {
        if used[s] {
            continue;
        }
        let nodes = walk(segments[s].0, &mut used);
        let closed = nodes.len() > 2 && nodes.first() == nodes.last();
        out.push((nodes, closed));
    }
    out
}

fn build_branch(points: Vec<([f64; 2], f64)>, start: Option<usize>, end: Option<usize>, closed: bool) -> SingularBranch {
    let mut t = 0.0;
    let mut samples = Vec::with_capacity(points.len());
    for (k, (p, lam)) in points.iter().enumerate() {
        if k > 0 {
            t += dist(points[k - 1].0, *p);
        }
        samples.push(BranchSample {
            t,
            point: *p,
            lambda: *lam,
            eta: None,
        });
    }
    SingularBranch {
        id: 0,
        samples,
        start,
        end,
        closed,
        oriented: false,
    }
}

fn lex_less(a: [f64; 2], b: [f64; 2]) -> bool {
    (a[0], a[1]) < (b[0], b[1])
}

/// Traces `{lambda = 0}` over `rect`. Branches meeting at a crossing are
/// split there and start at it (`t = 0`); other open branches start at their
/// lexicographically smaller end. Isolated zeros come back in `critical`.
pub fn trace_singular_set(germ: &FrontGerm, rect: Rect, opts: &TraceOptions) -> Result<SingularSet, SingularError> {
    if germ.dim() != 2 {
        return Err(SingularError::Dim(germ.dim()));
    }
    if opts.grid < 2 {
        return Err(SingularError::Precondition("grid needs at least 2 cells per side".into()));
    }
    let n = opts.grid;
    let auto = matches!(germ.normal(), NormalSpec::Auto);
    let mut grid = Grid {
        germ,
        rect,
        n,
        auto,
        values: Vec::new(),
    };
    grid.values = map_indices(opts.exec, (n + 1) * (n + 1), |k| sample(germ, grid.point(k % (n + 1), k / (n + 1)), None));
    grid.align();
    let cell = grid.cell_size();

    // Rank-zero points.
    let seeds = grid.critical_seeds();
    let found = map_indices(opts.exec, seeds.len(), |k| {
        rank_zero_point(germ, seeds[k], 3.0 * cell).and_then(|p| classify_critical(germ, p))
    });
    let mut critical: Vec<CriticalZero> = Vec::new();
    for c in found.into_iter().flatten() {
        if rect.contains(c.point) && critical.iter().all(|d| dist(d.point, c.point) > 2.0 * cell) {
            critical.push(c);
        }
    }
    critical.sort_by(|a, b| (a.point[0], a.point[1]).partial_cmp(&(b.point[0], b.point[1])).expect("finite"));

    // Cell segments, with everything close to a rank-zero point removed.
    let radius = CUT_CELLS * cell;
    let mut segments = grid.segments();
    let mut keys: Vec<usize> = segments.iter().flat_map(|&(a, b)| [a, b]).collect();
    keys.sort_unstable();
    keys.dedup();
    let roots: HashMap<usize, ([f64; 2], f64)> = keys
        .iter()
        .zip(map_indices(opts.exec, keys.len(), |k| grid.refine(keys[k], opts.trace_tol)))
        .filter_map(|(&k, r)| r.map(|r| (k, r)))
        .collect();
    let near_critical = |p: [f64; 2]| critical.iter().any(|c| dist(c.point, p) < radius);
    segments.retain(|&(a, b)| match (roots.get(&a), roots.get(&b)) {
        (Some(pa), Some(pb)) => !near_critical(pa.0) && !near_critical(pb.0),
        _ => false,
    });

    let attach = |p: [f64; 2]| -> Option<usize> {
        critical
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind != CriticalKind::Isolated && dist(c.point, p) <= radius + 2.0 * cell)
            .min_by(|a, b| dist(a.1.point, p).total_cmp(&dist(b.1.point, p)))
            .map(|(i, _)| i)
    };

    let mut branches = Vec::new();
    for (nodes, closed) in chains(&segments) {
        let mut pts: Vec<([f64; 2], f64)> = nodes.iter().map(|k| roots[k]).collect();
        pts.dedup_by(|a, b| a.0 == b.0);
        if pts.len() < 2 {
            continue;
        }
        if closed {
            let m = (0..pts.len() - 1)
                .min_by(|&a, &b| (pts[a].0[0], pts[a].0[1]).partial_cmp(&(pts[b].0[0], pts[b].0[1])).expect("finite"))
                .expect("nonempty");
            pts.pop();
            pts.rotate_left(m);
            pts.push(pts[0]);
            branches.push(build_branch(pts, None, None, true));
            continue;
        }
        let (mut s, mut e) = (attach(pts[0].0), attach(pts[pts.len() - 1].0));
        let reverse = match (s, e) {
            (None, Some(_)) => true,
            (None, None) => lex_less(pts[pts.len() - 1].0, pts[0].0),
            _ => false,
        };
        if reverse {
            pts.reverse();
            std::mem::swap(&mut s, &mut e);
        }
        if let Some(c) = s {
            pts.insert(0, (critical[c].point, critical[c].lambda.abs()));
        }
        if let Some(c) = e {
            pts.push((critical[c].point, critical[c].lambda.abs()));
        }
        branches.push(build_branch(pts, s, e, false));
    }

    let key = |b: &SingularBranch| -> (usize, f64, f64, f64) {
        let p = b.samples[0].point;
        match b.start {
            Some(c) => (c, b.start_direction(radius).map_or(0.0, angle), 0.0, 0.0),
            None => (usize::MAX, 0.0, p[0], p[1]),
        }
    };
    branches.sort_by(|a, b| key(a).partial_cmp(&key(b)).expect("finite"));
    for (id, b) in branches.iter_mut().enumerate() {
        b.id = id;
    }
    Ok(SingularSet {
        rect,
        grid: n,
        branches,
        critical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::CatalogEntry;

    fn opts(grid: usize) -> TraceOptions {
        TraceOptions {
            grid,
            ..Default::default()
        }
    }

    fn angle_deg(d: [f64; 2]) -> f64 {
        angle(d).to_degrees()
    }

    #[test]
    fn d4_plus_has_four_branches_through_the_origin() {
        let g = CatalogEntry::D4Plus.germ();
        let s = trace_singular_set(&g, Rect::square(0.3), &opts(120)).unwrap();
        assert_eq!(s.critical.len(), 1);
        assert_eq!(s.critical[0].kind, CriticalKind::Crossing);
        assert!(dist(s.critical[0].point, [0.0, 0.0]) < 1e-12);
        assert_eq!(s.branches.len(), 4, "{:?}", s.branches.iter().map(|b| b.samples.len()).collect::<Vec<_>>());
        // u = +-sqrt(3) v: rays at 30, 150, 210 and 330 degrees.
        let expected = [30.0, 150.0, 210.0, 330.0];
        for (b, e) in s.branches.iter().zip(expected) {
            assert_eq!(b.start, Some(0));
            let a = angle_deg(b.start_direction(0.02).unwrap());
            assert!((a - e).abs() < 0.5, "{a} vs {e}");
        }
        for d in &s.critical[0].directions {
            let a = angle_deg(*d);
            assert!(expected.iter().any(|e| (a - e).abs() < 1e-6), "{a}");
        }
        for b in &s.branches {
            assert!(b.samples.iter().all(|x| x.lambda <= 1e-10));
        }
    }

    #[test]
    fn d4_minus_has_an_isolated_point() {
        let g = CatalogEntry::D4Minus.germ();
        let s = trace_singular_set(&g, Rect::square(0.3), &opts(100)).unwrap();
        assert!(s.branches.is_empty());
        assert_eq!(s.critical.len(), 1);
        assert_eq!(s.critical[0].kind, CriticalKind::Isolated);
    }

    #[test]
    fn cuspidal_edge_is_one_line() {
        let g = CatalogEntry::CuspidalEdge.germ();
        let s = trace_singular_set(&g, Rect::new(-0.3, 0.3, -0.2, 0.25).unwrap(), &opts(40)).unwrap();
        assert!(s.critical.is_empty());
        assert_eq!(s.branches.len(), 1);
        let b = &s.branches[0];
        assert!(b.samples.iter().all(|x| x.point[1].abs() < 1e-10));
        assert!(b.samples[0].point[0] < b.samples.last().unwrap().point[0]);
        assert!((b.length() - 0.6).abs() < 1e-9);
    }

    #[test]
    fn automatic_normal_traces_like_the_explicit_one() {
        let g = CatalogEntry::CurvedD4Plus.germ();
        let s = trace_singular_set(&g, Rect::square(0.2), &opts(80)).unwrap();
        assert_eq!(s.branches.len(), 4);
        for b in &s.branches {
            for x in &b.samples {
                let [u, v] = x.point;
                // The singular set is exactly u^2 = 3 v^2.
                assert!((u * u - 3.0 * v * v).abs() < 1e-9, "{u} {v}");
            }
        }
    }

    #[test]
    fn chains_split_open_and_closed() {
        let c = chains(&[(1, 2), (2, 3), (10, 11), (11, 12), (12, 10)]);
        assert_eq!(c.len(), 2);
        assert_eq!(c[0], (vec![1, 2, 3], false));
        assert!(c[1].1);
        assert_eq!(c[1].0.len(), 4);
    }

    #[test]
    fn immersions_have_no_singular_set() {
        let g = FrontGerm::parse(2, &["u", "v", "(u^2+v^2-1/100)^2"], None, "").unwrap();
        let s = trace_singular_set(&g, Rect::square(0.3), &opts(30)).unwrap();
        assert!(s.branches.is_empty() && s.critical.is_empty());
    }

    #[test]
    fn sequential_matches_parallel() {
        let g = CatalogEntry::D4Plus.germ();
        let a = trace_singular_set(&g, Rect::square(0.3), &TraceOptions { grid: 50, exec: Execution::Sequential, ..Default::default() }).unwrap();
        let b = trace_singular_set(&g, Rect::square(0.3), &TraceOptions { grid: 50, exec: Execution::Parallel, ..Default::default() }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn null_directions_of_a_saddle() {
        let d = null_directions(1.0, 0.0, -1.0);
        let a: Vec<f64> = d.iter().map(|x| angle_deg(*x).round()).collect();
        assert_eq!(a, vec![45.0, 135.0, 225.0, 315.0]);
        assert!(null_directions(1.0, 0.0, 1.0).is_empty());
    }
}
