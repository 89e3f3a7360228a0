//! Geodesics, distances, ball volumes and growth exponents.
//!
//! Distances are produced by an upper-bound estimator: every candidate is the
//! measured length of a feasible curve. Candidate curves come from straight
//! and piecewise coordinate paths (with height detours for the solvable
//! families), are improved by local curve shortening, and optionally polished
//! by geodesic shooting with derivative-free refinement of the initial
//! velocity. Exact closed forms are used where the tensor is constant over
//! the chart (flat groups, the SE2 covers) and for the round metrics on the
//! quaternion charts; everything curved goes through the optimizer so the
//! calibration suites test the real path machinery.

use nalgebra::{Matrix2, Vector2, Vector3};
use rand::Rng;
use serde::Serialize;

use crate::catalog::{Family, GroupElement, GroupSpec};
use crate::diffgeo;
use crate::error::{GeomError, Result};
use crate::exec;
use crate::invariants::h2_distance_uv;
use crate::metric::{Kernel, Metric};
use crate::rng::{self, stream_rng};

const DEFAULT_ESCAPE_BOUND: f64 = 1e9;
/// Shooting is skipped beyond this length; endpoint sensitivity makes the
/// refinement useless there while relaxation still converges.
const SHOOT_MAX_LEN: f64 = 12.0;
const BOUNDARY_ACCEPT_RATE: f64 = 1e-3;
const BOX_EXPANSION_LIMIT: usize = 48;

// ---------------------------------------------------------------------------
// Curves
// ---------------------------------------------------------------------------

/// A sampled path in a chart, with strictly increasing parameter values
/// (constant curves are parametrized over the unit interval).
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    samples: Vec<GroupElement>,
    times: Vec<f64>,
}

impl Curve {
    pub fn new(samples: Vec<GroupElement>, times: Vec<f64>) -> Result<Self> {
        if samples.len() < 2 || samples.len() != times.len() {
            return Err(GeomError::BadElement(
                "curve needs at least two samples with matching times".into(),
            ));
        }
        let constant = samples.iter().all(|s| s == &samples[0]);
        if !constant && times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(GeomError::BadElement("curve times must increase".into()));
        }
        Ok(Curve { samples, times })
    }

    /// Parametrize by sample index.
    pub fn from_points(samples: Vec<GroupElement>) -> Result<Self> {
        let times = (0..samples.len()).map(|i| i as f64).collect();
        Self::new(samples, times)
    }

    pub fn samples(&self) -> &[GroupElement] {
        &self.samples
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn start(&self) -> &GroupElement {
        &self.samples[0]
    }

    pub fn end(&self) -> &GroupElement {
        self.samples.last().unwrap()
    }
}

// ---------------------------------------------------------------------------
// Budgets
// ---------------------------------------------------------------------------

/// Search budget for the distance estimator.
#[derive(Debug, Clone)]
pub struct DistanceBudget {
    /// Random shooting restarts after the relaxation phase.
    pub restarts: usize,
    /// Curve-shortening sweeps per kept candidate.
    pub relax_sweeps: usize,
    /// Cap on polyline nodes.
    pub max_nodes: usize,
    /// Nodes allocated per unit of estimated length.
    pub nodes_per_unit: f64,
    /// Coordinates beyond this bound abort an integration.
    pub escape_bound: f64,
    /// Enable the shooting polish.
    pub shooting: bool,
    pub seed: u64,
}

impl Default for DistanceBudget {
    fn default() -> Self {
        DistanceBudget {
            restarts: 16,
            relax_sweeps: 90,
            max_nodes: 96,
            nodes_per_unit: 6.0,
            escape_bound: DEFAULT_ESCAPE_BOUND,
            shooting: true,
            seed: 0,
        }
    }
}

impl DistanceBudget {
    /// Cheap settings for Monte Carlo inner loops.
    pub fn fast() -> Self {
        DistanceBudget {
            restarts: 0,
            relax_sweeps: 36,
            max_nodes: 40,
            nodes_per_unit: 3.0,
            shooting: false,
            ..Self::default()
        }
    }

    /// Extra accuracy for difference-of-distance statistics.
    pub fn high() -> Self {
        DistanceBudget {
            restarts: 16,
            relax_sweeps: 160,
            max_nodes: 192,
            nodes_per_unit: 8.0,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn nodes_for(&self, len: f64) -> usize {
        let n = (8.0 + self.nodes_per_unit * len).ceil() as usize;
        n.clamp(9, self.max_nodes.max(9))
    }
}

// ---------------------------------------------------------------------------
// Closed-form helpers
// ---------------------------------------------------------------------------

/// Distance in the plane with metric e^{-2 mu z} dx^2 + dz^2 (flat for mu=0).
pub(crate) fn slope_plane_distance(mu: f64, a: (f64, f64), b: (f64, f64)) -> f64 {
    if mu.abs() < 1e-12 {
        let (dx, dz) = (b.0 - a.0, b.1 - a.1);
        return (dx * dx + dz * dz).sqrt();
    }
    let m = mu.abs();
    let u1 = m * a.0;
    let u2 = m * b.0;
    let w1 = mu * a.1;
    let w2 = mu * b.1;
    h2_distance_uv((u1, w1), (u2, w2)) / m
}

// ---------------------------------------------------------------------------
// Metric distance API
// ---------------------------------------------------------------------------

impl Metric {
    /// Best validated upper bound for the Riemannian distance, evaluated in
    /// both directions and symmetrized by taking the minimum.
    pub fn distance(&self, p: &GroupElement, q: &GroupElement, budget: &DistanceBudget) -> Result<f64> {
        let d1 = self.distance_one_way(p, q, budget)?;
        let d2 = self.distance_one_way(q, p, budget)?;
        Ok(d1.min(d2))
    }

    /// One-directional estimate; the public `distance` symmetrizes.
    pub(crate) fn distance_one_way(
        &self,
        p: &GroupElement,
        q: &GroupElement,
        budget: &DistanceBudget,
    ) -> Result<f64> {
        let chart = self.spec().chart()?;
        if p.dim() != chart.dim || q.dim() != chart.dim {
            return Err(GeomError::BadElement("dimension mismatch".into()));
        }
        if chart.quaternion {
            return self.round_distance(p, q);
        }
        // Exact when the tensor is constant over the chart.
        if self.kernel().is_flat_const() {
            return Ok(self.flat_distance(p, q)?);
        }
        match chart.dim {
            1 => self.flat_distance(p, q),
            2 => self.distance_dim2(p, q, budget),
            _ => self.distance_dim3(p, q, budget),
        }
    }

    /// Round-metric distance on the quaternion charts; requires Q = c*I.
    fn round_distance(&self, p: &GroupElement, q: &GroupElement) -> Result<f64> {
        let c = round_scale(self)?;
        let (a, b) = (p.raw(), q.raw());
        let mut dot: f64 = (0..4).map(|i| a[i] * b[i]).sum();
        if self.spec().family() == Family::So3 {
            dot = dot.abs();
        }
        Ok(c.sqrt() * dot.clamp(-1.0, 1.0).acos())
    }

    /// Exact distance for constant tensors, minimized over lattice translates
    /// of the periodic coordinates.
    fn flat_distance(&self, p: &GroupElement, q: &GroupElement) -> Result<f64> {
        let chart = self.spec().chart()?;
        let g = self.tensor_at(p)?.g;
        let delta = self.spec().wrap_delta(p, q)?;
        let periodic: Vec<usize> = (0..chart.dim).filter(|&i| chart.periods[i].is_some()).collect();
        let mut best = f64::INFINITY;
        let combos = 5usize.pow(periodic.len() as u32);
        for combo in 0..combos {
            let mut d = Vector3::zeros();
            for (i, dv) in delta.iter().enumerate() {
                d[i] = *dv;
            }
            let mut rem = combo;
            for &i in &periodic {
                let m = (rem % 5) as i64 - 2;
                rem /= 5;
                d[i] += m as f64 * chart.periods[i].unwrap();
            }
            let mut s = 0.0;
            for i in 0..chart.dim {
                for j in 0..chart.dim {
                    s += d[i] * g[(i, j)] * d[j];
                }
            }
            best = best.min(s.max(0.0).sqrt());
        }
        Ok(best)
    }

    fn distance_dim2(&self, p: &GroupElement, q: &GroupElement, budget: &DistanceBudget) -> Result<f64> {
        // Aff+(R) with diagonal Q is a rescaled hyperbolic plane.
        if let Kernel::Aff { q: qm } = self.kernel() {
            if qm.m12.abs() < 1e-13 {
                let s = (qm.m11 / qm.m22).sqrt();
                let scale = qm.m22.sqrt();
                let a = p.coords();
                let b = q.coords();
                return Ok(scale
                    * slope_plane_distance(1.0, (s * a[0], a[1]), (s * b[0], b[1])));
            }
        }
        let kern = self.kernel().clone();
        let g = move |x: &Vector2<f64>| kern.g2(x);
        let a = Vector2::new(p.coords()[0], p.coords()[1]);
        let b = Vector2::new(q.coords()[0], q.coords()[1]);
        let mut best = f64::INFINITY;
        // straight path plus single-height detours
        let mut cands: Vec<Vec<Vector2<f64>>> = vec![vec![a, b]];
        let range = 1.0 + (1.0 + (a[0] - b[0]).abs()).ln();
        for i in -4i32..=4 {
            let zs = a[1].min(b[1]) - range + (i + 4) as f64 / 8.0 * ((a[1] - b[1]).abs() + 2.0 * range);
            cands.push(vec![a, Vector2::new(a[0], zs), Vector2::new(b[0], zs), b]);
        }
        for cand in cands {
            let mut nodes = densify2(&cand, 17);
            let quick = diffgeo::path_length(&g, &nodes);
            if !quick.is_finite() || quick > best * 1.6 {
                continue;
            }
            let m = budget.nodes_for(quick);
            nodes = diffgeo::resample_uniform(&g, &nodes, m);
            let len = diffgeo::relax_polyline(&g, &mut nodes, budget.relax_sweeps, budget.escape_bound);
            if len.is_finite() {
                best = best.min(len);
            }
        }
        if !best.is_finite() {
            return Err(GeomError::NoPathFound);
        }
        Ok(best)
    }

    fn distance_dim3(&self, p: &GroupElement, q: &GroupElement, budget: &DistanceBudget) -> Result<f64> {
        let chart = self.spec().chart()?;
        let a = Vector3::new(p.raw()[0], p.raw()[1], p.raw()[2]);
        let delta = self.spec().wrap_delta(p, q)?;
        let base = Vector3::new(a[0] + delta[0], a[1] + delta[1], a[2] + delta[2]);
        // Lift the target through nearby deck transformations and keep the
        // best candidate; format of the quotients here is a single periodic
        // coordinate at most.
        let mut lifts = vec![base];
        for i in 0..3 {
            if let Some(t) = chart.periods[i] {
                for m in [-2i32, -1, 1, 2] {
                    let mut b = base;
                    b[i] += m as f64 * t;
                    lifts.push(b);
                }
            }
        }
        let mut best = f64::INFINITY;
        for b in lifts {
            if self.lower_bound3(&a, &b) >= best {
                continue;
            }
            let est = self.estimate_upper3(&a, &b, budget, best)?;
            best = best.min(est);
        }
        if !best.is_finite() {
            return Err(GeomError::NoPathFound);
        }
        Ok(best)
    }

    /// True lower bound for the distance between cover-coordinate points.
    pub(crate) fn lower_bound3(&self, a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
        let qm = self.frame_metric().matrix();
        let lam_min = qm
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |m, &v| m.min(v))
            .max(0.0);
        let s = lam_min.sqrt();
        match self.kernel() {
            Kernel::Const { .. } => {
                let d = b - a;
                let g = self.kernel().g3(a);
                (d.transpose() * g * d)[(0, 0)].max(0.0).sqrt()
            }
            Kernel::Semi { a: am, .. } => {
                let mut lb = s * (b[2] - a[2]).abs();
                if am.m12 == 0.0 && am.m21 == 0.0 {
                    let f1 = slope_plane_distance(am.m11, (a[0], a[2]), (b[0], b[2]));
                    let f2 = slope_plane_distance(am.m22, (a[1], a[2]), (b[1], b[2]));
                    lb = lb.max(s * f1.max(f2));
                }
                lb
            }
            Kernel::Heis { .. } => {
                let dx = b[0] - a[0];
                let dy = b[1] - a[1];
                s * (dx * dx + dy * dy).sqrt()
            }
            _ => 0.0,
        }
    }

    /// Quick feasible-path upper bound (straight chord, and corner routes for
    /// diagonal semidirect actions with Q = I).
    pub(crate) fn upper_bound3(&self, a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
        let kern = self.kernel().clone();
        let g = move |x: &Vector3<f64>| kern.g3(x);
        let nodes = densify3(&[*a, *b], 9);
        let mut ub = diffgeo::path_length(&g, &nodes);
        if let Kernel::Semi { a: am, q, .. } = self.kernel() {
            if am.m12 == 0.0 && am.m21 == 0.0 && is_identity3(q) {
                let f1 = |p1: (f64, f64), p2: (f64, f64)| slope_plane_distance(am.m11, p1, p2);
                let f2 = |p1: (f64, f64), p2: (f64, f64)| slope_plane_distance(am.m22, p1, p2);
                let via_x = f1((a[0], a[2]), (b[0], b[2])) + f2((a[1], b[2]), (b[1], b[2]));
                let via_y = f2((a[1], a[2]), (b[1], b[2])) + f1((a[0], b[2]), (b[0], b[2]));
                ub = ub.min(via_x).min(via_y);
            }
        }
        ub
    }

    /// Upper-bound estimate between cover-coordinate points. `cutoff` lets
    /// the caller skip work once a better bound is known.
    pub(crate) fn estimate_upper3(
        &self,
        a: &Vector3<f64>,
        b: &Vector3<f64>,
        budget: &DistanceBudget,
        cutoff: f64,
    ) -> Result<f64> {
        if (b - a).norm() < 1e-15 {
            return Ok(0.0);
        }
        let kern = self.kernel().clone();
        let g = move |x: &Vector3<f64>| kern.g3(x);
        let quick_ub = self.upper_bound3(a, b);
        let mut best = quick_ub;
        let mut best_nodes: Option<Vec<Vector3<f64>>> = None;

        let mut scored: Vec<(f64, Vec<Vector3<f64>>)> = Vec::new();
        for cand in self.candidate_paths3(a, b) {
            let nodes = densify3(&cand, 17);
            let len = diffgeo::path_length(&g, &nodes);
            if len.is_finite() {
                scored.push((len, nodes));
            }
        }
        scored.sort_by(|x, y| x.0.total_cmp(&y.0));
        scored.truncate(3);
        for (quick, nodes) in scored {
            if quick > 2.0 * best.min(cutoff) + 1.0 {
                continue;
            }
            let m = budget.nodes_for(quick.min(best));
            let mut nodes = diffgeo::resample_uniform(&g, &nodes, m);
            let len =
                diffgeo::relax_polyline(&g, &mut nodes, budget.relax_sweeps, budget.escape_bound);
            if len.is_finite() && len < best {
                best = len;
                best_nodes = Some(nodes);
            }
        }
        if budget.shooting && best <= SHOOT_MAX_LEN {
            if let Some(refined) = self.shoot_refine3(&g, a, b, best, best_nodes.as_deref(), budget) {
                best = best.min(refined);
            }
        }
        if !best.is_finite() {
            return Err(GeomError::NoPathFound);
        }
        Ok(best)
    }

    /// Initial feasible polylines: the chord, axis-ordered corner paths, and
    /// height-detour paths suited to the exponential-action families.
    fn candidate_paths3(&self, a: &Vector3<f64>, b: &Vector3<f64>) -> Vec<Vec<Vector3<f64>>> {
        let mut out = vec![vec![*a, *b]];
        // corner paths over the six axis orders
        for order in [[0, 1, 2], [2, 0, 1], [2, 1, 0], [0, 2, 1], [1, 0, 2], [1, 2, 0]] {
            let mut cur = *a;
            let mut path = vec![*a];
            for axis in order {
                cur[axis] = b[axis];
                path.push(cur);
            }
            out.push(path);
        }
        match self.kernel() {
            Kernel::Semi { .. } => {
                let span = (a[0] - b[0]).abs().max((a[1] - b[1]).abs());
                let reach = (1.0 + span).ln() + 2.0;
                let lo = a[2].min(b[2]) - reach;
                let hi = a[2].max(b[2]) + reach;
                for i in 0..9 {
                    let zs = lo + (hi - lo) * i as f64 / 8.0;
                    out.push(vec![
                        *a,
                        Vector3::new(a[0], a[1], zs),
                        Vector3::new(b[0], b[1], zs),
                        *b,
                    ]);
                }
                // split heights: move x at za, then y at zb
                for i in 0..5 {
                    let za = lo + (hi - lo) * i as f64 / 4.0;
                    for j in 0..5 {
                        let zb = lo + (hi - lo) * j as f64 / 4.0;
                        out.push(vec![
                            *a,
                            Vector3::new(a[0], a[1], za),
                            Vector3::new(b[0], a[1], za),
                            Vector3::new(b[0], a[1], zb),
                            Vector3::new(b[0], b[1], zb),
                            *b,
                        ]);
                    }
                }
            }
            Kernel::Heis { .. } => {
                // Loop detours: climbing the center needs enclosed area, and
                // the straight vertical line is a saddle of the length
                // functional, so seed circular paths of both orientations.
                let dz = b[2] - a[2];
                let chord = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
                let r0 = (dz.abs() * std::f64::consts::FRAC_PI_4).sqrt() / std::f64::consts::PI;
                for rho in [r0.max(0.3), 2.0 * r0.max(0.3) + 0.5 * chord] {
                    for orient in [1.0, -1.0] {
                        let mid = Vector3::new(
                            0.5 * (a[0] + b[0]),
                            0.5 * (a[1] + b[1]),
                            0.0,
                        );
                        let mut path = vec![*a];
                        let turns = 8;
                        for k in 1..turns {
                            let ang = orient * 2.0 * std::f64::consts::PI * k as f64 / turns as f64;
                            let frac = k as f64 / turns as f64;
                            path.push(Vector3::new(
                                mid[0] + rho * ang.cos() - rho,
                                mid[1] + rho * ang.sin(),
                                a[2] + dz * frac,
                            ));
                        }
                        path.push(*b);
                        out.push(path);
                    }
                }
            }
            _ => {}
        }
        out
    }

    /// Shooting polish: refine the initial velocity with a compass search on
    /// the endpoint miss, then report the validated curve length (speed plus
    /// the short closing segment).
    fn shoot_refine3<G>(
        &self,
        g: &G,
        a: &Vector3<f64>,
        b: &Vector3<f64>,
        best_len: f64,
        best_nodes: Option<&[Vector3<f64>]>,
        budget: &DistanceBudget,
    ) -> Option<f64>
    where
        G: Fn(&Vector3<f64>) -> nalgebra::Matrix3<f64>,
    {
        let g0 = g(a);
        let speed_at_a = |v: &Vector3<f64>| (v.transpose() * g0 * v)[(0, 0)].max(0.0).sqrt();
        let steps = ((best_len * 10.0) as usize).clamp(48, 320);
        let evalv = |v: &Vector3<f64>| -> f64 {
            match diffgeo::geodesic_rk4(g, *a, *v, 1.0, steps, budget.escape_bound) {
                Ok(path) => {
                    let (end, _) = path.last().unwrap();
                    diffgeo::segment_length(g, end, b)
                }
                Err(_) => f64::INFINITY,
            }
        };
        let validated = |v: &Vector3<f64>| -> f64 {
            match diffgeo::geodesic_rk4(g, *a, *v, 1.0, steps, budget.escape_bound) {
                Ok(path) => {
                    let (end, _) = path.last().unwrap();
                    let closing = densify3(&[*end, *b], 5);
                    speed_at_a(v) + diffgeo::path_length(g, &closing)
                }
                Err(_) => f64::INFINITY,
            }
        };

        let mut seeds: Vec<Vector3<f64>> = Vec::new();
        if let Some(nodes) = best_nodes {
            if nodes.len() >= 2 {
                let dir = nodes[1] - nodes[0];
                let sp = speed_at_a(&dir);
                if sp > 1e-12 {
                    seeds.push(dir * (best_len / sp));
                }
            }
        }
        let pair_seed = rng::derive(budget.seed, rng::stream::SHOOTING, hash_pair(a, b));
        let mut r = stream_rng(pair_seed, rng::stream::SHOOTING, 0);
        for _ in 0..budget.restarts {
            let mut v = Vector3::new(
                r.gen_range(-1.0..1.0),
                r.gen_range(-1.0..1.0),
                r.gen_range(-1.0..1.0),
            );
            if v.norm() < 1e-6 {
                continue;
            }
            let sp = speed_at_a(&v);
            if sp > 1e-12 {
                v *= best_len / sp;
                seeds.push(v);
            }
        }

        let mut best_out = f64::INFINITY;
        for (si, seed) in seeds.into_iter().enumerate() {
            let iters = if si == 0 { 140 } else { 48 };
            let mut v = seed;
            let mut miss = evalv(&v);
            let mut step = 0.08 * v.norm().max(1e-9);
            let floor = 1e-7 * v.norm().max(1e-9);
            let mut it = 0;
            while it < iters && step > floor {
                let mut moved = false;
                for axis in 0..3 {
                    for sgn in [1.0, -1.0] {
                        let mut w = v;
                        w[axis] += sgn * step;
                        let m = evalv(&w);
                        if m < miss {
                            v = w;
                            miss = m;
                            moved = true;
                        }
                        it += 1;
                    }
                }
                step *= if moved { 1.4 } else { 0.5 };
            }
            if miss < 0.05 * best_len + 1e-6 {
                let cand = validated(&v);
                if cand.is_finite() {
                    best_out = best_out.min(cand);
                }
            }
        }
        best_out.is_finite().then_some(best_out)
    }
}

fn is_identity3(m: &nalgebra::Matrix3<f64>) -> bool {
    (m - nalgebra::Matrix3::identity()).abs().max() < 1e-12
}

fn round_scale(metric: &Metric) -> Result<f64> {
    let q = metric.frame_metric().matrix();
    let c = q[(0, 0)];
    let ok = (q - nalgebra::Matrix3::identity() * c).abs().max() < 1e-12 && c > 0.0;
    if !ok {
        return Err(GeomError::UnsupportedChart(
            "quaternion-chart distances support Q = c*I (round metrics) only".into(),
        ));
    }
    Ok(c)
}

fn hash_pair(a: &Vector3<f64>, b: &Vector3<f64>) -> u64 {
    let mut h = 0u64;
    for v in a.iter().chain(b.iter()) {
        h = h.rotate_left(13) ^ v.to_bits();
    }
    h
}

fn densify3(way: &[Vector3<f64>], per_leg: usize) -> Vec<Vector3<f64>> {
    let mut out = Vec::new();
    for w in way.windows(2) {
        for i in 0..per_leg {
            let t = i as f64 / per_leg as f64;
            out.push(w[0] * (1.0 - t) + w[1] * t);
        }
    }
    out.push(*way.last().unwrap());
    out
}

fn densify2(way: &[Vector2<f64>], per_leg: usize) -> Vec<Vector2<f64>> {
    let mut out = Vec::new();
    for w in way.windows(2) {
        for i in 0..per_leg {
            let t = i as f64 / per_leg as f64;
            out.push(w[0] * (1.0 - t) + w[1] * t);
        }
    }
    out.push(*way.last().unwrap());
    out
}

// ---------------------------------------------------------------------------
// Geodesic shooting
// ---------------------------------------------------------------------------

impl Metric {
    /// Integrate the geodesic with initial point `p` and chart velocity `v`
    /// for time `t` with a fixed-step RK4. The metric speed is a constant of
    /// motion; integration errors keep it within about 1e-4 relative.
    pub fn geodesic_shoot(&self, p: &GroupElement, v: &[f64], t: f64, steps: usize) -> Result<Curve> {
        let chart = self.spec().chart()?;
        if steps < 8 {
            return Err(GeomError::BadElement("need at least 8 integration steps".into()));
        }
        if v.len() != chart.dim || p.dim() != chart.dim {
            return Err(GeomError::BadElement("velocity/chart dimension mismatch".into()));
        }
        if t == 0.0 || v.iter().all(|c| *c == 0.0) {
            return Curve::new(vec![*p, *p], vec![0.0, 1.0]);
        }
        if chart.quaternion {
            return self.quat_shoot(p, v, t, steps);
        }
        let samples: Vec<GroupElement> = match chart.dim {
            1 => {
                return Curve::new(
                    vec![*p, GroupElement::from_coords(&[p.coords()[0] + v[0] * t])],
                    vec![0.0, t],
                );
            }
            2 => {
                let kern = self.kernel().clone();
                let g = move |x: &Vector2<f64>| kern.g2(x);
                let states = diffgeo::geodesic_rk4(
                    &g,
                    Vector2::new(p.coords()[0], p.coords()[1]),
                    Vector2::new(v[0], v[1]),
                    t,
                    steps,
                    DEFAULT_ESCAPE_BOUND,
                )?;
                states
                    .iter()
                    .map(|(x, _)| self.spec().normalize_coords(&GroupElement::from_coords(&[x[0], x[1]])))
                    .collect::<Result<_>>()?
            }
            _ => {
                let kern = self.kernel().clone();
                let g = move |x: &Vector3<f64>| kern.g3(x);
                let states = diffgeo::geodesic_rk4(
                    &g,
                    Vector3::new(p.raw()[0], p.raw()[1], p.raw()[2]),
                    Vector3::new(v[0], v[1], v[2]),
                    t,
                    steps,
                    DEFAULT_ESCAPE_BOUND,
                )?;
                states
                    .iter()
                    .map(|(x, _)| {
                        self.spec()
                            .normalize_coords(&GroupElement::from_coords(&[x[0], x[1], x[2]]))
                    })
                    .collect::<Result<_>>()?
            }
        };
        let times = (0..=steps).map(|i| t * i as f64 / steps as f64).collect();
        Curve::new(samples, times)
    }

    /// Bi-invariant geodesics of the round metrics are one-parameter
    /// subgroups; Q must be c*I.
    fn quat_shoot(&self, p: &GroupElement, v: &[f64], t: f64, steps: usize) -> Result<Curve> {
        round_scale(self)?;
        let f = self.spec().frame_at(p)?;
        let mut w = [0.0f64; 3];
        for i in 0..3 {
            w[i] = (0..4).map(|r| f[(r, i)] * v[r]).sum();
        }
        let wn = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
        let mut samples = Vec::with_capacity(steps + 1);
        let mut times = Vec::with_capacity(steps + 1);
        for i in 0..=steps {
            let s = t * i as f64 / steps as f64;
            let ang = wn * s;
            let (c, sc) = (ang.cos(), if ang.abs() < 1e-12 { s } else { ang.sin() / wn });
            let e = [c, w[0] * sc, w[1] * sc, w[2] * sc];
            let q = crate::catalog::quat_mul(&p.raw(), &e);
            samples.push(self.spec().normalize_coords(&GroupElement::from_coords(&q))?);
            times.push(s);
        }
        Curve::new(samples, times)
    }
}

// ---------------------------------------------------------------------------
// Ball volumes and growth
// ---------------------------------------------------------------------------

/// Monte Carlo ball volume with its standard error.
#[derive(Debug, Clone, Serialize)]
pub struct BallVolume {
    pub radius: f64,
    pub volume: f64,
    pub std_err: f64,
    pub samples: usize,
    /// Box expansion hit its round limit; the estimate may clip the ball.
    pub truncated: bool,
}

/// Growth classification: polynomial of integral degree, or exponential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "type", content = "degree")]
pub enum GrowthType {
    Polynomial(u32),
    Exponential,
}

/// Measured volumes over a radius ladder plus the fitted growth law.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub radii: Vec<f64>,
    pub volumes: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Least-squares slope of log V against log r.
    pub exponent: f64,
    /// Residual sum of squares of the power-law fit.
    pub residual: f64,
    pub classification: GrowthType,
    pub seed: u64,
}

/// Table lookup: growth of each catalog family from its classification.
pub fn growth_type_algebraic(spec: &GroupSpec) -> Result<GrowthType> {
    let label = crate::classify::classify(spec)?;
    Ok(match label.id {
        1 => GrowthType::Polynomial(0),
        2 => GrowthType::Polynomial(1),
        3 => GrowthType::Polynomial(2),
        4 => GrowthType::Polynomial(3),
        5 => GrowthType::Polynomial(4),
        _ => GrowthType::Exponential,
    })
}

/// Sampling region for ball Monte Carlo.
enum Region {
    /// Product box; optional exponential tilt on the z coordinate matching
    /// the volume density of the semidirect families.
    Box { lo: [f64; 3], hi: [f64; 3], dim: usize, tilt: f64 },
    /// Per-height horizontal envelope for diagonal actions with Q = I: the
    /// factor-plane balls bound |x| and |y| as functions of z.
    Envelope { mu1: f64, mu2: f64, zlo: f64, zhi: f64, r: f64, tilt: f64 },
    /// Uniform sphere sampling for the round quaternion metrics.
    Sphere { total: f64 },
}

/// Half-width of the factor-plane ball of radius `r` at height `z`, slope mu.
fn envelope_half_width(mu: f64, r: f64, z: f64) -> f64 {
    if mu.abs() < 1e-12 {
        return (r * r - z * z).max(0.0).sqrt();
    }
    let m = mu.abs();
    let v = (mu * z).exp();
    let w2 = 2.0 * v * ((m * r).cosh() - 1.0) - (v - 1.0) * (v - 1.0);
    w2.max(0.0).sqrt() / m
}

impl Metric {
    fn ball_region(&self, r: f64, seed: u64) -> Result<(Region, bool)> {
        let chart = self.spec().chart()?;
        if chart.quaternion {
            let c = round_scale(self)?;
            let full = match self.spec().family() {
                Family::So3 => std::f64::consts::PI * std::f64::consts::PI,
                _ => 2.0 * std::f64::consts::PI * std::f64::consts::PI,
            };
            return Ok((Region::Sphere { total: c.powf(1.5) * full }, false));
        }
        let dim = chart.dim;
        let tilt = match self.kernel() {
            Kernel::Semi { a, .. } => a.m11 + a.m22,
            Kernel::Aff { .. } => 1.0,
            _ => 0.0,
        };
        if let Kernel::Semi { a, q, .. } = self.kernel() {
            if a.m12 == 0.0 && a.m21 == 0.0 && is_identity3(q) {
                return Ok((
                    Region::Envelope {
                        mu1: a.m11,
                        mu2: a.m22,
                        zlo: -r - 0.1,
                        zhi: r + 0.1,
                        r,
                        tilt,
                    },
                    false,
                ));
            }
        }
        // generic box with adaptive expansion
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        let g0 = self.tensor_at(&self.spec().identity())?.g;
        for i in 0..dim {
            match chart.periods[i] {
                Some(t) => {
                    lo[i] = 0.0;
                    hi[i] = t;
                }
                None => {
                    let w = r / g0[(i, i)].sqrt().max(1e-6);
                    lo[i] = -w.max(r);
                    hi[i] = w.max(r);
                }
            }
        }
        if matches!(self.kernel(), Kernel::Heis { .. }) && chart.periods[2].is_none() {
            // center reach grows quadratically
            let zr = r * r / std::f64::consts::PI + r;
            lo[2] = -zr;
            hi[2] = zr;
        }
        let budget = DistanceBudget::fast().with_seed(seed);
        let origin = self.spec().identity();
        let mut truncated = false;
        for round in 0..BOX_EXPANSION_LIMIT {
            let mut grew = false;
            for i in 0..dim {
                if chart.periods[i].is_some() {
                    continue;
                }
                for (side, bound) in [(0usize, lo[i]), (1, hi[i])] {
                    let probes = 48;
                    let hits = exec::map_indexed(probes, |k| {
                        let mut rr = stream_rng(
                            seed,
                            rng::stream::BALL_BOX,
                            (round * 1000 + i * 100 + side * 50 + k) as u64,
                        );
                        let mut c = [0.0f64; 3];
                        for j in 0..dim {
                            c[j] = rr.gen_range(lo[j]..hi[j]);
                        }
                        c[i] = bound;
                        let p = GroupElement::from_coords(&c[..dim]);
                        let p = self.spec().normalize_coords(&p).unwrap();
                        self.point_within(&origin, &p, r, &budget)
                    });
                    let rate = hits.iter().filter(|h| **h).count() as f64 / probes as f64;
                    if rate >= BOUNDARY_ACCEPT_RATE {
                        if side == 0 {
                            lo[i] *= 1.6;
                        } else {
                            hi[i] *= 1.6;
                        }
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
            if round + 1 == BOX_EXPANSION_LIMIT {
                truncated = true;
            }
        }
        Ok((Region::Box { lo, hi, dim, tilt }, truncated))
    }

    /// Is d(origin, p) <= r? Bounds first, optimizer only on the shell.
    fn point_within(
        &self,
        origin: &GroupElement,
        p: &GroupElement,
        r: f64,
        budget: &DistanceBudget,
    ) -> bool {
        if self.kernel().is_flat_const() || self.spec().chart().map(|c| c.quaternion).unwrap_or(false)
        {
            return self
                .distance_one_way(origin, p, budget)
                .map(|d| d <= r)
                .unwrap_or(false);
        }
        let chart = self.spec().chart().unwrap();
        if chart.dim == 2 {
            return self
                .distance_one_way(origin, p, budget)
                .map(|d| d <= r)
                .unwrap_or(false);
        }
        let a = Vector3::new(origin.raw()[0], origin.raw()[1], origin.raw()[2]);
        let delta = self.spec().wrap_delta(origin, p).unwrap();
        let mut lifts = vec![Vector3::new(a[0] + delta[0], a[1] + delta[1], a[2] + delta[2])];
        for i in 0..3 {
            if let Some(t) = chart.periods[i] {
                for m in [-1.0, 1.0] {
                    let mut b = lifts[0];
                    b[i] += m * t;
                    lifts.push(b);
                }
            }
        }
        let mut best_lb = f64::INFINITY;
        for b in &lifts {
            if self.upper_bound3(&a, b) <= r {
                return true;
            }
            best_lb = best_lb.min(self.lower_bound3(&a, b));
        }
        if best_lb > r {
            return false;
        }
        for b in &lifts {
            if self.lower_bound3(&a, b) > r {
                continue;
            }
            if let Ok(d) = self.estimate_upper3(&a, b, budget, r * 1.5) {
                if d <= r {
                    return true;
                }
            }
        }
        false
    }

    /// Monte Carlo estimate of the Riemannian volume of the ball of radius
    /// `r` about the identity.
    pub fn ball_volume(&self, r: f64, samples: usize, seed: u64) -> Result<BallVolume> {
        if !(r > 0.0) {
            return Err(GeomError::BadElement("radius must be positive".into()));
        }
        let (region, truncated) = self.ball_region(r, seed)?;
        let (volume, std_err) = self.mc_ball(&region, &[r], samples, seed)?.pop().unwrap();
        Ok(BallVolume { radius: r, volume, std_err, samples, truncated })
    }

    /// Shared Monte Carlo engine: one sample set, acceptance tested at every
    /// radius (so volumes are monotone in r by construction).
    fn mc_ball(
        &self,
        region: &Region,
        radii: &[f64],
        samples: usize,
        seed: u64,
    ) -> Result<Vec<(f64, f64)>> {
        let origin = self.spec().identity();
        let budget = DistanceBudget::fast().with_seed(seed);
        let chart = self.spec().chart()?;
        let r_max = radii.iter().cloned().fold(0.0f64, f64::max);

        // weight per accepted sample, and the sampled point
        let draw = |k: usize| -> (f64, Option<GroupElement>) {
            let mut rr = stream_rng(seed, rng::stream::BALL_VOLUME, k as u64);
            match region {
                Region::Sphere { total } => {
                    let mut q = [0.0f64; 4];
                    loop {
                        let mut n2 = 0.0;
                        for v in q.iter_mut() {
                            *v = rr.gen_range(-1.0..1.0);
                            n2 += *v * *v;
                        }
                        if n2 > 1e-6 && n2 < 1.0 {
                            break;
                        }
                    }
                    let p = GroupElement::from_coords(&q);
                    (*total, self.spec().normalize_coords(&p).ok())
                }
                Region::Box { lo, hi, dim, tilt } => {
                    // The height coordinate is last in every chart here. With
                    // |tr A| > 0 the density is exp(-tr*z); sampling z from
                    // that tilt makes weight*density constant in z.
                    let zi = *dim - 1;
                    let mut c = [0.0f64; 3];
                    let mut weight = 1.0;
                    for i in 0..*dim {
                        if i == zi && tilt.abs() > 0.1 {
                            let t = *tilt;
                            let (a, b) = (lo[zi], hi[zi]);
                            let za = (-t * a).exp();
                            let zb = (-t * b).exp();
                            let u: f64 = rr.gen_range(0.0..1.0);
                            let ez = za + (zb - za) * u;
                            c[zi] = (-(ez.ln()) / t).clamp(a, b);
                            // Z / pdf(z) = Z * e^{t z} with Z the tilt integral
                            weight *= (za - zb) / t * (t * c[zi]).exp();
                        } else {
                            c[i] = rr.gen_range(lo[i]..hi[i]);
                            weight *= hi[i] - lo[i];
                        }
                    }
                    let p = GroupElement::from_coords(&c[..*dim]);
                    let dens = self.volume_density(&p).unwrap_or(0.0);
                    (weight * dens, self.spec().normalize_coords(&p).ok())
                }
                Region::Envelope { mu1, mu2, zlo, zhi, r, tilt } => {
                    let t = *tilt;
                    let (a, b) = (*zlo, *zhi);
                    let z = if t.abs() > 0.1 {
                        let za = (-t * a).exp();
                        let zb = (-t * b).exp();
                        let u: f64 = rr.gen_range(0.0..1.0);
                        (-((za + (zb - za) * u).ln()) / t).clamp(a, b)
                    } else {
                        rr.gen_range(a..b)
                    };
                    let wx = envelope_half_width(*mu1, *r, z);
                    let wy = envelope_half_width(*mu2, *r, z);
                    if wx <= 0.0 || wy <= 0.0 {
                        return (0.0, None);
                    }
                    let x = rr.gen_range(-wx..wx);
                    let y = rr.gen_range(-wy..wy);
                    let dens = (-(mu1 + mu2) * z).exp();
                    let zw = if t.abs() > 0.1 {
                        ((-t * a).exp() - (-t * b).exp()) / t * (t * z).exp()
                    } else {
                        b - a
                    };
                    let weight = 4.0 * wx * wy * zw * dens;
                    (weight, Some(GroupElement::from_coords(&[x, y, z])))
                }
            }
        };

        let per_sample: Vec<(f64, f64)> = exec::map_indexed(samples, |k| {
            let (w, p) = draw(k);
            match p {
                Some(p) if w > 0.0 => {
                    // distance once per sample; radii share the value
                    let d = if self.kernel().is_flat_const() || chart.quaternion || chart.dim < 3 {
                        self.distance_one_way(&origin, &p, &budget).unwrap_or(f64::INFINITY)
                    } else {
                        self.sample_distance(&origin, &p, r_max, &budget)
                    };
                    (w, d)
                }
                _ => (0.0, f64::INFINITY),
            }
        });

        let n = samples as f64;
        let mut out = Vec::with_capacity(radii.len());
        for &r in radii {
            let mut sum = 0.0;
            let mut sum2 = 0.0;
            for &(w, d) in &per_sample {
                if d <= r {
                    sum += w;
                    sum2 += w * w;
                }
            }
            let mean = sum / n;
            let var = (sum2 / n - mean * mean).max(0.0) / n;
            out.push((mean, var.sqrt()));
        }
        Ok(out)
    }

    /// Distance for Monte Carlo samples: bounds first, optimizer on the shell.
    fn sample_distance(
        &self,
        origin: &GroupElement,
        p: &GroupElement,
        r_max: f64,
        budget: &DistanceBudget,
    ) -> f64 {
        let chart = self.spec().chart().unwrap();
        let a = Vector3::new(origin.raw()[0], origin.raw()[1], origin.raw()[2]);
        let delta = self.spec().wrap_delta(origin, p).unwrap();
        let mut lifts = vec![Vector3::new(a[0] + delta[0], a[1] + delta[1], a[2] + delta[2])];
        for i in 0..3 {
            if let Some(t) = chart.periods[i] {
                for m in [-1.0, 1.0] {
                    let mut b = lifts[0];
                    b[i] += m * t;
                    lifts.push(b);
                }
            }
        }
        let mut best_ub = f64::INFINITY;
        let mut best_lb = f64::INFINITY;
        for b in &lifts {
            best_ub = best_ub.min(self.upper_bound3(&a, b));
            best_lb = best_lb.min(self.lower_bound3(&a, b));
        }
        if best_ub <= r_max * 1.0 && best_ub <= best_lb * 1.02 + 1e-9 {
            return best_ub;
        }
        if best_lb > r_max {
            return best_lb;
        }
        let mut best = best_ub;
        for b in &lifts {
            if self.lower_bound3(&a, b) > best {
                continue;
            }
            if let Ok(d) = self.estimate_upper3(&a, b, budget, best) {
                best = best.min(d);
            }
        }
        best
    }

    /// Measure ball volumes over a radius ladder and fit the growth law.
    pub fn growth_report(&self, radii: &[f64], samples: usize, seed: u64) -> Result<GrowthReport> {
        if radii.len() < 3 {
            return Err(GeomError::BadElement("need at least three radii".into()));
        }
        let mut radii = radii.to_vec();
        radii.sort_by(|a, b| a.total_cmp(b));
        if radii[0] <= 0.0 {
            return Err(GeomError::BadElement("radii must be positive".into()));
        }
        let r_max = *radii.last().unwrap();
        let (region, _trunc) = self.ball_region(r_max, seed)?;
        let measurements = self.mc_ball(&region, &radii, samples, seed)?;
        let volumes: Vec<f64> = measurements.iter().map(|m| m.0).collect();
        let stderr: Vec<f64> = measurements.iter().map(|m| m.1).collect();

        // fit log V against log r, and against r; compare residuals
        let pts: Vec<(f64, f64, f64)> = radii
            .iter()
            .zip(&volumes)
            .filter(|(_, v)| **v > 0.0)
            .map(|(r, v)| (r.ln(), *r, v.ln()))
            .collect();
        if pts.len() < 3 {
            return Err(GeomError::Numerical(
                "too few positive volume estimates for a growth fit".into(),
            ));
        }
        let (slope_p, rss_p) = least_squares(pts.iter().map(|p| (p.0, p.2)));
        let (_slope_e, rss_e) = least_squares(pts.iter().map(|p| (p.1, p.2)));
        let classification = if rss_p >= 4.0 * rss_e {
            GrowthType::Exponential
        } else {
            GrowthType::Polynomial(slope_p.round().max(0.0) as u32)
        };
        Ok(GrowthReport {
            radii,
            volumes,
            stderr,
            exponent: slope_p,
            residual: rss_p,
            classification,
            seed,
        })
    }
}

/// Slope and residual sum of squares of the least-squares line y = a + b x.
fn least_squares(pts: impl Iterator<Item = (f64, f64)> + Clone) -> (f64, f64) {
    let n = pts.clone().count() as f64;
    let sx: f64 = pts.clone().map(|p| p.0).sum();
    let sy: f64 = pts.clone().map(|p| p.1).sum();
    let sxx: f64 = pts.clone().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.clone().map(|p| p.0 * p.1).sum();
    let denom = (n * sxx - sx * sx).max(1e-300);
    let b = (n * sxy - sx * sy) / denom;
    let a = (sy - b * sx) / n;
    let rss: f64 = pts.map(|p| (p.1 - a - b * p.0).powi(2)).sum();
    (b, rss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Metric;

    fn metric(s: &str) -> Metric {
        Metric::standard(s.parse().unwrap()).unwrap()
    }

    fn el(c: &[f64]) -> GroupElement {
        GroupElement::from_coords(c)
    }

    #[test]
    fn euclidean_distance_is_exact() {
        let m = metric("R^3");
        let d = m
            .distance(&el(&[0.0, 0.0, 0.0]), &el(&[1.0, 2.0, 2.0]), &DistanceBudget::default())
            .unwrap();
        assert!((d - 3.0).abs() < 1e-9);
    }

    #[test]
    fn torus_distance_wraps() {
        let m = metric("T^3");
        let d = m
            .distance(&el(&[0.05, 0.0, 0.0]), &el(&[0.95, 0.0, 0.0]), &DistanceBudget::default())
            .unwrap();
        assert!((d - 0.1).abs() < 1e-12);
    }

    #[test]
    fn d1_distance_matches_half_space_form() {
        let m = metric("D:lambda=1");
        let d = m
            .distance(&el(&[0.0, 0.0, 0.0]), &el(&[1.0, 0.0, 0.0]), &DistanceBudget::default())
            .unwrap();
        let exact = 1.5f64.acosh();
        assert!((d - exact).abs() < 0.01 * exact, "{d} vs {exact}");
    }

    #[test]
    fn se2k_distance_equals_product_formula() {
        let k = 2u32;
        let m = Metric::new(
            format!("SE2:k={k}").parse().unwrap(),
            crate::metric::FrameMetric::from_diagonal([
                1.0,
                1.0,
                1.0 / (2.0 * std::f64::consts::PI * k as f64).powi(2),
            ])
            .unwrap(),
        )
        .unwrap();
        let p = el(&[0.3, -0.4, 1.0]);
        let q = el(&[1.0, 2.0, 12.0]);
        let d = m.distance(&p, &q, &DistanceBudget::default()).unwrap();
        let period = 2.0 * std::f64::consts::PI * k as f64;
        let circ = (12.0f64 - 1.0).rem_euclid(period).min(period - (12.0f64 - 1.0).rem_euclid(period));
        let want = ((0.7f64).powi(2) + (2.4f64).powi(2) + (circ / period).powi(2)).sqrt();
        assert!((d - want).abs() < 1e-10, "{d} vs {want}");
    }

    #[test]
    fn su2_round_distance() {
        let m = metric("SU2");
        let e = el(&[1.0, 0.0, 0.0, 0.0]);
        let q = el(&[0.0, 1.0, 0.0, 0.0]);
        let d = m.distance(&e, &q, &DistanceBudget::default()).unwrap();
        assert!((d - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn shoot_straight_in_flat_space() {
        let m = metric("R^3");
        let c = m
            .geodesic_shoot(&el(&[0.0, 0.0, 0.0]), &[1.0, 0.0, 0.0], 2.0, 32)
            .unwrap();
        let end = c.end();
        assert!((end.coords()[0] - 2.0).abs() < 1e-12);
        assert!(end.coords()[1].abs() < 1e-12);
    }

    #[test]
    fn shoot_zero_time_gives_constant_curve() {
        let m = metric("N3");
        let p = el(&[0.5, -0.5, 1.0]);
        let c = m.geodesic_shoot(&p, &[1.0, 1.0, 0.0], 0.0, 16).unwrap();
        assert_eq!(c.samples()[0], p);
        assert_eq!(c.samples()[1], p);
    }

    #[test]
    fn vertical_lines_are_geodesics_in_dlambda() {
        let m = metric("D:lambda=1");
        let c = m
            .geodesic_shoot(&el(&[0.0, 0.0, 0.0]), &[0.0, 0.0, 1.0], 1.5, 64)
            .unwrap();
        let end = c.end();
        assert!(end.coords()[0].abs() < 1e-8);
        assert!(end.coords()[1].abs() < 1e-8);
        assert!((end.coords()[2] - 1.5).abs() < 1e-6);
    }

    #[test]
    fn geodesic_speed_is_conserved() {
        for name in ["D:lambda=-1", "N3", "J"] {
            let m = metric(name);
            let c = m
                .geodesic_shoot(&el(&[0.2, -0.1, 0.0]), &[0.8, 0.5, 0.6], 3.0, 240)
                .unwrap();
            // consecutive chord speeds
            let mut speeds = Vec::new();
            for i in 0..c.samples().len() - 1 {
                let seg = Curve::new(
                    vec![c.samples()[i], c.samples()[i + 1]],
                    vec![0.0, 1.0],
                )
                .unwrap();
                let dt = c.times()[i + 1] - c.times()[i];
                speeds.push(m.curve_length(&seg).unwrap() / dt);
            }
            let s0 = speeds[0];
            for s in &speeds {
                assert!(
                    (s - s0).abs() < 2e-4 * s0,
                    "{name}: speed drift {s} vs {s0}"
                );
            }
        }
    }

    #[test]
    fn distance_is_symmetric_and_triangular_on_samples() {
        use rand::Rng;
        let m = metric("N3");
        let budget = DistanceBudget::default();
        let mut rng = stream_rng(3, rng::stream::ALGEBRA, 1);
        for _ in 0..4 {
            let mut p = [0.0; 3];
            let mut q = [0.0; 3];
            let mut w = [0.0; 3];
            for i in 0..3 {
                p[i] = rng.gen_range(-1.5..1.5);
                q[i] = rng.gen_range(-1.5..1.5);
                w[i] = rng.gen_range(-1.5..1.5);
            }
            let (p, q, w) = (el(&p), el(&q), el(&w));
            let dpq = m.distance(&p, &q, &budget).unwrap();
            let dqp = m.distance(&q, &p, &budget).unwrap();
            assert!((dpq - dqp).abs() <= 0.02 * dpq.max(dqp) + 1e-9);
            let dpw = m.distance(&p, &w, &budget).unwrap();
            let dwq = m.distance(&w, &q, &budget).unwrap();
            assert!(dpq <= 1.02 * (dpw + dwq) + 1e-9);
        }
    }

    #[test]
    fn euclidean_ball_volume() {
        let m = metric("R^3");
        let b = m.ball_volume(1.0, 4000, 7).unwrap();
        let want = 4.0 * std::f64::consts::PI / 3.0;
        assert!(
            (b.volume - want).abs() < 0.05 * want,
            "vol {} vs {want}",
            b.volume
        );
    }

    #[test]
    fn torus_ball_saturates_at_total_volume() {
        let m = metric("T^3");
        let b = m.ball_volume(3.0, 2000, 5).unwrap();
        assert!((b.volume - 1.0).abs() < 1e-9, "vol {}", b.volume);
    }

    #[test]
    fn growth_classifications() {
        let m = metric("R^3");
        let rep = m.growth_report(&[2.0, 3.0, 4.0, 6.0], 3000, 11).unwrap();
        assert!(matches!(rep.classification, GrowthType::Polynomial(_)));
        assert!((rep.exponent - 3.0).abs() < 0.4, "exp {}", rep.exponent);

        let m = metric("AffR");
        let rep = m.growth_report(&[2.0, 3.0, 4.0, 5.0, 6.0], 4000, 11).unwrap();
        assert_eq!(rep.classification, GrowthType::Exponential);
    }

    #[test]
    fn algebraic_growth_examples() {
        let t = |s: &str| growth_type_algebraic(&s.parse().unwrap()).unwrap();
        assert_eq!(t("N3*"), GrowthType::Polynomial(2));
        assert_eq!(t("SE2~"), GrowthType::Polynomial(3));
        assert_eq!(t("D:lambda=-1"), GrowthType::Exponential);
        assert_eq!(t("N3"), GrowthType::Polynomial(4));
    }
}
