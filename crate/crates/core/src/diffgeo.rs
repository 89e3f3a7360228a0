//! Chart-level differential geometry driven by finite differences of the
//! metric tensor. All derivative information (Christoffel symbols, the
//! curvature tensor, geodesic acceleration) is produced from central
//! differences of a metric closure `g: R^D -> Sym(D)`; the closed-form
//! structure-constant expressions are deliberately not used here.

use nalgebra::{SMatrix, SVector};

use crate::error::{GeomError, Result};

/// Central-difference step: h = FD_SCALE * (1 + |coord|), error O(h^2).
pub(crate) const FD_SCALE: f64 = 1e-4;
const GRAM_TOL: f64 = 1e-12;

#[inline]
fn fd_step(x: f64) -> f64 {
    FD_SCALE * (1.0 + x.abs())
}

/// First derivatives of the metric, `out[k] = d g / d x_k`.
fn metric_derivs<const D: usize, G>(g: &G, x: &SVector<f64, D>) -> [SMatrix<f64, D, D>; D]
where
    G: Fn(&SVector<f64, D>) -> SMatrix<f64, D, D>,
{
    let mut out = [SMatrix::<f64, D, D>::zeros(); D];
    for k in 0..D {
        let h = fd_step(x[k]);
        let mut xp = *x;
        let mut xm = *x;
        xp[k] += h;
        xm[k] -= h;
        out[k] = (g(&xp) - g(&xm)) / (2.0 * h);
    }
    out
}

/// Christoffel symbols of the second kind, `out[k][(i,j)] = Gamma^k_ij`.
pub(crate) fn christoffels<const D: usize, G>(
    g: &G,
    x: &SVector<f64, D>,
) -> Result<[SMatrix<f64, D, D>; D]>
where
    G: Fn(&SVector<f64, D>) -> SMatrix<f64, D, D>,
{
    let g0 = g(x);
    let ginv = g0
        .try_inverse()
        .ok_or_else(|| GeomError::Numerical("singular metric tensor".into()))?;
    let dg = metric_derivs(g, x);
    let mut out = [SMatrix::<f64, D, D>::zeros(); D];
    for k in 0..D {
        for i in 0..D {
            for j in i..D {
                let mut s = 0.0;
                for l in 0..D {
                    s += ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                }
                out[k][(i, j)] = 0.5 * s;
                out[k][(j, i)] = 0.5 * s;
            }
        }
    }
    Ok(out)
}

/// Second derivatives `dd[i][j] = d^2 g / dx_i dx_j` (full, symmetric).
fn metric_second_derivs<const D: usize, G>(
    g: &G,
    x: &SVector<f64, D>,
) -> Vec<Vec<SMatrix<f64, D, D>>>
where
    G: Fn(&SVector<f64, D>) -> SMatrix<f64, D, D>,
{
    let g0 = g(x);
    let mut dd = vec![vec![SMatrix::<f64, D, D>::zeros(); D]; D];
    for i in 0..D {
        let hi = fd_step(x[i]);
        let mut xp = *x;
        let mut xm = *x;
        xp[i] += hi;
        xm[i] -= hi;
        dd[i][i] = (g(&xp) - g0 * 2.0 + g(&xm)) / (hi * hi);
        for j in (i + 1)..D {
            let hj = fd_step(x[j]);
            let mut xpp = *x;
            let mut xpm = *x;
            let mut xmp = *x;
            let mut xmm = *x;
            xpp[i] += hi;
            xpp[j] += hj;
            xpm[i] += hi;
            xpm[j] -= hj;
            xmp[i] -= hi;
            xmp[j] += hj;
            xmm[i] -= hi;
            xmm[j] -= hj;
            let m = (g(&xpp) - g(&xpm) - g(&xmp) + g(&xmm)) / (4.0 * hi * hj);
            dd[i][j] = m;
            dd[j][i] = m;
        }
    }
    dd
}

/// Sectional curvature of the plane spanned by `u`, `v` at `x`.
///
/// Uses the covariant curvature tensor assembled from second differences of
/// the metric plus the quadratic Christoffel terms; with this convention the
/// round sphere comes out positive and the hyperbolic plane negative.
pub(crate) fn sectional_curvature<const D: usize, G>(
    g: &G,
    x: &SVector<f64, D>,
    u: &SVector<f64, D>,
    v: &SVector<f64, D>,
) -> Result<f64>
where
    G: Fn(&SVector<f64, D>) -> SMatrix<f64, D, D>,
{
    let g0 = g(x);
    let uu = (u.transpose() * g0 * u)[(0, 0)];
    let vv = (v.transpose() * g0 * v)[(0, 0)];
    let uv = (u.transpose() * g0 * v)[(0, 0)];
    let gram = uu * vv - uv * uv;
    if !(gram > GRAM_TOL * uu.abs().max(1e-300) * vv.abs().max(1e-300)) {
        return Err(GeomError::DegeneratePlane);
    }
    let gam = christoffels(g, x)?;
    let dd = metric_second_derivs(g, x);

    // R(u,v,u,v) with R_iklm = 1/2 (g_im,kl + g_kl,im - g_il,km - g_km,il)
    //                        + g_np (Gamma^n_kl Gamma^p_im - Gamma^n_km Gamma^p_il)
    let mut r = 0.0;
    for i in 0..D {
        for k in 0..D {
            for l in 0..D {
                for m in 0..D {
                    let w = u[i] * v[k] * u[l] * v[m];
                    if w == 0.0 {
                        continue;
                    }
                    let mut term = 0.5
                        * (dd[k][l][(i, m)] + dd[i][m][(k, l)]
                            - dd[k][m][(i, l)]
                            - dd[i][l][(k, m)]);
                    for n in 0..D {
                        for p in 0..D {
                            term += g0[(n, p)]
                                * (gam[n][(k, l)] * gam[p][(i, m)]
                                    - gam[n][(k, m)] * gam[p][(i, l)]);
                        }
                    }
                    r += term * w;
                }
            }
        }
    }
    Ok(r / gram)
}

/// One RK4 integration of the geodesic equation from `(x0, v0)` over time `t`.
/// Returns the sampled states including the initial one. Errors out when a
/// coordinate exceeds `bound`.
pub(crate) fn geodesic_rk4<const D: usize, G>(
    g: &G,
    x0: SVector<f64, D>,
    v0: SVector<f64, D>,
    t: f64,
    steps: usize,
    bound: f64,
) -> Result<Vec<(SVector<f64, D>, SVector<f64, D>)>>
where
    G: Fn(&SVector<f64, D>) -> SMatrix<f64, D, D>,
{
    let accel = |x: &SVector<f64, D>, v: &SVector<f64, D>| -> Result<SVector<f64, D>> {
        let gam = christoffels(g, x)?;
        let mut a = SVector::<f64, D>::zeros();
        for k in 0..D {
            a[k] = -(v.transpose() * gam[k] * v)[(0, 0)];
        }
        Ok(a)
    };
    let h = t / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let (mut x, mut v) = (x0, v0);
    out.push((x, v));
    for _ in 0..steps {
        let a1 = accel(&x, &v)?;
        let (x2, v2) = (x + v * (0.5 * h), v + a1 * (0.5 * h));
        let a2 = accel(&x2, &v2)?;
        let (x3, v3) = (x + v2 * (0.5 * h), v + a2 * (0.5 * h));
        let a3 = accel(&x3, &v3)?;
        let (x4, v4) = (x + v3 * h, v + a3 * h);
        let a4 = accel(&x4, &v4)?;
        x += (v + (v2 + v3) * 2.0 + v4) * (h / 6.0);
        v += (a1 + (a2 + a3) * 2.0 + a4) * (h / 6.0);
        if x.iter().any(|c| !c.is_finite() || c.abs() > bound) {
            return Err(GeomError::IntegrationEscape(bound));
        }
        out.push((x, v));
    }
    Ok(out)
}

/// Simpson approximation of the metric length of the straight chart segment
/// from `a` to `b`.
pub(crate) fn segment_length<const D: usize, G>(
    g: &G,
    a: &SVector<f64, D>,
    b: &SVector<f64, D>,
) -> f64
where
    G: Fn(&SVector<f64, D>) -> SMatrix<f64, D, D>,
{
    let d = b - a;
    let speed = |x: &SVector<f64, D>| (d.transpose() * g(x) * d)[(0, 0)].max(0.0).sqrt();
    let mid = a + d * 0.5;
    (speed(a) + 4.0 * speed(&mid) + speed(b)) / 6.0
}

pub(crate) fn path_length<const D: usize, G>(g: &G, nodes: &[SVector<f64, D>]) -> f64
where
    G: Fn(&SVector<f64, D>) -> SMatrix<f64, D, D>,
{
    nodes
        .windows(2)
        .map(|w| segment_length(g, &w[0], &w[1]))
        .sum()
}

/// Resample a polyline to `m` nodes uniformly spaced in arclength.
pub(crate) fn resample_uniform<const D: usize, G>(
    g: &G,
    nodes: &[SVector<f64, D>],
    m: usize,
) -> Vec<SVector<f64, D>>
where
    G: Fn(&SVector<f64, D>) -> SMatrix<f64, D, D>,
{
    let mut cum = Vec::with_capacity(nodes.len());
    cum.push(0.0);
    for w in nodes.windows(2) {
        let l = segment_length(g, &w[0], &w[1]);
        cum.push(cum.last().unwrap() + l);
    }
    let total = *cum.last().unwrap();
    if total <= 0.0 || m < 2 {
        return vec![nodes[0]; m.max(1)];
    }
    let mut out = Vec::with_capacity(m);
    let mut seg = 0;
    for i in 0..m {
        let target = total * i as f64 / (m - 1) as f64;
        while seg + 2 < cum.len() && cum[seg + 1] < target {
            seg += 1;
        }
        let span = (cum[seg + 1] - cum[seg]).max(1e-300);
        let t = ((target - cum[seg]) / span).clamp(0.0, 1.0);
        out.push(nodes[seg] * (1.0 - t) + nodes[seg + 1] * t);
    }
    out
}

/// Local curve-shortening of a polyline with fixed endpoints.
///
/// Each sweep moves every interior node downhill along a finite-difference
/// gradient of the two adjacent segment lengths, with a per-node adaptive
/// step; the polyline is re-spaced by arclength every few sweeps. Returns the
/// final length. The result is always the length of a feasible curve, so it
/// is a valid upper bound for the geodesic distance between the endpoints.
pub(crate) fn relax_polyline<const D: usize, G>(
    g: &G,
    nodes: &mut Vec<SVector<f64, D>>,
    sweeps: usize,
    bound: f64,
) -> f64
where
    G: Fn(&SVector<f64, D>) -> SMatrix<f64, D, D>,
{
    const RESAMPLE_EVERY: usize = 8;
    let n = nodes.len();
    if n < 3 {
        return path_length(g, nodes);
    }
    let mut len = path_length(g, nodes);
    let mut steps = vec![0.05 * len / n as f64 + 1e-9; n];
    for sweep in 0..sweeps {
        let mut improved = 0.0;
        for i in 1..n - 1 {
            let local = |w: &SVector<f64, D>| {
                segment_length(g, &nodes[i - 1], w) + segment_length(g, w, &nodes[i + 1])
            };
            let e0 = local(&nodes[i]);
            let mut grad = SVector::<f64, D>::zeros();
            for k in 0..D {
                let h = 1e-5 * (1.0 + nodes[i][k].abs());
                let mut wp = nodes[i];
                let mut wm = nodes[i];
                wp[k] += h;
                wm[k] -= h;
                grad[k] = (local(&wp) - local(&wm)) / (2.0 * h);
            }
            let gn = grad.norm();
            if gn < 1e-14 {
                continue;
            }
            let dir = grad / gn;
            let mut t = steps[i];
            let mut accepted = false;
            for _ in 0..4 {
                let cand = nodes[i] - dir * t;
                if cand.iter().all(|c| c.is_finite() && c.abs() <= bound) {
                    let e1 = local(&cand);
                    if e1.is_finite() && e1 < e0 {
                        improved += e0 - e1;
                        nodes[i] = cand;
                        steps[i] = t * 1.3;
                        accepted = true;
                        break;
                    }
                }
                t *= 0.3;
            }
            if !accepted {
                steps[i] = (t * 0.5).max(1e-12);
            }
        }
        if (sweep + 1) % RESAMPLE_EVERY == 0 {
            *nodes = resample_uniform(g, nodes, n);
        }
        len = path_length(g, nodes);
        if improved < 1e-10 * len + 1e-14 {
            break;
        }
    }
    *nodes = resample_uniform(g, nodes, n);
    path_length(g, nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix2, Vector2};

    fn h2(x: &Vector2<f64>) -> Matrix2<f64> {
        Matrix2::new((-2.0 * x[1]).exp(), 0.0, 0.0, 1.0)
    }

    #[test]
    fn hyperbolic_plane_curvature_is_minus_one() {
        for (px, pz) in [(0.0, 0.0), (1.3, -0.7), (-2.0, 1.5)] {
            let k = sectional_curvature(
                &h2,
                &Vector2::new(px, pz),
                &Vector2::new(1.0, 0.0),
                &Vector2::new(0.3, 1.0),
            )
            .unwrap();
            assert!((k + 1.0).abs() < 1e-5, "K = {k}");
        }
    }

    #[test]
    fn flat_curvature_is_zero() {
        let flat = |_: &Vector2<f64>| Matrix2::identity();
        let k = sectional_curvature(
            &flat,
            &Vector2::new(0.2, 0.4),
            &Vector2::new(1.0, 0.1),
            &Vector2::new(0.0, 1.0),
        )
        .unwrap();
        assert!(k.abs() < 1e-9);
    }

    #[test]
    fn degenerate_plane_is_rejected() {
        let flat = |_: &Vector2<f64>| Matrix2::identity();
        let err = sectional_curvature(
            &flat,
            &Vector2::new(0.0, 0.0),
            &Vector2::new(1.0, 2.0),
            &Vector2::new(2.0, 4.0),
        );
        assert!(matches!(err, Err(GeomError::DegeneratePlane)));
    }

    #[test]
    fn vertical_geodesic_in_h2_stays_vertical() {
        let path = geodesic_rk4(
            &h2,
            Vector2::new(0.0, 0.0),
            Vector2::new(0.0, 1.0),
            2.0,
            64,
            1e8,
        )
        .unwrap();
        let (end, _) = path.last().unwrap();
        assert!(end[0].abs() < 1e-9);
        assert!((end[1] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn relaxation_recovers_h2_distance() {
        // d((0,0),(1,0)) = arccosh(3/2) in horospherical coordinates.
        let a = Vector2::new(0.0, 0.0);
        let b = Vector2::new(1.0, 0.0);
        let mut nodes: Vec<_> = (0..33)
            .map(|i| {
                let t = i as f64 / 32.0;
                a * (1.0 - t) + b * t
            })
            .collect();
        let len = relax_polyline(&h2, &mut nodes, 200, 1e8);
        let exact = 1.5f64.acosh();
        assert!(
            (len - exact).abs() < 0.005 * exact,
            "len {len} vs exact {exact}"
        );
    }
}
