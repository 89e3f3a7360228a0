//! Left-invariant Riemannian metrics.
//!
//! A metric is determined by an inner product `Q` on the Lie algebra, stated
//! in the catalog's left-invariant frame {E1, E2, E3}. The coordinate tensor
//! at a point is `g = F^{-T} Q F^{-1}` with `F` the frame matrix there, so
//! left-invariance holds by construction. Tensors on quotient charts are
//! computed in universal-cover coordinates; the covering projections are
//! local isometries, so this does not change any local quantity.

use nalgebra::{DMatrix, Matrix2, Matrix3, Vector2, Vector3};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::catalog::{mat_exp_2x2, quat_mul, Family, GroupElement, GroupSpec};
use crate::diffgeo;
use crate::error::{GeomError, Result};
use crate::geodesy::Curve;

const SYMMETRY_TOL: f64 = 1e-14;

/// Inner product on the Lie algebra in the left-invariant frame, stored as a
/// symmetric positive-definite 3x3 matrix. Groups of dimension below three
/// use the leading block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameMetric {
    m: Matrix3<f64>,
}

impl FrameMetric {
    pub fn identity() -> Self {
        FrameMetric { m: Matrix3::identity() }
    }

    /// Q = c * I. Useful for curvature normalization.
    pub fn scaled(c: f64) -> Result<Self> {
        Self::from_diagonal([c, c, c])
    }

    pub fn from_diagonal(d: [f64; 3]) -> Result<Self> {
        Self::new(Matrix3::from_diagonal(&Vector3::new(d[0], d[1], d[2])))
    }

    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        if !m.iter().all(|v| v.is_finite()) {
            return Err(GeomError::Numerical("non-finite frame metric".into()));
        }
        let asym = (m - m.transpose()).abs().max();
        if asym > SYMMETRY_TOL {
            return Err(GeomError::Numerical(format!(
                "frame metric not symmetric (defect {asym:e})"
            )));
        }
        if m.cholesky().is_none() {
            return Err(GeomError::Numerical(
                "frame metric not positive definite".into(),
            ));
        }
        Ok(FrameMetric { m })
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    fn block2(&self) -> Matrix2<f64> {
        self.m.fixed_view::<2, 2>(0, 0).into_owned()
    }
}

impl Serialize for FrameMetric {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        // row-major 9 reals
        let v: Vec<f64> = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| self.m[(i, j)]).collect();
        v.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for FrameMetric {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(de)?;
        if v.len() != 9 {
            return Err(D::Error::custom("expected 9 row-major entries"));
        }
        FrameMetric::new(Matrix3::from_row_slice(&v)).map_err(D::Error::custom)
    }
}

/// Coordinate metric tensor at a point. For quaternion charts this is the
/// ambient 4x4 form restricted to the tangent space of the unit sphere
/// (it annihilates the normal direction).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricAtPoint {
    pub dim: usize,
    pub g: DMatrix<f64>,
}

// ---------------------------------------------------------------------------
// Metric kernels: closed-form coordinate tensors per family
// ---------------------------------------------------------------------------

/// Point-dependent coordinate tensor, in universal-cover coordinates.
#[derive(Debug, Clone)]
pub(crate) enum Kernel {
    /// Constant tensor (abelian groups; also SE2 with rotation-invariant Q).
    Const { dim: usize, g: Matrix3<f64> },
    /// Semidirect law on R^3: frame [[e^{zA}, 0], [0, s]].
    Semi { a: Matrix2<f64>, q: Matrix3<f64>, s: f64 },
    /// Heisenberg coordinates.
    Heis { q: Matrix3<f64> },
    /// Aff+(R) chart (x, z) with frame diag(e^z, -1).
    Aff { q: Matrix2<f64> },
    /// Local normal chart of a quaternion group; independent of base point.
    QuatLocal { q: Matrix3<f64> },
}

impl Kernel {
    pub(crate) fn dim(&self) -> usize {
        match self {
            Kernel::Const { dim, .. } => *dim,
            Kernel::Aff { .. } => 2,
            _ => 3,
        }
    }

    pub(crate) fn g3(&self, x: &Vector3<f64>) -> Matrix3<f64> {
        match self {
            Kernel::Const { g, .. } => *g,
            Kernel::Semi { a, q, s } => {
                let e = mat_exp_2x2(a, -x[2]);
                // F^{-1} = [[e^{-zA}, 0], [0, s]]
                let b = Matrix3::new(e.m11, e.m12, 0.0, e.m21, e.m22, 0.0, 0.0, 0.0, *s);
                b.transpose() * q * b
            }
            Kernel::Heis { q } => {
                let b = Matrix3::new(
                    1.0, 0.0, 0.0, //
                    0.0, 1.0, 0.0, //
                    -2.0 * x[1], 2.0 * x[0], 1.0,
                );
                b.transpose() * q * b
            }
            Kernel::QuatLocal { q } => {
                let v = quat_chart_frame(&Vector3::new(x[0], x[1], x[2]));
                v.transpose() * q * v
            }
            Kernel::Aff { .. } => unreachable!("dim-2 kernel"),
        }
    }

    pub(crate) fn g2(&self, x: &Vector2<f64>) -> Matrix2<f64> {
        match self {
            Kernel::Const { g, .. } => g.fixed_view::<2, 2>(0, 0).into_owned(),
            Kernel::Aff { q } => {
                let b = Matrix2::new((-x[1]).exp(), 0.0, 0.0, -1.0);
                b.transpose() * q * b
            }
            _ => unreachable!("dim-3 kernel"),
        }
    }

    /// Is the tensor constant over the chart?
    pub(crate) fn is_flat_const(&self) -> bool {
        matches!(self, Kernel::Const { .. })
    }
}

/// Body components of the coordinate derivatives of the normal chart
/// `u -> exp_quat(u)`: column i holds `exp(-xi) d/du_i exp(xi)` expressed in
/// the basis {i, j, k}. Analytic, so curvature differences stay clean.
fn quat_chart_frame(u: &Vector3<f64>) -> Matrix3<f64> {
    let theta = u.norm();
    let (s, coeff_a, cs) = if theta < 1e-4 {
        let t2 = theta * theta;
        (1.0 - t2 / 6.0, 2.0 / 3.0 - 2.0 * t2 / 15.0, 1.0 - t2 / 2.0)
    } else {
        let s = theta.sin() / theta;
        let a = theta.cos() * (theta * theta.cos() - theta.sin()) / (theta * theta * theta)
            + (theta.sin() * theta.sin()) / (theta * theta);
        (s, a, theta.cos())
    };
    let mut m = Matrix3::zeros();
    for i in 0..3 {
        let mut e = Vector3::zeros();
        e[i] = 1.0;
        let v = u * (coeff_a * u[i]) + e * (cs * s) - u.cross(&e) * (s * s);
        m.set_column(i, &v);
    }
    m
}

// ---------------------------------------------------------------------------
// Frames
// ---------------------------------------------------------------------------

impl GroupSpec {
    /// Matrix of the left-invariant frame at `p`, columns `dL_p(E_i)` in chart
    /// coordinates. Quaternion charts return a 4x3 matrix with orthonormal
    /// columns tangent to the unit sphere.
    ///
    /// The identity frame is {d/dx, d/dy, -d/dz} for the solvable semidirect
    /// families (the basis whose structure constants reproduce `A`), the
    /// standard coordinate basis elsewhere, and {i, j, k} for quaternions.
    pub fn frame_at(&self, p: &GroupElement) -> Result<DMatrix<f64>> {
        let chart = self.chart()?;
        if p.dim() != chart.dim {
            return Err(GeomError::BadElement(format!(
                "expected {} coordinates, got {}",
                chart.dim,
                p.dim()
            )));
        }
        let c = p.raw();
        Ok(match self.family() {
            Family::R(_) | Family::T(_) | Family::RxT1 | Family::RxT2 | Family::R2xT1 => {
                DMatrix::identity(chart.dim, chart.dim)
            }
            Family::AffR => {
                DMatrix::from_row_slice(2, 2, &[c[1].exp(), 0.0, 0.0, -1.0])
            }
            Family::N3 | Family::N3Star => DMatrix::from_row_slice(
                3,
                3,
                &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 2.0 * c[1], -2.0 * c[0], 1.0],
            ),
            Family::Su2 | Family::So3 => {
                let q = c;
                let mut f = DMatrix::zeros(4, 3);
                for (i, e) in [[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]]
                    .iter()
                    .enumerate()
                {
                    let col = quat_mul(&q, e);
                    for r in 0..4 {
                        f[(r, i)] = col[r];
                    }
                }
                f
            }
            fam => {
                let a = self
                    .semidirect_matrix()
                    .expect("remaining chartable families are semidirect");
                let e = mat_exp_2x2(&a, c[2]);
                let s = frame_sign(fam);
                DMatrix::from_row_slice(
                    3,
                    3,
                    &[e.m11, e.m12, 0.0, e.m21, e.m22, 0.0, 0.0, 0.0, s],
                )
            }
        })
    }
}

/// Orientation of the third frame vector for semidirect charts. SE2 covers
/// use +d/dz so the frame is the familiar rotation frame; the solvable
/// families use -d/dz, matching the basis behind `structure_constants`.
fn frame_sign(fam: Family) -> f64 {
    match fam {
        Family::Se2Tilde | Family::Se2K(_) => 1.0,
        _ => -1.0,
    }
}

// ---------------------------------------------------------------------------
// Metric
// ---------------------------------------------------------------------------

/// A left-invariant metric: a chartable group together with a frame inner
/// product. All numeric geometry hangs off this type.
#[derive(Debug, Clone)]
pub struct Metric {
    spec: GroupSpec,
    q: FrameMetric,
    kernel: Kernel,
}

impl Metric {
    pub fn new(spec: GroupSpec, q: FrameMetric) -> Result<Self> {
        if !spec.chartable() {
            return Err(GeomError::UnsupportedChart(spec.to_string()));
        }
        let kernel = build_kernel(&spec, &q);
        Ok(Metric { spec, q, kernel })
    }

    /// Q = I on the catalog frame.
    pub fn standard(spec: GroupSpec) -> Result<Self> {
        Self::new(spec, FrameMetric::identity())
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn frame_metric(&self) -> &FrameMetric {
        &self.q
    }

    pub(crate) fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    /// Coordinate metric tensor at `p`.
    pub fn tensor_at(&self, p: &GroupElement) -> Result<MetricAtPoint> {
        let chart = self.spec.chart()?;
        if p.dim() != chart.dim {
            return Err(GeomError::BadElement("dimension mismatch".into()));
        }
        if chart.quaternion {
            // Columns of F are orthonormal, so the pseudo-inverse is F^T and
            // the ambient form is F Q F^T.
            let f = self.spec.frame_at(p)?;
            let g = &f * self.q.matrix() * f.transpose();
            return Ok(MetricAtPoint { dim: 4, g });
        }
        let c = p.raw();
        let g = match chart.dim {
            1 => DMatrix::from_row_slice(1, 1, &[self.q.matrix()[(0, 0)]]),
            2 => {
                let m = self.kernel.g2(&Vector2::new(c[0], c[1]));
                DMatrix::from_row_slice(2, 2, &[m.m11, m.m12, m.m21, m.m22])
            }
            _ => {
                let m = self.kernel.g3(&Vector3::new(c[0], c[1], c[2]));
                let rows: Vec<f64> = (0..3)
                    .flat_map(|i| (0..3).map(move |j| (i, j)))
                    .map(|(i, j)| m[(i, j)])
                    .collect();
                DMatrix::from_row_slice(3, 3, &rows)
            }
        };
        Ok(MetricAtPoint { dim: chart.dim, g })
    }

    /// Riemannian volume density with respect to the chart coordinates,
    /// sqrt(det g). Quaternion charts report the density of the 3-dimensional
    /// normal chart at the point, sqrt(det Q).
    pub fn volume_density(&self, p: &GroupElement) -> Result<f64> {
        let chart = self.spec.chart()?;
        if chart.quaternion {
            return Ok(self.q.matrix().determinant().max(0.0).sqrt());
        }
        let t = self.tensor_at(p)?;
        let det = t.g.determinant();
        if det <= 0.0 {
            return Err(GeomError::Numerical("non-positive metric determinant".into()));
        }
        Ok(det.sqrt())
    }

    /// Sectional curvature of the plane spanned by tangent vectors `u`, `v`
    /// at `p` (chart components; 4-vectors tangent to the sphere for
    /// quaternion charts).
    pub fn sectional_curvature(&self, p: &GroupElement, u: &[f64], v: &[f64]) -> Result<f64> {
        let chart = self.spec.chart()?;
        if u.len() != chart.dim || v.len() != chart.dim {
            return Err(GeomError::BadElement("tangent dimension mismatch".into()));
        }
        if chart.quaternion {
            // Move the plane to the normal chart at p: components in the
            // orthonormal frame are F^T u.
            let f = self.spec.frame_at(p)?;
            let to_frame = |w: &[f64]| {
                let mut out = Vector3::zeros();
                for i in 0..3 {
                    out[i] = (0..4).map(|r| f[(r, i)] * w[r]).sum();
                }
                out
            };
            let q = *self.q.matrix();
            let kern = move |x: &Vector3<f64>| Kernel::QuatLocal { q }.g3(x);
            return diffgeo::sectional_curvature(&kern, &Vector3::zeros(), &to_frame(u), &to_frame(v));
        }
        match chart.dim {
            1 => Err(GeomError::DegeneratePlane),
            2 => {
                let k = self.kernel.clone();
                let g = move |x: &Vector2<f64>| k.g2(x);
                let c = p.raw();
                diffgeo::sectional_curvature(
                    &g,
                    &Vector2::new(c[0], c[1]),
                    &Vector2::new(u[0], u[1]),
                    &Vector2::new(v[0], v[1]),
                )
            }
            _ => {
                let k = self.kernel.clone();
                let g = move |x: &Vector3<f64>| k.g3(x);
                let c = p.raw();
                diffgeo::sectional_curvature(
                    &g,
                    &Vector3::new(c[0], c[1], c[2]),
                    &Vector3::new(u[0], u[1], u[2]),
                    &Vector3::new(v[0], v[1], v[2]),
                )
            }
        }
    }

    /// Length of a sampled curve: Simpson quadrature of the metric speed
    /// along consecutive chart segments. Periodic coordinates are unwrapped
    /// cumulatively so curves may cross the seam.
    pub fn curve_length(&self, curve: &Curve) -> Result<f64> {
        let chart = self.spec.chart()?;
        let pts = curve.samples();
        if pts.is_empty() {
            return Err(GeomError::BadElement("empty curve".into()));
        }
        for p in pts {
            if p.dim() != chart.dim {
                return Err(GeomError::BadElement("curve/chart dimension mismatch".into()));
            }
        }
        if chart.quaternion {
            // Body increment between consecutive points, measured by Q.
            let mut total = 0.0;
            for w in pts.windows(2) {
                let xi = quat_log_between(&w[0].raw(), &w[1].raw());
                total += (xi.transpose() * self.q.matrix() * xi)[(0, 0)].max(0.0).sqrt();
            }
            return Ok(total);
        }
        let lifted = self.lift_curve(pts)?;
        Ok(match chart.dim {
            1 => {
                let w = self.q.matrix()[(0, 0)].sqrt();
                lifted.windows(2).map(|s| (s[1][0] - s[0][0]).abs() * w).sum()
            }
            2 => {
                let k = &self.kernel;
                let g = move |x: &Vector2<f64>| k.g2(x);
                lifted
                    .windows(2)
                    .map(|s| {
                        diffgeo::segment_length(
                            &g,
                            &Vector2::new(s[0][0], s[0][1]),
                            &Vector2::new(s[1][0], s[1][1]),
                        )
                    })
                    .sum()
            }
            _ => {
                let k = &self.kernel;
                let g = move |x: &Vector3<f64>| k.g3(x);
                lifted
                    .windows(2)
                    .map(|s| {
                        diffgeo::segment_length(
                            &g,
                            &Vector3::new(s[0][0], s[0][1], s[0][2]),
                            &Vector3::new(s[1][0], s[1][1], s[1][2]),
                        )
                    })
                    .sum()
            }
        })
    }

    /// Continuous lift of curve samples to universal-cover coordinates.
    pub(crate) fn lift_curve(&self, pts: &[GroupElement]) -> Result<Vec<[f64; 4]>> {
        let mut out = Vec::with_capacity(pts.len());
        out.push(pts[0].raw());
        for i in 1..pts.len() {
            let d = self.spec.wrap_delta(&pts[i - 1], &pts[i])?;
            let prev = out[i - 1];
            let mut next = [0.0; 4];
            for (k, dk) in d.iter().enumerate() {
                next[k] = prev[k] + dk;
            }
            out.push(next);
        }
        Ok(out)
    }
}

/// Body components of log(a^{-1} b) for unit quaternions, pure part scaled so
/// its norm is the rotation half-angle.
fn quat_log_between(a: &[f64; 4], b: &[f64; 4]) -> Vector3<f64> {
    let r = quat_mul(&crate::catalog::quat_conj(a), b);
    let v = Vector3::new(r[1], r[2], r[3]);
    let vn = v.norm();
    if vn < 1e-300 {
        return Vector3::zeros();
    }
    v * (vn.atan2(r[0]) / vn)
}

fn build_kernel(spec: &GroupSpec, q: &FrameMetric) -> Kernel {
    use Family::*;
    match spec.family() {
        R(n) | T(n) => Kernel::Const { dim: n as usize, g: *q.matrix() },
        RxT1 => Kernel::Const { dim: 2, g: *q.matrix() },
        RxT2 | R2xT1 => Kernel::Const { dim: 3, g: *q.matrix() },
        AffR => Kernel::Aff { q: q.block2() },
        N3 | N3Star => Kernel::Heis { q: *q.matrix() },
        Su2 | So3 => Kernel::QuatLocal { q: *q.matrix() },
        fam => {
            let a = spec.semidirect_matrix().expect("semidirect family");
            let s = frame_sign(fam);
            let kern = Kernel::Semi { a, q: *q.matrix(), s };
            // Rotation-type families with rotation-invariant Q have constant
            // tensors; collapse them so distances use the exact flat formula.
            if is_rotation_invariant(&a, q.matrix()) {
                let g = kern.g3(&Vector3::zeros());
                Kernel::Const { dim: 3, g }
            } else {
                kern
            }
        }
    }
}

/// True when e^{-zA} preserves the horizontal block of Q for all z, i.e. the
/// coordinate tensor does not depend on the point. Checked exactly for the
/// rotation matrix family; conservative elsewhere.
fn is_rotation_invariant(a: &Matrix2<f64>, q: &Matrix3<f64>) -> bool {
    let rotation = a.m11 == 0.0 && a.m22 == 0.0 && a.m12 == -a.m21 && a.m12 != 0.0;
    if !rotation {
        return false;
    }
    let iso = (q[(0, 0)] - q[(1, 1)]).abs() <= 0.0 && q[(0, 1)] == 0.0;
    let no_mix = q[(0, 2)] == 0.0 && q[(1, 2)] == 0.0;
    iso && no_mix
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::GroupSpec;

    fn spec(s: &str) -> GroupSpec {
        s.parse().unwrap()
    }

    fn el(c: &[f64]) -> GroupElement {
        GroupElement::from_coords(c)
    }

    #[test]
    fn dlambda_frame_matches_length_element() {
        let g = spec("D:lambda=0.5");
        let f = g.frame_at(&el(&[0.3, -0.2, 0.7])).unwrap();
        assert!((f[(0, 0)] - 0.7f64.exp()).abs() < 1e-14);
        assert!((f[(1, 1)] - 0.35f64.exp()).abs() < 1e-14);
        assert!((f[(2, 2)] + 1.0).abs() < 1e-14);
        assert_eq!(f[(0, 1)], 0.0);

        let m = Metric::standard(g).unwrap();
        let t = m.tensor_at(&el(&[1.0, 2.0, 0.7])).unwrap();
        assert!((t.g[(0, 0)] - (-1.4f64).exp()).abs() < 1e-12);
        assert!((t.g[(1, 1)] - (-0.7f64).exp()).abs() < 1e-12);
        assert!((t.g[(2, 2)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn se2_standard_metric_is_euclidean() {
        let m = Metric::standard(spec("SE2~")).unwrap();
        let t = m.tensor_at(&el(&[4.0, -3.0, 2.2])).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((t.g[(i, j)] - want).abs() < 1e-14);
            }
        }
        assert!(m.kernel().is_flat_const());
    }

    #[test]
    fn se2tilde_frame_is_rotation_frame() {
        let g = spec("SE2~");
        let th = 1.1f64;
        let f = g.frame_at(&el(&[0.5, 0.7, th])).unwrap();
        let want = [
            [th.cos(), -th.sin(), 0.0],
            [th.sin(), th.cos(), 0.0],
            [0.0, 0.0, 1.0],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert!((f[(i, j)] - want[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn frames_match_finite_difference_of_left_translation() {
        // dL_p applied to the identity-frame basis, by central differences of
        // the group law.
        let cases = ["D:lambda=-0.5", "C:lambda=1", "J", "N3", "SE2~", "AffRxR"];
        for name in cases {
            let g = spec(name);
            let p = el(&[0.4, -0.9, 0.6]);
            let f = g.frame_at(&p).unwrap();
            let id_frame: [[f64; 3]; 3] = match name {
                "N3" => [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
                "SE2~" => [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
                _ => [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]],
            };
            let h = 1e-6;
            for (i, basis) in id_frame.iter().enumerate() {
                let qp = el(&[basis[0] * h, basis[1] * h, basis[2] * h]);
                let qm = el(&[-basis[0] * h, -basis[1] * h, -basis[2] * h]);
                let pp = g.multiply(&p, &qp).unwrap();
                let pm = g.multiply(&p, &qm).unwrap();
                for r in 0..3 {
                    let fd = (pp.coords()[r] - pm.coords()[r]) / (2.0 * h);
                    assert!(
                        (fd - f[(r, i)]).abs() < 1e-6,
                        "{name}: frame[{r},{i}] = {} vs fd {fd}",
                        f[(r, i)]
                    );
                }
            }
        }
    }

    #[test]
    fn identity_point_has_identity_frame() {
        for name in ["R^3", "N3", "J", "SE2~", "T^2", "AffR"] {
            let g = spec(name);
            let f = g.frame_at(&g.identity()).unwrap();
            let d = g.chart().unwrap().dim;
            for i in 0..d {
                for j in 0..d {
                    let want = if i == j {
                        // third axis may be -1 by the frame convention
                        f[(i, j)].signum()
                    } else {
                        0.0
                    };
                    assert!((f[(i, j)] - want).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn su2_frame_is_orthonormal_and_tangent() {
        let g = spec("SU2");
        let p = g
            .normalize_coords(&el(&[0.3, -0.5, 0.7, 0.4]))
            .unwrap();
        let f = g.frame_at(&p).unwrap();
        let c = p.raw();
        for i in 0..3 {
            let dot_q: f64 = (0..4).map(|r| f[(r, i)] * c[r]).sum();
            assert!(dot_q.abs() < 1e-12, "column {i} not tangent");
            for j in 0..3 {
                let dot: f64 = (0..4).map(|r| f[(r, i)] * f[(r, j)]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn metric_tensor_identity_at_identity() {
        for name in ["R^3", "N3", "J", "D:lambda=1", "SE2~"] {
            let m = Metric::standard(spec(name)).unwrap();
            let t = m.tensor_at(&m.spec().identity()).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((t.g[(i, j)] - want).abs() < 1e-12, "{name}");
                }
            }
        }
    }

    #[test]
    fn left_invariance_under_finite_difference_pullback() {
        use crate::rng::{stream_rng, stream};
        use rand::Rng;
        let mut rng = stream_rng(11, stream::ALGEBRA, 77);
        for name in ["D:lambda=-1", "N3", "J", "C:lambda=2", "SE2:k=2", "AffRxT1"] {
            let g = spec(name);
            let m = Metric::standard(g).unwrap();
            for _ in 0..8 {
                let mut rnd = || rng.gen_range(-1.2..1.2);
                let gp = g.normalize_coords(&el(&[rnd(), rnd(), rnd()])).unwrap();
                let p = g.normalize_coords(&el(&[rnd(), rnd(), rnd()])).unwrap();
                let gp_p = g.multiply(&gp, &p).unwrap();
                // FD Jacobian of q -> gp * q at p (universal-cover increments)
                let h = 1e-6;
                let mut jac = [[0.0; 3]; 3];
                for j in 0..3 {
                    let mut cp = p.raw();
                    let mut cm = p.raw();
                    cp[j] += h;
                    cm[j] -= h;
                    let fp = g.multiply(&gp, &el(&cp[..3])).unwrap();
                    let fm = g.multiply(&gp, &el(&cm[..3])).unwrap();
                    let d = g.wrap_delta(&fm, &fp).unwrap();
                    for i in 0..3 {
                        jac[i][j] = d[i] / (2.0 * h);
                    }
                }
                let t_p = m.tensor_at(&p).unwrap().g;
                let t_gp = m.tensor_at(&gp_p).unwrap().g;
                // pullback: J^T g(gp*p) J == g(p)
                for i in 0..3 {
                    for j in 0..3 {
                        let mut s = 0.0;
                        for a in 0..3 {
                            for b in 0..3 {
                                s += jac[a][i] * t_gp[(a, b)] * jac[b][j];
                            }
                        }
                        assert!(
                            (s - t_p[(i, j)]).abs() < 1e-6,
                            "{name}: pullback[{i}{j}] {s} vs {}",
                            t_p[(i, j)]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn curvature_values_match_the_model_spaces() {
        // R^3 flat
        let m = Metric::standard(spec("R^3")).unwrap();
        let k = m
            .sectional_curvature(&el(&[0.1, 0.2, 0.3]), &[1.0, 0.0, 0.0], &[0.0, 1.0, 1.0])
            .unwrap();
        assert!(k.abs() < 1e-9);

        // D_1 is hyperbolic 3-space
        let m = Metric::standard(spec("D:lambda=1")).unwrap();
        let k = m
            .sectional_curvature(&el(&[0.4, -0.3, 0.5]), &[1.0, 0.2, 0.0], &[0.1, 1.0, 0.8])
            .unwrap();
        assert!((k + 1.0).abs() < 1e-4, "K = {k}");

        // C_lambda has constant curvature -lambda^2
        for l in [0.5, 2.0] {
            let m = Metric::standard(spec(&format!("C:lambda={l}"))).unwrap();
            let k = m
                .sectional_curvature(&el(&[0.2, 0.1, -0.4]), &[1.0, 0.0, 0.3], &[0.0, 1.0, -0.2])
                .unwrap();
            assert!((k + l * l).abs() < 1e-4, "lambda {l}: K = {k}");
        }

        // SU2 with Q = I is the round 3-sphere of curvature +1
        let g = spec("SU2");
        let m = Metric::standard(g).unwrap();
        let p = g.normalize_coords(&el(&[0.6, 0.1, -0.3, 0.2])).unwrap();
        let f = g.frame_at(&p).unwrap();
        let u: Vec<f64> = (0..4).map(|r| f[(r, 0)]).collect();
        let v: Vec<f64> = (0..4).map(|r| f[(r, 1)] + 0.5 * f[(r, 2)]).collect();
        let k = m.sectional_curvature(&p, &u, &v).unwrap();
        assert!((k - 1.0).abs() < 1e-5, "K = {k}");
    }

    #[test]
    fn curve_length_examples() {
        use crate::geodesy::Curve;
        // constant curve
        let m = Metric::standard(spec("R^3")).unwrap();
        let c = Curve::new(
            vec![el(&[1.0, 1.0, 1.0]), el(&[1.0, 1.0, 1.0])],
            vec![0.0, 1.0],
        )
        .unwrap();
        assert!(m.curve_length(&c).unwrap() < 1e-14);

        // straight segment in R^3
        let c = Curve::from_points(vec![el(&[0.0, 0.0, 0.0]), el(&[1.0, 2.0, 2.0])]).unwrap();
        assert!((m.curve_length(&c).unwrap() - 3.0).abs() < 1e-12);

        // vertical segment in D_lambda has unit speed in z
        let m = Metric::standard(spec("D:lambda=0.5")).unwrap();
        let pts: Vec<_> = (0..9)
            .map(|i| el(&[0.0, 0.0, -1.3 * i as f64 / 8.0]))
            .collect();
        let c = Curve::from_points(pts).unwrap();
        assert!((m.curve_length(&c).unwrap() - 1.3).abs() < 1e-12);
    }

    #[test]
    fn volume_density_examples() {
        let m = Metric::standard(spec("R^3")).unwrap();
        assert!((m.volume_density(&el(&[0.3, 0.1, 2.0])).unwrap() - 1.0).abs() < 1e-14);

        let m = Metric::standard(spec("D:lambda=0.5")).unwrap();
        let z = 0.8;
        let want = (-(1.0 + 0.5) * z).exp();
        assert!((m.volume_density(&el(&[5.0, -2.0, z])).unwrap() - want).abs() < 1e-12);

        let m = Metric::standard(spec("SE2~")).unwrap();
        assert!((m.volume_density(&el(&[1.0, 2.0, 3.0])).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn plane_invariance_of_sectional_curvature() {
        let m = Metric::standard(spec("J")).unwrap();
        let p = el(&[0.2, -0.1, 0.4]);
        let u = [1.0, 0.3, -0.2];
        let v = [0.0, 1.0, 0.5];
        let k1 = m.sectional_curvature(&p, &u, &v).unwrap();
        // same plane, different basis
        let u2 = [2.0 * u[0] + v[0], 2.0 * u[1] + v[1], 2.0 * u[2] + v[2]];
        let v2 = [u[0] - v[0], u[1] - v[1], u[2] - v[2]];
        let k2 = m.sectional_curvature(&p, &u2, &v2).unwrap();
        assert!((k1 - k2).abs() < 1e-6, "{k1} vs {k2}");
    }

    #[test]
    fn frame_metric_validation() {
        assert!(FrameMetric::from_diagonal([1.0, 2.0, 3.0]).is_ok());
        assert!(FrameMetric::from_diagonal([1.0, -2.0, 3.0]).is_err());
        let mut m = Matrix3::identity();
        m[(0, 1)] = 1e-10;
        assert!(FrameMetric::new(m).is_err());
    }

    #[test]
    fn frame_metric_serializes_as_nine_reals() {
        let q = FrameMetric::from_diagonal([1.0, 2.0, 3.0]).unwrap();
        let s = serde_json::to_string(&q).unwrap();
        assert_eq!(s, "[1.0,0.0,0.0,0.0,2.0,0.0,0.0,0.0,3.0]");
        let back: FrameMetric = serde_json::from_str(&s).unwrap();
        assert_eq!(back, q);
    }
}
