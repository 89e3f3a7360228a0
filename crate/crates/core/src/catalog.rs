//! The group catalog: charts, group laws, inverses, structure constants and
//! covering projections for every connected Lie group of dimension at most
//! three.
//!
//! Most three-dimensional members are semidirect products `R^2 ⋊_A R` with the
//! law `(x,y,z) * (x',y',z') = ((x,y) + e^{zA}(x',y'), z+z')`; the matrix `A`
//! determines the family. The Heisenberg group uses symmetric coordinates with
//! the law `(x,y,z)·(x',y',z') = (x+x', y+y', z+z'+2yx'-2xy')`, and the
//! rotation groups are charted by unit quaternions. `SL2~` and `PSL2_k` carry
//! no chart: they participate in the classification only.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{GeomError, Result};

/// Entries of `A` matching a named family up to this tolerance normalize to it.
const NORMALIZE_TOL: f64 = 1e-12;
/// Threshold on |tr^2 - 4 det| below which `mat_exp_2x2` switches to the
/// repeated-eigenvalue limit formula.
pub const DISCRIMINANT_TOL: f64 = 1e-9;

/// Catalog family, with parameters where the family is a one-parameter strip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `R^n` for n = 1, 2, 3.
    R(u8),
    /// `T^n = (R/Z)^n` for n = 1, 2, 3.
    T(u8),
    RxT1,
    RxT2,
    R2xT1,
    /// Heisenberg group in symmetric coordinates.
    N3,
    /// Quotient of `N3` by the central subgroup generated by (0,0,1).
    N3Star,
    /// Universal cover of the Euclidean motion group.
    Se2Tilde,
    /// k-fold cover of SE(2); the angle coordinate has period 2*pi*k.
    Se2K(u32),
    /// Orientation-preserving affine maps of the line, chart (x, z).
    AffR,
    AffRxR,
    AffRxT1,
    /// `R^2 ⋊_A R` with A = [[1,1],[0,1]].
    J,
    /// `R^2 ⋊_A R` with A = diag(1, lambda), lambda in [-1,0) ∪ (0,1].
    DLambda(f64),
    /// `R^2 ⋊_A R` with A = [[lambda,1],[-1,lambda]], lambda > 0.
    CLambda(f64),
    Su2,
    So3,
    /// Universal cover of SL(2,R); classification-only, no chart.
    Sl2Tilde,
    /// k-fold cover of PSL(2,R); classification-only, no chart.
    Psl2K(u32),
    /// Generic semidirect product `R^2 ⋊_A R`.
    Semidirect(Matrix2<f64>),
}

/// A validated catalog group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupSpec {
    family: Family,
}

/// Chart data: dimension and per-coordinate periods. Quaternion charts are
/// four-dimensional with a unit-norm constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chart {
    pub dim: usize,
    pub periods: [Option<f64>; 4],
    pub quaternion: bool,
}

impl Chart {
    fn linear(dim: usize) -> Self {
        Chart { dim, periods: [None; 4], quaternion: false }
    }

    fn with_periods(dim: usize, periods: &[(usize, f64)]) -> Self {
        let mut p = [None; 4];
        for &(i, v) in periods {
            p[i] = Some(v);
        }
        Chart { dim, periods: p, quaternion: false }
    }

    fn quaternionic() -> Self {
        Chart { dim: 4, periods: [None; 4], quaternion: true }
    }
}

/// Point of a chart. Stores up to four coordinates inline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement {
    n: u8,
    c: [f64; 4],
}

impl GroupElement {
    pub fn new(coords: &[f64]) -> Result<Self> {
        if coords.is_empty() || coords.len() > 4 {
            return Err(GeomError::BadElement(format!(
                "expected 1..=4 coordinates, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(GeomError::BadElement("non-finite coordinate".into()));
        }
        let mut c = [0.0; 4];
        c[..coords.len()].copy_from_slice(coords);
        Ok(GroupElement { n: coords.len() as u8, c })
    }

    /// Like [`GroupElement::new`] but panics on invalid input; for literals.
    pub fn from_coords(coords: &[f64]) -> Self {
        Self::new(coords).expect("valid coordinates")
    }

    pub fn dim(&self) -> usize {
        self.n as usize
    }

    pub fn coords(&self) -> &[f64] {
        &self.c[..self.n as usize]
    }

    pub(crate) fn raw(&self) -> [f64; 4] {
        self.c
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Structure constants `c^k_ij` of the Lie algebra in an ordered basis,
/// antisymmetric in (i, j). Lower-dimensional algebras are zero-padded.
#[derive(Debug, Clone, Copy)]
pub struct LieAlgebraData {
    pub dim: usize,
    c: [[[f64; 3]; 3]; 3],
}

impl LieAlgebraData {
    fn zero(dim: usize) -> Self {
        LieAlgebraData { dim, c: [[[0.0; 3]; 3]; 3] }
    }

    fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.c[i][j][k] = v;
        self.c[j][i][k] = -v;
    }

    /// Coefficient of `E_k` in `[E_i, E_j]`.
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[i][j][k]
    }

    /// `[E_i, E_j]` as a coefficient vector.
    pub fn bracket(&self, i: usize, j: usize) -> [f64; 3] {
        self.c[i][j]
    }

    /// Largest absolute defect of the Jacobi identity over all index triples.
    pub fn jacobi_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let mut s = 0.0;
                        for m in 0..3 {
                            s += self.c[i][j][m] * self.c[m][k][l]
                                + self.c[j][k][m] * self.c[m][i][l]
                                + self.c[k][i][m] * self.c[m][j][l];
                        }
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }
}

// ---------------------------------------------------------------------------
// Quaternion helpers (w, x, y, z)
// ---------------------------------------------------------------------------

pub(crate) fn quat_mul(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

pub(crate) fn quat_conj(a: &[f64; 4]) -> [f64; 4] {
    [a[0], -a[1], -a[2], -a[3]]
}

fn quat_renorm(a: &mut [f64; 4]) -> Result<()> {
    let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2] + a[3] * a[3]).sqrt();
    if n < 1e-9 || !n.is_finite() {
        return Err(GeomError::BadElement("quaternion norm too far from 1".into()));
    }
    for v in a.iter_mut() {
        *v /= n;
    }
    Ok(())
}

/// Fix the sign ambiguity of SO(3) representatives: first coordinate whose
/// magnitude exceeds 1e-9 is made positive.
fn quat_fix_sign(a: &mut [f64; 4]) {
    for v in *a {
        if v.abs() > 1e-9 {
            if v < 0.0 {
                for w in a.iter_mut() {
                    *w = -*w;
                }
            }
            return;
        }
    }
}

// ---------------------------------------------------------------------------
// 2x2 matrix exponential
// ---------------------------------------------------------------------------

/// Closed-form `e^{zA}` for a real 2x2 matrix, split on the discriminant of
/// the characteristic polynomial with a limit formula near repeated
/// eigenvalues.
pub fn mat_exp_2x2(a: &Matrix2<f64>, z: f64) -> Matrix2<f64> {
    mat_exp_2x2_with_threshold(a, z, DISCRIMINANT_TOL)
}

pub fn mat_exp_2x2_with_threshold(a: &Matrix2<f64>, z: f64, threshold: f64) -> Matrix2<f64> {
    let tr = a.m11 + a.m22;
    let det = a.m11 * a.m22 - a.m12 * a.m21;
    let disc = tr * tr - 4.0 * det;
    let half = 0.5 * tr;
    // B = A - (tr/2) I is traceless with B^2 = (disc/4) I.
    let b = a - Matrix2::identity() * half;
    let scale = (z * half).exp();
    let e = if disc > threshold {
        let mu = 0.5 * disc.sqrt();
        let (ch, sh) = ((z * mu).cosh(), (z * mu).sinh());
        Matrix2::identity() * ch + b * (sh / mu)
    } else if disc < -threshold {
        let om = 0.5 * (-disc).sqrt();
        let (c, s) = ((z * om).cos(), (z * om).sin());
        Matrix2::identity() * c + b * (s / om)
    } else {
        Matrix2::identity() + b * z
    };
    e * scale
}

// ---------------------------------------------------------------------------
// GroupSpec
// ---------------------------------------------------------------------------

impl GroupSpec {
    pub fn new(family: Family) -> Result<Self> {
        match family {
            Family::R(n) | Family::T(n) if n == 0 || n > 3 => {
                Err(GeomError::InvalidSpec(format!("dimension {n} out of range")))
            }
            Family::DLambda(l) if !((-1.0..0.0).contains(&l) || (0.0 < l && l <= 1.0)) => Err(
                GeomError::InvalidSpec(format!("D requires lambda in [-1,0) or (0,1], got {l}")),
            ),
            Family::CLambda(l) if l <= 0.0 || !l.is_finite() => {
                Err(GeomError::InvalidSpec(format!("C requires lambda > 0, got {l}")))
            }
            Family::Se2K(k) | Family::Psl2K(k) if k == 0 => {
                Err(GeomError::InvalidSpec("k must be a positive integer".into()))
            }
            Family::Semidirect(a) if !a.iter().all(|v| v.is_finite()) => {
                Err(GeomError::InvalidSpec("matrix entries must be finite".into()))
            }
            _ => Ok(GroupSpec { family }),
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Whether the group carries a coordinate chart. `SL2~` and `PSL2_k`
    /// enter the classification through their Lie algebras only.
    pub fn chartable(&self) -> bool {
        !matches!(self.family, Family::Sl2Tilde | Family::Psl2K(_))
    }

    pub fn chart(&self) -> Result<Chart> {
        use Family::*;
        Ok(match self.family {
            R(n) => Chart::linear(n as usize),
            T(n) => {
                let mut p = [None; 4];
                for q in p.iter_mut().take(n as usize) {
                    *q = Some(1.0);
                }
                Chart { dim: n as usize, periods: p, quaternion: false }
            }
            RxT1 => Chart::with_periods(2, &[(1, 1.0)]),
            RxT2 => Chart::with_periods(3, &[(1, 1.0), (2, 1.0)]),
            R2xT1 => Chart::with_periods(3, &[(2, 1.0)]),
            N3 | Se2Tilde | AffRxR | J | DLambda(_) | CLambda(_) | Semidirect(_) => {
                Chart::linear(3)
            }
            N3Star => Chart::with_periods(3, &[(2, 1.0)]),
            Se2K(k) => Chart::with_periods(3, &[(2, 2.0 * std::f64::consts::PI * k as f64)]),
            AffR => Chart::linear(2),
            AffRxT1 => Chart::with_periods(3, &[(1, 1.0)]),
            Su2 | So3 => Chart::quaternionic(),
            Sl2Tilde | Psl2K(_) => {
                return Err(GeomError::UnsupportedChart(self.to_string()));
            }
        })
    }

    /// Manifold dimension (three for quaternion charts too).
    pub fn dim(&self) -> usize {
        use Family::*;
        match self.family {
            R(n) | T(n) => n as usize,
            RxT1 | AffR => 2,
            Su2 | So3 | Sl2Tilde | Psl2K(_) => 3,
            _ => 3,
        }
    }

    /// The matrix `A` when the group law is the semidirect form on `R^3`.
    pub(crate) fn semidirect_matrix(&self) -> Option<Matrix2<f64>> {
        use Family::*;
        Some(match self.family {
            Se2Tilde | Se2K(_) => Matrix2::new(0.0, -1.0, 1.0, 0.0),
            AffRxR | AffRxT1 => Matrix2::new(1.0, 0.0, 0.0, 0.0),
            J => Matrix2::new(1.0, 1.0, 0.0, 1.0),
            DLambda(l) => Matrix2::new(1.0, 0.0, 0.0, l),
            CLambda(l) => Matrix2::new(l, 1.0, -1.0, l),
            Semidirect(a) => a,
            _ => return None,
        })
    }

    /// Replace a generic matrix spec by the named family it matches exactly.
    /// Idempotent; specs other than `A:[[..]]` are returned unchanged.
    pub fn normalize(&self) -> GroupSpec {
        let Family::Semidirect(a) = self.family else {
            return *self;
        };
        let close = |x: f64, y: f64| (x - y).abs() <= NORMALIZE_TOL;
        let fam = if a.iter().all(|v| v.abs() <= NORMALIZE_TOL) {
            Family::R(3)
        } else if close(a.m11, 1.0) && close(a.m12, 1.0) && close(a.m21, 0.0) && close(a.m22, 1.0) {
            Family::J
        } else if close(a.m11, 1.0)
            && close(a.m12, 0.0)
            && close(a.m21, 0.0)
            && ((-1.0..0.0).contains(&a.m22) || (0.0 < a.m22 && a.m22 <= 1.0))
        {
            Family::DLambda(a.m22)
        } else if close(a.m12, 1.0) && close(a.m21, -1.0) && close(a.m11, a.m22) && a.m11 > 0.0 {
            Family::CLambda(a.m11)
        } else if close(a.m11, 0.0) && close(a.m12, -1.0) && close(a.m21, 1.0) && close(a.m22, 0.0)
        {
            Family::Se2Tilde
        } else if close(a.m11, 1.0) && close(a.m12, 0.0) && close(a.m21, 0.0) && close(a.m22, 0.0) {
            Family::AffRxR
        } else {
            return *self;
        };
        GroupSpec { family: fam }
    }

    fn check_element(&self, p: &GroupElement) -> Result<Chart> {
        let chart = self.chart()?;
        if p.dim() != chart.dim {
            return Err(GeomError::BadElement(format!(
                "{} expects {} coordinates, element has {}",
                self, chart.dim, p.dim()
            )));
        }
        Ok(chart)
    }

    pub fn identity(&self) -> GroupElement {
        match self.family {
            Family::Su2 | Family::So3 => GroupElement::from_coords(&[1.0, 0.0, 0.0, 0.0]),
            _ => {
                let d = self.chart().map(|c| c.dim).unwrap_or(3);
                GroupElement { n: d as u8, c: [0.0; 4] }
            }
        }
    }

    /// Wrap periodic coordinates into [0, period); renormalize quaternions.
    pub fn normalize_coords(&self, p: &GroupElement) -> Result<GroupElement> {
        let chart = self.check_element(p)?;
        let mut c = p.raw();
        if chart.quaternion {
            quat_renorm(&mut c)?;
            if self.family == Family::So3 {
                quat_fix_sign(&mut c);
            }
        } else {
            for i in 0..chart.dim {
                if let Some(t) = chart.periods[i] {
                    c[i] = c[i].rem_euclid(t);
                    // rem_euclid can round to the period itself
                    if c[i] >= t {
                        c[i] -= t;
                    }
                }
            }
        }
        Ok(GroupElement { n: chart.dim as u8, c })
    }

    pub fn multiply(&self, p: &GroupElement, q: &GroupElement) -> Result<GroupElement> {
        let chart = self.check_element(p)?;
        self.check_element(q)?;
        let (a, b) = (p.raw(), q.raw());
        let mut c = [0.0; 4];
        match self.family {
            Family::R(_) | Family::T(_) | Family::RxT1 | Family::RxT2 | Family::R2xT1 => {
                for i in 0..chart.dim {
                    c[i] = a[i] + b[i];
                }
            }
            Family::N3 | Family::N3Star => {
                c[0] = a[0] + b[0];
                c[1] = a[1] + b[1];
                c[2] = a[2] + b[2] + 2.0 * a[1] * b[0] - 2.0 * a[0] * b[1];
            }
            Family::AffR => {
                c[0] = a[0] + a[1].exp() * b[0];
                c[1] = a[1] + b[1];
            }
            Family::Su2 | Family::So3 => {
                c = quat_mul(&a, &b);
            }
            _ => {
                let m = self
                    .semidirect_matrix()
                    .expect("covered by remaining chartable families");
                let e = mat_exp_2x2(&m, a[2]);
                c[0] = a[0] + e.m11 * b[0] + e.m12 * b[1];
                c[1] = a[1] + e.m21 * b[0] + e.m22 * b[1];
                c[2] = a[2] + b[2];
            }
        }
        self.normalize_coords(&GroupElement { n: chart.dim as u8, c })
    }

    pub fn inverse(&self, p: &GroupElement) -> Result<GroupElement> {
        let chart = self.check_element(p)?;
        let a = p.raw();
        let mut c = [0.0; 4];
        match self.family {
            Family::R(_) | Family::T(_) | Family::RxT1 | Family::RxT2 | Family::R2xT1 => {
                for i in 0..chart.dim {
                    c[i] = -a[i];
                }
            }
            Family::N3 | Family::N3Star => {
                c = [-a[0], -a[1], -a[2], 0.0];
            }
            Family::AffR => {
                c[0] = -(-a[1]).exp() * a[0];
                c[1] = -a[1];
            }
            Family::Su2 | Family::So3 => {
                c = quat_conj(&a);
            }
            _ => {
                let m = self.semidirect_matrix().expect("semidirect family");
                let e = mat_exp_2x2(&m, -a[2]);
                c[0] = -(e.m11 * a[0] + e.m12 * a[1]);
                c[1] = -(e.m21 * a[0] + e.m22 * a[1]);
                c[2] = -a[2];
            }
        }
        self.normalize_coords(&GroupElement { n: chart.dim as u8, c })
    }

    /// Structure constants of the Lie algebra in the catalog basis.
    ///
    /// For the semidirect families the basis is chosen so that the nonzero
    /// constants with i <= j reproduce the matrix `A` exactly, i.e.
    /// `[E_1,E_3] = A11 E1 + A21 E2` and `[E_2,E_3] = A12 E1 + A22 E2`.
    /// For `SL2~`/`PSL2_k` the basis is {E, F, H} of sl(2).
    pub fn structure_constants(&self) -> LieAlgebraData {
        use Family::*;
        match self.family {
            R(n) | T(n) => LieAlgebraData::zero(n as usize),
            RxT1 => LieAlgebraData::zero(2),
            RxT2 | R2xT1 => LieAlgebraData::zero(3),
            AffR => {
                let mut d = LieAlgebraData::zero(2);
                d.set(0, 1, 0, 1.0);
                d
            }
            N3 | N3Star => {
                let mut d = LieAlgebraData::zero(3);
                d.set(0, 1, 2, -4.0);
                d
            }
            Su2 | So3 => {
                let mut d = LieAlgebraData::zero(3);
                d.set(0, 1, 2, 2.0);
                d.set(1, 2, 0, 2.0);
                d.set(2, 0, 1, 2.0);
                d
            }
            Sl2Tilde | Psl2K(_) => {
                let mut d = LieAlgebraData::zero(3);
                d.set(0, 1, 2, 1.0);
                d.set(0, 2, 0, -2.0);
                d.set(1, 2, 1, 2.0);
                d
            }
            _ => {
                let a = self.semidirect_matrix().expect("semidirect family");
                let mut d = LieAlgebraData::zero(3);
                d.set(0, 2, 0, a.m11);
                d.set(0, 2, 1, a.m21);
                d.set(1, 2, 0, a.m12);
                d.set(1, 2, 1, a.m22);
                d
            }
        }
    }

    /// Minimal per-coordinate difference `b - a`, taking each periodic
    /// coordinate to its nearest representative. Quaternion charts compare up
    /// to sign for SO(3).
    pub fn wrap_delta(&self, a: &GroupElement, b: &GroupElement) -> Result<Vec<f64>> {
        let chart = self.check_element(a)?;
        self.check_element(b)?;
        let (x, mut y) = (a.raw(), b.raw());
        if chart.quaternion {
            if self.family == Family::So3 {
                let dot: f64 = (0..4).map(|i| x[i] * y[i]).sum();
                if dot < 0.0 {
                    for v in y.iter_mut() {
                        *v = -*v;
                    }
                }
            }
            return Ok((0..4).map(|i| y[i] - x[i]).collect());
        }
        let mut out = Vec::with_capacity(chart.dim);
        for i in 0..chart.dim {
            let mut d = y[i] - x[i];
            if let Some(t) = chart.periods[i] {
                d = d.rem_euclid(t);
                if d > 0.5 * t {
                    d -= t;
                }
            }
            out.push(d);
        }
        Ok(out)
    }

    /// Max-norm distance between chart points modulo periods.
    pub fn chart_gap(&self, a: &GroupElement, b: &GroupElement) -> Result<f64> {
        Ok(self
            .wrap_delta(a, b)?
            .iter()
            .fold(0.0f64, |m, d| m.max(d.abs())))
    }
}

/// Project an element of a covering group to the listed quotient.
///
/// Supported pairs: `SE2~ -> SE2_k`, `N3 -> N3*`, `R^n` onto torus products of
/// the same dimension, and `SU2 -> SO3`.
pub fn covering_projection(
    total: &GroupSpec,
    base: &GroupSpec,
    p: &GroupElement,
) -> Result<GroupElement> {
    use Family::*;
    let ok = match (total.family(), base.family()) {
        (Se2Tilde, Se2K(_)) => true,
        (N3, N3Star) => true,
        (Su2, So3) => true,
        (R(1), T(1)) => true,
        (R(2), T(2)) | (R(2), RxT1) => true,
        (R(3), T(3)) | (R(3), RxT2) | (R(3), R2xT1) => true,
        _ => false,
    };
    if !ok {
        return Err(GeomError::NotACovering(total.to_string(), base.to_string()));
    }
    total.check_element(p)?;
    base.normalize_coords(p)
}

// ---------------------------------------------------------------------------
// Spec string grammar
// ---------------------------------------------------------------------------

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.family.fmt(f)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Family::*;
        match self {
            R(n) => write!(f, "R^{n}"),
            T(n) => write!(f, "T^{n}"),
            RxT1 => write!(f, "RxT1"),
            RxT2 => write!(f, "RxT2"),
            R2xT1 => write!(f, "R2xT1"),
            N3 => write!(f, "N3"),
            N3Star => write!(f, "N3*"),
            Se2Tilde => write!(f, "SE2~"),
            Se2K(k) => write!(f, "SE2:k={k}"),
            AffR => write!(f, "AffR"),
            AffRxR => write!(f, "AffRxR"),
            AffRxT1 => write!(f, "AffRxT1"),
            J => write!(f, "J"),
            DLambda(l) => write!(f, "D:lambda={l}"),
            CLambda(l) => write!(f, "C:lambda={l}"),
            Su2 => write!(f, "SU2"),
            So3 => write!(f, "SO3"),
            Sl2Tilde => write!(f, "SL2~"),
            Psl2K(k) => write!(f, "PSL2:k={k}"),
            Semidirect(a) => write!(f, "A:[[{},{}],[{},{}]]", a.m11, a.m12, a.m21, a.m22),
        }
    }
}

impl FromStr for GroupSpec {
    type Err = GeomError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || GeomError::InvalidSpec(s.to_string());
        let fam = match s {
            "R^1" => Family::R(1),
            "R^2" => Family::R(2),
            "R^3" => Family::R(3),
            "T^1" => Family::T(1),
            "T^2" => Family::T(2),
            "T^3" => Family::T(3),
            "RxT1" => Family::RxT1,
            "RxT2" => Family::RxT2,
            "R2xT1" => Family::R2xT1,
            "N3" => Family::N3,
            "N3*" => Family::N3Star,
            "SE2~" => Family::Se2Tilde,
            "AffR" => Family::AffR,
            "AffRxR" => Family::AffRxR,
            "AffRxT1" => Family::AffRxT1,
            "J" => Family::J,
            "SU2" => Family::Su2,
            "SO3" => Family::So3,
            "SL2~" => Family::Sl2Tilde,
            _ => {
                if let Some(rest) = s.strip_prefix("SE2:k=") {
                    Family::Se2K(rest.parse().map_err(|_| bad())?)
                } else if let Some(rest) = s.strip_prefix("PSL2:k=") {
                    Family::Psl2K(rest.parse().map_err(|_| bad())?)
                } else if let Some(rest) = s.strip_prefix("D:lambda=") {
                    Family::DLambda(rest.parse().map_err(|_| bad())?)
                } else if let Some(rest) = s.strip_prefix("C:lambda=") {
                    Family::CLambda(rest.parse().map_err(|_| bad())?)
                } else if let Some(rest) = s.strip_prefix("A:") {
                    Family::Semidirect(parse_matrix(rest).ok_or_else(bad)?)
                } else {
                    return Err(bad());
                }
            }
        };
        GroupSpec::new(fam)
    }
}

fn parse_matrix(s: &str) -> Option<Matrix2<f64>> {
    let inner = s
        .trim()
        .strip_prefix("[[")?
        .strip_suffix("]]")?
        .replace("],[", ",");
    let vals: Vec<f64> = inner
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .ok()?;
    if vals.len() != 4 {
        return None;
    }
    Some(Matrix2::new(vals[0], vals[1], vals[2], vals[3]))
}

// Serialize specs as their grammar strings.
impl Serialize for GroupSpec {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GroupSpec {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One spec per catalog family, with canonical parameter choices. Used by the
/// classification matrix and by the property suites.
pub fn catalog_representatives() -> Vec<GroupSpec> {
    [
        "R^1", "T^1", "R^2", "T^2", "RxT1", "AffR", "R^3", "T^3", "RxT2", "R2xT1", "N3", "N3*",
        "SU2", "SO3", "SL2~", "PSL2:k=1", "PSL2:k=2", "SE2~", "SE2:k=1", "SE2:k=2", "J", "D:lambda=1",
        "D:lambda=0.5", "D:lambda=-0.5", "D:lambda=-1", "C:lambda=1", "C:lambda=2", "AffRxR",
        "AffRxT1",
    ]
    .iter()
    .map(|s| s.parse().expect("valid representative"))
    .collect()
}
