//! Concrete group and algebra arithmetic for the supported compact families:
//! tori U(1)^d, SU(2), U(d) and finite products of these.
//!
//! Elements of the complexified group are stored per factor, either as a
//! vector of nonzero complex scalars (torus) or as an invertible complex
//! matrix. The Borel subgroup is fixed upper triangular throughout, so the
//! Iwasawa decomposition g = k·exp(α)·n is a phase-corrected QR factorization.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Condition-number guard: inputs worse than this are rejected as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

/// One direct factor of a product group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupAtom {
    Torus(usize),
    Su2,
    Unitary(usize),
}

impl GroupAtom {
    /// Dimension of the matrix (or phase vector) carrying this factor.
    pub fn ambient_dim(&self) -> usize {
        match self {
            GroupAtom::Torus(d) => *d,
            GroupAtom::Su2 => 2,
            GroupAtom::Unitary(d) => *d,
        }
    }

    /// Dimension of the Cartan data (diagonal coordinates) of this factor.
    pub fn cartan_dim(&self) -> usize {
        self.ambient_dim()
    }

    pub fn is_matrix(&self) -> bool {
        !matches!(self, GroupAtom::Torus(_))
    }
}

/// A concrete compact group: an ordered product of torus, SU(2) and U(d) atoms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub factors: Vec<GroupAtom>,
}

impl GroupSpec {
    pub fn new(factors: Vec<GroupAtom>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Config("group must have at least one factor".into()));
        }
        for f in &factors {
            if f.ambient_dim() == 0 {
                return Err(Error::Config("factor dimension must be >= 1".into()));
            }
        }
        Ok(GroupSpec { factors })
    }

    pub fn single(atom: GroupAtom) -> Self {
        GroupSpec { factors: vec![atom] }
    }

    /// Total Cartan dimension (length of concatenated diagonal coordinates).
    pub fn cartan_dim(&self) -> usize {
        self.factors.iter().map(|f| f.cartan_dim()).sum()
    }

    /// Real dimension of the compact group K.
    pub fn compact_dim(&self) -> usize {
        self.factors
            .iter()
            .map(|f| match f {
                GroupAtom::Torus(d) => *d,
                GroupAtom::Su2 => 3,
                GroupAtom::Unitary(d) => d * d,
            })
            .sum()
    }
}

/// Per-factor payload of a group element.
#[derive(Debug, Clone, PartialEq)]
pub enum Factor {
    /// Torus factor: nonzero complex scalars, one per circle.
    Phases(DVector<C64>),
    /// Matrix factor (SU(2) or U(d)): an invertible complex matrix.
    Matrix(DMatrix<C64>),
}

/// An element of the complexified group G (contains K as the unitary ones).
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    pub spec: GroupSpec,
    pub factors: Vec<Factor>,
}

/// Element of i𝔨: per factor a Hermitian matrix or a real vector.
#[derive(Debug, Clone, PartialEq)]
pub enum AlgFactor {
    Vector(DVector<f64>),
    Hermitian(DMatrix<C64>),
}

/// ξ ∈ i𝔨 under the trace/dot identification. `DualVector` shares this shape.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraVector {
    pub spec: GroupSpec,
    pub factors: Vec<AlgFactor>,
}

/// x ∈ i𝔨*, concretely identical to an algebra vector via the trace pairing.
pub type DualVector = AlgebraVector;

/// α ∈ 𝔞: real diagonal coordinates per factor.
#[derive(Debug, Clone, PartialEq)]
pub struct CartanVector {
    pub spec: GroupSpec,
    pub factors: Vec<DVector<f64>>,
}

/// Result of the Iwasawa decomposition g = k·exp(α)·n.
#[derive(Debug, Clone)]
pub struct IwasawaFactors {
    pub k: GroupElement,
    pub alpha: CartanVector,
    pub n: GroupElement,
}

pub(crate) fn mat_inf_norm(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    mat_inf_norm(&(m - m.adjoint()))
}

impl GroupElement {
    pub fn identity(spec: &GroupSpec) -> Self {
        let factors = spec
            .factors
            .iter()
            .map(|f| match f {
                GroupAtom::Torus(d) => Factor::Phases(DVector::from_element(*d, C64::new(1.0, 0.0))),
                a => Factor::Matrix(DMatrix::identity(a.ambient_dim(), a.ambient_dim())),
            })
            .collect();
        GroupElement { spec: spec.clone(), factors }
    }

    pub fn from_single_matrix(spec: &GroupSpec, m: DMatrix<C64>) -> Result<Self> {
        if spec.factors.len() != 1 || !spec.factors[0].is_matrix() {
            return Err(Error::MismatchedGroup("expected a single matrix factor".into()));
        }
        let d = spec.factors[0].ambient_dim();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::MismatchedGroup(format!(
                "matrix is {}x{}, factor needs {}x{}",
                m.nrows(),
                m.ncols(),
                d,
                d
            )));
        }
        Ok(GroupElement { spec: spec.clone(), factors: vec![Factor::Matrix(m)] })
    }

    /// Componentwise conjugate transpose (the Cartan star g ↦ g*).
    pub fn star(&self) -> GroupElement {
        let factors = self
            .factors
            .iter()
            .map(|f| match f {
                Factor::Phases(v) => Factor::Phases(v.map(|z| z.conj())),
                Factor::Matrix(m) => Factor::Matrix(m.adjoint()),
            })
            .collect();
        GroupElement { spec: self.spec.clone(), factors }
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        assert_eq!(self.spec, other.spec, "group mismatch in multiplication");
        let factors = self
            .factors
            .iter()
            .zip(&other.factors)
            .map(|(a, b)| match (a, b) {
                (Factor::Phases(x), Factor::Phases(y)) => Factor::Phases(x.component_mul(y)),
                (Factor::Matrix(x), Factor::Matrix(y)) => Factor::Matrix(x * y),
                _ => unreachable!("factor kind mismatch"),
            })
            .collect();
        GroupElement { spec: self.spec.clone(), factors }
    }

    pub fn inverse(&self) -> Result<GroupElement> {
        let mut factors = Vec::with_capacity(self.factors.len());
        for (i, f) in self.factors.iter().enumerate() {
            match f {
                Factor::Phases(v) => {
                    if v.iter().any(|z| z.norm() == 0.0) {
                        return Err(Error::SingularInput { factor: i, cond: f64::INFINITY, limit: CONDITION_LIMIT });
                    }
                    factors.push(Factor::Phases(v.map(|z| z.inv())));
                }
                Factor::Matrix(m) => {
                    let inv = m.clone().try_inverse().ok_or(Error::SingularInput {
                        factor: i,
                        cond: f64::INFINITY,
                        limit: CONDITION_LIMIT,
                    })?;
                    factors.push(Factor::Matrix(inv));
                }
            }
        }
        Ok(GroupElement { spec: self.spec.clone(), factors })
    }

    /// Max entrywise deviation from unitarity over all factors.
    pub fn unitarity_error(&self) -> f64 {
        self.factors
            .iter()
            .map(|f| match f {
                Factor::Phases(v) => v.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max),
                Factor::Matrix(m) => {
                    let d = m.nrows();
                    mat_inf_norm(&(m.adjoint() * m - DMatrix::<C64>::identity(d, d)))
                }
            })
            .fold(0.0, f64::max)
    }

    /// Max entrywise distance to another element.
    pub fn distance(&self, other: &GroupElement) -> f64 {
        self.factors
            .iter()
            .zip(&other.factors)
            .map(|(a, b)| match (a, b) {
                (Factor::Phases(x), Factor::Phases(y)) => {
                    (x - y).iter().map(|z| z.norm()).fold(0.0, f64::max)
                }
                (Factor::Matrix(x), Factor::Matrix(y)) => mat_inf_norm(&(x - y)),
                _ => unreachable!(),
            })
            .fold(0.0, f64::max)
    }

    /// Max entrywise magnitude over all factors.
    pub fn inf_norm(&self) -> f64 {
        self.factors
            .iter()
            .map(|f| match f {
                Factor::Phases(v) => v.iter().map(|z| z.norm()).fold(0.0, f64::max),
                Factor::Matrix(m) => mat_inf_norm(m),
            })
            .fold(0.0, f64::max)
    }
}

impl AlgebraVector {
    pub fn zero(spec: &GroupSpec) -> Self {
        let factors = spec
            .factors
            .iter()
            .map(|f| match f {
                GroupAtom::Torus(d) => AlgFactor::Vector(DVector::zeros(*d)),
                a => AlgFactor::Hermitian(DMatrix::zeros(a.ambient_dim(), a.ambient_dim())),
            })
            .collect();
        AlgebraVector { spec: spec.clone(), factors }
    }

    /// Builds an algebra vector, checking Hermiticity of the matrix factors.
    pub fn new(spec: &GroupSpec, factors: Vec<AlgFactor>) -> Result<Self> {
        if factors.len() != spec.factors.len() {
            return Err(Error::MismatchedGroup("factor count mismatch".into()));
        }
        for (atom, f) in spec.factors.iter().zip(&factors) {
            match (atom, f) {
                (GroupAtom::Torus(d), AlgFactor::Vector(v)) => {
                    if v.len() != *d {
                        return Err(Error::MismatchedGroup("torus factor length mismatch".into()));
                    }
                }
                (a, AlgFactor::Hermitian(m)) if a.is_matrix() => {
                    let d = a.ambient_dim();
                    if m.nrows() != d || m.ncols() != d {
                        return Err(Error::MismatchedGroup("matrix factor size mismatch".into()));
                    }
                    let dev = hermitian_deviation(m);
                    if dev > 1e-12 * (1.0 + mat_inf_norm(m)) {
                        return Err(Error::NotHermitian(dev));
                    }
                }
                _ => return Err(Error::MismatchedGroup("factor kind mismatch".into())),
            }
        }
        Ok(AlgebraVector { spec: spec.clone(), factors })
    }

    pub fn from_single_matrix(spec: &GroupSpec, m: DMatrix<C64>) -> Result<Self> {
        AlgebraVector::new(spec, vec![AlgFactor::Hermitian(m)])
    }

    pub fn scale(&self, t: f64) -> AlgebraVector {
        let factors = self
            .factors
            .iter()
            .map(|f| match f {
                AlgFactor::Vector(v) => AlgFactor::Vector(v * t),
                AlgFactor::Hermitian(m) => AlgFactor::Hermitian(m.map(|z| z * t)),
            })
            .collect();
        AlgebraVector { spec: self.spec.clone(), factors }
    }

    pub fn add(&self, other: &AlgebraVector) -> AlgebraVector {
        let factors = self
            .factors
            .iter()
            .zip(&other.factors)
            .map(|(a, b)| match (a, b) {
                (AlgFactor::Vector(x), AlgFactor::Vector(y)) => AlgFactor::Vector(x + y),
                (AlgFactor::Hermitian(x), AlgFactor::Hermitian(y)) => AlgFactor::Hermitian(x + y),
                _ => unreachable!(),
            })
            .collect();
        AlgebraVector { spec: self.spec.clone(), factors }
    }

    /// Max entrywise magnitude.
    pub fn inf_norm(&self) -> f64 {
        self.factors
            .iter()
            .map(|f| match f {
                AlgFactor::Vector(v) => v.iter().map(|x| x.abs()).fold(0.0, f64::max),
                AlgFactor::Hermitian(m) => mat_inf_norm(m),
            })
            .fold(0.0, f64::max)
    }

    /// Trace-norm (sum of singular values); used for state-space distances.
    pub fn trace_norm(&self) -> f64 {
        self.factors
            .iter()
            .map(|f| match f {
                AlgFactor::Vector(v) => v.iter().map(|x| x.abs()).sum::<f64>(),
                AlgFactor::Hermitian(m) => {
                    m.clone().symmetric_eigen().eigenvalues.iter().map(|x| x.abs()).sum()
                }
            })
            .sum()
    }

    pub fn distance_inf(&self, other: &AlgebraVector) -> f64 {
        self.add(&other.scale(-1.0)).inf_norm()
    }
}

impl CartanVector {
    pub fn zero(spec: &GroupSpec) -> Self {
        let factors = spec.factors.iter().map(|f| DVector::zeros(f.cartan_dim())).collect();
        CartanVector { spec: spec.clone(), factors }
    }

    /// Concatenated diagonal coordinates.
    pub fn coords(&self) -> DVector<f64> {
        let n = self.spec.cartan_dim();
        let mut out = DVector::zeros(n);
        let mut off = 0;
        for f in &self.factors {
            out.rows_mut(off, f.len()).copy_from(f);
            off += f.len();
        }
        out
    }

    pub fn from_coords(spec: &GroupSpec, coords: &DVector<f64>) -> Result<Self> {
        if coords.len() != spec.cartan_dim() {
            return Err(Error::MismatchedGroup("cartan coordinate length mismatch".into()));
        }
        let mut factors = Vec::new();
        let mut off = 0;
        for f in &spec.factors {
            let d = f.cartan_dim();
            factors.push(coords.rows(off, d).into_owned());
            off += d;
        }
        Ok(CartanVector { spec: spec.clone(), factors })
    }

    /// Embed as a diagonal algebra vector (ξ ∈ i𝔨 with diagonal matrix factors).
    pub fn to_algebra(&self) -> AlgebraVector {
        let factors = self
            .spec
            .factors
            .iter()
            .zip(&self.factors)
            .map(|(atom, v)| match atom {
                GroupAtom::Torus(_) => AlgFactor::Vector(v.clone()),
                _ => {
                    let d = v.len();
                    let mut m = DMatrix::<C64>::zeros(d, d);
                    for i in 0..d {
                        m[(i, i)] = C64::new(v[i], 0.0);
                    }
                    AlgFactor::Hermitian(m)
                }
            })
            .collect();
        AlgebraVector { spec: self.spec.clone(), factors }
    }

    /// ⟨x0, α⟩ for diagonal data: plain dot product of coordinates.
    pub fn dot(&self, other: &CartanVector) -> f64 {
        self.factors
            .iter()
            .zip(&other.factors)
            .map(|(a, b)| a.dot(b))
            .sum()
    }
}

/// Duality pairing ⟨x, ξ⟩: Re Tr(xξ) per matrix factor, dot product per torus.
/// Panics if a matrix pairing has a non-negligible imaginary part.
pub fn pairing(x: &DualVector, xi: &AlgebraVector) -> f64 {
    assert_eq!(x.spec, xi.spec, "group mismatch in pairing");
    let mut total = 0.0;
    for (a, b) in x.factors.iter().zip(&xi.factors) {
        match (a, b) {
            (AlgFactor::Vector(u), AlgFactor::Vector(v)) => total += u.dot(v),
            (AlgFactor::Hermitian(p), AlgFactor::Hermitian(q)) => {
                let t = (p * q).trace();
                let scale = 1.0 + mat_inf_norm(p) * mat_inf_norm(q);
                assert!(
                    t.im.abs() <= 1e-10 * scale,
                    "trace pairing has imaginary part {:.3e}",
                    t.im
                );
                total += t.re;
            }
            _ => unreachable!(),
        }
    }
    total
}

fn condition_number(m: &DMatrix<C64>) -> f64 {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return f64::INFINITY;
    }
    let svd = match m.clone().try_svd(false, false, f64::EPSILON, 250) {
        Some(s) => s,
        None => return f64::INFINITY,
    };
    let sv = svd.singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn iwasawa_matrix_qr(m: &DMatrix<C64>) -> (DMatrix<C64>, DVector<f64>, DMatrix<C64>) {
    let d = m.nrows();
    let qr = m.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    // Absorb the phases of R's diagonal into Q so that R has positive diagonal.
    for i in 0..d {
        let rii = r[(i, i)];
        let phase = if rii.norm() == 0.0 { C64::new(1.0, 0.0) } else { rii / rii.norm() };
        for j in 0..d {
            q[(j, i)] *= phase;
        }
        let pc = phase.conj();
        for j in i..d {
            r[(i, j)] *= pc;
        }
    }
    // Split R = exp(α)·n with n unit upper triangular.
    let mut alpha = DVector::zeros(d);
    let mut n = DMatrix::<C64>::identity(d, d);
    for i in 0..d {
        let a = r[(i, i)].re;
        alpha[i] = a.ln();
        for j in (i + 1)..d {
            n[(i, j)] = r[(i, j)] / a;
        }
    }
    (q, alpha, n)
}

/// Modified Gram–Schmidt route to the same factorization; kept as an
/// independent cross-check of the QR path.
fn iwasawa_matrix_mgs(m: &DMatrix<C64>) -> (DMatrix<C64>, DVector<f64>, DMatrix<C64>) {
    let d = m.nrows();
    let mut q = m.clone();
    let mut r = DMatrix::<C64>::zeros(d, d);
    for j in 0..d {
        for i in 0..j {
            let qi = q.column(i).into_owned();
            let proj: C64 = qi.dotc(&q.column(j));
            r[(i, j)] = proj;
            let col = q.column(j) - &qi * proj;
            q.set_column(j, &col);
        }
        let norm = q.column(j).norm();
        r[(j, j)] = C64::new(norm, 0.0);
        let col = q.column(j) / C64::new(norm, 0.0);
        q.set_column(j, &col);
    }
    let mut alpha = DVector::zeros(d);
    let mut n = DMatrix::<C64>::identity(d, d);
    for i in 0..d {
        let a = r[(i, i)].re;
        alpha[i] = a.ln();
        for j in (i + 1)..d {
            n[(i, j)] = r[(i, j)] / a;
        }
    }
    (q, alpha, n)
}

fn iwasawa_impl(
    g: &GroupElement,
    matrix_route: fn(&DMatrix<C64>) -> (DMatrix<C64>, DVector<f64>, DMatrix<C64>),
) -> Result<IwasawaFactors> {
    let spec = &g.spec;
    let mut kf = Vec::new();
    let mut af = Vec::new();
    let mut nf = Vec::new();
    for (i, (atom, f)) in spec.factors.iter().zip(&g.factors).enumerate() {
        match f {
            Factor::Phases(v) => {
                let mut phases = DVector::from_element(v.len(), C64::new(1.0, 0.0));
                let mut alpha = DVector::zeros(v.len());
                for (j, z) in v.iter().enumerate() {
                    let r = z.norm();
                    if r == 0.0 || !r.is_finite() {
                        return Err(Error::SingularInput { factor: i, cond: f64::INFINITY, limit: CONDITION_LIMIT });
                    }
                    phases[j] = z / r;
                    alpha[j] = r.ln();
                }
                kf.push(Factor::Phases(phases));
                af.push(alpha);
                nf.push(Factor::Phases(DVector::from_element(v.len(), C64::new(1.0, 0.0))));
            }
            Factor::Matrix(m) => {
                let cond = condition_number(m);
                if !cond.is_finite() || cond > CONDITION_LIMIT {
                    return Err(Error::SingularInput { factor: i, cond, limit: CONDITION_LIMIT });
                }
                let (q, mut alpha, n) = matrix_route(m);
                if matches!(atom, GroupAtom::Su2) {
                    // SL(2,C) input: α must be traceless. Project out the
                    // accumulated rounding and reject genuine violations.
                    let s = alpha.sum();
                    if s.abs() > 1e-8 {
                        return Err(Error::MismatchedGroup(format!(
                            "SU(2) factor has |det| deviating from 1 (trace α = {:.3e})",
                            s
                        )));
                    }
                    let c = s / alpha.len() as f64;
                    alpha.apply(|a| *a -= c);
                }
                kf.push(Factor::Matrix(q));
                af.push(alpha);
                nf.push(Factor::Matrix(n));
            }
        }
    }
    Ok(IwasawaFactors {
        k: GroupElement { spec: spec.clone(), factors: kf },
        alpha: CartanVector { spec: spec.clone(), factors: af },
        n: GroupElement { spec: spec.clone(), factors: nf },
    })
}

/// Iwasawa decomposition g = k·exp(α)·n via phase-corrected QR.
pub fn iwasawa(g: &GroupElement) -> Result<IwasawaFactors> {
    iwasawa_impl(g, iwasawa_matrix_qr)
}

/// Iwasawa decomposition via modified Gram–Schmidt (independent route).
pub fn iwasawa_mgs(g: &GroupElement) -> Result<IwasawaFactors> {
    iwasawa_impl(g, iwasawa_matrix_mgs)
}

impl IwasawaFactors {
    /// Reconstruct k·exp(α)·n.
    pub fn reconstruct(&self) -> GroupElement {
        self.k.mul(&exp_cartan(&self.alpha)).mul(&self.n)
    }
}

/// exp of a Cartan vector: positive diagonal group element.
pub fn exp_cartan(alpha: &CartanVector) -> GroupElement {
    let factors = alpha
        .spec
        .factors
        .iter()
        .zip(&alpha.factors)
        .map(|(atom, v)| match atom {
            GroupAtom::Torus(_) => Factor::Phases(v.map(|a| C64::new(a.exp(), 0.0))),
            _ => {
                let d = v.len();
                let mut m = DMatrix::<C64>::zeros(d, d);
                for i in 0..d {
                    m[(i, i)] = C64::new(v[i].exp(), 0.0);
                }
                Factor::Matrix(m)
            }
        })
        .collect();
    GroupElement { spec: alpha.spec.clone(), factors }
}

/// exp(t·ξ) computed by eigendecomposition of the Hermitian factors.
pub fn exp_alg(xi: &AlgebraVector, t: f64) -> GroupElement {
    let factors = xi
        .factors
        .iter()
        .map(|f| match f {
            AlgFactor::Vector(v) => Factor::Phases(v.map(|a| C64::new((t * a).exp(), 0.0))),
            AlgFactor::Hermitian(m) => {
                let eig = m.clone().symmetric_eigen();
                let d = m.nrows();
                let mut diag = DMatrix::<C64>::zeros(d, d);
                for i in 0..d {
                    diag[(i, i)] = C64::new((t * eig.eigenvalues[i]).exp(), 0.0);
                }
                Factor::Matrix(&eig.eigenvectors * diag * eig.eigenvectors.adjoint())
            }
        })
        .collect();
    GroupElement { spec: xi.spec.clone(), factors }
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

/// Haar sample on the compact group K: Ginibre + phase-corrected QR per
/// matrix factor, uniform phases per torus factor.
pub fn haar_sample<R: Rng + ?Sized>(spec: &GroupSpec, rng: &mut R) -> GroupElement {
    let factors = spec
        .factors
        .iter()
        .map(|atom| match atom {
            GroupAtom::Torus(d) => {
                let v = DVector::from_fn(*d, |_, _| {
                    let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    C64::new(theta.cos(), theta.sin())
                });
                Factor::Phases(v)
            }
            _ => {
                let d = atom.ambient_dim();
                let g = DMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
                let qr = g.qr();
                let mut q = qr.q();
                let r = qr.r();
                // Fix the diagonal phases so that the law is exactly Haar.
                for i in 0..d {
                    let rii = r[(i, i)];
                    let phase = rii / rii.norm();
                    for j in 0..d {
                        q[(j, i)] *= phase;
                    }
                }
                if matches!(atom, GroupAtom::Su2) {
                    let det = q.determinant();
                    let s = det.sqrt();
                    q *= s.conj() / s.norm();
                }
                Factor::Matrix(q)
            }
        })
        .collect();
    GroupElement { spec: spec.clone(), factors }
}

/// Adjoint action of k ∈ K on ξ ∈ i𝔨: per matrix factor kξk*, identity on tori.
pub fn adjoint(k: &GroupElement, xi: &AlgebraVector) -> AlgebraVector {
    assert_eq!(k.spec, xi.spec, "group mismatch in adjoint");
    let factors = k
        .factors
        .iter()
        .zip(&xi.factors)
        .map(|(kf, xf)| match (kf, xf) {
            (Factor::Phases(_), AlgFactor::Vector(v)) => AlgFactor::Vector(v.clone()),
            (Factor::Matrix(u), AlgFactor::Hermitian(m)) => {
                let out = u * m * u.adjoint();
                // Resymmetrize to keep Hermiticity exact under rounding.
                AlgFactor::Hermitian((&out + out.adjoint()).map(|z| z * 0.5))
            }
            _ => unreachable!(),
        })
        .collect();
    AlgebraVector { spec: xi.spec.clone(), factors }
}

/// Coadjoint action of k ∈ K on x ∈ i𝔨*: same concrete formula as `adjoint`
/// under the trace-pairing identification.
pub fn coadjoint(k: &GroupElement, x: &DualVector) -> DualVector {
    adjoint(k, x)
}
