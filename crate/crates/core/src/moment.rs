//! Moment map, Weyl-chamber decomposition, the extended action of the
//! complexified group on i𝔨*, the character χ_x and the non-bilinear pairing.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lie::{
    self, AlgFactor, AlgebraVector, CartanVector, DualVector, Factor, GroupAtom, GroupElement,
    GroupSpec, C64,
};
use crate::repr::{self, RepresentationSpec};

/// Validates ρ as a state: Hermitian, PSD and unit trace to 1e−10.
pub fn check_state(rho: &DMatrix<C64>) -> Result<()> {
    if rho.nrows() != rho.ncols() {
        return Err(Error::NotAState("matrix is not square".into()));
    }
    let dev = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if dev > 1e-10 {
        return Err(Error::NotAState(format!("not Hermitian (deviation {:.3e})", dev)));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
        return Err(Error::NotAState(format!("trace is {:.12} (expected 1)", tr.re)));
    }
    let eigs = rho.clone().symmetric_eigen().eigenvalues;
    let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -1e-10 {
        return Err(Error::NotAState(format!("negative eigenvalue {:.3e}", min)));
    }
    Ok(())
}

/// Smallest eigenvalue of ρ; > 0 means the state is faithful.
pub fn min_eigenvalue(rho: &DMatrix<C64>) -> f64 {
    rho.clone().symmetric_eigen().eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Orthonormal Hermitian basis of a matrix factor under Re Tr(AB); SU(2)
/// factors get the traceless basis only.
fn hermitian_basis(atom: &GroupAtom) -> Vec<DMatrix<C64>> {
    let d = atom.ambient_dim();
    let mut out = Vec::new();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match atom {
        GroupAtom::Su2 => {
            let mut z = DMatrix::<C64>::zeros(2, 2);
            z[(0, 0)] = C64::new(s, 0.0);
            z[(1, 1)] = C64::new(-s, 0.0);
            out.push(z);
        }
        _ => {
            for i in 0..d {
                let mut e = DMatrix::<C64>::zeros(d, d);
                e[(i, i)] = C64::new(1.0, 0.0);
                out.push(e);
            }
        }
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let mut re = DMatrix::<C64>::zeros(d, d);
            re[(i, j)] = C64::new(s, 0.0);
            re[(j, i)] = C64::new(s, 0.0);
            out.push(re);
            let mut im = DMatrix::<C64>::zeros(d, d);
            im[(i, j)] = C64::new(0.0, s);
            im[(j, i)] = C64::new(0.0, -s);
            out.push(im);
        }
    }
    out
}

/// J(ρ): the unique x ∈ i𝔨* with ⟨x, ξ⟩ = Tr(T_eπ(ξ)·ρ) for all ξ.
pub fn moment_map(rep: &RepresentationSpec, spec: &GroupSpec, rho: &DMatrix<C64>) -> Result<DualVector> {
    rep.validate(spec)?;
    check_state(rho)?;
    if rho.nrows() != rep.dimension() {
        return Err(Error::MismatchedGroup(format!(
            "state dimension {} does not match representation dimension {}",
            rho.nrows(),
            rep.dimension()
        )));
    }
    let pair_with = |e: AlgebraVector| -> f64 {
        let d = repr::derived_unchecked(rep, &e);
        (d * rho).trace().re
    };
    let mut factors = Vec::with_capacity(spec.factors.len());
    for (i, atom) in spec.factors.iter().enumerate() {
        match atom {
            GroupAtom::Torus(d) => {
                let mut v = DVector::zeros(*d);
                for a in 0..*d {
                    let mut e = AlgebraVector::zero(spec);
                    if let AlgFactor::Vector(ref mut u) = e.factors[i] {
                        u[a] = 1.0;
                    }
                    v[a] = pair_with(e);
                }
                factors.push(AlgFactor::Vector(v));
            }
            _ => {
                let d = atom.ambient_dim();
                let mut m = DMatrix::<C64>::zeros(d, d);
                for b in hermitian_basis(atom) {
                    let mut e = AlgebraVector::zero(spec);
                    e.factors[i] = AlgFactor::Hermitian(b.clone());
                    let c = pair_with(e);
                    m += b.map(|z| z * c);
                }
                factors.push(AlgFactor::Hermitian(m));
            }
        }
    }
    Ok(AlgebraVector { spec: spec.clone(), factors })
}

/// Chamber decomposition x = h·x0 with x0 the i𝔱*₊ representative.
#[derive(Debug, Clone)]
pub struct ChamberDecomposition {
    pub x0: CartanVector,
    pub h: GroupElement,
}

impl ChamberDecomposition {
    /// x0 embedded back into i𝔨* as a diagonal dual vector.
    pub fn x0_dual(&self) -> DualVector {
        self.x0.to_algebra()
    }

    pub fn reconstruct(&self) -> DualVector {
        lie::coadjoint(&self.h, &self.x0_dual())
    }
}

/// Phase-normalizes an eigenvector so its first nonzero entry is real positive,
/// and returns a lexicographic tie-break key.
fn normalize_column(col: &mut DVector<C64>) -> Vec<f64> {
    let mut phase = C64::new(1.0, 0.0);
    for z in col.iter() {
        if z.norm() > 1e-12 {
            phase = z.conj() / z.norm();
            break;
        }
    }
    for z in col.iter_mut() {
        *z *= phase;
    }
    let mut key = Vec::with_capacity(2 * col.len());
    for z in col.iter() {
        key.push(z.re);
        key.push(z.im);
    }
    key
}

/// Decomposes x ∈ i𝔨* as h·x0 with nonincreasing diagonal x0 per matrix
/// factor; degenerate eigenvalues are ordered deterministically by the
/// phase-normalized eigenvector entries.
pub fn chamber_decompose(x: &DualVector) -> ChamberDecomposition {
    let spec = &x.spec;
    let mut x0f = Vec::new();
    let mut hf = Vec::new();
    for (atom, f) in spec.factors.iter().zip(&x.factors) {
        match f {
            AlgFactor::Vector(v) => {
                x0f.push(v.clone());
                hf.push(Factor::Phases(DVector::from_element(v.len(), C64::new(1.0, 0.0))));
            }
            AlgFactor::Hermitian(m) => {
                let eig = m.clone().symmetric_eigen();
                let d = m.nrows();
                let mut cols: Vec<(f64, Vec<f64>, DVector<C64>)> = (0..d)
                    .map(|i| {
                        let mut c = eig.eigenvectors.column(i).into_owned();
                        let key = normalize_column(&mut c);
                        (eig.eigenvalues[i], key, c)
                    })
                    .collect();
                cols.sort_by(|a, b| {
                    b.0.partial_cmp(&a.0)
                        .unwrap()
                        .then_with(|| a.1.partial_cmp(&b.1).unwrap())
                });
                let mut vals = DVector::zeros(d);
                let mut h = DMatrix::<C64>::zeros(d, d);
                for (i, (v, _, c)) in cols.into_iter().enumerate() {
                    vals[i] = v;
                    h.set_column(i, &c);
                }
                if matches!(atom, GroupAtom::Su2) {
                    // put h back in SU(2); the column phase does not affect h·x0
                    let det = h.determinant();
                    let s = det.sqrt();
                    h *= s.conj() / s.norm();
                }
                x0f.push(vals);
                hf.push(Factor::Matrix(h));
            }
        }
    }
    ChamberDecomposition {
        x0: CartanVector { spec: spec.clone(), factors: x0f },
        h: GroupElement { spec: spec.clone(), factors: hf },
    }
}

/// g·x: the extension of the coadjoint action, g·(h·x0) = k(gh)·x0.
pub fn extended_action(g: &GroupElement, x: &DualVector) -> Result<DualVector> {
    let cd = chamber_decompose(x);
    let iw = lie::iwasawa(&g.mul(&cd.h))?;
    Ok(lie::coadjoint(&iw.k, &cd.x0_dual()))
}

/// ln χ_x(g) = 2⟨x0, α(gh)⟩ where x = h·x0.
pub fn ln_chi(x: &DualVector, g: &GroupElement) -> Result<f64> {
    let cd = chamber_decompose(x);
    ln_chi_with(&cd, g)
}

/// ln χ for a precomputed chamber decomposition of x.
pub fn ln_chi_with(cd: &ChamberDecomposition, g: &GroupElement) -> Result<f64> {
    let iw = lie::iwasawa(&g.mul(&cd.h))?;
    Ok(2.0 * cd.x0.dot(&iw.alpha))
}

/// χ_x(g) = e^{2⟨x0, α(gh)⟩}.
pub fn chi(x: &DualVector, g: &GroupElement) -> Result<f64> {
    Ok(ln_chi(x, g)?.exp())
}

/// ⟪x, ξ⟫ = −ln χ_x(exp(−ξ/2)); reduces to ⟨x, ξ⟩ on torus factors.
pub fn nonlinear_pairing(x: &DualVector, xi: &AlgebraVector) -> Result<f64> {
    let cd = chamber_decompose(x);
    nonlinear_pairing_with(&cd, xi)
}

/// ⟪x, ξ⟫ for a precomputed chamber decomposition of x.
pub fn nonlinear_pairing_with(cd: &ChamberDecomposition, xi: &AlgebraVector) -> Result<f64> {
    let g = lie::exp_alg(xi, -0.5);
    Ok(-ln_chi_with(cd, &g)?)
}

/// Closed form of ⟪x, ξ⟫ for SU(2): x, ξ traceless Hermitian 2×2.
pub fn su2_pairing_closed(x: &DMatrix<C64>, xi: &DMatrix<C64>) -> f64 {
    let norm_inf = |m: &DMatrix<C64>| -> f64 {
        // operator norm of a traceless Hermitian 2×2: |eigenvalue|
        let a = m[(0, 0)].re;
        let b = m[(0, 1)];
        (a * a + b.norm_sqr()).sqrt()
    };
    let nx = norm_inf(x);
    let nxi = norm_inf(xi);
    if nx == 0.0 {
        return 0.0;
    }
    if nxi == 0.0 {
        return 0.0;
    }
    let t = (x * xi).trace().re;
    -2.0 * nx * (nxi.cosh() - t / (2.0 * nx * nxi) * nxi.sinh()).ln()
}
