//! Representation descriptors and their linear actions: π(g), T_eπ(ξ),
//! characters, weight data with the weight polytope, and isotypic
//! decompositions used by the measurement simulator.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{AlgFactor, AlgebraVector, CartanVector, Factor, GroupAtom, GroupElement, GroupSpec, C64};

/// Default cap on the qubit tensor power for explicit isotypic bases.
pub const M_MAX_DEFAULT: usize = 14;

/// A representation of a `GroupSpec`. Atoms bind to single-factor groups;
/// `Product` binds one child per group factor; `Power` is an m-fold tensor
/// power of its base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepresentationSpec {
    /// Standard (defining) representation of U(d).
    Standard(usize),
    /// Spin-j irreducible representation of SU(2); stores 2j.
    Spin { two_j: u32 },
    /// Torus representation given as a list of (weight ∈ ℤ^d, multiplicity).
    Torus(Vec<(Vec<i64>, usize)>),
    /// One child per group factor, tensored together.
    Product(Vec<RepresentationSpec>),
    /// m-th tensor power of the base.
    Power(Box<RepresentationSpec>, usize),
}

/// Integral weights with multiplicities plus their convex hull.
#[derive(Debug, Clone)]
pub struct WeightData {
    /// Weights in concatenated Cartan coordinates. SU(2) weights are stored
    /// doubled (2l) so that all entries stay integral.
    pub weights: Vec<(Vec<i64>, f64)>,
    /// Vertices of the convex hull of the weights, in real coordinates.
    pub polytope: Vec<DVector<f64>>,
    /// Scale from the stored integer coordinates to real weight coordinates
    /// (0.5 wherever a doubled SU(2) coordinate lives, 1 elsewhere).
    pub coord_scale: Vec<f64>,
}

impl WeightData {
    /// Real-coordinate weight list.
    pub fn real_weights(&self) -> Vec<(DVector<f64>, f64)> {
        self.weights
            .iter()
            .map(|(w, m)| {
                (
                    DVector::from_iterator(w.len(), w.iter().zip(&self.coord_scale).map(|(x, s)| *x as f64 * s)),
                    *m,
                )
            })
            .collect()
    }
}

impl RepresentationSpec {
    pub fn dimension(&self) -> usize {
        match self {
            RepresentationSpec::Standard(d) => *d,
            RepresentationSpec::Spin { two_j } => *two_j as usize + 1,
            RepresentationSpec::Torus(ws) => ws.iter().map(|(_, m)| m).sum(),
            RepresentationSpec::Product(parts) => parts.iter().map(|p| p.dimension()).product(),
            RepresentationSpec::Power(base, m) => base.dimension().pow(*m as u32),
        }
    }

    /// Checks that this representation is well formed over the given group.
    pub fn validate(&self, spec: &GroupSpec) -> Result<()> {
        fn check_atom(rep: &RepresentationSpec, atom: &GroupAtom) -> Result<()> {
            match (rep, atom) {
                (RepresentationSpec::Standard(d), GroupAtom::Unitary(gd)) if d == gd => Ok(()),
                (RepresentationSpec::Spin { .. }, GroupAtom::Su2) => Ok(()),
                (RepresentationSpec::Torus(ws), GroupAtom::Torus(d)) => {
                    if ws.is_empty() {
                        return Err(Error::Config("torus representation needs at least one weight".into()));
                    }
                    if ws.iter().all(|(w, m)| w.len() == *d && *m > 0) {
                        Ok(())
                    } else {
                        Err(Error::MismatchedGroup("torus weight length/multiplicity mismatch".into()))
                    }
                }
                (RepresentationSpec::Power(base, m), a) => {
                    if *m == 0 {
                        return Err(Error::Config("tensor power must be >= 1".into()));
                    }
                    check_atom(base, a)
                }
                _ => Err(Error::MismatchedGroup(format!("representation {:?} does not act on factor {:?}", rep, atom))),
            }
        }
        match self {
            RepresentationSpec::Product(parts) => {
                if parts.len() != spec.factors.len() {
                    return Err(Error::MismatchedGroup(format!(
                        "product representation has {} parts but the group has {} factors",
                        parts.len(),
                        spec.factors.len()
                    )));
                }
                for (p, a) in parts.iter().zip(&spec.factors) {
                    check_atom(p, a)?;
                }
                Ok(())
            }
            RepresentationSpec::Power(base, m) => {
                if *m == 0 {
                    return Err(Error::Config("tensor power must be >= 1".into()));
                }
                base.validate(spec)
            }
            atom => {
                if spec.factors.len() != 1 {
                    return Err(Error::MismatchedGroup(
                        "a bare atom representation needs a single-factor group".into(),
                    ));
                }
                check_atom(atom, &spec.factors[0])
            }
        }
    }
}

fn factor_of<'a>(g: &'a GroupElement, idx: usize) -> &'a Factor {
    &g.factors[idx]
}

/// Matrix of the symmetric power Sym^n of a 2×2 matrix in the normalized
/// monomial basis, ordered from the highest weight (x^n) down.
pub fn sym_power_2x2(g: &DMatrix<C64>, n: usize) -> DMatrix<C64> {
    let (a, b, c, d) = (g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)]);
    let dim = n + 1;
    let mut out = DMatrix::<C64>::zeros(dim, dim);
    // log-factorials for the normalization sqrt(q!(n-q)!/p!(n-p)!)
    let lf: Vec<f64> = {
        let mut v = vec![0.0; n + 1];
        for i in 1..=n {
            v[i] = v[i - 1] + (i as f64).ln();
        }
        v
    };
    let binom = |n: usize, k: usize| -> f64 { (lf[n] - lf[k] - lf[n - k]).exp() };
    for p in 0..=n {
        // expand (a x + c y)^p (b x + d y)^{n-p}
        for i in 0..=p {
            let term1 = a.powu(i as u32) * c.powu((p - i) as u32) * binom(p, i);
            for k in 0..=(n - p) {
                let q = i + k;
                let term2 = b.powu(k as u32) * d.powu((n - p - k) as u32) * binom(n - p, k);
                let norm = 0.5 * (lf[q] + lf[n - q] - lf[p] - lf[n - p]);
                // basis index: row 0 is x^n, so index = n - q
                out[(n - q, n - p)] += term1 * term2 * norm.exp();
            }
        }
    }
    out
}

/// Derived action dSym^n(ξ) of a 2×2 matrix ξ; tridiagonal in the monomial basis.
pub fn sym_power_2x2_derived(xi: &DMatrix<C64>, n: usize) -> DMatrix<C64> {
    let (a, b, c, d) = (xi[(0, 0)], xi[(0, 1)], xi[(1, 0)], xi[(1, 1)]);
    let dim = n + 1;
    let mut out = DMatrix::<C64>::zeros(dim, dim);
    for p in 0..=n {
        let row = n - p;
        out[(row, row)] += a * p as f64 + d * (n - p) as f64;
        if p >= 1 {
            // x^p y^{n-p} -> x^{p-1} y^{n-p+1} with amplitude c·sqrt(p(n-p+1))
            out[(n - (p - 1), row)] += c * ((p * (n - p + 1)) as f64).sqrt();
        }
        if p < n {
            out[(n - (p + 1), row)] += b * (((n - p) * (p + 1)) as f64).sqrt();
        }
    }
    out
}

fn torus_monomial(phases: &DVector<C64>, weight: &[i64]) -> C64 {
    phases
        .iter()
        .zip(weight)
        .map(|(z, n)| z.powi(*n as i32))
        .product()
}

fn apply_atom(rep: &RepresentationSpec, factor: &Factor) -> DMatrix<C64> {
    match (rep, factor) {
        (RepresentationSpec::Standard(_), Factor::Matrix(m)) => m.clone(),
        (RepresentationSpec::Spin { two_j }, Factor::Matrix(m)) => sym_power_2x2(m, *two_j as usize),
        (RepresentationSpec::Torus(ws), Factor::Phases(v)) => {
            let dim: usize = ws.iter().map(|(_, m)| m).sum();
            let mut out = DMatrix::<C64>::zeros(dim, dim);
            let mut i = 0;
            for (w, mult) in ws {
                let z = torus_monomial(v, w);
                for _ in 0..*mult {
                    out[(i, i)] = z;
                    i += 1;
                }
            }
            out
        }
        (RepresentationSpec::Power(base, m), f) => {
            let b = apply_atom(base, f);
            kron_power(&b, *m)
        }
        _ => unreachable!("validated representation"),
    }
}

fn kron_power(m: &DMatrix<C64>, p: usize) -> DMatrix<C64> {
    let mut out = m.clone();
    for _ in 1..p {
        out = out.kronecker(m);
    }
    out
}

/// π(g): the representation matrix of a (complexified) group element.
pub fn apply(rep: &RepresentationSpec, g: &GroupElement) -> Result<DMatrix<C64>> {
    rep.validate(&g.spec)?;
    Ok(apply_unchecked(rep, g))
}

pub(crate) fn apply_unchecked(rep: &RepresentationSpec, g: &GroupElement) -> DMatrix<C64> {
    match rep {
        RepresentationSpec::Product(parts) => {
            let mut out = apply_atom(&parts[0], factor_of(g, 0));
            for (i, p) in parts.iter().enumerate().skip(1) {
                out = out.kronecker(&apply_atom(p, factor_of(g, i)));
            }
            out
        }
        RepresentationSpec::Power(base, m) => {
            let b = apply_unchecked(base, g);
            kron_power(&b, *m)
        }
        atom => apply_atom(atom, factor_of(g, 0)),
    }
}

fn derived_atom(rep: &RepresentationSpec, factor: &AlgFactor) -> DMatrix<C64> {
    match (rep, factor) {
        (RepresentationSpec::Standard(_), AlgFactor::Hermitian(m)) => m.clone(),
        (RepresentationSpec::Spin { two_j }, AlgFactor::Hermitian(m)) => {
            sym_power_2x2_derived(m, *two_j as usize)
        }
        (RepresentationSpec::Torus(ws), AlgFactor::Vector(v)) => {
            let dim: usize = ws.iter().map(|(_, m)| m).sum();
            let mut out = DMatrix::<C64>::zeros(dim, dim);
            let mut i = 0;
            for (w, mult) in ws {
                let val: f64 = w.iter().zip(v.iter()).map(|(n, x)| *n as f64 * x).sum();
                for _ in 0..*mult {
                    out[(i, i)] = C64::new(val, 0.0);
                    i += 1;
                }
            }
            out
        }
        (RepresentationSpec::Power(base, m), f) => {
            let d = derived_atom(base, f);
            leibniz_power(&d, base.dimension(), *m)
        }
        _ => unreachable!("validated representation"),
    }
}

/// Σ_i I^{⊗(i-1)} ⊗ d ⊗ I^{⊗(m-i)}.
fn leibniz_power(d: &DMatrix<C64>, base_dim: usize, m: usize) -> DMatrix<C64> {
    let total = base_dim.pow(m as u32);
    let mut out = DMatrix::<C64>::zeros(total, total);
    for slot in 0..m {
        let left = DMatrix::<C64>::identity(base_dim.pow(slot as u32), base_dim.pow(slot as u32));
        let right_dim = base_dim.pow((m - slot - 1) as u32);
        let right = DMatrix::<C64>::identity(right_dim, right_dim);
        out += left.kronecker(d).kronecker(&right);
    }
    out
}

/// T_eπ(ξ): the derived representation; Hermitian for ξ ∈ i𝔨.
pub fn derived(rep: &RepresentationSpec, xi: &AlgebraVector) -> Result<DMatrix<C64>> {
    rep.validate(&xi.spec)?;
    Ok(derived_unchecked(rep, xi))
}

pub(crate) fn derived_unchecked(rep: &RepresentationSpec, xi: &AlgebraVector) -> DMatrix<C64> {
    match rep {
        RepresentationSpec::Product(parts) => {
            let dims: Vec<usize> = parts.iter().map(|p| p.dimension()).collect();
            let total: usize = dims.iter().product();
            let mut out = DMatrix::<C64>::zeros(total, total);
            for (i, p) in parts.iter().enumerate() {
                let d = derived_atom(p, &xi.factors[i]);
                let left_dim: usize = dims[..i].iter().product();
                let right_dim: usize = dims[i + 1..].iter().product();
                let left = DMatrix::<C64>::identity(left_dim, left_dim);
                let right = DMatrix::<C64>::identity(right_dim, right_dim);
                out += left.kronecker(&d).kronecker(&right);
            }
            out
        }
        RepresentationSpec::Power(base, m) => {
            let d = derived_unchecked(base, xi);
            leibniz_power(&d, base.dimension(), *m)
        }
        atom => derived_atom(atom, &xi.factors[0]),
    }
}

fn weight_map_atom(rep: &RepresentationSpec, offset: usize, total: usize) -> BTreeMap<Vec<i64>, f64> {
    let mut map = BTreeMap::new();
    match rep {
        RepresentationSpec::Standard(d) => {
            for i in 0..*d {
                let mut w = vec![0i64; total];
                w[offset + i] = 1;
                *map.entry(w).or_insert(0.0) += 1.0;
            }
        }
        RepresentationSpec::Spin { two_j } => {
            // doubled weights (2l, -2l), l = j .. -j
            let n = *two_j as i64;
            for k in 0..=n {
                let two_l = n - 2 * k;
                let mut w = vec![0i64; total];
                w[offset] = two_l;
                w[offset + 1] = -two_l;
                *map.entry(w).or_insert(0.0) += 1.0;
            }
        }
        RepresentationSpec::Torus(ws) => {
            for (wt, mult) in ws {
                let mut w = vec![0i64; total];
                w[offset..offset + wt.len()].copy_from_slice(wt);
                *map.entry(w).or_insert(0.0) += *mult as f64;
            }
        }
        RepresentationSpec::Power(base, m) => {
            let b = weight_map_atom(base, offset, total);
            return sumset_power(&b, *m);
        }
        RepresentationSpec::Product(_) => unreachable!(),
    }
    map
}

fn sumset(a: &BTreeMap<Vec<i64>, f64>, b: &BTreeMap<Vec<i64>, f64>) -> BTreeMap<Vec<i64>, f64> {
    let mut out = BTreeMap::new();
    for (wa, ma) in a {
        for (wb, mb) in b {
            let w: Vec<i64> = wa.iter().zip(wb).map(|(x, y)| x + y).collect();
            *out.entry(w).or_insert(0.0) += ma * mb;
        }
    }
    out
}

fn sumset_power(base: &BTreeMap<Vec<i64>, f64>, m: usize) -> BTreeMap<Vec<i64>, f64> {
    let mut out = base.clone();
    for _ in 1..m {
        out = sumset(&out, base);
    }
    out
}

fn weight_map(rep: &RepresentationSpec, spec: &GroupSpec) -> BTreeMap<Vec<i64>, f64> {
    let total = spec.cartan_dim();
    match rep {
        RepresentationSpec::Product(parts) => {
            let mut offset = 0;
            let mut acc: Option<BTreeMap<Vec<i64>, f64>> = None;
            for (p, atom) in parts.iter().zip(&spec.factors) {
                let m = weight_map_atom(p, offset, total);
                acc = Some(match acc {
                    None => m,
                    Some(a) => sumset(&a, &m),
                });
                offset += atom.cartan_dim();
            }
            acc.unwrap()
        }
        RepresentationSpec::Power(base, m) => sumset_power(&weight_map(base, spec), *m),
        atom => weight_map_atom(atom, 0, total),
    }
}

/// Coordinate scales turning stored integer weights into real weight
/// coordinates: SU(2) blocks carry doubled integers.
pub fn coord_scales(spec: &GroupSpec) -> Vec<f64> {
    let mut out = Vec::with_capacity(spec.cartan_dim());
    for f in &spec.factors {
        let s = if matches!(f, GroupAtom::Su2) { 0.5 } else { 1.0 };
        for _ in 0..f.cartan_dim() {
            out.push(s);
        }
    }
    out
}

/// Exact weight multiset of the representation plus its convex hull.
pub fn weight_data(rep: &RepresentationSpec, spec: &GroupSpec) -> Result<WeightData> {
    rep.validate(spec)?;
    let map = weight_map(rep, spec);
    let scales = coord_scales(spec);
    let weights: Vec<(Vec<i64>, f64)> = map.into_iter().collect();
    let points: Vec<DVector<f64>> = weights
        .iter()
        .map(|(w, _)| DVector::from_iterator(w.len(), w.iter().zip(&scales).map(|(x, s)| *x as f64 * s)))
        .collect();
    let polytope = hull_vertices(&points);
    Ok(WeightData { weights, polytope, coord_scale: scales })
}

/// Character Tr π(exp α) = Σ_w mult(w)·e^{⟨w,α⟩}.
pub fn character(rep: &RepresentationSpec, alpha: &CartanVector) -> Result<f64> {
    let data = weight_data(rep, &alpha.spec)?;
    let coords = alpha.coords();
    let mut total = 0.0;
    for (w, mult) in data.real_weights() {
        total += mult * w.dot(&coords).exp();
    }
    Ok(total)
}

/// Euclidean projection of `target` onto the convex hull of `points`,
/// via accelerated projected gradient on the coefficient simplex.
pub fn project_to_hull(points: &[DVector<f64>], target: &DVector<f64>) -> DVector<f64> {
    let n = points.len();
    assert!(n > 0);
    if n == 1 {
        return points[0].clone();
    }
    let dim = target.len();
    // Gram data for the quadratic ||Σ c_i p_i - t||^2
    let mut p = DMatrix::<f64>::zeros(dim, n);
    for (j, pt) in points.iter().enumerate() {
        p.set_column(j, pt);
    }
    let pt_p = p.transpose() * &p;
    let pt_t = p.transpose() * target;
    let lips = pt_p.norm() + 1e-12;
    let mut c = DVector::from_element(n, 1.0 / n as f64);
    let mut y = c.clone();
    let mut t_acc = 1.0f64;
    let mut best = c.clone();
    let mut best_val = f64::INFINITY;
    for _ in 0..5000 {
        let grad = &pt_p * &y - &pt_t;
        let next = project_simplex(&(y - grad / lips));
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t_acc * t_acc).sqrt());
        y = &next + (&next - &c) * ((t_acc - 1.0) / t_next);
        c = next;
        t_acc = t_next;
        let val = (&p * &c - target).norm_squared();
        if val < best_val {
            best_val = val;
            best = c.clone();
        }
        if val < 1e-24 {
            break;
        }
    }
    &p * best
}

fn project_simplex(v: &DVector<f64>) -> DVector<f64> {
    let n = v.len();
    let mut u: Vec<f64> = v.iter().cloned().collect();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut css = 0.0;
    let mut rho = 0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        css += ui;
        let t = (css - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            rho = i;
            theta = t;
        }
    }
    let _ = rho;
    DVector::from_iterator(n, v.iter().map(|&x| (x - theta).max(0.0)))
}

/// Vertices of the convex hull of a point set, by leave-one-out projection.
fn hull_vertices(points: &[DVector<f64>]) -> Vec<DVector<f64>> {
    if points.len() <= 2 {
        return points.to_vec();
    }
    let mut vertices = Vec::new();
    for (i, pt) in points.iter().enumerate() {
        let rest: Vec<DVector<f64>> = points
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, p)| p.clone())
            .collect();
        let proj = project_to_hull(&rest, pt);
        if (pt - proj).norm() > 1e-7 {
            vertices.push(pt.clone());
        }
    }
    vertices
}

/// Distance from a point to the convex hull of the weights, with the
/// separating direction when positive.
pub fn separation_from_hull(points: &[DVector<f64>], target: &DVector<f64>) -> (f64, DVector<f64>) {
    let proj = project_to_hull(points, target);
    let diff = target - proj;
    let dist = diff.norm();
    let dir = if dist > 0.0 { diff / dist } else { DVector::zeros(target.len()) };
    (dist, dir)
}

/// Highest weight vector of an atom family: top monomial for Spin(j), e₁ for
/// Standard(d), the matching basis vector for a single torus weight.
pub fn highest_weight_vector(rep: &RepresentationSpec, spec: &GroupSpec) -> Result<DVector<C64>> {
    rep.validate(spec)?;
    fn atom_hwv(rep: &RepresentationSpec) -> Result<DVector<C64>> {
        match rep {
            RepresentationSpec::Standard(d) => {
                let mut v = DVector::<C64>::zeros(*d);
                v[0] = C64::new(1.0, 0.0);
                Ok(v)
            }
            RepresentationSpec::Spin { two_j } => {
                let mut v = DVector::<C64>::zeros(*two_j as usize + 1);
                v[0] = C64::new(1.0, 0.0);
                Ok(v)
            }
            RepresentationSpec::Torus(ws) => {
                if ws.len() != 1 || ws[0].1 != 1 {
                    return Err(Error::NotDominant(
                        "torus highest weight vector needs a single weight of multiplicity one".into(),
                    ));
                }
                Ok(DVector::from_element(1, C64::new(1.0, 0.0)))
            }
            RepresentationSpec::Power(base, m) => {
                let b = atom_hwv(base)?;
                let mut out = b.clone();
                for _ in 1..*m {
                    out = out.kronecker(&b);
                }
                Ok(out)
            }
            RepresentationSpec::Product(_) => unreachable!(),
        }
    }
    match rep {
        RepresentationSpec::Product(parts) => {
            let mut out = atom_hwv(&parts[0])?;
            for p in &parts[1..] {
                out = out.kronecker(&atom_hwv(p)?);
            }
            Ok(out)
        }
        other => atom_hwv(other),
    }
}

/// One isotypic block of a decomposition.
#[derive(Debug, Clone)]
pub struct IsotypicBlock {
    /// Dominant weight in the stored integer convention (doubled for SU(2)).
    pub weight: Vec<i64>,
    /// Dimension of the irreducible carrier ℋ_λ.
    pub dim: usize,
    /// Multiplicity (dimension of the Hom space).
    pub multiplicity: usize,
    /// Isometry whose columns span the block; columns are grouped per
    /// multiplicity copy, each copy ordered from the highest weight down.
    pub isometry: DMatrix<C64>,
}

#[derive(Debug, Clone)]
pub struct IsotypicDecomposition {
    pub space_dim: usize,
    pub blocks: Vec<IsotypicBlock>,
}

impl IsotypicDecomposition {
    /// Σ_λ P_λ compared against the identity; returns the max deviation.
    pub fn resolution_error(&self) -> f64 {
        let mut sum = DMatrix::<C64>::zeros(self.space_dim, self.space_dim);
        for b in &self.blocks {
            sum += &b.isometry * b.isometry.adjoint();
        }
        crate::lie::mat_inf_norm(&(sum - DMatrix::<C64>::identity(self.space_dim, self.space_dim)))
    }
}

/// Clebsch–Gordan isometry C: ℂ^{2j'+1} → ℂ^{2j+1} ⊗ ℂ², coupling a spin-1/2,
/// in the Condon–Shortley convention. `two_j_new` must be `two_j ± 1`.
pub fn cg_couple_half(two_j: u32, two_j_new: u32) -> DMatrix<C64> {
    let jdim = two_j as usize + 1;
    let ndim = two_j_new as usize + 1;
    let mut c = DMatrix::<C64>::zeros(jdim * 2, ndim);
    let j = two_j as f64 / 2.0;
    let up = two_j_new == two_j + 1;
    for col in 0..ndim {
        // m' runs from j' down: m' = j' - col
        let mp = two_j_new as f64 / 2.0 - col as f64;
        // component with spin-1/2 part "up" (s=+1/2): m = m' - 1/2
        let m_up = mp - 0.5;
        if m_up.abs() <= j + 1e-9 {
            let row = ((j - m_up).round() as usize) * 2; // index of |j,m⟩⊗|↑⟩
            let amp = if up {
                ((j + mp + 0.5) / (2.0 * j + 1.0)).sqrt()
            } else {
                -((j - mp + 0.5) / (2.0 * j + 1.0)).sqrt()
            };
            c[(row, col)] = C64::new(amp, 0.0);
        }
        // component with spin-1/2 part "down" (s=-1/2): m = m' + 1/2
        let m_dn = mp + 0.5;
        if m_dn.abs() <= j + 1e-9 {
            let row = ((j - m_dn).round() as usize) * 2 + 1;
            let amp = if up {
                ((j - mp + 0.5) / (2.0 * j + 1.0)).sqrt()
            } else {
                ((j + mp + 0.5) / (2.0 * j + 1.0)).sqrt()
            };
            c[(row, col)] = C64::new(amp, 0.0);
        }
    }
    c
}

/// Isotypic decomposition of (ℂ²)^{⊗m} under SU(2)/U(2) with explicit block
/// isometries built by coupling one spin-1/2 at a time.
pub fn isotypic_decompose_qubits(m: usize, m_max: usize) -> Result<IsotypicDecomposition> {
    if m == 0 || m > m_max {
        return Err(Error::TooLarge { m, max: m_max });
    }
    // paths: (two_j, isometry 2^t × (2j+1))
    let mut paths: Vec<(u32, DMatrix<C64>)> = vec![(1, DMatrix::identity(2, 2))];
    for _ in 1..m {
        let mut next = Vec::new();
        for (two_j, v) in &paths {
            let vk = v.kronecker(&DMatrix::<C64>::identity(2, 2));
            // couple up
            let cu = cg_couple_half(*two_j, two_j + 1);
            next.push((two_j + 1, &vk * cu));
            if *two_j >= 1 {
                let cd = cg_couple_half(*two_j, two_j - 1);
                next.push((two_j - 1, &vk * cd));
            }
        }
        paths = next;
    }
    let mut by_j: BTreeMap<u32, Vec<DMatrix<C64>>> = BTreeMap::new();
    for (two_j, v) in paths {
        by_j.entry(two_j).or_default().push(v);
    }
    let space_dim = 1usize << m;
    let mut blocks = Vec::new();
    for (two_j, vs) in by_j.into_iter().rev() {
        let dim = two_j as usize + 1;
        let mult = vs.len();
        let mut iso = DMatrix::<C64>::zeros(space_dim, dim * mult);
        for (c, v) in vs.iter().enumerate() {
            iso.view_mut((0, c * dim), (space_dim, dim)).copy_from(v);
        }
        // U(2) dominant weight (a, b): a+b = m, a-b = 2j
        let a = (m as i64 + two_j as i64) / 2;
        let b = (m as i64 - two_j as i64) / 2;
        blocks.push(IsotypicBlock { weight: vec![a, b], dim, multiplicity: mult, isometry: iso });
    }
    Ok(IsotypicDecomposition { space_dim, blocks })
}

/// Isotypic decomposition of a torus representation (or its tensor power):
/// one coordinate-projection block per distinct weight, exact.
pub fn isotypic_decompose_torus(rep: &RepresentationSpec, spec: &GroupSpec) -> Result<IsotypicDecomposition> {
    rep.validate(spec)?;
    fn basis_weights(rep: &RepresentationSpec) -> Result<Vec<Vec<i64>>> {
        match rep {
            RepresentationSpec::Torus(ws) => {
                let mut out = Vec::new();
                for (w, mult) in ws {
                    for _ in 0..*mult {
                        out.push(w.clone());
                    }
                }
                Ok(out)
            }
            RepresentationSpec::Power(base, m) => {
                let b = basis_weights(base)?;
                let mut out: Vec<Vec<i64>> = vec![vec![0; b[0].len()]];
                for _ in 0..*m {
                    let mut next = Vec::with_capacity(out.len() * b.len());
                    for acc in &out {
                        for w in &b {
                            next.push(acc.iter().zip(w).map(|(x, y)| x + y).collect());
                        }
                    }
                    out = next;
                }
                Ok(out)
            }
            _ => Err(Error::UnsupportedRep("torus isotypic decomposition needs a torus representation".into())),
        }
    }
    let bw = basis_weights(rep)?;
    let space_dim = bw.len();
    let mut groups: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
    for (i, w) in bw.iter().enumerate() {
        groups.entry(w.clone()).or_default().push(i);
    }
    let blocks = groups
        .into_iter()
        .map(|(w, idxs)| {
            let mut iso = DMatrix::<C64>::zeros(space_dim, idxs.len());
            for (c, &i) in idxs.iter().enumerate() {
                iso[(i, c)] = C64::new(1.0, 0.0);
            }
            IsotypicBlock { weight: w, dim: 1, multiplicity: idxs.len(), isometry: iso }
        })
        .collect();
    Ok(IsotypicDecomposition { space_dim, blocks })
}
