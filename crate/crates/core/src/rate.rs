//! Rate function I_ρ of the large-deviation principle: the nonabelian
//! Legendre-type supremum, the 𝔞×N expression, closed-form specializations
//! and the exponential-tilting construction of exact graph points.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::{
    self, AlgFactor, AlgebraVector, DualVector, Factor, GroupAtom, GroupElement, GroupSpec, C64,
};
use crate::moment::{self, ChamberDecomposition};
use crate::repr::{self, RepresentationSpec};

#[derive(Debug, Clone, Serialize)]
pub struct OptimizerOptions {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub restarts: usize,
    pub divergence_norm: f64,
    /// Backtracking line-search contraction factor.
    pub backtrack: f64,
    /// Armijo sufficient-increase constant.
    pub armijo: f64,
    /// Seed for the restart sampler (deterministic multistart).
    pub seed: u64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            max_iterations: 500,
            gradient_tolerance: 1e-8,
            restarts: 8,
            divergence_norm: 1e3,
            backtrack: 0.5,
            armijo: 1e-4,
            seed: 0x5eed,
        }
    }
}

/// Outcome tag of a rate evaluation.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Certificate {
    /// Supremum attained numerically; gradient norm at the argmax.
    Converged { gradient_norm: f64 },
    /// Certified +∞: β separates x0 from the weight polytope by `margin`.
    Diverged { beta: Vec<f64>, margin: f64 },
    /// Closed-form evaluation, no iteration involved.
    ClosedForm,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateResult {
    pub value: f64,
    #[serde(skip)]
    pub argmax_xi: Option<AlgebraVector>,
    pub certificate: Certificate,
    pub evaluations: usize,
    /// x0 is within 1e−6 of the boundary of the weight polytope.
    pub boundary: bool,
    /// ρ is not faithful; only the upper bound of the LDP is guaranteed.
    pub non_faithful: bool,
    #[serde(skip)]
    raw_argmax: Option<DVector<f64>>,
}

impl RateResult {
    pub fn closed_form(value: f64) -> Self {
        RateResult {
            value,
            argmax_xi: None,
            certificate: Certificate::ClosedForm,
            evaluations: 0,
            boundary: false,
            non_faithful: false,
            raw_argmax: None,
        }
    }

    fn infinite(beta: DVector<f64>, margin: f64, evals: usize, non_faithful: bool) -> Self {
        RateResult {
            value: f64::INFINITY,
            argmax_xi: None,
            certificate: Certificate::Diverged { beta: beta.iter().cloned().collect(), margin },
            evaluations: evals,
            boundary: false,
            non_faithful,
            raw_argmax: None,
        }
    }
}

// ---------- generic BFGS ascent with FD gradients ----------

enum AscentOutcome {
    Converged { x: DVector<f64>, value: f64, grad_norm: f64 },
    Diverged { x: DVector<f64> },
}

struct Ascent<'a> {
    f: &'a dyn Fn(&DVector<f64>) -> f64,
    evals: usize,
}

impl<'a> Ascent<'a> {
    fn eval(&mut self, x: &DVector<f64>) -> f64 {
        self.evals += 1;
        (self.f)(x)
    }

    fn grad(&mut self, x: &DVector<f64>) -> DVector<f64> {
        let n = x.len();
        let mut g = DVector::zeros(n);
        for i in 0..n {
            let h = 1e-6 * (1.0 + x[i].abs());
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            g[i] = (self.eval(&xp) - self.eval(&xm)) / (2.0 * h);
        }
        g
    }

    /// BFGS maximization from `x0`; stops on small gradient or iterate blowup.
    fn run(&mut self, x0: &DVector<f64>, opts: &OptimizerOptions) -> Result<AscentOutcome> {
        let n = x0.len();
        let mut x = x0.clone();
        let mut fx = self.eval(&x);
        let mut g = self.grad(&x);
        let mut hinv = DMatrix::<f64>::identity(n, n);
        for _ in 0..opts.max_iterations {
            let gnorm = g.norm();
            if gnorm <= opts.gradient_tolerance {
                return Ok(AscentOutcome::Converged { x, value: fx, grad_norm: gnorm });
            }
            if x.norm() > opts.divergence_norm {
                return Ok(AscentOutcome::Diverged { x });
            }
            let mut dir = &hinv * &g;
            if dir.dot(&g) <= 0.0 {
                // curvature got corrupted; reset to steepest ascent
                hinv = DMatrix::identity(n, n);
                dir = g.clone();
            }
            // backtracking line search (Armijo on the ascent direction)
            let slope = dir.dot(&g);
            let mut t = 1.0;
            let mut x_new = &x + &dir * t;
            let mut f_new = self.eval(&x_new);
            let mut ls = 0;
            while f_new < fx + opts.armijo * t * slope && ls < 60 {
                t *= opts.backtrack;
                x_new = &x + &dir * t;
                f_new = self.eval(&x_new);
                ls += 1;
            }
            if ls == 0 {
                // expansion: on asymptotically linear objectives (divergent
                // suprema) unit steps stall far below the divergence norm
                let mut t2 = 2.0 * t;
                for _ in 0..40 {
                    let x_try = &x + &dir * t2;
                    let f_try = self.eval(&x_try);
                    if f_try >= f_new + opts.armijo * (t2 - t) * slope {
                        t = t2;
                        x_new = x_try;
                        f_new = f_try;
                        t2 *= 2.0;
                    } else {
                        break;
                    }
                }
            }
            if ls >= 60 && f_new <= fx {
                // no progress possible along this direction
                return Ok(AscentOutcome::Converged { x, value: fx, grad_norm: gnorm });
            }
            let g_new = self.grad(&x_new);
            let s = &x_new - &x;
            let y = &g - &g_new; // note: maximization, so minimize −f: y = ∇(−f)_new − ∇(−f)_old
            let sy = s.dot(&y);
            if sy > 1e-12 {
                let rho = 1.0 / sy;
                let i = DMatrix::<f64>::identity(n, n);
                let sy_t = &s * y.transpose();
                let left = &i - &sy_t * rho;
                hinv = &left * hinv * left.transpose() + &s * s.transpose() * rho;
            }
            x = x_new;
            fx = f_new;
            g = g_new;
        }
        Err(Error::MaxIterations(opts.max_iterations))
    }
}

// ---------- ξ-parametrization of i𝔨 ----------

pub fn xi_dim(spec: &GroupSpec) -> usize {
    spec.factors
        .iter()
        .map(|f| match f {
            GroupAtom::Torus(d) => *d,
            GroupAtom::Su2 => 3,
            GroupAtom::Unitary(d) => d * d,
        })
        .sum()
}

pub fn vec_to_alg(spec: &GroupSpec, v: &DVector<f64>) -> AlgebraVector {
    let mut factors = Vec::with_capacity(spec.factors.len());
    let mut off = 0;
    for atom in &spec.factors {
        match atom {
            GroupAtom::Torus(d) => {
                factors.push(AlgFactor::Vector(v.rows(off, *d).into_owned()));
                off += d;
            }
            GroupAtom::Su2 => {
                let (a, br, bi) = (v[off], v[off + 1], v[off + 2]);
                let mut m = DMatrix::<C64>::zeros(2, 2);
                m[(0, 0)] = C64::new(a, 0.0);
                m[(1, 1)] = C64::new(-a, 0.0);
                m[(0, 1)] = C64::new(br, bi);
                m[(1, 0)] = C64::new(br, -bi);
                factors.push(AlgFactor::Hermitian(m));
                off += 3;
            }
            GroupAtom::Unitary(d) => {
                let mut m = DMatrix::<C64>::zeros(*d, *d);
                for i in 0..*d {
                    m[(i, i)] = C64::new(v[off + i], 0.0);
                }
                let mut k = off + d;
                for i in 0..*d {
                    for j in (i + 1)..*d {
                        m[(i, j)] = C64::new(v[k], v[k + 1]);
                        m[(j, i)] = C64::new(v[k], -v[k + 1]);
                        k += 2;
                    }
                }
                factors.push(AlgFactor::Hermitian(m));
                off += d * d;
            }
        }
    }
    AlgebraVector { spec: spec.clone(), factors }
}

/// 𝔞-parametrization: per-factor diagonal reals (SU(2): one traceless real).
pub fn a_dim(spec: &GroupSpec) -> usize {
    spec.factors
        .iter()
        .map(|f| match f {
            GroupAtom::Su2 => 1,
            other => other.cartan_dim(),
        })
        .sum()
}

pub fn vec_to_cartan(spec: &GroupSpec, v: &DVector<f64>) -> lie::CartanVector {
    let mut factors = Vec::new();
    let mut off = 0;
    for atom in &spec.factors {
        match atom {
            GroupAtom::Su2 => {
                factors.push(DVector::from_vec(vec![v[off], -v[off]]));
                off += 1;
            }
            other => {
                let d = other.cartan_dim();
                factors.push(v.rows(off, d).into_owned());
                off += d;
            }
        }
    }
    lie::CartanVector { spec: spec.clone(), factors }
}

// ---------- polytope certification ----------

struct PolytopeCheck {
    dist: f64,
    beta: DVector<f64>,
}

fn check_against_polytope(points: &[DVector<f64>], x0: &DVector<f64>) -> PolytopeCheck {
    let (dist, beta) = repr::separation_from_hull(points, x0);
    PolytopeCheck { dist, beta }
}

/// Near-boundary detection: x0 is in the hull but leaves it after inflating
/// away from the centroid by a small factor.
fn near_boundary(points: &[DVector<f64>], x0: &DVector<f64>) -> bool {
    if points.is_empty() {
        return false;
    }
    let dim = x0.len();
    let mut centroid = DVector::zeros(dim);
    for p in points {
        centroid += p;
    }
    centroid /= points.len() as f64;
    let pushed = &centroid + (x0 - &centroid) * (1.0 + 1e-5);
    let (d, _) = repr::separation_from_hull(points, &pushed);
    d > 1e-9
}

// ---------- log Z and the main numeric rate ----------

/// ln Z_ρ(ξ) = ln Tr(ρ·π(exp ξ)).
pub fn log_z(rep: &RepresentationSpec, rho: &DMatrix<C64>, xi: &AlgebraVector) -> Result<f64> {
    moment::check_state(rho)?;
    Ok(log_z_unchecked(rep, rho, xi))
}

fn log_z_unchecked(rep: &RepresentationSpec, rho: &DMatrix<C64>, xi: &AlgebraVector) -> f64 {
    let g = lie::exp_alg(xi, 1.0);
    let pi = repr::apply_unchecked(rep, &g);
    (rho * pi).trace().re.ln()
}

struct RateContext {
    hull: Vec<DVector<f64>>,
    non_faithful: bool,
}

fn rate_context(rep: &RepresentationSpec, spec: &GroupSpec, rho: &DMatrix<C64>) -> Result<RateContext> {
    moment::check_state(rho)?;
    if rho.nrows() != rep.dimension() {
        return Err(Error::MismatchedGroup(format!(
            "state dimension {} vs representation dimension {}",
            rho.nrows(),
            rep.dimension()
        )));
    }
    let wd = repr::weight_data(rep, spec)?;
    let hull: Vec<DVector<f64>> = wd.real_weights().into_iter().map(|(w, _)| w).collect();
    Ok(RateContext { hull, non_faithful: moment::min_eigenvalue(rho) < 1e-12 })
}

/// Multistart ascent shared by the Legendre-type expressions. `objective`
/// maps the parameter vector to the value being maximized; `x0_coords` is the
/// chamber representative used for divergence certification.
fn certified_supremum(
    objective: &dyn Fn(&DVector<f64>) -> f64,
    dim: usize,
    x0_coords: &DVector<f64>,
    hull: &[DVector<f64>],
    non_faithful: bool,
    opts: &OptimizerOptions,
) -> Result<RateResult> {
    // separation from the weight polytope certifies I = +∞ outright; the
    // ascent cannot reach the divergence norm anyway once exp(ξ) leaves the
    // well-conditioned region
    let check = check_against_polytope(hull, x0_coords);
    if check.dist > 1e-8 {
        return Ok(RateResult::infinite(check.beta, check.dist, 0, non_faithful));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(opts.seed);
    let mut best: Option<(DVector<f64>, f64, f64)> = None;
    let mut evals = 0;
    let mut last_err = None;
    for attempt in 0..=opts.restarts {
        let start = if attempt == 0 {
            DVector::zeros(dim)
        } else {
            let scale = 0.5 * (2.0f64).powi(attempt as i32 - 1);
            DVector::from_fn(dim, |_, _| {
                let z: f64 = StandardNormal.sample(&mut rng);
                scale * z
            })
        };
        let mut asc = Ascent { f: objective, evals: 0 };
        let outcome = asc.run(&start, opts);
        evals += asc.evals;
        match outcome {
            Ok(AscentOutcome::Converged { x, value, grad_norm }) => {
                if best.as_ref().map_or(true, |(_, v, _)| value > *v) {
                    best = Some((x, value, grad_norm));
                }
            }
            Ok(AscentOutcome::Diverged { .. }) => {
                let check = check_against_polytope(hull, x0_coords);
                if check.dist > 1e-8 {
                    return Ok(RateResult::infinite(check.beta, check.dist, evals, non_faithful));
                }
                // not separable: treat as a failed start and keep going
            }
            Err(e) => last_err = Some(e),
        }
    }
    match best {
        Some((x, value, grad_norm)) => Ok(RateResult {
            value: value.max(0.0),
            argmax_xi: None, // caller may fill in
            certificate: Certificate::Converged { gradient_norm: grad_norm },
            evaluations: evals,
            boundary: near_boundary(hull, x0_coords),
            non_faithful,
            raw_argmax: None,
        }
        .with_arg(x)),
        None => Err(last_err.unwrap_or(Error::MaxIterations(opts.max_iterations))),
    }
}

impl RateResult {
    fn with_arg(mut self, x: DVector<f64>) -> Self {
        self.raw_argmax = Some(x);
        self
    }
}

/// I_ρ(x) = sup_ξ ⟪x,ξ⟫ − ln Z_ρ(ξ).
pub fn rate_numeric(
    rep: &RepresentationSpec,
    spec: &GroupSpec,
    rho: &DMatrix<C64>,
    x: &DualVector,
    opts: &OptimizerOptions,
) -> Result<RateResult> {
    let ctx = rate_context(rep, spec, rho)?;
    let cd = moment::chamber_decompose(x);
    let dim = xi_dim(spec);
    let objective = |theta: &DVector<f64>| -> f64 {
        let xi = vec_to_alg(spec, theta);
        let pairing = moment::nonlinear_pairing_with(&cd, &xi).unwrap_or(f64::NEG_INFINITY);
        pairing - log_z_unchecked(rep, rho, &xi)
    };
    let mut result = certified_supremum(
        &objective,
        dim,
        &cd.x0.coords(),
        &ctx.hull,
        ctx.non_faithful,
        opts,
    )?;
    if let Some(raw) = result.raw_argmax.take() {
        result.argmax_xi = Some(vec_to_alg(spec, &raw));
    }
    Ok(result)
}

// ---------- the 𝔞 × N expression ----------

/// Leading principal minor ratios Δ_i(σ)/Δ_{i−1}(σ).
fn minor_ratios(sigma: &DMatrix<C64>) -> Result<Vec<f64>> {
    let d = sigma.nrows();
    let mut prev = 1.0f64;
    let mut out = Vec::with_capacity(d);
    for i in 1..=d {
        let minor = sigma.view((0, 0), (i, i)).into_owned().determinant().re;
        if !minor.is_finite() || minor.abs() < 1e-250 * prev.abs().max(1.0) {
            return Err(Error::SingularMinor { index: i, value: minor });
        }
        out.push(minor / prev);
        prev = minor;
    }
    Ok(out)
}

/// Strictly-upper parametrization of the unipotent group N per matrix factor.
fn n_dim(spec: &GroupSpec) -> usize {
    spec.factors
        .iter()
        .map(|f| match f {
            GroupAtom::Torus(_) => 0,
            a => {
                let d = a.ambient_dim();
                d * (d - 1)
            }
        })
        .sum()
}

fn vec_to_unipotent(spec: &GroupSpec, v: &DVector<f64>) -> GroupElement {
    let mut factors = Vec::new();
    let mut off = 0;
    for atom in &spec.factors {
        match atom {
            GroupAtom::Torus(d) => {
                factors.push(Factor::Phases(DVector::from_element(*d, C64::new(1.0, 0.0))));
            }
            a => {
                let d = a.ambient_dim();
                let mut m = DMatrix::<C64>::identity(d, d);
                for i in 0..d {
                    for j in (i + 1)..d {
                        m[(i, j)] = C64::new(v[off], v[off + 1]);
                        off += 2;
                    }
                }
                factors.push(Factor::Matrix(m));
            }
        }
    }
    GroupElement { spec: spec.clone(), factors }
}

/// min over n ∈ N of Tr π(n)*σ_π π(n) where σ_π = π(exp α/2)·ρ_h·π(exp α/2);
/// closed form for a single Standard(d) factor, numeric descent otherwise.
fn inner_min_over_n(
    rep: &RepresentationSpec,
    spec: &GroupSpec,
    rho_h: &DMatrix<C64>,
    alpha: &lie::CartanVector,
    opts: &OptimizerOptions,
) -> Result<f64> {
    if let RepresentationSpec::Standard(_) = rep {
        // Δ_i(σ) = e^{α₁+⋯+α_i}·Δ_i(ρ_h), so the minimum is Σ e^{α_i}·ratio_i
        let ratios = minor_ratios(rho_h)?;
        let a = &alpha.factors[0];
        return Ok(ratios.iter().zip(a.iter()).map(|(r, ai)| r * ai.exp()).sum());
    }
    let ea = lie::exp_cartan(&alpha.clone().scale(0.5));
    let nd = n_dim(spec);
    if nd == 0 {
        let pi = repr::apply_unchecked(rep, &ea);
        return Ok((pi.adjoint() * rho_h * &pi).trace().re);
    }
    let objective = |v: &DVector<f64>| -> f64 {
        let n = vec_to_unipotent(spec, v);
        let pin = repr::apply_unchecked(rep, &ea.mul(&n));
        -(pin.adjoint() * rho_h * &pin).trace().re
    };
    let mut asc = Ascent { f: &objective, evals: 0 };
    let inner_opts = OptimizerOptions { restarts: 0, ..opts.clone() };
    match asc.run(&DVector::zeros(nd), &inner_opts)? {
        AscentOutcome::Converged { value, .. } => Ok(-value),
        AscentOutcome::Diverged { x } => Ok(-objective(&x)),
    }
}

impl lie::CartanVector {
    fn scale(mut self, t: f64) -> Self {
        for f in &mut self.factors {
            *f *= t;
        }
        self
    }
}

/// I_ρ(h·x0) = sup_{α∈𝔞} ⟨x0,α⟩ − ln min_{n∈N} Tr π(n)*σπ(n).
pub fn rate_an(
    rep: &RepresentationSpec,
    spec: &GroupSpec,
    rho: &DMatrix<C64>,
    x: &DualVector,
    opts: &OptimizerOptions,
) -> Result<RateResult> {
    let cd = moment::chamber_decompose(x);
    rate_an_at(rep, spec, rho, &cd, opts)
}

/// The 𝔞×N expression for a precomputed chamber decomposition (h, x0).
pub fn rate_an_at(
    rep: &RepresentationSpec,
    spec: &GroupSpec,
    rho: &DMatrix<C64>,
    cd: &ChamberDecomposition,
    opts: &OptimizerOptions,
) -> Result<RateResult> {
    let ctx = rate_context(rep, spec, rho)?;
    let pih = repr::apply_unchecked(rep, &cd.h);
    let rho_h = pih.adjoint() * rho * &pih;
    let rho_h = (&rho_h + rho_h.adjoint()).map(|z| z * 0.5);
    let adim = a_dim(spec);
    let x0 = cd.x0.clone();
    // closed-form inner may fail for rank-deficient states; remember and fall
    // back to the numeric descent with a Standard(d)-as-generic path
    let use_closed = matches!(rep, RepresentationSpec::Standard(_))
        && minor_ratios(&rho_h).is_ok();
    let objective = |v: &DVector<f64>| -> f64 {
        let alpha = vec_to_cartan(spec, v);
        let lin = x0.dot(&alpha);
        let inner = if use_closed {
            inner_min_over_n(rep, spec, &rho_h, &alpha, opts)
        } else {
            inner_min_generic(rep, spec, &rho_h, &alpha, opts)
        };
        match inner {
            Ok(t) if t > 0.0 => lin - t.ln(),
            _ => f64::NEG_INFINITY,
        }
    };
    let mut result = certified_supremum(
        &objective,
        adim,
        &cd.x0.coords(),
        &ctx.hull,
        ctx.non_faithful,
        opts,
    )?;
    result.raw_argmax = None;
    Ok(result)
}

fn inner_min_generic(
    rep: &RepresentationSpec,
    spec: &GroupSpec,
    rho_h: &DMatrix<C64>,
    alpha: &lie::CartanVector,
    opts: &OptimizerOptions,
) -> Result<f64> {
    let ea = lie::exp_cartan(&alpha.clone().scale(0.5));
    let nd = n_dim(spec);
    if nd == 0 {
        let pi = repr::apply_unchecked(rep, &ea);
        return Ok((pi.adjoint() * rho_h * &pi).trace().re);
    }
    let objective = |v: &DVector<f64>| -> f64 {
        let n = vec_to_unipotent(spec, v);
        let pin = repr::apply_unchecked(rep, &ea.mul(&n));
        -(pin.adjoint() * rho_h * &pin).trace().re
    };
    let mut asc = Ascent { f: &objective, evals: 0 };
    let inner_opts = OptimizerOptions { restarts: 0, ..opts.clone() };
    match asc.run(&DVector::zeros(nd), &inner_opts)? {
        AscentOutcome::Converged { value, .. } => Ok(-value),
        AscentOutcome::Diverged { x } => Ok(-objective(&x)),
    }
}

// ---------- closed forms ----------

/// Keyl's closed form: Σ x₀ᵢ ln x₀ᵢ − x₀ᵢ ln(Δᵢ(h*ρh)/Δᵢ₋₁(h*ρh)).
pub fn rate_keyl_closed(rho: &DMatrix<C64>, h: &DMatrix<C64>, x0: &DVector<f64>) -> f64 {
    let d = rho.nrows();
    let sum: f64 = x0.iter().sum();
    if (sum - 1.0).abs() > 1e-9 || x0.iter().any(|&v| v < -1e-12) || x0.len() != d {
        return f64::INFINITY;
    }
    let sigma = h.adjoint() * rho * h;
    let mut prev = 1.0;
    let mut total = 0.0;
    for i in 0..d {
        let minor = sigma.view((0, 0), (i + 1, i + 1)).into_owned().determinant().re;
        let ratio = minor / prev;
        let xi = x0[i].max(0.0);
        if xi > 0.0 {
            if ratio <= 0.0 {
                return f64::INFINITY;
            }
            total += xi * xi.ln() - xi * ratio.ln();
        }
        prev = minor;
        if prev.abs() < 1e-300 {
            prev = 0.0;
        }
        if prev == 0.0 && x0.iter().skip(i + 1).any(|&v| v > 0.0) {
            return f64::INFINITY;
        }
        if prev == 0.0 {
            break;
        }
    }
    total
}

/// Cramér rate: sup_α ⟨x,α⟩ − ln Σ_n r_n e^{⟨n,α⟩} for a finitely supported
/// integer-valued law.
pub fn rate_cramer(
    weight_probs: &[(Vec<i64>, f64)],
    x: &DVector<f64>,
    opts: &OptimizerOptions,
) -> Result<RateResult> {
    let total: f64 = weight_probs.iter().map(|(_, p)| p).sum();
    if (total - 1.0).abs() > 1e-9 || weight_probs.iter().any(|(_, p)| *p < 0.0) {
        return Err(Error::Config("weight probabilities must be a distribution".into()));
    }
    let support: Vec<(DVector<f64>, f64)> = weight_probs
        .iter()
        .filter(|(_, p)| *p > 0.0)
        .map(|(n, p)| (DVector::from_iterator(n.len(), n.iter().map(|&v| v as f64)), *p))
        .collect();
    if support.is_empty() {
        return Err(Error::Config("empty support".into()));
    }
    let hull: Vec<DVector<f64>> = support.iter().map(|(n, _)| n.clone()).collect();
    let dim = x.len();
    let objective = |alpha: &DVector<f64>| -> f64 {
        let lse = {
            // log-sum-exp of ln r_n + ⟨n, α⟩ for stability at large α
            let terms: Vec<f64> = support.iter().map(|(n, p)| p.ln() + n.dot(alpha)).collect();
            let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
        };
        x.dot(alpha) - lse
    };
    certified_supremum(&objective, dim, x, &hull, false, opts).map(|mut r| {
        r.raw_argmax = None;
        r
    })
}

/// Duffield's rate for the maximally mixed state of an irreducible rep:
/// sup_α ⟨x0,α⟩ − ln(Tr π(exp α)/dim ℋ); coordinates capped at ±50.
pub fn rate_maximally_mixed(
    rep: &RepresentationSpec,
    spec: &GroupSpec,
    x0: &DVector<f64>,
    opts: &OptimizerOptions,
) -> Result<f64> {
    match rep {
        RepresentationSpec::Spin { .. } | RepresentationSpec::Standard(_) => {}
        _ => return Err(Error::UnsupportedRep("maximally mixed rate needs an irreducible representation".into())),
    }
    let dim_h = rep.dimension() as f64;
    let wd = repr::weight_data(rep, spec)?;
    let weights = wd.real_weights();
    let adim = a_dim(spec);
    const CAP: f64 = 50.0;
    // smooth compactification α = CAP·tanh(u/CAP) keeps the ascent bounded
    // while leaving the interior optimum untouched
    let objective = |u: &DVector<f64>| -> f64 {
        let v = u.map(|t| CAP * (t / CAP).tanh());
        let alpha = vec_to_cartan(spec, &v);
        let ac = alpha.coords();
        let lse = {
            let terms: Vec<f64> = weights.iter().map(|(w, m)| m.ln() + w.dot(&ac)).collect();
            let mx = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            mx + terms.iter().map(|t| (t - mx).exp()).sum::<f64>().ln()
        };
        x0.dot(&ac) / chamber_scale(spec) - (lse - dim_h.ln())
    };
    let mut best = f64::NEG_INFINITY;
    let mut rng = ChaCha12Rng::seed_from_u64(opts.seed);
    for attempt in 0..=opts.restarts {
        let start = if attempt == 0 {
            DVector::zeros(adim)
        } else {
            DVector::from_fn(adim, |_, _| {
                let z: f64 = StandardNormal.sample(&mut rng);
                2.0 * z * attempt as f64
            })
        };
        let mut asc = Ascent { f: &objective, evals: 0 };
        if let Ok(AscentOutcome::Converged { value, .. }) = asc.run(&start, opts) {
            best = best.max(value);
        }
    }
    if best.is_finite() {
        Ok(best.max(0.0))
    } else {
        Err(Error::MaxIterations(opts.max_iterations))
    }
}

/// ⟨x0, α⟩ is taken in full chamber coordinates; for SU(2) the 1-d dominant
/// coordinate pairs with the doubled (a, −a) diagonal, so no rescaling needed.
fn chamber_scale(_spec: &GroupSpec) -> f64 {
    1.0
}

/// Contracted rate Ĩ_ρ(x0) = inf_{h∈K} I_ρ(h·x0), by multistart local descent
/// over the compact group.
pub fn rate_contracted(
    rep: &RepresentationSpec,
    spec: &GroupSpec,
    rho: &DMatrix<C64>,
    x0: &lie::CartanVector,
    opts: &OptimizerOptions,
) -> Result<(f64, GroupElement)> {
    moment::check_state(rho)?;
    let eval_at = |h: &GroupElement| -> Result<f64> {
        let cd = ChamberDecomposition { x0: x0.clone(), h: h.clone() };
        Ok(rate_an_at(rep, spec, rho, &cd, opts)?.value)
    };
    let mut rng = ChaCha12Rng::seed_from_u64(opts.seed ^ 0xc0ffee);
    // starts: identity, the eigenbasis of ρ when it matches a single factor,
    // then Haar randoms
    let mut starts = vec![GroupElement::identity(spec)];
    if spec.factors.len() == 1 && spec.factors[0].is_matrix() && rho.nrows() == spec.factors[0].ambient_dim() {
        let x = AlgebraVector::from_single_matrix(spec, rho.clone())?;
        starts.push(moment::chamber_decompose(&x).h);
    }
    for _ in 0..opts.restarts.max(2) {
        starts.push(lie::haar_sample(spec, &mut rng));
    }
    let dim = xi_dim(spec);
    let mut best_val = f64::INFINITY;
    let mut best_h = GroupElement::identity(spec);
    for h0 in starts {
        let mut h = h0;
        let mut fh = eval_at(&h)?;
        let mut step = 0.5;
        let mut stall = 0;
        while step > 1e-6 && stall < 8 {
            let dir = vec_to_alg(spec, &DVector::from_fn(dim, |_, _| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z
            }));
            let mut improved = false;
            for s in [step, -step] {
                let cand = h.mul(&exp_unitary(&dir, s));
                let fc = eval_at(&cand)?;
                if fc < fh - 1e-12 {
                    h = cand;
                    fh = fc;
                    improved = true;
                    break;
                }
            }
            if improved {
                stall = 0;
            } else {
                stall += 1;
                if stall % 4 == 0 {
                    step *= 0.5;
                }
            }
            if fh <= 1e-12 {
                break;
            }
        }
        if fh < best_val {
            best_val = fh;
            best_h = h;
        }
    }
    Ok((best_val, best_h))
}

/// exp(i·t·ξ) ∈ K for Hermitian ξ.
pub fn exp_unitary(xi: &AlgebraVector, t: f64) -> GroupElement {
    let factors = xi
        .factors
        .iter()
        .map(|f| match f {
            AlgFactor::Vector(v) => {
                Factor::Phases(v.map(|a| C64::new(0.0, t * a).exp()))
            }
            AlgFactor::Hermitian(m) => {
                let eig = m.clone().symmetric_eigen();
                let d = m.nrows();
                let mut diag = DMatrix::<C64>::zeros(d, d);
                for i in 0..d {
                    diag[(i, i)] = C64::new(0.0, t * eig.eigenvalues[i]).exp();
                }
                Factor::Matrix(&eig.eigenvectors * diag * eig.eigenvectors.adjoint())
            }
        })
        .collect();
    GroupElement { spec: xi.spec.clone(), factors }
}

/// Bipartite pure-state closed form on U(d₁)×U(d₂).
pub fn rate_bipartite_pure(
    psi: &DMatrix<C64>,
    h1: &DMatrix<C64>,
    h2: &DMatrix<C64>,
    x10: &DVector<f64>,
    x20: &DVector<f64>,
) -> f64 {
    let (d1, d2) = (psi.nrows(), psi.ncols());
    let dmin = d1.min(d2);
    // x_{1,0} and x_{2,0} must agree up to trailing zeros
    for i in 0..d1.max(d2) {
        let a = if i < x10.len() { x10[i] } else { 0.0 };
        let b = if i < x20.len() { x20[i] } else { 0.0 };
        if (a - b).abs() > 1e-9 {
            return f64::INFINITY;
        }
    }
    let sum: f64 = x10.iter().sum();
    if (sum - 1.0).abs() > 1e-9 || x10.iter().any(|&v| v < -1e-12) {
        return f64::INFINITY;
    }
    let core = h1.adjoint() * psi * h2.map(|z| z.conj());
    let mut prev = 1.0;
    let mut total = 0.0;
    for i in 0..dmin {
        let minor = core.view((0, 0), (i + 1, i + 1)).into_owned().determinant().norm_sqr();
        let xi = if i < x10.len() { x10[i].max(0.0) } else { 0.0 };
        let ratio = if prev > 0.0 { minor / prev } else { 0.0 };
        if xi > 0.0 {
            if ratio <= 0.0 {
                return f64::INFINITY;
            }
            total += xi * xi.ln() - xi * ratio.ln();
        }
        prev = minor;
    }
    total
}

/// Exponential tilting: for any g ∈ G the pair (x, I_ρ(x)) with
/// x = g·J(ρ′), ρ′ = π(g)*ρπ(g)/Tr, lies exactly on the rate-function graph.
pub fn tilt_point(
    rep: &RepresentationSpec,
    spec: &GroupSpec,
    rho: &DMatrix<C64>,
    g: &GroupElement,
) -> Result<(DualVector, f64)> {
    moment::check_state(rho)?;
    let pig = repr::apply_unchecked(rep, g);
    let tilted = pig.adjoint() * rho * &pig;
    let norm = tilted.trace().re;
    if norm <= 0.0 || !norm.is_finite() {
        return Err(Error::SingularInput { factor: 0, cond: f64::INFINITY, limit: lie::CONDITION_LIMIT });
    }
    let rho_p = (&tilted + tilted.adjoint()).map(|z| z * (0.5 / norm));
    let j = moment::moment_map(rep, spec, &rho_p)?;
    let x = moment::extended_action(g, &j)?;
    let value = -moment::ln_chi(&x, &g.inverse()?)? - norm.ln();
    Ok((x, value))
}
