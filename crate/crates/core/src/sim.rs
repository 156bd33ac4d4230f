//! Monte Carlo realization of the covariant tensor-power measurement and the
//! induced outcome measures μ_m for qubit and torus systems, together with
//! exact block summation, quadrature cross-checks, and the empirical
//! verification of the exponential upper bound and the law of large numbers.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::{self, AlgFactor, DualVector, Factor, GroupAtom, GroupElement, GroupSpec, C64};
use crate::rate::{self, OptimizerOptions};
use crate::repr::RepresentationSpec;

/// Hard cap on the tensor power for the block-operator recursion; memory and
/// time grow only polynomially in m, so this is generous.
pub const PROB_M_MAX: usize = 4096;

/// Acceptance-rate floor for the rejection sampler.
pub const ACCEPT_FLOOR: f64 = 1e-6;

const MAX_REJECTION_ATTEMPTS: usize = 2_000_000;

// ---------- outcome and region types ----------

/// One outcome of the covariant measurement on ρ^{⊗m}: the dominant weight λ
/// of the isotypic block and a sampled orbit point h·[v_λ], rescaled by 1/m.
#[derive(Debug, Clone)]
pub struct MeasurementOutcome {
    /// Dominant weight in the stored integer convention.
    pub lambda: Vec<i64>,
    /// Sampled orbit direction h ∈ K.
    pub direction: GroupElement,
    /// x = (1/m)·coadjoint(direction, λ) ∈ i𝔨*.
    pub x: DualVector,
    /// Probability mass of the isotypic block.
    pub weight_prob: f64,
    pub m: usize,
}

impl MeasurementOutcome {
    /// Chamber coordinates x0 = λ/m in real weight units.
    pub fn x0(&self) -> Vec<f64> {
        let scales = crate::repr::coord_scales(&self.x.spec);
        // per-factor scale: qubit/torus specs here are single-factor
        let s = scales[0];
        self.lambda.iter().map(|&v| v as f64 * s / self.m as f64).collect()
    }
}

/// Concrete encodings of the outcome regions the theorems quantify over.
#[derive(Debug, Clone)]
pub enum RegionSpec {
    /// {x : ‖x0(x) − center‖₂ ≤ radius} in chamber coordinates.
    ChamberBall { center: Vec<f64>, radius: f64 },
    /// Trace-norm ball {x : ‖x − center‖₁ ≤ radius} in i𝔨*.
    Ball { center: DualVector, radius: f64 },
    /// {x : ⟨normal, x0(x)⟩ ≥ offset} in chamber coordinates.
    HalfSpace { normal: Vec<f64>, offset: f64 },
    Complement(Box<RegionSpec>),
}

impl RegionSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            RegionSpec::ChamberBall { radius, .. } | RegionSpec::Ball { radius, .. } => {
                if *radius <= 0.0 {
                    return Err(Error::Config("region radius must be positive".into()));
                }
            }
            RegionSpec::HalfSpace { normal, .. } => {
                if normal.iter().all(|&v| v == 0.0) {
                    return Err(Error::Config("half-space normal must be nonzero".into()));
                }
            }
            RegionSpec::Complement(inner) => inner.validate()?,
        }
        Ok(())
    }

    /// Membership decided from chamber coordinates alone; `None` when the
    /// region depends on the orbit direction.
    pub fn contains_x0(&self, x0: &[f64]) -> Option<bool> {
        match self {
            RegionSpec::ChamberBall { center, radius } => {
                let d2: f64 = x0
                    .iter()
                    .zip(center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    + if center.len() > x0.len() {
                        center[x0.len()..].iter().map(|v| v * v).sum::<f64>()
                    } else {
                        0.0
                    };
                Some(d2.sqrt() <= *radius)
            }
            RegionSpec::Ball { .. } => None,
            RegionSpec::HalfSpace { normal, offset } => {
                let dot: f64 = x0.iter().zip(normal).map(|(a, b)| a * b).sum();
                Some(dot >= *offset)
            }
            RegionSpec::Complement(inner) => inner.contains_x0(x0).map(|b| !b),
        }
    }

    /// True when membership never needs the sampled direction.
    pub fn is_chamber_decidable(&self) -> bool {
        match self {
            RegionSpec::Ball { .. } => false,
            RegionSpec::Complement(inner) => inner.is_chamber_decidable(),
            _ => true,
        }
    }

    pub fn contains(&self, outcome: &MeasurementOutcome) -> bool {
        match self {
            RegionSpec::Ball { center, radius } => {
                let diff = outcome.x.add(&center.scale(-1.0));
                diff.trace_norm() <= *radius
            }
            RegionSpec::Complement(inner) => !inner.contains(outcome),
            _ => self.contains_x0(&outcome.x0()).unwrap(),
        }
    }
}

// ---------- simulation context ----------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SimKind {
    Qubit,
    Torus,
}

/// Per-block data: probability mass and the multiplicity-traced block
/// operator T_λ = Σ_copies V*ρ^{⊗m}V driving the direction density
/// dim(ℋ_λ)·⟨h v_λ|T_λ|h v_λ⟩ with respect to Haar.
#[derive(Debug, Clone)]
pub struct BlockData {
    pub lambda: Vec<i64>,
    pub prob: f64,
    pub dim: usize,
    t: Option<DMatrix<C64>>,
    t_norm: f64,
}

#[derive(Debug, Clone)]
pub struct SimContext {
    pub spec: GroupSpec,
    pub rep: RepresentationSpec,
    pub m: usize,
    pub blocks: Vec<BlockData>,
    kind: SimKind,
    cumulative: Vec<f64>,
}

fn sim_kind(rep: &RepresentationSpec, spec: &GroupSpec) -> Result<SimKind> {
    if spec.factors.len() != 1 {
        return Err(Error::UnsupportedRep("simulation needs a single-factor group".into()));
    }
    match (rep, &spec.factors[0]) {
        (RepresentationSpec::Standard(2), GroupAtom::Unitary(2)) => Ok(SimKind::Qubit),
        (RepresentationSpec::Spin { two_j: 1 }, GroupAtom::Su2) => Ok(SimKind::Qubit),
        (RepresentationSpec::Torus(_), GroupAtom::Torus(_)) => Ok(SimKind::Torus),
        _ => Err(Error::UnsupportedRep(
            "simulation supports qubit and torus base representations only".into(),
        )),
    }
}

/// Block operators of ρ^{⊗m} by coupling one copy at a time:
/// T_{t+1}^{j'} = Σ_j C*(T_t^j ⊗ ρ)C, starting from T_1^{1/2} = ρ.
fn qubit_block_operators(rho: &DMatrix<C64>, m: usize) -> Vec<(u32, DMatrix<C64>)> {
    let mut ops: Vec<(u32, DMatrix<C64>)> = vec![(1, rho.clone())];
    for _ in 1..m {
        let mut next: Vec<(u32, DMatrix<C64>)> = Vec::new();
        let mut add = |two_j: u32, t: DMatrix<C64>| {
            if let Some(slot) = next.iter_mut().find(|(j, _)| *j == two_j) {
                slot.1 += t;
            } else {
                next.push((two_j, t));
            }
        };
        for (two_j, t) in &ops {
            let tk = t.kronecker(rho);
            let cu = crate::repr::cg_couple_half(*two_j, two_j + 1);
            add(two_j + 1, cu.adjoint() * &tk * cu);
            if *two_j >= 1 {
                let cd = crate::repr::cg_couple_half(*two_j, two_j - 1);
                add(two_j - 1, cd.adjoint() * &tk * cd);
            }
        }
        next.sort_by_key(|(j, _)| std::cmp::Reverse(*j));
        ops = next;
    }
    ops
}

/// Exact weight law of the m-fold power of a torus representation:
/// the m-fold convolution of the single-copy diagonal law.
fn torus_block_law(rep: &RepresentationSpec, rho: &DMatrix<C64>, m: usize) -> Result<Vec<(Vec<i64>, f64)>> {
    let weights = match rep {
        RepresentationSpec::Torus(ws) => {
            let mut out = Vec::new();
            for (w, mult) in ws {
                for _ in 0..*mult {
                    out.push(w.clone());
                }
            }
            out
        }
        _ => return Err(Error::UnsupportedRep("torus law needs a torus representation".into())),
    };
    // single-copy law over weights; off-diagonal coherences never contribute
    // to coordinate-projector traces
    let mut base: Vec<(Vec<i64>, f64)> = Vec::new();
    for (i, w) in weights.iter().enumerate() {
        let p = rho[(i, i)].re;
        if let Some(slot) = base.iter_mut().find(|(v, _)| v == w) {
            slot.1 += p;
        } else {
            base.push((w.clone(), p));
        }
    }
    let dim = w_dim(&weights);
    let mut law: std::collections::BTreeMap<Vec<i64>, f64> = std::collections::BTreeMap::new();
    law.insert(vec![0; dim], 1.0);
    for _ in 0..m {
        let mut next: std::collections::BTreeMap<Vec<i64>, f64> = std::collections::BTreeMap::new();
        for (acc, p) in &law {
            for (w, q) in &base {
                if *q == 0.0 {
                    continue;
                }
                let key: Vec<i64> = acc.iter().zip(w).map(|(a, b)| a + b).collect();
                *next.entry(key).or_insert(0.0) += p * q;
            }
        }
        law = next;
    }
    Ok(law.into_iter().collect())
}

fn w_dim(weights: &[Vec<i64>]) -> usize {
    weights.first().map_or(0, |w| w.len())
}

/// Precompute everything the sampler and the exact summations need.
pub fn sim_context(
    rep: &RepresentationSpec,
    spec: &GroupSpec,
    rho: &DMatrix<C64>,
    m: usize,
) -> Result<SimContext> {
    crate::moment::check_state(rho)?;
    rep.validate(spec)?;
    if rho.nrows() != rep.dimension() {
        return Err(Error::MismatchedGroup(format!(
            "state dimension {} vs representation dimension {}",
            rho.nrows(),
            rep.dimension()
        )));
    }
    if m == 0 || m > PROB_M_MAX {
        return Err(Error::TooLarge { m, max: PROB_M_MAX });
    }
    let kind = sim_kind(rep, spec)?;
    let blocks: Vec<BlockData> = match kind {
        SimKind::Qubit => {
            let su2 = matches!(spec.factors[0], GroupAtom::Su2);
            qubit_block_operators(rho, m)
                .into_iter()
                .map(|(two_j, t)| {
                    let prob = t.trace().re;
                    let t_norm = t
                        .clone()
                        .symmetric_eigen()
                        .eigenvalues
                        .iter()
                        .cloned()
                        .fold(0.0, f64::max);
                    let lambda = if su2 {
                        vec![two_j as i64, -(two_j as i64)]
                    } else {
                        vec![(m as i64 + two_j as i64) / 2, (m as i64 - two_j as i64) / 2]
                    };
                    BlockData { lambda, prob, dim: two_j as usize + 1, t: Some(t), t_norm }
                })
                .collect()
        }
        SimKind::Torus => torus_block_law(rep, rho, m)?
            .into_iter()
            .map(|(w, p)| BlockData { lambda: w, prob: p, dim: 1, t: None, t_norm: 0.0 })
            .collect(),
    };
    let total: f64 = blocks.iter().map(|b| b.prob).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("block probabilities sum to {total}, not 1")));
    }
    let mut cumulative = Vec::with_capacity(blocks.len());
    let mut acc = 0.0;
    for b in &blocks {
        acc += b.prob;
        cumulative.push(acc);
    }
    Ok(SimContext { spec: spec.clone(), rep: rep.clone(), m, blocks, kind, cumulative })
}

/// λ → Tr(ρ^{⊗m}·P_λ) for the supported base representations.
pub fn isotypic_probabilities(
    rep: &RepresentationSpec,
    spec: &GroupSpec,
    rho: &DMatrix<C64>,
    m: usize,
) -> Result<Vec<(Vec<i64>, f64)>> {
    let ctx = sim_context(rep, spec, rho, m)?;
    Ok(ctx.blocks.into_iter().map(|b| (b.lambda, b.prob)).collect())
}

// ---------- coherent vectors and the direction sampler ----------

/// Components of the coherent vector (Sym^n h)·e_top from the first column
/// (a, c) of h: v_k = √C(n,k)·a^{n−k}·c^k.
fn coherent_vector(a: C64, c: C64, n: usize) -> DVector<C64> {
    let mut a_pows = vec![C64::new(1.0, 0.0); n + 1];
    let mut c_pows = vec![C64::new(1.0, 0.0); n + 1];
    for k in 1..=n {
        a_pows[k] = a_pows[k - 1] * a;
        c_pows[k] = c_pows[k - 1] * c;
    }
    let mut lnf = vec![0.0f64; n + 1];
    for k in 1..=n {
        lnf[k] = lnf[k - 1] + (k as f64).ln();
    }
    DVector::from_fn(n + 1, |k, _| {
        let sqrt_binom = (0.5 * (lnf[n] - lnf[k] - lnf[n - k])).exp();
        a_pows[n - k] * c_pows[k] * sqrt_binom
    })
}

fn first_column(h: &GroupElement) -> (C64, C64) {
    match &h.factors[0] {
        Factor::Matrix(m) => (m[(0, 0)], m[(1, 0)]),
        Factor::Phases(_) => (C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
    }
}

/// Sample h ∈ K with density dim(ℋ_λ)·⟨h v_λ|T_λ|h v_λ⟩/p_λ against Haar by
/// rejection with envelope dim(ℋ_λ)·‖T_λ‖_op.
pub fn sample_orbit_direction<R: Rng>(
    ctx: &SimContext,
    block: &BlockData,
    rng: &mut R,
) -> Result<GroupElement> {
    let t = match &block.t {
        None => return Ok(GroupElement::identity(&ctx.spec)), // torus orbit is a point
        Some(t) => t,
    };
    let n = block.dim - 1;
    for _ in 0..MAX_REJECTION_ATTEMPTS {
        let h = lie::haar_sample(&ctx.spec, rng);
        let (a, c) = first_column(&h);
        let v = coherent_vector(a, c, n);
        let dens = (v.adjoint() * t * &v)[(0, 0)].re;
        let accept = dens / block.t_norm;
        if accept > 1.0 + 1e-9 || !accept.is_finite() {
            return Err(Error::EnvelopeOverflow { weight: dens, bound: block.t_norm });
        }
        if rng.random::<f64>() < accept {
            return Ok(h);
        }
    }
    Err(Error::Timeout { floor: ACCEPT_FLOOR })
}

fn outcome_for(ctx: &SimContext, block: &BlockData, direction: GroupElement) -> MeasurementOutcome {
    let m = ctx.m as f64;
    let x = match ctx.kind {
        SimKind::Torus => DualVector {
            spec: ctx.spec.clone(),
            factors: vec![AlgFactor::Vector(DVector::from_iterator(
                block.lambda.len(),
                block.lambda.iter().map(|&v| v as f64 / m),
            ))],
        },
        SimKind::Qubit => {
            let scale = crate::repr::coord_scales(&ctx.spec)[0];
            let diag = DMatrix::from_diagonal(&DVector::from_iterator(
                2,
                block.lambda.iter().map(|&v| C64::new(v as f64 * scale / m, 0.0)),
            ));
            let x0 = DualVector { spec: ctx.spec.clone(), factors: vec![AlgFactor::Hermitian(diag)] };
            lie::coadjoint(&direction, &x0)
        }
    };
    MeasurementOutcome { lambda: block.lambda.clone(), direction, x, weight_prob: block.prob, m: ctx.m }
}

/// Two-stage exact sampler: the isotypic block from its exact law, then the
/// orbit direction by rejection.
pub fn sample_measurement<R: Rng>(ctx: &SimContext, rng: &mut R) -> Result<MeasurementOutcome> {
    let u: f64 = rng.random();
    let idx = ctx.cumulative.partition_point(|&c| c < u).min(ctx.blocks.len() - 1);
    let block = &ctx.blocks[idx];
    let direction = sample_orbit_direction(ctx, block, rng)?;
    Ok(outcome_for(ctx, block, direction))
}

// ---------- μ_m estimation ----------

#[derive(Debug, Clone, Serialize)]
pub struct MuEstimate {
    pub p_hat: f64,
    /// Wilson 95% interval.
    pub ci: (f64, f64),
    pub n_samples: usize,
    pub hits: usize,
}

pub fn wilson(hits: usize, n: usize) -> (f64, f64) {
    let z = 1.959963984540054f64;
    let n_f = n as f64;
    let p = hits as f64 / n_f;
    let denom = 1.0 + z * z / n_f;
    let center = (p + z * z / (2.0 * n_f)) / denom;
    let half = z * (p * (1.0 - p) / n_f + z * z / (4.0 * n_f * n_f)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Monte Carlo estimate of μ_m(region) with a Wilson 95% interval; output is
/// a function of (seed, workers) only.
pub fn estimate_mu(
    ctx: &SimContext,
    region: &RegionSpec,
    n_samples: usize,
    seed: u64,
    workers: usize,
) -> Result<MuEstimate> {
    region.validate()?;
    if n_samples == 0 || workers == 0 {
        return Err(Error::Config("need at least one sample and one worker".into()));
    }
    // chamber-decidable regions never need the rejection stage
    let skip_direction = region.is_chamber_decidable();
    let counts: Vec<usize> = (0..workers)
        .map(|w| n_samples / workers + usize::from(w < n_samples % workers))
        .collect();
    let hits: usize = counts
        .par_iter()
        .enumerate()
        .map(|(w, &count)| -> Result<usize> {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(w as u64 + 1);
            let mut local = 0usize;
            for _ in 0..count {
                let inside = if skip_direction {
                    let u: f64 = rng.random();
                    let idx = ctx.cumulative.partition_point(|&c| c < u).min(ctx.blocks.len() - 1);
                    let block = &ctx.blocks[idx];
                    let scale = crate::repr::coord_scales(&ctx.spec)[0];
                    let x0: Vec<f64> = block
                        .lambda
                        .iter()
                        .map(|&v| v as f64 * scale / ctx.m as f64)
                        .collect();
                    region.contains_x0(&x0).unwrap()
                } else {
                    let outcome = sample_measurement(ctx, &mut rng)?;
                    region.contains(&outcome)
                };
                local += usize::from(inside);
            }
            Ok(local)
        })
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum();
    Ok(MuEstimate {
        p_hat: hits as f64 / n_samples as f64,
        ci: wilson(hits, n_samples),
        n_samples,
        hits,
    })
}

/// Exact μ_m(region) by block summation; `None` when the region depends on
/// the orbit direction.
pub fn mu_exact(ctx: &SimContext, region: &RegionSpec) -> Option<f64> {
    if !region.is_chamber_decidable() {
        return None;
    }
    let scale = crate::repr::coord_scales(&ctx.spec)[0];
    let mut total = 0.0;
    for b in &ctx.blocks {
        let x0: Vec<f64> = b.lambda.iter().map(|&v| v as f64 * scale / ctx.m as f64).collect();
        if region.contains_x0(&x0).unwrap() {
            total += b.prob;
        }
    }
    Some(total)
}

// ---------- quadrature over the orbit coordinate ----------

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P'_n(x)
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            pp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / pp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Direction density of a qubit block at orbit coordinates (u, φ), where the
/// first column of h is (√((1+u)/2), √((1−u)/2)·e^{iφ}); Haar projects to
/// uniform du/2·dφ/2π. Integrates to the block probability.
fn qubit_direction_density(block: &BlockData, u: f64, phi: f64) -> f64 {
    let a = C64::new(((1.0 + u) / 2.0).sqrt(), 0.0);
    let r = ((1.0 - u) / 2.0).sqrt();
    let c = C64::new(r * phi.cos(), r * phi.sin());
    let n = block.dim - 1;
    let v = coherent_vector(a, c, n);
    let t = block.t.as_ref().expect("qubit block");
    block.dim as f64 * (v.adjoint() * t * &v)[(0, 0)].re
}

/// Joint outcome distribution over (block, u-bin) by quadrature:
/// Gauss–Legendre in u on each bin, trapezoid in φ. Row per block, column per
/// bin defined by consecutive `u_edges`.
pub fn outcome_distribution_quadrature(
    ctx: &SimContext,
    u_edges: &[f64],
    n_gl: usize,
    n_phi: usize,
) -> Result<Vec<Vec<f64>>> {
    if ctx.kind != SimKind::Qubit {
        return Err(Error::UnsupportedRep("direction quadrature is a qubit-path feature".into()));
    }
    let (nodes, weights) = gauss_legendre(n_gl);
    let mut out = Vec::with_capacity(ctx.blocks.len());
    for b in &ctx.blocks {
        let mut row = Vec::with_capacity(u_edges.len() - 1);
        for win in u_edges.windows(2) {
            let (lo, hi) = (win[0], win[1]);
            let mut total = 0.0;
            for (x, w) in nodes.iter().zip(&weights) {
                let u = 0.5 * (hi - lo) * x + 0.5 * (hi + lo);
                // periodic trapezoid = uniform average over φ
                let mut phi_avg = 0.0;
                for k in 0..n_phi {
                    phi_avg += qubit_direction_density(b, u, 2.0 * PI * k as f64 / n_phi as f64);
                }
                phi_avg /= n_phi as f64;
                total += w * 0.5 * (hi - lo) * phi_avg;
            }
            // du/2 normalization of the uniform u-marginal
            row.push(total / 2.0);
        }
        out.push(row);
    }
    Ok(out)
}

/// Bin index of an outcome under the same u-statistic the quadrature uses:
/// u = 2|h₀₀|² − 1 from the sampled direction's first column.
pub fn direction_bin(outcome: &MeasurementOutcome, u_edges: &[f64]) -> usize {
    let u = match &outcome.direction.factors[0] {
        Factor::Matrix(h) => 2.0 * h[(0, 0)].norm_sqr() - 1.0,
        Factor::Phases(_) => 0.0,
    };
    let nbins = u_edges.len() - 1;
    for i in 0..nbins {
        if u <= u_edges[i + 1] {
            return i;
        }
    }
    nbins - 1
}

// ---------- rate infimum over a region ----------

/// inf over the region of the contracted rate (or the Cramér rate on a
/// torus), by a filtered chamber grid with one local refinement pass.
pub fn inf_rate_over_region(
    rep: &RepresentationSpec,
    spec: &GroupSpec,
    rho: &DMatrix<C64>,
    region: &RegionSpec,
    opts: &OptimizerOptions,
) -> Result<f64> {
    if !region.is_chamber_decidable() {
        // a dual-space ball that contains J(ρ) still has a known infimum: 0
        if let RegionSpec::Ball { center, radius } = region {
            let j = crate::moment::moment_map(rep, spec, rho)?;
            if j.add(&center.scale(-1.0)).trace_norm() <= *radius {
                return Ok(0.0);
            }
        }
        return Err(Error::Config("rate infimum needs a chamber-decidable region".into()));
    }
    let kind = sim_kind(rep, spec)?;
    match kind {
        SimKind::Torus => {
            let law = torus_block_law(rep, rho, 1)?;
            let ilaw: Vec<(Vec<i64>, f64)> = law;
            if w_dim(&ilaw.iter().map(|(w, _)| w.clone()).collect::<Vec<_>>()) != 1 {
                return Err(Error::UnsupportedRep("region infimum supports rank-1 tori".into()));
            }
            let lo = ilaw.iter().map(|(w, _)| w[0] as f64).fold(f64::INFINITY, f64::min);
            let hi = ilaw.iter().map(|(w, _)| w[0] as f64).fold(f64::NEG_INFINITY, f64::max);
            let eval = |x: f64| -> Result<f64> {
                Ok(rate::rate_cramer(&ilaw, &DVector::from_vec(vec![x]), opts)?.value)
            };
            grid_min_1d(lo, hi, 200, |x| region.contains_x0(&[x]).unwrap(), eval)
        }
        SimKind::Qubit => {
            let su2 = matches!(spec.factors[0], GroupAtom::Su2);
            let inner_opts = OptimizerOptions { restarts: 3, ..opts.clone() };
            let eval = |t: f64| -> Result<f64> {
                // chamber point (t, 1−t) for U(2), (t, −t) for SU(2)
                let coords = if su2 { vec![t, -t] } else { vec![t, 1.0 - t] };
                let x0 = lie::CartanVector::from_coords(spec, &DVector::from_vec(coords))?;
                Ok(rate::rate_contracted(rep, spec, rho, &x0, &inner_opts)?.0)
            };
            let x0_of = |t: f64| if su2 { vec![t, -t] } else { vec![t, 1.0 - t] };
            let (lo, hi) = if su2 { (0.0, 0.5) } else { (0.5, 1.0) };
            grid_min_1d(lo, hi, 50, |t| region.contains_x0(&x0_of(t)).unwrap(), eval)
        }
    }
}

fn grid_min_1d(
    lo: f64,
    hi: f64,
    steps: usize,
    in_region: impl Fn(f64) -> bool,
    eval: impl Fn(f64) -> Result<f64>,
) -> Result<f64> {
    let h = (hi - lo) / steps as f64;
    let mut best: Option<(f64, f64)> = None;
    for i in 0..=steps {
        let t = lo + i as f64 * h;
        if !in_region(t) {
            continue;
        }
        let v = eval(t)?;
        if best.map_or(true, |(_, bv)| v < bv) {
            best = Some((t, v));
        }
    }
    let (t0, mut vmin) = best.ok_or(Error::DegenerateRegion { m: 0 })?;
    // one refinement pass at 1/10 resolution around the coarse minimizer
    for i in 0..=20 {
        let t = t0 - h + i as f64 * (h / 10.0);
        if t < lo || t > hi || !in_region(t) {
            continue;
        }
        vmin = vmin.min(eval(t)?);
    }
    Ok(vmin)
}

// ---------- upper bound and empirical rate ----------

#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub m: usize,
    /// Exact μ_m, or the Wilson upper confidence limit when estimated by MC.
    pub mu_upper: f64,
    pub inf_rate: f64,
    /// ln of the bound (m+1)^{D(D+1)/2}·e^{−m·inf I}.
    pub log_rhs: f64,
    pub exact: bool,
    pub holds: bool,
}

/// Checks μ_m(F) ≤ (m+1)^{D(D+1)/2}·e^{−m·inf_F I} for each m, with D the
/// single-copy dimension; exact block sums where the region allows, MC with
/// the upper confidence limit otherwise.
pub fn verify_upper_bound(
    rep: &RepresentationSpec,
    spec: &GroupSpec,
    rho: &DMatrix<C64>,
    m_list: &[usize],
    region: &RegionSpec,
    n_samples: usize,
    seed: u64,
    workers: usize,
    opts: &OptimizerOptions,
) -> Result<Vec<BoundCheck>> {
    region.validate()?;
    let d = rep.dimension() as f64;
    let exponent = d * (d + 1.0) / 2.0;
    let inf_rate = inf_rate_over_region(rep, spec, rho, region, opts)?;
    let mut out = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let ctx = sim_context(rep, spec, rho, m)?;
        let (mu_upper, exact) = match mu_exact(&ctx, region) {
            Some(v) => (v, true),
            None => (estimate_mu(&ctx, region, n_samples, seed, workers)?.ci.1, false),
        };
        let log_rhs = exponent * ((m + 1) as f64).ln() - m as f64 * inf_rate;
        let holds = mu_upper <= 0.0 || mu_upper.ln() <= log_rhs + 1e-12;
        out.push(BoundCheck { m, mu_upper, inf_rate, log_rhs, exact, holds });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct RatePoint {
    pub m: usize,
    pub mu: f64,
    /// −(1/m)·ln μ̂_m; a lower bound on the decay rate when μ̂ = 0.
    pub rate: f64,
    /// Rate interval propagated from the Wilson interval (collapses when
    /// exact summation was used).
    pub rate_lo: f64,
    pub rate_hi: f64,
    pub exact: bool,
    pub lower_bound_only: bool,
}

/// Empirical decay rates −(1/m)·ln μ̂_m(region) along `m_list`.
pub fn empirical_rate(
    rep: &RepresentationSpec,
    spec: &GroupSpec,
    rho: &DMatrix<C64>,
    region: &RegionSpec,
    m_list: &[usize],
    n_samples: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<RatePoint>> {
    region.validate()?;
    let mut out = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let ctx = sim_context(rep, spec, rho, m)?;
        let point = match mu_exact(&ctx, region) {
            Some(mu) => {
                if mu == 0.0 {
                    RatePoint {
                        m,
                        mu,
                        rate: f64::INFINITY,
                        rate_lo: f64::INFINITY,
                        rate_hi: f64::INFINITY,
                        exact: true,
                        lower_bound_only: true,
                    }
                } else {
                    let r = -mu.ln() / m as f64;
                    RatePoint { m, mu, rate: r, rate_lo: r, rate_hi: r, exact: true, lower_bound_only: false }
                }
            }
            None => {
                let est = estimate_mu(&ctx, region, n_samples, seed, workers)?;
                if est.hits == 0 {
                    // μ̂ = 0: report the rate implied by the upper confidence
                    // limit as a lower bound
                    RatePoint {
                        m,
                        mu: 0.0,
                        rate: -est.ci.1.ln() / m as f64,
                        rate_lo: -est.ci.1.ln() / m as f64,
                        rate_hi: f64::INFINITY,
                        exact: false,
                        lower_bound_only: true,
                    }
                } else {
                    RatePoint {
                        m,
                        mu: est.p_hat,
                        rate: -est.p_hat.ln() / m as f64,
                        rate_lo: -est.ci.1.ln() / m as f64,
                        rate_hi: -est.ci.0.ln() / m as f64,
                        exact: false,
                        lower_bound_only: false,
                    }
                }
            }
        };
        out.push(point);
    }
    Ok(out)
}

// ---------- χ² helper for distribution tests ----------

/// Survival function of the χ² distribution: Q(dof/2, stat/2).
pub fn chi2_pvalue(stat: f64, dof: usize) -> f64 {
    if stat <= 0.0 {
        return 1.0;
    }
    gammq(dof as f64 / 2.0, stat / 2.0)
}

/// Regularized upper incomplete gamma Q(a, x): series for x < a+1,
/// Lentz continued fraction otherwise.
fn gammq(a: f64, x: f64) -> f64 {
    let gln = ln_gamma(a);
    if x < a + 1.0 {
        // series for P(a, x)
        let mut ap = a;
        let mut sum = 1.0 / a;
        let mut del = sum;
        for _ in 0..500 {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * 1e-15 {
                break;
            }
        }
        1.0 - sum * (-x + a * x.ln() - gln).exp()
    } else {
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-15 {
                break;
            }
        }
        (-x + a * x.ln() - gln).exp() * h
    }
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos, g = 7
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + 7.5;
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt().ln() + (x + 0.5) * t.ln() - t + a.ln()
}
