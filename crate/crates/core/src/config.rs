//! JSON run configuration and the text encodings used by the command-line
//! interface: complex matrices as row-major [re, im] pairs, region strings,
//! grid strings, and deterministic CSV emission.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{AlgFactor, DualVector, GroupAtom, GroupSpec, C64};
use crate::rate::OptimizerOptions;
use crate::repr::RepresentationSpec;
use crate::sim::RegionSpec;

// ---------- serde mirrors ----------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupAtomConfig {
    Torus(usize),
    Su2,
    Unitary(usize),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepConfig {
    Standard(usize),
    /// Spin(j) given as 2j.
    SpinTwoJ(u32),
    /// Torus weights with multiplicities.
    Torus(Vec<(Vec<i64>, usize)>),
    Product(Vec<RepConfig>),
    Power(Box<RepConfig>, usize),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateConfig {
    /// Dense Hermitian matrix, row-major [re, im] entries.
    Matrix(Vec<Vec<[f64; 2]>>),
    Diagonal(Vec<f64>),
    /// Pure state from a (not necessarily normalized) vector.
    Pure(Vec<[f64; 2]>),
    MaximallyMixed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormatConfig {
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputConfig {
    pub format: FormatConfig,
    #[serde(default)]
    pub path: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub group: Vec<GroupAtomConfig>,
    pub representation: RepConfig,
    pub state: StateConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub output: Option<OutputConfig>,
    /// Optional rate-function argument: either a dense dual vector per factor
    /// or a chamber coordinate vector.
    #[serde(default)]
    pub x: Option<XConfig>,
}

fn default_workers() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XConfig {
    /// One Hermitian matrix (or real vector for torus factors) per group factor.
    Matrices(Vec<MatrixOrVector>),
    /// Chamber coordinates x0 (the group element h defaults to the identity).
    Chamber(Vec<f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixOrVector {
    Matrix(Vec<Vec<[f64; 2]>>),
    Vector(Vec<f64>),
}

/// Partial optimizer override; unset fields keep their defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    pub max_iterations: Option<usize>,
    pub gradient_tolerance: Option<f64>,
    pub restarts: Option<usize>,
    pub divergence_norm: Option<f64>,
}

impl OptimizerConfig {
    pub fn build(&self, seed: u64) -> OptimizerOptions {
        let mut o = OptimizerOptions { seed, ..OptimizerOptions::default() };
        if let Some(v) = self.max_iterations {
            o.max_iterations = v;
        }
        if let Some(v) = self.gradient_tolerance {
            o.gradient_tolerance = v;
        }
        if let Some(v) = self.restarts {
            o.restarts = v;
        }
        if let Some(v) = self.divergence_norm {
            o.divergence_norm = v;
        }
        o
    }
}

// ---------- conversions ----------

pub fn parse_matrix(rows: &[Vec<[f64; 2]>]) -> Result<DMatrix<C64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(Error::Config("matrix rows must be nonempty and rectangular".into()));
    }
    let m = rows[0].len();
    Ok(DMatrix::from_fn(n, m, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

pub fn emit_matrix(m: &DMatrix<C64>) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))
    }

    pub fn group_spec(&self) -> Result<GroupSpec> {
        let atoms = self
            .group
            .iter()
            .map(|a| match a {
                GroupAtomConfig::Torus(d) => GroupAtom::Torus(*d),
                GroupAtomConfig::Su2 => GroupAtom::Su2,
                GroupAtomConfig::Unitary(d) => GroupAtom::Unitary(*d),
            })
            .collect();
        GroupSpec::new(atoms)
    }

    pub fn representation(&self) -> Result<RepresentationSpec> {
        fn conv(r: &RepConfig) -> RepresentationSpec {
            match r {
                RepConfig::Standard(d) => RepresentationSpec::Standard(*d),
                RepConfig::SpinTwoJ(t) => RepresentationSpec::Spin { two_j: *t },
                RepConfig::Torus(ws) => RepresentationSpec::Torus(ws.clone()),
                RepConfig::Product(rs) => RepresentationSpec::Product(rs.iter().map(conv).collect()),
                RepConfig::Power(b, m) => RepresentationSpec::Power(Box::new(conv(b)), *m),
            }
        }
        let rep = conv(&self.representation);
        rep.validate(&self.group_spec()?)?;
        Ok(rep)
    }

    pub fn state(&self) -> Result<DMatrix<C64>> {
        let dim = self.representation()?.dimension();
        let rho = match &self.state {
            StateConfig::Matrix(rows) => parse_matrix(rows)?,
            StateConfig::Diagonal(d) => DMatrix::from_diagonal(&DVector::from_iterator(
                d.len(),
                d.iter().map(|&v| C64::new(v, 0.0)),
            )),
            StateConfig::Pure(v) => {
                let psi = DVector::from_iterator(v.len(), v.iter().map(|e| C64::new(e[0], e[1])));
                let n2 = psi.norm_squared();
                if n2 <= 0.0 {
                    return Err(Error::Config("pure-state vector must be nonzero".into()));
                }
                (&psi * psi.adjoint()).map(|z| z / n2)
            }
            StateConfig::MaximallyMixed => {
                DMatrix::identity(dim, dim).map(|z: C64| z / dim as f64)
            }
        };
        if rho.nrows() != dim {
            return Err(Error::Config(format!(
                "state dimension {} does not match representation dimension {}",
                rho.nrows(),
                dim
            )));
        }
        crate::moment::check_state(&rho)?;
        Ok(rho)
    }

    /// The dual-vector argument x, when the config provides one.
    pub fn x_dual(&self) -> Result<Option<DualVector>> {
        let spec = self.group_spec()?;
        match &self.x {
            None => Ok(None),
            Some(XConfig::Matrices(ms)) => {
                if ms.len() != spec.factors.len() {
                    return Err(Error::Config("x needs one entry per group factor".into()));
                }
                let factors = ms
                    .iter()
                    .map(|m| -> Result<AlgFactor> {
                        Ok(match m {
                            MatrixOrVector::Matrix(rows) => AlgFactor::Hermitian(parse_matrix(rows)?),
                            MatrixOrVector::Vector(v) => {
                                AlgFactor::Vector(DVector::from_vec(v.clone()))
                            }
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Some(crate::lie::AlgebraVector::new(&spec, factors)?))
            }
            Some(XConfig::Chamber(coords)) => Ok(Some(chamber_to_dual(&spec, coords)?)),
        }
    }

    pub fn chamber_coords(&self) -> Result<Option<Vec<f64>>> {
        match &self.x {
            Some(XConfig::Chamber(c)) => Ok(Some(c.clone())),
            _ => Ok(None),
        }
    }
}

/// Chamber coordinates → the diagonal dual vector (h = identity).
pub fn chamber_to_dual(spec: &GroupSpec, coords: &[f64]) -> Result<DualVector> {
    let cv = crate::lie::CartanVector::from_coords(spec, &DVector::from_vec(coords.to_vec()))?;
    let cd = crate::moment::ChamberDecomposition {
        x0: cv,
        h: crate::lie::GroupElement::identity(spec),
    };
    Ok(cd.reconstruct())
}

// ---------- rate-method dispatch ----------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMethod {
    Numeric,
    An,
    Keyl,
    Cramer,
    Mixed,
    Contracted,
    Bipartite,
}

impl std::str::FromStr for RateMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "numeric" => RateMethod::Numeric,
            "an" => RateMethod::An,
            "keyl" => RateMethod::Keyl,
            "cramer" => RateMethod::Cramer,
            "mixed" => RateMethod::Mixed,
            "contracted" => RateMethod::Contracted,
            "bipartite" => RateMethod::Bipartite,
            other => return Err(Error::Config(format!("unknown rate method '{other}'"))),
        })
    }
}

impl RateMethod {
    pub fn name(self) -> &'static str {
        match self {
            RateMethod::Numeric => "numeric",
            RateMethod::An => "an",
            RateMethod::Keyl => "keyl",
            RateMethod::Cramer => "cramer",
            RateMethod::Mixed => "mixed",
            RateMethod::Contracted => "contracted",
            RateMethod::Bipartite => "bipartite",
        }
    }
}

/// Evaluate the configured rate function at the configured point.
pub fn evaluate_rate(cfg: &RunConfig, method: RateMethod, seed: u64) -> Result<crate::rate::RateResult> {
    use crate::rate::{self, RateResult};

    let opts = cfg.optimizer.build(seed);
    let spec = cfg.group_spec()?;
    let rep = cfg.representation()?;
    let rho = cfg.state()?;
    let need_x = || {
        cfg.x_dual()?
            .ok_or_else(|| Error::Config("this method needs an 'x' entry in the config".into()))
    };
    let need_coords = || {
        cfg.chamber_coords()?
            .ok_or_else(|| Error::Config("this method needs chamber coordinates in 'x'".into()))
    };

    match method {
        RateMethod::Numeric => rate::rate_numeric(&rep, &spec, &rho, &need_x()?, &opts),
        RateMethod::An => rate::rate_an(&rep, &spec, &rho, &need_x()?, &opts),
        RateMethod::Keyl => {
            let cd = crate::moment::chamber_decompose(&need_x()?);
            let h = match &cd.h.factors[0] {
                crate::lie::Factor::Matrix(m) => m.clone(),
                _ => return Err(Error::UnsupportedRep("the Keyl closed form needs a matrix group".into())),
            };
            Ok(RateResult::closed_form(rate::rate_keyl_closed(&rho, &h, &cd.x0.coords())))
        }
        RateMethod::Cramer => {
            let coords = need_coords()?;
            let law = crate::sim::isotypic_probabilities(&rep, &spec, &rho, 1)?;
            rate::rate_cramer(&law, &DVector::from_vec(coords), &opts)
        }
        RateMethod::Mixed => {
            let coords = need_coords()?;
            let v = rate::rate_maximally_mixed(&rep, &spec, &DVector::from_vec(coords), &opts)?;
            Ok(RateResult::closed_form(v))
        }
        RateMethod::Contracted => {
            let coords = need_coords()?;
            let x0 = crate::lie::CartanVector::from_coords(&spec, &DVector::from_vec(coords))?;
            let (v, _) = rate::rate_contracted(&rep, &spec, &rho, &x0, &opts)?;
            Ok(RateResult::closed_form(v))
        }
        RateMethod::Bipartite => {
            let coords = need_coords()?;
            let (d1, d2) = match &rep {
                RepresentationSpec::Product(parts) => match parts.as_slice() {
                    [RepresentationSpec::Standard(a), RepresentationSpec::Standard(b)] => (*a, *b),
                    _ => return Err(Error::UnsupportedRep("bipartite needs Standard(d1) × Standard(d2)".into())),
                },
                _ => return Err(Error::UnsupportedRep("bipartite needs a two-factor product representation".into())),
            };
            let psi_vec = match &cfg.state {
                StateConfig::Pure(v) => DVector::from_iterator(v.len(), v.iter().map(|e| C64::new(e[0], e[1]))),
                _ => return Err(Error::Config("bipartite needs a pure state".into())),
            };
            let norm = psi_vec.norm();
            let psi = DMatrix::from_fn(d1, d2, |i, j| psi_vec[i * d2 + j] / norm);
            let id1 = DMatrix::<C64>::identity(d1, d1);
            let id2 = DMatrix::<C64>::identity(d2, d2);
            let x0 = DVector::from_vec(coords);
            Ok(RateResult::closed_form(rate::rate_bipartite_pure(&psi, &id1, &id2, &x0, &x0)))
        }
    }
}

// ---------- region and grid strings ----------

/// Region grammar (colon-separated):
///   `halfspace:<n1,n2,…>:<offset>`     — ⟨n, x0⟩ ≥ offset
///   `chamberball:<c1,c2,…>:<radius>`   — ‖x0 − c‖₂ ≤ radius
///   `ball:<radius>`                    — trace-norm ball around J(ρ)
///   `complement:<region>`              — set complement
pub fn parse_region(text: &str, center: Option<&DualVector>) -> Result<RegionSpec> {
    let parse_vec = |s: &str| -> Result<Vec<f64>> {
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Config(format!("bad number '{t}': {e}"))))
            .collect()
    };
    if let Some(rest) = text.strip_prefix("complement:") {
        return Ok(RegionSpec::Complement(Box::new(parse_region(rest, center)?)));
    }
    let region = if let Some(rest) = text.strip_prefix("halfspace:") {
        let (normal, offset) = rest
            .rsplit_once(':')
            .ok_or_else(|| Error::Config("halfspace needs 'halfspace:<normal>:<offset>'".into()))?;
        RegionSpec::HalfSpace {
            normal: parse_vec(normal)?,
            offset: offset.trim().parse().map_err(|e| Error::Config(format!("bad offset: {e}")))?,
        }
    } else if let Some(rest) = text.strip_prefix("chamberball:") {
        let (center, radius) = rest
            .rsplit_once(':')
            .ok_or_else(|| Error::Config("chamberball needs 'chamberball:<center>:<radius>'".into()))?;
        RegionSpec::ChamberBall {
            center: parse_vec(center)?,
            radius: radius.trim().parse().map_err(|e| Error::Config(format!("bad radius: {e}")))?,
        }
    } else if let Some(rest) = text.strip_prefix("ball:") {
        let c = center.ok_or_else(|| Error::Config("trace-norm ball needs a configured state".into()))?;
        RegionSpec::Ball {
            center: c.clone(),
            radius: rest.trim().parse().map_err(|e| Error::Config(format!("bad radius: {e}")))?,
        }
    } else {
        return Err(Error::Config(format!("unknown region '{text}'")));
    };
    region.validate()?;
    Ok(region)
}

/// Grid grammar: `<start>:<stop>:<points>` over the leading chamber coordinate.
pub fn parse_grid(text: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Config("grid needs '<start>:<stop>:<points>'".into()));
    }
    let start: f64 = parts[0].parse().map_err(|e| Error::Config(format!("bad grid start: {e}")))?;
    let stop: f64 = parts[1].parse().map_err(|e| Error::Config(format!("bad grid stop: {e}")))?;
    let points: usize = parts[2].parse().map_err(|e| Error::Config(format!("bad grid count: {e}")))?;
    if points < 2 || stop <= start {
        return Err(Error::Config("grid needs stop > start and at least 2 points".into()));
    }
    Ok((start, stop, points))
}

/// m-list grammar: comma-separated positive integers, or `<a>..<b>` ranges.
pub fn parse_m_list(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if let Some((a, b)) = part.split_once("..") {
            let a: usize = a.parse().map_err(|e| Error::Config(format!("bad m '{part}': {e}")))?;
            let b: usize = b.parse().map_err(|e| Error::Config(format!("bad m '{part}': {e}")))?;
            if a == 0 || b < a {
                return Err(Error::Config(format!("bad m range '{part}'")));
            }
            out.extend(a..=b);
        } else {
            let m: usize = part.parse().map_err(|e| Error::Config(format!("bad m '{part}': {e}")))?;
            if m == 0 {
                return Err(Error::Config("m must be positive".into()));
            }
            out.push(m);
        }
    }
    Ok(out)
}

// ---------- CSV emission ----------

/// Shortest-roundtrip float, '.' decimal, `inf` literal for certified infinities.
pub fn csv_float(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else if v.is_nan() {
        "nan".into()
    } else {
        format!("{v}")
    }
}

pub fn csv_line(fields: &[String]) -> String {
    fields.join(",")
}
