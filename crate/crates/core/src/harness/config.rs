use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ape::{StoppingRule, DEFAULT_ROUND_CAP};
use crate::baselines::BaiAlgorithm;
use crate::confidence::{theoretical_k1, ConfidenceScheme};
use crate::error::{invalid, PsiError, Result};
use crate::model::{
    covboost_instance, gen_lower_bound_instance, gen_random_bernoulli, load_instance,
};
use crate::model::{BanditInstance, Family, RngStream};
use crate::pareto::MeanMatrix;

/// RNG stream reserved for drawing random instances, so that instance `r` and
/// the observations of run `r` never share random numbers.
pub const INSTANCE_STREAM: u64 = 1;

/// Where the bandit instance of an experiment comes from.
///
/// Textual forms:
/// - `gen:bernoulli:K=5,D=8`: uniform random Bernoulli means, drawn per seed
/// - `gen:lowerbound:p=4,omega=0.1,D=2`: worst-case family, unit Gaussians
/// - `builtin:covboost`
/// - `means:0,1;1,0` (unit Gaussians) or `bernoulli-means:0.2,0.4;0.5,0.1`
/// - anything else is a path to an instance CSV file
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSource {
    RandomBernoulli { arms: usize, dim: usize },
    LowerBound { p: usize, omega: f64, dim: usize },
    CovBoost,
    Inline { means: MeanMatrix, bernoulli: bool },
    File(PathBuf),
}

impl InstanceSource {
    /// True when each seed draws a different instance.
    pub fn is_random(&self) -> bool {
        matches!(self, InstanceSource::RandomBernoulli { .. })
    }

    /// Builds the instance; `seed` only matters for random sources.
    pub fn materialize(&self, seed: u64) -> Result<BanditInstance> {
        match self {
            InstanceSource::RandomBernoulli { arms, dim } => {
                gen_random_bernoulli(*arms, *dim, &mut RngStream::derive(seed, INSTANCE_STREAM))
            }
            InstanceSource::LowerBound { p, omega, dim } => {
                gen_lower_bound_instance(*p, *omega, &vec![0.0; *dim], *dim)
            }
            InstanceSource::CovBoost => Ok(covboost_instance()),
            InstanceSource::Inline {
                means,
                bernoulli: true,
            } => BanditInstance::new(means.clone(), Family::BernoulliIndependent),
            InstanceSource::Inline {
                means,
                bernoulli: false,
            } => BanditInstance::gaussian_unit(means.clone()),
            InstanceSource::File(path) => load_instance(path),
        }
    }
}

fn key_values(spec: &str) -> Result<Vec<(String, String)>> {
    spec.split(',')
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| invalid(format!("expected key=value, got '{kv}'")))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

fn parse_num<T: FromStr>(name: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| invalid(format!("invalid value '{value}' for {name}")))
}

fn parse_rows(text: &str) -> Result<MeanMatrix> {
    let rows = text
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|v| parse_num::<f64>("mean", v.trim()))
                .collect()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    MeanMatrix::new(rows)
}

impl FromStr for InstanceSource {
    type Err = PsiError;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(rest) = s.strip_prefix("gen:") {
            let (kind, params) = rest.split_once(':').unwrap_or((rest, ""));
            let kv = if params.is_empty() {
                Vec::new()
            } else {
                key_values(params)?
            };
            let get = |name: &str| {
                kv.iter()
                    .find(|(k, _)| k == name)
                    .map(|(_, v)| v.as_str())
                    .ok_or_else(|| invalid(format!("generator '{kind}' needs {name}=")))
            };
            return match kind {
                "bernoulli" => Ok(InstanceSource::RandomBernoulli {
                    arms: parse_num("K", get("K")?)?,
                    dim: parse_num("D", get("D")?)?,
                }),
                "lowerbound" => Ok(InstanceSource::LowerBound {
                    p: parse_num("p", get("p")?)?,
                    omega: parse_num("omega", get("omega")?)?,
                    dim: parse_num("D", get("D")?)?,
                }),
                other => Err(invalid(format!("unknown generator '{other}'"))),
            };
        }
        if s == "builtin:covboost" {
            return Ok(InstanceSource::CovBoost);
        }
        if let Some(rows) = s.strip_prefix("bernoulli-means:") {
            return Ok(InstanceSource::Inline {
                means: parse_rows(rows)?,
                bernoulli: true,
            });
        }
        if let Some(rows) = s.strip_prefix("means:") {
            return Ok(InstanceSource::Inline {
                means: parse_rows(rows)?,
                bernoulli: false,
            });
        }
        if s.is_empty() {
            return Err(invalid("empty instance source"));
        }
        Ok(InstanceSource::File(PathBuf::from(s)))
    }
}

impl fmt::Display for InstanceSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceSource::RandomBernoulli { arms, dim } => {
                write!(f, "gen:bernoulli:K={arms},D={dim}")
            }
            InstanceSource::LowerBound { p, omega, dim } => {
                write!(f, "gen:lowerbound:p={p},omega={omega},D={dim}")
            }
            InstanceSource::CovBoost => write!(f, "builtin:covboost"),
            InstanceSource::Inline { means, bernoulli } => {
                f.write_str(if *bernoulli {
                    "bernoulli-means:"
                } else {
                    "means:"
                })?;
                for (a, row) in means.rows().enumerate() {
                    if a > 0 {
                        f.write_str(";")?;
                    }
                    let cells: Vec<String> = row.iter().map(f64::to_string).collect();
                    f.write_str(&cells.join(","))?;
                }
                Ok(())
            }
            InstanceSource::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl Serialize for InstanceSource {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for InstanceSource {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgorithmSpec {
    Ape,
    PsiUnifElim,
    Bai(BaiAlgorithm),
}

impl AlgorithmSpec {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmSpec::Ape => "ape",
            AlgorithmSpec::PsiUnifElim => "psi-unif-elim",
            AlgorithmSpec::Bai(b) => b.name(),
        }
    }

    /// Parses a comma-separated list such as `ape,psi-unif-elim`.
    pub fn parse_list(s: &str) -> Result<Vec<Self>> {
        s.split(',').map(|a| a.trim().parse()).collect()
    }
}

impl FromStr for AlgorithmSpec {
    type Err = PsiError;

    fn from_str(s: &str) -> Result<Self> {
        let name = s.strip_prefix("bai:").unwrap_or(s);
        match name {
            "ape" => Ok(AlgorithmSpec::Ape),
            "psi-unif-elim" => Ok(AlgorithmSpec::PsiUnifElim),
            "lucb" => Ok(AlgorithmSpec::Bai(BaiAlgorithm::Lucb)),
            "ugapec" => Ok(AlgorithmSpec::Bai(BaiAlgorithm::UGapEc)),
            "lucbpp" => Ok(AlgorithmSpec::Bai(BaiAlgorithm::LucbPp)),
            other => Err(invalid(format!("unknown algorithm '{other}'"))),
        }
    }
}

impl fmt::Display for AlgorithmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Union-bound constant of the pairwise bonus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum K1Choice {
    /// `K(K-1)D/2`
    Theoretical,
    Value(f64),
}

impl K1Choice {
    pub fn resolve(&self, arms: usize, dim: usize) -> f64 {
        match *self {
            K1Choice::Theoretical => theoretical_k1(arms, dim),
            K1Choice::Value(v) => v,
        }
    }
}

impl FromStr for K1Choice {
    type Err = PsiError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "theoretical" {
            Ok(K1Choice::Theoretical)
        } else {
            Ok(K1Choice::Value(parse_num("k1", s)?))
        }
    }
}

impl fmt::Display for K1Choice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            K1Choice::Theoretical => f.write_str("theoretical"),
            K1Choice::Value(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub instance: InstanceSource,
    pub algorithms: Vec<AlgorithmSpec>,
    pub eps1: f64,
    /// Selects the cover stopping rule for APE.
    pub eps2: Option<f64>,
    /// Selects the k-relaxed stopping rule for APE and the early stop of
    /// elimination (which defaults to `K`).
    pub k: Option<usize>,
    pub delta: f64,
    pub k1: K1Choice,
    /// Defaults to the instance family's constant.
    pub sigma: Option<f64>,
    pub reps: u64,
    pub seed: u64,
    pub round_cap: u64,
    /// Draw a new instance for every replication (random sources only).
    pub fresh_instance_per_rep: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            instance: InstanceSource::CovBoost,
            algorithms: vec![AlgorithmSpec::Ape],
            eps1: 0.0,
            eps2: None,
            k: None,
            delta: 0.1,
            k1: K1Choice::Value(1.0),
            sigma: None,
            reps: 1,
            seed: 0,
            round_cap: DEFAULT_ROUND_CAP,
            fresh_instance_per_rep: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(invalid("reps must be >= 1"));
        }
        if self.algorithms.is_empty() {
            return Err(invalid("no algorithm given"));
        }
        if self.eps2.is_some() && self.algorithms.iter().any(|a| *a != AlgorithmSpec::Ape) {
            return Err(invalid("eps2 only applies to ape"));
        }
        if self.fresh_instance_per_rep && !self.instance.is_random() {
            return Err(invalid(format!(
                "instance '{}' is not random; fresh instances need a generator",
                self.instance
            )));
        }
        Ok(())
    }

    /// Objective each algorithm is run and judged against on `instance`.
    pub fn rule_for(&self, algo: AlgorithmSpec, arms: usize) -> Result<StoppingRule> {
        let rule = match algo {
            AlgorithmSpec::Ape => match (self.eps2, self.k) {
                (Some(_), Some(_)) => {
                    return Err(invalid("eps2 and k select different stopping rules"))
                }
                (Some(eps2), None) => StoppingRule::EpsCover {
                    eps1: self.eps1,
                    eps2,
                },
                (None, Some(k)) => StoppingRule::KRelaxed { eps1: self.eps1, k },
                (None, None) => StoppingRule::EpsPsi { eps1: self.eps1 },
            },
            AlgorithmSpec::PsiUnifElim => StoppingRule::KRelaxed {
                eps1: self.eps1,
                k: self.k.unwrap_or(arms),
            },
            AlgorithmSpec::Bai(_) => StoppingRule::KRelaxed { eps1: 0.0, k: 1 },
        };
        rule.validate(arms)?;
        Ok(rule)
    }

    pub fn scheme_for(
        &self,
        algo: AlgorithmSpec,
        instance: &BanditInstance,
    ) -> Result<ConfidenceScheme> {
        let sigma = self
            .sigma
            .unwrap_or_else(|| instance.family().default_sigma());
        match algo {
            AlgorithmSpec::Bai(_) => {
                ConfidenceScheme::per_arm(self.delta, sigma, instance.arms(), instance.dim())
            }
            _ => ConfidenceScheme::pairwise(
                self.delta,
                self.k1.resolve(instance.arms(), instance.dim()),
                sigma,
            ),
        }
    }

    /// Sets one parameter from its textual value (used by grids).
    pub fn set_param(&mut self, name: &str, value: &str) -> Result<()> {
        match name {
            "eps1" => self.eps1 = parse_num(name, value)?,
            "eps2" => self.eps2 = Some(parse_num(name, value)?),
            "k" => self.k = Some(parse_num(name, value)?),
            "delta" => self.delta = parse_num(name, value)?,
            "k1" => self.k1 = value.parse()?,
            "sigma" => self.sigma = Some(parse_num(name, value)?),
            "cap" => self.round_cap = parse_num(name, value)?,
            other => return Err(invalid(format!("parameter '{other}' cannot be swept"))),
        }
        Ok(())
    }
}

/// One swept parameter: `name=v1,v2,...`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub param: String,
    pub values: Vec<String>,
}

impl FromStr for GridAxis {
    type Err = PsiError;

    fn from_str(s: &str) -> Result<Self> {
        let (param, values) = s
            .split_once('=')
            .ok_or_else(|| invalid(format!("grid must look like param=v1,v2; got '{s}'")))?;
        let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).collect();
        if values.iter().any(String::is_empty) {
            return Err(invalid(format!("empty value in grid '{s}'")));
        }
        Ok(GridAxis {
            param: param.trim().to_string(),
            values,
        })
    }
}

/// Cartesian product of the axes applied to `base`, first axis outermost.
pub fn expand_grid(base: &ExperimentConfig, axes: &[GridAxis]) -> Result<Vec<ExperimentConfig>> {
    let mut configs = vec![base.clone()];
    for axis in axes {
        let mut next = Vec::with_capacity(configs.len() * axis.values.len());
        for cfg in &configs {
            for v in &axis.values {
                let mut c = cfg.clone();
                c.set_param(&axis.param, v)?;
                next.push(c);
            }
        }
        configs = next;
    }
    Ok(configs)
}
