//! Bandit instances and the simulator that draws observations from them.

mod covboost;
mod csv_io;
mod generators;

pub use covboost::{covboost_instance, COVBOOST_LABELS, COVBOOST_MEANS, COVBOOST_POOLED_VARIANCE};
pub use csv_io::{load_instance, read_instance, save_instance, write_instance};
pub use generators::{
    gen_lower_bound_instance, gen_lower_bound_instance_with_dominated, gen_random_bernoulli,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{check_index, invalid, Result};
use crate::pareto::MeanMatrix;

/// Observation distribution shared by every arm of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    /// Independent Gaussian coordinates; `variances[d]` is shared by all arms.
    GaussianDiagonal { variances: Vec<f64> },
    /// Independent `{0,1}` coordinates with success probability equal to the mean.
    BernoulliIndependent,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::GaussianDiagonal { .. } => "gaussian",
            Family::BernoulliIndependent => "bernoulli",
        }
    }

    /// Sub-gaussian constant used to scale confidence bonuses when none is given.
    pub fn default_sigma(&self) -> f64 {
        match self {
            Family::GaussianDiagonal { .. } => 1.0,
            Family::BernoulliIndependent => 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditInstance {
    means: MeanMatrix,
    family: Family,
    /// Observations are divided coordinate-wise by these before the learner sees them.
    scale: Vec<f64>,
    labels: Vec<String>,
}

impl BanditInstance {
    pub fn new(means: MeanMatrix, family: Family) -> Result<Self> {
        let scale = vec![1.0; means.dim()];
        Self::with_scale(means, family, scale)
    }

    pub fn with_scale(means: MeanMatrix, family: Family, scale: Vec<f64>) -> Result<Self> {
        let d = means.dim();
        if scale.len() != d {
            return Err(invalid(format!(
                "scale has {} entries, expected {d}",
                scale.len()
            )));
        }
        if scale.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(invalid("scale entries must be finite and > 0"));
        }
        match &family {
            Family::GaussianDiagonal { variances } => {
                if variances.len() != d {
                    return Err(invalid(format!(
                        "{} variances given, expected {d}",
                        variances.len()
                    )));
                }
                // zero variance is allowed: it gives a noiseless simulator
                if variances.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(invalid("variances must be finite and >= 0"));
                }
            }
            Family::BernoulliIndependent => {
                if let Some(v) = means.as_flat().iter().find(|v| !(0.0..=1.0).contains(*v)) {
                    return Err(invalid(format!("Bernoulli mean {v} outside [0,1]")));
                }
            }
        }
        let labels = (0..means.arms()).map(|a| format!("arm{a}")).collect();
        Ok(Self {
            means,
            family,
            scale,
            labels,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.arms() {
            return Err(invalid(format!(
                "{} labels for {} arms",
                labels.len(),
                self.arms()
            )));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn gaussian_unit(means: MeanMatrix) -> Result<Self> {
        let variances = vec![1.0; means.dim()];
        Self::new(means, Family::GaussianDiagonal { variances })
    }

    pub fn arms(&self) -> usize {
        self.means.arms()
    }

    pub fn dim(&self) -> usize {
        self.means.dim()
    }

    pub fn means(&self) -> &MeanMatrix {
        &self.means
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Means in the units the learner observes (true means divided by `scale`).
    /// Correctness and gaps are judged on these.
    pub fn effective_means(&self) -> MeanMatrix {
        let d = self.dim();
        let values = self
            .means
            .as_flat()
            .iter()
            .enumerate()
            .map(|(n, v)| v / self.scale[n % d])
            .collect();
        MeanMatrix::from_flat(self.arms(), d, values).expect("scaled means stay finite")
    }

    /// Short stable digest of means, family and scale.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.arms() as u64).to_le_bytes());
        h.update((self.dim() as u64).to_le_bytes());
        for v in self.means.as_flat() {
            h.update(v.to_le_bytes());
        }
        h.update(self.family.name().as_bytes());
        if let Family::GaussianDiagonal { variances } = &self.family {
            for v in variances {
                h.update(v.to_le_bytes());
            }
        }
        for s in &self.scale {
            h.update(s.to_le_bytes());
        }
        let digest = h.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Draws one observation of `arm` into `out` (length D).
    pub fn sample_into(&self, arm: usize, rng: &mut RngStream, out: &mut [f64]) {
        let mu = self.means.row(arm);
        match &self.family {
            Family::GaussianDiagonal { variances } => {
                for d in 0..mu.len() {
                    let z: f64 = rng.inner.sample(StandardNormal);
                    out[d] = (mu[d] + variances[d].sqrt() * z) / self.scale[d];
                }
            }
            Family::BernoulliIndependent => {
                for d in 0..mu.len() {
                    let hit = rng.inner.random::<f64>() < mu[d];
                    out[d] = if hit { 1.0 } else { 0.0 } / self.scale[d];
                }
            }
        }
    }
}

pub fn sample(instance: &BanditInstance, arm: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
    check_index(arm, instance.arms())?;
    let mut out = vec![0.0; instance.dim()];
    instance.sample_into(arm, rng, &mut out);
    Ok(out)
}

/// Seeded random stream. Streams for seeds `s, s+1, ...` are independent,
/// and `derive` gives further independent sub-streams of one seed.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::derive(seed, 0)
    }

    pub fn derive(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            seed,
            stream,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Number of 32-bit words consumed so far.
    pub fn position(&self) -> u128 {
        self.inner.get_word_pos()
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.random()
    }
}
