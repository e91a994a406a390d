use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use privlearn::adversaries::{CaseIIConfig, FiringConfig};
use privlearn::counters::Mechanism;
use privlearn::game::SequenceFile;
use privlearn::hypothesis::{
    find_distinguishing_tuple, make_full_cube, make_multipoint_class, make_point_class, ClassFile,
    DistinguishingTuple, HypothesisClass, MemberRecord,
};
use privlearn::learners::LearnerConfig;

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClassSpec {
    Point { n: usize },
    Multipoint { n: usize, k: usize },
    FullCube { n: usize },
    Explicit { domain_size: usize, members: Vec<MemberRecord> },
}

impl ClassSpec {
    pub fn build(&self) -> Result<HypothesisClass> {
        Ok(match self {
            ClassSpec::Point { n } => make_point_class(*n)?,
            ClassSpec::Multipoint { n, k } => make_multipoint_class(*n, *k)?,
            ClassSpec::FullCube { n } => make_full_cube(*n)?,
            ClassSpec::Explicit { domain_size, members } => ClassFile {
                domain_size: *domain_size,
                members: members.clone(),
            }
            .into_class()?,
        })
    }
}

/// Tuple members by name (or bit string) within the class.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleSpec {
    pub f0: String,
    pub f1: String,
    pub x_eq: usize,
    pub x_dif: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum AdversarySpec {
    Case2 {
        #[serde(default)]
        config: CaseIIConfig,
    },
    SmallEps {
        d: usize,
        #[serde(default)]
        config: CaseIIConfig,
    },
    LargeEps {
        s: usize,
        #[serde(default)]
        config: CaseIIConfig,
    },
    Firing {
        #[serde(default)]
        config: FiringConfig,
    },
}

impl AdversarySpec {
    pub fn delta(&self) -> f64 {
        match self {
            AdversarySpec::Case2 { config } | AdversarySpec::SmallEps { config, .. } | AdversarySpec::LargeEps { config, .. } => {
                config.delta
            }
            AdversarySpec::Firing { config } => config.delta,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeighbourSpec {
    pub round: usize,
    pub point: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessSpec {
    pub k: usize,
    pub beta: f64,
}

fn default_counter_epsilon() -> f64 {
    1.0
}

fn default_name_and_shame_delta() -> f64 {
    0.1
}

/// Analytic curves drawn next to sweep data.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorSpec {
    #[serde(default = "default_name_and_shame_delta")]
    pub name_and_shame_delta: f64,
    #[serde(default = "default_counter_epsilon")]
    pub counter_epsilon: f64,
}

impl Default for AnchorSpec {
    fn default() -> Self {
        Self {
            name_and_shame_delta: default_name_and_shame_delta(),
            counter_epsilon: default_counter_epsilon(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamKind {
    #[default]
    Zeros,
    Ones,
    Alternating,
}

impl StreamKind {
    pub fn bits(self, horizon: usize) -> Vec<bool> {
        (0..horizon)
            .map(|t| match self {
                StreamKind::Zeros => false,
                StreamKind::Ones => true,
                StreamKind::Alternating => t % 2 == 0,
            })
            .collect()
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterBenchSpec {
    pub mechanisms: Vec<Mechanism>,
    #[serde(default = "default_counter_epsilon")]
    pub epsilon: f64,
    pub horizons: Vec<usize>,
    #[serde(default)]
    pub stream: StreamKind,
}

/// One JSON document per experiment. Each subcommand reads the fields it
/// needs and reports any that are missing.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub class: Option<ClassSpec>,
    #[serde(default)]
    pub learner: Option<LearnerConfig>,
    #[serde(default)]
    pub horizon: Option<usize>,
    #[serde(default)]
    pub horizons: Option<Vec<usize>>,
    #[serde(default)]
    pub sequence: Option<SequenceFile>,
    #[serde(default)]
    pub adversary: Option<AdversarySpec>,
    #[serde(default)]
    pub tuple: Option<TupleSpec>,
    #[serde(default)]
    pub witness: Option<WitnessSpec>,
    #[serde(default)]
    pub neighbour: Option<NeighbourSpec>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub anchors: AnchorSpec,
    #[serde(default)]
    pub counter: Option<CounterBenchSpec>,
}

pub fn load(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

impl ExperimentConfig {
    pub fn need<'a, T>(field: &'a Option<T>, name: &str) -> Result<&'a T> {
        match field {
            Some(v) => Ok(v),
            None => bail!("config field `{name}` is required for this command"),
        }
    }

    pub fn class(&self) -> Result<Arc<HypothesisClass>> {
        let spec = Self::need(&self.class, "class")?;
        Ok(Arc::new(spec.build().context("config field `class`")?))
    }

    pub fn learner(&self) -> Result<&LearnerConfig> {
        Self::need(&self.learner, "learner")
    }

    pub fn horizon(&self) -> Result<usize> {
        let h = *Self::need(&self.horizon, "horizon")?;
        if h == 0 {
            bail!("config field `horizon` must be at least 1");
        }
        Ok(h)
    }

    pub fn tuple(&self, class: &HypothesisClass) -> Result<DistinguishingTuple> {
        match &self.tuple {
            None => find_distinguishing_tuple(class).context("the class has no distinguishing tuple"),
            Some(spec) => {
                let find = |name: &str, field: &str| {
                    class
                        .by_name(name)
                        .cloned()
                        .or_else(|| {
                            privlearn::hypothesis::Hypothesis::parse_bits(name)
                                .ok()
                                .filter(|h| class.index_of(h).is_some())
                        })
                        .with_context(|| format!("config field `tuple.{field}`: {name:?} is not a member of the class"))
                };
                let t = DistinguishingTuple::new(find(&spec.f0, "f0")?, find(&spec.f1, "f1")?, spec.x_eq, spec.x_dif)
                    .context("config field `tuple`")?;
                Ok(t)
            }
        }
    }
}
