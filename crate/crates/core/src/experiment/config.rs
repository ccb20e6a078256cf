use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimates::{IlseParams, Model};
use crate::graph::{build_cayley_graph, build_lattice_graph, GraphSpec, MetricGraph, VertexId};
use crate::msa::MsaParams;
use crate::operator::{ConditionMap, ConditionSpec, RandomPotentialSpec};

/// Where the ambient graph comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphSource {
    Lattice { d: usize, extent: usize, edge_length: f64 },
    Cayley { generators: Vec<(Vec<i64>, f64)>, extent: usize },
    /// a JSON graph file
    File(PathBuf),
    Inline(GraphSpec),
}

impl GraphSource {
    pub fn build(&self) -> Result<MetricGraph> {
        match self {
            GraphSource::Lattice { d, extent, edge_length } => build_lattice_graph(*d, *extent, *edge_length),
            GraphSource::Cayley { generators, extent } => build_cayley_graph(generators, *extent),
            GraphSource::File(p) => {
                let spec: GraphSpec = serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(p)?))?;
                MetricGraph::from_spec(&spec)
            }
            GraphSource::Inline(spec) => MetricGraph::from_spec(spec),
        }
    }
}

/// A vertex, by id or by lattice coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VertexRef {
    Id(VertexId),
    Coords(Vec<i64>),
}

impl VertexRef {
    pub fn resolve(&self, g: &MetricGraph) -> Result<VertexId> {
        match self {
            VertexRef::Id(v) if *v < g.n_vertices() => Ok(*v),
            VertexRef::Id(v) => Err(Error::Config(format!("vertex {v} does not exist"))),
            VertexRef::Coords(c) => g.vertex_at(c).ok_or_else(|| Error::Config(format!("no vertex at {c:?}"))),
        }
    }
}

fn origin() -> VertexRef {
    VertexRef::Coords(vec![0])
}

fn grid_points() -> usize {
    32
}

/// An edge region: a ball, or the whole graph when absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub center: VertexRef,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumParams {
    #[serde(default)]
    pub region: Option<Region>,
    /// the `lowest` eigenvalues, or all of them in `interval`
    #[serde(default)]
    pub lowest: Option<usize>,
    #[serde(default)]
    pub interval: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingParams {
    #[serde(default)]
    pub region: Option<Region>,
    pub interval: (f64, f64),
    #[serde(default = "grid_points")]
    pub grid_points: usize,
    /// compare with the Weyl bound for this (c_P, d); plain counts when absent
    #[serde(default)]
    pub weyl: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverParams {
    #[serde(default = "origin")]
    pub center: VertexRef,
    pub big_r: f64,
    pub r: f64,
    /// growth constants for the cardinality bounds
    #[serde(default)]
    pub growth: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodBallParams {
    pub interval: (f64, f64),
    #[serde(default = "grid_points")]
    pub grid_points: usize,
    pub r: f64,
    pub n: f64,
    pub xi: f64,
    /// two centers with disjoint r-balls; chosen automatically when absent
    #[serde(default)]
    pub centers: Option<(VertexRef, VertexRef)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WegnerParams {
    #[serde(default)]
    pub region: Option<Region>,
    pub lambda: f64,
    pub eps: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IlseConfig {
    #[serde(default = "origin")]
    pub center: VertexRef,
    #[serde(flatten)]
    pub params: IlseParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CtDecayParams {
    pub lambda: f64,
    /// certified gap; (2λ − E₀, E₀) with E₀ the sampled ground energy (less 1e-9) when absent
    #[serde(default)]
    pub gap: Option<(f64, f64)>,
    #[serde(default = "origin")]
    pub center: VertexRef,
    /// A = E(center, core), B_δ = edges at distance ≥ core + δ
    pub core: f64,
    pub deltas: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GriParams {
    pub x: VertexRef,
    pub v: VertexRef,
    pub v1: VertexRef,
    pub big_r: f64,
    pub s: f64,
    pub r: f64,
    pub lambda: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidateParams {
    pub d: f64,
    pub tau: f64,
    #[serde(default)]
    pub candidate: Option<MsaParams>,
}

/// Energies of the induction step: an explicit interval or the
/// initial-length-scale interval [σ₀, σ₀ + ½ r^{β−2}].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepInterval {
    Explicit((f64, f64)),
    Ilse,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MsaStepParams {
    pub d: f64,
    pub tau: f64,
    /// constructed from (d, τ) when absent
    #[serde(default)]
    pub params: Option<MsaParams>,
    pub interval: StepInterval,
    #[serde(default = "grid_points")]
    pub grid_points: usize,
    pub r: f64,
    #[serde(default)]
    pub event_points: Option<usize>,
    #[serde(default)]
    pub spectral_event: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Example101Params {
    /// where the π-edge is attached
    #[serde(default = "origin")]
    pub vertex: VertexRef,
    pub omegas: Vec<f64>,
    /// eigenvalues compared up to here
    pub lambda_max: f64,
    /// growth degree of the base graph (density exponent)
    #[serde(default = "one")]
    pub d: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum Experiment {
    BuildGraph,
    Spectrum(SpectrumParams),
    Counting(CountingParams),
    Cover(CoverParams),
    GoodBall(GoodBallParams),
    Wegner(WegnerParams),
    Ilse(IlseConfig),
    CtDecay(CtDecayParams),
    GriCheck(GriParams),
    ParamsValidate(ValidateParams),
    MsaStep(MsaStepParams),
    #[serde(rename = "example-10-1")]
    Example101(Example101Params),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::BuildGraph => "build-graph",
            Experiment::Spectrum(_) => "spectrum",
            Experiment::Counting(_) => "counting",
            Experiment::Cover(_) => "cover",
            Experiment::GoodBall(_) => "good-ball",
            Experiment::Wegner(_) => "wegner",
            Experiment::Ilse(_) => "ilse",
            Experiment::CtDecay(_) => "ct-decay",
            Experiment::GriCheck(_) => "gri-check",
            Experiment::ParamsValidate(_) => "params-validate",
            Experiment::MsaStep(_) => "msa-step",
            Experiment::Example101(_) => "example-10-1",
        }
    }

    fn needs_model(&self) -> bool {
        !matches!(self, Experiment::ParamsValidate(_))
    }
}

/// One flat JSON file fully describing a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub graph: Option<GraphSource>,
    #[serde(default)]
    pub conditions: Option<ConditionSpec>,
    #[serde(default)]
    pub potential: Option<RandomPotentialSpec>,
    /// FEM element size; u/64 when absent
    #[serde(default)]
    pub mesh: Option<f64>,
    pub experiment: Experiment,
    #[serde(default)]
    pub n_samples: Option<usize>,
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks everything that can be checked before any sampling.
    pub fn validate(&self) -> Result<()> {
        if self.experiment.needs_model() {
            match &self.graph {
                None => return Err(Error::Config(format!("{} needs a graph", self.experiment.name()))),
                Some(GraphSource::File(p)) if !p.exists() => {
                    return Err(Error::Config(format!("graph file {} does not exist", p.display())))
                }
                _ => {}
            }
        }
        if let Some(p) = &self.potential {
            p.validate().map_err(|e| Error::Config(format!("potential: {e}")))?;
        }
        if let Some(h) = self.mesh {
            if !(h > 0.0) {
                return Err(Error::Config(format!("mesh size {h} must be positive")));
            }
        }
        let needs_n = matches!(
            self.experiment,
            Experiment::GoodBall(_) | Experiment::Wegner(_) | Experiment::Ilse(_) | Experiment::GriCheck(_) | Experiment::MsaStep(_)
        );
        if needs_n && self.n_samples.unwrap_or(0) == 0 {
            return Err(Error::Config(format!("{} needs a positive n_samples", self.experiment.name())));
        }
        match &self.experiment {
            Experiment::Wegner(w) => {
                if let Some(&e) = w.eps.iter().find(|&&e| !(e > 0.0 && e <= 0.5)) {
                    return Err(Error::Config(format!("ε = {e} outside (0, 1/2]")));
                }
            }
            Experiment::Ilse(c) => c.params.validate()?,
            Experiment::GoodBall(p) if p.grid_points == 0 => return Err(Error::Config("grid_points must be positive".into())),
            Experiment::MsaStep(p) if p.grid_points == 0 => return Err(Error::Config("grid_points must be positive".into())),
            Experiment::Counting(p) if p.grid_points == 0 => return Err(Error::Config("grid_points must be positive".into())),
            _ => {}
        }
        Ok(())
    }

    pub fn graph(&self) -> Result<Arc<MetricGraph>> {
        let src = self.graph.as_ref().ok_or_else(|| Error::Config("no graph in config".into()))?;
        Ok(Arc::new(src.build()?))
    }

    /// Graph + conditions (Kirchhoff by default) + potential (uniform on [1, 2]
    /// by default) + mesh.
    pub fn model(&self) -> Result<Model> {
        let g = self.graph()?;
        let conds = ConditionMap::uniform(&g, self.conditions.as_ref().unwrap_or(&ConditionSpec::Kirchhoff))?;
        let spec = self.potential.clone().unwrap_or_else(|| RandomPotentialSpec::uniform(1.0, 2.0));
        let m = Model::new(g, conds, spec);
        Ok(match self.mesh {
            Some(h) => m.with_mesh(h),
            None => m,
        })
    }
}
