use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{Experiment, ExperimentConfig, Region, StepInterval};
use super::example::reproduce_example_10_1;
use crate::covering::{cardinality_bounds, maximal_packing, verify_covering, verify_packing};
use crate::error::{Error, Result};
use crate::estimates::{
    chebyshev_grid, ct_decay_experiment, estimate_g, gri_check, ilse_experiment, run_samples, wegner_experiment,
    EstimateReport, Model, SampleTable,
};
use crate::graph::{EdgeSet, MetricGraph};
use crate::msa::{disjoint_centers, induction_step_experiment_with, validate_params, InductionOptions};
use crate::operator::AssembledOperator;
use crate::spectral::{counting_report, eigenvalues, ground_energy, weyl_check, EigenRange};

/// Everything a run produces; `write` puts it on disk.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub experiment: String,
    pub summary: Value,
    pub samples: SampleTable,
    /// (x, y) series for plotting
    pub plot: SampleTable,
    /// extra named files (e.g. the graph JSON)
    pub files: Vec<(String, String)>,
}

impl RunOutput {
    pub fn passed(&self) -> Option<bool> {
        self.summary.get("verdict").and_then(Value::as_str).map(|v| v == "PASS")
    }

    /// summary.json, samples.csv, plot.csv and the extra files.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut f = std::fs::File::create(dir.join("summary.json"))?;
        serde_json::to_writer_pretty(&mut f, &self.summary)?;
        writeln!(f)?;
        write_table(&dir.join("samples.csv"), &self.samples)?;
        write_table(&dir.join("plot.csv"), &self.plot)?;
        for (name, body) in &self.files {
            std::fs::write(dir.join(name), body)?;
        }
        Ok(())
    }
}

pub fn write_table(path: &Path, t: &SampleTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&t.columns)?;
    for row in &t.rows {
        // Display of f64 is the shortest round-trip form, so bodies are reproducible
        w.write_record(row.iter().map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn table(columns: &[&str], rows: Vec<Vec<f64>>) -> SampleTable {
    SampleTable { rows, ..SampleTable::new(columns) }
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("report serializes")
}

fn linspace(a: f64, b: f64, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![a];
    }
    (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect()
}

fn region_edges(model: &Model, region: &Option<Region>) -> Result<EdgeSet> {
    let g = &model.graph;
    match region {
        Some(r) => {
            let v = r.center.resolve(g)?;
            Ok(model.ball(v, r.radius)?.edges().clone())
        }
        None => Ok(EdgeSet::all(g)),
    }
}

fn estimate_output(name: &str, rep: EstimateReport) -> RunOutput {
    let plot = table(&[&rep.x_name, &rep.value_name], rep.points.iter().map(|p| vec![p.x, p.estimate]).collect());
    RunOutput { experiment: name.into(), summary: rep.summary_json(), samples: rep.samples.clone(), plot, files: vec![] }
}

fn with_header(name: &str, cfg: &ExperimentConfig, body: Value) -> Value {
    let mut v = json!({ "experiment": name, "seed": cfg.seed });
    if let (Some(m), Value::Object(b)) = (v.as_object_mut(), body) {
        for (k, x) in b {
            m.entry(k).or_insert(x);
        }
    }
    v
}

fn lattice_origin(g: &MetricGraph) -> usize {
    g.coords(0).map(|c| vec![0; c.len()]).and_then(|c| g.vertex_at(&c)).unwrap_or(0)
}

/// Runs one experiment; nothing touches the disk.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let name = cfg.experiment.name();
    let n = cfg.n_samples.unwrap_or(0);
    let seed = cfg.seed;
    let out = match &cfg.experiment {
        Experiment::BuildGraph => {
            let g = cfg.graph()?;
            let spec = g.to_spec();
            let o = lattice_origin(&g);
            let mut growth = Vec::new();
            for k in 1..=64 {
                let r = k as f64 * g.big_u();
                if g.check_ball_inside(o, r).is_err() {
                    break;
                }
                growth.push(vec![r, g.ball_edge_set(o, r)?.volume(&g)]);
            }
            let summary = json!({
                "n_vertices": g.n_vertices(),
                "n_edges": g.n_edges(),
                "u": g.u(),
                "U": g.big_u(),
                "max_degree": g.max_degree(),
                "truncated": g.truncated_vertices().count(),
            });
            RunOutput {
                experiment: name.into(),
                summary,
                samples: table(
                    &["edge", "i", "j", "length"],
                    spec.edges.iter().map(|e| vec![e.id as f64, e.i as f64, e.j as f64, e.length]).collect(),
                ),
                plot: table(&["r", "volume"], growth),
                files: vec![("graph.json".into(), serde_json::to_string_pretty(&spec)?)],
            }
        }
        Experiment::Spectrum(p) => {
            let m = cfg.model()?;
            let op = m.operator_on(&region_edges(&m, &p.region)?, &m.sample(seed))?;
            let range = match (p.lowest, p.interval) {
                (_, Some((a, b))) => EigenRange::Interval(a, b),
                (Some(k), None) => EigenRange::Lowest(k),
                (None, None) => EigenRange::Lowest(10),
            };
            let ev = eigenvalues(&op, range)?;
            let rows: Vec<Vec<f64>> = ev.iter().enumerate().map(|(k, &l)| vec![k as f64, l]).collect();
            RunOutput {
                experiment: name.into(),
                summary: json!({ "dim": op.dim(), "eigenvalues": ev }),
                samples: table(&["k", "lambda"], rows.clone()),
                plot: table(&["k", "lambda"], rows),
                files: vec![],
            }
        }
        Experiment::Counting(p) => {
            let m = cfg.model()?;
            let op = m.operator_on(&region_edges(&m, &p.region)?, &m.sample(seed))?;
            let grid = linspace(p.interval.0, p.interval.1, p.grid_points);
            let rep = match (p.weyl, &p.region) {
                (Some((c_p, d)), Some(r)) => weyl_check(&op, m.spec.potential_norm_bound(), c_p, d, r.radius, &grid)?,
                (Some(_), None) => return Err(Error::Config("the Weyl comparison needs a ball region".into())),
                (None, _) => counting_report(&op, &grid, |_| f64::INFINITY)?,
            };
            let rows: Vec<Vec<f64>> = rep.rows.iter().map(|r| vec![r.lambda, r.count as f64, r.bound]).collect();
            let plot = rows.iter().map(|r| vec![r[0], r[1]]).collect();
            RunOutput {
                experiment: name.into(),
                summary: json!({ "ok": rep.ok, "verdict": if rep.ok { "PASS" } else { "FAIL" }, "min_margin": rep.min_margin, "c_weyl": rep.c_weyl, "observed_ratio": rep.observed_ratio }),
                samples: table(&["lambda", "count", "bound"], rows),
                plot: table(&["lambda", "count"], plot),
                files: vec![],
            }
        }
        Experiment::Cover(p) => {
            let g = cfg.graph()?;
            let v = p.center.resolve(&g)?;
            let pack = maximal_packing(&g, v, p.big_r, p.r)?;
            let pc = verify_packing(&g, &pack);
            let cc = verify_covering(&g, v, p.big_r, p.r, &pack);
            let bounds = p.growth.map(|(c_p, d)| cardinality_bounds(p.big_r, p.r, g.big_u(), c_p, d));
            let within = bounds.is_none_or(|(lo, hi)| lo <= pack.len() as f64 && pack.len() as f64 <= hi);
            let ok = pc.ok() && cc.ok && within;
            let rows = pack.centers.iter().enumerate().map(|(i, &c)| vec![i as f64, c as f64]).collect();
            RunOutput {
                experiment: name.into(),
                summary: json!({
                    "centers": pack.centers.len(),
                    "packing_ok": pc.ok(),
                    "covering_ok": cc.ok,
                    "uncovered": cc.uncovered,
                    "cardinality_bounds": bounds,
                    "verdict": if ok { "PASS" } else { "FAIL" },
                }),
                samples: table(&["index", "center"], rows),
                plot: table(&["r", "centers"], vec![vec![p.r, pack.len() as f64]]),
                files: vec![],
            }
        }
        Experiment::GoodBall(p) => {
            let m = cfg.model()?;
            let grid = chebyshev_grid(p.interval.0, p.interval.1, p.grid_points);
            let (v1, v2) = match &p.centers {
                Some((a, b)) => (a.resolve(&m.graph)?, b.resolve(&m.graph)?),
                None => disjoint_centers(&m, p.r)?,
            };
            estimate_output(name, estimate_g(&m, &grid, p.r, p.n, p.xi, v1, v2, n, seed)?)
        }
        Experiment::Wegner(p) => {
            let m = cfg.model()?;
            let sub = region_edges(&m, &p.region)?;
            estimate_output(name, wegner_experiment(&m, &sub, p.lambda, &p.eps, n, seed)?)
        }
        Experiment::Ilse(p) => {
            let m = cfg.model()?;
            let v = p.center.resolve(&m.graph)?;
            estimate_output(name, ilse_experiment(&m, v, &p.params, n, seed)?)
        }
        Experiment::CtDecay(p) => {
            let m = cfg.model()?;
            let g = &m.graph;
            let op: AssembledOperator = m.operator_on(&EdgeSet::all(g), &m.sample(seed))?;
            let gap = match p.gap {
                Some(gap) => gap,
                None => {
                    // just below E₀: the count at the eigenvalue itself is a coin toss
                    let e0 = ground_energy(&op) - 1e-9;
                    (2.0 * p.lambda - e0, e0)
                }
            };
            let v = p.center.resolve(g)?;
            let a = g.ball_edge_set(v, p.core)?;
            let all = EdgeSet::all(g);
            let pairs = p
                .deltas
                .iter()
                .map(|&d| Ok((a.clone(), all.difference(&g.ball_edge_set(v, p.core + d)?))))
                .collect::<Result<Vec<_>>>()?;
            if pairs.iter().any(|(_, b)| b.len() == 0) {
                return Err(Error::Config("a distance leaves no edges outside the core ball".into()));
            }
            let rep = ct_decay_experiment(&op, p.lambda, gap, &pairs)?;
            let rows: Vec<Vec<f64>> = rep.points.iter().map(|q| vec![q.delta, q.norm]).collect();
            let plot = rows.iter().map(|r| vec![r[0], r[1].ln()]).collect();
            RunOutput {
                experiment: name.into(),
                summary: to_value(&rep),
                samples: table(&["delta", "norm"], rows),
                plot: table(&["delta", "ln_norm"], plot),
                files: vec![],
            }
        }
        Experiment::GriCheck(p) => {
            let m = cfg.model()?;
            let g = &m.graph;
            let (x, v, v1) = (p.x.resolve(g)?, p.v.resolve(g)?, p.v1.resolve(g)?);
            let rows = run_samples(n, seed, |k, s| {
                let rep = gri_check(&m, &m.sample(s), x, v, v1, p.big_r, p.s, p.r, p.lambda)?;
                Ok(vec![k as f64, rep.lhs, rep.outer, rep.inner, rep.ratio])
            })?;
            let ratios: Vec<f64> = rows.iter().map(|r| r[4]).collect();
            let max = ratios.iter().copied().fold(0.0, f64::max);
            let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
            let finite = ratios.iter().all(|r| r.is_finite());
            RunOutput {
                experiment: name.into(),
                summary: json!({ "n_samples": n, "c_gru_lower": max, "mean_ratio": mean, "verdict": if finite { "PASS" } else { "FAIL" } }),
                plot: table(&["sample", "ratio"], rows.iter().map(|r| vec![r[0], r[4]]).collect()),
                samples: table(&["sample", "lhs", "outer", "inner", "ratio"], rows),
                files: vec![],
            }
        }
        Experiment::ParamsValidate(p) => {
            let f = validate_params(p.d, p.tau, p.candidate.as_ref())?;
            let rows = f
                .certificate
                .checks
                .iter()
                .enumerate()
                .map(|(i, c)| vec![i as f64, c.slack, if c.holds { 1.0 } else { 0.0 }])
                .collect();
            let mut summary = to_value(&f);
            summary["verdict"] = json!("PASS");
            RunOutput {
                experiment: name.into(),
                summary,
                samples: table(&["relation", "slack", "holds"], rows),
                plot: table(&["alpha", "theta"], vec![vec![f.params.alpha, f.params.theta]]),
                files: vec![],
            }
        }
        Experiment::MsaStep(p) => {
            let m = cfg.model()?;
            let params = match &p.params {
                Some(c) => validate_params(p.d, p.tau, Some(c))?.params,
                None => validate_params(p.d, p.tau, None)?.params,
            };
            let (a, b) = match p.interval {
                StepInterval::Explicit(i) => i,
                StepInterval::Ilse => {
                    let s0 = m.spectral_floor()?;
                    (s0, s0 + 0.5 * p.r.powf(params.beta - 2.0))
                }
            };
            let grid = chebyshev_grid(a, b, p.grid_points);
            let mut opts = InductionOptions::default();
            if let Some(k) = p.event_points {
                opts.event_points = k;
            }
            if let Some(s) = p.spectral_event {
                opts.spectral_event = s;
            }
            let rep = induction_step_experiment_with(&m, &params, &grid, p.r, n, seed, &opts)?;
            let mut summary = to_value(&rep);
            summary["flags"] = json!(if rep.outside_proof_regime { vec!["outside_proof_regime"] } else { vec![] });
            let er = rep.estimate_report();
            RunOutput {
                experiment: name.into(),
                summary,
                samples: rep.samples.clone(),
                plot: table(&["r", "p_hat"], er.points.iter().map(|q| vec![q.x, q.estimate]).collect()),
                files: vec![],
            }
        }
        Experiment::Example101(p) => {
            let m = cfg.model()?;
            let v = p.vertex.resolve(&m.graph)?;
            let rep = reproduce_example_10_1(&m.graph, &m.conds, p.d, v, &p.omegas, p.lambda_max, m.h, seed)?;
            let rows: Vec<Vec<f64>> = rep.rows.iter().map(|r| vec![r.omega, r.lowest_added, r.expected, r.error]).collect();
            RunOutput {
                experiment: name.into(),
                summary: to_value(&rep),
                plot: table(&["omega", "lowest_added"], rows.iter().map(|r| vec![r[0], r[1]]).collect()),
                samples: table(&["omega", "lowest_added", "expected", "error"], rows),
                files: vec![],
            }
        }
    };
    Ok(RunOutput { summary: with_header(name, cfg, out.summary), ..out })
}

/// `run` plus writing into `out` (or the config's out_dir, or ./out/<kind>).
pub fn run_to_dir(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<RunOutput> {
    let res = run(cfg)?;
    let dir = match (out, &cfg.out_dir) {
        (Some(d), _) => d.to_path_buf(),
        (None, Some(d)) => d.clone(),
        (None, None) => Path::new("out").join(res.experiment.as_str()),
    };
    res.write(&dir)?;
    Ok(res)
}
