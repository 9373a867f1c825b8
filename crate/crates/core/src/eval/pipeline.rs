use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::PipelineConfig;
use super::metrics::{evaluate_plan, export_plot_data, EvalReport, TIERS};
use crate::error::{Error, Result};
use crate::network::{parse_inp, PipeNetwork};
use crate::neural::{train_decoder_on, DecoderReconstructor};
use crate::plans::{
    build_source_dataset, filter_subset_datasets, gft_frequent_budget_plan, gft_important_plan, laplacian_plan,
    random_plan, Provenance, SamplingPlan,
};
use crate::sim::{run_scenario_sweep, DataMatrix};
use crate::split::{split_variants, Split};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Every file of a run with its digest. Contains no timestamps, so identical
/// runs produce identical manifests.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    /// Set when a stage failed and the listed files are all that was written.
    pub partial: bool,
    pub files: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn count_under(&self, dir: &str) -> usize {
        let prefix = format!("{dir}/");
        self.files.iter().filter(|f| f.path.starts_with(&prefix)).count()
    }
}

/// Single funnel for all output files; safe to share between threads.
pub struct ManifestWriter {
    root: PathBuf,
    config_hash: String,
    files: Mutex<BTreeMap<String, ManifestEntry>>,
}

impl ManifestWriter {
    pub fn new(root: &Path, config_hash: String) -> Result<Self> {
        std::fs::create_dir_all(root)?;
        Ok(ManifestWriter {
            root: root.to_path_buf(),
            config_hash,
            files: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn write(&self, rel: &str, contents: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(&path, contents)?;
        let entry = ManifestEntry {
            path: rel.to_string(),
            sha256: hex::encode(Sha256::digest(contents)),
            bytes: contents.len() as u64,
        };
        self.files.lock().expect("manifest lock").insert(rel.to_string(), entry);
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, rel: &str, value: &T) -> Result<PathBuf> {
        self.write(rel, serde_json::to_string_pretty(value)?.as_bytes())
    }

    /// Writes `manifest.json` (not listed in itself) and returns its content.
    pub fn finish(&self, partial: bool) -> Result<Manifest> {
        let manifest = Manifest {
            config_hash: self.config_hash.clone(),
            partial,
            files: self.files.lock().expect("manifest lock").values().cloned().collect(),
        };
        std::fs::write(self.root.join("manifest.json"), manifest.to_json()?)?;
        Ok(manifest)
    }
}

/// Mean and standard deviation over seeds of one strategy at one budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub strategy: String,
    pub budget_fraction: f64,
    pub tier: String,
    pub runs: usize,
    pub sensitivity_mean: f64,
    pub sensitivity_std: f64,
    pub specificity_mean: f64,
    pub specificity_std: f64,
}

/// Everything a pipeline run produced.
#[derive(Debug, Clone)]
pub struct ExperimentBundle {
    pub out_dir: PathBuf,
    pub manifest: Manifest,
    /// One GFT dataset per source, before filtering.
    pub datasets: Vec<SamplingPlan>,
    /// Plans in evaluation order; random plans appear once per seed.
    pub plans: Vec<SamplingPlan>,
    /// One report per (seed, plan) job, in job order.
    pub reports: Vec<EvalReport>,
    pub summary: Vec<SummaryRow>,
}

/// Plan id without the seed, so random plans of all seeds pool together.
pub fn strategy_label(plan: &SamplingPlan) -> String {
    match &plan.provenance {
        Provenance::Random { budget, .. } => format!("random-b{budget}"),
        _ => plan.id(),
    }
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Aggregates reports per strategy, budget and tier, using the sample
/// standard deviation over seeds.
pub fn summarize(plans: &[(u64, &SamplingPlan)], reports: &[EvalReport]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(String, u64, usize), Vec<&EvalReport>> = BTreeMap::new();
    for ((_, plan), report) in plans.iter().zip(reports) {
        for t in 0..report.tiers.len() {
            groups
                .entry((strategy_label(plan), report.budget_fraction.to_bits(), t))
                .or_default()
                .push(report);
        }
    }
    groups
        .into_iter()
        .map(|((strategy, bits, t), rs)| {
            let sens: Vec<f64> = rs.iter().map(|r| r.tiers[t].sensitivity).collect();
            let spec: Vec<f64> = rs.iter().map(|r| r.tiers[t].specificity).collect();
            let (sensitivity_mean, sensitivity_std) = mean_std(&sens);
            let (specificity_mean, specificity_std) = mean_std(&spec);
            SummaryRow {
                strategy,
                budget_fraction: f64::from_bits(bits),
                tier: rs[0].tiers[t].tier.clone(),
                runs: rs.len(),
                sensitivity_mean,
                sensitivity_std,
                specificity_mean,
                specificity_std,
            }
        })
        .collect()
}

fn summary_csv(rows: &[SummaryRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn stage<T>(name: &str, r: Result<T>) -> std::result::Result<T, (String, Error)> {
    r.map_err(|e| (name.to_string(), e))
}

/// Runs sweep, GFT datasets, filtering, plan construction, decoder training
/// and evaluation, writing every artifact under `out_dir`.
///
/// Layout: `config.toml`, `data/`, `datasets/`, `plans/`, `models/`,
/// `reports/`, `plot_data.csv`, `summary.csv` and `manifest.json`. A failing
/// stage still writes a manifest of what exists, flagged partial.
pub fn run_pipeline(config: &PipelineConfig, out_dir: &Path) -> Result<ExperimentBundle> {
    config.validate()?;
    let writer = ManifestWriter::new(out_dir, config.hash()?)?;
    match run_stages(config, &writer) {
        Ok((datasets, plans, reports, summary)) => Ok(ExperimentBundle {
            out_dir: out_dir.to_path_buf(),
            manifest: writer.finish(false)?,
            datasets,
            plans,
            reports,
            summary,
        }),
        Err((stage, source)) => {
            let partial = writer.finish(true).is_ok();
            Err(Error::Stage {
                stage,
                partial,
                source: Box::new(source),
            })
        }
    }
}

type StageOutput = (Vec<SamplingPlan>, Vec<SamplingPlan>, Vec<EvalReport>, Vec<SummaryRow>);

fn run_stages(cfg: &PipelineConfig, w: &ManifestWriter) -> std::result::Result<StageOutput, (String, Error)> {
    let mut canon = cfg.clone();
    if let Some(name) = cfg.network.file_name() {
        canon.network = PathBuf::from(name);
    }
    stage(
        "config",
        canon.to_toml().and_then(|t| w.write("config.toml", t.as_bytes())),
    )?;

    let net: PipeNetwork = stage(
        "network",
        std::fs::read_to_string(&cfg.network)
            .map_err(Error::from)
            .and_then(|t| parse_inp(&t)),
    )?;
    let n = net.junction_count();

    let matrices = stage("sweep", run_scenario_sweep(&net, &cfg.sources, &cfg.variant_spec()))?;
    log::info!("sweep: {} scenarios on {n} junctions", matrices.len());
    stage(
        "sweep",
        matrices.iter().try_for_each(|x| -> Result<()> {
            let label = x.scenario.label();
            w.write(&format!("data/{label}.csv"), x.to_csv()?.as_bytes())?;
            w.write_json(&format!("data/{label}.json"), &x.meta())?;
            Ok(())
        }),
    )?;

    let datasets: Vec<SamplingPlan> = stage(
        "datasets",
        cfg.sources
            .par_iter()
            .map(|s| {
                let variants: Vec<&DataMatrix> = matrices.iter().filter(|x| &x.scenario.source == s).collect();
                build_source_dataset(&variants)
            })
            .collect::<Result<Vec<_>>>(),
    )?;
    for d in &datasets {
        let name = format!("datasets/{}.json", d.id());
        stage("datasets", d.to_json().and_then(|j| w.write(&name, j.as_bytes())))?;
    }
    let filtered = filter_subset_datasets(&datasets);
    log::info!("datasets: {} kept of {}", filtered.len(), datasets.len());

    let fixed = stage("plans", fixed_plans(cfg, &net, &filtered, n))?;
    // (seed, plan) jobs; random plans are drawn once per seed
    let mut jobs: Vec<(u64, SamplingPlan)> = Vec::new();
    for &seed in &cfg.seeds {
        jobs.extend(fixed.iter().map(|p| (seed, p.clone())));
        if cfg.plans.random {
            let mut budgets: Vec<usize> = cfg
                .plans
                .budgets
                .iter()
                .map(|&b| PipelineConfig::budget_nodes(b, n))
                .collect();
            budgets.sort_unstable();
            budgets.dedup();
            for b in budgets {
                jobs.push((seed, stage("plans", random_plan(&net, b, seed))?));
            }
        }
    }
    let mut plans: Vec<SamplingPlan> = Vec::new();
    for (_, p) in &jobs {
        if !plans.iter().any(|q| q.id() == p.id()) {
            stage(
                "plans",
                p.to_json()
                    .and_then(|j| w.write(&format!("plans/{}.json", p.id()), j.as_bytes())),
            )?;
            plans.push(p.clone());
        }
    }

    let splits: BTreeMap<u64, Split> = cfg.seeds.iter().map(|&s| (s, split_variants(&matrices, s))).collect();
    let reports: Vec<EvalReport> = stage(
        "train",
        jobs.par_iter()
            .map(|(seed, plan)| {
                let split = &splits[seed];
                let train = Split::pick(&split.train, &matrices);
                let test = Split::pick(&split.test, &matrices);
                let model = train_decoder_on(plan, &train, &test, &cfg.decoder.config(*seed))?;
                let stem = format!("{}-seed{seed}", plan.id());
                w.write(&format!("models/{stem}.json"), model.to_json()?.as_bytes())?;
                let test_set = if test.is_empty() {
                    split.train_set(&matrices)
                } else {
                    split.test_set(&matrices)
                };
                let mut report = evaluate_plan(plan, &DecoderReconstructor { model: &model, plan }, &test_set)?;
                report.plan_id = plan.id();
                w.write_json(&format!("reports/{stem}.json"), &report)?;
                Ok(report)
            })
            .collect::<Result<Vec<_>>>(),
    )?;

    let pairs: Vec<(u64, &SamplingPlan)> = jobs.iter().map(|(s, p)| (*s, p)).collect();
    let summary = summarize(&pairs, &reports);
    stage(
        "export",
        export_plot_data(&reports).and_then(|c| w.write("plot_data.csv", c.as_bytes())),
    )?;
    stage(
        "export",
        summary_csv(&summary).and_then(|c| w.write("summary.csv", c.as_bytes())),
    )?;
    debug_assert!(reports.iter().all(|r| r.tiers.len() == TIERS.len()));
    Ok((datasets, plans, reports, summary))
}

/// Plans that do not depend on the seed.
fn fixed_plans(
    cfg: &PipelineConfig,
    net: &PipeNetwork,
    filtered: &[SamplingPlan],
    n: usize,
) -> Result<Vec<SamplingPlan>> {
    let mut out = Vec::new();
    for &t in &cfg.plans.gft_frequent_thresholds {
        for &b in &cfg.plans.budgets {
            out.push(gft_frequent_budget_plan(
                filtered,
                t,
                PipelineConfig::budget_nodes(b, n),
                n,
            )?);
        }
    }
    for &k in &cfg.plans.gft_important_n {
        out.push(gft_important_plan(filtered, k)?);
    }
    if cfg.plans.laplacian {
        for &b in &cfg.plans.budgets {
            out.push(laplacian_plan(net, PipelineConfig::budget_nodes(b, n))?);
        }
    }
    // two budget fractions can round to the same node count
    let mut seen = std::collections::BTreeSet::new();
    out.retain(|p| seen.insert(p.id()));
    Ok(out)
}
