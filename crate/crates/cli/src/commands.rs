use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use hydrosample::eval::{evaluate_plan, export_plot_data, run_pipeline, tier_threshold, EvalReport, PipelineConfig};
use hydrosample::gft::{build_gft_operator, select_sampling_set, GftOperatorJson, SelectionStrategy, DEFAULT_RANK_TOL};
use hydrosample::neural::{train_decoder, DecoderConfig, DecoderReconstructor, MlpModel, NeuralScorer, TrainConfig};
use hydrosample::plans::{
    build_gft_dataset, build_source_dataset, filter_subset_datasets, gft_frequent_budget_plan, gft_frequent_plan,
    gft_important_plan, laplacian_plan, random_plan, reduce_injection_specific, SamplingPlan,
};
use hydrosample::sim::{read_data_matrix, write_data_matrix};
use hydrosample::split::split_variants;
use hydrosample::{parse_inp, run_scenario_sweep, DataMatrix, PipeNetwork, VariantSpec};

use crate::{
    Cli, Command, EvaluateArgs, ExportArgs, GftArgs, PlanCommand, SimulateArgs, Strategy, TrainArgs, TrainOptions,
};

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate(args) => simulate(cli, args),
        Command::Gft(args) => gft(cli, args),
        Command::Plan(cmd) => plan(cli, cmd),
        Command::Train(args) => train(cli, args),
        Command::Evaluate(args) => evaluate(cli, args),
        Command::Pipeline => pipeline(cli),
        Command::Export(args) => export(cli, args),
    }
}

fn config(cli: &Cli) -> Result<Option<PipelineConfig>> {
    cli.config
        .as_deref()
        .map(|p| PipelineConfig::read(p).with_context(|| format!("reading {}", p.display())))
        .transpose()
}

fn read_network(path: &Path) -> Result<PipeNetwork> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_inp(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Files with extension `ext`, expanding directories (sorted by name).
fn expand(paths: &[PathBuf], ext: &str) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("listing {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|e| e == ext))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    if out.is_empty() {
        bail!("no .{ext} files found");
    }
    Ok(out)
}

fn read_matrices(paths: &[PathBuf]) -> Result<Vec<DataMatrix>> {
    expand(paths, "csv")?
        .iter()
        .map(|p| read_data_matrix(p).with_context(|| format!("reading {}", p.display())))
        .collect()
}

fn read_plans(paths: &[PathBuf]) -> Result<Vec<SamplingPlan>> {
    expand(paths, "json")?
        .iter()
        .map(|p| SamplingPlan::read(p).with_context(|| format!("reading {}", p.display())))
        .collect()
}

fn write_plan(cli: &Cli, dir: &str, name: &str, plan: &SamplingPlan) -> Result<PathBuf> {
    let dir = cli.out.join(dir);
    fs::create_dir_all(&dir)?;
    let path = dir.join(format!("{name}.json"));
    plan.write(&path)?;
    println!("{}\t{}\t{:?}", plan.id(), path.display(), plan.nodes);
    Ok(path)
}

fn budget(fraction: f64, n: usize) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(hydrosample::Error::InvalidArgument(format!("budget fraction {fraction} outside (0, 1]")).into());
    }
    Ok(PipelineConfig::budget_nodes(fraction, n))
}

fn decoder_config(opts: &TrainOptions, seed: u64) -> DecoderConfig {
    DecoderConfig {
        hidden: opts.hidden.clone(),
        train: TrainConfig {
            epochs: opts.epochs,
            learning_rate: opts.learning_rate,
            batch_size: opts.batch_size,
            seed,
        },
    }
}

fn simulate(cli: &Cli, args: &SimulateArgs) -> Result<()> {
    let cfg = config(cli)?;
    let network = match (&args.network, &cfg) {
        (Some(p), _) => p.clone(),
        (None, Some(c)) => c.network.clone(),
        (None, None) => bail!("--network or --config is required"),
    };
    let sources = match (args.sources.is_empty(), &cfg) {
        (false, _) => args.sources.clone(),
        (true, Some(c)) => c.sources.clone(),
        (true, None) => bail!("--sources or --config is required"),
    };
    let spec = match &cfg {
        Some(c) => c.variant_spec(),
        None => VariantSpec {
            rates: args.rates.clone(),
            durations: args.durations.clone(),
            starts: args.starts.clone(),
            timestep: args.timestep,
            max_steps: args.max_steps,
        },
    };
    let net = read_network(&network)?;
    let xs = run_scenario_sweep(&net, &sources, &spec)?;
    let dir = cli.out.join("data");
    for x in &xs {
        let (csv, _) = write_data_matrix(x, &dir, &x.scenario.label())?;
        println!("{}\t{} steps\t{}", x.scenario.label(), x.steps(), csv.display());
    }
    Ok(())
}

fn gft(cli: &Cli, args: &GftArgs) -> Result<()> {
    let xs = read_matrices(&args.data)?;
    if let Some(strategy) = args.operator {
        let strategy = match strategy {
            Strategy::Greedy => SelectionStrategy::Greedy,
            Strategy::Exhaustive => SelectionStrategy::Exhaustive,
        };
        let dir = cli.out.join("operators");
        fs::create_dir_all(&dir)?;
        for x in &xs {
            let op = build_gft_operator(&x.values, DEFAULT_RANK_TOL)?;
            let set = select_sampling_set(&op, strategy)?;
            let doc = serde_json::json!({
                "scenario": x.scenario.label(),
                "operator": GftOperatorJson::from(&op),
                "sampling_set": set,
            });
            fs::write(
                dir.join(format!("{}.json", x.scenario.label())),
                serde_json::to_string_pretty(&doc)?,
            )?;
        }
    }
    if args.per_scenario {
        for x in &xs {
            write_plan(cli, "datasets", &x.scenario.label(), &build_gft_dataset(x)?)?;
        }
        return Ok(());
    }
    let mut sources: Vec<&str> = Vec::new();
    for x in &xs {
        if !sources.contains(&x.scenario.source.as_str()) {
            sources.push(&x.scenario.source);
        }
    }
    for s in sources {
        let variants: Vec<&DataMatrix> = xs.iter().filter(|x| x.scenario.source == s).collect();
        let d = build_source_dataset(&variants)?;
        write_plan(cli, "datasets", &d.id(), &d)?;
    }
    Ok(())
}

fn plan(cli: &Cli, cmd: &PlanCommand) -> Result<()> {
    match cmd {
        PlanCommand::Filter { datasets } => {
            for d in filter_subset_datasets(&read_plans(datasets)?) {
                write_plan(cli, "filtered", &d.id(), &d)?;
            }
        }
        PlanCommand::Frequent {
            datasets,
            threshold,
            budget: fraction,
            network,
        } => {
            let plans = read_plans(datasets)?;
            let p = match (fraction, network) {
                (None, _) => gft_frequent_plan(&plans, *threshold)?,
                (Some(f), Some(net)) => {
                    let n = read_network(net)?.junction_count();
                    gft_frequent_budget_plan(&plans, *threshold, budget(*f, n)?, n)?
                }
                (Some(_), None) => bail!("--budget needs --network"),
            };
            write_plan(cli, "plans", &p.id(), &p)?;
        }
        PlanCommand::Important { datasets, n } => {
            let p = gft_important_plan(&read_plans(datasets)?, *n)?;
            write_plan(cli, "plans", &p.id(), &p)?;
        }
        PlanCommand::Laplacian { network, budget: f } => {
            let net = read_network(network)?;
            let p = laplacian_plan(&net, budget(*f, net.junction_count())?)?;
            write_plan(cli, "plans", &p.id(), &p)?;
        }
        PlanCommand::Random { network, budget: f } => {
            let net = read_network(network)?;
            let p = random_plan(&net, budget(*f, net.junction_count())?, cli.seed)?;
            write_plan(cli, "plans", &p.id(), &p)?;
        }
        PlanCommand::Reduce {
            plan,
            data,
            tier,
            train,
        } => {
            let threshold = match tier_threshold(tier) {
                Some(t) => t,
                None => tier
                    .parse::<f64>()
                    .with_context(|| format!("--tier {tier:?} is neither a tier name nor a number"))?,
            };
            let original = SamplingPlan::read(plan).with_context(|| format!("reading {}", plan.display()))?;
            let xs = read_matrices(data)?;
            let scorer = NeuralScorer {
                config: decoder_config(train, cli.seed),
                split_seed: cli.seed,
            };
            let reduced = reduce_injection_specific(&original, &xs, threshold, &scorer)?;
            eprintln!("{}: {} -> {} nodes", original.id(), original.len(), reduced.len());
            write_plan(cli, "plans", &format!("{}.reduced", original.id()), &reduced)?;
        }
    }
    Ok(())
}

fn train(cli: &Cli, args: &TrainArgs) -> Result<()> {
    let plan = SamplingPlan::read(&args.plan).with_context(|| format!("reading {}", args.plan.display()))?;
    let xs = read_matrices(&args.data)?;
    let model = train_decoder(&plan, &xs, cli.seed, &decoder_config(&args.train, cli.seed))?;
    let dir = cli.out.join("models");
    fs::create_dir_all(&dir)?;
    let path = dir.join(format!("{}-seed{}.json", plan.id(), cli.seed));
    model.write(&path)?;
    if let Some(meta) = &model.train_meta {
        println!(
            "{}\ttrain loss {:.3e}\tvalidation loss {}",
            path.display(),
            meta.final_train_loss,
            meta.final_val_loss.map_or("-".into(), |v| format!("{v:.3e}"))
        );
    }
    Ok(())
}

fn print_report(r: &EvalReport) {
    let mean = r.mean_nrmse.map_or("-".into(), |v| format!("{v:.4}"));
    println!("{}\tbudget {:.3}\tmean nrmse {mean}", r.plan_id, r.budget_fraction);
    for t in &r.tiers {
        println!(
            "  {:<6} sensitivity {:.3}  specificity {:.3}",
            t.tier, t.sensitivity, t.specificity
        );
    }
}

fn evaluate(cli: &Cli, args: &EvaluateArgs) -> Result<()> {
    let plan = SamplingPlan::read(&args.plan).with_context(|| format!("reading {}", args.plan.display()))?;
    let model = MlpModel::read(&args.model).with_context(|| format!("reading {}", args.model.display()))?;
    let xs = read_matrices(&args.data)?;
    let split = split_variants(&xs, cli.seed);
    let test = if args.all || split.test.is_empty() {
        xs.clone()
    } else {
        split.test_set(&xs)
    };
    let report = evaluate_plan(
        &plan,
        &DecoderReconstructor {
            model: &model,
            plan: &plan,
        },
        &test,
    )?;
    let dir = cli.out.join("reports");
    fs::create_dir_all(&dir)?;
    fs::write(
        dir.join(format!("{}-seed{}.json", plan.id(), cli.seed)),
        serde_json::to_string_pretty(&report)?,
    )?;
    print_report(&report);
    Ok(())
}

fn pipeline(cli: &Cli) -> Result<()> {
    let Some(cfg) = config(cli)? else {
        bail!("pipeline needs --config");
    };
    let bundle = run_pipeline(&cfg, &cli.out)?;
    println!("strategy\tbudget\ttier\truns\tsensitivity\tspecificity");
    for r in &bundle.summary {
        println!(
            "{}\t{:.3}\t{}\t{}\t{:.3}±{:.3}\t{:.3}±{:.3}",
            r.strategy,
            r.budget_fraction,
            r.tier,
            r.runs,
            r.sensitivity_mean,
            r.sensitivity_std,
            r.specificity_mean,
            r.specificity_std
        );
    }
    println!(
        "{} files, manifest {}",
        bundle.manifest.files.len(),
        cli.out.join("manifest.json").display()
    );
    Ok(())
}

fn export(cli: &Cli, args: &ExportArgs) -> Result<()> {
    let reports: Vec<EvalReport> = expand(&args.reports, "json")?
        .iter()
        .map(|p| -> Result<EvalReport> {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text)
                .map_err(hydrosample::Error::from)
                .with_context(|| format!("parsing {}", p.display()))
        })
        .collect::<Result<_>>()?;
    fs::create_dir_all(&cli.out)?;
    let path = cli.out.join("plot_data.csv");
    fs::write(&path, export_plot_data(&reports)?)?;
    println!("{} reports -> {}", reports.len(), path.display());
    Ok(())
}
