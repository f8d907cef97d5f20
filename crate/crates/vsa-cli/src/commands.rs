//! Subcommand implementations.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use vsa::codec::{Algebra, Codebook};
use vsa::dataset;
use vsa::experiments::{
    emit_heatmap, emit_variance_csv, run_retrieval_sweep, run_variance_sweep, SweepConfig,
    Variant,
};
use vsa::metrics::{
    build_propensities, precision_at_k, psp_at_k, psp_at_k_normalized, EvalReport, EvalRow,
};
use vsa::neural::{self, HeadKind, MlpModel, TrainConfig};
use vsa::seed::mix;

use crate::config::{header_line, parse_list, ConfigMap};
use crate::{usage, CliResult, CodebookGenArgs, DataStatsArgs, DataSynthArgs, EvalArgs,
    ExpRetrievalArgs, ExpVarianceArgs, TrainArgs};

fn require<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| usage(format!("missing required --{}", flag)))
}

fn resolve_list(
    cli: Option<&str>,
    cfg: &mut ConfigMap,
    key: &str,
) -> CliResult<Option<Vec<usize>>> {
    match cli {
        Some(text) => {
            // Still consume the config key so finish() stays strict.
            let _ = cfg.take_list(key)?;
            parse_list(text).map(Some)
        }
        None => cfg.take_list(key),
    }
}

pub(crate) fn codebook_gen(args: CodebookGenArgs) -> CliResult<()> {
    let mut cfg = ConfigMap::load(args.config.as_deref())?;
    let algebra_text = args
        .algebra
        .or(cfg.take_string("algebra")?)
        .ok_or_else(|| usage("missing required --algebra"))?;
    let algebra: Algebra = algebra_text
        .parse()
        .map_err(|e| usage(format!("{}", e)))?;
    let dim = require(args.dim.or(cfg.take_usize("dim")?), "dim")?;
    let labels = require(args.labels.or(cfg.take_usize("labels")?), "labels")?;
    let seed = args.seed.or(cfg.take_u64("seed")?).unwrap_or(0);
    let out = require(args.out.or(cfg.take_path("out")?), "out")?;
    cfg.finish()?;

    eprintln!(
        "[vsa] codebook gen: algebra={} dim={} labels={} seed={} out={}",
        algebra,
        dim,
        labels,
        seed,
        out.display()
    );
    let codebook = Codebook::generate(algebra, dim, labels, seed)?;
    codebook.save(&out)?;
    Ok(())
}

pub(crate) fn exp_retrieval(args: ExpRetrievalArgs) -> CliResult<()> {
    let mut cfg = ConfigMap::load(args.config.as_deref())?;
    let defaults = SweepConfig::default_retrieval();
    let dims = resolve_list(args.dims.as_deref(), &mut cfg, "dims")?.unwrap_or(defaults.dims);
    let ks = resolve_list(args.ks.as_deref(), &mut cfg, "ks")?.unwrap_or(defaults.ks);
    let labels = args
        .labels
        .or(cfg.take_usize("labels")?)
        .unwrap_or(defaults.num_labels);
    let trials = args
        .trials
        .or(cfg.take_usize("trials")?)
        .unwrap_or(defaults.trials);
    let seed = args.seed.or(cfg.take_u64("seed")?).unwrap_or(0);
    let threads = args.threads.or(cfg.take_usize("threads")?).unwrap_or(1);
    let out_dir = require(args.out_dir.or(cfg.take_path("out_dir")?), "out-dir")?;
    cfg.finish()?;

    let sweep_cfg = SweepConfig {
        algebras: vec![Algebra::Hrr, Algebra::Chrr],
        dims,
        ks,
        num_labels: labels,
        trials,
        base_seed: seed,
        threads,
    };
    eprintln!(
        "[vsa] exp retrieval: dims={:?} ks={:?} labels={} trials={} seed={} threads={} out_dir={}",
        sweep_cfg.dims,
        sweep_cfg.ks,
        labels,
        trials,
        seed,
        threads,
        out_dir.display()
    );

    std::fs::create_dir_all(&out_dir).map_err(vsa::VsaError::Io)?;
    let sweep = run_retrieval_sweep(&sweep_cfg)?;
    let header = header_line("exp retrieval", seed);
    emit_heatmap(
        &sweep,
        out_dir.join("retrieval.csv"),
        out_dir.join("retrieval.svg"),
        &header,
    )?;
    Ok(())
}

pub(crate) fn exp_variance(args: ExpVarianceArgs) -> CliResult<()> {
    let mut cfg = ConfigMap::load(args.config.as_deref())?;
    let defaults = SweepConfig::default_variance();
    let dim = args.dim.or(cfg.take_usize("dim")?).unwrap_or(400);
    let ks = resolve_list(args.ks.as_deref(), &mut cfg, "ks")?.unwrap_or(defaults.ks);
    let trials = args
        .trials
        .or(cfg.take_usize("trials")?)
        .unwrap_or(defaults.trials);
    let seed = args.seed.or(cfg.take_u64("seed")?).unwrap_or(0);
    let out_dir = require(args.out_dir.or(cfg.take_path("out_dir")?), "out-dir")?;
    cfg.finish()?;

    let sweep_cfg = SweepConfig {
        algebras: vec![Algebra::Hrr, Algebra::Chrr],
        dims: vec![dim],
        ks,
        num_labels: dim.max(1),
        trials,
        base_seed: seed,
        threads: 1,
    };
    eprintln!(
        "[vsa] exp variance: dim={} ks={:?} trials={} seed={} out_dir={}",
        dim,
        sweep_cfg.ks,
        trials,
        seed,
        out_dir.display()
    );

    std::fs::create_dir_all(&out_dir).map_err(vsa::VsaError::Io)?;
    let sweep = run_variance_sweep(&sweep_cfg, &Variant::ALL)?;
    emit_variance_csv(
        &sweep,
        out_dir.join("variance.csv"),
        &header_line("exp variance", seed),
    )?;
    Ok(())
}

pub(crate) fn train(args: TrainArgs) -> CliResult<()> {
    let mut cfg = ConfigMap::load(args.config.as_deref())?;
    let head_text = args
        .head
        .or(cfg.take_string("head")?)
        .ok_or_else(|| usage("missing required --head"))?;
    let head: HeadKind = head_text.parse().map_err(|e| usage(format!("{}", e)))?;
    let data_path = require(args.data.or(cfg.take_path("data")?), "data")?;
    let dim = args.dim.or(cfg.take_usize("dim")?).unwrap_or(800);
    let hidden = args.hidden.or(cfg.take_usize("hidden")?).unwrap_or(768);
    let lr = args.lr.or(cfg.take_f64("lr")?).unwrap_or(1.0);
    let batch = args.batch.or(cfg.take_usize("batch")?).unwrap_or(64);
    let epochs = args.epochs.or(cfg.take_usize("epochs")?).unwrap_or(100);
    let seed = args.seed.or(cfg.take_u64("seed")?).unwrap_or(0);
    let normalize = args.normalize_features
        || cfg.take_bool("normalize_features")?.unwrap_or(false);
    let out = require(args.out.or(cfg.take_path("out")?), "out")?;
    cfg.finish()?;

    if head == HeadKind::ChrrHalf && hidden % 2 != 0 {
        return Err(usage("--head chrr-half needs an even --hidden"));
    }

    eprintln!(
        "[vsa] train: head={} data={} dim={} hidden={} lr={} batch={} epochs={} seed={} normalize={} out={}",
        head,
        data_path.display(),
        dim,
        hidden,
        lr,
        batch,
        epochs,
        seed,
        normalize,
        out.display()
    );

    let data = dataset::parse_xmc(&data_path)?;
    let input_dim = data.num_features as usize;
    let num_labels = data.num_labels as usize;

    let mut model = match head {
        HeadKind::Fc => MlpModel::new_fc(input_dim, hidden, num_labels, mix(seed, &[2]))?,
        _ => {
            let algebra = head.algebra().expect("vector head");
            let codebook = Codebook::generate(algebra, dim, num_labels, mix(seed, &[1]))?;
            MlpModel::new_with_codebook(head, input_dim, hidden, codebook, mix(seed, &[2]))?
        }
    };
    model.set_feature_normalization(normalize);

    let train_cfg = TrainConfig {
        learning_rate: lr,
        batch_size: batch,
        epochs,
        seed: mix(seed, &[3]),
    };
    let log = neural::train(&mut model, &data, &train_cfg)?;
    if log.skipped_examples > 0 {
        eprintln!(
            "[vsa] skipped {} examples without labels",
            log.skipped_examples
        );
    }

    model.save(&out)?;
    let loss_path = loss_log_path(&out);
    let mut w = BufWriter::new(File::create(&loss_path).map_err(vsa::VsaError::Io)?);
    neural::write_loss_log(&log, &mut w, &header_line("train", seed))?;
    w.flush().map_err(vsa::VsaError::Io)?;
    eprintln!(
        "[vsa] wrote model to {} and loss log to {}",
        out.display(),
        loss_path.display()
    );
    Ok(())
}

fn loss_log_path(model_path: &std::path::Path) -> PathBuf {
    let mut name = model_path.file_name().unwrap_or_default().to_os_string();
    name.push(".loss.csv");
    model_path.with_file_name(name)
}

pub(crate) fn eval(args: EvalArgs) -> CliResult<()> {
    let mut cfg = ConfigMap::load(args.config.as_deref())?;
    let model_path = require(args.model.or(cfg.take_path("model")?), "model")?;
    let data_path = require(args.data.or(cfg.take_path("data")?), "data")?;
    let ks = resolve_list(args.ks.as_deref(), &mut cfg, "ks")?.unwrap_or(vec![1, 5, 10, 20]);
    let psp_normalized =
        args.psp_normalized || cfg.take_bool("psp_normalized")?.unwrap_or(false);
    let psp = args.psp || psp_normalized || cfg.take_bool("psp")?.unwrap_or(false);
    let props_path = args.props_data.or(cfg.take_path("props_data")?);
    let out = require(args.out.or(cfg.take_path("out")?), "out")?;
    cfg.finish()?;

    let mut ks = ks;
    ks.sort_unstable();
    ks.dedup();
    if ks.is_empty() || ks[0] == 0 {
        return Err(usage("--ks needs positive cutoffs"));
    }

    eprintln!(
        "[vsa] eval: model={} data={} ks={:?} psp={} psp_normalized={} out={}",
        model_path.display(),
        data_path.display(),
        ks,
        psp,
        psp_normalized,
        out.display()
    );

    let model = MlpModel::load(&model_path)?;
    let data = dataset::parse_xmc(&data_path)?;
    if data.num_features as usize != model.input_dim()
        || data.num_labels as usize != model.num_labels()
    {
        return Err(usage(format!(
            "dataset shape ({} features, {} labels) does not match the model ({}, {})",
            data.num_features,
            data.num_labels,
            model.input_dim(),
            model.num_labels()
        )));
    }
    let max_k = *ks.last().expect("nonempty ks");
    if max_k > model.num_labels() {
        return Err(usage(format!(
            "k = {} exceeds the label count {}",
            max_k,
            model.num_labels()
        )));
    }

    let props = if psp {
        let table = match &props_path {
            Some(p) => build_propensities(&dataset::parse_xmc(p)?)?,
            None => build_propensities(&data)?,
        };
        Some(table)
    } else {
        None
    };

    let n = data.examples.len();
    if n == 0 {
        return Err(usage("evaluation data has no examples"));
    }
    let mut p_sums = vec![0.0; ks.len()];
    let mut psp_sums = vec![0.0; ks.len()];
    let mut pspn_sums = vec![0.0; ks.len()];
    for ex in &data.examples {
        let ranked = model.predict_ranking(&ex.features, max_k)?;
        let ranking: Vec<usize> = ranked.iter().map(|(id, _)| *id).collect();
        let truth: Vec<usize> = ex.labels.iter().map(|&l| l as usize).collect();
        for (i, &k) in ks.iter().enumerate() {
            p_sums[i] += precision_at_k(&ranking, &truth, k)?;
            if let Some(table) = &props {
                if truth.is_empty() {
                    // No positive labels: both propensity scores are 0.
                } else {
                    psp_sums[i] += psp_at_k(&ranking, &truth, k, table)?;
                    if psp_normalized {
                        pspn_sums[i] += psp_at_k_normalized(&ranking, &truth, k, table)?;
                    }
                }
            }
        }
    }

    let seed = model.init_seed();
    let mut rows = Vec::new();
    for (i, &k) in ks.iter().enumerate() {
        rows.push(EvalRow {
            metric: "p".into(),
            k,
            value: p_sums[i] / n as f64,
        });
    }
    if props.is_some() {
        for (i, &k) in ks.iter().enumerate() {
            rows.push(EvalRow {
                metric: "psp".into(),
                k,
                value: psp_sums[i] / n as f64,
            });
        }
        if psp_normalized {
            for (i, &k) in ks.iter().enumerate() {
                rows.push(EvalRow {
                    metric: "psp_norm".into(),
                    k,
                    value: pspn_sums[i] / n as f64,
                });
            }
        }
    }
    let report = EvalReport {
        tool: format!("vsa {}", crate::TOOL_VERSION),
        subcommand: "eval".into(),
        seed,
        rows,
    };

    let mut w = BufWriter::new(File::create(&out).map_err(vsa::VsaError::Io)?);
    report.write_csv(&mut w, &header_line("eval", seed))?;
    w.flush().map_err(vsa::VsaError::Io)?;
    let json_path = out.with_extension("json");
    let mut jw = BufWriter::new(File::create(&json_path).map_err(vsa::VsaError::Io)?);
    report.write_json(&mut jw)?;
    jw.flush().map_err(vsa::VsaError::Io)?;
    eprintln!(
        "[vsa] wrote report to {} and {}",
        out.display(),
        json_path.display()
    );
    Ok(())
}

pub(crate) fn data_stats(args: DataStatsArgs) -> CliResult<()> {
    let mut cfg = ConfigMap::load(args.config.as_deref())?;
    let data_path = require(args.data.or(cfg.take_path("data")?), "data")?;
    cfg.finish()?;

    eprintln!("[vsa] data stats: data={}", data_path.display());
    let ds = dataset::parse_xmc(&data_path)?;
    let stats = dataset::dataset_stats(&ds);
    println!("examples,{}", stats.num_examples);
    println!("features,{}", stats.num_features);
    println!("labels,{}", stats.num_labels);
    println!("avg_examples_per_label,{}", stats.avg_examples_per_label);
    println!("avg_labels_per_example,{}", stats.avg_labels_per_example);
    Ok(())
}

pub(crate) fn data_synth(args: DataSynthArgs) -> CliResult<()> {
    let mut cfg = ConfigMap::load(args.config.as_deref())?;
    let examples = require(args.examples.or(cfg.take_usize("examples")?), "examples")?;
    let features = require(args.features.or(cfg.take_u32("features")?), "features")?;
    let labels = require(args.labels.or(cfg.take_u32("labels")?), "labels")?;
    let per_example = require(
        args.per_example.or(cfg.take_usize("per_example")?),
        "per-example",
    )?;
    let noise = args.noise.or(cfg.take_f64("noise")?).unwrap_or(0.0);
    let seed = args.seed.or(cfg.take_u64("seed")?).unwrap_or(0);
    let out = require(args.out.or(cfg.take_path("out")?), "out")?;
    cfg.finish()?;

    eprintln!(
        "[vsa] data synth: examples={} features={} labels={} per_example={} noise={} seed={} out={}",
        examples,
        features,
        labels,
        per_example,
        noise,
        seed,
        out.display()
    );
    let ds = dataset::generate_synthetic(examples, features, labels, per_example, noise, seed)?;
    dataset::emit_xmc(&ds, &out)?;
    Ok(())
}
