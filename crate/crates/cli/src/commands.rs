use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use hopewave_core::eval::{
    channel_ablation, channel_ablation_csv, cross_corpus_matrix, cross_matrix_csv, mask_ablation, mask_ablation_csv,
    reconstruction_accuracy, report_csv, MaskMode, ModelPredictor, RunConfig,
};
use hopewave_core::graph::{
    gen_synthetic, parse_edge_list, read_corpus, write_corpus, Family, Graph, GraphCorpus, SyntheticKind,
};
use hopewave_core::net::{extract_pe, write_pe_csv, ModelConfig};
use hopewave_core::rng::{substream, Purpose};
use hopewave_core::spectral::{WaveletConfig, WaveletMethod};
use hopewave_core::train::{load_checkpoint, pretrain_with_progress, save_checkpoint, EpochRecord, TrainConfig};
use rand::Rng as _;
use serde::Serialize;

use crate::args::*;
use crate::error::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| CliError::io(path, e))
}

fn load_corpus(path: &Path) -> Result<GraphCorpus> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_corpus(BufReader::new(file)).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn corpus_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "corpus".into())
}

fn load_graph(src: &GraphSource) -> Result<Graph> {
    match (&src.graph, &src.corpus) {
        (Some(path), _) => {
            let file = File::open(path).map_err(|e| CliError::io(path, e))?;
            parse_edge_list(BufReader::new(file)).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
        }
        (None, Some(path)) => {
            let corpus = load_corpus(path)?;
            let len = corpus.len();
            corpus.graphs.into_iter().nth(src.index).ok_or_else(|| {
                CliError::Usage(format!("{}: index {} out of range for {len} graphs", path.display(), src.index))
            })
        }
        (None, None) => Err(CliError::Usage("one of --graph or --corpus is required".into())),
    }
}

fn method(m: Method, order: usize) -> WaveletMethod {
    match m {
        Method::Exact => WaveletMethod::Exact,
        Method::Chebyshev => WaveletMethod::Chebyshev { order },
    }
}

fn run_config(t: &TrainArgs, seed: u64) -> RunConfig {
    RunConfig {
        model: ModelConfig {
            wavelet_channels: t.scales.len(),
            encoder_widths: t.encoder_widths.clone(),
            latent_hidden: t.latent_hidden,
            latent_dim: t.latent,
            decoder_widths: t.decoder_widths.clone(),
            head_widths: t.head_widths.clone(),
            hops: t.hops.clone(),
        },
        train: TrainConfig {
            epochs: t.epochs,
            batch_size: t.batch,
            learning_rate: t.lr,
            threshold: t.threshold,
            seed,
            resample_masks: !t.fixed_masks,
            masking: !t.no_mask,
            ..TrainConfig::default()
        },
        wavelet: WaveletConfig { scales: t.scales.clone(), method: method(t.method, t.order) },
        eval_seed: seed,
    }
}

fn split(corpus: GraphCorpus, t: &TrainArgs, seed: u64) -> Result<GraphCorpus> {
    Ok(corpus.split(t.valid_fraction, seed)?)
}

pub fn gen(a: &GenArgs) -> Result<()> {
    let corpus = if a.kind == Kind::Mix {
        let families = a.families.iter().map(|f| Family::parse(&f.replace('-', "_"))).collect::<std::result::Result<Vec<_>, _>>()?;
        GraphCorpus::synthetic_mix(&families, a.count, (a.n_min, a.n_max), a.seed)?
    } else {
        let (kind, name) = match a.kind {
            Kind::ErdosRenyi => (SyntheticKind::ErdosRenyi { n: a.n, p: a.p }, "erdos_renyi"),
            Kind::Cycle => (SyntheticKind::Cycle { n: a.n }, "cycle"),
            Kind::Path => (SyntheticKind::Path { n: a.n }, "path"),
            Kind::Grid => (SyntheticKind::Grid { rows: a.rows, cols: a.cols }, "grid"),
            Kind::Tree => (SyntheticKind::Tree { n: a.n }, "tree"),
            Kind::Barbell => {
                let clique = (a.n / 3).max(2);
                (SyntheticKind::Barbell { clique, bridge: a.n.saturating_sub(2 * clique) }, "barbell")
            }
            Kind::Mix => unreachable!(),
        };
        let graphs = (0..a.count)
            .map(|i| {
                let seed = substream(a.seed, Purpose::Generator, (1 << 41) | i as u64).random();
                Ok(gen_synthetic(kind, seed, a.connected)?.with_id(format!("{name}-{i}")))
            })
            .collect::<Result<Vec<_>>>()?;
        GraphCorpus::new(graphs)
    };
    let mut w = create(&a.out)?;
    write_corpus(&mut w, &corpus)?;
    finish(w, &a.out)?;
    println!("wrote {} graphs to {}", corpus.len(), a.out.display());
    Ok(())
}

#[derive(Serialize)]
struct WaveletDump<'a> {
    n: usize,
    scales: &'a [f64],
    method: WaveletMethod,
    /// `channels[j][u][v]`.
    channels: Vec<Vec<Vec<f64>>>,
}

pub fn wavelet(a: &WaveletArgs) -> Result<()> {
    let g = load_graph(&a.source)?;
    let cfg = WaveletConfig { scales: a.scales.clone(), method: method(a.method, a.order) };
    let w = cfg.compute(&g)?;
    let channels: Vec<Vec<Vec<f64>>> = (0..w.channels())
        .map(|j| w.channel(j).rows().into_iter().map(|r| r.to_vec()).collect())
        .collect();
    match a.format {
        DumpFormat::Json => {
            let mut out = create(&a.out)?;
            let dump = WaveletDump { n: g.n(), scales: &a.scales, method: cfg.method, channels };
            serde_json::to_writer(&mut out, &dump)?;
            writeln!(out).map_err(|e| CliError::io(&a.out, e))?;
            finish(out, &a.out)?;
        }
        DumpFormat::Csv => {
            std::fs::create_dir_all(&a.out).map_err(|e| CliError::io(&a.out, e))?;
            for (j, ch) in channels.iter().enumerate() {
                let path = a.out.join(format!("channel_{j}.csv"));
                let mut w = csv::Writer::from_writer(create(&path)?);
                for row in ch {
                    w.write_record(row.iter().map(|x| x.to_string()))?;
                }
                w.flush().map_err(|e| CliError::io(&path, e))?;
            }
        }
    }
    Ok(())
}

fn history_csv(history: &[EpochRecord], hops: &[usize], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let mut header = vec!["epoch".to_string(), "train_loss".into(), "valid_loss".into()];
    header.extend(hops.iter().map(|h| format!("valid_acc_hop{h}")));
    w.write_record(&header)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in history {
        let mut rec = vec![r.epoch.to_string(), r.train_loss.to_string(), opt(r.valid_loss)];
        rec.extend(r.valid_hop_accuracy.iter().map(|a| opt(*a)));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn pretrain(a: &PretrainArgs) -> Result<()> {
    let run = run_config(&a.train, a.seed);
    let corpus = split(load_corpus(&a.corpus)?, &a.train, a.seed)?;
    let quiet = a.quiet;
    let mut progress = |r: &EpochRecord| {
        if !quiet {
            let valid = r.valid_loss.map(|v| format!("{v:.5}")).unwrap_or_else(|| "-".into());
            eprintln!("epoch {:>4}  train {:.5}  valid {valid}", r.epoch, r.train_loss);
        }
    };
    let out = pretrain_with_progress(&corpus, &run.model, &run.train, &run.wavelet, &mut progress)?;
    save_checkpoint(&out.checkpoint, &a.out)?;
    if let Some(path) = &a.history {
        history_csv(&out.history, &run.model.hops, path)?;
    }
    println!(
        "checkpoint {} (epoch {}) written to {}",
        out.checkpoint.id(),
        out.checkpoint.meta.epoch,
        a.out.display()
    );
    Ok(())
}

pub fn eval(a: &EvalArgs) -> Result<()> {
    let ckpt = load_checkpoint(&a.ckpt)?;
    let corpus = load_corpus(&a.corpus)?;
    let graphs: Vec<Graph> = match a.split {
        Split::All => corpus.graphs.clone(),
        s => {
            let c = corpus.split(a.valid_fraction, a.split_seed)?;
            if s == Split::Train { c.train_graphs().cloned().collect() } else { c.valid_graphs().cloned().collect() }
        }
    };
    let hops = if a.hops.is_empty() { ckpt.model.hops.clone() } else { a.hops.clone() };
    let threshold = a
        .threshold
        .or_else(|| ckpt.meta.train_config.as_ref().map(|t| t.threshold))
        .unwrap_or(TrainConfig::default().threshold);
    let mode = match a.mask_mode {
        MaskModeArg::Masked => MaskMode::Masked,
        MaskModeArg::Unmasked => MaskMode::Unmasked,
    };
    let rep = reconstruction_accuracy(
        &ModelPredictor::new(&ckpt),
        &graphs,
        &hops,
        mode,
        threshold,
        a.seed,
        &corpus_name(&a.corpus),
    )?;
    let mut w = create(&a.out)?;
    report_csv(&rep, &mut w)?;
    finish(w, &a.out)?;
    if let Some(agg) = rep.aggregate() {
        println!("aggregate accuracy {agg:.6} over {} graphs", graphs.len());
    }
    Ok(())
}

pub fn encode(a: &EncodeArgs) -> Result<()> {
    let ckpt = load_checkpoint(&a.ckpt)?;
    let g = load_graph(&a.source)?;
    let z = extract_pe(&g, &ckpt.params, &ckpt.model, &ckpt.wavelet.scales, ckpt.wavelet.method)?;
    let mut w = create(&a.out)?;
    write_pe_csv(&z, &mut w)?;
    finish(w, &a.out)
}

pub fn ablate_channels(a: &AblateChannelsArgs) -> Result<()> {
    let run = run_config(&a.train, a.seed);
    let corpus = split(load_corpus(&a.corpus)?, &a.train, a.seed)?;
    let rows = channel_ablation(&corpus, &a.counts, (a.scale_min, a.scale_max), &run)?;
    let mut w = create(&a.out)?;
    channel_ablation_csv(&rows, &mut w)?;
    finish(w, &a.out)
}

pub fn ablate_mask(a: &AblateMaskArgs) -> Result<()> {
    let run = run_config(&a.train, a.seed);
    let corpus = split(load_corpus(&a.corpus)?, &a.train, a.seed)?;
    let res = mask_ablation(&corpus, &run)?;
    let mut w = create(&a.out)?;
    mask_ablation_csv(&res, &mut w)?;
    finish(w, &a.out)
}

pub fn cross_eval(a: &CrossEvalArgs) -> Result<()> {
    if a.corpora.len() < 2 {
        return Err(CliError::Usage("cross-eval needs at least two --corpus name=path entries".into()));
    }
    let run = run_config(&a.train, a.seed);
    let corpora = a
        .corpora
        .iter()
        .map(|spec| {
            let (name, path) = spec
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("`{spec}`: expected name=path")))?;
            Ok((name.to_string(), split(load_corpus(Path::new(path))?, &a.train, a.seed)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let m = cross_corpus_matrix(&corpora, &run)?;
    let mut w = create(&a.out)?;
    cross_matrix_csv(&m, &mut w)?;
    finish(w, &a.out)
}

pub fn selftest() -> Result<()> {
    let results = hopewave_core::selftest::run_all();
    for r in &results {
        println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    if results.iter().all(|r| r.passed) {
        Ok(())
    } else {
        Err(CliError::Internal("selftest failed".into()))
    }
}
