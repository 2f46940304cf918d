use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, ValueEnum};
use factspan::data::{load_examples, save_examples, AnnotatedExample, FactLabelSet, Label, Provenance};
use factspan::derive::{arcs_to_words_checked, taxonomy_distribution, words_to_arcs, TaxonomyDistribution};
use factspan::entc::{generate_entc, parse_transforms, EntcConfig, EntcProviders, LexiconTagger};
use factspan::eval::{
    balanced_accuracy, curve_tsv, eval_curve, fmt4, localization_prf, split_by_generation_model, tsv,
    without_punctuation, Averaging, ErrorRates, Metric, Prf, SplitMode, Undefined,
};
use factspan::genc::generate_genc;
use factspan::masked::{derive_masks, export_masked_corpus, masked_fraction, MaskProvenance, Normalization};
use factspan::models::{
    localize_at, train_averaged, Checkpoint, EncoderSpec, FactualityModel, ModelKind, TrainConfig, TrainOutcome,
};
use factspan::providers::{CommandParser, MockParaphraser, ParaphraseProvider, ParserProvider};
use factspan::Error;

use crate::config::Resolved;
use crate::manifest::{sha256_file, ManifestBuilder};
use crate::Common;

fn flag<T: ToString>(v: &Option<T>) -> Option<String> {
    v.as_ref().map(ToString::to_string)
}

fn resolve(common: &Common, keys: &[&str], flags: Vec<(&str, Option<String>)>) -> Result<Resolved> {
    let mut all_keys = vec!["seed", "strict"];
    all_keys.extend_from_slice(keys);
    let mut all_flags = vec![
        ("seed", flag(&common.seed)),
        ("strict", common.lenient.then(|| "false".to_string())),
    ];
    all_flags.extend(flags);
    Ok(Resolved::resolve(&all_keys, common.config.as_deref(), &all_flags)?)
}

fn load(path: &Path, cfg: &Resolved) -> Result<Vec<AnnotatedExample>> {
    let report = load_examples(path, cfg.get("strict")?).with_context(|| format!("loading {}", path.display()))?;
    if report.skipped > 0 {
        log::warn!("{}: skipped {} malformed lines", path.display(), report.skipped);
    }
    Ok(report.examples)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn config_err(key: &str, message: impl Into<String>) -> anyhow::Error {
    Error::Config {
        key: key.into(),
        message: message.into(),
    }
    .into()
}

fn parse_ratio(raw: &str) -> Result<Option<(usize, usize)>> {
    if raw == "none" {
        return Ok(None);
    }
    let parsed = raw
        .split_once(':')
        .and_then(|(p, n)| Some((p.trim().parse().ok()?, n.trim().parse().ok()?)));
    parsed
        .map(Some)
        .ok_or_else(|| config_err("ratio", format!("expected `<pos>:<neg>` or `none`, got `{raw}`")))
}

fn build_parser(cfg: &Resolved) -> Result<Option<CommandParser>> {
    let raw = cfg.raw("parser")?;
    if raw == "none" {
        return Ok(None);
    }
    let cmd = raw
        .strip_prefix("cmd:")
        .ok_or_else(|| config_err("parser", format!("expected `none` or `cmd:<program>`, got `{raw}`")))?;
    let mut parts = cmd.split_whitespace().map(String::from);
    let program = parts.next().ok_or_else(|| config_err("parser", "empty command"))?;
    Ok(Some(CommandParser::new(program, parts.collect())))
}

fn build_paraphraser(cfg: &Resolved) -> Result<Option<MockParaphraser>> {
    match cfg.raw("paraphraser")? {
        "mock" => Ok(Some(MockParaphraser::default())),
        "none" => Ok(None),
        other => Err(config_err("paraphraser", format!("unknown provider `{other}` (expected mock or none)"))),
    }
}

/// `model.json` inside a model directory, or the path itself if it is a file.
fn model_file(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join("model.json")
    } else {
        path.to_path_buf()
    }
}

fn load_model(path: &Path) -> Result<(FactualityModel, PathBuf)> {
    let file = model_file(path);
    let model = FactualityModel::load(&file).with_context(|| format!("loading model {}", file.display()))?;
    Ok((model, file))
}

#[derive(Args, Debug)]
pub struct GenEntcArgs {
    #[command(flatten)]
    common: Common,
    /// Claims to corrupt (JSONL).
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Maximum negatives per claim; 0 keeps all.
    #[arg(long)]
    per_claim: Option<usize>,
    #[arg(long)]
    noise_rate: Option<f64>,
    /// both, duplicate or delete.
    #[arg(long)]
    noise_mode: Option<String>,
    /// Comma-separated: entity,number,pronoun,negation,noise,paraphrase.
    #[arg(long)]
    transforms: Option<String>,
    /// Positive:negative ratio such as `1:1`, or `none`.
    #[arg(long)]
    ratio: Option<String>,
    #[arg(long)]
    do_support: Option<bool>,
    /// Tab-separated `surface<TAB>TYPE` entity list, or `none`.
    #[arg(long)]
    gazetteer: Option<String>,
    /// Paraphrase provider: mock or none.
    #[arg(long)]
    paraphraser: Option<String>,
    /// Re-parse corrupted claims with `cmd:<program>`, or `none`.
    #[arg(long)]
    parser: Option<String>,
}

pub fn gen_entc(a: GenEntcArgs) -> Result<()> {
    let cfg = resolve(
        &a.common,
        &[
            "per_claim", "noise_rate", "noise_mode", "transforms", "ratio", "do_support", "gazetteer", "paraphraser",
            "parser",
        ],
        vec![
            ("per_claim", flag(&a.per_claim)),
            ("noise_rate", flag(&a.noise_rate)),
            ("noise_mode", a.noise_mode.clone()),
            ("transforms", a.transforms.clone()),
            ("ratio", a.ratio.clone()),
            ("do_support", flag(&a.do_support)),
            ("gazetteer", a.gazetteer.clone()),
            ("paraphraser", a.paraphraser.clone()),
            ("parser", a.parser.clone()),
        ],
    )?;
    let corpus = load(&a.corpus, &cfg)?;
    let config = EntcConfig {
        transforms: parse_transforms(cfg.raw("transforms")?)?,
        per_claim: cfg.get("per_claim")?,
        noise_rate: cfg.get("noise_rate")?,
        noise_mode: cfg.get("noise_mode")?,
        pos_neg_ratio: parse_ratio(cfg.raw("ratio")?)?,
        do_support: cfg.get("do_support")?,
    };
    let gazetteer = cfg.raw("gazetteer")?;
    let tagger = if gazetteer == "none" {
        LexiconTagger::new()
    } else {
        LexiconTagger::from_gazetteer(gazetteer)?
    };
    let paraphraser = build_paraphraser(&cfg)?;
    let parser = build_parser(&cfg)?;
    let providers = EntcProviders {
        tagger: &tagger,
        paraphraser: paraphraser.as_ref().map(|p| p as &dyn ParaphraseProvider),
        parser: parser.as_ref().map(|p| p as &dyn ParserProvider),
    };
    let out = generate_entc(&corpus, &config, &providers, cfg.get("seed")?)?;
    save_examples(&out.examples, &a.out)?;
    for (kind, n) in &out.emitted {
        log::info!("emitted {n} {kind} examples");
    }

    let mut m = ManifestBuilder::new("gen-entc", &cfg);
    m.input(&a.corpus)?;
    if gazetteer != "none" {
        m.input(Path::new(gazetteer))?;
    }
    m.output(&a.out)?
        .report("emitted", serde_json::to_value(&out.emitted)?)
        .report("skipped", serde_json::to_value(&out.skipped)?)
        .report("positives", out.positives())
        .report("negatives", out.negatives())
        .report("dropped_for_balance", out.dropped_for_balance);
    m.write(&a.out)?;
    Ok(())
}

#[derive(Args, Debug)]
pub struct GenGencArgs {
    #[command(flatten)]
    common: Common,
    /// Gold summaries (JSONL).
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// 1-based beam rank of the paraphrase to label.
    #[arg(long)]
    rank: Option<usize>,
    /// Paraphrase provider key.
    #[arg(long)]
    provider: Option<String>,
    #[arg(long)]
    parser: Option<String>,
}

pub fn gen_genc(a: GenGencArgs) -> Result<()> {
    let cfg = resolve(
        &a.common,
        &["rank", "paraphraser", "parser"],
        vec![
            ("rank", flag(&a.rank)),
            ("paraphraser", a.provider.clone()),
            ("parser", a.parser.clone()),
        ],
    )?;
    let corpus = load(&a.corpus, &cfg)?;
    let provider = build_paraphraser(&cfg)?.ok_or_else(|| config_err("paraphraser", "gen-genc needs a provider"))?;
    let parser = build_parser(&cfg)?;
    let out = generate_genc(
        &corpus,
        &provider,
        cfg.get("rank")?,
        parser.as_ref().map(|p| p as &dyn ParserProvider),
    )?;
    save_examples(&out.examples, &a.out)?;
    let (pos, neg) = out.paraphrase_balance();
    let mut m = ManifestBuilder::new("gen-genc", &cfg);
    m.input(&a.corpus)?
        .output(&a.out)?
        .report("examples", out.examples.len())
        .report("skipped", out.skipped)
        .report("defaulted", out.defaulted)
        .report("paraphrase_factual", pos)
        .report("paraphrase_nonfactual", neg);
    m.write(&a.out)?;
    Ok(())
}

#[derive(Args, Debug)]
pub struct DeriveArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Also project generation-centric arc labels onto words.
    #[arg(long)]
    force: bool,
}

pub fn derive(a: DeriveArgs) -> Result<()> {
    let cfg = resolve(&a.common, &[], vec![])?;
    let mut examples = load(&a.input, &cfg)?;
    let (mut arcs_filled, mut words_filled, mut refused, mut conflicts) = (0usize, 0usize, 0usize, 0usize);
    for ex in &mut examples {
        let before = ex.labels.clone();
        let parse = &ex.summary.parse;
        if ex.labels.arc_labels.is_none() {
            if let Some(mask) = &ex.labels.word_mask {
                ex.labels.arc_labels = Some(words_to_arcs(parse, mask)?);
                arcs_filled += 1;
            }
        }
        if ex.labels.word_mask.is_none() {
            if let Some(arcs) = &ex.labels.arc_labels {
                match arcs_to_words_checked(parse, arcs, ex.labels.provenance, a.force) {
                    Ok(mask) => {
                        ex.labels.word_mask = Some(mask);
                        words_filled += 1;
                    }
                    Err(_) if ex.labels.provenance == Provenance::GenC => refused += 1,
                    Err(e) => return Err(e.into()),
                }
            }
        }
        if let Err(e) = ex.validate() {
            log::warn!("{}: derived labels disagree with the sentence label ({e}); kept as given", ex.id());
            ex.labels = before;
            conflicts += 1;
        }
    }
    save_examples(&examples, &a.out)?;
    let mut m = ManifestBuilder::new("derive", &cfg);
    m.input(&a.input)?
        .output(&a.out)?
        .report("arc_labels_filled", arcs_filled)
        .report("word_masks_filled", words_filled)
        .report("genc_word_masks_refused", refused)
        .report("conflicts", conflicts);
    m.write(&a.out)?;
    Ok(())
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    common: Common,
    /// sent, dae or dae-weak.
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    dev: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// `mock` or `cmd:<program>`.
    #[arg(long)]
    encoder: Option<String>,
    #[arg(long)]
    encoder_dim: Option<usize>,
    #[arg(long)]
    max_seq: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    eval_every: Option<usize>,
    #[arg(long)]
    freeze_encoder: Option<bool>,
    /// Hidden width of the classifier head; omit for an affine head.
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    grad_clip: Option<f64>,
    #[arg(long)]
    weight_decay: Option<f64>,
    #[arg(long)]
    warmup_steps: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    /// Independent runs; the best one is kept and all are reported.
    #[arg(long)]
    seeds: Option<usize>,
}

fn best_run(outcomes: &[TrainOutcome]) -> &TrainOutcome {
    outcomes
        .iter()
        .fold(None::<&TrainOutcome>, |best, o| match best {
            Some(b) if b.best_dev() >= o.best_dev() => Some(b),
            _ => Some(o),
        })
        .expect("at least one run")
}

pub fn train(a: TrainArgs) -> Result<()> {
    let keys = [
        "kind", "encoder", "encoder_dim", "max_seq", "lr", "batch", "epochs", "max_steps", "eval_every",
        "freeze_encoder", "hidden", "grad_clip", "weight_decay", "warmup_steps", "threshold", "seeds",
    ];
    let cfg = resolve(
        &a.common,
        &keys,
        vec![
            ("kind", a.kind.clone()),
            ("encoder", a.encoder.clone()),
            ("encoder_dim", flag(&a.encoder_dim)),
            ("max_seq", flag(&a.max_seq)),
            ("lr", flag(&a.lr)),
            ("batch", flag(&a.batch)),
            ("epochs", flag(&a.epochs)),
            ("max_steps", flag(&a.max_steps)),
            ("eval_every", flag(&a.eval_every)),
            ("freeze_encoder", flag(&a.freeze_encoder)),
            ("hidden", flag(&a.hidden)),
            ("grad_clip", flag(&a.grad_clip)),
            ("weight_decay", flag(&a.weight_decay)),
            ("warmup_steps", flag(&a.warmup_steps)),
            ("threshold", flag(&a.threshold)),
            ("seeds", flag(&a.seeds)),
        ],
    )?;
    let kind: ModelKind = cfg.get("kind")?;
    let tc = TrainConfig {
        lr: cfg.get("lr")?,
        batch: cfg.get("batch")?,
        epochs: cfg.get("epochs")?,
        max_steps: cfg.get_opt("max_steps")?,
        eval_every: cfg.get("eval_every")?,
        freeze_encoder: cfg.get("freeze_encoder")?,
        hidden: cfg.get_opt("hidden")?,
        grad_clip: cfg.get("grad_clip")?,
        weight_decay: cfg.get("weight_decay")?,
        warmup_steps: cfg.get("warmup_steps")?,
        threshold: cfg.get("threshold")?,
        encoder: EncoderSpec::from_key(cfg.raw("encoder")?, cfg.get("encoder_dim")?, cfg.get("max_seq")?)?,
    };
    let train_set = load(&a.train, &cfg)?;
    let dev = load(&a.dev, &cfg)?;
    let runs: usize = cfg.get("seeds")?;
    let (outcomes, mean_dev) = train_averaged(kind, &train_set, &dev, &tc, cfg.get("seed")?, runs)?;
    let best = best_run(&outcomes);

    let ckpt_dir = a.out.join("checkpoints");
    fs::create_dir_all(&ckpt_dir).with_context(|| format!("creating {}", ckpt_dir.display()))?;
    for entry in fs::read_dir(&ckpt_dir)? {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if name.starts_with("step-") && name.ends_with(".json") {
            fs::remove_file(&path)?;
        }
    }
    let mut written = Vec::new();
    let model_path = a.out.join("model.json");
    best.model.save(&model_path)?;
    written.push(model_path);
    let config_path = a.out.join("config.txt");
    write_text(&config_path, &cfg.describe())?;
    written.push(config_path);
    let curve_path = a.out.join("dev_curve.tsv");
    write_text(
        &curve_path,
        &tsv(
            &["step", "dev_balanced_accuracy"],
            best.curve().into_iter().map(|(s, v)| vec![s.to_string(), fmt4(v)]),
        ),
    )?;
    written.push(curve_path);
    for c in &best.checkpoints {
        let path = ckpt_dir.join(format!("step-{:06}.json", c.step));
        write_text(&path, &serde_json::to_string(c)?)?;
        written.push(path);
    }
    if runs > 1 {
        let path = a.out.join("runs.tsv");
        write_text(
            &path,
            &tsv(
                &["run", "best_step", "dev_balanced_accuracy"],
                outcomes
                    .iter()
                    .enumerate()
                    .map(|(i, o)| vec![i.to_string(), o.best_step.to_string(), fmt4(o.best_dev())]),
            ),
        )?;
        written.push(path);
    }

    let mut m = ManifestBuilder::new("train", &cfg);
    m.input(&a.train)?.input(&a.dev)?;
    for path in &written {
        m.output(path)?;
    }
    m.report("kind", kind.as_str())
        .report("best_step", best.best_step)
        .report("best_dev_balanced_accuracy", best.best_dev())
        .report("mean_best_dev_balanced_accuracy", mean_dev)
        .report("steps", best.steps)
        .report("dropped_infeasible", best.dropped_infeasible)
        .report("skipped_arcless", best.skipped_arcless);
    m.write(&a.out)?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Level {
    Sentence,
    Arc,
    Word,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[command(flatten)]
    common: Common,
    /// Model directory (or a model.json file).
    #[arg(long)]
    model: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Level::Sentence)]
    level: Level,
    /// Decision threshold; defaults to the one stored with the model.
    #[arg(long)]
    threshold: Option<f64>,
}

pub fn predict(a: PredictArgs) -> Result<()> {
    let cfg = resolve(&a.common, &["threshold"], vec![("threshold", flag(&a.threshold))])?;
    let (model, model_path) = load_model(&a.model)?;
    let threshold = match cfg.source("threshold") {
        Some(crate::config::Source::Default) => model.threshold(),
        _ => cfg.get("threshold")?,
    };
    if a.level != Level::Sentence && !model.kind().is_arc_level() {
        bail!("--level {:?} needs an arc-level model, got {}", a.level, model.kind());
    }
    let mut examples = load(&a.input, &cfg)?;
    let mut flagged = 0usize;
    for ex in &mut examples {
        let pred = model.predict_sentence_at(&ex.document, &ex.summary, threshold)?;
        let mut labels = FactLabelSet::sentence_only(pred.label, Provenance::ModelPrediction);
        if a.level != Level::Sentence {
            let (arcs, words) = localize_at(&model, &ex.document, &ex.summary, threshold)?;
            labels.arc_labels = Some(arcs);
            if a.level == Level::Word {
                labels.word_mask = Some(words);
            }
        }
        flagged += pred.label.is_nonfactual() as usize;
        ex.labels = labels;
        ex.error_tags = None;
        ex.document.meta.insert("pred_score".into(), format!("{:.6}", pred.score));
        ex.validate()?;
    }
    save_examples(&examples, &a.out)?;
    let mut m = ManifestBuilder::new("predict", &cfg);
    m.input(&model_path)?
        .input(&a.input)?
        .output(&a.out)?
        .report("level", format!("{:?}", a.level).to_lowercase())
        .report("threshold_used", threshold)
        .report("examples", examples.len())
        .report("predicted_nonfactual", flagged);
    m.write(&a.out)?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MetricName {
    BalancedAcc,
    PrfArc,
    PrfWord,
    ErrorRates,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[command(flatten)]
    common: Common,
    /// Gold labels; not needed for error-rates.
    #[arg(long)]
    gold: Option<PathBuf>,
    #[arg(long)]
    pred: PathBuf,
    #[arg(long, value_enum)]
    metric: MetricName,
    #[arg(long)]
    out: PathBuf,
    /// micro or macro.
    #[arg(long)]
    averaging: Option<String>,
    /// Count punctuation tokens in word-level scores.
    #[arg(long)]
    include_punct: Option<bool>,
    /// How undefined values are printed: marker or zero.
    #[arg(long)]
    undefined: Option<String>,
}

fn pair_up<'a>(
    gold: &'a [AnnotatedExample],
    pred: &'a [AnnotatedExample],
) -> Result<Vec<(&'a AnnotatedExample, &'a AnnotatedExample)>> {
    let by_id: BTreeMap<&str, &AnnotatedExample> = pred.iter().map(|e| (e.id(), e)).collect();
    if by_id.len() != gold.len() || pred.len() != gold.len() {
        bail!("{} gold examples but {} predictions", gold.len(), pred.len());
    }
    gold.iter()
        .map(|g| {
            let p = by_id.get(g.id()).ok_or_else(|| anyhow!("no prediction for `{}`", g.id()))?;
            if p.summary.tokens != g.summary.tokens || p.summary.parse.arcs() != g.summary.parse.arcs() {
                bail!("prediction for `{}` is over a different summary", g.id());
            }
            Ok((g, *p))
        })
        .collect()
}

fn prf_rows(p: &Prf, undefined: Undefined) -> Vec<Vec<String>> {
    vec![
        vec!["precision".into(), Metric(p.precision, undefined).to_string()],
        vec!["recall".into(), Metric(p.recall, undefined).to_string()],
        vec!["f1".into(), Metric(p.f1, undefined).to_string()],
        vec!["tp".into(), p.tp.to_string()],
        vec!["fp".into(), p.fp.to_string()],
        vec!["fn".into(), p.fn_.to_string()],
    ]
}

fn units(ex: &AnnotatedExample, arcs: bool, include_punct: bool) -> Result<Vec<bool>> {
    let seq = if arcs {
        ex.labels
            .arc_labels
            .as_ref()
            .map(|l| l.iter().map(|x| x.is_nonfactual()).collect())
            .ok_or_else(|| anyhow!("`{}` has no arc labels", ex.id()))?
    } else {
        let mask = ex
            .labels
            .word_mask
            .clone()
            .ok_or_else(|| anyhow!("`{}` has no word mask", ex.id()))?;
        if include_punct {
            mask
        } else {
            without_punctuation(&ex.summary.tokens, &mask)
        }
    };
    Ok(seq)
}

pub fn eval(a: EvalArgs) -> Result<()> {
    let cfg = resolve(
        &a.common,
        &["averaging", "include_punct", "undefined"],
        vec![
            ("averaging", a.averaging.clone()),
            ("include_punct", flag(&a.include_punct)),
            ("undefined", a.undefined.clone()),
        ],
    )?;
    let averaging: Averaging = cfg.get("averaging")?;
    let include_punct: bool = cfg.get("include_punct")?;
    let undefined: Undefined = cfg.get("undefined")?;
    let pred = load(&a.pred, &cfg)?;
    let gold = match (&a.gold, a.metric) {
        (Some(path), _) => Some(load(path, &cfg)?),
        (None, MetricName::ErrorRates) => None,
        (None, _) => bail!("--gold is required for {:?}", a.metric),
    };

    let rows = match a.metric {
        MetricName::ErrorRates => {
            let mut r = ErrorRates::default();
            for ex in &pred {
                let mask = ex
                    .labels
                    .word_mask
                    .as_ref()
                    .ok_or_else(|| anyhow!("`{}` has no word mask; predict with --level word", ex.id()))?;
                r.words += mask.len();
                r.flagged_words += mask.iter().filter(|&&m| m).count();
                r.sentences += 1;
                r.flagged_sentences += ex.labels.sentence_label.is_nonfactual() as usize;
            }
            if r.sentences == 0 {
                bail!("no summaries in {}", a.pred.display());
            }
            vec![
                vec!["word_error_rate".into(), fmt4(r.word_rate())],
                vec!["sentence_error_rate".into(), fmt4(r.sentence_rate())],
                vec!["words".into(), r.words.to_string()],
                vec!["flagged_words".into(), r.flagged_words.to_string()],
                vec!["sentences".into(), r.sentences.to_string()],
                vec!["flagged_sentences".into(), r.flagged_sentences.to_string()],
            ]
        }
        metric => {
            let gold = gold.as_deref().unwrap_or_default();
            let pairs = pair_up(gold, &pred)?;
            match metric {
                MetricName::BalancedAcc => {
                    let g: Vec<Label> = pairs.iter().map(|(g, _)| g.labels.sentence_label).collect();
                    let p: Vec<Label> = pairs.iter().map(|(_, p)| p.labels.sentence_label).collect();
                    let value = match balanced_accuracy(&g, &p) {
                        Ok(v) => Some(v),
                        Err(Error::UndefinedMetric(why)) => {
                            log::warn!("balanced accuracy undefined: {why}");
                            None
                        }
                        Err(e) => return Err(e.into()),
                    };
                    vec![
                        vec!["balanced_accuracy".into(), Metric(value, undefined).to_string()],
                        vec!["examples".into(), pairs.len().to_string()],
                    ]
                }
                _ => {
                    let arcs = metric == MetricName::PrfArc;
                    let (mut g, mut p) = (Vec::new(), Vec::new());
                    for (ge, pe) in &pairs {
                        g.push(units(ge, arcs, include_punct)?);
                        p.push(units(pe, arcs, include_punct)?);
                    }
                    prf_rows(&localization_prf(&g, &p, averaging)?, undefined)
                }
            }
        }
    };
    write_text(&a.out, &tsv(&["metric", "value"], rows))?;
    let mut m = ManifestBuilder::new("eval", &cfg);
    if let Some(g) = &a.gold {
        m.input(g)?;
    }
    m.input(&a.pred)?
        .output(&a.out)?
        .report("metric", format!("{:?}", a.metric));
    m.write(&a.out)?;
    Ok(())
}

#[derive(Args, Debug)]
pub struct SplitArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long = "in")]
    input: PathBuf,
    /// Generation model to hold out (matched against `meta.model`).
    #[arg(long)]
    by_model: String,
    /// all or others.
    #[arg(long)]
    mode: Option<String>,
    /// Held-out-model examples moved to train in `all` mode.
    #[arg(long)]
    cap: Option<usize>,
    #[arg(long)]
    train_out: PathBuf,
    #[arg(long)]
    test_out: PathBuf,
}

pub fn split(a: SplitArgs) -> Result<()> {
    let cfg = resolve(
        &a.common,
        &["mode", "cap"],
        vec![("mode", a.mode.clone()), ("cap", flag(&a.cap))],
    )?;
    let examples = load(&a.input, &cfg)?;
    let mode: SplitMode = cfg.get("mode")?;
    let (train, test) = split_by_generation_model(&examples, &a.by_model, mode, cfg.get("cap")?, cfg.get("seed")?)?;
    save_examples(&train, &a.train_out)?;
    save_examples(&test, &a.test_out)?;
    let mut m = ManifestBuilder::new("split", &cfg);
    m.input(&a.input)?
        .output(&a.train_out)?
        .output(&a.test_out)?
        .report("held_out", a.by_model.as_str())
        .report("train", train.len())
        .report("test", test.len());
    m.write(&a.train_out)?;
    m.write(&a.test_out)?;
    Ok(())
}

#[derive(Args, Debug)]
pub struct CurveArgs {
    #[command(flatten)]
    common: Common,
    /// Training output directory with saved checkpoints.
    #[arg(long)]
    model: PathBuf,
    /// Evaluation set as `name=path`; repeatable.
    #[arg(long = "set", required = true)]
    sets: Vec<String>,
    #[arg(long)]
    out: PathBuf,
}

pub fn curve(a: CurveArgs) -> Result<()> {
    let cfg = resolve(&a.common, &[], vec![])?;
    let ckpt_dir = a.model.join("checkpoints");
    let mut files: Vec<PathBuf> = fs::read_dir(&ckpt_dir)
        .with_context(|| format!("reading {}", ckpt_dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| p.extension().is_some_and(|x| x == "json"));
    files.sort();
    let checkpoints = files
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p)?;
            serde_json::from_str::<Checkpoint>(&text).with_context(|| format!("reading checkpoint {}", p.display()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sets = Vec::new();
    let mut set_paths = Vec::new();
    for spec in &a.sets {
        let (name, path) = spec
            .split_once('=')
            .ok_or_else(|| anyhow!("--set expects `name=path`, got `{spec}`"))?;
        let path = PathBuf::from(path);
        sets.push((name.to_string(), load(&path, &cfg)?));
        set_paths.push(path);
    }
    let rows = eval_curve(&checkpoints, &sets)?;
    write_text(&a.out, &curve_tsv(&rows))?;
    let mut m = ManifestBuilder::new("curve", &cfg);
    for p in files.iter().chain(&set_paths) {
        m.input(p)?;
    }
    m.output(&a.out)?
        .report("checkpoints", checkpoints.len())
        .report("rows", rows.len());
    m.write(&a.out)?;
    Ok(())
}

#[derive(Args, Debug)]
pub struct MaskArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    model: PathBuf,
    /// Reference summaries with parses (JSONL).
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    out: PathBuf,
    /// Loss normalization recorded for the external trainer: sum or mean.
    #[arg(long)]
    normalization: Option<String>,
}

/// Settings for the external summarizer fine-tune that consumes the export.
const TRAINER_TEMPLATE: &[(&str, &str)] = &[
    ("max_input_length", "512"),
    ("max_output_length", "128"),
    ("lr", "2e-5"),
    ("batch", "8"),
    ("epochs", "10"),
    ("num_beams", "6"),
    ("length_penalty", "2"),
    ("no_repeat_ngram_size", "3"),
    ("min_length", "10"),
    ("max_length", "60"),
];

pub fn trainer_template(masked_corpus: &str, normalization: &str) -> String {
    let mut out = String::from("# masked summarization fine-tune; loss skips tokens with train_mask 0\n");
    out.push_str(&format!("masked_corpus = {masked_corpus}\nnormalization = {normalization}\n"));
    for (k, v) in TRAINER_TEMPLATE {
        out.push_str(&format!("{k} = {v}\n"));
    }
    out
}

pub fn mask(a: MaskArgs) -> Result<()> {
    let cfg = resolve(
        &a.common,
        &["threshold", "normalization"],
        vec![
            ("threshold", flag(&a.threshold)),
            ("normalization", a.normalization.clone()),
        ],
    )?;
    let threshold: f64 = cfg.get("threshold")?;
    let _: Normalization = cfg.get("normalization")?;
    let (mut model, model_path) = load_model(&a.model)?;
    if !model.kind().is_arc_level() {
        bail!("masking needs a dae or dae-weak model, got {}", model.kind());
    }
    model.set_threshold(threshold)?;
    let corpus = load(&a.corpus, &cfg)?;
    let digest = sha256_file(&model_path)?;
    let provenance = MaskProvenance {
        model: format!("sha256:{}", &digest[..16]),
        kind: model.kind().as_str().to_string(),
        threshold,
    };
    let targets = derive_masks(&model, &corpus, threshold, &provenance)?;
    export_masked_corpus(&targets, &a.out)?;
    let empty = targets.iter().filter(|t| !t.mask.iter().any(|&m| m)).count();
    if empty > 0 {
        log::warn!("{empty} targets keep no tokens");
    }
    let mut template_name = a.out.file_name().unwrap_or_default().to_os_string();
    template_name.push(".trainer.txt");
    let template_path = a.out.with_file_name(template_name);
    let corpus_name = a.out.file_name().unwrap_or_default().to_string_lossy();
    write_text(&template_path, &trainer_template(&corpus_name, cfg.raw("normalization")?))?;

    let fraction = if targets.is_empty() { 0.0 } else { masked_fraction(&targets) };
    let mut m = ManifestBuilder::new("mask", &cfg);
    m.input(&model_path)?
        .input(&a.corpus)?
        .output(&a.out)?
        .output(&template_path)?
        .report("targets", targets.len())
        .report("masked_fraction", fraction)
        .report("empty_masks", empty);
    m.write(&a.out)?;
    Ok(())
}

#[derive(Args, Debug)]
pub struct TaxonomyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

pub fn taxonomy_table(d: &TaxonomyDistribution) -> String {
    tsv(
        &["category", "orientation", "count", "fraction_all", "fraction_erroneous"],
        TaxonomyDistribution::cells().into_iter().map(|(c, o)| {
            vec![
                c.as_str().to_string(),
                o.as_str().to_string(),
                d.count(c, o).to_string(),
                fmt4(d.fraction_of_all(c, o)),
                Metric(d.fraction_of_erroneous(c, o), Undefined::Marker).to_string(),
            ]
        }),
    )
}

pub fn taxonomy_stats(a: TaxonomyArgs) -> Result<()> {
    let cfg = resolve(&a.common, &[], vec![])?;
    let examples = load(&a.input, &cfg)?;
    let untagged = examples.iter().filter(|e| e.error_tags.is_none()).count();
    if untagged > 0 {
        log::warn!("{untagged} examples carry no error tags and count as error-free");
    }
    let d = taxonomy_distribution(&examples);
    write_text(&a.out, &taxonomy_table(&d))?;
    let mut m = ManifestBuilder::new("taxonomy-stats", &cfg);
    m.input(&a.input)?
        .output(&a.out)?
        .report("total", d.total)
        .report("erroneous", d.erroneous);
    m.write(&a.out)?;
    Ok(())
}
