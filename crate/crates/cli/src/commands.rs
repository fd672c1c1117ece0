use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Result};
use mvdfq_core::learn::{roc50, FittedRepresentation};
use mvdfq_core::textfmt::{fmt_real, read_text, write_text};
use mvdfq_core::{
    compute_cross_gram, compute_gram, cross_validate, fit_kmeans_quantizer, fit_uniform_quantizer, fit_vq_codebook,
    ingest_csv, ingest_fasta, load_discrete, save_discrete, synth, train_ovr, BaseKernel, Codebook, CrossGram,
    DiscreteSequence, GramMatrix, KernelSpec, MultivariateSequence, OvrModel, PipelineConfig, QuantizerKind,
    QuantizerModel, Representation, SvmParams, SynthParams,
};

use crate::{
    Command, CrossGramArgs, CvArgs, DiscretizeArgs, EvalRoc50Args, FitCodebookArgs, FitQuantizerArgs, GramArgs,
    InputArgs, KernelArg, KernelArgs, PredictArgs, QuantArgs, QuantizerArg, RepresentationArg, SelftestArgs, SvmArgs,
    SynthArgs, TrainArgs,
};

pub fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::FitQuantizer(a) => fit_quantizer(a),
        Command::FitCodebook(a) => fit_codebook(a),
        Command::Discretize(a) => discretize(a),
        Command::Gram(a) => gram(a),
        Command::CrossGram(a) => cross_gram(a),
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Cv(a) => cv(a),
        Command::EvalRoc50(a) => eval_roc50(a),
        Command::Synth(a) => synth_cmd(a),
        Command::Selftest(a) => return selftest(a),
    }
    .map(|()| ExitCode::SUCCESS)
}

fn load_input(input: &InputArgs) -> Result<Vec<MultivariateSequence>> {
    let data = match (&input.manifest, &input.fasta, &input.labels) {
        (Some(m), _, _) => ingest_csv(m)?,
        (None, Some(f), Some(l)) => ingest_fasta(f, l)?,
        _ => bail!("give --manifest, or --fasta with --labels"),
    };
    if data.is_empty() {
        bail!("input holds no sequences");
    }
    Ok(data)
}

fn quantizer_kind(q: QuantizerArg) -> QuantizerKind {
    match q {
        QuantizerArg::Uniform => QuantizerKind::Uniform,
        QuantizerArg::Kmeans => QuantizerKind::KMeans1d,
    }
}

fn base_kernel(k: &KernelArgs) -> BaseKernel {
    match k.kernel {
        KernelArg::Spectrum => BaseKernel::Spectrum { k: k.k },
        KernelArg::Mismatch => BaseKernel::Mismatch { k: k.k, m: k.m },
        KernelArg::Sssk => BaseKernel::Sssk { t: k.t, d: k.d },
    }
}

fn kernel_spec(k: &KernelArgs, alphabet_size: u32) -> Result<KernelSpec> {
    let spec = KernelSpec::new(base_kernel(k), alphabet_size)
        .with_manifold(k.manifold)
        .with_normalize(k.normalize);
    spec.validate()?;
    Ok(spec)
}

fn svm_params(s: &SvmArgs) -> Result<SvmParams> {
    let params = SvmParams {
        c: s.c,
        tol: s.tol,
        ..SvmParams::default()
    };
    params.validate()?;
    Ok(params)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_text(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn fit_quantizer(a: FitQuantizerArgs) -> Result<()> {
    let data = load_input(&a.input)?;
    let QuantArgs {
        bins,
        quantizer,
        kmeans_iter,
        seed,
    } = a.quant;
    let model = match quantizer {
        QuantizerArg::Uniform => fit_uniform_quantizer(&data, bins)?,
        QuantizerArg::Kmeans => fit_kmeans_quantizer(&data, bins, kmeans_iter, seed)?,
    };
    model.save(&a.out)?;
    Ok(())
}

fn fit_codebook(a: FitCodebookArgs) -> Result<()> {
    let data = load_input(&a.input)?;
    fit_vq_codebook(&data, a.codebook_size, a.kmeans_iter, a.seed)?.save(&a.out)?;
    Ok(())
}

/// Loads a quantizer or codebook, telling them apart by their header line.
fn load_representation(path: &Path) -> Result<FittedRepresentation> {
    let text = read_text(path)?;
    let first = text.lines().next().unwrap_or("");
    if first.starts_with("dfq-quantizer") {
        Ok(FittedRepresentation::Quantizer(QuantizerModel::parse(&text, path)?))
    } else if first.starts_with("vq-codebook") {
        Ok(FittedRepresentation::Codebook(Codebook::parse(&text, path)?))
    } else {
        bail!("{}: not a quantizer or codebook file", path.display())
    }
}

fn discretize(a: DiscretizeArgs) -> Result<()> {
    let data = load_input(&a.input)?;
    let repr = load_representation(&a.model)?;
    save_discrete(&repr.apply_all(&data)?, &a.out)?;
    Ok(())
}

fn load_discrete_nonempty(path: &Path) -> Result<Vec<DiscreteSequence>> {
    let data = load_discrete(path)?;
    if data.is_empty() {
        bail!("{}: no sequences", path.display());
    }
    Ok(data)
}

fn gram(a: GramArgs) -> Result<()> {
    let data = load_discrete_nonempty(&a.input)?;
    let spec = kernel_spec(&a.kernel, data[0].alphabet_size())?;
    compute_gram(&data, &spec)?.save(&a.out)?;
    Ok(())
}

fn cross_gram(a: CrossGramArgs) -> Result<()> {
    let test = load_discrete_nonempty(&a.input)?;
    let train = load_discrete_nonempty(&a.train)?;
    let spec = kernel_spec(&a.kernel, train[0].alphabet_size())?;
    compute_cross_gram(&test, &train, &spec)?.save(&a.out)?;
    Ok(())
}

fn labels_by_id(data: &[DiscreteSequence]) -> HashMap<&str, &str> {
    data.iter().map(|s| (s.id.as_str(), s.label.as_str())).collect()
}

fn train(a: TrainArgs) -> Result<()> {
    let gram = GramMatrix::load(&a.gram)?;
    let data = load_discrete_nonempty(&a.input)?;
    let by_id = labels_by_id(&data);
    let labels = gram
        .ids()
        .iter()
        .map(|id| {
            by_id
                .get(id.as_str())
                .copied()
                .ok_or_else(|| anyhow!("no label for Gram id {id}"))
        })
        .collect::<Result<Vec<_>>>()?;
    train_ovr(&gram, &labels, &svm_params(&a.svm)?)?.save(&a.out)?;
    Ok(())
}

fn predict(a: PredictArgs) -> Result<()> {
    let model = OvrModel::load(&a.model)?;
    let cross = CrossGram::load(&a.cross_gram)?;
    let truths = a.input.as_deref().map(load_discrete_nonempty).transpose()?;
    let by_id = truths.as_deref().map(labels_by_id);

    let mut out = String::from("id");
    if by_id.is_some() {
        out.push_str("\ttruth");
    }
    out.push_str("\tpredicted\tscore");
    for c in model.classes() {
        write!(out, "\tscore:{c}").unwrap();
    }
    out.push('\n');
    for p in model.predict_cross(&cross)? {
        out.push_str(&p.id);
        if let Some(by_id) = &by_id {
            let truth = by_id
                .get(p.id.as_str())
                .ok_or_else(|| anyhow!("no label for test id {}", p.id))?;
            write!(out, "\t{truth}").unwrap();
        }
        write!(out, "\t{}\t{}", p.label, fmt_real(p.score)).unwrap();
        for s in &p.scores {
            write!(out, "\t{}", fmt_real(*s)).unwrap();
        }
        out.push('\n');
    }
    emit(a.out.as_deref(), &out)
}

fn cv(a: CvArgs) -> Result<()> {
    let data = load_input(&a.input)?;
    let representation = match a.representation {
        RepresentationArg::Dfq => Representation::Dfq {
            kind: quantizer_kind(a.quant.quantizer),
            bins: a.quant.bins,
        },
        RepresentationArg::Vq => Representation::Vq {
            codebook_size: a.codebook_size,
        },
    };
    let config = PipelineConfig {
        representation,
        kernel: base_kernel(&a.kernel),
        manifold: a.kernel.manifold,
        normalize: a.kernel.normalize,
        svm: svm_params(&a.svm)?,
        folds: a.folds,
        seed: a.quant.seed,
        group_cv: a.group_cv,
        kmeans_iter: a.quant.kmeans_iter,
        positive_label: a.positive_label,
    };
    let outcome = cross_validate(&data, &config)?;
    if let Some(p) = &a.predictions {
        write_text(p, &outcome.predictions_tsv())?;
    }
    emit(a.out.as_deref(), &outcome.report.to_tsv())
}

fn eval_roc50(a: EvalRoc50Args) -> Result<()> {
    let path = &a.scores;
    let text = read_text(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| anyhow!("{}: empty file", path.display()))?
        .split('\t')
        .collect();
    let column = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| anyhow!("{}: no column named {name:?}", path.display()))
    };
    let (tc, sc) = (column(&a.truth_column)?, column(&a.score_column)?);
    let mut truths = Vec::new();
    let mut scores = Vec::new();
    for (i, line) in lines.enumerate() {
        let cols: Vec<&str> = line.split('\t').collect();
        let cell = |c: usize| {
            cols.get(c)
                .copied()
                .ok_or_else(|| anyhow!("{}: data row {} is missing column {}", path.display(), i + 1, c + 1))
        };
        truths.push(cell(tc)?.to_string());
        let s = cell(sc)?;
        scores.push(
            s.parse::<f64>()
                .ok()
                .filter(|v| !v.is_nan())
                .ok_or_else(|| anyhow!("{}: data row {}: bad score {s:?}", path.display(), i + 1))?,
        );
    }
    let classes: BTreeSet<&str> = truths.iter().map(String::as_str).collect();
    let positive = match (&a.positive_label, classes.len()) {
        (Some(p), _) => p.clone(),
        (None, 2) => classes.first().unwrap().to_string(),
        (None, n) => bail!("{n} distinct labels; choose one with --positive-label"),
    };
    let is_pos: Vec<bool> = truths.iter().map(|t| *t == positive).collect();
    let value = roc50(&scores, &is_pos)?;
    let n_pos = is_pos.iter().filter(|&&p| p).count();
    let report = format!(
        "metric\tvalue\nroc50\t{}\npositives\t{n_pos}\nnegatives\t{}\n",
        fmt_real(value),
        is_pos.len() - n_pos
    );
    emit(a.out.as_deref(), &report)
}

fn synth_cmd(a: SynthArgs) -> Result<()> {
    let data = synth::generate(&SynthParams {
        classes: a.classes,
        per_class: a.per_class,
        dims: a.dims,
        length: a.length,
        seed: a.seed,
    })?;
    let manifest = synth::write_dataset(&data, &a.out)?;
    println!("{}", manifest.display());
    Ok(())
}

fn selftest(a: SelftestArgs) -> Result<ExitCode> {
    let results = mvdfq_core::selftest::run_all(a.seed);
    let mut failed = 0;
    for r in &results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!("{status}\t{}\t{:.3}s\t{}", r.name, r.seconds, r.detail);
        failed += usize::from(!r.passed);
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
