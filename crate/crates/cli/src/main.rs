//! `morphtag` command-line tool.
//!
//! Data goes to stdout, diagnostics to stderr. `-` stands for stdin or
//! stdout wherever a path is expected. Usage errors exit with 2, data errors
//! with 1.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use morphtag::conllu_io::{tokenize, write_conllu, Abbreviations, ConlluReader};
use morphtag::evalx::{EvalReport, Section};
use morphtag::pipeline::{annotate, annotate_external, candidate_tables, self_train};
use morphtag::tagger::{parse_external_distributions, scan_inventories};
use morphtag::{ColumnOrder, MorphDict, Sentence, TaggerModel, TrainConfig};
use morphtag_service::{ModelBundle, Service, ServiceConfig};

#[derive(Parser)]
#[command(
    name = "morphtag",
    version,
    about = "Czech tagging and lemmatization rescored by a morphological dictionary"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a TSV dictionary into the binary format.
    DictBuild {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value = "form-lemma-tag")]
        order: ColumnOrder,
    },
    /// Print entry counts and the ambiguity histogram of a dictionary.
    DictStats {
        #[arg(long)]
        dict: PathBuf,
        #[arg(long, default_value = "form-lemma-tag")]
        order: ColumnOrder,
        #[arg(long)]
        json: bool,
    },
    /// Train a tagger on an annotated CoNLL-U corpus.
    Train {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        training: Training,
    },
    /// Annotate CoNLL-U (or plain text with --text).
    Tag(TagArgs),
    /// Score system output against gold annotation.
    Eval {
        /// Gold file; repeat together with --system, one per section.
        #[arg(long, required = true)]
        gold: Vec<PathBuf>,
        #[arg(long, required = true)]
        system: Vec<PathBuf>,
        /// Baseline system output, one per section, for error reduction.
        #[arg(long)]
        baseline: Vec<PathBuf>,
        /// Enables the ambiguity and error-category breakdowns.
        #[arg(long)]
        dict: Option<PathBuf>,
        #[arg(long, default_value = "form-lemma-tag")]
        order: ColumnOrder,
        #[arg(long)]
        json: bool,
    },
    /// Train, annotate raw data, retrain on the union.
    Selftrain {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        raw: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Defaults to OUTPUT.provenance.json.
        #[arg(long)]
        provenance: Option<PathBuf>,
        #[arg(long)]
        dict: Option<PathBuf>,
        #[arg(long, default_value = "form-lemma-tag")]
        order: ColumnOrder,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[command(flatten)]
        training: Training,
    },
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Measure tagging speed with and without the dictionary.
    Bench {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dict: PathBuf,
        #[arg(long, default_value = "form-lemma-tag")]
        order: ColumnOrder,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 3)]
        repeat: usize,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
}

#[derive(Args)]
struct Training {
    #[arg(long, default_value_t = 20)]
    epochs: u32,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    temperature: f64,
}

impl Training {
    fn config(&self) -> Result<TrainConfig> {
        if !(self.temperature > 0.0) {
            bail!("temperature must be positive");
        }
        Ok(TrainConfig {
            epochs: self.epochs,
            seed: self.seed,
            temperature: self.temperature,
        })
    }
}

#[derive(Args)]
struct TagArgs {
    #[arg(long, required_unless_present = "external")]
    model: Option<PathBuf>,
    /// JSON-lines distributions from an external model instead of --model.
    #[arg(long, conflicts_with = "text")]
    external: Option<PathBuf>,
    #[arg(long)]
    dict: Option<PathBuf>,
    #[arg(long, default_value = "form-lemma-tag")]
    order: ColumnOrder,
    #[arg(long, default_value = "-")]
    input: PathBuf,
    #[arg(long, default_value = "-")]
    output: PathBuf,
    /// Input is plain text to tokenize.
    #[arg(long)]
    text: bool,
    /// One abbreviation per line; replaces the built-in list.
    #[arg(long)]
    abbreviations: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Write per-token rescoring tables as JSON lines.
    #[arg(long, requires = "dict")]
    debug: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "MORPHTAG_MODEL")]
    model: PathBuf,
    /// Name reported by /api/models; defaults to the model file stem.
    #[arg(long)]
    name: Option<String>,
    #[arg(long, env = "MORPHTAG_DICT")]
    dict: Option<PathBuf>,
    #[arg(long, default_value = "form-lemma-tag")]
    order: ColumnOrder,
    #[arg(long)]
    abbreviations: Option<PathBuf>,
    #[arg(long, env = "MORPHTAG_HOST", default_value = "127.0.0.1")]
    host: String,
    #[arg(long, env = "MORPHTAG_PORT", default_value_t = 8001)]
    port: u16,
    #[arg(long, env = "MORPHTAG_WORKERS", default_value_t = 4)]
    workers: usize,
    #[arg(long, env = "MORPHTAG_MAX_DATA_BYTES", default_value_t = morphtag_service::DEFAULT_MAX_DATA_BYTES)]
    max_data_bytes: usize,
}

fn open_input(path: &Path) -> Result<Box<dyn BufRead>> {
    if path == Path::new("-") {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(Box::new(BufReader::new(file)))
}

fn write_output(path: &Path, text: &str) -> Result<()> {
    if path == Path::new("-") {
        let mut out = io::stdout().lock();
        out.write_all(text.as_bytes())?;
        out.flush()?;
    } else {
        std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

fn read_corpus(path: &Path) -> Result<Vec<Sentence>> {
    ConlluReader::new(open_input(path)?)
        .collect::<Result<Vec<_>, _>>()
        .with_context(|| format!("in {}", path.display()))
}

fn load_dict(path: &Path, order: ColumnOrder) -> Result<MorphDict> {
    MorphDict::open(path, order).with_context(|| format!("in dictionary {}", path.display()))
}

fn load_model(path: &Path) -> Result<TaggerModel> {
    TaggerModel::load(path).with_context(|| format!("in model {}", path.display()))
}

fn abbreviations(path: Option<&Path>) -> Result<Abbreviations> {
    match path {
        None => Ok(Abbreviations::default()),
        Some(p) => Abbreviations::load(p).with_context(|| format!("cannot read {}", p.display())),
    }
}

fn tag(args: TagArgs) -> Result<()> {
    let dict = args
        .dict
        .as_deref()
        .map(|p| load_dict(p, args.order))
        .transpose()?;
    let output = if let Some(external) = &args.external {
        let text = std::fs::read(external)
            .with_context(|| format!("cannot read {}", external.display()))?;
        let inventories = match &args.model {
            Some(m) => load_model(m)?.inventories().clone(),
            None => {
                scan_inventories(&text[..]).with_context(|| format!("in {}", external.display()))?
            }
        };
        let sentences = parse_external_distributions(&text[..], &inventories)
            .with_context(|| format!("in {}", external.display()))?;
        annotate_external(&sentences, &inventories, dict.as_ref())?
    } else {
        let model = load_model(args.model.as_deref().expect("clap requires --model"))?;
        let input = if args.text {
            let mut text = String::new();
            open_input(&args.input)?
                .read_to_string(&mut text)
                .context("input is not valid UTF-8")?;
            tokenize(&text, &abbreviations(args.abbreviations.as_deref())?)
        } else {
            read_corpus(&args.input)?
        };
        if let (Some(path), Some(d)) = (&args.debug, &dict) {
            let mut out = BufWriter::new(File::create(path)?);
            for table in candidate_tables(&model, d, &input) {
                serde_json::to_writer(&mut out, &table)?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
        annotate(&model, dict.as_ref(), &input, args.threads)?
    };
    write_output(&args.output, &write_conllu(&output))
}

fn serve(args: ServeArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let name = args.name.clone().unwrap_or_else(|| {
        args.model
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "model".to_owned())
    });
    let bundle = ModelBundle {
        name,
        model,
        dictionary: args
            .dict
            .as_deref()
            .map(|p| load_dict(p, args.order))
            .transpose()?,
        abbreviations: abbreviations(args.abbreviations.as_deref())?,
    };
    let mut config = ServiceConfig::new(vec![bundle]);
    config.max_data_bytes = args.max_data_bytes;
    let service = Service::new(config)?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(args.workers.max(1))
        .enable_all()
        .build()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind((args.host.as_str(), args.port))
            .await
            .with_context(|| format!("cannot bind {}:{}", args.host, args.port))?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        service
            .serve(listener, morphtag_service::shutdown_signal())
            .await?;
        Ok(())
    })
}

fn bench(
    model: &Path,
    dict: &Path,
    order: ColumnOrder,
    input: &Path,
    repeat: usize,
    threads: usize,
) -> Result<()> {
    let model = load_model(model)?;
    let dict = load_dict(dict, order)?;
    let corpus = read_corpus(input)?;
    let words: usize = corpus.iter().map(Sentence::len).sum();
    let repeat = repeat.max(1);
    let mut report = serde_json::Map::new();
    report.insert("words".into(), words.into());
    report.insert("threads".into(), threads.into());
    for (label, d) in [
        ("without_dictionary", None),
        ("with_dictionary", Some(&dict)),
    ] {
        let start = Instant::now();
        for _ in 0..repeat {
            annotate(&model, d, &corpus, threads)?;
        }
        let secs = start.elapsed().as_secs_f64();
        let wps = (words * repeat) as f64 / secs.max(1e-9);
        eprintln!("{label}: {wps:.0} words/s");
        report.insert(label.into(), serde_json::json!({ "words_per_second": wps }));
    }
    println!("{}", serde_json::Value::Object(report));
    Ok(())
}

fn sections<'a>(
    names: &'a [String],
    gold: &'a [Vec<Sentence>],
    system: &'a [Vec<Sentence>],
) -> Vec<Section<'a>> {
    names
        .iter()
        .zip(gold)
        .zip(system)
        .map(|((name, gold), system)| Section { name, gold, system })
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::DictBuild {
            input,
            output,
            order,
        } => {
            let dict = MorphDict::load(&input, order)
                .with_context(|| format!("in dictionary {}", input.display()))?;
            dict.save_binary(&output)
                .with_context(|| format!("cannot write {}", output.display()))?;
            eprintln!(
                "{} entries, {} forms",
                dict.entry_count(),
                dict.form_count()
            );
        }
        Command::DictStats { dict, order, json } => {
            let stats = load_dict(&dict, order)?.stats();
            if json {
                println!("{}", serde_json::to_string_pretty(&stats)?);
            } else {
                println!("forms\t{}", stats.forms);
                println!("entries\t{}", stats.entries);
                println!("lemmas\t{}", stats.lemmas);
                for (i, n) in stats.ambiguity_histogram.iter().enumerate() {
                    let label = if i == 8 {
                        "9+".to_owned()
                    } else {
                        (i + 1).to_string()
                    };
                    println!("analyses={label}\t{n}");
                }
            }
        }
        Command::Train {
            input,
            output,
            training,
        } => {
            let corpus = read_corpus(&input)?;
            let model = TaggerModel::train(&corpus, &training.config()?)?;
            model
                .save(&output)
                .with_context(|| format!("cannot write {}", output.display()))?;
            let inv = model.inventories();
            eprintln!(
                "{} tags, {} rules, {} features",
                inv.tags.len(),
                inv.rules.len(),
                model.feature_count()
            );
        }
        Command::Tag(args) => tag(args)?,
        Command::Eval {
            gold,
            system,
            baseline,
            dict,
            order,
            json,
        } => {
            if gold.len() != system.len() {
                bail!("--gold and --system must be given the same number of times");
            }
            if !baseline.is_empty() && baseline.len() != gold.len() {
                bail!("--baseline must be given once per --gold");
            }
            let dict = dict.as_deref().map(|p| load_dict(p, order)).transpose()?;
            let gold_c = gold
                .iter()
                .map(|p| read_corpus(p))
                .collect::<Result<Vec<_>>>()?;
            let system_c = system
                .iter()
                .map(|p| read_corpus(p))
                .collect::<Result<Vec<_>>>()?;
            let names: Vec<String> = gold.iter().map(|p| p.display().to_string()).collect();
            let mut report =
                EvalReport::build(&sections(&names, &gold_c, &system_c), dict.as_ref())?;
            if !baseline.is_empty() {
                let base_c = baseline
                    .iter()
                    .map(|p| read_corpus(p))
                    .collect::<Result<Vec<_>>>()?;
                let base = EvalReport::build(&sections(&names, &gold_c, &base_c), None)?;
                report.add_baseline("baseline", &base)?;
            }
            if json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.render_table());
            }
        }
        Command::Selftrain {
            gold,
            raw,
            output,
            provenance,
            dict,
            order,
            threads,
            training,
        } => {
            let gold_c = read_corpus(&gold)?;
            let raw_c = read_corpus(&raw)?;
            let dict = dict.as_deref().map(|p| load_dict(p, order)).transpose()?;
            let out = self_train(&gold_c, &raw_c, &training.config()?, dict.as_ref(), threads)?;
            out.stage2
                .save(&output)
                .with_context(|| format!("cannot write {}", output.display()))?;
            let provenance = provenance.unwrap_or_else(|| {
                let mut p = output.clone().into_os_string();
                p.push(".provenance.json");
                p.into()
            });
            write_output(&provenance, &out.provenance.to_json())?;
        }
        Command::Serve(args) => serve(args)?,
        Command::Bench {
            model,
            dict,
            order,
            input,
            repeat,
            threads,
        } => bench(&model, &dict, order, &input, repeat, threads)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
