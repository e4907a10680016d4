use std::io::BufRead;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use namelink::config::{DatasetDescriptor, DictionaryConfig, MatchingConfig, OutputConfig, PipelineConfig, ReviewConfig};
use namelink::pipeline::{self, PipelineError};
use namelink::server;
use namelink_core::dictionary::{DictionaryBuilder, DictionaryEdit, Strategy};
use namelink_core::matching::RelaxOrder;
use namelink_core::metrics::build_matrix;
use namelink_core::normalize::RawName;
use namelink_core::parse::{NameOrder, NameParser};
use namelink_core::phonetic::CodeTable;

#[derive(Parser)]
#[command(name = "namelink", version, about = "Link Arabic personal names with their Latin transliterations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    FirstNameFirst,
    LastNameFirst,
}

impl From<Order> for NameOrder {
    fn from(o: Order) -> Self {
        match o {
            Order::FirstNameFirst => NameOrder::FirstNameFirst,
            Order::LastNameFirst => NameOrder::LastNameFirst,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Relax {
    PaperOrder,
    LastNameFirst,
}

#[derive(Subcommand)]
enum Command {
    /// Print normalized text and parsed tokens, one name per line.
    Normalize {
        names: Vec<String>,
        /// Read names from this file, one per line, instead of arguments.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "first-name-first")]
        order: Order,
    },
    /// Build a dictionary from `arabic,latin` name pairs.
    BuildDict {
        #[arg(long)]
        pairs: PathBuf,
        /// source, soundex, combined or verified
        #[arg(long, default_value = "combined")]
        strategy: String,
        /// Expert edit list (`op<TAB>arabic<TAB>latin`), used by `verified`.
        #[arg(long)]
        edits: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Match source records against destination records.
    Match {
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        dst: PathBuf,
        #[arg(long)]
        dict: PathBuf,
        /// Blocking field present in both files; repeatable.
        #[arg(long)]
        block: Vec<String>,
        #[arg(long, default_value = "id")]
        id_column: String,
        #[arg(long, default_value = "name")]
        name_column: String,
        #[arg(long, value_enum, default_value = "first-name-first")]
        src_order: Order,
        #[arg(long, default_value_t = 0.85)]
        match_threshold: f64,
        #[arg(long, default_value_t = 0.4)]
        floor: f64,
        #[arg(long, default_value_t = 2)]
        max_edit_distance: usize,
        #[arg(long, value_enum, default_value = "paper-order")]
        relax_order: Relax,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score machine results against expert labels.
    Evaluate {
        #[arg(long)]
        machine: PathBuf,
        /// `source_id,dest_ids` CSV, ids separated by `;`.
        #[arg(long)]
        expert: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Clerical review service.
    Review {
        #[command(subcommand)]
        command: ReviewCommand,
    },
    /// Run the whole pipeline described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Subcommand)]
enum ReviewCommand {
    /// Serve the review API over the outputs of `run`.
    Serve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        port: Option<u16>,
    },
}

/// Exit status 1 for configuration problems, 2 for bad data.
enum Failure {
    Config(anyhow::Error),
    Data(anyhow::Error),
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        if e.is_config() {
            Failure::Config(e.into())
        } else {
            Failure::Data(e.into())
        }
    }
}

fn data<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Data(e.into())
}

fn config<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Config(e.into())
}

fn normalize(names: Vec<String>, input: Option<PathBuf>, order: Order) -> Result<(), Failure> {
    let names = match input {
        Some(p) => {
            let f = std::fs::File::open(&p).with_context(|| format!("cannot open {}", p.display())).map_err(data)?;
            std::io::BufReader::new(f).lines().collect::<Result<Vec<_>, _>>().map_err(data)?
        }
        None => names,
    };
    let parser = NameParser::default();
    let mut failed = false;
    for name in names.iter().filter(|n| !n.trim().is_empty()) {
        match parser.parse(&RawName::new(name.as_str()), order.into()) {
            Ok(p) => println!("{}\t{}\t{}", name, p.original.text(), p.canonicals().join("|")),
            Err(e) => {
                eprintln!("{name}: {e}");
                failed = true;
            }
        }
    }
    if failed {
        return Err(data(anyhow::anyhow!("some names could not be parsed")));
    }
    Ok(())
}

fn build_dict(pairs: &Path, strategy: &str, edits: Option<PathBuf>, out: &Path) -> Result<(), Failure> {
    let strategy: Strategy = strategy.parse().map_err(config)?;
    let pairs = namelink::ingest::read_pairs(pairs).map_err(data)?;
    let edits = match edits {
        Some(p) => DictionaryEdit::parse_list(&namelink::ingest::read_utf8(&p).map_err(data)?).map_err(data)?,
        None => Vec::new(),
    };
    let parser = NameParser::default();
    let (report, warnings) =
        DictionaryBuilder::new(&parser, Arc::new(CodeTable::default())).build_with(strategy, &pairs, &edits);
    for w in warnings {
        eprintln!("warning: {w:?}");
    }
    report.dictionary.save(out).map_err(data)?;
    eprintln!(
        "{} entries from {} pairs ({} skipped)",
        report.dictionary.len(),
        report.pairs_used,
        report.pairs_skipped
    );
    Ok(())
}

fn evaluate(machine: &Path, expert: &Path, report: Option<PathBuf>) -> Result<(), Failure> {
    let decisions = pipeline::read_results(machine)?;
    let labels = pipeline::read_labels(expert)?;
    let matrix = build_matrix(&decisions, &labels).map_err(data)?;
    let r = matrix.report().map_err(data)?;
    if let Some(path) = report {
        pipeline::write_file(&path, &serde_json::to_vec_pretty(&r).map_err(data)?)?;
    }
    print!("{}", r.percent_table());
    Ok(())
}

fn load_config(path: &Path) -> Result<PipelineConfig, Failure> {
    PipelineConfig::load(path).map_err(config)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Normalize { names, input, order } => normalize(names, input, order),
        Command::BuildDict {
            pairs,
            strategy,
            edits,
            out,
        } => build_dict(&pairs, &strategy, edits, &out),
        Command::Match {
            src,
            dst,
            dict,
            block,
            id_column,
            name_column,
            src_order,
            match_threshold,
            floor,
            max_edit_distance,
            relax_order,
            out,
        } => {
            let descriptor = |path: PathBuf, order: NameOrder| DatasetDescriptor {
                path,
                id_column: id_column.clone(),
                name_column: name_column.clone(),
                block_columns: block.clone(),
                script: None,
                name_order: order,
                delimiter: None,
            };
            let cfg = PipelineConfig {
                source: descriptor(src, src_order.into()),
                destination: descriptor(dst, NameOrder::FirstNameFirst),
                dictionary: DictionaryConfig {
                    path: Some(dict),
                    training: None,
                    strategy: "combined".into(),
                    edits: None,
                },
                matching: MatchingConfig {
                    block: block.clone(),
                    match_threshold,
                    floor,
                    max_edit_distance,
                    relax_order: match relax_order {
                        Relax::PaperOrder => RelaxOrder::PaperOrder,
                        Relax::LastNameFirst => RelaxOrder::LastNameFirst,
                    },
                },
                output: OutputConfig { dir: PathBuf::from(".") },
                review: ReviewConfig::default(),
            };
            let parser = NameParser::default();
            let (dict, _) = pipeline::load_dictionary(&cfg, &parser, Arc::new(CodeTable::default()))?;
            let matched = pipeline::match_datasets(&cfg, &parser, &dict)?;
            for w in &matched.warnings {
                eprintln!("warning: {w}");
            }
            pipeline::write_file(&out, pipeline::results_jsonl(&matched.decisions).as_bytes())?;
            Ok(())
        }
        Command::Evaluate {
            machine,
            expert,
            report,
        } => evaluate(&machine, &expert, report),
        Command::Review {
            command: ReviewCommand::Serve { config: path, port },
        } => {
            let cfg = load_config(&path)?;
            let state = pipeline::open_review(&cfg)?;
            let runtime = tokio::runtime::Runtime::new().map_err(data)?;
            runtime
                .block_on(server::serve(state, port.unwrap_or(cfg.review.port)))
                .map_err(config)
        }
        Command::Run { config: path } => {
            let cfg = load_config(&path)?;
            let out = pipeline::run_pipeline(&cfg)?;
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!(
                "{} decisions, {} queued for review; wrote {}",
                out.decisions.len(),
                out.queue_items.len(),
                cfg.output.dir.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
