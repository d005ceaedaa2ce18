//! Subcommand implementations.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ocrtune::corpus::{self, Document, SynthSpec, Typology};
use ocrtune::eval::{
    self, compare_records, evaluate_scenario, render_reports, EvalRecord, MetricKind, Scenario,
};
use ocrtune::metrics::{ErrorCategory, MetricRecord};
use ocrtune::params::{Operator, ParamAssignment};
use ocrtune::pgm;
use ocrtune::tuner::{self, FitnessEnv};

use crate::config::RunConfig;
use crate::{CliError, Command};

pub fn dispatch(command: Command, config: RunConfig) -> Result<(), CliError> {
    match command {
        Command::Synth { out, count, seed, mix, noise_p, contrast, background } => {
            cmd_synth(&config, out, count, seed, mix, noise_p, contrast, background)
        }
        Command::Split { manifest, seed, out_parameterization, out_evaluation, no_sampling } => {
            cmd_split(&config, manifest, seed, out_parameterization, out_evaluation, no_sampling)
        }
        Command::Tune { manifest, algorithm, mode, seed, out_dir, population, generations } => {
            cmd_tune(&config, manifest, algorithm, mode, seed, out_dir, population, generations)
        }
        Command::Apply { manifest, params, out_dir } => cmd_apply(manifest, params, out_dir),
        Command::Ocr { manifest, out_dir } => cmd_ocr(&config, manifest, out_dir),
        Command::Evaluate { manifest, scenarios, algorithms, params_dir, out } => {
            cmd_evaluate(&config, manifest, scenarios, algorithms, params_dir, out)
        }
        Command::Compare { records, out_dir } => cmd_compare(records, out_dir),
        Command::Errors { records, out } => cmd_errors(records, out),
    }
}

fn require_seed(flag: Option<u64>, config: &RunConfig) -> Result<u64, CliError> {
    flag.or(config.seed).ok_or_else(|| {
        CliError::Validation("a seed is required (pass --seed or set `seed` in the config)".into())
    })
}

fn parse_mix(text: &str) -> Result<BTreeMap<Typology, f64>, CliError> {
    let mut mix = BTreeMap::new();
    for part in text.split(',').filter(|p| !p.trim().is_empty()) {
        let (label, value) = part
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("expected typology=prop, got `{part}`")))?;
        let typology = Typology::from_str(label.trim()).map_err(CliError::from)?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("non-numeric proportion in `{part}`")))?;
        mix.insert(typology, value);
    }
    Ok(mix)
}

#[allow(clippy::too_many_arguments)]
fn cmd_synth(
    config: &RunConfig,
    out: PathBuf,
    count: Option<usize>,
    seed: Option<u64>,
    mix: Option<String>,
    noise_p: Option<f64>,
    contrast: Option<f64>,
    background: Option<u8>,
) -> Result<(), CliError> {
    let seed = require_seed(seed, config)?;
    let mut noise = config.synth.noise();
    if let Some(p) = noise_p {
        noise.salt_pepper_p = p;
    }
    if let Some(c) = contrast {
        noise.contrast_scale = c;
    }
    if let Some(b) = background {
        noise.background = b;
    }
    let mix = match mix {
        Some(text) => parse_mix(&text)?,
        None if !config.synth.mix.is_empty() => {
            let mut parsed = BTreeMap::new();
            for (label, value) in &config.synth.mix {
                parsed.insert(Typology::from_str(label).map_err(CliError::from)?, *value);
            }
            parsed
        }
        None => BTreeMap::from([(Typology::Letter, 1.0)]),
    };
    let spec = SynthSpec {
        count: count.or(config.synth.count).unwrap_or(20),
        mix,
        noise,
        seed,
    };
    let docs = corpus::generate_synthetic(&out, &spec)?;
    println!("wrote {} documents under {}", docs.len(), out.display());
    Ok(())
}

fn cmd_split(
    config: &RunConfig,
    manifest: PathBuf,
    seed: Option<u64>,
    out_parameterization: PathBuf,
    out_evaluation: PathBuf,
    no_sampling: bool,
) -> Result<(), CliError> {
    let seed = require_seed(seed, config)?;
    let docs = corpus::load_manifest(&manifest)?;
    if docs.is_empty() {
        return Err(CliError::Validation(format!("manifest {} is empty", manifest.display())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample = if no_sampling { docs } else { corpus::sample_by_series(&docs, &mut rng) };
    let split = corpus::split_halves(&sample, &mut rng);
    corpus::write_manifest(&out_parameterization, &split.parameterization)?;
    corpus::write_manifest(&out_evaluation, &split.evaluation)?;
    println!(
        "split {} sampled documents into {} parameterization / {} evaluation",
        sample.len(),
        split.parameterization.len(),
        split.evaluation.len()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_tune(
    config: &RunConfig,
    manifest: PathBuf,
    algorithm: String,
    mode: String,
    seed: Option<u64>,
    out_dir: PathBuf,
    population: Option<usize>,
    generations: Option<usize>,
) -> Result<(), CliError> {
    let seed = require_seed(seed, config)?;
    let operator = Operator::from_str(&algorithm)?;
    let docs = corpus::load_manifest(&manifest)?;
    if docs.is_empty() {
        return Err(CliError::Validation(format!("manifest {} is empty", manifest.display())));
    }
    let engine = config.engine.build().map_err(CliError::Validation)?;
    let mut tuner_config = config.tuner.build(seed).map_err(CliError::Validation)?;
    if let Some(v) = population {
        tuner_config.population_size = v;
    }
    if let Some(v) = generations {
        tuner_config.generations = v;
    }
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;

    let scopes: Vec<(String, Vec<Document>)> = match mode.as_str() {
        "global" => vec![("global".to_string(), docs)],
        "typology" => {
            let mut groups: BTreeMap<Typology, Vec<Document>> = BTreeMap::new();
            for doc in docs {
                groups.entry(doc.typology).or_default().push(doc);
            }
            groups.into_iter().map(|(t, docs)| (t.label().to_string(), docs)).collect()
        }
        other => {
            return Err(CliError::Validation(format!(
                "mode must be `global` or `typology`, got `{other}`"
            )))
        }
    };

    for (scope, scope_docs) in scopes {
        let env = FitnessEnv::load(&scope_docs, &engine, tuner_config.aggregation)?;
        let outcome = tuner::evolve(operator, &env, &tuner_config)?;
        let selected = tuner::select_solution(&outcome.front)
            .ok_or_else(|| CliError::Runtime("tuner produced an empty front".into()))?;

        let base = format!("{}.{scope}", operator.id());
        write_text(
            &out_dir.join(format!("{base}.params")),
            &format!("{}\n", selected.assignment),
        )?;
        let mut front_text = String::new();
        for member in &outcome.front {
            front_text.push_str(&format!(
                "{}\tf1={}\tf2={}\n",
                member.assignment, member.f1, member.f2
            ));
        }
        write_text(&out_dir.join(format!("{base}.front.txt")), &front_text)?;
        let mut history = String::from("generation,best_f1,best_matches,feasible_fraction\n");
        for row in &outcome.history {
            history.push_str(&format!(
                "{},{},{},{}\n",
                row.generation, row.best_f1, row.best_matches, row.feasible_fraction
            ));
        }
        write_text(&out_dir.join(format!("{base}.history.csv")), &history)?;
        println!(
            "{base}: evaluated {} genomes over {} documents; selected {}",
            outcome.evaluated.len(),
            env.doc_count(),
            selected.assignment
        );
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn cmd_apply(manifest: PathBuf, params: String, out_dir: PathBuf) -> Result<(), CliError> {
    let assignment = if let Some(file) = params.strip_prefix('@') {
        let text = std::fs::read_to_string(file)
            .map_err(|e| CliError::Validation(format!("cannot read {file}: {e}")))?;
        let line = text
            .lines()
            .find(|l| !l.trim().is_empty())
            .ok_or_else(|| CliError::Validation(format!("{file} holds no assignment")))?;
        ParamAssignment::from_str(line)?
    } else {
        ParamAssignment::from_str(&params)?
    };
    let docs = corpus::load_manifest(&manifest)?;
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut out_docs = Vec::with_capacity(docs.len());
    for doc in &docs {
        let raster = pgm::read_p5(&doc.image_path)?;
        let processed = ocrtune::imaging::apply(&assignment, &raster)?;
        let image_path = out_dir.join(format!("{}.pgm", doc.id));
        pgm::write_p5(&image_path, &processed)?;
        out_docs.push(Document { image_path, ..doc.clone() });
    }
    corpus::write_manifest(&out_dir.join("manifest.tsv"), &out_docs)?;
    println!("applied `{assignment}` to {} images under {}", out_docs.len(), out_dir.display());
    Ok(())
}

fn cmd_ocr(config: &RunConfig, manifest: PathBuf, out_dir: PathBuf) -> Result<(), CliError> {
    let engine = config.engine.build().map_err(CliError::Validation)?;
    let docs = corpus::load_manifest(&manifest)?;
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;
    for doc in &docs {
        let raster = pgm::read_p5(&doc.image_path)?;
        let text = engine.recognize(&raster)?;
        write_text(&out_dir.join(format!("{}.txt", doc.id)), &text)?;
    }
    println!("recognized {} documents into {}", docs.len(), out_dir.display());
    Ok(())
}

fn parse_operators(algorithms: Option<&str>) -> Result<Vec<Operator>, CliError> {
    match algorithms {
        None => Ok(Operator::ALL.to_vec()),
        Some(list) => list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| Operator::from_str(s.trim()).map_err(CliError::from))
            .collect(),
    }
}

fn load_assignment_file(path: &Path) -> Result<ParamAssignment, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let line = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| CliError::Validation(format!("{} holds no assignment", path.display())))?;
    Ok(ParamAssignment::from_str(line)?)
}

fn cmd_evaluate(
    config: &RunConfig,
    manifest: PathBuf,
    scenarios: String,
    algorithms: Option<String>,
    params_dir: Option<PathBuf>,
    out: PathBuf,
) -> Result<(), CliError> {
    let docs = corpus::load_manifest(&manifest)?;
    if docs.is_empty() {
        return Err(CliError::Validation(format!("manifest {} is empty", manifest.display())));
    }
    let engine = config.engine.build().map_err(CliError::Validation)?;
    let operators = parse_operators(algorithms.as_deref())?;
    let typologies: Vec<Typology> = {
        let mut seen: Vec<Typology> = Vec::new();
        for doc in &docs {
            if !seen.contains(&doc.typology) {
                seen.push(doc.typology);
            }
        }
        seen
    };

    let mut records: Vec<EvalRecord> = Vec::new();
    for scenario_name in scenarios.split(',').filter(|s| !s.trim().is_empty()) {
        match scenario_name.trim() {
            "none" => {
                records.extend(evaluate_scenario(&docs, &Scenario::none(), None, &engine)?);
            }
            "default" => {
                for &op in &operators {
                    records.extend(evaluate_scenario(
                        &docs,
                        &Scenario::defaults(),
                        Some(op),
                        &engine,
                    )?);
                }
            }
            "global" => {
                let dir = params_dir.as_ref().ok_or_else(|| {
                    CliError::Validation("scenario `global` needs --params-dir".into())
                })?;
                for &op in &operators {
                    let assignment =
                        load_assignment_file(&dir.join(format!("{}.global.params", op.id())))?;
                    records.extend(evaluate_scenario(
                        &docs,
                        &Scenario::global(assignment),
                        Some(op),
                        &engine,
                    )?);
                }
            }
            "typology" => {
                let dir = params_dir.as_ref().ok_or_else(|| {
                    CliError::Validation("scenario `typology` needs --params-dir".into())
                })?;
                for &op in &operators {
                    let mut map = BTreeMap::new();
                    for &typology in &typologies {
                        let path =
                            dir.join(format!("{}.{}.params", op.id(), typology.label()));
                        map.insert(typology, load_assignment_file(&path)?);
                    }
                    records.extend(evaluate_scenario(
                        &docs,
                        &Scenario::per_typology(map),
                        Some(op),
                        &engine,
                    )?);
                }
            }
            other => {
                return Err(CliError::Validation(format!(
                    "unknown scenario `{other}`; expected none, default, global or typology"
                )))
            }
        }
    }
    records.sort_by(|a, b| {
        (&a.scenario, &a.operator, &a.doc_id).cmp(&(&b.scenario, &b.operator, &b.doc_id))
    });
    write_records(&out, &records)?;
    println!("wrote {} records to {}", records.len(), out.display());
    Ok(())
}

const RECORD_HEADER: [&str; 13] = [
    "scenario",
    "operator",
    "doc_id",
    "typology",
    "cer",
    "character_accuracy",
    "wer",
    "bow_count_matches",
    "index_bow",
    "precision",
    "recall",
    "f1",
    "error_category",
];

fn write_records(path: &Path, records: &[EvalRecord]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    let io_err = |e: csv::Error| CliError::Runtime(format!("{}: {e}", path.display()));
    w.write_record(RECORD_HEADER).map_err(io_err)?;
    for r in records {
        w.write_record([
            r.scenario.as_str(),
            r.operator.as_str(),
            r.doc_id.as_str(),
            r.typology.label(),
            &r.metrics.cer.to_string(),
            &r.metrics.character_accuracy.to_string(),
            &r.metrics.wer.to_string(),
            &r.metrics.bow_count_matches.to_string(),
            &r.metrics.index_bow.to_string(),
            &r.metrics.precision.to_string(),
            &r.metrics.recall.to_string(),
            &r.metrics.f1.to_string(),
            r.category.label(),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn read_records(path: &Path) -> Result<Vec<EvalRecord>, CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        if row.len() != RECORD_HEADER.len() {
            return Err(CliError::Validation(format!(
                "{} row {}: expected {} fields, got {}",
                path.display(),
                i + 2,
                RECORD_HEADER.len(),
                row.len()
            )));
        }
        let field = |idx: usize| row.get(idx).unwrap().to_string();
        let number = |idx: usize| -> Result<f64, CliError> {
            row.get(idx).unwrap().parse().map_err(|_| {
                CliError::Validation(format!(
                    "{} row {}: non-numeric `{}`",
                    path.display(),
                    i + 2,
                    row.get(idx).unwrap()
                ))
            })
        };
        records.push(EvalRecord {
            scenario: field(0),
            operator: field(1),
            doc_id: field(2),
            typology: Typology::from_str(&field(3))?,
            metrics: MetricRecord {
                cer: number(4)?,
                character_accuracy: number(5)?,
                wer: number(6)?,
                bow_count_matches: number(7)? as usize,
                index_bow: number(8)?,
                precision: number(9)?,
                recall: number(10)?,
                f1: number(11)?,
            },
            category: ErrorCategory::from_label(&field(12))?,
        });
    }
    Ok(records)
}

fn cmd_compare(records_path: PathBuf, out_dir: PathBuf) -> Result<(), CliError> {
    let records = read_records(&records_path)?;
    let tables = vec![
        compare_records(&records, MetricKind::CharacterAccuracy)?,
        compare_records(&records, MetricKind::F1)?,
    ];
    let paths = render_reports(&records, &tables, &out_dir)?;
    for table in &tables {
        if let Some((chi2, p)) = table.friedman {
            println!(
                "{}: Friedman chi-square {chi2:.3}, p {p:.3e} over {} columns x {} documents",
                table.metric.label(),
                table.labels.len(),
                table.doc_ids.len()
            );
        }
    }
    println!("reports under {}", paths.means.parent().unwrap().display());
    Ok(())
}

fn cmd_errors(records_path: PathBuf, out: PathBuf) -> Result<(), CliError> {
    let records = read_records(&records_path)?;
    let table = eval::error_frequency_table(&records);
    let mut w = csv::Writer::from_path(&out)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", out.display())))?;
    let io_err = |e: csv::Error| CliError::Runtime(format!("{}: {e}", out.display()));
    let mut header = vec!["column".to_string()];
    header.extend(ErrorCategory::ALL.iter().map(|c| c.label().to_string()));
    w.write_record(&header).map_err(io_err)?;
    for (column, counts) in &table {
        let mut row = vec![column.clone()];
        row.extend(counts.iter().map(u64::to_string));
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush()
        .map_err(|e| CliError::Runtime(format!("{}: {e}", out.display())))?;
    println!("wrote error table to {}", out.display());
    Ok(())
}
