//! `mqmkit`: analyses over an annotation store, campaign assignment and the
//! annotation server.

mod report;

use std::collections::{BTreeMap, BTreeSet};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use mqmkit::agreement::{agreement_report, agreement_tsv, LabelBasis};
use mqmkit::campaign::{assign_tasks, validate_assignment, AssignOptions, Campaign};
use mqmkit::consistency::{itc_report, itc_report_tsv, ItcOptions, PairScope};
use mqmkit::ingest::{load_project, project_from_tsv, ASSIGNMENTS_FILE, MQM_FILE, PROJECT_FILE, RR_FILE, SXS_MQM_FILE};
use mqmkit::model::{validate_project, Project, SegmentRef, Setting};
use mqmkit::profiling::{
    annotator_outliers, conversion_matrix, conversion_tsv, distribution_tsv, error_distribution, outliers_tsv,
    DistributionOptions, MatchOptions,
};
use mqmkit::ranking::{
    pra_between, ranking_report, ranking_report_tsv, select_pairs, selection_tsv, RankOptions, SelectOptions,
};
use mqmkit::scoring::{build_score_table, exclude_annotators, score_table_tsv, ScoreOptions};
use mqmkit::Error;

use report::{digest_inputs, render, sha256_hex, write_report, Format, InputDigest, Stamp, Table};

#[derive(Parser)]
#[command(
    name = "mqmkit",
    version,
    about = "Human evaluation workbench for machine translation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every model invariant of the store.
    Validate(Common),
    /// Segment scores per annotator, raw and z-normalized.
    Score(Common),
    /// Krippendorff's alpha and tie rates per setting, pair group and length bucket.
    Agreement {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        buckets: usize,
    },
    /// Inter-translation consistency per criterion.
    Itc {
        #[command(flatten)]
        common: Common,
        /// Treat errors touching a changed token as potential common errors.
        #[arg(long)]
        loose_overlap: bool,
        /// Compare categories down to the subcategory.
        #[arg(long)]
        subcategory_strict: bool,
    },
    /// Pairwise ranking agreement between settings.
    Pra(Common),
    /// Permutation-test rankings of the designated pairs.
    Rank(Common),
    /// Error counts per category and severity.
    Distribution {
        #[command(flatten)]
        common: Common,
        /// Count single-sided errors once, however many pairs a system is in.
        #[arg(long)]
        no_duplicate_rule: bool,
        #[arg(long)]
        subcategories: bool,
    },
    /// Category changes between matched single-sided and side-by-side errors.
    Conversion {
        #[command(flatten)]
        common: Common,
        /// Match errors only on identical offsets.
        #[arg(long)]
        exact: bool,
    },
    /// Annotators whose error counts lie far from the pool.
    Outliers(Common),
    /// Choose five system pairs from automatic metric scores.
    SelectPairs {
        #[command(flatten)]
        common: Common,
        /// TSV with columns system, doc_id, seg_id, score.
        #[arg(long)]
        metric_scores: PathBuf,
        #[arg(long)]
        lower_is_better: bool,
    },
    /// Assign documents to annotators and write the campaign queue.
    Assign {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', required = true)]
        annotators: Vec<String>,
        /// Annotators per document.
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Serve a document's settings back to back.
        #[arg(long)]
        interleave: bool,
        /// Replace an existing assignment.
        #[arg(long)]
        force: bool,
    },
    /// Run the annotation API over a campaign store.
    Serve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
    },
    /// Merge journaled campaign results into the store's TSVs.
    Export(Common),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Store directory, or a directory holding bare mqm.tsv, sxs_mqm.tsv and rr.tsv.
    #[arg(long)]
    project: PathBuf,
    /// Language pair of a bare-TSV directory (e.g. zh-en).
    #[arg(long)]
    language_pair: Option<String>,
    #[arg(long, value_parser = parse_setting)]
    setting: Option<Setting>,
    /// Use z-normalized scores.
    #[arg(long, overrides_with = "no_z")]
    z: bool,
    /// Use raw scores.
    #[arg(long, overrides_with = "z")]
    no_z: bool,
    #[arg(long, value_delimiter = ',')]
    exclude_annotators: Vec<String>,
    /// Drop annotators flagged as error-count outliers.
    #[arg(long)]
    auto_exclude_outliers: bool,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for report files; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    format: Format,
}

impl Common {
    fn use_z(&self, default: bool) -> bool {
        if self.z {
            true
        } else if self.no_z {
            false
        } else {
            default
        }
    }

    fn wants(&self, setting: Setting) -> bool {
        self.setting.is_none_or(|s| s == setting)
    }
}

fn parse_setting(s: &str) -> Result<Setting, String> {
    Setting::parse(s).ok_or_else(|| format!("unknown setting {s:?} (expected MQM, SXS_MQM or SXS_RR)"))
}

#[derive(Debug)]
struct Failure {
    code: String,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: e.code().to_string(),
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
    .into()
}

type Outcome = Result<ExitCode, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error[{}]: {}", f.code, f.message);
            ExitCode::from(1)
        }
    }
}

/// A loaded project with the reproducibility facts gathered before any
/// analysis runs.
struct Prepared {
    project: Project,
    excluded: Vec<String>,
    inputs: Vec<InputDigest>,
}

fn load(common: &Common) -> Result<Project, Failure> {
    let root = &common.project;
    if root.join(PROJECT_FILE).exists() {
        return Ok(load_project(root)?);
    }
    let read = |name: &str| -> Result<Option<Vec<u8>>, Failure> {
        let path = root.join(name);
        match std::fs::read(&path) {
            Ok(b) => Ok(Some(b)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(io_failure(&path, e)),
        }
    };
    let (mqm, sxs, rr) = (read(MQM_FILE)?, read(SXS_MQM_FILE)?, read(RR_FILE)?);
    if mqm.is_none() && sxs.is_none() {
        return Err(Error::StoreCorrupt {
            detail: format!("{} holds neither {PROJECT_FILE} nor {MQM_FILE}", root.display()),
        }
        .into());
    }
    let language_pair = common.language_pair.as_deref().unwrap_or("und");
    Ok(project_from_tsv(
        language_pair,
        mqm.as_deref(),
        sxs.as_deref(),
        rr.as_deref(),
    )?)
}

fn prepare(common: &Common, extra_inputs: &[PathBuf], apply_exclusions: bool) -> Result<Prepared, Failure> {
    let inputs = digest_inputs(&common.project, extra_inputs).map_err(|e| io_failure(&common.project, e))?;
    let mut project = load(common)?;
    let mut excluded: BTreeSet<String> = common.exclude_annotators.iter().cloned().collect();
    if common.auto_exclude_outliers {
        for setting in [Setting::Mqm, Setting::SxsMqm] {
            if !project.has_setting(setting) {
                continue;
            }
            match annotator_outliers::<f64>(&project, setting) {
                Ok(stats) => excluded.extend(stats.into_iter().filter(|s| s.flagged).map(|s| s.annotator)),
                Err(Error::TooFew { .. }) => {}
                Err(e) => return Err(e.into()),
            }
        }
    }
    let excluded: Vec<String> = excluded.into_iter().collect();
    if apply_exclusions && !excluded.is_empty() {
        project = exclude_annotators(&project, &excluded);
    }
    Ok(Prepared {
        project,
        excluded,
        inputs,
    })
}

fn config_hash(command: &str, common: &Common, options: &Value) -> String {
    let config = json!({
        "command": command,
        "language_pair": common.language_pair,
        "setting": common.setting.map(Setting::name),
        "z": common.z,
        "no_z": common.no_z,
        "exclude_annotators": common.exclude_annotators.iter().collect::<BTreeSet<_>>(),
        "auto_exclude_outliers": common.auto_exclude_outliers,
        "trials": common.trials,
        "seed": common.seed,
        "format": common.format,
        "options": options,
    });
    sha256_hex(config.to_string().as_bytes())
}

fn emit(command: &str, common: &Common, options: Value, prepared: &Prepared, table: &Table) -> Result<(), Failure> {
    let stamp = Stamp {
        tool: format!("mqmkit {}", env!("CARGO_PKG_VERSION")),
        command: command.to_string(),
        config_hash: config_hash(command, common, &options),
        seed: common.seed,
        trials: common.trials,
        excluded: prepared.excluded.clone(),
        inputs: prepared.inputs.clone(),
    };
    let content = render(&stamp, table, common.format);
    write_report(common.out.as_deref(), command, common.format, &content)
        .map_err(|e| io_failure(common.out.as_deref().unwrap_or(Path::new("<stdout>")), e))
}

fn present(common: &Common, project: &Project, candidates: &[Setting]) -> Vec<Setting> {
    candidates
        .iter()
        .copied()
        .filter(|&s| common.wants(s) && project.has_setting(s))
        .collect()
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Validate(c) => validate(&c),
        Command::Score(c) => score(&c),
        Command::Agreement { common, buckets } => agreement(&common, buckets),
        Command::Itc {
            common,
            loose_overlap,
            subcategory_strict,
        } => itc(
            &common,
            ItcOptions {
                strict_overlap: !loose_overlap,
                subcategory_strict,
            },
        ),
        Command::Pra(c) => pra(&c),
        Command::Rank(c) => rank(&c),
        Command::Distribution {
            common,
            no_duplicate_rule,
            subcategories,
        } => distribution(
            &common,
            DistributionOptions {
                duplicate_rule: !no_duplicate_rule,
                subcategories,
            },
        ),
        Command::Conversion { common, exact } => conversion(&common, exact),
        Command::Outliers(c) => outliers(&c),
        Command::SelectPairs {
            common,
            metric_scores,
            lower_is_better,
        } => select(&common, &metric_scores, lower_is_better),
        Command::Assign {
            common,
            annotators,
            k,
            interleave,
            force,
        } => assign(&common, &annotators, k, interleave, force),
        Command::Serve { common, port, host } => serve(&common, SocketAddr::new(host, port)),
        Command::Export(c) => export(&c),
    }
}

fn validate(c: &Common) -> Outcome {
    let p = prepare(c, &[], false)?;
    let violations = validate_project(&p.project);
    let mut table = Table::new(&["code", "location"]);
    for v in &violations {
        table.push(vec![v.code.clone(), v.location.clone()]);
    }
    emit("validate", c, json!({}), &p, &table)?;
    if violations.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("{} violation(s)", violations.len());
        Ok(ExitCode::from(1))
    }
}

fn score(c: &Common) -> Outcome {
    let p = prepare(c, &[], true)?;
    let options = ScoreOptions {
        use_z: c.use_z(true),
        ..Default::default()
    };
    let mut table = Table::new(&["setting", "system", "doc_id", "seg_id", "rater", "raw", "z"]);
    for setting in present(c, &p.project, &Setting::ALL) {
        let scores = build_score_table::<f64>(&p.project, setting, options)?;
        table.extend_tsv(&score_table_tsv(&scores));
    }
    emit("score", c, json!({ "use_z": options.use_z }), &p, &table)?;
    Ok(ExitCode::SUCCESS)
}

fn agreement(c: &Common, buckets: usize) -> Outcome {
    let p = prepare(c, &[], true)?;
    let rows: Vec<_> = agreement_report::<f64>(&p.project, buckets)?
        .into_iter()
        .filter(|r| c.wants(r.setting))
        .collect();
    let table = Table::from_tsv(&agreement_tsv(&rows));
    emit("agreement", c, json!({ "buckets": buckets }), &p, &table)?;
    Ok(ExitCode::SUCCESS)
}

fn itc(c: &Common, options: ItcOptions) -> Outcome {
    let p = prepare(c, &[], true)?;
    let mut rows = Vec::new();
    for scope in [PairScope::Designated, PairScope::NonDesignated] {
        for setting in present(c, &p.project, &[Setting::Mqm, Setting::SxsMqm]) {
            rows.extend(itc_report::<f64>(&p.project, setting, scope, options));
        }
    }
    let table = Table::from_tsv(&itc_report_tsv(&p.project.language_pair, &rows));
    let opts = json!({
        "strict_overlap": options.strict_overlap,
        "subcategory_strict": options.subcategory_strict,
    });
    emit("itc", c, opts, &p, &table)?;
    Ok(ExitCode::SUCCESS)
}

fn pra(c: &Common) -> Outcome {
    let p = prepare(c, &[], true)?;
    let basis = if c.use_z(false) { LabelBasis::Z } else { LabelBasis::Raw };
    let mut table = Table::new(&[
        "alpha",
        "beta",
        "basis",
        "concordant",
        "discordant",
        "tie_alpha",
        "tie_beta",
        "tie_both",
        "pra",
    ]);
    let settings = present(
        &Common {
            setting: None,
            ..c.clone()
        },
        &p.project,
        &Setting::ALL,
    );
    for (i, &alpha) in settings.iter().enumerate() {
        for &beta in &settings[i + 1..] {
            if !(c.wants(alpha) || c.wants(beta)) {
                continue;
            }
            let (counts, value) = pra_between::<f64>(&p.project, alpha, beta, basis)?;
            table.push(vec![
                alpha.name().into(),
                beta.name().into(),
                format!("{basis:?}").to_lowercase(),
                counts.concordant.to_string(),
                counts.discordant.to_string(),
                counts.tie_alpha.to_string(),
                counts.tie_beta.to_string(),
                counts.tie_both.to_string(),
                format!("{value:.4}"),
            ]);
        }
    }
    emit("pra", c, json!({ "basis": basis }), &p, &table)?;
    Ok(ExitCode::SUCCESS)
}

fn rank(c: &Common) -> Outcome {
    let p = prepare(c, &[], true)?;
    let options = RankOptions {
        trials: c.trials,
        seed: c.seed,
        use_z: c.use_z(true),
    };
    let rows: Vec<_> = ranking_report::<f64>(&p.project, options)?
        .into_iter()
        .filter(|r| c.wants(r.result.setting))
        .collect();
    let table = Table::from_tsv(&ranking_report_tsv(&rows));
    emit("rank", c, json!({ "use_z": options.use_z }), &p, &table)?;
    Ok(ExitCode::SUCCESS)
}

fn distribution(c: &Common, options: DistributionOptions) -> Outcome {
    let p = prepare(c, &[], true)?;
    let dists: Vec<_> = present(c, &p.project, &[Setting::Mqm, Setting::SxsMqm])
        .into_iter()
        .map(|s| error_distribution::<f64>(&p.project, s, options))
        .collect();
    let table = Table::from_tsv(&distribution_tsv(&dists));
    let opts = json!({
        "duplicate_rule": options.duplicate_rule,
        "subcategories": options.subcategories,
    });
    emit("distribution", c, opts, &p, &table)?;
    Ok(ExitCode::SUCCESS)
}

fn conversion(c: &Common, exact: bool) -> Outcome {
    let p = prepare(c, &[], true)?;
    let matrix = conversion_matrix(&p.project, MatchOptions { exact })?;
    let table = Table::from_tsv(&conversion_tsv(&matrix));
    emit("conversion", c, json!({ "exact": exact }), &p, &table)?;
    Ok(ExitCode::SUCCESS)
}

fn outliers(c: &Common) -> Outcome {
    let p = prepare(c, &[], true)?;
    let mut table = Table::new(&["annotator", "setting", "error_count", "z", "flagged"]);
    for setting in present(c, &p.project, &[Setting::Mqm, Setting::SxsMqm]) {
        table.extend_tsv(&outliers_tsv(&annotator_outliers::<f64>(&p.project, setting)?));
    }
    emit("outliers", c, json!({}), &p, &table)?;
    Ok(ExitCode::SUCCESS)
}

const METRIC_COLUMNS: [&str; 4] = ["system", "doc_id", "seg_id", "score"];

fn read_metric_scores(path: &Path) -> Result<Vec<(String, SegmentRef, f64)>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header.split('\t').collect::<Vec<_>>() != METRIC_COLUMNS {
        return Err(Error::BadHeader {
            expected: METRIC_COLUMNS.join("\t"),
            found: header.to_string(),
        }
        .into());
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = i + 2;
        let fields: Vec<&str> = line.split('\t').collect();
        let [system, doc, seg, score] = fields[..] else {
            return Err(Error::MalformedRow {
                row,
                detail: format!("expected 4 fields, found {}", fields.len()),
            }
            .into());
        };
        let score: f64 = score
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| Error::BadValue {
                row,
                value: score.to_string(),
            })?;
        out.push((system.to_string(), SegmentRef::new(doc, seg), score));
    }
    Ok(out)
}

fn select(c: &Common, metric_scores: &Path, lower_is_better: bool) -> Outcome {
    let p = prepare(c, &[metric_scores.to_path_buf()], true)?;
    let scores = read_metric_scores(metric_scores)?;
    let mut outputs: BTreeMap<String, BTreeMap<SegmentRef, String>> = BTreeMap::new();
    for u in &p.project.units {
        outputs
            .entry(u.system.clone())
            .or_default()
            .insert(u.segment.clone(), u.target.clone());
    }
    let options = SelectOptions {
        trials: c.trials,
        seed: c.seed,
        higher_is_better: !lower_is_better,
    };
    let selection = select_pairs::<f64>(&scores, &outputs, options)?;
    let table = Table::from_tsv(&selection_tsv(&selection));
    emit(
        "select-pairs",
        c,
        json!({ "higher_is_better": options.higher_is_better }),
        &p,
        &table,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn assign(c: &Common, annotators: &[String], k: usize, interleave: bool, force: bool) -> Outcome {
    // The store is rewritten, so exclusions narrow the pool instead of
    // removing data.
    let p = prepare(c, &[], false)?;
    let root = &c.project;
    if root.join(ASSIGNMENTS_FILE).exists() && !force {
        return Err(Failure {
            code: "E_ALREADY_ASSIGNED".into(),
            message: format!(
                "{} already holds {ASSIGNMENTS_FILE}; pass --force to replace it",
                root.display()
            ),
        });
    }
    let pool: Vec<String> = annotators.iter().filter(|a| !p.excluded.contains(a)).cloned().collect();
    let options = AssignOptions {
        k,
        seed: c.seed,
        interleave,
    };
    let assignment = assign_tasks(&p.project, &pool, options)?;
    if let Some(v) = validate_assignment(&p.project, &assignment).first() {
        return Err(Failure {
            code: v.code.clone(),
            message: format!("assignment violates {v}"),
        });
    }
    Campaign::create(root, &p.project, &assignment)?;
    let loads = assignment.loads(&p.project);
    let mut docs: BTreeMap<&str, usize> = BTreeMap::new();
    for a in assignment.doc_annotators.values().flatten() {
        *docs.entry(a).or_default() += 1;
    }
    let mut tasks: BTreeMap<&str, usize> = BTreeMap::new();
    for t in &assignment.tasks {
        *tasks.entry(&t.annotator).or_default() += 1;
    }
    let mut table = Table::new(&["annotator", "documents", "segments", "tasks"]);
    for (a, load) in &loads {
        table.push(vec![
            a.clone(),
            docs.get(a.as_str()).copied().unwrap_or(0).to_string(),
            load.to_string(),
            tasks.get(a.as_str()).copied().unwrap_or(0).to_string(),
        ]);
    }
    let opts = json!({ "annotators": annotators, "k": k, "interleave": interleave });
    emit("assign", c, opts, &p, &table)?;
    Ok(ExitCode::SUCCESS)
}

fn export(c: &Common) -> Outcome {
    let p = prepare(c, &[], false)?;
    let campaign = Campaign::open(&c.project)?;
    let project = campaign.export()?;
    let mut table = Table::new(&["setting", "records"]);
    for setting in Setting::ALL {
        let n = match setting {
            Setting::SxsRr => project.rr.len(),
            s => project.annotations(s).count(),
        };
        table.push(vec![setting.name().into(), n.to_string()]);
    }
    emit("export", c, json!({}), &p, &table)?;
    Ok(ExitCode::SUCCESS)
}

fn serve(c: &Common, addr: SocketAddr) -> Outcome {
    let campaign = Arc::new(Campaign::open(&c.project)?);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| io_failure(&c.project, e))?;
    eprintln!("serving {} on http://{addr}", c.project.display());
    runtime
        .block_on(mqmkit_server::serve(campaign, addr))
        .map_err(|e| Failure {
            code: "E_IO".into(),
            message: format!("server on {addr}: {e}"),
        })?;
    Ok(ExitCode::SUCCESS)
}
