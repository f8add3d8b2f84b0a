//! `wcdt`: generate, validate, label, estimate, compare, fit, emit, and run
//! the end-to-end timing pipeline for binary decision trees.

mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use wcdt_core::codegen::{emit_c, EmitConfig};
use wcdt_core::fitting::{fit, parse_samples_csv};
use wcdt_core::optimizer::LabelingStrategy;
use wcdt_core::oracle::{collect_samples, CostModelConfig};
use wcdt_core::synthesis::{generate_tree, GenConfig, SplitMix64};
use wcdt_core::{DecisionTree, Labeling, ModelTable, SurrogateModel};

#[derive(Parser)]
#[command(
    name = "wcdt",
    about = "Worst-case execution time estimation and branch-layout optimization for decision-tree inference code",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random tree and write it as JSON.
    Gen {
        /// Depth budget; the upper half always splits.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        max_depth: u64,
        /// Number of input features.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        features: u64,
        /// Generation seed; identical seeds reproduce identical files.
        #[arg(long)]
        seed: u64,
        /// Split probability in the lower half of the depth budget.
        #[arg(long, default_value_t = 0.5, value_parser = parse_split_prob)]
        split_prob: f64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Check a tree file against all structural invariants.
    Validate {
        #[arg(long)]
        tree: PathBuf,
    },
    /// Compute a labeling for a tree and write it as JSON.
    Label {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long, value_enum)]
        strategy: StrategyArg,
        /// Model table JSON; defaults to the built-in table.
        #[arg(long)]
        model_table: Option<PathBuf>,
        /// Fixed model as `sigma,delta,gamma`, bypassing depth selection.
        #[arg(long, conflicts_with = "model_table", value_parser = parse_toy_model)]
        toy_model: Option<SurrogateModel>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Estimated worst-case cost of a tree under an existing labeling.
    Estimate {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        labeling: PathBuf,
        #[arg(long)]
        model_table: Option<PathBuf>,
        #[arg(long, conflicts_with = "model_table", value_parser = parse_toy_model)]
        toy_model: Option<SurrogateModel>,
    },
    /// Cost every strategy on one or more trees, normalized to the optimum.
    Compare {
        #[arg(long = "tree", required = true, num_args = 1..)]
        trees: Vec<PathBuf>,
        #[arg(long)]
        model_table: Option<PathBuf>,
        #[arg(long, conflicts_with = "model_table", value_parser = parse_toy_model)]
        toy_model: Option<SurrogateModel>,
        #[arg(long, value_enum, default_value_t = FormatArg::Table)]
        format: FormatArg,
    },
    /// Fit model parameters from a `depth,taken,wcet` sample CSV.
    Fit {
        #[arg(long)]
        samples: PathBuf,
        /// Depth label recorded in the result (default: max sample depth).
        #[arg(long)]
        depth: Option<usize>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Emit C source realizing a tree under a labeling.
    Emit {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        labeling: PathBuf,
        #[arg(long, default_value = "predict")]
        function_name: String,
        #[arg(long, value_enum, default_value_t = FeatureTypeArg::Float64)]
        feature_type: FeatureTypeArg,
        #[arg(long, value_enum, default_value_t = ReturnTypeArg::Float64)]
        return_type: ReturnTypeArg,
        /// Also emit a main() reading features from argv.
        #[arg(long)]
        include_main: bool,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Generate trees per depth, time their paths with the built-in cycle
    /// model, fit one model per depth, and write the resulting table.
    Pipeline {
        /// Comma-separated depth list, e.g. `4,6,8,10,12`.
        #[arg(long, value_parser = parse_depth_list)]
        depths: DepthList,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        trees_per_depth: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..), default_value_t = 8)]
        features: u64,
        #[arg(long)]
        seed: u64,
        /// Cycle-model parameters as JSON; missing fields keep defaults.
        #[arg(long)]
        oracle_config: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Opt,
    Inverted,
    Standard,
    Swap,
}

impl From<StrategyArg> for LabelingStrategy {
    fn from(arg: StrategyArg) -> Self {
        match arg {
            StrategyArg::Opt => LabelingStrategy::SurrogateOpt,
            StrategyArg::Inverted => LabelingStrategy::Inverted,
            StrategyArg::Standard => LabelingStrategy::Standard,
            StrategyArg::Swap => LabelingStrategy::Swap,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum FeatureTypeArg {
    Float32,
    Float64,
    Int32,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReturnTypeArg {
    Int32,
    Float64,
}

/// Parses `sigma,delta,gamma` at flag-parsing time, so malformed values are
/// usage errors.
fn parse_toy_model(raw: &str) -> std::result::Result<SurrogateModel, String> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected 'sigma,delta,gamma', got '{raw}'"));
    }
    let mut values = [0.0f64; 3];
    for (slot, part) in values.iter_mut().zip(&parts) {
        *slot = part.trim().parse().map_err(|_| format!("'{part}' is not a number"))?;
    }
    Ok(SurrogateModel::new(0, values[0], values[1], values[2]))
}

fn parse_split_prob(raw: &str) -> std::result::Result<f64, String> {
    let value: f64 = raw.parse().map_err(|_| format!("'{raw}' is not a number"))?;
    if value.is_finite() && value > 0.0 && value <= 1.0 {
        Ok(value)
    } else {
        Err(format!("must be in (0, 1], got {raw}"))
    }
}

/// Sorted, deduplicated depth list from a comma-separated flag value.
#[derive(Clone, Debug)]
struct DepthList(Vec<usize>);

fn parse_depth_list(raw: &str) -> std::result::Result<DepthList, String> {
    let mut depths = Vec::new();
    for part in raw.split(',') {
        let depth: usize = part.trim().parse().map_err(|_| format!("'{part}' is not a depth"))?;
        if depth < 1 {
            return Err("depths must be at least 1".to_string());
        }
        depths.push(depth);
    }
    depths.sort_unstable();
    depths.dedup();
    Ok(DepthList(depths))
}

/// Where models come from: a depth-indexed table or one fixed model.
enum ModelSource {
    Table(ModelTable),
    Fixed(SurrogateModel),
}

impl ModelSource {
    fn resolve(model_table: Option<&Path>, toy_model: Option<SurrogateModel>) -> Result<Self> {
        if let Some(model) = toy_model {
            return Ok(ModelSource::Fixed(model));
        }
        match model_table {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading model table {}", path.display()))?;
                Ok(ModelSource::Table(ModelTable::from_json(&text)?))
            }
            None => Ok(ModelSource::Table(ModelTable::default())),
        }
    }

    fn select_for_tree(&self, tree: &DecisionTree) -> SurrogateModel {
        match self {
            ModelSource::Table(table) => *table.select_for_tree(tree),
            ModelSource::Fixed(model) => *model,
        }
    }

    /// Strategy dispatch wants a table; a fixed model becomes a one-row one.
    fn as_table(&self) -> Result<ModelTable> {
        match self {
            ModelSource::Table(table) => Ok(table.clone()),
            ModelSource::Fixed(model) => Ok(ModelTable::new(vec![*model])?),
        }
    }
}

fn load_tree(path: &Path) -> Result<DecisionTree> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading tree {}", path.display()))?;
    Ok(DecisionTree::from_json(&text)?)
}

fn load_labeling(path: &Path) -> Result<Labeling> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading labeling {}", path.display()))?;
    Ok(Labeling::from_json(&text)?)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("creating directory {}", parent.display()))?;
        }
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Gen { max_depth, features, seed, split_prob, out } => {
            let config = GenConfig::new(max_depth as usize, features as usize, seed)?
                .with_split_prob(split_prob)?;
            let tree = generate_tree(&config);
            write_file(&out, &tree.to_json())?;
            println!("depth {} leaves {}", tree.depth(), tree.leaves().len());
            Ok(())
        }
        Command::Validate { tree } => {
            let tree = load_tree(&tree)?;
            tree.validate()?;
            println!(
                "valid: depth {} leaves {} inner {}",
                tree.depth(),
                tree.leaves().len(),
                tree.inner_nodes().len()
            );
            Ok(())
        }
        Command::Label { tree, strategy, model_table, toy_model, out } => {
            let tree = load_tree(&tree)?;
            let source = ModelSource::resolve(model_table.as_deref(), toy_model)?;
            let table = source.as_table()?;
            let labeling = LabelingStrategy::from(strategy).label(&tree, &table)?;
            let model = source.select_for_tree(&tree);
            let (cost, wcep) = model.tree_cost(&tree, &labeling)?;
            write_file(&out, &labeling.to_json())?;
            println!("model-depth {} cost {} wcep-leaf {}", model.target_depth, cost, wcep);
            Ok(())
        }
        Command::Estimate { tree, labeling, model_table, toy_model } => {
            let tree = load_tree(&tree)?;
            let labeling = load_labeling(&labeling)?;
            let source = ModelSource::resolve(model_table.as_deref(), toy_model)?;
            let model = source.select_for_tree(&tree);
            let (cost, wcep) = model.tree_cost(&tree, &labeling)?;
            println!("model-depth {} cost {} wcep-leaf {}", model.target_depth, cost, wcep);
            Ok(())
        }
        Command::Compare { trees, model_table, toy_model, format } => {
            let source = ModelSource::resolve(model_table.as_deref(), toy_model)?;
            let mut reports = Vec::new();
            for path in &trees {
                let tree = load_tree(path)?;
                let model = source.select_for_tree(&tree);
                let name = path
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string());
                reports.push(report::compare_tree(&name, &tree, &model)?);
            }
            let output =
                report::CompareOutput { geomean: report::summarize(&reports), trees: reports };
            let rendered = match format {
                FormatArg::Table => report::render_table(&output),
                FormatArg::Csv => report::render_csv(&output),
                FormatArg::Json => report::render_json(&output),
            };
            print!("{rendered}");
            Ok(())
        }
        Command::Fit { samples, depth, out } => {
            let text = fs::read_to_string(&samples)
                .with_context(|| format!("reading samples {}", samples.display()))?;
            let parsed = parse_samples_csv(&text)?;
            let mut result = fit(&parsed)?;
            if let Some(depth) = depth {
                result.model.target_depth = depth;
            }
            println!(
                "n {} sigma {} delta {} gamma {} r2 {} tau {}",
                result.n_samples,
                result.model.sigma,
                result.model.delta,
                result.model.gamma,
                result.r2,
                result.kendall_tau
            );
            if let Some(out) = out {
                write_file(&out, &result.to_json())?;
            }
            Ok(())
        }
        Command::Emit {
            tree,
            labeling,
            function_name,
            feature_type,
            return_type,
            include_main,
            out,
        } => {
            let tree = load_tree(&tree)?;
            let labeling = load_labeling(&labeling)?;
            let config = EmitConfig {
                function_name,
                feature_type: match feature_type {
                    FeatureTypeArg::Float32 => wcdt_core::codegen::FeatureType::Float32,
                    FeatureTypeArg::Float64 => wcdt_core::codegen::FeatureType::Float64,
                    FeatureTypeArg::Int32 => wcdt_core::codegen::FeatureType::Int32,
                },
                return_type: match return_type {
                    ReturnTypeArg::Int32 => wcdt_core::codegen::ReturnType::Int32,
                    ReturnTypeArg::Float64 => wcdt_core::codegen::ReturnType::Float64,
                },
                include_main,
            };
            let source = emit_c(&tree, &labeling, &config)?;
            write_file(&out, &source)?;
            Ok(())
        }
        Command::Pipeline { depths, trees_per_depth, features, seed, oracle_config, out_dir } => {
            run_pipeline(
                &depths,
                trees_per_depth as usize,
                features as usize,
                seed,
                oracle_config.as_deref(),
                &out_dir,
            )
        }
    }
}

fn run_pipeline(
    depths: &DepthList,
    trees_per_depth: usize,
    features: usize,
    seed: u64,
    oracle_config: Option<&Path>,
    out_dir: &Path,
) -> Result<()> {
    let depths = &depths.0;
    let config = match oracle_config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading oracle config {}", path.display()))?;
            CostModelConfig::from_json(&text)?
        }
        None => CostModelConfig::default(),
    };
    let table = ModelTable::default();

    let mut models = Vec::new();
    let mut rows = Vec::new();
    for &depth in depths {
        // One seed stream per depth keeps every depth's trees independent of
        // the rest of the depth list.
        let mut stream = SplitMix64::new(seed ^ (depth as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let trees: Vec<DecisionTree> = (0..trees_per_depth)
            .map(|_| {
                let gen_config = GenConfig::new(depth, features, stream.next_u64())
                    .expect("flags already validated");
                generate_tree(&gen_config)
            })
            .collect();
        let samples = collect_samples(&trees, LabelingStrategy::Standard, &table, &config)?;
        let mut result = fit(&samples)?;
        result.model.target_depth = depth;
        println!(
            "depth {depth}: n {} sigma {} delta {} gamma {} r2 {} tau {}",
            result.n_samples,
            result.model.sigma,
            result.model.delta,
            result.model.gamma,
            result.r2,
            result.kendall_tau
        );
        models.push(result.model);
        rows.push(serde_json::json!({
            "depth": depth,
            "n": result.n_samples,
            "r2": result.r2,
            "kendall_tau": result.kendall_tau,
        }));
    }

    let fitted = ModelTable::new(models)?;
    write_file(&out_dir.join("model_table.json"), &fitted.to_json())?;
    let mut report_text = serde_json::to_string_pretty(&rows).expect("report serialization");
    report_text.push('\n');
    write_file(&out_dir.join("report.json"), &report_text)?;
    Ok(())
}
