use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use varlp::conditions::{
    ainfty_search, apvar_search, b_function, chain31, chain45, default_gamma, rh_search,
};
use varlp::decomp::{besicovitch_extract, build_cz_levels, cz_decompose, MarkedCube};
use varlp::maximal::{dyadic_maximal_on_cube, hl_maximal, median_maximal, shifted_median_maximal};
use varlp::modular::{check_modular_norm_sandwich, luxemburg_norm, modular};
use varlp::{CellMask, Cube, Grid, GridFunction, DEFAULT_TOL};
use varlp_cli::config::{default_lambdas, ScenarioConfig};
use varlp_cli::io::{array_csv, parse_list, read_array, to_json, write_text};
use varlp_cli::scenario::{run_scenario, SCHEMA_VERSION, TOOL_NAME, TOOL_VERSION};
use varlp_cli::verify::{random_marked, verify_suite, Level};

/// Numerical experiments on variable exponent Lebesgue spaces over grids.
#[derive(Parser)]
#[command(name = "varlp", version)]
struct Cli {
    /// Scenario file (TOML or JSON) for `run` and `verify`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every randomized step; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory receiving the JSON report and CSV tables.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Scale of the verification suites.
    #[arg(long, global = true, value_enum)]
    level: Option<Level>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Luxemburg norm, modular and the modular/norm sandwich of an array.
    Norm {
        #[command(flatten)]
        input: FunctionInput,
        /// Cell indices of the region; the whole grid when omitted.
        #[arg(long)]
        region: Option<String>,
    },
    /// Hardy-Littlewood maximal function, or the dyadic one on a cube.
    Maximal {
        #[arg(long)]
        f: PathBuf,
        /// Root cube for the dyadic maximal function, as `anchor...,side`.
        #[arg(long)]
        dyadic: Option<String>,
    },
    /// Median maximal function, or its shifted version when `--r` is given.
    Median {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        r: Option<f64>,
    },
    /// Calderón-Zygmund stopping cubes and level families.
    Cz {
        #[arg(long)]
        f: PathBuf,
        /// Root cube as `anchor...,side`; the largest origin cube by default.
        #[arg(long)]
        cube: Option<String>,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 3)]
        levels: u32,
    },
    /// Covering extraction on marked cubes from a JSON file, or random ones.
    Cover {
        /// JSON `{"dims": [...], "r": .., "points": [{"cell": .., "cube": {..}}]}`.
        #[arg(long)]
        points: Option<PathBuf>,
        /// Grid for random points, e.g. `16` or `8,8`.
        #[arg(long, default_value = "16")]
        dims: String,
        #[arg(long, default_value_t = 0.5)]
        r: f64,
    },
    /// Lower bound for the 𝒜∞ constant of an exponent field.
    AinftySearch {
        #[arg(long)]
        p: PathBuf,
        #[arg(long, default_value = "0.25,0.5,0.75")]
        lambdas: String,
        #[arg(long, default_value_t = 1000)]
        budget: u64,
    },
    /// Lower bound for the A_{p(·)} constant of an exponent field.
    ApvarSearch {
        #[arg(long)]
        p: PathBuf,
        #[arg(long, default_value_t = 1000)]
        budget: u64,
    },
    /// Reverse Hölder search, plus b(Q) on the largest origin cube for `--c`.
    Rh {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        budget: u64,
    },
    /// Constant chains from reverse Hölder and 𝒜∞ inputs.
    Chains {
        #[arg(long, default_value_t = 2.0)]
        r: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 2.0)]
        p_minus: f64,
        #[arg(long, default_value_t = 2.0)]
        p_plus: f64,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        #[arg(long, default_value_t = 0.5)]
        eta: f64,
        #[arg(long, default_value_t = 1)]
        dim: u32,
        #[arg(long, default_value_t = 1.0)]
        n_overlap: f64,
    },
    /// Runtime verification suites.
    Verify {
        #[arg(long)]
        lambdas: Option<String>,
    },
    /// Runs the scenario given by `--config`.
    Run,
}

#[derive(Args)]
struct FunctionInput {
    #[arg(long)]
    f: PathBuf,
    #[arg(long)]
    p: PathBuf,
}

fn parse_cube(s: &str, grid: &Grid) -> Result<Cube> {
    let parts = s
        .split(',')
        .map(|x| x.trim().parse::<usize>().with_context(|| format!("bad cube entry {x:?}")))
        .collect::<Result<Vec<_>>>()?;
    if parts.len() != grid.dim() + 1 {
        bail!("cube needs {} anchor entries and a side", grid.dim());
    }
    let cube = Cube::new(parts[..grid.dim()].to_vec(), parts[grid.dim()]);
    grid.check_cube(&cube)?;
    Ok(cube)
}

fn origin_cube(grid: &Grid) -> Cube {
    let side = 1usize << (usize::BITS - 1 - grid.max_side().leading_zeros());
    Cube::new(vec![0; grid.dim()], side)
}

struct Output {
    dir: Option<PathBuf>,
}

impl Output {
    /// Prints the envelope and, with `--out`, also writes it as `<name>.json`.
    fn emit(&self, command: &str, result: impl Serialize) -> Result<()> {
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "tool": {"name": TOOL_NAME, "version": TOOL_VERSION},
            "command": command,
            "result": result,
        });
        let text = to_json(&doc)?;
        match &self.dir {
            Some(dir) => write_text(&dir.join(format!("{command}.json")), &text),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn table(&self, name: &str, text: &str) -> Result<()> {
        match &self.dir {
            Some(dir) => write_text(&dir.join(name), text),
            None => Ok(()),
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<Option<ScenarioConfig>> {
    path.map(ScenarioConfig::load).transpose()
}

fn run(cli: Cli) -> Result<ExitCode> {
    let out = Output { dir: cli.out.clone() };
    let seed = cli.seed.unwrap_or(0);
    match cli.command {
        Command::Norm { input, region } => {
            let f = read_array(&input.f)?.function()?;
            let p = read_array(&input.p)?.exponent()?;
            if f.grid() != p.grid() {
                bail!("f and p have different dims");
            }
            let mask = match region {
                Some(s) => {
                    let cells = parse_list(&s)?.into_iter().map(|c| c as usize).collect::<Vec<_>>();
                    CellMask::from_cells(f.grid(), &cells)?
                }
                None => CellMask::full(f.grid()),
            };
            let norm = luxemburg_norm(&f, &p, &mask, DEFAULT_TOL)?;
            let rho = modular(&f, &p, &mask)?;
            let sandwich = (!mask.is_empty())
                .then(|| check_modular_norm_sandwich(&f, &p, &mask, DEFAULT_TOL))
                .transpose()?;
            out.emit("norm", json!({"norm": norm, "modular": rho, "sandwich": sandwich}))?;
        }
        Command::Maximal { f, dyadic } => {
            let f = read_array(&f)?.function()?;
            let grid = f.grid().clone();
            let values = match dyadic {
                Some(s) => {
                    let root = parse_cube(&s, &grid)?;
                    let local = dyadic_maximal_on_cube(&f, &root)?;
                    (0..grid.cell_count()).map(|c| local.get(c).unwrap_or(0.0)).collect()
                }
                None => hl_maximal(&f).into_values(),
            };
            out.table("maximal.csv", &array_csv(&grid, &values))?;
            out.emit("maximal", json!({"dims": grid.extent(), "values": values}))?;
        }
        Command::Median { f, lambda, r } => {
            let f = read_array(&f)?.function()?;
            let m = match r {
                Some(r) => shifted_median_maximal(&f, lambda, r)?,
                None => median_maximal(&f, lambda)?,
            };
            out.table("median.csv", &array_csv(f.grid(), m.values()))?;
            out.emit(
                "median",
                json!({"lambda": lambda, "r": r, "dims": f.grid().extent(), "values": m.values()}),
            )?;
        }
        Command::Cz { f, cube, threshold, lambda, levels } => {
            let v: GridFunction = read_array(&f)?.function()?;
            let root = match cube {
                Some(s) => parse_cube(&s, v.grid())?,
                None => origin_cube(v.grid()),
            };
            let cubes = threshold.map(|t| cz_decompose(&v, &root, t)).transpose()?;
            let family = lambda.map(|l| build_cz_levels(&v, &root, l, 0..=levels)).transpose()?;
            if cubes.is_none() && family.is_none() {
                bail!("cz needs --threshold, --lambda or both");
            }
            out.emit(
                "cz",
                json!({"root": root, "threshold": threshold, "cubes": cubes, "levels": family}),
            )?;
        }
        Command::Cover { points, dims, r } => {
            let (grid, r, marked) = match points {
                Some(path) => {
                    #[derive(serde::Deserialize)]
                    struct PointsFile {
                        dims: Vec<usize>,
                        r: f64,
                        points: Vec<MarkedCube>,
                    }
                    let text = std::fs::read_to_string(&path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    let pf: PointsFile = serde_json::from_str(&text)?;
                    (Grid::new(pf.dims, 1.0)?, pf.r, pf.points)
                }
                None => {
                    let extent = parse_list(&dims)?.into_iter().map(|d| d as usize).collect();
                    let grid = Grid::new(extent, 1.0)?;
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let marked = random_marked(&mut rng, &grid, r);
                    (grid, r, marked)
                }
            };
            let ext = besicovitch_extract(&grid, &marked, r)?;
            let count = ext.subfamily_count();
            out.emit("cover", json!({"extraction": ext, "subfamily_count": count}))?;
        }
        Command::AinftySearch { p, lambdas, budget } => {
            let p = read_array(&p)?.exponent()?;
            let reports = parse_list(&lambdas)?
                .into_iter()
                .map(|l| ainfty_search(&p, l, budget, seed))
                .collect::<varlp::Result<Vec<_>>>()?;
            out.emit("ainfty-search", reports)?;
        }
        Command::ApvarSearch { p, budget } => {
            let p = read_array(&p)?.exponent()?;
            out.emit("apvar-search", apvar_search(&p, budget, seed)?)?;
        }
        Command::Rh { p, r, c, budget } => {
            let p = read_array(&p)?.exponent()?;
            let search = rh_search(&p, r, budget, seed)?;
            let cube = origin_cube(p.grid());
            let b = c.map(|c| b_function(&p, &cube, r, c)).transpose()?;
            out.emit("rh", json!({"search": search, "cube": cube, "b": b}))?;
        }
        Command::Chains { r, c, p_minus, p_plus, gamma, lambda, eta, dim, n_overlap } => {
            let gamma = gamma.unwrap_or_else(|| default_gamma(r));
            let c31 = chain31(r, c, p_minus, p_plus, gamma)?;
            let c45 = chain45(lambda, eta, dim, n_overlap, c, p_minus, p_plus)?;
            out.emit(
                "chains",
                json!({
                    "chain31": c31,
                    "eta_identity": c31.eta_identity(),
                    "chain45": c45,
                    "margin": c45.margin(),
                    "gamma_identity": c45.gamma_identity(),
                }),
            )?;
        }
        Command::Verify { lambdas } => {
            let config = load_config(cli.config.as_deref())?;
            let spec = config.as_ref().and_then(|c| c.verify.clone());
            let level = cli.level.or(spec.as_ref().map(|s| s.level)).unwrap_or(Level::Quick);
            let lambdas = match lambdas {
                Some(s) => parse_list(&s)?,
                None => spec.map(|s| s.lambdas).unwrap_or_else(default_lambdas),
            };
            let seed = cli.seed.or(config.map(|c| c.seed)).unwrap_or(0);
            let summary = verify_suite(level, &lambdas, seed);
            for s in &summary.suites {
                eprintln!("{s}");
            }
            out.emit("verify", &summary)?;
            if !summary.all_passed {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Run => {
            let path = cli.config.as_deref().context("run needs --config")?;
            let mut config = ScenarioConfig::load(path)?;
            if let Some(s) = cli.seed {
                config.seed = s;
            }
            if let Some(level) = cli.level {
                config.verify.get_or_insert_with(|| varlp_cli::config::VerifySpec {
                    level,
                    lambdas: default_lambdas(),
                });
                if let Some(v) = config.verify.as_mut() {
                    v.level = level;
                }
            }
            let dir = cli
                .out
                .clone()
                .or_else(|| config.output.dir.clone())
                .unwrap_or_else(|| PathBuf::from("."));
            let report = run_scenario(&config)?;
            report.write(&dir)?;
            for row in &report.trends {
                eprintln!(
                    "box {:>4}  {:<28} lambda {:<6} best {:.6}",
                    row.box_cells,
                    row.condition,
                    row.lambda.map(|l| l.to_string()).unwrap_or_else(|| "-".into()),
                    row.best_ratio
                );
            }
            eprintln!("wrote {}", dir.join(&config.output.report).display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
