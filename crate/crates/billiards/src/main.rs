use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use billiards::basin::{render_basins, BasinParams, PixelLabel};
use billiards::bifurcation::{self, Family};
use billiards::config::{
    point_dto, reduced_map_dto, CatalogDto, OrbitRecordDto, Report, RotationDto, RunConfig,
    DEFAULT_BISECTION_TOL, DEFAULT_EPS, DEFAULT_MAX_STEPS, DEFAULT_PERIOD_CAP,
};
use billiards::return_map::{attractor_census, simulation_census, CensusTable};
use billiards::singular::{
    expand_singular, perturb_harness, persistency_check, stabilization_consequence, ExpandParams,
    Persistency,
};
use billiards::skew::reduce;
use billiards::{invariant_ball, iterate, Location, Point, Polygon, RateVector};

const EXIT_INTERNAL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(name = "billiards", about = "Dissipative polygonal outer billiards")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Tolerance for singular-set proximity and cycle detection.
    #[arg(long, global = true, default_value_t = DEFAULT_EPS)]
    eps: f64,
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_PERIOD_CAP)]
    period_cap: usize,
    /// RNG seed for every randomized loop.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Worker threads for pixel/seed/trial loops (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output path for the JSON report (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Iterate seeds to their limit cycles.
    Simulate {
        #[arg(long)]
        polygon: String,
        #[arg(long)]
        lambda: String,
        /// A single seed point "re" or "re,im".
        #[arg(long)]
        seed_point: Option<String>,
        /// Draw this many random seeds from the invariant box instead.
        #[arg(long)]
        random_seeds: Option<usize>,
    },
    /// Attractor catalog: closed-form census (triangle/square) vs simulation.
    Census {
        #[arg(long)]
        polygon: String,
        #[arg(long)]
        lambda: String,
        #[arg(long, default_value_t = 10_000)]
        random_seeds: usize,
    },
    /// Bifurcation thresholds of a polynomial family.
    Bifurcations {
        #[arg(long)]
        family: String,
        #[arg(long)]
        max_n: usize,
    },
    /// Expand the singular set until it stabilizes; list the attractors.
    Stabilize {
        #[arg(long)]
        polygon: String,
        #[arg(long)]
        lambda: String,
        #[arg(long, default_value_t = 200)]
        order_max: usize,
    },
    /// Render basins of attraction to a P6 pixmap plus a JSON legend.
    Basins {
        #[arg(long)]
        polygon: String,
        #[arg(long)]
        lambda: String,
        #[arg(long, default_value_t = 512)]
        resolution: usize,
        /// Window "xmin,ymin,xmax,ymax" (default: the whole invariant box).
        #[arg(long)]
        window: Option<String>,
        /// Path for the P6 image.
        #[arg(long)]
        image: PathBuf,
        /// Optional SVG overlay of the stabilized singular set.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long, default_value_t = 4_000)]
        random_seeds: usize,
    },
    /// Sufficient persistency condition and optional perturbation harness.
    Persistency {
        #[arg(long)]
        polygon: String,
        #[arg(long)]
        lambda: String,
        #[arg(long, default_value_t = 200)]
        order_max: usize,
        #[arg(long, default_value_t = 1_000_000)]
        piece_budget: usize,
        /// Run the perturbation harness with this many trials (square only).
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
    },
}

fn fail(code: u8, msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn parse_polygon(spec: &str) -> Result<Polygon, String> {
    match spec {
        "segment" => return Ok(Polygon::segment(1.0)),
        "triangle" => return Ok(Polygon::equilateral_triangle()),
        "square" => return Ok(Polygon::square()),
        _ => {}
    }
    if let Some(k) = spec.strip_prefix("regular-") {
        let k: usize = k.parse().map_err(|_| format!("bad k-gon spec '{spec}'"))?;
        return Polygon::regular(k, 1.0).map_err(|e| e.to_string());
    }
    let pairs: Vec<[f64; 2]> =
        serde_json::from_str(spec).map_err(|_| format!("unrecognized polygon spec '{spec}'"))?;
    Polygon::new(pairs.iter().map(|p| Point::new(p[0], p[1])).collect()).map_err(|e| e.to_string())
}

fn parse_rates(spec: &str, k: usize) -> Result<RateVector, String> {
    let values: Vec<f64> = if spec.trim_start().starts_with('[') {
        serde_json::from_str(spec).map_err(|_| format!("bad rate list '{spec}'"))?
    } else {
        spec.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| format!("bad rate '{s}'")))
            .collect::<Result<_, _>>()?
    };
    let rates = if values.len() == 1 {
        RateVector::uniform(k, values[0])
    } else if values.len() == k {
        RateVector::new(values)
    } else {
        return Err(format!("expected 1 or {k} rates, got {}", values.len()));
    };
    rates.map_err(|e| e.to_string())
}

fn parse_point(spec: &str) -> Result<Point, String> {
    let parts: Vec<f64> = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| format!("bad coordinate '{s}'")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [re] => Ok(Point::new(re, 0.0)),
        [re, im] => Ok(Point::new(re, im)),
        _ => Err(format!("bad point spec '{spec}'")),
    }
}

fn emit<T: Serialize>(out: &Option<PathBuf>, report: &Report<T>) -> Result<(), String> {
    let text = serde_json::to_string_pretty(report).map_err(|e| e.to_string())?;
    match out {
        Some(path) => {
            let mut f = File::create(path).map_err(|e| e.to_string())?;
            writeln!(f, "{text}").map_err(|e| e.to_string())
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            return fail(EXIT_INTERNAL, "failed to configure worker pool");
        }
    }
    let base_config = |command: &str, polygon: &str, rates: &[f64]| RunConfig {
        command: command.to_string(),
        polygon: polygon.to_string(),
        rates: rates.to_vec(),
        eps: cli.eps,
        bisection_tol: DEFAULT_BISECTION_TOL,
        max_steps: cli.max_steps,
        period_cap: cli.period_cap,
        rng_seed: cli.seed,
        resolution: None,
        order_max: None,
        random_seeds: None,
        workers: cli.workers,
    };

    match &cli.cmd {
        Cmd::Simulate {
            polygon,
            lambda,
            seed_point,
            random_seeds,
        } => {
            let table = match parse_polygon(polygon) {
                Ok(p) => p,
                Err(e) => return fail(EXIT_CONFIG, &e),
            };
            let rates = match parse_rates(lambda, table.k()) {
                Ok(r) => r,
                Err(e) => return fail(EXIT_CONFIG, &e),
            };
            let mut config = base_config("simulate", polygon, rates.rates());
            config.random_seeds = *random_seeds;
            let params = config.iterate_params();
            let seeds: Vec<Point> = match (seed_point, random_seeds) {
                (Some(spec), None) => match parse_point(spec) {
                    Ok(z) => vec![z],
                    Err(e) => return fail(EXIT_CONFIG, &e),
                },
                (None, Some(n)) => {
                    let r = invariant_ball(&table, &rates).expect("validated rates").radius;
                    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
                    let mut seeds = Vec::with_capacity(*n);
                    while seeds.len() < *n {
                        let z = Point::new(rng.gen_range(-r..r), rng.gen_range(-r..r));
                        if matches!(table.locate(z, cli.eps), Location::Cone(_)) {
                            seeds.push(z);
                        }
                    }
                    seeds
                }
                _ => return fail(EXIT_CONFIG, "give exactly one of --seed-point, --random-seeds"),
            };
            let mut records = Vec::new();
            for z in seeds {
                match iterate(z, &table, &rates, &params) {
                    Ok(rec) => records.push(OrbitRecordDto::from(&rec)),
                    Err(e) => return fail(EXIT_CONFIG, &e.to_string()),
                }
            }
            let result = json!({ "records": records });
            match emit(&cli.out, &Report { config, result }) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(EXIT_INTERNAL, &e),
            }
        }

        Cmd::Census {
            polygon,
            lambda,
            random_seeds,
        } => {
            let table = match parse_polygon(polygon) {
                Ok(p) => p,
                Err(e) => return fail(EXIT_CONFIG, &e),
            };
            let rates = match parse_rates(lambda, table.k()) {
                Ok(r) => r,
                Err(e) => return fail(EXIT_CONFIG, &e),
            };
            let mut config = base_config("census", polygon, rates.rates());
            config.random_seeds = Some(*random_seeds);
            let params = config.iterate_params();

            let uniform = rates
                .rates()
                .windows(2)
                .all(|w| (w[0] - w[1]).abs() < 1e-15);
            let which = match polygon.as_str() {
                "triangle" => Some(CensusTable::Triangle),
                "square" => Some(CensusTable::Square),
                _ => None,
            };
            let theorem = match (which, uniform) {
                (Some(w), true) => match attractor_census(w, rates.rate(0), cli.eps) {
                    Ok(cat) => Some(cat),
                    Err(e) => return fail(EXIT_CONFIG, &e.to_string()),
                },
                _ => None,
            };
            let sim = simulation_census(&table, &rates, *random_seeds, cli.seed, &params);
            let agree = theorem.as_ref().map(|t| {
                billiards::return_map::catalogs_agree(t, &sim, 1e-6)
            });
            let reduced = if uniform && table.is_regular(1e-9) {
                reduce(&table, rates.rate(0), cli.eps).ok().map(|m| reduced_map_dto(&m))
            } else {
                None
            };
            let result = json!({
                "theorem": theorem.as_ref().map(CatalogDto::from),
                "simulation": CatalogDto::from(&sim),
                "agree": agree,
            "reduced_map": reduced,
            });
            match emit(&cli.out, &Report { config, result }) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(EXIT_INTERNAL, &e),
            }
        }

        Cmd::Bifurcations { family, max_n } => {
            let (family, start) = match family.as_str() {
                "Q" | "q" => (Family::Q, 1usize),
                "T" | "t" => (Family::T, 0usize),
                other => return fail(EXIT_CONFIG, &format!("unknown family '{other}'")),
            };
            let config = base_config("bifurcations", "-", &[]);
            let rows: Vec<_> = (start..=*max_n)
                .map(|n| {
                    let (root, lo, hi) = bifurcation::threshold_bracket(family, n);
                    json!({ "n": n, "root": root, "bracket_low": lo, "bracket_high": hi })
                })
                .collect();
            let result = json!({ "family": family, "rows": rows });
            match emit(&cli.out, &Report { config, result }) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(EXIT_INTERNAL, &e),
            }
        }

        Cmd::Stabilize {
            polygon,
            lambda,
            order_max,
        } => {
            let table = match parse_polygon(polygon) {
                Ok(p) => p,
                Err(e) => return fail(EXIT_CONFIG, &e),
            };
            let rates = match parse_rates(lambda, table.k()) {
                Ok(r) => r,
                Err(e) => return fail(EXIT_CONFIG, &e),
            };
            let mut config = base_config("stabilize", polygon, rates.rates());
            config.order_max = Some(*order_max);
            let params = config.iterate_params();
            let s = expand_singular(
                &table,
                &rates,
                &ExpandParams {
                    n_max: *order_max,
                    ..Default::default()
                },
            );
            let attractors = if s.stabilized {
                match stabilization_consequence(&s, &table, &rates, &params, cli.seed) {
                    Ok(out) => Some(json!({
                        "catalog": CatalogDto::from(&out.catalog),
                        "samples": out.samples,
                        "non_convergent": out.non_convergent,
                        "singular_hits": out.singular_hits,
                    })),
                    Err(e) => return fail(EXIT_INTERNAL, &e.to_string()),
                }
            } else {
                None
            };
            let result = json!({
                "stabilized": s.stabilized,
                "order": s.order,
                "segment_count": s.segments.len(),
                "radius": s.radius,
                "attractors": attractors,
            });
            let code = if s.stabilized { ExitCode::SUCCESS } else { ExitCode::from(EXIT_BUDGET) };
            match emit(&cli.out, &Report { config, result }) {
                Ok(()) => code,
                Err(e) => fail(EXIT_INTERNAL, &e),
            }
        }

        Cmd::Basins {
            polygon,
            lambda,
            resolution,
            window,
            image,
            svg,
            random_seeds,
        } => {
            let table = match parse_polygon(polygon) {
                Ok(p) => p,
                Err(e) => return fail(EXIT_CONFIG, &e),
            };
            let rates = match parse_rates(lambda, table.k()) {
                Ok(r) => r,
                Err(e) => return fail(EXIT_CONFIG, &e),
            };
            let mut config = base_config("basins", polygon, rates.rates());
            config.resolution = Some(*resolution);
            config.random_seeds = Some(*random_seeds);
            let params = config.iterate_params();
            let win = match window {
                Some(spec) => {
                    let vals: Result<Vec<f64>, _> =
                        spec.split(',').map(|s| s.trim().parse::<f64>()).collect();
                    match vals.as_deref() {
                        Ok([x0, y0, x1, y1]) if x1 > x0 && y1 > y0 => {
                            Some((Point::new(*x0, *y0), Point::new(*x1, *y1)))
                        }
                        _ => return fail(EXIT_CONFIG, "window must be xmin,ymin,xmax,ymax"),
                    }
                }
                None => None,
            };
            let catalog = simulation_census(&table, &rates, *random_seeds, cli.seed, &params);
            let map = render_basins(
                &table,
                &rates,
                &catalog,
                &BasinParams {
                    resolution: *resolution,
                    window: win,
                },
                &params,
            );
            if let Err(e) = map.save_ppm(image) {
                return fail(EXIT_INTERNAL, &e.to_string());
            }
            if let Some(svg_path) = svg {
                let s = expand_singular(&table, &rates, &ExpandParams::default());
                let f = match File::create(svg_path) {
                    Ok(f) => f,
                    Err(e) => return fail(EXIT_INTERNAL, &e.to_string()),
                };
                if let Err(e) = map.write_svg(&table, &s, f) {
                    return fail(EXIT_INTERNAL, &e.to_string());
                }
            }
            // legend: per-attractor pixel counts and colors
            let mut counts = vec![0usize; catalog.orbits.len()];
            let (mut inside, mut singular, mut nonconv) = (0usize, 0usize, 0usize);
            for &l in &map.labels {
                match l {
                    PixelLabel::Basin(i) => counts[i] += 1,
                    PixelLabel::Inside => inside += 1,
                    PixelLabel::Singular => singular += 1,
                    PixelLabel::NonConvergent => nonconv += 1,
                }
            }
            let legend: Vec<_> = catalog
                .orbits
                .iter()
                .enumerate()
                .map(|(i, o)| {
                    json!({
                        "id": i,
                        "period": o.period,
                        "rotation": o.rotation.map(|(num, den)| RotationDto { num, den }),
                        "color": map.pixel_color(PixelLabel::Basin(i)),
                        "pixels": counts[i],
                    })
                })
                .collect();
            let result = json!({
                "image": image.display().to_string(),
                "width": map.width,
                "height": map.height,
                "window": [point_dto(map.min), point_dto(map.max)],
                "legend": legend,
                "inside_pixels": inside,
                "singular_pixels": singular,
                "non_convergent_pixels": nonconv,
            });
            match emit(&cli.out, &Report { config, result }) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(EXIT_INTERNAL, &e),
            }
        }

        Cmd::Persistency {
            polygon,
            lambda,
            order_max,
            piece_budget,
            trials,
            delta,
        } => {
            let table = match parse_polygon(polygon) {
                Ok(p) => p,
                Err(e) => return fail(EXIT_CONFIG, &e),
            };
            let rates = match parse_rates(lambda, table.k()) {
                Ok(r) => r,
                Err(e) => return fail(EXIT_CONFIG, &e),
            };
            if trials.is_some() && polygon != "square" {
                return fail(EXIT_CONFIG, "--trials requires --polygon square");
            }
            let mut config = base_config("persistency", polygon, rates.rates());
            config.order_max = Some(*order_max);
            let params = config.iterate_params();
            let check = persistency_check(&table, &rates, *order_max, cli.eps, *piece_budget);
            let check_json = match &check {
                Persistency::Certificate { n, margin } => {
                    json!({ "status": "certificate", "n": n, "margin": margin })
                }
                Persistency::Inconclusive { n_max } => {
                    json!({ "status": "inconclusive", "n_max": n_max })
                }
                Persistency::PieceBudgetExceeded { n, pieces } => {
                    json!({ "status": "piece_budget_exceeded", "n": n, "pieces": pieces })
                }
            };
            let harness = trials.map(|t| {
                let uniform = rates.rate(0);
                let report = perturb_harness(uniform, *delta, t, 2_000, cli.seed, &params);
                json!({
                    "delta": delta,
                    "trials": t,
                    "baseline_periods": report.baseline_periods,
                    "all_match": report.all_match,
                    "max_hausdorff": report.max_hausdorff,
                    "mismatches": report
                        .trials
                        .iter()
                        .filter(|r| !(r.count_match && r.periods_match))
                        .count(),
                })
            });
            let result = json!({ "check": check_json, "harness": harness });
            let code = match &check {
                Persistency::PieceBudgetExceeded { .. } => ExitCode::from(EXIT_BUDGET),
                _ => ExitCode::SUCCESS,
            };
            match emit(&cli.out, &Report { config, result }) {
                Ok(()) => code,
                Err(e) => fail(EXIT_INTERNAL, &e),
            }
        }
    }
}
