use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::Args;
use serde_json::json;

use ropuf_tdma::collision::{
    collision_probability_exact, monte_carlo_collision, nodes_supported as max_nodes,
    CollisionQuery,
};
use ropuf_tdma::dispersion::{self, windowed_std, PRBS9_REFERENCE_STD};
use ropuf_tdma::hardware::{
    estimate_cost, sample_ro_bank, traditional_ropuf_response, RoPufConfig, RoSpec,
};
use ropuf_tdma::prbs::{registry_polynomial, MAX_REGISTRY_ORDER, MIN_REGISTRY_ORDER};
use ropuf_tdma::sim::{export, node_start_time, run_simulation, SimConfig};
use ropuf_tdma::{config, Error};

use crate::output::{csv, emit, json};
use crate::{Format, OutputArgs};

/// Bad command-line arguments; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "usage: {}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(err: Error) -> anyhow::Error {
    UsageError(err.to_string()).into()
}

fn check_registry_order(order: u32) -> anyhow::Result<()> {
    registry_polynomial(order).map(|_| ()).map_err(usage)
}

pub fn collision(
    order: u32,
    max_nodes_arg: u64,
    trials: Option<u64>,
    rng_seed: u64,
    output: &OutputArgs,
) -> anyhow::Result<()> {
    if max_nodes_arg == 0 {
        bail!(UsageError("--nodes must be >= 1".into()));
    }
    if trials == Some(0) {
        bail!(UsageError("--trials must be >= 1".into()));
    }
    let mut rows = Vec::new();
    for n in 1..=max_nodes_arg {
        let q = CollisionQuery::new(order, n).map_err(usage)?;
        let exact = collision_probability_exact::<f64>(q).probability;
        let mc = trials
            .map(|t| monte_carlo_collision::<f64>(q, t, rng_seed.wrapping_add(n)))
            .transpose()?;
        rows.push((n, exact, mc));
    }
    let text = match output.format {
        Format::Csv => {
            let mut header = vec!["n", "probability"];
            if trials.is_some() {
                header.extend(["mc_probability", "mc_std_error"]);
            }
            csv(
                &header,
                rows.iter().map(|(n, p, mc)| {
                    let mut r = vec![n.to_string(), p.to_string()];
                    if let Some(mc) = mc {
                        r.push(mc.probability.to_string());
                        r.push(mc.std_error.unwrap_or_default().to_string());
                    }
                    r
                }),
            )
        }
        Format::Json => json(&json!({
            "order": order,
            "rows": rows.iter().map(|(n, p, mc)| json!({
                "n": n,
                "probability": p,
                "monte_carlo": mc,
            })).collect::<Vec<_>>(),
        })),
    };
    emit(output, &text)
}

pub fn nodes_supported(order_min: u32, order_max: u32, output: &OutputArgs) -> anyhow::Result<()> {
    if !(MIN_REGISTRY_ORDER <= order_min
        && order_min <= order_max
        && order_max <= MAX_REGISTRY_ORDER)
    {
        bail!(UsageError(format!(
            "need {MIN_REGISTRY_ORDER} <= --order-min <= --order-max <= {MAX_REGISTRY_ORDER}, got {order_min}..{order_max}"
        )));
    }
    let rows = (order_min..=order_max)
        .map(|order| {
            let cost = estimate_cost::<f64>(order)?;
            Ok((order, max_nodes(order)?, cost))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let text = match output.format {
        Format::Csv => csv(
            &["order", "nodes", "area_scale", "power_scale"],
            rows.iter().map(|(o, n, c)| {
                [
                    o.to_string(),
                    n.to_string(),
                    c.area_scale.to_string(),
                    c.power_scale.to_string(),
                ]
            }),
        ),
        Format::Json => json(&json!(rows
            .iter()
            .map(|(o, n, c)| json!({
                "order": o,
                "nodes": n,
                "area_scale": c.area_scale,
                "power_scale": c.power_scale,
            }))
            .collect::<Vec<_>>())),
    };
    emit(output, &text)
}

pub fn seed_sweep(order: u32, window: usize, output: &OutputArgs) -> anyhow::Result<()> {
    check_registry_order(order)?;
    let poly = registry_polynomial(order)?;
    let sweep = dispersion::sweep_outputs(&poly)?;
    let stats = windowed_std::<f64>(&sweep, window).map_err(usage)?;
    let reference = (order == 9).then_some(PRBS9_REFERENCE_STD);

    match reference {
        Some(r) => eprintln!(
            "PRBS{order} consecutive-seed min std (window {window}): {:.4}; reference value: {r}",
            stats.min_std
        ),
        None => eprintln!(
            "PRBS{order} consecutive-seed min std (window {window}): {:.4}",
            stats.min_std
        ),
    }

    let text = match output.format {
        Format::Csv => {
            let mut text = csv(
                &["seed", "output"],
                sweep
                    .outputs()
                    .iter()
                    .enumerate()
                    .map(|(s, o)| [s.to_string(), o.to_string()]),
            );
            text.push_str(&format!("min_std,{}\n", stats.min_std));
            text
        }
        Format::Json => json(&json!({
            "order": order,
            "polynomial": poly.to_string(),
            "window": window,
            "outputs": sweep.outputs(),
            "min_std": stats.min_std,
            "reference_std": reference,
        })),
    };
    emit(output, &text)
}

pub fn compare_orders(orders: &[u32], window: usize, output: &OutputArgs) -> anyhow::Result<()> {
    if orders.is_empty() {
        bail!(UsageError("--orders must not be empty".into()));
    }
    for &o in orders {
        check_registry_order(o)?;
    }
    let rows = dispersion::compare_orders::<f64>(orders, window).map_err(usage)?;
    let text = match output.format {
        Format::Csv => csv(
            &["order", "window", "min_std", "area_scale", "power_scale"],
            rows.iter().map(|r| {
                [
                    r.order.to_string(),
                    r.window.to_string(),
                    r.min_std.to_string(),
                    r.area_scale.to_string(),
                    r.power_scale.to_string(),
                ]
            }),
        ),
        Format::Json => json(&serde_json::to_value(&rows)?),
    };
    emit(output, &text)
}

/// Simulation settings; flags override the config file, which overrides
/// the built-in defaults.
#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    /// Flat key=value config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub rng_seed: Option<u64>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub ro1_freq: Option<f64>,
    #[arg(long)]
    pub ro1_sigma: Option<f64>,
    #[arg(long)]
    pub ro2_freq: Option<f64>,
    #[arg(long)]
    pub ro2_sigma: Option<f64>,
    #[arg(long)]
    pub prbs_order: Option<u32>,
    #[arg(long)]
    pub timer_bits: Option<u32>,
    #[arg(long)]
    pub seed_bits: Option<u32>,
    #[arg(long)]
    pub pad_zero_bits: Option<u32>,
    #[arg(long)]
    pub comm_duration: Option<f64>,
    #[arg(long)]
    pub idle_duration: Option<f64>,
    #[arg(long)]
    pub stim_duration: Option<f64>,
    #[arg(long)]
    pub cycle_period: Option<f64>,
    #[arg(long)]
    pub sim_duration: Option<f64>,
    #[arg(long)]
    pub tick_accurate: Option<bool>,
    /// Timeline encoding: csv or json (JSON lines).
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output directory for the timeline and collision report.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub sim: SimConfig,
    pub format: Format,
    pub out_dir: PathBuf,
    pub verbosity: u8,
}

impl RunConfig {
    pub fn from_args(args: &SimulateArgs, verbosity: u8) -> anyhow::Result<Self> {
        let mut sim = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                config::parse(&text).with_context(|| format!("in config {}", path.display()))?
            }
            None => SimConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = args.$flag { sim.$($field).+ = v; })*
            };
        }
        set! {
            rng_seed => rng_seed,
            nodes => num_nodes,
            ro1_freq => ro1.nominal_freq,
            ro1_sigma => ro1.sigma_fraction,
            ro2_freq => ro2.nominal_freq,
            ro2_sigma => ro2.sigma_fraction,
            prbs_order => prbs_order,
            timer_bits => timer_bits,
            seed_bits => seed_bits,
            pad_zero_bits => pad_zero_bits,
            comm_duration => comm_duration,
            idle_duration => idle_duration,
            stim_duration => stim_duration,
            cycle_period => cycle_period,
            sim_duration => sim_duration,
            tick_accurate => tick_accurate,
        }
        sim.validate()?;
        Ok(Self {
            sim,
            format: args.format,
            out_dir: args.out.clone(),
            verbosity,
        })
    }
}

pub fn simulate(args: &SimulateArgs, verbosity: u8) -> anyhow::Result<()> {
    let run = RunConfig::from_args(args, verbosity)?;
    if run.verbosity > 0 {
        eprint!("{}", config::to_config_string(&run.sim));
    }
    let outcome = run_simulation(&run.sim)?;

    fs::create_dir_all(&run.out_dir)
        .with_context(|| format!("creating {}", run.out_dir.display()))?;
    let (name, timeline) = match run.format {
        Format::Json => ("timeline.jsonl", export::to_jsonl(&outcome.timeline)),
        Format::Csv => ("timeline.csv", export::to_csv(&outcome.timeline)),
    };
    let write = |file: &str, text: &str| {
        let path = run.out_dir.join(file);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    };
    write(name, &timeline)?;
    write("report.json", &export::report_json(&outcome.report))?;

    for node in &outcome.network.nodes {
        println!(
            "node {}: f1={:.3} Hz f2={:.3} Hz seed={} signature={} cs={} start={:.6} s",
            node.id,
            node.die.f1,
            node.die.f2,
            node.seed,
            node.signature,
            node.cs_value,
            node_start_time(node)
        );
    }
    let report = &outcome.report;
    println!(
        "signature collisions: {}, window overlaps: {}",
        report.signature_collisions.len(),
        report.window_overlaps.len()
    );
    Ok(())
}

pub fn ropuf_baseline(
    ros: usize,
    freq: f64,
    sigma: f64,
    count_window: f64,
    rng_seed: u64,
    output: &OutputArgs,
) -> anyhow::Result<()> {
    let cfg = RoPufConfig::new(ros, count_window).map_err(usage)?;
    let spec = RoSpec::new(freq, sigma).map_err(usage)?;
    let freqs = sample_ro_bank(&spec, ros, rng_seed);
    let pairs = cfg.all_pairs();
    let bits = traditional_ropuf_response(&freqs, &pairs, count_window)?;
    let response: String = bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
    let text = match output.format {
        Format::Csv => csv(
            &["i", "j", "f_i", "f_j", "bit"],
            pairs.iter().zip(&bits).map(|(&(i, j), &b)| {
                [
                    i.to_string(),
                    j.to_string(),
                    freqs[i].to_string(),
                    freqs[j].to_string(),
                    u8::from(b).to_string(),
                ]
            }),
        ),
        Format::Json => json(&json!({
            "num_ros": ros,
            "challenge_bits": cfg.challenge_bits(),
            "count_window": count_window,
            "frequencies": freqs,
            "response": response,
        })),
    };
    emit(output, &text)
}
