use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;

use anyhow::{bail, Context, Result};

use cellseg::islip::{default_iterations, IslipState};
use cellseg::mg1::scenario_curve;
use cellseg::quantize::{gamma_fit, pmf_moments, quantize_general, ContinuousDist};
use cellseg::sim::{
    find_min_speedup, sweep_utilization, SimStats, Simulator, SpeedupSearch, SwitchConfig,
};
use cellseg::traffic::{
    derive_seed, generate_synthetic, parse_trace, split_trace, write_trace, ArrivalProcess, DestRule, LengthDist,
    SyntheticSpec, TrafficPlan,
};

use crate::config::Config;
use crate::output::sig6;

/// Command output: extra `#` notes and the CSV body.
#[derive(Debug, Default)]
pub struct Output {
    pub notes: Vec<String>,
    pub body: String,
}

fn row(fields: &[String]) -> String {
    let mut line = fields.join(",");
    line.push('\n');
    line
}

pub fn switch_config(cfg: &Config) -> Result<SwitchConfig> {
    let ports: usize = cfg.get("ports")?;
    let islip_iterations = match cfg.raw("islip_iterations") {
        "auto" => default_iterations(ports),
        _ => cfg.get("islip_iterations")?,
    };
    let max_slots: u64 = cfg.get("max_slots")?;
    let sc = SwitchConfig {
        ports,
        cell_size: cfg.get("cell_size")?,
        speedup: cfg.get("speedup")?,
        islip_iterations,
        merge: cfg.get("merge")?,
        merge_timeout: cfg.get("merge_timeout_cells")?,
        warmup_fraction: cfg.get("warmup_fraction")?,
        instability_threshold: cfg.get("instability_threshold")?,
        seed: cfg.get("seed")?,
        stop_on_unstable: cfg.get("stop_on_unstable")?,
        drain: cfg.get("drain")?,
        max_slots: (max_slots > 0).then_some(max_slots),
    };
    sc.validate()?;
    Ok(sc)
}

fn synthetic_spec(cfg: &Config) -> Result<SyntheticSpec> {
    let arrival = match cfg.raw("traffic.arrival") {
        "poisson" => ArrivalProcess::Poisson { rate: cfg.get("traffic.rate")? },
        "cbr" => ArrivalProcess::Cbr { interval: cfg.get("traffic.interval")? },
        other => bail!("traffic.arrival: expected poisson or cbr, got {other:?}"),
    };
    let length = match cfg.raw("traffic.length") {
        "bimodal" => LengthDist::Bimodal,
        "exponential" => LengthDist::Exponential { mean: cfg.get("traffic.mean_length")? },
        "fixed" => LengthDist::Fixed(cfg.get("traffic.fixed_length")?),
        other => bail!("traffic.length: expected bimodal, exponential or fixed, got {other:?}"),
    };
    let dest = match cfg.raw("traffic.dest") {
        "uniform" => DestRule::Uniform,
        _ => DestRule::Fixed(cfg.get("traffic.dest")?),
    };
    let inputs = match cfg.raw("traffic.inputs") {
        "all" => None,
        _ => Some(cfg.list("traffic.inputs")?),
    };
    let spec = SyntheticSpec { arrival, length, ports: cfg.get("ports")?, dest, inputs };
    spec.validate()?;
    Ok(spec)
}

pub fn traffic_plan(cfg: &Config) -> Result<TrafficPlan> {
    match cfg.raw("traffic.source") {
        "synthetic" => Ok(TrafficPlan::Synthetic {
            spec: synthetic_spec(cfg)?,
            packets_per_input: cfg.get("traffic.packets_per_input")?,
        }),
        "trace" => {
            let path = cfg.raw("traffic.trace");
            if path.is_empty() {
                bail!("traffic.source = trace needs traffic.trace");
            }
            let file = File::open(path).with_context(|| format!("opening trace {path}"))?;
            let ports: usize = cfg.get("ports")?;
            let packets = parse_trace(BufReader::new(file), ports, 0).with_context(|| format!("trace {path}"))?;
            Ok(TrafficPlan::Replay { packets: split_trace(&packets, ports) })
        }
        other => bail!("traffic.source: expected synthetic or trace, got {other:?}"),
    }
}

pub fn analyze(cfg: &Config) -> Result<Output> {
    let lengths: Vec<f64> = cfg.list("L")?;
    let cell: f64 = cfg.get("S")?;
    let rhos: Vec<f64> = cfg.list("rho_list")?;
    let mut out = Output::default();
    out.body.push_str("L,rho,lambda,mu,rho_quantized,EN,EN_unquantized,sigma\n");
    for &l in &lengths {
        for p in scenario_curve(l, cell, &rhos)? {
            let opt = |v: Option<f64>| v.map_or_else(|| "inf".to_string(), sig6);
            out.body.push_str(&row(&[
                sig6(l),
                sig6(p.utilization),
                sig6(p.lambda),
                sig6(p.mu),
                sig6(p.quantized_load),
                opt(p.mean_customers),
                opt(p.mean_customers_unquantized),
                sig6(p.required_speedup),
            ]));
        }
    }
    Ok(out)
}

pub fn quantize(cfg: &Config) -> Result<Output> {
    let mut out = Output::default();
    let dist = match cfg.raw("quantize.dist") {
        "gamma" => {
            let (shape, scale) = gamma_fit(cfg.get("quantize.mean")?, cfg.get::<f64>("quantize.stddev")?)?;
            out.notes.push(format!("gamma shape alpha = {}", sig6(shape)));
            out.notes.push(format!("gamma scale beta = {}", sig6(scale)));
            ContinuousDist::Gamma { shape, scale }
        }
        "exponential" => ContinuousDist::Exponential { rate: cfg.get("quantize.rate")? },
        "erlang2" => ContinuousDist::Erlang2 { rate: cfg.get("quantize.rate")? },
        "hyperexp2" => {
            let w: Vec<f64> = cfg.list("quantize.weights")?;
            let r: Vec<f64> = cfg.list("quantize.rates")?;
            if w.len() != 2 || r.len() != 2 {
                bail!("hyperexp2 needs exactly two weights and two rates");
            }
            ContinuousDist::Hyperexp2 { weights: [w[0], w[1]], rates: [r[0], r[1]] }
        }
        other => bail!("quantize.dist: expected gamma, exponential, hyperexp2 or erlang2, got {other:?}"),
    };
    dist.validate()?;
    let pmf = quantize_general(&dist, cfg.get("quantize.tail_epsilon")?)?;
    let m = pmf_moments(&pmf);
    if let Some(Ok(closed)) = dist.closed_form_moments() {
        out.notes.push(format!("closed-form mean = {}, variance = {}", sig6(closed.mean), sig6(closed.variance)));
    }
    out.notes.push(format!("source mean = {}, variance = {}", sig6(dist.mean()), sig6(dist.variance())));
    out.body.push_str("mean,variance,second_moment,scv,support,tail_mass\n");
    out.body.push_str(&row(&[
        sig6(m.mean),
        sig6(m.variance),
        sig6(m.second_moment()),
        sig6(m.scv()),
        pmf.support_len().to_string(),
        sig6(pmf.tail_mass()),
    ]));
    out.body.push_str("\nk,p_k\n");
    for (k, p) in pmf.iter() {
        out.body.push_str(&row(&[k.to_string(), sig6(p)]));
    }
    Ok(out)
}

const SIM_HEADER: &str = "utilization,speedup,merge,mean_queue_cells,max_voq_cells,max_port_cells,unstable,\
padding_overhead_ratio,mean_packets_in_system,cells_forwarded,max_offered_load,truncated,reassembly_errors\n";

fn sim_row(utilization: f64, speedup: f64, merge: bool, st: &SimStats) -> String {
    let max_load = st.per_port_offered_load.iter().copied().fold(0.0, f64::max);
    row(&[
        sig6(utilization),
        sig6(speedup),
        merge.to_string(),
        sig6(st.mean_queue_cells),
        st.max_voq_cells.to_string(),
        st.max_port_cells.to_string(),
        st.unstable.to_string(),
        sig6(st.padding_overhead_ratio()),
        sig6(st.mean_packets_in_system),
        st.cells_forwarded.to_string(),
        sig6(max_load),
        st.truncated.to_string(),
        st.reassembly_errors.to_string(),
    ])
}

fn describe_islip(state: &IslipState) -> String {
    let mut s = String::new();
    writeln!(s, "iSLIP grant pointers (per output): {:?}", state.grant).unwrap();
    writeln!(s, "iSLIP accept pointers (per input): {:?}", state.accept).unwrap();
    s
}

pub fn simulate(cfg: &Config, verbose: bool) -> Result<Output> {
    let sc = switch_config(cfg)?;
    let utilization: f64 = cfg.get("utilization")?;
    let traffic = traffic_plan(cfg)?.build(sc.ports, sc.cell_size, utilization, derive_seed(sc.seed, &[0]))?;
    let (stats, islip) = Simulator::new(&sc, &traffic)?.run_with_state()?;
    if verbose {
        eprint!("{}", describe_islip(&islip));
        eprintln!("segmenter transitions T0..T4: {:?}", stats.transition_counts);
        eprintln!("per-port offered load: {:?}", stats.per_port_offered_load);
    }
    let mut out = Output::default();
    out.notes.push(format!("cell time = {} source time units", sig6(traffic.cell_time)));
    out.body.push_str(SIM_HEADER);
    out.body.push_str(&sim_row(utilization, sc.speedup, sc.merge, &stats));
    Ok(out)
}

pub fn sweep(cfg: &Config) -> Result<Output> {
    let sc = switch_config(cfg)?;
    let utilizations: Vec<f64> = cfg.list("utilization_list")?;
    let speedups: Vec<f64> = cfg.list("speedup_list")?;
    let points = sweep_utilization(&sc, &traffic_plan(cfg)?, &utilizations, &speedups)?;
    let mut out = Output::default();
    out.body.push_str(SIM_HEADER);
    for p in &points {
        out.body.push_str(&sim_row(p.utilization, p.speedup, sc.merge, &p.stats));
    }
    Ok(out)
}

pub fn min_speedup(cfg: &Config) -> Result<Output> {
    let sc = switch_config(cfg)?;
    let utilization: f64 = cfg.get("utilization")?;
    let search = SpeedupSearch { start: 1.0, step: cfg.get("search_step")?, max: cfg.get("search_max")? };
    let (speedup, stats) = find_min_speedup(&sc, &traffic_plan(cfg)?, utilization, search)?;
    let mut out = Output::default();
    out.body.push_str("utilization,merge,min_speedup,mean_queue_cells,max_port_cells,padding_overhead_ratio\n");
    out.body.push_str(&row(&[
        sig6(utilization),
        sc.merge.to_string(),
        format!("{speedup:.2}"),
        sig6(stats.mean_queue_cells),
        stats.max_port_cells.to_string(),
        sig6(stats.padding_overhead_ratio()),
    ]));
    Ok(out)
}

/// One input's synthetic stream in trace format, times taken as µs.
pub fn gen_traffic(cfg: &Config) -> Result<Output> {
    let spec = synthetic_spec(cfg)?;
    let seed: u64 = cfg.get("seed")?;
    let input = spec.active_inputs()[0];
    let count: usize = cfg.get("traffic.packets_per_input")?;
    let packets = generate_synthetic(&spec, input, derive_seed(seed, &[input as u64]), count)?;
    let mut buf = Vec::new();
    write_trace(&mut buf, &packets)?;
    Ok(Output { notes: vec![format!("{} packets generated for input {input}", packets.len())], body: String::from_utf8(buf)? })
}
