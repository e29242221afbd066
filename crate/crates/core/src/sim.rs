//! Discrete-event simulation of the timer/randomizer FSM across a network of
//! implants.
//!
//! After a sync every node's RO₁-driven timer counts up from zero. At the
//! middle of its range (`2^(timer_bits-1)`) the node samples its free-running
//! RO₂ counter as the LFSR seed, derives the signature and pads it into the
//! communication slot word: a leading one, the signature, then
//! `pad_zero_bits` zeros. Communication starts when the timer equals that
//! word and is followed by idle and stimulation phases. The whole
//! comm/idle/stim cycle repeats every `cycle_period` seconds, anchored at the
//! node's first communication start.
//!
//! Event times are computed in closed form. Setting
//! [`SimConfig::tick_accurate`] instead clocks the timer and the RO₂ counter
//! edge by edge up to the query point, which is only practical for a handful
//! of nodes.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt;

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hardware::{extract_seed, sample_die, DieSample, RoSpec};
use crate::prbs::{registry_polynomial, signature_from_seed, FeedbackPolynomial};
use crate::{Error, Result};

pub const SLOT_WIDTH_RULE: &str = "1 + seed_bits + pad_zero_bits = timer_bits";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub num_nodes: usize,
    pub ro1: RoSpec<f64>,
    pub ro2: RoSpec<f64>,
    pub prbs_order: u32,
    pub timer_bits: u32,
    pub seed_bits: u32,
    pub pad_zero_bits: u32,
    pub comm_duration: f64,
    pub idle_duration: f64,
    pub stim_duration: f64,
    pub cycle_period: f64,
    pub sim_duration: f64,
    pub rng_seed: u64,
    pub tick_accurate: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            num_nodes: 3,
            ro1: RoSpec::ro1_default(),
            ro2: RoSpec::ro2_default(),
            prbs_order: 9,
            timer_bits: 22,
            seed_bits: 9,
            pad_zero_bits: 12,
            comm_duration: 0.1,
            idle_duration: 0.1,
            stim_duration: 0.1,
            cycle_period: 100.0,
            sim_duration: 600.0,
            rng_seed: 0,
            tick_accurate: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.num_nodes == 0 {
            return bad("num_nodes must be >= 1".into());
        }
        self.ro1.validate()?;
        self.ro2.validate()?;
        if !(2..=48).contains(&self.timer_bits) {
            return bad(format!(
                "timer_bits must be in 2..=48, got {}",
                self.timer_bits
            ));
        }
        if 1 + self.seed_bits as u64 + self.pad_zero_bits as u64 != self.timer_bits as u64 {
            return bad(format!(
                "{SLOT_WIDTH_RULE} violated: 1 + {} + {} != {}",
                self.seed_bits, self.pad_zero_bits, self.timer_bits
            ));
        }
        if self.prbs_order != self.seed_bits {
            return bad(format!(
                "prbs_order ({}) must equal seed_bits ({})",
                self.prbs_order, self.seed_bits
            ));
        }
        registry_polynomial(self.prbs_order)?;
        for (name, v) in [
            ("comm_duration", self.comm_duration),
            ("idle_duration", self.idle_duration),
            ("stim_duration", self.stim_duration),
            ("cycle_period", self.cycle_period),
            ("sim_duration", self.sim_duration),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be > 0, got {v}"));
            }
        }
        let active = self.comm_duration + self.idle_duration + self.stim_duration;
        if active > self.cycle_period {
            return bad(format!(
                "comm + idle + stim ({active} s) exceeds cycle_period ({} s)",
                self.cycle_period
            ));
        }
        Ok(())
    }

    /// Timer value at which the seed is captured.
    pub fn query_count(&self) -> u64 {
        1 << (self.timer_bits - 1)
    }

    pub fn timer_range(&self) -> u64 {
        1 << self.timer_bits
    }

    fn polynomial(&self) -> FeedbackPolynomial {
        registry_polynomial(self.prbs_order).expect("validated config")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FsmState {
    AwaitSync,
    Counting,
    Queried,
    Communicating,
    Idle,
    Stimulating,
    CycleWait,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImplantNode {
    pub id: usize,
    pub die: DieSample<f64>,
    pub seed: u32,
    pub signature: u32,
    pub cs_value: u64,
    pub fsm_state: FsmState,
    /// Time of the last sync this node saw.
    pub sync_time: f64,
}

/// Pads a signature into the timer-width communication slot word.
pub fn communication_slot(signature: u32, cfg: &SimConfig) -> Result<u64> {
    if signature as u64 >= 1 << cfg.seed_bits {
        return Err(Error::OutOfRange {
            what: "signature",
            value: signature.into(),
            expected: format!("< 2^{}", cfg.seed_bits),
        });
    }
    Ok((1 << (cfg.timer_bits - 1)) | (signature as u64) << cfg.pad_zero_bits)
}

/// Instant at which the node's timer reaches its slot word.
pub fn node_start_time(node: &ImplantNode) -> f64 {
    node.sync_time + node.cs_value as f64 / node.die.f1
}

/// Instant at which the node captures its seed.
pub fn node_query_time(node: &ImplantNode, cfg: &SimConfig) -> f64 {
    node.sync_time + cfg.query_count() as f64 / node.die.f1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub config: SimConfig,
    pub nodes: Vec<ImplantNode>,
}

fn derive_slot(
    die: &DieSample<f64>,
    cfg: &SimConfig,
    poly: &FeedbackPolynomial,
) -> (u32, u32, u64) {
    let seed = if cfg.tick_accurate {
        tick_seed(die, cfg)
    } else {
        extract_seed(die, cfg.query_count(), cfg.seed_bits) as u32
    };
    let signature = signature_from_seed(seed, poly);
    let cs = communication_slot(signature, cfg).expect("signature fits seed_bits");
    (seed, signature, cs)
}

/// Clocks the timer and the RO₂ counter edge by edge until the query point.
fn tick_seed(die: &DieSample<f64>, cfg: &SimConfig) -> u32 {
    let ratio = die.f2 / die.f1;
    let seed_mask = (1u64 << cfg.seed_bits) - 1;
    let timer_mask = cfg.timer_range() - 1;
    let (mut timer, mut ro2, mut phase) = (0u64, 0u64, 0.0f64);
    loop {
        timer = (timer + 1) & timer_mask;
        phase += ratio;
        let edges = phase.floor();
        phase -= edges;
        ro2 = (ro2 + edges as u64) & seed_mask;
        if timer == cfg.query_count() {
            return ro2 as u32;
        }
    }
}

/// Samples the dies and derives every node's seed, signature and slot.
pub fn build_network(cfg: &SimConfig) -> Result<Network> {
    cfg.validate()?;
    let poly = cfg.polynomial();
    let mut master = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let nodes = (0..cfg.num_nodes)
        .map(|id| {
            let die = sample_die(&cfg.ro1, &cfg.ro2, master.next_u64());
            let (seed, signature, cs_value) = derive_slot(&die, cfg, &poly);
            ImplantNode {
                id,
                die,
                seed,
                signature,
                cs_value,
                fsm_state: FsmState::AwaitSync,
                sync_time: 0.0,
            }
        })
        .collect();
    Ok(Network {
        config: cfg.clone(),
        nodes,
    })
}

/// Resets every node's timer and FSM at `time`.
pub fn broadcast_sync(mut network: Network, time: f64) -> Network {
    for node in &mut network.nodes {
        node.fsm_state = FsmState::Counting;
        node.sync_time = time;
    }
    network
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Sync,
    Query,
    CommStart,
    CommEnd,
    StimStart,
    StimEnd,
    CycleRestart,
}

impl EventKind {
    pub const ALL: [EventKind; 7] = [
        EventKind::Sync,
        EventKind::Query,
        EventKind::CommStart,
        EventKind::CommEnd,
        EventKind::StimStart,
        EventKind::StimEnd,
        EventKind::CycleRestart,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EventKind::Sync => "Sync",
            EventKind::Query => "Query",
            EventKind::CommStart => "CommStart",
            EventKind::CommEnd => "CommEnd",
            EventKind::StimStart => "StimStart",
            EventKind::StimEnd => "StimEnd",
            EventKind::CycleRestart => "CycleRestart",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for EventKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EventKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse {
                line: 0,
                message: format!("unknown event kind {s:?}"),
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimelineEvent {
    pub node_id: usize,
    pub kind: EventKind,
    /// Seconds since the initial sync.
    pub time: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureCollision {
    pub cs_value: u64,
    pub node_ids: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowOverlap {
    pub first: usize,
    pub second: usize,
    pub start: f64,
    pub end: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionReport {
    pub signature_collisions: Vec<SignatureCollision>,
    pub window_overlaps: Vec<WindowOverlap>,
    pub any_collision: bool,
}

/// A communication window, possibly cut short by a sync.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommWindow {
    pub node_id: usize,
    pub start: f64,
    pub end: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Action {
    Sync,
    Query,
    CommStart { cycle: u64 },
    CommEnd { cycle: u64 },
    StimStart { cycle: u64 },
    StimEnd { cycle: u64 },
    CycleRestart { cycle: u64 },
}

#[derive(Clone, Copy, Debug)]
struct Scheduled {
    time: f64,
    seq: u64,
    /// `None` for network-wide syncs.
    node: Option<usize>,
    epoch: u64,
    action: Action,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.seq.cmp(&other.seq))
    }
}

/// Event-driven executor for one network.
pub struct Simulator {
    cfg: SimConfig,
    poly: FeedbackPolynomial,
    nodes: Vec<ImplantNode>,
    queue: BinaryHeap<Reverse<Scheduled>>,
    seq: u64,
    /// Bumped on every sync; events scheduled under an older epoch are stale.
    epochs: Vec<u64>,
    anchors: Vec<f64>,
    open_comm: Vec<Option<f64>>,
    windows: Vec<CommWindow>,
    timeline: Vec<TimelineEvent>,
}

impl Simulator {
    pub fn new(network: Network) -> Self {
        let n = network.nodes.len();
        Self {
            poly: network.config.polynomial(),
            cfg: network.config,
            nodes: network.nodes,
            queue: BinaryHeap::new(),
            seq: 0,
            epochs: vec![0; n],
            anchors: vec![0.0; n],
            open_comm: vec![None; n],
            windows: Vec::new(),
            timeline: Vec::new(),
        }
    }

    /// Queues a network-wide sync broadcast.
    pub fn schedule_sync(&mut self, time: f64) {
        self.push(time, None, 0, Action::Sync);
    }

    fn push(&mut self, time: f64, node: Option<usize>, epoch: u64, action: Action) {
        self.seq += 1;
        self.queue.push(Reverse(Scheduled {
            time,
            seq: self.seq,
            node,
            epoch,
            action,
        }));
    }

    fn push_node(&mut self, id: usize, time: f64, action: Action) {
        self.push(time, Some(id), self.epochs[id], action);
    }

    fn emit(&mut self, node_id: usize, kind: EventKind, time: f64) {
        self.timeline.push(TimelineEvent {
            node_id,
            kind,
            time,
        });
    }

    /// Processes events until the queue drains. Syncs, queries and cycle
    /// starts at or after `sim_duration` are dropped; a cycle that has begun
    /// runs to completion.
    pub fn run(&mut self) {
        while let Some(Reverse(ev)) = self.queue.pop() {
            match ev.node {
                None => self.handle_sync(ev.time),
                Some(id) if ev.epoch == self.epochs[id] => self.handle_node(id, ev.time, ev.action),
                Some(_) => {}
            }
        }
    }

    fn handle_sync(&mut self, t: f64) {
        if t >= self.cfg.sim_duration {
            return;
        }
        for id in 0..self.nodes.len() {
            if let Some(start) = self.open_comm[id].take() {
                self.windows.push(CommWindow {
                    node_id: id,
                    start,
                    end: t,
                });
            }
            self.epochs[id] += 1;
            let node = &mut self.nodes[id];
            node.fsm_state = FsmState::Counting;
            node.sync_time = t;
            let query = node_query_time(node, &self.cfg);
            self.emit(id, EventKind::Sync, t);
            self.push_node(id, query, Action::Query);
        }
    }

    fn handle_node(&mut self, id: usize, t: f64, action: Action) {
        let cfg = self.cfg.clone();
        match action {
            Action::Sync => unreachable!("syncs are network-wide"),
            Action::Query => {
                if t >= cfg.sim_duration {
                    return;
                }
                let (seed, signature, cs_value) =
                    derive_slot(&self.nodes[id].die, &cfg, &self.poly);
                let node = &mut self.nodes[id];
                node.seed = seed;
                node.signature = signature;
                node.cs_value = cs_value;
                node.fsm_state = FsmState::Queried;
                let start = node_start_time(node);
                self.anchors[id] = start;
                self.emit(id, EventKind::Query, t);
                self.push_node(id, start, Action::CommStart { cycle: 0 });
            }
            Action::CycleRestart { cycle } => {
                if t >= cfg.sim_duration {
                    return;
                }
                self.emit(id, EventKind::CycleRestart, t);
                self.handle_node(id, t, Action::CommStart { cycle });
            }
            Action::CommStart { cycle } => {
                if t >= cfg.sim_duration {
                    return;
                }
                let end = t + cfg.comm_duration;
                self.nodes[id].fsm_state = FsmState::Communicating;
                self.open_comm[id] = Some(t);
                self.emit(id, EventKind::CommStart, t);
                self.push_node(id, end, Action::CommEnd { cycle });
            }
            Action::CommEnd { cycle } => {
                let stim = t + cfg.idle_duration;
                self.nodes[id].fsm_state = FsmState::Idle;
                if let Some(start) = self.open_comm[id].take() {
                    self.windows.push(CommWindow {
                        node_id: id,
                        start,
                        end: t,
                    });
                }
                self.emit(id, EventKind::CommEnd, t);
                self.push_node(id, stim, Action::StimStart { cycle });
            }
            Action::StimStart { cycle } => {
                let end = t + cfg.stim_duration;
                self.nodes[id].fsm_state = FsmState::Stimulating;
                self.emit(id, EventKind::StimStart, t);
                self.push_node(id, end, Action::StimEnd { cycle });
            }
            Action::StimEnd { cycle } => {
                let next = self.anchors[id] + (cycle + 1) as f64 * cfg.cycle_period;
                self.nodes[id].fsm_state = FsmState::CycleWait;
                self.emit(id, EventKind::StimEnd, t);
                self.push_node(id, next, Action::CycleRestart { cycle: cycle + 1 });
            }
        }
    }

    pub fn nodes(&self) -> &[ImplantNode] {
        &self.nodes
    }

    pub fn timeline(&self) -> &[TimelineEvent] {
        &self.timeline
    }

    pub fn comm_windows(&self) -> &[CommWindow] {
        &self.windows
    }

    pub fn report(&self) -> CollisionReport {
        collision_report(&self.nodes, &self.windows)
    }

    pub fn into_outcome(self) -> SimOutcome {
        let report = self.report();
        SimOutcome {
            network: Network {
                config: self.cfg,
                nodes: self.nodes,
            },
            timeline: self.timeline,
            report,
        }
    }
}

/// Groups nodes sharing a slot word and finds overlapping comm windows.
pub fn collision_report(nodes: &[ImplantNode], windows: &[CommWindow]) -> CollisionReport {
    let mut by_slot: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for node in nodes {
        by_slot.entry(node.cs_value).or_default().push(node.id);
    }
    let signature_collisions: Vec<_> = by_slot
        .into_iter()
        .filter(|(_, ids)| ids.len() > 1)
        .map(|(cs_value, node_ids)| SignatureCollision { cs_value, node_ids })
        .collect();

    let mut sorted = windows.to_vec();
    sorted.sort_by(|a, b| a.start.total_cmp(&b.start).then(a.node_id.cmp(&b.node_id)));
    let mut window_overlaps = Vec::new();
    for (i, a) in sorted.iter().enumerate() {
        for b in sorted[i + 1..].iter().take_while(|b| b.start < a.end) {
            if a.node_id == b.node_id {
                continue;
            }
            let end = a.end.min(b.end);
            if b.start < end {
                window_overlaps.push(WindowOverlap {
                    first: a.node_id.min(b.node_id),
                    second: a.node_id.max(b.node_id),
                    start: b.start,
                    end,
                });
            }
        }
    }
    let any_collision = !signature_collisions.is_empty() || !window_overlaps.is_empty();
    CollisionReport {
        signature_collisions,
        window_overlaps,
        any_collision,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub network: Network,
    pub timeline: Vec<TimelineEvent>,
    pub report: CollisionReport,
}

/// Builds the network, syncs it at `t = 0` and runs to `sim_duration`.
pub fn run_simulation(cfg: &SimConfig) -> Result<SimOutcome> {
    let network = build_network(cfg)?;
    let mut sim = Simulator::new(network);
    sim.schedule_sync(0.0);
    sim.run();
    Ok(sim.into_outcome())
}

/// Fraction of `networks` independently seeded networks (seeds
/// `cfg.rng_seed + i`) with at least one shared slot word.
pub fn signature_collision_fraction(cfg: &SimConfig, networks: u64) -> Result<f64> {
    cfg.validate()?;
    let hits = (0..networks)
        .into_par_iter()
        .map(|i| {
            let cfg = SimConfig {
                rng_seed: cfg.rng_seed.wrapping_add(i),
                ..cfg.clone()
            };
            let net = build_network(&cfg)?;
            Ok(!collision_report(&net.nodes, &[])
                .signature_collisions
                .is_empty())
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(hits.iter().filter(|h| **h).count() as f64 / networks as f64)
}

/// JSON-lines and CSV encodings of a timeline.
pub mod export {
    use super::*;

    pub const CSV_HEADER: &str = "node_id,kind,time";

    pub fn to_jsonl(events: &[TimelineEvent]) -> String {
        events
            .iter()
            .map(|e| serde_json::to_string(e).expect("event serializes") + "\n")
            .collect()
    }

    pub fn from_jsonl(text: &str) -> Result<Vec<TimelineEvent>> {
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l).map_err(|e| Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })
            })
            .collect()
    }

    pub fn to_csv(events: &[TimelineEvent]) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for e in events {
            out.push_str(&format!("{},{},{}\n", e.node_id, e.kind, e.time));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Vec<TimelineEvent>> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h == CSV_HEADER => {}
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected header {CSV_HEADER:?}"),
                })
            }
        }
        lines
            .filter(|(_, l)| !l.is_empty())
            .map(|(i, l)| {
                let err = |message: String| Error::Parse {
                    line: i + 1,
                    message,
                };
                let fields: Vec<&str> = l.split(',').collect();
                let [id, kind, time] = fields[..] else {
                    return Err(err(format!("expected 3 fields, got {}", fields.len())));
                };
                Ok(TimelineEvent {
                    node_id: id.parse().map_err(|e| err(format!("node_id: {e}")))?,
                    kind: kind
                        .parse()
                        .map_err(|_| err(format!("unknown kind {kind:?}")))?,
                    time: time.parse().map_err(|e| err(format!("time: {e}")))?,
                })
            })
            .collect()
    }

    pub fn report_json(report: &CollisionReport) -> String {
        serde_json::to_string_pretty(report).expect("report serializes") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(num_nodes: usize) -> SimConfig {
        SimConfig {
            num_nodes,
            ..SimConfig::default()
        }
    }

    fn node_with(id: usize, f1: f64, signature: u32) -> ImplantNode {
        let c = SimConfig::default();
        ImplantNode {
            id,
            die: DieSample { f1, f2: 20_000.0 },
            seed: 0,
            signature,
            cs_value: communication_slot(signature, &c).unwrap(),
            fsm_state: FsmState::Queried,
            sync_time: 0.0,
        }
    }

    #[test]
    fn slot_padding() {
        let c = SimConfig::default();
        assert_eq!(communication_slot(0, &c).unwrap(), 2_097_152);
        assert_eq!(communication_slot(1, &c).unwrap(), 2_101_248);
        assert_eq!(communication_slot(511, &c).unwrap(), 4_190_208);
        assert!(communication_slot(512, &c).is_err());
    }

    #[test]
    fn start_times() {
        assert!((node_start_time(&node_with(0, 10_000.0, 0)) - 209.7152).abs() < 1e-9);
        assert!((node_start_time(&node_with(0, 10_000.0, 511)) - 419.0208).abs() < 1e-9);
        let a = node_start_time(&node_with(0, 10_000.0, 77));
        let b = node_start_time(&node_with(1, 10_100.0, 77));
        assert!((a / b - 1.01).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::default().validate().is_ok());
        let broken = SimConfig {
            pad_zero_bits: 11,
            ..SimConfig::default()
        };
        let msg = broken.validate().unwrap_err().to_string();
        assert!(msg.contains(SLOT_WIDTH_RULE), "{msg}");
        for c in [
            SimConfig {
                num_nodes: 0,
                ..SimConfig::default()
            },
            SimConfig {
                comm_duration: 0.0,
                ..SimConfig::default()
            },
            SimConfig {
                cycle_period: 0.2,
                ..SimConfig::default()
            },
            SimConfig {
                prbs_order: 10,
                ..SimConfig::default()
            },
            SimConfig {
                sim_duration: f64::NAN,
                ..SimConfig::default()
            },
        ] {
            assert!(c.validate().is_err(), "{c:?}");
        }
        let narrow = SimConfig {
            prbs_order: 5,
            seed_bits: 5,
            pad_zero_bits: 4,
            timer_bits: 10,
            ..SimConfig::default()
        };
        assert!(narrow.validate().is_ok());
    }

    #[test]
    fn network_is_deterministic() {
        let a = build_network(&cfg(3)).unwrap();
        let b = build_network(&cfg(3)).unwrap();
        assert_eq!(a, b);
        let mut starts: Vec<f64> = a.nodes.iter().map(node_start_time).collect();
        starts.sort_by(f64::total_cmp);
        starts.dedup();
        assert_eq!(starts.len(), 3);
    }

    #[test]
    fn no_variation_means_shared_slot() {
        let c = SimConfig {
            ro1: RoSpec::new(10_000.0, 0.0).unwrap(),
            ro2: RoSpec::new(20_000.0, 0.0).unwrap(),
            ..cfg(4)
        };
        let net = build_network(&c).unwrap();
        assert!(net
            .nodes
            .iter()
            .all(|n| n.cs_value == net.nodes[0].cs_value));
        let out = run_simulation(&c).unwrap();
        assert_eq!(out.report.signature_collisions.len(), 1);
        assert_eq!(
            out.report.signature_collisions[0].node_ids,
            vec![0, 1, 2, 3]
        );
        assert!(!out.report.window_overlaps.is_empty());
        assert!(out.report.any_collision);
    }

    #[test]
    fn single_node_has_no_collision() {
        let out = run_simulation(&cfg(1)).unwrap();
        assert!(!out.report.any_collision);
        assert!(out.report.window_overlaps.is_empty());
        assert!(out.timeline.iter().all(|e| e.node_id == 0));
    }

    #[test]
    fn comm_windows_last_comm_duration() {
        let out = run_simulation(&cfg(3)).unwrap();
        for id in 0..3 {
            let ev: Vec<_> = out.timeline.iter().filter(|e| e.node_id == id).collect();
            let starts: Vec<f64> = ev
                .iter()
                .filter(|e| e.kind == EventKind::CommStart)
                .map(|e| e.time)
                .collect();
            let ends: Vec<f64> = ev
                .iter()
                .filter(|e| e.kind == EventKind::CommEnd)
                .map(|e| e.time)
                .collect();
            assert!(!starts.is_empty());
            assert_eq!(starts.len(), ends.len());
            for (s, e) in starts.iter().zip(&ends) {
                assert!((e - s - 0.1).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn per_node_event_order() {
        let out = run_simulation(&SimConfig {
            sim_duration: 1000.0,
            ..cfg(5)
        })
        .unwrap();
        for id in 0..5 {
            let kinds: Vec<_> = out.timeline.iter().filter(|e| e.node_id == id).collect();
            assert!(kinds.windows(2).all(|w| w[0].time <= w[1].time));
            assert_eq!(kinds[0].kind, EventKind::Sync);
            assert_eq!(kinds[1].kind, EventKind::Query);
            assert_eq!(kinds[2].kind, EventKind::CommStart);
            let pattern = [EventKind::CommEnd, EventKind::StimStart, EventKind::StimEnd];
            assert_eq!(
                kinds[3..6].iter().map(|e| e.kind).collect::<Vec<_>>(),
                pattern
            );
            // cycles restart one period after the first CommStart
            let restart = kinds
                .iter()
                .find(|e| e.kind == EventKind::CycleRestart)
                .unwrap();
            assert!((restart.time - kinds[2].time - 100.0).abs() < 1e-9);
        }
    }

    #[test]
    fn identical_nodes_overlap() {
        let c = cfg(2);
        let network = Network {
            config: c.clone(),
            nodes: vec![node_with(0, 10_000.0, 40), node_with(1, 10_000.0, 40)],
        };
        let mut sim = Simulator::new(network);
        sim.schedule_sync(0.0);
        sim.run();
        let report = sim.report();
        assert_eq!(report.signature_collisions[0].node_ids, vec![0, 1]);
        assert!(!report.window_overlaps.is_empty());
        let o = report.window_overlaps[0];
        assert_eq!((o.first, o.second), (0, 1));
        assert!((o.end - o.start - 0.1).abs() < 1e-9);
    }

    #[test]
    fn sync_shifts_start_time() {
        let net = build_network(&cfg(2)).unwrap();
        let before: Vec<f64> = net.nodes.iter().map(node_start_time).collect();
        let net = broadcast_sync(net, 12.5);
        for (n, b) in net.nodes.iter().zip(&before) {
            assert_eq!(n.fsm_state, FsmState::Counting);
            assert!((node_start_time(n) - (b + 12.5)).abs() < 1e-9);
        }
        let twice = broadcast_sync(broadcast_sync(net.clone(), 12.5), 12.5);
        assert_eq!(twice, net);
    }

    #[test]
    fn sync_mid_communication_aborts() {
        let c = SimConfig {
            sim_duration: 1000.0,
            ..cfg(1)
        };
        let net = build_network(&c).unwrap();
        let start = node_start_time(&net.nodes[0]);
        let mut sim = Simulator::new(net);
        sim.schedule_sync(0.0);
        let resync = start + 0.05;
        sim.schedule_sync(resync);
        sim.run();
        let tl = sim.timeline();
        let first_end = tl.iter().position(|e| e.kind == EventKind::CommEnd);
        let second_sync = tl.iter().rposition(|e| e.kind == EventKind::Sync).unwrap();
        // no CommEnd before the second sync: the window was cut short
        assert!(first_end.is_none_or(|i| i > second_sync));
        let w = sim.comm_windows()[0];
        assert_eq!((w.start, w.end), (start, resync));
        // after the resync the node starts again one slot later
        let restart = tl[second_sync + 1..]
            .iter()
            .find(|e| e.kind == EventKind::CommStart)
            .unwrap();
        assert!((restart.time - (resync + start)).abs() < 1e-9);
    }

    #[test]
    fn events_past_horizon_are_dropped() {
        let out = run_simulation(&SimConfig {
            sim_duration: 100.0,
            ..cfg(3)
        })
        .unwrap();
        // queries happen near 209 s, past the horizon
        assert!(out.timeline.iter().all(|e| e.kind == EventKind::Sync));
    }

    #[test]
    fn tick_mode_matches_closed_form() {
        for seed in 0..4 {
            let c = SimConfig {
                rng_seed: seed,
                ..cfg(2)
            };
            let tick = SimConfig {
                tick_accurate: true,
                ..c.clone()
            };
            let (a, b) = (run_simulation(&c).unwrap(), run_simulation(&tick).unwrap());
            assert_eq!(a.network.nodes, b.network.nodes);
            assert_eq!(a.timeline, b.timeline);
        }
        let nominal = SimConfig {
            ro1: RoSpec::new(10_000.0, 0.0).unwrap(),
            ro2: RoSpec::new(20_000.0, 0.0).unwrap(),
            tick_accurate: true,
            ..cfg(1)
        };
        assert_eq!(build_network(&nominal).unwrap().nodes[0].seed, 0);
    }

    #[test]
    fn export_roundtrip() {
        let out = run_simulation(&cfg(3)).unwrap();
        let jsonl = export::to_jsonl(&out.timeline);
        assert_eq!(export::from_jsonl(&jsonl).unwrap(), out.timeline);
        let csv = export::to_csv(&out.timeline);
        let parsed = export::from_csv(&csv).unwrap();
        assert_eq!(parsed, out.timeline);
        assert_eq!(export::to_csv(&parsed), csv);
        assert!(export::from_csv("bad\n").is_err());
        assert!(export::from_csv("node_id,kind,time\n1,Nope,2\n").is_err());
        let report = export::report_json(&out.report);
        let back: CollisionReport = serde_json::from_str(&report).unwrap();
        assert_eq!(export::report_json(&back), report);
    }
}
