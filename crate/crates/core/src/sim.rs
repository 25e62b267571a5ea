use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::alphabet::{AlphabetKind, AlphabetRef};
use crate::error::{Error, Result};
use crate::numfmt::fmt_json_f64;
use crate::tree::NewickNode;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// Run until simulation time T.
    AtTime(f64),
    /// Run until N boxes are simultaneously occupied.
    AtExtant(usize),
}

#[derive(Debug, Clone)]
pub struct NbpConfig {
    pub alphabet: AlphabetRef,
    /// Substitution events per unit time per site.
    pub substitution_rate: f64,
    pub speciation_rate: f64,
    pub extinction_rate: f64,
    pub n_sites: usize,
    pub stop: StopRule,
    /// Starting trait vector; None draws one symbol per site uniformly
    /// (gap excluded) from the config stream.
    pub root_state: Option<Vec<u16>>,
    pub seed: u64,
    /// Substitutions may target the gap symbol; requires an alphabet that
    /// carries the gap as a character.
    pub allow_deletion: bool,
    /// Hard cap on applied events; at_extant with extinction close to or
    /// above speciation may otherwise never finish.
    pub max_events: u64,
}

impl NbpConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::BadSimConfig(msg));
        if !self.substitution_rate.is_finite() || self.substitution_rate < 0.0 {
            return bad(format!(
                "substitution rate must be finite and >= 0, got {}",
                self.substitution_rate
            ));
        }
        if !self.speciation_rate.is_finite() || self.speciation_rate <= 0.0 {
            return bad(format!(
                "speciation rate must be finite and > 0, got {}",
                self.speciation_rate
            ));
        }
        if !self.extinction_rate.is_finite() || self.extinction_rate < 0.0 {
            return bad(format!(
                "extinction rate must be finite and >= 0, got {}",
                self.extinction_rate
            ));
        }
        if self.n_sites == 0 {
            return bad("n_sites must be at least 1".into());
        }
        match self.stop {
            StopRule::AtTime(t) if !(t > 0.0 && t.is_finite()) => {
                return bad(format!("stop time must be finite and > 0, got {t}"));
            }
            StopRule::AtExtant(n) if n < 2 => {
                return bad(format!("stop extant count must be at least 2, got {n}"));
            }
            _ => {}
        }
        let has_gap = self.alphabet.gap_index().is_some();
        if self.allow_deletion && !has_gap {
            return bad("deletion needs the gap carried as an alphabet character".into());
        }
        if !self.allow_deletion && has_gap {
            return bad("gap is in the alphabet but deletion is not enabled".into());
        }
        if let Some(root) = &self.root_state {
            if root.len() != self.n_sites {
                return bad(format!(
                    "root state has {} sites, config says {}",
                    root.len(),
                    self.n_sites
                ));
            }
            let k = self.alphabet.size() as u16;
            if root.iter().any(|&v| v >= k) {
                return bad("root state contains an out-of-range symbol".into());
            }
        }
        if self.max_events == 0 {
            return bad("event budget must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    Substitution { site: usize, from: u16, to: u16 },
    Speciation { child: u64 },
    Extinction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub time: f64,
    pub lineage: u64,
    pub kind: EventKind,
}

#[derive(Debug, Clone)]
pub struct SimResult {
    /// Genealogy of the extant boxes, extinct lineages pruned, rooted at the
    /// origin; None when the whole clade died.
    pub tree: Option<NewickNode>,
    pub extant: Vec<String>,
    /// Trait vectors parallel to `extant`.
    pub traits: Vec<Vec<u16>>,
    pub alphabet: AlphabetRef,
    pub n_sites: usize,
    pub events: Vec<EventRecord>,
    pub stop_time: f64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

/// Independent per-lineage stream: event order never depends on how the
/// lineage set is iterated.
fn lineage_rng(seed: u64, lineage: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(splitmix64(seed) ^ splitmix64(lineage.wrapping_add(1)))
}

fn exp_wait<R: Rng>(rng: &mut R, rate: f64) -> f64 {
    let u: f64 = rng.random();
    -(1.0 - u).ln() / rate
}

/// Uniform draw over the alphabet excluding `current`.
fn other_symbol<R: Rng>(rng: &mut R, k: usize, current: u16) -> u16 {
    let draw = rng.random_range(0..k - 1) as u16;
    if draw >= current {
        draw + 1
    } else {
        draw
    }
}

/// Evolves one symbol for `duration` under the exponential substitution
/// clock: waits are Exp(rate), each event replaces the symbol uniformly among
/// the other alphabet letters. Zero rate or duration returns the input.
pub fn evolve_symbol<R: Rng>(
    state: u16,
    alphabet_size: usize,
    rate: f64,
    duration: f64,
    rng: &mut R,
) -> u16 {
    assert!(duration >= 0.0, "duration must be nonnegative");
    if rate <= 0.0 || duration == 0.0 {
        return state;
    }
    let mut t = 0.0;
    let mut s = state;
    loop {
        t += exp_wait(rng, rate);
        if t > duration {
            return s;
        }
        s = other_symbol(rng, alphabet_size, s);
    }
}

struct Pending {
    time: f64,
    lineage: u64,
    kind: EventKind,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.lineage == other.lineage
    }
}
impl Eq for Pending {}
impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Pending {
    // BinaryHeap is a max-heap; reverse so the earliest event pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.lineage.cmp(&self.lineage))
    }
}

struct Lineage {
    death: Option<f64>,
    children: Vec<(f64, u64)>,
    traits: Vec<u16>,
    rng: ChaCha12Rng,
    alive: bool,
}

struct Sim<'a> {
    cfg: &'a NbpConfig,
    lineages: Vec<Lineage>,
    heap: BinaryHeap<Pending>,
    alive: usize,
    events: Vec<EventRecord>,
}

impl<'a> Sim<'a> {
    fn spawn(&mut self, birth: f64, traits: Vec<u16>) -> u64 {
        let id = self.lineages.len() as u64;
        let mut lin = Lineage {
            death: None,
            children: Vec::new(),
            traits,
            rng: lineage_rng(self.cfg.seed, id),
            alive: true,
        };
        if let Some(event) = next_event(self.cfg, id, birth, &mut lin) {
            self.heap.push(event);
        }
        self.lineages.push(lin);
        self.alive += 1;
        id
    }
}

/// Draws the lineage's next event from its own stream: one exponential wait
/// at the total rate, then the event category in fixed order (substitution
/// by site, speciation, extinction).
fn next_event(cfg: &NbpConfig, id: u64, now: f64, lin: &mut Lineage) -> Option<Pending> {
    let sub_total = cfg.substitution_rate * cfg.n_sites as f64;
    let total = sub_total + cfg.speciation_rate + cfg.extinction_rate;
    if total <= 0.0 {
        return None;
    }
    let wait = exp_wait(&mut lin.rng, total);
    let pick: f64 = lin.rng.random::<f64>() * total;
    let kind = if pick < sub_total {
        let site = lin.rng.random_range(0..cfg.n_sites);
        let from = lin.traits[site];
        let to = other_symbol(&mut lin.rng, cfg.alphabet.size(), from);
        EventKind::Substitution { site, from, to }
    } else if pick < sub_total + cfg.speciation_rate {
        // child id resolved at application time
        EventKind::Speciation { child: u64::MAX }
    } else {
        EventKind::Extinction
    };
    Some(Pending {
        time: now + wait,
        lineage: id,
        kind,
    })
}

/// Runs the box process: every living box carries exponential switches for
/// per-site substitution, speciation (traits copied to a brand new box), and
/// extinction (the box vanishes). Deterministic given the seed.
pub fn simulate(cfg: &NbpConfig) -> Result<SimResult> {
    cfg.validate()?;
    let root_traits = match &cfg.root_state {
        Some(v) => v.clone(),
        None => {
            let mut rng = lineage_rng(cfg.seed, u64::MAX);
            let k = cfg.alphabet.size();
            let gap = cfg.alphabet.gap_index();
            (0..cfg.n_sites)
                .map(|_| loop {
                    let s = rng.random_range(0..k) as u16;
                    if Some(s) != gap {
                        break s;
                    }
                })
                .collect()
        }
    };

    let mut sim = Sim {
        cfg,
        lineages: Vec::new(),
        heap: BinaryHeap::new(),
        alive: 0,
        events: Vec::new(),
    };
    sim.spawn(0.0, root_traits);

    let mut applied: u64 = 0;
    let stop_time;
    loop {
        if let StopRule::AtExtant(n) = cfg.stop {
            if sim.alive >= n {
                stop_time = sim.events.last().map(|e| e.time).unwrap_or(0.0);
                break;
            }
        }
        if sim.alive == 0 {
            stop_time = sim.events.last().map(|e| e.time).unwrap_or(0.0);
            break;
        }
        let Some(pending) = sim.heap.peek() else {
            return Err(Error::BadSimConfig(
                "no pending events with living lineages".into(),
            ));
        };
        if let StopRule::AtTime(t_max) = cfg.stop {
            if pending.time > t_max {
                stop_time = t_max;
                break;
            }
        }
        let Pending {
            time,
            lineage,
            kind,
        } = sim.heap.pop().expect("peeked");
        applied += 1;
        if applied > cfg.max_events {
            return Err(Error::EventBudgetExceeded(cfg.max_events));
        }
        match kind {
            EventKind::Substitution { site, from, to } => {
                sim.lineages[lineage as usize].traits[site] = to;
                sim.events.push(EventRecord {
                    time,
                    lineage,
                    kind: EventKind::Substitution { site, from, to },
                });
                let lin = &mut sim.lineages[lineage as usize];
                if let Some(e) = next_event(cfg, lineage, time, lin) {
                    sim.heap.push(e);
                }
            }
            EventKind::Speciation { .. } => {
                let traits = sim.lineages[lineage as usize].traits.clone();
                let child = sim.spawn(time, traits);
                sim.lineages[lineage as usize].children.push((time, child));
                sim.events.push(EventRecord {
                    time,
                    lineage,
                    kind: EventKind::Speciation { child },
                });
                let lin = &mut sim.lineages[lineage as usize];
                if let Some(e) = next_event(cfg, lineage, time, lin) {
                    sim.heap.push(e);
                }
            }
            EventKind::Extinction => {
                let lin = &mut sim.lineages[lineage as usize];
                lin.alive = false;
                lin.death = Some(time);
                sim.alive -= 1;
                sim.events.push(EventRecord {
                    time,
                    lineage,
                    kind: EventKind::Extinction,
                });
            }
        }
    }

    let mut extant_ids: Vec<u64> = Vec::new();
    for (id, lin) in sim.lineages.iter_mut().enumerate() {
        if lin.alive {
            lin.death = Some(stop_time);
            extant_ids.push(id as u64);
        }
    }
    let mut labels = vec![String::new(); sim.lineages.len()];
    let mut extant = Vec::with_capacity(extant_ids.len());
    let mut traits = Vec::with_capacity(extant_ids.len());
    for (k, &id) in extant_ids.iter().enumerate() {
        let label = format!("box_{}", k + 1);
        labels[id as usize] = label.clone();
        extant.push(label);
        traits.push(sim.lineages[id as usize].traits.clone());
    }

    let tree = if extant_ids.is_empty() {
        None
    } else {
        segment(&sim.lineages, &labels, 0, 0.0).map(|node| NewickNode {
            label: None,
            length: None,
            children: vec![node],
        })
    };

    Ok(SimResult {
        tree,
        extant,
        traits,
        alphabet: cfg.alphabet.clone(),
        n_sites: cfg.n_sites,
        events: sim.events,
        stop_time,
    })
}

/// Builds the pruned genealogy below lineage `id` starting at `t0`: extinct
/// subtrees drop out, pass-through points merge into one branch.
fn segment(lineages: &[Lineage], labels: &[String], id: usize, t0: f64) -> Option<NewickNode> {
    let lin = &lineages[id];
    let split = lin.children.iter().find(|(t, _)| *t > t0);
    match split {
        None => {
            if !lin.alive {
                return None;
            }
            let death = lin.death.expect("extant lineages are sealed at stop");
            Some(NewickNode {
                label: Some(labels[id].clone()),
                length: Some(death - t0),
                children: vec![],
            })
        }
        Some(&(t_split, child)) => {
            let cont = segment(lineages, labels, id, t_split);
            let branch = segment(lineages, labels, child as usize, t_split);
            match (cont, branch) {
                (None, None) => None,
                (Some(mut only), None) | (None, Some(mut only)) => {
                    only.length = Some(only.length.unwrap_or(0.0) + (t_split - t0));
                    Some(only)
                }
                (Some(a), Some(b)) => Some(NewickNode {
                    label: None,
                    length: Some(t_split - t0),
                    children: vec![a, b],
                }),
            }
        }
    }
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

/// One JSON object per event, ordered as logged.
pub fn events_jsonl(result: &SimResult) -> String {
    let a = &result.alphabet;
    let mut out = String::new();
    for e in &result.events {
        let time = fmt_json_f64(e.time);
        match &e.kind {
            EventKind::Substitution { site, from, to } => {
                let _ = writeln!(
                    out,
                    "{{\"time\":{time},\"lineage\":{},\"event\":\"substitution\",\"site\":{site},\"from\":\"{}\",\"to\":\"{}\"}}",
                    e.lineage,
                    json_escape(a.decode(*from)),
                    json_escape(a.decode(*to)),
                );
            }
            EventKind::Speciation { child } => {
                let _ = writeln!(
                    out,
                    "{{\"time\":{time},\"lineage\":{},\"event\":\"speciation\",\"child\":{child}}}",
                    e.lineage,
                );
            }
            EventKind::Extinction => {
                let _ = writeln!(
                    out,
                    "{{\"time\":{time},\"lineage\":{},\"event\":\"extinction\"}}",
                    e.lineage,
                );
            }
        }
    }
    out
}

/// True genealogy as Newick plus the extant traits as FASTA (sequence
/// alphabets) or a tab-separated trait table (morph).
pub fn export_truth(result: &SimResult) -> Result<(String, String)> {
    if result.extant.is_empty() {
        return Err(Error::EmptyExtantSet);
    }
    let tree = result.tree.as_ref().expect("extant set implies a tree");
    let newick = crate::tree::write_newick_rooted(tree);
    let a = &result.alphabet;
    let mut table = String::new();
    if a.kind() == AlphabetKind::Morph {
        table.push_str("taxon");
        for s in 1..=result.n_sites {
            let _ = write!(table, "\ttrait_{s}");
        }
        table.push('\n');
        for (label, row) in result.extant.iter().zip(&result.traits) {
            table.push_str(label);
            for &v in row {
                let _ = write!(table, "\t{}", a.decode(v));
            }
            table.push('\n');
        }
    } else {
        for (label, row) in result.extant.iter().zip(&result.traits) {
            let _ = writeln!(table, ">{label}");
            let text: String = row.iter().map(|&v| a.decode(v)).collect::<String>();
            let chars: Vec<char> = text.chars().collect();
            for chunk in chars.chunks(60) {
                let _ = writeln!(table, "{}", chunk.iter().collect::<String>());
            }
        }
    }
    Ok((newick, table))
}
