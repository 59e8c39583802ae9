//! Plan: backtracking search for a complete assignment, pruned by nogoods
//! learned from earlier attempts.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checker::{evaluate, AttemptHistory};
use crate::constraints::Rule;
use crate::csp::{Assignment, CspInstance, Place, SlotId, SlotKind, Value};
use crate::query::TransportPref;
use crate::sandbox::{fold, Allowance, GroundMode, RoomType, StayRec};
use crate::space::{attraction_candidates, restaurant_candidates, stay_candidates, transport_candidates, SlotDomains};

pub use crate::space::{route_skeleton, Leg, Route, RouteError};

pub const DEFAULT_NODE_CAP: u64 = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum PlanError {
    #[error("no candidates for {0}")]
    EmptyDomain(SlotId),
    #[error("no route: {0}")]
    NoRoute(String),
}

impl From<RouteError> for PlanError {
    fn from(e: RouteError) -> Self {
        match e {
            RouteError::NoRoute(s) => PlanError::NoRoute(s),
        }
    }
}

/// Slot values that must not all appear together again.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Nogood {
    pub pairs: Vec<(SlotId, Value)>,
    pub source: String,
}

impl Nogood {
    pub fn matches(&self, a: &Assignment) -> bool {
        self.pairs.iter().all(|(s, v)| a.get(*s) == Some(v))
    }
}

/// Nogoods from every violation recorded in the history.
pub fn nogoods(hist: &AttemptHistory) -> Vec<Nogood> {
    let mut out: Vec<Nogood> = Vec::new();
    for attempt in hist.iter() {
        for v in &attempt.feedback.violations {
            let pairs: Vec<(SlotId, Value)> = v
                .slots
                .iter()
                .map(|s| (*s, attempt.assignment.get(*s).cloned().unwrap_or(Value::Empty)))
                .collect();
            if pairs.is_empty() {
                continue;
            }
            let ng = Nogood {
                pairs,
                source: v.constraint_id.clone(),
            };
            if !out.contains(&ng) {
                out.push(ng);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanStats {
    pub nodes: u64,
    pub backtracks: u64,
    pub pruned_budget: u64,
    pub pruned_nogood: u64,
    pub routes_tried: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanOutcome {
    pub assignment: Assignment,
    /// Set when no feasible assignment was found and the least-violating
    /// one is returned instead.
    pub best_effort: bool,
    pub stats: PlanStats,
}

/// The planning agent boundary.
pub trait Planner: Send {
    fn plan(&mut self, inst: &CspInstance, hist: &AttemptHistory) -> Result<PlanOutcome, PlanError>;
}

#[derive(Debug, Clone)]
pub struct BacktrackingPlanner {
    pub node_cap: u64,
}

impl Default for BacktrackingPlanner {
    fn default() -> Self {
        Self {
            node_cap: DEFAULT_NODE_CAP,
        }
    }
}

impl Planner for BacktrackingPlanner {
    fn plan(&mut self, inst: &CspInstance, hist: &AttemptHistory) -> Result<PlanOutcome, PlanError> {
        plan(inst, hist, self.node_cap)
    }
}

/// Hands out recorded assignments first, then defers to the backtracking
/// planner.
#[derive(Debug, Clone, Default)]
pub struct ReplayPlanner {
    pub queue: std::collections::VecDeque<Assignment>,
    pub fallback: BacktrackingPlanner,
}

impl ReplayPlanner {
    pub fn new(plans: Vec<Assignment>) -> Self {
        Self {
            queue: plans.into(),
            fallback: BacktrackingPlanner::default(),
        }
    }
}

impl Planner for ReplayPlanner {
    fn plan(&mut self, inst: &CspInstance, hist: &AttemptHistory) -> Result<PlanOutcome, PlanError> {
        match self.queue.pop_front() {
            Some(assignment) => Ok(PlanOutcome {
                assignment,
                best_effort: false,
                stats: PlanStats::default(),
            }),
            None => self.fallback.plan(inst, hist),
        }
    }
}

/// Filters taken from the instance's hard constraints.
#[derive(Debug, Default)]
struct Gates {
    budget: Option<f64>,
    cuisines: Vec<String>,
    allowances: Vec<Allowance>,
    room_type: Option<RoomType>,
    transport: Vec<TransportPref>,
    min_nights: BTreeMap<String, u32>,
    run_length_rule: bool,
}

impl Gates {
    fn from(inst: &CspInstance) -> Self {
        let mut g = Gates::default();
        for c in &inst.constraints {
            match &c.rule {
                Rule::Budget { limit } => g.budget = Some(g.budget.map_or(*limit, |b: f64| b.min(*limit))),
                Rule::Cuisine { cuisine } => g.cuisines.push(cuisine.clone()),
                Rule::RoomRule { allowance } => g.allowances.push(*allowance),
                Rule::RoomType { wanted } => g.room_type = Some(*wanted),
                Rule::Transport { pref } => g.transport.push(*pref),
                Rule::MinNightsGate { city, nights } => {
                    let e = g.min_nights.entry(fold(city)).or_insert(*nights);
                    *e = (*e).min(*nights);
                }
                Rule::MinNightsRespected => g.run_length_rule = true,
                _ => {}
            }
        }
        g
    }

    fn transport_ok(&self, v: &Value) -> bool {
        let drive = matches!(v, Value::Ground { mode: GroundMode::SelfDriving, .. });
        self.transport.iter().all(|p| match p {
            TransportPref::NoFlights => !matches!(v, Value::Flight { .. }),
            TransportPref::NoSelfDriving => !drive,
            TransportPref::MustSelfDrive => drive,
        })
    }

    fn stay_ok(&self, s: &StayRec, nights: u32) -> bool {
        if self.allowances.iter().any(|a| s.prohibits(*a)) {
            return false;
        }
        if self.room_type.is_some_and(|t| !s.room_type.satisfies(t)) {
            return false;
        }
        if self.min_nights.get(&fold(&s.city)).is_some_and(|n| s.min_nights > *n) {
            return false;
        }
        !(self.run_length_rule && s.min_nights > nights)
    }
}

#[derive(Debug, Clone)]
struct Cand {
    value: Value,
    cost: f64,
    key: Option<(String, String)>,
    drive: Option<bool>,
    mask: u64,
}

#[derive(Debug, Clone)]
struct Var {
    slots: Vec<SlotId>,
    cands: Vec<Cand>,
    /// Meal slots of the same day share a group; their choices are kept in
    /// non-decreasing candidate order to skip permutations.
    group: Option<u32>,
}

fn cand(value: Value, cost: f64) -> Cand {
    Cand {
        value,
        cost,
        key: None,
        drive: None,
        mask: 0,
    }
}

fn empty_cand() -> Cand {
    cand(Value::Empty, 0.0)
}

/// Fixed slots (labels and designated-empty fields) and the decision
/// variables for one route, in search order.
fn layout(inst: &CspInstance, gates: &Gates, route: &Route) -> (Assignment, Vec<Var>) {
    let q = &inst.query;
    let d = &inst.domains;
    let n = q.days;
    let mut fixed = Assignment::new(n);
    let mut vars = Vec::new();
    for day in 1..=n {
        fixed.set(SlotId::new(day, SlotKind::CurrentCity), route.label(day).clone());
        if route.leg_on(day).is_none() {
            fixed.set(SlotId::new(day, SlotKind::Transportation), Value::Empty);
        }
    }
    fixed.set(SlotId::new(n, SlotKind::Accommodation), Value::Empty);

    for leg in &route.legs {
        let cands = transport_candidates(q, d, leg)
            .into_iter()
            .filter(|(v, _)| gates.transport_ok(v))
            .map(|(v, c)| {
                let drive = matches!(v, Value::Ground { mode: GroundMode::SelfDriving, .. });
                Cand {
                    drive: Some(drive),
                    ..cand(v, c)
                }
            })
            .collect();
        vars.push(Var {
            slots: vec![SlotId::new(leg.day, SlotKind::Transportation)],
            cands,
            group: None,
        });
    }

    let nights = q.nights_per_city();
    for (j, city) in route.cities.iter().enumerate() {
        let first = 2 * j as u32 + 1;
        let slots: Vec<SlotId> = (first..first + nights)
            .filter(|day| *day < n)
            .map(|day| SlotId::new(day, SlotKind::Accommodation))
            .collect();
        let mut cands: Vec<Cand> = stay_candidates(d, city)
            .into_iter()
            .filter(|s| gates.stay_ok(s, slots.len() as u32))
            .map(|s| {
                let night = crate::cost::stay_night_cost(s, q.people);
                cand(Value::Stay(Place::new(&s.name, &s.city)), night * slots.len() as f64)
            })
            .collect();
        cands.sort_by(|a, b| a.cost.total_cmp(&b.cost));
        vars.push(Var {
            slots,
            cands,
            group: None,
        });
    }

    let mask_of = |r: &crate::sandbox::RestaurantRec| -> u64 {
        gates
            .cuisines
            .iter()
            .enumerate()
            .filter(|(_, c)| r.serves(c))
            .fold(0u64, |m, (i, _)| m | (1 << i))
    };
    for day in 1..=n {
        let label = route.label(day);
        let travel = label.is_travel();
        let mut pool: Vec<Cand> = Vec::new();
        for city in label.cities() {
            for r in restaurant_candidates(d, city) {
                let p = Place::new(&r.name, &r.city);
                if pool.iter().any(|c| c.key.as_ref() == Some(&p.key())) {
                    continue;
                }
                pool.push(Cand {
                    key: Some(p.key()),
                    mask: mask_of(r),
                    ..cand(Value::Restaurant(p), crate::cost::meal_cost(r, q.people))
                });
            }
        }
        pool.sort_by(|a, b| a.cost.total_cmp(&b.cost));
        if travel {
            pool.insert(0, empty_cand());
        }
        for kind in SlotKind::MEALS {
            vars.push(Var {
                slots: vec![SlotId::new(day, kind)],
                cands: pool.clone(),
                group: Some(day),
            });
        }
    }

    for day in 1..=n {
        let label = route.label(day);
        let mut cands: Vec<Cand> = Vec::new();
        if label.is_travel() {
            cands.push(empty_cand());
        }
        for city in label.cities() {
            for p in attraction_candidates(d, city) {
                cands.push(cand(Value::Attractions { places: vec![p] }, 0.0));
            }
        }
        vars.push(Var {
            slots: vec![SlotId::new(day, SlotKind::Attraction)],
            cands,
            group: None,
        });
    }
    (fixed, vars)
}

struct Search<'a> {
    inst: &'a CspInstance,
    vars: Vec<Var>,
    nogoods: &'a [Nogood],
    by_slot: BTreeMap<SlotId, Vec<usize>>,
    budget: Option<f64>,
    need_mask: u64,
    suffix_cost: Vec<f64>,
    suffix_mask: Vec<u64>,
    a: Assignment,
    choice: Vec<usize>,
    used: HashSet<(String, String)>,
    drives: u32,
    others: u32,
    covered_counts: Vec<u32>,
    committed: f64,
    stats: &'a mut PlanStats,
    cap: u64,
    best_leaf: Option<(usize, Assignment)>,
}

impl<'a> Search<'a> {
    fn covered(&self) -> u64 {
        self.covered_counts
            .iter()
            .enumerate()
            .filter(|(_, n)| **n > 0)
            .fold(0, |m, (i, _)| m | (1 << i))
    }

    fn violates_nogood(&self, slots: &[SlotId]) -> bool {
        slots.iter().any(|s| {
            self.by_slot
                .get(s)
                .is_some_and(|ids| ids.iter().any(|&i| self.nogoods[i].matches(&self.a)))
        })
    }

    fn dfs(&mut self, i: usize) -> bool {
        if i == self.vars.len() {
            let violations = evaluate(self.inst, &self.a);
            if violations.is_empty() {
                return true;
            }
            if self.best_leaf.as_ref().is_none_or(|(n, _)| violations.len() < *n) {
                self.best_leaf = Some((violations.len(), self.a.clone()));
            }
            return false;
        }
        let prev_same_group = i > 0 && self.vars[i].group.is_some() && self.vars[i - 1].group == self.vars[i].group;
        for ci in 0..self.vars[i].cands.len() {
            if self.stats.nodes >= self.cap {
                return false;
            }
            if prev_same_group {
                let prev = self.choice[i - 1];
                if ci < prev || (ci == prev && !self.vars[i].cands[ci].value.is_empty()) {
                    continue;
                }
            }
            self.stats.nodes += 1;
            let c = self.vars[i].cands[ci].clone();
            match c.drive {
                Some(true) if self.others > 0 => continue,
                Some(false) if self.drives > 0 => continue,
                _ => {}
            }
            if let Some(k) = &c.key {
                if self.used.contains(k) {
                    continue;
                }
            }
            if let Some(b) = self.budget {
                if self.committed + c.cost + self.suffix_cost[i + 1] > b + 1e-9 {
                    self.stats.pruned_budget += 1;
                    continue;
                }
            }
            let covered = self.covered() | c.mask;
            if self.need_mask & !covered & !self.suffix_mask[i + 1] != 0 {
                continue;
            }

            let slots = self.vars[i].slots.clone();
            for s in &slots {
                self.a.set(*s, c.value.clone());
            }
            if self.violates_nogood(&slots) {
                self.stats.pruned_nogood += 1;
                for s in &slots {
                    self.a.unset(*s);
                }
                continue;
            }
            self.apply(&c, true);
            self.choice[i] = ci;
            if self.dfs(i + 1) {
                return true;
            }
            self.apply(&c, false);
            for s in &slots {
                self.a.unset(*s);
            }
            self.stats.backtracks += 1;
        }
        false
    }

    fn apply(&mut self, c: &Cand, on: bool) {
        let sign = if on { 1.0 } else { -1.0 };
        self.committed += sign * c.cost;
        match (c.drive, on) {
            (Some(true), true) => self.drives += 1,
            (Some(true), false) => self.drives -= 1,
            (Some(false), true) => self.others += 1,
            (Some(false), false) => self.others -= 1,
            _ => {}
        }
        if let Some(k) = &c.key {
            if on {
                self.used.insert(k.clone());
            } else {
                self.used.remove(k);
            }
        }
        for (i, n) in self.covered_counts.iter_mut().enumerate() {
            if c.mask & (1 << i) != 0 {
                if on {
                    *n += 1;
                } else {
                    *n -= 1;
                }
            }
        }
    }
}

/// Runs the backtracking search over every route, then falls back to the
/// least-violating assignment.
pub fn plan(inst: &CspInstance, hist: &AttemptHistory, node_cap: u64) -> Result<PlanOutcome, PlanError> {
    if inst.domains.is_empty() {
        return Err(PlanError::EmptyDomain(SlotId::new(1, SlotKind::Transportation)));
    }
    let routes = route_skeleton(&inst.query, &inst.domains)?;
    let gates = Gates::from(inst);
    let goods = nogoods(hist);
    let mut by_slot: BTreeMap<SlotId, Vec<usize>> = BTreeMap::new();
    for (i, ng) in goods.iter().enumerate() {
        for (s, _) in &ng.pairs {
            let e = by_slot.entry(*s).or_default();
            if !e.contains(&i) {
                e.push(i);
            }
        }
    }
    let need_mask = if gates.cuisines.is_empty() {
        0
    } else {
        (1u64 << gates.cuisines.len().min(63)) - 1
    };

    let mut stats = PlanStats::default();
    let mut best_leaf: Option<(usize, Assignment)> = None;
    for route in &routes {
        if stats.nodes >= node_cap {
            break;
        }
        stats.routes_tried += 1;
        let (fixed, vars) = layout(inst, &gates, route);
        if goods.iter().any(|g| g.matches(&fixed)) {
            continue;
        }
        let mut suffix_cost = vec![0.0; vars.len() + 1];
        let mut suffix_mask = vec![0u64; vars.len() + 1];
        for i in (0..vars.len()).rev() {
            let min = vars[i].cands.iter().map(|c| c.cost).fold(f64::INFINITY, f64::min);
            suffix_cost[i] = suffix_cost[i + 1] + if min.is_finite() { min } else { 0.0 };
            suffix_mask[i] = suffix_mask[i + 1] | vars[i].cands.iter().fold(0, |m, c| m | c.mask);
        }
        let nvars = vars.len();
        let mut search = Search {
            inst,
            vars,
            nogoods: &goods,
            by_slot: by_slot.clone(),
            budget: gates.budget,
            need_mask,
            suffix_cost,
            suffix_mask,
            a: fixed,
            choice: vec![0; nvars],
            used: HashSet::new(),
            drives: 0,
            others: 0,
            covered_counts: vec![0; gates.cuisines.len().min(63)],
            committed: 0.0,
            stats: &mut stats,
            cap: node_cap,
            best_leaf: None,
        };
        let found = search.dfs(0);
        let leaf = search.best_leaf.take();
        if found {
            let a = search.a;
            return Ok(PlanOutcome {
                assignment: a,
                best_effort: false,
                stats,
            });
        }
        if let Some((n, a)) = leaf {
            if best_leaf.as_ref().is_none_or(|(m, _)| n < *m) {
                best_leaf = Some((n, a));
            }
        }
    }

    let mut best: Option<(usize, Assignment)> = best_leaf;
    for route in routes.iter().take(BEST_EFFORT_ROUTES) {
        let (fixed, vars) = layout(inst, &gates, route);
        let a = relaxed(inst, &gates, route, fixed, &vars, &goods);
        let n = evaluate(inst, &a).len();
        if best.as_ref().is_none_or(|(m, _)| n < *m) {
            best = Some((n, a));
        }
    }
    let (count, mut assignment) = best.expect("at least one route");
    if let Some((prev_count, prev)) = best_previous(inst, hist) {
        if count > prev_count {
            assignment = prev;
        }
    }
    Ok(PlanOutcome {
        assignment,
        best_effort: true,
        stats,
    })
}

const BEST_EFFORT_ROUTES: usize = 20;

/// The earliest attempt with the fewest violations.
fn best_previous(inst: &CspInstance, hist: &AttemptHistory) -> Option<(usize, Assignment)> {
    let mut best: Option<(usize, Assignment)> = None;
    for a in hist.iter() {
        let n = evaluate(inst, &a.assignment).len();
        if best.as_ref().is_none_or(|(m, _)| n < *m) {
            best = Some((n, a.assignment.clone()));
        }
    }
    best
}

/// Greedy least-violating assignment for a route: gated cheapest choices
/// where possible, ungated ones otherwise, "-" when nothing is known.
fn relaxed(
    inst: &CspInstance,
    gates: &Gates,
    route: &Route,
    fixed: Assignment,
    vars: &[Var],
    goods: &[Nogood],
) -> Assignment {
    let q = &inst.query;
    let d = &inst.domains;
    let mut a = fixed;

    let mut drive_state: Option<bool> = None;
    for leg in &route.legs {
        let all = transport_candidates(q, d, leg);
        let pick = all
            .iter()
            .filter(|(v, _)| gates.transport_ok(v))
            .find(|(v, _)| {
                let drive = matches!(v, Value::Ground { mode: GroundMode::SelfDriving, .. });
                drive_state.is_none_or(|s| s == drive)
            })
            .or_else(|| all.iter().find(|(v, _)| gates.transport_ok(v)))
            .or_else(|| all.first());
        let v = pick.map_or(Value::Empty, |(v, _)| v.clone());
        if drive_state.is_none() && !v.is_empty() {
            drive_state = Some(matches!(v, Value::Ground { mode: GroundMode::SelfDriving, .. }));
        }
        a.set(SlotId::new(leg.day, SlotKind::Transportation), v);
    }

    for v in vars.iter().filter(|v| v.slots.first().is_some_and(|s| s.kind == SlotKind::Accommodation)) {
        let city = v.slots.first().and_then(|s| route.label(s.day).end_city()).unwrap_or_default();
        let value = v.cands.first().map(|c| c.value.clone()).unwrap_or_else(|| {
            let mut all = stay_candidates(d, city);
            all.sort_by(|x, y| x.price.total_cmp(&y.price));
            all.first()
                .map_or(Value::Empty, |s| Value::Stay(Place::new(&s.name, &s.city)))
        });
        for s in &v.slots {
            a.set(*s, value.clone());
        }
    }

    let mut used: HashSet<(String, String)> = HashSet::new();
    let meal_vars: Vec<&Var> = vars.iter().filter(|v| v.group.is_some()).collect();
    for (i, cuisine) in gates.cuisines.iter().enumerate().take(63) {
        let bit = 1u64 << i;
        let covered = meal_vars.iter().any(|v| {
            a.get(v.slots[0])
                .and_then(Value::place)
                .is_some_and(|p| d.find_restaurant(p).is_some_and(|r| r.serves(cuisine)))
        });
        if covered {
            continue;
        }
        let mut placed = false;
        for v in &meal_vars {
            if a.get(v.slots[0]).is_some() {
                continue;
            }
            if let Some(c) = v.cands.iter().find(|c| c.mask & bit != 0 && !c.key.as_ref().is_some_and(|k| used.contains(k))) {
                a.set(v.slots[0], c.value.clone());
                used.insert(c.key.clone().expect("restaurant"));
                placed = true;
                break;
            }
        }
        let _ = placed;
    }
    for v in &meal_vars {
        if a.get(v.slots[0]).is_some() {
            continue;
        }
        let optional = v.cands.first().is_some_and(|c| c.value.is_empty());
        let value = if optional {
            Value::Empty
        } else {
            match v.cands.iter().find(|c| !c.key.as_ref().is_some_and(|k| used.contains(k))) {
                Some(c) => {
                    used.insert(c.key.clone().expect("restaurant"));
                    c.value.clone()
                }
                None => Value::Empty,
            }
        };
        a.set(v.slots[0], value);
    }

    for v in vars.iter().filter(|v| v.slots[0].kind == SlotKind::Attraction) {
        a.set(v.slots[0], v.cands.first().map_or(Value::Empty, |c| c.value.clone()));
    }

    repair(inst, &mut a, vars, goods);
    a
}

/// Whether `v` agrees with the current-city label of its day.
fn fits_route(a: &Assignment, slot: SlotId, v: &Value) -> bool {
    let Some(label) = a.current_city(slot.day) else { return false };
    let same = |x: &str, y: &str| x.trim().eq_ignore_ascii_case(y.trim());
    match v {
        Value::Empty => true,
        Value::Flight { .. } | Value::Ground { .. } => match (label, v.transport_leg()) {
            (Value::Travel { from, to }, Some((f, t))) => same(from, f) && same(to, t),
            _ => false,
        },
        Value::Stay(p) => label.end_city().is_some_and(|c| same(c, &p.city)),
        Value::Restaurant(p) => label.cities().iter().any(|c| same(c, &p.city)),
        Value::Attractions { places } => places.iter().all(|p| label.cities().iter().any(|c| same(c, &p.city))),
        _ => false,
    }
}

/// Moves a greedy assignment off recorded nogoods by changing one slot at a
/// time, preferring the change that clears the most nogoods and then the
/// one with the fewest violations.
fn repair(inst: &CspInstance, a: &mut Assignment, vars: &[Var], goods: &[Nogood]) {
    let sd = SlotDomains::build(&inst.query, &inst.domains);
    let span = |slot: &SlotId| -> Vec<SlotId> {
        vars.iter().find(|v| v.slots.contains(slot)).map_or_else(|| vec![*slot], |v| v.slots.clone())
    };
    let hits = |x: &Assignment| goods.iter().filter(|g| g.matches(x)).count();
    for _ in 0..32 {
        let now = hits(a);
        if now == 0 {
            return;
        }
        let mut best: Option<((usize, usize), SlotId, Value)> = None;
        for ng in goods.iter().filter(|g| g.matches(a)) {
            for (slot, current) in &ng.pairs {
                let slots = span(slot);
                // gated candidates first, then anything the slot's pool holds
                let mut options: Vec<&Value> = vars
                    .iter()
                    .find(|v| v.slots.contains(slot))
                    .map(|v| v.cands.iter().map(|c| &c.value).collect())
                    .unwrap_or_default();
                for (v, _) in sd.get(*slot) {
                    if !options.contains(&v) && fits_route(a, *slot, v) {
                        options.push(v);
                    }
                }
                for value in options {
                    if value == current {
                        continue;
                    }
                    let mut trial = a.clone();
                    for s in &slots {
                        trial.set(*s, value.clone());
                    }
                    let score = (hits(&trial), evaluate(inst, &trial).len());
                    if score.0 < now && best.as_ref().is_none_or(|(b, _, _)| score < *b) {
                        best = Some((score, *slot, value.clone()));
                    }
                }
            }
        }
        let Some((_, slot, value)) = best else { return };
        for s in span(&slot) {
            a.set(s, value.clone());
        }
    }
}
