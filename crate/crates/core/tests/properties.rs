use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use tripcsp::advisor::advise;
use tripcsp::checker::{check, evaluate, Attempt, AttemptHistory, Verdict};
use tripcsp::constraints::{implicit_catalogue, Category};
use tripcsp::csp::variable_set;
use tripcsp::generator::{gap_scenario, generate_dataset, rng, sample_queries, GapType, GeneratedDataset};
use tripcsp::plan::{parse_plan, serialize_plan};
use tripcsp::planner::{nogoods, plan, DEFAULT_NODE_CAP};
use tripcsp::sandbox::{GroundMode, Payload};
use tripcsp::search::{initial_directives, SearchState};
use tripcsp::space::{is_required, SlotDomains};
use tripcsp::{
    build_constraints, execute_tool, Assignment, CspInstance, DomainSet, Orchestrator, OrchestratorConfig, Place,
    Sandbox, SessionState, SlotKind, StructuredQuery, Tool, ToolDirective, Value,
};

fn dataset(seed: u64) -> GeneratedDataset {
    generate_dataset(seed % 6, 4 + (seed % 3) as usize).unwrap()
}

fn random_directive(r: &mut impl Rng, g: &GeneratedDataset) -> ToolDirective {
    let mut cities: Vec<String> = g.states.iter().flat_map(|s| s.1.clone()).collect();
    cities.push("Nowhere".into());
    let c = |r: &mut dyn rand::RngCore| cities.choose(r).unwrap().clone();
    match r.gen_range(0..6) {
        0 => {
            let day = g.start + chrono::Days::new(r.gen_range(0..g.window + 2) as u64);
            ToolDirective::flights(&c(r), &c(r), day)
        }
        1 => ToolDirective::ground(&c(r), &c(r), *GroundMode::ALL.choose(r).unwrap()),
        2 => ToolDirective::stays(&c(r)),
        3 => ToolDirective::restaurants(&c(r)),
        4 => ToolDirective::attractions(&c(r)),
        _ => ToolDirective::cities(if r.gen_bool(0.8) { &g.states[r.gen_range(0..2)].0 } else { "Atlantis" }),
    }
}

fn in_sandbox(sb: &Sandbox, p: &Payload) -> bool {
    match p {
        Payload::Flights(v) => v.iter().all(|x| sb.flights().contains(x)),
        Payload::Stays(v) => v.iter().all(|x| sb.stays().contains(x)),
        Payload::Restaurants(v) => v.iter().all(|x| sb.restaurants().contains(x)),
        Payload::Attractions(v) => v.iter().all(|x| sb.attractions().contains(x)),
        Payload::GroundRoutes(v) => v.iter().all(|x| sb.ground().contains(x)),
        Payload::Cities(v) => v.iter().all(|x| sb.cities_by_state().iter().any(|(_, cs)| cs.contains(x))),
    }
}

/// Every candidate reachable through the directive's pool cites an entry
/// whose observation holds it verbatim.
fn provenance_holds(d: &DomainSet, st: &SearchState, dir: &ToolDirective) -> bool {
    let nb = &st.notebook;
    let a = &dir.args;
    let cites = |prov: Option<usize>, hit: &dyn Fn(&Payload) -> bool| {
        prov.and_then(|i| nb.get(i)).is_some_and(|e| hit(&e.observation.payload))
    };
    match dir.tool {
        Tool::FlightSearch => d
            .flights(&a[0], &a[1], a[2].parse().unwrap())
            .iter()
            .all(|c| cites(c.provenance, &|p| matches!(p, Payload::Flights(v) if v.contains(&c.record)))),
        Tool::DistanceMatrix => d
            .ground(&a[0], &a[1], a[2].parse().unwrap())
            .iter()
            .all(|c| cites(c.provenance, &|p| matches!(p, Payload::GroundRoutes(v) if v.contains(&c.record)))),
        Tool::AccommodationSearch => d
            .stays(&a[0])
            .iter()
            .all(|c| cites(c.provenance, &|p| matches!(p, Payload::Stays(v) if v.contains(&c.record)))),
        Tool::RestaurantSearch => d
            .restaurants(&a[0])
            .iter()
            .all(|c| cites(c.provenance, &|p| matches!(p, Payload::Restaurants(v) if v.contains(&c.record)))),
        Tool::AttractionSearch => d
            .attractions(&a[0])
            .iter()
            .all(|c| cites(c.provenance, &|p| matches!(p, Payload::Attractions(v) if v.contains(&c.record)))),
        Tool::CitySearch => true,
    }
}

fn random_complete(r: &mut impl Rng, sb: &Sandbox, q: &StructuredQuery) -> Assignment {
    let cities: Vec<String> = sb.cities_by_state().iter().flat_map(|(_, c)| c.clone()).collect();
    let mut a = Assignment::new(q.days);
    for s in variable_set(q) {
        let v = match s.kind {
            SlotKind::CurrentCity if r.gen_bool(0.5) => Value::City {
                city: cities.choose(r).unwrap().clone(),
            },
            SlotKind::CurrentCity => Value::Travel {
                from: cities.choose(r).unwrap().clone(),
                to: cities.choose(r).unwrap().clone(),
            },
            _ if r.gen_bool(0.15) => Value::Empty,
            SlotKind::Transportation if r.gen_bool(0.5) => {
                let f = sb.flights().choose(r).unwrap();
                Value::Flight {
                    number: f.number.clone(),
                    from: f.origin.clone(),
                    to: f.dest.clone(),
                    dep: f.dep_time.clone(),
                    arr: f.arr_time.clone(),
                }
            }
            SlotKind::Transportation => Value::Ground {
                mode: *GroundMode::ALL.choose(r).unwrap(),
                from: cities.choose(r).unwrap().clone(),
                to: cities.choose(r).unwrap().clone(),
            },
            SlotKind::Accommodation => {
                let x = sb.stays().choose(r).unwrap();
                Value::Stay(Place::new(&x.name, &x.city))
            }
            SlotKind::Attraction => {
                let n = r.gen_range(1..4);
                Value::Attractions {
                    places: sb
                        .attractions()
                        .choose_multiple(r, n)
                        .map(|x| Place::new(&x.name, &x.city))
                        .collect(),
                }
            }
            _ => {
                let x = sb.restaurants().choose(r).unwrap();
                Value::Restaurant(Place::new(&x.name, &x.city))
            }
        };
        a.set(s, v);
    }
    a
}

fn instance(seed: u64) -> (Sandbox, StructuredQuery) {
    if seed % 2 == 0 {
        let g = gap_scenario(seed, GapType::ALL[(seed / 2 % 3) as usize]);
        (g.sandbox, g.query)
    } else {
        let g = dataset(seed);
        let q = sample_queries(&g, 1, seed).remove(0);
        (g.sandbox, q)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tools_are_deterministic_and_closed_world(seed in 0u64..1000) {
        let g = dataset(seed);
        let mut r = rng(seed);
        for _ in 0..20 {
            let d = random_directive(&mut r, &g);
            let first = execute_tool(&g.sandbox, &d).unwrap();
            prop_assert_eq!(&first, &execute_tool(&g.sandbox, &d).unwrap());
            prop_assert!(in_sandbox(&g.sandbox, &first.payload), "{d}");
        }
    }

    #[test]
    fn notebook_and_domains_only_grow(seed in 0u64..1000) {
        let g = dataset(seed);
        let mut r = rng(seed);
        let mut st = SearchState::new();
        let mut prev_entries = Vec::new();
        let mut prev_domains = DomainSet::default();
        for _ in 0..15 {
            let d = random_directive(&mut r, &g);
            st.execute(&g.sandbox, &d, usize::MAX).unwrap();
            prop_assert_eq!(&st.notebook.entries()[..prev_entries.len()], &prev_entries[..]);
            let now = st.domains();
            prop_assert!(prev_domains.is_subset_of(&now));
            prop_assert!(provenance_holds(&now, &st, &d), "{d}");
            prev_entries = st.notebook.entries().to_vec();
            prev_domains = now;
        }
    }

    #[test]
    fn initial_script_covers_single_city_trips(seed in 0u64..1000) {
        let g = dataset(seed);
        for q in sample_queries(&g, 4, seed).into_iter().filter(|q| q.visiting_city_count == 1) {
            let dirs: BTreeSet<String> = initial_directives(&q, &DomainSet::default())
                .unwrap()
                .iter()
                .map(ToString::to_string)
                .collect();
            let (out, back) = (q.dates[0], *q.dates.last().unwrap());
            for want in [
                ToolDirective::flights(&q.origin, &q.destination, out),
                ToolDirective::flights(&q.destination, &q.origin, back),
                ToolDirective::stays(&q.destination),
                ToolDirective::restaurants(&q.destination),
                ToolDirective::attractions(&q.destination),
            ] {
                prop_assert!(dirs.contains(&want.to_string()), "{want} missing from {dirs:?}");
            }
        }
    }

    #[test]
    fn constraint_catalogue_shape(seed in 0u64..1000) {
        let (sb, q) = instance(seed);
        let full = build_constraints(&q, &DomainSet::from_sandbox(&sb));
        let sparse = build_constraints(&q, &DomainSet::default());
        let implicit: BTreeSet<String> = implicit_catalogue(&q).into_iter().map(|c| c.id).collect();
        for id in &implicit {
            prop_assert!(full.get(id).is_some() && sparse.get(id).is_some(), "{id}");
        }
        for c in &full {
            prop_assert_eq!(c.category == Category::Commonsense, implicit.contains(&c.id), "{}", c.id);
        }
        // query-derived constraints survive augmentation
        for c in &sparse {
            prop_assert!(full.get(&c.id).is_some(), "{} lost after augmentation", c.id);
        }
    }

    #[test]
    fn planner_is_sound_respects_nogoods_and_improves(seed in 0u64..1000) {
        let (sb, q) = instance(seed);
        let inst = CspInstance::build(q, DomainSet::from_sandbox(&sb));
        let mut hist = AttemptHistory::new();
        let mut last = usize::MAX;
        for _ in 0..3 {
            let Ok(out) = plan(&inst, &hist, DEFAULT_NODE_CAP) else { break };
            let (verdict, fb) = check(&inst, &out.assignment, &hist);
            prop_assert_eq!((verdict, fb.clone()), check(&inst, &out.assignment, &hist));
            if !out.best_effort {
                prop_assert!(evaluate(&inst, &out.assignment).is_empty());
            }
            let sd = SlotDomains::build(&inst.query, &inst.domains);
            for ng in nogoods(&hist) {
                // best effort keeps its route, may have no other value, or
                // may hand back an earlier attempt when every fresh one is worse
                let forced = out.best_effort
                    && (ng.pairs.iter().any(|(s, v)| v.is_empty() && is_required(&inst.query, *s))
                        || ng.pairs.iter().all(|(s, v)| sd.get(*s).iter().all(|(x, _)| x == v))
                        || hist.iter().any(|h| h.assignment == out.assignment));
                prop_assert!(forced || !ng.matches(&out.assignment), "repeated nogood from {}", ng.source);
            }
            let n = fb.violations.len();
            prop_assert!(n <= last, "violations rose from {last} to {n}");
            last = n;
            if verdict == Verdict::Valid {
                break;
            }
            hist.push(Attempt { assignment: out.assignment, verdict, feedback: fb });
        }
    }

    #[test]
    fn advice_never_repeats_executed_directives(seed in 0u64..1000) {
        let g = gap_scenario(seed, GapType::ALL[(seed % 3) as usize]);
        let mut st = SearchState::new();
        for d in initial_directives(&g.query, &DomainSet::default()).unwrap() {
            st.execute(&g.sandbox, &d, usize::MAX).unwrap();
        }
        let inst = CspInstance::build(g.query.clone(), st.domains());
        let mut hist = AttemptHistory::new();
        if let Ok(out) = plan(&inst, &hist, DEFAULT_NODE_CAP) {
            let (verdict, feedback) = check(&inst, &out.assignment, &hist);
            hist.push(Attempt { assignment: out.assignment, verdict, feedback });
        }
        if let Ok(fb) = advise(&inst, &hist, &st.executed) {
            for d in &fb.directives {
                prop_assert!(!st.was_executed(d), "{d} already executed");
            }
        }
    }

    #[test]
    fn orchestrated_turns_are_delivered_sound_and_cached(seed in 0u64..1000) {
        let g = dataset(seed);
        let mut o = Orchestrator::new(Arc::new(g.sandbox.clone()), OrchestratorConfig::default());
        let mut s = SessionState::new();
        for q in sample_queries(&g, 2, seed) {
            let days = q.days;
            let r = o.run_turn(&mut s, q.clone());
            prop_assert_eq!(r.assignment.days, days);
            prop_assert!(r.assignment.is_complete());
            if r.verdict == Verdict::Valid {
                let cache = s.cache.clone().expect("valid turn caches its domains");
                prop_assert_eq!(&cache, &s.search.domains());
                prop_assert!(evaluate(&CspInstance::build(q, cache), &r.assignment).is_empty());
            }
        }
        for rec in &s.trajectory {
            if rec.verdict == Verdict::Valid {
                let inst = CspInstance::build(rec.query.clone(), DomainSet::from_sandbox(&g.sandbox));
                prop_assert!(evaluate(&inst, &rec.assignment).is_empty());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn plans_round_trip(seed in any::<u64>()) {
        let (sb, q) = instance(seed % 1000 * 2 + 1);
        let mut r = rng(seed);
        let a = random_complete(&mut r, &sb, &q);
        prop_assert!(a.is_complete());
        let rec = serialize_plan(&a).unwrap();
        prop_assert_eq!(parse_plan(&rec).unwrap(), a.clone());
        let b = random_complete(&mut r, &sb, &q);
        if a != b {
            prop_assert_ne!(rec, serialize_plan(&b).unwrap());
        }
    }
}
