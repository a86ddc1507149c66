//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stl_dialogue::dialogue::{load_demos, run_pipeline, OracleUser, SessionConfig};
use stl_dialogue::experiment::{overall_success_rate, run_suite, write_csv, ParaphraseCorpus, Suite};
use stl_dialogue::nl::{evaluate_lexicon, parse_entries, Frontend, HELDOUT_LEXICON};
use stl_dialogue::rl::{evaluate, train, Hyperparams};
use stl_dialogue::stl::{parse_formula_with, satisfies, Formula, Trace, TraceView};
use stl_dialogue::world::{demo_to_trace, GridSpec, WorldState, WorldVocabulary};

const TASK: &str = "F[0,15](lampOn & F[0,10](itemOnRobot(purpleCube)))";

fn data(path: &str) -> String {
    std::fs::read_to_string(format!("{}/data/{path}", env!("CARGO_MANIFEST_DIR"))).expect("shipped data file")
}

fn f(s: &str) -> Formula {
    parse_formula_with(s, &WorldVocabulary).expect("valid formula")
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    if took <= limit {
        Ok(())
    } else {
        Err(format!("took {took:?}, limit {limit:?}"))
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Operator and atom-name skeleton without intervals or arguments.
fn shape(f: &Formula) -> String {
    match f {
        Formula::True => "true".into(),
        Formula::Atom(a) => a.name().to_string(),
        Formula::Not(x) => format!("!{}", shape(x)),
        Formula::And(a, b) => format!("({} & {})", shape(a), shape(b)),
        Formula::Or(a, b) => format!("({} | {})", shape(a), shape(b)),
        Formula::Implies(a, b) => format!("({} -> {})", shape(a), shape(b)),
        Formula::Eventually(_, x) => format!("F{}", shape(x)),
        Formula::Always(_, x) => format!("G{}", shape(x)),
        Formula::Until(_, a, b) => format!("({} U {})", shape(a), shape(b)),
    }
}

fn fig2_fixture() -> Result<String, String> {
    let start = Instant::now();
    let g = GridSpec::default();
    let green = load_demos(&data("demos/green.toml"), &g).map_err(|e| e.to_string())?;
    let red = load_demos(&data("demos/red.toml"), &g).map_err(|e| e.to_string())?;
    let green = demo_to_trace(&green[0].demo, &g).map_err(|e| e.to_string())?;
    let red = demo_to_trace(&red[0].demo, &g).map_err(|e| e.to_string())?;
    for (name, tr) in [("green", &green), ("red", &red)] {
        let shipped = Trace::from_jsonl(&data(&format!("traces/{name}.trace"))).map_err(|e| e.to_string())?;
        check(&shipped == tr, || format!("{name}.trace differs from its demo"))?;
    }
    let sat = |phi: &str, tr: &Trace| satisfies(&f(phi), tr, 0).unwrap();
    let reach = "F[0,15](robotAt(0,0))";
    check(sat(reach, &green) && sat(reach, &red), || "reach-corner must hold on both demos".into())?;
    for (tr, expect) in [(&green, true), (&red, false)] {
        let t = tr.len();
        for atom in ["robotAtWall", "robotAtWater"] {
            let phi = format!("G[0,{t}](!({atom}))");
            check(sat(&phi, tr) == expect, || format!("{phi} should be {expect}"))?;
        }
    }
    within(start, Duration::from_secs(1))?;
    Ok(format!("green {} steps, red {} steps", green.len(), red.len()))
}

fn running_example() -> Result<String, String> {
    let start = Instant::now();
    let g = GridSpec::default();
    let fe = Frontend::default();
    let demos = load_demos(&data("demos/lamp_cube.toml"), &g).map_err(|e| e.to_string())?;
    let mut oracle = OracleUser::new(f(TASK), fe.lexicon.clone()).map_err(|e| e.to_string())?;
    let (sel, s) = run_pipeline(
        "turn on the lamp and pick up the cube",
        &demos,
        &mut oracle,
        &fe,
        &g,
        SessionConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    let bounds = s.bounds.ok_or("no bounds")?;
    check((bounds.l, bounds.u) == (3, 5), || format!("bounds ({}, {})", bounds.l, bounds.u))?;
    let kept: Vec<String> = s.candidates.iter().map(|t| shape(&t.skeleton)).collect();
    for want in ["(lampOn & itemOnRobot)", "(lampOn & FitemOnRobot)", "F(lampOn & FitemOnRobot)"] {
        check(kept.iter().any(|k| k == want), || format!("{want} missing from {kept:?}"))?;
    }
    let pruned: Vec<String> = s.pruned.iter().map(|p| shape(&p.template.skeleton)).collect();
    for gone in ["(FlampOn & FitemOnRobot)", "(itemOnRobot & FlampOn)"] {
        check(pruned.iter().any(|k| k == gone), || format!("{gone} not pruned: {pruned:?}"))?;
        check(!kept.iter().any(|k| k == gone), || format!("{gone} survived"))?;
    }
    check(sel.as_ref() == Some(&f(TASK)), || format!("selected {sel:?}"))?;
    let uis = s.metrics.user_interactions;
    check((2..=4).contains(&uis), || format!("{uis} interactions"))?;
    within(start, Duration::from_secs(10))?;
    Ok(format!("{} enumerated, {} kept, {} interactions", s.metrics.enumerated_formulas.unwrap_or(0), kept.len(), uis))
}

fn oracle_equivalence() -> Result<String, String> {
    let start = Instant::now();
    let (cases, bad) = common::oracle_equivalence(4, 3, 5);
    check(bad == 0, || format!("{bad} disagreements in {cases} cases"))?;
    within(start, Duration::from_secs(60))?;
    Ok(format!("{cases} formula/trace pairs agree"))
}

fn sign_soundness() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (checked, bad) = common::sign_soundness(&mut rng, 10_000);
    check(bad == 0, || format!("{bad} violations"))?;
    Ok(format!("10000 pairs, {checked} non-zero robustness values"))
}

fn table_one() -> Result<String, String> {
    let g = GridSpec::default();
    let fe = Frontend::default();
    let suite = Suite::default();
    let corpus = ParaphraseCorpus::shipped();
    let rows = run_suite(&suite, &corpus, &fe, &g, &SessionConfig::default()).map_err(|e| e.to_string())?;
    let sr = overall_success_rate(&rows);
    check(sr >= 0.70, || format!("overall success {sr:.3}"))?;
    for row in &rows {
        check(row.runs.len() >= 20, || format!("{}: {} paraphrases", row.nl, row.runs.len()))?;
        if ["Pick up the purple cube.", "Sit on the chair or pick up the purple cube."].contains(&row.nl.as_str()) {
            check(row.success_rate == 1.0, || format!("{}: success {:.3}", row.nl, row.success_rate))?;
        }
        if let Some(p) = row.paper_uis {
            let d = (row.user_interactions - p).abs();
            check(d <= 1.0, || format!("{}: {:.2} interactions vs {p}", row.nl, row.user_interactions))?;
        }
    }
    let out = std::env::temp_dir().join("stl-dialogue-table1.csv");
    let file = std::fs::File::create(&out).map_err(|e| e.to_string())?;
    write_csv(&rows, file).map_err(|e| e.to_string())?;
    let held = parse_entries(HELDOUT_LEXICON).map_err(|e| e.to_string())?;
    let acc = evaluate_lexicon(&held, &fe.lexicon).map_err(|e| e.to_string())?;
    check(acc >= 0.85, || format!("lexicon accuracy {acc:.3}"))?;
    Ok(format!("success {:.1}%, lexicon {:.1}%, csv at {}", sr * 100.0, acc * 100.0, out.display()))
}

fn rl_property() -> Result<String, String> {
    let start = Instant::now();
    let g = GridSpec::default();
    let s0 = WorldState::initial(&g);
    let phi = f(TASK);
    let h = Hyperparams { seed: 42, ..Default::default() };
    let a = train(&g, &s0, &phi, &h).map_err(|e| e.to_string())?;
    let r = evaluate(&a.q, &g, &s0, &phi, h.max_steps).map_err(|e| e.to_string())?;
    check(r.satisfied, || format!("greedy rollout fails: {:?}", r.actions))?;
    let n = a.curve.len() / 10;
    let mean = |xs: &[stl_dialogue::rl::CurvePoint]| xs.iter().map(|p| p.ret).sum::<f64>() / xs.len() as f64;
    let (first, last) = (mean(&a.curve[..n]), mean(&a.curve[a.curve.len() - n..]));
    check(last > first, || format!("return did not improve: {first:.3} -> {last:.3}"))?;
    let b = train(&g, &s0, &phi, &h).map_err(|e| e.to_string())?;
    let same = a.curve.len() == b.curve.len()
        && a.curve.iter().zip(&b.curve).all(|(x, y)| {
            x.episode == y.episode
                && x.ret.to_bits() == y.ret.to_bits()
                && x.epsilon.to_bits() == y.epsilon.to_bits()
                && x.replay_size == y.replay_size
        });
    check(same, || "seeded rerun produced a different curve".into())?;
    within(start, Duration::from_secs(600))?;
    Ok(format!(
        "{} episodes, rollout of {} steps, return {first:.2} -> {last:.2}, rerun identical",
        a.curve.len(),
        r.actions.len()
    ))
}

fn state_space() -> Result<String, String> {
    let n = GridSpec::default().state_space_size();
    check(n > 8_000_000_000, || format!("|S| = {n}"))?;
    Ok(format!("|S| = {n}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<String, String>); 7] = [
        ("fig2 fixture", fig2_fixture),
        ("running example", running_example),
        ("monitor oracle equivalence", oracle_equivalence),
        ("robustness sign-soundness", sign_soundness),
        ("table-1 analog + lexicon", table_one),
        ("rl property + seeded rerun", rl_property),
        ("state-space size", state_space),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name:<28} {detail} [{secs:.2}s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name:<28} {why} [{secs:.2}s]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
