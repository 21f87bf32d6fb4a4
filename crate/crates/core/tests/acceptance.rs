//! Acceptance run. Prints one PASS/FAIL line per criterion and exits with a
//! failure status if any criterion fails. Every threshold is pinned below.

use std::process::ExitCode;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use decomp::engine::{decide, is_solved, solve, Limits, Options, SolveError};
use decomp::eq::{EqCore, EqTheory};
use decomp::formula::{alpha_equivalent, NormalizedFormula, Signature, Var, Vars};
use decomp::games::{run_bench, solution_set, solve_winning, GameSpec, RowStatus};
use decomp::gen::{random_formula, random_sentence, trees_test_signature, GenConfig};
use decomp::normalize::{normalize, to_working};
use decomp::oracles::{eq_oracle, game_brute_force, ra_oracle, Position};
use decomp::ra::{LinearEq, RaCore, RaTheory};
use decomp::syntax::{parse_formula, parse_formula_in, Scope};
use decomp::theory::{Decomposition, Theory};
use decomp::trees::{TreeCore, TreeEq, TreesTheory};

const SENTENCE_SECONDS: f64 = 1.0;
const GAME1_K1_SECONDS: f64 = 5.0;
const GAME2_K1_SECONDS: f64 = 60.0;
const ORACLE_SECONDS: f64 = 600.0;
const BRUTE_FORCE_SECONDS: f64 = 600.0;
const GAME1_K10_SECONDS: f64 = 60.0;

const ORACLE_SEED: u64 = 42;
const ORACLE_COUNT: usize = 500;
const WORKING_SEED: u64 = 2024;
const WORKING_COUNT: usize = 1000;
const GAME1_BOUND: u64 = 50;
const GAME2_BOUND: u64 = 8;
const BRUTE_FORCE_K_MAX: u32 = 6;
/// Per-formula step budget for the random working formulas.
const WORKING_STEPS: u64 = 200_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn game_options() -> Options {
    Options { limits: Limits { max_depth: 512, ..Limits::default() }, ..Options::default() }
}

fn normalization_golden() -> Outcome {
    let mut sig = Signature::trees(&[("f", 2)]);
    let mut vs = Vars::new();
    let mut scope = Scope::new();
    let input = "(f(u, v) = f(w, u) & ex x. u = x) | (ex u. all w. u = f(v, w))";
    let expected = "~(ex . true & ~(ex u1 x. u1 = f(u, v) & u1 = f(w, u) & u = x) \
                    & ~(ex u2. true & ~(ex w1. true & ~(ex . u2 = f(v, w1)))))";
    let f = parse_formula_in(input, &mut sig, &mut vs, &mut scope).unwrap();
    let want = NormalizedFormula::from_formula(&parse_formula_in(expected, &mut sig, &mut vs, &mut scope).unwrap()).unwrap();
    let got = normalize(&f, &mut vs);
    outcome(alpha_equivalent(&got, &want) && got.depth() == 4, format!("depth {}", got.depth()))
}

fn phi_sentences() -> Outcome {
    let sig = Signature::trees(&[("f", 1), ("g", 2)]);
    let th = TreesTheory::new(sig.clone());
    let cases = [
        ("ex x. all y. (ex z w v. y = f(z) & y = f(x) & w = g(z, v)) | (x = f(y) & x = f(x))", false),
        ("ex x. all y. (ex z. y = f(z) & z = x) | (x = f(y) & y = x) | ~(x = f(y))", true),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, (text, want)) in cases.iter().enumerate() {
        let mut vs = Vars::new();
        let f = parse_formula(text, &sig, &mut vs).unwrap();
        let t = Instant::now();
        let got = decide(&th, &mut vs, &f, &Options::default());
        let secs = t.elapsed().as_secs_f64();
        pass &= matches!(got, Ok(b) if b == *want) && secs < SENTENCE_SECONDS;
        parts.push(format!("phi{} = {:?} in {secs:.3}s", i + 1, got.map_err(|e| e.to_string())));
    }
    outcome(pass, parts.join(", "))
}

fn worked_decompositions() -> Outcome {
    // Free v, w; bound x, y, z; rank x > y > z > v > w.
    let mut vs = Vars::new();
    let [w, v, z, y, x] = ["w", "v", "z", "y", "x"].map(|n| vs.named(n));
    let eq = EqTheory::new();
    let c = EqCore::new(vec![(v, w), (z, z), (z, x), (v, y)]);
    let eq_ok = eq.decompose(&[x, y, z], &c)
        == Ok(Decomposition {
            x_prime: vec![],
            a_prime: EqCore::new(vec![(v, w)]),
            x_dprime: vec![z],
            a_dprime: eq.true_core(),
            x_tprime: vec![y, x],
            a_tprime: EqCore::new(vec![(x, z), (y, w)]),
        });

    let ra = RaTheory::new();
    let block = RaCore::new(vec![
        LinearEq::from_i64(&[(v, 2), (w, 1)], 3),
        LinearEq::from_i64(&[(v, 1), (x, 1)], 2),
        LinearEq::from_i64(&[(v, 1), (x, 1), (z, 2)], 4),
    ]);
    let ra_ok = ra.decompose(&[x, y, z], &block)
        == Ok(Decomposition {
            x_prime: vec![],
            a_prime: RaCore::new(vec![LinearEq::from_i64(&[(v, 2), (w, 1)], 3)]),
            x_dprime: vec![y],
            a_dprime: ra.true_core(),
            x_tprime: vec![z, x],
            a_tprime: RaCore::new(vec![LinearEq::from_i64(&[(x, 2), (w, -1)], 1), LinearEq::from_i64(&[(z, 1)], 1)]),
        });

    // Free z, w; bound x, y, v; rank x > y > v > w > z.
    // The binary and the unary `f` get distinct names.
    let sig = Signature::trees(&[("f", 2), ("g", 1)]);
    let (f2, f1) = (sig.function("f").unwrap(), sig.function("g").unwrap());
    let mut vs = Vars::new();
    let [z, w, v, y, x] = ["z", "w", "v", "y", "x"].map(|n| vs.named(n));
    let trees = TreesTheory::new(sig);
    let c = TreeCore::new(vec![TreeEq::app(z, f2, vec![x, y]), TreeEq::app(z, f2, vec![x, w]), TreeEq::app(v, f1, vec![z])]);
    let trees_ok = trees.decompose(&[x, y, v], &c)
        == Ok(Decomposition {
            x_prime: vec![y, x],
            a_prime: TreeCore::new(vec![TreeEq::app(z, f2, vec![x, y]), TreeEq::var(y, w)]),
            x_dprime: vec![],
            a_dprime: trees.true_core(),
            x_tprime: vec![v],
            a_tprime: TreeCore::new(vec![TreeEq::app(v, f1, vec![z])]),
        });
    outcome(eq_ok && ra_ok && trees_ok, format!("eq {eq_ok}, ra {ra_ok}, trees {trees_ok}"))
}

fn game_k1(g: GameSpec, bound: u64, want: Vec<Position>, limit: f64) -> Outcome {
    let t = Instant::now();
    match solve_winning(&g, 1, &game_options()) {
        Ok((sol, x, _, _)) => {
            let secs = t.elapsed().as_secs_f64();
            let got = solution_set(&g, &sol, x, bound);
            outcome(got == want && secs < limit, format!("solved in {secs:.3}s, set {got:?}"))
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn oracle_agreement() -> Outcome {
    let start = Instant::now();
    let mut detail = Vec::new();
    let mut pass = true;
    for sig in [Signature::eq(), Signature::ra()] {
        let mut rng = ChaCha8Rng::seed_from_u64(ORACLE_SEED);
        let mut agree = 0;
        for _ in 0..ORACLE_COUNT {
            let mut vs = Vars::new();
            let f = random_sentence(&sig, &mut vs, &mut rng, GenConfig::default());
            let (got, want) = if sig == Signature::eq() {
                (decide(&EqTheory::new(), &mut vs, &f, &Options::default()), eq_oracle(&f).unwrap())
            } else {
                (decide(&RaTheory::new(), &mut vs, &f, &Options::default()), ra_oracle(&f, &sig).unwrap())
            };
            agree += usize::from(matches!(got, Ok(b) if b == want));
        }
        pass &= agree == ORACLE_COUNT;
        detail.push(format!("{} {agree}/{ORACLE_COUNT}", sig.tag.as_str()));
    }
    let secs = start.elapsed().as_secs_f64();
    detail.push(format!("{secs:.1}s"));
    outcome(pass && secs < ORACLE_SECONDS, detail.join(", "))
}

fn game1_brute_force() -> Outcome {
    let start = Instant::now();
    let rows = run_bench(&GameSpec::one(), BRUTE_FORCE_K_MAX, GAME1_BOUND, &game_options());
    let secs = start.elapsed().as_secs_f64();
    let validated = rows.iter().filter(|r| r.status == RowStatus::Validated).count();
    let k2 = game_brute_force(1, 2, GAME1_BOUND) == [1, 2, 4, 5].map(Position::One);
    let pass = validated == BRUTE_FORCE_K_MAX as usize + 1 && k2 && secs < BRUTE_FORCE_SECONDS;
    outcome(pass, format!("{validated}/{} rows validated in {secs:.1}s", BRUTE_FORCE_K_MAX + 1))
}

fn structural_run<T: Theory>(th: &T, sig: &Signature, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = Options {
        limits: Limits { max_steps: WORKING_STEPS, ..Limits::default() },
        check_measure: true,
        check_binders: true,
        ..Options::default()
    };
    for i in 0..WORKING_COUNT {
        let mut vs = Vars::new();
        let free: Vec<Var> = ["x", "y"].iter().map(|n| vs.named(n)).collect();
        let f = random_formula(sig, &mut vs, &mut rng, GenConfig::default(), &free);
        let w = to_working(&normalize(&f, &mut vs), th).map_err(|e| e.to_string())?;
        match solve(th, &mut vs, &w, &opts) {
            Ok(r) if r.solved.iter().all(|s| is_solved(th, s)) => {}
            Ok(_) => return Err(format!("formula {i}: unsolved output")),
            Err(e @ (SolveError::MeasureIncrease { .. } | SolveError::Invariant(_))) => {
                return Err(format!("formula {i}: {e}"))
            }
            Err(e) => return Err(format!("formula {i}: {e}")),
        }
    }
    Ok(())
}

fn structural_invariants() -> Outcome {
    let runs = [
        ("eq", structural_run(&EqTheory::new(), &Signature::eq(), WORKING_SEED)),
        ("ra", structural_run(&RaTheory::new(), &Signature::ra(), WORKING_SEED)),
        ("trees", structural_run(&TreesTheory::new(trees_test_signature()), &trees_test_signature(), WORKING_SEED)),
    ];
    let pass = runs.iter().all(|r| r.1.is_ok());
    let detail: Vec<String> = runs
        .iter()
        .map(|(n, r)| match r {
            Ok(()) => format!("{n} {WORKING_COUNT} ok"),
            Err(e) => format!("{n} {e}"),
        })
        .collect();
    outcome(pass, detail.join(", "))
}

fn game1_k10() -> Outcome {
    let g = GameSpec::one();
    let t = Instant::now();
    match solve_winning(&g, 10, &game_options()) {
        Ok((sol, x, _, d)) => {
            let secs = t.elapsed().as_secs_f64();
            let valid = solution_set(&g, &sol, x, GAME1_BOUND) == game_brute_force(1, 10, GAME1_BOUND);
            outcome(secs < GAME1_K10_SECONDS && valid, format!("{secs:.2}s, {} steps, validated {valid}", d.stats.steps))
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("normalization golden example", normalization_golden),
        ("phi1 false, phi2 true", phi_sentences),
        ("worked decompositions", worked_decompositions),
        ("game 1 winning_1", || game_k1(GameSpec::one(), GAME1_BOUND, vec![Position::One(1), Position::One(2)], GAME1_K1_SECONDS)),
        ("game 2 winning_1", || {
            game_k1(GameSpec::two(), GAME2_BOUND, vec![Position::Two(0, 1), Position::Two(1, 0)], GAME2_K1_SECONDS)
        }),
        ("oracle agreement", oracle_agreement),
        ("game 1 brute-force validation", game1_brute_force),
        ("structural invariants", structural_invariants),
        ("game 1 winning_10 performance", game1_k10),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!("criterion {}: {} {name} ({})", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failures += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
