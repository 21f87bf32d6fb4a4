//! The two partner games over trees: formula generators for the k-winning
//! positions and a benchmark harness that validates solver output against
//! brute force.

use std::collections::HashMap;
use std::time::Instant;

use serde::Serialize;

use crate::engine::{present_solutions, Options, SolveError};
use crate::formula::{Formula, Signature, Term, Var, Vars};
use crate::oracles::{eval_solved_on_ground, game_brute_force, GroundTree, Position};
use crate::trees::TreesTheory;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameSpec {
    pub id: u8,
    pub sig: Signature,
}

impl GameSpec {
    /// Game 1: subtract 1 or 2 from a non-negative integer.
    pub fn one() -> GameSpec {
        GameSpec { id: 1, sig: Signature::trees(&[("0", 0), ("s", 1)]) }
    }

    /// Game 2: pick one component of a pair and move the other one by 1,
    /// up if the picked component is odd and down otherwise.
    pub fn two() -> GameSpec {
        GameSpec { id: 2, sig: Signature::trees(&[("0", 0), ("f", 1), ("g", 1), ("c", 2)]) }
    }

    pub fn by_id(id: u8) -> Option<GameSpec> {
        match id {
            1 => Some(GameSpec::one()),
            2 => Some(GameSpec::two()),
            _ => None,
        }
    }

    fn app(&self, f: &str, args: Vec<Term>) -> Term {
        Term::App(self.sig.function(f).expect("game symbol"), args)
    }

    /// The move relation between positions `x` and `y`.
    pub fn move_formula(&self, x: Var, y: Var, vars: &mut Vars) -> Formula {
        let b = Builder { g: self };
        match self.id {
            1 => {
                let u = vars.fresh("u");
                Formula::or_all([
                    b.eq(x, self.app("s", vec![v(y)])),
                    b.eq(x, self.app("s", vec![self.app("s", vec![v(y)])])),
                    Formula::and_all([
                        Formula::not(b.eq(x, self.app("0", vec![]))),
                        Formula::not(Formula::exists(vec![u], b.eq(x, self.app("s", vec![v(u)])))),
                        Formula::eq_vars(x, y),
                    ]),
                ])
            }
            _ => {
                let (u1, u2) = (vars.fresh("u"), vars.fresh("v"));
                Formula::or(
                    b.transition(x, y, vars),
                    Formula::and(
                        Formula::not(Formula::exists(vec![u1, u2], b.eq(x, self.app("c", vec![v(u1), v(u2)])))),
                        Formula::eq_vars(x, y),
                    ),
                )
            }
        }
    }
}

fn v(x: Var) -> Term {
    Term::Var(x)
}

struct Builder<'a> {
    g: &'a GameSpec,
}

impl Builder<'_> {
    fn eq(&self, x: Var, t: Term) -> Formula {
        Formula::Eq(v(x), t)
    }

    fn headed(&self, x: Var, f: &str, vars: &mut Vars) -> Formula {
        let i = vars.fresh("i");
        Formula::exists(vec![i], self.eq(x, self.g.app(f, vec![v(i)])))
    }

    fn transition(&self, x: Var, y: Var, vars: &mut Vars) -> Formula {
        let (u, vv, w) = (vars.fresh("u"), vars.fresh("v"), vars.fresh("w"));
        let c = |a, b| self.g.app("c", vec![v(a), v(b)]);
        let pick = Formula::or(
            Formula::and(self.eq(x, c(u, vv)), self.eq(y, c(u, w))),
            Formula::and(self.eq(x, c(vv, u)), self.eq(y, c(w, u))),
        );
        let odd = self.headed(u, "g", vars);
        let even = Formula::not(self.headed(u, "g", vars));
        let step = Formula::or(
            Formula::and(odd, self.succ(vv, w, vars)),
            Formula::and(even, self.pred(vv, w, vars)),
        );
        Formula::exists(vec![u, vv, w], Formula::and(pick, step))
    }

    fn succ(&self, vv: Var, w: Var, vars: &mut Vars) -> Formula {
        Formula::or(
            Formula::and(self.headed(vv, "g", vars), self.eq(w, self.g.app("f", vec![v(vv)]))),
            Formula::and(Formula::not(self.headed(vv, "g", vars)), self.eq(w, self.g.app("g", vec![v(vv)]))),
        )
    }

    fn pred(&self, vv: Var, w: Var, vars: &mut Vars) -> Formula {
        let branch = |f: &str, vars: &mut Vars| {
            let j = vars.fresh("j");
            let when_odd = if f == "f" { Formula::eq_vars(w, j) } else { Formula::eq_vars(w, vv) };
            let when_even = if f == "f" { Formula::eq_vars(w, vv) } else { Formula::eq_vars(w, j) };
            Formula::exists(
                vec![j],
                Formula::and(
                    self.eq(vv, self.g.app(f, vec![v(j)])),
                    Formula::or(
                        Formula::and(self.headed(j, "g", vars), when_odd),
                        Formula::and(Formula::not(self.headed(j, "g", vars)), when_even),
                    ),
                ),
            )
        };
        let from_f = branch("f", vars);
        let from_g = branch("g", vars);
        let other = Formula::and_all([
            Formula::not(self.headed(vv, "f", vars)),
            Formula::not(self.headed(vv, "g", vars)),
            Formula::not(self.eq(vv, self.g.app("0", vec![]))),
            Formula::eq_vars(w, vv),
        ]);
        Formula::or_all([from_f, from_g, other])
    }
}

/// `winning_k(x)`: the player to move at `x` wins within `k` moves.
pub fn gen_winning(g: &GameSpec, k: u32, x: Var, vars: &mut Vars) -> Formula {
    if k == 0 {
        return Formula::False;
    }
    let y = vars.fresh("y");
    let x2 = vars.fresh("x");
    let inner = gen_winning(g, k - 1, x2, vars);
    let reply = Formula::exists(vec![x2], Formula::and(g.move_formula(y, x2, vars), Formula::not(inner)));
    Formula::exists(vec![y], Formula::and(g.move_formula(x, y, vars), Formula::not(reply)))
}

fn numeral(i: u64) -> GroundTree {
    if i == 0 {
        GroundTree::leaf("0")
    } else if i % 2 == 1 {
        GroundTree::app("g", vec![numeral(i - 1)])
    } else {
        GroundTree::app("f", vec![GroundTree::app("g", vec![numeral(i - 2)])])
    }
}

/// The tree coding a position.
pub fn encode_position(p: Position) -> GroundTree {
    match p {
        Position::One(i) => (0..i).fold(GroundTree::leaf("0"), |t, _| GroundTree::app("s", vec![t])),
        Position::Two(i, j) => GroundTree::app("c", vec![numeral(i), numeral(j)]),
    }
}

/// Every position with components up to `bound`.
pub fn positions(game: u8, bound: u64) -> Vec<Position> {
    match game {
        1 => (0..=bound).map(Position::One).collect(),
        _ => (0..=bound).flat_map(|i| (0..=bound).map(move |j| Position::Two(i, j))).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum RowStatus {
    Validated,
    Mismatch { positions: Vec<String> },
    /// The resource budget ran out; printed as `-`.
    Budget { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub game: u8,
    pub k: u32,
    pub millis: f64,
    pub steps: u64,
    /// AST nodes of the solution formula.
    pub output_size: usize,
    pub disjuncts: usize,
    pub winning: Vec<String>,
    #[serde(flatten)]
    pub status: RowStatus,
}

/// Solves `winning_k` and returns the solution formula with its variable.
pub fn solve_winning(
    g: &GameSpec,
    k: u32,
    opts: &Options,
) -> Result<(Formula, Var, Vars, crate::engine::Disjunction<crate::trees::TreeCore>), SolveError> {
    let mut vars = Vars::new();
    let x = vars.named("x");
    let f = gen_winning(g, k, x, &mut vars);
    let th = TreesTheory::new(g.sig.clone());
    let d = present_solutions(&th, &mut vars, &f, opts)?;
    Ok((d.to_formula(&th), x, vars, d))
}

/// Which positions up to `bound` satisfy the solution formula.
pub fn solution_set(g: &GameSpec, sol: &Formula, x: Var, bound: u64) -> Vec<Position> {
    positions(g.id, bound)
        .into_iter()
        .filter(|&p| {
            let b: HashMap<Var, GroundTree> = [(x, encode_position(p))].into_iter().collect();
            eval_solved_on_ground(sol, &g.sig, &b).expect("solution has only x free")
        })
        .collect()
}

fn show(p: &Position) -> String {
    match p {
        Position::One(i) => i.to_string(),
        Position::Two(i, j) => format!("({i},{j})"),
    }
}

/// Runs `winning_k` for `k = 0..=k_max` and validates each answer against
/// the brute-force winning sets on positions up to `bound`. Stops at the
/// first row that runs out of budget.
pub fn run_bench(g: &GameSpec, k_max: u32, bound: u64, opts: &Options) -> Vec<BenchRow> {
    let mut rows = Vec::new();
    for k in 0..=k_max {
        let start = Instant::now();
        let row = match solve_winning(g, k, opts) {
            Ok((sol, x, _, d)) => {
                let millis = start.elapsed().as_secs_f64() * 1e3;
                let got = solution_set(g, &sol, x, bound);
                let want = game_brute_force(g.id, k, bound);
                let status = if got == want {
                    RowStatus::Validated
                } else {
                    let diff = got.iter().filter(|p| !want.contains(p)).chain(want.iter().filter(|p| !got.contains(p)));
                    RowStatus::Mismatch { positions: diff.map(show).collect() }
                };
                BenchRow {
                    game: g.id,
                    k,
                    millis,
                    steps: d.stats.steps,
                    output_size: sol.size(),
                    disjuncts: d.members.len(),
                    winning: got.iter().map(show).collect(),
                    status,
                }
            }
            Err(e) => BenchRow {
                game: g.id,
                k,
                millis: start.elapsed().as_secs_f64() * 1e3,
                steps: 0,
                output_size: 0,
                disjuncts: 0,
                winning: vec![],
                status: RowStatus::Budget { reason: e.to_string() },
            },
        };
        let stop = matches!(row.status, RowStatus::Budget { .. });
        rows.push(row);
        if stop {
            break;
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::print_formula;

    #[test]
    fn encodings() {
        assert_eq!(encode_position(Position::One(2)).to_string(), "s(s(0))");
        assert_eq!(encode_position(Position::Two(0, 1)).to_string(), "c(0, g(0))");
        assert_eq!(encode_position(Position::Two(2, 0)).to_string(), "c(f(g(0)), 0)");
        assert_eq!(encode_position(Position::Two(3, 4)).to_string(), "c(g(f(g(0))), f(g(f(g(0)))))");
    }

    #[test]
    fn winning_zero_and_one() {
        let g = GameSpec::one();
        let mut vs = Vars::new();
        let x = vs.named("x");
        assert_eq!(gen_winning(&g, 0, x, &mut vs), Formula::False);
        let w1 = gen_winning(&g, 1, x, &mut vs);
        assert_eq!(crate::formula::free_vars(&w1), [x].into_iter().collect());
        let text = print_formula(&w1, &g.sig, &vs);
        assert!(text.starts_with("ex y_1. (x = s(y_1) | x = s(s(y_1)) |"), "{text}");
    }
}
