//! Contract every theory plug-in must honour, run against eq, ra and trees
//! on random solved cores.

use std::collections::{BTreeSet, HashMap};

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use decomp::eq::EqTheory;
use decomp::formula::{free_vars, Conj, FlatAtom, Formula, Signature, Sym, Var, Vars};
use decomp::gen::trees_test_signature;
use decomp::oracles::{eq_oracle, eval_solved_on_ground, ra_oracle, GroundTree};
use decomp::ra::RaTheory;
use decomp::theory::{Decomposition, Theory};
use decomp::trees::{reachable, TreeCore, TreesTheory};

/// A random block `ex x. a`: `a` is a solved core over `vars`, and `x` is
/// every variable from a random cut upwards, so binders outrank the rest.
struct Block<C> {
    vars: Vars,
    all: Vec<Var>,
    x: Vec<Var>,
    core: C,
}

fn random_atoms(sig: &Signature, vs: &[Var], rng: &mut ChaCha8Rng) -> Conj {
    let n = rng.gen_range(0..=6);
    let atoms = (0..n).map(|_| {
        let lhs = *vs.choose(rng).unwrap();
        if sig.functions.is_empty() || rng.gen_bool(0.35) {
            FlatAtom::EqVar(lhs, *vs.choose(rng).unwrap())
        } else {
            let s = Sym(rng.gen_range(0..sig.functions.len() as u32));
            let args = (0..sig.fun(s).arity).map(|_| *vs.choose(rng).unwrap()).collect();
            FlatAtom::EqApp(lhs, s, args)
        }
    });
    Conj::new(atoms)
}

fn random_block<T: Theory>(th: &T, seed: u64) -> Block<T::Core> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vars = Vars::new();
    let n = rng.gen_range(1..=6);
    let all: Vec<Var> = (0..n).map(|i| vars.named(&format!("v{i}"))).collect();
    let cut = rng.gen_range(0..=n);
    let x = all[cut..].to_vec();
    let atoms = random_atoms(th.signature(), &all, &mut rng);
    let core = th.solve(&th.flat_to_core(&atoms).expect("atoms of the theory"));
    Block { vars, all, x, core }
}

fn block_formula<T: Theory>(th: &T, x: &[Var], c: &T::Core) -> Formula {
    Formula::exists(x.to_vec(), th.core_formula(c))
}

fn nested<T: Theory>(th: &T, d: &Decomposition<T::Core>) -> Formula {
    let third = block_formula(th, &d.x_tprime, &d.a_tprime);
    let second = Formula::exists(d.x_dprime.clone(), Formula::and(th.core_formula(&d.a_dprime), third));
    Formula::exists(d.x_prime.clone(), Formula::and(th.core_formula(&d.a_prime), second))
}

fn set(v: &[Var]) -> BTreeSet<Var> {
    v.iter().copied().collect()
}

/// Checks every syntactic clause of the contract and returns the
/// decomposition for the semantic ones.
fn check_contract<T: Theory>(th: &T, b: &Block<T::Core>) -> Result<Decomposition<T::Core>, TestCaseError> {
    let d = th.decompose(&b.x, &b.core).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let label = || format!("{} over {:?}: {:?}", th.print_core(&b.core, &b.vars), b.x, d);

    // Partition of the binders that occur in the core.
    let occurring = set(&th.core_vars(&b.core));
    let parts = [set(&d.x_prime), set(&d.x_dprime), set(&d.x_tprime)];
    let total: usize = parts.iter().map(BTreeSet::len).sum();
    let union: BTreeSet<Var> = parts.iter().flatten().copied().collect();
    prop_assert_eq!(total, union.len(), "blocks overlap: {}", label());
    prop_assert!(union.is_subset(&set(&b.x)), "foreign binder: {}", label());
    let bound_occurring: BTreeSet<Var> = set(&b.x).intersection(&occurring).copied().collect();
    if !th.is_false(&b.core) {
        prop_assert!(bound_occurring.is_subset(&union), "binder lost: {}", label());
    }

    // Nesting.
    let a1 = set(&th.core_vars(&d.a_prime));
    let a2 = set(&th.core_vars(&d.a_dprime));
    prop_assert!(a1.is_disjoint(&parts[1]) && a1.is_disjoint(&parts[2]), "inner binder in first block: {}", label());
    prop_assert!(a2.is_disjoint(&parts[2]), "third binder in second block: {}", label());

    // Membership.
    prop_assert!(th.in_a_prime(&d.x_prime, &d.a_prime), "first block not in A': {}", label());
    prop_assert!(th.in_a_dprime(&d.x_dprime, &d.a_dprime), "second block not in A'': {}", label());
    if !th.is_false(&b.core) {
        prop_assert!(th.in_a_tprime(&d.x_tprime, &d.a_tprime), "third block not in A''': {}", label());
    }

    // A closed first block is `true` or `false`.
    if free_vars(&block_formula(th, &d.x_prime, &d.a_prime)).is_empty() {
        prop_assert!(d.x_prime.is_empty(), "closed first block keeps binders: {}", label());
        prop_assert!(th.is_true(&d.a_prime) || th.is_false(&d.a_prime), "closed first block: {}", label());
    }

    // Decomposing the first block again changes nothing.
    let again = th.decompose(&d.x_prime, &d.a_prime).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(&again.x_prime, &d.x_prime);
    prop_assert_eq!(&again.a_prime, &d.a_prime);
    prop_assert!(again.x_dprime.is_empty() && th.is_true(&again.a_dprime), "second block appears: {:?}", again);
    prop_assert!(again.third_is_trivial(th), "third block appears: {:?}", again);
    Ok(d)
}

/// The closure `all free. (ex x. a) <-> nested` of a block and its
/// decomposition.
fn equivalence<T: Theory>(th: &T, b: &Block<T::Core>, d: &Decomposition<T::Core>) -> Formula {
    let f = block_formula(th, &b.x, &b.core);
    let free: Vec<Var> = b.all.iter().copied().filter(|v| !b.x.contains(v)).collect();
    Formula::forall(free, Formula::iff(f, nested(th, d)))
}

fn ground_tree(sig: &Signature, rng: &mut ChaCha8Rng, depth: usize) -> GroundTree {
    let pick: Vec<&str> = sig
        .functions
        .iter()
        .filter(|s| depth > 0 || s.arity == 0)
        .map(|s| s.name.as_str())
        .collect();
    let name = *pick.choose(rng).unwrap();
    let arity = sig.fun(sig.function(name).unwrap()).arity;
    GroundTree::app(name, (0..arity).map(|_| ground_tree(sig, rng, depth - 1)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn eq_contract(seed in any::<u64>()) {
        let th = EqTheory::new();
        let b = random_block(&th, seed);
        let d = check_contract(&th, &b)?;
        prop_assert!(eq_oracle(&equivalence(&th, &b, &d)).unwrap());
    }

    #[test]
    fn ra_contract(seed in any::<u64>()) {
        let th = RaTheory::new();
        let b = random_block(&th, seed);
        let d = check_contract(&th, &b)?;
        prop_assert!(ra_oracle(&equivalence(&th, &b, &d), th.signature()).unwrap());
    }

    #[test]
    fn trees_contract(seed in any::<u64>()) {
        let sig = trees_test_signature();
        let th = TreesTheory::new(sig.clone());
        let b = random_block(&th, seed);
        let d = check_contract(&th, &b)?;

        // Every first-block binder and equation is reachable there.
        if let TreeCore::Eqs(eqs) = &d.a_prime {
            let r = reachable(&d.x_prime, eqs);
            prop_assert_eq!(r.eqs.len(), eqs.len());
            prop_assert!(set(&d.x_prime).is_subset(&set(&r.vars)));
        }
        // The third block binds exactly its left-hand sides.
        if let TreeCore::Eqs(eqs) = &d.a_tprime {
            prop_assert_eq!(set(&d.x_tprime), eqs.iter().map(|e| e.lhs).collect::<BTreeSet<_>>());
        }

        // Agreement on ground instances of the free variables.
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let f = block_formula(&th, &b.x, &b.core);
        let g = nested(&th, &d);
        for _ in 0..8 {
            let binding: HashMap<Var, GroundTree> =
                b.all.iter().filter(|v| !b.x.contains(v)).map(|&v| (v, ground_tree(&sig, &mut rng, 2))).collect();
            prop_assert_eq!(
                eval_solved_on_ground(&f, &sig, &binding).unwrap(),
                eval_solved_on_ground(&g, &sig, &binding).unwrap()
            );
        }
    }
}
