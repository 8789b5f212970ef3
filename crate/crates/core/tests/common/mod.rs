//! Independent oracles and structure generators shared by the integration suites.
//!
//! Nothing here calls into the memoized engines; every check is a direct transcription of
//! the definitions, kept deliberately slow and simple.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use efgame::fo::{Formula, Var};
use efgame::{Player, Signature, Structure};
use rand::Rng;

pub fn binary_sig() -> Signature {
    Signature::new([("R", 2)]).unwrap()
}

pub fn from_edges(size: usize, edges: &[(usize, usize)]) -> Structure {
    let rows = edges.iter().map(|&(u, v)| vec![u, v]).collect();
    Structure::new(format!("g{size}"), binary_sig(), size, vec![rows]).unwrap()
}

fn from_mask(size: usize, mask: u64) -> Structure {
    let edges: Vec<_> = (0..size * size)
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| (i / size, i % size))
        .collect();
    from_edges(size, &edges)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn edge_set(s: &Structure) -> BTreeSet<(usize, usize)> {
    s.table(0).tuples().iter().map(|t| (t[0], t[1])).collect()
}

/// One representative per isomorphism class of directed graphs (loops allowed) on `size`
/// vertices.
pub fn iso_classes(size: usize) -> Vec<Structure> {
    let perms = permutations(size);
    let mut seen = HashSet::new();
    let mut reps = Vec::new();
    for mask in 0..(1u64 << (size * size)) {
        let s = from_mask(size, mask);
        let edges = edge_set(&s);
        let canon = perms
            .iter()
            .map(|p| {
                let mut e: Vec<_> = edges.iter().map(|&(u, v)| (p[u], p[v])).collect();
                e.sort();
                e
            })
            .min()
            .unwrap();
        if seen.insert(canon) {
            reps.push(s);
        }
    }
    reps
}

pub fn iso_classes_up_to(max: usize) -> Vec<Structure> {
    (1..=max).flat_map(iso_classes).collect()
}

pub fn random_structure(rng: &mut impl Rng, size: usize) -> Structure {
    let density = rng.random_range(0.1..0.9);
    let edges: Vec<_> = (0..size)
        .flat_map(|u| (0..size).map(move |v| (u, v)))
        .filter(|_| rng.random_bool(density))
        .collect();
    from_edges(size, &edges)
}

/// A random structure with between one and `max` elements.
pub fn random_small(rng: &mut impl Rng, max: usize) -> Structure {
    let size = rng.random_range(1..=max);
    random_structure(rng, size)
}

/// A random structure isomorphic to `s`, obtained by shuffling its elements.
pub fn shuffled(rng: &mut impl Rng, s: &Structure) -> Structure {
    let mut perm: Vec<usize> = (0..s.size()).collect();
    for i in (1..perm.len()).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    let tables = s
        .tables()
        .iter()
        .map(|t| {
            t.tuples()
                .iter()
                .map(|row| row.iter().map(|&e| perm[e]).collect())
                .collect()
        })
        .collect();
    Structure::new(s.name(), s.signature().clone(), s.size(), tables).unwrap()
}

/// Brute-force isomorphism test over all bijections.
pub fn isomorphic(a: &Structure, b: &Structure) -> bool {
    if a.size() != b.size() || a.signature() != b.signature() {
        return false;
    }
    permutations(a.size()).iter().any(|p| {
        a.tables().iter().zip(b.tables()).all(|(ta, tb)| {
            ta.len() == tb.len()
                && ta
                    .tuples()
                    .iter()
                    .all(|row| tb.tuples().contains(&row.iter().map(|&e| p[e]).collect::<Vec<_>>()))
        })
    })
}

/// Every tuple over `dom` of the given arity.
fn tuples_over(dom: &[usize], arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                dom.iter().map(move |&e| {
                    let mut t = t.clone();
                    t.push(e);
                    t
                })
            })
            .collect();
    }
    out
}

/// Partial isomorphism straight from the definition.
pub fn naive_partial_iso(a: &Structure, b: &Structure, pairs: &[(usize, usize)]) -> bool {
    for &(x, y) in pairs {
        for &(x2, y2) in pairs {
            if (x == x2) != (y == y2) {
                return false;
            }
        }
    }
    let dom: Vec<usize> = pairs.iter().map(|p| p.0).collect::<BTreeSet<_>>().into_iter().collect();
    let image = |x: usize| pairs.iter().find(|p| p.0 == x).unwrap().1;
    a.tables().iter().zip(b.tables()).all(|(ta, tb)| {
        tuples_over(&dom, ta.arity()).iter().all(|t| {
            let mapped: Vec<usize> = t.iter().map(|&x| image(x)).collect();
            ta.tuples().contains(t) == tb.tuples().contains(&mapped)
        })
    })
}

/// `pairs ∈ σ_n` by unmemoized recursion over all extensions.
pub fn naive_sigma(a: &Structure, b: &Structure, pairs: &[(usize, usize)], n: usize) -> bool {
    if !naive_partial_iso(a, b, pairs) {
        return false;
    }
    if n == 0 {
        return true;
    }
    let ext = |x: usize, y: usize| {
        let mut p = pairs.to_vec();
        p.push((x, y));
        naive_sigma(a, b, &p, n - 1)
    };
    (0..a.size()).all(|x| (0..b.size()).any(|y| ext(x, y))) && (0..b.size()).all(|y| (0..a.size()).any(|x| ext(x, y)))
}

pub fn naive_equivalent(a: &Structure, b: &Structure, n: usize) -> bool {
    naive_sigma(a, b, &[], n)
}

/// Plain minimax over the game tree with no memo. Spoiler wins at once when a round breaks
/// functionality or injectivity; otherwise the final picks decide.
pub fn naive_game(a: &Structure, b: &Structure, picks: &mut Vec<(usize, usize)>, remaining: usize) -> Player {
    if remaining == 0 {
        return if naive_partial_iso(a, b, picks) {
            Player::Duplicator
        } else {
            Player::Spoiler
        };
    }
    let mut spoiler_options = Vec::new();
    for x in 0..a.size() {
        spoiler_options.push((true, x));
    }
    for y in 0..b.size() {
        spoiler_options.push((false, y));
    }
    let spoiler_wins = spoiler_options.into_iter().any(|(in_left, e)| {
        let replies = if in_left { b.size() } else { a.size() };
        (0..replies).all(|r| {
            let pair = if in_left { (e, r) } else { (r, e) };
            let broken = picks.iter().any(|&(x, y)| (x == pair.0) != (y == pair.1));
            if broken {
                return true;
            }
            picks.push(pair);
            let w = naive_game(a, b, picks, remaining - 1);
            picks.pop();
            w == Player::Spoiler
        })
    });
    if spoiler_wins {
        Player::Spoiler
    } else {
        Player::Duplicator
    }
}

pub fn naive_winner(a: &Structure, b: &Structure, n: usize) -> Player {
    naive_game(a, b, &mut Vec::new(), n)
}

/// Bottom-up evaluator: computes the set of satisfying assignments of every subformula over
/// a fixed list of variables, then checks whether `env` is among them.
pub fn naive_eval(s: &Structure, f: &Formula, env: &[(Var, usize)]) -> bool {
    let mut vars: BTreeSet<Var> = env.iter().map(|p| p.0).collect();
    collect_vars(f, &mut vars);
    let vars: Vec<Var> = vars.into_iter().collect();
    let all = tuples_over(&(0..s.size()).collect::<Vec<_>>(), vars.len());
    let sat = satisfying(s, f, &vars, &all);
    all.iter().any(|asg| {
        sat.contains(asg)
            && env
                .iter()
                .all(|(v, e)| asg[vars.iter().position(|w| w == v).unwrap()] == *e)
    })
}

fn collect_vars(f: &Formula, out: &mut BTreeSet<Var>) {
    match f {
        Formula::Rel(_, args) => out.extend(args.iter().copied()),
        Formula::Eq(x, y) => {
            out.insert(*x);
            out.insert(*y);
        }
        Formula::Not(g) => collect_vars(g, out),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| collect_vars(g, out)),
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            out.insert(*v);
            collect_vars(g, out);
        }
    }
}

fn satisfying(s: &Structure, f: &Formula, vars: &[Var], all: &[Vec<usize>]) -> HashSet<Vec<usize>> {
    let at = |v: &Var| vars.iter().position(|w| w == v).unwrap();
    let everything = || all.iter().cloned().collect::<HashSet<_>>();
    match f {
        Formula::Rel(name, args) => {
            let table = s.table_by_name(name).unwrap();
            all.iter()
                .filter(|asg| {
                    table
                        .tuples()
                        .contains(&args.iter().map(|v| asg[at(v)]).collect::<Vec<_>>())
                })
                .cloned()
                .collect()
        }
        Formula::Eq(x, y) => all.iter().filter(|asg| asg[at(x)] == asg[at(y)]).cloned().collect(),
        Formula::Not(g) => {
            let inner = satisfying(s, g, vars, all);
            everything().difference(&inner).cloned().collect()
        }
        Formula::And(gs) => gs.iter().fold(everything(), |acc, g| {
            acc.intersection(&satisfying(s, g, vars, all)).cloned().collect()
        }),
        Formula::Or(gs) => gs.iter().fold(HashSet::new(), |acc, g| {
            acc.union(&satisfying(s, g, vars, all)).cloned().collect()
        }),
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            let inner = satisfying(s, g, vars, all);
            let i = at(v);
            let want_all = matches!(f, Formula::Forall(..));
            all.iter()
                .filter(|asg| {
                    let mut probe = (*asg).clone();
                    let mut hits = (0..s.size()).map(|e| {
                        probe[i] = e;
                        inner.contains(&probe)
                    });
                    if want_all {
                        hits.all(|h| h)
                    } else {
                        hits.any(|h| h)
                    }
                })
                .cloned()
                .collect()
        }
    }
}

pub fn rng(seed: u64) -> rand::rngs::StdRng {
    use rand::SeedableRng;
    rand::rngs::StdRng::seed_from_u64(seed)
}
