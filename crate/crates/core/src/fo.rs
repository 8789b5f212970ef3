//! First-order formulas over relational signatures with equality.
//!
//! Covers quantifier rank, evaluation on finite structures, canonical rank-`n` (Hintikka)
//! descriptions of tuples, and synthesis of sentences that separate two structures.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::backforth::BackForth;
use crate::error::Error;
use crate::structures::Structure;

/// A variable, printed `x<n>`. Canonical formulas number variables by binding depth from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u32);

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Rel(String, Vec<Var>),
    Eq(Var, Var),
    Not(Box<Formula>),
    /// Conjunction; the empty conjunction is true.
    And(Vec<Formula>),
    /// Disjunction; the empty disjunction is false.
    Or(Vec<Formula>),
    Exists(Var, Box<Formula>),
    Forall(Var, Box<Formula>),
}

impl Formula {
    pub fn truth() -> Self {
        Formula::And(Vec::new())
    }

    pub fn falsity() -> Self {
        Formula::Or(Vec::new())
    }

    pub fn rel(name: impl Into<String>, args: impl IntoIterator<Item = Var>) -> Self {
        Formula::Rel(name.into(), args.into_iter().collect())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn exists(v: Var, body: Formula) -> Self {
        Formula::Exists(v, Box::new(body))
    }

    pub fn forall(v: Var, body: Formula) -> Self {
        Formula::Forall(v, Box::new(body))
    }

    /// Conjunction with structurally identical conjuncts merged; a single conjunct stands alone.
    pub fn and(parts: impl IntoIterator<Item = Formula>) -> Self {
        let mut parts = canonical_parts(parts);
        if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::And(parts)
        }
    }

    /// Disjunction with structurally identical disjuncts merged; a single disjunct stands alone.
    pub fn or(parts: impl IntoIterator<Item = Formula>) -> Self {
        let mut parts = canonical_parts(parts);
        if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::Or(parts)
        }
    }

    /// Maximum quantifier nesting depth.
    pub fn quantifier_rank(&self) -> usize {
        match self {
            Formula::Rel(..) | Formula::Eq(..) => 0,
            Formula::Not(f) => f.quantifier_rank(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().map(Formula::quantifier_rank).max().unwrap_or(0),
            Formula::Exists(_, f) | Formula::Forall(_, f) => 1 + f.quantifier_rank(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
        let mut note = |v: &Var, bound: &Vec<Var>| {
            if !bound.contains(v) {
                out.insert(*v);
            }
        };
        match self {
            Formula::Rel(_, args) => args.iter().for_each(|v| note(v, bound)),
            Formula::Eq(x, y) => {
                note(x, bound);
                note(y, bound);
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_free(bound, out)),
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                bound.push(*v);
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::Rel(..) | Formula::Eq(..) => 1,
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => 1 + f.size(),
            Formula::And(fs) | Formula::Or(fs) => 1 + fs.iter().map(Formula::size).sum::<usize>(),
        }
    }
}

fn canonical_parts(parts: impl IntoIterator<Item = Formula>) -> Vec<Formula> {
    let mut parts: Vec<Formula> = parts.into_iter().collect();
    parts.sort_unstable();
    parts.dedup();
    parts
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Rel(name, args) => {
                write!(f, "(rel {name}")?;
                for v in args {
                    write!(f, " {v}")?;
                }
                f.write_str(")")
            }
            Formula::Eq(x, y) => write!(f, "(= {x} {y})"),
            Formula::Not(g) => write!(f, "(not {g})"),
            Formula::And(gs) | Formula::Or(gs) => {
                f.write_str(if matches!(self, Formula::And(_)) { "(and" } else { "(or" })?;
                for g in gs {
                    write!(f, " {g}")?;
                }
                f.write_str(")")
            }
            Formula::Exists(v, g) => write!(f, "(exists {v} {g})"),
            Formula::Forall(v, g) => write!(f, "(forall {v} {g})"),
        }
    }
}

/// A formula without free variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sentence(Formula);

impl Sentence {
    pub fn new(f: Formula) -> Result<Self, Error> {
        match f.free_vars().first() {
            Some(v) => Err(Error::UnboundVariable(v.0)),
            None => Ok(Sentence(f)),
        }
    }

    pub fn formula(&self) -> &Formula {
        &self.0
    }

    pub fn into_formula(self) -> Formula {
        self.0
    }

    pub fn quantifier_rank(&self) -> usize {
        self.0.quantifier_rank()
    }

    pub fn holds_in(&self, s: &Structure) -> Result<bool, Error> {
        eval(s, &self.0, &Assignment::new())
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub type Assignment = BTreeMap<Var, usize>;

pub fn quantifier_rank(f: &Formula) -> usize {
    f.quantifier_rank()
}

/// Tarskian truth of `f` in `s` under `env`. Quantifiers range over the whole universe.
pub fn eval(s: &Structure, f: &Formula, env: &Assignment) -> Result<bool, Error> {
    for &e in env.values() {
        if e >= s.size() {
            return Err(Error::ElementOutOfRange {
                element: e,
                size: s.size(),
            });
        }
    }
    if let Some(v) = f.free_vars().into_iter().find(|v| !env.contains_key(v)) {
        return Err(Error::UnboundVariable(v.0));
    }
    check_relations(s, f)?;
    let slots = env
        .keys()
        .chain(bound_vars(f).iter())
        .map(|v| v.0 as usize + 1)
        .max()
        .unwrap_or(0);
    let mut values = vec![0usize; slots];
    for (v, &e) in env {
        values[v.0 as usize] = e;
    }
    Ok(Evaluator { s, scratch: Vec::new() }.run(f, &mut values))
}

fn bound_vars(f: &Formula) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    let mut stack = vec![f];
    while let Some(g) = stack.pop() {
        match g {
            Formula::Rel(..) | Formula::Eq(..) => {}
            Formula::Not(h) => stack.push(h),
            Formula::And(hs) | Formula::Or(hs) => stack.extend(hs),
            Formula::Exists(v, h) | Formula::Forall(v, h) => {
                out.insert(*v);
                stack.push(h);
            }
        }
    }
    out
}

fn check_relations(s: &Structure, f: &Formula) -> Result<(), Error> {
    match f {
        Formula::Rel(name, args) => match s.signature().arity(name) {
            None => Err(Error::UnknownRelation(name.clone())),
            Some(arity) if arity != args.len() => Err(Error::ArityMismatch {
                relation: name.clone(),
                expected: arity,
                found: args.len(),
            }),
            Some(_) => Ok(()),
        },
        Formula::Eq(..) => Ok(()),
        Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => check_relations(s, g),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().try_for_each(|g| check_relations(s, g)),
    }
}

struct Evaluator<'s> {
    s: &'s Structure,
    scratch: Vec<usize>,
}

impl Evaluator<'_> {
    fn run(&mut self, f: &Formula, values: &mut [usize]) -> bool {
        match f {
            Formula::Rel(name, args) => {
                self.scratch.clear();
                self.scratch.extend(args.iter().map(|v| values[v.0 as usize]));
                self.s.table_by_name(name).expect("checked").contains(&self.scratch)
            }
            Formula::Eq(x, y) => values[x.0 as usize] == values[y.0 as usize],
            Formula::Not(g) => !self.run(g, values),
            Formula::And(gs) => gs.iter().all(|g| self.run(g, values)),
            Formula::Or(gs) => gs.iter().any(|g| self.run(g, values)),
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                let slot = v.0 as usize;
                let saved = values[slot];
                let want = matches!(f, Formula::Exists(..));
                let mut verdict = !want;
                for e in self.s.elements() {
                    values[slot] = e;
                    if self.run(g, values) == want {
                        verdict = want;
                        break;
                    }
                }
                values[slot] = saved;
                verdict
            }
        }
    }
}

/// The canonical rank-`n` description of `tuple` in `a`, with free variables `x1..x|tuple|`.
///
/// Rank 0 is the conjunction of every atomic and negated atomic fact about the tuple,
/// equalities included. Rank `n+1` says which rank-`n` types the tuple extends to
/// (one existential per element of `a`) and that it extends to no others (one universal
/// over their disjunction).
pub fn hintikka_formula(a: &Structure, tuple: &[usize], n: usize) -> Result<Formula, Error> {
    if let Some(&e) = tuple.iter().find(|&&e| e >= a.size()) {
        return Err(Error::ElementOutOfRange {
            element: e,
            size: a.size(),
        });
    }
    let mut builder = HintikkaBuilder {
        a,
        memo: HashMap::new(),
    };
    let mut t = tuple.to_vec();
    Ok(builder.build(&mut t, n))
}

struct HintikkaBuilder<'s> {
    a: &'s Structure,
    memo: HashMap<(Vec<usize>, usize), Formula>,
}

impl HintikkaBuilder<'_> {
    fn build(&mut self, tuple: &mut Vec<usize>, n: usize) -> Formula {
        if n == 0 {
            return self.atomic_type(tuple);
        }
        let key = (tuple.clone(), n);
        if let Some(f) = self.memo.get(&key) {
            return f.clone();
        }
        let fresh = Var(tuple.len() as u32 + 1);
        let mut children = Vec::with_capacity(self.a.size());
        for e in self.a.elements() {
            tuple.push(e);
            children.push(self.build(tuple, n - 1));
            tuple.pop();
        }
        let children = canonical_parts(children);
        let everything = Formula::forall(fresh, Formula::or(children.iter().cloned()));
        let f = Formula::and(
            children
                .into_iter()
                .map(|c| Formula::exists(fresh, c))
                .chain(std::iter::once(everything)),
        );
        self.memo.insert(key, f.clone());
        f
    }

    fn atomic_type(&self, tuple: &[usize]) -> Formula {
        let var = |i: usize| Var(i as u32 + 1);
        let literal = |f: Formula, holds: bool| if holds { f } else { Formula::not(f) };
        let mut facts = Vec::new();
        for i in 0..tuple.len() {
            for j in i + 1..tuple.len() {
                facts.push(literal(Formula::Eq(var(i), var(j)), tuple[i] == tuple[j]));
            }
        }
        for (symbol, table) in self.a.signature().relations().iter().zip(self.a.tables()) {
            if tuple.is_empty() {
                continue;
            }
            let mut index = vec![0usize; symbol.arity];
            let mut row = vec![0usize; symbol.arity];
            loop {
                for (slot, &i) in row.iter_mut().zip(&index) {
                    *slot = tuple[i];
                }
                let atom = Formula::rel(symbol.name.clone(), index.iter().map(|&i| var(i)));
                facts.push(literal(atom, table.contains(&row)));
                // odometer over index tuples in [0, |tuple|)^arity
                let Some(pos) = index.iter().rposition(|&i| i + 1 < tuple.len()) else {
                    break;
                };
                index[pos] += 1;
                index[pos + 1..].iter_mut().for_each(|i| *i = 0);
            }
        }
        Formula::and(facts)
    }
}

/// A sentence of rank at most `n` true in `a` and false in `b`, or `None` when they are
/// `n`-equivalent. The witness is the Hintikka sentence of `a` at the least separating rank.
pub fn distinguishing_sentence(a: &Structure, b: &Structure, n: usize) -> Result<Option<Sentence>, Error> {
    let level = BackForth::new(a, b)?.separation_level(n);
    level
        .map(|m| hintikka_formula(a, &[], m).and_then(Sentence::new))
        .transpose()
}
