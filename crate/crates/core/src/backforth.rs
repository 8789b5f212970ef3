//! The static back-and-forth criterion.
//!
//! `σ_0` is the set of finite partial isomorphisms from `A` to `B`; a map lies in `σ_{n+1}`
//! when it lies in `σ_0` and every element on either side can be matched by an extension
//! that lies in `σ_n`. Membership is decided top-down from the query, so only maps with at
//! most `|m| + n` pairs are ever consulted.

use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::error::Error;
use crate::structures::{check_signatures, is_partial_isomorphism, PartialMap, Structure};

type Pairs = SmallVec<[(usize, usize); 8]>;

/// A membership question `m ∈ σ_n` over a fixed pair of structures.
#[derive(Debug, Clone, Copy)]
pub struct SigmaQuery<'s> {
    pub a: &'s Structure,
    pub b: &'s Structure,
    pub map: &'s PartialMap,
    pub depth: usize,
}

/// Memoized decision procedure for one pair of structures.
///
/// The memo is keyed by the sorted pair set and the remaining depth; pick order never
/// affects membership.
#[derive(Debug)]
pub struct BackForth<'s> {
    a: &'s Structure,
    b: &'s Structure,
    /// `memo[d]` holds verdicts for depth `d`.
    memo: Vec<FxHashMap<Pairs, bool>>,
}

impl<'s> BackForth<'s> {
    pub fn new(a: &'s Structure, b: &'s Structure) -> Result<Self, Error> {
        check_signatures(a, b)?;
        Ok(BackForth { a, b, memo: Vec::new() })
    }

    pub fn left(&self) -> &'s Structure {
        self.a
    }

    pub fn right(&self) -> &'s Structure {
        self.b
    }

    /// Number of memoized `(pair set, depth)` verdicts.
    pub fn memo_len(&self) -> usize {
        self.memo.iter().map(FxHashMap::len).sum()
    }

    pub fn sigma_membership(&mut self, map: &PartialMap, depth: usize) -> Result<bool, Error> {
        if !is_partial_isomorphism(self.a, self.b, map)? {
            return Ok(false);
        }
        Ok(self.member(&map.canonical(), depth))
    }

    pub fn n_equivalent(&mut self, n: usize) -> bool {
        self.member(&[], n)
    }

    /// The least `n` in `1..=cap` at which the structures stop being `n`-equivalent.
    pub fn separation_level(&mut self, cap: usize) -> Option<usize> {
        (1..=cap).find(|&n| !self.n_equivalent(n))
    }

    /// `pairs` is sorted, duplicate-free, and already known to be a partial isomorphism.
    fn member(&mut self, pairs: &[(usize, usize)], depth: usize) -> bool {
        if depth == 0 {
            return true;
        }
        if let Some(&v) = self.memo.get(depth).and_then(|m| m.get(pairs)) {
            return v;
        }
        let left = profiles(self.a, pairs.iter().map(|p| p.0));
        let right = profiles(self.b, pairs.iter().map(|p| p.1));
        // (x, y) extends `pairs` to a partial isomorphism iff both lie outside the map and
        // share a profile, so depth one is a comparison of profile sets.
        if distinct(&left) != distinct(&right) {
            return self.record(pairs, depth, false);
        }
        if depth == 1 {
            return self.record(pairs, depth, true);
        }
        let mut same: Option<bool> = None;
        let mut stay = |this: &mut Self| *same.get_or_insert_with(|| this.member(pairs, depth - 1));
        let verdict = 'check: {
            for (x, px) in left.iter().enumerate() {
                let ok = match px {
                    None => stay(self),
                    Some(px) => (0..right.len())
                        .filter(|&y| right[y].as_ref() == Some(px))
                        .any(|y| self.member_extended(pairs, (x, y), depth - 1)),
                };
                if !ok {
                    break 'check false;
                }
            }
            for (y, py) in right.iter().enumerate() {
                let ok = match py {
                    None => stay(self),
                    Some(py) => (0..left.len())
                        .filter(|&x| left[x].as_ref() == Some(py))
                        .any(|x| self.member_extended(pairs, (x, y), depth - 1)),
                };
                if !ok {
                    break 'check false;
                }
            }
            true
        };
        self.record(pairs, depth, verdict)
    }

    fn member_extended(&mut self, pairs: &[(usize, usize)], pair: (usize, usize), depth: usize) -> bool {
        let slot = pairs.partition_point(|&p| p < pair);
        let mut next = Pairs::with_capacity(pairs.len() + 1);
        next.extend_from_slice(&pairs[..slot]);
        next.push(pair);
        next.extend_from_slice(&pairs[slot..]);
        self.member(&next, depth)
    }

    fn record(&mut self, pairs: &[(usize, usize)], depth: usize, verdict: bool) -> bool {
        if self.memo.len() <= depth {
            self.memo.resize_with(depth + 1, FxHashMap::default);
        }
        self.memo[depth].insert(pairs.into(), verdict);
        verdict
    }
}

/// Truth values of every atom that mentions `x` alongside the listed elements, in a fixed
/// enumeration order determined by the list length and the signature.
type Profile = SmallVec<[u64; 2]>;

/// Profile of every element outside `listed`; listed elements get `None`.
fn profiles(s: &Structure, listed: impl Iterator<Item = usize> + Clone) -> Vec<Option<Profile>> {
    let base: SmallVec<[usize; 8]> = listed.collect();
    let mut row = Vec::new();
    let mut index = Vec::new();
    let mut scratch: SmallVec<[usize; 9]> = base.iter().copied().collect();
    scratch.push(0);
    s.elements()
        .map(|x| {
            if base.contains(&x) {
                return None;
            }
            *scratch.last_mut().unwrap() = x;
            let mut bits = Profile::new();
            let mut n = 0usize;
            let fresh = base.len();
            for table in s.tables() {
                let arity = table.arity();
                index.clear();
                index.resize(arity, 0);
                row.resize(arity, 0);
                loop {
                    if index.contains(&fresh) {
                        for (slot, &i) in row.iter_mut().zip(&index) {
                            *slot = scratch[i];
                        }
                        if n.is_multiple_of(64) {
                            bits.push(0);
                        }
                        if table.contains(&row) {
                            *bits.last_mut().unwrap() |= 1 << (n % 64);
                        }
                        n += 1;
                    }
                    let Some(pos) = index.iter().rposition(|&i| i < fresh) else {
                        break;
                    };
                    index[pos] += 1;
                    index[pos + 1..].iter_mut().for_each(|i| *i = 0);
                }
            }
            Some(bits)
        })
        .collect()
}

fn distinct(profiles: &[Option<Profile>]) -> Vec<&Profile> {
    let mut set: Vec<&Profile> = profiles.iter().flatten().collect();
    set.sort_unstable();
    set.dedup();
    set
}

pub fn sigma_membership(query: &SigmaQuery<'_>) -> Result<bool, Error> {
    BackForth::new(query.a, query.b)?.sigma_membership(query.map, query.depth)
}

/// Whether the empty map lies in `σ_n`.
pub fn n_equivalent(a: &Structure, b: &Structure, n: usize) -> Result<bool, Error> {
    Ok(BackForth::new(a, b)?.n_equivalent(n))
}

pub fn separation_level(a: &Structure, b: &Structure, cap: usize) -> Result<Option<usize>, Error> {
    Ok(BackForth::new(a, b)?.separation_level(cap))
}
