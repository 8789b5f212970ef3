mod common;

use std::collections::BTreeSet;

use common::*;
use efgame::structures::{induced_substructure, is_partial_isomorphism};
use efgame::{parse_structure, PartialMap, Signature, Structure};
use proptest::prelude::*;

fn arb_structure() -> impl Strategy<Value = Structure> {
    let sig = prop::collection::vec(1usize..=3, 1..=3);
    (1usize..=5, sig).prop_flat_map(|(size, arities)| {
        let tables: Vec<_> = arities
            .iter()
            .map(|&r| prop::collection::vec(prop::collection::vec(0..size, r), 0..8))
            .collect();
        (Just(size), Just(arities), tables).prop_map(|(size, arities, tables)| {
            let names: Vec<_> = arities.iter().enumerate().map(|(i, &r)| (format!("R{i}"), r)).collect();
            Structure::new("s", Signature::new(names).unwrap(), size, tables).unwrap()
        })
    })
}

fn arb_pair_map(max: usize) -> impl Strategy<Value = (Structure, Structure, PartialMap)> {
    (1..=max, 1..=max, any::<u64>()).prop_flat_map(move |(na, nb, seed)| {
        let mut r = rng(seed);
        let a = random_structure(&mut r, na);
        let b = random_structure(&mut r, nb);
        let pairs = prop::collection::vec((0..na, 0..nb), 0..=4);
        (Just(a), Just(b), pairs.prop_map(PartialMap::from_pairs))
    })
}

proptest! {
    #[test]
    fn text_round_trip(s in arb_structure()) {
        let again = parse_structure(&s.to_text()).unwrap();
        prop_assert_eq!(&again, &s);
        prop_assert_eq!(again.to_text(), s.to_text());
    }

    #[test]
    fn inverse_map_gives_same_verdict((a, b, m) in arb_pair_map(4)) {
        prop_assert_eq!(
            is_partial_isomorphism(&a, &b, &m).unwrap(),
            is_partial_isomorphism(&b, &a, &m.inverse()).unwrap()
        );
    }

    #[test]
    fn prefixes_of_isomorphisms_are_isomorphisms((a, b, m) in arb_pair_map(4)) {
        if is_partial_isomorphism(&a, &b, &m).unwrap() {
            for k in 0..m.len() {
                let prefix = PartialMap::from_pairs(m.pairs()[..k].iter().copied());
                prop_assert!(is_partial_isomorphism(&a, &b, &prefix).unwrap());
            }
        }
    }

    #[test]
    fn agrees_with_naive_definition((a, b, m) in arb_pair_map(4)) {
        prop_assert_eq!(is_partial_isomorphism(&a, &b, &m).unwrap(), naive_partial_iso(&a, &b, m.pairs()));
    }
}

/// The map is a partial isomorphism iff it induces a bijection between the induced
/// substructures on its domain and range that is a homomorphism in both directions.
fn via_substructures(a: &Structure, b: &Structure, m: &PartialMap) -> bool {
    if !m.is_consistent() {
        return false;
    }
    if m.is_empty() {
        return true;
    }
    let (sa, dom) = induced_substructure(a, &m.domain()).unwrap();
    let (sb, ran) = induced_substructure(b, &m.range()).unwrap();
    let forward: Vec<usize> = dom
        .iter()
        .map(|x| {
            let y = m.pairs().iter().find(|p| p.0 == *x).unwrap().1;
            ran.iter().position(|&r| r == y).unwrap()
        })
        .collect();
    let hom = |src: &Structure, dst: &Structure, f: &dyn Fn(usize) -> usize| {
        src.tables().iter().zip(dst.tables()).all(|(ts, td)| {
            ts.tuples()
                .iter()
                .all(|row| td.tuples().contains(&row.iter().map(|&e| f(e)).collect::<Vec<_>>()))
        })
    };
    let backward = |y: usize| forward.iter().position(|&f| f == y).unwrap();
    hom(&sa, &sb, &|x| forward[x]) && hom(&sb, &sa, &backward)
}

#[test]
fn substructure_characterisation_small_sizes() {
    let mut r = rng(7);
    for _ in 0..400 {
        let a = random_small(&mut r, 4);
        let b = random_small(&mut r, 4);
        let len = rand::Rng::random_range(&mut r, 0..=4);
        let m = PartialMap::from_pairs((0..len).map(|_| {
            (
                rand::Rng::random_range(&mut r, 0..a.size()),
                rand::Rng::random_range(&mut r, 0..b.size()),
            )
        }));
        assert_eq!(
            is_partial_isomorphism(&a, &b, &m).unwrap(),
            via_substructures(&a, &b, &m),
            "{a}{b}{m}"
        );
    }
}

#[test]
fn substructure_keeps_only_internal_tuples() {
    let sig = Signature::new([("T", 3)]).unwrap();
    let s = Structure::new("t", sig, 4, vec![vec![vec![0, 1, 3], vec![3, 3, 0], vec![1, 2, 3]]]).unwrap();
    let (sub, map) = induced_substructure(&s, &BTreeSet::from([0, 3])).unwrap();
    assert_eq!(map, vec![0, 3]);
    assert_eq!(
        sub.table(0).tuples().iter().cloned().collect::<Vec<_>>(),
        vec![vec![1, 1, 0]]
    );
}
