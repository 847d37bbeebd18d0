use std::collections::{BTreeMap, BTreeSet};

use ccancel::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn e(slot: usize, index: u64) -> Element {
    Element::new(slot, index)
}

fn fuel() -> FuelPolicy {
    FuelPolicy::default()
}

/// A bijection `n x Fin(s) -> n x Fin(s)` from a list of end pairs `((l, x), (m, y))`.
fn finite_map(n: usize, sa: u64, sb: u64, pairs: &[((usize, u64), (usize, u64))]) -> PamMap {
    let a = Space::fin(sa).repeat(n);
    let b = Space::fin(sb).repeat(n);
    PamMap::from_table(&a, &b, pairs.iter().map(|&((l, x), (m, y))| (e(l, x), e(m, y)))).unwrap()
}

fn random_bijection(rng: &mut ChaCha8Rng, n: usize, s: u64) -> PamMap {
    let mut targets: Vec<(usize, u64)> = (0..n).flat_map(|l| (0..s).map(move |y| (l, y))).collect();
    targets.shuffle(rng);
    let pairs: Vec<_> = (0..n).flat_map(|l| (0..s).map(move |x| (l, x))).zip(targets).collect();
    finite_map(n, s, s, &pairs)
}

fn table(w: &Witness) -> BTreeMap<u64, u64> {
    w.table().unwrap().into_iter().map(|(x, y)| (x.index, y.index)).collect()
}

/// Connected pieces of the picture, as a label per blue and per red element.
fn components(n: usize, f: &PamMap, s: u64) -> (Vec<usize>, Vec<usize>) {
    let mut parent: Vec<usize> = (0..2 * s as usize).collect();
    fn find(p: &mut Vec<usize>, i: usize) -> usize {
        if p[i] != i {
            let r = find(p, p[i]);
            p[i] = r;
        }
        p[i]
    }
    for l in 0..n {
        for x in 0..s {
            let y = f.eval(e(l, x)).unwrap();
            let (i, j) = (find(&mut parent, x as usize), find(&mut parent, s as usize + y.index as usize));
            parent[i] = j;
        }
    }
    let blue = (0..s as usize).map(|i| find(&mut parent, i)).collect();
    let red = (0..s as usize).map(|i| find(&mut parent, s as usize + i)).collect();
    (blue, red)
}

// The necklace a, b, c / x, y, z of the worked example: a = 0, b = 1, c = 2
// and x = 0, y = 1, z = 2; label 0 is the tail, 1 the head.
fn example() -> PamMap {
    finite_map(
        2,
        3,
        3,
        &[((0, 0), (0, 0)), ((1, 0), (1, 1)), ((0, 1), (1, 0)), ((1, 1), (1, 2)), ((0, 2), (0, 1)), ((1, 2), (0, 2))],
    )
}

#[test]
fn example_division_by_two() {
    let g = divide_by_two(&example(), fuel()).unwrap();
    assert!(g.is_explicit());
    assert_eq!(table(&g), BTreeMap::from([(0, 0), (1, 2), (2, 1)]));
}

#[test]
fn example_count_traces() {
    let f = example();
    let c = paren_count_trace(&f, Arrow::Blue(e(0, 2)), fuel()).unwrap();
    assert_eq!(c, vec![(Arrow::Blue(e(0, 2)), 1), (Arrow::Red(e(0, 1)), 0)]);
    let b = paren_count_trace(&f, Arrow::Blue(e(0, 1)), fuel()).unwrap();
    let counts: Vec<i64> = b.iter().map(|&(_, c)| c).collect();
    assert_eq!(counts, vec![1, 2, 1, 2, 1, 0]);
    let order: Vec<String> = b.iter().map(|(p, _)| p.to_string()).collect();
    assert_eq!(order, ["A0:1", "B0:0", "A0:0", "B0:1", "A0:2", "B0:2"]);
    let m = match_parentheses(&f, fuel()).unwrap();
    assert_eq!(m[&Arrow::Blue(e(0, 0))], Some(Arrow::Red(e(0, 0))));
    assert_eq!(m[&Arrow::Red(e(0, 2))], Some(Arrow::Blue(e(0, 1))));
}

#[test]
fn arrows_facing_the_same_way_are_unmatched() {
    // Head of a to tail of y, tail of a to head of y.
    let f = finite_map(2, 1, 1, &[((0, 0), (1, 0)), ((1, 0), (0, 0))]);
    let m = match_parentheses(&f, fuel()).unwrap();
    assert!(m.values().all(Option::is_none));
    let g = divide_by_two(&f, fuel()).unwrap();
    assert_eq!(table(&g), BTreeMap::from([(0, 0)]));
}

#[test]
fn empty_division() {
    let f = PamMap::empty(&Space::empty(), &Space::empty());
    assert!(divide_by_two(&f, fuel()).unwrap().table().unwrap().is_empty());
    assert!(divide_by_n(3, &f, fuel()).unwrap().table().unwrap().is_empty());
}

/// Parentheses of one necklace read in walking order: `true` for an
/// opening parenthesis.
fn necklaces(f: &PamMap, s: u64) -> Vec<Vec<(Arrow, bool)>> {
    let finv = f.invert().unwrap();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for x in 0..s {
        if seen.contains(&Arrow::Blue(e(0, x))) {
            continue;
        }
        let mut ring = Vec::new();
        // Enter x at its tail, leave by its head.
        let (mut p, mut entered) = (Arrow::Blue(e(0, x)), 0usize);
        loop {
            ring.push((p, entered == 1));
            seen.insert(p);
            let leave = 1 - entered;
            let next = match p {
                Arrow::Blue(a) => finv_or_f(f, leave, a).map(|(l, y)| (Arrow::Red(e(0, y)), l)),
                Arrow::Red(b) => finv_or_f(&finv, leave, b).map(|(l, y)| (Arrow::Blue(e(0, y)), l)),
            }
            .unwrap();
            (p, entered) = next;
            if p == ring[0].0 {
                break;
            }
        }
        out.push(ring);
    }
    out
}

fn finv_or_f(m: &PamMap, end: usize, x: Element) -> Option<(usize, u64)> {
    m.eval(e(end, x.index)).map(|y| (y.slot, y.index))
}

/// Division by two on one necklace by stack matching on the doubled ring.
fn necklace_oracle(ring: &[(Arrow, bool)]) -> BTreeMap<u64, u64> {
    let len = ring.len();
    let mut partner = vec![None; len];
    let mut stack: Vec<usize> = Vec::new();
    for i in 0..2 * len {
        if ring[i % len].1 {
            stack.push(i);
        } else if let Some(j) = stack.pop() {
            if i - j < len && partner[i % len].is_none() && partner[j % len].is_none() {
                partner[i % len] = Some(j % len);
                partner[j % len] = Some(i % len);
            }
        }
    }
    let index = |p: Arrow| match p {
        Arrow::Blue(x) | Arrow::Red(x) => x.index,
    };
    let mut g = BTreeMap::new();
    let unmatched: Vec<usize> = (0..len).filter(|&i| partner[i].is_none()).collect();
    if unmatched.is_empty() {
        for i in 0..len {
            if let Arrow::Blue(x) = ring[i].0 {
                g.insert(x.index, index(ring[partner[i].unwrap()].0));
            }
        }
    } else {
        // Open sides of the unmatched parentheses face up the street.
        let up_is_forward = ring[unmatched[0]].1;
        assert!(unmatched.iter().all(|&i| ring[i].1 == up_is_forward));
        for i in 0..len {
            if let Arrow::Blue(x) = ring[i].0 {
                let j = if up_is_forward { (i + 1) % len } else { (i + len - 1) % len };
                g.insert(x.index, index(ring[j].0));
            }
        }
    }
    g
}

fn all_permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in all_permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

#[test]
fn division_by_two_exhaustive_on_two_arrows() {
    let ends: Vec<(usize, u64)> = (0..2).flat_map(|l| (0..2).map(move |x| (l, x))).collect();
    let perms = all_permutations(4);
    assert_eq!(perms.len(), 24);
    for p in perms {
        let pairs: Vec<_> = ends.iter().enumerate().map(|(i, &end)| (end, ends[p[i]])).collect();
        let f = finite_map(2, 2, 2, &pairs);
        let g = divide_by_two(&f, fuel()).unwrap();
        let expected: BTreeMap<u64, u64> = necklaces(&f, 2).iter().flat_map(|r| necklace_oracle(r)).collect();
        assert_eq!(table(&g), expected, "{f:?}");
        assert_eq!(table(&divide_by_two(&f, fuel()).unwrap()), expected);
        let (g2, report) = divide_by_two_2omega(&f, fuel()).unwrap();
        assert!(report.max_leftover() <= 1);
        assert!(table(&g2).values().collect::<BTreeSet<_>>().len() == 2);
        let gn = divide_by_n(2, &f, fuel()).unwrap();
        assert!(gn.as_map().unwrap().is_bijective());
    }
}

#[test]
fn division_by_two_random_necklaces() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let s = rng.gen_range(1..=5);
        let f = random_bijection(&mut rng, 2, s);
        let g = divide_by_two(&f, fuel()).unwrap();
        let expected: BTreeMap<u64, u64> = necklaces(&f, s).iter().flat_map(|r| necklace_oracle(r)).collect();
        assert_eq!(table(&g), expected);
        let (g2, report) = divide_by_two_2omega(&f, fuel()).unwrap();
        assert!(report.max_leftover() <= 1, "{report:?}");
        assert!(g2.as_map().unwrap().is_bijective());
        if report.leftovers.iter().all(|&k| k == 0) && necklaces(&f, s).iter().all(|r| matched_only(r)) {
            assert_eq!(table(&g2), expected);
        }
    }
}

fn matched_only(ring: &[(Arrow, bool)]) -> bool {
    ring.iter().filter(|p| p.1).count() * 2 == ring.len()
}

fn conjugate(f: &PamMap, n: usize, sigma: &[u64], tau: &[u64]) -> PamMap {
    let s = sigma.len() as u64;
    let pairs: Vec<_> = (0..n)
        .flat_map(|l| (0..s).map(move |x| (l, x)))
        .map(|(l, x)| {
            let y = f.eval(e(l, x)).unwrap();
            ((l, sigma[x as usize]), (y.slot, tau[y.index as usize]))
        })
        .collect();
    finite_map(n, s, s, &pairs)
}

#[test]
fn division_by_three_random() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let s = rng.gen_range(1..=4);
        let f = random_bijection(&mut rng, 3, s);
        let g = table(&divide_by_n(3, &f, fuel()).unwrap());
        assert_eq!(g.values().collect::<BTreeSet<_>>().len(), s as usize);
        let (blue, red) = components(3, &f, s);
        for (&x, &y) in &g {
            assert_eq!(blue[x as usize], red[y as usize]);
        }
        assert_eq!(g, table(&divide_by_n(3, &f, fuel()).unwrap()));
        let mut sigma: Vec<u64> = (0..s).collect();
        let mut tau: Vec<u64> = (0..s).collect();
        sigma.shuffle(&mut rng);
        tau.shuffle(&mut rng);
        let g2 = table(&divide_by_n(3, &conjugate(&f, 3, &sigma, &tau), fuel()).unwrap());
        for (&x, &y) in &g {
            assert_eq!(g2[&sigma[x as usize]], tau[y as usize]);
        }
    }
}

#[test]
fn division_by_one_is_the_input() {
    let f = finite_map(1, 3, 3, &[((0, 0), (0, 2)), ((0, 1), (0, 0)), ((0, 2), (0, 1))]);
    assert_eq!(table(&divide_by_n(1, &f, fuel()).unwrap()), BTreeMap::from([(0, 2), (1, 0), (2, 1)]));
    assert!(matches!(divide_by_n(0, &f, fuel()), Err(Error::Precondition(_))));
}

#[test]
fn single_triangles_match() {
    let f = finite_map(3, 1, 1, &[((0, 0), (2, 0)), ((1, 0), (0, 0)), ((2, 0), (1, 0))]);
    assert_eq!(table(&divide_by_n(3, &f, fuel()).unwrap()), BTreeMap::from([(0, 0)]));
}

#[test]
fn staged_matching_agrees_with_pointwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let s = rng.gen_range(1..=3);
        let f = random_bijection(&mut rng, 3, s);
        let staged = divide_by_n_staged(3, &f, GreedyConfig { max_len: Some(3), ..GreedyConfig::default() }).unwrap();
        if staged.is_perfect() {
            let g = divide_by_n(3, &f, fuel()).unwrap();
            assert_eq!(g.as_map().unwrap(), &staged.matched);
        }
    }
}

#[test]
fn one_stage_is_a_partial_matching() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..30 {
        let s = rng.gen_range(1..=4);
        let f = random_bijection(&mut rng, 3, s);
        let (a, b) = (SubsetRep::full(&Space::fin(s)), SubsetRep::full(&Space::fin(s)));
        for d in [vec![(0, 0)], vec![(1, 2)], vec![(0, 1), (2, 2), (1, 0)]] {
            let m = greedy_match_stage(3, &f, &PathDescription(d), &a, &b).unwrap();
            assert!(m.is_injective());
        }
    }
}

#[test]
fn inequality_division() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..50 {
        let mut targets: Vec<(usize, u64)> = (0..3).flat_map(|l| (0..2).map(move |y| (l, y))).collect();
        targets.shuffle(&mut rng);
        let pairs: Vec<_> = (0..3).map(|l| (l, 0)).zip(targets).collect();
        let t = finite_map(3, 1, 2, &pairs);
        let g = divide_inequality_by_n(3, &t, fuel()).unwrap();
        assert_eq!(g.kind(), WitnessKind::Injection);
        assert_eq!(g.table().unwrap().len(), 1);
    }
    let f = random_bijection(&mut rng, 3, 3);
    let g = divide_inequality_by_n(3, &f, fuel()).unwrap();
    assert_eq!(table(&g), table(&divide_by_n(3, &f, fuel()).unwrap()));
    let empty = PamMap::empty(&Space::empty(), &Space::fin(2).repeat(3));
    assert!(divide_inequality_by_n(3, &empty, fuel()).unwrap().table().unwrap().is_empty());
}

fn omega2(exc: &[((usize, u64), (usize, u64))], pieces: &[ApPiece]) -> PamMap {
    let s = Space::omega().repeat(2);
    PamMap::new(&s, &s, exc.iter().map(|&((l, x), (m, y))| (e(l, x), e(m, y))).collect::<Vec<_>>(), pieces.to_vec())
        .unwrap()
}

// (0, x) -> (0, x - 1), (0, 0) -> (1, 0), (1, x) -> (1, x + 1): the greedy
// step leaves 0 unmatched and the repair passes partners along the odd numbers.
fn shifted() -> PamMap {
    omega2(
        &[((0, 0), (1, 0))],
        &[ApPiece::new(0, Ap::tail(1), 0, Ap::tail(0)), ApPiece::new(1, Ap::tail(0), 1, Ap::tail(1))],
    )
}

fn expected_repair(x: u64) -> u64 {
    match x {
        0 => 0,
        x if x % 2 == 1 => x + 1,
        x => x - 1,
    }
}

#[test]
fn countable_repair() {
    let g = divide_by_n(2, &shifted(), fuel()).unwrap();
    assert!(g.is_explicit());
    for x in 0..200 {
        assert_eq!(g.apply(e(0, x)).unwrap(), e(0, expected_repair(x)));
    }
    g.verify_prefix(1000).unwrap();
    let h = divide_by_n(2, &shifted().invert().unwrap(), fuel()).unwrap();
    h.verify_prefix(1000).unwrap();
}

#[test]
fn countable_division_by_two() {
    let f = shifted();
    let g = divide_by_two(&f, fuel()).unwrap();
    g.verify_prefix(1000).unwrap();
    let id = PamMap::identity(&Space::omega().repeat(2));
    let g = divide_by_two(&id, fuel()).unwrap();
    assert_eq!(g.as_map().unwrap(), &PamMap::identity(&Space::omega()));
}

#[test]
fn repeated_subtraction() {
    let id = PamMap::identity(&Space::fin(2).repeat(3));
    match repeated_subtraction_divide(3, &id, fuel(), 10).unwrap() {
        RepeatedSubtraction::Complete { rounds, .. } => assert_eq!(rounds, 1),
        other => panic!("{other:?}"),
    }
    // Every vertex l of the single blue triangle meets vertex l + 1.
    let rot = finite_map(3, 1, 1, &[((0, 0), (1, 0)), ((1, 0), (2, 0)), ((2, 0), (0, 0))]);
    assert!(!repeated_subtraction_divide(3, &rot, fuel(), 10).unwrap().is_complete());
    assert!(divide_by_n(3, &rot, fuel()).is_ok());
    let s = Space::omega().repeat(3);
    let pieces: Vec<ApPiece> = (0..3).map(|l| ApPiece::new(l, Ap::tail(0), (l + 1) % 3, Ap::tail(0))).collect();
    let rot = PamMap::new(&s, &s, [], pieces).unwrap();
    match repeated_subtraction_divide(3, &rot, fuel(), 10).unwrap() {
        RepeatedSubtraction::Stuck { leftover_blue, .. } => {
            assert_eq!(leftover_blue.to_string(), SubsetRep::full(&Space::omega()).to_string());
            assert!(!leftover_blue.is_finite());
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn repeated_subtraction_needs_several_rounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut complete = 0;
    for _ in 0..50 {
        let f = random_bijection(&mut rng, 2, 3);
        if let RepeatedSubtraction::Complete { witness, .. } = repeated_subtraction_divide(2, &f, fuel(), 10).unwrap() {
            assert!(witness.as_map().unwrap().is_bijective());
            complete += 1;
        }
    }
    assert!(complete > 0);
}

#[test]
fn countable_inequality_division() {
    let g = divide_inequality_by_n(2, &shifted(), fuel()).unwrap();
    g.verify_prefix(500).unwrap();
    let s = Space::omega().repeat(2);
    let up = PamMap::new(&s, &s, [], [ApPiece::new(0, Ap::tail(0), 0, Ap::tail(1)), ApPiece::new(1, Ap::tail(0), 1, Ap::tail(3))]).unwrap();
    let g = divide_inequality_by_n(2, &up, fuel()).unwrap();
    assert_eq!(g.apply(e(0, 4)).unwrap(), e(0, 5));
}
