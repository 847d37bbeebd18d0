use ccancel::*;
use proptest::prelude::*;
use proptest::sample::subsequence;

fn e(slot: usize, index: u64) -> Element {
    Element::new(slot, index)
}

fn fuel() -> FuelPolicy {
    FuelPolicy::default()
}

fn perm(len: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..len).collect::<Vec<_>>()).prop_shuffle()
}

/// A bijection `n x Fin(s) -> n x Fin(s)` with its shape.
fn bijection() -> impl Strategy<Value = (usize, u64, PamMap)> {
    (2usize..=4, 1u64..=4).prop_flat_map(|(n, s)| {
        perm(n * s as usize).prop_map(move |p| {
            let sp = Space::fin(s).repeat(n);
            let ends: Vec<Element> = sp.elements().unwrap();
            let f = PamMap::from_table(&sp, &sp, ends.iter().zip(&p).map(|(&x, &j)| (x, ends[j]))).unwrap();
            (n, s, f)
        })
    })
}

/// An injection `Fin(a) -> Fin(b)` given by an ordered choice of targets.
fn injection(a: u64, b: u64) -> impl Strategy<Value = PamMap> {
    (subsequence((0..b).collect::<Vec<_>>(), a as usize), perm(a as usize)).prop_map(move |(ys, p)| {
        PamMap::from_table(&Space::fin(a), &Space::fin(b), (0..a).map(|x| (e(0, x), e(0, ys[p[x as usize]])))).unwrap()
    })
}

fn conjugate(f: &PamMap, sigma: &[usize], tau: &[usize]) -> PamMap {
    let pairs = f.source().elements().unwrap().into_iter().map(|x| {
        let y = f.eval(x).unwrap();
        (e(x.slot, sigma[x.index as usize] as u64), e(y.slot, tau[y.index as usize] as u64))
    });
    PamMap::from_table(f.source(), f.target(), pairs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn division_gives_a_bijection((n, _s, f) in bijection()) {
        let w = divide_by_n(n, &f, fuel()).unwrap();
        prop_assert!(verify_witness(&w, VerifyMode::Exhaustive).unwrap().ok);
    }

    #[test]
    fn division_commutes_with_relabelling(((n, s, f), seed) in bijection().prop_flat_map(|b| {
        let s = b.1 as usize;
        (Just(b), (perm(s), perm(s)))
    })) {
        let (sigma, tau) = seed;
        let g = divide_by_n(n, &f, fuel()).unwrap();
        let h = divide_by_n(n, &conjugate(&f, &sigma, &tau), fuel()).unwrap();
        for x in 0..s {
            let y = g.apply(e(0, x)).unwrap();
            prop_assert_eq!(h.apply(e(0, sigma[x as usize] as u64)).unwrap(), e(0, tau[y.index as usize] as u64));
        }
    }

    #[test]
    fn both_halvings_are_bijections(f in (1u64..=5).prop_flat_map(|s| perm(2 * s as usize).prop_map(move |p| {
        let sp = Space::fin(s).repeat(2);
        let ends = sp.elements().unwrap();
        PamMap::from_table(&sp, &sp, ends.iter().zip(&p).map(|(&x, &j)| (x, ends[j]))).unwrap()
    }))) {
        let g = divide_by_two(&f, fuel()).unwrap();
        prop_assert!(g.as_map().unwrap().is_bijective());
        let (g2, report) = divide_by_two_2omega(&f, fuel()).unwrap();
        prop_assert!(g2.as_map().unwrap().is_bijective());
        prop_assert!(report.max_leftover() <= 1);
    }

    #[test]
    fn csb_pairs_along_f_or_against_g((f, g) in (1u64..=6).prop_flat_map(|s| (injection(s, s), injection(s, s)))) {
        let h = csb_bijection(&f, &g, fuel()).unwrap();
        for (x, y) in h.table().unwrap() {
            prop_assert!(f.eval(x) == Some(y) || g.eval(y) == Some(x));
        }
        prop_assert!(h.as_map().unwrap().is_bijective());
    }

    #[test]
    fn csb_of_shifts_is_explicit(j in 0u64..4, k in 0u64..4) {
        let w = Space::omega();
        let f = PamMap::new(&w, &w, [], [ApPiece::new(0, Ap::tail(0), 0, Ap::tail(j))]).unwrap();
        let g = PamMap::new(&w, &w, [], [ApPiece::new(0, Ap::tail(0), 0, Ap::tail(k))]).unwrap();
        let h = csb_bijection(&f, &g, fuel()).unwrap();
        prop_assert!(h.is_explicit());
        h.verify_prefix(300).unwrap();
    }

    #[test]
    fn subtraction_gives_a_bijection(a in 0u64..=3, c in 0u64..=3, p in perm(6)) {
        let (sa, sc) = (Space::fin(a), Space::fin(c));
        let src = sa.concat(&sc);
        let ends = src.elements().unwrap();
        let p: Vec<usize> = p.into_iter().filter(|&j| j < ends.len()).collect();
        let f = PamMap::from_table(&src, &src, ends.iter().zip(&p).map(|(&x, &j)| (x, ends[j]))).unwrap();
        let w = subtract_finite_map(&f, &sa, &sa, &sc).unwrap();
        prop_assert!(verify_witness(&w, VerifyMode::Exhaustive).unwrap().ok);
    }
}
