use std::f64::consts::{PI, TAU};

use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;

use pseudoent::biortho::Family;
use pseudoent::constructor::{build_state, catalog, lookup, solve_weight, ConstructError, ProductSpec, StateVector, Table};
use pseudoent::entanglement::{
    average_entropy, concurrence, marginal_entropy, normalize, normalized_state, partial_trace, DensityMatrix,
    EmbeddedState,
};
use pseudoent::grassmann::{normalize_word, Generator, GrassmannElement, Monomial};

fn config() -> ProptestConfig {
    ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() }
}

const POOL: [Generator; 4] = [
    Generator { kind: pseudoent::grassmann::GeneratorKind::Plain, index: 1 },
    Generator { kind: pseudoent::grassmann::GeneratorKind::Plain, index: 2 },
    Generator { kind: pseudoent::grassmann::GeneratorKind::Plain, index: 3 },
    Generator { kind: pseudoent::grassmann::GeneratorKind::Conjugate, index: 1 },
];

fn element_over(gens: &'static [Generator]) -> impl Strategy<Value = GrassmannElement> {
    let n = 1usize << gens.len();
    proptest::collection::vec((-3i32..=3, -3i32..=3), n).prop_map(move |coefs| {
        let mut e = GrassmannElement::zero();
        for (m, (re, im)) in Monomial::all_over(gens).into_iter().zip(coefs) {
            e.add_term(m, Complex64::new(f64::from(re), f64::from(im)));
        }
        e
    })
}

fn element() -> impl Strategy<Value = GrassmannElement> {
    element_over(&POOL)
}

const THETAS: [Generator; 3] = [POOL[0], POOL[1], POOL[2]];

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![Just(Family::Psi), Just(Family::Phi)]
}

fn build_or_zero(w: &GrassmannElement, spec: &ProductSpec) -> StateVector {
    match build_state(w, spec) {
        Ok(s) => s,
        Err(ConstructError::ZeroState) => StateVector::new(),
        Err(e) => panic!("{e}"),
    }
}

fn permutation_parity(perm: &[usize]) -> i8 {
    let mut inversions = 0;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

fn non_degenerate_angle() -> impl Strategy<Value = f64> {
    (0.0..TAU).prop_filter("cos α away from 0", |a: &f64| a.cos().abs() > 1e-3)
}

fn random_state(n: usize) -> impl Strategy<Value = EmbeddedState> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n)
        .prop_filter_map("non-zero", |v| {
            let amps = DVector::from_iterator(v.len(), v.into_iter().map(|(re, im)| Complex64::new(re, im)));
            normalize(&EmbeddedState::new(amps).ok()?).ok()
        })
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn left_normal_form_is_unique(perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle()) {
        let word: Vec<Generator> = perm.iter().map(|&i| POOL[i]).collect();
        let (sign, m) = normalize_word(&word).unwrap();
        prop_assert_eq!(m, Monomial::all_over(&POOL).last().copied().unwrap());
        prop_assert_eq!(sign, permutation_parity(&perm));
        let mut repeated = word.clone();
        repeated.push(word[0]);
        prop_assert!(normalize_word(&repeated).is_none());
    }

    #[test]
    fn conjugation_is_an_anti_involution(a in element(), b in element()) {
        prop_assert_eq!(a.conjugate().conjugate(), a.clone());
        prop_assert_eq!((&a * &b).conjugate(), &b.conjugate() * &a.conjugate());
    }

    #[test]
    fn full_integration_keeps_only_the_top_term(a in element_over(&THETAS)) {
        let top = Monomial::all_over(&THETAS).last().copied().unwrap();
        // ∫dθ₁dθ₂dθ₃ θ₃θ₂θ₁ = 1, and θ₁θ₂θ₃ = −θ₃θ₂θ₁.
        let full = a.integrate_many(&THETAS);
        prop_assert!(full.is_scalar());
        prop_assert_eq!(full.scalar_part(), -a.coefficient(top));
    }

    #[test]
    fn construction_is_linear(
        fams in proptest::collection::vec(family(), 3),
        w1 in element_over(&THETAS),
        w2 in element_over(&THETAS),
        x in -3i32..=3,
        y in -3i32..=3,
    ) {
        let spec = ProductSpec::distinct(&fams);
        let (xc, yc) = (Complex64::new(f64::from(x), 0.0), Complex64::new(0.0, f64::from(y)));
        let lhs = build_or_zero(&(&(&w1 * xc) + &(&w2 * yc)), &spec);
        let rhs = &build_or_zero(&w1, &spec).scale(xc) + &build_or_zero(&w2, &spec).scale(yc);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn solve_inverts_build(fams in proptest::collection::vec(family(), 3), w in element_over(&THETAS)) {
        let spec = ProductSpec::distinct(&fams);
        let state = build_or_zero(&w, &spec);
        prop_assume!(!state.is_empty());
        let solved = solve_weight(&state, &spec).unwrap();
        prop_assert_eq!(build_state(&solved, &spec).unwrap(), state);
        // Distinct generators make the integration map injective.
        prop_assert_eq!(solved, w);
    }

    #[test]
    fn concurrence_ignores_local_phases(state in random_state(2), site in 1usize..=2, phase in 0.0..TAU) {
        let phased = state.with_local_phase(site, Complex64::from_polar(1.0, phase));
        prop_assert!((concurrence(&state).unwrap() - concurrence(&phased).unwrap()).abs() < 1e-12);
        let global = EmbeddedState::new(state.amplitudes() * Complex64::from_polar(1.0, phase)).unwrap();
        prop_assert!((concurrence(&state).unwrap() - concurrence(&global).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn concurrence_matches_determinant_form(state in random_state(2)) {
        let a = state.amplitudes();
        let det = 2.0 * (a[0] * a[3] - a[1] * a[2]).norm();
        let c = concurrence(&state).unwrap();
        prop_assert!((c - det).abs() < 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&c));
    }

    #[test]
    fn pure_state_marginals_are_symmetric(state in random_state(3)) {
        for (a, b) in [(vec![1], vec![2, 3]), (vec![2], vec![1, 3]), (vec![3], vec![1, 2])] {
            let sa = marginal_entropy(&state, &a).unwrap();
            let sb = marginal_entropy(&state, &b).unwrap();
            prop_assert!((sa - sb).abs() < 1e-12);
        }
        let one = average_entropy(&state, 1).unwrap();
        prop_assert!((one - average_entropy(&state, 2).unwrap()).abs() < 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&one));
    }

    #[test]
    fn reduced_states_are_density_matrices(state in random_state(3), keep in prop_oneof![
        Just(vec![1]), Just(vec![2]), Just(vec![3]), Just(vec![1, 2]), Just(vec![1, 3]), Just(vec![2, 3])
    ]) {
        let rho = partial_trace(&state.density(), &keep).unwrap();
        prop_assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
    }

    #[test]
    fn bell_concurrence_has_period_pi(a1 in non_degenerate_angle(), a2 in non_degenerate_angle(), k in 0usize..8) {
        let e = catalog().iter().filter(|e| e.table == Table::Bell).nth(k * 2 + 1).unwrap();
        let c = concurrence(&normalized_state(&e.state, &[a1, a2]).unwrap()).unwrap();
        let shifted = concurrence(&normalized_state(&e.state, &[a1 + PI, a2 + PI]).unwrap()).unwrap();
        prop_assert!((c - shifted).abs() < 1e-10, "{}: {} vs {}", e.name, c, shifted);
    }

    #[test]
    fn ghz_family_shares_average_entropy(a in proptest::collection::vec(non_degenerate_angle(), 3)) {
        let reference = average_entropy(&normalized_state(&lookup("G1+").unwrap().state, &a).unwrap(), 1).unwrap();
        for e in catalog().iter().filter(|e| e.table == Table::Ghz) {
            let v = average_entropy(&normalized_state(&e.state, &a).unwrap(), 1).unwrap();
            prop_assert!((v - reference).abs() < 1e-10, "{}", e.name);
        }
    }
}
