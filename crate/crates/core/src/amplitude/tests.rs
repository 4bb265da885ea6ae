use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use super::*;
use crate::linalg::{ginibre, haar_unitary, seeded_rng};
use crate::oracle::{coefficient_tensor_by_distinct_paths, coefficient_tensor_by_paths};
use crate::scatter::{named_device, NamedDevice};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn bs_polarized() -> ComplexMatrix {
    named_device("beamsplitter", &[2.0]).unwrap().compile().unwrap()
}

fn rel_err(a: &CoefficientTensor, b: &CoefficientTensor) -> f64 {
    let scale = b.amplitudes().iter().map(|z| z.norm()).fold(1e-300, f64::max);
    a.max_abs_diff(b).unwrap() / scale
}

#[test]
fn hong_ou_mandel_bosons_vanish() {
    let g = coefficient_tensor(&bs_polarized(), Species::Boson, 2, 2, Some(&[1, 3])).unwrap();
    assert!(g.norm_sqr() < 1e-24);
}

#[test]
fn hong_ou_mandel_fermions_antibunch() {
    let g = coefficient_tensor(&bs_polarized(), Species::Fermion, 2, 2, Some(&[1, 3])).unwrap();
    assert!((g.get(&[1, 1]).unwrap() - c(-1.0)).norm() < 1e-15);
    assert!((g.norm_sqr() - 1.0).abs() < 1e-12);
}

#[test]
fn orthogonal_polarizations_interfere() {
    let g = coefficient_tensor(&bs_polarized(), Species::Boson, 2, 2, Some(&[1, 4])).unwrap();
    assert!((g.get(&[1, 2]).unwrap() - c(-0.5)).norm() < 1e-15);
    assert!((g.get(&[2, 1]).unwrap() - c(0.5)).norm() < 1e-15);
    assert!(g.get(&[1, 1]).unwrap().norm() < 1e-15);
    assert!(g.get(&[2, 2]).unwrap().norm() < 1e-15);
}

#[test]
fn bunching_probability() {
    let input = FockSuperposition::from_terms(4, 2, [(vec![1, 0, 1, 0], c(1.0))]).unwrap();
    let out = evolve_fock(&input, &bs_polarized(), Species::Boson).unwrap();
    assert!((out.amplitude_of(&[2, 0, 0, 0]).norm_sqr() - 0.5).abs() < 1e-14);
    assert!((out.amplitude_of(&[0, 0, 2, 0]).norm_sqr() - 0.5).abs() < 1e-14);
    assert!(out.amplitude_of(&[1, 0, 1, 0]).norm() < 1e-15);
    let (g, success) = post_select(&out, 2, 2).unwrap();
    assert!(success < 1e-24);
    assert_eq!(g.parties(), 2);
}

#[test]
fn occupations_are_lexicographic() {
    let occ = enumerate_occupations(3, 2);
    assert_eq!(occ, vec![vec![0, 0, 2], vec![0, 1, 1], vec![0, 2, 0], vec![1, 0, 1], vec![1, 1, 0], vec![2, 0, 0]]);
    assert_eq!(enumerate_occupations(0, 0), vec![Vec::<usize>::new()]);
    assert_eq!(enumerate_occupations(4, 3).len(), 20);
}

fn random_rows<R: Rng>(rng: &mut R, total: usize, n: usize, distinct: bool) -> Vec<usize> {
    if distinct {
        let mut all: Vec<usize> = (1..=total).collect();
        all.shuffle(rng);
        all.truncate(n);
        all
    } else {
        (0..n).map(|_| rng.random_range(1..=total)).collect()
    }
}

#[test]
fn fast_kernels_match_path_sums() {
    let mut rng = seeded_rng(20);
    for t in 0..200 {
        let n = 1 + t % 5;
        let d = 1 + (t / 5) % 3;
        let w = ginibre(d * n, d * n, &mut rng);
        for species in [Species::Boson, Species::Fermion] {
            let rows = random_rows(&mut rng, d * n, n, species == Species::Fermion);
            let fast = coefficient_tensor(&w, species, d, n, Some(&rows)).unwrap();
            let slow = coefficient_tensor_by_paths(&w, species, d, &rows);
            assert!(rel_err(&fast, &slow) < 1e-10, "trial {t} {species} rows {rows:?}");
        }
    }
}

#[test]
fn repeated_sources_match_coset_sum() {
    let mut rng = seeded_rng(21);
    for t in 0..60 {
        let n = 2 + t % 3;
        let d = 1 + t % 2;
        let w = ginibre(d * n, d * n, &mut rng);
        let rows = random_rows(&mut rng, 2, n, false);
        let fast = coefficient_tensor(&w, Species::Boson, d, n, Some(&rows)).unwrap();
        let coset = coefficient_tensor_by_distinct_paths(&w, d, &rows);
        assert!(rel_err(&fast, &coset) < 1e-10);
    }
}

#[test]
fn pauli_zeroes_repeated_fermion_sources() {
    let mut rng = seeded_rng(22);
    let w = ginibre(6, 6, &mut rng);
    let g = coefficient_tensor(&w, Species::Fermion, 2, 3, Some(&[1, 1, 3])).unwrap();
    assert!(g.amplitudes().iter().all(|z| *z == c(0.0)));
}

#[test]
fn unitary_evolution_conserves_probability() {
    let mut rng = seeded_rng(23);
    for t in 0..100 {
        let modes = 2 + t % 7;
        let n = 1 + t % 3.min(modes);
        let u = haar_unitary(modes, &mut rng);
        for species in [Species::Boson, Species::Fermion] {
            let rows = random_rows(&mut rng, modes, n, species == Species::Fermion);
            let mut counts = vec![0; modes];
            for r in rows {
                counts[r - 1] += 1;
            }
            let input = FockSuperposition::from_terms(modes, n, [(counts, c(1.0))]).unwrap();
            let out = evolve_fock(&input, &u, species).unwrap();
            assert!((out.norm_sqr() - 1.0).abs() < 1e-9, "trial {t} {species}");
            if species == Species::Fermion {
                assert!(out.terms().iter().filter(|t| t.occupation.counts().iter().any(|&k| k > 1)).all(|t| t.amplitude.norm() < 1e-14));
            }
        }
    }
}

#[test]
fn superposed_input_conserves_probability() {
    let mut rng = seeded_rng(24);
    let u = haar_unitary(4, &mut rng);
    let a = c(0.6);
    let b = C64::new(0.0, 0.8);
    let input = FockSuperposition::from_terms(4, 2, [(vec![2, 0, 0, 0], a), (vec![0, 1, 1, 0], b)]).unwrap();
    let out = evolve_fock(&input, &u, Species::Boson).unwrap();
    assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
}

#[test]
fn post_selection_paths_agree() {
    let mut rng = seeded_rng(25);
    for (d, n) in [(2, 2), (2, 3), (3, 2)] {
        let u = haar_unitary(d * n, &mut rng);
        let c = CoefficientTensor::new(d, n, (0..d.pow(n as u32)).map(|_| crate::linalg::complex_gaussian(&mut rng)).collect())
            .unwrap()
            .normalized();
        for species in [Species::Boson, Species::Fermion] {
            let direct = create(&c, &u, species).unwrap();
            let full = evolve_fock(&omega(&c), &u, species).unwrap();
            let (selected, success) = post_select(&full, d, n).unwrap();
            assert!(direct.max_abs_diff(&selected).unwrap() < 1e-12);
            assert!((success - direct.norm_sqr()).abs() < 1e-12);
        }
    }
}

#[test]
fn identity_creates_its_input() {
    let mut rng = seeded_rng(26);
    let c = CoefficientTensor::new(3, 3, (0..27).map(|_| crate::linalg::complex_gaussian(&mut rng)).collect()).unwrap();
    for species in [Species::Boson, Species::Fermion] {
        let out = create(&c, &ComplexMatrix::identity(9, 9), species).unwrap();
        assert!(out.max_abs_diff(&c).unwrap() < 1e-14);
    }
}

#[test]
fn condensate_input_gives_product_state() {
    let mut rng = seeded_rng(27);
    let w = ginibre(6, 6, &mut rng);
    let g = coefficient_tensor(&w, Species::Boson, 2, 3, Some(&[1, 1, 1])).unwrap();
    let locals: Vec<Vec<C64>> = (0..3).map(|k| vec![w[(0, 2 * k)], w[(0, 2 * k + 1)]]).collect();
    let product = CoefficientTensor::product(&locals).unwrap().scaled(c(6.0));
    assert!(rel_err(&g, &product) < 1e-12);
}

#[test]
fn detection_is_adjoint_of_creation() {
    let mut rng = seeded_rng(28);
    for species in [Species::Boson, Species::Fermion] {
        let u = haar_unitary(6, &mut rng);
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
            CoefficientTensor::new(2, 3, (0..8).map(|_| crate::linalg::complex_gaussian(rng)).collect()).unwrap()
        };
        let s = draw(&mut rng);
        let t = draw(&mut rng);
        let forward = detection_overlap(&s, &u, &t, species).unwrap();
        let backward = t.inner(&create(&s, &u, species).unwrap()).unwrap().conj();
        assert!((forward - backward).norm() < 1e-12);
    }
}

#[test]
fn ghz_analyzer_detects_only_ghz_plus() {
    let w = NamedDevice::GhzAnalyzer.setup().unwrap().compile().unwrap();
    let clicks = CoefficientTensor::basis(2, &[1, 1, 1]).unwrap();
    let mut plus = CoefficientTensor::zeros(2, 3);
    plus.set(&[1, 1, 1], c(FRAC_1_SQRT_2)).unwrap();
    plus.set(&[2, 2, 2], c(FRAC_1_SQRT_2)).unwrap();
    let mut minus = plus.clone();
    minus.set(&[2, 2, 2], c(-FRAC_1_SQRT_2)).unwrap();
    let a = detection_overlap(&plus, &w, &clicks, Species::Boson).unwrap();
    let b = detection_overlap(&minus, &w, &clicks, Species::Boson).unwrap();
    assert!((a.norm() - 0.5).abs() < 1e-14);
    assert!(b.norm() < 1e-15);
    let created = create(&clicks, &crate::scatter::reverse(&w), Species::Boson).unwrap();
    assert!((created.normalized().fidelity(&plus).unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn conditioning_on_outcomes() {
    let mut ghz = CoefficientTensor::zeros(2, 3);
    ghz.set(&[1, 1, 1], c(FRAC_1_SQRT_2)).unwrap();
    ghz.set(&[2, 2, 2], c(FRAC_1_SQRT_2)).unwrap();
    let (state, prob) = conditional_state(&ghz, &BTreeMap::from([(1, 1)])).unwrap();
    assert!((prob - 0.5).abs() < 1e-15);
    assert_eq!(state, CoefficientTensor::basis(2, &[1, 1]).unwrap());
    assert!(matches!(conditional_state(&ghz, &BTreeMap::from([(1, 1), (2, 2)])), Err(Error::ImpossibleCondition)));
    assert!(conditional_state(&ghz, &BTreeMap::from([(4, 1)])).is_err());
    assert!(conditional_state(&ghz, &BTreeMap::from([(1, 3)])).is_err());
}

#[test]
fn shape_errors() {
    let w = ComplexMatrix::identity(3, 3);
    assert!(matches!(coefficient_tensor(&w, Species::Boson, 2, 2, None), Err(Error::Dimension(_))));
    let w = ComplexMatrix::identity(4, 4);
    assert!(matches!(coefficient_tensor(&w, Species::Boson, 2, 2, Some(&[1, 5])), Err(Error::Dimension(_))));
    assert!(matches!(coefficient_tensor(&w, Species::Boson, 2, 2, Some(&[1])), Err(Error::Dimension(_))));
    let input = FockSuperposition::from_terms(3, 1, [(vec![1, 0, 0], c(1.0))]).unwrap();
    assert!(evolve_fock(&input, &w, Species::Boson).is_err());
    let big = ComplexMatrix::identity(18, 18);
    let input = FockSuperposition::from_terms(18, 1, [(vec![1; 1].into_iter().chain(vec![0; 17]).collect(), c(1.0))]).unwrap();
    assert!(matches!(evolve_fock(&input, &big, Species::Boson), Err(Error::SizeLimit(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn unitary_post_selection_never_exceeds_one(seed in any::<u64>(), n in 1usize..4, d in 1usize..4) {
        let mut rng = seeded_rng(seed);
        let u = haar_unitary(d * n, &mut rng);
        let c = CoefficientTensor::new(d, n, (0..d.pow(n as u32)).map(|_| crate::linalg::complex_gaussian(&mut rng)).collect())
            .unwrap()
            .normalized();
        for species in [Species::Boson, Species::Fermion] {
            let g = create(&c, &u, species).unwrap();
            prop_assert!(g.norm_sqr() <= 1.0 + 1e-9);
        }
    }
}
