use std::f64::consts::FRAC_1_SQRT_2;

use proptest::prelude::*;

use iforge_core::amplitude::{coefficient_tensor, create};
use iforge_core::entanglement::{bipartite_rank, bipartitions, max_bipartite_rank, permutation_representation};
use iforge_core::linalg::{complex_gaussian, ginibre, haar_unitary, kron, seeded_rng};
use iforge_core::scatter::named_device;
use iforge_core::{CoefficientTensor, ComplexMatrix, Species, C64};

const H: usize = 1;
const V: usize = 2;

fn fourier_output(input: [usize; 4], species: Species) -> CoefficientTensor {
    let w = named_device("fourier", &[4.0, 2.0]).unwrap().compile().unwrap();
    create(&CoefficientTensor::basis(2, &input).unwrap(), &w, species).unwrap().normalized()
}

fn ranks(g: &CoefficientTensor) -> Vec<usize> {
    bipartitions(g.parties()).iter().map(|cut| bipartite_rank(g, cut, 1e-8).unwrap()).collect()
}

fn state(d: usize, parties: usize, terms: &[(&[usize], f64)]) -> CoefficientTensor {
    let mut t = CoefficientTensor::zeros(d, parties);
    for (idx, a) in terms {
        t.set(idx, C64::new(*a, 0.0)).unwrap();
    }
    t
}

#[test]
fn fourier_vvhh_gives_two_singlets_across_the_odd_even_cut() {
    let g = fourier_output([V, V, H, H], Species::Boson);
    let singlet = state(2, 2, &[(&[H, V], FRAC_1_SQRT_2), (&[V, H], -FRAC_1_SQRT_2)]);
    let pair = CoefficientTensor::new(
        2,
        4,
        singlet.amplitudes().iter().flat_map(|&a| singlet.amplitudes().iter().map(move |&b| a * b)).collect(),
    )
    .unwrap();
    // pair holds parties (1,3) then (2,4); move them into place.
    let expected = pair.permute_parties(&[1, 3, 2, 4]).unwrap();
    assert!(g.fidelity(&expected).unwrap() > 1.0 - 1e-12);
    assert_eq!(bipartite_rank(&g, &[1, 3], 1e-8).unwrap(), 1);
    assert_eq!(bipartite_rank(&g, &[1, 2], 1e-8).unwrap(), 4);
}

#[test]
fn fourier_vhvh_gives_ghz_type_state() {
    let g = fourier_output([V, H, V, H], Species::Boson);
    let ghz = state(2, 4, &[(&[H, V, H, V], FRAC_1_SQRT_2), (&[V, H, V, H], -FRAC_1_SQRT_2)]);
    assert!(g.fidelity(&ghz).unwrap() > 1.0 - 1e-12);
    assert!(ranks(&g).iter().all(|&r| r == 2));
}

#[test]
fn fourier_hvvv_gives_w_type_state() {
    let g = fourier_output([H, V, V, V], Species::Boson);
    let w = state(2, 4, &[(&[H, V, V, V], 0.5), (&[V, H, V, V], -0.5), (&[V, V, H, V], 0.5), (&[V, V, V, H], -0.5)]);
    assert!(g.fidelity(&w).unwrap() > 1.0 - 1e-12);
    // A single excitation spread over four parties.
    let singles = g.amplitudes().iter().enumerate().filter(|(_, a)| a.norm() > 1e-12);
    assert!(singles.map(|(k, _)| g.multi_index(k)).all(|idx| idx.iter().filter(|&&j| j == H).count() == 1));
}

#[test]
fn free_space_output_is_permutation_symmetric() {
    let w = named_device("freespace", &[3.0, 2.0, 0.7]).unwrap().compile().unwrap();
    for species in [Species::Boson, Species::Fermion] {
        let g = create(&CoefficientTensor::basis(2, &[H, V, V]).unwrap(), &w, species).unwrap();
        if species == Species::Fermion {
            // Identical single-particle amplitudes make every determinant vanish.
            assert!(g.norm_sqr() < 1e-24);
            continue;
        }
        for order in [[2, 1, 3], [1, 3, 2], [3, 2, 1], [2, 3, 1]] {
            assert!(g.max_abs_diff(&g.permute_parties(&order).unwrap()).unwrap() < 1e-14);
        }
        let expected = state(2, 3, &[(&[H, V, V], 1.0), (&[V, H, V], 1.0), (&[V, V, H], 1.0)]);
        assert!(g.fidelity(&expected).unwrap() > 1.0 - 1e-12);
    }
}

#[test]
fn condensate_input_gives_product_output() {
    let mut rng = seeded_rng(11);
    for (d, n) in [(2, 3), (3, 3), (2, 4), (4, 2)] {
        let w = haar_unitary(d * n, &mut rng);
        let g = coefficient_tensor(&w, Species::Boson, d, n, Some(&vec![1; n])).unwrap();
        assert_eq!(max_bipartite_rank(&g.normalized(), 1e-8).unwrap().0, 1, "d={d} N={n}");
        let f = coefficient_tensor(&w, Species::Fermion, d, n, Some(&vec![1; n])).unwrap();
        assert!(f.norm_sqr() == 0.0);
    }
}

fn random_locals(d: usize, n: usize, seed: u64) -> Vec<Vec<C64>> {
    let mut rng = seeded_rng(seed);
    (0..n).map(|_| (0..d).map(|_| complex_gaussian(&mut rng)).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn permutation_representation_matches_scattering(seed in any::<u64>(), n in 1usize..=4, d in 1usize..=3) {
        let mut rng = seeded_rng(seed);
        let v = ginibre(n, n, &mut rng);
        let locals = random_locals(d, n, seed ^ 0x5eed);
        let w = kron(&v, &ComplexMatrix::identity(d, d));
        for species in [Species::Boson, Species::Fermion] {
            let rep = permutation_representation(&v, &locals, species).unwrap();
            let direct = create(&CoefficientTensor::product(&locals).unwrap(), &w, species).unwrap();
            let scale = direct.amplitudes().iter().map(|a| a.norm()).fold(1.0, f64::max);
            prop_assert!(rep.tensor.max_abs_diff(&direct).unwrap() / scale < 1e-10);
        }
    }

    #[test]
    fn output_rank_respects_path_count(seed in any::<u64>(), n in 2usize..=4, d in 2usize..=3) {
        let mut rng = seeded_rng(seed);
        let w = haar_unitary(d * n, &mut rng);
        let input = CoefficientTensor::product(&random_locals(d, n, seed ^ 1)).unwrap();
        let g = create(&input, &w, Species::Boson).unwrap();
        prop_assume!(g.norm_sqr() > 1e-20);
        let (rank, _) = max_bipartite_rank(&g.normalized(), 1e-8).unwrap();
        let paths: usize = (1..=n).product();
        prop_assert!(rank <= paths.min(d.pow((n / 2) as u32)));
    }
}
