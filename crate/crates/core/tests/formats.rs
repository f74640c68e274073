mod common;

use common::{random_amplitudes, random_integrals};
use proptest::prelude::*;
use sqdforge::subspace::SubspaceWavefunction;
use sqdforge::{parse_fcidump, write_fcidump, Determinant, DeterminantBasis, SampleSet};

const H2_STO3G: &str = "\
 &FCI NORB=2,NELEC=2,MS2=0,
  ORBSYM=1,1,
  ISYM=1,
 &END
  0.6757101548   1   1   1   1
  0.1809312139   2   1   2   1
  0.6646014756   2   2   1   1
  0.6986297411   2   2   2   2
 -1.2524635735   1   1   0   0
 -0.4759344612   2   2   0   0
  0.7137539936   0   0   0   0
";

#[test]
fn reads_a_minimal_molecular_file() {
    let ints = parse_fcidump(H2_STO3G).unwrap();
    assert_eq!((ints.norb(), ints.n_alpha(), ints.n_beta()), (2, 1, 1));
    // any of the eight index orders resolves to the listed value
    for (p, r, q, s) in [(1, 0, 1, 0), (0, 1, 1, 0), (1, 0, 0, 1), (0, 1, 0, 1)] {
        assert_eq!(ints.two_electron(p, r, q, s), 0.1809312139);
    }
    assert_eq!(ints.two_electron(0, 0, 1, 1), ints.two_electron(1, 1, 0, 0));
    assert_eq!(ints.e_core(), 0.7137539936);
    // E_HF = E_core + 2 h_11 + (11|11)
    let hf = sqdforge::determinant::diagonal(&Determinant::hartree_fock(1, 1), &ints);
    assert!((hf - (0.7137539936 - 2.0 * 1.2524635735 + 0.6757101548)).abs() < 1e-12);
}

#[test]
fn wavefunction_files_survive_a_round_trip() {
    let basis = DeterminantBasis::full(3, 2, 1).unwrap();
    let coeffs: Vec<f64> = (0..basis.len()).map(|i| ((i as f64) * 0.37).sin()).collect();
    let psi = SubspaceWavefunction::new(basis, coeffs).unwrap();
    assert_eq!(SubspaceWavefunction::from_text(&psi.to_text()).unwrap(), psi);
    assert!(SubspaceWavefunction::from_text("3 2 1 2\n110100 1.0\n").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fcidump_round_trip(seed in 0u64..10_000, m in 1usize..6, na in 0usize..6, nb in 0usize..6) {
        let (na, nb) = (na.min(m), nb.min(m));
        let ints = random_integrals(m, na, nb, seed);
        prop_assert_eq!(parse_fcidump(&write_fcidump(&ints)).unwrap(), ints);
    }

    #[test]
    fn amplitude_round_trip(seed in 0u64..10_000, m in 2usize..7, n in 1usize..3) {
        prop_assume!(n < m);
        let amps = random_amplitudes(m, n, n, seed, 0.3);
        prop_assert_eq!(sqdforge::lucj::Amplitudes::parse(&amps.to_text()).unwrap(), amps);
    }

    #[test]
    fn sample_file_round_trip(
        m in 1usize..8,
        raw in proptest::collection::vec((any::<u64>(), any::<u64>(), 1u64..1000), 0..50),
    ) {
        let mask = (1u64 << m) - 1;
        let set = SampleSet::from_counts(m, raw.into_iter().map(|(a, b, c)| (Determinant::new(a & mask, b & mask), c)))
            .unwrap();
        let back = SampleSet::parse(&set.to_text()).unwrap();
        prop_assert_eq!(back.n_shots, set.n_shots);
        prop_assert_eq!(back, set);
    }
}
