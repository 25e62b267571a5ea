mod common;

use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use nbp_core::alignment::{parse_fasta, parse_phylip, write_fasta, write_phylip, Alignment, SiteColumn};
use nbp_core::alphabet::{resolve_alphabet, GapMode};
use nbp_core::combine::{
    chain_product, distance_matrix, site_transition, DistanceMatrix, SiteMatrixSequence, SiteMode,
};
use nbp_core::site_ctmc::{
    detailed_balance_violation, embedded_matrix, matrix_exponential, rate_matrix, site_entropy,
    stationary_distribution,
};
use nbp_core::tree::{neighbor_joining, write_newick};

fn column_strategy(max_n: usize) -> impl Strategy<Value = SiteColumn> {
    (0..3u8, 2..=6usize, 3..=max_n).prop_flat_map(|(kind, morph_k, n)| {
        let alphabet = Arc::new(match kind {
            0 => resolve_alphabet("dna", None, GapMode::AsCharacter).unwrap(),
            1 => resolve_alphabet("protein", None, GapMode::AsCharacter).unwrap(),
            _ => {
                let syms: Vec<String> = (1..=morph_k).map(|i| i.to_string()).collect();
                resolve_alphabet("morph", Some(&syms), GapMode::AsCharacter).unwrap()
            }
        });
        let size = alphabet.size() as u16;
        (proptest::collection::vec(0..size, n), Just(alphabet)).prop_map(
            |(values, alphabet)| SiteColumn {
                site_index: 0,
                values,
                alphabet,
            },
        )
    })
}

proptest! {
    #[test]
    fn rate_matrix_matches_pair_counting_oracle(col in column_strategy(30)) {
        let q = rate_matrix(&col).unwrap();
        let (numer, denom) = common::pair_count_numerators(&col);
        let n = col.values.len();
        prop_assert_eq!(q.denominator(), denom);
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(q.numerator(i, j), numer[i * n + j]);
            }
        }
    }

    #[test]
    fn rate_matrix_invariants(col in column_strategy(30)) {
        let q = rate_matrix(&col).unwrap();
        let n = q.n();
        for i in 0..n {
            let mut int_row = 0i64;
            let mut float_row = 0.0f64;
            for j in 0..n {
                int_row += q.numerator(i, j);
                float_row += q.entry(i, j);
                prop_assert_eq!(q.numerator(i, j), q.numerator(j, i));
                prop_assert_eq!(q.entry(i, j).to_bits(), q.entry(j, i).to_bits());
                if i != j {
                    prop_assert!(q.numerator(i, j) >= 1);
                    prop_assert!(q.entry(i, j) > 0.0);
                }
            }
            prop_assert_eq!(int_row, 0);
            prop_assert!(float_row.abs() <= 1e-12);
        }
    }

    #[test]
    fn embedded_chain_invariants(col in column_strategy(30)) {
        let q = rate_matrix(&col).unwrap();
        let p = embedded_matrix(&q).unwrap();
        let n = p.n();
        for i in 0..n {
            prop_assert_eq!(p.entry(i, i).to_bits(), 0.0f64.to_bits());
            let row: f64 = (0..n).map(|j| p.entry(i, j)).sum();
            prop_assert!((row - 1.0).abs() <= 1e-12);
            for j in 0..n {
                prop_assert!((0.0..=1.0).contains(&p.entry(i, j)));
            }
        }
        let pi = stationary_distribution(&p).unwrap();
        prop_assert!(detailed_balance_violation(&p, &pi) <= 1e-12);
        let oracle = common::power_iteration_pi(p.p());
        for i in 0..n {
            prop_assert!((pi.pi()[i] - oracle[i]).abs() <= 1e-9);
        }
    }

    #[test]
    fn rate_matrix_permutation_equivariance(
        (col, perm) in column_strategy(20).prop_flat_map(|col| {
            let n = col.values.len();
            (Just(col), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
        }),
    ) {
        let q = rate_matrix(&col).unwrap();
        let permuted = SiteColumn {
            site_index: 0,
            values: perm.iter().map(|&p| col.values[p]).collect(),
            alphabet: col.alphabet.clone(),
        };
        let qp = rate_matrix(&permuted).unwrap();
        let n = col.values.len();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(qp.numerator(i, j), q.numerator(perm[i], perm[j]));
            }
        }
    }

    #[test]
    fn entropy_bounds(col in column_strategy(30)) {
        let h = site_entropy(&col).unwrap();
        prop_assert!(h >= 0.0);
        prop_assert!(h <= (col.alphabet.size() as f64).ln() + 1e-12);
        if col.values.iter().all(|&v| v == col.values[0]) {
            prop_assert_eq!(h, 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn matrix_exponential_semigroup(
        col in column_strategy(12),
        s in 0.01f64..3.0,
        t in 0.01f64..3.0,
    ) {
        let q = rate_matrix(&col).unwrap();
        let ps = matrix_exponential(&q, s).unwrap();
        let pt = matrix_exponential(&q, t).unwrap();
        let pst = matrix_exponential(&q, s + t).unwrap();
        let composed = ps.p() * pt.p();
        let n = q.n();
        for i in 0..n {
            for j in 0..n {
                prop_assert!((composed[(i, j)] - pst.entry(i, j)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn matrix_exponential_matches_taylor_oracle(
        col in column_strategy(12),
        t in 0.01f64..3.0,
    ) {
        let q = rate_matrix(&col).unwrap();
        let p = matrix_exponential(&q, t).unwrap();
        let oracle = common::taylor_expm(q.q(), t);
        let n = q.n();
        for i in 0..n {
            for j in 0..n {
                prop_assert!((p.entry(i, j) - oracle[(i, j)]).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn distance_matrix_invariants(
        (cols, taxa) in (3..8usize, 2..30usize).prop_flat_map(|(n, m)| {
            let alphabet = Arc::new(resolve_alphabet("dna", None, GapMode::AsCharacter).unwrap());
            let size = alphabet.size() as u16;
            let cols = proptest::collection::vec(
                proptest::collection::vec(0..size, n).prop_map(move |values| SiteColumn {
                    site_index: 0,
                    values,
                    alphabet: Arc::clone(&alphabet),
                }),
                m,
            );
            let taxa: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
            (cols, Just(taxa))
        }),
    ) {
        let matrices: Vec<_> = cols
            .iter()
            .map(|c| site_transition(c, SiteMode::Embedded).unwrap())
            .collect();
        let folded = matrices[1..]
            .iter()
            .fold(matrices[0].p().clone(), |acc, m| acc * m.p());
        let seq = SiteMatrixSequence::new(taxa.clone(), matrices).unwrap();
        let total = chain_product(&seq).unwrap();
        let n = taxa.len();
        for i in 0..n {
            for j in 0..n {
                prop_assert!((total.entry(i, j) - folded[(i, j)]).abs() <= 1e-9);
            }
        }
        let dm = distance_matrix(&total, &taxa).unwrap();
        for i in 0..n {
            prop_assert_eq!(dm.entry(i, i).to_bits(), 0.0f64.to_bits());
            for j in 0..n {
                prop_assert_eq!(dm.entry(i, j).to_bits(), dm.entry(j, i).to_bits());
                if i != j {
                    prop_assert!(dm.entry(i, j) > 0.0);
                    prop_assert!(dm.entry(i, j).is_finite());
                }
            }
        }
    }

    #[test]
    fn neighbor_joining_recovers_additive_trees(seed in any::<u64>(), k in 4..=8usize) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let tree = common::random_additive_tree(&mut rng, k);
        let dm = DistanceMatrix::from_parts(tree.labels.clone(), tree.distances()).unwrap();
        let built = neighbor_joining(&dm, true).unwrap();
        let parsed = common::parse_newick(&write_newick(&built));
        let truth = tree.true_splits();
        let got = common::splits(&parsed);
        let truth_topology: std::collections::BTreeSet<_> = truth.keys().cloned().collect();
        let got_topology: std::collections::BTreeSet<_> = got.keys().cloned().collect();
        prop_assert_eq!(&truth_topology, &got_topology);
        for (side, len) in &truth {
            prop_assert!((got[side] - len).abs() <= 1e-9);
        }
    }

    #[test]
    fn alignment_writers_round_trip(
        (taxa, cells, n_sites) in (3..10usize, 1..80usize).prop_flat_map(|(n, m)| {
            let taxa: Vec<String> = (0..n).map(|i| format!("sp_{i}")).collect();
            (Just(taxa), proptest::collection::vec(0..4u16, n * m), Just(m))
        }),
    ) {
        let alphabet = Arc::new(resolve_alphabet("dna", None, GapMode::AsCharacter).unwrap());
        let alignment = Alignment::new(alphabet.clone(), taxa, cells, n_sites).unwrap();

        let mut fasta = Vec::new();
        write_fasta(&alignment, &mut fasta).unwrap();
        let back = parse_fasta(fasta.as_slice(), alphabet.clone()).unwrap();
        prop_assert_eq!(back.taxa(), alignment.taxa());
        for t in 0..alignment.n_taxa() {
            prop_assert_eq!(back.row(t), alignment.row(t));
        }

        let mut phylip = Vec::new();
        write_phylip(&alignment, &mut phylip).unwrap();
        let back = parse_phylip(phylip.as_slice(), alphabet).unwrap();
        prop_assert_eq!(back.taxa(), alignment.taxa());
        for t in 0..alignment.n_taxa() {
            prop_assert_eq!(back.row(t), alignment.row(t));
        }
    }
}
