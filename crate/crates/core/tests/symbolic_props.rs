use proptest::prelude::*;
use rpf_core::symbolic::{is_primitive, Subshift};
use rpf_core::Word;

/// Integer matrix power, independent of the boolean routine under test.
fn int_power(a: &[Vec<u8>], n: usize) -> Vec<Vec<u64>> {
    let m = a.len();
    let mut acc: Vec<Vec<u64>> = (0..m).map(|i| (0..m).map(|j| u64::from(i == j)).collect()).collect();
    for _ in 0..n {
        let mut next = vec![vec![0u64; m]; m];
        for i in 0..m {
            for k in 0..m {
                if acc[i][k] == 0 {
                    continue;
                }
                for j in 0..m {
                    next[i][j] += acc[i][k] * u64::from(a[k][j]);
                }
            }
        }
        acc = next;
    }
    acc
}

fn matrix_from_bits(m: usize, bits: u64) -> Vec<Vec<u8>> {
    (0..m)
        .map(|i| (0..m).map(|j| ((bits >> (i * m + j)) & 1) as u8).collect())
        .collect()
}

fn primitive_matrix() -> impl Strategy<Value = Vec<Vec<u8>>> {
    (2usize..=5, any::<u64>()).prop_filter_map("not primitive", |(m, bits)| {
        let a = matrix_from_bits(m, bits);
        matches!(is_primitive(&a), Ok(Some(_))).then_some(a)
    })
}

#[test]
fn primitivity_agrees_with_integer_powers() {
    for m in 1..=4usize {
        let bound = (m - 1) * (m - 1) + 1;
        for bits in 0..(1u64 << (m * m)) {
            let a = matrix_from_bits(m, bits);
            let want = (1..=bound).find(|n| int_power(&a, *n).iter().flatten().all(|v| *v > 0));
            assert_eq!(is_primitive(&a).unwrap(), want, "matrix {a:?}");
        }
    }
}

proptest! {
    #[test]
    fn word_count_identity(a in primitive_matrix(), n in 1usize..=9) {
        let shift = Subshift::new(a.clone()).unwrap();
        let count = shift.admissible_words(n).unwrap().len() as u64;
        let want: u64 = int_power(&a, n - 1).iter().flatten().sum();
        prop_assert_eq!(count, want);
    }

    #[test]
    fn preimages_extend_recursively(a in primitive_matrix(), n in 0usize..=5, pick in any::<u64>()) {
        let shift = Subshift::new(a).unwrap();
        let heads = shift.admissible_words(2).unwrap();
        let x: Word = heads[(pick % heads.len() as u64) as usize].clone();
        let next = shift.preimage_prefixes(&x, n + 1).unwrap();
        let mut built: Vec<Word> = Vec::new();
        for u in shift.preimage_prefixes(&x, n).unwrap() {
            let first = if u.is_empty() { x.0[0] } else { u.0[0] };
            for j in 0..shift.alphabet_size() as u8 {
                if shift.allows(j, first) {
                    built.push(Word::new(vec![j]).concat(u.letters()));
                }
            }
        }
        built.sort();
        prop_assert_eq!(built, next);
    }
}
