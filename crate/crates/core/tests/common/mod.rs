#![allow(dead_code)]

use cubic_core::forms::{BinaryCubicForm, Unimodular2};
use proptest::prelude::*;

/// A word of elementary matrices, kept short so coefficients stay small.
pub fn unimodular2() -> impl Strategy<Value = Unimodular2> {
    prop::collection::vec(0u8..4, 0..6).prop_map(|word| {
        let gens = [
            Unimodular2::new(1, 1, 0, 1).unwrap(),
            Unimodular2::new(1, 0, 1, 1).unwrap(),
            Unimodular2::new(0, 1, 1, 0).unwrap(),
            Unimodular2::new(1, 0, 0, -1).unwrap(),
        ];
        word.iter().fold(Unimodular2::IDENTITY, |acc, &k| gens[k as usize].mul(&acc))
    })
}

fn mul3(a: &[[i64; 3]; 3], b: &[[i64; 3]; 3]) -> [[i64; 3]; 3] {
    let mut out = [[0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// Products of elementary transvections, permutations and sign changes.
pub fn unimodular3() -> impl Strategy<Value = [[i64; 3]; 3]> {
    prop::collection::vec((0usize..3, 0usize..3, -1i64..=1, 0u8..3), 0..5).prop_map(|steps| {
        let mut g = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
        for (i, j, c, kind) in steps {
            let mut e = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
            match kind {
                0 if i != j => e[i][j] = c,
                1 => {
                    e[i][i] = 0;
                    e[j][j] = 0;
                    e[i][j] = 1;
                    e[j][i] = 1;
                    if i == j {
                        e[i][i] = 1;
                    }
                }
                _ => e[i][i] = -1,
            }
            g = mul3(&e, &g);
        }
        g
    })
}

pub fn nondegenerate_form(range: i64) -> impl Strategy<Value = BinaryCubicForm> {
    (-range..=range, -range..=range, -range..=range, -range..=range)
        .prop_map(|(a, b, c, d)| BinaryCubicForm::new(a, b, c, d))
        .prop_filter("nondegenerate", |f| f.disc() != 0)
}

pub fn irreducible_form(range: i64) -> impl Strategy<Value = BinaryCubicForm> {
    nondegenerate_form(range).prop_filter("irreducible", cubic_core::forms::is_irreducible)
}
