//! Direct-summation reference checks for entropy, mutual information, and
//! conditional mutual information.
//!
//! The oracle below expands joint counts into explicit probability tables and
//! evaluates the defining sums with plain floating-point divisions — a
//! different arithmetic path from the count-ratio form used by the library.

use proptest::prelude::*;
use speckle_core::discretize::DiscreteColumn;
use speckle_core::info::{cmi, entropy, mi};
use speckle_core::rng::SeqRng;

fn col(name: &str, arity: usize, values: Vec<usize>) -> DiscreteColumn {
    DiscreteColumn {
        name: name.into(),
        arity,
        values,
        labels: None,
    }
}

/// Expands a (z, x, y) count table into three aligned columns.
fn expand(counts: &[Vec<Vec<u32>>]) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let (mut xs, mut ys, mut zs) = (Vec::new(), Vec::new(), Vec::new());
    for (z, plane) in counts.iter().enumerate() {
        for (x, row) in plane.iter().enumerate() {
            for (y, &c) in row.iter().enumerate() {
                for _ in 0..c {
                    xs.push(x);
                    ys.push(y);
                    zs.push(z);
                }
            }
        }
    }
    (xs, ys, zs)
}

/// I(X; Y | Z) by direct probability-table summation:
/// sum over z of P(z) * sum over (x, y) of
/// P(x,y|z) * log2( P(x,y|z) / (P(x|z) * P(y|z)) ).
fn cmi_reference(counts: &[Vec<Vec<u32>>]) -> f64 {
    let total: u32 = counts.iter().flatten().flatten().sum();
    let n = f64::from(total);
    let mut result = 0.0;
    for plane in counts {
        let nz: u32 = plane.iter().flatten().sum();
        if nz == 0 {
            continue;
        }
        let pz = f64::from(nz) / n;
        let ax = plane.len();
        let ay = plane[0].len();
        let px: Vec<f64> = (0..ax)
            .map(|x| plane[x].iter().map(|&c| f64::from(c)).sum::<f64>() / f64::from(nz))
            .collect();
        let py: Vec<f64> = (0..ay)
            .map(|y| plane.iter().map(|row| f64::from(row[y])).sum::<f64>() / f64::from(nz))
            .collect();
        for x in 0..ax {
            for y in 0..ay {
                if plane[x][y] == 0 {
                    continue;
                }
                let pxy = f64::from(plane[x][y]) / f64::from(nz);
                result += pz * pxy * (pxy / (px[x] * py[y])).log2();
            }
        }
    }
    result
}

/// Runs the library on the expanded columns of `counts` and compares.
fn assert_matches_reference(counts: &[Vec<Vec<u32>>], what: &str) {
    let (xs, ys, zs) = expand(counts);
    let ax = counts[0].len();
    let ay = counts[0][0].len();
    let az = counts.len();
    let x = col("x", ax, xs);
    let y = col("y", ay, ys);
    let expected = cmi_reference(counts);
    let got = if az == 1 {
        mi(&x, &y).unwrap()
    } else {
        let z = col("z", az, zs);
        cmi(&x, &y, &[&z]).unwrap()
    };
    assert!(
        (got - expected).abs() <= 1e-12,
        "{what}: library {got} vs reference {expected}"
    );
}

#[test]
fn all_small_two_by_two_joints_match_the_reference() {
    // Every 2x2 count table with cells in {1, 2, 3}: 81 joint distributions.
    let mut cases = 0;
    for a in 1..=3u32 {
        for b in 1..=3u32 {
            for c in 1..=3u32 {
                for d in 1..=3u32 {
                    let counts = vec![vec![vec![a, b], vec![c, d]]];
                    assert_matches_reference(&counts, &format!("2x2 table {a},{b},{c},{d}"));
                    cases += 1;
                }
            }
        }
    }
    assert_eq!(cases, 81);
}

#[test]
fn random_wider_joints_match_the_reference() {
    let mut rng = SeqRng::new(515);
    let shapes = [(2usize, 3usize), (3, 2), (3, 3)];
    for case in 0..24 {
        let (ax, ay) = shapes[case % shapes.len()];
        let plane: Vec<Vec<u32>> = (0..ax)
            .map(|_| (0..ay).map(|_| 1 + rng.next_below(9) as u32).collect())
            .collect();
        assert_matches_reference(&[plane], &format!("{ax}x{ay} case {case}"));
    }
}

#[test]
fn random_conditional_joints_match_the_reference() {
    let mut rng = SeqRng::new(949);
    let shapes = [(2usize, 2usize, 2usize), (3, 2, 2), (2, 3, 3)];
    for case in 0..18 {
        let (ax, ay, az) = shapes[case % shapes.len()];
        let counts: Vec<Vec<Vec<u32>>> = (0..az)
            .map(|_| {
                (0..ax)
                    .map(|_| (0..ay).map(|_| 1 + rng.next_below(8) as u32).collect())
                    .collect()
            })
            .collect();
        assert_matches_reference(&counts, &format!("{ax}x{ay}|{az} case {case}"));
    }
}

#[test]
fn product_joints_have_exactly_zero_mutual_information() {
    // Cell counts n_xy = a_x * b_y make the empirical joint exactly
    // independent, so the result must be exactly 0.0, not merely tiny.
    let mut rng = SeqRng::new(7001);
    for case in 0..10 {
        let ax = 2 + rng.next_below(2) as usize;
        let ay = 2 + rng.next_below(3) as usize;
        let a: Vec<u32> = (0..ax).map(|_| 1 + rng.next_below(4) as u32).collect();
        let b: Vec<u32> = (0..ay).map(|_| 1 + rng.next_below(4) as u32).collect();
        let plane: Vec<Vec<u32>> = a
            .iter()
            .map(|&av| b.iter().map(|&bv| av * bv).collect())
            .collect();
        let (xs, ys, _) = expand(&[plane]);
        let x = col("x", ax, xs);
        let y = col("y", ay, ys);
        assert_eq!(mi(&x, &y).unwrap(), 0.0, "product case {case}");
    }
}

#[test]
fn per_slice_product_joints_have_exactly_zero_cmi() {
    // X independent of Y within every conditioning slice: I(X; Y | Z) = 0.
    let mut rng = SeqRng::new(7002);
    for case in 0..6 {
        let counts: Vec<Vec<Vec<u32>>> = (0..2)
            .map(|_| {
                let a: Vec<u32> = (0..2).map(|_| 1 + rng.next_below(3) as u32).collect();
                let b: Vec<u32> = (0..3).map(|_| 1 + rng.next_below(3) as u32).collect();
                a.iter()
                    .map(|&av| b.iter().map(|&bv| av * bv).collect())
                    .collect()
            })
            .collect();
        let (xs, ys, zs) = expand(&counts);
        let x = col("x", 2, xs);
        let y = col("y", 3, ys);
        let z = col("z", 2, zs);
        assert_eq!(
            cmi(&x, &y, &[&z]).unwrap(),
            0.0,
            "slice-product case {case}"
        );
    }
}

#[test]
fn self_information_equals_entropy() {
    let mut rng = SeqRng::new(7003);
    for case in 0..8 {
        let arity = 2 + rng.next_below(3) as usize;
        let n = 12 + rng.next_below(30) as usize;
        let mut values: Vec<usize> = (0..n).map(|i| i % arity).collect();
        rng.shuffle(&mut values);
        let x = col("x", arity, values.clone());
        let x2 = col("x2", arity, values);
        let self_mi = mi(&x, &x2).unwrap();
        let h = entropy(&x).unwrap();
        assert!(
            (self_mi - h).abs() <= 1e-12,
            "case {case}: MI(X;X) {self_mi} vs H(X) {h}"
        );
    }
}

fn column_pair_strategy() -> impl Strategy<Value = (usize, usize, Vec<(usize, usize, usize)>)> {
    (2usize..4, 2usize..4).prop_flat_map(|(ax, ay)| {
        let rows = proptest::collection::vec((0..ax, 0..ay, 0usize..3), 4..60);
        (Just(ax), Just(ay), rows)
    })
}

proptest! {
    #[test]
    fn cmi_is_nonnegative_and_symmetric((ax, ay, rows) in column_pair_strategy()) {
        let x = col("x", ax, rows.iter().map(|r| r.0).collect());
        let y = col("y", ay, rows.iter().map(|r| r.1).collect());
        let z = col("z", 3, rows.iter().map(|r| r.2).collect());
        let xy = cmi(&x, &y, &[&z]).unwrap();
        let yx = cmi(&y, &x, &[&z]).unwrap();
        prop_assert!(xy >= 0.0);
        prop_assert!((xy - yx).abs() <= 1e-12, "asymmetry: {xy} vs {yx}");
        // Unconditional MI is bounded by both marginal entropies.
        let m = mi(&x, &y).unwrap();
        prop_assert!(m >= 0.0);
        let bound = entropy(&x).unwrap().min(entropy(&y).unwrap());
        prop_assert!(m <= bound + 1e-12, "MI {m} exceeds entropy bound {bound}");
    }
}
