#![allow(dead_code)]

use std::path::PathBuf;

use galedual::exactlat::{IntMatrix, RatMatrix};
use galedual::sysmodel::json::{parse_system, SystemFile};
use galedual::sysmodel::{rat_int, MasterSystem, SparseSystem};
use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn load(name: &str) -> SystemFile {
    let text = std::fs::read_to_string(fixture(name)).expect("fixture readable");
    parse_system(&text).expect("fixture parses")
}

pub fn load_sparse(name: &str) -> SparseSystem {
    match load(name) {
        SystemFile::Sparse(s) => s,
        SystemFile::Master(_) => panic!("{name} is a master system"),
    }
}

pub fn load_master(name: &str) -> MasterSystem {
    match load(name) {
        SystemFile::Master(m) => m,
        SystemFile::Sparse(_) => panic!("{name} is a sparse system"),
    }
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, bound: i64) -> IntMatrix {
    let v: Vec<Vec<i64>> = (0..rows)
        .map(|_| (0..cols).map(|_| rng.gen_range(-bound..=bound)).collect())
        .collect();
    IntMatrix::from_rows(&v, cols)
}

/// Product of random elementary row operations; determinant ±1.
pub fn random_unimodular(rng: &mut ChaCha8Rng, n: usize, steps: usize) -> IntMatrix {
    let mut u = IntMatrix::identity(n);
    for _ in 0..steps {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        match rng.gen_range(0..3) {
            0 if a != b => u.swap_rows(a, b),
            1 => u.negate_row(a),
            _ if a != b => {
                let k: i64 = rng.gen_range(-2..=2);
                u.add_row_multiple(a, b, &k.into());
            }
            _ => {}
        }
    }
    u
}

pub fn mat_mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let mut out = IntMatrix::zeros(a.rows(), b.cols());
    for i in 0..a.rows() {
        for j in 0..b.cols() {
            let mut acc = BigInt::zero();
            for k in 0..a.cols() {
                acc += &a[(i, k)] * &b[(k, j)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Two equations on a random support of four distinct nonzero points in
/// `[-3, 3]^2`, random nonzero integer coefficients. `None` if the draw is
/// degenerate.
pub fn random_bivariate(rng: &mut ChaCha8Rng) -> Option<SparseSystem> {
    let mut pts: Vec<[i64; 2]> = Vec::new();
    while pts.len() < 4 {
        let p = [rng.gen_range(-3..=3), rng.gen_range(-3..=3)];
        if p != [0, 0] && !pts.contains(&p) {
            pts.push(p);
        }
    }
    let support = IntMatrix::from_rows(
        &[pts.iter().map(|p| p[0]).collect::<Vec<_>>(), pts.iter().map(|p| p[1]).collect()],
        4,
    );
    let mut coeff = || {
        let mut c = 0i64;
        while c == 0 {
            c = rng.gen_range(-5..=5);
        }
        rat_int(c)
    };
    let rows: Vec<Vec<_>> = (0..2).map(|_| (0..5).map(|_| coeff()).collect()).collect();
    SparseSystem::new(vec!["x".into(), "y".into()], support, RatMatrix::from_rows(rows, 5)).ok()
}
