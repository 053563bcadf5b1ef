//! Fixture loaders and naive reference implementations shared by the
//! integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use bpbe::metrics::AssemblyResult;
use bpbe::RgbImage;
use num_bigint::BigUint;

pub const PHOTOS: [&str; 5] = ["astronaut", "chelsea", "coffee", "hubble", "rocket"];

pub fn data_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(rel)
}

pub fn load_png(rel: &str) -> RgbImage {
    let img = image::open(data_path(rel))
        .unwrap_or_else(|e| panic!("{rel}: {e}"))
        .into_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    RgbImage::new(w, h, img.into_raw()).unwrap()
}

pub fn photo(name: &str) -> RgbImage {
    load_png(&format!("photos/{name}.png"))
}

fn read_lines(rel: &str) -> Vec<Vec<String>> {
    std::fs::read_to_string(data_path(rel))
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split_whitespace().map(str::to_owned).collect())
        .collect()
}

/// `(seed, outputs)` from the SplitMix64 fixture.
pub fn splitmix_vectors() -> Vec<(u64, Vec<u64>)> {
    read_lines("splitmix64_golden.txt")
        .into_iter()
        .map(|f| {
            let seed = u64::from_str_radix(&f[0], 16).unwrap();
            let n: usize = f[1].parse().unwrap();
            let out: Vec<u64> = f[2..]
                .iter()
                .map(|v| u64::from_str_radix(v, 16).unwrap())
                .collect();
            assert_eq!(out.len(), n);
            (seed, out)
        })
        .collect()
}

/// `(seed, len, permutation)` from the Fisher-Yates fixture.
pub fn permutation_vectors() -> Vec<(u64, usize, Vec<usize>)> {
    read_lines("fisher_yates_golden.txt")
        .into_iter()
        .map(|f| {
            let seed = u64::from_str_radix(&f[0], 16).unwrap();
            let len: usize = f[1].parse().unwrap();
            let perm: Vec<usize> = f[2..].iter().map(|v| v.parse().unwrap()).collect();
            assert_eq!(perm.len(), len);
            (seed, len, perm)
        })
        .collect()
}

pub struct KeyspaceRow {
    pub blocks: u64,
    /// n_p, n_d, n_n, n_c, n_a
    pub conventional: [BigUint; 5],
    pub proposed: [BigUint; 5],
}

pub fn keyspace_vectors() -> Vec<KeyspaceRow> {
    read_lines("keyspace_golden.txt")
        .into_iter()
        .map(|f| {
            let big = |i: usize| f[i].parse::<BigUint>().unwrap();
            KeyspaceRow {
                blocks: f[0].parse().unwrap(),
                conventional: std::array::from_fn(|i| big(1 + i)),
                proposed: std::array::from_fn(|i| big(6 + i)),
            }
        })
        .collect()
}

pub const CODEC_FIXTURES: [&str; 2] = ["mixed", "checker"];

pub fn codec_fixture(name: &str) -> (RgbImage, Vec<u8>) {
    let img = load_png(&format!("codec/{name}.png"));
    let golden = std::fs::read(data_path(&format!("codec/{name}.bpls"))).unwrap();
    (img, golden)
}

/// Every permutation of `0..n`, lexicographic.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for at in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(at, n - 1);
            out.push(p);
        }
    }
    out.sort();
    out
}

/// Reference scores for an unrotated assembly against the identity layout,
/// computed by pairwise enumeration and union-find.
pub fn naive_scores(cols: usize, rows: usize, placement: &[usize]) -> (f64, f64, f64) {
    let n = cols * rows;
    let dc = (0..n).filter(|&c| placement[c] == c).count() as f64 / n as f64;

    let mut cell_of = vec![0; n];
    for (cell, &p) in placement.iter().enumerate() {
        cell_of[p] = cell;
    }
    // Pairs (p, q) where q was right of / below p originally.
    let mut original_pairs = Vec::new();
    for p in 0..n {
        if p % cols + 1 < cols {
            original_pairs.push((p, p + 1, 1usize, 0usize));
        }
        if p / cols + 1 < rows {
            original_pairs.push((p, p + cols, 0, 1));
        }
    }
    let kept: Vec<(usize, usize)> = original_pairs
        .iter()
        .filter(|&&(p, q, dx, dy)| {
            let (cp, cq) = (cell_of[p], cell_of[q]);
            cp % cols + dx == cq % cols && cp / cols + dy == cq / cols
        })
        .map(|&(p, q, _, _)| (p, q))
        .collect();
    let slots = 2 * cols * rows - cols - rows;
    let nc = if slots == 0 {
        1.0
    } else {
        kept.len() as f64 / slots as f64
    };

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        if parent[x] != x {
            let r = find(parent, parent[x]);
            parent[x] = r;
        }
        parent[x]
    }
    for &(p, q) in &kept {
        let (a, b) = (find(&mut parent, p), find(&mut parent, q));
        parent[a] = b;
    }
    let mut size = vec![0usize; n];
    for p in 0..n {
        let r = find(&mut parent, p);
        size[r] += 1;
    }
    let lc = *size.iter().max().unwrap() as f64 / n as f64;
    (dc, nc, lc)
}

pub fn assembly(cols: usize, rows: usize, placement: &[usize]) -> AssemblyResult {
    AssemblyResult::new(
        cols,
        rows,
        placement.iter().map(|&p| Some(p)).collect(),
        vec![bpbe::Dihedral::IDENTITY; cols * rows],
    )
    .unwrap()
}
