//! Attack scores and color statistics.
//!
//! Dc, Nc and Lc compare an assembled puzzle against the true layout:
//!
//! * Dc: share of pieces at their true cell with identity orientation.
//! * Nc: share of the `2uv - u - v` neighbor slots holding two pieces that
//!   were neighbors on that side in the original, given their (equal)
//!   orientation. A region that is correct but rotated as a whole still
//!   scores on Nc.
//! * Lc: largest 4-connected region of correct adjacencies, over `n`.

use std::fmt::Write as _;

use crate::dihedral::Dihedral;
use crate::error::{Error, Result};
use crate::model::RgbImage;

/// A puzzle solution: which piece sits in each cell, and how it is turned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssemblyResult {
    cols: usize,
    rows: usize,
    placement: Vec<Option<usize>>,
    orientation: Vec<Dihedral>,
}

impl AssemblyResult {
    pub fn new(
        cols: usize,
        rows: usize,
        placement: Vec<Option<usize>>,
        orientation: Vec<Dihedral>,
    ) -> Result<Self> {
        let n = cols * rows;
        if placement.len() != n || orientation.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "{cols}x{rows} grid needs {n} cells, got {} placements and {} orientations",
                placement.len(),
                orientation.len()
            )));
        }
        let mut seen = vec![false; n];
        for p in placement.iter().flatten() {
            if *p >= n || std::mem::replace(&mut seen[*p], true) {
                return Err(Error::InvalidArgument(format!(
                    "piece {p} is out of range or placed twice"
                )));
            }
        }
        Ok(Self {
            cols,
            rows,
            placement,
            orientation,
        })
    }

    /// Every piece at its own index, unrotated.
    pub fn identity(cols: usize, rows: usize) -> Self {
        let n = cols * rows;
        Self {
            cols,
            rows,
            placement: (0..n).map(Some).collect(),
            orientation: vec![Dihedral::IDENTITY; n],
        }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn len(&self) -> usize {
        self.placement.len()
    }

    pub fn is_empty(&self) -> bool {
        self.placement.is_empty()
    }

    pub fn piece_at(&self, cell: usize) -> Option<usize> {
        self.placement[cell]
    }

    pub fn orientation_at(&self, cell: usize) -> Dihedral {
        self.orientation[cell]
    }

    pub fn placement(&self) -> &[Option<usize>] {
        &self.placement
    }

    pub fn orientations(&self) -> &[Dihedral] {
        &self.orientation
    }
}

struct Truth {
    cols: usize,
    /// Original cell of each piece.
    home: Vec<usize>,
}

fn truth_layout(result: &AssemblyResult, truth: &AssemblyResult) -> Result<Truth> {
    if result.cols != truth.cols || result.rows != truth.rows {
        return Err(Error::ShapeMismatch(format!(
            "result is {}x{}, truth is {}x{}",
            result.cols, result.rows, truth.cols, truth.rows
        )));
    }
    let mut home = vec![usize::MAX; truth.len()];
    for (cell, p) in truth.placement.iter().enumerate() {
        match p {
            Some(p) => home[*p] = cell,
            None => return Err(Error::ShapeMismatch("truth must place every piece".into())),
        }
    }
    if truth.orientation.iter().any(|&o| o != Dihedral::IDENTITY) {
        return Err(Error::ShapeMismatch("truth must be unrotated".into()));
    }
    Ok(Truth {
        cols: truth.cols,
        home,
    })
}

fn is_correct_pair(
    result: &AssemblyResult,
    truth: &Truth,
    a: usize,
    b: usize,
    delta: (i32, i32),
) -> bool {
    let (Some(p), Some(q)) = (result.placement[a], result.placement[b]) else {
        return false;
    };
    let o = result.orientation[a];
    if o != result.orientation[b] {
        return false;
    }
    let (hp, hq) = (truth.home[p], truth.home[q]);
    let (px, py) = ((hp % truth.cols) as i32, (hp / truth.cols) as i32);
    let (qx, qy) = ((hq % truth.cols) as i32, (hq / truth.cols) as i32);
    (qx - px, qy - py) == o.inverse().map_vector(delta)
}

/// All neighbor slots as `(cell, right-or-below cell, is_correct)`.
fn adjacencies(result: &AssemblyResult, truth: &Truth) -> Vec<(usize, usize, bool)> {
    let (u, v) = (result.cols, result.rows);
    let mut out = Vec::with_capacity(2 * u * v);
    for y in 0..v {
        for x in 0..u {
            let a = y * u + x;
            if x + 1 < u {
                out.push((a, a + 1, is_correct_pair(result, truth, a, a + 1, (1, 0))));
            }
            if y + 1 < v {
                out.push((a, a + u, is_correct_pair(result, truth, a, a + u, (0, 1))));
            }
        }
    }
    out
}

pub fn direct_comparison(result: &AssemblyResult, truth: &AssemblyResult) -> Result<f64> {
    let t = truth_layout(result, truth)?;
    let n = result.len();
    let correct = (0..n)
        .filter(|&cell| {
            result.placement[cell].is_some_and(|p| t.home[p] == cell)
                && result.orientation[cell] == Dihedral::IDENTITY
        })
        .count();
    Ok(correct as f64 / n as f64)
}

pub fn neighbor_comparison(result: &AssemblyResult, truth: &AssemblyResult) -> Result<f64> {
    let t = truth_layout(result, truth)?;
    let adj = adjacencies(result, &t);
    if adj.is_empty() {
        // No slots to get wrong.
        return Ok(1.0);
    }
    Ok(adj.iter().filter(|a| a.2).count() as f64 / adj.len() as f64)
}

pub fn largest_component(result: &AssemblyResult, truth: &AssemblyResult) -> Result<f64> {
    let t = truth_layout(result, truth)?;
    let n = result.len();
    let mut neighbors = vec![Vec::new(); n];
    for (a, b, ok) in adjacencies(result, &t) {
        if ok {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
    }
    let mut seen = vec![false; n];
    let mut best = 0;
    let mut stack = Vec::new();
    for start in 0..n {
        if seen[start] || result.placement[start].is_none() {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut size = 0;
        while let Some(cell) = stack.pop() {
            size += 1;
            for &next in &neighbors[cell] {
                if !seen[next] {
                    seen[next] = true;
                    stack.push(next);
                }
            }
        }
        best = best.max(size);
    }
    Ok(best as f64 / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scores {
    pub dc: f64,
    pub nc: f64,
    pub lc: f64,
}

impl Scores {
    pub fn sum(&self) -> f64 {
        self.dc + self.nc + self.lc
    }

    /// `metric,value` rows, four decimals.
    pub fn to_csv(&self) -> String {
        format!(
            "metric,value\nDc,{:.4}\nNc,{:.4}\nLc,{:.4}\n",
            self.dc, self.nc, self.lc
        )
    }
}

pub fn score(result: &AssemblyResult, truth: &AssemblyResult) -> Result<Scores> {
    Ok(Scores {
        dc: direct_comparison(result, truth)?,
        nc: neighbor_comparison(result, truth)?,
        lc: largest_component(result, truth)?,
    })
}

/// Shannon entropy in bits of the image's 24-bit color distribution.
pub fn entropy24(image: &RgbImage) -> f64 {
    let mut codes: Vec<u32> = image
        .pixels()
        .map(|[r, g, b]| (r as u32) << 16 | (g as u32) << 8 | b as u32)
        .collect();
    codes.sort_unstable();
    let total = codes.len() as f64;
    codes
        .chunk_by(|a, b| a == b)
        .map(|run| {
            let p = run.len() as f64 / total;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0)
}

/// Hexcone HSV hue in degrees `[0, 360)` and saturation in `[0, 1]`.
pub fn hue_saturation([r, g, b]: [u8; 3]) -> (f64, f64) {
    let (r, g, b) = (r as f64, g as f64, b as f64);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let sat = if max == 0.0 { 0.0 } else { delta / max };
    let hue = if delta == 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    (hue % 360.0, sat)
}

/// 2-D hue x saturation pixel counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HueSatHistogram {
    bins: usize,
    counts: Vec<u64>,
}

pub const DEFAULT_HISTOGRAM_BINS: usize = 256;

impl HueSatHistogram {
    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn count(&self, hue_bin: usize, sat_bin: usize) -> u64 {
        self.counts[hue_bin * self.bins + sat_bin]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `hue_bin,sat_bin,count` rows for every bin.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.counts.len() * 12);
        out.push_str("hue_bin,sat_bin,count\n");
        for h in 0..self.bins {
            for s in 0..self.bins {
                let _ = writeln!(out, "{h},{s},{}", self.count(h, s));
            }
        }
        out
    }
}

pub fn hue_sat_histogram(image: &RgbImage, bins: usize) -> Result<HueSatHistogram> {
    if bins < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 bins, got {bins}"
        )));
    }
    let mut counts = vec![0u64; bins * bins];
    let scale = bins as f64;
    for px in image.pixels() {
        let (h, s) = hue_saturation(px);
        let hb = ((h / 360.0 * scale) as usize).min(bins - 1);
        let sb = ((s * scale) as usize).min(bins - 1);
        counts[hb * bins + sb] += 1;
    }
    Ok(HueSatHistogram { bins, counts })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotated_180(cols: usize, rows: usize) -> AssemblyResult {
        let n = cols * rows;
        AssemblyResult::new(
            cols,
            rows,
            (0..n).rev().map(Some).collect(),
            vec![Dihedral::rotation(2); n],
        )
        .unwrap()
    }

    #[test]
    fn identity_scores_one() {
        let t = AssemblyResult::identity(16, 15);
        let s = score(&t, &t).unwrap();
        assert_eq!((s.dc, s.nc, s.lc), (1.0, 1.0, 1.0));
    }

    #[test]
    fn cyclic_shift_has_no_fixed_points() {
        let n = 240;
        let r = AssemblyResult::new(
            16,
            15,
            (0..n).map(|i| Some((i + 1) % n)).collect(),
            vec![Dihedral::IDENTITY; n],
        )
        .unwrap();
        let t = AssemblyResult::identity(16, 15);
        assert_eq!(direct_comparison(&r, &t).unwrap(), 0.0);
    }

    #[test]
    fn one_correct_piece() {
        // Reverse order with the middle pair swapped back keeps only piece 0.
        let n = 240;
        let mut placement: Vec<Option<usize>> = (0..n).map(|i| Some((i + 1) % n)).collect();
        placement[0] = Some(0);
        placement[n - 1] = Some(1);
        let r = AssemblyResult::new(16, 15, placement, vec![Dihedral::IDENTITY; n]).unwrap();
        let dc = direct_comparison(&r, &AssemblyResult::identity(16, 15)).unwrap();
        assert!((dc - 1.0 / 240.0).abs() < 1e-12);
        assert_eq!(format!("{dc:.4}"), "0.0042");
    }

    #[test]
    fn adjacency_denominator() {
        let t = AssemblyResult::identity(16, 15);
        let truth = truth_layout(&t, &t).unwrap();
        assert_eq!(adjacencies(&t, &truth).len(), 449);
    }

    #[test]
    fn rigid_half_turn_keeps_neighbors() {
        let r = rotated_180(16, 15);
        let t = AssemblyResult::identity(16, 15);
        let s = score(&r, &t).unwrap();
        assert_eq!(s.dc, 0.0);
        assert_eq!(s.nc, 1.0);
        assert_eq!(s.lc, 1.0);
    }

    #[test]
    fn half_turn_positions_without_rotated_pieces_score_zero() {
        let n = 12;
        let r = AssemblyResult::new(
            4,
            3,
            (0..n).rev().map(Some).collect(),
            vec![Dihedral::IDENTITY; n],
        )
        .unwrap();
        let t = AssemblyResult::identity(4, 3);
        let s = score(&r, &t).unwrap();
        assert_eq!(s.nc, 0.0);
        assert!((s.lc - 1.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn rigid_quarter_turn_on_square_grid() {
        // Rotating a 3x3 layout clockwise moves original (x, y) to (2 - y, x).
        let mut placement = vec![None; 9];
        for y in 0..3 {
            for x in 0..3 {
                placement[x * 3 + (2 - y)] = Some(y * 3 + x);
            }
        }
        let r = AssemblyResult::new(3, 3, placement, vec![Dihedral::rotation(1); 9]).unwrap();
        let s = score(&r, &AssemblyResult::identity(3, 3)).unwrap();
        assert_eq!((s.dc, s.nc, s.lc), (0.0, 1.0, 1.0));
    }

    #[test]
    fn rigid_mirror_keeps_neighbors() {
        let mut placement = vec![None; 6];
        for y in 0..2 {
            for x in 0..3 {
                placement[y * 3 + (2 - x)] = Some(y * 3 + x);
            }
        }
        let h = Dihedral::from_rotate_flip(0, crate::model::Flip::Horizontal);
        let r = AssemblyResult::new(3, 2, placement, vec![h; 6]).unwrap();
        let s = score(&r, &AssemblyResult::identity(3, 2)).unwrap();
        assert_eq!(s.nc, 1.0);
    }

    #[test]
    fn mismatched_orientations_break_adjacency() {
        let mut orientation = vec![Dihedral::IDENTITY; 4];
        orientation[1] = Dihedral::rotation(1);
        let r = AssemblyResult::new(2, 2, (0..4).map(Some).collect(), orientation).unwrap();
        let s = score(&r, &AssemblyResult::identity(2, 2)).unwrap();
        assert_eq!(s.dc, 0.75);
        assert_eq!(s.nc, 0.5);
        assert_eq!(s.lc, 0.75);
    }

    #[test]
    fn fully_wrong_assembly_floor() {
        // Pieces scattered so no original neighbors touch.
        let placement = [0, 2, 8, 10, 5, 7, 13, 15, 1, 3, 9, 11, 4, 6, 12, 14];
        let r = AssemblyResult::new(
            4,
            4,
            placement.iter().map(|&p| Some(p)).collect(),
            vec![Dihedral::IDENTITY; 16],
        )
        .unwrap();
        let t = AssemblyResult::identity(4, 4);
        assert_eq!(neighbor_comparison(&r, &t).unwrap(), 0.0);
        assert_eq!(largest_component(&r, &t).unwrap(), 1.0 / 16.0);
    }

    #[test]
    fn two_correct_rows_of_three() {
        // Cells 0..3 and 8..11 hold their own pieces; the other ten cells get
        // the remaining pieces in reverse, which never pairs true neighbors.
        let placement = [0, 1, 2, 15, 14, 13, 12, 11, 8, 9, 10, 7, 6, 5, 4, 3];
        let r = AssemblyResult::new(
            4,
            4,
            placement.iter().map(|&p| Some(p)).collect(),
            vec![Dihedral::IDENTITY; 16],
        )
        .unwrap();
        let t = AssemblyResult::identity(4, 4);
        assert_eq!(largest_component(&r, &t).unwrap(), 3.0 / 16.0);
        assert_eq!(neighbor_comparison(&r, &t).unwrap(), 4.0 / 24.0);
    }

    #[test]
    fn shape_checks() {
        let a = AssemblyResult::identity(3, 2);
        let b = AssemblyResult::identity(2, 3);
        assert!(matches!(score(&a, &b), Err(Error::ShapeMismatch(_))));
        assert!(
            AssemblyResult::new(2, 1, vec![Some(0), Some(0)], vec![Dihedral::IDENTITY; 2]).is_err()
        );
        assert!(AssemblyResult::new(2, 1, vec![Some(0)], vec![Dihedral::IDENTITY]).is_err());
    }

    #[test]
    fn single_piece_puzzle() {
        let t = AssemblyResult::identity(1, 1);
        let s = score(&t, &t).unwrap();
        assert_eq!((s.dc, s.nc, s.lc), (1.0, 1.0, 1.0));
    }

    #[test]
    fn entropy_values() {
        let flat = RgbImage::filled(8, 8, [1, 2, 3]).unwrap();
        assert_eq!(entropy24(&flat), 0.0);
        let four = RgbImage::from_fn(4, 4, |x, _| [x as u8, 0, 0]).unwrap();
        assert!((entropy24(&four) - 2.0).abs() < 1e-12);
        let distinct = RgbImage::from_fn(512, 512, |x, y| {
            [x as u8, y as u8, ((x >> 8) | (y >> 8) << 1) as u8]
        })
        .unwrap();
        assert!((entropy24(&distinct) - 18.0).abs() < 1e-9);
    }

    #[test]
    fn hue_saturation_points() {
        assert_eq!(hue_saturation([255, 0, 0]), (0.0, 1.0));
        assert_eq!(hue_saturation([0, 255, 0]), (120.0, 1.0));
        assert_eq!(hue_saturation([0, 0, 255]), (240.0, 1.0));
        assert_eq!(hue_saturation([255, 0, 255]), (300.0, 1.0));
        assert_eq!(hue_saturation([128, 64, 64]), (0.0, 0.5));
        assert_eq!(hue_saturation([0, 0, 0]), (0.0, 0.0));
    }

    #[test]
    fn histogram_cases() {
        let red = RgbImage::filled(4, 4, [255, 0, 0]).unwrap();
        let h = hue_sat_histogram(&red, 256).unwrap();
        assert_eq!(h.count(0, 255), 16);

        let gray = RgbImage::from_fn(8, 8, |x, y| [(x * 30 + y) as u8; 3]).unwrap();
        let h = hue_sat_histogram(&gray, 16).unwrap();
        assert_eq!((0..16).map(|hb| h.count(hb, 0)).sum::<u64>(), 64);

        let px = RgbImage::filled(1, 1, [128, 64, 64]).unwrap();
        for bins in [2, 7, 256] {
            let h = hue_sat_histogram(&px, bins).unwrap();
            assert_eq!(h.count(0, bins / 2), 1);
        }
        assert!(hue_sat_histogram(&px, 1).is_err());
    }

    #[test]
    fn histogram_csv_shape() {
        let img = RgbImage::filled(2, 2, [0, 0, 255]).unwrap();
        let csv = hue_sat_histogram(&img, 4).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 17);
        assert_eq!(lines[0], "hue_bin,sat_bin,count");
        assert!(lines.contains(&"2,3,4"));
    }

    proptest::proptest! {
        #[test]
        fn entropy_ignores_pixel_order(seed: u64) {
            let mut s = crate::keystream::Stream::new(seed);
            let img = RgbImage::from_fn(16, 16, |_, _| [s.next_bounded(4) as u8, s.next_bounded(3) as u8, 7]).unwrap();
            let mut pixels: Vec<[u8; 3]> = img.pixels().collect();
            let perm = crate::keystream::keyed_permutation(seed ^ 1, pixels.len());
            pixels = perm.iter().map(|&i| pixels[i]).collect();
            let shuffled = RgbImage::new(16, 16, pixels.concat()).unwrap();
            proptest::prop_assert!((entropy24(&img) - entropy24(&shuffled)).abs() < 1e-12);
            proptest::prop_assert!(entropy24(&img) <= 8.0 + 1e-12);
        }

        #[test]
        fn histogram_conserves_mass(seed: u64, bins in 2usize..40) {
            let mut s = crate::keystream::Stream::new(seed);
            let img = RgbImage::from_fn(13, 7, |_, _| std::array::from_fn(|_| s.next_u64() as u8)).unwrap();
            proptest::prop_assert_eq!(hue_sat_histogram(&img, bins).unwrap().total(), 91);
        }

        #[test]
        fn scores_stay_in_unit_interval(seed: u64) {
            let perm = crate::keystream::keyed_permutation(seed, 12);
            let mut s = crate::keystream::Stream::new(seed);
            let orient = (0..12).map(|_| Dihedral::from_index(s.next_bounded(8) as u8).unwrap()).collect();
            let r = AssemblyResult::new(4, 3, perm.into_iter().map(Some).collect(), orient).unwrap();
            let sc = score(&r, &AssemblyResult::identity(4, 3)).unwrap();
            for v in [sc.dc, sc.nc, sc.lc] {
                proptest::prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }
}
