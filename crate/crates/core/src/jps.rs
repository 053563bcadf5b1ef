//! Greedy jigsaw puzzle solver for square pieces with unknown position and
//! rotation, and the harness that points it at ciphertexts.
//!
//! Pieces are compared edge to edge with a gradient-aware SSD: the two
//! outermost lines of one piece extrapolate the line that should come next,
//! and the neighbor's touching edge is scored against that prediction.
//! Scores are normalized by the second-best alternative for the same edge,
//! then merged greedily, best first, into rigid lattice components that may
//! not overlap. The final component is fitted to the frame; anything left
//! over fills the free cells in index order. Flips are never searched.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::cipher::{derive_record, encrypt, CipherConfig, Step};
use crate::dihedral::Dihedral;
use crate::error::{Error, Result};
use crate::keystream::Stream;
use crate::metrics::{score, AssemblyResult, Scores};
use crate::model::{partition, Channel, KeyBundle, RgbImage};

/// A square tile of interleaved RGB samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    pub index: usize,
    size: usize,
    tile: Vec<u8>,
}

impl Piece {
    pub fn new(index: usize, size: usize, tile: Vec<u8>) -> Result<Self> {
        if size == 0 || tile.len() != size * size * 3 {
            return Err(Error::SizeMismatch(format!(
                "piece {index}: {} samples for a {size}x{size} tile",
                tile.len()
            )));
        }
        Ok(Self { index, size, tile })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn tile(&self) -> &[u8] {
        &self.tile
    }

    /// Copy turned `quarter_turns` clockwise.
    pub fn rotated(&self, quarter_turns: u8) -> Piece {
        let d = Dihedral::rotation(quarter_turns);
        let n = self.size;
        let mut planes = [vec![0u8; n * n], vec![0u8; n * n], vec![0u8; n * n]];
        for (c, plane) in planes.iter_mut().enumerate() {
            let src: Vec<u8> = self.tile.iter().skip(c).step_by(3).copied().collect();
            d.apply_into(&src, n, plane);
        }
        let tile = (0..n * n)
            .flat_map(|i| [planes[0][i], planes[1][i], planes[2][i]])
            .collect();
        Piece {
            index: self.index,
            size: n,
            tile,
        }
    }

    fn sample(&self, x: usize, y: usize, c: usize) -> i32 {
        self.tile[(y * self.size + x) * 3 + c] as i32
    }

    /// Samples of line `depth` (0 = outermost) along `side`, walking
    /// left-to-right or top-to-bottom.
    fn line(&self, side: Side, depth: usize) -> Vec<i32> {
        let n = self.size;
        let depth = depth.min(n - 1);
        let mut out = Vec::with_capacity(n * 3);
        for t in 0..n {
            let (x, y) = match side {
                Side::Top => (t, depth),
                Side::Bottom => (t, n - 1 - depth),
                Side::Left => (depth, t),
                Side::Right => (n - 1 - depth, t),
            };
            for c in 0..3 {
                out.push(self.sample(x, y, c));
            }
        }
        out
    }

    /// Linear extrapolation one line beyond `side`.
    fn prediction(&self, side: Side) -> Vec<i32> {
        let outer = self.line(side, 0);
        if self.size < 2 {
            return outer;
        }
        let inner = self.line(side, 1);
        outer.iter().zip(&inner).map(|(o, i)| 2 * o - i).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Top = 0,
    Right = 1,
    Bottom = 2,
    Left = 3,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Top, Side::Right, Side::Bottom, Side::Left];

    pub fn opposite(self) -> Side {
        Side::ALL[(self as usize + 2) % 4]
    }

    fn offset(self) -> (i32, i32) {
        match self {
            Side::Top => (0, -1),
            Side::Right => (1, 0),
            Side::Bottom => (0, 1),
            Side::Left => (-1, 0),
        }
    }
}

fn ssd(a: &[i32], b: &[i32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (x - y) as f64;
            d * d
        })
        .sum()
}

/// How badly `b`, turned `rotation` quarter turns clockwise, continues `a`
/// across `a`'s `side`. Zero means a perfect linear continuation.
pub fn boundary_dissimilarity(a: &Piece, side: Side, b: &Piece, rotation: u8) -> Result<f64> {
    if a.size != b.size {
        return Err(Error::SizeMismatch(format!(
            "pieces {} and {} are {} and {} pixels wide",
            a.index, b.index, a.size, b.size
        )));
    }
    let b = b.rotated(rotation);
    Ok(ssd(&a.prediction(side), &b.line(side.opposite(), 0)))
}

/// Dissimilarity for every (piece, side, other piece, rotation).
#[derive(Debug, Clone)]
pub struct CompatibilityTable {
    n: usize,
    scores: Vec<f64>,
}

impl CompatibilityTable {
    pub fn build(pieces: &[Piece]) -> Result<Self> {
        let n = pieces.len();
        if let Some(p) = pieces.iter().find(|p| p.size != pieces[0].size) {
            return Err(Error::SizeMismatch(format!(
                "piece {} differs in size",
                p.index
            )));
        }
        // Edges of every rotation of every piece, and predictions of every side.
        let edges: Vec<[[Vec<i32>; 4]; 4]> = pieces
            .par_iter()
            .map(|p| {
                std::array::from_fn(|r| {
                    let q = p.rotated(r as u8);
                    Side::ALL.map(|s| q.line(s, 0))
                })
            })
            .collect();
        let preds: Vec<[Vec<i32>; 4]> = pieces
            .par_iter()
            .map(|p| Side::ALL.map(|s| p.prediction(s)))
            .collect();
        let scores = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let (edges, preds) = (&edges, &preds);
                Side::ALL.into_iter().flat_map(move |s| {
                    (0..n).flat_map(move |j| {
                        (0..4).map(move |r| {
                            if i == j {
                                f64::INFINITY
                            } else {
                                ssd(&preds[i][s as usize], &edges[j][r][s.opposite() as usize])
                            }
                        })
                    })
                })
            })
            .collect();
        Ok(Self { n, scores })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn slot(&self, i: usize, side: Side, j: usize, rotation: u8) -> usize {
        ((i * 4 + side as usize) * self.n + j) * 4 + rotation as usize
    }

    /// Score of placing `j` (turned `rotation`) on `side` of `i`; infinite
    /// for `i == j`.
    pub fn score(&self, i: usize, side: Side, j: usize, rotation: u8) -> f64 {
        self.scores[self.slot(i, side, j, rotation)]
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    key: f64,
    i: u32,
    j: u32,
    side: u8,
    rotation: u8,
}

fn ranked_candidates(table: &CompatibilityTable) -> Vec<Candidate> {
    let n = table.n;
    let mut out: Vec<Candidate> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            Side::ALL.into_iter().flat_map(move |side| {
                // Normalize by the runner-up among distinct partners.
                let mut best_per_j: Vec<f64> = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| {
                        (0..4)
                            .map(|r| table.score(i, side, j, r))
                            .fold(f64::INFINITY, f64::min)
                    })
                    .collect();
                best_per_j.sort_by(f64::total_cmp);
                let second = best_per_j
                    .get(1)
                    .or(best_per_j.first())
                    .copied()
                    .unwrap_or(1.0);
                let norm = second + 1.0;
                (0..n).filter(move |&j| j != i).flat_map(move |j| {
                    (0..4u8).map(move |r| Candidate {
                        key: (table.score(i, side, j, r) + 1.0) / norm,
                        i: i as u32,
                        j: j as u32,
                        side: side as u8,
                        rotation: r,
                    })
                })
            })
        })
        .collect();
    out.par_sort_unstable_by(|a, b| {
        a.key
            .total_cmp(&b.key)
            .then(a.i.cmp(&b.i))
            .then(a.j.cmp(&b.j))
            .then(a.side.cmp(&b.side))
            .then(a.rotation.cmp(&b.rotation))
    });
    out
}

struct Components {
    comp_of: Vec<usize>,
    pos: Vec<(i32, i32)>,
    rot: Vec<u8>,
    members: Vec<Vec<usize>>,
    cells: Vec<HashMap<(i32, i32), usize>>,
}

impl Components {
    fn new(n: usize) -> Self {
        Self {
            comp_of: (0..n).collect(),
            pos: vec![(0, 0); n],
            rot: vec![0; n],
            members: (0..n).map(|i| vec![i]).collect(),
            cells: (0..n).map(|i| HashMap::from([((0, 0), i)])).collect(),
        }
    }

    /// Tries to attach `j`'s component so that `j` sits on `side` of `i`,
    /// turned `rotation` relative to `i`. Fails on overlap.
    fn try_merge(&mut self, i: usize, side: Side, j: usize, rotation: u8) -> bool {
        let (ca, cb) = (self.comp_of[i], self.comp_of[j]);
        if ca == cb {
            return false;
        }
        let ri = self.rot[i];
        let off = Dihedral::rotation(ri).map_vector(side.offset());
        let target = (self.pos[i].0 + off.0, self.pos[i].1 + off.1);
        let t = (ri + rotation + 4 - self.rot[j]) % 4;
        let turn = Dihedral::rotation(t);
        let pj = self.pos[j];
        let moved: Vec<(usize, (i32, i32))> = self.members[cb]
            .iter()
            .map(|&m| {
                let (dx, dy) = turn.map_vector((self.pos[m].0 - pj.0, self.pos[m].1 - pj.1));
                (m, (target.0 + dx, target.1 + dy))
            })
            .collect();
        if moved
            .iter()
            .any(|(_, cell)| self.cells[ca].contains_key(cell))
        {
            return false;
        }
        for &(m, cell) in &moved {
            self.pos[m] = cell;
            self.rot[m] = (self.rot[m] + t) % 4;
            self.comp_of[m] = ca;
            self.cells[ca].insert(cell, m);
        }
        let mut absorbed = std::mem::take(&mut self.members[cb]);
        self.members[ca].append(&mut absorbed);
        self.cells[cb].clear();
        true
    }
}

/// `(piece, cell, quarter turns)`.
type Cell = (usize, usize, u8);

/// Places a component onto the `cols` x `rows` frame, choosing the global
/// quarter turn and offset that keep the most pieces. Ties prefer the fit
/// leaving more pieces in their input orientation, then the lowest turn and
/// offset.
fn fit_to_frame(
    comps: &Components,
    comp: usize,
    cols: usize,
    rows: usize,
) -> Vec<Cell> {
    let mut best: Option<((usize, usize), Vec<Cell>)> = None;
    for g in 0..4u8 {
        let turn = Dihedral::rotation(g);
        let placed: Vec<(usize, (i32, i32), u8)> = comps.members[comp]
            .iter()
            .map(|&m| (m, turn.map_vector(comps.pos[m]), (comps.rot[m] + g) % 4))
            .collect();
        let min_x = placed.iter().map(|p| p.1 .0).min().unwrap_or(0);
        let min_y = placed.iter().map(|p| p.1 .1).min().unwrap_or(0);
        let w = (placed.iter().map(|p| p.1 .0).max().unwrap_or(0) - min_x + 1) as usize;
        let h = (placed.iter().map(|p| p.1 .1).max().unwrap_or(0) - min_y + 1) as usize;
        // Occupancy prefix sums over the bounding box.
        let mut sum = vec![0usize; (w + 1) * (h + 1)];
        for p in &placed {
            let (x, y) = ((p.1 .0 - min_x) as usize, (p.1 .1 - min_y) as usize);
            sum[(y + 1) * (w + 1) + x + 1] += 1;
        }
        for y in 1..=h {
            for x in 1..=w {
                sum[y * (w + 1) + x] += sum[(y - 1) * (w + 1) + x] + sum[y * (w + 1) + x - 1]
                    - sum[(y - 1) * (w + 1) + x - 1];
            }
        }
        let rect = |x0: usize, y0: usize, x1: usize, y1: usize| {
            sum[y1 * (w + 1) + x1] + sum[y0 * (w + 1) + x0]
                - sum[y0 * (w + 1) + x1]
                - sum[y1 * (w + 1) + x0]
        };
        let (span_x, span_y) = (w.saturating_sub(cols), h.saturating_sub(rows));
        for oy in 0..=span_y {
            for ox in 0..=span_x {
                let kept = rect(ox, oy, (ox + cols).min(w), (oy + rows).min(h));
                if best.as_ref().is_some_and(|(k, _)| k.0 > kept) {
                    continue;
                }
                let cells: Vec<Cell> = placed
                    .iter()
                    .filter_map(|&(m, (x, y), r)| {
                        let (x, y) = ((x - min_x) as usize, (y - min_y) as usize);
                        (x >= ox && x < ox + cols && y >= oy && y < oy + rows)
                            .then(|| (m, (y - oy) * cols + (x - ox), r))
                    })
                    .collect();
                let rank = (kept, cells.iter().filter(|c| c.2 == 0).count());
                if best.as_ref().is_some_and(|(k, _)| *k >= rank) {
                    continue;
                }
                best = Some((rank, cells));
            }
        }
    }
    best.map(|b| b.1).unwrap_or_default()
}

/// Reassembles `pieces` into a `cols` x `rows` grid. The result refers to
/// pieces by their `index` field.
pub fn solve(pieces: &[Piece], cols: usize, rows: usize) -> Result<AssemblyResult> {
    let n = cols * rows;
    if pieces.len() != n || n == 0 {
        return Err(Error::CountMismatch {
            expected: n,
            actual: pieces.len(),
        });
    }
    let table = CompatibilityTable::build(pieces)?;
    let mut comps = Components::new(n);
    let mut merges = 0;
    if n > 1 {
        for cand in ranked_candidates(&table) {
            if comps.try_merge(
                cand.i as usize,
                Side::ALL[cand.side as usize],
                cand.j as usize,
                cand.rotation,
            ) {
                merges += 1;
                if merges == n - 1 {
                    break;
                }
            }
        }
    }
    let main = (0..n)
        .max_by_key(|&c| (comps.members[c].len(), std::cmp::Reverse(c)))
        .expect("at least one piece");
    let mut placement = vec![None; n];
    let mut orientation = vec![Dihedral::IDENTITY; n];
    let mut used = vec![false; n];
    for (m, cell, r) in fit_to_frame(&comps, main, cols, rows) {
        placement[cell] = Some(pieces[m].index);
        orientation[cell] = Dihedral::rotation(r);
        used[m] = true;
    }
    let mut leftovers = (0..n).filter(|&m| !used[m]).collect::<Vec<_>>();
    leftovers.sort_by_key(|&m| pieces[m].index);
    let mut leftovers = leftovers.into_iter();
    for cell in placement.iter_mut().filter(|c| c.is_none()) {
        *cell = leftovers.next().map(|m| pieces[m].index);
    }
    AssemblyResult::new(cols, rows, placement, orientation)
}

/// Cuts an image into row-major square pieces, dropping remainders.
pub fn pieces_from_image(image: &RgbImage, size: usize) -> Result<(Vec<Piece>, usize, usize)> {
    let spec = crate::model::BlockSpec::square(size)?;
    let grid = partition(image, spec, true)?;
    let pieces = (0..grid.block_count())
        .map(|b| {
            let planes = Channel::ALL.map(|c| grid.tile(c, b));
            let tile = (0..size * size)
                .flat_map(|i| planes.map(|p| p[i]))
                .collect();
            Piece::new(b, size, tile)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((pieces, grid.cols(), grid.rows()))
}

/// Draws an assembly: each cell shows its piece, turned as recorded.
/// Empty cells are black.
pub fn render(result: &AssemblyResult, pieces: &[Piece]) -> Result<RgbImage> {
    let size = pieces.first().map(Piece::size).ok_or(Error::EmptyImage)?;
    let by_index: HashMap<usize, &Piece> = pieces.iter().map(|p| (p.index, p)).collect();
    let (w, h) = (result.cols() * size, result.rows() * size);
    let mut img = RgbImage::filled(w, h, [0, 0, 0])?;
    for cell in 0..result.len() {
        let Some(idx) = result.piece_at(cell) else {
            continue;
        };
        let piece = by_index
            .get(&idx)
            .ok_or_else(|| Error::InvalidArgument(format!("no piece {idx}")))?;
        let turned = piece.rotated(result.orientation_at(cell).quarter_turns());
        let (cx, cy) = ((cell % result.cols()) * size, (cell / result.cols()) * size);
        for y in 0..size {
            for x in 0..size {
                let i = (y * size + x) * 3;
                img.set_pixel(
                    cx + x,
                    cy + y,
                    [turned.tile[i], turned.tile[i + 1], turned.tile[i + 2]],
                );
            }
        }
    }
    Ok(img)
}

/// Solves an unencrypted image and scores the result.
pub fn attack_plain(image: &RgbImage, size: usize) -> Result<(AssemblyResult, Scores)> {
    let (pieces, cols, rows) = pieces_from_image(image, size)?;
    let result = solve(&pieces, cols, rows)?;
    let s = score(&result, &AssemblyResult::identity(cols, rows))?;
    Ok((result, s))
}

/// Scores a solver assembly of ciphertext blocks against the plaintext
/// layout. Each channel has its own block origin and tile transform, so the
/// assembly is mapped and scored per channel and the three scores averaged.
pub fn score_ciphertext_assembly(
    result: &AssemblyResult,
    config: &CipherConfig,
    keys: &KeyBundle,
) -> Result<Scores> {
    let (cols, rows) = (result.cols(), result.rows());
    let n = cols * rows;
    let record = derive_record(keys, n);
    let truth = AssemblyResult::identity(cols, rows);
    let mut total = Scores {
        dc: 0.0,
        nc: 0.0,
        lc: 0.0,
    };
    for c in Channel::ALL {
        let ci = c.index();
        let mut placement = Vec::with_capacity(n);
        let mut orientation = Vec::with_capacity(n);
        for cell in 0..n {
            let solver_turn = result.orientation_at(cell);
            match result.piece_at(cell) {
                Some(e) => {
                    let origin = if config.steps.contains(Step::Positional) {
                        record.position_perm[ci][e]
                    } else {
                        e
                    };
                    let applied = if config.steps.contains(Step::RotateFlip) {
                        Dihedral::from_rotate_flip(record.rotation[ci][e], record.flip[ci][e])
                    } else {
                        Dihedral::IDENTITY
                    };
                    placement.push(Some(origin));
                    orientation.push(applied.then(solver_turn));
                }
                None => {
                    placement.push(None);
                    orientation.push(solver_turn);
                }
            }
        }
        let s = score(
            &AssemblyResult::new(cols, rows, placement, orientation)?,
            &truth,
        )?;
        total.dc += s.dc / 3.0;
        total.nc += s.nc / 3.0;
        total.lc += s.lc / 3.0;
    }
    Ok(total)
}

#[derive(Debug, Clone)]
pub struct AttackReport {
    pub trials: Vec<Scores>,
    /// Trial with the highest Dc + Nc + Lc (lowest index on ties).
    pub best: usize,
    pub best_assembly: AssemblyResult,
    pub best_image: RgbImage,
}

impl AttackReport {
    pub fn best_scores(&self) -> Scores {
        self.trials[self.best]
    }

    pub fn mean(&self) -> Scores {
        let k = self.trials.len() as f64;
        Scores {
            dc: self.trials.iter().map(|s| s.dc).sum::<f64>() / k,
            nc: self.trials.iter().map(|s| s.nc).sum::<f64>() / k,
            lc: self.trials.iter().map(|s| s.lc).sum::<f64>() / k,
        }
    }

    /// `trial,Dc,Nc,Lc` rows plus a final `best` row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,Dc,Nc,Lc\n");
        for (t, s) in self.trials.iter().enumerate() {
            out.push_str(&format!("{t},{:.4},{:.4},{:.4}\n", s.dc, s.nc, s.lc));
        }
        let b = self.best_scores();
        out.push_str(&format!("best,{:.4},{:.4},{:.4}\n", b.dc, b.nc, b.lc));
        out
    }
}

/// Keys for trial `t`: trial 0 uses the configured keys, later trials draw
/// fresh bundles from a stream seeded by them.
pub fn trial_keys(keys: &KeyBundle, trial: usize) -> KeyBundle {
    if trial == 0 {
        return *keys;
    }
    let fingerprint = Channel::ALL
        .iter()
        .flat_map(|&c| {
            [
                keys.position(c),
                keys.rotation(c),
                keys.flip(c),
                keys.negpos(c),
            ]
        })
        .chain([keys.color()])
        .fold(0u64, |h, k| Stream::new(h ^ k).next_u64());
    let seed = Stream::new(fingerprint)
        .nth(trial - 1)
        .expect("infinite stream");
    KeyBundle::from_seed(keys.mode(), seed)
}

/// Encrypts `original` under `trials` key bundles, attacks each ciphertext
/// and keeps the best assembly by Dc + Nc + Lc.
pub fn evaluate_attack(
    original: &RgbImage,
    config: &CipherConfig,
    trials: usize,
) -> Result<AttackReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    if !config.spec.is_square() {
        return Err(Error::NonSquareBlock {
            bx: config.spec.bx(),
            by: config.spec.by(),
        });
    }
    let size = config.spec.bx();
    let mut runs = (0..trials)
        .into_par_iter()
        .map(|t| {
            let keys = trial_keys(&config.keys, t);
            let cfg = CipherConfig {
                keys,
                ..config.clone()
            };
            let cipher = encrypt(original, &cfg)?;
            let (pieces, cols, rows) = pieces_from_image(&cipher, size)?;
            let result = solve(&pieces, cols, rows)?;
            let scores = score_ciphertext_assembly(&result, &cfg, &keys)?;
            Ok((scores, result, pieces))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (t, run) in runs.iter().enumerate() {
        if run.0.sum() > runs[best].0.sum() {
            best = t;
        }
    }
    let best_image = render(&runs[best].1, &runs[best].2)?;
    let trials = runs.iter().map(|r| r.0).collect();
    let best_assembly = runs.swap_remove(best).1;
    Ok(AttackReport {
        trials,
        best,
        best_assembly,
        best_image,
    })
}
