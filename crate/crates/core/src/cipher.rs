//! The four block transforms and their composition into encryption and
//! decryption.
//!
//! Keystream layout: each (process, channel) pair reads its own stream,
//! seeded by the matching subkey. Positional scrambling consumes the
//! `L - 1` Fisher-Yates draws; rotation, flip, negative-positive and color
//! shuffle draw one bounded value per block, in row-major order of the
//! scrambled layout. Conventional keys repeat the same subkey for every
//! channel, so the two regimes share one code path.

use crate::dihedral::Dihedral;
use crate::error::{Error, Result};
use crate::keystream::{invert_permutation, keyed_permutation, Stream};
use crate::model::{
    assemble, partition, BlockGrid, BlockSpec, BlockTransformRecord, Channel, Flip, KeyBundle,
    RgbImage,
};

/// One encryption process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    Positional,
    RotateFlip,
    NegPos,
    ColorShuffle,
}

impl Step {
    pub const ALL: [Step; 4] = [
        Step::Positional,
        Step::RotateFlip,
        Step::NegPos,
        Step::ColorShuffle,
    ];

    fn bit(self) -> u8 {
        1 << self as u8
    }
}

/// A subset of [`Step`]s.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StepSet(u8);

impl StepSet {
    pub const ALL: StepSet = StepSet(0b1111);
    pub const NONE: StepSet = StepSet(0);

    pub fn only(steps: &[Step]) -> Self {
        StepSet(steps.iter().fold(0, |acc, s| acc | s.bit()))
    }

    pub fn contains(self, step: Step) -> bool {
        self.0 & step.bit() != 0
    }

    pub fn with(self, step: Step) -> Self {
        StepSet(self.0 | step.bit())
    }

    pub fn without(self, step: Step) -> Self {
        StepSet(self.0 & !step.bit())
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

impl Default for StepSet {
    fn default() -> Self {
        StepSet::ALL
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CipherConfig {
    pub spec: BlockSpec,
    pub keys: KeyBundle,
    pub steps: StepSet,
    /// Discard right/bottom remainders instead of rejecting the image.
    pub allow_crop: bool,
}

impl CipherConfig {
    pub fn new(spec: BlockSpec, keys: KeyBundle) -> Self {
        Self {
            spec,
            keys,
            steps: StepSet::ALL,
            allow_crop: false,
        }
    }

    pub fn with_steps(mut self, steps: StepSet) -> Self {
        self.steps = steps;
        self
    }

    pub fn with_crop(mut self, allow_crop: bool) -> Self {
        self.allow_crop = allow_crop;
        self
    }
}

/// Lexicographic orders of (R, G, B): output channel `k` takes input
/// channel `COLOR_ORDERS[i][k]`.
pub const COLOR_ORDERS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

fn per_block<T>(seed: u64, blocks: usize, mut draw: impl FnMut(&mut Stream) -> T) -> Vec<T> {
    let mut s = Stream::new(seed);
    (0..blocks).map(|_| draw(&mut s)).collect()
}

/// Regenerates every keyed decision for a grid of `blocks` blocks.
pub fn derive_record(keys: &KeyBundle, blocks: usize) -> BlockTransformRecord {
    let per_channel = |f: &dyn Fn(Channel) -> u64, bound: u64| -> [Vec<u64>; 3] {
        Channel::ALL.map(|c| per_block(f(c), blocks, |s| s.next_bounded(bound)))
    };
    let rotation =
        per_channel(&|c| keys.rotation(c), 4).map(|v| v.into_iter().map(|r| r as u8).collect());
    let flip =
        per_channel(&|c| keys.flip(c), 4).map(|v| v.into_iter().map(Flip::from_index).collect());
    let negpos =
        per_channel(&|c| keys.negpos(c), 2).map(|v| v.into_iter().map(|b| b == 1).collect());
    BlockTransformRecord {
        position_perm: Channel::ALL.map(|c| keyed_permutation(keys.position(c), blocks)),
        rotation,
        flip,
        negpos,
        color_perm: per_block(keys.color(), blocks, |s| s.next_bounded(6) as u8),
    }
}

fn permute_positions(grid: &BlockGrid, perms: &[Vec<usize>; 3]) -> BlockGrid {
    let mut out = grid.clone();
    for c in Channel::ALL {
        let perm = &perms[c.index()];
        for (dst, &src) in perm.iter().enumerate() {
            out.tile_mut(c, dst).copy_from_slice(grid.tile(c, src));
        }
    }
    out
}

fn apply_dihedral(grid: &mut BlockGrid, transforms: &[Vec<Dihedral>; 3]) {
    let size = grid.spec().bx();
    let mut scratch = vec![0u8; grid.tile_len()];
    for c in Channel::ALL {
        for (block, &d) in transforms[c.index()].iter().enumerate() {
            if d == Dihedral::IDENTITY {
                continue;
            }
            let tile = grid.tile_mut(c, block);
            d.apply_into(tile, size, &mut scratch);
            tile.copy_from_slice(&scratch);
        }
    }
}

fn dihedral_table(record: &BlockTransformRecord) -> [Vec<Dihedral>; 3] {
    Channel::ALL.map(|c| {
        let i = c.index();
        record.rotation[i]
            .iter()
            .zip(&record.flip[i])
            .map(|(&r, &f)| Dihedral::from_rotate_flip(r, f))
            .collect()
    })
}

fn apply_negpos(grid: &mut BlockGrid, bits: &[Vec<bool>; 3]) {
    for c in Channel::ALL {
        for (block, &bit) in bits[c.index()].iter().enumerate() {
            if bit {
                grid.tile_mut(c, block)
                    .iter_mut()
                    .for_each(|x| *x = 255 - *x);
            }
        }
    }
}

fn apply_color_perm(grid: &mut BlockGrid, perm: &[u8], inverse: bool) {
    let n = grid.tile_len();
    for (block, &idx) in perm.iter().enumerate() {
        if idx == 0 {
            continue;
        }
        let order = COLOR_ORDERS[idx as usize];
        let tiles: [Vec<u8>; 3] = Channel::ALL.map(|c| grid.tile(c, block).to_vec());
        for (k, &o) in order.iter().enumerate() {
            let (dst, src) = if inverse { (o, k) } else { (k, o) };
            grid.plane_mut(Channel::ALL[dst])[block * n..(block + 1) * n]
                .copy_from_slice(&tiles[src]);
        }
    }
}

fn require_square(spec: BlockSpec) -> Result<()> {
    if spec.is_square() {
        Ok(())
    } else {
        Err(Error::NonSquareBlock {
            bx: spec.bx(),
            by: spec.by(),
        })
    }
}

/// Step 2: re-orders each channel's blocks by its K1 permutation.
pub fn scramble_positions(grid: &BlockGrid, keys: &KeyBundle) -> (BlockGrid, [Vec<usize>; 3]) {
    let perms = Channel::ALL.map(|c| keyed_permutation(keys.position(c), grid.block_count()));
    (permute_positions(grid, &perms), perms)
}

/// Transformed grid with the per-channel rotation counts and flips drawn.
pub type RotateFlipOutput = (BlockGrid, [Vec<u8>; 3], [Vec<Flip>; 3]);

/// Step 3: rotates each tile `r` quarter turns clockwise (K2), then flips
/// it (K3).
pub fn rotate_flip(grid: &BlockGrid, keys: &KeyBundle) -> Result<RotateFlipOutput> {
    require_square(grid.spec())?;
    let record = derive_record(keys, grid.block_count());
    let mut out = grid.clone();
    apply_dihedral(&mut out, &dihedral_table(&record));
    Ok((out, record.rotation, record.flip))
}

/// Step 4: inverts every sample of a tile (`x -> 255 - x`) when its K4 bit
/// is set.
pub fn negpos_transform(grid: &BlockGrid, keys: &KeyBundle) -> (BlockGrid, [Vec<bool>; 3]) {
    let record = derive_record(keys, grid.block_count());
    let mut out = grid.clone();
    apply_negpos(&mut out, &record.negpos);
    (out, record.negpos)
}

/// Step 5: reorders the three co-located tiles of each block (K5).
pub fn shuffle_colors(grid: &BlockGrid, keys: &KeyBundle) -> (BlockGrid, Vec<u8>) {
    let record = derive_record(keys, grid.block_count());
    let mut out = grid.clone();
    apply_color_perm(&mut out, &record.color_perm, false);
    (out, record.color_perm)
}

/// Encrypts a grid in place of an image; the grid must already be
/// partitioned with `config.spec`.
pub fn encrypt_grid(grid: &BlockGrid, config: &CipherConfig) -> Result<BlockGrid> {
    let steps = config.steps;
    if steps.contains(Step::RotateFlip) {
        require_square(grid.spec())?;
    }
    let record = derive_record(&config.keys, grid.block_count());
    let mut g = if steps.contains(Step::Positional) {
        permute_positions(grid, &record.position_perm)
    } else {
        grid.clone()
    };
    if steps.contains(Step::RotateFlip) {
        apply_dihedral(&mut g, &dihedral_table(&record));
    }
    if steps.contains(Step::NegPos) {
        apply_negpos(&mut g, &record.negpos);
    }
    if steps.contains(Step::ColorShuffle) {
        apply_color_perm(&mut g, &record.color_perm, false);
    }
    Ok(g)
}

pub fn decrypt_grid(grid: &BlockGrid, config: &CipherConfig) -> Result<BlockGrid> {
    let steps = config.steps;
    if steps.contains(Step::RotateFlip) {
        require_square(grid.spec())?;
    }
    let record = derive_record(&config.keys, grid.block_count());
    let mut g = grid.clone();
    if steps.contains(Step::ColorShuffle) {
        apply_color_perm(&mut g, &record.color_perm, true);
    }
    if steps.contains(Step::NegPos) {
        apply_negpos(&mut g, &record.negpos);
    }
    if steps.contains(Step::RotateFlip) {
        let inverse =
            dihedral_table(&record).map(|v| v.into_iter().map(Dihedral::inverse).collect());
        apply_dihedral(&mut g, &inverse);
    }
    if steps.contains(Step::Positional) {
        let inverse = record
            .position_perm
            .each_ref()
            .map(|p| invert_permutation(p));
        g = permute_positions(&g, &inverse);
    }
    Ok(g)
}

/// Partition, the enabled steps in order, then reassembly. With
/// `allow_crop` the output covers only the whole blocks of the input.
pub fn encrypt(image: &RgbImage, config: &CipherConfig) -> Result<RgbImage> {
    let grid = partition(image, config.spec, config.allow_crop)?;
    Ok(assemble(&encrypt_grid(&grid, config)?))
}

/// Exact inverse of [`encrypt`]. The transform record is regenerated from
/// the keys.
pub fn decrypt(image: &RgbImage, config: &CipherConfig) -> Result<RgbImage> {
    let grid = partition(image, config.spec, false)?;
    Ok(assemble(&decrypt_grid(&grid, config)?))
}
