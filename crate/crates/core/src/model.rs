//! Shared domain types: images, block grids, key bundles and per-block
//! transform records.

use crate::error::{Error, Result};
use crate::keystream::Stream;

/// One of the three color planes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    R = 0,
    G = 1,
    B = 2,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::R, Channel::G, Channel::B];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::R => "R",
            Channel::G => "G",
            Channel::B => "B",
        }
    }
}

/// 8-bit interleaved RGB raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        let expected = width * height * 3;
        if data.len() != expected {
            return Err(Error::BufferSize {
                expected,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Image filled with one color.
    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        let data = rgb
            .iter()
            .copied()
            .cycle()
            .take(width * height * 3)
            .collect();
        Self::new(width, height, data)
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn pixels(&self) -> impl Iterator<Item = [u8; 3]> + '_ {
        self.data.chunks_exact(3).map(|p| [p[0], p[1], p[2]])
    }

    /// One color plane as a row-major sample vector.
    pub fn plane(&self, channel: Channel) -> Vec<u8> {
        self.data
            .iter()
            .skip(channel.index())
            .step_by(3)
            .copied()
            .collect()
    }

    pub fn from_planes(width: usize, height: usize, planes: [&[u8]; 3]) -> Result<Self> {
        let n = width * height;
        for p in planes {
            if p.len() != n {
                return Err(Error::BufferSize {
                    expected: n,
                    actual: p.len(),
                });
            }
        }
        let mut data = Vec::with_capacity(n * 3);
        for ((&r, &g), &b) in planes[0].iter().zip(planes[1]).zip(planes[2]) {
            data.extend([r, g, b]);
        }
        Self::new(width, height, data)
    }

    /// Top-left `width` x `height` region.
    pub fn crop(&self, width: usize, height: usize) -> Result<Self> {
        if width > self.width || height > self.height {
            return Err(Error::InvalidArgument(format!(
                "crop {width}x{height} exceeds image {}x{}",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            let start = y * self.width * 3;
            data.extend_from_slice(&self.data[start..start + width * 3]);
        }
        Self::new(width, height, data)
    }
}

/// Block dimensions in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockSpec {
    bx: usize,
    by: usize,
}

impl BlockSpec {
    pub fn new(bx: usize, by: usize) -> Result<Self> {
        if bx == 0 || by == 0 {
            return Err(Error::InvalidBlockSpec { bx, by });
        }
        Ok(Self { bx, by })
    }

    pub fn square(size: usize) -> Result<Self> {
        Self::new(size, size)
    }

    pub fn bx(&self) -> usize {
        self.bx
    }

    pub fn by(&self) -> usize {
        self.by
    }

    pub fn is_square(&self) -> bool {
        self.bx == self.by
    }

    /// Number of whole blocks that fit in a `width` x `height` image.
    pub fn block_count(&self, width: usize, height: usize) -> usize {
        (width / self.bx) * (height / self.by)
    }
}

/// An image split into `cols` x `rows` tiles, stored block-major per channel:
/// the tile of block `b` occupies `b * bx * by .. (b + 1) * bx * by` of each
/// plane, itself row-major. Blocks are numbered row-major over the grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockGrid {
    spec: BlockSpec,
    cols: usize,
    rows: usize,
    planes: [Vec<u8>; 3],
}

impl BlockGrid {
    pub fn spec(&self) -> BlockSpec {
        self.spec
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn block_count(&self) -> usize {
        self.cols * self.rows
    }

    pub fn tile_len(&self) -> usize {
        self.spec.bx * self.spec.by
    }

    pub fn tile(&self, channel: Channel, block: usize) -> &[u8] {
        let n = self.tile_len();
        &self.planes[channel.index()][block * n..(block + 1) * n]
    }

    pub fn tile_mut(&mut self, channel: Channel, block: usize) -> &mut [u8] {
        let n = self.tile_len();
        &mut self.planes[channel.index()][block * n..(block + 1) * n]
    }

    pub fn plane(&self, channel: Channel) -> &[u8] {
        &self.planes[channel.index()]
    }

    pub(crate) fn plane_mut(&mut self, channel: Channel) -> &mut Vec<u8> {
        &mut self.planes[channel.index()]
    }

    /// Builds a grid from per-channel, block-major tile data.
    pub fn from_planes(
        spec: BlockSpec,
        cols: usize,
        rows: usize,
        planes: [Vec<u8>; 3],
    ) -> Result<Self> {
        let expected = cols * rows * spec.bx * spec.by;
        if cols == 0 || rows == 0 {
            return Err(Error::EmptyImage);
        }
        for p in &planes {
            if p.len() != expected {
                return Err(Error::BufferSize {
                    expected,
                    actual: p.len(),
                });
            }
        }
        Ok(Self {
            spec,
            cols,
            rows,
            planes,
        })
    }
}

/// Splits an image into row-major blocks. With `allow_crop`, right and bottom
/// remainders are discarded; otherwise they are an error.
pub fn partition(image: &RgbImage, spec: BlockSpec, allow_crop: bool) -> Result<BlockGrid> {
    let (w, h) = (image.width(), image.height());
    let (bx, by) = (spec.bx, spec.by);
    if !allow_crop && (w % bx != 0 || h % by != 0) {
        return Err(Error::DimensionMismatch {
            width: w,
            height: h,
            bx,
            by,
        });
    }
    let (cols, rows) = (w / bx, h / by);
    if cols == 0 || rows == 0 {
        return Err(Error::DimensionMismatch {
            width: w,
            height: h,
            bx,
            by,
        });
    }
    let n = cols * rows * bx * by;
    let mut planes = [
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    ];
    let src = image.as_bytes();
    for row in 0..rows {
        for col in 0..cols {
            for ty in 0..by {
                let y = row * by + ty;
                let start = (y * w + col * bx) * 3;
                for px in src[start..start + bx * 3].chunks_exact(3) {
                    planes[0].push(px[0]);
                    planes[1].push(px[1]);
                    planes[2].push(px[2]);
                }
            }
        }
    }
    Ok(BlockGrid {
        spec,
        cols,
        rows,
        planes,
    })
}

/// Inverse of [`partition`] for divisible images.
pub fn assemble(grid: &BlockGrid) -> RgbImage {
    let (bx, by) = (grid.spec.bx, grid.spec.by);
    let w = grid.cols * bx;
    let h = grid.rows * by;
    let mut data = vec![0u8; w * h * 3];
    let tile_len = bx * by;
    for block in 0..grid.block_count() {
        let (col, row) = (block % grid.cols, block / grid.cols);
        for c in 0..3 {
            let tile = &grid.planes[c][block * tile_len..(block + 1) * tile_len];
            for ty in 0..by {
                let y = row * by + ty;
                for tx in 0..bx {
                    let x = col * bx + tx;
                    data[(y * w + x) * 3 + c] = tile[ty * bx + tx];
                }
            }
        }
    }
    RgbImage {
        width: w,
        height: h,
        data,
    }
}

/// Key regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// One subkey per process, shared by all three channels.
    Conventional,
    /// Independent subkeys per channel for positional scrambling,
    /// rotation, flip and negative-positive transformation.
    Proposed,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Conventional => "conventional",
            Mode::Proposed => "proposed",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "conventional" | "conv" => Ok(Mode::Conventional),
            "proposed" | "prop" => Ok(Mode::Proposed),
            other => Err(Error::InvalidArgument(format!("unknown mode {other:?}"))),
        }
    }
}

/// Subkeys K1..K5. K1..K4 hold one value per channel (all equal in
/// conventional mode); K5 drives the color shuffle and is always shared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KeyBundle {
    mode: Mode,
    position: [u64; 3],
    rotation: [u64; 3],
    flip: [u64; 3],
    negpos: [u64; 3],
    color: u64,
}

impl KeyBundle {
    pub fn conventional(k1: u64, k2: u64, k3: u64, k4: u64, k5: u64) -> Self {
        Self {
            mode: Mode::Conventional,
            position: [k1; 3],
            rotation: [k2; 3],
            flip: [k3; 3],
            negpos: [k4; 3],
            color: k5,
        }
    }

    pub fn proposed(k1: [u64; 3], k2: [u64; 3], k3: [u64; 3], k4: [u64; 3], k5: u64) -> Self {
        Self {
            mode: Mode::Proposed,
            position: k1,
            rotation: k2,
            flip: k3,
            negpos: k4,
            color: k5,
        }
    }

    /// Derives every subkey by drawing successive values from one stream:
    /// K1..K5 for conventional mode, K1R, K1G, K1B, ..., K4B, K5 for proposed.
    pub fn from_seed(mode: Mode, seed: u64) -> Self {
        let mut s = Stream::new(seed);
        match mode {
            Mode::Conventional => {
                let k: [u64; 5] = std::array::from_fn(|_| s.next_u64());
                Self::conventional(k[0], k[1], k[2], k[3], k[4])
            }
            Mode::Proposed => {
                let mut triple = || -> [u64; 3] { std::array::from_fn(|_| s.next_u64()) };
                let (k1, k2, k3, k4) = (triple(), triple(), triple(), triple());
                Self::proposed(k1, k2, k3, k4, s.next_u64())
            }
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn position(&self, c: Channel) -> u64 {
        self.position[c.index()]
    }

    pub fn rotation(&self, c: Channel) -> u64 {
        self.rotation[c.index()]
    }

    pub fn flip(&self, c: Channel) -> u64 {
        self.flip[c.index()]
    }

    pub fn negpos(&self, c: Channel) -> u64 {
        self.negpos[c.index()]
    }

    pub fn color(&self) -> u64 {
        self.color
    }

    /// Copy with new K4 channel subkeys. In conventional mode only the
    /// first value is used.
    pub fn with_negpos(mut self, k4: [u64; 3]) -> Self {
        self.negpos = match self.mode {
            Mode::Conventional => [k4[0]; 3],
            Mode::Proposed => k4,
        };
        self
    }
}

/// Block flip applied after rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flip {
    None = 0,
    Horizontal = 1,
    Vertical = 2,
    Both = 3,
}

impl Flip {
    pub fn from_index(i: u64) -> Self {
        match i & 3 {
            0 => Flip::None,
            1 => Flip::Horizontal,
            2 => Flip::Vertical,
            _ => Flip::Both,
        }
    }
}

/// Everything a key bundle decides for one grid: indexed by block position in
/// the encrypted layout, and by channel where the process is per-channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockTransformRecord {
    /// `position_perm[c][p]` is the source block shown at position `p`.
    pub position_perm: [Vec<usize>; 3],
    /// Quarter turns clockwise, `rotation[c][p]` in `0..4`.
    pub rotation: [Vec<u8>; 3],
    pub flip: [Vec<Flip>; 3],
    pub negpos: [Vec<bool>; 3],
    /// Lexicographic index into the six (R, G, B) orders, one per block.
    pub color_perm: Vec<u8>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_image(w: usize, h: usize, seed: u64) -> RgbImage {
        let mut s = Stream::new(seed);
        let data = (0..w * h * 3).map(|_| s.next_u64() as u8).collect();
        RgbImage::new(w, h, data).unwrap()
    }

    #[test]
    fn block_counts() {
        let img = RgbImage::filled(512, 512, [0, 0, 0]).unwrap();
        let g = partition(&img, BlockSpec::square(16).unwrap(), false).unwrap();
        assert_eq!(g.block_count(), 1024);

        let img = RgbImage::filled(512, 480, [0, 0, 0]).unwrap();
        let g = partition(&img, BlockSpec::square(32).unwrap(), false).unwrap();
        assert_eq!((g.cols(), g.rows(), g.block_count()), (16, 15, 240));
    }

    #[test]
    fn single_block_partition() {
        let img = random_image(12, 8, 3);
        let g = partition(&img, BlockSpec::new(12, 8).unwrap(), false).unwrap();
        assert_eq!(g.block_count(), 1);
        assert_eq!(g.tile(Channel::G, 0), img.plane(Channel::G).as_slice());
        assert_eq!(assemble(&g), img);
    }

    #[test]
    fn remainder_rejected_without_crop() {
        let img = random_image(10, 8, 1);
        let err = partition(&img, BlockSpec::square(4).unwrap(), false).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
        let g = partition(&img, BlockSpec::square(4).unwrap(), true).unwrap();
        assert_eq!((g.cols(), g.rows()), (2, 2));
        assert_eq!(assemble(&g), img.crop(8, 8).unwrap());
    }

    #[test]
    fn blocks_larger_than_image_rejected() {
        let img = random_image(4, 4, 1);
        assert!(partition(&img, BlockSpec::square(8).unwrap(), true).is_err());
        assert!(BlockSpec::new(0, 4).is_err());
    }

    #[test]
    fn quadrant_layout_is_row_major() {
        let colors = [[255, 0, 0], [0, 255, 0], [0, 0, 255], [9, 9, 9]];
        let spec = BlockSpec::square(2).unwrap();
        let planes: [Vec<u8>; 3] =
            std::array::from_fn(|c| colors.iter().flat_map(|col| [col[c]; 4]).collect());
        let grid = BlockGrid::from_planes(spec, 2, 2, planes).unwrap();
        let img = assemble(&grid);
        assert_eq!(img.pixel(0, 0), colors[0]);
        assert_eq!(img.pixel(3, 1), colors[1]);
        assert_eq!(img.pixel(1, 3), colors[2]);
        assert_eq!(img.pixel(2, 2), colors[3]);
    }

    #[test]
    fn crop_flag_matches_external_crop() {
        let img = random_image(64, 64, 9);
        let spec = BlockSpec::square(32).unwrap();
        let cropped = img.crop(64, 60).unwrap();
        let a = partition(&cropped, spec, true).unwrap();
        let b = partition(&cropped.crop(64, 32).unwrap(), spec, false).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn conventional_keys_are_channel_shared() {
        let k = KeyBundle::from_seed(Mode::Conventional, 5);
        for c in Channel::ALL {
            assert_eq!(k.position(c), k.position(Channel::R));
            assert_eq!(k.negpos(c), k.negpos(Channel::R));
        }
        let p = KeyBundle::from_seed(Mode::Proposed, 5);
        assert_ne!(p.position(Channel::R), p.position(Channel::G));
    }

    proptest::proptest! {
        #[test]
        fn assemble_inverts_partition(
            cols in 1usize..6, rows in 1usize..6, bx in 1usize..7, by in 1usize..7, seed: u64
        ) {
            let img = random_image(cols * bx, rows * by, seed);
            let g = partition(&img, BlockSpec::new(bx, by).unwrap(), false).unwrap();
            proptest::prop_assert_eq!(g.block_count(), cols * rows);
            proptest::prop_assert_eq!(assemble(&g), img);
        }
    }
}
