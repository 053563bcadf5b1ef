//! LOCO-I style lossless coder for 8-bit planes.
//!
//! Regular mode predicts with the median edge detector plus a per-context
//! bias correction, and codes the modulo-reduced residual with a
//! length-limited Golomb code. Flat neighborhoods switch to run mode. The
//! parameters are the usual 8-bit ones (thresholds 3/7/21, 365 contexts,
//! reset 64), but the bitstream is this crate's own: MSB-first bits, no
//! marker segments, no byte stuffing.
//!
//! Neighbors outside the plane: the row above the first row reads as zeros;
//! in the first column `a` and `c` take the value of `b`; in the last column
//! `d` takes the value of `b`.

use crate::error::{Error, Result};
use crate::model::{Channel, RgbImage};

const MAXVAL: i32 = 255;
const RANGE: i32 = 256;
const QBPP: u32 = 8;
const LIMIT: u32 = 32;
const RESET: i32 = 64;
const T1: i32 = 3;
const T2: i32 = 7;
const T3: i32 = 21;
const REGULAR_CONTEXTS: usize = 365;

const J: [u32; 32] = [
    0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2, 3, 3, 3, 3, 4, 4, 5, 5, 6, 6, 7, 7, 8, 9, 10, 11, 12, 13,
    14, 15,
];

pub const CONTAINER_MAGIC: [u8; 4] = *b"BPLS";

/// One row-major 8-bit plane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodecPlane {
    pub width: usize,
    pub height: usize,
    pub samples: Vec<u8>,
}

impl CodecPlane {
    pub fn new(width: usize, height: usize, samples: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if samples.len() != width * height {
            return Err(Error::BufferSize {
                expected: width * height,
                actual: samples.len(),
            });
        }
        Ok(Self {
            width,
            height,
            samples,
        })
    }
}

/// Median edge detector.
pub fn med_predict(a: u8, b: u8, c: u8) -> u8 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    if c <= lo {
        hi
    } else if c >= hi {
        lo
    } else {
        // c lies strictly between a and b, so a + b - c stays in range.
        (a as i32 + b as i32 - c as i32) as u8
    }
}

fn quantize(d: i32) -> i32 {
    match d {
        d if d <= -T3 => -4,
        d if d <= -T2 => -3,
        d if d <= -T1 => -2,
        d if d < 0 => -1,
        0 => 0,
        d if d < T1 => 1,
        d if d < T2 => 2,
        d if d < T3 => 3,
        _ => 4,
    }
}

fn modulo_reduce(mut e: i32) -> i32 {
    if e < 0 {
        e += RANGE;
    }
    if e >= (RANGE + 1) / 2 {
        e -= RANGE;
    }
    e
}

fn wrap_sample(v: i32) -> u8 {
    v.rem_euclid(RANGE) as u8
}

#[derive(Debug, Clone, Copy)]
struct Context {
    a: i32,
    b: i32,
    c: i32,
    n: i32,
}

impl Context {
    fn new() -> Self {
        Self {
            a: ((RANGE + 32) / 64).max(2),
            b: 0,
            c: 0,
            n: 1,
        }
    }

    fn golomb_k(&self) -> u32 {
        let mut k = 0;
        while (self.n << k) < self.a {
            k += 1;
        }
        k
    }

    fn update(&mut self, err: i32) {
        self.b += err;
        self.a += err.abs();
        if self.n == RESET {
            self.a >>= 1;
            self.b >>= 1;
            self.n >>= 1;
        }
        self.n += 1;
        if self.b + self.n <= 0 {
            self.b += self.n;
            if self.b <= -self.n {
                self.b = -self.n + 1;
            }
            if self.c > -128 {
                self.c -= 1;
            }
        } else if self.b > 0 {
            self.b -= self.n;
            if self.b > 0 {
                self.b = 0;
            }
            if self.c < 127 {
                self.c += 1;
            }
        }
    }
}

/// Run-interruption context (one for `a == b`, one for `a != b`).
#[derive(Debug, Clone, Copy)]
struct RunContext {
    a: i32,
    n: i32,
    nn: i32,
    kind: i32,
}

impl RunContext {
    fn new(kind: i32) -> Self {
        Self {
            a: ((RANGE + 32) / 64).max(2),
            n: 1,
            nn: 0,
            kind,
        }
    }

    fn golomb_k(&self) -> u32 {
        let temp = self.a + (self.n >> 1) * self.kind;
        let mut k = 0;
        while (self.n << k) < temp {
            k += 1;
        }
        k
    }

    fn map_bit(&self, err: i32, k: u32) -> i32 {
        let neg_majority = 2 * self.nn >= self.n;
        let m = (k == 0 && err > 0 && !neg_majority)
            || (err < 0 && neg_majority)
            || (err < 0 && k != 0);
        m as i32
    }

    fn unmap(&self, em: i32, k: u32) -> i32 {
        let temp = em + self.kind;
        let map = temp & 1;
        let abs = (temp + map) / 2;
        if (k != 0 || 2 * self.nn >= self.n) == (map != 0) {
            -abs
        } else {
            abs
        }
    }

    fn update(&mut self, err: i32, em: i32) {
        if err < 0 {
            self.nn += 1;
        }
        self.a += (em + 1 - self.kind) >> 1;
        if self.n == RESET {
            self.a >>= 1;
            self.n >>= 1;
            self.nn >>= 1;
        }
        self.n += 1;
    }
}

struct State {
    regular: Vec<Context>,
    run: [RunContext; 2],
    run_index: usize,
}

impl State {
    fn new() -> Self {
        Self {
            regular: vec![Context::new(); REGULAR_CONTEXTS],
            run: [RunContext::new(0), RunContext::new(1)],
            run_index: 0,
        }
    }
}

#[derive(Clone, Copy)]
struct Neighbors {
    a: i32,
    b: i32,
    c: i32,
    d: i32,
}

fn neighbors(samples: &[u8], width: usize, x: usize, y: usize) -> Neighbors {
    let at = |xx: usize, yy: usize| samples[yy * width + xx] as i32;
    let b = if y > 0 { at(x, y - 1) } else { 0 };
    let d = if y > 0 && x + 1 < width {
        at(x + 1, y - 1)
    } else {
        b
    };
    let (a, c) = if x > 0 {
        (at(x - 1, y), if y > 0 { at(x - 1, y - 1) } else { 0 })
    } else {
        (b, b)
    };
    Neighbors { a, b, c, d }
}

/// Folded context: `None` selects run mode, otherwise `(index, sign)`.
fn context_of(n: Neighbors) -> Option<(usize, i32)> {
    let mut q = [
        quantize(n.d - n.b),
        quantize(n.b - n.c),
        quantize(n.c - n.a),
    ];
    if q == [0, 0, 0] {
        return None;
    }
    let first = q.iter().copied().find(|&v| v != 0).unwrap_or(0);
    let sign = if first < 0 { -1 } else { 1 };
    if sign < 0 {
        q.iter_mut().for_each(|v| *v = -*v);
    }
    Some(((q[0] * 81 + q[1] * 9 + q[2]) as usize, sign))
}

fn corrected_prediction(n: Neighbors, ctx: &Context, sign: i32) -> i32 {
    let px = med_predict(n.a as u8, n.b as u8, n.c as u8) as i32 + sign * ctx.c;
    px.clamp(0, MAXVAL)
}

struct BitWriter {
    bytes: Vec<u8>,
    acc: u64,
    bits: u32,
}

impl BitWriter {
    fn new() -> Self {
        Self {
            bytes: Vec::new(),
            acc: 0,
            bits: 0,
        }
    }

    fn put(&mut self, value: u32, count: u32) {
        debug_assert!(count <= 32);
        if count == 0 {
            return;
        }
        self.acc = (self.acc << count) | (value as u64 & ((1u64 << count) - 1));
        self.bits += count;
        while self.bits >= 8 {
            self.bits -= 8;
            self.bytes.push((self.acc >> self.bits) as u8);
        }
    }

    fn zeros(&mut self, mut count: u32) {
        while count > 0 {
            let step = count.min(32);
            self.put(0, step);
            count -= step;
        }
    }

    fn finish(mut self) -> Vec<u8> {
        if self.bits > 0 {
            let pad = 8 - self.bits;
            self.put(0, pad);
        }
        self.bytes
    }
}

struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
    bit: u32,
}

impl<'a> BitReader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self {
            bytes,
            pos: 0,
            bit: 0,
        }
    }

    fn bit(&mut self) -> Result<u32> {
        let byte = *self
            .bytes
            .get(self.pos)
            .ok_or(Error::CorruptStream("unexpected end of stream"))?;
        let v = (byte >> (7 - self.bit)) & 1;
        self.bit += 1;
        if self.bit == 8 {
            self.bit = 0;
            self.pos += 1;
        }
        Ok(v as u32)
    }

    fn bits(&mut self, count: u32) -> Result<u32> {
        let mut v = 0;
        for _ in 0..count {
            v = (v << 1) | self.bit()?;
        }
        Ok(v)
    }

    /// Whole bytes never touched by the decoder.
    fn unread_bytes(&self) -> usize {
        self.bytes.len() - self.pos - (self.bit > 0) as usize
    }
}

fn put_golomb(w: &mut BitWriter, value: i32, k: u32, limit: u32) {
    let value = value as u32;
    let high = value >> k;
    let cap = limit - QBPP - 1;
    if high < cap {
        w.zeros(high);
        w.put(1, 1);
        w.put(value, k);
    } else {
        w.zeros(cap);
        w.put(1, 1);
        w.put(value - 1, QBPP);
    }
}

fn get_golomb(r: &mut BitReader, k: u32, limit: u32) -> Result<i32> {
    let cap = limit - QBPP - 1;
    let mut high = 0;
    while r.bit()? == 0 {
        high += 1;
        if high > cap {
            return Err(Error::CorruptStream("unary prefix exceeds limit"));
        }
    }
    if high < cap {
        Ok(((high << k) | r.bits(k)?) as i32)
    } else {
        Ok(r.bits(QBPP)? as i32 + 1)
    }
}

fn map_regular(err: i32, k: u32, ctx: &Context) -> i32 {
    let special = k == 0 && 2 * ctx.b <= -ctx.n;
    match (special, err >= 0) {
        (false, true) => 2 * err,
        (false, false) => -2 * err - 1,
        (true, true) => 2 * err + 1,
        (true, false) => -2 * (err + 1),
    }
}

fn unmap_regular(m: i32, k: u32, ctx: &Context) -> i32 {
    let special = k == 0 && 2 * ctx.b <= -ctx.n;
    match (special, m & 1 == 0) {
        (false, true) => m / 2,
        (false, false) => -(m + 1) / 2,
        (true, false) => (m - 1) / 2,
        (true, true) => -m / 2 - 1,
    }
}

/// Codes one plane. The output carries no dimensions.
pub fn encode_plane(plane: &CodecPlane) -> Vec<u8> {
    let (w, h) = (plane.width, plane.height);
    let s = &plane.samples;
    let mut state = State::new();
    let mut out = BitWriter::new();
    for y in 0..h {
        let mut x = 0;
        while x < w {
            let nb = neighbors(s, w, x, y);
            let ix = s[y * w + x] as i32;
            match context_of(nb) {
                Some((q, sign)) => {
                    let ctx = &mut state.regular[q];
                    let px = corrected_prediction(nb, ctx, sign);
                    let err = modulo_reduce(sign * (ix - px));
                    let k = ctx.golomb_k();
                    put_golomb(&mut out, map_regular(err, k, ctx), k, LIMIT);
                    ctx.update(err);
                    x += 1;
                }
                None => {
                    let run_value = nb.a as u8;
                    let run = s[y * w + x..y * w + w]
                        .iter()
                        .take_while(|&&v| v == run_value)
                        .count();
                    let end_of_line = x + run == w;
                    encode_run(&mut out, &mut state, run, end_of_line);
                    x += run;
                    if !end_of_line {
                        let nb = neighbors(s, w, x, y);
                        encode_interruption(&mut out, &mut state, nb, s[y * w + x] as i32);
                        x += 1;
                    }
                }
            }
        }
    }
    out.finish()
}

fn encode_run(out: &mut BitWriter, state: &mut State, mut run: usize, end_of_line: bool) {
    while run >= 1 << J[state.run_index] {
        out.put(1, 1);
        run -= 1 << J[state.run_index];
        if state.run_index < 31 {
            state.run_index += 1;
        }
    }
    if end_of_line {
        if run > 0 {
            out.put(1, 1);
        }
    } else {
        out.put(0, 1);
        out.put(run as u32, J[state.run_index]);
    }
}

fn encode_interruption(out: &mut BitWriter, state: &mut State, nb: Neighbors, ix: i32) {
    let kind = (nb.a == nb.b) as usize;
    let err = if kind == 1 {
        ix - nb.a
    } else if nb.a > nb.b {
        nb.b - ix
    } else {
        ix - nb.b
    };
    let err = modulo_reduce(err);
    let limit = LIMIT - J[state.run_index] - 1;
    let ctx = &mut state.run[kind];
    let k = ctx.golomb_k();
    let em = 2 * err.abs() - ctx.kind - ctx.map_bit(err, k);
    put_golomb(out, em, k, limit);
    ctx.update(err, em);
    state.run_index = state.run_index.saturating_sub(1);
}

/// Exact inverse of [`encode_plane`] for a `width` x `height` plane.
pub fn decode_plane(stream: &[u8], width: usize, height: usize) -> Result<CodecPlane> {
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage);
    }
    let w = width;
    let mut s = vec![0u8; width * height];
    let mut state = State::new();
    let mut r = BitReader::new(stream);
    for y in 0..height {
        let mut x = 0;
        while x < w {
            let nb = neighbors(&s, w, x, y);
            match context_of(nb) {
                Some((q, sign)) => {
                    let ctx = &mut state.regular[q];
                    let px = corrected_prediction(nb, ctx, sign);
                    let k = ctx.golomb_k();
                    let m = get_golomb(&mut r, k, LIMIT)?;
                    if m > 255 {
                        return Err(Error::CorruptStream("residual out of range"));
                    }
                    let err = unmap_regular(m, k, ctx);
                    ctx.update(err);
                    s[y * w + x] = wrap_sample(px + sign * err);
                    x += 1;
                }
                None => {
                    let run_value = nb.a as u8;
                    let run = decode_run(&mut r, &mut state, w - x)?;
                    s[y * w + x..y * w + x + run].fill(run_value);
                    x += run;
                    if x < w {
                        let nb = neighbors(&s, w, x, y);
                        s[y * w + x] = decode_interruption(&mut r, &mut state, nb)?;
                        x += 1;
                    }
                }
            }
        }
    }
    if r.unread_bytes() > 0 {
        return Err(Error::CorruptStream("trailing bytes after plane"));
    }
    CodecPlane::new(width, height, s)
}

fn decode_run(r: &mut BitReader, state: &mut State, remaining: usize) -> Result<usize> {
    let mut run = 0;
    while run < remaining && r.bit()? == 1 {
        let segment = 1usize << J[state.run_index];
        let take = segment.min(remaining - run);
        run += take;
        if take == segment && state.run_index < 31 {
            state.run_index += 1;
        }
    }
    if run < remaining {
        // The terminating zero has been read; the partial length follows.
        let partial = r.bits(J[state.run_index])? as usize;
        if run + partial >= remaining {
            return Err(Error::CorruptStream("run overruns the line"));
        }
        run += partial;
    }
    Ok(run)
}

fn decode_interruption(r: &mut BitReader, state: &mut State, nb: Neighbors) -> Result<u8> {
    let kind = (nb.a == nb.b) as usize;
    let limit = LIMIT - J[state.run_index] - 1;
    let ctx = &mut state.run[kind];
    let k = ctx.golomb_k();
    let em = get_golomb(r, k, limit)?;
    if em > 256 {
        return Err(Error::CorruptStream("residual out of range"));
    }
    let err = ctx.unmap(em, k);
    ctx.update(err, em);
    state.run_index = state.run_index.saturating_sub(1);
    let value = if kind == 1 {
        nb.a + err
    } else if nb.a > nb.b {
        nb.b - err
    } else {
        nb.b + err
    };
    Ok(wrap_sample(value))
}

/// Container: `magic width height plane_count` (little-endian u32s), then
/// each plane as a u32 byte length and its stream.
pub fn encode_image(image: &RgbImage) -> Vec<u8> {
    let streams = plane_streams(image);
    let mut out = Vec::with_capacity(16 + streams.iter().map(|s| s.len() + 4).sum::<usize>());
    out.extend_from_slice(&CONTAINER_MAGIC);
    out.extend_from_slice(&(image.width() as u32).to_le_bytes());
    out.extend_from_slice(&(image.height() as u32).to_le_bytes());
    out.extend_from_slice(&(streams.len() as u32).to_le_bytes());
    for s in &streams {
        out.extend_from_slice(&(s.len() as u32).to_le_bytes());
        out.extend_from_slice(s);
    }
    out
}

fn read_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
        .ok_or(Error::CorruptStream("truncated container"))
}

pub fn decode_image(bytes: &[u8]) -> Result<RgbImage> {
    if bytes.len() < 16 || bytes[..4] != CONTAINER_MAGIC {
        return Err(Error::CorruptStream("missing container header"));
    }
    let width = read_u32(bytes, 4)? as usize;
    let height = read_u32(bytes, 8)? as usize;
    if read_u32(bytes, 12)? != 3 {
        return Err(Error::CorruptStream("expected three planes"));
    }
    let mut at = 16;
    let mut planes = Vec::with_capacity(3);
    for _ in 0..3 {
        let len = read_u32(bytes, at)? as usize;
        at += 4;
        let stream = bytes
            .get(at..at + len)
            .ok_or(Error::CorruptStream("truncated plane"))?;
        planes.push(decode_plane(stream, width, height)?.samples);
        at += len;
    }
    if at != bytes.len() {
        return Err(Error::CorruptStream("trailing bytes after container"));
    }
    RgbImage::from_planes(width, height, [&planes[0], &planes[1], &planes[2]])
}

fn plane_streams(image: &RgbImage) -> Vec<Vec<u8>> {
    use rayon::prelude::*;
    Channel::ALL
        .par_iter()
        .map(|&c| {
            let plane = CodecPlane::new(image.width(), image.height(), image.plane(c))
                .expect("image dimensions are valid");
            encode_plane(&plane)
        })
        .collect()
}

/// Compressed bits per pixel with R, G and B coded independently.
pub fn bitrate(image: &RgbImage) -> f64 {
    let bytes: usize = plane_streams(image).iter().map(Vec::len).sum();
    (bytes * 8) as f64 / image.pixel_count() as f64
}
