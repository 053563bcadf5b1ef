//! The eight rotation/reflection symmetries of a square tile.
//!
//! Element `r + 4 * m` means: rotate `r` quarter turns clockwise, then mirror
//! left-right if `m == 1`. Coordinates are image coordinates (x right, y
//! down).

use crate::model::Flip;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dihedral(u8);

// Integer matrices acting on (dx, dy), indexed like the elements.
const MATRICES: [[i32; 4]; 8] = build_matrices();

const fn mul(a: [i32; 4], b: [i32; 4]) -> [i32; 4] {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

const ROT_CW: [i32; 4] = [0, -1, 1, 0];
const MIRROR_X: [i32; 4] = [-1, 0, 0, 1];
const MIRROR_Y: [i32; 4] = [1, 0, 0, -1];

const fn build_matrices() -> [[i32; 4]; 8] {
    let mut out = [[0; 4]; 8];
    let mut rot = [1, 0, 0, 1];
    let mut r = 0;
    while r < 4 {
        out[r] = rot;
        out[r + 4] = mul(MIRROR_X, rot);
        rot = mul(ROT_CW, rot);
        r += 1;
    }
    out
}

fn from_matrix(m: [i32; 4]) -> Dihedral {
    let idx = MATRICES
        .iter()
        .position(|&x| x == m)
        .expect("closed under composition");
    Dihedral(idx as u8)
}

impl Dihedral {
    pub const IDENTITY: Dihedral = Dihedral(0);

    pub fn all() -> impl Iterator<Item = Dihedral> {
        (0..8).map(Dihedral)
    }

    pub fn from_index(i: u8) -> Option<Self> {
        (i < 8).then_some(Dihedral(i))
    }

    pub fn index(self) -> u8 {
        self.0
    }

    /// `quarter_turns` clockwise rotations.
    pub fn rotation(quarter_turns: u8) -> Self {
        Dihedral(quarter_turns % 4)
    }

    /// Rotation by `quarter_turns` clockwise followed by `flip`.
    pub fn from_rotate_flip(quarter_turns: u8, flip: Flip) -> Self {
        let rot = MATRICES[(quarter_turns % 4) as usize];
        let m = match flip {
            Flip::None => rot,
            Flip::Horizontal => mul(MIRROR_X, rot),
            Flip::Vertical => mul(MIRROR_Y, rot),
            Flip::Both => mul(MIRROR_X, mul(MIRROR_Y, rot)),
        };
        from_matrix(m)
    }

    pub fn quarter_turns(self) -> u8 {
        self.0 % 4
    }

    pub fn is_reflection(self) -> bool {
        self.0 >= 4
    }

    /// `self` applied first, then `next`.
    pub fn then(self, next: Dihedral) -> Dihedral {
        from_matrix(mul(MATRICES[next.0 as usize], MATRICES[self.0 as usize]))
    }

    pub fn inverse(self) -> Dihedral {
        let m = MATRICES[self.0 as usize];
        // Orthogonal: inverse is the transpose.
        from_matrix([m[0], m[2], m[1], m[3]])
    }

    /// Image of a displacement under this transform.
    pub fn map_vector(self, (dx, dy): (i32, i32)) -> (i32, i32) {
        let m = MATRICES[self.0 as usize];
        (m[0] * dx + m[1] * dy, m[2] * dx + m[3] * dy)
    }

    /// Transforms a square `size` x `size` row-major tile.
    pub fn apply(self, tile: &[u8], size: usize) -> Vec<u8> {
        let mut out = vec![0u8; tile.len()];
        self.apply_into(tile, size, &mut out);
        out
    }

    pub fn apply_into(self, tile: &[u8], size: usize, out: &mut [u8]) {
        debug_assert_eq!(tile.len(), size * size);
        if self.0 == 0 {
            out.copy_from_slice(tile);
            return;
        }
        let n = size as i32 - 1;
        for y in 0..size {
            for x in 0..size {
                // Doubled, centered coordinates keep the map integral.
                let (u, v) = self.map_vector((2 * x as i32 - n, 2 * y as i32 - n));
                let (x2, y2) = (((u + n) / 2) as usize, ((v + n) / 2) as usize);
                out[y2 * size + x2] = tile[y * size + x];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FLIPS: [Flip; 4] = [Flip::None, Flip::Horizontal, Flip::Vertical, Flip::Both];

    #[test]
    fn clockwise_quarter_turn() {
        let t = [1, 2, 3, 4];
        assert_eq!(Dihedral::rotation(1).apply(&t, 2), vec![3, 1, 4, 2]);
        assert_eq!(Dihedral::rotation(0).apply(&t, 2), t.to_vec());
    }

    #[test]
    fn flips() {
        let t = [1, 2, 3, 4];
        let h = Dihedral::from_rotate_flip(0, Flip::Horizontal);
        let v = Dihedral::from_rotate_flip(0, Flip::Vertical);
        assert_eq!(h.apply(&t, 2), vec![2, 1, 4, 3]);
        assert_eq!(v.apply(&t, 2), vec![3, 4, 1, 2]);
    }

    #[test]
    fn sixteen_combinations_fold_to_eight() {
        // Asymmetric 3x3 tile: every symmetry gives a distinct result.
        let tile: Vec<u8> = (1..=9).collect();
        let mut distinct = std::collections::HashSet::new();
        for r in 0..4 {
            for f in FLIPS {
                // Reference: rotate r times, then flip, done on the raw tile.
                let mut t = tile.clone();
                for _ in 0..r {
                    t = (0..9).map(|i| t[(2 - i % 3) * 3 + i / 3]).collect();
                }
                let t: Vec<u8> = match f {
                    Flip::None => t,
                    Flip::Horizontal => (0..9).map(|i| t[(i / 3) * 3 + 2 - i % 3]).collect(),
                    Flip::Vertical => (0..9).map(|i| t[(2 - i / 3) * 3 + i % 3]).collect(),
                    Flip::Both => (0..9).map(|i| t[8 - i]).collect(),
                };
                assert_eq!(Dihedral::from_rotate_flip(r, f).apply(&tile, 3), t);
                distinct.insert(t);
            }
        }
        assert_eq!(distinct.len(), 8);
        assert_eq!(
            Dihedral::from_rotate_flip(2, Flip::Both),
            Dihedral::from_rotate_flip(0, Flip::None)
        );
    }

    #[test]
    fn group_laws() {
        let tile: Vec<u8> = (0..16).collect();
        for a in Dihedral::all() {
            assert_eq!(a.then(a.inverse()), Dihedral::IDENTITY);
            assert_eq!(a.inverse().apply(&a.apply(&tile, 4), 4), tile);
            for b in Dihedral::all() {
                assert_eq!(a.then(b).apply(&tile, 4), b.apply(&a.apply(&tile, 4), 4));
            }
        }
    }

    #[test]
    fn vector_map_matches_tile_map() {
        // A marker moved right by one must land where map_vector says.
        for d in Dihedral::all() {
            let mut a = vec![0u8; 9];
            let mut b = vec![0u8; 9];
            a[4] = 1; // center
            b[5] = 1; // center + (1, 0)
            let (ta, tb) = (d.apply(&a, 3), d.apply(&b, 3));
            let pa = ta.iter().position(|&v| v == 1).unwrap() as i32;
            let pb = tb.iter().position(|&v| v == 1).unwrap() as i32;
            let delta = (pb % 3 - pa % 3, pb / 3 - pa / 3);
            assert_eq!(d.map_vector((1, 0)), delta);
        }
    }
}
