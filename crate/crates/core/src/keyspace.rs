//! Exact key-space sizes for both key regimes.
//!
//! | process            | conventional | proposed   |
//! |--------------------|--------------|------------|
//! | positions `n_p`    | `L!`         | `(L!)^3`   |
//! | rotate/flip `n_d`  | `8^L`        | `512^L`    |
//! | neg-pos `n_n`      | `2^L`        | `8^L`      |
//! | color `n_c`        | `6^L`        | `6^L`      |

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Pow};

use crate::error::{Error, Result};
use crate::model::Mode;

#[derive(Debug, Clone, PartialEq)]
pub struct KeySpaceReport {
    pub mode: Mode,
    pub blocks: u64,
    pub n_p: BigUint,
    pub n_d: BigUint,
    pub n_n: BigUint,
    pub n_c: BigUint,
    pub n_a: BigUint,
    /// `log2(n_a)`, summed term by term rather than taken from `n_a`.
    pub log2_n_a: f64,
}

fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, k| acc * k)
}

fn log2_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).log2()).sum()
}

fn power(base: u32, exp: u64) -> BigUint {
    Pow::pow(BigUint::from(base), exp)
}

fn check(blocks: u64) -> Result<()> {
    if blocks == 0 {
        return Err(Error::InvalidArgument(
            "block count must be at least 1".into(),
        ));
    }
    Ok(())
}

pub fn keyspace_proposed(blocks: u64) -> Result<KeySpaceReport> {
    check(blocks)?;
    let fact = factorial(blocks);
    let n_p = &fact * &fact * &fact;
    let n_d = power(512, blocks);
    let n_n = power(8, blocks);
    let n_c = power(6, blocks);
    let n_a = &n_p * &n_d * &n_n * &n_c;
    let l = blocks as f64;
    let log2_n_a = 3.0 * log2_factorial(blocks) + 9.0 * l + 3.0 * l + l * 6f64.log2();
    Ok(KeySpaceReport {
        mode: Mode::Proposed,
        blocks,
        n_p,
        n_d,
        n_n,
        n_c,
        n_a,
        log2_n_a,
    })
}

pub fn keyspace_conventional(blocks: u64) -> Result<KeySpaceReport> {
    check(blocks)?;
    let n_p = factorial(blocks);
    let n_d = power(8, blocks);
    let n_n = power(2, blocks);
    let n_c = power(6, blocks);
    let n_a = &n_p * &n_d * &n_n * &n_c;
    let l = blocks as f64;
    let log2_n_a = log2_factorial(blocks) + 3.0 * l + l + l * 6f64.log2();
    Ok(KeySpaceReport {
        mode: Mode::Conventional,
        blocks,
        n_p,
        n_d,
        n_n,
        n_c,
        n_a,
        log2_n_a,
    })
}

pub fn keyspace(mode: Mode, blocks: u64) -> Result<KeySpaceReport> {
    match mode {
        Mode::Conventional => keyspace_conventional(blocks),
        Mode::Proposed => keyspace_proposed(blocks),
    }
}

/// `key=value` lines: exact decimal integers, log2 to six places.
impl fmt::Display for KeySpaceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mode={}", self.mode.name())?;
        writeln!(f, "L={}", self.blocks)?;
        writeln!(f, "n_p={}", self.n_p)?;
        writeln!(f, "n_d={}", self.n_d)?;
        writeln!(f, "n_n={}", self.n_n)?;
        writeln!(f, "n_c={}", self.n_c)?;
        writeln!(f, "n_a={}", self.n_a)?;
        writeln!(f, "log2_n_a={:.6}", self.log2_n_a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(keyspace_proposed(1).unwrap().n_a, BigUint::from(24_576u32));
        assert_eq!(
            keyspace_proposed(2).unwrap().n_a,
            BigUint::from(4_831_838_208u64)
        );
        assert_eq!(keyspace_conventional(1).unwrap().n_a, BigUint::from(96u32));
        assert_eq!(
            keyspace_conventional(2).unwrap().n_a,
            BigUint::from(18_432u32)
        );
    }

    #[test]
    fn ratio_at_two_blocks() {
        let p = keyspace_proposed(2).unwrap().n_a;
        let c = keyspace_conventional(2).unwrap().n_a;
        assert_eq!(&p % &c, BigUint::from(0u32));
        assert_eq!(p / c, BigUint::from(262_144u32));
    }

    #[test]
    fn zero_blocks_rejected() {
        assert!(keyspace_proposed(0).is_err());
        assert!(keyspace_conventional(0).is_err());
    }

    #[test]
    fn strictly_increasing() {
        for mode in [Mode::Conventional, Mode::Proposed] {
            let mut prev = BigUint::from(0u32);
            for l in 1..=64 {
                let r = keyspace(mode, l).unwrap();
                assert!(r.n_a > prev);
                prev = r.n_a;
            }
        }
    }

    #[test]
    fn report_text() {
        let text = keyspace_conventional(2).unwrap().to_string();
        assert_eq!(
            text,
            "mode=conventional\nL=2\nn_p=2\nn_d=64\nn_n=4\nn_c=36\nn_a=18432\nlog2_n_a=14.169925\n"
        );
    }
}
