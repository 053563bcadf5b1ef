//! Human-readable key files.
//!
//! ```text
//! mode = "proposed"
//! K1R = "9e3779b97f4a7c15"
//! ...
//! K5 = "0123456789abcdef"
//! ```
//!
//! Proposed mode lists K1R..K4B and K5 (13 subkeys); conventional mode
//! lists K1..K5. Values are 64-bit hex, an optional `0x` prefix allowed.

use bpbe::{Channel, KeyBundle, Mode};

const PROPOSED_NAMES: [&str; 13] = [
    "K1R", "K1G", "K1B", "K2R", "K2G", "K2B", "K3R", "K3G", "K3B", "K4R", "K4G", "K4B", "K5",
];
const CONVENTIONAL_NAMES: [&str; 5] = ["K1", "K2", "K3", "K4", "K5"];

pub fn to_text(keys: &KeyBundle) -> String {
    let mut out = format!("mode = \"{}\"\n", keys.mode().name());
    let values: Vec<u64> = match keys.mode() {
        Mode::Proposed => {
            let mut v = Vec::with_capacity(13);
            for f in [
                KeyBundle::position as fn(&KeyBundle, Channel) -> u64,
                KeyBundle::rotation,
                KeyBundle::flip,
                KeyBundle::negpos,
            ] {
                v.extend(Channel::ALL.map(|c| f(keys, c)));
            }
            v.push(keys.color());
            v
        }
        Mode::Conventional => vec![
            keys.position(Channel::R),
            keys.rotation(Channel::R),
            keys.flip(Channel::R),
            keys.negpos(Channel::R),
            keys.color(),
        ],
    };
    let names: &[&str] = match keys.mode() {
        Mode::Proposed => &PROPOSED_NAMES,
        Mode::Conventional => &CONVENTIONAL_NAMES,
    };
    for (name, v) in names.iter().zip(values) {
        out.push_str(&format!("{name} = \"{v:016x}\"\n"));
    }
    out
}

fn parse_hex(name: &str, value: &toml::Value) -> Result<u64, String> {
    let s = value
        .as_str()
        .ok_or_else(|| format!("{name} must be a quoted hex string"))?;
    let digits = s.strip_prefix("0x").unwrap_or(s);
    if digits.is_empty() || digits.len() > 16 {
        return Err(format!("{name}: expected 1 to 16 hex digits"));
    }
    u64::from_str_radix(digits, 16).map_err(|e| format!("{name}: {e}"))
}

pub fn parse(text: &str) -> Result<KeyBundle, String> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| e.message().to_string())?;
    let mode: Mode = table
        .get("mode")
        .and_then(|v| v.as_str())
        .ok_or("missing mode")?
        .parse()
        .map_err(|e: bpbe::Error| e.to_string())?;
    let names: &[&str] = match mode {
        Mode::Proposed => &PROPOSED_NAMES,
        Mode::Conventional => &CONVENTIONAL_NAMES,
    };
    if let Some(extra) = table
        .keys()
        .find(|k| k.as_str() != "mode" && !names.contains(&k.as_str()))
    {
        return Err(format!("unexpected entry {extra} for {} mode", mode.name()));
    }
    let values = names
        .iter()
        .map(|&n| {
            table
                .get(n)
                .ok_or_else(|| format!("missing subkey {n}"))
                .and_then(|v| parse_hex(n, v))
        })
        .collect::<Result<Vec<u64>, String>>()?;
    Ok(match mode {
        Mode::Proposed => {
            let t = |i: usize| [values[i], values[i + 1], values[i + 2]];
            KeyBundle::proposed(t(0), t(3), t(6), t(9), values[12])
        }
        Mode::Conventional => {
            KeyBundle::conventional(values[0], values[1], values[2], values[3], values[4])
        }
    })
}
