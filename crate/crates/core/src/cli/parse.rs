//! Value parsers for list-valued flags.

use rcs_lab::circuit::parse_bits;
use std::f64::consts::PI;

/// `0.3`, `pi`, `pi/4`, `3pi/4`, `-pi/2`, `2*pi/3`.
pub fn angle(s: &str) -> Result<f64, String> {
    let t = s.trim().replace('*', "");
    let Some(pos) = t.find("pi") else {
        return t.parse::<f64>().map_err(|_| format!("bad angle `{s}`"));
    };
    let (head, tail) = (&t[..pos], &t[pos + 2..]);
    let coef = match head {
        "" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| format!("bad angle `{s}`"))?,
    };
    let den = match tail.strip_prefix('/') {
        None if tail.is_empty() => 1.0,
        None => return Err(format!("bad angle `{s}`")),
        Some(d) => d.parse::<f64>().map_err(|_| format!("bad angle `{s}`"))?,
    };
    if den == 0.0 {
        return Err(format!("bad angle `{s}`"));
    }
    Ok(coef * PI / den)
}

/// `θ:bits`, e.g. `pi/4:1011` (qubit 0 leftmost).
pub fn phase_gate(s: &str) -> Result<(f64, u64, usize), String> {
    let (a, bits) = s
        .split_once(':')
        .ok_or_else(|| format!("phase gate `{s}` is not θ:bits"))?;
    let mask = parse_bits(bits).map_err(|e| e.to_string())?;
    Ok((angle(a)?, mask, bits.len()))
}

/// `a-b`.
pub fn pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once('-')
        .ok_or_else(|| format!("pair `{s}` is not a-b"))?;
    let p = |x: &str| {
        x.trim()
            .parse::<usize>()
            .map_err(|_| format!("bad index in `{s}`"))
    };
    Ok((p(a)?, p(b)?))
}

/// Comma-separated pairs; empty string is an empty list.
pub fn pairs(s: &str) -> Result<Vec<(usize, usize)>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(pair)
        .collect()
}
