//! Greek numeral prefixes.

use super::NameError;

const TABLE: [&str; 20] = [
    "mono",
    "di",
    "tri",
    "tetra",
    "penta",
    "hexa",
    "hepta",
    "octo",
    "ennea",
    "deca",
    "undeca",
    "dodeca",
    "trideca",
    "tetradeca",
    "pentadeca",
    "hexadeca",
    "heptadeca",
    "octodeca",
    "enneadeca",
    "icosa",
];

/// Prefix for `n` vertices. Values above 20 use the fallback form `n<value>`.
pub fn numeral(n: usize) -> Result<String, NameError> {
    match n {
        0 => Err(NameError::NonPositive),
        1..=20 => Ok(TABLE[n - 1].to_string()),
        _ => Ok(format!("n{n}")),
    }
}

/// Numeral immediately followed by a vowel-initial suffix: a trailing `a`
/// is dropped (`penta` + `ito` is `pentito`).
pub(crate) fn elided(n: usize) -> String {
    let mut s = numeral(n).expect("callers pass n >= 1");
    if s.ends_with('a') {
        s.pop();
    }
    s
}

/// Every numeral spelling that starts `input`: `(value, bytes consumed,
/// elided)`. Longest candidates first.
pub(crate) fn candidates(input: &str) -> Vec<(usize, usize, bool)> {
    let mut out = Vec::new();
    for (i, full) in TABLE.iter().enumerate() {
        if input.starts_with(full) {
            out.push((i + 1, full.len(), false));
        }
        if let Some(short) = full.strip_suffix('a') {
            if input.starts_with(short) {
                out.push((i + 1, short.len(), true));
            }
        }
    }
    if let Some(rest) = input.strip_prefix('n') {
        let digits = rest.bytes().take_while(u8::is_ascii_digit).count();
        if digits > 0 {
            if let Ok(v) = rest[..digits].parse::<usize>() {
                if v > 20 {
                    out.push((v, 1 + digits, false));
                }
            }
        }
    }
    out.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
    out
}
