//! Hex and base32 helpers. Kept local so the wire format has no external
//! encoding dependencies to drift against.

const BASE32_ALPHABET: &[u8; 32] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ234567";

pub(crate) fn to_hex(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

pub(crate) fn from_hex(s: &str) -> Option<Vec<u8>> {
    if !s.is_ascii() || s.len() % 2 != 0 {
        return None;
    }
    if s.bytes().any(|b| b.is_ascii_uppercase()) {
        // wire hex is lowercase only
        return None;
    }
    (0..s.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&s[i..i + 2], 16).ok())
        .collect()
}

/// RFC 4648 base32, no padding. 10-byte secrets encode to exactly 16 chars.
pub(crate) fn base32_encode(data: &[u8]) -> String {
    let mut out = String::new();
    let mut bits = 0u64;
    let mut nbits = 0u32;
    for &b in data {
        bits = (bits << 8) | u64::from(b);
        nbits += 8;
        while nbits >= 5 {
            nbits -= 5;
            out.push(BASE32_ALPHABET[((bits >> nbits) & 0x1f) as usize] as char);
        }
    }
    if nbits > 0 {
        out.push(BASE32_ALPHABET[((bits << (5 - nbits)) & 0x1f) as usize] as char);
    }
    out
}

pub(crate) fn base32_decode(s: &str) -> Option<Vec<u8>> {
    let mut bits = 0u64;
    let mut nbits = 0u32;
    let mut out = Vec::new();
    for c in s.bytes() {
        let v = BASE32_ALPHABET.iter().position(|&a| a == c)? as u64;
        bits = (bits << 5) | v;
        nbits += 5;
        if nbits >= 8 {
            nbits -= 8;
            out.push((bits >> nbits) as u8);
        }
    }
    // leftover bits must be zero padding
    if nbits > 0 && (bits & ((1 << nbits) - 1)) != 0 {
        return None;
    }
    Some(out)
}
