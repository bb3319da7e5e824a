//! Small text helpers shared across modules.

/// Number of whitespace-separated tokens. This is the token measure used
/// for every budget in the engine.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Longest prefix of `text` holding at most `max_tokens` whitespace tokens,
/// with trailing whitespace dropped. Returns the whole (trimmed) text when it
/// already fits.
pub fn token_prefix(text: &str, max_tokens: usize) -> &str {
    if max_tokens == 0 {
        return "";
    }
    let mut seen = 0;
    let mut in_token = false;
    for (i, ch) in text.char_indices() {
        if ch.is_whitespace() {
            if in_token {
                in_token = false;
                seen += 1;
                if seen == max_tokens {
                    return &text[..i];
                }
            }
        } else {
            in_token = true;
        }
    }
    text.trim_end()
}

/// 64-bit FNV-1a. Used wherever a hash must stay stable across builds and
/// platforms (feature hashing, seeds derived from strings).
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Derive a sub-seed from a root seed and a label.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut buf = seed.to_le_bytes().to_vec();
    buf.extend_from_slice(label.as_bytes());
    fnv1a64(&buf)
}
