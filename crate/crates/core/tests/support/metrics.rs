//! Set and count-vector similarity computed from first principles.

/// Lowercased maximal runs of alphanumeric or `_` characters.
pub fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '_'))
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Every window of `n` consecutive words, in order, with repeats.
pub fn windows(words: &[String], n: usize) -> Vec<Vec<String>> {
    if words.len() < n {
        return Vec::new();
    }
    (0..=words.len() - n).map(|i| words[i..i + n].to_vec()).collect()
}

/// (gram, count) pairs found by scanning, in first-seen order.
pub fn counts(grams: &[Vec<String>]) -> Vec<(Vec<String>, u64)> {
    let mut out: Vec<(Vec<String>, u64)> = Vec::new();
    for g in grams {
        match out.iter_mut().find(|(h, _)| h == g) {
            Some((_, c)) => *c += 1,
            None => out.push((g.clone(), 1)),
        }
    }
    out
}

fn count_of(c: &[(Vec<String>, u64)], g: &[String]) -> u64 {
    c.iter().find(|(h, _)| h.as_slice() == g).map_or(0, |(_, k)| *k)
}

/// Jaccard and Dice over gram sets, cosine and block distance over counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Jaccard,
    Dice,
    Cosine,
    Block,
}

/// Gram counts of one window list, built once and compared many times.
pub struct Profile {
    counts: Vec<(Vec<String>, u64)>,
    total: u64,
}

impl Profile {
    pub fn new(grams: &[Vec<String>]) -> Self {
        Profile {
            counts: counts(grams),
            total: grams.len() as u64,
        }
    }
}

/// Similarity of two window lists of the same order.
pub fn similarity(kind: Kind, a: &[Vec<String>], b: &[Vec<String>]) -> f64 {
    profile_similarity(kind, &Profile::new(a), &Profile::new(b))
}

pub fn profile_similarity(kind: Kind, a: &Profile, b: &Profile) -> f64 {
    match (a.total == 0, b.total == 0) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let (ca, cb) = (&a.counts, &b.counts);
    let shared = ca.iter().filter(|(g, _)| count_of(cb, g) > 0).count() as u64;
    let (da, db) = (ca.len() as u64, cb.len() as u64);
    match kind {
        Kind::Jaccard => shared as f64 / (da + db - shared) as f64,
        Kind::Dice => (2 * shared) as f64 / (da + db) as f64,
        Kind::Cosine => {
            let dot: u64 = ca.iter().map(|(g, k)| k * count_of(cb, g)).sum();
            let na: u64 = ca.iter().map(|(_, k)| k * k).sum();
            let nb: u64 = cb.iter().map(|(_, k)| k * k).sum();
            dot as f64 / ((na as f64) * (nb as f64)).sqrt()
        }
        Kind::Block => {
            let mut keys: Vec<&Vec<String>> = ca.iter().map(|(g, _)| g).collect();
            keys.extend(cb.iter().map(|(g, _)| g).filter(|g| count_of(ca, g) == 0));
            let l1: u64 = keys.iter().map(|g| count_of(ca, g).abs_diff(count_of(cb, g))).sum();
            let total = a.total + b.total;
            (total - l1) as f64 / total as f64
        }
    }
}

/// `(2·s1 + s2) / 3` style weighted score over orders 1 to 3.
pub fn weighted(kind: Kind, s1: &str, s2: &str, weights: [f64; 3]) -> f64 {
    let (a, b) = (words(s1), words(s2));
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, w) in weights.iter().enumerate() {
        if *w > 0.0 {
            num += w * similarity(kind, &windows(&a, i + 1), &windows(&b, i + 1));
            den += w;
        }
    }
    num / den
}
