//! Fixtures shared by the benchmarks.

use proxima_core::format::demo;
use proxima_core::typicality::find_typical_pair;
use proxima_core::{TypicalityCertificate, WindowCocycle, Word, DEFAULT_TOL};

/// A demo cocycle with its first passing certificate.
pub fn certified(name: &str) -> (WindowCocycle, TypicalityCertificate) {
    let a = demo(name).expect("known demo");
    let cert = find_typical_pair(&a, 4, DEFAULT_TOL).expect("search runs").expect("demo is typical");
    (a, cert)
}

/// A fixed aperiodic-looking binary word (Thue–Morse) of length `n`.
pub fn thue_morse(n: usize) -> Word {
    Word((0..n).map(|i| (i.count_ones() % 2) as u8).collect())
}

/// Thue–Morse with every `1` followed by a `0`, admissible for the golden
/// mean shift; truncated to length `n`.
pub fn golden_word(n: usize) -> Word {
    let mut w = Vec::with_capacity(n + 1);
    for s in thue_morse(n).0 {
        w.push(s);
        if s == 1 {
            w.push(0);
        }
        if w.len() >= n {
            break;
        }
    }
    w.truncate(n);
    Word(w)
}
