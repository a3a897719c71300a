//! Cantor pairing and its left-folded iterates.

use crate::fock::Occupation;

/// `(l + l2)(l + l2 + 1) / 2 + l2`. Panics on `u64` overflow.
pub fn cantor_pair(l: u64, l2: u64) -> u64 {
    checked_cantor_pair(l, l2).expect("pairing overflow")
}

/// Inverse of [`cantor_pair`].
pub fn cantor_unpair(x: u64) -> (u64, u64) {
    let tri = |w: u64| w * (w + 1) / 2;
    let mut w = ((((x as f64) * 8.0 + 1.0).sqrt() - 1.0) / 2.0) as u64;
    while tri(w) > x {
        w -= 1;
    }
    while tri(w + 1) <= x {
        w += 1;
    }
    let l2 = x - tri(w);
    (w - l2, l2)
}

/// [`cantor_pair`] returning `None` on `u64` overflow.
pub fn checked_cantor_pair(l: u64, l2: u64) -> Option<u64> {
    let s = l.checked_add(l2)?;
    Some(s.checked_mul(s.checked_add(1)?)? / 2 + l2)
}

/// `pair_m(a, b, c) = pair(pair(a, b), c)`; the empty vector maps to `0`.
/// Panics on `u64` overflow.
pub fn pair_m(v: &[u32]) -> u64 {
    checked_pair_m(v).expect("pairing overflow")
}

/// [`pair_m`] returning `None` on `u64` overflow.
pub fn checked_pair_m(v: &[u32]) -> Option<u64> {
    match v {
        [] => Some(0),
        [x] => Some(u64::from(*x)),
        [rest @ .., last] => checked_cantor_pair(checked_pair_m(rest)?, u64::from(*last)),
    }
}

/// Inverse of [`pair_m`] on `m` components. For `m = 0` only `0` has a
/// preimage; every `x` maps to the empty vector.
pub fn unpair_m(x: u64, m: usize) -> Occupation {
    let mut out = vec![0u32; m];
    let mut rest = x;
    for slot in (1..m).rev() {
        let (a, b) = cantor_unpair(rest);
        out[slot] = u32::try_from(b).expect("occupation fits in u32");
        rest = a;
    }
    if m > 0 {
        out[0] = u32::try_from(rest).expect("occupation fits in u32");
    }
    Occupation(out)
}
