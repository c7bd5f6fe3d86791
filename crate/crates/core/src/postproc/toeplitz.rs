//! Toeplitz-matrix universal hashing over GF(2).
//!
//! The `out_len x n` matrix has `T[i][j] = seed[i + n - 1 - j]`, so it is
//! constant along diagonals and fully determined by `n + out_len - 1` seed
//! bits. Output bit `i` is the parity of the key ANDed with row `i`.

use crate::bits::BitString;
use crate::error::{QkdError, Result};

pub fn toeplitz_amplify(key: &BitString, seed: &BitString, out_len: usize) -> Result<BitString> {
    let n = key.len();
    if out_len > n {
        return Err(QkdError::Parameter(format!(
            "output length {out_len} exceeds key length {n}"
        )));
    }
    if out_len == 0 {
        return Ok(BitString::new());
    }
    if seed.len() != n + out_len - 1 {
        return Err(QkdError::Parameter(format!(
            "seed must have {} bits, got {}",
            n + out_len - 1,
            seed.len()
        )));
    }
    // Row i is the window rev[out_len - 1 - i .. out_len - 1 - i + n] of the
    // reversed seed, so each row is a shifted read of one packed word array.
    let rev: BitString = seed.as_slice().iter().rev().copied().collect();
    let rev_words = rev.to_words();
    let key_words = key.to_words();
    let last_mask = match n % 64 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    };

    let window_word = |start: usize, w: usize| -> u64 {
        let bit = start + 64 * w;
        let (word, shift) = (bit / 64, bit % 64);
        let lo = rev_words.get(word).copied().unwrap_or(0) >> shift;
        if shift == 0 {
            lo
        } else {
            lo | rev_words.get(word + 1).copied().unwrap_or(0) << (64 - shift)
        }
    };

    Ok((0..out_len)
        .map(|i| {
            let start = out_len - 1 - i;
            let mut acc = 0u64;
            for (w, &kw) in key_words.iter().enumerate() {
                let mut row = window_word(start, w);
                if w + 1 == key_words.len() {
                    row &= last_mask;
                }
                acc ^= row & kw;
            }
            acc.count_ones() % 2 == 1
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::master_stream;
    use proptest::prelude::*;
    use rand::Rng;

    /// Straight matrix-vector product over GF(2) from the definition.
    fn naive(key: &BitString, seed: &BitString, out_len: usize) -> BitString {
        let n = key.len();
        (0..out_len)
            .map(|i| (0..n).fold(false, |acc, j| acc ^ (seed[i + n - 1 - j] & key[j])))
            .collect()
    }

    fn random_bits(len: usize, rng: &mut impl Rng) -> BitString {
        (0..len).map(|_| rng.random::<bool>()).collect()
    }

    #[test]
    fn fixed_fixture() {
        let key: BitString = "len:8;hex:b5".parse().unwrap();
        let seed: BitString = "len:15;hex:6c39".parse().unwrap();
        // computed independently with a Python GF(2) matrix product
        let expected: BitString = "len:8;hex:a3".parse().unwrap();
        assert_eq!(naive(&key, &seed, 8), expected);
        assert_eq!(toeplitz_amplify(&key, &seed, 8).unwrap(), expected);
    }

    #[test]
    fn zero_key_hashes_to_zero() {
        let mut rng = master_stream(1);
        let seed = random_bits(300 + 99, &mut rng);
        let out = toeplitz_amplify(&BitString::zeros(300), &seed, 100).unwrap();
        assert_eq!(out, BitString::zeros(100));
    }

    #[test]
    fn length_checks() {
        let key = BitString::zeros(10);
        assert!(toeplitz_amplify(&key, &BitString::zeros(20), 11).is_err());
        assert!(toeplitz_amplify(&key, &BitString::zeros(13), 5).is_err());
        assert!(toeplitz_amplify(&key, &BitString::zeros(14), 5).is_ok());
    }

    #[test]
    fn output_bits_are_unbiased_over_seeds() {
        let mut rng = master_stream(8);
        let key = random_bits(40, &mut rng);
        let out_len = 8;
        let trials = 100_000;
        let mut ones = [0usize; 8];
        for _ in 0..trials {
            let seed = random_bits(40 + out_len - 1, &mut rng);
            for (i, b) in toeplitz_amplify(&key, &seed, out_len).unwrap().iter().enumerate() {
                ones[i] += b as usize;
            }
        }
        let sigma = (0.25 / trials as f64).sqrt();
        for c in ones {
            assert!((c as f64 / trials as f64 - 0.5).abs() < 4.0 * sigma, "{ones:?}");
        }
    }

    proptest! {
        #[test]
        fn matches_naive_product(n in 1usize..200, m_frac in 0.0f64..1.0, seed in any::<u64>()) {
            let mut rng = master_stream(seed);
            let m = ((n as f64 * m_frac) as usize).max(1);
            let key = random_bits(n, &mut rng);
            let s = random_bits(n + m - 1, &mut rng);
            prop_assert_eq!(toeplitz_amplify(&key, &s, m).unwrap(), naive(&key, &s, m));
        }

        #[test]
        fn linear_over_gf2(n in 1usize..300, seed in any::<u64>()) {
            let mut rng = master_stream(seed);
            let m = n / 2 + 1;
            let a = random_bits(n, &mut rng);
            let b = random_bits(n, &mut rng);
            let s = random_bits(n + m - 1, &mut rng);
            let lhs = toeplitz_amplify(&(&a ^ &b), &s, m).unwrap();
            let rhs = &toeplitz_amplify(&a, &s, m).unwrap() ^ &toeplitz_amplify(&b, &s, m).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
