//! Seeded pseudo-random generator with a pinned algorithm.
//!
//! The simulator's reproducibility contract is that one seed yields one event
//! log on every platform and in every implementation of this tool, so the
//! generator is spelled out rather than borrowed from a library:
//!
//! * State expansion: four rounds of SplitMix64 over the user seed.
//! * Stream: xoshiro256++ (Blackman & Vigna), 64-bit outputs.
//! * Uniform doubles: top 53 bits scaled by 2^-53, giving values in [0, 1).
//! * Exponential variates by inversion: `-mean * ln(1 - u)`.
//! * Poisson variates by Knuth's product-of-uniforms method, which is exact
//!   and adequate for the per-day rates the simulator uses.
//!
//! Draw order is part of the contract: callers must consume variates in a
//! fixed sequence.

/// xoshiro256++ generator.
#[derive(Debug, Clone)]
pub struct Rng {
    state: [u64; 4],
}

fn splitmix64(x: &mut u64) -> u64 {
    *x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Rng {
    pub fn seed_from(seed: u64) -> Self {
        let mut x = seed;
        Rng {
            state: [
                splitmix64(&mut x),
                splitmix64(&mut x),
                splitmix64(&mut x),
                splitmix64(&mut x),
            ],
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[0]
            .wrapping_add(s[3])
            .rotate_left(23)
            .wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, n). `n` must be non-zero.
    pub fn next_below(&mut self, n: u64) -> u64 {
        // Multiply-shift bounded draw; the bias for n << 2^64 is far below
        // anything observable at simulation scale.
        ((u128::from(self.next_u64()) * u128::from(n)) >> 64) as u64
    }

    /// Exponential variate with the given mean (0 when mean <= 0).
    pub fn next_exponential(&mut self, mean: f64) -> f64 {
        if mean <= 0.0 {
            return 0.0;
        }
        -mean * libm::log(1.0 - self.next_f64())
    }

    /// Poisson variate with rate `lambda` (0 when lambda <= 0).
    pub fn next_poisson(&mut self, lambda: f64) -> u64 {
        if lambda <= 0.0 {
            return 0;
        }
        // Knuth: count uniforms until their product drops below e^-lambda.
        // Split large rates so the threshold stays representable.
        let mut remaining = lambda;
        let mut count: u64 = 0;
        while remaining > 0.0 {
            let step = if remaining > 500.0 { 500.0 } else { remaining };
            let threshold = libm::exp(-step);
            let mut product = self.next_f64();
            while product > threshold {
                count += 1;
                product *= self.next_f64();
            }
            remaining -= step;
        }
        count
    }
}
