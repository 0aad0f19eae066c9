//! Reference and adversarial bit sources.
//!
//! * [`Randu`]: the multiplicative congruential generator
//!   `X' = 65539·X mod 2^31`, consumed eight bits at a time through
//!   [`randu_extract8`].
//! * Two-faced Markov sources `T(k, π)` and `T̄(k, π)`. Every block of up to
//!   `k` consecutive bits is uniformly distributed, yet the entropy rate is
//!   the binary entropy of `π`.
//! * Fair-coin bits for calibrating Type I error.
//!
//! Sampling randomness comes from ChaCha20 ([`rand_chacha::ChaCha20Rng`]),
//! which is never itself a generator under test.

use rand::distributions::{Bernoulli, Distribution as _};
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::bitstream::BitSequence;
use crate::error::{param, Error, Result};

pub const RANDU_MULTIPLIER: u64 = 65539;
pub const RANDU_MODULUS: u64 = 1 << 31;
/// Seed used for every RANDU stream unless overridden.
pub const RANDU_SEED: u32 = 1;
/// Number of outputs before an odd seed repeats.
pub const RANDU_PERIOD: u64 = 1 << 29;

pub fn randu_step(x: u32) -> u32 {
    ((RANDU_MULTIPLIER * x as u64) % RANDU_MODULUS) as u32
}

/// Top eight of the 31 state bits.
pub fn randu_extract8(x: u32) -> u8 {
    (x >> 23) as u8
}

/// RANDU generator state. Each call to [`Randu::next_state`] advances one
/// step; the seed itself is never emitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Randu {
    x: u32,
}

impl Randu {
    pub fn new(seed: u32) -> Result<Self> {
        if seed == 0 || seed as u64 >= RANDU_MODULUS {
            return param(format!("RANDU seed {seed} outside [1, 2^31)"));
        }
        Ok(Self { x: seed })
    }

    pub fn state(&self) -> u32 {
        self.x
    }

    pub fn next_state(&mut self) -> u32 {
        self.x = randu_step(self.x);
        self.x
    }

    pub fn next_byte(&mut self) -> u8 {
        randu_extract8(self.next_state())
    }

    /// Advances `steps` outputs at once using `A^steps mod 2^31`.
    pub fn skip(&mut self, steps: u64) {
        let mut base = RANDU_MULTIPLIER;
        let mut exp = steps;
        let mut factor = 1u64;
        while exp > 0 {
            if exp & 1 == 1 {
                factor = factor * base % RANDU_MODULUS;
            }
            base = base * base % RANDU_MODULUS;
            exp >>= 1;
        }
        self.x = (factor * self.x as u64 % RANDU_MODULUS) as u32;
    }

    pub fn bytes(&mut self, count: usize) -> Vec<u8> {
        (0..count).map(|_| self.next_byte()).collect()
    }

    /// `n_bits` bits from successive extracted bytes, msb-first.
    pub fn bits(&mut self, n_bits: usize) -> BitSequence {
        let bytes = self.bytes(n_bits.div_ceil(8));
        let mut seq = BitSequence::from_bytes(&bytes, Default::default());
        seq.truncate(n_bits);
        seq
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    /// `T(k, π)`
    T,
    /// `T̄(k, π)`
    TBar,
}

impl Kind {
    fn flip(self) -> Self {
        match self {
            Kind::T => Kind::TBar,
            Kind::TBar => Kind::T,
        }
    }
}

/// Largest memory the samplers accept (contexts live in a `u64`).
pub const MAX_MEMORY: u32 = 63;
/// Largest memory for which the stationary law is computed over all contexts.
pub const MAX_STATIONARY_MEMORY: u32 = 20;
/// Largest block order for exact distributions.
pub const MAX_DISTRIBUTION_ORDER: u32 = 24;
/// Memories up to this size are solved directly; larger ones iterate.
const DIRECT_SOLVE_MAX_MEMORY: u32 = 10;
const STATIONARY_TOLERANCE: f64 = 1e-12;

/// A two-faced Markov source of memory `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkovSpec {
    memory: u32,
    kind: Kind,
    pi: f64,
}

impl MarkovSpec {
    pub fn new(memory: u32, kind: Kind, pi: f64) -> Result<Self> {
        if !(1..=MAX_MEMORY).contains(&memory) {
            return param(format!("memory {memory} outside 1..={MAX_MEMORY}"));
        }
        if !(pi > 0.0 && pi < 1.0) {
            return param(format!("pi = {pi} must lie strictly between 0 and 1"));
        }
        Ok(Self { memory, kind, pi })
    }

    pub fn memory(&self) -> u32 {
        self.memory
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn pi(&self) -> f64 {
        self.pi
    }

    /// P(next = 0 | context) using the parity form: for `T`, `π` when the
    /// context holds an even number of ones and `1 − π` otherwise; `T̄` is the
    /// reverse. `context` packs the bits oldest-first into the low `k` bits.
    fn prob_zero_packed(&self, context: u64) -> f64 {
        let odd = context.count_ones() & 1 == 1;
        match (self.kind, odd) {
            (Kind::T, false) | (Kind::TBar, true) => self.pi,
            _ => 1.0 - self.pi,
        }
    }
}

/// P(next symbol = 0 | context) from the inductive definition of the
/// two-faced family. `context` lists the previous `k` symbols, oldest first.
pub fn two_faced_cond_prob(spec: &MarkovSpec, context: &[u8]) -> Result<f64> {
    if context.len() != spec.memory as usize {
        return param(format!(
            "context has {} symbols, memory is {}",
            context.len(),
            spec.memory
        ));
    }
    if context.iter().any(|&b| b > 1) {
        return param("context symbols must be 0 or 1");
    }
    Ok(recursive_prob_zero(spec.kind, spec.pi, context))
}

fn recursive_prob_zero(kind: Kind, pi: f64, context: &[u8]) -> f64 {
    match context {
        [last] => match (kind, last) {
            (Kind::T, 0) | (Kind::TBar, 1) => pi,
            _ => 1.0 - pi,
        },
        // Dropping the oldest symbol: a 0 keeps the family, a 1 switches it.
        [oldest, rest @ ..] => {
            let next = if *oldest == 0 { kind } else { kind.flip() };
            recursive_prob_zero(next, pi, rest)
        }
        [] => unreachable!("memory is at least one"),
    }
}

/// Draws `n` symbols of a two-faced source. The first `k` symbols are
/// uniform, which is the stationary law of every `k`-block.
pub fn two_faced_sample<R: Rng + ?Sized>(spec: &MarkovSpec, n: usize, rng: &mut R) -> BitSequence {
    let k = spec.memory as usize;
    let mask = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
    let zero_given_even = Bernoulli::new(spec.prob_zero_packed(0)).expect("pi in (0,1)");
    let mut bits = Vec::with_capacity(n);
    let mut context = 0u64;
    let mut ones = 0u32;
    for t in 0..n {
        let bit = if t < k {
            (rng.next_u32() & 1) as u8
        } else {
            let zero = zero_given_even.sample(rng);
            // P(0 | odd context) is the complement of P(0 | even context).
            let zero = if ones & 1 == 1 { !zero } else { zero };
            u8::from(!zero)
        };
        let dropped = if t >= k {
            ((context >> (k - 1)) & 1) as u32
        } else {
            0
        };
        context = ((context << 1) | bit as u64) & mask;
        ones = ones + bit as u32 - dropped;
        bits.push(bit);
    }
    BitSequence::from_bits(bits).expect("sampled symbols are binary")
}

/// `n` fair-coin bits.
pub fn bernoulli_sample<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> BitSequence {
    let mut bytes = vec![0u8; n.div_ceil(8)];
    rng.fill_bytes(&mut bytes);
    let mut seq = BitSequence::from_bytes(&bytes, Default::default());
    seq.truncate(n);
    seq
}

/// Probability mass over `{0,1}^d`, indexed by the word read oldest-bit-first
/// as a binary number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    order: u32,
    mass: Vec<f64>,
}

impl Distribution {
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Mass of a word given oldest symbol first.
    pub fn prob(&self, word: &[u8]) -> f64 {
        let idx = word.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        self.mass[idx]
    }

    /// Shannon entropy of the block in bits.
    pub fn entropy(&self) -> f64 {
        self.mass
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.log2())
            .sum()
    }
}

/// Stationary law of `d` consecutive symbols.
pub fn stationary_distribution(spec: &MarkovSpec, d: u32) -> Result<Distribution> {
    let k = spec.memory;
    if d == 0 {
        return param("order must be at least 1");
    }
    if d > k + 8 || d > MAX_DISTRIBUTION_ORDER {
        return Err(Error::Resource(format!(
            "order {d} exceeds min(k + 8, {MAX_DISTRIBUTION_ORDER}) for k = {k}"
        )));
    }
    if k > MAX_STATIONARY_MEMORY {
        return Err(Error::Resource(format!(
            "memory {k} exceeds {MAX_STATIONARY_MEMORY} for exact stationary laws"
        )));
    }
    let contexts = context_stationary(spec)?;
    let mass = if d <= k {
        // Sum out the newest k - d symbols.
        let drop = k - d;
        let mut mass = vec![0.0; 1 << d];
        for (ctx, &p) in contexts.iter().enumerate() {
            mass[ctx >> drop] += p;
        }
        mass
    } else {
        let mut mass = contexts;
        let mask = (1u64 << k) - 1;
        for _ in k..d {
            let mut next = vec![0.0; mass.len() * 2];
            for (word, &p) in mass.iter().enumerate() {
                let p0 = spec.prob_zero_packed(word as u64 & mask);
                next[word << 1] = p * p0;
                next[(word << 1) | 1] = p * (1.0 - p0);
            }
            mass = next;
        }
        mass
    };
    Ok(Distribution { order: d, mass })
}

/// Stationary probabilities of the `2^k` contexts.
fn context_stationary(spec: &MarkovSpec) -> Result<Vec<f64>> {
    let k = spec.memory;
    let n = 1usize << k;
    let mask = n - 1;
    if k <= DIRECT_SOLVE_MAX_MEMORY {
        // Rows: balance equations p(v) = Σ_u p(u) P(u → v); the last is
        // replaced by Σ p = 1.
        let mut a = vec![0.0f64; n * (n + 1)];
        let cols = n + 1;
        for v in 0..n {
            a[v * cols + v] -= 1.0;
        }
        for u in 0..n {
            let p0 = spec.prob_zero_packed(u as u64);
            let v0 = (u << 1) & mask;
            let v1 = ((u << 1) | 1) & mask;
            a[v0 * cols + u] += p0;
            a[v1 * cols + u] += 1.0 - p0;
        }
        let last = n - 1;
        for u in 0..n {
            a[last * cols + u] = 1.0;
        }
        a[last * cols + n] = 1.0;
        solve_in_place(&mut a, n)
    } else {
        // Power iteration from the uniform vector; converged once the
        // one-step residual is below tolerance.
        let mut p = vec![1.0 / n as f64; n];
        for _ in 0..10_000 {
            let mut next = vec![0.0; n];
            for (u, &pu) in p.iter().enumerate() {
                let p0 = spec.prob_zero_packed(u as u64);
                next[(u << 1) & mask] += pu * p0;
                next[((u << 1) | 1) & mask] += pu * (1.0 - p0);
            }
            let residual = next
                .iter()
                .zip(&p)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            p = next;
            if residual < STATIONARY_TOLERANCE {
                return Ok(p);
            }
        }
        Err(Error::Resource("power iteration did not converge".into()))
    }
}

/// Gaussian elimination with partial pivoting on an `n × (n+1)` augmented
/// matrix stored row-major.
fn solve_in_place(a: &mut [f64], n: usize) -> Result<Vec<f64>> {
    let cols = n + 1;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * cols + col].abs().total_cmp(&a[j * cols + col].abs()))
            .expect("non-empty range");
        if a[pivot * cols + col].abs() < 1e-300 {
            return Err(Error::Resource("singular stationarity system".into()));
        }
        if pivot != col {
            for j in 0..cols {
                a.swap(pivot * cols + j, col * cols + j);
            }
        }
        let diag = a[col * cols + col];
        for row in col + 1..n {
            let factor = a[row * cols + col] / diag;
            if factor != 0.0 {
                for j in col..cols {
                    a[row * cols + j] -= factor * a[col * cols + j];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|j| a[row * cols + j] * x[j]).sum();
        x[row] = (a[row * cols + n] - tail) / a[row * cols + row];
    }
    Ok(x)
}

/// Per-letter block entropy `H(x_1 … x_s) / s` under the stationary law.
///
/// Up to order `k + 8` the `s`-tuple law is built explicitly. Longer blocks
/// use the chain rule: each letter after the first `k` adds the conditional
/// entropy given its context, averaged over the stationary contexts.
pub fn order_s_entropy(spec: &MarkovSpec, s: u32) -> Result<f64> {
    let k = spec.memory;
    if s == 0 {
        return param("block length must be at least 1");
    }
    if s <= (k + 8).min(MAX_DISTRIBUTION_ORDER) {
        return Ok(stationary_distribution(spec, s)?.entropy() / s as f64);
    }
    if k > MAX_STATIONARY_MEMORY {
        return Err(Error::Resource(format!(
            "memory {k} exceeds {MAX_STATIONARY_MEMORY}"
        )));
    }
    let contexts = context_stationary(spec)?;
    let conditional: f64 = contexts
        .iter()
        .enumerate()
        .map(|(u, &p)| p * binary_entropy(spec.prob_zero_packed(u as u64)))
        .sum();
    let head = Distribution {
        order: k,
        mass: contexts,
    }
    .entropy();
    Ok((head + (s - k) as f64 * conditional) / s as f64)
}

fn binary_entropy(p: f64) -> f64 {
    [p, 1.0 - p]
        .iter()
        .filter(|&&q| q > 0.0)
        .map(|&q| -q * q.log2())
        .sum()
}

/// Entropy rate of `T(k, π)` and `T̄(k, π)`: the binary entropy of `π`.
pub fn limit_entropy(pi: f64) -> Result<f64> {
    if !(pi > 0.0 && pi < 1.0) {
        return param(format!("pi = {pi} must lie strictly between 0 and 1"));
    }
    Ok(-(pi * pi.log2() + (1.0 - pi) * (1.0 - pi).log2()))
}
