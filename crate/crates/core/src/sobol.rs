//! Digitally shifted Sobol' points (Joe–Kuo direction numbers) for low
//! dimensional quasi-Monte Carlo integration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BITS: usize = 32;

// (degree s, coefficient a, initial m_1..m_s) for dimensions 2..=8.
const PRIMITIVES: [(u32, u32, &[u32]); 7] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
];

pub const MAX_DIM: usize = PRIMITIVES.len() + 1;

fn directions(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim == 0 {
        for (k, vk) in v.iter_mut().enumerate() {
            *vk = 1 << (BITS - 1 - k);
        }
        return v;
    }
    let (s, a, m) = PRIMITIVES[dim - 1];
    let s = s as usize;
    for k in 0..s.min(BITS) {
        v[k] = m[k] << (BITS - 1 - k);
    }
    for k in s..BITS {
        let mut x = v[k - s] ^ (v[k - s] >> s);
        for i in 1..s {
            if (a >> (s - 1 - i)) & 1 == 1 {
                x ^= v[k - i];
            }
        }
        v[k] = x;
    }
    v
}

/// Gray-code ordered Sobol' points with a random digital shift.
#[derive(Debug, Clone)]
pub struct Sobol {
    dirs: Vec<[u32; BITS]>,
    shift: Vec<u32>,
    state: Vec<u32>,
    index: u64,
}

impl Sobol {
    /// Unshifted sequence; its first point is the origin.
    pub fn new(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "Sobol dimension must be in 1..={MAX_DIM}");
        Self {
            dirs: (0..dim).map(directions).collect(),
            shift: vec![0; dim],
            state: vec![0; dim],
            index: 0,
        }
    }

    /// Sequence XOR-shifted by a random word per coordinate drawn from `seed`.
    pub fn scrambled(dim: usize, seed: u64) -> Self {
        let mut s = Self::new(dim);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        s.shift = (0..dim).map(|_| rng.gen()).collect();
        s
    }

    pub fn dim(&self) -> usize {
        self.dirs.len()
    }

    /// Writes the next point into `out`; coordinates lie strictly inside (0, 1).
    pub fn next_into(&mut self, out: &mut [f64]) {
        const SCALE: f64 = 1.0 / (1u64 << BITS) as f64;
        for ((o, &x), &sh) in out.iter_mut().zip(&self.state).zip(&self.shift) {
            *o = ((x ^ sh) as f64 + 0.5) * SCALE;
        }
        let c = self.index.trailing_ones() as usize;
        assert!(c < BITS, "Sobol sequence exhausted");
        for (x, d) in self.state.iter_mut().zip(&self.dirs) {
            *x ^= d[c];
        }
        self.index += 1;
    }
}
