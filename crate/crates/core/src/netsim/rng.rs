use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Signal families that own an independent random stream per node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SignalKind {
    Input = 0,
    Process = 1,
    Output = 2,
    Interconnect = 3,
}

/// Counter-based Gaussian stream keyed by `(seed, node, kind)`.
///
/// Streams for different keys never share draws, so switching one noise channel on
/// or off leaves every other channel's realization untouched.
pub struct StreamRng {
    inner: ChaCha8Rng,
}

impl StreamRng {
    pub fn new(seed: u64, node: usize, kind: SignalKind) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(((node as u64) << 8) | kind as u64);
        Self { inner }
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }
}
