//! Counter-based random streams.
//!
//! Every draw in a run is addressed by `(seed, step, purpose, slot)`. A
//! [`SlotRng`] for that address is a SplitMix64 sequence keyed by a hash of
//! the four coordinates, so any worker can reproduce any slot's draws
//! without coordinating with other workers.

use rand::RngCore;

use crate::molecule::MoleculeKind;

const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// What a stream is used for. Distinct purposes never share draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    /// Uniform initialization of one kind's population.
    Init(MoleculeKind),
    /// Building one next-generation slot of a kind (sampling plus noise).
    Advance(MoleculeKind),
    /// Choosing which originals a pathway evaluation uses.
    PathwaySample(usize),
    /// Catalyst draws for one pathway evaluation.
    PathwayCatalyst(usize),
    /// Free-form tag for analysis tools and tests.
    Other(u64),
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Init(k) => 0x100 + k.index() as u64,
            Purpose::Advance(k) => 0x200 + k.index() as u64,
            Purpose::PathwaySample(i) => 0x1_0000_0000 + i as u64,
            Purpose::PathwayCatalyst(i) => 0x2_0000_0000 + i as u64,
            Purpose::Other(t) => 0xffff_0000_0000_0000 ^ t,
        }
    }
}

/// Addresses a family of streams for one `(seed, step, purpose)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey {
    key: u64,
}

impl StreamKey {
    pub fn new(seed: u64, step: u64, purpose: Purpose) -> Self {
        let mut key = mix64(seed ^ 0x5341_4543_0000_0001);
        key = mix64(key ^ step.wrapping_mul(GAMMA));
        key = mix64(key ^ purpose.tag());
        Self { key }
    }

    /// The independent stream for one slot.
    pub fn slot(&self, slot: u64) -> SlotRng {
        SlotRng {
            key: mix64(self.key ^ mix64(slot.wrapping_add(GAMMA))),
            counter: 0,
        }
    }
}

/// SplitMix64 stream for a single slot.
#[derive(Debug, Clone)]
pub struct SlotRng {
    key: u64,
    counter: u64,
}

impl SlotRng {
    pub fn new(seed: u64, step: u64, purpose: Purpose, slot: u64) -> Self {
        StreamKey::new(seed, step, purpose).slot(slot)
    }
}

impl RngCore for SlotRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GAMMA)))
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}
