//! Per-kind molecule storage.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::ChemError;
use crate::molecule::{Molecule, MoleculeKind};
use crate::rng::{Purpose, StreamKey};

/// All molecules of one kind, stored row-major (`count * kind.len()` values).
#[derive(Debug, Clone, PartialEq)]
pub struct KindPool {
    kind: MoleculeKind,
    data: Vec<f64>,
}

impl KindPool {
    pub fn from_flat(kind: MoleculeKind, data: Vec<f64>) -> Result<Self, ChemError> {
        if !data.len().is_multiple_of(kind.len()) {
            return Err(ChemError::Invalid(format!(
                "{} values do not divide into {kind} molecules",
                data.len()
            )));
        }
        if let Some((i, v)) = data
            .iter()
            .enumerate()
            .find(|(_, v)| !(-1.0..=1.0).contains(*v))
        {
            return Err(ChemError::OutOfRange { index: i, value: *v });
        }
        Ok(Self { kind, data })
    }

    pub fn kind(&self) -> MoleculeKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.kind.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, i: usize) -> &[f64] {
        let l = self.kind.len();
        &self.data[i * l..(i + 1) * l]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.kind.len())
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn molecules(&self) -> Vec<Molecule> {
        self.rows()
            .map(|r| Molecule::new(self.kind, r.to_vec()).expect("pool values are in range"))
            .collect()
    }
}

/// One array of molecules per kind.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pools: [KindPool; 3],
}

impl Population {
    pub fn new(m13: KindPool, m7: KindPool, m3: KindPool) -> Result<Self, ChemError> {
        for (pool, kind) in [&m13, &m7, &m3].into_iter().zip(MoleculeKind::ALL) {
            if pool.kind != kind {
                return Err(ChemError::Invalid(format!(
                    "pool of {} given where {kind} expected",
                    pool.kind
                )));
            }
        }
        Ok(Self {
            pools: [m13, m7, m3],
        })
    }

    /// Builds a population from molecule lists, one per kind.
    pub fn from_molecules(
        m13: &[Molecule],
        m7: &[Molecule],
        m3: &[Molecule],
    ) -> Result<Self, ChemError> {
        let pool = |kind: MoleculeKind, ms: &[Molecule]| -> Result<KindPool, ChemError> {
            let mut data = Vec::with_capacity(ms.len() * kind.len());
            for m in ms {
                if m.kind() != kind {
                    return Err(ChemError::Invalid(format!("{} molecule in {kind} list", m.kind())));
                }
                data.extend_from_slice(m.values());
            }
            KindPool::from_flat(kind, data)
        };
        Self::new(
            pool(MoleculeKind::L13, m13)?,
            pool(MoleculeKind::L7, m7)?,
            pool(MoleculeKind::L3, m3)?,
        )
    }

    pub fn pool(&self, kind: MoleculeKind) -> &KindPool {
        &self.pools[kind.index()]
    }

    pub fn count(&self, kind: MoleculeKind) -> usize {
        self.pool(kind).len()
    }

    pub fn counts(&self) -> [usize; 3] {
        MoleculeKind::ALL.map(|k| self.count(k))
    }

    pub fn get(&self, kind: MoleculeKind, i: usize) -> &[f64] {
        self.pool(kind).get(i)
    }

    pub fn total(&self) -> usize {
        self.pools.iter().map(KindPool::len).sum()
    }

    /// True if every value lies in `[-1, 1]`.
    pub fn in_range(&self) -> bool {
        self.pools
            .iter()
            .all(|p| p.data.iter().all(|v| (-1.0..=1.0).contains(v)))
    }
}

/// Fresh population with every element i.i.d. uniform on `[-1, 1]`.
///
/// Molecule `i` of kind `K` draws from the stream `(seed, 0, Init(K), i)`.
pub fn init_population(counts: [usize; 3], seed: u64) -> Result<Population, ChemError> {
    let pools = MoleculeKind::ALL.map(|kind| {
        let key = StreamKey::new(seed, 0, Purpose::Init(kind));
        let mut data = Vec::with_capacity(counts[kind.index()] * kind.len());
        for i in 0..counts[kind.index()] {
            let mut rng = key.slot(i as u64);
            data.extend((0..kind.len()).map(|_| rng.random_range(-1.0..=1.0)));
        }
        KindPool { kind, data }
    });
    if let Some(k) = MoleculeKind::ALL.into_iter().find(|k| counts[k.index()] == 0) {
        return Err(ChemError::Invalid(format!("population of {k} must be non-empty")));
    }
    let [a, b, c] = pools;
    Population::new(a, b, c)
}

/// Adds i.i.d. Gaussian noise of standard deviation `sigma` to every value,
/// then clamps to `[-1, 1]`. `sigma == 0` leaves values untouched.
pub fn perturb<R: Rng + ?Sized>(values: &mut [f64], sigma: f64, rng: &mut R) {
    if sigma == 0.0 {
        return;
    }
    for v in values {
        let z: f64 = rng.sample(StandardNormal);
        *v = (*v + sigma * z).clamp(-1.0, 1.0);
    }
}

/// [`perturb`] on an owned molecule.
pub fn perturb_molecule<R: Rng + ?Sized>(molecule: &Molecule, sigma: f64, rng: &mut R) -> Molecule {
    let mut values = molecule.values().to_vec();
    perturb(&mut values, sigma, rng);
    Molecule::new(molecule.kind(), values).expect("clamped values are in range")
}
