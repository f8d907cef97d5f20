//! Label-set encoding and retrieval, generic over the two algebras.
//!
//! A [`Codebook`] holds one random symbol vector per label plus a single
//! "positive concept" vector. A set of labels is encoded into one memory
//! vector by superposing the bindings of the concept with each member's
//! label vector; decoding binds the memory with the inverse of the
//! concept, and retrieval ranks all labels by similarity to the decoded
//! vector.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::chrr::{superpose_many, CircularVector};
use crate::error::VsaError;
use crate::hrr::RealHrrVector;
use crate::seed::rng_from_seed;
use crate::Result;

const CODEBOOK_MAGIC: &[u8; 4] = b"VSAC";
const CODEBOOK_VERSION: u16 = 1;

/// Which algebra a codebook (and everything encoded with it) lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algebra {
    /// Real vectors, circular-convolution binding, projected on sampling.
    Hrr,
    /// Circular vectors of angles, modular-addition binding.
    Chrr,
}

impl Algebra {
    pub fn name(self) -> &'static str {
        match self {
            Algebra::Hrr => "hrr",
            Algebra::Chrr => "chrr",
        }
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            Algebra::Hrr => 0,
            Algebra::Chrr => 1,
        }
    }

    fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(Algebra::Hrr),
            1 => Ok(Algebra::Chrr),
            other => Err(VsaError::BadFormat(format!("unknown algebra tag {}", other))),
        }
    }
}

impl fmt::Display for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algebra {
    type Err = VsaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hrr" => Ok(Algebra::Hrr),
            "chrr" => Ok(Algebra::Chrr),
            other => Err(VsaError::InvalidConfig(format!("unknown algebra '{}'", other))),
        }
    }
}

/// An algebra-tagged symbol vector; also the type of encoded memories.
#[derive(Debug, Clone, PartialEq)]
pub enum SymbolVector {
    Hrr(RealHrrVector),
    Chrr(CircularVector),
}

/// A memory vector is just a symbol vector produced by [`Codebook::encode`].
pub type MemoryVector = SymbolVector;

impl SymbolVector {
    pub fn algebra(&self) -> Algebra {
        match self {
            SymbolVector::Hrr(_) => Algebra::Hrr,
            SymbolVector::Chrr(_) => Algebra::Chrr,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SymbolVector::Hrr(v) => v.dim(),
            SymbolVector::Chrr(v) => v.dim(),
        }
    }

    /// The raw slot values: components for the real algebra, angles for
    /// the circular one.
    pub fn values(&self) -> &[f64] {
        match self {
            SymbolVector::Hrr(v) => v.components(),
            SymbolVector::Chrr(v) => v.angles(),
        }
    }

    /// Similarity appropriate to the algebra (cosine / mean slot cosine).
    pub fn similarity(&self, other: &SymbolVector) -> Result<f64> {
        match (self, other) {
            (SymbolVector::Hrr(a), SymbolVector::Hrr(b)) => a.similarity(b),
            (SymbolVector::Chrr(a), SymbolVector::Chrr(b)) => a.similarity(b),
            (a, b) => Err(VsaError::AlgebraMismatch {
                expected: a.algebra().name(),
                got: b.algebra().name(),
            }),
        }
    }
}

#[derive(Debug, Clone)]
enum CodebookVectors {
    Hrr {
        concept: RealHrrVector,
        labels: Vec<RealHrrVector>,
    },
    Chrr {
        concept: CircularVector,
        labels: Vec<CircularVector>,
    },
}

/// N label vectors plus the positive-concept vector, all sharing one
/// algebra and dimension. Fully determined by (algebra, dim, labels,
/// seed): the concept vector is drawn first, then the label vectors in
/// id order, from a single seeded stream.
#[derive(Debug, Clone)]
pub struct Codebook {
    algebra: Algebra,
    dim: usize,
    seed: u64,
    vectors: CodebookVectors,
}

impl Codebook {
    /// Generate the standard codebook for an algebra: projected Gaussian
    /// vectors for the real algebra, uniform angle vectors for the
    /// circular one.
    pub fn generate(algebra: Algebra, dim: usize, num_labels: usize, seed: u64) -> Result<Self> {
        Self::generate_inner(algebra, dim, num_labels, seed, true)
    }

    /// Real-algebra codebook without the projection step. Used by the
    /// variance experiment to compare raw and projected sampling.
    pub(crate) fn generate_hrr_unprojected(
        dim: usize,
        num_labels: usize,
        seed: u64,
    ) -> Result<Self> {
        Self::generate_inner(Algebra::Hrr, dim, num_labels, seed, false)
    }

    fn generate_inner(
        algebra: Algebra,
        dim: usize,
        num_labels: usize,
        seed: u64,
        projected: bool,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(VsaError::EmptyDimension);
        }
        if num_labels == 0 {
            return Err(VsaError::InvalidConfig(
                "codebook needs at least one label".into(),
            ));
        }
        let mut rng = rng_from_seed(seed);
        let vectors = match algebra {
            Algebra::Hrr => {
                let draw = |rng: &mut crate::seed::SeededRng| -> Result<RealHrrVector> {
                    let v = RealHrrVector::sample_gaussian(dim, rng)?;
                    Ok(if projected { v.project() } else { v })
                };
                let concept = draw(&mut rng)?;
                let labels = (0..num_labels)
                    .map(|_| draw(&mut rng))
                    .collect::<Result<Vec<_>>>()?;
                CodebookVectors::Hrr { concept, labels }
            }
            Algebra::Chrr => {
                let concept = CircularVector::sample_uniform(dim, &mut rng)?;
                let labels = (0..num_labels)
                    .map(|_| CircularVector::sample_uniform(dim, &mut rng))
                    .collect::<Result<Vec<_>>>()?;
                CodebookVectors::Chrr { concept, labels }
            }
        };
        Ok(Self {
            algebra,
            dim,
            seed,
            vectors,
        })
    }

    pub fn algebra(&self) -> Algebra {
        self.algebra
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_labels(&self) -> usize {
        match &self.vectors {
            CodebookVectors::Hrr { labels, .. } => labels.len(),
            CodebookVectors::Chrr { labels, .. } => labels.len(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The concept vector, cloned into the tagged representation.
    pub fn concept_vector(&self) -> SymbolVector {
        match &self.vectors {
            CodebookVectors::Hrr { concept, .. } => SymbolVector::Hrr(concept.clone()),
            CodebookVectors::Chrr { concept, .. } => SymbolVector::Chrr(concept.clone()),
        }
    }

    /// The vector assigned to a label id.
    pub fn label_vector(&self, id: usize) -> Result<SymbolVector> {
        let count = self.num_labels();
        if id >= count {
            return Err(VsaError::LabelOutOfRange { id, count });
        }
        Ok(match &self.vectors {
            CodebookVectors::Hrr { labels, .. } => SymbolVector::Hrr(labels[id].clone()),
            CodebookVectors::Chrr { labels, .. } => SymbolVector::Chrr(labels[id].clone()),
        })
    }

    pub(crate) fn hrr_parts(&self) -> Option<(&RealHrrVector, &[RealHrrVector])> {
        match &self.vectors {
            CodebookVectors::Hrr { concept, labels } => Some((concept, labels)),
            CodebookVectors::Chrr { .. } => None,
        }
    }

    pub(crate) fn chrr_parts(&self) -> Option<(&CircularVector, &[CircularVector])> {
        match &self.vectors {
            CodebookVectors::Chrr { concept, labels } => Some((concept, labels)),
            CodebookVectors::Hrr { .. } => None,
        }
    }

    /// Sorted, deduplicated copy of a label id set, validated against
    /// this codebook.
    fn checked_ids(&self, labels: &[usize]) -> Result<Vec<usize>> {
        if labels.is_empty() {
            return Err(VsaError::EmptyLabelSet);
        }
        let count = self.num_labels();
        let mut ids = labels.to_vec();
        ids.sort_unstable();
        ids.dedup();
        if let Some(&bad) = ids.iter().find(|&&id| id >= count) {
            return Err(VsaError::LabelOutOfRange { id: bad, count });
        }
        Ok(ids)
    }

    /// Encode a label set into one memory vector: the superposition over
    /// sorted label ids of concept (x) label. Sorting makes the result
    /// independent of how the set was presented.
    pub fn encode(&self, labels: &[usize]) -> Result<MemoryVector> {
        let ids = self.checked_ids(labels)?;
        match &self.vectors {
            CodebookVectors::Hrr { concept, labels } => {
                let mut sum: Option<RealHrrVector> = None;
                for &id in &ids {
                    let bound = concept.bind(&labels[id])?;
                    sum = Some(match sum {
                        None => bound,
                        Some(acc) => acc.superpose(&bound)?,
                    });
                }
                Ok(SymbolVector::Hrr(sum.expect("nonempty id list")))
            }
            CodebookVectors::Chrr { concept, labels } => {
                let bound: Vec<CircularVector> = ids
                    .iter()
                    .map(|&id| concept.bind(&labels[id]))
                    .collect::<Result<Vec<_>>>()?;
                Ok(SymbolVector::Chrr(superpose_many(&bound)?))
            }
        }
    }

    /// Unbind the concept from a memory vector, yielding the noisy
    /// superposition of the encoded label vectors.
    pub fn decode(&self, memory: &MemoryVector) -> Result<SymbolVector> {
        if memory.algebra() != self.algebra {
            return Err(VsaError::AlgebraMismatch {
                expected: self.algebra.name(),
                got: memory.algebra().name(),
            });
        }
        if memory.dim() != self.dim {
            return Err(VsaError::DimensionMismatch {
                left: self.dim,
                right: memory.dim(),
            });
        }
        match (&self.vectors, memory) {
            (CodebookVectors::Hrr { concept, .. }, SymbolVector::Hrr(m)) => {
                Ok(SymbolVector::Hrr(m.bind(&concept.invert()?)?))
            }
            (CodebookVectors::Chrr { concept, .. }, SymbolVector::Chrr(m)) => {
                Ok(SymbolVector::Chrr(m.bind(&concept.invert())?))
            }
            _ => unreachable!("algebra checked above"),
        }
    }

    /// Rank all labels by similarity to a decoded vector, descending;
    /// ties break toward the smaller label id. Returns the first
    /// `top_k` entries.
    pub fn rank_labels(&self, decoded: &SymbolVector, top_k: usize) -> Result<Vec<(usize, f64)>> {
        let count = self.num_labels();
        if top_k == 0 || top_k > count {
            return Err(VsaError::InvalidTopK {
                got: top_k,
                max: count,
            });
        }
        let mut scored: Vec<(usize, f64)> = match (&self.vectors, decoded) {
            (CodebookVectors::Hrr { labels, .. }, SymbolVector::Hrr(d)) => labels
                .iter()
                .enumerate()
                .map(|(id, c)| Ok((id, d.similarity(c)?)))
                .collect::<Result<Vec<_>>>()?,
            (CodebookVectors::Chrr { labels, .. }, SymbolVector::Chrr(d)) => labels
                .iter()
                .enumerate()
                .map(|(id, c)| Ok((id, d.similarity(c)?)))
                .collect::<Result<Vec<_>>>()?,
            (_, other) => {
                return Err(VsaError::AlgebraMismatch {
                    expected: self.algebra.name(),
                    got: other.algebra().name(),
                })
            }
        };
        scored.sort_unstable_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.0.cmp(&b.0))
        });
        scored.truncate(top_k);
        Ok(scored)
    }

    /// Encode a label set, decode it back, rank the top-|set| labels and
    /// report the fraction of the set that was recovered.
    pub fn retrieval_accuracy(&self, labels: &[usize]) -> Result<f64> {
        let ids = self.checked_ids(labels)?;
        let k = ids.len();
        let decoded = self.decode(&self.encode(&ids)?)?;
        let ranked = self.rank_labels(&decoded, k)?;
        let hits = ranked
            .iter()
            .filter(|(id, _)| ids.binary_search(id).is_ok())
            .count();
        Ok(hits as f64 / k as f64)
    }

    /// Serialize to the binary codebook format: header {magic "VSAC",
    /// version u16, algebra u8, d u32, N u32, seed u64}, then the
    /// concept vector and the label vectors in id order as little-endian
    /// f64 slots.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(CODEBOOK_MAGIC)?;
        w.write_all(&CODEBOOK_VERSION.to_le_bytes())?;
        w.write_all(&[self.algebra.tag()])?;
        w.write_all(&(self.dim as u32).to_le_bytes())?;
        w.write_all(&(self.num_labels() as u32).to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        let mut write_slots = |slots: &[f64]| -> Result<()> {
            for v in slots {
                w.write_all(&v.to_le_bytes())?;
            }
            Ok(())
        };
        match &self.vectors {
            CodebookVectors::Hrr { concept, labels } => {
                write_slots(concept.components())?;
                for l in labels {
                    write_slots(l.components())?;
                }
            }
            CodebookVectors::Chrr { concept, labels } => {
                write_slots(concept.angles())?;
                for l in labels {
                    write_slots(l.angles())?;
                }
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != CODEBOOK_MAGIC {
            return Err(VsaError::BadFormat("bad codebook magic".into()));
        }
        let version = read_u16(&mut r)?;
        if version != CODEBOOK_VERSION {
            return Err(VsaError::BadFormat(format!(
                "unsupported codebook version {}",
                version
            )));
        }
        let mut tag = [0u8; 1];
        r.read_exact(&mut tag)?;
        let algebra = Algebra::from_tag(tag[0])?;
        let dim = read_u32(&mut r)? as usize;
        let num_labels = read_u32(&mut r)? as usize;
        let seed = read_u64(&mut r)?;
        if dim == 0 || num_labels == 0 {
            return Err(VsaError::BadFormat("empty codebook".into()));
        }
        let read_vec = |r: &mut R| -> Result<Vec<f64>> {
            let mut out = Vec::with_capacity(dim);
            let mut buf = [0u8; 8];
            for _ in 0..dim {
                r.read_exact(&mut buf)?;
                out.push(f64::from_le_bytes(buf));
            }
            Ok(out)
        };
        let vectors = match algebra {
            Algebra::Hrr => {
                let concept = RealHrrVector::new(read_vec(&mut r)?)?;
                let labels = (0..num_labels)
                    .map(|_| RealHrrVector::new(read_vec(&mut r)?))
                    .collect::<Result<Vec<_>>>()?;
                CodebookVectors::Hrr { concept, labels }
            }
            Algebra::Chrr => {
                let concept = CircularVector::new(read_vec(&mut r)?)?;
                let labels = (0..num_labels)
                    .map(|_| CircularVector::new(read_vec(&mut r)?))
                    .collect::<Result<Vec<_>>>()?;
                CodebookVectors::Chrr { concept, labels }
            }
        };
        Ok(Self {
            algebra,
            dim,
            seed,
            vectors,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

fn read_u16<R: Read>(r: &mut R) -> Result<u16> {
    let mut buf = [0u8; 2];
    r.read_exact(&mut buf)?;
    Ok(u16::from_le_bytes(buf))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::mix;
    use rand::seq::index::sample;

    #[test]
    fn generation_is_bitwise_reproducible() {
        for algebra in [Algebra::Hrr, Algebra::Chrr] {
            let a = Codebook::generate(algebra, 32, 10, 99).unwrap();
            let b = Codebook::generate(algebra, 32, 10, 99).unwrap();
            assert_eq!(a.concept_vector(), b.concept_vector());
            for id in 0..10 {
                assert_eq!(a.label_vector(id).unwrap(), b.label_vector(id).unwrap());
            }
        }
    }

    #[test]
    fn single_label_round_trip_chrr_is_exact() {
        let cb = Codebook::generate(Algebra::Chrr, 64, 20, 7).unwrap();
        let memory = cb.encode(&[11]).unwrap();
        // One-element superposition is the binding itself.
        let direct = match (cb.concept_vector(), cb.label_vector(11).unwrap()) {
            (SymbolVector::Chrr(p), SymbolVector::Chrr(c)) => p.bind(&c).unwrap(),
            _ => unreachable!(),
        };
        assert_eq!(memory, SymbolVector::Chrr(direct));

        let decoded = cb.decode(&memory).unwrap();
        let sim = decoded.similarity(&cb.label_vector(11).unwrap()).unwrap();
        assert!((sim - 1.0).abs() < 1e-12, "sim {}", sim);
    }

    #[test]
    fn single_label_round_trip_hrr_is_exact_for_projected_vectors() {
        let cb = Codebook::generate(Algebra::Hrr, 64, 20, 7).unwrap();
        let decoded = cb.decode(&cb.encode(&[3]).unwrap()).unwrap();
        let sim = decoded.similarity(&cb.label_vector(3).unwrap()).unwrap();
        assert!(sim > 1.0 - 1e-6, "sim {}", sim);
    }

    #[test]
    fn decode_is_pure() {
        let cb = Codebook::generate(Algebra::Chrr, 32, 8, 5).unwrap();
        let m = cb.encode(&[1, 4, 6]).unwrap();
        assert_eq!(cb.decode(&m).unwrap(), cb.decode(&m).unwrap());
    }

    #[test]
    fn encode_is_permutation_invariant() {
        for algebra in [Algebra::Hrr, Algebra::Chrr] {
            let cb = Codebook::generate(algebra, 32, 30, 1).unwrap();
            let a = cb.encode(&[5, 17, 2, 9]).unwrap();
            let b = cb.encode(&[9, 2, 5, 17]).unwrap();
            assert_eq!(a, b, "algebra {}", algebra);
        }
    }

    #[test]
    fn encode_rejects_bad_input() {
        let cb = Codebook::generate(Algebra::Chrr, 16, 4, 0).unwrap();
        assert!(matches!(cb.encode(&[]), Err(VsaError::EmptyLabelSet)));
        assert!(matches!(
            cb.encode(&[4]),
            Err(VsaError::LabelOutOfRange { id: 4, count: 4 })
        ));
    }

    #[test]
    fn hrr_decode_is_linear_in_the_label_set() {
        let cb = Codebook::generate(Algebra::Hrr, 64, 16, 3).unwrap();
        let ids = [2usize, 7, 13];
        let whole = match cb.decode(&cb.encode(&ids).unwrap()).unwrap() {
            SymbolVector::Hrr(v) => v,
            _ => unreachable!(),
        };
        let mut sum = RealHrrVector::zero(64).unwrap();
        for &id in &ids {
            let part = match cb.decode(&cb.encode(&[id]).unwrap()).unwrap() {
                SymbolVector::Hrr(v) => v,
                _ => unreachable!(),
            };
            sum = sum.superpose(&part).unwrap();
        }
        for (a, b) in whole.components().iter().zip(sum.components()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn rank_labels_orders_by_similarity_with_id_ties() {
        let cb = Codebook::generate(Algebra::Chrr, 32, 10, 4).unwrap();
        let exact = cb.label_vector(5).unwrap();
        let ranked = cb.rank_labels(&exact, 10).unwrap();
        assert_eq!(ranked[0].0, 5);
        assert_eq!(ranked[0].1, 1.0);
        let ids: Vec<usize> = ranked.iter().map(|(id, _)| *id).collect();
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..10).collect::<Vec<_>>(), "top-N is a permutation");

        assert!(matches!(
            cb.rank_labels(&exact, 0),
            Err(VsaError::InvalidTopK { .. })
        ));
        assert!(matches!(
            cb.rank_labels(&exact, 11),
            Err(VsaError::InvalidTopK { .. })
        ));
    }

    #[test]
    fn tied_similarities_break_toward_smaller_id() {
        // A codebook with two identical label vectors.
        let mut rng = rng_from_seed(2);
        let concept = CircularVector::sample_uniform(16, &mut rng).unwrap();
        let shared = CircularVector::sample_uniform(16, &mut rng).unwrap();
        let other = CircularVector::sample_uniform(16, &mut rng).unwrap();
        let cb = Codebook {
            algebra: Algebra::Chrr,
            dim: 16,
            seed: 0,
            vectors: CodebookVectors::Chrr {
                concept,
                labels: vec![other, shared.clone(), shared.clone()],
            },
        };
        let ranked = cb.rank_labels(&SymbolVector::Chrr(shared), 3).unwrap();
        assert_eq!(ranked[0].0, 1);
        assert_eq!(ranked[1].0, 2);
    }

    #[test]
    fn single_label_retrieval_is_perfect_chrr() {
        for d in [1usize, 2, 8] {
            let cb = Codebook::generate(Algebra::Chrr, d, 50, 9).unwrap();
            assert_eq!(cb.retrieval_accuracy(&[17]).unwrap(), 1.0, "d={}", d);
        }
    }

    #[test]
    fn seed0_top10_regression() {
        // k=10 labels at d=1024, N=1000: both algebras put all ten into
        // the top ten. Pinned as a regression for the whole
        // encode/decode/rank path.
        for algebra in [Algebra::Hrr, Algebra::Chrr] {
            let cb = Codebook::generate(algebra, 1024, 1000, 0).unwrap();
            let mut rng = rng_from_seed(mix(0, &[algebra.tag() as u64]));
            let ids = sample(&mut rng, 1000, 10).into_vec();
            let acc = cb.retrieval_accuracy(&ids).unwrap();
            assert_eq!(acc, 1.0, "algebra {}", algebra);
        }
    }

    #[test]
    fn chrr_mean_accuracy_is_high_at_large_d() {
        // d=1024, k=5, N=1000 over 100 seeds.
        let mut total = 0.0;
        for s in 0..100u64 {
            let cb = Codebook::generate(Algebra::Chrr, 1024, 1000, mix(7, &[s])).unwrap();
            let mut rng = rng_from_seed(mix(8, &[s]));
            let ids = sample(&mut rng, 1000, 5).into_vec();
            total += cb.retrieval_accuracy(&ids).unwrap();
        }
        let mean = total / 100.0;
        assert!(mean >= 0.99, "mean accuracy {}", mean);
    }

    #[test]
    fn chrr_beats_projected_hrr_at_small_d_large_k() {
        // d=16, k=50, N=1000 over 100 shared seeds.
        let mut chrr_total = 0.0;
        let mut hrr_total = 0.0;
        for s in 0..100u64 {
            let mut rng = rng_from_seed(mix(21, &[s]));
            let ids = sample(&mut rng, 1000, 50).into_vec();
            let chrr = Codebook::generate(Algebra::Chrr, 16, 1000, mix(22, &[s])).unwrap();
            let hrr = Codebook::generate(Algebra::Hrr, 16, 1000, mix(22, &[s])).unwrap();
            chrr_total += chrr.retrieval_accuracy(&ids).unwrap();
            hrr_total += hrr.retrieval_accuracy(&ids).unwrap();
        }
        assert!(
            chrr_total >= hrr_total,
            "chrr mean {} < hrr mean {}",
            chrr_total / 100.0,
            hrr_total / 100.0
        );
    }

    #[test]
    fn decoded_similarity_does_not_depend_on_insertion_order() {
        let cb = Codebook::generate(Algebra::Chrr, 128, 40, 12).unwrap();
        let forward = cb.decode(&cb.encode(&[3, 9, 27]).unwrap()).unwrap();
        let backward = cb.decode(&cb.encode(&[27, 9, 3]).unwrap()).unwrap();
        for id in [3usize, 9, 27] {
            let a = forward.similarity(&cb.label_vector(id).unwrap()).unwrap();
            let b = backward.similarity(&cb.label_vector(id).unwrap()).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn codebook_file_round_trip_is_byte_identical() {
        for algebra in [Algebra::Hrr, Algebra::Chrr] {
            let cb = Codebook::generate(algebra, 24, 12, 77).unwrap();
            let mut first = Vec::new();
            cb.write_to(&mut first).unwrap();
            let reloaded = Codebook::read_from(first.as_slice()).unwrap();
            let mut second = Vec::new();
            reloaded.write_to(&mut second).unwrap();
            assert_eq!(first, second);
            assert_eq!(reloaded.seed(), 77);
            assert_eq!(reloaded.algebra(), algebra);
        }
    }

    #[test]
    fn load_rejects_foreign_bytes() {
        let err = Codebook::read_from(&b"NOTC\x01\x00"[..]);
        assert!(matches!(err, Err(VsaError::BadFormat(_))));
    }
}
