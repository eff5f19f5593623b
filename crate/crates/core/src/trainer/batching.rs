use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Indices of one training batch into the source and target corpora.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Batch {
    pub source: Vec<usize>,
    pub target: Vec<usize>,
}

/// Cycles through shuffled passes of a corpus, reshuffling at each wrap.
#[derive(Clone, Debug)]
pub struct CyclingSampler {
    order: Vec<usize>,
    cursor: usize,
}

impl CyclingSampler {
    pub fn new(len: usize) -> Self {
        CyclingSampler {
            order: (0..len).collect(),
            cursor: len,
        }
    }

    pub fn take<R: Rng + ?Sized>(&mut self, n: usize, rng: &mut R) -> Vec<usize> {
        if self.order.is_empty() {
            return Vec::new();
        }
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            if self.cursor == self.order.len() {
                self.order.shuffle(rng);
                self.cursor = 0;
            }
            out.push(self.order[self.cursor]);
            self.cursor += 1;
        }
        out
    }
}

/// One epoch of batches: a shuffled pass over the source corpus in chunks of
/// `batch_size`, each paired with `batch_size` target sentences drawn from a
/// cycling shuffled stream. Target samples continue across epochs through
/// `target_stream`.
pub fn make_batches<R: Rng + ?Sized>(
    n_source: usize,
    target_stream: &mut CyclingSampler,
    batch_size: usize,
    rng: &mut R,
) -> Result<Vec<Batch>> {
    if n_source == 0 {
        return Err(Error::EmptyCorpus);
    }
    if batch_size == 0 {
        return Err(Error::Config("batch_size must be positive".into()));
    }
    let mut order: Vec<usize> = (0..n_source).collect();
    order.shuffle(rng);
    Ok(order
        .chunks(batch_size)
        .map(|chunk| Batch {
            source: chunk.to_vec(),
            target: target_stream.take(batch_size, rng),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cycling_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut target = CyclingSampler::new(32);
        let batches = make_batches(64, &mut target, 32, &mut rng).unwrap();
        assert_eq!(batches.len(), 2);
        let mut all_source: Vec<usize> = batches.iter().flat_map(|b| b.source.clone()).collect();
        all_source.sort();
        assert_eq!(all_source, (0..64).collect::<Vec<_>>());
        for b in &batches {
            let mut t = b.target.clone();
            t.sort();
            // each batch is one full reshuffled pass over the 32 targets
            assert_eq!(t, (0..32).collect::<Vec<_>>());
        }
    }

    #[test]
    fn empty_target_side() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut target = CyclingSampler::new(0);
        let batches = make_batches(10, &mut target, 4, &mut rng).unwrap();
        assert_eq!(batches.len(), 3);
        assert!(batches.iter().all(|b| b.target.is_empty()));
        assert_eq!(batches[2].source.len(), 2);
    }

    #[test]
    fn reproducible_and_errors() {
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut target = CyclingSampler::new(7);
            make_batches(20, &mut target, 3, &mut rng).unwrap()
        };
        assert_eq!(run(5), run(5));
        assert_ne!(run(5), run(6));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            make_batches(0, &mut CyclingSampler::new(3), 2, &mut rng),
            Err(Error::EmptyCorpus)
        ));
    }
}
