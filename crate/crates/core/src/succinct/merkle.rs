use serde::{Deserialize, Serialize};

use super::hash::{Digest, HashSpec};
use crate::error::{Error, Result};

const LEAF: u8 = 0;
const NODE: u8 = 1;
const PAD: u8 = 2;

/// Root digest together with the number of committed leaves.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MerkleRoot {
    pub digest: Digest,
    pub leaves: u64,
}

impl MerkleRoot {
    pub fn depth(&self) -> usize {
        depth_for(self.leaves)
    }

    pub fn wire_len(&self) -> usize {
        self.digest.len() + 8
    }
}

fn depth_for(leaves: u64) -> usize {
    leaves.max(1).next_power_of_two().trailing_zeros() as usize
}

/// Sibling digests from the leaf up to the root.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MerklePath {
    pub siblings: Vec<Digest>,
}

impl MerklePath {
    pub fn wire_len(&self) -> usize {
        self.siblings.iter().map(Digest::len).sum()
    }
}

/// A Merkle tree; `levels[0]` holds the (padded) leaf digests.
#[derive(Clone, Debug)]
pub struct MerkleCommitment {
    pub leaves: Vec<Vec<u8>>,
    pub levels: Vec<Vec<Digest>>,
    pub hash: HashSpec,
}

pub fn leaf_digest(hash: &HashSpec, leaf: &[u8]) -> Digest {
    hash.digest(LEAF, &[leaf])
}

fn node_digest(hash: &HashSpec, l: &Digest, r: &Digest) -> Digest {
    hash.digest(NODE, &[&l.0, &r.0])
}

/// Builds the tree, padding to a power of two with a fixed pad digest.
pub fn merkle_commit(leaves: Vec<Vec<u8>>, hash: &HashSpec) -> Result<MerkleCommitment> {
    if leaves.is_empty() {
        return Err(Error::InvalidArgument("a Merkle tree needs at least one leaf".into()));
    }
    let width = leaves.len().next_power_of_two();
    let pad = hash.digest(PAD, &[]);
    let mut level: Vec<Digest> = leaves.iter().map(|l| leaf_digest(hash, l)).collect();
    level.resize(width, pad);
    let mut levels = vec![level];
    while levels.last().unwrap().len() > 1 {
        let prev = levels.last().unwrap();
        let next = prev.chunks(2).map(|p| node_digest(hash, &p[0], &p[1])).collect();
        levels.push(next);
    }
    Ok(MerkleCommitment { leaves, levels, hash: hash.clone() })
}

impl MerkleCommitment {
    pub fn root(&self) -> MerkleRoot {
        MerkleRoot { digest: self.levels.last().unwrap()[0].clone(), leaves: self.leaves.len() as u64 }
    }

    pub fn open(&self, index: u64) -> Result<(Vec<u8>, MerklePath)> {
        let i = index as usize;
        if i >= self.leaves.len() {
            return Err(Error::InvalidArgument(format!("leaf {index} of {}", self.leaves.len())));
        }
        let siblings = (0..self.levels.len() - 1).map(|d| self.levels[d][(i >> d) ^ 1].clone()).collect();
        Ok((self.leaves[i].clone(), MerklePath { siblings }))
    }
}

/// Recomputes the root from `leaf` and `path`.
pub fn merkle_verify(root: &MerkleRoot, index: u64, leaf: &[u8], path: &MerklePath, hash: &HashSpec) -> Result<bool> {
    let depth = root.depth();
    if path.siblings.len() != depth {
        return Err(Error::MalformedPath { expected: depth, got: path.siblings.len() });
    }
    if index >= root.leaves || path.siblings.iter().any(|s| s.len() != hash.digest_len()) {
        return Ok(false);
    }
    let mut acc = leaf_digest(hash, leaf);
    for (d, s) in path.siblings.iter().enumerate() {
        acc = if (index >> d) & 1 == 0 { node_digest(hash, &acc, s) } else { node_digest(hash, s, &acc) };
    }
    Ok(acc == root.digest)
}

/// Leaf size used when committing to a byte string.
pub const CHUNK: usize = 32;

/// Commits to a byte string split into `CHUNK`-byte leaves.
pub fn commit_bytes(data: &[u8], hash: &HashSpec) -> Result<MerkleCommitment> {
    let leaves = if data.is_empty() { vec![Vec::new()] } else { data.chunks(CHUNK).map(<[u8]>::to_vec).collect() };
    merkle_commit(leaves, hash)
}

#[cfg(test)]
mod tests {
    use super::super::hash::HashKind;
    use super::*;
    use crate::rng::TrialRng;
    use proptest::prelude::*;

    fn spec() -> HashSpec {
        HashSpec::new(HashKind::Sha256, [7; 32]).unwrap()
    }

    #[test]
    fn single_leaf_root_is_its_digest() {
        let h = spec();
        let c = merkle_commit(vec![b"only".to_vec()], &h).unwrap();
        assert_eq!(c.root().digest, leaf_digest(&h, b"only"));
        let (leaf, path) = c.open(0).unwrap();
        assert!(path.siblings.is_empty());
        assert!(merkle_verify(&c.root(), 0, &leaf, &path, &h).unwrap());
    }

    #[test]
    fn swapped_siblings_fail() {
        let h = spec();
        let leaves: Vec<Vec<u8>> = (0..5u8).map(|i| vec![i; 3]).collect();
        let c = merkle_commit(leaves, &h).unwrap();
        let (leaf, mut path) = c.open(2).unwrap();
        assert_eq!(path.siblings.len(), 3);
        path.siblings.swap(0, 1);
        assert!(!merkle_verify(&c.root(), 2, &leaf, &path, &h).unwrap());
        path.siblings.pop();
        assert!(matches!(merkle_verify(&c.root(), 2, &leaf, &path, &h), Err(Error::MalformedPath { expected: 3, got: 2 })));
    }

    #[test]
    fn random_tampers_are_caught() {
        let h = spec();
        let mut rng = TrialRng::new(1, 0);
        let leaves: Vec<Vec<u8>> = (0..37).map(|_| rng.bytes::<8>().to_vec()).collect();
        let c = merkle_commit(leaves, &h).unwrap();
        let root = c.root();
        for _ in 0..1000 {
            let i = rng.below(37);
            let (mut leaf, mut path) = c.open(i).unwrap();
            let mut idx = i;
            match rng.below(3) {
                0 => leaf[rng.below(8) as usize] ^= 1 << rng.below(8),
                1 => {
                    let d = rng.below(path.siblings.len() as u64) as usize;
                    path.siblings[d].0[rng.below(32) as usize] ^= 1 << rng.below(8);
                }
                _ => idx = (i + 1 + rng.below(36)) % 37,
            }
            assert!(!merkle_verify(&root, idx, &leaf, &path, &h).unwrap());
        }
    }

    proptest! {
        #[test]
        fn honest_openings_verify(leaves in proptest::collection::vec(proptest::collection::vec(any::<u8>(), 0..10), 1..40)) {
            let h = spec();
            let c = merkle_commit(leaves.clone(), &h).unwrap();
            let c2 = merkle_commit(leaves.clone(), &h).unwrap();
            prop_assert_eq!(c.root(), c2.root());
            for i in 0..leaves.len() as u64 {
                let (leaf, path) = c.open(i).unwrap();
                prop_assert_eq!(path.siblings.len(), c.root().depth());
                prop_assert!(merkle_verify(&c.root(), i, &leaf, &path, &h).unwrap());
            }
        }

        #[test]
        fn bit_flips_change_the_root(data in proptest::collection::vec(any::<u8>(), 1..200), pos in any::<usize>(), bit in 0u8..8) {
            let h = spec();
            let mut other = data.clone();
            let p = pos % data.len();
            other[p] ^= 1 << bit;
            prop_assert_ne!(commit_bytes(&data, &h).unwrap().root(), commit_bytes(&other, &h).unwrap().root());
        }
    }
}
