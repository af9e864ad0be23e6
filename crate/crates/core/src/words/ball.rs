use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{reduce_word, Presentation, Word};
use crate::error::{Error, Result};

/// Default cap on the number of words in an enumerated ball.
pub const DEFAULT_BALL_LIMIT: usize = 1_000_000;

/// All group elements at word distance at most `radius`, each given by its
/// shortlex-least geodesic word, listed in shortlex order.
///
/// Every word of length `l ≥ 1` is its parent word (length `l-1`, also in the
/// ball) followed by one letter, which is what makes prefix-cached evaluation
/// possible.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    presentation: Presentation,
    radius: usize,
    words: Vec<Word>,
    offsets: Vec<usize>,
    parents: Vec<usize>,
}

impl Ball {
    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    /// Index range of the words of length `l`.
    pub fn shell_range(&self, l: usize) -> std::ops::Range<usize> {
        if l > self.radius {
            return self.words.len()..self.words.len();
        }
        self.offsets[l]..self.offsets[l + 1]
    }

    pub fn sphere(&self, l: usize) -> &[Word] {
        &self.words[self.shell_range(l)]
    }

    pub fn sphere_sizes(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Index of the word with the last letter removed; `None` for the identity.
    pub fn parent(&self, i: usize) -> Option<usize> {
        (i > 0).then(|| self.parents[i])
    }

    pub fn index_of(&self, w: &Word) -> Option<usize> {
        let range = self.shell_range(w.len());
        let start = range.start;
        self.words[range].binary_search(w).ok().map(|i| start + i)
    }
}

pub fn enumerate_ball(p: &Presentation, radius: usize) -> Result<Ball> {
    enumerate_ball_with_limit(p, radius, DEFAULT_BALL_LIMIT)
}

pub fn enumerate_ball_with_limit(p: &Presentation, radius: usize, limit: usize) -> Result<Ball> {
    p.validate()?;
    match p {
        Presentation::Free { rank } => free_ball(*p, *rank, radius, limit),
        Presentation::Surface { .. } => surface_ball(*p, radius, limit),
    }
}

fn too_large(limit: usize) -> Error {
    Error::ResourceLimit(format!("ball exceeds {limit} words"))
}

fn free_ball(p: Presentation, rank: usize, radius: usize, limit: usize) -> Result<Ball> {
    // closed-form size check before allocating anything
    let mut total: u128 = 1;
    let mut shell: u128 = 1;
    for l in 1..=radius {
        shell *= if l == 1 { 2 * rank as u128 } else { 2 * rank as u128 - 1 };
        total += shell;
        if total > limit as u128 {
            return Err(too_large(limit));
        }
    }
    let alphabet = p.alphabet();
    let mut words = vec![Word::empty()];
    let mut parents = vec![0];
    let mut offsets = vec![0, 1];
    for l in 1..=radius {
        for parent in offsets[l - 1]..offsets[l] {
            let last = words[parent].letters().last().copied();
            for &x in &alphabet {
                if Some(x.inverse()) == last {
                    continue;
                }
                let mut w = words[parent].clone();
                w.push(x);
                words.push(w);
                parents.push(parent);
            }
        }
        offsets.push(words.len());
    }
    Ok(Ball { presentation: p, radius, words, offsets, parents })
}

const PRIME: u64 = 2_147_483_647;

type Mat2 = [u64; 4];

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let m = |x: u64, y: u64| x * y % PRIME;
    [
        (m(a[0], b[0]) + m(a[1], b[2])) % PRIME,
        (m(a[0], b[1]) + m(a[1], b[3])) % PRIME,
        (m(a[2], b[0]) + m(a[3], b[2])) % PRIME,
        (m(a[2], b[1]) + m(a[3], b[3])) % PRIME,
    ]
}

fn mat_inv(a: &Mat2) -> Mat2 {
    // determinant one
    [a[3], (PRIME - a[1]) % PRIME, (PRIME - a[2]) % PRIME, a[0]]
}

fn pow_mod(mut b: u64, mut e: u64) -> u64 {
    let mut acc = 1;
    b %= PRIME;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % PRIME;
        }
        b = b * b % PRIME;
        e >>= 1;
    }
    acc
}

fn random_sl2(rng: &mut ChaCha8Rng) -> Mat2 {
    let a = rng.gen_range(1..PRIME);
    let b = rng.gen_range(0..PRIME);
    let c = rng.gen_range(0..PRIME);
    let d = (1 + b * c % PRIME) % PRIME * pow_mod(a, PRIME - 2) % PRIME;
    [a, b, c, d]
}

/// Letter images in `SL(2, F_p)` of a homomorphism from the surface group:
/// handles are paired as (a_i, b_i, a_j, b_j) ↦ (x, y, y, x), which kills
/// `[a_i,b_i][a_j,b_j]`; an unpaired last handle goes to the commuting pair (z, z²).
fn surface_homomorphism(genus: usize, rng: &mut ChaCha8Rng) -> Vec<Mat2> {
    let mut gens = vec![[1, 0, 0, 1]; 2 * genus];
    let mut h = 0;
    while h + 1 < genus {
        let (x, y) = (random_sl2(rng), random_sl2(rng));
        gens[2 * h] = x;
        gens[2 * h + 1] = y;
        gens[2 * h + 2] = y;
        gens[2 * h + 3] = x;
        h += 2;
    }
    if h < genus {
        let z = random_sl2(rng);
        gens[2 * h] = z;
        gens[2 * h + 1] = mat_mul(&z, &z);
    }
    gens.iter().flat_map(|g| [*g, mat_inv(g)]).collect()
}

/// Exact homomorphic invariants of a group element; equal elements have equal keys.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct ElementKey {
    abelian: Vec<i32>,
    images: Vec<Mat2>,
}

/// Breadth-first search on the Cayley graph. Candidates `u·x` are compared
/// with every element found so far that shares their invariant key, using
/// Dehn's algorithm on `u·x·w⁻¹` to decide equality.
fn surface_ball(p: Presentation, radius: usize, limit: usize) -> Result<Ball> {
    let Presentation::Surface { genus } = p else { unreachable!() };
    let alphabet = p.alphabet();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_ba11);
    let homs: Vec<Vec<Mat2>> = (0..2).map(|_| surface_homomorphism(genus, &mut rng)).collect();

    let identity_key = ElementKey { abelian: vec![0; 2 * genus], images: vec![[1, 0, 0, 1]; homs.len()] };
    let mut keys = vec![identity_key.clone()];
    let mut buckets: HashMap<ElementKey, Vec<usize>> = HashMap::from([(identity_key, vec![0])]);
    let mut words = vec![Word::empty()];
    let mut parents = vec![0];
    let mut offsets = vec![0, 1];

    for l in 1..=radius {
        for parent in offsets[l - 1]..offsets[l] {
            let last = words[parent].letters().last().copied();
            for &x in &alphabet {
                if Some(x.inverse()) == last {
                    continue;
                }
                let mut key = keys[parent].clone();
                key.abelian[x.generator_index()] += if x.is_inverse() { -1 } else { 1 };
                for (img, hom) in key.images.iter_mut().zip(&homs) {
                    *img = mat_mul(img, &hom[x.code()]);
                }
                let mut candidate = words[parent].clone();
                candidate.push(x);
                let seen = match buckets.get(&key) {
                    Some(list) => {
                        let mut found = false;
                        for &j in list {
                            if reduce_word(candidate.concat(&words[j].inverse()).letters(), &p)?.is_empty() {
                                found = true;
                                break;
                            }
                        }
                        found
                    }
                    None => false,
                };
                if seen {
                    continue;
                }
                if words.len() >= limit {
                    return Err(too_large(limit));
                }
                let idx = words.len();
                buckets.entry(key.clone()).or_default().push(idx);
                keys.push(key);
                words.push(candidate);
                parents.push(parent);
            }
        }
        offsets.push(words.len());
    }
    Ok(Ball { presentation: p, radius, words, offsets, parents })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_rank_two_radius_two() {
        let b = enumerate_ball(&Presentation::free(2).unwrap(), 2).unwrap();
        assert_eq!(b.len(), 17);
        assert_eq!(b.sphere_sizes(), vec![1, 4, 12]);
        assert!(b.words().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn genus_two_radius_two() {
        let b = enumerate_ball(&Presentation::surface(2).unwrap(), 2).unwrap();
        assert_eq!(b.len(), 65);
        assert_eq!(b.sphere_sizes(), vec![1, 8, 56]);
    }

    #[test]
    fn radius_zero_is_identity() {
        for p in [Presentation::free(3).unwrap(), Presentation::surface(2).unwrap()] {
            let b = enumerate_ball(&p, 0).unwrap();
            assert_eq!(b.words(), &[Word::empty()]);
        }
    }

    #[test]
    fn parents_are_prefixes() {
        let b = enumerate_ball(&Presentation::surface(2).unwrap(), 3).unwrap();
        for i in 1..b.len() {
            let w = &b.words()[i];
            let parent = &b.words()[b.parent(i).unwrap()];
            assert_eq!(parent.letters(), &w.letters()[..w.len() - 1]);
            assert_eq!(b.index_of(w), Some(i));
        }
    }

    #[test]
    fn genus_two_shells_are_distinct_elements() {
        let p = Presentation::surface(2).unwrap();
        let b = enumerate_ball(&p, 3).unwrap();
        let s3 = b.sphere(3);
        for (i, u) in s3.iter().enumerate() {
            for v in &s3[i + 1..] {
                assert!(!reduce_word(u.concat(&v.inverse()).letters(), &p).unwrap().is_empty());
            }
        }
    }

    #[test]
    fn resource_guard() {
        let p = Presentation::free(2).unwrap();
        assert!(matches!(enumerate_ball_with_limit(&p, 8, 1000), Err(Error::ResourceLimit(_))));
        let s = Presentation::surface(2).unwrap();
        assert!(matches!(enumerate_ball_with_limit(&s, 4, 100), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn homomorphisms_kill_relator() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for genus in [2, 3] {
            let p = Presentation::surface(genus).unwrap();
            let hom = surface_homomorphism(genus, &mut rng);
            let img = p.relator().letters().iter().fold([1, 0, 0, 1], |acc, l| mat_mul(&acc, &hom[l.code()]));
            assert_eq!(img, [1, 0, 0, 1]);
        }
    }
}
