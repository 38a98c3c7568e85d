use std::collections::{HashMap, VecDeque};
use std::fmt;

use super::TermError;

/// A bijection on tuple positions `0..k`.
///
/// `image[i]` is the position read into slot `i`: applying the permutation to
/// `(a_0, …, a_{k-1})` yields `(a_{image[0]}, …, a_{image[k-1]})`. Composition
/// follows term nesting, so `outer.compose(&inner)` acts like the term
/// `outer inner R`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self, TermError> {
        let k = image.len();
        let mut seen = vec![false; k];
        for &j in &image {
            if j >= k || seen[j] {
                return Err(TermError::InvalidPermutation(image));
            }
            seen[j] = true;
        }
        Ok(Self { image })
    }

    pub fn identity(k: usize) -> Self {
        Self { image: (0..k).collect() }
    }

    /// The cyclic generator `p`: `(a_0,…,a_{k-1}) ↦ (a_{k-1}, a_0, …, a_{k-2})`.
    pub fn rot(k: usize) -> Result<Self, TermError> {
        if k < 2 {
            return Err(TermError::PermutationTooSmall(k));
        }
        let mut image = vec![k - 1];
        image.extend(0..k - 1);
        Ok(Self { image })
    }

    /// The swap generator `s`, exchanging the last two positions.
    pub fn swap(k: usize) -> Result<Self, TermError> {
        if k < 2 {
            return Err(TermError::PermutationTooSmall(k));
        }
        let mut image: Vec<usize> = (0..k).collect();
        image.swap(k - 2, k - 1);
        Ok(Self { image })
    }

    pub fn generator(g: Generator, k: usize) -> Result<Self, TermError> {
        match g {
            Generator::Rot => Self::rot(k),
            Generator::Swap => Self::swap(k),
        }
    }

    /// Composes a generator word, outermost generator first.
    pub fn from_word(word: &[Generator], k: usize) -> Result<Self, TermError> {
        let mut acc = Self::identity(k);
        for &g in word {
            acc = acc.compose(&Self::generator(g, k)?);
        }
        Ok(acc)
    }

    /// All permutations of `0..k` in lexicographic order of one-line notation.
    pub fn all(k: usize) -> Vec<Self> {
        let mut out = Vec::new();
        let mut current: Vec<usize> = (0..k).collect();
        loop {
            out.push(Self { image: current.clone() });
            // next lexicographic permutation
            let Some(i) = (1..k).rev().find(|&i| current[i - 1] < current[i]) else {
                break;
            };
            let j = (i..k).rev().find(|&j| current[j] > current[i - 1]).unwrap();
            current.swap(i - 1, j);
            current[i..].reverse();
        }
        out
    }

    /// Position of `self` within [`Permutation::all`].
    pub fn rank(&self) -> usize {
        let k = self.image.len();
        let mut rank = 0;
        let mut factorial: usize = (1..k).product();
        let mut remaining: Vec<usize> = (0..k).collect();
        for (i, &v) in self.image.iter().enumerate() {
            let pos = remaining.iter().position(|&r| r == v).unwrap();
            rank += pos * factorial;
            remaining.remove(pos);
            if i + 1 < k {
                factorial /= k - 1 - i;
            }
        }
        rank
    }

    pub fn size(&self) -> usize {
        self.image.len()
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// The position read into slot `i` (`σ(i)`).
    pub fn image(&self, i: usize) -> usize {
        self.image[i]
    }

    /// The slot that reads position `j` (`σ⁻¹(j)`).
    pub fn preimage(&self, j: usize) -> usize {
        self.image.iter().position(|&x| x == j).expect("permutation is a bijection")
    }

    pub fn one_line(&self) -> &[usize] {
        &self.image
    }

    /// `self ∘ inner`: apply `inner` first, then `self`.
    pub fn compose(&self, inner: &Permutation) -> Permutation {
        debug_assert_eq!(self.size(), inner.size());
        Permutation { image: self.image.iter().map(|&i| inner.image[i]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut image = vec![0; self.size()];
        for (i, &j) in self.image.iter().enumerate() {
            image[j] = i;
        }
        Permutation { image }
    }

    pub fn apply<T: Clone>(&self, tuple: &[T]) -> Vec<T> {
        debug_assert_eq!(tuple.len(), self.size());
        self.image.iter().map(|&i| tuple[i].clone()).collect()
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.image)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, v) in self.image.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("]")
    }
}

/// The two term-level permutation generators. `Rot < Swap` fixes the
/// lexicographic tie-break between equally short words.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Generator {
    Rot,
    Swap,
}

impl Generator {
    pub fn letter(self) -> char {
        match self {
            Generator::Rot => 'p',
            Generator::Swap => 's',
        }
    }
}

pub fn word_to_string(word: &[Generator]) -> String {
    word.iter().map(|g| g.letter()).collect()
}

/// A shortest generator word for `perm`, the lexicographically least one with
/// `p < s` among all shortest words. The identity gets the empty word.
pub fn generator_word(perm: &Permutation) -> Result<Vec<Generator>, TermError> {
    let k = perm.size();
    if k < 2 {
        return Err(TermError::PermutationTooSmall(k));
    }
    if perm.is_identity() {
        return Ok(Vec::new());
    }
    let gens = [(Generator::Rot, Permutation::rot(k)?), (Generator::Swap, Permutation::swap(k)?)];
    // Appending letters in generator order keeps each BFS level in
    // lexicographic order, so the first word reaching a permutation is the
    // least shortest one.
    let mut parent: HashMap<Permutation, (Permutation, Generator)> = HashMap::new();
    let identity = Permutation::identity(k);
    let mut queue = VecDeque::from([identity.clone()]);
    while let Some(current) = queue.pop_front() {
        for (g, gp) in &gens {
            let next = current.compose(gp);
            if next == identity || parent.contains_key(&next) {
                continue;
            }
            parent.insert(next.clone(), (current.clone(), *g));
            if &next == perm {
                let mut word = Vec::new();
                let mut at = next;
                while at != identity {
                    let (prev, g) = parent[&at].clone();
                    word.push(g);
                    at = prev;
                }
                word.reverse();
                return Ok(word);
            }
            queue.push_back(next);
        }
    }
    unreachable!("p and s generate the full symmetric group")
}
