//! Permutations, generator sets, and a deterministic Schreier-Sims
//! stabilizer chain for order and membership queries.

use std::collections::VecDeque;

/// A permutation as an image table.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    img: Vec<u32>,
}

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        Permutation {
            img: (0..degree as u32).collect(),
        }
    }

    /// Validates bijectivity.
    pub fn from_images(img: Vec<u32>) -> Option<Self> {
        let n = img.len();
        let mut seen = vec![false; n];
        for &x in &img {
            if x as usize >= n || seen[x as usize] {
                return None;
            }
            seen[x as usize] = true;
        }
        Some(Permutation { img })
    }

    pub fn degree(&self) -> usize {
        self.img.len()
    }

    #[inline]
    pub fn apply(&self, x: u32) -> u32 {
        self.img[x as usize]
    }

    pub fn images(&self) -> &[u32] {
        &self.img
    }

    pub fn is_identity(&self) -> bool {
        self.img.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    /// `self` then `other`: (self * other)(x) = other(self(x)).
    pub fn then(&self, other: &Permutation) -> Permutation {
        debug_assert_eq!(self.degree(), other.degree());
        Permutation {
            img: self.img.iter().map(|&x| other.img[x as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut img = vec![0u32; self.img.len()];
        for (i, &x) in self.img.iter().enumerate() {
            img[x as usize] = i as u32;
        }
        Permutation { img }
    }

    pub fn commutes_with(&self, other: &Permutation) -> bool {
        self.then(other) == other.then(self)
    }

    /// Smallest point moved, if any.
    pub fn first_moved(&self) -> Option<u32> {
        self.img
            .iter()
            .enumerate()
            .find(|(i, &x)| *i as u32 != x)
            .map(|(i, _)| i as u32)
    }
}

/// A set of non-identity generators of common degree.
#[derive(Debug, Clone, Default)]
pub struct GeneratorSet {
    pub degree: usize,
    gens: Vec<Permutation>,
}

impl GeneratorSet {
    pub fn new(degree: usize) -> Self {
        GeneratorSet {
            degree,
            gens: Vec::new(),
        }
    }

    pub fn push(&mut self, p: Permutation) {
        assert_eq!(p.degree(), self.degree);
        if !p.is_identity() && !self.gens.contains(&p) {
            self.gens.push(p);
        }
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.gens
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    /// Orbit of `point` under the generated group, ascending.
    pub fn orbit(&self, point: u32) -> Vec<u32> {
        orbit_of(point, self.gens.iter(), self.degree)
    }
}

pub fn orbit_of<'a>(
    point: u32,
    gens: impl Iterator<Item = &'a Permutation> + Clone,
    degree: usize,
) -> Vec<u32> {
    let mut seen = vec![false; degree];
    let mut queue = VecDeque::new();
    seen[point as usize] = true;
    queue.push_back(point);
    let mut out = vec![point];
    while let Some(x) = queue.pop_front() {
        for g in gens.clone() {
            let y = g.apply(x);
            if !seen[y as usize] {
                seen[y as usize] = true;
                queue.push_back(y);
                out.push(y);
            }
        }
    }
    out.sort_unstable();
    out
}

struct ChainLevel {
    base: u32,
    gens: Vec<Permutation>,
    /// transversal[p] maps `base` to `p` when p is in the orbit.
    transversal: Vec<Option<Permutation>>,
}

impl ChainLevel {
    fn new(base: u32, degree: usize) -> Self {
        let mut transversal = vec![None; degree];
        transversal[base as usize] = Some(Permutation::identity(degree));
        ChainLevel {
            base,
            gens: Vec::new(),
            transversal,
        }
    }

    fn orbit_size(&self) -> u128 {
        self.transversal.iter().filter(|t| t.is_some()).count() as u128
    }
}

/// Deterministic Schreier-Sims run to a fixpoint: the transversal at level l
/// is built over the generators of every level >= l (all of which fix the
/// shallower base points), and every Schreier generator is sifted until no
/// new residues appear. `order` and `contains` are then exact.
pub struct StabilizerChain {
    degree: usize,
    levels: Vec<ChainLevel>,
}

impl StabilizerChain {
    pub fn build(gens: &GeneratorSet) -> StabilizerChain {
        let mut chain = StabilizerChain {
            degree: gens.degree,
            levels: Vec::new(),
        };
        for g in gens.generators() {
            chain.add_residue(g.clone());
        }
        loop {
            chain.rebuild_transversals();
            if !chain.close_under_schreier() {
                break;
            }
        }
        chain
    }

    /// Sift `p` through levels `from..`; returns the level at which it is not
    /// covered, if any, and the residue there.
    fn sift_from(&self, mut p: Permutation, from: usize) -> Option<(usize, Permutation)> {
        for lvl in from..self.levels.len() {
            let level = &self.levels[lvl];
            let img = p.apply(level.base);
            match &level.transversal[img as usize] {
                None => return Some((lvl, p)),
                Some(rep) => {
                    p = p.then(&rep.inverse());
                    debug_assert_eq!(p.apply(level.base), level.base);
                }
            }
        }
        if p.is_identity() {
            None
        } else {
            Some((self.levels.len(), p))
        }
    }

    /// Record a nontrivial sift residue at its level, opening a new level
    /// when it fixes every existing base point. Returns true when something
    /// was added.
    fn add_residue(&mut self, p: Permutation) -> bool {
        let Some((lvl, residue)) = self.sift_from(p, 0) else {
            return false;
        };
        if lvl == self.levels.len() {
            let base = residue
                .first_moved()
                .expect("non-identity residue moves a point");
            self.levels.push(ChainLevel::new(base, self.degree));
        }
        self.levels[lvl].gens.push(residue);
        true
    }

    fn rebuild_transversals(&mut self) {
        for lvl in 0..self.levels.len() {
            let base = self.levels[lvl].base;
            let mut transversal: Vec<Option<Permutation>> = vec![None; self.degree];
            transversal[base as usize] = Some(Permutation::identity(self.degree));
            let mut queue: VecDeque<u32> = VecDeque::new();
            queue.push_back(base);
            while let Some(x) = queue.pop_front() {
                for deeper in lvl..self.levels.len() {
                    for g in &self.levels[deeper].gens {
                        let y = g.apply(x);
                        if transversal[y as usize].is_none() {
                            let rep_x = transversal[x as usize].clone().unwrap();
                            transversal[y as usize] = Some(rep_x.then(g));
                            queue.push_back(y);
                        }
                    }
                }
            }
            self.levels[lvl].transversal = transversal;
        }
    }

    /// Sift every Schreier generator of every level; returns true when a new
    /// residue was recorded (transversals must then be rebuilt).
    fn close_under_schreier(&mut self) -> bool {
        let mut added = false;
        for lvl in 0..self.levels.len() {
            let points: Vec<u32> = (0..self.degree as u32)
                .filter(|&p| self.levels[lvl].transversal[p as usize].is_some())
                .collect();
            let gens: Vec<Permutation> = (lvl..self.levels.len())
                .flat_map(|d| self.levels[d].gens.clone())
                .collect();
            for &x in &points {
                let rep_x = self.levels[lvl].transversal[x as usize].clone().unwrap();
                for g in &gens {
                    let y = g.apply(x);
                    let Some(rep_y) = self.levels[lvl].transversal[y as usize].clone() else {
                        // orbit incomplete; a rebuild is pending
                        return true;
                    };
                    let s = rep_x.then(g).then(&rep_y.inverse());
                    if !s.is_identity() && self.add_residue(s) {
                        added = true;
                    }
                }
            }
            if added {
                // new residues change deeper levels; rebuild before going on
                return true;
            }
        }
        added
    }

    pub fn order(&self) -> u128 {
        self.levels.iter().map(|l| l.orbit_size()).product()
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        if p.degree() != self.degree {
            return false;
        }
        self.sift_from(p.clone(), 0).is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perm(img: &[u32]) -> Permutation {
        Permutation::from_images(img.to_vec()).unwrap()
    }

    #[test]
    fn s3_order_six() {
        let mut gens = GeneratorSet::new(3);
        gens.push(perm(&[1, 0, 2]));
        gens.push(perm(&[1, 2, 0]));
        assert_eq!(StabilizerChain::build(&gens).order(), 6);
    }

    #[test]
    fn empty_is_trivial() {
        let gens = GeneratorSet::new(5);
        let chain = StabilizerChain::build(&gens);
        assert_eq!(chain.order(), 1);
        assert!(chain.contains(&Permutation::identity(5)));
        assert!(!chain.contains(&perm(&[1, 0, 2, 3, 4])));
    }

    #[test]
    fn cyclic_c5() {
        let mut gens = GeneratorSet::new(5);
        gens.push(perm(&[1, 2, 3, 4, 0]));
        let chain = StabilizerChain::build(&gens);
        assert_eq!(chain.order(), 5);
        assert!(chain.contains(&perm(&[2, 3, 4, 0, 1])));
        assert!(!chain.contains(&perm(&[1, 0, 2, 3, 4])));
    }

    #[test]
    fn s8_full() {
        let mut gens = GeneratorSet::new(8);
        gens.push(perm(&[1, 0, 2, 3, 4, 5, 6, 7]));
        gens.push(perm(&[1, 2, 3, 4, 5, 6, 7, 0]));
        assert_eq!(StabilizerChain::build(&gens).order(), 40320);
    }

    #[test]
    fn orbit_and_commutation() {
        let mut gens = GeneratorSet::new(4);
        gens.push(perm(&[1, 0, 3, 2]));
        gens.push(perm(&[2, 3, 0, 1]));
        assert_eq!(gens.orbit(0), vec![0, 1, 2, 3]);
        // Klein four-group: all generators commute.
        assert!(gens.generators()[0].commutes_with(&gens.generators()[1]));
        assert_eq!(StabilizerChain::build(&gens).order(), 4);
    }
}
