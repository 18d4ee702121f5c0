use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{jq_element, jq_index, jq_multiply, GroupElement, GroupShape};

/// A bijection of `{0, .., n-1}`; `p[x]` is the image of `x`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Permutation(Vec<u32>);

impl Permutation {
    pub fn new(images: Vec<u32>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &v in &images {
            let v = v as usize;
            if v >= n || seen[v] {
                return Err(Error::invalid("map is not a bijection"));
            }
            seen[v] = true;
        }
        Ok(Permutation(images))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n as u32).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn images(&self) -> &[u32] {
        &self.0
    }

    pub fn apply(&self, x: usize) -> usize {
        self.0[x] as usize
    }

    /// `self o other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Permutation(other.0.iter().map(|&x| self.0[x as usize]).collect())
    }

    pub fn inverse(&self) -> Self {
        let mut out = vec![0u32; self.0.len()];
        for (x, &y) in self.0.iter().enumerate() {
            out[y as usize] = x as u32;
        }
        Permutation(out)
    }

    pub fn pow(&self, e: i128) -> Self {
        let mut base = if e < 0 { self.inverse() } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Permutation::identity(self.len());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            e >>= 1;
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &v)| i == v as usize)
    }

    /// `[S, T] = S^{-1} T^{-1} S T`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.inverse().compose(&other.inverse()).compose(self).compose(other)
    }
}

/// Cycle tables of a permutation for O(1) powers `T^e x`.
#[derive(Clone, Debug)]
pub(crate) struct CycleTable {
    cycle_of: Vec<u32>,
    pos: Vec<u32>,
    cycles: Vec<Vec<u32>>,
}

impl CycleTable {
    pub(crate) fn new(p: &Permutation) -> Self {
        let n = p.len();
        let mut cycle_of = vec![u32::MAX; n];
        let mut pos = vec![0u32; n];
        let mut cycles = Vec::new();
        for start in 0..n {
            if cycle_of[start] != u32::MAX {
                continue;
            }
            let id = cycles.len() as u32;
            let mut cyc = Vec::new();
            let mut x = start;
            while cycle_of[x] == u32::MAX {
                cycle_of[x] = id;
                pos[x] = cyc.len() as u32;
                cyc.push(x as u32);
                x = p.apply(x);
            }
            cycles.push(cyc);
        }
        CycleTable { cycle_of, pos, cycles }
    }

    pub(crate) fn cycle_len(&self, x: usize) -> u64 {
        self.cycles[self.cycle_of[x] as usize].len() as u64
    }

    /// `T^e x` with `e` already reduced mod the cycle length of `x`.
    pub(crate) fn step(&self, x: usize, e: u64) -> usize {
        let c = &self.cycles[self.cycle_of[x] as usize];
        c[((self.pos[x] as u64 + e) % c.len() as u64) as usize] as usize
    }
}

/// How a system was built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemSpec {
    /// `Z_M` with `T x = x + 1`.
    Cyclic { m: usize },
    /// `J_Q` for `G0(d)` with `T_i` the left translation by the `i`-th generator.
    HeisenbergQuotient { d: usize, q: i128 },
    Custom { points: usize, generators: Vec<Vec<u32>> },
}

/// A finite set with counting measure and invertible generators `T_1, .., T_{d1}`
/// generating a nilpotent group of step two.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NilSystem {
    pub spec: SystemSpec,
    points: usize,
    generators: Vec<Permutation>,
}

/// Largest system the builders will construct.
pub const MAX_POINTS: usize = 1 << 22;

impl NilSystem {
    pub fn build(spec: &SystemSpec) -> Result<Self> {
        let (points, generators) = match spec {
            SystemSpec::Cyclic { m } => {
                if *m == 0 || *m > MAX_POINTS {
                    return Err(Error::invalid(format!("cyclic system needs 1 <= M <= {MAX_POINTS}, got {m}")));
                }
                let t = (0..*m as u32).map(|x| (x + 1) % *m as u32).collect();
                (*m, vec![Permutation(t)])
            }
            SystemSpec::HeisenbergQuotient { d, q } => {
                let shape = GroupShape::new(*d)?;
                if *q < 1 {
                    return Err(Error::invalid(format!("modulus Q must be >= 1, got {q}")));
                }
                let size = (*q as u128).checked_pow(shape.len() as u32).filter(|s| *s <= MAX_POINTS as u128);
                let size = size.ok_or_else(|| Error::infeasible(format!("|J_Q| = Q^{} is too large for Q = {q}", shape.len())))? as usize;
                let mut gens = Vec::with_capacity(*d);
                for i in 0..*d {
                    let mut c = vec![0i128; shape.len()];
                    c[i] = 1;
                    let e = GroupElement::new(shape, c)?;
                    let imgs = (0..size)
                        .map(|x| Ok(jq_index(&jq_multiply(&e, &jq_element(x, shape, *q), *q)?, *q) as u32))
                        .collect::<Result<Vec<_>>>()?;
                    gens.push(Permutation(imgs));
                }
                (size, gens)
            }
            SystemSpec::Custom { points, generators } => {
                let gens = generators.iter().map(|g| Permutation::new(g.clone())).collect::<Result<Vec<_>>>()?;
                if gens.iter().any(|g| g.len() != *points) {
                    return Err(Error::invalid("every generator must act on all points"));
                }
                (*points, gens)
            }
        };
        if generators.is_empty() {
            return Err(Error::invalid("a system needs at least one generator"));
        }
        let sys = NilSystem { spec: spec.clone(), points, generators };
        if let Some((i, j, l)) = sys.step_two_violation() {
            return Err(Error::invalid(format!("[[T_{i}, T_{j}], T_{l}] is not the identity: not step-two nilpotent", i = i + 1, j = j + 1, l = l + 1)));
        }
        Ok(sys)
    }

    pub fn cyclic(m: usize) -> Result<Self> {
        Self::build(&SystemSpec::Cyclic { m })
    }

    pub fn heisenberg_quotient(d: usize, q: i128) -> Result<Self> {
        Self::build(&SystemSpec::HeisenbergQuotient { d, q })
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points == 0
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn arity(&self) -> usize {
        self.generators.len()
    }

    /// First triple with `[[T_i, T_j], T_l] != Id`.
    pub fn step_two_violation(&self) -> Option<(usize, usize, usize)> {
        let g = &self.generators;
        for i in 0..g.len() {
            for j in 0..g.len() {
                let s = g[i].commutator(&g[j]);
                for (l, t) in g.iter().enumerate() {
                    if !s.commutator(t).is_identity() {
                        return Some((i, j, l));
                    }
                }
            }
        }
        None
    }

    /// `S_{ij} = [T_i, T_j]`.
    pub fn s(&self, i: usize, j: usize) -> Permutation {
        self.generators[i].commutator(&self.generators[j])
    }
}

/// Both sides of
/// `prod_i T_i^{m_i} prod_j T_j^{n_j} = prod_j T_j^{m_j + n_j} prod_{i < j} S_{ji}^{m_j n_i}`
/// as permutations.
pub fn commutator_identity_sides(sys: &NilSystem, m: &[i128], n: &[i128]) -> Result<(Permutation, Permutation)> {
    let d1 = sys.arity();
    if m.len() != d1 || n.len() != d1 {
        return Err(Error::invalid(format!("need {d1} exponents on each side")));
    }
    let g = sys.generators();
    let mut lhs = Permutation::identity(sys.len());
    for (t, &e) in g.iter().zip(m).chain(g.iter().zip(n)) {
        lhs = lhs.compose(&t.pow(e));
    }
    let mut rhs = Permutation::identity(sys.len());
    for (j, t) in g.iter().enumerate() {
        rhs = rhs.compose(&t.pow(m[j] + n[j]));
    }
    for j in 0..d1 {
        for i in 0..j {
            let e = m[j].checked_mul(n[i]).ok_or(Error::Overflow("commutator exponent"))?;
            rhs = rhs.compose(&sys.s(j, i).pow(e));
        }
    }
    Ok((lhs, rhs))
}

pub fn commutator_identity_check(sys: &NilSystem, m: &[i128], n: &[i128]) -> Result<bool> {
    let (l, r) = commutator_identity_sides(sys, m, n)?;
    Ok(l == r)
}
