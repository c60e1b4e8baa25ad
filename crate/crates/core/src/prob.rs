//! Dense finite-alphabet probability tables and the information measures
//! built on them (entropy, mutual information, conditional mutual
//! information, KL divergence). Logarithms are base 2 throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on probability sums. Tables off by less than this are
/// renormalised, anything further off is rejected.
pub const PROB_TOL: f64 = 1e-9;

fn check_probs(probs: &[f64], what: &str) -> Result<f64> {
    if probs.is_empty() {
        return Err(Error::Validation(format!("{what}: empty support")));
    }
    for (i, &p) in probs.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::Validation(format!("{what}: entry {i} is {p}")));
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(Error::Validation(format!("{what}: entries sum to {sum}")));
    }
    Ok(sum)
}

fn renormalize(probs: &mut [f64], sum: f64) {
    if sum != 1.0 {
        probs.iter_mut().for_each(|p| *p /= sum);
    }
}

/// `p log2 p` with the convention `0 log 0 = 0`.
#[inline]
pub(crate) fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

/// A probability mass function on `{0, .., len-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        let sum = check_probs(&probs, "pmf")?;
        renormalize(&mut probs, sum);
        Ok(Self { probs })
    }

    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::Validation("pmf: empty support".into()));
        }
        Ok(Self { probs: vec![1.0 / size as f64; size] })
    }

    pub fn point_mass(size: usize, at: usize) -> Result<Self> {
        if at >= size {
            return Err(Error::Usage(format!("point mass at {at} outside support of size {size}")));
        }
        let mut probs = vec![0.0; size];
        probs[at] = 1.0;
        Ok(Self { probs })
    }

    /// `(1-p, p)`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("bernoulli parameter {p} outside [0,1]")));
        }
        Ok(Self { probs: vec![1.0 - p, p] })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }
}

impl TryFrom<Vec<f64>> for Pmf {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Pmf::new(v)
    }
}

impl From<Pmf> for Vec<f64> {
    fn from(p: Pmf) -> Self {
        p.probs
    }
}

/// A channel `P(out | in)`, stored row-major: one row per input symbol.
///
/// Inputs that are tuples (e.g. `(u1, x2)`) are flattened in mixed-radix
/// order, first component most significant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct CondPmf {
    input_size: usize,
    output_size: usize,
    table: Vec<f64>,
}

impl CondPmf {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let input_size = rows.len();
        if input_size == 0 {
            return Err(Error::Validation("channel: no rows".into()));
        }
        let output_size = rows[0].len();
        let mut table = Vec::with_capacity(input_size * output_size);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != output_size {
                return Err(Error::Validation(format!(
                    "channel: row {i} has {} entries, expected {output_size}",
                    row.len()
                )));
            }
            table.extend(row);
        }
        Self::from_flat(input_size, output_size, table)
    }

    pub fn from_flat(input_size: usize, output_size: usize, mut table: Vec<f64>) -> Result<Self> {
        if input_size == 0 || output_size == 0 {
            return Err(Error::Validation("channel: empty alphabet".into()));
        }
        if table.len() != input_size * output_size {
            return Err(Error::Validation(format!(
                "channel: {} entries for a {input_size}x{output_size} table",
                table.len()
            )));
        }
        for (i, row) in table.chunks_mut(output_size).enumerate() {
            let sum = check_probs(row, &format!("channel row {i}"))?;
            renormalize(row, sum);
        }
        Ok(Self { input_size, output_size, table })
    }

    /// Identity channel on an alphabet of `size` symbols.
    pub fn identity(size: usize) -> Result<Self> {
        let mut table = vec![0.0; size * size];
        for i in 0..size {
            table[i * size + i] = 1.0;
        }
        Self::from_flat(size, size, table)
    }

    /// Every row equal to `row`: the output ignores the input.
    pub fn constant(input_size: usize, row: &Pmf) -> Result<Self> {
        let table = row.probs().repeat(input_size);
        Self::from_flat(input_size, row.len(), table)
    }

    /// Binary symmetric channel with the given crossover probability.
    pub fn bsc(crossover: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&crossover) {
            return Err(Error::Domain(format!("crossover {crossover} outside [0,1]")));
        }
        Self::from_flat(2, 2, vec![1.0 - crossover, crossover, crossover, 1.0 - crossover])
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    pub fn row(&self, input: usize) -> &[f64] {
        &self.table[input * self.output_size..(input + 1) * self.output_size]
    }

    pub fn get(&self, input: usize, output: usize) -> f64 {
        self.table[input * self.output_size + output]
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.table.chunks(self.output_size).map(<[f64]>::to_vec).collect()
    }

    /// Output distribution when the input is drawn from `input`.
    pub fn push_forward(&self, input: &Pmf) -> Result<Pmf> {
        if input.len() != self.input_size {
            return Err(Error::Usage(format!(
                "input pmf has {} symbols, channel expects {}",
                input.len(),
                self.input_size
            )));
        }
        let mut out = vec![0.0; self.output_size];
        for (i, &pi) in input.probs().iter().enumerate() {
            for (o, &w) in self.row(i).iter().enumerate() {
                out[o] += pi * w;
            }
        }
        Pmf::new(out)
    }
}

impl TryFrom<Vec<Vec<f64>>> for CondPmf {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        CondPmf::from_rows(rows)
    }
}

impl From<CondPmf> for Vec<Vec<f64>> {
    fn from(c: CondPmf) -> Self {
        c.rows()
    }
}

/// A joint pmf over several named variables, stored densely in row-major
/// (mixed-radix) order with the last axis varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointPmf {
    names: Vec<String>,
    sizes: Vec<usize>,
    probs: Vec<f64>,
}

impl JointPmf {
    pub fn new(names: Vec<String>, sizes: Vec<usize>, mut probs: Vec<f64>) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::Validation(format!("joint: bad axis sizes {sizes:?}")));
        }
        if names.len() != sizes.len() {
            return Err(Error::Usage(format!(
                "joint: {} names for {} axes",
                names.len(),
                sizes.len()
            )));
        }
        let cells: usize = sizes.iter().product();
        if probs.len() != cells {
            return Err(Error::Validation(format!(
                "joint: {} entries for axis sizes {sizes:?}",
                probs.len()
            )));
        }
        let sum = check_probs(&probs, "joint")?;
        renormalize(&mut probs, sum);
        Ok(Self { names, sizes, probs })
    }

    /// Builds a joint with axes named `X0, X1, ..`.
    pub fn unnamed(sizes: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let names = (0..sizes.len()).map(|i| format!("X{i}")).collect();
        Self::new(names, sizes, probs)
    }

    pub fn from_pmf(name: &str, p: &Pmf) -> Self {
        Self { names: vec![name.to_string()], sizes: vec![p.len()], probs: p.probs().to_vec() }
    }

    /// Product joint of independent marginals.
    pub fn product(factors: &[(&str, &Pmf)]) -> Result<Self> {
        let mut probs = vec![1.0];
        for (_, p) in factors {
            probs = probs.iter().flat_map(|&a| p.probs().iter().map(move |&b| a * b)).collect();
        }
        Self::new(
            factors.iter().map(|(n, _)| n.to_string()).collect(),
            factors.iter().map(|(_, p)| p.len()).collect(),
            probs,
        )
    }

    /// Extends the joint with a new last axis drawn through `channel`, whose
    /// input is the (mixed-radix) tuple of the axes in `parents`.
    pub fn extend_with(&self, name: &str, parents: &[usize], channel: &CondPmf) -> Result<Self> {
        self.check_axes(parents, true)?;
        let parent_size: usize = parents.iter().map(|&a| self.sizes[a]).product();
        if channel.input_size() != parent_size {
            return Err(Error::Usage(format!(
                "channel for {name} has {} inputs, parents span {parent_size}",
                channel.input_size()
            )));
        }
        let out = channel.output_size();
        let mut probs = Vec::with_capacity(self.probs.len() * out);
        let mut idx = vec![0usize; self.sizes.len()];
        for &p in &self.probs {
            let input = parents.iter().fold(0, |acc, &a| acc * self.sizes[a] + idx[a]);
            probs.extend(channel.row(input).iter().map(|&w| p * w));
            self.advance(&mut idx);
        }
        let mut names = self.names.clone();
        names.push(name.to_string());
        let mut sizes = self.sizes.clone();
        sizes.push(out);
        Self::new(names, sizes, probs)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn num_axes(&self) -> usize {
        self.sizes.len()
    }

    pub fn axis(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Probability of a full index tuple.
    pub fn get(&self, index: &[usize]) -> f64 {
        let flat = index.iter().zip(&self.sizes).fold(0, |acc, (&i, &s)| acc * s + i);
        self.probs[flat]
    }

    fn advance(&self, idx: &mut [usize]) {
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            if idx[k] < self.sizes[k] {
                return;
            }
            idx[k] = 0;
        }
    }

    fn check_axes(&self, axes: &[usize], allow_empty: bool) -> Result<()> {
        if axes.is_empty() && !allow_empty {
            return Err(Error::Usage("empty axis set".into()));
        }
        for (i, &a) in axes.iter().enumerate() {
            if a >= self.sizes.len() {
                return Err(Error::Usage(format!(
                    "axis {a} out of range for a {}-axis joint",
                    self.sizes.len()
                )));
            }
            if axes[..i].contains(&a) {
                return Err(Error::Usage(format!("axis {a} listed twice")));
            }
        }
        Ok(())
    }

    /// Sums out every axis not in `keep`. Kept axes retain their original
    /// relative order.
    pub fn marginalize(&self, keep: &[usize]) -> Result<JointPmf> {
        self.check_axes(keep, false)?;
        let mut keep: Vec<usize> = keep.to_vec();
        keep.sort_unstable();
        let sizes: Vec<usize> = keep.iter().map(|&a| self.sizes[a]).collect();
        let probs = self.grouped(&[&keep])?;
        Ok(JointPmf {
            names: keep.iter().map(|&a| self.names[a].clone()).collect(),
            sizes,
            probs,
        })
    }

    /// Marginal of a single axis as a [`Pmf`].
    pub fn marginal_pmf(&self, axis: usize) -> Result<Pmf> {
        self.check_axes(&[axis], false)?;
        Pmf::new(self.grouped(&[&[axis]])?)
    }

    /// Dense table of the marginal over the concatenation of `groups`, each
    /// group collapsed into one composite index (in the order listed).
    /// The result is indexed `[g0][g1]..` row-major.
    pub(crate) fn grouped(&self, groups: &[&[usize]]) -> Result<Vec<f64>> {
        let all: Vec<usize> = groups.iter().flat_map(|g| g.iter().copied()).collect();
        self.check_axes(&all, false)?;
        let out_len: usize = all.iter().map(|&a| self.sizes[a]).product();
        let mut out = vec![0.0; out_len];
        let mut idx = vec![0usize; self.sizes.len()];
        for &p in &self.probs {
            let flat = all.iter().fold(0, |acc, &a| acc * self.sizes[a] + idx[a]);
            out[flat] += p;
            self.advance(&mut idx);
        }
        Ok(out)
    }

    fn group_size(&self, group: &[usize]) -> usize {
        group.iter().map(|&a| self.sizes[a]).product()
    }

    fn check_disjoint(&self, groups: &[&[usize]]) -> Result<()> {
        for (i, g) in groups.iter().enumerate() {
            if g.is_empty() {
                return Err(Error::Usage("empty variable group".into()));
            }
            self.check_axes(g, false)?;
            for h in &groups[..i] {
                if g.iter().any(|a| h.contains(a)) {
                    return Err(Error::Usage(format!("variable groups {h:?} and {g:?} overlap")));
                }
            }
        }
        Ok(())
    }
}

/// Shannon entropy in bits.
pub fn entropy(p: &Pmf) -> f64 {
    (-p.probs().iter().map(|&x| plogp(x)).sum::<f64>()).max(0.0)
}

/// `h_b(p) = -p log2 p - (1-p) log2 (1-p)`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("binary entropy argument {p} outside [0,1]")));
    }
    Ok(-(plogp(p) + plogp(1.0 - p)))
}

/// `D(p||q)` in bits; `f64::INFINITY` when `p` is not absolutely continuous
/// with respect to `q`.
pub fn kl_divergence(p: &Pmf, q: &Pmf) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Usage(format!("support sizes differ: {} vs {}", p.len(), q.len())));
    }
    let mut d = 0.0;
    for (&a, &b) in p.probs().iter().zip(q.probs()) {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return Ok(f64::INFINITY);
        }
        d += a * (a / b).log2();
    }
    Ok(d.max(0.0))
}

/// `I(A;B)` from a dense `[a][b]` table.
pub(crate) fn mi_table(p: &[f64], na: usize, nb: usize) -> f64 {
    let mut pa = vec![0.0; na];
    let mut pb = vec![0.0; nb];
    for a in 0..na {
        for b in 0..nb {
            let v = p[a * nb + b];
            pa[a] += v;
            pb[b] += v;
        }
    }
    let mut i = 0.0;
    for a in 0..na {
        for b in 0..nb {
            let v = p[a * nb + b];
            if v > 0.0 {
                i += v * (v / (pa[a] * pb[b])).log2();
            }
        }
    }
    i
}

/// `I(A;B|C)` from a dense `[a][b][c]` table.
pub(crate) fn cmi_table(p: &[f64], na: usize, nb: usize, nc: usize) -> f64 {
    let mut pc = vec![0.0; nc];
    let mut pac = vec![0.0; na * nc];
    let mut pbc = vec![0.0; nb * nc];
    for a in 0..na {
        for b in 0..nb {
            for c in 0..nc {
                let v = p[(a * nb + b) * nc + c];
                pc[c] += v;
                pac[a * nc + c] += v;
                pbc[b * nc + c] += v;
            }
        }
    }
    let mut i = 0.0;
    for a in 0..na {
        for b in 0..nb {
            for c in 0..nc {
                let v = p[(a * nb + b) * nc + c];
                if v > 0.0 {
                    i += v * (v * pc[c] / (pac[a * nc + c] * pbc[b * nc + c])).log2();
                }
            }
        }
    }
    i
}

/// `I(A;B)` between two disjoint groups of axes.
pub fn mutual_information(j: &JointPmf, a: &[usize], b: &[usize]) -> Result<f64> {
    j.check_disjoint(&[a, b])?;
    let table = j.grouped(&[a, b])?;
    Ok(mi_table(&table, j.group_size(a), j.group_size(b)).max(0.0))
}

/// `I(A;B|C)` between three pairwise-disjoint groups of axes.
pub fn conditional_mutual_information(
    j: &JointPmf,
    a: &[usize],
    b: &[usize],
    c: &[usize],
) -> Result<f64> {
    j.check_disjoint(&[a, b, c])?;
    let table = j.grouped(&[a, b, c])?;
    Ok(cmi_table(&table, j.group_size(a), j.group_size(b), j.group_size(c)).max(0.0))
}

/// Axis positions in the joint returned by [`build_cooperative_joint`].
pub mod axes {
    pub const U1: usize = 0;
    pub const U2: usize = 1;
    pub const X1: usize = 2;
    pub const X2: usize = 3;
    pub const Y: usize = 4;
}

/// `P(u1,u2,x1,x2,y) = P(u1|x1) P(u2|u1,x2) P(x1,x2) P(y|x2)` with axes
/// ordered `(U1, U2, X1, X2, Y)`.
///
/// `px1x2` must be a two-axis joint over `(X1, X2)`; `pu2_given_u1x2` is
/// indexed by `u1 * |X2| + x2`.
pub fn build_cooperative_joint(
    px1x2: &JointPmf,
    py_given_x2: &CondPmf,
    pu1_given_x1: &CondPmf,
    pu2_given_u1x2: &CondPmf,
) -> Result<JointPmf> {
    if px1x2.num_axes() != 2 {
        return Err(Error::Usage("P_{X1X2} must have exactly two axes".into()));
    }
    let (nx1, nx2) = (px1x2.sizes()[0], px1x2.sizes()[1]);
    if py_given_x2.input_size() != nx2 {
        return Err(Error::Usage(format!(
            "P_{{Y|X2}} has {} inputs, |X2| = {nx2}",
            py_given_x2.input_size()
        )));
    }
    if pu1_given_x1.input_size() != nx1 {
        return Err(Error::Usage(format!(
            "P_{{U1|X1}} has {} inputs, |X1| = {nx1}",
            pu1_given_x1.input_size()
        )));
    }
    let nu1 = pu1_given_x1.output_size();
    if pu2_given_u1x2.input_size() != nu1 * nx2 {
        return Err(Error::Usage(format!(
            "P_{{U2|U1X2}} has {} inputs, |U1||X2| = {}",
            pu2_given_u1x2.input_size(),
            nu1 * nx2
        )));
    }
    let nu2 = pu2_given_u1x2.output_size();
    let ny = py_given_x2.output_size();
    let mut probs = Vec::with_capacity(nu1 * nu2 * nx1 * nx2 * ny);
    for u1 in 0..nu1 {
        for u2 in 0..nu2 {
            for x1 in 0..nx1 {
                let a = pu1_given_x1.get(x1, u1);
                for x2 in 0..nx2 {
                    let b = pu2_given_u1x2.get(u1 * nx2 + x2, u2);
                    let base = a * b * px1x2.probs()[x1 * nx2 + x2];
                    probs.extend(py_given_x2.row(x2).iter().map(|&w| base * w));
                }
            }
        }
    }
    JointPmf::new(
        ["U1", "U2", "X1", "X2", "Y"].iter().map(|s| s.to_string()).collect(),
        vec![nu1, nu2, nx1, nx2, ny],
        probs,
    )
}
