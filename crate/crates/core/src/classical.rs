//! Classical protocols with one one-bit message per non-answering party.
//!
//! Messages flow along a [`CommTree`] whose root is the last party, which
//! announces the answer instead of sending. Any protocol of this class that
//! is better than random has the product form
//! `e_N = prod_k a_k(x_k) y_k`, so the optimum can be searched over
//! [`ProductStrategyA`] / [`ProductStrategyB`]. For small `N` the search over
//! *all* message tables ([`brute_force_bound_a`]) certifies that reduction.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::{self, RandomStream};
use crate::task::{self, decompose_angle, decompose_digit, InputTuple, InputTupleA, Sign, TaskId};

/// Largest party count for exact task A product-strategy evaluation.
pub const MAX_EXACT_PARTIES_A: usize = 24;

/// Largest party count for exhaustive search over general protocols.
pub const MAX_BRUTE_FORCE_PARTIES: usize = 3;

pub const DEFAULT_GRID_CELLS: usize = 64;
pub const DEFAULT_RESTARTS: usize = 20;

/// Who sends to whom. Parties are numbered `0..N`; party `N - 1` is the
/// root and announces the result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommTree {
    parent: Vec<usize>,
}

impl CommTree {
    /// `parent[k]` is the recipient of party `k`'s message, for
    /// `k in 0..N-1`.
    pub fn new(parent: Vec<usize>) -> Result<Self> {
        let n = parent.len() + 1;
        for (k, &p) in parent.iter().enumerate() {
            if p >= n {
                return Err(Error::InvalidTree(format!(
                    "party {k} sends to nonexistent party {p}"
                )));
            }
            if p == k {
                return Err(Error::InvalidTree(format!("party {k} sends to itself")));
            }
        }
        for start in 0..parent.len() {
            let mut at = start;
            let mut steps = 0;
            while at != n - 1 {
                at = parent[at];
                steps += 1;
                if steps > n {
                    return Err(Error::InvalidTree(format!(
                        "party {start} is on a cycle that never reaches the root"
                    )));
                }
            }
        }
        Ok(CommTree { parent })
    }

    /// `P_1 -> P_2 -> ... -> P_N`.
    pub fn chain(n: usize) -> Result<Self> {
        check_parties(n)?;
        CommTree::new((1..n).collect())
    }

    /// Every party sends straight to the root.
    pub fn star(n: usize) -> Result<Self> {
        check_parties(n)?;
        CommTree::new(vec![n - 1; n - 1])
    }

    pub fn parties(&self) -> usize {
        self.parent.len() + 1
    }

    pub fn root(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, party: usize) -> Option<usize> {
        self.parent.get(party).copied()
    }

    /// Senders to `party`, ascending.
    pub fn children(&self, party: usize) -> Vec<usize> {
        self.parent
            .iter()
            .enumerate()
            .filter(|&(_, &p)| p == party)
            .map(|(k, _)| k)
            .collect()
    }

    /// Post-order from the root: every party appears after all of its
    /// children, the root last.
    pub fn evaluation_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.parties());
        self.post_order(self.root(), &mut order);
        order
    }

    fn post_order(&self, party: usize, out: &mut Vec<usize>) {
        for c in self.children(party) {
            self.post_order(c, out);
        }
        out.push(party);
    }

    pub fn label(&self) -> String {
        let n = self.parties();
        if n <= 2 {
            return "chain".into();
        }
        if self.parent.iter().enumerate().all(|(k, &p)| p == k + 1) {
            "chain".into()
        } else if self.parent.iter().all(|&p| p == n - 1) {
            "star".into()
        } else {
            format!("{:?}", self.parent)
        }
    }
}

fn check_parties(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::NoParties)
    } else {
        Ok(())
    }
}

/// A single party's private input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocalInput {
    Digit(u8),
    Angle(f64),
}

impl LocalInput {
    fn all(x: &InputTuple) -> Vec<LocalInput> {
        match x {
            InputTuple::A(a) => a.digits().iter().map(|&d| LocalInput::Digit(d)).collect(),
            InputTuple::B(b) => b.angles().iter().map(|&v| LocalInput::Angle(v)).collect(),
        }
    }
}

/// A classical one-bit-per-party protocol.
pub trait Protocol: Sync {
    fn task(&self) -> TaskId;

    fn parties(&self) -> usize;

    /// The bit sent by `party` (the answer, for the root), given its own
    /// input and the bits received from its children in ascending order.
    fn message(&self, party: usize, input: LocalInput, received: &[Sign]) -> Result<Sign>;

    /// Trees this protocol can run on. Defaults to any tree.
    fn check_tree(&self, tree: &CommTree) -> Result<()> {
        let _ = tree;
        Ok(())
    }
}

/// Simulate the message passing along `tree` and return the root's answer.
pub fn run_protocol<P: Protocol + ?Sized>(
    proto: &P,
    tree: &CommTree,
    input: &InputTuple,
) -> Result<Sign> {
    let n = proto.parties();
    if input.task() != proto.task() {
        return Err(Error::TaskMismatch {
            expected: proto.task(),
            found: input.task(),
        });
    }
    for found in [tree.parties(), input.parties()] {
        if found != n {
            return Err(Error::ArityMismatch { expected: n, found });
        }
    }
    proto.check_tree(tree)?;
    let locals = LocalInput::all(input);
    let mut sent: Vec<Option<Sign>> = vec![None; n];
    let mut received = Vec::new();
    for party in tree.evaluation_order() {
        received.clear();
        received.extend(
            tree.children(party)
                .into_iter()
                .map(|c| sent[c].expect("children are evaluated first")),
        );
        sent[party] = Some(proto.message(party, locals[party], &received)?);
    }
    Ok(sent[tree.root()].expect("root evaluated last"))
}

/// Local sign tables `(a_k(0), a_k(1))` for task A.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductStrategyA {
    pub a: Vec<[Sign; 2]>,
}

impl ProductStrategyA {
    pub fn new(a: Vec<[Sign; 2]>) -> Result<Self> {
        check_parties(a.len())?;
        Ok(ProductStrategyA { a })
    }

    pub fn constant(n: usize) -> Self {
        ProductStrategyA {
            a: vec![[Sign::Plus; 2]; n],
        }
    }

    /// Strategy number `index` in `0..4^N`: bit `2k + x` set means
    /// `a_k(x) = -1`.
    pub fn from_index(n: usize, index: u64) -> Self {
        let a = (0..n)
            .map(|k| [0, 1].map(|x| Sign::from_bool((index >> (2 * k + x)) & 1 == 0)))
            .collect();
        ProductStrategyA { a }
    }

    pub fn index(&self) -> u64 {
        self.a
            .iter()
            .enumerate()
            .flat_map(|(k, pair)| pair.iter().enumerate().map(move |(x, s)| (2 * k + x, s)))
            .filter(|(_, s)| !s.is_plus())
            .fold(0u64, |acc, (bit, _)| acc | (1 << bit))
    }

    pub fn local(&self, party: usize, bit: u8) -> Sign {
        self.a[party][usize::from(bit & 1)]
    }
}

impl Protocol for ProductStrategyA {
    fn task(&self) -> TaskId {
        TaskId::A
    }

    fn parties(&self) -> usize {
        self.a.len()
    }

    fn message(&self, party: usize, input: LocalInput, received: &[Sign]) -> Result<Sign> {
        let LocalInput::Digit(d) = input else {
            return Err(Error::TaskMismatch {
                expected: TaskId::A,
                found: TaskId::B,
            });
        };
        let (x, y) = decompose_digit(d);
        Ok(y * self.local(party, x) * received.iter().copied().product())
    }
}

/// Piecewise-constant local sign functions on `M` uniform cells of
/// `[0, pi)`, for task B.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductStrategyB {
    cells: Vec<Vec<Sign>>,
}

impl ProductStrategyB {
    pub fn new(cells: Vec<Vec<Sign>>) -> Result<Self> {
        check_parties(cells.len())?;
        let m = cells[0].len();
        if m < 2 {
            return Err(Error::InvalidStrategy(format!(
                "grid needs at least 2 cells, got {m}"
            )));
        }
        if cells.iter().any(|c| c.len() != m) {
            return Err(Error::InvalidStrategy(
                "all parties must use the same grid".into(),
            ));
        }
        Ok(ProductStrategyB { cells })
    }

    pub fn constant(n: usize, m: usize) -> Result<Self> {
        ProductStrategyB::new(vec![vec![Sign::Plus; m]; n])
    }

    /// `+1` on `[0, pi/2)`, `-1` on `[pi/2, pi)`, for every party.
    /// Requires an even grid so that `pi/2` is a cell boundary.
    pub fn half_split(n: usize, m: usize) -> Result<Self> {
        if !m.is_multiple_of(2) {
            return Err(Error::InvalidStrategy(format!(
                "half split needs an even grid, got {m}"
            )));
        }
        let row: Vec<Sign> = (0..m).map(|j| Sign::from_bool(j < m / 2)).collect();
        ProductStrategyB::new(vec![row; n])
    }

    pub fn random(n: usize, m: usize, rng: &mut RandomStream) -> Result<Self> {
        let cells = (0..n)
            .map(|_| (0..m).map(|_| Sign::from_bool(rng.random())).collect())
            .collect();
        ProductStrategyB::new(cells)
    }

    pub fn grid(&self) -> usize {
        self.cells[0].len()
    }

    pub fn cells(&self) -> &[Vec<Sign>] {
        &self.cells
    }

    pub fn cell_of(&self, x: f64) -> usize {
        let m = self.grid();
        ((x * m as f64 / PI) as usize).min(m - 1)
    }

    pub fn local(&self, party: usize, x: f64) -> Sign {
        self.cells[party][self.cell_of(x)]
    }
}

impl Protocol for ProductStrategyB {
    fn task(&self) -> TaskId {
        TaskId::B
    }

    fn parties(&self) -> usize {
        self.cells.len()
    }

    fn message(&self, party: usize, input: LocalInput, received: &[Sign]) -> Result<Sign> {
        let LocalInput::Angle(v) = input else {
            return Err(Error::TaskMismatch {
                expected: TaskId::B,
                found: TaskId::A,
            });
        };
        let (x, y) = decompose_angle(v);
        Ok(y * self.local(party, x) * received.iter().copied().product())
    }
}

/// Arbitrary task A message tables over a fixed tree.
///
/// Party `k`'s table has `4 * 2^c_k` entries, `c_k` being its number of
/// children. Entry `X_k + 4 * m` is the bit sent for input `X_k` when the
/// received bits, children ascending, spell `m` (bit `j` set when child `j`
/// sent `-1`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneralProtocolA {
    tree: CommTree,
    tables: Vec<Vec<Sign>>,
}

impl GeneralProtocolA {
    pub fn new(tree: CommTree, tables: Vec<Vec<Sign>>) -> Result<Self> {
        if tables.len() != tree.parties() {
            return Err(Error::ArityMismatch {
                expected: tree.parties(),
                found: tables.len(),
            });
        }
        for (k, t) in tables.iter().enumerate() {
            let want = table_len(&tree, k);
            if t.len() != want {
                return Err(Error::InvalidStrategy(format!(
                    "party {k} table has {} entries, expected {want}",
                    t.len()
                )));
            }
        }
        Ok(GeneralProtocolA { tree, tables })
    }

    /// The general-table form of a product strategy.
    pub fn from_product(tree: CommTree, strategy: &ProductStrategyA) -> Result<Self> {
        let tables = (0..tree.parties())
            .map(|k| {
                (0..table_len(&tree, k))
                    .map(|slot| {
                        let (x, y) = decompose_digit((slot % 4) as u8);
                        let parity = (slot / 4).count_ones() % 2 == 0;
                        y * strategy.local(k, x) * Sign::from_bool(parity)
                    })
                    .collect()
            })
            .collect();
        GeneralProtocolA::new(tree, tables)
    }

    pub fn tree(&self) -> &CommTree {
        &self.tree
    }

    pub fn tables(&self) -> &[Vec<Sign>] {
        &self.tables
    }
}

fn table_len(tree: &CommTree, party: usize) -> usize {
    4 << tree.children(party).len()
}

fn slot(digit: u8, received: &[Sign]) -> usize {
    let m = received
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.is_plus())
        .fold(0usize, |acc, (j, _)| acc | (1 << j));
    usize::from(digit) + 4 * m
}

impl Protocol for GeneralProtocolA {
    fn task(&self) -> TaskId {
        TaskId::A
    }

    fn parties(&self) -> usize {
        self.tree.parties()
    }

    fn message(&self, party: usize, input: LocalInput, received: &[Sign]) -> Result<Sign> {
        let LocalInput::Digit(d) = input else {
            return Err(Error::TaskMismatch {
                expected: TaskId::A,
                found: TaskId::B,
            });
        };
        Ok(self.tables[party][slot(d, received)])
    }

    fn check_tree(&self, tree: &CommTree) -> Result<()> {
        if *tree != self.tree {
            return Err(Error::InvalidTree(
                "general protocol tables were built for a different tree".into(),
            ));
        }
        Ok(())
    }
}

/// `|sum_x g(x) prod a_k(x_k)|` over even-parity bit strings, with
/// `g(x) = 2^-(N-1) (-1)^(|x|/2)`. Exact: an integer sum scaled by a power
/// of two.
pub fn fidelity_exact_a(strategy: &ProductStrategyA) -> Result<f64> {
    let n = strategy.a.len();
    if n > MAX_EXACT_PARTIES_A {
        return Err(Error::PartiesOutOfRange {
            n,
            min: 1,
            max: MAX_EXACT_PARTIES_A,
        });
    }
    let mut total: i64 = 0;
    for x in 0u64..(1 << n) {
        let weight = x.count_ones();
        if weight % 2 != 0 {
            continue;
        }
        let f = Sign::from_bool((weight / 2) % 2 == 0);
        let a: Sign = (0..n)
            .map(|k| strategy.local(k, ((x >> k) & 1) as u8))
            .product();
        total += i64::from((f * a).value());
    }
    Ok(total.unsigned_abs() as f64 / (1u64 << (n - 1)) as f64)
}

/// Exact fidelity of any task A protocol, summing over all even-sum inputs.
pub fn fidelity_exact_protocol_a<P: Protocol + ?Sized>(proto: &P, tree: &CommTree) -> Result<f64> {
    let n = proto.parties();
    let inputs = sampler::enumerate_a(n)?;
    let mut agree: i64 = 0;
    for (x, _) in &inputs {
        let x = InputTuple::A(x.clone());
        let answer = run_protocol(proto, tree, &x)?;
        agree += i64::from((answer * task::task_value(&x)?).value());
    }
    Ok(agree.unsigned_abs() as f64 / inputs.len() as f64)
}

/// `int_l^u e^{ix} dx`.
fn cell_integral(lower: f64, upper: f64) -> Complex64 {
    Complex64::new(upper.sin() - lower.sin(), lower.cos() - upper.cos())
}

fn cell_integrals(m: usize) -> Vec<Complex64> {
    let h = PI / m as f64;
    (0..m)
        .map(|j| cell_integral(j as f64 * h, (j + 1) as f64 * h))
        .collect()
}

/// `z_k = int_0^pi a_k(x) e^{ix} dx`, exact for piecewise-constant `a_k`.
fn party_phasor(signs: &[Sign], cells: &[Complex64]) -> Complex64 {
    signs.iter().zip(cells).map(|(s, c)| c * s.as_f64()).sum()
}

/// `int cos(sum x) prod a_k(x_k) dx = Re prod z_k`, unnormalized.
fn signed_overlap(z: &[Complex64]) -> f64 {
    z.iter().product::<Complex64>().re
}

fn b_normalization(n: usize) -> f64 {
    2.0 * PI.powi(n as i32 - 1)
}

/// `|int g(x) prod a_k(x_k) dx|` with `g(x) = cos(sum x) / (2 pi^(N-1))`.
///
/// The integrand factorizes over parties once the cosine is written as the
/// real part of `prod e^{i x_k}`, so the value is `|Re prod z_k|` with one
/// closed-form cell integral per grid cell. No quadrature is involved.
pub fn fidelity_exact_b(strategy: &ProductStrategyB) -> f64 {
    let cells = cell_integrals(strategy.grid());
    let z: Vec<Complex64> = strategy
        .cells
        .iter()
        .map(|s| party_phasor(s, &cells))
        .collect();
    signed_overlap(&z).abs() / b_normalization(z.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    /// Mean of `T * e_N`; its magnitude estimates the fidelity.
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
}

impl McEstimate {
    pub fn fidelity(&self) -> f64 {
        self.mean.abs()
    }
}

/// Monte Carlo estimate of a protocol's fidelity over the task distribution.
pub fn fidelity_mc<P: Protocol + ?Sized>(
    proto: &P,
    tree: &CommTree,
    n_samples: u64,
    rng: &mut RandomStream,
) -> Result<McEstimate> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter {
            name: "n_samples",
            value: 0.0,
            reason: "at least one sample is required",
        });
    }
    let n = proto.parties();
    let mut agree: u64 = 0;
    for _ in 0..n_samples {
        let (x, truth) = loop {
            let x: InputTuple = match proto.task() {
                TaskId::A => sampler::sample_a(n, rng)?.into(),
                TaskId::B => sampler::sample_b(n, rng)?.into(),
            };
            match task::task_value(&x) {
                Ok(t) => break (x, t),
                // measure-zero under p_B; draw again
                Err(Error::CosineTie { .. }) => continue,
                Err(e) => return Err(e),
            }
        };
        if run_protocol(proto, tree, &x)? == truth {
            agree += 1;
        }
    }
    let p = agree as f64 / n_samples as f64;
    Ok(McEstimate {
        mean: 2.0 * p - 1.0,
        std_error: 2.0 * (p * (1.0 - p) / n_samples as f64).sqrt(),
        samples: n_samples,
    })
}

/// Result of the exhaustive search over general task A protocols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifiedBound {
    pub task: TaskId,
    pub parties: usize,
    pub tree: String,
    pub max_fidelity: f64,
    /// Position of the maximizer in the enumeration order (lowest among ties).
    pub argmax_index: u64,
    pub argmax: GeneralProtocolA,
    pub search_space: u64,
}

/// Maximum task A fidelity over every protocol on `tree`: every message
/// table of every party, not only product strategies.
///
/// Tables of non-root parties are enumerated in the outer loop. For each of
/// those, the root's table is walked in Gray-code order, so each step flips
/// one entry and updates the answer bitmask over the `4^N / 2` inputs with a
/// single xor.
pub fn brute_force_bound_a(tree: &CommTree) -> Result<CertifiedBound> {
    let n = tree.parties();
    if !(2..=MAX_BRUTE_FORCE_PARTIES).contains(&n) {
        return Err(Error::PartiesOutOfRange {
            n,
            min: 2,
            max: MAX_BRUTE_FORCE_PARTIES,
        });
    }
    let inputs: Vec<InputTupleA> = sampler::enumerate_a(n)?
        .into_iter()
        .map(|(x, _)| x)
        .collect();
    let n_inputs = inputs.len() as i64;
    let truth_minus: u64 = inputs
        .iter()
        .enumerate()
        .filter(|(_, x)| !task::task_value_a(x).is_plus())
        .fold(0, |m, (i, _)| m | (1 << i));

    let root = tree.root();
    let order = tree.evaluation_order();
    let senders: Vec<usize> = order.iter().copied().filter(|&k| k != root).collect();
    let sender_lens: Vec<usize> = senders.iter().map(|&k| table_len(tree, k)).collect();
    let sender_bits: usize = sender_lens.iter().sum();
    let root_bits = table_len(tree, root);
    let children: Vec<Vec<usize>> = (0..n).map(|k| tree.children(k)).collect();

    let decode = |outer: u64| -> Vec<Vec<Sign>> {
        let mut tables = vec![Vec::new(); n];
        let mut shift = 0;
        for (&k, &len) in senders.iter().zip(&sender_lens) {
            tables[k] = (0..len)
                .map(|j| Sign::from_bool((outer >> (shift + j)) & 1 == 0))
                .collect();
            shift += len;
        }
        tables
    };

    let best = (0..1u64 << sender_bits)
        .into_par_iter()
        .map(|outer| {
            let tables = decode(outer);
            // inputs reaching each root slot
            let mut slot_masks = vec![0u64; root_bits];
            let mut sent = vec![Sign::Plus; n];
            let mut received = Vec::new();
            for (i, x) in inputs.iter().enumerate() {
                let digits = x.digits();
                for &k in &order {
                    received.clear();
                    received.extend(children[k].iter().map(|&c| sent[c]));
                    let s = slot(digits[k], &received);
                    if k == root {
                        slot_masks[s] |= 1 << i;
                    } else {
                        sent[k] = tables[k][s];
                    }
                }
            }
            // Gray-code walk over the root table; bit set means answer -1.
            // table 0 answers +1 everywhere
            let mut answer_minus = 0u64;
            let mut best_score = (n_inputs - 2 * i64::from(truth_minus.count_ones())).abs();
            let mut best_table = 0u64;
            for step in 1u64..(1 << root_bits) {
                let flip = step.trailing_zeros() as usize;
                answer_minus ^= slot_masks[flip];
                let wrong = i64::from((answer_minus ^ truth_minus).count_ones());
                let table = step ^ (step >> 1);
                let score = (n_inputs - 2 * wrong).abs();
                if score > best_score || (score == best_score && table < best_table) {
                    best_score = score;
                    best_table = table;
                }
            }
            (best_score, (outer << root_bits) | best_table)
        })
        .reduce(
            || (-1, u64::MAX),
            |a, b| {
                if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) {
                    a
                } else {
                    b
                }
            },
        );

    let (score, index) = best;
    let mut tables = decode(index >> root_bits);
    let root_table = index & ((1 << root_bits) - 1);
    tables[root] = (0..root_bits)
        .map(|j| Sign::from_bool((root_table >> j) & 1 == 0))
        .collect();
    Ok(CertifiedBound {
        task: TaskId::A,
        parties: n,
        tree: tree.label(),
        max_fidelity: score as f64 / n_inputs as f64,
        argmax_index: index,
        argmax: GeneralProtocolA::new(tree.clone(), tables)?,
        search_space: 1u64 << (sender_bits + root_bits),
    })
}

/// Best task A product strategy by exhaustion over all `4^N` strategies,
/// lowest index among ties.
pub fn best_product_strategy_a(n: usize) -> Result<(f64, ProductStrategyA)> {
    check_parties(n)?;
    if n > 12 {
        return Err(Error::PartiesOutOfRange { n, min: 1, max: 12 });
    }
    let (f, index) = (0..1u64 << (2 * n))
        .into_par_iter()
        .map(|i| {
            let f = fidelity_exact_a(&ProductStrategyA::from_index(n, i)).unwrap_or(0.0);
            (f, i)
        })
        .reduce(
            || (-1.0, u64::MAX),
            |a, b| {
                if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) {
                    a
                } else {
                    b
                }
            },
        );
    Ok((f, ProductStrategyA::from_index(n, index)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AscentRun {
    pub stream_id: u64,
    pub strategy: ProductStrategyB,
    pub fidelity: f64,
    /// Fidelity at the start and after every sweep.
    pub trace: Vec<f64>,
}

/// Coordinate ascent for task B over piecewise-constant strategies.
///
/// Holding the other parties fixed, the objective is linear in party `k`'s
/// cell signs, `sum_j a_kj Re(c_j W)` with `W = prod_{l != k} z_l`, so the
/// best response sets each cell to the sign of its coefficient. A cell whose
/// coefficient is exactly zero keeps its sign. An update is kept only if it
/// raises the objective, which makes the trace non-decreasing and the loop
/// finite. Stops after a sweep that changes nothing.
pub fn coordinate_ascent_b(
    n: usize,
    m: usize,
    init: Option<ProductStrategyB>,
    rng: &mut RandomStream,
) -> Result<AscentRun> {
    check_parties(n)?;
    if m < 8 {
        return Err(Error::InvalidStrategy(format!(
            "grid must have at least 8 cells, got {m}"
        )));
    }
    let mut strategy = match init {
        Some(s) => {
            if s.parties() != n || s.grid() != m {
                return Err(Error::InvalidStrategy(
                    "initial strategy does not match the requested shape".into(),
                ));
            }
            s
        }
        None => ProductStrategyB::random(n, m, rng)?,
    };
    let cells = cell_integrals(m);
    let mut z: Vec<Complex64> = strategy
        .cells
        .iter()
        .map(|s| party_phasor(s, &cells))
        .collect();
    // Negating one party negates the signed objective without changing the
    // fidelity; start on the non-negative side.
    if signed_overlap(&z) < 0.0 {
        for s in strategy.cells[0].iter_mut() {
            *s = -*s;
        }
        z[0] = -z[0];
    }
    let norm = b_normalization(n);
    let mut objective = signed_overlap(&z);
    let mut trace = vec![objective / norm];
    loop {
        let mut changed = false;
        for k in 0..n {
            let others: Complex64 = z
                .iter()
                .enumerate()
                .filter(|&(l, _)| l != k)
                .map(|(_, v)| v)
                .product();
            let proposal: Vec<Sign> = strategy.cells[k]
                .iter()
                .zip(&cells)
                .map(|(&old, c)| {
                    let coeff = (c * others).re;
                    if coeff == 0.0 {
                        old
                    } else {
                        Sign::of(coeff)
                    }
                })
                .collect();
            if proposal == strategy.cells[k] {
                continue;
            }
            let mut trial = z.clone();
            trial[k] = party_phasor(&proposal, &cells);
            let value = signed_overlap(&trial);
            if value > objective {
                strategy.cells[k] = proposal;
                z = trial;
                objective = value;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        trace.push(objective / norm);
    }
    Ok(AscentRun {
        stream_id: rng.stream_id(),
        fidelity: fidelity_exact_b(&strategy),
        strategy,
        trace,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeReport {
    pub parties: usize,
    pub grid: usize,
    pub seed: u64,
    pub best: AscentRun,
    pub runs: Vec<AscentRun>,
}

/// Random-restart coordinate ascent; restart `r` uses stream id `r`.
/// The best run is the highest fidelity, lowest stream id among ties.
pub fn optimize_b(n: usize, m: usize, restarts: usize, seed: u64) -> Result<OptimizeReport> {
    if restarts == 0 {
        return Err(Error::InvalidParameter {
            name: "restarts",
            value: 0.0,
            reason: "at least one restart is required",
        });
    }
    let runs = (0..restarts as u64)
        .into_par_iter()
        .map(|r| coordinate_ascent_b(n, m, None, &mut RandomStream::new(seed, r)))
        .collect::<Result<Vec<_>>>()?;
    let best = runs
        .iter()
        .fold(
            &runs[0],
            |best, r| if r.fidelity > best.fidelity { r } else { best },
        )
        .clone();
    Ok(OptimizeReport {
        parties: n,
        grid: m,
        seed,
        best,
        runs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub fidelity: f64,
    pub success: f64,
}

impl Bound {
    pub fn from_fidelity(fidelity: f64) -> Self {
        Bound {
            fidelity,
            success: (1.0 + fidelity) / 2.0,
        }
    }
}

/// Best classical fidelity: `2^(1-K)` with `K = ceil(N/2)` for A,
/// `(2/pi)^(N-1)` for B.
pub fn classical_bound(task: TaskId, n: usize) -> Result<Bound> {
    check_parties(n)?;
    let fidelity = match task {
        TaskId::A => {
            let k = n.div_ceil(2) as i32;
            (0.5f64).powi(k - 1)
        }
        TaskId::B => (2.0 / PI).powi(n as i32 - 1),
    };
    Ok(Bound::from_fidelity(fidelity))
}
