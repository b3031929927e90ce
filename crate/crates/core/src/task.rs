//! The two distributed tasks: target functions, input domains, densities,
//! and the split of every input into a sign part and a reduced part.
//!
//! Task A inputs are quaternary digits whose sum is even, drawn uniformly
//! over all `4^N / 2` such tuples. Task B inputs are angles in `[0, 2pi)`
//! with density proportional to `|cos(sum)|`.
//!
//! Every input decomposes as `X_k = (1 - y_k) + x_k` (A) or
//! `X_k = pi (1 - y_k) / 2 + x_k` (B), and the target factors as
//! `T(X) = (prod y_k) * f(x)`. The classical bound machinery is built on
//! this factorization.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Mul, MulAssign, Neg};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cosine magnitude below which a task B target is considered undefined.
pub const DEFAULT_TIE_EPS: f64 = 1e-12;

const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TaskId {
    A,
    B,
}

impl TaskId {
    pub const ALL: [TaskId; 2] = [TaskId::A, TaskId::B];
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaskId::A => write!(f, "A"),
            TaskId::B => write!(f, "B"),
        }
    }
}

impl std::str::FromStr for TaskId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "A" | "a" => Ok(TaskId::A),
            "B" | "b" => Ok(TaskId::B),
            other => Err(format!("unknown task '{other}', expected A or B")),
        }
    }
}

/// A dichotomic value, `+1` or `-1`. Serialized as the integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.value())
    }

    /// `Plus` for `true`, `Minus` for `false`.
    pub fn from_bool(plus: bool) -> Self {
        if plus {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    /// Sign of a nonzero real. Zero maps to `Plus`.
    pub fn of(x: f64) -> Self {
        Sign::from_bool(x >= 0.0)
    }

    pub fn is_plus(self) -> bool {
        self == Sign::Plus
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        s.value()
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, Self::Error> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(format!("{other} is not a sign; expected 1 or -1")),
        }
    }
}

impl Neg for Sign {
    type Output = Sign;

    fn neg(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_bool(self == rhs)
    }
}

impl MulAssign for Sign {
    fn mul_assign(&mut self, rhs: Sign) {
        *self = *self * rhs;
    }
}

impl std::iter::Product for Sign {
    fn product<I: Iterator<Item = Sign>>(iter: I) -> Sign {
        iter.fold(Sign::Plus, Mul::mul)
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Plus => write!(f, "+1"),
            Sign::Minus => write!(f, "-1"),
        }
    }
}

/// Task A input: one two-bit digit per party, even total.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InputTupleA(Vec<u8>);

impl InputTupleA {
    pub fn new(digits: Vec<u8>) -> Result<Self> {
        if digits.is_empty() {
            return Err(Error::NoParties);
        }
        if let Some((party, &value)) = digits.iter().enumerate().find(|(_, &d)| d > 3) {
            return Err(Error::DigitOutOfRange { party, value });
        }
        let sum = digit_sum(&digits);
        if !sum.is_multiple_of(2) {
            return Err(Error::OddSum { sum });
        }
        Ok(InputTupleA(digits))
    }

    pub fn digits(&self) -> &[u8] {
        &self.0
    }

    pub fn parties(&self) -> usize {
        self.0.len()
    }

    pub fn sum(&self) -> u64 {
        digit_sum(&self.0)
    }
}

fn digit_sum(digits: &[u8]) -> u64 {
    digits.iter().map(|&d| u64::from(d)).sum()
}

/// Task B input: one angle in `[0, 2pi)` per party.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputTupleB(Vec<f64>);

impl InputTupleB {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::NoParties);
        }
        if let Some((party, &value)) = angles
            .iter()
            .enumerate()
            .find(|(_, &a)| !(0.0..TWO_PI).contains(&a))
        {
            return Err(Error::AngleOutOfRange { party, value });
        }
        Ok(InputTupleB(angles))
    }

    pub fn angles(&self) -> &[f64] {
        &self.0
    }

    pub fn parties(&self) -> usize {
        self.0.len()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", content = "inputs")]
pub enum InputTuple {
    A(InputTupleA),
    B(InputTupleB),
}

impl InputTuple {
    pub fn task(&self) -> TaskId {
        match self {
            InputTuple::A(_) => TaskId::A,
            InputTuple::B(_) => TaskId::B,
        }
    }

    pub fn parties(&self) -> usize {
        match self {
            InputTuple::A(x) => x.parties(),
            InputTuple::B(x) => x.parties(),
        }
    }

    /// Inputs as reals, for logging. Task A digits convert exactly.
    pub fn as_reals(&self) -> Vec<f64> {
        match self {
            InputTuple::A(x) => x.digits().iter().map(|&d| f64::from(d)).collect(),
            InputTuple::B(x) => x.angles().to_vec(),
        }
    }
}

impl From<InputTupleA> for InputTuple {
    fn from(x: InputTupleA) -> Self {
        InputTuple::A(x)
    }
}

impl From<InputTupleB> for InputTuple {
    fn from(x: InputTupleB) -> Self {
        InputTuple::B(x)
    }
}

/// The reduced part `x` of a decomposed input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ReducedX {
    /// Bits in `{0, 1}`.
    A(Vec<u8>),
    /// Angles in `[0, pi)`.
    B(Vec<f64>),
}

impl ReducedX {
    pub fn task(&self) -> TaskId {
        match self {
            ReducedX::A(_) => TaskId::A,
            ReducedX::B(_) => TaskId::B,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ReducedX::A(x) => x.len(),
            ReducedX::B(x) => x.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedInput {
    pub x: ReducedX,
    pub y: Vec<Sign>,
}

impl ReducedInput {
    pub fn y_product(&self) -> Sign {
        self.y.iter().copied().product()
    }
}

/// Task A sign part of one digit: `+1` for 0 and 1, `-1` for 2 and 3.
pub fn decompose_digit(digit: u8) -> (u8, Sign) {
    (digit & 1, Sign::from_bool(digit < 2))
}

/// Task B sign part of one angle in `[0, 2pi)`.
pub fn decompose_angle(angle: f64) -> (f64, Sign) {
    if angle < PI {
        (angle, Sign::Plus)
    } else {
        (angle - PI, Sign::Minus)
    }
}

/// `T_A = 1 - (sum mod 4)`, in integer arithmetic.
pub fn task_value_a(x: &InputTupleA) -> Sign {
    // The constructor guarantees an even sum, so the residue is 0 or 2.
    Sign::from_bool(x.sum().is_multiple_of(4))
}

/// `T_B = sign(cos(sum))`, refusing near-zero cosines.
pub fn task_value_b(x: &InputTupleB, tie_eps: f64) -> Result<Sign> {
    sign_of_cos(x.sum(), tie_eps)
}

fn sign_of_cos(angle: f64, tie_eps: f64) -> Result<Sign> {
    let c = angle.cos();
    if c.abs() < tie_eps {
        return Err(Error::CosineTie { cos: c, tie_eps });
    }
    Ok(Sign::of(c))
}

/// Target value of either task with the default tie tolerance.
pub fn task_value(x: &InputTuple) -> Result<Sign> {
    task_value_with(x, DEFAULT_TIE_EPS)
}

pub fn task_value_with(x: &InputTuple, tie_eps: f64) -> Result<Sign> {
    match x {
        InputTuple::A(a) => Ok(task_value_a(a)),
        InputTuple::B(b) => task_value_b(b, tie_eps),
    }
}

pub fn decompose(x: &InputTuple) -> ReducedInput {
    match x {
        InputTuple::A(a) => {
            let (bits, y) = a.digits().iter().map(|&d| decompose_digit(d)).unzip();
            ReducedInput {
                x: ReducedX::A(bits),
                y,
            }
        }
        InputTuple::B(b) => {
            let (xs, y) = b.angles().iter().map(|&v| decompose_angle(v)).unzip();
            ReducedInput {
                x: ReducedX::B(xs),
                y,
            }
        }
    }
}

/// Inverse of [`decompose`].
pub fn compose(r: &ReducedInput) -> Result<InputTuple> {
    if r.x.len() != r.y.len() {
        return Err(Error::ArityMismatch {
            expected: r.x.len(),
            found: r.y.len(),
        });
    }
    match &r.x {
        ReducedX::A(bits) => {
            let digits = bits
                .iter()
                .zip(&r.y)
                .map(|(&b, &y)| if y.is_plus() { b } else { b + 2 })
                .collect();
            Ok(InputTupleA::new(digits)?.into())
        }
        ReducedX::B(xs) => {
            let angles = xs
                .iter()
                .zip(&r.y)
                .map(|(&v, &y)| if y.is_plus() { v } else { v + PI })
                .collect();
            Ok(InputTupleB::new(angles)?.into())
        }
    }
}

/// `f_A(x) = (-1)^(sum x / 2)` on even-parity bit strings.
pub fn reduced_f_a(bits: &[u8]) -> Result<Sign> {
    let weight: u32 = bits.iter().map(|&b| u32::from(b & 1)).sum();
    if !weight.is_multiple_of(2) {
        return Err(Error::OddParity);
    }
    Ok(Sign::from_bool((weight / 2).is_multiple_of(2)))
}

/// `f_B(x) = sign(cos(sum x))` on `[0, pi)^N`.
pub fn reduced_f_b(xs: &[f64], tie_eps: f64) -> Result<Sign> {
    check_reduced_angles(xs)?;
    sign_of_cos(xs.iter().sum(), tie_eps)
}

pub fn reduced_f(x: &ReducedX) -> Result<Sign> {
    match x {
        ReducedX::A(bits) => reduced_f_a(bits),
        ReducedX::B(xs) => reduced_f_b(xs, DEFAULT_TIE_EPS),
    }
}

fn check_reduced_angles(xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::NoParties);
    }
    match xs
        .iter()
        .enumerate()
        .find(|(_, &v)| !(0.0..PI).contains(&v))
    {
        Some((party, &value)) => Err(Error::ReducedAngleOutOfRange { party, value }),
        None => Ok(()),
    }
}

/// `p_B(X) = |cos(sum X)| / (4 (2pi)^(N-1))`.
pub fn density_b(x: &InputTupleB) -> f64 {
    let n = x.parties() as i32;
    x.sum().cos().abs() / (4.0 * TWO_PI.powi(n - 1))
}

/// Density of the reduced input: `2^-(N-1)` on even-parity bit strings for
/// A (zero elsewhere), `|cos(sum x)| / (2 pi^(N-1))` for B.
pub fn reduced_density(x: &ReducedX) -> f64 {
    match x {
        ReducedX::A(bits) => {
            if reduced_f_a(bits).is_ok() {
                (0.5f64).powi(bits.len() as i32 - 1)
            } else {
                0.0
            }
        }
        ReducedX::B(xs) => {
            let n = xs.len() as i32;
            xs.iter().sum::<f64>().cos().abs() / (2.0 * PI.powi(n - 1))
        }
    }
}
