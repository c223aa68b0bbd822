use serde::Serialize;

use crate::error::{Error, Result};

/// Which of p, q is odd. Both even cannot occur for a coprime pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParityCase {
    BothOdd,
    POddQEven,
    PEvenQOdd,
}

impl ParityCase {
    pub fn as_str(self) -> &'static str {
        match self {
            ParityCase::BothOdd => "both_odd",
            ParityCase::POddQEven => "p_odd_q_even",
            ParityCase::PEvenQOdd => "p_even_q_odd",
        }
    }
}

/// A coprime pair p > q ≥ 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ConeParams {
    p: u32,
    q: u32,
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl ConeParams {
    pub fn new(p: u32, q: u32) -> Result<Self> {
        if q == 0 || p <= q {
            return Err(Error::InvalidParams(format!(
                "need p > q >= 1, got p = {p}, q = {q}"
            )));
        }
        if gcd(p, q) != 1 {
            return Err(Error::InvalidParams(format!(
                "p = {p} and q = {q} are not coprime"
            )));
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn pf(&self) -> f64 {
        f64::from(self.p)
    }

    pub fn qf(&self) -> f64 {
        f64::from(self.q)
    }

    pub fn parity(&self) -> ParityCase {
        match (self.p % 2, self.q % 2) {
            (1, 1) => ParityCase::BothOdd,
            (1, 0) => ParityCase::POddQEven,
            (0, 1) => ParityCase::PEvenQOdd,
            _ => unreachable!("coprime pair cannot be both even"),
        }
    }

    /// c = pq / (2(p − q)); S solves F^⊥ = −2cH and E solves F^⊥ = 2cH.
    pub fn self_similar_constant(&self) -> f64 {
        self.pf() * self.qf() / (2.0 * (self.pf() - self.qf()))
    }

    /// Slope of the Lagrangian angle in θ.
    pub fn angle_slope(&self) -> f64 {
        self.pf() - self.qf()
    }

    /// All coprime pairs with 1 ≤ q < p ≤ `max_p`.
    pub fn sweep(max_p: u32) -> Vec<ConeParams> {
        (2..=max_p)
            .flat_map(|p| (1..p).filter_map(move |q| ConeParams::new(p, q).ok()))
            .collect()
    }
}

pub fn self_similar_constant(params: &ConeParams) -> f64 {
    params.self_similar_constant()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// Data of the level set Σ λᵢ xᵢ² = C swept by θ ↦ diag(e^{iλᵢθ}).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LambdaParams {
    lambdas: Vec<f64>,
    level: f64,
    angle_offset: f64,
}

impl LambdaParams {
    pub fn new(lambdas: Vec<f64>, level: f64) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::InvalidParams("need at least one λ".into()));
        }
        if let Some(bad) = lambdas.iter().find(|l| **l == 0.0 || !l.is_finite()) {
            return Err(Error::InvalidParams(format!("λ must be nonzero and finite, got {bad}")));
        }
        if !level.is_finite() {
            return Err(Error::InvalidParams("level must be finite".into()));
        }
        Ok(Self {
            lambdas,
            level,
            angle_offset: 0.0,
        })
    }

    /// The time slice Σₜ: level = −2t Σλᵢ.
    pub fn at_time(lambdas: Vec<f64>, t: f64) -> Result<Self> {
        let sum: f64 = lambdas.iter().sum();
        Self::new(lambdas, -2.0 * t * sum)
    }

    pub fn with_angle_offset(mut self, c: f64) -> Self {
        self.angle_offset = c;
        self
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn angle_offset(&self) -> f64 {
        self.angle_offset
    }

    pub fn lambda_sum(&self) -> f64 {
        self.lambdas.iter().sum()
    }

    /// Residual Σ λᵢ xᵢ² − C.
    pub fn level_residual(&self, x: &[f64]) -> f64 {
        self.lambdas
            .iter()
            .zip(x)
            .map(|(l, xi)| l * xi * xi)
            .sum::<f64>()
            - self.level
    }

    /// F^⊥ = κH with κ = −C / Σλᵢ; `None` when Σλᵢ = 0 (special Lagrangian).
    pub fn soliton_coefficient(&self) -> Option<f64> {
        let s = self.lambda_sum();
        (s != 0.0).then(|| -self.level / s)
    }
}

/// Chart on the level set solving for coordinate `solved` with the given sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LambdaChart {
    pub solved: usize,
    pub sign: Sign,
}

impl LambdaChart {
    pub fn new(solved: usize, sign: Sign) -> Self {
        Self { solved, sign }
    }

    /// Picks a chart containing a full point x (the coordinate with the
    /// largest |λⱼ xⱼ| is solved for, which keeps the chart well conditioned).
    pub fn containing(params: &LambdaParams, x: &[f64]) -> Result<Self> {
        if x.len() != params.n() {
            return Err(Error::DimensionMismatch {
                expected: params.n(),
                found: x.len(),
            });
        }
        let (j, _) = params
            .lambdas()
            .iter()
            .zip(x)
            .map(|(l, xi)| (l * xi).abs())
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        if x[j] == 0.0 {
            return Err(Error::SingularLocus {
                kind: "lambda_family",
            });
        }
        let sign = if x[j] > 0.0 { Sign::Plus } else { Sign::Minus };
        Ok(Self { solved: j, sign })
    }

    /// Splits a full point into chart coordinates (free xᵢ in index order).
    pub fn chart_coords(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .filter(|(i, _)| *i != self.solved)
            .map(|(_, v)| *v)
            .collect()
    }
}
