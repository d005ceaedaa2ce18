//! Declarative parameter spaces for the fifteen pre-processing operators:
//! typed specs with ranges and parity constraints, the documented default
//! values, the inequality-constraint transform used by the tuner, and the
//! line-oriented text form `algorithm key=value ...`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

/// The fifteen tunable operators: four binarization, four smoothing and
/// seven morphological transformations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operator {
    SimpleThreshold,
    OtsuThreshold,
    TriangleThreshold,
    AdaptiveThreshold,
    BoxBlur,
    GaussianBlur,
    MedianBlur,
    BilateralFilter,
    Erosion,
    Dilation,
    Opening,
    Closing,
    MorphGradient,
    TopHat,
    BlackHat,
}

impl Operator {
    pub const ALL: [Operator; 15] = [
        Operator::SimpleThreshold,
        Operator::OtsuThreshold,
        Operator::TriangleThreshold,
        Operator::AdaptiveThreshold,
        Operator::BoxBlur,
        Operator::GaussianBlur,
        Operator::MedianBlur,
        Operator::BilateralFilter,
        Operator::Erosion,
        Operator::Dilation,
        Operator::Opening,
        Operator::Closing,
        Operator::MorphGradient,
        Operator::TopHat,
        Operator::BlackHat,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Operator::SimpleThreshold => "simple_threshold",
            Operator::OtsuThreshold => "otsu_threshold",
            Operator::TriangleThreshold => "triangle_threshold",
            Operator::AdaptiveThreshold => "adaptive_threshold",
            Operator::BoxBlur => "box_blur",
            Operator::GaussianBlur => "gaussian_blur",
            Operator::MedianBlur => "median_blur",
            Operator::BilateralFilter => "bilateral_filter",
            Operator::Erosion => "erosion",
            Operator::Dilation => "dilation",
            Operator::Opening => "opening",
            Operator::Closing => "closing",
            Operator::MorphGradient => "morph_gradient",
            Operator::TopHat => "top_hat",
            Operator::BlackHat => "black_hat",
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Operator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Operator::ALL
            .iter()
            .copied()
            .find(|op| op.id() == s)
            .ok_or_else(|| Error::NotFound(format!("unknown algorithm `{s}`")))
    }
}

/// Value domain of one parameter. Continuous parameters are quantized to an
/// integer grid; every documented tuned value is an integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Nominal { cardinality: i64 },
    Discrete { min: i64, max: i64 },
    Continuous { min: i64, max: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    None,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: ParamKind,
    pub parity: Parity,
}

impl ParamSpec {
    const fn nominal(name: &'static str, cardinality: i64) -> Self {
        ParamSpec { name, kind: ParamKind::Nominal { cardinality }, parity: Parity::None }
    }

    const fn discrete(name: &'static str, min: i64, max: i64) -> Self {
        ParamSpec { name, kind: ParamKind::Discrete { min, max }, parity: Parity::None }
    }

    const fn discrete_odd(name: &'static str, min: i64, max: i64) -> Self {
        ParamSpec { name, kind: ParamKind::Discrete { min, max }, parity: Parity::Odd }
    }

    const fn continuous(name: &'static str, min: i64, max: i64) -> Self {
        ParamSpec { name, kind: ParamKind::Continuous { min, max }, parity: Parity::None }
    }

    pub fn min(&self) -> i64 {
        match self.kind {
            ParamKind::Nominal { .. } => 0,
            ParamKind::Discrete { min, .. } | ParamKind::Continuous { min, .. } => min,
        }
    }

    pub fn max(&self) -> i64 {
        match self.kind {
            ParamKind::Nominal { cardinality } => cardinality - 1,
            ParamKind::Discrete { max, .. } | ParamKind::Continuous { max, .. } => max,
        }
    }

    pub fn contains(&self, value: i64) -> bool {
        (self.min()..=self.max()).contains(&value)
    }
}

const THRESHOLD_TYPES: i64 = 5; // binary, inverted, truncate, to-zero, to-zero inverted
const BORDER_MODES: i64 = 5;

const SIMPLE_THRESHOLD: &[ParamSpec] = &[
    ParamSpec::continuous("thresh", 0, 255),
    ParamSpec::continuous("maxValue", 0, 255),
    ParamSpec::nominal("type", THRESHOLD_TYPES),
];
const OTSU_THRESHOLD: &[ParamSpec] = &[
    ParamSpec::continuous("maxValue", 0, 255),
    ParamSpec::nominal("type", THRESHOLD_TYPES),
];
const TRIANGLE_THRESHOLD: &[ParamSpec] = &[
    ParamSpec::continuous("maxValue", 0, 255),
    ParamSpec::nominal("type", THRESHOLD_TYPES),
];
const ADAPTIVE_THRESHOLD: &[ParamSpec] = &[
    ParamSpec::continuous("maxValue", 0, 255),
    ParamSpec::nominal("adaptiveMethod", 2),
    ParamSpec::nominal("thresholdType", 2),
    ParamSpec::discrete_odd("blockSize", 3, 255),
    ParamSpec::continuous("c", 0, 255),
];
const BOX_BLUR: &[ParamSpec] = &[
    ParamSpec::discrete_odd("ksize", 1, 31),
    ParamSpec::nominal("borderType", BORDER_MODES),
];
const GAUSSIAN_BLUR: &[ParamSpec] = &[
    ParamSpec::discrete_odd("ksize", 1, 31),
    ParamSpec::nominal("borderType", BORDER_MODES),
];
const MEDIAN_BLUR: &[ParamSpec] = &[ParamSpec::discrete_odd("ksize", 1, 31)];
const BILATERAL_FILTER: &[ParamSpec] = &[
    ParamSpec::discrete("d", 1, 15),
    ParamSpec::continuous("sigmaColor", 1, 255),
    ParamSpec::continuous("sigmaSpace", 1, 255),
];
const MORPHOLOGY: &[ParamSpec] = &[
    ParamSpec::continuous("kernel", 1, 255),
    ParamSpec::discrete("iterations", 1, 10),
    ParamSpec::nominal("borderType", BORDER_MODES),
];

/// Tunable parameter set of an operator, in serialization order.
pub fn schema(algorithm: Operator) -> &'static [ParamSpec] {
    match algorithm {
        Operator::SimpleThreshold => SIMPLE_THRESHOLD,
        Operator::OtsuThreshold => OTSU_THRESHOLD,
        Operator::TriangleThreshold => TRIANGLE_THRESHOLD,
        Operator::AdaptiveThreshold => ADAPTIVE_THRESHOLD,
        Operator::BoxBlur => BOX_BLUR,
        Operator::GaussianBlur => GAUSSIAN_BLUR,
        Operator::MedianBlur => MEDIAN_BLUR,
        Operator::BilateralFilter => BILATERAL_FILTER,
        Operator::Erosion
        | Operator::Dilation
        | Operator::Opening
        | Operator::Closing
        | Operator::MorphGradient
        | Operator::TopHat
        | Operator::BlackHat => MORPHOLOGY,
    }
}

/// One concrete point in an operator's parameter space. Values are stored in
/// schema order; range validity is checked on construction, parity is not
/// (infeasible points must stay representable for constrained search).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamAssignment {
    algorithm: Operator,
    values: Vec<i64>,
}

impl ParamAssignment {
    /// Builds from `(name, value)` pairs, which must cover the operator's
    /// declared parameters exactly.
    pub fn new(algorithm: Operator, pairs: &[(String, i64)]) -> Result<Self> {
        let specs = schema(algorithm);
        if pairs.len() != specs.len() {
            return Err(Error::InvalidParameter(format!(
                "{algorithm} takes {} parameter(s), got {}",
                specs.len(),
                pairs.len()
            )));
        }
        let mut values = Vec::with_capacity(specs.len());
        for spec in specs {
            let mut found = None;
            for (name, value) in pairs {
                if name == spec.name {
                    if found.is_some() {
                        return Err(Error::InvalidParameter(format!(
                            "duplicate parameter `{}` for {algorithm}",
                            spec.name
                        )));
                    }
                    found = Some(*value);
                }
            }
            let value = found.ok_or_else(|| {
                Error::InvalidParameter(format!("{algorithm} is missing parameter `{}`", spec.name))
            })?;
            if !spec.contains(value) {
                return Err(Error::InvalidParameter(format!(
                    "{algorithm} parameter `{}`={value} outside [{}, {}]",
                    spec.name,
                    spec.min(),
                    spec.max()
                )));
            }
            values.push(value);
        }
        Ok(ParamAssignment { algorithm, values })
    }

    /// Builds from raw gene values in schema order; used by the search
    /// operators, which keep values in range by construction.
    pub fn from_values(algorithm: Operator, values: Vec<i64>) -> Result<Self> {
        let specs = schema(algorithm);
        if values.len() != specs.len() {
            return Err(Error::InvalidParameter(format!(
                "{algorithm} takes {} gene(s), got {}",
                specs.len(),
                values.len()
            )));
        }
        for (spec, &value) in specs.iter().zip(&values) {
            if !spec.contains(value) {
                return Err(Error::InvalidParameter(format!(
                    "{algorithm} gene `{}`={value} outside [{}, {}]",
                    spec.name,
                    spec.min(),
                    spec.max()
                )));
            }
        }
        Ok(ParamAssignment { algorithm, values })
    }

    pub fn algorithm(&self) -> Operator {
        self.algorithm
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn get(&self, name: &str) -> Result<i64> {
        schema(self.algorithm)
            .iter()
            .position(|s| s.name == name)
            .map(|i| self.values[i])
            .ok_or_else(|| {
                Error::InvalidParameter(format!("{} has no parameter `{name}`", self.algorithm))
            })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, i64)> + '_ {
        schema(self.algorithm)
            .iter()
            .zip(&self.values)
            .map(|(spec, &v)| (spec.name, v))
    }
}

impl fmt::Display for ParamAssignment {
    /// Line-oriented text form: `algorithm key=value ...`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.algorithm)?;
        for (name, value) in self.iter() {
            write!(f, " {name}={value}")?;
        }
        Ok(())
    }
}

impl FromStr for ParamAssignment {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let mut tokens = line.split_whitespace();
        let algorithm: Operator = tokens
            .next()
            .ok_or_else(|| Error::MalformedInput("empty assignment line".into()))?
            .parse()?;
        let mut pairs = Vec::new();
        for token in tokens {
            let (name, value) = token.split_once('=').ok_or_else(|| {
                Error::MalformedInput(format!("expected key=value, got `{token}`"))
            })?;
            let value: i64 = value
                .parse()
                .map_err(|_| Error::MalformedInput(format!("non-integer value in `{token}`")))?;
            pairs.push((name.to_string(), value));
        }
        ParamAssignment::new(algorithm, &pairs)
    }
}

/// Per-constraint `g(x)` values; the point is feasible iff all are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintReport {
    pub g_values: Vec<f64>,
}

impl ConstraintReport {
    pub fn feasible(&self) -> bool {
        self.g_values.iter().all(|&g| g == 0.0)
    }

    pub fn violation(&self) -> f64 {
        self.g_values.iter().sum()
    }
}

/// The odd-parity equality constraints in inequality form: one
/// `g = |p mod 2 - 1|` per must-be-odd parameter.
pub fn constraint_violation(assignment: &ParamAssignment) -> ConstraintReport {
    let g_values = schema(assignment.algorithm())
        .iter()
        .zip(assignment.values())
        .filter(|(spec, _)| spec.parity == Parity::Odd)
        .map(|(_, &v)| (v.rem_euclid(2) - 1).abs() as f64)
        .collect();
    ConstraintReport { g_values }
}

/// Default parameter values as documented for each operator.
pub fn defaults(algorithm: Operator) -> ParamAssignment {
    let values: Vec<i64> = match algorithm {
        Operator::SimpleThreshold => vec![127, 255, 0],
        Operator::OtsuThreshold | Operator::TriangleThreshold => vec![255, 0],
        // adaptiveMethod has no single documented default; mean (0) is used
        Operator::AdaptiveThreshold => vec![255, 0, 0, 11, 2],
        Operator::BoxBlur | Operator::GaussianBlur => vec![5, 3],
        Operator::MedianBlur => vec![5],
        Operator::BilateralFilter => vec![9, 75, 75],
        Operator::Erosion
        | Operator::Dilation
        | Operator::Opening
        | Operator::Closing
        | Operator::MorphGradient
        | Operator::TopHat
        | Operator::BlackHat => vec![5, 1, 3],
    };
    ParamAssignment::from_values(algorithm, values).expect("defaults fit their schema")
}

/// Uniform draw per parameter; parity-constrained parameters are drawn from
/// odd values only, so initial populations are always feasible.
pub fn random_assignment(algorithm: Operator, rng: &mut impl Rng) -> ParamAssignment {
    let values = schema(algorithm)
        .iter()
        .map(|spec| random_gene(spec, rng))
        .collect();
    ParamAssignment::from_values(algorithm, values).expect("draws stay in range")
}

/// Uniform draw over a single parameter's domain, respecting parity.
pub fn random_gene(spec: &ParamSpec, rng: &mut impl Rng) -> i64 {
    match spec.parity {
        Parity::None => rng.gen_range(spec.min()..=spec.max()),
        Parity::Odd => {
            // draw an index over the odd values in [min, max]
            let lo = if spec.min() % 2 == 1 { spec.min() } else { spec.min() + 1 };
            let count = (spec.max() - lo) / 2 + 1;
            lo + 2 * rng.gen_range(0..count)
        }
    }
}
