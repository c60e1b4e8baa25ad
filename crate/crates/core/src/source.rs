//! Hypothesis pairs for testing against independence.
//!
//! Under `H = 0` the blocks are i.i.d. `P_{X1X2} · P_{Y|X2}`; under `H = 1`
//! they are i.i.d. `P_{X1X2} · P_Y`, where `P_Y` is always derived from the
//! null so that both hypotheses share every single-variable marginal.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{CondPmf, JointPmf, Pmf};

/// Bernoulli parameters of `X1`, `T` and `S` in `X2 = X1 ⊕ T`, `Y = X2 ⊕ S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryExampleParams {
    pub a: f64,
    pub p: f64,
    pub q: f64,
}

impl BinaryExampleParams {
    pub fn new(a: f64, p: f64, q: f64) -> Result<Self> {
        let params = Self { a, p, q };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("p", self.p), ("q", self.q)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!("binary example parameter {name} = {v} outside [0,1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceModel {
    px1x2: JointPmf,
    py_given_x2: CondPmf,
    py: Pmf,
}

impl SourceModel {
    /// `px1x2` must be a two-axis joint; `py_given_x2` must have one row per
    /// `X2` symbol.
    pub fn new(px1x2: JointPmf, py_given_x2: CondPmf) -> Result<Self> {
        if px1x2.num_axes() != 2 {
            return Err(Error::Usage(format!(
                "P_{{X1X2}} must have two axes, got {}",
                px1x2.num_axes()
            )));
        }
        let px2 = px1x2.marginal_pmf(1)?;
        if py_given_x2.input_size() != px2.len() {
            return Err(Error::Validation(format!(
                "P_{{Y|X2}} has {} rows but |X2| = {}",
                py_given_x2.input_size(),
                px2.len()
            )));
        }
        let py = py_given_x2.push_forward(&px2)?;
        let px1x2 = JointPmf::new(vec!["X1".into(), "X2".into()], px1x2.sizes().to_vec(), px1x2.probs().to_vec())?;
        Ok(Self { px1x2, py_given_x2, py })
    }

    pub fn px1x2(&self) -> &JointPmf {
        &self.px1x2
    }

    pub fn py_given_x2(&self) -> &CondPmf {
        &self.py_given_x2
    }

    pub fn py(&self) -> &Pmf {
        &self.py
    }

    pub fn x1_size(&self) -> usize {
        self.px1x2.sizes()[0]
    }

    pub fn x2_size(&self) -> usize {
        self.px1x2.sizes()[1]
    }

    pub fn y_size(&self) -> usize {
        self.py.len()
    }

    pub fn px1(&self) -> Pmf {
        self.px1x2.marginal_pmf(0).expect("validated joint")
    }

    pub fn px2(&self) -> Pmf {
        self.px1x2.marginal_pmf(1).expect("validated joint")
    }

    /// `P_{X1X2} · P_{Y|X2}` over `(X1, X2, Y)`.
    pub fn null_joint(&self) -> JointPmf {
        self.px1x2
            .extend_with("Y", &[1], &self.py_given_x2)
            .expect("validated source")
    }

    /// `P_{X1X2} · P_Y` over `(X1, X2, Y)`.
    pub fn alt_joint(&self) -> JointPmf {
        let independent = CondPmf::constant(1, &self.py).expect("validated source");
        self.px1x2.extend_with("Y", &[], &independent).expect("validated source")
    }
}

/// The binary example: `X1 ~ Bern(a)`, `X2 = X1 ⊕ T` with `T ~ Bern(p)`,
/// `Y = X2 ⊕ S` with `S ~ Bern(q)`.
pub fn binary_example(params: BinaryExampleParams) -> Result<SourceModel> {
    params.validate()?;
    let px1x2 = JointPmf::from_pmf("X1", &Pmf::bernoulli(params.a)?)
        .extend_with("X2", &[0], &CondPmf::bsc(params.p)?)?;
    SourceModel::new(px1x2, CondPmf::bsc(params.q)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphabetSizes {
    pub x1: usize,
    pub x2: usize,
    pub y: usize,
}

/// On-disk description of a source: either explicit tables or the binary
/// example parameters, never both.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet_sizes: Option<AlphabetSizes>,
    /// Rows indexed by `x1`, columns by `x2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_x1x2: Option<Vec<Vec<f64>>>,
    /// Rows indexed by `x2`, columns by `y`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_y_given_x2: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub binary_example: Option<BinaryExampleParams>,
}

fn at(location: &str, e: Error) -> Error {
    match e {
        Error::Validation(m) | Error::Domain(m) | Error::Usage(m) => Error::Parse {
            location: location.to_string(),
            message: m,
        },
        other => other,
    }
}

impl SourceSpec {
    pub fn binary(params: BinaryExampleParams) -> Self {
        Self { binary_example: Some(params), ..Default::default() }
    }

    pub fn to_model(&self) -> Result<SourceModel> {
        let has_tables = self.alphabet_sizes.is_some() || self.p_x1x2.is_some() || self.p_y_given_x2.is_some();
        match (&self.binary_example, has_tables) {
            (Some(_), true) => Err(Error::Parse {
                location: "source".into(),
                message: "give either the tables or binary_example, not both".into(),
            }),
            (None, false) => Err(Error::Parse {
                location: "source".into(),
                message: "missing source: need alphabet_sizes/p_x1x2/p_y_given_x2 or binary_example".into(),
            }),
            (Some(params), false) => binary_example(*params).map_err(|e| at("binary_example", e)),
            (None, true) => self.tables_to_model(),
        }
    }

    fn tables_to_model(&self) -> Result<SourceModel> {
        let missing = |field: &str| Error::Parse {
            location: field.to_string(),
            message: "field is required in table form".into(),
        };
        let sizes = self.alphabet_sizes.ok_or_else(|| missing("alphabet_sizes"))?;
        let pxx = self.p_x1x2.as_ref().ok_or_else(|| missing("p_x1x2"))?;
        let pyx = self.p_y_given_x2.as_ref().ok_or_else(|| missing("p_y_given_x2"))?;

        if pxx.len() != sizes.x1 {
            return Err(Error::Parse {
                location: "p_x1x2".into(),
                message: format!("{} rows, alphabet_sizes.x1 = {}", pxx.len(), sizes.x1),
            });
        }
        for (i, row) in pxx.iter().enumerate() {
            if row.len() != sizes.x2 {
                return Err(Error::Parse {
                    location: format!("p_x1x2[{i}]"),
                    message: format!("{} entries, alphabet_sizes.x2 = {}", row.len(), sizes.x2),
                });
            }
        }
        if pyx.len() != sizes.x2 {
            return Err(Error::Parse {
                location: "p_y_given_x2".into(),
                message: format!("{} rows, alphabet_sizes.x2 = {}", pyx.len(), sizes.x2),
            });
        }
        for (i, row) in pyx.iter().enumerate() {
            if row.len() != sizes.y {
                return Err(Error::Parse {
                    location: format!("p_y_given_x2[{i}]"),
                    message: format!("{} entries, alphabet_sizes.y = {}", row.len(), sizes.y),
                });
            }
            Pmf::new(row.clone()).map_err(|e| at(&format!("p_y_given_x2[{i}]"), e))?;
        }
        let joint = JointPmf::new(
            vec!["X1".into(), "X2".into()],
            vec![sizes.x1, sizes.x2],
            pxx.iter().flatten().copied().collect(),
        )
        .map_err(|e| at("p_x1x2", e))?;
        let channel = CondPmf::from_rows(pyx.clone()).map_err(|e| at("p_y_given_x2", e))?;
        SourceModel::new(joint, channel).map_err(|e| at("source", e))
    }
}

/// Reads a [`SourceSpec`] JSON document and validates it.
pub fn load_source(path: impl AsRef<Path>) -> Result<SourceModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let spec: SourceSpec = serde_json::from_str(&text).map_err(|e| Error::Parse {
        location: format!("{}:{}:{}", path.display(), e.line(), e.column()),
        message: e.to_string(),
    })?;
    spec.to_model().map_err(|e| match e {
        Error::Parse { location, message } => Error::Parse {
            location: format!("{}: {location}", path.display()),
            message,
        },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{binary_entropy, conditional_mutual_information, mutual_information};
    use approx::assert_abs_diff_eq;

    fn fig_params() -> BinaryExampleParams {
        BinaryExampleParams::new(0.5, 0.75, 0.95).unwrap()
    }

    #[test]
    fn binary_example_saturation_value() {
        let s = binary_example(fig_params()).unwrap();
        let j = s.null_joint();
        let i = mutual_information(&j, &[0, 1], &[2]).unwrap();
        assert_abs_diff_eq!(i, 0.7136, epsilon = 1e-3);
        assert_abs_diff_eq!(i, 1.0 - binary_entropy(0.05).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn uniform_t_decouples() {
        for q in [0.0, 0.3, 0.95] {
            let s = binary_example(BinaryExampleParams::new(0.5, 0.5, q).unwrap()).unwrap();
            assert_abs_diff_eq!(
                mutual_information(s.px1x2(), &[0], &[1]).unwrap(),
                0.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn identity_channels_copy_x1() {
        let s = binary_example(BinaryExampleParams::new(0.3, 0.0, 0.0).unwrap()).unwrap();
        let i = mutual_information(&s.null_joint(), &[0, 1], &[2]).unwrap();
        assert_abs_diff_eq!(i, binary_entropy(0.3).unwrap(), epsilon = 1e-12);
        assert_abs_diff_eq!(i, 0.8813, epsilon = 1e-4);
    }

    #[test]
    fn out_of_range_parameters() {
        assert!(matches!(BinaryExampleParams::new(1.1, 0.5, 0.5), Err(Error::Domain(_))));
        let bad = BinaryExampleParams { a: 0.5, p: -0.1, q: 0.5 };
        assert!(matches!(binary_example(bad), Err(Error::Domain(_))));
    }

    #[test]
    fn null_and_alt_joints() {
        let s = binary_example(fig_params()).unwrap();
        let null = s.null_joint();
        let alt = s.alt_joint();
        let y_null = null.marginal_pmf(2).unwrap();
        assert_abs_diff_eq!(y_null.get(0), 0.5, epsilon = 1e-12);
        assert_eq!(null.marginalize(&[0, 1]).unwrap().probs(), s.px1x2().probs());
        assert_abs_diff_eq!(
            conditional_mutual_information(&null, &[0], &[2], &[1]).unwrap(),
            0.0,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(mutual_information(&alt, &[0, 1], &[2]).unwrap(), 0.0, epsilon = 1e-12);
        let y_alt = alt.marginal_pmf(2).unwrap();
        for (a, b) in y_alt.probs().iter().zip(y_null.probs()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn alt_equals_null_only_for_useless_channel() {
        for q in [0.0, 0.2, 0.5, 0.95] {
            let s = binary_example(BinaryExampleParams::new(0.3, 0.75, q).unwrap()).unwrap();
            let differ = s
                .null_joint()
                .probs()
                .iter()
                .zip(s.alt_joint().probs())
                .any(|(a, b)| (a - b).abs() > 1e-12);
            assert_eq!(differ, q != 0.5, "q = {q}");
        }
    }

    #[test]
    fn spec_requires_exactly_one_form() {
        let empty = SourceSpec::default();
        assert!(matches!(empty.to_model(), Err(Error::Parse { .. })));
        let both = SourceSpec {
            alphabet_sizes: Some(AlphabetSizes { x1: 2, x2: 2, y: 2 }),
            ..SourceSpec::binary(fig_params())
        };
        assert!(matches!(both.to_model(), Err(Error::Parse { .. })));
    }
}
