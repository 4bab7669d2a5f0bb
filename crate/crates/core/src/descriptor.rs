//! Name parsing and serializable descriptors for functions, cones and
//! smoothing configurations.

use serde::{Deserialize, Serialize};

use crate::cone::ConeModel;
use crate::error::{Error, Result};
use crate::function::{SmoothingSpec, Variant};
use crate::sublinear::{Family, SublinearFn};

/// A catalog function by name. `weights` is required for the weighted
/// ∞-norm and ignored otherwise; `dim` is the matrix order for `max-eigen`.
pub fn parse_family(name: &str, dim: usize, weights: Option<&[f64]>) -> Result<SublinearFn> {
    match name {
        "relu" => {
            if dim != 1 {
                return Err(Error::invalid("relu is one-dimensional (use --d 1)"));
            }
            Ok(SublinearFn::relu())
        }
        "euclidean-norm" | "two-norm" | "l2" => SublinearFn::euclidean_norm(dim),
        "one-norm" | "l1" => SublinearFn::one_norm(dim),
        "weighted-inf-norm" | "inf-norm" => {
            let w = match weights {
                Some(w) => w.to_vec(),
                None if name == "inf-norm" => vec![1.0; dim],
                None => return Err(Error::invalid("weighted-inf-norm needs weights")),
            };
            if w.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: w.len(),
                });
            }
            SublinearFn::weighted_inf_norm(w)
        }
        "max" => SublinearFn::max(dim),
        "max-eigen" | "lambda-max" => SublinearFn::max_eigen(dim),
        _ => Err(Error::invalid(format!(
            "unknown family '{name}' (expected relu, euclidean-norm, one-norm, weighted-inf-norm, max, max-eigen)"
        ))),
    }
}

/// A catalog cone by name; `d` is ignored for the exponential cone.
pub fn parse_cone(name: &str, d: usize) -> Result<ConeModel> {
    match name {
        "orthant" | "nonneg" => ConeModel::orthant(d),
        "soc" | "second-order" | "lorentz" => ConeModel::second_order(d),
        "psd" => ConeModel::psd(d),
        "exp" | "exponential" => Ok(ConeModel::exponential()),
        _ => Err(Error::invalid(format!(
            "unknown cone '{name}' (expected orthant, soc, psd, exp)"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionDescriptor {
    #[serde(flatten)]
    pub family: Family,
    pub dim: usize,
}

impl FunctionDescriptor {
    pub fn of(f: &SublinearFn) -> Self {
        FunctionDescriptor {
            family: f.family().clone(),
            dim: f.dim(),
        }
    }

    pub fn build(&self) -> Result<SublinearFn> {
        SublinearFn::new(self.family.clone(), self.dim)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeDescriptor {
    #[serde(alias = "kind")]
    pub cone: String,
    pub d: usize,
}

impl ConeDescriptor {
    pub fn of(k: &ConeModel) -> Result<Self> {
        if k.name() == "lifted" {
            return Err(Error::Unsupported("lifted cones carry an oracle and have no descriptor".into()));
        }
        Ok(ConeDescriptor {
            cone: k.name().to_string(),
            d: k.d(),
        })
    }

    pub fn build(&self) -> Result<ConeModel> {
        parse_cone(&self.cone, self.d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingDescriptor {
    pub function: FunctionDescriptor,
    pub variant: Variant,
    pub beta: f64,
}

impl SmoothingDescriptor {
    pub fn of(s: &SmoothingSpec) -> Self {
        SmoothingDescriptor {
            function: FunctionDescriptor::of(s.sigma()),
            variant: s.variant,
            beta: s.beta,
        }
    }

    pub fn build(&self) -> Result<SmoothingSpec> {
        SmoothingSpec::for_function(&self.function.build()?, self.variant, self.beta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn function_round_trip() {
        for f in crate::verify::catalog_functions() {
            let d = FunctionDescriptor::of(&f);
            let s = serde_json::to_string(&d).unwrap();
            let back: FunctionDescriptor = serde_json::from_str(&s).unwrap();
            assert_eq!(back, d);
            assert_eq!(back.build().unwrap(), f);
        }
    }

    #[test]
    fn smoothing_round_trip() {
        let s = SmoothingSpec::for_function(&SublinearFn::max(3).unwrap(), Variant::MaxOuter, 2.0).unwrap();
        let d = SmoothingDescriptor::of(&s);
        let json = serde_json::to_string(&d).unwrap();
        let back: SmoothingDescriptor = serde_json::from_str(&json).unwrap();
        assert_eq!(back.build().unwrap(), s);
    }

    #[test]
    fn names() {
        assert!(parse_family("relu", 2, None).is_err());
        assert!(parse_family("weighted-inf-norm", 2, None).is_err());
        assert_eq!(parse_family("inf-norm", 2, None).unwrap().lipschitz(), 1.0);
        assert!(parse_family("nope", 2, None).unwrap_err().is_validation());
        assert_eq!(parse_cone("soc", 2).unwrap().ambient_dim(), 3);
        let c = ConeDescriptor::of(&parse_cone("psd", 3).unwrap()).unwrap();
        assert_eq!(c.build().unwrap().ambient_dim(), 9);
        let k: ConeDescriptor = serde_json::from_str(r#"{"kind":"orthant","d":4}"#).unwrap();
        assert_eq!(k.build().unwrap().ambient_dim(), 4);
    }
}
