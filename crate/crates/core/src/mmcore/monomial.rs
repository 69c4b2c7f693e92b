//! Monomials `Phi^{m,phi}(x) = <phi, nu^{m,x}>` and their evaluation.

use std::fmt;
use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use super::dmm::{check_enum_limit, for_each_tuple, pair_count, tuple_matrix};
use super::scalar::{Mode, Scalar};
use super::space::FiniteMmSpace;
use crate::error::{MmError, Result};
use crate::rng::substream;

pub type KernelFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Test function on upper-triangular distance matrices (row-major pairs).
#[derive(Clone)]
pub enum Kernel {
    Constant(Scalar),
    /// `exp(-Σ λ_ij r_ij)`
    ExpProduct(Vec<f64>),
    /// `1 - exp(-Σ λ_ij r_ij)`
    OneMinusExp(Vec<f64>),
    /// `Π 1[r_ij >= R_ij]`
    UpperOrthant(Vec<Scalar>),
    /// `Π r_ij^{e_ij}`
    Polynomial(Vec<u32>),
    Callback {
        f: KernelFn,
        increasing: bool,
        nonnegative: bool,
    },
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Constant(c) => write!(f, "Constant({c})"),
            Kernel::ExpProduct(l) => write!(f, "ExpProduct({l:?})"),
            Kernel::OneMinusExp(l) => write!(f, "OneMinusExp({l:?})"),
            Kernel::UpperOrthant(r) => write!(f, "UpperOrthant({} entries)", r.len()),
            Kernel::Polynomial(e) => write!(f, "Polynomial({e:?})"),
            Kernel::Callback { .. } => f.write_str("Callback(..)"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Monomial {
    pub order: usize,
    pub kernel: Kernel,
}

impl Monomial {
    pub fn new(order: usize, kernel: Kernel) -> Result<Self> {
        if order < 2 {
            return Err(MmError::Parameter(format!("monomial order {order} < 2")));
        }
        let want = pair_count(order);
        let got = match &kernel {
            Kernel::ExpProduct(v) | Kernel::OneMinusExp(v) => Some(v.len()),
            Kernel::UpperOrthant(v) => Some(v.len()),
            Kernel::Polynomial(v) => Some(v.len()),
            Kernel::Constant(_) | Kernel::Callback { .. } => None,
        };
        if let Some(got) = got {
            if got != want {
                return Err(MmError::Parameter(format!(
                    "kernel has {got} coefficients, order {order} needs {want}"
                )));
            }
        }
        if let Kernel::ExpProduct(v) | Kernel::OneMinusExp(v) = &kernel {
            if v.iter().any(|&l| !(l >= 0.0) || !l.is_finite()) {
                return Err(MmError::Parameter("exponential rates must be finite and >= 0".into()));
            }
        }
        Ok(Self { order, kernel })
    }

    /// `1 - e^{-λ r_12}` on pairs.
    pub fn pair_one_minus_exp(lambda: f64) -> Self {
        Self::new(2, Kernel::OneMinusExp(vec![lambda])).expect("valid order-2 kernel")
    }

    pub fn constant(order: usize, c: Scalar) -> Self {
        Self::new(order, Kernel::Constant(c)).expect("order >= 2")
    }

    pub fn is_increasing(&self) -> bool {
        match &self.kernel {
            Kernel::Constant(_) | Kernel::UpperOrthant(_) | Kernel::Polynomial(_) => true,
            Kernel::OneMinusExp(_) => true,
            Kernel::ExpProduct(l) => l.iter().all(|&v| v == 0.0),
            Kernel::Callback { increasing, .. } => *increasing,
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        match &self.kernel {
            Kernel::Constant(c) => !c.is_negative(),
            Kernel::Callback { nonnegative, .. } => *nonnegative,
            _ => true,
        }
    }

    /// Kernels that can be evaluated without leaving the rationals.
    pub fn is_exact(&self) -> bool {
        matches!(
            self.kernel,
            Kernel::Constant(_) | Kernel::UpperOrthant(_) | Kernel::Polynomial(_)
        )
    }

    /// `phi` at one distance matrix.
    pub fn eval_matrix(&self, r: &[Scalar]) -> Result<Scalar> {
        let v = match &self.kernel {
            Kernel::Constant(c) => c.clone(),
            Kernel::UpperOrthant(th) => {
                let inside = r.iter().zip(th).all(|(a, b)| a >= b);
                let mode = r.first().map_or(Mode::Exact, Scalar::mode);
                if inside {
                    Scalar::one(mode)
                } else {
                    Scalar::zero(mode)
                }
            }
            Kernel::Polynomial(e) => {
                let mode = r.first().map_or(Mode::Exact, Scalar::mode);
                r.iter()
                    .zip(e)
                    .fold(Scalar::one(mode), |acc, (a, &k)| &acc * &a.powi(k))
            }
            Kernel::ExpProduct(l) => Scalar::Float((-dot(l, r)).exp()),
            Kernel::OneMinusExp(l) => Scalar::Float(-(-dot(l, r)).exp_m1()),
            Kernel::Callback { f, .. } => {
                let rf: Vec<f64> = r.iter().map(Scalar::to_f64).collect();
                let v = f(&rf);
                if !v.is_finite() {
                    return Err(MmError::Kernel(format!("callback returned {v}")));
                }
                Scalar::Float(v)
            }
        };
        Ok(v)
    }
}

fn dot(l: &[f64], r: &[Scalar]) -> f64 {
    l.iter().zip(r).map(|(a, b)| a * b.to_f64()).sum()
}

/// How to evaluate a monomial.
#[derive(Clone, Copy, Debug)]
pub enum EvalMode {
    /// Full enumeration of `n^m` tuples, refused above `limit`.
    Exact { limit: f64 },
    /// Unbiased estimate from `samples` independent tuples.
    MonteCarlo { samples: usize, seed: u64 },
}

impl Default for EvalMode {
    fn default() -> Self {
        EvalMode::Exact {
            limit: super::dmm::DEFAULT_ENUM_LIMIT,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MonomialValue {
    pub value: Scalar,
    /// Present for Monte Carlo estimates.
    pub std_error: Option<f64>,
}

/// `<phi, nu^{m,x}>`.
pub fn eval_monomial(x: &FiniteMmSpace, phi: &Monomial, mode: EvalMode) -> Result<MonomialValue> {
    match mode {
        EvalMode::Exact { limit } => {
            check_enum_limit(x.support().len(), phi.order, limit)?;
            let out_mode = if phi.is_exact() { x.mode() } else { Mode::Float };
            let mut acc = Scalar::zero(out_mode);
            let mut err = None;
            for_each_tuple(x, phi.order, |pts, w| {
                if err.is_some() {
                    return;
                }
                match phi.eval_matrix(&tuple_matrix(x, pts)) {
                    Ok(v) if !v.is_zero() => acc = &acc + &(w * &v),
                    Ok(_) => {}
                    Err(e) => err = Some(e),
                }
            });
            match err {
                Some(e) => Err(e),
                None => Ok(MonomialValue {
                    value: acc,
                    std_error: None,
                }),
            }
        }
        EvalMode::MonteCarlo { samples, seed } => {
            if samples < 2 {
                return Err(MmError::Parameter("Monte Carlo needs at least 2 samples".into()));
            }
            let support = x.support();
            if support.is_empty() {
                return Ok(MonomialValue {
                    value: Scalar::Float(0.0),
                    std_error: Some(0.0),
                });
            }
            let weights: Vec<f64> = support.iter().map(|&i| x.mass(i).to_f64()).collect();
            let total: f64 = weights.iter().sum();
            let pick = WeightedIndex::new(&weights)
                .map_err(|e| MmError::Parameter(format!("bad masses: {e}")))?;
            let mut rng = substream(seed, 0);
            let mut pts = vec![0usize; phi.order];
            let (mut sum, mut sumsq) = (0.0, 0.0);
            for _ in 0..samples {
                for p in pts.iter_mut() {
                    *p = support[pick.sample(&mut rng)];
                }
                let v = phi.eval_matrix(&tuple_matrix(x, &pts))?.to_f64();
                sum += v;
                sumsq += v * v;
            }
            let k = samples as f64;
            let mean = sum / k;
            let var = ((sumsq - k * mean * mean) / (k - 1.0)).max(0.0);
            let scale = total.powi(phi.order as i32);
            Ok(MonomialValue {
                value: Scalar::Float(scale * mean),
                std_error: Some(scale * (var / k).sqrt()),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x1() -> FiniteMmSpace {
        FiniteMmSpace::from_ratios(&[vec![(0, 1), (1, 1)], vec![(1, 1), (0, 1)]], &[(1, 2), (1, 2)])
            .unwrap()
    }

    #[test]
    fn constant_kernel_normalizes() {
        let phi = Monomial::constant(2, Scalar::int(1));
        let v = eval_monomial(&x1(), &phi, EvalMode::default()).unwrap();
        assert_eq!(v.value, Scalar::int(1));
    }

    #[test]
    fn one_minus_exp_on_two_points() {
        let phi = Monomial::pair_one_minus_exp(1.0);
        let v = eval_monomial(&x1(), &phi, EvalMode::default()).unwrap().value.to_f64();
        // 4 ordered pairs of weight 1/4, two at distance 1
        let oracle = 2.0 * 0.25 * (1.0 - (-1.0f64).exp());
        assert!((v - oracle).abs() < 1e-15);
        assert!((v - 0.316_060_279_414_278_6).abs() < 1e-12);
    }

    #[test]
    fn increasing_orthant_is_monotone_under_metric_doubling() {
        let y1 = FiniteMmSpace::from_ratios(&[vec![(0, 1), (2, 1)], vec![(2, 1), (0, 1)]], &[(1, 2), (1, 2)])
            .unwrap();
        for t in [0, 1, 2, 3] {
            let phi = Monomial::new(2, Kernel::UpperOrthant(vec![Scalar::int(t)])).unwrap();
            assert!(phi.is_increasing() && phi.is_nonnegative());
            let a = eval_monomial(&x1(), &phi, EvalMode::default()).unwrap().value;
            let b = eval_monomial(&y1, &phi, EvalMode::default()).unwrap().value;
            assert!(a <= b, "threshold {t}: {a} > {b}");
        }
    }

    #[test]
    fn monte_carlo_is_close_to_exact() {
        let phi = Monomial::pair_one_minus_exp(1.0);
        let exact = eval_monomial(&x1(), &phi, EvalMode::default()).unwrap().value.to_f64();
        let mc = eval_monomial(&x1(), &phi, EvalMode::MonteCarlo { samples: 20_000, seed: 7 }).unwrap();
        let se = mc.std_error.unwrap();
        assert!((mc.value.to_f64() - exact).abs() < 4.0 * se);
    }

    #[test]
    fn rejects_wrong_arity() {
        assert!(Monomial::new(3, Kernel::ExpProduct(vec![1.0])).is_err());
        assert!(Monomial::new(2, Kernel::ExpProduct(vec![-1.0])).is_err());
    }

    #[test]
    fn callback_failure_propagates() {
        let phi = Monomial::new(
            2,
            Kernel::Callback {
                f: Arc::new(|_| f64::NAN),
                increasing: false,
                nonnegative: false,
            },
        )
        .unwrap();
        assert!(matches!(
            eval_monomial(&x1(), &phi, EvalMode::default()),
            Err(MmError::Kernel(_))
        ));
    }
}
