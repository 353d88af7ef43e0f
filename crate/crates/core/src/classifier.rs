//! One fit/predict interface over the RKHS classifier and the baselines.
//!
//! [`Method`] names a procedure and its fixed options, a
//! [`GridPoint`](crate::modelsel::GridPoint) supplies its tunable
//! hyperparameters, and [`Model`] is the fitted, serializable result.
//! [`MethodFitEval`] plugs a method into [`select`](crate::modelsel::select)
//! and reuses pairwise distances across grid points.

use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::baselines::{
    fit_centroid, fit_gp_laplace_with, fit_kde_bayes, fit_lda, fit_pls_centroid, gp::laplace_mode, CentroidModel,
    GpModel, GpOptions, KdeModel, LdaModel, PlsModel,
};
use crate::basis::{FuncObs, IpMode};
use crate::datagen::Dataset;
use crate::error::{Error, Result};
use crate::modelsel::{default_grid_values, error_rate, Axis, FitEval, Grid, GridPoint};
use crate::rkhs::{
    self, fit_gram, kernel_from_distances, label_vector, sign_label, FitOptions, KernelSpec, PenaltyMode, RkhsModel,
};

/// Kernel-bandwidth multipliers tried for the KDE classifier.
pub const KDE_SCALES: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];
/// Largest component count in the default grids.
pub const MAX_COMPONENTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Method {
    /// Tunes `h` and `lambda`.
    Rkhs {
        #[serde(default)]
        penalty: PenaltyMode,
        #[serde(default)]
        ip_mode: IpMode,
    },
    /// Tunes `p`.
    Centroid,
    /// Tunes `p`.
    PlsCentroid,
    /// Tunes `p`.
    Lda,
    /// Tunes `p` and `scale` (multiplier on the rule-of-thumb bandwidth).
    KdeBayes,
    /// Tunes `h`.
    GpLaplace {
        #[serde(default)]
        ip_mode: IpMode,
    },
    /// Always predicts `+1`; no hyperparameters.
    ConstantPlus,
}

impl Method {
    pub fn rkhs() -> Self {
        Self::Rkhs {
            penalty: PenaltyMode::default(),
            ip_mode: IpMode::default(),
        }
    }

    pub fn gp() -> Self {
        Self::GpLaplace {
            ip_mode: IpMode::default(),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Self::Rkhs { .. } => "rkhs",
            Self::Centroid => "centroid",
            Self::PlsCentroid => "pls_centroid",
            Self::Lda => "lda",
            Self::KdeBayes => "kde_bayes",
            Self::GpLaplace { .. } => "gp_laplace",
            Self::ConstantPlus => "constant_plus",
        }
    }

    pub fn ip_mode(&self) -> Option<IpMode> {
        match self {
            Self::Rkhs { ip_mode, .. } | Self::GpLaplace { ip_mode } => Some(*ip_mode),
            _ => None,
        }
    }

    pub fn default_grid(&self) -> Grid {
        let comps = || Axis::integers("p", 1..=MAX_COMPONENTS);
        let axes = match self {
            Self::Rkhs { .. } => return Grid::default_rkhs(),
            Self::Centroid | Self::PlsCentroid | Self::Lda => vec![comps()],
            Self::KdeBayes => vec![comps(), Axis::new("scale", KDE_SCALES.to_vec())],
            Self::GpLaplace { .. } => vec![Axis::new("h", default_grid_values())],
            Self::ConstantPlus => vec![],
        };
        Grid::new(axes).expect("static grid")
    }

    /// Axis names a grid for this method must provide.
    pub fn required_axes(&self) -> &'static [&'static str] {
        match self {
            Self::Rkhs { .. } => &["h", "lambda"],
            Self::Centroid | Self::PlsCentroid | Self::Lda => &["p"],
            Self::KdeBayes => &["p", "scale"],
            Self::GpLaplace { .. } => &["h"],
            Self::ConstantPlus => &[],
        }
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        let names = grid.names();
        for need in self.required_axes() {
            if !names.iter().any(|n| n == need) {
                return Err(Error::invalid(format!("{} grid lacks axis '{need}'", self.tag())));
            }
        }
        if let Some(extra) = names.iter().find(|n| !self.required_axes().contains(&n.as_str())) {
            return Err(Error::invalid(format!(
                "{} grid has unknown axis '{extra}'",
                self.tag()
            )));
        }
        Ok(())
    }

    pub fn fit(&self, train: &Dataset, point: &GridPoint) -> Result<Model> {
        Ok(match *self {
            Self::Rkhs { penalty, ip_mode } => {
                let kernel = KernelSpec::new(point.require("h")?, ip_mode)?;
                let labels = train.labels();
                Model::Rkhs(rkhs::fit(
                    &train.items,
                    &labels,
                    kernel,
                    point.require("lambda")?,
                    penalty,
                    &FitOptions::default(),
                )?)
            }
            Self::Centroid => Model::Centroid(fit_centroid(train, point.require_count("p")?)?),
            Self::PlsCentroid => Model::PlsCentroid(fit_pls_centroid(train, point.require_count("p")?)?),
            Self::Lda => Model::Lda(fit_lda(train, point.require_count("p")?)?),
            Self::KdeBayes => Model::KdeBayes(fit_kde_bayes(
                train,
                point.require_count("p")?,
                point.require("scale")?,
            )?),
            Self::GpLaplace { ip_mode } => {
                let kernel = KernelSpec::new(point.require("h")?, ip_mode)?;
                Model::GpLaplace(fit_gp_laplace_with(train, kernel, &GpOptions::default())?)
            }
            Self::ConstantPlus => Model::ConstantPlus,
        })
    }
}

/// A fitted classifier of any kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", content = "model", rename_all = "snake_case")]
pub enum Model {
    Rkhs(RkhsModel),
    Centroid(CentroidModel),
    PlsCentroid(PlsModel),
    Lda(LdaModel),
    KdeBayes(KdeModel),
    GpLaplace(GpModel),
    ConstantPlus,
}

impl Model {
    pub fn predict(&self, x: &FuncObs) -> Result<i8> {
        Ok(self.predict_many(std::slice::from_ref(x))?[0])
    }

    pub fn predict_many(&self, xs: &[FuncObs]) -> Result<Vec<i8>> {
        match self {
            Self::Rkhs(m) => m.predict_many(xs),
            Self::GpLaplace(m) => Ok(m.latent_means(xs)?.into_iter().map(sign_label).collect()),
            Self::Centroid(m) => xs.iter().map(|x| m.predict(x)).collect(),
            Self::PlsCentroid(m) => xs.iter().map(|x| m.predict(x)).collect(),
            Self::Lda(m) => xs.iter().map(|x| m.predict(x)).collect(),
            Self::KdeBayes(m) => xs.iter().map(|x| m.predict(x)).collect(),
            Self::ConstantPlus => Ok(vec![1; xs.len()]),
        }
    }

    /// Misclassification rate on a labelled dataset.
    pub fn error_rate(&self, data: &Dataset) -> Result<f64> {
        Ok(error_rate(&self.predict_many(&data.items)?, data))
    }
}

/// Reusable state for one train/validation split.
pub enum SplitContext {
    Kernel(KernelContext),
    Plain { train: Dataset, val: Dataset },
}

/// Train and validation kernel matrices for one bandwidth.
type KernelPair = Arc<(DMatrix<f64>, DMatrix<f64>)>;

/// Squared distances for kernel methods plus a one-entry kernel cache, so
/// consecutive grid points with equal `h` share the exponentials.
pub struct KernelContext {
    d_train: DMatrix<f64>,
    d_val: DMatrix<f64>,
    y_train: Vec<f64>,
    val: Dataset,
    cache: Mutex<Option<(f64, KernelPair)>>,
}

impl KernelContext {
    fn new(train: &Dataset, val: &Dataset, mode: IpMode) -> Result<Self> {
        let t: Vec<&FuncObs> = train.items.iter().collect();
        let v: Vec<&FuncObs> = val.items.iter().collect();
        let (d_train, d_val) = rkhs::distance_matrices(&t, &v, mode)?;
        Ok(Self {
            d_train,
            d_val,
            y_train: label_vector(&train.labels())?,
            val: val.clone(),
            cache: Mutex::new(None),
        })
    }

    fn kernels(&self, h: f64) -> Result<Arc<(DMatrix<f64>, DMatrix<f64>)>> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::invalid(format!("bandwidth must be > 0, got {h}")));
        }
        let mut slot = self.cache.lock().expect("kernel cache poisoned");
        if let Some((ch, k)) = slot.as_ref() {
            if *ch == h {
                return Ok(Arc::clone(k));
            }
        }
        let k = Arc::new((
            kernel_from_distances(&self.d_train, h),
            kernel_from_distances(&self.d_val, h),
        ));
        *slot = Some((h, Arc::clone(&k)));
        Ok(k)
    }

    fn score(&self, kq: &DMatrix<f64>, coef: &DVector<f64>) -> f64 {
        let preds: Vec<i8> = (kq * coef).iter().map(|v| sign_label(*v)).collect();
        error_rate(&preds, &self.val)
    }
}

/// [`FitEval`] for a [`Method`].
pub struct MethodFitEval {
    pub method: Method,
    pub options: FitOptions,
}

impl MethodFitEval {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            options: FitOptions::default(),
        }
    }
}

impl FitEval for MethodFitEval {
    type Context = SplitContext;

    fn prepare(&self, train: &Dataset, val: &Dataset) -> Result<SplitContext> {
        Ok(match self.method.ip_mode() {
            Some(mode) => SplitContext::Kernel(KernelContext::new(train, val, mode)?),
            None => SplitContext::Plain {
                train: train.clone(),
                val: val.clone(),
            },
        })
    }

    fn evaluate(&self, ctx: &SplitContext, point: &GridPoint) -> Result<f64> {
        match (ctx, self.method) {
            (SplitContext::Kernel(kc), Method::Rkhs { penalty, .. }) => {
                let k = kc.kernels(point.require("h")?)?;
                let (w, _) = fit_gram(&k.0, &kc.y_train, point.require("lambda")?, penalty, &self.options)?;
                Ok(kc.score(&k.1, &DVector::from_vec(w)))
            }
            (SplitContext::Kernel(kc), Method::GpLaplace { .. }) => {
                let k = kc.kernels(point.require("h")?)?;
                let opts = GpOptions::default();
                let mut kj = k.0.clone();
                for i in 0..kj.nrows() {
                    kj[(i, i)] += opts.jitter;
                }
                let a = laplace_mode(&kj, &kc.y_train, &opts)?.alpha;
                Ok(kc.score(&k.1, &a))
            }
            (SplitContext::Plain { train, val }, m) => m.fit(train, point)?.error_rate(val),
            (SplitContext::Kernel(_), m) => Err(Error::invalid(format!("{} has no kernel context", m.tag()))),
        }
    }
}
