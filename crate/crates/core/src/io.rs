//! JSON wire formats. Complex numbers are `[re, im]` pairs of exact
//! doubles; matrices are `{"rows", "cols", "data"}` with `data` row-major.
//! Non-finite reals are written as `null`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::{ChartPoint, PluckerVec, N_CHART, N_COORDS};
use crate::lifting::{LiftProblem, LiftReport, LiftResult, StartPair};
use crate::linalg::{CMat, C64};
use crate::selfdual::{Config, DiagWitness, NormalFormCert, SkewParams, SKEW_LEN};
use crate::slicing::{LinearSection, SliceResult};
use crate::tracker::{PathResult, PathStatus};

pub type Pair = [f64; 2];

pub fn pair(z: C64) -> Pair {
    [z.re, z.im]
}

pub fn complex(p: Pair) -> C64 {
    C64::new(p[0], p[1])
}

pub fn pairs(v: &[C64]) -> Vec<Pair> {
    v.iter().copied().map(pair).collect()
}

pub fn complexes(v: &[Pair]) -> Vec<C64> {
    v.iter().copied().map(complex).collect()
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Pair>,
}

impl From<&CMat> for MatrixJson {
    fn from(m: &CMat) -> Self {
        MatrixJson {
            rows: m.rows(),
            cols: m.cols(),
            data: pairs(m.as_slice()),
        }
    }
}

impl MatrixJson {
    pub fn to_cmat(&self) -> Result<CMat> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidInput("matrix dimensions must be positive".into()));
        }
        Ok(CMat::from_vec(self.rows, self.cols, complexes(&self.data))?)
    }

    pub fn to_config(&self) -> Result<Config> {
        Config::new(self.to_cmat()?)
    }
}

fn fixed<const N: usize>(v: &[Pair], what: &str) -> Result<[C64; N]> {
    if v.len() != N {
        return Err(Error::InvalidInput(format!("{what} needs {N} entries, got {}", v.len())));
    }
    Ok(std::array::from_fn(|i| complex(v[i])))
}

pub fn skew_to_json(s: &SkewParams) -> Vec<Pair> {
    pairs(&s.0)
}

pub fn skew_from_json(v: &[Pair]) -> Result<SkewParams> {
    Ok(SkewParams(fixed::<SKEW_LEN>(v, "skew parameters")?))
}

pub fn plucker_to_json(p: &PluckerVec) -> Vec<Pair> {
    pairs(&p.0)
}

pub fn plucker_from_json(v: &[Pair]) -> Result<PluckerVec> {
    Ok(PluckerVec(fixed::<N_COORDS>(v, "Plücker vector")?))
}

pub fn chart_from_json(v: &[Pair]) -> Result<ChartPoint> {
    Ok(ChartPoint(fixed::<N_CHART>(v, "chart point")?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathJson {
    pub status: String,
    pub endpoint: Vec<Pair>,
    pub residual: Option<f64>,
    pub function_residual: Option<f64>,
    pub correction: Option<f64>,
    pub steps_taken: usize,
    pub steps_rejected: usize,
    pub final_newton_iters: usize,
}

impl From<&PathResult> for PathJson {
    fn from(r: &PathResult) -> Self {
        PathJson {
            status: format!("{:?}", r.status),
            endpoint: pairs(&r.endpoint),
            residual: finite(r.residual),
            function_residual: finite(r.function_residual),
            correction: finite(r.correction),
            steps_taken: r.steps_taken,
            steps_rejected: r.steps_rejected,
            final_newton_iters: r.final_newton_iters,
        }
    }
}

impl PathJson {
    pub fn to_result(&self) -> Result<PathResult> {
        let status = match self.status.as_str() {
            "Success" => PathStatus::Success,
            "Diverged" => PathStatus::Diverged,
            "MinStepReached" => PathStatus::MinStepReached,
            "CorrectorFailed" => PathStatus::CorrectorFailed,
            s => return Err(Error::InvalidInput(format!("unknown path status {s}"))),
        };
        Ok(PathResult {
            status,
            endpoint: complexes(&self.endpoint),
            residual: self.residual.unwrap_or(f64::NAN),
            function_residual: self.function_residual.unwrap_or(f64::NAN),
            correction: self.correction.unwrap_or(f64::NAN),
            steps_taken: self.steps_taken,
            steps_rejected: self.steps_rejected,
            final_newton_iters: self.final_newton_iters,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceJson {
    pub section: MatrixJson,
    pub kernel: MatrixJson,
    pub chart_points: Vec<Vec<Pair>>,
    pub plucker_points: Vec<Vec<Pair>>,
    pub gamma: MatrixJson,
    pub max_relation_residual: f64,
    pub recovery_residual: f64,
}

impl From<&SliceResult> for SliceJson {
    fn from(r: &SliceResult) -> Self {
        SliceJson {
            section: r.section.a().into(),
            kernel: r.section.l().into(),
            chart_points: r.chart_points.iter().map(|t| pairs(&t.0)).collect(),
            plucker_points: r.plucker_points.iter().map(plucker_to_json).collect(),
            gamma: r.gamma.matrix().into(),
            max_relation_residual: r.max_relation_residual,
            recovery_residual: r.recovery_residual,
        }
    }
}

impl SliceJson {
    pub fn section(&self) -> Result<LinearSection> {
        LinearSection::new(self.section.to_cmat()?)
    }

    pub fn chart_points(&self) -> Result<Vec<ChartPoint>> {
        self.chart_points.iter().map(|v| chart_from_json(v)).collect()
    }

    pub fn plucker_points(&self) -> Result<Vec<PluckerVec>> {
        self.plucker_points.iter().map(|v| plucker_from_json(v)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertJson {
    pub p: MatrixJson,
    pub a: MatrixJson,
    pub lambda_scale: Vec<Pair>,
    pub witness: Vec<Pair>,
    pub s: Option<Vec<Pair>>,
    pub orthogonality_error: f64,
}

impl From<&NormalFormCert> for CertJson {
    fn from(c: &NormalFormCert) -> Self {
        CertJson {
            p: (&c.p).into(),
            a: (&c.a).into(),
            lambda_scale: pairs(&c.lambda_scale.lambda),
            witness: pairs(&c.witness.lambda),
            s: c.s.as_ref().map(skew_to_json),
            orthogonality_error: c.orthogonality_error(),
        }
    }
}

impl CertJson {
    pub fn to_cert(&self) -> Result<NormalFormCert> {
        Ok(NormalFormCert {
            p: self.p.to_cmat()?,
            a: self.a.to_cmat()?,
            lambda_scale: DiagWitness {
                lambda: complexes(&self.lambda_scale),
            },
            s: self.s.as_deref().map(skew_from_json).transpose()?,
            witness: DiagWitness {
                lambda: complexes(&self.witness),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftProblemJson {
    pub seed: u64,
    pub l_start: MatrixJson,
    pub s_start: Vec<Pair>,
    pub directions: Vec<MatrixJson>,
}

impl From<&LiftProblem> for LiftProblemJson {
    fn from(p: &LiftProblem) -> Self {
        LiftProblemJson {
            seed: p.seed,
            l_start: (&p.l_start).into(),
            s_start: skew_to_json(&p.s_start),
            directions: p.directions.iter().map(MatrixJson::from).collect(),
        }
    }
}

impl LiftProblemJson {
    pub fn to_problem(&self) -> Result<LiftProblem> {
        let directions = self.directions.iter().map(MatrixJson::to_cmat).collect::<Result<Vec<_>>>()?;
        LiftProblem::new(self.l_start.to_cmat()?, directions, skew_from_json(&self.s_start)?, self.seed)
    }
}

/// A persisted start pair: the problem plus the configuration it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartPairJson {
    pub problem: LiftProblemJson,
    pub gamma: MatrixJson,
    pub cert: CertJson,
    pub perm: Vec<usize>,
    pub start_residual: f64,
}

impl From<&StartPair> for StartPairJson {
    fn from(p: &StartPair) -> Self {
        StartPairJson {
            problem: (&p.problem).into(),
            gamma: p.gamma.matrix().into(),
            cert: (&p.cert).into(),
            perm: p.perm.clone(),
            start_residual: p.start_residual,
        }
    }
}

impl StartPairJson {
    pub fn to_start_pair(&self) -> Result<StartPair> {
        Ok(StartPair {
            problem: self.problem.to_problem()?,
            gamma: self.gamma.to_config()?,
            cert: self.cert.to_cert()?,
            perm: self.perm.clone(),
            start_residual: self.start_residual,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub max_residual: f64,
    pub per_point: Vec<f64>,
    pub rank: usize,
    pub image_rank: usize,
    pub injectivity_margin: f64,
    pub degenerate: bool,
}

impl From<&LiftReport> for ReportJson {
    fn from(r: &LiftReport) -> Self {
        ReportJson {
            max_residual: r.max_residual,
            per_point: r.per_point.clone(),
            rank: r.rank,
            image_rank: r.image_rank,
            injectivity_margin: r.injectivity_margin,
            degenerate: r.degenerate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftJson {
    pub ell: Vec<Pair>,
    #[serde(rename = "L")]
    pub l: MatrixJson,
    #[serde(rename = "L_hat")]
    pub l_hat: MatrixJson,
    pub s_target: Vec<Pair>,
    pub perm: Vec<usize>,
    pub cert: CertJson,
    pub report: ReportJson,
    pub path: PathJson,
}

impl From<&LiftResult> for LiftJson {
    fn from(r: &LiftResult) -> Self {
        LiftJson {
            ell: pairs(&r.ell),
            l: (&r.l).into(),
            l_hat: (&r.l_hat).into(),
            s_target: skew_to_json(&r.s_target),
            perm: r.perm.clone(),
            cert: (&r.cert).into(),
            report: (&r.report).into(),
            path: (&r.path_stats).into(),
        }
    }
}

/// Serializes with a trailing newline.
pub fn to_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidInput(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn from_str<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))
}
