//! Machine-readable run reports.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use instanton_core::audit::{AuditReport, TraceOutcome};
use instanton_core::monad::{E1Status, E2Status, MonadCertificate, Provenance};
use instanton_core::pencil::{Condition, STensorClassification, ZsFamily};
use instanton_core::Backend;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::format::{vec_json, ToJson, TOOL_VERSION};
use crate::LabError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub tolerance: f64,
    pub prime: u64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub counts: BTreeMap<String, u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub tool_version: String,
    pub config: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    /// Wall-clock milliseconds; only recorded on request so that exact
    /// runs stay byte-for-byte reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, f64>>,
    pub passed: bool,
    pub summary: Vec<String>,
}

impl RunReport {
    pub fn new(command: Vec<String>, config: RunConfig) -> Self {
        RunReport {
            command,
            tool_version: TOOL_VERSION.to_string(),
            config,
            certificate: None,
            audit: None,
            probes: None,
            result: None,
            timings_ms: None,
            passed: true,
            summary: Vec::new(),
        }
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }

    pub fn fail(&mut self, line: impl Into<String>) {
        self.passed = false;
        self.summary.push(line.into());
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = fs::read_to_string(path).map_err(|e| LabError::Input(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| LabError::Input(format!("malformed report: {e}")))
    }

    pub fn save(&self, path: &Path) -> Result<(), LabError> {
        fs::write(path, self.to_json()).map_err(|e| LabError::Input(format!("{}: {e}", path.display())))
    }
}

pub fn certificate_json<T: ToJson>(c: &MonadCertificate<T>) -> Value {
    let e2 = match &c.e2 {
        E2Status::ExactZero => json!({ "status": "exact_zero" }),
        E2Status::Residual(r) => json!({ "status": "residual", "value": r.to_json() }),
    };
    let e1 = match &c.e1 {
        E1Status::PassProbabilistic { samples } => json!({ "status": "pass", "samples": samples }),
        E1Status::Fail { f, b } => json!({ "status": "fail", "f": vec_json(f), "b": vec_json(b) }),
    };
    json!({
        "k": c.k,
        "e1": e1,
        "e2": e2,
        "e3_rank": c.e3_rank,
        "h0_k": c.h0_k,
        "tolerance": c.tolerance,
        "is_instanton": c.is_instanton(),
        "internal_error": c.is_internal_error(),
    })
}

pub fn provenance_json(p: &Provenance) -> Value {
    match p {
        Provenance::SliceSolve { seed, draw } => json!({ "generator": "slice", "seed": seed, "draw": draw }),
        Provenance::GaussNewton { seed, iterations, residual } => {
            json!({ "generator": "newton", "seed": seed, "iterations": iterations, "residual": residual.to_json() })
        }
        Provenance::File => json!({ "generator": "file" }),
    }
}

pub fn backend_json(b: &Backend) -> Value {
    match b {
        Backend::Rational => json!({ "type": "rational" }),
        Backend::Prime(p) => json!({ "type": "prime", "p": p }),
        Backend::ComplexFloat { tolerance } => json!({ "type": "float", "tolerance": tolerance.to_json() }),
    }
}

pub fn audit_json(r: &AuditReport) -> Value {
    let probe = r.w_probe.as_ref().map(|p| json!({ "trials": p.trials, "hits": p.hits, "verdict": format!("{:?}", p.verdict) }));
    json!({
        "k": r.k,
        "backend": backend_json(&r.backend),
        "tangent_i_dim": r.tangent_i_dim,
        "moduli_tangent_dim": r.moduli_tangent_dim,
        "xi_corank": r.xi_corank,
        "smooth": r.smooth,
        "rank_dgamma": r.rank_dgamma,
        "rank_xi": r.rank_xi,
        "smooth_threshold": r.smooth_threshold,
        "misprinted_threshold": r.misprinted_threshold,
        "certificate_pattern": [r.certificate.0, r.certificate.1, r.certificate.2],
        "riemann_roch_holds": r.riemann_roch_holds(),
        "smoothness_consistent": r.smoothness_consistent(),
        "w_probe": probe,
    })
}

pub fn family_json(f: &ZsFamily) -> Value {
    let points: Vec<Value> = f
        .points
        .iter()
        .map(|p| {
            json!({
                "fstar": vec_json(&p.fstar),
                "bstar": vec_json(&p.bstar),
                "residual": p.residual.to_json(),
                "exact": p.exact.as_ref().map(|e| json!({ "fstar": vec_json(&e.fstar), "bstar": vec_json(&e.bstar) })),
            })
        })
        .collect();
    json!({
        "source": format!("{:?}", f.source),
        "jacobian_rank": f.jacobian_rank,
        "jacobian_singular_values": vec_json(&f.jacobian_singular_values),
        "certifies_dim_two": f.certifies_dim_two(),
        "points": points,
    })
}

pub fn classification_json(c: &STensorClassification) -> Value {
    let witness = match &c.condition {
        Condition::Cond1(w) => json!({
            "condition": 1,
            "bstar": vec_json(&w.bstar),
            "f0": vec_json(&w.f0),
            "b0": vec_json(&w.b0),
            "pencil": {
                "v0": vec_json(&w.pencil.v0),
                "u0": vec_json(&w.pencil.u0),
                "lambda": [w.pencil.lambda.0.to_json(), w.pencil.lambda.1.to_json()],
                "residual": w.pencil.residual.to_json(),
                "image_norm": w.pencil.image_norm.to_json(),
            },
            "rank_ratio": w.rank_ratio.to_json(),
            "image_norm": w.image_norm.to_json(),
        }),
        Condition::Cond2(w) => json!({ "condition": 2, "fstar": vec_json(&w.fstar) }),
        Condition::Cond3(f) => json!({ "condition": 3, "family": family_json(f) }),
    };
    json!({
        "rk_s": c.rk_s,
        "r": c.r,
        "case": format!("{:?}", c.case),
        "tail_vanishes": c.tail_vanishes,
        "witness": witness,
    })
}

pub fn trace_json(t: &TraceOutcome) -> Value {
    let detail = match t {
        TraceOutcome::E3Failure { beta_rank } => json!({ "beta_rank": beta_rank }),
        TraceOutcome::RankBound { rk_s, bound } => json!({ "rk_s": rk_s, "bound": bound }),
        TraceOutcome::CaseI { f0, b0, residual } => {
            json!({ "f0": vec_json(f0), "b0": vec_json(b0), "residual": residual.to_json() })
        }
        TraceOutcome::CaseII { fstar, m_dim } => json!({ "fstar": vec_json(fstar), "m_dim": m_dim }),
        TraceOutcome::CaseIII { ker_rho_dim, beta_rank, family } => {
            json!({ "ker_rho_dim": ker_rho_dim, "beta_rank": beta_rank, "family": family_json(family) })
        }
        TraceOutcome::SmoothNoS => json!({}),
    };
    json!({ "outcome": t.label(), "contradicts_instanton": t.contradicts_instanton(), "detail": detail })
}
