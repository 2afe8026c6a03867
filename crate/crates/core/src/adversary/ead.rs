//! Elastic-net attack: gradient steps on the classification margin plus an
//! L2 anchor, with an ISTA shrinkage operator after every step supplying the
//! L1 term. White-box: it differentiates through the victim model itself.

use crate::classifier::{forward, input_gradient, logit, ModelParams};
use crate::evaluate::avg_percent_perturbation;
use crate::preprocess::Tensor3;
use crate::traffic::{Label, NormStats};

use super::{AdversaryError, AttackReport, AttackRow};

#[derive(Debug, Clone)]
pub struct EadConfig {
    /// L1 coefficient: deviations up to `beta` snap back to the original.
    pub beta: f64,
    /// Weight of the classification loss against the L2 anchor.
    pub c: f64,
    /// ISTA iterations per flow.
    pub steps: usize,
    pub step_size: f64,
    /// Elementwise box bounds applied by the shrink operator.
    pub lower: f64,
    pub upper: f64,
    /// Confidence margin on the pre-sigmoid score.
    pub kappa: f64,
    /// Optional outer search over `c`: 9 rounds, x10 after a failed round
    /// and /10 after a successful one, keeping the overall best iterate.
    pub c_search: bool,
}

impl Default for EadConfig {
    fn default() -> Self {
        EadConfig {
            beta: 0.01,
            c: 1.0,
            steps: 200,
            step_size: 0.01,
            lower: 0.0,
            upper: 1e10,
            kappa: 0.0,
            c_search: false,
        }
    }
}

impl EadConfig {
    /// Box bounds matching the normalized data range instead of the raw
    /// defaults.
    pub fn with_normalized_bounds(mut self) -> Self {
        self.lower = -0.5;
        self.upper = 0.5;
        self
    }

    pub fn validate(&self) -> Result<(), AdversaryError> {
        if !(self.beta > 0.0) {
            return Err(AdversaryError::BadConfig(format!(
                "beta {} must be positive",
                self.beta
            )));
        }
        if self.steps < 1 {
            return Err(AdversaryError::BadConfig("steps must be at least 1".into()));
        }
        if !(self.lower < self.upper) {
            return Err(AdversaryError::BadConfig(format!(
                "lower {} must be below upper {}",
                self.lower, self.upper
            )));
        }
        if !(self.step_size > 0.0) {
            return Err(AdversaryError::BadConfig(format!(
                "step_size {} must be positive",
                self.step_size
            )));
        }
        Ok(())
    }
}

/// The ISTA shrinkage operator: deviations from `orig` larger than `beta`
/// shrink by `beta` and clamp into the box; smaller deviations snap back to
/// `orig` itself.
pub fn ista_shrink(x: f64, orig: f64, beta: f64, lower: f64, upper: f64) -> f64 {
    let d = x - orig;
    if d > beta {
        (x - beta).min(upper)
    } else if d < -beta {
        (x + beta).max(lower)
    } else {
        orig
    }
}

/// Denormalize into token space, clamped non-negative so the symmetric
/// percent metric stays well-defined.
fn token_space(values: &[f64], stats: &NormStats) -> Vec<f64> {
    values.iter().map(|&v| stats.invert(v).max(0.0)).collect()
}

struct FlowOutcome {
    /// Best successful iterate with its perturbation and probability.
    best: Option<(Vec<f64>, f64, f64)>,
    /// Final iterate and its probability, for failed runs.
    last: (Vec<f64>, f64),
}

/// One ISTA run at a fixed classification-loss weight.
fn attack_flow(
    params: &ModelParams,
    orig: &[f64],
    orig_tokens: &[f64],
    stats: &NormStats,
    cfg: &EadConfig,
    c: f64,
) -> FlowOutcome {
    let mut x = orig.to_vec();
    let mut best: Option<(Vec<f64>, f64, f64)> = None;
    let mut last_p = 0.0;

    for _ in 0..cfg.steps {
        let z = logit(params, &x).expect("tensor rows are well-shaped");
        // Margin loss max(Z_attack - Z_benign, -kappa): flat once the flow
        // is benign by at least kappa.
        let margin_active = z > -cfg.kappa;
        let grad_f = if margin_active {
            Some(input_gradient(params, &x, Label::Attack))
        } else {
            None
        };
        for k in 0..x.len() {
            let gf = grad_f.as_ref().map_or(0.0, |g| g[k]);
            let grad = c * gf + 2.0 * (x[k] - orig[k]);
            let y = x[k] - cfg.step_size * grad;
            x[k] = ista_shrink(y, orig[k], cfg.beta, cfg.lower, cfg.upper);
            debug_assert!(x[k].is_finite());
        }

        let p = forward(params, &x).expect("tensor rows are well-shaped");
        last_p = p;
        if p <= 0.5 {
            let pct = avg_percent_perturbation(orig_tokens, &token_space(&x, stats))
                .expect("equal lengths");
            if best.as_ref().is_none_or(|(_, bp, _)| pct < *bp) {
                best = Some((x.clone(), pct, p));
            }
        }
    }

    FlowOutcome {
        best,
        last: (x, last_p),
    }
}

/// Run the elastic-net attack over every attack-labeled flow of a normalized
/// tensor. Benign flows are recorded untouched. Among iterates that flip the
/// classifier, the one with the smallest average percent perturbation
/// (measured in denormalized token space) is kept. With `c_search` enabled
/// the loss weight is adjusted over 9 outer rounds.
pub fn ead_attack(
    params: &ModelParams,
    flows: &Tensor3,
    labels: &[Label],
    stats: &NormStats,
    cfg: &EadConfig,
) -> Result<AttackReport, AdversaryError> {
    cfg.validate()?;
    assert_eq!(flows.n_flows(), labels.len(), "flows/labels length mismatch");

    let mut rows = Vec::with_capacity(flows.n_flows());
    for i in 0..flows.n_flows() {
        let orig = flows.flow(i).to_vec();
        let p_before = forward(params, &orig).expect("tensor rows are well-shaped");

        if !labels[i].is_attack() {
            // Not an attack flow: skipped, recorded untouched.
            rows.push(AttackRow {
                flow_id: i,
                label: labels[i],
                p_before,
                p_after: p_before,
                success: false,
                pct_perturbed: 0.0,
                original: orig.clone(),
                perturbed: orig,
            });
            continue;
        }

        let orig_tokens = token_space(&orig, stats);
        let mut best: Option<(Vec<f64>, f64, f64)> = None;
        let mut last = (orig.clone(), p_before);
        let rounds = if cfg.c_search { 9 } else { 1 };
        let mut c = cfg.c;
        for _ in 0..rounds {
            let outcome = attack_flow(params, &orig, &orig_tokens, stats, cfg, c);
            let succeeded = outcome.best.is_some();
            if let Some((t, pct, p)) = outcome.best {
                if best.as_ref().is_none_or(|(_, bp, _)| pct < *bp) {
                    best = Some((t, pct, p));
                }
            } else {
                last = outcome.last;
            }
            // A failed round needs more classification pressure; a
            // successful one can try for a gentler perturbation.
            c = if succeeded { c / 10.0 } else { c * 10.0 };
        }

        let (perturbed, pct, p_after, success) = match best {
            Some((t, pct, p)) => (t, pct, p, true),
            None => {
                let (x, p) = last;
                let pct = avg_percent_perturbation(&orig_tokens, &token_space(&x, stats))
                    .expect("equal lengths");
                (x, pct, p, false)
            }
        };

        rows.push(AttackRow {
            flow_id: i,
            label: labels[i],
            p_before,
            p_after,
            success,
            pct_perturbed: pct,
            original: orig,
            perturbed,
        });
    }

    Ok(AttackReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traffic::FEATURE_COUNT;
    use proptest::prelude::*;

    /// Independent three-case evaluation, written directly from the operator
    /// definition.
    fn shrink_oracle(x: f64, orig: f64, beta: f64, lower: f64, upper: f64) -> f64 {
        if x - orig > beta {
            if x - beta < upper {
                x - beta
            } else {
                upper
            }
        } else if (x - orig).abs() <= beta {
            orig
        } else if x + beta > lower {
            x + beta
        } else {
            lower
        }
    }

    #[test]
    fn dead_zone_returns_original() {
        assert_eq!(ista_shrink(0.3, 0.3, 0.01, 0.0, 1e10), 0.3);
        assert_eq!(ista_shrink(0.305, 0.3, 0.01, 0.0, 1e10), 0.3);
    }

    #[test]
    fn two_beta_overshoot_lands_at_one_beta() {
        let beta = 0.01;
        let got = ista_shrink(0.3 + 2.0 * beta, 0.3, beta, 0.0, 1e10);
        assert!((got - (0.3 + beta)).abs() < 1e-15);
    }

    #[test]
    fn shrink_matches_case_split_on_grid() {
        for beta in [0.01, 0.5] {
            for xi in 0..=100 {
                for oi in 0..=100 {
                    let x = -0.5 + xi as f64 * 0.01;
                    let orig = -0.5 + oi as f64 * 0.01;
                    let got = ista_shrink(x, orig, beta, 0.0, 1e10);
                    let want = shrink_oracle(x, orig, beta, 0.0, 1e10);
                    assert_eq!(got, want, "x={x} orig={orig} beta={beta}");
                }
            }
        }
    }

    proptest! {
        /// Within-box originals stay within the box, and shrinking never
        /// increases the deviation from the original.
        #[test]
        fn shrink_bounds_and_contraction(
            x in -2.0f64..2.0,
            orig in -0.5f64..0.5,
            beta in 1e-6f64..1.0,
        ) {
            let (lower, upper) = (-0.5, 0.5);
            let out = ista_shrink(x, orig, beta, lower, upper);
            prop_assert!(out >= lower - 1e-12 && out <= upper + 1e-12);
            prop_assert!((out - orig).abs() <= (x - orig).abs() + 1e-12);
        }
    }

    #[test]
    fn huge_beta_swallows_the_step() {
        // One step with an enormous dead zone: the iterate must come back to
        // the original exactly.
        let params = ModelParams::zeros(4, 2);
        let n = 2 * FEATURE_COUNT;
        let tensor = Tensor3::new((0..n).map(|k| (k as f64 * 0.1).sin() * 0.4).collect(), 1, 2);
        let stats = NormStats::new(0.0, 10.0, -0.5, 0.5).unwrap();
        let cfg = EadConfig {
            steps: 1,
            beta: 1e6,
            ..Default::default()
        };
        let report = ead_attack(&params, &tensor, &[Label::Attack], &stats, &cfg).unwrap();
        assert_eq!(report.rows[0].perturbed, report.rows[0].original);
        // Zero params give exactly 0.5, which classifies benign.
        assert!(report.rows[0].success);
        assert_eq!(report.rows[0].pct_perturbed, 0.0);
    }

    #[test]
    fn c_search_never_does_worse_than_a_single_run() {
        // A model with signal: positive weight on the first feature.
        let mut params = ModelParams::zeros(4, 2);
        let mut k = 0u32;
        params.w_i.iter_mut().for_each(|v| {
            k += 1;
            *v = (k as f64 * 0.3).sin() * 0.4;
        });
        params.w1.iter_mut().enumerate().for_each(|(j, v)| *v = ((j + 1) as f64 * 0.17).cos());
        params.w2 = vec![1.2, -0.7];
        params.b2 = 1.5; // biased toward attack

        let flow: Vec<f64> = (0..2 * FEATURE_COUNT).map(|j| ((j as f64) * 0.21).sin() * 0.4).collect();
        let tensor = Tensor3::new(flow, 1, 2);
        let stats = NormStats::new(0.0, 40.0, -0.5, 0.5).unwrap();

        let single = ead_attack(&params, &tensor, &[Label::Attack], &stats, &EadConfig::default())
            .unwrap();
        let searched = ead_attack(
            &params,
            &tensor,
            &[Label::Attack],
            &stats,
            &EadConfig {
                c_search: true,
                ..Default::default()
            },
        )
        .unwrap();
        let (s, c) = (&single.rows[0], &searched.rows[0]);
        assert!(c.success || !s.success, "search lost a success");
        if s.success && c.success {
            assert!(c.pct_perturbed <= s.pct_perturbed + 1e-9);
        }
    }

    #[test]
    fn benign_flow_is_recorded_untouched() {
        let params = ModelParams::zeros(4, 2);
        let tensor = Tensor3::new(vec![0.25; FEATURE_COUNT], 1, 1);
        let stats = NormStats::new(0.0, 10.0, -0.5, 0.5).unwrap();
        let report =
            ead_attack(&params, &tensor, &[Label::Benign], &stats, &EadConfig::default()).unwrap();
        let row = &report.rows[0];
        assert!(!row.success);
        assert_eq!(row.original, row.perturbed);
        assert_eq!(row.pct_perturbed, 0.0);
    }
}
