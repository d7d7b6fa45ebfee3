//! Challenge metrics: FRR/FAR for KWS, MAE/ACC for SSL, ranking and the
//! log-linear learning-rate schedule.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ssl::angle_distance;

/// ACC tolerances in degrees and their weights in the SSL score.
pub const ACC_TOLERANCES: [f64; 3] = [10.0, 7.5, 5.0];
pub const ACC_WEIGHTS: [f64; 3] = [0.3, 0.35, 0.35];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KwsScore {
    pub n_key: usize,
    pub n_nonkey: usize,
    pub n_fr: usize,
    pub n_fa: usize,
    pub frr: f64,
    pub far: f64,
    pub score: f64,
}

fn kws_counts(truth: &[bool], pred: &[u8]) -> Result<[usize; 4]> {
    if truth.len() != pred.len() {
        return Err(Error::param(format!("{} truths vs {} predictions", truth.len(), pred.len())));
    }
    let mut c = [0usize; 4];
    for (i, (&t, &p)) in truth.iter().zip(pred).enumerate() {
        if p > 1 {
            return Err(Error::param(format!("prediction {i}: label {p} is not 0 or 1")));
        }
        match (t, p == 1) {
            (true, false) => {
                c[0] += 1;
                c[2] += 1;
            }
            (true, true) => c[0] += 1,
            (false, true) => {
                c[1] += 1;
                c[3] += 1;
            }
            (false, false) => c[1] += 1,
        }
    }
    Ok(c)
}

/// FRR = N_FR / N_key, FAR = N_FA / N_non-key, score = FRR + FAR.
pub fn kws_metrics(truth: &[bool], pred: &[u8]) -> Result<KwsScore> {
    let [n_key, n_nonkey, n_fr, n_fa] = kws_counts(truth, pred)?;
    if n_key == 0 || n_nonkey == 0 {
        return Err(Error::UndefinedMetric(format!(
            "need keyword and non-keyword examples (got {n_key} and {n_nonkey})"
        )));
    }
    Ok(kws_score_from_counts(n_key, n_nonkey, n_fr, n_fa))
}

pub fn kws_score_from_counts(n_key: usize, n_nonkey: usize, n_fr: usize, n_fa: usize) -> KwsScore {
    let frr = n_fr as f64 / n_key as f64;
    let far = n_fa as f64 / n_nonkey as f64;
    KwsScore {
        n_key,
        n_nonkey,
        n_fr,
        n_fa,
        frr,
        far,
        score: frr + far,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SslScore {
    pub errors: Vec<u16>,
    pub mae: f64,
    pub acc10: f64,
    pub acc7_5: f64,
    pub acc5: f64,
    pub mae_baseline: f64,
    pub score: f64,
}

/// Circular absolute errors, MAE, ACC at 10/7.5/5 degrees and
/// `0.3·ACC₁₀ + 0.35·ACC₇.₅ + 0.35·ACC₅ + (1 − MAE/MAE_baseline)`.
pub fn ssl_metrics(truth: &[u16], pred: &[u16], mae_baseline: f64) -> Result<SslScore> {
    if truth.len() != pred.len() {
        return Err(Error::param(format!("{} truths vs {} predictions", truth.len(), pred.len())));
    }
    if truth.is_empty() {
        return Err(Error::param("no examples"));
    }
    if !(mae_baseline > 0.0 && mae_baseline.is_finite()) {
        return Err(Error::param("MAE baseline must be positive"));
    }
    let errors = truth
        .iter()
        .zip(pred)
        .map(|(&t, &p)| angle_distance(t, p))
        .collect::<Result<Vec<_>>>()?;
    let n = errors.len() as f64;
    let mae = errors.iter().map(|&e| f64::from(e)).sum::<f64>() / n;
    let acc = |delta: f64| errors.iter().filter(|&&e| f64::from(e) <= delta).count() as f64 / n;
    let (acc10, acc7_5, acc5) = (acc(ACC_TOLERANCES[0]), acc(ACC_TOLERANCES[1]), acc(ACC_TOLERANCES[2]));
    let score =
        ACC_WEIGHTS[0] * acc10 + ACC_WEIGHTS[1] * acc7_5 + ACC_WEIGHTS[2] * acc5 + (1.0 - mae / mae_baseline);
    Ok(SslScore {
        errors,
        mae,
        acc10,
        acc7_5,
        acc5,
        mae_baseline,
        score,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub score: f64,
    pub time_delay_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Track {
    /// Lower score ranks higher.
    Kws,
    /// Higher score ranks higher.
    Ssl,
}

/// Indices of `entries` from best to worst. Exact score ties go to the
/// lower time delay, then to submission order.
pub fn rank_systems(entries: &[RankEntry], track: Track) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..entries.len()).collect();
    idx.sort_by(|&a, &b| {
        let (ea, eb) = (&entries[a], &entries[b]);
        let by_score = match track {
            Track::Kws => ea.score.total_cmp(&eb.score),
            Track::Ssl => eb.score.total_cmp(&ea.score),
        };
        by_score.then(ea.time_delay_ms.total_cmp(&eb.time_delay_ms))
    });
    idx
}

/// `lr0 · exp(j/(S−1) · ln(lr_final/lr0))`.
pub fn lr_at_step(lr0: f64, lr_final: f64, total_steps: usize, step: usize) -> Result<f64> {
    if !(lr0 > 0.0 && lr_final > 0.0) {
        return Err(Error::param("learning rates must be positive"));
    }
    if total_steps < 2 || step >= total_steps {
        return Err(Error::param(format!("step {step} invalid for {total_steps} total steps")));
    }
    Ok(lr0 * (step as f64 / (total_steps - 1) as f64 * (lr_final / lr0).ln()).exp())
}

/// Four decimal places, as reported.
pub fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Debug, Clone, PartialEq)]
pub struct KwsItem {
    pub scenario: String,
    pub room: String,
    pub has_keyword: bool,
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KwsGroupRow {
    pub group: String,
    pub n_key: usize,
    pub n_nonkey: usize,
    pub n_fr: usize,
    pub n_fa: usize,
    pub frr: Option<f64>,
    pub far: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KwsReport {
    pub track: Track,
    pub overall: KwsScore,
    pub scenarios: Vec<KwsGroupRow>,
    pub rooms: Vec<KwsGroupRow>,
}

fn kws_group_rows(items: &[KwsItem], key: impl Fn(&KwsItem) -> &str) -> Result<Vec<KwsGroupRow>> {
    let mut groups: BTreeMap<&str, (Vec<bool>, Vec<u8>)> = BTreeMap::new();
    for it in items {
        let g = groups.entry(key(it)).or_default();
        g.0.push(it.has_keyword);
        g.1.push(it.label);
    }
    groups
        .into_iter()
        .map(|(name, (t, p))| {
            let [n_key, n_nonkey, n_fr, n_fa] = kws_counts(&t, &p)?;
            Ok(KwsGroupRow {
                group: name.to_string(),
                n_key,
                n_nonkey,
                n_fr,
                n_fa,
                frr: (n_key > 0).then(|| round4(n_fr as f64 / n_key as f64)),
                far: (n_nonkey > 0).then(|| round4(n_fa as f64 / n_nonkey as f64)),
            })
        })
        .collect()
}

/// Pooled FRR/FAR over every item plus per-scenario and per-room rows.
pub fn kws_report(items: &[KwsItem]) -> Result<KwsReport> {
    let truth: Vec<bool> = items.iter().map(|i| i.has_keyword).collect();
    let pred: Vec<u8> = items.iter().map(|i| i.label).collect();
    let mut overall = kws_metrics(&truth, &pred)?;
    overall.frr = round4(overall.frr);
    overall.far = round4(overall.far);
    overall.score = round4(overall.score);
    Ok(KwsReport {
        track: Track::Kws,
        overall,
        scenarios: kws_group_rows(items, |i| &i.scenario)?,
        rooms: kws_group_rows(items, |i| &i.room)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SslItem {
    pub scenario: String,
    pub room: String,
    pub truth: u16,
    pub label: u16,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SslGroupRow {
    pub group: String,
    pub n: usize,
    pub mae: f64,
    pub acc10: f64,
    pub acc7_5: f64,
    pub acc5: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SslOverall {
    pub n: usize,
    pub mae: f64,
    pub acc10: f64,
    pub acc7_5: f64,
    pub acc5: f64,
    pub mae_baseline: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SslReport {
    pub track: Track,
    pub overall: SslOverall,
    pub scenarios: Vec<SslGroupRow>,
    pub rooms: Vec<SslGroupRow>,
}

fn ssl_group_rows(items: &[SslItem], mae_baseline: f64, key: impl Fn(&SslItem) -> &str) -> Result<Vec<SslGroupRow>> {
    let mut groups: BTreeMap<&str, (Vec<u16>, Vec<u16>)> = BTreeMap::new();
    for it in items {
        let g = groups.entry(key(it)).or_default();
        g.0.push(it.truth);
        g.1.push(it.label);
    }
    groups
        .into_iter()
        .map(|(name, (t, p))| {
            let s = ssl_metrics(&t, &p, mae_baseline)?;
            Ok(SslGroupRow {
                group: name.to_string(),
                n: t.len(),
                mae: round4(s.mae),
                acc10: round4(s.acc10),
                acc7_5: round4(s.acc7_5),
                acc5: round4(s.acc5),
                score: round4(s.score),
            })
        })
        .collect()
}

pub fn ssl_report(items: &[SslItem], mae_baseline: f64) -> Result<SslReport> {
    let truth: Vec<u16> = items.iter().map(|i| i.truth).collect();
    let pred: Vec<u16> = items.iter().map(|i| i.label).collect();
    let s = ssl_metrics(&truth, &pred, mae_baseline)?;
    Ok(SslReport {
        track: Track::Ssl,
        overall: SslOverall {
            n: items.len(),
            mae: round4(s.mae),
            acc10: round4(s.acc10),
            acc7_5: round4(s.acc7_5),
            acc5: round4(s.acc5),
            mae_baseline,
            score: round4(s.score),
        },
        scenarios: ssl_group_rows(items, mae_baseline, |i| &i.scenario)?,
        rooms: ssl_group_rows(items, mae_baseline, |i| &i.room)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kws_examples() {
        let truth = [true, true, false, false];
        let s = kws_metrics(&truth, &[1, 1, 0, 0]).unwrap();
        assert_eq!((s.frr, s.far, s.score), (0.0, 0.0, 0.0));
        let s = kws_metrics(&truth, &[1, 1, 1, 1]).unwrap();
        assert_eq!((s.frr, s.far, s.score), (0.0, 1.0, 1.0));
        assert!(matches!(kws_metrics(&[true], &[1]), Err(Error::UndefinedMetric(_))));
        assert!(kws_metrics(&truth, &[2, 0, 0, 0]).is_err());
    }

    #[test]
    fn table_averages_sum() {
        // Deep KWS: FRR 0.32, FAR 0.19; keyword-filler: 0.35, 0.14.
        let deep = kws_score_from_counts(100, 100, 32, 19);
        assert!((deep.score - 0.51).abs() < 1e-12);
        let filler = kws_score_from_counts(100, 100, 35, 14);
        assert!((filler.score - 0.49).abs() < 1e-12);
    }

    #[test]
    fn ssl_examples() {
        let t: Vec<u16> = (1..=20).map(|i| i * 17).collect();
        assert_eq!(ssl_metrics(&t, &t, 13.0).unwrap().score, 2.0);
        let s = ssl_metrics(&[100, 100], &[105, 115], 20.0).unwrap();
        assert_eq!((s.acc10, s.acc7_5, s.acc5, s.mae), (0.5, 0.5, 0.5, 10.0));
        let truth: Vec<u16> = (1..=180).collect();
        let mut pred = truth.clone();
        pred[0] = 181;
        let s = ssl_metrics(&truth, &pred, 10.0).unwrap();
        assert_eq!(s.mae, 1.0);
        assert_eq!(s.acc10, 179.0 / 180.0);
        assert!(ssl_metrics(&[1, 2], &[1], 1.0).is_err());
        assert!(ssl_metrics(&[1], &[1], 0.0).is_err());
        // Wraparound: 359 vs 1 is a 2-degree error.
        assert_eq!(ssl_metrics(&[359], &[1], 10.0).unwrap().errors, vec![2]);
    }

    #[test]
    fn ranking() {
        let e = |s, d| RankEntry { score: s, time_delay_ms: d };
        assert_eq!(rank_systems(&[e(0.51, 0.0), e(0.49, 0.0)], Track::Kws), vec![1, 0]);
        assert_eq!(rank_systems(&[e(1.2, 400.0), e(1.2, 200.0)], Track::Ssl), vec![1, 0]);
        assert_eq!(rank_systems(&[e(1.0, 400.0), e(1.5, 200.0)], Track::Ssl), vec![1, 0]);
        assert_eq!(rank_systems(&[e(1.0, 1.0), e(1.0, 1.0)], Track::Kws), vec![0, 1]);
        assert_eq!(rank_systems(&[e(3.0, 1.0)], Track::Kws), vec![0]);
    }

    #[test]
    fn lr_schedule() {
        assert_eq!(lr_at_step(0.01, 0.0001, 101, 0).unwrap(), 0.01);
        assert!((lr_at_step(0.01, 0.0001, 101, 100).unwrap() - 0.0001).abs() < 1e-18);
        assert!((lr_at_step(0.01, 0.0001, 101, 50).unwrap() - 0.001).abs() < 1e-15);
        assert!(lr_at_step(0.0, 0.1, 10, 1).is_err());
        assert!(lr_at_step(0.1, 0.1, 1, 0).is_err());
        assert!(lr_at_step(0.1, 0.1, 10, 10).is_err());
    }

    #[test]
    fn reports_group_and_round() {
        let items = vec![
            KwsItem { scenario: "Keyword only".into(), room: "a".into(), has_keyword: true, label: 0 },
            KwsItem { scenario: "Keyword only".into(), room: "a".into(), has_keyword: true, label: 1 },
            KwsItem { scenario: "Keyword only".into(), room: "b".into(), has_keyword: true, label: 1 },
            KwsItem { scenario: "Speech only".into(), room: "b".into(), has_keyword: false, label: 1 },
            KwsItem { scenario: "Speech only".into(), room: "b".into(), has_keyword: false, label: 0 },
        ];
        let r = kws_report(&items).unwrap();
        assert_eq!(r.overall.frr, 0.3333);
        assert_eq!(r.overall.far, 0.5);
        assert_eq!(r.scenarios[0].frr, Some(0.3333));
        assert_eq!(r.scenarios[0].far, None);
        assert_eq!(r.scenarios[1].far, Some(0.5));
        assert_eq!(r.rooms.len(), 2);

        let s = ssl_report(
            &[
                SslItem { scenario: "x".into(), room: "r".into(), truth: 10, label: 10 },
                SslItem { scenario: "y".into(), room: "r".into(), truth: 10, label: 30 },
            ],
            20.0,
        )
        .unwrap();
        assert_eq!(s.overall.mae, 10.0);
        assert_eq!(s.scenarios[0].score, 2.0);
    }

    proptest! {
        #[test]
        fn acc_ordering_and_boundary(errs in prop::collection::vec(1u16..=360, 1..50), k in 0usize..50) {
            let truth = vec![1u16; errs.len()];
            let s = ssl_metrics(&truth, &errs, 30.0).unwrap();
            prop_assert!(s.acc5 <= s.acc7_5 && s.acc7_5 <= s.acc10);
            prop_assert!((0.0..=180.0).contains(&s.mae));
            // Pushing one error from within 5 to just past 10 lowers the score.
            let i = k % errs.len();
            let mut a = errs.clone();
            a[i] = 4;
            let mut b = errs.clone();
            b[i] = 12;
            let sa = ssl_metrics(&truth, &a, 30.0).unwrap().score;
            let sb = ssl_metrics(&truth, &b, 30.0).unwrap().score;
            prop_assert!(sb < sa);
        }

        #[test]
        fn lr_log_affine(lr0 in 1e-5f64..1.0, lr1 in 1e-5f64..1.0, s in 3usize..1000) {
            let l = |j| lr_at_step(lr0, lr1, s, j).unwrap().ln();
            let slope = (l(s - 1) - l(0)) / (s - 1) as f64;
            for j in [1, s / 2, s - 2] {
                prop_assert!((l(j) - (l(0) + slope * j as f64)).abs() < 1e-9);
            }
        }
    }
}
