//! K-fold cross-validated architecture selection: train each candidate on
//! every fold's training split, score the mean heldout loss after the full
//! budget, and return the argmin (ties toward fewer parameters).

use serde::Serialize;

use super::kfold::kfold_split;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::TrainConfig;
use crate::par;
use crate::rng::{derive_seed, stream_rng, streams};
use crate::vos::{elbo_loss, train_vos, Architecture, VosModel};

#[derive(Debug, Clone)]
pub struct CvConfig {
    /// Fold count, at least 2.
    pub k: usize,
    pub candidates: Vec<Architecture>,
    pub seed: u64,
}

impl CvConfig {
    /// Default candidate grid: hidden width in {16, 40, 80} crossed with
    /// latent sizes (10, 5) and (20, 20).
    pub fn default_grid(k: usize, seed: u64) -> Self {
        let mut candidates = Vec::new();
        for hidden in [16, 40, 80] {
            for (l1, l2) in [(10, 5), (20, 20)] {
                candidates.push(Architecture::symmetric(hidden, l1, l2));
            }
        }
        CvConfig {
            k,
            candidates,
            seed,
        }
    }
}

/// Per-candidate scoring record, emitted alongside the chosen architecture.
#[derive(Debug, Clone, Serialize)]
pub struct CandidateScore {
    pub architecture: Architecture,
    /// Heldout mean loss per fold; `None` marks a fold whose training run
    /// diverged.
    pub fold_losses: Vec<Option<f64>>,
    /// Mean over folds; `None` when any fold failed.
    pub mean_loss: Option<f64>,
    pub param_count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchReport {
    pub scores: Vec<CandidateScore>,
    pub best_index: usize,
}

impl SearchReport {
    pub fn best(&self) -> &Architecture {
        &self.scores[self.best_index].architecture
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("search report serializes")
    }
}

/// Argmin over `(mean_loss, param_count)` pairs: smallest mean loss wins,
/// exact ties resolve toward fewer parameters. `None` losses never win.
/// Returns `None` when every candidate failed.
pub fn select_best(scores: &[(Option<f64>, usize)]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, (loss, params)) in scores.iter().enumerate() {
        let Some(loss) = loss else { continue };
        match best {
            None => best = Some(i),
            Some(b) => {
                let (Some(best_loss), best_params) = (&scores[b].0, scores[b].1) else {
                    unreachable!()
                };
                if loss < best_loss || (loss == best_loss && *params < best_params) {
                    best = Some(i);
                }
            }
        }
    }
    best
}

/// Trains one model per (candidate, fold) and picks the candidate with the
/// lowest fold-mean heldout loss. Jobs are independent and run through the
/// parallel seam with per-job derived seeds, so the outcome is identical in
/// sequential and parallel builds.
pub fn architecture_search(
    data: &Dataset,
    cv: &CvConfig,
    train: &TrainConfig,
) -> Result<SearchReport> {
    if cv.candidates.is_empty() {
        return Err(Error::InvalidConfig("no candidate architectures".into()));
    }
    for arch in &cv.candidates {
        arch.validate()?;
    }
    let folds = kfold_split(data, cv.k, cv.seed)?;
    let splits: Vec<(Dataset, Dataset)> = folds
        .iter()
        .map(|(tr, ho)| (data.subset(tr), data.subset(ho)))
        .collect();

    let n_jobs = cv.candidates.len() * cv.k;
    let job_results: Vec<Option<f64>> = par::map_range(n_jobs, |job| {
        let cand = job / cv.k;
        let fold = job % cv.k;
        let (train_split, heldout) = &splits[fold];
        let job_stream = streams::SEARCH_BASE + 2 * job as u64;
        let job_seed = derive_seed(cv.seed, job_stream);
        let cfg = TrainConfig {
            seed: job_seed,
            ..train.clone()
        };
        let mut model = match VosModel::new(&data.kinds, &cv.candidates[cand], job_seed) {
            Ok(m) => m,
            Err(_) => return None,
        };
        if train_vos(&mut model, train_split, &cfg).is_err() {
            return None;
        }
        let mut eval_rng = stream_rng(cv.seed, job_stream + 1);
        match elbo_loss(&model, &heldout.features, &heldout.labels, &mut eval_rng) {
            Ok(b) if b.loss().is_finite() => Some(b.loss()),
            _ => None,
        }
    });

    let scores: Vec<CandidateScore> = cv
        .candidates
        .iter()
        .enumerate()
        .map(|(ci, arch)| {
            let fold_losses: Vec<Option<f64>> =
                (0..cv.k).map(|f| job_results[ci * cv.k + f]).collect();
            let mean_loss = if fold_losses.iter().all(Option::is_some) {
                Some(fold_losses.iter().map(|l| l.unwrap()).sum::<f64>() / cv.k as f64)
            } else {
                None
            };
            CandidateScore {
                architecture: arch.clone(),
                fold_losses,
                mean_loss,
                param_count: arch.param_count(&data.kinds),
            }
        })
        .collect();

    let ranked: Vec<(Option<f64>, usize)> = scores
        .iter()
        .map(|s| (s.mean_loss, s.param_count))
        .collect();
    let best_index = select_best(&ranked).ok_or_else(|| {
        let failures: Vec<String> = scores
            .iter()
            .map(|s| format!("{}: diverged", s.architecture.describe()))
            .collect();
        Error::SearchFailed(failures.join("; "))
    })?;

    Ok(SearchReport { scores, best_index })
}
