//! Class-separability evaluation: computes both dimension estimators over a
//! labelled image manifest and reports intra-class distance, inter-class
//! distance, and their ratio per method.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{self, PipelineOptions};
use crate::netpbm;
use crate::preprocess;

/// One image of a labelled class, with the pipeline settings to use for it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub path: PathBuf,
    #[serde(default)]
    pub options: PipelineOptions,
}

/// Labelled classes of images. Requires at least two classes and two images
/// per class so intra-class distances exist.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassManifest {
    pub classes: BTreeMap<String, Vec<ManifestEntry>>,
}

impl ClassManifest {
    pub fn from_json(json: &str) -> Result<Self> {
        let manifest: ClassManifest =
            serde_json::from_str(json).map_err(|e| Error::Manifest(e.to_string()))?;
        manifest.validate()?;
        Ok(manifest)
    }

    /// Load a manifest file; entry paths are resolved relative to the
    /// manifest's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let json = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let mut manifest = Self::from_json(&json)?;
        if let Some(dir) = path.parent() {
            for entries in manifest.classes.values_mut() {
                for entry in entries {
                    if entry.path.is_relative() {
                        entry.path = dir.join(&entry.path);
                    }
                }
            }
        }
        Ok(manifest)
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes.len() < 2 {
            return Err(Error::Manifest(format!(
                "need at least 2 classes, got {}",
                self.classes.len()
            )));
        }
        for (label, entries) in &self.classes {
            if entries.len() < 2 {
                return Err(Error::Manifest(format!(
                    "class {label:?} has {} image(s); intra-class distance needs at least 2",
                    entries.len()
                )));
            }
        }
        Ok(())
    }
}

/// Distance summary of one method's per-image values.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Separability {
    /// Mean over classes of the mean pairwise absolute difference within
    /// the class.
    pub intra: f64,
    /// Absolute difference of the two class means, or the mean pairwise
    /// distance of class means when there are more than two classes.
    pub inter: f64,
    /// `inter / intra`; absent when every class is internally constant.
    pub ratio: Option<f64>,
}

/// Compute the separability summary from per-class value lists.
pub fn separability(values: &BTreeMap<String, Vec<f64>>) -> Result<Separability> {
    if values.len() < 2 {
        return Err(Error::Manifest(format!(
            "need at least 2 classes, got {}",
            values.len()
        )));
    }
    let mut intra_sum = 0.0;
    let mut means = Vec::with_capacity(values.len());
    for (label, class) in values {
        if class.len() < 2 {
            return Err(Error::Manifest(format!(
                "class {label:?} has {} value(s); intra-class distance undefined",
                class.len()
            )));
        }
        let mut pair_sum = 0.0;
        let mut pairs = 0u64;
        for i in 0..class.len() {
            for j in i + 1..class.len() {
                pair_sum += (class[i] - class[j]).abs();
                pairs += 1;
            }
        }
        intra_sum += pair_sum / pairs as f64;
        means.push(class.iter().sum::<f64>() / class.len() as f64);
    }
    let intra = intra_sum / values.len() as f64;

    let mut inter_sum = 0.0;
    let mut inter_pairs = 0u64;
    for i in 0..means.len() {
        for j in i + 1..means.len() {
            inter_sum += (means[i] - means[j]).abs();
            inter_pairs += 1;
        }
    }
    let inter = inter_sum / inter_pairs as f64;

    let ratio = if intra > 0.0 {
        Some(inter / intra)
    } else {
        None
    };
    Ok(Separability {
        intra,
        inter,
        ratio,
    })
}

/// Differentiability improvement of `improved` over `baseline`: the ratio
/// of their inter/intra ratios. Absent when either ratio is undefined.
pub fn improvement(baseline: &Separability, improved: &Separability) -> Option<f64> {
    match (baseline.ratio, improved.ratio) {
        (Some(b), Some(i)) if b > 0.0 => Some(i / b),
        _ => None,
    }
}

/// Per-image measurement row of the evaluation report.
#[derive(Debug, Clone, Serialize)]
pub struct ImageMeasurement {
    pub class: String,
    pub path: String,
    pub hfd: f64,
    pub mhfd: f64,
}

/// Side-by-side separability of both estimators over a manifest.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub images: Vec<ImageMeasurement>,
    pub hfd: Separability,
    pub mhfd: Separability,
    /// MHFD differentiability ratio over the HFD one.
    pub improvement: Option<f64>,
    /// Images that failed to load or compute, with the reason; excluded
    /// from the statistics.
    pub exclusions: Vec<String>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Per-image values as CSV, one row per measured image.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("class,path,hfd,mhfd\n");
        for row in &self.images {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.class, row.path, row.hfd, row.mhfd
            ));
        }
        out
    }
}

fn measure(entry: &ManifestEntry, class: &str) -> std::result::Result<(f64, f64), String> {
    let describe = |e: Error| format!("{} ({}): {e}", entry.path.display(), class);
    let bytes = std::fs::read(&entry.path).map_err(|e| {
        describe(Error::Io {
            path: entry.path.display().to_string(),
            source: e,
        })
    })?;
    let image = netpbm::load(&bytes).map_err(&describe)?;
    let (binary, _) = preprocess::reduce_to_binary(&image).map_err(&describe)?;

    let mut hfd_opts = entry.options.clone();
    hfd_opts.method = estimator::Method::Hfd;
    let hfd = estimator::compute(&binary, &hfd_opts).map_err(&describe)?;

    let mut mhfd_opts = entry.options.clone();
    mhfd_opts.method = estimator::Method::Mhfd;
    let mhfd = estimator::compute(&binary, &mhfd_opts).map_err(&describe)?;
    Ok((hfd.value, mhfd.value))
}

/// Measure every manifest image with both estimators and summarize
/// class separability per method.
///
/// Images that fail to load or compute are listed under `exclusions`; the
/// run fails if any class drops below two usable images.
pub fn run_manifest(manifest: &ClassManifest) -> Result<EvalReport> {
    manifest.validate()?;

    let jobs: Vec<(&String, &ManifestEntry)> = manifest
        .classes
        .iter()
        .flat_map(|(label, entries)| entries.iter().map(move |e| (label, e)))
        .collect();
    let outcomes: Vec<std::result::Result<(f64, f64), String>> = jobs
        .par_iter()
        .map(|(label, entry)| measure(entry, label))
        .collect();

    let mut images = Vec::new();
    let mut exclusions = Vec::new();
    let mut hfd_values: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut mhfd_values: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for ((label, entry), outcome) in jobs.iter().zip(outcomes) {
        match outcome {
            Ok((hfd, mhfd)) => {
                images.push(ImageMeasurement {
                    class: (*label).clone(),
                    path: entry.path.display().to_string(),
                    hfd,
                    mhfd,
                });
                hfd_values.entry((*label).clone()).or_default().push(hfd);
                mhfd_values.entry((*label).clone()).or_default().push(mhfd);
            }
            Err(reason) => exclusions.push(reason),
        }
    }

    for label in manifest.classes.keys() {
        let usable = hfd_values.get(label).map_or(0, Vec::len);
        if usable < 2 {
            return Err(Error::Manifest(format!(
                "class {label:?} has {usable} usable image(s) after exclusions"
            )));
        }
    }

    let hfd = separability(&hfd_values)?;
    let mhfd = separability(&mhfd_values)?;
    let improvement = improvement(&hfd, &mhfd);
    Ok(EvalReport {
        images,
        hfd,
        mhfd,
        improvement,
        exclusions,
    })
}
