use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::format::{sha256_file, TensorHeader, TensorWriter};
use super::image::{normalize_and_noise, FloatImage};
use super::manifest::{
    Dataset, DatasetManifest, FileEntry, SplitCounts, SplitFiles, FORMAT_VERSION,
};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::rng::{example_seed, param_rng, render_rng};
use crate::stimuli::{
    param_space, render_with, sample_parameters, PartitionSpec, Split, StimulusSpec, TaskKind,
    UniqueSampler, Variant, CANVAS_SIZE,
};

pub const SEED_DERIVATION: &str = "seed = splitmix64(splitmix64(base_seed ^ splitmix64(split_id)) ^ index), \
split_id train=0 val=1 test=2; parameters from ChaCha8(seed), pixels and noise from \
ChaCha8(splitmix64(seed ^ 0xD1B54A32D192ED03))";

pub const NOISE_MODEL: &str =
    "value = bit - 0.5 + (1 - 2*bit) * u, u uniform on [0, 0.05) in steps of 2^-25";

const CHUNK: usize = 512;

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    /// Require distinct parameter tuples within each split.
    pub unique_params: bool,
    pub exec: Exec,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            unique_params: false,
            exec: Exec::auto(),
        }
    }
}

/// Generation parameters of one example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleParams {
    pub index: usize,
    pub seed: u64,
    pub params: Vec<i32>,
}

/// Draws the parameters of every example of `split` in index order.
///
/// Without `unique`, each example depends only on its own seed. With it,
/// duplicates are redrawn from the same per-example stream, so replay must
/// also walk the split in order.
pub fn draw_split_params(
    task: TaskKind,
    variant: Variant,
    base_seed: u64,
    split: Split,
    count: usize,
    unique: bool,
) -> Result<Vec<ExampleParams>> {
    let mut sampler = if unique {
        UniqueSampler::check_capacity(task, variant, split, count)?;
        Some(UniqueSampler::new())
    } else {
        None
    };
    (0..count)
        .map(|index| {
            let seed = example_seed(base_seed, split.id(), index as u64);
            let mut rng = param_rng(seed);
            let params = match sampler.as_mut() {
                Some(s) => s.draw(task, variant, split, &mut rng)?,
                None => sample_parameters(task, variant, split, &mut rng)?,
            };
            Ok(ExampleParams { index, seed, params })
        })
        .collect()
}

/// Rasterizes, normalizes and noises one example.
pub fn render_example(
    task: TaskKind,
    variant: Variant,
    ex: &ExampleParams,
) -> Result<(FloatImage, Vec<f32>)> {
    let spec = StimulusSpec {
        task,
        variant,
        params: ex.params.clone(),
        seed: ex.seed,
    };
    let mut rng = render_rng(ex.seed);
    let stim = render_with(&spec, &mut rng)?;
    let image = normalize_and_noise(&stim.canvas, &mut rng);
    Ok((image, stim.labels.iter().map(|&l| l as f32).collect()))
}

pub fn tensor_file_name(split: Split) -> String {
    format!("{}.pbt", split.name())
}

pub fn params_file_name(split: Split) -> String {
    format!("{}.params.csv", split.name())
}

/// Generates a dataset into `out_dir`: three tensor files, three parameter
/// files and `manifest.json`. Identical inputs give byte-identical files.
pub fn build_dataset(
    task: TaskKind,
    variant: Variant,
    total_count: usize,
    base_seed: u64,
    out_dir: &Path,
    opts: BuildOptions,
) -> Result<Dataset> {
    if total_count < 5 {
        return Err(Error::Config(format!(
            "total_count must be at least 5, got {total_count}"
        )));
    }
    if total_count > u32::MAX as usize {
        return Err(Error::Config("total_count exceeds u32 range".into()));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let counts = SplitCounts::for_total(total_count);
    let partition = PartitionSpec::for_task(task, variant);

    let mut files = Vec::with_capacity(3);
    for split in Split::ALL {
        let n = counts.get(split);
        let examples = draw_split_params(task, variant, base_seed, split, n, opts.unique_params)?;
        let params = write_params_file(out_dir, split, task, variant, &examples)?;
        let tensors = write_tensor_file(out_dir, split, task, variant, &examples, opts.exec)?;
        files.push(SplitFiles { tensors, params });
    }
    let mut files = files.into_iter();

    let manifest = DatasetManifest {
        format_version: FORMAT_VERSION,
        task,
        variant,
        total_count,
        split_counts: counts,
        label_dim: task.label_dim(),
        base_seed,
        unique_params: opts.unique_params,
        image: DatasetManifest::default_image(),
        seed_derivation: SEED_DERIVATION.into(),
        noise: NOISE_MODEL.into(),
        parameter_partition: partition,
        train: files.next().unwrap(),
        val: files.next().unwrap(),
        test: files.next().unwrap(),
    };
    manifest.write(out_dir)?;
    Ok(Dataset {
        dir: out_dir.to_path_buf(),
        manifest,
    })
}

fn write_tensor_file(
    dir: &Path,
    split: Split,
    task: TaskKind,
    variant: Variant,
    examples: &[ExampleParams],
    exec: Exec,
) -> Result<FileEntry> {
    let name = tensor_file_name(split);
    let path = dir.join(&name);
    let header = TensorHeader {
        count: examples.len() as u32,
        height: CANVAS_SIZE as u32,
        width: CANVAS_SIZE as u32,
        label_dim: task.label_dim() as u32,
    };
    let mut w = TensorWriter::create(&path, header)?;
    for chunk in examples.chunks(CHUNK) {
        let rendered = exec.try_map_indexed(chunk.len(), |j| render_example(task, variant, &chunk[j]))?;
        for (img, labels) in &rendered {
            w.write_record(img, labels)?;
        }
    }
    let (sha256, bytes) = w.finish()?;
    Ok(FileEntry {
        path: name,
        sha256,
        bytes,
    })
}

pub(crate) fn params_header(task: TaskKind, variant: Variant) -> Vec<String> {
    let mut h = vec!["index".to_string(), "seed".to_string()];
    h.extend(param_space(task, variant).into_iter().map(|d| d.name));
    h
}

pub(crate) fn write_params_file(
    dir: &Path,
    split: Split,
    task: TaskKind,
    variant: Variant,
    examples: &[ExampleParams],
) -> Result<FileEntry> {
    let name = params_file_name(split);
    let path = dir.join(&name);
    let csv_err = |e| Error::Csv {
        path: path.clone(),
        source: e,
    };
    let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
    w.write_record(params_header(task, variant)).map_err(csv_err)?;
    for ex in examples {
        let mut row = vec![ex.index.to_string(), ex.seed.to_string()];
        row.extend(ex.params.iter().map(|p| p.to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    drop(w);
    let bytes = fs::metadata(&path).map_err(|e| Error::io(&path, e))?.len();
    Ok(FileEntry {
        path: name,
        sha256: sha256_file(&path)?,
        bytes,
    })
}

pub(crate) fn read_params_file(path: &Path) -> Result<Vec<ExampleParams>> {
    let csv_err = |e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let bad = |what: &str| Error::Format(format!("{}: bad {what} in row {:?}", path.display(), rec));
        let index = rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(|| bad("index"))?;
        let seed = rec.get(1).and_then(|s| s.parse().ok()).ok_or_else(|| bad("seed"))?;
        let params = rec
            .iter()
            .skip(2)
            .map(|s| s.parse::<i32>().map_err(|_| bad("parameter")))
            .collect::<Result<Vec<_>>>()?;
        out.push(ExampleParams { index, seed, params });
    }
    Ok(out)
}
