//! Procedural stimulus generators for the elementary perceptual tasks and
//! the composite chart tasks.
//!
//! Rendering is a pure function of a [`StimulusSpec`]: the same spec always
//! yields the same canvas, and the generators are safe to call from many
//! workers at once.

mod canvas;
mod render;
mod sampling;
mod task;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use canvas::{bresenham, Canvas, Primitive, CANVAS_SIZE};
pub use render::{grouped_marked_positions, shading_mark_count};
pub use sampling::{
    label_subset_cardinality, partition_key, sample_parameters, split_of, subset_cardinality,
    PartitionSpec, Split, UniqueSampler, PARTITION_MODULUS,
};
pub use task::{
    elementary_label, elementary_param_range, labels_for, param_space, position_angle_labels,
    validate_label_values, ChartStyle, CloudBase, Elementary, FrameStyle, LengthLayout, ParamDim,
    ParamRole, StimulusSpec, TaskKind, Variant,
};

use crate::error::{Error, Result};
use crate::rng::{render_rng, StimulusRng};

/// A rendered stimulus with its normalized labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stimulus {
    pub canvas: Canvas,
    pub labels: Vec<f64>,
    pub spec: StimulusSpec,
}

/// Renders a fully specified stimulus. Randomness (point-cloud dot
/// placement) comes from a stream derived from `spec.seed`.
pub fn render(spec: &StimulusSpec) -> Result<Stimulus> {
    spec.validate()?;
    let mut rng = render_rng(spec.seed);
    render_with(spec, &mut rng)
}

/// Like [`render`], drawing point-cloud randomness from `rng`.
pub fn render_with(spec: &StimulusSpec, rng: &mut StimulusRng) -> Result<Stimulus> {
    spec.validate()?;
    let canvas = render::render(spec, rng);
    Ok(Stimulus {
        canvas,
        labels: labels_for(spec.task, &spec.params),
        spec: spec.clone(),
    })
}

/// Draws the non-label parameters of `variant` from `rng`.
fn draw_rest(task: TaskKind, variant: Variant, rng: &mut StimulusRng) -> Vec<i32> {
    param_space(task, variant)
        .into_iter()
        .skip(task.label_param_count())
        .map(|d| rng.gen_range(d.lo..=d.hi))
        .collect()
}

fn check_label_range(task: TaskKind, variant: Variant, values: &[i32]) -> Result<()> {
    for (d, &v) in param_space(task, variant).iter().zip(values) {
        if !d.contains(v) {
            return Err(Error::RangeViolation {
                name: d.name.clone(),
                value: v as i64,
                lo: d.lo as i64,
                hi: d.hi as i64,
            });
        }
    }
    Ok(())
}

/// Generates one elementary stimulus for `value`; placement and size knobs
/// for `variant` are drawn from `rng`.
pub fn generate_elementary(
    kind: Elementary,
    value: i32,
    variant: Variant,
    rng: &mut StimulusRng,
) -> Result<Stimulus> {
    let task = TaskKind::Elementary(kind);
    check_label_range(task, variant, &[value])?;
    let mut params = vec![value];
    params.extend(draw_rest(task, variant, rng));
    let spec = StimulusSpec {
        task,
        variant,
        params,
        seed: rng.gen(),
    };
    render(&spec)
}

/// Generates a position-angle, position-length or bars-framed stimulus from
/// its marked values. Extras (unmarked bars, baseline offsets) and knobs
/// are drawn from `rng`.
pub fn generate_composite(
    task: TaskKind,
    values: &[i32],
    variant: Variant,
    rng: &mut StimulusRng,
) -> Result<Stimulus> {
    if matches!(task, TaskKind::Elementary(_) | TaskKind::PointCloud(_)) {
        return Err(Error::InvalidValues(format!("{task} is not a composite task")));
    }
    if values.len() != task.label_param_count() {
        return Err(Error::InvalidValues(format!(
            "{task} takes {} values, got {}",
            task.label_param_count(),
            values.len()
        )));
    }
    check_label_range(task, variant, values)?;
    validate_label_values(task, values)?;
    let mut params = values.to_vec();
    params.extend(draw_rest(task, variant, rng));
    let spec = StimulusSpec {
        task,
        variant,
        params,
        seed: rng.gen(),
    };
    render(&spec)
}

/// `base + delta` distinct dots over the whole canvas; label `delta / 10`.
pub fn generate_point_cloud(base: CloudBase, delta: i32, rng: &mut StimulusRng) -> Result<Stimulus> {
    let task = TaskKind::PointCloud(base);
    check_label_range(task, Variant::Base, &[delta])?;
    let mut params = vec![delta];
    params.extend(draw_rest(task, Variant::Base, rng));
    let spec = StimulusSpec {
        task,
        variant: Variant::Base,
        params,
        seed: 0,
    };
    spec.validate()?;
    render_with(&spec, rng)
}
