//! Disjoint per-split parameter spaces.
//!
//! Every task partitions its label-bearing parameters into five residue
//! classes. Classes 0–2 belong to train, 3 to validation and 4 to test,
//! giving the 0.6 : 0.2 : 0.2 proportions of the splits themselves.
//! Scalar labels use the value itself as the key; tuple labels use
//! `splitmix64(packed tuple)`. Extras and placement knobs are drawn freely.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::task::{param_space, validate_label_values, ParamDim, ParamRole, TaskKind, Variant};
use crate::error::{Error, Result};
use crate::rng::{splitmix64, StimulusRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn id(self) -> u64 {
        self as u64
    }

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }

    pub fn residues(self) -> &'static [u64] {
        match self {
            Split::Train => &[0, 1, 2],
            Split::Val => &[3],
            Split::Test => &[4],
        }
    }

    fn from_residue(r: u64) -> Split {
        match r {
            0..=2 => Split::Train,
            3 => Split::Val,
            _ => Split::Test,
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" | "validation" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            _ => Err(Error::Unknown {
                what: "split",
                value: s.to_string(),
            }),
        }
    }
}

pub const PARTITION_MODULUS: u64 = 5;

/// Partition key of the label-bearing parameters.
pub fn partition_key(task: TaskKind, label_params: &[i32]) -> u64 {
    if label_params.len() == 1 {
        label_params[0].rem_euclid(PARTITION_MODULUS as i32) as u64
    } else {
        let packed = label_params
            .iter()
            .fold(0u64, |acc, &v| (acc << 8) | (v as u64 & 0xFF));
        // distinct salt per family so equal tuples in different tasks land independently
        let salt = task.family().bytes().fold(0u64, |h, b| splitmix64(h ^ b as u64));
        splitmix64(packed ^ salt) % PARTITION_MODULUS
    }
}

/// Split owning a full parameter vector (only label parameters matter).
pub fn split_of(task: TaskKind, params: &[i32]) -> Split {
    let key = partition_key(task, &params[..task.label_param_count()]);
    Split::from_residue(key % PARTITION_MODULUS)
}

/// Human-readable description of the partition, recorded in manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSpec {
    pub scheme: String,
    pub modulus: u64,
    pub key_params: Vec<String>,
    pub train_residues: Vec<u64>,
    pub val_residues: Vec<u64>,
    pub test_residues: Vec<u64>,
    pub params: Vec<ParamDim>,
}

impl PartitionSpec {
    pub fn for_task(task: TaskKind, variant: Variant) -> Self {
        let params = param_space(task, variant);
        let key_params: Vec<String> = params
            .iter()
            .filter(|d| d.role == ParamRole::Label)
            .map(|d| d.name.clone())
            .collect();
        let scheme = if key_params.len() == 1 {
            "value-residue-mod-5"
        } else {
            "splitmix64-tuple-mod-5"
        };
        PartitionSpec {
            scheme: scheme.into(),
            modulus: PARTITION_MODULUS,
            key_params,
            train_residues: Split::Train.residues().to_vec(),
            val_residues: Split::Val.residues().to_vec(),
            test_residues: Split::Test.residues().to_vec(),
            params,
        }
    }
}

/// Draws one parameter vector uniformly from `split`'s subset.
///
/// Label parameters are drawn first (rejection sampling for tuples and for
/// ties), then extras and knobs in declaration order.
pub fn sample_parameters(
    task: TaskKind,
    variant: Variant,
    split: Split,
    rng: &mut StimulusRng,
) -> Result<Vec<i32>> {
    let dims = param_space(task, variant);
    let nlab = task.label_param_count();
    let mut params = sample_label_params(task, &dims[..nlab], split, rng)?;
    for d in &dims[nlab..] {
        params.push(rng.gen_range(d.lo..=d.hi));
    }
    Ok(params)
}

fn sample_label_params(
    task: TaskKind,
    dims: &[ParamDim],
    split: Split,
    rng: &mut StimulusRng,
) -> Result<Vec<i32>> {
    if dims.len() == 1 {
        let d = &dims[0];
        let members: Vec<i32> = (d.lo..=d.hi)
            .filter(|&v| split_of_label(task, &[v]) == split)
            .collect();
        if members.is_empty() {
            return Err(Error::Capacity {
                split: split.to_string(),
                cardinality: 0,
                requested: 1,
            });
        }
        return Ok(vec![members[rng.gen_range(0..members.len())]]);
    }
    match task {
        TaskKind::PositionAngle(_) => loop {
            let values = random_composition(rng);
            if validate_label_values(task, &values).is_ok()
                && values.iter().all(|&v| v >= dims[0].lo && v <= dims[0].hi)
                && split_of_label(task, &values) == split
            {
                return Ok(values);
            }
        },
        _ => loop {
            let a = rng.gen_range(dims[0].lo..=dims[0].hi);
            let b = rng.gen_range(dims[1].lo..=dims[1].hi);
            if a != b && split_of_label(task, &[a, b]) == split {
                return Ok(vec![a, b]);
            }
        },
    }
}

fn split_of_label(task: TaskKind, label: &[i32]) -> Split {
    Split::from_residue(partition_key(task, label))
}

/// Five positive integers summing to 100, from four distinct cut points.
fn random_composition(rng: &mut StimulusRng) -> Vec<i32> {
    let mut cuts = [0i32; 4];
    let mut n = 0;
    while n < 4 {
        let c = rng.gen_range(1..100);
        if !cuts[..n].contains(&c) {
            cuts[n] = c;
            n += 1;
        }
    }
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(5);
    let mut prev = 0;
    for c in cuts {
        out.push(c - prev);
        prev = c;
    }
    out.push(100 - prev);
    out
}

/// Number of label tuples in `split`'s subset.
pub fn label_subset_cardinality(task: TaskKind, variant: Variant, split: Split) -> u128 {
    let dims = param_space(task, variant);
    let nlab = task.label_param_count();
    let in_split = |v: &[i32]| split_of_label(task, v) == split;
    match nlab {
        1 => (dims[0].lo..=dims[0].hi).filter(|&v| in_split(&[v])).count() as u128,
        2 => {
            let mut n = 0u128;
            for a in dims[0].lo..=dims[0].hi {
                for b in dims[1].lo..=dims[1].hi {
                    if a != b && in_split(&[a, b]) {
                        n += 1;
                    }
                }
            }
            n
        }
        _ => {
            let (lo, hi) = (dims[0].lo, dims[0].hi);
            let mut n = 0u128;
            let mut v = [0i32; 5];
            for a in lo..=hi {
                v[0] = a;
                for b in lo..=hi.min(100 - a) {
                    v[1] = b;
                    for c in lo..=hi.min(100 - a - b) {
                        v[2] = c;
                        for d in lo..=hi.min(100 - a - b - c) {
                            v[3] = d;
                            let e = 100 - a - b - c - d;
                            if e < lo || e > hi {
                                continue;
                            }
                            v[4] = e;
                            if validate_label_values(task, &v).is_ok() && in_split(&v) {
                                n += 1;
                            }
                        }
                    }
                }
            }
            n
        }
    }
}

/// Number of distinct full parameter vectors in `split`'s subset.
pub fn subset_cardinality(task: TaskKind, variant: Variant, split: Split) -> u128 {
    let dims = param_space(task, variant);
    let rest: u128 = dims[task.label_param_count()..]
        .iter()
        .map(|d| d.cardinality())
        .product();
    label_subset_cardinality(task, variant, split).saturating_mul(rest)
}

/// Tracks already-emitted tuples when a dataset requires unique parameters.
#[derive(Debug, Default)]
pub struct UniqueSampler {
    seen: HashSet<Vec<i32>>,
}

impl UniqueSampler {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fails up front when more tuples are requested than the subset holds.
    pub fn check_capacity(task: TaskKind, variant: Variant, split: Split, requested: usize) -> Result<()> {
        let cardinality = subset_cardinality(task, variant, split);
        if requested as u128 > cardinality {
            return Err(Error::Capacity {
                split: split.to_string(),
                cardinality,
                requested: requested as u128,
            });
        }
        Ok(())
    }

    /// Redraws from the same stream until an unseen tuple appears.
    pub fn draw(
        &mut self,
        task: TaskKind,
        variant: Variant,
        split: Split,
        rng: &mut StimulusRng,
    ) -> Result<Vec<i32>> {
        loop {
            let p = sample_parameters(task, variant, split, rng)?;
            if self.seen.insert(p.clone()) {
                return Ok(p);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::param_rng;
    use crate::stimuli::task::{ChartStyle, Elementary, FrameStyle, LengthLayout};

    const LENGTH: TaskKind = TaskKind::Elementary(Elementary::Length);

    #[test]
    fn length_train_never_yields_val_or_test_values() {
        let mut rng = param_rng(1);
        for _ in 0..2000 {
            let p = sample_parameters(LENGTH, Variant::Base, Split::Train, &mut rng).unwrap();
            assert!(p[0] % 5 <= 2, "{}", p[0]);
        }
    }

    #[test]
    fn identical_seed_identical_tuples() {
        for t in TaskKind::all() {
            let a = sample_parameters(t, Variant::PosSize, Split::Test, &mut param_rng(9)).unwrap();
            let b = sample_parameters(t, Variant::PosSize, Split::Test, &mut param_rng(9)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn membership_matches_partition_over_many_draws() {
        let mut rng = param_rng(2024);
        let tasks = TaskKind::all();
        let mut draws = 0;
        for i in 0..10_000 {
            let t = tasks[i % tasks.len()];
            let split = Split::ALL[i % 3];
            let v = Variant::ALL[(i / 3) % 4];
            let p = sample_parameters(t, v, split, &mut rng).unwrap();
            assert_eq!(split_of(t, &p), split);
            let dims = param_space(t, v);
            assert!(dims.iter().zip(&p).all(|(d, &x)| d.contains(x)));
            draws += 1;
        }
        assert_eq!(draws, 10_000);
    }

    #[test]
    fn partitions_cover_space_in_proportion() {
        let t = TaskKind::BarsFramed(FrameStyle::Framed);
        let counts: Vec<u128> = Split::ALL
            .iter()
            .map(|&s| label_subset_cardinality(t, Variant::Base, s))
            .collect();
        let total: u128 = counts.iter().sum();
        assert_eq!(total, 76 * 75);
        let train = counts[0] as f64 / total as f64;
        assert!((train - 0.6).abs() < 0.03, "{train}");
    }

    #[test]
    fn unique_sampling_reports_capacity() {
        // lengths 1..=92 with residue 0, 1, 2 mod 5: 18 + 19 + 19
        let card = subset_cardinality(LENGTH, Variant::Base, Split::Train);
        assert_eq!(card, 56);
        assert!(UniqueSampler::check_capacity(LENGTH, Variant::Base, Split::Train, 56).is_ok());
        match UniqueSampler::check_capacity(LENGTH, Variant::Base, Split::Train, 57) {
            Err(Error::Capacity { cardinality: 56, requested: 57, .. }) => {}
            other => panic!("{other:?}"),
        }
        let mut u = UniqueSampler::new();
        let mut rng = param_rng(3);
        let mut all: Vec<i32> = (0..56)
            .map(|_| u.draw(LENGTH, Variant::Base, Split::Train, &mut rng).unwrap()[0])
            .collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 56);
    }

    #[test]
    fn composite_draws_are_valid() {
        let mut rng = param_rng(5);
        for _ in 0..500 {
            let p = sample_parameters(
                TaskKind::PositionAngle(ChartStyle::Pie),
                Variant::Base,
                Split::Val,
                &mut rng,
            )
            .unwrap();
            assert_eq!(p[..5].iter().sum::<i32>(), 100);
            let max = *p[..5].iter().max().unwrap();
            assert_eq!(p[..5].iter().filter(|&&v| v == max).count(), 1);
            let q = sample_parameters(
                TaskKind::PositionLength(LengthLayout::Type5),
                Variant::Base,
                Split::Train,
                &mut rng,
            )
            .unwrap();
            assert_ne!(q[0], q[1]);
        }
    }
}
