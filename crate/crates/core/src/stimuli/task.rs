//! Task catalogue: kinds, parameterization variants, parameter spaces and
//! label normalization.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Elementary {
    PositionCommon,
    PositionNonAligned,
    Length,
    Direction,
    Angle,
    Area,
    Volume,
    Curvature,
    Shading,
}

impl Elementary {
    pub const ALL: [Elementary; 9] = [
        Elementary::PositionCommon,
        Elementary::PositionNonAligned,
        Elementary::Length,
        Elementary::Direction,
        Elementary::Angle,
        Elementary::Area,
        Elementary::Volume,
        Elementary::Curvature,
        Elementary::Shading,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChartStyle {
    Bar,
    Pie,
    PieNoOutline,
}

/// Cleveland–McGill position-length layouts. Types 1–3 are grouped bars,
/// types 4–5 divided (stacked) bars.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LengthLayout {
    Type1,
    Type2,
    Type3,
    Type4,
    Type5,
}

impl LengthLayout {
    pub const ALL: [LengthLayout; 5] = [
        LengthLayout::Type1,
        LengthLayout::Type2,
        LengthLayout::Type3,
        LengthLayout::Type4,
        LengthLayout::Type5,
    ];

    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn is_grouped(self) -> bool {
        matches!(self, LengthLayout::Type1 | LengthLayout::Type2 | LengthLayout::Type3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FrameStyle {
    Bar,
    Framed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CloudBase {
    Ten,
    Hundred,
    Thousand,
}

impl CloudBase {
    pub fn count(self) -> usize {
        match self {
            CloudBase::Ten => 10,
            CloudBase::Hundred => 100,
            CloudBase::Thousand => 1000,
        }
    }

    pub fn from_count(n: usize) -> Option<Self> {
        match n {
            10 => Some(CloudBase::Ten),
            100 => Some(CloudBase::Hundred),
            1000 => Some(CloudBase::Thousand),
            _ => None,
        }
    }
}

/// One of the thirteen task kinds, with its chart subtype where relevant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum TaskKind {
    Elementary(Elementary),
    PositionAngle(ChartStyle),
    PositionLength(LengthLayout),
    BarsFramed(FrameStyle),
    PointCloud(CloudBase),
}

impl TaskKind {
    /// Every concrete task, subtypes expanded (23 entries).
    pub fn all() -> Vec<TaskKind> {
        let mut v: Vec<TaskKind> = Elementary::ALL.iter().map(|&e| TaskKind::Elementary(e)).collect();
        v.extend(
            [ChartStyle::Bar, ChartStyle::Pie, ChartStyle::PieNoOutline]
                .map(TaskKind::PositionAngle),
        );
        v.extend(LengthLayout::ALL.map(TaskKind::PositionLength));
        v.extend([FrameStyle::Bar, FrameStyle::Framed].map(TaskKind::BarsFramed));
        v.extend(
            [CloudBase::Ten, CloudBase::Hundred, CloudBase::Thousand].map(TaskKind::PointCloud),
        );
        v
    }

    /// The thirteen task kinds, each with its default subtype.
    pub fn kinds() -> Vec<TaskKind> {
        let mut v: Vec<TaskKind> = Elementary::ALL.iter().map(|&e| TaskKind::Elementary(e)).collect();
        v.push(TaskKind::PositionAngle(ChartStyle::Bar));
        v.push(TaskKind::PositionLength(LengthLayout::Type1));
        v.push(TaskKind::BarsFramed(FrameStyle::Bar));
        v.push(TaskKind::PointCloud(CloudBase::Ten));
        v
    }

    /// Family name shared by all subtypes (`position-angle`, `length`, ...).
    pub fn family(self) -> &'static str {
        match self {
            TaskKind::Elementary(e) => elementary_id(e),
            TaskKind::PositionAngle(_) => "position-angle",
            TaskKind::PositionLength(_) => "position-length",
            TaskKind::BarsFramed(_) => "bars-framed",
            TaskKind::PointCloud(_) => "point-cloud",
        }
    }

    pub fn label_dim(self) -> usize {
        match self {
            TaskKind::PositionAngle(_) => 4,
            _ => 1,
        }
    }

    /// Number of leading parameters that carry the label (and key the
    /// split partition).
    pub fn label_param_count(self) -> usize {
        match self {
            TaskKind::Elementary(_) | TaskKind::PointCloud(_) => 1,
            TaskKind::PositionAngle(_) => 5,
            TaskKind::PositionLength(_) | TaskKind::BarsFramed(_) => 2,
        }
    }
}

fn elementary_id(e: Elementary) -> &'static str {
    match e {
        Elementary::PositionCommon => "position-common",
        Elementary::PositionNonAligned => "position-nonaligned",
        Elementary::Length => "length",
        Elementary::Direction => "direction",
        Elementary::Angle => "angle",
        Elementary::Area => "area",
        Elementary::Volume => "volume",
        Elementary::Curvature => "curvature",
        Elementary::Shading => "shading",
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            TaskKind::Elementary(e) => f.write_str(elementary_id(e)),
            TaskKind::PositionAngle(s) => f.write_str(match s {
                ChartStyle::Bar => "position-angle-bar",
                ChartStyle::Pie => "position-angle-pie",
                ChartStyle::PieNoOutline => "position-angle-pie-no-outline",
            }),
            TaskKind::PositionLength(l) => write!(f, "position-length-{}", l.number()),
            TaskKind::BarsFramed(s) => f.write_str(match s {
                FrameStyle::Bar => "bars-framed-bar",
                FrameStyle::Framed => "bars-framed-framed",
            }),
            TaskKind::PointCloud(b) => write!(f, "point-cloud-{}", b.count()),
        }
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase().replace('_', "-");
        let alias = match s.as_str() {
            "position-angle" => Some(TaskKind::PositionAngle(ChartStyle::Bar)),
            "position-length" => Some(TaskKind::PositionLength(LengthLayout::Type1)),
            "bars-framed" | "bars" => Some(TaskKind::BarsFramed(FrameStyle::Bar)),
            "framed" | "framed-rectangle" => Some(TaskKind::BarsFramed(FrameStyle::Framed)),
            "point-cloud" => Some(TaskKind::PointCloud(CloudBase::Ten)),
            "position" => Some(TaskKind::Elementary(Elementary::PositionCommon)),
            _ => None,
        };
        if let Some(t) = alias {
            return Ok(t);
        }
        TaskKind::all()
            .into_iter()
            .find(|t| t.to_string() == s)
            .ok_or(Error::Unknown {
                what: "task",
                value: s,
            })
    }
}

impl From<TaskKind> for String {
    fn from(t: TaskKind) -> String {
        t.to_string()
    }
}

impl TryFrom<String> for TaskKind {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Parameterization variant: which non-label properties are randomized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Variant {
    Base,
    Pos,
    Size,
    PosSize,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Base, Variant::Pos, Variant::Size, Variant::PosSize];

    pub fn randomizes_position(self) -> bool {
        matches!(self, Variant::Pos | Variant::PosSize)
    }

    pub fn randomizes_size(self) -> bool {
        matches!(self, Variant::Size | Variant::PosSize)
    }

    pub fn id(self) -> &'static str {
        match self {
            Variant::Base => "base",
            Variant::Pos => "+pos",
            Variant::Size => "+size",
            Variant::PosSize => "+pos+size",
        }
    }

    /// Filesystem-friendly id (`base`, `pos`, `size`, `pos-size`).
    pub fn slug(self) -> &'static str {
        match self {
            Variant::Base => "base",
            Variant::Pos => "pos",
            Variant::Size => "size",
            Variant::PosSize => "pos-size",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "base" => Ok(Variant::Base),
            "+pos" | "pos" => Ok(Variant::Pos),
            "+size" | "size" => Ok(Variant::Size),
            "+pos+size" | "pos-size" | "pos+size" | "+size+pos" => Ok(Variant::PosSize),
            other => Err(Error::Unknown {
                what: "variant",
                value: other.to_string(),
            }),
        }
    }
}

impl From<Variant> for String {
    fn from(v: Variant) -> String {
        v.id().to_string()
    }
}

impl TryFrom<String> for Variant {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamRole {
    /// Carries the label; keys the split partition.
    Label,
    /// Other scene content (unmarked bars, axis offsets).
    Extra,
    /// Placement and size knobs controlled by the variant.
    Nuisance,
}

/// One integer generation parameter and its inclusive range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamDim {
    pub name: String,
    pub lo: i32,
    pub hi: i32,
    pub role: ParamRole,
}

impl ParamDim {
    fn new(name: impl Into<String>, lo: i32, hi: i32, role: ParamRole) -> Self {
        ParamDim {
            name: name.into(),
            lo,
            hi,
            role,
        }
    }

    fn fixed(name: &str, value: i32, role: ParamRole) -> Self {
        Self::new(name, value, value, role)
    }

    pub fn cardinality(&self) -> u128 {
        (self.hi as i64 - self.lo as i64 + 1).max(0) as u128
    }

    pub fn contains(&self, v: i32) -> bool {
        v >= self.lo && v <= self.hi
    }
}

/// Placement/size ranges for one task. `size` is `(base value, lo, hi)`.
struct Knobs {
    dx: (i32, i32),
    dy: (i32, i32),
    size: (i32, i32, i32),
}

fn knobs(task: TaskKind) -> Knobs {
    use Elementary::*;
    let k = |dx, dy, size| Knobs { dx, dy, size };
    match task {
        TaskKind::Elementary(e) => match e {
            PositionCommon => k((-15, 60), (-2, 3), (1, 1, 3)),
            PositionNonAligned => k((-15, 25), (-1, 0), (1, 1, 3)),
            Length => k((-45, 45), (-5, 3), (1, 1, 3)),
            Direction => k((-15, 15), (-15, 15), (1, 1, 3)),
            Angle => k((-25, 40), (-30, 35), (1, 1, 3)),
            Area => k((-25, 30), (-30, 30), (1, 1, 3)),
            Volume => k((-28, 27), (-25, 31), (1, 1, 3)),
            Curvature => k((-18, 18), (-45, 28), (1, 1, 3)),
            Shading => k((-19, 19), (-19, 19), (60, 40, 60)),
        },
        TaskKind::PositionAngle(ChartStyle::Bar) => k((-8, 7), (-6, 5), (10, 6, 12)),
        TaskKind::PositionAngle(_) => k((-4, 4), (-4, 4), (40, 30, 45)),
        TaskKind::PositionLength(l) if l.is_grouped() => k((-4, 3), (-6, 9), (6, 5, 7)),
        TaskKind::PositionLength(_) => k((-18, 25), (-5, 5), (6, 5, 7)),
        TaskKind::BarsFramed(_) => k((-23, 19), (-1, 2), (10, 6, 14)),
        TaskKind::PointCloud(_) => k((-10, 10), (-10, 10), (100, 60, 100)),
    }
}

/// Full ordered parameter space for `(task, variant)`: label parameters,
/// extras, then the `dx`, `dy`, `size` knobs.
pub fn param_space(task: TaskKind, variant: Variant) -> Vec<ParamDim> {
    use ParamRole::*;
    let mut dims = Vec::new();
    match task {
        TaskKind::Elementary(e) => {
            let (name, lo, hi) = elementary_range(e);
            dims.push(ParamDim::new(name, lo, hi, Label));
            if e == Elementary::PositionNonAligned {
                dims.push(if variant.randomizes_position() {
                    ParamDim::new("axis_offset", 2, 6, Extra)
                } else {
                    ParamDim::fixed("axis_offset", 4, Extra)
                });
            }
        }
        TaskKind::PositionAngle(_) => {
            for i in 1..=5 {
                dims.push(ParamDim::new(format!("value{i}"), 3, 88, Label));
            }
        }
        TaskKind::PositionLength(l) => {
            let (lo, hi, others, olo, ohi) = if l.is_grouped() {
                (10, 85, 8, 10, 85)
            } else {
                (5, 35, 4, 5, 20)
            };
            dims.push(ParamDim::new("marked_a", lo, hi, Label));
            dims.push(ParamDim::new("marked_b", lo, hi, Label));
            for i in 1..=others {
                dims.push(ParamDim::new(format!("other{i}"), olo, ohi, Extra));
            }
        }
        TaskKind::BarsFramed(_) => {
            dims.push(ParamDim::new("bar_a", 5, 80, Label));
            dims.push(ParamDim::new("bar_b", 5, 80, Label));
            dims.push(if variant.randomizes_position() {
                ParamDim::new("baseline_offset", 2, 12, Extra)
            } else {
                ParamDim::fixed("baseline_offset", 8, Extra)
            });
        }
        TaskKind::PointCloud(_) => dims.push(ParamDim::new("delta", 0, 10, Label)),
    }

    let kn = knobs(task);
    if variant.randomizes_position() {
        dims.push(ParamDim::new("dx", kn.dx.0, kn.dx.1, Nuisance));
        dims.push(ParamDim::new("dy", kn.dy.0, kn.dy.1, Nuisance));
    } else {
        dims.push(ParamDim::fixed("dx", 0, Nuisance));
        dims.push(ParamDim::fixed("dy", 0, Nuisance));
    }
    let (base, lo, hi) = kn.size;
    let size = match (task, variant) {
        // The point-cloud window must shrink to leave room for translation.
        (TaskKind::PointCloud(_), Variant::Pos) => ParamDim::fixed("size", 80, Nuisance),
        (TaskKind::PointCloud(_), Variant::PosSize) => ParamDim::new("size", 60, 80, Nuisance),
        (_, v) if v.randomizes_size() => ParamDim::new("size", lo, hi, Nuisance),
        _ => ParamDim::fixed("size", base, Nuisance),
    };
    dims.push(size);
    dims
}

fn elementary_range(e: Elementary) -> (&'static str, i32, i32) {
    match e {
        Elementary::PositionCommon | Elementary::PositionNonAligned => ("height", 1, 92),
        Elementary::Length => ("length", 1, 92),
        Elementary::Direction => ("direction_deg", 0, 359),
        Elementary::Angle => ("angle_deg", 1, 90),
        Elementary::Area => ("side", 2, 40),
        Elementary::Volume => ("side", 2, 28),
        Elementary::Curvature => ("control_offset", 0, 45),
        Elementary::Shading => ("density", 1, 100),
    }
}

/// Declared range of the label-bearing parameter of an elementary task.
pub fn elementary_param_range(e: Elementary) -> (i32, i32) {
    let (_, lo, hi) = elementary_range(e);
    (lo, hi)
}

/// Normalized label for an elementary parameter value.
///
/// Heights, lengths and angles are divided by the range maximum (so an
/// 46 px segment reads 0.5); area and volume are min-max normalized on the
/// rendered quantity (s², s³); the rest are min-max on the parameter.
pub fn elementary_label(e: Elementary, v: i32) -> f64 {
    let v = v as f64;
    match e {
        Elementary::PositionCommon | Elementary::PositionNonAligned | Elementary::Length => {
            v / 92.0
        }
        Elementary::Direction => v / 359.0,
        Elementary::Angle => v / 90.0,
        Elementary::Area => (v * v - 4.0) / (1600.0 - 4.0),
        Elementary::Volume => (v * v * v - 8.0) / (28.0 * 28.0 * 28.0 - 8.0),
        Elementary::Curvature => v / 45.0,
        Elementary::Shading => (v - 1.0) / 99.0,
    }
}

/// Labels from a full parameter vector.
pub fn labels_for(task: TaskKind, params: &[i32]) -> Vec<f64> {
    match task {
        TaskKind::Elementary(e) => vec![elementary_label(e, params[0])],
        TaskKind::PositionAngle(_) => position_angle_labels(&params[..5]),
        TaskKind::PositionLength(_) | TaskKind::BarsFramed(_) => {
            let (a, b) = (params[0], params[1]);
            vec![a.min(b) as f64 / a.max(b) as f64]
        }
        TaskKind::PointCloud(_) => vec![params[0] as f64 / 10.0],
    }
}

/// The four non-maximum values divided by the maximum, in drawing order
/// starting after the maximum (left-to-right for bars, clockwise for pies;
/// both orders coincide because the pie is laid out in value order).
pub fn position_angle_labels(values: &[i32]) -> Vec<f64> {
    let (imax, &max) = values
        .iter()
        .enumerate()
        .max_by_key(|&(i, v)| (*v, std::cmp::Reverse(i)))
        .expect("five values");
    let n = values.len();
    (1..n)
        .map(|k| values[(imax + k) % n] as f64 / max as f64)
        .collect()
}

/// Everything needed to render one stimulus deterministically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StimulusSpec {
    pub task: TaskKind,
    pub variant: Variant,
    pub params: Vec<i32>,
    pub seed: u64,
}

impl StimulusSpec {
    /// Checks length and ranges against [`param_space`].
    pub fn validate(&self) -> Result<()> {
        let dims = param_space(self.task, self.variant);
        if dims.len() != self.params.len() {
            return Err(Error::InvalidValues(format!(
                "{} expects {} parameters, got {}",
                self.task,
                dims.len(),
                self.params.len()
            )));
        }
        for (d, &v) in dims.iter().zip(&self.params) {
            if !d.contains(v) {
                return Err(Error::RangeViolation {
                    name: d.name.clone(),
                    value: v as i64,
                    lo: d.lo as i64,
                    hi: d.hi as i64,
                });
            }
        }
        validate_label_values(self.task, &self.params[..self.task.label_param_count()])
    }

    pub fn knob(&self, name: &str) -> i32 {
        let dims = param_space(self.task, self.variant);
        let i = dims
            .iter()
            .position(|d| d.name == name)
            .unwrap_or_else(|| panic!("{} has no parameter {name}", self.task));
        self.params[i]
    }
}

/// Structural constraints beyond per-parameter ranges.
pub fn validate_label_values(task: TaskKind, values: &[i32]) -> Result<()> {
    match task {
        TaskKind::PositionAngle(_) => {
            let sum: i32 = values.iter().sum();
            if sum != 100 {
                return Err(Error::InvalidValues(format!(
                    "position-angle values must sum to 100, got {sum}"
                )));
            }
            let max = *values.iter().max().unwrap();
            if values.iter().filter(|&&v| v == max).count() != 1 {
                return Err(Error::InvalidValues(format!(
                    "position-angle maximum {max} is not unique"
                )));
            }
        }
        TaskKind::PositionLength(_) | TaskKind::BarsFramed(_) => {
            if values[0] == values[1] {
                return Err(Error::InvalidValues(format!(
                    "marked values are equal ({}); ratio 1 is excluded",
                    values[0]
                )));
            }
        }
        _ => {}
    }
    Ok(())
}
