//! Dataset generation, on-disk format and verification.

mod build;
mod format;
mod image;
mod manifest;
mod read;
mod verify;

pub use build::{
    build_dataset, draw_split_params, params_file_name, render_example, tensor_file_name,
    BuildOptions, ExampleParams, NOISE_MODEL, SEED_DERIVATION,
};
pub use format::{sha256_bytes, sha256_file, TensorHeader, TensorReader, TensorWriter, HEADER_LEN, MAGIC};
pub use image::{
    normalize_and_noise, normalize_with_amplitude, resize_image, FloatImage, NOISE_AMPLITUDE,
    VIT_INPUT_SIZE,
};
pub use manifest::{
    Dataset, DatasetManifest, FileEntry, ImageShape, SplitCounts, SplitFiles, FORMAT_VERSION,
    MANIFEST_FILE,
};
pub use read::{load_split, read_dataset, ExampleId, ExampleRecord, SplitReader};
pub use verify::{rewrite_example_params, verify_split_disjointness, Violation, ViolationKind, VerifyReport};

/// Reads the parameter file of one split.
pub fn read_split_params(ds: &Dataset, split: crate::stimuli::Split) -> crate::Result<Vec<ExampleParams>> {
    build::read_params_file(&ds.path_of(&ds.manifest.files(split).params))
}
