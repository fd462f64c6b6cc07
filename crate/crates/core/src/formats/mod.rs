//! On-disk formats shared by the pipeline stages.
//!
//! Annotations and manifests are line-oriented text with `#` comments; depth
//! maps and per-point labels are little-endian binary files with a 4-byte magic.

mod annotations;
mod binary;
mod manifest;

pub use annotations::{
    compact_from_joints, format_annotation, format_annotations, parse_annotations, read_annotations, write_annotations,
    ANNOTATION_HEADER,
};
pub use binary::{
    decode_depth, decode_labels, encode_depth, encode_labels, read_depth, read_labels, write_depth, write_labels,
    DEPTH_MAGIC, LABEL_MAGIC, LABEL_RECORD,
};
pub use manifest::{
    absolute, format_capture, format_scene, parse_capture, parse_objects, parse_scene, read_capture, read_objects, read_scene,
    relative_to, write_capture, write_scene, CaptureManifest, ObjectEntry,
};
