//! File formats: correspondence lists, label files, superpixel label
//! maps (CSV / 16-bit PGM), images (PPM P6 / PNG) and deterministic JSON
//! primitives.

mod corrfile;
mod image_io;
mod json;
mod labelmap;

pub use corrfile::{read_correspondences, write_correspondences};
pub use image_io::{load_image, read_ppm, write_ppm};
pub use json::{fmt_f64, json_string};
pub use labelmap::{read_label_file, read_labels, write_label_csv, write_labels};
