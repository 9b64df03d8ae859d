//! Correspondence files: UTF-8 text, one correspondence per line as
//! `x1 y1 x2 y2 score [gt_label]`, `#`-prefixed comment lines.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Correspondence, Point2};

pub fn read_correspondences(path: &Path) -> Result<Vec<Correspondence>> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |msg: &str| Error::Parse {
            path: path.to_path_buf(),
            line: lineno + 1,
            msg: msg.to_string(),
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 && fields.len() != 6 {
            return Err(parse_err("expected `x1 y1 x2 y2 score [gt_label]`"));
        }
        let mut nums = [0.0f64; 5];
        for (i, f) in fields[..5].iter().enumerate() {
            nums[i] = f.parse().map_err(|_| parse_err("not a number"))?;
            if !nums[i].is_finite() {
                return Err(parse_err("non-finite value"));
            }
        }
        if nums[4] < 0.0 {
            return Err(parse_err("matching score must be non-negative"));
        }
        let gt_label = match fields.get(5) {
            Some(f) => Some(f.parse::<usize>().map_err(|_| parse_err("bad gt label"))?),
            None => None,
        };
        out.push(Correspondence {
            p1: Point2::new(nums[0], nums[1]),
            p2: Point2::new(nums[2], nums[3]),
            score: nums[4],
            gt_label,
        });
    }
    Ok(out)
}

pub fn write_correspondences(path: &Path, corrs: &[Correspondence]) -> Result<()> {
    let mut text = String::from("# x1 y1 x2 y2 score [gt_label]\n");
    for c in corrs {
        text.push_str(&format!("{} {} {} {} {}", c.p1.x, c.p1.y, c.p2.x, c.p2.y, c.score));
        if let Some(l) = c.gt_label {
            text.push_str(&format!(" {l}"));
        }
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}
