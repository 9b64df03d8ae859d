//! sRGB to CIELAB conversion (D65 reference white).

#[derive(Debug, Clone, Copy, Default)]
pub struct Lab {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

impl Lab {
    pub fn dist_sq(&self, other: &Lab) -> f64 {
        let dl = self.l - other.l;
        let da = self.a - other.a;
        let db = self.b - other.b;
        dl * dl + da * da + db * db
    }
}

fn srgb_linearize(v: u8) -> f64 {
    let c = v as f64 / 255.0;
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const EPSILON: f64 = 0.008856;
    const KAPPA: f64 = 903.3;
    if t > EPSILON {
        t.cbrt()
    } else {
        (KAPPA * t + 16.0) / 116.0
    }
}

pub fn rgb_to_lab(rgb: [u8; 3]) -> Lab {
    let r = srgb_linearize(rgb[0]);
    let g = srgb_linearize(rgb[1]);
    let b = srgb_linearize(rgb[2]);

    let x = r * 0.4124564 + g * 0.3575761 + b * 0.1804375;
    let y = r * 0.2126729 + g * 0.7151522 + b * 0.0721750;
    let z = r * 0.0193339 + g * 0.1191920 + b * 0.9503041;

    // D65 reference white.
    let fx = lab_f(x / 0.950456);
    let fy = lab_f(y / 1.0);
    let fz = lab_f(z / 1.088754);

    Lab { l: 116.0 * fy - 16.0, a: 500.0 * (fx - fy), b: 200.0 * (fy - fz) }
}
