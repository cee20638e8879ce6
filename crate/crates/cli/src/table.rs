//! Plain CSV emission with a documented header row and floats serialized to
//! 17 significant digits so every value round-trips exactly.

/// One float, 17 significant digits, scientific notation.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Optional float; empty cell when absent.
pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        Csv {
            buf: format!("{header}\n"),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.buf.push_str(&cells.join(","));
        self.buf.push('\n');
    }

    pub fn into_string(self) -> String {
        self.buf
    }
}
