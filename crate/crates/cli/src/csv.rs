//! Minimal CSV tables: comma separated, `.` decimal point, LF line ends, header row first.

/// Fixed-width scientific notation used for every float in every output.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    columns: usize,
    text: String,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Table {
            columns: header.len(),
            text,
        }
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) {
        assert_eq!(cells.len(), self.columns, "row width must match the header");
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            self.text.push_str(c.as_ref());
        }
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let mut t = Table::new(&["a", "b"]);
        t.row(&[num(1.0), "x".to_string()]);
        assert_eq!(t.into_string(), "a,b\n1.0000000000000000e0,x\n");
    }

    #[test]
    #[should_panic]
    fn width_checked() {
        Table::new(&["a", "b"]).row(&["1"]);
    }
}
