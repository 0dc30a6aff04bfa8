//! Plain CSV output shared by the experiment drivers.
//!
//! Every numeric field is written with 17 significant digits so that doubles
//! survive a round trip through text.

use std::io::{self, Write};

/// `x` in scientific notation with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_row<W: Write + ?Sized, S: AsRef<str>>(w: &mut W, fields: &[S]) -> io::Result<()> {
    let mut first = true;
    for field in fields {
        if !first {
            w.write_all(b",")?;
        }
        w.write_all(field.as_ref().as_bytes())?;
        first = false;
    }
    w.write_all(b"\n")
}
