use std::io::Write;

use super::SimTableRow;
use crate::error::{Error, Result};

/// One header line, then one line per row.
pub fn write_csv<W: Write>(rows: &[SimTableRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}

/// A JSON array of row objects.
pub fn write_json<W: Write>(rows: &[SimTableRow], mut writer: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut writer, rows).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    writeln!(writer)?;
    Ok(())
}
