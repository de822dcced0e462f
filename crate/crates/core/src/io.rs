//! Event and label CSV files.
//!
//! Events: header `t_us,x,y,p`, one event per row, `p` is 1 for positive
//! and 0 for negative polarity. Labels: header `label`, one row per event
//! in the same order, holding the generating segment index or -1 for
//! background noise.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::{CameraId, Event, EventStream, Polarity};

#[derive(Serialize, Deserialize)]
struct EventRow {
    t_us: u64,
    x: u16,
    y: u16,
    p: u8,
}

#[derive(Serialize, Deserialize)]
struct LabelRow {
    label: i32,
}

pub fn write_events_csv(path: &Path, stream: &EventStream) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for e in stream.events() {
        w.serialize(EventRow {
            t_us: e.t,
            x: e.x,
            y: e.y,
            p: u8::from(e.polarity == Polarity::Positive),
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an event CSV for a sensor of the given size.
pub fn read_events_csv(path: &Path, width: u16, height: u16, camera: CameraId) -> Result<EventStream> {
    let mut r = csv::Reader::from_path(path)?;
    let mut events = Vec::new();
    for row in r.deserialize() {
        let row: EventRow = row?;
        let polarity = match row.p {
            1 => Polarity::Positive,
            0 => Polarity::Negative,
            p => return Err(Error::Format(format!("polarity must be 0 or 1, got {p}"))),
        };
        events.push(Event::new(row.x, row.y, row.t_us, polarity));
    }
    EventStream::new(events, width, height, camera)
}

pub fn write_labels_csv(path: &Path, labels: &[i32]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for &label in labels {
        w.serialize(LabelRow { label })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_labels_csv(path: &Path) -> Result<Vec<i32>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map(|l: LabelRow| l.label).map_err(Error::from))
        .collect()
}
